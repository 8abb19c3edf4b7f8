//! Stochastic subgradient method `x_{k+1} = x_k - a_k (y_k + ζ_k)`.

use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::autodiff::{loss_gradient, loss_value, pointcloud_gradient, AutodiffError, LossSpec, Pipeline};
use crate::filtrations::{monotone_projection, Filtration, FiltrationError, PointCloud};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizerError {
    #[error("learning rate {0} must be positive and finite")]
    BadRate(f64),
    #[error("decay exponent {0} must lie in (0.5, 1]")]
    BadExponent(f64),
    #[error("noise scale {0} must be nonnegative and finite")]
    BadNoise(f64),
    #[error("bounding box [{0}, {1}] is empty")]
    BadBounds(f64, f64),
    #[error("at least one epoch is required")]
    NoEpochs,
    #[error("non-finite gradient at step {step} (loss {loss}, iterate norm {norm})")]
    NonFiniteGradient { step: usize, loss: f64, norm: f64 },
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
    #[error(transparent)]
    Filtration(#[from] FiltrationError),
}

/// Learning-rate schedule `a_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    /// `a0 / (k + 1)`.
    Harmonic { a0: f64 },
    /// `a0`; not square summable.
    Constant { a0: f64 },
    /// `a0 / (k + 1)^exponent` with exponent in `(0.5, 1]`.
    PolynomialDecay { a0: f64, exponent: f64 },
}

impl Schedule {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        let a0 = match *self {
            Schedule::Harmonic { a0 } | Schedule::Constant { a0 } => a0,
            Schedule::PolynomialDecay { a0, exponent } => {
                if !(exponent > 0.5 && exponent <= 1.0) {
                    return Err(OptimizerError::BadExponent(exponent));
                }
                a0
            }
        };
        if !(a0 > 0.0 && a0.is_finite()) {
            return Err(OptimizerError::BadRate(a0));
        }
        if !self.is_summable_schedule() {
            warn!("constant learning rate does not satisfy Σ a_k² < ∞; convergence is not guaranteed");
        }
        Ok(())
    }

    /// `Σ a_k = ∞` and `Σ a_k² < ∞`.
    pub fn is_summable_schedule(&self) -> bool {
        match *self {
            Schedule::Harmonic { .. } => true,
            Schedule::Constant { .. } => false,
            // Σ k^-e diverges for e ≤ 1 and Σ k^-2e converges for e > 1/2
            Schedule::PolynomialDecay { exponent, .. } => exponent > 0.5 && exponent <= 1.0,
        }
    }

    pub fn rate(&self, k: usize) -> f64 {
        let k1 = (k + 1) as f64;
        match *self {
            Schedule::Harmonic { a0 } => a0 / k1,
            Schedule::Constant { a0 } => a0,
            Schedule::PolynomialDecay { a0, exponent } => a0 / k1.powf(exponent),
        }
    }
}

/// Settings shared by all optimization drivers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub schedule: Schedule,
    pub epochs: usize,
    pub seed: u64,
    /// Standard deviation of the Gaussian noise `ζ_k`.
    pub noise: f64,
    /// Coordinate-wise clamp applied after every step.
    pub bounds: Option<(f64, f64)>,
}

impl OptimizerConfig {
    pub fn new(schedule: Schedule, epochs: usize, seed: u64) -> Self {
        Self {
            schedule,
            epochs,
            seed,
            noise: 0.0,
            bounds: None,
        }
    }

    pub fn validate(&self) -> Result<(), OptimizerError> {
        self.schedule.validate()?;
        if self.epochs == 0 {
            return Err(OptimizerError::NoEpochs);
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(OptimizerError::BadNoise(self.noise));
        }
        if let Some((lo, hi)) = self.bounds {
            if !(lo <= hi) {
                return Err(OptimizerError::BadBounds(lo, hi));
            }
        }
        Ok(())
    }
}

/// Iterate, step counter, loss trace and random state.
#[derive(Debug, Clone)]
pub struct OptimizationState {
    pub iterate: Vec<f64>,
    pub k: usize,
    pub losses: Vec<f64>,
    pub seed: u64,
    rng: ChaCha8Rng,
    noise: Option<Normal<f64>>,
    schedule: Schedule,
    bounds: Option<(f64, f64)>,
}

impl OptimizationState {
    pub fn new(iterate: Vec<f64>, config: &OptimizerConfig) -> Result<Self, OptimizerError> {
        config.schedule.validate()?;
        if !(config.noise >= 0.0 && config.noise.is_finite()) {
            return Err(OptimizerError::BadNoise(config.noise));
        }
        let noise = (config.noise > 0.0)
            .then(|| Normal::new(0.0, config.noise).expect("scale checked above"));
        Ok(Self {
            iterate,
            k: 0,
            losses: Vec::new(),
            seed: config.seed,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            noise,
            schedule: config.schedule,
            bounds: config.bounds,
        })
    }

    /// One update with subgradient `y` observed at loss `loss`.
    pub fn step(&mut self, loss: f64, y: &[f64]) -> Result<(), OptimizerError> {
        assert_eq!(y.len(), self.iterate.len());
        if y.iter().any(|g| !g.is_finite()) || !loss.is_finite() {
            let norm = self.iterate.iter().map(|v| v * v).sum::<f64>().sqrt();
            return Err(OptimizerError::NonFiniteGradient {
                step: self.k,
                loss,
                norm,
            });
        }
        let a = self.schedule.rate(self.k);
        for (x, g) in self.iterate.iter_mut().zip(y) {
            let zeta = match &self.noise {
                Some(d) => d.sample(&mut self.rng),
                None => 0.0,
            };
            *x -= a * (g + zeta);
            if let Some((lo, hi)) = self.bounds {
                *x = x.clamp(lo, hi);
            }
        }
        self.losses.push(loss);
        self.k += 1;
        Ok(())
    }
}

/// One recorded epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct Epoch<T> {
    pub epoch: usize,
    /// Loss as minimized, sign included.
    pub objective: f64,
    /// The descriptor loss `E` without the sign.
    pub loss: f64,
    pub iterate: T,
}

/// Iterates before every step plus the final one.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub epochs: Vec<Epoch<T>>,
}

impl<T> Trajectory<T> {
    pub fn initial(&self) -> &Epoch<T> {
        &self.epochs[0]
    }

    pub fn last(&self) -> &Epoch<T> {
        self.epochs.last().expect("trajectories are never empty")
    }

    pub fn losses(&self) -> Vec<f64> {
        self.epochs.iter().map(|e| e.loss).collect()
    }
}

/// Optimize filtration values directly; iterates are repaired by
/// [`monotone_projection`] after every step.
pub fn optimize_filtration(
    f0: &Filtration,
    spec: &LossSpec,
    config: &OptimizerConfig,
) -> Result<Trajectory<Filtration>, OptimizerError> {
    config.validate()?;
    let complex = f0.complex().clone();
    let n = f0.parameters();
    let mut state = OptimizationState::new(f0.values().to_vec(), config)?;
    let mut epochs = Vec::with_capacity(config.epochs + 1);
    for epoch in 0..config.epochs {
        let f = f0.with_values(state.iterate.clone())?;
        let (objective, g) = loss_gradient(&f, spec)?;
        epochs.push(Epoch {
            epoch,
            objective,
            loss: objective * spec.sign,
            iterate: f,
        });
        state.step(objective, &g.values)?;
        monotone_projection(&complex, n, &mut state.iterate);
    }
    let f = f0.with_values(state.iterate)?;
    let objective = loss_value(&f, spec)?;
    epochs.push(Epoch {
        epoch: config.epochs,
        objective,
        loss: objective * spec.sign,
        iterate: f,
    });
    Ok(Trajectory { epochs })
}

/// Optimize point positions through a filtration pipeline. The pipeline
/// (including any density estimate and its bandwidth) is rebuilt at every
/// epoch.
pub fn optimize_pointcloud(
    x0: &PointCloud,
    pipeline: &Pipeline,
    spec: &LossSpec,
    config: &OptimizerConfig,
) -> Result<Trajectory<PointCloud>, OptimizerError> {
    config.validate()?;
    let d = x0.dim();
    let mut state = OptimizationState::new(x0.flat(), config)?;
    let mut epochs = Vec::with_capacity(config.epochs + 1);
    for epoch in 0..config.epochs {
        let x = PointCloud::from_flat(&state.iterate, d)?;
        let (objective, g) = pointcloud_gradient(&x, pipeline, spec)?;
        info!("epoch {epoch}: objective {objective}");
        let flat: Vec<f64> = g.concat();
        epochs.push(Epoch {
            epoch,
            objective,
            loss: objective * spec.sign,
            iterate: x,
        });
        state.step(objective, &flat)?;
    }
    let x = PointCloud::from_flat(&state.iterate, d)?;
    let w = pipeline.build(&x)?;
    let objective = loss_value(&w.filtration, spec)?;
    epochs.push(Epoch {
        epoch: config.epochs,
        objective,
        loss: objective * spec.sign,
        iterate: x,
    });
    Ok(Trajectory { epochs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(schedule: Schedule) -> OptimizerConfig {
        OptimizerConfig::new(schedule, 1, 0)
    }

    #[test]
    fn zero_gradient_keeps_iterate() {
        let mut s = OptimizationState::new(vec![1.0, -2.0], &config(Schedule::Harmonic { a0: 1.0 })).unwrap();
        s.step(0.0, &[0.0, 0.0]).unwrap();
        assert_eq!(s.iterate, vec![1.0, -2.0]);
        assert_eq!(s.losses.len(), 1);
    }

    #[test]
    fn quadratic_descends() {
        let mut s = OptimizationState::new(vec![1.0], &config(Schedule::Harmonic { a0: 0.5 })).unwrap();
        let mut prev = 1.0f64;
        for _ in 0..200 {
            let x = s.iterate[0];
            s.step(x * x, &[2.0 * x]).unwrap();
            assert!(s.iterate[0].abs() <= prev.abs());
            prev = s.iterate[0];
        }
        assert!(prev.abs() < 0.2);
    }

    #[test]
    fn noise_is_seeded() {
        let mut cfg = config(Schedule::Constant { a0: 0.1 });
        cfg.noise = 1.0;
        let run = |seed| {
            let mut c = cfg;
            c.seed = seed;
            let mut s = OptimizationState::new(vec![0.0; 4], &c).unwrap();
            for _ in 0..10 {
                s.step(0.0, &[0.0; 4]).unwrap();
            }
            s.iterate
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
    }

    #[test]
    fn clamp_and_validation() {
        let mut cfg = config(Schedule::Constant { a0: 10.0 });
        cfg.bounds = Some((-1.0, 1.0));
        let mut s = OptimizationState::new(vec![0.0], &cfg).unwrap();
        s.step(0.0, &[5.0]).unwrap();
        assert_eq!(s.iterate, vec![-1.0]);
        assert!(s.step(0.0, &[f64::NAN]).is_err());

        assert!(Schedule::PolynomialDecay {
            a0: 1.0,
            exponent: 0.5
        }
        .validate()
        .is_err());
        assert!(Schedule::Harmonic { a0: 0.0 }.validate().is_err());
        assert!(Schedule::PolynomialDecay {
            a0: 1.0,
            exponent: 0.75
        }
        .is_summable_schedule());
        assert!(!Schedule::Constant { a0: 1.0 }.is_summable_schedule());
        let mut c = config(Schedule::Harmonic { a0: 1.0 });
        c.epochs = 0;
        assert_eq!(c.validate(), Err(OptimizerError::NoEpochs));
    }
}
