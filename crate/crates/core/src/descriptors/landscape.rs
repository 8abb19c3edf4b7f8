//! Multiparameter persistence landscapes.
//!
//! `λ^k(z) = sup{ε ≥ 0 : rk(z - ε·1, z + ε·1) ≥ k}`. On a grid filtration the
//! rank between real points is the rank between the grid points just below
//! them, so the supremum is attained by a finite max:
//!
//! `λ^k(z) = max_{a : ι(a) ≤ z} min(d↓(z, ι(a)), min_{b ∈ B_k(a)} d↑(z, ι(b)))`
//!
//! where `B_k(a)` are the minimal grid points `b ≥ a` with `rk(a, b) < k`
//! (an empty minimum is `+∞`), `d↓(z, x) = min_j (z_j - x_j)` and
//! `d↑(z, y) = max(0, max_j (y_j - z_j))`.

use super::rank::{rank_grid, RankGrid};
use super::DescriptorError;
use crate::filtrations::Filtration;
use crate::stratification::{stratify, Stratification};

/// Which distance realizes a landscape value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `z_axis - ι_axis(a_axis)`.
    Down { axis: usize },
    /// `ι_axis(b_axis) - z_axis` for the blocker `b`.
    Up { blocker: usize, axis: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandscapeWitness {
    pub value: f64,
    /// Grid point `a` and the active side; `None` when no `ι(a) ≤ z`.
    pub active: Option<(usize, Side)>,
}

/// Evaluates `λ^k` at arbitrary points for one filtration, degree and level.
#[derive(Debug, Clone)]
pub struct LandscapeEvaluator {
    strat: Stratification,
    k: usize,
    /// Grid points with `rk(a, a) ≥ k`, each with its minimal blockers.
    starts: Vec<(usize, Vec<usize>)>,
}

impl LandscapeEvaluator {
    pub fn new(f: &Filtration, degree: usize, k: usize) -> Result<Self, DescriptorError> {
        let strat = stratify(f);
        let rank = rank_grid(&strat.ord, degree)?;
        Self::from_rank(strat, &rank, k)
    }

    pub fn from_rank(
        strat: Stratification,
        rank: &RankGrid,
        k: usize,
    ) -> Result<Self, DescriptorError> {
        if k == 0 {
            return Err(DescriptorError::ZeroLevel);
        }
        let grid = &rank.grid;
        let k_i = k as i64;
        let blocked = |a: usize, b: usize| grid.leq(a, b) && rank.at(a, b) < k_i;
        let starts = (0..grid.len())
            .filter(|&a| rank.at(a, a) >= k_i)
            .map(|a| {
                let minimal = (0..grid.len())
                    .filter(|&b| blocked(a, b))
                    .filter(|&b| {
                        (0..grid.dim()).all(|i| {
                            grid.coord(b, i) == grid.coord(a, i) || !blocked(a, b - grid.stride(i))
                        })
                    })
                    .collect();
                (a, minimal)
            })
            .collect();
        Ok(Self { strat, k, starts })
    }

    pub fn level(&self) -> usize {
        self.k
    }

    pub fn stratification(&self) -> &Stratification {
        &self.strat
    }

    pub fn evaluate(&self, z: &[f64]) -> Result<f64, DescriptorError> {
        Ok(self.witness(z)?.value)
    }

    /// Landscape value and the grid data realizing it. Ties go to the lowest
    /// grid point, then to the lower side, then to the lowest blocker and axis.
    pub fn witness(&self, z: &[f64]) -> Result<LandscapeWitness, DescriptorError> {
        let grid = self.strat.grid();
        let n = grid.dim();
        if z.len() != n {
            return Err(DescriptorError::QueryDimension {
                expected: n,
                got: z.len(),
            });
        }
        let iota = |p: usize, j: usize| self.strat.incl.axis(j)[grid.coord(p, j)];
        let mut best = LandscapeWitness {
            value: 0.0,
            active: None,
        };
        for (a, blockers) in &self.starts {
            let a = *a;
            if (0..n).any(|j| iota(a, j) > z[j]) {
                continue;
            }
            let (mut value, mut axis) = (f64::INFINITY, 0);
            for j in 0..n {
                let d = z[j] - iota(a, j);
                if d < value {
                    value = d;
                    axis = j;
                }
            }
            let mut side = Side::Down { axis };
            for &b in blockers {
                let (mut up, mut up_axis) = (f64::NEG_INFINITY, 0);
                for j in 0..n {
                    let d = iota(b, j) - z[j];
                    if d > up {
                        up = d;
                        up_axis = j;
                    }
                }
                let up = up.max(0.0);
                if up < value {
                    value = up;
                    side = Side::Up {
                        blocker: b,
                        axis: up_axis,
                    };
                }
            }
            if best.active.is_none() || value > best.value {
                best = LandscapeWitness {
                    value,
                    active: Some((a, side)),
                };
            }
        }
        Ok(best)
    }

    /// Value, gradient with respect to the grid inclusion as
    /// `(axis, level, coefficient)` triples, and gradient with respect to `z`.
    #[allow(clippy::type_complexity)]
    pub fn gradient(
        &self,
        z: &[f64],
    ) -> Result<(f64, Vec<(usize, usize, f64)>, Vec<f64>), DescriptorError> {
        let w = self.witness(z)?;
        let grid = self.strat.grid();
        let mut dz = vec![0.0; z.len()];
        let mut dincl = Vec::new();
        match w.active {
            None => {}
            Some((a, Side::Down { axis })) => {
                dz[axis] = 1.0;
                dincl.push((axis, grid.coord(a, axis), -1.0));
            }
            Some((_, Side::Up { blocker, axis })) => {
                // constant zero once z dominates the blocker
                if w.value > 0.0 || grid_value(self, blocker, axis) >= z[axis] {
                    dz[axis] = -1.0;
                    dincl.push((axis, grid.coord(blocker, axis), 1.0));
                }
            }
        }
        Ok((w.value, dincl, dz))
    }
}

fn grid_value(ev: &LandscapeEvaluator, p: usize, axis: usize) -> f64 {
    ev.strat.incl.axis(axis)[ev.strat.grid().coord(p, axis)]
}

/// `λ^k(z)` for `H_degree(f)`.
pub fn landscape(
    f: &Filtration,
    degree: usize,
    k: usize,
    z: &[f64],
) -> Result<f64, DescriptorError> {
    LandscapeEvaluator::new(f, degree, k)?.evaluate(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::SimplicialComplex;
    use std::sync::Arc;

    fn chain() -> Filtration {
        let k = Arc::new(SimplicialComplex::from_simplices([vec![0], vec![1], vec![0, 1]]).unwrap());
        Filtration::new(k, 1, vec![0.0, 1.0, 2.0]).unwrap()
    }

    #[test]
    fn chain_levels() {
        let f = chain();
        assert_eq!(landscape(&f, 0, 2, &[1.5]).unwrap(), 0.5);
        assert_eq!(landscape(&f, 0, 1, &[1.5]).unwrap(), 1.5);
        assert_eq!(landscape(&f, 0, 3, &[1.5]).unwrap(), 0.0);
        assert_eq!(landscape(&f, 0, 1, &[-0.5]).unwrap(), 0.0);
        assert_eq!(landscape(&f, 0, 2, &[5.0]).unwrap(), 0.0);
        assert!(matches!(
            landscape(&f, 0, 0, &[0.0]),
            Err(DescriptorError::ZeroLevel)
        ));
    }

    #[test]
    fn chain_gradient() {
        let ev = LandscapeEvaluator::new(&chain(), 0, 2).unwrap();
        // z = 1.2: d↓ = 0.2 from the bar [1, 2)
        let (v, dincl, dz) = ev.gradient(&[1.2]).unwrap();
        assert!((v - 0.2).abs() < 1e-12);
        assert_eq!(dincl, vec![(0, 1, -1.0)]);
        assert_eq!(dz, vec![1.0]);
        // z = 1.8: d↑ = 0.2 to the death at 2
        let (_, dincl, dz) = ev.gradient(&[1.8]).unwrap();
        assert_eq!(dincl, vec![(0, 2, 1.0)]);
        assert_eq!(dz, vec![-1.0]);
    }
}
