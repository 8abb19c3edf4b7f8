//! JSON run configuration for `mpgrad optimize`.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use mpgrad::autodiff::{
    Bandwidth, Descriptor, GaussianBump, Integrand, LossKind, LossSpec, Pipeline,
};
use mpgrad::optimizer::{OptimizerConfig, Schedule};
use mpgrad::{GroundSpace, PointCloud, SignedMeasure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Point cloud to optimize. Exclusive with `complex`/`filtration`.
    #[serde(default)]
    pub points: Option<PointsSource>,
    #[serde(default)]
    pub pipeline: Option<PipelineConfig>,
    #[serde(default)]
    pub complex: Option<PathBuf>,
    #[serde(default)]
    pub filtration: Option<PathBuf>,
    #[serde(default)]
    pub n: Option<usize>,
    pub loss: LossConfig,
    pub schedule: ScheduleConfig,
    pub epochs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub bounds: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PointsSource {
    /// `count` points uniform in `[0, 1)²`, drawn with ChaCha8 from `seed`.
    UniformSquare { count: usize, seed: u64 },
    File(PathBuf),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PipelineConfig {
    Rips {
        #[serde(default = "two")]
        max_dim: usize,
        #[serde(default)]
        max_radius: Option<f64>,
    },
    FunctionRips {
        #[serde(default = "two")]
        max_dim: usize,
        #[serde(default)]
        max_radius: Option<f64>,
        #[serde(default)]
        bandwidth: BandwidthConfig,
    },
}

fn two() -> usize {
    2
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BandwidthConfig {
    Fixed(f64),
    DiameterFraction(f64),
}

impl Default for BandwidthConfig {
    fn default() -> Self {
        BandwidthConfig::DiameterFraction(0.2)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LossConfig {
    /// Transport distance to `target`: `"zero"` or a measure CSV path.
    Distance {
        #[serde(default = "hilbert")]
        descriptor: String,
        target: TargetConfig,
        degree: usize,
        #[serde(default = "one")]
        sign: f64,
    },
    Integration {
        integrand: IntegrandConfig,
        degree: usize,
        #[serde(default = "one")]
        sign: f64,
    },
    LandscapeL2 {
        k: usize,
        points: Vec<Vec<f64>>,
        target: Vec<f64>,
        degree: usize,
        #[serde(default = "one")]
        sign: f64,
    },
}

fn hilbert() -> String {
    "hilbert".into()
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TargetConfig {
    Named(String),
    File { file: PathBuf },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum IntegrandConfig {
    Gaussian(Vec<BumpConfig>),
    NormPower(f64),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpConfig {
    pub center: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
    #[serde(default = "one")]
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleConfig {
    Harmonic { a0: f64 },
    Constant { a0: f64 },
    PolynomialDecay { a0: f64, exponent: f64 },
}

/// What `optimize` runs on.
pub enum Problem {
    Points { x0: PointCloud, pipeline: Pipeline },
    Filtration { complex: PathBuf, filtration: PathBuf, n: usize },
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("invalid config {}", path.display()))?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    /// Relative paths in the config are relative to the config file.
    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(PointsSource::File(p)) = &mut self.points {
            fix(p);
        }
        if let Some(p) = &mut self.complex {
            fix(p);
        }
        if let Some(p) = &mut self.filtration {
            fix(p);
        }
        if let LossConfig::Distance {
            target: TargetConfig::File { file },
            ..
        } = &mut self.loss
        {
            fix(file);
        }
    }

    pub fn optimizer(&self) -> Result<OptimizerConfig> {
        if self.epochs == 0 {
            bail!("`epochs` must be at least 1");
        }
        let schedule = match self.schedule {
            ScheduleConfig::Harmonic { a0 } => Schedule::Harmonic { a0 },
            ScheduleConfig::Constant { a0 } => Schedule::Constant { a0 },
            ScheduleConfig::PolynomialDecay { a0, exponent } => {
                Schedule::PolynomialDecay { a0, exponent }
            }
        };
        let mut c = OptimizerConfig::new(schedule, self.epochs, self.seed);
        c.noise = self.noise;
        c.bounds = self.bounds;
        c.validate().context("invalid optimizer settings")?;
        Ok(c)
    }

    pub fn problem(&self) -> Result<Problem> {
        match (&self.points, &self.complex, &self.filtration) {
            (Some(src), None, None) => {
                let x0 = match src {
                    PointsSource::UniformSquare { count, seed } => {
                        let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                        let pts = (0..*count)
                            .map(|_| vec![rng.random::<f64>(), rng.random::<f64>()])
                            .collect();
                        PointCloud::new(pts)?
                    }
                    PointsSource::File(path) => {
                        let text = std::fs::read_to_string(path)
                            .with_context(|| format!("cannot read {}", path.display()))?;
                        mpgrad::io::parse_points(&text)?
                    }
                };
                let pipeline = match self.pipeline.clone() {
                    None => bail!("a point cloud config needs a `pipeline`"),
                    Some(PipelineConfig::Rips { max_dim, max_radius }) => Pipeline::Rips {
                        max_dim,
                        max_radius: max_radius.unwrap_or(f64::INFINITY),
                    },
                    Some(PipelineConfig::FunctionRips {
                        max_dim,
                        max_radius,
                        bandwidth,
                    }) => Pipeline::FunctionRips {
                        max_dim,
                        max_radius: max_radius.unwrap_or(f64::INFINITY),
                        bandwidth: match bandwidth {
                            BandwidthConfig::Fixed(h) if h > 0.0 => Bandwidth::Fixed(h),
                            BandwidthConfig::DiameterFraction(c) if c > 0.0 => {
                                Bandwidth::DiameterFraction(c)
                            }
                            _ => bail!("bandwidth must be positive"),
                        },
                    },
                };
                Ok(Problem::Points { x0, pipeline })
            }
            (None, Some(c), Some(f)) => Ok(Problem::Filtration {
                complex: c.clone(),
                filtration: f.clone(),
                n: self.n.context("a filtration config needs `n`")?,
            }),
            _ => bail!("give either `points` or both `complex` and `filtration`"),
        }
    }

    /// Number of filtration parameters the loss lives in.
    pub fn parameters(&self) -> Result<usize> {
        Ok(match (&self.pipeline, self.n) {
            (_, Some(n)) => n,
            (Some(PipelineConfig::Rips { .. }), None) => 1,
            (Some(PipelineConfig::FunctionRips { .. }), None) => 2,
            (None, None) => bail!("cannot tell the parameter count; set `n`"),
        })
    }
}

impl LossConfig {
    pub fn spec(&self, n: usize) -> Result<LossSpec> {
        Ok(match self {
            LossConfig::Distance {
                descriptor,
                target,
                degree,
                sign,
            } => {
                let (descriptor, ground) = match descriptor.as_str() {
                    "hilbert" => (Descriptor::Hilbert, GroundSpace::Rn(n)),
                    "rank" => (Descriptor::Rank, GroundSpace::Bars(n)),
                    other => bail!("unknown descriptor `{other}` (use hilbert or rank)"),
                };
                let nu = match target {
                    TargetConfig::Named(s) if s == "zero" => SignedMeasure::zero(ground),
                    TargetConfig::Named(s) => bail!("unknown target `{s}` (use \"zero\" or {{\"file\": ...}})"),
                    TargetConfig::File { file } => {
                        let text = std::fs::read_to_string(file)
                            .with_context(|| format!("cannot read {}", file.display()))?;
                        mpgrad::io::parse_measure(&text)?
                    }
                };
                LossSpec::new(LossKind::DistanceToMeasure(nu), descriptor, *degree, *sign)?
            }
            LossConfig::Integration {
                integrand,
                degree,
                sign,
            } => {
                let psi = match integrand {
                    IntegrandConfig::NormPower(p) => Integrand::NormPower(*p),
                    IntegrandConfig::Gaussian(bumps) => Integrand::Gaussian(
                        bumps
                            .iter()
                            .map(|b| GaussianBump::new(b.center.clone(), &b.sigma, b.weight))
                            .collect::<Result<_, _>>()?,
                    ),
                };
                LossSpec::new(LossKind::Integration(psi), Descriptor::Hilbert, *degree, *sign)?
            }
            LossConfig::LandscapeL2 {
                k,
                points,
                target,
                degree,
                sign,
            } => LossSpec::new(
                LossKind::SquaredL2(target.clone()),
                Descriptor::Landscape {
                    k: *k,
                    points: points.clone(),
                },
                *degree,
                *sign,
            )?,
        })
    }
}
