//! Losses on descriptors and their subgradients.
//!
//! A gradient is computed in three moves. The loss is differentiated with
//! respect to the locations of the descriptor's masses (or landscape
//! witnesses). Every location coordinate is `ι_j(k)` for some axis `j` and
//! grid level `k`, so those derivatives accumulate on the grid inclusion.
//! Finally `ι_j(k) = f_j(C_j(k))` for the carrier `C`, so the accumulated
//! derivative lands on simplex `C_j(k)`, coordinate `j`. Point-cloud
//! pipelines continue the chain through the Rips edge lengths and the
//! kernel density estimate.

use std::collections::BTreeMap;

use log::warn;
use thiserror::Error;

use crate::descriptors::{
    hilbert_pushed, rank_grid, rank_pushed, DescriptorError, GridLocation, GroundSpace,
    LandscapeEvaluator, Location, PushedMeasure, SignedMeasure,
};
use crate::filtrations::{
    default_bandwidth, function_rips, gaussian_kde, kde_gradient, vietoris_rips, Filtration,
    FiltrationError, PointCloud, WitnessedFiltration,
};
use crate::stratification::{choose_carrier, stratify, Stratification, StratificationError};
use crate::transport::{ot_distance, ot_subgradient, GroundMetric, TransportError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AutodiffError {
    #[error("covariance matrix is not symmetric positive definite")]
    NotPositiveDefinite,
    #[error("integrand has dimension {got}, descriptor lives in dimension {expected}")]
    IntegrandDimension { expected: usize, got: usize },
    #[error("loss {loss} cannot be applied to the {descriptor} descriptor")]
    Incompatible {
        loss: &'static str,
        descriptor: &'static str,
    },
    #[error("target has {got} entries, expected {expected}")]
    TargetLength { expected: usize, got: usize },
    #[error("loss is infinite; no subgradient")]
    InfiniteLoss,
    #[error(transparent)]
    Descriptor(#[from] DescriptorError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Stratification(#[from] StratificationError),
    #[error(transparent)]
    Filtration(#[from] FiltrationError),
}

/// `w · exp(-(p - c)ᵀ Σ⁻¹ (p - c))`, with `Σ = L Lᵀ` stored through `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBump {
    center: Vec<f64>,
    /// Lower-triangular Cholesky factor, row-major `n × n`.
    factor: Vec<f64>,
    weight: f64,
}

impl GaussianBump {
    pub fn new(center: Vec<f64>, sigma: &[Vec<f64>], weight: f64) -> Result<Self, AutodiffError> {
        let n = center.len();
        if sigma.len() != n || sigma.iter().any(|r| r.len() != n) {
            return Err(AutodiffError::IntegrandDimension {
                expected: n,
                got: sigma.len(),
            });
        }
        if !weight.is_finite() {
            return Err(AutodiffError::NotPositiveDefinite);
        }
        for i in 0..n {
            for j in 0..i {
                if sigma[i][j] != sigma[j][i] {
                    return Err(AutodiffError::NotPositiveDefinite);
                }
            }
        }
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let s: f64 = (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum();
                if i == j {
                    let d = sigma[i][i] - s;
                    if !(d > 0.0) {
                        return Err(AutodiffError::NotPositiveDefinite);
                    }
                    l[i * n + i] = d.sqrt();
                } else {
                    l[i * n + j] = (sigma[i][j] - s) / l[j * n + j];
                }
            }
        }
        Ok(Self {
            center,
            factor: l,
            weight,
        })
    }

    /// Isotropic bump `Σ = s² I`.
    pub fn isotropic(center: Vec<f64>, scale: f64, weight: f64) -> Result<Self, AutodiffError> {
        let n = center.len();
        let sigma: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { scale * scale } else { 0.0 }).collect())
            .collect();
        Self::new(center, &sigma, weight)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Value and gradient `-2 Σ⁻¹ (p - c) ψ(p)`.
    pub fn value_and_gradient(&self, p: &[f64]) -> (f64, Vec<f64>) {
        let n = self.center.len();
        let l = &self.factor;
        // L y = p - c
        let mut y = vec![0.0; n];
        for i in 0..n {
            let s: f64 = (0..i).map(|k| l[i * n + k] * y[k]).sum();
            y[i] = (p[i] - self.center[i] - s) / l[i * n + i];
        }
        let q: f64 = y.iter().map(|v| v * v).sum();
        let psi = self.weight * (-q).exp();
        // Lᵀ w = y gives w = Σ⁻¹ (p - c)
        let mut w = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| l[k * n + i] * w[k]).sum();
            w[i] = (y[i] - s) / l[i * n + i];
        }
        (psi, w.into_iter().map(|v| -2.0 * v * psi).collect())
    }
}

/// A differentiable function integrated against a signed measure.
#[derive(Debug, Clone, PartialEq)]
pub enum Integrand {
    /// Sum of Gaussian bumps.
    Gaussian(Vec<GaussianBump>),
    /// `ψ(x) = Σ_j |x_j|^p`.
    NormPower(f64),
}

impl Integrand {
    pub fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        match self {
            Integrand::Gaussian(bumps) => {
                let mut v = 0.0;
                let mut g = vec![0.0; x.len()];
                for b in bumps {
                    let (bv, bg) = b.value_and_gradient(x);
                    v += bv;
                    for (a, d) in g.iter_mut().zip(bg) {
                        *a += d;
                    }
                }
                (v, g)
            }
            Integrand::NormPower(p) => {
                let v = x.iter().map(|c| c.abs().powf(*p)).sum();
                let g = x
                    .iter()
                    .map(|&c| {
                        if c == 0.0 {
                            0.0
                        } else {
                            p * c.abs().powf(p - 1.0) * c.signum()
                        }
                    })
                    .collect();
                (v, g)
            }
        }
    }
}

/// Which descriptor a loss reads.
#[derive(Debug, Clone, PartialEq)]
pub enum Descriptor {
    Hilbert,
    Rank,
    /// `λ^k` evaluated at the given points.
    Landscape { k: usize, points: Vec<Vec<f64>> },
}

impl Descriptor {
    fn name(&self) -> &'static str {
        match self {
            Descriptor::Hilbert => "hilbert",
            Descriptor::Rank => "rank",
            Descriptor::Landscape { .. } => "landscape",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LossKind {
    /// Optimal transport distance to a fixed signed measure.
    DistanceToMeasure(SignedMeasure),
    /// `Σ_x μ(x) ψ(x)`.
    Integration(Integrand),
    /// Squared Euclidean distance of landscape values to a target vector.
    SquaredL2(Vec<f64>),
}

impl LossKind {
    fn name(&self) -> &'static str {
        match self {
            LossKind::DistanceToMeasure(_) => "distance",
            LossKind::Integration(_) => "integration",
            LossKind::SquaredL2(_) => "squared-l2",
        }
    }
}

/// `sign · E(descriptor_degree(f))`; `sign = -1` maximizes `E`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossSpec {
    pub kind: LossKind,
    pub descriptor: Descriptor,
    pub degree: usize,
    pub sign: f64,
}

impl LossSpec {
    pub fn new(
        kind: LossKind,
        descriptor: Descriptor,
        degree: usize,
        sign: f64,
    ) -> Result<Self, AutodiffError> {
        let incompatible = || AutodiffError::Incompatible {
            loss: kind.name(),
            descriptor: descriptor.name(),
        };
        match (&kind, &descriptor) {
            (LossKind::DistanceToMeasure(nu), Descriptor::Hilbert) => {
                if !matches!(nu.ground(), GroundSpace::Rn(_)) {
                    return Err(incompatible());
                }
            }
            (LossKind::DistanceToMeasure(nu), Descriptor::Rank) => {
                if !matches!(nu.ground(), GroundSpace::Bars(_)) {
                    return Err(incompatible());
                }
            }
            (LossKind::Integration(_), Descriptor::Hilbert) => {}
            (LossKind::SquaredL2(target), Descriptor::Landscape { k, points }) => {
                if *k == 0 {
                    return Err(DescriptorError::ZeroLevel.into());
                }
                if target.len() != points.len() {
                    return Err(AutodiffError::TargetLength {
                        expected: points.len(),
                        got: target.len(),
                    });
                }
            }
            _ => return Err(incompatible()),
        }
        Ok(Self {
            kind,
            descriptor,
            degree,
            sign,
        })
    }

    /// Same loss with the opposite sign.
    pub fn negated(&self) -> Self {
        Self {
            sign: -self.sign,
            ..self.clone()
        }
    }
}

/// Gradient of a loss with respect to filtration values, simplex-major like
/// [`Filtration::values`].
#[derive(Debug, Clone, PartialEq)]
pub struct FiltrationGradient {
    pub parameters: usize,
    pub values: Vec<f64>,
    /// For landscape losses, the gradient with respect to each query point.
    pub query_points: Vec<Vec<f64>>,
}

impl FiltrationGradient {
    pub fn get(&self, simplex: usize, coordinate: usize) -> f64 {
        self.values[simplex * self.parameters + coordinate]
    }
}

/// Loss gradient on the grid inclusion: `incl[j][k] = ∂loss/∂ι_j(k)`.
struct InclGradient {
    value: f64,
    incl: Vec<Vec<f64>>,
    query_points: Vec<Vec<f64>>,
}

fn deposit_location(incl: &mut [Vec<f64>], strat: &Stratification, origin: GridLocation, g: &[f64]) {
    let grid = strat.grid();
    let n = grid.dim();
    match origin {
        GridLocation::Point(p) => {
            for j in 0..n {
                incl[j][grid.coord(p, j)] += g[j];
            }
        }
        GridLocation::Bar(a, b) => {
            for j in 0..n {
                incl[j][grid.coord(a, j)] += g[j];
            }
            if let Some(b) = b {
                for j in 0..n {
                    incl[j][grid.coord(b, j)] += g[n + j];
                }
            }
        }
    }
}

fn location_coords(loc: &Location) -> &[f64] {
    match loc {
        Location::Point(p) => p,
        Location::Bar { birth, .. } => birth,
    }
}

fn measure_loss(
    strat: &Stratification,
    pushed: &PushedMeasure,
    kind: &LossKind,
    want_gradient: bool,
) -> Result<InclGradient, AutodiffError> {
    let mut incl: Vec<Vec<f64>> = strat.incl.coords().iter().map(|c| vec![0.0; c.len()]).collect();
    let mu = &pushed.measure;
    let value = match kind {
        LossKind::DistanceToMeasure(nu) => {
            let asg = ot_distance(mu, nu, GroundMetric::for_space(mu.ground()))?;
            if want_gradient {
                if !asg.is_finite() {
                    return Err(AutodiffError::InfiniteLoss);
                }
                let g = ot_subgradient(&asg)?;
                for (origin, gi) in pushed.origins.iter().zip(&g.mu) {
                    deposit_location(&mut incl, strat, *origin, gi);
                }
            }
            asg.cost
        }
        LossKind::Integration(psi) => {
            let mut value = 0.0;
            for ((loc, m), origin) in mu.masses().iter().zip(&pushed.origins) {
                let x = location_coords(loc);
                if let Integrand::Gaussian(b) = psi {
                    if let Some(b) = b.first() {
                        if b.dim() != x.len() {
                            return Err(AutodiffError::IntegrandDimension {
                                expected: x.len(),
                                got: b.dim(),
                            });
                        }
                    }
                }
                let (v, g) = psi.value_and_gradient(x);
                value += *m as f64 * v;
                let g: Vec<f64> = g.into_iter().map(|d| d * *m as f64).collect();
                deposit_location(&mut incl, strat, *origin, &g);
            }
            value
        }
        LossKind::SquaredL2(_) => unreachable!("validated by LossSpec::new"),
    };
    Ok(InclGradient {
        value,
        incl,
        query_points: Vec::new(),
    })
}

fn landscape_loss(
    strat: Stratification,
    degree: usize,
    k: usize,
    points: &[Vec<f64>],
    target: &[f64],
) -> Result<InclGradient, AutodiffError> {
    let rank = rank_grid(&strat.ord, degree)?;
    let ev = LandscapeEvaluator::from_rank(strat, &rank, k)?;
    let strat = ev.stratification();
    let mut incl: Vec<Vec<f64>> = strat.incl.coords().iter().map(|c| vec![0.0; c.len()]).collect();
    let mut query_points = Vec::with_capacity(points.len());
    let mut value = 0.0;
    for (z, y) in points.iter().zip(target) {
        let (l, dincl, dz) = ev.gradient(z)?;
        let r = l - y;
        value += r * r;
        for (axis, level, c) in dincl {
            incl[axis][level] += 2.0 * r * c;
        }
        query_points.push(dz.into_iter().map(|d| 2.0 * r * d).collect());
    }
    Ok(InclGradient {
        value,
        incl,
        query_points,
    })
}

fn incl_gradient(
    f: &Filtration,
    spec: &LossSpec,
    want_gradient: bool,
) -> Result<(Stratification, InclGradient), AutodiffError> {
    let strat = stratify(f);
    let g = match (&spec.descriptor, &spec.kind) {
        (Descriptor::Hilbert, kind) => {
            let pushed = hilbert_pushed(&strat, spec.degree);
            measure_loss(&strat, &pushed, kind, want_gradient)?
        }
        (Descriptor::Rank, kind) => {
            let pushed = rank_pushed(&strat, spec.degree)?;
            measure_loss(&strat, &pushed, kind, want_gradient)?
        }
        (Descriptor::Landscape { k, points }, LossKind::SquaredL2(target)) => {
            landscape_loss(strat.clone(), spec.degree, *k, points, target)?
        }
        _ => {
            return Err(AutodiffError::Incompatible {
                loss: spec.kind.name(),
                descriptor: spec.descriptor.name(),
            })
        }
    };
    Ok((strat, g))
}

/// `spec.sign · E(f)`; may be `+∞` when the transport problem has no
/// finite solution.
pub fn loss_value(f: &Filtration, spec: &LossSpec) -> Result<f64, AutodiffError> {
    let (_, g) = incl_gradient(f, spec, false)?;
    Ok(spec.sign * g.value)
}

/// Loss value and a Clarke subgradient with respect to the filtration
/// values. Only carrier simplices receive nonzero entries.
pub fn loss_gradient(
    f: &Filtration,
    spec: &LossSpec,
) -> Result<(f64, FiltrationGradient), AutodiffError> {
    let (strat, g) = incl_gradient(f, spec, true)?;
    if !g.value.is_finite() {
        return Err(AutodiffError::InfiniteLoss);
    }
    let carrier = choose_carrier(&strat.ord)?;
    let n = f.parameters();
    let mut values = vec![0.0; f.values().len()];
    for (j, axis) in g.incl.iter().enumerate() {
        for (k, d) in axis.iter().enumerate() {
            values[carrier.simplex(j, k) * n + j] += spec.sign * d;
        }
    }
    Ok((
        spec.sign * g.value,
        FiltrationGradient {
            parameters: n,
            values,
            query_points: g
                .query_points
                .into_iter()
                .map(|v| v.into_iter().map(|d| spec.sign * d).collect())
                .collect(),
        },
    ))
}

/// How the KDE bandwidth is chosen for function–Rips.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    Fixed(f64),
    /// A fraction of the current cloud diameter, frozen while differentiating.
    DiameterFraction(f64),
}

impl Bandwidth {
    pub fn resolve(&self, x: &PointCloud) -> f64 {
        match *self {
            Bandwidth::Fixed(h) => h,
            Bandwidth::DiameterFraction(c) => {
                let d = x.diameter();
                if d > 0.0 {
                    c * d
                } else {
                    default_bandwidth(x)
                }
            }
        }
    }
}

/// Filtration constructor applied to a point cloud.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pipeline {
    Rips {
        max_dim: usize,
        max_radius: f64,
    },
    FunctionRips {
        max_dim: usize,
        max_radius: f64,
        bandwidth: Bandwidth,
    },
}

impl Pipeline {
    pub fn build(&self, x: &PointCloud) -> Result<WitnessedFiltration, AutodiffError> {
        Ok(match *self {
            Pipeline::Rips {
                max_dim,
                max_radius,
            } => vietoris_rips(x, max_dim, max_radius)?,
            Pipeline::FunctionRips {
                max_dim,
                max_radius,
                bandwidth,
            } => {
                let density = gaussian_kde(x, bandwidth.resolve(x))?;
                function_rips(x, &density, max_dim, max_radius)?
            }
        })
    }
}

/// Loss and its gradient with respect to every point coordinate.
pub fn pointcloud_gradient(
    x: &PointCloud,
    pipeline: &Pipeline,
    spec: &LossSpec,
) -> Result<(f64, Vec<Vec<f64>>), AutodiffError> {
    let w = pipeline.build(x)?;
    let (value, fg) = loss_gradient(&w.filtration, spec)?;
    Ok((value, chain_to_points(x, &w, &fg)))
}

/// Pull a filtration gradient back through the constructor that built `w`.
pub fn chain_to_points(
    x: &PointCloud,
    w: &WitnessedFiltration,
    fg: &FiltrationGradient,
) -> Vec<Vec<f64>> {
    let d = x.dim();
    let mut grad = vec![vec![0.0; d]; x.len()];
    let complex = w.filtration.complex();
    // codensity derivative collected per vertex before the KDE chain rule
    let mut by_vertex: BTreeMap<usize, f64> = BTreeMap::new();
    for s in 0..complex.len() {
        let g = fg.get(s, 0);
        if g != 0.0 {
            if let Some((u, v)) = w.rips_edge[s] {
                let len = x.distance(u, v);
                if len == 0.0 {
                    warn!("zero-length edge ({u}, {v}) carries gradient; using zero");
                } else {
                    for c in 0..d {
                        let t = g * (x.point(u)[c] - x.point(v)[c]) / len;
                        grad[u][c] += t;
                        grad[v][c] -= t;
                    }
                }
            }
        }
        if let Some(dv) = &w.density_vertex {
            let g = fg.get(s, 1);
            if g != 0.0 {
                *by_vertex.entry(dv[s]).or_default() += g;
            }
        }
    }
    if let Some(density) = &w.density {
        for (v, g) in by_vertex {
            // coordinate is -ρ_v
            for (k, row) in kde_gradient(x, density.bandwidth, v).into_iter().enumerate() {
                for c in 0..d {
                    grad[k][c] -= g * row[c];
                }
            }
        }
    }
    grad
}
