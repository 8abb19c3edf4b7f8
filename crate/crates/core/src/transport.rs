//! Optimal transport between discrete signed measures.
//!
//! Signed measures are compared through their Jordan parts:
//! `OT(μ, ν) = OT(μ⁺ + ν⁻, ν⁺ + μ⁻)`. On `R^n` both sides must carry the same
//! mass (otherwise the distance is `+∞`); on bars, any unit may instead be
//! sent to the diagonal, which turns the problem into a square assignment
//! problem over the two sides padded with diagonal copies.

use thiserror::Error;

use crate::descriptors::{GroundSpace, Location, SignedMeasure};

/// Size guard on the assignment problem.
pub const MAX_AUGMENTED_MASSES: usize = 5000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransportError {
    #[error("measures live on different ground spaces ({0:?} vs {1:?})")]
    GroundSpaceMismatch(GroundSpace, GroundSpace),
    #[error("assignment problem with {0} masses exceeds the limit of {MAX_AUGMENTED_MASSES}")]
    TooLarge(usize),
    #[error("no finite-cost assignment; subgradient undefined")]
    InfiniteCost,
}

/// Ground metric: ℓ∞ on `R^n`, or ℓ∞ on bars with the diagonal as sink.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroundMetric {
    LInf,
    Bars,
}

impl GroundMetric {
    pub fn for_space(ground: GroundSpace) -> Self {
        match ground {
            GroundSpace::Rn(_) => GroundMetric::LInf,
            GroundSpace::Bars(_) => GroundMetric::Bars,
        }
    }

    /// Distance between two locations of this metric's space.
    pub fn distance(&self, a: &Location, b: &Location) -> f64 {
        linf(a, b).0
    }

    /// Distance of a bar to the diagonal; `+∞` for infinite bars.
    pub fn to_diagonal(&self, a: &Location) -> f64 {
        diagonal(a).0
    }
}

/// Which measure a unit mass belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Mu,
    Nu,
}

/// One side of a matched pair.
#[derive(Debug, Clone, PartialEq)]
pub enum Endpoint {
    /// Unit of the mass at `masses()[index]` of the given measure.
    Mass {
        source: Source,
        index: usize,
        location: Location,
    },
    Diagonal,
}

/// An optimal matching between `μ⁺ + ν⁻` (left) and `ν⁺ + μ⁻` (right).
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub metric: GroundMetric,
    pub pairs: Vec<(Endpoint, Endpoint, f64)>,
    pub cost: f64,
    /// Flattened location length of every mass of `μ` and `ν`.
    mu_dims: Vec<usize>,
    nu_dims: Vec<usize>,
}

impl Assignment {
    pub fn is_finite(&self) -> bool {
        self.cost.is_finite()
    }
}

/// Flattened coordinates, infinite deaths as `+∞`.
fn coords(loc: &Location) -> Vec<f64> {
    match loc {
        Location::Point(p) => p.clone(),
        Location::Bar { birth, death } => {
            let mut v = birth.clone();
            match death {
                Some(d) => v.extend(d),
                None => v.extend(std::iter::repeat_n(f64::INFINITY, birth.len())),
            }
            v
        }
    }
}

/// ℓ∞ distance with `|∞ - ∞| = 0`, and the lowest maximizing coordinate.
fn linf(a: &Location, b: &Location) -> (f64, Option<usize>) {
    let (a, b) = (coords(a), coords(b));
    let mut best = (0.0, None);
    for (j, (x, y)) in a.iter().zip(&b).enumerate() {
        let d = if x == y { 0.0 } else { (x - y).abs() };
        if d > best.0 {
            best = (d, Some(j));
        }
    }
    best
}

/// `max_j (s_j - r_j) / 2` and its lowest maximizing `j`.
fn diagonal(a: &Location) -> (f64, Option<usize>) {
    match a {
        Location::Bar {
            birth,
            death: Some(d),
        } => {
            let mut best = (0.0, None);
            for (j, (r, s)) in birth.iter().zip(d).enumerate() {
                let h = (s - r) / 2.0;
                if best.1.is_none() || h > best.0 {
                    best = (h, Some(j));
                }
            }
            best
        }
        Location::Bar { death: None, .. } => (f64::INFINITY, None),
        Location::Point(_) => (f64::INFINITY, None),
    }
}

fn units(m: &SignedMeasure, source: Source, positive: bool) -> Vec<Endpoint> {
    let idx = if positive {
        m.positive_units()
    } else {
        m.negative_units()
    };
    idx.into_iter()
        .map(|index| Endpoint::Mass {
            source,
            index,
            location: m.masses()[index].0.clone(),
        })
        .collect()
}

fn location(e: &Endpoint) -> Option<&Location> {
    match e {
        Endpoint::Mass { location, .. } => Some(location),
        Endpoint::Diagonal => None,
    }
}

fn pair_cost(l: &Endpoint, r: &Endpoint) -> f64 {
    match (location(l), location(r)) {
        (Some(a), Some(b)) => linf(a, b).0,
        (Some(a), None) | (None, Some(a)) => diagonal(a).0,
        (None, None) => 0.0,
    }
}

/// Minimum-cost perfect matching on a square cost matrix (row `i` to column
/// `assign[i]`), by shortest augmenting paths with potentials.
/// Entries must be finite.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    // 1-based with a virtual column 0
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0; n];
    for j in 1..=n {
        assign[p[j] - 1] = j - 1;
    }
    assign
}

/// Optimal (partial, on bars) transport between two signed measures.
pub fn ot_distance(
    mu: &SignedMeasure,
    nu: &SignedMeasure,
    metric: GroundMetric,
) -> Result<Assignment, TransportError> {
    if mu.ground() != nu.ground() || GroundMetric::for_space(mu.ground()) != metric {
        return Err(TransportError::GroundSpaceMismatch(mu.ground(), nu.ground()));
    }
    let mut left = units(mu, Source::Mu, true);
    left.extend(units(nu, Source::Nu, false));
    let mut right = units(nu, Source::Nu, true);
    right.extend(units(mu, Source::Mu, false));
    let (p, q) = (left.len(), right.len());
    let mut assignment = Assignment {
        metric,
        pairs: Vec::new(),
        cost: 0.0,
        mu_dims: mu.masses().iter().map(|(l, _)| coords(l).len()).collect(),
        nu_dims: nu.masses().iter().map(|(l, _)| coords(l).len()).collect(),
    };

    let (rows, cols) = match metric {
        GroundMetric::LInf => {
            if p != q {
                assignment.cost = f64::INFINITY;
                return Ok(assignment);
            }
            (left, right)
        }
        GroundMetric::Bars => {
            let mut rows = left;
            rows.extend(std::iter::repeat_n(Endpoint::Diagonal, q));
            let mut cols = right;
            cols.extend(std::iter::repeat_n(Endpoint::Diagonal, p));
            (rows, cols)
        }
    };
    let size = rows.len();
    if size > MAX_AUGMENTED_MASSES {
        return Err(TransportError::TooLarge(size));
    }
    if size == 0 {
        return Ok(assignment);
    }
    let mut cost: Vec<Vec<f64>> = rows
        .iter()
        .map(|l| cols.iter().map(|r| pair_cost(l, r)).collect())
        .collect();
    // any assignment avoiding infinite edges is cheaper than one using them
    let finite_max = cost
        .iter()
        .flatten()
        .filter(|c| c.is_finite())
        .fold(0.0f64, |a, &c| a.max(c));
    let big = (finite_max + 1.0) * (size as f64 + 1.0);
    for c in cost.iter_mut().flatten() {
        if !c.is_finite() {
            *c = big;
        }
    }
    let assign = hungarian(&cost);
    let mut pairs: Vec<(Endpoint, Endpoint, f64)> = Vec::with_capacity(size);
    for (i, &j) in assign.iter().enumerate() {
        let (l, r) = (&rows[i], &cols[j]);
        if matches!((l, r), (Endpoint::Diagonal, Endpoint::Diagonal)) {
            continue;
        }
        pairs.push((l.clone(), r.clone(), pair_cost(l, r)));
    }
    let mut costs: Vec<f64> = pairs.iter().map(|x| x.2).collect();
    costs.sort_by(f64::total_cmp);
    assignment.cost = costs.iter().sum();
    assignment.pairs = pairs;
    Ok(assignment)
}

/// Gradients of the transport cost with respect to every mass location.
///
/// Entry `i` of `mu` has the length of the flattened location of mass `i`
/// (`n` for points, `2n` for bars with birth first; infinite death
/// coordinates get zero). A mass with multiplicity `m` collects the
/// contributions of all of its `|m|` units.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportGradient {
    pub mu: Vec<Vec<f64>>,
    pub nu: Vec<Vec<f64>>,
}

pub fn ot_subgradient(assignment: &Assignment) -> Result<TransportGradient, TransportError> {
    if !assignment.is_finite() {
        return Err(TransportError::InfiniteCost);
    }
    let mut grad = TransportGradient {
        mu: assignment.mu_dims.iter().map(|&d| vec![0.0; d]).collect(),
        nu: assignment.nu_dims.iter().map(|&d| vec![0.0; d]).collect(),
    };
    let mut deposit = |e: &Endpoint, j: usize, g: f64| {
        if let Endpoint::Mass { source, index, .. } = e {
            match source {
                Source::Mu => grad.mu[*index][j] += g,
                Source::Nu => grad.nu[*index][j] += g,
            }
        }
    };
    for (l, r, _) in &assignment.pairs {
        match (location(l), location(r)) {
            (Some(a), Some(b)) => {
                if let (_, Some(j)) = linf(a, b) {
                    let s = (coords(a)[j] - coords(b)[j]).signum();
                    deposit(l, j, s);
                    deposit(r, j, -s);
                }
            }
            (Some(a), None) | (None, Some(a)) => {
                let e = if location(l).is_some() { l } else { r };
                if let (_, Some(j)) = diagonal(a) {
                    let n = coords(a).len() / 2;
                    deposit(e, j, -0.5);
                    deposit(e, n + j, 0.5);
                }
            }
            (None, None) => {}
        }
    }
    Ok(grad)
}
