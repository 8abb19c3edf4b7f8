//! n-parameter filtrations and the constructors used by the point-cloud
//! pipelines (Vietoris–Rips, function–Rips with a Gaussian density estimate).

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::complex::{ComplexError, SimplicialComplex, Vertex};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FiltrationError {
    #[error("a filtration needs at least one parameter")]
    NoParameters,
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value at simplex {simplex}, coordinate {coordinate}")]
    NonFinite { simplex: usize, coordinate: usize },
    #[error("not monotone: face {face} exceeds simplex {simplex} in coordinate {coordinate}")]
    NotMonotone {
        face: usize,
        simplex: usize,
        coordinate: usize,
    },
    #[error("vertex {0} has no value")]
    MissingVertexValue(Vertex),
    #[error("point cloud is empty")]
    EmptyPointCloud,
    #[error("point {0} has the wrong dimension or a non-finite coordinate")]
    BadPoint(usize),
    #[error("bandwidth must be positive, got {0}")]
    NonpositiveBandwidth(f64),
    #[error("max_dim must be at least 1")]
    BadMaxDim,
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// A monotone map from simplices to `R^n`, stored simplex-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Filtration {
    complex: Arc<SimplicialComplex>,
    n: usize,
    values: Vec<f64>,
}

impl Filtration {
    /// `values` is simplex-major: `values[s * n + i]` is coordinate `i` of simplex `s`.
    pub fn new(
        complex: Arc<SimplicialComplex>,
        n: usize,
        values: Vec<f64>,
    ) -> Result<Self, FiltrationError> {
        let f = Self::new_unchecked(complex, n, values)?;
        f.validate()?;
        Ok(f)
    }

    pub fn from_rows(
        complex: Arc<SimplicialComplex>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self, FiltrationError> {
        let n = rows.first().map(Vec::len).unwrap_or(0);
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(FiltrationError::LengthMismatch {
                expected: n,
                got: r.len(),
            });
        }
        Self::new(complex, n, rows.concat())
    }

    /// Shape checks only; monotonicity is not verified.
    pub fn new_unchecked(
        complex: Arc<SimplicialComplex>,
        n: usize,
        values: Vec<f64>,
    ) -> Result<Self, FiltrationError> {
        if n == 0 {
            return Err(FiltrationError::NoParameters);
        }
        if values.len() != complex.len() * n {
            return Err(FiltrationError::LengthMismatch {
                expected: complex.len() * n,
                got: values.len(),
            });
        }
        Ok(Self { complex, n, values })
    }

    pub fn validate(&self) -> Result<(), FiltrationError> {
        for s in 0..self.complex.len() {
            for i in 0..self.n {
                if !self.get(s, i).is_finite() {
                    return Err(FiltrationError::NonFinite {
                        simplex: s,
                        coordinate: i,
                    });
                }
            }
            for &face in self.complex.facets(s) {
                for i in 0..self.n {
                    if self.get(face, i) > self.get(s, i) {
                        return Err(FiltrationError::NotMonotone {
                            face,
                            simplex: s,
                            coordinate: i,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn complex(&self) -> &Arc<SimplicialComplex> {
        &self.complex
    }

    pub fn parameters(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.complex.len()
    }

    pub fn is_empty(&self) -> bool {
        self.complex.is_empty()
    }

    pub fn value(&self, simplex: usize) -> &[f64] {
        &self.values[simplex * self.n..(simplex + 1) * self.n]
    }

    pub fn get(&self, simplex: usize, coordinate: usize) -> f64 {
        self.values[simplex * self.n + coordinate]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Same complex, new values; shape checked, monotonicity not.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self, FiltrationError> {
        Self::new_unchecked(self.complex.clone(), self.n, values)
    }

    /// Vertex values in vertex order, for re-extension by [`lower_star`].
    pub fn vertex_values(&self) -> HashMap<Vertex, Vec<f64>> {
        self.complex
            .vertices()
            .iter()
            .enumerate()
            .map(|(s, &v)| (v, self.value(s).to_vec()))
            .collect()
    }
}

/// Raise every simplex value to the max over its faces, coordinate-wise.
///
/// Identity on monotone inputs and idempotent. Used to repair filtration
/// iterates after an unconstrained gradient step.
pub fn monotone_projection(complex: &SimplicialComplex, n: usize, values: &mut [f64]) {
    // canonical order lists faces before cofaces
    for s in 0..complex.len() {
        for &face in complex.facets(s) {
            for i in 0..n {
                let fv = values[face * n + i];
                if fv > values[s * n + i] {
                    values[s * n + i] = fv;
                }
            }
        }
    }
}

/// Extend vertex values to all simplices by coordinate-wise max.
pub fn lower_star(
    complex: Arc<SimplicialComplex>,
    vertex_values: &HashMap<Vertex, Vec<f64>>,
) -> Result<Filtration, FiltrationError> {
    let first = complex.vertices()[0];
    let n = vertex_values
        .get(&first)
        .ok_or(FiltrationError::MissingVertexValue(first))?
        .len();
    let mut values = Vec::with_capacity(complex.len() * n);
    for simplex in complex.simplices() {
        let mut acc = vec![f64::NEG_INFINITY; n];
        for v in simplex {
            let val = vertex_values
                .get(v)
                .ok_or(FiltrationError::MissingVertexValue(*v))?;
            if val.len() != n {
                return Err(FiltrationError::LengthMismatch {
                    expected: n,
                    got: val.len(),
                });
            }
            for (a, &x) in acc.iter_mut().zip(val) {
                *a = a.max(x);
            }
        }
        values.extend(acc);
    }
    Filtration::new(complex, n, values)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Vec<f64>>,
    dim: usize,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self, FiltrationError> {
        let dim = points.first().ok_or(FiltrationError::EmptyPointCloud)?.len();
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim || p.iter().any(|x| !x.is_finite()) {
                return Err(FiltrationError::BadPoint(i));
            }
        }
        Ok(Self { points, dim })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn flat(&self) -> Vec<f64> {
        self.points.concat()
    }

    pub fn from_flat(flat: &[f64], dim: usize) -> Result<Self, FiltrationError> {
        Self::new(flat.chunks(dim).map(<[f64]>::to_vec).collect())
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.points[i]
            .iter()
            .zip(&self.points[j])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn diameter(&self) -> f64 {
        let mut d = 0.0f64;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                d = d.max(self.distance(i, j));
            }
        }
        d
    }

    pub fn max_norm(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    Gaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    pub values: Vec<f64>,
    pub bandwidth: f64,
    pub kernel: Kernel,
}

/// Bandwidth used when none is given: a fifth of the cloud diameter
/// (or 1 for a cloud of coincident points).
pub fn default_bandwidth(x: &PointCloud) -> f64 {
    let d = x.diameter();
    if d > 0.0 {
        0.2 * d
    } else {
        1.0
    }
}

/// `density(x_j) = mean_k exp(-|x_j - x_k|^2 / (2 h^2))`.
pub fn gaussian_kde(x: &PointCloud, bandwidth: f64) -> Result<DensityEstimate, FiltrationError> {
    if !(bandwidth > 0.0) {
        return Err(FiltrationError::NonpositiveBandwidth(bandwidth));
    }
    let n = x.len();
    let two_h2 = 2.0 * bandwidth * bandwidth;
    let values = (0..n)
        .map(|j| {
            (0..n)
                .map(|k| {
                    let d = x.distance(j, k);
                    (-d * d / two_h2).exp()
                })
                .sum::<f64>()
                / n as f64
        })
        .collect();
    Ok(DensityEstimate {
        values,
        bandwidth,
        kernel: Kernel::Gaussian,
    })
}

/// Gradient of `density(x_j)` with respect to every point, bandwidth held fixed.
pub fn kde_gradient(x: &PointCloud, bandwidth: f64, j: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let h2 = bandwidth * bandwidth;
    let mut grad = vec![vec![0.0; x.dim()]; n];
    for k in 0..n {
        if k == j {
            continue;
        }
        let d = x.distance(j, k);
        let w = (-d * d / (2.0 * h2)).exp() / (n as f64 * h2);
        for c in 0..x.dim() {
            let diff = x.point(j)[c] - x.point(k)[c];
            grad[j][c] -= w * diff;
            grad[k][c] += w * diff;
        }
    }
    grad
}

/// A filtration built from a point cloud, with the data needed to push
/// gradients back to the points.
#[derive(Debug, Clone)]
pub struct WitnessedFiltration {
    pub filtration: Filtration,
    /// For each simplex of dimension ≥ 1, the longest edge (lowest edge index
    /// among ties) as a pair of point indices.
    pub rips_edge: Vec<Option<(usize, usize)>>,
    /// For function–Rips: the vertex attaining the largest codensity.
    pub density_vertex: Option<Vec<usize>>,
    pub density: Option<DensityEstimate>,
}

fn rips_cliques(x: &PointCloud, max_dim: usize, max_radius: f64) -> Vec<Vec<Vertex>> {
    let n = x.len();
    let adjacent = |i: usize, j: usize| x.distance(i, j) <= max_radius;
    let mut out: Vec<Vec<Vertex>> = Vec::new();
    let mut stack: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    while let Some(s) = stack.pop() {
        if s.len() <= max_dim {
            let last = *s.last().unwrap();
            for v in last + 1..n {
                if s.iter().all(|&u| adjacent(u, v)) {
                    let mut t = s.clone();
                    t.push(v);
                    stack.push(t);
                }
            }
        }
        out.push(s.into_iter().map(|v| v as Vertex).collect());
    }
    out
}

/// Vietoris–Rips filtration on all simplices of at most `max_dim + 1` points
/// with pairwise distance at most `max_radius`. Vertices are point indices.
pub fn vietoris_rips(
    x: &PointCloud,
    max_dim: usize,
    max_radius: f64,
) -> Result<WitnessedFiltration, FiltrationError> {
    if max_dim < 1 {
        return Err(FiltrationError::BadMaxDim);
    }
    let complex = Arc::new(SimplicialComplex::from_simplices(rips_cliques(
        x, max_dim, max_radius,
    ))?);
    let mut values = Vec::with_capacity(complex.len());
    let mut rips_edge = Vec::with_capacity(complex.len());
    for s in complex.simplices() {
        let mut best: Option<(f64, (usize, usize))> = None;
        // lexicographic pair order matches canonical edge order
        for a in 0..s.len() {
            for b in a + 1..s.len() {
                let (u, v) = (s[a] as usize, s[b] as usize);
                let d = x.distance(u, v);
                if best.map_or(true, |(bd, e)| d > bd || (d == bd && (u, v) < e)) {
                    best = Some((d, (u, v)));
                }
            }
        }
        values.push(best.map_or(0.0, |(d, _)| d));
        rips_edge.push(best.map(|(_, e)| e));
    }
    Ok(WitnessedFiltration {
        filtration: Filtration::new(complex, 1, values)?,
        rips_edge,
        density_vertex: None,
        density: None,
    })
}

/// Function–Rips bifiltration: (Rips value, max codensity over vertices),
/// codensity being the negated density so dense points enter first.
pub fn function_rips(
    x: &PointCloud,
    density: &DensityEstimate,
    max_dim: usize,
    max_radius: f64,
) -> Result<WitnessedFiltration, FiltrationError> {
    if density.values.len() != x.len() {
        return Err(FiltrationError::LengthMismatch {
            expected: x.len(),
            got: density.values.len(),
        });
    }
    let rips = vietoris_rips(x, max_dim, max_radius)?;
    let complex = rips.filtration.complex().clone();
    let mut values = Vec::with_capacity(2 * complex.len());
    let mut density_vertex = Vec::with_capacity(complex.len());
    for (s, simplex) in complex.simplices().iter().enumerate() {
        let mut best = simplex[0] as usize;
        for &v in &simplex[1..] {
            let v = v as usize;
            if -density.values[v] > -density.values[best] {
                best = v;
            }
        }
        values.push(rips.filtration.get(s, 0));
        values.push(-density.values[best]);
        density_vertex.push(best);
    }
    Ok(WitnessedFiltration {
        filtration: Filtration::new(complex, 2, values)?,
        rips_edge: rips.rips_edge,
        density_vertex: Some(density_vertex),
        density: Some(density.clone()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge() -> Arc<SimplicialComplex> {
        Arc::new(SimplicialComplex::from_simplices([vec![0], vec![1], vec![0, 1]]).unwrap())
    }

    #[test]
    fn lower_star_takes_coordinatewise_max() {
        let vals = HashMap::from([(0, vec![0.0, 1.0]), (1, vec![1.0, 0.0])]);
        let f = lower_star(edge(), &vals).unwrap();
        assert_eq!(f.value(2), &[1.0, 1.0]);
        let vals = HashMap::from([(0, vec![0.0, 0.0]), (1, vec![1.0, 0.0])]);
        assert_eq!(lower_star(edge(), &vals).unwrap().value(2), &[1.0, 0.0]);
    }

    #[test]
    fn lower_star_single_vertex_and_missing_value() {
        let k = Arc::new(SimplicialComplex::from_simplices([vec![3]]).unwrap());
        let f = lower_star(k, &HashMap::from([(3, vec![5.0, -2.0])])).unwrap();
        assert_eq!(f.values(), &[5.0, -2.0]);
        let err = lower_star(edge(), &HashMap::from([(0, vec![0.0])])).unwrap_err();
        assert_eq!(err, FiltrationError::MissingVertexValue(1));
    }

    #[test]
    fn rejects_non_monotone() {
        let err = Filtration::new(edge(), 1, vec![0.0, 2.0, 1.0]).unwrap_err();
        assert!(matches!(err, FiltrationError::NotMonotone { face: 1, .. }));
        assert!(Filtration::new(edge(), 1, vec![0.0, f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn rips_equilateral_triangle() {
        let h = 3f64.sqrt() / 2.0;
        let x = PointCloud::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h]]).unwrap();
        let r = vietoris_rips(&x, 2, 2.0).unwrap();
        let f = &r.filtration;
        assert_eq!(f.len(), 7);
        for s in 0..3 {
            assert_eq!(f.get(s, 0), 0.0);
        }
        for s in 3..7 {
            assert!((f.get(s, 0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rips_threshold_and_collinear() {
        let x = PointCloud::new(vec![vec![0.0], vec![5.0]]).unwrap();
        assert_eq!(vietoris_rips(&x, 1, 2.0).unwrap().filtration.len(), 2);
        let x = PointCloud::new(vec![vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        let r = vietoris_rips(&x, 1, 10.0).unwrap();
        assert_eq!(&r.filtration.values()[3..], &[1.0, 3.0, 2.0]);
        assert_eq!(r.rips_edge[4], Some((0, 2)));
    }

    #[test]
    fn kde_closed_forms() {
        let one = PointCloud::new(vec![vec![0.3, 0.4]]).unwrap();
        assert_eq!(gaussian_kde(&one, 0.7).unwrap().values, vec![1.0]);
        let same = PointCloud::new(vec![vec![1.0], vec![1.0]]).unwrap();
        assert_eq!(gaussian_kde(&same, 0.1).unwrap().values, vec![1.0, 1.0]);
        let h = 0.25;
        let two = PointCloud::new(vec![vec![0.0], vec![h]]).unwrap();
        let d = gaussian_kde(&two, h).unwrap();
        let expected = (1.0 + (-0.5f64).exp()) / 2.0;
        assert!((d.values[0] - expected).abs() < 1e-15);
        assert!(gaussian_kde(&two, 0.0).is_err());
    }

    #[test]
    fn kde_gradient_matches_finite_differences() {
        let x = PointCloud::new(vec![vec![0.0, 0.1], vec![0.4, -0.2], vec![0.3, 0.5]]).unwrap();
        let h = 0.3;
        let g = kde_gradient(&x, h, 1);
        let eps = 1e-6;
        for k in 0..3 {
            for c in 0..2 {
                let mut plus = x.points().to_vec();
                plus[k][c] += eps;
                let mut minus = x.points().to_vec();
                minus[k][c] -= eps;
                let fp = gaussian_kde(&PointCloud::new(plus).unwrap(), h).unwrap().values[1];
                let fm = gaussian_kde(&PointCloud::new(minus).unwrap(), h).unwrap().values[1];
                assert!(((fp - fm) / (2.0 * eps) - g[k][c]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn function_rips_small_cases() {
        let one = PointCloud::new(vec![vec![2.0, 2.0]]).unwrap();
        let d = gaussian_kde(&one, 1.0).unwrap();
        let f = function_rips(&one, &d, 1, f64::INFINITY).unwrap();
        assert_eq!(f.filtration.values(), &[0.0, -1.0]);

        let two = PointCloud::new(vec![vec![0.0], vec![1.0]]).unwrap();
        let d = gaussian_kde(&two, 0.5).unwrap();
        let rho = d.values[0];
        let f = function_rips(&two, &d, 1, f64::INFINITY).unwrap();
        assert_eq!(f.filtration.value(2), &[1.0, -rho]);

        let short = DensityEstimate {
            values: vec![1.0],
            bandwidth: 1.0,
            kernel: Kernel::Gaussian,
        };
        assert!(function_rips(&two, &short, 1, 1.0).is_err());
    }

    #[test]
    fn projection_repairs_and_is_idempotent() {
        let k = edge();
        let mut v = vec![0.0, 2.0, 1.0];
        monotone_projection(&k, 1, &mut v);
        assert_eq!(v, vec![0.0, 2.0, 2.0]);
        let before = v.clone();
        monotone_projection(&k, 1, &mut v);
        assert_eq!(v, before);
    }
}
