//! Cell decomposition of filtration space.
//!
//! A filtration `f` factors as `f = ι ∘ ord` where `ord` sends each simplex to
//! a point of the finite grid `[m_1] × ⋯ × [m_n]` (per coordinate, the rank
//! of its value among the distinct values) and `ι` embeds each grid axis back
//! into `R` by a strictly increasing map. Filtrations sharing grid and `ord`
//! form a cell; on a cell, every descriptor in this crate is a piecewise
//! affine function of the `ι` coordinates, and gradients with respect to `ι`
//! return to simplices through a [`Carrier`].

use std::sync::Arc;

use thiserror::Error;

use crate::complex::SimplicialComplex;
use crate::filtrations::{Filtration, FiltrationError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StratificationError {
    #[error("grid filtration is not surjective onto level {level} of coordinate {coordinate}")]
    NotSurjective { coordinate: usize, level: usize },
    #[error("grid inclusion has {got} levels on coordinate {coordinate}, grid has {expected}")]
    SizeMismatch {
        coordinate: usize,
        expected: usize,
        got: usize,
    },
    #[error("grid inclusion is not strictly increasing on coordinate {0}")]
    NonIncreasing(usize),
    #[error("filtrations live on different complexes or parameter counts")]
    ComplexMismatch,
    #[error(transparent)]
    Filtration(#[from] FiltrationError),
}

/// The product poset `[m_1] × ⋯ × [m_n]`, flattened row-major
/// (last coordinate fastest).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Grid {
    sizes: Vec<usize>,
    strides: Vec<usize>,
}

impl Grid {
    pub fn new(sizes: Vec<usize>) -> Self {
        assert!(sizes.iter().all(|&m| m >= 1), "grid sizes must be positive");
        let mut strides = vec![1; sizes.len()];
        for i in (0..sizes.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * sizes[i + 1];
        }
        Self { sizes, strides }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn flat(&self, p: &[usize]) -> usize {
        p.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    pub fn point(&self, mut flat: usize) -> Vec<usize> {
        let mut p = vec![0; self.sizes.len()];
        for (i, s) in self.strides.iter().enumerate() {
            p[i] = flat / s;
            flat %= s;
        }
        p
    }

    /// Coordinate `axis` of the point with flat index `flat`.
    pub fn coord(&self, flat: usize, axis: usize) -> usize {
        (flat / self.strides[axis]) % self.sizes[axis]
    }

    pub fn max_point(&self) -> usize {
        self.len() - 1
    }

    pub fn leq(&self, p: usize, q: usize) -> bool {
        (0..self.dim()).all(|i| self.coord(p, i) <= self.coord(q, i))
    }
}

/// A monotone map from simplices to a grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridFiltration {
    complex: Arc<SimplicialComplex>,
    grid: Grid,
    /// simplex-major, like [`Filtration`] values
    ord: Vec<usize>,
}

impl GridFiltration {
    pub fn new(complex: Arc<SimplicialComplex>, grid: Grid, ord: Vec<usize>) -> Self {
        assert_eq!(ord.len(), complex.len() * grid.dim());
        Self { complex, grid, ord }
    }

    pub fn complex(&self) -> &Arc<SimplicialComplex> {
        &self.complex
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn parameters(&self) -> usize {
        self.grid.dim()
    }

    pub fn ord(&self, simplex: usize) -> &[usize] {
        let n = self.grid.dim();
        &self.ord[simplex * n..(simplex + 1) * n]
    }

    pub fn get(&self, simplex: usize, coordinate: usize) -> usize {
        self.ord[simplex * self.grid.dim() + coordinate]
    }

    /// Flat grid index of the simplex's entry point.
    pub fn flat(&self, simplex: usize) -> usize {
        self.grid.flat(self.ord(simplex))
    }

    /// Whether the simplex is present at grid point `p` (given flat).
    pub fn present_at(&self, simplex: usize, p: usize) -> bool {
        (0..self.grid.dim()).all(|i| self.get(simplex, i) <= self.grid.coord(p, i))
    }

    pub fn is_componentwise_surjective(&self) -> bool {
        self.first_gap().is_none()
    }

    fn first_gap(&self) -> Option<(usize, usize)> {
        for i in 0..self.grid.dim() {
            let mut hit = vec![false; self.grid.sizes()[i]];
            for s in 0..self.complex.len() {
                hit[self.get(s, i)] = true;
            }
            if let Some(level) = hit.iter().position(|&h| !h) {
                return Some((i, level));
            }
        }
        None
    }

    /// Canonical byte serialization: parameter count, grid sizes, then the
    /// simplex-major ord table, all as little-endian u32.
    pub fn cell_id(&self) -> CellId {
        let mut bytes = Vec::with_capacity(4 * (1 + self.grid.dim() + self.ord.len()));
        bytes.extend((self.grid.dim() as u32).to_le_bytes());
        for &m in self.grid.sizes() {
            bytes.extend((m as u32).to_le_bytes());
        }
        for &o in &self.ord {
            bytes.extend((o as u32).to_le_bytes());
        }
        CellId(bytes)
    }
}

/// Strictly increasing maps `[m_i] -> R`, one per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct GridInclusion {
    coords: Vec<Vec<f64>>,
}

impl GridInclusion {
    pub fn new(coords: Vec<Vec<f64>>) -> Result<Self, StratificationError> {
        for (i, c) in coords.iter().enumerate() {
            if c.is_empty() || c.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(StratificationError::NonIncreasing(i));
            }
        }
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[Vec<f64>] {
        &self.coords
    }

    pub fn axis(&self, i: usize) -> &[f64] {
        &self.coords[i]
    }

    /// `ι(p)` for a grid point given by its flat index.
    pub fn embed(&self, grid: &Grid, flat: usize) -> Vec<f64> {
        (0..grid.dim())
            .map(|i| self.coords[i][grid.coord(flat, i)])
            .collect()
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.coords.concat()
    }
}

/// Hashable identity of a cell.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellId(pub Vec<u8>);

/// For each coordinate and level, a simplex realizing that level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Carrier {
    simplices: Vec<Vec<usize>>,
}

impl Carrier {
    pub fn simplex(&self, coordinate: usize, level: usize) -> usize {
        self.simplices[coordinate][level]
    }

    pub fn axis(&self, coordinate: usize) -> &[usize] {
        &self.simplices[coordinate]
    }

    /// Whether simplex `s` carries coordinate `i` at some level.
    pub fn carries(&self, s: usize, i: usize) -> bool {
        self.simplices[i].contains(&s)
    }
}

/// `(grid, ord, ι)` for a filtration.
#[derive(Debug, Clone, PartialEq)]
pub struct Stratification {
    pub ord: GridFiltration,
    pub incl: GridInclusion,
}

impl Stratification {
    pub fn grid(&self) -> &Grid {
        self.ord.grid()
    }
}

/// Factor `f` through its grid. `ι` stores the original floats, so
/// `ι(ord(σ)) == f(σ)` holds exactly. Ties are exact float equality.
pub fn stratify(f: &Filtration) -> Stratification {
    let n = f.parameters();
    let k = f.len();
    let mut coords = Vec::with_capacity(n);
    let mut ord = vec![0; k * n];
    for i in 0..n {
        let mut vals: Vec<f64> = (0..k).map(|s| f.get(s, i)).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).expect("filtration values are finite"));
        vals.dedup_by(|a, b| a == b);
        for s in 0..k {
            let v = f.get(s, i);
            ord[s * n + i] = vals.partition_point(|&x| x < v);
        }
        coords.push(vals);
    }
    let grid = Grid::new(coords.iter().map(Vec::len).collect());
    Stratification {
        ord: GridFiltration::new(f.complex().clone(), grid, ord),
        incl: GridInclusion { coords },
    }
}

/// Deterministic carrier: lowest dimension, then lowest simplex index.
pub fn choose_carrier(ord: &GridFiltration) -> Result<Carrier, StratificationError> {
    if let Some((coordinate, level)) = ord.first_gap() {
        return Err(StratificationError::NotSurjective { coordinate, level });
    }
    let complex = ord.complex();
    let simplices = (0..ord.parameters())
        .map(|i| {
            let mut best: Vec<Option<usize>> = vec![None; ord.grid().sizes()[i]];
            for s in 0..complex.len() {
                let slot = &mut best[ord.get(s, i)];
                let better = match *slot {
                    None => true,
                    Some(b) => complex.simplex_dim(s) < complex.simplex_dim(b),
                };
                if better {
                    *slot = Some(s);
                }
            }
            best.into_iter().map(|b| b.expect("surjective")).collect()
        })
        .collect();
    Ok(Carrier { simplices })
}

/// Whether `f` and `g` lie in the same cell.
pub fn same_cell(f: &Filtration, g: &Filtration) -> Result<bool, StratificationError> {
    if f.parameters() != g.parameters()
        || (!Arc::ptr_eq(f.complex(), g.complex()) && f.complex() != g.complex())
    {
        return Err(StratificationError::ComplexMismatch);
    }
    let a = stratify(f);
    let b = stratify(g);
    Ok(a.ord.grid == b.ord.grid && a.ord.ord == b.ord.ord)
}

/// The grid inclusion of `f`.
pub fn its_incl(f: &Filtration) -> GridInclusion {
    stratify(f).incl
}

/// Assemble `g(σ)_i = κ_i(ord_i(σ))`.
pub fn from_incl(
    ord: &GridFiltration,
    kappa: &GridInclusion,
) -> Result<Filtration, StratificationError> {
    let n = ord.parameters();
    if kappa.coords.len() != n {
        return Err(StratificationError::SizeMismatch {
            coordinate: kappa.coords.len().min(n),
            expected: n,
            got: kappa.coords.len(),
        });
    }
    for i in 0..n {
        let expected = ord.grid().sizes()[i];
        if kappa.coords[i].len() != expected {
            return Err(StratificationError::SizeMismatch {
                coordinate: i,
                expected,
                got: kappa.coords[i].len(),
            });
        }
        if kappa.coords[i].windows(2).any(|w| !(w[0] < w[1])) {
            return Err(StratificationError::NonIncreasing(i));
        }
    }
    let values = ord
        .ord
        .iter()
        .enumerate()
        .map(|(idx, &level)| kappa.coords[idx % n][level])
        .collect();
    Ok(Filtration::new(ord.complex().clone(), n, values)?)
}
