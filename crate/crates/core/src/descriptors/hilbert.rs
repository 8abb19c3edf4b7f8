use rayon::prelude::*;

use super::measure::{GroundSpace, Location, SignedMeasure};
use super::{GridLocation, PushedMeasure};
use crate::complex::persistence_pairs;
use crate::filtrations::Filtration;
use crate::stratification::{stratify, CellId, Grid, GridFiltration, Stratification};

/// `dim H_i` of every sublevel set `{σ : ord(σ) ≤ p}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertGrid {
    pub grid: Grid,
    pub degree: usize,
    /// Row-major over `grid`.
    pub values: Vec<i64>,
}

impl HilbertGrid {
    pub fn at(&self, p: &[usize]) -> i64 {
        self.values[self.grid.flat(p)]
    }
}

/// Sizes of coordinates `1..n`; one point when `n == 1`.
pub(crate) fn rest_grid(grid: &Grid) -> Grid {
    Grid::new(grid.sizes()[1..].to_vec())
}

/// Simplices present once coordinates `1..n` reach `rest`, ordered by
/// `(ord_0, dim, index)`.
pub(crate) fn slice_order(ord: &GridFiltration, rest: &[usize]) -> Vec<usize> {
    let complex = ord.complex();
    let mut order: Vec<usize> = (0..complex.len())
        .filter(|&s| rest.iter().enumerate().all(|(l, &r)| ord.get(s, l + 1) <= r))
        .collect();
    order.sort_by_key(|&s| (ord.get(s, 0), complex.simplex_dim(s), s));
    order
}

/// Hilbert function on the grid. Each line along the first axis is one
/// persistence computation; lines run in parallel.
pub fn hilbert_grid(ord: &GridFiltration, degree: usize) -> HilbertGrid {
    let grid = ord.grid().clone();
    let rest = rest_grid(&grid);
    let m0 = grid.sizes()[0];
    let columns: Vec<Vec<i64>> = (0..rest.len())
        .into_par_iter()
        .map(|r| {
            let order = slice_order(ord, &rest.point(r));
            let mut col = vec![0i64; m0];
            for bar in persistence_pairs(ord.complex(), &order, degree) {
                let b = ord.get(order[bar.birth], 0);
                let d = bar.death.map_or(m0, |d| ord.get(order[d], 0));
                for c in &mut col[b..d] {
                    *c += 1;
                }
            }
            col
        })
        .collect();
    // flat = k * rest.len() + r since the first axis is slowest
    let mut values = vec![0; grid.len()];
    for (r, col) in columns.into_iter().enumerate() {
        for (k, v) in col.into_iter().enumerate() {
            values[k * rest.len() + r] = v;
        }
    }
    HilbertGrid {
        grid,
        degree,
        values,
    }
}

/// In-place Möbius inversion on a grid: iterated first differences, one
/// axis at a time, with out-of-grid terms zero.
pub fn mobius_inversion(grid: &Grid, values: &mut [i64]) {
    for axis in 0..grid.dim() {
        let stride = grid.stride(axis);
        for p in (0..values.len()).rev() {
            if grid.coord(p, axis) > 0 {
                values[p] -= values[p - stride];
            }
        }
    }
}

/// Hilbert decomposition signed measure with the grid origin of each mass.
pub fn hilbert_pushed(strat: &Stratification, degree: usize) -> PushedMeasure {
    let hil = hilbert_grid(&strat.ord, degree);
    let mut masses = hil.values;
    mobius_inversion(&hil.grid, &mut masses);
    let mut pushed: Vec<(Location, i64, GridLocation)> = masses
        .iter()
        .enumerate()
        .filter(|(_, &m)| m != 0)
        .map(|(p, &m)| {
            (
                Location::Point(strat.incl.embed(&hil.grid, p)),
                m,
                GridLocation::Point(p),
            )
        })
        .collect();
    pushed.sort_by(|a, b| a.0.canonical_cmp(&b.0));
    let origins = pushed.iter().map(|x| x.2).collect();
    let measure = SignedMeasure::from_canonical(
        GroundSpace::Rn(hil.grid.dim()),
        pushed.into_iter().map(|(l, m, _)| (l, m)).collect(),
    );
    PushedMeasure { measure, origins }
}

/// Hilbert decomposition signed measure of `H_degree(f)` on `R^n`.
pub fn hilbert_measure(f: &Filtration, degree: usize) -> SignedMeasure {
    hilbert_pushed(&stratify(f), degree).measure
}

/// Hilbert measure expanded to unit masses, each sign sorted
/// lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedHilbert {
    pub cell: CellId,
    pub positives: Vec<Vec<f64>>,
    pub negatives: Vec<Vec<f64>>,
}

impl SortedHilbert {
    /// All coordinates, positives first, as one flat vector.
    pub fn flatten(&self) -> Vec<f64> {
        self.positives
            .iter()
            .chain(&self.negatives)
            .flatten()
            .copied()
            .collect()
    }
}

pub fn sorted_hilbert(f: &Filtration, degree: usize) -> SortedHilbert {
    let strat = stratify(f);
    let measure = hilbert_pushed(&strat, degree).measure;
    let expand = |units: Vec<usize>| -> Vec<Vec<f64>> {
        units
            .into_iter()
            .map(|i| match &measure.masses()[i].0 {
                Location::Point(p) => p.clone(),
                Location::Bar { .. } => unreachable!("Hilbert masses are points"),
            })
            .collect()
    };
    // canonical order is already lexicographic
    SortedHilbert {
        cell: strat.ord.cell_id(),
        positives: expand(measure.positive_units()),
        negatives: expand(measure.negative_units()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{homology_dimension, SimplicialComplex, Subcomplex};
    use std::sync::Arc;

    fn two_vertex() -> Filtration {
        let k = Arc::new(SimplicialComplex::from_simplices([vec![0], vec![1], vec![0, 1]]).unwrap());
        Filtration::new(k, 2, vec![0.0, 0.0, 1.0, 0.0, 1.0, 1.0]).unwrap()
    }

    /// Pointwise homology at each grid point, independent of the sweep.
    fn oracle(ord: &GridFiltration, degree: usize) -> Vec<i64> {
        let k = ord.complex();
        (0..ord.grid().len())
            .map(|p| {
                let sub = Subcomplex::from_predicate(k, |s| ord.present_at(s, p)).unwrap();
                homology_dimension(&sub, degree) as i64
            })
            .collect()
    }

    #[test]
    fn two_vertex_table_and_measure() {
        let f = two_vertex();
        let s = stratify(&f);
        let hil = hilbert_grid(&s.ord, 0);
        assert_eq!(hil.at(&[0, 0]), 1);
        assert_eq!(hil.at(&[1, 0]), 2);
        assert_eq!(hil.at(&[0, 1]), 1);
        assert_eq!(hil.at(&[1, 1]), 1);
        assert_eq!(hil.values, oracle(&s.ord, 0));

        let mu = hilbert_measure(&f, 0);
        let pt = |a: f64, b: f64| Location::Point(vec![a, b]);
        assert_eq!(
            mu.masses(),
            &[(pt(0.0, 0.0), 1), (pt(1.0, 0.0), 1), (pt(1.0, 1.0), -1)]
        );
        for p in 0..4 {
            let r = s.incl.embed(&hil.grid, p);
            assert_eq!(mu.downset_mass(&r), hil.values[p]);
        }

        let sorted = sorted_hilbert(&f, 0);
        assert_eq!(sorted.positives, vec![vec![0.0, 0.0], vec![1.0, 0.0]]);
        assert_eq!(sorted.negatives, vec![vec![1.0, 1.0]]);
        assert_eq!(sorted.cell, s.ord.cell_id());
    }

    #[test]
    fn single_vertex_and_triangle() {
        let k = Arc::new(SimplicialComplex::from_simplices([vec![0]]).unwrap());
        let f = Filtration::new(k, 3, vec![1.0, -2.0, 0.5]).unwrap();
        let mu = hilbert_measure(&f, 0);
        assert_eq!(mu.masses(), &[(Location::Point(vec![1.0, -2.0, 0.5]), 1)]);

        let tri = Arc::new(
            SimplicialComplex::from_simplices([
                vec![0],
                vec![1],
                vec![2],
                vec![0, 1],
                vec![1, 2],
                vec![0, 2],
            ])
            .unwrap(),
        );
        let f = Filtration::new(tri, 1, vec![0.0; 6]).unwrap();
        let hil = hilbert_grid(&stratify(&f).ord, 1);
        assert_eq!(hil.values, vec![1]);
    }

    #[test]
    fn mobius_of_indicator_is_delta() {
        let g = Grid::new(vec![3, 4]);
        let mut v: Vec<i64> = (0..g.len())
            .map(|p| (g.coord(p, 0) >= 1 && g.coord(p, 1) >= 2) as i64)
            .collect();
        mobius_inversion(&g, &mut v);
        let expect: Vec<i64> = (0..g.len()).map(|p| (p == g.flat(&[1, 2])) as i64).collect();
        assert_eq!(v, expect);
    }

    #[test]
    fn sweep_matches_pointwise_homology() {
        // filled square split into two triangles, staggered entry
        let k = Arc::new(
            SimplicialComplex::from_simplices([
                vec![0],
                vec![1],
                vec![2],
                vec![3],
                vec![0, 1],
                vec![0, 2],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3],
                vec![0, 1, 2],
                vec![1, 2, 3],
            ])
            .unwrap(),
        );
        let rows: Vec<[f64; 2]> = vec![
            [0.0, 0.0],
            [1.0, 0.0],
            [0.0, 1.0],
            [2.0, 2.0],
            [1.0, 0.0],
            [0.0, 1.0],
            [1.0, 1.0],
            [2.0, 2.0],
            [2.0, 2.0],
            [3.0, 1.0],
            [2.0, 3.0],
        ];
        let f = Filtration::new(k, 2, rows.concat()).unwrap();
        let s = stratify(&f);
        for d in 0..3 {
            assert_eq!(hilbert_grid(&s.ord, d).values, oracle(&s.ord, d));
        }
    }
}
