use rayon::prelude::*;

use super::hilbert::{mobius_inversion, rest_grid, slice_order};
use super::measure::{GroundSpace, Location, SignedMeasure};
use super::{DescriptorError, GridLocation, PushedMeasure};
use crate::complex::persistence_pairs;
use crate::filtrations::Filtration;
use crate::stratification::{stratify, Grid, GridFiltration, Stratification};

/// Largest rank table (grid points squared) we are willing to allocate.
pub const MAX_RANK_ENTRIES: usize = 1 << 24;

/// Rank invariant on all grid pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankGrid {
    pub grid: Grid,
    pub degree: usize,
    /// `values[p * len + q]`; zero unless `p ≤ q`.
    values: Vec<u32>,
}

impl RankGrid {
    /// `rk(p, q)` for flat grid points; zero when `p ≰ q`.
    pub fn at(&self, p: usize, q: usize) -> i64 {
        self.values[p * self.grid.len() + q] as i64
    }

    /// `rk(p, ∞) = rk(p, max grid)`.
    pub fn at_infinity(&self, p: usize) -> i64 {
        self.at(p, self.grid.max_point())
    }
}

/// Rank invariant on the grid. For each start `p` and each value of
/// coordinates `1..n` above `p`, one persistence computation over the
/// ordering "sublevel set at `p` first, then the rest by first coordinate"
/// gives `rk(p, q)` for the whole line of `q` along the first axis.
pub fn rank_grid(ord: &GridFiltration, degree: usize) -> Result<RankGrid, DescriptorError> {
    let grid = ord.grid().clone();
    let g = grid.len();
    let entries = g.saturating_mul(g);
    if entries > MAX_RANK_ENTRIES {
        return Err(DescriptorError::GridTooLarge(entries));
    }
    let complex = ord.complex();
    let rest = rest_grid(&grid);
    let m0 = grid.sizes()[0];

    let rows: Vec<Vec<u32>> = (0..g)
        .into_par_iter()
        .map(|p| {
            let mut row = vec![0u32; g];
            let mut a: Vec<usize> = (0..complex.len()).filter(|&s| ord.present_at(s, p)).collect();
            a.sort_by_key(|&s| (complex.simplex_dim(s), s));
            let in_a = {
                let mut v = vec![false; complex.len()];
                for &s in &a {
                    v[s] = true;
                }
                v
            };
            let p0 = grid.coord(p, 0);
            let p_rest: Vec<usize> = grid.point(p)[1..].to_vec();
            for r in 0..rest.len() {
                let q_rest = rest.point(r);
                if q_rest.iter().zip(&p_rest).any(|(q, p)| q < p) {
                    continue;
                }
                let mut order = a.clone();
                order.extend(slice_order(ord, &q_rest).into_iter().filter(|&s| !in_a[s]));
                // death level along the first axis of each class born in `a`
                let mut dies_at = vec![0u32; m0 + 1];
                for bar in persistence_pairs(complex, &order, degree) {
                    if bar.birth >= a.len() {
                        continue;
                    }
                    match bar.death {
                        None => dies_at[m0] += 1,
                        Some(d) if d >= a.len() => dies_at[ord.get(order[d], 0)] += 1,
                        Some(_) => {}
                    }
                }
                // rk(p, (q0, q_rest)) counts classes dying strictly after q0
                let mut alive: u32 = dies_at.iter().sum();
                for (q0, &dead) in dies_at.iter().enumerate().take(m0) {
                    alive -= dead;
                    if q0 >= p0 {
                        row[q0 * rest.len() + r] = alive;
                    }
                }
            }
            row
        })
        .collect();
    Ok(RankGrid {
        grid,
        degree,
        values: rows.concat(),
    })
}

/// One mass of the rank decomposition on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct RankMass {
    pub birth: usize,
    /// `None` is the sentinel above the grid.
    pub death: Option<usize>,
    pub mass: i64,
}

/// Rank decomposition on the grid.
///
/// With `M_a(s) = Σ_S (-1)^|S| rk(a - e_S, s)` (Möbius in the birth index),
/// the masses are `m(a, ∞) = M_a(max)` and, for finite `b > a`, the Möbius
/// inversion in `b` of `D_a(s) = M_a(a) - M_a(s)` (zero off the upset of
/// `a`). Then `Σ_{a ≤ r} Σ_{b ≰ s} m(a, b) = rk(r, s)` for all `r ≤ s`.
pub fn rank_masses(rank: &RankGrid) -> Vec<RankMass> {
    let grid = &rank.grid;
    let g = grid.len();
    // birth[s * g + a] = M_a(s)
    let mut birth = vec![0i64; g * g];
    for s in 0..g {
        let col = &mut birth[s * g..(s + 1) * g];
        for (a, c) in col.iter_mut().enumerate() {
            *c = rank.at(a, s);
        }
        mobius_inversion(grid, col);
    }
    let max = grid.max_point();
    (0..g)
        .into_par_iter()
        .flat_map_iter(|a| {
            let diag = birth[a * g + a];
            let mut d: Vec<i64> = (0..g)
                .map(|s| {
                    if grid.leq(a, s) {
                        diag - birth[s * g + a]
                    } else {
                        0
                    }
                })
                .collect();
            mobius_inversion(grid, &mut d);
            let mut out: Vec<RankMass> = d
                .into_iter()
                .enumerate()
                .filter(|&(b, m)| m != 0 && b != a)
                .map(|(b, mass)| RankMass {
                    birth: a,
                    death: Some(b),
                    mass,
                })
                .collect();
            let inf = birth[max * g + a];
            if inf != 0 {
                out.push(RankMass {
                    birth: a,
                    death: None,
                    mass: inf,
                });
            }
            out
        })
        .collect()
}

/// Rank decomposition signed measure with grid origins.
pub fn rank_pushed(strat: &Stratification, degree: usize) -> Result<PushedMeasure, DescriptorError> {
    let rank = rank_grid(&strat.ord, degree)?;
    let grid = &rank.grid;
    let mut pushed: Vec<(Location, i64, GridLocation)> = rank_masses(&rank)
        .into_iter()
        .map(|m| {
            (
                Location::Bar {
                    birth: strat.incl.embed(grid, m.birth),
                    death: m.death.map(|b| strat.incl.embed(grid, b)),
                },
                m.mass,
                GridLocation::Bar(m.birth, m.death),
            )
        })
        .collect();
    pushed.sort_by(|a, b| a.0.canonical_cmp(&b.0));
    let origins = pushed.iter().map(|x| x.2).collect();
    let measure = SignedMeasure::from_canonical(
        GroundSpace::Bars(grid.dim()),
        pushed.into_iter().map(|(l, m, _)| (l, m)).collect(),
    );
    Ok(PushedMeasure { measure, origins })
}

/// Rank decomposition signed measure of `H_degree(f)` on bars.
pub fn rank_measure(f: &Filtration, degree: usize) -> Result<SignedMeasure, DescriptorError> {
    Ok(rank_pushed(&stratify(f), degree)?.measure)
}
