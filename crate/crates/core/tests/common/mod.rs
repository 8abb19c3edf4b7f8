#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use mpgrad::complex::{homology_dimension, inclusion_rank, SimplicialComplex, Subcomplex, Vertex};
use mpgrad::filtrations::lower_star;
use mpgrad::{Filtration, GroundSpace, Location, PointCloud, SignedMeasure};
use rand::seq::SliceRandom;
use rand::Rng;

/// Random face-closed complex on at most `max_vertices` vertices with at
/// most `max_simplices` simplices and dimension at most 2.
pub fn random_complex<R: Rng>(rng: &mut R, max_vertices: u32, max_simplices: usize) -> SimplicialComplex {
    let nv = rng.random_range(2..=max_vertices.max(2));
    let mut set: BTreeSet<Vec<Vertex>> = (0..nv).map(|v| vec![v]).collect();
    let attempts = rng.random_range(0..3 * max_simplices);
    for _ in 0..attempts {
        let size = if rng.random_bool(0.6) { 2 } else { 3 };
        let mut s: Vec<Vertex> = (0..nv).collect();
        s.shuffle(rng);
        s.truncate(size.min(nv as usize));
        s.sort_unstable();
        let mut closure = vec![s.clone()];
        if s.len() == 3 {
            for skip in 0..3 {
                closure.push(
                    s.iter()
                        .enumerate()
                        .filter(|&(i, _)| i != skip)
                        .map(|(_, &v)| v)
                        .collect(),
                );
            }
        }
        let new: Vec<_> = closure.into_iter().filter(|c| !set.contains(c)).collect();
        if set.len() + new.len() > max_simplices {
            continue;
        }
        set.extend(new);
    }
    SimplicialComplex::from_simplices(set).unwrap()
}

/// Filtration with (almost surely) no ties: vertices uniform in `[0, 1)`,
/// every other simplex the max over its faces plus an increment in
/// `[0.01, 0.5)`, independently per coordinate.
pub fn tie_free<R: Rng>(rng: &mut R, complex: &Arc<SimplicialComplex>, n: usize) -> Filtration {
    let mut values = vec![0.0; complex.len() * n];
    for s in 0..complex.len() {
        for i in 0..n {
            values[s * n + i] = if complex.simplex_dim(s) == 0 {
                rng.random::<f64>()
            } else {
                let top = complex
                    .facets(s)
                    .iter()
                    .map(|&f| values[f * n + i])
                    .fold(f64::NEG_INFINITY, f64::max);
                top + rng.random_range(0.01..0.5)
            };
        }
    }
    Filtration::new(complex.clone(), n, values).unwrap()
}

/// Filtration with small integer values and many ties.
pub fn tied<R: Rng>(rng: &mut R, complex: &Arc<SimplicialComplex>, n: usize) -> Filtration {
    let mut values = vec![0.0; complex.len() * n];
    for s in 0..complex.len() {
        for i in 0..n {
            let top = complex
                .facets(s)
                .iter()
                .map(|&f| values[f * n + i])
                .fold(0.0, f64::max);
            values[s * n + i] = top + rng.random_range(0..2) as f64 + if complex.simplex_dim(s) == 0 {
                rng.random_range(0..3) as f64
            } else {
                0.0
            };
        }
    }
    Filtration::new(complex.clone(), n, values).unwrap()
}

/// Lower-star filtration from random vertex values.
pub fn random_lower_star<R: Rng>(rng: &mut R, complex: &Arc<SimplicialComplex>, n: usize) -> (HashMap<Vertex, Vec<f64>>, Filtration) {
    let vals: HashMap<Vertex, Vec<f64>> = complex
        .vertices()
        .iter()
        .map(|&v| (v, (0..n).map(|_| rng.random::<f64>()).collect()))
        .collect();
    let f = lower_star(complex.clone(), &vals).unwrap();
    (vals, f)
}

pub fn random_cloud<R: Rng>(rng: &mut R, points: usize) -> PointCloud {
    PointCloud::new((0..points).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect()).unwrap()
}

/// The sublevel subcomplex `{σ : f(σ) ≤ r}`.
pub fn sublevel<'a>(f: &'a Filtration, r: &[f64]) -> Subcomplex<'a> {
    Subcomplex::from_predicate(f.complex(), |s| f.value(s).iter().zip(r).all(|(a, b)| a <= b)).unwrap()
}

/// `dim H_degree(K_r)` straight from homology.
pub fn betti_at(f: &Filtration, r: &[f64], degree: usize) -> usize {
    homology_dimension(&sublevel(f, r), degree)
}

/// `rank H_degree(K_r) -> H_degree(K_s)` straight from homology.
pub fn rank_between(f: &Filtration, r: &[f64], s: &[f64], degree: usize) -> usize {
    inclusion_rank(&sublevel(f, r), &sublevel(f, s), degree).unwrap()
}

/// Dyadic value in `[0, 2)` with denominator 8.
pub fn dyadic<R: Rng>(rng: &mut R) -> f64 {
    rng.random_range(0..16) as f64 / 8.0
}

/// Random point measure with at most `units` unit masses.
pub fn random_point_measure<R: Rng>(rng: &mut R, n: usize, units: usize, coord: &mut dyn FnMut(&mut R) -> f64) -> SignedMeasure {
    let masses: Vec<(Location, i64)> = (0..units)
        .map(|_| {
            let loc = Location::Point((0..n).map(|_| coord(rng)).collect());
            (loc, if rng.random_bool(0.5) { 1 } else { -1 })
        })
        .collect();
    SignedMeasure::new(GroundSpace::Rn(n), masses).unwrap()
}

/// Random bar measure with at most `units` unit masses; about one bar in
/// ten is infinite.
pub fn random_bar_measure<R: Rng>(rng: &mut R, n: usize, units: usize, coord: &mut dyn FnMut(&mut R) -> f64) -> SignedMeasure {
    let masses: Vec<(Location, i64)> = (0..units)
        .map(|_| {
            let birth: Vec<f64> = (0..n).map(|_| coord(rng)).collect();
            let death = (!rng.random_bool(0.1)).then(|| birth.iter().map(|b| b + coord(rng)).collect());
            (Location::Bar { birth, death }, if rng.random_bool(0.5) { 1 } else { -1 })
        })
        .collect();
    SignedMeasure::new(GroundSpace::Bars(n), masses).unwrap()
}

/// Every unit of `mu` and `nu` as `(left, right)` per the Jordan reduction:
/// left = `μ⁺ + ν⁻`, right = `ν⁺ + μ⁻`.
pub fn jordan_units(mu: &SignedMeasure, nu: &SignedMeasure) -> (Vec<Location>, Vec<Location>) {
    let mut left = Vec::new();
    let mut right = Vec::new();
    for (loc, m) in mu.masses() {
        let side = if *m > 0 { &mut left } else { &mut right };
        side.extend(std::iter::repeat_n(loc.clone(), m.unsigned_abs() as usize));
    }
    for (loc, m) in nu.masses() {
        let side = if *m > 0 { &mut right } else { &mut left };
        side.extend(std::iter::repeat_n(loc.clone(), m.unsigned_abs() as usize));
    }
    (left, right)
}

fn flat(loc: &Location) -> Vec<f64> {
    match loc {
        Location::Point(p) => p.clone(),
        Location::Bar { birth, death } => {
            let mut v = birth.clone();
            match death {
                Some(d) => v.extend(d),
                None => v.extend(vec![f64::INFINITY; birth.len()]),
            }
            v
        }
    }
}

/// ℓ∞ distance where equal infinite coordinates are at distance zero.
pub fn linf(a: &Location, b: &Location) -> f64 {
    flat(a)
        .iter()
        .zip(flat(b))
        .map(|(x, y)| if *x == y { 0.0 } else { (x - y).abs() })
        .fold(0.0, f64::max)
}

pub fn to_diagonal(a: &Location) -> f64 {
    match a {
        Location::Bar { birth, death: Some(d) } => birth
            .iter()
            .zip(d)
            .map(|(r, s)| (s - r) / 2.0)
            .fold(f64::NEG_INFINITY, f64::max),
        _ => f64::INFINITY,
    }
}

/// Exhaustive optimal transport cost; partial matchings with the diagonal
/// when `bars` is set.
pub fn brute_force_ot(left: &[Location], right: &[Location], bars: bool) -> f64 {
    fn go(i: usize, left: &[Location], right: &[Location], used: &mut Vec<bool>, bars: bool) -> f64 {
        if i == left.len() {
            return if bars {
                right
                    .iter()
                    .zip(used.iter())
                    .filter(|(_, u)| !**u)
                    .map(|(r, _)| to_diagonal(r))
                    .sum()
            } else if used.iter().all(|u| *u) {
                0.0
            } else {
                f64::INFINITY
            };
        }
        let mut best = f64::INFINITY;
        if bars {
            best = to_diagonal(&left[i]) + go(i + 1, left, right, used, bars);
        }
        for j in 0..right.len() {
            if !used[j] {
                used[j] = true;
                let c = linf(&left[i], &right[j]) + go(i + 1, left, right, used, bars);
                used[j] = false;
                best = best.min(c);
            }
        }
        best
    }
    if !bars && left.len() != right.len() {
        return f64::INFINITY;
    }
    go(0, left, right, &mut vec![false; right.len()], bars)
}

/// `|fd - g| / max(1, |g|)`.
pub fn relative_error(fd: f64, g: f64) -> f64 {
    (fd - g).abs() / g.abs().max(1.0)
}
