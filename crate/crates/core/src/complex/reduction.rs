//! Standard column reduction for a one-parameter ordering of simplices.

use super::f2::xor_sorted;
use super::SimplicialComplex;

/// A persistence pair in insertion positions: the class created by the
/// simplex at `birth` dies when the simplex at `death` enters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Bar {
    pub birth: usize,
    pub death: Option<usize>,
}

const ABSENT: u32 = u32::MAX;

fn reduce_columns(columns: Vec<(u32, Vec<u32>)>, len: usize) -> Vec<(u32, Option<u32>)> {
    // returns (column position, low after reduction)
    let mut owner: Vec<Option<Vec<u32>>> = vec![None; len];
    let mut out = Vec::with_capacity(columns.len());
    for (p, mut col) in columns {
        loop {
            match col.last() {
                None => {
                    out.push((p, None));
                    break;
                }
                Some(&low) => match &owner[low as usize] {
                    Some(other) => col = xor_sorted(&col, other),
                    None => {
                        owner[low as usize] = Some(col);
                        out.push((p, Some(low)));
                        break;
                    }
                },
            }
        }
    }
    out
}

/// Degree-`degree` barcode of the filtration that inserts `order[0]`,
/// `order[1]`, ... one at a time. Simplices absent from `order` are ignored;
/// every prefix of `order` must be closed under faces.
pub fn persistence_pairs(complex: &SimplicialComplex, order: &[usize], degree: usize) -> Vec<Bar> {
    let mut pos = vec![ABSENT; complex.len()];
    for (p, &s) in order.iter().enumerate() {
        pos[s] = p as u32;
    }
    let column = |s: usize| -> Vec<u32> {
        let mut c: Vec<u32> = complex.facets(s).iter().map(|&f| pos[f]).collect();
        debug_assert!(c.iter().all(|&q| q < pos[s]), "order is not a filtration");
        c.sort_unstable();
        c
    };

    let cofaces: Vec<(u32, Vec<u32>)> = order
        .iter()
        .enumerate()
        .filter(|&(_, &s)| complex.simplex_dim(s) == degree + 1)
        .map(|(p, &s)| (p as u32, column(s)))
        .collect();
    let mut paired = vec![false; order.len()];
    let mut bars = Vec::new();
    for (p, low) in reduce_columns(cofaces, order.len()) {
        if let Some(l) = low {
            paired[l as usize] = true;
            bars.push(Bar {
                birth: l as usize,
                death: Some(p as usize),
            });
        }
    }

    let unpaired = order
        .iter()
        .enumerate()
        .filter(|&(p, &s)| complex.simplex_dim(s) == degree && !paired[p]);
    if degree == 0 {
        bars.extend(unpaired.map(|(p, _)| Bar {
            birth: p,
            death: None,
        }));
    } else {
        let candidates: Vec<usize> = unpaired.map(|(p, _)| p).collect();
        bars.extend(
            positive_columns(complex, order, &pos, degree, &candidates)
                .into_iter()
                .map(|p| Bar {
                    birth: p,
                    death: None,
                }),
        );
    }
    bars.sort_unstable();
    bars
}

/// Positions among `candidates` whose boundary column reduces to zero,
/// i.e. positive simplices.
fn positive_columns(
    complex: &SimplicialComplex,
    order: &[usize],
    pos: &[u32],
    degree: usize,
    candidates: &[usize],
) -> Vec<usize> {
    let mut is_candidate = vec![false; order.len()];
    for &p in candidates {
        is_candidate[p] = true;
    }
    let all: Vec<(u32, Vec<u32>)> = order
        .iter()
        .enumerate()
        .filter(|&(_, &s)| complex.simplex_dim(s) == degree)
        .map(|(p, &s)| {
            let mut c: Vec<u32> = complex.facets(s).iter().map(|&f| pos[f]).collect();
            c.sort_unstable();
            (p as u32, c)
        })
        .collect();
    reduce_columns(all, order.len())
        .into_iter()
        .filter(|&(p, low)| low.is_none() && is_candidate[p as usize])
        .map(|(p, _)| p as usize)
        .collect()
}
