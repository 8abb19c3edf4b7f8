//! Gaussian elimination over F2.
//!
//! Matrices are passed column-wise as lists of row indices holding a one.

/// Above this many rows or columns, [`rank`] switches to sparse elimination.
pub const DENSE_RANK_LIMIT: usize = 1 << 12;

/// Rank of a 0/1 matrix over F2.
pub fn rank(columns: &[Vec<usize>], nrows: usize) -> usize {
    if nrows.max(columns.len()) <= DENSE_RANK_LIMIT {
        dense_rank(columns, nrows)
    } else {
        sparse_rank(columns, nrows)
    }
}

fn words_for(bits: usize) -> usize {
    bits.div_ceil(64).max(1)
}

fn to_bits(col: &[usize], words: usize) -> Vec<u64> {
    let mut bits = vec![0u64; words];
    for &r in col {
        bits[r / 64] ^= 1 << (r % 64);
    }
    bits
}

fn highest_bit(bits: &[u64]) -> Option<usize> {
    bits.iter()
        .enumerate()
        .rev()
        .find(|(_, &w)| w != 0)
        .map(|(i, &w)| i * 64 + 63 - w.leading_zeros() as usize)
}

fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

/// Bit-packed elimination, one `u64` word per 64 rows.
pub fn dense_rank(columns: &[Vec<usize>], nrows: usize) -> usize {
    let words = words_for(nrows);
    let mut pivots: Vec<Option<Vec<u64>>> = vec![None; nrows];
    let mut rank = 0;
    for col in columns {
        let mut bits = to_bits(col, words);
        while let Some(h) = highest_bit(&bits) {
            match &pivots[h] {
                Some(p) => xor_into(&mut bits, p),
                None => {
                    pivots[h] = Some(bits);
                    rank += 1;
                    break;
                }
            }
        }
    }
    rank
}

/// Symmetric difference of two ascending index lists.
pub(crate) fn xor_sorted<T: Ord + Copy>(a: &[T], b: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Column-sparse elimination keyed on the lowest (largest-index) one.
pub fn sparse_rank(columns: &[Vec<usize>], nrows: usize) -> usize {
    let mut pivots: Vec<Option<Vec<usize>>> = vec![None; nrows];
    let mut rank = 0;
    for col in columns {
        let mut c = col.clone();
        c.sort_unstable();
        // repeated entries cancel over F2
        let mut dedup = Vec::with_capacity(c.len());
        for r in c {
            if dedup.last() == Some(&r) {
                dedup.pop();
            } else {
                dedup.push(r);
            }
        }
        let mut c = dedup;
        while let Some(&low) = c.last() {
            match &pivots[low] {
                Some(p) => c = xor_sorted(&c, p),
                None => {
                    pivots[low] = Some(c);
                    rank += 1;
                    break;
                }
            }
        }
    }
    rank
}

/// A basis of the null space, each vector given as the set of column indices
/// whose sum is zero.
pub fn kernel_basis(columns: &[Vec<usize>], nrows: usize) -> Vec<Vec<usize>> {
    let words = words_for(nrows);
    let vwords = words_for(columns.len());
    let mut pivots: Vec<Option<(Vec<u64>, Vec<u64>)>> = vec![None; nrows];
    let mut basis = Vec::new();
    for (j, col) in columns.iter().enumerate() {
        let mut bits = to_bits(col, words);
        let mut v = to_bits(&[j], vwords);
        loop {
            match highest_bit(&bits) {
                None => {
                    basis.push(
                        (0..columns.len())
                            .filter(|&c| v[c / 64] >> (c % 64) & 1 == 1)
                            .collect(),
                    );
                    break;
                }
                Some(h) => match &pivots[h] {
                    Some((p, pv)) => {
                        xor_into(&mut bits, p);
                        xor_into(&mut v, pv);
                    }
                    None => {
                        pivots[h] = Some((bits, v));
                        break;
                    }
                },
            }
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_has_full_rank() {
        let cols: Vec<Vec<usize>> = (0..70).map(|i| vec![i]).collect();
        assert_eq!(dense_rank(&cols, 70), 70);
        assert_eq!(sparse_rank(&cols, 70), 70);
        assert!(kernel_basis(&cols, 70).is_empty());
    }

    #[test]
    fn triangle_boundary_has_rank_two() {
        // edges 01, 02, 12 over vertices 0, 1, 2
        let cols = vec![vec![0, 1], vec![0, 2], vec![1, 2]];
        assert_eq!(dense_rank(&cols, 3), 2);
        let ker = kernel_basis(&cols, 3);
        assert_eq!(ker, vec![vec![0, 1, 2]]);
    }

    proptest! {
        #[test]
        fn dense_and_sparse_agree(
            cols in prop::collection::vec(prop::collection::btree_set(0usize..40, 0..6), 0..50)
        ) {
            let cols: Vec<Vec<usize>> = cols.into_iter().map(|s| s.into_iter().collect()).collect();
            let r = dense_rank(&cols, 40);
            prop_assert_eq!(r, sparse_rank(&cols, 40));
            // rank-nullity
            prop_assert_eq!(r + kernel_basis(&cols, 40).len(), cols.len());
        }

        #[test]
        fn kernel_vectors_sum_to_zero(
            cols in prop::collection::vec(prop::collection::btree_set(0usize..12, 1..4), 1..30)
        ) {
            let cols: Vec<Vec<usize>> = cols.into_iter().map(|s| s.into_iter().collect()).collect();
            for k in kernel_basis(&cols, 12) {
                let mut acc = vec![false; 12];
                for c in k {
                    for &r in &cols[c] {
                        acc[r] ^= true;
                    }
                }
                prop_assert!(acc.iter().all(|&b| !b));
            }
        }
    }
}
