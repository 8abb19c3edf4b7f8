use super::{f2, ComplexError, SimplicialComplex, Subcomplex};

/// Boundary matrix of degree `i`: columns are `i`-simplices, rows are
/// `(i-1)`-simplices, both listed by ascending simplex index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryMatrix {
    pub degree: usize,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    /// For each column, the row positions holding a one.
    pub entries: Vec<Vec<usize>>,
}

impl BoundaryMatrix {
    /// Columns of the simplices that belong to `sub`.
    pub fn restricted_columns(&self, sub: &Subcomplex<'_>) -> Vec<Vec<usize>> {
        self.cols
            .iter()
            .zip(&self.entries)
            .filter(|(&s, _)| sub.contains(s))
            .map(|(_, e)| e.clone())
            .collect()
    }

    /// Product `self ∘ next` over F2, as a column list (rows of `self`).
    pub fn compose(&self, next: &BoundaryMatrix) -> Vec<Vec<usize>> {
        next.entries
            .iter()
            .map(|col| {
                let mut acc = vec![false; self.rows.len()];
                for &mid in col {
                    for &r in &self.entries[mid] {
                        acc[r] ^= true;
                    }
                }
                acc.iter()
                    .enumerate()
                    .filter(|(_, &b)| b)
                    .map(|(r, _)| r)
                    .collect()
            })
            .collect()
    }
}

pub fn boundary_matrix(complex: &SimplicialComplex, degree: usize) -> BoundaryMatrix {
    let cols: Vec<usize> = complex.simplices_of_dim(degree).collect();
    let rows: Vec<usize> = if degree == 0 {
        Vec::new()
    } else {
        complex.simplices_of_dim(degree - 1).collect()
    };
    let entries = cols
        .iter()
        .map(|&s| {
            complex
                .facets(s)
                .iter()
                .map(|f| rows.binary_search(f).expect("facet has lower dimension"))
                .collect()
        })
        .collect();
    BoundaryMatrix {
        degree,
        rows,
        cols,
        entries,
    }
}

/// `dim H_i(sub)` over F2: nullity of `∂_i` minus rank of `∂_{i+1}`.
pub fn homology_dimension(sub: &Subcomplex<'_>, degree: usize) -> usize {
    let complex = sub.complex();
    if degree > complex.dimension() {
        return 0;
    }
    let d_i = boundary_matrix(complex, degree);
    let cols_i = d_i.restricted_columns(sub);
    let rank_i = if degree == 0 {
        0
    } else {
        f2::rank(&cols_i, d_i.rows.len())
    };
    let d_next = boundary_matrix(complex, degree + 1);
    let rank_next = f2::rank(&d_next.restricted_columns(sub), d_next.rows.len());
    cols_i.len() - rank_i - rank_next
}

/// Rank of `H_i(small) -> H_i(large)` induced by inclusion.
///
/// Computed as `dim(Z_i(small) + B_i(large)) - dim B_i(large)`.
pub fn inclusion_rank(
    small: &Subcomplex<'_>,
    large: &Subcomplex<'_>,
    degree: usize,
) -> Result<usize, ComplexError> {
    let complex = small.complex();
    if !std::ptr::eq(complex, large.complex()) && complex != large.complex() {
        return Err(ComplexError::ParentMismatch);
    }
    if let Some(s) = (0..complex.len()).find(|&s| small.contains(s) && !large.contains(s)) {
        return Err(ComplexError::NotNested(s));
    }
    if degree > complex.dimension() {
        return Ok(0);
    }
    let d_i = boundary_matrix(complex, degree);
    // positions (within d_i.cols) of the i-simplices of `small`
    let small_cols: Vec<usize> = (0..d_i.cols.len())
        .filter(|&p| small.contains(d_i.cols[p]))
        .collect();
    let cycles: Vec<Vec<usize>> = if degree == 0 {
        small_cols.iter().map(|&p| vec![p]).collect()
    } else {
        let cols: Vec<Vec<usize>> = small_cols.iter().map(|&p| d_i.entries[p].clone()).collect();
        f2::kernel_basis(&cols, d_i.rows.len())
            .into_iter()
            .map(|k| k.into_iter().map(|c| small_cols[c]).collect())
            .collect()
    };
    let d_next = boundary_matrix(complex, degree + 1);
    let nrows = d_i.cols.len();
    let mut boundaries = d_next.restricted_columns(large);
    let rank_b = f2::rank(&boundaries, nrows);
    boundaries.extend(cycles);
    Ok(f2::rank(&boundaries, nrows) - rank_b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::Vertex;

    fn complex(raw: &[&[Vertex]]) -> SimplicialComplex {
        SimplicialComplex::from_simplices(raw.iter().map(|s| s.to_vec())).unwrap()
    }

    fn triangle(filled: bool) -> SimplicialComplex {
        let mut raw: Vec<&[Vertex]> = vec![&[0], &[1], &[2], &[0, 1], &[1, 2], &[0, 2]];
        if filled {
            raw.push(&[0, 1, 2]);
        }
        complex(&raw)
    }

    #[test]
    fn triangle_boundary_has_one_cycle() {
        let k = triangle(false);
        assert_eq!(homology_dimension(&k.full(), 1), 1);
        assert_eq!(homology_dimension(&k.full(), 0), 1);
    }

    #[test]
    fn filled_triangle_kills_cycle() {
        let k = triangle(true);
        assert_eq!(homology_dimension(&k.full(), 1), 0);
        assert_eq!(homology_dimension(&k.full(), 2), 0);
    }

    #[test]
    fn isolated_vertices() {
        let k = complex(&[&[0], &[1]]);
        assert_eq!(homology_dimension(&k.full(), 0), 2);
        assert_eq!(homology_dimension(&k.full(), 7), 0);
    }

    #[test]
    fn edge_merges_two_components() {
        let k = complex(&[&[0], &[1], &[0, 1]]);
        let r = Subcomplex::new(&k, vec![true, true, false]).unwrap();
        assert_eq!(inclusion_rank(&r, &k.full(), 0).unwrap(), 1);
        assert_eq!(inclusion_rank(&r, &r, 0).unwrap(), 2);
    }

    #[test]
    fn cycle_dies_in_filled_triangle() {
        let k = triangle(true);
        let boundary = Subcomplex::from_predicate(&k, |s| k.simplex_dim(s) < 2).unwrap();
        assert_eq!(homology_dimension(&boundary, 1), 1);
        assert_eq!(inclusion_rank(&boundary, &k.full(), 1).unwrap(), 0);
    }

    #[test]
    fn not_nested_is_an_error() {
        let k = complex(&[&[0], &[1]]);
        let a = Subcomplex::new(&k, vec![true, false]).unwrap();
        let b = Subcomplex::new(&k, vec![false, true]).unwrap();
        assert_eq!(inclusion_rank(&a, &b, 0), Err(ComplexError::NotNested(0)));
    }

    #[test]
    fn boundary_of_boundary_vanishes() {
        let k = complex(&[
            &[0],
            &[1],
            &[2],
            &[3],
            &[0, 1],
            &[0, 2],
            &[0, 3],
            &[1, 2],
            &[1, 3],
            &[2, 3],
            &[0, 1, 2],
            &[0, 1, 3],
            &[0, 2, 3],
            &[1, 2, 3],
            &[0, 1, 2, 3],
        ]);
        for d in 1..3 {
            let lo = boundary_matrix(&k, d);
            let hi = boundary_matrix(&k, d + 1);
            assert!(lo.compose(&hi).iter().all(|c| c.is_empty()));
            for (col, &s) in hi.entries.iter().zip(&hi.cols) {
                assert_eq!(col.len(), k.simplex(s).len());
            }
        }
    }
}
