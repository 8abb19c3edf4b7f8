//! Finite simplicial complexes and exact homology over the two-element field.
//!
//! Everything downstream (Hilbert functions, rank invariants, landscapes) is
//! computed from the ranks produced here, so this module favours exactness
//! over speed: all arithmetic is over F2 and all answers are integers.

mod f2;
mod homology;
mod reduction;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

pub use f2::{dense_rank, kernel_basis, rank, sparse_rank, DENSE_RANK_LIMIT};
pub use homology::{boundary_matrix, homology_dimension, inclusion_rank, BoundaryMatrix};
pub use reduction::{persistence_pairs, Bar};

/// Vertex identifier.
pub type Vertex = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComplexError {
    #[error("complex has no simplices")]
    Empty,
    #[error("empty simplex at position {0}")]
    EmptySimplex(usize),
    #[error("duplicate simplex {0:?}")]
    DuplicateSimplex(Vec<Vertex>),
    #[error("simplex {simplex:?} is missing its face {face:?}")]
    MissingFace {
        simplex: Vec<Vertex>,
        face: Vec<Vertex>,
    },
    #[error("membership mask has length {got}, complex has {expected} simplices")]
    MaskLength { expected: usize, got: usize },
    #[error("subcomplex is not closed under faces: {simplex} present without face {face}")]
    NotClosed { simplex: usize, face: usize },
    #[error("subcomplexes belong to different complexes")]
    ParentMismatch,
    #[error("subcomplexes are not nested: simplex {0} is in the smaller but not the larger")]
    NotNested(usize),
}

/// A finite simplicial complex with simplices in canonical order:
/// by dimension, then lexicographically by sorted vertex list.
///
/// Canonical order puts every face strictly before its cofaces, which the
/// reduction code relies on.
#[derive(Clone, PartialEq, Eq)]
pub struct SimplicialComplex {
    vertices: Vec<Vertex>,
    simplices: Vec<Vec<Vertex>>,
    index: HashMap<Vec<Vertex>, usize>,
    facets: Vec<Vec<usize>>,
    dimension: usize,
}

impl fmt::Debug for SimplicialComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SimplicialComplex")
            .field("vertices", &self.vertices.len())
            .field("simplices", &self.simplices.len())
            .field("dimension", &self.dimension)
            .finish()
    }
}

impl SimplicialComplex {
    /// Validates a raw simplex list. Missing faces are reported, never added.
    pub fn from_simplices<I, S>(raw: I) -> Result<Self, ComplexError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[Vertex]>,
    {
        let mut simplices = Vec::new();
        for (pos, s) in raw.into_iter().enumerate() {
            let mut s = s.as_ref().to_vec();
            if s.is_empty() {
                return Err(ComplexError::EmptySimplex(pos));
            }
            s.sort_unstable();
            s.dedup();
            simplices.push(s);
        }
        if simplices.is_empty() {
            return Err(ComplexError::Empty);
        }
        simplices.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        for w in simplices.windows(2) {
            if w[0] == w[1] {
                return Err(ComplexError::DuplicateSimplex(w[0].clone()));
            }
        }
        let index: HashMap<Vec<Vertex>, usize> = simplices
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();

        let mut facets = Vec::with_capacity(simplices.len());
        for s in &simplices {
            let mut fs = Vec::with_capacity(s.len());
            if s.len() > 1 {
                for skip in 0..s.len() {
                    let face: Vec<Vertex> = s
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != skip)
                        .map(|(_, &v)| v)
                        .collect();
                    match index.get(&face) {
                        Some(&fi) => fs.push(fi),
                        None => {
                            return Err(ComplexError::MissingFace {
                                simplex: s.clone(),
                                face,
                            })
                        }
                    }
                }
                fs.sort_unstable();
            }
            facets.push(fs);
        }
        let vertices = simplices
            .iter()
            .take_while(|s| s.len() == 1)
            .map(|s| s[0])
            .collect();
        let dimension = simplices.last().map(|s| s.len() - 1).unwrap_or(0);
        Ok(Self {
            vertices,
            simplices,
            index,
            facets,
            dimension,
        })
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn simplices(&self) -> &[Vec<Vertex>] {
        &self.simplices
    }

    pub fn simplex(&self, idx: usize) -> &[Vertex] {
        &self.simplices[idx]
    }

    /// Dimension of simplex `idx` (vertex count minus one).
    pub fn simplex_dim(&self, idx: usize) -> usize {
        self.simplices[idx].len() - 1
    }

    /// Index of the simplex with exactly these vertices, in any order.
    pub fn index_of(&self, vertices: &[Vertex]) -> Option<usize> {
        let mut key = vertices.to_vec();
        key.sort_unstable();
        key.dedup();
        self.index.get(&key).copied()
    }

    /// Indices of the codimension-one faces of simplex `idx`, ascending.
    pub fn facets(&self, idx: usize) -> &[usize] {
        &self.facets[idx]
    }

    /// Indices of all simplices of dimension `dim`, ascending.
    pub fn simplices_of_dim(&self, dim: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| self.simplices[i].len() == dim + 1)
    }

    /// Index of vertex `v` among the 0-simplices.
    pub fn vertex_index(&self, v: Vertex) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }

    pub fn full(&self) -> Subcomplex<'_> {
        Subcomplex {
            complex: self,
            members: vec![true; self.len()],
        }
    }
}

/// A face-closed subset of a parent complex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subcomplex<'a> {
    complex: &'a SimplicialComplex,
    members: Vec<bool>,
}

impl<'a> Subcomplex<'a> {
    pub fn new(complex: &'a SimplicialComplex, members: Vec<bool>) -> Result<Self, ComplexError> {
        if members.len() != complex.len() {
            return Err(ComplexError::MaskLength {
                expected: complex.len(),
                got: members.len(),
            });
        }
        for (s, &m) in members.iter().enumerate() {
            if m {
                if let Some(&face) = complex.facets(s).iter().find(|&&f| !members[f]) {
                    return Err(ComplexError::NotClosed { simplex: s, face });
                }
            }
        }
        Ok(Self { complex, members })
    }

    pub fn from_predicate(
        complex: &'a SimplicialComplex,
        pred: impl Fn(usize) -> bool,
    ) -> Result<Self, ComplexError> {
        Self::new(complex, (0..complex.len()).map(pred).collect())
    }

    pub fn complex(&self) -> &'a SimplicialComplex {
        self.complex
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.members[idx]
    }

    pub fn members(&self) -> &[bool] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|&m| m)
    }

    pub fn is_subset_of(&self, other: &Subcomplex<'_>) -> bool {
        self.members
            .iter()
            .zip(&other.members)
            .all(|(&a, &b)| !a || b)
    }

    /// Alternating count of simplices by dimension.
    pub fn euler_characteristic(&self) -> i64 {
        (0..self.complex.len())
            .filter(|&s| self.members[s])
            .map(|s| if self.complex.simplex_dim(s) % 2 == 0 { 1 } else { -1 })
            .sum()
    }
}
