//! Differentiable multiparameter persistence descriptors.
//!
//! The pipeline is `points -> filtration -> descriptor -> loss`. Descriptors
//! (Hilbert and rank decomposition signed measures, sorted Hilbert vectors,
//! multiparameter landscapes) are computed on the grid of a filtration and
//! pushed through its grid inclusion, which is what makes them piecewise
//! affine in the filtration values and lets [`autodiff`] route subgradients
//! back to simplices and points.

pub mod autodiff;
pub mod complex;
pub mod descriptors;
pub mod filtrations;
pub mod io;
pub mod optimizer;
pub mod stratification;
pub mod transport;

pub use complex::{ComplexError, SimplicialComplex, Subcomplex, Vertex};
pub use descriptors::{
    hilbert_grid, hilbert_measure, landscape, rank_grid, rank_measure, sorted_hilbert,
    DescriptorError, GroundSpace, HilbertGrid, LandscapeEvaluator, Location, RankGrid,
    SignedMeasure, SortedHilbert,
};
pub use filtrations::{DensityEstimate, Filtration, FiltrationError, PointCloud};
pub use stratification::{
    choose_carrier, from_incl, its_incl, same_cell, stratify, Carrier, CellId, Grid,
    GridFiltration, GridInclusion, StratificationError,
};
pub use transport::{ot_distance, ot_subgradient, Assignment, GroundMetric, TransportError};

use thiserror::Error;

/// Any error raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Filtration(#[from] FiltrationError),
    #[error(transparent)]
    Stratification(#[from] StratificationError),
    #[error(transparent)]
    Descriptor(#[from] DescriptorError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Autodiff(#[from] autodiff::AutodiffError),
    #[error(transparent)]
    Optimizer(#[from] optimizer::OptimizerError),
    #[error(transparent)]
    Io(#[from] io::ParseError),
}
