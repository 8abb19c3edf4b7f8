//! Homological descriptors of filtrations.
//!
//! Every descriptor is first computed on the grid filtration `ord_f` and then
//! pushed to real coordinates through `ι_f`. The pushed forms
//! ([`PushedMeasure`]) remember which grid point each mass came from; that
//! provenance is what gradients flow back through.

mod hilbert;
mod landscape;
mod measure;
mod rank;

pub use hilbert::{
    hilbert_grid, hilbert_measure, hilbert_pushed, mobius_inversion, sorted_hilbert, HilbertGrid,
    SortedHilbert,
};
pub use landscape::{landscape, LandscapeEvaluator, LandscapeWitness, Side};
pub use measure::{GroundSpace, Location, SignedMeasure};
pub use rank::{rank_grid, rank_masses, rank_measure, rank_pushed, RankGrid, RankMass};

use thiserror::Error;

use crate::stratification::StratificationError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DescriptorError {
    #[error("location has {got} coordinates, ground space has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("bar birth is not below its death")]
    InvertedBar,
    #[error("non-finite coordinate in a measure location")]
    NonFinite,
    #[error("point location in a bar measure or vice versa")]
    WrongLocationKind,
    #[error("rank table would need {0} entries")]
    GridTooLarge(usize),
    #[error("landscape level must be at least 1")]
    ZeroLevel,
    #[error("landscape query has {got} coordinates, filtration has {expected}")]
    QueryDimension { expected: usize, got: usize },
    #[error(transparent)]
    Stratification(#[from] StratificationError),
}

/// Where a pushed mass sits on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GridLocation {
    Point(usize),
    /// Birth point and death point, `None` for the sentinel above the grid.
    Bar(usize, Option<usize>),
}

/// A signed measure together with the grid origin of each of its masses.
#[derive(Debug, Clone, PartialEq)]
pub struct PushedMeasure {
    pub measure: SignedMeasure,
    /// Parallel to `measure.masses()`.
    pub origins: Vec<GridLocation>,
}
