//! Seeded fixtures shared by the benchmarks.

use mpgrad::autodiff::{Bandwidth, Descriptor, LossKind, LossSpec, Pipeline};
use mpgrad::{Filtration, GroundSpace, PointCloud, SignedMeasure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` points uniform in the unit square.
pub fn unit_square(n: usize, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PointCloud::new((0..n).map(|_| vec![rng.random(), rng.random()]).collect())
        .expect("points are finite")
}

pub fn rips() -> Pipeline {
    Pipeline::Rips {
        max_dim: 2,
        max_radius: f64::INFINITY,
    }
}

pub fn function_rips() -> Pipeline {
    Pipeline::FunctionRips {
        max_dim: 2,
        max_radius: f64::INFINITY,
        bandwidth: Bandwidth::Fixed(0.2),
    }
}

/// Function–Rips bifiltration of `n` seeded points.
pub fn bifiltration(n: usize, seed: u64) -> Filtration {
    function_rips()
        .build(&unit_square(n, seed))
        .expect("pipeline builds")
        .filtration
}

/// OT-to-zero loss on `H_1` of an `n`-parameter Hilbert measure.
pub fn distance_to_zero(n: usize) -> LossSpec {
    LossSpec::new(
        LossKind::DistanceToMeasure(SignedMeasure::zero(GroundSpace::Rn(n))),
        Descriptor::Hilbert,
        1,
        -1.0,
    )
    .expect("compatible loss")
}
