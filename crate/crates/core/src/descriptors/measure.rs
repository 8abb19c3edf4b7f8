use std::cmp::Ordering;

use super::DescriptorError;

/// The space a measure lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroundSpace {
    /// `R^n` with the ℓ∞ metric.
    Rn(usize),
    /// Bars `(r, s)` with `r ≤ s` in `R^n`, `s` possibly infinite, paired with
    /// the diagonal.
    Bars(usize),
}

impl GroundSpace {
    pub fn parameters(&self) -> usize {
        match *self {
            GroundSpace::Rn(n) | GroundSpace::Bars(n) => n,
        }
    }
}

/// Support point of a Dirac mass.
#[derive(Debug, Clone, PartialEq)]
pub enum Location {
    Point(Vec<f64>),
    /// `death == None` is the point at infinity.
    Bar { birth: Vec<f64>, death: Option<Vec<f64>> },
}

pub(crate) fn cmp_slices(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

impl Location {
    /// Total order used for canonical form: lexicographic on coordinates,
    /// with infinite deaths after every finite one.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Location::Point(a), Location::Point(b)) => cmp_slices(a, b),
            (Location::Point(_), Location::Bar { .. }) => Ordering::Less,
            (Location::Bar { .. }, Location::Point(_)) => Ordering::Greater,
            (
                Location::Bar {
                    birth: b1,
                    death: d1,
                },
                Location::Bar {
                    birth: b2,
                    death: d2,
                },
            ) => cmp_slices(b1, b2).then_with(|| match (d1, d2) {
                (None, None) => Ordering::Equal,
                (None, Some(_)) => Ordering::Greater,
                (Some(_), None) => Ordering::Less,
                (Some(x), Some(y)) => cmp_slices(x, y),
            }),
        }
    }

    fn check(&self, ground: GroundSpace) -> Result<(), DescriptorError> {
        let n = ground.parameters();
        let dims = |v: &[f64]| {
            if v.len() != n {
                Err(DescriptorError::DimensionMismatch {
                    expected: n,
                    got: v.len(),
                })
            } else if v.iter().any(|x| !x.is_finite()) {
                Err(DescriptorError::NonFinite)
            } else {
                Ok(())
            }
        };
        match (self, ground) {
            (Location::Point(p), GroundSpace::Rn(_)) => dims(p),
            (Location::Bar { birth, death }, GroundSpace::Bars(_)) => {
                dims(birth)?;
                if let Some(d) = death {
                    dims(d)?;
                    if birth.iter().zip(d).any(|(r, s)| r > s) {
                        return Err(DescriptorError::InvertedBar);
                    }
                }
                Ok(())
            }
            _ => Err(DescriptorError::WrongLocationKind),
        }
    }
}

/// Finite integer combination of Dirac masses, kept in canonical form:
/// locations sorted by [`Location::canonical_cmp`], no duplicates, no zero
/// multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedMeasure {
    ground: GroundSpace,
    masses: Vec<(Location, i64)>,
}

impl SignedMeasure {
    pub fn new(
        ground: GroundSpace,
        masses: impl IntoIterator<Item = (Location, i64)>,
    ) -> Result<Self, DescriptorError> {
        let mut masses: Vec<(Location, i64)> = masses.into_iter().collect();
        for (loc, _) in &masses {
            loc.check(ground)?;
        }
        masses.sort_by(|a, b| a.0.canonical_cmp(&b.0));
        let mut merged: Vec<(Location, i64)> = Vec::with_capacity(masses.len());
        for (loc, m) in masses {
            match merged.last_mut() {
                Some(last) if last.0.canonical_cmp(&loc) == Ordering::Equal => last.1 += m,
                _ => merged.push((loc, m)),
            }
        }
        merged.retain(|(_, m)| *m != 0);
        Ok(Self {
            ground,
            masses: merged,
        })
    }

    /// Caller guarantees canonical order, distinct locations and nonzero
    /// multiplicities.
    pub(crate) fn from_canonical(ground: GroundSpace, masses: Vec<(Location, i64)>) -> Self {
        debug_assert!(masses
            .windows(2)
            .all(|w| w[0].0.canonical_cmp(&w[1].0) == Ordering::Less));
        debug_assert!(masses.iter().all(|(_, m)| *m != 0));
        Self { ground, masses }
    }

    pub fn zero(ground: GroundSpace) -> Self {
        Self {
            ground,
            masses: Vec::new(),
        }
    }

    pub fn dirac(ground: GroundSpace, loc: Location) -> Result<Self, DescriptorError> {
        Self::new(ground, [(loc, 1)])
    }

    pub fn ground(&self) -> GroundSpace {
        self.ground
    }

    pub fn masses(&self) -> &[(Location, i64)] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn total_mass(&self) -> i64 {
        self.masses.iter().map(|(_, m)| m).sum()
    }

    /// Positive Jordan part expanded to unit masses (indices into `masses`).
    pub fn positive_units(&self) -> Vec<usize> {
        self.units(|m| m > 0)
    }

    /// Negative Jordan part expanded to unit masses.
    pub fn negative_units(&self) -> Vec<usize> {
        self.units(|m| m < 0)
    }

    fn units(&self, keep: impl Fn(i64) -> bool) -> Vec<usize> {
        self.masses
            .iter()
            .enumerate()
            .filter(|(_, (_, m))| keep(*m))
            .flat_map(|(i, (_, m))| std::iter::repeat_n(i, m.unsigned_abs() as usize))
            .collect()
    }

    /// `-μ`.
    pub fn negated(&self) -> Self {
        Self {
            ground: self.ground,
            masses: self
                .masses
                .iter()
                .map(|(l, m)| (l.clone(), -m))
                .collect(),
        }
    }

    /// `μ + ν`; both must live on the same ground space.
    pub fn add(&self, other: &Self) -> Result<Self, DescriptorError> {
        if self.ground != other.ground {
            return Err(DescriptorError::WrongLocationKind);
        }
        Self::new(
            self.ground,
            self.masses.iter().chain(&other.masses).cloned(),
        )
    }

    /// Mass of the closed downset `{x : x ≤ r}` for a point measure.
    pub fn downset_mass(&self, r: &[f64]) -> i64 {
        self.masses
            .iter()
            .filter_map(|(l, m)| match l {
                Location::Point(p) if p.iter().zip(r).all(|(a, b)| a <= b) => Some(*m),
                _ => None,
            })
            .sum()
    }

    /// Mass of `{(r', s') : r' ≤ r, s' ≰ s}` for a bar measure; `s == None`
    /// counts bars with infinite death only.
    pub fn rank_set_mass(&self, r: &[f64], s: Option<&[f64]>) -> i64 {
        self.masses
            .iter()
            .filter_map(|(l, m)| match l {
                Location::Bar { birth, death } => {
                    let born = birth.iter().zip(r).all(|(a, b)| a <= b);
                    let alive = match (death, s) {
                        (None, _) => true,
                        (Some(_), None) => false,
                        (Some(d), Some(s)) => !d.iter().zip(s).all(|(a, b)| a <= b),
                    };
                    (born && alive).then_some(*m)
                }
                _ => None,
            })
            .sum()
    }
}
