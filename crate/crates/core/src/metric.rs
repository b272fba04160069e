//! Finite metrics, Chebyshev radii and ball hulls.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rat::Rat;
use crate::sets::{GroundSet, SubsetMask};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteMetric {
    ground: GroundSet,
    dist: Vec<Rat>,
}

impl FiniteMetric {
    /// Checks zero diagonal, symmetry, positivity off the diagonal and the
    /// triangle inequality.
    pub fn new(ground: GroundSet, dist: Vec<Rat>) -> Result<Self> {
        let n = ground.len();
        if dist.len() != n * n {
            return Err(Error::InvalidMetric(format!(
                "{} entries for {} points",
                dist.len(),
                n
            )));
        }
        let m = Self { ground, dist };
        m.validate()?;
        Ok(m)
    }

    pub fn from_fn(ground: GroundSet, f: impl Fn(usize, usize) -> Rat) -> Result<Self> {
        let n = ground.len();
        let dist = (0..n * n).map(|k| f(k / n, k % n)).collect();
        Self::new(ground, dist)
    }

    pub(crate) fn from_trusted(ground: GroundSet, dist: Vec<Rat>) -> Self {
        Self { ground, dist }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        let name = |i: usize| self.ground.name(i).to_string();
        for i in 0..n {
            if !self.dist(i, i).is_zero() {
                return Err(Error::InvalidMetric(format!("d({0},{0}) ≠ 0", name(i))));
            }
            for j in 0..n {
                if self.dist(i, j) != self.dist(j, i) {
                    return Err(Error::InvalidMetric(format!(
                        "asymmetric at {},{}",
                        name(i),
                        name(j)
                    )));
                }
                if i != j && self.dist(i, j) <= &Rat::zero() {
                    return Err(Error::InvalidMetric(format!(
                        "d({},{}) must be positive",
                        name(i),
                        name(j)
                    )));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.dist(i, k) > &(self.dist(i, j) + self.dist(j, k)) {
                        return Err(Error::InvalidMetric(format!(
                            "triangle inequality fails at {},{},{}",
                            name(i),
                            name(j),
                            name(k)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn len(&self) -> usize {
        self.ground.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ground.is_empty()
    }

    pub fn dist(&self, i: usize, j: usize) -> &Rat {
        &self.dist[i * self.len() + j]
    }

    pub fn diameter(&self, set: SubsetMask) -> Rat {
        let mut best: Option<&Rat> = None;
        for i in set.iter() {
            for j in set.iter().filter(|&j| j > i) {
                let d = self.dist(i, j);
                if best.map_or(true, |b| d > b) {
                    best = Some(d);
                }
            }
        }
        best.cloned().unwrap_or_else(Rat::zero)
    }

    /// Restriction to a subset, labels kept in ground order.
    pub fn restrict(&self, set: SubsetMask) -> Result<Self> {
        let idx: Vec<usize> = set.iter().collect();
        let ground = GroundSet::new(idx.iter().map(|&i| self.ground.name(i).to_string()))?;
        let dist = idx
            .iter()
            .flat_map(|&i| idx.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.dist(i, j).clone())
            .collect();
        Ok(Self::from_trusted(ground, dist))
    }
}

/// `r_x(A) = max_{a∈A} d(x, a)`.
pub fn chebyshev_radius(metric: &FiniteMetric, x: usize, set: SubsetMask) -> Result<Rat> {
    metric.ground().check_index(x)?;
    set.iter()
        .map(|a| metric.dist(x, a))
        .max()
        .cloned()
        .ok_or(Error::EmptySet)
}

/// Intersection of all closed balls containing `set`. On a finite space it
/// is enough to intersect `B̄(x, r_x(A))` over every center `x`.
pub fn ball_hull(metric: &FiniteMetric, set: SubsetMask) -> Result<SubsetMask> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let n = metric.len();
    let radii: Vec<Rat> = (0..n)
        .map(|x| chebyshev_radius(metric, x, set))
        .collect::<Result<_>>()?;
    Ok(SubsetMask::from_indices((0..n).filter(|&y| {
        (0..n).all(|x| metric.dist(x, y) <= &radii[x])
    })))
}

pub fn is_admissible(metric: &FiniteMetric, set: SubsetMask) -> Result<bool> {
    Ok(ball_hull(metric, set)? == set)
}
