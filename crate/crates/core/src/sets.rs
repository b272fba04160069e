//! Ground sets, subset bitmasks and set functions.

use std::collections::HashMap;
use std::fmt;
use std::ops::{BitAnd, BitOr, Not, Sub};
use std::sync::Arc;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rat::Rat;

/// Largest ground set addressable by a [`SubsetMask`].
pub const MAX_POINTS: usize = 64;

/// Largest ground set for which a dense [`SetFunction`] table is built.
pub const DENSE_CAP: usize = 16;

/// An ordered list of distinct point labels. Cheap to clone.
#[derive(Clone, PartialEq, Eq)]
pub struct GroundSet {
    inner: Arc<GroundInner>,
}

#[derive(PartialEq, Eq)]
struct GroundInner {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl GroundSet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() > MAX_POINTS {
            return Err(Error::CapExceeded {
                size: names.len(),
                cap: MAX_POINTS,
            });
        }
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::DuplicateLabel(name.clone()));
            }
        }
        Ok(Self {
            inner: Arc::new(GroundInner { names, index }),
        })
    }

    /// `x, y, z` for up to three points, `p1 … pn` otherwise.
    pub fn with_default_labels(n: usize) -> Result<Self> {
        if n <= 3 {
            Self::new(["x", "y", "z"].iter().take(n).copied())
        } else {
            Self::new((1..=n).map(|i| format!("p{i}")))
        }
    }

    pub fn len(&self) -> usize {
        self.inner.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.inner.names
    }

    pub fn name(&self, index: usize) -> &str {
        &self.inner.names[index]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.inner
            .index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownPoint(name.to_string()))
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index < self.len() {
            Ok(())
        } else {
            Err(Error::PointOutOfRange {
                index,
                size: self.len(),
            })
        }
    }

    pub fn full(&self) -> SubsetMask {
        SubsetMask::full(self.len())
    }

    /// Iterates every subset (including the empty one) in mask order.
    pub fn subsets(&self) -> impl Iterator<Item = SubsetMask> {
        let n = self.len();
        assert!(n < 64, "subset enumeration needs fewer than 64 points");
        (0..1u64 << n).map(SubsetMask)
    }

    pub fn nonempty_subsets(&self) -> impl Iterator<Item = SubsetMask> {
        self.subsets().skip(1)
    }

    /// Renders `{a,b,c}` using the labels in ground order.
    pub fn format_set(&self, set: SubsetMask) -> String {
        let parts: Vec<&str> = set.iter().map(|i| self.name(i)).collect();
        format!("{{{}}}", parts.join(","))
    }

    pub fn format_family(&self, family: &[SubsetMask]) -> String {
        let parts: Vec<String> = family.iter().map(|s| self.format_set(*s)).collect();
        format!("[{}]", parts.join(", "))
    }

    /// Parses a brace literal such as `{a, b}`. Order-insensitive;
    /// duplicates and unknown labels are rejected.
    pub fn parse_set(&self, text: &str) -> Result<SubsetMask> {
        let t = text.trim();
        let body = t
            .strip_prefix('{')
            .and_then(|s| s.strip_suffix('}'))
            .ok_or_else(|| Error::UnknownPoint(format!("malformed set literal {t}")))?;
        let mut mask = SubsetMask::EMPTY;
        for label in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let i = self.index_of(label)?;
            if mask.contains(i) {
                return Err(Error::DuplicateLabel(label.to_string()));
            }
            mask = mask.with(i);
        }
        Ok(mask)
    }

    /// True when both ground sets carry the same labels in the same order.
    pub fn same_as(&self, other: &GroundSet) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.names() == other.names()
    }
}

impl fmt::Debug for GroundSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}

/// A subset of a ground set, as a bitmask over point indices.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SubsetMask(pub u64);

impl SubsetMask {
    pub const EMPTY: SubsetMask = SubsetMask(0);

    pub fn full(n: usize) -> Self {
        if n >= 64 {
            SubsetMask(u64::MAX)
        } else {
            SubsetMask((1u64 << n) - 1)
        }
    }

    pub fn singleton(index: usize) -> Self {
        SubsetMask(1u64 << index)
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        indices
            .into_iter()
            .fold(Self::EMPTY, |acc, i| acc.with(i))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, index: usize) -> bool {
        index < 64 && self.0 >> index & 1 == 1
    }

    pub fn with(self, index: usize) -> Self {
        SubsetMask(self.0 | 1u64 << index)
    }

    pub fn without(self, index: usize) -> Self {
        SubsetMask(self.0 & !(1u64 << index))
    }

    pub fn is_subset_of(self, other: SubsetMask) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersects(self, other: SubsetMask) -> bool {
        self.0 & other.0 != 0
    }

    /// Least index in the set.
    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    /// Every subset of `self`, the empty set first and `self` last.
    pub fn subsets(self) -> impl Iterator<Item = SubsetMask> {
        let full = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == full {
                None
            } else {
                Some((cur.wrapping_sub(full)) & full)
            };
            Some(SubsetMask(cur))
        })
    }
}

impl fmt::Debug for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl BitOr for SubsetMask {
    type Output = SubsetMask;
    fn bitor(self, rhs: Self) -> Self {
        SubsetMask(self.0 | rhs.0)
    }
}

impl BitAnd for SubsetMask {
    type Output = SubsetMask;
    fn bitand(self, rhs: Self) -> Self {
        SubsetMask(self.0 & rhs.0)
    }
}

impl Sub for SubsetMask {
    type Output = SubsetMask;
    fn sub(self, rhs: Self) -> Self {
        SubsetMask(self.0 & !rhs.0)
    }
}

impl Not for SubsetMask {
    type Output = SubsetMask;
    fn not(self) -> Self {
        SubsetMask(!self.0)
    }
}

/// A function on all subsets of a ground set, stored densely. Always zero
/// on the empty set.
#[derive(Clone, PartialEq, Eq)]
pub struct SetFunction {
    ground: GroundSet,
    values: Vec<Rat>,
}

impl SetFunction {
    pub fn zero(ground: &GroundSet) -> Result<Self> {
        check_dense(ground)?;
        Ok(Self {
            ground: ground.clone(),
            values: vec![Rat::zero(); 1 << ground.len()],
        })
    }

    /// Builds the table from `f`; the value on the empty set is forced to 0.
    pub fn from_fn(ground: &GroundSet, mut f: impl FnMut(SubsetMask) -> Rat) -> Result<Self> {
        check_dense(ground)?;
        let values = ground
            .subsets()
            .map(|s| if s.is_empty() { Rat::zero() } else { f(s) })
            .collect();
        Ok(Self {
            ground: ground.clone(),
            values,
        })
    }

    /// Takes a table indexed by mask. The empty-set entry must be 0.
    pub fn from_values(ground: &GroundSet, values: Vec<Rat>) -> Result<Self> {
        check_dense(ground)?;
        let expected = 1usize << ground.len();
        if values.len() != expected {
            return Err(Error::TableSize {
                got: values.len(),
                expected,
            });
        }
        if !values[0].is_zero() {
            return Err(Error::NonzeroOnEmpty);
        }
        Ok(Self {
            ground: ground.clone(),
            values,
        })
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn get(&self, set: SubsetMask) -> &Rat {
        &self.values[set.0 as usize]
    }

    pub fn set(&mut self, set: SubsetMask, value: Rat) -> Result<()> {
        if set.is_empty() && !value.is_zero() {
            return Err(Error::NonzeroOnEmpty);
        }
        self.values[set.0 as usize] = value;
        Ok(())
    }

    pub fn values(&self) -> &[Rat] {
        &self.values
    }

    /// `self ⪯ other` coordinatewise.
    pub fn dominated_by(&self, other: &SetFunction) -> bool {
        self.values.iter().zip(&other.values).all(|(a, b)| a <= b)
    }

    /// Monotone under inclusion. Checked on covering pairs, which suffices.
    pub fn is_monotone(&self) -> bool {
        let n = self.ground.len();
        self.ground.subsets().all(|s| {
            (0..n)
                .filter(|&i| !s.contains(i))
                .all(|i| self.get(s) <= self.get(s.with(i)))
        })
    }

    pub fn same_ground(&self, other: &GroundSet) -> Result<()> {
        if self.ground.same_as(other) {
            Ok(())
        } else {
            Err(Error::GroundMismatch)
        }
    }
}

impl fmt::Debug for SetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for s in self.ground.subsets() {
            m.entry(&self.ground.format_set(s), &self.values[s.0 as usize].to_string());
        }
        m.finish()
    }
}

pub(crate) fn check_dense(ground: &GroundSet) -> Result<()> {
    if ground.len() > DENSE_CAP {
        Err(Error::CapExceeded {
            size: ground.len(),
            cap: DENSE_CAP,
        })
    } else {
        Ok(())
    }
}
