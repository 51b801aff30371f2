use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ray ids are 1-based, `1..=120`.
pub type RayId = u8;

pub const RAY_COUNT: usize = 120;

pub fn check_ray(id: u32) -> Result<RayId> {
    if (1..=RAY_COUNT as u32).contains(&id) {
        Ok(id as RayId)
    } else {
        Err(Error::RayOutOfRange(id))
    }
}

/// A set of rays packed into one `u128`; ray `i` lives at bit `i - 1`.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RaySet(pub u128);

impl RaySet {
    pub const EMPTY: RaySet = RaySet(0);

    pub fn all() -> RaySet {
        RaySet((1u128 << RAY_COUNT) - 1)
    }

    #[inline]
    pub fn single(id: RayId) -> RaySet {
        debug_assert!((1..=RAY_COUNT as u8).contains(&id));
        RaySet(1u128 << (id - 1))
    }

    #[inline]
    pub fn contains(self, id: RayId) -> bool {
        self.0 >> (id - 1) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, id: RayId) {
        self.0 |= 1u128 << (id - 1);
    }

    #[inline]
    pub fn remove(&mut self, id: RayId) {
        self.0 &= !(1u128 << (id - 1));
    }

    #[inline]
    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn union(self, other: RaySet) -> RaySet {
        RaySet(self.0 | other.0)
    }

    #[inline]
    pub fn intersection(self, other: RaySet) -> RaySet {
        RaySet(self.0 & other.0)
    }

    #[inline]
    pub fn difference(self, other: RaySet) -> RaySet {
        RaySet(self.0 & !other.0)
    }

    #[inline]
    pub fn is_subset(self, other: RaySet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Smallest ray id in the set.
    #[inline]
    pub fn first(self) -> Option<RayId> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as RayId + 1)
    }

    pub fn iter(self) -> RaySetIter {
        RaySetIter(self.0)
    }
}

impl FromIterator<RayId> for RaySet {
    fn from_iter<I: IntoIterator<Item = RayId>>(iter: I) -> Self {
        let mut s = RaySet::EMPTY;
        for id in iter {
            s.insert(id);
        }
        s
    }
}

impl<'a> FromIterator<&'a RayId> for RaySet {
    fn from_iter<I: IntoIterator<Item = &'a RayId>>(iter: I) -> Self {
        iter.into_iter().copied().collect()
    }
}

pub struct RaySetIter(u128);

impl Iterator for RaySetIter {
    type Item = RayId;

    #[inline]
    fn next(&mut self) -> Option<RayId> {
        if self.0 == 0 {
            return None;
        }
        let tz = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(tz as RayId + 1)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl IntoIterator for RaySet {
    type Item = RayId;
    type IntoIter = RaySetIter;
    fn into_iter(self) -> RaySetIter {
        self.iter()
    }
}

impl fmt::Debug for RaySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iteration_is_ascending() {
        let s: RaySet = [120u8, 1, 64, 65].into_iter().collect();
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![1, 64, 65, 120]);
        assert_eq!(s.len(), 4);
        assert_eq!(s.first(), Some(1));
    }

    #[test]
    fn range_check() {
        assert!(check_ray(0).is_err());
        assert!(check_ray(121).is_err());
        assert_eq!(check_ray(120).unwrap(), 120);
    }
}
