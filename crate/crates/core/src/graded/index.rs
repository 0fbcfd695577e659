use std::fmt;

use super::GradedError;

/// Largest supported base dimension.
pub const MAX_BASE_DIM: usize = 8;

/// Sorted set of base-coordinate labels `1..=β`, stored as a bitmask.
///
/// Bit `i - 1` set means `db_i` is present. The empty index is form degree 0.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MultiIndex(u8);

impl MultiIndex {
    pub const EMPTY: MultiIndex = MultiIndex(0);

    pub fn from_mask(mask: u8) -> Self {
        MultiIndex(mask)
    }

    pub fn mask(self) -> u8 {
        self.0
    }

    /// Builds the index from labels in arbitrary order, returning the sign of
    /// the permutation that sorts them. Repeated labels are an error since the
    /// corresponding wedge vanishes.
    pub fn from_labels(labels: &[usize], beta: usize) -> Result<(Self, i32), GradedError> {
        let mut mask = 0u8;
        let mut sign = 1;
        for (pos, &l) in labels.iter().enumerate() {
            if l == 0 || l > beta {
                return Err(GradedError::LabelOutOfRange { label: l, beta });
            }
            let bit = 1u8 << (l - 1);
            if mask & bit != 0 {
                return Err(GradedError::RepeatedLabel(l));
            }
            // labels already placed that are larger than l must hop over it
            let larger = labels[..pos].iter().filter(|&&k| k > l).count();
            if larger % 2 == 1 {
                sign = -sign;
            }
            mask |= bit;
        }
        Ok((MultiIndex(mask), sign))
    }

    pub fn single(label: usize) -> Self {
        debug_assert!((1..=MAX_BASE_DIM).contains(&label));
        MultiIndex(1u8 << (label - 1))
    }

    pub fn degree(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn labels(self) -> Vec<usize> {
        (0..8).filter(|i| self.0 & (1 << i) != 0).map(|i| i + 1).collect()
    }

    pub fn contains(self, label: usize) -> bool {
        label >= 1 && label <= 8 && self.0 & (1 << (label - 1)) != 0
    }

    pub fn fits(self, beta: usize) -> bool {
        beta >= 8 || (self.0 as u16) < (1u16 << beta)
    }

    /// Sign and product of `db_I ∧ db_J`; `None` when the indices overlap.
    pub fn wedge(self, other: MultiIndex) -> Option<(MultiIndex, i32)> {
        if self.0 & other.0 != 0 {
            return None;
        }
        // count pairs (i in I, j in J) with i > j
        let mut inversions = 0u32;
        let mut rest = other.0;
        while rest != 0 {
            let j = rest.trailing_zeros();
            let above = self.0 & !((2u16.pow(j + 1) - 1) as u8);
            inversions += above.count_ones();
            rest &= rest - 1;
        }
        let sign = if inversions % 2 == 0 { 1 } else { -1 };
        Some((MultiIndex(self.0 | other.0), sign))
    }

    /// All multi-indices over `β` coordinates, ordered by mask.
    pub fn all(beta: usize) -> impl Iterator<Item = MultiIndex> {
        (0..(1u16 << beta)).map(|m| MultiIndex(m as u8))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.labels().iter().map(|l| format!("db{l}")).collect();
        write!(f, "{}", parts.join("^"))
    }
}
