//! Feature masks: the GA individual.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use rand::Rng;

use crate::error::GaError;

/// A candidate feature subset over `K` features.
///
/// Bit `i` set means feature `i` is included. Masks are value types: two
/// masks compare equal iff their bit strings are identical, and ordering is
/// lexicographic (bit 0 most significant), which is the order used to break
/// survivor ties.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeatureMask {
    bits: Vec<bool>,
}

impl FeatureMask {
    /// Mask with no features selected.
    pub fn zeros(len: usize) -> Self {
        Self {
            bits: vec![false; len],
        }
    }

    /// Mask with every feature selected.
    pub fn ones(len: usize) -> Self {
        Self {
            bits: vec![true; len],
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// Mask with each bit set independently with probability `p`.
    pub fn random<R: Rng + ?Sized>(len: usize, p: f64, rng: &mut R) -> Self {
        Self {
            bits: (0..len).map(|_| rng.gen::<f64>() < p).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.bits[i] = value;
    }

    pub fn flip(&mut self, i: usize) {
        self.bits[i] = !self.bits[i];
    }

    /// Number of selected features.
    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Indices of selected features, ascending.
    pub fn selected(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
    }

    /// Number of differing bits between two equal-length masks.
    pub fn hamming(&self, other: &Self) -> Result<usize, GaError> {
        if self.len() != other.len() {
            return Err(GaError::MaskLengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(self
            .bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count())
    }

    /// Positions where the two masks disagree, ascending.
    pub fn differing_positions(&self, other: &Self) -> Result<Vec<usize>, GaError> {
        if self.len() != other.len() {
            return Err(GaError::MaskLengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok((0..self.len())
            .filter(|&i| self.bits[i] != other.bits[i])
            .collect())
    }
}

impl fmt::Display for FeatureMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}
