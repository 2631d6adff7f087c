//! Occupation-number basis states.
//!
//! Basis states are labeled by their occupied-mode set; the reference phase
//! is fixed by applying creation operators in ascending global mode index.
//! Every determinant and Pfaffian sign in the crate is pinned to this
//! convention.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockState {
    num_modes: usize,
    occ: Vec<bool>,
}

impl FockState {
    /// Build from an occupied-mode list (order irrelevant, duplicates rejected).
    pub fn new(num_modes: usize, occupied: &[usize]) -> Result<Self> {
        let mut occ = vec![false; num_modes];
        for &m in occupied {
            if m >= num_modes {
                return Err(Error::validation(format!(
                    "mode {m} out of range for {num_modes} modes"
                )));
            }
            if occ[m] {
                return Err(Error::validation(format!("mode {m} listed twice")));
            }
            occ[m] = true;
        }
        Ok(FockState { num_modes, occ })
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        FockState {
            num_modes: bits.len(),
            occ: bits.to_vec(),
        }
    }

    /// Parse "1100"-style occupation strings, mode 0 first.
    pub fn from_bitstring(s: &str) -> Result<Self> {
        let mut occ = Vec::with_capacity(s.len());
        for ch in s.chars() {
            match ch {
                '0' => occ.push(false),
                '1' => occ.push(true),
                _ => {
                    return Err(Error::validation(format!(
                        "invalid occupation character {ch:?} (expected 0/1)"
                    )))
                }
            }
        }
        Ok(FockState {
            num_modes: occ.len(),
            occ,
        })
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn particle_number(&self) -> usize {
        self.occ.iter().filter(|&&b| b).count()
    }

    pub fn is_occupied(&self, mode: usize) -> bool {
        self.occ[mode]
    }

    /// Occupied modes in ascending order.
    pub fn occupied_modes(&self) -> Vec<usize> {
        (0..self.num_modes).filter(|&m| self.occ[m]).collect()
    }

    /// Statevector index with mode i on bit i.
    pub fn index(&self) -> usize {
        let mut idx = 0usize;
        for m in 0..self.num_modes {
            if self.occ[m] {
                idx |= 1usize << m;
            }
        }
        idx
    }
}
