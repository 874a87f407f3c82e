//! Signed dyadic codes: the embedding of `Z` into `{0,1} × {0,1}^N`.
//!
//! `k ≥ 0` maps to `(0; bits of k)` and `k < 0` to `(1; bits of −(k+1))`, least
//! significant bit first, so `−1` is `(1; 0, 0, …)`.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Canonical signed dyadic code: sign slot plus digits with trailing zeros trimmed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SignedDyadicCode {
    pub sign_slot: bool,
    digits: Vec<bool>,
}

impl SignedDyadicCode {
    /// Build from raw digits (least significant first), trimming trailing zeros.
    pub fn new(sign_slot: bool, mut digits: Vec<bool>) -> Self {
        while digits.last() == Some(&false) {
            digits.pop();
        }
        Self { sign_slot, digits }
    }

    pub fn digits(&self) -> &[bool] {
        &self.digits
    }

    /// `ω_i` for `i ≥ 1`; `ω_0` is the sign slot.
    pub fn omega(&self, i: usize) -> bool {
        if i == 0 {
            self.sign_slot
        } else {
            self.digits.get(i - 1).copied().unwrap_or(false)
        }
    }
}

impl fmt::Display for SignedDyadicCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({};", u8::from(self.sign_slot))?;
        for (i, d) in self.digits.iter().enumerate() {
            let sep = if i == 0 { " " } else { "," };
            write!(f, "{sep}{}", u8::from(*d))?;
        }
        write!(f, ")")
    }
}

/// Magnitude encoded by the digits: `k` for `k ≥ 0`, `−(k+1)` for `k < 0`.
fn magnitude(k: i64) -> u64 {
    if k >= 0 {
        k as u64
    } else {
        !(k as u64)
    }
}

pub fn encode(k: i64) -> SignedDyadicCode {
    let mut m = magnitude(k);
    let mut digits = Vec::with_capacity(64);
    while m != 0 {
        digits.push(m & 1 == 1);
        m >>= 1;
    }
    SignedDyadicCode {
        sign_slot: k < 0,
        digits,
    }
}

/// Left inverse of [`encode`]. Codes longer than 63 digits overflow.
pub fn decode(code: &SignedDyadicCode) -> Result<i64> {
    let mut m: u64 = 0;
    for (i, &d) in code.digits.iter().enumerate() {
        if d {
            if i >= 63 {
                return Err(Error::Overflow);
            }
            m |= 1 << i;
        }
    }
    let m = m as i64;
    Ok(if code.sign_slot { -m - 1 } else { m })
}

/// Largest `i ≥ 1` with `ω_i(k) = 1`, or 0 for `k ∈ {0, −1}`.
///
/// `msb_index(k) ≤ N` exactly when `−2^N ≤ k < 2^N`.
pub fn msb_index(k: i64) -> u32 {
    64 - magnitude(k).leading_zeros()
}

/// Same as [`msb_index`] for wide integers.
pub fn msb_index_wide(k: i128) -> u32 {
    let m = if k >= 0 { k as u128 } else { !(k as u128) };
    128 - m.leading_zeros()
}

/// The level-`N` cylinder `{ω : ω_i = ω_i(k), 0 ≤ i ≤ N}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CylinderIndex {
    pub level: u32,
    pub code: SignedDyadicCode,
}

impl CylinderIndex {
    pub fn of(k: i64, level: u32) -> Self {
        let full = encode(k);
        let keep = (level as usize).min(full.digits.len());
        Self {
            level,
            code: SignedDyadicCode::new(full.sign_slot, full.digits[..keep].to_vec()),
        }
    }

    pub fn contains(&self, k: i64) -> bool {
        let c = encode(k);
        if c.sign_slot != self.code.sign_slot {
            return false;
        }
        (1..=self.level as usize).all(|i| c.omega(i) == self.code.omega(i))
    }

    /// The unique integer in `[−2^N, 2^N)` lying in this cylinder.
    pub fn representative(&self) -> Result<i64> {
        decode(&self.code)
    }
}
