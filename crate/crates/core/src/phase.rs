//! Exact rational frequencies.
//!
//! Points such as `ξ = 1/3` sit on the exceptional orbits of some filters, and a
//! binary approximation of them drifts off the orbit after a few halvings. A
//! [`Phase`] keeps `ξ` as a reduced fraction so the orbit points `(ξ + k)/2^j`
//! are formed exactly and rounded once.

use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::numeric::center;

/// Largest denominator a [`Phase`] may carry.
pub const MAX_DEN: i128 = 1 << 62;

/// A centered point `t ∈ [−½,½)` on an orbit, carried exactly while the
/// numerator and denominator fit in `i128`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitPoint {
    exact: Option<(i128, i128)>,
    approx: f64,
}

impl OrbitPoint {
    /// Exact `num/den` with `den > 0`, assumed already centered.
    pub fn exact(num: i128, den: i128) -> Self {
        Self {
            exact: Some((num, den)),
            approx: num as f64 / den as f64,
        }
    }

    /// Exact `num/den` together with a caller-supplied approximation.
    pub fn exact_with_value(num: i128, den: i128, approx: f64) -> Self {
        Self {
            exact: Some((num, den)),
            approx,
        }
    }

    /// A point known only through its rounded value.
    pub fn approx(t: f64) -> Self {
        Self {
            exact: None,
            approx: t,
        }
    }

    /// The value in double precision (within two ulps).
    pub fn value(&self) -> f64 {
        self.approx
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// `t − p/q` with full relative precision when `t` is exact; exactly zero
    /// only when `t = p/q`.
    pub fn offset_from(&self, p: i64, q: i64) -> f64 {
        if let Some((n, d)) = self.exact {
            let p = p as i128;
            let q = q as i128;
            let num = n.checked_mul(q).zip(p.checked_mul(d)).and_then(|(a, b)| a.checked_sub(b));
            let den = d.checked_mul(q);
            if let (Some(num), Some(den)) = (num, den) {
                return num as f64 / den as f64;
            }
        }
        self.approx - p as f64 / q as f64
    }

    /// `t/2`.
    pub fn half(&self) -> Self {
        let exact = self
            .exact
            .and_then(|(n, d)| d.checked_mul(2).map(|d2| (n, d2)));
        Self {
            exact,
            approx: self.approx * 0.5,
        }
    }

    /// Centered residue of `−t`.
    pub fn neg(&self) -> Self {
        match self.exact {
            Some((n, d)) if 2 * n == -d => *self,
            Some((n, d)) => Self {
                exact: Some((-n, d)),
                approx: -self.approx,
            },
            None => Self::approx(center(-self.approx)),
        }
    }

    /// Sign of `t`: −1, 0 or 1.
    pub fn signum(&self) -> i32 {
        match self.exact {
            Some((n, _)) => n.signum() as i32,
            None if self.approx > 0.0 => 1,
            None if self.approx < 0.0 => -1,
            None => 0,
        }
    }
}

/// A rational number `num/den` in lowest terms with `den > 0`.
///
/// Constructors reduce modulo one into `[0,1)`; [`Phase::one_minus`] is the only
/// way to obtain the value `1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phase {
    num: i128,
    den: i128,
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Phase {
    pub const ZERO: Phase = Phase { num: 0, den: 1 };

    /// `num/den` reduced modulo one.
    pub fn new(num: i128, den: i128) -> Result<Self> {
        if den == 0 {
            return Err(Error::ZeroDenominator);
        }
        let (mut num, mut den) = if den < 0 { (-num, -den) } else { (num, den) };
        let g = gcd(num, den).max(1);
        num /= g;
        den /= g;
        if den > MAX_DEN {
            return Err(Error::Overflow);
        }
        num = num.rem_euclid(den);
        Ok(Self { num, den })
    }

    /// Exact value of a finite double, reduced modulo one.
    ///
    /// Values needing a denominator above `2^62` are rounded to the nearest
    /// multiple of `2^−62`.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::NonFinite(x));
        }
        let f = crate::numeric::frac(x);
        if f == 0.0 {
            return Ok(Self::ZERO);
        }
        // f in (0,1): scale by 2^62 and split into integer and remainder.
        let scaled = f * (MAX_DEN as f64);
        let whole = libm::trunc(scaled);
        if whole == scaled {
            return Self::new(whole as i128, MAX_DEN);
        }
        let rounded = libm::round(scaled) as i128;
        Self::new(rounded, MAX_DEN)
    }

    pub fn num(&self) -> i128 {
        self.num
    }

    pub fn den(&self) -> i128 {
        self.den
    }

    pub fn value(&self) -> f64 {
        ratio_to_f64(self.num, self.den)
    }

    /// `1 − ξ`, kept in `(0,1]` without reducing.
    pub fn one_minus(&self) -> Self {
        Self {
            num: self.den - self.num,
            den: self.den,
        }
    }

    /// Centered residue in `[−½,½)` of `(ξ + k)/2^j`.
    pub fn orbit_point(&self, k: i128, j: u32) -> f64 {
        self.orbit_f64(k, j, false)
    }

    /// Centered residue in `[−½,½)` of `−(ξ + k)/2^j`.
    pub fn reflected_orbit_point(&self, k: i128, j: u32) -> f64 {
        self.orbit_f64(k, j, true)
    }

    /// Exact centered residue of `(ξ + k)/2^j`.
    pub fn orbit(&self, k: i128, j: u32) -> OrbitPoint {
        self.orbit_exact(k, j, false)
    }

    /// Exact centered residue of `−(ξ + k)/2^j`.
    pub fn reflected_orbit(&self, k: i128, j: u32) -> OrbitPoint {
        self.orbit_exact(k, j, true)
    }

    fn orbit_exact(&self, k: i128, j: u32, negate: bool) -> OrbitPoint {
        let a = k.checked_mul(self.den).and_then(|kd| kd.checked_add(self.num));
        let d = if j < 127 {
            self.den.checked_mul(1i128 << j).filter(|d| *d > 0)
        } else {
            None
        };
        match (a, d) {
            (Some(a), Some(d)) => {
                let a = if negate { -a } else { a };
                let mut r = a.rem_euclid(d);
                if 2 * r >= d {
                    r -= d;
                }
                OrbitPoint::exact(r, d)
            }
            _ => OrbitPoint::approx(self.orbit_f64(k, j, negate)),
        }
    }

    fn orbit_f64(&self, k: i128, j: u32, negate: bool) -> f64 {
        let a = k.checked_mul(self.den).and_then(|kd| kd.checked_add(self.num));
        let d = if j < 127 {
            self.den.checked_mul(1i128 << j).filter(|d| *d > 0)
        } else {
            None
        };
        match (a, d) {
            (Some(a), Some(d)) => {
                let a = if negate { -a } else { a };
                let mut r = a.rem_euclid(d);
                if 2 * r >= d {
                    r -= d;
                }
                ratio_to_f64(r, d)
            }
            _ => {
                let v = (self.num as f64) / (self.den as f64) + (k as f64);
                let v = libm::scalbn(v, -(j.min(2000) as i32));
                center(if negate { -v } else { v })
            }
        }
    }
}

/// Correctly rounded quotient when the reduced terms fit in 53 bits.
fn ratio_to_f64(num: i128, den: i128) -> f64 {
    const EXACT: i128 = 1 << 53;
    if num.abs() <= EXACT && den <= EXACT {
        return num as f64 / den as f64;
    }
    let g = orbit_gcd(num, den);
    (num / g) as f64 / (den / g) as f64
}

/// `gcd(a, d)` for `d > 0`, fast when the odd part of `d` fits in 64 bits.
fn orbit_gcd(a: i128, d: i128) -> i128 {
    if a == 0 {
        return d;
    }
    let t = a.trailing_zeros().min(d.trailing_zeros());
    let (a, d) = (a >> t, d >> t);
    let odd = d >> d.trailing_zeros();
    let g = if odd <= u64::MAX as i128 {
        let odd = odd as u64;
        let mut x = (a.unsigned_abs() % odd as u128) as u64;
        let mut y = odd;
        while x != 0 {
            let r = y % x;
            y = x;
            x = r;
        }
        y as i128
    } else {
        gcd(a, odd)
    };
    g << t
}

impl Phase {
    /// `(x, x − 1)` for `x = (ξ + r)/2^m mod 1 ∈ [0,1)`, exact.
    ///
    /// Returns `None` if the numerator or denominator overflows. The first
    /// component is not centered when `x ≥ ½`; it is only ever halved.
    pub fn orbit_pair(&self, r: i128, m: u32) -> Option<(OrbitPoint, OrbitPoint)> {
        let a = r.checked_mul(self.den)?.checked_add(self.num)?;
        let d = if m < 127 {
            self.den.checked_mul(1i128 << m).filter(|d| *d > 0)?
        } else {
            return None;
        };
        let x = a.rem_euclid(d);
        Some((OrbitPoint::exact(x, d), OrbitPoint::exact(x - d, d)))
    }

    /// Bits needed by the denominator.
    pub fn den_bits(&self) -> u32 {
        128 - self.den.leading_zeros()
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 || self.num == 0 {
            write!(f, "{}", self.num / self.den)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Phase {
    type Err = Error;

    /// Accepts `p/q`, plain decimals such as `0.3` (read exactly), or any
    /// floating-point literal.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidParameter(alloc::format!("cannot parse frequency {s:?}"));
        if let Some((p, q)) = s.split_once('/') {
            let p: i128 = p.trim().parse().map_err(|_| bad())?;
            let q: i128 = q.trim().parse().map_err(|_| bad())?;
            return Self::new(p, q);
        }
        if let Some(exact) = parse_decimal(s) {
            return exact;
        }
        let x: f64 = s.parse().map_err(|_| bad())?;
        Self::from_f64(x)
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for Phase {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for Phase {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let s = <alloc::string::String as serde::Deserialize>::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `j/n` for `j = 0..n`.
pub fn uniform_grid(n: usize) -> Result<alloc::vec::Vec<Phase>> {
    if n == 0 {
        return Err(Error::InvalidParameter("grid must have at least one point".into()));
    }
    (0..n).map(|j| Phase::new(j as i128, n as i128)).collect()
}

fn parse_decimal(s: &str) -> Option<Result<Phase>> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, fracp) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && fracp.is_empty() {
        return None;
    }
    if !int.bytes().all(|b| b.is_ascii_digit()) || !fracp.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if fracp.len() > 18 || int.len() > 18 {
        return None;
    }
    let int_v: i128 = if int.is_empty() { 0 } else { int.parse().ok()? };
    let frac_v: i128 = if fracp.is_empty() { 0 } else { fracp.parse().ok()? };
    let den = 10i128.pow(fracp.len() as u32);
    let num = int_v * den + frac_v;
    Some(Phase::new(if neg { -num } else { num }, den))
}
