//! Binary floating point with a user-chosen mantissa width, built on `BigInt`.
//!
//! A value is `mant · 2^exp` with `|mant| < 2^prec` and `mant` odd (or zero). Every
//! operation rounds to nearest at the precision of its left operand.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{Float, One, Signed, ToPrimitive, Zero};

use crate::error::{LabError, Result};

#[derive(Clone, PartialEq, Eq)]
pub struct BigFloat {
    mant: BigInt,
    exp: i64,
    prec: u32,
}

impl fmt::Debug for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BigFloat({}, prec={})", self.to_sci_string(20), self.prec)
    }
}

fn round_mag(mag: BigUint, exp: i64, prec: u32) -> (BigUint, i64) {
    let bits = mag.bits();
    if bits <= prec as u64 {
        return (mag, exp);
    }
    let sh = bits - prec as u64;
    let half = BigUint::one() << (sh - 1);
    let rounded: BigUint = (mag + half) >> sh;
    if rounded.bits() > prec as u64 {
        (rounded >> 1u32, exp + sh as i64 + 1)
    } else {
        (rounded, exp + sh as i64)
    }
}

/// `x · 2^e` without intermediate overflow or underflow.
pub fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}

impl BigFloat {
    pub fn from_parts(mant: BigInt, exp: i64, prec: u32) -> Self {
        assert!(prec >= 2, "precision must be at least 2 bits");
        if mant.is_zero() {
            return Self::zero(prec);
        }
        let neg = mant.is_negative();
        let (mut mag, mut exp) = round_mag(mant.into_parts().1, exp, prec);
        // odd mantissa keeps the representation unique
        let tz = mag.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            mag >>= tz;
            exp += tz as i64;
        }
        let sign = if neg { Sign::Minus } else { Sign::Plus };
        Self { mant: BigInt::from_biguint(sign, mag), exp, prec }
    }

    pub fn zero(prec: u32) -> Self {
        Self { mant: BigInt::zero(), exp: 0, prec }
    }

    pub fn one(prec: u32) -> Self {
        Self::from_parts(BigInt::one(), 0, prec)
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        Self::from_parts(BigInt::from(v), 0, prec)
    }

    /// Exact conversion (rounded only when `prec < 53`).
    pub fn from_f64(x: f64, prec: u32) -> Result<Self> {
        if !x.is_finite() {
            return Err(LabError::Domain(format!("cannot represent {x}")));
        }
        let (m, e, s) = x.integer_decode();
        let mant = BigInt::from(m) * i64::from(s);
        Ok(Self::from_parts(mant, e as i64, prec))
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        Self::from_parts(self.mant.clone(), self.exp, prec)
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn neg(&self) -> Self {
        Self { mant: -&self.mant, exp: self.exp, prec: self.prec }
    }

    pub fn abs(&self) -> Self {
        Self { mant: self.mant.abs(), exp: self.exp, prec: self.prec }
    }

    /// Position one past the top bit: `|self| < 2^top`.
    fn top(&self) -> i64 {
        self.exp + self.mant.bits() as i64
    }

    pub fn add(&self, other: &Self) -> Self {
        if other.is_zero() {
            return self.with_prec(self.prec);
        }
        if self.is_zero() {
            return other.with_prec(self.prec);
        }
        let guard = self.prec as i64 + 2;
        if self.top() - other.top() > guard {
            return self.with_prec(self.prec);
        }
        if other.top() - self.top() > guard {
            return other.with_prec(self.prec);
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as usize;
        let b = &other.mant << (other.exp - e) as usize;
        Self::from_parts(a + b, e, self.prec)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::from_parts(&self.mant * &other.mant, self.exp + other.exp, self.prec)
    }

    /// Product with an `f64`, rounded once.
    pub fn mul_f64(&self, x: f64) -> Self {
        debug_assert!(x.is_finite());
        if x == 0.0 || self.is_zero() {
            return Self::zero(self.prec);
        }
        let (m, e, s) = x.integer_decode();
        let mut mant = &self.mant * m;
        if s < 0 {
            mant = -mant;
        }
        Self::from_parts(mant, self.exp + e as i64, self.prec)
    }

    pub fn div_u64(&self, d: u64) -> Self {
        assert!(d != 0, "division by zero");
        let sh = (self.prec as u64 + 64 + 64).saturating_sub(self.mant.bits()) as usize;
        let q = (&self.mant << sh) / BigInt::from(d);
        Self::from_parts(q, self.exp - sh as i64, self.prec)
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        if other.is_zero() {
            return Err(LabError::Domain("division by zero".into()));
        }
        let want = self.prec as u64 + other.mant.bits() + 64;
        let sh = want.saturating_sub(self.mant.bits()) as usize;
        let q = (&self.mant << sh) / &other.mant;
        Ok(Self::from_parts(q, self.exp - sh as i64 - other.exp, self.prec))
    }

    pub fn sqrt(&self) -> Result<Self> {
        if self.is_negative() {
            return Err(LabError::Domain("square root of a negative number".into()));
        }
        if self.is_zero() {
            return Ok(self.clone());
        }
        // make the exponent even and leave 2·prec + 64 bits under the root
        let mut sh = (2 * self.prec as u64 + 64).saturating_sub(self.mant.bits()) as i64;
        if (self.exp - sh).rem_euclid(2) != 0 {
            sh += 1;
        }
        let r = (&self.mant << sh as usize).sqrt();
        Ok(Self::from_parts(r, (self.exp - sh) / 2, self.prec))
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits();
        let sh = bits.saturating_sub(64);
        let top = (self.mant.magnitude() >> sh).to_u64().expect("64 bits") as f64;
        let v = ldexp(top, self.exp + sh as i64);
        if self.is_negative() {
            -v
        } else {
            v
        }
    }

    /// `log2 |self|` as an `f64`, finite even when `to_f64` would overflow.
    pub fn log2_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let bits = self.mant.bits();
        let sh = bits.saturating_sub(64);
        let top = (self.mant.magnitude() >> sh).to_u64().expect("64 bits") as f64;
        top.log2() + (self.exp + sh as i64) as f64
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn cmp_value(&self, other: &Self) -> Ordering {
        self.sub(other).signum().cmp(&0)
    }

    /// Scientific notation with `digits` significant decimal digits,
    /// e.g. `-1.2500000000e-3`.
    pub fn to_sci_string(&self, digits: usize) -> String {
        let digits = digits.max(1);
        if self.is_zero() {
            return "0".into();
        }
        let neg = self.is_negative();
        let mag = self.mant.magnitude().clone();
        // decimal exponent estimate, corrected below
        let mut e10 = (self.log2_abs() * std::f64::consts::LOG10_2).floor() as i64 - digits as i64 + 1;
        let scaled = loop {
            let d = self.scaled_decimal(&mag, e10);
            let len = d.to_string().len();
            if len > digits {
                e10 += (len - digits) as i64;
            } else if len < digits {
                e10 -= (digits - len) as i64;
            } else {
                break d;
            }
        };
        let s = scaled.to_string();
        let exp10 = e10 + digits as i64 - 1;
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        out.push_str(&s[..1]);
        if s.len() > 1 {
            out.push('.');
            out.push_str(&s[1..]);
        }
        out.push_str(&format!("e{exp10}"));
        out
    }

    /// `round(mag · 2^exp / 10^e10)`.
    fn scaled_decimal(&self, mag: &BigUint, e10: i64) -> BigUint {
        let mut num = mag.clone();
        let mut den = BigUint::one();
        if self.exp >= 0 {
            num <<= self.exp as usize;
        } else {
            den <<= (-self.exp) as usize;
        }
        let ten = BigUint::from(10u32);
        if e10 >= 0 {
            den *= ten.pow(e10 as u32);
        } else {
            num *= ten.pow((-e10) as u32);
        }
        let (q, r) = num.div_rem(&den);
        if r * 2u32 >= den {
            q + 1u32
        } else {
            q
        }
    }

    /// Parses decimal or scientific notation, rounding to `prec` bits.
    pub fn parse(s: &str, prec: u32) -> Result<Self> {
        let bad = || LabError::Serialization(format!("invalid decimal number `{s}`"));
        let t = s.trim();
        let (neg, t) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        let (body, exp10) = match t.find(['e', 'E']) {
            Some(i) => (&t[..i], t[i + 1..].parse::<i64>().map_err(|_| bad())?),
            None => (t, 0),
        };
        let (int_part, frac_part) = match body.find('.') {
            Some(i) => (&body[..i], &body[i + 1..]),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        let digits = format!("{int_part}{frac_part}");
        if !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let n = BigUint::parse_bytes(digits.as_bytes(), 10).ok_or_else(bad)?;
        let e10 = exp10 - frac_part.len() as i64;
        let ten = BigUint::from(10u32);
        let value = if e10 >= 0 {
            Self::from_parts(BigInt::from(n * ten.pow(e10 as u32)), 0, prec)
        } else {
            let den = ten.pow((-e10) as u32);
            let sh = (prec as u64 + den.bits() + 64).saturating_sub(n.bits()) as usize;
            let (q, r) = (n << sh).div_rem(&den);
            let q = if r * 2u32 >= den { q + 1u32 } else { q };
            Self::from_parts(BigInt::from(q), -(sh as i64), prec)
        };
        Ok(if neg { value.neg() } else { value })
    }
}

fn atan_inv(x: u64, bits: usize) -> BigInt {
    // Σ (−1)^k / ((2k+1) x^{2k+1}) scaled by 2^bits
    let x2 = BigInt::from(x) * x;
    let mut term = (BigInt::one() << bits) / x;
    let mut sum = BigInt::zero();
    let mut k: u64 = 0;
    while !term.is_zero() {
        let t = &term / (2 * k + 1);
        if k % 2 == 0 {
            sum += t;
        } else {
            sum -= t;
        }
        term /= &x2;
        k += 1;
    }
    sum
}

/// π rounded to `prec` bits.
pub fn pi(prec: u32) -> BigFloat {
    let bits = prec as usize + 64;
    let fixed = (atan_inv(5, bits) * 16) - (atan_inv(239, bits) * 4);
    BigFloat::from_parts(fixed, -(bits as i64), prec)
}

/// `1/√π` rounded to `prec` bits.
pub fn inv_sqrt_pi(prec: u32) -> BigFloat {
    let work = prec + 32;
    let root = pi(work).sqrt().expect("pi > 0");
    BigFloat::one(work).div(&root).expect("nonzero").with_prec(prec)
}
