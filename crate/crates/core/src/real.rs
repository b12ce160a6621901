//! Real-number backends: hardware `f64` and a software float with a
//! per-value mantissa width.

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

pub trait Real:
    Clone
    + fmt::Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
    + for<'a> MulAssign<&'a Self>
{
    fn from_f64(x: f64, bits: u32) -> Self;
    fn from_i64(x: i64, bits: u32) -> Self;
    fn to_f64(&self) -> f64;
    /// Mantissa width carried by this value.
    fn bits(&self) -> u32;
    fn sqrt(&self) -> Self;
    fn abs(&self) -> Self;
    /// Nearest integer, ties away from zero.
    fn round(&self) -> Self;
    /// `(cos, sin)` of `2πk/m`.
    fn unit_root(k: u64, m: u64, bits: u32) -> (Self, Self);

    fn zero(bits: u32) -> Self {
        Self::from_i64(0, bits)
    }
    fn one(bits: u32) -> Self {
        Self::from_i64(1, bits)
    }
    fn is_zero(&self) -> bool {
        self.to_f64() == 0.0
    }
    /// Rounded value as an integer; `None` if out of range.
    fn to_i64(&self) -> Option<i64> {
        let r = self.round().to_f64();
        if r.is_finite() && r.abs() < 9.0e18 {
            Some(r as i64)
        } else {
            None
        }
    }
    /// Unit roundoff `2^{-bits}`.
    fn eps(&self) -> f64 {
        (-(self.bits() as f64)).exp2()
    }
}

impl Real for f64 {
    fn from_f64(x: f64, _: u32) -> Self {
        x
    }
    fn from_i64(x: i64, _: u32) -> Self {
        x as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn bits(&self) -> u32 {
        53
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn round(&self) -> Self {
        f64::round(*self)
    }
    fn unit_root(k: u64, m: u64, _: u32) -> (Self, Self) {
        // reduce to the first octant-friendly argument for accuracy
        let k = k % m;
        let t = std::f64::consts::TAU * (k as f64) / (m as f64);
        (t.cos(), t.sin())
    }
}

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants"));
}

/// Software binary float. Results of binary operations carry the larger of
/// the two operand precisions.
#[derive(Clone)]
pub struct MpFloat {
    v: BigFloat,
    p: u32,
}

impl MpFloat {
    pub fn new(v: BigFloat, p: u32) -> Self {
        MpFloat { v, p }
    }
    pub fn inner(&self) -> &BigFloat {
        &self.v
    }
}

impl fmt::Debug for MpFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.v)
    }
}

impl PartialEq for MpFloat {
    fn eq(&self, o: &Self) -> bool {
        self.v == o.v
    }
}

impl PartialOrd for MpFloat {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        self.v.partial_cmp(&o.v)
    }
}

macro_rules! mp_binop {
    ($tr:ident, $f:ident, $tra:ident, $fa:ident) => {
        impl $tr for MpFloat {
            type Output = MpFloat;
            fn $f(self, o: MpFloat) -> MpFloat {
                let p = self.p.max(o.p);
                MpFloat { v: self.v.$f(&o.v, p as usize, RM), p }
            }
        }
        impl<'a> $tr<&'a MpFloat> for MpFloat {
            type Output = MpFloat;
            fn $f(self, o: &'a MpFloat) -> MpFloat {
                let p = self.p.max(o.p);
                MpFloat { v: self.v.$f(&o.v, p as usize, RM), p }
            }
        }
        impl<'a> $tr<&'a MpFloat> for &'a MpFloat {
            type Output = MpFloat;
            fn $f(self, o: &'a MpFloat) -> MpFloat {
                let p = self.p.max(o.p);
                MpFloat { v: self.v.$f(&o.v, p as usize, RM), p }
            }
        }
        impl<'a> $tra<&'a MpFloat> for MpFloat {
            fn $fa(&mut self, o: &'a MpFloat) {
                self.p = self.p.max(o.p);
                self.v = self.v.$f(&o.v, self.p as usize, RM);
            }
        }
    };
}

mp_binop!(Add, add, AddAssign, add_assign);
mp_binop!(Sub, sub, SubAssign, sub_assign);
mp_binop!(Mul, mul, MulAssign, mul_assign);

impl Div for MpFloat {
    type Output = MpFloat;
    fn div(self, o: MpFloat) -> MpFloat {
        let p = self.p.max(o.p);
        MpFloat { v: self.v.div(&o.v, p as usize, RM), p }
    }
}

impl<'a> Div<&'a MpFloat> for MpFloat {
    type Output = MpFloat;
    fn div(self, o: &'a MpFloat) -> MpFloat {
        let p = self.p.max(o.p);
        MpFloat { v: self.v.div(&o.v, p as usize, RM), p }
    }
}

impl Neg for MpFloat {
    type Output = MpFloat;
    fn neg(self) -> MpFloat {
        MpFloat { v: self.v.neg(), p: self.p }
    }
}

impl Real for MpFloat {
    fn from_f64(x: f64, bits: u32) -> Self {
        MpFloat { v: BigFloat::from_f64(x, bits as usize), p: bits }
    }
    fn from_i64(x: i64, bits: u32) -> Self {
        MpFloat { v: BigFloat::from_i64(x, bits as usize), p: bits }
    }
    fn to_f64(&self) -> f64 {
        if self.v.is_zero() {
            return 0.0;
        }
        if self.v.is_nan() {
            return f64::NAN;
        }
        let (Some(words), Some(e)) = (self.v.mantissa_digits(), self.v.exponent()) else {
            return if self.v.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY };
        };
        // words are least significant first; value = 0.m * 2^e
        let n = words.len();
        let hi = words[n - 1] as f64;
        let lo = if n > 1 { words[n - 2] as f64 } else { 0.0 };
        let mant = (hi + lo * (-64f64).exp2()) * (-64f64).exp2();
        let mag = if !(-1000..=1000).contains(&e) {
            mant * (e as f64).exp2()
        } else {
            mant * 2f64.powi(e)
        };
        if self.v.sign() == Some(Sign::Neg) {
            -mag
        } else {
            mag
        }
    }
    fn bits(&self) -> u32 {
        self.p
    }
    fn sqrt(&self) -> Self {
        MpFloat { v: self.v.sqrt(self.p as usize, RM), p: self.p }
    }
    fn abs(&self) -> Self {
        MpFloat { v: self.v.abs(), p: self.p }
    }
    fn round(&self) -> Self {
        let half = BigFloat::from_f64(0.5, self.p as usize);
        let v = if self.v.is_negative() {
            self.v.sub(&half, self.p as usize, RM).ceil()
        } else {
            self.v.add(&half, self.p as usize, RM).floor()
        };
        MpFloat { v, p: self.p }
    }
    fn unit_root(k: u64, m: u64, bits: u32) -> (Self, Self) {
        let k = k % m;
        // guard bits absorb the argument reduction error
        let wp = bits as usize + 64;
        CONSTS.with(|cc| {
            let mut cc = cc.borrow_mut();
            let two_pi = cc.pi(wp, RM).mul(&BigFloat::from_u64(2, wp), wp, RM);
            let t = two_pi
                .mul(&BigFloat::from_u64(k, wp), wp, RM)
                .div(&BigFloat::from_u64(m, wp), wp, RM);
            let mut c = t.cos(wp, RM, &mut cc);
            let mut s = t.sin(wp, RM, &mut cc);
            let _ = c.set_precision(bits as usize, RM);
            let _ = s.set_precision(bits as usize, RM);
            (MpFloat { v: c, p: bits }, MpFloat { v: s, p: bits })
        })
    }
}

/// Mantissa width used for geometry on an `n`-dimensional lattice.
/// `RLWE_FORGE_PRECISION` overrides the size-based default.
pub fn default_precision_bits(n: usize) -> u32 {
    if let Some(bits) = std::env::var("RLWE_FORGE_PRECISION")
        .ok()
        .and_then(|s| s.trim().parse::<u32>().ok())
    {
        return bits.max(53);
    }
    if n <= 60 {
        100
    } else if n <= 150 {
        200
    } else {
        53
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mp_to_f64_roundtrip() {
        for x in [0.1, 3.0, -2.5, 1e-30, 1e300, -7.25e-200, 123456789.0] {
            let y = MpFloat::from_f64(x, 128).to_f64();
            assert_eq!(x, y, "{x}");
        }
    }

    #[test]
    fn mp_unit_root_is_on_circle() {
        let bits = 200;
        let (c, s) = MpFloat::unit_root(7, 3003, bits);
        let r = c.clone() * &c + s.clone() * &s - MpFloat::one(bits);
        assert!(r.abs().to_f64() < 1e-55);
        let t = std::f64::consts::TAU * 7.0 / 3003.0;
        assert!((c.to_f64() - t.cos()).abs() < 1e-15);
        assert!((s.to_f64() - t.sin()).abs() < 1e-15);
    }

    #[test]
    fn mp_round_ties_away() {
        let r = |x: f64| MpFloat::from_f64(x, 100).round().to_f64();
        assert_eq!(r(2.5), 3.0);
        assert_eq!(r(-2.5), -3.0);
        assert_eq!(r(-2.4), -2.0);
        assert_eq!(r(0.49), 0.0);
    }

    #[test]
    fn precision_propagates_max() {
        let a = MpFloat::from_f64(1.0, 64);
        let b = MpFloat::from_f64(3.0, 256);
        assert_eq!((a / b).bits(), 256);
    }

    proptest! {
        #[test]
        fn mp_matches_f64_arithmetic(x in -1e6f64..1e6, y in 1e-3f64..1e6) {
            let (a, b) = (MpFloat::from_f64(x, 120), MpFloat::from_f64(y, 120));
            let tol = 1e-12 * (x.abs() + y.abs() + 1.0);
            prop_assert!(((a.clone() + &b).to_f64() - (x + y)).abs() < tol);
            prop_assert!(((a.clone() * &b).to_f64() - x * y).abs() < tol * y.max(1.0));
            prop_assert!(((a.clone() / &b).to_f64() - x / y).abs() < 1e-9 * (x / y).abs().max(1.0));
            prop_assert!((b.sqrt().to_f64() - y.sqrt()).abs() < 1e-12 * y.sqrt().max(1.0));
        }
    }
}
