//! Arbitrary-precision complex values with conservative error tracking.
//!
//! [`ComplexHP`] wraps a pair of MPFR floats plus an `err` field bounding the
//! magnitude of the accumulated rounding error. Phases of the form
//! `exp(2*pi*i*x)` with exact rational `x` are the main constructor used by the
//! evaluation kernels; the rational is reduced mod 1 before any float touches it.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rug::float::Constant;
use rug::ops::CompleteRound;
use rug::Float;

pub const DEFAULT_PREC: u32 = 256;

/// Complex number at a fixed binary precision with an error-magnitude bound.
#[derive(Clone, Debug)]
pub struct ComplexHP {
    pub re: Float,
    pub im: Float,
    /// Upper bound on `|stored - true|`, propagated conservatively.
    pub err: f64,
}

fn ulp_of(x: &Float, prec: u32) -> f64 {
    let m = x.to_f64().abs();
    m * 2f64.powi(-(prec as i32) + 2) + 1e-300
}

impl ComplexHP {
    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn zero(prec: u32) -> Self {
        ComplexHP { re: Float::new(prec), im: Float::new(prec), err: 0.0 }
    }

    pub fn one(prec: u32) -> Self {
        ComplexHP { re: Float::with_val(prec, 1), im: Float::new(prec), err: 0.0 }
    }

    pub fn from_f64(re: f64, im: f64, prec: u32) -> Self {
        ComplexHP { re: Float::with_val(prec, re), im: Float::with_val(prec, im), err: 0.0 }
    }

    pub fn from_floats(re: Float, im: Float) -> Self {
        ComplexHP { re, im, err: 0.0 }
    }

    pub fn i(prec: u32) -> Self {
        ComplexHP { re: Float::new(prec), im: Float::with_val(prec, 1), err: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn add(&self, other: &Self) -> Self {
        let prec = self.prec();
        let re = (&self.re + &other.re).complete(prec);
        let im = (&self.im + &other.im).complete(prec);
        let err = self.err + other.err + ulp_of(&re, prec) + ulp_of(&im, prec);
        ComplexHP { re, im, err }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        ComplexHP {
            re: (-&self.re).complete(self.prec()),
            im: (-&self.im).complete(self.prec()),
            err: self.err,
        }
    }

    pub fn conj(&self) -> Self {
        ComplexHP {
            re: self.re.clone(),
            im: (-&self.im).complete(self.prec()),
            err: self.err,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let prec = self.prec();
        let re = (&self.re * &other.re).complete(prec) - (&self.im * &other.im).complete(prec);
        let im = (&self.re * &other.im).complete(prec) + (&self.im * &other.re).complete(prec);
        let a = self.abs_f64();
        let b = other.abs_f64();
        let err =
            a * other.err + b * self.err + self.err * other.err + ulp_of(&re, prec) * 4.0;
        ComplexHP { re, im, err }
    }

    /// Multiplication by `i^k`.
    pub fn mul_i_pow(&self, k: i64) -> Self {
        let k = k.rem_euclid(4);
        let prec = self.prec();
        let (re, im) = match k {
            0 => (self.re.clone(), self.im.clone()),
            1 => ((-&self.im).complete(prec), self.re.clone()),
            2 => ((-&self.re).complete(prec), (-&self.im).complete(prec)),
            _ => (self.im.clone(), (-&self.re).complete(prec)),
        };
        ComplexHP { re, im, err: self.err }
    }

    pub fn scale_float(&self, f: &Float) -> Self {
        let prec = self.prec();
        let re = (&self.re * f).complete(prec);
        let im = (&self.im * f).complete(prec);
        let err = self.err * f.to_f64().abs() + ulp_of(&re, prec) + ulp_of(&im, prec);
        ComplexHP { re, im, err }
    }

    pub fn scale_rational(&self, r: &BigRational) -> Self {
        let f = rational_to_float(r, self.prec());
        self.scale_float(&f)
    }

    pub fn div(&self, other: &Self) -> Self {
        let prec = self.prec();
        let d = (&other.re * &other.re).complete(prec) + (&other.im * &other.im).complete(prec);
        let re = ((&self.re * &other.re).complete(prec)
            + (&self.im * &other.im).complete(prec))
            / &d;
        let im = ((&self.im * &other.re).complete(prec)
            - (&self.re * &other.im).complete(prec))
            / &d;
        let dm = d.to_f64();
        let err = if dm > 0.0 {
            (self.err + self.abs_f64() / dm.sqrt() * other.err) / dm.sqrt()
                + ulp_of(&re, prec) * 4.0
        } else {
            f64::INFINITY
        };
        ComplexHP { re, im, err }
    }

    pub fn powi(&self, k: i64) -> Self {
        let prec = self.prec();
        if k == 0 {
            return Self::one(prec);
        }
        let mut base = if k > 0 { self.clone() } else { Self::one(prec).div(self) };
        let mut e = k.unsigned_abs();
        let mut acc = Self::one(prec);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn abs(&self) -> Float {
        let prec = self.prec();
        ((&self.re * &self.re).complete(prec) + (&self.im * &self.im).complete(prec)).sqrt()
    }

    pub fn abs_f64(&self) -> f64 {
        self.abs().to_f64()
    }

    /// Argument in radians as f64 (reporting resolution is enough for scans).
    pub fn arg_f64(&self) -> f64 {
        self.im.to_f64().atan2(self.re.to_f64())
    }

    pub fn dist(&self, other: &Self) -> f64 {
        let prec = self.prec();
        let dr = (&self.re - &other.re).complete(prec);
        let di = (&self.im - &other.im).complete(prec);
        ((dr.to_f64()).powi(2) + (di.to_f64()).powi(2)).sqrt()
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

pub fn rational_to_float(r: &BigRational, prec: u32) -> Float {
    let num = bigint_to_float(r.numer(), prec + 16);
    let den = bigint_to_float(r.denom(), prec + 16);
    Float::with_val(prec, num / den)
}

pub fn bigint_to_float(x: &BigInt, prec: u32) -> Float {
    let s = x.to_str_radix(16);
    let i = rug::Integer::from_str_radix(&s, 16).expect("hex bigint");
    Float::with_val(prec, i)
}

/// `exp(2*pi*i*x)` for exact rational `x`, reduced mod 1 before evaluation.
pub fn unit_phase(x: &BigRational, prec: u32) -> ComplexHP {
    let one = BigRational::from(BigInt::from(1));
    let frac = x - x.floor();
    debug_assert!(frac >= BigRational::zero() && frac < one);
    let theta = rational_to_float(&frac, prec + 8) * 2u32 * pi(prec + 8);
    let (sin, cos) = theta.sin_cos(Float::new(prec + 8));
    let re = Float::with_val(prec, cos);
    let im = Float::with_val(prec, sin);
    let err = ulp_of(&re, prec) + ulp_of(&im, prec);
    ComplexHP { re, im, err }
}

/// `exp(2*pi*i*(num/den))` for machine-word rationals; hot-path variant.
pub fn unit_phase_i64(num: i64, den: i64, prec: u32) -> ComplexHP {
    debug_assert!(den > 0);
    let n = num.rem_euclid(den);
    let theta = Float::with_val(prec + 8, n) / Float::with_val(prec + 8, den) * 2u32 * pi(prec + 8);
    let (sin, cos) = theta.sin_cos(Float::new(prec + 8));
    let re = Float::with_val(prec, cos);
    let im = Float::with_val(prec, sin);
    let err = ulp_of(&re, prec) + ulp_of(&im, prec);
    ComplexHP { re, im, err }
}

/// `2*sin(pi*num/den)` as an exact-angle real value.
pub fn two_sin_pi_i64(num: i64, den: i64, prec: u32) -> Float {
    debug_assert!(den > 0);
    let n = num.rem_euclid(2 * den);
    let theta = Float::with_val(prec + 8, n) / Float::with_val(prec + 8, den) * pi(prec + 8);
    Float::with_val(prec, theta.sin() * 2u32)
}

/// `exp(x)` for a rational argument (used for radial damping factors).
pub fn exp_rational(x: &BigRational, prec: u32) -> Float {
    rational_to_float(x, prec + 8).exp()
}

/// `sqrt(n)` for a small non-negative integer.
pub fn sqrt_u64(n: u64, prec: u32) -> Float {
    Float::with_val(prec, n).sqrt()
}

/// `3^(b/2)` with the integer part computed exactly.
pub fn sqrt3_pow(b: i32, prec: u32) -> Float {
    let whole = b.div_euclid(2);
    let half = b.rem_euclid(2);
    let mut v = Float::with_val(prec, 1);
    let three = Float::with_val(prec, 3);
    if whole >= 0 {
        for _ in 0..whole {
            v *= &three;
        }
    } else {
        for _ in 0..-whole {
            v /= &three;
        }
    }
    if half == 1 {
        v *= three.sqrt();
    }
    v
}

/// Exact value `i^a * 3^(b/2)` on the recognition lattice.
pub fn i_pow_sqrt3_pow(a: u8, b: i32, prec: u32) -> ComplexHP {
    let mag = sqrt3_pow(b, prec);
    let z = ComplexHP::from_floats(mag, Float::new(prec));
    z.mul_i_pow(a as i64)
}

/// A point `q = exp(2*pi*i*(u + i*y))` of the open unit disk approached
/// radially: `u` is the exact root-of-unity angle, `y > 0` the radial offset.
#[derive(Clone, Debug)]
pub struct DiskPoint {
    pub u: BigRational,
    pub y: BigRational,
}

impl DiskPoint {
    pub fn new(u: BigRational, y: BigRational) -> Self {
        assert!(!y.is_negative(), "radial offset must be >= 0");
        DiskPoint { u, y }
    }

    pub fn on_circle(u: BigRational) -> Self {
        DiskPoint { u, y: BigRational::zero() }
    }

    /// `q^x` for exact rational exponent `x`.
    pub fn pow(&self, x: &BigRational, prec: u32) -> ComplexHP {
        let phase = unit_phase(&(x * &self.u), prec);
        if self.y.is_zero() {
            return phase;
        }
        let two_pi = pi(prec + 8) * 2u32;
        let damp = (-(rational_to_float(&(x * &self.y), prec + 8) * two_pi)).exp();
        phase.scale_float(&Float::with_val(prec, damp))
    }

    pub fn abs_q(&self, prec: u32) -> Float {
        let two_pi = pi(prec + 8) * 2u32;
        Float::with_val(prec, (-(rational_to_float(&self.y, prec + 8) * two_pi)).exp())
    }
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_quarter_turn() {
        let z = unit_phase(&rational(1, 4), 128);
        assert!(z.re.to_f64().abs() < 1e-30);
        assert!((z.im.to_f64() - 1.0).abs() < 1e-30);
    }

    #[test]
    fn phase_reduction_mod_one() {
        let a = unit_phase(&rational(7, 3), 128);
        let b = unit_phase(&rational(1, 3), 128);
        assert!(a.dist(&b) < 1e-30);
    }

    #[test]
    fn mul_matches_phase_addition() {
        let a = unit_phase(&rational(1, 7), 192);
        let b = unit_phase(&rational(2, 7), 192);
        let c = unit_phase(&rational(3, 7), 192);
        assert!(a.mul(&b).dist(&c) < 1e-40);
        assert!(a.mul(&b).err < 1e-40);
    }

    #[test]
    fn recognition_lattice_values() {
        let z = i_pow_sqrt3_pow(1, 1, 128); // i*sqrt(3)
        assert!(z.re.to_f64().abs() < 1e-30);
        assert!((z.im.to_f64() - 3f64.sqrt()).abs() < 1e-12);
        let z = i_pow_sqrt3_pow(2, 2, 128); // -3
        assert!((z.re.to_f64() + 3.0).abs() < 1e-12);
    }

    #[test]
    fn disk_point_monomial() {
        // q^(1/2) at q = e^{2 pi i (1/6 + i y)}: modulus e^{-pi y}, phase pi/6
        let p = DiskPoint::new(rational(1, 6), rational(1, 1000));
        let z = p.pow(&rational(1, 2), 128);
        let want_mod = (-std::f64::consts::PI / 1000.0).exp();
        assert!((z.abs_f64() - want_mod).abs() < 1e-12);
        assert!((z.arg_f64() - std::f64::consts::PI / 6.0).abs() < 1e-12);
    }

    #[test]
    fn division_roundtrip() {
        let a = unit_phase(&rational(2, 11), 128).scale_float(&Float::with_val(128, 3.5));
        let b = unit_phase(&rational(5, 13), 128).scale_float(&Float::with_val(128, 0.25));
        let q = a.div(&b);
        assert!(q.mul(&b).dist(&a) < 1e-30);
    }
}
