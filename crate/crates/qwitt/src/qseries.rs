//! Exact truncated q-series on a rational exponent lattice.
//!
//! A [`QSeries`] is `sum_n c_n q^(prefactor + n/denom)` with exact rational
//! coefficients, plus an explicit relative `truncation`: the series is a
//! faithful truncation of its parent for every exponent strictly below
//! `prefactor + truncation`. Arithmetic tracks the truncation pessimistically
//! (minimum of the inputs), so exactness claims survive composition.

use crate::hp::{self, ComplexHP, DiskPoint};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error, PartialEq, Eq, Clone)]
pub enum QSeriesError {
    #[error("exponent does not lie on the series lattice")]
    OffLattice,
    #[error("malformed rational literal: {0}")]
    BadRational(String),
    #[error("series truncated below the requested order")]
    InsufficientTruncation,
}

#[derive(Clone, Debug)]
pub struct QSeries {
    prefactor: BigRational,
    denom: u64,
    coeffs: BTreeMap<u64, BigRational>,
    truncation: BigRational,
}

impl QSeries {
    /// Empty series, exact below `truncation`.
    pub fn zero(truncation: BigRational) -> Self {
        QSeries {
            prefactor: BigRational::zero(),
            denom: 1,
            coeffs: BTreeMap::new(),
            truncation,
        }
    }

    /// Single term `c * q^exponent`, exact below `exponent + truncation`.
    pub fn monomial(c: BigRational, exponent: BigRational, truncation: BigRational) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() && truncation.is_positive() {
            coeffs.insert(0, c);
        }
        QSeries { prefactor: exponent, denom: 1, coeffs, truncation }
    }

    pub fn from_terms(
        prefactor: BigRational,
        denom: u64,
        terms: impl IntoIterator<Item = (u64, BigRational)>,
        truncation: BigRational,
    ) -> Self {
        let mut coeffs = BTreeMap::new();
        for (n, c) in terms {
            if c.is_zero() {
                continue;
            }
            let e = BigRational::new(BigInt::from(n), BigInt::from(denom));
            if e < truncation {
                let entry = coeffs.entry(n).or_insert_with(BigRational::zero);
                *entry += c;
                if entry.is_zero() {
                    coeffs.remove(&n);
                }
            }
        }
        let mut s = QSeries { prefactor, denom, coeffs, truncation };
        s.normalize();
        s
    }

    pub fn prefactor(&self) -> &BigRational {
        &self.prefactor
    }

    pub fn denom(&self) -> u64 {
        self.denom
    }

    pub fn truncation(&self) -> &BigRational {
        &self.truncation
    }

    /// Absolute exponent below which the series is exact.
    pub fn valid_until(&self) -> BigRational {
        &self.prefactor + &self.truncation
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Terms as `(absolute exponent, coefficient)`, ascending.
    pub fn terms(&self) -> impl Iterator<Item = (BigRational, &BigRational)> + '_ {
        self.coeffs.iter().map(move |(n, c)| {
            (&self.prefactor + BigRational::new(BigInt::from(*n), BigInt::from(self.denom)), c)
        })
    }

    pub fn coefficient(&self, exponent: &BigRational) -> BigRational {
        let rel = exponent - &self.prefactor;
        let scaled = &rel * BigRational::from(BigInt::from(self.denom));
        if !scaled.is_integer() || scaled.is_negative() {
            return BigRational::zero();
        }
        match scaled.to_integer().to_u64() {
            Some(n) => self.coeffs.get(&n).cloned().unwrap_or_else(BigRational::zero),
            None => BigRational::zero(),
        }
    }

    /// Leading `(exponent, coefficient)` if any term is present.
    pub fn leading(&self) -> Option<(BigRational, BigRational)> {
        self.coeffs.iter().next().map(|(n, c)| {
            (
                &self.prefactor + BigRational::new(BigInt::from(*n), BigInt::from(self.denom)),
                c.clone(),
            )
        })
    }

    /// True when every coefficient is an integer over a power of two.
    pub fn is_dyadic(&self) -> bool {
        self.coeffs.values().all(|c| {
            let mut d = c.denom().clone();
            while d.is_even() {
                d /= 2;
            }
            d == BigInt::one() || d == BigInt::from(-1)
        })
    }

    fn normalize(&mut self) {
        self.coeffs.retain(|_, c| !c.is_zero());
        if let Some((&min, _)) = self.coeffs.iter().next() {
            if min > 0 {
                let shift = BigRational::new(BigInt::from(min), BigInt::from(self.denom));
                self.prefactor += &shift;
                self.truncation -= &shift;
                self.coeffs = self.coeffs.iter().map(|(n, c)| (n - min, c.clone())).collect();
            }
        }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        if r.is_zero() {
            return QSeries::zero(self.truncation.clone());
        }
        QSeries {
            prefactor: self.prefactor.clone(),
            denom: self.denom,
            coeffs: self.coeffs.iter().map(|(n, c)| (*n, c * r)).collect(),
            truncation: self.truncation.clone(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&-BigRational::one())
    }

    /// Multiply by `q^dq`.
    pub fn shift(&self, dq: &BigRational) -> Self {
        QSeries {
            prefactor: &self.prefactor + dq,
            denom: self.denom,
            coeffs: self.coeffs.clone(),
            truncation: self.truncation.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let valid = {
            let a = self.valid_until();
            let b = other.valid_until();
            if a <= b {
                a
            } else {
                b
            }
        };
        let prefactor =
            if self.prefactor <= other.prefactor { self.prefactor.clone() } else { other.prefactor.clone() };
        let gap = &self.prefactor - &other.prefactor;
        let denom_big = BigInt::from(self.denom.lcm(&other.denom));
        let denom_big = denom_big.lcm(gap.denom());
        let denom = denom_big.to_u64().expect("lattice denominator fits u64");
        let mut coeffs: BTreeMap<u64, BigRational> = BTreeMap::new();
        let mut put = |e: BigRational, c: &BigRational| {
            if e >= valid {
                return;
            }
            let rel = (&e - &prefactor) * BigRational::from(BigInt::from(denom));
            debug_assert!(rel.is_integer());
            let n = rel.to_integer().to_u64().expect("exponent index fits u64");
            let entry = coeffs.entry(n).or_insert_with(BigRational::zero);
            *entry += c;
            if entry.is_zero() {
                coeffs.remove(&n);
            }
        };
        for (e, c) in self.terms() {
            put(e, c);
        }
        for (e, c) in other.terms() {
            put(e, c);
        }
        let truncation = valid - &prefactor;
        let mut s = QSeries { prefactor, denom, coeffs, truncation };
        s.normalize();
        s
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Largest absolute coefficient, as f64 (for tail estimates).
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs
            .values()
            .map(|c| {
                let n = c.numer().to_f64().unwrap_or(f64::MAX);
                let d = c.denom().to_f64().unwrap_or(1.0);
                (n / d).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Evaluate at a disk point `q = exp(2 pi i (u + i y))`.
    ///
    /// For `y > 0` the reported error includes a geometric tail estimate from
    /// the largest retained coefficient. On the circle (`y = 0`) the value is
    /// the truncated partial sum and the error covers rounding only.
    pub fn evaluate(&self, q: &DiskPoint, prec: u32) -> ComplexHP {
        let mut acc = ComplexHP::zero(prec);
        if self.coeffs.is_empty() {
            return acc;
        }
        let step = q.pow(&BigRational::new(BigInt::one(), BigInt::from(self.denom)), prec);
        let mut cur_n: u64 = 0;
        let mut cur_pow = q.pow(&self.prefactor, prec);
        for (&n, c) in &self.coeffs {
            if n > cur_n {
                cur_pow = cur_pow.mul(&step.powi((n - cur_n) as i64));
                cur_n = n;
            }
            acc = acc.add(&cur_pow.scale_rational(c));
        }
        if q.y.is_positive() {
            let aq = q.abs_q(prec).to_f64();
            let v = self.valid_until();
            let vf = v.numer().to_f64().unwrap_or(0.0) / v.denom().to_f64().unwrap_or(1.0);
            let head = aq.powf(vf);
            let ratio = aq.powf(1.0 / self.denom as f64);
            if ratio < 1.0 {
                acc.err += self.max_abs_coeff() * head / (1.0 - ratio);
            } else {
                acc.err = f64::INFINITY;
            }
        }
        acc
    }

    /// Evaluate at an arbitrary complex point with `|q| <= 1` (general path:
    /// complex powers go through log, so prefer [`QSeries::evaluate`] when the
    /// point has an exact angle).
    pub fn evaluate_c(&self, q: &ComplexHP) -> ComplexHP {
        let prec = q.prec();
        let ln_abs = q.abs().ln();
        let arg = q.im.clone().atan2(&q.re);
        let powq = |x: &BigRational| -> ComplexHP {
            let xf = hp::rational_to_float(x, prec);
            let modulus = (xf.clone() * &ln_abs).exp();
            let theta = xf * &arg;
            let (s, c) = theta.sin_cos(rug::Float::new(prec));
            ComplexHP::from_floats(c, s).scale_float(&modulus)
        };
        let mut acc = ComplexHP::zero(prec);
        for (e, c) in self.terms() {
            acc = acc.add(&powq(&e).scale_rational(c));
        }
        acc
    }
}

/// Wire format: rationals as `"num/den"` strings, coefficients as
/// `[index, value]` pairs on the `1/denom` lattice.
#[derive(Serialize, Deserialize)]
struct QSeriesWire {
    prefactor: String,
    denom: u64,
    coeffs: Vec<(u64, String)>,
    truncation: String,
}

pub fn rational_to_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn rational_from_string(s: &str) -> Result<BigRational, QSeriesError> {
    let parse_int =
        |t: &str| t.trim().parse::<BigInt>().map_err(|_| QSeriesError::BadRational(s.into()));
    match s.split_once('/') {
        Some((n, d)) => {
            let d = parse_int(d)?;
            if d.is_zero() {
                return Err(QSeriesError::BadRational(s.into()));
            }
            Ok(BigRational::new(parse_int(n)?, d))
        }
        None => Ok(BigRational::from(parse_int(s)?)),
    }
}

impl QSeries {
    pub fn to_json(&self) -> String {
        let wire = QSeriesWire {
            prefactor: rational_to_string(&self.prefactor),
            denom: self.denom,
            coeffs: self
                .coeffs
                .iter()
                .map(|(n, c)| (*n, rational_to_string(c)))
                .collect(),
            truncation: rational_to_string(&self.truncation),
        };
        serde_json::to_string_pretty(&wire).expect("series serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, QSeriesError> {
        let wire: QSeriesWire =
            serde_json::from_str(s).map_err(|e| QSeriesError::BadRational(e.to_string()))?;
        let mut coeffs = BTreeMap::new();
        for (n, c) in wire.coeffs {
            let c = rational_from_string(&c)?;
            if !c.is_zero() {
                coeffs.insert(n, c);
            }
        }
        Ok(QSeries {
            prefactor: rational_from_string(&wire.prefactor)?,
            denom: wire.denom,
            coeffs,
            truncation: rational_from_string(&wire.truncation)?,
        })
    }

    /// Semantic equality of the overlap window: both series agree term-by-term
    /// below `upto` (absolute exponent).
    pub fn agrees_with(&self, other: &Self, upto: &BigRational) -> bool {
        if &self.valid_until() < upto || &other.valid_until() < upto {
            return false;
        }
        let mine: Vec<(BigRational, BigRational)> = self
            .terms()
            .filter(|(e, _)| e < upto)
            .map(|(e, c)| (e, c.clone()))
            .collect();
        let theirs: Vec<(BigRational, BigRational)> = other
            .terms()
            .filter(|(e, _)| e < upto)
            .map(|(e, c)| (e, c.clone()))
            .collect();
        mine == theirs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hp::rational;

    fn q(n: i64, d: i64) -> BigRational {
        rational(n, d)
    }

    #[test]
    fn add_identity() {
        let s = QSeries::from_terms(
            q(0, 1),
            2,
            [(0, q(1, 1)), (3, q(-2, 1))],
            q(10, 1),
        );
        let z = QSeries::zero(q(10, 1));
        assert!(s.add(&z).agrees_with(&s, &q(9, 1)));
    }

    #[test]
    fn shift_constant_two() {
        // the nonzero one-vertex series at p = 3: shift 2 by q^{1/3}
        let two = QSeries::monomial(q(2, 1), q(0, 1), q(100, 1));
        let shifted = two.shift(&q(1, 3));
        let want = QSeries::monomial(q(2, 1), q(1, 3), q(100, 1));
        assert!(shifted.agrees_with(&want, &q(50, 1)));
    }

    #[test]
    fn scale_involution() {
        let s = QSeries::from_terms(
            q(-3, 2),
            120,
            [(0, q(1, 1)), (120, q(-1, 1)), (360, q(-1, 1))],
            q(20, 1),
        );
        let back = s.scale(&q(-1, 1)).scale(&q(-1, 1));
        assert!(back.agrees_with(&s, &q(18, 1)));
    }

    #[test]
    fn truncation_takes_minimum() {
        let a = QSeries::monomial(q(1, 1), q(0, 1), q(5, 1));
        let b = QSeries::monomial(q(1, 1), q(1, 1), q(3, 1));
        let sum = a.add(&b);
        assert_eq!(sum.valid_until(), q(3, 1));
    }

    #[test]
    fn mixed_lattice_addition() {
        let a = QSeries::monomial(q(3, 1), q(1, 2), q(40, 1));
        let b = QSeries::monomial(q(5, 1), q(1, 3), q(40, 1));
        let sum = a.add(&b);
        assert_eq!(sum.coefficient(&q(1, 2)), q(3, 1));
        assert_eq!(sum.coefficient(&q(1, 3)), q(5, 1));
        assert_eq!(sum.coefficient(&q(1, 6)), q(0, 1));
    }

    #[test]
    fn json_roundtrip_lossless() {
        let s = QSeries::from_terms(
            q(71, 96),
            96,
            [(1, q(1, 1)), (17, q(-1, 2)), (300, q(12345678901i64, 4))],
            q(400, 96),
        );
        let back = QSeries::from_json(&s.to_json()).unwrap();
        assert!(back.agrees_with(&s, &s.valid_until()));
        assert_eq!(back.prefactor(), s.prefactor());
        assert_eq!(back.truncation(), s.truncation());
    }

    #[test]
    fn evaluate_constant() {
        let s = QSeries::monomial(q(2, 1), q(0, 1), q(100, 1));
        let p = DiskPoint::on_circle(q(1, 6));
        let v = s.evaluate(&p, 128);
        assert!((v.re.to_f64() - 2.0).abs() < 1e-30);
        assert!(v.im.to_f64().abs() < 1e-30);
    }

    #[test]
    fn evaluate_monomial_law() {
        // -2 q^{1/2} at the sixth root of unity: -2 e^{i pi/6}
        let s = QSeries::monomial(q(-2, 1), q(1, 2), q(100, 1));
        let v = s.evaluate(&DiskPoint::on_circle(q(1, 6)), 128);
        let want = crate::hp::unit_phase(&q(1, 12), 128).scale_rational(&q(-2, 1));
        assert!(v.dist(&want) < 1e-30);
    }

    #[test]
    fn evaluate_is_linear() {
        let a = QSeries::from_terms(q(0, 1), 4, [(1, q(3, 2)), (9, q(-5, 1))], q(30, 1));
        let b = QSeries::from_terms(q(1, 3), 2, [(0, q(7, 4)), (4, q(2, 1))], q(30, 1));
        let p = DiskPoint::new(q(1, 6), q(1, 500));
        let lhs = a.add(&b).evaluate(&p, 192);
        let rhs = a.evaluate(&p, 192).add(&b.evaluate(&p, 192));
        assert!(lhs.dist(&rhs) < 1e-40);
    }

    #[test]
    fn evaluate_precision_doubling_stays_within_err() {
        let coeffs: Vec<(u64, BigRational)> =
            (0..200u64).map(|n| (n, q((n as i64 % 17) - 8, 1))).collect();
        let s = QSeries::from_terms(q(-1, 2), 1, coeffs, q(500, 1));
        let p = DiskPoint::new(q(1, 6), q(1, 1000));
        let lo = s.evaluate(&p, 128);
        let hi = s.evaluate(&p, 256);
        assert!(lo.dist(&hi) <= lo.err.max(1e-25));
    }
}
