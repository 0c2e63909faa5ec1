//! Scalar domains: prime fields GF(p), exact rationals, and tolerance-based
//! floating point. A [`ScalarDomain`] value carries the arithmetic rules;
//! [`Scalar`] values are only meaningful relative to a domain.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative pivot threshold for the floating domain.
pub const DEFAULT_FLOAT_TOLERANCE: f64 = 1e-9;

/// The arithmetic a matrix lives in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarDomain {
    /// GF(p) for a prime modulus p; elements are stored reduced in `[0, p)`.
    PrimeField { p: u64 },
    /// Arbitrary-precision rationals, always kept in lowest terms.
    Rational,
    /// f64 with a relative pivot threshold used by rank decisions.
    Float {
        #[serde(rename = "tau")]
        tolerance: f64,
    },
}

impl ScalarDomain {
    /// GF(p). Errors unless `p` is prime.
    pub fn prime_field(p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidParameter(format!("{p} is not prime")));
        }
        Ok(ScalarDomain::PrimeField { p })
    }

    pub fn rational() -> Self {
        ScalarDomain::Rational
    }

    /// Floating domain with relative pivot threshold `tolerance`, 0 < τ < 1.
    pub fn float(tolerance: f64) -> Result<Self> {
        if !(tolerance > 0.0 && tolerance < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "float tolerance must satisfy 0 < tau < 1, got {tolerance}"
            )));
        }
        Ok(ScalarDomain::Float { tolerance })
    }

    /// Re-checks the constructor invariants; used on deserialized values.
    pub fn validate(&self) -> Result<()> {
        match *self {
            ScalarDomain::PrimeField { p } => {
                Self::prime_field(p)?;
            }
            ScalarDomain::Rational => {}
            ScalarDomain::Float { tolerance } => {
                Self::float(tolerance)?;
            }
        }
        Ok(())
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, ScalarDomain::Float { .. })
    }

    pub fn is_prime_field(&self) -> bool {
        matches!(self, ScalarDomain::PrimeField { .. })
    }

    pub fn zero(&self) -> Scalar {
        match self {
            ScalarDomain::PrimeField { .. } => Scalar::Fp(0),
            ScalarDomain::Rational => Scalar::Rational(BigRational::zero()),
            ScalarDomain::Float { .. } => Scalar::Float(0.0),
        }
    }

    pub fn one(&self) -> Scalar {
        match self {
            ScalarDomain::PrimeField { .. } => Scalar::Fp(1),
            ScalarDomain::Rational => Scalar::Rational(BigRational::from_integer(1.into())),
            ScalarDomain::Float { .. } => Scalar::Float(1.0),
        }
    }

    pub fn from_i64(&self, v: i64) -> Scalar {
        match *self {
            ScalarDomain::PrimeField { p } => {
                Scalar::Fp((v as i128).rem_euclid(p as i128) as u64)
            }
            ScalarDomain::Rational => Scalar::Rational(BigRational::from_integer(v.into())),
            ScalarDomain::Float { .. } => Scalar::Float(v as f64),
        }
    }

    pub fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (self, a, b) {
            (ScalarDomain::PrimeField { p }, Scalar::Fp(a), Scalar::Fp(b)) => {
                Scalar::Fp(((*a as u128 + *b as u128) % *p as u128) as u64)
            }
            (ScalarDomain::Rational, Scalar::Rational(a), Scalar::Rational(b)) => {
                Scalar::Rational(a + b)
            }
            (ScalarDomain::Float { .. }, Scalar::Float(a), Scalar::Float(b)) => {
                Scalar::Float(a + b)
            }
            _ => panic!("scalar does not belong to domain {self}"),
        }
    }

    pub fn sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (self, a, b) {
            (ScalarDomain::PrimeField { p }, Scalar::Fp(a), Scalar::Fp(b)) => {
                Scalar::Fp(((*a as u128 * *b as u128) % *p as u128) as u64)
            }
            (ScalarDomain::Rational, Scalar::Rational(a), Scalar::Rational(b)) => {
                Scalar::Rational(a * b)
            }
            (ScalarDomain::Float { .. }, Scalar::Float(a), Scalar::Float(b)) => {
                Scalar::Float(a * b)
            }
            _ => panic!("scalar does not belong to domain {self}"),
        }
    }

    pub fn neg(&self, a: &Scalar) -> Scalar {
        match (self, a) {
            (ScalarDomain::PrimeField { p }, Scalar::Fp(a)) => Scalar::Fp((p - a) % p),
            (ScalarDomain::Rational, Scalar::Rational(a)) => Scalar::Rational(-a),
            (ScalarDomain::Float { .. }, Scalar::Float(a)) => Scalar::Float(-a),
            _ => panic!("scalar does not belong to domain {self}"),
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: &Scalar) -> Option<Scalar> {
        match (self, a) {
            (ScalarDomain::PrimeField { p }, Scalar::Fp(a)) => {
                (*a != 0).then(|| Scalar::Fp(mod_inverse(*a, *p)))
            }
            (ScalarDomain::Rational, Scalar::Rational(a)) => {
                (!a.is_zero()).then(|| Scalar::Rational(a.recip()))
            }
            (ScalarDomain::Float { .. }, Scalar::Float(a)) => {
                (*a != 0.0).then(|| Scalar::Float(1.0 / a))
            }
            _ => panic!("scalar does not belong to domain {self}"),
        }
    }

    pub fn is_zero(&self, a: &Scalar) -> bool {
        match a {
            Scalar::Fp(v) => *v == 0,
            Scalar::Rational(r) => r.is_zero(),
            Scalar::Float(f) => *f == 0.0,
        }
    }

    /// Checks that `s` is a legal, canonical element of this domain.
    pub fn contains(&self, s: &Scalar) -> bool {
        match (self, s) {
            (ScalarDomain::PrimeField { p }, Scalar::Fp(v)) => v < p,
            (ScalarDomain::Rational, Scalar::Rational(_)) => true,
            (ScalarDomain::Float { .. }, Scalar::Float(f)) => f.is_finite(),
            _ => false,
        }
    }
}

impl fmt::Display for ScalarDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarDomain::PrimeField { p } => write!(f, "gf:{p}"),
            ScalarDomain::Rational => write!(f, "rational"),
            ScalarDomain::Float { tolerance } => write!(f, "float:{tolerance}"),
        }
    }
}

/// A single matrix entry. Ordering is entrywise within one variant and is
/// used only for deterministic tie-breaking.
#[derive(Debug, Clone, PartialEq, PartialOrd)]
pub enum Scalar {
    Fp(u64),
    Rational(BigRational),
    Float(f64),
}

impl Scalar {
    pub fn as_f64(&self) -> f64 {
        match self {
            Scalar::Fp(v) => *v as f64,
            Scalar::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::Float(f) => *f,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Fp(v) => write!(f, "{v}"),
            Scalar::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Scalar::Float(v) => write!(f, "{v}"),
        }
    }
}

/// Parses `"num/den"` (or a bare integer) into a reduced rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = |_| Error::InvalidParameter(format!("malformed rational: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let numer = BigInt::from_str(n.trim()).map_err(bad)?;
            let denom = BigInt::from_str(d.trim()).map_err(bad)?;
            if denom.is_zero() {
                return Err(Error::InvalidParameter(format!("zero denominator: {s:?}")));
            }
            Ok(BigRational::new(numer, denom))
        }
        None => {
            let numer = BigInt::from_str(s.trim()).map_err(bad)?;
            Ok(BigRational::from_integer(numer))
        }
    }
}

/// Canonical `"num/den"` form (lowest terms, positive denominator).
pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Clamp to zero when negative: the `[a]+` operation.
pub fn clamp_nonneg(r: BigRational) -> BigRational {
    if r.is_negative() {
        BigRational::zero()
    } else {
        r
    }
}

/// Serde adapter serializing `BigRational` as the string `"num/den"`.
pub mod rat_str {
    use super::{format_rational, parse_rational};
    use num_rational::BigRational;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<BigRational, D::Error> {
        let raw = String::deserialize(d)?;
        parse_rational(&raw).map_err(de::Error::custom)
    }
}

/// Serde adapter for `Option<BigRational>` as an optional `"num/den"` string.
pub mod opt_rat_str {
    use super::{format_rational, parse_rational};
    use num_rational::BigRational;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        r: &Option<BigRational>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_some(&format_rational(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<BigRational>, D::Error> {
        let raw = Option::<String>::deserialize(d)?;
        raw.map(|s| parse_rational(&s).map_err(de::Error::custom))
            .transpose()
    }
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    // extended Euclid; a != 0, p prime
    let (mut old_r, mut r) = (a as i128, p as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1, "gcd(a, p) must be 1 in a prime field");
    old_s.rem_euclid(p as i128) as u64
}

/// Deterministic Miller-Rabin for u64.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}
