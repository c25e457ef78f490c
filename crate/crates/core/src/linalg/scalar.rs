//! Exact field elements: arbitrary-precision rationals and prime fields.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Ground field descriptor. All scalars in one computation share one of
/// these; mixing them is a hard error, never a coercion.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Field {
    Rationals,
    Prime(u64),
}

/// Default prime for fast exact runs.
pub const DEFAULT_PRIME: u64 = 32003;

impl Field {
    /// Prime field constructor with a primality check.
    pub fn prime(p: u64) -> Result<Field> {
        if is_prime(p) {
            Ok(Field::Prime(p))
        } else {
            Err(Error::NotPrime(p))
        }
    }

    pub fn zero(self) -> Scalar {
        match self {
            Field::Rationals => Scalar::Rat(BigRational::zero()),
            Field::Prime(p) => Scalar::Mod { value: 0, modulus: p },
        }
    }

    pub fn one(self) -> Scalar {
        match self {
            Field::Rationals => Scalar::Rat(BigRational::one()),
            Field::Prime(p) => Scalar::Mod { value: 1 % p, modulus: p },
        }
    }

    pub fn from_i64(self, n: i64) -> Scalar {
        match self {
            Field::Rationals => Scalar::Rat(BigRational::from_integer(BigInt::from(n))),
            Field::Prime(p) => {
                let r = n.rem_euclid(p as i64) as u64;
                Scalar::Mod { value: r, modulus: p }
            }
        }
    }

    /// `num/den` as a field element; in a prime field this is `num * den^-1`.
    pub fn from_ratio(self, num: i64, den: i64) -> Result<Scalar> {
        if den == 0 {
            return Err(Error::DivisionByZero);
        }
        self.from_i64(num).div(&self.from_i64(den))
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Rationals => write!(f, "Q"),
            Field::Prime(p) => write!(f, "F{p}"),
        }
    }
}

/// An exact field element. Rationals are always kept reduced by the
/// underlying big-rational type; prime-field values are reduced mod p.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Scalar {
    Rat(BigRational),
    Mod { value: u64, modulus: u64 },
}

impl Scalar {
    pub fn field(&self) -> Field {
        match self {
            Scalar::Rat(_) => Field::Rationals,
            Scalar::Mod { modulus, .. } => Field::Prime(*modulus),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_zero(),
            Scalar::Mod { value, .. } => *value == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_one(),
            Scalar::Mod { value, modulus } => *value == 1 % *modulus,
        }
    }

    fn check_same_field(&self, other: &Scalar) -> Result<()> {
        if self.field() == other.field() {
            Ok(())
        } else {
            Err(Error::FieldMismatch(
                self.field().to_string(),
                other.field().to_string(),
            ))
        }
    }

    /// Multiplicative inverse. Division by zero is rejected.
    pub fn inverse(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(match self {
            Scalar::Rat(r) => Scalar::Rat(r.recip()),
            Scalar::Mod { value, modulus } => Scalar::Mod {
                value: mod_inverse(*value, *modulus),
                modulus: *modulus,
            },
        })
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar> {
        self.check_same_field(other)?;
        Ok(self.clone() * other.inverse()?)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rat(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Mod { value, .. } => write!(f, "{value}"),
        }
    }
}

// The ring ops panic on field mismatch. Public entry points (matrix and
// subspace constructors) validate field agreement up front, so a mismatch
// reaching these ops is a bug in this crate, not bad user input.
impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a + b),
            (Scalar::Mod { value: a, modulus: p }, Scalar::Mod { value: b, modulus: q })
                if p == q =>
            {
                Scalar::Mod { value: (a + b) % p, modulus: p }
            }
            (a, b) => panic!("field mismatch in scalar arithmetic: {a:?} + {b:?}"),
        }
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        self + (-rhs)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Rat(a) => Scalar::Rat(-a),
            Scalar::Mod { value, modulus } => Scalar::Mod {
                value: if value == 0 { 0 } else { modulus - value },
                modulus,
            },
        }
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a * b),
            (Scalar::Mod { value: a, modulus: p }, Scalar::Mod { value: b, modulus: q })
                if p == q =>
            {
                // p < 2^32 keeps a*b inside u64; enforced by is_prime's bound.
                Scalar::Mod { value: (a * b) % p, modulus: p }
            }
            (a, b) => panic!("field mismatch in scalar arithmetic: {a:?} * {b:?}"),
        }
    }
}

impl Scalar {
    /// Exact integer the scalar represents, if it is one (used by renderers).
    pub fn as_integer(&self) -> Option<BigInt> {
        match self {
            Scalar::Rat(r) if r.is_integer() => Some(r.numer().clone()),
            Scalar::Mod { value, .. } => Some(BigInt::from(*value)),
            _ => None,
        }
    }

    /// Numerator/denominator pair for rendering; prime-field values are `value/1`.
    pub fn as_ratio(&self) -> (BigInt, BigInt) {
        match self {
            Scalar::Rat(r) => (r.numer().clone(), r.denom().clone()),
            Scalar::Mod { value, .. } => (BigInt::from(*value), BigInt::one()),
        }
    }

    pub fn abs_is_one(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.abs().is_one(),
            s => s.is_one(),
        }
    }
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    // extended Euclid on (a, p), p prime, a != 0 mod p
    let (mut old_r, mut r) = (a as i128, p as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1, "inverse of non-unit mod {p}");
    old_s.rem_euclid(p as i128) as u64
}

fn is_prime(n: u64) -> bool {
    // Trial division; fields beyond 2^32 are rejected so products fit in u64.
    if n < 2 || n >= (1 << 32) {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}
