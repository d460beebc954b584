//! Scalar fields.
//!
//! Everything downstream is generic over [`Field`], a small context object
//! that knows how to build and invert its elements. Two implementations ship
//! with the crate: [`PrimeField`] (elements are [`Fp`] residues) and
//! [`Rationals`] (elements are exact big rationals, characteristic zero).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

/// Largest accepted prime modulus. Products of two residues fit in a `u64`
/// with plenty of room, so multiply-then-reduce never overflows.
pub const MAX_MODULUS: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} exceeds the supported bound {MAX_MODULUS}")]
    TooLarge(u64),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
}

/// A field the linear algebra can run over.
///
/// Elements do not have to know their field (rationals don't), so
/// constants and inverses go through the context value.
pub trait Field: Clone + PartialEq + Eq + fmt::Debug + Send + Sync {
    type Elem: Clone
        + PartialEq
        + Eq
        + fmt::Debug
        + Send
        + Sync
        + Add<Output = Self::Elem>
        + Sub<Output = Self::Elem>
        + Mul<Output = Self::Elem>
        + Neg<Output = Self::Elem>;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    /// Image of an integer under the canonical ring map `Z -> F`.
    fn from_i64(&self, v: i64) -> Self::Elem;
    fn is_zero(&self, x: &Self::Elem) -> bool;
    fn inv(&self, x: &Self::Elem) -> Option<Self::Elem>;
    /// `0` for characteristic zero.
    fn characteristic(&self) -> u64;
    /// Whether `x` is an element of this particular field instance.
    fn contains(&self, x: &Self::Elem) -> bool;
}

/// Trial-division primality test; inputs are small.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// The prime field `F_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeField {
    p: u32,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if p > MAX_MODULUS {
            return Err(FieldError::TooLarge(p));
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(Self { p: p as u32 })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Reduces an arbitrary integer into the field.
    pub fn elem(&self, v: i64) -> Fp {
        Fp {
            value: v.rem_euclid(self.p as i64) as u32,
            p: self.p,
        }
    }

    /// Builds an element from an already-reduced residue.
    pub fn residue(&self, value: u64) -> Option<Fp> {
        (value < self.p as u64).then_some(Fp {
            value: value as u32,
            p: self.p,
        })
    }

    /// All `p` elements in ascending residue order.
    pub fn elements(&self) -> impl Iterator<Item = Fp> + '_ {
        (0..self.p).map(move |value| Fp { value, p: self.p })
    }
}

impl fmt::Display for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.p)
    }
}

/// True iff the characteristic `p` divides `q`, i.e. `q` maps to zero in `F_p`.
pub fn char_divides(field: PrimeField, q: u64) -> bool {
    q.is_multiple_of(field.p as u64)
}

/// A residue modulo a prime. Arithmetic between residues of different moduli
/// is a programming error and panics.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fp {
    value: u32,
    p: u32,
}

impl Fp {
    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn field(&self) -> PrimeField {
        PrimeField { p: self.p }
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn pow(self, mut e: u64) -> Fp {
        let mut base = self;
        let mut acc = Fp { value: 1 % self.p, p: self.p };
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat: `x^(p-2)`.
    pub fn inv(self) -> Result<Fp, FieldError> {
        if self.value == 0 {
            return Err(FieldError::ZeroInverse);
        }
        Ok(self.pow(self.p as u64 - 2))
    }

    #[inline]
    fn check(&self, other: &Fp) {
        assert_eq!(self.p, other.p, "mixed moduli in field arithmetic");
    }
}

impl fmt::Debug for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl fmt::Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for Fp {
    type Output = Fp;
    #[inline]
    fn add(self, rhs: Fp) -> Fp {
        self.check(&rhs);
        let s = self.value + rhs.value;
        Fp {
            value: if s >= self.p { s - self.p } else { s },
            p: self.p,
        }
    }
}

impl Sub for Fp {
    type Output = Fp;
    #[inline]
    fn sub(self, rhs: Fp) -> Fp {
        self.check(&rhs);
        Fp {
            value: if self.value >= rhs.value {
                self.value - rhs.value
            } else {
                self.value + self.p - rhs.value
            },
            p: self.p,
        }
    }
}

impl Mul for Fp {
    type Output = Fp;
    #[inline]
    fn mul(self, rhs: Fp) -> Fp {
        self.check(&rhs);
        Fp {
            value: ((self.value as u64 * rhs.value as u64) % self.p as u64) as u32,
            p: self.p,
        }
    }
}

impl Neg for Fp {
    type Output = Fp;
    #[inline]
    fn neg(self) -> Fp {
        Fp {
            value: if self.value == 0 { 0 } else { self.p - self.value },
            p: self.p,
        }
    }
}

impl Field for PrimeField {
    type Elem = Fp;

    fn zero(&self) -> Fp {
        Fp { value: 0, p: self.p }
    }

    fn one(&self) -> Fp {
        Fp { value: 1, p: self.p }
    }

    fn from_i64(&self, v: i64) -> Fp {
        self.elem(v)
    }

    fn is_zero(&self, x: &Fp) -> bool {
        x.value == 0
    }

    fn inv(&self, x: &Fp) -> Option<Fp> {
        x.inv().ok()
    }

    fn characteristic(&self) -> u64 {
        self.p as u64
    }

    fn contains(&self, x: &Fp) -> bool {
        x.p == self.p
    }
}

/// The rationals `Q`, with exact arbitrary-precision elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }

    fn one(&self) -> BigRational {
        BigRational::one()
    }

    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    fn is_zero(&self, x: &BigRational) -> bool {
        x.is_zero()
    }

    fn inv(&self, x: &BigRational) -> Option<BigRational> {
        (!x.is_zero()).then(|| x.recip())
    }

    fn characteristic(&self) -> u64 {
        0
    }

    fn contains(&self, _x: &BigRational) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL_PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];

    #[test]
    fn construction_rejects_composites_and_large_moduli() {
        assert_eq!(PrimeField::new(1), Err(FieldError::NotPrime(1)));
        assert_eq!(PrimeField::new(6), Err(FieldError::NotPrime(6)));
        assert_eq!(PrimeField::new(0), Err(FieldError::NotPrime(0)));
        assert_eq!(PrimeField::new(65_537), Err(FieldError::TooLarge(65_537)));
        assert!(PrimeField::new(65_521).is_ok());
        for p in SMALL_PRIMES {
            assert_eq!(PrimeField::new(p).unwrap().p() as u64, p);
        }
    }

    #[test]
    fn inverse_examples() {
        let f5 = PrimeField::new(5).unwrap();
        let three = f5.elem(3);
        // 3 * 2 = 6 = 1 mod 5
        assert_eq!((three * f5.elem(2)).value(), 1);
        assert_eq!(three.inv().unwrap().value(), 2);

        let f7 = PrimeField::new(7).unwrap();
        assert_eq!(f7.elem(1).inv().unwrap().value(), 1);

        let f2 = PrimeField::new(2).unwrap();
        assert_eq!(f2.elem(1).inv().unwrap().value(), 1);
    }

    #[test]
    fn zero_has_no_inverse() {
        let f = PrimeField::new(7).unwrap();
        assert_eq!(f.zero().inv(), Err(FieldError::ZeroInverse));
        assert_eq!(Field::inv(&f, &f.zero()), None);
        assert_eq!(Field::inv(&Rationals, &Rationals.zero()), None);
    }

    #[test]
    fn char_divides_examples() {
        let f2 = PrimeField::new(2).unwrap();
        let f3 = PrimeField::new(3).unwrap();
        let f5 = PrimeField::new(5).unwrap();
        assert!(char_divides(f2, 6));
        assert!(!char_divides(f5, 6));
        assert!(char_divides(f3, 3));
    }

    #[test]
    fn char_divides_matches_embedding() {
        for p in SMALL_PRIMES {
            let f = PrimeField::new(p).unwrap();
            for q in 1..200u64 {
                assert_eq!(char_divides(f, q), f.from_i64(q as i64).is_zero());
            }
        }
    }

    #[test]
    fn inverse_is_an_involution() {
        for p in SMALL_PRIMES {
            let f = PrimeField::new(p).unwrap();
            for x in f.elements().filter(|x| !x.is_zero()) {
                let y = x.inv().unwrap();
                assert_eq!((x * y).value(), 1);
                assert_eq!(y.inv().unwrap(), x);
            }
        }
    }

    #[test]
    fn field_axioms_exhaustive() {
        for p in SMALL_PRIMES {
            let f = PrimeField::new(p).unwrap();
            let zero = f.zero();
            let one = f.one();
            for a in f.elements() {
                assert_eq!(a + zero, a);
                assert_eq!(a * one, a);
                assert_eq!(a + (-a), zero);
                assert_eq!(a - a, zero);
                for b in f.elements() {
                    assert_eq!(a + b, b + a);
                    assert_eq!(a * b, b * a);
                    assert_eq!((a - b) + b, a);
                    for c in f.elements() {
                        assert_eq!((a + b) + c, a + (b + c));
                        assert_eq!((a * b) * c, a * (b * c));
                        assert_eq!(a * (b + c), a * b + a * c);
                    }
                }
            }
        }
    }

    #[test]
    fn embedding_reduces_negative_integers() {
        let f = PrimeField::new(5).unwrap();
        assert_eq!(f.elem(-1).value(), 4);
        assert_eq!(f.elem(-10).value(), 0);
        assert_eq!(f.residue(5), None);
        assert_eq!(f.residue(4).map(|x| x.value()), Some(4));
    }

    #[test]
    #[should_panic(expected = "mixed moduli")]
    fn mixing_moduli_panics() {
        let a = PrimeField::new(3).unwrap().one();
        let b = PrimeField::new(5).unwrap().one();
        let _ = a + b;
    }

    #[test]
    fn rationals_are_characteristic_zero() {
        let q = Rationals;
        assert_eq!(q.characteristic(), 0);
        let six = q.from_i64(6);
        assert!(!q.is_zero(&six));
        assert_eq!(q.inv(&six).unwrap() * six, q.one());
    }
}
