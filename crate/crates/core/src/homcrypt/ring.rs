use std::fmt;

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::RngCore;

use crate::error::{Error, Result};

/// The plaintext ring `Z_N` of a homomorphic key pair.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ring {
    modulus: BigUint,
}

/// A residue in `[0, N)`. Elements do not carry their modulus; arithmetic
/// goes through the owning [`Ring`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RingElement(BigUint);

impl RingElement {
    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn into_inner(self) -> BigUint {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Ring {
    pub fn new(modulus: BigUint) -> Result<Self> {
        if modulus < BigUint::from(2u32) {
            return Err(Error::param("ring modulus must be at least 2"));
        }
        Ok(Ring { modulus })
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    pub fn bits(&self) -> u64 {
        self.modulus.bits()
    }

    /// True when every integer below `2^bits` is a distinct ring element.
    pub fn holds_bits(&self, bits: u32) -> bool {
        self.modulus >= BigUint::one() << bits
    }

    pub fn elem(&self, v: impl Into<BigUint>) -> RingElement {
        RingElement(v.into() % &self.modulus)
    }

    /// Accepts `v` only if it is already reduced.
    pub fn try_elem(&self, v: BigUint) -> Result<RingElement> {
        if v >= self.modulus {
            return Err(Error::decode("ring element out of range"));
        }
        Ok(RingElement(v))
    }

    pub fn contains(&self, a: &RingElement) -> bool {
        a.0 < self.modulus
    }

    pub fn zero(&self) -> RingElement {
        RingElement(BigUint::zero())
    }

    pub fn one(&self) -> RingElement {
        RingElement(BigUint::one())
    }

    pub fn add(&self, a: &RingElement, b: &RingElement) -> RingElement {
        RingElement((&a.0 + &b.0) % &self.modulus)
    }

    pub fn sub(&self, a: &RingElement, b: &RingElement) -> RingElement {
        if a.0 >= b.0 {
            RingElement(&a.0 - &b.0)
        } else {
            RingElement(&self.modulus - (&b.0 - &a.0))
        }
    }

    pub fn neg(&self, a: &RingElement) -> RingElement {
        self.sub(&self.zero(), a)
    }

    pub fn mul(&self, a: &RingElement, b: &RingElement) -> RingElement {
        RingElement((&a.0 * &b.0) % &self.modulus)
    }

    pub fn pow(&self, a: &RingElement, e: u64) -> RingElement {
        RingElement(a.0.modpow(&BigUint::from(e), &self.modulus))
    }

    /// Multiplicative inverse; fails when `gcd(a, N) != 1`.
    pub fn inv(&self, a: &RingElement) -> Result<RingElement> {
        a.0.modinv(&self.modulus)
            .map(RingElement)
            .ok_or(Error::NotInvertible)
    }

    /// Uniform element of the whole ring.
    pub fn random<R: RngCore + ?Sized>(&self, rng: &mut R) -> RingElement {
        RingElement(rng.gen_biguint_below(&self.modulus))
    }

    /// Uniform element of `Z_N \ {0}`.
    pub fn random_nonzero<R: RngCore + ?Sized>(&self, rng: &mut R) -> RingElement {
        loop {
            let r = self.random(rng);
            if !r.is_zero() {
                return r;
            }
        }
    }

    pub fn sum<'a>(&self, items: impl IntoIterator<Item = &'a RingElement>) -> RingElement {
        items.into_iter().fold(self.zero(), |acc, x| self.add(&acc, x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_mod_101() {
        let r = Ring::new(BigUint::from(101u32)).unwrap();
        let e = |v: u32| r.elem(v);
        assert_eq!(r.add(&e(100), &e(5)), e(4));
        assert_eq!(r.sub(&e(3), &e(5)), e(99));
        assert_eq!(r.neg(&e(2)), e(99));
        assert_eq!(r.mul(&e(50), &e(3)), e(49));
        assert_eq!(r.mul(&r.inv(&e(7)).unwrap(), &e(7)), e(1));
        assert!(r.inv(&e(0)).is_err());
        assert_eq!(r.pow(&e(2), 10), e(1024 % 101));
    }

    #[test]
    fn composite_ring_reports_non_invertible() {
        let r = Ring::new(BigUint::from(15u32)).unwrap();
        assert!(matches!(r.inv(&r.elem(5u32)), Err(Error::NotInvertible)));
        assert!(r.inv(&r.elem(4u32)).is_ok());
    }

    #[test]
    fn try_elem_rejects_unreduced() {
        let r = Ring::new(BigUint::from(101u32)).unwrap();
        assert!(r.try_elem(BigUint::from(101u32)).is_err());
        assert!(r.try_elem(BigUint::from(100u32)).is_ok());
    }
}
