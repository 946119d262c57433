//! Fast insecure backend over a prime field, for tests and large oracle
//! runs. A ciphertext is the pair `(u, a*m + b*u)` for a fresh random `u` and
//! secret field elements `a != 0`, `b`; both components are linear in the
//! plaintext, so every homomorphic identity holds exactly. The public key
//! carries one encryption of 1 and one of 0, and public encryption of `m` is
//! `m * E(1) + rho * E(0)` for a fresh nonzero `rho`.
//!
//! Anyone holding two ciphertexts can solve for the key; never use this
//! outside tests and benchmarks.

use num_bigint::BigUint;
use num_traits::One;
use rand::RngCore;

use super::ring::{Ring, RingElement};
use crate::error::{Error, Result};

/// Named Mersenne primes `2^e - 1`, smallest first.
pub const MERSENNE_EXPONENTS: [u32; 3] = [127, 521, 607];

pub fn mersenne(e: u32) -> BigUint {
    (BigUint::one() << e) - 1u32
}

/// Smallest named prime field holding every integer below `2^required_bits`.
pub fn field_for(required_bits: u32) -> Result<Ring> {
    MERSENNE_EXPONENTS
        .iter()
        .find(|&&e| e > required_bits)
        .map(|&e| Ring::new(mersenne(e)).expect("valid modulus"))
        .ok_or_else(|| {
            Error::param(format!(
                "no mock field large enough for {required_bits}-bit plaintexts"
            ))
        })
}

#[derive(Clone, Debug)]
pub struct MockSecret {
    pub(super) a_inv: RingElement,
    pub(super) a: RingElement,
    pub(super) b: RingElement,
}

impl MockSecret {
    pub fn generate<R: RngCore + ?Sized>(ring: &Ring, rng: &mut R) -> Self {
        let a = ring.random_nonzero(rng);
        let a_inv = ring.inv(&a).expect("prime field");
        MockSecret {
            a_inv,
            a,
            b: ring.random(rng),
        }
    }
}

fn shift(ring: &Ring) -> u64 {
    ring.bits()
}

pub fn pack(ring: &Ring, u: &RingElement, v: &RingElement) -> BigUint {
    (u.value() << shift(ring)) | v.value()
}

pub fn unpack(ring: &Ring, c: &BigUint) -> Result<(RingElement, RingElement)> {
    let mask = (BigUint::one() << shift(ring)) - 1u32;
    let u = ring.try_elem(c >> shift(ring))?;
    let v = ring.try_elem(c & mask)?;
    Ok((u, v))
}

pub fn encrypt<R: RngCore + ?Sized>(
    ring: &Ring,
    secret: &MockSecret,
    m: &RingElement,
    rng: &mut R,
) -> BigUint {
    let u = ring.random(rng);
    let v = ring.add(&ring.mul(&secret.a, m), &ring.mul(&secret.b, &u));
    pack(ring, &u, &v)
}

pub fn decrypt(ring: &Ring, secret: &MockSecret, c: &BigUint) -> Result<RingElement> {
    let (u, v) = unpack(ring, c)?;
    Ok(ring.mul(&ring.sub(&v, &ring.mul(&secret.b, &u)), &secret.a_inv))
}

pub fn add(ring: &Ring, c1: &BigUint, c2: &BigUint) -> Result<BigUint> {
    let (u1, v1) = unpack(ring, c1)?;
    let (u2, v2) = unpack(ring, c2)?;
    Ok(pack(ring, &ring.add(&u1, &u2), &ring.add(&v1, &v2)))
}

pub fn scalar_mul(ring: &Ring, c: &BigUint, s: &RingElement) -> Result<BigUint> {
    let (u, v) = unpack(ring, c)?;
    Ok(pack(ring, &ring.mul(&u, s), &ring.mul(&v, s)))
}

pub fn negate(ring: &Ring, c: &BigUint) -> Result<BigUint> {
    let (u, v) = unpack(ring, c)?;
    Ok(pack(ring, &ring.neg(&u), &ring.neg(&v)))
}
