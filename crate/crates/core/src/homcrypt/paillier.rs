//! Paillier encryption with generator `g = N + 1` and CRT decryption.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::RngCore;

use super::ring::{Ring, RingElement};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct PaillierPublic {
    pub(super) n: BigUint,
    pub(super) n_squared: BigUint,
}

#[derive(Clone, Debug)]
pub struct PaillierSecret {
    p: BigUint,
    q: BigUint,
    p_squared: BigUint,
    q_squared: BigUint,
    /// `L_p(g^(p-1) mod p^2)^-1 mod p`
    h_p: BigUint,
    h_q: BigUint,
    /// `q^-1 mod p`
    q_inv: BigUint,
}

impl PaillierPublic {
    pub fn new(n: BigUint) -> Self {
        let n_squared = &n * &n;
        PaillierPublic { n, n_squared }
    }

    pub fn encrypt<R: RngCore + ?Sized>(&self, m: &RingElement, rng: &mut R) -> BigUint {
        let ring = Ring::new(self.n.clone()).expect("valid modulus");
        let r = loop {
            let r = ring.random_nonzero(rng);
            if r.value().gcd(&self.n).is_one() {
                break r;
            }
        };
        let gm = (BigUint::one() + m.value() * &self.n) % &self.n_squared;
        gm * r.value().modpow(&self.n, &self.n_squared) % &self.n_squared
    }

    pub fn add(&self, c1: &BigUint, c2: &BigUint) -> BigUint {
        c1 * c2 % &self.n_squared
    }

    pub fn scalar_mul(&self, c: &BigUint, s: &RingElement) -> BigUint {
        c.modpow(s.value(), &self.n_squared)
    }

    pub fn negate(&self, c: &BigUint) -> Result<BigUint> {
        c.modinv(&self.n_squared).ok_or(Error::NotInvertible)
    }

    pub fn check(&self, c: &BigUint) -> Result<()> {
        if c.is_zero() || c >= &self.n_squared {
            return Err(Error::decode("ciphertext outside Z*_{N^2}"));
        }
        Ok(())
    }
}

fn l_function(x: &BigUint, d: &BigUint) -> BigUint {
    (x - 1u32) / d
}

impl PaillierSecret {
    pub fn from_primes(p: BigUint, q: BigUint) -> Result<(PaillierPublic, Self)> {
        if p == q {
            return Err(Error::param("Paillier primes must differ"));
        }
        let n = &p * &q;
        let public = PaillierPublic::new(n.clone());
        let g = &n + 1u32;
        let p_squared = &p * &p;
        let q_squared = &q * &q;
        let h = |prime: &BigUint, sq: &BigUint| -> Result<BigUint> {
            let e = prime - 1u32;
            l_function(&g.modpow(&e, sq), prime)
                .modinv(prime)
                .ok_or(Error::NotInvertible)
        };
        let h_p = h(&p, &p_squared)?;
        let h_q = h(&q, &q_squared)?;
        let q_inv = q.modinv(&p).ok_or(Error::NotInvertible)?;
        Ok((
            public,
            PaillierSecret {
                p,
                q,
                p_squared,
                q_squared,
                h_p,
                h_q,
                q_inv,
            },
        ))
    }

    pub fn decrypt(&self, c: &BigUint) -> BigUint {
        let part = |prime: &BigUint, sq: &BigUint, h: &BigUint| {
            let e = prime - 1u32;
            l_function(&c.modpow(&e, sq), prime) * h % prime
        };
        let m_p = part(&self.p, &self.p_squared, &self.h_p);
        let m_q = part(&self.q, &self.q_squared, &self.h_q);
        // m = m_q + q * ((m_p - m_q) * q^-1 mod p)
        let diff = (&m_p + &self.p - (&m_q % &self.p)) % &self.p;
        m_q + &self.q * (diff * &self.q_inv % &self.p)
    }
}
