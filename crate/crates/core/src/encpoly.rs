//! Polynomials over the plaintext ring, and polynomials whose coefficients
//! are encrypted under an additively homomorphic key.

use rand::RngCore;

use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::homcrypt::{Ciphertext, PublicKey, Ring, RingElement};

/// Coefficients `[a_0, .., a_n]`, lowest degree first. The degree is
/// structural: trailing zeros are kept.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    coeffs: Vec<RingElement>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<RingElement>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::param("polynomial needs at least one coefficient"));
        }
        Ok(Polynomial { coeffs })
    }

    pub fn coeffs(&self) -> &[RingElement] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Horner evaluation.
    pub fn eval(&self, ring: &Ring, x: &RingElement) -> RingElement {
        self.coeffs
            .iter()
            .rev()
            .fold(ring.zero(), |acc, c| ring.add(&ring.mul(&acc, x), c))
    }
}

pub fn eval_plain(ring: &Ring, p: &Polynomial, x: &RingElement) -> RingElement {
    p.eval(ring, x)
}

/// Monic `(x - r_1)(x - r_2)...(x - r_n)`.
pub fn roots_poly(ring: &Ring, roots: &[RingElement]) -> Result<Polynomial> {
    if roots.is_empty() {
        return Err(Error::param("roots_poly needs at least one root"));
    }
    let mut coeffs = vec![ring.one()];
    for r in roots {
        coeffs = mul_linear(ring, &coeffs, r);
    }
    Polynomial::new(coeffs)
}

/// `p(x) * (x - r)`
fn mul_linear(ring: &Ring, p: &[RingElement], r: &RingElement) -> Vec<RingElement> {
    let mut out = vec![ring.zero(); p.len() + 1];
    for (i, c) in p.iter().enumerate() {
        out[i + 1] = ring.add(&out[i + 1], c);
        out[i] = ring.sub(&out[i], &ring.mul(c, r));
    }
    out
}

/// `p(x) / (x - r)`, assuming `r` is a root (synthetic division).
fn div_linear(ring: &Ring, p: &[RingElement], r: &RingElement) -> Vec<RingElement> {
    let n = p.len() - 1;
    let mut out = vec![ring.zero(); n];
    let mut carry = ring.zero();
    for i in (1..=n).rev() {
        carry = ring.add(&p[i], &ring.mul(&carry, r));
        out[i - 1] = carry.clone();
    }
    out
}

/// Lagrange interpolation through `points`. Repeated points with equal
/// values are merged; repeated x-coordinates with different values make the
/// polynomial undefined.
pub fn interpolate(ring: &Ring, points: &[(RingElement, RingElement)]) -> Result<Polynomial> {
    let mut unique: Vec<&(RingElement, RingElement)> = Vec::with_capacity(points.len());
    for p in points {
        match unique.iter().find(|q| q.0 == p.0) {
            Some(q) if q.1 != p.1 => return Err(Error::UndefinedInterpolation),
            Some(_) => {}
            None => unique.push(p),
        }
    }
    if unique.is_empty() {
        return Err(Error::param("interpolation needs at least one point"));
    }
    let xs: Vec<RingElement> = unique.iter().map(|p| p.0.clone()).collect();
    let master = roots_poly(ring, &xs)?;
    let mut acc = vec![ring.zero(); unique.len()];
    for (xi, yi) in unique.iter().map(|p| (&p.0, &p.1)) {
        let basis = div_linear(ring, master.coeffs(), xi);
        let denom = Polynomial { coeffs: basis.clone() }.eval(ring, xi);
        let scale = ring.mul(yi, &ring.inv(&denom)?);
        for (a, b) in acc.iter_mut().zip(&basis) {
            *a = ring.add(a, &ring.mul(b, &scale));
        }
    }
    Polynomial::new(acc)
}

/// Encrypted coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncryptedPolynomial {
    coeffs: Vec<Ciphertext>,
}

impl EncryptedPolynomial {
    pub fn coeffs(&self) -> &[Ciphertext] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// 2-byte coefficient count followed by the ciphertexts.
    pub fn write(&self, w: &mut Writer) {
        w.put_u16(u16::try_from(self.coeffs.len()).expect("degree below 65535"));
        w.put_ciphertexts(&self.coeffs);
    }

    pub fn read(r: &mut Reader<'_>, pk: &PublicKey) -> Result<Self> {
        let n = r.get_u16()? as usize;
        if n == 0 {
            return Err(Error::decode("encrypted polynomial without coefficients"));
        }
        Ok(EncryptedPolynomial {
            coeffs: r.get_ciphertexts(pk, n)?,
        })
    }
}

pub fn enc_poly<R: RngCore + ?Sized>(
    pk: &PublicKey,
    p: &Polynomial,
    rng: &mut R,
) -> EncryptedPolynomial {
    EncryptedPolynomial {
        coeffs: p.coeffs.iter().map(|c| pk.encrypt(c, rng)).collect(),
    }
}

/// `{p(x)} = sum_h {a_i} ·_h x^i`, with plaintext powers of `x`.
pub fn eval_encrypted(
    pk: &PublicKey,
    ep: &EncryptedPolynomial,
    x: &RingElement,
) -> Result<Ciphertext> {
    let ring = pk.ring();
    let mut power = ring.one();
    let mut terms = Vec::with_capacity(ep.coeffs.len());
    for c in &ep.coeffs {
        terms.push(pk.scalar_mul(c, &power)?);
        power = ring.mul(&power, x);
    }
    pk.sum(&terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    fn z101() -> Ring {
        Ring::new(BigUint::from(101u32)).unwrap()
    }

    fn elems(ring: &Ring, vs: &[u32]) -> Vec<RingElement> {
        vs.iter().map(|&v| ring.elem(v)).collect()
    }

    #[test]
    fn line_through_two_points() {
        let r = z101();
        let pts = [(r.elem(1u32), r.elem(8u32)), (r.elem(3u32), r.elem(14u32))];
        let p = interpolate(&r, &pts).unwrap();
        assert_eq!(p.coeffs(), elems(&r, &[5, 3]).as_slice());
    }

    #[test]
    fn conflicting_points_are_undefined() {
        let r = z101();
        let pts = [(r.elem(1u32), r.elem(8u32)), (r.elem(1u32), r.elem(9u32))];
        assert!(matches!(interpolate(&r, &pts), Err(Error::UndefinedInterpolation)));
        let same = [(r.elem(1u32), r.elem(8u32)), (r.elem(1u32), r.elem(8u32))];
        assert_eq!(interpolate(&r, &same).unwrap().coeffs(), elems(&r, &[8]).as_slice());
    }

    #[test]
    fn non_invertible_difference_is_a_ring_error() {
        let r = Ring::new(BigUint::from(15u32)).unwrap();
        let pts = [(r.elem(0u32), r.elem(1u32)), (r.elem(5u32), r.elem(2u32))];
        assert!(matches!(interpolate(&r, &pts), Err(Error::NotInvertible)));
    }

    #[test]
    fn roots_expansion() {
        let r = z101();
        assert_eq!(roots_poly(&r, &elems(&r, &[2])).unwrap().coeffs(), elems(&r, &[99, 1]).as_slice());
        assert_eq!(
            roots_poly(&r, &elems(&r, &[1, 2])).unwrap().coeffs(),
            elems(&r, &[2, 98, 1]).as_slice()
        );
        assert!(roots_poly(&r, &[]).is_err());
    }

    #[test]
    fn horner_examples() {
        let r = z101();
        let p = Polynomial::new(elems(&r, &[5, 3])).unwrap();
        assert_eq!(eval_plain(&r, &p, &r.elem(2u32)), r.elem(11u32));
        assert_eq!(eval_plain(&r, &p, &r.zero()), r.elem(5u32));
        assert!(Polynomial::new(vec![]).is_err());
    }
}
