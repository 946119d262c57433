//! Shamir `d`-out-of-`m` sharing over the plaintext ring. The secret sits at
//! `x = 0`, share `i` at `x = i` for `i` in `1..=m`.
//!
//! [`share`] can pin some shares to given values before the remaining
//! degrees of freedom are drawn at random; the secret-sharing protocols
//! need this so that equal letters of different server words carry equal
//! shares.

use std::collections::BTreeSet;

use rand::RngCore;

use crate::codec::{Reader, Writer};
use crate::encpoly::{interpolate, Polynomial};
use crate::error::{Error, Result};
use crate::homcrypt::{Ring, RingElement};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SharingParams {
    /// Shares needed to reconstruct (`d`).
    pub threshold: usize,
    /// Shares handed out (`m`).
    pub total: usize,
}

impl SharingParams {
    pub fn new(threshold: usize, total: usize) -> Result<Self> {
        if threshold < 1 || threshold > total {
            return Err(Error::param(format!(
                "sharing threshold {threshold} must lie in [1, {total}]"
            )));
        }
        if total > u16::MAX as usize {
            return Err(Error::param("too many shares"));
        }
        Ok(SharingParams { threshold, total })
    }

    fn check_ring(&self, ring: &Ring) -> Result<()> {
        if ring.modulus() <= &num_bigint::BigUint::from(self.total) {
            return Err(Error::param("ring too small for share indices"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Share {
    pub index: u16,
    pub value: RingElement,
}

impl Share {
    pub fn new(index: u16, value: RingElement) -> Self {
        Share { index, value }
    }

    /// 2-byte index followed by the length-prefixed value.
    pub fn write(&self, w: &mut Writer) {
        w.put_u16(self.index);
        w.put_ring(&self.value);
    }

    pub fn read(r: &mut Reader<'_>, ring: &Ring) -> Result<Self> {
        let index = r.get_u16()?;
        if index == 0 {
            return Err(Error::decode("share index 0 is reserved for the secret"));
        }
        Ok(Share {
            index,
            value: r.get_ring(ring)?,
        })
    }
}

/// Shares `secret` so that `fixed[i]` lands at index `i`. With no fixed
/// entries this is plain Shamir sharing.
pub fn share<R: RngCore + ?Sized>(
    ring: &Ring,
    secret: &RingElement,
    params: SharingParams,
    fixed: &[(u16, RingElement)],
    rng: &mut R,
) -> Result<Vec<Share>> {
    params.check_ring(ring)?;
    if fixed.len() >= params.threshold {
        return Err(Error::OverConstrained {
            fixed: fixed.len(),
            threshold: params.threshold,
        });
    }
    let mut used = BTreeSet::new();
    for (i, _) in fixed {
        if *i == 0 || *i as usize > params.total {
            return Err(Error::param(format!("fixed index {i} outside [1, {}]", params.total)));
        }
        if !used.insert(*i) {
            return Err(Error::param(format!("fixed index {i} given twice")));
        }
    }

    let mut points = Vec::with_capacity(params.threshold);
    points.push((ring.zero(), secret.clone()));
    points.extend(fixed.iter().map(|(i, v)| (ring.elem(u64::from(*i)), v.clone())));
    let free = (1..=params.total as u16).filter(|i| !used.contains(i));
    for i in free.take(params.threshold - points.len()) {
        points.push((ring.elem(u64::from(i)), ring.random(rng)));
    }
    let poly = interpolate(ring, &points)?;
    Ok(shares_of(ring, &poly, params.total))
}

/// Evaluates `poly` at `1..=total`.
pub fn shares_of(ring: &Ring, poly: &Polynomial, total: usize) -> Vec<Share> {
    (1..=total as u16)
        .map(|i| Share::new(i, poly.eval(ring, &ring.elem(u64::from(i)))))
        .collect()
}

/// Lagrange weights at zero for a fixed set of indices; reusable across many
/// reconstructions on the same index set.
#[derive(Clone, Debug)]
pub struct Reconstructor {
    indices: Vec<u16>,
    weights: Vec<RingElement>,
}

impl Reconstructor {
    pub fn new(ring: &Ring, indices: &[u16]) -> Result<Self> {
        let distinct: BTreeSet<_> = indices.iter().collect();
        if distinct.len() != indices.len() {
            return Err(Error::param("duplicate share indices"));
        }
        if indices.contains(&0) {
            return Err(Error::param("share index 0 is reserved for the secret"));
        }
        let xs: Vec<RingElement> = indices.iter().map(|&i| ring.elem(u64::from(i))).collect();
        let mut weights = Vec::with_capacity(xs.len());
        for (i, xi) in xs.iter().enumerate() {
            let mut num = ring.one();
            let mut den = ring.one();
            for (j, xj) in xs.iter().enumerate() {
                if i != j {
                    num = ring.mul(&num, xj);
                    den = ring.mul(&den, &ring.sub(xj, xi));
                }
            }
            weights.push(ring.mul(&num, &ring.inv(&den)?));
        }
        Ok(Reconstructor {
            indices: indices.to_vec(),
            weights,
        })
    }

    pub fn indices(&self) -> &[u16] {
        &self.indices
    }

    /// Secret from values given in the order of [`Self::indices`].
    pub fn combine<'a>(
        &self,
        ring: &Ring,
        values: impl IntoIterator<Item = &'a RingElement>,
    ) -> RingElement {
        let mut acc = ring.zero();
        let mut n = 0;
        for (w, v) in self.weights.iter().zip(values) {
            acc = ring.add(&acc, &ring.mul(w, v));
            n += 1;
        }
        debug_assert_eq!(n, self.weights.len());
        acc
    }
}

/// Interpolates at zero from exactly the first `d` shares given.
pub fn reconstruct(ring: &Ring, shares: &[Share], params: SharingParams) -> Result<RingElement> {
    if shares.len() < params.threshold {
        return Err(Error::param(format!(
            "{} shares given, {} needed",
            shares.len(),
            params.threshold
        )));
    }
    let used = &shares[..params.threshold];
    let indices: Vec<u16> = used.iter().map(|s| s.index).collect();
    let rec = Reconstructor::new(ring, &indices)?;
    Ok(rec.combine(ring, used.iter().map(|s| &s.value)))
}

/// Pointwise sum of two sharings on the same indices.
pub fn add_sharewise(ring: &Ring, a: &[Share], b: &[Share]) -> Result<Vec<Share>> {
    if a.len() != b.len() {
        return Err(Error::param("share vectors differ in length"));
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            if x.index != y.index {
                return Err(Error::param(format!(
                    "share index mismatch: {} vs {}",
                    x.index, y.index
                )));
            }
            Ok(Share::new(x.index, ring.add(&x.value, &y.value)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn z101() -> Ring {
        Ring::new(BigUint::from(101u32)).unwrap()
    }

    #[test]
    fn pinned_linear_polynomial() {
        let r = z101();
        let f = Polynomial::new(vec![r.elem(5u32), r.elem(3u32)]).unwrap();
        let shares = shares_of(&r, &f, 3);
        let values: Vec<_> = shares.iter().map(|s| (s.index, s.value.clone())).collect();
        assert_eq!(
            values,
            vec![(1, r.elem(8u32)), (2, r.elem(11u32)), (3, r.elem(14u32))]
        );
        let params = SharingParams::new(2, 3).unwrap();
        let subset = [shares[0].clone(), shares[2].clone()];
        assert_eq!(reconstruct(&r, &subset, params).unwrap(), r.elem(5u32));
    }

    #[test]
    fn fixed_share_is_honoured() {
        let r = z101();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let params = SharingParams::new(2, 3).unwrap();
        let shares = share(&r, &r.elem(5u32), params, &[(1, r.elem(8u32))], &mut rng).unwrap();
        assert_eq!(shares[0], Share::new(1, r.elem(8u32)));
        for pair in [[0, 1], [0, 2], [1, 2]] {
            let sub = [shares[pair[0]].clone(), shares[pair[1]].clone()];
            assert_eq!(reconstruct(&r, &sub, params).unwrap(), r.elem(5u32));
        }
    }

    #[test]
    fn constraint_errors() {
        let r = z101();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let params = SharingParams::new(2, 3).unwrap();
        let s = r.elem(1u32);
        let over = [(1, r.elem(1u32)), (2, r.elem(2u32))];
        assert!(matches!(
            share(&r, &s, params, &over, &mut rng),
            Err(Error::OverConstrained { fixed: 2, threshold: 2 })
        ));
        let params = SharingParams::new(3, 4).unwrap();
        let dup = [(1, r.elem(1u32)), (1, r.elem(2u32))];
        assert!(matches!(share(&r, &s, params, &dup, &mut rng), Err(Error::Param(_))));
        assert!(share(&r, &s, params, &[(5, r.elem(1u32))], &mut rng).is_err());
    }

    #[test]
    fn reconstruct_rejects_duplicates() {
        let r = z101();
        let params = SharingParams::new(2, 3).unwrap();
        let dup = [Share::new(1, r.elem(8u32)), Share::new(1, r.elem(8u32))];
        assert!(matches!(reconstruct(&r, &dup, params), Err(Error::Param(_))));
    }

    #[test]
    fn sharewise_addition() {
        let r = z101();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let params = SharingParams::new(3, 5).unwrap();
        let a = share(&r, &r.elem(3u32), params, &[], &mut rng).unwrap();
        let b = share(&r, &r.elem(4u32), params, &[], &mut rng).unwrap();
        let zero = share(&r, &r.zero(), params, &[], &mut rng).unwrap();
        let sum = add_sharewise(&r, &a, &b).unwrap();
        assert_eq!(reconstruct(&r, &sum[2..], params).unwrap(), r.elem(7u32));
        let same = add_sharewise(&r, &a, &zero).unwrap();
        assert_eq!(reconstruct(&r, &same, params).unwrap(), r.elem(3u32));
        assert!(add_sharewise(&r, &a[..2], &b[1..3]).is_err());
    }
}
