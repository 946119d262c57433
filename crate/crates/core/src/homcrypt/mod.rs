//! Additively homomorphic public-key encryption.
//!
//! Two backends share one contract: [`Backend::Paillier`] is the real
//! scheme, [`Backend::Mock`] is a keyed linear map over a Mersenne prime
//! field that is fast but offers no security. Protocol code only touches
//! [`PublicKey`], [`SecretKey`] and [`Ciphertext`].

mod mock;
mod paillier;
mod ring;

use std::fmt;

use num_bigint::BigUint;
use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use mock::{mersenne, MERSENNE_EXPONENTS};
pub use ring::{Ring, RingElement};

use crate::codec::{Reader, Writer};
use crate::domain::FuzzyParams;
use crate::error::{Error, Result};
use mock::MockSecret;
use paillier::{PaillierPublic, PaillierSecret};

/// Default modulus size for real runs.
pub const DEFAULT_MODULUS_BITS: u32 = 2048;
/// Smaller modulus used by the real-crypto test profile.
pub const TEST_MODULUS_BITS: u32 = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Mock,
    Paillier,
}

impl Backend {
    pub fn tag(self) -> u8 {
        match self {
            Backend::Mock => 0x01,
            Backend::Paillier => 0x02,
        }
    }

    pub fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0x01 => Ok(Backend::Mock),
            0x02 => Ok(Backend::Paillier),
            other => Err(Error::decode(format!("unknown backend tag {other:#04x}"))),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Mock => "mock",
            Backend::Paillier => "paillier",
        })
    }
}

#[derive(Clone, Debug)]
enum PublicKind {
    /// Published encryptions of one and zero; see [`mock`].
    Mock { one: BigUint, zero: BigUint },
    Paillier(PaillierPublic),
}

#[derive(Clone, Debug)]
pub struct PublicKey {
    id: u64,
    ring: Ring,
    kind: PublicKind,
}

#[derive(Clone, Debug)]
enum SecretKind {
    Mock(MockSecret),
    Paillier(PaillierSecret),
}

#[derive(Clone, Debug)]
pub struct SecretKey {
    id: u64,
    ring: Ring,
    kind: SecretKind,
}

#[derive(Clone, Debug)]
pub struct KeyPair {
    pub public: PublicKey,
    pub secret: SecretKey,
}

/// A ciphertext bound to the key that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ciphertext {
    key_id: u64,
    value: BigUint,
}

impl Ciphertext {
    pub fn value(&self) -> &BigUint {
        &self.value
    }
}

/// Generates a key pair whose plaintext ring holds `p + k` bits for `params`.
pub fn keygen<R: RngCore + ?Sized>(
    params: &FuzzyParams,
    backend: Backend,
    modulus_bits: u32,
    rng: &mut R,
) -> Result<KeyPair> {
    keygen_with_capacity(params.required_ring_bits(), backend, modulus_bits, rng)
}

/// Generates a key pair whose plaintext ring order is at least
/// `2^required_bits`. The mock backend ignores `modulus_bits` and picks the
/// smallest named field that fits.
pub fn keygen_with_capacity<R: RngCore + ?Sized>(
    required_bits: u32,
    backend: Backend,
    modulus_bits: u32,
    rng: &mut R,
) -> Result<KeyPair> {
    match backend {
        Backend::Mock => {
            let ring = mock::field_for(required_bits)?;
            let secret = MockSecret::generate(&ring, rng);
            let id = rng.next_u64();
            let one = mock::encrypt(&ring, &secret, &ring.one(), rng);
            let zero = mock::encrypt(&ring, &secret, &ring.zero(), rng);
            Ok(KeyPair {
                public: PublicKey {
                    id,
                    ring: ring.clone(),
                    kind: PublicKind::Mock { one, zero },
                },
                secret: SecretKey {
                    id,
                    ring,
                    kind: SecretKind::Mock(secret),
                },
            })
        }
        Backend::Paillier => {
            if modulus_bits <= required_bits {
                return Err(Error::param(format!(
                    "{modulus_bits}-bit modulus cannot hold {required_bits}-bit plaintexts"
                )));
            }
            if modulus_bits < 256 || modulus_bits % 2 != 0 {
                return Err(Error::param(format!(
                    "Paillier modulus must be an even bit length of at least 256, got {modulus_bits}"
                )));
            }
            let half = (modulus_bits / 2) as usize;
            let (public, secret) = loop {
                let p = glass_pumpkin::prime::from_rng(half, rng)
                    .map_err(|e| Error::param(format!("prime generation: {e}")))?;
                let q = glass_pumpkin::prime::from_rng(half, rng)
                    .map_err(|e| Error::param(format!("prime generation: {e}")))?;
                if p == q || (&p * &q).bits() != u64::from(modulus_bits) {
                    continue;
                }
                break PaillierSecret::from_primes(p, q)?;
            };
            let ring = Ring::new(public.n.clone())?;
            let id = paillier_id(&public.n);
            Ok(KeyPair {
                public: PublicKey {
                    id,
                    ring: ring.clone(),
                    kind: PublicKind::Paillier(public),
                },
                secret: SecretKey {
                    id,
                    ring,
                    kind: SecretKind::Paillier(secret),
                },
            })
        }
    }
}

fn paillier_id(n: &BigUint) -> u64 {
    let digest = Sha256::digest(n.to_bytes_be());
    u64::from_be_bytes(digest[..8].try_into().expect("8 bytes"))
}

impl PublicKey {
    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn backend(&self) -> Backend {
        match self.kind {
            PublicKind::Mock { .. } => Backend::Mock,
            PublicKind::Paillier(_) => Backend::Paillier,
        }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    fn own(&self, c: &Ciphertext) -> Result<()> {
        if c.key_id != self.id {
            return Err(Error::KeyMismatch);
        }
        Ok(())
    }

    fn wrap(&self, value: BigUint) -> Ciphertext {
        Ciphertext {
            key_id: self.id,
            value,
        }
    }

    /// Encrypts with fresh randomness.
    pub fn encrypt<R: RngCore + ?Sized>(&self, m: &RingElement, rng: &mut R) -> Ciphertext {
        debug_assert!(self.ring.contains(m));
        let value = match &self.kind {
            PublicKind::Mock { one, zero } => {
                let rho = self.ring.random_nonzero(rng);
                let a = mock::scalar_mul(&self.ring, one, m).expect("own key material");
                let b = mock::scalar_mul(&self.ring, zero, &rho).expect("own key material");
                mock::add(&self.ring, &a, &b).expect("own key material")
            }
            PublicKind::Paillier(pk) => pk.encrypt(m, rng),
        };
        self.wrap(value)
    }

    pub fn encrypt_u64<R: RngCore + ?Sized>(&self, m: u64, rng: &mut R) -> Ciphertext {
        self.encrypt(&self.ring.elem(m), rng)
    }

    /// `E(a) +_h E(b) = E(a + b)`
    pub fn add(&self, c1: &Ciphertext, c2: &Ciphertext) -> Result<Ciphertext> {
        self.own(c1)?;
        self.own(c2)?;
        let value = match &self.kind {
            PublicKind::Mock { .. } => mock::add(&self.ring, &c1.value, &c2.value)?,
            PublicKind::Paillier(pk) => pk.add(&c1.value, &c2.value),
        };
        Ok(self.wrap(value))
    }

    /// `E(a) -_h E(b) = E(a - b)`
    pub fn sub(&self, c1: &Ciphertext, c2: &Ciphertext) -> Result<Ciphertext> {
        self.own(c2)?;
        let neg = match &self.kind {
            PublicKind::Mock { .. } => mock::negate(&self.ring, &c2.value)?,
            PublicKind::Paillier(pk) => pk.negate(&c2.value)?,
        };
        self.add(c1, &self.wrap(neg))
    }

    /// `E(a) ·_h s = E(a · s)`
    pub fn scalar_mul(&self, c: &Ciphertext, s: &RingElement) -> Result<Ciphertext> {
        self.own(c)?;
        let value = match &self.kind {
            PublicKind::Mock { .. } => mock::scalar_mul(&self.ring, &c.value, s)?,
            PublicKind::Paillier(pk) => pk.scalar_mul(&c.value, s),
        };
        Ok(self.wrap(value))
    }

    /// Homomorphic sum of a non-empty sequence.
    pub fn sum<'a>(&self, items: impl IntoIterator<Item = &'a Ciphertext>) -> Result<Ciphertext> {
        let mut iter = items.into_iter();
        let first = iter
            .next()
            .ok_or_else(|| Error::param("empty homomorphic sum"))?
            .clone();
        self.own(&first)?;
        iter.try_fold(first, |acc, c| self.add(&acc, c))
    }

    /// Rebinds a deserialized ciphertext to this key after range checks.
    pub fn ciphertext(&self, value: BigUint) -> Result<Ciphertext> {
        match &self.kind {
            PublicKind::Mock { .. } => {
                mock::unpack(&self.ring, &value)?;
            }
            PublicKind::Paillier(pk) => pk.check(&value)?,
        }
        Ok(self.wrap(value))
    }

    /// Backend tag byte followed by length-prefixed big-endian integers.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.put_u8(self.backend().tag());
        match &self.kind {
            PublicKind::Mock { one, zero } => {
                w.put_biguint(self.ring.modulus());
                w.put_biguint(&BigUint::from(self.id));
                w.put_biguint(one);
                w.put_biguint(zero);
            }
            PublicKind::Paillier(pk) => w.put_biguint(&pk.n),
        }
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let key = Self::read(&mut r)?;
        r.finish()?;
        Ok(key)
    }

    pub(crate) fn read(r: &mut Reader<'_>) -> Result<Self> {
        match Backend::from_tag(r.get_u8()?)? {
            Backend::Mock => {
                let modulus = r.get_biguint()?;
                let allowed = MERSENNE_EXPONENTS.iter().any(|&e| mersenne(e) == modulus);
                if !allowed {
                    return Err(Error::decode("mock key uses an unknown field"));
                }
                let id = u64::try_from(r.get_biguint()?)
                    .map_err(|_| Error::decode("mock key id out of range"))?;
                let ring = Ring::new(modulus)?;
                let one = r.get_biguint()?;
                let zero = r.get_biguint()?;
                mock::unpack(&ring, &one)?;
                mock::unpack(&ring, &zero)?;
                Ok(PublicKey {
                    id,
                    ring,
                    kind: PublicKind::Mock { one, zero },
                })
            }
            Backend::Paillier => {
                let n = r.get_biguint()?;
                if n.bits() < 256 {
                    return Err(Error::decode("Paillier modulus too small"));
                }
                Ok(PublicKey {
                    id: paillier_id(&n),
                    ring: Ring::new(n.clone())?,
                    kind: PublicKind::Paillier(PaillierPublic::new(n)),
                })
            }
        }
    }
}

impl SecretKey {
    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn decrypt(&self, c: &Ciphertext) -> Result<RingElement> {
        if c.key_id != self.id {
            return Err(Error::KeyMismatch);
        }
        match &self.kind {
            SecretKind::Mock(sk) => mock::decrypt(&self.ring, sk, &c.value),
            SecretKind::Paillier(sk) => Ok(self.ring.elem(sk.decrypt(&c.value))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn pairs() -> Vec<KeyPair> {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        vec![
            keygen_with_capacity(94, Backend::Mock, 0, &mut rng).unwrap(),
            keygen_with_capacity(94, Backend::Paillier, 512, &mut rng).unwrap(),
        ]
    }

    #[test]
    fn decrypts_what_it_encrypts() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        for kp in pairs() {
            let ring = kp.public.ring().clone();
            for m in [ring.zero(), ring.one(), ring.random(&mut rng), ring.neg(&ring.one())] {
                let c = kp.public.encrypt(&m, &mut rng);
                assert_eq!(kp.secret.decrypt(&c).unwrap(), m);
            }
        }
    }

    #[test]
    fn encryption_is_randomised() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for kp in pairs() {
            let a = kp.public.encrypt_u64(5, &mut rng);
            let b = kp.public.encrypt_u64(5, &mut rng);
            assert_ne!(a, b, "{}", kp.public.backend());
        }
    }

    #[test]
    fn homomorphic_identities() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        for kp in pairs() {
            let (pk, sk) = (&kp.public, &kp.secret);
            let ring = pk.ring().clone();
            for _ in 0..50 {
                let (a, b, s) = (ring.random(&mut rng), ring.random(&mut rng), ring.random(&mut rng));
                let (ca, cb) = (pk.encrypt(&a, &mut rng), pk.encrypt(&b, &mut rng));
                assert_eq!(sk.decrypt(&pk.add(&ca, &cb).unwrap()).unwrap(), ring.add(&a, &b));
                assert_eq!(sk.decrypt(&pk.sub(&ca, &cb).unwrap()).unwrap(), ring.sub(&a, &b));
                assert_eq!(sk.decrypt(&pk.scalar_mul(&ca, &s).unwrap()).unwrap(), ring.mul(&a, &s));
            }
            let xs: Vec<u64> = (0..5).map(|_| rng.gen_range(0..1000)).collect();
            let cs: Vec<_> = xs.iter().map(|&x| pk.encrypt_u64(x, &mut rng)).collect();
            let total = sk.decrypt(&pk.sum(&cs).unwrap()).unwrap();
            assert_eq!(total, ring.elem(xs.iter().sum::<u64>()));
            assert!(pk.sum(&[]).is_err());
        }
    }

    #[test]
    fn foreign_ciphertexts_are_rejected() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let a = keygen_with_capacity(80, Backend::Mock, 0, &mut rng).unwrap();
        let b = keygen_with_capacity(80, Backend::Mock, 0, &mut rng).unwrap();
        let ca = a.public.encrypt_u64(1, &mut rng);
        let cb = b.public.encrypt_u64(1, &mut rng);
        assert!(matches!(a.public.add(&ca, &cb), Err(Error::KeyMismatch)));
        assert!(matches!(b.secret.decrypt(&ca), Err(Error::KeyMismatch)));
        assert!(matches!(a.public.scalar_mul(&cb, &a.public.ring().one()), Err(Error::KeyMismatch)));
    }

    #[test]
    fn capacity_is_enforced() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let params = FuzzyParams::new(1, 1, 10, 2, 8, 64).unwrap();
        assert_eq!(params.required_ring_bits(), 94);
        assert!(matches!(keygen(&params, Backend::Paillier, 64, &mut rng), Err(Error::Param(_))));
        assert!(keygen(&params, Backend::Paillier, 255, &mut rng).is_err());
        let mock = keygen(&params, Backend::Mock, 0, &mut rng).unwrap();
        assert!(mock.public.ring().holds_bits(94));
        let big = keygen_with_capacity(200, Backend::Mock, 0, &mut rng).unwrap();
        assert_eq!(big.public.ring().modulus(), &mersenne(521));
        assert!(keygen_with_capacity(700, Backend::Mock, 0, &mut rng).is_err());
    }

    #[test]
    fn public_keys_roundtrip() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for kp in pairs() {
            let bytes = kp.public.to_bytes();
            let back = PublicKey::from_bytes(&bytes).unwrap();
            assert_eq!(back.id(), kp.public.id());
            assert_eq!(back.ring(), kp.public.ring());
            let c = back.encrypt_u64(42, &mut rng);
            assert_eq!(kp.secret.decrypt(&c).unwrap(), kp.public.ring().elem(42u32));
            assert!(PublicKey::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        }
        assert!(PublicKey::from_bytes(&[0x07]).is_err());
    }

    #[test]
    fn ciphertext_values_are_range_checked() {
        for kp in pairs() {
            let modulus = kp.public.ring().modulus().clone();
            let huge = &modulus * &modulus * &modulus * 4u32;
            assert!(kp.public.ciphertext(huge).is_err());
        }
    }
}
