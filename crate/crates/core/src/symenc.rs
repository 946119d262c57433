//! Per-word symmetric sealing.
//!
//! The cipher is a ChaCha20 keystream seeded with `SHA-256(key || nonce)`
//! and XORed over the big-endian payload bytes. It is unauthenticated:
//! decrypting under the wrong key yields uniformly random bytes, which the
//! callers reject through the zero-prefix and word-decoding checks.

use num_bigint::BigUint;
use num_traits::One;
use rand::{CryptoRng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::codec::Reader;
use crate::domain::PayloadEncoding;
use crate::error::{Error, Result};

pub const NONCE_LEN: usize = 16;
/// Upper bound on sealed payload width.
pub const MAX_PAYLOAD_BITS: u32 = 1 << 20;

/// A `k`-bit key, stored big-endian in `ceil(k/8)` bytes.
#[derive(Clone, PartialEq, Eq)]
pub struct SymKey {
    bytes: Vec<u8>,
    bits: u32,
}

impl std::fmt::Debug for SymKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SymKey({} bits)", self.bits)
    }
}

impl SymKey {
    pub fn generate<R: RngCore + CryptoRng + ?Sized>(bits: u32, rng: &mut R) -> Result<Self> {
        if bits == 0 {
            return Err(Error::param("key length must be positive"));
        }
        let mut bytes = vec![0u8; bits.div_ceil(8) as usize];
        rng.fill_bytes(&mut bytes);
        let spare = bytes.len() as u32 * 8 - bits;
        bytes[0] &= 0xff >> spare;
        Ok(SymKey { bytes, bits })
    }

    /// Interprets a reconstructed secret as a key; `None` if it does not fit
    /// in `bits` bits (the zero-prefix check).
    pub fn from_integer(z: &BigUint, bits: u32) -> Option<Self> {
        if z.bits() > u64::from(bits) {
            return None;
        }
        let len = bits.div_ceil(8) as usize;
        let raw = z.to_bytes_be();
        let mut bytes = vec![0u8; len];
        if !(raw.len() == 1 && raw[0] == 0) {
            bytes[len - raw.len()..].copy_from_slice(&raw);
        }
        Some(SymKey { bytes, bits })
    }

    pub fn to_integer(&self) -> BigUint {
        BigUint::from_bytes_be(&self.bytes)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    fn keystream(&self, nonce: &[u8], len: usize) -> Vec<u8> {
        let mut h = Sha256::new();
        h.update(&self.bytes);
        h.update(nonce);
        let mut rng = ChaCha20Rng::from_seed(h.finalize().into());
        let mut out = vec![0u8; len];
        rng.fill_bytes(&mut out);
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SealedWord {
    pub nonce: Vec<u8>,
    pub body: Vec<u8>,
}

impl SealedWord {
    /// 1-byte nonce length, nonce, 4-byte body length, body.
    pub fn write(&self, out: &mut Vec<u8>) {
        out.push(self.nonce.len() as u8);
        out.extend_from_slice(&self.nonce);
        out.extend_from_slice(&(self.body.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.body);
    }

    pub fn read(r: &mut Reader<'_>) -> Result<Self> {
        let nonce_len = r.get_u8()? as usize;
        let nonce = r.take(nonce_len)?.to_vec();
        let body_len = r.get_u32()? as usize;
        let body = r.take(body_len)?.to_vec();
        if body.is_empty() {
            return Err(Error::decode("sealed word has an empty body"));
        }
        Ok(SealedWord { nonce, body })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write(&mut out);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let s = Self::read(&mut r)?;
        r.finish()?;
        Ok(s)
    }
}

/// Seals the `ceil(width/8)`-byte big-endian image of `payload`.
pub fn sym_enc<R: RngCore + CryptoRng + ?Sized>(
    key: &SymKey,
    payload: &PayloadEncoding,
    rng: &mut R,
) -> Result<SealedWord> {
    if payload.width == 0 || payload.width > MAX_PAYLOAD_BITS {
        return Err(Error::param(format!("payload width {} unsupported", payload.width)));
    }
    if !payload.prefix_ok() {
        return Err(Error::param("payload exceeds its declared width"));
    }
    let len = payload.width.div_ceil(8) as usize;
    let raw = payload.value.to_bytes_be();
    let mut body = vec![0u8; len];
    if payload.value.bits() > 0 {
        body[len - raw.len()..].copy_from_slice(&raw);
    }
    let mut nonce = vec![0u8; NONCE_LEN];
    rng.fill_bytes(&mut nonce);
    for (b, k) in body.iter_mut().zip(key.keystream(&nonce, len)) {
        *b ^= k;
    }
    Ok(SealedWord { nonce, body })
}

/// Opens a sealed word. Under a wrong key the result is garbage spanning the
/// full container width; callers must validate it.
pub fn sym_dec(key: &SymKey, sealed: &SealedWord) -> Result<PayloadEncoding> {
    if sealed.body.is_empty() {
        return Err(Error::decode("sealed word has an empty body"));
    }
    let stream = key.keystream(&sealed.nonce, sealed.body.len());
    let plain: Vec<u8> = sealed.body.iter().zip(stream).map(|(b, k)| b ^ k).collect();
    Ok(PayloadEncoding {
        value: BigUint::from_bytes_be(&plain),
        width: sealed.body.len() as u32 * 8,
    })
}

/// True when `v < 2^bits`.
pub fn fits(v: &BigUint, bits: u32) -> bool {
    v < &(BigUint::one() << bits)
}
