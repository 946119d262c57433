//! Big-endian payload encoding. Integers are fixed width; big integers and
//! ring elements are a 4-byte length followed by their magnitude.
//!
//! Writers and readers tally the ciphertexts, clear ring values and sealed
//! blobs that pass through them so the channel can account for them.

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::homcrypt::{Ciphertext, PublicKey, Ring, RingElement};
use crate::symenc::SealedWord;

/// Protocol items carried by one payload.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ItemCounts {
    pub ciphertexts: u64,
    pub clear_values: u64,
    pub sealed: u64,
}

#[derive(Debug, Default)]
pub struct Writer {
    buf: Vec<u8>,
    counts: ItemCounts,
}

impl Writer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put_u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn put_u16(&mut self, v: u16) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    pub fn put_u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    pub fn put_u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    pub fn put_len(&mut self, n: usize) {
        self.put_u32(u32::try_from(n).expect("collection larger than 4 GiB"));
    }

    pub fn put_raw(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    pub fn put_biguint(&mut self, v: &BigUint) {
        let bytes = if v.bits() == 0 {
            Vec::new()
        } else {
            v.to_bytes_be()
        };
        self.put_len(bytes.len());
        self.buf.extend_from_slice(&bytes);
    }

    /// A ring element sent in the clear.
    pub fn put_ring(&mut self, v: &RingElement) {
        self.put_biguint(v.value());
        self.counts.clear_values += 1;
    }

    pub fn put_ciphertext(&mut self, c: &Ciphertext) {
        self.put_biguint(c.value());
        self.counts.ciphertexts += 1;
    }

    pub fn put_ciphertexts<'a>(&mut self, cs: impl IntoIterator<Item = &'a Ciphertext>) {
        for c in cs {
            self.put_ciphertext(c);
        }
    }

    pub fn put_sealed(&mut self, s: &SealedWord) {
        s.write(&mut self.buf);
        self.counts.sealed += 1;
    }

    pub fn put_public_key(&mut self, pk: &PublicKey) {
        self.buf.extend_from_slice(&pk.to_bytes());
    }

    pub fn counts(&self) -> ItemCounts {
        self.counts
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }

    pub(crate) fn into_parts(self) -> (Vec<u8>, ItemCounts) {
        (self.buf, self.counts)
    }
}

#[derive(Debug)]
pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    counts: ItemCounts,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Reader {
            buf,
            pos: 0,
            counts: ItemCounts::default(),
        }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::decode("payload truncated"))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    pub fn get_u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn get_u16(&mut self) -> Result<u16> {
        Ok(u16::from_be_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub fn get_u32(&mut self) -> Result<u32> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn get_u64(&mut self) -> Result<u64> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// A collection length, rejected if it could not possibly fit in the
    /// remaining payload at `min_item` bytes per element.
    pub fn get_len(&mut self, min_item: usize) -> Result<usize> {
        let n = self.get_u32()? as usize;
        if n.saturating_mul(min_item.max(1)) > self.remaining() {
            return Err(Error::decode(format!("length {n} exceeds payload")));
        }
        Ok(n)
    }

    pub fn get_biguint(&mut self) -> Result<BigUint> {
        let n = self.get_u32()? as usize;
        Ok(BigUint::from_bytes_be(self.take(n)?))
    }

    pub fn get_ring(&mut self, ring: &Ring) -> Result<RingElement> {
        let v = ring.try_elem(self.get_biguint()?)?;
        self.counts.clear_values += 1;
        Ok(v)
    }

    pub fn get_ciphertext(&mut self, pk: &PublicKey) -> Result<Ciphertext> {
        let c = pk.ciphertext(self.get_biguint()?)?;
        self.counts.ciphertexts += 1;
        Ok(c)
    }

    pub fn get_ciphertexts(&mut self, pk: &PublicKey, n: usize) -> Result<Vec<Ciphertext>> {
        (0..n).map(|_| self.get_ciphertext(pk)).collect()
    }

    pub fn get_sealed(&mut self) -> Result<SealedWord> {
        let s = SealedWord::read(self)?;
        self.counts.sealed += 1;
        Ok(s)
    }

    pub fn get_public_key(&mut self) -> Result<PublicKey> {
        PublicKey::read(self)
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub fn counts(&self) -> ItemCounts {
        self.counts
    }

    /// Fails if unread bytes remain.
    pub fn finish(&self) -> Result<ItemCounts> {
        if self.remaining() != 0 {
            return Err(Error::decode(format!("{} trailing bytes", self.remaining())));
        }
        Ok(self.counts)
    }
}
