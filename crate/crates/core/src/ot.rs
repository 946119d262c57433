//! 1-out-of-q oblivious transfer.
//!
//! The reference construction is a homomorphic selector: the receiver sends
//! encryptions of the unit vector `e_index` under its own key, the sender
//! answers with `sum_x E(e_index[x]) ·_h items[x]` re-randomised by a fresh
//! encryption of zero, and the receiver decrypts. Communication is `O(q)`
//! ciphertexts per transfer.

use rand_chacha::ChaCha20Rng;

use crate::channel::Channel;
use crate::codec::Writer;
use crate::error::{Error, Result};
use crate::homcrypt::{keygen_with_capacity, Backend, KeyPair, PublicKey, Ring, RingElement};

pub const OT_KEY: u8 = 0x40;
pub const OT_REQ: u8 = 0x41;
pub const OT_RESP: u8 = 0x42;

/// Party holding the `q` items.
pub trait OtSender {
    /// Ring the items must live in.
    fn ring(&self) -> &Ring;
    fn transfer(
        &mut self,
        chan: &mut Channel,
        items: &[RingElement],
        rng: &mut ChaCha20Rng,
    ) -> Result<()>;
}

/// Party choosing one index.
pub trait OtReceiver {
    fn receive(
        &mut self,
        chan: &mut Channel,
        index: usize,
        q: usize,
        rng: &mut ChaCha20Rng,
    ) -> Result<RingElement>;
}

pub struct HomSelectorReceiver {
    keys: KeyPair,
}

impl HomSelectorReceiver {
    /// Generates the receiver's key pair and sends its public half.
    pub fn setup(
        chan: &mut Channel,
        backend: Backend,
        modulus_bits: u32,
        security_bits: u32,
        rng: &mut ChaCha20Rng,
    ) -> Result<Self> {
        let keys = keygen_with_capacity(security_bits + 1, backend, modulus_bits, rng)?;
        let mut w = Writer::new();
        w.put_public_key(&keys.public);
        chan.send(OT_KEY, w)?;
        Ok(HomSelectorReceiver { keys })
    }
}

impl OtReceiver for HomSelectorReceiver {
    fn receive(
        &mut self,
        chan: &mut Channel,
        index: usize,
        q: usize,
        rng: &mut ChaCha20Rng,
    ) -> Result<RingElement> {
        if q < 2 {
            return Err(Error::param(format!("oblivious transfer needs q >= 2, got {q}")));
        }
        if index >= q {
            return Err(Error::param(format!("index {index} out of range for q = {q}")));
        }
        let pk = &self.keys.public;
        let mut w = Writer::new();
        w.put_len(q);
        for x in 0..q {
            w.put_ciphertext(&pk.encrypt_u64(u64::from(x == index), rng));
        }
        chan.send(OT_REQ, w)?;
        let reply = chan.recv_with(OT_RESP, |r| r.get_ciphertext(pk))?;
        chan.note_ot();
        self.keys.secret.decrypt(&reply)
    }
}

pub struct HomSelectorSender {
    pk: PublicKey,
}

impl HomSelectorSender {
    /// Receives the receiver's public key.
    pub fn setup(chan: &mut Channel) -> Result<Self> {
        let pk = chan.recv_with(OT_KEY, |r| r.get_public_key())?;
        Ok(HomSelectorSender { pk })
    }
}

impl OtSender for HomSelectorSender {
    fn ring(&self) -> &Ring {
        self.pk.ring()
    }

    fn transfer(
        &mut self,
        chan: &mut Channel,
        items: &[RingElement],
        rng: &mut ChaCha20Rng,
    ) -> Result<()> {
        let pk = &self.pk;
        if items.iter().any(|v| !pk.ring().contains(v)) {
            return Err(Error::param("OT item outside the receiver's ring"));
        }
        let selector = chan.recv_with(OT_REQ, |r| {
            let q = r.get_len(4)?;
            r.get_ciphertexts(pk, q)
        })?;
        if selector.len() != items.len() {
            return Err(Error::protocol(format!(
                "receiver asked for a {}-vector, sender holds {}",
                selector.len(),
                items.len()
            )));
        }
        let mut acc = pk.encrypt(&pk.ring().zero(), rng);
        for (c, item) in selector.iter().zip(items) {
            acc = pk.add(&acc, &pk.scalar_mul(c, item)?)?;
        }
        let mut w = Writer::new();
        w.put_ciphertext(&acc);
        chan.send(OT_RESP, w)?;
        chan.note_ot();
        Ok(())
    }
}
