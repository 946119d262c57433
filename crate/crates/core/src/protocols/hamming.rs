//! Agreement-count protocol. The server obtains encrypted per-position
//! equality indicators `eq(i, j, w)`, sums them into the agreement count
//! `A_ij`, and for every `ℓ` in `t..=T` returns `(A_ij - ℓ)·r + Y_j`.
//! Exactly one of these unblinds when `A_ij ≥ t`.
//!
//! The indicator is `E(1)` on equality. With `literal_polarity` the server
//! instead sums `f = E(1) - eq` into the distance `Δ = T - A` and uses `ℓ` in
//! `0..=T-t`; outputs and message counts are identical.
//!
//! Two subroutines build the indicator matrix: [`EqmVersion::V1`] sends the
//! unary encoding of every client letter; [`EqmVersion::V2`] runs one
//! oblivious transfer per `(i, j, w)` with the server as receiver.

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::codec::Writer;
use crate::domain::{decode_word, encode_word, FuzzyParams, Word};
use crate::error::{Error, Result};
use crate::homcrypt::{keygen, Backend, Ciphertext, PublicKey};
use crate::ot::{HomSelectorReceiver, HomSelectorSender, OtReceiver, OtSender};

use super::{Found, Party};

const UNARY: u8 = 0x10;
const EQ_BITS: u8 = 0x11;
const ANSWERS: u8 = 0x12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum EqmVersion {
    V1,
    V2,
}

impl EqmVersion {
    pub fn number(self) -> u8 {
        match self {
            EqmVersion::V1 => 1,
            EqmVersion::V2 => 2,
        }
    }
}

impl TryFrom<u8> for EqmVersion {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(EqmVersion::V1),
            2 => Ok(EqmVersion::V2),
            other => Err(Error::Usage(format!("equality-matrix version must be 1 or 2, got {other}"))),
        }
    }
}

impl From<EqmVersion> for u8 {
    fn from(v: EqmVersion) -> u8 {
        v.number()
    }
}

/// Encrypted indicators indexed `[i][j][w]`.
pub type EqMatrix = Vec<Vec<Vec<Ciphertext>>>;

/// Client side of the equality-matrix subroutine. `pk` is the client's key.
pub fn equality_matrix_client(
    chan: &mut Channel,
    version: EqmVersion,
    pk: &PublicKey,
    words: &[Word],
    params: &FuzzyParams,
    rng: &mut ChaCha20Rng,
) -> Result<()> {
    let domain = params.domain_size;
    match version {
        EqmVersion::V1 => {
            let mut out = Writer::new();
            for x in words {
                for &letter in x.letters() {
                    for v in 0..domain {
                        out.put_ciphertext(&pk.encrypt_u64(u64::from(v == letter), rng));
                    }
                }
            }
            chan.send(UNARY, out)
        }
        EqmVersion::V2 => {
            let mut sender = HomSelectorSender::setup(chan)?;
            let mut bits = Vec::with_capacity(words.len() * params.n_server * params.word_len);
            for x in words {
                for _ in 0..params.n_server {
                    for &letter in x.letters() {
                        let b: bool = rng.gen();
                        let ring = sender.ring().clone();
                        let h: Vec<_> = (0..domain)
                            .map(|v| ring.elem(u64::from((v == letter) ^ b)))
                            .collect();
                        sender.transfer(chan, &h, rng)?;
                        bits.push(b);
                    }
                }
            }
            let mut out = Writer::new();
            for b in bits {
                out.put_ciphertext(&pk.encrypt_u64(u64::from(b), rng));
            }
            chan.send(EQ_BITS, out)
        }
    }
}

/// Server side of the equality-matrix subroutine. `pk` is the client's key;
/// `backend` and `modulus_bits` configure the server's own transfer key.
#[allow(clippy::too_many_arguments)]
pub fn equality_matrix_server(
    chan: &mut Channel,
    version: EqmVersion,
    pk: &PublicKey,
    words: &[Word],
    params: &FuzzyParams,
    backend: Backend,
    modulus_bits: u32,
    rng: &mut ChaCha20Rng,
) -> Result<EqMatrix> {
    let (n_c, big_t, domain) = (params.n_client, params.word_len, params.domain_size as usize);
    match version {
        EqmVersion::V1 => {
            let unary = chan.recv_with(UNARY, |rd| rd.get_ciphertexts(pk, n_c * big_t * domain))?;
            Ok((0..n_c)
                .map(|i| {
                    words
                        .iter()
                        .map(|y| {
                            y.letters()
                                .iter()
                                .enumerate()
                                .map(|(w, &l)| unary[(i * big_t + w) * domain + l as usize].clone())
                                .collect()
                        })
                        .collect()
                })
                .collect())
        }
        EqmVersion::V2 => {
            let mut receiver =
                HomSelectorReceiver::setup(chan, backend, modulus_bits, params.security_bits, rng)?;
            let mut picked = Vec::with_capacity(n_c * words.len() * big_t);
            for _ in 0..n_c {
                for y in words {
                    for &l in y.letters() {
                        picked.push(!receiver.receive(chan, l as usize, domain, rng)?.is_zero());
                    }
                }
            }
            let bits = chan.recv_with(EQ_BITS, |rd| rd.get_ciphertexts(pk, picked.len()))?;
            let one = pk.encrypt_u64(1, rng);
            let mut flat = picked.into_iter().zip(bits).map(|(h, eb)| {
                if h {
                    pk.sub(&one, &eb)
                } else {
                    Ok(eb)
                }
            });
            let mut matrix = Vec::with_capacity(n_c);
            for _ in 0..n_c {
                let mut row = Vec::with_capacity(words.len());
                for _ in words {
                    row.push((&mut flat).take(big_t).collect::<Result<Vec<_>>>()?);
                }
                matrix.push(row);
            }
            Ok(matrix)
        }
    }
}

pub(super) fn client(party: &mut Party<'_>, words: &[Word]) -> Result<Found> {
    let params = party.params;
    let keys = keygen(&params, party.cfg.backend, party.cfg.modulus_bits, &mut party.rng)?;
    party.send_key(&keys.public)?;
    equality_matrix_client(party.chan, party.cfg.eqm, &keys.public, words, &params, &mut party.rng)?;

    let n = params.n_client * params.n_server * (params.word_len - params.threshold + 1);
    let answers = party
        .chan
        .recv_with(ANSWERS, |rd| rd.get_ciphertexts(&keys.public, n))?;
    let mut found = Found::default();
    for c in &answers {
        let v = keys.secret.decrypt(c)?;
        if let Some(word) = decode_word(v.value(), &params) {
            found.offer(word, words, params.threshold)?;
        }
    }
    Ok(found)
}

pub(super) fn server(party: &mut Party<'_>, words: &[Word]) -> Result<()> {
    let params = party.params;
    let (t, big_t) = (params.threshold, params.word_len);
    let pk = party.recv_key(params.required_ring_bits())?;
    let ring = pk.ring().clone();
    let eq = equality_matrix_server(
        party.chan,
        party.cfg.eqm,
        &pk,
        words,
        &params,
        party.cfg.backend,
        party.cfg.modulus_bits,
        &mut party.rng,
    )?;

    let one = pk.encrypt_u64(1, &mut party.rng);
    let mut out = Writer::new();
    for row in &eq {
        for (y, cells) in words.iter().zip(row) {
            let payload = ring.elem(encode_word(y, &params).value);
            let (count, range) = if party.cfg.literal_polarity {
                let f = cells
                    .iter()
                    .map(|c| pk.sub(&one, c))
                    .collect::<Result<Vec<_>>>()?;
                (pk.sum(&f)?, 0..=big_t - t)
            } else {
                (pk.sum(cells)?, t..=big_t)
            };
            for ell in range {
                let shifted = pk.sub(&count, &pk.encrypt_u64(ell as u64, &mut party.rng))?;
                let r = party.blind(&ring)?;
                let masked = pk.scalar_mul(&shifted, &r)?;
                out.put_ciphertext(&pk.add(&masked, &pk.encrypt(&payload, &mut party.rng))?);
            }
        }
    }
    party.chan.send(ANSWERS, out)
}
