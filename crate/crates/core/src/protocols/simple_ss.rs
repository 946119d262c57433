//! Simple secret-sharing protocol. The client sends its letters encrypted.
//! For every pair `(X_i, Y_j)` the server seals `Y_j` under a fresh key
//! `sk_j`, splits `sk_j` into `t`-of-`T` shares and returns, per position,
//! `(x_i^w - y_j^w)·r + [s]_w`: the share survives only where letters agree.

use crate::codec::Writer;
use crate::domain::{decode_word, encode_word, Combination, Word};
use crate::error::Result;
use crate::homcrypt::keygen_with_capacity;
use crate::lss::{share, Reconstructor, SharingParams};
use crate::symenc::{sym_dec, sym_enc, SymKey};

use super::{sharing_ring_bits, Found, Party};

const LETTERS: u8 = 0x10;
const FIND_MATCH: u8 = 0x11;

pub(super) fn client(party: &mut Party<'_>, words: &[Word]) -> Result<Found> {
    let params = party.params;
    let (t, big_t, k) = (params.threshold, params.word_len, params.security_bits);
    let keys = keygen_with_capacity(
        sharing_ring_bits(&params),
        party.cfg.backend,
        party.cfg.modulus_bits,
        &mut party.rng,
    )?;
    party.send_key(&keys.public)?;
    let (pk, sk) = (&keys.public, &keys.secret);
    let ring = pk.ring();

    let mut out = Writer::new();
    for x in words {
        for &letter in x.letters() {
            out.put_ciphertext(&pk.encrypt_u64(u64::from(letter), &mut party.rng));
        }
    }
    party.chan.send(LETTERS, out)?;

    let reconstructors = Combination::all(big_t, t)
        .iter()
        .map(|sigma| {
            let idx: Vec<u16> = sigma.positions().iter().map(|&w| w as u16 + 1).collect();
            Reconstructor::new(ring, &idx)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut found = Found::default();
    for x in words {
        for _ in 0..params.n_server {
            let (sealed, vs) = party.chan.recv_with(FIND_MATCH, |rd| {
                let sealed = rd.get_sealed()?;
                Ok((sealed, rd.get_ciphertexts(pk, big_t)?))
            })?;
            let shares = vs.iter().map(|c| sk.decrypt(c)).collect::<Result<Vec<_>>>()?;
            for rec in &reconstructors {
                found.reconstructions += 1;
                let z = rec.combine(ring, rec.indices().iter().map(|&i| &shares[i as usize - 1]));
                let Some(key) = SymKey::from_integer(z.value(), k) else {
                    continue;
                };
                let opened = sym_dec(&key, &sealed)?;
                let Some(word) = decode_word(&opened.value, &params) else {
                    found.false_candidates += 1;
                    continue;
                };
                if found.offer(word, std::slice::from_ref(x), t)? && party.cfg.early_exit {
                    break;
                }
            }
        }
    }
    Ok(found)
}

pub(super) fn server(party: &mut Party<'_>, words: &[Word]) -> Result<()> {
    let params = party.params;
    let (t, big_t, k) = (params.threshold, params.word_len, params.security_bits);
    let pk = party.recv_key(sharing_ring_bits(&params))?;
    let ring = pk.ring().clone();
    let letters = party
        .chan
        .recv_with(LETTERS, |rd| rd.get_ciphertexts(&pk, params.n_client * big_t))?;
    let sharing = SharingParams::new(t, big_t)?;

    for i in 0..params.n_client {
        let xs = &letters[i * big_t..(i + 1) * big_t];
        for y in words {
            let key = SymKey::generate(k, &mut party.rng)?;
            let sealed = sym_enc(&key, &encode_word(y, &params), &mut party.rng)?;
            let secret = ring.elem(key.to_integer());
            let shares = share(&ring, &secret, sharing, &[], &mut party.rng)?;
            let mut out = Writer::new();
            out.put_sealed(&sealed);
            for ((cx, &letter), s) in xs.iter().zip(y.letters()).zip(&shares) {
                let diff = pk.sub(cx, &pk.encrypt_u64(u64::from(letter), &mut party.rng))?;
                let r = party.blind(&ring)?;
                let v = pk.add(&pk.scalar_mul(&diff, &r)?, &pk.encrypt(&s.value, &mut party.rng))?;
                out.put_ciphertext(&v);
            }
            party.chan.send(FIND_MATCH, out)?;
        }
    }
    Ok(())
}
