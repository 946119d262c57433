//! Polynomial protocol: for every choice `σ` of `t` positions the client
//! sends an encrypted polynomial whose roots are `σ(X_1), .., σ(X_n)`. The
//! server evaluates it at `σ(Y_j)` and returns `r·P_σ(σ(Y_j)) + Y_j`, which
//! decrypts to `Y_j` exactly when some client word agrees with `Y_j` on `σ`.

use crate::codec::Writer;
use crate::domain::{decode_word, encode_word, select, Combination, Word};
use crate::encpoly::{enc_poly, eval_encrypted, roots_poly, EncryptedPolynomial};
use crate::error::{Error, Result};
use crate::homcrypt::keygen;

use super::{Found, Party};

const POLYS: u8 = 0x10;
const ANSWERS: u8 = 0x11;

pub(super) fn client(party: &mut Party<'_>, words: &[Word]) -> Result<Found> {
    let params = party.params;
    let keys = keygen(&params, party.cfg.backend, party.cfg.modulus_bits, &mut party.rng)?;
    party.send_key(&keys.public)?;
    let ring = keys.public.ring();

    let combos = Combination::all(params.word_len, params.threshold);
    let mut out = Writer::new();
    for sigma in &combos {
        let roots: Vec<_> = words
            .iter()
            .map(|x| ring.elem(select(sigma, x, &params).value))
            .collect();
        let poly = roots_poly(ring, &roots)?;
        enc_poly(&keys.public, &poly, &mut party.rng).write(&mut out);
    }
    party.chan.send(POLYS, out)?;

    let n = combos.len() * params.n_server;
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
    let pk = party.recv_key(params.required_ring_bits())?;
    let ring = pk.ring().clone();
    let combos = Combination::all(params.word_len, params.threshold);
    let polys = party.chan.recv_with(POLYS, |rd| {
        (0..combos.len())
            .map(|_| EncryptedPolynomial::read(rd, &pk))
            .collect::<Result<Vec<_>>>()
    })?;
    if polys.iter().any(|p| p.degree() != params.n_client) {
        return Err(Error::protocol("polynomial degree differs from the client set size"));
    }

    let mut out = Writer::new();
    for y in words {
        let payload = ring.elem(encode_word(y, &params).value);
        for (sigma, poly) in combos.iter().zip(&polys) {
            let at = ring.elem(select(sigma, y, &params).value);
            let r = party.blind(&ring)?;
            let masked = pk.scalar_mul(&eval_encrypted(&pk, poly, &at)?, &r)?;
            out.put_ciphertext(&pk.add(&masked, &pk.encrypt(&payload, &mut party.rng))?);
        }
    }
    party.chan.send(ANSWERS, out)
}
