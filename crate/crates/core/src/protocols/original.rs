//! The original three-letter protocol (`T = 3`, `t = 2`).
//!
//! The client hides a random value `r_i` behind each of its words by fixing
//! `P_w(x_i^w) = r_i` for the three positions; the server returns `Y_j`
//! blinded by the pairwise differences `P_a(y^a) - P_b(y^b)`. When two client
//! words share a letter at some position their `r_i` must coincide (the
//! remedy), and then letters of different client words cancel each other:
//! the client recovers server words it does not match. This module exists to
//! demonstrate that leak, so the client output is every word it recovers.

use crate::codec::Writer;
use crate::domain::{decode_word, encode_word, FuzzyParams, Word};
use crate::encpoly::{enc_poly, eval_encrypted, interpolate, EncryptedPolynomial};
use crate::error::{Error, Result};
use crate::homcrypt::keygen;

use super::{Found, Party};

const POLYS: u8 = 0x10;
const ANSWERS: u8 = 0x11;

/// Position pairs whose differences blind each answer.
const PAIRS: [(usize, usize); 3] = [(0, 1), (1, 2), (0, 2)];

pub(super) fn check(params: &FuzzyParams) -> Result<()> {
    if params.word_len != 3 || params.threshold != 2 {
        return Err(Error::param(format!(
            "the original protocol is defined for T = 3, t = 2 only (got T = {}, t = {})",
            params.word_len, params.threshold
        )));
    }
    Ok(())
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut root = i;
    while parent[root] != root {
        root = parent[root];
    }
    parent[i] = root;
    root
}

pub(super) fn client(party: &mut Party<'_>, words: &[Word]) -> Result<Found> {
    let params = party.params;
    let keys = keygen(&params, party.cfg.backend, party.cfg.modulus_bits, &mut party.rng)?;
    party.send_key(&keys.public)?;
    let ring = keys.public.ring().clone();

    let mut parent: Vec<usize> = (0..words.len()).collect();
    if party.cfg.remedy {
        for w in 0..3 {
            for i in 0..words.len() {
                for j in 0..i {
                    if words[i].letters()[w] == words[j].letters()[w] {
                        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                        parent[a] = b;
                    }
                }
            }
        }
    }
    let mut values = vec![None; words.len()];
    let r: Vec<_> = (0..words.len())
        .map(|i| {
            let root = find(&mut parent, i);
            values[root]
                .get_or_insert_with(|| ring.random(&mut party.rng))
                .clone()
        })
        .collect();

    let mut out = Writer::new();
    for w in 0..3 {
        let points: Vec<_> = words
            .iter()
            .zip(&r)
            .map(|(x, ri)| (ring.elem(x.letters()[w]), ri.clone()))
            .collect();
        let poly = interpolate(&ring, &points)?;
        enc_poly(&keys.public, &poly, &mut party.rng).write(&mut out);
    }
    party.chan.send(POLYS, out)?;

    let n = params.n_server * PAIRS.len();
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
    // The client keeps everything it can decode.
    found.matched = found.learned.clone();
    Ok(found)
}

pub(super) fn server(party: &mut Party<'_>, words: &[Word]) -> Result<()> {
    let params = party.params;
    let pk = party.recv_key(params.required_ring_bits())?;
    let ring = pk.ring().clone();
    let polys = party.chan.recv_with(POLYS, |rd| {
        (0..3)
            .map(|_| EncryptedPolynomial::read(rd, &pk))
            .collect::<Result<Vec<_>>>()
    })?;

    let mut out = Writer::new();
    for y in words {
        let evals = (0..3)
            .map(|w| eval_encrypted(&pk, &polys[w], &ring.elem(y.letters()[w])))
            .collect::<Result<Vec<_>>>()?;
        let payload = ring.elem(encode_word(y, &params).value);
        for (a, b) in PAIRS {
            let r = party.blind(&ring)?;
            let diff = pk.scalar_mul(&pk.sub(&evals[a], &evals[b])?, &r)?;
            let answer = pk.add(&diff, &pk.encrypt(&payload, &mut party.rng))?;
            out.put_ciphertext(&answer);
        }
    }
    party.chan.send(ANSWERS, out)
}
