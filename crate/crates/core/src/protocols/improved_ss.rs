//! Improved secret-sharing protocol. The server holds the key pair.
//!
//! Polynomial phase: each `Y_j` is sealed under `sk_j`, and `0^k || sk_j`
//! is split `(T+1)`-of-`(2T+1-t)`. Shares `1..=T` are hidden in per-position
//! polynomials `P^w(y_j^w) = [s_j]_w`, which forces equal letters at a
//! position to carry equal shares; the last `T+1-t` shares go out in clear.
//! The client evaluates `P^w` at its own letters and returns the results
//! blinded.
//!
//! Ticket phase: the server decrypts and adds a per-client-word sharing of
//! zero, so shares recovered through different client words no longer
//! combine.

use std::collections::HashMap;

use crate::codec::Writer;
use crate::domain::{decode_word, encode_word, Combination, PayloadEncoding, Word};
use crate::encpoly::{enc_poly, eval_encrypted, interpolate, EncryptedPolynomial};
use crate::error::{Error, Result};
use crate::homcrypt::{keygen_with_capacity, Ring, RingElement};
use crate::lss::{share, Reconstructor, Share, SharingParams};
use crate::symenc::{fits, sym_dec, sym_enc, SymKey};

use super::{sharing_ring_bits, Found, Party};

const SEALED: u8 = 0x10;
const TAILS: u8 = 0x11;
const POLYS: u8 = 0x12;
const BLINDED: u8 = 0x13;
const TICKET_TAILS: u8 = 0x14;
const UNBLINDED: u8 = 0x15;

/// `(T+1)`-of-`(2T+1-t)`.
fn sharing_params(word_len: usize, t: usize) -> Result<SharingParams> {
    SharingParams::new(word_len + 1, 2 * word_len + 1 - t)
}

/// Shares of every server word, honouring equal shares for equal letters at
/// the same position.
pub(crate) fn constrained_sharings<R: rand::RngCore + ?Sized>(
    ring: &Ring,
    secrets: &[RingElement],
    words: &[Word],
    sharing: SharingParams,
    rng: &mut R,
) -> Result<Vec<Vec<Share>>> {
    let mut pinned: HashMap<(usize, u32), RingElement> = HashMap::new();
    let mut out = Vec::with_capacity(words.len());
    for (secret, y) in secrets.iter().zip(words) {
        let fixed: Vec<(u16, RingElement)> = y
            .letters()
            .iter()
            .enumerate()
            .filter_map(|(w, &l)| pinned.get(&(w, l)).map(|v| (w as u16 + 1, v.clone())))
            .collect();
        // At most T letters can be pinned against a threshold of T+1.
        debug_assert!(fixed.len() < sharing.threshold);
        let shares = share(ring, secret, sharing, &fixed, rng)?;
        for (w, &l) in y.letters().iter().enumerate() {
            pinned.entry((w, l)).or_insert_with(|| shares[w].value.clone());
        }
        out.push(shares);
    }
    Ok(out)
}

/// Interpolates `P^w` through the distinct `(letter, share)` points at
/// position `w`, padded with random points to `n_S + 1` points. Pad points
/// avoid existing x-coordinates and the letter range.
fn position_polynomial<R: rand::RngCore + ?Sized>(
    ring: &Ring,
    words: &[Word],
    sharings: &[Vec<Share>],
    w: usize,
    domain_size: u32,
    rng: &mut R,
) -> Result<crate::encpoly::Polynomial> {
    let mut points: Vec<(RingElement, RingElement)> = Vec::with_capacity(words.len() + 1);
    for (y, shares) in words.iter().zip(sharings) {
        let x = ring.elem(y.letters()[w]);
        if !points.iter().any(|(px, _)| *px == x) {
            points.push((x, shares[w].value.clone()));
        }
    }
    let letters = num_bigint::BigUint::from(domain_size);
    while points.len() < words.len() + 1 {
        let x = ring.random(rng);
        if x.value() < &letters || points.iter().any(|(px, _)| *px == x) {
            continue;
        }
        points.push((x, ring.random(rng)));
    }
    interpolate(ring, &points)
}

pub(super) fn server(party: &mut Party<'_>, words: &[Word]) -> Result<()> {
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
    let ring = pk.ring().clone();
    let sharing = sharing_params(big_t, t)?;

    let mut sealed = Writer::new();
    let mut secrets = Vec::with_capacity(words.len());
    for y in words {
        let key = SymKey::generate(k, &mut party.rng)?;
        let payload = PayloadEncoding {
            width: params.payload_bits() + k,
            ..encode_word(y, &params)
        };
        sealed.put_sealed(&sym_enc(&key, &payload, &mut party.rng)?);
        secrets.push(ring.elem(key.to_integer()));
    }
    let sharings = constrained_sharings(&ring, &secrets, words, sharing, &mut party.rng)?;
    let mut tails = Writer::new();
    for shares in &sharings {
        for s in &shares[big_t..] {
            tails.put_ring(&s.value);
        }
    }
    let mut polys = Writer::new();
    for w in 0..big_t {
        let p = position_polynomial(&ring, words, &sharings, w, params.domain_size, &mut party.rng)?;
        enc_poly(pk, &p, &mut party.rng).write(&mut polys);
    }
    party.chan.send(SEALED, sealed)?;
    party.chan.send(TAILS, tails)?;
    party.chan.send(POLYS, polys)?;

    let blinded = party
        .chan
        .recv_with(BLINDED, |rd| rd.get_ciphertexts(pk, params.n_client * big_t))?;
    let mut ticket_tails = Writer::new();
    let mut unblinded = Writer::new();
    for row in blinded.chunks(big_t) {
        let ticket = share(&ring, &ring.zero(), sharing, &[], &mut party.rng)?;
        for s in &ticket[big_t..] {
            ticket_tails.put_ring(&s.value);
        }
        for (c, tau) in row.iter().zip(&ticket) {
            unblinded.put_ring(&ring.add(&sk.decrypt(c)?, &tau.value));
        }
    }
    party.chan.send(TICKET_TAILS, ticket_tails)?;
    party.chan.send(UNBLINDED, unblinded)
}

pub(super) fn client(party: &mut Party<'_>, words: &[Word]) -> Result<Found> {
    let params = party.params;
    let (t, big_t, k) = (params.threshold, params.word_len, params.security_bits);
    let (n_c, n_s) = (params.n_client, params.n_server);
    let tail_len = big_t + 1 - t;
    let pk = party.recv_key(sharing_ring_bits(&params))?;
    let ring = pk.ring().clone();
    let sharing = sharing_params(big_t, t)?;

    let sealed = party.chan.recv_with(SEALED, |rd| {
        (0..n_s).map(|_| rd.get_sealed()).collect::<Result<Vec<_>>>()
    })?;
    let tails = party.chan.recv_with(TAILS, |rd| {
        (0..n_s * tail_len)
            .map(|_| rd.get_ring(&ring))
            .collect::<Result<Vec<_>>>()
    })?;
    let polys = party.chan.recv_with(POLYS, |rd| {
        (0..big_t)
            .map(|_| EncryptedPolynomial::read(rd, &pk))
            .collect::<Result<Vec<_>>>()
    })?;
    if polys.iter().any(|p| p.degree() != n_s) {
        return Err(Error::protocol("position polynomial has the wrong degree"));
    }

    let mut blinds = Vec::with_capacity(n_c * big_t);
    let mut out = Writer::new();
    for x in words {
        for (poly, &letter) in polys.iter().zip(x.letters()) {
            let v = eval_encrypted(&pk, poly, &ring.elem(letter))?;
            let r = party.blind(&ring)?;
            out.put_ciphertext(&pk.add(&v, &pk.encrypt(&r, &mut party.rng))?);
            blinds.push(r);
        }
    }
    party.chan.send(BLINDED, out)?;

    let ticket_tails = party.chan.recv_with(TICKET_TAILS, |rd| {
        (0..n_c * tail_len)
            .map(|_| rd.get_ring(&ring))
            .collect::<Result<Vec<_>>>()
    })?;
    let q: Vec<RingElement> = party.chan.recv_with(UNBLINDED, |rd| {
        blinds
            .iter()
            .map(|r| Ok(ring.sub(&rd.get_ring(&ring)?, r)))
            .collect::<Result<Vec<_>>>()
    })?;

    let tail_indices: Vec<u16> = (big_t + 1..=sharing.total).map(|i| i as u16).collect();
    let searches = Combination::all(big_t, t)
        .into_iter()
        .map(|sigma| {
            let mut idx: Vec<u16> = sigma.positions().iter().map(|&w| w as u16 + 1).collect();
            idx.extend(&tail_indices);
            Ok((sigma, Reconstructor::new(&ring, &idx)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut found = Found::default();
    for (i, x) in words.iter().enumerate() {
        let qi = &q[i * big_t..(i + 1) * big_t];
        let taus = &ticket_tails[i * tail_len..(i + 1) * tail_len];
        for (j, blob) in sealed.iter().enumerate() {
            let free: Vec<RingElement> = tails[j * tail_len..(j + 1) * tail_len]
                .iter()
                .zip(taus)
                .map(|(s, tau)| ring.add(s, tau))
                .collect();
            for (sigma, rec) in &searches {
                found.reconstructions += 1;
                let values = sigma.positions().iter().map(|&w| &qi[w]).chain(&free);
                let z = rec.combine(&ring, values);
                let Some(key) = SymKey::from_integer(z.value(), k) else {
                    continue;
                };
                let opened = sym_dec(&key, blob)?;
                let word = fits(&opened.value, params.payload_bits())
                    .then(|| decode_word(&opened.value, &params))
                    .flatten();
                let Some(word) = word else {
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
