use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::{agreement, oracle_intersection, Word};
use crate::error::{Error, Result};

const MAX_ATTEMPTS: usize = 10_000;

#[derive(Clone, Copy, Debug)]
pub struct GeneratorSpec {
    pub n_client: usize,
    pub n_server: usize,
    pub word_len: usize,
    pub threshold: usize,
    pub domain_size: u32,
    /// Number of server words placed within agreement `t` of a client word.
    pub planted: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct GeneratedInstance {
    pub client: Vec<Word>,
    pub server: Vec<Word>,
    /// The planted server words; equal to the oracle answer by construction.
    pub expected: BTreeSet<Word>,
}

/// Generates a client set and a server set of distinct words in which exactly
/// `planted` server words match some client word and no others do.
pub fn generate_instance(spec: &GeneratorSpec) -> Result<GeneratedInstance> {
    let GeneratorSpec {
        n_client,
        n_server,
        word_len,
        threshold,
        domain_size,
        planted,
        seed,
    } = *spec;
    if threshold < 1 || threshold > word_len || domain_size < 2 || n_client == 0 || n_server == 0 {
        return Err(Error::Generator("invalid size parameters".into()));
    }
    if planted > n_client.min(n_server) {
        return Err(Error::Generator(format!(
            "cannot plant {planted} matches with {n_client} client and {n_server} server words"
        )));
    }
    let universe = (domain_size as f64).powi(word_len as i32);
    if (n_client.max(n_server) as f64) > universe {
        return Err(Error::Generator(format!(
            "only {universe} distinct words exist for |D|={domain_size}, T={word_len}"
        )));
    }

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let random_word =
        |rng: &mut ChaCha20Rng| Word::new((0..word_len).map(|_| rng.gen_range(0..domain_size)).collect());

    let mut client = Vec::with_capacity(n_client);
    let mut seen = HashSet::new();
    while client.len() < n_client {
        let w = random_word(&mut rng);
        if seen.insert(w.clone()) {
            client.push(w);
        }
    }

    let mut server = Vec::with_capacity(n_server);
    let mut seen = HashSet::new();
    let mut sources: Vec<usize> = (0..n_client).collect();
    sources.shuffle(&mut rng);
    for &src in sources.iter().take(planted) {
        let word = retry(|| {
            let mut letters = client[src].letters().to_vec();
            let changes = rng.gen_range(0..=word_len - threshold);
            let mut positions: Vec<usize> = (0..word_len).collect();
            positions.shuffle(&mut rng);
            for &p in &positions[..changes] {
                letters[p] = (letters[p] + rng.gen_range(1..domain_size)) % domain_size;
            }
            let w = Word::new(letters);
            (!seen.contains(&w)).then_some(w)
        })
        .ok_or_else(|| Error::Generator("could not place a distinct planted word".into()))?;
        seen.insert(word.clone());
        server.push(word);
    }
    while server.len() < n_server {
        let word = retry(|| {
            let w = random_word(&mut rng);
            let far = client
                .iter()
                .all(|x| agreement(x, &w).map(|a| a < threshold).unwrap_or(false));
            (far && !seen.contains(&w)).then_some(w)
        })
        .ok_or_else(|| {
            Error::Generator(format!(
                "domain of size {domain_size} is too small to place a server word that \
                 agrees on fewer than {threshold} letters with every client word"
            ))
        })?;
        seen.insert(word.clone());
        server.push(word);
    }
    server.shuffle(&mut rng);

    let expected = oracle_intersection(&client, &server, threshold)?;
    debug_assert_eq!(expected.len(), planted);
    Ok(GeneratedInstance {
        client,
        server,
        expected,
    })
}

fn retry<T>(mut attempt: impl FnMut() -> Option<T>) -> Option<T> {
    (0..MAX_ATTEMPTS).find_map(|_| attempt())
}
