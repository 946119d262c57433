#![allow(dead_code)]

use fpm_core::domain::Word;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub fn w(letters: &[u32]) -> Word {
    Word::new(letters.to_vec())
}

pub fn words(list: &[&[u32]]) -> Vec<Word> {
    list.iter().map(|l| w(l)).collect()
}

/// A random instance; roughly half the server words are client words with a
/// few letters changed, so matches and near misses both occur.
pub struct Instance {
    pub client: Vec<Word>,
    pub server: Vec<Word>,
    pub word_len: usize,
    pub threshold: usize,
    pub domain_size: u32,
}

pub fn random_instance(seed: u64, n_c: usize, n_s: usize, big_t: usize, t: usize, domain: u32) -> Instance {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let rand_word = |rng: &mut ChaCha20Rng| -> Word {
        Word::new((0..big_t).map(|_| rng.gen_range(0..domain)).collect())
    };
    let client: Vec<Word> = (0..n_c).map(|_| rand_word(&mut rng)).collect();
    let server = (0..n_s)
        .map(|_| {
            if rng.gen_bool(0.5) {
                let base = &client[rng.gen_range(0..n_c)];
                let mut letters = base.letters().to_vec();
                let changes = rng.gen_range(0..=big_t);
                for _ in 0..changes {
                    let pos = rng.gen_range(0..big_t);
                    letters[pos] = rng.gen_range(0..domain);
                }
                Word::new(letters)
            } else {
                rand_word(&mut rng)
            }
        })
        .collect();
    Instance {
        client,
        server,
        word_len: big_t,
        threshold: t,
        domain_size: domain,
    }
}

/// Random grid point in the ranges n in 1..=6, T in 2..=5, t in 1..=T,
/// |D| in {2, 4, 16}.
pub fn random_grid_instance(seed: u64) -> Instance {
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x5eed);
    let n = rng.gen_range(1..=6);
    let big_t = rng.gen_range(2..=5);
    let t = rng.gen_range(1..=big_t);
    let domain = [2, 4, 16][rng.gen_range(0..3)];
    random_instance(seed, n, n, big_t, t, domain)
}

pub fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i as u64 + 1))
}
