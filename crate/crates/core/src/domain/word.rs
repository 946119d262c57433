use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::FuzzyParams;
use crate::error::{Error, Result};

/// A word of `T` letters, each in `[0, |D|)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<u32>);

impl Word {
    pub fn new(letters: Vec<u32>) -> Self {
        Word(letters)
    }

    /// Builds a word and checks it against the session parameters.
    pub fn checked(letters: Vec<u32>, params: &FuzzyParams) -> Result<Self> {
        let word = Word(letters);
        word.validate(params)?;
        Ok(word)
    }

    pub fn validate(&self, params: &FuzzyParams) -> Result<()> {
        if self.0.len() != params.word_len {
            return Err(Error::param(format!(
                "word {self} has {} letters, expected {}",
                self.0.len(),
                params.word_len
            )));
        }
        if let Some(bad) = self.0.iter().find(|&&l| l >= params.domain_size) {
            return Err(Error::param(format!(
                "letter {bad} outside domain of size {}",
                params.domain_size
            )));
        }
        Ok(())
    }

    pub fn letters(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<u32>> for Word {
    fn from(letters: Vec<u32>) -> Self {
        Word(letters)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.0.iter().join(","))
    }
}

/// Number of positions on which two words agree.
pub fn agreement(x: &Word, y: &Word) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::param(format!(
            "cannot compare words of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    Ok(x.0.iter().zip(&y.0).filter(|(a, b)| a == b).count())
}

/// `X ≈_t Y`: the words agree on at least `t` positions.
pub fn match_t(x: &Word, y: &Word, t: usize) -> Result<bool> {
    if t == 0 || t > x.len() {
        return Err(Error::param(format!("threshold {t} invalid for length {}", x.len())));
    }
    Ok(agreement(x, y)? >= t)
}

/// Plaintext ground truth: every distinct server word that matches some
/// client word.
pub fn oracle_intersection(client: &[Word], server: &[Word], t: usize) -> Result<BTreeSet<Word>> {
    let mut out = BTreeSet::new();
    for y in server {
        for x in client {
            if match_t(x, y, t)? {
                out.insert(y.clone());
                break;
            }
        }
    }
    Ok(out)
}

/// A strictly increasing choice of `t` positions (0-based) out of `T`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Combination(Vec<usize>);

impl Combination {
    pub fn new(positions: Vec<usize>, word_len: usize) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::param("empty combination"));
        }
        if !positions.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::param("combination positions must be strictly increasing"));
        }
        if positions.last().is_some_and(|&p| p >= word_len) {
            return Err(Error::param("combination position beyond word length"));
        }
        Ok(Combination(positions))
    }

    /// All `C(T, t)` combinations in lexicographic order.
    pub fn all(word_len: usize, t: usize) -> Vec<Combination> {
        (0..word_len).combinations(t).map(Combination).collect()
    }

    pub fn positions(&self) -> &[usize] {
        &self.0
    }
}

/// An integer occupying the low `width` bits of a larger plaintext domain;
/// the remaining high bits are the `0^k` prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PayloadEncoding {
    pub value: BigUint,
    pub width: u32,
}

impl PayloadEncoding {
    pub fn new(value: BigUint, width: u32) -> Result<Self> {
        if value.bits() > u64::from(width) {
            return Err(Error::param(format!("value does not fit in {width} bits")));
        }
        Ok(PayloadEncoding { value, width })
    }

    /// True when the value lies below `2^width`, i.e. the prefix is all zero.
    pub fn prefix_ok(&self) -> bool {
        self.value.bits() <= u64::from(self.width)
    }
}

fn positional<'a>(letters: impl Iterator<Item = &'a u32>, base: u32) -> BigUint {
    letters.fold(BigUint::zero(), |acc, &l| acc * base + l)
}

/// Base-`|D|` encoding of the letters of `x` at the positions of `sigma`,
/// first position most significant.
pub fn select(sigma: &Combination, x: &Word, params: &FuzzyParams) -> PayloadEncoding {
    let letters = sigma.positions().iter().map(|&p| &x.0[p]);
    PayloadEncoding {
        value: positional(letters, params.domain_size),
        width: params.letter_bits() * sigma.positions().len() as u32,
    }
}

pub fn encode_word(x: &Word, params: &FuzzyParams) -> PayloadEncoding {
    PayloadEncoding {
        value: positional(x.0.iter(), params.domain_size),
        width: params.payload_bits(),
    }
}

/// Inverse of [`encode_word`]; `None` for integers that are not the
/// encoding of any word.
pub fn decode_word(v: &BigUint, params: &FuzzyParams) -> Option<Word> {
    if v.bits() > u64::from(params.payload_bits()) {
        return None;
    }
    let base = BigUint::from(params.domain_size);
    let mut rest = v.clone();
    let mut letters = vec![0u32; params.word_len];
    for slot in letters.iter_mut().rev() {
        *slot = (&rest % &base).to_u32()?;
        rest /= &base;
    }
    rest.is_zero().then_some(Word(letters))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(letters: &[u32]) -> Word {
        Word::new(letters.to_vec())
    }

    fn params(t: usize, domain: u32) -> FuzzyParams {
        FuzzyParams::new(2, 1, 3, t, domain, 64).unwrap()
    }

    #[test]
    fn match_examples() {
        assert!(match_t(&w(&[1, 2, 3]), &w(&[5, 4, 3]), 1).unwrap());
        assert!(!match_t(&w(&[1, 2, 3]), &w(&[5, 4, 3]), 2).unwrap());
        for t in 1..=3 {
            assert!(match_t(&w(&[7, 0, 7]), &w(&[7, 0, 7]), t).unwrap());
        }
    }

    #[test]
    fn match_rejects_length_mismatch() {
        assert!(matches!(match_t(&w(&[1, 2]), &w(&[1, 2, 3]), 1), Err(Error::Param(_))));
        assert!(match_t(&w(&[1, 2]), &w(&[1, 2]), 3).is_err());
    }

    #[test]
    fn select_examples() {
        let p = params(2, 10);
        let x = w(&[1, 2, 3]);
        let sigma = Combination::new(vec![1, 2], 3).unwrap();
        assert_eq!(select(&sigma, &x, &p).value, BigUint::from(23u32));
        assert_eq!(select(&sigma, &x, &p).width, 8);
        let sigma = Combination::new(vec![0, 2], 3).unwrap();
        assert_eq!(select(&sigma, &w(&[5, 4, 3]), &p).value, BigUint::from(53u32));
        let full = Combination::new(vec![0, 1, 2], 3).unwrap();
        assert_eq!(select(&full, &x, &p), encode_word(&x, &p));
    }

    #[test]
    fn encode_decode_examples() {
        let p = params(2, 10);
        let e = encode_word(&w(&[5, 4, 3]), &p);
        assert_eq!(e.value, BigUint::from(543u32));
        assert_eq!(e.width, 12);
        assert_eq!(decode_word(&BigUint::from(543u32), &p), Some(w(&[5, 4, 3])));
        let over = (BigUint::from(1u32) << 12) + 17u32;
        assert_eq!(decode_word(&over, &p), None);
        // Fits in 12 bits but exceeds 10^3 - 1.
        assert_eq!(decode_word(&BigUint::from(1000u32), &p), None);
    }

    #[test]
    fn combinations_are_lexicographic() {
        let all = Combination::all(3, 2);
        let pos: Vec<_> = all.iter().map(|c| c.positions().to_vec()).collect();
        assert_eq!(pos, vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert!(Combination::new(vec![2, 1], 3).is_err());
        assert!(Combination::new(vec![1, 3], 3).is_err());
    }

    #[test]
    fn oracle_examples() {
        let x = vec![w(&[1, 2, 3]), w(&[1, 4, 5])];
        let y = vec![w(&[5, 4, 3])];
        assert!(oracle_intersection(&x, &y, 2).unwrap().is_empty());
        assert_eq!(oracle_intersection(&x, &y, 1).unwrap().len(), 1);
        let same = oracle_intersection(&x, &x, 3).unwrap();
        assert_eq!(same, x.iter().cloned().collect());
    }

    #[test]
    fn oracle_collapses_duplicates() {
        let x = vec![w(&[1, 2, 3])];
        let y = vec![w(&[1, 2, 3]), w(&[1, 2, 3])];
        assert_eq!(oracle_intersection(&x, &y, 3).unwrap().len(), 1);
    }

    #[test]
    fn roundtrip_whole_domain() {
        // |D|^T = 4^6 = 4096 words.
        let p = FuzzyParams::new(1, 1, 6, 1, 4, 64).unwrap();
        for n in 0u32..4096 {
            let v = BigUint::from(n);
            let word = decode_word(&v, &p).expect("every integer below |D|^T is a word");
            assert_eq!(encode_word(&word, &p).value, v);
        }
        assert_eq!(decode_word(&BigUint::from(4096u32), &p), None);
    }

    #[test]
    fn select_characterises_matching() {
        // match_t(X, Y, t) iff some combination selects equal letters;
        // exhaustive over D^T for |D| = 2, T = 4.
        let p = FuzzyParams::new(1, 1, 4, 1, 2, 64).unwrap();
        let words: Vec<Word> = (0u32..16)
            .map(|n| decode_word(&BigUint::from(n), &p).unwrap())
            .collect();
        for t in 1..=4 {
            let combos = Combination::all(4, t);
            for x in &words {
                for y in &words {
                    let via_select = combos.iter().any(|s| select(s, x, &p) == select(s, y, &p));
                    assert_eq!(match_t(x, y, t).unwrap(), via_select);
                }
            }
        }
    }
}
