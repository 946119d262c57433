use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Public parameters of one matching session. Both parties know all of them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FuzzyParams {
    pub n_client: usize,
    pub n_server: usize,
    /// Letters per word (`T`).
    pub word_len: usize,
    /// Minimum number of agreeing positions for a match (`t`).
    pub threshold: usize,
    pub domain_size: u32,
    /// Statistical security parameter `k`, in bits.
    pub security_bits: u32,
}

impl FuzzyParams {
    pub const MIN_SECURITY_BITS: u32 = 16;
    pub const DEFAULT_SECURITY_BITS: u32 = 64;

    pub fn new(
        n_client: usize,
        n_server: usize,
        word_len: usize,
        threshold: usize,
        domain_size: u32,
        security_bits: u32,
    ) -> Result<Self> {
        let params = FuzzyParams {
            n_client,
            n_server,
            word_len,
            threshold,
            domain_size,
            security_bits,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.word_len == 0 || self.word_len > u16::MAX as usize {
            return Err(Error::param(format!("word length {} out of range", self.word_len)));
        }
        if self.threshold < 1 || self.threshold > self.word_len {
            return Err(Error::param(format!(
                "threshold {} must lie in [1, {}]",
                self.threshold, self.word_len
            )));
        }
        if self.n_client == 0 || self.n_server == 0 {
            return Err(Error::param("both sets must be non-empty"));
        }
        if self.domain_size < 2 {
            return Err(Error::param("domain must have at least two letters"));
        }
        if self.security_bits < Self::MIN_SECURITY_BITS {
            return Err(Error::param(format!(
                "security parameter must be at least {} bits",
                Self::MIN_SECURITY_BITS
            )));
        }
        Ok(())
    }

    /// `ceil(log2 |D|)`.
    pub fn letter_bits(&self) -> u32 {
        u32::BITS - (self.domain_size - 1).leading_zeros()
    }

    /// Width `p` of an encoded word.
    pub fn payload_bits(&self) -> u32 {
        self.letter_bits() * self.word_len as u32
    }

    /// Width of an encoded combination of `t` letters.
    pub fn selection_bits(&self) -> u32 {
        self.letter_bits() * self.threshold as u32
    }

    /// Minimum bit length `p + k` a plaintext ring must exceed.
    pub fn required_ring_bits(&self) -> u32 {
        self.payload_bits() + self.security_bits
    }

    /// Number of `t`-subsets of the `T` positions.
    pub fn combinations(&self) -> usize {
        binomial(self.word_len, self.threshold)
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}
