use std::fmt::Write as _;
use std::path::Path;
use std::{fs, io};

use super::{FuzzyParams, Word};
use crate::error::{Error, Result};

/// One party's input file.
///
/// Text format: a header line `T t DOMAIN` followed by one word per line,
/// letters as space-separated decimals. Blank lines are ignored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    pub word_len: usize,
    pub threshold: usize,
    pub domain_size: u32,
    pub words: Vec<Word>,
}

impl Dataset {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(n, l)| (n + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::param("empty dataset"))?;
        let fields = parse_numbers(header, 1)?;
        let [word_len, threshold, domain_size] = fields[..] else {
            return Err(Error::param("header must be `T t DOMAIN`"));
        };
        let domain_size = u32::try_from(domain_size)
            .map_err(|_| Error::param("domain size does not fit in 32 bits"))?;
        let (word_len, threshold) = (word_len as usize, threshold as usize);
        if threshold < 1 || threshold > word_len || domain_size < 2 {
            return Err(Error::param(format!("invalid header `{header}`")));
        }
        let mut words = Vec::new();
        for (n, line) in lines {
            let letters = parse_numbers(line, n)?;
            if letters.len() != word_len {
                return Err(Error::param(format!(
                    "line {n}: expected {word_len} letters, found {}",
                    letters.len()
                )));
            }
            if let Some(bad) = letters.iter().find(|&&l| l >= u64::from(domain_size)) {
                return Err(Error::param(format!(
                    "line {n}: letter {bad} outside domain of size {domain_size}"
                )));
            }
            words.push(Word::new(letters.into_iter().map(|l| l as u32).collect()));
        }
        Ok(Dataset {
            word_len,
            threshold,
            domain_size,
            words,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| {
            Error::Transport(io::Error::new(e.kind(), format!("{}: {e}", path.display())))
        })?;
        Self::parse(&text)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.word_len, self.threshold, self.domain_size);
        for w in &self.words {
            let letters: Vec<String> = w.letters().iter().map(u32::to_string).collect();
            writeln!(out, "{}", letters.join(" ")).unwrap();
        }
        out
    }

    /// True when both files describe the same `T`, `t` and domain.
    pub fn compatible(&self, other: &Dataset) -> bool {
        (self.word_len, self.threshold, self.domain_size)
            == (other.word_len, other.threshold, other.domain_size)
    }

    /// Session parameters for a client holding `self` and a server holding `server`.
    pub fn params_with(&self, server: &Dataset, security_bits: u32) -> Result<FuzzyParams> {
        if !self.compatible(server) {
            return Err(Error::Usage(format!(
                "datasets disagree: client header `{} {} {}`, server header `{} {} {}`",
                self.word_len,
                self.threshold,
                self.domain_size,
                server.word_len,
                server.threshold,
                server.domain_size
            )));
        }
        FuzzyParams::new(
            self.words.len(),
            server.words.len(),
            self.word_len,
            self.threshold,
            self.domain_size,
            security_bits,
        )
    }
}

fn parse_numbers(line: &str, n: usize) -> Result<Vec<u64>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<u64>()
                .map_err(|_| Error::param(format!("line {n}: `{tok}` is not a decimal letter")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_prints() {
        let text = "3 2 10\n1 2 3\n\n1 4 5\n";
        let ds = Dataset::parse(text).unwrap();
        assert_eq!(ds.word_len, 3);
        assert_eq!(ds.threshold, 2);
        assert_eq!(ds.domain_size, 10);
        assert_eq!(ds.words, vec![Word::new(vec![1, 2, 3]), Word::new(vec![1, 4, 5])]);
        assert_eq!(Dataset::parse(&ds.to_text()).unwrap(), ds);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Dataset::parse("").is_err());
        assert!(Dataset::parse("3 2\n1 2 3\n").is_err());
        assert!(Dataset::parse("3 4 10\n").is_err());
        assert!(Dataset::parse("3 2 10\n1 2\n").is_err());
        assert!(Dataset::parse("3 2 10\n1 2 10\n").is_err());
        assert!(Dataset::parse("3 2 10\n1 2 x\n").is_err());
    }

    #[test]
    fn mismatched_headers_are_usage_errors() {
        let a = Dataset::parse("3 2 10\n1 2 3\n").unwrap();
        let b = Dataset::parse("3 1 10\n1 2 3\n").unwrap();
        assert!(matches!(a.params_with(&b, 64), Err(Error::Usage(_))));
        assert_eq!(a.params_with(&a, 64).unwrap().n_server, 1);
    }
}
