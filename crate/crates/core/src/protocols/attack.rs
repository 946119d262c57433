//! Runs every protocol on the counterexample to the original protocol and
//! compares each output with the oracle.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use crate::domain::{oracle_intersection, Word};
use crate::error::Result;

use super::{run_local, EqmVersion, ProtocolKind, SessionConfig};

#[derive(Clone, Debug, Serialize)]
pub struct AttackRow {
    pub label: String,
    pub protocol: ProtocolKind,
    /// `None` when the protocol does not apply to these parameters.
    pub output: Option<BTreeSet<Word>>,
    pub note: Option<String>,
}

impl AttackRow {
    /// Words output that the oracle does not contain.
    pub fn leaked(&self, oracle: &BTreeSet<Word>) -> Vec<Word> {
        self.output
            .iter()
            .flatten()
            .filter(|w| !oracle.contains(*w))
            .cloned()
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AttackReport {
    pub client: Vec<Word>,
    pub server: Vec<Word>,
    pub threshold: usize,
    pub oracle: BTreeSet<Word>,
    pub rows: Vec<AttackRow>,
}

impl AttackReport {
    /// `None` if the original protocol was skipped.
    pub fn original_leaks(&self) -> Option<bool> {
        self.rows
            .iter()
            .find(|r| r.protocol == ProtocolKind::Original)
            .and_then(|r| r.output.as_ref().map(|_| !r.leaked(&self.oracle).is_empty()))
    }

    /// True when every fixed protocol returned exactly the oracle set.
    pub fn fixed_match_oracle(&self) -> bool {
        self.rows
            .iter()
            .filter(|r| r.protocol != ProtocolKind::Original)
            .all(|r| r.output.as_ref() == Some(&self.oracle))
    }

    pub fn render(&self) -> String {
        let words = |ws: &mut dyn Iterator<Item = &Word>| {
            ws.map(ToString::to_string).collect::<Vec<_>>().join(", ")
        };
        let mut s = String::new();
        let _ = writeln!(s, "client: {{{}}}", words(&mut self.client.iter()));
        let _ = writeln!(s, "server: {{{}}}", words(&mut self.server.iter()));
        let _ = writeln!(s, "t = {}, oracle: {{{}}}", self.threshold, words(&mut self.oracle.iter()));
        for row in &self.rows {
            match &row.output {
                Some(out) => {
                    let leaked = row.leaked(&self.oracle);
                    let _ = writeln!(
                        s,
                        "{:<12} output {{{}}}{}",
                        row.label,
                        words(&mut out.iter()),
                        if leaked.is_empty() {
                            String::new()
                        } else {
                            format!("  LEAK {{{}}}", words(&mut leaked.iter()))
                        }
                    );
                }
                None => {
                    let _ = writeln!(
                        s,
                        "{:<12} skipped ({})",
                        row.label,
                        row.note.as_deref().unwrap_or("not applicable")
                    );
                }
            }
        }
        let original = match self.original_leaks() {
            Some(true) => "yes",
            Some(false) => "no",
            None => "skipped",
        };
        let fixed = if self.fixed_match_oracle() { "no" } else { "yes" };
        let _ = write!(s, "ORIGINAL LEAKS: {original}; fixed protocols leak: {fixed}");
        s
    }
}

/// The client and server sets of the counterexample.
pub fn counterexample() -> (Vec<Word>, Vec<Word>) {
    (
        vec![Word::new(vec![1, 2, 3]), Word::new(vec![1, 4, 5])],
        vec![Word::new(vec![5, 4, 3])],
    )
}

/// Runs all protocols on the counterexample with threshold `t` over the mock
/// backend. `swap_roles` exchanges the two sets.
pub fn attack_demo(t: usize, swap_roles: bool, seed: u64) -> Result<AttackReport> {
    let (mut client, mut server) = counterexample();
    if swap_roles {
        std::mem::swap(&mut client, &mut server);
    }
    let oracle = oracle_intersection(&client, &server, t)?;
    let runs = [
        ("original", ProtocolKind::Original, EqmVersion::V1),
        ("polynomial", ProtocolKind::Polynomial, EqmVersion::V1),
        ("simple-ss", ProtocolKind::SimpleSs, EqmVersion::V1),
        ("improved-ss", ProtocolKind::ImprovedSs, EqmVersion::V1),
        ("hamming-v1", ProtocolKind::Hamming, EqmVersion::V1),
        ("hamming-v2", ProtocolKind::Hamming, EqmVersion::V2),
    ];
    let mut rows = Vec::new();
    for (label, protocol, eqm) in runs {
        let mut cfg = SessionConfig::new(protocol, 3, t, 8).with_seed(seed);
        cfg.eqm = eqm;
        let row = if protocol == ProtocolKind::Original && t != 2 {
            AttackRow {
                label: label.into(),
                protocol,
                output: None,
                note: Some("defined for T = 3, t = 2 only".into()),
            }
        } else {
            AttackRow {
                label: label.into(),
                protocol,
                output: Some(run_local(&cfg, &client, &server)?.matched),
                note: None,
            }
        };
        rows.push(row);
    }
    Ok(AttackReport {
        client,
        server,
        threshold: t,
        oracle,
        rows,
    })
}
