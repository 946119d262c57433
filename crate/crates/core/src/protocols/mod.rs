//! The two-party matching protocols.
//!
//! Every session starts with the same handshake: the client announces the
//! public parameters and its set size, the server checks them against its own
//! configuration and answers with its set size. The protocol proper follows
//! on the same channel. Each party runs single-threaded; [`run_local`] and
//! [`run_tcp`] put the server on a second thread for in-process runs.

mod attack;
pub mod hamming;
mod improved_ss;
mod original;
mod polynomial;
mod simple_ss;

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::net::TcpListener;
use std::str::FromStr;
use std::thread;

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use attack::{attack_demo, counterexample, AttackReport, AttackRow};
pub use hamming::EqmVersion;

use crate::channel::{Channel, ChannelStats, Role};
use crate::codec::Writer;
use crate::domain::{match_t, FuzzyParams, Word};
use crate::error::{Error, Result};
use crate::homcrypt::{Backend, PublicKey, Ring, RingElement, DEFAULT_MODULUS_BITS};

pub const HELLO: u8 = 0x01;
pub const HELLO_ACK: u8 = 0x02;
pub const KEY: u8 = 0x03;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolKind {
    Original,
    Polynomial,
    SimpleSs,
    ImprovedSs,
    Hamming,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 5] = [
        ProtocolKind::Original,
        ProtocolKind::Polynomial,
        ProtocolKind::SimpleSs,
        ProtocolKind::ImprovedSs,
        ProtocolKind::Hamming,
    ];

    /// The four protocols that solve the problem correctly.
    pub const FIXED: [ProtocolKind; 4] = [
        ProtocolKind::Polynomial,
        ProtocolKind::SimpleSs,
        ProtocolKind::ImprovedSs,
        ProtocolKind::Hamming,
    ];

    /// Protocol id carried in every frame header.
    pub fn id(self) -> u8 {
        match self {
            ProtocolKind::Original => 0x01,
            ProtocolKind::Polynomial => 0x02,
            ProtocolKind::SimpleSs => 0x03,
            ProtocolKind::ImprovedSs => 0x04,
            ProtocolKind::Hamming => 0x05,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::Original => "original",
            ProtocolKind::Polynomial => "polynomial",
            ProtocolKind::SimpleSs => "simple-ss",
            ProtocolKind::ImprovedSs => "improved-ss",
            ProtocolKind::Hamming => "hamming",
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProtocolKind::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown protocol {s:?}")))
    }
}

/// Everything both parties must agree on, plus per-party knobs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub protocol: ProtocolKind,
    pub word_len: usize,
    pub threshold: usize,
    pub domain_size: u32,
    pub security_bits: u32,
    pub backend: Backend,
    /// Paillier modulus size; the mock backend ignores it.
    pub modulus_bits: u32,
    /// Equality-matrix subroutine for the Hamming protocol.
    pub eqm: EqmVersion,
    /// Hamming only: count distances with `f = E(1) - eq` instead of
    /// agreements. Both give the same output and message counts.
    pub literal_polarity: bool,
    /// Secret-sharing protocols: stop searching a pair after the first
    /// accepted reconstruction.
    pub early_exit: bool,
    /// Original protocol: unify the random values of client words that share
    /// a letter so interpolation stays defined.
    pub remedy: bool,
    /// Fail the session if any blinding factor repeats.
    pub audit_blinding: bool,
    /// Seeds both parties' generators; `None` draws from the OS.
    pub seed: Option<u64>,
}

impl SessionConfig {
    pub fn new(protocol: ProtocolKind, word_len: usize, threshold: usize, domain_size: u32) -> Self {
        SessionConfig {
            protocol,
            word_len,
            threshold,
            domain_size,
            security_bits: FuzzyParams::DEFAULT_SECURITY_BITS,
            backend: Backend::Mock,
            modulus_bits: DEFAULT_MODULUS_BITS,
            eqm: EqmVersion::V1,
            literal_polarity: false,
            early_exit: true,
            remedy: true,
            audit_blinding: true,
            seed: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_backend(mut self, backend: Backend, modulus_bits: u32) -> Self {
        self.backend = backend;
        self.modulus_bits = modulus_bits;
        self
    }

    pub fn params(&self, n_client: usize, n_server: usize) -> Result<FuzzyParams> {
        let params = FuzzyParams::new(
            n_client,
            n_server,
            self.word_len,
            self.threshold,
            self.domain_size,
            self.security_bits,
        )?;
        if self.protocol == ProtocolKind::Original {
            original::check(&params)?;
        }
        Ok(params)
    }

    fn rng(&self, role: Role) -> ChaCha20Rng {
        match self.seed {
            Some(seed) => {
                let mut h = Sha256::new();
                h.update(b"fpm party rng");
                h.update([role as u8]);
                h.update(seed.to_be_bytes());
                ChaCha20Rng::from_seed(h.finalize().into())
            }
            None => ChaCha20Rng::from_entropy(),
        }
    }
}

/// What the client ends up with.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ClientOutcome {
    /// The client's output set.
    pub matched: BTreeSet<Word>,
    /// Every server word the client recovered, before any match filter.
    pub learned: BTreeSet<Word>,
    pub stats: ChannelStats,
    /// Secret reconstructions attempted (secret-sharing protocols).
    pub reconstructions: u64,
    /// Candidates that passed a zero-prefix check and were rejected later.
    pub false_candidates: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ServerOutcome {
    pub stats: ChannelStats,
    pub blinding_factors: u64,
}

/// One endpoint's view of a running session.
pub(crate) struct Party<'c> {
    pub cfg: SessionConfig,
    pub params: FuzzyParams,
    pub chan: &'c mut Channel,
    pub rng: ChaCha20Rng,
    blinds: HashSet<BigUint>,
    blind_count: u64,
}

impl Party<'_> {
    /// A fresh non-zero ring element that must not repeat in this session.
    pub fn blind(&mut self, ring: &Ring) -> Result<RingElement> {
        let r = ring.random_nonzero(&mut self.rng);
        self.blind_count += 1;
        if self.cfg.audit_blinding && !self.blinds.insert(r.value().clone()) {
            return Err(Error::BlindingReuse);
        }
        Ok(r)
    }

    pub fn send_key(&mut self, pk: &PublicKey) -> Result<()> {
        let mut w = Writer::new();
        w.put_public_key(pk);
        self.chan.send(KEY, w)
    }

    /// Receives the peer's key and checks it suits this session.
    pub fn recv_key(&mut self, required_bits: u32) -> Result<PublicKey> {
        let pk = self.chan.recv_with(KEY, |r| r.get_public_key())?;
        if pk.backend() != self.cfg.backend {
            return Err(Error::protocol(format!(
                "peer sent a {} key, session uses {}",
                pk.backend(),
                self.cfg.backend
            )));
        }
        if !pk.ring().holds_bits(required_bits) {
            return Err(Error::protocol(format!(
                "peer key ring cannot hold {required_bits}-bit plaintexts"
            )));
        }
        Ok(pk)
    }
}

/// Ring capacity for protocols that share a `k`-bit key and recognise it by
/// a `k`-bit zero prefix.
pub(crate) fn sharing_ring_bits(params: &FuzzyParams) -> u32 {
    params.required_ring_bits().max(2 * params.security_bits)
}

/// Partial result filled in by each protocol's client.
#[derive(Default)]
pub(crate) struct Found {
    pub matched: BTreeSet<Word>,
    pub learned: BTreeSet<Word>,
    pub reconstructions: u64,
    pub false_candidates: u64,
}

impl Found {
    /// Records a recovered word; keeps it if it matches one of `against`.
    pub fn offer(&mut self, word: Word, against: &[Word], t: usize) -> Result<bool> {
        let ok = against
            .iter()
            .map(|x| match_t(x, &word, t))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .any(|m| m);
        if ok {
            self.matched.insert(word.clone());
        } else {
            self.false_candidates += 1;
        }
        self.learned.insert(word);
        Ok(ok)
    }
}

fn check_words(words: &[Word], params: &FuzzyParams) -> Result<()> {
    words.iter().try_for_each(|w| w.validate(params))
}

fn check_channel(cfg: &SessionConfig, chan: &Channel, role: Role) -> Result<()> {
    if chan.protocol_id() != cfg.protocol.id() {
        return Err(Error::Usage(format!(
            "channel is set up for protocol {:#04x}, session runs {}",
            chan.protocol_id(),
            cfg.protocol
        )));
    }
    if chan.role() != role {
        return Err(Error::Usage("channel endpoint has the wrong role".into()));
    }
    Ok(())
}

fn hello_fields(cfg: &SessionConfig) -> Writer {
    let mut w = Writer::new();
    w.put_u16(cfg.word_len as u16);
    w.put_u16(cfg.threshold as u16);
    w.put_u32(cfg.domain_size);
    w.put_u32(cfg.security_bits);
    w.put_u8(cfg.backend.tag());
    w.put_u32(cfg.modulus_bits);
    w.put_u8(cfg.eqm.number());
    w.put_u8(u8::from(cfg.literal_polarity));
    w
}

/// Runs the client side of one session.
pub fn run_client(cfg: &SessionConfig, words: &[Word], chan: &mut Channel) -> Result<ClientOutcome> {
    check_channel(cfg, chan, Role::Client)?;
    cfg.params(words.len(), 1)?;
    let result = client_session(cfg, words, chan);
    if result.is_err() {
        chan.close();
    }
    result
}

fn client_session(cfg: &SessionConfig, words: &[Word], chan: &mut Channel) -> Result<ClientOutcome> {
    let mut hello = hello_fields(cfg);
    hello.put_u32(words.len() as u32);
    chan.send(HELLO, hello)?;
    let n_server = chan.recv_with(HELLO_ACK, |r| match r.get_u8()? {
        0 => Ok(Ok(r.get_u32()? as usize)),
        _ => {
            let len = r.get_u32()? as usize;
            let msg = String::from_utf8_lossy(r.take(len)?).into_owned();
            Ok(Err(Error::Usage(format!("server rejected session: {msg}"))))
        }
    })??;
    let params = cfg.params(words.len(), n_server)?;
    check_words(words, &params)?;

    let mut party = Party {
        cfg: cfg.clone(),
        params,
        rng: cfg.rng(Role::Client),
        chan,
        blinds: HashSet::new(),
        blind_count: 0,
    };
    let found = match cfg.protocol {
        ProtocolKind::Original => original::client(&mut party, words)?,
        ProtocolKind::Polynomial => polynomial::client(&mut party, words)?,
        ProtocolKind::SimpleSs => simple_ss::client(&mut party, words)?,
        ProtocolKind::ImprovedSs => improved_ss::client(&mut party, words)?,
        ProtocolKind::Hamming => hamming::client(&mut party, words)?,
    };
    party.chan.audit()?;
    Ok(ClientOutcome {
        matched: found.matched,
        learned: found.learned,
        stats: party.chan.snapshot_stats(),
        reconstructions: found.reconstructions,
        false_candidates: found.false_candidates,
    })
}

/// Runs the server side of one session.
pub fn run_server(cfg: &SessionConfig, words: &[Word], chan: &mut Channel) -> Result<ServerOutcome> {
    check_channel(cfg, chan, Role::Server)?;
    cfg.params(1, words.len())?;
    let result = server_session(cfg, words, chan);
    if result.is_err() {
        chan.close();
    }
    result
}

fn server_session(cfg: &SessionConfig, words: &[Word], chan: &mut Channel) -> Result<ServerOutcome> {
    let expected = hello_fields(cfg).into_bytes();
    let (theirs, n_client) = chan.recv_with(HELLO, |r| {
        let theirs = r.take(expected.len())?.to_vec();
        Ok((theirs, r.get_u32()? as usize))
    })?;
    let verdict = if theirs != expected {
        Err("session parameters differ between client and server".to_string())
    } else {
        cfg.params(n_client, words.len()).map_err(|e| e.to_string())
    };
    let params = match verdict {
        Ok(p) => p,
        Err(msg) => {
            let mut w = Writer::new();
            w.put_u8(1);
            w.put_u32(msg.len() as u32);
            w.put_raw(msg.as_bytes());
            chan.send(HELLO_ACK, w)?;
            return Err(Error::Usage(msg));
        }
    };
    check_words(words, &params)?;
    let mut ack = Writer::new();
    ack.put_u8(0);
    ack.put_u32(words.len() as u32);
    chan.send(HELLO_ACK, ack)?;

    let mut party = Party {
        cfg: cfg.clone(),
        params,
        rng: cfg.rng(Role::Server),
        chan,
        blinds: HashSet::new(),
        blind_count: 0,
    };
    match cfg.protocol {
        ProtocolKind::Original => original::server(&mut party, words)?,
        ProtocolKind::Polynomial => polynomial::server(&mut party, words)?,
        ProtocolKind::SimpleSs => simple_ss::server(&mut party, words)?,
        ProtocolKind::ImprovedSs => improved_ss::server(&mut party, words)?,
        ProtocolKind::Hamming => hamming::server(&mut party, words)?,
    }
    party.chan.audit()?;
    Ok(ServerOutcome {
        stats: party.chan.snapshot_stats(),
        blinding_factors: party.blind_count,
    })
}

/// Runs both parties over the given connected endpoints, the server on a
/// separate thread. The client endpoint stays with the caller so its
/// transcript can be inspected afterwards.
pub fn run_pair(
    cfg: &SessionConfig,
    client: &[Word],
    server: &[Word],
    client_chan: &mut Channel,
    mut server_chan: Channel,
) -> Result<(ClientOutcome, ServerOutcome)> {
    let server_cfg = cfg.clone();
    let server_words = server.to_vec();
    let handle = thread::spawn(move || run_server(&server_cfg, &server_words, &mut server_chan));
    let client_result = run_client(cfg, client, client_chan);
    let server_result = handle
        .join()
        .map_err(|_| Error::protocol("server thread panicked"))?;
    match (client_result, server_result) {
        (Ok(c), Ok(s)) => Ok((c, s)),
        (Err(Error::Closed), Err(e)) => Err(e),
        (Err(e), _) | (Ok(_), Err(e)) => Err(e),
    }
}

/// Runs a whole session in-process.
pub fn run_local(cfg: &SessionConfig, client: &[Word], server: &[Word]) -> Result<ClientOutcome> {
    let (mut c, s) = Channel::local_pair(cfg.protocol.id());
    run_pair(cfg, client, server, &mut c, s).map(|(outcome, _)| outcome)
}

/// Runs a whole session over a loopback TCP connection.
pub fn run_tcp(cfg: &SessionConfig, client: &[Word], server: &[Word]) -> Result<ClientOutcome> {
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let addr = listener.local_addr()?;
    let pid = cfg.protocol.id();
    let acceptor = thread::spawn(move || Channel::accept(&listener, pid));
    let mut c = Channel::connect(addr, pid)?;
    let s = acceptor
        .join()
        .map_err(|_| Error::protocol("accept thread panicked"))??;
    run_pair(cfg, client, server, &mut c, s).map(|(outcome, _)| outcome)
}

fn with_protocol(cfg: &SessionConfig, protocol: ProtocolKind) -> SessionConfig {
    SessionConfig {
        protocol,
        ..cfg.clone()
    }
}

/// The original three-letter protocol; known to leak.
pub fn run_original(client: &[Word], server: &[Word], cfg: &SessionConfig) -> Result<ClientOutcome> {
    run_local(&with_protocol(cfg, ProtocolKind::Original), client, server)
}

pub fn run_polynomial(client: &[Word], server: &[Word], cfg: &SessionConfig) -> Result<ClientOutcome> {
    run_local(&with_protocol(cfg, ProtocolKind::Polynomial), client, server)
}

pub fn run_simple_ss(client: &[Word], server: &[Word], cfg: &SessionConfig) -> Result<ClientOutcome> {
    run_local(&with_protocol(cfg, ProtocolKind::SimpleSs), client, server)
}

pub fn run_improved_ss(client: &[Word], server: &[Word], cfg: &SessionConfig) -> Result<ClientOutcome> {
    run_local(&with_protocol(cfg, ProtocolKind::ImprovedSs), client, server)
}

pub fn run_hamming(client: &[Word], server: &[Word], cfg: &SessionConfig) -> Result<ClientOutcome> {
    run_local(&with_protocol(cfg, ProtocolKind::Hamming), client, server)
}
