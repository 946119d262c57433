//! Framed duplex channel between client and server, with the per-endpoint
//! accounting that backs the complexity figures: bytes, ciphertexts, clear
//! ring values, sealed blobs, rounds and oblivious transfers.

mod frame;
mod transport;

use std::net::{TcpListener, TcpStream, ToSocketAddrs};

use serde::Serialize;

pub use frame::{read_frame_bytes, Frame, DEFAULT_MAX_FRAME, HEADER_LEN};
pub use transport::{LocalTransport, TcpTransport, Transport};

use crate::codec::{ItemCounts, Reader, Writer};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Client,
    Server,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Direction {
    ClientToServer,
    ServerToClient,
}

impl Role {
    pub fn outgoing(self) -> Direction {
        match self {
            Role::Client => Direction::ClientToServer,
            Role::Server => Direction::ServerToClient,
        }
    }

    pub fn incoming(self) -> Direction {
        match self {
            Role::Client => Direction::ServerToClient,
            Role::Server => Direction::ClientToServer,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ChannelStats {
    pub frames_c2s: u64,
    pub frames_s2c: u64,
    pub bytes_c2s: u64,
    pub bytes_s2c: u64,
    pub ciphertexts_c2s: u64,
    pub ciphertexts_s2c: u64,
    /// Ring elements sent unencrypted, both directions.
    pub clear_ring_values: u64,
    /// Symmetrically sealed words, both directions.
    pub sealed_blobs: u64,
    /// Number of changes of direction, counting the first frame.
    pub rounds: u64,
    pub ot_invocations: u64,
}

impl ChannelStats {
    pub fn ciphertexts_total(&self) -> u64 {
        self.ciphertexts_c2s + self.ciphertexts_s2c
    }

    pub fn bytes_total(&self) -> u64 {
        self.bytes_c2s + self.bytes_s2c
    }

    fn record(&mut self, dir: Direction, bytes: usize, counts: ItemCounts) {
        let bytes = bytes as u64;
        match dir {
            Direction::ClientToServer => {
                self.frames_c2s += 1;
                self.bytes_c2s += bytes;
                self.ciphertexts_c2s += counts.ciphertexts;
            }
            Direction::ServerToClient => {
                self.frames_s2c += 1;
                self.bytes_s2c += bytes;
                self.ciphertexts_s2c += counts.ciphertexts;
            }
        }
        self.clear_ring_values += counts.clear_values;
        self.sealed_blobs += counts.sealed;
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub direction: Direction,
    pub bytes: Vec<u8>,
}

pub struct Channel {
    role: Role,
    protocol_id: u8,
    transport: Box<dyn Transport>,
    stats: ChannelStats,
    last_direction: Option<Direction>,
    transcript: Option<Vec<TranscriptEntry>>,
    max_frame: usize,
}

impl std::fmt::Debug for Channel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Channel")
            .field("role", &self.role)
            .field("protocol_id", &self.protocol_id)
            .field("stats", &self.stats)
            .finish_non_exhaustive()
    }
}

impl Channel {
    pub fn new(role: Role, protocol_id: u8, transport: Box<dyn Transport>) -> Self {
        Channel {
            role,
            protocol_id,
            transport,
            stats: ChannelStats::default(),
            last_direction: None,
            transcript: None,
            max_frame: DEFAULT_MAX_FRAME,
        }
    }

    /// Connected client and server endpoints over an in-process pipe.
    pub fn local_pair(protocol_id: u8) -> (Channel, Channel) {
        let (a, b) = LocalTransport::pair();
        (
            Channel::new(Role::Client, protocol_id, Box::new(a)),
            Channel::new(Role::Server, protocol_id, Box::new(b)),
        )
    }

    pub fn tcp(role: Role, protocol_id: u8, stream: TcpStream) -> Result<Self> {
        Ok(Channel::new(role, protocol_id, Box::new(TcpTransport::new(stream)?)))
    }

    pub fn connect(addr: impl ToSocketAddrs, protocol_id: u8) -> Result<Self> {
        Self::tcp(Role::Client, protocol_id, TcpStream::connect(addr)?)
    }

    /// Accepts one client on `listener` and serves it.
    pub fn accept(listener: &TcpListener, protocol_id: u8) -> Result<Self> {
        let (stream, _) = listener.accept()?;
        Self::tcp(Role::Server, protocol_id, stream)
    }

    pub fn with_max_frame(mut self, max_frame: usize) -> Self {
        self.max_frame = max_frame;
        self
    }

    /// Starts keeping a copy of every frame sent or received.
    pub fn record_transcript(&mut self) {
        self.transcript.get_or_insert_with(Vec::new);
    }

    pub fn transcript(&self) -> &[TranscriptEntry] {
        self.transcript.as_deref().unwrap_or(&[])
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn protocol_id(&self) -> u8 {
        self.protocol_id
    }

    pub fn snapshot_stats(&self) -> ChannelStats {
        self.stats
    }

    fn observe(&mut self, dir: Direction, bytes: &[u8], counts: ItemCounts) {
        if self.last_direction != Some(dir) {
            self.stats.rounds += 1;
            self.last_direction = Some(dir);
        }
        self.stats.record(dir, bytes.len(), counts);
        if let Some(t) = self.transcript.as_mut() {
            t.push(TranscriptEntry {
                direction: dir,
                bytes: bytes.to_vec(),
            });
        }
    }

    /// Sends the writer's payload as one frame of type `msg_type`.
    pub fn send(&mut self, msg_type: u8, payload: Writer) -> Result<()> {
        let (bytes, counts) = payload.into_parts();
        let frame = Frame::new(self.protocol_id, msg_type, bytes);
        let encoded = frame.encode();
        if encoded.len() - 4 > self.max_frame {
            return Err(Error::protocol(format!(
                "outgoing frame of {} bytes exceeds limit {}",
                encoded.len() - 4,
                self.max_frame
            )));
        }
        self.transport.send(&encoded)?;
        self.observe(self.role.outgoing(), &encoded, counts);
        Ok(())
    }

    /// Receives the next frame, which must be of type `expected`, and parses
    /// its whole payload with `parse`.
    pub fn recv_with<T>(
        &mut self,
        expected: u8,
        parse: impl FnOnce(&mut Reader<'_>) -> Result<T>,
    ) -> Result<T> {
        let encoded = self.transport.recv(self.max_frame)?;
        let frame = Frame::decode(&encoded, self.max_frame)?;
        if frame.protocol_id != self.protocol_id {
            return Err(Error::protocol(format!(
                "frame for protocol {:#04x} on a {:#04x} session",
                frame.protocol_id, self.protocol_id
            )));
        }
        if frame.msg_type != expected {
            return Err(Error::protocol(format!(
                "expected message {expected:#04x}, received {:#04x}",
                frame.msg_type
            )));
        }
        let mut reader = Reader::new(&frame.payload);
        let value = parse(&mut reader)?;
        let counts = reader.finish()?;
        self.observe(self.role.incoming(), &encoded, counts);
        Ok(value)
    }

    /// Drops the underlying transport so the peer sees the channel close.
    pub fn close(&mut self) {
        self.transport = Box::new(transport::ClosedTransport);
    }

    /// Counts one completed oblivious transfer.
    pub fn note_ot(&mut self) {
        self.stats.ot_invocations += 1;
    }

    /// Checks that byte counters equal the recorded frame sizes.
    pub fn audit(&self) -> Result<()> {
        let Some(t) = &self.transcript else {
            return Ok(());
        };
        let sum = |d: Direction| -> u64 {
            t.iter().filter(|e| e.direction == d).map(|e| e.bytes.len() as u64).sum()
        };
        if sum(Direction::ClientToServer) != self.stats.bytes_c2s
            || sum(Direction::ServerToClient) != self.stats.bytes_s2c
        {
            return Err(Error::protocol("byte counters disagree with transcript"));
        }
        Ok(())
    }
}
