use std::io::{BufReader, BufWriter, Write};
use std::net::TcpStream;
use std::sync::mpsc::{channel, Receiver, Sender};

use super::frame::read_frame_bytes;
use crate::error::{Error, Result};

/// Moves whole encoded frames between the two endpoints.
pub trait Transport: Send {
    fn send(&mut self, frame: &[u8]) -> Result<()>;
    fn recv(&mut self, max_frame: usize) -> Result<Vec<u8>>;
}

/// In-process pipe; each endpoint owns one direction of a pair of queues.
pub struct LocalTransport {
    tx: Sender<Vec<u8>>,
    rx: Receiver<Vec<u8>>,
}

impl LocalTransport {
    pub fn pair() -> (LocalTransport, LocalTransport) {
        let (a_tx, b_rx) = channel();
        let (b_tx, a_rx) = channel();
        (
            LocalTransport { tx: a_tx, rx: a_rx },
            LocalTransport { tx: b_tx, rx: b_rx },
        )
    }
}

impl Transport for LocalTransport {
    fn send(&mut self, frame: &[u8]) -> Result<()> {
        self.tx.send(frame.to_vec()).map_err(|_| Error::Closed)
    }

    fn recv(&mut self, _max_frame: usize) -> Result<Vec<u8>> {
        self.rx.recv().map_err(|_| Error::Closed)
    }
}

pub struct TcpTransport {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
}

impl TcpTransport {
    pub fn new(stream: TcpStream) -> Result<Self> {
        stream.set_nodelay(true)?;
        let reader = BufReader::new(stream.try_clone()?);
        Ok(TcpTransport {
            reader,
            writer: BufWriter::new(stream),
        })
    }
}

impl Transport for TcpTransport {
    fn send(&mut self, frame: &[u8]) -> Result<()> {
        self.writer.write_all(frame)?;
        self.writer.flush()?;
        Ok(())
    }

    fn recv(&mut self, max_frame: usize) -> Result<Vec<u8>> {
        read_frame_bytes(&mut self.reader, max_frame)
    }
}

/// Stand-in left behind by [`super::Channel::close`].
pub(super) struct ClosedTransport;

impl Transport for ClosedTransport {
    fn send(&mut self, _frame: &[u8]) -> Result<()> {
        Err(Error::Closed)
    }

    fn recv(&mut self, _max_frame: usize) -> Result<Vec<u8>> {
        Err(Error::Closed)
    }
}
