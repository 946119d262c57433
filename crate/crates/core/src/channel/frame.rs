use std::io::{self, Read, Write};

use crate::error::{Error, Result};

/// Bytes preceding the payload: 4-byte length, protocol id, message type.
pub const HEADER_LEN: usize = 6;
pub const DEFAULT_MAX_FRAME: usize = 16 * 1024 * 1024;

/// `length (u32 BE) | protocol id | message type | payload`, where
/// `length = 2 + payload.len()`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub protocol_id: u8,
    pub msg_type: u8,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(protocol_id: u8, msg_type: u8, payload: Vec<u8>) -> Self {
        Frame {
            protocol_id,
            msg_type,
            payload,
        }
    }

    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + self.payload.len()
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(&((self.payload.len() + 2) as u32).to_be_bytes());
        out.push(self.protocol_id);
        out.push(self.msg_type);
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn decode(bytes: &[u8], max_frame: usize) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::protocol("frame shorter than its header"));
        }
        let len = u32::from_be_bytes(bytes[..4].try_into().unwrap()) as usize;
        check_len(len, max_frame)?;
        if bytes.len() != 4 + len {
            return Err(Error::protocol("frame length does not match its header"));
        }
        Ok(Frame {
            protocol_id: bytes[4],
            msg_type: bytes[5],
            payload: bytes[HEADER_LEN..].to_vec(),
        })
    }

    pub fn write_to(&self, w: &mut impl Write) -> io::Result<()> {
        w.write_all(&self.encode())
    }
}

fn check_len(len: usize, max_frame: usize) -> Result<()> {
    if len < 2 {
        return Err(Error::protocol(format!("frame length {len} below header size")));
    }
    if len > max_frame {
        return Err(Error::protocol(format!("frame of {len} bytes exceeds limit {max_frame}")));
    }
    Ok(())
}

/// Reads one encoded frame from a byte stream. A clean end of stream before
/// the first byte is [`Error::Closed`]; anywhere later it is a transport error.
pub fn read_frame_bytes(r: &mut impl Read, max_frame: usize) -> Result<Vec<u8>> {
    let mut len_buf = [0u8; 4];
    let mut got = 0;
    while got < 4 {
        match r.read(&mut len_buf[got..]) {
            Ok(0) if got == 0 => return Err(Error::Closed),
            Ok(0) => return Err(io::Error::from(io::ErrorKind::UnexpectedEof).into()),
            Ok(n) => got += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    let len = u32::from_be_bytes(len_buf) as usize;
    check_len(len, max_frame)?;
    let mut out = vec![0u8; 4 + len];
    out[..4].copy_from_slice(&len_buf);
    r.read_exact(&mut out[4..])?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let f = Frame::new(0x02, 0x10, vec![0xaa, 0xbb]);
        assert_eq!(f.encode(), vec![0, 0, 0, 4, 0x02, 0x10, 0xaa, 0xbb]);
        assert_eq!(Frame::decode(&f.encode(), DEFAULT_MAX_FRAME).unwrap(), f);
    }

    #[test]
    fn stream_errors() {
        let bytes = Frame::new(1, 1, vec![1, 2, 3]).encode();
        let mut empty: &[u8] = &[];
        assert!(matches!(read_frame_bytes(&mut empty, 64), Err(Error::Closed)));
        let mut cut = &bytes[..bytes.len() - 1];
        assert!(matches!(read_frame_bytes(&mut cut, 64), Err(Error::Transport(_))));
        let mut whole = &bytes[..];
        assert!(matches!(read_frame_bytes(&mut whole, 4), Err(Error::Protocol(_))));
        let mut whole = &bytes[..];
        assert_eq!(read_frame_bytes(&mut whole, 64).unwrap(), bytes);
    }
}
