//! Message transport between the three parties.
//!
//! Frames are `(from, to, kind, payload)`. Two implementations: an
//! in-process queue with optional fault injection, and length-prefixed
//! frames over loopback TCP sockets.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};

use crate::error::ProtocolError;

use super::keys::Role;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FrameKind {
    Packet,
    KeyShare,
    Verdict,
}

impl FrameKind {
    fn wire_id(self) -> u8 {
        match self {
            FrameKind::Packet => 0,
            FrameKind::KeyShare => 1,
            FrameKind::Verdict => 2,
        }
    }

    fn from_wire_id(id: u8) -> Option<Self> {
        match id {
            0 => Some(FrameKind::Packet),
            1 => Some(FrameKind::KeyShare),
            2 => Some(FrameKind::Verdict),
            _ => None,
        }
    }
}

impl fmt::Display for FrameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FrameKind::Packet => "packet",
            FrameKind::KeyShare => "keys",
            FrameKind::Verdict => "verdict",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub from: Role,
    pub to: Role,
    pub kind: FrameKind,
    pub payload: Vec<u8>,
}

impl Frame {
    fn encode(&self) -> Vec<u8> {
        let mut out = vec![self.from.wire_id(), self.to.wire_id(), self.kind.wire_id()];
        out.extend_from_slice(&(self.payload.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.payload);
        out
    }
}

pub trait Transport: Send {
    fn send(&mut self, frame: Frame) -> Result<(), ProtocolError>;
    /// Next frame addressed to `to`.
    fn recv(&mut self, to: Role) -> Result<Frame, ProtocolError>;
}

/// Which frames a fault applies to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrameSelector {
    pub from: Role,
    pub to: Role,
    pub kind: FrameKind,
}

impl FrameSelector {
    fn matches(&self, f: &Frame) -> bool {
        self.from == f.from && self.to == f.to && self.kind == f.kind
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Flip one payload bit (index taken modulo the payload length).
    FlipBit { on: FrameSelector, bit: usize },
    Drop { on: FrameSelector },
}

/// Deterministic in-memory queue, one FIFO per recipient.
#[derive(Debug, Default)]
pub struct MemoryTransport {
    queues: HashMap<Role, VecDeque<Frame>>,
    faults: Vec<Fault>,
}

impl MemoryTransport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_faults(faults: Vec<Fault>) -> Self {
        Self {
            queues: HashMap::new(),
            faults,
        }
    }
}

impl Transport for MemoryTransport {
    fn send(&mut self, mut frame: Frame) -> Result<(), ProtocolError> {
        for fault in &self.faults {
            match *fault {
                Fault::Drop { on } if on.matches(&frame) => return Ok(()),
                Fault::FlipBit { on, bit } if on.matches(&frame) && !frame.payload.is_empty() => {
                    let bit = bit % (8 * frame.payload.len());
                    frame.payload[bit / 8] ^= 1 << (bit % 8);
                }
                _ => {}
            }
        }
        self.queues.entry(frame.to).or_default().push_back(frame);
        Ok(())
    }

    fn recv(&mut self, to: Role) -> Result<Frame, ProtocolError> {
        self.queues
            .get_mut(&to)
            .and_then(VecDeque::pop_front)
            .ok_or_else(|| ProtocolError::Transport(format!("no frame pending for {to}")))
    }
}

/// Each recipient owns one loopback connection; senders write to the
/// recipient's socket and the recipient reads frames from its end.
#[derive(Debug)]
pub struct TcpTransport {
    writers: HashMap<Role, TcpStream>,
    readers: HashMap<Role, TcpStream>,
}

impl TcpTransport {
    pub fn loopback() -> Result<Self, ProtocolError> {
        let io = |e: std::io::Error| ProtocolError::Transport(e.to_string());
        let listener = TcpListener::bind("127.0.0.1:0").map_err(io)?;
        let addr = listener.local_addr().map_err(io)?;
        let mut writers = HashMap::new();
        let mut readers = HashMap::new();
        for role in [Role::Alice, Role::Bob, Role::Charlie] {
            let w = TcpStream::connect(addr).map_err(io)?;
            let (r, _) = listener.accept().map_err(io)?;
            w.set_nodelay(true).map_err(io)?;
            writers.insert(role, w);
            readers.insert(role, r);
        }
        Ok(Self { writers, readers })
    }
}

impl Transport for TcpTransport {
    fn send(&mut self, frame: Frame) -> Result<(), ProtocolError> {
        let w = self
            .writers
            .get_mut(&frame.to)
            .ok_or_else(|| ProtocolError::Transport("unknown recipient".into()))?;
        w.write_all(&frame.encode())
            .and_then(|_| w.flush())
            .map_err(|e| ProtocolError::Transport(e.to_string()))
    }

    fn recv(&mut self, to: Role) -> Result<Frame, ProtocolError> {
        let io = |e: std::io::Error| ProtocolError::Transport(e.to_string());
        let r = self
            .readers
            .get_mut(&to)
            .ok_or_else(|| ProtocolError::Transport("unknown recipient".into()))?;
        let mut head = [0u8; 7];
        r.read_exact(&mut head).map_err(io)?;
        let bad = || ProtocolError::Transport("malformed frame header".into());
        let from = Role::from_wire_id(head[0]).ok_or_else(bad)?;
        let dest = Role::from_wire_id(head[1]).ok_or_else(bad)?;
        let kind = FrameKind::from_wire_id(head[2]).ok_or_else(bad)?;
        let len = u32::from_be_bytes(head[3..7].try_into().expect("4 bytes")) as usize;
        let mut payload = vec![0u8; len];
        r.read_exact(&mut payload).map_err(io)?;
        Ok(Frame {
            from,
            to: dest,
            kind,
            payload,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(kind: FrameKind) -> Frame {
        Frame {
            from: Role::Bob,
            to: Role::Charlie,
            kind,
            payload: vec![0, 1, 2, 3],
        }
    }

    #[test]
    fn memory_fifo_and_faults() {
        let on = FrameSelector {
            from: Role::Bob,
            to: Role::Charlie,
            kind: FrameKind::KeyShare,
        };
        let mut t = MemoryTransport::with_faults(vec![Fault::FlipBit { on, bit: 9 }]);
        t.send(frame(FrameKind::Packet)).unwrap();
        t.send(frame(FrameKind::KeyShare)).unwrap();
        assert_eq!(t.recv(Role::Charlie).unwrap().payload, vec![0, 1, 2, 3]);
        assert_eq!(t.recv(Role::Charlie).unwrap().payload, vec![0, 3, 2, 3]);
        assert!(t.recv(Role::Charlie).is_err());
    }

    #[test]
    fn tcp_loopback_delivers_frames() {
        let mut t = TcpTransport::loopback().unwrap();
        t.send(frame(FrameKind::Verdict)).unwrap();
        let f = t.recv(Role::Charlie).unwrap();
        assert_eq!(f, frame(FrameKind::Verdict));
    }
}
