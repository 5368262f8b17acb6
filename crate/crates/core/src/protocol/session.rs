//! End-to-end messaging stage: Alice signs, Bob and Charlie exchange
//! their key shares and verify in turn.

use std::fmt;

use rand::RngCore;

use crate::bits::BitString;
use crate::error::{FormatError, ProtocolError};
use crate::hash::Scheme;

use super::keys::{KeyAct, KeyGroups, Role};
use super::packet::SignaturePacket;
use super::sign::{alice_sign, receiver_verify, RejectReason, Verdict};
use super::transport::{Frame, FrameKind, Transport};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureTag {
    /// A frame was lost or unreadable; the session aborted.
    TransportAbort,
    /// Bob rejected and announced an abort.
    BobRejected,
    /// Bob accepted but Charlie rejected: the repudiation-relevant case.
    VerdictsDiverge,
}

impl fmt::Display for FailureTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailureTag::TransportAbort => "robustness:transport-abort",
            FailureTag::BobRejected => "rejected-by-bob",
            FailureTag::VerdictsDiverge => "repudiation-relevant:verdicts-diverge",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerdictTranscript {
    pub bob: Option<Verdict>,
    /// Only set when Bob accepted.
    pub charlie: Option<Verdict>,
    pub failure: Option<FailureTag>,
    pub act: usize,
    /// One event per line, including every transmitted frame in hex.
    pub events: Vec<String>,
}

impl VerdictTranscript {
    pub fn bob_accepts(&self) -> bool {
        self.bob.is_some_and(Verdict::is_accept)
    }

    pub fn charlie_accepts(&self) -> bool {
        self.charlie.is_some_and(Verdict::is_accept)
    }

    pub fn both_accept(&self) -> bool {
        self.bob_accepts() && self.charlie_accepts()
    }

    pub fn render(&self) -> String {
        let mut s = self.events.join("\n");
        s.push('\n');
        s
    }
}

/// Key share wire form: scheme, n (u32), act (u32), then each string's bytes.
pub fn encode_key_share(k: &KeyAct) -> Vec<u8> {
    let mut out = vec![k.scheme.wire_id()];
    out.extend_from_slice(&(k.n as u32).to_be_bytes());
    out.extend_from_slice(&(k.index as u32).to_be_bytes());
    for s in &k.strings {
        out.extend_from_slice(&s.to_bytes());
    }
    out
}

pub fn decode_key_share(bytes: &[u8], role: Role) -> Result<KeyAct, FormatError> {
    if bytes.len() < 9 {
        return Err(FormatError::Length {
            expected: 9,
            found: bytes.len(),
        });
    }
    let scheme = Scheme::from_wire_id(bytes[0])
        .ok_or_else(|| FormatError::Malformed("unknown scheme id".into()))?;
    let n = u32::from_be_bytes(bytes[1..5].try_into().expect("4 bytes")) as usize;
    let index = u32::from_be_bytes(bytes[5..9].try_into().expect("4 bytes")) as usize;
    let per = n.div_ceil(8);
    let c = scheme.strings_per_act();
    let body = &bytes[9..];
    if body.len() != c * per {
        return Err(FormatError::Length {
            expected: c * per,
            found: body.len(),
        });
    }
    let strings = body
        .chunks(per)
        .map(|ch| BitString::from_hex(&hex::encode(ch), n))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(KeyAct {
        index,
        role,
        scheme,
        n,
        strings,
    })
}

/// Optional misbehaviour hook: Bob rewrites the packet he forwards.
pub type ForwardHook<'a> = &'a dyn Fn(&SignaturePacket) -> SignaturePacket;

struct Log<'t> {
    t: &'t mut VerdictTranscript,
}

impl Log<'_> {
    fn event(&mut self, line: String) {
        self.t.events.push(line);
    }

    fn send(&mut self, tr: &mut dyn Transport, frame: Frame) -> Result<(), ProtocolError> {
        self.event(format!(
            "send {}->{} {} len={} hex={}",
            frame.from,
            frame.to,
            frame.kind,
            frame.payload.len(),
            hex::encode(&frame.payload)
        ));
        tr.send(frame)
    }

    fn recv(
        &mut self,
        tr: &mut dyn Transport,
        to: Role,
        kind: FrameKind,
    ) -> Result<Frame, ProtocolError> {
        let f = tr.recv(to)?;
        self.event(format!(
            "recv {}->{} {} len={}",
            f.from,
            f.to,
            f.kind,
            f.payload.len()
        ));
        if f.kind != kind {
            return Err(ProtocolError::Transport(format!(
                "{to} expected a {kind} frame, got {}",
                f.kind
            )));
        }
        Ok(f)
    }
}

/// Runs the full messaging stage for one act. Key misuse is an error;
/// transport failures and rejections are reported in the transcript.
#[allow(clippy::too_many_arguments)]
pub fn run_protocol<R: RngCore + ?Sized>(
    message: &BitString,
    act: usize,
    alice: &mut KeyGroups,
    bob: &KeyGroups,
    charlie: &KeyGroups,
    transport: &mut dyn Transport,
    rng: &mut R,
    forward: Option<ForwardHook<'_>>,
) -> Result<VerdictTranscript, ProtocolError> {
    check_parties(alice, bob, charlie)?;
    let packet = alice_sign(message, alice, act, rng)?;
    let mut transcript = VerdictTranscript {
        act,
        ..Default::default()
    };
    transcript
        .events
        .push(format!("sign alice act={act} scheme={} n={}", alice.scheme(), alice.n()));
    let sent = Log { t: &mut transcript }.send(
        transport,
        Frame {
            from: Role::Alice,
            to: Role::Bob,
            kind: FrameKind::Packet,
            payload: packet.to_bytes(),
        },
    );
    if let Err(e) = sent {
        abort(&mut transcript, &e);
        return Ok(transcript);
    }
    verification_into(&mut transcript, act, bob, charlie, transport, forward)?;
    Ok(transcript)
}

/// Receivers' half of the protocol, starting from a packet already queued
/// for Bob.
pub fn run_verification(
    act: usize,
    bob: &KeyGroups,
    charlie: &KeyGroups,
    transport: &mut dyn Transport,
    forward: Option<ForwardHook<'_>>,
) -> Result<VerdictTranscript, ProtocolError> {
    let mut transcript = VerdictTranscript {
        act,
        ..Default::default()
    };
    verification_into(&mut transcript, act, bob, charlie, transport, forward)?;
    Ok(transcript)
}

fn check_parties(
    alice: &KeyGroups,
    bob: &KeyGroups,
    charlie: &KeyGroups,
) -> Result<(), ProtocolError> {
    if alice.role() != Role::Alice || bob.role() != Role::Bob || charlie.role() != Role::Charlie {
        return Err(ProtocolError::Role("parties must be alice, bob, charlie".into()));
    }
    if alice.scheme() != bob.scheme()
        || bob.scheme() != charlie.scheme()
        || alice.n() != bob.n()
        || bob.n() != charlie.n()
    {
        return Err(ProtocolError::Inconsistent(
            "scheme and group size must agree across parties".into(),
        ));
    }
    Ok(())
}

fn abort(t: &mut VerdictTranscript, e: &ProtocolError) {
    t.events.push(format!("abort {e}"));
    t.failure = Some(FailureTag::TransportAbort);
}

fn verification_into(
    t: &mut VerdictTranscript,
    act: usize,
    bob: &KeyGroups,
    charlie: &KeyGroups,
    transport: &mut dyn Transport,
    forward: Option<ForwardHook<'_>>,
) -> Result<(), ProtocolError> {
    if bob.role() != Role::Bob || charlie.role() != Role::Charlie {
        return Err(ProtocolError::Role("receivers must be bob and charlie".into()));
    }
    let bob_act = bob.act(act)?;
    let charlie_act = charlie.act(act)?;
    let result = exchange(t, &bob_act, &charlie_act, transport, forward);
    if let Err(e) = result {
        abort(t, &e);
    }
    Ok(())
}

fn exchange(
    t: &mut VerdictTranscript,
    bob_act: &KeyAct,
    charlie_act: &KeyAct,
    tr: &mut dyn Transport,
    forward: Option<ForwardHook<'_>>,
) -> Result<(), ProtocolError> {
    let mut log = Log { t };
    let frame = log.recv(tr, Role::Bob, FrameKind::Packet)?;
    let received = SignaturePacket::from_bytes(&frame.payload);
    let Ok(packet) = received else {
        let v = Verdict::Reject(RejectReason::Format);
        log.event(format!("verify bob {v}"));
        log.send(tr, verdict_frame(v))?;
        log.t.bob = Some(v);
        log.t.failure = Some(FailureTag::BobRejected);
        return Ok(());
    };
    let forwarded = forward.map_or_else(|| packet.clone(), |f| f(&packet));
    log.send(
        tr,
        Frame {
            from: Role::Bob,
            to: Role::Charlie,
            kind: FrameKind::Packet,
            payload: forwarded.to_bytes(),
        },
    )?;
    log.send(
        tr,
        Frame {
            from: Role::Bob,
            to: Role::Charlie,
            kind: FrameKind::KeyShare,
            payload: encode_key_share(bob_act),
        },
    )?;
    let charlie_packet = log.recv(tr, Role::Charlie, FrameKind::Packet)?;
    let bob_share = log.recv(tr, Role::Charlie, FrameKind::KeyShare)?;
    log.send(
        tr,
        Frame {
            from: Role::Charlie,
            to: Role::Bob,
            kind: FrameKind::KeyShare,
            payload: encode_key_share(charlie_act),
        },
    )?;
    let charlie_share = log.recv(tr, Role::Bob, FrameKind::KeyShare)?;

    let bob_verdict = match decode_key_share(&charlie_share.payload, Role::Charlie) {
        Ok(k) => receiver_verify(&packet, bob_act, &k)?,
        Err(_) => Verdict::Reject(RejectReason::Format),
    };
    log.event(format!("verify bob {bob_verdict}"));
    log.t.bob = Some(bob_verdict);
    log.send(tr, verdict_frame(bob_verdict))?;
    let announced = log.recv(tr, Role::Charlie, FrameKind::Verdict)?;
    if announced.payload != [1] {
        log.event("charlie skips verification after bob's rejection".into());
        log.t.failure = Some(FailureTag::BobRejected);
        return Ok(());
    }

    let charlie_verdict = match (
        SignaturePacket::from_bytes(&charlie_packet.payload),
        decode_key_share(&bob_share.payload, Role::Bob),
    ) {
        (Ok(p), Ok(k)) => receiver_verify(&p, charlie_act, &k)?,
        _ => Verdict::Reject(RejectReason::Format),
    };
    log.event(format!("verify charlie {charlie_verdict}"));
    log.t.charlie = Some(charlie_verdict);
    if !charlie_verdict.is_accept() {
        log.t.failure = Some(FailureTag::VerdictsDiverge);
    }
    Ok(())
}

fn verdict_frame(v: Verdict) -> Frame {
    Frame {
        from: Role::Bob,
        to: Role::Charlie,
        kind: FrameKind::Verdict,
        payload: vec![v.is_accept() as u8],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::keys::perfect_key_groups;
    use crate::protocol::transport::{Fault, FrameSelector, MemoryTransport, TcpTransport};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn setup(scheme: Scheme) -> ([KeyGroups; 3], ChaCha20Rng) {
        let mut rng = ChaCha20Rng::seed_from_u64(31);
        (perfect_key_groups(scheme, 32, 2, &mut rng).unwrap(), rng)
    }

    #[test]
    fn honest_run_accepts_on_both_transports() {
        for scheme in [Scheme::Lfsr, Scheme::Gdh] {
            let ([mut a, b, c], mut rng) = setup(scheme);
            let msg = BitString::from_bytes(b"pay 10 to carol");
            let mut mem = MemoryTransport::new();
            let t = run_protocol(&msg, 0, &mut a, &b, &c, &mut mem, &mut rng, None).unwrap();
            assert!(t.both_accept(), "{}", t.render());
            assert_eq!(t.failure, None);
            let mut tcp = TcpTransport::loopback().unwrap();
            let t = run_protocol(&msg, 1, &mut a, &b, &c, &mut tcp, &mut rng, None).unwrap();
            assert!(t.both_accept());
        }
    }

    #[test]
    fn corrupted_key_forwarding_diverges() {
        let ([mut a, b, c], mut rng) = setup(Scheme::Lfsr);
        let on = FrameSelector {
            from: Role::Bob,
            to: Role::Charlie,
            kind: FrameKind::KeyShare,
        };
        let mut mem = MemoryTransport::with_faults(vec![Fault::FlipBit { on, bit: 100 }]);
        let msg = BitString::from_bytes(b"hello");
        let t = run_protocol(&msg, 0, &mut a, &b, &c, &mut mem, &mut rng, None).unwrap();
        assert!(t.bob_accepts());
        assert!(!t.charlie_accepts());
        assert_eq!(t.failure, Some(FailureTag::VerdictsDiverge));
    }

    #[test]
    fn dropped_frame_aborts() {
        let ([mut a, b, c], mut rng) = setup(Scheme::Gdh);
        let on = FrameSelector {
            from: Role::Charlie,
            to: Role::Bob,
            kind: FrameKind::KeyShare,
        };
        let mut mem = MemoryTransport::with_faults(vec![Fault::Drop { on }]);
        let t = run_protocol(&BitString::zeros(64), 0, &mut a, &b, &c, &mut mem, &mut rng, None)
            .unwrap();
        assert_eq!(t.failure, Some(FailureTag::TransportAbort));
        assert!(!t.bob_accepts());
    }

    #[test]
    fn tampered_forward_is_rejected_by_charlie() {
        let ([mut a, b, c], mut rng) = setup(Scheme::Lfsr);
        let hook = |p: &SignaturePacket| {
            let mut q = p.clone();
            q.message.flip(0);
            q
        };
        let mut mem = MemoryTransport::new();
        let t = run_protocol(
            &BitString::from_bytes(b"original"),
            0,
            &mut a,
            &b,
            &c,
            &mut mem,
            &mut rng,
            Some(&hook),
        )
        .unwrap();
        assert!(t.bob_accepts());
        assert!(!t.charlie_accepts());
    }

    #[test]
    fn key_share_roundtrip() {
        let ([_, b, _], _) = setup(Scheme::Lfsr);
        let k = b.act(1).unwrap();
        let back = decode_key_share(&encode_key_share(&k), Role::Bob).unwrap();
        assert_eq!(back, k);
    }
}
