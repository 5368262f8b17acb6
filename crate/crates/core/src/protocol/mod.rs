//! Three-party signing: key grouping, signing, verification, transports
//! and the forgery attacker.

pub mod attack;
pub mod keyfile;
pub mod keys;
pub mod packet;
pub mod session;
pub mod sign;
pub mod single_bit;
pub mod transport;

pub use attack::{forge_attack_guess_key, max_guess_budget, simulate_forgery, AttackStats, ForgeryAttack};
pub use keyfile::{append_journal, load_key_groups, parse_key_file, read_journal, write_key_file};
pub use keys::{group_keys, perfect_key_groups, permute_bits, KeyAct, KeyGroups, PermutationSeeds, RawKeyPair, Role};
pub use packet::{PacketHeader, SignaturePacket, HEADER_BYTES};
pub use session::{run_protocol, run_verification, FailureTag, VerdictTranscript};
pub use sign::{alice_sign, receiver_verify, sign_with_act, verify_with_combined, RejectReason, Verdict};
pub use single_bit::{single_bit_encode_length, EncodeLength};
pub use transport::{Fault, Frame, FrameKind, FrameSelector, MemoryTransport, TcpTransport, Transport};
