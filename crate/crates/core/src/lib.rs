//! End-to-end encrypted meetings coordinated over two hash-chained,
//! append-only ledgers.
//!
//! * [`crypto`]: Ed25519, X25519, HKDF-SHA256, AES-256-GCM, HMAC-SHA256, SHA-256.
//! * [`ledger`]: the tamper-evident block chain both ledgers are built on.
//! * [`identity`]: `UserId -> DeviceId -> IVK` registration and lookup.
//! * [`meeting`]: the meeting state machine from publish to dismiss.
//! * [`sim`]: a seeded, single-threaded simulator with honest actors and adversaries.

pub mod codec;
pub mod crypto;
pub mod identity;
pub mod ledger;
pub mod meeting;
pub mod record;
pub mod sim;
