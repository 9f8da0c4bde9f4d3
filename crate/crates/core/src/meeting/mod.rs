//! Meeting lifecycle: publish, request, verify, authorize, key distribution,
//! media encryption, rekey, leave, leader reassignment and dismissal.
//!
//! All coordination goes through signed transactions on the meeting ledger.
//! Each participant keeps a [`ParticipantState`] per meeting; state machines
//! never share memory and only learn about each other through the ledger.

mod keys;
mod lifecycle;
mod media;
mod policy;
mod reassign;
mod state;
mod tx;
mod view;

use std::fmt;

use rand_core::CryptoRngCore;
use thiserror::Error;
use zeroize::{Zeroize, ZeroizeOnDrop};

use crate::crypto::CryptoError;
use crate::ledger::RejectReason;

pub use keys::{accept_key, distribute_key, generate_meeting_key, key_context, rekey, wrap_aad, Distribution};
pub use lifecycle::{
    authorize, dismiss_meeting, get_meeting_requests, make_leave, make_request, publish_meeting, purge_keys,
    verify_request,
};
pub use media::{decrypt_media, derive_stream_key, encrypt_media, media_aad, media_nonce, MediaPacket, StreamId};
pub use policy::{
    AllowAll, AuthorizationPolicy, CommitmentPolicy, DenyList, Opening, Openings, PolicyFactory, PolicyRegistry,
};
pub use reassign::{reassign_leader, time_order_successor, validate_reassign, LeaderRule, Succession};
pub use state::{MemberEntry, ParticipantState, Role};
pub use tx::{
    KeyDistributionTx, KeyEntry, LeaderReassignTx, MeetingDismissTx, MeetingLeaveTx, MeetingRequestTx,
    PublishMeetingTx, SignedTx,
};
pub use view::{MeetingBook, MeetingValidator, MeetingView, RequestRecord};

pub const MAX_MEETING_INFO_LEN: usize = 1024;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MeetingId(pub [u8; 16]);

impl MeetingId {
    pub fn random<R: CryptoRngCore + ?Sized>(rng: &mut R) -> Self {
        let mut id = [0u8; 16];
        rng.fill_bytes(&mut id);
        Self(id)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Debug for MeetingId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MeetingId({})", self.to_hex())
    }
}

impl fmt::Display for MeetingId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// 32-byte group secret for one epoch.
#[derive(Clone, PartialEq, Eq, Zeroize, ZeroizeOnDrop)]
pub struct MeetingKey {
    mk: [u8; 32],
    #[zeroize(skip)]
    epoch: u32,
}

impl MeetingKey {
    pub fn new(mk: [u8; 32], epoch: u32) -> Self {
        Self { mk, epoch }
    }

    pub fn bytes(&self) -> &[u8; 32] {
        &self.mk
    }

    pub fn epoch(&self) -> u32 {
        self.epoch
    }
}

impl fmt::Debug for MeetingKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MeetingKey")
            .field("epoch", &self.epoch)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum MeetingError {
    #[error("meeting not found")]
    MeetingNotFound,
    #[error("meeting dismissed")]
    MeetingDismissed,
    #[error("no key entry for this participant")]
    NoEntryForMe,
    #[error("authentication failure")]
    AuthenticationFailure,
    #[error("degenerate Diffie-Hellman shared secret")]
    DegenerateSharedSecret,
    #[error("no meeting key held")]
    NoMeetingKey,
    #[error("no ephemeral key held")]
    NoEphemeralKey,
    #[error("packet counter exhausted for this stream and epoch")]
    CounterExhausted,
    #[error("not a member of the meeting")]
    NotAMember,
    #[error("not the current leader")]
    NotCurrentLeader,
    #[error("proposed leader is not a current member")]
    NewLeaderNotMember,
    #[error("transaction rejected: {0}")]
    Rejected(RejectReason),
}

impl MeetingError {
    pub fn code(self) -> &'static str {
        match self {
            MeetingError::MeetingNotFound => "meeting_not_found",
            MeetingError::MeetingDismissed => "meeting_dismissed",
            MeetingError::NoEntryForMe => "no_entry_for_me",
            MeetingError::AuthenticationFailure => "auth_fail",
            MeetingError::DegenerateSharedSecret => "degenerate_shared_secret",
            MeetingError::NoMeetingKey => "no_key",
            MeetingError::NoEphemeralKey => "no_ephemeral",
            MeetingError::CounterExhausted => "counter_exhausted",
            MeetingError::NotAMember => "not_a_member",
            MeetingError::NotCurrentLeader => "not_current_leader",
            MeetingError::NewLeaderNotMember => "new_leader_not_member",
            MeetingError::Rejected(r) => r.code(),
        }
    }
}

impl From<CryptoError> for MeetingError {
    fn from(e: CryptoError) -> Self {
        match e {
            CryptoError::AuthenticationFailure => MeetingError::AuthenticationFailure,
            CryptoError::DegenerateSharedSecret => MeetingError::DegenerateSharedSecret,
        }
    }
}

impl From<RejectReason> for MeetingError {
    fn from(r: RejectReason) -> Self {
        MeetingError::Rejected(r)
    }
}
