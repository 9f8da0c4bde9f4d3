//! Typed view over any ledger transaction.

use crate::codec::DecodeError;
use crate::crypto::VerifyingKey;
use crate::identity::IdentityTx;
use crate::ledger::{Transaction, TxTag};
use crate::meeting::{
    KeyDistributionTx, LeaderReassignTx, MeetingDismissTx, MeetingId, MeetingLeaveTx, MeetingRequestTx,
    PublishMeetingTx, SignedTx,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Record {
    Identity(IdentityTx),
    PublishMeeting(PublishMeetingTx),
    MeetingRequest(MeetingRequestTx),
    KeyDistribution(KeyDistributionTx),
    MeetingLeave(MeetingLeaveTx),
    LeaderReassign(LeaderReassignTx),
    MeetingDismiss(MeetingDismissTx),
}

impl Record {
    pub fn decode(tx: &Transaction) -> Result<Self, DecodeError> {
        Ok(match tx.tag {
            TxTag::Identity => Record::Identity(IdentityTx::from_transaction(tx)?),
            TxTag::PublishMeeting => Record::PublishMeeting(PublishMeetingTx::from_transaction(tx)?),
            TxTag::MeetingRequest => Record::MeetingRequest(MeetingRequestTx::from_transaction(tx)?),
            TxTag::KeyDistribution => Record::KeyDistribution(KeyDistributionTx::from_transaction(tx)?),
            TxTag::MeetingLeave => Record::MeetingLeave(MeetingLeaveTx::from_transaction(tx)?),
            TxTag::LeaderReassign => Record::LeaderReassign(LeaderReassignTx::from_transaction(tx)?),
            TxTag::MeetingDismiss => Record::MeetingDismiss(MeetingDismissTx::from_transaction(tx)?),
        })
    }

    /// The key whose signature the transaction carries.
    pub fn signer(&self) -> VerifyingKey {
        match self {
            Record::Identity(r) => r.ivk,
            Record::PublishMeeting(r) => r.signer(),
            Record::MeetingRequest(r) => r.signer(),
            Record::KeyDistribution(r) => r.signer(),
            Record::MeetingLeave(r) => r.signer(),
            Record::LeaderReassign(r) => r.signer(),
            Record::MeetingDismiss(r) => r.signer(),
        }
    }

    pub fn meeting_id(&self) -> Option<MeetingId> {
        match self {
            Record::Identity(_) => None,
            Record::PublishMeeting(r) => Some(r.meeting_id()),
            Record::MeetingRequest(r) => Some(r.meeting_id()),
            Record::KeyDistribution(r) => Some(r.meeting_id()),
            Record::MeetingLeave(r) => Some(r.meeting_id()),
            Record::LeaderReassign(r) => Some(r.meeting_id()),
            Record::MeetingDismiss(r) => Some(r.meeting_id()),
        }
    }
}

/// Signer lookup suitable for [`Ledger::dump`](crate::ledger::Ledger::dump).
pub fn signer_of(tx: &Transaction) -> Option<VerifyingKey> {
    Record::decode(tx).ok().map(|r| r.signer())
}
