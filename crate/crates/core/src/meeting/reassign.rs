//! Leader handover.
//!
//! Under [`LeaderRule::Designation`] the outgoing leader co-signs the choice of
//! successor. Under [`LeaderRule::TimeOrder`] the outgoing leader must already
//! have left, and the successor is fixed: the earliest still-present member
//! whose request verifies and who holds the current epoch key.

use std::fmt;

use rand_core::CryptoRngCore;

use crate::crypto::{EphemeralKeyPair, IdentityKeyPair, Signature, VerifyingKey};
use crate::identity::{binding_for_key, Credential};
use crate::ledger::{Ledger, RejectReason};
use crate::record::Record;

use super::lifecycle::verify_request;
use super::state::{MemberEntry, ParticipantState, Role};
use super::tx::{seal, LeaderReassignTx, SignedTx};
use super::view::{MeetingBook, MeetingView};
use super::{MeetingError, MeetingId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LeaderRule {
    #[default]
    Designation,
    TimeOrder,
}

impl LeaderRule {
    pub const ALL: [LeaderRule; 2] = [LeaderRule::Designation, LeaderRule::TimeOrder];

    pub fn name(self) -> &'static str {
        match self {
            LeaderRule::Designation => "designation",
            LeaderRule::TimeOrder => "time-order",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.name() == name)
    }
}

impl fmt::Display for LeaderRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How the handover is authorized.
#[derive(Debug, Clone, Copy)]
pub enum Succession<'a> {
    Designation { prev: &'a IdentityKeyPair },
    TimeOrder,
}

/// The only successor the time-order rule accepts.
pub fn time_order_successor(view: &MeetingView, identity: &Ledger) -> Option<VerifyingKey> {
    let keyed = view.current_recipients();
    view.active_requests()
        .filter(|r| keyed.contains(&r.request.ivk) && verify_request(&r.request, identity).is_ok())
        .min_by_key(|r| (r.block, r.position))
        .map(|r| r.request.ivk)
}

/// Builds the handover and the successor's promoted state.
///
/// The caller swaps in the returned state only once the ledger accepts the tx.
pub fn reassign_leader<R: CryptoRngCore + ?Sized>(
    meeting_ledger: &Ledger,
    meeting_id: MeetingId,
    prev: VerifyingKey,
    new: &Credential,
    new_state: &ParticipantState,
    succession: Succession<'_>,
    rng: &mut R,
) -> Result<(LeaderReassignTx, ParticipantState), MeetingError> {
    let book = MeetingBook::replay(meeting_ledger);
    let view = book.get(&meeting_id).ok_or(MeetingError::MeetingNotFound)?;
    if view.dismissed {
        return Err(MeetingError::MeetingDismissed);
    }
    if view.leader_ivk != prev {
        return Err(MeetingError::NotCurrentLeader);
    }
    if let Succession::Designation { prev: keys } = succession {
        if keys.ivk() != prev {
            return Err(MeetingError::NotCurrentLeader);
        }
    }
    if !view.is_keyed_member(&new.ivk()) {
        return Err(MeetingError::NewLeaderNotMember);
    }

    let ephemeral = EphemeralKeyPair::generate(rng);
    let mut tx = LeaderReassignTx {
        meeting_id,
        prev_leader_ivk: prev,
        new_leader_ivk: new.ivk(),
        new_leader_epk: ephemeral.epk(),
        prev_leader_sig: None,
        new_leader_sig: Signature([0; 64]),
    };
    if let Succession::Designation { prev: keys } = succession {
        tx.prev_leader_sig = Some(keys.sign(&tx.designation_input()));
    }
    tx.new_leader_sig = seal(&tx, &new.keys);

    let mut promoted = new_state.clone();
    promoted.role = Role::Leader;
    promoted.ephemeral = Some(ephemeral);
    promoted.ephemeral_spent = false;
    let keyed = view.current_recipients();
    promoted.members = view
        .active_requests()
        .filter(|r| keyed.contains(&r.request.ivk) && r.request.ivk != new.ivk())
        .map(|r| {
            let req = &r.request;
            let entry = MemberEntry {
                user: req.user.clone(),
                device: req.device.clone(),
                epk: req.epk,
            };
            (req.ivk, entry)
        })
        .collect();
    promoted.reviewed = view
        .requests
        .iter()
        .filter(|r| keyed.contains(&r.request.ivk) || r.departed)
        .map(|r| r.request.epk)
        .collect();
    Ok((tx, promoted))
}

pub(crate) fn check_reassign(
    view: &MeetingView,
    tx: &LeaderReassignTx,
    identity: &Ledger,
    rule: LeaderRule,
) -> Result<(), RejectReason> {
    if view.dismissed {
        return Err(RejectReason::MeetingDismissed);
    }
    if !tx.signature_valid() {
        return Err(RejectReason::BadSignature);
    }
    if binding_for_key(identity, &tx.new_leader_ivk).is_none() {
        return Err(RejectReason::UnknownIdentity);
    }
    if tx.prev_leader_ivk != view.leader_ivk {
        return Err(RejectReason::NotCurrentLeader);
    }
    if view.seen_epks.contains(&tx.new_leader_epk) {
        return Err(RejectReason::ReusedEphemeral);
    }
    match rule {
        LeaderRule::Designation => match tx.prev_signature_valid() {
            None => Err(RejectReason::RuleViolation),
            Some(false) => Err(RejectReason::BadSignature),
            Some(true) if !view.is_keyed_member(&tx.new_leader_ivk) => Err(RejectReason::RuleViolation),
            Some(true) => Ok(()),
        },
        LeaderRule::TimeOrder => {
            if tx.prev_leader_sig.is_some() || view.leader_present {
                return Err(RejectReason::RuleViolation);
            }
            if time_order_successor(view, identity) != Some(tx.new_leader_ivk) {
                return Err(RejectReason::RuleViolation);
            }
            Ok(())
        }
    }
}

/// Checks a handover against the ledgers as they stand.
pub fn validate_reassign(
    tx: &LeaderReassignTx,
    meeting_ledger: &Ledger,
    identity_ledger: &Ledger,
    rule: LeaderRule,
) -> Result<(), RejectReason> {
    MeetingBook::replay(meeting_ledger).check(&Record::LeaderReassign(tx.clone()), identity_ledger, rule)
}
