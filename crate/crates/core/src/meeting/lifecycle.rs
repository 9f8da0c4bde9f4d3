use rand_core::CryptoRngCore;

use crate::crypto::{EphemeralKeyPair, Signature};
use crate::identity::{lookup_identity, Credential};
use crate::ledger::{Ledger, RejectReason, TxTag};

use super::policy::AuthorizationPolicy;
use super::state::{MemberEntry, ParticipantState, Role};
use super::tx::{seal, MeetingDismissTx, MeetingLeaveTx, MeetingRequestTx, PublishMeetingTx, SignedTx};
use super::view::MeetingBook;
use super::{MeetingError, MeetingId, MAX_MEETING_INFO_LEN};

/// Fresh meeting id and leader ephemeral; the returned state is the leader's.
pub fn publish_meeting<R: CryptoRngCore + ?Sized>(
    leader: &Credential,
    meeting_info: &str,
    rng: &mut R,
) -> Result<(PublishMeetingTx, ParticipantState), MeetingError> {
    if meeting_info.len() > MAX_MEETING_INFO_LEN {
        return Err(MeetingError::Rejected(RejectReason::Malformed));
    }
    let meeting_id = MeetingId::random(rng);
    let ephemeral = EphemeralKeyPair::generate(rng);
    let mut tx = PublishMeetingTx {
        meeting_id,
        meeting_info: meeting_info.to_owned(),
        leader_ivk: leader.ivk(),
        leader_epk: ephemeral.epk(),
        signature: Signature([0; 64]),
    };
    tx.signature = seal(&tx, &leader.keys);
    let state = ParticipantState::outsider(meeting_id, leader.ivk()).with_ephemeral(Role::Leader, ephemeral);
    Ok((tx, state))
}

/// A signed request with a fresh ephemeral; the state stays `Outsider` until keyed.
pub fn make_request<R: CryptoRngCore + ?Sized>(
    participant: &Credential,
    meeting_ledger: &Ledger,
    meeting_id: MeetingId,
    rng: &mut R,
) -> Result<(MeetingRequestTx, ParticipantState), MeetingError> {
    let book = MeetingBook::replay(meeting_ledger);
    let view = book.get(&meeting_id).ok_or(MeetingError::MeetingNotFound)?;
    if view.dismissed {
        return Err(MeetingError::MeetingDismissed);
    }
    let ephemeral = EphemeralKeyPair::generate(rng);
    let mut tx = MeetingRequestTx {
        meeting_id,
        user: participant.user.clone(),
        device: participant.device.clone(),
        ivk: participant.ivk(),
        epk: ephemeral.epk(),
        signature: Signature([0; 64]),
    };
    tx.signature = seal(&tx, &participant.keys);
    let state = ParticipantState::outsider(meeting_id, participant.ivk()).with_ephemeral(Role::Outsider, ephemeral);
    Ok((tx, state))
}

pub fn get_meeting_requests(meeting_ledger: &Ledger, meeting_id: &MeetingId) -> Vec<MeetingRequestTx> {
    meeting_ledger
        .query(|tx| tx.tag == TxTag::MeetingRequest)
        .into_iter()
        .filter_map(|(_, tx)| MeetingRequestTx::from_transaction(tx).ok())
        .filter(|r| &r.meeting_id == meeting_id)
        .collect()
}

/// Signature under the claimed key, then the claimed key against the identity ledger.
pub fn verify_request(req: &MeetingRequestTx, identity_ledger: &Ledger) -> Result<(), RejectReason> {
    if !req.signature_valid() {
        return Err(RejectReason::BadSignature);
    }
    match lookup_identity(identity_ledger, &req.user, &req.device) {
        None => Err(RejectReason::UnknownIdentity),
        Some(bound) if bound.ivk != req.ivk => Err(RejectReason::KeyMismatch),
        Some(_) => Ok(()),
    }
}

/// Applies `policy` to a verified request; admitted requesters join the leader's view.
///
/// The request is marked reviewed either way so later polls skip it.
pub fn authorize(
    leader: &mut ParticipantState,
    req: &MeetingRequestTx,
    identity_ledger: &Ledger,
    policy: &dyn AuthorizationPolicy,
) -> Result<bool, MeetingError> {
    leader.reviewed.insert(req.epk);
    let record = lookup_identity(identity_ledger, &req.user, &req.device)
        .ok_or(MeetingError::Rejected(RejectReason::UnknownIdentity))?;
    let admitted = policy.authorize(&req.user, &req.device, &record.userinfo);
    if admitted {
        leader.members.insert(
            req.ivk,
            MemberEntry {
                user: req.user.clone(),
                device: req.device.clone(),
                epk: req.epk,
            },
        );
    }
    Ok(admitted)
}

/// Signed leave record. Keys are purged locally.
pub fn make_leave(state: &mut ParticipantState, member: &Credential) -> Result<MeetingLeaveTx, MeetingError> {
    if state.role == Role::Outsider || state.me != member.ivk() {
        return Err(MeetingError::NotAMember);
    }
    let mut tx = MeetingLeaveTx {
        meeting_id: state.meeting_id,
        member_ivk: member.ivk(),
        signature: Signature([0; 64]),
    };
    tx.signature = seal(&tx, &member.keys);
    purge_keys(state);
    Ok(tx)
}

pub fn dismiss_meeting(state: &ParticipantState, leader: &Credential) -> Result<MeetingDismissTx, MeetingError> {
    if state.role != Role::Leader || state.me != leader.ivk() {
        return Err(MeetingError::NotCurrentLeader);
    }
    let mut tx = MeetingDismissTx {
        meeting_id: state.meeting_id,
        leader_ivk: leader.ivk(),
        signature: Signature([0; 64]),
    };
    tx.signature = seal(&tx, &leader.keys);
    Ok(tx)
}

/// Drops every secret tied to the meeting. Idempotent.
pub fn purge_keys(state: &mut ParticipantState) {
    state.known_mk = None;
    state.ephemeral = None;
    state.ephemeral_spent = false;
    state.stream_keys.clear();
    state.stream_counters.clear();
    state.members.clear();
    state.role = Role::Outsider;
}
