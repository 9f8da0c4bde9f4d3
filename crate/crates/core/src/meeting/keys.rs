//! Meeting key generation, wrapping and unwrapping.
//!
//! Each recipient's wrapping key is
//! `HKDF(dh(leader_esk, member_epk), meeting_id ‖ epoch ‖ leader_epk ‖ member_epk)`
//! and the wrap is authenticated with `meeting_id ‖ epoch ‖ recipient_ivk`.

use rand_core::CryptoRngCore;

use crate::codec::Writer;
use crate::crypto::{
    aead_decrypt, aead_encrypt, derive_enc_key, dh, random_nonce, DhPublicKey, EphemeralKeyPair, IdentityKeyPair,
    Signature, VerifyingKey,
};
use crate::ledger::Ledger;

use super::state::{ParticipantState, Role};
use super::tx::{seal, KeyDistributionTx, KeyEntry};
use super::view::MeetingBook;
use super::{MeetingError, MeetingId, MeetingKey};

pub fn generate_meeting_key<R: CryptoRngCore + ?Sized>(rng: &mut R, epoch: u32) -> MeetingKey {
    let mut mk = [0u8; 32];
    rng.fill_bytes(&mut mk);
    MeetingKey::new(mk, epoch)
}

pub fn key_context(meeting_id: &MeetingId, epoch: u32, leader_epk: &DhPublicKey, member_epk: &DhPublicKey) -> Vec<u8> {
    Writer::new()
        .raw(&meeting_id.0)
        .u32(epoch)
        .raw(&leader_epk.0)
        .raw(&member_epk.0)
        .finish()
}

pub fn wrap_aad(meeting_id: &MeetingId, epoch: u32, recipient: &VerifyingKey) -> Vec<u8> {
    Writer::new().raw(&meeting_id.0).u32(epoch).raw(&recipient.0).finish()
}

/// A signed distribution plus the members that could not be keyed.
#[derive(Debug, Clone)]
pub struct Distribution {
    pub tx: KeyDistributionTx,
    /// Members whose ephemeral key gave a degenerate shared secret.
    pub excluded: Vec<VerifyingKey>,
}

/// Wraps `mk` for every member under the leader's current ephemeral.
pub fn distribute_key<R: CryptoRngCore + ?Sized>(
    leader: &mut ParticipantState,
    keys: &IdentityKeyPair,
    members: &[(VerifyingKey, DhPublicKey)],
    mk: &MeetingKey,
    rng: &mut R,
) -> Result<Distribution, MeetingError> {
    if leader.role != Role::Leader || keys.ivk() != leader.me {
        return Err(MeetingError::NotCurrentLeader);
    }
    let ephemeral = leader.ephemeral.as_ref().ok_or(MeetingError::NoEphemeralKey)?;
    let leader_epk = ephemeral.epk();
    let mut entries = Vec::with_capacity(members.len());
    let mut excluded = Vec::new();
    for (recipient, member_epk) in members {
        let ss = match dh(ephemeral.esk(), member_epk) {
            Ok(ss) => ss,
            Err(_) => {
                excluded.push(*recipient);
                continue;
            }
        };
        let key = derive_enc_key(
            &ss,
            &key_context(&leader.meeting_id, mk.epoch(), &leader_epk, member_epk),
        );
        let sealed = aead_encrypt(
            &key,
            &random_nonce(rng),
            mk.bytes(),
            &wrap_aad(&leader.meeting_id, mk.epoch(), recipient),
        );
        entries.push(KeyEntry {
            recipient: *recipient,
            sealed,
        });
    }
    let mut tx = KeyDistributionTx {
        meeting_id: leader.meeting_id,
        epoch: mk.epoch(),
        leader_ivk: keys.ivk(),
        leader_epk,
        entries,
        signature: Signature([0; 64]),
    };
    tx.signature = seal(&tx, keys);
    leader.ephemeral_spent = true;
    leader.install_key(mk.clone());
    Ok(Distribution { tx, excluded })
}

/// Unwraps the caller's entry using its own meeting id and ephemeral key.
pub fn accept_key(member: &mut ParticipantState, tx: &KeyDistributionTx) -> Result<MeetingKey, MeetingError> {
    let entry = tx.entry_for(&member.me).ok_or(MeetingError::NoEntryForMe)?;
    let ephemeral = member.ephemeral.as_ref().ok_or(MeetingError::AuthenticationFailure)?;
    let ss = dh(ephemeral.esk(), &tx.leader_epk)?;
    let context = key_context(&member.meeting_id, tx.epoch, &tx.leader_epk, &ephemeral.epk());
    let key = derive_enc_key(&ss, &context);
    let plain = aead_decrypt(&key, &entry.sealed, &wrap_aad(&member.meeting_id, tx.epoch, &member.me))?;
    let mk: [u8; 32] = plain.try_into().map_err(|_| MeetingError::AuthenticationFailure)?;
    let mk = MeetingKey::new(mk, tx.epoch);
    member.install_key(mk.clone());
    if member.role == Role::Outsider {
        member.role = Role::Member;
    }
    Ok(mk)
}

/// Next epoch for the leader's current membership, read against the ledger.
///
/// Members whose request the ledger marks departed are dropped first. A fresh
/// ephemeral is drawn unless the announced one is still unused.
pub fn rekey<R: CryptoRngCore + ?Sized>(
    leader: &mut ParticipantState,
    keys: &IdentityKeyPair,
    meeting_ledger: &Ledger,
    rng: &mut R,
) -> Result<(MeetingKey, Distribution), MeetingError> {
    let book = MeetingBook::replay(meeting_ledger);
    let view = book.get(&leader.meeting_id).ok_or(MeetingError::MeetingNotFound)?;
    if view.dismissed {
        return Err(MeetingError::MeetingDismissed);
    }
    if leader.role != Role::Leader || !view.is_current_leader(&leader.me) {
        return Err(MeetingError::NotCurrentLeader);
    }
    leader.members.retain(|ivk, _| view.active_request_for(ivk).is_some());
    if leader.ephemeral_spent || leader.ephemeral.is_none() {
        leader.ephemeral = Some(EphemeralKeyPair::generate(rng));
        leader.ephemeral_spent = false;
    }
    let mk = generate_meeting_key(rng, view.next_epoch());
    let members: Vec<_> = leader.members.iter().map(|(ivk, m)| (*ivk, m.epk)).collect();
    let distribution = distribute_key(leader, keys, &members, &mk, rng)?;
    Ok((mk, distribution))
}
