//! Meeting-ledger transaction bodies.
//!
//! ```text
//! publish_meeting   meeting_id(16) ‖ len ‖ info ‖ leader_ivk(32) ‖ leader_epk(32)
//! meeting_request   meeting_id(16) ‖ len ‖ user ‖ len ‖ device ‖ ivk(32) ‖ epk(32)
//! key_distribution  meeting_id(16) ‖ epoch(4) ‖ leader_ivk(32) ‖ leader_epk(32) ‖ count(4) ‖ entry*
//!                   entry = recipient_ivk(32) ‖ nonce(12) ‖ len ‖ ct ‖ tag(16)
//! meeting_leave     meeting_id(16) ‖ member_ivk(32)
//! leader_reassign   meeting_id(16) ‖ prev_ivk(32) ‖ new_ivk(32) ‖ new_epk(32) ‖ flag(1) ‖ [prev_sig(64)]
//! meeting_dismiss   meeting_id(16) ‖ leader_ivk(32)
//! ```
//!
//! The transaction signature is always by the key named in the body; for a
//! reassignment that is the new leader.

use crate::codec::{DecodeError, Reader, Writer};
use crate::crypto::{verify, AeadBox, DhPublicKey, Signature, VerifyingKey};
use crate::identity::{DeviceId, UserId};
use crate::ledger::{Transaction, TxTag};

use super::{MeetingId, MAX_MEETING_INFO_LEN};

/// Shared shape of every meeting-ledger record.
pub trait SignedTx: Sized {
    const TAG: TxTag;

    fn body(&self) -> Vec<u8>;
    fn decode(body: &[u8], signature: Signature) -> Result<Self, DecodeError>;
    fn meeting_id(&self) -> MeetingId;
    fn signer(&self) -> VerifyingKey;
    fn signature(&self) -> Signature;

    fn to_transaction(&self) -> Transaction {
        Transaction {
            tag: Self::TAG,
            body: self.body(),
            signature: self.signature(),
        }
    }

    fn from_transaction(tx: &Transaction) -> Result<Self, DecodeError> {
        if tx.tag != Self::TAG {
            return Err(DecodeError::Invalid("tag"));
        }
        Self::decode(&tx.body, tx.signature)
    }

    fn signature_valid(&self) -> bool {
        verify(
            &self.signer(),
            &Transaction::signing_input(Self::TAG, &self.body()),
            &self.signature(),
        )
    }
}

fn read_meeting_id(r: &mut Reader<'_>) -> Result<MeetingId, DecodeError> {
    Ok(MeetingId(r.array("meeting id")?))
}

fn read_ivk(r: &mut Reader<'_>, what: &'static str) -> Result<VerifyingKey, DecodeError> {
    Ok(VerifyingKey(r.array(what)?))
}

fn read_epk(r: &mut Reader<'_>, what: &'static str) -> Result<DhPublicKey, DecodeError> {
    Ok(DhPublicKey(r.array(what)?))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublishMeetingTx {
    pub meeting_id: MeetingId,
    pub meeting_info: String,
    pub leader_ivk: VerifyingKey,
    pub leader_epk: DhPublicKey,
    pub signature: Signature,
}

impl SignedTx for PublishMeetingTx {
    const TAG: TxTag = TxTag::PublishMeeting;

    fn body(&self) -> Vec<u8> {
        Writer::new()
            .raw(&self.meeting_id.0)
            .var(self.meeting_info.as_bytes())
            .raw(&self.leader_ivk.0)
            .raw(&self.leader_epk.0)
            .finish()
    }

    fn decode(body: &[u8], signature: Signature) -> Result<Self, DecodeError> {
        let mut r = Reader::new(body);
        let meeting_id = read_meeting_id(&mut r)?;
        let info = r.var("meeting info")?;
        if info.len() > MAX_MEETING_INFO_LEN {
            return Err(DecodeError::Invalid("meeting info length"));
        }
        let meeting_info = std::str::from_utf8(info)
            .map_err(|_| DecodeError::Invalid("meeting info"))?
            .to_owned();
        let leader_ivk = read_ivk(&mut r, "leader ivk")?;
        let leader_epk = read_epk(&mut r, "leader epk")?;
        r.finish()?;
        Ok(Self {
            meeting_id,
            meeting_info,
            leader_ivk,
            leader_epk,
            signature,
        })
    }

    fn meeting_id(&self) -> MeetingId {
        self.meeting_id
    }

    fn signer(&self) -> VerifyingKey {
        self.leader_ivk
    }

    fn signature(&self) -> Signature {
        self.signature
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeetingRequestTx {
    pub meeting_id: MeetingId,
    pub user: UserId,
    pub device: DeviceId,
    pub ivk: VerifyingKey,
    pub epk: DhPublicKey,
    pub signature: Signature,
}

impl SignedTx for MeetingRequestTx {
    const TAG: TxTag = TxTag::MeetingRequest;

    fn body(&self) -> Vec<u8> {
        Writer::new()
            .raw(&self.meeting_id.0)
            .var(self.user.as_str().as_bytes())
            .var(self.device.as_str().as_bytes())
            .raw(&self.ivk.0)
            .raw(&self.epk.0)
            .finish()
    }

    fn decode(body: &[u8], signature: Signature) -> Result<Self, DecodeError> {
        let mut r = Reader::new(body);
        let meeting_id = read_meeting_id(&mut r)?;
        let user = UserId::decode(r.var("user")?)?;
        let device = DeviceId::decode(r.var("device")?)?;
        let ivk = read_ivk(&mut r, "ivk")?;
        let epk = read_epk(&mut r, "epk")?;
        r.finish()?;
        Ok(Self {
            meeting_id,
            user,
            device,
            ivk,
            epk,
            signature,
        })
    }

    fn meeting_id(&self) -> MeetingId {
        self.meeting_id
    }

    fn signer(&self) -> VerifyingKey {
        self.ivk
    }

    fn signature(&self) -> Signature {
        self.signature
    }
}

/// The meeting key wrapped for one recipient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyEntry {
    pub recipient: VerifyingKey,
    pub sealed: AeadBox,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyDistributionTx {
    pub meeting_id: MeetingId,
    pub epoch: u32,
    pub leader_ivk: VerifyingKey,
    pub leader_epk: DhPublicKey,
    pub entries: Vec<KeyEntry>,
    pub signature: Signature,
}

impl KeyDistributionTx {
    pub fn entry_for(&self, ivk: &VerifyingKey) -> Option<&KeyEntry> {
        self.entries.iter().find(|e| &e.recipient == ivk)
    }

    pub fn recipients(&self) -> impl Iterator<Item = VerifyingKey> + '_ {
        self.entries.iter().map(|e| e.recipient)
    }
}

impl SignedTx for KeyDistributionTx {
    const TAG: TxTag = TxTag::KeyDistribution;

    fn body(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.raw(&self.meeting_id.0)
            .u32(self.epoch)
            .raw(&self.leader_ivk.0)
            .raw(&self.leader_epk.0)
            .u32(u32::try_from(self.entries.len()).expect("entry count fits u32"));
        for e in &self.entries {
            w.raw(&e.recipient.0)
                .raw(&e.sealed.nonce)
                .var(&e.sealed.ciphertext)
                .raw(&e.sealed.tag);
        }
        w.finish()
    }

    fn decode(body: &[u8], signature: Signature) -> Result<Self, DecodeError> {
        let mut r = Reader::new(body);
        let meeting_id = read_meeting_id(&mut r)?;
        let epoch = r.u32("epoch")?;
        let leader_ivk = read_ivk(&mut r, "leader ivk")?;
        let leader_epk = read_epk(&mut r, "leader epk")?;
        let count = r.u32("entry count")?;
        let mut entries = Vec::new();
        for _ in 0..count {
            let recipient = read_ivk(&mut r, "recipient")?;
            let nonce = r.array("entry nonce")?;
            let ciphertext = r.var("entry ciphertext")?.to_vec();
            let tag = r.array("entry tag")?;
            entries.push(KeyEntry {
                recipient,
                sealed: AeadBox { nonce, ciphertext, tag },
            });
        }
        r.finish()?;
        Ok(Self {
            meeting_id,
            epoch,
            leader_ivk,
            leader_epk,
            entries,
            signature,
        })
    }

    fn meeting_id(&self) -> MeetingId {
        self.meeting_id
    }

    fn signer(&self) -> VerifyingKey {
        self.leader_ivk
    }

    fn signature(&self) -> Signature {
        self.signature
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeetingLeaveTx {
    pub meeting_id: MeetingId,
    pub member_ivk: VerifyingKey,
    pub signature: Signature,
}

impl SignedTx for MeetingLeaveTx {
    const TAG: TxTag = TxTag::MeetingLeave;

    fn body(&self) -> Vec<u8> {
        Writer::new().raw(&self.meeting_id.0).raw(&self.member_ivk.0).finish()
    }

    fn decode(body: &[u8], signature: Signature) -> Result<Self, DecodeError> {
        let mut r = Reader::new(body);
        let meeting_id = read_meeting_id(&mut r)?;
        let member_ivk = read_ivk(&mut r, "member ivk")?;
        r.finish()?;
        Ok(Self {
            meeting_id,
            member_ivk,
            signature,
        })
    }

    fn meeting_id(&self) -> MeetingId {
        self.meeting_id
    }

    fn signer(&self) -> VerifyingKey {
        self.member_ivk
    }

    fn signature(&self) -> Signature {
        self.signature
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeaderReassignTx {
    pub meeting_id: MeetingId,
    pub prev_leader_ivk: VerifyingKey,
    pub new_leader_ivk: VerifyingKey,
    pub new_leader_epk: DhPublicKey,
    pub prev_leader_sig: Option<Signature>,
    /// By the new leader over `tag ‖ body`.
    pub new_leader_sig: Signature,
}

impl LeaderReassignTx {
    /// What the previous leader signs under the designation rule.
    pub fn designation_input(&self) -> Vec<u8> {
        let core = Writer::new()
            .raw(&self.meeting_id.0)
            .raw(&self.prev_leader_ivk.0)
            .raw(&self.new_leader_ivk.0)
            .raw(&self.new_leader_epk.0)
            .finish();
        Transaction::signing_input(TxTag::LeaderReassign, &core)
    }

    pub fn prev_signature_valid(&self) -> Option<bool> {
        self.prev_leader_sig
            .map(|sig| verify(&self.prev_leader_ivk, &self.designation_input(), &sig))
    }
}

impl SignedTx for LeaderReassignTx {
    const TAG: TxTag = TxTag::LeaderReassign;

    fn body(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.raw(&self.meeting_id.0)
            .raw(&self.prev_leader_ivk.0)
            .raw(&self.new_leader_ivk.0)
            .raw(&self.new_leader_epk.0);
        match &self.prev_leader_sig {
            Some(sig) => w.u8(1).raw(&sig.0),
            None => w.u8(0),
        };
        w.finish()
    }

    fn decode(body: &[u8], signature: Signature) -> Result<Self, DecodeError> {
        let mut r = Reader::new(body);
        let meeting_id = read_meeting_id(&mut r)?;
        let prev_leader_ivk = read_ivk(&mut r, "prev leader ivk")?;
        let new_leader_ivk = read_ivk(&mut r, "new leader ivk")?;
        let new_leader_epk = read_epk(&mut r, "new leader epk")?;
        let prev_leader_sig = match r.u8("designation flag")? {
            0 => None,
            1 => Some(Signature(r.array("prev leader sig")?)),
            _ => return Err(DecodeError::Invalid("designation flag")),
        };
        r.finish()?;
        Ok(Self {
            meeting_id,
            prev_leader_ivk,
            new_leader_ivk,
            new_leader_epk,
            prev_leader_sig,
            new_leader_sig: signature,
        })
    }

    fn meeting_id(&self) -> MeetingId {
        self.meeting_id
    }

    fn signer(&self) -> VerifyingKey {
        self.new_leader_ivk
    }

    fn signature(&self) -> Signature {
        self.new_leader_sig
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeetingDismissTx {
    pub meeting_id: MeetingId,
    pub leader_ivk: VerifyingKey,
    pub signature: Signature,
}

impl SignedTx for MeetingDismissTx {
    const TAG: TxTag = TxTag::MeetingDismiss;

    fn body(&self) -> Vec<u8> {
        Writer::new().raw(&self.meeting_id.0).raw(&self.leader_ivk.0).finish()
    }

    fn decode(body: &[u8], signature: Signature) -> Result<Self, DecodeError> {
        let mut r = Reader::new(body);
        let meeting_id = read_meeting_id(&mut r)?;
        let leader_ivk = read_ivk(&mut r, "leader ivk")?;
        r.finish()?;
        Ok(Self {
            meeting_id,
            leader_ivk,
            signature,
        })
    }

    fn meeting_id(&self) -> MeetingId {
        self.meeting_id
    }

    fn signer(&self) -> VerifyingKey {
        self.leader_ivk
    }

    fn signature(&self) -> Signature {
        self.signature
    }
}

/// Signs `tx` in place with `keys`, which must match `tx.signer()`.
pub(crate) fn seal<T: SignedTx>(tx: &T, keys: &crate::crypto::IdentityKeyPair) -> Signature {
    debug_assert_eq!(tx.signer(), keys.ivk());
    keys.sign(&Transaction::signing_input(T::TAG, &tx.body()))
}
