//! Identity registration: binding `UserId -> DeviceId -> IVK` on the identity
//! ledger, with optional userinfo hidden behind an HMAC commitment.
//!
//! Body layout of an identity transaction:
//!
//! ```text
//! len(user) ‖ user ‖ len(device) ‖ device ‖ ivk(32) ‖ userinfo_tag(1) ‖ len(payload) ‖ payload
//! ```
//!
//! with `userinfo_tag` 0 for plaintext and 1 for a 32-byte commitment.

use std::fmt;

use subtle::ConstantTimeEq;
use thiserror::Error;

use crate::codec::{DecodeError, Reader, Writer};
use crate::crypto::{hmac, verify, IdentityKeyPair, Signature, VerifyingKey};
use crate::ledger::{Ledger, RejectReason, Transaction, TxTag, TxValidator};

pub const MAX_ID_LEN: usize = 64;
pub const MAX_USERINFO_LEN: usize = 1024;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IdentityError {
    #[error("identifier must be 1..={MAX_ID_LEN} bytes, got {0}")]
    BadIdLength(usize),
    #[error("userinfo exceeds {MAX_USERINFO_LEN} bytes")]
    UserInfoTooLong,
    #[error("identity not found")]
    NotFound,
}

macro_rules! bounded_id {
    ($name:ident) => {
        #[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Result<Self, IdentityError> {
                let s = s.into();
                if s.is_empty() || s.len() > MAX_ID_LEN {
                    return Err(IdentityError::BadIdLength(s.len()));
                }
                Ok(Self(s))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }

            pub(crate) fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
                let s = std::str::from_utf8(bytes).map_err(|_| DecodeError::Invalid(stringify!($name)))?;
                Self::new(s).map_err(|_| DecodeError::Invalid(stringify!($name)))
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{:?}", self.0)
            }
        }
    };
}

bounded_id!(UserId);
bounded_id!(DeviceId);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UserInfo {
    Plain(String),
    Commitment([u8; 32]),
}

impl UserInfo {
    pub fn plain(text: impl Into<String>) -> Result<Self, IdentityError> {
        let text = text.into();
        if text.len() > MAX_USERINFO_LEN {
            return Err(IdentityError::UserInfoTooLong);
        }
        Ok(UserInfo::Plain(text))
    }

    fn encode_into(&self, w: &mut Writer) {
        match self {
            UserInfo::Plain(text) => w.u8(0).var(text.as_bytes()),
            UserInfo::Commitment(mac) => w.u8(1).var(mac),
        };
    }

    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let tag = r.u8("userinfo tag")?;
        let payload = r.var("userinfo payload")?;
        match tag {
            0 => {
                let text = std::str::from_utf8(payload).map_err(|_| DecodeError::Invalid("userinfo"))?;
                UserInfo::plain(text).map_err(|_| DecodeError::Invalid("userinfo length"))
            }
            1 => Ok(UserInfo::Commitment(
                payload
                    .try_into()
                    .map_err(|_| DecodeError::Invalid("commitment length"))?,
            )),
            _ => Err(DecodeError::Invalid("userinfo tag")),
        }
    }
}

/// HMAC commitment to userinfo; `r` travels to verifiers off-ledger.
pub fn commit_userinfo(plaintext: &[u8], r: &[u8; 32]) -> UserInfo {
    UserInfo::Commitment(hmac(r, plaintext))
}

/// Constant-time check of an opened commitment. Plain userinfo never verifies.
pub fn verify_userinfo(c: &UserInfo, plaintext: &[u8], r: &[u8; 32]) -> bool {
    match c {
        UserInfo::Commitment(mac) => bool::from(mac.ct_eq(&hmac(r, plaintext))),
        UserInfo::Plain(_) => false,
    }
}

/// What one device holds: its identity keys and the ids they are bound to.
#[derive(Clone, Debug)]
pub struct Credential {
    pub user: UserId,
    pub device: DeviceId,
    pub keys: IdentityKeyPair,
}

impl Credential {
    pub fn new(user: UserId, device: DeviceId, keys: IdentityKeyPair) -> Self {
        Self { user, device, keys }
    }

    pub fn ivk(&self) -> VerifyingKey {
        self.keys.ivk()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityTx {
    pub user: UserId,
    pub device: DeviceId,
    pub ivk: VerifyingKey,
    pub userinfo: UserInfo,
    pub signature: Signature,
}

impl IdentityTx {
    pub fn body(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.var(self.user.as_str().as_bytes())
            .var(self.device.as_str().as_bytes())
            .raw(&self.ivk.0);
        self.userinfo.encode_into(&mut w);
        w.finish()
    }

    pub fn to_transaction(&self) -> Transaction {
        Transaction {
            tag: TxTag::Identity,
            body: self.body(),
            signature: self.signature,
        }
    }

    pub fn from_transaction(tx: &Transaction) -> Result<Self, DecodeError> {
        if tx.tag != TxTag::Identity {
            return Err(DecodeError::Invalid("tag"));
        }
        let mut r = Reader::new(&tx.body);
        let user = UserId::decode(r.var("user")?)?;
        let device = DeviceId::decode(r.var("device")?)?;
        let ivk = VerifyingKey(r.array("ivk")?);
        let userinfo = UserInfo::decode_from(&mut r)?;
        r.finish()?;
        Ok(Self {
            user,
            device,
            ivk,
            userinfo,
            signature: tx.signature,
        })
    }

    pub fn signature_valid(&self) -> bool {
        verify(
            &self.ivk,
            &Transaction::signing_input(TxTag::Identity, &self.body()),
            &self.signature,
        )
    }
}

/// Builds a self-signed identity transaction.
pub fn register_identity(user: UserId, device: DeviceId, keypair: &IdentityKeyPair, userinfo: UserInfo) -> IdentityTx {
    let mut tx = IdentityTx {
        user,
        device,
        ivk: keypair.ivk(),
        userinfo,
        signature: Signature([0; 64]),
    };
    tx.signature = keypair.sign(&Transaction::signing_input(TxTag::Identity, &tx.body()));
    tx
}

fn identity_records(ledger: &Ledger) -> impl Iterator<Item = IdentityTx> + '_ {
    ledger
        .transactions()
        .filter_map(|(_, _, tx)| IdentityTx::from_transaction(tx).ok())
}

/// The full registration record for `(user, device)`.
pub fn lookup_identity(ledger: &Ledger, user: &UserId, device: &DeviceId) -> Option<IdentityTx> {
    identity_records(ledger).find(|r| &r.user == user && &r.device == device)
}

pub fn resolve_identity(ledger: &Ledger, user: &UserId, device: &DeviceId) -> Result<VerifyingKey, IdentityError> {
    lookup_identity(ledger, user, device)
        .map(|r| r.ivk)
        .ok_or(IdentityError::NotFound)
}

/// Reverse lookup: which (user, device) registered `ivk`, if any.
pub fn binding_for_key(ledger: &Ledger, ivk: &VerifyingKey) -> Option<(UserId, DeviceId)> {
    identity_records(ledger)
        .find(|r| &r.ivk == ivk)
        .map(|r| (r.user, r.device))
}

pub fn validate_identity_tx(tx: &IdentityTx, ledger: &Ledger) -> Result<(), RejectReason> {
    validate_against(tx, ledger, &[])
}

fn validate_against(tx: &IdentityTx, ledger: &Ledger, pending: &[Transaction]) -> Result<(), RejectReason> {
    if !tx.signature_valid() {
        return Err(RejectReason::BadSignature);
    }
    let same_binding = |r: &IdentityTx| r.user == tx.user && r.device == tx.device;
    let pending_records = pending.iter().filter_map(|t| IdentityTx::from_transaction(t).ok());
    if identity_records(ledger)
        .chain(pending_records)
        .any(|r| same_binding(&r))
    {
        return Err(RejectReason::DuplicateBinding);
    }
    Ok(())
}

/// Admission rule for the identity ledger.
#[derive(Debug, Default, Clone, Copy)]
pub struct IdentityValidator;

impl TxValidator for IdentityValidator {
    fn validate(&self, ledger: &Ledger, pending: &[Transaction], tx: &Transaction) -> Result<(), RejectReason> {
        let record = IdentityTx::from_transaction(tx)?;
        validate_against(&record, ledger, pending)
    }
}
