use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::crypto::{DhPublicKey, EphemeralKeyPair, SymmetricKey, VerifyingKey};
use crate::identity::{DeviceId, UserId};

use super::media::StreamId;
use super::{MeetingId, MeetingKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Leader,
    Member,
    Outsider,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::Leader => "leader",
            Role::Member => "member",
            Role::Outsider => "outsider",
        }
    }
}

/// An authorized member as the leader knows it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemberEntry {
    pub user: UserId,
    pub device: DeviceId,
    pub epk: DhPublicKey,
}

/// One actor's view of one meeting.
#[derive(Clone)]
pub struct ParticipantState {
    pub(crate) meeting_id: MeetingId,
    pub(crate) me: VerifyingKey,
    pub(crate) role: Role,
    pub(crate) known_mk: Option<MeetingKey>,
    pub(crate) members: BTreeMap<VerifyingKey, MemberEntry>,
    pub(crate) ephemeral: Option<EphemeralKeyPair>,
    /// The leader's current ephemeral has already wrapped an epoch.
    pub(crate) ephemeral_spent: bool,
    /// Request ephemerals the leader has already decided on.
    pub(crate) reviewed: BTreeSet<DhPublicKey>,
    pub(crate) stream_counters: BTreeMap<StreamId, u64>,
    pub(crate) stream_keys: BTreeMap<StreamId, SymmetricKey>,
}

impl ParticipantState {
    pub fn outsider(meeting_id: MeetingId, me: VerifyingKey) -> Self {
        Self {
            meeting_id,
            me,
            role: Role::Outsider,
            known_mk: None,
            members: BTreeMap::new(),
            ephemeral: None,
            ephemeral_spent: false,
            reviewed: BTreeSet::new(),
            stream_counters: BTreeMap::new(),
            stream_keys: BTreeMap::new(),
        }
    }

    pub(crate) fn with_ephemeral(mut self, role: Role, ephemeral: EphemeralKeyPair) -> Self {
        self.role = role;
        self.ephemeral = Some(ephemeral);
        self
    }

    pub fn meeting_id(&self) -> MeetingId {
        self.meeting_id
    }

    pub fn me(&self) -> VerifyingKey {
        self.me
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn known_mk(&self) -> Option<&MeetingKey> {
        self.known_mk.as_ref()
    }

    pub fn epoch(&self) -> Option<u32> {
        self.known_mk.as_ref().map(MeetingKey::epoch)
    }

    pub fn ephemeral(&self) -> Option<&EphemeralKeyPair> {
        self.ephemeral.as_ref()
    }

    /// Leader only: authorized, non-departed members keyed by identity key.
    pub fn members(&self) -> &BTreeMap<VerifyingKey, MemberEntry> {
        &self.members
    }

    pub fn membership_view(&self) -> BTreeSet<(UserId, DeviceId)> {
        self.members
            .values()
            .map(|m| (m.user.clone(), m.device.clone()))
            .collect()
    }

    pub fn has_reviewed(&self, epk: &DhPublicKey) -> bool {
        self.reviewed.contains(epk)
    }

    pub(crate) fn install_key(&mut self, mk: MeetingKey) {
        if self.epoch() != Some(mk.epoch()) {
            self.stream_counters.clear();
            self.stream_keys.clear();
        }
        self.known_mk = Some(mk);
    }
}

impl fmt::Debug for ParticipantState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParticipantState")
            .field("meeting_id", &self.meeting_id)
            .field("role", &self.role)
            .field("epoch", &self.epoch())
            .field("members", &self.members.len())
            .field("has_ephemeral", &self.ephemeral.is_some())
            .finish_non_exhaustive()
    }
}
