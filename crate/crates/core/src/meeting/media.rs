//! Per-stream media encryption.
//!
//! Wire layout: `stream_id(4) ‖ epoch(4) ‖ counter(8) ‖ nonce(12) ‖ len(ct)(4) ‖ ct ‖ tag(16)`.

use std::fmt;

use crate::codec::{DecodeError, Reader, Writer};
use crate::crypto::{aead_decrypt, aead_encrypt, hmac, AeadBox, SymmetricKey, NONCE_LEN};

use super::state::ParticipantState;
use super::{MeetingError, MeetingId, MeetingKey};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StreamId(pub [u8; 4]);

impl StreamId {
    pub fn from_u32(n: u32) -> Self {
        Self(n.to_be_bytes())
    }

    pub fn as_u32(self) -> u32 {
        u32::from_be_bytes(self.0)
    }
}

impl fmt::Debug for StreamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StreamId({})", hex::encode(self.0))
    }
}

impl fmt::Display for StreamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u32())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MediaPacket {
    pub stream_id: StreamId,
    pub epoch: u32,
    pub counter: u64,
    pub sealed: AeadBox,
}

impl MediaPacket {
    pub fn to_bytes(&self) -> Vec<u8> {
        Writer::new()
            .raw(&self.stream_id.0)
            .u32(self.epoch)
            .u64(self.counter)
            .raw(&self.sealed.nonce)
            .var(&self.sealed.ciphertext)
            .raw(&self.sealed.tag)
            .finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut r = Reader::new(bytes);
        let stream_id = StreamId(r.array("stream id")?);
        let epoch = r.u32("epoch")?;
        let counter = r.u64("counter")?;
        let nonce = r.array("nonce")?;
        let ciphertext = r.var("ciphertext")?.to_vec();
        let tag = r.array("tag")?;
        r.finish()?;
        Ok(Self {
            stream_id,
            epoch,
            counter,
            sealed: AeadBox { nonce, ciphertext, tag },
        })
    }
}

pub fn derive_stream_key(mk: &MeetingKey, stream_id: StreamId) -> SymmetricKey {
    SymmetricKey::from_bytes(hmac(mk.bytes(), &stream_id.0))
}

pub fn media_nonce(epoch: u32, counter: u64) -> [u8; NONCE_LEN] {
    let mut nonce = [0u8; NONCE_LEN];
    nonce[..4].copy_from_slice(&epoch.to_be_bytes());
    nonce[4..].copy_from_slice(&counter.to_be_bytes());
    nonce
}

pub fn media_aad(meeting_id: &MeetingId, stream_id: StreamId) -> Vec<u8> {
    Writer::new().raw(&meeting_id.0).raw(&stream_id.0).finish()
}

pub fn encrypt_media(
    state: &mut ParticipantState,
    stream_id: StreamId,
    payload: &[u8],
) -> Result<MediaPacket, MeetingError> {
    let mk = state.known_mk.as_ref().ok_or(MeetingError::NoMeetingKey)?;
    let epoch = mk.epoch();
    let counter = *state.stream_counters.get(&stream_id).unwrap_or(&0);
    if counter == u64::MAX {
        return Err(MeetingError::CounterExhausted);
    }
    let key = state
        .stream_keys
        .entry(stream_id)
        .or_insert_with(|| derive_stream_key(mk, stream_id));
    let sealed = aead_encrypt(
        key,
        &media_nonce(epoch, counter),
        payload,
        &media_aad(&state.meeting_id, stream_id),
    );
    state.stream_counters.insert(stream_id, counter + 1);
    Ok(MediaPacket {
        stream_id,
        epoch,
        counter,
        sealed,
    })
}

/// Decrypts under whatever key the state holds; a stale key fails authentication.
pub fn decrypt_media(state: &ParticipantState, packet: &MediaPacket) -> Result<Vec<u8>, MeetingError> {
    let mk = state.known_mk.as_ref().ok_or(MeetingError::NoMeetingKey)?;
    if packet.sealed.nonce != media_nonce(packet.epoch, packet.counter) {
        return Err(MeetingError::AuthenticationFailure);
    }
    let key = derive_stream_key(mk, packet.stream_id);
    Ok(aead_decrypt(
        &key,
        &packet.sealed,
        &media_aad(&state.meeting_id, packet.stream_id),
    )?)
}
