//! Cross-implementation test vectors.
//!
//! Records are blank-line separated. Each opens with `op=<name>` and
//! continues with `name=hex` lines, lowercase, in a fixed order.

use std::fmt::Write as _;

use ledgermeet::crypto::{
    aead_decrypt, aead_encrypt, derive_enc_key, dh, hash, verify, DhSecretKey, IdentityKeyPair, NONCE_LEN,
};
use ledgermeet::identity::{register_identity, DeviceId, IdentityValidator, UserId, UserInfo};
use ledgermeet::ledger::{Ledger, LedgerKind};
use ledgermeet::meeting::{derive_stream_key, key_context, wrap_aad, MeetingId, MeetingKey, StreamId};
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

pub const DEFAULT_SEED: u64 = 0x6c65_6467_6572;

/// Stream ids with a stream-key record each.
pub const STREAMS: [u32; 3] = [1, 2, 3];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub op: &'static str,
    pub fields: Vec<(&'static str, String)>,
}

impl Record {
    fn new(op: &'static str) -> Self {
        Self { op, fields: Vec::new() }
    }

    fn put(mut self, name: &'static str, bytes: impl AsRef<[u8]>) -> Self {
        self.fields.push((name, hex::encode(bytes)));
        self
    }
}

fn draw<const N: usize>(rng: &mut ChaCha20Rng) -> [u8; N] {
    let mut out = [0u8; N];
    rng.fill_bytes(&mut out);
    out
}

/// Every vector for `seed`, in emission order.
pub fn generate(seed: u64) -> Vec<Record> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut records = Vec::new();

    let id_seed: [u8; 32] = draw(&mut rng);
    let keys = IdentityKeyPair::from_seed(&id_seed);
    let msg: [u8; 48] = draw(&mut rng);
    let sig = keys.sign(&msg);
    records.push(
        Record::new("ed25519_sign")
            .put("seed", id_seed)
            .put("ivk", keys.ivk().0)
            .put("msg", msg)
            .put("sig", sig.0),
    );
    let mut bad = sig;
    bad.0[0] ^= 0x01;
    for (op, s) in [("ed25519_verify", sig), ("ed25519_verify_mutated", bad)] {
        let ok = verify(&keys.ivk(), &msg, &s);
        records.push(
            Record::new(op)
                .put("ivk", keys.ivk().0)
                .put("msg", msg)
                .put("sig", s.0)
                .put("valid", [u8::from(ok)]),
        );
    }

    let leader_esk = DhSecretKey::from_bytes(draw(&mut rng));
    let member_esk = DhSecretKey::from_bytes(draw(&mut rng));
    let leader_epk = leader_esk.public_key();
    let member_epk = member_esk.public_key();
    for (name, esk) in [
        ("x25519_public_leader", &leader_esk),
        ("x25519_public_member", &member_esk),
    ] {
        records.push(
            Record::new(name)
                .put("scalar", esk.to_bytes())
                .put("public", esk.public_key().0),
        );
    }
    let ss = dh(&leader_esk, &member_epk).expect("random scalars give a contributory secret");
    records.push(
        Record::new("x25519_dh")
            .put("scalar", leader_esk.to_bytes())
            .put("peer", member_epk.0)
            .put("shared", ss.as_bytes()),
    );
    let mirrored = dh(&member_esk, &leader_epk).expect("random scalars give a contributory secret");
    records.push(
        Record::new("x25519_dh")
            .put("scalar", member_esk.to_bytes())
            .put("peer", leader_epk.0)
            .put("shared", mirrored.as_bytes()),
    );

    let meeting_id = MeetingId(draw(&mut rng));
    let epoch = 0;
    let context = key_context(&meeting_id, epoch, &leader_epk, &member_epk);
    let wrap_key = derive_enc_key(&ss, &context);
    records.push(
        Record::new("hkdf_sha256")
            .put("ikm", ss.as_bytes())
            .put("salt", [0u8; 0])
            .put("info", &context)
            .put("okm", wrap_key.as_bytes()),
    );

    let mk = MeetingKey::new(draw(&mut rng), epoch);
    let nonce: [u8; NONCE_LEN] = draw(&mut rng);
    let member_ivk = IdentityKeyPair::from_seed(&draw(&mut rng)).ivk();
    let aad = wrap_aad(&meeting_id, epoch, &member_ivk);
    let sealed = aead_encrypt(&wrap_key, &nonce, mk.bytes(), &aad);
    records.push(
        Record::new("aes256gcm_wrap")
            .put("key", wrap_key.as_bytes())
            .put("nonce", nonce)
            .put("aad", &aad)
            .put("plaintext", mk.bytes())
            .put("ciphertext", &sealed.ciphertext)
            .put("tag", sealed.tag),
    );
    let opened = aead_decrypt(&wrap_key, &sealed, &aad).expect("fresh seal opens");
    records.push(
        Record::new("aes256gcm_unwrap")
            .put("key", wrap_key.as_bytes())
            .put("nonce", nonce)
            .put("aad", &aad)
            .put("ciphertext", &sealed.ciphertext)
            .put("tag", sealed.tag)
            .put("plaintext", opened),
    );

    for stream in STREAMS {
        let id = StreamId::from_u32(stream);
        records.push(
            Record::new("hmac_sha256_stream_key")
                .put("key", mk.bytes())
                .put("stream_id", id.0)
                .put("stream_key", derive_stream_key(&mk, id).as_bytes()),
        );
    }

    let digest_input: [u8; 64] = draw(&mut rng);
    records.push(
        Record::new("sha256")
            .put("data", digest_input)
            .put("digest", hash(&digest_input).0),
    );

    // Genesis plus one block holding two registrations.
    let mut ledger = Ledger::new(LedgerKind::Identity);
    let txs = [("alice", "laptop"), ("bob", "phone")]
        .into_iter()
        .map(|(user, device)| {
            let kp = IdentityKeyPair::from_seed(&draw(&mut rng));
            register_identity(
                UserId::new(user).expect("short id"),
                DeviceId::new(device).expect("short id"),
                &kp,
                UserInfo::plain(user).expect("short info"),
            )
            .to_transaction()
        })
        .collect();
    ledger
        .append_block(txs, 1, &IdentityValidator)
        .expect("fresh registrations are valid");
    for block in ledger.blocks() {
        records.push(
            Record::new("block_hash")
                .put("index", block.index().to_be_bytes())
                .put("prev_hash", block.prev_hash().0)
                .put("bytes", block.canonical_bytes())
                .put("hash", block.block_hash().0),
        );
    }

    records
}

pub fn render(records: &[Record]) -> String {
    let mut out = String::new();
    for (i, record) in records.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "op={}", record.op);
        for (name, value) in &record.fields {
            let _ = writeln!(out, "{name}={value}");
        }
    }
    out
}

/// A parsed record: the op name and its decoded fields.
pub type Parsed = (String, Vec<(String, Vec<u8>)>);

/// Inverse of [`render`], for consumers of the file.
pub fn parse(text: &str) -> Result<Vec<Parsed>, String> {
    let mut records = Vec::new();
    for (n, block) in text.split("\n\n").enumerate() {
        let mut lines = block.lines().filter(|l| !l.is_empty());
        let Some(head) = lines.next() else { continue };
        let op = head
            .strip_prefix("op=")
            .ok_or_else(|| format!("record {n}: expected op= line"))?;
        let mut fields = Vec::new();
        for line in lines {
            let (name, value) = line
                .split_once('=')
                .ok_or_else(|| format!("record {n}: expected name=hex"))?;
            let bytes = hex::decode(value).map_err(|e| format!("record {n}: {name}: {e}"))?;
            fields.push((name.to_owned(), bytes));
        }
        records.push((op.to_owned(), fields));
    }
    Ok(records)
}
