//! Reference oracles that share no code with the implementation under test.

#![allow(dead_code)]

use num_bigint::BigUint;
use ring::{aead, digest, hkdf, hmac, signature};

/// X25519 scalar multiplication by the textbook Montgomery ladder over
/// arbitrary-precision integers.
pub fn x25519(scalar: &[u8], u: &[u8]) -> [u8; 32] {
    let p = (BigUint::from(1u8) << 255u32) - BigUint::from(19u8);
    let a24 = BigUint::from(121_665u32);

    let mut k = scalar.to_vec();
    k[0] &= 248;
    k[31] &= 127;
    k[31] |= 64;
    let k = BigUint::from_bytes_le(&k);
    let mut u = u.to_vec();
    u[31] &= 127;
    let x1 = BigUint::from_bytes_le(&u) % &p;

    let add = |a: &BigUint, b: &BigUint| (a + b) % &p;
    let sub = |a: &BigUint, b: &BigUint| (a + &p - b) % &p;
    let mul = |a: &BigUint, b: &BigUint| (a * b) % &p;

    let (mut x2, mut z2) = (BigUint::from(1u8), BigUint::from(0u8));
    let (mut x3, mut z3) = (x1.clone(), BigUint::from(1u8));
    let mut swap = false;
    for t in (0..255u64).rev() {
        let bit = k.bit(t);
        if swap ^ bit {
            std::mem::swap(&mut x2, &mut x3);
            std::mem::swap(&mut z2, &mut z3);
        }
        swap = bit;
        let a = add(&x2, &z2);
        let aa = mul(&a, &a);
        let b = sub(&x2, &z2);
        let bb = mul(&b, &b);
        let e = sub(&aa, &bb);
        let c = add(&x3, &z3);
        let d = sub(&x3, &z3);
        let da = mul(&d, &a);
        let cb = mul(&c, &b);
        let s = add(&da, &cb);
        x3 = mul(&s, &s);
        let m = sub(&da, &cb);
        z3 = mul(&x1, &mul(&m, &m));
        x2 = mul(&aa, &bb);
        z2 = mul(&e, &add(&aa, &mul(&a24, &e)));
    }
    if swap {
        std::mem::swap(&mut x2, &mut x3);
        std::mem::swap(&mut z2, &mut z3);
    }
    let inv = z2.modpow(&(&p - BigUint::from(2u8)), &p);
    let mut out = mul(&x2, &inv).to_bytes_le();
    out.resize(32, 0);
    out.try_into().unwrap()
}

pub fn x25519_base(scalar: &[u8]) -> [u8; 32] {
    let mut nine = [0u8; 32];
    nine[0] = 9;
    x25519(scalar, &nine)
}

pub fn ed25519_public(seed: &[u8]) -> Vec<u8> {
    use signature::KeyPair;
    signature::Ed25519KeyPair::from_seed_unchecked(seed)
        .unwrap()
        .public_key()
        .as_ref()
        .to_vec()
}

pub fn ed25519_sign(seed: &[u8], msg: &[u8]) -> Vec<u8> {
    signature::Ed25519KeyPair::from_seed_unchecked(seed)
        .unwrap()
        .sign(msg)
        .as_ref()
        .to_vec()
}

pub fn ed25519_verify(public: &[u8], msg: &[u8], sig: &[u8]) -> bool {
    signature::UnparsedPublicKey::new(&signature::ED25519, public)
        .verify(msg, sig)
        .is_ok()
}

pub fn hkdf_sha256(salt: &[u8], ikm: &[u8], info: &[u8]) -> [u8; 32] {
    let mut out = [0u8; 32];
    hkdf::Salt::new(hkdf::HKDF_SHA256, salt)
        .extract(ikm)
        .expand(&[info], hkdf::HKDF_SHA256)
        .unwrap()
        .fill(&mut out)
        .unwrap();
    out
}

/// Returns `ciphertext ‖ tag`.
pub fn aes256gcm_seal(key: &[u8], nonce: &[u8], aad: &[u8], plaintext: &[u8]) -> Vec<u8> {
    let key = aead::LessSafeKey::new(aead::UnboundKey::new(&aead::AES_256_GCM, key).unwrap());
    let nonce = aead::Nonce::try_assume_unique_for_key(nonce).unwrap();
    let mut buf = plaintext.to_vec();
    key.seal_in_place_append_tag(nonce, aead::Aad::from(aad), &mut buf)
        .unwrap();
    buf
}

pub fn aes256gcm_open(key: &[u8], nonce: &[u8], aad: &[u8], sealed: &[u8]) -> Option<Vec<u8>> {
    let key = aead::LessSafeKey::new(aead::UnboundKey::new(&aead::AES_256_GCM, key).unwrap());
    let nonce = aead::Nonce::try_assume_unique_for_key(nonce).unwrap();
    let mut buf = sealed.to_vec();
    key.open_in_place(nonce, aead::Aad::from(aad), &mut buf)
        .ok()
        .map(|p| p.to_vec())
}

pub fn hmac_sha256(key: &[u8], data: &[u8]) -> Vec<u8> {
    hmac::sign(&hmac::Key::new(hmac::HMAC_SHA256, key), data)
        .as_ref()
        .to_vec()
}

pub fn sha256(data: &[u8]) -> Vec<u8> {
    digest::digest(&digest::SHA256, data).as_ref().to_vec()
}

/// A block decoded from the documented canonical layout:
/// `index(8) ‖ prev_hash(32) ‖ ts(8) ‖ count(4) ‖ (tag(1) ‖ len(4) ‖ body ‖ sig(64))*`,
/// all integers big-endian.
#[derive(Debug)]
pub struct RawBlock {
    pub index: u64,
    pub prev_hash: Vec<u8>,
    pub timestamp: u64,
    pub txs: Vec<(u8, Vec<u8>, Vec<u8>)>,
}

pub fn decode_block(bytes: &[u8]) -> Option<RawBlock> {
    let mut at = 0usize;
    let mut take = |n: usize| -> Option<&[u8]> {
        let s = bytes.get(at..at + n)?;
        at += n;
        Some(s)
    };
    let index = u64::from_be_bytes(take(8)?.try_into().ok()?);
    let prev_hash = take(32)?.to_vec();
    let timestamp = u64::from_be_bytes(take(8)?.try_into().ok()?);
    let count = u32::from_be_bytes(take(4)?.try_into().ok()?);
    let mut txs = Vec::new();
    for _ in 0..count {
        let tag = take(1)?[0];
        let len = u32::from_be_bytes(take(4)?.try_into().ok()?) as usize;
        let body = take(len)?.to_vec();
        let sig = take(64)?.to_vec();
        txs.push((tag, body, sig));
    }
    (at == bytes.len()).then_some(RawBlock {
        index,
        prev_hash,
        timestamp,
        txs,
    })
}

/// Registration body: `len ‖ user ‖ len ‖ device ‖ ivk(32) ‖ userinfo`.
pub fn registration_signer(body: &[u8]) -> Option<&[u8]> {
    let mut at = 0usize;
    for _ in 0..2 {
        let len = u32::from_be_bytes(body.get(at..at + 4)?.try_into().ok()?) as usize;
        at += 4 + len;
    }
    body.get(at..at + 32)
}

/// Parsed vector file: `(op, [(name, bytes)])` per record.
pub type Vectors = Vec<(String, Vec<(String, Vec<u8>)>)>;

pub fn parse_vectors(text: &str) -> Vectors {
    let mut out = Vec::new();
    for record in text.split("\n\n") {
        let mut lines = record.lines().filter(|l| !l.is_empty());
        let Some(head) = lines.next() else { continue };
        let op = head.strip_prefix("op=").expect("record opens with op=").to_owned();
        let fields = lines
            .map(|l| {
                let (k, v) = l.split_once('=').expect("name=hex");
                assert_eq!(v, v.to_lowercase(), "{op}.{k} is lowercase");
                (k.to_owned(), hex::decode(v).expect("hex value"))
            })
            .collect();
        out.push((op, fields));
    }
    out
}

pub fn field<'a>(fields: &'a [(String, Vec<u8>)], name: &str) -> &'a [u8] {
    &fields
        .iter()
        .find(|(k, _)| k == name)
        .unwrap_or_else(|| panic!("missing field {name}"))
        .1
}

/// Checks every record against the oracles; returns the number of ops checked.
pub fn check_all(vectors: &Vectors) -> Result<usize, String> {
    let mut prev_block_hash: Option<Vec<u8>> = None;
    for (op, f) in vectors {
        let ok = match op.as_str() {
            "ed25519_sign" => {
                ed25519_public(field(f, "seed")) == field(f, "ivk")
                    && ed25519_sign(field(f, "seed"), field(f, "msg")) == field(f, "sig")
            }
            "ed25519_verify" | "ed25519_verify_mutated" => {
                let expect = ed25519_verify(field(f, "ivk"), field(f, "msg"), field(f, "sig"));
                field(f, "valid") == [u8::from(expect)] && (expect == (op == "ed25519_verify"))
            }
            "x25519_public_leader" | "x25519_public_member" => x25519_base(field(f, "scalar")) == field(f, "public"),
            "x25519_dh" => x25519(field(f, "scalar"), field(f, "peer")) == field(f, "shared"),
            "hkdf_sha256" => hkdf_sha256(field(f, "salt"), field(f, "ikm"), field(f, "info")) == field(f, "okm"),
            "aes256gcm_wrap" => {
                let sealed = aes256gcm_seal(
                    field(f, "key"),
                    field(f, "nonce"),
                    field(f, "aad"),
                    field(f, "plaintext"),
                );
                sealed == [field(f, "ciphertext"), field(f, "tag")].concat()
            }
            "aes256gcm_unwrap" => {
                let sealed = [field(f, "ciphertext"), field(f, "tag")].concat();
                aes256gcm_open(field(f, "key"), field(f, "nonce"), field(f, "aad"), &sealed).as_deref()
                    == Some(field(f, "plaintext"))
            }
            "hmac_sha256_stream_key" => hmac_sha256(field(f, "key"), field(f, "stream_id")) == field(f, "stream_key"),
            "sha256" => sha256(field(f, "data")) == field(f, "digest"),
            "block_hash" => {
                let bytes = field(f, "bytes");
                let block = decode_block(bytes).ok_or("block bytes do not follow the canonical layout")?;
                let linked = match &prev_block_hash {
                    Some(prev) => block.prev_hash == *prev,
                    None => block.prev_hash == [0u8; 32],
                };
                let signed = block.txs.iter().all(|(tag, body, sig)| {
                    registration_signer(body)
                        .is_some_and(|ivk| ed25519_verify(ivk, &[&[*tag], body.as_slice()].concat(), sig))
                });
                let digest = sha256(bytes);
                prev_block_hash = Some(digest.clone());
                linked
                    && signed
                    && block.index.to_be_bytes() == field(f, "index")
                    && block.prev_hash == field(f, "prev_hash")
                    && digest == field(f, "hash")
            }
            other => return Err(format!("unknown op {other}")),
        };
        if !ok {
            return Err(format!("op {op} disagrees with the oracle"));
        }
    }
    Ok(vectors.len())
}
