//! Cryptographic primitives consumed by the meeting protocol.
//!
//! The suite is fixed to the 25519 family:
//!
//! | role                      | algorithm      |
//! |---------------------------|----------------|
//! | identity signatures       | Ed25519        |
//! | ephemeral key agreement   | X25519         |
//! | key wrapping, media       | AES-256-GCM    |
//! | stream keys, commitments  | HMAC-SHA256    |
//! | key derivation            | HKDF-SHA256    |
//! | ledger hashing            | SHA-256        |
//!
//! Every function here is a pure function of its arguments. Randomness only
//! enters through the `generate` constructors, which take the caller's RNG so a
//! simulator can run fully deterministically under a seed.

use std::fmt;

use aes_gcm::aead::{AeadInPlace, KeyInit};
use aes_gcm::{Aes256Gcm, Nonce, Tag};
use ed25519_dalek::Signer;
use hkdf::Hkdf;
use hmac::{Hmac, Mac};
use rand_core::CryptoRngCore;
use sha2::{Digest, Sha256};
use thiserror::Error;
use zeroize::{Zeroize, ZeroizeOnDrop};

pub const KEY_LEN: usize = 32;
pub const NONCE_LEN: usize = 12;
pub const TAG_LEN: usize = 16;
pub const SIGNATURE_LEN: usize = 64;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum CryptoError {
    /// X25519 produced the all-zero output (peer sent a low-order point).
    #[error("degenerate Diffie-Hellman shared secret")]
    DegenerateSharedSecret,
    #[error("authentication failure")]
    AuthenticationFailure,
}

macro_rules! public_bytes {
    ($name:ident, $len:expr) => {
        #[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(pub [u8; $len]);

        impl $name {
            pub fn as_bytes(&self) -> &[u8; $len] {
                &self.0
            }

            pub fn to_hex(&self) -> String {
                hex::encode(self.0)
            }

            /// First `n` hex characters, for log lines.
            pub fn short(&self, n: usize) -> String {
                let mut s = self.to_hex();
                s.truncate(n);
                s
            }
        }

        impl From<[u8; $len]> for $name {
            fn from(bytes: [u8; $len]) -> Self {
                Self(bytes)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({}..)", stringify!($name), self.short(16))
            }
        }
    };
}

public_bytes!(VerifyingKey, 32);
public_bytes!(DhPublicKey, 32);
public_bytes!(Hash256, 32);
public_bytes!(Signature, 64);

impl Hash256 {
    pub const ZERO: Hash256 = Hash256([0u8; 32]);
}

/// Long-lived Ed25519 identity key pair bound to one (user, device).
#[derive(Clone)]
pub struct IdentityKeyPair {
    signing: ed25519_dalek::SigningKey,
}

impl IdentityKeyPair {
    pub fn from_seed(seed: &[u8; 32]) -> Self {
        Self {
            signing: ed25519_dalek::SigningKey::from_bytes(seed),
        }
    }

    pub fn generate<R: CryptoRngCore + ?Sized>(rng: &mut R) -> Self {
        let mut seed = [0u8; 32];
        rng.fill_bytes(&mut seed);
        let pair = Self::from_seed(&seed);
        seed.zeroize();
        pair
    }

    pub fn ivk(&self) -> VerifyingKey {
        VerifyingKey(self.signing.verifying_key().to_bytes())
    }

    pub fn seed(&self) -> [u8; 32] {
        self.signing.to_bytes()
    }

    pub fn sign(&self, msg: &[u8]) -> Signature {
        Signature(self.signing.sign(msg).to_bytes())
    }
}

impl fmt::Debug for IdentityKeyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IdentityKeyPair")
            .field("ivk", &self.ivk())
            .finish_non_exhaustive()
    }
}

pub fn identity_keygen(seed: &[u8; 32]) -> IdentityKeyPair {
    IdentityKeyPair::from_seed(seed)
}

pub fn sign(isk: &IdentityKeyPair, msg: &[u8]) -> Signature {
    isk.sign(msg)
}

/// Strict Ed25519 verification. Malformed key or signature bytes yield `false`.
pub fn verify(ivk: &VerifyingKey, msg: &[u8], sig: &Signature) -> bool {
    let Ok(key) = ed25519_dalek::VerifyingKey::from_bytes(&ivk.0) else {
        return false;
    };
    let sig = ed25519_dalek::Signature::from_bytes(&sig.0);
    key.verify_strict(msg, &sig).is_ok()
}

/// X25519 secret scalar. Zeroized on drop.
#[derive(Clone)]
pub struct DhSecretKey(x25519_dalek::StaticSecret);

impl DhSecretKey {
    pub fn from_bytes(bytes: [u8; 32]) -> Self {
        Self(x25519_dalek::StaticSecret::from(bytes))
    }

    pub fn to_bytes(&self) -> [u8; 32] {
        self.0.to_bytes()
    }

    pub fn public_key(&self) -> DhPublicKey {
        DhPublicKey(x25519_dalek::PublicKey::from(&self.0).to_bytes())
    }
}

impl fmt::Debug for DhSecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("DhSecretKey(..)")
    }
}

/// Per-meeting (and per-epoch, for leaders) X25519 key pair.
#[derive(Clone, Debug)]
pub struct EphemeralKeyPair {
    esk: DhSecretKey,
    epk: DhPublicKey,
}

impl EphemeralKeyPair {
    pub fn from_secret(esk: DhSecretKey) -> Self {
        let epk = esk.public_key();
        Self { esk, epk }
    }

    pub fn generate<R: CryptoRngCore + ?Sized>(rng: &mut R) -> Self {
        let mut bytes = [0u8; 32];
        rng.fill_bytes(&mut bytes);
        let pair = Self::from_secret(DhSecretKey::from_bytes(bytes));
        bytes.zeroize();
        pair
    }

    pub fn epk(&self) -> DhPublicKey {
        self.epk
    }

    pub fn esk(&self) -> &DhSecretKey {
        &self.esk
    }
}

/// Raw X25519 output. Never used directly as a cipher key.
#[derive(Clone, Zeroize, ZeroizeOnDrop)]
pub struct SharedSecret([u8; 32]);

impl SharedSecret {
    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }
}

impl fmt::Debug for SharedSecret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SharedSecret(..)")
    }
}

pub fn dh(esk: &DhSecretKey, epk: &DhPublicKey) -> Result<SharedSecret, CryptoError> {
    let peer = x25519_dalek::PublicKey::from(epk.0);
    let shared = esk.0.diffie_hellman(&peer);
    if !shared.was_contributory() {
        return Err(CryptoError::DegenerateSharedSecret);
    }
    Ok(SharedSecret(shared.to_bytes()))
}

#[derive(Clone, PartialEq, Eq, Zeroize, ZeroizeOnDrop)]
pub struct SymmetricKey([u8; KEY_LEN]);

impl SymmetricKey {
    pub fn from_bytes(bytes: [u8; KEY_LEN]) -> Self {
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; KEY_LEN] {
        &self.0
    }

    /// Truncated SHA-256 of the key; safe to print.
    pub fn fingerprint(&self) -> [u8; 8] {
        let digest = hash(&self.0);
        let mut out = [0u8; 8];
        out.copy_from_slice(&digest.0[..8]);
        out
    }
}

impl fmt::Debug for SymmetricKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymmetricKey(fp={})", hex::encode(self.fingerprint()))
    }
}

/// HKDF-SHA256 with empty salt; `context` is the HKDF info string.
pub fn derive_enc_key(ss: &SharedSecret, context: &[u8]) -> SymmetricKey {
    let hk = Hkdf::<Sha256>::new(None, &ss.0);
    let mut okm = [0u8; KEY_LEN];
    hk.expand(context, &mut okm)
        .expect("32 bytes is a valid HKDF-SHA256 output length");
    SymmetricKey(okm)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AeadBox {
    pub nonce: [u8; NONCE_LEN],
    pub ciphertext: Vec<u8>,
    pub tag: [u8; TAG_LEN],
}

pub fn aead_encrypt(key: &SymmetricKey, nonce: &[u8; NONCE_LEN], plaintext: &[u8], aad: &[u8]) -> AeadBox {
    let cipher = Aes256Gcm::new_from_slice(&key.0).expect("key is 32 bytes");
    let mut ciphertext = plaintext.to_vec();
    let tag = cipher
        .encrypt_in_place_detached(Nonce::from_slice(nonce), aad, &mut ciphertext)
        .expect("plaintext within AES-GCM length limit");
    AeadBox {
        nonce: *nonce,
        ciphertext,
        tag: tag.into(),
    }
}

pub fn aead_decrypt(key: &SymmetricKey, sealed: &AeadBox, aad: &[u8]) -> Result<Vec<u8>, CryptoError> {
    let cipher = Aes256Gcm::new_from_slice(&key.0).expect("key is 32 bytes");
    let mut buf = sealed.ciphertext.clone();
    match cipher.decrypt_in_place_detached(
        Nonce::from_slice(&sealed.nonce),
        aad,
        &mut buf,
        Tag::from_slice(&sealed.tag),
    ) {
        Ok(()) => Ok(buf),
        Err(_) => {
            buf.zeroize();
            Err(CryptoError::AuthenticationFailure)
        }
    }
}

pub fn random_nonce<R: CryptoRngCore + ?Sized>(rng: &mut R) -> [u8; NONCE_LEN] {
    let mut nonce = [0u8; NONCE_LEN];
    rng.fill_bytes(&mut nonce);
    nonce
}

pub fn hmac(key: &[u8], data: &[u8]) -> [u8; 32] {
    let mut mac = <Hmac<Sha256> as Mac>::new_from_slice(key).expect("HMAC accepts any key length");
    mac.update(data);
    mac.finalize().into_bytes().into()
}

pub fn hash(data: &[u8]) -> Hash256 {
    Hash256(Sha256::digest(data).into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand_chacha::ChaCha20Rng;
    use rand_core::{RngCore, SeedableRng};

    fn h(s: &str) -> Vec<u8> {
        hex::decode(s).unwrap()
    }

    fn arr32(s: &str) -> [u8; 32] {
        h(s).try_into().unwrap()
    }

    // RFC 8032 section 7.1, TEST 1.
    const RFC8032_SEED: &str = "9d61b19deffd5a60ba844af492ec2cc44449c5697b326919703bac031cae7f60";
    const RFC8032_PK: &str = "d75a980182b10ab7d54bfed3c964073a0ee172f3daa62325af021a68f707511a";
    const RFC8032_SIG: &str = "e5564300c360ac729086e2cc806e828a84877f1eb8e5d974d873e065224901555fb8821590a33bacc61e39701cf9b46bd25bf5f0595bbe24655141438e7a100b";

    #[test]
    fn ed25519_rfc8032_test1() {
        let pair = identity_keygen(&arr32(RFC8032_SEED));
        assert_eq!(pair.ivk().to_hex(), RFC8032_PK);
        let sig = sign(&pair, b"");
        assert_eq!(hex::encode(sig.0), RFC8032_SIG);
        assert!(verify(&pair.ivk(), b"", &sig));
    }

    #[test]
    fn ed25519_matches_ring_for_seeded_keys() {
        use ring::signature::{Ed25519KeyPair, KeyPair};
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for len in [0usize, 1, 31, 64, 300] {
            let pair = IdentityKeyPair::generate(&mut rng);
            let mut msg = vec![0u8; len];
            rng.fill_bytes(&mut msg);
            let oracle = Ed25519KeyPair::from_seed_unchecked(&pair.seed()).unwrap();
            assert_eq!(oracle.public_key().as_ref(), pair.ivk().as_bytes());
            assert_eq!(oracle.sign(&msg).as_ref(), &sign(&pair, &msg).0[..]);
        }
    }

    #[test]
    fn keygen_is_deterministic_and_signatures_repeat() {
        let a = identity_keygen(&[7u8; 32]);
        let b = identity_keygen(&[7u8; 32]);
        assert_eq!(a.ivk(), b.ivk());
        assert_eq!(sign(&a, b"m"), sign(&b, b"m"));
        assert!(verify(&a.ivk(), b"x", &sign(&a, b"x")));
    }

    #[test]
    fn verify_rejects_wrong_key_and_malformed_bytes() {
        let a = identity_keygen(&[1u8; 32]);
        let b = identity_keygen(&[2u8; 32]);
        let sig = sign(&a, b"hello");
        assert!(!verify(&b.ivk(), b"hello", &sig));
        assert!(!verify(&a.ivk(), b"hellp", &sig));
        // Not a valid curve point encoding.
        let bogus = VerifyingKey([0xff; 32]);
        assert!(!verify(&bogus, b"hello", &sig));
        assert!(!verify(&a.ivk(), b"hello", &Signature([0xff; 64])));
    }

    // RFC 7748 section 5.2 (first vector) and section 6.1.
    #[test]
    fn x25519_rfc7748_vectors() {
        let esk = DhSecretKey::from_bytes(arr32(
            "a546e36bf0527c9d3b16154b82465edd62144c0ac1fc5a18506a2244ba449ac4",
        ));
        let u = DhPublicKey(arr32(
            "e6db6867583030db3594c1a424b15f7c726624ec26b3353b10a903a6d0ab1c4c",
        ));
        assert_eq!(
            hex::encode(dh(&esk, &u).unwrap().as_bytes()),
            "c3da55379de9c6908e94ea4df28d084f32eccf03491c71f754b4075577a28552"
        );

        let alice = EphemeralKeyPair::from_secret(DhSecretKey::from_bytes(arr32(
            "77076d0a7318a57d3c16c17251b26645df4c2f87ebc0992ab177fba51db92c2a",
        )));
        let bob = EphemeralKeyPair::from_secret(DhSecretKey::from_bytes(arr32(
            "5dab087e624a8a4b79e17f8b83800ee66f3bb1292618b6fd1c2f8b27ff88e0eb",
        )));
        assert_eq!(
            alice.epk().to_hex(),
            "8520f0098930a754748b7ddcb43ef75a0dbf3a0d26381af4eba4a98eaa9b4e6a"
        );
        assert_eq!(
            bob.epk().to_hex(),
            "de9edb7d7b7dc1b4d35b61c2ece435373f8343c85b78674dadfc7e146f882b4f"
        );
        let k = "4a5d9d5ba4ce2de1728e3bf480350f25e07e21c947d19e3376f09b3c1e161742";
        assert_eq!(hex::encode(dh(alice.esk(), &bob.epk()).unwrap().as_bytes()), k);
        assert_eq!(hex::encode(dh(bob.esk(), &alice.epk()).unwrap().as_bytes()), k);
    }

    #[test]
    fn x25519_low_order_points_are_rejected() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let pair = EphemeralKeyPair::generate(&mut rng);
        let mut one = [0u8; 32];
        one[0] = 1;
        for point in [[0u8; 32], one] {
            assert_eq!(
                dh(pair.esk(), &DhPublicKey(point)).unwrap_err(),
                CryptoError::DegenerateSharedSecret
            );
        }
    }

    #[test]
    fn dh_is_symmetric_for_100_pairs() {
        let mut rng = ChaCha20Rng::seed_from_u64(100);
        for _ in 0..100 {
            let a = EphemeralKeyPair::generate(&mut rng);
            let b = EphemeralKeyPair::generate(&mut rng);
            assert_eq!(
                dh(a.esk(), &b.epk()).unwrap().as_bytes(),
                dh(b.esk(), &a.epk()).unwrap().as_bytes()
            );
        }
    }

    fn ring_hkdf(ikm: &[u8], salt: &[u8], info: &[u8], len: usize) -> Vec<u8> {
        struct Len(usize);
        impl ring::hkdf::KeyType for Len {
            fn len(&self) -> usize {
                self.0
            }
        }
        let prk = ring::hkdf::Salt::new(ring::hkdf::HKDF_SHA256, salt).extract(ikm);
        let info = [info];
        let okm = prk.expand(&info, Len(len)).unwrap();
        let mut out = vec![0u8; len];
        okm.fill(&mut out).unwrap();
        out
    }

    #[test]
    fn hkdf_rfc5869_a1_through_the_oracle_and_the_crate() {
        let ikm = [0x0bu8; 22];
        let salt = h("000102030405060708090a0b0c");
        let info = h("f0f1f2f3f4f5f6f7f8f9");
        let okm = "3cb25f25faacd57a90434f64d0362f2a2d2d0a90cf1a5a4c5db02d56ecc4c5bf34007208d5b887185865";
        assert_eq!(hex::encode(ring_hkdf(&ikm, &salt, &info, 42)), okm);
        let mut out = [0u8; 42];
        Hkdf::<Sha256>::new(Some(&salt), &ikm).expand(&info, &mut out).unwrap();
        assert_eq!(hex::encode(out), okm);
    }

    #[test]
    fn derive_enc_key_matches_oracle_and_separates_contexts() {
        // RFC 5869 A.3 uses an empty salt and info; its OKM prefix is our key.
        let ss = SharedSecret([0x0b; 32]);
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let mut ctx = vec![0u8; 84];
        rng.fill_bytes(&mut ctx);
        let key = derive_enc_key(&ss, &ctx);
        assert_eq!(key, derive_enc_key(&ss, &ctx));
        assert_eq!(&key.0[..], &ring_hkdf(&ss.0, &[], &ctx, 32)[..]);

        let mut other = ctx.clone();
        other[40] ^= 1;
        let key2 = derive_enc_key(&ss, &other);
        assert_eq!(&key2.0[..], &ring_hkdf(&ss.0, &[], &other, 32)[..]);
        assert_ne!(key, key2);
    }

    #[test]
    fn hkdf_rfc5869_a3_prefix() {
        let ikm = [0x0bu8; 22];
        let hk = Hkdf::<Sha256>::new(None, &ikm);
        let mut okm = [0u8; 32];
        hk.expand(&[], &mut okm).unwrap();
        assert_eq!(
            hex::encode(okm),
            "8da4e775a563c18f715f802a063c5a31b8a11f5c5ee1879ec3454e5f3c738d2d"
        );
    }

    #[test]
    fn kdf_contexts_do_not_collide_over_10k_samples() {
        let mut rng = ChaCha20Rng::seed_from_u64(77);
        let ss = SharedSecret([0x42; 32]);
        let mut seen = std::collections::HashSet::new();
        for i in 0u32..10_000 {
            let mut ctx = i.to_be_bytes().to_vec();
            let mut tail = [0u8; 8];
            rng.fill_bytes(&mut tail);
            ctx.extend_from_slice(&tail);
            assert!(seen.insert(*derive_enc_key(&ss, &ctx).as_bytes()));
        }
    }

    // NIST GCM spec test cases 13 and 14 (AES-256, zero key and IV).
    #[test]
    fn aes_gcm_nist_vectors() {
        let key = SymmetricKey([0u8; 32]);
        let nonce = [0u8; 12];
        let empty = aead_encrypt(&key, &nonce, b"", b"");
        assert!(empty.ciphertext.is_empty());
        assert_eq!(hex::encode(empty.tag), "530f8afbc74536b9a963b4f1c4cb738b");

        let sealed = aead_encrypt(&key, &nonce, &[0u8; 16], b"");
        assert_eq!(hex::encode(&sealed.ciphertext), "cea7403d4d606b6e074ec5d3baf39d18");
        assert_eq!(hex::encode(sealed.tag), "d0d1c8a799996bf0265b98b5d48ab919");
        assert_eq!(aead_decrypt(&key, &sealed, b"").unwrap(), vec![0u8; 16]);
    }

    #[test]
    fn aes_gcm_matches_ring() {
        use ring::aead::{Aad, LessSafeKey, Nonce as RingNonce, UnboundKey, AES_256_GCM};
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let mut k = [0u8; 32];
        rng.fill_bytes(&mut k);
        let nonce = random_nonce(&mut rng);
        let pt = b"meeting key material, 32 bytes!!";
        let aad = b"context";
        let ours = aead_encrypt(&SymmetricKey(k), &nonce, pt, aad);
        let oracle = LessSafeKey::new(UnboundKey::new(&AES_256_GCM, &k).unwrap());
        let mut buf = pt.to_vec();
        let tag = oracle
            .seal_in_place_separate_tag(RingNonce::assume_unique_for_key(nonce), Aad::from(aad), &mut buf)
            .unwrap();
        assert_eq!(ours.ciphertext, buf);
        assert_eq!(&ours.tag[..], tag.as_ref());
    }

    #[test]
    fn aead_rejects_wrong_aad_and_flipped_bits() {
        let key = SymmetricKey([3u8; 32]);
        let sealed = aead_encrypt(&key, &[1u8; 12], b"payload", b"aad");
        assert_eq!(aead_decrypt(&key, &sealed, b"aad").unwrap(), b"payload");
        assert_eq!(
            aead_decrypt(&key, &sealed, b"aae"),
            Err(CryptoError::AuthenticationFailure)
        );
        let mut bad = sealed.clone();
        bad.ciphertext[0] ^= 1;
        assert_eq!(
            aead_decrypt(&key, &bad, b"aad"),
            Err(CryptoError::AuthenticationFailure)
        );
    }

    // RFC 4231 test case 1.
    #[test]
    fn hmac_rfc4231_case1() {
        assert_eq!(
            hex::encode(hmac(&[0x0b; 20], b"Hi There")),
            "b0344c61d8db38535ca8afceaf0bf12b881dc200c9833da726e9376c2e32cff7"
        );
    }

    #[test]
    fn hmac_keys_one_bit_apart_differ_and_match_ring() {
        let data = b"stream";
        let k1 = [0x5au8; 32];
        let mut k2 = k1;
        k2[17] ^= 0x10;
        let oracle = |k: &[u8]| {
            ring::hmac::sign(&ring::hmac::Key::new(ring::hmac::HMAC_SHA256, k), data)
                .as_ref()
                .to_vec()
        };
        assert_eq!(&hmac(&k1, data)[..], &oracle(&k1)[..]);
        assert_eq!(&hmac(&k2, data)[..], &oracle(&k2)[..]);
        assert_ne!(hmac(&k1, data), hmac(&k2, data));
    }

    #[test]
    fn sha256_known_digests() {
        assert_eq!(
            hash(b"").to_hex(),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        assert_eq!(
            hash(b"abc").to_hex(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        assert_eq!(hash(b"abc"), hash(b"abc"));
    }

    proptest! {
        #[test]
        fn sign_verify_soundness(
            seed in any::<[u8; 32]>(),
            msg in proptest::collection::vec(any::<u8>(), 0..128),
            target in 0usize..3,
            pos in any::<prop::sample::Index>(),
            bit in 0u8..8,
        ) {
            let pair = identity_keygen(&seed);
            let sig = sign(&pair, &msg);
            prop_assert!(verify(&pair.ivk(), &msg, &sig));

            let mut m = msg.clone();
            let mut s = sig;
            let mut k = pair.ivk();
            match target {
                0 if !m.is_empty() => { let i = pos.index(m.len()); m[i] ^= 1 << bit; }
                0 => m.push(0),
                1 => { let i = pos.index(64); s.0[i] ^= 1 << bit; }
                _ => { let i = pos.index(32); k.0[i] ^= 1 << bit; }
            }
            prop_assert!(!verify(&k, &m, &s));
        }

        #[test]
        fn aead_authenticity(
            key in any::<[u8; 32]>(),
            nonce in any::<[u8; 12]>(),
            pt in proptest::collection::vec(any::<u8>(), 0..96),
            aad in proptest::collection::vec(any::<u8>(), 0..32),
            which in 0usize..4,
            pos in any::<prop::sample::Index>(),
            bit in 0u8..8,
        ) {
            let key = SymmetricKey(key);
            let sealed = aead_encrypt(&key, &nonce, &pt, &aad);
            prop_assert_eq!(aead_decrypt(&key, &sealed, &aad).unwrap(), pt.clone());

            let mut b = sealed.clone();
            let mut a = aad.clone();
            match which {
                0 => { let i = pos.index(12); b.nonce[i] ^= 1 << bit; }
                1 if !b.ciphertext.is_empty() => { let i = pos.index(b.ciphertext.len()); b.ciphertext[i] ^= 1 << bit; }
                2 => { let i = pos.index(16); b.tag[i] ^= 1 << bit; }
                _ => a.push(0xa5),
            }
            if which == 1 && sealed.ciphertext.is_empty() {
                a.push(0x5a);
            }
            prop_assert_eq!(aead_decrypt(&key, &b, &a), Err(CryptoError::AuthenticationFailure));
        }
    }
}
