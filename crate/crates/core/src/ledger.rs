//! Append-only, hash-chained transaction log.
//!
//! Two instances exist at runtime: the identity ledger and the meeting
//! ledger. The only mutation path is [`Ledger::append_block`], which runs a
//! per-kind [`TxValidator`] over every transaction before linking a block.
//! [`Ledger::prune`] may drop a prefix of the meeting ledger, keeping a
//! checkpoint of the last discarded block so the retained suffix still
//! verifies.
//!
//! Canonical block bytes (hashed to produce `block_hash`):
//!
//! ```text
//! index(8) ‖ prev_hash(32) ‖ timestamp(8) ‖ tx_count(4) ‖ tx*
//! tx = tag(1) ‖ len(body)(4) ‖ body ‖ signature(64)
//! ```

use std::fmt;

use thiserror::Error;

use crate::codec::{DecodeError, Reader, Writer};
use crate::crypto::{hash, Hash256, Signature, VerifyingKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LedgerKind {
    Identity,
    Meeting,
}

impl LedgerKind {
    pub fn name(self) -> &'static str {
        match self {
            LedgerKind::Identity => "identity",
            LedgerKind::Meeting => "meeting",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "identity" => Some(LedgerKind::Identity),
            "meeting" => Some(LedgerKind::Meeting),
            _ => None,
        }
    }
}

impl fmt::Display for LedgerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One-byte transaction type discriminator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum TxTag {
    Identity = 0x01,
    PublishMeeting = 0x10,
    MeetingRequest = 0x11,
    KeyDistribution = 0x12,
    MeetingLeave = 0x13,
    LeaderReassign = 0x14,
    MeetingDismiss = 0x15,
}

impl TxTag {
    pub const ALL: [TxTag; 7] = [
        TxTag::Identity,
        TxTag::PublishMeeting,
        TxTag::MeetingRequest,
        TxTag::KeyDistribution,
        TxTag::MeetingLeave,
        TxTag::LeaderReassign,
        TxTag::MeetingDismiss,
    ];

    pub fn from_byte(b: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|t| *t as u8 == b)
    }

    pub fn name(self) -> &'static str {
        match self {
            TxTag::Identity => "identity",
            TxTag::PublishMeeting => "publish_meeting",
            TxTag::MeetingRequest => "meeting_request",
            TxTag::KeyDistribution => "key_distribution",
            TxTag::MeetingLeave => "meeting_leave",
            TxTag::LeaderReassign => "leader_reassign",
            TxTag::MeetingDismiss => "meeting_dismiss",
        }
    }

    pub fn ledger(self) -> LedgerKind {
        match self {
            TxTag::Identity => LedgerKind::Identity,
            _ => LedgerKind::Meeting,
        }
    }
}

impl fmt::Display for TxTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Why a validator refused a transaction.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RejectReason {
    #[error("bad signature")]
    BadSignature,
    #[error("malformed transaction body")]
    Malformed,
    #[error("transaction type not valid on this ledger")]
    WrongLedger,
    #[error("(user, device) already bound")]
    DuplicateBinding,
    #[error("identity not registered")]
    UnknownIdentity,
    #[error("key does not match the identity ledger binding")]
    KeyMismatch,
    #[error("meeting id already published")]
    DuplicateMeeting,
    #[error("meeting not found")]
    MeetingNotFound,
    #[error("meeting dismissed")]
    MeetingDismissed,
    #[error("signer is not the current leader")]
    NotCurrentLeader,
    #[error("signer is not a member of the meeting")]
    NotAMember,
    #[error("key epoch out of order")]
    EpochOutOfOrder,
    #[error("requester already has an active request")]
    DuplicateRequest,
    #[error("request ephemeral key already seen in this meeting")]
    ReplayedRequest,
    #[error("leader ephemeral key reused")]
    ReusedEphemeral,
    #[error("leader assignment rule violated")]
    RuleViolation,
}

impl RejectReason {
    pub fn code(self) -> &'static str {
        match self {
            RejectReason::BadSignature => "bad_signature",
            RejectReason::Malformed => "malformed",
            RejectReason::WrongLedger => "wrong_ledger",
            RejectReason::DuplicateBinding => "duplicate_binding",
            RejectReason::UnknownIdentity => "unknown_identity",
            RejectReason::KeyMismatch => "key_mismatch",
            RejectReason::DuplicateMeeting => "duplicate_meeting",
            RejectReason::MeetingNotFound => "meeting_not_found",
            RejectReason::MeetingDismissed => "meeting_dismissed",
            RejectReason::NotCurrentLeader => "not_current_leader",
            RejectReason::NotAMember => "not_a_member",
            RejectReason::EpochOutOfOrder => "epoch_out_of_order",
            RejectReason::DuplicateRequest => "duplicate_request",
            RejectReason::ReplayedRequest => "replayed_request",
            RejectReason::ReusedEphemeral => "reused_ephemeral",
            RejectReason::RuleViolation => "rule_violation",
        }
    }
}

impl From<DecodeError> for RejectReason {
    fn from(_: DecodeError) -> Self {
        RejectReason::Malformed
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transaction {
    pub tag: TxTag,
    pub body: Vec<u8>,
    /// Over `tag ‖ body`.
    pub signature: Signature,
}

impl Transaction {
    pub fn signing_input(tag: TxTag, body: &[u8]) -> Vec<u8> {
        let mut input = Vec::with_capacity(1 + body.len());
        input.push(tag as u8);
        input.extend_from_slice(body);
        input
    }

    fn encode_into(&self, w: &mut Writer) {
        w.u8(self.tag as u8).var(&self.body).raw(&self.signature.0);
    }

    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let tag = TxTag::from_byte(r.u8("tx tag")?).ok_or(DecodeError::Invalid("tx tag"))?;
        let body = r.var("tx body")?.to_vec();
        let signature = Signature(r.array("tx signature")?);
        Ok(Self { tag, body, signature })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    index: u64,
    prev_hash: Hash256,
    timestamp: u64,
    txs: Vec<Transaction>,
    block_hash: Hash256,
}

impl Block {
    fn seal(index: u64, prev_hash: Hash256, timestamp: u64, txs: Vec<Transaction>) -> Self {
        let mut block = Self {
            index,
            prev_hash,
            timestamp,
            txs,
            block_hash: Hash256::ZERO,
        };
        block.block_hash = hash(&block.canonical_bytes());
        block
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn prev_hash(&self) -> Hash256 {
        self.prev_hash
    }

    pub fn timestamp(&self) -> u64 {
        self.timestamp
    }

    pub fn txs(&self) -> &[Transaction] {
        &self.txs
    }

    pub fn block_hash(&self) -> Hash256 {
        self.block_hash
    }

    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.u64(self.index).raw(&self.prev_hash.0).u64(self.timestamp);
        w.u32(u32::try_from(self.txs.len()).expect("tx count fits u32"));
        for tx in &self.txs {
            tx.encode_into(&mut w);
        }
        w.finish()
    }

    /// Parses canonical bytes; `block_hash` is taken as stored, not recomputed.
    pub fn from_canonical(bytes: &[u8], block_hash: Hash256) -> Result<Self, DecodeError> {
        let mut r = Reader::new(bytes);
        let index = r.u64("block index")?;
        let prev_hash = Hash256(r.array("prev hash")?);
        let timestamp = r.u64("timestamp")?;
        let count = r.u32("tx count")?;
        let mut txs = Vec::new();
        for _ in 0..count {
            txs.push(Transaction::decode_from(&mut r)?);
        }
        r.finish()?;
        Ok(Self {
            index,
            prev_hash,
            timestamp,
            txs,
            block_hash,
        })
    }
}

/// Hash of the last block discarded by a prune.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Checkpoint {
    pub index: u64,
    pub block_hash: Hash256,
}

/// Per-kind admission rule consulted by [`Ledger::append_block`].
///
/// `pending` holds the transactions already admitted to the block under
/// construction, in order.
pub trait TxValidator {
    fn validate(&self, ledger: &Ledger, pending: &[Transaction], tx: &Transaction) -> Result<(), RejectReason>;
}

/// Accepts any transaction of the right kind. For tests and replay tooling.
#[derive(Debug, Default, Clone, Copy)]
pub struct AcceptAll;

impl TxValidator for AcceptAll {
    fn validate(&self, _: &Ledger, _: &[Transaction], _: &Transaction) -> Result<(), RejectReason> {
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LedgerError {
    #[error("transaction {position} rejected: {reason}")]
    InvalidTransaction { position: usize, reason: RejectReason },
    #[error("timestamp {got} precedes head timestamp {head}")]
    NonMonotonicTimestamp { head: u64, got: u64 },
    #[error("the identity ledger is never pruned")]
    PruneIdentityLedgerForbidden,
    #[error("prune cutoff {cutoff} beyond head index {head}")]
    CutoffBeyondHead { cutoff: u64, head: u64 },
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("line {line}: {source}")]
    Decode { line: usize, source: DecodeError },
    #[error("ledger image holds no blocks")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ledger {
    kind: LedgerKind,
    blocks: Vec<Block>,
    pruned_below: u64,
    checkpoint: Option<Checkpoint>,
}

impl Ledger {
    pub fn new(kind: LedgerKind) -> Self {
        Self {
            kind,
            blocks: vec![Block::seal(0, Hash256::ZERO, 0, Vec::new())],
            pruned_below: 0,
            checkpoint: None,
        }
    }

    pub fn kind(&self) -> LedgerKind {
        self.kind
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn head(&self) -> &Block {
        self.blocks.last().expect("ledger always retains at least one block")
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn pruned_below(&self) -> u64 {
        self.pruned_below
    }

    pub fn checkpoint(&self) -> Option<Checkpoint> {
        self.checkpoint
    }

    pub fn append_block(
        &mut self,
        txs: Vec<Transaction>,
        timestamp: u64,
        validator: &dyn TxValidator,
    ) -> Result<&Block, LedgerError> {
        let head = self.head();
        if timestamp < head.timestamp {
            return Err(LedgerError::NonMonotonicTimestamp {
                head: head.timestamp,
                got: timestamp,
            });
        }
        for (position, tx) in txs.iter().enumerate() {
            if tx.tag.ledger() != self.kind {
                return Err(LedgerError::InvalidTransaction {
                    position,
                    reason: RejectReason::WrongLedger,
                });
            }
            validator
                .validate(self, &txs[..position], tx)
                .map_err(|reason| LedgerError::InvalidTransaction { position, reason })?;
        }
        let block = Block::seal(head.index + 1, head.block_hash, timestamp, txs);
        self.blocks.push(block);
        Ok(self.head())
    }

    /// Recomputes every retained block hash and checks every link.
    pub fn verify_chain(&self) -> bool {
        let Some(first) = self.blocks.first() else {
            return false;
        };
        let anchored = match self.checkpoint {
            None => first.index == 0 && first.prev_hash == Hash256::ZERO && self.pruned_below == 0,
            Some(cp) => {
                first.index == cp.index + 1 && first.prev_hash == cp.block_hash && self.pruned_below == first.index
            }
        };
        if !anchored {
            return false;
        }
        let kind_ok = |b: &Block| b.txs.iter().all(|tx| tx.tag.ledger() == self.kind);
        if !self
            .blocks
            .iter()
            .all(|b| hash(&b.canonical_bytes()) == b.block_hash && kind_ok(b))
        {
            return false;
        }
        self.blocks.windows(2).all(|pair| {
            let (prev, next) = (&pair[0], &pair[1]);
            next.index == prev.index + 1 && next.prev_hash == prev.block_hash && next.timestamp >= prev.timestamp
        })
    }

    /// Every retained transaction with its block index and position, in chain order.
    pub fn transactions(&self) -> impl Iterator<Item = (u64, usize, &Transaction)> + '_ {
        self.blocks
            .iter()
            .flat_map(|b| b.txs.iter().enumerate().map(move |(i, tx)| (b.index, i, tx)))
    }

    pub fn query<P>(&self, mut predicate: P) -> Vec<(u64, &Transaction)>
    where
        P: FnMut(&Transaction) -> bool,
    {
        self.transactions()
            .filter(|(_, _, tx)| predicate(tx))
            .map(|(index, _, tx)| (index, tx))
            .collect()
    }

    /// Discards all blocks below `cutoff`, keeping a checkpoint of the last one dropped.
    pub fn prune(&mut self, cutoff: u64) -> Result<(), LedgerError> {
        if self.kind == LedgerKind::Identity {
            return Err(LedgerError::PruneIdentityLedgerForbidden);
        }
        let head = self.head().index;
        if cutoff > head {
            return Err(LedgerError::CutoffBeyondHead { cutoff, head });
        }
        if cutoff <= self.pruned_below {
            return Ok(());
        }
        let last_dropped = self
            .blocks
            .iter()
            .find(|b| b.index == cutoff - 1)
            .expect("retained range covers cutoff - 1");
        self.checkpoint = Some(Checkpoint {
            index: last_dropped.index,
            block_hash: last_dropped.block_hash,
        });
        self.blocks.retain(|b| b.index >= cutoff);
        self.pruned_below = cutoff;
        Ok(())
    }

    /// Text image: a header line, then `hex(canonical) hex(block_hash)` per block.
    pub fn persist(&self) -> String {
        let checkpoint = match self.checkpoint {
            Some(cp) => format!("{}:{}", cp.index, cp.block_hash.to_hex()),
            None => "-".to_owned(),
        };
        let mut out = format!(
            "ledger kind={} pruned_below={} checkpoint={}\n",
            self.kind, self.pruned_below, checkpoint
        );
        for block in &self.blocks {
            out.push_str(&hex::encode(block.canonical_bytes()));
            out.push(' ');
            out.push_str(&block.block_hash.to_hex());
            out.push('\n');
        }
        out
    }

    /// Parses a [`persist`](Self::persist) image without verifying it.
    pub fn load(image: &str) -> Result<Self, LoadError> {
        let mut lines = image.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(LoadError::Empty)?;
        let fmt_err = |line: usize, message: &str| LoadError::Format {
            line: line + 1,
            message: message.to_owned(),
        };

        let mut kind = None;
        let mut pruned_below = None;
        let mut checkpoint = None;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("ledger") {
            return Err(fmt_err(0, "missing ledger header"));
        }
        for field in fields {
            let (key, value) = field.split_once('=').ok_or_else(|| fmt_err(0, "bad header field"))?;
            match key {
                "kind" => kind = LedgerKind::from_name(value),
                "pruned_below" => pruned_below = value.parse::<u64>().ok(),
                "checkpoint" if value == "-" => checkpoint = Some(None),
                "checkpoint" => {
                    let (idx, h) = value.split_once(':').ok_or_else(|| fmt_err(0, "bad checkpoint"))?;
                    let index = idx.parse().map_err(|_| fmt_err(0, "bad checkpoint index"))?;
                    let block_hash = parse_hash(h).ok_or_else(|| fmt_err(0, "bad checkpoint hash"))?;
                    checkpoint = Some(Some(Checkpoint { index, block_hash }));
                }
                _ => return Err(fmt_err(0, "unknown header field")),
            }
        }
        let (Some(kind), Some(pruned_below), Some(checkpoint)) = (kind, pruned_below, checkpoint) else {
            return Err(fmt_err(0, "incomplete header"));
        };

        let mut blocks = Vec::new();
        for (line, text) in lines {
            let (bytes_hex, hash_hex) = text
                .trim()
                .split_once(' ')
                .ok_or_else(|| fmt_err(line, "expected `<bytes> <hash>`"))?;
            let bytes = hex::decode(bytes_hex).map_err(|_| fmt_err(line, "bad block hex"))?;
            let block_hash = parse_hash(hash_hex).ok_or_else(|| fmt_err(line, "bad block hash"))?;
            let block = Block::from_canonical(&bytes, block_hash)
                .map_err(|source| LoadError::Decode { line: line + 1, source })?;
            blocks.push(block);
        }
        if blocks.is_empty() {
            return Err(LoadError::Empty);
        }
        Ok(Self {
            kind,
            blocks,
            pruned_below,
            checkpoint,
        })
    }

    /// What a replica does with a received image: parse, then verify the chain.
    pub fn verify_image(image: &str) -> bool {
        Ledger::load(image).map(|l| l.verify_chain()).unwrap_or(false)
    }

    /// One line per transaction: `block=<i> tag=<name> signer=<hex8> body=<hex>`.
    pub fn dump<F>(&self, signer_of: F) -> String
    where
        F: Fn(&Transaction) -> Option<VerifyingKey>,
    {
        let mut out = String::new();
        for (index, _, tx) in self.transactions() {
            let signer = signer_of(tx).map(|k| k.short(8)).unwrap_or_else(|| "-".to_owned());
            out.push_str(&format!(
                "block={} tag={} signer={} body={}\n",
                index,
                tx.tag,
                signer,
                hex::encode(&tx.body)
            ));
        }
        out
    }

    /// One line per block: `block=<i> hash=<hex> bytes=<canonical hex>`.
    pub fn dump_blocks(&self) -> String {
        self.blocks
            .iter()
            .map(|b| {
                format!(
                    "block={} hash={} bytes={}\n",
                    b.index,
                    b.block_hash.to_hex(),
                    hex::encode(b.canonical_bytes())
                )
            })
            .collect()
    }
}

fn parse_hash(s: &str) -> Option<Hash256> {
    let bytes: [u8; 32] = hex::decode(s).ok()?.try_into().ok()?;
    Some(Hash256(bytes))
}
