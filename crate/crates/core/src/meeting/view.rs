//! Meeting state as replayed from the meeting ledger, and the ledger's
//! admission rule for meeting transactions.

use std::collections::{BTreeMap, BTreeSet};

use crate::crypto::{DhPublicKey, VerifyingKey};
use crate::identity::binding_for_key;
use crate::ledger::{Ledger, RejectReason, Transaction, TxValidator};
use crate::record::Record;

use super::reassign::{check_reassign, LeaderRule};
use super::tx::{
    KeyDistributionTx, LeaderReassignTx, MeetingDismissTx, MeetingLeaveTx, MeetingRequestTx, PublishMeetingTx, SignedTx,
};
use super::MeetingId;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RequestRecord {
    pub block: u64,
    pub position: usize,
    pub request: MeetingRequestTx,
    /// Left, or was promoted to leader.
    pub departed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeetingView {
    pub meeting_id: MeetingId,
    pub meeting_info: String,
    pub publisher: VerifyingKey,
    pub leader_ivk: VerifyingKey,
    pub leader_present: bool,
    /// Announced by publish or reassign; the next distribution may use it once.
    pub reserved_epk: Option<DhPublicKey>,
    /// Every ephemeral key that has appeared in this meeting.
    pub seen_epks: BTreeSet<DhPublicKey>,
    pub requests: Vec<RequestRecord>,
    pub epochs: Vec<u32>,
    pub latest_distribution: Option<KeyDistributionTx>,
    pub dismissed: bool,
}

impl MeetingView {
    fn new(tx: &PublishMeetingTx) -> Self {
        Self {
            meeting_id: tx.meeting_id,
            meeting_info: tx.meeting_info.clone(),
            publisher: tx.leader_ivk,
            leader_ivk: tx.leader_ivk,
            leader_present: true,
            reserved_epk: Some(tx.leader_epk),
            seen_epks: BTreeSet::from([tx.leader_epk]),
            requests: Vec::new(),
            epochs: Vec::new(),
            latest_distribution: None,
            dismissed: false,
        }
    }

    pub fn next_epoch(&self) -> u32 {
        self.epochs.last().map_or(0, |e| e + 1)
    }

    pub fn active_requests(&self) -> impl Iterator<Item = &RequestRecord> + '_ {
        self.requests.iter().filter(|r| !r.departed)
    }

    pub fn active_request_for(&self, ivk: &VerifyingKey) -> Option<&RequestRecord> {
        self.active_requests().find(|r| &r.request.ivk == ivk)
    }

    pub fn current_recipients(&self) -> BTreeSet<VerifyingKey> {
        self.latest_distribution
            .as_ref()
            .map(|d| d.recipients().collect())
            .unwrap_or_default()
    }

    /// Holds the current epoch's key and has not left.
    pub fn is_keyed_member(&self, ivk: &VerifyingKey) -> bool {
        self.active_request_for(ivk).is_some() && self.current_recipients().contains(ivk)
    }

    pub fn is_current_leader(&self, ivk: &VerifyingKey) -> bool {
        self.leader_present && &self.leader_ivk == ivk
    }

    fn check(&self, record: &Record) -> Result<(), RejectReason> {
        match record {
            Record::Identity(_) => Err(RejectReason::WrongLedger),
            Record::PublishMeeting(_) => Err(RejectReason::DuplicateMeeting),
            Record::MeetingRequest(tx) => self.check_request(tx),
            Record::KeyDistribution(tx) => self.check_distribution(tx),
            Record::MeetingLeave(tx) => self.check_leave(tx),
            Record::LeaderReassign(_) => unreachable!("reassignment is checked with the identity ledger"),
            Record::MeetingDismiss(tx) => self.check_dismiss(tx),
        }
    }

    fn open(&self) -> Result<(), RejectReason> {
        if self.dismissed {
            Err(RejectReason::MeetingDismissed)
        } else {
            Ok(())
        }
    }

    fn check_request(&self, tx: &MeetingRequestTx) -> Result<(), RejectReason> {
        self.open()?;
        if self.seen_epks.contains(&tx.epk) {
            return Err(RejectReason::ReplayedRequest);
        }
        if self.is_current_leader(&tx.ivk) || self.active_request_for(&tx.ivk).is_some() {
            return Err(RejectReason::DuplicateRequest);
        }
        Ok(())
    }

    fn check_distribution(&self, tx: &KeyDistributionTx) -> Result<(), RejectReason> {
        self.open()?;
        if !self.is_current_leader(&tx.leader_ivk) {
            return Err(RejectReason::NotCurrentLeader);
        }
        if tx.epoch != self.next_epoch() {
            return Err(RejectReason::EpochOutOfOrder);
        }
        if self.reserved_epk != Some(tx.leader_epk) && self.seen_epks.contains(&tx.leader_epk) {
            return Err(RejectReason::ReusedEphemeral);
        }
        let mut recipients = BTreeSet::new();
        for r in tx.recipients() {
            if !recipients.insert(r) {
                return Err(RejectReason::Malformed);
            }
            if self.active_request_for(&r).is_none() {
                return Err(RejectReason::NotAMember);
            }
        }
        Ok(())
    }

    fn check_leave(&self, tx: &MeetingLeaveTx) -> Result<(), RejectReason> {
        self.open()?;
        if self.is_current_leader(&tx.member_ivk) || self.active_request_for(&tx.member_ivk).is_some() {
            Ok(())
        } else {
            Err(RejectReason::NotAMember)
        }
    }

    fn check_dismiss(&self, tx: &MeetingDismissTx) -> Result<(), RejectReason> {
        self.open()?;
        if self.is_current_leader(&tx.leader_ivk) {
            Ok(())
        } else {
            Err(RejectReason::NotCurrentLeader)
        }
    }

    fn apply(&mut self, block: u64, position: usize, record: &Record) {
        match record {
            Record::Identity(_) | Record::PublishMeeting(_) => {}
            Record::MeetingRequest(tx) => {
                self.seen_epks.insert(tx.epk);
                self.requests.push(RequestRecord {
                    block,
                    position,
                    request: tx.clone(),
                    departed: false,
                });
            }
            Record::KeyDistribution(tx) => {
                self.epochs.push(tx.epoch);
                self.seen_epks.insert(tx.leader_epk);
                if self.reserved_epk == Some(tx.leader_epk) {
                    self.reserved_epk = None;
                }
                self.latest_distribution = Some(tx.clone());
            }
            Record::MeetingLeave(tx) => {
                if self.is_current_leader(&tx.member_ivk) {
                    self.leader_present = false;
                } else {
                    self.mark_departed(&tx.member_ivk);
                }
            }
            Record::LeaderReassign(tx) => self.apply_reassign(tx),
            Record::MeetingDismiss(_) => self.dismissed = true,
        }
    }

    fn apply_reassign(&mut self, tx: &LeaderReassignTx) {
        self.mark_departed(&tx.new_leader_ivk);
        self.leader_ivk = tx.new_leader_ivk;
        self.leader_present = true;
        self.reserved_epk = Some(tx.new_leader_epk);
        self.seen_epks.insert(tx.new_leader_epk);
    }

    fn mark_departed(&mut self, ivk: &VerifyingKey) {
        for r in self.requests.iter_mut().filter(|r| &r.request.ivk == ivk) {
            r.departed = true;
        }
    }
}

/// All meetings on a ledger, replayed in chain order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MeetingBook {
    meetings: BTreeMap<MeetingId, MeetingView>,
}

impl MeetingBook {
    /// Replays every decodable record; assumes the ledger was built through validation.
    pub fn replay(ledger: &Ledger) -> Self {
        let mut book = Self::default();
        for (block, position, tx) in ledger.transactions() {
            if let Ok(record) = Record::decode(tx) {
                book.apply(block, position, &record);
            }
        }
        book
    }

    pub fn get(&self, id: &MeetingId) -> Option<&MeetingView> {
        self.meetings.get(id)
    }

    pub fn meetings(&self) -> impl Iterator<Item = &MeetingView> + '_ {
        self.meetings.values()
    }

    pub fn apply(&mut self, block: u64, position: usize, record: &Record) {
        if let Record::PublishMeeting(tx) = record {
            self.meetings
                .entry(tx.meeting_id)
                .or_insert_with(|| MeetingView::new(tx));
            return;
        }
        if let Some(view) = record.meeting_id().and_then(|id| self.meetings.get_mut(&id)) {
            view.apply(block, position, record);
        }
    }

    /// Admission check for one record against this book.
    pub fn check(&self, record: &Record, identity: &Ledger, rule: LeaderRule) -> Result<(), RejectReason> {
        if !record_signature_valid(record) {
            return Err(RejectReason::BadSignature);
        }
        if let Record::PublishMeeting(tx) = record {
            if binding_for_key(identity, &tx.leader_ivk).is_none() {
                return Err(RejectReason::UnknownIdentity);
            }
            if self.meetings.contains_key(&tx.meeting_id) {
                return Err(RejectReason::DuplicateMeeting);
            }
            return Ok(());
        }
        let id = record.meeting_id().ok_or(RejectReason::WrongLedger)?;
        let view = self.meetings.get(&id).ok_or(RejectReason::MeetingNotFound)?;
        match record {
            Record::LeaderReassign(tx) => check_reassign(view, tx, identity, rule),
            other => view.check(other),
        }
    }
}

fn record_signature_valid(record: &Record) -> bool {
    match record {
        Record::Identity(r) => r.signature_valid(),
        Record::PublishMeeting(r) => r.signature_valid(),
        Record::MeetingRequest(r) => r.signature_valid(),
        Record::KeyDistribution(r) => r.signature_valid(),
        Record::MeetingLeave(r) => r.signature_valid(),
        Record::LeaderReassign(r) => r.signature_valid(),
        Record::MeetingDismiss(r) => r.signature_valid(),
    }
}

/// Admission rule for the meeting ledger.
#[derive(Clone, Copy)]
pub struct MeetingValidator<'a> {
    pub identity: &'a Ledger,
    pub rule: LeaderRule,
}

impl<'a> MeetingValidator<'a> {
    pub fn new(identity: &'a Ledger, rule: LeaderRule) -> Self {
        Self { identity, rule }
    }
}

impl TxValidator for MeetingValidator<'_> {
    fn validate(&self, ledger: &Ledger, pending: &[Transaction], tx: &Transaction) -> Result<(), RejectReason> {
        let record = Record::decode(tx)?;
        let mut book = MeetingBook::replay(ledger);
        let next = ledger.head().index() + 1;
        for (position, earlier) in pending.iter().enumerate() {
            if let Ok(r) = Record::decode(earlier) {
                book.apply(next, position, &r);
            }
        }
        book.check(&record, self.identity, self.rule)
    }
}
