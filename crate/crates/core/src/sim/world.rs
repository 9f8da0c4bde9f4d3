use std::collections::{BTreeMap, BTreeSet};

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::crypto::{IdentityKeyPair, SymmetricKey, VerifyingKey};
use crate::identity::{commit_userinfo, register_identity, Credential, IdentityValidator, UserInfo};
use crate::ledger::{Ledger, LedgerError, LedgerKind, Transaction, TxTag, TxValidator};
use crate::meeting::{accept_key, LeaderRule};
use crate::meeting::{
    authorize, decrypt_media, derive_stream_key, dismiss_meeting, encrypt_media, make_leave, make_request,
    publish_meeting, reassign_leader, rekey, verify_request, AuthorizationPolicy, KeyDistributionTx, MediaPacket,
    MeetingBook, MeetingError, MeetingId, MeetingKey, MeetingValidator, Opening, Openings, ParticipantState,
    PolicyRegistry, Role, SignedTx, StreamId, Succession,
};

use super::adversary::{AdversaryCtx, AdversaryRegistry};
use super::goals::check_goals;
use super::scenario::{Action, ActorSpec, InfoSpec, Scenario};
use super::transcript::{EventKind, Transcript, TxOutcome};
use super::SimError;

/// Name-keyed factories the run draws policies and adversaries from.
pub struct Registries {
    pub policies: PolicyRegistry,
    pub adversaries: AdversaryRegistry,
}

impl Registries {
    pub fn builtin() -> Self {
        Self {
            policies: PolicyRegistry::builtin(),
            adversaries: AdversaryRegistry::builtin(),
        }
    }
}

impl Default for Registries {
    fn default() -> Self {
        Self::builtin()
    }
}

pub fn run_scenario(scenario: &Scenario) -> Result<Transcript, SimError> {
    run_scenario_with(scenario, &Registries::builtin())
}

pub fn run_scenario_with(scenario: &Scenario, registries: &Registries) -> Result<Transcript, SimError> {
    simulate(scenario, registries).map(|run| run.transcript)
}

/// A finished run: the transcript and both ledgers as they ended.
#[derive(Debug, Clone)]
pub struct Run {
    pub transcript: Transcript,
    pub identity: Ledger,
    pub meeting: Ledger,
}

/// Steps every event, then appends one verdict line per goal.
pub fn simulate(scenario: &Scenario, registries: &Registries) -> Result<Run, SimError> {
    let mut world = World::new(scenario, registries)?;
    for event in &scenario.events {
        world.tick = event.tick;
        world.line = event.line;
        let actor = world.actor_index(&event.actor);
        world.step(actor, &event.action)?;
    }
    let report = check_goals(&world.transcript);
    let tick = world.tick;
    for goal in report.goals {
        world.transcript.push(
            tick,
            EventKind::Goal {
                name: goal.name,
                passed: goal.passed,
                first: goal.first,
            },
        );
    }
    Ok(Run {
        transcript: world.transcript,
        identity: world.identity,
        meeting: world.meeting,
    })
}

pub(crate) struct Actor {
    pub(crate) spec: ActorSpec,
    pub(crate) cred: Credential,
    pub(crate) states: BTreeMap<String, ParticipantState>,
}

pub(crate) struct MeetingRun {
    pub(crate) id: MeetingId,
    pub(crate) packets: Vec<MediaPacket>,
    /// (stream, epoch) -> sending actor. Nonces are `epoch ‖ counter`, so a
    /// stream key must have one sender.
    senders: BTreeMap<(u32, u32), usize>,
}

/// Key material a departed participant kept in spite of the purge.
struct Retained {
    actor: usize,
    meeting: String,
    state: ParticipantState,
}

pub(crate) struct World<'r> {
    rule: LeaderRule,
    pub(crate) rng: ChaCha20Rng,
    pub(crate) identity: Ledger,
    pub(crate) meeting: Ledger,
    pub(crate) actors: Vec<Actor>,
    pub(crate) meetings: BTreeMap<String, MeetingRun>,
    retained: Vec<Retained>,
    /// Receivers whose packet tag check a fault has switched off.
    tag_check_off: BTreeSet<(usize, String)>,
    policy: Box<dyn AuthorizationPolicy>,
    adversaries: &'r AdversaryRegistry,
    pub(crate) transcript: Transcript,
    pub(crate) tick: u64,
    pub(crate) line: usize,
}

pub(crate) fn key_fp(mk: &MeetingKey) -> String {
    hex::encode(SymmetricKey::from_bytes(*mk.bytes()).fingerprint())
}

fn refused(e: MeetingError) -> TxOutcome {
    TxOutcome::Refused { reason: e.code() }
}

impl<'r> World<'r> {
    fn new(scenario: &Scenario, registries: &'r Registries) -> Result<Self, SimError> {
        let mut rng = ChaCha20Rng::seed_from_u64(scenario.seed);
        let mut actors = Vec::with_capacity(scenario.actors.len());
        let mut openings = Openings::new();
        let mut txs = Vec::with_capacity(scenario.actors.len());
        for spec in &scenario.actors {
            let keys = IdentityKeyPair::generate(&mut rng);
            let info = match &spec.info {
                InfoSpec::Plain(text) => {
                    UserInfo::plain(text.clone()).map_err(|e| SimError::malformed(0, &e.to_string()))?
                }
                InfoSpec::Commit(text) => {
                    let mut r = [0u8; 32];
                    rng.fill_bytes(&mut r);
                    let opening = Opening {
                        plaintext: text.as_bytes().to_vec(),
                        r,
                    };
                    let c = commit_userinfo(&opening.plaintext, &opening.r);
                    openings.insert((spec.user.clone(), spec.device.clone()), opening);
                    c
                }
            };
            txs.push(register_identity(spec.user.clone(), spec.device.clone(), &keys, info).to_transaction());
            actors.push(Actor {
                spec: spec.clone(),
                cred: Credential::new(spec.user.clone(), spec.device.clone(), keys),
                states: BTreeMap::new(),
            });
        }
        let policy = registries
            .policies
            .build(&scenario.policy, &scenario.policy_args, &openings)
            .ok_or_else(|| SimError::malformed(0, &format!("unknown policy `{}`", scenario.policy)))?;

        let mut identity = Ledger::new(LedgerKind::Identity);
        identity
            .append_block(txs, 0, &IdentityValidator)
            .map_err(|e| SimError::malformed(0, &format!("registration failed: {e}")))?;
        let mut transcript = Transcript::default();
        for a in &actors {
            transcript.push(
                0,
                EventKind::Register {
                    actor: a.spec.name.clone(),
                    user: a.spec.user.to_string(),
                    device: a.spec.device.to_string(),
                    ivk: a.cred.ivk().short(8),
                    adversarial: a.spec.adversarial,
                },
            );
        }
        Ok(Self {
            rule: scenario.rule,
            rng,
            identity,
            meeting: Ledger::new(LedgerKind::Meeting),
            actors,
            meetings: BTreeMap::new(),
            retained: Vec::new(),
            tag_check_off: BTreeSet::new(),
            policy,
            adversaries: &registries.adversaries,
            transcript,
            tick: 0,
            line: 0,
        })
    }

    fn actor_index(&self, name: &str) -> usize {
        self.actors
            .iter()
            .position(|a| a.spec.name == name)
            .expect("scenario check guarantees declared actors")
    }

    pub(crate) fn name(&self, a: usize) -> String {
        self.actors[a].spec.name.clone()
    }

    pub(crate) fn name_of(&self, ivk: &VerifyingKey) -> String {
        self.actors
            .iter()
            .find(|a| &a.cred.ivk() == ivk)
            .map(|a| a.spec.name.clone())
            .unwrap_or_else(|| ivk.short(8))
    }

    pub(crate) fn meeting_id(&self, label: &str) -> Result<MeetingId, SimError> {
        self.meetings
            .get(label)
            .map(|m| m.id)
            .ok_or_else(|| SimError::script(self.line, format!("meeting `{label}` was never published")))
    }

    fn honest(&self, a: usize) -> bool {
        !self.actors[a].spec.adversarial
    }

    fn step(&mut self, a: usize, action: &Action) -> Result<(), SimError> {
        match action {
            Action::Publish { meeting, info } => self.publish(a, meeting, info),
            Action::Request { meeting } => self.request(a, meeting),
            Action::VerifyAll { meeting } => self.verify_all(a, meeting),
            Action::Distribute { meeting } => self.distribute(a, meeting).map(drop),
            Action::Packet { meeting, stream, count } => self.packets(a, meeting, *stream, *count),
            Action::Leave { meeting } => self.leave(a, meeting),
            Action::Reassign { meeting, new_leader } => self.reassign(a, meeting, new_leader.as_deref()),
            Action::Dismiss { meeting } => self.dismiss(a, meeting),
            Action::Adversary { kind, args } => self.adversary(a, kind, args),
            Action::Fault { kind, args } => self.fault(a, kind, args),
        }
    }

    fn record_tx(&mut self, a: usize, honest: bool, tag: TxTag, meeting: &str, outcome: TxOutcome) -> TxOutcome {
        self.transcript.push(
            self.tick,
            EventKind::Tx {
                actor: self.name(a),
                tag: tag.name(),
                meeting: meeting.to_owned(),
                honest,
                outcome: outcome.clone(),
            },
        );
        outcome
    }

    /// Appends `tx` in a block of its own, stamped with the current tick.
    pub(crate) fn submit(&mut self, a: usize, honest: bool, meeting: &str, tx: Transaction) -> TxOutcome {
        let tag = tx.tag;
        let result = match tag.ledger() {
            LedgerKind::Identity => self.identity.append_block(vec![tx], self.tick, &IdentityValidator),
            LedgerKind::Meeting => {
                let validator = MeetingValidator::new(&self.identity, self.rule);
                self.meeting.append_block(vec![tx], self.tick, &validator)
            }
        }
        .map(|b| b.index());
        let outcome = match result {
            Ok(block) => TxOutcome::Accepted { block },
            Err(LedgerError::InvalidTransaction { reason, .. }) => TxOutcome::Rejected { reason: reason.code() },
            Err(_) => TxOutcome::Rejected {
                reason: "non_monotonic",
            },
        };
        self.record_tx(a, honest, tag, meeting, outcome)
    }

    /// Submits after every honest actor has checked `tx` against its own copy of the ledgers.
    pub(crate) fn submit_checked(&mut self, a: usize, honest: bool, meeting: &str, tx: Transaction) -> TxOutcome {
        let tag = tx.tag;
        let mut verdicts = Vec::new();
        for (v, actor) in self.actors.iter().enumerate() {
            if actor.spec.adversarial {
                continue;
            }
            let identity = self.identity.clone();
            let ledger = self.meeting.clone();
            let result = MeetingValidator::new(&identity, self.rule)
                .validate(&ledger, &[], &tx)
                .map_err(|r| r.code());
            verdicts.push((v, result));
        }
        let outcome = self.submit(a, honest, meeting, tx);
        for (v, result) in verdicts {
            self.transcript.push(
                self.tick,
                EventKind::Validate {
                    actor: self.name(v),
                    meeting: meeting.to_owned(),
                    tag: tag.name(),
                    result,
                },
            );
        }
        outcome
    }

    fn publish(&mut self, a: usize, label: &str, info: &str) -> Result<(), SimError> {
        let honest = self.honest(a);
        match publish_meeting(&self.actors[a].cred, info, &mut self.rng) {
            Err(e) => {
                self.record_tx(a, honest, TxTag::PublishMeeting, label, refused(e));
            }
            Ok((tx, state)) => {
                if let TxOutcome::Accepted { .. } = self.submit(a, honest, label, tx.to_transaction()) {
                    self.meetings.insert(
                        label.to_owned(),
                        MeetingRun {
                            id: tx.meeting_id,
                            packets: Vec::new(),
                            senders: BTreeMap::new(),
                        },
                    );
                    self.actors[a].states.insert(label.to_owned(), state);
                }
            }
        }
        Ok(())
    }

    fn request(&mut self, a: usize, label: &str) -> Result<(), SimError> {
        let id = self.meeting_id(label)?;
        let honest = self.honest(a);
        match make_request(&self.actors[a].cred, &self.meeting, id, &mut self.rng) {
            Err(e) => {
                self.record_tx(a, honest, TxTag::MeetingRequest, label, refused(e));
            }
            Ok((tx, state)) => {
                if let TxOutcome::Accepted { .. } = self.submit(a, honest, label, tx.to_transaction()) {
                    self.actors[a].states.insert(label.to_owned(), state);
                }
            }
        }
        Ok(())
    }

    fn leader_state(&self, a: usize, label: &str) -> Result<&ParticipantState, SimError> {
        self.actors[a]
            .states
            .get(label)
            .filter(|s| s.role() == Role::Leader)
            .ok_or_else(|| SimError::script(self.line, format!("`{}` does not lead `{label}`", self.name(a))))
    }

    fn verify_all(&mut self, a: usize, label: &str) -> Result<(), SimError> {
        let id = self.meeting_id(label)?;
        let state = self.leader_state(a, label)?;
        let book = MeetingBook::replay(&self.meeting);
        let view = book.get(&id).expect("published meetings replay");
        let pending: Vec<_> = view
            .active_requests()
            .map(|r| r.request.clone())
            .filter(|r| !state.has_reviewed(&r.epk) && r.ivk != state.me())
            .collect();
        let leader = self.name(a);
        for req in pending {
            let requester = self.name_of(&req.ivk);
            let state = self.actors[a]
                .states
                .get_mut(label)
                .expect("leader state checked above");
            let result = match verify_request(&req, &self.identity) {
                Err(reason) => {
                    state.reviewed.insert(req.epk);
                    Err(reason.code())
                }
                Ok(()) => authorize(state, &req, &self.identity, &*self.policy).map_err(MeetingError::code),
            };
            self.transcript.push(
                self.tick,
                EventKind::Verify {
                    leader: leader.clone(),
                    meeting: label.to_owned(),
                    requester,
                    claim: format!("{}:{}", req.user, req.device),
                    result,
                },
            );
        }
        Ok(())
    }

    /// Rekeys the meeting from `a`'s leader state; on acceptance every recipient unwraps.
    pub(crate) fn distribute(&mut self, a: usize, label: &str) -> Result<bool, SimError> {
        let honest = self.honest(a);
        let mut state = self.leader_state(a, label)?.clone();
        let (mk, dist) = match rekey(&mut state, &self.actors[a].cred.keys, &self.meeting, &mut self.rng) {
            Ok(v) => v,
            Err(e) => {
                self.record_tx(a, honest, TxTag::KeyDistribution, label, refused(e));
                return Ok(false);
            }
        };
        let TxOutcome::Accepted { .. } = self.submit(a, honest, label, dist.tx.to_transaction()) else {
            return Ok(false);
        };
        self.actors[a].states.insert(label.to_owned(), state);
        let recipients = dist.tx.recipients().map(|ivk| self.name_of(&ivk)).collect();
        self.transcript.push(
            self.tick,
            EventKind::Epoch {
                meeting: label.to_owned(),
                epoch: mk.epoch(),
                leader: self.name(a),
                recipients,
                key_fp: key_fp(&mk),
            },
        );
        self.hand_out(label, &dist.tx, false, true);
        Ok(true)
    }

    /// Runs `accept_key` at every holder of a state for `label` that has an entry.
    ///
    /// With `commit` false the unwrap happens on a copy and the holder's state is untouched.
    pub(crate) fn hand_out(
        &mut self,
        label: &str,
        tx: &KeyDistributionTx,
        spliced: bool,
        commit: bool,
    ) -> Vec<Result<(), &'static str>> {
        let mut results = Vec::new();
        for b in 0..self.actors.len() {
            let Some(state) = self.actors[b].states.get(label) else {
                continue;
            };
            if state.role() == Role::Leader
                || tx.entry_for(&state.me()).is_none()
                || (spliced && self.actors[b].spec.adversarial)
            {
                continue;
            }
            let mut copy = state.clone();
            let result = accept_key(&mut copy, tx).map_err(MeetingError::code);
            self.transcript.push(
                self.tick,
                EventKind::KeyAccept {
                    actor: self.name(b),
                    meeting: label.to_owned(),
                    epoch: tx.epoch,
                    spliced,
                    result: result.as_ref().map(key_fp).map_err(|e| *e),
                },
            );
            if commit && result.is_ok() {
                self.actors[b].states.insert(label.to_owned(), copy);
            }
            results.push(result.map(drop));
        }
        results
    }

    fn packets(&mut self, a: usize, label: &str, stream: u32, count: u32) -> Result<(), SimError> {
        let stream_id = StreamId::from_u32(stream);
        for _ in 0..count {
            let line = self.line;
            let name = self.name(a);
            let state = self.actors[a]
                .states
                .get_mut(label)
                .filter(|s| s.known_mk().is_some())
                .ok_or_else(|| SimError::script(line, format!("`{name}` holds no key for `{label}`")))?;
            let epoch = state.known_mk().expect("checked above").epoch();
            let run = self.meetings.get_mut(label).expect("keyed meetings are published");
            let owner = *run.senders.entry((stream, epoch)).or_insert(a);
            if owner != a {
                let msg = format!(
                    "stream {stream} of `{label}` in epoch {epoch} belongs to `{}`",
                    self.actors[owner].spec.name
                );
                return Err(SimError::script(line, msg));
            }
            let state = self.actors[a].states.get_mut(label).expect("checked above");
            let payload = format!(
                "{name}/{stream}/{}",
                state.stream_counters.get(&stream_id).unwrap_or(&0)
            );
            let packet = encrypt_media(state, stream_id, payload.as_bytes())
                .map_err(|e| SimError::script(line, e.to_string()))?;
            let mk = state.known_mk().expect("checked above");
            let sk_fp = hex::encode(derive_stream_key(mk, stream_id).fingerprint());
            self.transcript.push(
                self.tick,
                EventKind::Packet {
                    sender: name,
                    meeting: label.to_owned(),
                    stream,
                    epoch: packet.epoch,
                    counter: packet.counter,
                    key_fp: sk_fp,
                    nonce: hex::encode(packet.sealed.nonce),
                },
            );
            self.meetings
                .get_mut(label)
                .expect("published")
                .packets
                .push(packet.clone());
            self.deliver(label, Some(a), &packet, false);
        }
        Ok(())
    }

    /// Hands `packet` to every keyed holder except `sender`, then to every retained copy.
    pub(crate) fn deliver(
        &mut self,
        label: &str,
        sender: Option<usize>,
        packet: &MediaPacket,
        tampered: bool,
    ) -> Vec<Result<(), &'static str>> {
        let mut outcomes = Vec::new();
        let mut results = Vec::new();
        for (b, actor) in self.actors.iter().enumerate() {
            if Some(b) == sender {
                continue;
            }
            let Some(state) = actor.states.get(label).filter(|s| s.known_mk().is_some()) else {
                continue;
            };
            let mut result = decrypt_media(state, packet).map(drop).map_err(MeetingError::code);
            if tampered && self.tag_check_off.contains(&(b, label.to_owned())) {
                result = Ok(());
            }
            outcomes.push((b, state.epoch(), false, result));
        }
        for r in self.retained.iter().filter(|r| r.meeting == label) {
            let result = decrypt_media(&r.state, packet).map(drop).map_err(MeetingError::code);
            outcomes.push((r.actor, r.state.epoch(), true, result));
        }
        for (b, held, retained, result) in outcomes {
            self.transcript.push(
                self.tick,
                EventKind::Decrypt {
                    actor: self.name(b),
                    meeting: label.to_owned(),
                    stream: packet.stream_id.as_u32(),
                    epoch: packet.epoch,
                    counter: packet.counter,
                    held,
                    retained,
                    tampered,
                    result,
                },
            );
            results.push(result);
        }
        results
    }

    /// Drops `a`'s state for `label`, keeping a copy of any key it held.
    fn depart(&mut self, a: usize, label: &str) {
        if let Some(state) = self.actors[a].states.remove(label) {
            if state.known_mk().is_some() {
                self.retained.push(Retained {
                    actor: a,
                    meeting: label.to_owned(),
                    state,
                });
            }
            self.transcript.push(
                self.tick,
                EventKind::Purge {
                    actor: self.name(a),
                    meeting: label.to_owned(),
                },
            );
        }
    }

    fn leave(&mut self, a: usize, label: &str) -> Result<(), SimError> {
        let honest = self.honest(a);
        let Some(state) = self.actors[a].states.get(label) else {
            self.record_tx(a, honest, TxTag::MeetingLeave, label, refused(MeetingError::NotAMember));
            return Ok(());
        };
        let mut copy = state.clone();
        match make_leave(&mut copy, &self.actors[a].cred) {
            Err(e) => {
                self.record_tx(a, honest, TxTag::MeetingLeave, label, refused(e));
            }
            Ok(tx) => {
                if let TxOutcome::Accepted { .. } = self.submit(a, honest, label, tx.to_transaction()) {
                    self.depart(a, label);
                }
            }
        }
        Ok(())
    }

    fn reassign(&mut self, a: usize, label: &str, new_leader: Option<&str>) -> Result<(), SimError> {
        let id = self.meeting_id(label)?;
        let honest = self.honest(a);
        let (prev_ivk, new, designator) = match self.rule {
            LeaderRule::Designation => {
                let new = new_leader.expect("scenario check requires a successor");
                (self.actors[a].cred.ivk(), self.actor_index(new), Some(a))
            }
            LeaderRule::TimeOrder => {
                let book = MeetingBook::replay(&self.meeting);
                let view = book.get(&id).expect("published meetings replay");
                (view.leader_ivk, new_leader.map_or(a, |n| self.actor_index(n)), None)
            }
        };
        let Some(new_state) = self.actors[new].states.get(label) else {
            self.record_tx(
                a,
                honest,
                TxTag::LeaderReassign,
                label,
                refused(MeetingError::NewLeaderNotMember),
            );
            return Ok(());
        };
        let succession = match designator {
            Some(d) => Succession::Designation {
                prev: &self.actors[d].cred.keys,
            },
            None => Succession::TimeOrder,
        };
        let built = reassign_leader(
            &self.meeting,
            id,
            prev_ivk,
            &self.actors[new].cred,
            new_state,
            succession,
            &mut self.rng,
        );
        let (tx, promoted) = match built {
            Ok(v) => v,
            Err(e) => {
                self.record_tx(a, honest, TxTag::LeaderReassign, label, refused(e));
                return Ok(());
            }
        };
        let TxOutcome::Accepted { .. } = self.submit_checked(a, honest, label, tx.to_transaction()) else {
            return Ok(());
        };
        self.actors[new].states.insert(label.to_owned(), promoted);
        if let Some(prev) = self.actors.iter().position(|x| x.cred.ivk() == prev_ivk) {
            self.depart(prev, label);
        }
        self.distribute(new, label)?;
        Ok(())
    }

    fn dismiss(&mut self, a: usize, label: &str) -> Result<(), SimError> {
        let honest = self.honest(a);
        let Some(state) = self.actors[a].states.get(label) else {
            self.record_tx(
                a,
                honest,
                TxTag::MeetingDismiss,
                label,
                refused(MeetingError::NotCurrentLeader),
            );
            return Ok(());
        };
        match dismiss_meeting(state, &self.actors[a].cred) {
            Err(e) => {
                self.record_tx(a, honest, TxTag::MeetingDismiss, label, refused(e));
            }
            Ok(tx) => {
                if let TxOutcome::Accepted { .. } = self.submit(a, honest, label, tx.to_transaction()) {
                    for b in 0..self.actors.len() {
                        if let Some(mut state) = self.actors[b].states.remove(label) {
                            crate::meeting::purge_keys(&mut state);
                            self.transcript.push(
                                self.tick,
                                EventKind::Purge {
                                    actor: self.name(b),
                                    meeting: label.to_owned(),
                                },
                            );
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn adversary(&mut self, a: usize, kind: &str, args: &[String]) -> Result<(), SimError> {
        let registry = self.adversaries;
        let line = self.line;
        let adversary = registry
            .get(kind)
            .ok_or_else(|| SimError::malformed(line, &format!("unknown adversary `{kind}`")))?;
        let outcome = {
            let mut ctx = AdversaryCtx::new(self, a);
            adversary.execute(&mut ctx, args)
        }
        .map_err(|message| SimError::malformed(line, &format!("adversary.{kind}: {message}")))?;
        self.transcript.push(
            self.tick,
            EventKind::Attack {
                adversary: self.name(a),
                kind: kind.to_owned(),
                succeeded: outcome.succeeded,
                detail: outcome.detail,
            },
        );
        Ok(())
    }

    fn fault(&mut self, a: usize, kind: &str, args: &[String]) -> Result<(), SimError> {
        let line = self.line;
        let label = args
            .first()
            .ok_or_else(|| SimError::malformed(line, &format!("fault.{kind} needs a meeting label")))?
            .clone();
        let id = self.meeting_id(&label)?;
        let detail = match kind {
            "leak_key" => {
                let mk = self
                    .actors
                    .iter()
                    .filter_map(|x| x.states.get(&label))
                    .find(|s| s.role() == Role::Leader)
                    .and_then(|s| s.known_mk().cloned())
                    .ok_or_else(|| SimError::script(line, format!("no leader key to leak in `{label}`")))?;
                let detail = format!("m={label} epoch={}", mk.epoch());
                let mut state = ParticipantState::outsider(id, self.actors[a].cred.ivk());
                state.install_key(mk);
                self.actors[a].states.insert(label.clone(), state);
                detail
            }
            "skip_tag_check" => {
                let packet = self.meetings[&label]
                    .packets
                    .last()
                    .cloned()
                    .ok_or_else(|| SimError::script(line, format!("no packet in `{label}` to tamper")))?;
                self.tag_check_off.insert((a, label.clone()));
                let mut bad = packet;
                bad.sealed.ciphertext[0] ^= 0x01;
                self.transcript.push(
                    self.tick,
                    EventKind::Fault {
                        actor: self.name(a),
                        kind: kind.to_owned(),
                        detail: format!("m={label}"),
                    },
                );
                self.deliver(&label, None, &bad, true);
                return Ok(());
            }
            other => return Err(SimError::malformed(line, &format!("unknown fault `{other}`"))),
        };
        self.transcript.push(
            self.tick,
            EventKind::Fault {
                actor: self.name(a),
                kind: kind.to_owned(),
                detail,
            },
        );
        Ok(())
    }
}
