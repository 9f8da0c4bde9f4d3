//! Adversaries, registered by name.
//!
//! An adversary sees what the network sees: both ledgers, captured packets,
//! and its own registered credential. It never touches an honest actor's
//! secrets; [`AdversaryCtx`] only lets it submit transactions and hand
//! forged material to honest actors, who process it as they would anything else.

use std::collections::BTreeMap;

use rand_chacha::ChaCha20Rng;

use crate::crypto::{aead_decrypt, derive_enc_key, dh, hash, EphemeralKeyPair, IdentityKeyPair, Signature};
use crate::identity::{lookup_identity, Credential, DeviceId, UserId};
use crate::ledger::{Ledger, LedgerKind, Transaction, TxTag};
use crate::meeting::{
    decrypt_media, get_meeting_requests, key_context, verify_request, wrap_aad, KeyDistributionTx, LeaderReassignTx,
    MediaPacket, MeetingBook, MeetingId, MeetingKey, MeetingRequestTx, MeetingView, ParticipantState, SignedTx,
};

use super::scenario::{Action, ActorSpec, InfoSpec, Scenario, ScriptEvent};
use super::transcript::TxOutcome;
use super::world::World;
use super::SimError;

/// What the adversary achieved.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttackOutcome {
    pub succeeded: bool,
    /// `key=value` pairs for the transcript.
    pub detail: String,
}

pub trait Adversary {
    fn name(&self) -> &'static str;
    fn execute(&self, ctx: &mut AdversaryCtx<'_, '_>, args: &[String]) -> Result<AttackOutcome, String>;
}

pub struct AdversaryRegistry {
    entries: BTreeMap<&'static str, Box<dyn Adversary>>,
}

impl AdversaryRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut reg = Self::empty();
        reg.register(Box::new(Impersonate));
        reg.register(Box::new(TamperLedger));
        reg.register(Box::new(MixKeys));
        reg.register(Box::new(ReplayRequest));
        reg.register(Box::new(Eavesdrop));
        reg.register(Box::new(TamperPackets));
        reg.register(Box::new(UsurpLeader));
        reg
    }

    pub fn register(&mut self, adversary: Box<dyn Adversary>) {
        self.entries.insert(adversary.name(), adversary);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Adversary> {
        self.entries.get(name).map(|b| &**b)
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }
}

impl Default for AdversaryRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

/// The adversary's window onto a running world.
pub struct AdversaryCtx<'w, 'r> {
    world: &'w mut World<'r>,
    me: usize,
}

impl<'w, 'r> AdversaryCtx<'w, 'r> {
    pub(crate) fn new(world: &'w mut World<'r>, me: usize) -> Self {
        Self { world, me }
    }

    pub fn credential(&self) -> &Credential {
        &self.world.actors[self.me].cred
    }

    pub fn identity_ledger(&self) -> &Ledger {
        &self.world.identity
    }

    pub fn meeting_ledger(&self) -> &Ledger {
        &self.world.meeting
    }

    pub fn rng(&mut self) -> &mut ChaCha20Rng {
        &mut self.world.rng
    }

    pub fn meeting_id(&self, label: &str) -> Result<MeetingId, String> {
        self.world
            .meetings
            .get(label)
            .map(|m| m.id)
            .ok_or_else(|| format!("meeting `{label}` was never published"))
    }

    pub fn meeting_view(&self, label: &str) -> Result<MeetingView, String> {
        let id = self.meeting_id(label)?;
        MeetingBook::replay(&self.world.meeting)
            .get(&id)
            .cloned()
            .ok_or_else(|| format!("meeting `{label}` is not on the ledger"))
    }

    /// The public `(user, device)` of a declared actor.
    pub fn binding(&self, actor: &str) -> Result<(UserId, DeviceId), String> {
        self.world
            .actors
            .iter()
            .find(|a| a.spec.name == actor)
            .map(|a| (a.spec.user.clone(), a.spec.device.clone()))
            .ok_or_else(|| format!("no actor named `{actor}`"))
    }

    /// Media packets observed on the wire for `label`.
    pub fn packets(&self, label: &str) -> Vec<MediaPacket> {
        self.world
            .meetings
            .get(label)
            .map(|m| m.packets.clone())
            .unwrap_or_default()
    }

    /// Submits to the ledger; meeting transactions are also checked by every honest actor.
    pub fn submit(&mut self, label: &str, tx: Transaction) -> TxOutcome {
        match tx.tag.ledger() {
            LedgerKind::Meeting => self.world.submit_checked(self.me, false, label, tx),
            LedgerKind::Identity => self.world.submit(self.me, false, label, tx),
        }
    }

    /// Injects a packet; every keyed receiver tries it.
    pub fn deliver_packet(&mut self, label: &str, packet: &MediaPacket) -> Vec<Result<(), &'static str>> {
        self.world.deliver(label, None, packet, true)
    }

    /// Hands a forged distribution to every honest member named in it.
    pub fn deliver_distribution(&mut self, label: &str, tx: &KeyDistributionTx) -> Vec<Result<(), &'static str>> {
        self.world.hand_out(label, tx, true, false)
    }
}

fn arg<'a>(args: &'a [String], i: usize, what: &str) -> Result<&'a str, String> {
    args.get(i).map(String::as_str).ok_or_else(|| format!("missing {what}"))
}

fn num<T: std::str::FromStr>(args: &[String], i: usize, what: &str) -> Result<T, String> {
    arg(args, i, what)?
        .parse()
        .map_err(|_| format!("{what} must be a number"))
}

fn count_where<T>(results: &[Result<(), T>], ok: bool) -> usize {
    results.iter().filter(|r| r.is_ok() == ok).count()
}

/// `impersonate <meeting> <victim>`: requests naming the victim's identity.
///
/// Three variants: the victim's binding with the adversary's own key, the
/// victim's key with a signature the adversary cannot produce, and a device
/// the victim never registered under a throwaway key.
pub struct Impersonate;

impl Adversary for Impersonate {
    fn name(&self) -> &'static str {
        "impersonate"
    }

    fn execute(&self, ctx: &mut AdversaryCtx<'_, '_>, args: &[String]) -> Result<AttackOutcome, String> {
        let label = arg(args, 0, "meeting")?.to_owned();
        let (user, device) = ctx.binding(arg(args, 1, "victim")?)?;
        let id = ctx.meeting_id(&label)?;
        let victim_ivk = lookup_identity(ctx.identity_ledger(), &user, &device)
            .map(|r| r.ivk)
            .ok_or("victim is not registered")?;
        let own = ctx.credential().keys.clone();
        let throwaway = IdentityKeyPair::generate(ctx.rng());
        let unregistered = DeviceId::new(format!("{}-x", device.as_str())).map_err(|e| e.to_string())?;
        let variants = [
            (device.clone(), own.ivk(), &own),
            (device, victim_ivk, &own),
            (unregistered, throwaway.ivk(), &throwaway),
        ];
        let mut passed = 0;
        let mut on_ledger = 0;
        for (device, ivk, signer) in variants {
            let mut req = MeetingRequestTx {
                meeting_id: id,
                user: user.clone(),
                device,
                ivk,
                epk: EphemeralKeyPair::generate(ctx.rng()).epk(),
                signature: Signature([0; 64]),
            };
            req.signature = signer.sign(&Transaction::signing_input(TxTag::MeetingRequest, &req.body()));
            if let TxOutcome::Accepted { .. } = ctx.submit(&label, req.to_transaction()) {
                on_ledger += 1;
            }
            if verify_request(&req, ctx.identity_ledger()).is_ok() {
                passed += 1;
            }
        }
        Ok(AttackOutcome {
            succeeded: passed > 0,
            detail: format!("m={label} variants=3 on_ledger={on_ledger} verified={passed}"),
        })
    }
}

/// `tamper_ledger <block> <offset> [identity|meeting]`: flips one byte of a
/// committed block in a copy of the ledger image and offers it to a replica.
pub struct TamperLedger;

impl Adversary for TamperLedger {
    fn name(&self) -> &'static str {
        "tamper_ledger"
    }

    fn execute(&self, ctx: &mut AdversaryCtx<'_, '_>, args: &[String]) -> Result<AttackOutcome, String> {
        let block: u64 = num(args, 0, "block")?;
        let offset: usize = num(args, 1, "offset")?;
        let kind = match args.get(2).map(String::as_str) {
            None => LedgerKind::Meeting,
            Some(name) => LedgerKind::from_name(name).ok_or("ledger must be `identity` or `meeting`")?,
        };
        let ledger = match kind {
            LedgerKind::Identity => ctx.identity_ledger(),
            LedgerKind::Meeting => ctx.meeting_ledger(),
        };
        let position = ledger
            .blocks()
            .iter()
            .position(|b| b.index() == block)
            .ok_or_else(|| format!("no block {block} in the {kind} ledger"))?;
        let image = ledger.persist();
        let mut lines: Vec<String> = image.lines().map(str::to_owned).collect();
        let row = &mut lines[1 + position];
        let (bytes_hex, hash_hex) = row.split_once(' ').expect("persisted rows hold two fields");
        let mut bytes = hex::decode(bytes_hex).expect("persisted rows are hex");
        let at = offset % bytes.len();
        bytes[at] ^= 0x01;
        *row = format!("{} {}", hex::encode(&bytes), hash_hex);
        let forged = lines.join("\n");
        let accepted = Ledger::verify_image(&forged);
        let honest_intact = ledger.verify_chain();
        Ok(AttackOutcome {
            succeeded: accepted || !honest_intact,
            detail: format!("ledger={kind} block={block} offset={at} verify_chain={accepted}"),
        })
    }
}

/// `mix_keys <target> <source>`: splices material from the source meeting's
/// latest distribution into the target's.
///
/// Each splice is posted to the ledger and also handed straight to the
/// target's members, as a bulletin board that skips validation would.
pub struct MixKeys;

impl MixKeys {
    fn splices(target: &KeyDistributionTx, source: &KeyDistributionTx) -> Vec<(&'static str, KeyDistributionTx)> {
        let mut out = Vec::new();
        let mut swapped_epk = target.clone();
        swapped_epk.leader_epk = source.leader_epk;
        out.push(("leader_epk", swapped_epk));
        if !source.entries.is_empty() {
            let relabel = |keep_epk: bool| {
                let mut tx = target.clone();
                if !keep_epk {
                    tx.leader_epk = source.leader_epk;
                    tx.signature = source.signature;
                }
                for (i, entry) in tx.entries.iter_mut().enumerate() {
                    entry.sealed = source.entries[i % source.entries.len()].sealed.clone();
                }
                tx
            };
            out.push(("entries", relabel(true)));
            out.push(("whole", relabel(false)));
        }
        out
    }
}

impl Adversary for MixKeys {
    fn name(&self) -> &'static str {
        "mix_keys"
    }

    fn execute(&self, ctx: &mut AdversaryCtx<'_, '_>, args: &[String]) -> Result<AttackOutcome, String> {
        let target_label = arg(args, 0, "target meeting")?.to_owned();
        let source_label = arg(args, 1, "source meeting")?;
        let latest = |label: &str| -> Result<KeyDistributionTx, String> {
            ctx.meeting_view(label)?
                .latest_distribution
                .ok_or_else(|| format!("meeting `{label}` has no key distribution yet"))
        };
        let target = latest(&target_label)?;
        let source = latest(source_label)?;
        let mut ledger_accepted = 0;
        let mut deliveries = Vec::new();
        let splices = Self::splices(&target, &source);
        for (_, forged) in &splices {
            if let TxOutcome::Accepted { .. } = ctx.submit(&target_label, forged.to_transaction()) {
                ledger_accepted += 1;
            }
            deliveries.extend(ctx.deliver_distribution(&target_label, forged));
        }
        let auth_fail = deliveries.iter().filter(|r| **r == Err("auth_fail")).count();
        let accepted = count_where(&deliveries, true);
        Ok(AttackOutcome {
            succeeded: ledger_accepted > 0 || accepted > 0,
            detail: format!(
                "m={target_label} source={source_label} splices={} deliveries={} auth_fail={auth_fail} accepted={accepted} on_ledger={ledger_accepted}",
                splices.len(),
                deliveries.len()
            ),
        })
    }
}

/// `replay_request <meeting> <index>`: resubmits a request already on the ledger.
pub struct ReplayRequest;

impl Adversary for ReplayRequest {
    fn name(&self) -> &'static str {
        "replay_request"
    }

    fn execute(&self, ctx: &mut AdversaryCtx<'_, '_>, args: &[String]) -> Result<AttackOutcome, String> {
        let label = arg(args, 0, "meeting")?.to_owned();
        let index: usize = num(args, 1, "request index")?;
        let id = ctx.meeting_id(&label)?;
        let requests = get_meeting_requests(ctx.meeting_ledger(), &id);
        let original = requests
            .get(index)
            .ok_or_else(|| format!("meeting `{label}` has only {} requests", requests.len()))?
            .clone();
        let accepted = matches!(
            ctx.submit(&label, original.to_transaction()),
            TxOutcome::Accepted { .. }
        );
        Ok(AttackOutcome {
            succeeded: accepted,
            detail: format!("m={label} index={index}"),
        })
    }
}

/// `eavesdrop <meeting>`: tries to recover a meeting key from public data alone.
pub struct Eavesdrop;

impl Adversary for Eavesdrop {
    fn name(&self) -> &'static str {
        "eavesdrop"
    }

    fn execute(&self, ctx: &mut AdversaryCtx<'_, '_>, args: &[String]) -> Result<AttackOutcome, String> {
        let label = arg(args, 0, "meeting")?.to_owned();
        let id = ctx.meeting_id(&label)?;
        let view = ctx.meeting_view(&label)?;
        let packets = ctx.packets(&label);
        let me = ctx.credential().ivk();

        let mut recovered = 0;
        let mut unwraps = 0;
        let distributions: Vec<KeyDistributionTx> = ctx
            .meeting_ledger()
            .query(|tx| tx.tag == TxTag::KeyDistribution)
            .into_iter()
            .filter_map(|(_, tx)| KeyDistributionTx::from_transaction(tx).ok())
            .filter(|d| d.meeting_id == id)
            .collect();
        for dist in distributions {
            // The adversary's own ephemeral against the leader's, under each recipient's label.
            let mine = EphemeralKeyPair::generate(ctx.rng());
            for entry in &dist.entries {
                unwraps += 1;
                let Ok(ss) = dh(mine.esk(), &dist.leader_epk) else {
                    continue;
                };
                let key = derive_enc_key(&ss, &key_context(&id, dist.epoch, &dist.leader_epk, &mine.epk()));
                if aead_decrypt(&key, &entry.sealed, &wrap_aad(&id, dist.epoch, &entry.recipient)).is_ok() {
                    recovered += 1;
                }
            }
        }

        let mut opened = 0;
        for packet in &packets {
            let guesses = [
                hash(&[&id.0[..], &packet.epoch.to_be_bytes()].concat()).0,
                hash(&packet.sealed.ciphertext).0,
            ];
            for guess in guesses {
                let mut state = ParticipantState::outsider(id, me);
                state.install_key(MeetingKey::new(guess, packet.epoch));
                if decrypt_media(&state, packet).is_ok() {
                    opened += 1;
                }
            }
        }
        Ok(AttackOutcome {
            succeeded: recovered > 0 || opened > 0,
            detail: format!(
                "m={label} epochs={} unwraps={unwraps} recovered={recovered} packets={} opened={opened}",
                view.epochs.len(),
                packets.len()
            ),
        })
    }
}

/// `tamper_packets <meeting> [count]`: alters captured packets on the wire and replays them.
pub struct TamperPackets;

impl TamperPackets {
    /// Wire offsets hit in turn: stream id, epoch, counter, nonce, ciphertext, tag.
    fn offset(wire_len: usize, i: usize) -> usize {
        match i % 6 {
            0 => 3,
            1 => 7,
            2 => 15,
            3 => 20,
            4 => 32,
            _ => wire_len - 1,
        }
    }
}

impl Adversary for TamperPackets {
    fn name(&self) -> &'static str {
        "tamper_packets"
    }

    fn execute(&self, ctx: &mut AdversaryCtx<'_, '_>, args: &[String]) -> Result<AttackOutcome, String> {
        let label = arg(args, 0, "meeting")?.to_owned();
        let count: usize = if args.len() > 1 { num(args, 1, "count")? } else { 6 };
        let captured = ctx.packets(&label);
        if captured.is_empty() {
            return Err(format!("no packets captured in `{label}`"));
        }
        let mut results = Vec::new();
        for i in 0..count {
            let mut wire = captured[captured.len() - 1 - i % captured.len()].to_bytes();
            let at = Self::offset(wire.len(), i);
            wire[at] ^= 0x01;
            let forged = MediaPacket::from_bytes(&wire).map_err(|e| e.to_string())?;
            results.extend(ctx.deliver_packet(&label, &forged));
        }
        let accepted = count_where(&results, true);
        Ok(AttackOutcome {
            succeeded: accepted > 0,
            detail: format!(
                "m={label} forged={count} deliveries={} accepted={accepted}",
                results.len()
            ),
        })
    }
}

/// `usurp_leader <meeting>`: claims leadership without the outgoing leader's consent.
///
/// One claim carries no designation, the other a designation the adversary signed itself.
pub struct UsurpLeader;

impl Adversary for UsurpLeader {
    fn name(&self) -> &'static str {
        "usurp_leader"
    }

    fn execute(&self, ctx: &mut AdversaryCtx<'_, '_>, args: &[String]) -> Result<AttackOutcome, String> {
        let label = arg(args, 0, "meeting")?.to_owned();
        let view = ctx.meeting_view(&label)?;
        let keys = ctx.credential().keys.clone();
        let mut accepted = 0;
        let mut reasons = Vec::new();
        for forge_designation in [false, true] {
            let mut tx = LeaderReassignTx {
                meeting_id: view.meeting_id,
                prev_leader_ivk: view.leader_ivk,
                new_leader_ivk: keys.ivk(),
                new_leader_epk: EphemeralKeyPair::generate(ctx.rng()).epk(),
                prev_leader_sig: None,
                new_leader_sig: Signature([0; 64]),
            };
            if forge_designation {
                tx.prev_leader_sig = Some(keys.sign(&tx.designation_input()));
            }
            tx.new_leader_sig = keys.sign(&Transaction::signing_input(TxTag::LeaderReassign, &tx.body()));
            match ctx.submit(&label, tx.to_transaction()) {
                TxOutcome::Accepted { .. } => accepted += 1,
                TxOutcome::Rejected { reason } | TxOutcome::Refused { reason } => reasons.push(reason),
            }
        }
        Ok(AttackOutcome {
            succeeded: accepted > 0,
            detail: format!("m={label} claims=2 rejected={}", reasons.join(",")),
        })
    }
}

/// A single attack to run against an otherwise honest scenario.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AdversarySpec {
    Impersonate {
        meeting: String,
        victim: String,
    },
    TamperLedger {
        ledger: LedgerKind,
        block: u64,
        offset: usize,
    },
    MixKeys {
        target: String,
        source: String,
    },
    ReplayRequest {
        meeting: String,
        index: usize,
    },
    EavesdropOnly {
        meeting: String,
    },
    TamperPackets {
        meeting: String,
        count: usize,
    },
    UsurpLeader {
        meeting: String,
    },
}

/// Label of the meeting [`AdversarySpec::default_for`] adds as a mixing source.
pub const MIX_SOURCE: &str = "mix-source";

impl AdversarySpec {
    pub const KINDS: [&'static str; 7] = [
        "impersonate",
        "tamper_ledger",
        "mix_keys",
        "replay_request",
        "eavesdrop",
        "tamper_packets",
        "usurp_leader",
    ];

    pub fn kind(&self) -> &'static str {
        match self {
            AdversarySpec::Impersonate { .. } => "impersonate",
            AdversarySpec::TamperLedger { .. } => "tamper_ledger",
            AdversarySpec::MixKeys { .. } => "mix_keys",
            AdversarySpec::ReplayRequest { .. } => "replay_request",
            AdversarySpec::EavesdropOnly { .. } => "eavesdrop",
            AdversarySpec::TamperPackets { .. } => "tamper_packets",
            AdversarySpec::UsurpLeader { .. } => "usurp_leader",
        }
    }

    pub fn args(&self) -> Vec<String> {
        match self {
            AdversarySpec::Impersonate { meeting, victim } => vec![meeting.clone(), victim.clone()],
            AdversarySpec::TamperLedger { ledger, block, offset } => {
                vec![block.to_string(), offset.to_string(), ledger.name().to_owned()]
            }
            AdversarySpec::MixKeys { target, source } => vec![target.clone(), source.clone()],
            AdversarySpec::ReplayRequest { meeting, index } => vec![meeting.clone(), index.to_string()],
            AdversarySpec::EavesdropOnly { meeting } | AdversarySpec::UsurpLeader { meeting } => {
                vec![meeting.clone()]
            }
            AdversarySpec::TamperPackets { meeting, count } => vec![meeting.clone(), count.to_string()],
        }
    }

    /// The meeting whose traffic the attack waits for.
    fn anchor<'a>(&'a self, scenario: &'a Scenario) -> Option<&'a str> {
        match self {
            AdversarySpec::Impersonate { meeting, .. }
            | AdversarySpec::ReplayRequest { meeting, .. }
            | AdversarySpec::EavesdropOnly { meeting }
            | AdversarySpec::TamperPackets { meeting, .. }
            | AdversarySpec::UsurpLeader { meeting } => Some(meeting),
            AdversarySpec::MixKeys { target, .. } => Some(target),
            AdversarySpec::TamperLedger { .. } => scenario.meetings().first().copied(),
        }
    }

    /// A copy of `scenario` with this attack scripted in.
    ///
    /// The attack runs right after the anchor meeting's first packet, or after
    /// its last event if it never carries traffic. An adversary actor is added
    /// if the scenario declares none.
    pub fn inject(&self, scenario: &Scenario) -> Result<Scenario, SimError> {
        let mut sc = scenario.clone();
        let adversary = match sc.actors.iter().find(|a| a.adversarial) {
            Some(a) => a.name.clone(),
            None => {
                let name = "intruder";
                sc.actors.push(ActorSpec {
                    name: name.to_owned(),
                    user: UserId::new(name).expect("valid id"),
                    device: DeviceId::new("dev0").expect("valid id"),
                    info: InfoSpec::Plain(String::new()),
                    adversarial: true,
                });
                name.to_owned()
            }
        };
        let anchor = self.anchor(&sc).map(str::to_owned);
        let touches = |e: &ScriptEvent| anchor.is_some() && e.action.meeting() == anchor.as_deref();
        let at = sc
            .events
            .iter()
            .position(|e| touches(e) && matches!(e.action, Action::Packet { .. }))
            .or_else(|| sc.events.iter().rposition(touches))
            .map_or(sc.events.len(), |i| i + 1);
        let tick = if at == 0 { 1 } else { sc.events[at - 1].tick };
        sc.events.insert(
            at,
            ScriptEvent {
                tick,
                actor: adversary,
                action: Action::Adversary {
                    kind: self.kind().to_owned(),
                    args: self.args(),
                },
                line: 0,
            },
        );
        Ok(sc)
    }

    /// A sensible spec of `kind` against `scenario`'s first meeting.
    ///
    /// For `mix_keys` without a second keyed meeting, the returned scenario
    /// gains one, led by the first meeting's leader and joined by its first requester.
    pub fn default_for(scenario: &Scenario, kind: &str) -> Option<(Scenario, AdversarySpec)> {
        let first = scenario.meetings().first()?.to_string();
        fn events_of<'a>(sc: &'a Scenario, label: &'a str) -> impl Iterator<Item = &'a ScriptEvent> + 'a {
            sc.events.iter().filter(move |e| e.action.meeting() == Some(label))
        }
        let leader = events_of(scenario, &first)
            .find(|e| matches!(e.action, Action::Publish { .. }))
            .map(|e| e.actor.clone())?;
        let requester = events_of(scenario, &first)
            .find(|e| {
                matches!(e.action, Action::Request { .. }) && !scenario.actor(&e.actor).is_some_and(|a| a.adversarial)
            })
            .map(|e| e.actor.clone());
        let spec = match kind {
            "impersonate" => AdversarySpec::Impersonate {
                meeting: first.clone(),
                victim: requester.clone().unwrap_or(leader.clone()),
            },
            "tamper_ledger" => AdversarySpec::TamperLedger {
                ledger: LedgerKind::Meeting,
                block: 1,
                offset: 20,
            },
            "replay_request" => AdversarySpec::ReplayRequest {
                meeting: first.clone(),
                index: 0,
            },
            "eavesdrop" => AdversarySpec::EavesdropOnly { meeting: first.clone() },
            "tamper_packets" => AdversarySpec::TamperPackets {
                meeting: first.clone(),
                count: 6,
            },
            "usurp_leader" => AdversarySpec::UsurpLeader { meeting: first.clone() },
            "mix_keys" => {
                let keyed: Vec<&str> = scenario
                    .meetings()
                    .into_iter()
                    .filter(|m| events_of(scenario, m).any(|e| matches!(e.action, Action::Distribute { .. })))
                    .collect();
                if let Some(source) = keyed.iter().find(|m| **m != first) {
                    AdversarySpec::MixKeys {
                        target: first.clone(),
                        source: source.to_string(),
                    }
                } else {
                    let spec = AdversarySpec::MixKeys {
                        target: first.clone(),
                        source: MIX_SOURCE.to_owned(),
                    };
                    let mut sc = scenario.clone();
                    let joiner = requester.unwrap_or_else(|| leader.clone());
                    let m = MIX_SOURCE.to_owned();
                    let script = [
                        (
                            &leader,
                            Action::Publish {
                                meeting: m.clone(),
                                info: "mixing source".to_owned(),
                            },
                        ),
                        (&joiner, Action::Request { meeting: m.clone() }),
                        (&leader, Action::VerifyAll { meeting: m.clone() }),
                        (&leader, Action::Distribute { meeting: m }),
                    ];
                    let at = sc
                        .events
                        .iter()
                        .position(|e| matches!(e.action, Action::Publish { .. }))
                        .map_or(0, |i| i + 1);
                    let tick = sc.events.get(at.saturating_sub(1)).map_or(1, |e| e.tick);
                    for (i, (actor, action)) in script.into_iter().enumerate() {
                        sc.events.insert(
                            at + i,
                            ScriptEvent {
                                tick,
                                actor: actor.clone(),
                                action,
                                line: 0,
                            },
                        );
                    }
                    return Some((sc, spec));
                }
            }
            _ => return None,
        };
        Some((scenario.clone(), spec))
    }
}
