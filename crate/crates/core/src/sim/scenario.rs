//! Line-oriented scenario files.
//!
//! ```text
//! # comment
//! seed 7
//! rule designation            # or time-order
//! policy deny-list eve        # any registered policy name plus arguments
//! actor alice alice laptop plain:Alice, engineering
//! actor bob bob phone commit:Bob, work at Company A
//! adversary mallory mallory pc
//! tick 1 alice publish m1 weekly sync
//! tick 2 bob request m1
//! tick 3 alice verify_all m1
//! tick 4 alice distribute m1
//! tick 5 bob packet m1 1 10
//! tick 6 mallory adversary.impersonate m1 bob
//! tick 7 alice dismiss m1
//! ```

use std::collections::BTreeSet;
use std::str::FromStr;

use crate::identity::{DeviceId, UserId};
use crate::meeting::LeaderRule;

use super::SimError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InfoSpec {
    Plain(String),
    /// Committed on-ledger; the opening is handed to leaders off-ledger.
    Commit(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActorSpec {
    pub name: String,
    pub user: UserId,
    pub device: DeviceId,
    pub info: InfoSpec,
    pub adversarial: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Action {
    Publish {
        meeting: String,
        info: String,
    },
    Request {
        meeting: String,
    },
    VerifyAll {
        meeting: String,
    },
    Distribute {
        meeting: String,
    },
    Packet {
        meeting: String,
        stream: u32,
        count: u32,
    },
    Leave {
        meeting: String,
    },
    Reassign {
        meeting: String,
        new_leader: Option<String>,
    },
    Dismiss {
        meeting: String,
    },
    Adversary {
        kind: String,
        args: Vec<String>,
    },
    /// Harness fault injection for checker negative controls.
    Fault {
        kind: String,
        args: Vec<String>,
    },
}

impl Action {
    pub fn name(&self) -> &str {
        match self {
            Action::Publish { .. } => "publish",
            Action::Request { .. } => "request",
            Action::VerifyAll { .. } => "verify_all",
            Action::Distribute { .. } => "distribute",
            Action::Packet { .. } => "packet",
            Action::Leave { .. } => "leave",
            Action::Reassign { .. } => "reassign",
            Action::Dismiss { .. } => "dismiss",
            Action::Adversary { .. } => "adversary",
            Action::Fault { .. } => "fault",
        }
    }

    pub fn meeting(&self) -> Option<&str> {
        match self {
            Action::Publish { meeting, .. }
            | Action::Request { meeting }
            | Action::VerifyAll { meeting }
            | Action::Distribute { meeting }
            | Action::Packet { meeting, .. }
            | Action::Leave { meeting }
            | Action::Reassign { meeting, .. }
            | Action::Dismiss { meeting } => Some(meeting),
            Action::Adversary { .. } | Action::Fault { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScriptEvent {
    pub tick: u64,
    pub actor: String,
    pub action: Action,
    /// 1-based source line, 0 for injected events.
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    pub seed: u64,
    pub rule: LeaderRule,
    pub policy: String,
    pub policy_args: Vec<String>,
    pub actors: Vec<ActorSpec>,
    pub events: Vec<ScriptEvent>,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            seed: 0,
            rule: LeaderRule::Designation,
            policy: "allow-all".to_owned(),
            policy_args: Vec::new(),
            actors: Vec::new(),
            events: Vec::new(),
        }
    }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, SimError> {
        let mut sc = Scenario::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let words: Vec<&str> = content.split_whitespace().collect();
            let err = |m: &str| SimError::malformed(line, m);
            match words[0] {
                "seed" => sc.seed = parse_num(&words, 1, line, "seed")?,
                "rule" => {
                    let name = words.get(1).ok_or_else(|| err("rule needs a name"))?;
                    sc.rule = LeaderRule::from_name(name).ok_or_else(|| err("unknown leader rule"))?;
                }
                "policy" => {
                    sc.policy = words.get(1).ok_or_else(|| err("policy needs a name"))?.to_string();
                    sc.policy_args = words[2..].iter().map(|s| s.to_string()).collect();
                }
                "actor" | "adversary" => sc.actors.push(parse_actor(content, words[0] == "adversary", line)?),
                "tick" => sc.events.push(parse_event(&words, line)?),
                other => return Err(err(&format!("unknown directive `{other}`"))),
            }
        }
        sc.check()?;
        Ok(sc)
    }

    pub fn actor(&self, name: &str) -> Option<&ActorSpec> {
        self.actors.iter().find(|a| a.name == name)
    }

    /// Meeting labels in publish order.
    pub fn meetings(&self) -> Vec<&str> {
        self.events
            .iter()
            .filter_map(|e| match &e.action {
                Action::Publish { meeting, .. } => Some(meeting.as_str()),
                _ => None,
            })
            .collect()
    }

    fn check(&self) -> Result<(), SimError> {
        let mut names = BTreeSet::new();
        let mut bindings = BTreeSet::new();
        for a in &self.actors {
            if !names.insert(a.name.as_str()) {
                return Err(SimError::malformed(0, &format!("actor `{}` declared twice", a.name)));
            }
            if !bindings.insert((a.user.clone(), a.device.clone())) {
                return Err(SimError::malformed(
                    0,
                    &format!("identity of `{}` declared twice", a.name),
                ));
            }
        }
        let mut last_tick = 0;
        let mut published = BTreeSet::new();
        for e in &self.events {
            let err = |m: String| SimError::malformed(e.line, &m);
            if e.tick < last_tick {
                return Err(err(format!("tick {} precedes tick {last_tick}", e.tick)));
            }
            last_tick = e.tick;
            let actor = self
                .actor(&e.actor)
                .ok_or_else(|| err(format!("undeclared actor `{}`", e.actor)))?;
            if matches!(e.action, Action::Adversary { .. }) && !actor.adversarial {
                return Err(err(format!("`{}` is not declared as an adversary", e.actor)));
            }
            match &e.action {
                Action::Publish { meeting, .. } => {
                    if !published.insert(meeting.clone()) {
                        return Err(err(format!("meeting `{meeting}` published twice")));
                    }
                }
                a => {
                    if let Some(m) = a.meeting() {
                        if !published.contains(m) {
                            return Err(err(format!("meeting `{m}` used before publish")));
                        }
                    }
                }
            }
            if let Action::Reassign { new_leader, .. } = &e.action {
                match (self.rule, new_leader) {
                    (LeaderRule::Designation, None) => {
                        return Err(err("designation reassign needs a successor".to_owned()))
                    }
                    (_, Some(n)) if self.actor(n).is_none() => return Err(err(format!("undeclared actor `{n}`"))),
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

fn parse_num<T: FromStr>(words: &[&str], at: usize, line: usize, what: &str) -> Result<T, SimError> {
    words
        .get(at)
        .and_then(|w| w.parse().ok())
        .ok_or_else(|| SimError::malformed(line, &format!("expected a number for {what}")))
}

fn parse_actor(content: &str, adversarial: bool, line: usize) -> Result<ActorSpec, SimError> {
    let mut parts = content.splitn(5, char::is_whitespace).filter(|s| !s.is_empty());
    let _directive = parts.next();
    let (Some(name), Some(user), Some(device)) = (parts.next(), parts.next(), parts.next()) else {
        return Err(SimError::malformed(line, "expected `<name> <user> <device>`"));
    };
    let rest = parts.next().map(str::trim).unwrap_or("");
    let info = if rest.is_empty() {
        InfoSpec::Plain(String::new())
    } else if let Some(text) = rest.strip_prefix("plain:") {
        InfoSpec::Plain(text.to_owned())
    } else if let Some(text) = rest.strip_prefix("commit:") {
        InfoSpec::Commit(text.to_owned())
    } else {
        return Err(SimError::malformed(
            line,
            "userinfo must start with `plain:` or `commit:`",
        ));
    };
    if matches!(&info, InfoSpec::Plain(t) | InfoSpec::Commit(t) if t.len() > crate::identity::MAX_USERINFO_LEN) {
        return Err(SimError::malformed(line, "userinfo too long"));
    }
    Ok(ActorSpec {
        name: name.to_owned(),
        user: UserId::new(user).map_err(|e| SimError::malformed(line, &e.to_string()))?,
        device: DeviceId::new(device).map_err(|e| SimError::malformed(line, &e.to_string()))?,
        info,
        adversarial,
    })
}

fn parse_event(words: &[&str], line: usize) -> Result<ScriptEvent, SimError> {
    let tick = parse_num(words, 1, line, "tick")?;
    let (Some(actor), Some(verb)) = (words.get(2), words.get(3)) else {
        return Err(SimError::malformed(line, "expected `tick <n> <actor> <action> [args]`"));
    };
    let args = &words[4..];
    let meeting = || {
        args.first()
            .map(|s| s.to_string())
            .ok_or_else(|| SimError::malformed(line, &format!("`{verb}` needs a meeting label")))
    };
    let exact = |n: usize| {
        if args.len() > n {
            Err(SimError::malformed(line, &format!("too many arguments to `{verb}`")))
        } else {
            Ok(())
        }
    };
    let action = match *verb {
        "publish" => Action::Publish {
            meeting: meeting()?,
            info: args.get(1..).map(|r| r.join(" ")).unwrap_or_default(),
        },
        "request" => {
            exact(1)?;
            Action::Request { meeting: meeting()? }
        }
        "verify_all" => {
            exact(1)?;
            Action::VerifyAll { meeting: meeting()? }
        }
        "distribute" | "rekey" => {
            exact(1)?;
            Action::Distribute { meeting: meeting()? }
        }
        "packet" => {
            exact(3)?;
            Action::Packet {
                meeting: meeting()?,
                stream: parse_num(words, 5, line, "stream")?,
                count: if args.len() > 2 {
                    parse_num(words, 6, line, "count")?
                } else {
                    1
                },
            }
        }
        "leave" => {
            exact(1)?;
            Action::Leave { meeting: meeting()? }
        }
        "reassign" => {
            exact(2)?;
            Action::Reassign {
                meeting: meeting()?,
                new_leader: args.get(1).map(|s| s.to_string()),
            }
        }
        "dismiss" => {
            exact(1)?;
            Action::Dismiss { meeting: meeting()? }
        }
        v => {
            let owned = || args.iter().map(|s| s.to_string()).collect();
            if let Some(kind) = v.strip_prefix("adversary.") {
                Action::Adversary {
                    kind: kind.to_owned(),
                    args: owned(),
                }
            } else if let Some(kind) = v.strip_prefix("fault.") {
                Action::Fault {
                    kind: kind.to_owned(),
                    args: owned(),
                }
            } else {
                return Err(SimError::malformed(line, &format!("unknown action `{v}`")));
            }
        }
    };
    Ok(ScriptEvent {
        tick,
        actor: actor.to_string(),
        action,
        line,
    })
}
