use std::fmt;

/// Result of one ledger submission.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TxOutcome {
    Accepted {
        block: u64,
    },
    Rejected {
        reason: &'static str,
    },
    /// Refused locally before reaching the ledger.
    Refused {
        reason: &'static str,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EventKind {
    Register {
        actor: String,
        user: String,
        device: String,
        ivk: String,
        adversarial: bool,
    },
    Tx {
        actor: String,
        tag: &'static str,
        meeting: String,
        honest: bool,
        outcome: TxOutcome,
    },
    Verify {
        leader: String,
        meeting: String,
        requester: String,
        /// The `user:device` the request names.
        claim: String,
        /// `Ok(authorized)` or the rejection code.
        result: Result<bool, &'static str>,
    },
    Epoch {
        meeting: String,
        epoch: u32,
        leader: String,
        recipients: Vec<String>,
        key_fp: String,
    },
    KeyAccept {
        actor: String,
        meeting: String,
        epoch: u32,
        spliced: bool,
        result: Result<String, &'static str>,
    },
    Packet {
        sender: String,
        meeting: String,
        stream: u32,
        epoch: u32,
        counter: u64,
        key_fp: String,
        nonce: String,
    },
    Decrypt {
        actor: String,
        meeting: String,
        stream: u32,
        epoch: u32,
        counter: u64,
        /// Epoch of the key the receiver held, if any.
        held: Option<u32>,
        retained: bool,
        tampered: bool,
        result: Result<(), &'static str>,
    },
    Validate {
        actor: String,
        meeting: String,
        tag: &'static str,
        result: Result<(), &'static str>,
    },
    Purge {
        actor: String,
        meeting: String,
    },
    Attack {
        adversary: String,
        kind: String,
        succeeded: bool,
        detail: String,
    },
    Fault {
        actor: String,
        kind: String,
        detail: String,
    },
    Goal {
        name: &'static str,
        passed: bool,
        first: Option<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub tick: u64,
    pub kind: EventKind,
}

fn result_str<T>(r: &Result<T, &'static str>) -> String {
    match r {
        Ok(_) => "ok".to_owned(),
        Err(code) => format!("fail reason={code}"),
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t={} ", self.tick)?;
        match &self.kind {
            EventKind::Register {
                actor,
                user,
                device,
                ivk,
                adversarial,
            } => write!(
                f,
                "register actor={actor} user={user} device={device} ivk={ivk}{}",
                if *adversarial { " adversary" } else { "" }
            ),
            EventKind::Tx {
                actor,
                tag,
                meeting,
                honest,
                outcome,
            } => {
                write!(f, "tx actor={actor} tag={tag} m={meeting} ")?;
                match outcome {
                    TxOutcome::Accepted { block } => write!(f, "result=accepted block={block}")?,
                    TxOutcome::Rejected { reason } => write!(f, "result=rejected reason={reason}")?,
                    TxOutcome::Refused { reason } => write!(f, "result=refused reason={reason}")?,
                }
                if !honest {
                    f.write_str(" adversary")?;
                }
                Ok(())
            }
            EventKind::Verify {
                leader,
                meeting,
                requester,
                claim,
                result,
            } => {
                write!(f, "verify leader={leader} m={meeting} requester={requester} claim={claim} ")?;
                match result {
                    Ok(auth) => write!(f, "result=accept authorized={auth}"),
                    Err(code) => write!(f, "result=reject reason={code}"),
                }
            }
            EventKind::Epoch {
                meeting,
                epoch,
                leader,
                recipients,
                key_fp,
            } => write!(
                f,
                "epoch m={meeting} epoch={epoch} leader={leader} recipients={} mk_fp={key_fp}",
                if recipients.is_empty() { "-".to_owned() } else { recipients.join(",") }
            ),
            EventKind::KeyAccept {
                actor,
                meeting,
                epoch,
                spliced,
                result,
            } => {
                write!(f, "key actor={actor} m={meeting} epoch={epoch}")?;
                if *spliced {
                    f.write_str(" spliced")?;
                }
                match result {
                    Ok(fp) => write!(f, " result=ok mk_fp={fp}"),
                    Err(code) => write!(f, " result=fail reason={code}"),
                }
            }
            EventKind::Packet {
                sender,
                meeting,
                stream,
                epoch,
                counter,
                key_fp,
                nonce,
            } => write!(
                f,
                "packet sender={sender} m={meeting} stream={stream} epoch={epoch} ctr={counter} sk_fp={key_fp} nonce={nonce}"
            ),
            EventKind::Decrypt {
                actor,
                meeting,
                stream,
                epoch,
                counter,
                held,
                retained,
                tampered,
                result,
            } => write!(
                f,
                "decrypt actor={actor}{} m={meeting} stream={stream} epoch={epoch} ctr={counter} held={}{} result={}",
                if *retained { " retained" } else { "" },
                held.map_or_else(|| "-".to_owned(), |e| e.to_string()),
                if *tampered { " tampered" } else { "" },
                result_str(result)
            ),
            EventKind::Validate {
                actor,
                meeting,
                tag,
                result,
            } => write!(
                f,
                "validate actor={actor} m={meeting} tag={tag} result={}",
                match result {
                    Ok(()) => "accept".to_owned(),
                    Err(code) => format!("reject reason={code}"),
                }
            ),
            EventKind::Purge { actor, meeting } => write!(f, "purge actor={actor} m={meeting}"),
            EventKind::Attack {
                adversary,
                kind,
                succeeded,
                detail,
            } => write!(
                f,
                "attack kind={kind} adversary={adversary} {detail} attack={}",
                if *succeeded { "succeeded" } else { "failed" }
            ),
            EventKind::Fault { actor, kind, detail } => write!(f, "fault kind={kind} actor={actor} {detail}"),
            EventKind::Goal { name, passed, first } => {
                write!(f, "goal {name}={}", if *passed { "pass" } else { "fail" })?;
                if let Some(first) = first {
                    write!(f, " first=[{first}]")?;
                }
                Ok(())
            }
        }
    }
}

/// Everything observed during one run, in order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    pub events: Vec<Event>,
}

impl Transcript {
    pub fn push(&mut self, tick: u64, kind: EventKind) {
        self.events.push(Event { tick, kind });
    }

    pub fn lines(&self) -> impl Iterator<Item = String> + '_ {
        self.events.iter().map(Event::to_string)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for line in self.lines() {
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}
