use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::scheme::Side;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    /// Some argument message could not be read or written.
    Access,
    CallbackFalse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HaltReason {
    QueueEmpty,
    ProtocolViolation,
    UnknownMessage,
    StepLimit,
}

impl HaltReason {
    pub fn as_str(self) -> &'static str {
        match self {
            HaltReason::QueueEmpty => "queue_empty",
            HaltReason::ProtocolViolation => "protocol_violation",
            HaltReason::UnknownMessage => "unknown_message",
            HaltReason::StepLimit => "step_limit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    InitialAction {
        process: String,
        action: String,
    },
    Deliver {
        channel: String,
        process: String,
        port: String,
        message: String,
    },
    Call {
        process: String,
        action: String,
        function: String,
        result: bool,
    },
    Send {
        channel: String,
        message: String,
        from: Side,
    },
    Skip {
        process: String,
        action: String,
        reason: SkipReason,
    },
    Halt {
        reason: HaltReason,
        #[serde(default, skip_serializing_if = "String::is_empty")]
        detail: String,
    },
}

fn quoted(v: &str) -> String {
    if v.is_empty() || v.chars().any(|c| c.is_whitespace() || c == '=' || c == '"') {
        format!("{v:?}")
    } else {
        v.to_owned()
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::InitialAction { process, action } => write!(
                f,
                "INITIAL process={} action={}",
                quoted(process),
                quoted(action)
            ),
            Event::Deliver {
                channel,
                process,
                port,
                message,
            } => write!(
                f,
                "DELIVER channel={} process={} port={} message={}",
                quoted(channel),
                quoted(process),
                quoted(port),
                quoted(message)
            ),
            Event::Call {
                process,
                action,
                function,
                result,
            } => write!(
                f,
                "CALL process={} action={} function={} result={result}",
                quoted(process),
                quoted(action),
                quoted(function)
            ),
            Event::Send {
                channel,
                message,
                from,
            } => write!(
                f,
                "SEND channel={} message={} from={from}",
                quoted(channel),
                quoted(message)
            ),
            Event::Skip {
                process,
                action,
                reason,
            } => write!(
                f,
                "SKIP process={} action={} reason={}",
                quoted(process),
                quoted(action),
                match reason {
                    SkipReason::Access => "access",
                    SkipReason::CallbackFalse => "callback_false",
                }
            ),
            Event::Halt { reason, detail } => {
                write!(f, "HALT reason={}", reason.as_str())?;
                if !detail.is_empty() {
                    write!(f, " detail={}", quoted(detail))?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub events: Vec<Event>,
}

impl Trace {
    pub fn push(&mut self, e: Event) {
        self.events.push(e);
    }

    pub fn halt_reason(&self) -> Option<HaltReason> {
        match self.events.last() {
            Some(Event::Halt { reason, .. }) => Some(*reason),
            _ => None,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            let _ = writeln!(out, "{e}");
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Trace> {
        serde_json::from_str(s)
    }

    /// Channel names in the order their messages were delivered.
    pub fn delivery_order(&self) -> Vec<&str> {
        self.events
            .iter()
            .filter_map(|e| match e {
                Event::Deliver { channel, .. } => Some(channel.as_str()),
                _ => None,
            })
            .collect()
    }

    pub fn count_sends(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, Event::Send { .. }))
            .count()
    }

    pub fn count_delivers(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, Event::Deliver { .. }))
            .count()
    }

    /// Call and Send events only, with action ids dropped so that differently
    /// desugared but equivalent processes compare equal.
    pub fn observable(&self) -> Vec<String> {
        self.events
            .iter()
            .filter_map(|e| match e {
                Event::Call {
                    process,
                    function,
                    result,
                    ..
                } => Some(format!("CALL {process} {function} {result}")),
                Event::Send { .. } => Some(e.to_string()),
                _ => None,
            })
            .collect()
    }

    /// Checks the properties every run must satisfy, looking at events alone:
    ///
    /// - each channel starts with the client holding access, a send must come
    ///   from the holder, and flips access;
    /// - a channel is delivered exactly once between consecutive sends and
    ///   never without a preceding send;
    /// - sends only follow a successful call (or another send of that call);
    /// - a run that halts on an empty queue has as many deliveries as sends.
    ///
    /// Returns a description of each violation.
    pub fn check_invariants(&self) -> Vec<String> {
        let mut holder: BTreeMap<&str, Side> = BTreeMap::new();
        // channel -> sent but not yet delivered
        let mut in_flight: BTreeMap<&str, bool> = BTreeMap::new();
        let mut violations = Vec::new();
        let mut prev: Option<&Event> = None;

        for (i, e) in self.events.iter().enumerate() {
            match e {
                Event::Send { channel, from, .. } => {
                    let h = holder.entry(channel).or_insert(Side::Client);
                    if *h != *from {
                        violations.push(format!("event {i}: {from} sent on {channel} without access"));
                    }
                    *h = from.other();
                    let f = in_flight.entry(channel).or_insert(false);
                    if *f {
                        violations.push(format!("event {i}: {channel} sent again before delivery"));
                    }
                    *f = true;
                    let coupled = matches!(
                        prev,
                        Some(Event::Call { result: true, .. }) | Some(Event::Send { .. })
                    );
                    if !coupled {
                        violations.push(format!("event {i}: send on {channel} not preceded by a successful call"));
                    }
                }
                Event::Deliver { channel, .. } => {
                    let f = in_flight.entry(channel).or_insert(false);
                    if !*f {
                        violations.push(format!("event {i}: {channel} delivered without a send"));
                    }
                    *f = false;
                }
                _ => {}
            }
            prev = Some(e);
        }

        if self.halt_reason() == Some(HaltReason::QueueEmpty) {
            let (s, d) = (self.count_sends(), self.count_delivers());
            if s != d {
                violations.push(format!("{s} sends but {d} deliveries"));
            }
        }
        violations
    }
}
