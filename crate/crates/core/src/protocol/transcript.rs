//! Ordered record of every classical message in a session.
//!
//! Serialized one message per line, tab-separated:
//!
//! ```text
//! <sender>\t<recipient>\t<kind>\t<payload>
//! ```
//!
//! where the payload is a comma-separated list of integers (empty when the
//! message carries none). Parties are `alice`, `bob`, `charlie`, `relayN`
//! and `all` (public broadcast).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Party {
    Alice,
    Bob,
    Charlie,
    /// Intermediate party `E_i` of a multi-hop chain, `1 <= i < hops`.
    Relay(usize),
    /// Public announcement.
    All,
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::Alice => f.write_str("alice"),
            Party::Bob => f.write_str("bob"),
            Party::Charlie => f.write_str("charlie"),
            Party::Relay(i) => write!(f, "relay{i}"),
            Party::All => f.write_str("all"),
        }
    }
}

impl FromStr for Party {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alice" => Ok(Party::Alice),
            "bob" => Ok(Party::Bob),
            "charlie" => Ok(Party::Charlie),
            "all" => Ok(Party::All),
            other => other
                .strip_prefix("relay")
                .and_then(|n| n.parse().ok())
                .map(Party::Relay)
                .ok_or_else(|| Error::Transcript(format!("unknown party `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MessageKind {
    AckReceived,
    PublishL,
    PublishB,
    PublishK,
    /// Sign class (`0` for `Φ⁺`, `1` for `Φ⁻`) of each pair left by the GHZ
    /// measurement.
    PublishClass,
    CheckPositions,
    CheckValues,
    Abort,
    Proceed,
    CharlieMaskReveal,
    PairLost,
    PairRetransmitted,
}

impl MessageKind {
    pub const ALL: [MessageKind; 12] = [
        MessageKind::AckReceived,
        MessageKind::PublishL,
        MessageKind::PublishB,
        MessageKind::PublishK,
        MessageKind::PublishClass,
        MessageKind::CheckPositions,
        MessageKind::CheckValues,
        MessageKind::Abort,
        MessageKind::Proceed,
        MessageKind::CharlieMaskReveal,
        MessageKind::PairLost,
        MessageKind::PairRetransmitted,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MessageKind::AckReceived => "ack_received",
            MessageKind::PublishL => "publish_l",
            MessageKind::PublishB => "publish_b",
            MessageKind::PublishK => "publish_k",
            MessageKind::PublishClass => "publish_class",
            MessageKind::CheckPositions => "check_positions",
            MessageKind::CheckValues => "check_values",
            MessageKind::Abort => "abort",
            MessageKind::Proceed => "proceed",
            MessageKind::CharlieMaskReveal => "charlie_mask_reveal",
            MessageKind::PairLost => "pair_lost",
            MessageKind::PairRetransmitted => "pair_retransmitted",
        }
    }
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MessageKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MessageKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Transcript(format!("unknown message kind `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalMessage {
    pub sender: Party,
    pub recipient: Party,
    pub kind: MessageKind,
    pub payload: Vec<i64>,
}

impl fmt::Display for ClassicalMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}\t", self.sender, self.recipient, self.kind)?;
        for (i, v) in self.payload.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl FromStr for ClassicalMessage {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.split('\t').collect();
        let [sender, recipient, kind, payload] = fields[..] else {
            return Err(Error::Transcript(format!(
                "expected 4 tab-separated fields in `{line}`"
            )));
        };
        let payload = if payload.is_empty() {
            Vec::new()
        } else {
            payload
                .split(',')
                .map(|v| {
                    v.parse::<i64>()
                        .map_err(|e| Error::Transcript(format!("bad payload value `{v}`: {e}")))
                })
                .collect::<Result<_>>()?
        };
        Ok(ClassicalMessage {
            sender: sender.parse()?,
            recipient: recipient.parse()?,
            kind: kind.parse()?,
            payload,
        })
    }
}

/// Append-only message log.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    messages: Vec<ClassicalMessage>,
}

impl Transcript {
    pub fn push(&mut self, sender: Party, recipient: Party, kind: MessageKind, payload: Vec<i64>) {
        self.messages.push(ClassicalMessage {
            sender,
            recipient,
            kind,
            payload,
        });
    }

    pub fn messages(&self) -> &[ClassicalMessage] {
        &self.messages
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn count(&self, kind: MessageKind) -> usize {
        self.messages.iter().filter(|m| m.kind == kind).count()
    }

    /// Index of the first message of `kind`.
    pub fn first_index(&self, kind: MessageKind) -> Option<usize> {
        self.messages.iter().position(|m| m.kind == kind)
    }

    /// Index of the last message of `kind`.
    pub fn last_index(&self, kind: MessageKind) -> Option<usize> {
        self.messages.iter().rposition(|m| m.kind == kind)
    }

    /// Payload of the most recent `kind` message from `sender`. This is the
    /// only way protocol roles learn what another party announced.
    pub fn published(&self, sender: Party, kind: MessageKind) -> Result<&[i64]> {
        self.messages
            .iter()
            .rev()
            .find(|m| m.sender == sender && m.kind == kind)
            .map(|m| m.payload.as_slice())
            .ok_or_else(|| Error::Transcript(format!("{sender} has not sent {kind}")))
    }

    /// Payload of the most recent `kind` message from `sender` to `recipient`.
    pub fn received(&self, sender: Party, recipient: Party, kind: MessageKind) -> Result<&[i64]> {
        self.messages
            .iter()
            .rev()
            .find(|m| m.sender == sender && m.recipient == recipient && m.kind == kind)
            .map(|m| m.payload.as_slice())
            .ok_or_else(|| Error::Transcript(format!("{sender} has not sent {kind} to {recipient}")))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for m in &self.messages {
            out.push_str(&m.to_string());
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Transcript> {
        let messages = text
            .lines()
            .filter(|l| !l.is_empty())
            .map(str::parse)
            .collect::<Result<_>>()?;
        Ok(Transcript { messages })
    }
}

pub(crate) fn to_payload(values: &[usize]) -> Vec<i64> {
    values.iter().map(|&v| v as i64).collect()
}

pub(crate) fn from_payload(values: &[i64]) -> Result<Vec<usize>> {
    values
        .iter()
        .map(|&v| {
            usize::try_from(v).map_err(|_| Error::Transcript(format!("negative value {v} where a digit was expected")))
        })
        .collect()
}
