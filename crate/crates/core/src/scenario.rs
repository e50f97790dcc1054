//! Scenario traces: JSON lines, one event per line.
//!
//! ```text
//! {"t": 0, "type": "sleep_mode", "on": true}
//! {"t": 1000, "type": "call_start", "caller": "mom"}
//! {"t": 61000, "type": "call_end"}
//! ```
//!
//! An optional first line `{"type": "meta", "name": ..., "note": ...}` names
//! the scenario. Blank lines are skipped. Each event's `seq` is its line number.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::context::{Context, SignalKind};
use crate::error::{Error, Result};
use crate::model::{ItemKind, Millis};
use crate::tracker::{Answer, FailureReason};

fn yes() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum EventKind {
    /// An incoming call. `answered: false` means it rang out unanswered.
    CallStart {
        caller: String,
        #[serde(default, skip_serializing_if = "is_false")]
        safety: bool,
        #[serde(default = "yes", skip_serializing_if = "is_true")]
        answered: bool,
    },
    CallEnd {},
    CallFailed {
        callee: String,
        reason: FailureReason,
    },
    MessageReceived {
        sender: String,
    },
    BatteryLevel {
        pct: u8,
    },
    Sensor {
        signal_kind: SignalKind,
        signal_value: String,
    },
    UserContext {
        context: Context,
    },
    UserResponse {
        prompt_id: String,
        answer: Answer,
    },
    DeliveryReport {
        tracking_msg_id: String,
        positive: bool,
    },
    /// Either attends an alert by id, or acknowledges a caller's missed items
    /// of one kind, or both.
    NotificationAttended {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alert_id: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        caller: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        item: Option<ItemKind>,
    },
    SleepMode {
        on: bool,
    },
    SafetyModeEnter {},
    SafetyModeExit {},
    /// Asks for a sorted callback list in the log.
    SnapshotRequest {},
    /// Advances the clock without doing anything else.
    Tick {},
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::CallStart { .. } => "call_start",
            EventKind::CallEnd {} => "call_end",
            EventKind::CallFailed { .. } => "call_failed",
            EventKind::MessageReceived { .. } => "message_received",
            EventKind::BatteryLevel { .. } => "battery_level",
            EventKind::Sensor { .. } => "sensor",
            EventKind::UserContext { .. } => "user_context",
            EventKind::UserResponse { .. } => "user_response",
            EventKind::DeliveryReport { .. } => "delivery_report",
            EventKind::NotificationAttended { .. } => "notification_attended",
            EventKind::SleepMode { .. } => "sleep_mode",
            EventKind::SafetyModeEnter {} => "safety_mode_enter",
            EventKind::SafetyModeExit {} => "safety_mode_exit",
            EventKind::SnapshotRequest {} => "snapshot_request",
            EventKind::Tick {} => "tick",
        }
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        let non_empty = |field: &str, v: &str| {
            if v.is_empty() {
                Err(format!("field `{field}` must not be empty"))
            } else {
                Ok(())
            }
        };
        match self {
            EventKind::BatteryLevel { pct } if *pct > 100 => {
                Err(format!("field `pct`: {pct} is outside 0..=100"))
            }
            EventKind::CallStart { caller, .. } => non_empty("caller", caller),
            EventKind::CallFailed { callee, .. } => non_empty("callee", callee),
            EventKind::MessageReceived { sender } => non_empty("sender", sender),
            EventKind::Sensor { signal_value, .. } => non_empty("signal_value", signal_value),
            EventKind::UserResponse { prompt_id, .. } => non_empty("prompt_id", prompt_id),
            EventKind::DeliveryReport { tracking_msg_id, .. } => {
                non_empty("tracking_msg_id", tracking_msg_id)
            }
            EventKind::NotificationAttended {
                alert_id,
                caller,
                item,
            } => {
                if caller.is_some() != item.is_some() {
                    return Err("fields `caller` and `item` must be given together".to_string());
                }
                if alert_id.is_none() && caller.is_none() {
                    return Err("needs `alert_id` or `caller` with `item`".to_string());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub t: Millis,
    pub seq: u64,
    pub kind: EventKind,
}

impl Event {
    pub fn new(t: Millis, seq: u64, kind: EventKind) -> Self {
        Event { t, seq, kind }
    }

    /// The scenario-file form of this event, `t` first.
    pub fn to_line(&self) -> String {
        let mut obj = Map::new();
        obj.insert("t".to_string(), Value::from(self.t));
        if let Value::Object(fields) = serde_json::to_value(&self.kind).expect("event kinds serialize") {
            obj.extend(fields);
        }
        Value::Object(obj).to_string()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioMeta {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub note: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Scenario {
    pub meta: ScenarioMeta,
    pub events: Vec<Event>,
}

impl Scenario {
    /// Builds a scenario from events in order, numbering them 1, 2, ...
    pub fn from_kinds(events: impl IntoIterator<Item = (Millis, EventKind)>) -> Self {
        Scenario {
            meta: ScenarioMeta::default(),
            events: events
                .into_iter()
                .enumerate()
                .map(|(i, (t, kind))| Event::new(t, i as u64 + 1, kind))
                .collect(),
        }
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        let mut prev: Option<&Event> = None;
        for e in &self.events {
            e.kind.validate().map_err(|m| format!("event seq {}: {m}", e.seq))?;
            if let Some(p) = prev {
                if (e.t, e.seq) <= (p.t, p.seq) {
                    return Err(format!(
                        "event seq {} at t={} is out of order (previous seq {} at t={})",
                        e.seq, e.t, p.seq, p.t
                    ));
                }
            }
            prev = Some(e);
        }
        Ok(())
    }

    pub fn write_to(&self, mut sink: impl Write) -> Result<()> {
        if self.meta != ScenarioMeta::default() {
            let mut obj = Map::new();
            obj.insert("type".into(), Value::from("meta"));
            obj.insert("name".into(), Value::from(self.meta.name.clone()));
            obj.insert("note".into(), Value::from(self.meta.note.clone()));
            writeln!(sink, "{}", Value::Object(obj))?;
        }
        for e in &self.events {
            writeln!(sink, "{}", e.to_line())?;
        }
        Ok(())
    }
}

pub fn parse_scenario(source: impl BufRead, source_name: &str) -> Result<Scenario> {
    let mut scenario = Scenario::default();
    let mut prev_t: Option<Millis> = None;
    let mut first = true;
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let err = |m: String| Error::parse(source_name, lineno, m);
        let value: Value = serde_json::from_str(&line).map_err(|e| err(strip(&e)))?;
        let Value::Object(mut obj) = value else {
            return Err(err("expected a JSON object".into()));
        };
        if first && obj.get("type").and_then(Value::as_str) == Some("meta") {
            obj.remove("type");
            scenario.meta = serde_json::from_value(Value::Object(obj)).map_err(|e| err(strip(&e)))?;
            first = false;
            continue;
        }
        first = false;
        let t = match obj.remove("t") {
            None => return Err(err("missing field `t`".into())),
            Some(v) => v
                .as_u64()
                .ok_or_else(|| err(format!("field `t`: expected a non-negative integer, got {v}")))?,
        };
        let kind: EventKind = serde_json::from_value(Value::Object(obj)).map_err(|e| err(strip(&e)))?;
        kind.validate()
            .map_err(|m| Error::validation(source_name, format!("line {lineno}: {m}")))?;
        if let Some(p) = prev_t {
            if t < p {
                return Err(Error::validation(
                    source_name,
                    format!("line {lineno}: t={t} is earlier than the previous event (t={p})"),
                ));
            }
        }
        prev_t = Some(t);
        scenario.events.push(Event::new(t, lineno as u64, kind));
    }
    Ok(scenario)
}

fn strip(e: &serde_json::Error) -> String {
    let s = e.to_string();
    match s.rfind(" at line ") {
        Some(i) => s[..i].to_string(),
        None => s,
    }
}
