//! Alert records: the engine's only output.
//!
//! A log is JSON lines, one alert per line, fields in the fixed order
//! `t`, `seq`, `kind`, then the kind's payload in declaration order.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::BatteryActionKind;
use crate::error::{Error, Result};
use crate::model::{ItemKind, Millis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlertKind {
    Ring,
    Beep,
    SuppressNote,
    Prompt,
    TrackingMessage,
    TrackerNotify,
    TrackerExpired,
    RadiationPrecallWarning,
    RadiationIncallWarning,
    BatteryAction,
    ForwardToDevice,
    SortedListSnapshot,
}

impl AlertKind {
    pub const ALL: [AlertKind; 12] = [
        AlertKind::Ring,
        AlertKind::Beep,
        AlertKind::SuppressNote,
        AlertKind::Prompt,
        AlertKind::TrackingMessage,
        AlertKind::TrackerNotify,
        AlertKind::TrackerExpired,
        AlertKind::RadiationPrecallWarning,
        AlertKind::RadiationIncallWarning,
        AlertKind::BatteryAction,
        AlertKind::ForwardToDevice,
        AlertKind::SortedListSnapshot,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AlertKind::Ring => "ring",
            AlertKind::Beep => "beep",
            AlertKind::SuppressNote => "suppress_note",
            AlertKind::Prompt => "prompt",
            AlertKind::TrackingMessage => "tracking_message",
            AlertKind::TrackerNotify => "tracker_notify",
            AlertKind::TrackerExpired => "tracker_expired",
            AlertKind::RadiationPrecallWarning => "radiation_precall_warning",
            AlertKind::RadiationIncallWarning => "radiation_incall_warning",
            AlertKind::BatteryAction => "battery_action",
            AlertKind::ForwardToDevice => "forward_to_device",
            AlertKind::SortedListSnapshot => "sorted_list_snapshot",
        }
    }

    /// Alerts meant for the user's attention; only these are forwarded.
    pub fn is_user_facing(self) -> bool {
        matches!(
            self,
            AlertKind::Ring
                | AlertKind::Beep
                | AlertKind::TrackerNotify
                | AlertKind::RadiationPrecallWarning
                | AlertKind::RadiationIncallWarning
        )
    }
}

impl fmt::Display for AlertKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlertKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        AlertKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown alert kind `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuppressReason {
    /// Below the caller's ordinal in a suppression session.
    Sleep,
    /// Another call is in progress.
    Busy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotReason {
    Request,
    BatteryCritical,
}

/// One row of a sorted callback list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub caller: String,
    pub item: ItemKind,
    pub n: u64,
    pub latest_ms: Millis,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlertBody {
    Ring {
        caller: String,
        answered: bool,
    },
    Beep {
        sender: String,
    },
    SuppressNote {
        caller: String,
        item: ItemKind,
        reason: SuppressReason,
    },
    Prompt {
        prompt_id: String,
        callee: String,
        text: String,
    },
    TrackingMessage {
        prompt_id: String,
        callee: String,
        tracking_msg_id: String,
    },
    TrackerNotify {
        prompt_id: String,
        callee: String,
        tracking_msg_id: String,
    },
    TrackerExpired {
        prompt_id: String,
        callee: String,
        tracking_msg_id: String,
    },
    RadiationPrecallWarning {
        caller: String,
        probability: f64,
        total_calls: u64,
        unsafe_calls: u64,
    },
    RadiationIncallWarning {
        caller: String,
        exposure_ms: Millis,
        crossing: u64,
    },
    BatteryAction {
        action: BatteryActionKind,
        destination: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        caller: Option<String>,
    },
    ForwardToDevice {
        device_id: String,
        alert: Box<Alert>,
    },
    SortedListSnapshot {
        reason: SnapshotReason,
        entries: Vec<SnapshotEntry>,
    },
}

impl AlertBody {
    pub fn kind(&self) -> AlertKind {
        match self {
            AlertBody::Ring { .. } => AlertKind::Ring,
            AlertBody::Beep { .. } => AlertKind::Beep,
            AlertBody::SuppressNote { .. } => AlertKind::SuppressNote,
            AlertBody::Prompt { .. } => AlertKind::Prompt,
            AlertBody::TrackingMessage { .. } => AlertKind::TrackingMessage,
            AlertBody::TrackerNotify { .. } => AlertKind::TrackerNotify,
            AlertBody::TrackerExpired { .. } => AlertKind::TrackerExpired,
            AlertBody::RadiationPrecallWarning { .. } => AlertKind::RadiationPrecallWarning,
            AlertBody::RadiationIncallWarning { .. } => AlertKind::RadiationIncallWarning,
            AlertBody::BatteryAction { .. } => AlertKind::BatteryAction,
            AlertBody::ForwardToDevice { .. } => AlertKind::ForwardToDevice,
            AlertBody::SortedListSnapshot { .. } => AlertKind::SortedListSnapshot,
        }
    }
}

/// A timestamped, sequence-numbered decision. `seq` doubles as the alert id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alert {
    pub t: Millis,
    pub seq: u64,
    #[serde(flatten)]
    pub body: AlertBody,
}

impl Alert {
    pub fn kind(&self) -> AlertKind {
        self.body.kind()
    }
}

/// Where subsystems put their decisions and non-fatal notes.
pub trait AlertSink {
    fn emit(&mut self, body: AlertBody);
    fn note(&mut self, message: String);
}

/// A sink that just collects, for driving subsystems on their own.
#[derive(Debug, Default)]
pub struct Collected {
    pub alerts: Vec<AlertBody>,
    pub notes: Vec<String>,
}

impl AlertSink for Collected {
    fn emit(&mut self, body: AlertBody) {
        self.alerts.push(body);
    }

    fn note(&mut self, message: String) {
        self.notes.push(message);
    }
}

/// Result of a run: alerts in emission order plus diagnostics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AlertLog {
    pub entries: Vec<Alert>,
    pub diagnostics: Vec<String>,
}

impl AlertLog {
    pub fn count(&self, kind: AlertKind) -> usize {
        self.entries.iter().filter(|a| a.kind() == kind).count()
    }

    pub fn of_kind(&self, kind: AlertKind) -> impl Iterator<Item = &Alert> {
        self.entries.iter().filter(move |a| a.kind() == kind)
    }

    pub fn write_to(&self, mut sink: impl Write) -> Result<()> {
        for alert in &self.entries {
            serde_json::to_writer(&mut sink, alert).map_err(std::io::Error::from)?;
            sink.write_all(b"\n")?;
        }
        sink.flush()?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }
}

/// Reads a JSON-lines alert log. Blank lines are skipped; diagnostics are not
/// part of the file.
pub fn read_log(source: impl BufRead, source_name: &str) -> Result<AlertLog> {
    let mut log = AlertLog::default();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let alert: Alert = serde_json::from_str(&line)
            .map_err(|e| Error::parse(source_name, idx + 1, strip(&e)))?;
        if let Some(prev) = log.entries.last() {
            if alert.seq <= prev.seq {
                return Err(Error::parse(
                    source_name,
                    idx + 1,
                    format!("seq {} does not increase (previous {})", alert.seq, prev.seq),
                ));
            }
        }
        log.entries.push(alert);
    }
    Ok(log)
}

fn strip(e: &serde_json::Error) -> String {
    let s = e.to_string();
    match s.rfind(" at line ") {
        Some(i) => s[..i].to_string(),
        None => s,
    }
}
