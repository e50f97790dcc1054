//! Forwarding of unattended alerts to registered devices.
//!
//! Every user-facing alert is entered in an attendance ledger with a deadline
//! `t + attend_window_ms`. If the user attends before the deadline the entry
//! is dropped. Otherwise, at the deadline, the alert is copied to every
//! device registered for the *current* context and for the alert's kind.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::alert::{Alert, AlertBody, AlertKind, AlertSink};
use crate::context::Context;
use crate::model::Millis;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceRegistration {
    pub device_id: String,
    pub contexts: BTreeSet<Context>,
    pub kinds: BTreeSet<AlertKind>,
}

impl DeviceRegistration {
    pub fn accepts(&self, context: Context, kind: AlertKind) -> bool {
        self.contexts.contains(&context) && self.kinds.contains(&kind)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PendingAlert {
    pub alert: Alert,
    pub deadline: Millis,
}

/// Alerts awaiting attendance, keyed by alert id (the alert's seq).
#[derive(Debug, Clone, Default)]
pub struct AttendanceLedger {
    pending: BTreeMap<u64, PendingAlert>,
}

impl AttendanceLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a user-facing alert and returns its deadline; other kinds are ignored.
    pub fn on_alert_emitted(&mut self, alert: &Alert, attend_window_ms: Millis) -> Option<Millis> {
        if !alert.kind().is_user_facing() {
            return None;
        }
        let deadline = alert.t + attend_window_ms;
        self.pending.insert(
            alert.seq,
            PendingAlert {
                alert: alert.clone(),
                deadline,
            },
        );
        Some(deadline)
    }

    pub fn on_attended(&mut self, alert_id: u64, sink: &mut dyn AlertSink) {
        if self.pending.remove(&alert_id).is_none() {
            sink.note(format!("attendance for unknown or closed alert id {alert_id}"));
        }
    }

    /// Silently drops an entry, e.g. a ring the user answered.
    pub fn dismiss(&mut self, alert_id: u64) {
        self.pending.remove(&alert_id);
    }

    /// Fires the deadline for `alert_id` if it is still pending.
    pub fn on_deadline<'a>(
        &mut self,
        alert_id: u64,
        now: Millis,
        context: Context,
        devices: impl IntoIterator<Item = &'a DeviceRegistration>,
        sink: &mut dyn AlertSink,
    ) {
        let Some(entry) = self.pending.get(&alert_id) else {
            return;
        };
        if now < entry.deadline {
            return;
        }
        let entry = self.pending.remove(&alert_id).expect("checked above");
        if context == Context::Unknown {
            return;
        }
        let kind = entry.alert.kind();
        for device in devices {
            if device.accepts(context, kind) {
                sink.emit(AlertBody::ForwardToDevice {
                    device_id: device.device_id.clone(),
                    alert: Box::new(entry.alert.clone()),
                });
            }
        }
    }

    pub fn get(&self, alert_id: u64) -> Option<&PendingAlert> {
        self.pending.get(&alert_id)
    }

    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }
}
