//! The agent's long-lived state and its on-disk form.
//!
//! The file is a single JSON object with four required sections:
//!
//! ```json
//! {
//!   "contacts": [{"id": "mom", "name": "Mom", "group": "A", "temp_important": false}],
//!   "safety_records": {"mom": {"total": 4, "unsafe": 2}},
//!   "devices": [{"device_id": "tv", "contexts": ["Home"], "kinds": ["ring"]}],
//!   "context_signals": {"wifi_network:home-net": "Home"}
//! }
//! ```
//!
//! Saving sorts every collection, so equal knowledge bases produce equal bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::alert::AlertKind;
use crate::context::{parse_signal_key, Context};
use crate::error::{Error, Result};
use crate::forwarder::DeviceRegistration;
use crate::model::{Contact, Group};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CallSafety {
    Safe,
    Unsafe,
}

/// Per-caller tally of past calls and how many ran past the safe limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SafetyRecord {
    #[serde(rename = "total")]
    pub total_calls: u64,
    #[serde(rename = "unsafe")]
    pub unsafe_calls: u64,
}

impl SafetyRecord {
    pub fn new(total_calls: u64, unsafe_calls: u64) -> Self {
        SafetyRecord {
            total_calls,
            unsafe_calls,
        }
    }

    pub fn record(&mut self, classification: CallSafety) {
        self.total_calls += 1;
        if classification == CallSafety::Unsafe {
            self.unsafe_calls += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KnowledgeBase {
    pub contacts: BTreeMap<String, Contact>,
    pub safety_records: BTreeMap<String, SafetyRecord>,
    pub devices: BTreeMap<String, DeviceRegistration>,
    pub context_signals: BTreeMap<String, Context>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KbFile {
    contacts: Vec<Contact>,
    safety_records: BTreeMap<String, SafetyRecord>,
    devices: Vec<DeviceRegistration>,
    context_signals: BTreeMap<String, Context>,
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    /// Contact for `id`; unknown callers come back as Group D.
    pub fn lookup(&self, id: &str) -> Contact {
        self.contacts
            .get(id)
            .cloned()
            .unwrap_or_else(|| Contact::unknown(id))
    }

    pub fn group_of(&self, id: &str) -> Group {
        self.contacts.get(id).map_or(Group::D, |c| c.group)
    }

    pub fn insert_contact(&mut self, contact: Contact) {
        self.contacts.insert(contact.id.clone(), contact);
    }

    pub fn insert_device(&mut self, device: DeviceRegistration) {
        self.devices.insert(device.device_id.clone(), device);
    }

    pub fn safety_record(&self, caller_id: &str) -> SafetyRecord {
        self.safety_records
            .get(caller_id)
            .copied()
            .unwrap_or_default()
    }

    /// Counts one finished call against `caller_id`, creating the record if needed.
    pub fn update_call_safety(&mut self, caller_id: &str, classification: CallSafety) {
        self.safety_records
            .entry(caller_id.to_string())
            .or_default()
            .record(classification);
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        for (key, contact) in &self.contacts {
            if contact.id.is_empty() {
                return Err("contact with empty id".to_string());
            }
            if key != &contact.id {
                return Err(format!("contact keyed `{key}` has id `{}`", contact.id));
            }
        }
        for (id, r) in &self.safety_records {
            if r.unsafe_calls > r.total_calls {
                return Err(format!(
                    "safety record `{id}`: unsafe ({}) exceeds total ({})",
                    r.unsafe_calls, r.total_calls
                ));
            }
        }
        for (key, d) in &self.devices {
            if d.device_id.is_empty() {
                return Err("device with empty device_id".to_string());
            }
            if key != &d.device_id {
                return Err(format!("device keyed `{key}` has id `{}`", d.device_id));
            }
            if d.contexts.is_empty() || d.kinds.is_empty() {
                return Err(format!("device `{key}` needs at least one context and one kind"));
            }
            if d.contexts.contains(&Context::Unknown) {
                return Err(format!("device `{key}` cannot register the Unknown context"));
            }
        }
        for key in self.context_signals.keys() {
            parse_signal_key(key)?;
        }
        Ok(())
    }

    fn from_file(file: KbFile) -> std::result::Result<Self, String> {
        let mut kb = KnowledgeBase {
            safety_records: file.safety_records,
            context_signals: file.context_signals,
            ..Default::default()
        };
        for c in file.contacts {
            if kb.contacts.contains_key(&c.id) {
                return Err(format!("duplicate contact id `{}`", c.id));
            }
            kb.contacts.insert(c.id.clone(), c);
        }
        for d in file.devices {
            if kb.devices.contains_key(&d.device_id) {
                return Err(format!("duplicate device id `{}`", d.device_id));
            }
            kb.devices.insert(d.device_id.clone(), d);
        }
        kb.validate()?;
        Ok(kb)
    }

    fn to_file(&self) -> KbFile {
        KbFile {
            contacts: self.contacts.values().cloned().collect(),
            safety_records: self.safety_records.clone(),
            devices: self.devices.values().cloned().collect(),
            context_signals: self.context_signals.clone(),
        }
    }

    /// Devices registered for `context` that accept alerts of `kind`.
    pub fn devices_for(&self, context: Context, kind: AlertKind) -> impl Iterator<Item = &DeviceRegistration> {
        self.devices
            .values()
            .filter(move |d| d.contexts.contains(&context) && d.kinds.contains(&kind))
    }
}

pub fn kb_load(mut source: impl Read, source_name: &str) -> Result<KnowledgeBase> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    let file: KbFile = serde_json::from_str(&text).map_err(|e| Error::from_json(source_name, e))?;
    KnowledgeBase::from_file(file).map_err(|m| Error::validation(source_name, m))
}

pub fn kb_save(kb: &KnowledgeBase, mut sink: impl Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut sink, &kb.to_file()).map_err(std::io::Error::from)?;
    sink.write_all(b"\n")?;
    sink.flush()?;
    Ok(())
}

pub fn kb_to_bytes(kb: &KnowledgeBase) -> Vec<u8> {
    let mut out = Vec::new();
    kb_save(kb, &mut out).expect("writing to a Vec cannot fail");
    out
}

/// Helper for building device registrations in code.
pub fn device(
    id: &str,
    contexts: impl IntoIterator<Item = Context>,
    kinds: impl IntoIterator<Item = AlertKind>,
) -> DeviceRegistration {
    DeviceRegistration {
        device_id: id.to_string(),
        contexts: contexts.into_iter().collect::<BTreeSet<_>>(),
        kinds: kinds.into_iter().collect::<BTreeSet<_>>(),
    }
}
