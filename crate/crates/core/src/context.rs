//! Environment inference from user input and sensor signals.
//!
//! User input always wins: a `user_context` event pins the context and no
//! sensor observation can move it until the user speaks again. Sensor
//! observations are a plain lookup into the signal registry kept in the
//! knowledge base, keyed as `"<signal_kind>:<signal_value>"`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::Millis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub enum Context {
    Home,
    Workspace,
    Driving,
    Outdoor,
    #[default]
    Unknown,
}

impl Context {
    pub const ALL: [Context; 5] = [
        Context::Home,
        Context::Workspace,
        Context::Driving,
        Context::Outdoor,
        Context::Unknown,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Context::Home => "Home",
            Context::Workspace => "Workspace",
            Context::Driving => "Driving",
            Context::Outdoor => "Outdoor",
            Context::Unknown => "Unknown",
        }
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalKind {
    WifiNetwork,
    AudioDevice,
    Accessory,
    MicrophoneClass,
    Proximity,
}

impl SignalKind {
    pub const ALL: [SignalKind; 5] = [
        SignalKind::WifiNetwork,
        SignalKind::AudioDevice,
        SignalKind::Accessory,
        SignalKind::MicrophoneClass,
        SignalKind::Proximity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SignalKind::WifiNetwork => "wifi_network",
            SignalKind::AudioDevice => "audio_device",
            SignalKind::Accessory => "accessory",
            SignalKind::MicrophoneClass => "microphone_class",
            SignalKind::Proximity => "proximity",
        }
    }
}

impl FromStr for SignalKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SignalKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown signal kind `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensorObservation {
    pub t: Millis,
    pub signal_kind: SignalKind,
    pub signal_value: String,
}

impl SensorObservation {
    pub fn registry_key(&self) -> String {
        signal_key(self.signal_kind, &self.signal_value)
    }
}

/// Registry key for a (kind, value) pair.
pub fn signal_key(kind: SignalKind, value: &str) -> String {
    format!("{}:{}", kind.as_str(), value)
}

/// Splits a registry key back into its parts.
pub fn parse_signal_key(key: &str) -> Result<(SignalKind, &str), String> {
    let (kind, value) = key
        .split_once(':')
        .ok_or_else(|| format!("signal key `{key}` is not of the form <kind>:<value>"))?;
    if value.is_empty() {
        return Err(format!("signal key `{key}` has an empty value"));
    }
    Ok((kind.parse()?, value))
}

/// Input to [`infer_context`].
#[derive(Debug, Clone, Copy)]
pub enum ContextInput<'a> {
    Sensor(&'a SensorObservation),
    User(Context),
}

/// Current context plus whether the user has pinned it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ContextState {
    pub current: Context,
    pub pinned: bool,
}

impl ContextState {
    pub fn apply(&mut self, input: ContextInput<'_>, registry: &BTreeMap<String, Context>) {
        *self = infer_context(*self, input, registry);
    }
}

pub fn infer_context(
    state: ContextState,
    input: ContextInput<'_>,
    registry: &BTreeMap<String, Context>,
) -> ContextState {
    match input {
        ContextInput::User(ctx) => ContextState {
            current: ctx,
            pinned: true,
        },
        ContextInput::Sensor(_) if state.pinned => state,
        ContextInput::Sensor(obs) => match registry.get(&obs.registry_key()) {
            Some(&ctx) => ContextState {
                current: ctx,
                pinned: false,
            },
            None => state,
        },
    }
}
