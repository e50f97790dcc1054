//! Agent tuning knobs, loaded from a JSON object. Absent fields take defaults.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::context::Context;
use crate::error::{Error, Result};
use crate::model::Millis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatteryActionKind {
    /// Tell each incoming caller that the battery is low.
    InformCaller,
    /// Divert Group A calls to a fixed number.
    DivertGroupA,
    SendStatusSms,
    EmailStatus,
}

impl BatteryActionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BatteryActionKind::InformCaller => "inform_caller",
            BatteryActionKind::DivertGroupA => "divert_group_a",
            BatteryActionKind::SendStatusSms => "send_status_sms",
            BatteryActionKind::EmailStatus => "email_status",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatteryActionSpec {
    pub kind: BatteryActionKind,
    /// Number or e-mail address. Empty for `inform_caller`.
    #[serde(default)]
    pub destination: String,
}

impl BatteryActionSpec {
    pub fn new(kind: BatteryActionKind, destination: impl Into<String>) -> Self {
        BatteryActionSpec {
            kind,
            destination: destination.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub battery_critical_pct: u8,
    pub battery_rearm_pct: u8,
    pub safe_call_limit_ms: Millis,
    pub precall_prob_threshold: f64,
    pub precall_min_calls: u64,
    pub attend_window_ms: Millis,
    pub tracker_timeout_ms: Millis,
    pub sorter_t_floor_min: f64,
    /// Enabled battery actions, highest priority first.
    pub battery_actions: Vec<BatteryActionSpec>,
    /// Contexts that open a suppression session on their own. Empty by default;
    /// sessions are normally driven by explicit `sleep_mode` events.
    pub sleep_contexts: Vec<Context>,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            battery_critical_pct: 4,
            battery_rearm_pct: 20,
            safe_call_limit_ms: 360_000,
            precall_prob_threshold: 0.5,
            precall_min_calls: 3,
            attend_window_ms: 60_000,
            tracker_timeout_ms: 86_400_000,
            sorter_t_floor_min: 1.0,
            battery_actions: vec![BatteryActionSpec::new(BatteryActionKind::InformCaller, "")],
            sleep_contexts: Vec::new(),
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if !(0 < self.battery_critical_pct && self.battery_critical_pct < self.battery_rearm_pct) {
            return Err(format!(
                "battery_critical_pct ({}) must be > 0 and < battery_rearm_pct ({})",
                self.battery_critical_pct, self.battery_rearm_pct
            ));
        }
        if self.battery_rearm_pct > 100 {
            return Err(format!("battery_rearm_pct ({}) exceeds 100", self.battery_rearm_pct));
        }
        for (name, v) in [
            ("safe_call_limit_ms", self.safe_call_limit_ms),
            ("attend_window_ms", self.attend_window_ms),
            ("tracker_timeout_ms", self.tracker_timeout_ms),
        ] {
            if v == 0 {
                return Err(format!("{name} must be positive"));
            }
        }
        if !(self.sorter_t_floor_min.is_finite() && self.sorter_t_floor_min > 0.0) {
            return Err(format!(
                "sorter_t_floor_min ({}) must be a positive finite number",
                self.sorter_t_floor_min
            ));
        }
        if !(0.0..=1.0).contains(&self.precall_prob_threshold) {
            return Err(format!(
                "precall_prob_threshold ({}) must lie in [0, 1]",
                self.precall_prob_threshold
            ));
        }
        for (i, action) in self.battery_actions.iter().enumerate() {
            let needs_destination = action.kind != BatteryActionKind::InformCaller;
            if needs_destination && action.destination.is_empty() {
                return Err(format!(
                    "battery_actions[{i}] ({}) needs a destination",
                    action.kind.as_str()
                ));
            }
            if !needs_destination && !action.destination.is_empty() {
                return Err(format!("battery_actions[{i}] (inform_caller) takes no destination"));
            }
        }
        Ok(())
    }

    pub fn action(&self, kind: BatteryActionKind) -> Option<&BatteryActionSpec> {
        self.battery_actions.iter().find(|a| a.kind == kind)
    }
}

/// Reads and validates a config document.
pub fn load_config(mut source: impl Read, source_name: &str) -> Result<AgentConfig> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    let config: AgentConfig =
        serde_json::from_str(&text).map_err(|e| Error::from_json(source_name, e))?;
    config
        .validate()
        .map_err(|m| Error::validation(source_name, m))?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(s: &str) -> Result<AgentConfig> {
        load_config(s.as_bytes(), "config.json")
    }

    #[test]
    fn empty_object_gives_defaults() {
        let c = load("{}").unwrap();
        assert_eq!(c, AgentConfig::default());
        assert_eq!(c.battery_critical_pct, 4);
        assert_eq!(c.safe_call_limit_ms, 360_000);
    }

    #[test]
    fn partial_override() {
        let c = load(r#"{"attend_window_ms": 5000, "battery_actions": [{"kind": "email_status", "destination": "me@example.org"}]}"#).unwrap();
        assert_eq!(c.attend_window_ms, 5000);
        assert_eq!(c.battery_actions.len(), 1);
        assert_eq!(c.tracker_timeout_ms, 86_400_000);
    }

    #[test]
    fn rejects_unknown_field() {
        let err = load(r#"{"battery_low": 3}"#).unwrap_err();
        assert!(err.to_string().contains("battery_low"), "{err}");
    }

    #[test]
    fn rejects_inverted_thresholds() {
        assert!(matches!(
            load(r#"{"battery_critical_pct": 30}"#),
            Err(Error::Validation { .. })
        ));
        assert!(load(r#"{"battery_critical_pct": 0}"#).is_err());
        assert!(load(r#"{"battery_rearm_pct": 101}"#).is_err());
    }

    #[test]
    fn rejects_zero_durations_and_bad_floor() {
        assert!(load(r#"{"safe_call_limit_ms": 0}"#).is_err());
        assert!(load(r#"{"attend_window_ms": 0}"#).is_err());
        assert!(load(r#"{"sorter_t_floor_min": 0.0}"#).is_err());
        assert!(load(r#"{"precall_prob_threshold": 1.5}"#).is_err());
    }

    #[test]
    fn divert_needs_destination() {
        assert!(load(r#"{"battery_actions": [{"kind": "divert_group_a"}]}"#).is_err());
        assert!(load(r#"{"battery_actions": [{"kind": "inform_caller", "destination": "x"}]}"#).is_err());
    }
}
