//! Low-battery handling.
//!
//! When the level drops strictly below the critical percentage the guard
//! saves a sorted snapshot of missed items and runs the configured actions
//! in priority order, once per episode. The guard re-arms only after the
//! level climbs back to the re-arm percentage.

use crate::alert::{AlertBody, AlertSink, SnapshotEntry, SnapshotReason};
use crate::config::{AgentConfig, BatteryActionKind};
use crate::model::Group;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatteryState {
    pub last_level_pct: u8,
    pub armed: bool,
}

impl Default for BatteryState {
    fn default() -> Self {
        BatteryState {
            last_level_pct: 100,
            armed: true,
        }
    }
}

/// What should happen to an incoming call while the battery is critical.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CallRouting {
    Normal,
    Diverted,
}

impl BatteryState {
    pub fn new() -> Self {
        Self::default()
    }

    /// True between a trigger and the next re-arm.
    pub fn critical_episode(&self) -> bool {
        !self.armed
    }

    /// Handles a level report. `snapshot` is only called when the guard fires.
    pub fn on_battery_level(
        &mut self,
        level: u8,
        config: &AgentConfig,
        snapshot: impl FnOnce() -> Vec<SnapshotEntry>,
        sink: &mut dyn AlertSink,
    ) {
        self.last_level_pct = level;
        if self.armed && level < config.battery_critical_pct {
            self.armed = false;
            sink.emit(AlertBody::SortedListSnapshot {
                reason: SnapshotReason::BatteryCritical,
                entries: snapshot(),
            });
            for action in &config.battery_actions {
                sink.emit(AlertBody::BatteryAction {
                    action: action.kind,
                    destination: action.destination.clone(),
                    caller: None,
                });
            }
        } else if !self.armed && level >= config.battery_rearm_pct {
            self.armed = true;
        }
    }

    /// Per-call actions during a critical episode: the low-battery notice to
    /// the caller, and diversion of Group A calls.
    pub fn on_incoming_call(
        &self,
        caller_id: &str,
        group: Group,
        config: &AgentConfig,
        sink: &mut dyn AlertSink,
    ) -> CallRouting {
        if self.armed {
            return CallRouting::Normal;
        }
        if config.action(BatteryActionKind::InformCaller).is_some() {
            sink.emit(AlertBody::BatteryAction {
                action: BatteryActionKind::InformCaller,
                destination: String::new(),
                caller: Some(caller_id.to_string()),
            });
        }
        match config.action(BatteryActionKind::DivertGroupA) {
            Some(divert) if group == Group::A => {
                sink.emit(AlertBody::BatteryAction {
                    action: BatteryActionKind::DivertGroupA,
                    destination: divert.destination.clone(),
                    caller: Some(caller_id.to_string()),
                });
                CallRouting::Diverted
            }
            _ => CallRouting::Normal,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alert::{AlertKind, Collected};
    use crate::config::BatteryActionSpec;

    fn config(actions: Vec<BatteryActionSpec>) -> AgentConfig {
        AgentConfig {
            battery_actions: actions,
            ..AgentConfig::default()
        }
    }

    fn kinds(c: &Collected) -> Vec<AlertKind> {
        c.alerts.iter().map(|a| a.kind()).collect()
    }

    #[test]
    fn fires_below_four() {
        let cfg = config(vec![BatteryActionSpec::new(BatteryActionKind::SendStatusSms, "x")]);
        let mut s = BatteryState::new();
        let mut sink = Collected::default();
        s.on_battery_level(3, &cfg, Vec::new, &mut sink);
        assert_eq!(kinds(&sink), vec![AlertKind::SortedListSnapshot, AlertKind::BatteryAction]);
        assert_eq!(
            sink.alerts[1],
            AlertBody::BatteryAction {
                action: BatteryActionKind::SendStatusSms,
                destination: "x".into(),
                caller: None
            }
        );
        assert!(!s.armed);
    }

    #[test]
    fn four_exactly_does_not_fire() {
        let mut s = BatteryState::new();
        let mut sink = Collected::default();
        s.on_battery_level(4, &AgentConfig::default(), Vec::new, &mut sink);
        assert!(sink.alerts.is_empty());
        assert!(s.armed);
    }

    #[test]
    fn hysteresis() {
        let cfg = AgentConfig::default();
        let mut s = BatteryState {
            last_level_pct: 3,
            armed: false,
        };
        let mut sink = Collected::default();
        s.on_battery_level(3, &cfg, Vec::new, &mut sink);
        assert!(sink.alerts.is_empty());
        s.on_battery_level(19, &cfg, Vec::new, &mut sink);
        assert!(!s.armed);
        s.on_battery_level(25, &cfg, Vec::new, &mut sink);
        assert!(s.armed);
        s.on_battery_level(3, &cfg, Vec::new, &mut sink);
        assert_eq!(sink.alerts.len(), 2);
    }

    #[test]
    fn action_order_is_preserved() {
        let cfg = config(vec![
            BatteryActionSpec::new(BatteryActionKind::EmailStatus, "me@x.org"),
            BatteryActionSpec::new(BatteryActionKind::InformCaller, ""),
            BatteryActionSpec::new(BatteryActionKind::SendStatusSms, "555"),
        ]);
        let mut s = BatteryState::new();
        let mut sink = Collected::default();
        s.on_battery_level(1, &cfg, Vec::new, &mut sink);
        let actions: Vec<_> = sink
            .alerts
            .iter()
            .filter_map(|a| match a {
                AlertBody::BatteryAction { action, .. } => Some(*action),
                _ => None,
            })
            .collect();
        assert_eq!(
            actions,
            vec![
                BatteryActionKind::EmailStatus,
                BatteryActionKind::InformCaller,
                BatteryActionKind::SendStatusSms
            ]
        );
    }

    #[test]
    fn inform_caller_autoreply() {
        let cfg = AgentConfig::default();
        let mut sink = Collected::default();
        let idle = BatteryState::new();
        idle.on_incoming_call("c9", Group::C, &cfg, &mut sink);
        assert!(sink.alerts.is_empty());

        let critical = BatteryState {
            last_level_pct: 2,
            armed: false,
        };
        critical.on_incoming_call("c9", Group::C, &cfg, &mut sink);
        assert_eq!(
            sink.alerts,
            vec![AlertBody::BatteryAction {
                action: BatteryActionKind::InformCaller,
                destination: String::new(),
                caller: Some("c9".into())
            }]
        );

        let mut sink = Collected::default();
        critical.on_incoming_call("c9", Group::C, &config(vec![]), &mut sink);
        assert!(sink.alerts.is_empty());
    }

    #[test]
    fn diverts_group_a_only() {
        let cfg = config(vec![BatteryActionSpec::new(BatteryActionKind::DivertGroupA, "+100")]);
        let critical = BatteryState {
            last_level_pct: 2,
            armed: false,
        };
        let mut sink = Collected::default();
        assert_eq!(critical.on_incoming_call("mom", Group::A, &cfg, &mut sink), CallRouting::Diverted);
        assert_eq!(critical.on_incoming_call("pal", Group::B, &cfg, &mut sink), CallRouting::Normal);
        assert_eq!(sink.alerts.len(), 1);
    }
}
