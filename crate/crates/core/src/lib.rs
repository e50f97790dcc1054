//! A deterministic alert agent for smartphone notifications.
//!
//! The agent consumes a timestamped trace of device and user events and
//! produces a log of alert decisions: which calls ring and which are held
//! back during sleep, how missed calls and messages are ranked for calling
//! back, what happens when the battery is about to die, when to warn about
//! long calls held against the head, whether to track an unreachable callee,
//! and which unattended alerts to forward to nearby devices.
//!
//! ```
//! use alertagent::{run_scenario, AgentConfig, AlertKind, EventKind, KnowledgeBase, Scenario};
//!
//! let scenario = Scenario::from_kinds([
//!     (0, EventKind::CallStart { caller: "c1".into(), safety: false, answered: true }),
//!     (420_000, EventKind::CallEnd {}),
//! ]);
//! let (log, kb) = run_scenario(&scenario, &AgentConfig::default(), KnowledgeBase::new()).unwrap();
//! assert_eq!(log.count(AlertKind::RadiationIncallWarning), 1);
//! assert_eq!(kb.safety_record("c1").unsafe_calls, 1);
//! ```

pub mod alert;
pub mod battery;
pub mod config;
pub mod context;
pub mod engine;
pub mod error;
pub mod forwarder;
pub mod kb;
pub mod model;
pub mod radiation;
pub mod scenario;
pub mod sleep;
pub mod sorter;
pub mod tracker;

pub use alert::{read_log, Alert, AlertBody, AlertKind, AlertLog, AlertSink, Collected, SnapshotEntry};
pub use config::{load_config, AgentConfig, BatteryActionKind, BatteryActionSpec};
pub use context::{Context, SignalKind};
pub use engine::{run_scenario, Engine};
pub use error::{Error, Result};
pub use kb::{kb_load, kb_save, CallSafety, KnowledgeBase, SafetyRecord};
pub use model::{group_weight, Contact, Group, ItemKind, Millis};
pub use scenario::{parse_scenario, Event, EventKind, Scenario};
