//! Call exposure monitoring.
//!
//! Two clocks run per call. The main timer covers the whole call. The
//! subtimer covers the current stretch with the phone against the head: it
//! starts with the call (or when the user leaves safety mode), stops when a
//! safety method (speaker, headset, connected device) is engaged, and starts
//! again from zero when it is dropped.
//!
//! A warning is raised each time the subtimer passes another multiple of the
//! safe limit. At hang-up the call is classified by its main timer alone and
//! counted in the caller's safety record, which later drives the pre-call
//! warning.

use crate::alert::{AlertBody, AlertSink};
use crate::config::AgentConfig;
use crate::kb::{CallSafety, SafetyRecord};
use crate::model::Millis;

pub fn unsafe_probability(record: &SafetyRecord) -> f64 {
    if record.total_calls == 0 {
        return 0.0;
    }
    record.unsafe_calls as f64 / record.total_calls as f64
}

pub fn precall_check(caller_id: &str, record: &SafetyRecord, config: &AgentConfig) -> Option<AlertBody> {
    let p = unsafe_probability(record);
    (record.total_calls >= config.precall_min_calls && p >= config.precall_prob_threshold).then(|| {
        AlertBody::RadiationPrecallWarning {
            caller: caller_id.to_string(),
            probability: p,
            total_calls: record.total_calls,
            unsafe_calls: record.unsafe_calls,
        }
    })
}

/// Unsafe iff the call ran strictly longer than the safe limit.
pub fn classify_call(main_timer_ms: Millis, config: &AgentConfig) -> CallSafety {
    if main_timer_ms > config.safe_call_limit_ms {
        CallSafety::Unsafe
    } else {
        CallSafety::Safe
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SafetyTransition {
    Enter,
    Exit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallSession {
    pub caller_id: String,
    pub start_ms: Millis,
    pub in_safety_mode: bool,
    /// Start of the current exposure stretch; `None` exactly while in safety mode.
    pub sub_timer_started_ms: Option<Millis>,
    /// Warnings raised in the current exposure stretch.
    pub warnings_emitted: u64,
    pub total_warnings: u64,
}

impl CallSession {
    pub fn start(caller_id: impl Into<String>, t: Millis, in_safety_mode: bool) -> Self {
        CallSession {
            caller_id: caller_id.into(),
            start_ms: t,
            in_safety_mode,
            sub_timer_started_ms: (!in_safety_mode).then_some(t),
            warnings_emitted: 0,
            total_warnings: 0,
        }
    }

    pub fn main_timer(&self, t: Millis) -> Millis {
        t.saturating_sub(self.start_ms)
    }

    /// Current continuous exposure; zero while in safety mode.
    pub fn subtimer(&self, t: Millis) -> Millis {
        self.sub_timer_started_ms.map_or(0, |s| t.saturating_sub(s))
    }

    /// Time of the next warning, if the phone is against the head.
    pub fn next_crossing(&self, limit: Millis) -> Option<Millis> {
        self.sub_timer_started_ms
            .map(|s| s + (self.warnings_emitted + 1) * limit)
    }

    /// Applies a safety-mode change. Repeating the current state is a no-op.
    pub fn on_safety_transition(&mut self, transition: SafetyTransition, t: Millis) {
        match transition {
            SafetyTransition::Enter if !self.in_safety_mode => {
                self.in_safety_mode = true;
                self.sub_timer_started_ms = None;
                self.warnings_emitted = 0;
            }
            SafetyTransition::Exit if self.in_safety_mode => {
                self.in_safety_mode = false;
                self.sub_timer_started_ms = Some(t);
                self.warnings_emitted = 0;
            }
            _ => {}
        }
    }

    /// Raises at most one warning if the exposure has reached the next multiple
    /// of the safe limit by `t`.
    pub fn incall_tick(&mut self, t: Millis, config: &AgentConfig) -> Option<AlertBody> {
        let due = self.next_crossing(config.safe_call_limit_ms)?;
        if t < due {
            return None;
        }
        self.warnings_emitted += 1;
        self.total_warnings += 1;
        Some(AlertBody::RadiationIncallWarning {
            caller: self.caller_id.clone(),
            exposure_ms: self.warnings_emitted * config.safe_call_limit_ms,
            crossing: self.warnings_emitted,
        })
    }
}

/// Outcome of hanging up.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinishedCall {
    pub caller_id: String,
    pub main_timer_ms: Millis,
    pub classification: CallSafety,
    pub warnings: u64,
}

/// Owns the single active call, if any.
#[derive(Debug, Clone, Default)]
pub struct RadiationMonitor {
    session: Option<CallSession>,
}

impl RadiationMonitor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn session(&self) -> Option<&CallSession> {
        self.session.as_ref()
    }

    pub fn in_call(&self) -> bool {
        self.session.is_some()
    }

    /// Opens a call session and returns the first warning deadline, if any.
    pub fn start_call(
        &mut self,
        caller_id: &str,
        t: Millis,
        in_safety_mode: bool,
        record: &SafetyRecord,
        config: &AgentConfig,
        sink: &mut dyn AlertSink,
    ) -> Option<Millis> {
        if let Some(warning) = precall_check(caller_id, record, config) {
            sink.emit(warning);
        }
        let session = CallSession::start(caller_id, t, in_safety_mode);
        let next = session.next_crossing(config.safe_call_limit_ms);
        self.session = Some(session);
        next
    }

    /// Returns the new warning deadline, if the change starts an exposure stretch.
    pub fn on_safety_transition(
        &mut self,
        transition: SafetyTransition,
        t: Millis,
        config: &AgentConfig,
        sink: &mut dyn AlertSink,
    ) -> Option<Millis> {
        let Some(session) = self.session.as_mut() else {
            sink.note(format!("safety mode change at t={t} with no active call"));
            return None;
        };
        let was = session.in_safety_mode;
        session.on_safety_transition(transition, t);
        if was == session.in_safety_mode {
            return None;
        }
        session.next_crossing(config.safe_call_limit_ms)
    }

    /// Handles a scheduled warning deadline. Stale deadlines (the stretch ended
    /// or a different call is active) are ignored. Returns the next deadline.
    pub fn on_crossing(&mut self, due: Millis, config: &AgentConfig, sink: &mut dyn AlertSink) -> Option<Millis> {
        let session = self.session.as_mut()?;
        if session.next_crossing(config.safe_call_limit_ms) != Some(due) {
            return None;
        }
        let warning = session.incall_tick(due, config)?;
        sink.emit(warning);
        session.next_crossing(config.safe_call_limit_ms)
    }

    pub fn end_call(&mut self, t: Millis, config: &AgentConfig) -> Option<FinishedCall> {
        let session = self.session.take()?;
        let main = session.main_timer(t);
        Some(FinishedCall {
            caller_id: session.caller_id,
            main_timer_ms: main,
            classification: classify_call(main, config),
            warnings: session.total_warnings,
        })
    }
}
