//! Deterministic scenario execution.
//!
//! Events are applied in `(t, seq)` order. Timers owned by the subsystems
//! (tracker expiry, attendance deadlines, exposure warnings) live in one
//! queue and are interleaved at their exact virtual times:
//!
//! * tracker expiry and attendance deadlines fire *before* external events
//!   at the same instant, in that order;
//! * exposure warnings fire *after* external events at the same instant, so
//!   a call that ends or goes to speaker exactly at the limit has not
//!   exceeded it.
//!
//! Within one event the subsystems are visited in a fixed order: context,
//! battery, sleep, radiation, tracker, sorter, forwarder.
//!
//! Timers due after the last event never fire; append a `tick` event to run
//! the clock further.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::alert::{Alert, AlertBody, AlertLog, AlertSink, Collected, SnapshotEntry, SnapshotReason, SuppressReason};
use crate::battery::{BatteryState, CallRouting};
use crate::config::AgentConfig;
use crate::context::{ContextInput, ContextState, SensorObservation};
use crate::error::{Error, Result};
use crate::forwarder::AttendanceLedger;
use crate::kb::KnowledgeBase;
use crate::model::{ItemKind, Millis};
use crate::radiation::{RadiationMonitor, SafetyTransition};
use crate::scenario::{Event, EventKind, Scenario};
use crate::sleep::{SleepDecision, SleepSession};
use crate::sorter::MissedItems;
use crate::tracker::CallerTracker;

// Phase within an instant: 0 before external events, 2 after.
const PHASE_BEFORE: u8 = 0;
const PHASE_EXTERNAL: u8 = 1;
const PHASE_AFTER: u8 = 2;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum TimerAction {
    Exposure,
    TrackerExpiry { prompt_id: String },
    Attendance { alert_id: u64 },
}

impl TimerAction {
    fn class(&self) -> u8 {
        match self {
            TimerAction::Exposure => 0,
            TimerAction::TrackerExpiry { .. } => 1,
            TimerAction::Attendance { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Timer {
    due: Millis,
    phase: u8,
    class: u8,
    created: u64,
    action: TimerAction,
}

/// Output side of the engine: the log, the attendance ledger and the timer queue.
struct Output {
    now: Millis,
    log: AlertLog,
    ledger: AttendanceLedger,
    timers: BinaryHeap<Reverse<Timer>>,
    timers_created: u64,
    attend_window_ms: Millis,
}

impl Output {
    fn schedule(&mut self, due: Millis, phase: u8, action: TimerAction) {
        self.timers_created += 1;
        self.timers.push(Reverse(Timer {
            due,
            phase,
            class: action.class(),
            created: self.timers_created,
            action,
        }));
    }

    fn push(&mut self, body: AlertBody) -> u64 {
        let seq = self.log.entries.len() as u64;
        let alert = Alert { t: self.now, seq, body };
        if let Some(deadline) = self.ledger.on_alert_emitted(&alert, self.attend_window_ms) {
            self.schedule(deadline, PHASE_BEFORE, TimerAction::Attendance { alert_id: seq });
        }
        self.log.entries.push(alert);
        seq
    }
}

impl AlertSink for Output {
    fn emit(&mut self, body: AlertBody) {
        self.push(body);
    }

    fn note(&mut self, message: String) {
        self.log.diagnostics.push(format!("t={}: {message}", self.now));
    }
}

/// The agent. Feed it events with [`Engine::process`] or run a whole
/// scenario with [`run_scenario`].
pub struct Engine {
    config: AgentConfig,
    kb: KnowledgeBase,
    out: Output,
    context: ContextState,
    context_started_sleep: bool,
    battery: BatteryState,
    sleep: SleepSession,
    radiation: RadiationMonitor,
    tracker: CallerTracker,
    missed: MissedItems,
    last_event: Option<(Millis, u64)>,
}

impl Engine {
    pub fn new(config: AgentConfig, kb: KnowledgeBase) -> Result<Self> {
        config.validate().map_err(|m| Error::validation("config", m))?;
        kb.validate().map_err(|m| Error::validation("knowledge base", m))?;
        Ok(Engine {
            out: Output {
                now: 0,
                log: AlertLog::default(),
                ledger: AttendanceLedger::new(),
                timers: BinaryHeap::new(),
                timers_created: 0,
                attend_window_ms: config.attend_window_ms,
            },
            config,
            kb,
            context: ContextState::default(),
            context_started_sleep: false,
            battery: BatteryState::new(),
            sleep: SleepSession::new(),
            radiation: RadiationMonitor::new(),
            tracker: CallerTracker::new(),
            missed: MissedItems::new(),
            last_event: None,
        })
    }

    pub fn now(&self) -> Millis {
        self.out.now
    }

    pub fn log(&self) -> &AlertLog {
        &self.out.log
    }

    pub fn knowledge_base(&self) -> &KnowledgeBase {
        &self.kb
    }

    pub fn context(&self) -> ContextState {
        self.context
    }

    pub fn battery(&self) -> BatteryState {
        self.battery
    }

    pub fn sleep_session(&self) -> &SleepSession {
        &self.sleep
    }

    pub fn radiation(&self) -> &RadiationMonitor {
        &self.radiation
    }

    pub fn tracker(&self) -> &CallerTracker {
        &self.tracker
    }

    pub fn missed_items(&self) -> &MissedItems {
        &self.missed
    }

    /// The callback list as it stands now.
    pub fn snapshot(&self) -> Vec<SnapshotEntry> {
        self.missed
            .sorted(&self.kb, self.out.now, self.config.sorter_t_floor_min)
            .into_iter()
            .map(SnapshotEntry::from)
            .collect()
    }

    /// Applies one external event, firing every timer that falls due first.
    /// Events must arrive in `(t, seq)` order; a late event is dropped with a
    /// diagnostic.
    pub fn process(&mut self, event: &Event) {
        if let Some(last) = self.last_event {
            if (event.t, event.seq) <= last {
                self.out.note(format!(
                    "event seq {} at t={} arrived out of order; dropped",
                    event.seq, event.t
                ));
                return;
            }
        }
        self.last_event = Some((event.t, event.seq));
        self.fire_timers_before(event.t, PHASE_EXTERNAL);
        self.out.now = event.t;
        self.dispatch(event);
    }

    /// Ends the run. Timers not yet due are dropped.
    pub fn finish(mut self) -> (AlertLog, KnowledgeBase) {
        if let Some(session) = self.radiation.session() {
            let caller = session.caller_id.clone();
            self.out
                .note(format!("call with {caller} still open at end of scenario; not classified"));
        }
        (self.out.log, self.kb)
    }

    fn fire_timers_before(&mut self, t: Millis, phase: u8) {
        while let Some(Reverse(next)) = self.out.timers.peek() {
            if (next.due, next.phase) >= (t, phase) {
                break;
            }
            let Reverse(timer) = self.out.timers.pop().expect("peeked");
            self.out.now = timer.due;
            self.fire(timer);
        }
    }

    fn fire(&mut self, timer: Timer) {
        match timer.action {
            TimerAction::Exposure => {
                if let Some(next) = self.radiation.on_crossing(timer.due, &self.config, &mut self.out) {
                    self.out.schedule(next, PHASE_AFTER, TimerAction::Exposure);
                }
            }
            TimerAction::TrackerExpiry { prompt_id } => {
                self.tracker
                    .on_tracker_timeout(&prompt_id, timer.due, &self.config, &mut self.out);
            }
            TimerAction::Attendance { alert_id } => {
                let mut forwarded = Collected::default();
                self.out.ledger.on_deadline(
                    alert_id,
                    timer.due,
                    self.context.current,
                    self.kb.devices.values(),
                    &mut forwarded,
                );
                for body in forwarded.alerts {
                    self.out.push(body);
                }
            }
        }
    }

    fn dispatch(&mut self, event: &Event) {
        let t = event.t;
        match &event.kind {
            EventKind::Sensor {
                signal_kind,
                signal_value,
            } => {
                let obs = SensorObservation {
                    t,
                    signal_kind: *signal_kind,
                    signal_value: signal_value.clone(),
                };
                self.context
                    .apply(ContextInput::Sensor(&obs), &self.kb.context_signals);
                self.sync_context_sleep(t);
            }
            EventKind::UserContext { context } => {
                self.context
                    .apply(ContextInput::User(*context), &self.kb.context_signals);
                self.sync_context_sleep(t);
            }
            EventKind::BatteryLevel { pct } => {
                let snapshot = self.snapshot();
                self.battery
                    .on_battery_level(*pct, &self.config, || snapshot, &mut self.out);
            }
            EventKind::CallStart {
                caller,
                safety,
                answered,
            } => self.incoming_call(caller, *safety, *answered, t),
            EventKind::CallEnd {} => match self.radiation.end_call(t, &self.config) {
                Some(done) => self.kb.update_call_safety(&done.caller_id, done.classification),
                None => self.out.note("call_end with no active call".to_string()),
            },
            EventKind::CallFailed { callee, reason } => {
                self.tracker.on_call_failed(callee, *reason, t, &mut self.out);
            }
            EventKind::MessageReceived { sender } => {
                if self.sleep.is_active() {
                    self.out.emit(AlertBody::SuppressNote {
                        caller: sender.clone(),
                        item: ItemKind::Message,
                        reason: SuppressReason::Sleep,
                    });
                } else {
                    self.out.emit(AlertBody::Beep {
                        sender: sender.clone(),
                    });
                }
                self.missed.record(sender, ItemKind::Message, t);
            }
            EventKind::UserResponse { prompt_id, answer } => {
                if let Some(due) =
                    self.tracker
                        .on_user_response(prompt_id, *answer, t, &self.config, &mut self.out)
                {
                    self.out.schedule(
                        due,
                        PHASE_BEFORE,
                        TimerAction::TrackerExpiry {
                            prompt_id: prompt_id.clone(),
                        },
                    );
                }
            }
            EventKind::DeliveryReport {
                tracking_msg_id,
                positive,
            } => {
                self.tracker
                    .on_delivery_report(tracking_msg_id, *positive, &mut self.out);
            }
            EventKind::NotificationAttended {
                alert_id,
                caller,
                item,
            } => {
                if let (Some(caller), Some(item)) = (caller, item) {
                    if !self.missed.acknowledge(caller, *item) {
                        self.out.note(format!(
                            "no missed {} from {caller} to acknowledge",
                            item.as_str()
                        ));
                    }
                }
                if let Some(id) = alert_id {
                    let Output { ledger, log, now, .. } = &mut self.out;
                    ledger.on_attended(*id, &mut NoteOnly(&mut log.diagnostics, *now));
                }
            }
            EventKind::SleepMode { on } => {
                if *on {
                    self.sleep.start(t);
                } else {
                    self.sleep.stop();
                    self.context_started_sleep = false;
                }
            }
            EventKind::SafetyModeEnter {} => self.safety(SafetyTransition::Enter, t),
            EventKind::SafetyModeExit {} => self.safety(SafetyTransition::Exit, t),
            EventKind::SnapshotRequest {} => {
                let entries = self.snapshot();
                self.out.emit(AlertBody::SortedListSnapshot {
                    reason: SnapshotReason::Request,
                    entries,
                });
            }
            EventKind::Tick {} => {}
        }
    }

    fn safety(&mut self, transition: SafetyTransition, t: Millis) {
        if let Some(next) = self
            .radiation
            .on_safety_transition(transition, t, &self.config, &mut self.out)
        {
            self.out.schedule(next, PHASE_AFTER, TimerAction::Exposure);
        }
    }

    fn sync_context_sleep(&mut self, t: Millis) {
        if self.config.sleep_contexts.is_empty() {
            return;
        }
        let quiet = self.config.sleep_contexts.contains(&self.context.current);
        if quiet && !self.sleep.is_active() {
            self.sleep.start(t);
            self.context_started_sleep = true;
        } else if !quiet && self.context_started_sleep {
            self.sleep.stop();
            self.context_started_sleep = false;
        }
    }

    fn incoming_call(&mut self, caller_id: &str, safety: bool, answered: bool, t: Millis) {
        let caller = self.kb.lookup(caller_id);
        let routing = self
            .battery
            .on_incoming_call(caller_id, caller.group, &self.config, &mut self.out);
        if routing == CallRouting::Diverted {
            self.missed.record(caller_id, ItemKind::Call, t);
            return;
        }
        if self.radiation.in_call() {
            self.out.emit(AlertBody::SuppressNote {
                caller: caller_id.to_string(),
                item: ItemKind::Call,
                reason: SuppressReason::Busy,
            });
            self.missed.record(caller_id, ItemKind::Call, t);
            return;
        }
        match self.sleep.on_call(&caller) {
            SleepDecision::Suppress => {
                self.out.emit(AlertBody::SuppressNote {
                    caller: caller_id.to_string(),
                    item: ItemKind::Call,
                    reason: SuppressReason::Sleep,
                });
                self.missed.record(caller_id, ItemKind::Call, t);
            }
            SleepDecision::Ring => {
                let ring = self.out.push(AlertBody::Ring {
                    caller: caller_id.to_string(),
                    answered,
                });
                if answered {
                    self.out.ledger.dismiss(ring);
                    let record = self.kb.safety_record(caller_id);
                    if let Some(due) =
                        self.radiation
                            .start_call(caller_id, t, safety, &record, &self.config, &mut self.out)
                    {
                        self.out.schedule(due, PHASE_AFTER, TimerAction::Exposure);
                    }
                } else {
                    self.missed.record(caller_id, ItemKind::Call, t);
                }
            }
        }
    }
}

// Diagnostics from the ledger go straight into the log.
struct NoteOnly<'a>(&'a mut Vec<String>, Millis);

impl AlertSink for NoteOnly<'_> {
    fn emit(&mut self, _body: AlertBody) {
        unreachable!("attendance never emits alerts")
    }

    fn note(&mut self, message: String) {
        self.0.push(format!("t={}: {message}", self.1));
    }
}

/// Runs a whole scenario against a knowledge base and returns the alert log
/// and the updated knowledge base.
pub fn run_scenario(scenario: &Scenario, config: &AgentConfig, kb: KnowledgeBase) -> Result<(AlertLog, KnowledgeBase)> {
    scenario
        .validate()
        .map_err(|m| Error::validation("scenario", m))?;
    let mut engine = Engine::new(config.clone(), kb)?;
    for event in &scenario.events {
        engine.process(event);
    }
    Ok(engine.finish())
}
