//! Reachability tracking after a failed outgoing call.
//!
//! ```text
//! call_failed ──► AwaitingConsent ──yes──► AwaitingDelivery ──positive report──► Done
//!                        │                        │
//!                        no                    timeout
//!                        ▼                        ▼
//!                    Declined                  Expired
//! ```
//!
//! Declined is the idle "do nothing" outcome. Negative delivery reports keep
//! the task waiting. At most one open task exists per callee.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::alert::{AlertBody, AlertSink};
use crate::config::AgentConfig;
use crate::model::Millis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    SwitchedOff,
    Unreachable,
    Dropped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Answer {
    Yes,
    No,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackerState {
    AwaitingConsent,
    AwaitingDelivery,
    Done,
    Declined,
    Expired,
}

impl TrackerState {
    pub fn is_terminal(self) -> bool {
        matches!(self, TrackerState::Done | TrackerState::Declined | TrackerState::Expired)
    }
}

impl fmt::Display for TrackerState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrackerTask {
    pub callee_id: String,
    pub state: TrackerState,
    pub prompt_id: String,
    pub tracking_msg_id: Option<String>,
    pub created_ms: Millis,
    /// When the tracking message went out; the expiry clock runs from here.
    pub sent_ms: Option<Millis>,
}

#[derive(Debug, Clone, Default)]
pub struct CallerTracker {
    tasks: Vec<TrackerTask>,
    next_prompt: u64,
    next_message: u64,
}

impl CallerTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn tasks(&self) -> &[TrackerTask] {
        &self.tasks
    }

    pub fn open_task(&self, callee_id: &str) -> Option<&TrackerTask> {
        self.tasks
            .iter()
            .find(|t| t.callee_id == callee_id && !t.state.is_terminal())
    }

    pub fn by_prompt(&self, prompt_id: &str) -> Option<&TrackerTask> {
        self.tasks.iter().find(|t| t.prompt_id == prompt_id)
    }

    pub fn on_call_failed(&mut self, callee_id: &str, reason: FailureReason, t: Millis, sink: &mut dyn AlertSink) {
        if self.open_task(callee_id).is_some() {
            return;
        }
        self.next_prompt += 1;
        let prompt_id = format!("p{}", self.next_prompt);
        let why = match reason {
            FailureReason::SwitchedOff => "switched off",
            FailureReason::Unreachable => "unreachable",
            FailureReason::Dropped => "call dropped",
        };
        sink.emit(AlertBody::Prompt {
            prompt_id: prompt_id.clone(),
            callee: callee_id.to_string(),
            text: format!("{callee_id} is {why}. Track when reachable?"),
        });
        self.tasks.push(TrackerTask {
            callee_id: callee_id.to_string(),
            state: TrackerState::AwaitingConsent,
            prompt_id,
            tracking_msg_id: None,
            created_ms: t,
            sent_ms: None,
        });
    }

    /// Applies the user's answer. On "yes", returns the time at which the task
    /// should be checked for expiry.
    pub fn on_user_response(
        &mut self,
        prompt_id: &str,
        answer: Answer,
        t: Millis,
        config: &AgentConfig,
        sink: &mut dyn AlertSink,
    ) -> Option<Millis> {
        let Some(task) = self.tasks.iter_mut().find(|task| task.prompt_id == prompt_id) else {
            sink.note(format!("response to unknown prompt {prompt_id}"));
            return None;
        };
        if task.state != TrackerState::AwaitingConsent {
            sink.note(format!("response to prompt {prompt_id} ignored: task is {}", task.state));
            return None;
        }
        match answer {
            Answer::No => {
                task.state = TrackerState::Declined;
                None
            }
            Answer::Yes => {
                self.next_message += 1;
                let msg_id = format!("m{}", self.next_message);
                task.state = TrackerState::AwaitingDelivery;
                task.tracking_msg_id = Some(msg_id.clone());
                task.sent_ms = Some(t);
                sink.emit(AlertBody::TrackingMessage {
                    prompt_id: task.prompt_id.clone(),
                    callee: task.callee_id.clone(),
                    tracking_msg_id: msg_id,
                });
                Some(t + config.tracker_timeout_ms + 1)
            }
        }
    }

    pub fn on_delivery_report(&mut self, tracking_msg_id: &str, positive: bool, sink: &mut dyn AlertSink) {
        let Some(task) = self
            .tasks
            .iter_mut()
            .find(|task| task.tracking_msg_id.as_deref() == Some(tracking_msg_id))
        else {
            sink.note(format!("delivery report for unknown tracking id {tracking_msg_id}"));
            return;
        };
        if task.state != TrackerState::AwaitingDelivery {
            sink.note(format!(
                "delivery report for {tracking_msg_id} ignored: task is {}",
                task.state
            ));
            return;
        }
        if positive {
            task.state = TrackerState::Done;
            sink.emit(AlertBody::TrackerNotify {
                prompt_id: task.prompt_id.clone(),
                callee: task.callee_id.clone(),
                tracking_msg_id: tracking_msg_id.to_string(),
            });
        }
    }

    /// Expires the task behind `prompt_id` if it has waited longer than the timeout.
    pub fn on_tracker_timeout(&mut self, prompt_id: &str, now: Millis, config: &AgentConfig, sink: &mut dyn AlertSink) {
        let Some(task) = self.tasks.iter_mut().find(|task| task.prompt_id == prompt_id) else {
            return;
        };
        if task.state != TrackerState::AwaitingDelivery {
            return;
        }
        let sent = task.sent_ms.unwrap_or(task.created_ms);
        if now.saturating_sub(sent) > config.tracker_timeout_ms {
            task.state = TrackerState::Expired;
            sink.emit(AlertBody::TrackerExpired {
                prompt_id: task.prompt_id.clone(),
                callee: task.callee_id.clone(),
                tracking_msg_id: task.tracking_msg_id.clone().unwrap_or_default(),
            });
        }
    }
}
