//! Call gating during sleep, meetings and similar quiet periods.
//!
//! While a session is active each caller has a counter. The phone rings on
//! the call whose ordinal equals `max(1, (4 - weight) * 2)`, i.e. call 1 for
//! Group A, 2 for B, 4 for C and 6 for D, and the counter then starts over.
//! Temporarily important callers always ring.

use std::collections::BTreeMap;

use crate::model::{Contact, Group, Millis};

pub fn alert_ordinal(group: Group, temp_important: bool) -> u32 {
    if temp_important {
        return 1;
    }
    ((4 - group.weight()) * 2).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SleepDecision {
    Ring,
    Suppress,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SleepSession {
    active: bool,
    started_ms: Millis,
    per_caller_count: BTreeMap<String, u32>,
}

impl SleepSession {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_active(&self) -> bool {
        self.active
    }

    pub fn started_ms(&self) -> Option<Millis> {
        self.active.then_some(self.started_ms)
    }

    /// Starts a session. A session that is already running keeps its counters.
    pub fn start(&mut self, t: Millis) {
        if !self.active {
            self.active = true;
            self.started_ms = t;
            self.per_caller_count.clear();
        }
    }

    pub fn stop(&mut self) {
        self.active = false;
        self.per_caller_count.clear();
    }

    pub fn count(&self, caller_id: &str) -> u32 {
        self.per_caller_count.get(caller_id).copied().unwrap_or(0)
    }

    /// Decides one incoming call. Outside a session every call rings.
    pub fn on_call(&mut self, caller: &Contact) -> SleepDecision {
        if !self.active {
            return SleepDecision::Ring;
        }
        let ordinal = alert_ordinal(caller.group, caller.temp_important);
        let count = self.per_caller_count.entry(caller.id.clone()).or_insert(0);
        *count += 1;
        if *count >= ordinal {
            *count = 0;
            SleepDecision::Ring
        } else {
            SleepDecision::Suppress
        }
    }
}
