//! Cooperative wall-clock deadlines checked at stage boundaries and inside
//! search loops.

use std::time::{Duration, Instant};

use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("deadline exceeded")]
pub struct TimedOut;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Deadline(Option<Instant>);

impl Deadline {
    pub fn never() -> Self {
        Deadline(None)
    }

    pub fn after(d: Duration) -> Self {
        Deadline(Instant::now().checked_add(d))
    }

    pub fn after_secs_f64(secs: f64) -> Self {
        if secs.is_finite() && secs >= 0.0 {
            Self::after(Duration::from_secs_f64(secs))
        } else {
            Self::never()
        }
    }

    pub fn expired(&self) -> bool {
        matches!(self.0, Some(t) if Instant::now() >= t)
    }

    pub fn check(&self) -> Result<(), TimedOut> {
        if self.expired() {
            Err(TimedOut)
        } else {
            Ok(())
        }
    }
}

impl Default for Deadline {
    fn default() -> Self {
        Self::never()
    }
}
