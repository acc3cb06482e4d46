//! Clock abstraction so the core stays free of platform timers.
//!
//! Run reports carry wall-clock timestamps per trace event. The core never
//! reads a real clock itself; callers inject one (the CLI crate provides a
//! monotonic wall clock, tests use [`NullClock`] so reports compare equal).

/// Source of elapsed seconds since the start of a run.
pub trait Clock {
    fn elapsed_secs(&self) -> f64;
}

/// Clock that always reads 0.0. Keeps seeded runs bit-identical in tests.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullClock;

impl Clock for NullClock {
    fn elapsed_secs(&self) -> f64 {
        0.0
    }
}
