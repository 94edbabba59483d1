use super::SimError;

/// Monotone virtual time in nanoseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct VirtualClock {
    now_ns: u64,
}

impl VirtualClock {
    pub fn new() -> VirtualClock {
        VirtualClock::default()
    }

    pub fn now_ns(&self) -> u64 {
        self.now_ns
    }

    pub fn advance_ns(&mut self, ns: u64) {
        self.now_ns += ns;
    }

    /// Advances by a non-negative duration in microseconds, rounded to the
    /// nearest nanosecond.
    pub fn advance_us(&mut self, us: f64) {
        debug_assert!(us >= 0.0 && us.is_finite());
        self.now_ns += us_to_ns(us);
    }

    pub fn advance_to(&mut self, t_ns: u64) -> Result<(), SimError> {
        if t_ns < self.now_ns {
            return Err(SimError::ClockRegression {
                now_ns: self.now_ns,
                requested_ns: t_ns,
            });
        }
        self.now_ns = t_ns;
        Ok(())
    }
}

pub fn us_to_ns(us: f64) -> u64 {
    (us.max(0.0) * 1000.0).round() as u64
}
