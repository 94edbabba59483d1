use super::SimError;

/// Token bucket refilled continuously in virtual time.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenBucket {
    tokens: f64,
    bucket_max: f64,
    /// Tokens per virtual second.
    rate: f64,
    last_refill_ns: u64,
}

impl TokenBucket {
    pub fn new(rate: f64, bucket_max: f64, initial: f64, now_ns: u64) -> Result<TokenBucket, SimError> {
        check_params(rate, bucket_max)?;
        if !(initial >= 0.0) {
            return Err(SimError::InvalidRequest(format!("initial tokens {initial} < 0")));
        }
        Ok(TokenBucket {
            tokens: initial.min(bucket_max),
            bucket_max,
            rate,
            last_refill_ns: now_ns,
        })
    }

    pub fn tokens(&self) -> f64 {
        self.tokens
    }

    pub fn bucket_max(&self) -> f64 {
        self.bucket_max
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn last_refill_ns(&self) -> u64 {
        self.last_refill_ns
    }

    /// `tokens = min(bucket_max, tokens + rate * dt)`.
    pub fn refill(&mut self, now_ns: u64) -> Result<(), SimError> {
        if now_ns < self.last_refill_ns {
            return Err(SimError::ClockRegression {
                now_ns: self.last_refill_ns,
                requested_ns: now_ns,
            });
        }
        let dt = (now_ns - self.last_refill_ns) as f64 * 1e-9;
        self.tokens = self.bucket_max.min(self.tokens + self.rate * dt);
        self.last_refill_ns = now_ns;
        Ok(())
    }

    /// Takes `n` tokens if available at `now_ns`.
    pub fn try_consume(&mut self, n: f64, now_ns: u64) -> Result<bool, SimError> {
        self.refill(now_ns)?;
        if self.tokens >= n {
            self.tokens -= n;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    /// Admits `work` tokens, waiting in virtual time from `now_ns` as needed.
    /// Work larger than the bucket is charged in bucket-sized chunks. Returns
    /// the admission time.
    pub fn admit(&mut self, work: f64, now_ns: u64) -> Result<u64, SimError> {
        if !(work >= 0.0 && work.is_finite()) {
            return Err(SimError::InvalidRequest(format!("work {work} must be finite and >= 0")));
        }
        let mut t = now_ns.max(self.last_refill_ns);
        let mut remaining = work;
        while remaining > 0.0 {
            let chunk = remaining.min(self.bucket_max);
            self.refill(t)?;
            if self.tokens < chunk {
                let wait_s = (chunk - self.tokens) / self.rate;
                t += (wait_s * 1e9 - 1e-3).ceil().max(0.0) as u64;
                self.refill(t)?;
            }
            self.tokens = (self.tokens - chunk).max(0.0);
            remaining -= chunk;
        }
        Ok(t)
    }

    /// Changes rate and capacity at `now_ns`, after accruing at the old rate.
    pub fn reconfigure(&mut self, rate: f64, bucket_max: f64, now_ns: u64) -> Result<(), SimError> {
        check_params(rate, bucket_max)?;
        self.refill(now_ns)?;
        self.rate = rate;
        self.bucket_max = bucket_max;
        self.tokens = self.tokens.min(bucket_max);
        Ok(())
    }
}

fn check_params(rate: f64, bucket_max: f64) -> Result<(), SimError> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(SimError::InvalidRequest(format!("bucket rate {rate} must be positive")));
    }
    if !(bucket_max > 0.0 && bucket_max.is_finite()) {
        return Err(SimError::InvalidRequest(format!("bucket_max {bucket_max} must be positive")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SEC: u64 = 1_000_000_000;

    #[test]
    fn refill_examples() {
        let mut b = TokenBucket::new(50.0, 100.0, 0.0, 0).unwrap();
        b.refill(SEC).unwrap();
        assert_eq!(b.tokens(), 50.0);

        let mut b = TokenBucket::new(50.0, 100.0, 90.0, 0).unwrap();
        b.refill(SEC).unwrap();
        assert_eq!(b.tokens(), 100.0);

        let mut b = TokenBucket::new(50.0, 100.0, 10.0, 5).unwrap();
        b.refill(5).unwrap();
        assert_eq!(b.tokens(), 10.0);
    }

    #[test]
    fn time_regression_is_an_error() {
        let mut b = TokenBucket::new(1.0, 1.0, 0.0, 10).unwrap();
        assert!(matches!(b.refill(9), Err(SimError::ClockRegression { .. })));
    }

    #[test]
    fn admit_waits_for_tokens() {
        let mut b = TokenBucket::new(1000.0, 10.0, 0.0, 0).unwrap();
        // 5 tokens at 1000/s take 5 ms
        assert_eq!(b.admit(5.0, 0).unwrap(), 5_000_000);
        // oversized work is charged in chunks of bucket_max
        let t = b.admit(25.0, 5_000_000).unwrap();
        assert_eq!(t, 30_000_000);
    }

    #[test]
    fn reconfigure_caps_tokens() {
        let mut b = TokenBucket::new(100.0, 100.0, 100.0, 0).unwrap();
        b.reconfigure(10.0, 20.0, 0).unwrap();
        assert_eq!(b.tokens(), 20.0);
        assert_eq!(b.rate(), 10.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(TokenBucket::new(0.0, 1.0, 0.0, 0).is_err());
        assert!(TokenBucket::new(1.0, 0.0, 0.0, 0).is_err());
        assert!(TokenBucket::new(1.0, 1.0, -1.0, 0).is_err());
    }

    proptest! {
        #[test]
        fn never_exceeds_max(rate in 1.0f64..1e6, max in 1.0f64..1e4, steps in prop::collection::vec((0u64..SEC, 0.0f64..2e4), 1..64)) {
            let mut b = TokenBucket::new(rate, max, max, 0).unwrap();
            let mut now = 0;
            for (dt, work) in steps {
                now += dt;
                b.refill(now).unwrap();
                prop_assert!(b.tokens() <= b.bucket_max());
                now = b.admit(work, now).unwrap();
                prop_assert!(b.tokens() <= b.bucket_max() && b.tokens() >= 0.0);
            }
        }
    }
}
