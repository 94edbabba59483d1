//! Calibrated parameters describing one system under test.

use crate::calibration::Calibration;
use crate::mode::Mode;

use super::SimError;

macro_rules! backend_model {
    ($( $(#[$doc:meta])* $name:ident ),* $(,)?) => {
        /// Simulation parameters for one mode. Every field is loaded from a
        /// `sim.<mode>.<field>` calibration key.
        #[derive(Debug, Clone, PartialEq)]
        pub struct BackendModel {
            pub mode: Mode,
            pub rng_seed: u64,
            $( $(#[$doc])* pub $name: f64, )*
        }

        impl BackendModel {
            /// Names of all calibration parameters.
            pub const PARAMS: &'static [&'static str] = &[$(stringify!($name)),*];

            fn slot(&mut self, name: &str) -> Option<&mut f64> {
                match name {
                    $( stringify!($name) => Some(&mut self.$name), )*
                    _ => None,
                }
            }

            pub fn get(&self, name: &str) -> Option<f64> {
                match name {
                    $( stringify!($name) => Some(self.$name), )*
                    _ => None,
                }
            }

            fn zeroed(mode: Mode) -> BackendModel {
                BackendModel { mode, rng_seed: 0, $( $name: 0.0, )* }
            }
        }
    };
}

backend_model! {
    /// Driver cost of an empty kernel launch.
    base_launch_us,
    base_alloc_us,
    base_free_us,
    base_context_us,
    /// Driver cost of a call that the layer passes through untouched.
    base_call_us,
    base_pool_alloc_us,
    base_memcpy_us,
    /// Relative half-width of uniform jitter on driver costs.
    driver_jitter,
    /// Relative half-width of uniform jitter on virtualization costs.
    virt_jitter,
    hook_ns,
    rate_check_ns,
    quota_check_ns,
    tracking_ns,
    /// Shared-region bookkeeping on every alloc and free.
    shared_region_us,
    context_init_us,
    pool_query_us,
    /// Cost per extra free block inspected by the allocator.
    heap_scan_ns,
    /// Page-mapping cost for memory beyond the first 2 MiB granule.
    map_us_per_gib,
    lock_mean_us,
    lock_jitter_us,
    mem_capacity_bytes,
    mem_limit_bytes,
    /// Memory the layer keeps for itself out of each tenant's limit.
    quota_reserved_bytes,
    sm_limit_percent,
    burst_ms,
    /// Fraction by which real SM occupancy exceeds the work the limiter charged.
    util_overshoot,
    poll_interval_ms,
    poll_cost_us,
    share_skew,
    tenant_jitter,
    compute_interference,
    /// Bandwidth of one stream running alone.
    solo_bandwidth_gbps,
    /// Device memory bandwidth ceiling.
    peak_bandwidth_gbps,
    contention_alpha,
    bw_share_skew,
    l2_hit_solo,
    l2_eviction_per_tenant,
    cache_miss_penalty,
    pcie_h2d_gbps,
    pcie_d2h_gbps,
    pinned_speedup,
    pcie_alpha,
    nccl_allreduce_us,
    nccl_gather_gbps,
    p2p_gbps,
    bcast_gbps,
    ctx_switch_us,
    preempt_ms,
    detect_us,
    recover_us,
    /// 1 makes fault injection crash the faulting tenant's process.
    crash_on_fault,
    /// 1 lets a fault in one tenant poison the others.
    fault_propagates,
    /// 1 zeroes freed memory before it can be handed out again.
    scrub_on_free,
}

const FLAGS: [&str; 3] = ["crash_on_fault", "fault_propagates", "scrub_on_free"];

const FRACTIONS: [&str; 6] = [
    "driver_jitter",
    "virt_jitter",
    "tenant_jitter",
    "l2_hit_solo",
    "l2_eviction_per_tenant",
    "share_skew",
];

const POSITIVE: [&str; 13] = [
    "peak_bandwidth_gbps",
    "mem_capacity_bytes",
    "mem_limit_bytes",
    "sm_limit_percent",
    "burst_ms",
    "poll_interval_ms",
    "solo_bandwidth_gbps",
    "pcie_h2d_gbps",
    "pcie_d2h_gbps",
    "pinned_speedup",
    "cache_miss_penalty",
    "nccl_gather_gbps",
    "p2p_gbps",
];

const VIRT_ONLY: [&str; 4] = ["hook_ns", "quota_check_ns", "tracking_ns", "rate_check_ns"];

impl BackendModel {
    /// Canonical name of a parameter, if it exists.
    pub fn param_name(name: &str) -> Option<&'static str> {
        Self::PARAMS.iter().copied().find(|p| *p == name)
    }

    /// Loads the profile for `mode`. Every parameter must be present.
    pub fn from_calibration(cal: &Calibration, mode: Mode, rng_seed: u64) -> Result<BackendModel, SimError> {
        let mut m = BackendModel::zeroed(mode);
        m.rng_seed = rng_seed;
        let mut seen = 0;
        for (name, value) in cal.sim_params(mode) {
            *m.slot(name).expect("calibration keys are validated") = value;
            seen += 1;
        }
        if seen != Self::PARAMS.len() {
            let missing: Vec<&str> = Self::PARAMS
                .iter()
                .copied()
                .filter(|p| cal.sim_param(mode, p).is_none())
                .collect();
            return Err(SimError::Model(format!(
                "profile `{mode}` is missing: {}",
                missing.join(", ")
            )));
        }
        m.validate()?;
        Ok(m)
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<(), SimError> {
        let slot = self
            .slot(name)
            .ok_or_else(|| SimError::Model(format!("unknown parameter `{name}`")))?;
        *slot = value;
        Ok(())
    }

    pub fn mem_capacity(&self) -> u64 {
        self.mem_capacity_bytes as u64
    }

    pub fn mem_limit(&self) -> u64 {
        self.mem_limit_bytes as u64
    }

    pub fn quota_reserved(&self) -> u64 {
        self.quota_reserved_bytes as u64
    }

    pub fn flag(&self, name: &str) -> bool {
        self.get(name).is_some_and(|v| v != 0.0)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::Model(format!("{} profile: {msg}", self.mode)));
        for name in Self::PARAMS {
            let v = self.get(name).unwrap_or(f64::NAN);
            if !v.is_finite() || v < 0.0 {
                return bad(format!("{name} = {v} must be finite and non-negative"));
            }
        }
        for name in POSITIVE {
            if self.get(name) == Some(0.0) {
                return bad(format!("{name} must be positive"));
            }
        }
        for name in FRACTIONS {
            if self.get(name).unwrap_or(0.0) > 1.0 {
                return bad(format!("{name} must be in [0, 1]"));
            }
        }
        for name in FLAGS {
            let v = self.get(name).unwrap_or(0.0);
            if v != 0.0 && v != 1.0 {
                return bad(format!("{name} must be 0 or 1"));
            }
        }
        for name in ["mem_capacity_bytes", "mem_limit_bytes", "quota_reserved_bytes"] {
            if self.get(name).unwrap_or(0.0).fract() != 0.0 {
                return bad(format!("{name} must be a whole number of bytes"));
            }
        }
        if self.mem_limit_bytes > self.mem_capacity_bytes {
            return bad("mem_limit_bytes exceeds mem_capacity_bytes".into());
        }
        if self.quota_reserved_bytes >= self.mem_limit_bytes {
            return bad("quota_reserved_bytes must be below mem_limit_bytes".into());
        }
        if self.sm_limit_percent > 100.0 {
            return bad("sm_limit_percent must be in (0, 100]".into());
        }
        if !self.mode.is_software() {
            for name in VIRT_ONLY.iter().chain(["shared_region_us", "context_init_us", "pool_query_us", "lock_mean_us", "lock_jitter_us", "util_overshoot", "poll_cost_us"].iter()) {
                if self.get(name) != Some(0.0) {
                    return bad(format!("{name} must be 0 for a mode without an interposer"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shipped(mode: Mode) -> BackendModel {
        BackendModel::from_calibration(&Calibration::builtin(), mode, 0).unwrap()
    }

    #[test]
    fn shipped_profiles_are_complete_and_valid() {
        for m in Mode::ALL {
            shipped(m).validate().unwrap();
        }
    }

    #[test]
    fn interposer_costs_zero_without_interposer() {
        for m in [Mode::Native, Mode::Mig] {
            let p = shipped(m);
            assert_eq!((p.hook_ns, p.quota_check_ns, p.tracking_ns, p.rate_check_ns), (0.0, 0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn latency_parameters_are_ordered() {
        let [native, hami, fcsp, mig] = Mode::ALL.map(shipped);
        let latency = [
            "base_launch_us", "base_alloc_us", "base_free_us", "base_context_us", "base_call_us",
            "base_pool_alloc_us", "base_memcpy_us", "hook_ns", "rate_check_ns", "quota_check_ns",
            "tracking_ns", "shared_region_us", "context_init_us", "pool_query_us", "heap_scan_ns",
            "map_us_per_gib", "lock_mean_us", "poll_cost_us", "nccl_allreduce_us", "ctx_switch_us",
            "preempt_ms", "detect_us", "recover_us",
        ];
        for name in latency {
            let v = |p: &BackendModel| p.get(name).unwrap();
            assert!(
                v(&native) <= v(&mig) && v(&mig) <= v(&fcsp) && v(&fcsp) <= v(&hami),
                "{name}: native {} mig {} fcsp {} hami {}",
                v(&native), v(&mig), v(&fcsp), v(&hami)
            );
        }
    }

    #[test]
    fn missing_parameter_is_reported() {
        let cal = Calibration::parse("sim.hami.hook_ns = 1", "t").unwrap();
        let err = BackendModel::from_calibration(&cal, Mode::Hami, 0).unwrap_err();
        assert!(err.to_string().contains("base_launch_us"));
    }

    #[test]
    fn validation_rejects_bad_values() {
        let mut p = shipped(Mode::Hami);
        p.mem_limit_bytes = p.mem_capacity_bytes * 2.0;
        assert!(p.validate().is_err());
        let mut p = shipped(Mode::Native);
        p.hook_ns = 5.0;
        assert!(p.validate().is_err());
        let mut p = shipped(Mode::Fcsp);
        p.set("crash_on_fault", 0.5).unwrap();
        assert!(p.validate().is_err());
        assert!(p.set("warp_speed", 1.0).is_err());
    }
}
