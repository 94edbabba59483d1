//! The four systems under test.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Bare-metal baseline, no interposer.
    Native,
    /// HAMi-core CUDA interception.
    Hami,
    /// BUD-FCSP SM partitioning.
    Fcsp,
    /// Idealized hardware partition.
    Mig,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Native, Mode::Hami, Mode::Fcsp, Mode::Mig];

    /// CLI / calibration key.
    pub fn key(self) -> &'static str {
        match self {
            Mode::Native => "native",
            Mode::Hami => "hami",
            Mode::Fcsp => "fcsp",
            Mode::Mig => "mig",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Mode::Native => "Native",
            Mode::Hami => "HAMi-core",
            Mode::Fcsp => "BUD-FCSP",
            Mode::Mig => "MIG-Ideal",
        }
    }

    /// Software interposers sit between the application and the driver and
    /// pay hook, quota and limiter costs on intercepted calls.
    pub fn is_software(self) -> bool {
        matches!(self, Mode::Hami | Mode::Fcsp)
    }

    /// Whether configured memory and compute limits are enforced at all.
    /// Native execution has no mechanism to enforce either.
    pub fn enforces_limits(self) -> bool {
        !matches!(self, Mode::Native)
    }

    /// Native results are not expressed as parity with the MIG baseline.
    pub fn reports_mig_parity(self) -> bool {
        !matches!(self, Mode::Native)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown system `{0}` (expected one of: native, hami, fcsp, mig)")]
pub struct UnknownMode(pub String);

impl FromStr for Mode {
    type Err = UnknownMode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.key() == s)
            .ok_or_else(|| UnknownMode(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_round_trip() {
        for m in Mode::ALL {
            assert_eq!(m.key().parse::<Mode>().unwrap(), m);
        }
        assert!("bogus".parse::<Mode>().is_err());
    }
}
