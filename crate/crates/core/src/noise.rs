//! Readout ports and SQL-normalized per-port noise records shared by the
//! exact and closed-form engines.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::constants::HBAR;

/// Which output field's amplitude quadrature is detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Port {
    /// Light reflected from the input coupler.
    Reflection,
    /// Light transmitted through the movable end mirror.
    Transmission,
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Port::Reflection => "reflection",
            Port::Transmission => "transmission",
        })
    }
}

impl FromStr for Port {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ref" | "reflection" => Ok(Port::Reflection),
            "tra" | "transmission" => Ok(Port::Transmission),
            other => Err(format!("unknown port `{other}` (expected ref or tra)")),
        }
    }
}

/// Free-mass standard quantum limit for force, `2 hbar m omega^2` [N^2/Hz].
pub fn standard_quantum_limit(mass: f64, omega: f64) -> f64 {
    2.0 * HBAR * mass * omega * omega
}

/// Force-noise power spectral densities normalized by the SQL, split by the
/// input field that produces them.
///
/// `b1`/`b2` are the input amplitude/phase quadratures, `d1`/`d2` the vacuum
/// entering through the end mirror. `b1` and `b2` are given per unit vacuum
/// level; `total` applies the epsilon weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedSpectrum {
    pub b1: f64,
    pub b2: f64,
    pub d1: f64,
    pub d2: f64,
    pub total: f64,
}

impl NormalizedSpectrum {
    /// Builds the record with `total = eps1 b1 + eps2 b2 + d1 + d2`.
    pub fn weighted(b1: f64, b2: f64, d1: f64, d2: f64, eps1: f64, eps2: f64) -> Self {
        NormalizedSpectrum {
            b1,
            b2,
            d1,
            d2,
            total: eps1 * b1 + eps2 * b2 + d1 + d2,
        }
    }

    /// End-mirror vacuum contribution `d1 + d2`.
    pub fn d(&self) -> f64 {
        self.d1 + self.d2
    }

    /// Same record as amplitude spectral densities (square roots).
    pub fn amplitude(&self) -> Self {
        NormalizedSpectrum {
            b1: self.b1.sqrt(),
            b2: self.b2.sqrt(),
            d1: self.d1.sqrt(),
            d2: self.d2.sqrt(),
            total: self.total.sqrt(),
        }
    }
}
