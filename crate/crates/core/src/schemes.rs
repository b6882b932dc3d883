//! Covariance matrices of the ideal TMSS and of the three manipulation schemes.
//!
//! `v` is the single-mode variance `cosh 2r` of the TMSS, `eta` the power
//! transmission of the lossy channel to Bob, and `delta` a noise *variance*
//! in shot-noise units (not a standard deviation):
//!
//! | scheme          | alpha      | beta                         |
//! |-----------------|------------|------------------------------|
//! | I   (noise on A) | `v + delta` | `eta v + (1 - eta)`          |
//! | II  (noise on B) | `v`         | `eta v + (1 - eta) + delta`  |
//! | III (noisy chan.)| `v`         | `eta v + (1 - eta)(delta+1)` |
//!
//! and in every case `gamma = sqrt(eta (v^2 - 1))`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::gaussian::StandardFormCM;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// Lossless, noiseless TMSS; `eta` and `delta` are ignored.
    #[serde(rename = "pure")]
    Pure,
    /// Scheme I: Alice adds noise `delta_A`, Bob's mode crosses a lossy channel.
    #[serde(rename = "1", alias = "noise-on-a")]
    NoiseOnA,
    /// Scheme II: Bob adds noise `delta_B` after the lossy channel.
    #[serde(rename = "2", alias = "noise-on-b")]
    NoiseOnB,
    /// Scheme III: Bob's mode crosses a channel with excess noise `delta_C`.
    #[serde(rename = "3", alias = "noisy-channel")]
    NoisyChannel,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::Pure,
        Scheme::NoiseOnA,
        Scheme::NoiseOnB,
        Scheme::NoisyChannel,
    ];

    pub const MANIPULATIONS: [Scheme; 3] = [Scheme::NoiseOnA, Scheme::NoiseOnB, Scheme::NoisyChannel];

    /// Short CLI name: `pure`, `1`, `2`, `3`.
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Pure => "pure",
            Scheme::NoiseOnA => "1",
            Scheme::NoiseOnB => "2",
            Scheme::NoisyChannel => "3",
        }
    }

    pub fn alias(&self) -> &'static str {
        match self {
            Scheme::Pure => "pure",
            Scheme::NoiseOnA => "noise-on-a",
            Scheme::NoiseOnB => "noise-on-b",
            Scheme::NoisyChannel => "noisy-channel",
        }
    }

    /// Noise levels used for the transmission sweeps at `V = 1.251`.
    pub fn reference_deltas(&self) -> &'static [f64] {
        match self {
            Scheme::Pure => &[0.0],
            Scheme::NoiseOnA | Scheme::NoiseOnB => &[0.0, 0.112, 0.201],
            Scheme::NoisyChannel => &[0.0, 0.251, 1.0],
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.as_str() == s || sc.alias() == s)
            .ok_or_else(|| {
                format!("unknown scheme `{s}` (expected pure|1|2|3|noise-on-a|noise-on-b|noisy-channel)")
            })
    }
}

/// Single-mode TMSS variance used for regression runs (about -3 dB squeezing).
pub const REFERENCE_V: f64 = 1.251;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub scheme: Scheme,
    pub v: f64,
    pub eta: f64,
    pub delta: f64,
}

impl SchemeParams {
    pub fn new(scheme: Scheme, v: f64, eta: f64, delta: f64) -> Result<Self> {
        let p = Self {
            scheme,
            v,
            eta,
            delta,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_v(self.v)?;
        if self.scheme != Scheme::Pure {
            check_eta(self.eta)?;
            check_delta(self.delta)?;
        }
        Ok(())
    }

    pub fn cm(&self) -> Result<StandardFormCM> {
        match self.scheme {
            Scheme::Pure => tmss_cm(self.v),
            Scheme::NoiseOnA => scheme_i_cm(self.v, self.eta, self.delta),
            Scheme::NoiseOnB => scheme_ii_cm(self.v, self.eta, self.delta),
            Scheme::NoisyChannel => scheme_iii_cm(self.v, self.eta, self.delta),
        }
    }
}

pub(crate) fn check_v(v: f64) -> Result<()> {
    if v.is_finite() && v >= 1.0 {
        Ok(())
    } else {
        Err(domain(format!("TMSS variance v must be >= 1, got {v}")))
    }
}

pub(crate) fn check_eta(eta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eta) {
        Ok(())
    } else {
        Err(domain(format!("transmission eta must lie in [0, 1], got {eta}")))
    }
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if delta.is_finite() && delta >= 0.0 {
        Ok(())
    } else {
        Err(domain(format!("noise variance delta must be >= 0, got {delta}")))
    }
}

fn lossy_gamma(v: f64, eta: f64) -> f64 {
    (eta * (v * v - 1.0)).sqrt()
}

fn lossy_beta(v: f64, eta: f64) -> f64 {
    eta * v + (1.0 - eta)
}

pub fn tmss_cm(v: f64) -> Result<StandardFormCM> {
    check_v(v)?;
    StandardFormCM::new(v, v, (v * v - 1.0).sqrt())
}

/// Scheme I: noise of variance `delta_a` on Alice's mode.
pub fn scheme_i_cm(v: f64, eta: f64, delta_a: f64) -> Result<StandardFormCM> {
    check_v(v)?;
    check_eta(eta)?;
    check_delta(delta_a)?;
    StandardFormCM::new(v + delta_a, lossy_beta(v, eta), lossy_gamma(v, eta))
}

/// Scheme II: noise of variance `delta_b` on Bob's mode after the channel.
pub fn scheme_ii_cm(v: f64, eta: f64, delta_b: f64) -> Result<StandardFormCM> {
    check_v(v)?;
    check_eta(eta)?;
    check_delta(delta_b)?;
    StandardFormCM::new(v, lossy_beta(v, eta) + delta_b, lossy_gamma(v, eta))
}

/// Scheme III: excess noise `delta_c` coupled in through the channel loss port.
pub fn scheme_iii_cm(v: f64, eta: f64, delta_c: f64) -> Result<StandardFormCM> {
    check_v(v)?;
    check_eta(eta)?;
    check_delta(delta_c)?;
    StandardFormCM::new(
        v,
        eta * v + (1.0 - eta) * (delta_c + 1.0),
        lossy_gamma(v, eta),
    )
}

/// `cosh 2r` for a squeezed-quadrature variance of `10^(-db/10)`.
///
/// The regression value [`REFERENCE_V`] = 1.251 is not exactly 3 dB
/// (3 dB gives 1.2482); this converter never replaces a user-given `v`.
pub fn v_from_squeezing_db(db: f64) -> Result<f64> {
    if !(db.is_finite() && db > 0.0) {
        return Err(domain(format!("squeezing in dB must be > 0, got {db}")));
    }
    let g = 10f64.powf(db / 10.0);
    Ok(0.5 * (g + 1.0 / g))
}
