//! Gaussian steering quantifiers and steering-regime classification.
//!
//! For a two-mode state the quantifier for Alice steering Bob is
//! `G(A->B) = max{0, 1/2 ln(det sigma_A / det sigma_AB)}`, and symmetrically
//! for Bob. In the standard form this reduces to `ln(alpha / (alpha*beta - gamma^2))`.
//! Values are in nats.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gaussian::{CovarianceMatrix, GeneralCM, StandardFormCM, DEFAULT_PHYSICAL_TOL};

/// A quantifier at or below this counts as zero.
pub const DEFAULT_STEERING_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    AtoB,
    BtoA,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::AtoB, Direction::BtoA];

    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::AtoB => "AtoB",
            Direction::BtoA => "BtoA",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    TwoWay,
    OneWayAtoB,
    OneWayBtoA,
    NoSteering,
}

impl Regime {
    pub const ALL: [Regime; 4] = [
        Regime::TwoWay,
        Regime::OneWayAtoB,
        Regime::OneWayBtoA,
        Regime::NoSteering,
    ];

    pub fn from_flags(a_steers_b: bool, b_steers_a: bool) -> Self {
        match (a_steers_b, b_steers_a) {
            (true, true) => Regime::TwoWay,
            (true, false) => Regime::OneWayAtoB,
            (false, true) => Regime::OneWayBtoA,
            (false, false) => Regime::NoSteering,
        }
    }

    pub fn a_steers_b(&self) -> bool {
        matches!(self, Regime::TwoWay | Regime::OneWayAtoB)
    }

    pub fn b_steers_a(&self) -> bool {
        matches!(self, Regime::TwoWay | Regime::OneWayBtoA)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::TwoWay => "TwoWay",
            Regime::OneWayAtoB => "OneWayAtoB",
            Regime::OneWayBtoA => "OneWayBtoA",
            Regime::NoSteering => "NoSteering",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Regime::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown regime `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Slack on `nu_minus >= 1`.
    pub physical: f64,
    /// Quantifiers `<= steering` count as zero.
    pub steering: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            physical: DEFAULT_PHYSICAL_TOL,
            steering: DEFAULT_STEERING_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteeringResult {
    pub g_a_to_b: f64,
    pub g_b_to_a: f64,
    pub det_a: f64,
    pub det_b: f64,
    pub det_ab: f64,
    pub regime: Regime,
}

/// Unclamped `1/2 ln(det sigma_X / det sigma_AB)` for the steering party X.
///
/// Smooth and sign-changing across steering boundaries, unlike the clamped
/// quantifier. No physicality check.
pub fn log_ratio(cm: &StandardFormCM, direction: Direction) -> f64 {
    let steerer = match direction {
        Direction::AtoB => cm.alpha,
        Direction::BtoA => cm.beta,
    };
    (steerer / cm.reduced_det().abs()).ln()
}

pub fn steering(cm: &StandardFormCM, direction: Direction, physical_tol: f64) -> Result<f64> {
    cm.ensure_physical(physical_tol)?;
    Ok(log_ratio(cm, direction).max(0.0))
}

/// `G(A->B)`: Alice's ability to steer Bob.
pub fn steering_a_to_b(cm: &StandardFormCM, physical_tol: f64) -> Result<f64> {
    steering(cm, Direction::AtoB, physical_tol)
}

/// `G(B->A)`: Bob's ability to steer Alice.
pub fn steering_b_to_a(cm: &StandardFormCM, physical_tol: f64) -> Result<f64> {
    steering(cm, Direction::BtoA, physical_tol)
}

/// Both quantifiers plus the regime. A quantifier within `tol.steering` of
/// zero counts as "cannot steer", so exact boundary points are non-steering
/// in that direction.
pub fn classify(cm: &StandardFormCM, tol: Tolerances) -> Result<SteeringResult> {
    cm.ensure_physical(tol.physical)?;
    let g_a_to_b = log_ratio(cm, Direction::AtoB).max(0.0);
    let g_b_to_a = log_ratio(cm, Direction::BtoA).max(0.0);
    let dets = cm.det_blocks();
    Ok(SteeringResult {
        g_a_to_b,
        g_b_to_a,
        det_a: dets.det_a,
        det_b: dets.det_b,
        det_ab: dets.det_ab,
        regime: Regime::from_flags(g_a_to_b > tol.steering, g_b_to_a > tol.steering),
    })
}

/// [`classify`] after projecting an estimated matrix onto the standard form.
pub fn classify_general(
    cm: &GeneralCM,
    structure_tol: f64,
    tol: Tolerances,
) -> Result<SteeringResult> {
    let projection = cm.standard_form_of(structure_tol)?;
    classify(&projection.cm, tol)
}

/// Quantifiers in bits instead of nats.
pub fn nats_to_bits(nats: f64) -> f64 {
    nats / std::f64::consts::LN_2
}

impl SteeringResult {
    pub fn get(&self, direction: Direction) -> f64 {
        match direction {
            Direction::AtoB => self.g_a_to_b,
            Direction::BtoA => self.g_b_to_a,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::schemes::{scheme_i_cm, scheme_ii_cm, scheme_iii_cm, tmss_cm};

    const V: f64 = 1.251;

    #[test]
    fn pure_tmss_steers_both_ways_equally() {
        let cm = tmss_cm(V).unwrap();
        let ab = steering_a_to_b(&cm, DEFAULT_PHYSICAL_TOL).unwrap();
        let ba = steering_b_to_a(&cm, DEFAULT_PHYSICAL_TOL).unwrap();
        assert!((ab - V.ln()).abs() < 1e-12);
        assert_eq!(ab, ba);
        assert_eq!(classify(&cm, Tolerances::default()).unwrap().regime, Regime::TwoWay);
    }

    #[test]
    fn unsqueezed_state_does_not_steer() {
        let cm = tmss_cm(1.0).unwrap();
        assert_eq!(steering_a_to_b(&cm, DEFAULT_PHYSICAL_TOL).unwrap(), 0.0);
        let r = classify(&StandardFormCM::VACUUM, Tolerances::default()).unwrap();
        assert_eq!(r.regime, Regime::NoSteering);
        assert_eq!((r.g_a_to_b, r.g_b_to_a), (0.0, 0.0));
    }

    #[test]
    fn unit_noise_on_alice_blocks_her_steering() {
        for eta in [0.1, 0.3, 0.5, 0.77, 0.99] {
            let cm = scheme_i_cm(V, eta, 1.0).unwrap();
            // alpha == alpha*beta - gamma^2 analytically
            assert!((cm.alpha - cm.reduced_det()).abs() < 1e-14);
            let g = steering_a_to_b(&cm, DEFAULT_PHYSICAL_TOL).unwrap();
            assert!(g < 1e-14, "eta={eta}: {g}");
            assert!(!classify(&cm, Tolerances::default()).unwrap().regime.a_steers_b());
        }
    }

    #[test]
    fn half_transmission_is_bobs_boundary() {
        let cm = scheme_ii_cm(V, 0.5, 0.0).unwrap();
        assert!(steering_b_to_a(&cm, DEFAULT_PHYSICAL_TOL).unwrap() < 1e-15);
    }

    #[test]
    fn noisy_channel_bob_steers() {
        let cm = scheme_iii_cm(V, 0.7, 1.0).unwrap();
        let g = steering_b_to_a(&cm, DEFAULT_PHYSICAL_TOL).unwrap();
        // beta = 0.8757 + 0.6 = 1.4757, r = 1.251*1.4757 - 0.7*0.565001
        let r = V * 1.4757 - 0.7 * (V * V - 1.0);
        assert!((g - (1.4757 / r).ln()).abs() < 1e-12);
        assert!(g > 0.0);
    }

    #[test]
    fn reference_point_regimes() {
        let tol = Tolerances::default();
        let r = classify(&scheme_i_cm(V, 0.3, 0.201).unwrap(), tol).unwrap();
        assert_eq!(r.regime, Regime::OneWayAtoB);
        let r = classify(&scheme_ii_cm(V, 0.8, 0.201).unwrap(), tol).unwrap();
        assert_eq!(r.regime, Regime::OneWayBtoA);
        let r = classify(&scheme_iii_cm(V, 0.7, 1.0).unwrap(), tol).unwrap();
        assert_eq!(r.regime, Regime::OneWayBtoA);
    }

    #[test]
    fn unphysical_input_is_an_error() {
        let cm = StandardFormCM::new(1.0, 1.0, 0.5).unwrap();
        assert!(matches!(
            steering_a_to_b(&cm, DEFAULT_PHYSICAL_TOL),
            Err(Error::UnphysicalState { .. })
        ));
        assert!(classify(&cm, Tolerances::default()).is_err());
    }

    #[test]
    fn classify_general_projects_first() {
        let cm = tmss_cm(V).unwrap().to_general();
        let r = classify_general(&cm, 1e-12, Tolerances::default()).unwrap();
        assert_eq!(r.regime, Regime::TwoWay);
    }

    #[test]
    fn regime_names_round_trip() {
        for r in Regime::ALL {
            assert_eq!(r.as_str().parse::<Regime>().unwrap(), r);
        }
    }

    #[test]
    fn bits_conversion() {
        assert!((nats_to_bits(std::f64::consts::LN_2) - 1.0).abs() < 1e-15);
    }
}
