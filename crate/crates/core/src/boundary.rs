//! Steering boundaries in the `(eta, delta)` plane.
//!
//! Each manipulation scheme has a closed-form curve `delta(eta)` on which one
//! direction's quantifier drops to zero. Bisection on the unclamped log-ratio
//! gives an independent numeric route to the same curves. Sweeps over `eta`
//! and classified region maps are built on top.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::schemes::{check_delta, check_v, Scheme, SchemeParams};
use crate::steering::{classify, log_ratio, Direction, Regime, Tolerances};

pub const DEFAULT_CURVE_POINTS: usize = 512;
pub const BISECTION_XTOL: f64 = 1e-12;
pub const BISECTION_MAX_ITER: usize = 200;

/// Default upper end of the noise axis for region maps.
pub fn default_delta_max(scheme: Scheme) -> f64 {
    match scheme {
        Scheme::NoisyChannel => 7.0,
        _ => 1.2,
    }
}

/// Label of the closed-form curve for a scheme and direction.
pub fn closed_form_id(scheme: Scheme, direction: Direction) -> Result<&'static str> {
    use Direction::*;
    use Scheme::*;
    Ok(match (scheme, direction) {
        (Pure, _) => return Err(domain("the pure TMSS has no steering boundary")),
        (NoiseOnA, AtoB) => "delta=1",
        (NoiseOnA, BtoA) => "delta=(V-1)(2eta-1)/(1-eta+V*eta)",
        (NoiseOnB, AtoB) => "delta=eta(V-1)/V",
        (NoiseOnB, BtoA) => "delta=2eta-1",
        (NoisyChannel, AtoB) => "delta=eta(V-1)/(V(1-eta))",
        (NoisyChannel, BtoA) => "delta=(2eta-1)/(1-eta)",
    })
}

fn check_open_v(v: f64) -> Result<()> {
    if v.is_finite() && v > 1.0 {
        Ok(())
    } else {
        Err(domain(format!("boundaries need a squeezed state (v > 1), got {v}")))
    }
}

/// Noise level at which `direction`'s quantifier reaches zero at this `eta`.
///
/// Below the returned `delta` the direction steers, above it it does not.
/// `None` when the crossing would need negative noise.
pub fn analytic_boundary(
    scheme: Scheme,
    direction: Direction,
    v: f64,
    eta: f64,
) -> Result<Option<f64>> {
    use Direction::*;
    use Scheme::*;
    check_open_v(v)?;
    if !(eta > 0.0 && eta < 1.0) {
        return Err(domain(format!("boundary needs 0 < eta < 1, got {eta}")));
    }
    let delta = match (scheme, direction) {
        (Pure, _) => return Err(domain("the pure TMSS has no steering boundary")),
        (NoiseOnA, AtoB) => 1.0,
        (NoiseOnA, BtoA) => (v - 1.0) * (2.0 * eta - 1.0) / (1.0 - eta + v * eta),
        (NoiseOnB, AtoB) => eta * (v - 1.0) / v,
        (NoiseOnB, BtoA) => 2.0 * eta - 1.0,
        (NoisyChannel, AtoB) => eta * (v - 1.0) / (v * (1.0 - eta)),
        (NoisyChannel, BtoA) => (2.0 * eta - 1.0) / (1.0 - eta),
    };
    Ok((delta >= 0.0).then_some(delta))
}

/// Inverse of [`analytic_boundary`]: the transmission at which `direction`'s
/// quantifier crosses zero for fixed noise `delta`.
///
/// `None` if there is no crossing in `0 < eta < 1`. Scheme I's A->B quantifier
/// has no crossing in `eta` at all: its sign is set by `1 - delta_A` alone.
pub fn analytic_crossing_eta(
    scheme: Scheme,
    direction: Direction,
    v: f64,
    delta: f64,
) -> Result<Option<f64>> {
    use Direction::*;
    use Scheme::*;
    check_open_v(v)?;
    check_delta(delta)?;
    let eta = match (scheme, direction) {
        (Pure, _) => return Err(domain("the pure TMSS has no steering boundary")),
        (NoiseOnA, AtoB) => return Ok(None),
        (NoiseOnA, BtoA) => (delta + v - 1.0) / ((v - 1.0) * (2.0 - delta)),
        (NoiseOnB, AtoB) => delta * v / (v - 1.0),
        (NoiseOnB, BtoA) => 0.5 * (1.0 + delta),
        (NoisyChannel, AtoB) => delta * v / (v - 1.0 + delta * v),
        (NoisyChannel, BtoA) => (1.0 + delta) / (2.0 + delta),
    };
    Ok((eta > 0.0 && eta < 1.0).then_some(eta))
}

/// Point where the A->B and B->A boundaries meet and the one-way direction
/// flips. Only schemes II and III have one.
pub fn crossover_point(scheme: Scheme, v: f64) -> Result<(f64, f64)> {
    check_open_v(v)?;
    let eta = v / (1.0 + v);
    match scheme {
        Scheme::NoiseOnB => Ok((eta, (v - 1.0) / (v + 1.0))),
        Scheme::NoisyChannel => Ok((eta, v - 1.0)),
        other => Err(domain(format!("scheme {other} has no crossover point"))),
    }
}

/// Plain bisection for a sign change of `f` on `[lo, hi]`.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, xtol: f64, max_iter: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let (bracket_lo, bracket_hi) = (lo, hi);
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo.is_finite() && f_hi.is_finite()) || (f_lo < 0.0) == (f_hi < 0.0) {
        return Err(Error::NoBracket {
            lo: bracket_lo,
            hi: bracket_hi,
        });
    }
    for _ in 0..max_iter {
        if hi - lo < xtol {
            return Ok(0.5 * (lo + hi));
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::MaxIterations(max_iter))
}

/// Transmission at which the unclamped log-ratio of `direction` crosses zero,
/// found by bisection on `bracket`.
pub fn numeric_zero_crossing(
    scheme: Scheme,
    direction: Direction,
    v: f64,
    delta: f64,
    bracket: (f64, f64),
) -> Result<f64> {
    let (lo, hi) = bracket;
    if !(0.0 <= lo && lo < hi && hi <= 1.0) {
        return Err(domain(format!("invalid eta bracket [{lo}, {hi}]")));
    }
    check_v(v)?;
    check_delta(delta)?;
    let ratio = |eta: f64| {
        SchemeParams {
            scheme,
            v,
            eta,
            delta,
        }
        .cm()
        .map(|cm| log_ratio(&cm, direction))
        .unwrap_or(f64::NAN)
    };
    bisect(ratio, lo, hi, BISECTION_XTOL, BISECTION_MAX_ITER)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve {
    pub scheme: Scheme,
    pub direction: Direction,
    /// `(eta, delta)` pairs in increasing `eta`.
    pub points: Vec<(f64, f64)>,
    pub closed_form_id: String,
}

/// Samples the closed-form boundary at `n_points` interior transmissions
/// `eta_k = k / (n_points + 1)`, dropping points that would need negative noise.
pub fn boundary_curve(
    scheme: Scheme,
    direction: Direction,
    v: f64,
    n_points: usize,
) -> Result<BoundaryCurve> {
    let closed_form_id = closed_form_id(scheme, direction)?.to_string();
    if n_points == 0 {
        return Err(domain("boundary curve needs at least one point"));
    }
    let mut points = Vec::with_capacity(n_points);
    for k in 1..=n_points {
        let eta = k as f64 / (n_points + 1) as f64;
        if let Some(delta) = analytic_boundary(scheme, direction, v, eta)? {
            points.push((eta, delta));
        }
    }
    Ok(BoundaryCurve {
        scheme,
        direction,
        points,
        closed_form_id,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eta: f64,
    pub g_a_to_b: f64,
    pub g_b_to_a: f64,
    pub regime: Regime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub scheme: Scheme,
    pub v: f64,
    pub delta: f64,
    pub rows: Vec<SweepRow>,
}

/// Evenly spaced transmission grid, endpoints included.
pub fn eta_grid(eta_from: f64, eta_to: f64, steps: usize) -> Result<Vec<f64>> {
    if !(0.0 <= eta_from && eta_from < eta_to && eta_to <= 1.0) {
        return Err(domain(format!(
            "sweep needs 0 <= eta_from < eta_to <= 1, got [{eta_from}, {eta_to}]"
        )));
    }
    if steps < 2 {
        return Err(domain(format!("sweep needs at least 2 steps, got {steps}")));
    }
    let span = eta_to - eta_from;
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            if i + 1 == steps {
                eta_to
            } else {
                eta_from + span * (i as f64 / last)
            }
        })
        .collect())
}

pub fn sweep_eta(
    scheme: Scheme,
    v: f64,
    delta: f64,
    eta_from: f64,
    eta_to: f64,
    steps: usize,
) -> Result<SweepResult> {
    SchemeParams::new(scheme, v, eta_from, delta)?;
    let etas = eta_grid(eta_from, eta_to, steps)?;
    let tol = Tolerances::default();
    let rows = etas
        .par_iter()
        .map(|&eta| {
            let cm = SchemeParams {
                scheme,
                v,
                eta,
                delta,
            }
            .cm()?;
            let r = classify(&cm, tol)?;
            Ok(SweepRow {
                eta,
                g_a_to_b: r.g_a_to_b,
                g_b_to_a: r.g_b_to_a,
                regime: r.regime,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        scheme,
        v,
        delta,
        rows,
    })
}

/// Regime classification on a grid of cell centers over
/// `eta in [0, 1]` x `delta in [0, delta_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMap {
    pub scheme: Scheme,
    pub v: f64,
    pub delta_max: f64,
    pub eta_centers: Vec<f64>,
    pub delta_centers: Vec<f64>,
    /// Row-major with `eta` as the outer index.
    cells: Vec<Regime>,
}

impl RegionMap {
    pub fn get(&self, eta_index: usize, delta_index: usize) -> Regime {
        self.cells[eta_index * self.delta_centers.len() + delta_index]
    }

    /// Regime of the cell that contains `(eta, delta)`.
    pub fn cell_containing(&self, eta: f64, delta: f64) -> Option<Regime> {
        if !(0.0..=1.0).contains(&eta) || !(0.0..=self.delta_max).contains(&delta) {
            return None;
        }
        let ne = self.eta_centers.len();
        let nd = self.delta_centers.len();
        let i = ((eta * ne as f64) as usize).min(ne - 1);
        let j = ((delta / self.delta_max * nd as f64) as usize).min(nd - 1);
        Some(self.get(i, j))
    }

    /// `(eta, delta, regime)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64, Regime)> + '_ {
        let nd = self.delta_centers.len();
        self.cells.iter().enumerate().map(move |(k, &regime)| {
            (self.eta_centers[k / nd], self.delta_centers[k % nd], regime)
        })
    }

    pub fn contains_regime(&self, regime: Regime) -> bool {
        self.cells.contains(&regime)
    }
}

pub fn region_map(
    scheme: Scheme,
    v: f64,
    eta_steps: usize,
    delta_steps: usize,
    delta_max: f64,
) -> Result<RegionMap> {
    check_v(v)?;
    if eta_steps < 2 || delta_steps < 2 {
        return Err(domain(format!(
            "region map needs at least 2x2 cells, got {eta_steps}x{delta_steps}"
        )));
    }
    if !(delta_max.is_finite() && delta_max > 0.0) {
        return Err(domain(format!("delta_max must be > 0, got {delta_max}")));
    }
    let centers = |n: usize, hi: f64| -> Vec<f64> {
        (0..n).map(|i| (i as f64 + 0.5) / n as f64 * hi).collect()
    };
    let eta_centers = centers(eta_steps, 1.0);
    let delta_centers = centers(delta_steps, delta_max);
    let tol = Tolerances::default();
    let cells = (0..eta_steps * delta_steps)
        .into_par_iter()
        .map(|k| {
            let cm = SchemeParams {
                scheme,
                v,
                eta: eta_centers[k / delta_steps],
                delta: delta_centers[k % delta_steps],
            }
            .cm()?;
            Ok(classify(&cm, tol)?.regime)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RegionMap {
        scheme,
        v,
        delta_max,
        eta_centers,
        delta_centers,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const V: f64 = 1.251;

    #[test]
    fn scheme_i_bob_boundary_at_reference_noise() {
        let delta = analytic_boundary(Scheme::NoiseOnA, Direction::BtoA, V, 0.766)
            .unwrap()
            .unwrap();
        assert!((delta - 0.112).abs() < 1e-4, "{delta}");
    }

    #[test]
    fn scheme_i_alice_boundary_is_flat() {
        for eta in [0.01, 0.5, 0.99] {
            assert_eq!(
                analytic_boundary(Scheme::NoiseOnA, Direction::AtoB, V, eta).unwrap(),
                Some(1.0)
            );
        }
    }

    #[test]
    fn scheme_ii_and_iii_values() {
        let d = analytic_boundary(Scheme::NoiseOnB, Direction::AtoB, V, 0.5)
            .unwrap()
            .unwrap();
        assert!((d - 0.251 * 0.5 / 1.251).abs() < 1e-15);
        assert!((d - 0.10032).abs() < 1e-5);
        assert_eq!(
            analytic_boundary(Scheme::NoisyChannel, Direction::BtoA, V, 0.5).unwrap(),
            Some(0.0)
        );
        assert_eq!(
            analytic_boundary(Scheme::NoiseOnB, Direction::BtoA, V, 0.4).unwrap(),
            None
        );
    }

    #[test]
    fn boundary_domain_errors() {
        assert!(analytic_boundary(Scheme::Pure, Direction::AtoB, V, 0.5).is_err());
        assert!(analytic_boundary(Scheme::NoiseOnB, Direction::AtoB, 1.0, 0.5).is_err());
        assert!(analytic_boundary(Scheme::NoiseOnB, Direction::AtoB, V, 0.0).is_err());
        assert!(analytic_boundary(Scheme::NoiseOnB, Direction::AtoB, V, 1.0).is_err());
    }

    #[test]
    fn crossovers() {
        let (eta, delta) = crossover_point(Scheme::NoiseOnB, V).unwrap();
        assert!((eta - 0.55575).abs() < 1e-5 && (delta - 0.11151).abs() < 1e-5);
        let (eta, delta) = crossover_point(Scheme::NoisyChannel, V).unwrap();
        assert!((eta - 0.55575).abs() < 1e-5 && (delta - 0.251).abs() < 1e-12);
        let (eta, delta) = crossover_point(Scheme::NoisyChannel, 1.0 + 1e-12).unwrap();
        assert!((eta - 0.5).abs() < 1e-11 && delta.abs() < 1e-11);
        assert!(crossover_point(Scheme::NoiseOnA, V).is_err());
        assert!(crossover_point(Scheme::Pure, V).is_err());
    }

    #[test]
    fn bisection_finds_reference_crossings() {
        let eta = numeric_zero_crossing(Scheme::NoiseOnB, Direction::BtoA, V, 0.112, (0.4, 0.7))
            .unwrap();
        assert!((eta - 0.556).abs() < 1e-10);
        let eta = numeric_zero_crossing(Scheme::NoiseOnB, Direction::AtoB, V, 0.112, (0.4, 0.7))
            .unwrap();
        assert!((eta - 0.112 * V / (V - 1.0)).abs() < 1e-10);
        let eta =
            numeric_zero_crossing(Scheme::NoisyChannel, Direction::AtoB, V, 1.0, (0.7, 0.95))
                .unwrap();
        assert!((eta - V / (2.0 * V - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn bisection_errors() {
        assert!(matches!(
            numeric_zero_crossing(Scheme::NoiseOnB, Direction::BtoA, V, 0.112, (0.6, 0.9)),
            Err(Error::NoBracket { .. })
        ));
        assert!(matches!(
            bisect(|x| x - 0.3, 0.0, 1.0, 1e-300, 5),
            Err(Error::MaxIterations(5))
        ));
        assert!(numeric_zero_crossing(Scheme::NoiseOnB, Direction::BtoA, V, 0.1, (0.7, 0.4)).is_err());
    }

    #[test]
    fn curve_points_are_in_range() {
        let c = boundary_curve(Scheme::NoiseOnB, Direction::BtoA, V, DEFAULT_CURVE_POINTS).unwrap();
        assert_eq!(c.closed_form_id, "delta=2eta-1");
        assert!(c.points.iter().all(|&(e, d)| (0.5..1.0).contains(&e) && d >= 0.0));
        assert!(c.points.windows(2).all(|w| w[0].0 < w[1].0));
        assert!(boundary_curve(Scheme::Pure, Direction::BtoA, V, 10).is_err());
    }

    #[test]
    fn sweep_grid_and_errors() {
        let s = sweep_eta(Scheme::NoiseOnA, V, 0.0, 0.0, 1.0, 101).unwrap();
        assert_eq!(s.rows.len(), 101);
        assert_eq!(s.rows[0].eta, 0.0);
        assert_eq!(s.rows[100].eta, 1.0);
        assert!(s.rows.windows(2).all(|w| w[0].eta < w[1].eta));
        assert!(sweep_eta(Scheme::NoiseOnA, V, 0.0, 0.0, 1.0, 1).is_err());
        assert!(sweep_eta(Scheme::NoiseOnA, V, 0.0, 0.5, 0.5, 10).is_err());
        assert!(sweep_eta(Scheme::NoiseOnA, V, -0.1, 0.0, 1.0, 10).is_err());
    }

    #[test]
    fn region_map_cells() {
        let m = region_map(Scheme::NoiseOnA, V, 200, 240, 1.2).unwrap();
        // analytic B->A boundary at eta = 0.9 is 0.1638
        assert_eq!(m.cell_containing(0.9, 0.112), Some(Regime::TwoWay));
        let wide = region_map(Scheme::NoiseOnA, V, 200, 200, 2.0).unwrap();
        assert_eq!(wide.cell_containing(0.9, 1.5), Some(Regime::NoSteering));
        let m = region_map(Scheme::NoisyChannel, V, 200, 200, 7.0).unwrap();
        assert_eq!(m.cell_containing(0.75, 1.0), Some(Regime::OneWayBtoA));
        assert!(region_map(Scheme::NoiseOnA, V, 1, 1, 1.2).is_err());
        assert!(region_map(Scheme::NoiseOnA, V, 10, 10, 0.0).is_err());
    }

    #[test]
    fn region_map_iteration_is_row_major() {
        let m = region_map(Scheme::NoiseOnB, V, 3, 4, 1.2).unwrap();
        let cells: Vec<_> = m.iter().collect();
        assert_eq!(cells.len(), 12);
        assert_eq!(cells[1].0, cells[0].0);
        assert!(cells[1].1 > cells[0].1);
        assert!(cells[4].0 > cells[3].0);
    }
}
