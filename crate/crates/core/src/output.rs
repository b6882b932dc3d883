//! CSV serialization shared by the CLI.
//!
//! Floats are written with 17 significant digits so every `f64` survives a
//! text round trip. CSV output is RFC 4180 with `\n` line ends and a header row.

use std::io;

use crate::boundary::{BoundaryCurve, RegionMap, SweepResult};
use crate::steering::nats_to_bits;

/// 17 significant digits in scientific notation, e.g. `2.2389700000000001e-1`.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn csv_writer<W: io::Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

/// One row per sweep point. `with_delta` prepends a `delta` column so several
/// noise levels can share one table.
pub fn write_sweeps_csv<W: io::Write>(
    w: W,
    sweeps: &[SweepResult],
    with_delta: bool,
    bits: bool,
) -> csv::Result<()> {
    let mut w = csv_writer(w);
    let mut header = vec!["eta", "g_a_to_b", "g_b_to_a", "regime"];
    if with_delta {
        header.insert(0, "delta");
    }
    w.write_record(&header)?;
    let unit = |g: f64| if bits { nats_to_bits(g) } else { g };
    for sweep in sweeps {
        for row in &sweep.rows {
            let mut rec = vec![
                format_f64(row.eta),
                format_f64(unit(row.g_a_to_b)),
                format_f64(unit(row.g_b_to_a)),
                row.regime.to_string(),
            ];
            if with_delta {
                rec.insert(0, format_f64(sweep.delta));
            }
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_regions_csv<W: io::Write>(w: W, map: &RegionMap) -> csv::Result<()> {
    let mut w = csv_writer(w);
    w.write_record(["eta", "delta", "regime"])?;
    for (eta, delta, regime) in map.iter() {
        w.write_record([format_f64(eta), format_f64(delta), regime.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Curves followed by an optional `crossover` row.
pub fn write_boundary_csv<W: io::Write>(
    w: W,
    curves: &[BoundaryCurve],
    crossover: Option<(f64, f64)>,
) -> csv::Result<()> {
    let mut w = csv_writer(w);
    w.write_record(["direction", "eta", "delta", "closed_form_id"])?;
    for curve in curves {
        for &(eta, delta) in &curve.points {
            w.write_record([
                curve.direction.as_str(),
                &format_f64(eta),
                &format_f64(delta),
                &curve.closed_form_id,
            ])?;
        }
    }
    if let Some((eta, delta)) = crossover {
        w.write_record(["crossover", &format_f64(eta), &format_f64(delta), "eta=V/(1+V)"])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn seventeen_significant_digits() {
        let s = format_f64(0.1);
        let mantissa = s.split('e').next().unwrap().replace(['.', '-'], "");
        assert_eq!(mantissa.len(), 17);
        assert_eq!(format_f64(0.0).parse::<f64>().unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn text_round_trip_is_exact(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
            prop_assert_eq!(format_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
