//! Plot-ready CSV exports. Every writer returns the schema it produced so
//! run manifests can record and later verify it.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::CurvatureProfile;
use crate::propagation::{ErrorCurve, ScalingFit, TimeGrid};
use crate::pulse::{LinearWaveform, PulseShape};

/// Column layout and row count of one produced file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CsvSchema {
    pub columns: Vec<String>,
    pub rows: usize,
}

fn open(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    Ok(csv::Writer::from_path(path)?)
}

/// `t, G1..Gd` rows of an error curve.
pub fn write_curve_csv(path: &Path, curve: &ErrorCurve) -> Result<CsvSchema> {
    let mut w = open(path)?;
    let d = curve.d();
    let mut columns = vec!["t".to_string()];
    columns.extend((1..=d).map(|i| format!("G{i}")));
    w.write_record(&columns)?;
    for (k, p) in curve.points().iter().enumerate() {
        let mut row = vec![format!("{:.17e}", curve.grid().time(k))];
        row.extend(p.iter().map(|v| format!("{v:.17e}")));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(CsvSchema {
        columns,
        rows: curve.points().len(),
    })
}

/// `t, kappa1..kappa_{d-1}` rows; flagged samples export as `nan`.
pub fn write_profile_csv(path: &Path, profile: &CurvatureProfile) -> Result<CsvSchema> {
    let mut w = open(path)?;
    let m = profile.d() - 1;
    let mut columns = vec!["t".to_string()];
    columns.extend((1..=m).map(|i| format!("kappa{i}")));
    w.write_record(&columns)?;
    for (k, entry) in profile.kappas().iter().enumerate() {
        let mut row = vec![format!("{:.17e}", profile.grid().time(k))];
        match entry {
            Some(v) => row.extend(v.iter().map(|x| format!("{x:.17e}"))),
            None => row.extend(std::iter::repeat_n("nan".to_string(), m)),
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(CsvSchema {
        columns,
        rows: profile.kappas().len(),
    })
}

/// Side-by-side closed-form and numeric curvatures:
/// `t, omega, domega, kappa1_analytic.., kappa1_numeric..`.
pub fn write_curvature_comparison_csv(
    path: &Path,
    grid: &TimeGrid,
    pulse: &PulseShape,
    analytic: &[[f64; 5]],
    numeric: &CurvatureProfile,
) -> Result<CsvSchema> {
    let mut w = open(path)?;
    let mut columns = vec!["t".to_string(), "omega".to_string(), "domega".to_string()];
    columns.extend((1..=5).map(|i| format!("kappa{i}_analytic")));
    columns.extend((1..=5).map(|i| format!("kappa{i}_numeric")));
    w.write_record(&columns)?;
    for k in 0..=grid.steps() {
        let t = grid.time(k);
        let mut row = vec![
            format!("{t:.17e}"),
            format!("{:.17e}", pulse.value(t)),
            format!("{:.17e}", pulse.slope(t)),
        ];
        row.extend(analytic[k].iter().map(|v| format!("{v:.17e}")));
        match numeric.at(k) {
            Some(v) => row.extend(v.iter().map(|x| format!("{x:.17e}"))),
            None => row.extend(std::iter::repeat_n("nan".to_string(), 5)),
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(CsvSchema {
        columns,
        rows: grid.steps() + 1,
    })
}

/// `epsilon, infidelity, infidelity_phase_min` rows of a noise sweep.
pub fn write_sweep_csv(path: &Path, fit: &ScalingFit) -> Result<CsvSchema> {
    let mut w = open(path)?;
    let columns = vec![
        "epsilon".to_string(),
        "infidelity".to_string(),
        "infidelity_phase_min".to_string(),
    ];
    w.write_record(&columns)?;
    for p in &fit.points {
        w.write_record(&[
            format!("{:.17e}", p.epsilon),
            format!("{:.17e}", p.infidelity),
            format!("{:.17e}", p.infidelity_phase_min),
        ])?;
    }
    w.flush()?;
    Ok(CsvSchema {
        columns,
        rows: fit.points.len(),
    })
}

/// `t, omega, domega` samples of a pulse on a grid.
pub fn write_waveform_csv(path: &Path, pulse: &PulseShape, grid: &TimeGrid) -> Result<CsvSchema> {
    let mut w = open(path)?;
    let columns = vec!["t".to_string(), "omega".to_string(), "domega".to_string()];
    w.write_record(&columns)?;
    for k in 0..=grid.steps() {
        let t = grid.time(k);
        w.write_record(&[
            format!("{t:.17e}"),
            format!("{:.17e}", pulse.value(t)),
            format!("{:.17e}", pulse.slope(t)),
        ])?;
    }
    w.flush()?;
    Ok(CsvSchema {
        columns,
        rows: grid.steps() + 1,
    })
}

/// `t, p1, p2, p3` rows of a 3D projection of a curve.
pub fn write_projection_csv(
    path: &Path,
    grid: &TimeGrid,
    rows: &[[f64; 3]],
) -> Result<CsvSchema> {
    let mut w = open(path)?;
    let columns = vec![
        "t".to_string(),
        "p1".to_string(),
        "p2".to_string(),
        "p3".to_string(),
    ];
    w.write_record(&columns)?;
    for (k, r) in rows.iter().enumerate() {
        w.write_record(&[
            format!("{:.17e}", grid.time(k)),
            format!("{:.17e}", r[0]),
            format!("{:.17e}", r[1]),
            format!("{:.17e}", r[2]),
        ])?;
    }
    w.flush()?;
    Ok(CsvSchema {
        columns,
        rows: rows.len(),
    })
}

/// Reads a waveform CSV with `t` and `omega` columns (header required)
/// into a piecewise-linear pulse.
pub fn read_waveform_csv(path: &Path) -> Result<LinearWaveform> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
    };
    let (ti, oi) = match (find("t"), find("omega")) {
        (Some(t), Some(o)) => (t, o),
        _ => {
            return Err(crate::error::Error::invalid(
                "waveform CSV needs 't' and 'omega' columns",
            ))
        }
    };
    let mut times = Vec::new();
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record?;
        let parse = |idx: usize| -> Result<f64> {
            record
                .get(idx)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| {
                    crate::error::Error::invalid(format!(
                        "malformed waveform row: {:?}",
                        record
                    ))
                })
        };
        times.push(parse(ti)?);
        values.push(parse(oi)?);
    }
    LinearWaveform::new(times, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::{PulseSegment, SquarePulseSequence};

    #[test]
    fn waveform_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("wave.csv");
        let pulse = PulseShape::Square(
            SquarePulseSequence::new(
                vec![PulseSegment { amplitude: 0.8, duration: 2.0 }],
                1,
            )
            .unwrap(),
        );
        let grid = TimeGrid::new(2.0, 10).unwrap();
        let schema = write_waveform_csv(&path, &pulse, &grid).unwrap();
        assert_eq!(schema.rows, 11);
        let wave = read_waveform_csv(&path).unwrap();
        assert!((wave.duration() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn missing_columns_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(read_waveform_csv(&path).is_err());
    }
}
