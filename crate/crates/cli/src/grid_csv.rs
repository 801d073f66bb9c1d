//! `x,F` CSV files holding a sampled distribution function.

use std::path::Path;

use chancf::GridFunction64;

use crate::{usage, CliError};

/// Relative deviation from `j / J` still accepted as the uniform grid.
const UNIFORM_TOL: f64 = 1e-12;

/// Reads an `x,F` file and returns it on the uniform grid with `points`
/// points.
///
/// Rows must have strictly increasing `x` running from 0 to 1. Files that
/// already sit on the requested uniform grid are taken verbatim; anything
/// else is resampled by linear interpolation, which keeps `F` monotone.
pub fn read_grid_csv(path: &Path, points: usize) -> Result<GridFunction64, CliError> {
    let bad = |msg: String| usage(format!("{}: {msg}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header = reader.headers().map_err(|e| bad(e.to_string()))?;
    if header.len() != 2 || header[0].trim() != "x" || header[1].trim() != "F" {
        return Err(bad("header must be `x,F`".into()));
    }
    let mut xs = Vec::new();
    let mut fs = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let parse = |i: usize| -> Result<f64, CliError> {
            record
                .get(i)
                .and_then(|v| v.trim().parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("row {}: malformed number", line + 2)))
        };
        xs.push(parse(0)?);
        fs.push(parse(1)?);
    }
    if xs.len() < 2 {
        return Err(bad("need at least two rows".into()));
    }
    if xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(bad("x must be strictly increasing".into()));
    }
    if xs[0] != 0.0 || *xs.last().expect("non-empty") != 1.0 {
        return Err(bad("x must run from 0 to 1".into()));
    }

    let intervals = (xs.len() - 1) as f64;
    let uniform = xs.len() == points
        && xs
            .iter()
            .enumerate()
            .all(|(j, &x)| (x - j as f64 / intervals).abs() <= UNIFORM_TOL);
    if uniform {
        return Ok(GridFunction64::new(fs)?);
    }
    let mut seg = 0;
    let values = (0..points)
        .map(|j| {
            let x = j as f64 / (points - 1) as f64;
            while seg + 2 < xs.len() && xs[seg + 1] < x {
                seg += 1;
            }
            let t = ((x - xs[seg]) / (xs[seg + 1] - xs[seg])).clamp(0.0, 1.0);
            fs[seg] + t * (fs[seg + 1] - fs[seg])
        })
        .collect();
    Ok(GridFunction64::new(values)?)
}

pub fn write_grid_csv(path: &Path, f: &GridFunction64) -> Result<(), CliError> {
    let fail = |e: csv::Error| usage(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(fail)?;
    w.write_record(["x", "F"]).map_err(fail)?;
    for (x, v) in f.grid().iter().zip(f.values()) {
        w.write_record([x.to_string(), v.to_string()]).map_err(fail)?;
    }
    w.flush().map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(())
}
