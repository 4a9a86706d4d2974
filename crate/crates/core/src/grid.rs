//! Evaluation grids: `geom:start:stop:count`, `lin:start:stop:count`, or an
//! explicit comma-separated list.

use crate::error::{Error, Result};

/// `count` geometrically spaced points from `start` to `stop`, endpoints exact.
pub fn geometric(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    check_spec(start, stop, count)?;
    if !(start > 0.0) {
        return Err(Error::invalid(format!(
            "geometric grid needs a positive start, got {start}"
        )));
    }
    let ratio = (stop / start).ln();
    Ok(spaced(start, stop, count, |f| start * (ratio * f).exp()))
}

/// `count` evenly spaced points from `start` to `stop`, endpoints exact.
pub fn linear(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    check_spec(start, stop, count)?;
    Ok(spaced(start, stop, count, |f| start + (stop - start) * f))
}

fn check_spec(start: f64, stop: f64, count: usize) -> Result<()> {
    if !(start.is_finite() && stop.is_finite()) {
        return Err(Error::invalid("grid endpoints must be finite"));
    }
    if count == 0 {
        return Err(Error::invalid("grid needs at least one point"));
    }
    if count == 1 && start != stop {
        return Err(Error::invalid(format!(
            "a one-point grid needs start == stop, got {start} and {stop}"
        )));
    }
    if count > 1 && !(stop > start) {
        return Err(Error::invalid(format!(
            "grid stop must exceed start, got {start} and {stop}"
        )));
    }
    Ok(())
}

fn spaced(start: f64, stop: f64, count: usize, at: impl Fn(f64) -> f64) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    let last = (count - 1) as f64;
    let mut grid: Vec<f64> = (0..count).map(|i| at(i as f64 / last)).collect();
    grid[0] = start;
    grid[count - 1] = stop;
    grid
}

/// Parses a grid specification.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    let bad = |what: &str| {
        Error::Parse(format!(
            "grid {spec:?}: {what}; expected geom:START:STOP:COUNT, lin:START:STOP:COUNT or a comma-separated list"
        ))
    };
    let num = |tok: &str| {
        tok.trim()
            .parse::<f64>()
            .map_err(|_| bad(&format!("{tok:?} is not a number")))
    };

    if let Some((kind, rest)) = spec.split_once(':') {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("wrong number of fields"));
        }
        let (start, stop) = (num(parts[0])?, num(parts[1])?);
        let count = parts[2]
            .trim()
            .parse::<usize>()
            .map_err(|_| bad("count must be a non-negative integer"))?;
        return match kind {
            "geom" => geometric(start, stop, count),
            "lin" => linear(start, stop, count),
            other => Err(bad(&format!("unknown grid kind {other:?}"))),
        };
    }
    let values = spec.split(',').map(num).collect::<Result<Vec<_>>>()?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(bad("values must be finite"));
    }
    Ok(values)
}
