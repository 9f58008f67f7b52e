//! Parsers for vector and range flag values.

use crate::CliError;

/// Comma-separated floats, optionally wrapped in brackets: `1,0.5,-2` or `[1, 0.5, -2]`.
pub fn parse_vector(text: &str) -> Result<Vec<f64>, CliError> {
    let trimmed = text.trim();
    let inner = trimmed
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .unwrap_or(trimmed);
    if inner.trim().is_empty() {
        return Err(CliError::Arg(format!("empty vector `{text}`")));
    }
    inner
        .split(',')
        .map(|part| {
            let part = part.trim();
            let value: f64 = part
                .parse()
                .map_err(|_| CliError::Arg(format!("`{part}` is not a number")))?;
            if value.is_finite() {
                Ok(value)
            } else {
                Err(CliError::Arg(format!("`{part}` is not finite")))
            }
        })
        .collect()
}

/// Inclusive, evenly spaced grid `lo:hi:n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRange {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Upper bound on points per swept axis.
pub const MAX_RANGE_POINTS: usize = 100_000;

impl GridRange {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        // Convex combination: stays finite even when `hi − lo` overflows.
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                let t = k as f64 / last;
                self.lo * (1.0 - t) + self.hi * t
            })
            .collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            lo: self.lo * factor,
            hi: self.hi * factor,
            count: self.count,
        }
    }
}

pub fn parse_range(text: &str) -> Result<GridRange, CliError> {
    let parts: Vec<&str> = text.trim().split(':').collect();
    let [lo, hi, count] = parts.as_slice() else {
        return Err(CliError::Arg(format!("range `{text}` is not lo:hi:n")));
    };
    let number = |s: &str| -> Result<f64, CliError> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| CliError::Arg(format!("`{s}` is not a number")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(CliError::Arg(format!("`{s}` is not finite")))
        }
    };
    let lo = number(lo)?;
    let hi = number(hi)?;
    let count: usize = count
        .trim()
        .parse()
        .map_err(|_| CliError::Arg(format!("`{count}` is not a point count")))?;
    if count == 0 || count > MAX_RANGE_POINTS {
        return Err(CliError::Arg(format!(
            "point count must be in 1..={MAX_RANGE_POINTS}, got {count}"
        )));
    }
    if hi < lo {
        return Err(CliError::Arg(format!("range `{text}` has hi < lo")));
    }
    Ok(GridRange { lo, hi, count })
}
