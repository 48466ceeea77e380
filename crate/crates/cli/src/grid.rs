//! Grid flags: comma lists (`0.1,0.25`) and log-spaced ranges (`1e2..1e8`).

use crate::error::{CliError, CliResult};

fn number(s: &str) -> CliResult<f64> {
    let s = s.trim();
    let v = if let Some((base, exp)) = s.split_once('^') {
        let base: f64 = base.parse().map_err(|_| CliError::Usage(format!("bad number '{s}'")))?;
        let exp: f64 = exp.parse().map_err(|_| CliError::Usage(format!("bad number '{s}'")))?;
        base.powf(exp)
    } else {
        s.parse().map_err(|_| CliError::Usage(format!("bad number '{s}'")))?
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("bad number '{s}'")))
    }
}

/// Parses `a,b,c` or `lo..hi`; a range yields `per_decade` log-spaced points
/// per factor of ten, both ends included.
pub fn parse_grid(spec: &str, per_decade: u32) -> CliResult<Vec<f64>> {
    let mut out = Vec::new();
    for part in spec.split(',') {
        if let Some((lo, hi)) = part.split_once("..") {
            let (lo, hi) = (number(lo)?, number(hi)?);
            if !(lo > 0.0 && hi >= lo) {
                return Err(CliError::Usage(format!("range '{part}' must satisfy 0 < lo <= hi")));
            }
            let steps = ((hi / lo).log10() * per_decade.max(1) as f64).round() as u32;
            for i in 0..=steps {
                let t = if steps == 0 { 0.0 } else { i as f64 / steps as f64 };
                out.push(lo * (hi / lo).powf(t));
            }
        } else {
            out.push(number(part)?);
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage("empty grid".into()));
    }
    Ok(out)
}

/// [`parse_grid`] rounded to positive integers (sample sizes).
pub fn parse_n_grid(spec: &str, per_decade: u32) -> CliResult<Vec<u64>> {
    let mut out: Vec<u64> = Vec::new();
    for v in parse_grid(spec, per_decade)? {
        let n = v.round();
        if !(1.0..9.0e18).contains(&n) {
            return Err(CliError::Usage(format!("sample size {v} out of range")));
        }
        if out.last() != Some(&(n as u64)) {
            out.push(n as u64);
        }
    }
    Ok(out)
}
