//! Value grids: `x`, `a,b,c`, `start:stop:count` (inclusive, linear) and
//! `log:start:stop:count` (inclusive, geometric).

use crate::error::{CliError, CliResult};

pub fn parse_grid(flag: &str, text: &str) -> CliResult<Vec<f64>> {
    let bad = |why: &str| CliError::Usage(format!("{flag} `{text}`: {why}"));
    let t = text.trim();
    if t.is_empty() {
        return Err(bad("empty value"));
    }
    let (log, body) = match t.strip_prefix("log:") {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    if body.contains(':') {
        let parts: Vec<&str> = body.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:stop:count"));
        }
        let start = number(parts[0]).ok_or_else(|| bad("start is not a number"))?;
        let stop = number(parts[1]).ok_or_else(|| bad("stop is not a number"))?;
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| bad("count is not a positive integer"))?;
        if count == 0 {
            return Err(bad("count must be at least 1"));
        }
        if log && (start <= 0.0 || stop <= 0.0) {
            return Err(bad("log grids need positive endpoints"));
        }
        if count == 1 {
            return Ok(vec![start]);
        }
        let last = (count - 1) as f64;
        let values = (0..count)
            .map(|i| {
                let f = i as f64 / last;
                if i == count - 1 {
                    stop
                } else if log {
                    (start.ln() + f * (stop.ln() - start.ln())).exp()
                } else {
                    start + f * (stop - start)
                }
            })
            .collect();
        return Ok(values);
    }
    if log {
        return Err(bad("expected log:start:stop:count"));
    }
    body.split(',')
        .map(|s| number(s).ok_or_else(|| bad("not a number")))
        .collect()
}

fn number(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}
