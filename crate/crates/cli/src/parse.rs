//! Flag value parsers: reals written as decimals or `pi` fractions,
//! comma pairs and linear charge densities.

use std::f64::consts::PI;

use softsqueeze::physical::constants::ESU_PER_COULOMB;

/// `1.25`, `-3`, `pi`, `pi/2`, `5pi/2`, `5*pi/2`, `-pi/4`, `184/95`, `2e-3`.
pub fn real(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, t.strip_prefix('+').unwrap_or(t)),
    };
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (body, None),
    };
    let mut value = sign * factor(num).ok_or_else(|| format!("cannot parse '{s}' as a real"))?;
    if let Some(d) = den {
        let d = factor(d).ok_or_else(|| format!("cannot parse denominator of '{s}'"))?;
        if d == 0.0 {
            return Err(format!("zero denominator in '{s}'"));
        }
        value /= d;
    }
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

/// A decimal coefficient optionally followed by `pi`.
fn factor(s: &str) -> Option<f64> {
    let s = s.trim();
    match s.strip_suffix("pi") {
        Some(coef) => {
            let coef = coef.trim().trim_end_matches('*').trim();
            if coef.is_empty() {
                Some(PI)
            } else {
                coef.parse::<f64>().ok().map(|c| c * PI)
            }
        }
        None => s.parse().ok(),
    }
}

/// `a,b` with both parts parsed by [`real`].
pub fn pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected 'a,b', got '{s}'"))?;
    Ok((real(a)?, real(b)?))
}

/// Linear charge density in esu/cm: plain number, `...esu` or `...C`.
pub fn charge(s: &str) -> Result<f64, String> {
    let t = s.trim();
    if let Some(c) = t.strip_suffix('C') {
        return Ok(real(c)? * ESU_PER_COULOMB);
    }
    real(t.strip_suffix("esu").unwrap_or(t))
}
