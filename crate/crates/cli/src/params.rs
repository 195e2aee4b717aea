//! Value and range parsing for command-line parameters.

use std::f64::consts::PI;
use std::fmt;

/// A malformed or out-of-range experiment parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecError(pub String);

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for SpecError {}

impl From<schwarz_lfa::Error> for SpecError {
    fn from(e: schwarz_lfa::Error) -> Self {
        SpecError(e.to_string())
    }
}

fn err<T>(msg: impl Into<String>) -> Result<T, SpecError> {
    Err(SpecError(msg.into()))
}

/// A real number, optionally written with `pi`: `0.3`, `pi`, `pi/4`,
/// `3pi/8`, `3*pi/8`, `-pi/2`.
pub fn parse_real(s: &str) -> Result<f64, SpecError> {
    let t = s.trim().to_ascii_lowercase();
    if t.is_empty() {
        return err("empty number");
    }
    if !t.contains("pi") {
        return t.parse::<f64>().map_err(|_| SpecError(format!("not a number: {s:?}")));
    }
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.trim(), Some(b.trim())),
        None => (t.as_str(), None),
    };
    let coef = num.trim_end_matches("pi").trim_end_matches('*').trim();
    if num.trim_end_matches("pi").len() + 2 != num.len() {
        return err(format!("not a number: {s:?}"));
    }
    let c = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| SpecError(format!("not a number: {s:?}")))?,
    };
    let d = match den {
        Some(d) => d.parse::<f64>().map_err(|_| SpecError(format!("not a number: {s:?}")))?,
        None => 1.0,
    };
    if d == 0.0 {
        return err(format!("division by zero in {s:?}"));
    }
    Ok(c * PI / d)
}

/// Comma-separated reals.
pub fn parse_list(s: &str) -> Result<Vec<f64>, SpecError> {
    let v = s.split(',').map(parse_real).collect::<Result<Vec<_>, _>>()?;
    if v.is_empty() {
        return err("empty list");
    }
    Ok(v)
}

/// `lo:hi:count`, split into its parts.
fn range_parts(s: &str) -> Result<(f64, f64, usize), SpecError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return err(format!("range must look like lo:hi:count, got {s:?}"));
    }
    let lo = parse_real(parts[0])?;
    let hi = parse_real(parts[1])?;
    let n: usize = parts[2].trim().parse().map_err(|_| SpecError(format!("bad count in {s:?}")))?;
    if n == 0 {
        return err("range count must be positive");
    }
    if hi < lo {
        return err(format!("range {s:?} runs backwards"));
    }
    if n == 1 && hi != lo {
        return err(format!("one-point range {s:?} needs lo = hi"));
    }
    Ok((lo, hi, n))
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|k| if k + 1 == n { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 }).collect()
}

pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linspace(lo.log10(), hi.log10(), n).into_iter().map(|e| 10f64.powf(e)).collect()
}

/// Equispaced points, endpoints included.
pub fn parse_linear_range(s: &str) -> Result<Vec<f64>, SpecError> {
    let (lo, hi, n) = range_parts(s)?;
    Ok(linspace(lo, hi, n))
}

/// Log-equispaced points, endpoints included.
pub fn parse_log_range(s: &str) -> Result<Vec<f64>, SpecError> {
    let (lo, hi, n) = range_parts(s)?;
    if lo <= 0.0 {
        return err("log range needs positive endpoints");
    }
    Ok(logspace(lo, hi, n))
}

/// Comma-separated integers, each either `k` or `a:b` (inclusive).
pub fn parse_usize_list(s: &str) -> Result<Vec<usize>, SpecError> {
    let mut out = Vec::new();
    for item in s.split(',') {
        let item = item.trim();
        let bad = || SpecError(format!("not a non-negative integer: {item:?}"));
        match item.split_once(':') {
            Some((a, b)) => {
                let a: usize = a.trim().parse().map_err(|_| bad())?;
                let b: usize = b.trim().parse().map_err(|_| bad())?;
                if b < a {
                    return err(format!("range {item:?} runs backwards"));
                }
                out.extend(a..=b);
            }
            None => out.push(item.parse().map_err(|_| bad())?),
        }
    }
    if out.is_empty() {
        return err("empty list");
    }
    Ok(out)
}

/// Default anisotropy grid: 17 log-equispaced points in `[1e-4, 1]`.
pub fn default_epsilons() -> Vec<f64> {
    logspace(1e-4, 1.0, 17)
}

/// Default rotation grid: 17 equispaced points in `[0, π/2]`.
pub fn default_thetas() -> Vec<f64> {
    linspace(0.0, PI / 2.0, 17)
}

pub fn check_epsilons(v: &[f64]) -> Result<(), SpecError> {
    for &e in v {
        if !(e > 0.0 && e <= 1.0) {
            return err(format!("epsilon {e} outside (0, 1]"));
        }
    }
    Ok(())
}

pub fn check_thetas(v: &[f64]) -> Result<(), SpecError> {
    for &t in v {
        // allow for rounding in values such as "pi/2"
        if !(0.0..=PI / 2.0 + 1e-12).contains(&t) {
            return err(format!("theta {t} outside [0, pi/2]"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_with_pi() {
        assert_eq!(parse_real("0.25").unwrap(), 0.25);
        assert_eq!(parse_real("pi").unwrap(), PI);
        assert_eq!(parse_real("pi/4").unwrap(), PI / 4.0);
        assert_eq!(parse_real("3pi/8").unwrap(), 3.0 * PI / 8.0);
        assert_eq!(parse_real("3*pi/8").unwrap(), 3.0 * PI / 8.0);
        assert_eq!(parse_real(" -PI/2 ").unwrap(), -PI / 2.0);
        assert_eq!(parse_real("1e-3").unwrap(), 1e-3);
        for bad in ["", "p", "pi/0", "xpi", "pie", "2pi3"] {
            assert!(parse_real(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_linear_range("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        let v = parse_log_range("1e-4:1:17").unwrap();
        assert_eq!(v.len(), 17);
        assert!((v[0] - 1e-4).abs() < 1e-18 && v[16] == 1.0 && (v[8] - 1e-2).abs() < 1e-15);
        assert_eq!(parse_linear_range("0:pi/2:17").unwrap(), default_thetas());
        assert!(parse_log_range("0:1:3").is_err());
        assert!(parse_linear_range("1:0:3").is_err());
        assert!(parse_linear_range("0:1:0").is_err());
        assert!(parse_linear_range("0:1").is_err());
        assert_eq!(parse_linear_range("0.5:0.5:1").unwrap(), vec![0.5]);
    }

    #[test]
    fn integer_lists() {
        assert_eq!(parse_usize_list("1,3:5,9").unwrap(), vec![1, 3, 4, 5, 9]);
        assert!(parse_usize_list("2:1").is_err());
        assert!(parse_usize_list("-1").is_err());
    }

    #[test]
    fn domain_checks() {
        assert!(check_epsilons(&[1.0, 1e-4]).is_ok());
        assert!(check_epsilons(&[0.0]).is_err());
        assert!(check_epsilons(&[1.5]).is_err());
        assert!(check_thetas(&default_thetas()).is_ok());
        assert!(check_thetas(&[parse_real("pi/2").unwrap()]).is_ok());
        assert!(check_thetas(&[-0.1]).is_err());
    }
}
