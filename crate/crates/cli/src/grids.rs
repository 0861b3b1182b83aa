//! Parsers for the point and grid flags.
//!
//! Complex numbers: `re,im`, or `a+bi` forms such as `i`, `2i`, `1-0.5i`, `0.3`.
//! z-grids: `re1,im1:re2,im2:n` (linear) or `iy:y1:y2:n[:log]` (imaginary axis).
//! Length grids: `a:b:step` or a comma list.

use arvcanon::Complex64;

use crate::error::CliError;

fn number(s: &str, what: &str) -> Result<f64, CliError> {
    let v: f64 = s.trim().parse().map_err(|_| CliError::parse(format!("cannot read {what} `{s}`")))?;
    if !v.is_finite() {
        return Err(CliError::parse(format!("{what} `{s}` is not finite")));
    }
    Ok(v)
}

fn count(s: &str) -> Result<usize, CliError> {
    match s.trim().parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(CliError::parse(format!("grid size `{s}` is not a positive integer"))),
    }
}

pub fn complex(s: &str) -> Result<Complex64, CliError> {
    let s = s.trim();
    if let Some((re, im)) = s.split_once(',') {
        return Ok(Complex64::new(number(re, "real part")?, number(im, "imaginary part")?));
    }
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex64::new(number(s, "real number")?, 0.0));
    };
    // split before the last sign that is not an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'))
        .unwrap_or(0);
    let (re, im) = body.split_at(split);
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => number(t, "imaginary part")?,
    };
    let re = if re.is_empty() { 0.0 } else { number(re, "real part")? };
    Ok(Complex64::new(re, im))
}

pub fn z_grid(s: &str) -> Result<Vec<Complex64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.first() == Some(&"iy") {
        let (y1, y2, n) = match parts.len() {
            4 | 5 => (number(parts[1], "height")?, number(parts[2], "height")?, count(parts[3])?),
            _ => return Err(CliError::parse(format!("z grid `{s}` is not `iy:y1:y2:n[:log]`"))),
        };
        let log = match parts.get(4) {
            None => false,
            Some(&"log") => true,
            Some(other) => return Err(CliError::parse(format!("unknown z grid spacing `{other}`"))),
        };
        if log && !(y1 > 0.0 && y2 > 0.0) {
            return Err(CliError::Validation("log z grid needs positive heights".into()));
        }
        let ys = if log {
            let (a, b) = (y1.ln(), y2.ln());
            linspace(a, b, n).into_iter().map(f64::exp).collect()
        } else {
            linspace(y1, y2, n)
        };
        return Ok(ys.into_iter().map(|y| Complex64::new(0.0, y)).collect());
    }
    if parts.len() != 3 {
        return Err(CliError::parse(format!("z grid `{s}` is not `re1,im1:re2,im2:n`")));
    }
    let (a, b, n) = (complex(parts[0])?, complex(parts[1])?, count(parts[2])?);
    Ok(linspace(0.0, 1.0, n).into_iter().map(|t| a + (b - a) * t).collect())
}

/// `n` equispaced points from `a` to `b`, both included.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

pub fn length_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let ells = match parts.len() {
        1 => s.split(',').map(|t| number(t, "length")).collect::<Result<Vec<_>, _>>()?,
        3 => {
            let (a, b, h) = (number(parts[0], "length")?, number(parts[1], "length")?, number(parts[2], "step")?);
            if !(h > 0.0) || b < a {
                return Err(CliError::Validation(format!("length grid `{s}` needs a positive step and a <= b")));
            }
            let n = ((b - a) / h + 1e-9).floor() as usize;
            (0..=n).map(|k| a + k as f64 * h).collect()
        }
        _ => return Err(CliError::parse(format!("length grid `{s}` is not `a:b:step` or a list"))),
    };
    if ells.iter().any(|&l| l < 0.0) {
        return Err(CliError::Validation("lengths must be nonnegative".into()));
    }
    Ok(ells)
}

/// `a:b:n`, `n` points on `[a, b]`.
pub fn x_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::parse(format!("x grid `{s}` is not `a:b:n`")));
    }
    Ok(linspace(number(parts[0], "x")?, number(parts[1], "x")?, count(parts[2])?))
}

/// `a:b,c:d`.
pub fn intervals(s: &str) -> Result<Vec<(f64, f64)>, CliError> {
    s.split(',')
        .map(|part| {
            let (a, b) = part
                .split_once(':')
                .ok_or_else(|| CliError::parse(format!("interval `{part}` is not `a:b`")))?;
            Ok((number(a, "interval end")?, number(b, "interval end")?))
        })
        .collect()
}

/// `θ1:θ2`.
pub fn pair(s: &str, what: &str) -> Result<(f64, f64), CliError> {
    let (a, b) = s.split_once(':').ok_or_else(|| CliError::parse(format!("{what} `{s}` is not `a:b`")))?;
    Ok((number(a, what)?, number(b, what)?))
}

pub fn list(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').map(|t| number(t, what)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn complex_forms() {
        assert_eq!(complex("i").unwrap(), c(0.0, 1.0));
        assert_eq!(complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(complex("2i").unwrap(), c(0.0, 2.0));
        assert_eq!(complex("1+i").unwrap(), c(1.0, 1.0));
        assert_eq!(complex("1.5-0.25i").unwrap(), c(1.5, -0.25));
        assert_eq!(complex("1e-3+2e-1i").unwrap(), c(1e-3, 0.2));
        assert_eq!(complex("0.3").unwrap(), c(0.3, 0.0));
        assert_eq!(complex("0.3,-2").unwrap(), c(0.3, -2.0));
        assert!(complex("x").is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(z_grid("0,1:2,1:3").unwrap(), vec![c(0.0, 1.0), c(1.0, 1.0), c(2.0, 1.0)]);
        let log = z_grid("iy:1:100:3:log").unwrap();
        assert!((log[1].im - 10.0).abs() < 1e-12);
        assert_eq!(length_grid("0:4:0.1").unwrap().len(), 41);
        assert_eq!(length_grid("1,2.5").unwrap(), vec![1.0, 2.5]);
        assert_eq!(x_grid("-1:1:5").unwrap()[1], -0.5);
        assert_eq!(intervals("0:1,2:3").unwrap(), vec![(0.0, 1.0), (2.0, 3.0)]);
        assert!(length_grid("0:1:-1").is_err());
    }
}
