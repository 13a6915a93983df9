//! Text formats: grid field files and lists of reals given on the command line.
//!
//! A field file is
//!
//! ```text
//! # sphere-grid n_theta=4 n_phi=8 radius_km=6371
//! theta,phi,value
//! 3.39981043584856257e-01,0.00000000000000000e+00,1.00000000000000000e+00
//! ...
//! ```
//!
//! with one row per node in theta-major order. Node coordinates are checked
//! against the grid the header describes.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spectral::{SphereField, SphereGrid};

const MAGIC: &str = "# sphere-grid";
pub const FIELD_COLUMNS: &str = "theta,phi,value";

/// Coordinates in a file may differ from the regenerated grid by this much.
const NODE_TOL: f64 = 1e-12;

/// Formats like C's `%.17e`: 17 fraction digits and an exponent of at least
/// two digits with an explicit sign.
pub fn format_e17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.17e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.unsigned_abs())
}

/// Writes `field` in the field-file format.
pub fn write_field<W: Write>(mut out: W, field: &SphereField) -> io::Result<()> {
    let grid = field.grid();
    writeln!(
        out,
        "{MAGIC} n_theta={} n_phi={} radius_km={}",
        grid.n_theta(),
        grid.n_phi(),
        grid.radius_km()
    )?;
    writeln!(out, "{FIELD_COLUMNS}")?;
    let mut line = String::new();
    for (k, v) in field.samples().iter().enumerate() {
        let (t, p) = grid.node(k);
        line.clear();
        let _ = write!(line, "{},{},{}", format_e17(t), format_e17(p), format_e17(*v));
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn field_to_string(field: &SphereField) -> String {
    let mut buf = Vec::new();
    write_field(&mut buf, field).expect("writing to memory");
    String::from_utf8(buf).expect("ASCII output")
}

/// Node computation is quadratic in the ring count.
const MAX_RINGS: usize = 8192;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_header(line: &str) -> Result<(usize, usize, f64)> {
    let rest = line
        .strip_prefix(MAGIC)
        .ok_or_else(|| parse_err(1, format!("expected '{MAGIC}' header")))?;
    let (mut nt, mut np, mut r) = (None, None, None);
    for item in rest.split_whitespace() {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| parse_err(1, format!("malformed header item '{item}'")))?;
        let bad = || parse_err(1, format!("bad value for {key}: '{value}'"));
        match key {
            "n_theta" => nt = Some(value.parse::<usize>().map_err(|_| bad())?),
            "n_phi" => np = Some(value.parse::<usize>().map_err(|_| bad())?),
            "radius_km" => r = Some(value.parse::<f64>().map_err(|_| bad())?),
            _ => return Err(parse_err(1, format!("unknown header key '{key}'"))),
        }
    }
    match (nt, np, r) {
        (Some(a), Some(b), Some(c)) => Ok((a, b, c)),
        _ => Err(parse_err(1, "header needs n_theta, n_phi and radius_km")),
    }
}

fn parse_number(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| parse_err(line, format!("not a number: '{}'", s.trim())))
}

/// Parses a field file. Blank lines and `#` comments after the header are
/// ignored; the column-name row is optional.
pub fn parse_field(text: &str) -> Result<SphereField> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let (nt, np, radius) = parse_header(header.trim())?;
    // guard against absurd headers before allocating
    if nt > MAX_RINGS || nt.checked_mul(np).map_or(true, |n| n > 1 << 24) {
        return Err(Error::InvalidField(format!("grid {nt}x{np} is too large")));
    }
    let grid = Arc::new(SphereGrid::new(nt, np, radius)?);

    let mut samples = Vec::with_capacity(grid.len());
    for (no, raw) in lines {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line == FIELD_COLUMNS {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(parse_err(no, format!("expected 3 columns, found {}", cols.len())));
        }
        let k = samples.len();
        if k >= grid.len() {
            return Err(Error::InvalidField(format!(
                "more than {} data rows",
                grid.len()
            )));
        }
        let theta = parse_number(cols[0], no)?;
        let phi = parse_number(cols[1], no)?;
        let value = parse_number(cols[2], no)?;
        let (t, p) = grid.node(k);
        if !((theta - t).abs() <= NODE_TOL && (phi - p).abs() <= NODE_TOL) {
            return Err(parse_err(
                no,
                format!("node ({theta}, {phi}) does not match grid node {k} ({t}, {p})"),
            ));
        }
        samples.push(value);
    }
    SphereField::new(grid, samples)
}

/// Parses a list of reals separated by commas or whitespace.
///
/// An item `a:b:n` expands to `n` evenly spaced values from `a` to `b`, and
/// `a:b:n:log` to `n` geometrically spaced ones.
pub fn parse_real_list(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let items = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty());
    for (pos, item) in items.enumerate() {
        let err = |m: String| parse_err(1, format!("item {}: {m}", pos + 1));
        let parts: Vec<&str> = item.split(':').collect();
        let num = |s: &str| -> Result<f64> {
            let v: f64 = s.parse().map_err(|_| err(format!("not a number: '{s}'")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(err(format!("not finite: '{s}'")))
            }
        };
        match parts.as_slice() {
            [v] => out.push(num(v)?),
            [a, b, n] | [a, b, n, _] => {
                let (a, b) = (num(a)?, num(b)?);
                let n: usize = n.parse().map_err(|_| err(format!("bad count '{n}'")))?;
                if n == 0 || n > 1_000_000 {
                    return Err(err(format!("count {n} outside 1..=1000000")));
                }
                let log = match parts.get(3) {
                    None => false,
                    Some(&"log") => true,
                    Some(other) => return Err(err(format!("unknown spacing '{other}'"))),
                };
                if log && !(a > 0.0 && b > 0.0) {
                    return Err(err("log spacing needs positive ends".into()));
                }
                for k in 0..n {
                    let t = if n == 1 { 0.0 } else { k as f64 / (n - 1) as f64 };
                    let v = if log {
                        (a.ln() + t * (b.ln() - a.ln())).exp()
                    } else {
                        a * (1.0 - t) + b * t
                    };
                    out.push(if k + 1 == n { b } else { v });
                }
            }
            _ => return Err(err(format!("cannot parse '{item}'"))),
        }
    }
    if out.is_empty() {
        return Err(parse_err(1, "empty list"));
    }
    Ok(out)
}
