//! HoloMap input, mesh and CSV output.
//!
//! Floats are written with `{:e}`, the shortest representation that parses
//! back to the same bits, so identical runs give identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crgeo_core::weierstrass::{HoloMap, Poly, Rect, Surface};
use crgeo_core::Complex64;

use crate::{CliError, Result};

pub fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let io = |source| CliError::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path.file_name().ok_or_else(|| CliError::Config(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(contents).map_err(io)?;
    f.sync_all().map_err(io)?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io(e)
    })
}

/// Comma-separated table with a header row.
#[derive(Clone, Debug, Default)]
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        Self { buf }
    }

    pub fn row(&mut self, fields: &[Field]) {
        for (k, f) in fields.iter().enumerate() {
            if k > 0 {
                self.buf.push(',');
            }
            match f {
                Field::I(v) => write!(self.buf, "{v}").unwrap(),
                Field::F(v) => self.buf.push_str(&fmt_f64(*v)),
                Field::S(s) => self.buf.push_str(s),
            }
        }
        self.buf.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.buf
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.buf.as_bytes())
    }
}

pub enum Field {
    I(i64),
    F(f64),
    S(String),
}

impl From<usize> for Field {
    fn from(v: usize) -> Self {
        Field::I(v as i64)
    }
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::F(v)
    }
}

impl From<bool> for Field {
    fn from(v: bool) -> Self {
        Field::S(v.to_string())
    }
}

/// Parses the HoloMap text format.
///
/// ```text
/// # n 1
/// # domain -1 1 -1 1 0 0
/// 1, 0, 0.5, 0
/// 0, 0, 0, -0.7071067811865476
/// ```
///
/// Rows are `component_index, power, coeff_re, coeff_im`; index `0` is
/// `Φ⁰` and `1..=2n` the others. Without an `# n` line, `n` is the smallest
/// value that fits every index. Other `#` lines are comments.
pub fn parse_holomap(text: &str) -> std::result::Result<HoloMap, (usize, String)> {
    let mut n = None;
    let mut domain = None;
    let mut rows: Vec<(usize, usize, usize, Complex64)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let words: Vec<&str> = rest.split_whitespace().collect();
            match words.first() {
                Some(&"n") => {
                    let v = words.get(1).and_then(|w| w.parse::<usize>().ok()).filter(|v| *v >= 1);
                    if words.len() != 2 || v.is_none() {
                        return Err((line_no, "expected `# n N` with N ≥ 1".into()));
                    }
                    n = v;
                }
                Some(&"domain") => {
                    let vals: Option<Vec<f64>> = words[1..].iter().map(|w| w.parse().ok()).collect();
                    let vals = vals.filter(|v| v.len() == 6).ok_or((line_no, "expected `# domain x0 x1 y0 y1 base_re base_im`".into()))?;
                    let rect = Rect::new(vals[0], vals[1], vals[2], vals[3]).map_err(|e| (line_no, e.to_string()))?;
                    let base = Complex64::new(vals[4], vals[5]);
                    if !rect.contains(base) {
                        return Err((line_no, "base point lies outside the domain".into()));
                    }
                    domain = Some((rect, base));
                }
                _ => {}
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err((line_no, format!("expected 4 fields, found {}", fields.len())));
        }
        let comp = fields[0].parse::<usize>().map_err(|_| (line_no, format!("bad component index `{}`", fields[0])))?;
        let power = fields[1].parse::<usize>().map_err(|_| (line_no, format!("bad power `{}`", fields[1])))?;
        let re = parse_finite(fields[2]).ok_or((line_no, format!("bad coefficient `{}`", fields[2])))?;
        let im = parse_finite(fields[3]).ok_or((line_no, format!("bad coefficient `{}`", fields[3])))?;
        if rows.iter().any(|r| r.1 == comp && r.2 == power) {
            return Err((line_no, format!("duplicate coefficient for component {comp}, power {power}")));
        }
        rows.push((line_no, comp, power, Complex64::new(re, im)));
    }
    let n = match n {
        Some(n) => n,
        None => rows.iter().map(|r| r.1.div_ceil(2)).max().unwrap_or(1).max(1),
    };
    let mut h = HoloMap::zero(n);
    if let Some((rect, base)) = domain {
        h.domain = rect;
        h.base = base;
    }
    for (line_no, comp, power, c) in rows {
        let p = h.component_mut(comp).ok_or((line_no, format!("component index {comp} exceeds 2n = {}", 2 * n)))?;
        p.set(power, c);
    }
    Ok(h)
}

fn parse_finite(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn read_holomap(path: &Path) -> Result<HoloMap> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    parse_holomap(&text).map_err(|(line, msg)| CliError::Parse { path: path.to_path_buf(), line, msg })
}

/// Inverse of [`parse_holomap`].
pub fn holomap_to_string(h: &HoloMap) -> String {
    let mut s = String::new();
    writeln!(s, "# n {}", h.n).unwrap();
    let d = &h.domain;
    writeln!(s, "# domain {} {} {} {} {} {}", fmt_f64(d.x0), fmt_f64(d.x1), fmt_f64(d.y0), fmt_f64(d.y1), fmt_f64(h.base.re), fmt_f64(h.base.im)).unwrap();
    for ext in 0..=2 * h.n {
        let p: &Poly = if ext == 0 { &h.comps[2 * h.n] } else { &h.comps[ext - 1] };
        for (k, c) in p.0.iter().enumerate() {
            if *c != Complex64::new(0.0, 0.0) {
                writeln!(s, "{ext}, {k}, {}, {}", fmt_f64(c.re), fmt_f64(c.im)).unwrap();
            }
        }
    }
    s
}

/// `v x y t` and 1-based counterclockwise `f a b c` lines (`n = 1`).
pub fn surface_obj(s: &Surface) -> String {
    let mut out = String::new();
    for p in &s.points {
        writeln!(out, "v {} {} {}", fmt_f64(p[0]), fmt_f64(p[1]), fmt_f64(p[2])).unwrap();
    }
    for [a, b, c] in s.grid.triangles() {
        writeln!(out, "f {} {} {}", a + 1, b + 1, c + 1).unwrap();
    }
    out
}

/// Vertices as CSV, one row per grid node; triangles follow the grid.
pub fn surface_csv(s: &Surface) -> Csv {
    let n = s.n;
    let mut header = vec!["ix".to_string(), "iy".to_string(), "re".to_string(), "im".to_string()];
    header.extend((1..=n).map(|j| format!("x{j}")));
    header.extend((1..=n).map(|j| format!("y{j}")));
    header.push("t".into());
    let refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = Csv::new(&refs);
    for (k, (p, z)) in s.points.iter().zip(&s.params).enumerate() {
        let mut row: Vec<Field> = vec![(k % s.grid.nx).into(), (k / s.grid.nx).into(), z.re.into(), z.im.into()];
        row.extend(p.iter().map(|v| Field::F(*v)));
        csv.row(&row);
    }
    csv
}

/// Per-point residuals of a generated surface.
pub fn surface_report(s: &Surface) -> Csv {
    let mut csv = Csv::new(&["ix", "iy", "re", "im", "pde_residual", "conformality", "isotropy", "nondegeneracy", "tangency"]);
    let c = &s.constraints;
    for (k, z) in s.params.iter().enumerate() {
        csv.row(&[
            (k % s.grid.nx).into(),
            (k / s.grid.nx).into(),
            z.re.into(),
            z.im.into(),
            s.pde_residual[k].into(),
            s.conformality[k].into(),
            c.isotropy[k].into(),
            c.nondegeneracy[k].into(),
            c.tangency[k].into(),
        ]);
    }
    csv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_vertical_plane() {
        let h = HoloMap::vertical_plane();
        let text = holomap_to_string(&h);
        assert_eq!(parse_holomap(&text).unwrap(), h);
    }

    #[test]
    fn inferred_dimension() {
        let h = parse_holomap("3, 1, 1, 0\n").unwrap();
        assert_eq!(h.n, 2);
        assert_eq!(h.comps[2].0[1], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(parse_holomap("# n 1\n\n1, 0, x, 0\n").unwrap_err().0, 3);
        assert_eq!(parse_holomap("# n 1\n3, 0, 1, 0\n").unwrap_err().0, 2);
        assert_eq!(parse_holomap("1, 0, 1\n").unwrap_err().0, 1);
        assert_eq!(parse_holomap("1, 0, 1, 0\n1, 0, 2, 0\n").unwrap_err().0, 2);
        assert_eq!(parse_holomap("# domain 1 0 0 1 0 0\n").unwrap_err().0, 1);
        assert_eq!(parse_holomap("1, 0, inf, 0\n").unwrap_err().0, 1);
    }

    #[test]
    fn floats_round_trip() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 6.02e23, 0.0] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }
}
