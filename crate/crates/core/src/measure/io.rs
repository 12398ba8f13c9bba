//! Plain-text measure and query files.
//!
//! ```text
//! #dim 2
//! 0.0 0.5  0.25          # x_1 x_2 mass
//! 0.5 0.5  0.25  1.0     # ... f
//! 1.0 0.5  0.25  1.0 2.0 # ... f w
//! ```
//!
//! Lines starting with `#` other than the `#dim` header are comments. Every
//! atom line must carry the same number of columns. Duplicate coordinates are
//! merged: masses add, `f` and `w` are mass-weighted averages.

use std::fmt::Write as _;

use super::{PointMassMeasure, SampledFunction, MAX_DIM};
use crate::error::{Error, Result};

/// A parsed measure file: the measure plus optional `f` and `w` columns.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureFile {
    pub measure: PointMassMeasure,
    pub f: Option<SampledFunction>,
    pub w: Option<SampledFunction>,
}

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("line {line}: {msg}"))
}

fn read_header(lines: &mut std::iter::Peekable<impl Iterator<Item = (usize, String)>>) -> Result<usize> {
    while let Some((no, line)) = lines.next() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(rest) = t.strip_prefix("#dim") {
            let dim: usize = rest
                .trim()
                .parse()
                .map_err(|_| parse_err(no, format!("bad #dim header {t:?}")))?;
            if dim == 0 || dim > MAX_DIM {
                return Err(parse_err(no, format!("dimension {dim} not in 1..={MAX_DIM}")));
            }
            return Ok(dim);
        }
        if t.starts_with('#') {
            continue;
        }
        return Err(parse_err(no, "expected `#dim n` header before data"));
    }
    Err(Error::Parse("missing `#dim n` header".into()))
}

fn data_rows(text: &str) -> Result<(usize, Vec<(usize, Vec<f64>)>)> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.to_string())).peekable();
    let dim = read_header(&mut lines)?;
    let mut rows = Vec::new();
    for (no, line) in lines {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let vals = body
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| parse_err(no, format!("not a number: {tok:?}")))
                    .and_then(|v| {
                        if v.is_finite() {
                            Ok(v)
                        } else {
                            Err(parse_err(no, format!("non-finite value {tok:?}")))
                        }
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push((no, vals));
    }
    Ok((dim, rows))
}

/// Parses a measure file.
pub fn parse_measure(text: &str) -> Result<MeasureFile> {
    let (dim, rows) = data_rows(text)?;
    if rows.is_empty() {
        return Err(Error::Parse("measure file has no atoms".into()));
    }
    let width = rows[0].1.len();
    if width < dim + 1 || width > dim + 3 {
        return Err(parse_err(
            rows[0].0,
            format!("expected {} to {} columns, found {width}", dim + 1, dim + 3),
        ));
    }
    let extra = width - dim - 1;
    let mut coords = Vec::with_capacity(rows.len() * dim);
    let mut masses = Vec::with_capacity(rows.len());
    let mut fs = Vec::new();
    let mut ws = Vec::new();
    for (no, vals) in &rows {
        if vals.len() != width {
            return Err(parse_err(*no, format!("expected {width} columns, found {}", vals.len())));
        }
        coords.extend_from_slice(&vals[..dim]);
        let m = vals[dim];
        if m <= 0.0 {
            return Err(parse_err(*no, format!("mass must be positive, found {m}")));
        }
        masses.push(m);
        if extra >= 1 {
            fs.push(vals[dim + 1]);
        }
        if extra >= 2 {
            let w = vals[dim + 2];
            if w < 0.0 {
                return Err(parse_err(*no, format!("weight must be non-negative, found {w}")));
            }
            ws.push(w);
        }
    }
    let (measure, map) = PointMassMeasure::from_flat_with_map(dim, coords, masses.clone())?;
    let merge = |v: &[f64]| SampledFunction::new(map.merge_values(&masses, v, measure.masses()));
    let f = (extra >= 1).then(|| merge(&fs)).transpose()?;
    let w = (extra >= 2).then(|| merge(&ws)).transpose()?;
    Ok(MeasureFile { measure, f, w })
}

/// Parses a query-point file (same layout, coordinates only).
pub fn parse_queries(text: &str) -> Result<(usize, Vec<Vec<f64>>)> {
    let (dim, rows) = data_rows(text)?;
    let mut out = Vec::with_capacity(rows.len());
    for (no, vals) in rows {
        if vals.len() != dim {
            return Err(parse_err(no, format!("expected {dim} coordinates, found {}", vals.len())));
        }
        out.push(vals);
    }
    Ok((dim, out))
}

/// Serialises a measure with optional `f` (and `w`, which requires `f`).
///
/// Values are written in shortest round-trip form, so parsing the output
/// reproduces the measure bit for bit.
pub fn write_measure(
    mu: &PointMassMeasure,
    f: Option<&SampledFunction>,
    w: Option<&SampledFunction>,
) -> Result<String> {
    if w.is_some() && f.is_none() {
        return Err(Error::Parse("a w column requires an f column".into()));
    }
    for col in [f, w].into_iter().flatten() {
        col.check_aligned(mu)?;
    }
    let mut out = String::with_capacity(mu.len() * 24 * (mu.dim() + 1));
    let _ = writeln!(out, "#dim {}", mu.dim());
    for i in 0..mu.len() {
        for x in mu.point(i) {
            let _ = write!(out, "{x:?} ");
        }
        let _ = write!(out, "{:?}", mu.mass(i));
        if let Some(f) = f {
            let _ = write!(out, " {:?}", f[i]);
        }
        if let Some(w) = w {
            let _ = write!(out, " {:?}", w[i]);
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_columns_and_merges() {
        let text = "# a comment\n#dim 1\n0.0 1.0 2.0 1.0\n0.5 1.0 0.0 3.0\n0.0 3.0 6.0 5.0 # dup\n";
        let mf = parse_measure(text).unwrap();
        assert_eq!(mf.measure.len(), 2);
        assert_eq!(mf.measure.masses(), &[4.0, 1.0]);
        // Σ m f preserved: 1*2 + 3*6 = 20 = 4 * 5
        assert_eq!(mf.f.as_ref().unwrap().values(), &[5.0, 0.0]);
        assert_eq!(mf.w.as_ref().unwrap().values(), &[4.0, 3.0]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_measure("#dim 2\n0 0 1\n0 1 -1\n").unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
        let e = parse_measure("#dim 2\n0 0 1\n0 1\n").unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
        let e = parse_measure("0 0 1\n").unwrap_err();
        assert!(e.to_string().contains("line 1"), "{e}");
        let e = parse_measure("#dim 1\n0 x\n").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    #[test]
    fn query_file() {
        let (dim, q) = parse_queries("#dim 2\n0 1\n2 3\n").unwrap();
        assert_eq!(dim, 2);
        assert_eq!(q, vec![vec![0.0, 1.0], vec![2.0, 3.0]]);
        assert!(parse_queries("#dim 2\n0 1 2\n").is_err());
    }

    proptest! {
        #[test]
        fn write_then_parse_is_bitwise(
            pts in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3, 1e-9f64..1e3, -5.0f64..5.0), 1..50)
        ) {
            let coords: Vec<f64> = pts.iter().flat_map(|p| [p.0, p.1]).collect();
            let masses: Vec<f64> = pts.iter().map(|p| p.2).collect();
            let mu = PointMassMeasure::from_flat(2, coords, masses).unwrap();
            let f = SampledFunction::new((0..mu.len()).map(|i| pts[i].3).collect()).unwrap();
            let text = write_measure(&mu, Some(&f), None).unwrap();
            let back = parse_measure(&text).unwrap();
            prop_assert_eq!(&back.measure, &mu);
            prop_assert_eq!(back.f.unwrap(), f);
        }
    }
}
