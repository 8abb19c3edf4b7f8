//! Text formats for complexes, filtrations, point clouds and measures.
//!
//! All formats are line based: `#` starts a comment, blank lines are
//! skipped, fields are comma separated.

use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::complex::{ComplexError, SimplicialComplex, Vertex};
use crate::descriptors::{DescriptorError, GroundSpace, Location, SignedMeasure};
use crate::filtrations::{Filtration, FiltrationError, PointCloud};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: expected {expected} values, found {got}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("filtration has {got} rows but the complex has {expected} simplices")]
    RowCount { expected: usize, got: usize },
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Filtration(#[from] FiltrationError),
    #[error(transparent)]
    Descriptor(#[from] DescriptorError),
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then(|| (i + 1, line.split(',').map(str::trim).collect()))
    })
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

fn parse_real(line: usize, field: &str) -> Result<f64, ParseError> {
    let v: f64 = field
        .parse()
        .map_err(|_| syntax(line, format!("`{field}` is not a number")))?;
    if !v.is_finite() {
        return Err(syntax(line, format!("`{field}` is not finite")));
    }
    Ok(v)
}

/// Simplices in file order, as vertex lists.
pub fn parse_simplices(text: &str) -> Result<Vec<Vec<Vertex>>, ParseError> {
    records(text)
        .map(|(line, fields)| {
            fields
                .iter()
                .map(|f| {
                    f.parse::<Vertex>()
                        .map_err(|_| syntax(line, format!("`{f}` is not a vertex id")))
                })
                .collect()
        })
        .collect()
}

pub fn parse_complex(text: &str) -> Result<SimplicialComplex, ParseError> {
    Ok(SimplicialComplex::from_simplices(parse_simplices(text)?)?)
}

/// Filtration rows in the same order as the simplices of the complex file.
pub fn parse_filtration(
    complex_text: &str,
    filtration_text: &str,
    n: usize,
) -> Result<Filtration, ParseError> {
    let simplices = parse_simplices(complex_text)?;
    let complex = Arc::new(SimplicialComplex::from_simplices(simplices.clone())?);
    let rows: Vec<(usize, Vec<&str>)> = records(filtration_text).collect();
    if rows.len() != simplices.len() {
        return Err(ParseError::RowCount {
            expected: simplices.len(),
            got: rows.len(),
        });
    }
    let mut values = vec![0.0; complex.len() * n];
    for (s, (line, fields)) in simplices.iter().zip(rows) {
        if fields.len() != n {
            return Err(ParseError::DimensionMismatch {
                line,
                expected: n,
                got: fields.len(),
            });
        }
        let mut sorted = s.clone();
        sorted.sort_unstable();
        let idx = complex.index_of(&sorted).expect("simplex was just inserted");
        for (i, f) in fields.iter().enumerate() {
            values[idx * n + i] = parse_real(line, f)?;
        }
    }
    Ok(Filtration::new(complex, n, values)?)
}

/// Complex and filtration files for `f`, simplices in canonical order.
pub fn write_filtration(f: &Filtration) -> (String, String) {
    let mut complex = String::new();
    let mut values = String::new();
    for (s, simplex) in f.complex().simplices().iter().enumerate() {
        let ids: Vec<String> = simplex.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(complex, "{}", ids.join(","));
        let vals: Vec<String> = f.value(s).iter().map(|v| v.to_string()).collect();
        let _ = writeln!(values, "{}", vals.join(","));
    }
    (complex, values)
}

pub fn parse_points(text: &str) -> Result<PointCloud, ParseError> {
    let mut points: Vec<Vec<f64>> = Vec::new();
    for (line, fields) in records(text) {
        if let Some(first) = points.first() {
            if first.len() != fields.len() {
                return Err(ParseError::DimensionMismatch {
                    line,
                    expected: first.len(),
                    got: fields.len(),
                });
            }
        }
        points.push(
            fields
                .iter()
                .map(|f| parse_real(line, f))
                .collect::<Result<_, _>>()?,
        );
    }
    Ok(PointCloud::new(points)?)
}

pub fn write_points(x: &PointCloud) -> String {
    let mut out = String::new();
    for p in x.points() {
        let row: Vec<String> = p.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

fn header(ground: GroundSpace) -> String {
    let n = ground.parameters();
    let cols: Vec<String> = match ground {
        GroundSpace::Rn(_) => (1..=n).map(|i| format!("loc_{i}")).collect(),
        GroundSpace::Bars(_) => (1..=n)
            .map(|i| format!("birth_{i}"))
            .chain((1..=n).map(|i| format!("death_{i}")))
            .collect(),
    };
    format!("{},multiplicity", cols.join(","))
}

/// CSV with a header row; infinite deaths are written `inf`.
pub fn write_measure(m: &SignedMeasure) -> String {
    let mut out = header(m.ground());
    out.push('\n');
    let n = m.ground().parameters();
    for (loc, mult) in m.masses() {
        let cells: Vec<String> = match loc {
            Location::Point(p) => p.iter().map(|v| v.to_string()).collect(),
            Location::Bar { birth, death } => birth
                .iter()
                .map(|v| v.to_string())
                .chain(match death {
                    Some(d) => d.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                    None => vec!["inf".to_string(); n],
                })
                .collect(),
        };
        let _ = writeln!(out, "{},{:+}", cells.join(","), mult);
    }
    out
}

/// Reads a measure written by [`write_measure`]. The header decides the
/// ground space.
pub fn parse_measure(text: &str) -> Result<SignedMeasure, ParseError> {
    let mut rows = records(text);
    let (hline, head) = rows.next().ok_or_else(|| syntax(1, "missing header"))?;
    if head.last() != Some(&"multiplicity") {
        return Err(syntax(hline, "last column must be `multiplicity`"));
    }
    let cols = head.len() - 1;
    let ground = if head.first().is_some_and(|c| c.starts_with("birth_")) {
        if cols % 2 != 0 {
            return Err(syntax(hline, "bar header needs as many death as birth columns"));
        }
        GroundSpace::Bars(cols / 2)
    } else if head.first().is_some_and(|c| c.starts_with("loc_")) {
        GroundSpace::Rn(cols)
    } else {
        return Err(syntax(hline, "header must start with `loc_1` or `birth_1`"));
    };
    let mut masses = Vec::new();
    for (line, fields) in rows {
        if fields.len() != cols + 1 {
            return Err(ParseError::DimensionMismatch {
                line,
                expected: cols + 1,
                got: fields.len(),
            });
        }
        let mult: i64 = fields[cols]
            .trim_start_matches('+')
            .parse()
            .map_err(|_| syntax(line, format!("`{}` is not an integer", fields[cols])))?;
        let loc = match ground {
            GroundSpace::Rn(_) => Location::Point(
                fields[..cols]
                    .iter()
                    .map(|f| parse_real(line, f))
                    .collect::<Result<_, _>>()?,
            ),
            GroundSpace::Bars(n) => {
                let birth = fields[..n]
                    .iter()
                    .map(|f| parse_real(line, f))
                    .collect::<Result<_, _>>()?;
                let death_fields = &fields[n..2 * n];
                let infinite = death_fields.iter().filter(|f| **f == "inf").count();
                let death = if infinite == n {
                    None
                } else if infinite == 0 {
                    Some(
                        death_fields
                            .iter()
                            .map(|f| parse_real(line, f))
                            .collect::<Result<_, _>>()?,
                    )
                } else {
                    return Err(syntax(line, "death must be all finite or all `inf`"));
                };
                Location::Bar { birth, death }
            }
        };
        masses.push((loc, mult));
    }
    Ok(SignedMeasure::new(ground, masses)?)
}
