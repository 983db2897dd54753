use std::fmt::Write as _;

use super::chain::TriangulatedCurrent;
use crate::error::{Error, Result};

/// Text form: a header `N k count`, then per simplex its `(k + 1) N` vertex coordinates
/// followed by an integer multiplicity, all whitespace separated.
pub fn write_mesh(current: &TriangulatedCurrent) -> String {
    let mut out = format!("{} {} {}\n", current.ambient_dim(), current.degree(), current.len());
    for s in current.simplices() {
        let mut fields: Vec<String> = Vec::new();
        for v in &s.vertices {
            fields.extend(current.vertices()[*v].iter().map(|x| x.to_string()));
        }
        fields.push(s.multiplicity.to_string());
        let _ = writeln!(out, "{}", fields.join(" "));
    }
    out
}

pub fn parse_mesh(text: &str) -> Result<TriangulatedCurrent> {
    let mut tokens = text.lines().enumerate().flat_map(|(i, line)| line.split_whitespace().map(move |t| (i + 1, t)));
    let mut last_line = 1;
    let mut next = |what: &str| -> Result<(usize, &str)> {
        let item = tokens.next().ok_or_else(|| Error::MeshParse { line: last_line, message: format!("missing {what}") })?;
        last_line = item.0;
        Ok(item)
    };
    let parse_usize = |(line, t): (usize, &str), what: &str| {
        t.parse::<usize>().map_err(|_| Error::MeshParse { line, message: format!("bad {what} {t:?}") })
    };
    let dim = parse_usize(next("ambient dimension")?, "ambient dimension")?;
    let degree = parse_usize(next("degree")?, "degree")?;
    let count = parse_usize(next("simplex count")?, "simplex count")?;
    let mut current = TriangulatedCurrent::new(dim, degree).map_err(|e| Error::MeshParse { line: 1, message: e.to_string() })?;
    for _ in 0..count {
        let mut points = Vec::with_capacity(degree + 1);
        let mut line = 0;
        for _ in 0..=degree {
            let mut p = Vec::with_capacity(dim);
            for _ in 0..dim {
                let (l, t) = next("coordinate")?;
                line = l;
                p.push(t.parse::<f64>().map_err(|_| Error::MeshParse { line: l, message: format!("bad coordinate {t:?}") })?);
            }
            points.push(p);
        }
        let (l, t) = next("multiplicity")?;
        let multiplicity = t.parse::<i64>().map_err(|_| Error::MeshParse { line: l, message: format!("bad multiplicity {t:?}") })?;
        current
            .add_simplex(&points, multiplicity)
            .map_err(|e| Error::MeshParse { line: line.max(l), message: e.to_string() })?;
    }
    if let Ok((line, t)) = next("") {
        return Err(Error::MeshParse { line, message: format!("trailing token {t:?}") });
    }
    Ok(current)
}
