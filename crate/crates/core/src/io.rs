//! Plain-text formats for configurations and triangulations.
//!
//! Polytope files: a header `d n is_lattice`, then `n` lines of `d`
//! coordinates (integers, `p/q` or finite decimals). Triangulation files:
//! one simplex per line as sorted vertex ids, lines in lexicographic order.
//! Files holding several triangulations separate them with a blank line.
//! `#` starts a comment in both formats.

use crate::error::{FormatError, ParseError};
use crate::exact::{format_rational, parse_rational};
use crate::geom::PointConfig;
use crate::tri::Triangulation;
use crate::vset::{VertexSet, MAX_POINTS};

/// Non-empty lines with comments stripped, paired with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_flag(tok: &str, line: usize) -> Result<bool, ParseError> {
    match tok {
        "1" | "true" => Ok(true),
        "0" | "false" => Ok(false),
        _ => Err(ParseError::new(line, format!("expected is_lattice flag 0/1, found `{tok}`"))),
    }
}

pub fn parse_polytope(text: &str) -> Result<PointConfig, FormatError> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| ParseError::new(1, "missing header `d n is_lattice`"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 3 {
        return Err(ParseError::new(hline, "header must be `d n is_lattice`").into());
    }
    let dim: usize = toks[0].parse().map_err(|_| ParseError::new(hline, format!("bad dimension `{}`", toks[0])))?;
    let n: usize = toks[1].parse().map_err(|_| ParseError::new(hline, format!("bad point count `{}`", toks[1])))?;
    let lattice = parse_flag(toks[2], hline)?;
    let mut points = Vec::with_capacity(n);
    let mut last = hline;
    for (ln, line) in lines {
        last = ln;
        if points.len() == n {
            return Err(ParseError::new(ln, format!("more than the declared {n} points")).into());
        }
        let coords = line
            .split_whitespace()
            .map(|t| parse_rational(t).ok_or_else(|| ParseError::new(ln, format!("bad coordinate `{t}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        if coords.len() != dim {
            return Err(ParseError::new(ln, format!("expected {dim} coordinates, found {}", coords.len())).into());
        }
        if lattice && !coords.iter().all(crate::exact::is_integral) {
            return Err(ParseError::new(ln, "non-integral coordinate in a lattice configuration").into());
        }
        points.push(coords);
    }
    if points.len() != n {
        return Err(ParseError::new(last, format!("expected {n} points, found {}", points.len())).into());
    }
    Ok(PointConfig::new(dim, points)?)
}

pub fn write_polytope(config: &PointConfig) -> String {
    let mut out = format!("{} {} {}\n", config.dim(), config.len(), u8::from(config.is_lattice()));
    for p in config.points() {
        let coords: Vec<String> = p.iter().map(format_rational).collect();
        out.push_str(&coords.join(" "));
        out.push('\n');
    }
    out
}

fn parse_simplex(line: &str, ln: usize, dim: usize) -> Result<VertexSet, ParseError> {
    let mut ids = Vec::new();
    for t in line.split_whitespace() {
        let id: usize = t.parse().map_err(|_| ParseError::new(ln, format!("bad vertex id `{t}`")))?;
        if id >= MAX_POINTS {
            return Err(ParseError::new(ln, format!("vertex id {id} exceeds {}", MAX_POINTS - 1)));
        }
        ids.push(id);
    }
    let set = VertexSet::from_ids(ids.iter().copied());
    if set.len() != ids.len() {
        return Err(ParseError::new(ln, "repeated vertex id"));
    }
    if set.len() != dim + 1 {
        return Err(ParseError::new(ln, format!("expected {} vertex ids, found {}", dim + 1, set.len())));
    }
    Ok(set)
}

pub fn parse_triangulation(text: &str, dim: usize) -> Result<Triangulation, ParseError> {
    let simplices = content_lines(text).map(|(ln, l)| parse_simplex(l, ln, dim)).collect::<Result<Vec<_>, _>>()?;
    if simplices.is_empty() {
        return Err(ParseError::new(1, "no simplices"));
    }
    Ok(Triangulation::new(dim, simplices))
}

pub fn write_triangulation(tri: &Triangulation) -> String {
    let mut out = String::new();
    for s in tri.simplices() {
        out.push_str(&s.to_string());
        out.push('\n');
    }
    out
}

/// Blank-line separated blocks, each one triangulation.
pub fn parse_triangulations(text: &str, dim: usize) -> Result<Vec<Triangulation>, ParseError> {
    let mut out = Vec::new();
    let mut block = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if raw.trim().is_empty() {
            if !block.is_empty() {
                out.push(Triangulation::new(dim, std::mem::take(&mut block)));
            }
            continue;
        }
        if !line.is_empty() {
            block.push(parse_simplex(line, i + 1, dim)?);
        }
    }
    if !block.is_empty() {
        out.push(Triangulation::new(dim, block));
    }
    Ok(out)
}

pub fn write_triangulations(tris: &[Triangulation]) -> String {
    tris.iter().map(write_triangulation).collect::<Vec<_>>().join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn polytope_round_trip() {
        for (_, c) in fixtures::all() {
            let text = write_polytope(&c);
            assert_eq!(parse_polytope(&text).unwrap(), c);
        }
    }

    #[test]
    fn polytope_with_comments_and_fractions() {
        let text = "# a triangle\n2 3 0\n0 0\n1/2 0 # half\n0 0.25\n";
        let c = parse_polytope(text).unwrap();
        assert_eq!(c.len(), 3);
        assert!(!c.is_lattice());
        assert_eq!(parse_polytope(&write_polytope(&c)).unwrap(), c);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_polytope("2 3 0\n0 0\n1 x\n0 1\n").unwrap_err();
        assert_eq!(err, FormatError::Parse(ParseError::new(3, "bad coordinate `x`")));
        let err = parse_polytope("2 3 0\n0 0\n1 0\n").unwrap_err();
        assert!(matches!(err, FormatError::Parse(ParseError { line: 3, .. })));
        let err = parse_polytope("2 3 1\n0 0\n1/2 0\n0 1\n").unwrap_err();
        assert!(matches!(err, FormatError::Parse(ParseError { line: 3, .. })));
        let err = parse_polytope("2 3 0\n0 0\n1 1\n2 2\n").unwrap_err();
        assert!(matches!(err, FormatError::Geom(_)));
        let err = parse_triangulation("0 1 2\n0 2\n", 2).unwrap_err();
        assert_eq!(err.line, 2);
    }

    #[test]
    fn triangulation_round_trip() {
        let t = Triangulation::from_tuples(2, &[&[0, 2, 3], &[0, 1, 2]]);
        let text = write_triangulation(&t);
        assert_eq!(text, "0 1 2\n0 2 3\n");
        let back = parse_triangulation(&text, 2).unwrap();
        assert_eq!(back.key(), t.key());
        let many = vec![t.clone(), Triangulation::from_tuples(2, &[&[0, 1, 3], &[1, 2, 3]])];
        assert_eq!(parse_triangulations(&write_triangulations(&many), 2).unwrap(), many);
    }
}
