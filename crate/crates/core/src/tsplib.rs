//! TSPLIB instance parsing and the plain-text edge-set format.
//!
//! Edge-set files look like
//!
//! ```text
//! NAME: square
//! DIMENSION: 4
//! EDGES: 4
//! 1 2 10
//! 1 4 10
//! 2 3 10
//! 3 4 10
//! ```
//!
//! with one `u v w` line per edge, `u < v`, 1-based indices, `w` the rounded
//! length, lines sorted by `(u, v)`, LF line endings.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::edges::SparseEdgeSet;
use crate::error::{Error, ParseErrorKind, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DistanceMode {
    /// Euclidean distance rounded to the nearest integer.
    Euc2d,
    /// Euclidean distance rounded up.
    Ceil2d,
}

impl DistanceMode {
    pub fn keyword(self) -> &'static str {
        match self {
            DistanceMode::Euc2d => "EUC_2D",
            DistanceMode::Ceil2d => "CEIL_2D",
        }
    }

    fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "EUC_2D" => Some(DistanceMode::Euc2d),
            "CEIL_2D" => Some(DistanceMode::Ceil2d),
            _ => None,
        }
    }
}

/// An immutable planar point set with a rounded distance function.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    name: String,
    coords: Vec<[f64; 2]>,
    mode: DistanceMode,
}

impl Instance {
    pub fn new(name: impl Into<String>, coords: Vec<[f64; 2]>, mode: DistanceMode) -> Result<Self> {
        if coords.len() < 4 {
            return Err(Error::InvalidInstance(format!(
                "at least 4 vertices required, got {}",
                coords.len()
            )));
        }
        if let Some(i) = coords.iter().position(|c| !c[0].is_finite() || !c[1].is_finite()) {
            return Err(Error::InvalidInstance(format!(
                "vertex {} has a non-finite coordinate",
                i + 1
            )));
        }
        Ok(Instance {
            name: name.into(),
            coords,
            mode,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn mode(&self) -> DistanceMode {
        self.mode
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    #[inline]
    pub fn point(&self, v: usize) -> [f64; 2] {
        self.coords[v]
    }

    /// Number of edges of the complete graph.
    pub fn complete_edge_count(&self) -> u64 {
        let n = self.n() as u64;
        n * (n - 1) / 2
    }
}

fn split_header(line: &str) -> (&str, &str) {
    match line.split_once(':') {
        Some((k, v)) => (k.trim(), v.trim()),
        None => {
            let mut it = line.splitn(2, char::is_whitespace);
            let k = it.next().unwrap_or("").trim();
            (k, it.next().unwrap_or("").trim())
        }
    }
}

/// Parses the TSPLIB subset: NAME, TYPE, COMMENT, DIMENSION, EDGE_WEIGHT_TYPE,
/// NODE_COORD_SECTION and EOF.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut name = String::from("unnamed");
    let mut dimension: Option<(usize, usize)> = None;
    let mut mode: Option<DistanceMode> = None;
    let mut coords: Vec<Option<[f64; 2]>> = Vec::new();
    let mut in_coords = false;
    let mut coord_rows = 0usize;
    let mut section_line = 0usize;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line == "EOF" {
            break;
        }
        if in_coords {
            let first = line.split_whitespace().next().unwrap_or("");
            if first.parse::<i64>().is_err() {
                // A new keyword section ends the coordinate block.
                in_coords = false;
            } else {
                let n = coords.len();
                let mut fields = line.split_whitespace();
                let bad = || Error::parse(lineno, ParseErrorKind::Malformed(line.to_string()));
                let id: i64 = fields.next().and_then(|f| f.parse().ok()).ok_or_else(bad)?;
                let x: f64 = fields.next().and_then(|f| f.parse().ok()).ok_or_else(bad)?;
                let y: f64 = fields.next().and_then(|f| f.parse().ok()).ok_or_else(bad)?;
                if fields.next().is_some() || !x.is_finite() || !y.is_finite() {
                    return Err(bad());
                }
                if id < 1 || id as usize > n {
                    return Err(Error::parse(
                        lineno,
                        ParseErrorKind::IndexOutOfRange { index: id, n },
                    ));
                }
                let slot = &mut coords[id as usize - 1];
                if slot.is_some() {
                    return Err(Error::parse(
                        lineno,
                        ParseErrorKind::Malformed(format!("vertex {id} listed twice")),
                    ));
                }
                *slot = Some([x, y]);
                coord_rows += 1;
                continue;
            }
        }
        let (key, value) = split_header(line);
        match key {
            "NAME" => name = value.to_string(),
            "TYPE" | "COMMENT" | "DISPLAY_DATA_TYPE" => {}
            "DIMENSION" => {
                let d: usize = value.parse().map_err(|_| {
                    Error::parse(lineno, ParseErrorKind::Malformed(line.to_string()))
                })?;
                if d < 4 {
                    return Err(Error::parse(lineno, ParseErrorKind::DimensionTooSmall(d)));
                }
                dimension = Some((d, lineno));
            }
            "EDGE_WEIGHT_TYPE" => {
                mode = Some(DistanceMode::from_keyword(value).ok_or_else(|| {
                    Error::parse(lineno, ParseErrorKind::UnsupportedMode(value.to_string()))
                })?);
            }
            "NODE_COORD_SECTION" => {
                let (d, _) = dimension
                    .ok_or_else(|| Error::parse(lineno, ParseErrorKind::Missing("DIMENSION")))?;
                if mode.is_none() {
                    return Err(Error::parse(lineno, ParseErrorKind::Missing("EDGE_WEIGHT_TYPE")));
                }
                coords = vec![None; d];
                in_coords = true;
                section_line = lineno;
            }
            _ => {
                return Err(Error::parse(
                    lineno,
                    ParseErrorKind::Malformed(format!("unknown keyword `{key}`")),
                ))
            }
        }
    }

    let last = text.lines().count().max(1);
    let (d, _) = dimension.ok_or_else(|| Error::parse(last, ParseErrorKind::Missing("DIMENSION")))?;
    let mode = mode.ok_or_else(|| Error::parse(last, ParseErrorKind::Missing("EDGE_WEIGHT_TYPE")))?;
    if section_line == 0 {
        return Err(Error::parse(last, ParseErrorKind::Missing("NODE_COORD_SECTION")));
    }
    if coord_rows != d {
        return Err(Error::parse(
            section_line,
            ParseErrorKind::CountMismatch {
                expected: d,
                found: coord_rows,
            },
        ));
    }
    let coords = coords.into_iter().map(|c| c.expect("all rows present")).collect();
    Instance::new(name, coords, mode)
}

/// Renders an edge set in the documented text format.
pub fn write_edge_set(instance: &Instance, edges: &SparseEdgeSet) -> Result<String> {
    if edges.n() != instance.n() {
        return Err(Error::DimensionMismatch {
            edges: edges.n(),
            instance: instance.n(),
        });
    }
    let mut out = String::with_capacity(32 + edges.edge_count() * 16);
    let _ = writeln!(out, "NAME: {}", instance.name());
    let _ = writeln!(out, "DIMENSION: {}", instance.n());
    let _ = writeln!(out, "EDGES: {}", edges.edge_count());
    for (u, v) in edges.edges() {
        let _ = writeln!(out, "{} {} {}", u + 1, v + 1, instance.dist(u, v));
    }
    Ok(out)
}

/// Inverse of [`write_edge_set`]. The weight column is accepted but not
/// checked, since no instance is available here.
pub fn parse_edge_set(text: &str) -> Result<SparseEdgeSet> {
    let mut dimension: Option<usize> = None;
    let mut declared: Option<(usize, usize)> = None;
    let mut seen = std::collections::HashSet::new();
    let mut list = Vec::new();
    let mut last_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        last_line = lineno;
        let line = raw.trim();
        if line.is_empty() || line == "EOF" {
            continue;
        }
        let first = line.split_whitespace().next().unwrap_or("");
        if first.parse::<i64>().is_err() {
            let (key, value) = split_header(line);
            let bad = || Error::parse(lineno, ParseErrorKind::Malformed(line.to_string()));
            match key {
                "NAME" => {}
                "DIMENSION" => dimension = Some(value.parse().map_err(|_| bad())?),
                "EDGES" => declared = Some((value.parse().map_err(|_| bad())?, lineno)),
                _ => return Err(bad()),
            }
            continue;
        }
        let n = dimension.ok_or_else(|| Error::parse(lineno, ParseErrorKind::Missing("DIMENSION")))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = || Error::parse(lineno, ParseErrorKind::Malformed(line.to_string()));
        if fields.len() < 2 || fields.len() > 3 {
            return Err(bad());
        }
        let u: i64 = fields[0].parse().map_err(|_| bad())?;
        let v: i64 = fields[1].parse().map_err(|_| bad())?;
        if fields.len() == 3 {
            fields[2].parse::<i64>().map_err(|_| bad())?;
        }
        for idx in [u, v] {
            if idx < 1 || idx as usize > n {
                return Err(Error::parse(
                    lineno,
                    ParseErrorKind::IndexOutOfRange { index: idx, n },
                ));
            }
        }
        let (u, v) = ((u - 1) as usize, (v - 1) as usize);
        if u == v {
            return Err(Error::parse(
                lineno,
                ParseErrorKind::Malformed(format!("self-loop at vertex {}", u + 1)),
            ));
        }
        let key = (u.min(v), u.max(v));
        if !seen.insert(key) {
            return Err(Error::parse(lineno, ParseErrorKind::DuplicateEdge(key.0 + 1, key.1 + 1)));
        }
        list.push(key);
    }
    let n = dimension.ok_or_else(|| Error::parse(last_line.max(1), ParseErrorKind::Missing("DIMENSION")))?;
    if let Some((m, line)) = declared {
        if m != list.len() {
            return Err(Error::parse(
                line,
                ParseErrorKind::CountMismatch {
                    expected: m,
                    found: list.len(),
                },
            ));
        }
    }
    Ok(SparseEdgeSet::from_edges(n, list))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: &str = "NAME : square\nTYPE : TSP\nDIMENSION : 4\nEDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 10 0\n3 10 10\n4 0 10\nEOF\n";

    #[test]
    fn parses_minimal_square() {
        let inst = parse_instance(SQUARE).unwrap();
        assert_eq!(inst.n(), 4);
        assert_eq!(inst.mode(), DistanceMode::Euc2d);
        assert_eq!(inst.name(), "square");
        assert_eq!(inst.point(2), [10.0, 10.0]);
    }

    #[test]
    fn tolerates_compact_headers_and_exponents() {
        let text = "NAME: t\nDIMENSION:4\nEDGE_WEIGHT_TYPE:CEIL_2D\nNODE_COORD_SECTION\n 1   0.0e0 0\n2\t1.5e+01 0\n3 3 4\n4 -2 7.25\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.mode(), DistanceMode::Ceil2d);
        assert_eq!(inst.point(1), [15.0, 0.0]);
        assert_eq!(inst.point(3), [-2.0, 7.25]);
    }

    #[test]
    fn rejects_explicit_weights_with_line_number() {
        let text = "NAME: x\nDIMENSION: 4\nEDGE_WEIGHT_TYPE: EXPLICIT\n";
        let err = parse_instance(text).unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 3,
                kind: ParseErrorKind::UnsupportedMode("EXPLICIT".into())
            }
        );
        assert!(err.to_string().contains("unsupported distance mode"));
    }

    #[test]
    fn rejects_small_dimension_and_missing_sections() {
        let small = "DIMENSION: 3\nEDGE_WEIGHT_TYPE: EUC_2D\n";
        assert!(matches!(
            parse_instance(small),
            Err(Error::Parse { line: 1, kind: ParseErrorKind::DimensionTooSmall(3) })
        ));
        let no_coords = "DIMENSION: 4\nEDGE_WEIGHT_TYPE: EUC_2D\nEOF\n";
        assert!(matches!(
            parse_instance(no_coords),
            Err(Error::Parse { kind: ParseErrorKind::Missing("NODE_COORD_SECTION"), .. })
        ));
        let no_dim = "EDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n1 0 0\n";
        assert!(matches!(
            parse_instance(no_dim),
            Err(Error::Parse { line: 2, kind: ParseErrorKind::Missing("DIMENSION") })
        ));
    }

    #[test]
    fn rejects_malformed_coordinate_line() {
        let text = "DIMENSION: 4\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 1 x\n3 0 1\n4 1 1\n";
        assert!(matches!(
            parse_instance(text),
            Err(Error::Parse { line: 5, kind: ParseErrorKind::Malformed(_) })
        ));
        let short = "DIMENSION: 4\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 1 1\n3 0 1\nEOF\n";
        assert!(matches!(
            parse_instance(short),
            Err(Error::Parse { kind: ParseErrorKind::CountMismatch { expected: 4, found: 3 }, .. })
        ));
    }

    #[test]
    fn writes_square_perimeter() {
        let inst = parse_instance(SQUARE).unwrap();
        let set = SparseEdgeSet::from_edges(4, vec![(0, 1), (1, 2), (2, 3), (0, 3)]);
        let text = write_edge_set(&inst, &set).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(&lines[..3], &["NAME: square", "DIMENSION: 4", "EDGES: 4"]);
        assert_eq!(lines[3], "1 2 10");
        assert_eq!(lines.len(), 7);
        assert_eq!(parse_edge_set(&text).unwrap(), set);
    }

    #[test]
    fn writes_empty_edge_set() {
        let inst = parse_instance(SQUARE).unwrap();
        let text = write_edge_set(&inst, &SparseEdgeSet::empty(4)).unwrap();
        assert_eq!(text, "NAME: square\nDIMENSION: 4\nEDGES: 0\n");
        assert_eq!(parse_edge_set(&text).unwrap().edge_count(), 0);
    }

    #[test]
    fn edge_set_rejections() {
        let out_of_range = "DIMENSION: 4\nEDGES: 1\n1 5 3\n";
        assert!(matches!(
            parse_edge_set(out_of_range),
            Err(Error::Parse { line: 3, kind: ParseErrorKind::IndexOutOfRange { index: 5, n: 4 } })
        ));
        let dup = "DIMENSION: 4\nEDGES: 2\n1 2 3\n2 1 3\n";
        assert!(matches!(
            parse_edge_set(dup),
            Err(Error::Parse { line: 4, kind: ParseErrorKind::DuplicateEdge(1, 2) })
        ));
        let garbage = "DIMENSION: 4\n1 two 3\n";
        assert!(matches!(
            parse_edge_set(garbage),
            Err(Error::Parse { line: 2, kind: ParseErrorKind::Malformed(_) })
        ));
        let count = "DIMENSION: 4\nEDGES: 2\n1 2 3\n";
        assert!(matches!(
            parse_edge_set(count),
            Err(Error::Parse { kind: ParseErrorKind::CountMismatch { expected: 2, found: 1 }, .. })
        ));
    }

    #[test]
    fn dimension_mismatch_on_write() {
        let inst = parse_instance(SQUARE).unwrap();
        assert!(write_edge_set(&inst, &SparseEdgeSet::empty(5)).is_err());
    }
}
