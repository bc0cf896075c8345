//! The `.ucs` problem file: a TOML document.
//!
//! ```toml
//! dimension = 2
//!
//! [[sets]]
//! name = "C1"
//!
//! [[sets.pieces]]
//! shape = "ball"
//! center = [0.0, 1.0]
//! radius = 1.0
//!
//! [[sets.pieces]]
//! shape = "box"
//! lower = [3.0, 0.0]
//! upper = [4.0, 1.0]
//!
//! [[sets]]
//! name = "C2"
//! pieces = [
//!   { shape = "halfspace", normal = [1.0, 0.0], offset = 0.0 },
//!   { shape = "hyperplane", normal = [0.0, 1.0], offset = 2.0 },
//! ]
//!
//! [[initial_points]]
//! r = 1
//! coords = [0.5, 1.0]
//! ```

use std::fmt::Write as _;
use std::ops::Range;

use serde::Deserialize;
use toml::Spanned;

use crate::convex::{ConvexPiece, Point, Shape};
use crate::error::{check_dim, Error, Result};
use crate::solver::Problem;
use crate::ucs::UcsSet;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    dimension: Spanned<usize>,
    sets: Vec<Spanned<RawSet>>,
    #[serde(default)]
    initial_points: Vec<Spanned<RawInitialPoint>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSet {
    name: Option<String>,
    pieces: Vec<Spanned<RawPiece>>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
enum RawPiece {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Halfspace { normal: Vec<f64>, offset: f64 },
    Hyperplane { normal: Vec<f64>, offset: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitialPoint {
    r: usize,
    coords: Vec<f64>,
}

/// A parsed problem file.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    pub problem: Problem,
    /// Optional start points as `(r, point)`, `r` 1-based.
    pub initial_points: Vec<(usize, Point)>,
    /// Disjointness findings. Pieces of one set are expected to be pairwise disjoint.
    pub warnings: Vec<String>,
}

fn position(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn located(text: &str, span: Range<usize>, err: Error) -> Error {
    let (line, column) = position(text, span.start);
    Error::Located {
        line,
        column,
        source: Box::new(err),
    }
}

fn point(coords: Vec<f64>, dimension: usize) -> Result<Point> {
    check_dim(dimension, coords.len())?;
    Point::new(coords)
}

fn build_piece(raw: RawPiece, dimension: usize) -> Result<ConvexPiece> {
    match raw {
        RawPiece::Ball { center, radius } => ConvexPiece::ball(point(center, dimension)?, radius),
        RawPiece::Box { lower, upper } => {
            ConvexPiece::cuboid(point(lower, dimension)?, point(upper, dimension)?)
        }
        RawPiece::Halfspace { normal, offset } => {
            ConvexPiece::halfspace(point(normal, dimension)?, offset)
        }
        RawPiece::Hyperplane { normal, offset } => {
            ConvexPiece::hyperplane(point(normal, dimension)?, offset)
        }
    }
}

/// Parses and validates a problem file, then audits each set for overlapping pieces.
pub fn parse_problem(text: &str) -> Result<ProblemFile> {
    let raw: RawProblem = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| position(text, s.start));
        Error::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;

    let dim_span = raw.dimension.span();
    let dimension = raw.dimension.into_inner();
    if dimension == 0 {
        return Err(located(
            text,
            dim_span,
            Error::Validation("dimension must be positive".into()),
        ));
    }
    if raw.sets.is_empty() {
        return Err(Error::Validation(
            "problem needs at least one [[sets]] entry".into(),
        ));
    }

    let mut sets = Vec::with_capacity(raw.sets.len());
    for (i, raw_set) in raw.sets.into_iter().enumerate() {
        let set_span = raw_set.span();
        let raw_set = raw_set.into_inner();
        let name = raw_set.name.unwrap_or_else(|| format!("C{}", i + 1));
        let mut pieces = Vec::with_capacity(raw_set.pieces.len());
        for raw_piece in raw_set.pieces {
            let span = raw_piece.span();
            let piece = build_piece(raw_piece.into_inner(), dimension)
                .map_err(|e| located(text, span, e))?;
            pieces.push(piece);
        }
        let set = UcsSet::new(name, pieces).map_err(|e| located(text, set_span, e))?;
        sets.push(set);
    }
    let problem = Problem::new(dimension, sets)?;

    let mut initial_points = Vec::with_capacity(raw.initial_points.len());
    for raw_point in raw.initial_points {
        let span = raw_point.span();
        let RawInitialPoint { r, coords } = raw_point.into_inner();
        let p = point(coords, dimension).map_err(|e| located(text, span.clone(), e))?;
        if r == 0 || r > problem.set(1).len() {
            return Err(located(
                text,
                span,
                Error::Validation(format!(
                    "initial point index r = {r} out of range 1..={}",
                    problem.set(1).len()
                )),
            ));
        }
        initial_points.push((r, p));
    }

    let mut warnings = Vec::new();
    for set in problem.sets() {
        for v in set.check_disjoint().violations {
            warnings.push(format!(
                "set '{}': pieces {} and {} are not disjoint (gap {}{})",
                set.name(),
                v.first,
                v.second,
                v.gap,
                if v.approximate {
                    ", numerical estimate"
                } else {
                    ""
                }
            ));
        }
    }

    Ok(ProblemFile {
        problem,
        initial_points,
        warnings,
    })
}

/// Formats a float with 17 significant digits, which round-trips any `f64`.
pub fn format_float(value: f64) -> String {
    format!("{value:.16e}")
}

fn float_list(values: &[f64]) -> String {
    let items: Vec<String> = values.iter().map(|v| format_float(*v)).collect();
    format!("[{}]", items.join(", "))
}

/// Writes a problem in the file format accepted by [`parse_problem`].
pub fn serialize_problem(problem: &Problem, initial_points: &[(usize, Point)]) -> String {
    let mut out = String::new();
    writeln!(out, "dimension = {}", problem.dimension()).unwrap();
    for set in problem.sets() {
        writeln!(out, "\n[[sets]]").unwrap();
        writeln!(
            out,
            "name = {}",
            toml::Value::String(set.name().to_string())
        )
        .unwrap();
        for piece in set.pieces() {
            writeln!(out, "\n[[sets.pieces]]").unwrap();
            writeln!(out, "shape = \"{}\"", piece.kind()).unwrap();
            match piece.shape() {
                Shape::Ball { center, radius } => {
                    writeln!(out, "center = {}", float_list(center)).unwrap();
                    writeln!(out, "radius = {}", format_float(*radius)).unwrap();
                }
                Shape::Box { lower, upper } => {
                    writeln!(out, "lower = {}", float_list(lower)).unwrap();
                    writeln!(out, "upper = {}", float_list(upper)).unwrap();
                }
                Shape::Halfspace { normal, offset } | Shape::Hyperplane { normal, offset } => {
                    writeln!(out, "normal = {}", float_list(normal)).unwrap();
                    writeln!(out, "offset = {}", format_float(*offset)).unwrap();
                }
            }
        }
    }
    for (r, p) in initial_points {
        writeln!(out, "\n[[initial_points]]").unwrap();
        writeln!(out, "r = {r}").unwrap();
        writeln!(out, "coords = {}", float_list(p)).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
dimension = 2

[[sets]]
name = "C1"
pieces = [
  { shape = "ball", center = [0.0, 1.0], radius = 1.0 },
  { shape = "ball", center = [100.0, 2.0], radius = 1.0 },
  { shape = "ball", center = [200.0, 2.0], radius = 1.0 },
  { shape = "ball", center = [-100.0, 2.0], radius = 1.0 },
]

[[sets]]
name = "C2"
pieces = [
  { shape = "ball", center = [0.0, -1.0], radius = 1.0 },
  { shape = "ball", center = [100.0, -2.0], radius = 1.0 },
]
"#;

    #[test]
    fn parses_example() {
        let file = parse_problem(EXAMPLE).unwrap();
        assert_eq!(file.problem.set_count(), 2);
        assert_eq!(file.problem.set(1).len(), 4);
        assert_eq!(file.problem.set(2).len(), 2);
        assert!(file.warnings.is_empty());
        assert!(file.initial_points.is_empty());
    }

    #[test]
    fn negative_radius_is_a_validation_error() {
        let text = "dimension = 1\n[[sets]]\n[[sets.pieces]]\nshape = \"ball\"\ncenter = [0.0]\nradius = -1.0\n";
        let err = parse_problem(text).unwrap_err();
        assert!(matches!(err.root(), Error::Validation(_)), "{err}");
        assert!(matches!(err, Error::Located { line: 3, .. }), "{err}");
    }

    #[test]
    fn wrong_center_length_is_a_dimension_error() {
        let text = "dimension = 2\n[[sets]]\npieces = [{ shape = \"ball\", center = [0.0, 0.0, 0.0], radius = 1.0 }]\n";
        let err = parse_problem(text).unwrap_err();
        assert_eq!(
            err.root(),
            &Error::DimensionMismatch {
                expected: 2,
                found: 3
            }
        );
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_problem("dimension = 2\nsets = [ oops ]\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_problem("dimension = 2\n[[sets]]\npieces = [{ shape = \"cone\" }]\n")
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        assert!(parse_problem("dimension = 2\nsets = []\n").is_err());
    }

    #[test]
    fn overlapping_pieces_produce_warnings() {
        let text = "dimension = 2\n[[sets]]\npieces = [\n { shape = \"ball\", center = [0.0, 0.0], radius = 1.0 },\n { shape = \"ball\", center = [1.0, 0.0], radius = 1.0 },\n]\n";
        let file = parse_problem(text).unwrap();
        assert_eq!(file.warnings.len(), 1);
        assert!(file.warnings[0].contains("pieces 1 and 2"));
    }

    #[test]
    fn initial_points() {
        let text = format!("{EXAMPLE}\n[[initial_points]]\nr = 1\ncoords = [0.5, 1.0]\n");
        let file = parse_problem(&text).unwrap();
        assert_eq!(
            file.initial_points,
            vec![(1, Point::new(vec![0.5, 1.0]).unwrap())]
        );
        let text = format!("{EXAMPLE}\n[[initial_points]]\nr = 5\ncoords = [0.5, 1.0]\n");
        assert!(parse_problem(&text).is_err());
    }

    #[test]
    fn all_shapes_round_trip() {
        let text = r#"
dimension = 3
[[sets]]
name = "mixed \"one\""
pieces = [
  { shape = "box", lower = [0.1, -0.2, 0.3], upper = [1.0, 1.0, 1.0] },
  { shape = "halfspace", normal = [1.0, 2.0, 3.0], offset = -7.25 },
]
[[sets]]
pieces = [{ shape = "hyperplane", normal = [0.0, 0.0, 1.0], offset = 0.3333333333333333 }]
[[initial_points]]
r = 2
coords = [0.0, 0.0, -5.0]
"#;
        let file = parse_problem(text).unwrap();
        let again = parse_problem(&serialize_problem(&file.problem, &file.initial_points)).unwrap();
        assert_eq!(file, again);
        assert_eq!(again.problem.set(2).name(), "C2");
    }

    #[test]
    fn float_format_has_seventeen_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(-100.0), "-1.0000000000000000e2");
    }
}
