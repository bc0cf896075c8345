//! Finite unions of pairwise-disjoint convex pieces.

use serde::Serialize;

use crate::convex::{distance, ConvexPiece, Point, Shape};
use crate::error::{check_dim, Error, Result};

/// Default absolute tolerance on distances below which two pieces count as tied.
pub const DEFAULT_TIE_TOL: f64 = 1e-9;

/// Iteration cap for the numerical gap between pieces without a closed form.
pub const DEFAULT_GAP_MAX_ITERS: usize = 10_000;
pub const DEFAULT_GAP_TOL: f64 = 1e-12;

/// A union of convex pieces, indexed from 1 in every report.
#[derive(Debug, Clone, PartialEq)]
pub struct UcsSet {
    name: String,
    pieces: Vec<ConvexPiece>,
}

/// One element of the (possibly multi-valued) projection onto a union.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UcsProjection {
    pub point: Point,
    /// 1-based index of the selected piece.
    pub piece_index: usize,
    pub nearest_distance: f64,
    /// Second-smallest piece distance minus the smallest; infinite for a
    /// single-piece union.
    pub margin: f64,
    pub is_tie: bool,
}

/// Separation between two pieces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gap {
    pub distance: f64,
    /// False for ball/ball and box/box pairs, which have closed forms.
    pub approximate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisjointViolation {
    pub first: usize,
    pub second: usize,
    pub gap: f64,
    pub approximate: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DisjointReport {
    pub violations: Vec<DisjointViolation>,
}

impl DisjointReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

impl UcsSet {
    pub fn new(name: impl Into<String>, pieces: Vec<ConvexPiece>) -> Result<Self> {
        let name = name.into();
        let Some(first) = pieces.first() else {
            return Err(Error::Validation(format!("set '{name}' has no pieces")));
        };
        let dim = first.dim();
        for piece in &pieces {
            check_dim(dim, piece.dim())?;
        }
        Ok(UcsSet { name, pieces })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn pieces(&self) -> &[ConvexPiece] {
        &self.pieces
    }

    /// Piece by 1-based index.
    pub fn piece(&self, index: usize) -> &ConvexPiece {
        &self.pieces[index - 1]
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].dim()
    }

    /// Projects onto the nearest piece. Ties go to the smallest index and are
    /// flagged when the runner-up is within `tie_tol` of the minimum.
    pub fn project(&self, x: &Point, tie_tol: f64) -> Result<UcsProjection> {
        check_dim(self.dim(), x.dim())?;
        Ok(self.project_unchecked(x, tie_tol))
    }

    pub(crate) fn project_unchecked(&self, x: &Point, tie_tol: f64) -> UcsProjection {
        let mut best: Option<(usize, Point, f64)> = None;
        let mut runner_up = f64::INFINITY;
        for (idx, piece) in self.pieces.iter().enumerate() {
            let p = piece.project_unchecked(x);
            let d = distance(x, &p);
            match &best {
                Some((_, _, best_d)) if d >= *best_d => runner_up = runner_up.min(d),
                _ => {
                    if let Some((_, _, old)) = best.take() {
                        runner_up = runner_up.min(old);
                    }
                    best = Some((idx, p, d));
                }
            }
        }
        let (idx, point, nearest_distance) = best.expect("union has at least one piece");
        let margin = runner_up - nearest_distance;
        UcsProjection {
            point,
            piece_index: idx + 1,
            nearest_distance,
            margin,
            is_tie: margin <= tie_tol,
        }
    }

    pub fn distance(&self, x: &Point) -> Result<f64> {
        check_dim(self.dim(), x.dim())?;
        Ok(self.distance_unchecked(x))
    }

    pub(crate) fn distance_unchecked(&self, x: &Point) -> f64 {
        self.pieces
            .iter()
            .map(|piece| piece.distance_unchecked(x))
            .fold(f64::INFINITY, f64::min)
    }

    /// Reports every pair of pieces that is not strictly separated.
    pub fn check_disjoint(&self) -> DisjointReport {
        let mut violations = Vec::new();
        for s in 0..self.pieces.len() {
            for t in s + 1..self.pieces.len() {
                let g = gap_unchecked(
                    &self.pieces[s],
                    &self.pieces[t],
                    DEFAULT_GAP_MAX_ITERS,
                    DEFAULT_GAP_TOL,
                );
                let separated = if g.approximate {
                    g.distance > DEFAULT_GAP_TOL.sqrt()
                } else {
                    g.distance > 0.0
                };
                if !separated {
                    violations.push(DisjointViolation {
                        first: s + 1,
                        second: t + 1,
                        gap: g.distance,
                        approximate: g.approximate,
                    });
                }
            }
        }
        DisjointReport { violations }
    }
}

/// Distance between two pieces. Exact for ball/ball and box/box; otherwise
/// estimated by alternating projections, stopping once an iterate moves less
/// than `tol` or after `max_iters` rounds.
pub fn gap(a: &ConvexPiece, b: &ConvexPiece, max_iters: usize, tol: f64) -> Result<Gap> {
    check_dim(a.dim(), b.dim())?;
    Ok(gap_unchecked(a, b, max_iters, tol))
}

fn gap_unchecked(a: &ConvexPiece, b: &ConvexPiece, max_iters: usize, tol: f64) -> Gap {
    match (a.shape(), b.shape()) {
        (
            Shape::Ball {
                center: ca,
                radius: ra,
            },
            Shape::Ball {
                center: cb,
                radius: rb,
            },
        ) => Gap {
            distance: (distance(ca, cb) - ra - rb).max(0.0),
            approximate: false,
        },
        (
            Shape::Box {
                lower: la,
                upper: ua,
            },
            Shape::Box {
                lower: lb,
                upper: ub,
            },
        ) => {
            let sq: f64 = (0..la.dim())
                .map(|i| {
                    let g = (lb[i] - ua[i]).max(la[i] - ub[i]).max(0.0);
                    g * g
                })
                .sum();
            Gap {
                distance: sq.sqrt(),
                approximate: false,
            }
        }
        _ => {
            let mut on_a = a.witness();
            let mut on_b = b.project_unchecked(&on_a);
            for _ in 0..max_iters {
                let next_a = a.project_unchecked(&on_b);
                let next_b = b.project_unchecked(&next_a);
                let moved = next_a.distance(&on_a).max(next_b.distance(&on_b));
                on_a = next_a;
                on_b = next_b;
                if moved < tol {
                    break;
                }
            }
            Gap {
                distance: on_a.distance(&on_b),
                approximate: true,
            }
        }
    }
}
