//! Brute-force oracles for small instances.
//!
//! Nothing here shares a code path with the solver's nearest-piece selection:
//! piece distances are evaluated from their closed forms and every piece is
//! compared. Combination feasibility and the nearest-piece uniqueness check are
//! numerical evidence, not certificates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::convex::{dot, norm, ConvexPiece, Point, Shape};
use crate::error::{check_dim, Error, Result};
use crate::solver::{Problem, SolveReport};
use crate::ucs::UcsSet;

/// Distance from `x` to `piece` by its textbook closed form.
pub fn closed_form_distance(piece: &ConvexPiece, x: &[f64]) -> f64 {
    match piece.shape() {
        Shape::Ball { center, radius } => {
            let d: f64 = x
                .iter()
                .zip(center.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            (d - radius).max(0.0)
        }
        Shape::Box { lower, upper } => x
            .iter()
            .zip(lower.iter().zip(upper.iter()))
            .map(|(xi, (l, u))| {
                let e = (l - xi).max(xi - u).max(0.0);
                e * e
            })
            .sum::<f64>()
            .sqrt(),
        Shape::Halfspace { normal, offset } => ((dot(normal, x) - offset) / norm(normal)).max(0.0),
        Shape::Hyperplane { normal, offset } => (dot(normal, x) - offset).abs() / norm(normal),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BruteForceProjection {
    /// All 1-based piece indices within the tie tolerance of the minimum, ascending.
    pub nearest: Vec<usize>,
    pub distance: f64,
    /// Distance to every piece, in piece order.
    pub distances: Vec<f64>,
}

impl BruteForceProjection {
    pub fn piece_index(&self) -> usize {
        self.nearest[0]
    }

    pub fn is_tie(&self) -> bool {
        self.nearest.len() > 1
    }
}

/// Exhaustive nearest-piece search over a union.
pub fn brute_force_ucs_projection(
    set: &UcsSet,
    x: &Point,
    tie_tol: f64,
) -> Result<BruteForceProjection> {
    check_dim(set.dim(), x.dim())?;
    let distances: Vec<f64> = set
        .pieces()
        .iter()
        .map(|piece| closed_form_distance(piece, x))
        .collect();
    let mut order: Vec<usize> = (0..distances.len()).collect();
    order.sort_by(|&a, &b| distances[a].total_cmp(&distances[b]).then(a.cmp(&b)));
    let distance = distances[order[0]];
    let mut nearest: Vec<usize> = order
        .iter()
        .take_while(|&&i| distances[i] - distance <= tie_tol)
        .map(|&i| i + 1)
        .collect();
    nearest.sort_unstable();
    Ok(BruteForceProjection {
        nearest,
        distance,
        distances,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleConfig {
    pub eps_residual: f64,
    pub feasibility_tol: f64,
    pub max_sweeps: usize,
    /// Sweeps over which a residual that does not drop by more than
    /// `eps_residual` ends the run early.
    pub stall_window: usize,
    pub combo_budget: u128,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            eps_residual: 1e-8,
            feasibility_tol: 1e-6,
            max_sweeps: 5000,
            stall_window: 50,
            combo_budget: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComboReport {
    /// One 1-based piece index per set.
    pub combo: Vec<usize>,
    pub feasible: bool,
    pub witness: Option<Point>,
    /// Largest distance from the final iterate to any piece of the combination.
    pub final_gap: f64,
    pub sweeps_used: usize,
}

fn combo_at(mut index: u128, sizes: &[usize]) -> Vec<usize> {
    let mut combo = vec![0; sizes.len()];
    for (slot, &size) in combo.iter_mut().zip(sizes).rev() {
        *slot = (index % size as u128) as usize + 1;
        index /= size as u128;
    }
    combo
}

fn run_combo(problem: &Problem, combo: Vec<usize>, config: &OracleConfig) -> ComboReport {
    let pieces: Vec<&ConvexPiece> = combo
        .iter()
        .enumerate()
        .map(|(i, &j)| problem.set(i + 1).piece(j))
        .collect();
    // Start in the first piece and visit the others in cyclic order, ending on the first.
    let order: Vec<&ConvexPiece> = pieces[1..].iter().chain(&pieces[..1]).copied().collect();
    let mut x = pieces[0].witness();
    let mut residuals: Vec<f64> = Vec::new();
    let mut residual = f64::INFINITY;
    while residuals.len() < config.max_sweeps {
        residual = 0.0;
        for piece in &order {
            let next = piece.project_unchecked(&x);
            residual = residual.max(next.distance(&x));
            x = next;
        }
        residuals.push(residual);
        if residual <= config.eps_residual {
            break;
        }
        let n = residuals.len();
        if n >= config.stall_window
            && residuals[n - config.stall_window] - residual <= config.eps_residual
        {
            break;
        }
    }
    let final_gap = pieces
        .iter()
        .map(|p| closed_form_distance(p, &x))
        .fold(0.0, f64::max);
    let feasible = residual <= config.eps_residual && final_gap <= config.feasibility_tol;
    ComboReport {
        combo,
        feasible,
        witness: feasible.then_some(x),
        final_gap,
        sweeps_used: residuals.len(),
    }
}

/// Runs plain cyclic projections on every choice of one piece per set.
///
/// Combinations are listed lexicographically with the first set's piece
/// varying slowest.
pub fn enumerate_feasible_combos(
    problem: &Problem,
    config: &OracleConfig,
) -> Result<Vec<ComboReport>> {
    let sizes: Vec<usize> = problem.sets().iter().map(UcsSet::len).collect();
    let combos = sizes
        .iter()
        .try_fold(1u128, |acc, &s| acc.checked_mul(s as u128))
        .unwrap_or(u128::MAX);
    if combos > config.combo_budget {
        return Err(Error::BudgetExceeded {
            combos,
            budget: config.combo_budget,
        });
    }
    Ok((0..combos as u64)
        .into_par_iter()
        .map(|idx| run_combo(problem, combo_at(idx as u128, &sizes), config))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionEntry {
    /// 1-based set index `i`.
    pub set: usize,
    /// 1-based piece index `j` within set `i`.
    pub piece: usize,
    /// The set after `i` in cyclic order.
    pub next_set: usize,
    /// Nearest piece of the next set, when every sample agreed.
    pub theta: Option<usize>,
    /// Distinct nearest pieces observed, ascending.
    pub observed: Vec<usize>,
    pub min_margin: f64,
    pub samples_used: usize,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub holds: bool,
    pub min_margin: f64,
    pub samples_per_piece: usize,
    pub margin_tol: f64,
    pub seed: u64,
    pub entries: Vec<ConditionEntry>,
}

impl ConditionReport {
    pub fn theta(&self, set: usize, piece: usize) -> Option<usize> {
        self.entries
            .iter()
            .find(|e| e.set == set && e.piece == piece)
            .and_then(|e| e.theta)
    }
}

fn nearest_with_margin(set: &UcsSet, x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    let mut second = f64::INFINITY;
    for (idx, piece) in set.pieces().iter().enumerate() {
        let d = closed_form_distance(piece, x);
        if d < best.1 {
            second = best.1;
            best = (idx + 1, d);
        } else if d < second {
            second = d;
        }
    }
    (best.0, second - best.1)
}

/// Samples every piece of every set and checks that all samples share one
/// strictly nearest piece in the next set (the last set wraps to the first).
///
/// The first sample of each piece is its witness point; the rest are uniform
/// draws from a per-piece stream of a ChaCha8 generator seeded with `seed`.
pub fn check_condition(
    problem: &Problem,
    samples_per_piece: usize,
    margin_tol: f64,
    seed: u64,
) -> Result<ConditionReport> {
    if samples_per_piece == 0 {
        return Err(Error::Validation(
            "samples_per_piece must be at least 1".into(),
        ));
    }
    for set in problem.sets() {
        if let Some(piece) = set.pieces().iter().find(|p| !p.is_bounded()) {
            return Err(Error::UnsupportedSampling(piece.kind()));
        }
    }
    let m = problem.set_count();
    let tasks: Vec<(usize, usize)> = (1..=m)
        .flat_map(|i| (1..=problem.set(i).len()).map(move |j| (i, j)))
        .collect();
    let entries: Vec<ConditionEntry> = tasks
        .par_iter()
        .map(|&(i, j)| {
            let next_set = i % m + 1;
            let piece = problem.set(i).piece(j);
            let target = problem.set(next_set);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(((i as u64) << 32) | j as u64);
            let mut observed = Vec::new();
            let mut min_margin = f64::INFINITY;
            for s in 0..samples_per_piece {
                let x = if s == 0 {
                    piece.witness()
                } else {
                    piece.sample(&mut rng).expect("bounded piece")
                };
                let (nearest, margin) = nearest_with_margin(target, &x);
                if !observed.contains(&nearest) {
                    observed.push(nearest);
                }
                min_margin = min_margin.min(margin);
            }
            observed.sort_unstable();
            let theta = (observed.len() == 1).then(|| observed[0]);
            ConditionEntry {
                set: i,
                piece: j,
                next_set,
                theta,
                holds: theta.is_some() && min_margin > margin_tol,
                observed,
                min_margin,
                samples_used: samples_per_piece,
            }
        })
        .collect();
    Ok(ConditionReport {
        holds: entries.iter().all(|e| e.holds),
        min_margin: entries
            .iter()
            .map(|e| e.min_margin)
            .fold(f64::INFINITY, f64::min),
        samples_per_piece,
        margin_tol,
        seed,
        entries,
    })
}

/// A point of a segment walk where the nearest piece is not unique.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentTie {
    /// Position along the segment in [0, 1].
    pub t: f64,
    pub point: Point,
    pub pieces: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentReport {
    pub steps: usize,
    pub ties: Vec<SegmentTie>,
    pub no_ties: bool,
    /// Distinct nearest pieces seen along the walk, in order of appearance.
    pub pieces_seen: Vec<usize>,
    pub constant_piece: bool,
    /// False only if the walk saw no tie and still changed piece.
    pub consistent: bool,
}

const BISECTION_ROUNDS: usize = 200;

fn lerp(a: &Point, b: &Point, t: f64) -> Point {
    Point::from_raw(
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x * (1.0 - t) + y * t)
            .collect(),
    )
}

/// Walks the segment `[a, b]` at `steps` equally spaced points and records
/// the nearest piece of `set` at each.
///
/// Whenever the nearest piece changes between neighbouring points the
/// interval is bisected to locate the crossing, so a change of piece is always
/// accompanied by a recorded tie unless the implementation is inconsistent.
pub fn check_singleton_projection_property(
    set: &UcsSet,
    segment: (&Point, &Point),
    steps: usize,
    tie_tol: f64,
) -> Result<SegmentReport> {
    let (a, b) = segment;
    check_dim(set.dim(), a.dim())?;
    check_dim(set.dim(), b.dim())?;
    if steps < 2 {
        return Err(Error::Validation(
            "segment walk needs at least 2 steps".into(),
        ));
    }
    let probe = |t: f64| -> (Point, BruteForceProjection) {
        let x = lerp(a, b, t);
        let bf = brute_force_ucs_projection(set, &x, tie_tol).expect("dimensions checked");
        (x, bf)
    };

    let mut ties = Vec::new();
    let mut pieces_seen: Vec<usize> = Vec::new();
    let note = |piece: usize, seen: &mut Vec<usize>| {
        if !seen.contains(&piece) {
            seen.push(piece);
        }
    };
    let mut prev: Option<(f64, BruteForceProjection)> = None;
    for s in 0..steps {
        let t = s as f64 / (steps - 1) as f64;
        let (x, bf) = probe(t);
        if bf.is_tie() {
            ties.push(SegmentTie {
                t,
                point: x,
                pieces: bf.nearest.clone(),
            });
        }
        if let Some((t_prev, prev_bf)) = &prev {
            if !prev_bf.is_tie() && !bf.is_tie() && prev_bf.piece_index() != bf.piece_index() {
                let (mut lo, mut hi) = (*t_prev, t);
                let from = prev_bf.piece_index();
                for _ in 0..BISECTION_ROUNDS {
                    let mid = lo + 0.5 * (hi - lo);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    let (xm, bm) = probe(mid);
                    note(bm.piece_index(), &mut pieces_seen);
                    if bm.is_tie() {
                        ties.push(SegmentTie {
                            t: mid,
                            point: xm,
                            pieces: bm.nearest.clone(),
                        });
                        break;
                    }
                    if bm.piece_index() == from {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
            }
        }
        note(bf.piece_index(), &mut pieces_seen);
        prev = Some((t, bf));
    }
    ties.sort_by(|x, y| x.t.total_cmp(&y.t));
    let no_ties = ties.is_empty();
    let constant_piece = pieces_seen.len() == 1;
    Ok(SegmentReport {
        steps,
        ties,
        no_ties,
        pieces_seen,
        constant_piece,
        consistent: !(no_ties && !constant_piece),
    })
}

/// For one pruned orbit: did the oracle find a feasible combination starting
/// in the same piece of the first set?
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PruneAudit {
    pub r: usize,
    pub feasible_combo_with_start: bool,
}

pub fn audit_pruning(report: &SolveReport, combos: &[ComboReport]) -> Vec<PruneAudit> {
    report
        .pruned
        .iter()
        .map(|&r| PruneAudit {
            r,
            feasible_combo_with_start: combos.iter().any(|c| c.feasible && c.combo[0] == r),
        })
        .collect()
}
