//! Cyclic projections onto unions of convex sets with first-sweep pruning.
//!
//! One orbit is started in every piece of the first set. Each orbit makes one
//! full sweep over the sets; orbits that come back to a different piece of the
//! first set than the one they started in are pruned, and the remaining ones
//! keep sweeping until they are classified as converged, stalled, or out of
//! budget.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::convex::{Point, DEFAULT_CONTAINMENT_TOL};
use crate::error::{check_dim, Error, Result};
use crate::ucs::{UcsSet, DEFAULT_TIE_TOL};

/// A feasibility instance: find a point in the intersection of all sets.
///
/// The cyclic order wraps around, so the set after the last one is the
/// first one again. No copy of the first set is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    dimension: usize,
    sets: Vec<UcsSet>,
}

impl Problem {
    pub fn new(dimension: usize, sets: Vec<UcsSet>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Validation("dimension must be positive".into()));
        }
        if sets.is_empty() {
            return Err(Error::Validation("problem needs at least one set".into()));
        }
        for set in &sets {
            check_dim(dimension, set.dim())?;
        }
        Ok(Problem { dimension, sets })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn sets(&self) -> &[UcsSet] {
        &self.sets
    }

    /// Set by 1-based index.
    pub fn set(&self, index: usize) -> &UcsSet {
        &self.sets[index - 1]
    }

    /// Number of sets.
    pub fn set_count(&self) -> usize {
        self.sets.len()
    }

    /// Distance from `x` to every set, in order.
    pub fn set_distances(&self, x: &Point) -> Result<Vec<f64>> {
        check_dim(self.dimension, x.dim())?;
        Ok(self.sets.iter().map(|s| s.distance_unchecked(x)).collect())
    }

    pub fn is_feasible(&self, x: &Point, tol: f64) -> bool {
        x.dim() == self.dimension && self.sets.iter().all(|s| s.distance_unchecked(x) <= tol)
    }
}

/// Index of the set used at iteration `k`: `(k - 1) mod m + 1`.
pub fn control_index(k: usize, m: usize) -> usize {
    assert!(k >= 1 && m >= 1, "control index needs k >= 1 and m >= 1");
    (k - 1) % m + 1
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Sweep residual below which an orbit may be declared converged.
    pub eps_residual: f64,
    pub max_sweeps: usize,
    pub tie_tol: f64,
    /// Number of consecutive sweeps over which a residual that does not drop
    /// by more than `eps_residual` marks the orbit as stalled.
    pub stall_window: usize,
    pub feasibility_tol: f64,
    /// Tolerance for accepting user-supplied initial points.
    pub containment_tol: f64,
    /// Keep every iterate of every orbit (needed for traces).
    #[serde(skip)]
    pub record_trajectory: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            eps_residual: 1e-8,
            max_sweeps: 10_000,
            tie_tol: DEFAULT_TIE_TOL,
            stall_window: 50,
            feasibility_tol: 1e-6,
            containment_tol: DEFAULT_CONTAINMENT_TOL,
            record_trajectory: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("eps_residual", self.eps_residual),
            ("tie_tol", self.tie_tol),
            ("feasibility_tol", self.feasibility_tol),
            ("containment_tol", self.containment_tol),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Validation(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if self.max_sweeps == 0 {
            return Err(Error::Validation("max_sweeps must be at least 1".into()));
        }
        if self.stall_window < 2 {
            return Err(Error::Validation("stall_window must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrbitStatus {
    Active,
    Pruned,
    Converged,
    InconsistentStall,
    Exhausted,
}

impl OrbitStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            OrbitStatus::Active => "active",
            OrbitStatus::Pruned => "pruned",
            OrbitStatus::Converged => "converged",
            OrbitStatus::InconsistentStall => "inconsistent-stall",
            OrbitStatus::Exhausted => "exhausted",
        }
    }
}

/// One projection step of an orbit, producing iterate `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub k: usize,
    /// 0 for the pruning sweep, then 1, 2, ...
    pub sweep: usize,
    /// 1-based index of the set projected onto.
    pub set_index: usize,
    /// 1-based index of the selected piece of that set.
    pub tau: usize,
    pub point: Point,
    /// Distance between the previous iterate and this one.
    pub length: f64,
    pub is_tie: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitState {
    /// 1-based start piece in the first set.
    pub r: usize,
    pub start: Point,
    pub current: Point,
    /// Index of `current` in the orbit; it keeps counting across the pruning sweep.
    pub k: usize,
    /// Selected piece per iterate, as `(k, tau)`.
    pub tau_history: Vec<(usize, usize)>,
    pub last_sweep_residual: f64,
    pub status: OrbitStatus,
    pub tie_violations: usize,
    /// Full sweeps performed after pruning.
    pub sweeps: usize,
    /// Residual of every sweep; entry 0 is the pruning sweep.
    pub residual_trace: Vec<f64>,
    #[serde(skip)]
    pub trajectory: Vec<Step>,
    #[serde(skip)]
    record: bool,
}

impl OrbitState {
    fn new(r: usize, start: Point, record: bool) -> Self {
        OrbitState {
            r,
            current: start.clone(),
            start,
            k: 1,
            tau_history: vec![(1, r)],
            last_sweep_residual: 0.0,
            status: OrbitStatus::Active,
            tie_violations: 0,
            sweeps: 0,
            residual_trace: Vec::new(),
            trajectory: Vec::new(),
            record,
        }
    }

    /// Selected piece at iterate `k`, if recorded.
    pub fn tau(&self, k: usize) -> Option<usize> {
        self.tau_history
            .binary_search_by_key(&k, |&(kk, _)| kk)
            .ok()
            .map(|i| self.tau_history[i].1)
    }
}

/// Creates one orbit per piece of the first set, starting at the piece's
/// witness point unless an override is given for it.
pub fn initialize(
    problem: &Problem,
    overrides: &[(usize, Point)],
    config: &SolverConfig,
) -> Result<Vec<OrbitState>> {
    let first = problem.set(1);
    let mut starts: Vec<Point> = first.pieces().iter().map(|p| p.witness()).collect();
    for (r, point) in overrides {
        if *r == 0 || *r > first.len() {
            return Err(Error::Validation(format!(
                "initial point for orbit {r}: first set has pieces 1..={}",
                first.len()
            )));
        }
        let dist = first.piece(*r).distance(point)?;
        if dist > config.containment_tol {
            return Err(Error::Validation(format!(
                "initial point for orbit {r} lies {dist:e} outside its piece"
            )));
        }
        starts[r - 1] = point.clone();
    }
    Ok(starts
        .into_iter()
        .enumerate()
        .map(|(i, start)| OrbitState::new(i + 1, start, config.record_trajectory))
        .collect())
}

/// Projects the orbit's current iterate onto the next set in cyclic order.
pub fn sweep_step(problem: &Problem, orbit: &mut OrbitState, tie_tol: f64) -> Step {
    debug_assert_eq!(orbit.status, OrbitStatus::Active);
    let m = problem.set_count();
    let k = orbit.k + 1;
    let set_index = control_index(k, m);
    let proj = problem
        .set(set_index)
        .project_unchecked(&orbit.current, tie_tol);
    let step = Step {
        k,
        sweep: (k - 2) / m,
        set_index,
        tau: proj.piece_index,
        length: proj.nearest_distance,
        point: proj.point,
        is_tie: proj.is_tie,
    };
    orbit.current = step.point.clone();
    orbit.k = k;
    orbit.tau_history.push((k, step.tau));
    if step.is_tie {
        orbit.tie_violations += 1;
    }
    if orbit.record {
        orbit.trajectory.push(step.clone());
    }
    step
}

fn run_sweep(problem: &Problem, orbit: &mut OrbitState, tie_tol: f64) -> f64 {
    (0..problem.set_count())
        .map(|_| sweep_step(problem, orbit, tie_tol).length)
        .fold(0.0, f64::max)
}

/// Outcome of the pruning sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstSweep {
    pub orbits: Vec<OrbitState>,
    /// Orbits that returned to a different piece of the first set.
    pub pruned: BTreeSet<usize>,
}

impl FirstSweep {
    pub fn all_pruned(&self) -> bool {
        self.pruned.len() == self.orbits.len()
    }
}

/// Advances every orbit through one sweep and prunes those that return to
/// the first set in a piece other than their own.
pub fn first_sweep(
    problem: &Problem,
    mut orbits: Vec<OrbitState>,
    config: &SolverConfig,
) -> FirstSweep {
    let m = problem.set_count();
    orbits.par_iter_mut().for_each(|orbit| {
        let residual = run_sweep(problem, orbit, config.tie_tol);
        orbit.last_sweep_residual = residual;
        orbit.residual_trace.push(residual);
        if orbit.tau(m + 1) != Some(orbit.r) {
            orbit.status = OrbitStatus::Pruned;
        }
    });
    let pruned = orbits
        .iter()
        .filter(|o| o.status == OrbitStatus::Pruned)
        .map(|o| o.r)
        .collect();
    FirstSweep { orbits, pruned }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution {
    pub r: usize,
    pub point: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub dimension: usize,
    pub set_count: usize,
    pub config: SolverConfig,
    /// Orbits that returned to a different start piece after the first sweep.
    pub pruned: Vec<usize>,
    pub retained: Vec<usize>,
    pub all_pruned: bool,
    pub solutions: Vec<Solution>,
    pub warnings: Vec<String>,
    pub orbits: Vec<OrbitState>,
}

impl SolveReport {
    pub fn orbit(&self, r: usize) -> &OrbitState {
        &self.orbits[r - 1]
    }

    pub fn any_converged(&self) -> bool {
        !self.solutions.is_empty()
    }
}

fn advance(problem: &Problem, orbit: &mut OrbitState, config: &SolverConfig) {
    let window = config.stall_window;
    while orbit.sweeps < config.max_sweeps {
        let residual = run_sweep(problem, orbit, config.tie_tol);
        orbit.sweeps += 1;
        orbit.last_sweep_residual = residual;
        orbit.residual_trace.push(residual);

        let feasible = problem.is_feasible(&orbit.current, config.feasibility_tol);
        if feasible && residual <= config.eps_residual {
            orbit.status = OrbitStatus::Converged;
            return;
        }
        if !feasible && orbit.sweeps >= window {
            let earlier = orbit.residual_trace[orbit.sweeps + 1 - window];
            if earlier - residual <= config.eps_residual {
                orbit.status = OrbitStatus::InconsistentStall;
                return;
            }
        }
    }
    orbit.status = OrbitStatus::Exhausted;
}

/// Runs the retained orbits to completion and assembles the report.
pub fn iterate(problem: &Problem, first: FirstSweep, config: &SolverConfig) -> SolveReport {
    let FirstSweep { mut orbits, pruned } = first;
    orbits
        .par_iter_mut()
        .filter(|o| o.status == OrbitStatus::Active)
        .for_each(|orbit| advance(problem, orbit, config));

    let retained: Vec<usize> = orbits
        .iter()
        .filter(|o| !pruned.contains(&o.r))
        .map(|o| o.r)
        .collect();
    let solutions = orbits
        .iter()
        .filter(|o| o.status == OrbitStatus::Converged)
        .map(|o| Solution {
            r: o.r,
            point: o.current.clone(),
        })
        .collect();

    let mut warnings = Vec::new();
    let all_pruned = retained.is_empty();
    if all_pruned {
        warnings.push(
            "every orbit was pruned: no start piece is revisited after the first sweep \
             (the instance is infeasible or nearest pieces are not unique)"
                .to_string(),
        );
    }
    for orbit in orbits.iter().filter(|o| o.tie_violations > 0) {
        warnings.push(format!(
            "orbit {}: {} projection(s) with a tied nearest piece; the unique-nearest-piece \
             assumption fails on this trajectory",
            orbit.r, orbit.tie_violations
        ));
    }

    SolveReport {
        dimension: problem.dimension(),
        set_count: problem.set_count(),
        config: config.clone(),
        pruned: pruned.into_iter().collect(),
        retained,
        all_pruned,
        solutions,
        warnings,
        orbits,
    }
}

/// Initialize, prune, and iterate.
pub fn solve(
    problem: &Problem,
    config: &SolverConfig,
    overrides: &[(usize, Point)],
) -> Result<SolveReport> {
    config.validate()?;
    let orbits = initialize(problem, overrides, config)?;
    let first = first_sweep(problem, orbits, config);
    Ok(iterate(problem, first, config))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::ConvexPiece;

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    fn ball(c: &[f64], r: f64) -> ConvexPiece {
        ConvexPiece::ball(p(c), r).unwrap()
    }

    fn example() -> Problem {
        let c1 = UcsSet::new(
            "C1",
            vec![
                ball(&[0.0, 1.0], 1.0),
                ball(&[100.0, 2.0], 1.0),
                ball(&[200.0, 2.0], 1.0),
                ball(&[-100.0, 2.0], 1.0),
            ],
        )
        .unwrap();
        let c2 = UcsSet::new(
            "C2",
            vec![ball(&[0.0, -1.0], 1.0), ball(&[100.0, -2.0], 1.0)],
        )
        .unwrap();
        Problem::new(2, vec![c1, c2]).unwrap()
    }

    #[test]
    fn control_sequence() {
        assert_eq!(control_index(1, 2), 1);
        assert_eq!(control_index(3, 2), 1);
        assert_eq!(control_index(2, 5), 2);
        assert_eq!(control_index(7, 1), 1);
    }

    #[test]
    fn default_initialization() {
        let orbits = initialize(&example(), &[], &SolverConfig::default()).unwrap();
        let starts: Vec<Point> = orbits.iter().map(|o| o.current.clone()).collect();
        assert_eq!(
            starts,
            vec![
                p(&[0.0, 1.0]),
                p(&[100.0, 2.0]),
                p(&[200.0, 2.0]),
                p(&[-100.0, 2.0])
            ]
        );
        for o in &orbits {
            assert_eq!(o.tau(1), Some(o.r));
            assert_eq!(o.k, 1);
            assert_eq!(o.status, OrbitStatus::Active);
        }
    }

    #[test]
    fn initialization_overrides() {
        let cfg = SolverConfig::default();
        let orbits = initialize(&example(), &[(1, p(&[0.5, 1.0]))], &cfg).unwrap();
        assert_eq!(orbits[0].current, p(&[0.5, 1.0]));
        assert!(matches!(
            initialize(&example(), &[(1, p(&[5.0, 5.0]))], &cfg),
            Err(Error::Validation(_))
        ));
        assert!(initialize(&example(), &[(9, p(&[0.0, 1.0]))], &cfg).is_err());
        assert!(initialize(&example(), &[(1, p(&[0.0, 1.0, 0.0]))], &cfg).is_err());
    }

    #[test]
    fn single_steps() {
        let problem = example();
        let mut orbits = initialize(&problem, &[], &SolverConfig::default()).unwrap();
        let step = sweep_step(&problem, &mut orbits[0], DEFAULT_TIE_TOL);
        assert_eq!((step.k, step.set_index, step.tau), (2, 2, 1));
        assert_eq!(step.point, p(&[0.0, 0.0]));
        let step = sweep_step(&problem, &mut orbits[0], DEFAULT_TIE_TOL);
        assert_eq!((step.k, step.set_index, step.tau), (3, 1, 1));
        assert_eq!(step.point, p(&[0.0, 0.0]));
        assert_eq!(step.length, 0.0);

        let step = sweep_step(&problem, &mut orbits[2], DEFAULT_TIE_TOL);
        assert_eq!((step.set_index, step.tau), (2, 2));
        assert_eq!(orbits[2].tau(2), Some(2));
    }

    #[test]
    fn pruning_sweep() {
        let problem = example();
        let cfg = SolverConfig::default();
        let first = first_sweep(&problem, initialize(&problem, &[], &cfg).unwrap(), &cfg);
        assert_eq!(first.pruned, BTreeSet::from([3, 4]));
        let taus: Vec<_> = first.orbits.iter().map(|o| o.tau(3).unwrap()).collect();
        assert_eq!(taus, vec![1, 2, 2, 1]);
        assert!(first.orbits.iter().all(|o| o.k == 3));
    }

    #[test]
    fn full_run() {
        let report = solve(&example(), &SolverConfig::default(), &[]).unwrap();
        assert_eq!(report.pruned, vec![3, 4]);
        assert_eq!(report.retained, vec![1, 2]);
        assert_eq!(report.orbit(1).status, OrbitStatus::Converged);
        assert_eq!(
            report.solutions,
            vec![Solution {
                r: 1,
                point: p(&[0.0, 0.0])
            }]
        );
        assert_eq!(report.orbit(2).status, OrbitStatus::InconsistentStall);
        assert_eq!(report.orbit(2).last_sweep_residual, 2.0);
        assert_eq!(report.orbit(3).status, OrbitStatus::Pruned);
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn tangent_intersection_converges_slowly_without_stalling() {
        // Off the symmetry axis the iterates creep toward the tangent point at a
        // sublinear rate; the residual keeps shrinking, so this is not a stall.
        let cfg = SolverConfig {
            max_sweeps: 2000,
            ..SolverConfig::default()
        };
        let report = solve(&example(), &cfg, &[(1, p(&[0.5, 1.0]))]).unwrap();
        let orbit = report.orbit(1);
        assert_eq!(orbit.status, OrbitStatus::Exhausted);
        assert!(orbit.current.norm() < 0.05);
        let trace = &orbit.residual_trace;
        assert!(trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn single_set_converges_at_witness() {
        let problem = Problem::new(
            2,
            vec![UcsSet::new("C1", vec![ball(&[3.0, 4.0], 2.0)]).unwrap()],
        )
        .unwrap();
        let cfg = SolverConfig::default();
        let first = first_sweep(&problem, initialize(&problem, &[], &cfg).unwrap(), &cfg);
        assert!(first.pruned.is_empty());
        assert_eq!(first.orbits[0].tau_history, vec![(1, 1), (2, 1)]);
        let report = iterate(&problem, first, &cfg);
        assert_eq!(
            report.solutions,
            vec![Solution {
                r: 1,
                point: p(&[3.0, 4.0])
            }]
        );
        assert_eq!(report.orbit(1).sweeps, 1);
    }

    #[test]
    fn halfspaces_with_feasible_witness() {
        let h1 = UcsSet::new(
            "H1",
            vec![ConvexPiece::halfspace(p(&[1.0, 0.0]), 1.0).unwrap()],
        )
        .unwrap();
        let h2 = UcsSet::new(
            "H2",
            vec![ConvexPiece::halfspace(p(&[0.0, 1.0]), 1.0).unwrap()],
        )
        .unwrap();
        let problem = Problem::new(2, vec![h1, h2]).unwrap();
        let report = solve(&problem, &SolverConfig::default(), &[]).unwrap();
        assert!(report.pruned.is_empty());
        let orbit = report.orbit(1);
        assert_eq!(orbit.status, OrbitStatus::Converged);
        assert_eq!(orbit.sweeps, 1);
        assert_eq!(orbit.last_sweep_residual, 0.0);
    }

    #[test]
    fn disjoint_singletons_stall() {
        let a = UcsSet::new("A", vec![ball(&[0.0, 0.0], 1.0)]).unwrap();
        let b = UcsSet::new("B", vec![ball(&[5.0, 0.0], 1.0)]).unwrap();
        let report = solve(
            &Problem::new(2, vec![a, b]).unwrap(),
            &SolverConfig::default(),
            &[],
        )
        .unwrap();
        assert!(report.solutions.is_empty());
        assert_eq!(report.orbit(1).status, OrbitStatus::InconsistentStall);
        assert!((report.orbit(1).last_sweep_residual - 3.0).abs() < 1e-12);
    }

    #[test]
    fn exhausted_when_budget_is_tiny() {
        let a = UcsSet::new("A", vec![ball(&[0.0, 0.0], 1.0)]).unwrap();
        let b = UcsSet::new("B", vec![ball(&[5.0, 0.0], 1.0)]).unwrap();
        let cfg = SolverConfig {
            max_sweeps: 3,
            ..SolverConfig::default()
        };
        let report = solve(&Problem::new(2, vec![a, b]).unwrap(), &cfg, &[]).unwrap();
        assert_eq!(report.orbit(1).status, OrbitStatus::Exhausted);
        assert_eq!(report.orbit(1).sweeps, 3);
    }

    #[test]
    fn all_pruned_is_reported_not_fatal() {
        // Each orbit is routed around to the other start piece.
        let c1 = UcsSet::new("C1", vec![ball(&[0.0, 0.0], 1.0), ball(&[10.0, 0.0], 1.0)]).unwrap();
        let c2 = UcsSet::new(
            "C2",
            vec![ball(&[0.0, 10.0], 1.0), ball(&[10.0, -10.0], 1.0)],
        )
        .unwrap();
        let c3 = UcsSet::new(
            "C3",
            vec![ball(&[10.0, 10.0], 1.0), ball(&[0.0, -10.0], 1.0)],
        )
        .unwrap();
        let problem = Problem::new(2, vec![c1, c2, c3]).unwrap();
        let report = solve(&problem, &SolverConfig::default(), &[]).unwrap();
        assert_eq!(report.pruned, vec![1, 2]);
        assert!(report.retained.is_empty());
        assert!(report.all_pruned);
        assert!(report.solutions.is_empty());
        assert_eq!(report.warnings.len(), 1);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig {
            stall_window: 1,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            eps_residual: 0.0,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
