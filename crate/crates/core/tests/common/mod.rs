//! Random desk-scale instances shared by the integration suites.
#![allow(dead_code)]

use pucs::io::parse_problem;
use pucs::{ConvexPiece, Point, Problem, UcsSet};
use rand::Rng;

pub fn p(c: &[f64]) -> Point {
    Point::new(c.to_vec()).unwrap()
}

pub fn ball_unions() -> Problem {
    parse_problem(include_str!("../../data/ball_unions.ucs"))
        .unwrap()
        .problem
}

pub fn random_point<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> Point {
    p(&(0..dim)
        .map(|_| rng.random_range(-scale..scale))
        .collect::<Vec<_>>())
}

fn random_unit<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.1 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Any of the four piece kinds, roughly inside `[-scale, scale]^dim`.
pub fn random_piece<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> ConvexPiece {
    match rng.random_range(0..4) {
        0 => ConvexPiece::ball(
            random_point(rng, dim, scale),
            rng.random_range(0.1..scale / 2.0),
        )
        .unwrap(),
        1 => {
            let lo = random_point(rng, dim, scale);
            let hi: Vec<f64> = lo
                .iter()
                .map(|l| l + rng.random_range(0.0..scale / 2.0))
                .collect();
            ConvexPiece::cuboid(lo, p(&hi)).unwrap()
        }
        2 => ConvexPiece::halfspace(p(&random_unit(rng, dim)), rng.random_range(-scale..scale))
            .unwrap(),
        _ => ConvexPiece::hyperplane(p(&random_unit(rng, dim)), rng.random_range(-scale..scale))
            .unwrap(),
    }
}

/// A bounded piece (ball or box) that contains `z` in its interior.
pub fn piece_around<R: Rng>(rng: &mut R, z: &Point, size: f64) -> ConvexPiece {
    let dim = z.dim();
    if rng.random_bool(0.5) {
        let dir = random_unit(rng, dim);
        let off = rng.random_range(0.0..size);
        let center: Vec<f64> = z.iter().zip(&dir).map(|(zi, d)| zi + d * off).collect();
        ConvexPiece::ball(p(&center), off + rng.random_range(0.2 * size..size)).unwrap()
    } else {
        let lo: Vec<f64> = z
            .iter()
            .map(|zi| zi - rng.random_range(0.2 * size..size))
            .collect();
        let hi: Vec<f64> = z
            .iter()
            .map(|zi| zi + rng.random_range(0.2 * size..size))
            .collect();
        ConvexPiece::cuboid(p(&lo), p(&hi)).unwrap()
    }
}

/// A bounded piece of size about `size` centred at `c`.
pub fn piece_at<R: Rng>(rng: &mut R, c: &Point, size: f64) -> ConvexPiece {
    if rng.random_bool(0.5) {
        ConvexPiece::ball(c.clone(), rng.random_range(0.2 * size..size)).unwrap()
    } else {
        let lo: Vec<f64> = c
            .iter()
            .map(|ci| ci - rng.random_range(0.2 * size..size))
            .collect();
        let hi: Vec<f64> = c
            .iter()
            .map(|ci| ci + rng.random_range(0.2 * size..size))
            .collect();
        ConvexPiece::cuboid(p(&lo), p(&hi)).unwrap()
    }
}

/// A union of 1..=max_pieces bounded pieces; pieces that would overlap an
/// earlier one are dropped.
pub fn random_union<R: Rng>(rng: &mut R, dim: usize, max_pieces: usize, scale: f64) -> UcsSet {
    let count = rng.random_range(1..=max_pieces);
    let mut pieces: Vec<ConvexPiece> = Vec::new();
    for _ in 0..count * 4 {
        if pieces.len() == count {
            break;
        }
        let c = random_point(rng, dim, scale);
        let candidate = piece_at(rng, &c, scale / 6.0);
        let mut trial = pieces.clone();
        trial.push(candidate);
        if UcsSet::new("u", trial.clone())
            .unwrap()
            .check_disjoint()
            .is_clean()
        {
            pieces = trial;
        }
    }
    if pieces.is_empty() {
        let c = random_point(rng, dim, scale);
        pieces.push(piece_at(rng, &c, scale / 6.0));
    }
    UcsSet::new("u", pieces).unwrap()
}

/// A feasible instance with a common point `z` planted in one piece of every set.
pub struct Planted {
    pub problem: Problem,
    pub z: Point,
    /// 1-based index of the piece containing `z`, per set.
    pub planted: Vec<usize>,
}

pub fn planted_instance<R: Rng>(rng: &mut R) -> Planted {
    let dim = rng.random_range(2..=5);
    let m = rng.random_range(2..=4);
    let z = random_point(rng, dim, 5.0);
    let mut sets = Vec::with_capacity(m);
    let mut planted = Vec::with_capacity(m);
    for i in 0..m {
        let count = rng.random_range(1..=4);
        let slot = rng.random_range(0..count);
        let mut pieces: Vec<ConvexPiece> = Vec::with_capacity(count);
        while pieces.len() < count {
            let candidate = if pieces.len() == slot {
                piece_around(rng, &z, 2.0)
            } else {
                let dir = random_unit(rng, dim);
                let dist = rng.random_range(10.0..40.0);
                let c: Vec<f64> = z.iter().zip(&dir).map(|(zi, d)| zi + d * dist).collect();
                piece_at(rng, &p(&c), 2.0)
            };
            let mut trial = pieces.clone();
            trial.push(candidate);
            if UcsSet::new("t", trial.clone())
                .unwrap()
                .check_disjoint()
                .is_clean()
            {
                pieces = trial;
            }
        }
        planted.push(slot + 1);
        sets.push(UcsSet::new(format!("C{}", i + 1), pieces).unwrap());
    }
    Planted {
        problem: Problem::new(dim, sets).unwrap(),
        z,
        planted,
    }
}
