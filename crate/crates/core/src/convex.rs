//! Elementary closed convex sets with closed-form Euclidean projections.

use std::ops::Deref;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Default tolerance used when deciding whether a point lies in a set.
pub const DEFAULT_CONTAINMENT_TOL: f64 = 1e-9;

/// A point of R^n with finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Validation(
                "point must have at least one coordinate".into(),
            ));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::Validation(format!(
                "coordinate {} is not finite ({})",
                i + 1,
                coords[i]
            )));
        }
        Ok(Point(coords))
    }

    /// Wraps coordinates produced by arithmetic on already valid points.
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        debug_assert!(coords.iter().all(|c| c.is_finite()));
        Point(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn distance(&self, other: &Point) -> f64 {
        distance(&self.0, &other.0)
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Point::new(coords)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Vec<f64> {
        p.0
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// The geometric parameters of a piece.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// Closed ball `{x : |x - center| <= radius}`.
    Ball { center: Point, radius: f64 },
    /// Axis-aligned box `{x : lower <= x <= upper}`.
    Box { lower: Point, upper: Point },
    /// `{x : <normal, x> <= offset}`.
    Halfspace { normal: Point, offset: f64 },
    /// `{x : <normal, x> = offset}`.
    Hyperplane { normal: Point, offset: f64 },
}

/// A nonempty closed convex set with an exact projection.
///
/// Constructed only through the validating constructors, so every value is a
/// legitimate set: positive radius, ordered box bounds, nonzero normals.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPiece {
    shape: Shape,
}

impl ConvexPiece {
    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Validation(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(ConvexPiece {
            shape: Shape::Ball { center, radius },
        })
    }

    pub fn cuboid(lower: Point, upper: Point) -> Result<Self> {
        check_dim(lower.dim(), upper.dim())?;
        if let Some(i) = lower.iter().zip(upper.iter()).position(|(l, u)| l > u) {
            return Err(Error::Validation(format!(
                "box lower bound exceeds upper bound on axis {} ({} > {})",
                i + 1,
                lower[i],
                upper[i]
            )));
        }
        Ok(ConvexPiece {
            shape: Shape::Box { lower, upper },
        })
    }

    pub fn halfspace(normal: Point, offset: f64) -> Result<Self> {
        check_normal(&normal, offset)?;
        Ok(ConvexPiece {
            shape: Shape::Halfspace { normal, offset },
        })
    }

    pub fn hyperplane(normal: Point, offset: f64) -> Result<Self> {
        check_normal(&normal, offset)?;
        Ok(ConvexPiece {
            shape: Shape::Hyperplane { normal, offset },
        })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            Shape::Ball { center, .. } => center.dim(),
            Shape::Box { lower, .. } => lower.dim(),
            Shape::Halfspace { normal, .. } | Shape::Hyperplane { normal, .. } => normal.dim(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.shape {
            Shape::Ball { .. } => "ball",
            Shape::Box { .. } => "box",
            Shape::Halfspace { .. } => "halfspace",
            Shape::Hyperplane { .. } => "hyperplane",
        }
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self.shape, Shape::Ball { .. } | Shape::Box { .. })
    }

    /// Nearest point of the piece to `x`. Points already in the piece are
    /// returned unchanged.
    pub fn project(&self, x: &Point) -> Result<Point> {
        check_dim(self.dim(), x.dim())?;
        Ok(self.project_unchecked(x))
    }

    pub(crate) fn project_unchecked(&self, x: &Point) -> Point {
        match &self.shape {
            Shape::Ball { center, radius } => {
                let dist = distance(x, center);
                if dist <= *radius {
                    return x.clone();
                }
                let scale = radius / dist;
                Point::from_raw(
                    center
                        .iter()
                        .zip(x.iter())
                        .map(|(c, xi)| c + (xi - c) * scale)
                        .collect(),
                )
            }
            Shape::Box { lower, upper } => Point::from_raw(
                x.iter()
                    .zip(lower.iter().zip(upper.iter()))
                    .map(|(xi, (l, u))| xi.clamp(*l, *u))
                    .collect(),
            ),
            Shape::Halfspace { normal, offset } => {
                let excess = dot(normal, x) - offset;
                if excess <= 0.0 {
                    x.clone()
                } else {
                    shift_along(x, normal, excess)
                }
            }
            Shape::Hyperplane { normal, offset } => {
                let excess = dot(normal, x) - offset;
                if excess == 0.0 {
                    x.clone()
                } else {
                    shift_along(x, normal, excess)
                }
            }
        }
    }

    /// Euclidean distance from `x` to the piece, computed as `|x - P(x)|`.
    pub fn distance(&self, x: &Point) -> Result<f64> {
        check_dim(self.dim(), x.dim())?;
        Ok(self.distance_unchecked(x))
    }

    pub(crate) fn distance_unchecked(&self, x: &Point) -> f64 {
        let p = self.project_unchecked(x);
        distance(x, &p)
    }

    pub fn contains(&self, x: &Point, tol: f64) -> Result<bool> {
        Ok(self.distance(x)? <= tol)
    }

    /// A deterministic point of the piece: ball center, box midpoint, or the
    /// foot of the normal through the origin for half-spaces and hyperplanes.
    pub fn witness(&self) -> Point {
        match &self.shape {
            Shape::Ball { center, .. } => center.clone(),
            Shape::Box { lower, upper } => Point::from_raw(
                lower
                    .iter()
                    .zip(upper.iter())
                    .map(|(l, u)| l + 0.5 * (u - l))
                    .collect(),
            ),
            Shape::Halfspace { normal, offset } | Shape::Hyperplane { normal, offset } => {
                let scale = offset / dot(normal, normal);
                Point::from_raw(normal.iter().map(|a| a * scale).collect())
            }
        }
    }

    /// Draws a point uniformly from a ball or box.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Point> {
        match &self.shape {
            Shape::Ball { center, radius } => {
                let n = center.dim();
                let dir: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
                let len = norm(&dir);
                // A zero Gaussian draw has probability zero; fall back to the center.
                if len == 0.0 {
                    return Ok(center.clone());
                }
                let u: f64 = rng.random();
                let scale = radius * u.powf(1.0 / n as f64) / len;
                Ok(Point::from_raw(
                    center
                        .iter()
                        .zip(&dir)
                        .map(|(c, d)| c + d * scale)
                        .collect(),
                ))
            }
            Shape::Box { lower, upper } => Ok(Point::from_raw(
                lower
                    .iter()
                    .zip(upper.iter())
                    .map(|(l, u)| {
                        let t: f64 = rng.random();
                        (l + t * (u - l)).clamp(*l, *u)
                    })
                    .collect(),
            )),
            Shape::Halfspace { .. } => Err(Error::UnsupportedSampling("halfspace")),
            Shape::Hyperplane { .. } => Err(Error::UnsupportedSampling("hyperplane")),
        }
    }
}

fn check_normal(normal: &Point, offset: f64) -> Result<()> {
    if !offset.is_finite() {
        return Err(Error::Validation(format!(
            "offset must be finite, got {offset}"
        )));
    }
    if norm(normal) <= 0.0 {
        return Err(Error::Validation("normal vector must be nonzero".into()));
    }
    Ok(())
}

fn shift_along(x: &[f64], normal: &[f64], excess: f64) -> Point {
    let scale = excess / dot(normal, normal);
    Point::from_raw(x.iter().zip(normal).map(|(xi, a)| xi - scale * a).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    fn ball(c: &[f64], r: f64) -> ConvexPiece {
        ConvexPiece::ball(p(c), r).unwrap()
    }

    #[test]
    fn projections_of_reference_points() {
        assert_eq!(
            ball(&[0.0, 1.0], 1.0).project(&p(&[0.0, 3.0])).unwrap(),
            p(&[0.0, 2.0])
        );
        let unit_box = ConvexPiece::cuboid(p(&[0.0, 0.0]), p(&[1.0, 1.0])).unwrap();
        assert_eq!(unit_box.project(&p(&[2.0, 0.5])).unwrap(), p(&[1.0, 0.5]));
        let hs = ConvexPiece::halfspace(p(&[1.0, 0.0]), 0.0).unwrap();
        assert_eq!(hs.project(&p(&[3.0, 4.0])).unwrap(), p(&[0.0, 4.0]));
        assert_eq!(
            ball(&[0.0, -1.0], 1.0).project(&p(&[0.0, 1.0])).unwrap(),
            p(&[0.0, 0.0])
        );
    }

    #[test]
    fn distances_of_reference_points() {
        assert_eq!(
            ball(&[0.0, 1.0], 1.0).distance(&p(&[0.0, 3.0])).unwrap(),
            1.0
        );
        assert_eq!(
            ball(&[0.0, -1.0], 1.0).distance(&p(&[0.0, 1.0])).unwrap(),
            1.0
        );
        let unit_box = ConvexPiece::cuboid(p(&[0.0, 0.0]), p(&[1.0, 1.0])).unwrap();
        assert_eq!(unit_box.distance(&p(&[0.5, 0.5])).unwrap(), 0.0);
    }

    #[test]
    fn containment() {
        let b = ball(&[0.0, 1.0], 1.0);
        assert!(b.contains(&p(&[0.0, 0.0]), 1e-12).unwrap());
        assert!(!b.contains(&p(&[0.0, -1e-6]), 1e-12).unwrap());
        let h = ConvexPiece::hyperplane(p(&[0.0, 1.0]), 0.0).unwrap();
        assert!(h.contains(&p(&[5.0, 0.0]), 0.0).unwrap());
    }

    #[test]
    fn witnesses() {
        assert_eq!(ball(&[0.0, 1.0], 1.0).witness(), p(&[0.0, 1.0]));
        let b = ConvexPiece::cuboid(p(&[0.0, 0.0]), p(&[2.0, 4.0])).unwrap();
        assert_eq!(b.witness(), p(&[1.0, 2.0]));
        let h = ConvexPiece::hyperplane(p(&[2.0, 0.0]), 4.0).unwrap();
        assert_eq!(h.witness(), p(&[2.0, 0.0]));
        let hs = ConvexPiece::halfspace(p(&[1.0, -2.0]), -3.0).unwrap();
        assert!(hs.contains(&hs.witness(), 0.0).unwrap());
    }

    #[test]
    fn center_of_ball_projects_to_itself() {
        let b = ball(&[3.0, -2.0], 0.5);
        assert_eq!(b.project(&p(&[3.0, -2.0])).unwrap(), p(&[3.0, -2.0]));
    }

    #[test]
    fn sampling_stays_inside_bounded_pieces() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let b = ball(&[0.0, 0.0], 1.0);
        let unit_box = ConvexPiece::cuboid(p(&[0.0, 0.0]), p(&[1.0, 1.0])).unwrap();
        for _ in 0..1000 {
            assert!(b.sample(&mut rng).unwrap().norm() <= 1.0);
            let q = unit_box.sample(&mut rng).unwrap();
            assert!(q.iter().all(|c| (0.0..=1.0).contains(c)));
        }
        let hs = ConvexPiece::halfspace(p(&[1.0, 0.0]), 0.0).unwrap();
        assert_eq!(
            hs.sample(&mut rng),
            Err(Error::UnsupportedSampling("halfspace"))
        );
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let b = ball(&[1.0, 2.0, 3.0], 2.0);
        let a = b.sample(&mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let c = b.sample(&mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(ConvexPiece::ball(p(&[0.0]), -1.0).is_err());
        assert!(ConvexPiece::ball(p(&[0.0]), 0.0).is_err());
        assert!(ConvexPiece::cuboid(p(&[1.0, 0.0]), p(&[0.0, 1.0])).is_err());
        assert!(ConvexPiece::halfspace(p(&[0.0, 0.0]), 1.0).is_err());
        assert!(ConvexPiece::hyperplane(p(&[0.0, 0.0]), 1.0).is_err());
        assert!(Point::new(vec![f64::NAN]).is_err());
        assert!(Point::new(vec![]).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let b = ball(&[0.0, 0.0], 1.0);
        assert_eq!(
            b.project(&p(&[1.0, 2.0, 3.0])),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 3
            })
        );
        assert!(b.distance(&p(&[1.0])).is_err());
        assert!(b.contains(&p(&[1.0]), 0.0).is_err());
    }
}
