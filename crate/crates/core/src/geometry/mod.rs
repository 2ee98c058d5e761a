//! Exact planar geometry: points, polygons, convex clipping, cone
//! decompositions, triangulation, partitions and sweep slicing.

mod cone;
mod convex;
mod partition;
mod polygon;
mod slice;
mod triangulate;

pub use cone::{cone_decompose, cone_decompose_along, ConeDecomposition, SignedCone};
pub use convex::{convex_hull, minkowski_sum, minkowski_sum_points, refine_cells, ConvexPolygon};
pub use partition::{arrangement_partition, Edge, Partition};
pub use polygon::Polygon;
pub use slice::{slice_cell_complex, sweep_cells, Limit, SweepCell, SweepKind};
pub use triangulate::{convex_parts, triangulate};

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{self, int, Rational};

/// Exact point (or direction vector) in the plane.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Point2 {
    pub x: Rational,
    pub y: Rational,
}

impl Point2 {
    pub fn new(x: Rational, y: Rational) -> Self {
        Point2 { x, y }
    }

    pub fn int(x: i64, y: i64) -> Self {
        Point2 { x: int(x), y: int(y) }
    }

    pub fn from_f64(x: f64, y: f64) -> crate::Result<Self> {
        Ok(Point2 { x: rational::from_f64(x)?, y: rational::from_f64(y)? })
    }

    pub fn to_f64(&self) -> [f64; 2] {
        [rational::to_f64(&self.x), rational::to_f64(&self.y)]
    }

    pub fn zero() -> Self {
        Point2::int(0, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn dot(&self, o: &Point2) -> Rational {
        &self.x * &o.x + &self.y * &o.y
    }

    /// z-component of the cross product.
    pub fn cross(&self, o: &Point2) -> Rational {
        &self.x * &o.y - &self.y * &o.x
    }

    /// Counterclockwise rotation by a quarter turn.
    pub fn perp(&self) -> Point2 {
        Point2 { x: -&self.y, y: self.x.clone() }
    }

    pub fn scale(&self, s: &Rational) -> Point2 {
        Point2 { x: &self.x * s, y: &self.y * s }
    }

    pub fn norm2(&self) -> Rational {
        self.dot(self)
    }

    pub fn midpoint(&self, o: &Point2) -> Point2 {
        let half = rational::frac(1, 2);
        (self + o).scale(&half)
    }

    pub fn lerp(&self, o: &Point2, t: &Rational) -> Point2 {
        self + &(o - self).scale(t)
    }
}

impl fmt::Debug for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", rational::format(&self.x), rational::format(&self.y))
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Add for &Point2 {
    type Output = Point2;
    fn add(self, o: &Point2) -> Point2 {
        Point2 { x: &self.x + &o.x, y: &self.y + &o.y }
    }
}

impl Sub for &Point2 {
    type Output = Point2;
    fn sub(self, o: &Point2) -> Point2 {
        Point2 { x: &self.x - &o.x, y: &self.y - &o.y }
    }
}

impl Neg for &Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2 { x: -&self.x, y: -&self.y }
    }
}

impl Mul<&Rational> for &Point2 {
    type Output = Point2;
    fn mul(self, s: &Rational) -> Point2 {
        self.scale(s)
    }
}

impl Serialize for Point2 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [rational::format(&self.x), rational::format(&self.y)].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point2 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Pair(#[serde(with = "rational::serde_str")] Rational, #[serde(with = "rational::serde_str")] Rational);
        let Pair(x, y) = Pair::deserialize(d)?;
        Ok(Point2 { x, y })
    }
}

/// The line `a*x + b*y = c`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Line {
    #[serde(with = "rational::serde_str")]
    pub a: Rational,
    #[serde(with = "rational::serde_str")]
    pub b: Rational,
    #[serde(with = "rational::serde_str")]
    pub c: Rational,
}

impl Line {
    pub fn new(a: Rational, b: Rational, c: Rational) -> crate::Result<Self> {
        if a.is_zero() && b.is_zero() {
            return Err(crate::Error::invalid("line with zero normal"));
        }
        Ok(Line { a, b, c })
    }

    pub fn int(a: i64, b: i64, c: i64) -> crate::Result<Self> {
        Line::new(int(a), int(b), int(c))
    }

    /// Line through `p` with direction `dir`.
    pub fn through(p: &Point2, dir: &Point2) -> Self {
        let n = dir.perp();
        let c = n.dot(p);
        Line { a: n.x, b: n.y, c }
    }

    pub fn normal(&self) -> Point2 {
        Point2::new(self.a.clone(), self.b.clone())
    }

    /// Signed value `a*x + b*y - c`.
    pub fn eval(&self, p: &Point2) -> Rational {
        &self.a * &p.x + &self.b * &p.y - &self.c
    }

    /// Canonical scaling so equal lines compare equal.
    pub fn normalized(&self) -> Line {
        let s = if !self.a.is_zero() { self.a.abs() } else { self.b.abs() };
        let mut l = Line { a: &self.a / &s, b: &self.b / &s, c: &self.c / &s };
        if l.a.is_negative() || (l.a.is_zero() && l.b.is_negative()) {
            l = Line { a: -l.a, b: -l.b, c: -l.c };
        }
        l
    }
}

/// First perturbation direction for half-open point location.
pub fn perturb_u() -> Point2 {
    Point2::int(97, 41)
}

/// Second perturbation direction, used when the first one is tangent.
pub fn perturb_w() -> Point2 {
    Point2::int(-41, 97)
}

/// Sign of a linear form `n.p + c` at `p + eps*u + eps^2*w` for infinitesimal eps.
pub(crate) fn perturbed_sign(value: &Rational, normal: &Point2) -> i32 {
    let s = rational::sign(value);
    if s != 0 {
        return s;
    }
    let s = rational::sign(&normal.dot(&perturb_u()));
    if s != 0 {
        return s;
    }
    rational::sign(&normal.dot(&perturb_w()))
}

pub(crate) fn orient(a: &Point2, b: &Point2, c: &Point2) -> i32 {
    rational::sign(&(b - a).cross(&(c - a)))
}

/// Intersection of segment `p0 p1` with the line, as a point, when it crosses.
pub(crate) fn line_segment_point(line: &Line, p0: &Point2, p1: &Point2) -> Point2 {
    let f0 = line.eval(p0);
    let f1 = line.eval(p1);
    let t = &f0 / (&f0 - &f1);
    p0.lerp(p1, &t)
}

/// Intersection point of two non-parallel lines.
pub fn line_intersection(l1: &Line, l2: &Line) -> Option<Point2> {
    let det = &l1.a * &l2.b - &l1.b * &l2.a;
    if det.is_zero() {
        return None;
    }
    let x = (&l1.c * &l2.b - &l1.b * &l2.c) / &det;
    let y = (&l1.a * &l2.c - &l1.c * &l2.a) / &det;
    Some(Point2::new(x, y))
}

pub(crate) fn bbox_of(points: &[Point2]) -> (Point2, Point2) {
    let mut lo = points[0].clone();
    let mut hi = points[0].clone();
    for p in &points[1..] {
        if p.x < lo.x {
            lo.x = p.x.clone();
        }
        if p.y < lo.y {
            lo.y = p.y.clone();
        }
        if p.x > hi.x {
            hi.x = p.x.clone();
        }
        if p.y > hi.y {
            hi.y = p.y.clone();
        }
    }
    (lo, hi)
}

pub(crate) fn shoelace2(points: &[Point2]) -> Rational {
    let n = points.len();
    let mut s = Rational::zero();
    for i in 0..n {
        s += points[i].cross(&points[(i + 1) % n]);
    }
    s
}
