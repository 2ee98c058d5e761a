use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{bbox_of, orient, shoelace2, Point2};
use crate::error::{Error, Result};
use crate::rational::{frac, Rational};

/// Simple polygon with counterclockwise vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Polygon {
    vertices: Vec<Point2>,
}

impl Polygon {
    /// Validates simplicity and reorders clockwise input to counterclockwise.
    pub fn new(mut vertices: Vec<Point2>) -> Result<Self> {
        if vertices.len() >= 2 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(Error::invalid(format!("polygon needs at least 3 vertices, got {}", vertices.len())));
        }
        let n = vertices.len();
        for i in 0..n {
            if vertices[i] == vertices[(i + 1) % n] {
                return Err(Error::invalid(format!("repeated consecutive vertex {}", vertices[i])));
            }
        }
        let area2 = shoelace2(&vertices);
        if area2.is_zero() {
            return Err(Error::degenerate("polygon has zero area"));
        }
        if area2.is_negative() {
            vertices.reverse();
        }
        let poly = Polygon { vertices };
        if !poly.is_simple() {
            return Err(Error::invalid("polygon is self-intersecting"));
        }
        Ok(poly)
    }

    pub fn from_ints(coords: &[(i64, i64)]) -> Result<Self> {
        Polygon::new(coords.iter().map(|&(x, y)| Point2::int(x, y)).collect())
    }

    /// Axis-aligned rectangle `[x0,x1] x [y0,y1]`.
    pub fn rect(x0: Rational, y0: Rational, x1: Rational, y1: Rational) -> Result<Self> {
        Polygon::new(vec![
            Point2::new(x0.clone(), y0.clone()),
            Point2::new(x1.clone(), y0),
            Point2::new(x1, y1.clone()),
            Point2::new(x0, y1),
        ])
    }

    pub(crate) fn from_ccw_unchecked(vertices: Vec<Point2>) -> Self {
        Polygon { vertices }
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&Point2, &Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (&self.vertices[i], &self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> Rational {
        shoelace2(&self.vertices) * frac(1, 2)
    }

    pub fn centroid(&self) -> Point2 {
        let n = self.vertices.len();
        let mut cx = Rational::zero();
        let mut cy = Rational::zero();
        let mut a2 = Rational::zero();
        for i in 0..n {
            let p = &self.vertices[i];
            let q = &self.vertices[(i + 1) % n];
            let c = p.cross(q);
            cx += (&p.x + &q.x) * &c;
            cy += (&p.y + &q.y) * &c;
            a2 += c;
        }
        let s = &a2 * Rational::from_integer(3.into());
        Point2::new(cx / &s, cy / s)
    }

    pub fn bbox(&self) -> (Point2, Point2) {
        bbox_of(&self.vertices)
    }

    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| orient(&self.vertices[i], &self.vertices[(i + 1) % n], &self.vertices[(i + 2) % n]) >= 0)
    }

    /// True if vertex `i` is a reflex (interior angle > pi) vertex.
    pub fn is_reflex(&self, i: usize) -> bool {
        let n = self.vertices.len();
        orient(&self.vertices[(i + n - 1) % n], &self.vertices[i], &self.vertices[(i + 1) % n]) < 0
    }

    pub fn translate(&self, v: &Point2) -> Polygon {
        Polygon { vertices: self.vertices.iter().map(|p| p + v).collect() }
    }

    pub fn on_boundary(&self, p: &Point2) -> bool {
        self.edges().any(|(a, b)| on_segment(a, b, p))
    }

    /// Winding-number test; points on the boundary count as inside.
    pub fn contains(&self, p: &Point2) -> bool {
        self.on_boundary(p) || self.winding(p) != 0
    }

    pub fn contains_strict(&self, p: &Point2) -> bool {
        !self.on_boundary(p) && self.winding(p) != 0
    }

    fn winding(&self, p: &Point2) -> i32 {
        let mut w = 0;
        for (a, b) in self.edges() {
            if a.y <= p.y {
                if b.y > p.y && orient(a, b, p) > 0 {
                    w += 1;
                }
            } else if b.y <= p.y && orient(a, b, p) < 0 {
                w -= 1;
            }
        }
        w
    }

    fn is_simple(&self) -> bool {
        let n = self.vertices.len();
        for i in 0..n {
            let (a, b) = (&self.vertices[i], &self.vertices[(i + 1) % n]);
            for j in (i + 1)..n {
                let (c, d) = (&self.vertices[j], &self.vertices[(j + 1) % n]);
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    // neighbours share one endpoint; they must not fold back onto each other
                    let (shared, p, q) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                    if orient(p, shared, q) == 0 && (p - shared).dot(&(q - shared)).is_positive() {
                        return false;
                    }
                } else if segments_intersect(a, b, c, d) {
                    return false;
                }
            }
        }
        true
    }
}

impl<'de> Deserialize<'de> for Polygon {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            vertices: Vec<Point2>,
        }
        let raw = Raw::deserialize(d)?;
        Polygon::new(raw.vertices).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn on_segment(a: &Point2, b: &Point2, p: &Point2) -> bool {
    orient(a, b, p) == 0 && (p - a).dot(&(p - b)) <= Rational::zero()
}

pub(crate) fn segments_intersect(a: &Point2, b: &Point2, c: &Point2, d: &Point2) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if o1 * o2 < 0 && o3 * o4 < 0 {
        return true;
    }
    (o1 == 0 && on_segment(a, b, c))
        || (o2 == 0 && on_segment(a, b, d))
        || (o3 == 0 && on_segment(c, d, a))
        || (o4 == 0 && on_segment(c, d, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn orientation_is_normalized() {
        let p = Polygon::from_ints(&[(0, 0), (0, 1), (1, 1), (1, 0)]).unwrap();
        assert_eq!(p.area(), int(1));
        assert_eq!(p.vertices()[1], Point2::int(1, 1));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Polygon::from_ints(&[(0, 0), (1, 0)]).is_err());
        assert!(Polygon::from_ints(&[(0, 0), (1, 0), (2, 0)]).is_err());
        assert!(Polygon::from_ints(&[(0, 0), (2, 2), (2, 0), (0, 2)]).is_err());
        assert!(Polygon::from_ints(&[(0, 0), (1, 0), (1, 0), (0, 1)]).is_err());
    }

    #[test]
    fn containment() {
        let l = Polygon::from_ints(&[(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)]).unwrap();
        assert!(!l.is_convex());
        assert!(l.is_reflex(3));
        assert!(l.contains_strict(&Point2::new(frac(1, 2), frac(3, 2))));
        assert!(!l.contains(&Point2::new(frac(3, 2), frac(3, 2))));
        assert!(l.contains(&Point2::int(1, 1)));
        assert!(!l.contains_strict(&Point2::int(1, 1)));
        assert_eq!(l.area(), int(3));
    }

    #[test]
    fn centroid_of_square() {
        let p = Polygon::from_ints(&[(0, 0), (2, 0), (2, 2), (0, 2)]).unwrap();
        assert_eq!(p.centroid(), Point2::int(1, 1));
    }
}
