use num_traits::{Signed, Zero};

use super::{bbox_of, line_segment_point, orient, perturbed_sign, shoelace2, Line, Point2, Polygon};
use crate::error::{Error, Result};
use crate::rational::{frac, Rational};

/// Bounded convex polygon with counterclockwise vertices and no collinear triples.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
    lo: Point2,
    hi: Point2,
}

impl ConvexPolygon {
    /// Convex hull of the points; `None` if it has no interior.
    pub fn hull(points: &[Point2]) -> Option<Self> {
        let h = convex_hull(points);
        if h.len() < 3 {
            return None;
        }
        Some(Self::from_clean(h))
    }

    /// Trusts that `vertices` is counterclockwise and convex; removes duplicates and collinear points.
    pub fn from_ccw(vertices: Vec<Point2>) -> Option<Self> {
        let v = clean_ring(vertices);
        if v.len() < 3 || !shoelace2(&v).is_positive() {
            return None;
        }
        Some(Self::from_clean(v))
    }

    pub fn from_polygon(p: &Polygon) -> Result<Self> {
        if !p.is_convex() {
            return Err(Error::invalid("polygon is not convex"));
        }
        Self::from_ccw(p.vertices().to_vec()).ok_or_else(|| Error::degenerate("empty convex polygon"))
    }

    fn from_clean(vertices: Vec<Point2>) -> Self {
        let (lo, hi) = bbox_of(&vertices);
        ConvexPolygon { vertices, lo, hi }
    }

    pub fn rect(x0: Rational, y0: Rational, x1: Rational, y1: Rational) -> Option<Self> {
        Self::from_ccw(vec![
            Point2::new(x0.clone(), y0.clone()),
            Point2::new(x1.clone(), y0),
            Point2::new(x1, y1.clone()),
            Point2::new(x0, y1),
        ])
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn bbox(&self) -> (&Point2, &Point2) {
        (&self.lo, &self.hi)
    }

    pub fn to_polygon(&self) -> Polygon {
        Polygon::from_ccw_unchecked(self.vertices.clone())
    }

    pub fn area(&self) -> Rational {
        shoelace2(&self.vertices) * frac(1, 2)
    }

    pub fn centroid(&self) -> Point2 {
        self.to_polygon().centroid()
    }

    /// Supporting lines of the edges; the interior is where `eval > 0`.
    pub fn edge_lines(&self) -> impl Iterator<Item = Line> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| {
            let a = &self.vertices[i];
            let b = &self.vertices[(i + 1) % n];
            Line::through(a, &(b - a))
        })
    }

    pub fn edges(&self) -> impl Iterator<Item = (&Point2, &Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (&self.vertices[i], &self.vertices[(i + 1) % n]))
    }

    pub fn bbox_overlaps(&self, o: &ConvexPolygon) -> bool {
        self.lo.x < o.hi.x && o.lo.x < self.hi.x && self.lo.y < o.hi.y && o.lo.y < self.hi.y
    }

    /// Closed containment.
    pub fn contains(&self, p: &Point2) -> bool {
        self.edges().all(|(a, b)| orient(a, b, p) >= 0)
    }

    pub fn contains_strict(&self, p: &Point2) -> bool {
        self.edges().all(|(a, b)| orient(a, b, p) > 0)
    }

    /// Half-open containment: membership of `p + eps*u + eps^2*w`.
    pub fn contains_perturbed(&self, p: &Point2) -> bool {
        if p.x < self.lo.x || p.x > self.hi.x || p.y < self.lo.y || p.y > self.hi.y {
            return false;
        }
        self.edges().all(|(a, b)| {
            let e = b - a;
            perturbed_sign(&e.cross(&(p - a)), &e.perp()) > 0
        })
    }

    /// Part on the side where `line.eval >= 0`.
    pub fn clip(&self, line: &Line) -> Option<ConvexPolygon> {
        let vals: Vec<Rational> = self.vertices.iter().map(|v| line.eval(v)).collect();
        if vals.iter().all(|v| !v.is_negative()) {
            return Some(self.clone());
        }
        if vals.iter().all(|v| !v.is_positive()) {
            return None;
        }
        let n = self.vertices.len();
        let mut out = Vec::with_capacity(n + 1);
        for i in 0..n {
            let j = (i + 1) % n;
            if !vals[i].is_negative() {
                out.push(self.vertices[i].clone());
            }
            if (vals[i].is_positive() && vals[j].is_negative()) || (vals[i].is_negative() && vals[j].is_positive()) {
                out.push(line_segment_point(line, &self.vertices[i], &self.vertices[j]));
            }
        }
        Self::from_ccw(out)
    }

    /// Parts on the negative and positive side of the line.
    pub fn split(&self, line: &Line) -> (Option<ConvexPolygon>, Option<ConvexPolygon>) {
        let neg = Line { a: -&line.a, b: -&line.b, c: -&line.c };
        (self.clip(&neg), self.clip(line))
    }

    pub fn intersect(&self, o: &ConvexPolygon) -> Option<ConvexPolygon> {
        if !self.bbox_overlaps(o) {
            return None;
        }
        let mut cur = self.clone();
        for l in o.edge_lines() {
            cur = cur.clip(&l)?;
        }
        Some(cur)
    }

    /// `self \ o` as disjoint convex pieces.
    pub fn difference(&self, o: &ConvexPolygon) -> Vec<ConvexPolygon> {
        if !self.bbox_overlaps(o) {
            return vec![self.clone()];
        }
        let mut out = Vec::new();
        let mut cur = self.clone();
        for l in o.edge_lines() {
            let (outside, inside) = cur.split(&l);
            if let Some(p) = outside {
                out.push(p);
            }
            match inside {
                Some(p) => cur = p,
                None => return out,
            }
        }
        out
    }

    pub fn translate(&self, v: &Point2) -> ConvexPolygon {
        Self::from_clean(self.vertices.iter().map(|p| p + v).collect())
    }

    /// Image under an affine map with positive determinant.
    pub fn map(&self, f: impl Fn(&Point2) -> Point2) -> Option<ConvexPolygon> {
        let pts: Vec<Point2> = self.vertices.iter().map(f).collect();
        ConvexPolygon::hull(&pts)
    }

    /// An interior point (the vertex average).
    pub fn interior_point(&self) -> Point2 {
        let n = Rational::from_integer((self.vertices.len() as i64).into());
        let mut x = Rational::zero();
        let mut y = Rational::zero();
        for v in &self.vertices {
            x += &v.x;
            y += &v.y;
        }
        Point2::new(x / &n, y / n)
    }
}

fn clean_ring(mut v: Vec<Point2>) -> Vec<Point2> {
    v.dedup();
    while v.len() > 1 && v.first() == v.last() {
        v.pop();
    }
    loop {
        let n = v.len();
        if n < 3 {
            return v;
        }
        let mut removed = false;
        for i in 0..n {
            let a = &v[(i + n - 1) % n];
            let b = &v[i];
            let c = &v[(i + 1) % n];
            if a == b || orient(a, b, c) == 0 {
                v.remove(i);
                removed = true;
                break;
            }
        }
        if !removed {
            return v;
        }
    }
}

/// Counterclockwise convex hull without collinear points (monotone chain).
pub fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Point2> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && orient(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Point2> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && orient(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Minkowski sum of two point sets' convex hulls (points and segments allowed).
pub fn minkowski_sum_points(a: &[Point2], b: &[Point2]) -> Vec<Point2> {
    let mut sums = Vec::with_capacity(a.len() * b.len());
    for p in a {
        for q in b {
            sums.push(p + q);
        }
    }
    convex_hull(&sums)
}

/// Exact Minkowski sum of two convex polygons.
pub fn minkowski_sum(a: &Polygon, b: &Polygon) -> Result<Polygon> {
    if !a.is_convex() || !b.is_convex() {
        return Err(Error::invalid("minkowski_sum needs convex inputs; split non-convex polygons first"));
    }
    Ok(Polygon::from_ccw_unchecked(minkowski_sum_points(a.vertices(), b.vertices())))
}

/// Common refinement of two families of cells, each with disjoint interiors.
pub fn refine_cells(a: &[ConvexPolygon], b: &[ConvexPolygon]) -> Vec<ConvexPolygon> {
    let mut out = Vec::new();
    for p in a {
        let mut rest = vec![p.clone()];
        for q in b {
            if !p.bbox_overlaps(q) {
                continue;
            }
            if let Some(i) = p.intersect(q) {
                out.push(i);
            }
            rest = rest.iter().flat_map(|r| r.difference(q)).collect();
        }
        out.extend(rest);
    }
    for q in b {
        let mut rest = vec![q.clone()];
        for p in a {
            if q.bbox_overlaps(p) {
                rest = rest.iter().flat_map(|r| r.difference(p)).collect();
            }
        }
        out.extend(rest);
    }
    out
}
