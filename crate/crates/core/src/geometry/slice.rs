use num_traits::{One, Signed, Zero};

use super::{convex_parts, refine_cells, ConvexPolygon, Partition, Point2, Polygon};
use crate::error::{Error, Result};
use crate::rational::{frac, Rational};

/// Integration limit in sweep coordinates `(s, u)`, where
/// `x = s*v + u*perp(v)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Limit {
    /// `sigma = alpha*u + beta`, a cell edge.
    Edge { alpha: Rational, beta: Rational },
    /// `sigma = s`.
    S,
    /// `sigma = s - 1`.
    SMinus1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepKind {
    /// Unit segment average `int_0^1 f(x - t v) dt`.
    Segment,
    /// Ray integral `int_0^inf f(x - t v) dt`, cut off at sweep coordinate `horizon`.
    Ray,
}

/// One cell of the swept complex and the integration limits valid on it.
#[derive(Clone, Debug)]
pub struct SweepCell {
    pub region: ConvexPolygon,
    pub lower: Limit,
    pub upper: Limit,
}

/// Sweep coordinates of `x` for direction `v`.
pub(crate) fn to_sweep(x: &Point2, v: &Point2) -> (Rational, Rational) {
    let n2 = v.norm2();
    (x.dot(v) / &n2, x.dot(&v.perp()) / n2)
}

pub(crate) fn from_sweep(s: &Rational, u: &Rational, v: &Point2) -> Point2 {
    &v.scale(s) + &v.perp().scale(u)
}

/// Endpoints of the chord of a convex polygon (in sweep coordinates) at height `u`.
fn chord(su: &[(Rational, Rational)], u: &Rational) -> (Rational, Rational) {
    let n = su.len();
    let mut lo: Option<Rational> = None;
    let mut hi: Option<Rational> = None;
    let mut push = |s: Rational| {
        if lo.as_ref().is_none_or(|l| &s < l) {
            lo = Some(s.clone());
        }
        if hi.as_ref().is_none_or(|h| &s > h) {
            hi = Some(s);
        }
    };
    for i in 0..n {
        let (sa, ua) = &su[i];
        let (sb, ub) = &su[(i + 1) % n];
        if ua == u {
            push(sa.clone());
        }
        if (ua < u && u < ub) || (ub < u && u < ua) {
            let t = (u - ua) / (ub - ua);
            push(sa + &((sb - sa) * t));
        }
    }
    (lo.expect("level inside polygon"), hi.expect("level inside polygon"))
}

#[derive(Clone)]
struct Affine {
    alpha: Rational,
    beta: Rational,
}

impl Affine {
    fn through(u0: &Rational, s0: &Rational, u1: &Rational, s1: &Rational) -> Affine {
        let alpha = (s1 - s0) / (u1 - u0);
        let beta = s0 - &alpha * u0;
        Affine { alpha, beta }
    }
    fn at(&self, u: &Rational) -> Rational {
        &self.alpha * u + &self.beta
    }
    fn shifted(&self, d: &Rational) -> Affine {
        Affine { alpha: self.alpha.clone(), beta: &self.beta + d }
    }
    fn limit(&self) -> Limit {
        Limit::Edge { alpha: self.alpha.clone(), beta: self.beta.clone() }
    }
}

/// Cells of the complex produced by sweeping `poly` along `v`.
///
/// For [`SweepKind::Ray`] the unbounded cells are cut at sweep coordinate
/// `horizon` (which must exceed the polygon's maximal `s`).
pub fn sweep_cells(poly: &ConvexPolygon, v: &Point2, kind: SweepKind, horizon: Option<&Rational>) -> Vec<SweepCell> {
    let su: Vec<(Rational, Rational)> = poly.vertices().iter().map(|p| to_sweep(p, v)).collect();
    let mut levels: Vec<Rational> = su.iter().map(|(_, u)| u.clone()).collect();
    levels.sort();
    levels.dedup();
    let one = Rational::one();
    let mut out = Vec::new();
    for w in levels.windows(2) {
        let (u0, u1) = (&w[0], &w[1]);
        let (l0, h0) = chord(&su, u0);
        let (l1, h1) = chord(&su, u1);
        let lower = Affine::through(u0, &l0, u1, &l1);
        let upper = Affine::through(u0, &h0, u1, &h1);
        let mut cuts = vec![u0.clone(), u1.clone()];
        if kind == SweepKind::Segment {
            // L + 1 = U inside the strip
            let g0 = &l0 + &one - &h0;
            let g1 = &l1 + &one - &h1;
            if (g0.is_positive() && g1.is_negative()) || (g0.is_negative() && g1.is_positive()) {
                let t = &g0 / (&g0 - &g1);
                cuts.insert(1, u0 + &((u1 - u0) * t));
            }
        }
        for c in cuts.windows(2) {
            let (ua, ub) = (&c[0], &c[1]);
            let quad = |f: &Affine, g: &Affine| {
                ConvexPolygon::from_ccw(vec![
                    from_sweep(&f.at(ua), ua, v),
                    from_sweep(&g.at(ua), ua, v),
                    from_sweep(&g.at(ub), ub, v),
                    from_sweep(&f.at(ub), ub, v),
                ])
            };
            let mut push = |f: &Affine, g: &Affine, lo: Limit, hi: Limit| {
                if let Some(region) = quad(f, g) {
                    out.push(SweepCell { region, lower: lo, upper: hi });
                }
            };
            match kind {
                SweepKind::Segment => {
                    let lp1 = lower.shifted(&one);
                    let up1 = upper.shifted(&one);
                    let um = (ua + ub) * frac(1, 2);
                    if lp1.at(&um) <= upper.at(&um) {
                        push(&lower, &lp1, lower.limit(), Limit::S);
                        push(&lp1, &upper, Limit::SMinus1, Limit::S);
                        push(&upper, &up1, Limit::SMinus1, upper.limit());
                    } else {
                        push(&lower, &upper, lower.limit(), Limit::S);
                        push(&upper, &lp1, lower.limit(), upper.limit());
                        push(&lp1, &up1, Limit::SMinus1, upper.limit());
                    }
                }
                SweepKind::Ray => {
                    let h = horizon.expect("ray sweep needs a horizon");
                    let far = Affine { alpha: Rational::zero(), beta: h.clone() };
                    push(&lower, &upper, lower.limit(), Limit::S);
                    push(&upper, &far, lower.limit(), upper.limit());
                }
            }
        }
    }
    out
}

/// Cell complex on which `count` applications of the unit sweep along
/// `step` to a polynomial on `cell` are piecewise polynomial.
pub fn slice_cell_complex(cell: &Polygon, step: &Point2, count: usize) -> Result<Partition> {
    if step.is_zero() {
        return Err(Error::invalid("zero step vector"));
    }
    if count == 0 {
        return Err(Error::invalid("count must be at least 1"));
    }
    let mut cells = convex_parts(cell);
    for _ in 0..count {
        let mut acc: Vec<ConvexPolygon> = Vec::new();
        for c in &cells {
            let swept: Vec<ConvexPolygon> =
                sweep_cells(c, step, SweepKind::Segment, None).into_iter().map(|s| s.region).collect();
            acc = refine_cells(&acc, &swept);
        }
        cells = acc;
    }
    Partition::from_cells(cells.iter().map(|c| c.to_polygon()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn unit_square_hat_complex() {
        let sq = Polygon::from_ints(&[(0, 0), (1, 0), (1, 1), (0, 1)]).unwrap();
        let p = slice_cell_complex(&sq, &Point2::int(1, 0), 1).unwrap();
        assert_eq!(p.cells.len(), 2);
        assert_eq!(p.domain.area(), int(2));
        assert!(p.cells.iter().all(|c| c.area() == int(1)));
    }

    #[test]
    fn triangle_two_bands() {
        let t = Polygon::from_ints(&[(0, 0), (2, 0), (1, 1)]).unwrap();
        let p = slice_cell_complex(&t, &Point2::int(1, 0), 1).unwrap();
        assert!(p.cells.len() >= 5);
        let mut ys: Vec<Rational> = p.vertices.iter().map(|v| v.y.clone()).collect();
        ys.sort();
        ys.dedup();
        assert_eq!(ys, vec![int(0), frac(1, 2), int(1)]);
        assert_eq!(p.domain.area(), int(2));
    }

    #[test]
    fn oblique_sweep_preserves_area() {
        let d =
            ConvexPolygon::hull(&[Point2::int(1, 0), Point2::int(2, 1), Point2::int(1, 2), Point2::int(0, 1)]).unwrap();
        let v = Point2::int(1, 1);
        let cells = sweep_cells(&d, &v, SweepKind::Segment, None);
        let total: Rational = cells.iter().map(|c| c.region.area()).sum();
        // area of d + [0, v]
        assert_eq!(total, int(4));
    }
}
