use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::geometry::{cone_decompose_along, sweep_cells, ConvexPolygon, Limit, Line, Point2, SweepKind};
use crate::polynomial::{AffineMap, Axis, Piece, PiecewisePoly, Polynomial2};
use crate::rational::Rational;

fn sweep_maps(v: &Point2) -> (AffineMap, AffineMap) {
    let w = v.perp();
    let z = Rational::zero();
    // (sigma, u) -> sigma v + u w
    let fwd = AffineMap::new(v.x.clone(), w.x.clone(), z.clone(), v.y.clone(), w.y.clone(), z.clone());
    let n2 = v.norm2();
    // x -> (s, u)
    let back = AffineMap::new(&v.x / &n2, &v.y / &n2, z.clone(), &w.x / &n2, &w.y / &n2, z);
    (fwd, back)
}

fn at_limit(q: &Polynomial2, lim: &Limit) -> Polynomial2 {
    let (z, one) = (Rational::zero(), Rational::one());
    match lim {
        Limit::S => q.clone(),
        Limit::SMinus1 => q.compose_affine(&AffineMap::new(one.clone(), z.clone(), -one.clone(), z.clone(), one, z)),
        Limit::Edge { alpha, beta } => {
            q.compose_affine(&AffineMap::new(z.clone(), alpha.clone(), beta.clone(), z.clone(), one, z))
        }
    }
}

fn sweep(f: &PiecewisePoly, v: &Point2, kind: SweepKind, horizon: Option<&Rational>) -> PiecewisePoly {
    let (fwd, back) = sweep_maps(v);
    let parts: Vec<PiecewisePoly> = f
        .pieces()
        .iter()
        .map(|pc| {
            // antiderivative in sigma of the piece polynomial in sweep coordinates
            let q = pc.poly.compose_affine(&fwd).antiderivative(Axis::X);
            let cells = sweep_cells(&pc.region, v, kind, horizon);
            let mut out = PiecewisePoly::new(
                cells
                    .into_iter()
                    .map(|c| {
                        let g = &at_limit(&q, &c.upper) - &at_limit(&q, &c.lower);
                        Piece { region: c.region, poly: g.compose_affine(&back) }
                    })
                    .collect(),
            );
            out.prune_and_merge();
            out
        })
        .collect();
    PiecewisePoly::sum_all(parts)
}

/// `x -> int_0^1 f(x - t v) dt`, the convolution with the unit segment `[0, v]`.
pub fn segment_sweep(f: &PiecewisePoly, v: &Point2) -> PiecewisePoly {
    sweep(f, v, SweepKind::Segment, None)
}

/// `x -> int_0^inf f(x - t v) dt`, stored up to sweep coordinate `horizon`
/// (`x . v / |v|^2 <= horizon`) and flagged unbounded.
pub fn ray_sweep(f: &PiecewisePoly, v: &Point2, horizon: &Rational) -> PiecewisePoly {
    sweep(f, v, SweepKind::Ray, Some(horizon)).with_unbounded(true)
}

fn check_direction(f: &PiecewisePoly, e: &Point2) -> Result<()> {
    if e.is_zero() {
        return Err(Error::invalid("zero direction"));
    }
    if f.is_unbounded() {
        return Err(Error::UnboundedSupport);
    }
    Ok(())
}

fn max_s(points: impl Iterator<Item = Point2>, v: &Point2) -> Option<Rational> {
    let n2 = v.norm2();
    points.map(|p| p.dot(v) / &n2).max()
}

/// Directional antiderivative `J_e f(x) = int_{-inf}^0 f(x + t e) dt`.
///
/// The result is constant along `e` beyond the support of `f`; the stored
/// pieces stop one unit (in multiples of `e`) past it and the result is
/// flagged unbounded.
pub fn j_direction(f: &PiecewisePoly, e: &Point2) -> Result<PiecewisePoly> {
    check_direction(f, e)?;
    let pts = f.pieces().iter().flat_map(|p| p.region.vertices().iter().cloned());
    let h = match max_s(pts, e) {
        Some(h) => h + Rational::one(),
        None => return Ok(PiecewisePoly::zero().with_unbounded(true)),
    };
    Ok(ray_sweep(f, e, &h))
}

/// `J_e f(x) - J_e f(x - e)`, computed directly as the unit segment sweep.
pub fn i_direction(f: &PiecewisePoly, e: &Point2) -> Result<PiecewisePoly> {
    check_direction(f, e)?;
    Ok(segment_sweep(f, e))
}

/// The half-plane of `line` containing `inside`, as a line whose positive side it is.
fn oriented(line: Line, inside: &Point2) -> Line {
    if line.eval(inside) < Rational::zero() {
        Line { a: -line.a, b: -line.b, c: -line.c }
    } else {
        line
    }
}

/// `I_e f` through signed cones: every piece is written as a signed sum of
/// cones opening along `e`, each cone is integrated with `J_e` and the unit
/// difference `J_e g - J_e g(. - e)` is taken on the bounded result region.
pub fn i_direction_cones(f: &PiecewisePoly, e: &Point2) -> Result<PiecewisePoly> {
    check_direction(f, e)?;
    let n2 = e.norm2();
    let w = e.perp();
    let mut parts = Vec::new();
    for pc in f.pieces() {
        let verts = pc.region.vertices();
        let moved: Vec<Point2> = verts.iter().map(|p| p + e).collect();
        let all: Vec<Point2> = verts.iter().chain(moved.iter()).cloned().collect();
        let target = ConvexPolygon::hull(&all).expect("piece has interior");
        // sweep-aligned window covering every backward ray from the target
        let s_of = |p: &Point2| p.dot(e) / &n2;
        let u_of = |p: &Point2| p.dot(&w) / &n2;
        let s_lo = verts.iter().map(s_of).min().unwrap() - Rational::one();
        let s_hi = all.iter().map(s_of).max().unwrap() + Rational::one();
        let u_lo = all.iter().map(u_of).min().unwrap() - Rational::one();
        let u_hi = all.iter().map(u_of).max().unwrap() + Rational::one();
        let corner = |s: &Rational, u: &Rational| &e.scale(s) + &w.scale(u);
        let window = ConvexPolygon::hull(&[
            corner(&s_lo, &u_lo),
            corner(&s_hi, &u_lo),
            corner(&s_hi, &u_hi),
            corner(&s_lo, &u_hi),
        ])
        .expect("window has interior");
        let horizon = s_hi.clone() + Rational::one();
        let dec = cone_decompose_along(&pc.region.to_polygon(), e)?;
        for cone in &dec.cones {
            let l1 = oriented(Line::through(&cone.apex, &cone.ray1), &(&cone.apex + &cone.ray2));
            let l2 = oriented(Line::through(&cone.apex, &cone.ray2), &(&cone.apex + &cone.ray1));
            let Some(bounded) = window.clip(&l1).and_then(|r| r.clip(&l2)) else {
                continue;
            };
            let g = PiecewisePoly::on_region(bounded, pc.poly.clone());
            let j = ray_sweep(&g, e, &horizon);
            let diff = j.sub(&j.shift(e)).clip(&target);
            let signed = if cone.sign < 0 { diff.neg() } else { diff };
            parts.push(signed);
        }
    }
    Ok(PiecewisePoly::sum_all(parts))
}
