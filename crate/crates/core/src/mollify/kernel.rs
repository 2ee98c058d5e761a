use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{arrangement_partition, minkowski_sum, ConvexPolygon, Line, Point2};
use crate::linalg::solve_exact;
use crate::polynomial::{integrate_over_convex, AffineMap, Piece, PiecewisePoly, Polynomial2};
use crate::rational::{int, Rational};

/// Exact `(f * g)(x) = int f(y) g(x - y) dy`.
pub fn convolution_at(f: &PiecewisePoly, g: &PiecewisePoly, x: &Point2) -> Rational {
    let reflect = AffineMap::new(
        -Rational::one(),
        Rational::zero(),
        x.x.clone(),
        Rational::zero(),
        -Rational::one(),
        x.y.clone(),
    );
    let mut sum = Rational::zero();
    for b in g.pieces() {
        let Some(mirrored) = b.region.map(|p| x - p) else {
            continue;
        };
        let q = b.poly.compose_affine(&reflect);
        for a in f.pieces() {
            if !a.region.bbox_overlaps(&mirrored) {
                continue;
            }
            if let Some(r) = a.region.intersect(&mirrored) {
                sum += integrate_over_convex(&(&a.poly * &q), &r);
            }
        }
    }
    sum
}

fn breaklines(f: &PiecewisePoly, g: &PiecewisePoly) -> Vec<Line> {
    let mut lines: Vec<Line> = Vec::new();
    let mut push = |l: Line| {
        let l = l.normalized();
        if !lines.contains(&l) {
            lines.push(l);
        }
    };
    for a in f.pieces() {
        for b in g.pieces() {
            for (b0, b1) in b.region.edges() {
                for v in a.region.vertices() {
                    push(Line::through(&(v + b0), &(b1 - b0)));
                }
            }
            for (a0, a1) in a.region.edges() {
                for v in b.region.vertices() {
                    push(Line::through(&(a0 + v), &(a1 - a0)));
                }
            }
        }
    }
    lines
}

/// Points of the degree-`d` principal lattice of a triangle shrunk into the cell.
fn lattice_points(cell: &ConvexPolygon, d: u32) -> Vec<Point2> {
    let c = cell.interior_point();
    let half = Rational::new(1.into(), 2.into());
    let v = cell.vertices();
    let t: Vec<Point2> = v[..3].iter().map(|p| p.lerp(&c, &half)).collect();
    if d == 0 {
        return vec![c];
    }
    let dd = int(d as i64);
    let mut out = Vec::new();
    for i in 0..=d {
        for j in 0..=d - i {
            let a = int(i as i64) / &dd;
            let b = int(j as i64) / &dd;
            out.push(&(&t[0] + &(&t[1] - &t[0]).scale(&a)) + &(&t[2] - &t[0]).scale(&b));
        }
    }
    out
}

/// Exact piecewise form of `f * g` for compactly supported piecewise
/// polynomials. On every cell of the arrangement of event lines the
/// convolution is a polynomial of degree `deg f + deg g + 2`, recovered by
/// exact interpolation at lattice points.
pub fn convolve_piecewise(f: &PiecewisePoly, g: &PiecewisePoly) -> Result<PiecewisePoly> {
    if f.is_unbounded() || g.is_unbounded() {
        return Err(Error::UnboundedSupport);
    }
    let (Some(hf), Some(hg)) = (f.support_hull(), g.support_hull()) else {
        return Ok(PiecewisePoly::zero());
    };
    let domain = minkowski_sum(&hf.to_polygon(), &hg.to_polygon())?;
    let lines = breaklines(f, g);
    let part = arrangement_partition(&domain, &lines)?;
    let d = (f.total_degree() + g.total_degree() + 2) as u32;
    let monomials: Vec<(u32, u32)> = (0..=d).flat_map(|t| (0..=t).map(move |j| (t - j, j))).collect();
    let pieces = part
        .cells
        .par_iter()
        .map(|cell| {
            let region = ConvexPolygon::from_polygon(cell)?;
            let pts = lattice_points(&region, d);
            let rows: Vec<Vec<Rational>> = pts
                .iter()
                .map(|p| monomials.iter().map(|&(i, j)| Polynomial2::monomial(i, j, Rational::one()).eval(p)).collect())
                .collect();
            let vals: Vec<Rational> = pts.iter().map(|p| convolution_at(f, g, p)).collect();
            let coef = solve_exact(rows, vals)?;
            let poly = Polynomial2::from_terms(monomials.iter().cloned().zip(coef));
            Ok(Piece { region, poly })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = PiecewisePoly::new(pieces);
    out.prune_and_merge();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Polygon;
    use crate::rational::frac;

    #[test]
    fn square_with_itself_is_tensor_hat() {
        let sq = PiecewisePoly::indicator(&Polygon::rect(int(0), int(0), int(1), int(1)).unwrap());
        let h = convolve_piecewise(&sq, &sq).unwrap();
        assert_eq!(h.eval(&Point2::int(1, 1)), int(1));
        assert_eq!(h.eval(&Point2::new(frac(1, 2), frac(1, 2))), frac(1, 4));
        assert_eq!(h.integrate(), int(1));
        assert_eq!(h.len(), 4);
    }
}
