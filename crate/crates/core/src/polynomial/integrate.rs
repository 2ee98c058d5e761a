use std::collections::BTreeMap;

use num_traits::Zero;

use super::{factorial_q, Polynomial2};
use crate::error::{Error, Result};
use crate::geometry::{triangulate, ConvexPolygon, Point2, Polygon};
use crate::rational::Rational;

type Bary = BTreeMap<[u32; 3], Rational>;

fn bary_mul(a: &Bary, b: &Bary) -> Bary {
    let mut out = Bary::new();
    for (ka, ca) in a {
        for (kb, cb) in b {
            let k = [ka[0] + kb[0], ka[1] + kb[1], ka[2] + kb[2]];
            *out.entry(k).or_insert_with(Rational::zero) += ca * cb;
        }
    }
    out
}

fn bary_powers(base: &Bary, k: usize) -> Vec<Bary> {
    let mut out = vec![Bary::from([([0, 0, 0], Rational::from_integer(1.into()))])];
    for _ in 0..k {
        let next = bary_mul(out.last().unwrap(), base);
        out.push(next);
    }
    out
}

fn linear_form(a: &Rational, b: &Rational, c: &Rational) -> Bary {
    Bary::from([([1, 0, 0], a.clone()), ([0, 1, 0], b.clone()), ([0, 0, 1], c.clone())])
}

/// Exact integral over a triangle: the polynomial is rewritten as a
/// homogeneous form in barycentric coordinates and each monomial
/// `l1^a l2^b l3^c` integrates to `2 |T| a! b! c! / (a+b+c+2)!`.
pub fn integrate_over_triangle(p: &Polynomial2, t: &[Point2; 3]) -> Result<Rational> {
    let twice_area = (&t[1] - &t[0]).cross(&(&t[2] - &t[0]));
    if twice_area.is_zero() {
        return Err(Error::degenerate("zero-area triangle"));
    }
    Ok(triangle_integral(p, t, &abs(twice_area)))
}

fn abs(r: Rational) -> Rational {
    if r < Rational::zero() {
        -r
    } else {
        r
    }
}

fn triangle_integral(p: &Polynomial2, t: &[Point2; 3], twice_area: &Rational) -> Rational {
    let d = p.total_degree();
    if d < 0 {
        return Rational::zero();
    }
    let d = d as usize;
    let one = Rational::from_integer(1.into());
    let lx = linear_form(&t[0].x, &t[1].x, &t[2].x);
    let ly = linear_form(&t[0].y, &t[1].y, &t[2].y);
    let ls = linear_form(&one, &one, &one);
    let px = bary_powers(&lx, d);
    let py = bary_powers(&ly, d);
    let ps = bary_powers(&ls, d);
    let mut hom = Bary::new();
    for (&(i, j), c) in p.terms() {
        let (i, j) = (i as usize, j as usize);
        let term = bary_mul(&bary_mul(&px[i], &py[j]), &ps[d - i - j]);
        for (k, v) in term {
            *hom.entry(k).or_insert_with(Rational::zero) += c * v;
        }
    }
    let denom = factorial_q(d as u32 + 2);
    let mut sum = Rational::zero();
    for (k, c) in hom {
        if c.is_zero() {
            continue;
        }
        sum += c * factorial_q(k[0]) * factorial_q(k[1]) * factorial_q(k[2]);
    }
    sum * twice_area / denom
}

/// Exact integral over a simple polygon (sum over an ear triangulation).
pub fn integrate_over_polygon(p: &Polynomial2, poly: &Polygon) -> Rational {
    triangulate(poly)
        .iter()
        .map(|t| {
            let a2 = (&t[1] - &t[0]).cross(&(&t[2] - &t[0]));
            triangle_integral(p, t, &a2)
        })
        .sum()
}

/// Exact integral over a convex polygon (fan triangulation).
pub fn integrate_over_convex(p: &Polynomial2, c: &ConvexPolygon) -> Rational {
    let v = c.vertices();
    let mut sum = Rational::zero();
    for k in 1..v.len() - 1 {
        let t = [v[0].clone(), v[k].clone(), v[k + 1].clone()];
        let a2 = (&t[1] - &t[0]).cross(&(&t[2] - &t[0]));
        sum += triangle_integral(p, &t, &a2);
    }
    sum
}
