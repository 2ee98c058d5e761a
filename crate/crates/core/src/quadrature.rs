//! Floating-point quadrature: Gauss-Legendre on intervals, collapsed
//! Gauss rules on triangles, and adaptive variants that respect known
//! breakpoints or breaklines.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use crate::error::Result;
use crate::geometry::{arrangement_partition, triangulate, Line, Point2, Polygon};
use crate::rational;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(n.max(1)).expect("positive order");
    GaussLegendre::new(n).as_node_weight_pairs().to_vec()
}

fn gauss_on(rule: &[(f64, f64)], a: f64, b: f64, f: &mut impl FnMut(f64) -> f64) -> f64 {
    let (h, m) = (0.5 * (b - a), 0.5 * (b + a));
    h * rule.iter().map(|&(x, w)| w * f(m + h * x)).sum::<f64>()
}

/// Adaptive integral over `[a, b]`, split first at `breaks`, then bisected
/// until a 10-point and a 20-point Gauss rule agree to `tol`.
pub fn adaptive_1d(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    let lo = gauss_legendre(10);
    let hi = gauss_legendre(20);
    let mut pts: Vec<f64> = breaks.iter().cloned().filter(|&t| t > a && t < b).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut total = 0.0;
    for w in pts.windows(2) {
        let mut stack = vec![(w[0], w[1], 0u32)];
        while let Some((x0, x1, depth)) = stack.pop() {
            let c = gauss_on(&lo, x0, x1, &mut f);
            let r = gauss_on(&hi, x0, x1, &mut f);
            if (c - r).abs() <= tol * (x1 - x0).max(1e-3) || depth > 40 {
                total += r;
            } else {
                let m = 0.5 * (x0 + x1);
                stack.push((x0, m, depth + 1));
                stack.push((m, x1, depth + 1));
            }
        }
    }
    total
}

/// Collapsed Gauss rule on the reference triangle `(0,0), (1,0), (0,1)`:
/// `(xi, eta, weight)` with weights summing to `1/2`. Exact for degree
/// `2n - 2`.
pub fn triangle_rule(n: usize) -> Vec<(f64, f64, f64)> {
    let g = gauss_legendre(n);
    let mut out = Vec::with_capacity(n * n);
    for &(u, wu) in &g {
        let s = 0.5 * (u + 1.0);
        for &(v, wv) in &g {
            let t = 0.5 * (v + 1.0);
            // (s, t) in the unit square -> (s, (1 - s) t)
            out.push((s, (1.0 - s) * t, 0.25 * wu * wv * (1.0 - s)));
        }
    }
    out
}

pub fn integrate_triangle(f: &mut impl FnMut(f64, f64) -> f64, t: &[[f64; 2]; 3], rule: &[(f64, f64, f64)]) -> f64 {
    let (ax, ay) = (t[1][0] - t[0][0], t[1][1] - t[0][1]);
    let (bx, by) = (t[2][0] - t[0][0], t[2][1] - t[0][1]);
    let jac = (ax * by - ay * bx).abs();
    jac * rule.iter().map(|&(s, r, w)| w * f(t[0][0] + s * ax + r * bx, t[0][1] + s * ay + r * by)).sum::<f64>()
}

/// Adaptive integral over a triangle: a degree-`n` and a degree-`2n`
/// collapsed rule are compared and the triangle is split into four until
/// they agree to `tol` (scaled by area).
pub fn adaptive_triangle(f: &mut impl FnMut(f64, f64) -> f64, t: &[[f64; 2]; 3], tol: f64) -> f64 {
    let lo = triangle_rule(6);
    let hi = triangle_rule(12);
    let area = |t: &[[f64; 2]; 3]| {
        0.5 * ((t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[1][1] - t[0][1]) * (t[2][0] - t[0][0])).abs()
    };
    let total_area = area(t).max(1e-300);
    let mut total = 0.0;
    let mut stack = vec![(*t, 0u32)];
    while let Some((tri, depth)) = stack.pop() {
        let c = integrate_triangle(f, &tri, &lo);
        let r = integrate_triangle(f, &tri, &hi);
        if (c - r).abs() <= tol * (area(&tri) / total_area).max(1e-6) || depth > 12 {
            total += r;
        } else {
            let mid = |a: [f64; 2], b: [f64; 2]| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
            let (m01, m12, m20) = (mid(tri[0], tri[1]), mid(tri[1], tri[2]), mid(tri[2], tri[0]));
            stack.push(([tri[0], m01, m20], depth + 1));
            stack.push(([m01, tri[1], m12], depth + 1));
            stack.push(([m20, m12, tri[2]], depth + 1));
            stack.push(([m01, m12, m20], depth + 1));
        }
    }
    total
}

fn tri_f64(t: &[Point2; 3]) -> [[f64; 2]; 3] {
    [t[0].to_f64(), t[1].to_f64(), t[2].to_f64()]
}

/// Adaptive integral over a convex polygon cut by `lines` (known
/// breaklines of the integrand), triangle by triangle.
pub fn adaptive_over_lines(
    mut f: impl FnMut(f64, f64) -> f64,
    domain: &Polygon,
    lines: &[Line],
    tol: f64,
) -> Result<f64> {
    let mut uniq: Vec<Line> = Vec::new();
    for l in lines {
        let n = l.normalized();
        if !uniq.contains(&n) {
            uniq.push(n);
        }
    }
    let part = arrangement_partition(domain, &uniq)?;
    let mut total = 0.0;
    for cell in &part.cells {
        for t in triangulate(cell) {
            total += adaptive_triangle(&mut f, &tri_f64(&t), tol);
        }
    }
    Ok(total)
}

/// Integer lines `x = k`, `y = k`, `x + y = k`, `x - y = k` meeting the box
/// `[x0, x1] x [y0, y1]`.
pub fn criss_cross_lines(x0: i64, y0: i64, x1: i64, y1: i64) -> Vec<Line> {
    let mut out = Vec::new();
    for k in x0 + 1..x1 {
        out.push(Line::int(1, 0, k).expect("nonzero normal"));
    }
    for k in y0 + 1..y1 {
        out.push(Line::int(0, 1, k).expect("nonzero normal"));
    }
    for k in x0 + y0 + 1..x1 + y1 {
        out.push(Line::int(1, 1, k).expect("nonzero normal"));
    }
    for k in x0 - y1 + 1..x1 - y0 {
        out.push(Line::int(1, -1, k).expect("nonzero normal"));
    }
    out
}

/// The box `[x0, x1] x [y0, y1]` as a polygon.
pub fn box_polygon(x0: i64, y0: i64, x1: i64, y1: i64) -> Polygon {
    Polygon::rect(rational::int(x0), rational::int(y0), rational::int(x1), rational::int(y1))
        .expect("nondegenerate box")
}
