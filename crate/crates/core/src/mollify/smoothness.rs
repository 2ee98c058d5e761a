use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::geometry::{orient, Point2};
use crate::polynomial::{PiecewisePoly, Polynomial2};
use crate::rational::{self, Rational};

/// Largest jump of one derivative order across one piece edge.
#[derive(Clone, Debug, Serialize)]
pub struct EdgeJump {
    pub piece: usize,
    pub a: Point2,
    pub b: Point2,
    /// Total derivative order.
    pub order: u32,
    pub max_jump: f64,
    /// Measured on the part of the edge bounding the union of pieces
    /// (against zero).
    pub boundary: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SmoothnessReport {
    /// Highest `r` with all derivatives of order `<= r` continuous across
    /// interior breaklines (`-1` if the function itself jumps).
    pub continuity_order: i32,
    /// Same, also counting the outer boundary of the support.
    pub global_continuity_order: i32,
    pub degree: i32,
    /// All breaklines lie on `x = k`, `y = k` or `x +- y = k` for integers `k`.
    pub criss_cross: bool,
    /// Maximum interior jump per derivative order `0..=max_order`.
    pub max_jump: Vec<f64>,
    pub edges: Vec<EdgeJump>,
}

impl SmoothnessReport {
    /// `S^r_d` of the criss-cross complex.
    pub fn is_criss_cross_element(&self, r: i32, d: i32) -> bool {
        self.criss_cross && self.continuity_order >= r && self.degree <= d
    }
}

pub const JUMP_TOL: f64 = 1e-9;

const SAMPLES: i64 = 20;

fn on_criss_cross_line(a: &Point2, b: &Point2) -> bool {
    let d = b - a;
    let integral = |r: &Rational| r.is_integer();
    if d.x.is_zero() {
        integral(&a.x)
    } else if d.y.is_zero() {
        integral(&a.y)
    } else if d.x == d.y {
        integral(&(&a.x - &a.y))
    } else if d.x == -&d.y {
        integral(&(&a.x + &a.y))
    } else {
        false
    }
}

/// Pieces across the edge `(a, b)` of piece `i` at the point `m`.
fn neighbours(f: &PiecewisePoly, i: usize, a: &Point2, b: &Point2, m: &Point2) -> Vec<usize> {
    f.pieces()
        .iter()
        .enumerate()
        .filter(|(j, pc)| {
            *j != i
                && pc.region.contains(m)
                && pc.region.edges().any(|(p, q)| {
                    orient(a, b, p) == 0 && orient(a, b, q) == 0 && (q - p).dot(&(b - a)) < Rational::zero()
                })
        })
        .map(|(j, _)| j)
        .collect()
}

/// Samples every piece edge at interior points and compares all partial
/// derivatives up to `max_order` with the neighbouring piece (or zero).
pub fn smoothness_report(f: &PiecewisePoly, max_order: u32) -> SmoothnessReport {
    let derivs: Vec<Vec<Vec<Polynomial2>>> = f
        .pieces()
        .iter()
        .map(|pc| (0..=max_order).map(|r| (0..=r).map(|p| pc.poly.derivative(p, r - p)).collect()).collect())
        .collect();
    let zero_derivs: Vec<Vec<Polynomial2>> =
        (0..=max_order).map(|r| vec![Polynomial2::zero(); r as usize + 1]).collect();
    let mut edges = Vec::new();
    let mut criss_cross = true;
    for (i, pc) in f.pieces().iter().enumerate() {
        for (a, b) in pc.region.edges() {
            // per sample kind: [interior, boundary]
            let mut jumps =
                [vec![Rational::zero(); max_order as usize + 1], vec![Rational::zero(); max_order as usize + 1]];
            let mut seen = [false, false];
            for k in 0..SAMPLES {
                let t = Rational::new((2 * k + 1).into(), (2 * SAMPLES).into());
                let m = a.lerp(b, &t);
                let nb = neighbours(f, i, a, b, &m);
                let kind = usize::from(nb.is_empty());
                seen[kind] = true;
                let others: Vec<&Vec<Vec<Polynomial2>>> =
                    if nb.is_empty() { vec![&zero_derivs] } else { nb.iter().map(|&j| &derivs[j]).collect() };
                for o in others {
                    for r in 0..=max_order as usize {
                        for (p, q) in derivs[i][r].iter().zip(&o[r]) {
                            let j = (p.eval(&m) - q.eval(&m)).abs();
                            if j > jumps[kind][r] {
                                jumps[kind][r] = j;
                            }
                        }
                    }
                }
            }
            if seen[0] && !on_criss_cross_line(a, b) {
                criss_cross = false;
            }
            for kind in 0..2 {
                if !seen[kind] {
                    continue;
                }
                for (r, j) in jumps[kind].iter().enumerate() {
                    edges.push(EdgeJump {
                        piece: i,
                        a: a.clone(),
                        b: b.clone(),
                        order: r as u32,
                        max_jump: rational::to_f64(j),
                        boundary: kind == 1,
                    });
                }
            }
        }
    }
    let order_of = |include_boundary: bool| -> i32 {
        let mut ord = -1;
        for r in 0..=max_order {
            let ok = edges
                .iter()
                .filter(|e| e.order == r && (include_boundary || !e.boundary))
                .all(|e| e.max_jump <= JUMP_TOL);
            if !ok {
                break;
            }
            ord = r as i32;
        }
        ord
    };
    let max_jump = (0..=max_order)
        .map(|r| edges.iter().filter(|e| e.order == r && !e.boundary).map(|e| e.max_jump).fold(0.0, f64::max))
        .collect();
    SmoothnessReport {
        continuity_order: order_of(false),
        global_continuity_order: order_of(true),
        degree: f.total_degree(),
        criss_cross,
        max_jump,
        edges,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Polygon;
    use crate::mollify::segment_sweep;

    #[test]
    fn tensor_hat_is_c0() {
        let sq = PiecewisePoly::indicator(&Polygon::from_ints(&[(0, 0), (1, 0), (1, 1), (0, 1)]).unwrap());
        let h = segment_sweep(&segment_sweep(&sq, &Point2::int(1, 0)), &Point2::int(0, 1));
        let r = smoothness_report(&h, 2);
        assert_eq!(r.continuity_order, 0);
        assert_eq!(r.global_continuity_order, 0);
        assert_eq!(r.degree, 2);
        assert!(r.criss_cross);
    }
}
