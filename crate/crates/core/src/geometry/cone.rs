use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{orient, perturbed_sign, Point2, Polygon};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Closed convex cone `apex + a*ray1 + b*ray2` (`a, b >= 0`) with a sign.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedCone {
    pub apex: Point2,
    pub ray1: Point2,
    pub ray2: Point2,
    pub sign: i32,
}

impl SignedCone {
    /// Cone coordinates `(a, b)` of `p`.
    pub fn coordinates(&self, p: &Point2) -> (Rational, Rational) {
        let q = p - &self.apex;
        let d = self.ray1.cross(&self.ray2);
        (q.cross(&self.ray2) / &d, self.ray1.cross(&q) / d)
    }

    pub fn contains(&self, p: &Point2) -> bool {
        let (a, b) = self.coordinates(p);
        a >= Rational::zero() && b >= Rational::zero()
    }

    /// Membership of `p` under the fixed infinitesimal perturbation used for
    /// half-open point location.
    pub fn contains_perturbed(&self, p: &Point2) -> bool {
        let q = p - &self.apex;
        let s = rational::int(rational::sign(&self.ray1.cross(&self.ray2)) as i64);
        let a = q.cross(&self.ray2) * &s;
        let na = Point2::new(self.ray2.y.clone(), -&self.ray2.x).scale(&s);
        let b = self.ray1.cross(&q) * &s;
        let nb = Point2::new(-&self.ray1.y, self.ray1.x.clone()).scale(&s);
        perturbed_sign(&a, &na) > 0 && perturbed_sign(&b, &nb) > 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeDecomposition {
    pub cones: Vec<SignedCone>,
}

impl ConeDecomposition {
    /// Signed sum of perturbed cone indicators at `p`.
    pub fn indicator(&self, p: &Point2) -> i32 {
        self.cones.iter().filter(|c| c.contains_perturbed(p)).map(|c| c.sign).sum()
    }

    pub fn signs(&self) -> Vec<i32> {
        self.cones.iter().map(|c| c.sign).collect()
    }
}

/// Signed cone decomposition with sweep lines parallel to `sweep_direction`.
///
/// Every cone opens towards the left normal of the sweep direction. With
/// `None` the first direction `(1, k)`, `k = 0, 1, ...`, not parallel to an
/// edge is used.
pub fn cone_decompose(p: &Polygon, sweep_direction: Option<&Point2>) -> Result<ConeDecomposition> {
    check_nondegenerate(p)?;
    let d = match sweep_direction {
        Some(d) => {
            if d.is_zero() {
                return Err(Error::invalid("zero sweep direction"));
            }
            if p.edges().any(|(a, b)| (b - a).cross(d).is_zero()) {
                return Err(Error::NonGenericDirection(rational::format(&d.x), rational::format(&d.y)));
            }
            d.clone()
        }
        None => auto_sweep(p),
    };
    Ok(decompose(p, &d.perp()))
}

/// Decomposition whose cones all open towards `open_dir` (bounded in the
/// opposite direction). Ties, edges orthogonal to `open_dir`, are broken by
/// tilting `open_dir` infinitesimally towards its left normal.
pub fn cone_decompose_along(p: &Polygon, open_dir: &Point2) -> Result<ConeDecomposition> {
    if open_dir.is_zero() {
        return Err(Error::invalid("zero direction"));
    }
    check_nondegenerate(p)?;
    Ok(decompose(p, open_dir))
}

fn check_nondegenerate(p: &Polygon) -> Result<()> {
    let v = p.vertices();
    let n = v.len();
    for i in 0..n {
        if orient(&v[(i + n - 1) % n], &v[i], &v[(i + 1) % n]) == 0 {
            return Err(Error::degenerate(format!("collinear vertices around {}", v[i])));
        }
    }
    Ok(())
}

fn auto_sweep(p: &Polygon) -> Point2 {
    (0..)
        .map(|k| Point2::int(1, k))
        .find(|d| p.edges().all(|(a, b)| !(b - a).cross(d).is_zero()))
        .expect("a polygon has finitely many edge directions")
}

fn decompose(p: &Polygon, xi: &Point2) -> ConeDecomposition {
    let v = p.vertices();
    let n = v.len();
    let xi_perp = xi.perp();
    let side = |g: &Point2| {
        let s = rational::sign(&g.dot(xi));
        if s != 0 {
            s
        } else {
            rational::sign(&g.dot(&xi_perp))
        }
    };
    let cones = (0..n)
        .map(|i| {
            let apex = v[i].clone();
            let mut sign = if p.is_reflex(i) { -1 } else { 1 };
            let mut rays = [&v[(i + n - 1) % n] - &apex, &v[(i + 1) % n] - &apex];
            for g in rays.iter_mut() {
                if side(g) < 0 {
                    *g = -&*g;
                    sign = -sign;
                }
            }
            let [ray1, ray2] = rays;
            SignedCone { apex, ray1, ray2, sign }
        })
        .collect();
    ConeDecomposition { cones }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    #[test]
    fn convex_quadrilateral_signs() {
        let q = Polygon::from_ints(&[(0, 0), (4, 1), (5, 4), (1, 3)]).unwrap();
        let dec = cone_decompose(&q, Some(&Point2::int(1, 0))).unwrap();
        let mut signs = dec.signs();
        signs.sort();
        assert_eq!(signs, vec![-1, -1, 1, 1]);
        // lowest and highest vertex carry the positive cones
        assert_eq!(dec.cones[0].sign, 1);
        assert_eq!(dec.cones[2].sign, 1);
    }

    #[test]
    fn identity_on_grid() {
        let l = Polygon::from_ints(&[(0, 0), (3, 0), (3, 1), (1, 1), (1, 3), (0, 3)]).unwrap();
        let dec = cone_decompose(&l, None).unwrap();
        for i in -2..9 {
            for j in -2..9 {
                let p = Point2::new(frac(2 * i + 1, 4), frac(2 * j + 1, 4));
                let expect = if l.contains(&p) { 1 } else { 0 };
                assert_eq!(dec.indicator(&p), expect, "{p}");
            }
        }
    }

    #[test]
    fn parallel_edge_rejected() {
        let t = Polygon::from_ints(&[(0, 0), (2, 0), (1, 1)]).unwrap();
        assert!(matches!(cone_decompose(&t, Some(&Point2::int(1, 0))), Err(Error::NonGenericDirection(..))));
        assert!(cone_decompose(&t, Some(&Point2::int(1, 2))).is_ok());
    }

    #[test]
    fn collinear_triple_rejected() {
        let q = Polygon::from_ints(&[(0, 0), (1, 0), (2, 0), (1, 1)]).unwrap();
        assert!(matches!(cone_decompose(&q, None), Err(Error::Degenerate(_))));
    }
}
