//! Bivariate box splines over integer direction matrices and truncated-power
//! cone splines.

use std::collections::HashMap;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{minkowski_sum_points, ConvexPolygon, Point2, Polygon};
use crate::mollify::segment_sweep;
use crate::polynomial::{PiecewisePoly, Polynomial2};
use crate::rational::{self, frac, int, Rational};

/// Ordered multiset of nonzero integer directions spanning the plane.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DirectionMatrix {
    dirs: Vec<[i64; 2]>,
}

impl DirectionMatrix {
    pub fn new(dirs: Vec<[i64; 2]>) -> Result<Self> {
        if dirs.len() < 2 {
            return Err(Error::invalid("a direction matrix needs at least two directions"));
        }
        if dirs.iter().any(|d| d[0] == 0 && d[1] == 0) {
            return Err(Error::invalid("zero direction"));
        }
        if !spans(&dirs) {
            return Err(Error::RankDeficient);
        }
        Ok(DirectionMatrix { dirs })
    }

    pub fn tensor(nx: usize, ny: usize) -> Result<Self> {
        let mut d = vec![[1, 0]; nx];
        d.extend(std::iter::repeat_n([0, 1], ny));
        DirectionMatrix::new(d)
    }

    /// Directions `(1,0), (0,1), (1,1), (1,-1)`.
    pub fn zwart_powell() -> Self {
        DirectionMatrix { dirs: vec![[1, 0], [0, 1], [1, 1], [1, -1]] }
    }

    /// Directions `(1,0), (0,1), (1,1)`.
    pub fn courant() -> Self {
        DirectionMatrix { dirs: vec![[1, 0], [0, 1], [1, 1]] }
    }

    pub fn directions(&self) -> &[[i64; 2]] {
        &self.dirs
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn direction(&self, k: usize) -> Point2 {
        Point2::int(self.dirs[k][0], self.dirs[k][1])
    }

    /// `E` without the directions at `indices` (which must still span).
    pub fn without(&self, indices: &[usize]) -> Result<Self> {
        let dirs: Vec<[i64; 2]> =
            self.dirs.iter().enumerate().filter(|(i, _)| !indices.contains(i)).map(|(_, d)| *d).collect();
        DirectionMatrix::new(dirs)
    }

    /// Multiset union (concatenation).
    pub fn union(&self, o: &DirectionMatrix) -> DirectionMatrix {
        let mut dirs = self.dirs.clone();
        dirs.extend_from_slice(&o.dirs);
        DirectionMatrix { dirs }
    }

    /// `m_E = (v_1 + ... + v_n) / 2`.
    pub fn centroid(&self) -> Point2 {
        let (sx, sy) = self.dirs.iter().fold((0, 0), |(a, b), d| (a + d[0], b + d[1]));
        Point2::new(frac(sx, 2), frac(sy, 2))
    }

    /// The zonotope `E [0,1]^n`.
    pub fn zonotope(&self) -> Polygon {
        let mut pts = vec![Point2::zero()];
        for d in &self.dirs {
            pts = minkowski_sum_points(&pts, &[Point2::zero(), Point2::int(d[0], d[1])]);
        }
        Polygon::new(pts).expect("spanning directions give a zonotope with interior")
    }

    /// Lines carrying the knot lines: for every direction `v`, lines parallel
    /// to `v` through the sums of direction subsets. Returned as
    /// `(normal, offset)` with `normal . x = offset`, normals reduced.
    pub fn knot_lines(&self) -> Vec<([i64; 2], i64)> {
        let n = self.dirs.len();
        let mut sums = Vec::with_capacity(1 << n);
        for mask in 0u32..(1 << n) {
            let mut s = [0i64, 0];
            for (k, d) in self.dirs.iter().enumerate() {
                if mask & (1 << k) != 0 {
                    s[0] += d[0];
                    s[1] += d[1];
                }
            }
            sums.push(s);
        }
        let mut out: Vec<([i64; 2], i64)> = Vec::new();
        for d in &self.dirs {
            let g = d[0].gcd(&d[1]);
            let normal = [-d[1] / g, d[0] / g];
            for s in &sums {
                let c = normal[0] * s[0] + normal[1] * s[1];
                if !out.contains(&(normal, c)) {
                    out.push((normal, c));
                }
            }
        }
        out
    }
}

impl Serialize for DirectionMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.dirs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DirectionMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let dirs = Vec::<[i64; 2]>::deserialize(d)?;
        DirectionMatrix::new(dirs).map_err(serde::de::Error::custom)
    }
}

fn spans(dirs: &[[i64; 2]]) -> bool {
    let first = dirs[0];
    dirs.iter().any(|d| first[0] * d[1] - first[1] * d[0] != 0)
}

/// A box spline with its cached support data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxSpline {
    pub e: DirectionMatrix,
    pub degree: usize,
    pub support: Polygon,
    pub centroid: Point2,
}

impl BoxSpline {
    pub fn new(e: DirectionMatrix) -> Self {
        BoxSpline { degree: e.len() - 2, support: e.zonotope(), centroid: e.centroid(), e }
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        box_eval(&self.e, x)
    }
}

/// Scalars the recursion runs on: exact rationals or floats.
trait Scalar: Clone {
    fn from_i64(v: i64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    /// Sign, with values within rounding tolerance counted as zero.
    fn sign(&self) -> i32;
}

impl Scalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn sign(&self) -> i32 {
        if self.abs() <= 1e-12 {
            0
        } else if *self > 0.0 {
            1
        } else {
            -1
        }
    }
}

impl Scalar for Rational {
    fn from_i64(v: i64) -> Self {
        int(v)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn sign(&self) -> i32 {
        rational::sign(self)
    }
}

const PU: [i64; 2] = [97, 41];
const PW: [i64; 2] = [-41, 97];

struct Recursion<'a, S: Scalar> {
    dirs: &'a [[i64; 2]],
    x: [S; 2],
    memo: HashMap<(u32, i64, i64), S>,
}

impl<S: Scalar> Recursion<'_, S> {
    fn eval(&mut self, mask: u32, off: [i64; 2]) -> S {
        if let Some(v) = self.memo.get(&(mask, off[0], off[1])) {
            return v.clone();
        }
        let v = self.compute(mask, off);
        self.memo.insert((mask, off[0], off[1]), v.clone());
        v
    }

    fn compute(&mut self, mask: u32, off: [i64; 2]) -> S {
        let idx: Vec<usize> = (0..self.dirs.len()).filter(|k| mask & (1 << k) != 0).collect();
        let sub: Vec<[i64; 2]> = idx.iter().map(|&k| self.dirs[k]).collect();
        if !spans(&sub) {
            // lower-dimensional factor: a measure on lines, zero off them
            return S::from_i64(0);
        }
        let p = [self.x[0].sub(&S::from_i64(off[0])), self.x[1].sub(&S::from_i64(off[1]))];
        // bounding box of the zonotope
        let (mut lo, mut hi) = ([0i64; 2], [0i64; 2]);
        for d in &sub {
            for c in 0..2 {
                if d[c] < 0 {
                    lo[c] += d[c];
                } else {
                    hi[c] += d[c];
                }
            }
        }
        for c in 0..2 {
            if p[c].sub(&S::from_i64(lo[c])).sign() < 0 || p[c].sub(&S::from_i64(hi[c])).sign() > 0 {
                return S::from_i64(0);
            }
        }
        if sub.len() == 2 {
            return base_case(&sub[0], &sub[1], &p);
        }
        // minimum-norm coefficients t = E^T (E E^T)^{-1} p
        let (mut g00, mut g01, mut g11) = (0i64, 0i64, 0i64);
        for d in &sub {
            g00 += d[0] * d[0];
            g01 += d[0] * d[1];
            g11 += d[1] * d[1];
        }
        let det = S::from_i64(g00 * g11 - g01 * g01);
        let z0 = S::from_i64(g11).mul(&p[0]).sub(&S::from_i64(g01).mul(&p[1])).div(&det);
        let z1 = S::from_i64(g00).mul(&p[1]).sub(&S::from_i64(g01).mul(&p[0])).div(&det);
        let mut acc = S::from_i64(0);
        for (pos, &k) in idx.iter().enumerate() {
            let d = sub[pos];
            let t = S::from_i64(d[0]).mul(&z0).add(&S::from_i64(d[1]).mul(&z1));
            let m = mask & !(1 << k);
            let a = self.eval(m, off);
            let b = self.eval(m, [off[0] + d[0], off[1] + d[1]]);
            acc = acc.add(&t.mul(&a)).add(&S::from_i64(1).sub(&t).mul(&b));
        }
        acc.div(&S::from_i64(sub.len() as i64 - 2))
    }
}

/// `1/|det|` on the half-open parallelogram `{t a + s b : t, s in [0,1)}`,
/// with boundary points resolved by the fixed perturbation.
fn base_case<S: Scalar>(a: &[i64; 2], b: &[i64; 2], p: &[S; 2]) -> S {
    let det = a[0] * b[1] - a[1] * b[0];
    let sd = S::from_i64(det);
    // t = cross(p, b)/det, s = cross(a, p)/det
    let t = p[0].mul(&S::from_i64(b[1])).sub(&p[1].mul(&S::from_i64(b[0]))).div(&sd);
    let s = S::from_i64(a[0]).mul(&p[1]).sub(&S::from_i64(a[1]).mul(&p[0])).div(&sd);
    let dt = |q: [i64; 2]| (q[0] * b[1] - q[1] * b[0]).signum() * det.signum();
    let ds = |q: [i64; 2]| (a[0] * q[1] - a[1] * q[0]).signum() * det.signum();
    let tie = |f: &dyn Fn([i64; 2]) -> i64| {
        let s = f(PU);
        if s != 0 {
            s
        } else {
            f(PW)
        }
    };
    let one = S::from_i64(1);
    let ge0 = |v: &S, d: i64| {
        let s = v.sign();
        s > 0 || (s == 0 && d > 0)
    };
    let lt1 = |v: &S, d: i64| {
        let s = v.sub(&one).sign();
        s < 0 || (s == 0 && d < 0)
    };
    let (tt, ts) = (tie(&dt), tie(&ds));
    if ge0(&t, tt) && lt1(&t, tt) && ge0(&s, ts) && lt1(&s, ts) {
        S::from_i64(1).div(&S::from_i64(det.abs()))
    } else {
        S::from_i64(0)
    }
}

fn run<S: Scalar>(e: &DirectionMatrix, x: [S; 2]) -> S {
    let mut r = Recursion { dirs: &e.dirs, x, memo: HashMap::new() };
    r.eval((1u32 << e.dirs.len()) - 1, [0, 0])
}

/// `M_E(x)` by the recursion over `E` with minimum-norm coefficients.
/// Points on knot lines take the limit from the fixed perturbation direction.
pub fn box_eval(e: &DirectionMatrix, x: [f64; 2]) -> f64 {
    run(e, x)
}

/// Exact `M_E(x)` for a rational point.
pub fn box_eval_exact(e: &DirectionMatrix, x: &Point2) -> Rational {
    run(e, [x.x.clone(), x.y.clone()])
}

/// `D_{v_k} M_E(x) = M_{E\v_k}(x) - M_{E\v_k}(x - v_k)`.
pub fn box_derivative(e: &DirectionMatrix, k: usize, x: [f64; 2]) -> Result<f64> {
    if k >= e.len() {
        return Err(Error::invalid(format!("direction index {k} out of range")));
    }
    let rest = e.without(&[k])?;
    let v = e.dirs[k];
    Ok(box_eval(&rest, x) - box_eval(&rest, [x[0] - v[0] as f64, x[1] - v[1] as f64]))
}

/// `D_Z M_E(x)` for a set of direction indices `Z`, by iterated differencing.
pub fn box_multi_derivative(e: &DirectionMatrix, z: &[usize], x: [f64; 2]) -> Result<f64> {
    let mut sorted = z.to_vec();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != z.len() || sorted.iter().any(|&k| k >= e.len()) {
        return Err(Error::invalid("derivative indices must be distinct and in range"));
    }
    let rest = e.without(z)?;
    let mut total = 0.0;
    for mask in 0u32..(1 << z.len()) {
        let (mut sx, mut sy) = (0i64, 0i64);
        for (bit, &k) in z.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                sx += e.dirs[k][0];
                sy += e.dirs[k][1];
            }
        }
        let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * box_eval(&rest, [x[0] - sx as f64, x[1] - sy as f64]);
    }
    Ok(total)
}

/// `int M_E(x) M_F(x + y) dx = M_{E u F}(2 m_E + y)`.
pub fn box_inner_product(e: &DirectionMatrix, f: &DirectionMatrix, y: [f64; 2]) -> f64 {
    let m = e.centroid().to_f64();
    box_eval(&e.union(f), [2.0 * m[0] + y[0], 2.0 * m[1] + y[1]])
}

/// `int D_X M_E(x) D_Y M_F(x + y) dx = (-1)^|X| D_{X u Y} M_{E u F}(2 m_E + y)`,
/// with `X` indexing `E` and `Y` indexing `F`.
pub fn box_derivative_inner_product(
    e: &DirectionMatrix,
    x_set: &[usize],
    f: &DirectionMatrix,
    y_set: &[usize],
    y: [f64; 2],
) -> Result<f64> {
    e.without(x_set)?;
    f.without(y_set)?;
    let ef = e.union(f);
    let mut z: Vec<usize> = x_set.to_vec();
    z.extend(y_set.iter().map(|k| k + e.len()));
    let m = e.centroid().to_f64();
    let sign = if x_set.len().is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * box_multi_derivative(&ef, &z, [2.0 * m[0] + y[0], 2.0 * m[1] + y[1]])?)
}

/// Exact piecewise-polynomial form of `M_E`: the normalized indicator of
/// the parallelogram of the first two independent directions, swept along
/// the remaining ones.
pub fn box_to_piecewise(e: &DirectionMatrix) -> PiecewisePoly {
    let dirs = &e.dirs;
    let (i, j) = (0..dirs.len())
        .flat_map(|i| (i + 1..dirs.len()).map(move |j| (i, j)))
        .find(|&(i, j)| dirs[i][0] * dirs[j][1] - dirs[i][1] * dirs[j][0] != 0)
        .expect("direction matrix spans");
    let a = e.direction(i);
    let b = e.direction(j);
    let det = a.cross(&b);
    let region = ConvexPolygon::hull(&[Point2::zero(), a.clone(), &a + &b, b.clone()]).expect("independent directions");
    let mut f = PiecewisePoly::on_region(region, Polynomial2::constant(Rational::one() / det.abs()));
    for (k, _) in dirs.iter().enumerate().filter(|&(k, _)| k != i && k != j) {
        f = segment_sweep(&f, &e.direction(k));
    }
    f
}

fn truncated_power(t: &Rational, n: usize) -> Rational {
    if t.is_negative() {
        return Rational::zero();
    }
    if n == 0 {
        return Rational::one();
    }
    t.pow(n as i32)
}

fn det2(a: &Point2, b: &Point2) -> Rational {
    a.cross(b)
}

/// Cone spline `C(x) = sum_i det(x, k_i)_+^n / prod_{j != i} det(k_j, k_i)`
/// for `n + 2` knot vectors (homogeneous form), with `t_+^n = max(t, 0)^n`
/// and `t_+^0 = 1` for `t >= 0`.
pub fn cone_spline_exact(knots: &[Point2], x: &Point2) -> Result<Rational> {
    if knots.len() < 2 {
        return Err(Error::invalid("cone spline needs at least two knots"));
    }
    let n = knots.len() - 2;
    let mut sum = Rational::zero();
    for (i, ki) in knots.iter().enumerate() {
        let mut denom = Rational::one();
        for (j, kj) in knots.iter().enumerate() {
            if i != j {
                let d = det2(kj, ki);
                if d.is_zero() {
                    return Err(Error::degenerate(format!("knots {kj} and {ki} are collinear with the origin")));
                }
                denom *= d;
            }
        }
        sum += truncated_power(&det2(x, ki), n) / denom;
    }
    Ok(sum)
}

pub fn cone_spline_eval(knots: &[Point2], x: &Point2) -> Result<f64> {
    cone_spline_exact(knots, x).map(|v| rational::to_f64(&v))
}

/// Affine form: determinants of `(x, k_i, apex)` rows with a trailing 1,
/// i.e. the homogeneous form on vectors relative to `apex`.
pub fn cone_spline_affine(apex: &Point2, knots: &[Point2], x: &Point2) -> Result<Rational> {
    let rel: Vec<Point2> = knots.iter().map(|k| k - apex).collect();
    cone_spline_exact(&rel, &(x - apex))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_case_unit_square() {
        let e = DirectionMatrix::tensor(1, 1).unwrap();
        assert_eq!(box_eval(&e, [0.5, 0.5]), 1.0);
        assert_eq!(box_eval(&e, [0.0, 0.0]), 1.0);
        assert_eq!(box_eval(&e, [1.0, 0.5]), 0.0);
        assert_eq!(box_eval_exact(&e, &Point2::int(0, 1)), int(0));
    }

    #[test]
    fn rank_deficient_rejected() {
        assert!(matches!(DirectionMatrix::new(vec![[1, 1], [2, 2]]), Err(Error::RankDeficient)));
        assert!(DirectionMatrix::new(vec![[1, 0]]).is_err());
        let e = DirectionMatrix::tensor(2, 1).unwrap();
        assert!(box_derivative(&e, 2, [0.5, 0.5]).is_err());
    }

    #[test]
    fn outside_support_is_zero() {
        let zp = DirectionMatrix::zwart_powell();
        assert_eq!(box_eval(&zp, [5.0, 5.0]), 0.0);
        assert_eq!(box_eval(&zp, [-0.5, 0.0]), 0.0);
    }

    #[test]
    fn tensor_hat_exact() {
        let e = DirectionMatrix::tensor(2, 2).unwrap();
        assert_eq!(box_eval_exact(&e, &Point2::int(1, 1)), int(1));
        assert_eq!(box_eval_exact(&e, &Point2::new(frac(1, 2), frac(3, 2))), frac(1, 4));
    }

    #[test]
    fn zonotope_and_centroid() {
        let zp = DirectionMatrix::zwart_powell();
        let z = zp.zonotope();
        assert_eq!(z.len(), 8);
        assert_eq!(z.area(), int(7));
        assert_eq!(zp.centroid(), Point2::new(frac(3, 2), frac(1, 2)));
    }

    #[test]
    fn json_round_trip() {
        let zp = DirectionMatrix::zwart_powell();
        let s = serde_json::to_string(&zp).unwrap();
        assert_eq!(s, "[[1,0],[0,1],[1,1],[1,-1]]");
        let back: DirectionMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, zp);
        assert!(serde_json::from_str::<DirectionMatrix>("[[1,0],[2,0]]").is_err());
    }

    #[test]
    fn cone_spline_degree_zero_is_indicator() {
        // two knots: in the upper half-plane the sum is 1/|det| on the cone
        let k = [Point2::int(1, 1), Point2::int(-1, 1)];
        let at = |x, y| cone_spline_exact(&k, &Point2::int(x, y)).unwrap();
        assert_eq!(at(0, 1), frac(1, 2));
        assert_eq!(at(2, 1), int(0));
        assert_eq!(at(-2, 1), int(0));
        assert!(
            cone_spline_exact(&[Point2::int(1, 1), Point2::int(2, 2), Point2::int(0, 1)], &Point2::int(0, 1)).is_err()
        );
    }
}
