//! Spline spaces spanned by mollified cell monomials, their numerical
//! dependence and a polynomial-reproducing quasi-interpolant.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{triangulate, Partition, Point2, Polygon};
use crate::linalg::{numerical_rank, solve_exact};
use crate::mollify::{mollify_convolve, mollify_iterated, Kernel, MollifiedBasisFunction, MollifierSpec, Route};
use crate::polynomial::{CompiledPiecewise, PiecewisePoly, Polynomial2};
use crate::rational::{self, frac, int, Rational};

/// Relative singular-value threshold for rank decisions.
pub const RANK_TOL: f64 = 1e-10;

/// Monomial exponents `(j, k)` with `j + k <= n`, by total degree.
pub fn monomial_exponents(n: u32) -> Vec<[u32; 2]> {
    (0..=n).flat_map(|t| (0..=t).rev().map(move |j| [j, t - j])).collect()
}

/// Spline space on a partition.
#[derive(Clone, Debug)]
pub struct SplineSpace {
    pub partition: Partition,
    pub n: u32,
    pub mollifier: MollifierSpec,
    pub positivity: bool,
    pub basis: Vec<MollifiedBasisFunction>,
    /// Numerical rank on the default probe grid.
    pub dependence_rank: usize,
    compiled: Vec<CompiledPiecewise>,
}

/// Origin of the cell monomials: the lower-left bounding-box corner with
/// the positivity flag (so every monomial is nonnegative on the cell), the
/// coordinate origin otherwise.
fn monomial_origin(cell: &Polygon, positivity: bool) -> Point2 {
    if positivity {
        cell.bbox().0.clone()
    } else {
        Point2::zero()
    }
}

fn cell_monomial(jk: [u32; 2], origin: &Point2) -> Polynomial2 {
    Polynomial2::monomial(jk[0], jk[1], Rational::one()).shift(origin)
}

fn mollify_with(f: &PiecewisePoly, m: &MollifierSpec) -> Result<MollifiedBasisFunction> {
    match m {
        MollifierSpec::Iterated { a, b } => mollify_iterated(f, *a, *b),
        MollifierSpec::Box { directions } => mollify_convolve(f, &Kernel::Box(directions.clone()), Route::Auto),
    }
}

/// Builds one basis function per (cell, monomial). Cells that agree up to
/// translation, carrying the same polynomial in local coordinates, are
/// mollified once.
pub fn build_space(partition: &Partition, n: u32, mollifier: &MollifierSpec, positivity: bool) -> Result<SplineSpace> {
    mollifier.validate()?;
    let exps = monomial_exponents(n);
    // (cell, jk) -> shape key and translation
    type Key = (Vec<Point2>, Polynomial2);
    let mut jobs: Vec<(usize, [u32; 2], usize, Point2)> = Vec::new();
    let mut keys: Vec<Key> = Vec::new();
    let mut index: HashMap<Key, usize> = HashMap::new();
    for (ci, cell) in partition.cells.iter().enumerate() {
        let corner = cell.bbox().0.clone();
        let local: Vec<Point2> = cell.vertices().iter().map(|v| v - &corner).collect();
        let origin = monomial_origin(cell, positivity);
        for &jk in &exps {
            // polynomial in coordinates relative to the corner
            let p = cell_monomial(jk, &origin).shift(&-&corner);
            let key = (local.clone(), p);
            let k = *index.entry(key.clone()).or_insert_with(|| {
                keys.push(key);
                keys.len() - 1
            });
            jobs.push((ci, jk, k, corner.clone()));
        }
    }
    let shapes: Vec<MollifiedBasisFunction> = keys
        .par_iter()
        .map(|(verts, p)| {
            let cell = Polygon::new(verts.clone())?;
            mollify_with(&PiecewisePoly::on_polygon(&cell, p), mollifier)
        })
        .collect::<Result<_>>()?;
    let basis: Vec<MollifiedBasisFunction> = jobs
        .par_iter()
        .map(|(ci, jk, k, corner)| {
            let s = &shapes[*k];
            MollifiedBasisFunction {
                cell: *ci,
                jk: *jk,
                rep: s.rep.shift(corner),
                source: s.source.shift(corner),
                degree: s.degree,
                smoothness: s.smoothness,
                support: s.support.translate(corner),
                mollifier: s.mollifier.clone(),
            }
        })
        .collect();
    let compiled = basis.par_iter().map(|b| b.rep.compile()).collect();
    let mut space = SplineSpace {
        partition: partition.clone(),
        n,
        mollifier: mollifier.clone(),
        positivity,
        basis,
        dependence_rank: 0,
        compiled,
    };
    space.dependence_rank = space.dependence_rank_with(&ProbeSpec::default());
    Ok(space)
}

/// Probe grid for rank estimation.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeSpec {
    /// Grid spacing.
    pub step: f64,
    /// Periods `(px, py)`: basis functions are wrapped onto the torus
    /// `[x0, x0 + px) x [y0, y0 + py)` anchored at the domain's lower corner.
    pub periodic: Option<[f64; 2]>,
}

impl Default for ProbeSpec {
    fn default() -> Self {
        ProbeSpec { step: 0.125, periodic: None }
    }
}

impl SplineSpace {
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn compiled(&self) -> &[CompiledPiecewise] {
        &self.compiled
    }

    /// Index of basis function `(cell, jk)`.
    pub fn index_of(&self, cell: usize, jk: [u32; 2]) -> Option<usize> {
        self.basis.iter().position(|b| b.cell == cell && b.jk == jk)
    }

    pub fn eval_basis(&self, i: usize, x: f64, y: f64) -> f64 {
        self.compiled[i].eval(x, y)
    }

    /// `sum_i c_i B_i(x, y)`.
    pub fn eval_combination(&self, coeffs: &[f64], x: f64, y: f64) -> f64 {
        self.compiled
            .iter()
            .zip(coeffs)
            .filter(|(_, c)| **c != 0.0)
            .map(|(b, c)| {
                let (lo, hi) = b.bbox();
                if x < lo[0] || y < lo[1] || x > hi[0] || y > hi[1] {
                    0.0
                } else {
                    c * b.eval(x, y)
                }
            })
            .sum()
    }

    /// Numerical rank of the basis evaluated on a probe grid.
    pub fn dependence_rank_with(&self, probe: &ProbeSpec) -> usize {
        if self.basis.is_empty() {
            return 0;
        }
        let m = self.probe_matrix(probe);
        numerical_rank(&m, RANK_TOL)
    }

    fn probe_matrix(&self, probe: &ProbeSpec) -> DMatrix<f64> {
        let h = probe.step;
        // slightly off-grid so probes avoid rational breaklines
        let jitter = |k: usize| (k as f64 + 0.5) * h + 1e-3 * h;
        let (lo, hi, wrap) = match probe.periodic {
            Some(p) => {
                let l = self.partition.domain.bbox().0.to_f64();
                (l, [l[0] + p[0], l[1] + p[1]], Some(p))
            }
            None => {
                let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
                for b in &self.compiled {
                    let (l, u) = b.bbox();
                    for k in 0..2 {
                        lo[k] = lo[k].min(l[k]);
                        hi[k] = hi[k].max(u[k]);
                    }
                }
                (lo, hi, None)
            }
        };
        let nx = ((hi[0] - lo[0]) / h).floor().max(1.0) as usize;
        let ny = ((hi[1] - lo[1]) / h).floor().max(1.0) as usize;
        let pts: Vec<[f64; 2]> =
            (0..ny).flat_map(|j| (0..nx).map(move |i| [lo[0] + jitter(i), lo[1] + jitter(j)])).collect();
        let cols: Vec<Vec<f64>> = self
            .compiled
            .par_iter()
            .map(|b| {
                let (bl, bh) = b.bbox();
                pts.iter()
                    .map(|p| match wrap {
                        None => b.eval(p[0], p[1]),
                        Some(per) => {
                            let mut s = 0.0;
                            let r = |k: usize, q: f64| {
                                (((bl[k] - q) / per[k]).floor() as i64 - 1, ((bh[k] - q) / per[k]).ceil() as i64 + 1)
                            };
                            let (i0, i1) = r(0, p[0]);
                            let (j0, j1) = r(1, p[1]);
                            for i in i0..=i1 {
                                for j in j0..=j1 {
                                    s += b.eval(p[0] + i as f64 * per[0], p[1] + j as f64 * per[1]);
                                }
                            }
                            s
                        }
                    })
                    .collect()
            })
            .collect();
        DMatrix::from_fn(pts.len(), cols.len(), |r, c| cols[c][r])
    }

    /// Space manifest; `partition_ref` and `basis_refs` name where the
    /// partition and the basis functions are stored.
    pub fn manifest(&self, partition_ref: &str, basis_refs: &[String]) -> serde_json::Value {
        serde_json::json!({
            "partition_ref": partition_ref,
            "n": self.n,
            "mollifier": self.mollifier,
            "positivity": self.positivity,
            "basis": basis_refs,
            "dependence_rank": self.dependence_rank,
        })
    }

    /// Mollifier zonotope.
    pub fn mollifier_support(&self) -> Result<Polygon> {
        self.mollifier.support()
    }

    /// Whether `x - supp(B) lies in the domain`, so that every basis
    /// function overlapping `x` is complete.
    pub fn is_interior(&self, x: [f64; 2]) -> bool {
        let Ok(z) = self.mollifier.support() else {
            return false;
        };
        let dom = &self.partition.domain;
        let Ok(px) = Point2::from_f64(x[0], x[1]) else {
            return false;
        };
        z.vertices().iter().all(|v| dom.contains(&(&px - v)))
            && (dom.is_convex() || {
                // sample the translated zonotope edges for non-convex domains
                let zv = z.vertices();
                (0..zv.len()).all(|i| {
                    let a = &px - &zv[i];
                    let b = &px - &zv[(i + 1) % zv.len()];
                    (1..8).all(|k| dom.contains(&a.lerp(&b, &frac(k, 8))))
                })
            })
    }
}

/// Local sampling functional `sum_k w_k g(p_k)`.
#[derive(Clone, Debug, Serialize)]
pub struct SamplingRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl SamplingRule {
    pub fn apply(&self, g: &dyn Fn(f64, f64) -> f64) -> Result<f64> {
        let mut s = 0.0;
        for (p, w) in self.points.iter().zip(&self.weights) {
            let v = g(p[0], p[1]);
            if !v.is_finite() {
                return Err(Error::NotEvaluable(format!("g({}, {}) = {v}", p[0], p[1])));
            }
            s += w * v;
        }
        Ok(s)
    }
}

/// Coefficient functionals of the quasi-interpolant, one per basis function.
#[derive(Clone, Debug, Serialize)]
pub struct QuasiInterpolant {
    pub rules: Vec<SamplingRule>,
    pub reproduced_degree: u32,
}

impl QuasiInterpolant {
    pub fn coefficients(&self, g: &dyn Fn(f64, f64) -> f64) -> Result<Vec<f64>> {
        self.rules.iter().map(|r| r.apply(g)).collect()
    }
}

/// `q -> int q(x - t) dt` over the unit segment `[0, v]`, on polynomials:
/// `sum_r (-1)^r / (r+1)! (v . grad)^r q`.
fn segment_average(q: &Polynomial2, v: [i64; 2]) -> Polynomial2 {
    let mut out = Polynomial2::zero();
    let mut term = q.clone();
    let mut r: i64 = 0;
    let mut fact = Rational::one();
    while !term.is_zero() {
        fact *= int(r + 1);
        let c = if r % 2 == 0 { Rational::one() } else { -Rational::one() } / &fact;
        out = &out + &term.scale(&c);
        let dx = term.derivative(1, 0).scale(&int(v[0]));
        let dy = term.derivative(0, 1).scale(&int(v[1]));
        term = &dx + &dy;
        r += 1;
    }
    out
}

/// Convolution of a polynomial with the box spline of `dirs`.
pub fn box_convolve_polynomial(q: &Polynomial2, dirs: &[[i64; 2]]) -> Polynomial2 {
    dirs.iter().fold(q.clone(), |acc, d| segment_average(&acc, *d))
}

/// Degree-`n` principal lattice of a triangle shrunk halfway to its centroid.
fn lattice_in(cell: &Polygon, n: u32) -> Vec<Point2> {
    let tris = triangulate(cell);
    let t = tris
        .iter()
        .max_by(|a, b| {
            let ar = |t: &[Point2; 3]| (&t[1] - &t[0]).cross(&(&t[2] - &t[0])).abs();
            ar(a).cmp(&ar(b))
        })
        .expect("cell has a triangle");
    let c = Point2::new((&t[0].x + &t[1].x + &t[2].x) / int(3), (&t[0].y + &t[1].y + &t[2].y) / int(3));
    let half = frac(1, 2);
    let s: Vec<Point2> = t.iter().map(|p| p.lerp(&c, &half)).collect();
    if n == 0 {
        return vec![c];
    }
    let nn = int(n as i64);
    let mut out = Vec::new();
    for i in 0..=n {
        for j in 0..=n - i {
            let a = int(i as i64) / &nn;
            let b = int(j as i64) / &nn;
            out.push(&(&s[0] + &(&s[1] - &s[0]).scale(&a)) + &(&s[2] - &s[0]).scale(&b));
        }
    }
    out
}

/// Local coordinates of `p` in the cell basis `(x - o)^j (y - o)^k`.
fn coords_in(p: &Polynomial2, origin: &Point2, exps: &[[u32; 2]]) -> Vec<Rational> {
    let q = p.shift(&-origin);
    exps.iter().map(|e| q.coefficient(e[0], e[1])).collect()
}

/// Builds the quasi-interpolant: on every cell, `g` is interpolated at a
/// unisolvent lattice, and the cell polynomial is pulled back through the
/// inverse of `q -> B * q` on polynomials of degree `n`.
pub fn quasi_interpolant(space: &SplineSpace) -> Result<QuasiInterpolant> {
    let n = space.n;
    let exps = monomial_exponents(n);
    let dirs = space.mollifier.directions();
    let dim = exps.len();
    let per_cell: Vec<(Vec<[f64; 2]>, Vec<Vec<Rational>>)> = space
        .partition
        .cells
        .par_iter()
        .map(|cell| {
            let origin = monomial_origin(cell, space.positivity);
            let basis: Vec<Polynomial2> = exps.iter().map(|&e| cell_monomial(e, &origin)).collect();
            // T in the cell basis: column e = coordinates of B * basis[e]
            let t_cols: Vec<Vec<Rational>> =
                basis.iter().map(|b| coords_in(&box_convolve_polynomial(b, &dirs), &origin, &exps)).collect();
            let pts = lattice_in(cell, n);
            // V[r][e] = basis[e](pts[r])
            let v: Vec<Vec<Rational>> = pts.iter().map(|p| basis.iter().map(|b| b.eval(p)).collect()).collect();
            // weights W = T^{-1} V^{-1}: column r solves V T a = unit_r
            let vt: Vec<Vec<Rational>> = (0..dim)
                .map(|r| (0..dim).map(|c| (0..dim).map(|k| &v[r][k] * &t_cols[c][k]).sum()).collect())
                .collect();
            let mut w = vec![vec![Rational::zero(); dim]; dim];
            for r in 0..dim {
                let mut unit = vec![Rational::zero(); dim];
                unit[r] = Rational::one();
                let col = solve_exact(vt.clone(), unit)?;
                for (e, val) in col.into_iter().enumerate() {
                    w[e][r] = val;
                }
            }
            Ok((pts.iter().map(|p| p.to_f64()).collect(), w))
        })
        .collect::<Result<_>>()?;
    let rules = space
        .basis
        .iter()
        .map(|b| {
            let (pts, w) = &per_cell[b.cell];
            let e = exps.iter().position(|x| *x == b.jk).expect("basis exponent");
            SamplingRule { points: pts.clone(), weights: w[e].iter().map(rational::to_f64).collect() }
        })
        .collect();
    Ok(QuasiInterpolant { rules, reproduced_degree: n })
}

/// Spline coefficients of the quasi-interpolant of `g`.
pub fn quasi_interpolate(space: &SplineSpace, g: &dyn Fn(f64, f64) -> f64) -> Result<Vec<f64>> {
    quasi_interpolant(space)?.coefficients(g)
}
