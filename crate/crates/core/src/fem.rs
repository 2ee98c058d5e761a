//! Galerkin solver for `-lap u + beta . grad u + gamma u = f` on a square
//! with Dirichlet data, using mollified diamond elements.
//!
//! The partition lives in unit coordinates on `[0, 2n+1]^2`; the physical
//! square `[0, L]^2` is reached by `X = h x` with `h = L / (2n+1)`.

use std::collections::HashMap;
use std::rc::Rc;

use nalgebra::{DMatrix, DVector};
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{minkowski_sum, Partition, Point2, Polygon};
use crate::linalg::min_norm_solve;
use crate::mollify::{mollify_iterated, MollifiedBasisFunction, MollifierSpec};
use crate::polynomial::{Axis, CompiledPiecewise, PiecewisePoly};
use crate::quadrature::triangle_rule;
use crate::rational::{self, Rational};
use crate::splinespace::{build_space, SplineSpace};

pub type Func = Rc<dyn Fn(f64, f64) -> f64>;

/// Relative singular-value threshold of the solver.
pub const SOLVE_RANK_TOL: f64 = 1e-10;
/// Residual bound relative to `|rhs|`.
pub const RESIDUAL_TOL: f64 = 1e-6;

#[derive(Clone)]
pub struct EllipticProblem {
    pub n: usize,
    pub beta: [f64; 2],
    pub gamma: f64,
    /// Side of the physical square; `2n + 1` when absent.
    pub length: Option<f64>,
    pub f: Func,
    pub g: Func,
    pub u_exact: Option<Func>,
}

impl std::fmt::Debug for EllipticProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EllipticProblem")
            .field("n", &self.n)
            .field("beta", &self.beta)
            .field("gamma", &self.gamma)
            .field("length", &self.length)
            .field("u_exact", &self.u_exact.is_some())
            .finish()
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::invalid("n must be at least 1"));
    }
    Ok(())
}

/// Fourth-order central differences.
fn fd_grad(u: &dyn Fn(f64, f64) -> f64, x: f64, y: f64, e: f64) -> [f64; 2] {
    let d = |f: &dyn Fn(f64) -> f64| (f(-2.0) - 8.0 * f(-1.0) + 8.0 * f(1.0) - f(2.0)) / (12.0 * e);
    [d(&|k| u(x + k * e, y)), d(&|k| u(x, y + k * e))]
}

fn fd_laplacian(u: &dyn Fn(f64, f64) -> f64, x: f64, y: f64, e: f64) -> f64 {
    let d2 =
        |f: &dyn Fn(f64) -> f64| (-f(-2.0) + 16.0 * f(-1.0) - 30.0 * f(0.0) + 16.0 * f(1.0) - f(2.0)) / (12.0 * e * e);
    d2(&|k| u(x + k * e, y)) + d2(&|k| u(x, y + k * e))
}

impl EllipticProblem {
    pub fn new(n: usize, beta: [f64; 2], gamma: f64, f: Func, g: Func) -> Result<Self> {
        check_n(n)?;
        Ok(EllipticProblem { n, beta, gamma, length: None, f, g, u_exact: None })
    }

    /// Problem whose solution is `u`: `f` is derived by finite differences
    /// and `g = u`.
    pub fn manufactured(n: usize, beta: [f64; 2], gamma: f64, u: Func) -> Result<Self> {
        check_n(n)?;
        let uf = u.clone();
        let f: Func = Rc::new(move |x, y| {
            let e = 1e-3 * (1.0 + x.abs().max(y.abs()));
            let gr = fd_grad(&*uf, x, y, e);
            -fd_laplacian(&*uf, x, y, e) + beta[0] * gr[0] + beta[1] * gr[1] + gamma * uf(x, y)
        });
        Ok(EllipticProblem { n, beta, gamma, length: None, f, g: u.clone(), u_exact: Some(u) })
    }

    pub fn with_length(mut self, length: f64) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::invalid(format!("domain length must be positive, got {length}")));
        }
        self.length = Some(length);
        Ok(self)
    }

    pub fn with_exact(mut self, u: Func) -> Self {
        self.u_exact = Some(u);
        self
    }

    pub fn side(&self) -> usize {
        2 * self.n + 1
    }

    pub fn length(&self) -> f64 {
        self.length.unwrap_or(self.side() as f64)
    }

    pub fn h(&self) -> f64 {
        self.length() / self.side() as f64
    }

    /// `2n^2 + 6n + 5`.
    pub fn dimension(&self) -> usize {
        2 * self.n * self.n + 6 * self.n + 5
    }
}

/// Diamond centres `(i, j)` with `i + j` even and `-1 <= i, j <= 2n+1`.
pub fn diamond_centers(n: usize) -> Vec<[i64; 2]> {
    let m = 2 * n as i64 + 1;
    (-1..=m).flat_map(|j| (-1..=m).filter(move |i| (i + j) % 2 == 0).map(move |i| [i, j])).collect()
}

fn diamond(c: [i64; 2]) -> Polygon {
    Polygon::from_ints(&[(c[0] + 1, c[1]), (c[0], c[1] + 1), (c[0] - 1, c[1]), (c[0], c[1] - 1)]).expect("unit diamond")
}

/// The enlarged diamond partition: every diamond of the pattern cut by
/// `x + y = odd`, `x - y = odd` whose element meets `[0, 2n+1]^2`.
pub fn diamond_partition(n: usize) -> Result<Partition> {
    check_n(n)?;
    Partition::from_cells(diamond_centers(n).into_iter().map(diamond).collect())
}

/// The element `chi_diamond * chi_[0,1]^2` for the diamond centred at the origin.
pub fn diamond_element() -> MollifiedBasisFunction {
    let f = PiecewisePoly::indicator(&diamond([0, 0]));
    mollify_iterated(&f, -1, -1).expect("diamond element")
}

/// Basis of all diamond elements of the enlarged partition.
pub fn diamond_space(n: usize) -> Result<SplineSpace> {
    build_space(&diamond_partition(n)?, 0, &MollifierSpec::iterated(-1, -1)?, false)
}

/// Domain grown by the mollifier support (Minkowski sum); unchanged for
/// periodic problems.
pub fn enlarge_domain(domain: &Polygon, mollifier: &MollifierSpec, periodic: bool) -> Result<Polygon> {
    mollifier.validate()?;
    let z = mollifier.support()?;
    if z.area().is_zero() {
        return Err(Error::degenerate("mollifier support has no area"));
    }
    if periodic {
        return Ok(domain.clone());
    }
    if !domain.is_convex() {
        return Err(Error::invalid("enlarge_domain needs a convex domain"));
    }
    minkowski_sum(domain, &z)
}

/// Exact integrals of products of two elements whose centres differ by an offset.
#[derive(Clone, Debug)]
pub struct OffsetTables {
    /// `d = c_trial - c_test`.
    pub offsets: Vec<[i64; 2]>,
    /// `int grad B(. - d) . grad B`.
    pub stiffness: Vec<Rational>,
    /// `int d/dx B(. - d) B`.
    pub advection_x: Vec<Rational>,
    /// `int d/dy B(. - d) B`.
    pub advection_y: Vec<Rational>,
    /// `int B(. - d) B`.
    pub mass: Vec<Rational>,
}

impl OffsetTables {
    pub fn compute(element: &PiecewisePoly) -> Self {
        let offsets: Vec<[i64; 2]> = (-2..=2)
            .flat_map(|dy: i64| (-2..=2).filter(move |dx: &i64| (dx + dy) % 2 == 0).map(move |dx| [dx, dy]))
            .collect();
        let bx = element.partial(Axis::X);
        let by = element.partial(Axis::Y);
        let rows: Vec<[Rational; 4]> = offsets
            .par_iter()
            .map(|d| {
                let v = Point2::int(d[0], d[1]);
                let (s, sx, sy) = (element.shift(&v), bx.shift(&v), by.shift(&v));
                let k = sx.mul(&bx).integrate() + sy.mul(&by).integrate();
                [k, sx.mul(element).integrate(), sy.mul(element).integrate(), s.mul(element).integrate()]
            })
            .collect();
        let col = |i: usize| rows.iter().map(|r| r[i].clone()).collect();
        OffsetTables { stiffness: col(0), advection_x: col(1), advection_y: col(2), mass: col(3), offsets }
    }

    pub fn index(&self, d: [i64; 2]) -> Option<usize> {
        self.offsets.iter().position(|o| *o == d)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum RowKind {
    /// Galerkin row tested with the given basis function.
    Galerkin(usize),
    /// Collocation of the boundary data at a node (unit coordinates).
    Boundary([f64; 2]),
}

#[derive(Clone, Debug)]
pub struct DiscreteSystem {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub rows: Vec<RowKind>,
    /// Element centre of every unknown.
    pub centers: Vec<[i64; 2]>,
    pub tables: OffsetTables,
    pub n: usize,
    pub h: f64,
}

impl DiscreteSystem {
    pub fn dimension(&self) -> usize {
        self.centers.len()
    }

    /// Galerkin rows and columns as a square block (test by trial, in the
    /// order of the green set).
    pub fn galerkin_block(&self) -> DMatrix<f64> {
        let green: Vec<usize> = self
            .rows
            .iter()
            .filter_map(|r| match r {
                RowKind::Galerkin(k) => Some(*k),
                _ => None,
            })
            .collect();
        let rows: Vec<usize> =
            self.rows.iter().enumerate().filter(|(_, r)| matches!(r, RowKind::Galerkin(_))).map(|(i, _)| i).collect();
        DMatrix::from_fn(green.len(), green.len(), |r, c| self.matrix[(rows[r], green[c])])
    }
}

/// Element centres: the centroids of the diamond cells.
fn centers_of(space: &SplineSpace) -> Result<Vec<[i64; 2]>> {
    space
        .basis
        .iter()
        .map(|b| {
            let c = space.partition.cells[b.cell].centroid();
            if !c.x.is_integer() || !c.y.is_integer() {
                return Err(Error::Mismatch("cell is not a lattice diamond".into()));
            }
            let conv = |r: &Rational| r.to_integer().try_into().map_err(|_| Error::Mismatch("huge centre".into()));
            Ok([conv(&c.x)?, conv(&c.y)?])
        })
        .collect()
}

fn check_space(problem: &EllipticProblem, space: &SplineSpace) -> Result<Vec<[i64; 2]>> {
    if space.n != 0 || space.mollifier != (MollifierSpec::Iterated { a: -1, b: -1 }) {
        return Err(Error::Mismatch("the model problem needs n = 0 and the unit-square mollifier".into()));
    }
    let centers = centers_of(space)?;
    let mut expected = diamond_centers(problem.n);
    let mut got = centers.clone();
    expected.sort();
    got.sort();
    if expected != got || space.partition.cells.iter().any(|c| c.area() != rational::int(2) || c.len() != 4) {
        return Err(Error::Mismatch(format!("space is not the diamond space for n = {}", problem.n)));
    }
    Ok(centers)
}

/// Offset of the boundary collocation nodes from the integer points, in
/// unit coordinates along the boundary.
pub const BOUNDARY_NODE_OFFSET: f64 = 0.25;

/// `4m` boundary nodes of `[0, m]^2` at arclength `k + 1/4`,
/// counterclockwise from the origin. Integer points would miss the
/// checkerboard combination of elements, which vanishes at every lattice
/// point.
pub fn boundary_nodes(m: i64) -> Vec<[f64; 2]> {
    let (mf, t) = (m as f64, BOUNDARY_NODE_OFFSET);
    let mut out = Vec::with_capacity(4 * m as usize);
    out.extend((0..m).map(|k| [k as f64 + t, 0.0]));
    out.extend((0..m).map(|k| [mf, k as f64 + t]));
    out.extend((0..m).map(|k| [mf - k as f64 - t, mf]));
    out.extend((0..m).map(|k| [0.0, mf - k as f64 - t]));
    out
}

/// The four triangles cut from each unit square of `[x0, x1] x [y0, y1]`
/// by its diagonals; every element is polynomial on each.
fn criss_cross_triangles(x0: i64, y0: i64, x1: i64, y1: i64) -> Vec<[[f64; 2]; 3]> {
    let mut out = Vec::new();
    for j in y0..y1 {
        for i in x0..x1 {
            let (a, b) = (i as f64, j as f64);
            let c = [a + 0.5, b + 0.5];
            let q = [[a, b], [a + 1.0, b], [a + 1.0, b + 1.0], [a, b + 1.0]];
            for k in 0..4 {
                out.push([q[k], q[(k + 1) % 4], c]);
            }
        }
    }
    out
}

/// Element values and gradients by centre offset.
struct ElementEval {
    b: CompiledPiecewise,
    bx: CompiledPiecewise,
    by: CompiledPiecewise,
}

impl ElementEval {
    fn new(e: &PiecewisePoly) -> Self {
        ElementEval { b: e.compile(), bx: e.partial(Axis::X).compile(), by: e.partial(Axis::Y).compile() }
    }

    /// `sum_i c_i (B, B_x, B_y)(x - c_i)`.
    fn combination(&self, centers: &[[i64; 2]], coeffs: &[f64], x: f64, y: f64) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (c, w) in centers.iter().zip(coeffs) {
            let (dx, dy) = (x - c[0] as f64, y - c[1] as f64);
            if !(-1.0..=2.0).contains(&dx) || !(-1.0..=2.0).contains(&dy) || *w == 0.0 {
                continue;
            }
            out[0] += w * self.b.eval(dx, dy);
            out[1] += w * self.bx.eval(dx, dy);
            out[2] += w * self.by.eval(dx, dy);
        }
        out
    }
}

/// Assembles Galerkin rows for the elements supported in the closed domain
/// and boundary collocation rows at the boundary lattice points.
pub fn assemble(problem: &EllipticProblem, space: &SplineSpace) -> Result<DiscreteSystem> {
    let centers = check_space(problem, space)?;
    let element = diamond_element();
    let tables = OffsetTables::compute(&element.rep);
    assemble_with(problem, centers, tables, &element.rep, 6)
}

fn assemble_with(
    problem: &EllipticProblem,
    centers: Vec<[i64; 2]>,
    tables: OffsetTables,
    element: &PiecewisePoly,
    quad_order: usize,
) -> Result<DiscreteSystem> {
    let m = problem.side() as i64;
    let h = problem.h();
    let green: Vec<usize> = (0..centers.len())
        .filter(|&i| {
            let c = centers[i];
            c[0] >= 1 && c[0] + 2 <= m && c[1] >= 1 && c[1] + 2 <= m
        })
        .collect();
    let black = boundary_nodes(m);
    let dim = centers.len();
    if green.len() + black.len() != dim {
        return Err(Error::Mismatch(format!(
            "{} Galerkin rows and {} boundary rows do not square {} unknowns",
            green.len(),
            black.len(),
            dim
        )));
    }
    let coef: Vec<f64> = (0..tables.offsets.len())
        .map(|t| {
            rational::to_f64(&tables.stiffness[t])
                + h * (problem.beta[0] * rational::to_f64(&tables.advection_x[t])
                    + problem.beta[1] * rational::to_f64(&tables.advection_y[t]))
                + h * h * problem.gamma * rational::to_f64(&tables.mass[t])
        })
        .collect();
    let pos: HashMap<[i64; 2], usize> = centers.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let mut a = DMatrix::zeros(dim, dim);
    let mut rhs = DVector::zeros(dim);
    let mut rows = Vec::with_capacity(dim);
    let ev = ElementEval::new(element);
    let rule = triangle_rule(quad_order);
    for (r, &k) in green.iter().enumerate() {
        let ck = centers[k];
        for (t, d) in tables.offsets.iter().enumerate() {
            if let Some(&i) = pos.get(&[ck[0] + d[0], ck[1] + d[1]]) {
                a[(r, i)] = coef[t];
            }
        }
        let mut s = 0.0;
        for tri in criss_cross_triangles(ck[0] - 1, ck[1] - 1, ck[0] + 2, ck[1] + 2) {
            let mut integrand =
                |x: f64, y: f64| (problem.f)(h * x, h * y) * ev.b.eval(x - ck[0] as f64, y - ck[1] as f64);
            s += crate::quadrature::integrate_triangle(&mut integrand, &tri, &rule);
        }
        rhs[r] = h * h * s;
        rows.push(RowKind::Galerkin(k));
    }
    for (q, p) in black.iter().enumerate() {
        let r = green.len() + q;
        for (i, c) in centers.iter().enumerate() {
            let v = ev.b.eval(p[0] - c[0] as f64, p[1] - c[1] as f64);
            if v != 0.0 {
                a[(r, i)] = v;
            }
        }
        rhs[r] = (problem.g)(h * p[0], h * p[1]);
        rows.push(RowKind::Boundary(*p));
    }
    Ok(DiscreteSystem { matrix: a, rhs, rows, centers, tables, n: problem.n, h })
}

#[derive(Clone, Debug, Serialize)]
pub struct Solution {
    pub coefficients: Vec<f64>,
    pub rank: usize,
    /// The matrix was numerically rank-deficient; the coefficients are the
    /// minimum-norm least-squares solution.
    pub rank_deficient: bool,
    pub residual: f64,
}

/// Minimum-norm least-squares solve of `matrix c = rhs`.
pub fn solve_linear(matrix: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<Solution> {
    let (x, rank) = min_norm_solve(matrix, rhs, SOLVE_RANK_TOL);
    let residual = (matrix * &x - rhs).norm();
    let bound = RESIDUAL_TOL * rhs.norm();
    if residual > bound && residual > 1e-300 {
        return Err(Error::NonConvergence { residual, bound });
    }
    Ok(Solution { coefficients: x.iter().cloned().collect(), rank, rank_deficient: rank < matrix.ncols(), residual })
}

pub fn solve(system: &DiscreteSystem) -> Result<Solution> {
    solve_linear(&system.matrix, &system.rhs)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ErrorReport {
    pub l2: f64,
    pub h1: f64,
    pub max: f64,
}

/// Errors against the exact solution on the physical square, by Gauss
/// quadrature of the given order on every criss-cross triangle.
pub fn error_report(
    problem: &EllipticProblem,
    system: &DiscreteSystem,
    coeffs: &[f64],
    order: usize,
) -> Result<ErrorReport> {
    let u = problem.u_exact.as_ref().ok_or_else(|| Error::invalid("error report needs u_exact"))?;
    let element = diamond_element();
    let ev = ElementEval::new(&element.rep);
    let m = problem.side() as i64;
    let h = problem.h();
    let rule = triangle_rule(order);
    let (mut l2, mut h1, mut max) = (0.0f64, 0.0f64, 0.0f64);
    for tri in criss_cross_triangles(0, 0, m, m) {
        let (ax, ay) = (tri[1][0] - tri[0][0], tri[1][1] - tri[0][1]);
        let (bx, by) = (tri[2][0] - tri[0][0], tri[2][1] - tri[0][1]);
        let jac = (ax * by - ay * bx).abs();
        for &(s, r, w) in &rule {
            let x = tri[0][0] + s * ax + r * bx;
            let y = tri[0][1] + s * ay + r * by;
            let [v, vx, vy] = ev.combination(&system.centers, coeffs, x, y);
            let (px, py) = (h * x, h * y);
            let e = u(px, py) - v;
            // small step: collapsed Gauss points lie close to the piece edges
            let gr = fd_grad(&**u, px, py, 1e-5 * h);
            let ex = gr[0] - vx / h;
            let ey = gr[1] - vy / h;
            let wt = w * jac * h * h;
            l2 += wt * e * e;
            h1 += wt * (ex * ex + ey * ey);
            max = max.max(e.abs());
        }
    }
    Ok(ErrorReport { l2: l2.sqrt(), h1: h1.sqrt(), max })
}

/// Value of the computed solution at a physical point.
pub fn solution_value(system: &DiscreteSystem, coeffs: &[f64], px: f64, py: f64) -> f64 {
    let element = diamond_element();
    let ev = ElementEval::new(&element.rep);
    ev.combination(&system.centers, coeffs, px / system.h, py / system.h)[0]
}

/// Samples the computed solution on a `k x k` grid of cell centres of the
/// physical square.
pub fn solution_grid(system: &DiscreteSystem, coeffs: &[f64], length: f64, k: usize) -> Vec<Vec<f64>> {
    let element = diamond_element();
    let ev = ElementEval::new(&element.rep);
    (0..k)
        .map(|j| {
            (0..k)
                .map(|i| {
                    let px = (i as f64 + 0.5) * length / k as f64;
                    let py = (j as f64 + 0.5) * length / k as f64;
                    ev.combination(&system.centers, coeffs, px / system.h, py / system.h)[0]
                })
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub dofs: usize,
    pub h: f64,
    pub l2: f64,
    pub h1: f64,
    pub max: f64,
    pub l2_order: Option<f64>,
    pub h1_order: Option<f64>,
    pub rank_deficient: bool,
}

/// Solves the problems produced by `make` for every `n` and records errors
/// and observed orders between consecutive runs.
pub fn convergence(make: impl Fn(usize) -> Result<EllipticProblem>, ns: &[usize]) -> Result<Vec<ConvergenceRow>> {
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &n in ns {
        let p = make(n)?;
        if p.u_exact.is_none() {
            return Err(Error::invalid("convergence needs u_exact"));
        }
        let space = diamond_space(n)?;
        let sys = assemble(&p, &space)?;
        let sol = solve(&sys)?;
        let e = error_report(&p, &sys, &sol.coefficients, 6)?;
        let (l2_order, h1_order) = match rows.last() {
            Some(prev) => {
                let lh = (prev.h / p.h()).ln();
                (Some((prev.l2 / e.l2).ln() / lh), Some((prev.h1 / e.h1).ln() / lh))
            }
            None => (None, None),
        };
        rows.push(ConvergenceRow {
            n,
            dofs: sys.dimension(),
            h: p.h(),
            l2: e.l2,
            h1: e.h1,
            max: e.max,
            l2_order,
            h1_order,
            rank_deficient: sol.rank_deficient,
        });
    }
    Ok(rows)
}
