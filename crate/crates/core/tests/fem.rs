use std::rc::Rc;

use nalgebra::{DMatrix, DVector};
use polyspline::fem::{
    assemble, diamond_element, diamond_partition, diamond_space, enlarge_domain, error_report, solve, solve_linear,
    EllipticProblem, Func, OffsetTables, RowKind,
};
use polyspline::geometry::{Point2, Polygon};
use polyspline::mollify::{mollify_partials, MollifierSpec};
use polyspline::polynomial::CompiledPiecewise;
use polyspline::quadrature::{adaptive_over_lines, box_polygon, criss_cross_lines};
use polyspline::rational;
use polyspline::splinespace::build_space;
use polyspline::Error;

fn zero() -> Func {
    Rc::new(|_, _| 0.0)
}

fn sine(length: f64) -> Func {
    let k = std::f64::consts::PI / length;
    Rc::new(move |x, y| (k * x).sin() * (k * y).sin())
}

#[test]
fn system_dimensions() {
    for n in 1..=4 {
        let p = EllipticProblem::new(n, [0.0, 0.0], 0.0, zero(), zero()).unwrap();
        let sys = assemble(&p, &diamond_space(n).unwrap()).unwrap();
        assert_eq!(sys.dimension(), 2 * n * n + 6 * n + 5);
        assert_eq!(sys.matrix.shape(), (sys.dimension(), sys.dimension()));
        let galerkin = sys.rows.iter().filter(|r| matches!(r, RowKind::Galerkin(_))).count();
        assert_eq!(galerkin, 2 * n * n - 2 * n + 1);
    }
}

#[test]
fn galerkin_block_is_symmetric_without_advection() {
    let p = EllipticProblem::new(3, [0.0, 0.0], 2.5, zero(), zero()).unwrap();
    let g = assemble(&p, &diamond_space(3).unwrap()).unwrap().galerkin_block();
    assert_eq!(g, g.transpose());
    let min = g.symmetric_eigenvalues().min();
    assert!(min >= -1e-9, "{min}");
    let p = EllipticProblem::new(2, [0.0, 0.0], 0.0, zero(), zero()).unwrap();
    let g = assemble(&p, &diamond_space(2).unwrap()).unwrap().galerkin_block();
    assert_eq!(g, g.transpose());
    assert!(g.symmetric_eigenvalues().min() >= -1e-9);
    let p = EllipticProblem::new(2, [1.0, -0.5], 0.0, zero(), zero()).unwrap();
    let g = assemble(&p, &diamond_space(2).unwrap()).unwrap().galerkin_block();
    assert_ne!(g, g.transpose());
}

/// Integral of `a(x - d) b(x)` by adaptive quadrature over the criss-cross
/// lines of the overlap.
fn quad_product(a: &CompiledPiecewise, b: &CompiledPiecewise, d: [i64; 2]) -> f64 {
    let (x0, y0) = (d[0].max(0) - 1, d[1].max(0) - 1);
    let (x1, y1) = (d[0].min(0) + 2, d[1].min(0) + 2);
    let f = |x: f64, y: f64| a.eval(x - d[0] as f64, y - d[1] as f64) * b.eval(x, y);
    adaptive_over_lines(f, &box_polygon(x0, y0, x1, y1), &criss_cross_lines(x0, y0, x1, y1), 1e-12).unwrap()
}

#[test]
fn exact_tables_match_quadrature() {
    let e = diamond_element();
    let tables = OffsetTables::compute(&e.rep);
    // gradients through the difference formula, not through the pieces
    let (px, py) = mollify_partials(&e).unwrap();
    let (b, bx, by) = (e.rep.compile(), px.compile(), py.compile());
    let mut checked = 0;
    for (t, d) in tables.offsets.iter().enumerate() {
        let k = quad_product(&bx, &bx, *d) + quad_product(&by, &by, *d);
        assert!((k - rational::to_f64(&tables.stiffness[t])).abs() <= 1e-8, "stiffness {d:?}");
        checked += 1;
        if t % 2 == 0 {
            let m = quad_product(&b, &b, *d);
            assert!((m - rational::to_f64(&tables.mass[t])).abs() <= 1e-8, "mass {d:?}");
            checked += 1;
        }
    }
    assert!(checked >= 20);
    let centre = tables.index([0, 0]).unwrap();
    let ax = quad_product(&bx, &b, [1, 1]);
    let i = tables.index([1, 1]).unwrap();
    assert!((ax - rational::to_f64(&tables.advection_x[i])).abs() <= 1e-8);
    // a(B, B) with beta = 0, gamma = 1
    let p = EllipticProblem::new(1, [0.0, 0.0], 1.0, zero(), zero()).unwrap();
    let sys = assemble(&p, &diamond_space(1).unwrap()).unwrap();
    let (row, col) = sys
        .rows
        .iter()
        .enumerate()
        .find_map(|(r, k)| match k {
            RowKind::Galerkin(k) => Some((r, *k)),
            _ => None,
        })
        .unwrap();
    let diag = quad_product(&bx, &bx, [0, 0]) + quad_product(&by, &by, [0, 0]) + quad_product(&b, &b, [0, 0]);
    assert!((sys.matrix[(row, col)] - diag).abs() <= 1e-8);
    assert_eq!(sys.tables.offsets[centre], [0, 0]);
}

/// `u = B(x - c)` for an interior element, with the source computed from
/// the exact second derivatives of its pieces.
fn element_problem(n: usize, c: [i64; 2], beta: [f64; 2], gamma: f64) -> EllipticProblem {
    let e = diamond_element();
    let b = e.rep.compile();
    let (bx, by) = (e.rep.derivative(1, 0).compile(), e.rep.derivative(0, 1).compile());
    let lap = e.rep.derivative(2, 0).add(&e.rep.derivative(0, 2)).compile();
    let (cx, cy) = (c[0] as f64, c[1] as f64);
    let b = Rc::new(b);
    let bu = b.clone();
    let u: Func = Rc::new(move |x, y| bu.eval(x - cx, y - cy));
    let f: Func = Rc::new(move |x, y| {
        let (x, y) = (x - cx, y - cy);
        -lap.eval(x, y) + beta[0] * bx.eval(x, y) + beta[1] * by.eval(x, y) + gamma * b.eval(x, y)
    });
    EllipticProblem::new(n, beta, gamma, f, u.clone()).unwrap().with_exact(u)
}

#[test]
fn single_element_solution_is_recovered() {
    for (n, c) in [(2, [2, 2]), (3, [3, 1])] {
        let p = element_problem(n, c, [1.0, 0.5], 1.0);
        let sys = assemble(&p, &diamond_space(n).unwrap()).unwrap();
        let sol = solve(&sys).unwrap();
        assert!(!sol.rank_deficient);
        for (i, ctr) in sys.centers.iter().enumerate() {
            let want = if *ctr == c { 1.0 } else { 0.0 };
            assert!((sol.coefficients[i] - want).abs() <= 1e-10, "{ctr:?}: {}", sol.coefficients[i]);
        }
        let e = error_report(&p, &sys, &sol.coefficients, 6).unwrap();
        assert!(e.l2 <= 1e-8 && e.h1 <= 1e-8 && e.max <= 1e-8, "{e:?}");
    }
}

#[test]
fn small_system_residual() {
    let p = EllipticProblem::manufactured(1, [1.0, 0.0], 1.0, sine(3.0)).unwrap();
    let sys = assemble(&p, &diamond_space(1).unwrap()).unwrap();
    assert_eq!(sys.dimension(), 13);
    let sol = solve(&sys).unwrap();
    assert_eq!(sol.rank, 13);
    assert!(sol.residual <= 1e-10, "{}", sol.residual);
}

#[test]
fn duplicated_column_takes_the_least_squares_path() {
    let p = EllipticProblem::manufactured(1, [0.0, 0.0], 1.0, sine(3.0)).unwrap();
    let sys = assemble(&p, &diamond_space(1).unwrap()).unwrap();
    let n = sys.dimension();
    let mut a = DMatrix::zeros(n + 1, n + 1);
    a.view_mut((0, 0), (n, n)).copy_from(&sys.matrix);
    for r in 0..n {
        a[(r, n)] = sys.matrix[(r, 0)];
    }
    // one extra equation consistent with the duplicated unknown
    let mut rhs = DVector::zeros(n + 1);
    rhs.rows_mut(0, n).copy_from(&sys.rhs);
    a[(n, 1)] = 1.0;
    rhs[n] = solve(&sys).unwrap().coefficients[1];
    let sol = solve_linear(&a, &rhs).unwrap();
    assert!(sol.rank_deficient);
    assert_eq!(sol.rank, n);
    assert!(sol.residual <= 1e-8);
    // minimum norm splits the duplicated coefficient evenly
    assert!((sol.coefficients[0] - sol.coefficients[n]).abs() <= 1e-8);
}

#[test]
fn inconsistent_system_is_non_convergence() {
    let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
    let rhs = DVector::from_vec(vec![1.0, -1.0]);
    assert!(matches!(solve_linear(&a, &rhs), Err(Error::NonConvergence { .. })));
}

#[test]
fn mismatched_space_is_rejected() {
    let p = EllipticProblem::new(1, [0.0, 0.0], 0.0, zero(), zero()).unwrap();
    assert!(matches!(assemble(&p, &diamond_space(2).unwrap()), Err(Error::Mismatch(_))));
    let other =
        build_space(&diamond_partition(1).unwrap(), 0, &MollifierSpec::iterated(0, -1).unwrap(), false).unwrap();
    assert!(matches!(assemble(&p, &other), Err(Error::Mismatch(_))));
    let linear =
        build_space(&diamond_partition(1).unwrap(), 1, &MollifierSpec::iterated(-1, -1).unwrap(), false).unwrap();
    assert!(matches!(assemble(&p, &linear), Err(Error::Mismatch(_))));
    assert!(EllipticProblem::new(0, [0.0, 0.0], 0.0, zero(), zero()).is_err());
}

#[test]
fn quadrature_orders_agree() {
    let p = EllipticProblem::manufactured(2, [1.0, 0.0], 1.0, sine(1.0)).unwrap().with_length(1.0).unwrap();
    let sys = assemble(&p, &diamond_space(2).unwrap()).unwrap();
    let sol = solve(&sys).unwrap();
    let lo = error_report(&p, &sys, &sol.coefficients, 4).unwrap();
    let hi = error_report(&p, &sys, &sol.coefficients, 8).unwrap();
    assert!(((lo.l2 - hi.l2) / hi.l2).abs() < 5e-4, "{lo:?} {hi:?}");
    assert!(lo.l2.is_finite() && lo.h1.is_finite() && lo.max.is_finite());
}

/// The scaled sine errors on `[0, 2n+1]^2` for growing `n`. The even
/// sublattice span misses linear functions, so the errors stall.
#[test]
#[ignore = "the diamond span has approximation order 1; errors do not decrease from n = 1 to 2"]
fn sine_errors_decrease() {
    let mut prev = f64::INFINITY;
    for n in 1..=3 {
        let p = EllipticProblem::manufactured(n, [0.0, 0.0], 0.0, sine((2 * n + 1) as f64)).unwrap();
        let sys = assemble(&p, &diamond_space(n).unwrap()).unwrap();
        let sol = solve(&sys).unwrap();
        let e = error_report(&p, &sys, &sol.coefficients, 6).unwrap();
        assert!(e.max < prev, "n = {n}: {e:?}");
        prev = e.max;
    }
}

#[test]
fn enlarged_domains() {
    let sq = Polygon::from_ints(&[(0, 0), (3, 0), (3, 3), (0, 3)]).unwrap();
    let hat = MollifierSpec::iterated(-1, -1).unwrap();
    assert_eq!(
        enlarge_domain(&sq, &hat, false).unwrap(),
        Polygon::from_ints(&[(0, 0), (4, 0), (4, 4), (0, 4)]).unwrap()
    );
    assert_eq!(enlarge_domain(&sq, &hat, true).unwrap(), sq);
    let bi = MollifierSpec::iterated(0, 0).unwrap();
    let big = enlarge_domain(&sq, &bi, false).unwrap();
    assert!(big.contains(&Point2::int(5, 5)) && !big.contains(&Point2::int(-1, 0)));
}
