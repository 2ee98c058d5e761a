use polyspline::boxspline::{
    box_derivative, box_derivative_inner_product, box_eval, box_eval_exact, box_inner_product, box_to_piecewise,
    cone_spline_eval, cone_spline_exact, DirectionMatrix,
};
use polyspline::geometry::{Line, Point2, Polygon};
use polyspline::quadrature::{adaptive_1d, adaptive_over_lines};
use polyspline::rational;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn dm(d: &[[i64; 2]]) -> DirectionMatrix {
    DirectionMatrix::new(d.to_vec()).unwrap()
}

/// Matrices containing a unimodular basis.
fn samples() -> Vec<DirectionMatrix> {
    vec![
        dm(&[[1, 0], [0, 1], [1, 1]]),
        dm(&[[1, 0], [1, 0], [0, 1], [0, 1]]),
        DirectionMatrix::zwart_powell(),
        dm(&[[1, 0], [0, 1], [1, 1], [1, 1]]),
        dm(&[[1, 0], [0, 1], [1, -1], [1, 2]]),
    ]
}

fn lines_of(e: &DirectionMatrix, shift: [i64; 2]) -> Vec<Line> {
    e.knot_lines()
        .into_iter()
        .map(|(n, c)| Line::int(n[0], n[1], c + n[0] * shift[0] + n[1] * shift[1]).unwrap())
        .collect()
}

/// `int f` over the zonotope of `e`, split along the given lines.
fn integrate_over_zonotope(e: &DirectionMatrix, lines: &[Line], f: impl FnMut(f64, f64) -> f64) -> f64 {
    adaptive_over_lines(f, &e.zonotope(), lines, 1e-11).unwrap()
}

fn direction_matrix() -> impl Strategy<Value = DirectionMatrix> {
    let dirs = prop_oneof![Just([1i64, 0]), Just([0, 1]), Just([1, 1]), Just([1, -1]), Just([2, 1]), Just([1, 2])];
    proptest::collection::vec(dirs, 1..4).prop_map(|mut extra| {
        let mut d = vec![[1, 0], [0, 1]];
        d.append(&mut extra);
        DirectionMatrix::new(d).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn nonnegative_and_zero_outside(e in direction_matrix(), x in -2.0f64..6.0, y in -3.0f64..6.0) {
        let v = box_eval(&e, [x, y]);
        prop_assert!(v >= -1e-14);
        let p = Point2::from_f64(x, y).unwrap();
        if !e.zonotope().contains(&p) {
            prop_assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn exact_and_float_evaluation_agree(e in direction_matrix(), i in -10i64..40, j in -20i64..40) {
        let p = Point2::new(rational::frac(i, 7), rational::frac(j, 7));
        let exact = rational::to_f64(&box_eval_exact(&e, &p));
        prop_assert!((exact - box_eval(&e, p.to_f64())).abs() <= 1e-12);
    }

    #[test]
    fn central_symmetry(e in direction_matrix(), dx in -2.0f64..2.0, dy in -2.0f64..2.0) {
        let m = e.centroid().to_f64();
        let a = box_eval(&e, [m[0] + dx, m[1] + dy]);
        let b = box_eval(&e, [m[0] - dx, m[1] - dy]);
        prop_assert!((a - b).abs() <= 1e-12);
        for k in 0..e.len() {
            if e.without(&[k]).is_ok() {
                let da = box_derivative(&e, k, [m[0] + dx, m[1] + dy]).unwrap();
                let db = box_derivative(&e, k, [m[0] - dx, m[1] - dy]).unwrap();
                prop_assert!((da + db).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn piecewise_form_matches_recursion(e in direction_matrix(), i in -10i64..40, j in -20i64..40) {
        let p = Point2::new(rational::frac(2 * i + 1, 14), rational::frac(2 * j + 1, 14));
        prop_assert_eq!(box_to_piecewise(&e).eval(&p), box_eval_exact(&e, &p));
    }
}

#[test]
fn unit_square_base_case() {
    let e = dm(&[[1, 0], [0, 1]]);
    assert_eq!(box_eval(&e, [0.5, 0.5]), 1.0);
    let skew = dm(&[[1, 0], [1, 2]]);
    assert_eq!(box_eval(&skew, [1.0, 0.5]), 0.5);
}

#[test]
fn partition_of_unity() {
    let mut rng = StdRng::seed_from_u64(7);
    for e in samples() {
        let z = e.zonotope();
        let (lo, hi) = z.bbox();
        let (lo, hi) = (lo.to_f64(), hi.to_f64());
        for _ in 0..200 {
            let x = [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
            let mut s = 0.0;
            for j in (lo[1] as i64 - 2)..=(hi[1] as i64 + 2) {
                for i in (lo[0] as i64 - 2)..=(hi[0] as i64 + 2) {
                    s += box_eval(&e, [x[0] + i as f64, x[1] + j as f64]);
                }
            }
            assert!((s - 1.0).abs() <= 1e-10, "{:?}: {s}", e.directions());
        }
    }
}

#[test]
fn unit_integral() {
    for e in samples() {
        let total = integrate_over_zonotope(&e, &lines_of(&e, [0, 0]), |x, y| box_eval(&e, [x, y]));
        assert!((total - 1.0).abs() <= 1e-8, "{:?}: {total}", e.directions());
    }
}

/// `int_0^1 M_{E\v}(x - t v) dt`, split where `x - t v` crosses a knot line
/// of `E\v`.
fn defining_integral(e: &DirectionMatrix, x: [f64; 2]) -> f64 {
    let k = e.len() - 1;
    let rest = e.without(&[k]).unwrap();
    let v = e.directions()[k];
    let mut breaks = Vec::new();
    for (n, c) in rest.knot_lines() {
        let nv = (n[0] * v[0] + n[1] * v[1]) as f64;
        if nv != 0.0 {
            let t = (n[0] as f64 * x[0] + n[1] as f64 * x[1] - c as f64) / nv;
            if t > 0.0 && t < 1.0 {
                breaks.push(t);
            }
        }
    }
    adaptive_1d(|t| box_eval(&rest, [x[0] - t * v[0] as f64, x[1] - t * v[1] as f64]), 0.0, 1.0, &breaks, 1e-13)
}

#[test]
fn recursion_matches_defining_integral() {
    let mut rng = StdRng::seed_from_u64(9);
    for e in samples() {
        let m = e.centroid().to_f64();
        assert!((box_eval(&e, m) - defining_integral(&e, m)).abs() <= 1e-8);
        for _ in 0..50 {
            let x = [m[0] + rng.random_range(-1.5..1.5), m[1] + rng.random_range(-1.5..1.5)];
            assert!((box_eval(&e, x) - defining_integral(&e, x)).abs() <= 1e-8, "{:?} at {x:?}", e.directions());
        }
    }
}

#[test]
fn derivative_matches_finite_differences() {
    let e = dm(&[[1, 0], [1, 0], [0, 1]]);
    let h = 1e-5;
    for x in [[0.3, 0.4], [0.7, 0.2], [1.4, 0.9], [1.8, 0.5]] {
        let fd = (box_eval(&e, [x[0] + h, x[1]]) - box_eval(&e, [x[0] - h, x[1]])) / (2.0 * h);
        assert!((box_derivative(&e, 0, x).unwrap() - fd).abs() <= 1e-6);
    }
    assert_eq!(box_derivative(&e, 0, [9.0, 9.0]).unwrap(), 0.0);
    let zp = DirectionMatrix::zwart_powell();
    let x = [1.3, 0.45];
    let v = [1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()];
    let fd = (box_eval(&zp, [x[0] + h * v[0], x[1] + h * v[1]]) - box_eval(&zp, [x[0] - h * v[0], x[1] - h * v[1]]))
        / (2.0 * h);
    // direction (1,1) has length sqrt 2
    assert!((box_derivative(&zp, 2, x).unwrap() - 2f64.sqrt() * fd).abs() <= 1e-6);
}

/// `int M_E(x) M_F(x + y) dx` by adaptive quadrature over the knot lines of
/// both factors.
fn quad_inner(e: &DirectionMatrix, f: &DirectionMatrix, y: [i64; 2], half: [f64; 2]) -> f64 {
    let y = [y[0] as f64 + half[0], y[1] as f64 + half[1]];
    let mut lines = lines_of(e, [0, 0]);
    // shifted knot lines of F at a half-integer offset
    for (n, c) in f.knot_lines() {
        let off = rational::from_f64(n[0] as f64 * y[0] + n[1] as f64 * y[1]).unwrap();
        lines.push(Line::new(rational::int(n[0]), rational::int(n[1]), rational::int(c) - off).unwrap());
    }
    integrate_over_zonotope(e, &lines, |a, b| box_eval(e, [a, b]) * box_eval(f, [a + y[0], b + y[1]]))
}

#[test]
fn inner_product_theorem_matches_quadrature() {
    let zp = DirectionMatrix::zwart_powell();
    let sq = dm(&[[1, 0], [0, 1]]);
    let triples = [
        (sq.clone(), sq.clone(), [0, 0], [0.0, 0.0]),
        (zp.clone(), zp.clone(), [0, 0], [0.0, 0.0]),
        (dm(&[[1, 0], [0, 1], [1, 1]]), dm(&[[1, 0], [1, 0], [0, 1]]), [0, -1], [0.5, 0.5]),
        (zp.clone(), dm(&[[1, 0], [0, 1], [1, 1]]), [-1, 0], [0.5, 0.0]),
        (dm(&[[1, 0], [0, 1], [1, -1], [1, 2]]), sq.clone(), [-1, 0], [0.5, 0.5]),
    ];
    for (e, f, y, half) in &triples {
        let q = quad_inner(e, f, *y, *half);
        let t = box_inner_product(e, f, [y[0] as f64 + half[0], y[1] as f64 + half[1]]);
        assert!((q - t).abs() <= 1e-8, "{:?} {:?}: {q} vs {t}", e.directions(), f.directions());
    }
    assert_eq!(box_inner_product(&sq, &sq, [0.0, 0.0]), 1.0);
    assert_eq!(box_inner_product(&zp, &zp, [9.0, -7.0]), 0.0);
}

fn quad_derivative_inner(e: &DirectionMatrix, xs: &[usize], f: &DirectionMatrix, ys: &[usize], y: [i64; 2]) -> f64 {
    let d = |m: &DirectionMatrix, set: &[usize], p: [f64; 2]| match set {
        [] => box_eval(m, p),
        [k] => box_derivative(m, *k, p).unwrap(),
        _ => unreachable!(),
    };
    // derivatives of E live on the knot lines of E and of E shifted by the removed direction
    let mut lines = lines_of(e, [0, 0]);
    for (n, c) in f.knot_lines() {
        lines.push(Line::int(n[0], n[1], c - n[0] * y[0] - n[1] * y[1]).unwrap());
    }
    integrate_over_zonotope(e, &lines, |a, b| d(e, xs, [a, b]) * d(f, ys, [a + y[0] as f64, b + y[1] as f64]))
}

#[test]
fn derivative_theorem_matches_quadrature() {
    let tq = dm(&[[1, 0], [1, 0], [1, 0], [0, 1]]);
    let cases: Vec<(DirectionMatrix, Vec<usize>, DirectionMatrix, Vec<usize>, [i64; 2])> = vec![
        (tq.clone(), vec![0], tq.clone(), vec![0], [0, 0]),
        (tq.clone(), vec![0], tq.clone(), vec![], [1, 0]),
        (DirectionMatrix::zwart_powell(), vec![2], DirectionMatrix::courant(), vec![0], [-1, 0]),
        (DirectionMatrix::courant(), vec![], DirectionMatrix::zwart_powell(), vec![3], [0, 1]),
    ];
    for (e, xs, f, ys, y) in &cases {
        let q = quad_derivative_inner(e, xs, f, ys, *y);
        let t = box_derivative_inner_product(e, xs, f, ys, [y[0] as f64, y[1] as f64]).unwrap();
        assert!((q - t).abs() <= 1e-8, "{:?} {xs:?} {:?} {ys:?} {y:?}: {q} vs {t}", e.directions(), f.directions());
        // change of variables swaps the roles
        let s = box_derivative_inner_product(f, ys, e, xs, [-y[0] as f64, -y[1] as f64]).unwrap();
        assert!((s - t).abs() <= 1e-12);
    }
    let zp = DirectionMatrix::zwart_powell();
    let plain = box_inner_product(&zp, &tq, [0.5, -0.5]);
    assert_eq!(box_derivative_inner_product(&zp, &[], &tq, &[], [0.5, -0.5]).unwrap(), plain);
}

/// Normalized B-spline by the Cox-de Boor recursion.
fn cox_de_boor(t: &[f64], x: f64) -> f64 {
    let k = t.len() - 1;
    let mut b: Vec<f64> = (0..k).map(|i| if t[i] <= x && x < t[i + 1] { 1.0 } else { 0.0 }).collect();
    for d in 1..k {
        b = (0..k - d)
            .map(|i| {
                let l = if t[i + d] > t[i] { (x - t[i]) / (t[i + d] - t[i]) * b[i] } else { 0.0 };
                let r = if t[i + d + 1] > t[i + 1] {
                    (t[i + d + 1] - x) / (t[i + d + 1] - t[i + 1]) * b[i + 1]
                } else {
                    0.0
                };
                l + r
            })
            .collect();
    }
    b[0]
}

#[test]
fn lifted_cone_spline_is_a_univariate_b_spline() {
    let knots = [0i64, 1, 3, 4, 7];
    let lifted: Vec<Point2> = knots.iter().map(|&k| Point2::int(k, 1)).collect();
    let t: Vec<f64> = knots.iter().map(|&k| k as f64).collect();
    for s in 0..50 {
        let x = -0.5 + 8.0 * s as f64 / 49.0 + 1e-3;
        let c = cone_spline_eval(&lifted, &Point2::from_f64(x, 1.0).unwrap()).unwrap();
        let b = cox_de_boor(&t, x) / (t[4] - t[0]);
        assert!((c - b).abs() <= 1e-12, "x = {x}: {c} vs {b}");
    }
}

#[test]
fn linear_cone_spline_is_continuous_across_its_rays() {
    let knots = [Point2::int(2, 1), Point2::int(-1, 3), Point2::int(-2, -3)];
    let eps = rational::frac(1, 1_000_000);
    let mut rng = StdRng::seed_from_u64(13);
    for _ in 0..100 {
        let k = &knots[rng.random_range(0..3)];
        let on = k.scale(&rational::frac(rng.random_range(1..200), 37));
        let w = k.perp().scale(&eps);
        let a = rational::to_f64(&cone_spline_exact(&knots, &(&on + &w)).unwrap());
        let b = rational::to_f64(&cone_spline_exact(&knots, &(&on - &w)).unwrap());
        assert!((a - b).abs() <= 1e-4, "{a} {b}");
    }
    // every truncated power vanishes on the far side of all knots
    let lifted: Vec<Point2> = [1, 2, 3].iter().map(|&k| Point2::int(k, 1)).collect();
    assert_eq!(cone_spline_exact(&lifted, &Point2::int(-1, 5)).unwrap(), rational::int(0));
    let collinear = [Point2::int(1, 1), Point2::int(2, 2), Point2::int(1, 0)];
    assert!(cone_spline_exact(&collinear, &Point2::int(1, 3)).is_err());
}

#[test]
fn tensor_piecewise_has_two_pieces_in_x() {
    let e = dm(&[[1, 0], [1, 0], [0, 1]]);
    let p = box_to_piecewise(&e);
    assert_eq!(p.len(), 2);
    let sq = box_to_piecewise(&dm(&[[1, 0], [0, 1]]));
    assert_eq!(sq.len(), 1);
    assert_eq!(sq.pieces()[0].region.to_polygon(), Polygon::from_ints(&[(0, 0), (1, 0), (1, 1), (0, 1)]).unwrap());
    let zp = box_to_piecewise(&DirectionMatrix::zwart_powell());
    let mut rng = StdRng::seed_from_u64(17);
    for _ in 0..1000 {
        let x = [rng.random_range(-0.5..3.5), rng.random_range(-1.5..2.5)];
        let pf = zp.eval(&Point2::from_f64(x[0], x[1]).unwrap());
        assert!((rational::to_f64(&pf) - box_eval(&DirectionMatrix::zwart_powell(), x)).abs() <= 1e-12);
    }
}
