use nalgebra::DMatrix;
use polyspline::boxspline::DirectionMatrix;
use polyspline::geometry::{arrangement_partition, minkowski_sum, Line, Partition, Point2, Polygon};
use polyspline::mollify::{smoothness_report, MollifierSpec};
use polyspline::rational;
use polyspline::splinespace::{build_space, quasi_interpolate, ProbeSpec, SplineSpace};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn grid(kx: i64, ky: i64) -> Partition {
    let dom = Polygon::from_ints(&[(0, 0), (kx, 0), (kx, ky), (0, ky)]).unwrap();
    let mut lines: Vec<Line> = (1..kx).map(|i| Line::int(1, 0, i).unwrap()).collect();
    lines.extend((1..ky).map(|j| Line::int(0, 1, j).unwrap()));
    arrangement_partition(&dom, &lines).unwrap()
}

fn hat() -> MollifierSpec {
    MollifierSpec::iterated(-1, -1).unwrap()
}

/// Gram matrix by exact piecewise integration.
fn gram(s: &SplineSpace) -> DMatrix<f64> {
    let n = s.len();
    DMatrix::from_fn(n, n, |i, j| rational::to_f64(&s.basis[i].rep.mul(&s.basis[j].rep).integrate()))
}

#[test]
fn basis_size_counts_cells_and_monomials() {
    for n in 0..=2u32 {
        let s = build_space(&grid(2, 1), n, &hat(), false).unwrap();
        assert_eq!(s.len(), 2 * ((n + 1) * (n + 2) / 2) as usize);
    }
}

#[test]
fn tensor_grid_is_independent() {
    let s = build_space(&grid(3, 3), 0, &MollifierSpec::iterated(0, 0).unwrap(), false).unwrap();
    assert_eq!(s.len(), 9);
    assert!(gram(&s).cholesky().is_some());
    assert_eq!(s.dependence_rank, 9);
}

/// Unit-square cells of an 8 x 8 torus mollified with the diamond
/// `{(1,1),(1,-1)}`: the criss-cross quadratic C1 elements on the full
/// lattice, which satisfy the alternating-sign relation.
#[test]
fn full_lattice_criss_cross_elements_are_dependent_on_a_torus() {
    let e = DirectionMatrix::new(vec![[1, 1], [1, -1]]).unwrap();
    let s = build_space(&grid(8, 8), 0, &MollifierSpec::boxspline(e), false).unwrap();
    let torus = ProbeSpec { step: 0.25, periodic: Some([8.0, 8.0]) };
    let rank = s.dependence_rank_with(&torus);
    assert_eq!(s.len(), 64);
    assert!(rank < 64, "rank {rank}");
    let alternating: Vec<f64> = s
        .basis
        .iter()
        .map(|b| {
            let c = s.partition.cells[b.cell].bbox().0;
            let k = (c.x + c.y).to_integer();
            if k.clone() % 2 == 0.into() {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..100 {
        let (x, y) = (rng.random_range(3.0..5.0), rng.random_range(3.0..5.0));
        assert!(s.eval_combination(&alternating, x, y).abs() < 1e-12);
    }
}

/// The model-problem elements sit on the even sublattice only; on a torus
/// they stay independent.
#[test]
fn diamond_sublattice_is_independent_on_a_torus() {
    let mut cells = Vec::new();
    for j in 0..6 {
        for i in 0..6 {
            if (i + j) % 2 == 0 {
                cells.push(Polygon::from_ints(&[(i - 1, j), (i, j - 1), (i + 1, j), (i, j + 1)]).unwrap());
            }
        }
    }
    let p = Partition::from_cells(cells).unwrap();
    let s = build_space(&p, 0, &hat(), false).unwrap();
    assert_eq!(s.len(), 18);
    let anchor = p.domain.bbox().0.to_f64();
    assert_eq!(anchor, [-1.0, -1.0]);
    let rank = s.dependence_rank_with(&ProbeSpec { step: 0.125, periodic: Some([6.0, 6.0]) });
    assert_eq!(rank, 18);
}

#[test]
fn positivity_flag_gives_nonnegative_functions() {
    let p = arrangement_partition(
        &Polygon::from_ints(&[(0, 0), (2, 0), (2, 2), (0, 2)]).unwrap(),
        &[Line::int(1, 1, 2).unwrap()],
    )
    .unwrap();
    let s = build_space(&p, 1, &hat(), true).unwrap();
    assert_eq!(s.len(), 6);
    let mut rng = StdRng::seed_from_u64(11);
    for i in 0..s.len() {
        let mut min = f64::INFINITY;
        for _ in 0..10_000 {
            let (x, y) = (rng.random_range(-0.5..4.5), rng.random_range(-0.5..4.5));
            min = min.min(s.eval_basis(i, x, y));
        }
        assert!(min >= -1e-12, "basis {i}: {min}");
    }
}

#[test]
fn basis_functions_vanish_outside_their_support() {
    let s = build_space(&grid(2, 2), 1, &MollifierSpec::iterated(0, -1).unwrap(), true).unwrap();
    let z = s.mollifier_support().unwrap();
    let mut rng = StdRng::seed_from_u64(5);
    for b in &s.basis {
        let supp = minkowski_sum(&s.partition.cells[b.cell], &z).unwrap();
        assert_eq!(supp, b.support);
        let mut outside = 0;
        while outside < 100 {
            let p = Point2::new(
                rational::frac(rng.random_range(-40..120), 17),
                rational::frac(rng.random_range(-40..120), 17),
            );
            if supp.contains(&p) {
                continue;
            }
            outside += 1;
            assert_eq!(b.rep.eval(&p), rational::int(0));
        }
    }
}

#[test]
fn every_basis_function_inherits_the_mollifier_smoothness() {
    let p = arrangement_partition(
        &Polygon::from_ints(&[(0, 0), (2, 0), (2, 2), (0, 2)]).unwrap(),
        &[Line::int(1, -1, 0).unwrap()],
    )
    .unwrap();
    let m = MollifierSpec::iterated(0, 0).unwrap();
    let s = build_space(&p, 1, &m, false).unwrap();
    for b in &s.basis {
        let r = smoothness_report(&b.rep, 1);
        assert!(r.continuity_order >= 0, "cell {} jk {:?}: {:?}", b.cell, b.jk, r.max_jump);
        assert!(b.smoothness.0 >= m.smoothness().0 && b.smoothness.1 >= m.smoothness().1);
    }
}

fn interior_samples(s: &SplineSpace, count: usize, seed: u64) -> Vec<[f64; 2]> {
    let (lo, hi) = s.partition.domain.bbox();
    let (lo, hi) = (lo.to_f64(), hi.to_f64());
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let p = [rng.random_range(lo[0]..hi[0]), rng.random_range(lo[1]..hi[1])];
        if s.is_interior(p) {
            out.push(p);
        }
    }
    out
}

#[test]
fn constants_are_reproduced() {
    let s = build_space(&grid(4, 4), 1, &MollifierSpec::iterated(0, -1).unwrap(), false).unwrap();
    let c = quasi_interpolate(&s, &|_, _| 1.0).unwrap();
    for p in interior_samples(&s, 1000, 1) {
        assert!((s.eval_combination(&c, p[0], p[1]) - 1.0).abs() <= 1e-8);
    }
}

#[test]
fn quadratics_are_reproduced() {
    let s = build_space(&grid(4, 4), 2, &hat(), true).unwrap();
    let g = |x: f64, y: f64| x * x + x * y;
    let c = quasi_interpolate(&s, &g).unwrap();
    for p in interior_samples(&s, 300, 2) {
        let v = s.eval_combination(&c, p[0], p[1]);
        assert!((v - g(p[0], p[1])).abs() <= 1e-8, "{p:?}: {v}");
    }
}

#[test]
fn every_monomial_is_reproduced_on_a_split_partition() {
    let p = arrangement_partition(
        &Polygon::from_ints(&[(0, 0), (5, 0), (5, 5), (0, 5)]).unwrap(),
        &[Line::int(1, 1, 5).unwrap(), Line::int(1, -1, 1).unwrap(), Line::int(0, 1, 2).unwrap()],
    )
    .unwrap();
    let s = build_space(&p, 2, &hat(), false).unwrap();
    let pts = interior_samples(&s, 100, 4);
    for (j, k) in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)] {
        let g = move |x: f64, y: f64| x.powi(j) * y.powi(k);
        let c = quasi_interpolate(&s, &g).unwrap();
        for p in &pts {
            assert!((s.eval_combination(&c, p[0], p[1]) - g(p[0], p[1])).abs() <= 1e-8);
        }
    }
}

/// Halving the mesh (by stretching the data) shrinks the interior error by
/// at least `2^(n + 1/2)`.
#[test]
fn quasi_interpolation_error_decreases_under_refinement() {
    let n = 1;
    let err = |scale: f64, k: i64| {
        let s = build_space(&grid(k, k), n, &hat(), false).unwrap();
        let g = move |x: f64, y: f64| (x / scale).sin() * (y / scale).cos();
        let c = quasi_interpolate(&s, &g).unwrap();
        let mut e = 0.0f64;
        for i in 0..=20 {
            for j in 0..=20 {
                let (px, py) = (1.0 + 0.5 * i as f64 / 20.0, 1.0 + 0.5 * j as f64 / 20.0);
                let (x, y) = (scale * px, scale * py);
                assert!(s.is_interior([x, y]));
                e = e.max((s.eval_combination(&c, x, y) - g(x, y)).abs());
            }
        }
        e
    };
    let coarse = err(2.0, 5);
    let fine = err(4.0, 8);
    assert!(coarse / fine >= 2f64.powf(n as f64 + 0.5), "{coarse} {fine}");
}
