//! Exact bivariate polynomials, piecewise polynomials on convex regions and
//! exact integration over triangles and polygons.

mod integrate;
mod piecewise;

pub use integrate::{integrate_over_convex, integrate_over_polygon, integrate_over_triangle};
pub use piecewise::{Combine, CompiledPiecewise, Piece, PiecewisePoly};

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::geometry::Point2;
use crate::rational::{self, int, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

/// Exact polynomial `sum c_ij x^i y^j`; zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial2 {
    terms: BTreeMap<(u32, u32), Rational>,
}

impl Polynomial2 {
    pub fn zero() -> Self {
        Polynomial2::default()
    }

    pub fn one() -> Self {
        Polynomial2::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Polynomial2::monomial(0, 0, c)
    }

    pub fn monomial(i: u32, j: u32, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((i, j), c);
        }
        Polynomial2 { terms }
    }

    pub fn x() -> Self {
        Polynomial2::monomial(1, 0, Rational::one())
    }

    pub fn y() -> Self {
        Polynomial2::monomial(0, 1, Rational::one())
    }

    /// `a*x + b*y + c`.
    pub fn linear(a: Rational, b: Rational, c: Rational) -> Self {
        let mut p = Polynomial2::zero();
        p.add_term(1, 0, a);
        p.add_term(0, 1, b);
        p.add_term(0, 0, c);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = ((u32, u32), Rational)>) -> Self {
        let mut p = Polynomial2::zero();
        for ((i, j), c) in terms {
            p.add_term(i, j, c);
        }
        p
    }

    pub fn add_term(&mut self, i: u32, j: u32, c: Rational) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry((i, j)).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&(i, j));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, i: u32, j: u32) -> Rational {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Maximal `i + j`, or -1 for the zero polynomial.
    pub fn total_degree(&self) -> i32 {
        self.terms.keys().map(|&(i, j)| (i + j) as i32).max().unwrap_or(-1)
    }

    pub fn degree_in(&self, axis: Axis) -> i32 {
        self.terms
            .keys()
            .map(|&(i, j)| match axis {
                Axis::X => i as i32,
                Axis::Y => j as i32,
            })
            .max()
            .unwrap_or(-1)
    }

    /// Horner evaluation in `x` with coefficients that are Horner polynomials in `y`.
    pub fn eval(&self, p: &Point2) -> Rational {
        let dx = self.degree_in(Axis::X);
        if dx < 0 {
            return Rational::zero();
        }
        let mut rows: Vec<Vec<(u32, &Rational)>> = vec![Vec::new(); dx as usize + 1];
        for (&(i, j), c) in &self.terms {
            rows[i as usize].push((j, c));
        }
        let mut acc = Rational::zero();
        for row in rows.iter().rev() {
            let mut inner = Rational::zero();
            let top = row.iter().map(|(j, _)| *j).max().unwrap_or(0);
            let mut k = top as i64;
            let mut it = row.iter().rev().peekable();
            while k >= 0 {
                inner *= &p.y;
                if let Some((j, c)) = it.peek() {
                    if *j as i64 == k {
                        inner += *c;
                        it.next();
                    }
                }
                k -= 1;
            }
            acc = acc * &p.x + inner;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64, y: f64) -> f64 {
        self.terms.iter().map(|(&(i, j), c)| rational::to_f64(c) * x.powi(i as i32) * y.powi(j as i32)).sum()
    }

    pub fn scale(&self, s: &Rational) -> Polynomial2 {
        if s.is_zero() {
            return Polynomial2::zero();
        }
        Polynomial2 { terms: self.terms.iter().map(|(k, c)| (*k, c * s)).collect() }
    }

    pub fn pow(&self, k: u32) -> Polynomial2 {
        let mut out = Polynomial2::one();
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn partial(&self, axis: Axis) -> Polynomial2 {
        let mut out = Polynomial2::zero();
        for (&(i, j), c) in &self.terms {
            match axis {
                Axis::X if i > 0 => out.add_term(i - 1, j, c * int(i as i64)),
                Axis::Y if j > 0 => out.add_term(i, j - 1, c * int(j as i64)),
                _ => {}
            }
        }
        out
    }

    /// Antiderivative along `axis` vanishing on the line `axis = 0`.
    pub fn antiderivative(&self, axis: Axis) -> Polynomial2 {
        let mut out = Polynomial2::zero();
        for (&(i, j), c) in &self.terms {
            match axis {
                Axis::X => out.add_term(i + 1, j, c / int(i as i64 + 1)),
                Axis::Y => out.add_term(i, j + 1, c / int(j as i64 + 1)),
            }
        }
        out
    }

    /// `p(m(x, y))` for an affine map `m`.
    pub fn compose_affine(&self, m: &AffineMap) -> Polynomial2 {
        if self.is_zero() {
            return Polynomial2::zero();
        }
        let xs = powers(&Polynomial2::linear(m.a.clone(), m.b.clone(), m.c.clone()), self.degree_in(Axis::X));
        let ys = powers(&Polynomial2::linear(m.d.clone(), m.e.clone(), m.f.clone()), self.degree_in(Axis::Y));
        let mut out = Polynomial2::zero();
        for (&(i, j), c) in &self.terms {
            let t = &xs[i as usize] * &ys[j as usize];
            for (&(a, b), d) in &t.terms {
                out.add_term(a, b, c * d);
            }
        }
        out
    }

    /// `p(x - v)`.
    pub fn shift(&self, v: &Point2) -> Polynomial2 {
        self.compose_affine(&AffineMap::translation(&(-v)))
    }

    /// Partial derivative of order `(p, q)` evaluated exactly.
    pub fn derivative(&self, p: u32, q: u32) -> Polynomial2 {
        let mut d = self.clone();
        for _ in 0..p {
            d = d.partial(Axis::X);
        }
        for _ in 0..q {
            d = d.partial(Axis::Y);
        }
        d
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("polynomial serializes")
    }
}

fn powers(p: &Polynomial2, k: i32) -> Vec<Polynomial2> {
    let mut out = vec![Polynomial2::one()];
    for _ in 0..k.max(0) {
        let next = out.last().unwrap() * p;
        out.push(next);
    }
    out
}

impl fmt::Debug for Polynomial2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(&(i, j), c)| {
                let mut s = rational::format(c);
                if i > 0 {
                    s.push_str(&if i == 1 { "*x".to_string() } else { format!("*x^{i}") });
                }
                if j > 0 {
                    s.push_str(&if j == 1 { "*y".to_string() } else { format!("*y^{j}") });
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Display for Polynomial2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Add for &Polynomial2 {
    type Output = Polynomial2;
    fn add(self, o: &Polynomial2) -> Polynomial2 {
        let mut out = self.clone();
        for (&(i, j), c) in &o.terms {
            out.add_term(i, j, c.clone());
        }
        out
    }
}

impl Sub for &Polynomial2 {
    type Output = Polynomial2;
    fn sub(self, o: &Polynomial2) -> Polynomial2 {
        let mut out = self.clone();
        for (&(i, j), c) in &o.terms {
            out.add_term(i, j, -c);
        }
        out
    }
}

impl Neg for &Polynomial2 {
    type Output = Polynomial2;
    fn neg(self) -> Polynomial2 {
        Polynomial2 { terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect() }
    }
}

impl Mul for &Polynomial2 {
    type Output = Polynomial2;
    fn mul(self, o: &Polynomial2) -> Polynomial2 {
        let mut out = Polynomial2::zero();
        for (&(i, j), c) in &self.terms {
            for (&(k, l), d) in &o.terms {
                out.add_term(i + k, j + l, c * d);
            }
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    i: u32,
    j: u32,
    #[serde(with = "rational::serde_str")]
    coeff: Rational,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    terms: Vec<TermJson>,
}

impl Serialize for Polynomial2 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PolyJson { terms: self.terms.iter().map(|(&(i, j), c)| TermJson { i, j, coeff: c.clone() }).collect() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial2 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = PolyJson::deserialize(d)?;
        Ok(Polynomial2::from_terms(raw.terms.into_iter().map(|t| ((t.i, t.j), t.coeff))))
    }
}

/// Affine map `(x, y) -> (a x + b y + c, d x + e y + f)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineMap {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub d: Rational,
    pub e: Rational,
    pub f: Rational,
}

impl AffineMap {
    pub fn new(a: Rational, b: Rational, c: Rational, d: Rational, e: Rational, f: Rational) -> Self {
        AffineMap { a, b, c, d, e, f }
    }

    pub fn identity() -> Self {
        AffineMap::translation(&Point2::zero())
    }

    pub fn translation(v: &Point2) -> Self {
        AffineMap::new(Rational::one(), Rational::zero(), v.x.clone(), Rational::zero(), Rational::one(), v.y.clone())
    }

    pub fn apply(&self, p: &Point2) -> Point2 {
        Point2::new(&self.a * &p.x + &self.b * &p.y + &self.c, &self.d * &p.x + &self.e * &p.y + &self.f)
    }

    pub fn det(&self) -> Rational {
        &self.a * &self.e - &self.b * &self.d
    }

    pub fn inverse(&self) -> Option<AffineMap> {
        let det = self.det();
        if det.is_zero() {
            return None;
        }
        let a = &self.e / &det;
        let b = -&self.b / &det;
        let d = -&self.d / &det;
        let e = &self.a / &det;
        let c = -(&a * &self.c + &b * &self.f);
        let f = -(&d * &self.c + &e * &self.f);
        Some(AffineMap::new(a, b, c, d, e, f))
    }
}

/// `n!` as a rational.
pub(crate) fn factorial_q(n: u32) -> Rational {
    Rational::from_integer(rational::factorial(n))
}
