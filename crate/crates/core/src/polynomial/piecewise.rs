use std::collections::HashMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{integrate_over_convex, AffineMap, Axis, Polynomial2};
use crate::geometry::{convex_hull, convex_parts, perturb_u, perturb_w, ConvexPolygon, Point2, Polygon};
use crate::rational::{self, Rational};

/// One polynomial piece on a bounded convex region.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub region: ConvexPolygon,
    pub poly: Polynomial2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Combine {
    Add,
    Sub,
    Mul,
}

/// Piecewise polynomial on convex pieces with pairwise disjoint interiors,
/// zero outside their union.
///
/// Pieces are half-open: a point on a breakline belongs to the piece that
/// contains it after an infinitesimal shift along a fixed generic direction,
/// so point evaluation is single-valued.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PiecewisePoly {
    pieces: Vec<Piece>,
    /// The function continues beyond the stored pieces (results of ray
    /// integrals cut at a horizon).
    unbounded: bool,
}

impl PiecewisePoly {
    pub fn new(pieces: Vec<Piece>) -> Self {
        PiecewisePoly { pieces, unbounded: false }
    }

    pub fn zero() -> Self {
        PiecewisePoly::default()
    }

    pub fn on_region(region: ConvexPolygon, poly: Polynomial2) -> Self {
        PiecewisePoly::new(vec![Piece { region, poly }])
    }

    /// `poly` times the indicator of a simple polygon (split into convex parts).
    pub fn on_polygon(p: &Polygon, poly: &Polynomial2) -> Self {
        PiecewisePoly::new(convex_parts(p).into_iter().map(|region| Piece { region, poly: poly.clone() }).collect())
    }

    pub fn indicator(p: &Polygon) -> Self {
        PiecewisePoly::on_polygon(p, &Polynomial2::one())
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn into_pieces(self) -> Vec<Piece> {
        self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn is_unbounded(&self) -> bool {
        self.unbounded
    }

    pub(crate) fn with_unbounded(mut self, flag: bool) -> Self {
        self.unbounded = flag;
        self
    }

    /// Exact value with the half-open breakline convention.
    pub fn eval(&self, p: &Point2) -> Rational {
        self.pieces.iter().filter(|pc| pc.region.contains_perturbed(p)).map(|pc| pc.poly.eval(p)).sum()
    }

    /// Index of the piece owning `p`, if any.
    pub fn locate(&self, p: &Point2) -> Option<usize> {
        self.pieces.iter().position(|pc| pc.region.contains_perturbed(p))
    }

    pub fn total_degree(&self) -> i32 {
        self.pieces.iter().map(|p| p.poly.total_degree()).max().unwrap_or(-1)
    }

    pub fn combine(&self, other: &PiecewisePoly, op: Combine) -> PiecewisePoly {
        let apply = |p: Option<&Polynomial2>, q: Option<&Polynomial2>| -> Polynomial2 {
            let zero = Polynomial2::zero();
            let (p, q) = (p.unwrap_or(&zero), q.unwrap_or(&zero));
            match op {
                Combine::Add => p + q,
                Combine::Sub => p - q,
                Combine::Mul => p * q,
            }
        };
        let mut out = Vec::new();
        for a in &self.pieces {
            let mut rest = vec![a.region.clone()];
            for b in &other.pieces {
                if !a.region.bbox_overlaps(&b.region) {
                    continue;
                }
                if let Some(r) = a.region.intersect(&b.region) {
                    out.push(Piece { region: r, poly: apply(Some(&a.poly), Some(&b.poly)) });
                }
                if op != Combine::Mul {
                    rest = rest.iter().flat_map(|r| r.difference(&b.region)).collect();
                }
            }
            if op != Combine::Mul {
                let poly = apply(Some(&a.poly), None);
                out.extend(rest.into_iter().map(|region| Piece { region, poly: poly.clone() }));
            }
        }
        if op != Combine::Mul {
            for b in &other.pieces {
                let mut rest = vec![b.region.clone()];
                for a in &self.pieces {
                    if a.region.bbox_overlaps(&b.region) {
                        rest = rest.iter().flat_map(|r| r.difference(&a.region)).collect();
                    }
                }
                let poly = apply(None, Some(&b.poly));
                out.extend(rest.into_iter().map(|region| Piece { region, poly: poly.clone() }));
            }
        }
        let mut res = PiecewisePoly { pieces: out, unbounded: self.unbounded || other.unbounded };
        res.prune_and_merge();
        res
    }

    pub fn add(&self, other: &PiecewisePoly) -> PiecewisePoly {
        self.combine(other, Combine::Add)
    }

    pub fn sub(&self, other: &PiecewisePoly) -> PiecewisePoly {
        self.combine(other, Combine::Sub)
    }

    pub fn mul(&self, other: &PiecewisePoly) -> PiecewisePoly {
        self.combine(other, Combine::Mul)
    }

    /// Sum of many functions, combined pairwise to keep overlays small.
    pub fn sum_all(mut items: Vec<PiecewisePoly>) -> PiecewisePoly {
        if items.is_empty() {
            return PiecewisePoly::zero();
        }
        while items.len() > 1 {
            let mut next = Vec::with_capacity(items.len().div_ceil(2));
            let mut it = items.into_iter();
            while let Some(a) = it.next() {
                match it.next() {
                    Some(b) => next.push(a.add(&b)),
                    None => next.push(a),
                }
            }
            items = next;
        }
        items.pop().unwrap()
    }

    pub fn scale(&self, s: &Rational) -> PiecewisePoly {
        let mut out = self.map_polys(|p| p.scale(s));
        out.prune_and_merge();
        out
    }

    pub fn neg(&self) -> PiecewisePoly {
        self.map_polys(|p| -p)
    }

    pub fn map_polys(&self, f: impl Fn(&Polynomial2) -> Polynomial2) -> PiecewisePoly {
        PiecewisePoly {
            pieces: self.pieces.iter().map(|p| Piece { region: p.region.clone(), poly: f(&p.poly) }).collect(),
            unbounded: self.unbounded,
        }
    }

    /// `x -> f(x - v)`.
    pub fn shift(&self, v: &Point2) -> PiecewisePoly {
        PiecewisePoly {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece { region: p.region.translate(v), poly: p.poly.shift(v) })
                .collect(),
            unbounded: self.unbounded,
        }
    }

    /// `x -> f(m(x))` for an invertible affine map `m`.
    pub fn compose_affine(&self, m: &AffineMap) -> Option<PiecewisePoly> {
        let inv = m.inverse()?;
        let pieces = self
            .pieces
            .iter()
            .map(|p| Some(Piece { region: p.region.map(|v| inv.apply(v))?, poly: p.poly.compose_affine(m) }))
            .collect::<Option<Vec<_>>>()?;
        Some(PiecewisePoly { pieces, unbounded: self.unbounded })
    }

    /// Pointwise restriction to a convex region.
    pub fn clip(&self, c: &ConvexPolygon) -> PiecewisePoly {
        PiecewisePoly {
            pieces: self
                .pieces
                .iter()
                .filter_map(|p| Some(Piece { region: p.region.intersect(c)?, poly: p.poly.clone() }))
                .collect(),
            unbounded: false,
        }
    }

    /// Piecewise classical derivative (jumps across breaklines are ignored).
    pub fn partial(&self, axis: Axis) -> PiecewisePoly {
        let mut out = self.map_polys(|p| p.partial(axis));
        out.prune_and_merge();
        out
    }

    pub fn derivative(&self, p: u32, q: u32) -> PiecewisePoly {
        let mut out = self.map_polys(|f| f.derivative(p, q));
        out.prune_and_merge();
        out
    }

    pub fn integrate(&self) -> Rational {
        self.pieces.iter().map(|p| integrate_over_convex(&p.poly, &p.region)).sum()
    }

    /// Convex hull of the union of the pieces.
    pub fn support_hull(&self) -> Option<ConvexPolygon> {
        let pts: Vec<Point2> = self.pieces.iter().flat_map(|p| p.region.vertices().iter().cloned()).collect();
        ConvexPolygon::hull(&convex_hull(&pts))
    }

    /// Drops zero pieces and fuses neighbours with equal polynomials whose
    /// union is convex.
    pub fn prune_and_merge(&mut self) {
        let mut groups: HashMap<Polynomial2, Vec<ConvexPolygon>> = HashMap::new();
        let mut order: Vec<Polynomial2> = Vec::new();
        for p in self.pieces.drain(..) {
            if p.poly.is_zero() {
                continue;
            }
            let e = groups.entry(p.poly.clone()).or_default();
            if e.is_empty() {
                order.push(p.poly.clone());
            }
            e.push(p.region);
        }
        for poly in order {
            let regions = merge_regions(groups.remove(&poly).unwrap());
            self.pieces.extend(regions.into_iter().map(|region| Piece { region, poly: poly.clone() }));
        }
    }

    pub fn compile(&self) -> CompiledPiecewise {
        CompiledPiecewise::new(self)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(
            self.pieces
                .iter()
                .map(|p| PieceJson { region: p.region.vertices().to_vec(), poly: p.poly.clone() })
                .collect::<Vec<_>>(),
        )
        .expect("piecewise polynomial serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> crate::Result<PiecewisePoly> {
        let raw: Vec<PieceJson> =
            serde_json::from_value(v.clone()).map_err(|e| crate::Error::invalid(format!("piecewise JSON: {e}")))?;
        let pieces = raw
            .into_iter()
            .map(|p| {
                let region = ConvexPolygon::hull(&p.region)
                    .ok_or_else(|| crate::Error::invalid("piece region has no interior"))?;
                Ok(Piece { region, poly: p.poly })
            })
            .collect::<crate::Result<Vec<_>>>()?;
        Ok(PiecewisePoly::new(pieces))
    }
}

#[derive(Serialize, Deserialize)]
struct PieceJson {
    region: Vec<Point2>,
    poly: Polynomial2,
}

fn touches(a: &ConvexPolygon, b: &ConvexPolygon) -> bool {
    let (alo, ahi) = a.bbox();
    let (blo, bhi) = b.bbox();
    alo.x <= bhi.x && blo.x <= ahi.x && alo.y <= bhi.y && blo.y <= ahi.y
}

fn merge_regions(mut regions: Vec<ConvexPolygon>) -> Vec<ConvexPolygon> {
    let mut changed = true;
    while changed {
        changed = false;
        let mut i = 0;
        while i < regions.len() {
            let mut j = i + 1;
            while j < regions.len() {
                if touches(&regions[i], &regions[j]) {
                    let mut pts = regions[i].vertices().to_vec();
                    pts.extend_from_slice(regions[j].vertices());
                    if let Some(h) = ConvexPolygon::hull(&pts) {
                        if h.area() == regions[i].area() + regions[j].area() {
                            regions[i] = h;
                            regions.swap_remove(j);
                            changed = true;
                            continue;
                        }
                    }
                }
                j += 1;
            }
            i += 1;
        }
    }
    regions
}

#[derive(Clone, Debug)]
struct CompiledPiece {
    lo: [f64; 2],
    hi: [f64; 2],
    /// Edge half-planes `n.x + c >= 0` with unit normals.
    edges: Vec<[f64; 3]>,
    /// Perturbation tie-break sign of each edge.
    tie: Vec<bool>,
    /// Coefficients in powers of `x - lo`.
    terms: Vec<(i32, i32, f64)>,
    degree: i32,
}

/// Floating-point evaluator of a piecewise polynomial with a bucket grid.
#[derive(Clone, Debug)]
pub struct CompiledPiecewise {
    pieces: Vec<CompiledPiece>,
    lo: [f64; 2],
    cell: [f64; 2],
    grid: usize,
    buckets: Vec<Vec<usize>>,
}

const EDGE_TOL: f64 = 1e-12;

impl CompiledPiecewise {
    fn new(f: &PiecewisePoly) -> Self {
        let u = perturb_u();
        let w = perturb_w();
        let pieces: Vec<CompiledPiece> = f
            .pieces
            .iter()
            .map(|p| {
                let (lo, hi) = p.region.bbox();
                let v = p.region.vertices();
                let n = v.len();
                let mut edges = Vec::with_capacity(n);
                let mut tie = Vec::with_capacity(n);
                for i in 0..n {
                    let e = &v[(i + 1) % n] - &v[i];
                    let normal = e.perp();
                    let s = rational::sign(&normal.dot(&u));
                    tie.push(if s != 0 { s > 0 } else { rational::sign(&normal.dot(&w)) > 0 });
                    let [nx, ny] = normal.to_f64();
                    let [vx, vy] = v[i].to_f64();
                    let len = (nx * nx + ny * ny).sqrt();
                    edges.push([nx / len, ny / len, -(nx * vx + ny * vy) / len]);
                }
                CompiledPiece {
                    lo: lo.to_f64(),
                    hi: hi.to_f64(),
                    edges,
                    tie,
                    terms: p
                        .poly
                        .shift(&-lo)
                        .terms()
                        .map(|(&(i, j), c)| (i as i32, j as i32, rational::to_f64(c)))
                        .collect(),
                    degree: p.poly.total_degree(),
                }
            })
            .collect();
        let (mut glo, mut ghi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in &pieces {
            for k in 0..2 {
                glo[k] = glo[k].min(p.lo[k]);
                ghi[k] = ghi[k].max(p.hi[k]);
            }
        }
        let grid = if pieces.is_empty() { 1 } else { ((pieces.len() as f64).sqrt().ceil() as usize).clamp(1, 64) };
        let cell = if pieces.is_empty() {
            [1.0, 1.0]
        } else {
            [((ghi[0] - glo[0]) / grid as f64).max(1e-300), ((ghi[1] - glo[1]) / grid as f64).max(1e-300)]
        };
        let mut buckets = vec![Vec::new(); grid * grid];
        for (k, p) in pieces.iter().enumerate() {
            let (i0, j0) = bucket_of(p.lo, glo, cell, grid);
            let (i1, j1) = bucket_of(p.hi, glo, cell, grid);
            for i in i0..=i1 {
                for j in j0..=j1 {
                    buckets[j * grid + i].push(k);
                }
            }
        }
        CompiledPiecewise { pieces, lo: glo, cell, grid, buckets }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self.locate(x, y) {
            Some(k) => eval_terms(&self.pieces[k], x, y),
            None => 0.0,
        }
    }

    pub fn locate(&self, x: f64, y: f64) -> Option<usize> {
        if self.pieces.is_empty() {
            return None;
        }
        let tol = 1e-9;
        if x < self.lo[0] - tol
            || y < self.lo[1] - tol
            || x > self.lo[0] + self.cell[0] * self.grid as f64 + tol
            || y > self.lo[1] + self.cell[1] * self.grid as f64 + tol
        {
            return None;
        }
        let (i, j) = bucket_of([x, y], self.lo, self.cell, self.grid);
        self.buckets[j * self.grid + i].iter().copied().find(|&k| inside(&self.pieces[k], x, y))
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Bounding box `[lo, hi]` of all pieces.
    pub fn bbox(&self) -> ([f64; 2], [f64; 2]) {
        let hi = [self.lo[0] + self.cell[0] * self.grid as f64, self.lo[1] + self.cell[1] * self.grid as f64];
        (self.lo, hi)
    }

    pub fn max_degree(&self) -> i32 {
        self.pieces.iter().map(|p| p.degree).max().unwrap_or(-1)
    }
}

fn bucket_of(p: [f64; 2], lo: [f64; 2], cell: [f64; 2], grid: usize) -> (usize, usize) {
    let f = |k: usize| (((p[k] - lo[k]) / cell[k]).floor().max(0.0) as usize).min(grid - 1);
    (f(0), f(1))
}

fn inside(p: &CompiledPiece, x: f64, y: f64) -> bool {
    if x < p.lo[0] - EDGE_TOL || x > p.hi[0] + EDGE_TOL || y < p.lo[1] - EDGE_TOL || y > p.hi[1] + EDGE_TOL {
        return false;
    }
    p.edges.iter().zip(&p.tie).all(|(e, &t)| {
        let v = e[0] * x + e[1] * y + e[2];
        if v > EDGE_TOL {
            true
        } else if v < -EDGE_TOL {
            false
        } else {
            t
        }
    })
}

fn eval_terms(p: &CompiledPiece, x: f64, y: f64) -> f64 {
    let (x, y) = (x - p.lo[0], y - p.lo[1]);
    p.terms.iter().map(|&(i, j, c)| c * x.powi(i) * y.powi(j)).sum()
}

impl Zero for PiecewisePoly {
    fn zero() -> Self {
        PiecewisePoly::default()
    }
    fn is_zero(&self) -> bool {
        self.pieces.iter().all(|p| p.poly.is_zero())
    }
}

impl std::ops::Add for PiecewisePoly {
    type Output = PiecewisePoly;
    fn add(self, o: PiecewisePoly) -> PiecewisePoly {
        PiecewisePoly::add(&self, &o)
    }
}
