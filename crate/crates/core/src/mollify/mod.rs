//! Directional integration operators and mollification of per-cell
//! polynomials into smooth basis functions.

mod kernel;
mod smoothness;
mod sweep;

pub use kernel::{convolution_at, convolve_piecewise};
pub use smoothness::{smoothness_report, EdgeJump, SmoothnessReport, JUMP_TOL};
pub use sweep::{i_direction, i_direction_cones, j_direction, ray_sweep, segment_sweep};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::boxspline::DirectionMatrix;
use crate::error::{Error, Result};
use crate::geometry::{minkowski_sum, Point2, Polygon};
use crate::polynomial::PiecewisePoly;
use crate::rational::Rational;

/// The B-spline a cell polynomial is convolved with.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MollifierSpec {
    /// Box spline `M_E`.
    Box { directions: DirectionMatrix },
    /// `I_x^(a+2) I_y^(b+2)`: the tensor box spline with `a+2` copies of
    /// `(1,0)` and `b+2` copies of `(0,1)`.
    Iterated { a: i32, b: i32 },
}

impl MollifierSpec {
    pub fn iterated(a: i32, b: i32) -> Result<Self> {
        let m = MollifierSpec::Iterated { a, b };
        m.validate()?;
        Ok(m)
    }

    pub fn boxspline(directions: DirectionMatrix) -> Self {
        MollifierSpec::Box { directions }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MollifierSpec::Iterated { a, b } if *a < -1 || *b < -1 => {
                Err(Error::invalid(format!("smoothness orders must be >= -1, got ({a}, {b})")))
            }
            _ => Ok(()),
        }
    }

    /// Direction list of the equivalent box spline.
    pub fn directions(&self) -> Vec<[i64; 2]> {
        match self {
            MollifierSpec::Box { directions } => directions.directions().to_vec(),
            MollifierSpec::Iterated { a, b } => {
                let mut d = vec![[1, 0]; (*a + 2) as usize];
                d.extend(std::iter::repeat_n([0, 1], (*b + 2) as usize));
                d
            }
        }
    }

    pub fn direction_matrix(&self) -> Result<DirectionMatrix> {
        self.validate()?;
        DirectionMatrix::new(self.directions())
    }

    /// Zonotope support of the mollifier.
    pub fn support(&self) -> Result<Polygon> {
        Ok(self.direction_matrix()?.zonotope())
    }

    /// Declared smoothness orders `(in x, in y)`. For a box spline this is
    /// `m - 2` in both, with `m` the fewest directions whose removal leaves
    /// a non-spanning set.
    pub fn smoothness(&self) -> (i32, i32) {
        match self {
            MollifierSpec::Iterated { a, b } => (*a, *b),
            MollifierSpec::Box { directions } => {
                let d = directions.directions();
                let most_parallel =
                    d.iter().map(|u| d.iter().filter(|v| u[0] * v[1] - u[1] * v[0] == 0).count()).max().unwrap_or(0);
                let r = (d.len() - most_parallel) as i32 - 2;
                (r, r)
            }
        }
    }

    /// Polynomial degree added by the convolution.
    pub fn degree_increase(&self) -> i32 {
        self.directions().len() as i32
    }
}

/// A mollified cell polynomial `B * f`.
#[derive(Clone, Debug)]
pub struct MollifiedBasisFunction {
    pub cell: usize,
    pub jk: [u32; 2],
    pub rep: PiecewisePoly,
    pub source: PiecewisePoly,
    pub degree: i32,
    pub smoothness: (i32, i32),
    pub support: Polygon,
    /// `None` for a general piecewise-polynomial kernel.
    pub mollifier: Option<MollifierSpec>,
}

impl MollifiedBasisFunction {
    pub fn with_index(mut self, cell: usize, jk: [u32; 2]) -> Self {
        self.cell = cell;
        self.jk = jk;
        self
    }

    pub fn eval(&self, p: &Point2) -> Rational {
        self.rep.eval(p)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "cell": self.cell,
            "jk": self.jk,
            "degree": self.degree,
            "smoothness": [self.smoothness.0, self.smoothness.1],
            "mollifier": self.mollifier,
            "support": self.support.vertices(),
            "source": self.source.to_json(),
            "pieces": self.rep.to_json(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let field = |k: &str| v.get(k).ok_or_else(|| Error::invalid(format!("basis function JSON lacks `{k}`")));
        let parse = |k: &str| -> Result<serde_json::Value> { field(k).cloned() };
        let bad = |k: &str, e: serde_json::Error| Error::invalid(format!("basis function field `{k}`: {e}"));
        let cell: usize = serde_json::from_value(parse("cell")?).map_err(|e| bad("cell", e))?;
        let jk: [u32; 2] = serde_json::from_value(parse("jk")?).map_err(|e| bad("jk", e))?;
        let degree: i32 = serde_json::from_value(parse("degree")?).map_err(|e| bad("degree", e))?;
        let sm: [i32; 2] = serde_json::from_value(parse("smoothness")?).map_err(|e| bad("smoothness", e))?;
        let mollifier: Option<MollifierSpec> =
            serde_json::from_value(parse("mollifier")?).map_err(|e| bad("mollifier", e))?;
        let support: Vec<Point2> = serde_json::from_value(parse("support")?).map_err(|e| bad("support", e))?;
        Ok(MollifiedBasisFunction {
            cell,
            jk,
            rep: PiecewisePoly::from_json(field("pieces")?)?,
            source: PiecewisePoly::from_json(field("source")?)?,
            degree,
            smoothness: (sm[0], sm[1]),
            support: Polygon::new(support)?,
            mollifier,
        })
    }
}

fn check_source(f: &PiecewisePoly) -> Result<()> {
    if f.is_unbounded() {
        return Err(Error::UnboundedSupport);
    }
    if f.is_empty() {
        return Err(Error::invalid("cannot mollify the zero function"));
    }
    Ok(())
}

fn sweep_all(f: &PiecewisePoly, dirs: &[[i64; 2]], cones: bool) -> Result<PiecewisePoly> {
    let mut g = f.clone();
    for d in dirs {
        let v = Point2::int(d[0], d[1]);
        g = if cones { i_direction_cones(&g, &v)? } else { segment_sweep(&g, &v) };
    }
    Ok(g)
}

fn support_of(f: &PiecewisePoly, zonotope: &Polygon) -> Result<Polygon> {
    let hull = f.support_hull().ok_or_else(|| Error::invalid("empty support"))?;
    minkowski_sum(&hull.to_polygon(), zonotope)
}

fn finish(f: &PiecewisePoly, rep: PiecewisePoly, spec: MollifierSpec) -> Result<MollifiedBasisFunction> {
    let support = support_of(f, &spec.support()?)?;
    Ok(MollifiedBasisFunction {
        cell: 0,
        jk: [0, 0],
        degree: f.total_degree() + spec.degree_increase(),
        smoothness: spec.smoothness(),
        support,
        mollifier: Some(spec),
        source: f.clone(),
        rep,
    })
}

/// `I_x^(a+2) I_y^(b+2) f`.
pub fn mollify_iterated(f: &PiecewisePoly, a: i32, b: i32) -> Result<MollifiedBasisFunction> {
    check_source(f)?;
    let spec = MollifierSpec::iterated(a, b)?;
    let rep = sweep_all(f, &spec.directions(), false)?;
    finish(f, rep, spec)
}

/// Kernel of a convolution.
#[derive(Clone, Debug)]
pub enum Kernel {
    Box(DirectionMatrix),
    Piecewise(PiecewisePoly),
}

/// How a box-spline convolution is carried out.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Route {
    /// Iterated axis operators for tensor kernels, signed cones otherwise.
    #[default]
    Auto,
    /// Axis operators `I_x`, `I_y` (tensor kernels only).
    Iterated,
    /// Unit segment sweeps along every direction.
    Sweep,
    /// Signed cone decomposition and ray integrals along every direction.
    Cones,
}

fn axis_counts(e: &DirectionMatrix) -> Option<(i32, i32)> {
    let mut c = (0, 0);
    for d in e.directions() {
        match d {
            [1, 0] => c.0 += 1,
            [0, 1] => c.1 += 1,
            _ => return None,
        }
    }
    Some(c)
}

/// Exact piecewise form of `B * f`.
pub fn mollify_convolve(f: &PiecewisePoly, kernel: &Kernel, route: Route) -> Result<MollifiedBasisFunction> {
    check_source(f)?;
    match kernel {
        Kernel::Box(e) => {
            let tensor = axis_counts(e);
            let route = match route {
                Route::Auto if tensor.is_some() => Route::Iterated,
                Route::Auto => Route::Cones,
                r => r,
            };
            match route {
                Route::Iterated => {
                    let (cx, cy) = tensor.ok_or_else(|| {
                        Error::invalid("the iterated route needs a kernel made of (1,0) and (0,1) directions")
                    })?;
                    mollify_iterated(f, cx - 2, cy - 2)
                }
                Route::Sweep | Route::Cones => {
                    let rep = sweep_all(f, e.directions(), route == Route::Cones)?;
                    finish(f, rep, MollifierSpec::boxspline(e.clone()))
                }
                Route::Auto => unreachable!(),
            }
        }
        Kernel::Piecewise(g) => {
            let rep = convolve_piecewise(f, g)?;
            let gh = g.support_hull().ok_or_else(|| Error::invalid("zero kernel"))?;
            let support = support_of(f, &gh.to_polygon())?;
            let r = smoothness_report(g, (g.total_degree().max(0) + 1) as u32).global_continuity_order;
            Ok(MollifiedBasisFunction {
                cell: 0,
                jk: [0, 0],
                degree: f.total_degree() + g.total_degree() + 2,
                smoothness: (r, r),
                support,
                mollifier: None,
                source: f.clone(),
                rep,
            })
        }
    }
}

/// Axis of a partial derivative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartialAxis {
    X,
    Y,
}

/// One partial derivative of a mollified function, written as the
/// convolution with one direction fewer minus its unit shift.
pub fn mollify_partial(bf: &MollifiedBasisFunction, axis: PartialAxis) -> Result<PiecewisePoly> {
    let spec =
        bf.mollifier.as_ref().ok_or_else(|| Error::SmoothnessTooLow("partials need a box-spline mollifier".into()))?;
    let dirs = spec.directions();
    let k = dirs
        .iter()
        .position(|d| match axis {
            PartialAxis::X => d[1] == 0,
            PartialAxis::Y => d[0] == 0,
        })
        .ok_or_else(|| Error::SmoothnessTooLow(format!("the mollifier has no direction along the {axis:?} axis")))?;
    let v = dirs[k];
    let rest: Vec<[i64; 2]> = dirs.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, d)| *d).collect();
    let lower = sweep_all(&bf.source, &rest, false)?;
    let vp = Point2::int(v[0], v[1]);
    let diff = lower.sub(&lower.shift(&vp));
    let len = Rational::from_integer((v[0] + v[1]).into());
    debug_assert!(!len.is_zero());
    Ok(diff.scale(&(Rational::from_integer(1.into()) / len)))
}

/// Both first partials `(d/dx, d/dy)`.
pub fn mollify_partials(bf: &MollifiedBasisFunction) -> Result<(PiecewisePoly, PiecewisePoly)> {
    Ok((mollify_partial(bf, PartialAxis::X)?, mollify_partial(bf, PartialAxis::Y)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polynomial::Axis;
    use crate::rational::{frac, int};

    fn square() -> PiecewisePoly {
        PiecewisePoly::indicator(&Polygon::from_ints(&[(0, 0), (1, 0), (1, 1), (0, 1)]).unwrap())
    }

    fn diamond() -> PiecewisePoly {
        PiecewisePoly::indicator(&Polygon::from_ints(&[(1, 0), (2, 1), (1, 2), (0, 1)]).unwrap())
    }

    #[test]
    fn iterated_degree_and_support() {
        let b = mollify_iterated(&square(), 0, 0).unwrap();
        assert_eq!(b.degree, 4);
        assert_eq!(b.rep.total_degree(), 4);
        assert_eq!(b.support.area(), int(9));
        assert_eq!(b.rep.integrate(), int(1));
        assert!(mollify_iterated(&square(), -2, 0).is_err());
    }

    #[test]
    fn tensor_hat_value() {
        let b = mollify_iterated(&square(), -1, -1).unwrap();
        assert_eq!(b.eval(&Point2::int(1, 1)), int(1));
        assert_eq!(b.eval(&Point2::new(frac(1, 2), frac(1, 2))), frac(1, 4));
    }

    #[test]
    fn partials_of_tensor_hat_match_symbolic() {
        let b = mollify_iterated(&square(), -1, -1).unwrap();
        let (dx, dy) = mollify_partials(&b).unwrap();
        assert!(dx.sub(&b.rep.partial(Axis::X)).is_empty());
        assert!(dy.sub(&b.rep.partial(Axis::Y)).is_empty());
        assert_eq!(dx.integrate(), int(0));
    }

    #[test]
    fn diamond_element_routes_agree() {
        let it = mollify_iterated(&diamond(), -1, -1).unwrap();
        let k = Kernel::Box(DirectionMatrix::tensor(1, 1).unwrap());
        let cones = mollify_convolve(&diamond(), &k, Route::Cones).unwrap();
        let pw = mollify_convolve(&diamond(), &Kernel::Piecewise(square()), Route::Auto).unwrap();
        assert!(it.rep.sub(&cones.rep).is_empty());
        assert!(it.rep.sub(&pw.rep).is_empty());
        let r = smoothness_report(&it.rep, 2);
        assert_eq!(r.continuity_order, 1);
        assert_eq!(r.degree, 2);
        assert!(r.is_criss_cross_element(1, 2));
    }

    #[test]
    fn json_round_trip() {
        let b = mollify_iterated(&square(), -1, 0).unwrap().with_index(3, [1, 0]);
        let v = b.to_json();
        assert_eq!(v["mollifier"]["kind"], "iterated");
        let back = MollifiedBasisFunction::from_json(&v).unwrap();
        assert_eq!(back.cell, 3);
        assert!(back.rep.sub(&b.rep).is_empty());
    }

    #[test]
    fn box_smoothness() {
        assert_eq!(MollifierSpec::boxspline(DirectionMatrix::zwart_powell()).smoothness(), (1, 1));
        assert_eq!(MollifierSpec::boxspline(DirectionMatrix::courant()).smoothness(), (0, 0));
    }
}
