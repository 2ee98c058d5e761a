use std::path::{Path, PathBuf};
use std::rc::Rc;

use polyspline::fem::Func;
use polyspline::geometry::{Line, Point2, Polygon};
use polyspline::mollify::MollifierSpec;
use polyspline::rational::{self, Rational};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::CliError;

/// Reads a TOML (by extension) or JSON file into `T`. Parse errors carry
/// the line/column or field reported by the parser.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
    if toml {
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    } else {
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

/// Resolves `p` against the directory of the config file that named it.
pub fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.parent().unwrap_or(Path::new(".")).join(p)
    }
}

/// A number given either as a JSON/TOML number or as a string such as
/// `"1/3"`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Num {
    pub fn to_rational(&self) -> Result<Rational, CliError> {
        let r = match self {
            Num::Int(v) => Ok(rational::int(*v)),
            Num::Float(v) => rational::from_f64(*v),
            Num::Text(s) => rational::parse(s),
        };
        r.map_err(|e| CliError::Usage(e.to_string()))
    }
}

fn point(p: &[Num; 2]) -> Result<Point2, CliError> {
    Ok(Point2::new(p[0].to_rational()?, p[1].to_rational()?))
}

/// Input of `partition --kind lines`: a convex domain cut by lines
/// `a x + b y = c`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinesSpec {
    #[serde(default)]
    pub domain: Option<Vec<[Num; 2]>>,
    pub lines: Vec<[Num; 3]>,
}

impl LinesSpec {
    pub fn domain(&self) -> Result<Polygon, CliError> {
        let poly = match &self.domain {
            None => Polygon::from_ints(&[(0, 0), (1, 0), (1, 1), (0, 1)]),
            Some(v) => Polygon::new(v.iter().map(point).collect::<Result<_, _>>()?),
        };
        poly.map_err(|e| CliError::Usage(format!("domain: {e}")))
    }

    pub fn lines(&self) -> Result<Vec<Line>, CliError> {
        self.lines
            .iter()
            .enumerate()
            .map(|(i, l)| {
                Line::new(l[0].to_rational()?, l[1].to_rational()?, l[2].to_rational()?)
                    .map_err(|e| CliError::Usage(format!("lines[{i}]: {e}")))
            })
            .collect()
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisConfig {
    pub partition: Option<PathBuf>,
    pub n: Option<u32>,
    pub mollifier: Option<MollifierSpec>,
    #[serde(default)]
    pub positivity: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeConfig {
    pub n: Option<usize>,
    #[serde(default)]
    pub beta: [f64; 2],
    #[serde(default)]
    pub gamma: f64,
    /// Side of the physical square.
    pub length: Option<f64>,
    pub f: Option<String>,
    pub g: Option<String>,
    pub u_exact: Option<String>,
    pub n_list: Option<Vec<usize>>,
}

/// Compiles an expression in `x`, `y` (and the constants `n`, `m = 2n+1`).
pub fn expression(src: &str, n: usize, field: &str) -> Result<Func, CliError> {
    let expr: meval::Expr = src.parse().map_err(|e| CliError::Usage(format!("{field}: {e}")))?;
    let mut ctx = meval::Context::new();
    ctx.var("n", n as f64).var("m", (2 * n + 1) as f64);
    let f = expr.bind2_with_context(ctx, "x", "y").map_err(|e| CliError::Usage(format!("{field}: {e}")))?;
    Ok(Rc::new(f))
}

/// Parses `x,y`.
pub fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let v: Vec<&str> = s.split(',').map(str::trim).collect();
    if v.len() != 2 {
        return Err(format!("expected x,y, got `{s}`"));
    }
    let p = |t: &str| t.parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    Ok([p(v[0])?, p(v[1])?])
}

/// Parses `cell:j,k` (or a bare cell index, meaning `j = k = 0`).
pub fn parse_basis_ref(s: &str) -> Result<(usize, [u32; 2]), String> {
    let (cell, jk) = match s.split_once(':') {
        Some((c, jk)) => (c, Some(jk)),
        None => (s, None),
    };
    let cell = cell.trim().parse::<usize>().map_err(|e| format!("cell `{cell}`: {e}"))?;
    let jk = match jk {
        None => [0, 0],
        Some(t) => {
            let v: Vec<u32> = t
                .split(',')
                .map(|x| x.trim().parse::<u32>().map_err(|e| format!("`{x}`: {e}")))
                .collect::<Result<_, _>>()?;
            if v.len() != 2 {
                return Err(format!("expected j,k, got `{t}`"));
            }
            [v[0], v[1]]
        }
    };
    Ok((cell, jk))
}

#[derive(Clone, Debug)]
pub struct Directions(pub Vec<[i64; 2]>);

/// Parses direction lists `i,j;i,j;...`.
pub fn parse_directions(s: &str) -> Result<Directions, String> {
    s.split(';')
        .map(|d| {
            let v: Vec<i64> = d
                .split(',')
                .map(|x| x.trim().parse::<i64>().map_err(|e| format!("`{x}`: {e}")))
                .collect::<Result<_, _>>()?;
            match v[..] {
                [a, b] => Ok([a, b]),
                _ => Err(format!("expected i,j, got `{d}`")),
            }
        })
        .collect::<Result<_, _>>()
        .map(Directions)
}
