mod config;
mod svg;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polyspline::boxspline::{box_inner_product, box_to_piecewise, DirectionMatrix};
use polyspline::fem::{self, EllipticProblem};
use polyspline::geometry::{arrangement_partition, Partition, Point2};
use polyspline::mollify::{smoothness_report, MollifiedBasisFunction, MollifierSpec};
use polyspline::rational;
use polyspline::splinespace::build_space;

use config::{load, BasisConfig, LinesSpec, PdeConfig};
use svg::Svg;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
}

impl From<polyspline::Error> for CliError {
    fn from(e: polyspline::Error) -> Self {
        match e {
            polyspline::Error::NonConvergence { .. } | polyspline::Error::RankDeficient => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Usage(format!("{}: {e}", path.display()))
}

#[derive(Parser)]
#[command(
    name = "polyspline",
    version,
    about = "Mollified spline elements: partitions, bases, inner products and a model PDE"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a partition file.
    Partition(PartitionArgs),
    /// Build, evaluate or inspect a spline basis.
    #[command(subcommand)]
    Basis(BasisCmd),
    /// Inner product of two basis functions or two box splines.
    InnerProduct(InnerArgs),
    /// Solve the elliptic model problem.
    #[command(subcommand)]
    Pde(PdeCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum PartitionKind {
    Diamond,
    Lines,
}

#[derive(Args)]
struct PartitionArgs {
    #[arg(long, value_enum)]
    kind: PartitionKind,
    /// Size parameter of the diamond partition.
    #[arg(long)]
    n: Option<usize>,
    /// JSON/TOML file with `domain` and `lines` (for `--kind lines`).
    #[arg(long)]
    lines: Option<PathBuf>,
    /// Output file (default `<out-dir>/partition.json`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also draw the cells.
    #[arg(long)]
    svg: bool,
}

#[derive(Subcommand)]
enum BasisCmd {
    /// Mollify every cell polynomial and write the space manifest.
    Build {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        partition: Option<PathBuf>,
        #[arg(long)]
        n: Option<u32>,
        /// Mollifier as JSON, e.g. `{"kind":"iterated","a":-1,"b":-1}`.
        #[arg(long)]
        mollifier: Option<String>,
        #[arg(long)]
        positivity: bool,
    },
    /// Print basis values at a point.
    Eval {
        #[arg(long)]
        space: PathBuf,
        #[arg(long, value_parser = config::parse_pair)]
        at: [f64; 2],
        /// Only this basis function (`cell:j,k`).
        #[arg(long, value_parser = config::parse_basis_ref)]
        basis: Option<(usize, [u32; 2])>,
    },
    /// Max derivative jump per order per piece edge, as CSV.
    SmoothnessReport {
        #[arg(long)]
        space: PathBuf,
        #[arg(long, value_parser = config::parse_basis_ref)]
        basis: Option<(usize, [u32; 2])>,
        #[arg(long, default_value_t = 2)]
        max_order: u32,
        /// Output CSV (default `<out-dir>/smoothness.csv`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct InnerArgs {
    /// Space manifest written by `basis build`.
    #[arg(long, requires_all = ["first", "second"])]
    space: Option<PathBuf>,
    /// `cell:j,k` of the first function.
    #[arg(long, value_parser = config::parse_basis_ref)]
    first: Option<(usize, [u32; 2])>,
    #[arg(long, value_parser = config::parse_basis_ref)]
    second: Option<(usize, [u32; 2])>,
    /// Box-spline directions `i,j;i,j;...` of the first factor.
    #[arg(long, value_parser = config::parse_directions, conflicts_with = "space", requires = "f")]
    e: Option<config::Directions>,
    #[arg(long, value_parser = config::parse_directions)]
    f: Option<config::Directions>,
    /// Shift `y` in `int M_E(x) M_F(x + y) dx`.
    #[arg(long, value_parser = config::parse_pair, default_value = "0,0")]
    y: [f64; 2],
}

#[derive(Args)]
struct PdeArgs {
    /// TOML/JSON problem file (`n`, `beta`, `gamma`, `length`, `f`, `g`, `u_exact`).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Subcommand)]
enum PdeCmd {
    Solve(PdeArgs),
    Convergence {
        #[command(flatten)]
        args: PdeArgs,
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    std::fs::create_dir_all(&cli.out_dir).map_err(|e| io_err(&cli.out_dir, e))?;
    match &cli.cmd {
        Command::Partition(a) => cmd_partition(cli, a),
        Command::Basis(BasisCmd::Build { config, partition, n, mollifier, positivity }) => {
            cmd_basis_build(cli, config.as_deref(), partition.as_deref(), *n, mollifier.as_deref(), *positivity)
        }
        Command::Basis(BasisCmd::Eval { space, at, basis }) => cmd_basis_eval(space, *at, *basis),
        Command::Basis(BasisCmd::SmoothnessReport { space, basis, max_order, out }) => {
            let out = out.clone().unwrap_or_else(|| cli.out_dir.join("smoothness.csv"));
            cmd_smoothness(space, *basis, *max_order, &out)
        }
        Command::InnerProduct(a) => cmd_inner_product(a),
        Command::Pde(PdeCmd::Solve(a)) => cmd_pde_solve(cli, a),
        Command::Pde(PdeCmd::Convergence { args, n_list }) => cmd_pde_convergence(cli, args, n_list.clone()),
    }
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn partition_svg(p: &Partition) -> String {
    let (lo, hi) = p.domain.bbox();
    let mut s = Svg::new(lo.to_f64(), hi.to_f64(), 600.0);
    for c in &p.cells {
        let pts: Vec<[f64; 2]> = c.vertices().iter().map(Point2::to_f64).collect();
        s.polygon(&pts, "#e0f3f8");
    }
    s.finish()
}

fn cmd_partition(cli: &Cli, a: &PartitionArgs) -> Result<(), CliError> {
    let p = match a.kind {
        PartitionKind::Diamond => {
            let n = a.n.ok_or_else(|| CliError::Usage("--kind diamond needs --n".into()))?;
            fem::diamond_partition(n)?
        }
        PartitionKind::Lines => {
            let spec: LinesSpec = match &a.lines {
                Some(f) => load(f)?,
                None => LinesSpec { domain: None, lines: Vec::new() },
            };
            arrangement_partition(&spec.domain()?, &spec.lines()?)?
        }
    };
    let out = a.out.clone().unwrap_or_else(|| cli.out_dir.join("partition.json"));
    write(&out, &p.to_json_string())?;
    if a.svg {
        write(&out.with_extension("svg"), &partition_svg(&p))?;
    }
    println!("cells={} vertices={} edges={}", p.cells.len(), p.vertices.len(), p.edges.len());
    Ok(())
}

fn cmd_basis_build(
    cli: &Cli,
    config: Option<&Path>,
    partition: Option<&Path>,
    n: Option<u32>,
    mollifier: Option<&str>,
    positivity: bool,
) -> Result<(), CliError> {
    let cfg: BasisConfig = match config {
        Some(c) => load(c)?,
        None => BasisConfig::default(),
    };
    let part_path = match (partition, &cfg.partition, config) {
        (Some(p), _, _) => p.to_path_buf(),
        (None, Some(p), Some(c)) => config::resolve(c, p),
        _ => return Err(CliError::Usage("no partition given (--partition or `partition` in the config)".into())),
    };
    let n = n.or(cfg.n).unwrap_or(0);
    let moll = match mollifier {
        Some(m) => {
            serde_json::from_str::<MollifierSpec>(m).map_err(|e| CliError::Usage(format!("--mollifier: {e}")))?
        }
        None => cfg.mollifier.clone().ok_or_else(|| CliError::Usage("no mollifier given".into()))?,
    };
    let text = std::fs::read_to_string(&part_path).map_err(|e| io_err(&part_path, e))?;
    let part = Partition::from_json_str(&text)?;
    let space = build_space(&part, n, &moll, positivity || cfg.positivity)?;
    write(&cli.out_dir.join("partition.json"), &part.to_json_string())?;
    let mut refs = Vec::with_capacity(space.len());
    for (i, b) in space.basis.iter().enumerate() {
        let r = format!("basis/{i:05}.json");
        let body = serde_json::to_string(&b.to_json()).expect("basis function serializes");
        write(&cli.out_dir.join(&r), &body)?;
        refs.push(r);
    }
    let manifest = space.manifest("partition.json", &refs);
    write(&cli.out_dir.join("space.json"), &serde_json::to_string_pretty(&manifest).expect("manifest serializes"))?;
    println!("basis functions={} dependence_rank={}", space.len(), space.dependence_rank);
    if cli.verbose {
        eprintln!("wrote {}", cli.out_dir.join("space.json").display());
    }
    Ok(())
}

fn load_basis(space: &Path) -> Result<Vec<MollifiedBasisFunction>, CliError> {
    let text = std::fs::read_to_string(space).map_err(|e| io_err(space, e))?;
    let v: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", space.display())))?;
    let refs = v
        .get("basis")
        .and_then(|b| b.as_array())
        .ok_or_else(|| CliError::Usage(format!("{}: no `basis` list", space.display())))?;
    refs.iter()
        .map(|r| {
            let r = r.as_str().ok_or_else(|| CliError::Usage("basis reference is not a string".into()))?;
            let path = config::resolve(space, Path::new(r));
            let t = std::fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
            let j: serde_json::Value =
                serde_json::from_str(&t).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            Ok(MollifiedBasisFunction::from_json(&j)?)
        })
        .collect()
}

fn select(basis: &[MollifiedBasisFunction], key: (usize, [u32; 2])) -> Result<&MollifiedBasisFunction, CliError> {
    basis
        .iter()
        .find(|b| b.cell == key.0 && b.jk == key.1)
        .ok_or_else(|| CliError::Usage(format!("no basis function {}:{},{}", key.0, key.1[0], key.1[1])))
}

fn cmd_basis_eval(space: &Path, at: [f64; 2], key: Option<(usize, [u32; 2])>) -> Result<(), CliError> {
    let basis = load_basis(space)?;
    let p = Point2::from_f64(at[0], at[1])?;
    let chosen: Vec<&MollifiedBasisFunction> = match key {
        Some(k) => vec![select(&basis, k)?],
        None => basis.iter().collect(),
    };
    for b in chosen {
        println!("{}:{},{} {}", b.cell, b.jk[0], b.jk[1], rational::to_f64(&b.eval(&p)));
    }
    Ok(())
}

fn cmd_smoothness(space: &Path, key: Option<(usize, [u32; 2])>, max_order: u32, out: &Path) -> Result<(), CliError> {
    let basis = load_basis(space)?;
    let chosen: Vec<&MollifiedBasisFunction> = match key {
        Some(k) => vec![select(&basis, k)?],
        None => basis.iter().collect(),
    };
    let mut csv = String::from("cell,j,k,piece,ax,ay,bx,by,order,max_jump,boundary\n");
    for b in chosen {
        let r = smoothness_report(&b.rep, max_order);
        for e in &r.edges {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{},{},{:e},{}",
                b.cell,
                b.jk[0],
                b.jk[1],
                e.piece,
                rational::format(&e.a.x),
                rational::format(&e.a.y),
                rational::format(&e.b.x),
                rational::format(&e.b.y),
                e.order,
                e.max_jump,
                e.boundary
            );
        }
        let jumps: Vec<String> = r.max_jump.iter().map(|j| format!("{j:e}")).collect();
        println!(
            "{}:{},{} continuity={} degree={} criss_cross={} max_jump=[{}]",
            b.cell,
            b.jk[0],
            b.jk[1],
            r.continuity_order,
            r.degree,
            r.criss_cross,
            jumps.join(",")
        );
    }
    write(out, &csv)
}

fn cmd_inner_product(a: &InnerArgs) -> Result<(), CliError> {
    if let (Some(space), Some(k1), Some(k2)) = (&a.space, a.first, a.second) {
        let basis = load_basis(space)?;
        let (f, g) = (select(&basis, k1)?, select(&basis, k2)?);
        let v = f.rep.mul(&g.rep).integrate();
        println!("exact={} value={}", rational::format(&v), rational::to_f64(&v));
        return Ok(());
    }
    let (Some(e), Some(f)) = (&a.e, &a.f) else {
        return Err(CliError::Usage("give --space with --first/--second, or --e and --f".into()));
    };
    let e = DirectionMatrix::new(e.0.clone())?;
    let f = DirectionMatrix::new(f.0.clone())?;
    let theorem = box_inner_product(&e, &f, a.y);
    let y = Point2::from_f64(a.y[0], a.y[1])?;
    let piecewise = box_to_piecewise(&e).mul(&box_to_piecewise(&f).shift(&-&y)).integrate();
    println!(
        "theorem={theorem} piecewise={} exact={} difference={:e}",
        rational::to_f64(&piecewise),
        rational::format(&piecewise),
        (theorem - rational::to_f64(&piecewise)).abs()
    );
    Ok(())
}

fn problem(cfg: &PdeConfig, n: usize, length: f64) -> Result<EllipticProblem, CliError> {
    let u = cfg.u_exact.as_deref().map(|s| config::expression(s, n, "u_exact")).transpose()?;
    let p = match (&cfg.f, &u) {
        (Some(f), _) => {
            let f = config::expression(f, n, "f")?;
            let g = match (&cfg.g, &u) {
                (Some(g), _) => config::expression(g, n, "g")?,
                (None, Some(u)) => u.clone(),
                (None, None) => return Err(CliError::Usage("no boundary data: give `g` or `u_exact`".into())),
            };
            let p = EllipticProblem::new(n, cfg.beta, cfg.gamma, f, g)?;
            match u {
                Some(u) => p.with_exact(u),
                None => p,
            }
        }
        (None, Some(u)) => {
            let mut p = EllipticProblem::manufactured(n, cfg.beta, cfg.gamma, u.clone())?;
            if let Some(g) = &cfg.g {
                p.g = config::expression(g, n, "g")?;
            }
            p
        }
        (None, None) => return Err(CliError::Usage("no source: give `f` or `u_exact`".into())),
    };
    Ok(p.with_length(length)?)
}

fn solution_svg(system: &fem::DiscreteSystem, coeffs: &[f64], length: f64) -> String {
    let k = 60;
    let grid = fem::solution_grid(system, coeffs, length, k);
    let (min, max) = grid.iter().flatten().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let mut s = Svg::new([0.0, 0.0], [length, length], 600.0);
    let d = length / k as f64;
    for (j, row) in grid.iter().enumerate() {
        for (i, &v) in row.iter().enumerate() {
            let (x, y) = (i as f64 * d, j as f64 * d);
            s.polygon(&[[x, y], [x + d, y], [x + d, y + d], [x, y + d]], Svg::band(v, min, max));
        }
    }
    s.polyline(&[[0.0, 0.0], [length, 0.0], [length, length], [0.0, length], [0.0, 0.0]], "black");
    s.finish()
}

fn cmd_pde_solve(cli: &Cli, a: &PdeArgs) -> Result<(), CliError> {
    let cfg: PdeConfig = load(&a.config)?;
    let n = a.n.or(cfg.n).ok_or_else(|| CliError::Usage("no `n` given".into()))?;
    let length = cfg.length.unwrap_or(1.0);
    let p = problem(&cfg, n, length)?;
    let space = fem::diamond_space(n)?;
    let system = fem::assemble(&p, &space)?;
    println!("dofs={}", system.dimension());
    let sol = fem::solve(&system).map_err(|e| match e {
        polyspline::Error::NonConvergence { residual, bound } => {
            CliError::Numerical(format!("residual {residual:e} exceeds {bound:e}"))
        }
        e => e.into(),
    })?;
    println!("rank={} rank_deficient={} residual={:e}", sol.rank, sol.rank_deficient, sol.residual);
    let mut csv = String::from("index,cx,cy,coefficient\n");
    for (i, (c, v)) in system.centers.iter().zip(&sol.coefficients).enumerate() {
        let _ = writeln!(csv, "{i},{},{},{v:e}", c[0], c[1]);
    }
    write(&cli.out_dir.join("coefficients.csv"), &csv)?;
    if p.u_exact.is_some() {
        let e = fem::error_report(&p, &system, &sol.coefficients, 6)?;
        println!("l2={:e} h1={:e} max={:e}", e.l2, e.h1, e.max);
        write(
            &cli.out_dir.join("errors.csv"),
            &format!("n,dofs,h,l2,h1,max\n{n},{},{},{:e},{:e},{:e}\n", system.dimension(), p.h(), e.l2, e.h1, e.max),
        )?;
    }
    write(&cli.out_dir.join("solution.svg"), &solution_svg(&system, &sol.coefficients, length))
}

fn cmd_pde_convergence(cli: &Cli, a: &PdeArgs, n_list: Option<Vec<usize>>) -> Result<(), CliError> {
    let cfg: PdeConfig = load(&a.config)?;
    if cfg.u_exact.is_none() {
        return Err(CliError::Usage("convergence needs `u_exact` (orders are undefined without it)".into()));
    }
    let ns = n_list.or(cfg.n_list.clone()).unwrap_or_else(|| vec![1, 2, 4]);
    if ns.is_empty() {
        return Err(CliError::Usage("empty --n-list".into()));
    }
    let length = cfg.length.unwrap_or(1.0);
    let rows =
        fem::convergence(|n| problem(&cfg, n, length).map_err(|e| polyspline::Error::Invalid(e.to_string())), &ns);
    let rows = rows?;
    let fmt = |o: Option<f64>| o.map(|v| format!("{v:.4}")).unwrap_or_default();
    let mut csv = String::from("n,dofs,h,l2,h1,max,l2_order,h1_order\n");
    for r in &rows {
        let line = format!(
            "{},{},{},{:e},{:e},{:e},{},{}",
            r.n,
            r.dofs,
            r.h,
            r.l2,
            r.h1,
            r.max,
            fmt(r.l2_order),
            fmt(r.h1_order)
        );
        println!("{line}");
        csv.push_str(&line);
        csv.push('\n');
    }
    write(&cli.out_dir.join("convergence.csv"), &csv)
}
