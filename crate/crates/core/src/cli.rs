//! Command-line front end for the `dirac` binary.

use crate::basis::{
    bessel_ratio, biorthogonal_system, biorthogonality_error, default_basis_grid, eigenfunctions, expansion_residual, gram_matrix,
    subspace_gram, EigenfunctionRecord,
};
use crate::bcond::BoundaryMatrix;
use crate::chardet::char_det;
use crate::error::{DiracError, Result};
use crate::evolve::{fundamental_matrix, oracle_const_e};
use crate::matrix2::c64;
use crate::operator::DiracOperator;
use crate::potential::{gauge_reduce, Mesh, PotentialSpec, DEFAULT_MESH_CELLS, DEFAULT_MESH_TOL};
use crate::quadrature::QuadGrid;
use crate::resolvent::{
    default_kernel_grid, green_kernel, green_on_grids, projector_contour, projector_deviation, spectral_projector_on, GridFunction,
};
use crate::spectrum::{compute_spectrum, count_zeros, Contour, EigenvalueRecord};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Boundary matrix given inline or by preset name (`periodic` or
/// `preset:periodic`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BcSource {
    Preset(String),
    Matrix(BoundaryMatrix),
}

impl BcSource {
    pub fn resolve(&self) -> Result<BoundaryMatrix> {
        match self {
            BcSource::Preset(s) => BoundaryMatrix::preset(s.strip_prefix("preset:").unwrap_or(s)),
            BcSource::Matrix(m) => {
                m.minors()?;
                Ok(*m)
            }
        }
    }
}

fn default_bc() -> BcSource {
    BcSource::Preset("separated".into())
}

fn default_mesh_cells() -> usize {
    DEFAULT_MESH_CELLS
}

fn default_mesh_tol() -> f64 {
    DEFAULT_MESH_TOL
}

/// Everything a run depends on besides the subcommand arguments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_bc")]
    pub bc: BcSource,
    #[serde(default)]
    pub potential: PotentialSpec,
    #[serde(default = "default_mesh_cells")]
    pub mesh_cells: usize,
    /// First-cell width target for graded meshes.
    #[serde(default = "default_mesh_tol")]
    pub mesh_tol: f64,
    /// Quadrature nodes for kernels and eigenfunctions; each command has
    /// its own default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            bc: default_bc(),
            potential: PotentialSpec::default(),
            mesh_cells: DEFAULT_MESH_CELLS,
            mesh_tol: DEFAULT_MESH_TOL,
            grid_nodes: None,
            output: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let c: RunConfig = serde_json::from_str(s).map_err(|e| DiracError::InvalidInput(format!("config: {e}")))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.bc.resolve()?;
        self.potential.validate()?;
        if self.mesh_cells == 0 || !(self.mesh_tol > 0.0) {
            return Err(DiracError::InvalidInput("mesh_cells and mesh_tol must be positive".into()));
        }
        if matches!(self.grid_nodes, Some(n) if n < 16) {
            return Err(DiracError::InvalidInput("grid_nodes must be at least 16".into()));
        }
        Ok(())
    }

    pub fn operator(&self) -> Result<DiracOperator> {
        let mesh = Mesh::build(&self.potential, self.mesh_cells, self.mesh_tol);
        DiracOperator::with_mesh(self.bc.resolve()?, self.potential.clone(), mesh)
    }

    fn gauss_grid(&self, default: usize) -> Result<Arc<QuadGrid>> {
        Ok(Arc::new(QuadGrid::gauss_with_nodes(self.grid_nodes.unwrap_or(default))?))
    }
}

#[derive(Debug, Parser)]
#[command(name = "dirac", version, about = "Spectral computations for 1D Dirac operators on [0, π]")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Run configuration JSON file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// `preset:NAME`, a JSON file, or inline JSON `{"U": ...}`.
    #[arg(long, global = true)]
    pub bc: Option<String>,
    /// Potential JSON file or inline JSON.
    #[arg(long, global = true)]
    pub potential: Option<String>,
    #[arg(long, global = true)]
    pub mesh_cells: Option<usize>,
    #[arg(long, global = true)]
    pub grid_nodes: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write the resolved configuration to this file.
    #[arg(long, global = true)]
    pub save_config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Regularity class of the boundary conditions.
    Classify,
    /// Unperturbed eigenvalues λ⁰_n.
    ModelSpectrum {
        #[arg(long, allow_hyphen_values = true, default_value_t = -10)]
        n_min: i64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 10)]
        n_max: i64,
    },
    /// Eigenvalues with their lattice partners.
    Spectrum {
        #[arg(long, allow_hyphen_values = true, default_value_t = -10)]
        n_min: i64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 10)]
        n_max: i64,
    },
    /// Normalized eigenfunctions on the quadrature grid.
    Eigenfunctions {
        #[arg(long, allow_hyphen_values = true, default_value_t = -3)]
        n_min: i64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 3)]
        n_max: i64,
    },
    /// Green's function on a grid of (t, x) pairs.
    Green {
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        /// Points per axis.
        #[arg(long, default_value_t = 32)]
        points: usize,
    },
    /// Spectral projector of a lattice group.
    Projector {
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
    },
    /// Gram, biorthogonality and expansion diagnostics for |n| ≤ N.
    Basis {
        #[arg(long = "N", default_value_t = 16)]
        big_n: i64,
    },
    /// Bessel ratio of a preset function against the spectrum.
    Bessel {
        /// `preset:const` or `preset:exp:K` (e^{iKx}).
        #[arg(long, default_value = "preset:const")]
        f: String,
        #[arg(long = "N", default_value_t = 400)]
        big_n: i64,
    },
    /// Reduction to an off-diagonal potential.
    Gauge,
    /// Closed-form oracle checks.
    Selftest,
    /// Characteristic determinant on a rectangular λ grid.
    Chardet {
        /// `re0:re1:nre,im0:im1:nim`.
        #[arg(long, allow_hyphen_values = true, default_value = "-5:5:11,0:0:1")]
        lambda_grid: String,
    },
}

/// Parse `a+bi`, `a-bi`, `bi`, `a`, or `[a,b]`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || DiracError::InvalidInput(format!("cannot parse complex number {s:?}"));
    if t.starts_with('[') {
        let v: [f64; 2] = serde_json::from_str(&t).map_err(|_| bad())?;
        return Ok(c64(v[0], v[1]));
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return t.parse::<f64>().map(|r| c64(r, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not an exponent sign
    let bytes = body.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
            split = Some(k);
            break;
        }
    }
    let imag = |s: &str| match s {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => s.parse::<f64>().map_err(|_| bad()),
    };
    match split {
        Some(k) => Ok(c64(body[..k].parse::<f64>().map_err(|_| bad())?, imag(&body[k..])?)),
        None => Ok(c64(0.0, imag(body)?)),
    }
}

fn read_json_arg(s: &str) -> Result<String> {
    if s.trim_start().starts_with('{') {
        Ok(s.to_string())
    } else {
        std::fs::read_to_string(s).map_err(|e| DiracError::InvalidInput(format!("{s}: {e}")))
    }
}

fn resolve_config(a: &CommonArgs) -> Result<RunConfig> {
    let mut c = match &a.config {
        Some(p) => RunConfig::from_json(&std::fs::read_to_string(p).map_err(|e| DiracError::InvalidInput(format!("{}: {e}", p.display())))?)?,
        None => RunConfig::default(),
    };
    if let Some(b) = &a.bc {
        c.bc = if b.trim_start().starts_with('{') || Path::new(b).is_file() {
            let m: BoundaryMatrix = serde_json::from_str(&read_json_arg(b)?).map_err(|e| DiracError::InvalidInput(format!("bc: {e}")))?;
            BcSource::Matrix(m)
        } else {
            BcSource::Preset(b.clone())
        };
    }
    if let Some(p) = &a.potential {
        c.potential = serde_json::from_str(&read_json_arg(p)?).map_err(|e| DiracError::InvalidInput(format!("potential: {e}")))?;
    }
    if let Some(m) = a.mesh_cells {
        c.mesh_cells = m;
    }
    if a.grid_nodes.is_some() {
        c.grid_nodes = a.grid_nodes;
    }
    if a.out.is_some() {
        c.output = a.out.clone();
    }
    c.validate()?;
    Ok(c)
}

fn num(x: f64) -> String {
    // adding zero folds -0.0 into 0.0
    format!("{:.16e}", x + 0.0)
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| DiracError::InvalidInput(format!("csv: {e}"));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    w.into_inner().map_err(|e| DiracError::InvalidInput(format!("csv: {e}")))
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> Result<()> {
    let io = |e: std::io::Error| DiracError::InvalidInput(format!("write: {e}"));
    match out {
        Some(p) => std::fs::write(p, bytes).map_err(io),
        None => std::io::stdout().write_all(bytes).map_err(io),
    }
}

fn emit_json(out: &Option<PathBuf>, v: &Value) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    emit(out, s.as_bytes())
}

fn spectrum_rows(recs: &[EigenvalueRecord]) -> Vec<Vec<String>> {
    recs.iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                num(r.lambda.re),
                num(r.lambda.im),
                num(r.lambda0.re),
                num(r.lambda0.im),
                r.multiplicity.to_string(),
                num(r.residual),
                num(r.deviation()),
            ]
        })
        .collect()
}

pub const SPECTRUM_HEADER: [&str; 8] = ["n", "re_lambda", "im_lambda", "re_lambda0", "im_lambda0", "mult", "residual", "deviation"];

fn smooth_test_function(grid: &Arc<QuadGrid>) -> GridFunction {
    GridFunction::from_fn(grid, |x| [c64((x * (PI - x)).sin(), 0.0), c64(x.cos(), 0.3)])
}

fn basis_report(op: &DiracOperator, big_n: i64, grid: &Arc<QuadGrid>) -> Result<Value> {
    if op.lattice.doubled() {
        let groups: Vec<i64> = (-big_n / 2..=big_n / 2).collect();
        let g = subspace_gram(op, &groups, grid)?;
        return Ok(json!({
            "N": big_n,
            "subspaces": groups,
            "gram": g.matrix.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            "size": g.matrix.nrows(),
            "min_eigenvalue": g.min_eigenvalue,
            "max_eigenvalue": g.max_eigenvalue,
        }));
    }
    let recs = compute_spectrum(op, -big_n, big_n)?;
    let ys = eigenfunctions(op, &recs, grid)?;
    let ws = biorthogonal_system(op, &ys)?;
    let g = gram_matrix(&ys.iter().map(|y| y.values.clone()).collect::<Vec<_>>());
    let f = smooth_test_function(grid);
    let residuals: Vec<Value> = [big_n / 4, big_n / 2, big_n]
        .iter()
        .map(|&m| {
            let keep = |y: &&EigenfunctionRecord| y.n.abs() <= m;
            let yy: Vec<EigenfunctionRecord> = ys.iter().filter(keep).cloned().collect();
            let ww: Vec<EigenfunctionRecord> = ws.iter().filter(keep).cloned().collect();
            json!({"N": m, "residual": expansion_residual(&f, &yy, &ww)})
        })
        .collect();
    Ok(json!({
        "N": big_n,
        "size": g.matrix.nrows(),
        "gram": g.matrix.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        "min_eigenvalue": g.min_eigenvalue,
        "max_eigenvalue": g.max_eigenvalue,
        "biorthogonality_error": biorthogonality_error(&ys, &ws),
        "max_w_norm": ws.iter().map(|w| w.values.norm()).fold(0.0, f64::max),
        "expansion_residuals": residuals,
    }))
}

fn parse_axis(s: &str) -> Result<Vec<f64>> {
    let bad = || DiracError::InvalidInput(format!("bad grid axis {s:?}, expected lo:hi:count"));
    let p: Vec<&str> = s.split(':').collect();
    if p.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = p[0].parse().map_err(|_| bad())?;
    let hi: f64 = p[1].parse().map_err(|_| bad())?;
    let n: usize = p[2].parse().map_err(|_| bad())?;
    if n == 0 {
        return Err(bad());
    }
    Ok((0..n).map(|k| if n == 1 { lo } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 }).collect())
}

struct Check {
    name: &'static str,
    ok: bool,
    detail: String,
}

fn selftest() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut push = |name, err: f64, tol: f64| out.push(Check { name, ok: err <= tol, detail: format!("{err:.3e} (tol {tol:.0e})") });
    let per = BoundaryMatrix::periodic().classify()?;
    push("classify periodic", if per.kind == crate::bcond::BcKind::RegularNotStrong { 0.0 } else { 1.0 }, 0.0);
    let sep = DiracOperator::new(BoundaryMatrix::separated(), PotentialSpec::zero())?;
    let recs = compute_spectrum(&sep, -5, 5)?;
    push("free separated spectrum", recs.iter().map(|r| (r.lambda - r.n as f64).norm()).fold(0.0, f64::max), 1e-9);
    let one = c64(1.0, 0.0);
    let cst = DiracOperator::new(BoundaryMatrix::separated(), PotentialSpec::constant_offdiag(one, one))?;
    push("constant potential Δ(0)", (char_det(&cst, c64(0.0, 0.0))?.delta - c64(0.0, -2.0 * PI.sinh())).norm(), 1e-6);
    let r10 = compute_spectrum(&cst, 10, 10)?;
    push("constant potential λ10", (r10[0].lambda - 101f64.sqrt()).norm(), 1e-8);
    let l = c64(0.7, 0.4);
    let e = fundamental_matrix(&cst.mesh, l, 2.0, false)?.e;
    push("fundamental matrix oracle", (e - oracle_const_e(one, one, l, 2.0)).max_abs(), 1e-8);
    push("Liouville det", (e.det() - 1.0).norm(), 1e-10);
    let g = green_kernel(&sep, c64(0.5, 0.0), PI / 4.0, PI / 2.0)?;
    push("free Green entry", (g.get(0, 0) + Complex64::from_polar(0.5, -3.0 * PI / 8.0)).norm(), 1e-12);
    let pc = DiracOperator::new(BoundaryMatrix::periodic(), PotentialSpec::zero())?;
    push("periodic double zero count", (count_zeros(&pc, &Contour::circle(c64(2.0, 0.0), 0.25))? as f64 - 2.0).abs(), 0.0);
    Ok(out)
}

fn configure_threads() {
    if let Some(n) = std::env::var("DIRAC_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Run a parsed command line.
/// Returns the exit code for runs that finish without an error value.
pub fn execute(cli: &Cli) -> Result<i32> {
    let cfg = resolve_config(&cli.common)?;
    if let Some(p) = &cli.common.save_config {
        std::fs::write(p, cfg.to_json()).map_err(|e| DiracError::InvalidInput(format!("write: {e}")))?;
    }
    let out = &cfg.output;
    let done = match &cli.command {
        Command::Classify => {
            let c = cfg.bc.resolve()?.classify()?;
            emit_json(out, &json!({"kind": c.kind, "discriminant": c.discriminant}))
        }
        Command::ModelSpectrum { n_min, n_max } => {
            let m = cfg.bc.resolve()?.unperturbed_spectrum()?;
            let rows = (*n_min..=*n_max).map(|n| {
                let z = m.lambda0(n);
                vec![n.to_string(), num(z.re), num(z.im)]
            });
            emit(out, &csv_bytes(&["n", "re_lambda0", "im_lambda0"], rows)?)
        }
        Command::Spectrum { n_min, n_max } => {
            let recs = compute_spectrum(&cfg.operator()?, *n_min, *n_max)?;
            emit(out, &csv_bytes(&SPECTRUM_HEADER, spectrum_rows(&recs))?)
        }
        Command::Eigenfunctions { n_min, n_max } => {
            let op = cfg.operator()?;
            let grid = cfg.gauss_grid(256)?;
            let ys = eigenfunctions(&op, &compute_spectrum(&op, *n_min, *n_max)?, &grid)?;
            let rows = ys.iter().flat_map(|y| {
                grid.nodes.iter().zip(&y.values.values).map(move |(&x, v)| {
                    vec![y.n.to_string(), num(x), num(v[0].re), num(v[0].im), num(v[1].re), num(v[1].im)]
                })
            });
            emit(out, &csv_bytes(&["n", "x", "re_y1", "im_y1", "re_y2", "im_y2"], rows)?)
        }
        Command::Green { lambda, points } => {
            let op = cfg.operator()?;
            let l = parse_complex(lambda)?;
            let k = (*points).max(2);
            let h = PI / k as f64;
            // t and x grids are offset by half a step so they never meet
            let ts: Vec<f64> = (0..k).map(|i| (i as f64 + 0.25) * h).collect();
            let xs: Vec<f64> = (0..k).map(|i| (i as f64 + 0.75) * h).collect();
            let g = green_on_grids(&op, l, &ts, &xs)?;
            let mut rows = Vec::with_capacity(k * k);
            for (j, &x) in xs.iter().enumerate() {
                for (i, &t) in ts.iter().enumerate() {
                    let m = g[j * k + i];
                    let mut r = vec![num(t), num(x)];
                    for a in 0..2 {
                        for b in 0..2 {
                            r.push(num(m.get(a, b).re));
                            r.push(num(m.get(a, b).im));
                        }
                    }
                    rows.push(r);
                }
            }
            let header = ["t", "x", "re_g11", "im_g11", "re_g12", "im_g12", "re_g21", "im_g21", "re_g22", "im_g22"];
            emit(out, &csv_bytes(&header, rows)?)
        }
        Command::Projector { n } => {
            let op = cfg.operator()?;
            let grid = match cfg.grid_nodes {
                Some(_) => cfg.gauss_grid(0)?,
                None => default_kernel_grid(),
            };
            let c = projector_contour(&op, *n)?;
            let k = spectral_projector_on(&op, &c, &grid)?;
            let dev = projector_deviation(&op, *n, &grid)?;
            let blocks: Vec<[[f64; 2]; 4]> = k
                .blocks
                .iter()
                .map(|m| [[m.get(0, 0).re, m.get(0, 0).im], [m.get(0, 1).re, m.get(0, 1).im], [m.get(1, 0).re, m.get(1, 0).im], [m.get(1, 1).re, m.get(1, 1).im]])
                .collect();
            let tr = k.trace();
            emit_json(
                out,
                &json!({
                    "n": n,
                    "center": [c.center.re, c.center.im],
                    "radius": c.radius,
                    "enclosed": c.enclosed.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                    "grid": grid.nodes,
                    "weights": grid.weights,
                    "layout": "kernel[j * n + i] = K(t_i, x_j) as [g11, g12, g21, g22]",
                    "kernel": blocks,
                    "trace": [tr.re, tr.im],
                    "deviation": dev,
                }),
            )
        }
        Command::Basis { big_n } => {
            let op = cfg.operator()?;
            let grid = match cfg.grid_nodes {
                Some(_) => cfg.gauss_grid(0)?,
                None => default_basis_grid(),
            };
            emit_json(out, &basis_report(&op, *big_n, &grid)?)
        }
        Command::Bessel { f, big_n } => {
            let op = cfg.operator()?;
            let grid = cfg.gauss_grid(4096)?;
            let name = f.strip_prefix("preset:").unwrap_or(f);
            let values: Vec<Complex64> = match name.split_once(':') {
                None if name == "const" => vec![c64(1.0, 0.0); grid.len()],
                Some(("exp", k)) => {
                    let k: f64 = k.parse().map_err(|_| DiracError::InvalidInput(format!("bad frequency in {f:?}")))?;
                    grid.nodes.iter().map(|&x| Complex64::from_polar(1.0, k * x)).collect()
                }
                _ => return Err(DiracError::InvalidInput(format!("unknown function preset {f:?}"))),
            };
            let recs = compute_spectrum(&op, -big_n, *big_n)?;
            let lambdas: Vec<Complex64> = recs.iter().map(|r| r.lambda).collect();
            let r = bessel_ratio(&grid, &values, &lambdas)?;
            emit_json(out, &json!({"f": f, "N": big_n, "ratio": r}))
        }
        Command::Gauge => {
            let g = gauge_reduce(&cfg.potential, &cfg.bc.resolve()?)?;
            let reduced = RunConfig { bc: BcSource::Matrix(g.bc), potential: g.potential, ..cfg.clone() };
            emit_json(
                out,
                &json!({
                    "gamma": [g.gamma.re, g.gamma.im],
                    "bc": g.bc,
                    "kind": g.bc.classify()?.kind,
                    "reduced_config": serde_json::to_value(&reduced).expect("config serializes"),
                }),
            )
        }
        Command::Selftest => {
            let checks = selftest()?;
            let mut s = String::new();
            for c in &checks {
                s.push_str(&format!("{} {}: {}\n", if c.ok { "PASS" } else { "FAIL" }, c.name, c.detail));
            }
            emit(out, s.as_bytes())?;
            let failed = checks.iter().filter(|c| !c.ok).count();
            if failed > 0 {
                eprintln!("error: selftest: {failed} check(s) failed");
                return Ok(3);
            }
            Ok(())
        }
        Command::Chardet { lambda_grid } => {
            let op = cfg.operator()?;
            let (re, im) = lambda_grid
                .split_once(',')
                .ok_or_else(|| DiracError::InvalidInput("lambda grid needs re and im axes".into()))?;
            let (re, im) = (parse_axis(re)?, parse_axis(im)?);
            let mut rows = Vec::new();
            for &b in &im {
                for &a in &re {
                    let d = char_det(&op, c64(a, b))?.delta;
                    rows.push(vec![num(a), num(b), num(d.re), num(d.im)]);
                }
            }
            emit(out, &csv_bytes(&["re_lambda", "im_lambda", "re_delta", "im_delta"], rows)?)
        }
    };
    done.map(|()| 0)
}

/// Parse `argv`, run, and return the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                2
            } else {
                3
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_parsing() {
        assert_eq!(parse_complex("0.5+2i").unwrap(), c64(0.5, 2.0));
        assert_eq!(parse_complex("-1e-3-4.5i").unwrap(), c64(-1e-3, -4.5));
        assert_eq!(parse_complex("i").unwrap(), c64(0.0, 1.0));
        assert_eq!(parse_complex("-2i").unwrap(), c64(0.0, -2.0));
        assert_eq!(parse_complex("3").unwrap(), c64(3.0, 0.0));
        assert_eq!(parse_complex("[1, -2]").unwrap(), c64(1.0, -2.0));
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn config_round_trip() {
        let c = RunConfig {
            bc: BcSource::Matrix(BoundaryMatrix::periodic()),
            potential: PotentialSpec::constant_offdiag(c64(1.0, 0.5), c64(0.1, 0.0)),
            grid_nodes: Some(128),
            ..RunConfig::default()
        };
        assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
        let p = RunConfig::from_json(r#"{"bc": "preset:periodic"}"#).unwrap();
        assert_eq!(p.bc.resolve().unwrap(), BoundaryMatrix::periodic());
        assert!(RunConfig::from_json(r#"{"bc": "periodic", "extra": 1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"bc": "nonsense"}"#).is_err());
    }

    #[test]
    fn selftest_passes() {
        assert!(selftest().unwrap().iter().all(|c| c.ok));
    }
}
