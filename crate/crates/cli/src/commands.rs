use std::f64::consts::{PI, TAU};
use std::path::PathBuf;

use chiral_core::continuum::{
    build_example, classify_triple, enumerate_admissible, jump_set, limit_energy, limit_energy_by_sigma,
    total_variations, validate_mesh, ExampleKind, JumpClass, JumpSegment, Label, MeshPotential, TotalVariations,
};
use chiral_core::io::{energy_csv, iteration_csv, read_json, sweep_csv, to_json_string, EnergyRow};
use chiral_core::optimize::{
    chirality_wall_init, chain_wall_center, minimize_chain, minimize_h, AnnealOptions, BoundaryCondition,
    MinimizeOptions, MinimizeOutcome, Objective, Termination, DEPTH,
};
use chiral_core::recovery::{
    build_recovery, gamma_sweep, profile_energy, ExtensionMethod, Kernel, KernelShape, QuadratureRule,
    RecoveryOptions, SweepSchedule, DEFAULT_RADIUS,
};
use chiral_core::svg::{heatmap, mesh_svg};
use chiral_core::{
    energy_h, mm_decomposition, rho, theta_fields, transform, vorticity, Domain, Error, ModelParams, Result,
    RhoMethod, ScalarGrid, SpinField,
};
use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{Format, RunConfig};

/// Files produced by a command; the first one is the primary artifact.
pub struct Output {
    pub files: Vec<(String, String)>,
    /// Numerical failure detected after the artifacts were produced.
    pub failure: Option<(String, String)>,
}

impl Output {
    fn one(name: String, text: String) -> Self {
        Output { files: vec![(name, text)], failure: None }
    }
}

fn format_of<O>(cfg: &RunConfig<O>, allowed: &[Format]) -> Result<Format> {
    let f = cfg.globals.format.unwrap_or(allowed[0]);
    if !allowed.contains(&f) {
        return Err(Error::InvalidInput(format!("{} does not support --format {}", cfg.command, ext(f))));
    }
    Ok(f)
}

fn ext(f: Format) -> &'static str {
    match f {
        Format::Json => "json",
        Format::Csv => "csv",
        Format::Svg => "svg",
    }
}

fn require<T: Clone>(v: &Option<T>, flag: &str) -> Result<T> {
    v.clone().ok_or_else(|| Error::InvalidInput(format!("--{flag} is required")))
}

/// `++`, `+-`, `1,-1` or `(1,-1)`.
pub fn parse_pair(s: &str) -> Result<[i8; 2]> {
    let t = s.trim().trim_start_matches('(').trim_end_matches(')');
    let bad = || Error::InvalidInput(format!("chirality pair {s:?}: expected ++, +-, -+, -- or w,z with entries +-1"));
    let sign = |c: &str| match c.trim() {
        "+" | "1" | "+1" => Ok(1),
        "-" | "-1" => Ok(-1),
        _ => Err(bad()),
    };
    if let Some((a, b)) = t.split_once(',') {
        return Ok([sign(a)?, sign(b)?]);
    }
    let chars: Vec<char> = t.chars().collect();
    if chars.len() != 2 {
        return Err(bad());
    }
    Ok([sign(&chars[0].to_string())?, sign(&chars[1].to_string())?])
}

fn params(lambda: f64, delta: Option<f64>) -> Result<ModelParams<f64>> {
    match delta {
        Some(d) => ModelParams::new(lambda, d),
        None => ModelParams::with_power_law(lambda),
    }
}

fn spin_heatmap(u: &SpinField<f64>, title: &str) -> String {
    let g = ScalarGrid::from_fn(u.nx(), u.ny(), u.lambda(), |i, j| u.angle(i, j).cos());
    heatmap(&g, title)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(rename_all = "kebab-case")]
pub struct DomainArgs {
    /// Rectangle width
    #[arg(long)]
    pub width: Option<f64>,
    #[arg(long)]
    pub height: Option<f64>,
    /// Lower-left corner as x,y
    #[arg(long)]
    pub origin: Option<String>,
}

impl DomainArgs {
    fn domain(&self) -> Result<Domain> {
        let origin = match &self.origin {
            None => [0.0, 0.0],
            Some(s) => {
                let v: Vec<f64> = s
                    .split(',')
                    .map(|x| x.trim().parse::<f64>().map_err(|_| Error::InvalidInput(format!("bad origin {s:?}"))))
                    .collect::<Result<_>>()?;
                if v.len() != 2 {
                    return Err(Error::InvalidInput(format!("origin needs two numbers, got {s:?}")));
                }
                [v[0], v[1]]
            }
        };
        Domain::rect(origin, self.width.unwrap_or(1.0), self.height.unwrap_or(1.0))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(rename_all = "kebab-case")]
pub struct MeshArgs {
    /// MeshPotential JSON file
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    /// Built-in example: vertical_wall, horizontal_wall, diagonal_wall, four_quadrant,
    /// triple_junction, laminate(n), affine(w,z)
    #[arg(long)]
    pub example: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub domain: DomainArgs,
}

impl MeshArgs {
    fn load(&self) -> Result<MeshPotential> {
        match (&self.mesh, &self.example) {
            (Some(p), None) => {
                let m: MeshPotential = read_json(p)?;
                validate_mesh(&m)?;
                Ok(m)
            }
            (None, Some(e)) => build_example(e.parse::<ExampleKind>()?, &self.domain.domain()?),
            _ => Err(Error::InvalidInput("give exactly one of --mesh and --example".into())),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(rename_all = "kebab-case")]
pub struct KernelArgs {
    /// product or radial
    #[arg(long)]
    pub kernel: Option<String>,
    /// Kernel support in units of epsilon
    #[arg(long)]
    pub radius: Option<f64>,
    /// odd_reflection or nearest_point
    #[arg(long)]
    pub extension: Option<String>,
    /// Quadrature panels per kernel radius
    #[arg(long)]
    pub panels: Option<usize>,
    /// Gauss–Legendre nodes per panel
    #[arg(long)]
    pub order: Option<usize>,
}

impl KernelArgs {
    fn options(&self) -> Result<RecoveryOptions> {
        let shape = match self.kernel.as_deref().unwrap_or("product") {
            "product" => KernelShape::Product,
            "radial" => KernelShape::Radial,
            k => return Err(Error::InvalidInput(format!("unknown kernel {k:?}"))),
        };
        let extension = match self.extension.as_deref().unwrap_or("odd_reflection") {
            "odd_reflection" | "odd" => ExtensionMethod::OddReflection,
            "nearest_point" | "nearest" => ExtensionMethod::NearestPoint,
            e => return Err(Error::InvalidInput(format!("unknown extension {e:?}"))),
        };
        let q = QuadratureRule::default();
        Ok(RecoveryOptions {
            kernel: Kernel::new(shape, self.radius.unwrap_or(DEFAULT_RADIUS))?,
            extension,
            quadrature: QuadratureRule {
                panels_per_radius: self.panels.unwrap_or(q.panels_per_radius),
                order: self.order.unwrap_or(q.order),
            },
        })
    }
}

// groundstate

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(rename_all = "kebab-case")]
pub struct GroundstateArgs {
    /// Chirality pair, e.g. ++ or +-
    #[arg(long, allow_hyphen_values = true)]
    pub pair: Option<String>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Defaults to lambda^(2/3)
    #[arg(long)]
    pub delta: Option<f64>,
    /// Sites per side
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long)]
    pub ny: Option<usize>,
    /// Angle at site (0, 0)
    #[arg(long, allow_hyphen_values = true)]
    pub anchor: Option<f64>,
}

pub fn groundstate(cfg: &RunConfig<GroundstateArgs>) -> Result<Output> {
    let o = &cfg.options;
    let f = format_of(cfg, &[Format::Json, Format::Svg])?;
    let n = o.n.unwrap_or(64);
    let (nx, ny) = (o.nx.unwrap_or(n), o.ny.unwrap_or(n));
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidInput("grid must be nonempty".into()));
    }
    let lambda = o.lambda.unwrap_or(1.0 / (nx.max(ny).max(2) - 1) as f64);
    let p = params(lambda, o.delta)?;
    let [w, z] = parse_pair(o.pair.as_deref().unwrap_or("++"))?;
    let u = SpinField::ground_state(nx, ny, &p, w, z, o.anchor.unwrap_or(0.0));
    let text = match f {
        Format::Svg => spin_heatmap(&u, "cos(angle)"),
        _ => to_json_string(&u)?,
    };
    Ok(Output::one(format!("groundstate.{}", ext(f)), text))
}

// energy

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(rename_all = "kebab-case")]
pub struct EnergyArgs {
    /// SpinField JSON file
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Defaults to lambda^(2/3) with lambda from the field
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Serialize)]
struct EnergyOut {
    params: ModelParams<f64>,
    report: chiral_core::EnergyReport<f64>,
}

pub fn energy(cfg: &RunConfig<EnergyArgs>) -> Result<Output> {
    let o = &cfg.options;
    let f = format_of(cfg, &[Format::Json, Format::Csv])?;
    let u: SpinField<f64> = read_json(require(&o.input, "input")?)?;
    let p = params(u.lambda(), o.delta)?;
    let d = Domain::of_sites(u.nx(), u.ny(), u.lambda());
    let mut report = energy_h(&u, &d, &p);
    match mm_decomposition(&u, &d, &p) {
        Ok(mm) => {
            report.potential_part = mm.potential_part;
            report.gradient_part = mm.gradient_part;
            report.horizontal_split = mm.horizontal_split;
            report.vertical_split = mm.vertical_split;
        }
        Err(e) => log::warn!("no decomposition: {e}"),
    }
    let text = match f {
        Format::Csv => energy_csv(&[EnergyRow::new(&p, &report)])?,
        _ => to_json_string(&EnergyOut { params: p, report })?,
    };
    Ok(Output::one(format!("energy.{}", ext(f)), text))
}

// transform

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(rename_all = "kebab-case")]
pub struct TransformArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Serialize)]
struct TransformOut {
    theta: chiral_core::ThetaFields<f64>,
    pair: chiral_core::ChiralityPair<f64>,
    vorticity: ScalarGrid<f64>,
    vortex_count: usize,
}

pub fn transform_cmd(cfg: &RunConfig<TransformArgs>) -> Result<Output> {
    let o = &cfg.options;
    let f = format_of(cfg, &[Format::Json, Format::Svg])?;
    let u: SpinField<f64> = read_json(require(&o.input, "input")?)?;
    let p = params(u.lambda(), o.delta)?;
    let (theta, pair) = transform(&u, &p)?;
    let v = vorticity(&theta)?;
    let vortex_count = v.values().iter().filter(|x| **x != 0.0).count();
    let text = match f {
        Format::Svg => {
            let scaled = ScalarGrid::from_fn(v.nx(), v.ny(), v.lambda(), |i, j| v.get(i, j) / TAU);
            heatmap(&scaled, "vorticity / 2pi")
        }
        _ => to_json_string(&TransformOut { theta, pair, vorticity: v, vortex_count })?,
    };
    Ok(Output::one(format!("transform.{}", ext(f)), text))
}

// classify

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(rename_all = "kebab-case")]
pub struct ClassifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub mesh: MeshArgs,
}

#[derive(Serialize)]
struct ClassifiedSegment {
    #[serde(flatten)]
    segment: JumpSegment,
    class: JumpClass,
    sigma: f64,
}

#[derive(Serialize)]
struct ClassifyOut {
    labels: Vec<Label>,
    segments: Vec<ClassifiedSegment>,
    total_variations: TotalVariations,
    bootstrap: bool,
    limit_energy: f64,
    limit_energy_by_sigma: f64,
}

pub fn classify(cfg: &RunConfig<ClassifyArgs>) -> Result<Output> {
    let f = format_of(cfg, &[Format::Json, Format::Svg])?;
    let m = cfg.options.mesh.load()?;
    let text = match f {
        Format::Svg => mesh_svg(&m)?,
        _ => {
            let segments = jump_set(&m)?
                .into_iter()
                .map(|s| {
                    let class = classify_triple(s.plus, s.minus, s.normal);
                    let sigma = chiral_core::continuum::sigma(s.plus, s.minus, s.normal)?;
                    Ok(ClassifiedSegment { segment: s, class, sigma })
                })
                .collect::<Result<Vec<_>>>()?;
            let tv = total_variations(&m)?;
            to_json_string(&ClassifyOut {
                labels: validate_mesh(&m)?,
                segments,
                total_variations: tv,
                bootstrap: tv.satisfies_bootstrap(),
                limit_energy: limit_energy(&m)?,
                limit_energy_by_sigma: limit_energy_by_sigma(&m)?,
            })?
        }
    };
    Ok(Output::one(format!("classify.{}", ext(f)), text))
}

// mesh

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(rename_all = "kebab-case")]
pub struct MeshCmdArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub mesh: MeshArgs,
}

pub fn mesh(cfg: &RunConfig<MeshCmdArgs>) -> Result<Output> {
    let f = format_of(cfg, &[Format::Json, Format::Svg])?;
    let m = cfg.options.mesh.load()?;
    let text = match f {
        Format::Svg => mesh_svg(&m)?,
        _ => to_json_string(&m)?,
    };
    Ok(Output::one(format!("mesh.{}", ext(f)), text))
}

// recover

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(rename_all = "kebab-case")]
pub struct RecoverArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub mesh: MeshArgs,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub kernel: KernelArgs,
}

pub fn recover(cfg: &RunConfig<RecoverArgs>) -> Result<Output> {
    let o = &cfg.options;
    let f = format_of(cfg, &[Format::Json, Format::Csv, Format::Svg])?;
    let m = o.mesh.load()?;
    let p = params(require(&o.lambda, "lambda")?, o.delta)?;
    let rec = build_recovery(&m, &p, &o.kernel.options()?)?;
    let text = match f {
        Format::Csv => energy_csv(&[EnergyRow::new(&p, &rec.report)])?,
        Format::Svg => heatmap(&rec.pair.w, "w"),
        Format::Json => to_json_string(&rec)?,
    };
    let failure = rec.check().err().map(|e| (e.kind().to_string(), e.to_string()));
    Ok(Output { files: vec![(format!("recovery.{}", ext(f)), text)], failure })
}

// sweep

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(rename_all = "kebab-case")]
pub struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub mesh: MeshArgs,
    /// `default` or a comma-separated list of lattice spacings
    #[arg(long)]
    pub schedule: Option<String>,
    /// Comma-separated epsilons, used instead of --schedule
    #[arg(long)]
    pub epsilons: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub kernel: KernelArgs,
}

fn number_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| Error::InvalidInput(format!("bad number {x:?} in {s:?}"))))
        .collect()
}

pub fn sweep(cfg: &RunConfig<SweepArgs>) -> Result<Output> {
    let o = &cfg.options;
    let f = format_of(cfg, &[Format::Csv, Format::Json])?;
    let m = o.mesh.load()?;
    let schedule = match (&o.schedule, &o.epsilons) {
        (Some(_), Some(_)) => return Err(Error::InvalidInput("give at most one of --schedule and --epsilons".into())),
        (_, Some(e)) => SweepSchedule::from_epsilons(&number_list(e)?)?,
        (Some(s), None) if s != "default" => SweepSchedule::from_lambdas(&number_list(s)?)?,
        _ => SweepSchedule::default_schedule(),
    };
    let rows = gamma_sweep(&m, &schedule, &o.kernel.options()?)?;
    let text = match f {
        Format::Json => to_json_string(&rows)?,
        _ => sweep_csv(&rows)?,
    };
    let failure = rows.iter().find_map(|r| {
        if let Some(msg) = &r.failure {
            Some(("sweep_step".to_string(), format!("lambda = {}: {msg}", r.lambda)))
        } else if r.overflow_count > 0 {
            Some(("overflow".to_string(), format!("{} bond(s) overflow at lambda = {}", r.overflow_count, r.lambda)))
        } else {
            None
        }
    });
    Ok(Output { files: vec![(format!("sweep.{}", ext(f)), text)], failure })
}

// minimize

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(rename_all = "kebab-case")]
pub struct MinimizeArgs {
    /// Minimize a chain instead of a square
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub chain: Option<bool>,
    /// Sites per side (2D)
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long)]
    pub ny: Option<usize>,
    /// Chain length; defaults to 1/lambda + 1
    #[arg(long)]
    pub len: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Chirality pair frozen on the left (for chains only w is used)
    #[arg(long, allow_hyphen_values = true)]
    pub left: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub right: Option<String>,
    /// linear, wall or file
    #[arg(long)]
    pub init: Option<String>,
    /// SpinField JSON used with --init file
    #[arg(long)]
    pub init_file: Option<PathBuf>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub grad_tol: Option<f64>,
    /// Annealing sweeps before descent (0 disables)
    #[arg(long)]
    pub anneal_sweeps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

fn chain_setup(len: usize, p: &ModelParams<f64>, a: f64, b: f64) -> Result<(BoundaryCondition, Vec<f64>)> {
    let c = chain_wall_center(len, p.lambda);
    let phi = move |x: f64| if x <= c { a * x } else { b * x + (a - b) * c };
    let bc = BoundaryCondition::chain(len, p, DEPTH, phi)?;
    let wall = move |x: f64| {
        let (l, r) = (a * x, b * x + (a - b) * c);
        if b > a {
            l.max(r)
        } else if b < a {
            l.min(r)
        } else {
            l
        }
    };
    let (l, t0) = (p.lambda, p.theta0());
    let init = (0..len).map(|i| t0 * wall(l * i as f64) / l).collect();
    Ok((bc, init))
}

pub fn minimize(cfg: &RunConfig<MinimizeArgs>) -> Result<Output> {
    let o = &cfg.options;
    let f = format_of(cfg, &[Format::Json, Format::Csv, Format::Svg])?;
    let left = parse_pair(o.left.as_deref().unwrap_or("--"))?;
    let right = parse_pair(o.right.as_deref().unwrap_or("++"))?;
    let init = o.init.as_deref().unwrap_or("linear");
    if !["linear", "wall", "file"].contains(&init) {
        return Err(Error::InvalidInput(format!("unknown --init {init:?}")));
    }
    let anneal = match o.anneal_sweeps.unwrap_or(0) {
        0 => None,
        sweeps => {
            let seed = match (o.seed, cfg.deterministic()) {
                (Some(s), _) => s,
                (None, true) => 0,
                (None, false) => rand::random(),
            };
            Some(AnnealOptions { sweeps, seed, ..Default::default() })
        }
    };
    let d = MinimizeOptions::default();
    let opts = MinimizeOptions {
        max_iter: o.max_iter.unwrap_or(d.max_iter),
        grad_tol: o.grad_tol.unwrap_or(d.grad_tol),
        anneal,
        ..d
    };
    let from_file = || -> Result<SpinField<f64>> { read_json(require(&o.init_file, "init-file")?) };

    let outcome = if o.chain.unwrap_or(false) {
        let lambda = require(&o.lambda, "lambda")?;
        let p = params(lambda, o.delta)?;
        let len = o.len.unwrap_or((1.0 / lambda).round() as usize + 1);
        let (bc, wall) = chain_setup(len, &p, left[0] as f64, right[0] as f64)?;
        let start = match init {
            "wall" => wall,
            "file" => from_file()?.angles().to_vec(),
            _ => bc.linear_init(),
        };
        let (run, report) = minimize_chain(&start, &p, &bc, &opts)?;
        let spins = SpinField::new(len, 1, lambda, run.psi.clone())?;
        MinimizeOutcome { spins, report, run }
    } else {
        let n = o.n.unwrap_or(33);
        let (nx, ny) = (o.nx.unwrap_or(n), o.ny.unwrap_or(n));
        if nx < 2 || ny < 2 {
            return Err(Error::GridTooSmall { nx, ny, need: "at least 2x2 sites" });
        }
        let lambda = o.lambda.unwrap_or(1.0 / (nx.max(ny) - 1) as f64);
        let p = params(lambda, o.delta)?;
        let bc = BoundaryCondition::chirality_sides(nx, ny, &p, left, right)?;
        let start = match init {
            "wall" => chirality_wall_init(nx, ny, &p, left, right)?,
            "file" => from_file()?,
            _ => bc.linear_init_field(lambda)?,
        };
        let domain = Domain::of_sites(nx, ny, lambda);
        minimize_h(&start, &domain, &p, &bc, &opts)?
    };

    let mut files = vec![(
        format!("minimize.{}", ext(f)),
        match f {
            Format::Csv => iteration_csv(&outcome.run.log)?,
            Format::Svg => spin_heatmap(&outcome.spins, "cos(angle)"),
            Format::Json => to_json_string(&outcome)?,
        },
    )];
    if f != Format::Csv {
        files.push(("iterations.csv".into(), iteration_csv(&outcome.run.log)?));
    }
    match outcome.run.termination {
        Termination::MaxIterations => log::warn!("iteration cap reached, gradient norm {:e}", outcome.run.grad_norm),
        Termination::Stalled => log::warn!("line search stalled, gradient norm {:e}", outcome.run.grad_norm),
        Termination::Converged => {}
    }
    let failure = (outcome.run.termination == Termination::Stalled).then(|| {
        (
            "stalled".to_string(),
            format!("line search failed after {} iterations, gradient norm {:e}", outcome.run.iterations, outcome.run.grad_norm),
        )
    });
    Ok(Output { files, failure })
}

// profile1d

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(rename_all = "kebab-case")]
pub struct ProfileArgs {
    /// Left end of the integration interval
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
}

#[derive(Serialize)]
struct ProfileOut {
    interval: [f64; 2],
    potential: f64,
    gradient: f64,
    total: f64,
    target: f64,
    error: f64,
}

pub fn profile1d(cfg: &RunConfig<ProfileArgs>) -> Result<Output> {
    let f = format_of(cfg, &[Format::Json])?;
    let (a, b) = (cfg.options.a.unwrap_or(-20.0), cfg.options.b.unwrap_or(20.0));
    if !(a < b) {
        return Err(Error::InvalidInput(format!("empty interval [{a}, {b}]")));
    }
    let e = profile_energy(a, b);
    let target = 8.0 / 3.0;
    let out = ProfileOut {
        interval: [a, b],
        potential: e.potential,
        gradient: e.gradient,
        total: e.total,
        target,
        error: e.total - target,
    };
    Ok(Output::one(format!("profile1d.{}", ext(f)), to_json_string(&out)?))
}

// selftest

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(rename_all = "kebab-case")]
pub struct SelftestArgs {
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Serialize)]
struct Suite {
    name: &'static str,
    cases: usize,
    max_error: f64,
    tolerance: f64,
    passed: bool,
}

impl Suite {
    fn new(name: &'static str, cases: usize, max_error: f64, tolerance: f64) -> Self {
        Suite { name, cases, max_error, tolerance, passed: max_error <= tolerance }
    }
}

#[derive(Serialize)]
struct SelftestOut {
    passed: bool,
    suites: Vec<Suite>,
}

fn selftest_suites(rng: &mut ChaCha8Rng) -> Result<Vec<Suite>> {
    let mut suites = Vec::new();

    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for n in [8, 16, 32] {
        for _ in 0..10 {
            let l = rng.gen_range(0.005..0.2);
            let p = ModelParams::new(l, rng.gen_range(0.01..0.95))?;
            let u = SpinField::from_fn(n, n, l, |_, _| rng.gen_range(-PI..PI));
            let d = Domain::of_sites(n, n, l);
            let h = energy_h(&u, &d, &p).total;
            worst = worst.max((h - mm_decomposition(&u, &d, &p)?.total).abs() / (1.0 + h));
            cases += 1;
        }
    }
    suites.push(Suite::new("exact_decomposition", cases, worst, 1e-9));

    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let (a, b) = (rng.gen_range(-PI..PI), rng.gen_range(-PI..PI));
        if a != b {
            let x = rho(a, b, RhoMethod::Definition)?;
            worst = worst.max((x - rho(a, b, RhoMethod::ClosedForm)?).abs() / x.abs().max(1.0));
        }
    }
    suites.push(Suite::new("rho_consistency", 10_000, worst, 1e-12));

    let mut worst: f64 = 0.0;
    for delta in [0.5, 0.1, 0.01] {
        let p = ModelParams::new(1.0 / 31.0, delta)?;
        let d = Domain::of_sites(32, 32, p.lambda);
        for [w, z] in chiral_core::continuum::LABELS {
            let u = SpinField::ground_state(32, 32, &p, w, z, 0.3);
            worst = worst.max(energy_h(&u, &d, &p).total.abs());
            let (_, pair) = transform(&u, &p)?;
            for (v, s) in pair.w.values().iter().map(|v| (v, w)).chain(pair.z.values().iter().map(|v| (v, z))) {
                worst = worst.max((v - s as f64).abs());
            }
        }
    }
    suites.push(Suite::new("ground_states", 12, worst, 1e-10));

    let found = enumerate_admissible().len();
    suites.push(Suite::new("rigidity_enumeration", found, (found as f64 - 12.0).abs(), 0.0));

    let mut kinds = vec![
        ExampleKind::VerticalWall,
        ExampleKind::HorizontalWall,
        ExampleKind::DiagonalWall,
        ExampleKind::FourQuadrant,
        ExampleKind::TripleJunction,
    ];
    kinds.extend((1..=8).map(ExampleKind::Laminate));
    let mut violations = 0.0;
    for &k in &kinds {
        let m = build_example(k, &Domain::unit_square())?;
        let tv = total_variations(&m)?;
        if !tv.satisfies_bootstrap() {
            violations += 1.0;
        }
    }
    suites.push(Suite::new("bootstrap_inequalities", kinds.len(), violations, 0.0));

    let mut worst: f64 = 0.0;
    for n in [6, 10] {
        let p = ModelParams::new(1.0 / (n - 1) as f64, 0.3)?;
        let d = Domain::of_sites(n, n, p.lambda);
        let obj = Objective::lattice(&d, &p, &BoundaryCondition::free(n, n))?;
        for _ in 0..5 {
            let psi: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-PI..PI)).collect();
            let (_, g) = obj.energy_and_gradient(&psi)?;
            let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let mut dir = vec![0.0; psi.len()];
            for s in 0..psi.len() {
                dir[s] = 1.0;
                let fd = (obj.energy_change(&psi, &dir, 1e-5)? - obj.energy_change(&psi, &dir, -1e-5)?) / 2e-5;
                dir[s] = 0.0;
                worst = worst.max((fd - g[s]).abs() / gmax);
            }
        }
    }
    suites.push(Suite::new("gradient_check", 10, worst, 1e-6));

    let vortex = SpinField::new(2, 2, 1.0, vec![0.0, PI / 2.0, -PI / 2.0, PI])?;
    let v = vorticity(&theta_fields(&vortex)?)?.get(0, 0);
    suites.push(Suite::new("four_spin_vortex", 1, (v - TAU).abs(), 0.0));
    Ok(suites)
}

pub fn selftest(cfg: &RunConfig<SelftestArgs>) -> Result<Output> {
    let f = format_of(cfg, &[Format::Json])?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.options.seed.unwrap_or(0));
    let suites = selftest_suites(&mut rng)?;
    let passed = suites.iter().all(|s| s.passed);
    let failure = (!passed).then(|| {
        let names: Vec<&str> = suites.iter().filter(|s| !s.passed).map(|s| s.name).collect();
        ("selftest".to_string(), format!("failed suites: {}", names.join(", ")))
    });
    let text = to_json_string(&SelftestOut { passed, suites })?;
    Ok(Output { files: vec![(format!("selftest.{}", ext(f)), text)], failure })
}
