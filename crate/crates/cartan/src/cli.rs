//! Command-line front end: configuration merging, dispatch and report
//! emission. The binary is a thin wrapper around [`main_with_args`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::ek::{self, LeafKind};
use crate::error::{Error, Result};
use crate::fd::FiniteDiff;
use crate::foliation::{flow, invariant_drift, IsotropyAlgebra, LeafProbe};
use crate::linalg::RankPolicy;
use crate::metric::complete_solution_report;
use crate::model::{builtin_model, CartanModel, ModelParams};
use crate::monodromy::Verdict;
use crate::ode::OdeOptions;
use crate::rational::RationalityPolicy;
use crate::verifier::{verify, VerifyOptions};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Text,
}

/// Numerical tolerances recorded in every report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Identity checks evaluated from closed forms.
    pub identity: f64,
    /// Identity checks that go through finite differences.
    pub fd: f64,
    pub fd_step: f64,
    /// Relative quadrature target for periods.
    pub quadrature: f64,
    /// Relative singular-value cut-off.
    pub rank: f64,
    pub denominator_bound: u64,
    pub rationality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            identity: 1e-8,
            fd: 1e-6,
            fd_step: 1e-5,
            quadrature: 1e-9,
            rank: 1e-9,
            denominator_bound: 1_000_000,
            rationality: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.identity,
            self.fd,
            self.fd_step,
            self.quadrature,
            self.rank,
            self.rationality,
        ];
        if all.iter().any(|t| !(t.is_finite() && *t > 0.0)) || self.denominator_bound == 0 {
            return Err(Error::Config(format!(
                "every tolerance must be positive: {self:?}"
            )));
        }
        Ok(())
    }

    pub fn rationality_policy(&self) -> RationalityPolicy {
        RationalityPolicy {
            denominator_bound: self.denominator_bound,
            tolerance: self.rationality,
        }
    }
}

/// Settings that can come from a `--config` file; explicit flags and
/// `CARTAN_*` environment variables take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub model: Option<String>,
    pub params: Option<ModelParams>,
    pub tolerances: Option<Tolerances>,
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub model: String,
    pub params: ModelParams,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Parser)]
#[command(
    name = "cartan",
    version,
    about = "Checks and classifications for canonical-form G-structure algebroids"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON file with default settings.
    #[arg(long, global = true, env = "CARTAN_CONFIG")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, env = "CARTAN_SEED")]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, env = "CARTAN_FORMAT")]
    pub format: Option<Format>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true, env = "CARTAN_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, env = "CARTAN_IDENTITY_TOL")]
    pub identity_tol: Option<f64>,
    #[arg(long, global = true, env = "CARTAN_FD_TOL")]
    pub fd_tol: Option<f64>,
    #[arg(long, global = true, env = "CARTAN_FD_STEP")]
    pub fd_step: Option<f64>,
    #[arg(long, global = true, env = "CARTAN_QUAD_TOL")]
    pub quad_tol: Option<f64>,
    #[arg(long, global = true, env = "CARTAN_RANK_TOL")]
    pub rank_tol: Option<f64>,
    #[arg(long, global = true, env = "CARTAN_DENOMINATOR_BOUND")]
    pub denominator_bound: Option<u64>,
    #[arg(long, global = true, env = "CARTAN_RATIONALITY_TOL")]
    pub rationality_tol: Option<f64>,
}

#[derive(Debug, Args, Clone)]
pub struct ModelArgs {
    #[arg(long, env = "CARTAN_MODEL")]
    pub model: Option<String>,
    /// Frame dimension for `trivial` and `constant_curvature`.
    #[arg(long)]
    pub n: Option<usize>,
    /// Scale the curvature map (anything but 1 breaks the identities).
    #[arg(long)]
    pub curvature_scale: Option<f64>,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct LevelArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub c1: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub c2: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Jacobi, Bianchi and equivariance residuals on a seeded sample.
    Verify {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[arg(long, default_value_t = 10)]
        triples: usize,
    },
    /// Leaf dimension, isotropy algebra and invariant drift at a point.
    Leaf {
        #[command(flatten)]
        model: ModelArgs,
        /// Comma-separated base point.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        point: Vec<f64>,
        /// Length of the anchor flows used for the drift check.
        #[arg(long, default_value_t = 5.0)]
        flow_time: f64,
        #[arg(long, default_value_t = 3)]
        flows: usize,
    },
    /// Monodromy and G-monodromy of the leaves in an EK level set.
    Monodromy {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        level: LevelArgs,
        /// Only this leaf (index into the classification).
        #[arg(long)]
        leaf: Option<usize>,
    },
    /// Complete simply connected solutions in an EK level set.
    Complete {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        level: LevelArgs,
        /// Take the sphere verdict from the quadrature periods.
        #[arg(long)]
        with_periods: bool,
    },
    /// Extremal Kähler surfaces.
    Ek {
        #[command(subcommand)]
        command: EkCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum EkCommand {
    /// Profile cubic, leaf families and completeness for one level set
    Classify {
        #[command(flatten)]
        level: LevelArgs,
    },
    /// The table of complete simply connected solutions
    Table1,
    /// Invariants, dictionary residuals and kernel closedness at a point of su(2,1)*
    Su21 {
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        u1: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        u2: f64,
    },
    /// Classification over a grid of (c1, c2)
    Sweep {
        #[arg(long, default_value_t = 50)]
        grid: usize,
        #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [-2.16, 2.25], allow_negative_numbers = true)]
        c1_range: Vec<f64>,
        #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [-0.864, 0.9], allow_negative_numbers = true)]
        c2_range: Vec<f64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Verify { .. } => "verify",
            Command::Leaf { .. } => "leaf",
            Command::Monodromy { .. } => "monodromy",
            Command::Complete { .. } => "complete",
            Command::Ek { command } => match command {
                EkCommand::Classify { .. } => "ek classify",
                EkCommand::Table1 => "ek table1",
                EkCommand::Su21 { .. } => "ek su21",
                EkCommand::Sweep { .. } => "ek sweep",
            },
        }
    }

    fn model_args(&self) -> Option<&ModelArgs> {
        match self {
            Command::Verify { model, .. }
            | Command::Leaf { model, .. }
            | Command::Monodromy { model, .. }
            | Command::Complete { model, .. } => Some(model),
            Command::Ek { .. } => None,
        }
    }
}

/// Merge defaults, the config file and explicit flags, in that order.
pub fn resolve(cli: &Cli) -> Result<RunConfig> {
    let file: FileConfig = match &cli.global.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    let g = &cli.global;
    let mut tol = file.tolerances.unwrap_or_default();
    macro_rules! set {
        ($field:ident, $flag:expr) => {
            if let Some(v) = $flag {
                tol.$field = v;
            }
        };
    }
    set!(identity, g.identity_tol);
    set!(fd, g.fd_tol);
    set!(fd_step, g.fd_step);
    set!(quadrature, g.quad_tol);
    set!(rank, g.rank_tol);
    set!(denominator_bound, g.denominator_bound);
    set!(rationality, g.rationality_tol);
    tol.validate()?;
    let mut params = file.params.unwrap_or_default();
    let mut model = file.model.unwrap_or_else(|| "extremal_kahler".into());
    if let Some(m) = cli.command.model_args() {
        if let Some(name) = &m.model {
            model = name.clone();
        }
        if m.n.is_some() {
            params.n = m.n;
        }
        if m.curvature_scale.is_some() {
            params.curvature_scale = m.curvature_scale;
        }
    }
    Ok(RunConfig {
        subcommand: cli.command.name().into(),
        model,
        params,
        tolerances: tol,
        seed: g.seed.or(file.seed).unwrap_or(0),
        format: g.format.or(file.format).unwrap_or_default(),
        out: g.out.clone().or(file.out),
    })
}

/// Output of one run: a JSON report, its text rendering and the exit code.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub text: String,
    pub pass: bool,
}

fn provenance(cfg: &RunConfig) -> Value {
    json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "seed": cfg.seed,
        "tolerances": cfg.tolerances,
    })
}

fn envelope(cfg: &RunConfig, pass: bool, body: Value) -> Value {
    json!({
        "provenance": provenance(cfg),
        "command": cfg.subcommand,
        "model": cfg.model,
        "params": cfg.params,
        "pass": pass,
        "report": body,
    })
}

fn load_model(cfg: &RunConfig) -> Result<CartanModel> {
    builtin_model(&cfg.model, &cfg.params)
}

fn require_ek(cfg: &RunConfig) -> Result<()> {
    if cfg.model != "extremal_kahler" {
        return Err(Error::Unsupported(format!(
            "`{}` needs --model extremal_kahler; leaf patches of {} are not known",
            cfg.subcommand, cfg.model
        )));
    }
    Ok(())
}

fn period_options(tol: &Tolerances) -> crate::monodromy::PeriodOptions {
    let mut o = ek::ek_period_options();
    o.quad.rel_tol = tol.quadrature;
    o
}

fn verdict_text(v: &Verdict) -> String {
    match v {
        Verdict::Yes => "yes".into(),
        Verdict::No { reason } => format!("no ({reason})"),
        Verdict::Undecided { reason } => format!("undecided ({reason})"),
    }
}

fn leaf_line(l: &ek::LeafFamily) -> String {
    let kind = match l.kind {
        LeafKind::PointLeaf { k } => format!("point K={k}"),
        LeafKind::Cylinder => "cylinder".into(),
        LeafKind::Plane => "plane".into(),
        LeafKind::Sphere => "sphere".into(),
    };
    format!(
        "{kind:<12} {:<40} pi1={} pi2={} integrable={} complete={} frame={} solution={}",
        crate::metric::interval_text(l.k_interval),
        l.pi1,
        l.pi2,
        verdict_text(&l.integrable),
        l.complete.is_complete(),
        l.frame_bundle_label.as_deref().unwrap_or("-"),
        l.solution_label.as_deref().unwrap_or("-"),
    )
}

/// Execute a resolved configuration.
pub fn run(cfg: &RunConfig, command: &Command) -> Result<Outcome> {
    let tol = cfg.tolerances;
    let policy = tol.rationality_policy();
    let rank = RankPolicy { relative: tol.rank };
    let fd = FiniteDiff {
        h: tol.fd_step,
        tol: tol.fd,
    };
    let (pass, body, text) = match command {
        Command::Verify {
            points, triples, ..
        } => {
            let model = load_model(cfg)?;
            let opts = VerifyOptions {
                points: *points,
                triples: *triples,
                seed: cfg.seed,
                tol: tol.identity,
                fd_tol: tol.fd,
                fd,
                ..VerifyOptions::default()
            };
            let r = verify(&model, &opts)?;
            let mut text = format!(
                "model {} ({} points, seed {})\n",
                r.model, r.sample_count, r.seed
            );
            for c in &r.checks {
                text += &format!(
                    "{:<30} {:>10.3e} < {:<8.1e} {}\n",
                    c.name,
                    c.max_residual,
                    c.tolerance,
                    if c.pass { "PASS" } else { "FAIL" }
                );
            }
            (r.passed(), serde_json::to_value(&r)?, text)
        }
        Command::Leaf {
            point,
            flow_time,
            flows,
            ..
        } => {
            let model = load_model(cfg)?;
            if point.len() != model.base.dim {
                return Err(Error::Dimension(format!(
                    "--point has {} coordinates, {} needs {}",
                    point.len(),
                    model.name,
                    model.base.dim
                )));
            }
            let probe = LeafProbe::at(&model, point, rank)?;
            let iso = IsotropyAlgebra::at(&model, point, rank)?;
            let k = model.fiber_dim();
            let mut drifts = Vec::new();
            for i in 0..*flows {
                let dir: Vec<f64> = (0..k)
                    .map(|j| {
                        if (i + j) % k == 0 {
                            1.0
                        } else {
                            0.1 * (j as f64 + 1.0)
                        }
                    })
                    .collect();
                let section = move |_: &[f64]| dir.clone();
                // non-compact leaves may be left in finite time; report that per flow
                match flow(&model, point, &section, *flow_time, &OdeOptions::default()) {
                    Ok(traj) => {
                        let per: Vec<Value> = model
                            .invariants
                            .iter()
                            .map(|inv| json!({ "invariant": inv.name, "drift": invariant_drift(inv, &traj) }))
                            .collect();
                        drifts.push(json!({ "flow": i, "end": traj.last(), "drifts": per }));
                    }
                    Err(e) => drifts.push(json!({ "flow": i, "error": e.to_string() })),
                }
            }
            let germ = (model.name == "extremal_kahler").then(|| ek::germ_symmetry(point));
            let mut text = drifts
                .iter()
                .map(|d| {
                    format!(
                        "flow {}: {}\n",
                        d["flow"],
                        d.get("error").unwrap_or(&d["drifts"])
                    )
                })
                .collect::<String>();
            text += &format!(
                "leaf dimension {}, isotropy dimension {}, orbit dimension {}\nisotropy algebra {:?} (closure residual {:.2e})\n",
                probe.leaf_dim,
                probe.isotropy_dim(),
                probe.orbit_dim,
                iso.kind,
                iso.closure_residual
            );
            if let Some(g) = &germ {
                text += &format!(
                    "germ symmetry {:?} (|T| = {:.3e}, near degenerate {})\n",
                    g.group, g.t_norm, g.near_degenerate
                );
            }
            let body =
                json!({ "probe": probe, "isotropy": iso, "flows": drifts, "germ_symmetry": germ });
            (true, body, text)
        }
        Command::Monodromy { level, leaf, .. } => {
            require_ek(cfg)?;
            let model = load_model(cfg)?;
            let leaves = ek::classify(level.c1, level.c2, policy);
            let chosen: Vec<(usize, &ek::LeafFamily)> = match leaf {
                Some(i) => vec![(
                    *i,
                    leaves.get(*i).ok_or_else(|| {
                        Error::Config(format!("level set has {} leaves", leaves.len()))
                    })?,
                )],
                None => leaves
                    .iter()
                    .enumerate()
                    .filter(|(_, l)| l.is_two_dimensional())
                    .collect(),
            };
            let opts = period_options(&tol);
            let mut reports = Vec::new();
            let mut text = String::new();
            let mut pass = true;
            for (i, l) in chosen {
                let r = ek::leaf_monodromy(&model, l, &opts, policy)?;
                pass &= !matches!(r.discrete, Verdict::No { .. });
                text += &format!("leaf {i}: {}\n", leaf_line(l));
                for g in &r.generators {
                    text += &format!(
                        "  {:<11?} {:<32} period {:.12} (closed form {})\n",
                        g.group_kind,
                        g.label,
                        g.period.coefficients[0],
                        g.closed_form.map_or("-".into(), |c| format!("{c:.12}"))
                    );
                }
                text += &format!(
                    "  N discrete: {}\n  N^G discrete: {}\n",
                    verdict_text(&r.monodromy_discrete),
                    verdict_text(&r.discrete)
                );
                reports.push(json!({ "index": i, "report": r }));
            }
            (
                pass,
                json!({ "c1": level.c1, "c2": level.c2, "leaves": reports }),
                text,
            )
        }
        Command::Complete {
            level,
            with_periods,
            ..
        } => {
            require_ek(cfg)?;
            let model = load_model(cfg)?;
            let leaves = ek::classify(level.c1, level.c2, policy);
            let opts = period_options(&tol);
            let mut out = Vec::new();
            let mut text = String::new();
            for l in &leaves {
                let mono = if *with_periods && l.kind == LeafKind::Sphere {
                    Some(ek::leaf_monodromy(&model, l, &opts, policy)?)
                } else {
                    None
                };
                let r = complete_solution_report(&model, l, mono.as_ref())?;
                text += &format!("{}\n  {}\n", leaf_line(l), r.justification.join("; "));
                out.push(r);
            }
            let any = out.iter().any(|r| r.complete);
            (
                any,
                json!({ "c1": level.c1, "c2": level.c2, "leaves": out }),
                text,
            )
        }
        Command::Ek { command } => match command {
            EkCommand::Classify { level } => {
                let leaves = ek::classify(level.c1, level.c2, policy);
                let prof = ek::CubicProfile::new(level.c1, level.c2);
                let mut text = format!("delta {:.6e}, roots {:?}\n", prof.delta, prof.roots);
                for l in &leaves {
                    text += &leaf_line(l);
                    text.push('\n');
                }
                (true, json!({ "profile": prof, "leaves": leaves }), text)
            }
            EkCommand::Table1 => {
                let rows = ek::table1();
                let text = ek::render_table1(&rows);
                (true, json!({ "rows": rows, "rendered": text }), text)
            }
            EkCommand::Su21 { a, b, u1, u2 } => {
                let pt = ek::su21_embed(*a, *b, (*u1, *u2));
                let inv = ek::su21_invariants(&pt);
                let (r1, r2) = ek::su21_dictionary_residuals(&pt);
                let kernel = ek::su21_kernel_closed(*a, *b, policy);
                let pass = r1 < 1e-12 && r2 < 1e-12;
                let text = format!(
                    "C = {:.15}, det = {:.15}i\ndictionary residuals {r1:.2e}, {r2:.2e}\nkernel: {}\ndelta {:.6e}, -(3/16)U^2(1-2a) = {:.6e}, sign agrees {}\n",
                    inv.casimir,
                    inv.det.1,
                    match &kernel.closedness {
                        ek::KernelClosedness::Closed => "closed (1 - 2a >= 0)".to_string(),
                        ek::KernelClosedness::ClosedIffRational { ratio, rationality } => {
                            format!("closed iff b/|mu| = {ratio} is rational: {rationality}")
                        }
                    },
                    kernel.delta,
                    kernel.delta_displayed,
                    kernel.sign_agrees
                );
                let body = json!({
                    "point": pt,
                    "invariants": inv,
                    "ek_coordinates": pt.ek_coordinates(),
                    "dictionary_residuals": [r1, r2],
                    "kernel": kernel,
                });
                (pass, body, text)
            }
            EkCommand::Sweep {
                grid,
                c1_range,
                c2_range,
            } => {
                let atlas = ek::sweep(
                    *grid,
                    (c1_range[0], c1_range[1]),
                    (c2_range[0], c2_range[1]),
                    policy,
                );
                let sols = atlas.complete_solutions();
                let (small, large): (Vec<&String>, Vec<&String>) = sols
                    .iter()
                    .partition(|l| !l.starts_with("ℂℙ¹") || l.len() < "ℂℙ¹_{100,100}".len());
                let text = format!(
                    "{} level sets\ncomplete simply connected solutions: {}\nplus {} orbifolds with a denominator above 100\n",
                    atlas.entries.len(),
                    small.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", "),
                    large.len()
                );
                (
                    true,
                    json!({ "atlas": atlas, "complete_solutions": sols }),
                    text,
                )
            }
        },
    };
    Ok(Outcome {
        report: envelope(cfg, pass, body),
        text,
        pass,
    })
}

/// Parse, run and write; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let outcome = match run(&cfg, &cli.command) {
        Ok(o) => o,
        Err(
            e @ (Error::Config(_)
            | Error::UnknownModel(_)
            | Error::Dimension(_)
            | Error::Unsupported(_)),
        ) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_FAIL;
        }
    };
    let rendered = match cfg.format {
        Format::Json => {
            serde_json::to_string_pretty(&outcome.report).expect("report serializes") + "\n"
        }
        Format::Text => outcome.text.clone(),
    };
    match &cfg.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, rendered) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return EXIT_FAIL;
            }
        }
        None => print!("{rendered}"),
    }
    if outcome.pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}
