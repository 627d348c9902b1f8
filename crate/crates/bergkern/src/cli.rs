//! Command-line driver: parses a JSON configuration describing the model and
//! run parameters, executes one of the report commands, and writes a CSV or
//! JSON report (envelope schema "bergkern/1"). Exit codes: 0 success,
//! 2 invalid input, 3 numeric failure.

use std::io::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::geometry::{droplet_margin, edge_frame_radial, edge_frame_tensor, interior_frame, pluri_obstacle};
use crate::kernels::{
    fock_reproducing_pair, limit_mverfc, partial_radial_kernel, KernelJob,
};
use crate::limits::{rescaled_kernel, Mode};
use crate::potentials::{PolyTerm, PotentialModel, RadialProfile};
use crate::quad::{moment_matrix, BivariatePoly};
use crate::stats::{a_n, ball_probabilities, edge_variance_limit, mc_count, multiplicity, variance_bernoulli, variance_integral};
use crate::{invalid, Cplx, Error, Result};

#[derive(Parser, Debug)]
#[command(name = "bergkern", about = "Weighted polynomial Bergman kernels on C^d", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override the kernel dimension n from the config.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Rayon thread-pool size (defaults to the number of cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Override the RNG seed from the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Diagonal kernel values K_n(z, z) along a radial grid.
    Kernel,
    /// Droplet radii r_tau over a tau grid, per factor.
    Droplet,
    /// Obstacle function and edge weights along a ray.
    Obstacle,
    /// Rescaled kernel at an edge point against the limiting kernel.
    EdgeLimit,
    /// Rescaled kernel at an interior point against the Ginibre limit.
    BulkLimit,
    /// Normalized partial kernel of degree m on the inner disk.
    PartialKernel,
    /// Moment matrix of a planar bivariate polynomial potential.
    Moments,
    /// Variance of the ball count: Bernoulli, integral, limit, Monte Carlo.
    Variance,
    /// Reproducing self-check of the half-space Fock kernel.
    IdentityCheck,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Kernel => "kernel",
            Command::Droplet => "droplet",
            Command::Obstacle => "obstacle",
            Command::EdgeLimit => "edge-limit",
            Command::BulkLimit => "bulk-limit",
            Command::PartialKernel => "partial-kernel",
            Command::Moments => "moments",
            Command::Variance => "variance",
            Command::IdentityCheck => "identity-check",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Profile description as written in config files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProfileSpec {
    /// V(r) = sum c_i r^{2 k_i}; terms are [k, c] pairs.
    Polynomial { terms: Vec<(u32, f64)> },
    /// V(r) = r^{2b}/b.
    Power { b: f64 },
}

impl ProfileSpec {
    fn build(&self) -> Result<RadialProfile> {
        Ok(match self {
            ProfileSpec::Polynomial { terms } => RadialProfile::Polynomial(
                terms.iter().map(|&(k, c)| PolyTerm { k, c }).collect(),
            ),
            ProfileSpec::Power { b } => RadialProfile::Power { b: *b },
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Radial { d: usize, profile: ProfileSpec },
    Tensor { factors: Vec<ProfileSpec> },
}

impl ModelSpec {
    fn build(&self) -> Result<PotentialModel> {
        match self {
            ModelSpec::Radial { d, profile } => PotentialModel::radial(*d, profile.build()?),
            ModelSpec::Tensor { factors } => {
                let fs = factors.iter().map(|f| f.build()).collect::<Result<Vec<_>>>()?;
                PotentialModel::tensor(fs)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSpec {
    pub max: f64,
    pub step: f64,
}

/// Run configuration; fields are read by the commands that need them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Config {
    pub model: ModelSpec,
    #[serde(default)]
    pub n: Option<usize>,
    /// Partial-kernel / moment degree cut.
    #[serde(default)]
    pub m: Option<usize>,
    /// Tensor edge weights.
    #[serde(default)]
    pub tau: Option<Vec<f64>>,
    /// Tensor edge phases, or the ray angles for radial commands.
    #[serde(default)]
    pub angles: Option<Vec<f64>>,
    /// Edge depth parameter for the variance command.
    #[serde(default)]
    pub delta: Option<f64>,
    /// Monte Carlo trials (variance command; 0 disables sampling).
    #[serde(default)]
    pub trials: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Microscopic grid for the limit commands, radial grid otherwise.
    #[serde(default)]
    pub grid: Option<GridSpec>,
    /// Interior base point for bulk-limit, [re, im] per coordinate.
    #[serde(default)]
    pub point: Option<Vec<[f64; 2]>>,
    /// Bivariate potential terms [px, py, c] for the moments command.
    #[serde(default)]
    pub bivariate: Option<Vec<(u32, u32, f64)>>,
}

impl Config {
    fn n(&self, cli_n: Option<usize>) -> Result<usize> {
        cli_n
            .or(self.n)
            .ok_or_else(|| Error::Invalid("n is required (config or --n)".to_string()))
    }

    fn grid(&self, default_max: f64, default_step: f64) -> (f64, f64) {
        match &self.grid {
            Some(g) => (g.max, g.step),
            None => (default_max, default_step),
        }
    }
}

/// One report: named columns, numeric rows, and summary scalars.
pub struct Report {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
    pub summary: Vec<(&'static str, f64)>,
}

fn sig17(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:.16e}")
    }
}

impl Report {
    fn to_csv(&self) -> String {
        let mut s = String::new();
        for (name, value) in &self.summary {
            s.push_str(&format!("# {name} = {}\n", sig17(*value)));
        }
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| sig17(x)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    fn to_json(&self, command: &str, config: &Config) -> Result<String> {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                json!(self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.to_string(), json!(v)))
                    .collect::<serde_json::Map<_, _>>())
            })
            .collect();
        let summary: serde_json::Map<String, serde_json::Value> = self
            .summary
            .iter()
            .map(|(k, v)| (k.to_string(), json!(v)))
            .collect();
        let envelope = json!({
            "schema": "bergkern/1",
            "command": command,
            "config": serde_json::to_value(config).map_err(|e| Error::Invalid(e.to_string()))?,
            "rows": rows,
            "summary": summary,
        });
        serde_json::to_string_pretty(&envelope).map_err(|e| Error::Invalid(e.to_string()))
    }
}

fn ray_point(model: &PotentialModel, angles: &Option<Vec<f64>>, s: f64) -> Result<Vec<Cplx>> {
    let d = model.d();
    let th = match angles {
        Some(a) => {
            if a.len() != d {
                return invalid("angles must have one entry per coordinate".to_string());
            }
            a.clone()
        }
        None => vec![0.0; d],
    };
    let scale = 1.0 / (d as f64).sqrt();
    Ok(th
        .iter()
        .map(|&t| Cplx::from_polar(s * scale, t))
        .collect())
}

fn run_command(cmd: Command, cfg: &Config, cli: &Cli) -> Result<Report> {
    let model = cfg.model.build()?;
    match cmd {
        Command::Kernel => {
            let n = cfg.n(cli.n)?;
            let job = KernelJob::new(model.clone(), n)?;
            let (max, step) = cfg.grid(1.5, 0.05);
            let mut rows = Vec::new();
            let mut s = 0.0;
            while s <= max + 1e-12 {
                let z = ray_point(&model, &cfg.angles, s)?;
                let k = job.kernel(&z, &z)?;
                rows.push(vec![s, k.ln, k.ln.exp()]);
                s += step;
            }
            Ok(Report {
                columns: vec!["s", "ln_k_diag", "k_diag"],
                rows,
                summary: vec![("n", n as f64)],
            })
        }
        Command::Droplet => {
            let factors = match &model {
                PotentialModel::Radial { profile, .. } => vec![profile.clone()],
                PotentialModel::Tensor { factors, .. } => factors.clone(),
            };
            let mut rows = Vec::new();
            let steps = 50usize;
            for i in 0..=steps {
                let tau = i as f64 / steps as f64;
                let mut row = vec![tau];
                for f in &factors {
                    row.push(crate::potentials::droplet_radius_of(f, tau)?);
                }
                rows.push(row);
            }
            let mut columns = vec!["tau"];
            for _ in &factors {
                columns.push("r_tau");
            }
            Ok(Report {
                columns,
                rows,
                summary: vec![("factors", factors.len() as f64)],
            })
        }
        Command::Obstacle => {
            let (max, step) = cfg.grid(2.0, 0.05);
            let mut rows = Vec::new();
            let mut s = 0.0;
            while s <= max + 1e-12 {
                let z = ray_point(&model, &cfg.angles, s)?;
                let ob = pluri_obstacle(&model, &z)?;
                let q = model.q(&z)?;
                let margin = droplet_margin(&model, &z)?;
                let tau_sum: f64 = ob.tau.iter().sum();
                rows.push(vec![s, q, ob.value, margin, tau_sum]);
                s += step;
            }
            Ok(Report {
                columns: vec!["s", "q", "q_check", "margin", "tau_sum"],
                rows,
                summary: vec![],
            })
        }
        Command::EdgeLimit => {
            let n = cfg.n(cli.n)?;
            let job = KernelJob::new(model.clone(), n)?;
            let d = model.d();
            let frame = if model.is_radial() {
                let dir = ray_point(&model, &cfg.angles, 1.0)?;
                edge_frame_radial(&model, &dir)?
            } else {
                let tau = cfg
                    .tau
                    .clone()
                    .ok_or_else(|| Error::Invalid("edge-limit on a tensor model needs tau".to_string()))?;
                let angles = cfg.angles.clone().unwrap_or_else(|| vec![0.0; d]);
                edge_frame_tensor(&model, &tau, &angles)?
            };
            let (max, step) = cfg.grid(1.5, 0.5);
            let mut rows = Vec::new();
            let mut sup = 0.0f64;
            let mut x = -max;
            while x <= max + 1e-12 {
                // diagonal comparison along the symmetric direction
                let xi = vec![Cplx::new(x / (d as f64).sqrt(), 0.0); d];
                let got = rescaled_kernel(&job, &frame, Mode::MverfcUnitary, &xi, &xi)?
                    .ln
                    .exp();
                let want = limit_mverfc(&xi, &xi)?.ln.exp();
                let err = (got - want).abs();
                sup = sup.max(err);
                rows.push(vec![x, got, want, err]);
                x += step;
            }
            Ok(Report {
                columns: vec!["xi", "rescaled", "limit", "abs_err"],
                rows,
                summary: vec![("n", n as f64), ("sup_err", sup)],
            })
        }
        Command::BulkLimit => {
            let n = cfg.n(cli.n)?;
            let job = KernelJob::new(model.clone(), n)?;
            let d = model.d();
            let z0: Vec<Cplx> = match &cfg.point {
                Some(p) => {
                    if p.len() != d {
                        return invalid("point must have one [re, im] per coordinate".to_string());
                    }
                    p.iter().map(|&[re, im]| Cplx::new(re, im)).collect()
                }
                None => vec![Cplx::new(0.3 / (d as f64).sqrt(), 0.0); d],
            };
            let frame = interior_frame(&model, &z0)?;
            let (max, step) = cfg.grid(1.5, 0.5);
            let mut rows = Vec::new();
            let mut sup = 0.0f64;
            let mut x = -max;
            while x <= max + 1e-12 {
                let xi = vec![Cplx::new(x / (d as f64).sqrt(), 0.0); d];
                let eta = vec![Cplx::new(0.0, 0.0); d];
                let got = rescaled_kernel(&job, &frame, Mode::BulkGinibre, &xi, &eta)?
                    .ln
                    .exp();
                let want = crate::kernels::limit_ginibre(&xi, &eta).ln.exp();
                let err = (got - want).abs();
                sup = sup.max(err);
                rows.push(vec![x, got, want, err]);
                x += step;
            }
            Ok(Report {
                columns: vec!["xi", "rescaled", "limit", "abs_err"],
                rows,
                summary: vec![("n", n as f64), ("sup_err", sup)],
            })
        }
        Command::PartialKernel => {
            let n = cfg.n(cli.n)?;
            if !model.is_radial() || model.d() != 1 {
                return invalid("partial-kernel requires a radial model with d = 1".to_string());
            }
            let m = cfg
                .m
                .ok_or_else(|| Error::Invalid("partial-kernel needs m".to_string()))?;
            if m >= n {
                return invalid(format!("partial-kernel needs m < n, got m = {m}, n = {n}"));
            }
            let job = KernelJob::new(model.clone(), n)?;
            let dq0 = model.factor(0).delta_q(0.0)?;
            let rmax = 0.9 * (m as f64).sqrt() / (n as f64 * dq0).sqrt();
            let steps = 60usize;
            let mut rows = Vec::new();
            let mut sup = 0.0f64;
            for i in 0..=steps {
                let r = rmax * i as f64 / steps as f64;
                let z = [Cplx::new(r, 0.0)];
                let k = partial_radial_kernel(&job, &z, &z, m)?;
                let norm = (k.ln - (n as f64 * dq0).ln()).exp();
                let dev = (norm - 1.0).abs();
                sup = sup.max(dev);
                rows.push(vec![r, norm, dev]);
            }
            Ok(Report {
                columns: vec!["r", "k_partial_normalized", "dev"],
                rows,
                summary: vec![("n", n as f64), ("m", m as f64), ("sup_dev", sup)],
            })
        }
        Command::Moments => {
            let n = cfg.n(cli.n)?;
            let m = cfg.m.unwrap_or(12);
            let terms = cfg
                .bivariate
                .clone()
                .ok_or_else(|| Error::Invalid("moments needs bivariate potential terms".to_string()))?;
            let q = BivariatePoly { terms };
            q.validate()?;
            let mm = moment_matrix(&q, n as f64, m as u32)?;
            let mut rows = Vec::new();
            for (j, row) in mm.iter().enumerate() {
                for (k, v) in row.iter().enumerate() {
                    let z = v.to_complex();
                    rows.push(vec![j as f64, k as f64, z.re, z.im, v.ln]);
                }
            }
            Ok(Report {
                columns: vec!["j", "k", "re", "im", "ln_abs"],
                rows,
                summary: vec![("n", n as f64), ("m", m as f64)],
            })
        }
        Command::Variance => {
            let n = cfg.n(cli.n)?;
            if !model.is_radial() {
                return invalid("variance requires a radial model".to_string());
            }
            let d = model.d();
            let delta = cfg.delta.unwrap_or(0.0);
            let dq1 = model.factor(0).delta_q(1.0)?;
            let a = a_n(n, dq1, delta)?;
            let vb = variance_bernoulli(&model, n, a)?;
            let vi = variance_integral(&model, n, a)?;
            let limit = edge_variance_limit(d, dq1, delta)? * (n as f64).powf((d as f64 - 1.0) / 2.0);
            let mut summary = vec![
                ("n", n as f64),
                ("a", a),
                ("var_bernoulli", vb),
                ("var_integral", vi),
                ("var_limit", limit),
            ];
            let trials = cfg.trials.unwrap_or(0);
            if trials > 1 {
                let seed = cli.seed.or(cfg.seed).unwrap_or(1);
                let ps = ball_probabilities(&model, n, a)?;
                let mults: Vec<u64> = (0..n as u64).map(|j| multiplicity(j, d)).collect();
                let mc = mc_count(&mults, &ps, trials, seed)?;
                summary.push(("mc_mean", mc.mean));
                summary.push(("mc_var", mc.var));
                summary.push(("mc_se", mc.se));
                summary.push(("trials", trials as f64));
            }
            Ok(Report {
                columns: vec![],
                rows: vec![],
                summary,
            })
        }
        Command::IdentityCheck => {
            let d = model.d();
            let v = vec![1.0 / (d as f64).sqrt(); d];
            let seed = cli.seed.or(cfg.seed).unwrap_or(1);
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
            let mut rows = Vec::new();
            let mut worst = 0.0f64;
            for i in 0..10 {
                let mut draw = || -> Vec<Cplx> {
                    (0..d)
                        .map(|_| {
                            Cplx::new(
                                rand::Rng::gen_range(&mut rng, -0.7..0.7),
                                rand::Rng::gen_range(&mut rng, -0.7..0.7),
                            )
                        })
                        .collect()
                };
                let xi = draw();
                let eta = draw();
                let (lhs, rhs) = fock_reproducing_pair(&xi, &eta, &v)?;
                let rel = (lhs - rhs).norm() / rhs.norm().max(1e-12);
                worst = worst.max(rel);
                rows.push(vec![i as f64, lhs.re, lhs.im, rhs.re, rhs.im, rel]);
            }
            Ok(Report {
                columns: vec!["pair", "quad_re", "quad_im", "kernel_re", "kernel_im", "rel_err"],
                rows,
                summary: vec![("max_rel_err", worst)],
            })
        }
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match run_inner(&cli) {
        Ok(()) => 0,
        Err(Error::Invalid(msg)) => {
            eprintln!("error (invalid input): {msg}");
            2
        }
        Err(Error::Numeric(msg)) => {
            eprintln!("error (numeric): {msg}");
            3
        }
    }
}

fn run_inner(cli: &Cli) -> Result<()> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Invalid("--config is required".to_string()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("cannot read config {}: {e}", path.display())))?;
    let cfg: Config =
        serde_json::from_str(&text).map_err(|e| Error::Invalid(format!("bad config: {e}")))?;
    let report = if let Some(t) = cli.threads {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Invalid(format!("cannot build thread pool: {e}")))?;
        pool.install(|| run_command(cli.command, &cfg, cli))?
    } else {
        run_command(cli.command, &cfg, cli)?
    };
    let text = match cli.format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json(cli.command.name(), &cfg)?,
    };
    match &cli.out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Error::Invalid(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Error::Numeric(format!("cannot write to stdout: {e}")))
        }
    }
}
