mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use duhem::dissipativity::{cycle_increments, last_cycle_area, DissipationOptions};
use duhem::presets::Preset;
use duhem::storage::{storage_cw_with, StorageOptions};
use duhem::{
    check_assumption_a, check_lemma1, simulate, simulate_mech, traversing_curve, verify_dissipation, DuhemModel,
    Location, MechParams, MechState, ModelSpec, PhasePoint, Trajectory, VerificationReport,
};
use serde::Serialize;

use config::{parse_param, ConfigError, RunConfig};

#[derive(Parser)]
#[command(
    name = "duhem",
    version,
    about = "Duhem hysteresis operators: simulation, storage functions and checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a model along an input signal; writes `t,u,y` CSV.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        y0: Option<f64>,
    },
    /// Traversing curve through (sigma, xi); writes `tau,omega` CSV.
    Curves {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, allow_hyphen_values = true)]
        sigma: f64,
        #[arg(long, allow_hyphen_values = true)]
        xi: f64,
        /// Half-width of the tau window around xi.
        #[arg(long, default_value_t = 5.0)]
        span: f64,
        /// Write the `check_lemma1` report for the intersection hypotheses (JSON) here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Storage function at one phase point; writes JSON.
    Storage {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, allow_hyphen_values = true)]
        sigma: f64,
        #[arg(long, allow_hyphen_values = true)]
        xi: f64,
    },
    /// Storage function along sigma at fixed xi; writes `y,H` CSV.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        xi: f64,
        #[arg(long, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
        #[arg(long, default_value_t = 101)]
        n: usize,
    },
    /// Run the verification battery; exits 1 if any check fails.
    Verify {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        preset: Option<Preset>,
        #[arg(long)]
        y0: Option<f64>,
        /// Directory for `reports.json` and `loops.csv`.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Mass-spring-damper with Dahl friction; writes `t,x1,x2,x3,V` CSV.
    Mech(MechArgs),
    /// Input-output loop of a preset or configured run; writes `u,y` CSV.
    Loops {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        preset: Option<Preset>,
        #[arg(long)]
        y0: Option<f64>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// dahl, boucwen or exp_example.
    #[arg(long)]
    model: Option<String>,
    /// Model parameter override, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (default: stdout).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Free,
    Feedback,
}

#[derive(Args)]
struct MechArgs {
    #[arg(long, default_value_t = 1.0)]
    m: f64,
    #[arg(long, default_value_t = 0.5)]
    d: f64,
    /// Spring stiffness (default 1 in free mode, 0 in feedback mode).
    #[arg(long)]
    k: Option<f64>,
    #[arg(long, default_value_t = 1.5)]
    rho: f64,
    #[arg(long, default_value_t = 0.75)]
    fc: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    x1: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    x2: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    x3: f64,
    #[arg(long, default_value_t = 100.0)]
    horizon: f64,
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    #[arg(long, value_enum, default_value_t = Mode::Free)]
    mode: Mode,
    /// Write every n-th sample.
    #[arg(long, default_value_t = 1)]
    every: usize,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Verification,
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<duhem::Error> for Failure {
    fn from(e: duhem::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Simulate { run, y0 } => {
            let cfg = resolve(&run, None)?;
            let model = cfg.model_spec()?.build()?;
            let tr = trajectory(&model, &cfg, y0)?;
            let mut w = output(run.out.as_deref().or(cfg.output.as_deref()))?;
            writeln!(w, "t,u,y")?;
            for s in &tr.samples {
                writeln!(w, "{},{},{}", num(s.t), num(s.u), num(s.y))?;
            }
            Ok(w.flush()?)
        }
        Command::Curves {
            run,
            sigma,
            xi,
            span,
            report,
        } => {
            let cfg = resolve(&run, None)?;
            let model = cfg.model_spec()?.build()?;
            let curve = traversing_curve(&model, PhasePoint::new(sigma, xi), xi - span, xi + span)?;
            for t in &curve.truncated {
                eprintln!("note: {:?} branch leaves the domain at tau = {}", t.side, t.tau);
            }
            let mut w = output(run.out.as_deref().or(cfg.output.as_deref()))?;
            writeln!(w, "tau,omega")?;
            for (tau, omega) in curve.points() {
                writeln!(w, "{},{}", num(tau), num(omega))?;
            }
            w.flush()?;
            if let Some(path) = report {
                let rect = model.domain().working_rect(-5.0, 5.0, 1e-6, 5.0);
                let r = check_lemma1(&model, &rect, cfg.numerics.lemma_epsilon, cfg.numerics.grid)?;
                write_json(&path, &r)?;
            }
            Ok(())
        }
        Command::Storage { run, sigma, xi } => {
            let cfg = resolve(&run, None)?;
            let model = cfg.model_spec()?.build()?;
            let eval = storage_cw_with(&model, PhasePoint::new(sigma, xi), &storage_options(&cfg))?;
            // the closed form holds for r = 1 only
            let closed_form = match model.dahl_params() {
                Some((rho, fc, 1.0)) => Some(duhem::storage_dahl_closed_form(sigma, rho, fc)?),
                _ => None,
            };
            #[derive(Serialize)]
            struct Out<'a> {
                model: &'a ModelSpec,
                #[serde(flatten)]
                eval: duhem::StorageEvaluation,
                #[serde(skip_serializing_if = "Option::is_none")]
                closed_form: Option<f64>,
            }
            let out = Out {
                model: cfg.model_spec()?,
                eval,
                closed_form,
            };
            let mut w = output(run.out.as_deref().or(cfg.output.as_deref()))?;
            serde_json::to_writer_pretty(&mut w, &out).map_err(io::Error::from)?;
            writeln!(w)?;
            Ok(w.flush()?)
        }
        Command::Sweep { run, xi, from, to, n } => {
            let cfg = resolve(&run, None)?;
            let model = cfg.model_spec()?.build()?;
            if n < 2 {
                return Err(Failure::Config("--n must be at least 2".into()));
            }
            let opts = storage_options(&cfg);
            let mut w = output(run.out.as_deref().or(cfg.output.as_deref()))?;
            writeln!(w, "y,H")?;
            for i in 0..n {
                let y = from + (to - from) * i as f64 / (n - 1) as f64;
                let h = storage_cw_with(&model, PhasePoint::new(y, xi), &opts)?.value;
                writeln!(w, "{},{}", num(y), num(h))?;
            }
            Ok(w.flush()?)
        }
        Command::Verify {
            run,
            preset,
            y0,
            out_dir,
        } => verify(&run, preset, y0, out_dir.as_deref()),
        Command::Mech(args) => mech(&args),
        Command::Loops { run, preset, y0 } => {
            let cfg = resolve(&run, preset)?;
            let model = cfg.model_spec()?.build()?;
            let tr = trajectory(&model, &cfg, y0)?;
            let mut w = output(run.out.as_deref().or(cfg.output.as_deref()))?;
            write_loops(&mut w, &tr)?;
            Ok(w.flush()?)
        }
    }
}

/// Config file, then preset, then flags.
fn resolve(args: &RunArgs, preset: Option<Preset>) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(p) = preset {
        if let Some(name) = &args.model {
            if name != p.model_name() {
                return Err(ConfigError::PresetMismatch {
                    preset: p.name(),
                    expected: p.model_name(),
                    got: name.clone(),
                });
            }
        }
        let from_preset = RunConfig::from(p);
        cfg.model = from_preset.model;
        cfg.input = cfg.input.or(from_preset.input);
    }
    if let Some(name) = &args.model {
        if cfg.model.as_ref().map(|m| &m.model) != Some(name) {
            cfg.model = Some(ModelSpec::new(name.clone()));
        }
    }
    for p in &args.params {
        let (k, v) = parse_param(p)?;
        let spec = cfg.model.as_mut().ok_or(ConfigError::MissingModel)?;
        spec.params.insert(k, v);
    }
    if let Some(step) = args.step {
        cfg.numerics.step = step;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    // surface unknown models and bad parameters as config errors
    cfg.model_spec()?.build()?;
    Ok(cfg)
}

fn storage_options(cfg: &RunConfig) -> StorageOptions {
    StorageOptions {
        quad_tol: cfg.numerics.quad_tol,
        curve_step: cfg.numerics.curve_step,
    }
}

fn trajectory(model: &DuhemModel, cfg: &RunConfig, y0: Option<f64>) -> Result<Trajectory, Failure> {
    let input = cfg.input.clone().unwrap_or_default().build(cfg.seed)?;
    Ok(simulate(model, &input, y0.unwrap_or(cfg.y0), cfg.numerics.step)?)
}

fn verify(args: &RunArgs, preset: Option<Preset>, y0: Option<f64>, out_dir: Option<&Path>) -> Outcome {
    let cfg = resolve(args, preset)?;
    let model = cfg.model_spec()?.build()?;
    let input_spec = cfg.input.clone().unwrap_or_default();
    let input = input_spec.build(cfg.seed)?;
    let y0 = y0.unwrap_or(cfg.y0);
    let mut reports = Vec::new();

    let rect = model.domain().working_rect(-5.0, 5.0, 1e-6, 5.0);
    reports.push(check_assumption_a(&model, &rect, cfg.numerics.grid)?);

    let opts = DissipationOptions {
        quad_tol: cfg.numerics.quad_tol,
        curve_step: cfg.numerics.curve_step,
        ..DissipationOptions::new(cfg.numerics.step)
    };
    reports.push(verify_dissipation(&model, &input, y0, &opts)?);

    let tr = simulate(&model, &input, y0, cfg.numerics.step)?;
    if let Some((_, fc, _)) = model.dahl_params() {
        let mut r = VerificationReport::builder("saturation", 0.0);
        for s in &tr.samples {
            r.observe(s.y.abs() - fc, Location::Time { t: s.t });
        }
        // |y| = Fc itself is a violation
        let mut r = r.finish();
        r.passed = r.worst_violation < 0.0;
        reports.push(r);
    }
    if let Some(period) = input_spec.period() {
        let area = last_cycle_area(&tr)?;
        let mut r = VerificationReport::builder("clockwise_loop", 0.0);
        r.observe(-area, Location::Time { t: tr.last().t });
        r.note(format!("signed area of the last cycle: {area:.6e}"));
        let mut r = r.finish();
        r.passed = area > 0.0;
        reports.push(r);

        let inc = cycle_increments(&tr, period)?;
        let mut r = VerificationReport::builder("cycle_supply_stabilization", 1e-4);
        for (k, w) in inc.windows(2).enumerate().skip(2) {
            r.observe(
                (w[1] - w[0]).abs(),
                Location::Time {
                    t: (k + 2) as f64 * period,
                },
            );
        }
        reports.push(r.finish());
    }

    let passed = reports.iter().all(|r| r.passed);
    for r in &reports {
        eprintln!("{r}");
    }
    #[derive(Serialize)]
    struct Out<'a> {
        model: &'a ModelSpec,
        passed: bool,
        reports: &'a [VerificationReport],
    }
    let out = Out {
        model: cfg.model_spec()?,
        passed,
        reports: &reports,
    };
    match out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            write_json(&dir.join("reports.json"), &out)?;
            let mut w = BufWriter::new(File::create(dir.join("loops.csv"))?);
            write_loops(&mut w, &tr)?;
            w.flush()?;
        }
        None => {
            let mut w = io::stdout().lock();
            serde_json::to_writer_pretty(&mut w, &out).map_err(io::Error::from)?;
            writeln!(w)?;
        }
    }
    if passed {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn mech(a: &MechArgs) -> Outcome {
    let params = match a.mode {
        Mode::Free => MechParams {
            m: a.m,
            d: a.d,
            k: a.k.unwrap_or(1.0),
            rho: a.rho,
            fc: a.fc,
            force: duhem::ForceLaw::Zero,
        },
        Mode::Feedback => MechParams {
            k: a.k.unwrap_or(0.0),
            ..MechParams::feedback(a.m, a.d, a.rho, a.fc)
        },
    };
    if a.every == 0 {
        return Err(Failure::Config("--every must be positive".into()));
    }
    let series = simulate_mech(&params, MechState::new(a.x1, a.x2, a.x3), a.horizon, a.step)?;
    let mut w = output(a.out.as_deref())?;
    writeln!(w, "t,x1,x2,x3,V")?;
    let last = series.t.len() - 1;
    for i in (0..=last).filter(|&i| i % a.every == 0 || i == last) {
        let s = series.states[i];
        writeln!(
            w,
            "{},{},{},{},{}",
            num(series.t[i]),
            num(s.x1),
            num(s.x2),
            num(s.x3),
            num(series.v[i])
        )?;
    }
    Ok(w.flush()?)
}

fn write_loops(w: &mut impl Write, tr: &Trajectory) -> io::Result<()> {
    writeln!(w, "u,y")?;
    for s in &tr.samples {
        writeln!(w, "{},{}", num(s.u), num(s.y))?;
    }
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()
}

fn output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// 17 significant digits, enough to round-trip an f64.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}
