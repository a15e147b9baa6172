use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use hapqkd::atmosphere::SkyPreset;
use hapqkd::budget::Method;
use hapqkd::harness::{
    catalog, load_scenario_file, run_point, run_sweep, solve_max_divergence, solve_max_loss, CatalogFilter, FigurePreset,
    Grid, MetricKind, PlatformClass, Scale, Scenario, SweepSpec, Table,
};
use hapqkd::qkd::{DivergenceSolution, Protocol};
use serde_json::json;

/// Link budget and QKD feasibility for HAP-to-ground optical links.
#[derive(Parser)]
#[command(name = "hapqkd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file (defaults to the reference link).
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit JSON instead of text / CSV.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the full link budget for one scenario.
    Budget {
        #[command(flatten)]
        common: Common,
        /// Loss estimate used for the QKD verdicts.
        #[arg(long)]
        method: Option<Method>,
    },
    /// Sweep one variable and print a plot-ready table.
    Sweep(SweepArgs),
    /// Solve for the largest tolerable loss or beam divergence.
    Feasibility {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        solve: Solve,
        #[arg(long, default_value = "dv")]
        protocol: Protocol,
        #[arg(long)]
        method: Option<Method>,
    },
    /// List platforms from the built-in catalog.
    Catalog {
        /// fixed-wing, balloon, airship or tethered.
        #[arg(long)]
        class: Option<PlatformClass>,
        #[arg(long)]
        name: Option<String>,
        /// Minimum payload capacity in kg.
        #[arg(long)]
        min_payload: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Figure preset, fig2..fig11.
    #[arg(long, conflicts_with_all = ["var", "min", "max", "points", "log"])]
    figure: Option<FigurePreset>,
    /// Dotted scenario path, or geometry.los_m / channel_loss_db.
    #[arg(long, requires_all = ["min", "max", "points"])]
    var: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Logarithmic spacing.
    #[arg(long)]
    log: bool,
    /// channel-loss, qber or snr.
    #[arg(long, default_value = "channel-loss")]
    metric: MetricKind,
    #[arg(long, value_delimiter = ',', default_value = "method1,nanobob")]
    methods: Vec<Method>,
    /// One series per sky preset (e.g. moonless,day_clear).
    #[arg(long, value_delimiter = ',')]
    skies: Vec<SkyPreset>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Solve {
    MaxLoss,
    MaxDivergence,
}

enum Failure {
    Input(anyhow::Error),
    Infeasible(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

fn load(path: Option<&Path>) -> anyhow::Result<Scenario> {
    match path {
        Some(p) => Ok(load_scenario_file(p)?),
        None => Ok(Scenario::default()),
    }
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn budget(common: &Common, method: Option<Method>) -> Result<(), Failure> {
    let mut scenario = load(common.scenario.as_deref())?;
    if let Some(m) = method {
        scenario.method = m;
    }
    let report = run_point(&scenario).map_err(anyhow::Error::from)?;
    let text = if common.json {
        serde_json::to_string_pretty(&report).context("serializing report")? + "\n"
    } else {
        let mut s = String::new();
        let _ = writeln!(s, "los_distance_m       {:.3}", report.los_m);
        if let Some(w) = report.weather_slant_m {
            let _ = writeln!(s, "weather_slant_m      {w:.3}");
        }
        let _ = writeln!(s, "footprint_diameter_m {:.3}", report.footprint_diameter_m);
        let _ = writeln!(s, "fov_solid_angle_sr   {:.4e}", report.fov.solid_sr);
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<22}{:>12}{:>12}", "loss [dB]", "method1", "nanobob");
        let rows = report.method1.channel_components().into_iter().zip(report.nanobob.channel_components());
        for ((name, a), (_, b)) in rows {
            let _ = writeln!(s, "{name:<22}{a:>12.3}{b:>12.3}");
        }
        let _ = writeln!(s, "{:<22}{:>12.3}{:>12.3}", "channel_total", report.method1.channel_total, report.nanobob.channel_total);
        let _ = writeln!(s, "{:<22}{:>12.3}{:>12.3}", "receiver", report.method1.receiver, report.nanobob.receiver);
        let _ = writeln!(s, "{:<22}{:>12.3}{:>12.3}", "system_total", report.method1.system_total, report.nanobob.system_total);
        let _ = writeln!(s);
        let verdict = |ok: bool| if ok { "feasible" } else { "infeasible" };
        let dv = &report.dv;
        let _ = writeln!(
            s,
            "dv ({}): qber {} margin {:.3} dB -> {}",
            report.method.name(),
            dv.qber.map_or("undefined".to_string(), |q| format!("{q:.5}")),
            dv.margin_db,
            verdict(dv.feasible)
        );
        let cv = &report.cv;
        let _ = writeln!(
            s,
            "cv ({}): snr {:.5} margin {:.3} dB -> {}",
            report.method.name(),
            cv.snr.unwrap_or(f64::NAN),
            cv.margin_db,
            verdict(cv.feasible)
        );
        s
    };
    emit(common.out.as_deref(), &text)?;
    Ok(())
}

fn sweep(args: &SweepArgs) -> Result<(), Failure> {
    let scenario = load(args.common.scenario.as_deref())?;
    let spec = match (&args.figure, &args.var) {
        (Some(fig), _) => fig.spec(),
        (None, Some(var)) => {
            let scale = if args.log { Scale::Log } else { Scale::Linear };
            let grid = Grid::new(var, args.min.unwrap_or_default(), args.max.unwrap_or_default(), args.points.unwrap_or_default(), scale);
            SweepSpec::custom(grid, args.metric, &args.methods, &args.skies)
        }
        (None, None) => return Err(anyhow::anyhow!("give either --figure or --var/--min/--max/--points").into()),
    };
    let table: Table = run_sweep(&spec, &scenario).map_err(anyhow::Error::from)?;
    for (row, message) in &table.errors {
        eprintln!("warning: row {row}: {message}");
    }
    let text = if args.common.json { table.to_json() } else { table.to_csv() };
    emit(args.common.out.as_deref(), &text)?;
    Ok(())
}

fn feasibility(common: &Common, solve: Solve, protocol: Protocol, method: Option<Method>) -> Result<(), Failure> {
    let mut scenario = load(common.scenario.as_deref())?;
    if let Some(m) = method {
        scenario.method = m;
    }
    let name = match protocol {
        Protocol::Dv => "dv",
        Protocol::Cv => "cv",
    };
    let (value, text) = match solve {
        Solve::MaxLoss => {
            let loss = solve_max_loss(&scenario, protocol).map_err(anyhow::Error::from)?;
            let Some(loss) = loss else {
                return Err(Failure::Infeasible(format!("{name}: no channel loss is tolerable")));
            };
            (
                json!({"protocol": name, "max_loss_db": loss.is_finite().then_some(loss), "unbounded": loss.is_infinite()}),
                if loss.is_finite() { format!("{loss:.4} dB") } else { "unbounded".to_string() },
            )
        }
        Solve::MaxDivergence => match solve_max_divergence(&scenario, protocol).map_err(anyhow::Error::from)? {
            DivergenceSolution::NoSolution => {
                return Err(Failure::Infeasible(format!(
                    "{name}: infeasible even at the diffraction-limited divergence"
                )))
            }
            DivergenceSolution::Unbounded => (
                json!({"protocol": name, "method": scenario.method.name(), "max_divergence_rad": null, "unbounded": true}),
                "unbounded".to_string(),
            ),
            DivergenceSolution::Bounded(rad) => (
                json!({"protocol": name, "method": scenario.method.name(), "max_divergence_rad": rad, "unbounded": false}),
                format!("{:.4} mrad", rad * 1e3),
            ),
        },
    };
    let text = if common.json {
        serde_json::to_string_pretty(&value).context("serializing result")? + "\n"
    } else {
        format!("{text}\n")
    };
    emit(common.out.as_deref(), &text)?;
    Ok(())
}

fn list_catalog(filter: CatalogFilter, out: Option<&Path>, as_json: bool) -> anyhow::Result<()> {
    let records = catalog(&filter);
    let text = if as_json {
        serde_json::to_string_pretty(&records)? + "\n"
    } else {
        let mut s = String::from("class,name,company,altitude_km,payload_kg,payload_power_w\n");
        let num = |x: Option<f64>| x.map(hapqkd::harness::format_number).unwrap_or_default();
        for r in &records {
            let quote = |t: &str| if t.contains(',') { format!("\"{t}\"") } else { t.to_string() };
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.class.name(),
                quote(&r.name),
                quote(&r.company),
                num(r.altitude_km),
                num(r.payload_kg),
                num(r.payload_power_w)
            );
        }
        s
    };
    if records.is_empty() {
        eprintln!("no platforms match");
    }
    emit(out, &text)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Budget { common, method } => budget(&common, method),
        Command::Sweep(args) => sweep(&args),
        Command::Feasibility { common, solve, protocol, method } => feasibility(&common, solve, protocol, method),
        Command::Catalog { class, name, min_payload, out, json } => {
            if min_payload.is_some_and(|p| !p.is_finite()) {
                return Err(anyhow::anyhow!("--min-payload must be finite").into());
            }
            let filter = CatalogFilter { class, name, min_payload_kg: min_payload };
            Ok(list_catalog(filter, out.as_deref(), json)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Infeasible(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
