use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use optoqht::csl::{csl_occupation, csl_rate, CslParams, CslQuadrature, DEFAULT_R_C};
use optoqht::experiments::{emit_csv, preset, run_scenario, ScenarioConfig, TimeGrid};
use optoqht::model::{cavity_amplitude, derived_coupling};
use optoqht::{validate, Result, SystemParams};

#[derive(Parser)]
#[command(name = "optoqht", version, about = "Quantum hypothesis testing of collapse-model heating in levitated optomechanics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output CSV path; the JSON sidecar goes next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed recorded in the metadata sidecar.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Time grid override: t_min,t_max,points,log|lin
    #[arg(long, global = true, value_parser = parse_grid)]
    grid: Option<TimeGrid>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a TOML file.
    Run { config: PathBuf },
    /// Run a built-in figure scenario.
    Preset { name: String },
    /// Collapse-induced heating rate of a homogeneous sphere.
    CslRate {
        /// Collapse rate parameter γ in m³/s.
        #[arg(long, default_value_t = optoqht::csl::ADLER_GAMMA)]
        gamma: f64,
        /// Correlation length r_C in m.
        #[arg(long, default_value_t = DEFAULT_R_C)]
        r_c: f64,
        /// Sphere radius in m (default: reference set-up).
        #[arg(long)]
        radius: Option<f64>,
        /// Sphere mass in kg (default: reference set-up).
        #[arg(long)]
        mass: Option<f64>,
        /// Mechanical angular frequency in rad/s (default: reference set-up).
        #[arg(long)]
        omega_m: Option<f64>,
        /// Multiply the rate by 2π (Hz read as an angular rate).
        #[arg(long)]
        two_pi: bool,
    },
    /// Run the oracle and behaviour checks.
    Validate,
}

fn parse_grid(s: &str) -> std::result::Result<TimeGrid, String> {
    TimeGrid::parse(s).map_err(|e| e.to_string())
}

fn write_sweep(cfg: &ScenarioConfig, source: &str, default_name: &str, cli: &Cli) -> Result<()> {
    let result = run_scenario(cfg)?;
    let path = cli.out.clone().unwrap_or_else(|| PathBuf::from(format!("{default_name}.csv")));
    let side = emit_csv(&result, cfg, source, cli.seed, &path)?;
    eprintln!(
        "wrote {} rows ({} flagged) to {} and {}",
        result.rows.len(),
        result.flagged(),
        path.display(),
        side.display()
    );
    Ok(())
}

fn with_grid(mut cfg: ScenarioConfig, grid: Option<TimeGrid>) -> Result<ScenarioConfig> {
    if let Some(g) = grid {
        cfg.grid = g;
        cfg.validate()?;
    }
    Ok(cfg)
}

fn csl_report(csl: CslParams, omega_m: f64, two_pi: bool, p: &SystemParams) -> Result<()> {
    let rate = csl_rate(&csl, omega_m, two_pi, CslQuadrature::default())?;
    let alpha = cavity_amplitude(p);
    let coupling = derived_coupling(p);
    let n_th = p.thermal_occupation();
    println!("delta_csl_rad_s = {:.6e}", rate.delta);
    println!("log10_delta     = {:.4}", rate.delta.log10());
    println!("quad_error      = {:.3e}", rate.quad_error);
    println!("quad_intervals  = {}", rate.intervals);
    println!("k_max_per_m     = {:.3e}", rate.k_max);
    println!("two_pi_factor   = {two_pi}");
    println!("alpha_sq        = {:.6e}", alpha * alpha);
    println!("g_rad_s         = {:.6e}", coupling.g);
    println!("n_th            = {:.6e}", n_th);
    println!("thermal_diff    = {:.6e}", p.thermal_diffusion());
    println!("n_csl           = {:.6e}", csl_occupation(n_th, rate.delta, p.gamma_m)?);
    Ok(())
}

fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Run { config } => {
            let cfg = with_grid(ScenarioConfig::from_file(config)?, cli.grid)?;
            let stem = config.file_stem().and_then(|s| s.to_str()).unwrap_or("run").to_string();
            write_sweep(&cfg, &config.display().to_string(), &stem, cli)?;
        }
        Command::Preset { name } => {
            let cfg = with_grid(preset(name)?, cli.grid)?;
            write_sweep(&cfg, &format!("preset:{name}"), name, cli)?;
        }
        Command::CslRate { gamma, r_c, radius, mass, omega_m, two_pi } => {
            let p = SystemParams::table1();
            let csl = CslParams {
                gamma_csl: *gamma,
                r_c: *r_c,
                sphere_radius: radius.unwrap_or(p.sphere_radius),
                mass: mass.unwrap_or(p.mass),
            };
            csl_report(csl, omega_m.unwrap_or(p.omega_m), *two_pi, &p)?;
        }
        Command::Validate => {
            let mut all = true;
            for check in validate::full_suite(cli.grid) {
                println!("{}", check.line());
                all &= check.passed;
            }
            return Ok(all);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

