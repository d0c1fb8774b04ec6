//! `nonherm`: run the two-level scenarios and the verification suite.

use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nonherm::experiments::{
    exit_code, parse_methods, parse_reals, run_scenario, write_csv, ConfigOverrides, Scenario,
    ScenarioConfig,
};
use nonherm::verify::{verify_with, VerifyOptions};
use nonherm::Error;

#[derive(Parser)]
#[command(name = "nonherm", version, about = "Non-Hermitian two-level dynamics: metric, no-jump and master-equation observables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// H = omega sigma_z with decay from the excited state
    ModelA(RunArgs),
    /// H = omega sigma_x with decay from the excited state
    ModelB(RunArgs),
    /// Momentum modes H_k = k sigma_x + i gamma sigma_y + t sigma_z
    Sweep(RunArgs),
    /// Run the acceptance checks; exit status 1 if any fails
    Verify(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON file with any ScenarioConfig fields; flags take precedence
    #[arg(long, value_name = "FILE")]
    config: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    omega: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    dt: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t_max: Option<f64>,
    /// Sweep start time
    #[arg(long, allow_negative_numbers = true)]
    t_start: Option<f64>,
    /// bloch:x,y,z or amp:re,im,re,im (excited amplitude first)
    #[arg(long, allow_hyphen_values = true)]
    initial: Option<String>,
    /// Comma-separated subset of metric,me,nj,closed_form
    #[arg(long)]
    methods: Option<String>,
    /// Comma-separated momenta, symmetric about zero
    #[arg(long, allow_hyphen_values = true)]
    k_grid: Option<String>,
    /// Keep every n-th integration step
    #[arg(long)]
    sample_every: Option<usize>,
    /// Output file; stdout if absent
    #[arg(long)]
    out: Option<String>,
}

impl RunArgs {
    fn overrides(&self) -> Result<ConfigOverrides, Error> {
        Ok(ConfigOverrides {
            scenario: None,
            omega: self.omega,
            gamma: self.gamma,
            dt: self.dt,
            t_max: self.t_max,
            t_start: self.t_start,
            initial: self.initial.as_deref().map(str::parse).transpose()?,
            methods: self.methods.as_deref().map(parse_methods).transpose()?,
            k_grid: self.k_grid.as_deref().map(|s| parse_reals("k_grid", s)).transpose()?,
            ramp_rate: None,
            sample_every: self.sample_every,
            out_path: self.out.clone(),
        })
    }

    fn resolve(&self, scenario: Scenario) -> Result<ScenarioConfig, Error> {
        let mut cfg = ScenarioConfig::defaults(scenario);
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::config("config", format!("cannot read {path}: {e}")))?;
            cfg.apply(&ConfigOverrides::from_json(&text)?)?;
        }
        cfg.apply(&self.overrides()?)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn open_output(path: Option<&str>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(
            fs::File::create(p).map_err(|e| Error::config("out", format!("cannot create {p}: {e}")))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<i32, Error> {
    let (scenario, args) = match &cli.command {
        Command::ModelA(a) => (Scenario::ModelA, a),
        Command::ModelB(a) => (Scenario::ModelB, a),
        Command::Sweep(a) => (Scenario::Sweep, a),
        Command::Verify(a) => (Scenario::Verify, a),
    };
    let cfg = args.resolve(scenario)?;
    let write_err = |e: io::Error| Error::config("out", e.to_string());

    if scenario == Scenario::Verify {
        let report = verify_with(&VerifyOptions {
            dt: cfg.dt,
            ..VerifyOptions::default()
        });
        let mut out = open_output(cfg.out_path.as_deref())?;
        writeln!(out, "{report}").map_err(write_err)?;
        out.flush().map_err(write_err)?;
        return Ok(if report.passed() { 0 } else { 1 });
    }

    // nothing is written unless the run succeeds
    let result = run_scenario(&cfg)?;
    let mut out = open_output(cfg.out_path.as_deref())?;
    write_csv(&mut out, &result.metadata, &result.rows).map_err(|e| Error::config("out", e.to_string()))?;
    out.flush().map_err(write_err)?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("nonherm: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
