//! `attitude`: batch front end for the observer harness.
//!
//! Exit codes: 0 success, 1 configuration or I/O problem, 2 violated
//! trajectory assumptions or in-run guard trips (degenerate sensor
//! directions, hybrid livelock). An unsatisfied gain certificate is a
//! report, not a failure, and exits 0.

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use harness_cli::{
    emit_plots, evaluate_certificate, extract_constants, mu_cap, run_scenario, write_csv,
    Certificate, HarnessError, Mode, ScenarioConfig, TrajectoryConstants,
};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "attitude", version, about = "Attitude observer simulation harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured scenario and write CSV telemetry.
    Simulate {
        /// Scenario configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Override sim.mode (continuous | hybrid | hua2010 | roberts2011).
        #[arg(long)]
        mode: Option<String>,
        /// Override the CSV output path (default: sim.out, else telemetry.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the gain certificate for a configured scenario.
    Certify {
        /// Scenario configuration file.
        #[arg(long)]
        config: PathBuf,
    },
    /// Extract trajectory constants and check standing assumptions.
    Constants {
        /// Scenario configuration file.
        #[arg(long)]
        config: PathBuf,
    },
    /// Render the standard SVG figures from a telemetry CSV.
    Plot {
        /// Telemetry CSV produced by `simulate`.
        #[arg(long)]
        csv: PathBuf,
        /// Output directory for the figures.
        #[arg(long, default_value = "plots")]
        out_dir: PathBuf,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                HarnessError::Hybrid(_) => 2,
                _ => 1,
            };
            std::process::exit(code);
        }
    }
}

fn run(cli: Cli) -> Result<i32, HarnessError> {
    match cli.command {
        Command::Simulate { config, mode, out } => simulate(config, mode, out),
        Command::Certify { config } => certify(config),
        Command::Constants { config } => constants(config),
        Command::Plot { csv, out_dir } => {
            let files = emit_plots(&csv, &out_dir)?;
            for f in &files {
                println!("wrote {}", f.display());
            }
            Ok(0)
        }
    }
}

fn simulate(
    config: PathBuf,
    mode: Option<String>,
    out: Option<PathBuf>,
) -> Result<i32, HarnessError> {
    let mut cfg = ScenarioConfig::from_file(&config)?;
    if let Some(m) = mode {
        cfg.mode = Mode::parse(&m)?;
    }
    if let Some(o) = out {
        cfg.out = Some(o);
    }
    let out_path = cfg.out.clone().unwrap_or_else(|| PathBuf::from("telemetry.csv"));

    let result = run_scenario(&cfg)?;
    write_csv(&out_path, &result.rows)?;
    let s = &result.summary;
    println!("mode: {}", s.mode.name());
    println!("samples: {} -> {}", s.rows, out_path.display());
    for e in &s.jump_events {
        println!(
            "jump at t = {:.3} s: axis [{:.3}, {:.3}, {:.3}], phi {:.4} -> {:.4}",
            e.t, e.axis.x, e.axis.y, e.axis.z, e.phi_before, e.phi_after
        );
    }
    if s.jump_events.is_empty() {
        println!("jumps: none");
    }
    println!("guard violations: {}", s.guard_violations);
    match s.time_to_one_degree {
        Some(t) => println!("attitude error < 1 deg from t = {t:.3} s"),
        None => println!("attitude error did not settle below 1 deg"),
    }
    println!(
        "final errors: attitude {:.6} deg, bias {:.6e} rad/s, accel {:.6e} m/s^2",
        s.final_attitude_error_deg, s.final_bias_error_norm, s.final_accel_error_norm
    );
    if s.guard_violations > 0 {
        eprintln!("warning: {} samples hit the measurement guard", s.guard_violations);
        return Ok(2);
    }
    Ok(0)
}

fn print_constants(tc: &TrajectoryConstants) {
    println!("trajectory constants:");
    println!("  c0 (cross-product conditioning) = {:.9}", tc.c0);
    println!("  c1 (min |r_a|)                  = {:.9}", tc.c1);
    println!("  c2 (max |r_a|)                  = {:.9}", tc.c2);
    println!("  c3 (max |d r_a / dt|)           = {:.9}", tc.c3);
    println!("  c4 (max |omega|)                = {:.9}", tc.c4);
    println!("  c5 (bias ball radius)           = {:.9}", tc.c5);
    println!("  c_a (surrogate drift bound)     = {:.9}", tc.c_a);
    println!("  c_b (adaptation rate bound)     = {:.9}", tc.c_b);
    println!("  lambda_min(A-bar)               = {:.9}", tc.lambda_min_abar);
    println!("  lambda_max(A-bar)               = {:.9}", tc.lambda_max_abar);
    if let Some(t) = tc.observability_violation {
        println!("  VIOLATED: magnetic field and apparent acceleration collinear at t = {t:.6}");
    }
    if let Some(t) = tc.accel_floor_violation {
        println!("  VIOLATED: apparent acceleration vanishes at t = {t:.6}");
    }
}

fn constants(config: PathBuf) -> Result<i32, HarnessError> {
    let cfg = ScenarioConfig::from_file(&config)?;
    let tc = extract_constants(&cfg.spec, cfg.sensors.r_m, cfg.gains.c5, cfg.grid_dt, cfg.t_end);
    print_constants(&tc);
    Ok(if tc.assumptions_hold() { 0 } else { 2 })
}

fn print_certificate(cert: &Certificate) {
    println!("certificate parameters:");
    println!("  eps_R = {:.6}, B_a = {:.6}, eps_a = {:.6}", cert.epsilon_r, cert.b_a, cert.epsilon_a);
    println!("  mu = {:.6e} (cap {:.6e})", cert.mu, cert.mu_max);
    println!("  |r_a(0) - r_a_hat(0)| = {:.6}", cert.r_a0_norm);
    println!("gain floors:");
    println!("  k_R  >= {:.6e}", cert.k_r_min);
    println!("  k_v  >= {:.6e}", cert.k_v_min);
    println!("dwell window:");
    println!("  t_R distance budget lasts >= {:.6e} s", cert.t_r_lower);
    if cert.t_a_upper.is_infinite() {
        println!("  acceleration error may never re-enter its band");
    } else {
        println!("  acceleration error re-enters its band by {:.6e} s", cert.t_a_upper);
    }
    println!("conditions:");
    for c in &cert.conditions {
        println!(
            "  [{}] {} (margin {:.6e})",
            if c.satisfied { "ok" } else { "violated" },
            c.name,
            c.margin
        );
    }
    println!("certificate satisfied: {}", if cert.satisfied { "yes" } else { "no" });
}

fn certify(config: PathBuf) -> Result<i32, HarnessError> {
    let cfg = ScenarioConfig::from_file(&config)?;
    let tc = extract_constants(&cfg.spec, cfg.sensors.r_m, cfg.gains.c5, cfg.grid_dt, cfg.t_end);
    print_constants(&tc);
    if !tc.assumptions_hold() {
        eprintln!("error: trajectory violates standing assumptions; certificate not evaluated");
        return Ok(2);
    }
    let mu = cfg.cert_mu.unwrap_or_else(|| 0.5 * mu_cap(&tc, cfg.cert_eps_r));
    let r_a0 = cfg.initial_accel_error_norm()?;
    let cert = evaluate_certificate(
        &tc,
        &cfg.gains,
        cfg.cert_eps_r,
        cfg.cert_b_a,
        cfg.cert_eps_a,
        mu,
        r_a0,
    );
    print_certificate(&cert);
    Ok(0)
}
