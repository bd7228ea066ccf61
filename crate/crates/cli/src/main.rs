//! `dqkd`: simulate and analyse the two-way d-ary QKD protocol.

mod output;

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use dqkd_core::analysis::{compare, fig2_table, fig3_table, odd_prime_powers, SecurityReport};
use dqkd_core::field::FieldSpec;
use dqkd_core::mub::build_mub;
use dqkd_core::protocol::Protocol;
use dqkd_core::{EveStrategy, ProtocolConfig, SessionStats};

use output::{open, sig12, write_json, Format, Table};

const MUB_THRESHOLD: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "dqkd", version, about = "Two-way deterministic d-ary QKD over mutually unbiased bases")]
struct Cli {
    /// Write results to FILE instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// Base seed for every random stream.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct FieldArgs {
    /// Odd prime characteristic.
    #[arg(long)]
    p: u32,
    /// Extension degree.
    #[arg(long, default_value_t = 1)]
    m: u32,
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long, default_value_t = 100_000)]
    rounds: u64,
    /// Probability that Alice runs a control round, in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    control_prob: f64,
    /// none, intercept-resend or controlled-shift.
    #[arg(long, default_value = "controlled-shift", value_parser = parse_eve)]
    eve: EveStrategy,
    /// Intercept-resend: draw a fresh basis on the backward path.
    #[arg(long)]
    independent_backward_basis: bool,
}

fn parse_eve(s: &str) -> Result<EveStrategy, String> {
    s.parse().map_err(|e: dqkd_core::Error| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Run a protocol session and report aggregate statistics.
    Simulate {
        #[command(flatten)]
        sim: SimArgs,
        /// Also write every round as newline-delimited JSON.
        #[arg(long, value_name = "FILE")]
        records: Option<PathBuf>,
    },
    /// Run a session and gate it against the closed forms at 3 sigma.
    Compare {
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Build the bases for GF(p^m) and certify them.
    MubCheck {
        #[command(flatten)]
        field: FieldArgs,
    },
    /// Print the addition and multiplication tables of GF(p^m).
    FieldTable {
        #[command(flatten)]
        field: FieldArgs,
    },
    /// Detection probability per control round against d.
    Fig2 {
        /// Comma-separated odd prime powers; defaults to all up to 49.
        #[arg(long, value_delimiter = ',')]
        d_list: Vec<u64>,
    },
    /// Eavesdropping success probability against eavesdropped bits.
    Fig3 {
        #[arg(long, default_value_t = 0.5)]
        c: f64,
        /// Comma-separated odd prime powers; defaults to all up to 49.
        #[arg(long, value_delimiter = ',')]
        d_list: Vec<u64>,
        #[arg(long, default_value_t = 20.0)]
        max_bits: f64,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
    },
}

enum Failure {
    Usage(String),
    Io(io::Error),
    Gate,
}

impl From<dqkd_core::Error> for Failure {
    fn from(e: dqkd_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.into())
    }
}

fn default_d_list(d_list: &[u64]) -> Vec<u64> {
    if d_list.is_empty() {
        odd_prime_powers(3, 49)
    } else {
        d_list.to_vec()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Gate) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn config(sim: &SimArgs, seed: u64) -> ProtocolConfig {
    let mut cfg = ProtocolConfig::new(sim.field.p, sim.field.m, sim.control_prob, sim.eve, sim.rounds, seed);
    cfg.independent_backward_basis = sim.independent_backward_basis;
    cfg
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Simulate { sim, records } => simulate(&config(sim, cli.seed), records.as_deref(), out, cli.format),
        Command::Compare { sim } => {
            let report = compare(&config(sim, cli.seed))?;
            emit_report(&report, out, cli.format)?;
            eprintln!("{}", if report.pass { "PASS" } else { "FAIL" });
            if report.pass {
                Ok(())
            } else {
                Err(Failure::Gate)
            }
        }
        Command::MubCheck { field } => mub_check(field, out, cli.format),
        Command::FieldTable { field } => field_table(field, out, cli.format),
        Command::Fig2 { d_list } => {
            let ds = default_d_list(d_list);
            let rows = fig2_table(&ds)?;
            let mut w = open(out)?;
            match cli.format {
                Format::Json => write_json(&rows, &mut w)?,
                Format::Csv => {
                    let mut t = Table::new(["d", "detection_probability"]);
                    for r in &rows {
                        t.row([r.d.to_string(), sig12(r.detection_probability)]);
                    }
                    t.write_to(&mut w)?;
                }
            }
            w.flush()?;
            Ok(())
        }
        Command::Fig3 { c, d_list, max_bits, step } => {
            let ds = default_d_list(d_list);
            let rows = fig3_table(*c, &ds, *max_bits, *step)?;
            let mut w = open(out)?;
            match cli.format {
                Format::Json => write_json(&rows, &mut w)?,
                Format::Csv => {
                    let mut t = Table::new(["d", "c", "info_bits", "success_probability"]);
                    for r in &rows {
                        t.row([r.d.to_string(), sig12(r.c), sig12(r.info_bits), sig12(r.success_probability)]);
                    }
                    t.write_to(&mut w)?;
                }
            }
            w.flush()?;
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct SimulationSummary<'a> {
    config: &'a ProtocolConfig,
    stats: &'a SessionStats,
}

fn opt(x: Option<f64>) -> String {
    x.map(sig12).unwrap_or_default()
}

fn simulate(cfg: &ProtocolConfig, records: Option<&Path>, out: Option<&Path>, format: Format) -> Result<(), Failure> {
    let session = Protocol::new(cfg.clone())?.run_session()?;
    if let Some(path) = records {
        let mut w = open(Some(path))?;
        for r in &session.records {
            serde_json::to_writer(&mut w, r)?;
            writeln!(w)?;
        }
        w.flush()?;
    }
    let s = &session.stats;
    let mut w = open(out)?;
    match format {
        Format::Json => write_json(&SimulationSummary { config: cfg, stats: s }, &mut w)?,
        Format::Csv => {
            let mut t = Table::new([
                "p", "m", "d", "eve", "control_prob", "rounds", "seed", "control_rounds", "message_rounds",
                "detections", "detection_rate", "detection_std_err", "decode_accuracy", "eve_correct_fraction",
                "eve_information_bits",
            ]);
            t.row([
                cfg.p.to_string(),
                cfg.m.to_string(),
                s.d.to_string(),
                cfg.eve.to_string(),
                sig12(cfg.control_prob),
                s.total_rounds.to_string(),
                cfg.seed.to_string(),
                s.control_rounds.to_string(),
                s.message_rounds.to_string(),
                s.detections.to_string(),
                sig12(s.detection_rate),
                sig12(s.detection_std_err),
                sig12(s.decode_accuracy),
                opt(s.eve_correct_fraction),
                opt(s.eve_information_bits),
            ]);
            t.write_to(&mut w)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn emit_report(report: &SecurityReport, out: Option<&Path>, format: Format) -> Result<(), Failure> {
    let mut w = open(out)?;
    match format {
        Format::Json => write_json(report, &mut w)?,
        Format::Csv => {
            let mut t = Table::new(["d", "eve", "check", "expected", "observed", "tolerance", "pass"]);
            for c in &report.checks {
                t.row([
                    report.d.to_string(),
                    report.eve.to_string(),
                    c.name.clone(),
                    sig12(c.expected),
                    sig12(c.observed),
                    sig12(c.tolerance),
                    c.pass.to_string(),
                ]);
            }
            t.write_to(&mut w)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct MubCheck {
    d: usize,
    p: u32,
    m: u32,
    deviation: f64,
    threshold: f64,
    pass: bool,
}

fn mub_check(field: &FieldArgs, out: Option<&Path>, format: Format) -> Result<(), Failure> {
    let spec = FieldSpec::new(field.p, field.m)?;
    let deviation = build_mub(&spec)?.deviation();
    let check = MubCheck {
        d: spec.order(),
        p: spec.p(),
        m: spec.m(),
        deviation,
        threshold: MUB_THRESHOLD,
        pass: deviation < MUB_THRESHOLD,
    };
    let mut w = open(out)?;
    match format {
        Format::Json => write_json(&check, &mut w)?,
        Format::Csv => {
            let mut t = Table::new(["d", "p", "m", "deviation", "threshold", "pass"]);
            t.row([
                check.d.to_string(),
                check.p.to_string(),
                check.m.to_string(),
                format!("{:e}", check.deviation),
                format!("{:e}", check.threshold),
                check.pass.to_string(),
            ]);
            t.write_to(&mut w)?;
        }
    }
    w.flush()?;
    if check.pass {
        Ok(())
    } else {
        Err(Failure::Gate)
    }
}

#[derive(Serialize)]
struct FieldTables {
    p: u32,
    m: u32,
    d: usize,
    irreducible: Vec<u32>,
    addition: Vec<Vec<usize>>,
    multiplication: Vec<Vec<usize>>,
}

fn field_table(field: &FieldArgs, out: Option<&Path>, format: Format) -> Result<(), Failure> {
    let spec = FieldSpec::new(field.p, field.m)?;
    let tables = FieldTables {
        p: spec.p(),
        m: spec.m(),
        d: spec.order(),
        irreducible: spec.irreducible().to_vec(),
        addition: spec.addition_table(),
        multiplication: spec.multiplication_table(),
    };
    let mut w = open(out)?;
    match format {
        Format::Json => write_json(&tables, &mut w)?,
        Format::Csv => {
            // two blocks; the corner cell names the operation
            for (i, (op, table)) in [("+", &tables.addition), ("*", &tables.multiplication)].into_iter().enumerate() {
                if i > 0 {
                    writeln!(w)?;
                }
                let mut t = Table::new(std::iter::once(op.to_string()).chain((0..tables.d).map(|j| j.to_string())));
                for (a, row) in table.iter().enumerate() {
                    t.row(std::iter::once(a.to_string()).chain(row.iter().map(|x| x.to_string())));
                }
                t.write_to(&mut w)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
