//! Batch front end: every subcommand builds one JSON report (NDJSON for
//! `trials`) that embeds the resolved config and seed.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use telegate::afcpulse::{
    comb_metrics, double_pass_transform, max_phase_jump, min_sample_rate, square_waveform,
    synth_prep_waveform, AfcPulseParams, AfcWaveform, CombMetrics, PulseVariant, SchroederRule,
};
use telegate::algo::{
    ipea_analytic, run_bell_states, run_deutsch_jozsa, run_ipea, Backend, DjResult, IpeaResult,
    OracleKind, PhaseUnitary, Shots,
};
use telegate::analysis::{
    bell_fidelity, bell_key, bundled_reference, compare_to_reference, error_bars_multi,
    ingest_reference, truth_table_fidelity, witness_from_counts, witness_real_elements,
    BellElements, ComparisonReport, CountsTable, ExperimentResults, Tolerances, TruthTable,
};
use telegate::config::{parse_config, ExperimentConfig};
use telegate::netsim::{
    memory_1e_time, memory_efficiency, mode_capacity, rate_budget, run_trials, throughput,
    validate_timing, RateBudget, Throughput, TimingReport, TrialTotals,
};
use telegate::qsim::{fidelity, MeasBasis, QuantumState};

pub const SCHEMA_VERSION: u32 = 1;

/// Resamples used for the error bars in reports.
const RESAMPLES: usize = 1000;

#[derive(Debug, Parser)]
#[command(name = "telegate", version, about = "Nonlocal gate network simulator")]
pub struct Cli {
    /// Experiment config (JSON); defaults are used when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Perfect source, no added noise, full correction.
    #[arg(long, global = true)]
    pub ideal: bool,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub shots: Option<u64>,
    /// Compare with reference fixtures (bundled, or a JSON file).
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "bundled", value_name = "FILE")]
    pub compare_reference: Option<String>,
    /// Also write the main table as CSV.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Timing and memory feasibility.
    Check,
    /// Four-input CNOT truth table.
    TruthTable,
    /// Bell states from separable inputs, read out with the witness.
    Bell,
    /// Two-qubit Deutsch–Jozsa.
    Dj {
        /// ID, NOT, CNOT or ZCNOT; all four when omitted.
        #[arg(long, value_parser = parse_oracle)]
        oracle: Option<OracleKind>,
        /// Exact probabilities instead of sampled shots.
        #[arg(long)]
        exact: bool,
    },
    /// Iterative phase estimation.
    Ipea {
        /// I, Z^s (e.g. Z^5/4) or turns:φ.
        #[arg(long)]
        u: String,
        #[arg(long, default_value_t = 3)]
        rounds: u32,
        #[arg(long)]
        exact: bool,
    },
    /// Loss budget per stage.
    Budget,
    /// Expected gate rate for a number of modes.
    Throughput {
        #[arg(long)]
        modes: Option<u64>,
    },
    /// AFC preparation waveforms.
    Pulse {
        #[command(subcommand)]
        command: PulseCommand,
    },
    /// Individual trial records as NDJSON.
    Trials,
}

#[derive(Debug, Subcommand)]
pub enum PulseCommand {
    Synth {
        #[arg(long, default_value_t = 64)]
        teeth: usize,
        /// Samples per second; four times the comb span when absent.
        #[arg(long)]
        sample_rate: Option<f64>,
        #[arg(long, value_enum, default_value_t = VariantArg::ComplexExponential)]
        variant: VariantArg,
        /// Read the Schroeder bracket as a floor.
        #[arg(long)]
        floor_phase: bool,
        /// Emit the double-pass modulator waveform.
        #[arg(long)]
        double_pass: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum VariantArg {
    RealSinWeighted,
    ComplexExponential,
    Flat,
}

impl From<VariantArg> for PulseVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::RealSinWeighted => PulseVariant::RealSinWeighted,
            VariantArg::ComplexExponential => PulseVariant::ComplexExponential,
            VariantArg::Flat => PulseVariant::Flat,
        }
    }
}

fn parse_oracle(s: &str) -> Result<OracleKind, String> {
    s.parse().map_err(|e: telegate::Error| e.to_string())
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(telegate::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Run(telegate::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Run(
                telegate::Error::Config(_) | telegate::Error::Parameter { .. } | telegate::Error::Schema { .. },
            ) => 2,
            _ => 1,
        }
    }
}

impl From<telegate::Error> for CliError {
    fn from(e: telegate::Error) -> Self {
        CliError::Run(e)
    }
}

/// Report text plus the exit code it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    pub report: String,
    pub csv: Option<String>,
    pub exit_code: i32,
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    seed: u64,
    ideal: bool,
    config: &'a ExperimentConfig,
    result: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison: Option<ComparisonReport>,
}

struct Ctx<'a> {
    cli: &'a Cli,
    cfg: ExperimentConfig,
    seed: u64,
}

impl Ctx<'_> {
    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    fn backend(&self) -> Result<Backend, CliError> {
        Ok(Backend::from_config(&self.cfg, self.cli.ideal)?)
    }

    fn report<T: Serialize>(&self, command: &str, result: T, comparison: Option<ComparisonReport>) -> Result<String, CliError> {
        let mut text = serde_json::to_string_pretty(&Report {
            schema_version: SCHEMA_VERSION,
            command,
            seed: self.seed,
            ideal: self.cli.ideal,
            config: &self.cfg,
            result,
            comparison,
        })?;
        text.push('\n');
        Ok(text)
    }

    fn compare(&self, results: ExperimentResults) -> Result<Option<ComparisonReport>, CliError> {
        let Some(src) = &self.cli.compare_reference else {
            return Ok(None);
        };
        let reference = if src == "bundled" {
            bundled_reference()
        } else {
            ingest_reference(src).map_err(CliError::Config)?
        };
        Ok(Some(compare_to_reference(&results, &reference, &Tolerances::default())))
    }
}

/// Resolves the config: file, then `--ideal`, `TELEGATE_SEED`, `--seed` and `--shots`.
pub fn resolve_config(cli: &Cli, env_seed: Option<&str>) -> Result<(ExperimentConfig, u64), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => parse_config(path).map_err(CliError::Config)?,
        None => ExperimentConfig::default(),
    };
    if cli.ideal {
        cfg.make_ideal();
    }
    if let Some(s) = env_seed.filter(|s| !s.trim().is_empty()) {
        cfg.seed = s
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("TELEGATE_SEED is not an unsigned integer: `{s}`")))?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(shots) = cli.shots {
        cfg.shots = shots;
    }
    cfg.validate().map_err(CliError::Config)?;
    let seed = cfg.seed;
    Ok((cfg, seed))
}

/// Runs the parsed command without touching stdout or files.
pub fn execute(cli: &Cli, env_seed: Option<&str>) -> Result<Execution, CliError> {
    let (cfg, seed) = resolve_config(cli, env_seed)?;
    let ctx = Ctx { cli, cfg, seed };
    if cli.compare_reference.is_some()
        && !matches!(
            cli.command,
            Command::TruthTable | Command::Bell | Command::Dj { .. } | Command::Ipea { .. }
        )
    {
        return Err(CliError::Usage(
            "--compare-reference applies to truth-table, bell, dj and ipea".into(),
        ));
    }
    let (report, csv, comparison_failed, check_failed) = match &cli.command {
        Command::Check => {
            let r = check(&ctx)?;
            let failed = !r.timing.feasible;
            (ctx.report("check", r, None)?, None, false, failed)
        }
        Command::TruthTable => {
            let r = truth_table(&ctx)?;
            let cmp = ctx.compare(ExperimentResults {
                truth_table: Some(r.table.clone()),
                ..Default::default()
            })?;
            let failed = cmp.as_ref().is_some_and(|c| !c.pass);
            let csv = truth_table_csv(&r.table)?;
            (ctx.report("truth-table", r, cmp)?, Some(csv), failed, false)
        }
        Command::Bell => {
            let r = bell(&ctx)?;
            let cmp = ctx.compare(ExperimentResults {
                bell_fidelities: Some(r.iter().map(|b| (b.state.to_string(), b.fidelity)).collect()),
                ..Default::default()
            })?;
            let failed = cmp.as_ref().is_some_and(|c| !c.pass);
            let csv = bell_csv(&r)?;
            (ctx.report("bell", r, cmp)?, Some(csv), failed, false)
        }
        Command::Dj { oracle, exact } => {
            let r = dj(&ctx, *oracle, *exact)?;
            let cmp = ctx.compare(ExperimentResults {
                dj_p_h: Some(r.iter().map(|d| (d.oracle.name().to_string(), d.p_h)).collect()),
                ..Default::default()
            })?;
            let failed = cmp.as_ref().is_some_and(|c| !c.pass);
            let csv = dj_csv(&r)?;
            (ctx.report("dj", r, cmp)?, Some(csv), failed, false)
        }
        Command::Ipea { u, rounds, exact } => {
            let r = ipea(&ctx, u, *rounds, *exact)?;
            let cmp = ctx.compare(ExperimentResults {
                ipea_p0: Some(BTreeMap::from([(u.clone(), r.run.per_round_prob0.clone())])),
                ..Default::default()
            })?;
            let failed = cmp.as_ref().is_some_and(|c| !c.pass);
            let csv = ipea_csv(&r.run)?;
            (ctx.report("ipea", r, cmp)?, Some(csv), failed, false)
        }
        Command::Budget => {
            let r = rate_budget(&ctx.cfg.losses, &ctx.cfg)?;
            let csv = budget_csv(&r)?;
            (ctx.report("budget", r, None)?, Some(csv), false, false)
        }
        Command::Throughput { modes } => {
            let r: Throughput = throughput(&ctx.cfg, modes.unwrap_or(ctx.cfg.n_modes))?;
            (ctx.report("throughput", r, None)?, None, false, false)
        }
        Command::Pulse {
            command:
                PulseCommand::Synth {
                    teeth,
                    sample_rate,
                    variant,
                    floor_phase,
                    double_pass,
                },
        } => {
            let (r, wave) = pulse_synth(*teeth, *sample_rate, (*variant).into(), *floor_phase, *double_pass)?;
            let csv = waveform_csv(&wave)?;
            (ctx.report("pulse synth", r, None)?, Some(csv), false, false)
        }
        Command::Trials => (trials(&ctx)?, None, false, false),
    };
    let exit_code = if comparison_failed {
        3
    } else if check_failed {
        1
    } else {
        0
    };
    Ok(Execution {
        report,
        csv,
        exit_code,
    })
}

/// Executes and writes outputs; returns the process exit code.
pub fn run(cli: &Cli, env_seed: Option<&str>) -> i32 {
    let result = execute(cli, env_seed).and_then(|ex| {
        match &cli.out {
            Some(path) => std::fs::write(path, &ex.report)?,
            None => print!("{}", ex.report),
        }
        if let Some(path) = &cli.csv {
            match &ex.csv {
                Some(text) => std::fs::write(path, text)?,
                None => return Err(CliError::Usage("this command has no CSV table".into())),
            }
        }
        Ok(ex.exit_code)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("telegate: {e}");
            e.exit_code()
        }
    }
}

// ---------------------------------------------------------------------------
// commands

#[derive(Debug, Serialize)]
pub struct CheckResult {
    pub timing: TimingReport,
    pub memory_efficiency: f64,
    pub memory_1e_time_us: f64,
    pub mode_capacity: u64,
}

fn check(ctx: &Ctx) -> Result<CheckResult, CliError> {
    let mem = &ctx.cfg.memory;
    Ok(CheckResult {
        timing: validate_timing(&ctx.cfg),
        memory_efficiency: memory_efficiency(mem.storage_time_us, mem)?,
        memory_1e_time_us: memory_1e_time(mem),
        mode_capacity: mode_capacity(mem)?,
    })
}

#[derive(Debug, Serialize)]
pub struct TruthTableResult {
    pub table: TruthTable,
    pub fidelity_error: f64,
    pub max_deviation_from_ideal: f64,
    pub totals: TrialTotals,
    pub counts: Vec<CountsTable>,
}

/// Loss sampling is switched off: the table is conditioned on detection.
fn truth_table(ctx: &Ctx) -> Result<TruthTableResult, CliError> {
    let mut cfg = ctx.cfg.clone();
    cfg.losses.sample = false;
    let run = run_trials(&cfg, cfg.shots, ctx.seed)?;
    let table = truth_table_fidelity(&run.counts)?;
    let fidelity_error = error_bars_multi(
        &run.counts,
        |ts| truth_table_fidelity(ts).map_or(f64::NAN, |t| t.fidelity),
        RESAMPLES,
        &mut ctx.rng(),
    )?;
    Ok(TruthTableResult {
        max_deviation_from_ideal: table.max_deviation_from_ideal()?,
        table,
        fidelity_error,
        totals: run.totals,
        counts: run.counts,
    })
}

#[derive(Debug, Serialize)]
pub struct BellResult {
    pub input: String,
    pub state: &'static str,
    pub kept_probability: f64,
    pub fidelity: f64,
    pub fidelity_error: f64,
    pub exact_fidelity: f64,
    pub elements: BellElements,
    pub counts: Vec<CountsTable>,
}

fn sample_setting(
    state: &QuantumState,
    bases: [MeasBasis; 2],
    name: &str,
    shots: u64,
    rng: &mut ChaCha8Rng,
) -> Result<CountsTable, CliError> {
    let dist = state.outcome_probabilities(&bases)?;
    let mut table = CountsTable::new(name);
    for _ in 0..shots {
        table.add(&dist.label(dist.sample(rng)));
    }
    Ok(table)
}

fn bell(ctx: &Ctx) -> Result<Vec<BellResult>, CliError> {
    let backend = ctx.backend()?;
    let shots = ctx.cfg.shots;
    let mut rng = ctx.rng();
    // B4 is written first
    let (first, second) = (1, 0);
    run_bell_states(&backend)?
        .into_iter()
        .map(|run| {
            let zz = sample_setting(&run.state, [MeasBasis::z(first), MeasBasis::z(second)], "zz", shots, &mut rng)?;
            let xx = sample_setting(&run.state, [MeasBasis::x(first), MeasBasis::x(second)], "xx", shots, &mut rng)?;
            let yy = sample_setting(&run.state, [MeasBasis::y(first), MeasBasis::y(second)], "yy", shots, &mut rng)?;
            let elements = witness_real_elements(&witness_from_counts(&zz, &xx, &yy)?)?;
            let target = run.target;
            let counts = vec![zz, xx, yy];
            let fidelity_error = error_bars_multi(
                &counts,
                |ts| {
                    witness_from_counts(&ts[0], &ts[1], &ts[2])
                        .and_then(|w| witness_real_elements(&w))
                        .map_or(f64::NAN, |e| bell_fidelity(&e, target))
                },
                RESAMPLES,
                &mut rng,
            )?;
            let ideal = QuantumState::bell(target, &["B4@pol", "A1@pol"])?.permuted(&[1, 0])?;
            Ok(BellResult {
                input: run.input.to_string(),
                state: bell_key(target),
                kept_probability: run.kept_probability,
                fidelity: bell_fidelity(&elements, target),
                fidelity_error,
                exact_fidelity: fidelity(&run.state, &ideal)?,
                elements,
                counts,
            })
        })
        .collect()
}

fn dj(ctx: &Ctx, oracle: Option<OracleKind>, exact: bool) -> Result<Vec<DjResult>, CliError> {
    let backend = ctx.backend()?;
    let shots = if exact { Shots::Infinite } else { Shots::Finite(ctx.cfg.shots) };
    let mut rng = ctx.rng();
    let kinds: Vec<OracleKind> = oracle.map_or(OracleKind::ALL.to_vec(), |k| vec![k]);
    Ok(kinds
        .into_iter()
        .map(|k| run_deutsch_jozsa(k, &backend, shots, &mut rng))
        .collect::<telegate::Result<_>>()?)
}

#[derive(Debug, Serialize)]
pub struct IpeaReport {
    pub u: String,
    #[serde(flatten)]
    pub run: IpeaResult,
    /// Correct-bit probabilities in execution order (least significant first).
    pub analytic_round_probabilities: Vec<f64>,
}

fn ipea(ctx: &Ctx, u: &str, rounds: u32, exact: bool) -> Result<IpeaReport, CliError> {
    let unitary: PhaseUnitary = u.parse().map_err(|e: telegate::Error| CliError::Usage(e.to_string()))?;
    let backend = ctx.backend()?;
    let shots = if exact { Shots::Infinite } else { Shots::Finite(ctx.cfg.shots) };
    let run = run_ipea(unitary, rounds, &backend, shots, &mut ctx.rng())?;
    Ok(IpeaReport {
        u: u.to_string(),
        analytic_round_probabilities: ipea_analytic(run.phi_turns, rounds)?,
        run,
    })
}

#[derive(Debug, Serialize)]
pub struct DoublePassReport {
    pub max_phase_jump_rad: f64,
    pub round_trip_deviation: f64,
}

#[derive(Debug, Serialize)]
pub struct PulseReport {
    pub params: AfcPulseParams,
    pub variant: PulseVariant,
    pub sample_rate: f64,
    pub n_samples: usize,
    pub peak_before_normalization: f64,
    pub metrics: CombMetrics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub double_pass: Option<DoublePassReport>,
}

fn pulse_synth(
    teeth: usize,
    sample_rate: Option<f64>,
    variant: PulseVariant,
    floor_phase: bool,
    double_pass: bool,
) -> Result<(PulseReport, AfcWaveform), CliError> {
    let params = AfcPulseParams {
        schroeder: if floor_phase { SchroederRule::Floor } else { SchroederRule::Continuous },
        ..AfcPulseParams::toy(teeth)
    };
    params.validate()?;
    let rate = sample_rate.unwrap_or_else(|| min_sample_rate(&params));
    let wave = synth_prep_waveform(&params, rate, variant)?;
    let metrics = comb_metrics(&wave)?;
    let (dp, out) = if double_pass {
        let d = double_pass_transform(&wave);
        let back = square_waveform(&d);
        let dev = back
            .samples
            .iter()
            .zip(&wave.samples)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        (
            Some(DoublePassReport {
                max_phase_jump_rad: max_phase_jump(&d),
                round_trip_deviation: dev,
            }),
            d,
        )
    } else {
        (None, wave.clone())
    };
    Ok((
        PulseReport {
            params,
            variant,
            sample_rate: rate,
            n_samples: wave.samples.len(),
            peak_before_normalization: wave.peak_before_normalization,
            metrics,
            double_pass: dp,
        },
        out,
    ))
}

#[derive(Serialize)]
struct TrialsSummary<'a> {
    totals: TrialTotals,
    counts: &'a [CountsTable],
}

fn trials(ctx: &Ctx) -> Result<String, CliError> {
    let run = run_trials(&ctx.cfg, ctx.cfg.shots, ctx.seed)?;
    let header = Report {
        schema_version: SCHEMA_VERSION,
        command: "trials",
        seed: ctx.seed,
        ideal: ctx.cli.ideal,
        config: &ctx.cfg,
        result: TrialsSummary {
            totals: run.totals,
            counts: &run.counts,
        },
        comparison: None,
    };
    let mut out = serde_json::to_string(&header)?;
    out.push('\n');
    for rec in &run.records {
        out.push_str(&serde_json::to_string(rec)?);
        out.push('\n');
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// CSV

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn truth_table_csv(t: &TruthTable) -> Result<String, CliError> {
    let mut header = vec!["input"];
    header.extend(t.outputs.iter().map(String::as_str));
    let rows = t
        .inputs
        .iter()
        .zip(&t.probabilities)
        .map(|(i, row)| std::iter::once(i.clone()).chain(row.iter().map(f64::to_string)).collect())
        .collect();
    csv_text(&header, rows)
}

fn bell_csv(r: &[BellResult]) -> Result<String, CliError> {
    csv_text(
        &["input", "state", "fidelity", "fidelity_error", "exact_fidelity"],
        r.iter()
            .map(|b| {
                vec![
                    b.input.clone(),
                    b.state.to_string(),
                    b.fidelity.to_string(),
                    b.fidelity_error.to_string(),
                    b.exact_fidelity.to_string(),
                ]
            })
            .collect(),
    )
}

fn dj_csv(r: &[DjResult]) -> Result<String, CliError> {
    csv_text(
        &["oracle", "p_h", "p_v", "correct"],
        r.iter()
            .map(|d| vec![d.oracle.to_string(), d.p_h.to_string(), d.p_v.to_string(), d.correct.to_string()])
            .collect(),
    )
}

fn ipea_csv(r: &IpeaResult) -> Result<String, CliError> {
    csv_text(
        &["bit", "value", "p0", "p1"],
        r.bits
            .iter()
            .zip(&r.per_round_prob0)
            .enumerate()
            .map(|(j, (b, p))| vec![(j + 1).to_string(), b.to_string(), p.to_string(), (1.0 - p).to_string()])
            .collect(),
    )
}

fn budget_csv(b: &RateBudget) -> Result<String, CliError> {
    csv_text(
        &["stage", "role", "probability", "cumulative"],
        b.stages
            .iter()
            .map(|s| {
                let role = serde_json::to_value(s.role)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default();
                vec![s.name.clone(), role, s.probability.to_string(), s.cumulative.to_string()]
            })
            .collect(),
    )
}

fn waveform_csv(w: &AfcWaveform) -> Result<String, CliError> {
    csv_text(
        &["t", "re", "im"],
        w.samples
            .iter()
            .enumerate()
            .map(|(i, z)| vec![w.time(i).to_string(), z.re.to_string(), z.im.to_string()])
            .collect(),
    )
}
