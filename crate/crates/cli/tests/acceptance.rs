//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

use std::time::{Duration, Instant};

use clap::Parser;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use telegate::afcpulse::{
    comb_metrics, double_pass_transform, min_sample_rate, square_waveform, synth_prep_waveform,
    AfcPulseParams, PulseVariant,
};
use telegate::algo::{
    binary_digits, feedback_angle, ipea_analytic, ipea_iteration, run_deutsch_jozsa, run_ipea,
    Backend, NoiseModel, OracleKind, PhaseUnitary, Shots,
};
use telegate::analysis::{
    bell_fidelity, bundled_reference, fidelity_from_visibilities, snr_to_noise_fraction,
    truth_table_fidelity, BellElements, CountsTable,
};
use telegate::config::ExperimentConfig;
use telegate::netsim::{
    memory_1e_time, memory_efficiency, mode_capacity, run_trials, throughput, validate_timing,
    MemoryParams,
};
use telegate::photon::{make_entangled_pair, SourceParams};
use telegate::qsim::{fidelity, BellState, GateSpec, Mat2, QuantumState, C64};
use telegate::teleport::{teleported_cnot, teleported_cu, TeleportMode};
use telegate_cli::{execute, Cli};

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_c64(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0)
}

fn random_unitary(rng: &mut ChaCha8Rng) -> Mat2 {
    let a: f64 = rng.random::<f64>() * std::f64::consts::TAU;
    let b: f64 = rng.random::<f64>() * std::f64::consts::TAU;
    let c: f64 = rng.random::<f64>() * std::f64::consts::TAU;
    let t: f64 = rng.random::<f64>() * std::f64::consts::PI;
    let (s, co) = (t / 2.0).sin_cos();
    let g = C64::from_polar(1.0, a);
    Mat2::new(
        g * C64::from_polar(co, b),
        -g * C64::from_polar(s, c),
        g * C64::from_polar(s, -c),
        g * C64::from_polar(co, -b),
    )
}

fn ideal_epr() -> QuantumState {
    QuantumState::bell(BellState::PhiPlus, &["A2@path", "B3@path"]).unwrap()
}

fn oracle_equivalence() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let epr = ideal_epr();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let amps = (0..4).map(|_| random_c64(&mut rng)).collect();
        let input = QuantumState::normalized(amps, &["A1@pol", "B4@pol"]).map_err(|e| e.to_string())?;
        let out = teleported_cnot(&input, &epr, TeleportMode::FullCorrection, &mut rng).map_err(|e| e.to_string())?;
        let mut direct = input.clone();
        direct.apply_gate(&GateSpec::cnot(1, 0)).map_err(|e| e.to_string())?;
        let got = out.state.ok_or("branch discarded")?;
        worst = worst.max(got.distance(&direct).map_err(|e| e.to_string())?);
    }
    let mut worst_u: f64 = 0.0;
    for _ in 0..20 {
        let u = random_unitary(&mut rng);
        for _ in 0..5 {
            let amps = (0..4).map(|_| random_c64(&mut rng)).collect();
            let input = QuantumState::normalized(amps, &["A1@pol", "B4@pol"]).map_err(|e| e.to_string())?;
            let out = teleported_cu(&input, &epr, &u, TeleportMode::FullCorrection, &mut rng)
                .map_err(|e| e.to_string())?;
            let mut direct = input.clone();
            direct.apply_gate(&GateSpec::controlled(u, 0, 1)).map_err(|e| e.to_string())?;
            let got = out.state.ok_or("branch discarded")?;
            worst_u = worst_u.max(got.distance(&direct).map_err(|e| e.to_string())?);
        }
    }
    let elapsed = start.elapsed();
    ensure(
        worst < 1e-10 && worst_u < 1e-10 && elapsed < Duration::from_secs(10),
        format!("max distance CNOT {worst:.1e}, C-U {worst_u:.1e}, {elapsed:.2?}"),
    )
}

fn success_probabilities() -> Check {
    let mut cfg = ExperimentConfig::default();
    cfg.losses.sample = false;
    let mut fractions = Vec::new();
    for (mode, expect, tol) in [
        (TeleportMode::UnilateralLocc, 0.50, 0.007),
        (TeleportMode::NoLocc, 0.25, 0.006),
    ] {
        cfg.teleport_mode = mode;
        let run = run_trials(&cfg, 100_000, 2024).map_err(|e| e.to_string())?;
        let f = run.totals.kept_fraction();
        fractions.push((f, expect, tol));
    }
    ensure(
        fractions.iter().all(|(f, e, t)| (f - e).abs() <= *t),
        format!("kept {:.4} (unilateral), {:.4} (no LOCC)", fractions[0].0, fractions[1].0),
    )
}

fn memory_model() -> Check {
    let mem = MemoryParams::default();
    let eta = memory_efficiency(80.315, &mem).map_err(|e| e.to_string())?;
    let t1e = memory_1e_time(&mem);
    ensure(
        (0.031..=0.033).contains(&eta) && (t1e - 37.0).abs() <= 0.5,
        format!("efficiency {eta:.4}, 1/e time {t1e:.2} us"),
    )
}

fn mode_capacity_linearity() -> Check {
    let cfg = ExperimentConfig::default();
    let cap = mode_capacity(&cfg.memory).map_err(|e| e.to_string())?;
    let per_mode: Vec<f64> = [1u64, 10, 100, 1097]
        .iter()
        .map(|&n| throughput(&cfg, n).map(|t| t.rate_hz / n as f64))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let spread = per_mode.iter().map(|r| (r - per_mode[0]).abs() / per_mode[0]).fold(0.0, f64::max);
    ensure(cap == 1097 && spread < 1e-12, format!("capacity {cap}, rate/n relative spread {spread:.1e}"))
}

fn timing() -> Check {
    let t = validate_timing(&ExperimentConfig::default());
    ensure(
        t.feasible && (t.slack_us - 1.315).abs() <= 0.001,
        format!("feasible {}, slack {:.4} us", t.feasible, t.slack_us),
    )
}

fn truth_table_regression() -> Check {
    let reference = bundled_reference();
    let table = reference.truth_table().map_err(|e| e.to_string())?;
    // the same matrix as per-mille counts through the counting path
    let counts: Vec<CountsTable> = reference
        .truth_table
        .inputs
        .iter()
        .zip(&reference.truth_table.probabilities)
        .map(|(input, row)| {
            CountsTable::from_counts(
                input.clone(),
                reference
                    .truth_table
                    .outputs
                    .iter()
                    .zip(row)
                    .map(|(o, p)| (o.clone(), (p * 1000.0).round() as u64)),
            )
        })
        .collect();
    let from_counts = truth_table_fidelity(&counts).map_err(|e| e.to_string())?;
    ensure(
        (table.fidelity - 0.887).abs() <= 0.001 && (from_counts.fidelity - 0.887).abs() <= 0.001,
        format!("fidelity {:.4} (matrix), {:.4} (counts)", table.fidelity, from_counts.fidelity),
    )
}

fn bell_regression() -> Check {
    let reference = bundled_reference();
    let expect = [
        (BellState::PhiPlus, 0.812),
        (BellState::PhiMinus, 0.851),
        (BellState::PsiPlus, 0.813),
        (BellState::PsiMinus, 0.802),
    ];
    let mut got = Vec::new();
    for (which, value) in expect {
        let m = reference.bell_matrix(which).ok_or("missing fixture")?;
        let f = bell_fidelity(&BellElements::from_matrix(&m.real), which);
        got.push((f, value));
    }
    ensure(
        got.iter().all(|(f, v)| (f - v).abs() <= 0.002),
        format!("fidelities {:?}", got.iter().map(|(f, _)| (f * 1e4).round() / 1e4).collect::<Vec<_>>()),
    )
}

fn source_fidelity() -> Check {
    let formula = fidelity_from_visibilities(0.990, 0.862).map_err(|e| e.to_string())?;
    let pair = make_entangled_pair(&SourceParams::default()).map_err(|e| e.to_string())?;
    let phi = QuantumState::bell(BellState::PhiPlus, &[]).map_err(|e| e.to_string())?;
    let f = fidelity(&pair, &phi).map_err(|e| e.to_string())?;
    ensure(
        (formula - 0.926).abs() <= 0.005 && (f - formula).abs() < 1e-12,
        format!("formula {formula:.4}, state {f:.12}"),
    )
}

fn ipea_exactness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut bits = Vec::new();
    for (u, expect) in [("I", "000"), ("Z^1/2", "010"), ("Z^5/4", "101"), ("Z^3/2", "110")] {
        let r = run_ipea(u.parse().unwrap(), 3, &Backend::Ideal, Shots::Infinite, &mut rng)
            .map_err(|e| e.to_string())?;
        if r.bit_string != expect {
            return Err(format!("{u}: got {} expected {expect}", r.bit_string));
        }
        bits.push(r.bit_string);
    }
    let m = 3;
    let shots = 10_000u64;
    let mut worst_sigma: f64 = 0.0;
    for j in 0..16 {
        let phi = (j as f64 + 0.37) / 16.0;
        let u = PhaseUnitary::Turns(phi).matrix();
        let truth = binary_digits(phi, m);
        let analytic = ipea_analytic(phi, m).map_err(|e| e.to_string())?;
        for k in (1..=m).rev() {
            let later = &truth[k as usize..];
            let r = ipea_iteration(k, feedback_angle(later), &u, &Backend::Ideal, Shots::Finite(shots), &mut rng)
                .map_err(|e| e.to_string())?;
            let bit = truth[k as usize - 1];
            let observed = if bit == 0 { r.p0 } else { 1.0 - r.p0 };
            let p = analytic[(m - k) as usize];
            let sigma = (p * (1.0 - p) / shots as f64).sqrt().max(1.0 / shots as f64);
            worst_sigma = worst_sigma.max((observed - p).abs() / sigma);
        }
    }
    ensure(
        worst_sigma <= 4.0,
        format!("bits {}, worst Monte Carlo deviation {worst_sigma:.2} sigma", bits.join("/")),
    )
}

fn deutsch_jozsa() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let noisy = Backend::Noisy(NoiseModel {
        source: SourceParams::default(),
        white_lambda: snr_to_noise_fraction(12.6).unwrap(),
        depolarizing_p: 0.0,
        mode: TeleportMode::UnilateralLocc,
    });
    let mut worst_ideal: f64 = 1.0;
    let mut worst_noisy: f64 = 1.0;
    for kind in OracleKind::ALL {
        let i = run_deutsch_jozsa(kind, &Backend::Ideal, Shots::Infinite, &mut rng).map_err(|e| e.to_string())?;
        let n = run_deutsch_jozsa(kind, &noisy, Shots::Infinite, &mut rng).map_err(|e| e.to_string())?;
        worst_ideal = worst_ideal.min(i.success_probability);
        worst_noisy = worst_noisy.min(n.success_probability);
    }
    ensure(
        (worst_ideal - 1.0).abs() < 1e-12 && worst_noisy >= 0.85,
        format!("min success ideal {worst_ideal:.12}, noisy {worst_noisy:.4}"),
    )
}

fn pulse_synthesis() -> Check {
    let start = Instant::now();
    let p = AfcPulseParams::toy(64);
    let w = synth_prep_waveform(&p, min_sample_rate(&p), PulseVariant::ComplexExponential).map_err(|e| e.to_string())?;
    let m = comb_metrics(&w).map_err(|e| e.to_string())?;
    let spacing = m.spacing_hz.ok_or("no spacing")?;
    let spacing_err = (spacing - p.delta_hz).abs() / p.delta_hz;
    let back = square_waveform(&double_pass_transform(&w));
    let round_trip = back
        .samples
        .iter()
        .zip(&w.samples)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let mut crest = Vec::new();
    for n in [16, 64, 256] {
        let p = AfcPulseParams::toy(n);
        let rate = min_sample_rate(&p);
        let s = comb_metrics(&synth_prep_waveform(&p, rate, PulseVariant::ComplexExponential).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let f = comb_metrics(&synth_prep_waveform(&p, rate, PulseVariant::Flat).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        crest.push((n, s.crest_factor, f.crest_factor));
    }
    let elapsed = start.elapsed();
    ensure(
        m.tooth_count == 64
            && spacing_err < 0.01
            && round_trip < 1e-9
            && crest.iter().all(|(_, s, f)| s < f)
            && elapsed < Duration::from_secs(30),
        format!(
            "{} teeth, spacing error {:.1e}, round trip {round_trip:.1e}, crest {:?}, {elapsed:.2?}",
            m.tooth_count,
            spacing_err,
            crest
                .iter()
                .map(|(n, s, f)| format!("N={n}: {s:.2}<{f:.2}"))
                .collect::<Vec<_>>()
        ),
    )
}

fn determinism() -> Check {
    let commands: [&[&str]; 5] = [
        &["telegate", "truth-table", "--shots", "2000"],
        &["telegate", "bell", "--shots", "500"],
        &["telegate", "dj", "--shots", "500"],
        &["telegate", "ipea", "--u", "turns:0.3", "--rounds", "4", "--shots", "500"],
        &["telegate", "trials", "--shots", "200", "--ideal"],
    ];
    for args in commands {
        let cli = Cli::try_parse_from(args).map_err(|e| e.to_string())?;
        let a = execute(&cli, None).map_err(|e| e.to_string())?;
        let b = execute(&cli, None).map_err(|e| e.to_string())?;
        if a.report != b.report || a.csv != b.csv {
            return Err(format!("`{}` differs between runs", args[1..].join(" ")));
        }
    }
    ensure(true, format!("{} commands byte-identical across two runs", commands.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 12] = [
        ("oracle equivalence", oracle_equivalence),
        ("success probabilities", success_probabilities),
        ("memory model", memory_model),
        ("mode capacity and linearity", mode_capacity_linearity),
        ("timing", timing),
        ("truth table fixture", truth_table_regression),
        ("Bell fidelity fixtures", bell_regression),
        ("source fidelity relation", source_fidelity),
        ("IPEA exactness", ipea_exactness),
        ("Deutsch-Jozsa", deutsch_jozsa),
        ("pulse synthesis", pulse_synthesis),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
