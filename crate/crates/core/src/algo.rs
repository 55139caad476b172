//! Distributed algorithms over the nonlocal gates: two-qubit Deutsch–Jozsa
//! and iterative phase estimation (IPEA).
//!
//! The register `x` is A1 (position 0) and the work qubit `y` is B4
//! (position 1). Phases are carried in turns internally.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::netsim::apply_gate_noise;
use crate::photon::{make_entangled_pair, SourceParams};
use crate::qsim::{phase_z, BellState, Gate, GateSpec, Mat2, MeasBasis, QuantumState, C64};
use crate::teleport::{cnot_branches, cu_branches, kept_average, TeleportMode};

const X: usize = 0;
const Y: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OracleKind {
    #[serde(rename = "ID")]
    Id,
    #[serde(rename = "NOT")]
    Not,
    #[serde(rename = "CNOT")]
    Cnot,
    #[serde(rename = "ZCNOT")]
    Zcnot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleClass {
    Constant,
    Balanced,
}

impl OracleKind {
    pub const ALL: [OracleKind; 4] = [OracleKind::Id, OracleKind::Not, OracleKind::Cnot, OracleKind::Zcnot];

    pub fn class(self) -> OracleClass {
        match self {
            OracleKind::Id | OracleKind::Not => OracleClass::Constant,
            OracleKind::Cnot | OracleKind::Zcnot => OracleClass::Balanced,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OracleKind::Id => "ID",
            OracleKind::Not => "NOT",
            OracleKind::Cnot => "CNOT",
            OracleKind::Zcnot => "ZCNOT",
        }
    }
}

impl fmt::Display for OracleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OracleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "ID" => Ok(OracleKind::Id),
            "NOT" => Ok(OracleKind::Not),
            "CNOT" => Ok(OracleKind::Cnot),
            "ZCNOT" => Ok(OracleKind::Zcnot),
            _ => Err(Error::Config(format!("unknown oracle `{s}`"))),
        }
    }
}

/// Noise applied by the noisy backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub source: SourceParams,
    pub white_lambda: f64,
    pub depolarizing_p: f64,
    pub mode: TeleportMode,
}

impl NoiseModel {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        Ok(Self {
            source: cfg.source.clone(),
            white_lambda: cfg.noise.lambda()?,
            depolarizing_p: cfg.noise.depolarizing_p,
            mode: cfg.teleport_mode,
        })
    }
}

/// How the nonlocal gates are executed.
#[derive(Debug, Clone, PartialEq)]
pub enum Backend {
    /// Direct two-qubit gate; the oracle for everything else.
    Direct,
    /// Gate teleportation with a perfect EPR pair and full correction.
    Ideal,
    /// Gate teleportation with a noisy pair, kept-branch postselection and
    /// white/depolarizing noise on (A1, B4) after every oracle or gate.
    Noisy(NoiseModel),
}

impl Backend {
    pub fn from_config(cfg: &ExperimentConfig, ideal: bool) -> Result<Self> {
        if ideal {
            Ok(Backend::Ideal)
        } else {
            Ok(Backend::Noisy(NoiseModel::from_config(cfg)?))
        }
    }

    fn epr_and_mode(&self) -> Result<(QuantumState, TeleportMode)> {
        match self {
            Backend::Noisy(n) => Ok((make_entangled_pair(&n.source)?, n.mode)),
            _ => Ok((
                QuantumState::bell(BellState::PhiPlus, &["A2@path", "B3@path"])?,
                TeleportMode::FullCorrection,
            )),
        }
    }

    fn add_noise(&self, state: &mut QuantumState) -> Result<()> {
        if let Backend::Noisy(n) = self {
            apply_gate_noise(state, n.white_lambda, n.depolarizing_p)?;
        }
        Ok(())
    }
}

/// Nonlocal CNOT from A1 onto B4; returns the kept probability and the state.
///
/// The teleported circuit controls on B4, so it is wrapped in Hadamards on
/// both qubits, which exchanges control and target.
pub fn nonlocal_cnot(state: &QuantumState, backend: &Backend) -> Result<(f64, QuantumState)> {
    if let Backend::Direct = backend {
        let mut s = state.clone();
        s.apply_gate(&GateSpec::cnot(X, Y))?;
        return Ok((1.0, s));
    }
    let (epr, mode) = backend.epr_and_mode()?;
    let mut s = state.clone();
    let h = [GateSpec::on(Gate::H, X), GateSpec::on(Gate::H, Y)];
    s.apply_all(&h)?;
    let (p, out) = kept_average(&cnot_branches(&s, &epr, mode)?)?;
    let mut out = out.ok_or(Error::ZeroProbability)?;
    out.apply_all(&h)?;
    Ok((p, out))
}

/// Nonlocal controlled-`U` from A1 onto B4.
pub fn nonlocal_cu(state: &QuantumState, u: &Mat2, backend: &Backend) -> Result<(f64, QuantumState)> {
    if let Backend::Direct = backend {
        let mut s = state.clone();
        s.apply_gate(&GateSpec::controlled(*u, X, Y))?;
        return Ok((1.0, s));
    }
    let (epr, mode) = backend.epr_and_mode()?;
    let (p, out) = kept_average(&cu_branches(state, &epr, u, mode)?)?;
    let mut out = out.ok_or(Error::ZeroProbability)?;
    backend.add_noise(&mut out)?;
    Ok((p, out))
}

/// Applies the oracle `U_f` to (x, y); returns the kept probability.
pub fn apply_oracle(kind: OracleKind, state: &QuantumState, backend: &Backend) -> Result<(f64, QuantumState)> {
    let not_y = GateSpec::on(Gate::X, Y);
    let (p, mut out) = match kind {
        OracleKind::Id => (1.0, state.clone()),
        OracleKind::Not => {
            let mut s = state.clone();
            s.apply_gate(&not_y)?;
            (1.0, s)
        }
        OracleKind::Cnot => nonlocal_cnot(state, backend)?,
        OracleKind::Zcnot => {
            let (p, mut s) = nonlocal_cnot(state, backend)?;
            s.apply_gate(&not_y)?;
            (p, s)
        }
    };
    backend.add_noise(&mut out)?;
    Ok((p, out))
}

/// Nonlocal CNOT in its native orientation, B4 controlling A1.
pub fn nonlocal_cnot_native(state: &QuantumState, backend: &Backend) -> Result<(f64, QuantumState)> {
    if let Backend::Direct = backend {
        let mut s = state.clone();
        s.apply_gate(&GateSpec::cnot(Y, X))?;
        return Ok((1.0, s));
    }
    let (epr, mode) = backend.epr_and_mode()?;
    let (p, out) = kept_average(&cnot_branches(state, &epr, mode)?)?;
    let mut out = out.ok_or(Error::ZeroProbability)?;
    backend.add_noise(&mut out)?;
    Ok((p, out))
}

/// Separable inputs (control B4 first) and the Bell state each should produce.
pub const BELL_INPUTS: [(&str, BellState); 4] = [
    ("+H", BellState::PhiPlus),
    ("-H", BellState::PhiMinus),
    ("+V", BellState::PsiPlus),
    ("-V", BellState::PsiMinus),
];

/// (A1, B4) state for a control-first label such as `"+H"`.
pub fn bell_input_state(label: &str) -> Result<QuantumState> {
    let amp = |c: char| -> Result<[C64; 2]> {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        match c {
            'H' | '0' => Ok([C64::new(1.0, 0.0), C64::new(0.0, 0.0)]),
            'V' | '1' => Ok([C64::new(0.0, 0.0), C64::new(1.0, 0.0)]),
            '+' => Ok([C64::new(r, 0.0), C64::new(r, 0.0)]),
            '-' => Ok([C64::new(r, 0.0), C64::new(-r, 0.0)]),
            other => Err(Error::Encoding(format!("unknown input symbol `{other}`"))),
        }
    };
    let chars: Vec<char> = label.chars().collect();
    if chars.len() != 2 {
        return Err(Error::Encoding(format!("expected two symbols, got `{label}`")));
    }
    xy_state(amp(chars[1])?, amp(chars[0])?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellRun {
    pub input: &'static str,
    pub target: BellState,
    pub kept_probability: f64,
    /// Output on (A1, B4); B4 is the first-written qubit of the witness.
    pub state: QuantumState,
}

/// Prepares the four Bell states with the nonlocal CNOT.
pub fn run_bell_states(backend: &Backend) -> Result<Vec<BellRun>> {
    BELL_INPUTS
        .iter()
        .map(|&(input, target)| {
            let (kept, state) = nonlocal_cnot_native(&bell_input_state(input)?, backend)?;
            Ok(BellRun {
                input,
                target,
                kept_probability: kept,
                state,
            })
        })
        .collect()
}

/// Number of shots per measurement, or exact probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shots {
    Infinite,
    Finite(u64),
}

impl Shots {
    /// Observed frequency of an event with probability `p`.
    pub fn observe<R: Rng + ?Sized>(self, p: f64, rng: &mut R) -> Result<(f64, Option<u64>)> {
        match self {
            Shots::Infinite => Ok((p, None)),
            Shots::Finite(0) => Err(Error::Config("shots must be at least 1".into())),
            Shots::Finite(n) => {
                let k = Binomial::new(n, p.clamp(0.0, 1.0))
                    .map_err(|e| Error::Inconsistent(e.to_string()))?
                    .sample(rng);
                Ok((k as f64 / n as f64, Some(k)))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DjResult {
    pub oracle: OracleKind,
    pub p_h: f64,
    pub p_v: f64,
    pub p_h_exact: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count_h: Option<u64>,
    pub shots: Shots,
    pub kept_probability: f64,
    pub classification: OracleClass,
    pub correct: bool,
    /// Probability of the correct classification.
    pub success_probability: f64,
}

/// Two-qubit Deutsch–Jozsa: `F` on both, `U_f`, `F` on `x`, measure `x`.
pub fn run_deutsch_jozsa<R: Rng + ?Sized>(
    kind: OracleKind,
    backend: &Backend,
    shots: Shots,
    rng: &mut R,
) -> Result<DjResult> {
    // x = |H⟩, y = |V⟩
    let mut s = QuantumState::basis(&[0, 1], &["A1@pol", "B4@pol"])?;
    s.apply_all(&[GateSpec::on(Gate::H, X), GateSpec::on(Gate::H, Y)])?;
    let (kept, mut s) = apply_oracle(kind, &s, backend)?;
    s.apply_gate(&GateSpec::on(Gate::H, X))?;
    let p_h_exact = s.probability(MeasBasis::z(X), 0)?;
    let (p_h, count_h) = shots.observe(p_h_exact, rng)?;
    let classification = if p_h > 0.5 {
        OracleClass::Constant
    } else {
        OracleClass::Balanced
    };
    let success_probability = match kind.class() {
        OracleClass::Constant => p_h_exact,
        OracleClass::Balanced => 1.0 - p_h_exact,
    };
    Ok(DjResult {
        oracle: kind,
        p_h,
        p_v: 1.0 - p_h,
        p_h_exact,
        count_h,
        shots,
        kept_probability: kept,
        classification,
        correct: classification == kind.class(),
        success_probability,
    })
}

/// `Z^s = diag(1, e^{iπs})`.
pub fn z_power(s: f64) -> Mat2 {
    phase_z(PI * s)
}

/// Unitary whose `|V⟩` eigenphase is being estimated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseUnitary {
    Identity,
    /// `Z^s`.
    ZPower(f64),
    /// `diag(1, e^{2πiφ})` with `φ` in turns.
    Turns(f64),
}

impl PhaseUnitary {
    pub fn matrix(self) -> Mat2 {
        match self {
            PhaseUnitary::Identity => Mat2::identity(),
            PhaseUnitary::ZPower(s) => z_power(s),
            PhaseUnitary::Turns(phi) => phase_z(2.0 * PI * phi),
        }
    }

    /// Eigenphase on `|V⟩` in turns, in `[0, 1)`.
    pub fn phi_turns(self) -> f64 {
        match self {
            PhaseUnitary::Identity => 0.0,
            PhaseUnitary::ZPower(s) => (s / 2.0).rem_euclid(1.0),
            PhaseUnitary::Turns(phi) => phi.rem_euclid(1.0),
        }
    }
}

impl fmt::Display for PhaseUnitary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseUnitary::Identity => f.write_str("I"),
            PhaseUnitary::ZPower(s) => write!(f, "Z^{s}"),
            PhaseUnitary::Turns(phi) => write!(f, "phase {phi} turns"),
        }
    }
}

impl FromStr for PhaseUnitary {
    type Err = Error;

    /// Accepts `I`, `Z^s` with `s` a decimal or fraction (`Z^5/4`), or `turns:φ`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "I" {
            return Ok(PhaseUnitary::Identity);
        }
        let number = |t: &str| -> Result<f64> {
            let bad = || Error::Config(format!("cannot parse exponent `{t}`"));
            match t.split_once('/') {
                Some((a, b)) => {
                    let a: f64 = a.trim().parse().map_err(|_| bad())?;
                    let b: f64 = b.trim().parse().map_err(|_| bad())?;
                    if b == 0.0 {
                        return Err(bad());
                    }
                    Ok(a / b)
                }
                None => t.trim().parse().map_err(|_| bad()),
            }
        };
        if let Some(exp) = s.strip_prefix("Z^") {
            return Ok(PhaseUnitary::ZPower(number(exp)?));
        }
        if let Some(t) = s.strip_prefix("turns:") {
            return Ok(PhaseUnitary::Turns(number(t)?));
        }
        Err(Error::Config(format!("unknown unitary `{s}` (expected I, Z^s or turns:φ)")))
    }
}

fn mat_pow2(u: &Mat2, k: u32) -> Mat2 {
    (0..k).fold(*u, |acc, _| acc * acc)
}

/// Feedback angle in radians for a round, from the bits already measured.
///
/// `later` holds φ_{k+1}…φ_m (most significant first); the angle is
/// `−2π·(0.0φ_{k+1}…φ_m)`.
pub fn feedback_angle(later: &[u8]) -> f64 {
    let turns: f64 = later
        .iter()
        .enumerate()
        .map(|(j, &b)| f64::from(b) * 0.5f64.powi(j as i32 + 2))
        .sum();
    -2.0 * PI * turns
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationResult {
    pub k: u32,
    pub feedback_rad: f64,
    pub p0_exact: f64,
    pub p0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count0: Option<u64>,
    pub kept_probability: f64,
    pub bit: u8,
    /// `p0` is exactly one half; bit 0 was chosen.
    pub ambiguous: bool,
}

/// One IPEA round: H, controlled-`U^{2^{k−1}}`, `Z_ω`, H, measure.
pub fn ipea_iteration<R: Rng + ?Sized>(
    k: u32,
    feedback_rad: f64,
    u: &Mat2,
    backend: &Backend,
    shots: Shots,
    rng: &mut R,
) -> Result<IterationResult> {
    if k == 0 {
        return Err(Error::Config("iteration index k starts at 1".into()));
    }
    if u[(0, 1)].norm() > 1e-12 || u[(1, 0)].norm() > 1e-12 {
        return Err(Error::InvalidState("U must have |V> as an eigenvector".into()));
    }
    let power = mat_pow2(u, k - 1);
    // register |H⟩ on A1, eigenstate |V⟩ on B4
    let mut s = QuantumState::basis(&[0, 1], &["A1@pol", "B4@pol"])?;
    s.apply_gate(&GateSpec::on(Gate::H, X))?;
    let (kept, mut s) = nonlocal_cu(&s, &power, backend)?;
    s.apply_all(&[
        GateSpec::on(Gate::PhaseZ(feedback_rad), X),
        GateSpec::on(Gate::H, X),
    ])?;
    let p0_exact = s.probability(MeasBasis::z(X), 0)?;
    let (p0, count0) = shots.observe(p0_exact, rng)?;
    let ambiguous = p0 == 0.5;
    Ok(IterationResult {
        k,
        feedback_rad,
        p0_exact,
        p0,
        count0,
        kept_probability: kept,
        bit: u8::from(p0 < 0.5),
        ambiguous,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IpeaResult {
    pub m: u32,
    /// φ₁…φ_m, most significant first.
    pub bits: Vec<u8>,
    pub bit_string: String,
    /// Observed P(0) per bit, most significant first.
    pub per_round_prob0: Vec<f64>,
    pub per_round_prob0_exact: Vec<f64>,
    /// Bit positions (1-based, most significant first) decided by a tie.
    pub ambiguous_bits: Vec<u32>,
    pub phi_turns: f64,
    pub phi_estimate_turns: f64,
    pub delta: f64,
}

/// Runs `m` rounds from the least significant bit upwards.
pub fn run_ipea<R: Rng + ?Sized>(
    unitary: PhaseUnitary,
    m: u32,
    backend: &Backend,
    shots: Shots,
    rng: &mut R,
) -> Result<IpeaResult> {
    if m == 0 {
        return Err(Error::Config("rounds must be at least 1".into()));
    }
    let u = unitary.matrix();
    let m_us = m as usize;
    let mut bits = vec![0u8; m_us];
    let mut p0 = vec![0.0; m_us];
    let mut p0_exact = vec![0.0; m_us];
    let mut ambiguous_bits = Vec::new();
    for k in (1..=m).rev() {
        let i = (k - 1) as usize;
        let omega = feedback_angle(&bits[i + 1..]);
        let r = ipea_iteration(k, omega, &u, backend, shots, rng)?;
        bits[i] = r.bit;
        p0[i] = r.p0;
        p0_exact[i] = r.p0_exact;
        if r.ambiguous {
            ambiguous_bits.push(k);
        }
    }
    ambiguous_bits.sort_unstable();
    let phi_estimate_turns = bits
        .iter()
        .enumerate()
        .map(|(j, &b)| f64::from(b) * 0.5f64.powi(j as i32 + 1))
        .sum();
    let phi = unitary.phi_turns();
    let scale = 2f64.powi(m as i32);
    Ok(IpeaResult {
        m,
        bit_string: bits.iter().map(|b| char::from(b'0' + b)).collect(),
        bits,
        per_round_prob0: p0,
        per_round_prob0_exact: p0_exact,
        ambiguous_bits,
        phi_turns: phi,
        phi_estimate_turns,
        delta: (phi * scale).fract(),
    })
}

/// Correct-bit probabilities per round in execution order (least
/// significant bit first), each conditional on earlier rounds being right:
/// `cos²(πδ/2), cos²(πδ/4), …`.
pub fn ipea_analytic(phi_turns: f64, m: u32) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&phi_turns) {
        return Err(Error::Parameter {
            name: "phi_turns",
            value: phi_turns,
            reason: "must lie in [0, 1)",
        });
    }
    let delta = (phi_turns * 2f64.powi(m as i32)).fract();
    Ok((1..=m)
        .map(|r| (PI * delta / 2f64.powi(r as i32)).cos().powi(2))
        .collect())
}

/// The m-bit truncation of φ, most significant bit first.
pub fn binary_digits(phi_turns: f64, m: u32) -> Vec<u8> {
    let scaled = (phi_turns.rem_euclid(1.0) * 2f64.powi(m as i32)).floor() as u64;
    (0..m).rev().map(|j| ((scaled >> j) & 1) as u8).collect()
}

/// Convenience for examples: `|ψ⟩` amplitudes on (x, y) as a state.
pub fn xy_state(x: [C64; 2], y: [C64; 2]) -> Result<QuantumState> {
    QuantumState::product(&[x, y], &["A1@pol", "B4@pol"])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(42)
    }

    fn basis(x: u8, y: u8) -> QuantumState {
        QuantumState::basis(&[x, y], &["A1@pol", "B4@pol"]).unwrap()
    }

    #[test]
    fn oracle_examples() {
        for backend in [Backend::Direct, Backend::Ideal] {
            let (_, s) = apply_oracle(OracleKind::Id, &basis(1, 0), &backend).unwrap();
            assert!(s.distance(&basis(1, 0)).unwrap() < 1e-12);
            let (_, s) = apply_oracle(OracleKind::Cnot, &basis(1, 0), &backend).unwrap();
            assert!(s.distance(&basis(1, 1).into_mixed()).unwrap_or(1.0) < 1e-12
                || s.distance(&basis(1, 1)).unwrap() < 1e-12);
            let (_, s) = apply_oracle(OracleKind::Zcnot, &basis(0, 0), &backend).unwrap();
            let target = if s.is_pure() { basis(0, 1) } else { basis(0, 1).into_mixed() };
            assert!(s.distance(&target).unwrap() < 1e-12);
        }
    }

    #[test]
    fn bell_states_ideal() {
        use crate::qsim::fidelity;
        for backend in [Backend::Direct, Backend::Ideal] {
            for run in run_bell_states(&backend).unwrap() {
                let target = QuantumState::bell(run.target, &["B4@pol", "A1@pol"])
                    .unwrap()
                    .permuted(&[1, 0])
                    .unwrap();
                let f = fidelity(&run.state, &target).unwrap();
                assert!((f - 1.0).abs() < 1e-12, "{} {f}", run.input);
            }
        }
    }

    #[test]
    fn dj_ideal() {
        for kind in OracleKind::ALL {
            let r = run_deutsch_jozsa(kind, &Backend::Ideal, Shots::Infinite, &mut rng()).unwrap();
            assert!(r.correct);
            assert!((r.success_probability - 1.0).abs() < 1e-12, "{kind}");
        }
        let id = run_deutsch_jozsa(OracleKind::Id, &Backend::Ideal, Shots::Infinite, &mut rng()).unwrap();
        assert!((id.p_h - 1.0).abs() < 1e-12);
        let cnot = run_deutsch_jozsa(OracleKind::Cnot, &Backend::Ideal, Shots::Infinite, &mut rng()).unwrap();
        assert!((cnot.p_v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ipea_reported_phases() {
        let cases = [
            ("I", "000"),
            ("Z^1/2", "010"),
            ("Z^5/4", "101"),
            ("Z^3/2", "110"),
        ];
        for (u, bits) in cases {
            let u: PhaseUnitary = u.parse().unwrap();
            let r = run_ipea(u, 3, &Backend::Ideal, Shots::Infinite, &mut rng()).unwrap();
            assert_eq!(r.bit_string, bits, "{u}");
            assert!(r.ambiguous_bits.is_empty());
            assert_eq!(r.delta, 0.0);
        }
    }

    #[test]
    fn identity_round_is_certain() {
        for k in 1..=4 {
            let r = ipea_iteration(k, 0.0, &Mat2::identity(), &Backend::Ideal, Shots::Infinite, &mut rng())
                .unwrap();
            assert!((r.p0 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn analytic_examples() {
        assert_eq!(ipea_analytic(0.25, 3).unwrap(), vec![1.0, 1.0, 1.0]);
        let p = ipea_analytic(5.0 / 16.0, 3).unwrap();
        let expect = [0.5, 0.8536, 0.9619];
        for (a, b) in p.iter().zip(expect) {
            assert!((a - b).abs() < 1e-4, "{p:?}");
        }
        let near = ipea_analytic(1.0 / 8.0 - 1e-12, 3).unwrap();
        assert!(near[0] < 1e-9);
        assert!(ipea_analytic(1.0, 3).is_err());
    }

    #[test]
    fn first_round_matches_cos_squared() {
        // φ = 5/16: round one (k = 3) sees δ = 0.5
        let u = PhaseUnitary::Turns(5.0 / 16.0).matrix();
        let r = ipea_iteration(3, 0.0, &u, &Backend::Ideal, Shots::Infinite, &mut rng()).unwrap();
        assert!((r.p0_exact - 0.5).abs() < 1e-12);
        // round two with φ₃ = 0 fed back; the correct bit φ₂ is 1
        let r2 = ipea_iteration(2, feedback_angle(&[0]), &u, &Backend::Ideal, Shots::Infinite, &mut rng())
            .unwrap();
        assert!((1.0 - r2.p0_exact - 0.8536).abs() < 1e-4);
    }

    #[test]
    fn parse_unitaries() {
        assert_eq!("I".parse::<PhaseUnitary>().unwrap(), PhaseUnitary::Identity);
        assert_eq!("Z^5/4".parse::<PhaseUnitary>().unwrap(), PhaseUnitary::ZPower(1.25));
        assert_eq!("Z^0.5".parse::<PhaseUnitary>().unwrap().phi_turns(), 0.25);
        assert!("Q".parse::<PhaseUnitary>().is_err());
        assert!("Z^1/0".parse::<PhaseUnitary>().is_err());
        assert_eq!(binary_digits(0.625, 3), vec![1, 0, 1]);
    }

    #[test]
    fn tie_is_flagged() {
        let u = PhaseUnitary::Turns(5.0 / 16.0);
        let r = run_ipea(u, 3, &Backend::Direct, Shots::Infinite, &mut rng()).unwrap();
        assert_eq!(r.ambiguous_bits, vec![3]);
    }
}
