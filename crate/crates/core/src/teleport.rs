//! Gate teleportation of CNOT and controlled-`U` across two nodes.
//!
//! The four-qubit register is laid out as qubits 1, 2, 3, 4 at positions
//! 0..4. Qubits 1 and 2 live at node A, qubits 3 and 4 at node B; (2, 3) is
//! the shared EPR pair and (1, 4) carries the gate input.
//!
//! * CNOT: `C₂₁` (control 2, target 1) and `C₄₃` (control 4, target 3), then
//!   qubit 2 in X and qubit 3 in Z. With corrections this realizes a CNOT
//!   whose control is qubit 4 and whose target is qubit 1.
//! * C-U: `C₁₂` then `CU₃₄`, then qubit 2 in Z and qubit 3 in X. With
//!   corrections this realizes controlled-`U` from qubit 1 onto qubit 4.
//!
//! Global phases of the branches are dropped.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::{check_unitary, Axis, Gate, GateSpec, Mat2, QuantumState, C64};

// positions of qubits 1..4 in the joint register
const Q1: usize = 0;
const Q2: usize = 1;
const Q3: usize = 2;
const Q4: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TeleportMode {
    /// Every branch corrected (oracle mode).
    FullCorrection,
    /// Feedforward from B to A only; half of the branches are discarded.
    #[default]
    UnilateralLocc,
    /// No feedforward; only the identity branch is kept.
    NoLocc,
}

impl TeleportMode {
    pub fn success_probability(self) -> f64 {
        match self {
            TeleportMode::FullCorrection => 1.0,
            TeleportMode::UnilateralLocc => 0.5,
            TeleportMode::NoLocc => 0.25,
        }
    }
}

pub fn success_probability(mode: TeleportMode) -> f64 {
    mode.success_probability()
}

/// A single measurement result together with its basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Outcome {
    pub axis: Axis,
    pub bit: u8,
}

impl Outcome {
    pub fn z(bit: u8) -> Self {
        Self { axis: Axis::Z, bit: bit & 1 }
    }

    pub fn x(bit: u8) -> Self {
        Self { axis: Axis::X, bit: bit & 1 }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.axis.symbol(self.bit))
    }
}

impl From<Outcome> for String {
    fn from(o: Outcome) -> String {
        o.to_string()
    }
}

impl TryFrom<String> for Outcome {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        let (axis, bit) = match s.as_str() {
            "0" => (Axis::Z, 0),
            "1" => (Axis::Z, 1),
            "+" => (Axis::X, 0),
            "-" => (Axis::X, 1),
            "r" => (Axis::Y, 0),
            "l" => (Axis::Y, 1),
            other => return Err(format!("unknown outcome `{other}`")),
        };
        Ok(Self { axis, bit })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CorrOp {
    /// σx on qubit 1.
    X1,
    /// σz on qubit 1.
    Z1,
    /// σz on qubit 4.
    Z4,
    /// U⁻¹ on qubit 4.
    Uinv4,
    /// σx on qubit 3 ahead of `CU₃₄`, fed forward from qubit 2.
    X3,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CorrectionSpec {
    pub keep: bool,
    pub ops: Vec<CorrOp>,
}

impl CorrectionSpec {
    pub fn is_identity(&self) -> bool {
        self.ops.is_empty()
    }
}

/// Correction table for the CNOT circuit; `a2` is 0 for `+`, 1 for `−`.
pub fn correction_for_cnot(a2: u8, b3: u8, mode: TeleportMode) -> CorrectionSpec {
    let mut ops = Vec::new();
    if b3 & 1 == 1 {
        ops.push(CorrOp::X1);
    }
    if a2 & 1 == 1 {
        ops.push(CorrOp::Z4);
    }
    let keep = match mode {
        TeleportMode::FullCorrection => true,
        TeleportMode::UnilateralLocc => a2 & 1 == 0,
        TeleportMode::NoLocc => ops.is_empty(),
    };
    CorrectionSpec { keep, ops }
}

/// Correction table for the C-U circuit; `q3` is 0 for `+`, 1 for `−`.
///
/// When `q2 = 1` the circuit leaves `U₄·C(U⁻¹)₁₄`, which `U⁻¹` on qubit 4
/// repairs only for `U² = I`. Other unitaries get `σx` on qubit 3 before
/// `CU₃₄` instead, which needs the qubit-2 outcome at node B in time.
pub fn correction_for_cu(q2: u8, q3: u8, u: &Mat2, mode: TeleportMode) -> CorrectionSpec {
    let mut ops = Vec::new();
    if q2 & 1 == 1 {
        ops.push(if is_involution(u) { CorrOp::Uinv4 } else { CorrOp::X3 });
    }
    if q3 & 1 == 1 {
        ops.push(CorrOp::Z1);
    }
    let keep = match mode {
        TeleportMode::FullCorrection => true,
        TeleportMode::UnilateralLocc => q2 & 1 == 0,
        TeleportMode::NoLocc => ops.is_empty(),
    };
    CorrectionSpec { keep, ops }
}

/// `U² = I` within the unitarity tolerance.
pub fn is_involution(u: &Mat2) -> bool {
    (u * u - Mat2::identity()).iter().all(|z| z.norm() <= 1e-10)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossFlag {
    pub stage: String,
    pub lost: bool,
}

/// One teleportation attempt. Times are in microseconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_id: u64,
    pub mode_index: u64,
    pub a2_outcome: Option<Outcome>,
    pub b3_outcome: Option<Outcome>,
    pub correction: CorrectionSpec,
    pub kept: bool,
    pub t_generated: f64,
    pub t_measured_b: f64,
    pub t_msg_arrival: f64,
    pub t_retrieval: f64,
    pub loss_flags: Vec<LossFlag>,
    /// Input setting, control first (e.g. `"VH"`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    /// Observed output of a kept trial, control first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deadline_met: Option<bool>,
}

impl TrialRecord {
    pub fn new(trial_id: u64) -> Self {
        Self {
            trial_id,
            mode_index: 0,
            a2_outcome: None,
            b3_outcome: None,
            correction: CorrectionSpec::default(),
            kept: false,
            t_generated: 0.0,
            t_measured_b: 0.0,
            t_msg_arrival: 0.0,
            t_retrieval: 0.0,
            loss_flags: Vec::new(),
            input: None,
            output: None,
            deadline_met: None,
        }
    }

    pub fn any_loss(&self) -> bool {
        self.loss_flags.iter().any(|f| f.lost)
    }
}

/// One measurement branch of a teleportation circuit.
#[derive(Debug, Clone)]
pub struct Branch {
    /// Outcome of the node-A ancilla (qubit 2).
    pub a2: Outcome,
    /// Outcome of the node-B ancilla (qubit 3).
    pub b3: Outcome,
    pub probability: f64,
    pub correction: CorrectionSpec,
    /// State of (1, 4) right after the measurement, before any correction.
    pub raw: QuantumState,
    /// State of (1, 4) after applying every correction in the table.
    pub corrected: QuantumState,
}

#[derive(Debug, Clone)]
pub struct TeleportOutcome {
    pub record: TrialRecord,
    /// Corrected state of (1, 4); `None` when the branch is discarded.
    pub state: Option<QuantumState>,
}

fn check_pair(state: &QuantumState, what: &str) -> Result<()> {
    if state.num_qubits() != 2 {
        return Err(Error::InvalidState(format!(
            "{what} must be a two-qubit state, got {} qubits",
            state.num_qubits()
        )));
    }
    Ok(())
}

/// Input on (1, 4) and EPR on (2, 3), arranged as qubits 1, 2, 3, 4.
fn joint_register(input: &QuantumState, epr: &QuantumState) -> Result<QuantumState> {
    check_pair(input, "input")?;
    check_pair(epr, "epr")?;
    // tensor order is (1, 4, 2, 3)
    input.tensor(epr)?.permuted(&[0, 2, 3, 1])
}

fn apply_ops(state: &mut QuantumState, ops: &[CorrOp], u: &Mat2) -> Result<()> {
    // positions in the reduced (1, 4) register
    for op in ops {
        let spec = match op {
            CorrOp::X1 => GateSpec::on(Gate::X, 0),
            CorrOp::Z1 => GateSpec::on(Gate::Z, 0),
            CorrOp::Z4 => GateSpec::on(Gate::Z, 1),
            CorrOp::Uinv4 => GateSpec::on(Gate::Unitary(u.adjoint()), 1),
            CorrOp::X3 => continue,
        };
        state.apply_gate(&spec)?;
    }
    Ok(())
}

fn prepare(
    joint: &QuantumState,
    gates: &[GateSpec],
    axes: (Axis, Axis),
) -> Result<QuantumState> {
    let mut joint = joint.clone();
    joint.apply_all(gates)?;
    for (q, axis) in [(Q2, axes.0), (Q3, axes.1)] {
        if axis == Axis::X {
            joint.apply_gate(&GateSpec::on(Gate::H, q))?;
        }
    }
    Ok(joint)
}

fn enumerate(
    joint: &QuantumState,
    alt: Option<&QuantumState>,
    axes: (Axis, Axis),
    table: impl Fn(u8, u8) -> CorrectionSpec,
    u: &Mat2,
) -> Result<Vec<Branch>> {
    let mut branches = Vec::with_capacity(4);
    for m2 in 0..2u8 {
        for m3 in 0..2u8 {
            let correction = table(m2, m3);
            let source = match alt {
                Some(a) if correction.ops.contains(&CorrOp::X3) => a,
                _ => joint,
            };
            let (probability, raw) = match source.postselect(&[Q2, Q3], &[m2, m3]) {
                Ok(v) => v,
                Err(Error::ZeroProbability) => continue,
                Err(e) => return Err(e),
            };
            let mut corrected = raw.clone();
            apply_ops(&mut corrected, &correction.ops, u)?;
            branches.push(Branch {
                a2: Outcome { axis: axes.0, bit: m2 },
                b3: Outcome { axis: axes.1, bit: m3 },
                probability,
                correction,
                raw,
                corrected,
            });
        }
    }
    Ok(branches)
}

/// All measurement branches of the CNOT circuit with exact probabilities.
pub fn cnot_branches(
    input: &QuantumState,
    epr: &QuantumState,
    mode: TeleportMode,
) -> Result<Vec<Branch>> {
    let axes = (Axis::X, Axis::Z);
    let joint = prepare(
        &joint_register(input, epr)?,
        &[GateSpec::cnot(Q2, Q1), GateSpec::cnot(Q4, Q3)],
        axes,
    )?;
    enumerate(
        &joint,
        None,
        axes,
        |a2, b3| correction_for_cnot(a2, b3, mode),
        &Mat2::identity(),
    )
}

/// All measurement branches of the C-U circuit with exact probabilities.
pub fn cu_branches(
    input: &QuantumState,
    epr: &QuantumState,
    u: &Mat2,
    mode: TeleportMode,
) -> Result<Vec<Branch>> {
    check_unitary(u)?;
    let axes = (Axis::Z, Axis::X);
    let start = joint_register(input, epr)?;
    let joint = prepare(
        &start,
        &[GateSpec::cnot(Q1, Q2), GateSpec::controlled(*u, Q3, Q4)],
        axes,
    )?;
    let alt = if is_involution(u) {
        None
    } else {
        Some(prepare(
            &start,
            &[
                GateSpec::cnot(Q1, Q2),
                GateSpec::on(Gate::X, Q3),
                GateSpec::controlled(*u, Q3, Q4),
            ],
            axes,
        )?)
    };
    enumerate(
        &joint,
        alt.as_ref(),
        axes,
        |q2, q3| correction_for_cu(q2, q3, u, mode),
        u,
    )
}

fn sample_branch<R: Rng + ?Sized>(branches: Vec<Branch>, rng: &mut R) -> Branch {
    let u = rng.random::<f64>();
    let mut acc = 0.0;
    let last = branches.len() - 1;
    for (i, b) in branches.iter().enumerate() {
        acc += b.probability;
        if u < acc || i == last {
            return branches.into_iter().nth(i).expect("index in range");
        }
    }
    unreachable!("branch list is never empty")
}

fn outcome_from(branch: Branch) -> TeleportOutcome {
    let mut record = TrialRecord::new(0);
    record.a2_outcome = Some(branch.a2);
    record.b3_outcome = Some(branch.b3);
    record.kept = branch.correction.keep;
    record.correction = branch.correction;
    TeleportOutcome {
        state: record.kept.then_some(branch.corrected),
        record,
    }
}

/// Runs the CNOT circuit once, sampling the measurement outcomes.
pub fn teleported_cnot<R: Rng + ?Sized>(
    input: &QuantumState,
    epr: &QuantumState,
    mode: TeleportMode,
    rng: &mut R,
) -> Result<TeleportOutcome> {
    let branches = cnot_branches(input, epr, mode)?;
    Ok(outcome_from(sample_branch(branches, rng)))
}

/// Runs the C-U circuit once, sampling the measurement outcomes.
pub fn teleported_cu<R: Rng + ?Sized>(
    input: &QuantumState,
    epr: &QuantumState,
    u: &Mat2,
    mode: TeleportMode,
    rng: &mut R,
) -> Result<TeleportOutcome> {
    let branches = cu_branches(input, epr, u, mode)?;
    Ok(outcome_from(sample_branch(branches, rng)))
}

/// Probability of keeping a trial and the average state over kept branches.
pub fn kept_average(branches: &[Branch]) -> Result<(f64, Option<QuantumState>)> {
    let kept: Vec<&Branch> = branches.iter().filter(|b| b.correction.keep).collect();
    let p: f64 = kept.iter().map(|b| b.probability).sum();
    if kept.is_empty() || p <= 0.0 {
        return Ok((0.0, None));
    }
    let labels: Vec<&str> = kept[0].corrected.labels().iter().map(String::as_str).collect();
    let rho = kept
        .iter()
        .map(|b| b.corrected.density_matrix() * C64::new(b.probability / p, 0.0))
        .reduce(|a, b| a + b)
        .expect("non-empty");
    let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    Ok((p, Some(QuantumState::from_density(rho, &labels)?)))
}
