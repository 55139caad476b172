//! Dense state engine for registers of up to six qubits.
//!
//! Index convention: qubit `k` of a register is bit `k` of the basis index
//! (little-endian). For a two-qubit register `|q0 q1⟩`, the basis order is
//! `|00⟩, |10⟩, |01⟩, |11⟩` when kets are written with qubit 0 first. Every
//! module in the crate follows this convention; [`basis_index`] converts a
//! written bit string into an index.
//!
//! States are pure until a channel is applied, after which they are carried
//! as density matrices. Measurement leaves the measured qubit in the
//! register, collapsed onto the observed eigenstate.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;

pub const MAX_QUBITS: usize = 6;

const NORM_TOL: f64 = 1e-12;
const UNITARY_TOL: f64 = 1e-10;
const EIGEN_TOL: f64 = 1e-10;
const ZERO_PROB: f64 = 1e-14;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Basis index of a bit string written qubit 0 first.
pub fn basis_index(bits: &[u8]) -> usize {
    bits.iter()
        .enumerate()
        .fold(0, |acc, (k, &b)| acc | (usize::from(b & 1) << k))
}

pub fn pauli_x() -> Mat2 {
    Mat2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0))
}

pub fn pauli_y() -> Mat2 {
    Mat2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0))
}

pub fn pauli_z() -> Mat2 {
    Mat2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0))
}

pub fn hadamard() -> Mat2 {
    let h = c(FRAC_1_SQRT_2, 0.0);
    Mat2::new(h, h, h, -h)
}

/// `diag(1, e^{iφ})`.
pub fn phase_z(phi: f64) -> Mat2 {
    Mat2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), C64::from_polar(1.0, phi))
}

/// Largest entry of `|U†U − I|`.
pub fn unitarity_defect(u: &Mat2) -> f64 {
    (u.adjoint() * u - Mat2::identity())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

pub fn check_unitary(u: &Mat2) -> Result<()> {
    let defect = unitarity_defect(u);
    if defect.is_finite() && defect <= UNITARY_TOL {
        Ok(())
    } else {
        Err(Error::NonUnitary(defect))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    I,
    X,
    Y,
    Z,
    H,
    S,
    /// `diag(1, e^{iφ})`, angle in radians.
    PhaseZ(f64),
    /// Arbitrary single-qubit unitary.
    Unitary(Mat2),
    /// Targets are `[control, target]`.
    Cnot,
    /// Controlled `U`; targets are `[control, target]`.
    ControlledU(Mat2),
}

impl Gate {
    pub fn arity(&self) -> usize {
        match self {
            Gate::Cnot | Gate::ControlledU(_) => 2,
            _ => 1,
        }
    }

    /// The single-qubit operator acting on the (target) qubit.
    pub fn core_matrix(&self) -> Mat2 {
        match self {
            Gate::I => Mat2::identity(),
            Gate::X | Gate::Cnot => pauli_x(),
            Gate::Y => pauli_y(),
            Gate::Z => pauli_z(),
            Gate::H => hadamard(),
            Gate::S => phase_z(std::f64::consts::FRAC_PI_2),
            Gate::PhaseZ(phi) => phase_z(*phi),
            Gate::Unitary(u) | Gate::ControlledU(u) => *u,
        }
    }

    pub fn inverse(&self) -> Gate {
        match self {
            Gate::S => Gate::PhaseZ(-std::f64::consts::FRAC_PI_2),
            Gate::PhaseZ(phi) => Gate::PhaseZ(-phi),
            Gate::Unitary(u) => Gate::Unitary(u.adjoint()),
            Gate::ControlledU(u) => Gate::ControlledU(u.adjoint()),
            g => g.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateSpec {
    pub gate: Gate,
    pub targets: Vec<usize>,
}

impl GateSpec {
    pub fn new(gate: Gate, targets: Vec<usize>) -> Self {
        Self { gate, targets }
    }

    pub fn on(gate: Gate, qubit: usize) -> Self {
        Self::new(gate, vec![qubit])
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self::new(Gate::Cnot, vec![control, target])
    }

    pub fn controlled(u: Mat2, control: usize, target: usize) -> Self {
        Self::new(Gate::ControlledU(u), vec![control, target])
    }

    pub fn inverse(&self) -> Self {
        Self::new(self.gate.inverse(), self.targets.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    Z,
    X,
    Y,
}

impl Axis {
    /// Printable outcome symbol: `0/1` for Z, `+/-` for X, `r/l` for Y.
    pub fn symbol(self, bit: u8) -> char {
        match (self, bit & 1) {
            (Axis::Z, 0) => '0',
            (Axis::Z, _) => '1',
            (Axis::X, 0) => '+',
            (Axis::X, _) => '-',
            (Axis::Y, 0) => 'r',
            (Axis::Y, _) => 'l',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasBasis {
    pub axis: Axis,
    pub qubit: usize,
}

impl MeasBasis {
    pub fn z(qubit: usize) -> Self {
        Self { axis: Axis::Z, qubit }
    }

    pub fn x(qubit: usize) -> Self {
        Self { axis: Axis::X, qubit }
    }

    pub fn y(qubit: usize) -> Self {
        Self { axis: Axis::Y, qubit }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    /// Per-qubit `ρ → (1−p)ρ + p·(I/2 ⊗ Tr_q ρ)`.
    Depolarizing(f64),
    /// Per-qubit `ρ → (1−p)ρ + p·ZρZ`.
    Dephasing(f64),
    /// Joint `ρ → (1−λ)ρ + λ·(I/d ⊗ Tr_T ρ)` over all targets.
    WhiteAdmixture(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> Mat2 {
        match self {
            Pauli::I => Mat2::identity(),
            Pauli::X => pauli_x(),
            Pauli::Y => pauli_y(),
            Pauli::Z => pauli_z(),
        }
    }
}

/// Tensor product of Paulis on distinct qubits; unlisted qubits carry `I`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PauliString(pub Vec<(usize, Pauli)>);

impl PauliString {
    pub fn new(terms: impl IntoIterator<Item = (usize, Pauli)>) -> Self {
        Self(terms.into_iter().collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellState {
    pub const ALL: [BellState; 4] = [
        BellState::PhiPlus,
        BellState::PhiMinus,
        BellState::PsiPlus,
        BellState::PsiMinus,
    ];
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Pure(DVector<C64>),
    Mixed(DMatrix<C64>),
}

/// Pure or mixed state of an ordered, labelled qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    repr: Repr,
    labels: Vec<String>,
}

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|k| format!("q{k}")).collect()
}

fn resolve_labels(n: usize, labels: &[&str]) -> Result<Vec<String>> {
    if labels.is_empty() {
        return Ok(default_labels(n));
    }
    if labels.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: labels.len(),
        });
    }
    Ok(labels.iter().map(|s| s.to_string()).collect())
}

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::InvalidState(format!("dimension {dim} is not 2^n")));
    }
    let n = dim.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(Error::QubitCount(n));
    }
    Ok(n)
}

fn apply_1q(v: &mut [C64], q: usize, m: &Mat2) {
    let mask = 1usize << q;
    for i in 0..v.len() {
        if i & mask == 0 {
            let j = i | mask;
            let (a, b) = (v[i], v[j]);
            v[i] = m[(0, 0)] * a + m[(0, 1)] * b;
            v[j] = m[(1, 0)] * a + m[(1, 1)] * b;
        }
    }
}

fn apply_controlled(v: &mut [C64], control: usize, target: usize, m: &Mat2) {
    let cmask = 1usize << control;
    let tmask = 1usize << target;
    for i in 0..v.len() {
        if i & cmask != 0 && i & tmask == 0 {
            let j = i | tmask;
            let (a, b) = (v[i], v[j]);
            v[i] = m[(0, 0)] * a + m[(0, 1)] * b;
            v[j] = m[(1, 0)] * a + m[(1, 1)] * b;
        }
    }
}

fn apply_columns(rho: &mut DMatrix<C64>, op: &impl Fn(&mut [C64])) {
    let d = rho.nrows();
    for col in rho.as_mut_slice().chunks_mut(d) {
        op(col);
    }
}

/// `ρ → UρU†` where `op` applies `U` to a vector.
fn conjugate(rho: &mut DMatrix<C64>, op: &impl Fn(&mut [C64])) {
    apply_columns(rho, op);
    let mut t = rho.adjoint();
    apply_columns(&mut t, op);
    *rho = t.adjoint();
}

/// `¼ Σ_P PρP` on one qubit, i.e. `I/2 ⊗ Tr_q ρ`.
fn twirl(rho: &DMatrix<C64>, q: usize) -> DMatrix<C64> {
    let mut acc = rho.clone();
    for p in [pauli_x(), pauli_y(), pauli_z()] {
        let mut term = rho.clone();
        conjugate(&mut term, &|v: &mut [C64]| apply_1q(v, q, &p));
        acc += term;
    }
    acc * c(0.25, 0.0)
}

impl QuantumState {
    /// `|0…0⟩` on `n` qubits. Empty `labels` yields `q0, q1, …`.
    pub fn register(n: usize, labels: &[&str]) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::QubitCount(n));
        }
        let labels = resolve_labels(n, labels)?;
        let mut v = DVector::zeros(1 << n);
        v[0] = c(1.0, 0.0);
        Ok(Self {
            repr: Repr::Pure(v),
            labels,
        })
    }

    pub fn from_amplitudes(amplitudes: Vec<C64>, labels: &[&str]) -> Result<Self> {
        let n = qubits_for_dim(amplitudes.len())?;
        let state = Self {
            repr: Repr::Pure(DVector::from_vec(amplitudes)),
            labels: resolve_labels(n, labels)?,
        };
        state.validate()?;
        Ok(state)
    }

    /// Like [`from_amplitudes`](Self::from_amplitudes) but rescales to unit norm.
    pub fn normalized(amplitudes: Vec<C64>, labels: &[&str]) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::from_amplitudes(amplitudes.into_iter().map(|a| a / norm).collect(), labels)
    }

    pub fn from_density(rho: DMatrix<C64>, labels: &[&str]) -> Result<Self> {
        if rho.nrows() != rho.ncols() {
            return Err(Error::DimensionMismatch {
                expected: rho.nrows(),
                found: rho.ncols(),
            });
        }
        let n = qubits_for_dim(rho.nrows())?;
        let state = Self {
            repr: Repr::Mixed(rho),
            labels: resolve_labels(n, labels)?,
        };
        state.validate()?;
        Ok(state)
    }

    /// Computational basis state; `bits[k]` is the value of qubit `k`.
    pub fn basis(bits: &[u8], labels: &[&str]) -> Result<Self> {
        let mut s = Self::register(bits.len(), labels)?;
        if let Repr::Pure(v) = &mut s.repr {
            v[0] = c(0.0, 0.0);
            v[basis_index(bits)] = c(1.0, 0.0);
        }
        Ok(s)
    }

    /// Product of single-qubit states `[α, β]`, qubit 0 first. Each factor is normalized.
    pub fn product(qubits: &[[C64; 2]], labels: &[&str]) -> Result<Self> {
        let n = qubits.len();
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::QubitCount(n));
        }
        let factors = qubits
            .iter()
            .map(|[a, b]| {
                let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
                if norm == 0.0 {
                    Err(Error::InvalidState("zero single-qubit factor".into()))
                } else {
                    Ok([a / norm, b / norm])
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let amps = (0..1usize << n)
            .map(|i| {
                factors
                    .iter()
                    .enumerate()
                    .fold(c(1.0, 0.0), |acc, (k, f)| acc * f[(i >> k) & 1])
            })
            .collect();
        Self::from_amplitudes(amps, labels)
    }

    pub fn bell(which: BellState, labels: &[&str]) -> Result<Self> {
        let h = c(FRAC_1_SQRT_2, 0.0);
        let z = c(0.0, 0.0);
        // indices: 0=|00⟩, 1=|10⟩, 2=|01⟩, 3=|11⟩ (qubit 0 written first)
        let amps = match which {
            BellState::PhiPlus => vec![h, z, z, h],
            BellState::PhiMinus => vec![h, z, z, -h],
            BellState::PsiPlus => vec![z, h, h, z],
            BellState::PsiMinus => vec![z, -h, h, z],
        };
        Self::from_amplitudes(amps, labels)
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits()
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.repr, Repr::Pure(_))
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn relabel(&mut self, qubit: usize, label: impl Into<String>) -> Result<()> {
        self.check_index(qubit)?;
        self.labels[qubit] = label.into();
        Ok(())
    }

    pub fn amplitudes(&self) -> Option<&DVector<C64>> {
        match &self.repr {
            Repr::Pure(v) => Some(v),
            Repr::Mixed(_) => None,
        }
    }

    pub fn density_matrix(&self) -> DMatrix<C64> {
        match &self.repr {
            Repr::Pure(v) => v * v.adjoint(),
            Repr::Mixed(rho) => rho.clone(),
        }
    }

    pub fn into_mixed(self) -> Self {
        match self.repr {
            Repr::Pure(_) => Self {
                repr: Repr::Mixed(self.density_matrix()),
                labels: self.labels,
            },
            Repr::Mixed(_) => self,
        }
    }

    fn promote(&mut self) {
        if let Repr::Pure(v) = &self.repr {
            self.repr = Repr::Mixed(v * v.adjoint());
        }
    }

    pub fn trace(&self) -> f64 {
        match &self.repr {
            Repr::Pure(v) => v.norm_squared(),
            Repr::Mixed(rho) => rho.trace().re,
        }
    }

    /// Smallest eigenvalue of the density matrix (0 for pure states).
    pub fn min_eigenvalue(&self) -> f64 {
        match &self.repr {
            Repr::Pure(_) => 0.0,
            Repr::Mixed(rho) => rho
                .clone()
                .symmetric_eigenvalues()
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Checks the normalization, hermiticity and positivity invariants.
    pub fn validate(&self) -> Result<()> {
        match &self.repr {
            Repr::Pure(v) => {
                let norm = v.norm_squared();
                if (norm - 1.0).abs() > NORM_TOL {
                    return Err(Error::InvalidState(format!("norm² = {norm}")));
                }
            }
            Repr::Mixed(rho) => {
                let tr = rho.trace();
                if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
                    return Err(Error::InvalidState(format!("trace = {tr}")));
                }
                let herm = (rho - rho.adjoint())
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                if herm > NORM_TOL {
                    return Err(Error::InvalidState(format!("not Hermitian ({herm:.2e})")));
                }
                let min = self.min_eigenvalue();
                if min < -EIGEN_TOL {
                    return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
                }
            }
        }
        Ok(())
    }

    fn check_index(&self, q: usize) -> Result<()> {
        if q < self.num_qubits() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: q,
                n: self.num_qubits(),
            })
        }
    }

    fn check_distinct(&self, qubits: impl IntoIterator<Item = usize>) -> Result<()> {
        let mut seen = 0usize;
        for q in qubits {
            self.check_index(q)?;
            if seen & (1 << q) != 0 {
                return Err(Error::IndexCollision(q));
            }
            seen |= 1 << q;
        }
        Ok(())
    }

    fn transform(&mut self, op: impl Fn(&mut [C64])) {
        match &mut self.repr {
            Repr::Pure(v) => op(v.as_mut_slice()),
            Repr::Mixed(rho) => conjugate(rho, &op),
        }
    }

    /// Applies a gate in place.
    pub fn apply_gate(&mut self, spec: &GateSpec) -> Result<()> {
        if spec.targets.len() != spec.gate.arity() {
            return Err(Error::DimensionMismatch {
                expected: spec.gate.arity(),
                found: spec.targets.len(),
            });
        }
        self.check_distinct(spec.targets.iter().copied())?;
        let m = spec.gate.core_matrix();
        check_unitary(&m)?;
        match spec.gate.arity() {
            1 => {
                let q = spec.targets[0];
                self.transform(|v| apply_1q(v, q, &m));
            }
            _ => {
                let (ctl, tgt) = (spec.targets[0], spec.targets[1]);
                self.transform(|v| apply_controlled(v, ctl, tgt, &m));
            }
        }
        Ok(())
    }

    /// Applies a sequence of gates in order.
    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a GateSpec>) -> Result<()> {
        gates.into_iter().try_for_each(|g| self.apply_gate(g))
    }

    fn rotate_into_z(&mut self, basis: MeasBasis) {
        let q = basis.qubit;
        match basis.axis {
            Axis::Z => {}
            Axis::X => self.transform(|v| apply_1q(v, q, &hadamard())),
            Axis::Y => {
                let m = hadamard() * phase_z(-std::f64::consts::FRAC_PI_2);
                self.transform(|v| apply_1q(v, q, &m));
            }
        }
    }

    fn rotate_from_z(&mut self, basis: MeasBasis) {
        let q = basis.qubit;
        match basis.axis {
            Axis::Z => {}
            Axis::X => self.transform(|v| apply_1q(v, q, &hadamard())),
            Axis::Y => {
                let m = phase_z(std::f64::consts::FRAC_PI_2) * hadamard();
                self.transform(|v| apply_1q(v, q, &m));
            }
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Pure(v) => v.iter().map(|a| a.norm_sqr()).collect(),
            Repr::Mixed(rho) => (0..rho.nrows()).map(|i| rho[(i, i)].re).collect(),
        }
    }

    /// Born probability of `outcome` when measuring `basis`.
    pub fn probability(&self, basis: MeasBasis, outcome: u8) -> Result<f64> {
        self.check_index(basis.qubit)?;
        let mut rotated = self.clone();
        rotated.rotate_into_z(basis);
        let mask = 1usize << basis.qubit;
        let want = usize::from(outcome & 1) << basis.qubit;
        let p: f64 = rotated
            .diagonal()
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == want)
            .map(|(_, p)| p)
            .sum();
        Ok(p / rotated.trace())
    }

    /// Projects onto `outcome` and renormalizes; returns the outcome probability.
    pub fn project(&mut self, basis: MeasBasis, outcome: u8) -> Result<f64> {
        self.check_index(basis.qubit)?;
        self.rotate_into_z(basis);
        let mask = 1usize << basis.qubit;
        let want = usize::from(outcome & 1) << basis.qubit;
        let total = self.trace();
        let p = match &mut self.repr {
            Repr::Pure(v) => {
                for (i, a) in v.iter_mut().enumerate() {
                    if i & mask != want {
                        *a = c(0.0, 0.0);
                    }
                }
                v.norm_squared()
            }
            Repr::Mixed(rho) => {
                let d = rho.nrows();
                for i in 0..d {
                    for j in 0..d {
                        if i & mask != want || j & mask != want {
                            rho[(i, j)] = c(0.0, 0.0);
                        }
                    }
                }
                rho.trace().re
            }
        } / total;
        if p < ZERO_PROB {
            return Err(Error::ZeroProbability);
        }
        match &mut self.repr {
            Repr::Pure(v) => *v /= c((p * total).sqrt(), 0.0),
            Repr::Mixed(rho) => *rho /= c(p * total, 0.0),
        }
        self.rotate_from_z(basis);
        Ok(p)
    }

    /// Samples a projective measurement and collapses the state.
    pub fn measure<R: Rng + ?Sized>(&mut self, basis: MeasBasis, rng: &mut R) -> Result<u8> {
        let p1 = self.probability(basis, 1)?;
        let outcome = u8::from(rng.random::<f64>() < p1);
        self.project(basis, outcome)?;
        Ok(outcome)
    }

    /// Joint outcome distribution for measurements on distinct qubits.
    pub fn outcome_probabilities(&self, bases: &[MeasBasis]) -> Result<OutcomeDistribution> {
        self.check_distinct(bases.iter().map(|b| b.qubit))?;
        let mut rotated = self.clone();
        for &b in bases {
            rotated.rotate_into_z(b);
        }
        let total = rotated.trace();
        let mut probs = vec![0.0; 1 << bases.len()];
        for (i, p) in rotated.diagonal().into_iter().enumerate() {
            let key = bases
                .iter()
                .enumerate()
                .fold(0, |acc, (j, b)| acc | (((i >> b.qubit) & 1) << j));
            probs[key] += p / total;
        }
        Ok(OutcomeDistribution {
            axes: bases.iter().map(|b| b.axis).collect(),
            probs,
        })
    }

    /// Applies a noise channel to `targets`; pure states become mixed.
    pub fn apply_channel(&mut self, channel: Channel, targets: &[usize]) -> Result<()> {
        self.check_distinct(targets.iter().copied())?;
        match channel {
            Channel::Depolarizing(p) => check_range("p", p, 0.0, 1.0)?,
            Channel::Dephasing(p) => check_range("p", p, 0.0, 1.0)?,
            Channel::WhiteAdmixture(l) => check_range("lambda", l, 0.0, 1.0)?,
        }
        self.promote();
        let Repr::Mixed(rho) = &mut self.repr else {
            unreachable!("promoted above")
        };
        let mix = |rho: &DMatrix<C64>, other: DMatrix<C64>, w: f64| -> DMatrix<C64> {
            rho * c(1.0 - w, 0.0) + other * c(w, 0.0)
        };
        match channel {
            Channel::Depolarizing(p) => {
                for &q in targets {
                    let tw = twirl(rho, q);
                    *rho = mix(rho, tw, p);
                }
            }
            Channel::Dephasing(p) => {
                for &q in targets {
                    let mut flipped = rho.clone();
                    conjugate(&mut flipped, &|v: &mut [C64]| apply_1q(v, q, &pauli_z()));
                    *rho = mix(rho, flipped, p);
                }
            }
            Channel::WhiteAdmixture(l) => {
                let tw = targets.iter().fold(rho.clone(), |acc, &q| twirl(&acc, q));
                *rho = mix(rho, tw, l);
            }
        }
        Ok(())
    }

    /// Reduced state on `keep`, in the order given.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<QuantumState> {
        if keep.is_empty() {
            return Err(Error::EmptyKeep);
        }
        self.check_distinct(keep.iter().copied())?;
        let n = self.num_qubits();
        let env: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let spread = |value: usize, qubits: &[usize]| -> usize {
            qubits
                .iter()
                .enumerate()
                .fold(0, |acc, (j, &q)| acc | (((value >> j) & 1) << q))
        };
        let sub: Vec<usize> = (0..1usize << keep.len()).map(|i| spread(i, keep)).collect();
        let envs: Vec<usize> = (0..1usize << env.len()).map(|e| spread(e, &env)).collect();
        let d = sub.len();
        let mut out = DMatrix::zeros(d, d);
        match &self.repr {
            Repr::Pure(v) => {
                for &e in &envs {
                    for (i, &si) in sub.iter().enumerate() {
                        let a = v[si + e];
                        if a == c(0.0, 0.0) {
                            continue;
                        }
                        for (j, &sj) in sub.iter().enumerate() {
                            out[(i, j)] += a * v[sj + e].conj();
                        }
                    }
                }
            }
            Repr::Mixed(rho) => {
                for &e in &envs {
                    for (i, &si) in sub.iter().enumerate() {
                        for (j, &sj) in sub.iter().enumerate() {
                            out[(i, j)] += rho[(si + e, sj + e)];
                        }
                    }
                }
            }
        }
        Ok(QuantumState {
            repr: Repr::Mixed(out),
            labels: keep.iter().map(|&q| self.labels[q].clone()).collect(),
        })
    }

    /// Projects `qubits` onto computational values `bits` and removes them.
    ///
    /// Returns the probability of that projection and the normalized state
    /// of the remaining qubits (ascending order). Pure states stay pure.
    pub fn postselect(&self, qubits: &[usize], bits: &[u8]) -> Result<(f64, QuantumState)> {
        if qubits.len() != bits.len() {
            return Err(Error::DimensionMismatch {
                expected: qubits.len(),
                found: bits.len(),
            });
        }
        self.check_distinct(qubits.iter().copied())?;
        let n = self.num_qubits();
        let rest: Vec<usize> = (0..n).filter(|q| !qubits.contains(q)).collect();
        if rest.is_empty() {
            return Err(Error::EmptyKeep);
        }
        let fixed = qubits
            .iter()
            .zip(bits)
            .fold(0, |acc, (&q, &b)| acc | (usize::from(b & 1) << q));
        let idx: Vec<usize> = (0..1usize << rest.len())
            .map(|i| {
                rest.iter()
                    .enumerate()
                    .fold(fixed, |acc, (j, &q)| acc | (((i >> j) & 1) << q))
            })
            .collect();
        let total = self.trace();
        let labels: Vec<String> = rest.iter().map(|&q| self.labels[q].clone()).collect();
        let (p, repr) = match &self.repr {
            Repr::Pure(v) => {
                let sub = DVector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]));
                let p = sub.norm_squared() / total;
                (p, Repr::Pure(sub / c((p * total).sqrt().max(f64::MIN_POSITIVE), 0.0)))
            }
            Repr::Mixed(rho) => {
                let d = idx.len();
                let sub = DMatrix::from_fn(d, d, |i, j| rho[(idx[i], idx[j])]);
                let p = sub.trace().re / total;
                (p, Repr::Mixed(sub / c((p * total).max(f64::MIN_POSITIVE), 0.0)))
            }
        };
        if p < ZERO_PROB {
            return Err(Error::ZeroProbability);
        }
        Ok((p, QuantumState { repr, labels }))
    }

    /// `⟨P⟩` for a Pauli string on distinct qubits.
    pub fn expectation(&self, pauli: &PauliString) -> Result<f64> {
        self.check_distinct(pauli.0.iter().map(|(q, _)| *q))?;
        let apply = |v: &mut [C64]| {
            for (q, p) in &pauli.0 {
                apply_1q(v, *q, &p.matrix());
            }
        };
        let value = match &self.repr {
            Repr::Pure(v) => {
                let mut w = v.clone();
                apply(w.as_mut_slice());
                v.dotc(&w).re
            }
            Repr::Mixed(rho) => {
                let mut m = rho.clone();
                apply_columns(&mut m, &apply);
                m.trace().re
            }
        };
        Ok(value / self.trace())
    }

    /// `A ⊗ B` with `self` on the low qubits and `other` on the high qubits.
    pub fn tensor(&self, other: &QuantumState) -> Result<QuantumState> {
        let n = self.num_qubits() + other.num_qubits();
        if n > MAX_QUBITS {
            return Err(Error::QubitCount(n));
        }
        let da = self.dim();
        let labels = self.labels.iter().chain(&other.labels).cloned().collect();
        let repr = match (&self.repr, &other.repr) {
            (Repr::Pure(a), Repr::Pure(b)) => {
                Repr::Pure(DVector::from_fn(da * b.len(), |i, _| a[i % da] * b[i / da]))
            }
            _ => {
                let (a, b) = (self.density_matrix(), other.density_matrix());
                let d = da * b.nrows();
                Repr::Mixed(DMatrix::from_fn(d, d, |i, j| {
                    a[(i % da, j % da)] * b[(i / da, j / da)]
                }))
            }
        };
        Ok(QuantumState { repr, labels })
    }

    /// Reorders qubits: new qubit `k` is old qubit `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Result<QuantumState> {
        let n = self.num_qubits();
        if order.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: order.len(),
            });
        }
        self.check_distinct(order.iter().copied())?;
        let map = |new: usize| -> usize {
            order
                .iter()
                .enumerate()
                .fold(0, |acc, (k, &old)| acc | (((new >> k) & 1) << old))
        };
        let d = self.dim();
        let repr = match &self.repr {
            Repr::Pure(v) => Repr::Pure(DVector::from_fn(d, |i, _| v[map(i)])),
            Repr::Mixed(rho) => Repr::Mixed(DMatrix::from_fn(d, d, |i, j| rho[(map(i), map(j))])),
        };
        Ok(QuantumState {
            repr,
            labels: order.iter().map(|&k| self.labels[k].clone()).collect(),
        })
    }

    /// Distance that ignores global phase for pure pairs; Frobenius norm otherwise.
    pub fn distance(&self, other: &QuantumState) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(match (&self.repr, &other.repr) {
            (Repr::Pure(a), Repr::Pure(b)) => {
                // ‖a − e^{iθ}b‖ at the optimal θ; computing the difference
                // directly avoids the sqrt(2 − 2|⟨a|b⟩|) cancellation
                let overlap = b.dotc(a);
                let phase = if overlap.norm() > 0.0 {
                    overlap / overlap.norm()
                } else {
                    c(1.0, 0.0)
                };
                (a - b * phase).norm()
            }
            _ => (self.density_matrix() - other.density_matrix()).norm(),
        })
    }
}

/// `⟨ψ|ρ|ψ⟩` against a pure target, clipped to `[0, 1]`.
pub fn fidelity(rho: &QuantumState, target: &QuantumState) -> Result<f64> {
    let Some(psi) = target.amplitudes() else {
        return Err(Error::InvalidState("fidelity target must be pure".into()));
    };
    if rho.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            expected: target.dim(),
            found: rho.dim(),
        });
    }
    let f = match &rho.repr {
        Repr::Pure(v) => psi.dotc(v).norm_sqr(),
        Repr::Mixed(m) => psi.dotc(&(m * psi)).re,
    } / rho.trace();
    if f < -1e-10 || f > 1.0 + 1e-10 {
        return Err(Error::InvalidState(format!("fidelity {f} outside [0,1]")));
    }
    Ok(f.clamp(0.0, 1.0))
}

/// Joint outcome probabilities; index bit `j` is the outcome of basis `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub axes: Vec<Axis>,
    pub probs: Vec<f64>,
}

impl OutcomeDistribution {
    /// Outcome label, first basis first (e.g. `"+-"`).
    pub fn label(&self, index: usize) -> String {
        self.axes
            .iter()
            .enumerate()
            .map(|(j, a)| a.symbol(((index >> j) & 1) as u8))
            .collect()
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        (0..self.probs.len())
            .find(|&i| self.label(i) == label)
            .map(|i| self.probs[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (String, f64)> + '_ {
        self.probs.iter().enumerate().map(|(i, &p)| (self.label(i), p))
    }

    /// Outcome bits of the given index, first basis first.
    pub fn bits(&self, index: usize) -> Vec<u8> {
        (0..self.axes.len()).map(|j| ((index >> j) & 1) as u8).collect()
    }

    /// Draws one outcome index.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.random::<f64>();
        let mut acc = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        // rounding: fall back to the last outcome with nonzero weight
        self.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }
}
