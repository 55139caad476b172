//! Estimation and reporting: truth tables, witness matrix elements, Bell
//! fidelities, resampled error bars and the bundled reference fixtures.
//!
//! Two-qubit labels such as `"VH"` are written control first. For the
//! nonlocal CNOT the control is B4 and the target is A1.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::qsim::{BellState, MeasBasis, Pauli, PauliString, QuantumState};

pub const INPUTS: [&str; 4] = ["HH", "HV", "VH", "VV"];

/// Outcome counts for one measurement setting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountsTable {
    pub setting: String,
    pub counts: BTreeMap<String, u64>,
    pub shots: u64,
}

impl CountsTable {
    pub fn new(setting: impl Into<String>) -> Self {
        Self {
            setting: setting.into(),
            counts: BTreeMap::new(),
            shots: 0,
        }
    }

    pub fn from_counts(
        setting: impl Into<String>,
        counts: impl IntoIterator<Item = (String, u64)>,
    ) -> Self {
        let mut t = Self::new(setting);
        for (label, n) in counts {
            t.add_n(&label, n);
        }
        t
    }

    pub fn add(&mut self, label: &str) {
        self.add_n(label, 1);
    }

    pub fn add_n(&mut self, label: &str, n: u64) {
        *self.counts.entry(label.to_string()).or_default() += n;
        self.shots += n;
    }

    pub fn count(&self, label: &str) -> u64 {
        self.counts.get(label).copied().unwrap_or(0)
    }

    /// Relative frequency; 0 for an empty table.
    pub fn frequency(&self, label: &str) -> f64 {
        if self.shots == 0 {
            0.0
        } else {
            self.count(label) as f64 / self.shots as f64
        }
    }

    /// Adds the counts of `other` (same setting assumed).
    pub fn merge(&mut self, other: &CountsTable) {
        for (label, &n) in &other.counts {
            self.add_n(label, n);
        }
    }

    pub fn check(&self) -> Result<()> {
        let total: u64 = self.counts.values().sum();
        if total != self.shots {
            return Err(Error::Inconsistent(format!(
                "setting {}: counts sum to {total}, shots = {}",
                self.setting, self.shots
            )));
        }
        Ok(())
    }
}

/// Ideal CNOT output for a control-first label like `"VH"`.
pub fn cnot_ideal_output(input: &str) -> Result<String> {
    let chars: Vec<char> = input.chars().collect();
    match chars.as_slice() {
        ['H', t @ ('H' | 'V')] => Ok(format!("H{t}")),
        ['V', 'H'] => Ok("VV".into()),
        ['V', 'V'] => Ok("VH".into()),
        _ => Err(Error::Encoding(format!("not a two-qubit H/V label: `{input}`"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthTable {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    /// `probabilities[input][output]`.
    pub probabilities: Vec<Vec<f64>>,
    pub fidelity: f64,
}

impl TruthTable {
    /// Builds from an input-major probability matrix over [`INPUTS`].
    pub fn from_matrix(probabilities: Vec<Vec<f64>>) -> Result<Self> {
        if probabilities.len() != 4 || probabilities.iter().any(|r| r.len() != 4) {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: probabilities.len(),
            });
        }
        let mut fidelity = 0.0;
        for (i, input) in INPUTS.iter().enumerate() {
            let ideal = cnot_ideal_output(input)?;
            let j = INPUTS.iter().position(|o| *o == ideal).expect("ideal output is a basis label");
            fidelity += probabilities[i][j] / 4.0;
        }
        Ok(Self {
            inputs: INPUTS.iter().map(|s| s.to_string()).collect(),
            outputs: INPUTS.iter().map(|s| s.to_string()).collect(),
            probabilities,
            fidelity,
        })
    }

    pub fn transposed(&self) -> Result<Self> {
        let p = &self.probabilities;
        Self::from_matrix((0..4).map(|j| (0..4).map(|i| p[i][j]).collect()).collect())
    }

    /// Largest absolute deviation from the ideal permutation matrix.
    pub fn max_deviation_from_ideal(&self) -> Result<f64> {
        let ideal = TruthTable::ideal()?;
        Ok(max_abs_diff(&self.probabilities, &ideal.probabilities))
    }

    pub fn ideal() -> Result<Self> {
        let rows = INPUTS
            .iter()
            .map(|input| {
                let ideal = cnot_ideal_output(input)?;
                Ok(INPUTS.iter().map(|o| f64::from(u8::from(*o == ideal))).collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Self::from_matrix(rows)
    }
}

fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

/// Probability matrix and fidelity from one counts table per input setting.
pub fn truth_table_fidelity(tables: &[CountsTable]) -> Result<TruthTable> {
    let rows = INPUTS
        .iter()
        .map(|input| {
            let t = tables
                .iter()
                .find(|t| t.setting == *input)
                .ok_or_else(|| Error::Missing(format!("truth-table input {input}")))?;
            t.check()?;
            if t.shots == 0 {
                return Err(Error::Missing(format!("no counts for input {input}")));
            }
            Ok(INPUTS.iter().map(|o| t.frequency(o)).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    TruthTable::from_matrix(rows)
}

/// Real parts of the witness-accessible density-matrix elements.
///
/// Basis order is HH, HV, VH, VV with the first-written qubit first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellElements {
    pub diag: [f64; 4],
    /// Re⟨HH|ρ|VV⟩.
    pub hh_vv: f64,
    /// Re⟨HV|ρ|VH⟩.
    pub hv_vh: f64,
}

impl BellElements {
    /// Elements of a printed real matrix; off-diagonal pairs are averaged.
    pub fn from_matrix(m: &[[f64; 4]; 4]) -> Self {
        Self {
            diag: [m[0][0], m[1][1], m[2][2], m[3][3]],
            hh_vv: (m[0][3] + m[3][0]) / 2.0,
            hv_vh: (m[1][2] + m[2][1]) / 2.0,
        }
    }
}

/// Inputs for the witness: Z-basis populations and ⟨σx⊗σx⟩, ⟨σy⊗σy⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessInputs {
    /// Populations of HH, HV, VH, VV.
    pub populations: [f64; 4],
    pub xx: f64,
    pub yy: f64,
}

pub fn witness_real_elements(w: &WitnessInputs) -> Result<BellElements> {
    for (name, e) in [("xx", w.xx), ("yy", w.yy)] {
        if !e.is_finite() || e.abs() > 1.0 + 1e-12 {
            return Err(Error::Inconsistent(format!("⟨{name}⟩ = {e} outside [-1, 1]")));
        }
    }
    for p in w.populations {
        if !p.is_finite() || !(-1e-12..=1.0 + 1e-12).contains(&p) {
            return Err(Error::Inconsistent(format!("population {p} outside [0, 1]")));
        }
    }
    Ok(BellElements {
        diag: w.populations,
        hh_vv: (w.xx - w.yy) / 4.0,
        hv_vh: (w.xx + w.yy) / 4.0,
    })
}

/// Exact witness inputs of a two-qubit state; `first` is the first-written qubit.
pub fn witness_inputs_of(state: &QuantumState, first: usize, second: usize) -> Result<WitnessInputs> {
    let zz = state.outcome_probabilities(&[MeasBasis::z(first), MeasBasis::z(second)])?;
    let pops = [
        zz.get("00").unwrap_or(0.0),
        zz.get("01").unwrap_or(0.0),
        zz.get("10").unwrap_or(0.0),
        zz.get("11").unwrap_or(0.0),
    ];
    let xx = state.expectation(&PauliString::new([(first, Pauli::X), (second, Pauli::X)]))?;
    let yy = state.expectation(&PauliString::new([(first, Pauli::Y), (second, Pauli::Y)]))?;
    Ok(WitnessInputs {
        populations: pops,
        xx,
        yy,
    })
}

/// Witness inputs from counts in the ZZ, XX and YY settings.
///
/// Labels are two outcome symbols, first-written qubit first; `1`, `-`, `l`
/// and `V` count as the odd outcome.
pub fn witness_from_counts(zz: &CountsTable, xx: &CountsTable, yy: &CountsTable) -> Result<WitnessInputs> {
    for t in [zz, xx, yy] {
        t.check()?;
        if t.shots == 0 {
            return Err(Error::Missing(format!("setting {} has zero shots", t.setting)));
        }
    }
    let odd = |c: char| matches!(c, '1' | '-' | 'l' | 'V');
    let parity = |t: &CountsTable| -> Result<f64> {
        let mut sum = 0i64;
        for (label, &k) in &t.counts {
            let flips = label.chars().filter(|&c| odd(c)).count();
            if label.chars().count() != 2 {
                return Err(Error::Encoding(format!("expected a two-qubit label, got `{label}`")));
            }
            sum += if flips % 2 == 0 { k as i64 } else { -(k as i64) };
        }
        Ok(sum as f64 / t.shots as f64)
    };
    let mut populations = [0.0; 4];
    for (label, &k) in &zz.counts {
        let bits: Vec<bool> = label.chars().map(odd).collect();
        if bits.len() != 2 {
            return Err(Error::Encoding(format!("expected a two-qubit label, got `{label}`")));
        }
        populations[(usize::from(bits[0]) << 1) | usize::from(bits[1])] += k as f64 / zz.shots as f64;
    }
    Ok(WitnessInputs {
        populations,
        xx: parity(xx)?,
        yy: parity(yy)?,
    })
}

pub fn bell_fidelity(e: &BellElements, which: BellState) -> f64 {
    match which {
        BellState::PhiPlus => (e.diag[0] + e.diag[3]) / 2.0 + e.hh_vv,
        BellState::PhiMinus => (e.diag[0] + e.diag[3]) / 2.0 - e.hh_vv,
        BellState::PsiPlus => (e.diag[1] + e.diag[2]) / 2.0 + e.hv_vh,
        BellState::PsiMinus => (e.diag[1] + e.diag[2]) / 2.0 - e.hv_vh,
    }
}

/// `(1 + Vz + 2Vx)/4`.
pub fn fidelity_from_visibilities(vz: f64, vx: f64) -> Result<f64> {
    check_range("vz", vz, 0.0, 1.0)?;
    check_range("vx", vx, 0.0, vz)?;
    Ok((1.0 + vz + 2.0 * vx) / 4.0)
}

/// `λ = 1/(1 + snr)`.
pub fn snr_to_noise_fraction(snr: f64) -> Result<f64> {
    if snr.is_nan() || snr <= 0.0 {
        return Err(Error::Parameter {
            name: "snr",
            value: snr,
            reason: "must be positive",
        });
    }
    Ok(if snr.is_infinite() { 0.0 } else { 1.0 / (1.0 + snr) })
}

pub const MIN_RESAMPLES: usize = 1000;

fn resample<R: Rng + ?Sized>(table: &CountsTable, rng: &mut R) -> Result<CountsTable> {
    let mut out = CountsTable::new(table.setting.clone());
    let mut remaining = table.shots;
    let mut mass = 1.0;
    let n = table.counts.len();
    for (i, (label, &k)) in table.counts.iter().enumerate() {
        let p = k as f64 / table.shots as f64;
        let draw = if i + 1 == n || remaining == 0 {
            remaining
        } else {
            let q = (p / mass).clamp(0.0, 1.0);
            Binomial::new(remaining, q)
                .map_err(|e| Error::Inconsistent(e.to_string()))?
                .sample(rng)
        };
        out.add_n(label, draw);
        remaining -= draw;
        mass -= p;
    }
    Ok(out)
}

/// One-σ error of `statistic` by multinomial resampling of `table`.
pub fn error_bars<R: Rng + ?Sized>(
    table: &CountsTable,
    statistic: impl Fn(&CountsTable) -> f64,
    resamples: usize,
    rng: &mut R,
) -> Result<f64> {
    error_bars_multi(std::slice::from_ref(table), |ts| statistic(&ts[0]), resamples, rng)
}

/// Like [`error_bars`] for a statistic of several independent tables.
pub fn error_bars_multi<R: Rng + ?Sized>(
    tables: &[CountsTable],
    statistic: impl Fn(&[CountsTable]) -> f64,
    resamples: usize,
    rng: &mut R,
) -> Result<f64> {
    for t in tables {
        t.check()?;
        if t.shots == 0 {
            return Err(Error::Missing(format!("setting {} has zero shots", t.setting)));
        }
    }
    let resamples = resamples.max(MIN_RESAMPLES);
    let mut values = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let drawn = tables
            .iter()
            .map(|t| resample(t, rng))
            .collect::<Result<Vec<_>>>()?;
        values.push(statistic(&drawn));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    Ok(var.sqrt())
}

// ---------------------------------------------------------------------------
// reference fixtures

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefTruthTable {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    /// Input-major.
    pub probabilities: Vec<Vec<f64>>,
    /// `null` where the published cell is a bare 0.
    pub errors: Vec<Vec<Option<f64>>>,
    pub fidelity: f64,
    pub fidelity_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefDj {
    pub oracles: Vec<String>,
    pub p_h: Vec<f64>,
    pub p_v: Vec<f64>,
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefIpea {
    pub u: String,
    pub phase_over_pi: f64,
    /// Most significant bit first.
    pub bits: String,
    pub p0: Vec<f64>,
    pub p1: Vec<f64>,
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefBellMatrix {
    pub state: BellName,
    pub input: String,
    pub real: [[f64; 4]; 4],
    pub fidelity: f64,
    pub fidelity_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BellName {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl From<BellName> for BellState {
    fn from(b: BellName) -> Self {
        match b {
            BellName::PhiPlus => BellState::PhiPlus,
            BellName::PhiMinus => BellState::PhiMinus,
            BellName::PsiPlus => BellState::PsiPlus,
            BellName::PsiMinus => BellState::PsiMinus,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceData {
    pub truth_table: RefTruthTable,
    pub dj: RefDj,
    pub ipea: Vec<RefIpea>,
    pub bell_matrices: Vec<RefBellMatrix>,
}

const BUNDLED: &str = include_str!("../fixtures/reference.json");

const SYMMETRY_TOL: f64 = 0.002;

fn check_prob(what: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Schema {
            path: what.to_string(),
            message: format!("probability {p} outside [0, 1]"),
        })
    }
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.into(),
        message: message.into(),
    }
}

impl ReferenceData {
    pub fn validate(&self) -> Result<()> {
        let tt = &self.truth_table;
        if tt.probabilities.len() != 4 || tt.probabilities.iter().any(|r| r.len() != 4) {
            return Err(schema("truth_table.probabilities", "expected a 4x4 matrix"));
        }
        if tt.errors.len() != 4 || tt.errors.iter().any(|r| r.len() != 4) {
            return Err(schema("truth_table.errors", "expected a 4x4 matrix"));
        }
        if tt.inputs != INPUTS || tt.outputs != INPUTS {
            return Err(schema("truth_table.inputs", "labels must be HH, HV, VH, VV"));
        }
        for (i, row) in tt.probabilities.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                check_prob(&format!("truth_table.probabilities[{i}][{j}]"), p)?;
            }
        }
        let n = self.dj.oracles.len();
        if self.dj.p_h.len() != n || self.dj.p_v.len() != n || self.dj.errors.len() != n {
            return Err(schema("dj", "column lengths differ"));
        }
        for (k, (&h, &v)) in self.dj.p_h.iter().zip(&self.dj.p_v).enumerate() {
            check_prob(&format!("dj.p_h[{k}]"), h)?;
            check_prob(&format!("dj.p_v[{k}]"), v)?;
        }
        for (k, row) in self.ipea.iter().enumerate() {
            let m = row.bits.len();
            if row.p0.len() != m || row.p1.len() != m || row.errors.len() != m {
                return Err(schema(format!("ipea[{k}]"), "per-round columns must match bit count"));
            }
            if !row.bits.chars().all(|c| c == '0' || c == '1') {
                return Err(schema(format!("ipea[{k}].bits"), "bits must be 0/1"));
            }
            for (r, (&a, &b)) in row.p0.iter().zip(&row.p1).enumerate() {
                check_prob(&format!("ipea[{k}].p0[{r}]"), a)?;
                check_prob(&format!("ipea[{k}].p1[{r}]"), b)?;
            }
        }
        for (k, b) in self.bell_matrices.iter().enumerate() {
            for i in 0..4 {
                for j in 0..4 {
                    if (b.real[i][j] - b.real[j][i]).abs() > SYMMETRY_TOL {
                        return Err(schema(
                            format!("bell_matrices[{k}].real[{i}][{j}]"),
                            "matrix is not symmetric",
                        ));
                    }
                }
                check_prob(&format!("bell_matrices[{k}].real[{i}][{i}]"), b.real[i][i])?;
            }
        }
        Ok(())
    }

    pub fn ipea_row(&self, u: &str) -> Option<&RefIpea> {
        self.ipea.iter().find(|r| r.u == u)
    }

    pub fn bell_matrix(&self, which: BellState) -> Option<&RefBellMatrix> {
        self.bell_matrices
            .iter()
            .find(|b| BellState::from(b.state) == which)
    }

    /// Truth table built from the fixture matrix.
    pub fn truth_table(&self) -> Result<TruthTable> {
        TruthTable::from_matrix(self.truth_table.probabilities.clone())
    }
}

/// Parses a fixture document, reporting the field path on failure.
pub fn parse_reference(text: &str) -> Result<ReferenceData> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let data: ReferenceData = serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    data.validate()?;
    Ok(data)
}

pub fn ingest_reference(path: impl AsRef<Path>) -> Result<ReferenceData> {
    parse_reference(&std::fs::read_to_string(path)?)
}

/// The fixture shipped with the crate.
pub fn bundled_reference() -> ReferenceData {
    parse_reference(BUNDLED).expect("bundled fixture is valid")
}

pub fn bundled_reference_json() -> &'static str {
    BUNDLED
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Multiplier on each published one-σ error.
    pub sigma_scale: f64,
    /// Tolerance for cells published without an error.
    pub zero_cell: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            sigma_scale: 1.0,
            zero_cell: 0.021,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellComparison {
    pub section: String,
    pub key: String,
    pub measured: f64,
    pub reference: f64,
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub cells: Vec<CellComparison>,
    pub max_deviation: f64,
    pub pass: bool,
}

impl ComparisonReport {
    fn push(&mut self, section: &str, key: String, measured: f64, reference: f64, tolerance: f64) {
        let deviation = (measured - reference).abs();
        self.cells.push(CellComparison {
            section: section.to_string(),
            key,
            measured,
            reference,
            deviation,
            tolerance,
            pass: deviation <= tolerance + 1e-12,
        });
    }

    fn finish(mut self) -> Self {
        self.max_deviation = self.cells.iter().map(|c| c.deviation).fold(0.0, f64::max);
        self.pass = self.cells.iter().all(|c| c.pass);
        self
    }
}

/// Simulated results to compare against the fixtures; absent sections are skipped.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExperimentResults {
    pub truth_table: Option<TruthTable>,
    /// P(H) per oracle name.
    pub dj_p_h: Option<BTreeMap<String, f64>>,
    /// Per-round P(0), most significant bit first, keyed by `u`.
    pub ipea_p0: Option<BTreeMap<String, Vec<f64>>>,
    pub bell_fidelities: Option<BTreeMap<String, f64>>,
}

pub fn bell_key(which: BellState) -> &'static str {
    match which {
        BellState::PhiPlus => "phi_plus",
        BellState::PhiMinus => "phi_minus",
        BellState::PsiPlus => "psi_plus",
        BellState::PsiMinus => "psi_minus",
    }
}

pub fn compare_to_reference(
    results: &ExperimentResults,
    reference: &ReferenceData,
    tol: &Tolerances,
) -> ComparisonReport {
    let mut report = ComparisonReport::default();
    if let Some(tt) = &results.truth_table {
        let r = &reference.truth_table;
        for i in 0..4 {
            for j in 0..4 {
                let t = r.errors[i][j].map_or(tol.zero_cell, |e| e * tol.sigma_scale);
                report.push(
                    "truth_table",
                    format!("{}->{}", r.inputs[i], r.outputs[j]),
                    tt.probabilities[i][j],
                    r.probabilities[i][j],
                    t,
                );
            }
        }
        report.push(
            "truth_table",
            "fidelity".into(),
            tt.fidelity,
            r.fidelity,
            r.fidelity_error * tol.sigma_scale,
        );
    }
    if let Some(dj) = &results.dj_p_h {
        for (k, name) in reference.dj.oracles.iter().enumerate() {
            if let Some(&p) = dj.get(name) {
                report.push(
                    "dj",
                    name.clone(),
                    p,
                    reference.dj.p_h[k],
                    reference.dj.errors[k] * tol.sigma_scale,
                );
            }
        }
    }
    if let Some(ipea) = &results.ipea_p0 {
        for row in &reference.ipea {
            if let Some(p0) = ipea.get(&row.u) {
                for (r, (&m, &e)) in p0.iter().zip(&row.p0).enumerate() {
                    report.push(
                        "ipea",
                        format!("{}[{r}]", row.u),
                        m,
                        e,
                        row.errors[r] * tol.sigma_scale,
                    );
                }
            }
        }
    }
    if let Some(bell) = &results.bell_fidelities {
        for b in &reference.bell_matrices {
            let key = bell_key(b.state.into());
            if let Some(&f) = bell.get(key) {
                report.push("bell", key.into(), f, b.fidelity, b.fidelity_error * tol.sigma_scale);
            }
        }
    }
    report.finish()
}
