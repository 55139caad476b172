//! Two-node network layer: fiber channels, AFC memory, temporal multiplexing,
//! feedforward deadlines, loss sampling and rate accounting.
//!
//! Times are in microseconds unless a field name says otherwise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{CountsTable, INPUTS};
use crate::config::ExperimentConfig;
use crate::error::{check_range, Error, Result};
use crate::photon::make_entangled_pair;
use crate::qsim::{Channel, MeasBasis, QuantumState};
use crate::teleport::{cnot_branches, CorrOp, CorrectionSpec, LossFlag, Outcome, TeleportMode, TrialRecord};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// End-to-end rate used to calibrate the pair rate when none is given, Hz.
pub const REFERENCE_GATE_RATE_HZ: f64 = 0.042;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelParams {
    pub length_km: f64,
    /// Transmission plus coupling loss; unused for classical channels.
    pub attenuation_db: f64,
    pub propagation_us_per_km: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self::quantum()
    }
}

impl ChannelParams {
    pub fn quantum() -> Self {
        Self {
            length_km: 7.9,
            attenuation_db: 2.2,
            propagation_us_per_km: 5.0,
        }
    }

    pub fn classical() -> Self {
        Self {
            attenuation_db: 0.0,
            ..Self::quantum()
        }
    }

    pub fn validate(&self, name: &'static str) -> Result<()> {
        for (field, v) in [
            ("length_km", self.length_km),
            ("attenuation_db", self.attenuation_db),
            ("propagation_us_per_km", self.propagation_us_per_km),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!("channels.{name}.{field} must be non-negative")));
            }
        }
        Ok(())
    }
}

pub fn propagation_delay(ch: &ChannelParams) -> f64 {
    ch.length_km * ch.propagation_us_per_km
}

/// `10^(−dB/10)`.
pub fn fiber_transmittance(db: f64) -> Result<f64> {
    if db.is_nan() || db < 0.0 {
        return Err(Error::Parameter {
            name: "db",
            value: db,
            reason: "loss must be non-negative",
        });
    }
    Ok(10f64.powf(-db / 10.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MemoryParams {
    pub eta0: f64,
    pub t2_afc_us: f64,
    pub storage_time_us: f64,
    pub bandwidth_mhz: f64,
    pub slot_ns: f64,
    pub window_us: f64,
}

impl Default for MemoryParams {
    fn default() -> Self {
        Self {
            eta0: 0.278,
            t2_afc_us: 148.0,
            storage_time_us: 80.315,
            bandwidth_mhz: 24.0,
            slot_ns: 72.0,
            window_us: 79.0,
        }
    }
}

impl MemoryParams {
    pub fn validate(&self) -> Result<()> {
        check_range("memory.eta0", self.eta0, 0.0, 1.0)?;
        let positive = |name: &'static str, v: f64| {
            check_range(name, v, f64::MIN_POSITIVE, f64::MAX)
        };
        positive("memory.t2_afc_us", self.t2_afc_us)?;
        positive("memory.bandwidth_mhz", self.bandwidth_mhz)?;
        positive("memory.slot_ns", self.slot_ns)?;
        check_range("memory.storage_time_us", self.storage_time_us, 0.0, f64::MAX)?;
        if self.window_us * 1000.0 < self.slot_ns {
            return Err(Error::Config("memory.window_us must cover at least one slot".into()));
        }
        Ok(())
    }
}

/// `η₀·exp(−4t/T₂)`.
pub fn memory_efficiency(t_us: f64, mem: &MemoryParams) -> Result<f64> {
    check_range("t", t_us, 0.0, f64::MAX)?;
    Ok(mem.eta0 * (-4.0 * t_us / mem.t2_afc_us).exp())
}

/// Time at which the efficiency has dropped to `η₀/e`.
pub fn memory_1e_time(mem: &MemoryParams) -> f64 {
    mem.t2_afc_us / 4.0
}

/// Number of temporal slots that fit in the multiplexing window.
pub fn mode_capacity(mem: &MemoryParams) -> Result<u64> {
    if !(mem.slot_ns > 0.0) {
        return Err(Error::Parameter {
            name: "slot_ns",
            value: mem.slot_ns,
            reason: "must be positive",
        });
    }
    // the epsilon absorbs decimal-to-binary error, e.g. 0.72 µs / 72 ns
    Ok((mem.window_us * 1000.0 / mem.slot_ns + 1e-9).floor() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageRole {
    /// Branch postselection of the teleportation scheme itself.
    Scheme,
    /// A physical loss sampled per trial.
    Physical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StageValue {
    Probability(f64),
    Db(f64),
    /// Success probability of the configured teleport mode.
    TeleportMode,
    /// `memory_efficiency` at the configured storage time.
    MemoryStorage,
    /// Attenuation of the quantum channel.
    QuantumChannel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossStage {
    pub name: String,
    pub role: StageRole,
    pub value: StageValue,
}

impl LossStage {
    fn new(name: &str, role: StageRole, value: StageValue) -> Self {
        Self {
            name: name.to_string(),
            role,
            value,
        }
    }

    fn physical(name: &str, p: f64) -> Self {
        Self::new(name, StageRole::Physical, StageValue::Probability(p))
    }
}

fn default_duty_cycle() -> f64 {
    0.037
}

fn default_stages() -> Vec<LossStage> {
    use StageRole::Physical;
    vec![
        LossStage::new("teleport_scheme", StageRole::Scheme, StageValue::TeleportMode),
        LossStage::physical("postselection_580", 0.5),
        LossStage::physical("postselection_1537", 0.5),
        LossStage::physical("collection", 0.42),
        LossStage::physical("heralding", 0.049),
        LossStage::physical("etalon_580", 0.63),
        LossStage::physical("etalon_1537", 0.63),
        LossStage::new("fiber_7.9km", Physical, StageValue::QuantumChannel),
        LossStage::physical("coupling_580", 0.71),
        LossStage::physical("coupling_1537", 0.62),
        LossStage::new("memory_storage", Physical, StageValue::MemoryStorage),
        LossStage::physical("memory_setup", 0.65),
        LossStage::physical("bandwidth_matching", 0.08),
        LossStage::physical("detection_580", 0.80),
        LossStage::physical("detection_1537", 0.91),
    ]
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossChain {
    #[serde(default = "default_stages")]
    pub stages: Vec<LossStage>,
    #[serde(default = "default_duty_cycle")]
    pub duty_cycle: f64,
    /// Sample physical losses per trial; when false every photon arrives.
    #[serde(default = "default_true")]
    pub sample: bool,
}

impl Default for LossChain {
    fn default() -> Self {
        Self {
            stages: default_stages(),
            duty_cycle: default_duty_cycle(),
            sample: true,
        }
    }
}

impl LossChain {
    /// Chain of plain probabilities, for ad-hoc budgets.
    pub fn from_probabilities(stages: &[(&str, f64)]) -> Self {
        Self {
            stages: stages.iter().map(|(n, p)| LossStage::physical(n, *p)).collect(),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LocalOp {
    I,
    X,
}

/// Correction applied at node A for each node-B detector signal.
///
/// S1/S2 fire when qubit 3 reads 1, S3/S4 when it reads 0; within each
/// pair the B4 polarization picks the detector (H first).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeedforwardMap {
    pub s1: LocalOp,
    pub s2: LocalOp,
    pub s3: LocalOp,
    pub s4: LocalOp,
}

impl Default for FeedforwardMap {
    fn default() -> Self {
        Self {
            s1: LocalOp::X,
            s2: LocalOp::X,
            s3: LocalOp::I,
            s4: LocalOp::I,
        }
    }
}

impl FeedforwardMap {
    /// Detector index 1..=4 for the qubit-3 bit and the B4 output bit.
    pub fn signal(b3: u8, b4: u8) -> u8 {
        match (b3 & 1, b4 & 1) {
            (1, 0) => 1,
            (1, _) => 2,
            (_, 0) => 3,
            _ => 4,
        }
    }

    pub fn op(&self, signal: u8) -> LocalOp {
        match signal {
            1 => self.s1,
            2 => self.s2,
            3 => self.s3,
            _ => self.s4,
        }
    }
}

/// Resolved probability of each stage.
pub fn stage_probability(stage: &LossStage, cfg: &ExperimentConfig) -> Result<f64> {
    let p = match &stage.value {
        StageValue::Probability(p) => *p,
        StageValue::Db(db) => fiber_transmittance(*db)?,
        StageValue::TeleportMode => cfg.teleport_mode.success_probability(),
        StageValue::MemoryStorage => memory_efficiency(cfg.memory.storage_time_us, &cfg.memory)?,
        StageValue::QuantumChannel => fiber_transmittance(cfg.channels.qc.attenuation_db)?,
    };
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter {
            name: "stage probability",
            value: p,
            reason: "outside [0, 1]",
        });
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetLine {
    pub name: String,
    pub role: StageRole,
    pub probability: f64,
    pub cumulative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateBudget {
    pub stages: Vec<BudgetLine>,
    pub product: f64,
    /// Product over physical stages only.
    pub physical_product: f64,
    pub duty_cycle: f64,
    /// Duty cycle implied by the preparation/storage time sequence.
    pub implied_duty_cycle: f64,
}

/// Per-stage cumulative product of `chain`.
pub fn rate_budget(chain: &LossChain, cfg: &ExperimentConfig) -> Result<RateBudget> {
    let mut cumulative = 1.0;
    let mut physical = 1.0;
    let mut stages = Vec::with_capacity(chain.stages.len());
    for stage in &chain.stages {
        let p = stage_probability(stage, cfg)?;
        cumulative *= p;
        if stage.role == StageRole::Physical {
            physical *= p;
        }
        stages.push(BudgetLine {
            name: stage.name.clone(),
            role: stage.role,
            probability: p,
            cumulative,
        });
    }
    Ok(RateBudget {
        stages,
        product: cumulative,
        physical_product: physical,
        duty_cycle: chain.duty_cycle,
        implied_duty_cycle: implied_duty_cycle(cfg),
    })
}

/// Storage windows per preparation cycle over the full cycle length.
pub fn implied_duty_cycle(cfg: &ExperimentConfig) -> f64 {
    let t = &cfg.timing;
    let n = t.cycles_per_preparation as f64;
    let window_s = n * cfg.memory.window_us * 1e-6;
    window_s / (t.preparation_s + n * t.cycle_period_us * 1e-6)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Throughput {
    pub n_modes: u64,
    pub per_attempt_probability: f64,
    pub pair_rate_hz: f64,
    pub pair_rate_calibrated: bool,
    pub duty_cycle: f64,
    pub rate_hz: f64,
    pub successes_per_hour: f64,
}

/// Expected successful gates; exactly linear in `n_modes`.
pub fn throughput(cfg: &ExperimentConfig, n_modes: u64) -> Result<Throughput> {
    let budget = rate_budget(&cfg.losses, cfg)?;
    let p = budget.product;
    let duty = cfg.losses.duty_cycle;
    let (pair_rate, calibrated) = match cfg.source.pair_rate_hz {
        Some(r) => (r, false),
        None => {
            let denom = p * duty * cfg.n_modes as f64;
            if denom <= 0.0 {
                return Err(Error::Config("cannot calibrate pair rate: zero success probability".into()));
            }
            (REFERENCE_GATE_RATE_HZ / denom, true)
        }
    };
    let per_mode = pair_rate * p * duty;
    let rate_hz = per_mode * n_modes as f64;
    Ok(Throughput {
        n_modes,
        per_attempt_probability: p,
        pair_rate_hz: pair_rate,
        pair_rate_calibrated: calibrated,
        duty_cycle: duty,
        rate_hz,
        successes_per_hour: rate_hz * 3600.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceCheck {
    pub wavelength: String,
    pub bandwidth_mhz: f64,
    pub coherence_time_ns: f64,
    pub ratio: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub qc_delay_us: f64,
    pub measurement_latency_us: f64,
    pub cc_delay_us: f64,
    pub required_storage_us: f64,
    pub storage_time_us: f64,
    pub slack_us: f64,
    pub storage_ok: bool,
    pub arm_delay_ns: f64,
    pub min_ratio: f64,
    pub coherence: Vec<CoherenceCheck>,
    pub feasible: bool,
}

pub fn validate_timing(cfg: &ExperimentConfig) -> TimingReport {
    let qc = propagation_delay(&cfg.channels.qc);
    let cc = propagation_delay(&cfg.channels.cc);
    let latency = cfg.timing.measurement_latency_us;
    let required = qc + latency + cc;
    let storage = cfg.memory.storage_time_us;
    let slack = storage - required;
    let arm_delay_ns =
        cfg.timing.interferometer_arm_m * cfg.timing.fiber_group_index / SPEED_OF_LIGHT * 1e9;
    let min_ratio = cfg.timing.min_delay_coherence_ratio;
    let coherence: Vec<CoherenceCheck> = [
        ("580nm", cfg.source.bandwidth_580_mhz),
        ("1537nm", cfg.source.bandwidth_1537_mhz),
    ]
    .into_iter()
    .map(|(wavelength, bw)| {
        let coherence_time_ns = 1e3 / bw;
        let ratio = arm_delay_ns / coherence_time_ns;
        CoherenceCheck {
            wavelength: wavelength.to_string(),
            bandwidth_mhz: bw,
            coherence_time_ns,
            ratio,
            pass: ratio >= min_ratio,
        }
    })
    .collect();
    let storage_ok = slack >= -1e-9;
    let feasible = storage_ok && coherence.iter().all(|c| c.pass);
    TimingReport {
        qc_delay_us: qc,
        measurement_latency_us: latency,
        cc_delay_us: cc,
        required_storage_us: required,
        storage_time_us: storage,
        slack_us: slack,
        storage_ok,
        arm_delay_ns,
        min_ratio,
        coherence,
        feasible,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TrialTotals {
    pub shots: u64,
    /// Trials with no physical loss.
    pub detected: u64,
    pub deadline_missed: u64,
    pub kept: u64,
}

impl TrialTotals {
    /// Kept fraction among detected trials.
    pub fn kept_fraction(&self) -> f64 {
        if self.detected == 0 {
            0.0
        } else {
            self.kept as f64 / self.detected as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRun {
    pub records: Vec<TrialRecord>,
    pub counts: Vec<CountsTable>,
    pub totals: TrialTotals,
}

/// Precomputed measurement branches for one input setting.
struct SettingBranches {
    label: &'static str,
    branches: Vec<BranchData>,
}

struct BranchData {
    probability: f64,
    a2: Outcome,
    b3: Outcome,
    correction: CorrectionSpec,
    /// Z-basis joint distribution of (B4, A1) before feedforward; index bit 0 is B4.
    z_probs: [f64; 4],
}

fn pol(bit: usize) -> char {
    if bit & 1 == 0 {
        'H'
    } else {
        'V'
    }
}

/// (q1, q4) basis state for a control-first label such as `"VH"`.
pub fn input_state(label: &str) -> Result<QuantumState> {
    let bits: Vec<u8> = label
        .chars()
        .map(|c| match c {
            'H' => Ok(0),
            'V' => Ok(1),
            other => Err(Error::Encoding(format!("not a polarization symbol: `{other}`"))),
        })
        .collect::<Result<_>>()?;
    if bits.len() != 2 {
        return Err(Error::Encoding(format!("expected two symbols, got `{label}`")));
    }
    QuantumState::basis(&[bits[1], bits[0]], &["A1@pol", "B4@pol"])
}

/// Output noise on (1, 4) after the nonlocal gate.
pub fn apply_gate_noise(state: &mut QuantumState, lambda: f64, depolarizing_p: f64) -> Result<()> {
    if lambda > 0.0 {
        state.apply_channel(Channel::WhiteAdmixture(lambda), &[0, 1])?;
    }
    if depolarizing_p > 0.0 {
        state.apply_channel(Channel::Depolarizing(depolarizing_p), &[0, 1])?;
    }
    Ok(())
}

fn precompute(cfg: &ExperimentConfig) -> Result<Vec<SettingBranches>> {
    let epr = make_entangled_pair(&cfg.source)?;
    let lambda = cfg.noise.lambda()?;
    INPUTS
        .iter()
        .map(|&label| {
            let input = input_state(label)?;
            let branches = cnot_branches(&input, &epr, cfg.teleport_mode)?
                .into_iter()
                .map(|b| {
                    let mut raw = b.raw;
                    apply_gate_noise(&mut raw, lambda, cfg.noise.depolarizing_p)?;
                    let dist = raw.outcome_probabilities(&[MeasBasis::z(1), MeasBasis::z(0)])?;
                    let mut z_probs = [0.0; 4];
                    z_probs.copy_from_slice(&dist.probs);
                    Ok(BranchData {
                        probability: b.probability,
                        a2: b.a2,
                        b3: b.b3,
                        correction: b.correction,
                        z_probs,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(SettingBranches { label, branches })
        })
        .collect()
}

fn pick<R: Rng + ?Sized>(weights: impl Iterator<Item = f64>, rng: &mut R) -> usize {
    let u = rng.random::<f64>();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, w) in weights.enumerate() {
        acc += w;
        if w > 0.0 {
            last = i;
        }
        if u < acc {
            return i;
        }
    }
    last
}

/// RNG for one trial: the seed picks the key, the trial id the stream.
pub fn trial_rng(seed: u64, trial_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial_id);
    rng
}

struct Physical {
    name: String,
    probability: f64,
}

#[allow(clippy::too_many_arguments)]
fn run_one(
    trial_id: u64,
    seed: u64,
    cfg: &ExperimentConfig,
    settings: &[SettingBranches],
    physical: &[Physical],
    delays: (f64, f64, f64),
) -> TrialRecord {
    let mut rng = trial_rng(seed, trial_id);
    let n_modes = cfg.n_modes.max(1);
    let mode = trial_id % n_modes;
    let cycle = trial_id / n_modes;
    let (qc, cc, latency) = delays;

    let mut rec = TrialRecord::new(trial_id);
    rec.mode_index = mode;
    rec.t_generated = cycle as f64 * cfg.timing.cycle_period_us + mode as f64 * cfg.memory.slot_ns / 1000.0;
    rec.t_measured_b = rec.t_generated + qc + latency;
    rec.t_msg_arrival = rec.t_measured_b + cc;
    rec.t_retrieval = rec.t_generated + cfg.memory.storage_time_us;

    // draw every stage so the stream layout does not depend on earlier losses
    rec.loss_flags = physical
        .iter()
        .map(|s| {
            let u = rng.random::<f64>();
            LossFlag {
                stage: s.name.clone(),
                lost: cfg.losses.sample && u >= s.probability,
            }
        })
        .collect();

    let setting = &settings[(trial_id % settings.len() as u64) as usize];
    let b = &setting.branches[pick(setting.branches.iter().map(|b| b.probability), &mut rng)];
    let out = pick(b.z_probs.iter().copied(), &mut rng);
    let (b4, mut a1) = (out & 1, (out >> 1) & 1);

    rec.a2_outcome = Some(b.a2);
    rec.b3_outcome = Some(b.b3);
    let mut ops = Vec::new();
    if cfg.teleport_mode != TeleportMode::NoLocc {
        let signal = FeedforwardMap::signal(b.b3.bit, b4 as u8);
        if cfg.feedforward.op(signal) == LocalOp::X {
            ops.push(CorrOp::X1);
            a1 ^= 1;
        }
    }
    if cfg.teleport_mode == TeleportMode::FullCorrection && b.a2.bit == 1 {
        // σz on qubit 4 does not change Z-basis counts
        ops.push(CorrOp::Z4);
    }
    let in_time = rec.t_msg_arrival <= rec.t_retrieval + 1e-9;
    rec.kept = b.correction.keep && in_time && !rec.any_loss();
    rec.correction = CorrectionSpec {
        keep: b.correction.keep,
        ops,
    };
    rec.input = Some(setting.label.to_string());
    rec.output = rec.kept.then(|| format!("{}{}", pol(b4), pol(a1)));
    rec.deadline_met = Some(in_time);
    rec
}

/// Simulates `shots` multiplexed attempts of the nonlocal CNOT.
///
/// Input settings cycle through HH, HV, VH, VV (control B4 first). Each trial
/// draws from its own RNG stream, so the output does not depend on how the
/// batch is scheduled across threads.
pub fn run_trials(cfg: &ExperimentConfig, shots: u64, seed: u64) -> Result<TrialRun> {
    cfg.validate()?;
    let timing = validate_timing(cfg);
    if !timing.feasible && !cfg.timing.allow_infeasible {
        return Err(Error::Config(format!(
            "timing infeasible (slack {:.3} us); set timing.allow_infeasible to run anyway",
            timing.slack_us
        )));
    }
    let settings = precompute(cfg)?;
    let physical = cfg
        .losses
        .stages
        .iter()
        .filter(|s| s.role == StageRole::Physical)
        .map(|s| {
            Ok(Physical {
                name: s.name.clone(),
                probability: stage_probability(s, cfg)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let delays = (timing.qc_delay_us, timing.cc_delay_us, timing.measurement_latency_us);
    let records: Vec<TrialRecord> = (0..shots)
        .into_par_iter()
        .map(|id| run_one(id, seed, cfg, &settings, &physical, delays))
        .collect();

    let mut counts: Vec<CountsTable> = INPUTS.iter().map(|s| CountsTable::new(*s)).collect();
    let mut totals = TrialTotals {
        shots,
        ..Default::default()
    };
    for r in &records {
        if !r.any_loss() {
            totals.detected += 1;
        }
        if r.deadline_met == Some(false) {
            totals.deadline_missed += 1;
        }
        if r.kept {
            totals.kept += 1;
            let k = (r.trial_id % 4) as usize;
            if let Some(out) = &r.output {
                counts[k].add(out);
            }
        }
    }
    Ok(TrialRun {
        records,
        counts,
        totals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delay_examples() {
        let qc = ChannelParams::quantum();
        assert!((propagation_delay(&qc) - 39.5).abs() < 1e-12);
        let round = propagation_delay(&qc) + propagation_delay(&ChannelParams::classical());
        assert!((round - 79.0).abs() < 1e-12);
        let zero = ChannelParams {
            length_km: 0.0,
            ..qc.clone()
        };
        assert_eq!(propagation_delay(&zero), 0.0);
        let long = ChannelParams {
            length_km: 15.8,
            ..qc
        };
        assert!((propagation_delay(&long) - 79.0).abs() < 1e-12);
    }

    #[test]
    fn transmittance_examples() {
        assert_eq!(fiber_transmittance(0.0).unwrap(), 1.0);
        assert!((fiber_transmittance(2.2).unwrap() - 0.603).abs() < 5e-4);
        assert!((fiber_transmittance(10.0).unwrap() - 0.1).abs() < 1e-15);
        assert!(fiber_transmittance(-1.0).is_err());
    }

    #[test]
    fn memory_examples() {
        let m = MemoryParams::default();
        let eta = memory_efficiency(80.315, &m).unwrap();
        assert!((eta - 0.0317).abs() < 1e-4);
        assert_eq!(memory_efficiency(0.0, &m).unwrap(), 0.278);
        let t = memory_1e_time(&m);
        assert_eq!(t, 37.0);
        assert!((memory_efficiency(t, &m).unwrap() - 0.278 / std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn capacity_examples() {
        let m = MemoryParams::default();
        assert_eq!(mode_capacity(&m).unwrap(), 1097);
        let one = MemoryParams {
            window_us: 0.072,
            ..m.clone()
        };
        assert_eq!(mode_capacity(&one).unwrap(), 1);
        let ten = MemoryParams {
            window_us: 0.72,
            ..m.clone()
        };
        assert_eq!(mode_capacity(&ten).unwrap(), 10);
        let bad = MemoryParams { slot_ns: 0.0, ..m };
        assert!(mode_capacity(&bad).is_err());
    }

    #[test]
    fn timing_examples() {
        let cfg = ExperimentConfig::default();
        let r = validate_timing(&cfg);
        assert!(r.storage_ok && r.feasible);
        assert!((r.slack_us - 1.315).abs() < 1e-9);
        assert!((r.arm_delay_ns - 146.9).abs() < 0.1);
        let c1537 = &r.coherence[1];
        assert!((c1537.coherence_time_ns - 6.45).abs() < 0.01);
        assert!((c1537.ratio - 22.8).abs() < 0.1 && c1537.pass);

        let mut short = ExperimentConfig::default();
        short.memory.storage_time_us = 70.0;
        assert!(!validate_timing(&short).storage_ok);
    }

    #[test]
    fn budget_examples() {
        let cfg = ExperimentConfig::default();
        let ones = LossChain::from_probabilities(&[("a", 1.0), ("b", 1.0)]);
        assert_eq!(rate_budget(&ones, &cfg).unwrap().product, 1.0);
        let halves = LossChain::from_probabilities(&[
            ("teleport", 0.5),
            ("postselect_580", 0.5),
            ("postselect_1537", 0.5),
        ]);
        let b = rate_budget(&halves, &cfg).unwrap();
        assert_eq!(b.product, 0.125);
        assert_eq!(b.stages[1].cumulative, 0.25);

        let full = rate_budget(&cfg.losses, &cfg).unwrap();
        assert_eq!(full.stages.len(), 15);
        assert!((full.physical_product - 6.54e-7).abs() < 0.05e-7, "{}", full.physical_product);
        assert!((full.product - 0.5 * full.physical_product).abs() < 1e-20);
        assert!((full.implied_duty_cycle - 0.0493).abs() < 1e-4);

        let bad = LossChain::from_probabilities(&[("a", 1.5)]);
        assert!(rate_budget(&bad, &cfg).is_err());
    }

    #[test]
    fn throughput_examples() {
        let cfg = ExperimentConfig::default();
        let t = throughput(&cfg, cfg.n_modes).unwrap();
        assert!(t.pair_rate_calibrated);
        assert!((t.rate_hz - 0.042).abs() < 1e-12);
        let a = throughput(&cfg, 10).unwrap().successes_per_hour;
        let b = throughput(&cfg, 20).unwrap().successes_per_hour;
        assert_eq!(b, 2.0 * a);
        assert_eq!(throughput(&cfg, 0).unwrap().successes_per_hour, 0.0);
    }

    #[test]
    fn feedforward_signals() {
        let ff = FeedforwardMap::default();
        assert_eq!(ff.op(FeedforwardMap::signal(1, 0)), LocalOp::X);
        assert_eq!(ff.op(FeedforwardMap::signal(1, 1)), LocalOp::X);
        assert_eq!(ff.op(FeedforwardMap::signal(0, 0)), LocalOp::I);
        assert_eq!(ff.op(FeedforwardMap::signal(0, 1)), LocalOp::I);
    }

    #[test]
    fn ideal_lossless_trials_are_exact() {
        let mut cfg = ExperimentConfig::ideal();
        cfg.losses.sample = false;
        let run = run_trials(&cfg, 400, 5).unwrap();
        assert_eq!(run.totals.kept, 400);
        let tt = crate::analysis::truth_table_fidelity(&run.counts).unwrap();
        assert_eq!(tt.fidelity, 1.0);
    }

    #[test]
    fn deadline_miss_keeps_nothing() {
        let mut cfg = ExperimentConfig::default();
        cfg.losses.sample = false;
        cfg.timing.measurement_latency_us = 10.0;
        assert!(run_trials(&cfg, 10, 1).is_err());
        cfg.timing.allow_infeasible = true;
        let run = run_trials(&cfg, 200, 1).unwrap();
        assert_eq!(run.totals.kept, 0);
        assert_eq!(run.totals.deadline_missed, 200);
    }

    #[test]
    fn default_losses_are_sampled() {
        let cfg = ExperimentConfig::default();
        let run = run_trials(&cfg, 2000, 9).unwrap();
        assert_eq!(run.totals.detected, 0);
        assert!(run.records.iter().all(|r| !r.kept));
    }
}
