//! Experiment configuration: one JSON document, unknown keys rejected,
//! every field defaulted.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::snr_to_noise_fraction;
use crate::error::{check_range, Error, Result};
use crate::netsim::{mode_capacity, ChannelParams, FeedforwardMap, LossChain, MemoryParams};
use crate::photon::SourceParams;
use crate::teleport::TeleportMode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Channels {
    #[serde(default = "ChannelParams::quantum")]
    pub qc: ChannelParams,
    #[serde(default = "ChannelParams::classical")]
    pub cc: ChannelParams,
}

impl Default for Channels {
    fn default() -> Self {
        Self {
            qc: ChannelParams::quantum(),
            cc: ChannelParams::classical(),
        }
    }
}

pub const DEFAULT_SNR: f64 = 12.6;

/// White noise is given either as `white_lambda` or as a signal-to-noise
/// ratio; with neither, the SNR defaults to 12.6.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub white_lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr: Option<f64>,
    pub depolarizing_p: f64,
}

impl NoiseParams {
    pub fn none() -> Self {
        Self {
            white_lambda: Some(0.0),
            snr: None,
            depolarizing_p: 0.0,
        }
    }

    /// The white-noise fraction λ.
    pub fn lambda(&self) -> Result<f64> {
        match (self.white_lambda, self.snr) {
            (Some(_), Some(_)) => Err(Error::Config(
                "noise: give either white_lambda or snr, not both".into(),
            )),
            (Some(l), None) => {
                check_range("noise.white_lambda", l, 0.0, 1.0)?;
                Ok(l)
            }
            (None, snr) => snr_to_noise_fraction(snr.unwrap_or(DEFAULT_SNR)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimingParams {
    pub measurement_latency_us: f64,
    pub interferometer_arm_m: f64,
    pub fiber_group_index: f64,
    pub cycle_period_us: f64,
    pub preparation_s: f64,
    pub cycles_per_preparation: u64,
    pub min_delay_coherence_ratio: f64,
    /// Run trials even when `validate_timing` fails.
    pub allow_infeasible: bool,
}

impl Default for TimingParams {
    fn default() -> Self {
        Self {
            measurement_latency_us: 0.0,
            interferometer_arm_m: 30.0,
            fiber_group_index: 1.468,
            cycle_period_us: 161.0,
            preparation_s: 1.442,
            cycles_per_preparation: 1000,
            min_delay_coherence_ratio: 10.0,
            allow_infeasible: false,
        }
    }
}

fn default_shots() -> u64 {
    10_000
}

fn default_seed() -> u64 {
    2024
}

fn default_n_modes() -> u64 {
    1097
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub source: SourceParams,
    #[serde(default)]
    pub channels: Channels,
    #[serde(default)]
    pub memory: MemoryParams,
    #[serde(default)]
    pub noise: NoiseParams,
    #[serde(default)]
    pub teleport_mode: TeleportMode,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_n_modes")]
    pub n_modes: u64,
    #[serde(default)]
    pub timing: TimingParams,
    #[serde(default)]
    pub losses: LossChain,
    #[serde(default)]
    pub feedforward: FeedforwardMap,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            source: SourceParams::default(),
            channels: Channels::default(),
            memory: MemoryParams::default(),
            noise: NoiseParams::default(),
            teleport_mode: TeleportMode::default(),
            shots: default_shots(),
            seed: default_seed(),
            n_modes: default_n_modes(),
            timing: TimingParams::default(),
            losses: LossChain::default(),
            feedforward: FeedforwardMap::default(),
        }
    }
}

impl ExperimentConfig {
    /// Perfect source, no added noise, every branch corrected.
    pub fn ideal() -> Self {
        Self {
            source: SourceParams::ideal(),
            noise: NoiseParams::none(),
            teleport_mode: TeleportMode::FullCorrection,
            ..Self::default()
        }
    }

    /// Switches this config to the ideal model, keeping everything else.
    pub fn make_ideal(&mut self) {
        self.source.vz = 1.0;
        self.source.vx = 1.0;
        self.noise = NoiseParams::none();
        self.teleport_mode = TeleportMode::FullCorrection;
    }

    pub fn validate(&self) -> Result<()> {
        self.source.validate()?;
        self.channels.qc.validate("qc")?;
        self.channels.cc.validate("cc")?;
        self.memory.validate()?;
        self.noise.lambda()?;
        check_range("noise.depolarizing_p", self.noise.depolarizing_p, 0.0, 1.0)?;
        if self.n_modes == 0 {
            return Err(Error::Config("n_modes must be at least 1".into()));
        }
        mode_capacity(&self.memory)?;
        check_range("losses.duty_cycle", self.losses.duty_cycle, 0.0, 1.0)?;
        let t = &self.timing;
        for (name, v) in [
            ("timing.measurement_latency_us", t.measurement_latency_us),
            ("timing.interferometer_arm_m", t.interferometer_arm_m),
            ("timing.cycle_period_us", t.cycle_period_us),
            ("timing.preparation_s", t.preparation_s),
            ("timing.min_delay_coherence_ratio", t.min_delay_coherence_ratio),
        ] {
            check_range(name, v, 0.0, f64::MAX)?;
        }
        check_range("timing.fiber_group_index", t.fiber_group_index, 1.0, f64::MAX)?;
        for stage in &self.losses.stages {
            crate::netsim::stage_probability(stage, self)?;
        }
        Ok(())
    }
}

/// Parses and validates a config document; blank input yields the defaults.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let cfg = if text.trim().is_empty() {
        ExperimentConfig::default()
    } else {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    parse_config_str(&std::fs::read_to_string(path)?)
}
