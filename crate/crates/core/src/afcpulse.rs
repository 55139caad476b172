//! AFC preparation waveforms: chirped hyperbolic-secant (CHS) pulses, their
//! Schroeder-phased parallel sum, the double-pass modulator transform and
//! spectral checks.
//!
//! Everything runs at baseband: `f0` is an offset (default 0) and tooth
//! positions are reported relative to it.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::C64;

/// How the bracket in the Schroeder phase is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchroederRule {
    /// `π·n²/(2N)`.
    #[default]
    Continuous,
    /// `π·⌊n²/(2N)⌋`.
    Floor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AfcPulseParams {
    pub t_prep_s: f64,
    pub beta_per_s: f64,
    pub n_teeth: usize,
    pub delta_hz: f64,
    pub delta_f_hz: f64,
    pub f0_hz: f64,
    pub schroeder: SchroederRule,
}

pub const DEFAULT_T_PREP_S: f64 = 8.018e-3;
pub const DEFAULT_STORAGE_TIME_US: f64 = 80.315;

impl Default for AfcPulseParams {
    fn default() -> Self {
        let delta = 1e6 / DEFAULT_STORAGE_TIME_US;
        Self {
            t_prep_s: DEFAULT_T_PREP_S,
            beta_per_s: 17.627 / DEFAULT_T_PREP_S,
            n_teeth: 1927,
            delta_hz: delta,
            delta_f_hz: delta / 11.0,
            f0_hz: 0.0,
            schroeder: SchroederRule::Continuous,
        }
    }
}

impl AfcPulseParams {
    /// Defaults with a smaller tooth count.
    pub fn toy(n_teeth: usize) -> Self {
        Self {
            n_teeth,
            ..Self::default()
        }
    }

    /// Tooth width `Δ − Δ_f`.
    pub fn gamma_hz(&self) -> f64 {
        self.delta_hz - self.delta_f_hz
    }

    pub fn total_span_hz(&self) -> f64 {
        self.n_teeth as f64 * self.delta_hz
    }

    pub fn storage_time_us(&self) -> f64 {
        1e6 / self.delta_hz
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_teeth == 0 {
            return Err(Error::Parameter {
                name: "n_teeth",
                value: 0.0,
                reason: "need at least one tooth",
            });
        }
        for (name, v) in [
            ("t_prep_s", self.t_prep_s),
            ("beta_per_s", self.beta_per_s),
            ("delta_hz", self.delta_hz),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Parameter {
                    name,
                    value: v,
                    reason: "must be positive",
                });
            }
        }
        if !(self.delta_f_hz > 0.0 && self.delta_f_hz < self.delta_hz) {
            return Err(Error::Parameter {
                name: "delta_f_hz",
                value: self.delta_f_hz,
                reason: "must lie strictly between 0 and delta_hz",
            });
        }
        if !self.f0_hz.is_finite() {
            return Err(Error::Parameter {
                name: "f0_hz",
                value: self.f0_hz,
                reason: "must be finite",
            });
        }
        Ok(())
    }
}

fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Envelope and phase of pulse `n` at time `t`.
fn envelope_phase(n: usize, p: &AfcPulseParams, t: f64) -> (f64, f64) {
    let tau = t - p.t_prep_s / 2.0;
    let bt = p.beta_per_s * tau;
    let offset = n as f64 - (p.n_teeth as f64 + 1.0) / 2.0;
    let carrier = 2.0 * PI * (p.f0_hz + offset * p.delta_hz) * tau;
    let chirp = 2.0 * PI * p.delta_f_hz / (2.0 * p.beta_per_s) * ln_cosh(bt);
    (1.0 / bt.cosh(), carrier + chirp)
}

fn check_pulse_args(n: usize, p: &AfcPulseParams, t: f64) -> Result<()> {
    if n == 0 || n > p.n_teeth {
        return Err(Error::IndexOutOfRange {
            index: n,
            n: p.n_teeth,
        });
    }
    if !(0.0..=p.t_prep_s).contains(&t) {
        return Err(Error::Parameter {
            name: "t",
            value: t,
            reason: "must lie in [0, T_prep]",
        });
    }
    Ok(())
}

/// Real CHS pulse `A_n(t)`, `1 ≤ n ≤ N`, `0 ≤ t ≤ T_prep`.
pub fn chs_pulse(n: usize, params: &AfcPulseParams, t: f64) -> Result<f64> {
    check_pulse_args(n, params, t)?;
    let (env, phase) = envelope_phase(n, params, t);
    Ok(env * phase.sin())
}

/// The same pulse with `e^{iθ}` in place of `sin θ`.
pub fn chs_pulse_complex(n: usize, params: &AfcPulseParams, t: f64) -> Result<C64> {
    check_pulse_args(n, params, t)?;
    let (env, phase) = envelope_phase(n, params, t);
    Ok(C64::from_polar(env, phase))
}

/// Schroeder phase `Φ_n` in radians for the continuous reading.
pub fn schroeder_phase(n: usize, n_teeth: usize) -> f64 {
    schroeder_phase_with(n, n_teeth, SchroederRule::Continuous)
}

pub fn schroeder_phase_with(n: usize, n_teeth: usize, rule: SchroederRule) -> f64 {
    let x = (n as f64).powi(2) / (2.0 * n_teeth as f64);
    match rule {
        SchroederRule::Continuous => PI * x,
        SchroederRule::Floor => PI * x.floor(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseVariant {
    /// `Σ sin(Φ_n)·A'_n(t)`, real valued.
    RealSinWeighted,
    /// `Σ e^{iΦ_n}` times the complex pulse, cyclically shifted.
    ComplexExponential,
    /// Unshifted complex pulses with equal phases: the plain parallel sum.
    Flat,
}

impl std::str::FromStr for PulseVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real_sin_weighted" => Ok(PulseVariant::RealSinWeighted),
            "complex_exponential" => Ok(PulseVariant::ComplexExponential),
            "flat" => Ok(PulseVariant::Flat),
            _ => Err(Error::Config(format!("unknown pulse variant `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AfcWaveform {
    pub samples: Vec<C64>,
    pub sample_rate: f64,
    pub params: AfcPulseParams,
    pub variant: PulseVariant,
    /// Largest magnitude before normalization; 1 for transformed waveforms.
    pub peak_before_normalization: f64,
}

impl AfcWaveform {
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 / self.sample_rate
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Smallest sample rate accepted for `params`: four times the comb span.
pub fn min_sample_rate(params: &AfcPulseParams) -> f64 {
    4.0 * params.total_span_hz()
}

/// Sums the `N` pulses into the preparation waveform, normalized to unit peak.
pub fn synth_prep_waveform(
    params: &AfcPulseParams,
    sample_rate: f64,
    variant: PulseVariant,
) -> Result<AfcWaveform> {
    params.validate()?;
    let min_rate = min_sample_rate(params);
    if !(sample_rate >= min_rate) {
        return Err(Error::Parameter {
            name: "sample_rate",
            value: sample_rate,
            reason: "undersampled: need at least 4·N·Δ",
        });
    }
    let t_prep = params.t_prep_s;
    let n_samples = (t_prep * sample_rate).round() as usize;
    let n_teeth = params.n_teeth;
    let weights: Vec<C64> = (1..=n_teeth)
        .map(|n| {
            let phi = schroeder_phase_with(n, n_teeth, params.schroeder);
            match variant {
                PulseVariant::RealSinWeighted => C64::new(phi.sin(), 0.0),
                PulseVariant::ComplexExponential => C64::from_polar(1.0, phi),
                PulseVariant::Flat => C64::new(1.0, 0.0),
            }
        })
        .collect();
    let shifted = variant != PulseVariant::Flat;

    let mut samples: Vec<C64> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let t = i as f64 / sample_rate;
            let mut acc = C64::new(0.0, 0.0);
            for (k, w) in weights.iter().enumerate() {
                let n = k + 1;
                // A'_n(t) = A_n(t + (n−1)T/N), wrapped into [0, T)
                let tn = if shifted {
                    (t + k as f64 * t_prep / n_teeth as f64).rem_euclid(t_prep)
                } else {
                    t
                };
                let (env, phase) = envelope_phase(n, params, tn);
                acc += match variant {
                    PulseVariant::RealSinWeighted => *w * (env * phase.sin()),
                    _ => *w * C64::from_polar(env, phase),
                };
            }
            acc
        })
        .collect();

    let peak = samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::ZeroProbability);
    }
    samples.iter_mut().for_each(|z| *z /= peak);
    // |z/|z|| can land one ulp off 1; pin the largest sample
    let (imax, zmax) = samples
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .map(|(i, z)| (i, *z))
        .expect("non-empty");
    samples[imax] = pin_unit(zmax);
    Ok(AfcWaveform {
        samples,
        sample_rate,
        params: params.clone(),
        variant,
        peak_before_normalization: peak,
    })
}

/// A unit-modulus value next to `z` whose `norm()` is exactly 1.
fn pin_unit(z: C64) -> C64 {
    if z.norm() == 1.0 {
        return z;
    }
    let (re, im) = (z.re.abs(), z.im.abs());
    let pinned = if re >= im {
        C64::new(z.re.signum() * (1.0 - im * im).sqrt(), z.im)
    } else {
        C64::new(z.re, z.im.signum() * (1.0 - re * re).sqrt())
    };
    if pinned.norm() == 1.0 {
        return pinned;
    }
    // walk the larger component by ulps
    let mut w = pinned;
    for _ in 0..8 {
        let n = w.norm();
        if n == 1.0 {
            return w;
        }
        let step = |x: f64| {
            let bits = x.abs().to_bits();
            let b = if n > 1.0 { bits - 1 } else { bits + 1 };
            f64::from_bits(b).copysign(x)
        };
        if re >= im {
            w.re = step(w.re);
        } else {
            w.im = step(w.im);
        }
    }
    w
}

/// Double-pass modulator waveform: `√a·e^{iθ/2}`, with the sign of each
/// sample chosen so that the phase stays continuous.
pub fn double_pass_transform(w: &AfcWaveform) -> AfcWaveform {
    let mut prev: Option<C64> = None;
    let samples = w
        .samples
        .iter()
        .map(|z| {
            let (a, theta) = z.to_polar();
            let mut out = C64::from_polar(a.sqrt(), theta / 2.0);
            if a == 0.0 {
                return out;
            }
            if let Some(p) = prev {
                if (out * p.conj()).arg().abs() > PI / 2.0 {
                    out = -out;
                }
            }
            prev = Some(out);
            out
        })
        .collect();
    AfcWaveform {
        samples,
        sample_rate: w.sample_rate,
        params: w.params.clone(),
        variant: w.variant,
        peak_before_normalization: 1.0,
    }
}

/// Squares every sample; undoes [`double_pass_transform`].
pub fn square_waveform(w: &AfcWaveform) -> AfcWaveform {
    AfcWaveform {
        samples: w.samples.iter().map(|z| z * z).collect(),
        ..w.clone()
    }
}

/// Largest phase step between consecutive nonzero samples, in radians.
pub fn max_phase_jump(w: &AfcWaveform) -> f64 {
    let nz: Vec<&C64> = w.samples.iter().filter(|z| z.norm() > 0.0).collect();
    nz.windows(2)
        .map(|p| (p[1] * p[0].conj()).arg().abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombMetrics {
    /// Tooth centroids relative to `f0`, ascending.
    pub tooth_frequencies_hz: Vec<f64>,
    pub tooth_count: usize,
    /// Median spacing between neighbouring teeth; absent for a single tooth.
    pub spacing_hz: Option<f64>,
    pub in_tooth_energy_fraction: f64,
    pub crest_factor: f64,
    pub peak: f64,
    pub rms: f64,
}

/// Relative power above which a spectral bin belongs to a tooth.
pub const TOOTH_THRESHOLD: f64 = 1e-2;

/// Spectral peaks and crest factor of a waveform.
pub fn comb_metrics(w: &AfcWaveform) -> Result<CombMetrics> {
    let n = w.samples.len();
    if n == 0 || w.duration_s() < 2.0 / w.params.delta_hz {
        return Err(Error::InvalidState(
            "waveform shorter than two comb periods".into(),
        ));
    }
    let mut spectrum = w.samples.clone();
    FftPlanner::new().plan_fft_forward(n).process(&mut spectrum);
    let power: Vec<f64> = spectrum.iter().map(|z| z.norm_sqr()).collect();
    let total: f64 = power.iter().sum();
    let max = power.iter().cloned().fold(0.0, f64::max);
    if total == 0.0 || !total.is_finite() {
        return Err(Error::InvalidState("degenerate spectrum".into()));
    }

    // bins in ascending frequency order
    let bin_hz = w.sample_rate / n as f64;
    let half = n.div_ceil(2);
    let order: Vec<usize> = (half..n).chain(0..half).collect();
    let freq = |k: usize| {
        let signed = if k >= half { k as f64 - n as f64 } else { k as f64 };
        signed * bin_hz
    };

    let mut teeth = Vec::new();
    let mut in_tooth = 0.0;
    let mut cluster: Option<(f64, f64)> = None;
    for &k in &order {
        let p = power[k];
        if p >= TOOTH_THRESHOLD * max {
            in_tooth += p;
            let c = cluster.get_or_insert((0.0, 0.0));
            c.0 += p * freq(k);
            c.1 += p;
        } else if let Some((m, s)) = cluster.take() {
            teeth.push(m / s);
        }
    }
    if let Some((m, s)) = cluster {
        teeth.push(m / s);
    }

    let mut gaps: Vec<f64> = teeth.windows(2).map(|p| p[1] - p[0]).collect();
    gaps.sort_by(f64::total_cmp);
    let spacing_hz = (!gaps.is_empty()).then(|| {
        let m = gaps.len();
        if m % 2 == 1 {
            gaps[m / 2]
        } else {
            (gaps[m / 2 - 1] + gaps[m / 2]) / 2.0
        }
    });

    let peak = w.peak();
    let rms = (w.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64).sqrt();
    Ok(CombMetrics {
        tooth_count: teeth.len(),
        tooth_frequencies_hz: teeth,
        spacing_hz,
        in_tooth_energy_fraction: in_tooth / total,
        crest_factor: peak / rms,
        peak,
        rms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pulse_examples() {
        let p = AfcPulseParams::default();
        let mid = chs_pulse_complex(5, &p, p.t_prep_s / 2.0).unwrap();
        assert!((mid.norm() - 1.0).abs() < 1e-15);
        let edge = chs_pulse_complex(5, &p, 0.0).unwrap().norm();
        assert!((edge - 2.98e-4).abs() < 1e-6, "{edge}");
        assert!(chs_pulse(0, &p, 0.0).is_err());
        assert!(chs_pulse(1, &p, -1e-9).is_err());
        assert!(chs_pulse(1, &p, p.t_prep_s + 1e-9).is_err());
        assert!((p.total_span_hz() / 1e6 - 24.0).abs() < 0.05);
        assert!((p.storage_time_us() - 80.315).abs() < 1e-9);
    }

    #[test]
    fn center_tooth_has_f0_carrier() {
        let p = AfcPulseParams {
            f0_hz: 1000.0,
            ..AfcPulseParams::toy(5)
        };
        let t = p.t_prep_s / 2.0 + 1e-4;
        let (_, phase) = envelope_phase(3, &p, t);
        let chirp = 2.0 * PI * p.delta_f_hz / (2.0 * p.beta_per_s) * ln_cosh(p.beta_per_s * 1e-4);
        assert!((phase - chirp - 2.0 * PI * 1000.0 * 1e-4).abs() < 1e-9);
    }

    #[test]
    fn schroeder_examples() {
        assert_eq!(schroeder_phase(0, 8), 0.0);
        assert!((schroeder_phase(7, 7) - PI * 3.5).abs() < 1e-12);
        assert!((schroeder_phase(2, 4) - PI / 2.0).abs() < 1e-15);
        assert_eq!(schroeder_phase_with(3, 4, SchroederRule::Floor), PI);
    }

    #[test]
    fn pinned_peak_is_exactly_one() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200_000 {
            let z = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            let u = pin_unit(z / z.norm());
            assert_eq!(u.norm(), 1.0, "{z}");
        }
    }

    #[test]
    fn undersampling_rejected() {
        let p = AfcPulseParams::toy(4);
        assert!(synth_prep_waveform(&p, min_sample_rate(&p) * 0.9, PulseVariant::Flat).is_err());
    }

    #[test]
    fn single_tooth_is_single_pulse() {
        let p = AfcPulseParams::toy(1);
        let rate = min_sample_rate(&p) * 2.0;
        let w = synth_prep_waveform(&p, rate, PulseVariant::ComplexExponential).unwrap();
        let f = synth_prep_waveform(&p, rate, PulseVariant::Flat).unwrap();
        for (a, b) in w.samples.iter().zip(&f.samples) {
            // weights differ by the constant e^{iπ/2}
            assert!((a - b * C64::i()).norm() < 1e-12);
        }
        assert_eq!(w.peak(), 1.0);
    }

    #[test]
    fn double_pass_constant() {
        let p = AfcPulseParams::toy(1);
        let w = AfcWaveform {
            samples: vec![C64::from_polar(0.25, 0.8); 8],
            sample_rate: 1.0,
            params: p,
            variant: PulseVariant::ComplexExponential,
            peak_before_normalization: 1.0,
        };
        let d = double_pass_transform(&w);
        for z in &d.samples {
            assert!((z - C64::from_polar(0.5, 0.4)).norm() < 1e-15);
        }
    }

    #[test]
    fn pure_tone_metrics() {
        let p = AfcPulseParams::toy(1);
        let rate = 1.0e6;
        let n = 8192;
        let f = rate / n as f64 * 400.0;
        let w = AfcWaveform {
            samples: (0..n)
                .map(|i| C64::new((2.0 * PI * f * i as f64 / rate).sin(), 0.0))
                .collect(),
            sample_rate: rate,
            params: AfcPulseParams {
                delta_hz: 1e3,
                delta_f_hz: 1e2,
                ..p
            },
            variant: PulseVariant::RealSinWeighted,
            peak_before_normalization: 1.0,
        };
        let m = comb_metrics(&w).unwrap();
        // a real tone shows up at ±f
        assert_eq!(m.tooth_count, 2);
        assert!((m.crest_factor - 2f64.sqrt()).abs() < 0.02 * 2f64.sqrt());
        let c = AfcWaveform {
            samples: (0..n)
                .map(|i| C64::from_polar(1.0, 2.0 * PI * f * i as f64 / rate))
                .collect(),
            ..w
        };
        let m = comb_metrics(&c).unwrap();
        assert_eq!(m.tooth_count, 1);
        assert!(m.spacing_hz.is_none());
        assert!((m.tooth_frequencies_hz[0] - f).abs() < 1e-6);
    }
}
