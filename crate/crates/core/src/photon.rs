//! Photonic degree-of-freedom bookkeeping.
//!
//! Each photon carries a polarization qubit and a path qubit. Qubit labels
//! have the form `<name>@<dof>`, e.g. `A2@path`, so conversions between
//! time-bin, path and polarization encodings are pure relabelings.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::qsim::{BellState, GateSpec, Mat2, QuantumState, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Node {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Wavelength {
    #[serde(rename = "580nm")]
    Nm580,
    #[serde(rename = "1537nm")]
    Nm1537,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dof {
    TimeBin,
    Path,
    Polarization,
}

impl Dof {
    pub fn tag(self) -> &'static str {
        match self {
            Dof::TimeBin => "tb",
            Dof::Path => "path",
            Dof::Polarization => "pol",
        }
    }
}

impl FromStr for Dof {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tb" | "time_bin" => Ok(Dof::TimeBin),
            "path" => Ok(Dof::Path),
            "pol" | "polarization" => Ok(Dof::Polarization),
            other => Err(Error::Encoding(format!("unknown degree of freedom `{other}`"))),
        }
    }
}

/// A basis value in one encoding: S/L, 0/1 or H/V.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisLabel {
    pub dof: Dof,
    pub bit: u8,
}

impl BasisLabel {
    pub fn new(dof: Dof, bit: u8) -> Self {
        Self { dof, bit: bit & 1 }
    }

    /// Same logical value in another encoding (S↔0↔H, L↔1↔V).
    pub fn convert(self, to: Dof) -> Self {
        Self::new(to, self.bit)
    }

    pub fn symbol(self) -> char {
        match (self.dof, self.bit) {
            (Dof::TimeBin, 0) => 'S',
            (Dof::TimeBin, _) => 'L',
            (Dof::Path, 0) => '0',
            (Dof::Path, _) => '1',
            (Dof::Polarization, 0) => 'H',
            (Dof::Polarization, _) => 'V',
        }
    }

    pub fn parse(c: char) -> Result<Self> {
        let (dof, bit) = match c {
            'S' => (Dof::TimeBin, 0),
            'L' => (Dof::TimeBin, 1),
            '0' => (Dof::Path, 0),
            '1' => (Dof::Path, 1),
            'H' => (Dof::Polarization, 0),
            'V' => (Dof::Polarization, 1),
            other => return Err(Error::Encoding(format!("unknown basis symbol `{other}`"))),
        };
        Ok(Self { dof, bit })
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Qubit label `<name>@<dof>`.
pub fn qubit_label(name: &str, dof: Dof) -> String {
    format!("{name}@{}", dof.tag())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhotonRef {
    pub node: Node,
    pub wavelength: Wavelength,
    /// Qubit names without the DOF suffix: (polarization, path).
    pub qubits: (String, String),
}

impl PhotonRef {
    pub fn new(node: Node, wavelength: Wavelength, pol: &str, path: &str) -> Result<Self> {
        if wavelength == Wavelength::Nm580 && node != Node::A {
            return Err(Error::Inconsistent("the 580-nm photon stays at node A".into()));
        }
        Ok(Self {
            node,
            wavelength,
            qubits: (pol.to_string(), path.to_string()),
        })
    }

    /// The 580-nm photon at node A: A1 (polarization), A2 (path).
    pub fn node_a() -> Self {
        Self::new(Node::A, Wavelength::Nm580, "A1", "A2").expect("valid by construction")
    }

    /// The 1537-nm photon delivered to node B: B4 (polarization), B3 (path).
    pub fn node_b() -> Self {
        Self::new(Node::B, Wavelength::Nm1537, "B4", "B3").expect("valid by construction")
    }

    pub fn pol_label(&self) -> String {
        qubit_label(&self.qubits.0, Dof::Polarization)
    }

    pub fn path_label(&self) -> String {
        qubit_label(&self.qubits.1, Dof::Path)
    }
}

fn default_vz() -> f64 {
    0.990
}
fn default_vx() -> f64 {
    0.862
}
fn default_heralding() -> f64 {
    0.049
}
fn default_bw_580() -> f64 {
    178.0
}
fn default_bw_1537() -> f64 {
    155.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceParams {
    #[serde(default = "default_vz")]
    pub vz: f64,
    #[serde(default = "default_vx")]
    pub vx: f64,
    #[serde(default = "default_heralding")]
    pub heralding_efficiency: f64,
    #[serde(default = "default_bw_580")]
    pub bandwidth_580_mhz: f64,
    #[serde(default = "default_bw_1537")]
    pub bandwidth_1537_mhz: f64,
    /// Pairs per second per mode; calibrated from the end rate when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_rate_hz: Option<f64>,
}

impl Default for SourceParams {
    fn default() -> Self {
        Self {
            vz: default_vz(),
            vx: default_vx(),
            heralding_efficiency: default_heralding(),
            bandwidth_580_mhz: default_bw_580(),
            bandwidth_1537_mhz: default_bw_1537(),
            pair_rate_hz: None,
        }
    }
}

impl SourceParams {
    pub fn ideal() -> Self {
        Self {
            vz: 1.0,
            vx: 1.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_range("vz", self.vz, 0.0, 1.0)?;
        check_range("vx", self.vx, 0.0, 1.0)?;
        if self.vx > self.vz {
            return Err(Error::Parameter {
                name: "vx",
                value: self.vx,
                reason: "must not exceed vz",
            });
        }
        check_range("heralding_efficiency", self.heralding_efficiency, 0.0, 1.0)?;
        check_range("bandwidth_580_mhz", self.bandwidth_580_mhz, f64::MIN_POSITIVE, f64::MAX)?;
        check_range("bandwidth_1537_mhz", self.bandwidth_1537_mhz, f64::MIN_POSITIVE, f64::MAX)?;
        if let Some(r) = self.pair_rate_hz {
            check_range("pair_rate_hz", r, 0.0, f64::MAX)?;
        }
        Ok(())
    }
}

/// Path-entangled pair on (A2 path, B3 path).
///
/// `ρ = Vx·Φ⁺ + (Vz−Vx)·½(|00⟩⟨00|+|11⟩⟨11|) + (1−Vz)·I/4`, so that the
/// fidelity to Φ⁺ is `(1+Vz+2Vx)/4`. Ideal visibilities give a pure Φ⁺.
pub fn make_entangled_pair(params: &SourceParams) -> Result<QuantumState> {
    params.validate()?;
    let labels = [
        qubit_label("A2", Dof::Path),
        qubit_label("B3", Dof::Path),
    ];
    let labels = [labels[0].as_str(), labels[1].as_str()];
    let phi = QuantumState::bell(BellState::PhiPlus, &labels)?;
    if params.vz == 1.0 && params.vx == 1.0 {
        return Ok(phi);
    }
    let (vz, vx) = (params.vz, params.vx);
    let mut rho = phi.density_matrix() * C64::new(vx, 0.0);
    let classical = C64::new((vz - vx) / 2.0, 0.0);
    rho[(0, 0)] += classical;
    rho[(3, 3)] += classical;
    rho += DMatrix::<C64>::identity(4, 4) * C64::new((1.0 - vz) / 4.0, 0.0);
    QuantumState::from_density(rho, &labels)
}

/// Relabels the `from` qubit of `name` as a `to` qubit; amplitudes are untouched.
pub fn convert_encoding(
    state: &QuantumState,
    name: &str,
    from: Dof,
    to: Dof,
) -> Result<QuantumState> {
    if from == to {
        return Err(Error::Encoding(format!("{name}: source and target encodings coincide")));
    }
    let old = qubit_label(name, from);
    let new = qubit_label(name, to);
    let q = state.index_of(&old)?;
    if state.index_of(&new).is_ok() {
        return Err(Error::Encoding(format!("{new} already present")));
    }
    let mut out = state.clone();
    out.relabel(q, new)?;
    Ok(out)
}

fn local_controlled(
    state: &QuantumState,
    control: &str,
    target: &str,
    u: Mat2,
) -> Result<QuantumState> {
    let c = state.index_of(control)?;
    let t = state.index_of(target)?;
    let mut out = state.clone();
    out.apply_gate(&GateSpec::controlled(u, c, t))?;
    Ok(out)
}

/// CNOT from the path qubit onto the polarization qubit of the same photon.
pub fn local_cnot_path_on_pol(state: &QuantumState, photon: &PhotonRef) -> Result<QuantumState> {
    local_controlled(
        state,
        &photon.path_label(),
        &photon.pol_label(),
        crate::qsim::pauli_x(),
    )
}

/// CNOT from the polarization qubit onto the path qubit of the same photon.
pub fn local_cnot_pol_on_path(state: &QuantumState, photon: &PhotonRef) -> Result<QuantumState> {
    local_controlled(
        state,
        &photon.pol_label(),
        &photon.path_label(),
        crate::qsim::pauli_x(),
    )
}

/// Controlled-`U` from the path qubit onto the polarization qubit.
pub fn local_cu_path_on_pol(
    state: &QuantumState,
    photon: &PhotonRef,
    u: Mat2,
) -> Result<QuantumState> {
    local_controlled(state, &photon.path_label(), &photon.pol_label(), u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{fidelity, phase_z, pauli_x};

    fn photon_state(path: u8, pol: u8) -> QuantumState {
        // register order: (path, pol)
        QuantumState::basis(&[path, pol], &["A2@path", "A1@pol"]).unwrap()
    }

    #[test]
    fn pair_examples() {
        let ideal = make_entangled_pair(&SourceParams::ideal()).unwrap();
        assert!(ideal.is_pure());
        let phi = QuantumState::bell(BellState::PhiPlus, &[]).unwrap();
        assert!(ideal.distance(&phi).unwrap() < 1e-15);

        let real = make_entangled_pair(&SourceParams::default()).unwrap();
        let f = fidelity(&real, &phi).unwrap();
        assert!((f - 0.9285).abs() < 1e-12);
        assert!((f - 0.926).abs() < 0.003);

        let classical = SourceParams {
            vz: 1.0,
            vx: 0.0,
            ..SourceParams::default()
        };
        let rho = make_entangled_pair(&classical).unwrap();
        assert!((fidelity(&rho, &phi).unwrap() - 0.5).abs() < 1e-15);
        let m = rho.density_matrix();
        assert!((m[(0, 0)].re - 0.5).abs() < 1e-15 && m[(0, 3)].norm() < 1e-15);

        let bad = SourceParams {
            vz: 0.5,
            vx: 0.9,
            ..SourceParams::default()
        };
        assert!(make_entangled_pair(&bad).is_err());
    }

    #[test]
    fn basis_label_bijections() {
        let s = BasisLabel::parse('S').unwrap();
        assert_eq!(s.convert(Dof::Path).symbol(), '0');
        assert_eq!(BasisLabel::parse('L').unwrap().convert(Dof::Polarization).symbol(), 'V');
        for c in ['S', 'L', '0', '1', 'H', 'V'] {
            let b = BasisLabel::parse(c).unwrap();
            let back = b.convert(Dof::Polarization).convert(Dof::Path).convert(b.dof);
            assert_eq!(back, b);
        }
        assert!(BasisLabel::parse('x').is_err());
    }

    #[test]
    fn conversion_is_relabeling() {
        let pair = make_entangled_pair(&SourceParams::default()).unwrap();
        let tb = convert_encoding(&pair, "A2", Dof::Path, Dof::TimeBin).unwrap();
        assert_eq!(tb.labels()[0], "A2@tb");
        assert_eq!(tb.density_matrix(), pair.density_matrix());
        let pol = convert_encoding(&tb, "A2", Dof::TimeBin, Dof::Polarization).unwrap();
        let back = convert_encoding(&pol, "A2", Dof::Polarization, Dof::Path).unwrap();
        assert_eq!(back, pair);
        assert!(convert_encoding(&pair, "A2", Dof::Path, Dof::Path).is_err());
        assert!(convert_encoding(&pair, "A9", Dof::Path, Dof::TimeBin).is_err());
    }

    #[test]
    fn local_gates() {
        let a = PhotonRef::node_a();
        let out = local_cnot_path_on_pol(&photon_state(0, 0), &a).unwrap();
        assert_eq!(out, photon_state(0, 0));
        let out = local_cnot_path_on_pol(&photon_state(1, 0), &a).unwrap();
        assert!(out.distance(&photon_state(1, 1)).unwrap() < 1e-15);

        let plus = QuantumState::product(
            &[
                [C64::new(1.0, 0.0), C64::new(1.0, 0.0)],
                [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            ],
            &["A2@path", "A1@pol"],
        )
        .unwrap();
        let out = local_cnot_path_on_pol(&plus, &a).unwrap();
        let bell = QuantumState::bell(BellState::PhiPlus, &[]).unwrap();
        assert!(out.distance(&bell).unwrap() < 1e-15);

        let b = PhotonRef::node_b();
        let v_plus = QuantumState::product(
            &[
                [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
                [C64::new(1.0, 0.0), C64::new(1.0, 0.0)],
            ],
            &["B4@pol", "B3@path"],
        )
        .unwrap();
        let out = local_cnot_pol_on_path(&v_plus, &b).unwrap();
        assert!(out.distance(&v_plus).unwrap() < 1e-15);
        let v0 = QuantumState::basis(&[1, 0], &["B4@pol", "B3@path"]).unwrap();
        let v1 = QuantumState::basis(&[1, 1], &["B4@pol", "B3@path"]).unwrap();
        assert!(local_cnot_pol_on_path(&v0, &b).unwrap().distance(&v1).unwrap() < 1e-15);

        let via_cu = local_cu_path_on_pol(&plus, &a, pauli_x()).unwrap();
        assert!(via_cu.distance(&out_for(&plus, &a)).unwrap() < 1e-15);
        let id = local_cu_path_on_pol(&plus, &a, Mat2::identity()).unwrap();
        assert_eq!(id, plus);
        let phased =
            local_cu_path_on_pol(&photon_state(1, 1), &a, phase_z(std::f64::consts::FRAC_PI_2))
                .unwrap();
        let amp = phased.amplitudes().unwrap()[3];
        assert!((amp - C64::new(0.0, 1.0)).norm() < 1e-15);
    }

    fn out_for(s: &QuantumState, a: &PhotonRef) -> QuantumState {
        local_cnot_path_on_pol(s, a).unwrap()
    }

    #[test]
    fn photon_placement() {
        assert!(PhotonRef::new(Node::B, Wavelength::Nm580, "A1", "A2").is_err());
        assert_eq!(PhotonRef::node_b().pol_label(), "B4@pol");
    }
}
