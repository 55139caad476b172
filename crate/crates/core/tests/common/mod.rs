#![allow(dead_code)]

use nalgebra::DMatrix;
use proptest::prelude::*;
use telegate::qsim::{Gate, GateSpec, Mat2, QuantumState, C64};

pub fn c64() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| C64::new(re, im))
}

/// Random pure state on `n` qubits.
pub fn pure_state(n: usize) -> impl Strategy<Value = QuantumState> {
    prop::collection::vec(c64(), 1 << n)
        .prop_filter("non-zero", |v| v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3)
        .prop_map(|v| QuantumState::normalized(v, &[]).unwrap())
}

/// Random density matrix `A·A†/tr` on `n` qubits.
pub fn density(n: usize) -> impl Strategy<Value = QuantumState> {
    let d = 1 << n;
    prop::collection::vec(c64(), d * d)
        .prop_filter("non-zero", |v| v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3)
        .prop_map(move |v| {
            let a = DMatrix::from_vec(d, d, v);
            let rho = &a * a.adjoint();
            let tr = rho.trace();
            QuantumState::from_density(rho / tr, &[]).unwrap()
        })
}

/// Haar-like single-qubit unitary from Euler angles and a global phase.
pub fn unitary() -> impl Strategy<Value = Mat2> {
    (0.0f64..std::f64::consts::TAU, 0.0f64..std::f64::consts::TAU, 0.0f64..std::f64::consts::TAU, 0.0f64..std::f64::consts::PI)
        .prop_map(|(a, b, c, t)| {
            let (s, co) = (t / 2.0).sin_cos();
            let g = C64::from_polar(1.0, a);
            Mat2::new(
                g * C64::from_polar(co, b),
                -g * C64::from_polar(s, c),
                g * C64::from_polar(s, -c),
                g * C64::from_polar(co, -b),
            )
        })
}

/// A random gate on a register of `n ≥ 2` qubits.
pub fn gate(n: usize) -> impl Strategy<Value = GateSpec> {
    let single = prop_oneof![
        Just(Gate::X),
        Just(Gate::Y),
        Just(Gate::Z),
        Just(Gate::H),
        Just(Gate::S),
        (0.0f64..6.3).prop_map(Gate::PhaseZ),
        unitary().prop_map(Gate::Unitary),
    ];
    let pair = (0..n, 1..n).prop_map(move |(a, off)| (a, (a + off) % n));
    prop_oneof![
        (single, 0..n).prop_map(|(g, q)| GateSpec::on(g, q)),
        pair.clone().prop_map(|(c, t)| GateSpec::cnot(c, t)),
        (unitary(), pair).prop_map(|(u, (c, t))| GateSpec::controlled(u, c, t)),
    ]
}
