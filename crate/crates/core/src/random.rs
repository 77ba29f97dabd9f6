//! Seeded random chains for cross-checking the engine against the oracle.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numerics::{StateVector, C64};
use crate::qasm::{Circuit, GateKind, GateOp};
use crate::qmc::{build_qmc, ChannelKind, ChannelSite, QuantumMarkovChain};

#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub seed: u64,
    pub qmc: QuantumMarkovChain,
    /// One vector for a pure start, two for a rank-2 mixed start.
    pub init: Vec<StateVector>,
}

/// Shape limits for [`random_instance`].
#[derive(Debug, Clone, Copy)]
pub struct RandomShape {
    pub num_qubits: usize,
    pub max_gates: usize,
    pub max_sites: usize,
}

impl RandomShape {
    pub fn new(num_qubits: usize) -> Self {
        RandomShape {
            num_qubits,
            max_gates: 10,
            max_sites: 2,
        }
    }
}

/// Channel parameter: exact endpoints now and then, otherwise well inside (0, 1).
fn parameter(rng: &mut impl Rng) -> f64 {
    match rng.gen_range(0..10) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.gen_range(0.05..0.95),
    }
}

pub fn random_state(rng: &mut impl Rng, num_qubits: usize) -> StateVector {
    loop {
        let amps: Vec<C64> = (0..1usize << num_qubits)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let v = StateVector::from_amplitudes(amps).expect("power of two");
        let n = v.norm();
        if n > 1e-3 {
            return v.scaled(C64::new(1.0 / n, 0.0));
        }
    }
}

fn random_gate(rng: &mut impl Rng, n: usize) -> GateOp {
    let mut qubits: Vec<usize> = (0..n).collect();
    qubits.shuffle(rng);
    let angle =
        |rng: &mut dyn rand::RngCore| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    let mut kinds = vec![
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::H,
        GateKind::S,
        GateKind::Sdg,
        GateKind::T,
        GateKind::Tdg,
        GateKind::U3(angle(rng), angle(rng), angle(rng)),
    ];
    if n >= 2 {
        kinds.extend([GateKind::Cx, GateKind::Cz, GateKind::Swap]);
    }
    if n >= 3 {
        kinds.push(GateKind::Ccx);
    }
    let kind = *kinds.choose(rng).expect("non-empty");
    GateOp::new(kind, qubits[..kind.arity()].to_vec())
}

fn random_kind(rng: &mut impl Rng) -> ChannelKind {
    match rng.gen_range(0..5) {
        0 => ChannelKind::BitFlip { p: parameter(rng) },
        1 => ChannelKind::PhaseFlip { p: parameter(rng) },
        2 => ChannelKind::AmplitudeDamping {
            gamma: parameter(rng),
        },
        3 => ChannelKind::MeasureZ,
        _ => ChannelKind::Reset,
    }
}

/// Random body of up to `max_gates` gates, up to `max_sites` built-in channel
/// sites, and a pure or rank-2 initial support.
pub fn random_instance(seed: u64, shape: RandomShape) -> RandomInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = shape.num_qubits;
    let gate_count = rng.gen_range(0..=shape.max_gates);
    let ops: Vec<GateOp> = (0..gate_count).map(|_| random_gate(&mut rng, n)).collect();
    let site_count = rng.gen_range(0..=shape.max_sites);
    let sites: Vec<ChannelSite> = (0..site_count)
        .map(|_| {
            ChannelSite::new(
                rng.gen_range(0..=ops.len()),
                rng.gen_range(0..n),
                random_kind(&mut rng),
            )
        })
        .collect();
    let body = Circuit::new(n, ops).expect("generated gates are valid");
    let qmc = build_qmc(body, sites).expect("generated sites are valid");
    let rank = rng.gen_range(1..=2);
    let init = (0..rank).map(|_| random_state(&mut rng, n)).collect();
    RandomInstance { seed, qmc, init }
}

/// Random trace-preserving instance whose sites cover every built-in kind
/// in turn (used by the channel-algebra checks).
pub fn random_trace_preserving(seed: u64, num_qubits: usize) -> (QuantumMarkovChain, StateVector) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let inst = random_instance(seed, RandomShape::new(num_qubits));
    let body = inst.qmc.body().clone();
    let mut sites: Vec<ChannelSite> = inst.qmc.sites().iter().map(|s| s.site.clone()).collect();
    sites.push(ChannelSite::new(
        rng.gen_range(0..=body.len()),
        rng.gen_range(0..num_qubits),
        random_kind(&mut rng),
    ));
    let qmc = build_qmc(body, sites).expect("valid sites");
    (qmc, random_state(&mut rng, num_qubits))
}
