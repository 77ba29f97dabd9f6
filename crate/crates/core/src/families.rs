//! Bundled benchmark chains: Grover search, quantum walks on cycles and a
//! repeat-until-success circuit.
//!
//! None of these circuits come from published files; each is rebuilt from the
//! mathematical definition of the algorithm and validated against it in tests.

use std::fmt;

use crate::error::Result;
use crate::numerics::{StateVector, C64};
use crate::qasm::{Circuit, GateKind, GateOp};
use crate::qmc::{build_qmc, ChannelKind, ChannelSite, QuantumMarkovChain};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpType {
    Unitary,
    Noise,
    Measure,
}

impl fmt::Display for OpType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OpType::Unitary => "Unitary",
            OpType::Noise => "Noise",
            OpType::Measure => "Measure",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Benchmark {
    pub name: String,
    pub family: &'static str,
    pub body: Circuit,
    pub sites: Vec<ChannelSite>,
    pub init: Vec<StateVector>,
    pub op_type: OpType,
    /// Known reachable dimension, when the construction pins it down.
    pub expected_dim: Option<usize>,
}

impl Benchmark {
    pub fn qmc(&self) -> Result<QuantumMarkovChain> {
        build_qmc(self.body.clone(), self.sites.clone())
    }

    pub fn num_qubits(&self) -> usize {
        self.body.num_qubits
    }
}

fn op(kind: GateKind, qubits: &[usize]) -> GateOp {
    GateOp::new(kind, qubits.to_vec())
}

/// Multi-controlled X built from Toffolis; needs `controls.len() - 2` clean
/// ancillas for three or more controls and returns them clean.
fn mcx(controls: &[usize], target: usize, ancillas: &[usize], ops: &mut Vec<GateOp>) {
    match controls.len() {
        0 => ops.push(op(GateKind::X, &[target])),
        1 => ops.push(op(GateKind::Cx, &[controls[0], target])),
        2 => ops.push(op(GateKind::Ccx, &[controls[0], controls[1], target])),
        k => {
            assert!(ancillas.len() >= k - 2, "mcx needs {} ancillas", k - 2);
            let mut ladder = vec![op(GateKind::Ccx, &[controls[0], controls[1], ancillas[0]])];
            for i in 2..k - 1 {
                ladder.push(op(
                    GateKind::Ccx,
                    &[controls[i], ancillas[i - 2], ancillas[i - 1]],
                ));
            }
            ops.extend(ladder.iter().cloned());
            ops.push(op(
                GateKind::Ccx,
                &[controls[k - 1], ancillas[k - 3], target],
            ));
            ops.extend(ladder.into_iter().rev());
        }
    }
}

/// Adds one (mod `2^m`) to the position register when every `controls` qubit is 1.
fn controlled_increment(controls: &[usize], position: &[usize], ancillas: &[usize]) -> Vec<GateOp> {
    let mut ops = Vec::new();
    // Most significant bit first: bit j flips iff all lower bits are 1.
    for j in 0..position.len() {
        let mut ctl = controls.to_vec();
        ctl.extend_from_slice(&position[j + 1..]);
        mcx(&ctl, position[j], ancillas, &mut ops);
    }
    ops
}

/// Walk step on a `2^m`-cycle: Hadamard coin on qubit 0, then shift the
/// position (qubits `1..=m`, most significant first) by +1 for coin 0 and -1
/// for coin 1. Uses `m - 2` ancillas after the position register.
pub fn qrw_body(position_qubits: usize) -> Circuit {
    assert!(position_qubits >= 1);
    let m = position_qubits;
    let ancilla_count = m.saturating_sub(2);
    let n = 1 + m + ancilla_count;
    let position: Vec<usize> = (1..=m).collect();
    let ancillas: Vec<usize> = (m + 1..n).collect();

    let mut ops = vec![op(GateKind::H, &[0]), op(GateKind::X, &[0])];
    let inc = controlled_increment(&[0], &position, &ancillas);
    ops.extend(inc.iter().cloned());
    ops.push(op(GateKind::X, &[0]));
    // Decrement is the increment run backwards.
    ops.extend(inc.into_iter().rev());
    Circuit::new(n, ops).expect("walk circuit is well formed")
}

fn zeros_label(n: usize) -> String {
    "0".repeat(n)
}

/// Unitary walk from the origin with coin 0.
pub fn qrw(position_qubits: usize) -> Benchmark {
    let body = qrw_body(position_qubits);
    let n = body.num_qubits;
    Benchmark {
        name: format!("QRW-{n}"),
        family: "QRW",
        init: vec![StateVector::from_label(&zeros_label(n)).expect("label")],
        expected_dim: (position_qubits == 2).then_some(6),
        body,
        sites: vec![],
        op_type: OpType::Unitary,
    }
}

/// Walk with amplitude damping on the coin in front of the Hadamard gate,
/// started from the two coin states at the origin.
pub fn qrw_noisy(position_qubits: usize, gamma: f64) -> Benchmark {
    let body = qrw_body(position_qubits);
    let n = body.num_qubits;
    let zero = zeros_label(n);
    let one = format!("1{}", &zero[1..]);
    Benchmark {
        name: format!("QRW-{n}-damped"),
        family: "QRW",
        init: vec![
            StateVector::from_label(&zero).expect("label"),
            StateVector::from_label(&one).expect("label"),
        ],
        expected_dim: None,
        body,
        sites: vec![ChannelSite::new(
            0,
            0,
            ChannelKind::AmplitudeDamping { gamma },
        )],
        op_type: OpType::Noise,
    }
}

/// Same unitary walk started from both coin states at the origin.
pub fn qrw_two_coins(position_qubits: usize) -> Benchmark {
    let mut b = qrw_noisy(position_qubits, 0.0);
    b.name = format!("QRW-{}-2init", b.num_qubits());
    b.sites.clear();
    b.op_type = OpType::Unitary;
    b
}

/// Register layout of [`grover`]: `k` search qubits, `k - 2` ladder
/// ancillas, one phase-kickback target.
pub fn grover_search_qubits(total_qubits: usize) -> usize {
    total_qubits.div_ceil(2)
}

/// One Grover iterate (oracle then diffusion) over `(n + 1) / 2` search
/// qubits marking the search-register value `marked`. `n` must be odd and
/// at least 3. The initial state is the uniform superposition on the search
/// register with the target in `|−⟩`.
pub fn grover(total_qubits: usize, marked: usize) -> Benchmark {
    assert!(
        total_qubits >= 3 && total_qubits % 2 == 1,
        "grover needs an odd register >= 3"
    );
    let k = grover_search_qubits(total_qubits);
    assert!(marked < 1 << k);
    let search: Vec<usize> = (0..k).collect();
    let ancillas: Vec<usize> = (k..2 * k - 2).collect();
    let target = total_qubits - 1;

    let mut ops = Vec::new();
    let flip_zeros: Vec<GateOp> = (0..k)
        .filter(|&q| (marked >> (k - 1 - q)) & 1 == 0)
        .map(|q| op(GateKind::X, &[q]))
        .collect();
    ops.extend(flip_zeros.iter().cloned());
    mcx(&search, target, &ancillas, &mut ops);
    ops.extend(flip_zeros);

    for &q in &search {
        ops.push(op(GateKind::H, &[q]));
        ops.push(op(GateKind::X, &[q]));
    }
    mcx(&search, target, &ancillas, &mut ops);
    for &q in &search {
        ops.push(op(GateKind::X, &[q]));
        ops.push(op(GateKind::H, &[q]));
    }

    let label = format!("{}{}-", "+".repeat(k), "0".repeat(k - 2));
    Benchmark {
        name: format!("Grover-{total_qubits}"),
        family: "Grover",
        body: Circuit::new(total_qubits, ops).expect("grover circuit is well formed"),
        sites: vec![],
        init: vec![StateVector::from_label(&label).expect("label")],
        op_type: OpType::Unitary,
        expected_dim: Some(2),
    }
}

/// Data-qubit state used by the bundled RUS run.
pub fn rus_data_state() -> [C64; 2] {
    [C64::new(0.48, 0.36), C64::new(0.64, -0.48)]
}

/// Repeat-until-success circuit for `(I + 2iZ)/√5` as a chain step.
///
/// Qubits 0 and 1 are ancillas, qubit 2 carries the data. The step runs
/// `ccx, s, ccx` with `h` on both ancillas and `z` on the data, measures and
/// resets both ancillas, then re-prepares them in `|+⟩` for the next round.
pub fn rus_v3() -> Benchmark {
    let ops = vec![
        op(GateKind::Ccx, &[0, 1, 2]),
        op(GateKind::S, &[2]),
        op(GateKind::Ccx, &[0, 1, 2]),
        op(GateKind::H, &[0]),
        op(GateKind::H, &[1]),
        op(GateKind::Z, &[2]),
        op(GateKind::H, &[0]),
        op(GateKind::H, &[1]),
    ];
    let sites = vec![
        ChannelSite::new(6, 0, ChannelKind::MeasureZ),
        ChannelSite::new(6, 1, ChannelKind::MeasureZ),
        ChannelSite::new(6, 0, ChannelKind::Reset),
        ChannelSite::new(6, 1, ChannelKind::Reset),
    ];
    let psi = rus_data_state();
    let plus = StateVector::from_label("++0").expect("label");
    let amps: Vec<C64> = plus
        .amplitudes()
        .chunks(2)
        .flat_map(|pair| [pair[0] * psi[0], pair[0] * psi[1]])
        .collect();
    Benchmark {
        name: "RUS-V3".to_string(),
        family: "RUS",
        body: Circuit::new(3, ops).expect("rus circuit is well formed"),
        sites,
        init: vec![StateVector::from_amplitudes(amps).expect("8 amplitudes")],
        op_type: OpType::Measure,
        expected_dim: Some(2),
    }
}

/// Rows run by the `bench` command, in table order.
pub fn bundled() -> Vec<Benchmark> {
    vec![
        grover(5, 0b101),
        grover(7, 0b1011),
        qrw(2),
        qrw(3),
        qrw(4),
        qrw_two_coins(5),
        qrw_noisy(3, 0.3),
        qrw_noisy(4, 0.3),
        rus_v3(),
    ]
}
