//! Acceptance criteria. Runs as a plain binary so every criterion prints one
//! PASS/FAIL line; exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use qmc_reach::families;
use qmc_reach::numerics::{StateVector, Tolerances, C64};
use qmc_reach::oracle::{self, DensityMatrix};
use qmc_reach::qmc::{completeness_defect, kraus_for, ChannelKind};
use qmc_reach::random::{random_instance, random_state, random_trace_preserving, RandomShape};
use qmc_reach::reach::{reachable_subspace, verify_run, ReachConfig, SubspaceBasis};
use qmc_reach::simulator::{partial_trace_branches, step_image};
use qmc_reach::{parse_qasm, QuantumMarkovChain, ReachReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SPAN_TOL: f64 = 1e-6;

/// A finished engine run kept for the proof-step checks.
struct Run {
    label: String,
    qmc: QuantumMarkovChain,
    init: Vec<StateVector>,
    report: ReachReport,
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn kets(terms: &[(&str, f64)]) -> StateVector {
    let n = terms[0].0.len();
    let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
    for (label, c) in terms {
        amps[usize::from_str_radix(label, 2).unwrap()] += C64::new(*c, 0.0);
    }
    StateVector::from_amplitudes(amps).unwrap()
}

fn qrw3_golden(runs: &mut Vec<Run>) -> Outcome {
    let start = Instant::now();
    let qmc = qmc_reach::build_qmc(
        parse_qasm(include_str!("../../../circuits/qrw3.qasm")).unwrap(),
        vec![],
    )
    .unwrap();
    let init = vec![StateVector::from_label("000").unwrap()];
    let report = reachable_subspace(&qmc, &init, &ReachConfig::default()).unwrap();
    let elapsed = start.elapsed();

    let golden = [
        kets(&[("000", 1.0)]),
        kets(&[("001", 1.0), ("111", 1.0)]),
        kets(&[("100", 1.0), ("110", -1.0)]),
        kets(&[("101", 1.0), ("001", 1.0)]),
        kets(&[("010", 1.0)]),
        kets(&[("011", 1.0), ("101", 1.0)]),
    ];
    let golden = SubspaceBasis::span_of(3, &golden, &Tolerances::default()).unwrap();
    let ours_in_golden = golden.max_residual_of(&report.subspace).unwrap();
    let golden_in_ours = report.subspace.max_residual_of(&golden).unwrap();
    let pass = report.dim() == 6
        && golden.dim() == 6
        && ours_in_golden < SPAN_TOL
        && golden_in_ours < SPAN_TOL
        && elapsed < Duration::from_secs(5);
    let detail = format!(
        "dim {} (want 6), residuals {ours_in_golden:.1e}/{golden_in_ours:.1e}, {elapsed:?}",
        report.dim()
    );
    runs.push(Run {
        label: "QRW-3".into(),
        qmc,
        init,
        report,
    });
    outcome(pass, detail)
}

fn grover_dim_two(runs: &mut Vec<Run>) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (n, marked) in [(5, 0b101), (7, 0b1011)] {
        let b = families::grover(n, marked);
        let qmc = b.qmc().unwrap();
        let config = ReachConfig::with_tolerances(Tolerances::with_null_threshold(1e-8).unwrap());
        let start = Instant::now();
        let report = reachable_subspace(&qmc, &b.init, &config).unwrap();
        let elapsed = start.elapsed();
        pass &= report.dim() == 2;
        if n == 7 {
            pass &= elapsed < Duration::from_secs(30);
        }
        parts.push(format!("n={n}: dim {} in {elapsed:?}", report.dim()));
        runs.push(Run {
            label: b.name.clone(),
            qmc,
            init: b.init.clone(),
            report,
        });
    }
    outcome(pass, parts.join(", "))
}

fn rus_dim_two(runs: &mut Vec<Run>) -> Outcome {
    let b = families::rus_v3();
    let qmc = b.qmc().unwrap();
    let start = Instant::now();
    let report = reachable_subspace(&qmc, &b.init, &ReachConfig::default()).unwrap();
    let elapsed = start.elapsed();
    let pass = report.dim() == 2 && elapsed < Duration::from_secs(5);
    let detail = format!(
        "dim {} (want 2), {} raw branches, {elapsed:?}",
        report.dim(),
        qmc.branch_count()
    );
    runs.push(Run {
        label: b.name.clone(),
        qmc,
        init: b.init.clone(),
        report,
    });
    outcome(pass, detail)
}

fn oracle_equivalence(runs: &mut Vec<Run>) -> Outcome {
    let start = Instant::now();
    let tol = Tolerances::default();
    let total = 240u64;
    let mut failures = Vec::new();
    let mut dims = [0usize; 9];
    for seed in 0..total {
        let inst = random_instance(seed, RandomShape::new(1 + (seed % 3) as usize));
        let report = reachable_subspace(&inst.qmc, &inst.init, &ReachConfig::default()).unwrap();
        let rho = DensityMatrix::from_vectors(&inst.init)
            .unwrap()
            .scaled(1.0 / inst.init.len() as f64);
        let reference = oracle::oracle_reachable(&inst.qmc, &rho, &tol).unwrap();
        let agree = report.subspace.same_span(&reference, SPAN_TOL).unwrap();
        if !agree {
            failures.push(format!(
                "seed {seed}: engine {} vs oracle {}",
                report.dim(),
                reference.dim()
            ));
        }
        dims[report.dim()] += 1;
        runs.push(Run {
            label: format!("random seed {seed}"),
            qmc: inst.qmc,
            init: inst.init,
            report,
        });
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(60);
    let detail = if failures.is_empty() {
        format!(
            "{total}/{total} agree (dim histogram {:?}), {elapsed:?}",
            &dims[1..]
        )
    } else {
        format!("{} disagreements: {}", failures.len(), failures.join("; "))
    };
    outcome(pass, detail)
}

fn proof_steps(runs: &[Run]) -> Outcome {
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    for run in runs {
        let checks = verify_run(&run.qmc, &run.init, &run.report, SPAN_TOL).unwrap();
        worst = worst.max(checks.closure_residual);
        if !checks.all_hold() {
            bad.push(format!("{}: {checks:?}", run.label));
        }
    }
    let detail = if bad.is_empty() {
        format!(
            "{} runs: loop bound, closure (worst residual {worst:.1e}) and init containment hold",
            runs.len()
        )
    } else {
        bad.join("; ")
    };
    outcome(bad.is_empty(), detail)
}

fn channel_algebra() -> Outcome {
    let mut worst_defect = 0.0f64;
    let mut kinds = vec![ChannelKind::MeasureZ, ChannelKind::Reset];
    for i in 0..=20 {
        let x = i as f64 / 20.0;
        kinds.push(ChannelKind::BitFlip { p: x });
        kinds.push(ChannelKind::PhaseFlip { p: x });
        kinds.push(ChannelKind::AmplitudeDamping { gamma: x });
    }
    for k in &kinds {
        worst_defect = worst_defect.max(completeness_defect(&kraus_for(k).unwrap()));
    }
    let tol = Tolerances::default();
    let mut worst_weight = 0.0f64;
    for seed in 0..100 {
        let (qmc, v) = random_trace_preserving(seed, 1 + (seed % 3) as usize);
        let img = step_image(&qmc, &v, &tol).unwrap();
        worst_weight = worst_weight.max((img.total_weight() - 1.0).abs());
    }
    let pass = worst_defect <= 1e-10 && worst_weight <= 1e-8;
    outcome(
        pass,
        format!(
            "max |ΣK†K - I| = {worst_defect:.1e} over {} kinds, max |Σ‖b‖² - 1| = {worst_weight:.1e} over 100 instances",
            kinds.len()
        ),
    )
}

fn partial_trace_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for i in 0..50 {
        let n = 2 + i % 3;
        let v = random_state(&mut rng, n);
        let q = rng.gen_range(0..n);
        let got =
            DensityMatrix::from_vectors(&partial_trace_branches(&v, q).unwrap().branches).unwrap();
        let want = DensityMatrix::pure(&v).partial_trace_keep_zero(q).unwrap();
        worst = worst.max(got.matrix().max_abs_diff(want.matrix()));
        cases += 1;
    }
    // |0⟩|λ⟩ + |1⟩|μ⟩ traced over the first qubit leaves |λ⟩⟨λ| + |μ⟩⟨μ|.
    for _ in 0..10 {
        let lambda = random_state(&mut rng, 1).scaled(C64::new(rng.gen_range(0.1..1.0), 0.0));
        let mu = random_state(&mut rng, 1).scaled(C64::new(rng.gen_range(0.1..1.0), 0.0));
        let (l, m) = (lambda.amplitudes(), mu.amplitudes());
        let v = StateVector::from_amplitudes(vec![l[0], l[1], m[0], m[1]]).unwrap();
        let got =
            DensityMatrix::from_vectors(&partial_trace_branches(&v, 0).unwrap().branches).unwrap();
        let zero = C64::new(0.0, 0.0);
        let embed = |s: &StateVector| {
            let a = s.amplitudes();
            StateVector::from_amplitudes(vec![a[0], a[1], zero, zero]).unwrap()
        };
        let want = DensityMatrix::from_vectors(&[embed(&lambda), embed(&mu)]).unwrap();
        worst = worst.max(got.matrix().max_abs_diff(want.matrix()));
        cases += 1;
    }
    outcome(
        worst <= 1e-10,
        format!("{cases} states, max entry error {worst:.1e}"),
    )
}

fn excluded_rows() -> Outcome {
    // Reported only: timings, edge counts and the larger walk rows are not
    // comparable with this backend.
    let b = families::qrw_two_coins(5);
    let start = Instant::now();
    let qmc = b.qmc().unwrap();
    let report = reachable_subspace(&qmc, &b.init, &ReachConfig::default()).unwrap();
    outcome(
        true,
        format!(
            "not asserted; stretch row {} reaches dim {} of {} in {:?}",
            b.name,
            report.dim(),
            qmc.dim(),
            start.elapsed()
        ),
    )
}

fn main() {
    let mut runs = Vec::new();
    let results = vec![
        ("AC1 QRW-3 golden basis", qrw3_golden(&mut runs)),
        ("AC2 Grover reachable dim 2", grover_dim_two(&mut runs)),
        ("AC3 RUS reachable dim 2", rus_dim_two(&mut runs)),
        (
            "AC4 engine/oracle equivalence",
            oracle_equivalence(&mut runs),
        ),
        ("AC5 proof-step invariants", proof_steps(&runs)),
        ("AC6 channel algebra", channel_algebra()),
        ("AC7 partial trace oracle", partial_trace_oracle()),
        ("AC8 excluded rows (report only)", excluded_rows()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {name}: {}", o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
