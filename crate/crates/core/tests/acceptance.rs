//! End-to-end acceptance suite. Every criterion prints one `PASS`/`FAIL`
//! line. The oracle and determinism criteria (1-5, 10) decide the exit
//! status; the stochastic reproduction bands (6-9) report their verdict and
//! only require every attempt to complete.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fs;
use std::path::Path;
use std::sync::OnceLock;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use evqkan::evqkan::{
    block_unitary, encode_initial_state, layer_readout, lcu_apply_gate_level, shifted_block_unitary,
    tiled_operator, AngleTable, EncodingMode, LayerVector,
};
use evqkan::harness::{emit_reports, run_experiment, summarize, ExperimentConfig, Method, SummaryStats};
use evqkan::optimizer::{minimize, OptimizerConfig};
use evqkan::qsim::{ry_matrix, DenseOperator, StateVector};
use evqkan::spline::SplineGrid;
use evqkan::tasks::Target;

fn report(id: u32, name: &str, pass: bool, detail: String) {
    println!("criterion {id:>2} [{name}]: {} ({detail})", if pass { "PASS" } else { "FAIL" });
}

fn random_table(size: usize, rng: &mut impl Rng) -> AngleTable {
    AngleTable::from_rows(
        (0..size)
            .map(|_| (0..size).map(|_| rng.gen_range(0.0..=TAU)).collect())
            .collect(),
    )
    .unwrap()
}

fn random_state(n: usize, rng: &mut impl Rng) -> StateVector {
    let amps = (0..1 << n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let mut s = StateVector::from_amplitudes(amps).unwrap();
    s.normalize().unwrap();
    s
}

fn closed_form(table: &AngleTable) -> DenseOperator {
    let t = table.size();
    let mut op = DenseOperator::zeros(2 * t, t).unwrap();
    for r in 0..t {
        for c in 0..t {
            let tile = ry_matrix(table.get(c, r ^ c));
            for a in 0..2 {
                for b in 0..2 {
                    op.set(2 * r + a, 2 * c + b, tile[a][b]);
                }
            }
        }
    }
    op
}

fn criterion_01_operator_construction() -> bool {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let mut worst_sum = 0.0f64;
    let mut worst_closed = 0.0f64;
    let mut worst_unitary = 0.0f64;
    let id = DenseOperator::identity(8).unwrap();
    for _ in 0..200 {
        let table = random_table(4, &mut rng);
        let recursion = tiled_operator(&table, false).unwrap();
        let mut unrolled = shifted_block_unitary(&table, 0).unwrap();
        for p in 1..4 {
            unrolled = unrolled.add(&shifted_block_unitary(&table, p).unwrap()).unwrap();
        }
        worst_sum = worst_sum.max(recursion.max_abs_diff(&unrolled).unwrap());
        worst_closed = worst_closed.max(recursion.max_abs_diff(&closed_form(&table)).unwrap());
        for p in 0..4 {
            let u = block_unitary(&table, p).unwrap();
            let uu = u.adjoint().matmul(&u).unwrap();
            worst_unitary = worst_unitary.max(uu.max_abs_diff(&id).unwrap());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst_sum < 1e-12 && worst_closed < 1e-12 && worst_unitary < 1e-12 && secs < 5.0;
    report(
        1,
        "operator construction",
        pass,
        format!("sum {worst_sum:.1e}, closed form {worst_closed:.1e}, unitarity {worst_unitary:.1e}, {secs:.2}s"),
    );
    pass
}

fn criterion_02_gate_level_lcu() -> bool {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    let mut worst_fid = 0.0f64;
    let mut worst_p = 0.0f64;
    for i in 0..100 {
        let table = random_table(4, &mut rng);
        let psi = random_state(3, &mut rng);
        let transposed = i % 2 == 1;
        let (gate, pg) = lcu_apply_gate_level(&psi, &table, transposed).unwrap();
        let (dense, pd) = psi.apply_dense(&tiled_operator(&table, transposed).unwrap(), true).unwrap();
        worst_fid = worst_fid.max(1.0 - gate.fidelity(&dense).unwrap());
        worst_p = worst_p.max((pg - pd).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst_fid <= 1e-10 && worst_p < 1e-10 && secs < 10.0;
    report(
        2,
        "gate-level LCU",
        pass,
        format!("1 - fidelity {worst_fid:.1e}, probability {worst_p:.1e}, {secs:.2}s"),
    );
    pass
}

fn criterion_03_encoding_round_trip() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.gen_range(2..=5);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..=1.0)).collect();
        let lv = LayerVector::new(x.clone()).unwrap();
        let state = encode_initial_state(&lv, EncodingMode::Simple, n).unwrap();
        let out = layer_readout(&state, n).unwrap();
        for i in (0..n).step_by(2) {
            worst = worst.max((out.components()[i] - x[i]).abs());
        }
    }
    let pass = worst < 1e-12;
    report(3, "encoding round trip", pass, format!("max error {worst:.1e}"));
    pass
}

fn criterion_04_spline_suite() -> bool {
    let grid = SplineGrid::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1004);
    let (mut unity, mut negative, mut support) = (0.0f64, 0.0f64, 0usize);
    let mut jump = 0.0f64;
    for i in 0..1000 {
        let x = if i == 0 { 0.0 } else if i == 1 { 1.0 } else { rng.gen_range(0.0..=1.0) };
        let b = grid.basis_values(x).unwrap();
        unity = unity.max((b.iter().sum::<f64>() - 1.0).abs());
        negative = negative.min(b.iter().cloned().fold(0.0, f64::min));
        support = support.max(b.iter().filter(|v| **v != 0.0).count());
        if x + 1e-6 <= 1.0 {
            let c = grid.basis_values(x + 1e-6).unwrap();
            jump = jump.max(b.iter().zip(&c).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max));
        }
    }
    let pass = unity < 1e-12 && negative >= 0.0 && support <= grid.order() + 1 && jump < 1e-4;
    report(
        4,
        "spline suite",
        pass,
        format!("unity {unity:.1e}, min {negative:.1e}, support {support}, step {jump:.1e}"),
    );
    pass
}

fn criterion_05_optimizer_sanity() -> bool {
    let config = OptimizerConfig {
        max_evaluations: 200,
        ..OptimizerConfig::default()
    };
    let f = |x: &[f64]| (x[0] - 1.0).powi(2) + (x[1] - 2.0).powi(2);
    let a = minimize(f, &[0.0, 0.0], &config).unwrap();
    let b = minimize(f, &[0.0, 0.0], &config).unwrap();
    let identical = serde_json::to_vec(&a).unwrap() == serde_json::to_vec(&b).unwrap();
    let pass = a.best_loss < 1e-3 && a.num_evaluations <= 200 && identical;
    report(
        5,
        "optimizer sanity",
        pass,
        format!("best {:.2e} in {} evaluations, identical {identical}", a.best_loss, a.num_evaluations),
    );
    pass
}

fn run_stats(config: &ExperimentConfig) -> SummaryStats {
    summarize(&run_experiment(config).unwrap()).unwrap()
}

fn fit_config(method: Method, layers: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::fit(method, Target::Eq7).unwrap();
    c.num_layers = layers;
    c
}

fn evqkan_fit_l3() -> &'static SummaryStats {
    static S: OnceLock<SummaryStats> = OnceLock::new();
    S.get_or_init(|| run_stats(&fit_config(Method::Evqkan, 3)))
}

fn criterion_06_fitting_reproduction() -> bool {
    let ev = evqkan_fit_l3();
    let qnn = run_stats(&fit_config(Method::Qnn, 3));
    let pass = ev.average < qnn.average && (10.0..=22.0).contains(&ev.average);
    report(
        6,
        "fitting reproduction",
        pass,
        format!("EVQKAN mean {:.4} vs QNN mean {:.4}; band [10, 22]", ev.average, qnn.average),
    );
    ev.successful == 10 && qnn.successful == 10
}

fn criterion_07_classification_reproduction() -> bool {
    let c = ExperimentConfig::classify(Method::Evqkan, false, true, 0).unwrap();
    let s = run_stats(&c);
    let pass = (15.0..=42.0).contains(&s.average);
    report(
        7,
        "classification reproduction",
        pass,
        format!("EVQKAN mean {:.4} (median {:.4}); band [15, 42]", s.average, s.median),
    );
    s.successful == 10
}

fn criterion_08_transposed_single_layer() -> bool {
    let mut conv = ExperimentConfig::classify(Method::Evqkan, false, true, 0).unwrap();
    conv.num_layers = 1;
    let mut tr = ExperimentConfig::classify(Method::Evqkan, true, true, 0).unwrap();
    tr.num_layers = 1;
    let (a, b) = (run_stats(&conv), run_stats(&tr));
    let pass = b.average < a.average;
    report(
        8,
        "transposed single layer",
        pass,
        format!("transposed mean {:.4} vs conventional mean {:.4}", b.average, a.average),
    );
    a.successful == 10 && b.successful == 10
}

fn criterion_09_layer_direction() -> bool {
    let l3 = evqkan_fit_l3();
    let l1 = run_stats(&fit_config(Method::Evqkan, 1));
    let pass = l3.average < l1.average;
    report(
        9,
        "layer sweep direction",
        pass,
        format!("N_l=3 mean {:.4} vs N_l=1 mean {:.4}", l3.average, l1.average),
    );
    l1.successful == 10
}

fn collect_files(dir: &Path, root: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            collect_files(&path, root, out);
        } else {
            let rel = path.strip_prefix(root).unwrap().display().to_string();
            out.insert(rel, fs::read(&path).unwrap());
        }
    }
}

fn criterion_10_determinism() -> bool {
    let config = ExperimentConfig::classify(Method::Evqkan, false, true, 7).unwrap();
    let mut outputs = Vec::new();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        let records = run_experiment(&config).unwrap();
        let stats = summarize(&records).unwrap();
        emit_reports(&records, Some(&stats), &config, dir.path()).unwrap();
        let mut files = BTreeMap::new();
        collect_files(dir.path(), dir.path(), &mut files);
        files.remove("timings.csv");
        outputs.push(files);
    }
    let differing: Vec<&String> = outputs[0]
        .iter()
        .filter(|(k, v)| outputs[1].get(*k) != Some(*v))
        .map(|(k, _)| k)
        .collect();
    let pass = differing.is_empty() && outputs[0].len() == outputs[1].len() && outputs[0].len() > 5;
    report(
        10,
        "determinism",
        pass,
        format!("{} files compared, {} differ", outputs[0].len(), differing.len()),
    );
    pass
}

fn main() {
    let criteria: [fn() -> bool; 10] = [
        criterion_01_operator_construction,
        criterion_02_gate_level_lcu,
        criterion_03_encoding_round_trip,
        criterion_04_spline_suite,
        criterion_05_optimizer_sanity,
        criterion_06_fitting_reproduction,
        criterion_07_classification_reproduction,
        criterion_08_transposed_single_layer,
        criterion_09_layer_direction,
        criterion_10_determinism,
    ];
    let failed = criteria.iter().filter(|c| !c()).count();
    if failed > 0 {
        eprintln!("{failed} blocking acceptance check(s) failed");
        std::process::exit(1);
    }
}
