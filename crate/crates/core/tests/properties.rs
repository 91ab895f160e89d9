use std::f64::consts::TAU;

use num_complex::Complex64;
use proptest::prelude::*;

use evqkan::evqkan::{
    angle_table, fermi_dirac, layer_readout, tiled_operator, AngleTable, EncodingMode, Evqkan, EvqkanParams,
    LayerChaining, LayerVector,
};
use evqkan::optimizer::{minimize, OptimizerConfig};
use evqkan::qnn::{qnn_forward, QnnParams};
use evqkan::qsim::{Observable, StateVector};
use evqkan::spline::SplineGrid;
use evqkan::tasks::{loss, normalize_targets, sample_weights, Normalization, Target};

fn state_strategy(n: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n).prop_filter_map("zero vector", |v| {
        let mut s = StateVector::from_amplitudes(v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).ok()?;
        s.normalize().ok()?;
        Some(s)
    })
}

fn table_strategy(size: usize) -> impl Strategy<Value = AngleTable> {
    prop::collection::vec(prop::collection::vec(0.0..TAU, size), size)
        .prop_map(|rows| AngleTable::from_rows(rows).unwrap())
}

proptest! {
    #[test]
    fn rotations_preserve_norm(psi in state_strategy(3), q in 0usize..3, theta in -10.0f64..10.0) {
        let mut s = psi.clone();
        s.apply_ry(q, theta).unwrap();
        s.apply_rx((q + 1) % 3, theta * 0.7).unwrap();
        s.apply_multi_controlled_ry(&[(q + 1) % 3, (q + 2) % 3], 2, q, theta).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tiled_transpose_matches_matrix_transpose(table in table_strategy(4)) {
        let a = tiled_operator(&table, false).unwrap();
        let at = tiled_operator(&table, true).unwrap();
        prop_assert_eq!(a.transpose().max_abs_diff(&at).unwrap(), 0.0);
        prop_assert_eq!(a.transpose().transpose(), a);
    }

    #[test]
    fn success_probability_is_a_probability(psi in state_strategy(3), table in table_strategy(4)) {
        let op = tiled_operator(&table, false).unwrap();
        if let Ok((out, p)) = psi.apply_dense(&op, true) {
            prop_assert!((0.0..=1.0 + 1e-12).contains(&p));
            prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn readout_in_unit_interval(psi in state_strategy(3), dim in 1usize..7) {
        let v = layer_readout(&psi, dim).unwrap();
        prop_assert_eq!(v.dim(), dim);
        prop_assert!(v.components().iter().all(|c| (0.0..=1.0).contains(c)));
    }

    #[test]
    fn spline_basis_properties(x in 0.0f64..=1.0, nb in 4usize..12) {
        let grid = SplineGrid::new(nb, 3).unwrap();
        let b = grid.basis_values(x).unwrap();
        prop_assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(b.iter().all(|v| *v >= 0.0));
        prop_assert!(b.iter().filter(|v| **v != 0.0).count() <= 4);
        let c = 0.37;
        prop_assert!((grid.spline_sum(&vec![c; nb], x).unwrap() - c).abs() < 1e-12);
    }

    #[test]
    fn fermi_dirac_is_bounded_by_relu(x in -50.0f64..50.0) {
        let y = fermi_dirac(x);
        prop_assert!(y <= x.max(0.0) + 1e-12);
        prop_assert!(y >= x.min(0.0) - 1e-12);
    }

    #[test]
    fn angles_in_range(coeffs in prop::collection::vec(-3.0f64..3.0, 128), x in prop::collection::vec(0.0f64..=1.0, 2)) {
        let params = EvqkanParams::from_flat(1, 3, 8, coeffs).unwrap();
        let table = angle_table(&params, &SplineGrid::default(), 0, &LayerVector::new(x).unwrap()).unwrap();
        prop_assert!(table.angles().iter().all(|a| (0.0..=TAU).contains(a)));
    }

    #[test]
    fn predictions_are_bounded(
        coeffs in prop::collection::vec(-1.0f64..1.0, 256),
        x in prop::collection::vec(0.0f64..=1.0, 4),
        reencode in any::<bool>(),
    ) {
        let net = Evqkan {
            num_qubits: 3,
            num_layers: 2,
            grid: SplineGrid::default(),
            encoding: EncodingMode::Fit,
            readout_dim: 4,
            chaining: if reencode { LayerChaining::ReEncode } else { LayerChaining::StatePassing },
            transposed: false,
            hamiltonian: Observable::zz(3, 0, 1).unwrap(),
        };
        let params = EvqkanParams::from_flat(2, 3, 8, coeffs).unwrap();
        if let Ok(out) = net.forward(&params, &LayerVector::new(x).unwrap()) {
            prop_assert!(out.prediction.abs() <= 1.0 + 1e-12);
            prop_assert_eq!(out.trace.len(), 2);
        }
    }

    #[test]
    fn qnn_is_bounded(thetas in prop::collection::vec(0.0..TAU, 16), x in prop::collection::vec(0.0f64..=1.0, 2)) {
        let v = qnn_forward(&QnnParams::new(thetas).unwrap(), &LayerVector::new(x).unwrap(), &Observable::zz(4, 0, 1).unwrap()).unwrap();
        prop_assert!(v.abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn loss_properties(pairs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..20)) {
        let (p, t): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let w = sample_weights(p.len());
        let l = loss(&p, &t, &w).unwrap();
        prop_assert!(l.total >= 0.0);
        prop_assert_eq!(loss(&t, &t, &w).unwrap().total, 0.0);
        let swapped = loss(&t, &p, &w).unwrap();
        prop_assert_eq!(l.total, swapped.total);
        prop_assert!(l.total <= l.per_point.iter().sum::<f64>() + 1e-12);
    }

    #[test]
    fn minmax_normalization_spans_unit_interval(values in prop::collection::vec(-100.0f64..100.0, 2..30)) {
        let n = normalize_targets(&values, Normalization::MinmaxDataset, Target::Rational).unwrap();
        prop_assert!(n.iter().all(|v| (-1.0..=1.0).contains(v)));
        let spread = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - values.iter().cloned().fold(f64::INFINITY, f64::min);
        if spread > 0.0 {
            prop_assert!(n.iter().any(|v| *v == -1.0));
            prop_assert!(n.iter().any(|v| (*v - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn optimizer_running_minimum(c0 in -2.0f64..2.0, c1 in -2.0f64..2.0, budget in 10usize..120) {
        let config = OptimizerConfig { max_evaluations: budget, ..OptimizerConfig::default() };
        let t = minimize(|x| (x[0] - c0).abs() + (x[1] - c1).powi(2), &[0.0, 0.0], &config).unwrap();
        prop_assert!(t.num_evaluations <= budget);
        let min = t.evaluations.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
        prop_assert_eq!(min, t.best_loss);
    }
}
