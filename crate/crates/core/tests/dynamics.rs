use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use spinrelax_core::dynamics::boltzmann_populations;
use spinrelax_core::oracle::{generate_model, ModelSpec};
use spinrelax_core::{
    assemble_generator, extract_t1, propagate_populations, CouplingSet, Lineshape, Model, Order,
    PhononBath, RateGenerator, SpinSystem, Temperature, T1,
};

fn generator(rates: &[&[f64]]) -> RateGenerator {
    let n = rates.len();
    let m = DMatrix::from_fn(n, n, |b, a| if a == b { 0.0 } else { rates[b][a] });
    RateGenerator::from_rates(m, BTreeSet::from([Order::Two])).unwrap()
}

fn col_sum_max(g: &RateGenerator) -> f64 {
    g.matrix()
        .column_iter()
        .map(|c| c.sum().abs())
        .fold(0.0, f64::max)
}

#[test]
fn two_level_generator_and_t1() {
    let g = generator(&[&[0.0, 1.0], &[3.0, 0.0]]);
    assert_eq!(
        g.matrix(),
        &DMatrix::from_row_slice(2, 2, &[-3.0, 1.0, 3.0, -1.0])
    );
    assert_eq!(extract_t1(&g).unwrap().seconds, 0.25);
    let p = propagate_populations(&g, &[1.0, 0.0], 50.0).unwrap();
    assert!((p[0] - 0.25).abs() < 1e-12 && (p[1] - 0.75).abs() < 1e-12);
    assert_eq!(
        propagate_populations(&g, &[0.3, 0.7], 0.0).unwrap(),
        vec![0.3, 0.7]
    );
}

#[test]
fn zero_generator_is_no_relaxation() {
    let g = generator(&[&[0.0, 0.0, 0.0], &[0.0, 0.0, 0.0], &[0.0, 0.0, 0.0]]);
    assert_eq!(extract_t1(&g).unwrap(), T1::NO_RELAXATION);
    let sys = SpinSystem::new(vec![0.0, 5.0]).unwrap();
    let model = Model::new(
        sys,
        PhononBath::new(vec![5.0]).unwrap(),
        CouplingSet::zeros(2, 1),
    )
    .unwrap();
    let g = assemble_generator(
        &model,
        Temperature::new(10.0).unwrap(),
        &Lineshape::default(),
        &[Order::Two],
    )
    .unwrap();
    assert!(g.is_zero());
}

#[test]
fn invalid_populations_rejected() {
    let g = generator(&[&[0.0, 1.0], &[3.0, 0.0]]);
    assert!(propagate_populations(&g, &[0.5, 0.6], 1.0).is_err());
    assert!(propagate_populations(&g, &[1.2, -0.2], 1.0).is_err());
    assert!(propagate_populations(&g, &[1.0], 1.0).is_err());
    assert!(propagate_populations(&g, &[1.0, 0.0], -1.0).is_err());
}

#[test]
fn assembled_columns_sum_to_zero() {
    let m = generate_model(&ModelSpec {
        seed: 21,
        n_states: 4,
        n_modes: 25,
        excited_offset: 60.0,
        ..Default::default()
    })
    .unwrap();
    let g = assemble_generator(
        &m,
        Temperature::new(200.0).unwrap(),
        &Lineshape::default(),
        &[Order::Two, Order::Four, Order::Six],
    )
    .unwrap();
    assert!(col_sum_max(&g) <= 1e-12 * g.matrix().norm());
    for b in 0..4 {
        for a in 0..4 {
            if a != b {
                assert!(g.rate(b, a) >= 0.0);
            }
        }
    }
    let eig = g.matrix().complex_eigenvalues();
    assert!(eig
        .iter()
        .all(|l: &Complex64| l.re <= 1e-9 * g.matrix().norm()));
}

#[test]
fn orders_add_entrywise() {
    let m = generate_model(&ModelSpec {
        seed: 9,
        n_states: 3,
        n_modes: 20,
        excited_offset: 70.0,
        ..Default::default()
    })
    .unwrap();
    let (t, s) = (Temperature::new(250.0).unwrap(), Lineshape::default());
    let all = assemble_generator(&m, t, &s, &[Order::Two, Order::Four, Order::Six]).unwrap();
    let sum = assemble_generator(&m, t, &s, &[Order::Two])
        .unwrap()
        .combine(&assemble_generator(&m, t, &s, &[Order::Four]).unwrap())
        .unwrap()
        .combine(&assemble_generator(&m, t, &s, &[Order::Six]).unwrap())
        .unwrap();
    let diff = (all.matrix() - sum.matrix()).abs().max();
    assert!(diff <= 1e-13 * all.matrix().abs().max());
    assert_eq!(all.orders(), sum.orders());
}

#[test]
fn slow_mode_matches_propagated_decay() {
    // two fast-exchanging pairs joined by slow cross rates
    let fast = 2.0e3;
    let g = generator(&[
        &[0.0, fast, 0.7, 0.0],
        &[1.3 * fast, 0.0, 0.0, 0.4],
        &[1.1, 0.0, 0.0, 0.9 * fast],
        &[0.0, 0.6, fast, 0.0],
    ]);
    let t1 = extract_t1(&g).unwrap();
    assert_eq!(t1.multiplicity, 1);
    let p0 = [1.0, 0.0, 0.0, 0.0];
    let inf = propagate_populations(&g, &p0, 1e3 * t1.seconds).unwrap();
    // log-time grid over the tail, after the fast modes are gone
    let times: Vec<f64> = (0..12)
        .map(|k| t1.seconds * 0.05 * 1.3f64.powi(k))
        .collect();
    let ys: Vec<f64> = times
        .iter()
        .map(|&t| {
            let p = propagate_populations(&g, &p0, t).unwrap();
            (p[0] + p[1] - inf[0] - inf[1]).abs().ln()
        })
        .collect();
    let n = times.len() as f64;
    let (mx, my) = (times.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = times
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum();
    let sxx: f64 = times.iter().map(|x| (x - mx).powi(2)).sum();
    let rate = -sxy / sxx;
    assert!(
        (rate * t1.seconds - 1.0).abs() < 1e-6,
        "{} vs {}",
        rate,
        1.0 / t1.seconds
    );
}

#[test]
fn degenerate_slow_modes_flagged() {
    // two decoupled identical pairs: slow eigenvalue −2 twice
    let g = generator(&[
        &[0.0, 1.0, 0.0, 0.0],
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
        &[0.0, 0.0, 1.0, 0.0],
    ]);
    let t1 = extract_t1(&g).unwrap();
    assert!((t1.seconds - 0.5).abs() < 1e-12);
    assert_eq!(t1.multiplicity, 2);
}

#[test]
fn boltzmann_is_stationary_for_resonant_model() {
    // modes sit exactly on the gaps; other combinations fall outside the window
    let sys = SpinSystem::new(vec![0.0, 40.0, 100.0]).unwrap();
    let bath = PhononBath::new(vec![40.0, 60.0, 100.0]).unwrap();
    let v = |x: f64, y: f64, z: f64| {
        let mut m = DMatrix::<Complex64>::zeros(3, 3);
        m[(0, 1)] = x.into();
        m[(1, 0)] = x.into();
        m[(1, 2)] = y.into();
        m[(2, 1)] = y.into();
        m[(0, 2)] = z.into();
        m[(2, 0)] = z.into();
        m
    };
    let cpl = CouplingSet::new(vec![v(0.9, 0.2, 0.1), v(0.3, 1.1, 0.4), v(0.2, 0.5, 0.8)]).unwrap();
    let model = Model::new(sys, bath, cpl).unwrap();
    let t = Temperature::new(90.0).unwrap();
    let g =
        assemble_generator(&model, t, &Lineshape::gaussian(2.0).unwrap(), &[Order::Two]).unwrap();
    let p = boltzmann_populations(&model.system, t);
    let q = propagate_populations(&g, &p, 5.0 * extract_t1(&g).unwrap().seconds).unwrap();
    for (x, y) in p.iter().zip(&q) {
        assert!((x - y).abs() < 1e-8);
    }
}

fn permuted(g: &RateGenerator, perm: &[usize]) -> RateGenerator {
    let n = g.dim();
    let m = DMatrix::from_fn(n, n, |b, a| {
        if a == b {
            0.0
        } else {
            g.rate(perm[b], perm[a])
        }
    });
    RateGenerator::from_rates(m, g.orders().clone()).unwrap()
}

proptest! {
    #[test]
    fn reordering_states_leaves_t1_unchanged(
        rates in proptest::collection::vec(0.0f64..10.0, 16),
        perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle(),
    ) {
        let m = DMatrix::from_fn(4, 4, |b, a| if a == b { 0.0 } else { rates[4 * b + a] + 0.01 });
        let g = RateGenerator::from_rates(m, BTreeSet::from([Order::Four])).unwrap();
        let x = extract_t1(&g).unwrap().seconds;
        let y = extract_t1(&permuted(&g, &perm)).unwrap().seconds;
        prop_assert!((x - y).abs() <= 1e-9 * x);
    }

    #[test]
    fn propagation_preserves_trace(
        rates in proptest::collection::vec(0.0f64..100.0, 9),
        t in 0.0f64..5.0,
    ) {
        let m = DMatrix::from_fn(3, 3, |b, a| if a == b { 0.0 } else { rates[3 * b + a] });
        let g = RateGenerator::from_rates(m, BTreeSet::from([Order::Two])).unwrap();
        let p = propagate_populations(&g, &[0.2, 0.5, 0.3], t).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(p.iter().all(|&x| x >= 0.0));
    }
}
