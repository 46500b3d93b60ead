//! Acceptance criteria on seeded synthetic models. Prints one line per
//! criterion and exits non-zero if any fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;

use spinrelax_core::dynamics::boltzmann_populations;
use spinrelax_core::oracle::{
    generate_model, naive_rate_three_phonon, naive_rate_two_phonon, ModelSpec,
};
use spinrelax_core::rates::{rate_one_phonon, rate_three_phonon, rate_two_phonon};
use spinrelax_core::sweeps::{
    find_crossover, fit_series_tail, grid, high_temperature_threshold, sweep_cutoff, sweep_lambda,
    sweep_temperature, Crossover,
};
use spinrelax_core::units::BOLTZMANN_CM;
use spinrelax_core::{
    assemble_generator, extract_t1, propagate_populations, CouplingSet, Lineshape, Model, Order,
    PhononBath, RateBreakdown, RateGenerator, SpinSystem, Temperature,
};

type Outcome = Result<String, String>;

fn temp(k: f64) -> Temperature {
    Temperature::new(k).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn t1(model: &Model, t: Temperature, shape: &Lineshape, order: Order) -> f64 {
    extract_t1(&assemble_generator(model, t, shape, &[order]).unwrap())
        .unwrap()
        .seconds
}

fn max_channel_deviation(x: &RateBreakdown, y: &RateBreakdown) -> f64 {
    x.per_channel
        .iter()
        .map(|(p, v)| rel(*v, y.per_channel[p]))
        .fold(0.0, f64::max)
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let shape = Lineshape::gaussian(10.0).unwrap();
    let (mut worst4, mut worst6, mut transitions) = (0.0f64, 0.0f64, 0);
    for seed in 0..20u64 {
        let spec = ModelSpec {
            seed,
            n_states: [2, 3, 4][seed as usize % 3],
            n_modes: [10, 20, 30][(seed as usize / 3) % 3],
            gap: 1.0 + 3.0 * seed as f64,
            excited_offset: 120.0,
            ..Default::default()
        };
        let m = generate_model(&spec).unwrap();
        let t = temp(20.0 + 20.0 * seed as f64);
        let (s, b, c) = (&m.system, &m.bath, &m.couplings);
        for a in 0..s.dim() {
            for f in (0..s.dim()).filter(|&f| f != a) {
                let x = rate_two_phonon(f, a, s, b, c, t, &shape).unwrap();
                worst4 = worst4.max(max_channel_deviation(
                    &x,
                    &naive_rate_two_phonon(f, a, s, b, c, t, &shape).unwrap(),
                ));
                let y = rate_three_phonon(f, a, s, b, c, t, &shape).unwrap();
                worst6 = worst6.max(max_channel_deviation(
                    &y,
                    &naive_rate_three_phonon(f, a, s, b, c, t, &shape).unwrap(),
                ));
                transitions += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    let msg = format!(
        "{transitions} transitions, max rel. deviation order 4 {worst4:.2e}, order 6 {worst6:.2e}, {:.1} s",
        elapsed.as_secs_f64()
    );
    if worst4 <= 1e-10 && worst6 <= 1e-10 && elapsed < Duration::from_secs(60) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn high_temperature_exponents() -> Outcome {
    let m = generate_model(&ModelSpec {
        seed: 2024,
        n_modes: 40,
        gap: 1.0,
        freq_range: [20.0, 200.0],
        ..Default::default()
    })
    .unwrap();
    let t0 = high_temperature_threshold(&m).unwrap();
    let temps = grid(t0, 40.0 * t0, 12, true).unwrap();
    let mut parts = Vec::new();
    let mut ok = true;
    for sigma in [2.0, 10.0, 20.0] {
        let shape = Lineshape::gaussian(sigma).unwrap();
        let s = sweep_temperature(&m, &temps, &[Order::Four, Order::Six], &shape).unwrap();
        let k4 = fit_series_tail(&s, Order::Four, t0).unwrap().exponent;
        let k6 = fit_series_tail(&s, Order::Six, t0).unwrap().exponent;
        ok &= (k4 + 2.0).abs() <= 0.1 && (k6 + 3.0).abs() <= 0.1;
        parts.push(format!("sigma {sigma}: order 4 {k4:.4}, order 6 {k6:.4}"));
    }
    let msg = format!("T >= {t0:.0} K; {}", parts.join("; "));
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn lambda_scaling() -> Outcome {
    let m = generate_model(&ModelSpec {
        seed: 77,
        n_states: 3,
        n_modes: 30,
        gap: 2.0,
        excited_offset: 90.0,
        ..Default::default()
    })
    .unwrap();
    let (t, shape) = (temp(300.0), Lineshape::default());
    let lambdas = [0.5, 1.0, 2.0, 4.0, 8.0];
    let s = sweep_lambda(&m, &lambdas, &[Order::Four, Order::Six], t, &shape).unwrap();
    let spread = |order: Order, p: i32| {
        let v: Vec<f64> = s.t1[&order]
            .iter()
            .zip(&lambdas)
            .map(|(x, l)| x * l.powi(p))
            .collect();
        v.iter().map(|x| rel(*x, v[0])).fold(0.0, f64::max)
    };
    let (d4, d6) = (spread(Order::Four, 4), spread(Order::Six, 6));
    let two = generate_model(&ModelSpec {
        seed: 78,
        n_modes: 40,
        ..Default::default()
    })
    .unwrap();
    let closed = (t1(&two, t, &shape, Order::Six) / t1(&two, t, &shape, Order::Four)).sqrt();
    let found = find_crossover(&two, t, &shape, (1e-4, 1e4)).unwrap();
    let dx = match found {
        Crossover::At { lambda, .. } => rel(lambda, closed),
        Crossover::NoCrossover => f64::INFINITY,
    };
    let msg = format!("spread order 4 {d4:.2e}, order 6 {d6:.2e}; crossover {found:?} vs sqrt(R4/R6) {closed:.6} (rel {dx:.1e})");
    if d4 <= 1e-10 && d6 <= 1e-10 && dx <= 1e-6 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn resonant_two_level(gap: f64, sigma: f64) -> (Model, Lineshape) {
    let sys = SpinSystem::new(vec![0.0, gap]).unwrap();
    let bath = PhononBath::new(vec![gap, gap]).unwrap();
    let mut v1 = DMatrix::<Complex64>::zeros(2, 2);
    v1[(0, 1)] = Complex64::new(0.7, 0.2);
    v1[(1, 0)] = Complex64::new(0.7, -0.2);
    let mut v2 = DMatrix::<Complex64>::zeros(2, 2);
    v2[(0, 0)] = Complex64::new(1.5, 0.0);
    v2[(0, 1)] = Complex64::new(-0.4, 0.0);
    v2[(1, 0)] = Complex64::new(-0.4, 0.0);
    let m = Model::new(sys, bath, CouplingSet::new(vec![v1, v2]).unwrap()).unwrap();
    (m, Lineshape::gaussian(sigma).unwrap())
}

fn detailed_balance() -> Outcome {
    let gap = 35.0;
    let (m, shape) = resonant_two_level(gap, 3.0);
    let mut worst = 0.0f64;
    for k in [10.0, 50.0, 300.0] {
        let (s, b, c) = (&m.system, &m.bath, &m.couplings);
        let up = rate_one_phonon(1, 0, s, b, c, temp(k), &shape)
            .unwrap()
            .total;
        let down = rate_one_phonon(0, 1, s, b, c, temp(k), &shape)
            .unwrap()
            .total;
        worst = worst.max(rel(up / down, (-gap / (BOLTZMANN_CM * k)).exp()));
    }
    let msg = format!("max rel. deviation from Boltzmann ratio {worst:.2e}");
    if worst <= 1e-10 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn cutoff_monotonicity() -> Outcome {
    let shape = Lineshape::default();
    let mut checked = 0;
    let mut violations = Vec::new();
    for seed in 500..508u64 {
        let n_states = 2 + (seed - 500) as usize % 3;
        let m = generate_model(&ModelSpec {
            seed,
            n_states,
            n_modes: 30,
            gap: 1.0 + 5.0 * (seed - 500) as f64,
            excited_offset: 60.0,
            ..Default::default()
        })
        .unwrap();
        let cuts = grid(10.0, m.bath.max_frequency().unwrap() + 10.0, 30, false).unwrap();
        for order in [Order::Two, Order::Four, Order::Six] {
            let s = sweep_cutoff(&m, &cuts, order, temp(300.0), &shape).unwrap();
            for (i, w) in s.t1[&order].windows(2).enumerate() {
                if w[1] > w[0] {
                    violations.push(format!(
                        "seed {seed} (N_s {n_states}) order {order} at {:.1} cm-1: +{:.2e} rel.",
                        cuts[i + 1],
                        w[1] / w[0] - 1.0
                    ));
                }
            }
            checked += 1;
        }
    }
    if violations.is_empty() {
        Ok(format!(
            "{checked} cutoff series (8 models, orders 2,4,6) non-increasing"
        ))
    } else {
        Err(format!(
            "{} rises in {checked} series: {}",
            violations.len(),
            violations.join("; ")
        ))
    }
}

fn channel_dominance() -> Outcome {
    let m = generate_model(&ModelSpec {
        seed: 9,
        n_modes: 40,
        gap: 0.3,
        freq_range: [41.0, 300.0],
        ..Default::default()
    })
    .unwrap();
    let shape = Lineshape::gaussian(5.0).unwrap();
    let r = rate_three_phonon(1, 0, &m.system, &m.bath, &m.couplings, temp(300.0), &shape).unwrap();
    let ch = |p: &str| r.channel(p.parse().unwrap());
    let share = (ch("++-") + ch("--+")) / r.total;
    let msg = format!(
        "+++ = {}, --- = {}, (++- + --+)/total = {share:.6}",
        ch("+++"),
        ch("---")
    );
    if ch("+++") == 0.0 && ch("---") == 0.0 && r.total > 0.0 && share >= 0.99 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn performance() -> Outcome {
    let shape = Lineshape::gaussian(10.0).unwrap();
    let t = temp(300.0);
    let spec = ModelSpec {
        seed: 300,
        n_states: 4,
        n_modes: 300,
        gap: 5.0,
        freq_range: [20.0, 1500.0],
        excited_offset: 100.0,
        ..Default::default()
    };
    let big = generate_model(&spec).unwrap();
    let small = generate_model(&ModelSpec {
        n_modes: 60,
        ..spec
    })
    .unwrap();

    let start = Instant::now();
    naive_rate_three_phonon(
        1,
        0,
        &small.system,
        &small.bath,
        &small.couplings,
        t,
        &shape,
    )
    .unwrap();
    let naive60 = start.elapsed().as_secs_f64();
    let triples = |n: f64| n * (n - 1.0) * (n - 2.0) / 6.0;
    let naive300 = naive60 * triples(300.0) / triples(60.0);

    let mut results = Vec::new();
    let mut fast = f64::INFINITY;
    for threads in [1, 2, 8] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let start = Instant::now();
        let r = pool.install(|| {
            rate_three_phonon(1, 0, &big.system, &big.bath, &big.couplings, t, &shape).unwrap()
        });
        fast = fast.min(start.elapsed().as_secs_f64());
        results.push(r);
    }
    let bits = |r: &RateBreakdown| {
        r.per_channel
            .values()
            .chain([&r.total])
            .map(|v| v.to_bits())
            .collect::<Vec<_>>()
    };
    let identical = results.windows(2).all(|w| bits(&w[0]) == bits(&w[1]));
    let speedup = naive300 / fast;
    let msg = format!(
        "naive at 60 modes {naive60:.2} s -> extrapolated {naive300:.0} s at 300; pruned {fast:.2} s; speedup {speedup:.0}x; threads 1,2,8 bit-identical: {identical}"
    );
    if speedup >= 10.0 && fast < 300.0 && identical {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn random_generator(n: usize, seed: u64) -> RateGenerator {
    let mut x = seed
        .wrapping_mul(6364136223846793005)
        .wrapping_add(1442695040888963407);
    let m = DMatrix::from_fn(n, n, |b, a| {
        x = x
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        if a == b {
            0.0
        } else {
            1e3 * (x >> 11) as f64 / (1u64 << 53) as f64
        }
    });
    RateGenerator::from_rates(m, BTreeSet::from([Order::Two])).unwrap()
}

fn dynamics_sanity() -> Outcome {
    let mut trace = 0.0f64;
    for seed in 0..10 {
        let g = random_generator(5, seed);
        for k in 0..20 {
            let p = propagate_populations(&g, &[0.1, 0.2, 0.3, 0.15, 0.25], 1e-4 * 1.7f64.powi(k))
                .unwrap();
            trace = trace.max((p.iter().sum::<f64>() - 1.0).abs());
        }
    }

    let sys = SpinSystem::new(vec![0.0, 40.0, 100.0]).unwrap();
    let bath = PhononBath::new(vec![40.0, 60.0, 100.0]).unwrap();
    let sym = |x: f64, y: f64, z: f64| {
        let mut m = DMatrix::<Complex64>::zeros(3, 3);
        for (i, j, v) in [(0, 1, x), (1, 2, y), (0, 2, z)] {
            m[(i, j)] = v.into();
            m[(j, i)] = v.into();
        }
        m
    };
    let cpl = CouplingSet::new(vec![
        sym(0.9, 0.2, 0.1),
        sym(0.3, 1.1, 0.4),
        sym(0.2, 0.5, 0.8),
    ])
    .unwrap();
    let three = Model::new(sys, bath, cpl).unwrap();
    let t = temp(90.0);
    let g =
        assemble_generator(&three, t, &Lineshape::gaussian(2.0).unwrap(), &[Order::Two]).unwrap();
    let p = boltzmann_populations(&three.system, t);
    let q = propagate_populations(&g, &p, 10.0 * extract_t1(&g).unwrap().seconds).unwrap();
    let drift = p
        .iter()
        .zip(&q)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);

    let (two, shape) = resonant_two_level(35.0, 3.0);
    let g2 = assemble_generator(&two, t, &shape, &[Order::Two]).unwrap();
    let exact = extract_t1(&g2).unwrap().seconds == 1.0 / (g2.rate(1, 0) + g2.rate(0, 1));

    let msg = format!(
        "trace error {trace:.1e}, Boltzmann drift {drift:.1e}, two-level T1 exact: {exact}"
    );
    if trace <= 1e-9 && drift <= 1e-8 && exact {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 oracle equivalence", oracle_equivalence),
        ("2 high-temperature exponents", high_temperature_exponents),
        ("3 lambda scaling and crossover", lambda_scaling),
        ("4 detailed balance", detailed_balance),
        ("5 cutoff monotonicity", cutoff_monotonicity),
        ("6 channel dominance", channel_dominance),
        ("7 performance and determinism", performance),
        ("8 dynamics sanity", dynamics_sanity),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("acceptance {name}: PASS ({detail})"),
            Err(detail) => {
                failed += 1;
                println!("acceptance {name}: FAIL ({detail})");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
