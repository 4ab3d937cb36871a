use fraxion::quad::{integrate, integrate_to_infinity, QuadConfig};
use fraxion::renewal::{
    classic_fpp_pmf, counting_probability, epoch_cdf, ml_density, operational_time_density, waiting_survival,
    FracOrder, ProcessSpec,
};
use fraxion::specfun::gamma;
use fraxion::stochastic::{
    chi_square_binned, chi_square_homogeneity, delta_limit_check, empirical_transform, exponential_concentration,
    generate, ks_one_sample, ks_two_sample, marginal_transform_estimate, mean_estimate, operational_time_mean,
    operational_time_samples, simulate_path, simulate_paths, stable_samples, subordinated_counting_estimate,
    waiting_time_samples, EmpiricalSummary, SeededStream, SummaryKind, WaitingMethod,
};
use statrs::function::erf::erfc;

fn order(a: f64) -> FracOrder {
    FracOrder::new(a).unwrap()
}

#[test]
fn stable_half_matches_levy_cdf() {
    let xs = stable_samples(order(0.5), 100_000, &SeededStream::root(2024));
    assert!(xs.iter().all(|&x| x > 0.0 && x.is_finite()));
    let ks = ks_one_sample(&xs, |t| erfc(1.0 / (2.0 * t.sqrt())));
    assert!(ks.p_value > 0.01 && ks.statistic < ks.critical_1pct(), "{ks:?}");
}

#[test]
fn stable_laplace_transform() {
    for (i, a) in [0.3, 0.5, 0.8].into_iter().enumerate() {
        let xs = stable_samples(order(a), 200_000, &SeededStream::new(7, i as u64));
        for s in [0.5f64, 1.0, 2.0] {
            let est = empirical_transform(&xs, s);
            assert!(est.within((-s.powf(a)).exp(), 3.0), "alpha={a} s={s} {est:?}");
        }
    }
}

#[test]
fn stable_near_one_is_finite() {
    let xs = stable_samples(order(0.999), 10_000, &SeededStream::root(5));
    assert!(xs.iter().all(|&x| x > 0.0 && x.is_finite()));
    // the law collapses onto the point mass at 1
    let m = mean_estimate(&xs);
    assert!((m.mean - 1.0).abs() < 0.05, "{m:?}");
}

#[test]
fn waiting_time_survival() {
    for method in [WaitingMethod::Product, WaitingMethod::Direct] {
        let xs = waiting_time_samples(order(0.5), method, 400_000, &SeededStream::root(11));
        for t in [0.5, 1.0, 2.0] {
            let ind: Vec<f64> = xs.iter().map(|&x| (x > t) as u8 as f64).collect();
            let est = mean_estimate(&ind);
            let exact = waiting_survival(order(0.5), t).unwrap();
            assert!(est.within(exact, 3.0), "{method:?} t={t}: {est:?} vs {exact}");
        }
    }
}

#[test]
fn product_and_direct_are_indistinguishable() {
    for (i, a) in [0.3, 0.5, 0.8].into_iter().enumerate() {
        let p = waiting_time_samples(order(a), WaitingMethod::Product, 100_000, &SeededStream::new(1, i as u64));
        let d = waiting_time_samples(order(a), WaitingMethod::Direct, 100_000, &SeededStream::new(2, i as u64));
        let ks = ks_two_sample(&p, &d);
        assert!(ks.p_value > 0.01, "alpha={a} {ks:?}");
    }
}

#[test]
fn waiting_time_histogram_fits_density() {
    let a = 0.6;
    let xs = waiting_time_samples(order(a), WaitingMethod::Direct, 100_000, &SeededStream::root(99));
    let edges: Vec<f64> = (0..=40).map(|i| 0.1 + 4.9 * i as f64 / 40.0).collect();
    let chi = chi_square_binned(&xs, &edges, |t| 1.0 - waiting_survival(order(a), t).unwrap());
    assert!(chi.p_value > 0.01 && chi.bins == 42, "{chi:?}");

    // the same histogram, reported as a summary with the density alongside
    let h = EmpiricalSummary::histogram(&xs, &edges, 0.95)
        .unwrap()
        .with_analytic(|r| {
            (r.bin_left.is_finite() && r.bin_right.is_finite())
                .then(|| ml_density(order(a), 0.5 * (r.bin_left + r.bin_right)).unwrap())
        });
    assert_eq!(h.rows.iter().map(|r| r.count).sum::<u64>(), 100_000);
    let inside = h.rows.iter().filter(|r| r.analytic.is_some()).count();
    let covered = h
        .rows
        .iter()
        .filter(|r| r.analytic.is_some_and(|f| (r.ci_low - 2e-3..=r.ci_high + 2e-3).contains(&f)))
        .count();
    assert!(covered as f64 >= 0.85 * inside as f64, "{covered}/{inside}");
}

#[test]
fn exponential_limit_truncated_mean() {
    let a = 0.999;
    let xs = waiting_time_samples(order(a), WaitingMethod::Product, 200_000, &SeededStream::root(3));
    let trunc: Vec<f64> = xs.iter().map(|&x| x.min(50.0)).collect();
    let est = mean_estimate(&trunc);
    let exact = integrate(|t| waiting_survival(order(a), t).unwrap(), 0.0, 50.0, &QuadConfig::new(1e-10, 1e-10))
        .unwrap()
        .value;
    assert!((exact - 1.0).abs() < 1e-2);
    assert!(est.within(exact, 3.0), "{est:?} vs {exact}");
}

#[test]
fn poisson_limit_mean_count() {
    let spec = ProcessSpec::single(order(0.999));
    let paths = simulate_paths(spec, 10.0, 10_000, &SeededStream::root(8)).unwrap();
    let counts: Vec<f64> = paths.iter().map(|p| p.epochs.len() as f64).collect();
    let est = mean_estimate(&counts);
    let exact = 10f64.powf(0.999) / gamma(1.999);
    assert!(est.within(exact, 3.0), "{est:?} vs {exact}");
    assert!((est.mean - 10.0).abs() < 0.2);
}

#[test]
fn count_pmf_matches_fractional_poisson() {
    let spec = ProcessSpec::single(order(0.5));
    let paths = simulate_paths(spec, 1.0, 100_000, &SeededStream::root(21)).unwrap();
    for p in &paths {
        assert!(p.epochs.windows(2).all(|w| w[0] < w[1]));
        assert!(p.epochs.iter().all(|&e| e > 0.0 && e <= 1.0));
        assert!(p.waiting_times().iter().all(|&w| w > 0.0));
    }
    let outcomes: Vec<u64> = paths.iter().map(|p| p.count_at(1.0) as u64).collect();
    let pmf = EmpiricalSummary::pmf(&outcomes, 5, 0.95).unwrap();
    assert_eq!(pmf.kind, SummaryKind::PmfCounts);
    for n in 0..=5u32 {
        let ind: Vec<f64> = outcomes.iter().map(|&k| (k == n as u64) as u8 as f64).collect();
        let est = mean_estimate(&ind);
        let exact = classic_fpp_pmf(order(0.5), n, 1.0).unwrap();
        assert!(est.within(exact, 3.0), "n={n}: {est:?} vs {exact}");
        assert_eq!(pmf.rows[n as usize].count, ind.iter().sum::<f64>() as u64);
    }
}

#[test]
fn epoch_density_matches_erlang() {
    let a = 0.5;
    let spec = ProcessSpec::single(order(a));
    let paths = simulate_paths(spec, 5.0, 100_000, &SeededStream::root(31)).unwrap();
    let edges: Vec<f64> = (0..=40).map(|i| 0.1 + 4.9 * i as f64 / 40.0).collect();
    for k in [1u32, 2, 3] {
        // epochs beyond the horizon fall into the overflow cell
        let xs: Vec<f64> = paths.iter().map(|p| p.epoch(k as usize).unwrap_or(f64::INFINITY)).collect();
        let chi = chi_square_binned(&xs, &edges, |t| epoch_cdf(spec, k, t).unwrap());
        assert!(chi.p_value > 0.01, "epoch {k}: {chi:?}");
    }
}

#[test]
fn superposition_is_sum_of_components() {
    let a = 0.5;
    let two = ProcessSpec::new(order(a), 2).unwrap();
    let one = ProcessSpec::single(order(a));
    let n = 50_000;
    let merged = simulate_paths(two, 1.0, n, &SeededStream::root(41)).unwrap();
    let c1 = simulate_paths(one, 1.0, n, &SeededStream::root(42)).unwrap();
    let c2 = simulate_paths(one, 1.0, n, &SeededStream::root(43)).unwrap();
    let hist = |it: &mut dyn Iterator<Item = usize>| {
        let mut h = vec![0u64; 30];
        it.for_each(|k| h[k.min(29)] += 1);
        h
    };
    let a_counts = hist(&mut merged.iter().map(|p| p.count_at(1.0)));
    let b_counts = hist(&mut c1.iter().zip(&c2).map(|(x, y)| x.count_at(1.0) + y.count_at(1.0)));
    let chi = chi_square_homogeneity(&a_counts, &b_counts);
    assert!(chi.p_value > 0.01, "{chi:?}");
}

#[test]
fn paths_are_deterministic() {
    let spec = ProcessSpec::new(order(0.7), 3).unwrap();
    let s = SeededStream::new(123, 4);
    let p1 = simulate_path(spec, 20.0, &s).unwrap();
    let p2 = simulate_path(spec, 20.0, &s).unwrap();
    assert_eq!(p1, p2);
    assert!(p1.epochs.iter().zip(&p2.epochs).all(|(x, y)| x.to_bits() == y.to_bits()));
    assert_ne!(p1, simulate_path(spec, 20.0, &SeededStream::new(123, 5)).unwrap());
    assert!(simulate_path(spec, 0.0, &s).is_err());
}

#[test]
fn batches_do_not_depend_on_thread_count() {
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                let w = waiting_time_samples(order(0.5), WaitingMethod::Direct, 20_000, &SeededStream::root(1));
                let p = simulate_paths(ProcessSpec::single(order(0.5)), 3.0, 2_000, &SeededStream::root(1)).unwrap();
                (w, p)
            })
    };
    let (w1, p1) = run(1);
    let (w8, p8) = run(8);
    assert!(w1.iter().zip(&w8).all(|(x, y)| x.to_bits() == y.to_bits()));
    assert_eq!(p1, p8);
}

#[test]
fn operational_time_half_is_rayleigh() {
    // at α = ½ the normalized law of u = τ/t^α is (u/2)e^{−u²/4}
    let t = 2.0f64;
    let xs = operational_time_samples(order(0.5), t, 100_000, &SeededStream::root(17)).unwrap();
    let ks = ks_one_sample(&xs, |tau| {
        let u = tau / t.sqrt();
        1.0 - (-u * u / 4.0).exp()
    });
    assert!(ks.p_value > 0.01, "{ks:?}");
}

#[test]
fn operational_time_mean_matches_quadrature() {
    let (a, t) = (0.5, 1.0);
    let xs = operational_time_samples(order(a), t, 100_000, &SeededStream::root(18)).unwrap();
    let est = mean_estimate(&xs);
    let cfg = QuadConfig::new(1e-12, 1e-10);
    let norm = t.powf(1.0 - a) * gamma(a);
    let mean = integrate_to_infinity(|tau| tau * operational_time_density(order(a), tau, t).unwrap(), 0.0, &cfg)
        .unwrap()
        .value
        * norm;
    assert!((mean - operational_time_mean(order(a), t)).abs() < 1e-8);
    assert!(est.within(mean, 3.0), "{est:?} vs {mean}");

    for a in [0.3, 0.8] {
        let xs = operational_time_samples(order(a), 1.5, 100_000, &SeededStream::root(19)).unwrap();
        let est = mean_estimate(&xs);
        assert!(est.within(operational_time_mean(order(a), 1.5), 3.0), "alpha={a} {est:?}");
    }
}

#[test]
fn subordinated_counts_reproduce_counting_probability() {
    let (a, t) = (0.5, 1.0);
    let est = subordinated_counting_estimate(order(a), t, 4, 200_000, &SeededStream::root(51)).unwrap();
    for (n, e) in est.iter().enumerate() {
        let exact = counting_probability(ProcessSpec::single(order(a)), n as u32, t).unwrap();
        assert!(e.within(exact, 3.0), "n={n}: {e:?} vs {exact}");
    }
}

#[test]
fn marginal_identity() {
    for s in [0.5, 1.0, 3.0] {
        let a = 0.6f64;
        let est = marginal_transform_estimate(order(a), s, 100_000, &SeededStream::root(61));
        assert!(est.within(1.0 / (1.0 + s.powf(a)), 3.0), "s={s} {est:?}");
    }
}

#[test]
fn delta_limit_error_decreases() {
    let r = delta_limit_check(order(0.5), 1.0, &[4, 16, 64], 200_000, &SeededStream::root(71)).unwrap();
    assert!(r.decreasing, "{r:?}");
    for row in &r.rows {
        assert!((row.estimate - row.finite_l).abs() <= 3.0 * row.std_err, "{row:?}");
    }
    let one = delta_limit_check(order(0.5), 1.0, &[1], 200_000, &SeededStream::root(72)).unwrap();
    assert!((one.rows[0].estimate - 0.5).abs() <= 3.0 * one.rows[0].std_err);
    assert!(delta_limit_check(order(0.5), 1.0, &[16, 4], 10, &SeededStream::root(1)).is_err());

    let spread = exponential_concentration(&[4, 16, 64], 20_000, &SeededStream::root(73));
    for (sd, l) in spread.iter().zip([4.0f64, 16.0, 64.0]) {
        assert!((sd * l.sqrt() - 1.0).abs() < 0.05, "l={l}: {sd}");
    }
}

#[test]
fn summary_serialization() {
    let xs = generate(1000, &SeededStream::root(2), |_| 0.5);
    let s = EmpiricalSummary::survival(&xs, &[0.25, 0.75], 0.9).unwrap();
    assert_eq!(s.rows[0].count, 1000);
    assert_eq!(s.rows[1].count, 0);
    let back: EmpiricalSummary = serde_json::from_str(&s.to_json()).unwrap();
    assert_eq!(back, s);
    let json: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
    assert_eq!(json["kind"], "empirical_survival");
    assert!(EmpiricalSummary::histogram(&xs, &[1.0, 0.0], 0.95).is_err());
    assert!(EmpiricalSummary::histogram(&[], &[0.0, 1.0], 0.95).is_err());
}
