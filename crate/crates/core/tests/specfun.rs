use fraxion::specfun::{mainardi, mittag_leffler, mittag_leffler_deriv, recip_gamma, MLParams, MlConfig};

struct Row {
    alpha: f64,
    beta: f64,
    gamma: f64,
    z: f64,
    value: f64,
}

fn reference_rows() -> Vec<Row> {
    include_str!("data/ml_reference.csv")
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let f: Vec<f64> = l.split(',').map(|x| x.trim().parse().unwrap()).collect();
            Row {
                alpha: f[0],
                beta: f[1],
                gamma: f[2],
                z: f[3],
                value: f[4],
            }
        })
        .collect()
}

#[test]
fn mittag_leffler_matches_high_precision_table() {
    let rows = reference_rows();
    assert!(rows.len() > 500);
    let mut failures = Vec::new();
    let mut uncertified = 0;
    for r in &rows {
        let p = MLParams::new(r.alpha, r.beta, r.gamma).unwrap();
        match mittag_leffler(&p, r.z) {
            Ok(e) => {
                let err = (e.value - r.value).abs();
                if err > e.abs_err.max(1e-15) {
                    failures.push(format!(
                        "a={} b={} g={} z={}: got {:e} want {:e} err {:e} > est {:e}",
                        r.alpha, r.beta, r.gamma, r.z, e.value, r.value, err, e.abs_err
                    ));
                }
            }
            Err(e) => {
                eprintln!("uncertified: {e}");
                uncertified += 1
            }
        }
    }
    for f in &failures {
        eprintln!("{f}");
    }
    eprintln!("{} rows, {} uncertified", rows.len(), uncertified);
    assert!(failures.is_empty(), "{} error bounds violated", failures.len());
}

#[test]
fn mittag_leffler_matches_random_held_out_rows() {
    let text = include_str!("data/ml_random.csv");
    let mut n = 0;
    for l in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let f: Vec<f64> = l.split(',').map(|x| x.trim().parse().unwrap()).collect();
        let p = MLParams::new(f[0], f[1], f[2]).unwrap();
        let e = mittag_leffler(&p, f[3]).unwrap_or_else(|err| panic!("{l}: {err}"));
        let err = (e.value - f[4]).abs();
        assert!(err <= e.abs_err.max(1e-15), "{l}: got {:e}, err {err:e} > {:e}", e.value, e.abs_err);
        let cfg = MlConfig::default();
        let target = (cfg.rel_tol * e.value.abs()).max(cfg.abs_tol);
        assert!(e.abs_err <= target);
        n += 1;
    }
    assert!(n >= 300);
}

#[test]
fn spec_examples() {
    assert_eq!(recip_gamma(1.0).value, 1.0);
    assert_eq!(recip_gamma(0.0).value, 0.0);
    assert!((recip_gamma(0.5).value - 0.564_189_583_5).abs() < 1e-10);

    let e = mittag_leffler(&MLParams::one(1.0).unwrap(), 1.0).unwrap();
    assert!((e.value - std::f64::consts::E).abs() < 1e-12);
    // E_{1/2}(-1) = e·erfc(1)
    let e = mittag_leffler(&MLParams::one(0.5).unwrap(), -1.0).unwrap();
    assert!((e.value - 0.427_583_576_155_807_0).abs() <= e.abs_err.max(1e-15));
    let e = mittag_leffler(&MLParams::two(0.5, 0.5).unwrap(), 0.0).unwrap();
    assert!((e.value - 0.564_189_583_547_756_3).abs() < 1e-15);

    let d = mittag_leffler_deriv(1.0, 1.0, 1, 0.0).unwrap();
    assert!((d.value - 1.0).abs() < 1e-14);

    let m = mainardi(0.5, 0.0).unwrap();
    assert!((m.value - 0.564_189_583_547_756_3).abs() < 1e-14);
    let m = mainardi(0.5, 1.0).unwrap();
    assert!((m.value - 0.439_391_289_467_722_4).abs() < 1e-10);
    let m = mainardi(0.5, 2.0).unwrap();
    assert!((m.value - 0.207_553_748_710_297_8).abs() < 1e-10);
}

#[test]
fn mainardi_matches_high_precision_series() {
    for l in include_str!("data/mainardi_reference.csv").lines().skip(1) {
        let f: Vec<f64> = l.split(',').map(|x| x.trim().parse().unwrap()).collect();
        let m = mainardi(f[0], f[1]).unwrap();
        let err = (m.value - f[2]).abs();
        assert!(err <= m.abs_err.max(1e-15), "{l}: got {:e} err {err:e} > {:e}", m.value, m.abs_err);
        assert!(err <= 1e-9 * f[2].abs() + 1e-14, "{l}");
    }
}

#[test]
fn mainardi_integrates_to_one() {
    use fraxion::quad::{integrate, QuadConfig};
    for alpha in [0.25, 0.5, 0.75] {
        let cut = 40.0;
        let cfg = QuadConfig::new(1e-10, 1e-10);
        let r = integrate(|z| mainardi(alpha, z).unwrap().value, 0.0, cut, &cfg).unwrap();
        // M_α is decreasing on (0,∞); the tail is bounded by cut·M_α(cut)
        let tail_bound = cut * mainardi(alpha, cut).unwrap().value;
        assert!(tail_bound < 1e-8, "alpha={alpha} tail {tail_bound:e}");
        assert!((r.value - 1.0).abs() <= 1e-6 + tail_bound, "alpha={alpha} got {}", r.value);
    }
}

#[test]
fn kernel_positivity_on_negative_axis() {
    for alpha in [0.1, 0.3, 0.5, 0.7, 0.9, 0.99] {
        let p = MLParams::two(alpha, alpha).unwrap();
        let mut x = 0.0;
        while x <= 50.0 {
            let e = mittag_leffler(&p, -x).unwrap();
            assert!(e.value > 0.0 && e.value > e.abs_err, "alpha={alpha} x={x}: {e:?}");
            x += 0.25;
        }
    }
}

fn fd4(f: &dyn Fn(f64) -> f64, z: f64, h: f64, order: u32) -> f64 {
    match order {
        1 => (-f(z + 2.0 * h) + 8.0 * f(z + h) - 8.0 * f(z - h) + f(z - 2.0 * h)) / (12.0 * h),
        2 => {
            (-f(z + 2.0 * h) + 16.0 * f(z + h) - 30.0 * f(z) + 16.0 * f(z - h) - f(z - 2.0 * h))
                / (12.0 * h * h)
        }
        _ => unreachable!(),
    }
}

#[test]
fn derivative_matches_finite_differences() {
    for (alpha, beta) in [(0.5, 0.5), (0.3, 1.0), (0.8, 1.6), (1.0, 1.0)] {
        let p = MLParams::two(alpha, beta).unwrap();
        let f = |z: f64| mittag_leffler(&p, z).unwrap().value;
        // for small α the growth e^{z^{1/α}} makes a step-1e-2 stencil useless at z = 2
        let zmax = if alpha < 0.5 { 1.0 } else { 2.0 };
        for z in [-2.0, -1.0, -0.3, 0.0, 0.7, zmax] {
            for k in [1u32, 2] {
                let d = mittag_leffler_deriv(alpha, beta, k, z).unwrap().value;
                let h = if k == 1 { 1e-3 } else { 1e-2 };
                let fd = fd4(&f, z, h, k);
                // absolute near the origin, relative where E grows like e^{z^{1/α}}
                assert!((d - fd).abs() < 1e-6 * d.abs().max(1.0), "a={alpha} b={beta} z={z} k={k}: {d} vs {fd}");
            }
        }
    }
}

#[test]
fn derivative_matches_differentiated_series() {
    // d^k/dz^k Σ z^j/Γ(αj+β) = Σ_{j≥k} j!/(j−k)! z^{j−k}/Γ(αj+β), summed directly for small |z|
    for (alpha, beta, k, z) in [(0.5, 0.5, 2u32, -0.3f64), (0.7, 1.2, 1, 0.4), (0.9, 0.9, 3, -0.5)] {
        let mut s = 0.0;
        for j in k..200 {
            let falling: f64 = ((j - k + 1)..=j).map(|m| m as f64).product();
            s += falling * z.powi((j - k) as i32) * fraxion::specfun::recip_gamma_value(alpha * j as f64 + beta);
        }
        let d = mittag_leffler_deriv(alpha, beta, k, z).unwrap();
        assert!((d.value - s).abs() <= d.abs_err + 1e-13, "{alpha} {beta} {k} {z}");
    }
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn recurrence(alpha in 0.1f64..1.0, beta in 0.1f64..3.0, z in -5.0f64..5.0) {
            // E_{α,β}(z) = z E_{α,α+β}(z) + 1/Γ(β)
            let lhs = mittag_leffler(&MLParams::two(alpha, beta).unwrap(), z);
            let rhs = mittag_leffler(&MLParams::two(alpha, alpha + beta).unwrap(), z);
            if let (Ok(l), Ok(r)) = (lhs, rhs) {
                let rg = recip_gamma(beta);
                let resid = (l.value - z * r.value - rg.value).abs();
                prop_assert!(resid <= 10.0 * (l.abs_err + z.abs() * r.abs_err + rg.abs_err) + 1e-15,
                    "resid {resid:e}");
            }
        }

        #[test]
        fn gamma_one_reduction(alpha in 0.1f64..1.0, beta in 0.1f64..3.0, z in -5.0f64..5.0) {
            // small α overflows for z > 0; both paths must then fail alike
            let three = mittag_leffler(&MLParams::new(alpha, beta, 1.0).unwrap(), z);
            let two = mittag_leffler(&MLParams::two(alpha, beta).unwrap(), z);
            prop_assert_eq!(three.is_ok(), two.is_ok());
            let (Ok(three), Ok(two)) = (three, two) else { return Ok(()); };
            prop_assert!((three.value - two.value).abs() <= three.abs_err + two.abs_err);
            if (beta - 1.0).abs() < 1e-12 {
                let one = mittag_leffler(&MLParams::one(alpha).unwrap(), z).unwrap();
                prop_assert!((one.value - two.value).abs() <= one.abs_err + two.abs_err);
            }
        }
    }
}
