//! Monte Carlo checks of the samplers. Tolerances are MC error budgets: each
//! comment says what the statistical scale is.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use spiked::sampler::*;
use spiked::Error;
use spiked_core::equilibrium::{solve_equilibrium, EquilibriumData};
use spiked_core::finite::{build_basis, gap_prob, Region};
use spiked_core::laws::{normal_cdf, tw_jth};
use spiked_core::phase::x0_of_a;
use spiked_core::potential::Potential;
use spiked_core::quadrature::gauss_legendre;

/// CDF of the equilibrium measure, tabulated by Gauss–Legendre on a fine
/// grid of its support.
fn equilibrium_cdf(eq: &EquilibriumData) -> impl Fn(f64) -> f64 {
    let (a, b) = (eq.left_endpoint, eq.right_endpoint);
    let m = 4000;
    let xs: Vec<f64> = (0..=m).map(|i| a + (b - a) * i as f64 / m as f64).collect();
    let mut cum = vec![0.0];
    for w in xs.windows(2) {
        let r = gauss_legendre(8, w[0], w[1]).unwrap();
        let last = *cum.last().unwrap();
        cum.push(last + r.integrate(|x| eq.density(x)));
    }
    move |x: f64| {
        if x <= a {
            return 0.0;
        }
        if x >= b {
            return 1.0;
        }
        let k = (((x - a) / (b - a)) * m as f64).floor() as usize;
        let k = k.min(m - 1);
        let w = (x - xs[k]) / (xs[k + 1] - xs[k]);
        cum[k] * (1.0 - w) + cum[k + 1] * w
    }
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

#[test]
fn single_trial_shape() {
    let b = sample_gaussian_spiked(7, &[1.5], 1, 3).unwrap();
    assert_eq!(b.trials(), 1);
    assert_eq!(b.trial(0).len(), 7);
    assert!(b.trial(0).windows(2).all(|w| w[0] >= w[1]));
    assert_eq!(b.method, Method::Exact);
    assert_eq!(b.spikes, vec![1.5]);
}

#[test]
fn argument_checks() {
    assert!(sample_gaussian_spiked(0, &[], 1, 0).is_err());
    assert!(sample_gaussian_spiked(MAX_N + 1, &[], 1, 0).is_err());
    assert!(sample_gaussian_spiked(3, &[1.0, 2.0, 3.0, 4.0], 1, 0).is_err());
    assert!(sample_gaussian_spiked(3, &[], 0, 0).is_err());
}

#[test]
fn seed_determinism() {
    let a = sample_gaussian_spiked(40, &[2.0, 0.5], 50, 11).unwrap();
    let b = sample_gaussian_spiked(40, &[2.0, 0.5], 50, 11).unwrap();
    assert_eq!(a, b);
    let bits = |x: &SampleBatch| x.eigenvalues.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
    let c = sample_gaussian_spiked(40, &[2.0, 0.5], 50, 12).unwrap();
    assert_ne!(a.eigenvalues, c.eigenvalues);
    // a prefix of the trials does not depend on how many are drawn
    let d = sample_gaussian_spiked(40, &[2.0, 0.5], 20, 11).unwrap();
    assert_eq!(&a.eigenvalues[..20 * 40], &d.eigenvalues[..]);
}

#[test]
fn two_stage_solver_agrees() {
    // same matrices on either side of the two-stage threshold
    let n = TWO_STAGE_MIN;
    let b = sample_gaussian_spiked(n, &[2.0], 2, 5).unwrap();
    let c = sample_gaussian_spiked(n - 1, &[2.0], 2, 5).unwrap();
    assert_eq!(b.trials(), 2);
    assert!((b.trial(0)[0] - 2.5).abs() < 0.5 && (c.trial(0)[0] - 2.5).abs() < 0.5);
    // trace of A + G against the sum of eigenvalues: tr(G) ~ N(0, 1)
    let sum: f64 = b.trial(1).iter().sum();
    assert!((sum - 2.0).abs() < 6.0, "{sum}");
}

#[test]
fn semicircle() {
    // 2e6 pooled eigenvalues; the finite-n correction is O(1/n)
    let b = sample_gaussian_spiked(200, &[], 10_000, 1).unwrap();
    let eq = solve_equilibrium(&Potential::gaussian()).unwrap();
    let d = ks_distance(b.pooled(), equilibrium_cdf(&eq)).unwrap();
    assert!(d < 0.03, "{d}");
}

#[test]
fn outlier_mean() {
    let n = 200;
    let b = sample_gaussian_spiked(n, &[2.0], 2000, 2).unwrap();
    let eq = solve_equilibrium(&Potential::gaussian()).unwrap();
    let x0 = x0_of_a(&eq, 2.0).unwrap().x0;
    let (m, se) = mean_se(&b.kth_largest(1));
    assert!((m - x0).abs() < 4.0 * (se + 0.5 / n as f64), "mean {m}, se {se}");
}

#[test]
fn gap_probability_against_exact_formula() {
    // n = d = 2, one spike 0.5: P(ξ_max < x) = E[(1 − χ)(1 − χ)]
    let trials = 200_000;
    let b = sample_gaussian_spiked(2, &[0.5], trials, 9).unwrap();
    let basis = build_basis(&Potential::gaussian(), 2.0, 2).unwrap();
    for x in [0.5, 1.5] {
        let p = gap_prob(&basis, 2, &[0.5], &Region::above(x), 1).unwrap();
        let emp = b.kth_largest(1).iter().filter(|&&l| l < x).count() as f64 / trials as f64;
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((emp - p).abs() < 3.0 * se, "x = {x}: {emp} vs {p} (se {se})");
    }
}

#[test]
fn unitary_invariance() {
    // the spike on the last diagonal entry instead of the first
    let n = 60;
    let mut last = vec![0.0; n];
    last[n - 1] = 1.7;
    let b1 = sample_gaussian_spiked(n, &[1.7], 4000, 21).unwrap();
    let b2 = sample_gaussian_source(n, &last, 4000, 22).unwrap();
    assert_eq!(b2.spikes, vec![1.7]);
    for k in [1, 2, 30] {
        let (m1, s1) = mean_se(&b1.kth_largest(k));
        let (m2, s2) = mean_se(&b2.kth_largest(k));
        assert!((m1 - m2).abs() < 4.0 * (s1 * s1 + s2 * s2).sqrt(), "k = {k}: {m1} vs {m2}");
    }
}

#[test]
fn ks_distance_examples() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    let s: Vec<f64> = (0..100_000).map(|_| StandardNormal.sample(&mut rng)).collect();
    // DKW: P(D > 0.01) ≤ 2e^{−2·1e5·1e−4} = 2e−9
    assert!(ks_distance(&s, normal_cdf).unwrap() < 0.01);
    assert!(ks_distance(&s, |_| 0.5).unwrap() >= 0.5);
    assert_eq!(ks_distance(&[0.0], normal_cdf).unwrap(), 0.5);
    assert!(ks_distance(&[], normal_cdf).is_err());
}

#[test]
fn rescale_modes() {
    let b = sample_gaussian_spiked(50, &[2.0], 10, 1).unwrap();
    let r = rescale(&b, 1, Centering::Outlier { x_star: 2.5, g2: -4.0 / 3.0 }).unwrap();
    let s = (4.0 / 3.0 * 50.0f64).sqrt();
    for (t, v) in r.values.iter().enumerate() {
        assert!((v - (b.trial(t)[0] - 2.5) * s).abs() < 1e-12);
    }
    let e = rescale(&b, 2, Centering::Edge { e: 2.0, beta: 1.0 }).unwrap();
    assert!((e.values[0] - (b.trial(0)[1] - 2.0) * 50f64.powf(2.0 / 3.0)).abs() < 1e-12);
    assert!(matches!(rescale(&b, 1, Centering::Outlier { x_star: 2.5, g2: 0.0 }), Err(Error::BadScale(_))));
    assert!(matches!(rescale(&b, 1, Centering::Outlier { x_star: 2.5, g2: 0.3 }), Err(Error::BadScale(_))));
    assert!(rescale(&b, 0, Centering::Edge { e: 2.0, beta: 1.0 }).is_err());
    assert!(rescale(&b, 51, Centering::Edge { e: 2.0, beta: 1.0 }).is_err());
}

#[test]
fn subcritical_edge_is_tracy_widom() {
    // KS at 5000 draws is ~0.02; the rest of the budget is the slow n^{-1/3}
    // approach to the edge law
    let b = sample_gaussian_spiked(400, &[0.5], 5000, 21).unwrap();
    let r = rescale(&b, 1, Centering::Edge { e: 2.0, beta: 1.0 }).unwrap();
    let grid: Vec<f64> = (0..=240).map(|i| -8.0 + 0.05 * i as f64).collect();
    let tw: Vec<f64> = grid.iter().map(|&t| tw_jth(t, 1).unwrap()).collect();
    let cdf = |x: f64| {
        let k = grid.partition_point(|&g| g <= x).clamp(1, grid.len() - 1);
        let w = ((x - grid[k - 1]) / 0.05).clamp(0.0, 1.0);
        tw[k - 1] * (1.0 - w) + tw[k] * w
    };
    let ks = ks_distance(&r.values, cdf).unwrap();
    assert!(ks < 0.12, "KS {ks}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn outlier_rescaling_is_shift_invariant(c in -5.0f64..5.0, k in 1usize..=6, x in 1.0f64..3.0, g2 in -3.0f64..-0.1) {
        let b = sample_gaussian_spiked(6, &[2.0], 4, 8).unwrap();
        let mut shifted = b.clone();
        for v in shifted.eigenvalues.iter_mut() {
            *v += c;
        }
        let r1 = rescale(&b, k, Centering::Outlier { x_star: x, g2 }).unwrap();
        let r2 = rescale(&shifted, k, Centering::Outlier { x_star: x + c, g2 }).unwrap();
        for (a, b) in r1.values.iter().zip(&r2.values) {
            prop_assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()) * 10.0);
        }
    }
}

#[test]
fn binary_round_trip() {
    let b = sample_gaussian_spiked(5, &[1.2, -0.4], 3, 77).unwrap();
    let mut buf = Vec::new();
    write_batch_to(&b, &mut buf).unwrap();
    let back = read_batch_from(&buf[..]).unwrap();
    assert_eq!(back, b);
    // header: magic, version, method, n, m, spikes, seed, thinning, trials
    assert_eq!(&buf[..8], b"SPKSMPL\0");
    assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), FORMAT_VERSION);
    assert_eq!(buf.len(), 8 + 4 + 4 + 8 + 8 + 16 + 8 + 8 + 8 + 3 * 5 * 8);
    let mut bad = buf.clone();
    bad[0] = b'X';
    assert!(matches!(read_batch_from(&bad[..]), Err(Error::Format(_))));
    let mut long = buf.clone();
    long.push(0);
    assert!(read_batch_from(&long[..]).is_err());
    assert!(read_batch_from(&buf[..buf.len() - 1]).is_err());

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.bin");
    write_batch(&b, &p).unwrap();
    assert_eq!(read_batch(&p).unwrap(), b);

    let mut csv = Vec::new();
    write_csv(&b, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "lambda_1,lambda_2,lambda_3,lambda_4,lambda_5");
    assert_eq!(lines.len(), 4);
    let first: Vec<f64> = lines[1].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first, b.trial(0));
}

/// Mean and standard error from batch means, per chain.
fn batch_mean_se(b: &SampleBatch, k: usize) -> (f64, f64) {
    let per_chain = b.trials() / CHAINS;
    let v = b.kth_largest(k);
    let mut means = Vec::new();
    for c in 0..CHAINS {
        let chain = &v[c * per_chain..(c + 1) * per_chain];
        for batch in chain.chunks(per_chain / 10) {
            means.push(batch.iter().sum::<f64>() / batch.len() as f64);
        }
    }
    let (m, se) = mean_se(&means);
    (m, se)
}

#[test]
fn mcmc_matches_exact_gaussian() {
    let n = 30;
    let mc = sample_general_mcmc(&Potential::gaussian(), n, &[1.8], 2000, 4000, 5).unwrap();
    assert_eq!(mc.method, Method::Mcmc);
    assert_eq!(mc.trials(), 2000);
    let diag = mc.diagnostics.clone().unwrap();
    assert!(diag.rhat <= RHAT_MAX);
    assert!(diag.acceptance.iter().all(|&a| a > 0.2 && a < 0.45), "{:?}", diag.acceptance);
    assert!(mc.trial(0).windows(2).all(|w| w[0] >= w[1]));
    let ex = sample_gaussian_spiked(n, &[1.8], 20_000, 6).unwrap();
    let (m1, s1) = batch_mean_se(&mc, 1);
    let (m2, s2) = mean_se(&ex.kth_largest(1));
    assert!((m1 - m2).abs() < 3.0 * (s1 * s1 + s2 * s2).sqrt(), "mcmc {m1} ± {s1}, exact {m2} ± {s2}");
}

#[test]
fn mcmc_quartic_bulk() {
    let v = Potential::polynomial(&[0.0, 0.0, 0.0, 0.0, 0.25]).unwrap();
    let mc = sample_general_mcmc(&v, 30, &[], 2000, 3000, 3).unwrap();
    let eq = solve_equilibrium(&v).unwrap();
    let d = ks_distance(mc.pooled(), equilibrium_cdf(&eq)).unwrap();
    assert!(d < 0.08, "{d}");
}

#[test]
fn mcmc_guards() {
    let g = Potential::gaussian();
    assert!(matches!(sample_general_mcmc(&g, 10, &[], 100, 0, 1), Err(Error::NonConvergence(_))));
    assert!(sample_general_mcmc(&g, 61, &[], 100, 100, 1).is_err());
    assert!(sample_general_mcmc(&g, 10, &[1.0, 1.0], 100, 100, 1).is_err());
    assert!(sample_general_mcmc(&g, 10, &[], 1000, 10, 1).is_err());
    // two short runs with the same seed agree bit for bit
    let a = sample_general_mcmc(&g, 8, &[1.5], 40, 400, 2).unwrap();
    let b = sample_general_mcmc(&g, 8, &[1.5], 40, 400, 2).unwrap();
    assert_eq!(a, b);
}
