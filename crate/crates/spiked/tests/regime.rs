use spiked::regime::*;
use spiked::sampler::Centering;
use spiked_core::equilibrium::solve_equilibrium;
use spiked_core::phase::phase_portrait;
use spiked_core::potential::Potential;

fn gaussian() -> (spiked_core::equilibrium::EquilibriumData, spiked_core::phase::PhasePortrait) {
    let eq = solve_equilibrium(&Potential::gaussian()).unwrap();
    let p = phase_portrait(&eq, 4.0, 50).unwrap();
    (eq, p)
}

#[test]
fn clustered_spikes() {
    let (eq, p) = gaussian();
    let r = resolve(&eq, &p, 400, &SpikeSpec::SupercriticalClustered { a: 2.0, alphas: vec![0.5, -0.5] }).unwrap();
    // √(−G″(2.5)) = √(4/3)
    let s = (4.0f64 / 3.0).sqrt() / 20.0;
    assert!((r.spikes[0] - (2.0 + 0.5 * s)).abs() < 1e-8);
    assert!((r.spikes[1] - (2.0 - 0.5 * s)).abs() < 1e-8);
    assert_eq!(r.predictions.len(), 3);
    assert_eq!(r.predictions[1].law, PredictedLaw::Gue { j: 2, alphas: vec![0.5, -0.5] });
    match r.predictions[0].centering {
        Centering::Outlier { x_star, g2 } => {
            assert!((x_star - 2.5).abs() < 1e-8 && (g2 + 4.0 / 3.0).abs() < 1e-6);
        }
        _ => panic!(),
    }
    assert_eq!(r.predictions[2].law, PredictedLaw::TracyWidom { j: 1 });
}

#[test]
fn explicit_spikes_are_classified() {
    let (eq, p) = gaussian();
    let r = resolve(&eq, &p, 100, &SpikeSpec::Explicit(vec![0.5, 3.0, 2.0])).unwrap();
    let ks: Vec<usize> = r.predictions.iter().map(|p| p.k).collect();
    assert_eq!(ks, vec![1, 2, 3]);
    // the larger spike gives the top outlier, at a + 1/a
    match r.predictions[0].centering {
        Centering::Outlier { x_star, .. } => assert!((x_star - 10.0 / 3.0).abs() < 1e-8),
        _ => panic!(),
    }
    assert!(matches!(r.predictions[2].centering, Centering::Edge { .. }));
}

#[test]
fn validation() {
    let (eq, p) = gaussian();
    assert!(resolve(&eq, &p, 100, &SpikeSpec::Subcritical(vec![0.5, 1.2])).is_err());
    assert!(resolve(&eq, &p, 100, &SpikeSpec::SupercriticalSeparated(vec![0.5])).is_err());
    assert!(resolve(&eq, &p, 100, &SpikeSpec::Explicit(vec![0.5, 0.5])).is_err());
    assert!(resolve(&eq, &p, 100, &SpikeSpec::SupercriticalClustered { a: 0.8, alphas: vec![0.1] }).is_err());
    assert!(resolve(&eq, &p, 100, &SpikeSpec::CriticalJump { alphas: vec![0.0], m: 1 }).is_err());
    assert!(resolve(&eq, &p, 100, &SpikeSpec::SecondaryCritical { a: None, alphas: vec![0.0], m: 1 }).is_err());
    assert!(resolve(&eq, &p, 1, &SpikeSpec::Subcritical(vec![0.1, 0.2])).is_err());
}

#[test]
fn critical_continuous_flips_alpha() {
    let (eq, p) = gaussian();
    let r = resolve(&eq, &p, 1000, &SpikeSpec::CriticalContinuous { alphas: vec![0.4, -0.3] }).unwrap();
    assert!((r.spikes[0] - 1.04).abs() < 1e-8 && (r.spikes[1] - 0.97).abs() < 1e-8);
    assert_eq!(r.predictions[0].law, PredictedLaw::Deformed { j: 1, alphas: vec![-0.4, 0.3] });
    assert!(r.notes[0].contains("-alpha"));
}

#[test]
fn jump_regimes() {
    let v = Potential::polynomial(&[0.0, 0.0, 0.5, -0.092, 0.005]).unwrap();
    let eq = solve_equilibrium(&v).unwrap();
    let p = phase_portrait(&eq, 1.5, 100).unwrap();
    assert!(!p.is_continuous_transition);
    let r = resolve(&eq, &p, 5000, &SpikeSpec::CriticalJump { alphas: vec![0.5, -0.5], m: 1 }).unwrap();
    let t = r.transition.as_ref().unwrap();
    assert!(t.p > 0.0 && t.p < 1.0);
    // the spikes sit log(K n)/n below a_c, 1/n apart
    assert!((r.spikes[0] - r.spikes[1] - 1.0 / 5000.0).abs() < 1e-12);
    assert!(r.spikes.iter().all(|&a| (a - p.a_c).abs() < 0.01));
    // k = 1 at x0 and at the edge
    assert_eq!(r.predictions.len(), 2);
    let v = Potential::polynomial(&[0.0, 0.0, 0.5, -0.088, 0.005]).unwrap();
    let eq = solve_equilibrium(&v).unwrap();
    let p = phase_portrait(&eq, 1.5, 100).unwrap();
    assert!(p.is_continuous_transition && !p.secondary_criticals.is_empty());
    let r = resolve(&eq, &p, 5000, &SpikeSpec::SecondaryCritical { a: None, alphas: vec![0.5, -0.5], m: 1 }).unwrap();
    // k = 1 at x2 and at x1, k = 2 at x1
    let ks: Vec<usize> = r.predictions.iter().map(|p| p.k).collect();
    assert_eq!(ks, vec![1, 1, 2]);
    for pred in &r.predictions {
        let lo = pred.law.cdf(-10.0).unwrap();
        let hi = pred.law.cdf(10.0).unwrap();
        assert!(lo <= hi + 1e-12 && hi <= 1.0 + 1e-12);
    }
}

#[test]
fn tabulated_interpolates() {
    let t = PredictedLaw::Normal.tabulate(&[-1.0, 0.0, 1.0]).unwrap();
    assert_eq!(t.cdf(0.0), 0.5);
    assert_eq!(t.cdf(-5.0), t.values[0]);
    assert_eq!(t.cdf(5.0), t.values[2]);
    assert!((t.cdf(0.5) - 0.5 * (0.5 + t.values[2])).abs() < 1e-15);
    assert!(PredictedLaw::Normal.tabulate(&[1.0, 0.0]).is_err());
}
