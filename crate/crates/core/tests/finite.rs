mod common;

use common::quartic;
use proptest::prelude::*;
use spiked_core::equilibrium::solve_equilibrium;
use spiked_core::finite::*;
use spiked_core::linalg::vandermonde;
use spiked_core::potential::Potential;
use spiked_core::quadrature::{composite, gauss_legendre, pairwise_sum};
use spiked_core::{Complex64, Error};

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn gauss(n: f64, d: usize) -> OrthoBasis {
    build_basis(&Potential::gaussian(), n, d).unwrap()
}

/// E[∏(1 − s χ_E(λ_j))] by tensor Gauss–Legendre over the unordered
/// eigenvalue density Δ(λ) det[e^{n a_k λ_j}; λ_j^r] ∏ e^{−nV(λ_j)}, with the
/// normalization from the same rule. Each 1-D panel carries 60 nodes and the
/// panels break at the endpoints of E.
fn tensor_oracle(v: &Potential, n: f64, d: usize, spikes: &[f64], region: &Region, s: f64) -> f64 {
    let m = spikes.len();
    // truncate where every relevant weight drops below 1e-18 of its peak
    let cut = 18.0 * std::f64::consts::LN_10;
    let grid: Vec<f64> = (0..=60000).map(|i| -30.0 + 1e-3 * i as f64).collect();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for a in std::iter::once(0.0).chain(spikes.iter().cloned()) {
        let g: Vec<f64> = grid.iter().map(|&x| n * (v.v(x) - a * x)).collect();
        let gmin = g.iter().cloned().fold(f64::INFINITY, f64::min);
        for (x, y) in grid.iter().zip(&g) {
            if y - gmin <= cut {
                lo = lo.min(*x);
                hi = hi.max(*x);
            }
        }
    }
    let mut breaks = vec![lo, hi];
    breaks.extend(region.breakpoints().into_iter().filter(|&x| x > lo && x < hi));
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let vref = grid.iter().map(|&x| v.v(x)).fold(f64::INFINITY, f64::min);
    let (mut xs, mut ws, mut fs) = (vec![], vec![], vec![]);
    for p in breaks.windows(2) {
        let inside = region.contains(0.5 * (p[0] + p[1]));
        let rule = gauss_legendre(60, p[0], p[1]).unwrap();
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            xs.push(*x);
            ws.push(w * (-n * (v.v(*x) - vref)).exp());
            fs.push(if inside { 1.0 - s } else { 1.0 });
        }
    }
    let q = xs.len();
    let density = |idx: &[usize]| -> f64 {
        let lam: Vec<f64> = idx.iter().map(|&i| xs[i]).collect();
        let mut mat = nalgebra::DMatrix::zeros(d, d);
        let mut shift = 0.0;
        for (k, &a) in spikes.iter().enumerate() {
            let top = lam.iter().map(|&l| n * a * l).fold(f64::NEG_INFINITY, f64::max);
            shift += top;
            for j in 0..d {
                mat[(k, j)] = (n * a * lam[j] - top).exp();
            }
        }
        for r in 0..d - m {
            for j in 0..d {
                mat[(m + r, j)] = lam[j].powi(r as i32);
            }
        }
        let w: f64 = idx.iter().map(|&i| ws[i]).product();
        vandermonde(&lam) * mat.lu().determinant() * shift.exp() * w
    };
    let mut num_slices = Vec::with_capacity(q);
    let mut den_slices = Vec::with_capacity(q);
    let mut idx = vec![0usize; d];
    for i0 in 0..q {
        let (mut num, mut den) = (0.0, 0.0);
        let inner = q.pow(d as u32 - 1);
        for flat in 0..inner {
            idx[0] = i0;
            let mut r = flat;
            for slot in idx.iter_mut().skip(1) {
                *slot = r % q;
                r /= q;
            }
            let p = density(&idx);
            let f: f64 = idx.iter().map(|&i| fs[i]).product();
            num += p * f;
            den += p;
        }
        num_slices.push(num);
        den_slices.push(den);
    }
    pairwise_sum(&num_slices) / pairwise_sum(&den_slices)
}

#[test]
fn gaussian_recurrence_closed_form_against_stieltjes() {
    let closed = gauss(4.0, 20);
    let poly = Potential::polynomial(&[0.0, 0.0, 0.5]).unwrap();
    let stieltjes = build_basis_stieltjes(&poly, 4.0, 20).unwrap();
    assert!(closed.closed_form && !stieltjes.closed_form);
    assert_eq!(closed.beta[0], 0.5);
    for l in 0..=20 {
        assert!((stieltjes.beta[l] * stieltjes.beta[l] - (l + 1) as f64 / 4.0).abs() < 1e-10 * (l + 1) as f64, "b_{l}");
        assert!(stieltjes.alpha[l].abs() < 1e-10, "a_{l}");
    }
    assert!((closed.log_mu0 - stieltjes.log_mu0).abs() < 1e-12);
    for l in 0..=20 {
        assert!((closed.leading[l] / stieltjes.leading[l] - 1.0).abs() < 1e-9);
    }
}

#[test]
fn orthonormality() {
    let b = gauss(4.0, 10);
    assert!(b.gram_deviation < 1e-9, "{}", b.gram_deviation);
    // again on a plain grid unrelated to the basis window
    let rule = composite(&[-15.0, 15.0], 300, 16).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..=10 {
        for j in 0..=i {
            let g = rule.integrate(|x| b.psi(i, x) * b.psi(j, x));
            worst = worst.max((g - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    assert!(worst < 1e-9, "{worst}");
}

#[test]
fn quartic_recurrence_is_even() {
    let b = build_basis(&quartic(), 4.0, 8).unwrap();
    assert!(!b.closed_form);
    assert!(b.gram_deviation < 1e-9);
    for (l, a) in b.alpha.iter().enumerate() {
        assert!(a.abs() < 1e-12, "a_{l} = {a}");
    }
    assert!(b.beta.iter().all(|&x| x > 0.0));
}

#[test]
fn basis_rejects_sizes() {
    assert!(matches!(build_basis(&Potential::gaussian(), 4.0, 41), Err(Error::InvalidArgument(_))));
    assert!(matches!(build_basis(&Potential::gaussian(), 60.0, 4), Err(Error::InvalidArgument(_))));
    assert!(matches!(build_basis(&Potential::gaussian(), 0.0, 4), Err(Error::InvalidArgument(_))));
}

#[test]
fn gamma_gaussian() {
    let b = gauss(4.0, 12);
    let g0 = gamma_j(&b, 0, 0.5).unwrap();
    let exact = (std::f64::consts::PI / 2.0).powf(0.25) * 0.5f64.exp();
    assert!((g0 - exact).abs() < 1e-12 * exact);
    assert!((g0 - 1.845_768_415_8).abs() < 1e-9);
    // from the Hermite generating function e^{ty − t²/2} = Σ He_k(y) t^k/k!:
    // Γ_j(a) = (2π/n)^{1/4} e^{na²/2} (√n a)^j / √(j!)
    for &(n, a) in &[(4.0, 0.5), (3.0, -0.8), (2.0, 1.3)] {
        let b = gauss(n, 12);
        let mut fact = 1.0;
        for j in 0..=12 {
            if j > 0 {
                fact *= j as f64;
            }
            let exact = (2.0 * std::f64::consts::PI / n).powf(0.25) * (n * a * a / 2.0).exp()
                * (n.sqrt() * a).powi(j as i32)
                / fact.sqrt();
            let got = gamma_j(&b, j, a).unwrap();
            assert!((got - exact).abs() < 1e-11 * exact.abs().max(1.0), "n={n} a={a} j={j}: {got} vs {exact}");
        }
    }
}

/// Γ_j(a) = √μ0 [e^{naJ}]_{j0} with J the Jacobi matrix, summed as the power
/// series Σ_k (na)^k (J^k)_{j0}/k!. For an even weight J has a zero diagonal
/// and positive off-diagonal, so every term has the sign of a^j.
#[test]
fn gamma_quartic_against_jacobi_series() {
    let big = build_basis(&quartic(), 3.0, 40).unwrap();
    let small = build_basis(&quartic(), 3.0, 10).unwrap();
    for &a in &[0.3, -0.7, 1.1] {
        let mut col = vec![0.0; 41];
        col[0] = 1.0;
        let mut sums = vec![0.0; 41];
        let mut coef = 1.0;
        for k in 0..90 {
            for j in 0..41 {
                sums[j] += coef * col[j];
            }
            let mut next = vec![0.0; 41];
            for j in 0..41 {
                next[j] = big.alpha[j] * col[j];
                if j > 0 {
                    next[j] += big.beta[j - 1] * col[j - 1];
                }
                if j < 40 {
                    next[j] += big.beta[j] * col[j + 1];
                }
            }
            col = next;
            coef *= 3.0 * a / (k + 1) as f64;
        }
        for j in 0..=10 {
            let want = (0.5 * big.log_mu0).exp() * sums[j];
            let got = gamma_j(&small, j, a).unwrap();
            assert!((got - want).abs() < 1e-10 * want.abs(), "a={a} j={j}: {got} vs {want}");
        }
    }
}

#[test]
fn gamma_odd_vanishes_at_zero() {
    let b = gauss(4.0, 12);
    for j in (1..=11).step_by(2) {
        assert!(gamma_j(&b, j, 0.0).unwrap().abs() < 1e-12);
    }
    let q = build_basis(&quartic(), 4.0, 9).unwrap();
    for j in (1..=9).step_by(2) {
        assert!(gamma_j(&q, j, 0.0).unwrap().abs() < 1e-12);
    }
}

#[test]
fn gamma_interval_doubling() {
    for basis in [gauss(4.0, 10), build_basis(&quartic(), 3.0, 10).unwrap()] {
        for &a in &[0.3, 0.9, -0.6] {
            let (lo, hi, xs, _) = basis.tilt_window(a);
            for j in [0, 3, 7, 10] {
                let g1 = gamma_j_on(&basis, j, a, lo, hi).unwrap();
                let g2 = gamma_j_on(&basis, j, a, xs - 2.0 * (xs - lo), xs + 2.0 * (hi - xs)).unwrap();
                assert!((g1 - g2).abs() < 1e-10 * g1.abs(), "a={a} j={j}: {g1} vs {g2}");
            }
        }
    }
}

#[test]
fn null_on_whole_line() {
    let b = gauss(4.0, 6);
    for d in 1..=6 {
        let r = Region::whole();
        assert!(expectation_null(&b, d, &r, c(1.0)).unwrap().norm() < 1e-12);
        let half = expectation_null(&b, d, &r, c(0.5)).unwrap();
        assert!((half - c(0.5f64.powi(d as i32))).norm() < 1e-12);
        assert_eq!(expectation_null(&b, d, &r, c(0.0)).unwrap(), c(1.0));
    }
}

#[test]
fn null_against_tensor_oracle() {
    let b = gauss(3.0, 3);
    let r = Region::above(1.5);
    let got = expectation_null(&b, 3, &r, c(1.0)).unwrap();
    let want = tensor_oracle(&Potential::gaussian(), 3.0, 3, &[], &r, 1.0);
    assert!(got.im.abs() < 1e-15);
    assert!((got.re - want).abs() < 1e-7, "{} vs {want}", got.re);
}

#[test]
fn null_far_tail() {
    let b = gauss(3.0, 3);
    let v = expectation_null(&b, 3, &Region::above(2.0 + 5.0), c(1.0)).unwrap();
    assert!(v.re > 1.0 - 1e-8);
}

#[test]
fn rank_one_basics() {
    let b = gauss(3.0, 4);
    let r = Region::above(1.5);
    assert!((expectation_rank_one(&b, 3, 0.7, &r, c(0.0)).unwrap() - c(1.0)).norm() < 1e-15);
    // continuity as the spike switches off
    for d in [2, 3] {
        let one = expectation_rank_one(&b, d, 1e-6, &r, c(1.0)).unwrap();
        let null = expectation_null(&b, d, &r, c(1.0)).unwrap();
        assert!((one - null).norm() < 1e-4, "d={d}: {one} vs {null}");
    }
    assert!(matches!(expectation_rank_one(&b, 3, 0.0, &r, c(1.0)), Err(Error::InvalidArgument(_))));
}

#[test]
fn rank_one_matches_direct() {
    let b = gauss(3.0, 3);
    let r = Region::above(1.5);
    let one = expectation_rank_one(&b, 3, 0.7, &r, c(1.0)).unwrap();
    let direct = expectation_rank_m_direct(&b, 3, &[0.7], &r, c(1.0)).unwrap();
    assert!((one - direct).norm() < 1e-9, "{one} vs {direct}");
    let ident = expectation_rank_m_identity(&b, 3, &[0.7], &r, c(1.0)).unwrap();
    assert!((ident - one).norm() < 1e-13);
}

#[test]
fn direct_without_spikes_is_null() {
    let b = gauss(3.0, 3);
    let r = Region::above(0.4);
    let s = Complex64::new(0.8, 0.3);
    assert_eq!(
        expectation_rank_m_direct(&b, 3, &[], &r, s).unwrap(),
        expectation_null(&b, 3, &r, s).unwrap()
    );
}

#[test]
fn direct_against_tensor_oracle() {
    let b = gauss(2.0, 2);
    let r = Region::above(1.0);
    let got = expectation_rank_m_direct(&b, 2, &[0.8], &r, c(1.0)).unwrap();
    let want = tensor_oracle(&Potential::gaussian(), 2.0, 2, &[0.8], &r, 1.0);
    assert!((got.re - want).abs() < 1e-7, "{} vs {want}", got.re);

    let b = gauss(3.0, 3);
    let r = Region::above(1.5);
    let got = expectation_rank_m_direct(&b, 3, &[0.5, 0.9], &r, c(1.0)).unwrap();
    let want = tensor_oracle(&Potential::gaussian(), 3.0, 3, &[0.5, 0.9], &r, 1.0);
    assert!((got.re - want).abs() < 1e-6, "{} vs {want}", got.re);
}

#[test]
fn direct_against_tensor_oracle_on_quartic_and_union() {
    let v = quartic();
    let b = build_basis(&v, 3.0, 3).unwrap();
    let r = Region::new(&[(-0.3, 0.2), (0.9, f64::INFINITY)]).unwrap();
    let got = expectation_rank_m_direct(&b, 3, &[0.4, -0.7], &r, c(0.6)).unwrap();
    let want = tensor_oracle(&v, 3.0, 3, &[0.4, -0.7], &r, 0.6);
    assert!((got.re - want).abs() < 1e-6, "{} vs {want}", got.re);
}

#[test]
fn identity_matches_direct() {
    let b = gauss(3.0, 3);
    let r = Region::above(1.5);
    let i = expectation_rank_m_identity(&b, 3, &[0.5, 0.9], &r, c(1.0)).unwrap();
    let d = expectation_rank_m_direct(&b, 3, &[0.5, 0.9], &r, c(1.0)).unwrap();
    assert!((i - d).norm() < 1e-6, "{i} vs {d}");

    let v = quartic();
    let e = solve_equilibrium(&v).unwrap().right_endpoint;
    let b = build_basis(&v, 3.0, 3).unwrap();
    let r = Region::above(e + 0.2);
    let i = expectation_rank_m_identity(&b, 3, &[0.4, 0.8], &r, c(0.7)).unwrap();
    let d = expectation_rank_m_direct(&b, 3, &[0.4, 0.8], &r, c(0.7)).unwrap();
    assert!((i - d).norm() < 1e-6, "{i} vs {d}");
}

#[test]
fn spike_validation() {
    let b = gauss(3.0, 3);
    let r = Region::above(1.0);
    assert!(matches!(
        expectation_rank_m_direct(&b, 3, &[0.5, 0.5 + 1e-9], &r, c(1.0)),
        Err(Error::ConfluentAlphas(_))
    ));
    assert!(matches!(expectation_rank_m_direct(&b, 2, &[0.5, 0.6, 0.7], &r, c(1.0)), Err(Error::InvalidArgument(_))));
    assert!(matches!(expectation_rank_m_direct(&b, 3, &[0.5, 0.0], &r, c(1.0)), Err(Error::InvalidArgument(_))));
    assert!(matches!(expectation_null(&b, 4, &r, c(1.0)), Err(Error::InvalidArgument(_))));
    // the null expectation vanishes on the whole line at s = 1
    assert!(matches!(
        expectation_rank_m_identity(&b, 3, &[0.5, 0.9], &Region::whole(), c(1.0)),
        Err(Error::HypothesisViolated(3))
    ));
    assert!(Region::interval(1.0, 1.0).is_err());
}

#[test]
fn b_matrix_two_ways() {
    for basis in [gauss(3.0, 4), build_basis(&quartic(), 3.0, 4).unwrap()] {
        let spikes = [0.5, -0.3, 0.9];
        let data = spiked_kernel_data(&basis, 4, &spikes).unwrap();
        let b = data.b_unscaled();
        for (k, &a) in spikes.iter().enumerate() {
            for l in 0..3 {
                let g = gamma_j(&basis, 4 - 3 + l, a).unwrap();
                assert!((b[(l, k)] - g).abs() < 1e-9 * g.abs().max(1.0), "l={l} k={k}: {} vs {g}", b[(l, k)]);
            }
        }
        assert!(data.cond_b >= 1.0);
        // B = ∫ t̂ v̂ᵗ, with v̂ recovered from the stored ŵ and Γ
        let q = data.nodes.len();
        for k in 0..3 {
            for l in 0..3 {
                let mut acc = 0.0;
                for i in 0..q {
                    let psi = basis.psi_all(data.nodes[i], 4);
                    let v: f64 = data.w_hat[(k, i)] + (0..4).map(|j| data.gamma[(j, k)] * psi[j]).sum::<f64>();
                    acc += data.weights[i] * data.t_hat[(l, i)] * v;
                }
                assert!((acc - data.b[(l, k)]).abs() < 1e-12 * data.b[(l, k)].abs().max(1.0));
            }
        }
    }
}

#[test]
fn perturbed_kernel_trace_is_dimension() {
    let b = gauss(3.0, 4);
    let data = spiked_kernel_data(&b, 4, &[0.6, 1.1]).unwrap();
    let (lo, hi) = b.window();
    let rule = composite(&[lo - 4.0, hi + 4.0], 400, 20).unwrap();
    let tr = rule.integrate(|x| data.kernel(&b, x, x));
    assert!((tr - 4.0).abs() < 1e-9, "{tr}");
}

#[test]
fn gap_probability() {
    let b = gauss(2.0, 2);
    let whole = gap_prob(&b, 2, &[0.5], &Region::whole(), 1).unwrap();
    assert!(whole.abs() < 1e-10);
    let mut prev = 0.0;
    for i in 0..12 {
        let x = -1.0 + 0.3 * i as f64;
        let r = Region::above(x);
        let p1 = gap_prob(&b, 2, &[0.5], &r, 1).unwrap();
        let p2 = gap_prob(&b, 2, &[0.5], &r, 2).unwrap();
        assert!(p1 >= prev - 1e-12 && p1 <= 1.0 + 1e-12);
        assert!(p2 >= p1 - 1e-12 && p2 <= 1.0 + 1e-10);
        prev = p1;
    }
    // d = 2 points: at most 2 in E is certain
    let p3 = gap_prob(&b, 2, &[0.5], &Region::above(0.1), 3).unwrap();
    assert!((p3 - 1.0).abs() < 1e-10);
    assert!(gap_prob(&b, 2, &[0.5], &Region::above(0.1), 5).is_err());
}

#[test]
fn gram_restriction_spectrum() {
    let b = gauss(4.0, 8);
    let full = GramRestriction::new(&b, 8, &Region::whole()).unwrap();
    for e in full.eigenvalues() {
        assert!((e - 1.0).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gram_nested_regions(x1 in -2.0f64..2.0, gap in 0.05f64..1.5, width in 0.1f64..2.0) {
        let b = gauss(4.0, 6);
        let small = GramRestriction::new(&b, 6, &Region::above(x1 + gap)).unwrap();
        let big = GramRestriction::new(&b, 6, &Region::above(x1)).unwrap();
        let union = GramRestriction::new(&b, 6, &Region::new(&[(x1 - gap - width, x1 - gap), (x1, f64::INFINITY)]).unwrap()).unwrap();
        for g in [&small, &big, &union] {
            prop_assert!((&g.matrix - g.matrix.transpose()).amax() < 1e-15);
            for e in g.eigenvalues() {
                prop_assert!(e > -1e-9 && e < 1.0 + 1e-9);
            }
        }
        let (es, eb, eu) = (small.eigenvalues(), big.eigenvalues(), union.eigenvalues());
        prop_assert!(small.matrix.trace() < big.matrix.trace() && big.matrix.trace() < union.matrix.trace());
        for i in 0..6 {
            prop_assert!(es[i] <= eb[i] + 1e-12 && eb[i] <= eu[i] + 1e-12);
        }
    }

    #[test]
    fn identity_and_direct_agree(
        d in 2usize..=4,
        two in any::<bool>(),
        quart in any::<bool>(),
        x in 0.0f64..2.0,
        si in 0usize..3,
        a1 in 0.2f64..1.2,
        a2 in 0.2f64..1.2,
        flip in any::<bool>(),
    ) {
        let s = [c(1.0), c(0.6), Complex64::new(1.0, 0.2)][si];
        let a2 = if flip { -a2 } else { a2 };
        prop_assume!((a1 - a2).abs() > 0.1);
        let spikes: Vec<f64> = if two { vec![a1, a2] } else { vec![a1] };
        let b = if quart { build_basis(&quartic(), 3.0, 4).unwrap() } else { gauss(3.0, 4) };
        let r = Region::above(x);
        let direct = expectation_rank_m_direct(&b, d, &spikes, &r, s).unwrap();
        let ident = expectation_rank_m_identity(&b, d, &spikes, &r, s).unwrap();
        prop_assert!((direct - ident).norm() < 1e-6 * (1.0 + direct.norm()), "{} vs {}", direct, ident);
    }
}
