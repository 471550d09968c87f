//! Airy function Ai and its derivative on the real line.
//!
//! | region          | method                                              |
//! |-----------------|-----------------------------------------------------|
//! | −2 ≤ x ≤ 2      | Maclaurin series                                    |
//! | x > 2           | K_{1/3}, K_{2/3} integrals, trapezoid in cosh form  |
//! | −10 ≤ x < −2    | Taylor stepping of y″ = xy from x = −2              |
//! | x < −10         | oscillatory asymptotic expansion                    |

#[allow(unused_imports)]
use num_traits::Float;
use core::f64::consts::PI;

use crate::{Error, Result};

/// Ai(0) = 3^{-2/3}/Γ(2/3)
pub const AI0: f64 = 0.355_028_053_887_817_2;
/// Ai′(0) = −3^{-1/3}/Γ(1/3)
pub const AIP0: f64 = -0.258_819_403_792_806_8;

/// Ai(x) for |x| ≤ 50.
pub fn airy_ai(x: f64) -> Result<f64> {
    check(x)?;
    Ok(ai_pair(x).0)
}

/// Ai′(x) for |x| ≤ 50.
pub fn airy_ai_prime(x: f64) -> Result<f64> {
    check(x)?;
    Ok(ai_pair(x).1)
}

fn check(x: f64) -> Result<()> {
    if x.is_nan() || x.abs() > 50.0 {
        Err(Error::DomainError(x))
    } else {
        Ok(())
    }
}

/// (Ai(x), Ai′(x)) with no domain check. Underflows to zero for large x.
pub fn ai_pair(x: f64) -> (f64, f64) {
    if x > 2.0 {
        bessel_form(x)
    } else if x >= -2.0 {
        maclaurin(x)
    } else if x >= -10.0 {
        stepped(x)
    } else {
        oscillatory(-x)
    }
}

fn maclaurin(x: f64) -> (f64, f64) {
    // Ai = AI0·f + AIP0·g with f = Σ c_k x^{3k}, g = Σ d_k x^{3k+1}.
    let x3 = x * x * x;
    let (mut f, mut fp) = (1.0, 0.0);
    let (mut g, mut gp) = (x, 1.0);
    let mut tf = 1.0;
    let mut tg = x;
    let mut k = 0.0;
    loop {
        k += 1.0;
        // term ratios from the recurrence a_{n+3} = a_n/((n+2)(n+3))
        tf *= x3 / ((3.0 * k - 1.0) * (3.0 * k));
        tg *= x3 / ((3.0 * k) * (3.0 * k + 1.0));
        f += tf;
        g += tg;
        if x != 0.0 {
            fp += 3.0 * k * tf / x;
        }
        gp += (3.0 * k + 1.0) * tg / if x != 0.0 { x } else { 1.0 };
        if (tf.abs() < 1e-18 && tg.abs() < 1e-18) || k > 200.0 {
            break;
        }
    }
    if x == 0.0 {
        gp = 1.0;
    }
    (AI0 * f + AIP0 * g, AI0 * fp + AIP0 * gp)
}

fn bessel_form(x: f64) -> (f64, f64) {
    // Ai(x) = √(x/3)/π K_{1/3}(ζ), Ai′(x) = −x/(π√3) K_{2/3}(ζ),
    // K_ν(ζ) = ∫_0^∞ e^{−ζ cosh t} cosh(νt) dt, the factor e^{−ζ} pulled out.
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let h = 0.2;
    let tmax = (1.0 + 46.0 / zeta).acosh();
    let mut k13 = 0.5;
    let mut k23 = 0.5;
    let mut t = h;
    while t <= tmax + h {
        let e = (-zeta * (t.cosh() - 1.0)).exp();
        k13 += e * (t / 3.0).cosh();
        k23 += e * (2.0 * t / 3.0).cosh();
        t += h;
    }
    let scale = (-zeta).exp() * h;
    let k13 = k13 * scale;
    let k23 = k23 * scale;
    ((x / 3.0).sqrt() / PI * k13, -x / (PI * 3.0f64.sqrt()) * k23)
}

fn stepped(x: f64) -> (f64, f64) {
    let (mut y, mut yp) = maclaurin(-2.0);
    let mut x0 = -2.0;
    let nsteps = ((x0 - x) / 0.25).ceil() as usize;
    let h = (x - x0) / nsteps as f64;
    let mut a = [0.0f64; 40];
    for _ in 0..nsteps {
        // Taylor coefficients of y about x0 from y″ = x y.
        a[0] = y;
        a[1] = yp;
        a[2] = 0.5 * x0 * y;
        for k in 1..38 {
            a[k + 2] = (x0 * a[k] + a[k - 1]) / ((k + 2) as f64 * (k + 1) as f64);
        }
        let mut ny = 0.0;
        let mut nyp = 0.0;
        for k in (0..40).rev() {
            ny = ny * h + a[k];
            if k > 0 {
                nyp = nyp * h + k as f64 * a[k];
            }
        }
        y = ny;
        yp = nyp;
        x0 += h;
    }
    (y, yp)
}

fn oscillatory(z: f64) -> (f64, f64) {
    // Ai(−z), Ai′(−z) for z > 10.
    let zeta = 2.0 / 3.0 * z * z.sqrt();
    let mut u = [0.0f64; 16];
    let mut v = [0.0f64; 16];
    u[0] = 1.0;
    v[0] = 1.0;
    for k in 1..16 {
        let kf = k as f64;
        u[k] = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        v[k] = -u[k] * (6.0 * kf + 1.0) / (6.0 * kf - 1.0);
    }
    let (mut pu, mut qu, mut pv, mut qv) = (0.0, 0.0, 0.0, 0.0);
    let mut zp = 1.0;
    for k in 0..8 {
        let sgn = if k % 2 == 0 { 1.0 } else { -1.0 };
        pu += sgn * u[2 * k] * zp;
        pv += sgn * v[2 * k] * zp;
        zp /= zeta;
        qu += sgn * u[2 * k + 1] * zp;
        qv += sgn * v[2 * k + 1] * zp;
        zp /= zeta;
    }
    let phase = zeta - PI / 4.0;
    let (s, c) = phase.sin_cos();
    let pre = 1.0 / PI.sqrt();
    let ai = pre * z.powf(-0.25) * (c * pu + s * qu);
    let aip = pre * z.powf(0.25) * (s * pv - c * qv);
    (ai, aip)
}
