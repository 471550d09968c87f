//! Phase diagram of the top eigenvalue: c(a), the critical value a_c, the
//! outlier location x₀(a) and the secondary critical values.
//!
//! With G(x; a) = g(x) − V(x) + ax and H(x; a) = −g(x) + ax + ℓ on [e, ∞),
//! G′ = a − φ and G″ = −φ′ where φ = V′ − g′.

use alloc::vec::Vec;

use crate::equilibrium::EquilibriumData;
use crate::{Error, Result};

/// Two maxima of G are tied when their values differ by less than
/// `TIE * (1 + |G|)`.
pub const TIE: f64 = 1e-9;
/// |G″| below this at the maximiser is reported as a flat maximum.
pub const FLAT: f64 = 1e-6;
const SCAN_POINTS: usize = 4000;

/// G(x; a), x ≥ e.
pub fn big_g(eq: &EquilibriumData, x: f64, a: f64) -> Result<f64> {
    if !(x >= eq.right_endpoint) {
        return Err(Error::DomainError(x));
    }
    Ok(eq.g_real(x) - eq.potential.v(x) + a * x)
}

/// H(x; a), x ≥ e.
pub fn big_h(eq: &EquilibriumData, x: f64, a: f64) -> Result<f64> {
    if !(x >= eq.right_endpoint) {
        return Err(Error::DomainError(x));
    }
    Ok(-eq.g_real(x) + a * x + eq.robin_constant)
}

/// G″(x; a) = −φ′(x) for x > e (independent of a).
pub fn big_g2(eq: &EquilibriumData, x: f64) -> Result<f64> {
    if !(x > eq.right_endpoint) {
        return Err(Error::DomainError(x));
    }
    Ok(-eq.phi_prime(x))
}

/// H″(x; a) = −g″(x) = φ′(x) − V″(x) for x > e.
pub fn big_h2(eq: &EquilibriumData, x: f64) -> Result<f64> {
    if !(x > eq.right_endpoint) {
        return Err(Error::DomainError(x));
    }
    Ok(eq.phi_prime(x) - eq.potential.d2v(x))
}

/// ½V′(e), the slope beyond which c(a) = e.
pub fn half_slope(eq: &EquilibriumData) -> f64 {
    0.5 * eq.potential.dv(eq.right_endpoint)
}

/// Minimiser of H(·; a) on [e, ∞).
pub fn c_of_a(eq: &EquilibriumData, a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::InvalidArgument("a must be positive"));
    }
    let e = eq.right_endpoint;
    if a >= half_slope(eq) {
        return Ok(e);
    }
    // H′ = a − g′ with g′ decreasing from ½V′(e) to 0
    let mut step = 1.0;
    while eq.g_prime(e + step) > a {
        step *= 2.0;
        if step > 1e12 {
            return Err(Error::SearchBoundsExceeded("c(a)"));
        }
    }
    let (mut lo, mut hi) = (e, e + step);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if eq.g_prime(mid) > a {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs() {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Interior local maxima (x, G(x; a)) of G(·; a) on (lo, ∞), ascending in x.
pub fn local_maxima(eq: &EquilibriumData, a: f64, lo: f64) -> Vec<(f64, f64)> {
    let gp = |x: f64| a - eq.phi(x);
    let mut len = (2.0 * eq.radius()).max(4.0);
    while eq.phi(lo + len) <= a + 1.0 && len < 1e4 {
        len *= 2.0;
    }
    len *= 2.0;
    let mut out = Vec::new();
    let mut x_prev = lo;
    let mut d_prev = gp(lo + 1e-12 * (1.0 + lo.abs()));
    for i in 1..=SCAN_POINTS {
        // quadratic spacing puts more points near lo
        let t = i as f64 / SCAN_POINTS as f64;
        let x = lo + len * t * t;
        let d = gp(x);
        if d_prev > 0.0 && d <= 0.0 {
            let xm = refine_root(&gp, x_prev, x);
            if let Ok(gv) = big_g(eq, xm, a) {
                out.push((xm, gv));
            }
        }
        x_prev = x;
        d_prev = d;
    }
    out
}

fn refine_root<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 2.0 * f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Bounds for the a_c search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchWindow {
    /// Smallest a examined before giving up.
    pub a_min: f64,
    /// Bisection width on a.
    pub tol: f64,
}

impl Default for SearchWindow {
    fn default() -> Self {
        SearchWindow { a_min: 1e-8, tol: 1e-13 }
    }
}

/// Whether some x̄ ∈ (c(a), ∞) has G(x̄; a) > H(c(a); a).
///
/// G(x̄) − H(c) is split as [G(x̄) − G(c)] − ∫_e^c h√((t−ẽ)(t−e)) dt so that
/// neither term is a difference of large logarithms.
pub fn supercritical_condition(eq: &EquilibriumData, a: f64) -> Result<bool> {
    let c = c_of_a(eq, a)?;
    let gc = big_g(eq, c, a)?;
    let excess = eq.outer_excess(c);
    Ok(local_maxima(eq, a, c)
        .iter()
        .any(|&(_, gx)| gx - gc - excess > 1e-13 * (1.0 + gc.abs())))
}

/// a_c and whether it equals ½V′(e) (continuous transition).
pub fn critical_ac(eq: &EquilibriumData, window: SearchWindow) -> Result<(f64, bool)> {
    let half = half_slope(eq);
    if !supercritical_condition(eq, half)? {
        return Ok((half, true));
    }
    let mut lo = 0.5 * half;
    while supercritical_condition(eq, lo)? {
        lo *= 0.5;
        if lo < window.a_min {
            return Err(Error::SearchBoundsExceeded("a_c"));
        }
    }
    let mut hi = half;
    while hi - lo > window.tol * hi {
        let mid = 0.5 * (lo + hi);
        if supercritical_condition(eq, mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let ac = 0.5 * (lo + hi);
    Ok((ac, (ac - half).abs() < 1e-8))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutlierLocation {
    pub x0: f64,
    /// G″(x₀; a)
    pub second_deriv: f64,
    pub is_secondary_critical: bool,
    /// Both maximisers when tied, x1 < x2.
    pub x1: Option<f64>,
    pub x2: Option<f64>,
    /// G(x₂) − G(x₁) for the two highest maxima, 0 when only one exists.
    pub gap: f64,
}

/// Global maximiser of G(·; a) on [c(a), ∞) for a > a_c.
pub fn x0_of_a(eq: &EquilibriumData, a: f64) -> Result<OutlierLocation> {
    let c = c_of_a(eq, a)?;
    let mut maxima = local_maxima(eq, a, c);
    if maxima.is_empty() {
        return Err(Error::InvalidArgument("a is not supercritical: G has no interior maximum"));
    }
    let gc = big_g(eq, c, a)?;
    maxima.sort_by(|p, q| q.1.partial_cmp(&p.1).unwrap_or(core::cmp::Ordering::Equal));
    let (x0, g0) = maxima[0];
    if g0 < gc {
        return Err(Error::InvalidArgument("a is not supercritical: maximum at c(a)"));
    }
    let g2 = big_g2(eq, x0)?;
    if g2.abs() < FLAT {
        return Err(Error::FlatMaximum(g2));
    }
    let mut loc = OutlierLocation {
        x0,
        second_deriv: g2,
        is_secondary_critical: false,
        x1: None,
        x2: None,
        gap: 0.0,
    };
    if maxima.len() >= 2 {
        let (xb, gb) = maxima[1];
        let (x1, x2, g1, g2v) = if xb < x0 { (xb, x0, gb, g0) } else { (x0, xb, g0, gb) };
        loc.gap = g2v - g1;
        if loc.gap.abs() < TIE * (1.0 + g0.abs()) {
            loc.is_secondary_critical = true;
            loc.x1 = Some(x1);
            loc.x2 = Some(x2);
        }
    }
    Ok(loc)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecondaryCritical {
    pub a: f64,
    pub x1: f64,
    pub x2: f64,
    /// G(x₂; a) − G(x₁; a) at the returned a.
    pub gap: f64,
}

/// The two highest interior maxima, ordered by location, if there are two.
fn top_pair(eq: &EquilibriumData, a: f64) -> Result<Option<((f64, f64), (f64, f64))>> {
    let c = c_of_a(eq, a)?;
    let mut m = local_maxima(eq, a, c);
    if m.len() < 2 {
        return Ok(None);
    }
    m.sort_by(|p, q| q.1.partial_cmp(&p.1).unwrap_or(core::cmp::Ordering::Equal));
    let (p, q) = (m[0], m[1]);
    Ok(Some(if p.0 < q.0 { (p, q) } else { (q, p) }))
}

/// True when V″ ≥ 0 on a long stretch beyond e.
fn convex_beyond_edge(eq: &EquilibriumData) -> bool {
    if let Some(hint) = eq.potential.convex_beyond_edge {
        return hint;
    }
    let e = eq.right_endpoint;
    let len = 20.0 * eq.radius().max(1.0);
    (0..=4000).all(|i| eq.potential.d2v(e + len * i as f64 / 4000.0) >= 0.0)
}

/// Secondary critical values a* ∈ [a_lo, a_hi], located by sign changes of
/// the gap between the two highest maxima on a uniform grid and refined by
/// bisection and Newton (d gap/da = x₂ − x₁).
pub fn scan_secondary_criticals(eq: &EquilibriumData, a_lo: f64, a_hi: f64, grid: usize) -> Result<Vec<SecondaryCritical>> {
    if !(a_lo > 0.0 && a_hi > a_lo) {
        return Err(Error::InvalidInterval(a_lo, a_hi));
    }
    let mut out = Vec::new();
    if grid < 2 || convex_beyond_edge(eq) {
        return Ok(out);
    }
    let gap_at = |a: f64| -> Result<Option<(f64, f64, f64)>> {
        Ok(top_pair(eq, a)?.map(|(p, q)| (q.1 - p.1, p.0, q.0)))
    };
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..grid {
        let a = a_lo + (a_hi - a_lo) * i as f64 / (grid - 1) as f64;
        let cur = gap_at(a)?.map(|(g, _, _)| (a, g));
        if let (Some((pa, pg)), Some((ca, cg))) = (prev, cur) {
            if (pg < 0.0) != (cg < 0.0) {
                if let Some(sc) = refine_crossing(&gap_at, pa, pg, ca)? {
                    out.push(sc);
                }
            }
        }
        prev = cur;
    }
    Ok(out)
}

fn refine_crossing<F>(gap_at: &F, mut lo: f64, glo: f64, mut hi: f64) -> Result<Option<SecondaryCritical>>
where
    F: Fn(f64) -> Result<Option<(f64, f64, f64)>>,
{
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        match gap_at(mid)? {
            Some((g, _, _)) => {
                if (g < 0.0) == (glo < 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            None => return Ok(None),
        }
        if hi - lo < 1e-15 * hi.abs() {
            break;
        }
    }
    let mut a = 0.5 * (lo + hi);
    let Some((mut g, mut x1, mut x2)) = gap_at(a)? else {
        return Ok(None);
    };
    for _ in 0..4 {
        if g == 0.0 {
            break;
        }
        let na = a - g / (x2 - x1);
        match gap_at(na)? {
            Some((ng, nx1, nx2)) if ng.abs() < g.abs() => {
                a = na;
                g = ng;
                x1 = nx1;
                x2 = nx2;
            }
            _ => break,
        }
    }
    Ok(Some(SecondaryCritical { a, x1, x2, gap: g }))
}

/// Everything the phase diagram needs for one potential.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePortrait {
    pub a_c: f64,
    pub is_continuous_transition: bool,
    pub half_slope: f64,
    pub secondary_criticals: Vec<SecondaryCritical>,
}

/// a_c plus a secondary-critical scan of (a_c, a_max] on `grid` points.
pub fn phase_portrait(eq: &EquilibriumData, a_max: f64, grid: usize) -> Result<PhasePortrait> {
    let (a_c, cont) = critical_ac(eq, SearchWindow::default())?;
    let secondary = if a_max > a_c {
        scan_secondary_criticals(eq, a_c * (1.0 + 1e-9) + 1e-12, a_max, grid)?
    } else {
        Vec::new()
    };
    Ok(PhasePortrait {
        a_c,
        is_continuous_transition: cont,
        half_slope: half_slope(eq),
        secondary_criticals: secondary,
    })
}

impl PhasePortrait {
    pub fn c_map(&self, eq: &EquilibriumData, a: f64) -> Result<f64> {
        c_of_a(eq, a)
    }

    pub fn x0_map(&self, eq: &EquilibriumData, a: f64) -> Result<OutlierLocation> {
        if !(a > self.a_c) {
            return Err(Error::InvalidArgument("x0 requires a > a_c"));
        }
        x0_of_a(eq, a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::solve_equilibrium;
    use crate::potential::Potential;

    #[test]
    fn gaussian_basics() {
        let eq = solve_equilibrium(&Potential::gaussian()).unwrap();
        assert_eq!(c_of_a(&eq, 1.5).unwrap(), eq.right_endpoint);
        assert!((c_of_a(&eq, 0.5).unwrap() - 2.5).abs() < 1e-12);
        let loc = x0_of_a(&eq, 2.0).unwrap();
        assert!((loc.x0 - 2.5).abs() < 1e-12);
        assert!((loc.second_deriv + 4.0 / 3.0).abs() < 1e-10);
        assert!(x0_of_a(&eq, 0.8).is_err());
    }
}
