//! Spike presets for the limiting regimes. Each preset turns (a, α, m) and n
//! into the spikes a_k(n), and says which rescaled eigenvalue should follow
//! which limit law.

use spiked_core::equilibrium::EquilibriumData;
use spiked_core::laws::{fk_jth, gk_jth, gk_jth_with, normal_cdf, tw_jth};
use spiked_core::phase::{big_g2, big_h2, c_of_a, x0_of_a, PhasePortrait};
use spiked_core::transitions::{
    jump_scaling, jump_scaling_tilde, mixture_prediction, p_m, p_tilde_m, MixturePrediction, OneCutFrame, Point,
    TransitionResult,
};

use crate::error::invalid;
use crate::sampler::Centering;
use crate::{Error, Result};

/// How the spikes are given.
#[derive(Debug, Clone, PartialEq)]
pub enum SpikeSpec {
    /// Fixed spikes, classified against a_c.
    Explicit(Vec<f64>),
    /// All spikes below a_c.
    Subcritical(Vec<f64>),
    /// Spikes above a_c, separated by O(1).
    SupercriticalSeparated(Vec<f64>),
    /// a_k = a + √(−G″(x₀(a)))·α_k/√n.
    SupercriticalClustered { a: f64, alphas: Vec<f64> },
    /// a_k = a* − q_m log(K_m n)/n + α_k/n at a secondary critical value a*,
    /// the one nearest `a` when given.
    SecondaryCritical { a: Option<f64>, alphas: Vec<f64>, m: usize },
    /// a_k = a_c + β α_k / n^{1/3}.
    CriticalContinuous { alphas: Vec<f64> },
    /// a_k = a_c − q̃_m log(K̃_m n)/n + α_k/n.
    CriticalJump { alphas: Vec<f64>, m: usize },
}

impl SpikeSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SpikeSpec::Explicit(_) => "explicit",
            SpikeSpec::Subcritical(_) => "subcritical",
            SpikeSpec::SupercriticalSeparated(_) => "supercritical-separated",
            SpikeSpec::SupercriticalClustered { .. } => "supercritical-clustered",
            SpikeSpec::SecondaryCritical { .. } => "secondary-critical",
            SpikeSpec::CriticalContinuous { .. } => "critical-continuous",
            SpikeSpec::CriticalJump { .. } => "critical-jump",
        }
    }
}

/// A limit law in the rescaled variable T.
#[derive(Debug, Clone, PartialEq)]
pub enum PredictedLaw {
    TracyWidom { j: usize },
    Normal,
    /// G^{(j)}_k(T; α), k = α.len().
    Gue { j: usize, alphas: Vec<f64> },
    /// F^{(j)}_k(T; α) in the law's own sign convention.
    Deformed { j: usize, alphas: Vec<f64> },
    Mixture(MixturePrediction),
}

impl PredictedLaw {
    pub fn cdf(&self, t: f64) -> Result<f64> {
        Ok(match self {
            PredictedLaw::TracyWidom { j } => tw_jth(t, *j)?,
            PredictedLaw::Normal => normal_cdf(t),
            PredictedLaw::Gue { j, alphas } => {
                if alphas.iter().all(|&a| a == 0.0) {
                    gk_jth(t, *j, alphas.len())?
                } else {
                    gk_jth_with(t, *j, alphas)?
                }
            }
            PredictedLaw::Deformed { j, alphas } => fk_jth(t, *j, alphas)?,
            PredictedLaw::Mixture(mix) => mix.cdf(t)?,
        })
    }

    pub fn label(&self) -> String {
        match self {
            PredictedLaw::TracyWidom { j } => format!("tw_j j={j}"),
            PredictedLaw::Normal => "normal".into(),
            PredictedLaw::Gue { j, alphas } => format!("gk_j j={j} alphas={alphas:?}"),
            PredictedLaw::Deformed { j, alphas } => format!("fk_j j={j} alphas={alphas:?}"),
            PredictedLaw::Mixture(mix) => {
                let terms: Vec<String> = mix.terms.iter().map(|(w, c)| format!("{w:.6}*{c:?}")).collect();
                format!("mixture {}", terms.join(" + "))
            }
        }
    }

    /// Values on a grid.
    pub fn tabulate(&self, grid: &[f64]) -> Result<Tabulated> {
        if grid.len() < 2 || grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("grid must be strictly increasing with at least two points"));
        }
        let values = grid.iter().map(|&t| self.cdf(t)).collect::<Result<Vec<_>>>()?;
        Ok(Tabulated { t: grid.to_vec(), values })
    }
}

/// A law tabulated on a grid; linear in between, clamped outside.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    pub t: Vec<f64>,
    pub values: Vec<f64>,
}

impl Tabulated {
    pub fn cdf(&self, x: f64) -> f64 {
        let n = self.t.len();
        if x <= self.t[0] {
            return self.values[0];
        }
        if x >= self.t[n - 1] {
            return self.values[n - 1];
        }
        let k = self.t.partition_point(|&v| v <= x);
        let w = (x - self.t[k - 1]) / (self.t[k] - self.t[k - 1]);
        self.values[k - 1] * (1.0 - w) + self.values[k] * w
    }
}

/// The k-th largest eigenvalue, how to rescale it, and its limit law.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub k: usize,
    pub centering: Centering,
    pub law: PredictedLaw,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedRegime {
    pub name: &'static str,
    pub n: usize,
    pub spikes: Vec<f64>,
    pub predictions: Vec<Prediction>,
    pub transition: Option<TransitionResult>,
    /// Free-form remarks echoed into reports.
    pub notes: Vec<String>,
}

fn check_distinct(alphas: &[f64]) -> Result<()> {
    let mut s = alphas.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if alphas.iter().any(|a| !a.is_finite()) || s.windows(2).any(|w| w[0] == w[1]) {
        return Err(invalid("spike parameters must be finite and distinct"));
    }
    Ok(())
}

fn edge(eq: &EquilibriumData) -> Centering {
    Centering::Edge { e: eq.right_endpoint, beta: eq.beta }
}

/// Separated outliers for the spikes above a_c, then the edge.
fn classify(eq: &EquilibriumData, a_c: f64, spikes: &[f64]) -> Result<Vec<Prediction>> {
    let mut sup: Vec<f64> = spikes.iter().copied().filter(|&a| a > a_c).collect();
    sup.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut out = Vec::new();
    for (i, &a) in sup.iter().enumerate() {
        let loc = x0_of_a(eq, a)?;
        if loc.is_secondary_critical {
            return Err(invalid(format!("spike {a} sits at a secondary critical value")));
        }
        out.push(Prediction {
            k: i + 1,
            centering: Centering::Outlier { x_star: loc.x0, g2: loc.second_deriv },
            law: PredictedLaw::Normal,
        });
    }
    out.push(Prediction { k: sup.len() + 1, centering: edge(eq), law: PredictedLaw::TracyWidom { j: 1 } });
    Ok(out)
}

/// Resolves a spike specification at dimension n.
pub fn resolve(eq: &EquilibriumData, portrait: &PhasePortrait, n: usize, spec: &SpikeSpec) -> Result<ResolvedRegime> {
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    let nf = n as f64;
    let a_c = portrait.a_c;
    let mut notes = Vec::new();
    let mut transition = None;
    let (spikes, predictions) = match spec {
        SpikeSpec::Explicit(s) => {
            check_distinct(s)?;
            (s.clone(), classify(eq, a_c, s)?)
        }
        SpikeSpec::Subcritical(s) => {
            check_distinct(s)?;
            if s.iter().any(|&a| a >= a_c) {
                return Err(invalid(format!("subcritical spikes must lie below a_c = {a_c}")));
            }
            (s.clone(), classify(eq, a_c, s)?)
        }
        SpikeSpec::SupercriticalSeparated(s) => {
            check_distinct(s)?;
            if s.is_empty() || s.iter().any(|&a| a <= a_c) {
                return Err(invalid(format!("separated spikes must lie above a_c = {a_c}")));
            }
            (s.clone(), classify(eq, a_c, s)?)
        }
        SpikeSpec::SupercriticalClustered { a, alphas } => {
            check_distinct(alphas)?;
            if alphas.is_empty() || !(*a > a_c) {
                return Err(invalid(format!("the cluster centre must lie above a_c = {a_c}")));
            }
            let loc = x0_of_a(eq, *a)?;
            if loc.is_secondary_critical {
                return Err(invalid("the cluster centre is a secondary critical value"));
            }
            let g2 = loc.second_deriv;
            let spikes = alphas.iter().map(|al| a + (-g2).sqrt() * al / nf.sqrt()).collect();
            let centering = Centering::Outlier { x_star: loc.x0, g2 };
            let mut preds: Vec<Prediction> = (1..=alphas.len())
                .map(|k| Prediction { k, centering, law: PredictedLaw::Gue { j: k, alphas: alphas.clone() } })
                .collect();
            preds.push(Prediction { k: alphas.len() + 1, centering: edge(eq), law: PredictedLaw::TracyWidom { j: 1 } });
            (spikes, preds)
        }
        SpikeSpec::CriticalContinuous { alphas } => {
            check_distinct(alphas)?;
            if alphas.is_empty() {
                return Err(invalid("critical-continuous needs at least one alpha"));
            }
            if !portrait.is_continuous_transition {
                return Err(invalid("the transition at a_c is not continuous for this potential"));
            }
            let spikes = alphas.iter().map(|al| a_c + eq.beta * al / nf.cbrt()).collect();
            // the limit is F_𝐦(T; −α_1, …, −α_𝐦)
            let neg: Vec<f64> = alphas.iter().map(|a| -a).collect();
            notes.push(format!("critical-continuous: user alphas {alphas:?} enter the limit law as -alpha = {neg:?}"));
            let preds = (1..=alphas.len().min(2))
                .map(|k| Prediction { k, centering: edge(eq), law: PredictedLaw::Deformed { j: k, alphas: neg.clone() } })
                .collect();
            (spikes, preds)
        }
        SpikeSpec::SecondaryCritical { a, alphas, m } => {
            let sc = match a {
                Some(a) => portrait
                    .secondary_criticals
                    .iter()
                    .min_by(|p, q| (p.a - a).abs().partial_cmp(&(q.a - a).abs()).unwrap()),
                None => portrait.secondary_criticals.first(),
            }
            .ok_or_else(|| invalid("no secondary critical value found in the scanned range"))?;
            let mm = alphas.len();
            let (g2_1, g2_2) = (big_g2(eq, sc.x1)?, big_g2(eq, sc.x2)?);
            let scaling = jump_scaling(sc.x1, sc.x2, g2_1, g2_2, mm, *m)?;
            let frame = OneCutFrame::from_equilibrium(eq);
            let result = p_m(&frame, sc.x1, sc.x2, mm, *m, alphas)?;
            let spikes = scaling.spikes(sc.a, n, alphas);
            notes.push(format!("secondary critical a* = {}, x1 = {}, x2 = {}, q = {}, K = {}", sc.a, sc.x1, sc.x2, scaling.q, scaling.k));
            let up = Centering::Outlier { x_star: sc.x2, g2: g2_2 };
            let low = Centering::Outlier { x_star: sc.x1, g2: g2_1 };
            let mut preds = Vec::new();
            for k in 1..=mm {
                if k <= *m {
                    let mix = mixture_prediction(&result, k, Point::Upper)?;
                    preds.push(Prediction { k, centering: up, law: PredictedLaw::Mixture(mix) });
                }
                if k >= *m {
                    let mix = mixture_prediction(&result, k, Point::Lower)?;
                    preds.push(Prediction { k, centering: low, law: PredictedLaw::Mixture(mix) });
                }
            }
            transition = Some(result);
            (spikes, preds)
        }
        SpikeSpec::CriticalJump { alphas, m } => {
            if portrait.is_continuous_transition {
                return Err(invalid("the transition at a_c is continuous for this potential"));
            }
            let mm = alphas.len();
            // c and x0 just above a_c, where x0 is still the outer maximiser
            let a = a_c + 1e-6;
            let c = c_of_a(eq, a)?;
            let x0 = x0_of_a(eq, a)?.x0;
            let (h2, g2) = (big_h2(eq, c)?, big_g2(eq, x0)?);
            let scaling = jump_scaling_tilde(c, x0, h2, g2, mm, *m)?;
            let frame = OneCutFrame::from_equilibrium(eq);
            let result = p_tilde_m(&frame, c, x0, mm, *m, alphas)?;
            let spikes = scaling.spikes(a_c, n, alphas);
            notes.push(format!("jump at a_c = {a_c}: c = {c}, x0 = {x0}, q = {}, K = {}", scaling.q, scaling.k));
            let up = Centering::Outlier { x_star: x0, g2 };
            let mut preds = Vec::new();
            for k in 1..=*m {
                let mix = mixture_prediction(&result, k, Point::Upper)?;
                preds.push(Prediction { k, centering: up, law: PredictedLaw::Mixture(mix) });
            }
            let mix = mixture_prediction(&result, *m, Point::Edge)?;
            preds.push(Prediction { k: *m, centering: edge(eq), law: PredictedLaw::Mixture(mix) });
            transition = Some(result);
            (spikes, preds)
        }
    };
    if spikes.len() > n {
        return Err(Error::InvalidArgument("more spikes than the dimension".into()));
    }
    Ok(ResolvedRegime { name: spec.name(), n, spikes, predictions, transition, notes })
}
