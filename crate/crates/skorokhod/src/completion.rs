//! Constructive completion: certified limits of Cauchy sequences of
//! turbofunctions, and pointwise-convergence diagnostics of visualizations.

use thiserror::Error;

use crate::metric::{rho_plus_bounds, MetricError};
use crate::piecewise::{Homeomorphism, NODE_TOL};
use crate::turbo::{right_continuous_inverse, visualize, Turbofunction};

#[derive(Debug, Error)]
pub enum CompletionError {
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("gap bounds cannot be certified: {0}")]
    Uncertifiable(String),
    #[error("sample point {0} outside the domain [0, 1]")]
    OutOfDomain(f64),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// A finite prefix of a Cauchy sequence, with certified consecutive gaps.
#[derive(Debug, Clone)]
pub struct CauchySequence {
    items: Vec<Turbofunction>,
    gap_bounds: Vec<f64>,
}

impl CauchySequence {
    /// Certify consecutive gaps with the bound solver at tolerance `tol`.
    pub fn new(items: Vec<Turbofunction>, tol: f64) -> Result<Self, CompletionError> {
        if items.is_empty() {
            return Err(CompletionError::BadParameter("empty sequence".into()));
        }
        if !(tol > 0.0) {
            return Err(CompletionError::BadParameter(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        let mut gap_bounds = Vec::with_capacity(items.len().saturating_sub(1));
        for pair in items.windows(2) {
            gap_bounds.push(rho_plus_bounds(&pair[0], &pair[1], tol)?.upper);
        }
        Ok(CauchySequence { items, gap_bounds })
    }

    /// Use externally claimed gap bounds after verifying each one.
    pub fn with_bounds(
        items: Vec<Turbofunction>,
        bounds: Vec<f64>,
        tol: f64,
    ) -> Result<Self, CompletionError> {
        if items.is_empty() || bounds.len() + 1 != items.len() {
            return Err(CompletionError::BadParameter(
                "need one gap bound per consecutive pair".into(),
            ));
        }
        if !(tol > 0.0) {
            return Err(CompletionError::BadParameter(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        for (k, pair) in items.windows(2).enumerate() {
            let upper = rho_plus_bounds(&pair[0], &pair[1], tol)?.upper;
            if upper > bounds[k] + tol {
                return Err(CompletionError::Uncertifiable(format!(
                    "claimed gap bound {} at index {k} but certified upper bound is {}",
                    bounds[k], upper
                )));
            }
        }
        Ok(CauchySequence { items, gap_bounds: bounds })
    }

    pub fn items(&self) -> &[Turbofunction] {
        &self.items
    }

    pub fn gap_bounds(&self) -> &[f64] {
        &self.gap_bounds
    }
}

/// Output of [`cauchy_limit`]: an approximate limit with a certified residual.
#[derive(Debug, Clone)]
pub struct LimitReport {
    pub limit: Turbofunction,
    /// Certified upper bound on the semi-distance from the last used item
    /// (and hence from the limit representative) to the ideal limit.
    pub residual: f64,
    pub levels_used: usize,
    pub continuous: bool,
}

/// Build a limit representative from a certified Cauchy prefix.
///
/// A subsequence with geometrically decreasing certified gaps is selected;
/// for each consecutive pair a near-optimal witness warp is computed and the
/// warps are composed (`λ_{k+1} = γ_k ∘ λ_k`), so the reparametrized items
/// converge uniformly. The returned representative is the last selected item
/// composed with the accumulated warp; the residual is the remaining tail of
/// gap bounds plus accumulated witness slack.
pub fn cauchy_limit(seq: &CauchySequence, tol: f64) -> Result<LimitReport, CompletionError> {
    if !(tol > 0.0) {
        return Err(CompletionError::BadParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let n = seq.items.len();
    // tail[k] bounds the distance from item k to the ideal limit
    let mut tail = vec![0.0f64; n];
    for k in (0..n - 1).rev() {
        tail[k] = tail[k + 1] + seq.gap_bounds[k];
    }
    if tail[0].is_infinite() || tail.iter().any(|t| !t.is_finite()) {
        return Err(CompletionError::Uncertifiable("non-finite gap bounds".into()));
    }
    // selected subsequence: k-th entry is the first index whose tail is
    // below 2^{-(k+1)}, stopping once the tail fits the tolerance budget
    let mut chosen: Vec<usize> = Vec::new();
    let mut threshold = 0.5f64;
    loop {
        let idx = match tail.iter().position(|&t| t <= threshold) {
            Some(i) => i,
            None => {
                return Err(CompletionError::Uncertifiable(format!(
                    "no prefix item within {threshold} of the limit"
                )))
            }
        };
        if chosen.last() != Some(&idx) {
            chosen.push(idx);
        }
        if tail[idx] <= tol * 0.5 {
            break;
        }
        if idx == n - 1 {
            return Err(CompletionError::Uncertifiable(format!(
                "tail bound {} at the last item exceeds tol/2 = {}",
                tail[idx],
                tol * 0.5
            )));
        }
        threshold *= 0.5;
    }
    let mut lambda = Homeomorphism::identity();
    let mut slack = 0.0f64;
    for pair in chosen.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let cert = rho_plus_bounds(&seq.items[b], &seq.items[a], tol * 0.25)?;
        let certified_gap = tail[a] - tail[b];
        slack += (cert.upper - certified_gap).max(0.0);
        lambda = cert.witness.compose(&lambda);
    }
    let last = *chosen.last().unwrap();
    let limit = seq.items[last].compose_homeo(&lambda);
    let residual = tail[last] + slack;
    if residual > tol {
        return Err(CompletionError::Uncertifiable(format!(
            "residual {residual} exceeds tolerance {tol}"
        )));
    }
    let continuous = seq.items.iter().all(|x| x.is_continuous());
    debug_assert!(!continuous || limit.is_continuous());
    Ok(LimitReport { limit, residual, levels_used: chosen.len(), continuous })
}

/// Convergence class of a sample point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointClass {
    /// `s = 1`: visualizations always converge there.
    EndpointOne,
    /// Both continuity conditions hold; convergence is guaranteed.
    Good,
    /// σ⁻¹ or F fails the continuity condition; no convergence claim.
    Exceptional,
}

/// Per-sample diagnostics of `visualize(item_k)(s)` against the limit.
#[derive(Debug, Clone)]
pub struct PointReport {
    pub s: f64,
    pub class: PointClass,
    /// `|visualize(item_k)(s) − visualize(limit)(s)|` along the sequence.
    pub deviations: Vec<f64>,
    /// Final deviation at or below `tol` (only claimed for non-exceptional points).
    pub converged: bool,
}

/// Classify sample points and report visualization deviations along the tail.
pub fn pointwise_check(
    seq: &CauchySequence,
    limit: &Turbofunction,
    s_grid: &[f64],
    tol: f64,
) -> Result<Vec<PointReport>, CompletionError> {
    for &s in s_grid {
        if !(0.0..=1.0).contains(&s) {
            return Err(CompletionError::OutOfDomain(s));
        }
    }
    let limit_viz = visualize(limit);
    let inv = right_continuous_inverse(&limit.sigma);
    let vizzes: Vec<_> = seq.items.iter().map(visualize).collect();
    let flats = limit.sigma.flats();
    let mut out = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let class = if s == 1.0 {
            PointClass::EndpointOne
        } else if flats.iter().any(|&(_, _, level)| (level - s).abs() <= NODE_TOL) {
            // σ⁻¹ jumps at the levels of the flats of σ
            PointClass::Exceptional
        } else {
            let t = inv.evaluate(s).expect("sample inside domain");
            let jump_at_t = t > 0.0
                && (limit.f.evaluate(t).unwrap() - limit.f.left_limit(t).unwrap()).abs()
                    > NODE_TOL;
            if jump_at_t {
                PointClass::Exceptional
            } else {
                PointClass::Good
            }
        };
        let lv = limit_viz.evaluate(s).expect("sample inside domain");
        let deviations: Vec<f64> = vizzes
            .iter()
            .map(|v| (v.evaluate(s).unwrap() - lv).abs())
            .collect();
        let converged =
            class != PointClass::Exceptional && deviations.last().is_some_and(|&d| d <= tol);
        out.push(PointReport { s, class, deviations, converged });
    }
    Ok(out)
}
