//! Turbofunctions: pairs (F, σ) of a càdlàg function and a time change.
//!
//! A flat segment of σ is an *instanton*: the function runs through a whole
//! trace of values at a single visualized time. Visualization composes F with
//! the right-continuous inverse of σ and therefore skips instantons.

use crate::metric;
use crate::piecewise::{
    clamp01, merge_times, CadlagFunction, CadlagNode, Homeomorphism, PiecewiseError, TimeChange,
    NODE_TOL,
};

/// A càdlàg function together with a time change on a shared domain `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Turbofunction {
    pub f: CadlagFunction,
    pub sigma: TimeChange,
}

/// A maximal flat segment of σ with the values F runs through on it.
#[derive(Debug, Clone)]
pub struct Instanton {
    /// Visualized time at which the instanton occurs (the flat level of σ).
    pub s: f64,
    /// Maximal parameter interval on which σ equals `s`.
    pub t_interval: (f64, f64),
    /// Min and max of F over the closed interval, one-sided values included.
    pub value_range: (f64, f64),
    /// Restriction of F to the interval, rescaled to `[0, 1]`.
    pub trace: CadlagFunction,
}

/// Outcome of the equivalence test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent,
    NotEquivalent,
    Unknown,
}

impl Turbofunction {
    pub fn new(f: CadlagFunction, sigma: TimeChange) -> Self {
        Turbofunction { f, sigma }
    }

    /// True iff F has no jumps (membership in the continuous subspace).
    pub fn is_continuous(&self) -> bool {
        self.f.is_continuous()
    }

    /// Reparametrize by a homeomorphism: `(F∘γ, σ∘γ)`.
    pub fn compose_homeo(&self, gamma: &Homeomorphism) -> Turbofunction {
        Turbofunction {
            f: self.f.compose_homeo(gamma),
            sigma: self.sigma.compose_homeo(gamma),
        }
    }

    pub fn visualize(&self) -> CadlagFunction {
        visualize(self)
    }

    pub fn instantons(&self) -> Vec<Instanton> {
        instantons(self)
    }
}

/// Embed an ordinary càdlàg function as a turbofunction with identity time.
pub fn embed(f: CadlagFunction) -> Turbofunction {
    Turbofunction { f, sigma: TimeChange::identity() }
}

/// `σ⁻¹(s) := max{t : σ(t) ≤ s}` as a càdlàg function.
///
/// Jumps occur exactly at the levels of σ's flat segments; a flat of σ ending
/// at `t = 1` makes the inverse jump at `s = 1`.
pub fn right_continuous_inverse(sigma: &TimeChange) -> CadlagFunction {
    let nodes = sigma.nodes();
    let mut out: Vec<CadlagNode> = Vec::new();
    let mut i = 0;
    while i < nodes.len() {
        let (t, s) = nodes[i];
        let mut j = i;
        while j + 1 < nodes.len() && nodes[j + 1].1 == s {
            j += 1;
        }
        let (t_end, _) = nodes[j];
        out.push(CadlagNode::new(s, t, t_end));
        i = j + 1;
    }
    CadlagFunction::new(out).expect("inverse of a time change is a valid function")
}

/// Visualization `F ∘ σ⁻¹`.
pub fn visualize(x: &Turbofunction) -> CadlagFunction {
    x.f.compose_monotone(&right_continuous_inverse(&x.sigma))
}

/// All instantons of `x`, ordered by their visualized time `s`.
pub fn instantons(x: &Turbofunction) -> Vec<Instanton> {
    x.sigma
        .flats()
        .into_iter()
        .map(|(a, b, s)| Instanton {
            s,
            t_interval: (a, b),
            value_range: x.f.value_range(a, b),
            trace: x
                .f
                .restrict_rescaled(a, b)
                .expect("flat segments are non-degenerate"),
        })
        .collect()
}

/// Strictly increasing regularization `σ_δ(t) = (1−δ)·σ(t) + δ·t`.
pub fn sigma_delta(sigma: &TimeChange, delta: f64) -> Result<TimeChange, PiecewiseError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(PiecewiseError::BadParameter(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let nodes = sigma
        .nodes()
        .iter()
        .map(|&(t, s)| (t, (1.0 - delta) * s + delta * t))
        .collect();
    TimeChange::new(nodes)
}

/// Maximal intervals on which σ is flat and F is constant, split at jumps of F.
fn doubly_constant_runs(f: &CadlagFunction, sigma: &TimeChange) -> Vec<(f64, f64)> {
    let mut times: Vec<f64> = f.node_times().collect();
    times.extend(sigma.nodes().iter().map(|&(t, _)| t));
    let times = merge_times(times);
    let mut runs: Vec<(f64, f64)> = Vec::new();
    for w in times.windows(2) {
        let (a, b) = (w[0], w[1]);
        let sigma_flat = (sigma.eval(b) - sigma.eval(a)).abs() <= NODE_TOL;
        let right_a = f.evaluate(a).expect("grid inside domain");
        let f_const = (right_a - f.left_limit_unchecked(b)).abs() <= NODE_TOL;
        if !(sigma_flat && f_const) {
            continue;
        }
        let continues = match runs.last() {
            Some(&(_, end)) if end == a => {
                (f.left_limit_unchecked(a) - right_a).abs() <= NODE_TOL
            }
            _ => false,
        };
        if continues {
            runs.last_mut().unwrap().1 = b;
        } else {
            runs.push((a, b));
        }
    }
    runs
}

/// Remove every doubly-constant run whose constant value connects to at least
/// one neighbouring value (or to the start of the domain), gluing the run to a
/// single point that keeps the surviving jump.
fn collapse(x: &Turbofunction) -> Turbofunction {
    let runs = doubly_constant_runs(&x.f, &x.sigma);
    let mut glue: Vec<(f64, f64)> = Vec::new();
    for &(a, b) in &runs {
        let c = x.f.evaluate(a).expect("run endpoint inside domain");
        let left_jump = if a == 0.0 {
            true
        } else {
            (x.f.left_limit_unchecked(a) - c).abs() > NODE_TOL
        };
        let right_jump = (x.f.evaluate(b).expect("run endpoint inside domain") - c).abs() > NODE_TOL;
        if !(left_jump && right_jump) {
            glue.push((a, b));
        }
    }
    if glue.is_empty() {
        return x.clone();
    }
    // merge glue intervals sharing an endpoint (adjacent runs split by a jump)
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for g in glue {
        match merged.last_mut() {
            Some(last) if last.1 >= g.0 => last.1 = g.1,
            _ => merged.push(g),
        }
    }
    let total: f64 = 1.0 - merged.iter().map(|&(a, b)| b - a).sum::<f64>();
    // glue map τ from the shortened domain back to the original, rescaled;
    // each glued interval becomes a jump of τ
    let mut tau_nodes: Vec<CadlagNode> = Vec::new();
    let mut acc = 0.0;
    let mut pos = 0.0;
    if merged[0].0 > 0.0 {
        tau_nodes.push(CadlagNode::point(0.0, 0.0));
    }
    for &(a, b) in &merged {
        acc += a - pos;
        tau_nodes.push(CadlagNode::new(acc / total, a, b));
        pos = b;
    }
    if pos < 1.0 {
        tau_nodes.push(CadlagNode::point(1.0, 1.0));
    }
    let tau = CadlagFunction::new(tau_nodes).expect("glue map is a valid function");
    let f = x.f.compose_monotone(&tau);
    let sigma_fn = x.sigma.as_cadlag().compose_monotone(&tau);
    Turbofunction { f, sigma: cadlag_to_timechange(&sigma_fn) }
}

fn cadlag_to_timechange(f: &CadlagFunction) -> TimeChange {
    TimeChange::new(f.nodes().iter().map(|n| (n.t, n.right)).collect())
        .expect("continuous monotone composition yields a time change")
}

/// Reparametrize by `ψ = (σ + V_F + μ) / (1 + V_F(1) + μ(1))` where V_F is the
/// cumulative variation of F and μ grows by one across each surviving
/// doubly-constant run. ψ is strictly increasing (with jumps at the jumps of
/// F); composing with its generalized inverse normalizes all segment lengths.
fn reparametrize(x: &Turbofunction) -> Turbofunction {
    let runs = doubly_constant_runs(&x.f, &x.sigma);
    let v = x.f.variation_profile();
    let mut mu_nodes: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    let mut level = 0.0;
    for &(a, b) in &runs {
        if a > mu_nodes.last().unwrap().0 {
            mu_nodes.push((a, level));
        }
        level += 1.0;
        mu_nodes.push((b, level));
    }
    if mu_nodes.last().unwrap().0 < 1.0 {
        mu_nodes.push((1.0, level));
    }
    let mu = CadlagFunction::new(
        mu_nodes.into_iter().map(|(t, s)| CadlagNode::point(t, s)).collect(),
    )
    .expect("mu is a valid function");

    let norm = 1.0 + v.evaluate(1.0).unwrap() + level;
    let mut times: Vec<f64> = x.f.node_times().collect();
    times.extend(x.sigma.nodes().iter().map(|&(t, _)| t));
    times.extend(mu.node_times());
    let times = merge_times(times);
    let mut psi_nodes: Vec<CadlagNode> = Vec::with_capacity(times.len());
    for &t in &times {
        let right = (x.sigma.eval(t) + v.evaluate(t).unwrap() + mu.evaluate(t).unwrap()) / norm;
        let left = if t == 0.0 {
            right
        } else {
            (x.sigma.eval(t) + v.left_limit_unchecked(t) + mu.evaluate(t).unwrap()) / norm
        };
        psi_nodes.push(CadlagNode::new(t, clamp01(left), clamp01(right)));
    }
    psi_nodes.last_mut().unwrap().right = 1.0;
    let psi = CadlagFunction::new(psi_nodes).expect("psi is a valid function");
    let psi_inv = increasing_inverse(&psi);
    let f = x.f.compose_monotone(&psi_inv.as_cadlag());
    let sigma = x.sigma.compose_timechange(&psi_inv);
    Turbofunction { f, sigma }
}

/// Generalized inverse of a strictly increasing càdlàg function fixing 0 and 1:
/// continuous, with a flat over each jump of the input.
fn increasing_inverse(psi: &CadlagFunction) -> TimeChange {
    let mut nodes: Vec<(f64, f64)> = Vec::new();
    for n in psi.nodes() {
        if n.has_jump() {
            nodes.push((n.left.min(n.right), n.t));
            nodes.push((n.left.max(n.right), n.t));
        } else {
            nodes.push((n.right, n.t));
        }
    }
    TimeChange::new(nodes).expect("inverse of a strictly increasing function")
}

/// Canonical representative of the reparametrization class of `x`.
///
/// Doubly-constant stretches that carry no trace information are collapsed,
/// then the parametrization is normalized so that equal classes yield equal
/// node lists. The result is a fixed point of this map.
pub fn canonicalize(x: &Turbofunction) -> Turbofunction {
    let y = collapse(x);
    let z = reparametrize(&y);
    collapse(&z)
}

/// Three-valued equivalence test: canonical-form equality certifies
/// equivalence; a positive certified lower bound of the semi-distance
/// certifies non-equivalence; otherwise unknown.
pub fn is_equivalent(x: &Turbofunction, y: &Turbofunction) -> Equivalence {
    let cx = canonicalize(x);
    let cy = canonicalize(y);
    if cx.f.approx_eq(&cy.f, 1e-7) && cx.sigma.approx_eq(&cy.sigma, 1e-7) {
        return Equivalence::Equivalent;
    }
    match metric::rho_plus_bounds(x, y, 1e-4) {
        Ok(cert) if cert.lower > 1e-7 => Equivalence::NotEquivalent,
        _ => Equivalence::Unknown,
    }
}

/// Triangle pulse `g_θ(s) = (1 − |θ(s − 1/2)|)₊` for `θ > 2`.
pub fn triangle_family(theta: f64) -> Result<CadlagFunction, PiecewiseError> {
    if !(theta > 2.0) {
        return Err(PiecewiseError::BadParameter(format!(
            "theta must exceed 2, got {theta}"
        )));
    }
    CadlagFunction::from_points(&[
        (0.0, 0.0),
        (0.5 - 1.0 / theta, 0.0),
        (0.5, 1.0),
        (0.5 + 1.0 / theta, 0.0),
        (1.0, 0.0),
    ])
}

/// The time change carrying the fixed triangle `g₄` onto `g_θ`:
/// nodes (0,0), (1/4, 1/2−1/θ), (3/4, 1/2+1/θ), (1,1).
pub fn triangle_sigma(theta: f64) -> Result<TimeChange, PiecewiseError> {
    if !(theta > 2.0) {
        return Err(PiecewiseError::BadParameter(format!(
            "theta must exceed 2, got {theta}"
        )));
    }
    TimeChange::new(vec![
        (0.0, 0.0),
        (0.25, 0.5 - 1.0 / theta),
        (0.75, 0.5 + 1.0 / theta),
        (1.0, 1.0),
    ])
}

/// The limit of the triangle family: `(g₄, σ)` with σ flat at 1/2 on [1/4, 3/4].
pub fn triangle_limit() -> Turbofunction {
    let f = triangle_family(4.0).expect("4 > 2");
    let sigma = TimeChange::new(vec![(0.0, 0.0), (0.25, 0.5), (0.75, 0.5), (1.0, 1.0)])
        .expect("valid nodes");
    Turbofunction { f, sigma }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piecewise::sup_distance;

    fn flat_sigma() -> TimeChange {
        TimeChange::new(vec![(0.0, 0.0), (0.25, 0.5), (0.75, 0.5), (1.0, 1.0)]).unwrap()
    }

    #[test]
    fn embed_has_identity_time() {
        let x = embed(triangle_family(4.0).unwrap());
        assert!(x.sigma.approx_eq(&TimeChange::identity(), 0.0));
        assert!(x.is_continuous());
    }

    #[test]
    fn inverse_of_identity() {
        let inv = right_continuous_inverse(&TimeChange::identity());
        assert!(inv.approx_eq(&CadlagFunction::identity(), 1e-12));
    }

    #[test]
    fn inverse_of_flat_sigma() {
        let inv = right_continuous_inverse(&flat_sigma());
        // value at the flat level is the right end of the flat
        assert_eq!(inv.evaluate(0.5).unwrap(), 0.75);
        // just below the flat level the affine piece s = 2t inverts to s/2
        let s = 0.5 - 1e-6;
        assert!((inv.evaluate(s).unwrap() - s / 2.0).abs() < 1e-12);
        assert!((inv.left_limit(0.5).unwrap() - 0.25).abs() < 1e-12);
        assert_eq!(inv.evaluate(1.0).unwrap(), 1.0);
    }

    #[test]
    fn inverse_section_identity_on_grid() {
        let sigmas = [flat_sigma(), triangle_sigma(8.0).unwrap(), TimeChange::identity()];
        for sigma in &sigmas {
            let inv = right_continuous_inverse(sigma);
            for k in 0..=10_000 {
                let s = k as f64 / 10_000.0;
                let t = inv.evaluate(s).unwrap();
                assert!(
                    (sigma.eval(t) - s).abs() < 1e-12,
                    "sigma(inverse({s})) = {} != {s}",
                    sigma.eval(t)
                );
            }
        }
    }

    #[test]
    fn visualize_embedding_is_identity_map() {
        let f = triangle_family(4.0).unwrap();
        assert!(visualize(&embed(f.clone())).approx_eq(&f, 1e-12));
    }

    #[test]
    fn visualize_limit_is_zero() {
        let viz = visualize(&triangle_limit());
        assert!(sup_distance(&viz, &CadlagFunction::constant(0.0)) <= 1e-12);
    }

    #[test]
    fn visualize_sigma_theta_recovers_triangle() {
        for theta in [4.0, 8.0, 32.0] {
            let x = Turbofunction::new(
                triangle_family(4.0).unwrap(),
                triangle_sigma(theta).unwrap(),
            );
            let viz = visualize(&x);
            let expect = triangle_family(theta).unwrap();
            assert!(
                sup_distance(&viz, &expect) < 1e-12,
                "theta = {theta}: sup distance {}",
                sup_distance(&viz, &expect)
            );
        }
    }

    #[test]
    fn instantons_of_limit() {
        let inst = instantons(&triangle_limit());
        assert_eq!(inst.len(), 1);
        assert_eq!(inst[0].s, 0.5);
        assert_eq!(inst[0].t_interval, (0.25, 0.75));
        assert_eq!(inst[0].value_range, (0.0, 1.0));
        assert_eq!(inst[0].trace.evaluate(0.5).unwrap(), 1.0);
    }

    #[test]
    fn instantons_empty_for_strictly_increasing() {
        assert!(instantons(&embed(CadlagFunction::constant(1.0))).is_empty());
        let two = TimeChange::new(vec![
            (0.0, 0.0),
            (0.1, 0.3),
            (0.3, 0.3),
            (0.5, 0.7),
            (0.7, 0.7),
            (1.0, 1.0),
        ])
        .unwrap();
        let x = Turbofunction::new(CadlagFunction::identity(), two);
        let inst = instantons(&x);
        assert_eq!(inst.len(), 2);
        assert_eq!(inst[0].s, 0.3);
        assert_eq!(inst[1].s, 0.7);
    }

    #[test]
    fn sigma_delta_values() {
        let sd = sigma_delta(&flat_sigma(), 0.1).unwrap();
        let expect =
            TimeChange::new(vec![(0.0, 0.0), (0.25, 0.475), (0.75, 0.525), (1.0, 1.0)]).unwrap();
        assert!(sd.approx_eq(&expect, 1e-12));
        assert!(sd.is_strictly_increasing());
        // uniform bound sup|σ_δ − σ| ≤ δ
        let mut worst: f64 = 0.0;
        for k in 0..=1000 {
            let t = k as f64 / 1000.0;
            worst = worst.max((sd.eval(t) - flat_sigma().eval(t)).abs());
        }
        assert!(worst <= 0.1 + 1e-12);
        assert!((worst - 0.025).abs() < 1e-12);
        assert!(sigma_delta(&flat_sigma(), 0.0).is_err());
        assert!(sigma_delta(&flat_sigma(), 1.0).is_err());
    }

    #[test]
    fn sigma_delta_identity_fixed_point() {
        let sd = sigma_delta(&TimeChange::identity(), 0.3).unwrap();
        assert!(sd.approx_eq(&TimeChange::identity(), 1e-12));
    }

    #[test]
    fn canonicalize_collapses_constant_instanton() {
        // constant 1 with a flat sigma collapses to (constant 1, identity)
        let x = Turbofunction::new(CadlagFunction::constant(1.0), flat_sigma());
        let c = canonicalize(&x);
        assert!(c.f.approx_eq(&CadlagFunction::constant(1.0), 1e-9));
        assert!(c.sigma.approx_eq(&TimeChange::identity(), 1e-9));
        let e = canonicalize(&embed(CadlagFunction::constant(1.0)));
        assert!(c.f.approx_eq(&e.f, 1e-9));
        assert!(c.sigma.approx_eq(&e.sigma, 1e-9));
    }

    #[test]
    fn canonicalize_is_idempotent() {
        let cases = vec![
            triangle_limit(),
            Turbofunction::new(CadlagFunction::constant(1.0), flat_sigma()),
            Turbofunction::new(
                CadlagFunction::step(&[0.3, 0.5], &[0.0, 1.0, 0.25]).unwrap(),
                flat_sigma(),
            ),
            embed(CadlagFunction::step(&[0.5], &[0.0, 1.0]).unwrap()),
        ];
        for x in cases {
            let c1 = canonicalize(&x);
            let c2 = canonicalize(&c1);
            assert!(c1.f.approx_eq(&c2.f, 1e-9), "{:?}\nvs\n{:?}", c1.f, c2.f);
            assert!(
                c1.sigma.approx_eq(&c2.sigma, 1e-9),
                "{:?}\nvs\n{:?}",
                c1.sigma,
                c2.sigma
            );
        }
    }

    #[test]
    fn canonicalize_invariant_under_reparametrization() {
        let gamma =
            Homeomorphism::new(vec![(0.0, 0.0), (0.2, 0.5), (0.6, 0.7), (1.0, 1.0)]).unwrap();
        for x in [triangle_limit(), embed(triangle_family(8.0).unwrap())] {
            let c1 = canonicalize(&x);
            let c2 = canonicalize(&x.compose_homeo(&gamma));
            assert!(c1.f.approx_eq(&c2.f, 1e-9));
            assert!(c1.sigma.approx_eq(&c2.sigma, 1e-9));
        }
    }

    #[test]
    fn canonicalize_preserves_interior_trace() {
        // a staircase inside an instanton must not lose its middle value
        let f = CadlagFunction::step(&[0.3, 0.5], &[0.0, 1.0, 2.0]).unwrap();
        let sigma =
            TimeChange::new(vec![(0.0, 0.0), (0.2, 0.5), (0.8, 0.5), (1.0, 1.0)]).unwrap();
        let c = canonicalize(&Turbofunction::new(f, sigma));
        let (lo, hi) = c.f.value_range(0.0, 1.0);
        assert_eq!((lo, hi), (0.0, 2.0));
        // and the 0 -> 1 -> 2 staircase is not equivalent to a single 0 -> 2 jump
        let g = CadlagFunction::step(&[0.3], &[0.0, 2.0]).unwrap();
        let sigma2 =
            TimeChange::new(vec![(0.0, 0.0), (0.2, 0.5), (0.8, 0.5), (1.0, 1.0)]).unwrap();
        let d = canonicalize(&Turbofunction::new(g, sigma2));
        assert!(!c.f.approx_eq(&d.f, 1e-9));
    }

    #[test]
    fn triangle_family_values() {
        let g4 = triangle_family(4.0).unwrap();
        assert_eq!(g4.evaluate(0.5).unwrap(), 1.0);
        assert_eq!(g4.evaluate(0.25).unwrap(), 0.0);
        assert_eq!(g4.evaluate(0.75).unwrap(), 0.0);
        let g8 = triangle_family(8.0).unwrap();
        assert!((g8.evaluate(0.4).unwrap() - 0.2).abs() < 1e-12);
        assert!(triangle_family(2.0).is_err());
        assert!((triangle_sigma(8.0).unwrap().eval(0.25) - 0.375).abs() < 1e-12);
        assert!(triangle_sigma(1.5).is_err());
    }
}
