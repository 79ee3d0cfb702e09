//! Certified distance computation.
//!
//! The Skorokhod distance and its extension to turbofunctions are infima over
//! an infinite-dimensional family of time warps; no closed form exists. This
//! module decides two-budget threshold queries exactly on the piecewise-linear
//! node structure (a free-space reachability computation whose cells are
//! convex, so interval propagation along cell edges loses nothing) and wraps
//! the decision procedure in a branch-and-bound search that returns certified
//! lower and upper bounds with an explicit witness warp.

use thiserror::Error;

use crate::piecewise::{
    merge_times, CadlagFunction, Homeomorphism, TimeChange,
};
use crate::turbo::{embed, Turbofunction};

/// Numerical widening applied to all free-space membership tests. Widening
/// only ever enlarges the feasible set, so "infeasible" answers (the source of
/// lower bounds) remain sound, while "feasible" answers are always re-verified
/// by exact recomputation of a concrete witness objective.
const WIDEN: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("invalid parameter: {0}")]
    BadParameter(String),
}

/// Budgets for the two summands of the distance objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdQuery {
    /// Budget for the sup of the function mismatch.
    pub eps_value: f64,
    /// Budget for the sup of the time (or time-change) mismatch.
    pub eps_time: f64,
}

impl ThresholdQuery {
    pub fn new(eps_value: f64, eps_time: f64) -> Result<Self, MetricError> {
        if !(eps_value.is_finite() && eps_value >= 0.0 && eps_time.is_finite() && eps_time >= 0.0)
        {
            return Err(MetricError::BadParameter(
                "budgets must be finite and non-negative".into(),
            ));
        }
        Ok(ThresholdQuery { eps_value, eps_time })
    }
}

/// Two-sided bound on an infimum-defined distance, with a checkable witness.
///
/// The witness maps the second argument's parameter into the first argument's
/// parameter; its independently recomputed objective is at most `upper`.
#[derive(Debug, Clone)]
pub struct DistanceCertificate {
    pub lower: f64,
    pub upper: f64,
    pub witness: Homeomorphism,
    pub grid_resolution: f64,
    pub exact: bool,
}

type Interval = (f64, f64);

fn intersect(a: Option<Interval>, b: Option<Interval>) -> Option<Interval> {
    let (a, b) = (a?, b?);
    let lo = a.0.max(b.0);
    let hi = a.1.min(b.1);
    (lo <= hi).then_some((lo, hi))
}

fn contains(iv: Option<Interval>, p: f64) -> bool {
    iv.is_some_and(|(lo, hi)| lo - 1e-15 <= p && p <= hi + 1e-15)
}

/// `{u in [lo, hi] : |A(u) - target| <= budget}` for the affine `A` going
/// from `v0` at `lo` to `v1` at `hi`.
fn affine_window(
    v0: f64,
    v1: f64,
    lo: f64,
    hi: f64,
    target: f64,
    budget: f64,
) -> Option<Interval> {
    let e = budget + WIDEN;
    let slope = v1 - v0;
    if slope.abs() < 1e-15 {
        return ((v0 - target).abs() <= e).then_some((lo, hi));
    }
    let u1 = lo + (target - e - v0) / slope * (hi - lo);
    let u2 = lo + (target + e - v0) / slope * (hi - lo);
    let (a, b) = if u1 <= u2 { (u1, u2) } else { (u2, u1) };
    let (a, b) = (a.max(lo), b.min(hi));
    (a <= b).then_some((a, b))
}

/// Exact free-space reachability for the two-budget threshold decision.
///
/// Rows are the parameter of `x`, columns the parameter of `y`; a warp `γ`
/// with both sups within budget corresponds to a monotone path from the
/// bottom-left to the top-right corner through the free region, and within a
/// cell of the node grid the free region is convex, so per-edge reachable
/// intervals are computed without loss.
struct FreeSpace {
    rg: Vec<f64>,
    tg: Vec<f64>,
    /// per r-segment: F₁ at the start (right value) and end (left value)
    rf: Vec<(f64, f64)>,
    rs: Vec<(f64, f64)>,
    tf: Vec<(f64, f64)>,
    ts: Vec<(f64, f64)>,
    ends_f: (f64, f64),
    starts_f: (f64, f64),
}

struct Reach {
    rv: Vec<Vec<Option<Interval>>>,
    rh: Vec<Vec<Option<Interval>>>,
}

impl FreeSpace {
    fn new(x: &Turbofunction, y: &Turbofunction, extra: &[f64]) -> FreeSpace {
        let seg_values = |f: &CadlagFunction, s: &TimeChange, grid: &[f64]| {
            let sc = s.as_cadlag();
            let mut fv = Vec::with_capacity(grid.len() - 1);
            let mut sv = Vec::with_capacity(grid.len() - 1);
            for w in grid.windows(2) {
                fv.push((f.evaluate(w[0]).unwrap(), f.left_limit(w[1]).unwrap()));
                sv.push((sc.evaluate(w[0]).unwrap(), sc.left_limit(w[1]).unwrap()));
            }
            (fv, sv)
        };
        let mut rg: Vec<f64> = x.f.node_times().collect();
        rg.extend(x.sigma.nodes().iter().map(|&(t, _)| t));
        rg.extend_from_slice(extra);
        let rg = merge_times(rg);
        let mut tg: Vec<f64> = y.f.node_times().collect();
        tg.extend(y.sigma.nodes().iter().map(|&(t, _)| t));
        tg.extend_from_slice(extra);
        let tg = merge_times(tg);
        let (rf, rs) = seg_values(&x.f, &x.sigma, &rg);
        let (tf, ts) = seg_values(&y.f, &y.sigma, &tg);
        FreeSpace {
            rg,
            tg,
            rf,
            rs,
            tf,
            ts,
            ends_f: (x.f.evaluate(1.0).unwrap(), y.f.evaluate(1.0).unwrap()),
            starts_f: (x.f.evaluate(0.0).unwrap(), y.f.evaluate(0.0).unwrap()),
        }
    }

    fn edges(
        &self,
        i: usize,
        j: usize,
        ev: f64,
        et: f64,
    ) -> (Option<Interval>, Option<Interval>, Option<Interval>, Option<Interval>) {
        let (rlo, rhi) = (self.rg[i], self.rg[i + 1]);
        let (tlo, thi) = (self.tg[j], self.tg[j + 1]);
        let (a0, a1) = self.rf[i];
        let (sa0, sa1) = self.rs[i];
        let (b0, b1) = self.tf[j];
        let (sb0, sb1) = self.ts[j];
        let fl = intersect(
            affine_window(a0, a1, rlo, rhi, b0, ev),
            affine_window(sa0, sa1, rlo, rhi, sb0, et),
        );
        let fb = intersect(
            affine_window(b0, b1, tlo, thi, a0, ev),
            affine_window(sb0, sb1, tlo, thi, sa0, et),
        );
        let fr = intersect(
            affine_window(a0, a1, rlo, rhi, b1, ev),
            affine_window(sa0, sa1, rlo, rhi, sb1, et),
        );
        let ft = intersect(
            affine_window(b0, b1, tlo, thi, a1, ev),
            affine_window(sb0, sb1, tlo, thi, sa1, et),
        );
        (fl, fb, fr, ft)
    }

    fn run(&self, ev: f64, et: f64) -> Option<Reach> {
        if (self.starts_f.0 - self.starts_f.1).abs() > ev + WIDEN {
            return None;
        }
        if (self.ends_f.0 - self.ends_f.1).abs() > ev + WIDEN {
            return None;
        }
        let (nr, nt) = (self.rg.len() - 1, self.tg.len() - 1);
        let mut rv: Vec<Vec<Option<Interval>>> = vec![vec![None; nt]; nr];
        let mut rh: Vec<Vec<Option<Interval>>> = vec![vec![None; nt]; nr];
        for i in 0..nr {
            for j in 0..nt {
                let (fl, fb, fr, ft) = self.edges(i, j, ev, et);
                let mut min_r = f64::INFINITY;
                let mut min_t = f64::INFINITY;
                if i == 0 && j == 0 {
                    min_r = 0.0;
                    min_t = 0.0;
                }
                if j > 0 {
                    if let Some(l) = intersect(rv[i][j - 1], fl) {
                        min_r = min_r.min(l.0);
                        min_t = min_t.min(self.tg[j]);
                    }
                }
                if i > 0 {
                    if let Some(b) = intersect(rh[i - 1][j], fb) {
                        min_t = min_t.min(b.0);
                        min_r = min_r.min(self.rg[i]);
                    }
                }
                if i > 0 && j > 0 {
                    let diag = contains(rv[i - 1][j - 1], self.rg[i])
                        || contains(rh[i - 1][j - 1], self.tg[j]);
                    if diag && contains(fl, self.rg[i]) {
                        min_r = min_r.min(self.rg[i]);
                        min_t = min_t.min(self.tg[j]);
                    }
                }
                if min_r.is_finite() {
                    rv[i][j] = fr.and_then(|(lo, hi)| {
                        let lo = lo.max(min_r);
                        (lo <= hi).then_some((lo, hi))
                    });
                    rh[i][j] = ft.and_then(|(lo, hi)| {
                        let lo = lo.max(min_t);
                        (lo <= hi).then_some((lo, hi))
                    });
                }
            }
        }
        let reached =
            contains(rv[nr - 1][nt - 1], 1.0) || contains(rh[nr - 1][nt - 1], 1.0);
        reached.then_some(Reach { rv, rh })
    }

    fn feasible(&self, ev: f64, et: f64) -> bool {
        self.run(ev, et).is_some()
    }

    /// Monotone waypoint polyline of one reachable path, bottom-left first.
    fn backtrack(&self, reach: &Reach, ev: f64, et: f64) -> Vec<(f64, f64)> {
        let (nr, nt) = (self.rg.len() - 1, self.tg.len() - 1);
        let mut pts = vec![(1.0f64, 1.0f64)];
        let (mut i, mut j) = (nr - 1, nt - 1);
        let mut p = (1.0f64, 1.0f64);
        loop {
            if i == 0 && j == 0 {
                pts.push((0.0, 0.0));
                break;
            }
            let (fl, fb, _, _) = self.edges(i, j, ev, et);
            let diag = i > 0
                && j > 0
                && (contains(reach.rv[i - 1][j - 1], self.rg[i])
                    || contains(reach.rh[i - 1][j - 1], self.tg[j]))
                && contains(fl, self.rg[i]);
            if diag {
                p = (self.tg[j], self.rg[i]);
                pts.push(p);
                i -= 1;
                j -= 1;
                continue;
            }
            let left = if j > 0 { intersect(reach.rv[i][j - 1], fl) } else { None };
            if let Some(l) = left {
                if l.0 <= p.1 + 1e-12 {
                    p = (self.tg[j], l.0.min(p.1));
                    pts.push(p);
                    j -= 1;
                    continue;
                }
            }
            let bottom = if i > 0 { intersect(reach.rh[i - 1][j], fb) } else { None };
            if let Some(b) = bottom {
                if b.0 <= p.0 + 1e-12 {
                    p = (b.0.min(p.0), self.rg[i]);
                    pts.push(p);
                    i -= 1;
                    continue;
                }
            }
            // numerically stranded; close the path directly
            pts.push((0.0, 0.0));
            break;
        }
        pts.reverse();
        pts
    }

    /// Turn a reachable configuration into a strictly increasing warp whose
    /// exact objective exceeds `ev + et` by at most a slope-proportional sliver.
    fn witness(&self, reach: &Reach, ev: f64, et: f64) -> Homeomorphism {
        let pts = self.backtrack(reach, ev, et);
        strictify(&pts, &self.tg, &self.rg)
    }
}

/// Break flat runs of a monotone polyline into strictly increasing ones by a
/// one-sided tilt so small that no node line of either function is crossed.
fn strictify(points: &[(f64, f64)], tg: &[f64], rg: &[f64]) -> Homeomorphism {
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for &p in points {
        if pts.last() != Some(&p) {
            pts.push(p);
        }
    }
    let ts: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let rs: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let ts = tilt(&ts, tg);
    let rs = tilt(&rs, rg);
    // a tilt smaller than one ulp cannot separate near-identical waypoints;
    // drop the earlier point of such a pair (the polyline moves by less than
    // the tilt width, and the objective is recomputed exactly afterwards)
    let mut nodes: Vec<(f64, f64)> = Vec::with_capacity(ts.len());
    for p in ts.into_iter().zip(rs) {
        while let Some(&q) = nodes.last() {
            if p.0 > q.0 && p.1 > q.1 {
                break;
            }
            nodes.pop();
        }
        nodes.push(p);
    }
    debug_assert!(nodes.first() == Some(&(0.0, 0.0)) && nodes.last() == Some(&(1.0, 1.0)));
    Homeomorphism::from_strict_nodes(nodes)
}

fn tilt(vals: &[f64], nodes: &[f64]) -> Vec<f64> {
    let n = vals.len();
    let mut out = vals.to_vec();
    let mut k = 0;
    while k < n {
        let mut l = k;
        while l + 1 < n && vals[l + 1] == vals[k] {
            l += 1;
        }
        if l > k {
            let c = vals[k];
            let span = (l - k) as f64;
            if c < 1.0 {
                let next_val = if l + 1 < n { vals[l + 1] } else { 1.0 };
                let next_node = nodes
                    .iter()
                    .find(|&&u| u > c + 1e-13)
                    .copied()
                    .unwrap_or(1.0);
                let w = ((next_val - c).min(next_node - c) * 0.49).min(1e-11);
                for (m, v) in out[k..=l].iter_mut().enumerate() {
                    *v = c + m as f64 * w / span;
                }
            } else {
                let prev_val = if k > 0 { vals[k - 1] } else { 0.0 };
                let prev_node = nodes
                    .iter()
                    .rev()
                    .find(|&&u| u < c - 1e-13)
                    .copied()
                    .unwrap_or(0.0);
                let w = ((c - prev_val).min(c - prev_node) * 0.49).min(1e-11);
                for (m, v) in out[k..=l].iter_mut().enumerate() {
                    *v = c - (l - (k + m)) as f64 * w / span;
                }
            }
        }
        k = l + 1;
    }
    out
}

/// Exact objective of a concrete warp: the checkable side of every certificate.
///
/// Computed directly from `(t, γ(t))` breakpoint pairs rather than through
/// [`CadlagFunction::compose_homeo`]: composition normalizes away segments
/// narrower than the node tolerance, which would silently drop the values the
/// first argument sweeps through inside a near-vertical witness segment and
/// understate the supremum.
pub fn objective(x: &Turbofunction, y: &Turbofunction, gamma: &Homeomorphism) -> f64 {
    // breakpoint pairs: γ's own nodes, y's node times pushed through γ, and
    // x's node times pulled back through each affine segment of γ exactly
    let mut pairs: Vec<(f64, f64)> = gamma.nodes().to_vec();
    let mut push = |t: f64| pairs.push((t, gamma.eval(t)));
    for t in y.f.node_times() {
        push(t);
    }
    for &(t, _) in y.sigma.nodes() {
        push(t);
    }
    let pull = |u: f64, pairs: &mut Vec<(f64, f64)>| {
        for w in gamma.nodes().windows(2) {
            let ((t0, r0), (t1, r1)) = (w[0], w[1]);
            if u > r0 && u < r1 {
                pairs.push((t0 + (t1 - t0) * (u - r0) / (r1 - r0), u));
            }
        }
    };
    for u in x.f.node_times() {
        pull(u, &mut pairs);
    }
    for &(u, _) in x.sigma.nodes() {
        pull(u, &mut pairs);
    }
    pairs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pairs.dedup();
    let (xs, ys) = (x.sigma.as_cadlag(), y.sigma.as_cadlag());
    let mut sup_f = 0.0f64;
    let mut sup_s = 0.0f64;
    for &(t, u) in &pairs {
        sup_f = sup_f.max((x.f.eval_unchecked(u) - y.f.eval_unchecked(t)).abs());
        sup_s = sup_s.max((xs.eval_unchecked(u) - ys.eval_unchecked(t)).abs());
        if t > 0.0 && u > 0.0 {
            sup_f = sup_f
                .max((x.f.left_limit_unchecked(u) - y.f.left_limit_unchecked(t)).abs());
        }
    }
    sup_f + sup_s
}

/// Decide whether some warp keeps `sup|f∘γ − g|` within `eps_value` and
/// `sup|id − γ|` within `eps_time` (in the closure sense: feasible answers
/// admit true warps within every positive slack of the budgets).
pub fn rho_decision(f: &CadlagFunction, g: &CadlagFunction, q: &ThresholdQuery) -> bool {
    let x = embed(f.clone());
    let y = embed(g.clone());
    FreeSpace::new(&x, &y, &[]).feasible(q.eps_value, q.eps_time)
}

/// Two-coordinate threshold decision for turbofunctions, with the warp grid
/// refined by multiples of `h` (the node structure is always included, so the
/// answer is exact regardless of `h`).
pub fn rho_plus_decision(
    x: &Turbofunction,
    y: &Turbofunction,
    q: &ThresholdQuery,
    h: f64,
) -> Result<bool, MetricError> {
    if !(h > 0.0) {
        return Err(MetricError::BadParameter(format!(
            "grid resolution must be positive, got {h}"
        )));
    }
    let steps = (1.0 / h).ceil().min(65_536.0) as usize;
    let extra: Vec<f64> = (1..steps).map(|k| k as f64 * h).collect();
    Ok(FreeSpace::new(x, y, &extra).feasible(q.eps_value, q.eps_time))
}

struct EtBounds {
    lo: f64,
    obj: f64,
    witness: Option<Homeomorphism>,
}

/// Minimal time budget at a fixed value budget, bracketed to `res`.
fn et_bounds(fs: &FreeSpace, x: &Turbofunction, y: &Turbofunction, ev: f64, res: f64) -> EtBounds {
    if !fs.feasible(ev, 1.0) {
        return EtBounds { lo: f64::INFINITY, obj: f64::INFINITY, witness: None };
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if fs.feasible(ev, 0.0) {
        hi = 0.0;
    } else {
        while hi - lo > res {
            let mid = 0.5 * (lo + hi);
            if fs.feasible(ev, mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    let reach = fs.run(ev, hi).expect("upper end of bracket is feasible");
    let gamma = fs.witness(&reach, ev, hi);
    let obj = objective(x, y, &gamma);
    EtBounds { lo, obj, witness: Some(gamma) }
}

/// Certified two-sided bounds for the semi-distance between turbofunctions.
///
/// A branch-and-bound ladder over the value budget: candidate budgets start
/// from all one-sided node-value differences (which are exhaustive for step
/// functions) and are refined by midpoint insertion. For every explored budget
/// the minimal time budget is bracketed by the exact decision procedure; the
/// lower bound follows from monotonicity of that bracket in the value budget,
/// the upper bound is always a recomputed witness objective.
pub fn rho_plus_bounds(
    x: &Turbofunction,
    y: &Turbofunction,
    tol: f64,
) -> Result<DistanceCertificate, MetricError> {
    if !(tol > 0.0) {
        return Err(MetricError::BadParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let fs = FreeSpace::new(x, y, &[]);
    let res = (tol / 16.0).max(1e-10);

    let mut cand: Vec<f64> = vec![0.0];
    for &v in &x.f.node_values() {
        for &w in &y.f.node_values() {
            cand.push((v - w).abs());
        }
    }
    cand.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cand.dedup_by(|a, b| (*a - *b).abs() <= 1e-14);
    if cand.len() > 512 {
        let last = *cand.last().unwrap();
        let stride = cand.len() / 511 + 1;
        let mut thin: Vec<f64> = cand.iter().step_by(stride).copied().collect();
        if *thin.last().unwrap() < last {
            thin.push(last);
        }
        cand = thin;
    }

    let mut memo: Vec<Option<EtBounds>> = (0..cand.len()).map(|_| None).collect();
    let mut best_obj = f64::INFINITY;
    let mut best_wit: Option<Homeomorphism> = None;
    let mut evals = 0usize;
    let max_evals = 240usize;
    let mut lower;
    loop {
        // certified lower bound: over each budget segment [e_i, e_{i+1}] the
        // objective is at least e_i plus the (monotone) minimal time budget
        // at e_{i+1}; unexplored budgets contribute their value part alone
        let seg_lower = |i: usize, memo: &[Option<EtBounds>]| -> f64 {
            let right = if i + 1 < cand.len() { i + 1 } else { i };
            cand[i] + memo[right].as_ref().map_or(0.0, |e| e.lo.min(1.0))
        };
        let mut min_i = 0;
        lower = f64::INFINITY;
        let top = if cand.len() > 1 { cand.len() - 1 } else { 1 };
        for i in 0..top {
            let sl = seg_lower(i, &memo);
            if sl < lower {
                lower = sl;
                min_i = i;
            }
        }
        lower = lower.min(best_obj);
        if best_obj - lower <= tol || evals >= max_evals {
            break;
        }
        // expand the weakest segment: evaluate its right end, then its left
        // end, then split it
        let right = (min_i + 1).min(cand.len() - 1);
        let target = if memo[right].is_none() {
            right
        } else if memo[min_i].is_none() {
            min_i
        } else {
            let width = cand[right] - cand[min_i];
            if width <= 1e-12 || right == min_i {
                // segment fully refined; the gap is the decision resolution
                break;
            }
            let mid = 0.5 * (cand[min_i] + cand[right]);
            cand.insert(right, mid);
            memo.insert(right, None);
            right
        };
        let e = et_bounds(&fs, x, y, cand[target], res);
        if e.obj < best_obj {
            best_obj = e.obj;
            best_wit = e.witness.clone();
        }
        memo[target] = Some(e);
        evals += 1;
    }
    let lower = lower.max(0.0).min(best_obj);
    let witness = best_wit.unwrap_or_else(Homeomorphism::identity);
    Ok(DistanceCertificate {
        lower,
        upper: best_obj,
        witness,
        grid_resolution: res,
        exact: best_obj - lower <= 1e-9,
    })
}

/// Certified bounds for the Skorokhod distance between ordinary functions,
/// via the isometric embedding with identity time changes.
pub fn rho_bounds(
    f: &CadlagFunction,
    g: &CadlagFunction,
    tol: f64,
) -> Result<DistanceCertificate, MetricError> {
    rho_plus_bounds(&embed(f.clone()), &embed(g.clone()), tol)
}

/// Exact Skorokhod distance between step functions.
///
/// For steps the value-budget ladder of node-value differences is exhaustive
/// and the minimal time budget snaps to a node-time difference, so the
/// infimum is computed exactly. Non-step input falls back to `rho_bounds`
/// with `exact = false`.
pub fn rho_step_exact(
    f: &CadlagFunction,
    g: &CadlagFunction,
) -> Result<DistanceCertificate, MetricError> {
    if !f.is_step() || !g.is_step() {
        let mut cert = rho_bounds(f, g, 1e-6)?;
        cert.exact = false;
        return Ok(cert);
    }
    let x = embed(f.clone());
    let y = embed(g.clone());
    let fs = FreeSpace::new(&x, &y, &[]);

    let mut cand: Vec<f64> = vec![0.0];
    for &v in &f.node_values() {
        for &w in &g.node_values() {
            cand.push((v - w).abs());
        }
    }
    cand.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cand.dedup_by(|a, b| (*a - *b).abs() <= 1e-14);
    let mut tdiff: Vec<f64> = vec![0.0];
    for s in f.node_times() {
        for u in g.node_times() {
            tdiff.push((s - u).abs());
        }
    }
    tdiff.sort_by(|a, b| a.partial_cmp(b).unwrap());
    tdiff.dedup_by(|a, b| (*a - *b).abs() <= 1e-14);

    let res = 1e-10;
    let mut best = f64::INFINITY;
    let mut best_budgets = (0.0, 0.0);
    for &ev in &cand {
        if ev >= best {
            break;
        }
        if !fs.feasible(ev, 1.0) {
            continue;
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        if fs.feasible(ev, 0.0) {
            hi = 0.0;
        } else {
            while hi - lo > res {
                let mid = 0.5 * (lo + hi);
                if fs.feasible(ev, mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
        }
        // snap the bracket to the time-difference lattice
        let snapped = tdiff
            .iter()
            .copied()
            .filter(|&d| d >= lo - 1e-9 && d <= hi + 1e-9)
            .find(|&d| fs.feasible(ev, d))
            .unwrap_or(hi);
        let val = ev + snapped;
        if val < best {
            best = val;
            best_budgets = (ev, snapped);
        }
    }
    let reach = fs
        .run(best_budgets.0, best_budgets.1)
        .expect("optimal budgets are feasible");
    let witness = fs.witness(&reach, best_budgets.0, best_budgets.1);
    let upper = objective(&x, &y, &witness);
    Ok(DistanceCertificate {
        lower: best,
        upper: upper.max(best),
        witness,
        grid_resolution: res,
        exact: upper.max(best) - best <= 1e-9,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piecewise::TimeChange;
    use crate::turbo::{triangle_family, triangle_limit, triangle_sigma, Turbofunction};

    fn step_half() -> CadlagFunction {
        CadlagFunction::step(&[0.5], &[0.0, 1.0]).unwrap()
    }

    fn step_sixty() -> CadlagFunction {
        CadlagFunction::step(&[0.6], &[0.0, 1.0]).unwrap()
    }

    #[test]
    fn decision_identity_zero_budgets() {
        let f = step_half();
        let q = ThresholdQuery::new(0.0, 0.0).unwrap();
        assert!(rho_decision(&f, &f, &q));
    }

    #[test]
    fn decision_step_shift() {
        let f = step_half();
        let g = step_sixty();
        assert!(rho_decision(&f, &g, &ThresholdQuery::new(0.0, 0.1).unwrap()));
        assert!(!rho_decision(&f, &g, &ThresholdQuery::new(0.0, 0.0999).unwrap()));
    }

    #[test]
    fn decision_constant_gap() {
        let f = CadlagFunction::constant(0.0);
        let g = CadlagFunction::constant(1.0);
        assert!(!rho_decision(&f, &g, &ThresholdQuery::new(0.999, 1.0).unwrap()));
        assert!(rho_decision(&f, &g, &ThresholdQuery::new(1.0, 0.0).unwrap()));
    }

    #[test]
    fn step_exact_self_distance() {
        let f = step_half();
        let cert = rho_step_exact(&f, &f).unwrap();
        assert_eq!(cert.lower, 0.0);
        assert!(cert.upper <= 1e-12);
        assert!(cert.exact);
    }

    #[test]
    fn step_exact_shift_is_tenth() {
        let cert = rho_step_exact(&step_half(), &step_sixty()).unwrap();
        assert!((cert.lower - 0.1).abs() < 1e-12, "lower = {}", cert.lower);
        assert!(cert.upper - 0.1 < 1e-9, "upper = {}", cert.upper);
        assert!(cert.exact);
    }

    #[test]
    fn step_exact_against_constant_zero() {
        // the unit jump cannot be warped away: value budget 1 is forced
        let cert = rho_step_exact(&step_half(), &CadlagFunction::constant(0.0)).unwrap();
        assert!((cert.lower - 1.0).abs() < 1e-12);
        assert!(cert.exact);
    }

    #[test]
    fn step_exact_symmetry() {
        let a = CadlagFunction::step(&[0.25, 0.5], &[0.0, 0.75, 0.25]).unwrap();
        let b = CadlagFunction::step(&[0.375], &[0.125, 0.5]).unwrap();
        let ab = rho_step_exact(&a, &b).unwrap();
        let ba = rho_step_exact(&b, &a).unwrap();
        assert!((ab.lower - ba.lower).abs() < 1e-9);
    }

    #[test]
    fn witness_objective_is_checkable() {
        let cert = rho_step_exact(&step_half(), &step_sixty()).unwrap();
        let x = embed(step_half());
        let y = embed(step_sixty());
        assert!(objective(&x, &y, &cert.witness) <= cert.upper + 1e-12);
    }

    #[test]
    fn bounds_zero_for_identical() {
        let x = triangle_limit();
        let cert = rho_plus_bounds(&x, &x, 1e-6).unwrap();
        assert_eq!(cert.lower, 0.0);
        assert!(cert.upper <= 1e-12);
    }

    #[test]
    fn bounds_bracket_step_distance() {
        let cert = rho_bounds(&step_half(), &step_sixty(), 1e-5).unwrap();
        assert!(cert.lower <= 0.1 + 1e-9, "lower = {}", cert.lower);
        assert!(cert.upper >= 0.1 - 1e-9, "upper = {}", cert.upper);
        assert!(cert.upper - 0.1 <= 1e-5, "upper = {}", cert.upper);
        assert!(0.1 - cert.lower <= 1e-5, "lower = {}", cert.lower);
    }

    #[test]
    fn bounds_triangle_pair() {
        let g4 = triangle_family(4.0).unwrap();
        let g8 = triangle_family(8.0).unwrap();
        let cert = rho_bounds(&g4, &g8, 1e-4).unwrap();
        assert!(cert.upper <= 0.125 + 1e-4, "upper = {}", cert.upper);
        assert!(cert.lower > 0.0, "lower = {}", cert.lower);
    }

    #[test]
    fn bounds_limit_example() {
        let theta = 8.0;
        let x = embed(triangle_family(theta).unwrap());
        let cert = rho_plus_bounds(&x, &triangle_limit(), 1e-3).unwrap();
        assert!(cert.upper <= 1.0 / theta + 1e-3, "upper = {}", cert.upper);
        assert!(cert.lower > 0.0, "lower = {}", cert.lower);
    }

    #[test]
    fn plus_decision_flat_sigma_example() {
        // constant function: a flat time change costs arbitrarily little
        let one = CadlagFunction::constant(1.0);
        let flat =
            TimeChange::new(vec![(0.0, 0.0), (0.25, 0.5), (0.75, 0.5), (1.0, 1.0)]).unwrap();
        let x = embed(one.clone());
        let y = Turbofunction::new(one, flat);
        for delta in [0.5, 0.1, 0.01, 1e-4] {
            let q = ThresholdQuery::new(0.0, delta).unwrap();
            assert!(rho_plus_decision(&x, &y, &q, 0.25).unwrap(), "delta = {delta}");
        }
    }

    #[test]
    fn plus_decision_triangle_sigma_bound() {
        let theta = 8.0;
        let x = embed(triangle_family(theta).unwrap());
        let y = Turbofunction::new(
            triangle_family(4.0).unwrap(),
            triangle_sigma(theta).unwrap(),
        );
        let q = ThresholdQuery::new(0.0, 1.0 / theta).unwrap();
        assert!(rho_plus_decision(&x, &triangle_limit(), &q, 1.0 / 64.0).unwrap());
        let q0 = ThresholdQuery::new(0.0, 0.0).unwrap();
        assert!(rho_plus_decision(&x, &y, &q0, 1.0 / 64.0).unwrap());
    }

    #[test]
    fn refinement_brackets_nest() {
        let g4 = triangle_family(4.0).unwrap();
        let g16 = triangle_family(16.0).unwrap();
        let coarse = rho_bounds(&g4, &g16, 1e-2).unwrap();
        let fine = rho_bounds(&g4, &g16, 1e-4).unwrap();
        assert!(fine.upper <= coarse.upper + 1e-12);
        assert!(fine.lower + 1e-12 >= coarse.lower);
        assert!(fine.upper - fine.lower <= 1e-4);
    }

    #[test]
    fn bad_parameters_rejected() {
        let f = CadlagFunction::constant(0.0);
        assert!(rho_bounds(&f, &f, 0.0).is_err());
        assert!(ThresholdQuery::new(-1.0, 0.0).is_err());
        let q = ThresholdQuery::new(0.0, 0.0).unwrap();
        assert!(rho_plus_decision(&embed(f.clone()), &embed(f), &q, 0.0).is_err());
    }
}

