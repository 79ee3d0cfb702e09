//! Piecewise-linear càdlàg functions, time changes, and homeomorphisms on `[0, 1]`.
//!
//! All values are represented by finite node lists and every operation
//! (evaluation, composition, suprema, total variation) is computed exactly on
//! the node structure, never by sampling.

use thiserror::Error;

/// Node times or values closer than this are merged during normalization.
pub const NODE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PiecewiseError {
    #[error("argument {0} outside the domain [0, 1]")]
    OutOfDomain(f64),
    #[error("no left limit at t = 0")]
    NoLeftLimitAtZero,
    #[error("invalid node list: {0}")]
    InvalidNodes(String),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
}

type Result<T> = std::result::Result<T, PiecewiseError>;

/// One node of a [`CadlagFunction`]: the function jumps from `left` to
/// `right` at `t` (no jump when the two coincide).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CadlagNode {
    pub t: f64,
    pub left: f64,
    pub right: f64,
}

impl CadlagNode {
    pub fn new(t: f64, left: f64, right: f64) -> Self {
        CadlagNode { t, left, right }
    }

    /// Node of a continuous point (no jump).
    pub fn point(t: f64, v: f64) -> Self {
        CadlagNode { t, left: v, right: v }
    }

    pub fn has_jump(&self) -> bool {
        (self.left - self.right).abs() > NODE_TOL
    }
}

/// A piecewise-linear càdlàg function on `[0, 1]`.
///
/// Between consecutive nodes the function is affine from the earlier node's
/// `right` value to the later node's `left` value. The value at a node time
/// is its `right` value (right-continuity); `f(1)` is the last node's `right`
/// value. Jumps are allowed at interior nodes and at `t = 1`, not at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CadlagFunction {
    nodes: Vec<CadlagNode>,
}

impl CadlagFunction {
    pub fn new(mut nodes: Vec<CadlagNode>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(PiecewiseError::InvalidNodes(
                "need at least nodes at t = 0 and t = 1".into(),
            ));
        }
        if nodes[0].t.abs() > NODE_TOL {
            return Err(PiecewiseError::InvalidNodes("first node must be at t = 0".into()));
        }
        if (nodes.last().unwrap().t - 1.0).abs() > NODE_TOL {
            return Err(PiecewiseError::InvalidNodes("last node must be at t = 1".into()));
        }
        nodes[0].t = 0.0;
        // no jump at 0: the value at 0 is the right value
        nodes[0].left = nodes[0].right;
        nodes.last_mut().unwrap().t = 1.0;
        for w in nodes.windows(2) {
            if w[1].t <= w[0].t {
                return Err(PiecewiseError::InvalidNodes(format!(
                    "node times must be strictly increasing ({} then {})",
                    w[0].t, w[1].t
                )));
            }
        }
        for n in &nodes {
            if !(n.t.is_finite() && n.left.is_finite() && n.right.is_finite()) {
                return Err(PiecewiseError::InvalidNodes("non-finite node".into()));
            }
        }
        Ok(CadlagFunction { nodes }.normalized())
    }

    /// Continuous piecewise-linear function through the given `(t, v)` points.
    pub fn from_points(points: &[(f64, f64)]) -> Result<Self> {
        Self::new(points.iter().map(|&(t, v)| CadlagNode::point(t, v)).collect())
    }

    pub fn constant(v: f64) -> Self {
        CadlagFunction {
            nodes: vec![CadlagNode::point(0.0, v), CadlagNode::point(1.0, v)],
        }
    }

    /// The identity ramp `f(t) = t`.
    pub fn identity() -> Self {
        CadlagFunction {
            nodes: vec![CadlagNode::point(0.0, 0.0), CadlagNode::point(1.0, 1.0)],
        }
    }

    /// Step function: `breaks` are the interior jump times and `values[i]` is
    /// the value on `[breaks[i-1], breaks[i])`.
    pub fn step(breaks: &[f64], values: &[f64]) -> Result<Self> {
        if values.len() != breaks.len() + 1 {
            return Err(PiecewiseError::InvalidNodes(
                "step needs one more value than breaks".into(),
            ));
        }
        let mut nodes = vec![CadlagNode::point(0.0, values[0])];
        for (i, &b) in breaks.iter().enumerate() {
            nodes.push(CadlagNode::new(b, values[i], values[i + 1]));
        }
        let last = *values.last().unwrap();
        nodes.push(CadlagNode::point(1.0, last));
        Self::new(nodes)
    }

    pub fn nodes(&self) -> &[CadlagNode] {
        &self.nodes
    }

    pub fn node_times(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().map(|n| n.t)
    }

    /// Right-continuous evaluation.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(PiecewiseError::OutOfDomain(t));
        }
        Ok(self.eval_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> f64 {
        let i = self.segment_index(t);
        let a = &self.nodes[i];
        if t <= a.t {
            return a.right;
        }
        let b = &self.nodes[i + 1];
        if t >= b.t {
            return b.right;
        }
        a.right + (t - a.t) / (b.t - a.t) * (b.left - a.right)
    }

    /// `lim_{u -> t-} f(u)`.
    pub fn left_limit(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Err(PiecewiseError::NoLeftLimitAtZero);
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(PiecewiseError::OutOfDomain(t));
        }
        Ok(self.left_limit_unchecked(t))
    }

    pub(crate) fn left_limit_unchecked(&self, t: f64) -> f64 {
        match self.nodes.binary_search_by(|n| n.t.partial_cmp(&t).unwrap()) {
            Ok(i) => self.nodes[i].left,
            Err(i) => {
                // t lies strictly inside segment (i-1, i)
                let a = &self.nodes[i - 1];
                let b = &self.nodes[i];
                a.right + (t - a.t) / (b.t - a.t) * (b.left - a.right)
            }
        }
    }

    /// Index `i` such that `t` lies in `[t_i, t_{i+1})` (last segment for t = 1).
    fn segment_index(&self, t: f64) -> usize {
        match self
            .nodes
            .binary_search_by(|n| n.t.partial_cmp(&t).unwrap())
        {
            Ok(i) => i.min(self.nodes.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.nodes.len() - 2),
        }
    }

    /// Canonical form: near-equal node times merged, tiny jumps closed,
    /// collinear jump-free interior nodes removed.
    pub fn normalized(&self) -> Self {
        let mut merged: Vec<CadlagNode> = Vec::with_capacity(self.nodes.len());
        for &n in &self.nodes {
            match merged.last_mut() {
                Some(last) if (n.t - last.t).abs() <= NODE_TOL => {
                    last.right = n.right;
                }
                _ => merged.push(n),
            }
        }
        for n in merged.iter_mut() {
            if (n.left - n.right).abs() <= NODE_TOL {
                n.left = n.right;
            }
        }
        merged[0].left = merged[0].right;
        // drop collinear interior nodes without jumps
        let mut out: Vec<CadlagNode> = vec![merged[0]];
        for i in 1..merged.len() {
            let n = merged[i];
            loop {
                if out.len() < 2 {
                    break;
                }
                let cand = out[out.len() - 1];
                if cand.left != cand.right {
                    break;
                }
                let prev = out[out.len() - 2];
                let interp =
                    prev.right + (cand.t - prev.t) / (n.t - prev.t) * (n.left - prev.right);
                if (interp - cand.right).abs() <= NODE_TOL {
                    out.pop();
                } else {
                    break;
                }
            }
            out.push(n);
        }
        CadlagFunction { nodes: out }
    }

    /// Node-list equality within `tol` on times and values; interior nodes
    /// within `tol` of the chord of their neighbours are ignored on both
    /// sides, so comparison is stable against float-noise nodes.
    pub fn approx_eq(&self, other: &CadlagFunction, tol: f64) -> bool {
        let a = &thin_collinear(self.normalized().nodes, tol);
        let b = &thin_collinear(other.normalized().nodes, tol);
        a.len() == b.len()
            && a.iter().zip(b.iter()).all(|(x, y)| {
                (x.t - y.t).abs() <= tol
                    && (x.left - y.left).abs() <= tol
                    && (x.right - y.right).abs() <= tol
            })
    }

    pub fn is_continuous(&self) -> bool {
        self.nodes.iter().all(|n| !n.has_jump())
    }

    /// True when every affine segment has zero slope.
    pub fn is_step(&self) -> bool {
        self.nodes
            .windows(2)
            .all(|w| (w[1].left - w[0].right).abs() <= NODE_TOL)
    }

    /// Interior jump positions with their one-sided values.
    pub fn jumps(&self) -> Vec<(f64, f64, f64)> {
        self.nodes
            .iter()
            .skip(1)
            .filter(|n| n.has_jump())
            .map(|n| (n.t, n.left, n.right))
            .collect()
    }

    /// One-sided values taken by the function at its nodes.
    pub fn node_values(&self) -> Vec<f64> {
        let mut vs = Vec::with_capacity(2 * self.nodes.len());
        for n in &self.nodes {
            vs.push(n.left);
            vs.push(n.right);
        }
        vs
    }

    /// Exact total variation on `[0, t]`.
    pub fn total_variation(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(PiecewiseError::OutOfDomain(t));
        }
        let mut v = 0.0;
        for i in 1..self.nodes.len() {
            let a = &self.nodes[i - 1];
            let b = &self.nodes[i];
            if t >= b.t {
                v += (b.left - a.right).abs() + (b.right - b.left).abs();
            } else {
                if t > a.t {
                    v += (self.eval_unchecked(t) - a.right).abs();
                }
                break;
            }
        }
        Ok(v)
    }

    /// Cumulative variation `t -> V_f(t)` as a càdlàg function (it jumps where
    /// `f` jumps, by the jump magnitude).
    pub fn variation_profile(&self) -> CadlagFunction {
        let mut v = 0.0;
        let mut nodes = vec![CadlagNode::point(0.0, 0.0)];
        for i in 1..self.nodes.len() {
            let a = &self.nodes[i - 1];
            let b = &self.nodes[i];
            let left = v + (b.left - a.right).abs();
            let right = left + (b.right - b.left).abs();
            nodes.push(CadlagNode::new(b.t, left, right));
            v = right;
        }
        CadlagFunction { nodes }
    }

    /// `(min, max)` of the closure of the value set of `f` on `[a, b]`
    /// (one-sided limit values included).
    pub fn value_range(&self, a: f64, b: f64) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut push = |v: f64| {
            lo = lo.min(v);
            hi = hi.max(v);
        };
        push(self.eval_unchecked(a));
        push(self.eval_unchecked(b));
        if b > a {
            push(self.left_limit_unchecked(b));
        }
        for n in &self.nodes {
            if n.t > a && n.t < b {
                push(n.left);
                push(n.right);
            }
        }
        (lo, hi)
    }

    /// Restriction of `f` to `[a, b]`, affinely rescaled onto `[0, 1]`.
    pub fn restrict_rescaled(&self, a: f64, b: f64) -> Result<CadlagFunction> {
        if !(0.0 <= a && a < b && b <= 1.0) {
            return Err(PiecewiseError::BadParameter(format!(
                "invalid interval [{a}, {b}]"
            )));
        }
        let scale = b - a;
        let mut nodes = vec![CadlagNode::point(0.0, self.eval_unchecked(a))];
        for n in &self.nodes {
            if n.t > a && n.t < b {
                nodes.push(CadlagNode::new((n.t - a) / scale, n.left, n.right));
            }
        }
        nodes.push(CadlagNode::new(
            1.0,
            self.left_limit_unchecked(b),
            self.eval_unchecked(b),
        ));
        // the t = 1 node may carry a jump; bypass the constructor's normalization
        // of closeness only, reuse validation
        CadlagFunction::new(nodes)
    }

    /// `f ∘ γ` with exact nodes.
    pub fn compose_homeo(&self, gamma: &Homeomorphism) -> CadlagFunction {
        // exact (t, γ(t)) pairs: γ's own nodes plus per-segment preimages of
        // this function's node times — evaluating γ at a round-tripped
        // preimage could land on the wrong side of a jump
        let mut pairs: Vec<(f64, f64)> = gamma.nodes().to_vec();
        for n in &self.nodes {
            for w in gamma.nodes().windows(2) {
                let ((t0, r0), (t1, r1)) = (w[0], w[1]);
                if n.t > r0 && n.t < r1 {
                    pairs.push((t0 + (t1 - t0) * (n.t - r0) / (r1 - r0), n.t));
                }
            }
        }
        pairs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pairs.dedup_by(|a, b| a.0 == b.0);
        let nodes = pairs
            .iter()
            .map(|&(t, u)| {
                let right = self.eval_unchecked(u);
                let left = if t > 0.0 && u > 0.0 {
                    self.left_limit_unchecked(u)
                } else {
                    right
                };
                CadlagNode::new(t, left, right)
            })
            .collect();
        CadlagFunction::new(nodes).expect("composition preserves invariants")
    }

    /// `f ∘ τ` for a non-decreasing càdlàg PL `τ` with values in `[0, 1]`.
    ///
    /// This is the general composition behind visualization: `τ` may have
    /// flat pieces (the result is locally constant) and jumps (values of `f`
    /// on the skipped interval disappear).
    pub fn compose_monotone(&self, inner: &CadlagFunction) -> CadlagFunction {
        let mut times: Vec<f64> = inner.nodes.iter().map(|n| n.t).collect();
        for fnode in &self.nodes {
            times.extend(inner.preimage_interval(fnode.t));
        }
        let times = merge_times(times);
        let nodes = times
            .iter()
            .map(|&s| {
                let u = clamp01(inner.eval_unchecked(s));
                let right = self.eval_unchecked(u);
                let left = if s <= 0.0 {
                    right
                } else {
                    let l = clamp01(inner.left_limit_unchecked(s));
                    if inner.flat_before(s) || l <= 0.0 {
                        self.eval_unchecked(l)
                    } else {
                        self.left_limit_unchecked(l)
                    }
                };
                CadlagNode::new(s, left, right)
            })
            .collect();
        CadlagFunction::new(nodes).expect("composition preserves invariants")
    }

    /// For non-decreasing `self`, the endpoints of `{s : self(s) = v}` or the
    /// time of the jump skipping `v`.
    fn preimage_interval(&self, v: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for i in 1..self.nodes.len() {
            let a = &self.nodes[i - 1];
            let b = &self.nodes[i];
            // crossing inside the segment (a.right -> b.left)
            if (a.right - v).abs() <= 0.0 || (a.right <= v && v <= b.left) {
                if b.left > a.right {
                    out.push(a.t + (v - a.right) / (b.left - a.right) * (b.t - a.t));
                } else if (a.right - v).abs() == 0.0 {
                    out.push(a.t);
                    out.push(b.t);
                }
            }
            // jump at b skipping over v
            if b.left <= v && v <= b.right {
                out.push(b.t);
            }
        }
        out
    }

    /// Whether `self` is constant on some interval `(s - eps, s)`.
    fn flat_before(&self, s: f64) -> bool {
        match self
            .nodes
            .binary_search_by(|n| n.t.partial_cmp(&s).unwrap())
        {
            Ok(0) => false,
            Ok(i) => self.nodes[i].left == self.nodes[i - 1].right,
            Err(i) => {
                let a = &self.nodes[i - 1];
                let b = &self.nodes[i];
                b.left == a.right
            }
        }
    }
}

/// Exact supremum of `|f - g|` over `[0, 1]`, including one-sided values at
/// every node of either function.
pub fn sup_distance(f: &CadlagFunction, g: &CadlagFunction) -> f64 {
    let mut times: Vec<f64> = f.node_times().collect();
    times.extend(g.node_times());
    let times = merge_times(times);
    let mut best: f64 = 0.0;
    for &u in &times {
        best = best.max((f.eval_unchecked(u) - g.eval_unchecked(u)).abs());
        if u > 0.0 {
            best = best.max((f.left_limit_unchecked(u) - g.left_limit_unchecked(u)).abs());
        }
    }
    best
}

/// A continuous non-decreasing piecewise-linear surjection of `[0, 1]`.
/// Flat segments encode instantons.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeChange {
    nodes: Vec<(f64, f64)>,
}

impl TimeChange {
    pub fn new(mut nodes: Vec<(f64, f64)>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(PiecewiseError::InvalidNodes("need at least two nodes".into()));
        }
        if nodes[0].0.abs() > NODE_TOL || nodes[0].1.abs() > NODE_TOL {
            return Err(PiecewiseError::InvalidNodes("first node must be (0, 0)".into()));
        }
        let last = *nodes.last().unwrap();
        if (last.0 - 1.0).abs() > NODE_TOL || (last.1 - 1.0).abs() > NODE_TOL {
            return Err(PiecewiseError::InvalidNodes("last node must be (1, 1)".into()));
        }
        nodes[0] = (0.0, 0.0);
        *nodes.last_mut().unwrap() = (1.0, 1.0);
        for w in nodes.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(PiecewiseError::InvalidNodes(
                    "times must be strictly increasing".into(),
                ));
            }
            if w[1].1 < w[0].1 - NODE_TOL {
                return Err(PiecewiseError::InvalidNodes(
                    "values must be non-decreasing".into(),
                ));
            }
        }
        let mut prev = 0.0f64;
        for n in nodes.iter_mut() {
            if n.1 < prev {
                n.1 = prev;
            }
            prev = n.1;
        }
        Ok(TimeChange { nodes }.normalized())
    }

    pub fn identity() -> Self {
        TimeChange { nodes: vec![(0.0, 0.0), (1.0, 1.0)] }
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    pub fn eval(&self, t: f64) -> f64 {
        eval_pl(&self.nodes, t)
    }

    pub fn normalized(&self) -> Self {
        TimeChange { nodes: normalize_pl(&self.nodes) }
    }

    pub fn approx_eq(&self, other: &TimeChange, tol: f64) -> bool {
        pl_approx_eq(
            &thin_pl(self.normalized().nodes, tol),
            &thin_pl(other.normalized().nodes, tol),
            tol,
        )
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.nodes.windows(2).all(|w| w[1].1 > w[0].1)
    }

    /// Maximal flat segments `(t_start, t_end, level)`.
    pub fn flats(&self) -> Vec<(f64, f64, f64)> {
        let mut out: Vec<(f64, f64, f64)> = Vec::new();
        for w in self.nodes.windows(2) {
            if w[1].1 == w[0].1 {
                match out.last_mut() {
                    Some(f) if f.1 == w[0].0 && f.2 == w[0].1 => f.1 = w[1].0,
                    _ => out.push((w[0].0, w[1].0, w[0].1)),
                }
            }
        }
        out
    }

    /// `σ ∘ γ`.
    pub fn compose_homeo(&self, gamma: &Homeomorphism) -> TimeChange {
        let inv = gamma.inverse();
        let mut times: Vec<f64> = gamma.nodes().iter().map(|&(t, _)| t).collect();
        times.extend(self.nodes.iter().map(|&(t, _)| inv.eval(t)));
        let times = merge_times(times);
        let nodes = times.iter().map(|&t| (t, self.eval(gamma.eval(t)))).collect();
        TimeChange::new(nodes).expect("composition preserves invariants")
    }

    /// `σ ∘ τ` for a continuous non-decreasing PL `τ` given by nodes.
    pub fn compose_timechange(&self, inner: &TimeChange) -> TimeChange {
        let mut times: Vec<f64> = inner.nodes.iter().map(|&(t, _)| t).collect();
        for &(u, _) in &self.nodes {
            let as_fn = inner.as_cadlag();
            times.extend(as_fn.preimage_interval(u));
        }
        let times = merge_times(times);
        let nodes = times
            .iter()
            .map(|&t| (t, self.eval(clamp01(inner.eval(t)))))
            .collect();
        TimeChange::new(nodes).expect("composition preserves invariants")
    }

    pub fn as_cadlag(&self) -> CadlagFunction {
        CadlagFunction::new(
            self.nodes
                .iter()
                .map(|&(t, s)| CadlagNode::point(t, s))
                .collect(),
        )
        .expect("time change nodes form a valid function")
    }
}

/// A strictly increasing piecewise-linear bijection of `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Homeomorphism {
    nodes: Vec<(f64, f64)>,
}

impl Homeomorphism {
    pub fn new(mut nodes: Vec<(f64, f64)>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(PiecewiseError::InvalidNodes("need at least two nodes".into()));
        }
        if nodes[0].0.abs() > NODE_TOL || nodes[0].1.abs() > NODE_TOL {
            return Err(PiecewiseError::InvalidNodes("first node must be (0, 0)".into()));
        }
        let last = *nodes.last().unwrap();
        if (last.0 - 1.0).abs() > NODE_TOL || (last.1 - 1.0).abs() > NODE_TOL {
            return Err(PiecewiseError::InvalidNodes("last node must be (1, 1)".into()));
        }
        nodes[0] = (0.0, 0.0);
        *nodes.last_mut().unwrap() = (1.0, 1.0);
        for w in nodes.windows(2) {
            if w[1].0 <= w[0].0 || w[1].1 <= w[0].1 {
                return Err(PiecewiseError::InvalidNodes(
                    "both coordinates must be strictly increasing".into(),
                ));
            }
        }
        Ok(Homeomorphism { nodes: normalize_pl(&nodes) })
    }

    /// Build from already strictly increasing nodes without merging nearby
    /// times, preserving segments far steeper than the normalization
    /// tolerance (needed by witness constructions).
    pub(crate) fn from_strict_nodes(nodes: Vec<(f64, f64)>) -> Homeomorphism {
        debug_assert!(nodes.len() >= 2);
        debug_assert!(nodes[0] == (0.0, 0.0) && *nodes.last().unwrap() == (1.0, 1.0));
        debug_assert!(nodes.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1));
        Homeomorphism { nodes }
    }

    pub fn identity() -> Self {
        Homeomorphism { nodes: vec![(0.0, 0.0), (1.0, 1.0)] }
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    pub fn eval(&self, t: f64) -> f64 {
        eval_pl(&self.nodes, t)
    }

    pub fn inverse(&self) -> Homeomorphism {
        let mut nodes: Vec<(f64, f64)> = self.nodes.iter().map(|&(t, u)| (u, t)).collect();
        nodes.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Homeomorphism { nodes: normalize_pl(&nodes) }
    }

    /// `self ∘ inner`, i.e. `t -> self(inner(t))`.
    pub fn compose(&self, inner: &Homeomorphism) -> Homeomorphism {
        let inner_inv = inner.inverse();
        let mut times: Vec<f64> = inner.nodes.iter().map(|&(t, _)| t).collect();
        times.extend(self.nodes.iter().map(|&(t, _)| inner_inv.eval(t)));
        let times = merge_times(times);
        let mut nodes: Vec<(f64, f64)> =
            times.iter().map(|&t| (t, self.eval(inner.eval(t)))).collect();
        // float noise can make consecutive outputs tie; nudge monotone
        for i in 1..nodes.len() {
            if nodes[i].1 <= nodes[i - 1].1 {
                nodes[i].1 = nodes[i - 1].1 + f64::EPSILON * 4.0;
            }
        }
        *nodes.last_mut().unwrap() = (1.0, 1.0);
        Homeomorphism::new(nodes).expect("composition of homeomorphisms")
    }

    pub fn as_timechange(&self) -> TimeChange {
        TimeChange { nodes: self.nodes.clone() }
    }

    pub fn as_cadlag(&self) -> CadlagFunction {
        self.as_timechange().as_cadlag()
    }

    pub fn approx_eq(&self, other: &Homeomorphism, tol: f64) -> bool {
        pl_approx_eq(
            &thin_pl(normalize_pl(&self.nodes), tol),
            &thin_pl(normalize_pl(&other.nodes), tol),
            tol,
        )
    }

    /// `sup_t |γ(t) - t|`.
    pub fn sup_deviation(&self) -> f64 {
        self.nodes
            .iter()
            .map(|&(t, u)| (u - t).abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Sorted union of times, deduplicated within `NODE_TOL`, clamped to `[0, 1]`.
pub fn merge_times(mut times: Vec<f64>) -> Vec<f64> {
    for t in times.iter_mut() {
        *t = clamp01(*t);
    }
    times.push(0.0);
    times.push(1.0);
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<f64> = Vec::with_capacity(times.len());
    for t in times {
        match out.last() {
            Some(&last) if t - last <= NODE_TOL => {}
            _ => out.push(t),
        }
    }
    if let Some(last) = out.last_mut() {
        if (*last - 1.0).abs() <= NODE_TOL {
            *last = 1.0;
        }
    }
    out
}

fn eval_pl(nodes: &[(f64, f64)], t: f64) -> f64 {
    if t <= nodes[0].0 {
        return nodes[0].1;
    }
    if t >= nodes[nodes.len() - 1].0 {
        return nodes[nodes.len() - 1].1;
    }
    let i = match nodes.binary_search_by(|n| n.0.partial_cmp(&t).unwrap()) {
        Ok(i) => return nodes[i].1,
        Err(i) => i,
    };
    let (t0, v0) = nodes[i - 1];
    let (t1, v1) = nodes[i];
    v0 + (t - t0) / (t1 - t0) * (v1 - v0)
}

/// Drop jump-free interior nodes lying within `tol` of the chord of their
/// neighbours. Used by [`CadlagFunction::approx_eq`].
fn thin_collinear(nodes: Vec<CadlagNode>, tol: f64) -> Vec<CadlagNode> {
    let mut out: Vec<CadlagNode> = vec![nodes[0]];
    for i in 1..nodes.len() {
        let n = nodes[i];
        while out.len() >= 2 {
            let cand = out[out.len() - 1];
            if cand.left != cand.right {
                break;
            }
            let prev = out[out.len() - 2];
            let interp = prev.right + (cand.t - prev.t) / (n.t - prev.t) * (n.left - prev.right);
            if (interp - cand.right).abs() <= tol {
                out.pop();
            } else {
                break;
            }
        }
        out.push(n);
    }
    out
}

/// PL analogue of [`thin_collinear`].
fn thin_pl(nodes: Vec<(f64, f64)>, tol: f64) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = vec![nodes[0]];
    for i in 1..nodes.len() {
        let n = nodes[i];
        while out.len() >= 2 {
            let cand = out[out.len() - 1];
            let prev = out[out.len() - 2];
            let interp = prev.1 + (cand.0 - prev.0) / (n.0 - prev.0) * (n.1 - prev.1);
            if (interp - cand.1).abs() <= tol {
                out.pop();
            } else {
                break;
            }
        }
        out.push(n);
    }
    out
}

fn normalize_pl(nodes: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(nodes.len());
    for &n in nodes {
        match merged.last() {
            Some(&(t, _)) if n.0 - t <= NODE_TOL => {}
            _ => merged.push(n),
        }
    }
    if let Some(last) = merged.last_mut() {
        *last = (1.0, 1.0);
    }
    let mut out: Vec<(f64, f64)> = vec![merged[0]];
    for i in 1..merged.len() {
        let n = merged[i];
        while out.len() >= 2 {
            let cand = out[out.len() - 1];
            let prev = out[out.len() - 2];
            let interp = prev.1 + (cand.0 - prev.0) / (n.0 - prev.0) * (n.1 - prev.1);
            if (interp - cand.1).abs() <= NODE_TOL {
                out.pop();
            } else {
                break;
            }
        }
        out.push(n);
    }
    out
}

fn pl_approx_eq(a: &[(f64, f64)], b: &[(f64, f64)], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b.iter())
            .all(|(x, y)| (x.0 - y.0).abs() <= tol && (x.1 - y.1).abs() <= tol)
}
