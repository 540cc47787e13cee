//! Walk encodings: height processes of plane trees, mapping-walks with
//! basin-completion marks and cyclic-point counts, weight time-changes, and
//! path distances.
//!
//! Walks are closed-form step objects rather than grid samples, so every
//! discrete identity can be checked exactly.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::discrete::{
    basin_decomposition, BasinDecomposition, Mapping, PlaneTree, RawDecomposition,
};
use crate::error::{Error, Result};
use crate::util::{neumaier_sum, prefix_sums};

/// Tolerance used when merging step boundaries of two walks.
pub const BOUNDARY_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// StepFunction
// ---------------------------------------------------------------------------

/// A right-continuous piecewise-constant path with per-step widths, values,
/// optional vertex tags, and named mark lists.
///
/// Evaluation at `t` returns the value of the step containing `t`, with
/// `f(total) = ` last value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    widths: Vec<f64>,
    values: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    tags: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    marks: BTreeMap<String, Vec<f64>>,
}

impl StepFunction {
    pub fn new(widths: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if widths.is_empty() || widths.len() != values.len() {
            return Err(Error::WeightMismatch(format!(
                "{} widths vs {} values",
                widths.len(),
                values.len()
            )));
        }
        if widths
            .iter()
            .any(|&w| w.is_nan() || w <= 0.0 || !w.is_finite())
        {
            return Err(Error::WeightMismatch("widths must be positive".into()));
        }
        Ok(Self {
            widths,
            values,
            tags: None,
            marks: BTreeMap::new(),
        })
    }

    pub fn with_tags(mut self, tags: Vec<usize>) -> Self {
        assert_eq!(tags.len(), self.widths.len());
        self.tags = Some(tags);
        self
    }

    pub fn set_mark(&mut self, name: &str, positions: Vec<f64>) {
        self.marks.insert(name.to_string(), positions);
    }

    pub fn mark(&self, name: &str) -> Option<&[f64]> {
        self.marks.get(name).map(|v| v.as_slice())
    }

    pub fn n_steps(&self) -> usize {
        self.widths.len()
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tags(&self) -> Option<&[usize]> {
        self.tags.as_deref()
    }

    pub fn total(&self) -> f64 {
        neumaier_sum(&self.widths)
    }

    /// Step boundaries: prefix sums of the widths, `n + 1` entries.
    pub fn bounds(&self) -> Vec<f64> {
        prefix_sums(&self.widths)
    }

    /// Index of the step containing `t` (right-continuous; `t = total` maps
    /// to the last step).
    pub fn step_index_of(&self, t: f64) -> Result<usize> {
        let bounds = self.bounds();
        let total = *bounds.last().unwrap();
        if !(0.0..=total).contains(&t) {
            return Err(Error::OutOfRange { value: t, total });
        }
        // First boundary strictly greater than t; the step left of it.
        let idx = match bounds[1..].binary_search_by(|b| b.partial_cmp(&t).unwrap()) {
            Ok(k) => k + 1,
            Err(k) => k,
        };
        Ok(idx.min(self.widths.len() - 1))
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        Ok(self.values[self.step_index_of(t)?])
    }

    /// Same path with adjacent equal-valued steps merged and tags dropped.
    /// This is the normal form used for function-level comparisons.
    pub fn merged(&self) -> StepFunction {
        let mut widths = Vec::with_capacity(self.widths.len());
        let mut values = Vec::with_capacity(self.values.len());
        for (&w, &v) in self.widths.iter().zip(&self.values) {
            if values.last() == Some(&v) {
                *widths.last_mut().unwrap() += w;
            } else {
                widths.push(w);
                values.push(v);
            }
        }
        StepFunction {
            widths,
            values,
            tags: None,
            marks: BTreeMap::new(),
        }
    }

    /// Exact function equality up to a width tolerance: merged forms must
    /// have identical values and step boundaries within `width_tol`.
    pub fn function_eq(&self, other: &StepFunction, width_tol: f64) -> bool {
        let a = self.merged();
        let b = other.merged();
        if a.values != b.values {
            return false;
        }
        let ba = a.bounds();
        let bb = b.bounds();
        ba.iter().zip(&bb).all(|(x, y)| (x - y).abs() <= width_tol)
    }

    /// Pointwise shift of all values.
    pub fn shifted(&self, delta: f64) -> StepFunction {
        let mut out = self.clone();
        for v in &mut out.values {
            *v += delta;
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Depth-first order and height walks
// ---------------------------------------------------------------------------

/// Depth-first vertex order of a plane tree: the root, then recursively the
/// subtrees of its children oldest-first.
pub fn depth_first(pt: &PlaneTree) -> Vec<usize> {
    let mut order = Vec::with_capacity(pt.n());
    let mut stack = vec![pt.root()];
    while let Some(v) = stack.pop() {
        order.push(v);
        for &c in pt.children_of(v).iter().rev() {
            stack.push(c);
        }
    }
    order
}

/// The height process of a plane tree: step `i` has width `w[v_i]` and value
/// `ht(v_i)`, with the vertex visited at each step recorded in the tags.
pub fn tree_height_walk(pt: &PlaneTree, w: &[f64]) -> Result<StepFunction> {
    check_weights(w, pt.n())?;
    let order = depth_first(pt);
    let heights = pt.tree().heights();
    let widths: Vec<f64> = order.iter().map(|&v| w[v - 1]).collect();
    let values: Vec<f64> = order.iter().map(|&v| heights[v - 1] as f64).collect();
    Ok(StepFunction::new(widths, values)?.with_tags(order))
}

fn check_weights(w: &[f64], n: usize) -> Result<()> {
    if w.len() != n {
        return Err(Error::WeightMismatch(format!(
            "{} weights for {n} labels",
            w.len()
        )));
    }
    if w.iter().any(|&x| x.is_nan() || x <= 0.0) {
        return Err(Error::WeightMismatch("weights must be positive".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Plane orders on the tree components of a mapping
// ---------------------------------------------------------------------------

/// Ordered children lists for the tree components `T_c` of a decomposition.
#[derive(Debug, Clone)]
pub struct PlaneOrders {
    children: Vec<Vec<usize>>,
}

impl PlaneOrders {
    /// Independent uniform order per vertex (the exchangeable order used when
    /// a mapping is studied on its own).
    pub fn randomized<R: Rng>(raw: &RawDecomposition, rng: &mut R) -> Self {
        let mut children = raw.component_children();
        for list in &mut children {
            for i in (1..list.len()).rev() {
                let j = rng.random_range(0..=i);
                list.swap(i, j);
            }
        }
        Self { children }
    }

    /// Children orders inherited by restriction from a global plane tree:
    /// each vertex keeps its global order, filtered to its own component.
    pub fn restricted(global: &PlaneTree, raw: &RawDecomposition) -> Self {
        let children = (1..=raw.n())
            .map(|v| {
                global
                    .children_of(v)
                    .iter()
                    .copied()
                    .filter(|&c| raw.tree_root_of[c - 1] == raw.tree_root_of[v - 1])
                    .collect()
            })
            .collect();
        Self { children }
    }

    pub fn children_of(&self, v: usize) -> &[usize] {
        &self.children[v - 1]
    }
}

// ---------------------------------------------------------------------------
// Mapping walks
// ---------------------------------------------------------------------------

/// Basin-completion times and the cyclic-point counting process.
#[derive(Debug, Clone)]
pub struct WalkMarks {
    /// `D(i)`: cumulative weight of the first `i` basins.
    pub d: Vec<f64>,
    /// Number of cyclic points visited up to (and including) each step.
    pub ell: StepFunction,
}

/// Concatenate the component tree-walks in the q-biased cyclic order.
///
/// `D(i)` marks when the walk has completely visited basin `i`; `ell`
/// increments by one at each step whose vertex is cyclic (the roots of the
/// component walks, at height 0).
pub fn mapping_walk(
    m: &Mapping,
    ordered: &BasinDecomposition,
    plane: &PlaneOrders,
    w: &[f64],
) -> Result<(StepFunction, WalkMarks)> {
    let n = m.n();
    check_weights(w, n)?;
    check_consistency(m, ordered, plane)?;

    let mut widths = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    let mut tags = Vec::with_capacity(n);
    let mut ell_values = Vec::with_capacity(n);
    let mut cyclic_seen = 0usize;
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for &c in &ordered.cyclic_order {
        stack.push((c, 0));
        while let Some((v, h)) = stack.pop() {
            widths.push(w[v - 1]);
            values.push(h as f64);
            tags.push(v);
            if h == 0 {
                cyclic_seen += 1;
            }
            ell_values.push(cyclic_seen as f64);
            for &child in plane.children_of(v).iter().rev() {
                stack.push((child, h + 1));
            }
        }
    }

    let d: Vec<f64> = {
        let masses = ordered
            .basins
            .iter()
            .map(|b| b.iter().map(|&v| w[v - 1]).sum::<f64>());
        let mut acc = 0.0;
        masses
            .map(|mass| {
                acc += mass;
                acc
            })
            .collect()
    };

    let mut walk = StepFunction::new(widths.clone(), values)?.with_tags(tags);
    walk.set_mark("D", d.clone());
    let ell = StepFunction::new(widths, ell_values)?;
    Ok((walk, WalkMarks { d, ell }))
}

fn check_consistency(m: &Mapping, ordered: &BasinDecomposition, plane: &PlaneOrders) -> Result<()> {
    if ordered.n() != m.n() {
        return Err(Error::InconsistentOrder("size mismatch".into()));
    }
    let fresh = basin_decomposition(m);
    if fresh.cyclic != ordered.raw.cyclic || fresh.tree_parent != ordered.raw.tree_parent {
        return Err(Error::InconsistentOrder(
            "decomposition does not belong to this mapping".into(),
        ));
    }
    for v in 1..=m.n() {
        let kids = plane.children_of(v);
        let expected = fresh
            .tree_parent
            .iter()
            .enumerate()
            .filter(|&(_, &p)| p == v)
            .count();
        if kids.len() != expected || kids.iter().any(|&c| fresh.tree_parent[c - 1] != v) {
            return Err(Error::InconsistentOrder(format!(
                "plane order at vertex {v} does not cover its component children"
            )));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Weight time-changes
// ---------------------------------------------------------------------------

/// The piecewise-linear interpolation `S_w` through the points
/// `(sum_{k<=i} w_{v_k}, i/n)` of a vertex order.
#[derive(Debug, Clone)]
pub struct TimeChange {
    knots: Vec<f64>,
}

impl TimeChange {
    pub fn n(&self) -> usize {
        self.knots.len() - 1
    }

    /// `S_w(s)`.
    pub fn eval(&self, s: f64) -> f64 {
        let n = self.n();
        let i = segment_of(&self.knots, s);
        let (a, b) = (self.knots[i], self.knots[i + 1]);
        (i as f64 + (s - a) / (b - a)) / n as f64
    }

    /// `S_w^{-1}(y)` for `y` in `[0, 1]`.
    pub fn inverse(&self, y: f64) -> f64 {
        let n = self.n();
        let scaled = (y * n as f64).clamp(0.0, n as f64);
        let i = (scaled.floor() as usize).min(n - 1);
        let frac = scaled - i as f64;
        self.knots[i] + frac * (self.knots[i + 1] - self.knots[i])
    }
}

fn segment_of(knots: &[f64], s: f64) -> usize {
    let n = knots.len() - 1;
    match knots[1..].binary_search_by(|b| b.partial_cmp(&s).unwrap()) {
        Ok(k) => (k + 1).min(n - 1),
        Err(k) => k.min(n - 1),
    }
}

/// Build `S_w` from a vertex order and a weight vector.
pub fn time_change(order: &[usize], w: &[f64]) -> Result<TimeChange> {
    check_weights(w, order.len())?;
    let widths: Vec<f64> = order.iter().map(|&v| w[v - 1]).collect();
    Ok(TimeChange {
        knots: prefix_sums(&widths),
    })
}

/// `S_w^{-1}(S_p(u))`: the time at which the w-walk visits the vertex the
/// p-walk visits at `u`.
pub fn pull_time(u: f64, s_p: &TimeChange, s_w: &TimeChange) -> f64 {
    s_w.inverse(s_p.eval(u))
}

/// Realize `H o S_p^{-1} o S_w` as a step function on the `S_w` grid.
///
/// When `h` is the height walk with weights `p` over the same vertex order,
/// this equals the height walk with weights `w` exactly.
pub fn compose(h: &StepFunction, s_p: &TimeChange, s_w: &TimeChange) -> Result<StepFunction> {
    let n = s_w.n();
    let mut widths = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = (s_w.knots[i], s_w.knots[i + 1]);
        widths.push(b - a);
        let mid = 0.5 * (a + b);
        values.push(h.eval(s_p.inverse(s_w.eval(mid)))?);
    }
    let out = StepFunction::new(widths, values)?;
    Ok(match h.tags() {
        Some(tags) if tags.len() == n => out.with_tags(tags.to_vec()),
        _ => out,
    })
}

// ---------------------------------------------------------------------------
// Path distances
// ---------------------------------------------------------------------------

/// Distance mode: plain uniform, or uniform after stripping high spikes of
/// total width at most epsilon (a diagnostic stand-in for the *-topology).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistanceMode {
    Uniform,
    SpikeStripped(f64),
}

/// Distance between two step functions on the same total span.
pub fn path_distance(f: &StepFunction, g: &StepFunction, mode: DistanceMode) -> f64 {
    match mode {
        DistanceMode::Uniform => uniform_distance(f, g),
        DistanceMode::SpikeStripped(eps) => {
            uniform_distance(&strip_spikes(f, eps), &strip_spikes(g, eps))
        }
    }
}

fn uniform_distance(f: &StepFunction, g: &StepFunction) -> f64 {
    let bf = f.bounds();
    let bg = g.bounds();
    assert!(
        (bf.last().unwrap() - bg.last().unwrap()).abs() <= 1e-9,
        "paths must share their total span"
    );
    let (mut i, mut j) = (0usize, 0usize);
    let mut sup: f64 = 0.0;
    while i < f.n_steps() && j < g.n_steps() {
        sup = sup.max((f.values()[i] - g.values()[j]).abs());
        // Advance whichever step ends first; ties within tolerance advance both.
        let (ei, ej) = (bf[i + 1], bg[j + 1]);
        if (ei - ej).abs() <= BOUNDARY_TOL {
            i += 1;
            j += 1;
        } else if ei < ej {
            i += 1;
        } else {
            j += 1;
        }
    }
    sup
}

/// Replace the highest-valued steps of total width <= eps by linear
/// interpolation between their unstripped neighbors.
fn strip_spikes(f: &StepFunction, eps: f64) -> StepFunction {
    let n = f.n_steps();
    let mut by_value: Vec<usize> = (0..n).collect();
    by_value.sort_by(|&a, &b| f.values()[b].partial_cmp(&f.values()[a]).unwrap());
    let mut stripped = vec![false; n];
    let mut budget = eps;
    for &k in &by_value {
        if f.widths()[k] <= budget {
            budget -= f.widths()[k];
            stripped[k] = true;
        } else {
            break;
        }
    }
    let mut values = f.values().to_vec();
    let mut k = 0;
    while k < n {
        if !stripped[k] {
            k += 1;
            continue;
        }
        let start = k;
        while k < n && stripped[k] {
            k += 1;
        }
        let left = (start > 0).then(|| values[start - 1]);
        let right = (k < n).then(|| f.values()[k]);
        let run = k - start;
        for (step, value) in values.iter_mut().enumerate().take(k).skip(start) {
            *value = match (left, right) {
                (Some(a), Some(b)) => a + (b - a) * (step - start + 1) as f64 / (run + 1) as f64,
                (Some(a), None) => a,
                (None, Some(b)) => b,
                (None, None) => *value,
            };
        }
    }
    StepFunction::new(f.widths().to_vec(), values).expect("same widths stay valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::{randomize_plane_order, sample_p_tree, RootedTree};
    use crate::model::RankedProb;
    use crate::rng::RngStream;

    fn plane(root: usize, parent: Vec<usize>, children: Vec<Vec<usize>>) -> PlaneTree {
        PlaneTree::new(RootedTree::new(root, parent).unwrap(), children).unwrap()
    }

    #[test]
    fn depth_first_rules() {
        let pt = plane(1, vec![0, 1, 1], vec![vec![2, 3], vec![], vec![]]);
        assert_eq!(depth_first(&pt), vec![1, 2, 3]);

        let pt = plane(1, vec![0, 1, 2], vec![vec![2], vec![3], vec![]]);
        assert_eq!(depth_first(&pt), vec![1, 2, 3]);

        // Root 1 with ordered children (3, 2); 3 has child 4.
        let pt = plane(
            1,
            vec![0, 1, 1, 3],
            vec![vec![3, 2], vec![], vec![4], vec![]],
        );
        assert_eq!(depth_first(&pt), vec![1, 3, 4, 2]);
    }

    #[test]
    fn height_walk_examples() {
        let star = plane(1, vec![0, 1, 1], vec![vec![2, 3], vec![], vec![]]);
        let w = vec![1.0 / 3.0; 3];
        let walk = tree_height_walk(&star, &w).unwrap();
        assert_eq!(walk.values(), &[0.0, 1.0, 1.0]);
        assert_eq!(walk.widths(), &[1.0 / 3.0; 3]);

        let path = plane(1, vec![0, 1, 2], vec![vec![2], vec![3], vec![]]);
        let walk = tree_height_walk(&path, &[1.0 / 3.0; 3]).unwrap();
        assert_eq!(walk.values(), &[0.0, 1.0, 2.0]);

        let walk = tree_height_walk(&star, &[0.5, 0.25, 0.25]).unwrap();
        assert_eq!(walk.eval(0.25).unwrap(), 0.0);
        assert_eq!(walk.eval(0.5).unwrap(), 1.0);
        assert_eq!(walk.eval(1.0).unwrap(), 1.0);

        assert!(matches!(
            tree_height_walk(&star, &[0.5, 0.5]),
            Err(Error::WeightMismatch(_))
        ));
    }

    #[test]
    fn step_function_eval_conventions() {
        let f = StepFunction::new(vec![0.5, 0.5], vec![1.0, 2.0]).unwrap();
        assert_eq!(f.eval(0.0).unwrap(), 1.0);
        assert_eq!(f.eval(0.5).unwrap(), 2.0); // right-continuous at boundary
        assert_eq!(f.eval(1.0).unwrap(), 2.0); // f(total) = last value
        assert!(f.eval(1.5).is_err());
    }

    #[test]
    fn mapping_walk_hand_traces() {
        let w = vec![1.0 / 3.0; 3];
        let q = RankedProb::uniform(3);
        let mut rng = RngStream::new(23, 0);

        // m = (1,1,2): single basin, T_1 a path: H = (0,1,2), D = (1).
        let m = Mapping::new(vec![1, 1, 2]).unwrap();
        let raw = basin_decomposition(&m);
        let plane = PlaneOrders::randomized(&raw, &mut rng);
        let ordered = crate::discrete::q_biased_order(raw, &q, &mut rng);
        let (h, marks) = mapping_walk(&m, &ordered, &plane, &w).unwrap();
        assert_eq!(h.values(), &[0.0, 1.0, 2.0]);
        assert_eq!(marks.d.len(), 1);
        assert!((marks.d[0] - 1.0).abs() < 1e-12);
        assert_eq!(marks.ell.values(), &[1.0, 1.0, 1.0]);

        // Identity on n=2: H == 0, D = (0.5, 1), ell = 1 then 2.
        let m = Mapping::new(vec![1, 2]).unwrap();
        let w2 = vec![0.5, 0.5];
        let raw = basin_decomposition(&m);
        let plane = PlaneOrders::randomized(&raw, &mut rng);
        let ordered = crate::discrete::q_biased_order(raw, &RankedProb::uniform(2), &mut rng);
        let (h, marks) = mapping_walk(&m, &ordered, &plane, &w2).unwrap();
        assert_eq!(h.values(), &[0.0, 0.0]);
        assert_eq!(marks.d.len(), 2);
        assert!((marks.d[0] - 0.5).abs() < 1e-12 && (marks.d[1] - 1.0).abs() < 1e-12);
        assert_eq!(marks.ell.values(), &[1.0, 2.0]);

        // m = (2,1): both vertices cyclic, ell ends at 2.
        let m = Mapping::new(vec![2, 1]).unwrap();
        let raw = basin_decomposition(&m);
        let plane = PlaneOrders::randomized(&raw, &mut rng);
        let ordered = crate::discrete::q_biased_order(raw, &RankedProb::uniform(2), &mut rng);
        let (h, marks) = mapping_walk(&m, &ordered, &plane, &w2).unwrap();
        assert_eq!(h.values(), &[0.0, 0.0]);
        assert_eq!(marks.ell.values(), &[1.0, 2.0]);
        assert_eq!(marks.ell.eval(1.0).unwrap(), 2.0);
    }

    #[test]
    fn mapping_walk_rejects_foreign_decomposition() {
        let mut rng = RngStream::new(29, 0);
        let q = RankedProb::uniform(3);
        let m1 = Mapping::new(vec![1, 1, 2]).unwrap();
        let m2 = Mapping::new(vec![2, 3, 1]).unwrap();
        let raw = basin_decomposition(&m1);
        let plane = PlaneOrders::randomized(&raw, &mut rng);
        let ordered = crate::discrete::q_biased_order(raw, &q, &mut rng);
        let w = vec![1.0 / 3.0; 3];
        assert!(matches!(
            mapping_walk(&m2, &ordered, &plane, &w),
            Err(Error::InconsistentOrder(_))
        ));
    }

    #[test]
    fn time_change_knots() {
        let s = time_change(&[1, 2], &[0.75, 0.25]).unwrap();
        assert_eq!(s.eval(0.0), 0.0);
        assert_eq!(s.eval(1.0), 1.0);
        assert!((s.eval(0.75) - 0.5).abs() < 1e-15);
        assert!((s.inverse(0.5) - 0.75).abs() < 1e-15);
        // Uniform weights: identity on grid points.
        let s = time_change(&[2, 1, 3], &[1.0 / 3.0; 3]).unwrap();
        for i in 0..=3 {
            let x = i as f64 / 3.0;
            assert!((s.eval(x) - x).abs() < 1e-12);
        }
    }

    #[test]
    fn compose_identity_random_tree() {
        let mut rng = RngStream::new(31, 0);
        let n = 20;
        let p = RankedProb::new((0..n).map(|i| (2 * n - i) as f64).collect()).unwrap();
        let w = RankedProb::new((0..n).map(|i| (3 * n - 2 * i) as f64).collect()).unwrap();
        let t = sample_p_tree(&p, &mut rng);
        let pt = randomize_plane_order(&t, &mut rng);
        let order = depth_first(&pt);
        let h_p = tree_height_walk(&pt, p.values()).unwrap();
        let s_p = time_change(&order, p.values()).unwrap();
        let s_w = time_change(&order, w.values()).unwrap();
        let composed = compose(&h_p, &s_p, &s_w).unwrap();
        let direct = tree_height_walk(&pt, w.values()).unwrap();
        assert_eq!(composed.values(), direct.values());
        for (a, b) in composed.widths().iter().zip(direct.widths()) {
            assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn pull_time_visits_same_vertex() {
        let mut rng = RngStream::new(37, 0);
        let p = RankedProb::new(vec![4.0, 3.0, 2.0, 1.0]).unwrap();
        let w = RankedProb::uniform(4);
        let t = sample_p_tree(&p, &mut rng);
        let pt = randomize_plane_order(&t, &mut rng);
        let order = depth_first(&pt);
        let s_p = time_change(&order, p.values()).unwrap();
        let s_w = time_change(&order, w.values()).unwrap();
        let hp = tree_height_walk(&pt, p.values()).unwrap();
        let hw = tree_height_walk(&pt, w.values()).unwrap();
        for k in 0..50 {
            let u = (k as f64 + 0.31) / 50.0;
            let uw = pull_time(u, &s_p, &s_w);
            let i = hp.step_index_of(u).unwrap();
            let j = hw.step_index_of(uw).unwrap();
            assert_eq!(hp.tags().unwrap()[i], hw.tags().unwrap()[j]);
        }
    }

    #[test]
    fn distance_modes() {
        let f = StepFunction::new(vec![0.4, 0.2, 0.4], vec![1.0, 2.0, 1.0]).unwrap();
        assert_eq!(path_distance(&f, &f, DistanceMode::Uniform), 0.0);
        assert_eq!(
            path_distance(&f, &f, DistanceMode::SpikeStripped(0.01)),
            0.0
        );

        let g = f.shifted(1.0);
        assert_eq!(path_distance(&f, &g, DistanceMode::Uniform), 1.0);

        // One spike of width 0.001 and height 50 inside a flat region.
        let f = StepFunction::new(vec![0.5, 0.5], vec![1.0, 2.0]).unwrap();
        let g = StepFunction::new(vec![0.2, 0.001, 0.299, 0.5], vec![1.0, 51.0, 1.0, 2.0]).unwrap();
        assert_eq!(path_distance(&f, &g, DistanceMode::Uniform), 50.0);
        assert_eq!(
            path_distance(&f, &g, DistanceMode::SpikeStripped(0.01)),
            0.0
        );
    }

    proptest::proptest! {
        #[test]
        fn walk_widths_sum_to_one_for_random_weights(
            seed in 0u64..3000,
            n in 1usize..40,
        ) {
            let mut rng = RngStream::new(seed, 97);
            let p = RankedProb::uniform(n);
            let raw: Vec<f64> = (0..n).map(|_| 0.05 + rng.random::<f64>()).collect();
            let total: f64 = raw.iter().sum();
            let w: Vec<f64> = raw.into_iter().map(|x| x / total).collect();
            let t = sample_p_tree(&p, &mut rng);
            let pt = randomize_plane_order(&t, &mut rng);
            let h = tree_height_walk(&pt, &w).unwrap();
            proptest::prop_assert!((h.total() - 1.0).abs() <= 1e-12);
            for pair in h.values().windows(2) {
                proptest::prop_assert!(pair[1] - pair[0] <= 1.0);
            }
        }
    }

    #[test]
    fn walk_height_increments_at_most_one() {
        let mut rng = RngStream::new(41, 0);
        let p = RankedProb::uniform(40);
        for _ in 0..50 {
            let t = sample_p_tree(&p, &mut rng);
            let pt = randomize_plane_order(&t, &mut rng);
            let h = tree_height_walk(&pt, p.values()).unwrap();
            assert!((h.total() - 1.0).abs() <= 1e-12);
            for pair in h.values().windows(2) {
                assert!(pair[1] - pair[0] <= 1.0 + 1e-12);
            }
        }
    }
}
