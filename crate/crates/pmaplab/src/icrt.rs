//! Stick-breaking construction of the inhomogeneous continuum random tree,
//! spanned-subtree reduction with degree-2 contraction, rescaling, shape
//! signatures, and junc-based basin statistics.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::Serialize;

use crate::discrete::RootedTree;
use crate::error::{Error, Result};
use crate::model::ThetaVector;

// ---------------------------------------------------------------------------
// EdgeTree
// ---------------------------------------------------------------------------

/// Node roles in a tree with edge-lengths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum NodeLabel {
    Root,
    /// Leaf `j+` of the stick-breaking construction (or the `j`-th target of
    /// a span reduction).
    Leaf(usize),
    /// Joinpoint of hub `i`.
    Hub(usize),
    Internal,
}

/// A rooted tree with positive real edge lengths and labeled leaves/hubs.
#[derive(Debug, Clone, Serialize)]
pub struct EdgeTree {
    labels: Vec<NodeLabel>,
    parent: Vec<Option<usize>>,
    edge_len: Vec<f64>,
}

impl EdgeTree {
    pub fn new(
        labels: Vec<NodeLabel>,
        parent: Vec<Option<usize>>,
        edge_len: Vec<f64>,
    ) -> Result<Self> {
        let n = labels.len();
        if parent.len() != n || edge_len.len() != n || n == 0 {
            return Err(Error::InconsistentOrder("edge tree arrays mismatch".into()));
        }
        for (k, p) in parent.iter().enumerate() {
            match p {
                None if k != 0 => {
                    return Err(Error::InconsistentOrder("root must be node 0".into()))
                }
                Some(q) if *q >= n => return Err(Error::UnknownVertex(*q)),
                Some(_) if edge_len[k].is_nan() || edge_len[k] <= 0.0 => {
                    return Err(Error::InconsistentOrder(format!(
                        "edge to node {k} has non-positive length"
                    )))
                }
                _ => {}
            }
        }
        Ok(Self {
            labels,
            parent,
            edge_len,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, node: usize) -> &NodeLabel {
        &self.labels[node]
    }

    pub fn parent_of(&self, node: usize) -> Option<usize> {
        self.parent[node]
    }

    pub fn edge_len(&self, node: usize) -> f64 {
        self.edge_len[node]
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.n_nodes()];
        for (k, p) in self.parent.iter().enumerate() {
            if let Some(q) = p {
                ch[*q].push(k);
            }
        }
        ch
    }

    /// Node carrying a given label, if present.
    pub fn find(&self, label: &NodeLabel) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn leaf_count(&self) -> usize {
        self.labels
            .iter()
            .filter(|l| matches!(l, NodeLabel::Leaf(_)))
            .count()
    }

    /// Distance from a node to the root along tree edges.
    pub fn height_of(&self, node: usize) -> f64 {
        let mut h = 0.0;
        let mut v = node;
        while let Some(p) = self.parent[v] {
            h += self.edge_len[v];
            v = p;
        }
        h
    }

    pub fn total_length(&self) -> f64 {
        self.edge_len.iter().sum()
    }
}

/// Multiply all edge lengths by `a`, keeping the shape.
pub fn rescale(a: f64, t: &EdgeTree) -> Result<EdgeTree> {
    if a.is_nan() || a <= 0.0 {
        return Err(Error::NonpositiveScale(a));
    }
    let mut out = t.clone();
    for (k, len) in out.edge_len.iter_mut().enumerate() {
        if out.parent[k].is_some() {
            *len *= a;
        }
    }
    Ok(out)
}

/// Canonical code of the rooted leaf-labeled shape, invariant under
/// internal-node relabeling and rescaling.
pub fn shape_signature(t: &EdgeTree) -> String {
    fn sig(t: &EdgeTree, children: &[Vec<usize>], v: usize) -> String {
        let mut parts: Vec<String> = children[v].iter().map(|&c| sig(t, children, c)).collect();
        parts.sort();
        let body = parts.join(",");
        match t.label(v) {
            NodeLabel::Leaf(j) if parts.is_empty() => format!("{j}+"),
            NodeLabel::Leaf(j) => format!("{j}+({body})"),
            NodeLabel::Hub(i) => format!("h{i}({body})"),
            NodeLabel::Root => format!("r({body})"),
            NodeLabel::Internal => format!("({body})"),
        }
    }
    let children = t.children();
    sig(t, &children, 0)
}

// ---------------------------------------------------------------------------
// Span reduction
// ---------------------------------------------------------------------------

/// Reduce a discrete rooted tree to the subtree spanned by the root and the
/// targets, with degree-2 chains contracted to edges whose integer length
/// counts the deleted nodes plus one.
pub fn span_reduce_discrete(t: &RootedTree, targets: &[usize]) -> Result<EdgeTree> {
    if targets.is_empty() {
        return Err(Error::InconsistentOrder("no targets".into()));
    }
    for &v in targets {
        if v < 1 || v > t.n() {
            return Err(Error::UnknownVertex(v));
        }
    }
    // Mark the spanned subtree.
    let mut in_span = vec![false; t.n()];
    in_span[t.root() - 1] = true;
    for &v in targets {
        let mut w = v;
        while !in_span[w - 1] {
            in_span[w - 1] = true;
            w = t.parent_of(w);
        }
    }
    let mut keep = vec![false; t.n()];
    keep[t.root() - 1] = true;
    let mut label = vec![None; t.n()];
    for (j, &v) in targets.iter().enumerate() {
        keep[v - 1] = true;
        label[v - 1].get_or_insert(j + 1);
    }
    let mut span_children = vec![0usize; t.n()];
    for v in 1..=t.n() {
        if in_span[v - 1] && v != t.root() {
            span_children[t.parent_of(v) - 1] += 1;
        }
    }
    for v in 1..=t.n() {
        if in_span[v - 1] && span_children[v - 1] >= 2 {
            keep[v - 1] = true;
        }
    }
    // Chain-contracted edges: climb from each kept vertex to the next kept
    // ancestor, counting original edges. Root first so node 0 is the root.
    let mut kept: Vec<usize> = (1..=t.n()).filter(|&v| keep[v - 1]).collect();
    kept.sort_by_key(|&v| if v == t.root() { 0 } else { 1 });
    let mut labels = Vec::with_capacity(kept.len());
    let mut parent = Vec::with_capacity(kept.len());
    let mut edge_len = Vec::with_capacity(kept.len());
    for &v in &kept {
        if v == t.root() {
            labels.push(NodeLabel::Root);
            parent.push(None);
            edge_len.push(0.0);
            continue;
        }
        labels.push(match label[v - 1] {
            Some(j) => NodeLabel::Leaf(j),
            None => NodeLabel::Internal,
        });
        let mut w = t.parent_of(v);
        let mut hops = 1usize;
        while !keep[w - 1] {
            w = t.parent_of(w);
            hops += 1;
        }
        parent.push(Some(node_of_in(&kept, w)));
        edge_len.push(hops as f64);
    }
    EdgeTree::new(labels, parent, edge_len)
}

fn node_of_in(kept: &[usize], v: usize) -> usize {
    kept.iter().position(|&k| k == v).unwrap()
}

/// Span reduction on a tree with edge lengths; contracted chains sum their
/// real lengths.
pub fn span_reduce(t: &EdgeTree, targets: &[usize]) -> Result<EdgeTree> {
    if targets.is_empty() {
        return Err(Error::InconsistentOrder("no targets".into()));
    }
    for &v in targets {
        if v >= t.n_nodes() {
            return Err(Error::UnknownVertex(v));
        }
    }
    let n = t.n_nodes();
    let mut in_span = vec![false; n];
    in_span[0] = true;
    for &v in targets {
        let mut w = v;
        while !in_span[w] {
            in_span[w] = true;
            w = t.parent_of(w).expect("root is marked");
        }
    }
    let mut keep = vec![false; n];
    keep[0] = true;
    for &v in targets {
        keep[v] = true;
    }
    let mut span_children = vec![0usize; n];
    for v in 1..n {
        if in_span[v] {
            span_children[t.parent_of(v).unwrap()] += 1;
        }
    }
    for v in 0..n {
        if in_span[v] && span_children[v] >= 2 {
            keep[v] = true;
        }
    }
    let kept: Vec<usize> = (0..n).filter(|&v| keep[v]).collect();
    let mut labels = Vec::with_capacity(kept.len());
    let mut parent = Vec::with_capacity(kept.len());
    let mut edge_len = Vec::with_capacity(kept.len());
    for &v in &kept {
        if v == 0 {
            labels.push(NodeLabel::Root);
            parent.push(None);
            edge_len.push(0.0);
            continue;
        }
        labels.push(t.label(v).clone());
        let mut w = t.parent_of(v).unwrap();
        let mut len = t.edge_len(v);
        while !keep[w] {
            len += t.edge_len(w);
            w = t.parent_of(w).unwrap();
        }
        parent.push(Some(node_of_in(&kept, w)));
        edge_len.push(len);
    }
    EdgeTree::new(labels, parent, edge_len)
}

// ---------------------------------------------------------------------------
// Poisson cutpoint processes
// ---------------------------------------------------------------------------

/// One cutpoint with the coordinate of its joinpoint and, for hub cutpoints,
/// the hub index.
#[derive(Debug, Clone, Serialize)]
pub struct Cutpoint {
    pub position: f64,
    pub joinpoint: f64,
    pub hub: Option<usize>,
}

/// The Poisson data driving the stick-breaking construction.
#[derive(Debug, Clone, Serialize)]
pub struct PointProcessState {
    /// Octant points `(U_j, V_j)` with `0 <= V_j <= U_j`, in increasing `U`.
    pub octant: Vec<(f64, f64)>,
    /// First point of each hub process (`xi_{i,1}`, a joinpoint, never a
    /// cutpoint); `None` when the process was not reached before truncation.
    pub hub_firsts: Vec<Option<f64>>,
    /// Merged cutpoint sequence `eta_1 < eta_2 < ...`, truncated at `J`.
    pub cutpoints: Vec<Cutpoint>,
}

/// Generate the merged cutpoint sequence lazily until `J` cutpoints exist.
///
/// Octant `U`-arrivals ride the linearly growing cross-section
/// (`Lambda(x) = theta_0^2 x^2 / 2`), hub processes use exponential gaps, and
/// the streams are merged in increasing position without spatial truncation
/// error.
pub fn poisson_cutpoints<R: Rng>(
    theta: &ThetaVector,
    j_leaves: usize,
    rng: &mut R,
) -> Result<PointProcessState> {
    if theta.theta0() <= 0.0 {
        return Err(Error::DegenerateTheta);
    }
    assert!(j_leaves >= 1);
    let theta0_sq = theta.theta0() * theta.theta0();
    let exp1 = Exp::new(1.0).expect("unit rate");

    let mut octant = Vec::new();
    let mut hub_firsts: Vec<Option<f64>> = vec![None; theta.hub_count()];
    let mut cutpoints = Vec::with_capacity(j_leaves);

    // Next candidate per stream (octant first, then one per hub).
    let mut next_u = {
        let e: f64 = exp1.sample(rng);
        (2.0 * e / theta0_sq).sqrt()
    };
    let mut next_v: f64 = rng.random::<f64>() * next_u;
    let mut hub_next: Vec<f64> = theta
        .thetas()
        .iter()
        .map(|&th| exp1.sample(rng) / th)
        .collect();
    let mut hub_count: Vec<usize> = vec![1; theta.hub_count()];

    while cutpoints.len() < j_leaves {
        let mut best: usize = 0; // 0 = octant, i+1 = hub i
        let mut best_pos = next_u;
        for (i, &pos) in hub_next.iter().enumerate() {
            if pos < best_pos {
                best_pos = pos;
                best = i + 1;
            }
        }
        if best == 0 {
            octant.push((next_u, next_v));
            cutpoints.push(Cutpoint {
                position: next_u,
                joinpoint: next_v,
                hub: None,
            });
            let e: f64 = exp1.sample(rng);
            next_u = (next_u * next_u + 2.0 * e / theta0_sq).sqrt();
            next_v = rng.random::<f64>() * next_u;
        } else {
            let i = best - 1;
            let pos = hub_next[i];
            if hub_count[i] == 1 {
                // xi_{i,1}: records the hub joinpoint, not a cutpoint.
                hub_firsts[i] = Some(pos);
            } else {
                cutpoints.push(Cutpoint {
                    position: pos,
                    joinpoint: hub_firsts[i].expect("first point precedes later ones"),
                    hub: Some(i + 1),
                });
            }
            hub_count[i] += 1;
            let gap: f64 = exp1.sample(rng) / theta.thetas()[i];
            hub_next[i] = pos + gap;
        }
    }
    Ok(PointProcessState {
        octant,
        hub_firsts,
        cutpoints,
    })
}

impl PointProcessState {
    /// Index (1-based) of the segment `(eta_{k-1}, eta_k]` containing a
    /// coordinate; 1 also covers `[0, eta_1]`.
    pub fn segment_of(&self, y: f64) -> usize {
        let pos = self.cutpoints.partition_point(|c| c.position < y);
        (pos + 1).min(self.cutpoints.len())
    }

    /// For each segment `k >= 2`: the coordinate at which its ancestral chain
    /// of attachments first meets segment 1 (the spine `[[root, 1+]]`).
    pub fn segment_entries(&self) -> Vec<f64> {
        let j = self.cutpoints.len();
        let mut entry = vec![f64::NAN; j + 1]; // 1-based segments
        for k in 2..=j {
            let y = self.cutpoints[k - 2].joinpoint;
            let s = self.segment_of(y);
            entry[k] = if s == 1 { y } else { entry[s] };
            debug_assert!(s < k);
        }
        entry
    }
}

// ---------------------------------------------------------------------------
// Stick-breaking assembly
// ---------------------------------------------------------------------------

/// Build `T^theta_J` by attaching the segment `(eta_k, eta_{k+1}]` at the
/// joinpoint of `eta_k`. Leaves are labeled `1+..J+`, hub joinpoints carry
/// their hub index, the root sits at 0.
pub fn stick_break<R: Rng>(theta: &ThetaVector, j_leaves: usize, rng: &mut R) -> Result<EdgeTree> {
    let state = poisson_cutpoints(theta, j_leaves, rng)?;
    Ok(assemble_tree(&state))
}

/// Deterministic assembly of the edge tree from Poisson data.
pub fn assemble_tree(state: &PointProcessState) -> EdgeTree {
    let j = state.cutpoints.len();
    let mut labels = vec![NodeLabel::Root];
    let mut parent: Vec<Option<usize>> = vec![None];
    let mut edge_len = vec![0.0];

    // One node per distinct attachment coordinate, plus leaves.
    // attach_points[k]: sorted (coordinate, node) interior to segment k+1.
    let mut attach_node: Vec<(f64, usize)> = Vec::new(); // by exact coordinate
    let mut attach_points: Vec<Vec<(f64, usize)>> = vec![Vec::new(); j + 1];
    for k in 2..=j {
        let cut = &state.cutpoints[k - 2];
        let y = cut.joinpoint;
        if attach_node.iter().any(|&(c, _)| c == y) {
            continue;
        }
        let node = labels.len();
        labels.push(match cut.hub {
            Some(i) => NodeLabel::Hub(i),
            None => NodeLabel::Internal,
        });
        parent.push(None); // fixed once segment chains are laid down
        edge_len.push(0.0);
        attach_node.push((y, node));
        attach_points[state.segment_of(y)].push((y, node));
    }
    let node_at = |y: f64, table: &[(f64, usize)]| -> usize {
        table
            .iter()
            .find(|&&(c, _)| c == y)
            .map(|&(_, n)| n)
            .expect("attachment node exists")
    };

    let mut leaf_nodes = Vec::with_capacity(j);
    for k in 1..=j {
        let node = labels.len();
        labels.push(NodeLabel::Leaf(k));
        parent.push(None);
        edge_len.push(0.0);
        leaf_nodes.push(node);
    }

    for k in 1..=j {
        let seg_start = if k == 1 {
            0.0
        } else {
            state.cutpoints[k - 2].position
        };
        let start_node = if k == 1 {
            0
        } else {
            node_at(state.cutpoints[k - 2].joinpoint, &attach_node)
        };
        let mut interior = attach_points[k].clone();
        interior.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut prev_coord = seg_start;
        let mut prev_node = start_node;
        for (y, node) in interior {
            parent[node] = Some(prev_node);
            edge_len[node] = y - prev_coord;
            prev_coord = y;
            prev_node = node;
        }
        let leaf = leaf_nodes[k - 1];
        parent[leaf] = Some(prev_node);
        edge_len[leaf] = state.cutpoints[k - 1].position - prev_coord;
    }

    EdgeTree::new(labels, parent, edge_len).expect("stick-breaking produces a valid tree")
}

// ---------------------------------------------------------------------------
// Junc-based basin statistics
// ---------------------------------------------------------------------------

/// Per-basin leaf-mass estimates and spine height increments read off the
/// stick-breaking tree.
#[derive(Debug, Clone, Serialize)]
pub struct JuncStats {
    /// Fraction of the `J` leaves whose junc lies in `]]c_{j-1}, c_j]]`.
    pub masses: Vec<f64>,
    /// `ht(c_j) - ht(c_{j-1})`.
    pub height_increments: Vec<f64>,
    /// The spine coordinates `ht(c_j)` themselves.
    pub c_heights: Vec<f64>,
}

/// Run the c-recursion over leaves `2+, 3+, ...` in index order and estimate
/// basin masses by leaf frequencies.
///
/// `junc(v)` is the branchpoint of `v` and leaf `1+`; it always lies on the
/// path from the root to `1+`, i.e. on segment 1, at the coordinate where
/// `v`'s ancestral chain enters that segment.
pub fn icrt_junc_stats<R: Rng>(
    theta: &ThetaVector,
    j_leaves: usize,
    k_basins: usize,
    rng: &mut R,
) -> Result<JuncStats> {
    let state = poisson_cutpoints(theta, j_leaves, rng)?;
    Ok(junc_stats_from_state(&state, k_basins))
}

/// The same statistics from pre-generated Poisson data.
pub fn junc_stats_from_state(state: &PointProcessState, k_basins: usize) -> JuncStats {
    let j = state.cutpoints.len();
    let entry = state.segment_entries();
    // c-recursion: c_{j+1} is the junc of the first leaf beyond c_j.
    let mut c_heights = Vec::new();
    let mut c = 0.0;
    for &e in entry.iter().take(j + 1).skip(2) {
        if c_heights.len() >= k_basins {
            break;
        }
        if e > c {
            c = e;
            c_heights.push(c);
        }
    }
    let mut counts = vec![0usize; c_heights.len()];
    for &y in entry.iter().take(j + 1).skip(2) {
        // Leaves with junc beyond the last computed c_j are ignored; with
        // k_basins large enough every leaf except 1+ lands in some basin.
        let idx = c_heights.partition_point(|&cj| cj < y);
        if idx < counts.len() {
            counts[idx] += 1;
        }
    }
    let masses = counts.iter().map(|&c| c as f64 / j as f64).collect();
    let mut height_increments = Vec::with_capacity(c_heights.len());
    let mut prev = 0.0;
    for &cj in &c_heights {
        height_increments.push(cj - prev);
        prev = cj;
    }
    JuncStats {
        masses,
        height_increments,
        c_heights,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::decode_tree;
    use crate::rng::RngStream;
    use crate::stats::ks_statistic_vs_cdf;

    #[test]
    fn first_cutpoint_law_brownian() {
        // theta_0 = 1: P(eta_1 > x) = exp(-x^2 / 2), the octant void
        // probability of the triangle of area x^2 / 2.
        let theta = ThetaVector::brownian();
        let mut rng = RngStream::new(79, 0);
        let sample: Vec<f64> = (0..10_000)
            .map(|_| poisson_cutpoints(&theta, 1, &mut rng).unwrap().cutpoints[0].position)
            .collect();
        let ks = ks_statistic_vs_cdf(&sample, |x| 1.0 - (-x * x / 2.0).exp());
        assert!(ks < 0.02, "ks = {ks}");
    }

    #[test]
    fn single_leaf_tree_is_a_segment() {
        let theta = ThetaVector::new(vec![0.6]).unwrap();
        let mut rng = RngStream::new(83, 0);
        for _ in 0..50 {
            let t = stick_break(&theta, 1, &mut rng).unwrap();
            assert_eq!(t.n_nodes(), 2);
            assert_eq!(t.label(0), &NodeLabel::Root);
            assert_eq!(t.label(1), &NodeLabel::Leaf(1));
            assert!(t.edge_len(1) > 0.0);
        }
    }

    #[test]
    fn two_leaf_topologies() {
        let theta = ThetaVector::brownian();
        let mut rng = RngStream::new(89, 0);
        let mut shapes = std::collections::HashSet::new();
        for _ in 0..200 {
            let t = stick_break(&theta, 2, &mut rng).unwrap();
            assert_eq!(t.leaf_count(), 2);
            shapes.insert(shape_signature(&t));
        }
        // Y-shape (interior joinpoint) and path through the leaf-1 endpoint
        // both occur. The joinpoint V_1 < eta_1 almost surely, so the shape
        // is the Y; a path arises only in the measure-zero V_1 = eta_1 case.
        assert!(shapes.contains("r((1+,2+))") || shapes.contains("r(1+(2+))"));
    }

    #[test]
    fn stick_break_invariants() {
        let theta = ThetaVector::new(vec![0.5, 0.3]).unwrap();
        let mut rng = RngStream::new(97, 0);
        for _ in 0..20 {
            let state = poisson_cutpoints(&theta, 50, &mut rng).unwrap();
            let t = assemble_tree(&state);
            assert_eq!(t.leaf_count(), 50);
            // Hub labels appear at most once.
            for hub in 1..=2 {
                let count = (0..t.n_nodes())
                    .filter(|&v| t.label(v) == &NodeLabel::Hub(hub))
                    .count();
                assert!(count <= 1);
            }
            // Total length = eta_J.
            let eta_j = state.cutpoints.last().unwrap().position;
            assert!((t.total_length() - eta_j).abs() < 1e-9);
            // Cutpoints strictly increasing, joinpoints within placed material.
            for w in state.cutpoints.windows(2) {
                assert!(w[0].position < w[1].position);
            }
            for c in &state.cutpoints {
                assert!(c.joinpoint <= c.position);
            }
        }
    }

    #[test]
    fn span_reduce_discrete_examples() {
        // Path root-a-b-leaf: target = leaf gives a single edge of length 3.
        let t = RootedTree::new(1, vec![0, 1, 2, 3]).unwrap();
        let r = span_reduce_discrete(&t, &[4]).unwrap();
        assert_eq!(r.n_nodes(), 2);
        assert_eq!(r.edge_len(1), 3.0);

        // Target = root's child: edge length 1.
        let r = span_reduce_discrete(&t, &[2]).unwrap();
        assert_eq!(r.edge_len(1), 1.0);

        // Star, two leaf targets: two edges of length 1.
        let star = decode_tree(&[1, 1, 1], 4).unwrap();
        let r = span_reduce_discrete(&star, &[2, 4]).unwrap();
        assert_eq!(r.n_nodes(), 3);
        assert_eq!(r.edge_len(1), 1.0);
        assert_eq!(r.edge_len(2), 1.0);

        assert!(matches!(
            span_reduce_discrete(&star, &[9]),
            Err(Error::UnknownVertex(9))
        ));
    }

    #[test]
    fn span_reduce_preserves_leaf_distances() {
        let mut rng = RngStream::new(101, 0);
        let p = crate::model::RankedProb::uniform(30);
        for _ in 0..20 {
            let t = crate::discrete::sample_p_tree(&p, &mut rng);
            let counts = t.child_counts();
            let leaves: Vec<usize> = (1..=30)
                .filter(|&v| counts[v - 1] == 0 && v != t.root())
                .collect();
            let heights = t.heights();
            let r = span_reduce_discrete(&t, &leaves).unwrap();
            for (j, &leaf) in leaves.iter().enumerate() {
                let node = r.find(&NodeLabel::Leaf(j + 1)).unwrap();
                assert_eq!(r.height_of(node), heights[leaf - 1] as f64);
            }
        }
    }

    #[test]
    fn rescale_composes_and_signature_is_scale_free() {
        let t = RootedTree::new(1, vec![0, 1, 2, 3]).unwrap();
        let r = span_reduce_discrete(&t, &[4]).unwrap();
        let a = rescale(2.0, &r).unwrap();
        assert_eq!(a.edge_len(1), 6.0);
        let ab = rescale(3.0, &rescale(2.0, &r).unwrap()).unwrap();
        let ba = rescale(6.0, &r).unwrap();
        assert_eq!(ab.edge_len(1), ba.edge_len(1));
        assert_eq!(shape_signature(&a), shape_signature(&r));
        assert_eq!(rescale(1.0, &r).unwrap().edge_len(1), r.edge_len(1));
        assert!(matches!(rescale(0.0, &r), Err(Error::NonpositiveScale(_))));
    }

    #[test]
    fn signatures_distinguish_shapes() {
        // Two single-target paths have equal codes regardless of lengths.
        let t1 = RootedTree::new(1, vec![0, 1, 2, 3]).unwrap();
        let t2 = decode_tree(&[1], 2).unwrap();
        let r1 = span_reduce_discrete(&t1, &[4]).unwrap();
        let r2 = span_reduce_discrete(&t2, &[2]).unwrap();
        assert_eq!(shape_signature(&r1), shape_signature(&r2));

        // Y-shape vs path with leaves {1+, 2+}: different codes.
        let star = decode_tree(&[1, 1, 1], 4).unwrap();
        let y = span_reduce_discrete(&star, &[2, 3]).unwrap();
        let path = RootedTree::new(1, vec![0, 1, 2, 3]).unwrap();
        let p2 = span_reduce_discrete(&path, &[3, 4]).unwrap();
        assert_ne!(shape_signature(&y), shape_signature(&p2));
    }

    #[test]
    fn junc_stats_partition_and_heights() {
        let theta = ThetaVector::new(vec![0.5]).unwrap();
        let mut rng = RngStream::new(103, 0);
        for _ in 0..20 {
            let state = poisson_cutpoints(&theta, 400, &mut rng).unwrap();
            let stats = junc_stats_from_state(&state, usize::MAX);
            // Every leaf except 1+ lands in exactly one basin.
            let total: f64 = stats.masses.iter().sum();
            assert!((total - 399.0 / 400.0).abs() < 1e-12);
            // Height increments are positive and sum to the last c_j.
            let sum_inc: f64 = stats.height_increments.iter().sum();
            assert!(stats.height_increments.iter().all(|&h| h > 0.0));
            assert!((sum_inc - *stats.c_heights.last().unwrap()).abs() < 1e-12);
            // The first increment is ht(c_1) = the junc of leaf 2+.
            let entry = state.segment_entries();
            assert_eq!(stats.height_increments[0], entry[2]);
            // juncs lie on segment 1: coordinates within [0, eta_1].
            let eta1 = state.cutpoints[0].position;
            for &e in entry.iter().take(401).skip(2) {
                assert!((0.0..=eta1).contains(&e));
            }
        }
    }
}
