//! Discrete structures: p-mappings, p-trees, plane orderings, basin/cycle
//! decomposition, and the q-biased order on basins.
//!
//! Vertices are labeled `1..=n` throughout; arrays are indexed by `label - 1`.

use std::collections::BinaryHeap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::RankedProb;

/// Hard cap for exhaustive enumeration (`n^n` mappings, `n^(n-1)` trees).
pub const ENUM_LIMIT: usize = 7;

// ---------------------------------------------------------------------------
// Mapping
// ---------------------------------------------------------------------------

/// A function table on `[n]`: `image[i-1] = m(i)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mapping {
    image: Vec<usize>,
}

impl Mapping {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        if n == 0 || image.iter().any(|&j| j < 1 || j > n) {
            return Err(Error::MalformedCode(format!(
                "mapping entries must lie in 1..={n}"
            )));
        }
        Ok(Self { image })
    }

    pub fn n(&self) -> usize {
        self.image.len()
    }

    /// `m(i)` for a 1-based vertex.
    pub fn apply(&self, i: usize) -> usize {
        self.image[i - 1]
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }
}

/// Draw a p-mapping: each image i.i.d. with law `p`.
pub fn sample_p_mapping<R: Rng>(p: &RankedProb, rng: &mut R) -> Mapping {
    let sampler = p.sampler();
    Mapping {
        image: (0..p.n()).map(|_| sampler.sample(rng)).collect(),
    }
}

/// `P(M = m) = prod_i p_{m(i)}`.
pub fn mapping_probability(p: &RankedProb, m: &Mapping) -> f64 {
    m.image.iter().map(|&j| p.mass(j)).product()
}

// ---------------------------------------------------------------------------
// Rooted labeled trees and the parent-code bijection
// ---------------------------------------------------------------------------

/// A rooted labeled tree on `[n]`: `parent[v-1]` is the parent of `v`, with
/// the sentinel 0 at the root.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RootedTree {
    root: usize,
    parent: Vec<usize>,
}

impl RootedTree {
    pub fn new(root: usize, parent: Vec<usize>) -> Result<Self> {
        let n = parent.len();
        if root < 1 || root > n || parent[root - 1] != 0 {
            return Err(Error::MalformedCode("root/parent sentinel mismatch".into()));
        }
        for (i, &p) in parent.iter().enumerate() {
            if i + 1 != root && (p < 1 || p > n) {
                return Err(Error::MalformedCode(format!(
                    "parent of {} out of range",
                    i + 1
                )));
            }
        }
        let t = Self { root, parent };
        // Connectivity and acyclicity: every vertex must reach the root.
        let heights = t.try_heights()?;
        debug_assert_eq!(heights.len(), n);
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// Parent of a 1-based vertex; 0 for the root.
    pub fn parent_of(&self, v: usize) -> usize {
        self.parent[v - 1]
    }

    pub fn parents(&self) -> &[usize] {
        &self.parent
    }

    /// `c_i(t)`: number of children per vertex, indexed by `label - 1`.
    pub fn child_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.n()];
        for (i, &p) in self.parent.iter().enumerate() {
            if i + 1 != self.root {
                c[p - 1] += 1;
            }
        }
        c
    }

    /// Children lists in increasing label order.
    pub fn children_by_label(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.n()];
        for v in 1..=self.n() {
            if v != self.root {
                ch[self.parent[v - 1] - 1].push(v);
            }
        }
        ch
    }

    /// Heights of all vertices (root has height 0).
    pub fn heights(&self) -> Vec<usize> {
        self.try_heights().expect("validated on construction")
    }

    fn try_heights(&self) -> Result<Vec<usize>> {
        let n = self.n();
        let mut ht = vec![usize::MAX; n];
        ht[self.root - 1] = 0;
        let mut stack = Vec::new();
        for start in 1..=n {
            if ht[start - 1] != usize::MAX {
                continue;
            }
            stack.clear();
            let mut v = start;
            while ht[v - 1] == usize::MAX {
                stack.push(v);
                if stack.len() > n {
                    return Err(Error::MalformedCode("parent array has a cycle".into()));
                }
                v = self.parent[v - 1];
                if v == 0 {
                    return Err(Error::MalformedCode("second root sentinel".into()));
                }
            }
            let mut h = ht[v - 1];
            for &u in stack.iter().rev() {
                h += 1;
                ht[u - 1] = h;
            }
        }
        Ok(ht)
    }
}

/// `P(T = t) = prod_i p_i^{c_i(t)}`.
pub fn tree_probability(p: &RankedProb, t: &RootedTree) -> f64 {
    t.child_counts()
        .iter()
        .enumerate()
        .map(|(i, &c)| p.values()[i].powi(c as i32))
        .product()
}

/// Encode a rooted tree as a parent code of length `n - 1`.
///
/// Leaves are removed largest label first, recording the parent of each
/// removed vertex. Label `i` occurs exactly `c_i(t)` times in the code and the
/// last entry is the root, which makes the code law i.i.d.-`p` exactly when
/// the tree is a p-tree.
pub fn encode_tree(t: &RootedTree) -> Vec<usize> {
    let n = t.n();
    let mut remaining = t.child_counts();
    let mut heap: BinaryHeap<usize> = (1..=n)
        .filter(|&v| v != t.root() && remaining[v - 1] == 0)
        .collect();
    let mut code = Vec::with_capacity(n.saturating_sub(1));
    while let Some(v) = heap.pop() {
        let p = t.parent_of(v);
        code.push(p);
        remaining[p - 1] -= 1;
        if remaining[p - 1] == 0 && p != t.root() {
            heap.push(p);
        }
    }
    code
}

/// Decode a parent code back to the rooted tree; inverse of [`encode_tree`].
pub fn decode_tree(code: &[usize], n: usize) -> Result<RootedTree> {
    if n == 0 {
        return Err(Error::MalformedCode("n must be positive".into()));
    }
    if code.len() + 1 != n {
        return Err(Error::MalformedCode(format!(
            "code length {} does not match n = {n}",
            code.len()
        )));
    }
    if code.iter().any(|&a| a < 1 || a > n) {
        return Err(Error::MalformedCode("code entry out of range".into()));
    }
    if n == 1 {
        return RootedTree::new(1, vec![0]);
    }
    let root = *code.last().unwrap();
    let mut remaining = vec![0usize; n];
    for &a in code {
        remaining[a - 1] += 1;
    }
    let mut heap: BinaryHeap<usize> = (1..=n)
        .filter(|&v| v != root && remaining[v - 1] == 0)
        .collect();
    let mut parent = vec![0usize; n];
    for &a in code {
        let v = heap
            .pop()
            .ok_or_else(|| Error::MalformedCode("code does not decode to a tree".into()))?;
        parent[v - 1] = a;
        remaining[a - 1] -= 1;
        if remaining[a - 1] == 0 && a != root {
            heap.push(a);
        }
    }
    RootedTree::new(root, parent)
}

/// Draw a p-tree by decoding an i.i.d. p-code of length `n - 1`.
pub fn sample_p_tree<R: Rng>(p: &RankedProb, rng: &mut R) -> RootedTree {
    let n = p.n();
    if n == 1 {
        return RootedTree::new(1, vec![0]).unwrap();
    }
    let sampler = p.sampler();
    let code: Vec<usize> = (0..n - 1).map(|_| sampler.sample(rng)).collect();
    decode_tree(&code, n).expect("sampled code is well formed")
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration (exact oracles)
// ---------------------------------------------------------------------------

fn check_enum_size(n: usize) -> Result<()> {
    if n == 0 || n > ENUM_LIMIT {
        return Err(Error::TooLarge {
            n,
            limit: ENUM_LIMIT,
        });
    }
    Ok(())
}

/// All `n^n` mappings on `[n]`, each exactly once.
pub fn enumerate_mappings(n: usize) -> Result<impl Iterator<Item = Mapping>> {
    check_enum_size(n)?;
    let total = (n as u64).pow(n as u32);
    Ok((0..total).map(move |mut k| {
        let image = (0..n)
            .map(|_| {
                let d = (k % n as u64) as usize + 1;
                k /= n as u64;
                d
            })
            .collect();
        Mapping { image }
    }))
}

/// All `n^(n-1)` rooted labeled trees on `[n]`, via the parent-code bijection.
pub fn enumerate_trees(n: usize) -> Result<impl Iterator<Item = RootedTree>> {
    check_enum_size(n)?;
    let total = (n as u64).pow(n as u32 - 1);
    Ok((0..total).map(move |mut k| {
        let code: Vec<usize> = (0..n - 1)
            .map(|_| {
                let d = (k % n as u64) as usize + 1;
                k /= n as u64;
                d
            })
            .collect();
        decode_tree(&code, n).expect("enumerated code is well formed")
    }))
}

// ---------------------------------------------------------------------------
// Plane (ordered) trees
// ---------------------------------------------------------------------------

/// A rooted tree plus an ordered children list per vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneTree {
    tree: RootedTree,
    children: Vec<Vec<usize>>,
}

impl PlaneTree {
    pub fn new(tree: RootedTree, children: Vec<Vec<usize>>) -> Result<Self> {
        let counts = tree.child_counts();
        for v in 1..=tree.n() {
            if children[v - 1].len() != counts[v - 1]
                || children[v - 1].iter().any(|&c| tree.parent_of(c) != v)
            {
                return Err(Error::InconsistentOrder(format!(
                    "children list of {v} does not match the parent relation"
                )));
            }
        }
        Ok(Self { tree, children })
    }

    pub fn tree(&self) -> &RootedTree {
        &self.tree
    }

    pub fn n(&self) -> usize {
        self.tree.n()
    }

    pub fn root(&self) -> usize {
        self.tree.root()
    }

    pub fn children_of(&self, v: usize) -> &[usize] {
        &self.children[v - 1]
    }

    pub fn children(&self) -> &[Vec<usize>] {
        &self.children
    }
}

/// Put each vertex's children in independent uniform random order.
pub fn randomize_plane_order<R: Rng>(t: &RootedTree, rng: &mut R) -> PlaneTree {
    let mut children = t.children_by_label();
    for list in &mut children {
        // Fisher-Yates.
        for i in (1..list.len()).rev() {
            let j = rng.random_range(0..=i);
            list.swap(i, j);
        }
    }
    PlaneTree {
        tree: t.clone(),
        children,
    }
}

// ---------------------------------------------------------------------------
// Basin / cycle decomposition
// ---------------------------------------------------------------------------

/// The unordered decomposition of a mapping digraph: cyclic points, cycles,
/// basins, and the tree components `T_c` hanging off each cyclic point.
#[derive(Debug, Clone)]
pub struct RawDecomposition {
    /// Cycles in discovery order (by smallest cyclic label), each listed by
    /// following the mapping from that entry point.
    pub cycles: Vec<Vec<usize>>,
    /// Basin members per cycle, sorted by label.
    pub basin_members: Vec<Vec<usize>>,
    /// Index of the basin/cycle containing each vertex.
    pub basin_of: Vec<usize>,
    /// The cyclic point whose tree component contains each vertex.
    pub tree_root_of: Vec<usize>,
    /// Parent within the tree component; sentinel 0 at cyclic points.
    pub tree_parent: Vec<usize>,
    pub cyclic: Vec<bool>,
}

impl RawDecomposition {
    pub fn n(&self) -> usize {
        self.cyclic.len()
    }

    /// Total number of cyclic points `|C(m)|`.
    pub fn cyclic_count(&self) -> usize {
        self.cyclic.iter().filter(|&&c| c).count()
    }

    /// Children lists (label order) of the tree components.
    pub fn component_children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.n()];
        for v in 1..=self.n() {
            let p = self.tree_parent[v - 1];
            if p != 0 {
                ch[p - 1].push(v);
            }
        }
        ch
    }
}

/// Number of cyclic points `|C(m)|`, without building the decomposition.
pub fn cyclic_count(m: &Mapping) -> usize {
    let n = m.n();
    let mut indeg = vec![0u32; n];
    for v in 1..=n {
        indeg[m.apply(v) - 1] += 1;
    }
    let mut stack: Vec<usize> = (1..=n).filter(|&v| indeg[v - 1] == 0).collect();
    let mut removed = 0usize;
    while let Some(v) = stack.pop() {
        removed += 1;
        let w = m.apply(v);
        indeg[w - 1] -= 1;
        if indeg[w - 1] == 0 {
            stack.push(w);
        }
    }
    n - removed
}

/// Decompose a mapping into cycles, basins, and rooted tree components.
///
/// A vertex is cyclic iff it survives iterated removal of vertices with no
/// preimages. For a cyclic point `c`, deleting the edges `c -> m(c)` and
/// `c' -> c` (the cyclic preimage) leaves the tree component `T_c` rooted
/// at `c`; every non-cyclic vertex keeps its mapping edge as tree parent.
pub fn basin_decomposition(m: &Mapping) -> RawDecomposition {
    let n = m.n();
    let mut indeg = vec![0usize; n];
    for v in 1..=n {
        indeg[m.apply(v) - 1] += 1;
    }
    let mut queue: Vec<usize> = (1..=n).filter(|&v| indeg[v - 1] == 0).collect();
    let mut alive = vec![true; n];
    while let Some(v) = queue.pop() {
        alive[v - 1] = false;
        let w = m.apply(v);
        indeg[w - 1] -= 1;
        if indeg[w - 1] == 0 {
            queue.push(w);
        }
    }
    let cyclic = alive;

    let mut cycles = Vec::new();
    let mut cycle_of = vec![usize::MAX; n];
    for v in 1..=n {
        if cyclic[v - 1] && cycle_of[v - 1] == usize::MAX {
            let idx = cycles.len();
            let mut cyc = Vec::new();
            let mut w = v;
            loop {
                cycle_of[w - 1] = idx;
                cyc.push(w);
                w = m.apply(w);
                if w == v {
                    break;
                }
            }
            cycles.push(cyc);
        }
    }

    // Tree roots by path compression along the mapping.
    let mut tree_root_of = vec![0usize; n];
    let mut stack = Vec::new();
    for v in 1..=n {
        if tree_root_of[v - 1] != 0 {
            continue;
        }
        stack.clear();
        let mut w = v;
        while tree_root_of[w - 1] == 0 && !cyclic[w - 1] {
            stack.push(w);
            w = m.apply(w);
        }
        let root = if cyclic[w - 1] {
            w
        } else {
            tree_root_of[w - 1]
        };
        for &u in &stack {
            tree_root_of[u - 1] = root;
        }
        if cyclic[v - 1] {
            tree_root_of[v - 1] = v;
        }
    }

    let tree_parent: Vec<usize> = (1..=n)
        .map(|v| if cyclic[v - 1] { 0 } else { m.apply(v) })
        .collect();

    let mut basin_members = vec![Vec::new(); cycles.len()];
    let mut basin_of = vec![0usize; n];
    for v in 1..=n {
        let b = cycle_of[tree_root_of[v - 1] - 1];
        basin_of[v - 1] = b;
        basin_members[b].push(v);
    }

    RawDecomposition {
        cycles,
        basin_members,
        basin_of,
        tree_root_of,
        tree_parent,
        cyclic,
    }
}

// ---------------------------------------------------------------------------
// q-biased order
// ---------------------------------------------------------------------------

/// The decomposition with basins, cycles, and cyclic points in q-biased order.
#[derive(Debug, Clone)]
pub struct BasinDecomposition {
    pub raw: RawDecomposition,
    /// Basins in order of discovery by the q-sample.
    pub basins: Vec<Vec<usize>>,
    /// Cycles in basin order; within cycle `j` the points are listed as
    /// `m(c_j), m^2(c_j), ..., c_j` where `c_j` is the selected point.
    pub cycles: Vec<Vec<usize>>,
    /// Global linear order on all cyclic points.
    pub cyclic_order: Vec<usize>,
    /// Sample indices `tau_j` at which each basin was discovered.
    pub tau: Vec<usize>,
}

impl BasinDecomposition {
    pub fn n(&self) -> usize {
        self.raw.n()
    }
}

/// Order basins by discovery along an i.i.d. q-sample `X_2, X_3, ...`.
///
/// `c_j` is the cyclic point whose tree component contains the discovering
/// sample; draws are counted so `tau_j` is exact.
pub fn q_biased_order<R: Rng>(
    raw: RawDecomposition,
    q: &RankedProb,
    rng: &mut R,
) -> BasinDecomposition {
    assert_eq!(q.n(), raw.n(), "q must charge every point of [n]");
    let sampler = q.sampler();
    let total_basins = raw.cycles.len();
    let mut seen = vec![false; total_basins];
    let mut basins = Vec::with_capacity(total_basins);
    let mut cycles = Vec::with_capacity(total_basins);
    let mut cyclic_order = Vec::new();
    let mut tau = Vec::with_capacity(total_basins);
    let mut k = 1usize;
    while basins.len() < total_basins {
        k += 1;
        let x = sampler.sample(rng);
        let b = raw.basin_of[x - 1];
        if seen[b] {
            continue;
        }
        seen[b] = true;
        tau.push(k);
        let selected = raw.tree_root_of[x - 1];
        let cycle = order_cycle(&raw, selected);
        cyclic_order.extend_from_slice(&cycle);
        cycles.push(cycle);
        basins.push(raw.basin_members[b].clone());
    }
    BasinDecomposition {
        raw,
        basins,
        cycles,
        cyclic_order,
        tau,
    }
}

/// Within-cycle order `m(c) < m^2(c) < ... < c` given the selected point `c`.
fn order_cycle(raw: &RawDecomposition, selected: usize) -> Vec<usize> {
    let cycle = &raw.cycles[raw.basin_of[selected - 1]];
    let len = cycle.len();
    let pos = cycle.iter().position(|&v| v == selected).unwrap();
    (1..=len).map(|step| cycle[(pos + step) % len]).collect()
}

/// The successor `m(v)` read from a within-cycle ordered list.
pub fn cycle_successor(cycle_in_order: &[usize], v: usize) -> usize {
    let pos = cycle_in_order.iter().position(|&w| w == v).unwrap();
    cycle_in_order[(pos + 1) % cycle_in_order.len()]
}
