//! The Joyal functional and correspondence: pre-post infimum, generalized
//! excursions, rearrangement by height with marks, the spine lift, and the
//! coupled tree-to-mapping construction.

use rand::Rng;
use serde::Serialize;

use crate::discrete::{basin_decomposition, BasinDecomposition, Mapping, RootedTree};
use crate::error::{Error, Result};
use crate::model::RankedProb;
use crate::walks::StepFunction;

/// Two flat-interval heights closer than this are treated as tied. Discrete
/// baselines have integer heights, so the tolerance only guards grid paths
/// against floating-point degeneracy.
pub const HEIGHT_TOL: f64 = 1e-12;

/// What to do when two distinct excursions share a height: refuse, or order
/// them by left endpoint (the a.s.-harmless rule for grid paths).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieRule {
    Reject,
    ByLeftEndpoint,
}

// ---------------------------------------------------------------------------
// Pre-post infimum
// ---------------------------------------------------------------------------

/// `s -> inf over [s, u] of f` for `s < u` and `inf over [u, s]` for `s >= u`,
/// as a step function on the same boundaries as `f`.
pub fn pre_post_infimum(f: &StepFunction, u: f64) -> Result<StepFunction> {
    let i_u = f.step_index_of(u)?;
    Ok(pre_post_infimum_at(f, i_u, false))
}

/// Running minima around the pivot step `i_u`.
///
/// With `exclusive_post` the post-side infimum does not see the pivot step
/// itself: everything up to the end of the pivot vertex's visit counts as
/// "pre". The spine lift needs this so the second root's subtree stays above
/// its own flat; the plain functional uses the inclusive version.
fn pre_post_infimum_at(f: &StepFunction, i_u: usize, exclusive_post: bool) -> StepFunction {
    let values = f.values();
    let n = values.len();
    let mut out = vec![0.0; n];
    let mut running = f64::INFINITY;
    for j in (0..=i_u).rev() {
        running = running.min(values[j]);
        out[j] = running;
    }
    running = if exclusive_post {
        f64::INFINITY
    } else {
        values[i_u]
    };
    for j in i_u + 1..n {
        running = running.min(values[j]);
        out[j] = running;
    }
    StepFunction::new(f.widths().to_vec(), out).expect("same widths stay valid")
}

// ---------------------------------------------------------------------------
// Generalized excursions
// ---------------------------------------------------------------------------

/// One (possibly two-piece) excursion of `f` above a flat interval of the
/// baseline.
#[derive(Debug, Clone, Serialize)]
pub struct Excursion {
    /// Value of the baseline on the flat interval.
    pub height: f64,
    /// Total duration `l_i`.
    pub length: f64,
    /// Step-index ranges in the source path (one, or two when merged at `u`).
    pub pieces: Vec<(usize, usize)>,
    /// The same ranges as time intervals.
    pub intervals: Vec<(f64, f64)>,
    /// The recentered excursion `f - height` on its pieces.
    pub path: StepFunction,
}

/// All generalized excursions of a path above a baseline, labeled by
/// decreasing duration.
#[derive(Debug, Clone, Serialize)]
pub struct ExcursionSet {
    pub items: Vec<Excursion>,
    pub baseline: StepFunction,
}

struct Flat {
    start: usize,
    end: usize,
    height: f64,
}

fn flat_intervals(baseline: &StepFunction) -> Vec<Flat> {
    let values = baseline.values();
    let mut flats: Vec<Flat> = Vec::new();
    for (j, &v) in values.iter().enumerate() {
        match flats.last_mut() {
            Some(last) if last.height == v => last.end = j + 1,
            _ => flats.push(Flat {
                start: j,
                end: j + 1,
                height: v,
            }),
        }
    }
    flats
}

/// Excursions of `f` above an arbitrary step baseline sharing its boundaries.
///
/// Maximal flat intervals of the baseline are found first; then the at most
/// one pair of equal-height intervals straddling the pivot step is merged
/// into a single two-piece excursion. Items come out sorted by decreasing
/// duration.
pub fn excursions_above(
    f: &StepFunction,
    baseline: &StepFunction,
    i_u: usize,
) -> Result<ExcursionSet> {
    let flats = flat_intervals(baseline);
    // Cluster flats with equal heights (tolerance guards grid paths).
    let mut by_height: Vec<usize> = (0..flats.len()).collect();
    by_height.sort_by(|&a, &b| flats[a].height.partial_cmp(&flats[b].height).unwrap());
    let mut used = vec![false; flats.len()];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &k in &by_height {
        match groups.last_mut() {
            Some(g) if (flats[g[0]].height - flats[k].height).abs() <= HEIGHT_TOL => g.push(k),
            _ => groups.push(vec![k]),
        }
    }
    let mut items = Vec::new();
    for group in &mut groups {
        group.sort_unstable();
        // Merge the unique pair straddling the pivot, if any.
        if group.len() >= 2 {
            let pre = group.iter().rposition(|&k| flats[k].end <= i_u);
            let post = group.iter().position(|&k| flats[k].start > i_u);
            if let (Some(a), Some(b)) = (pre, post) {
                let (ka, kb) = (group[a], group[b]);
                items.push(make_excursion(f, &[&flats[ka], &flats[kb]]));
                used[ka] = true;
                used[kb] = true;
            }
        }
        for &k in group.iter() {
            if !used[k] {
                items.push(make_excursion(f, &[&flats[k]]));
                used[k] = true;
            }
        }
    }
    items.sort_by(|a, b| {
        b.length
            .partial_cmp(&a.length)
            .unwrap()
            .then(a.pieces[0].0.cmp(&b.pieces[0].0))
    });
    Ok(ExcursionSet {
        items,
        baseline: baseline.clone(),
    })
}

fn make_excursion(f: &StepFunction, flats: &[&Flat]) -> Excursion {
    let bounds = f.bounds();
    let height = flats[0].height;
    let mut widths = Vec::new();
    let mut values = Vec::new();
    let mut pieces = Vec::new();
    let mut intervals = Vec::new();
    let mut length = 0.0;
    for flat in flats {
        pieces.push((flat.start, flat.end));
        intervals.push((bounds[flat.start], bounds[flat.end]));
        for j in flat.start..flat.end {
            widths.push(f.widths()[j]);
            values.push(f.values()[j] - height);
            length += f.widths()[j];
        }
    }
    Excursion {
        height,
        length,
        pieces,
        intervals,
        path: StepFunction::new(widths, values).expect("flat intervals are non-empty"),
    }
}

/// Excursions of `f` above its own pre-post infimum at `u`.
pub fn generalized_excursions(f: &StepFunction, u: f64) -> Result<ExcursionSet> {
    let i_u = f.step_index_of(u)?;
    let baseline = pre_post_infimum_at(f, i_u, false);
    excursions_above(f, &baseline, i_u)
}

// ---------------------------------------------------------------------------
// The Joyal functional
// ---------------------------------------------------------------------------

/// Excursions rearranged by increasing height, with boundary marks.
#[derive(Debug, Clone, Serialize)]
pub struct JoyalOutput {
    pub path: StepFunction,
    /// `(g_i, d_i)` per excursion in output order.
    pub marks: Vec<(f64, f64)>,
}

/// Concatenate the excursions of a set in increasing order of height.
pub fn arrange_by_height(
    set: &ExcursionSet,
    f: &StepFunction,
    ties: TieRule,
) -> Result<JoyalOutput> {
    let mut order: Vec<usize> = (0..set.items.len()).collect();
    order.sort_by(|&a, &b| {
        let (ia, ib) = (&set.items[a], &set.items[b]);
        ia.height
            .partial_cmp(&ib.height)
            .unwrap()
            .then(ia.pieces[0].0.cmp(&ib.pieces[0].0))
    });
    if ties == TieRule::Reject {
        for w in order.windows(2) {
            let (ha, hb) = (set.items[w[0]].height, set.items[w[1]].height);
            if (hb - ha).abs() <= HEIGHT_TOL {
                return Err(Error::HeightTie(ha));
            }
        }
    }
    let mut widths = Vec::with_capacity(f.n_steps());
    let mut values = Vec::with_capacity(f.n_steps());
    let mut tags = f.tags().map(|_| Vec::with_capacity(f.n_steps()));
    let mut marks = Vec::with_capacity(order.len());
    let mut cum = 0.0;
    for &k in &order {
        let item = &set.items[k];
        let g = cum;
        for &(start, end) in &item.pieces {
            for j in start..end {
                widths.push(f.widths()[j]);
                values.push(f.values()[j] - item.height);
                if let (Some(tags), Some(src)) = (tags.as_mut(), f.tags()) {
                    tags.push(src[j]);
                }
            }
            cum += f.bounds()[end] - f.bounds()[start];
        }
        marks.push((g, cum));
    }
    let mut path = StepFunction::new(widths, values)?;
    if let Some(tags) = tags {
        path = path.with_tags(tags);
    }
    path.set_mark("g", marks.iter().map(|&(g, _)| g).collect());
    path.set_mark("d", marks.iter().map(|&(_, d)| d).collect());
    Ok(JoyalOutput { path, marks })
}

/// `J^u(f)`: the generalized excursions of `f` above its pre-post infimum,
/// arranged in increasing order of height, with marks `g_i, d_i`.
pub fn joyal_functional(f: &StepFunction, u: f64, ties: TieRule) -> Result<JoyalOutput> {
    let set = generalized_excursions(f, u)?;
    arrange_by_height(&set, f, ties)
}

// ---------------------------------------------------------------------------
// Spine lift and the tilde functional
// ---------------------------------------------------------------------------

/// The spine of a doubly-rooted tree and the assignment of every vertex to
/// the spine subtree containing it.
#[derive(Debug, Clone)]
pub struct SpineData {
    /// `c_1 = root, ..., c_K = x1`.
    pub spine: Vec<usize>,
    /// For each vertex, the 0-based index `k` with `v` in the subtree rooted
    /// at `c_{k+1}` after the spine edges are cut.
    pub component_of: Vec<usize>,
}

impl SpineData {
    pub fn new(tree: &RootedTree, x1: usize) -> Result<Self> {
        let n = tree.n();
        if x1 < 1 || x1 > n {
            return Err(Error::UnknownVertex(x1));
        }
        let mut spine = vec![x1];
        let mut v = x1;
        while v != tree.root() {
            v = tree.parent_of(v);
            spine.push(v);
        }
        spine.reverse();
        let mut spine_index = vec![usize::MAX; n];
        for (k, &c) in spine.iter().enumerate() {
            spine_index[c - 1] = k;
        }
        // Propagate component indices down from the spine with memoization.
        let mut component_of = vec![usize::MAX; n];
        let mut stack = Vec::new();
        for start in 1..=n {
            if component_of[start - 1] != usize::MAX {
                continue;
            }
            stack.clear();
            let mut v = start;
            loop {
                if spine_index[v - 1] != usize::MAX {
                    component_of[v - 1] = spine_index[v - 1];
                    break;
                }
                if component_of[v - 1] != usize::MAX {
                    break;
                }
                stack.push(v);
                v = tree.parent_of(v);
            }
            let k = component_of[v - 1];
            for &u in &stack {
                component_of[u - 1] = k;
            }
        }
        Ok(Self {
            spine,
            component_of,
        })
    }

    pub fn len(&self) -> usize {
        self.spine.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spine.is_empty()
    }

    pub fn second_root(&self) -> usize {
        *self.spine.last().unwrap()
    }
}

/// `K^p_w(u)`: the pre-post infimum with the spine visits lifted by one.
///
/// The infimum is taken with the pivot vertex's step counted as pre, which
/// delays each spine drop by the spine vertex's weight and keeps the second
/// root's subtree above its own flat. Flat heights are the distinct integer
/// spine heights plus the lift.
pub fn spine_lift(h: &StepFunction, u: f64, spine: &SpineData) -> Result<StepFunction> {
    let i_u = h.step_index_of(u)?;
    let tags = h
        .tags()
        .ok_or_else(|| Error::SpineMismatch("walk carries no vertex tags".into()))?;
    if tags[i_u] != spine.second_root() {
        return Err(Error::SpineMismatch(format!(
            "vertex {} visited at u, but the spine ends at {}",
            tags[i_u],
            spine.second_root()
        )));
    }
    let mut on_spine = vec![false; spine.component_of.len()];
    for &c in &spine.spine {
        on_spine[c - 1] = true;
    }
    let mut lifted = pre_post_infimum_at(h, i_u, true);
    let values: Vec<f64> = lifted
        .values()
        .iter()
        .zip(tags)
        .map(|(&v, &tag)| if on_spine[tag - 1] { v + 1.0 } else { v })
        .collect();
    lifted = StepFunction::new(h.widths().to_vec(), values)?.with_tags(tags.to_vec());
    Ok(lifted)
}

/// The tilde functional: excursions of the height walk above the spine lift,
/// rearranged by increasing height. Equals the coupled mapping walk minus 1;
/// values are `-1` exactly at the steps of cyclic (spine) vertices.
pub fn joyal_tilde(
    h: &StepFunction,
    u: f64,
    spine: &SpineData,
    ties: TieRule,
) -> Result<JoyalOutput> {
    let i_u = h.step_index_of(u)?;
    let baseline = spine_lift(h, u, spine)?;
    let set = excursions_above(h, &baseline, i_u)?;
    arrange_by_height(&set, h, ties)
}

// ---------------------------------------------------------------------------
// The Joyal correspondence
// ---------------------------------------------------------------------------

/// Turn a doubly-rooted tree plus a q-sample stream into a mapping whose
/// basins carry the induced q-biased order.
///
/// The spine subtrees are grouped into cycles by i.i.d. q-samples: each new
/// sample landing beyond the already-bound prefix closes the next cycle at
/// its component. Non-spine vertices map to their tree parent; spine vertices
/// map to their cycle successor.
pub fn joyal_correspondence<R: Rng>(
    t: &RootedTree,
    x1: usize,
    q: &RankedProb,
    rng: &mut R,
) -> Result<(Mapping, BasinDecomposition)> {
    let n = t.n();
    if q.n() != n {
        return Err(Error::InconsistentOrder(format!(
            "q on {} points for n = {n}",
            q.n()
        )));
    }
    let spine = SpineData::new(t, x1)?;
    let len = spine.len();
    let sampler = q.sampler();

    let mut image: Vec<usize> = (1..=n)
        .map(|v| {
            let p = t.parent_of(v);
            if p == 0 {
                v // provisional; the root's cycle edge is set below
            } else {
                p
            }
        })
        .collect();
    // Cut the spine: each spine vertex gets its cycle successor instead of
    // its tree parent.
    let mut start = 0usize;
    let mut groups: Vec<(usize, usize)> = Vec::new();
    let mut tau = Vec::new();
    let mut k_draw = 1usize;
    while start < len {
        k_draw += 1;
        let x = sampler.sample(rng);
        let comp = spine.component_of[x - 1];
        if comp < start {
            continue;
        }
        for i in start..comp {
            image[spine.spine[i] - 1] = spine.spine[i + 1];
        }
        image[spine.spine[comp] - 1] = spine.spine[start];
        groups.push((start, comp));
        tau.push(k_draw);
        start = comp + 1;
    }

    let m = Mapping::new(image)?;
    let raw = basin_decomposition(&m);
    let mut basins = Vec::with_capacity(groups.len());
    let mut cycles = Vec::with_capacity(groups.len());
    let mut cyclic_order = Vec::with_capacity(len);
    for &(a, b) in &groups {
        let cycle: Vec<usize> = spine.spine[a..=b].to_vec();
        cyclic_order.extend_from_slice(&cycle);
        basins.push(raw.basin_members[raw.basin_of[cycle[0] - 1]].clone());
        cycles.push(cycle);
    }
    Ok((
        m,
        BasinDecomposition {
            raw,
            basins,
            cycles,
            cyclic_order,
            tau,
        },
    ))
}
