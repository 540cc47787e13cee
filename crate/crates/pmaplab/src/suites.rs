//! Verification suites behind `pmaplab check` and the acceptance tests:
//! exhaustive bijection checks, the pathwise coupling identity, the Joyal
//! pushforward law, and the randomized invariant battery.

use rand::Rng;
use rayon::prelude::*;

use crate::discrete::{
    basin_decomposition, decode_tree, encode_tree, enumerate_trees, randomize_plane_order,
    sample_p_mapping, sample_p_tree, tree_probability,
};
use crate::error::Result;
use crate::experiment::exact_experiment_p;
use crate::icrt::poisson_cutpoints;
use crate::joyal::{
    generalized_excursions, joyal_correspondence, joyal_functional, joyal_tilde, SpineData, TieRule,
};
use crate::limit::{
    bridge_exchangeable, brownian_bridge, exploration, jump_reflections, limit_z, local_time,
    marks_d, vervaat,
};
use crate::model::{make_hub_family, FamilySpec, RankedProb, ThetaVector};
use crate::rng::{lane_stream, RngStream};
use crate::stats::{ks_two_sample, tv_finite, EmpiricalSample};
use crate::walks::{mapping_walk, tree_height_walk, PlaneOrders};

/// Outcome of one named check within a suite.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub threshold: f64,
}

/// A suite's results; `pass` is the conjunction of all checks.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn check(name: impl Into<String>, value: f64, threshold: f64) -> CheckResult {
    CheckResult {
        name: name.into(),
        pass: value <= threshold,
        value,
        threshold,
    }
}

fn check_bool(name: impl Into<String>, ok: bool) -> CheckResult {
    CheckResult {
        name: name.into(),
        pass: ok,
        value: if ok { 1.0 } else { 0.0 },
        threshold: 1.0,
    }
}

// ---------------------------------------------------------------------------
// Bijection suite
// ---------------------------------------------------------------------------

/// Exhaustive parent-code bijection and Cayley identity, n = 2..=5.
pub fn check_bijection() -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for n in 2..=5usize {
        let p = exact_experiment_p(n);
        let mut seen = std::collections::HashSet::new();
        let mut cayley = 0.0;
        let mut roundtrip_ok = true;
        let mut occurrence_ok = true;
        for t in enumerate_trees(n)? {
            let code = encode_tree(&t);
            roundtrip_ok &= decode_tree(&code, n)? == t;
            let counts = t.child_counts();
            for v in 1..=n {
                occurrence_ok &= code.iter().filter(|&&a| a == v).count() == counts[v - 1];
            }
            seen.insert((t.root(), t.parents().to_vec()));
            cayley += tree_probability(&p, &t);
        }
        let expected = (n as u64).pow(n as u32 - 1) as usize;
        checks.push(check_bool(format!("distinct_n{n}"), seen.len() == expected));
        checks.push(check_bool(format!("roundtrip_n{n}"), roundtrip_ok));
        checks.push(check_bool(format!("occurrences_n{n}"), occurrence_ok));
        checks.push(check(
            format!("cayley_gap_n{n}"),
            (cayley - 1.0).abs(),
            1e-10,
        ));
    }
    Ok(SuiteReport {
        suite: "bijection".into(),
        checks,
    })
}

// ---------------------------------------------------------------------------
// Pathwise coupling (Lemma) suite
// ---------------------------------------------------------------------------

/// Build one coupled instance and test the pathwise identity exactly:
/// the tilde functional of the height walk equals the coupled mapping walk
/// minus one, as step functions, with the same vertex visit order.
pub fn lemj_instance_exact<R: Rng>(p: &RankedProb, w: &[f64], q: &RankedProb, rng: &mut R) -> bool {
    let t = sample_p_tree(p, rng);
    let pt = randomize_plane_order(&t, rng);
    let h_w = match tree_height_walk(&pt, w) {
        Ok(h) => h,
        Err(_) => return false,
    };
    // X_1 is the vertex the p-walk visits at a uniform time; the pivot on
    // the w-walk is any interior point of that vertex's step.
    let h_p = tree_height_walk(&pt, p.values()).expect("p covers the labels");
    let u_p: f64 = rng.random();
    let step = h_p.step_index_of(u_p).expect("u in [0,1]");
    let x1 = h_p.tags().expect("height walks carry tags")[step];
    let bounds = h_w.bounds();
    let u_w = 0.5 * (bounds[step] + bounds[step + 1]);

    let spine = match SpineData::new(&t, x1) {
        Ok(s) => s,
        Err(_) => return false,
    };
    let tilde = match joyal_tilde(&h_w, u_w, &spine, TieRule::Reject) {
        Ok(out) => out,
        Err(_) => return false,
    };
    let (m, ordered) = match joyal_correspondence(&t, x1, q, rng) {
        Ok(pair) => pair,
        Err(_) => return false,
    };
    let plane = PlaneOrders::restricted(&pt, &ordered.raw);
    let (walk, _) = match mapping_walk(&m, &ordered, &plane, w) {
        Ok(pair) => pair,
        Err(_) => return false,
    };
    let expected = walk.shifted(-1.0);
    tilde.path.function_eq(&expected, 1e-12) && tilde.path.tags() == walk.tags()
}

/// The Lemma suite: many random instances of the exact pathwise identity.
pub fn check_lemj(seed: u64, instances: usize, n: usize) -> Result<SuiteReport> {
    let theta = ThetaVector::new(vec![0.5]).expect("valid theta");
    let p = make_hub_family(&FamilySpec::new(theta, n))?;
    let failures: usize = (0..instances)
        .into_par_iter()
        .map(|r| {
            let mut rng = RngStream::new(seed, lane_stream(0, r as u32));
            let w = match r % 3 {
                0 => p.values().to_vec(),
                1 => vec![1.0 / p.n() as f64; p.n()],
                _ => {
                    let raw: Vec<f64> = (0..p.n()).map(|_| 0.5 + rng.random::<f64>()).collect();
                    let total: f64 = raw.iter().sum();
                    raw.into_iter().map(|x| x / total).collect()
                }
            };
            let q = if r % 2 == 0 {
                RankedProb::uniform(p.n())
            } else {
                p.clone()
            };
            usize::from(!lemj_instance_exact(&p, &w, &q, &mut rng))
        })
        .sum();
    Ok(SuiteReport {
        suite: "lemj".into(),
        checks: vec![check(
            format!("failures_of_{instances}"),
            failures as f64,
            0.0,
        )],
    })
}

// ---------------------------------------------------------------------------
// Joyal pushforward suite
// ---------------------------------------------------------------------------

/// Total variation between the empirical law of the Joyal-correspondence
/// mapping and the exact product law, at n = 4 with a p-sampled second root
/// and uniform q.
pub fn joyal_pushforward_tv(seed: u64, draws: usize) -> Result<f64> {
    let n = 4usize;
    let p = exact_experiment_p(n);
    let q = RankedProb::uniform(n);
    let cells = n.pow(n as u32);
    let counts: Vec<u64> = (0..draws)
        .into_par_iter()
        .fold(
            || vec![0u64; cells],
            |mut acc, r| {
                let mut rng = RngStream::new(seed, lane_stream(0, r as u32));
                let t = sample_p_tree(&p, &mut rng);
                let x1 = p.sampler().sample(&mut rng);
                let (m, _) = joyal_correspondence(&t, x1, &q, &mut rng).expect("valid inputs");
                let mut idx = 0usize;
                for (k, &j) in m.image().iter().enumerate() {
                    idx += (j - 1) * n.pow(k as u32);
                }
                acc[idx] += 1;
                acc
            },
        )
        .reduce(
            || vec![0u64; cells],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let empirical: Vec<f64> = counts.iter().map(|&c| c as f64 / draws as f64).collect();
    let mut exact = vec![0.0; cells];
    for (idx, e) in exact.iter_mut().enumerate() {
        let mut rest = idx;
        let mut prob = 1.0;
        for _ in 0..n {
            prob *= p.mass(rest % n + 1);
            rest /= n;
        }
        *e = prob;
    }
    tv_finite(&empirical, &exact)
}

/// The pushforward suite: TV within 0.01 at one million draws.
pub fn check_joyal(seed: u64, draws: usize) -> Result<SuiteReport> {
    let tv = joyal_pushforward_tv(seed, draws)?;
    Ok(SuiteReport {
        suite: "joyal".into(),
        checks: vec![check("pushforward_tv", tv, 0.01)],
    })
}

// ---------------------------------------------------------------------------
// Invariant battery
// ---------------------------------------------------------------------------

/// Randomized invariant battery over `instances` seeded instances per
/// property, plus the statistical max-height oracle.
pub fn check_invariants(seed: u64, instances: usize) -> Result<SuiteReport> {
    let mut checks = Vec::new();

    // Walk invariants on random p-trees and p-mappings.
    let walk_failures: usize = (0..instances)
        .into_par_iter()
        .map(|r| {
            let mut rng = RngStream::new(seed, lane_stream(1, r as u32));
            // n >= 8 keeps the 0.4-hub family ranked.
            let n = 8 + (rng.random::<u64>() % 40) as usize;
            let theta = if r % 2 == 0 {
                ThetaVector::brownian()
            } else {
                ThetaVector::new(vec![0.4]).unwrap()
            };
            let p = match make_hub_family(&FamilySpec::new(theta, n)) {
                Ok(p) => p,
                Err(_) => return 1,
            };
            let q = RankedProb::uniform(n);
            let m = sample_p_mapping(&p, &mut rng);
            let raw = basin_decomposition(&m);
            let plane = PlaneOrders::randomized(&raw, &mut rng);
            let ordered = crate::discrete::q_biased_order(raw, &q, &mut rng);
            let (walk, marks) = match mapping_walk(&m, &ordered, &plane, p.values()) {
                Ok(x) => x,
                Err(_) => return 1,
            };
            let mut ok = (walk.total() - 1.0).abs() <= 1e-12;
            // Zero height exactly at cyclic vertices; ell ends at |C(m)|.
            let cyclic = &ordered.raw.cyclic;
            for (j, &v) in walk.tags().unwrap().iter().enumerate() {
                ok &= (walk.values()[j] == 0.0) == cyclic[v - 1];
            }
            let total_cyclic = ordered.raw.cyclic_count() as f64;
            ok &= *marks.ell.values().last().unwrap() == total_cyclic;
            // D: one entry per basin, diffs are basin masses, ends at 1.
            ok &= marks.d.len() == ordered.basins.len();
            let mut prev = 0.0;
            for (i, &d) in marks.d.iter().enumerate() {
                let mass: f64 = ordered.basins[i].iter().map(|&v| p.mass(v)).sum();
                ok &= (d - prev - mass).abs() <= 1e-9;
                prev = d;
            }
            ok &= (marks.d.last().unwrap() - 1.0).abs() <= 1e-9;
            usize::from(!ok)
        })
        .sum();
    checks.push(check("walk_invariant_failures", walk_failures as f64, 0.0));

    // Excursion and mark arithmetic on random height walks.
    let excursion_failures: usize = (0..instances)
        .into_par_iter()
        .map(|r| {
            let mut rng = RngStream::new(seed, lane_stream(2, r as u32));
            let n = 2 + (rng.random::<u64>() % 40) as usize;
            let p = RankedProb::uniform(n);
            let t = sample_p_tree(&p, &mut rng);
            let pt = randomize_plane_order(&t, &mut rng);
            let h = tree_height_walk(&pt, p.values()).unwrap();
            let u: f64 = rng.random();
            let set = match generalized_excursions(&h, u) {
                Ok(s) => s,
                Err(_) => return 1,
            };
            let total_len: f64 = set.items.iter().map(|e| e.length).sum();
            let mut ok = (total_len - 1.0).abs() <= 1e-9;
            let out = match joyal_functional(&h, u, TieRule::ByLeftEndpoint) {
                Ok(o) => o,
                Err(_) => return 1,
            };
            // d - g = l per excursion, in matched (height) order.
            let mut lengths: Vec<(f64, f64)> =
                set.items.iter().map(|e| (e.height, e.length)).collect();
            lengths.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            ok &= out.marks.len() == lengths.len();
            for ((g, d), (_, l)) in out.marks.iter().zip(&lengths) {
                ok &= (d - g - l).abs() <= 1e-9;
            }
            // One-piece excursions lying entirely before the pivot end at
            // zero: the baseline only rises once the walk has returned to it.
            let i_u = h.step_index_of(u).unwrap();
            for e in &set.items {
                if e.pieces.len() == 1 && e.pieces[0].1 <= i_u {
                    ok &= *e.path.values().last().unwrap() == 0.0;
                }
            }
            // The rearrangement preserves the multiset of step values
            // relative to the baseline.
            let mut a: Vec<i64> = h
                .values()
                .iter()
                .zip(set.baseline.values())
                .map(|(v, b)| (v - b).round() as i64)
                .collect();
            let mut b: Vec<i64> = out
                .path
                .values()
                .iter()
                .map(|&v| v.round() as i64)
                .collect();
            a.sort_unstable();
            b.sort_unstable();
            ok &= a == b;
            usize::from(!ok)
        })
        .sum();
    checks.push(check(
        "excursion_invariant_failures",
        excursion_failures as f64,
        0.0,
    ));

    // Limit pipeline invariants on a moderate grid.
    let limit_failures: usize = (0..instances)
        .into_par_iter()
        .map(|r| {
            let mut rng = RngStream::new(seed, lane_stream(3, r as u32));
            let theta = ThetaVector::new(vec![0.5, 0.3]).unwrap();
            let m = 1usize << 10;
            let x = match vervaat(&bridge_exchangeable(&theta, m, &mut rng)) {
                Ok(x) => x,
                Err(_) => return 1,
            };
            let mut ok = x.values()[0] == 0.0 && x.values()[m] == 0.0;
            ok &= x.values().iter().all(|&v| v >= 0.0);
            let (y, _) = jump_reflections(&x);
            ok &= y.values().iter().all(|&v| v >= -1e-12);
            for &(t, _) in y.jumps() {
                if t == 0 {
                    continue;
                }
                // The reflection removes the whole jump-cell increment.
                ok &= (y.values()[t] - y.values()[t - 1]).abs() <= 1e-9;
            }
            let h = exploration(&theta, m, &mut rng).unwrap();
            ok &= h.values()[0] == 0.0 && h.values()[m].abs() <= 1e-12;
            let lz = limit_z(&h, &mut rng).unwrap();
            let total: f64 = lz.z.marks.iter().map(|(g, d)| d - g).sum();
            ok &= (total - 1.0).abs() <= 1e-9;
            let l = local_time(&h, lz.u).unwrap();
            ok &= l.values().windows(2).all(|w| w[1] >= w[0]);
            let d_list: Vec<f64> = lz.z.marks.iter().map(|&(_, d)| d).collect();
            let ds = marks_d(&d_list, &mut rng, 5);
            ok &= ds.windows(2).all(|w| w[1] > w[0]);
            ok &= ds
                .iter()
                .all(|d| *d == 1.0 || d_list.iter().any(|x| x == d));
            usize::from(!ok)
        })
        .sum();
    checks.push(check(
        "limit_invariant_failures",
        limit_failures as f64,
        0.0,
    ));

    // Determinism: identical (config, seed) twice, compare a digest.
    let digest = |s: u64| -> Vec<f64> {
        (0..16)
            .into_par_iter()
            .map(|r| {
                let mut rng = RngStream::new(s, lane_stream(4, r as u32));
                let p = RankedProb::uniform(64);
                let m = sample_p_mapping(&p, &mut rng);
                crate::discrete::cyclic_count(&m) as f64 + rng.random::<f64>()
            })
            .collect()
    };
    checks.push(check_bool(
        "determinism_fixed_seed",
        digest(seed) == digest(seed),
    ));

    // Statistical oracle: max of the exploration process for theta_0 = 1
    // matches twice the max of an independently simulated Vervaat bridge.
    let ks = max_height_oracle_ks(seed, 10_000, 1 << 14)?;
    checks.push(check("max_height_oracle_ks", ks, 0.02));

    Ok(SuiteReport {
        suite: "invariants".into(),
        checks,
    })
}

/// KS distance between the law of `max H` (Brownian case) and the internal
/// oracle `2 * max(Vervaat(bridge))` on independent streams.
pub fn max_height_oracle_ks(seed: u64, reps: usize, m: usize) -> Result<f64> {
    let theta = ThetaVector::brownian();
    let pipeline: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = RngStream::new(seed, lane_stream(5, r as u32));
            let h = exploration(&theta, m, &mut rng).expect("theta0 = 1");
            h.values().iter().cloned().fold(0.0, f64::max)
        })
        .collect();
    let oracle: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = RngStream::new(seed, lane_stream(6, r as u32));
            let b = brownian_bridge(m, &mut rng);
            let e = vervaat(&b).expect("bridge endpoints are zero");
            2.0 * e.values().iter().cloned().fold(0.0, f64::max)
        })
        .collect();
    Ok(ks_two_sample(
        &EmpiricalSample::new(pipeline)?,
        &EmpiricalSample::new(oracle)?,
    ))
}

/// KS distance between the stick-breaking `ht(c_1)` and the sigma-scaled
/// first-cycle size of sampled mappings, the cross-module oracle for the
/// junc statistics.
pub fn junc_height_oracle_ks(seed: u64, reps: usize, n: usize, leaves: usize) -> Result<f64> {
    let theta = ThetaVector::brownian();
    let p = RankedProb::uniform(n);
    let q = RankedProb::uniform(n);
    let sigma = p.sigma();
    let discrete: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = RngStream::new(seed, lane_stream(7, r as u32));
            let m = sample_p_mapping(&p, &mut rng);
            let ordered = crate::discrete::q_biased_order(basin_decomposition(&m), &q, &mut rng);
            sigma * ordered.cycles[0].len() as f64
        })
        .collect();
    let continuum: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = RngStream::new(seed, lane_stream(8, r as u32));
            let state = poisson_cutpoints(&theta, leaves, &mut rng).expect("theta0 = 1");
            crate::icrt::junc_stats_from_state(&state, 1).c_heights[0]
        })
        .collect();
    Ok(ks_two_sample(
        &EmpiricalSample::new(discrete)?,
        &EmpiricalSample::new(continuum)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bijection_suite_passes() {
        let r = check_bijection().unwrap();
        assert!(r.pass(), "{:?}", r.checks);
    }

    #[test]
    fn lemj_small_batch_exact() {
        let r = check_lemj(7, 64, 30).unwrap();
        assert!(r.pass(), "{:?}", r.checks);
    }

    #[test]
    fn lemj_holds_on_tiny_trees() {
        // Small n exercises every degenerate spine shape.
        for n in 1..=6usize {
            let p = RankedProb::uniform(n);
            let q = RankedProb::uniform(n);
            for s in 0..200u64 {
                let mut rng = RngStream::new(1000 + s, 0);
                assert!(
                    lemj_instance_exact(&p, p.values(), &q, &mut rng),
                    "n = {n}, seed = {s}"
                );
            }
        }
    }

    #[test]
    fn joyal_pushforward_small_draws() {
        // Sanity at 20k draws with a loose bound; the acceptance suite runs
        // the full million at 0.01.
        let tv = joyal_pushforward_tv(3, 20_000).unwrap();
        assert!(tv < 0.06, "tv = {tv}");
    }
}
