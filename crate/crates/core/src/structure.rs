//! Completeness, niceness, critical numbers and extremal incomplete sets.

use std::cmp::Ordering;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dfs::{run_root, split_roots, Budget, BudgetTracker, ClosureVisitor, Visit};
use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::num;
use crate::par::{self, ExecMode};
use crate::set::{ElementSet, MultisetSequence};
use crate::subgroup::{maximal_subgroups, quotient_project, Subgroup};
use crate::sumset::{subset_sums, subset_sums_of_set};

pub fn is_complete(g: &GroupSpec, items: &MultisetSequence) -> Result<bool> {
    Ok(subset_sums(g, items)?.is_full())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubgroupDetail {
    pub index: usize,
    pub order: usize,
    #[serde(serialize_with = "crate::report::ser_set")]
    pub members: ElementSet,
    pub intersection_size: usize,
    pub sums_size: usize,
    pub spans: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NicenessVerdict {
    pub nice: bool,
    pub witness: Option<Subgroup>,
    pub details: Vec<SubgroupDetail>,
}

/// `A` is nice when some prime-index subgroup `H` has `S_{A∩H} = H`.
pub fn is_nice(g: &GroupSpec, a: &ElementSet) -> NicenessVerdict {
    let maximal = maximal_subgroups(g);
    let mut details = Vec::with_capacity(maximal.len());
    let mut witness = None;
    for h in maximal.iter() {
        let inside = a.intersection(h.members());
        let sums = subset_sums_of_set(g, &inside);
        let spans = &sums == h.members();
        if spans && witness.is_none() {
            witness = Some(h.clone());
        }
        details.push(SubgroupDetail {
            index: h.index(),
            order: h.order(),
            members: h.members().clone(),
            intersection_size: inside.count(),
            sums_size: sums.count(),
            spans,
        });
    }
    NicenessVerdict {
        nice: witness.is_some(),
        witness,
        details,
    }
}

/// Quick niceness test without the per-subgroup detail.
pub fn is_nice_fast(g: &GroupSpec, a: &ElementSet) -> bool {
    maximal_subgroups(g)
        .iter()
        .any(|h| &subset_sums_of_set(g, &a.intersection(h.members())) == h.members())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpanningCheck {
    pub quotient_order: usize,
    #[serde(serialize_with = "crate::report::ser_set")]
    pub subgroup: ElementSet,
    /// `|A \ H|`
    pub outside: usize,
    /// `|H \ A|`, reported for the alternative reading of the bound.
    pub missing_from_h: usize,
    /// `|A \ H| <= q - 2`
    pub outside_bound_holds: bool,
    /// `|H \ A| <= q - 2`, informational only.
    pub missing_bound_holds: bool,
    /// `(A \ H)/H` is an incomplete sequence in `Z_q`.
    pub quotient_incomplete: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FactBoundsReport {
    pub set_size: usize,
    pub nice: bool,
    pub spanning: Vec<SpanningCheck>,
    /// `n/p + p - 2` with `p` the smallest prime divisor.
    pub nice_size_bound: usize,
    /// Present when the set is nice.
    pub nice_size_bound_holds: Option<bool>,
    pub all_pass: bool,
}

/// Check the size consequences of niceness for an incomplete set.
pub fn fact_bounds_check(g: &GroupSpec, a: &ElementSet) -> Result<FactBoundsReport> {
    if subset_sums_of_set(g, a).is_full() {
        return Err(Error::NotIncomplete);
    }
    let n = g.order();
    let p = g.smallest_prime() as usize;
    let mut spanning = Vec::new();
    for h in maximal_subgroups(g).iter() {
        let inside = a.intersection(h.members());
        if &subset_sums_of_set(g, &inside) != h.members() {
            continue;
        }
        let q = h.index();
        let outside_set = a.difference(h.members());
        let outside = outside_set.count();
        let missing_from_h = h.members().difference(a).count();
        let projected = quotient_project(g, h, &MultisetSequence::from_set(&outside_set))?;
        let zq = GroupSpec::cyclic(q as u64)?;
        let quotient_incomplete = !subset_sums(&zq, &projected)?.is_full();
        spanning.push(SpanningCheck {
            quotient_order: q,
            subgroup: h.members().clone(),
            outside,
            missing_from_h,
            outside_bound_holds: outside + 2 <= q,
            missing_bound_holds: missing_from_h + 2 <= q,
            quotient_incomplete,
        });
    }
    let nice = !spanning.is_empty();
    let nice_size_bound = n / p + p - 2;
    let nice_size_bound_holds = nice.then(|| a.count() <= nice_size_bound);
    let all_pass = spanning
        .iter()
        .all(|c| c.outside_bound_holds && c.quotient_incomplete)
        && nice_size_bound_holds.unwrap_or(true);
    Ok(FactBoundsReport {
        set_size: a.count(),
        nice,
        spanning,
        nice_size_bound,
        nice_size_bound_holds,
        all_pass,
    })
}

/// Known value of the critical number from the classical case analysis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TheoryValue {
    Exact { value: u64 },
    Interval { lo: u64, hi: u64 },
    UpperBoundOnly { hi: u64 },
}

impl TheoryValue {
    pub fn exact(&self) -> Option<u64> {
        match *self {
            TheoryValue::Exact { value } => Some(value),
            _ => None,
        }
    }

    pub fn admits(&self, c: u64) -> bool {
        match *self {
            TheoryValue::Exact { value } => c == value,
            TheoryValue::Interval { lo, hi } => lo <= c && c <= hi,
            TheoryValue::UpperBoundOnly { hi } => c <= hi,
        }
    }
}

pub fn theory_critical_number(g: &GroupSpec) -> TheoryValue {
    let n = g.order() as u64;
    let p = g.smallest_prime();
    let h = n / p;
    if h == 1 {
        return TheoryValue::UpperBoundOnly {
            hi: num::isqrt(4 * n - 7),
        };
    }
    if p == 2 {
        let is_z2_cubed = g.canonical_key().0 == [2, 2, 2];
        let value = if h >= 5 || is_z2_cubed { h } else { h + 1 };
        return TheoryValue::Exact { value };
    }
    if num::is_prime(h) {
        if h == p || h > 2 * p {
            TheoryValue::Exact { value: p + h - 2 }
        } else {
            TheoryValue::Interval {
                lo: p + h - 2,
                hi: p + h - 1,
            }
        }
    } else {
        TheoryValue::Exact { value: p + h - 2 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub budget: Budget,
    pub mode: ExecMode,
    /// Number of leading universe elements whose include/exclude choice is
    /// fixed per independent task.
    pub split_depth: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            budget: Budget::unlimited(),
            mode: ExecMode::Parallel,
            split_depth: 6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Constraint {
    Incomplete,
    IncompleteNotNice,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchResult {
    /// Maximum size found. A lower bound when `truncated`.
    pub size: usize,
    #[serde(serialize_with = "crate::report::ser_set")]
    pub witness: ElementSet,
    pub nodes: u64,
    pub truncated: bool,
}

/// Per-subgroup closures of `A ∩ H`, kept per DFS depth.
struct NiceTracker {
    hs: Arc<Vec<Subgroup>>,
    root_len: Option<usize>,
    stack: Vec<Vec<ElementSet>>,
}

impl NiceTracker {
    /// Update for the node `subset`; returns true when some `H` is spanned.
    fn update(&mut self, g: &GroupSpec, subset: &[usize]) -> bool {
        let len = subset.len();
        let root_len = *self.root_len.get_or_insert(len);
        let depth = len - root_len;
        while self.stack.len() <= depth {
            self.stack
                .push(vec![g.empty_set(); self.hs.len()]);
        }
        if depth == 0 {
            for (i, h) in self.hs.iter().enumerate() {
                let inside: Vec<usize> = subset.iter().copied().filter(|&x| h.contains(x)).collect();
                let set = g.set_of(&inside).expect("valid");
                self.stack[0][i] = subset_sums_of_set(g, &set);
            }
        } else {
            let last = subset[len - 1];
            let (lo, hi) = self.stack.split_at_mut(depth);
            let (prev, cur) = (&lo[depth - 1], &mut hi[0]);
            for (i, h) in self.hs.iter().enumerate() {
                if h.contains(last) {
                    g.closure_step(&mut cur[i], &prev[i], last);
                } else {
                    cur[i].copy_from(&prev[i]);
                }
            }
        }
        self.stack[depth]
            .iter()
            .zip(self.hs.iter())
            .any(|(c, h)| c.count() == h.order())
    }
}

struct MaxVisitor<'a> {
    g: &'a GroupSpec,
    nice: Option<NiceTracker>,
    best: Option<Vec<usize>>,
}

impl ClosureVisitor for MaxVisitor<'_> {
    fn visit(&mut self, subset: &[usize], closure: &ElementSet, remaining: usize) -> Visit {
        if closure.is_full() {
            return Visit::Prune;
        }
        if let Some(tracker) = self.nice.as_mut() {
            if tracker.update(self.g, subset) {
                return Visit::Prune;
            }
        }
        let best_len = self.best.as_ref().map(Vec::len);
        if best_len.is_none_or(|b| subset.len() > b) {
            self.best = Some(subset.to_vec());
        }
        let best_len = self.best.as_ref().map_or(0, Vec::len);
        if subset.len() + remaining <= best_len {
            return Visit::Prune;
        }
        Visit::Descend
    }
}

fn better(a: &[usize], b: &[usize]) -> bool {
    match a.len().cmp(&b.len()) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => a < b,
    }
}

/// Maximum-size subset of `universe` satisfying a downward-closed
/// constraint. Both constraints used here are downward closed: subsets of
/// incomplete sets are incomplete and subsets of non-nice sets are not nice.
fn max_constrained(
    g: &GroupSpec,
    universe: &[usize],
    constraint: Constraint,
    cfg: &SearchConfig,
) -> SearchResult {
    let tracker = BudgetTracker::new(cfg.budget);
    let roots = split_roots(g, universe, cfg.split_depth);
    let hs = (constraint == Constraint::IncompleteNotNice).then(|| maximal_subgroups(g));
    let results = par::map(cfg.mode, &roots, |root| {
        let mut v = MaxVisitor {
            g,
            nice: hs.as_ref().map(|hs| NiceTracker {
                hs: hs.clone(),
                root_len: None,
                stack: Vec::new(),
            }),
            best: None,
        };
        let out = run_root(g, universe, root, &mut v, &tracker);
        (v.best, out)
    });
    let mut best: Vec<usize> = Vec::new();
    let mut nodes = 0;
    let mut truncated = false;
    for (cand, out) in results {
        nodes += out.nodes;
        truncated |= out.truncated;
        if let Some(c) = cand {
            if better(&c, &best) {
                best = c;
            }
        }
    }
    best.sort_unstable();
    SearchResult {
        size: best.len(),
        witness: g.set_of(&best).expect("valid"),
        nodes,
        truncated,
    }
}

/// Largest incomplete subset of `G` (or of `G \ {0}`).
pub fn max_incomplete_set(g: &GroupSpec, allow_zero: bool, cfg: &SearchConfig) -> SearchResult {
    let start = usize::from(!allow_zero);
    let universe: Vec<usize> = (start..g.order()).collect();
    max_constrained(g, &universe, Constraint::Incomplete, cfg)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalNumberResult {
    /// `c(G)`, absent when the search was truncated.
    pub exact: Option<u64>,
    /// Always a valid lower bound on `c(G)`.
    pub lower_bound: u64,
    pub theory: TheoryValue,
    /// Present when both the exact value and an exact theory value exist.
    pub matches_theory: Option<bool>,
    pub theory_admits: Option<bool>,
    #[serde(serialize_with = "crate::report::ser_set")]
    pub witness_incomplete: ElementSet,
    pub nodes: u64,
    pub truncated: bool,
    #[serde(skip)]
    pub elapsed_ms: f64,
}

/// Least `m` such that every `m`-subset of `G \ {0}` is complete.
pub fn critical_number(g: &GroupSpec, cfg: &SearchConfig) -> CriticalNumberResult {
    let t0 = Instant::now();
    let search = max_incomplete_set(g, false, cfg);
    let theory = theory_critical_number(g);
    let c = search.size as u64 + 1;
    let exact = (!search.truncated).then_some(c);
    CriticalNumberResult {
        exact,
        lower_bound: c,
        theory,
        matches_theory: exact.zip(theory.exact()).map(|(a, b)| a == b),
        theory_admits: exact.map(|c| theory.admits(c)),
        witness_incomplete: search.witness,
        nodes: search.nodes,
        truncated: search.truncated,
        elapsed_ms: t0.elapsed().as_secs_f64() * 1e3,
    }
}

pub const DEFAULT_DELTA: f64 = 1.0 / 6.0;

/// Where the largest non-nice incomplete set sits relative to the size
/// thresholds of the niceness theorems. Purely empirical: those theorems
/// need group orders far beyond exhaustive reach.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdComparison {
    pub label: &'static str,
    pub delta: f64,
    pub p1: u64,
    pub p2: u64,
    /// `(5/6 + δ) n / p1`
    pub dir1_threshold: f64,
    /// `(1 + δ) n / (p1 p2)`
    pub dir2_threshold: f64,
    pub size_reaches_dir1: bool,
    pub size_reaches_dir2: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonNiceResult {
    pub size: usize,
    #[serde(serialize_with = "crate::report::ser_set")]
    pub witness: ElementSet,
    pub nodes: u64,
    pub truncated: bool,
    pub comparison: ThresholdComparison,
}

/// Largest incomplete subset of `G` (zero allowed) that is not nice.
pub fn max_non_nice_incomplete_set(
    g: &GroupSpec,
    delta: f64,
    cfg: &SearchConfig,
) -> Result<NonNiceResult> {
    let primes = g.prime_factors();
    if primes.len() < 2 {
        return Err(Error::NotComposite(g.order()));
    }
    let universe: Vec<usize> = (0..g.order()).collect();
    let search = max_constrained(g, &universe, Constraint::IncompleteNotNice, cfg);
    let n = g.order() as f64;
    let (p1, p2) = (primes[0], primes[1]);
    let dir1 = (5.0 / 6.0 + delta) * n / p1 as f64;
    let dir2 = (1.0 + delta) * n / (p1 * p2) as f64;
    let size = search.size as f64;
    Ok(NonNiceResult {
        size: search.size,
        witness: search.witness,
        nodes: search.nodes,
        truncated: search.truncated,
        comparison: ThresholdComparison {
            label: "EMPIRICAL",
            delta,
            p1,
            p2,
            dir1_threshold: dir1,
            dir2_threshold: dir2,
            size_reaches_dir1: size >= dir1 - crate::sumset::REAL_TOL,
            size_reaches_dir2: size >= dir2 - crate::sumset::REAL_TOL,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::make_group;

    fn set(g: &GroupSpec, xs: &[usize]) -> ElementSet {
        g.set_of(xs).unwrap()
    }

    #[test]
    fn completeness_examples() {
        let z11 = make_group(&[11]).unwrap();
        let seq = MultisetSequence::from_items(11, &[1, 2, 3]).unwrap();
        assert!(!is_complete(&z11, &seq).unwrap());
        let z4 = make_group(&[4]).unwrap();
        assert!(is_complete(&z4, &MultisetSequence::from_items(4, &[1, 2, 3]).unwrap()).unwrap());
        let z2 = make_group(&[2]).unwrap();
        assert!(!is_complete(&z2, &MultisetSequence::from_items(2, &[0]).unwrap()).unwrap());
    }

    #[test]
    fn niceness_examples() {
        let z4 = make_group(&[4]).unwrap();
        let v = is_nice(&z4, &set(&z4, &[0, 1, 2]));
        assert!(v.nice);
        assert_eq!(v.witness.unwrap().members().to_vec(), vec![0, 2]);
        assert!(!is_nice(&z4, &set(&z4, &[1])).nice);
        assert!(!is_nice(&z4, &z4.empty_set()).nice);
        let z6 = make_group(&[6]).unwrap();
        // both {0,2,4} and {0,3} spanned: the witness has the smaller index
        let v = is_nice(&z6, &set(&z6, &[0, 2, 3, 4]));
        assert_eq!(v.witness.unwrap().index(), 2);
        assert_eq!(v.details.len(), 2);
    }

    #[test]
    fn fact_bounds_examples() {
        let z6 = make_group(&[6]).unwrap();
        let r = fact_bounds_check(&z6, &set(&z6, &[2, 4])).unwrap();
        assert!(r.nice && r.all_pass);
        assert_eq!(r.spanning[0].outside, 0);

        let z4 = make_group(&[4]).unwrap();
        assert_eq!(
            fact_bounds_check(&z4, &set(&z4, &[0, 1, 2])),
            Err(Error::NotIncomplete)
        );

        let z9 = make_group(&[9]).unwrap();
        let a = set(&z9, &[0, 1, 3, 6]);
        assert_eq!(subset_sums_of_set(&z9, &a).to_vec(), vec![0, 1, 3, 4, 6, 7]);
        let r = fact_bounds_check(&z9, &a).unwrap();
        assert!(r.all_pass);
        assert_eq!((r.spanning[0].outside, r.spanning[0].quotient_order), (1, 3));
    }

    #[test]
    fn theory_examples() {
        let t = |f: &[u64]| theory_critical_number(&make_group(f).unwrap());
        assert_eq!(t(&[8]), TheoryValue::Exact { value: 5 });
        assert_eq!(t(&[2, 2, 2]), TheoryValue::Exact { value: 4 });
        assert_eq!(t(&[9]), TheoryValue::Exact { value: 4 });
        assert_eq!(t(&[15]), TheoryValue::Interval { lo: 6, hi: 7 });
        assert_eq!(t(&[35]), TheoryValue::Interval { lo: 10, hi: 11 });
        assert_eq!(t(&[11]), TheoryValue::UpperBoundOnly { hi: 6 });
        assert_eq!(t(&[21]), TheoryValue::Exact { value: 8 });
        assert_eq!(t(&[27]), TheoryValue::Exact { value: 10 });
    }

    #[test]
    fn critical_examples() {
        let cfg = SearchConfig::default();
        let c = |f: &[u64]| critical_number(&make_group(f).unwrap(), &cfg);
        assert_eq!(c(&[8]).exact, Some(5));
        assert_eq!(c(&[2, 2, 2]).exact, Some(4));
        // the closed formula says 4 here; {1,2,3,8} is incomplete (misses 7)
        let z9 = c(&[9]);
        assert_eq!(z9.exact, Some(5));
        assert_eq!(z9.matches_theory, Some(false));
        assert_eq!(z9.witness_incomplete.count(), 4);
        let r = c(&[15]);
        assert_eq!(r.theory_admits, Some(true));
        let w = r.witness_incomplete;
        assert_eq!(w.count() as u64 + 1, r.exact.unwrap());
        assert!(!w.contains(0));
    }

    #[test]
    fn max_incomplete_examples() {
        let cfg = SearchConfig::default();
        let z4 = make_group(&[4]).unwrap();
        let r = max_incomplete_set(&z4, false, &cfg);
        assert_eq!(r.size, 2);
        // lexicographically first of the incomplete pairs {1,2}, {1,3}, {2,3}
        assert_eq!(r.witness.to_vec(), vec![1, 2]);
        let z2 = make_group(&[2]).unwrap();
        let r = max_incomplete_set(&z2, true, &cfg);
        assert_eq!((r.size, r.witness.to_vec()), (1, vec![0]));
    }

    #[test]
    fn non_nice_examples() {
        let cfg = SearchConfig::default();
        let z4 = make_group(&[4]).unwrap();
        let r = max_non_nice_incomplete_set(&z4, DEFAULT_DELTA, &cfg).unwrap();
        assert_eq!((r.size, r.witness.to_vec()), (3, vec![0, 1, 3]));
        assert_eq!(r.comparison.label, "EMPIRICAL");
        let v4 = make_group(&[2, 2]).unwrap();
        assert_eq!(max_non_nice_incomplete_set(&v4, DEFAULT_DELTA, &cfg).unwrap().size, 2);
        assert_eq!(
            max_non_nice_incomplete_set(&make_group(&[7]).unwrap(), DEFAULT_DELTA, &cfg),
            Err(Error::NotComposite(7))
        );
    }

    #[test]
    fn sequential_and_parallel_searches_agree() {
        let g = make_group(&[2, 6]).unwrap();
        let par_cfg = SearchConfig::default();
        let seq_cfg = SearchConfig {
            mode: ExecMode::Sequential,
            ..par_cfg
        };
        assert_eq!(max_incomplete_set(&g, true, &par_cfg), max_incomplete_set(&g, true, &seq_cfg));
        let single = SearchConfig {
            split_depth: 0,
            ..seq_cfg
        };
        let a = max_incomplete_set(&g, false, &single);
        let b = max_incomplete_set(&g, false, &par_cfg);
        assert_eq!((a.size, a.witness), (b.size, b.witness));
    }

    #[test]
    fn truncated_search_is_flagged() {
        let g = make_group(&[24]).unwrap();
        let cfg = SearchConfig {
            budget: Budget::nodes(2000),
            ..SearchConfig::default()
        };
        let r = critical_number(&g, &cfg);
        assert!(r.truncated);
        assert_eq!(r.exact, None);
        assert!(r.lower_bound >= 1);
    }
}
