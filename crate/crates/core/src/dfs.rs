//! Depth-first subset enumeration with an incremental subset-sum closure.
//!
//! Subsets of a universe are visited in include-before-exclude order: the
//! empty set, then `{u0}`, `{u0, u1}`, ... . Each edge costs one closure
//! step `S <- S ∪ (S + a) ∪ {a}` on a preallocated stack.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::group::GroupSpec;
use crate::set::ElementSet;

/// Search budget. Whichever limit trips first truncates the search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub max_nodes: Option<u64>,
    pub max_seconds: Option<f64>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget::default()
    }

    pub fn nodes(n: u64) -> Self {
        Budget {
            max_nodes: Some(n),
            max_seconds: None,
        }
    }
}

const FLUSH_EVERY: u64 = 1024;

/// Shared node counter and clock for one search, possibly spread over
/// several independent DFS contexts.
pub(crate) struct BudgetTracker {
    budget: Budget,
    start: Instant,
    nodes: AtomicU64,
    tripped: AtomicBool,
}

impl BudgetTracker {
    pub(crate) fn new(budget: Budget) -> Self {
        BudgetTracker {
            budget,
            start: Instant::now(),
            nodes: AtomicU64::new(0),
            tripped: AtomicBool::new(false),
        }
    }

    /// Add `k` nodes; returns false once the budget is exhausted.
    fn flush(&self, k: u64) -> bool {
        let total = self.nodes.fetch_add(k, Ordering::Relaxed) + k;
        if let Some(max) = self.budget.max_nodes {
            if total > max {
                self.tripped.store(true, Ordering::Relaxed);
            }
        }
        if let Some(secs) = self.budget.max_seconds {
            if self.start.elapsed().as_secs_f64() > secs {
                self.tripped.store(true, Ordering::Relaxed);
            }
        }
        !self.tripped.load(Ordering::Relaxed)
    }

    pub(crate) fn tripped(&self) -> bool {
        self.tripped.load(Ordering::Relaxed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Visit {
    Descend,
    Prune,
}

/// Called once per visited subset. `remaining` is the number of universe
/// elements that may still be added below this node.
pub trait ClosureVisitor {
    fn visit(&mut self, subset: &[usize], closure: &ElementSet, remaining: usize) -> Visit;
}

impl<F> ClosureVisitor for F
where
    F: FnMut(&[usize], &ElementSet, usize) -> Visit,
{
    fn visit(&mut self, subset: &[usize], closure: &ElementSet, remaining: usize) -> Visit {
        self(subset, closure, remaining)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DfsOutcome {
    pub nodes: u64,
    pub truncated: bool,
}

impl DfsOutcome {
    pub fn merge(self, other: DfsOutcome) -> DfsOutcome {
        DfsOutcome {
            nodes: self.nodes + other.nodes,
            truncated: self.truncated || other.truncated,
        }
    }
}

/// A subtree root: a fixed base subset plus the universe suffix still open.
#[derive(Clone, Debug)]
pub struct Root {
    pub base: Vec<usize>,
    pub closure: ElementSet,
    pub next: usize,
}

/// Fix the include/exclude decisions on the first `depth` universe elements.
/// Roots come out in include-first order, so running them in sequence
/// reproduces the single-context visiting order.
pub fn split_roots(g: &GroupSpec, universe: &[usize], depth: usize) -> Vec<Root> {
    let depth = depth.min(universe.len());
    let mut roots = vec![Root {
        base: Vec::new(),
        closure: g.empty_set(),
        next: 0,
    }];
    for (i, &a) in universe.iter().take(depth).enumerate() {
        let mut next = Vec::with_capacity(roots.len() * 2);
        for r in roots {
            let mut inc = r.clone();
            let mut c = g.empty_set();
            g.closure_step(&mut c, &r.closure, a);
            inc.closure = c;
            inc.base.push(a);
            inc.next = i + 1;
            next.push(inc);
            let mut exc = r;
            exc.next = i + 1;
            next.push(exc);
        }
        roots = next;
    }
    roots
}

struct Context<'a> {
    g: &'a GroupSpec,
    universe: &'a [usize],
    stack: Vec<ElementSet>,
    subset: Vec<usize>,
    tracker: &'a BudgetTracker,
    pending: u64,
    nodes: u64,
}

impl Context<'_> {
    fn rec<V: ClosureVisitor + ?Sized>(&mut self, start: usize, depth: usize, v: &mut V) -> bool {
        self.nodes += 1;
        self.pending += 1;
        if self.pending >= FLUSH_EVERY {
            let ok = self.tracker.flush(self.pending);
            self.pending = 0;
            if !ok {
                return false;
            }
        }
        let remaining = self.universe.len() - start;
        if v.visit(&self.subset, &self.stack[depth], remaining) == Visit::Prune {
            return true;
        }
        for i in start..self.universe.len() {
            let a = self.universe[i];
            let (lo, hi) = self.stack.split_at_mut(depth + 1);
            self.g.closure_step(&mut hi[0], &lo[depth], a);
            self.subset.push(a);
            let ok = self.rec(i + 1, depth + 1, v);
            self.subset.pop();
            if !ok {
                return false;
            }
        }
        true
    }
}

pub(crate) fn run_root<V: ClosureVisitor + ?Sized>(
    g: &GroupSpec,
    universe: &[usize],
    root: &Root,
    visitor: &mut V,
    tracker: &BudgetTracker,
) -> DfsOutcome {
    if tracker.tripped() {
        return DfsOutcome {
            nodes: 0,
            truncated: true,
        };
    }
    let levels = universe.len() - root.next + 1;
    let mut stack = vec![g.empty_set(); levels];
    stack[0].copy_from(&root.closure);
    let mut ctx = Context {
        g,
        universe,
        stack,
        subset: root.base.clone(),
        tracker,
        pending: 0,
        nodes: 0,
    };
    let finished = ctx.rec(root.next, 0, visitor);
    tracker.flush(ctx.pending);
    DfsOutcome {
        nodes: ctx.nodes,
        truncated: !finished,
    }
}

/// Enumerate subsets of `universe` depth-first in a single context.
pub fn dfs_closure_enumerate<V: ClosureVisitor + ?Sized>(
    g: &GroupSpec,
    universe: &[usize],
    visitor: &mut V,
    budget: Budget,
) -> DfsOutcome {
    let tracker = BudgetTracker::new(budget);
    let root = Root {
        base: Vec::new(),
        closure: g.empty_set(),
        next: 0,
    };
    run_root(g, universe, &root, visitor, &tracker)
}
