//! Numeric constants, exhaustive verifiers for the classical results,
//! the subgroup-content profiler and the spread-subset sampler.

use std::time::Instant;

use rand::seq::index;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::dfs::{run_root, split_roots, Budget, BudgetTracker, Visit};
use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::num;
use crate::par::{self, ExecMode};
use crate::set::ElementSet;
use crate::structure::fact_bounds_check;
use crate::subgroup::{all_subgroups, maximal_subgroups};
use crate::sumset::{sumset, REAL_TOL};

// ---------------------------------------------------------------------------
// constants

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryCheck {
    pub holds_at_n_eps: bool,
    pub fails_below: bool,
    pub samples: Vec<u64>,
    pub samples_hold: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantsRecord {
    pub epsilon: f64,
    /// `C(ε) = sqrt((40/ε²) / ln(2/ε))`
    pub c: f64,
    /// Least `m` such that every `n >= m` has `n >= C sqrt(n ln n) > 4/ε²`.
    pub n_eps: u64,
    /// `500/ε⁴`
    pub limit_500: f64,
    pub sanity_500: bool,
    pub boundary: BoundaryCheck,
}

fn constants_conditions(c: f64, eps: f64, n: u64) -> (bool, bool) {
    let nf = n as f64;
    let ln = nf.ln();
    (nf >= c * c * ln, c * (nf * ln).sqrt() > 4.0 / (eps * eps))
}

pub fn compute_constants(epsilon: f64) -> Result<ConstantsRecord> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    let c = ((40.0 / (epsilon * epsilon)) / (2.0 / epsilon).ln()).sqrt();
    let holds = |n| {
        let (a, b) = constants_conditions(c, epsilon, n);
        a && b
    };
    // n - C² ln n decreases up to C² and increases after it; below C² the
    // first condition fails for n >= 2 and the second fails at n = 1.
    let mut n = (c * c).floor() as u64 + 1;
    while !holds(n) {
        n += 1;
    }
    let samples: Vec<u64> = (1..=64u64).map(|k| n + k * k * k).collect();
    let boundary = BoundaryCheck {
        holds_at_n_eps: holds(n),
        fails_below: !holds(n - 1),
        samples_hold: samples.iter().all(|&m| holds(m)),
        samples,
    };
    let limit_500 = 500.0 / epsilon.powi(4);
    Ok(ConstantsRecord {
        epsilon,
        c,
        n_eps: n,
        limit_500,
        sanity_500: n as f64 <= limit_500,
        boundary,
    })
}

// ---------------------------------------------------------------------------
// verifier reports

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Violation {
    pub group: String,
    pub items: Vec<usize>,
    pub l: Option<u32>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifierReport {
    pub property: String,
    pub range: String,
    pub instances: u64,
    pub violations: Vec<Violation>,
    /// Recorded deviations that do not count as failures.
    pub findings: Vec<Violation>,
    pub sampled: bool,
    /// For properties with a designated extremal witness.
    pub witness_ok: Option<bool>,
    #[serde(skip)]
    pub elapsed_ms: f64,
}

impl VerifierReport {
    fn new(property: &str, range: String) -> Self {
        VerifierReport {
            property: property.to_string(),
            range,
            instances: 0,
            violations: Vec::new(),
            findings: Vec::new(),
            sampled: false,
            witness_ok: None,
            elapsed_ms: 0.0,
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.witness_ok != Some(false)
    }

    /// Fold another report for the same property into this one.
    pub fn absorb(&mut self, other: VerifierReport) {
        self.instances += other.instances;
        self.violations.extend(other.violations);
        self.findings.extend(other.findings);
        self.sampled |= other.sampled;
        self.witness_ok = match (self.witness_ok, other.witness_ok) {
            (Some(a), Some(b)) => Some(a && b),
            (a, b) => a.or(b),
        };
        self.elapsed_ms += other.elapsed_ms;
        self.violations.sort();
        self.findings.sort();
    }

    /// Combine per-group reports into one report over `range`.
    pub fn combine(property: &str, range: String, parts: Vec<VerifierReport>) -> Self {
        let mut out = VerifierReport::new(property, range);
        for p in parts {
            out.absorb(p);
        }
        out
    }

    fn finish(mut self, t0: Instant) -> Self {
        self.violations.sort();
        self.findings.sort();
        self.elapsed_ms = t0.elapsed().as_secs_f64() * 1e3;
        self
    }
}

#[derive(Default)]
struct Tally {
    instances: u64,
    violations: Vec<Violation>,
    findings: Vec<Violation>,
}

const SCAN_SPLIT_DEPTH: usize = 8;

/// Visit every subset of `universe` with its subset-sum closure, spread
/// over independent roots. Per-root accumulators come back in root order.
fn scan_subsets<T, F>(g: &GroupSpec, universe: &[usize], mode: ExecMode, visit: F) -> Vec<T>
where
    T: Default + Send,
    F: Fn(&[usize], &ElementSet, usize, &mut T) -> Visit + Sync,
{
    let tracker = BudgetTracker::new(Budget::unlimited());
    let roots = split_roots(g, universe, SCAN_SPLIT_DEPTH);
    par::map(mode, &roots, |root| {
        let mut acc = T::default();
        run_root(
            g,
            universe,
            root,
            &mut |s: &[usize], c: &ElementSet, r: usize| visit(s, c, r, &mut acc),
            &tracker,
        );
        acc
    })
}

fn merge_tallies(report: &mut VerifierReport, parts: Vec<Tally>) {
    for t in parts {
        report.instances += t.instances;
        report.violations.extend(t.violations);
        report.findings.extend(t.findings);
    }
}

pub const FACT1_MAX_P: u64 = 13;

/// Every sequence of `p - 1` nonzero elements of `Z_p` has
/// `S ∪ {0} = Z_p`, and the all-ones sequence of length `p - 2` does not.
pub fn verify_fact1(p: u64, mode: ExecMode) -> Result<VerifierReport> {
    if !num::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if p > FACT1_MAX_P {
        return Err(Error::PTooLarge {
            value: p,
            max: FACT1_MAX_P,
        });
    }
    let t0 = Instant::now();
    let g = GroupSpec::cyclic(p)?;
    let len = (p - 1) as usize;
    let firsts: Vec<usize> = (1..p as usize).collect();
    let parts = par::map(mode, &firsts, |&first| {
        let mut stack = vec![g.empty_set(); len + 1];
        let mut seq = Vec::with_capacity(len);
        let mut tally = Tally::default();
        let (lo, hi) = stack.split_at_mut(1);
        g.closure_step(&mut hi[0], &lo[0], first);
        seq.push(first);
        fact1_rec(&g, first, 1, &mut stack, &mut seq, &mut tally);
        tally
    });
    let mut report = VerifierReport::new("fact1", format!("p={p}, length {len}"));
    merge_tallies(&mut report, parts);
    let ones = crate::set::MultisetSequence::from_items(p as usize, &vec![1; len - 1])?;
    let mut s = crate::sumset::subset_sums(&g, &ones)?;
    s.insert(0);
    report.witness_ok = Some(!s.is_full());
    Ok(report.finish(t0))
}

fn fact1_rec(
    g: &GroupSpec,
    min: usize,
    depth: usize,
    stack: &mut [ElementSet],
    seq: &mut Vec<usize>,
    tally: &mut Tally,
) {
    let p = g.order();
    if depth == p - 1 {
        tally.instances += 1;
        let mut s = stack[depth].clone();
        s.insert(0);
        if !s.is_full() {
            tally.violations.push(Violation {
                group: g.to_string(),
                items: seq.clone(),
                l: None,
                detail: format!("S ∪ {{0}} has {} elements", s.count()),
            });
        }
        return;
    }
    for v in min..p {
        let (lo, hi) = stack.split_at_mut(depth + 1);
        g.closure_step(&mut hi[0], &lo[depth], v);
        seq.push(v);
        fact1_rec(g, v, depth + 1, stack, seq, tally);
        seq.pop();
    }
}

pub const HALF_PLUS_TWO_MAX_ORDER: usize = 18;

/// Every subset of size `⌊n/2⌋ + 2` is complete. Exhaustive up to order
/// 18; above that `samples` random subsets are drawn and the report is
/// flagged as sampled.
pub fn verify_half_plus_two(
    g: &GroupSpec,
    mode: ExecMode,
    samples: usize,
    seed: u64,
) -> VerifierReport {
    let t0 = Instant::now();
    let n = g.order();
    let k = n / 2 + 2;
    let mut report = VerifierReport::new("half-plus-two", format!("{g}, |A| = {k}"));
    if k > n {
        return report.finish(t0);
    }
    let violation = |items: &[usize], sums: &ElementSet| Violation {
        group: g.to_string(),
        items: items.to_vec(),
        l: None,
        detail: format!("S_A misses {:?}", sums.complement().to_vec()),
    };
    if n <= HALF_PLUS_TWO_MAX_ORDER {
        let universe: Vec<usize> = (0..n).collect();
        let parts = scan_subsets(g, &universe, mode, |s, c, rem, t: &mut Tally| {
            if s.len() == k {
                t.instances += 1;
                if !c.is_full() {
                    t.violations.push(violation(s, c));
                }
                return Visit::Prune;
            }
            if s.len() + rem < k {
                Visit::Prune
            } else {
                Visit::Descend
            }
        });
        merge_tallies(&mut report, parts);
    } else {
        report.sampled = true;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let mut items = index::sample(&mut rng, n, k).into_vec();
            items.sort_unstable();
            let a = g.set_of(&items).expect("sampled in range");
            let sums = crate::sumset::subset_sums_of_set(g, &a);
            report.instances += 1;
            if !sums.is_full() {
                report.violations.push(violation(&items, &sums));
            }
        }
    }
    report.finish(t0)
}

pub const ZERO_SUM_MAX_ORDER: usize = 20;

/// Every subset with `|A| >= ⌈3 sqrt(n)⌉` has `0 ∈ S_A`.
pub fn verify_zero_sum(g: &GroupSpec, mode: ExecMode) -> Result<VerifierReport> {
    let n = g.order();
    if n > ZERO_SUM_MAX_ORDER {
        return Err(Error::CapExceeded(format!(
            "zero-sum verification is exhaustive only up to order {ZERO_SUM_MAX_ORDER}"
        )));
    }
    let t0 = Instant::now();
    let t = num::ceil_three_sqrt(n as u64) as usize;
    let mut report = VerifierReport::new("zero-sum", format!("{g}, |A| >= {t}"));
    if t > n {
        return Ok(report.finish(t0));
    }
    let universe: Vec<usize> = (0..n).collect();
    let parts = scan_subsets(g, &universe, mode, |s, c, rem, tally: &mut Tally| {
        if s.len() + rem < t {
            return Visit::Prune;
        }
        if s.len() >= t {
            tally.instances += 1;
            if !c.contains(0) {
                tally.violations.push(Violation {
                    group: g.to_string(),
                    items: s.to_vec(),
                    l: None,
                    detail: "0 not in S_A".into(),
                });
            }
        }
        Visit::Descend
    });
    merge_tallies(&mut report, parts);
    Ok(report.finish(t0))
}

pub const FACT_BOUNDS_MAX_ORDER: usize = 16;

/// Run the niceness size checks on every incomplete subset of `G`.
/// Failures of the `|H \ A| <= q - 2` reading are findings only.
pub fn verify_fact_bounds(g: &GroupSpec, mode: ExecMode) -> Result<VerifierReport> {
    let n = g.order();
    if n > FACT_BOUNDS_MAX_ORDER {
        return Err(Error::CapExceeded(format!(
            "fact bounds are checked exhaustively only up to order {FACT_BOUNDS_MAX_ORDER}"
        )));
    }
    let t0 = Instant::now();
    let universe: Vec<usize> = (0..n).collect();
    let parts = scan_subsets(g, &universe, mode, |s, c, _, tally: &mut Tally| {
        if c.is_full() {
            // every superset is complete as well
            return Visit::Prune;
        }
        tally.instances += 1;
        let a = g.set_of(s).expect("in range");
        let r = fact_bounds_check(g, &a).expect("incomplete by construction");
        let record = |detail: String| Violation {
            group: g.to_string(),
            items: s.to_vec(),
            l: None,
            detail,
        };
        if !r.all_pass {
            tally.violations.push(record(format!("{r:?}")));
        }
        for sc in r.spanning.iter().filter(|sc| !sc.missing_bound_holds) {
            tally.findings.push(record(format!(
                "|H \\ A| = {} > q - 2 = {} for q = {}",
                sc.missing_from_h,
                sc.quotient_order as i64 - 2,
                sc.quotient_order
            )));
        }
        Visit::Descend
    });
    let mut report = VerifierReport::new("fact-bounds", format!("{g}, all incomplete A"));
    merge_tallies(&mut report, parts);
    Ok(report.finish(t0))
}

pub const OLSON_MAX_ORDER: usize = 16;
pub const OLSON_MAX_L: u32 = 6;

/// Growth of `lA` for every `A ∋ 0` and `1 <= l <= max_l`:
/// the printed bound `|lA| >= |A| + (l-1)(|A|/2 + 1)` (deviations are
/// findings), the weaker `|lA| >= (l+1)|A|/2` and the consequence
/// `(l+1)|A| >= 2|G| => lA = <A>` (deviations are violations).
pub fn verify_olson_growth(g: &GroupSpec, max_l: u32, mode: ExecMode) -> Result<VerifierReport> {
    let n = g.order();
    if n > OLSON_MAX_ORDER {
        return Err(Error::CapExceeded(format!("olson: order {n} > {OLSON_MAX_ORDER}")));
    }
    if max_l > OLSON_MAX_L || max_l == 0 {
        return Err(Error::CapExceeded(format!("olson: l = {max_l} outside 1..={OLSON_MAX_L}")));
    }
    let t0 = Instant::now();
    let parts = par::map_range(mode, 0..1u64 << (n - 1), |mask| {
        let mut tally = Tally::default();
        let mut a = g.empty_set();
        a.insert(0);
        for i in 0..n - 1 {
            if mask >> i & 1 == 1 {
                a.insert(i + 1);
            }
        }
        olson_check(g, &a, max_l, &mut tally);
        tally
    });
    let mut report = VerifierReport::new("olson", format!("{g}, A ∋ 0, l <= {max_l}"));
    merge_tallies(&mut report, parts);
    Ok(report.finish(t0))
}

fn olson_check(g: &GroupSpec, a: &ElementSet, max_l: u32, tally: &mut Tally) {
    let n = g.order() as u64;
    let size = a.count() as u64;
    // <A> as the stable value of the increasing chain lA (0 ∈ A)
    let mut span = a.clone();
    loop {
        let next = sumset(g, &span, a);
        if next == span {
            break;
        }
        span = next;
    }
    let mut la = a.clone();
    for l in 1..=max_l as u64 {
        if l > 1 {
            la = sumset(g, &la, a);
        }
        tally.instances += 1;
        let lsize = la.count() as u64;
        let full = la == span;
        let record = |detail: String| Violation {
            group: g.to_string(),
            items: a.to_vec(),
            l: Some(l as u32),
            detail,
        };
        // printed: |lA| >= |A| + (l-1)(|A|/2 + 1), doubled to stay integral
        if !full && 2 * lsize < 2 * size + (l - 1) * (size + 2) {
            tally.findings.push(record(format!(
                "|lA| = {lsize} < {} and lA != <A> (|<A>| = {})",
                size as f64 + (l - 1) as f64 * (size as f64 / 2.0 + 1.0),
                span.count()
            )));
        }
        if !full && 2 * lsize < (l + 1) * size {
            tally.violations.push(record(format!(
                "weak bound: |lA| = {lsize} < (l+1)|A|/2 = {}",
                ((l + 1) * size) as f64 / 2.0
            )));
        }
        if (l + 1) * size >= 2 * n && !full {
            tally.violations.push(record(format!(
                "(l+1)|A| = {} >= 2|G| but lA != <A>",
                (l + 1) * size
            )));
        }
    }
}

// ---------------------------------------------------------------------------
// subgroup-content profile

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileMode {
    Exhaustive,
    Sampled { samples: usize },
}

pub const PROFILE_EXHAUSTIVE_MAX_ORDER: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioWitness {
    pub set: Vec<usize>,
    pub subgroup_order: usize,
    /// `|largest subgroup in S_A| / |A|`
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubgroupProfile {
    pub label: &'static str,
    pub threshold: usize,
    pub mode: ProfileMode,
    pub instances: u64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    /// Lowest ratios, ties broken by the member list.
    pub worst: Vec<RatioWitness>,
}

/// Order of the largest subgroup inside `s` (0 when `0 ∉ s`), given the
/// lattice sorted by ascending order.
fn largest_order_in(lattice: &[crate::subgroup::Subgroup], s: &ElementSet) -> usize {
    if !s.contains(0) {
        return 0;
    }
    lattice
        .iter()
        .rev()
        .find(|h| h.members().is_subset_of(s))
        .map_or(0, |h| h.order())
}

pub fn subgroup_ratio(g: &GroupSpec, a: &ElementSet) -> Result<RatioWitness> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let lattice = all_subgroups(g)?;
    let sums = crate::sumset::subset_sums_of_set(g, a);
    let order = largest_order_in(&lattice, &sums);
    Ok(RatioWitness {
        set: a.to_vec(),
        subgroup_order: order,
        ratio: order as f64 / a.count() as f64,
    })
}

const PROFILE_WORST: usize = 5;

fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let k = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[k - 1]
}

/// Distribution of the subgroup content of `S_A` over sets with
/// `|A| >= size_threshold`. No assertion is made.
pub fn profile_subgroup_theorem(
    g: &GroupSpec,
    size_threshold: usize,
    mode: ProfileMode,
    seed: u64,
    exec: ExecMode,
) -> Result<SubgroupProfile> {
    let n = g.order();
    let lattice = all_subgroups(g)?;
    let threshold = size_threshold.max(1);
    let mut samples: Vec<RatioWitness> = match mode {
        ProfileMode::Exhaustive => {
            if n > PROFILE_EXHAUSTIVE_MAX_ORDER {
                return Err(Error::CapExceeded(format!(
                    "exhaustive profile only up to order {PROFILE_EXHAUSTIVE_MAX_ORDER}"
                )));
            }
            let universe: Vec<usize> = (0..n).collect();
            let parts = scan_subsets(g, &universe, exec, |s, c, rem, acc: &mut Vec<RatioWitness>| {
                if s.len() + rem < threshold {
                    return Visit::Prune;
                }
                if s.len() >= threshold {
                    let order = largest_order_in(&lattice, c);
                    acc.push(RatioWitness {
                        set: s.to_vec(),
                        subgroup_order: order,
                        ratio: order as f64 / s.len() as f64,
                    });
                }
                Visit::Descend
            });
            parts.into_iter().flatten().collect()
        }
        ProfileMode::Sampled { samples } => {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let mut out = Vec::with_capacity(samples);
            if threshold <= n {
                for _ in 0..samples {
                    let k = rng.random_range(threshold..=n);
                    let mut items = index::sample(&mut rng, n, k).into_vec();
                    items.sort_unstable();
                    let a = g.set_of(&items)?;
                    let sums = crate::sumset::subset_sums_of_set(g, &a);
                    let order = largest_order_in(&lattice, &sums);
                    out.push(RatioWitness {
                        set: items,
                        subgroup_order: order,
                        ratio: order as f64 / k as f64,
                    });
                }
            }
            out
        }
    };
    let mut ratios: Vec<f64> = samples.iter().map(|w| w.ratio).collect();
    ratios.sort_by(f64::total_cmp);
    samples.sort_by(|a, b| a.ratio.total_cmp(&b.ratio).then_with(|| a.set.cmp(&b.set)));
    samples.truncate(PROFILE_WORST);
    let stat = |q: f64| if ratios.is_empty() { f64::NAN } else { nearest_rank(&ratios, q) };
    Ok(SubgroupProfile {
        label: "EMPIRICAL",
        threshold: size_threshold,
        mode,
        instances: ratios.len() as u64,
        min: ratios.first().copied().unwrap_or(f64::NAN),
        q1: stat(0.25),
        median: stat(0.5),
        q3: stat(0.75),
        max: ratios.last().copied().unwrap_or(f64::NAN),
        worst: samples,
    })
}

// ---------------------------------------------------------------------------
// spread-subset sampler

pub const RNG_NAME: &str = "chacha20-v1(seed_from_u64(seed), stream=attempt, word_pos=2*index)";

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpreadOptions {
    pub max_attempts: u32,
    /// Use the real-valued size window exactly instead of widening it to
    /// the nearest integers.
    pub strict_window: bool,
}

impl Default for SpreadOptions {
    fn default() -> Self {
        SpreadOptions {
            max_attempts: 1000,
            strict_window: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpreadResult {
    #[serde(serialize_with = "crate::report::ser_set")]
    pub subset: ElementSet,
    pub attempts: u32,
    pub first_draw_size: usize,
    /// Largest `|S' ∩ H| / |S'|` over maximal `H`.
    pub max_fraction: f64,
    /// `1 - δ/10`
    pub fraction_bound: f64,
    pub epsilon: f64,
    pub rho: f64,
    pub size_window: (f64, f64),
    pub per_subgroup_bound: f64,
    pub rng: &'static str,
}

/// Bernoulli(ρ) inclusion for `index` under `(seed, attempt)`.
fn draw(seed: u64, attempt: u32, index: usize, rho: f64) -> bool {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(attempt as u64);
    rng.set_word_pos(2 * index as u128);
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    u < rho
}

/// Sample a subset of `s` that no maximal subgroup captures more than a
/// `1 - δ/10` fraction of.
pub fn sample_spread_subset(
    g: &GroupSpec,
    s: &ElementSet,
    delta: f64,
    seed: u64,
    opts: SpreadOptions,
) -> Result<SpreadResult> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::DeltaOutOfRange(delta));
    }
    if s.is_empty() {
        return Err(Error::EmptySet);
    }
    let hs = maximal_subgroups(g);
    let size = s.count() as f64;
    let limit = 1.0 - delta / 2.0;
    let worst = hs
        .iter()
        .map(|h| s.intersection_count(h.members()) as f64 / size)
        .fold(0.0, f64::max);
    if worst >= limit {
        return Err(Error::PreconditionViolated {
            fraction: worst,
            limit,
        });
    }
    let eps = delta / 10.0;
    let rho = (1.0 + 2.0 * eps) * delta / (2.0 * (1.0 + delta) * (1.0 + delta));
    let lo = (1.0 - eps) * rho * size;
    let hi = (1.0 + eps) * rho * size;
    let (lo_ok, hi_ok) = if opts.strict_window {
        (lo, hi)
    } else {
        ((lo + REAL_TOL).floor(), (hi - REAL_TOL).ceil())
    };
    let per_h = (1.0 + eps) * rho * (1.0 - 5.0 * eps) * size;
    let keep = (rho * size / (1.0 + 2.0 * eps) + REAL_TOL).floor() as usize;
    let bound = 1.0 - delta / 10.0;
    let members = s.to_vec();

    let mut best_fraction: Option<f64> = None;
    let mut window_hits = 0u32;
    for attempt in 0..opts.max_attempts {
        let mut s1 = g.empty_set();
        for &x in &members {
            if draw(seed, attempt, x, rho) {
                s1.insert(x);
            }
        }
        let k = s1.count() as f64;
        if k < lo_ok - REAL_TOL || k > hi_ok + REAL_TOL {
            continue;
        }
        window_hits += 1;
        if hs
            .iter()
            .any(|h| s1.intersection_count(h.members()) as f64 > per_h + REAL_TOL)
        {
            continue;
        }
        let kept: Vec<usize> = s1.iter().take(keep).collect();
        if kept.is_empty() {
            continue;
        }
        let s_prime = g.set_of(&kept)?;
        let frac = hs
            .iter()
            .map(|h| s_prime.intersection_count(h.members()) as f64 / kept.len() as f64)
            .fold(0.0, f64::max);
        best_fraction = Some(best_fraction.map_or(frac, |b: f64| b.min(frac)));
        if frac > bound + REAL_TOL {
            continue;
        }
        return Ok(SpreadResult {
            subset: s_prime,
            attempts: attempt + 1,
            first_draw_size: s1.count(),
            max_fraction: frac,
            fraction_bound: bound,
            epsilon: eps,
            rho,
            size_window: (lo, hi),
            per_subgroup_bound: per_h,
            rng: RNG_NAME,
        });
    }
    Err(Error::AttemptsExhausted {
        attempts: opts.max_attempts,
        best_max_fraction: best_fraction,
        size_window_hits: window_hits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::make_group;

    #[test]
    fn constants_at_one() {
        let r = compute_constants(1.0).unwrap();
        assert!((r.c - (40.0 / 2f64.ln()).sqrt()).abs() < 1e-12);
        assert!(r.boundary.holds_at_n_eps && r.boundary.fails_below && r.boundary.samples_hold);
        assert_eq!(r.boundary.samples.len(), 64);
        assert!(r.sanity_500);
        assert_eq!(compute_constants(0.0), Err(Error::EpsilonOutOfRange(0.0)));
        assert!(compute_constants(1.5).is_err());
    }

    #[test]
    fn fact1_small() {
        let r = verify_fact1(5, ExecMode::Sequential).unwrap();
        assert!(r.passed());
        // multisets of size 4 from 4 values
        assert_eq!(r.instances, 35);
        let r2 = verify_fact1(2, ExecMode::Sequential).unwrap();
        assert_eq!((r2.instances, r2.passed()), (1, true));
        assert_eq!(verify_fact1(9, ExecMode::Sequential), Err(Error::NotPrime(9)));
        assert!(matches!(verify_fact1(17, ExecMode::Sequential), Err(Error::PTooLarge { .. })));
    }

    #[test]
    fn half_plus_two_examples() {
        let r = verify_half_plus_two(&make_group(&[6]).unwrap(), ExecMode::Parallel, 0, 0);
        assert_eq!((r.instances, r.passed()), (6, true));
        let r = verify_half_plus_two(&make_group(&[4]).unwrap(), ExecMode::Parallel, 0, 0);
        assert_eq!(r.instances, 1);
        let r = verify_half_plus_two(&make_group(&[2]).unwrap(), ExecMode::Parallel, 0, 0);
        assert_eq!((r.instances, r.passed()), (0, true));
        let r = verify_half_plus_two(&make_group(&[21]).unwrap(), ExecMode::Parallel, 200, 1);
        assert!(r.sampled && r.passed());
        assert_eq!(r.instances, 200);
    }

    #[test]
    fn zero_sum_examples() {
        let r = verify_zero_sum(&make_group(&[16]).unwrap(), ExecMode::Parallel).unwrap();
        // sizes 12..=16
        assert_eq!(r.instances, 1820 + 560 + 120 + 16 + 1);
        assert!(r.passed());
        let r = verify_zero_sum(&make_group(&[4]).unwrap(), ExecMode::Parallel).unwrap();
        assert_eq!(r.instances, 0);
    }

    #[test]
    fn olson_pinned_finding() {
        let g = make_group(&[7]).unwrap();
        let r = verify_olson_growth(&g, 2, ExecMode::Parallel).unwrap();
        assert!(r.passed());
        assert!(r
            .findings
            .iter()
            .any(|f| f.items == [0, 1, 2] && f.l == Some(2)));
        assert_eq!(r.instances, 64 * 2);
        assert!(verify_olson_growth(&make_group(&[17]).unwrap(), 2, ExecMode::Parallel).is_err());
    }

    #[test]
    fn fact_bounds_small() {
        let r = verify_fact_bounds(&make_group(&[6]).unwrap(), ExecMode::Parallel).unwrap();
        assert!(r.passed());
        assert!(r.instances > 0);
    }

    #[test]
    fn profile_examples() {
        let z25 = make_group(&[25]).unwrap();
        let w = subgroup_ratio(&z25, &z25.set_of(&[0, 1, 2, 3, 4, 5]).unwrap()).unwrap();
        assert_eq!((w.subgroup_order, w.ratio), (1, 1.0 / 6.0));
        let z12 = make_group(&[12]).unwrap();
        let h = z12.set_of(&[0, 4, 8]).unwrap();
        assert_eq!(subgroup_ratio(&z12, &h).unwrap().ratio, 1.0);
        let p = profile_subgroup_theorem(
            &make_group(&[16]).unwrap(),
            12,
            ProfileMode::Exhaustive,
            0,
            ExecMode::Parallel,
        )
        .unwrap();
        assert_eq!(p.instances, 2517);
        assert!(p.min <= p.q1 && p.q1 <= p.median && p.median <= p.q3 && p.q3 <= p.max);
    }

    #[test]
    fn spread_full_group() {
        let g = make_group(&[9, 5]).unwrap();
        let r = sample_spread_subset(&g, &g.full_set(), 0.25, 0, SpreadOptions::default()).unwrap();
        assert!(r.max_fraction <= r.fraction_bound);
        let again = sample_spread_subset(&g, &g.full_set(), 0.25, 0, SpreadOptions::default()).unwrap();
        assert_eq!(r, again);
        let strict = SpreadOptions {
            strict_window: true,
            ..SpreadOptions::default()
        };
        // ρ|s| = 3.78 and the real window [3.6855, 3.8745] holds no integer
        assert!(matches!(
            sample_spread_subset(&g, &g.full_set(), 0.25, 0, strict),
            Err(Error::AttemptsExhausted { size_window_hits: 0, .. })
        ));
    }

    #[test]
    fn spread_precondition() {
        let g = make_group(&[9, 5]).unwrap();
        let h = maximal_subgroups(&g)[0].members().clone();
        assert!(matches!(
            sample_spread_subset(&g, &h, 0.25, 0, SpreadOptions::default()),
            Err(Error::PreconditionViolated { .. })
        ));
        assert!(matches!(
            sample_spread_subset(&g, &g.full_set(), 0.75, 0, SpreadOptions::default()),
            Err(Error::DeltaOutOfRange(_))
        ));
    }
}
