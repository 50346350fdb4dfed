//! Sumset kernels: subset-sum closure, l-fold sumsets, representation
//! counts, greedy disjoint representations, level sets and subgroup
//! extraction.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::num;
use crate::set::{ElementSet, MultisetSequence};
use crate::subgroup::{all_subgroups, Subgroup};

pub const DEFAULT_LENGTH_CAP: usize = 1 << 20;

/// Absolute tolerance for real-valued threshold comparisons.
pub const REAL_TOL: f64 = 1e-9;

/// Sums of all nonempty sub-multisets of `items`. The empty sum is not
/// included, so `0` is present only when it has a nonempty representation.
pub fn subset_sums(g: &GroupSpec, items: &MultisetSequence) -> Result<ElementSet> {
    subset_sums_with_cap(g, items, DEFAULT_LENGTH_CAP)
}

pub fn subset_sums_with_cap(
    g: &GroupSpec,
    items: &MultisetSequence,
    length_cap: usize,
) -> Result<ElementSet> {
    if items.group_order() != g.order() {
        return Err(Error::GroupMismatch {
            expected: g.order(),
            found: items.group_order(),
        });
    }
    let len = items.len();
    if len > length_cap {
        return Err(Error::LengthCapExceeded {
            len,
            cap: length_cap,
        });
    }
    let mut cur = g.empty_set();
    let mut next = g.empty_set();
    for &(a, mult) in items.entries() {
        for _ in 0..mult {
            g.closure_step(&mut next, &cur, a);
            if next == cur {
                // further copies of `a` cannot change the closure
                break;
            }
            std::mem::swap(&mut cur, &mut next);
        }
    }
    Ok(cur)
}

/// Subset sums of a plain set (every multiplicity 1).
pub fn subset_sums_of_set(g: &GroupSpec, a: &ElementSet) -> ElementSet {
    let mut cur = g.empty_set();
    let mut next = g.empty_set();
    for x in a.iter() {
        g.closure_step(&mut next, &cur, x);
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}

pub fn is_complete_set(g: &GroupSpec, a: &ElementSet) -> bool {
    subset_sums_of_set(g, a).is_full()
}

/// `a + b` for two sets.
pub fn sumset(g: &GroupSpec, a: &ElementSet, b: &ElementSet) -> ElementSet {
    let mut out = g.empty_set();
    for x in b.iter() {
        g.translate_or_into(&mut out, a, x);
    }
    out
}

/// `lA = {a_1 + ... + a_l}`, repetition allowed.
pub fn iterated_sumset(g: &GroupSpec, a: &ElementSet, l: i64) -> Result<ElementSet> {
    if l < 1 {
        return Err(Error::NonPositiveL);
    }
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut acc = a.clone();
    for _ in 1..l {
        acc = sumset(g, &acc, a);
    }
    Ok(acc)
}

/// Unordered representation counts `m_x = #{ {a, a'} ⊆ A : a ≠ a', a + a' = x }`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RepCountTable {
    counts: Vec<u64>,
    set_size: usize,
}

impl RepCountTable {
    pub fn get(&self, x: usize) -> u64 {
        self.counts[x]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn set_size(&self) -> usize {
        self.set_size
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn max(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    pub fn support(&self) -> ElementSet {
        let mut s = ElementSet::empty(self.counts.len());
        for (x, &m) in self.counts.iter().enumerate() {
            if m > 0 {
                s.insert(x);
            }
        }
        s
    }

    /// Targets with at least `k` representations.
    pub fn at_least(&self, k: u64) -> ElementSet {
        let mut s = ElementSet::empty(self.counts.len());
        for (x, &m) in self.counts.iter().enumerate() {
            if m >= k && m > 0 {
                s.insert(x);
            }
        }
        s
    }
}

pub fn representation_counts(g: &GroupSpec, a: &ElementSet) -> Result<RepCountTable> {
    let members = a.to_vec();
    if members.len() < 2 {
        return Err(Error::SetTooSmall {
            needed: 2,
            got: members.len(),
        });
    }
    let mut counts = vec![0u64; g.order()];
    for (i, &x) in members.iter().enumerate() {
        for &y in &members[i + 1..] {
            counts[g.add(x, y)] += 1;
        }
    }
    let table = RepCountTable {
        counts,
        set_size: members.len(),
    };
    assert_eq!(
        table.total() as u128,
        num::binomial(members.len() as u64, 2),
        "pair-count identity"
    );
    assert!(table.max() <= (members.len() / 2) as u64);
    Ok(table)
}

/// Representations of `target` as `(a, a')` with `a < a'`, ascending.
pub fn representations(g: &GroupSpec, a: &ElementSet, target: usize) -> Vec<(usize, usize)> {
    a.iter()
        .filter_map(|x| {
            let y = g.add(target, g.neg(x));
            (y > x && a.contains(y)).then_some((x, y))
        })
        .collect()
}

/// Greedily pick pairwise element-disjoint representations, one per
/// target, each time taking the first admissible pair.
pub fn greedy_disjoint_pairs(
    g: &GroupSpec,
    a: &ElementSet,
    targets: &[usize],
) -> Result<Vec<(usize, usize)>> {
    for &t in targets {
        g.check(t)?;
    }
    let mut used = g.empty_set();
    let mut out = Vec::with_capacity(targets.len());
    for (i, &t) in targets.iter().enumerate() {
        let pick = representations(g, a, t)
            .into_iter()
            .find(|&(x, y)| !used.contains(x) && !used.contains(y))
            .ok_or(Error::NoDisjointRepresentation { index: i })?;
        used.insert(pick.0);
        used.insert(pick.1);
        out.push(pick);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LargestSubgroup {
    pub subgroup: Subgroup,
    /// Number of subgroups of the maximum order contained in the set.
    pub count_at_max: usize,
}

/// Largest subgroup of `g` contained in `s`; `None` when `0 ∉ s`.
pub fn largest_subgroup_in(g: &GroupSpec, s: &ElementSet) -> Result<Option<LargestSubgroup>> {
    let lattice = all_subgroups(g)?;
    if !s.contains(0) {
        return Ok(None);
    }
    // lattice is sorted by order then members, so the last maximum-order
    // block starts with the lexicographically smallest candidate
    let mut best: Option<(usize, usize)> = None;
    for (i, h) in lattice.iter().enumerate() {
        if !h.members().is_subset_of(s) {
            continue;
        }
        best = match best {
            Some((j, c)) if lattice[j].order() == h.order() => Some((j, c + 1)),
            Some((j, c)) if lattice[j].order() > h.order() => Some((j, c)),
            _ => Some((i, 1)),
        };
    }
    Ok(best.map(|(i, c)| LargestSubgroup {
        subgroup: lattice[i].clone(),
        count_at_max: c,
    }))
}

/// Does `s` contain any subgroup other than `{0}`? Checks the cyclic
/// subgroups of prime order, which every nontrivial subgroup contains.
pub fn contains_nontrivial_subgroup(g: &GroupSpec, s: &ElementSet) -> bool {
    s.iter().filter(|&x| x != 0).any(|x| {
        let ord = g.element_order(x).expect("member in range");
        if !num::is_prime(ord) {
            return false;
        }
        let mut y = x;
        loop {
            if !s.contains(y) {
                return false;
            }
            if y == 0 {
                return true;
            }
            y = g.add(y, x);
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Level {
    pub j: u32,
    pub lower: f64,
    pub upper: f64,
    pub tail: bool,
    #[serde(serialize_with = "crate::report::ser_set")]
    pub members: ElementSet,
}

/// Strata of targets by representation count, with ratio `K = 2/ε`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelDecomposition {
    pub epsilon: f64,
    pub k: f64,
    pub m: f64,
    pub j0: u32,
    pub set_size: usize,
    /// Levels `1..=j0` followed by the tail level `j0 + 1`.
    pub levels: Vec<Level>,
}

impl LevelDecomposition {
    /// A level is large when it has more than `(1 - ε)|A|` members.
    pub fn is_large(&self, level: &Level) -> bool {
        level.members.count() as f64 > (1.0 - self.epsilon) * self.set_size as f64 + REAL_TOL
    }

    pub fn large_threshold(&self) -> f64 {
        (1.0 - self.epsilon) * self.set_size as f64
    }

    /// `sum_j K^{-j+1} M |S_j|`, an upper bound for `sum_x m_x`.
    pub fn weighted_sum(&self) -> f64 {
        self.levels
            .iter()
            .map(|l| self.m * self.k.powi(1 - l.j as i32) * l.members.count() as f64)
            .sum()
    }
}

pub fn level_decomposition(
    g: &GroupSpec,
    a: &ElementSet,
    epsilon: f64,
) -> Result<LevelDecomposition> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    let table = representation_counts(g, a)?;
    let size = table.set_size();
    let k = 2.0 / epsilon;
    let m = size as f64 / 2.0;
    let bound = |j: u32| m / k.powi(j as i32);
    let mut j0 = 0u32;
    while bound(j0 + 1) >= 1.0 - REAL_TOL {
        j0 += 1;
    }
    // the tail level j0 + 1 covers 1 <= m_x <= K^{-j0} M
    let mut levels: Vec<Level> = (1..=j0 + 1)
        .map(|j| Level {
            j,
            lower: if j <= j0 { bound(j) } else { 1.0 },
            upper: bound(j - 1),
            tail: j == j0 + 1,
            members: g.empty_set(),
        })
        .collect();
    for (x, &mx) in table.counts().iter().enumerate() {
        if mx == 0 {
            continue;
        }
        let mx = mx as f64;
        let slot = (1..=j0)
            .find(|&j| mx > bound(j) + REAL_TOL && mx <= bound(j - 1) + REAL_TOL)
            .unwrap_or(j0 + 1);
        levels[(slot - 1) as usize].members.insert(x);
    }
    Ok(LevelDecomposition {
        epsilon,
        k,
        m,
        j0,
        set_size: size,
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::make_group;

    fn seq(g: &GroupSpec, items: &[usize]) -> MultisetSequence {
        MultisetSequence::from_items(g.order(), items).unwrap()
    }

    #[test]
    fn worked_example_in_z11() {
        let g = make_group(&[11]).unwrap();
        let s = subset_sums(&g, &seq(&g, &[1, 2, 3])).unwrap();
        assert_eq!(s.to_vec(), vec![1, 2, 3, 4, 5, 6]);
        let s = subset_sums(&g, &seq(&g, &[1, 1, 3])).unwrap();
        assert_eq!(s.to_vec(), vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn subset_sum_edge_cases() {
        let g = make_group(&[4]).unwrap();
        assert!(subset_sums(&g, &seq(&g, &[])).unwrap().is_empty());
        assert_eq!(subset_sums(&g, &seq(&g, &[1, 3])).unwrap().to_vec(), vec![0, 1, 3]);
        assert!(matches!(
            subset_sums_with_cap(&g, &seq(&g, &[1, 1, 1]), 2),
            Err(Error::LengthCapExceeded { .. })
        ));
        let other = make_group(&[5]).unwrap();
        assert!(subset_sums(&g, &seq(&other, &[1])).is_err());
    }

    #[test]
    fn iterated_sumset_examples() {
        let z5 = make_group(&[5]).unwrap();
        let a = z5.set_of(&[0, 1]).unwrap();
        assert_eq!(iterated_sumset(&z5, &a, 1).unwrap(), a);
        assert_eq!(iterated_sumset(&z5, &a, 2).unwrap().to_vec(), vec![0, 1, 2]);
        let z7 = make_group(&[7]).unwrap();
        let a = z7.set_of(&[0, 1, 2]).unwrap();
        assert_eq!(iterated_sumset(&z7, &a, 2).unwrap().to_vec(), vec![0, 1, 2, 3, 4]);
        assert_eq!(iterated_sumset(&z7, &a, 0), Err(Error::NonPositiveL));
        assert_eq!(iterated_sumset(&z7, &z7.empty_set(), 2), Err(Error::EmptySet));
    }

    #[test]
    fn representation_count_examples() {
        let g = make_group(&[11]).unwrap();
        let t = representation_counts(&g, &g.set_of(&[1, 2, 3]).unwrap()).unwrap();
        let nonzero: Vec<(usize, u64)> = (0..11).filter(|&x| t.get(x) > 0).map(|x| (x, t.get(x))).collect();
        assert_eq!(nonzero, vec![(3, 1), (4, 1), (5, 1)]);

        let z7 = make_group(&[7]).unwrap();
        let t = representation_counts(&z7, &z7.full_set()).unwrap();
        assert!((0..7).all(|x| t.get(x) == 3));

        let z4 = make_group(&[4]).unwrap();
        let t = representation_counts(&z4, &z4.set_of(&[0, 1]).unwrap()).unwrap();
        assert_eq!(t.counts(), &[0, 1, 0, 0]);
        assert!(matches!(
            representation_counts(&z4, &z4.set_of(&[1]).unwrap()),
            Err(Error::SetTooSmall { .. })
        ));
    }

    #[test]
    fn greedy_examples() {
        let z7 = make_group(&[7]).unwrap();
        let pairs = greedy_disjoint_pairs(&z7, &z7.full_set(), &[1, 2]).unwrap();
        assert_eq!(pairs, vec![(0, 1), (3, 6)]);

        let z11 = make_group(&[11]).unwrap();
        let a = z11.set_of(&[1, 2, 3]).unwrap();
        assert_eq!(greedy_disjoint_pairs(&z11, &a, &[5]).unwrap(), vec![(2, 3)]);

        let z4 = make_group(&[4]).unwrap();
        assert_eq!(
            greedy_disjoint_pairs(&z4, &z4.set_of(&[0, 1]).unwrap(), &[3]),
            Err(Error::NoDisjointRepresentation { index: 0 })
        );
    }

    #[test]
    fn largest_subgroup_examples() {
        let z25 = make_group(&[25]).unwrap();
        let s = z25.set_of(&(0..=15).collect::<Vec<_>>()).unwrap();
        let best = largest_subgroup_in(&z25, &s).unwrap().unwrap();
        assert_eq!(best.subgroup.members().to_vec(), vec![0]);
        assert!(!contains_nontrivial_subgroup(&z25, &s));

        let g = make_group(&[2, 3]).unwrap();
        let best = largest_subgroup_in(&g, &g.full_set()).unwrap().unwrap();
        assert_eq!((best.subgroup.order(), best.count_at_max), (6, 1));

        let z6 = make_group(&[6]).unwrap();
        let best = largest_subgroup_in(&z6, &z6.set_of(&[0, 2, 4, 5]).unwrap())
            .unwrap()
            .unwrap();
        assert_eq!(best.subgroup.members().to_vec(), vec![0, 2, 4]);
        assert!(contains_nontrivial_subgroup(&z6, &z6.set_of(&[0, 2, 4, 5]).unwrap()));
        assert!(largest_subgroup_in(&z6, &z6.set_of(&[1, 2]).unwrap()).unwrap().is_none());

        let v4 = make_group(&[2, 2]).unwrap();
        let best = largest_subgroup_in(&v4, &v4.set_of(&[0, 1, 2]).unwrap()).unwrap().unwrap();
        assert_eq!((best.subgroup.order(), best.count_at_max), (2, 2));
        assert_eq!(best.subgroup.members().to_vec(), vec![0, 1]);
    }

    #[test]
    fn level_examples() {
        let z11 = make_group(&[11]).unwrap();
        let d = level_decomposition(&z11, &z11.set_of(&[1, 2, 3]).unwrap(), 0.5).unwrap();
        assert_eq!((d.k, d.m, d.j0), (4.0, 1.5, 0));
        assert_eq!(d.levels.len(), 1);
        assert_eq!(d.levels[0].members.to_vec(), vec![3, 4, 5]);

        let z7 = make_group(&[7]).unwrap();
        let d = level_decomposition(&z7, &z7.full_set(), 0.5).unwrap();
        assert_eq!(d.j0, 0);
        let nonempty: Vec<&Level> = d.levels.iter().filter(|l| !l.members.is_empty()).collect();
        assert_eq!(nonempty.len(), 1);
        assert_eq!((nonempty[0].j, nonempty[0].members.count()), (1, 7));
        assert!(d.is_large(nonempty[0]));

        assert!(matches!(
            level_decomposition(&z7, &z7.full_set(), 1.0),
            Err(Error::EpsilonOutOfRange(_))
        ));
    }

    #[test]
    fn levels_partition_support_on_larger_sets() {
        let g = make_group(&[64]).unwrap();
        let a = g.set_of(&(0..40).collect::<Vec<_>>()).unwrap();
        let table = representation_counts(&g, &a).unwrap();
        for eps in [0.1, 0.25, 0.5, 0.9] {
            let d = level_decomposition(&g, &a, eps).unwrap();
            let mut union = g.empty_set();
            for l in &d.levels {
                assert_eq!(union.intersection_count(&l.members), 0);
                union.union_with(&l.members);
                for x in l.members.iter() {
                    let mx = table.get(x) as f64;
                    assert!(mx <= l.upper + REAL_TOL);
                    if l.tail {
                        assert!(mx >= 1.0);
                    } else {
                        assert!(mx > l.lower - REAL_TOL);
                    }
                }
            }
            assert_eq!(union, table.support());
            assert!(d.weighted_sum() + REAL_TOL >= table.total() as f64);
        }
    }
}
