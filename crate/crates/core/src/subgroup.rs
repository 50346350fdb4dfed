//! Subgroups: generated closures, maximal subgroups as homomorphism kernels,
//! the full lattice, and projection onto cosets.

use std::collections::{HashSet, VecDeque};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::set::{ElementSet, MultisetSequence};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Subgroup {
    #[serde(serialize_with = "crate::report::ser_set")]
    members: ElementSet,
    generators: Vec<usize>,
    order: usize,
    index: usize,
}

impl Subgroup {
    /// Wrap a member set, verifying closure and collecting a generating set.
    pub fn from_members(g: &GroupSpec, members: ElementSet) -> Result<Self> {
        if members.group_order() != g.order() {
            return Err(Error::NotSubgroupOfG {
                expected: g.order(),
                found: members.group_order(),
            });
        }
        if !is_closed(g, &members) {
            return Err(Error::NotASubgroup);
        }
        Ok(Self::trusted(g, members))
    }

    /// Caller guarantees `members` is a subgroup of `g`.
    pub(crate) fn trusted(g: &GroupSpec, members: ElementSet) -> Self {
        let mut generators = Vec::new();
        let mut span = ElementSet::singleton(g.order(), 0);
        for x in members.iter() {
            if !span.contains(x) {
                span = join_cyclic(g, &span, x);
                generators.push(x);
            }
            if span.count() == members.count() {
                break;
            }
        }
        let order = members.count();
        Subgroup {
            members,
            generators,
            order,
            index: g.order() / order,
        }
    }

    pub fn members(&self) -> &ElementSet {
        &self.members
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members.contains(x)
    }
}

/// Closure under addition. For a nonempty subset of a finite group this is
/// equivalent to being a subgroup.
pub fn is_closed(g: &GroupSpec, s: &ElementSet) -> bool {
    if !s.contains(0) {
        return false;
    }
    let members = s.to_vec();
    members
        .iter()
        .all(|&x| members.iter().all(|&y| s.contains(g.add(x, y))))
}

/// `H + <x>` for a subgroup `H`.
fn join_cyclic(g: &GroupSpec, h: &ElementSet, x: usize) -> ElementSet {
    let mut out = h.clone();
    let mut shift = x;
    while !h.contains(shift) {
        g.translate_or_into(&mut out, h, shift);
        shift = g.add(shift, x);
    }
    out
}

/// Smallest subgroup containing `seeds`, by breadth-first closure.
pub fn generated_subgroup(g: &GroupSpec, seeds: &[usize]) -> Result<Subgroup> {
    for &s in seeds {
        g.check(s)?;
    }
    let mut members = ElementSet::singleton(g.order(), 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        for &s in seeds {
            let y = g.add(x, s);
            if !members.contains(y) {
                members.insert(y);
                queue.push_back(y);
            }
        }
    }
    let mut h = Subgroup::trusted(g, members);
    if !seeds.is_empty() {
        let mut gens: Vec<usize> = seeds.to_vec();
        gens.sort_unstable();
        gens.dedup();
        h.generators = gens;
    }
    Ok(h)
}

fn cmp_subgroups(a: &Subgroup, b: &Subgroup) -> std::cmp::Ordering {
    a.index
        .cmp(&b.index)
        .then_with(|| a.members.lex_cmp(&b.members))
}

/// All subgroups of prime index, as kernels of `x -> sum c_i x_i mod p` over
/// the factors with `p | d_i`, one kernel per projective coefficient vector.
pub fn maximal_subgroups(g: &GroupSpec) -> Arc<Vec<Subgroup>> {
    g.cache
        .maximal
        .get_or_init(|| Arc::new(compute_maximal(g)))
        .clone()
}

fn compute_maximal(g: &GroupSpec) -> Vec<Subgroup> {
    let mut primes: Vec<u64> = g.prime_factors().to_vec();
    primes.dedup();
    let mut out = Vec::new();
    let mut seen: HashSet<ElementSet> = HashSet::new();
    for p in primes {
        let slots: Vec<usize> = g
            .factors()
            .iter()
            .enumerate()
            .filter(|(_, &d)| d % p == 0)
            .map(|(i, _)| i)
            .collect();
        let r = slots.len() as u32;
        for code in 1..p.pow(r) {
            let coeffs: Vec<u64> = (0..r).map(|j| code / p.pow(j) % p).collect();
            // projective normalisation: first nonzero coefficient is 1
            if coeffs.iter().find(|&&c| c != 0) != Some(&1) {
                continue;
            }
            let mut members = ElementSet::empty(g.order());
            for x in 0..g.order() {
                let coords = g.decode(x);
                let v: u64 = slots
                    .iter()
                    .zip(&coeffs)
                    .map(|(&i, &c)| c * (coords[i] % p))
                    .sum();
                if v.is_multiple_of(p) {
                    members.insert(x);
                }
            }
            if seen.insert(members.clone()) {
                out.push(Subgroup::trusted(g, members));
            }
        }
    }
    out.sort_by(cmp_subgroups);
    out
}

/// Expected number of maximal subgroups: `sum_p (p^r_p - 1) / (p - 1)`.
pub fn maximal_subgroup_count(g: &GroupSpec) -> usize {
    let mut primes: Vec<u64> = g.prime_factors().to_vec();
    primes.dedup();
    primes
        .iter()
        .map(|&p| {
            let r = g.p_rank(p) as u32;
            ((p.pow(r) - 1) / (p - 1)) as usize
        })
        .sum()
}

/// The full subgroup lattice as the join-closure of the cyclic subgroups,
/// ordered by order ascending then by member list.
pub fn all_subgroups(g: &GroupSpec) -> Result<Arc<Vec<Subgroup>>> {
    let cap = g.config().lattice_cap;
    if g.order() > cap {
        return Err(Error::LatticeCapExceeded {
            order: g.order(),
            cap,
        });
    }
    g.cache
        .lattice
        .get_or_init(|| compute_lattice(g).map(Arc::new))
        .clone()
}

fn compute_lattice(g: &GroupSpec) -> Result<Vec<Subgroup>> {
    let n = g.order();
    let trivial = ElementSet::singleton(n, 0);
    let mut cyclic: Vec<(usize, ElementSet)> = Vec::new();
    let mut seen_cyclic: HashSet<ElementSet> = HashSet::new();
    for x in 0..n {
        let c = join_cyclic(g, &trivial, x);
        if seen_cyclic.insert(c.clone()) {
            cyclic.push((x, c));
        }
    }
    let mut seen: HashSet<ElementSet> = seen_cyclic.clone();
    let mut all: Vec<ElementSet> = cyclic.iter().map(|(_, c)| c.clone()).collect();
    let mut frontier = all.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for h in &frontier {
            for (x, c) in &cyclic {
                if c.is_subset_of(h) {
                    continue;
                }
                let joined = join_cyclic(g, h, *x);
                if seen.insert(joined.clone()) {
                    if seen.len() > g.config().lattice_max_subgroups {
                        return Err(Error::LatticeCapExceeded {
                            order: n,
                            cap: g.config().lattice_cap,
                        });
                    }
                    all.push(joined.clone());
                    next.push(joined);
                }
            }
        }
        frontier = next;
    }
    let mut subgroups: Vec<Subgroup> = all.into_iter().map(|m| Subgroup::trusted(g, m)).collect();
    subgroups.sort_by(|a, b| {
        a.order
            .cmp(&b.order)
            .then_with(|| a.members.lex_cmp(&b.members))
    });
    Ok(subgroups)
}

/// Coset label of every element: cosets are numbered by their minimum
/// element index, so `H` itself is label 0.
///
/// For prime index `q` this labelling is a group isomorphism `G/H -> Z_q`:
/// every such `H` is the kernel of `x -> sum c_i x_i mod q`, and the minimum
/// of each coset lies on the first factor with a nonzero coefficient.
pub fn coset_labels(g: &GroupSpec, h: &Subgroup) -> Vec<usize> {
    let n = g.order();
    let mut labels = vec![usize::MAX; n];
    let mut next = 0;
    for x in 0..n {
        if labels[x] != usize::MAX {
            continue;
        }
        for m in h.members().iter() {
            labels[g.add(x, m)] = next;
        }
        next += 1;
    }
    labels
}

/// Map each item to its coset label in `G/H`, keeping multiplicities.
pub fn quotient_project(
    g: &GroupSpec,
    h: &Subgroup,
    items: &MultisetSequence,
) -> Result<MultisetSequence> {
    if h.members().group_order() != g.order() {
        return Err(Error::NotSubgroupOfG {
            expected: g.order(),
            found: h.members().group_order(),
        });
    }
    if items.group_order() != g.order() {
        return Err(Error::GroupMismatch {
            expected: g.order(),
            found: items.group_order(),
        });
    }
    if !is_closed(g, h.members()) {
        return Err(Error::NotASubgroup);
    }
    let labels = coset_labels(g, h);
    let projected: Vec<usize> = items.items().iter().map(|&x| labels[x]).collect();
    MultisetSequence::from_items(h.index(), &projected)
}
