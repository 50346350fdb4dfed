//! Explicit extremal objects, checked against their claimed properties
//! when built.

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::group::{make_group, GroupSpec};
use crate::num;
use crate::set::{ElementSet, MultisetSequence};
use crate::structure::is_nice;
use crate::subgroup::maximal_subgroups;
use crate::sumset::{contains_nontrivial_subgroup, largest_subgroup_in, subset_sums, subset_sums_of_set};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructedObject {
    Set(#[serde(serialize_with = "crate::report::ser_set")] ElementSet),
    Sequence(#[serde(serialize_with = "crate::report::ser_seq")] MultisetSequence),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub id: &'static str,
    pub expected: bool,
    pub observed: bool,
    pub detail: String,
}

impl PropertyCheck {
    pub fn passed(&self) -> bool {
        self.expected == self.observed
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstructionResult {
    name: &'static str,
    #[serde(skip)]
    group: GroupSpec,
    group_factors: Vec<u64>,
    object: ConstructedObject,
    properties: Vec<PropertyCheck>,
    facts: Value,
    valid: bool,
}

impl ConstructionResult {
    fn new(
        name: &'static str,
        group: GroupSpec,
        object: ConstructedObject,
        properties: Vec<PropertyCheck>,
        facts: Value,
    ) -> Self {
        let valid = properties.iter().all(PropertyCheck::passed);
        ConstructionResult {
            name,
            group_factors: group.factors().to_vec(),
            group,
            object,
            properties,
            facts,
            valid,
        }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn object(&self) -> &ConstructedObject {
        &self.object
    }

    /// The constructed set; `None` for sequence constructions.
    pub fn set(&self) -> Option<&ElementSet> {
        match &self.object {
            ConstructedObject::Set(s) => Some(s),
            ConstructedObject::Sequence(_) => None,
        }
    }

    pub fn properties(&self) -> &[PropertyCheck] {
        &self.properties
    }

    pub fn property(&self, id: &str) -> Option<&PropertyCheck> {
        self.properties.iter().find(|p| p.id == id)
    }

    pub fn facts(&self) -> &Value {
        &self.facts
    }

    pub fn is_valid(&self) -> bool {
        self.valid
    }
}

fn check(id: &'static str, expected: bool, observed: bool, detail: impl Into<String>) -> PropertyCheck {
    PropertyCheck {
        id,
        expected,
        observed,
        detail: detail.into(),
    }
}

fn require_prime(p: u64) -> Result<()> {
    if num::is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

/// `A = {0, 1, ..., p}` in `Z_{p²}`: larger than `sqrt(n)`, yet `S_A`
/// holds no nontrivial subgroup.
pub fn staircase_example(p: u64) -> Result<ConstructionResult> {
    require_prime(p)?;
    if p < 5 {
        // for p = 3, S_A = {0..6} already contains {0, 3, 6}
        return Err(Error::PTooSmall { value: p, min: 5 });
    }
    let g = make_group(&[p * p])?;
    let top = (p * (p + 1) / 2) as usize;
    let a = g.set_of(&(0..=p as usize).collect::<Vec<_>>())?;
    let sums = subset_sums_of_set(&g, &a);
    let segment = sums.iter().eq(0..=top);
    let trivial = !contains_nontrivial_subgroup(&g, &sums);
    let mut properties = vec![
        check("size_exceeds_sqrt_n", true, a.count() as u64 > p, format!("|A| = {}, sqrt(n) = {p}", a.count())),
        check("sums_are_initial_segment", true, segment, format!("S_A = {{0..{top}}}")),
        check("no_nontrivial_subgroup_in_sums", true, trivial, "prime-order cyclic subgroups scanned"),
    ];
    if g.order() <= g.config().lattice_cap {
        let largest = largest_subgroup_in(&g, &sums)?.map_or(0, |l| l.subgroup.order());
        properties.push(check(
            "lattice_largest_subgroup_trivial",
            true,
            largest == 1,
            format!("largest subgroup in S_A has order {largest}"),
        ));
    }
    let facts = json!({ "p": p, "sums_max": top });
    Ok(ConstructionResult::new("staircase", g, ConstructedObject::Set(a), properties, facts))
}

/// `A = {(x, 0) : 0 <= x <= m} ∪ {(0, y) : 0 <= y < q}` in
/// `Z_{p²} ⊕ Z_q`, with `m` the largest integer with `m(m+1)/2 < p² - 1`.
pub fn dir2_sharp_example(p: u64, q: u64) -> Result<ConstructionResult> {
    require_prime(p)?;
    require_prime(q)?;
    if p >= q {
        return Err(Error::PrimesOutOfOrder { p, q });
    }
    let p2 = p * p;
    let g = make_group(&[p2, q])?;
    let mut m = 0u64;
    while (m + 1) * (m + 2) / 2 < p2 - 1 {
        m += 1;
    }
    let mut items: Vec<usize> = (0..=m).map(|x| g.encode(&[x, 0])).collect::<Result<_>>()?;
    for y in 0..q {
        items.push(g.encode(&[0, y])?);
    }
    let a = g.set_of(&items)?;
    let sums = subset_sums_of_set(&g, &a);
    let verdict = is_nice(&g, &a);
    let n_over_p2 = g.order() as u64 / p2;
    let size = a.count() as u64;
    let properties = vec![
        check("size_is_m_plus_q", true, size == m + q, format!("|A| = {size}, m = {m}, q = {q}")),
        check(
            "m_is_maximal",
            true,
            m * (m + 1) / 2 < p2 - 1 && p2 - 1 <= (m + 1) * (m + 2) / 2,
            format!("m(m+1)/2 = {} < p²-1 = {}", m * (m + 1) / 2, p2 - 1),
        ),
        check(
            "incomplete",
            true,
            !sums.is_full(),
            format!("S_A misses {} elements", g.order() - sums.count()),
        ),
        check(
            "nice",
            false,
            verdict.nice,
            format!(
                "spanned maximal subgroups: {}",
                verdict.details.iter().filter(|d| d.spans).count()
            ),
        ),
    ];
    let facts = json!({
        "p": p,
        "q": q,
        "m": m,
        "size": size,
        "size_minus_n_over_p2": size as i64 - n_over_p2 as i64,
    });
    Ok(ConstructionResult::new("dir2-sharp", g, ConstructedObject::Set(a), properties, facts))
}

/// The all-ones sequence of length `p - 2` in `Z_p`; its sums together
/// with 0 are `{0, ..., p-2}`.
pub fn fact1_extremal_sequence(p: u64) -> Result<ConstructionResult> {
    require_prime(p)?;
    let g = make_group(&[p])?;
    let seq = MultisetSequence::from_items(p as usize, &vec![1; p as usize - 2])?;
    let mut with_zero = subset_sums(&g, &seq)?;
    with_zero.insert(0);
    let properties = vec![
        check(
            "spans_with_zero",
            false,
            with_zero.is_full(),
            format!("|S ∪ {{0}}| = {}", with_zero.count()),
        ),
        check(
            "sums_with_zero_are_initial_segment",
            true,
            with_zero.iter().eq(0..p as usize - 1),
            format!("S ∪ {{0}} = {{0..{}}}", p - 2),
        ),
    ];
    let facts = json!({ "p": p, "length": p - 2 });
    Ok(ConstructionResult::new(
        "fact1-extremal",
        g,
        ConstructedObject::Sequence(seq),
        properties,
        facts,
    ))
}

/// `(H \ {0})` plus `p - 2` elements of one nontrivial coset of an
/// index-`p` subgroup `H`, `p` the smallest prime divisor of `n`.
pub fn coset_extremal_set(g: &GroupSpec) -> Result<ConstructionResult> {
    let n = g.order();
    if num::is_prime(n as u64) {
        return Err(Error::NotComposite(n));
    }
    let p = g.smallest_prime() as usize;
    let hs = maximal_subgroups(g);
    let h = hs
        .iter()
        .find(|h| h.index() == p)
        .expect("an abelian group has a subgroup of index p for each prime p | n");
    let x = (0..n).find(|&y| !h.contains(y)).expect("H is proper");
    let coset = g.translate(h.members(), x);
    let mut a = h.members().clone();
    a.remove(0);
    for y in coset.iter().take(p - 2) {
        a.insert(y);
    }
    let sums = subset_sums_of_set(g, &a);
    let missed = g.translate(h.members(), g.scalar_mul(p as u64 - 1, x));
    let size = a.count();
    let properties = vec![
        check(
            "size_is_n_over_p_plus_p_minus_3",
            true,
            size == n / p + p - 3,
            format!("|A| = {size}"),
        ),
        check(
            "incomplete",
            true,
            !sums.is_full(),
            format!("S_A misses {} elements", n - sums.count()),
        ),
        check(
            "misses_coset",
            true,
            sums.intersection_count(&missed) == 0,
            format!("coset {}x + H avoided", p - 1),
        ),
    ];
    let facts = json!({
        "p": p,
        "subgroup": h.members().to_vec(),
        "representative": x,
        "size": size,
    });
    Ok(ConstructionResult::new(
        "coset-extremal",
        g.clone(),
        ConstructedObject::Set(a),
        properties,
        facts,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn staircase() {
        for p in [5, 7] {
            let r = staircase_example(p).unwrap();
            assert!(r.is_valid(), "{:?}", r.properties());
            assert_eq!(r.set().unwrap().count() as u64, p + 1);
        }
        assert_eq!(staircase_example(3).unwrap_err(), Error::PTooSmall { value: 3, min: 5 });
        assert_eq!(staircase_example(9).unwrap_err(), Error::NotPrime(9));
    }

    #[test]
    fn dir2_sharp() {
        for (p, q, m, size) in [(3, 5, 3, 8), (3, 7, 3, 10), (5, 7, 6, 13)] {
            let r = dir2_sharp_example(p, q).unwrap();
            assert!(r.is_valid(), "{:?}", r.properties());
            assert_eq!(r.facts()["m"], m);
            assert_eq!(r.set().unwrap().count(), size);
            assert_eq!(r.facts()["size_minus_n_over_p2"], m);
        }
        assert_eq!(dir2_sharp_example(5, 3).unwrap_err(), Error::PrimesOutOfOrder { p: 5, q: 3 });
    }

    #[test]
    fn dir2_sharp_members() {
        let r = dir2_sharp_example(3, 5).unwrap();
        let g = r.group();
        let coords: Vec<Vec<u64>> = r.set().unwrap().iter().map(|i| g.decode(i)).collect();
        assert!(coords.contains(&vec![3, 0]) && coords.contains(&vec![0, 4]));
        assert!(!coords.contains(&vec![4, 0]));
    }

    #[test]
    fn fact1_extremal() {
        for p in [3, 5, 7, 11] {
            assert!(fact1_extremal_sequence(p).unwrap().is_valid());
        }
        let r = fact1_extremal_sequence(2).unwrap();
        assert!(r.is_valid());
        assert_eq!(r.object(), &ConstructedObject::Sequence(MultisetSequence::empty(2)));
    }

    #[test]
    fn coset_extremal() {
        let z9 = make_group(&[9]).unwrap();
        let r = coset_extremal_set(&z9).unwrap();
        assert_eq!(r.set().unwrap().to_vec(), vec![1, 3, 6]);
        assert!(r.is_valid());
        let z4 = make_group(&[4]).unwrap();
        assert_eq!(coset_extremal_set(&z4).unwrap().set().unwrap().to_vec(), vec![2]);
        let r = coset_extremal_set(&make_group(&[2, 2, 2]).unwrap()).unwrap();
        assert_eq!(r.set().unwrap().count(), 3);
        assert!(r.is_valid());
        assert_eq!(coset_extremal_set(&make_group(&[7]).unwrap()).unwrap_err(), Error::NotComposite(7));
    }

    #[test]
    fn serializes_validity() {
        let v = serde_json::to_value(staircase_example(5).unwrap()).unwrap();
        assert_eq!(v["valid"], true);
        assert_eq!(v["object"]["set"], json!([0, 1, 2, 3, 4, 5]));
    }
}
