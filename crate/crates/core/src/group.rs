//! Finite abelian groups given as products of cyclic factors.
//!
//! Elements are encoded as mixed-radix indices with factor 0 least
//! significant: `index = x_0 + d_0 * (x_1 + d_1 * (x_2 + ...))`.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::num;
use crate::set::ElementSet;
use crate::subgroup::Subgroup;

pub const DEFAULT_ORDER_CAP: usize = 1 << 20;
pub const DEFAULT_LATTICE_CAP: usize = 512;
/// Abort lattice construction past this many subgroups.
pub const DEFAULT_LATTICE_MAX_SUBGROUPS: usize = 200_000;
const ADD_TABLE_MAX_ORDER: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupConfig {
    pub order_cap: usize,
    pub lattice_cap: usize,
    pub lattice_max_subgroups: usize,
}

impl Default for GroupConfig {
    fn default() -> Self {
        GroupConfig {
            order_cap: DEFAULT_ORDER_CAP,
            lattice_cap: DEFAULT_LATTICE_CAP,
            lattice_max_subgroups: DEFAULT_LATTICE_MAX_SUBGROUPS,
        }
    }
}

#[derive(Default)]
pub(crate) struct GroupCache {
    add_table: OnceLock<Option<Vec<u32>>>,
    pub(crate) maximal: OnceLock<Arc<Vec<Subgroup>>>,
    pub(crate) lattice: OnceLock<std::result::Result<Arc<Vec<Subgroup>>, Error>>,
}

/// Isomorphism-invariant key: the prime-power cyclic factors, sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey(pub Vec<u64>);

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|d| format!("Z{d}")).collect();
        f.write_str(&parts.join("x"))
    }
}

#[derive(Clone)]
pub struct GroupSpec {
    factors: Vec<u64>,
    strides: Vec<usize>,
    order: usize,
    prime_factors: Vec<u64>,
    canonical_key: CanonicalKey,
    config: GroupConfig,
    pub(crate) cache: Arc<GroupCache>,
}

impl PartialEq for GroupSpec {
    fn eq(&self, other: &Self) -> bool {
        self.factors == other.factors
    }
}

impl Eq for GroupSpec {}

impl fmt::Debug for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupSpec({:?})", self.factors)
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|d| format!("Z{d}")).collect();
        f.write_str(&parts.join("+"))
    }
}

/// An element together with its per-factor coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupElement {
    pub index: usize,
    pub coordinates: Vec<u64>,
}

pub fn make_group(factor_orders: &[u64]) -> Result<GroupSpec> {
    GroupSpec::with_config(factor_orders, GroupConfig::default())
}

impl GroupSpec {
    pub fn new(factor_orders: &[u64]) -> Result<Self> {
        make_group(factor_orders)
    }

    pub fn cyclic(n: u64) -> Result<Self> {
        make_group(&[n])
    }

    pub fn with_config(factor_orders: &[u64], config: GroupConfig) -> Result<Self> {
        if factor_orders.is_empty() {
            return Err(Error::EmptySpec);
        }
        let mut order: u64 = 1;
        for &d in factor_orders {
            if d < 2 {
                return Err(Error::FactorTooSmall(d));
            }
            order = order.saturating_mul(d);
            if order > config.order_cap as u64 {
                return Err(Error::OrderCapExceeded {
                    order,
                    cap: config.order_cap,
                });
            }
        }
        let mut strides = Vec::with_capacity(factor_orders.len());
        let mut acc = 1usize;
        for &d in factor_orders {
            strides.push(acc);
            acc *= d as usize;
        }
        let mut key = Vec::new();
        for &d in factor_orders {
            for (p, e) in num::factorize(d) {
                key.push(p.pow(e));
            }
        }
        key.sort_unstable();
        Ok(GroupSpec {
            factors: factor_orders.to_vec(),
            strides,
            order: order as usize,
            prime_factors: num::prime_factors(order),
            canonical_key: CanonicalKey(key),
            config,
            cache: Arc::new(GroupCache::default()),
        })
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn prime_factors(&self) -> &[u64] {
        &self.prime_factors
    }

    pub fn smallest_prime(&self) -> u64 {
        self.prime_factors[0]
    }

    pub fn canonical_key(&self) -> &CanonicalKey {
        &self.canonical_key
    }

    pub fn config(&self) -> &GroupConfig {
        &self.config
    }

    pub fn is_cyclic_encoding(&self) -> bool {
        self.factors.len() == 1
    }

    /// Number of cyclic factors whose order is divisible by `p`.
    pub fn p_rank(&self, p: u64) -> usize {
        self.factors.iter().filter(|&&d| d % p == 0).count()
    }

    pub fn check(&self, index: usize) -> Result<()> {
        if index < self.order {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index,
                order: self.order,
            })
        }
    }

    pub fn decode(&self, index: usize) -> Vec<u64> {
        let mut rest = index;
        self.factors
            .iter()
            .map(|&d| {
                let x = (rest % d as usize) as u64;
                rest /= d as usize;
                x
            })
            .collect()
    }

    pub fn encode(&self, coords: &[u64]) -> Result<usize> {
        if coords.len() != self.factors.len()
            || coords.iter().zip(&self.factors).any(|(x, d)| x >= d)
        {
            return Err(Error::BadCoordinates(coords.to_vec()));
        }
        Ok(coords
            .iter()
            .zip(&self.strides)
            .map(|(&x, &s)| x as usize * s)
            .sum())
    }

    pub fn element(&self, index: usize) -> Result<GroupElement> {
        self.check(index)?;
        Ok(GroupElement {
            index,
            coordinates: self.decode(index),
        })
    }

    pub fn zero(&self) -> usize {
        0
    }

    fn add_table(&self) -> Option<&Vec<u32>> {
        self.cache
            .add_table
            .get_or_init(|| {
                if self.order > ADD_TABLE_MAX_ORDER || self.is_cyclic_encoding() {
                    return None;
                }
                let n = self.order;
                let mut table = vec![0u32; n * n];
                for a in 0..n {
                    for b in 0..n {
                        table[a * n + b] = self.add_digits(a, b) as u32;
                    }
                }
                Some(table)
            })
            .as_ref()
    }

    fn add_digits(&self, a: usize, b: usize) -> usize {
        let (mut ra, mut rb, mut out) = (a, b, 0usize);
        for (&d, &s) in self.factors.iter().zip(&self.strides) {
            let d = d as usize;
            let x = (ra % d + rb % d) % d;
            out += x * s;
            ra /= d;
            rb /= d;
        }
        out
    }

    /// Unchecked addition of valid indices.
    #[inline]
    pub fn add(&self, a: usize, b: usize) -> usize {
        if self.is_cyclic_encoding() {
            let s = a + b;
            return if s >= self.order { s - self.order } else { s };
        }
        match self.add_table() {
            Some(t) => t[a * self.order + b] as usize,
            None => self.add_digits(a, b),
        }
    }

    pub fn neg(&self, a: usize) -> usize {
        let coords: Vec<u64> = self
            .decode(a)
            .iter()
            .zip(&self.factors)
            .map(|(&x, &d)| (d - x) % d)
            .collect();
        self.encode(&coords).expect("negation stays in range")
    }

    pub fn scalar_mul(&self, k: u64, a: usize) -> usize {
        let coords: Vec<u64> = self
            .decode(a)
            .iter()
            .zip(&self.factors)
            .map(|(&x, &d)| ((x as u128 * k as u128) % d as u128) as u64)
            .collect();
        self.encode(&coords).expect("multiple stays in range")
    }

    pub fn element_add(&self, a: usize, b: usize) -> Result<usize> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.add(a, b))
    }

    /// Least `k >= 1` with `k * a = 0`.
    pub fn element_order(&self, a: usize) -> Result<u64> {
        self.check(a)?;
        Ok(self
            .decode(a)
            .iter()
            .zip(&self.factors)
            .map(|(&x, &d)| d / num::gcd(x, d))
            .fold(1u64, |acc, o| acc / num::gcd(acc, o) * o))
    }

    /// `dst |= src + a`.
    pub fn translate_or_into(&self, dst: &mut ElementSet, src: &ElementSet, a: usize) {
        if a == 0 {
            dst.union_with(src);
            return;
        }
        if self.is_cyclic_encoding() {
            dst.or_shifted_up(src, a);
            dst.or_shifted_down(src, self.order - a);
            return;
        }
        match self.add_table() {
            Some(t) => {
                let row = &t[a * self.order..(a + 1) * self.order];
                for x in src.iter() {
                    dst.insert(row[x] as usize);
                }
            }
            None => {
                for x in src.iter() {
                    dst.insert(self.add_digits(x, a));
                }
            }
        }
    }

    pub fn translate(&self, src: &ElementSet, a: usize) -> ElementSet {
        let mut out = ElementSet::empty(self.order);
        self.translate_or_into(&mut out, src, a);
        out
    }

    /// One subset-sum closure step: `dst = src ∪ (src + a) ∪ {a}`.
    #[inline]
    pub fn closure_step(&self, dst: &mut ElementSet, src: &ElementSet, a: usize) {
        dst.copy_from(src);
        self.translate_or_into(dst, src, a);
        dst.insert(a);
    }

    pub fn full_set(&self) -> ElementSet {
        ElementSet::full(self.order)
    }

    pub fn empty_set(&self) -> ElementSet {
        ElementSet::empty(self.order)
    }

    pub fn set_of(&self, items: &[usize]) -> Result<ElementSet> {
        ElementSet::from_indices(self.order, items.iter().copied())
    }
}

/// Enumerate one representative per isomorphism class of abelian groups of
/// order `n`, in invariant-factor form `d_1 | d_2 | ... | d_k`.
pub fn abelian_groups_of_order(n: u64) -> Vec<Vec<u64>> {
    if n < 2 {
        return Vec::new();
    }
    let mut combos: Vec<Vec<Vec<u64>>> = vec![Vec::new()];
    for (p, e) in num::factorize(n) {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                num::partitions(e).into_iter().map(move |part| {
                    let mut c = c.clone();
                    c.push(part.iter().map(|&k| p.pow(k)).collect());
                    c
                })
            })
            .collect();
    }
    let mut out: Vec<Vec<u64>> = combos
        .into_iter()
        .map(|per_prime| {
            // the largest invariant factor takes the largest power of each prime
            let k = per_prime.iter().map(Vec::len).max().unwrap_or(0);
            let mut inv = vec![1u64; k];
            for powers in &per_prime {
                for (j, &q) in powers.iter().enumerate() {
                    inv[k - 1 - j] *= q;
                }
            }
            inv
        })
        .collect();
    out.sort_by_cached_key(|f| {
        GroupSpec::new(f)
            .map(|g| g.canonical_key().clone())
            .ok()
    });
    out
}

/// All abelian groups with order in `lo..=hi`, ordered by order then key.
pub fn abelian_groups_in_range(lo: u64, hi: u64) -> Vec<GroupSpec> {
    (lo.max(2)..=hi)
        .flat_map(abelian_groups_of_order)
        .filter_map(|f| GroupSpec::new(&f).ok())
        .collect()
}
