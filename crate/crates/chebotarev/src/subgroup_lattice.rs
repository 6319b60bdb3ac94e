// Subgroup enumeration by closure saturation, maximal classes, Frattini subgroup.

use std::collections::HashMap;

use num_bigint::BigUint;

use crate::bitset::BitSet;
use crate::chebotarev_engine::{GenerationProfile, MaximalRow, MAX_ROWS};
use crate::error::{Error, Result};
use crate::group_core::{ConjugacyTable, PermGroup, DEFAULT_ORDER_CAP};

pub const DEFAULT_SUBGROUP_CAP: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LatticeCaps {
    pub max_order: usize,
    pub max_subgroups: usize,
}

impl Default for LatticeCaps {
    fn default() -> Self {
        LatticeCaps {
            max_order: DEFAULT_ORDER_CAP,
            max_subgroups: DEFAULT_SUBGROUP_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SubgroupSet {
    members: BitSet,
    size: usize,
}

impl SubgroupSet {
    /// Wraps a set of element indices after checking the subgroup axioms.
    pub fn new(g: &PermGroup, members: BitSet) -> Result<Self> {
        if !g.is_subgroup(&members) {
            return Err(Error::NotSubgroup);
        }
        Ok(Self::trusted(members))
    }

    fn trusted(members: BitSet) -> Self {
        let size = members.count();
        SubgroupSet { members, size }
    }

    pub fn members(&self) -> &BitSet {
        &self.members
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members.contains(x)
    }
}

/// Every subgroup of G with its conjugacy class.
#[derive(Clone, Debug)]
pub struct SubgroupLattice {
    pub subgroups: Vec<SubgroupSet>,
    /// conjugacy class index of each subgroup
    pub class_of: Vec<usize>,
    /// subgroup indices per conjugacy class
    pub classes: Vec<Vec<usize>>,
}

fn conjugate_set(g: &PermGroup, h: &BitSet, s: usize) -> BitSet {
    BitSet::from_indices(g.order(), h.iter().map(|x| g.conjugate(x, s)))
}

// Closure of H ∪ {x}; anything larger than |G|/2 must be G itself.
fn extend(g: &PermGroup, h: &BitSet, gens: &[usize], x: usize) -> BitSet {
    let n = g.order();
    let mut set = h.clone();
    let mut count = h.count();
    let xi = g.inv(x);
    if gens.iter().all(|&s| h.contains(g.mul(g.mul(xi, s), x))) {
        // x normalizes H, so the closure is the union of the cosets H·x^i.
        let members: Vec<usize> = h.iter().collect();
        let mut cur = x;
        while !h.contains(cur) {
            for &a in &members {
                set.insert(g.mul(a, cur));
            }
            count += members.len();
            if 2 * count > n {
                return BitSet::full(n);
            }
            cur = g.mul(cur, x);
        }
        return set;
    }
    // Products inside H stay in H, so old elements only need the new generator.
    let all: Vec<usize> = gens.iter().copied().chain([x]).collect();
    let mut list: Vec<usize> = h.iter().collect();
    let old = list.len();
    let mut head = 0;
    while head < list.len() {
        let a = list[head];
        let step = if head < old {
            &all[all.len() - 1..]
        } else {
            &all[..]
        };
        for &s in step {
            let b = g.mul(a, s);
            if set.insert(b) {
                list.push(b);
                count += 1;
                if 2 * count > n {
                    return BitSet::full(n);
                }
            }
        }
        head += 1;
    }
    set
}

struct Builder<'a> {
    g: &'a PermGroup,
    caps: LatticeCaps,
    subgroups: Vec<BitSet>,
    gens: Vec<Vec<usize>>,
    index: HashMap<BitSet, usize>,
    class_of: Vec<usize>,
    classes: Vec<Vec<usize>>,
}

impl Builder<'_> {
    // Adds the whole conjugacy class of a new subgroup; returns its class index if new.
    fn add_class(&mut self, h: BitSet, gens: Vec<usize>) -> Result<Option<usize>> {
        if self.index.contains_key(&h) {
            return Ok(None);
        }
        let c = self.classes.len();
        let mut members = Vec::new();
        let mut queue = vec![(h, gens)];
        while let Some((k, kg)) = queue.pop() {
            if self.index.contains_key(&k) {
                continue;
            }
            if self.subgroups.len() >= self.caps.max_subgroups {
                return Err(Error::SubgroupCap {
                    cap: self.caps.max_subgroups,
                });
            }
            let id = self.subgroups.len();
            self.index.insert(k.clone(), id);
            for &s in self.g.generator_indices() {
                let k2 = conjugate_set(self.g, &k, s);
                if !self.index.contains_key(&k2) {
                    let g2 = kg.iter().map(|&x| self.g.conjugate(x, s)).collect();
                    queue.push((k2, g2));
                }
            }
            self.subgroups.push(k);
            self.gens.push(kg);
            self.class_of.push(c);
            members.push(id);
        }
        members.sort_unstable();
        self.classes.push(members);
        Ok(Some(c))
    }
}

/// Enumerates all subgroups together with their conjugacy classes.
pub fn subgroup_lattice(g: &PermGroup, caps: LatticeCaps) -> Result<SubgroupLattice> {
    let n = g.order();
    if n > caps.max_order {
        return Err(Error::OrderCap {
            cap: caps.max_order,
        });
    }
    let mut b = Builder {
        g,
        caps,
        subgroups: Vec::new(),
        gens: Vec::new(),
        index: HashMap::new(),
        class_of: Vec::new(),
        classes: Vec::new(),
    };
    b.add_class(BitSet::from_indices(n, [0]), Vec::new())?;

    // Generators of the cyclic subgroups of prime-power order, one per subgroup.
    let mut seen = HashMap::new();
    let mut pp_gens = Vec::new();
    for x in 1..n {
        let o = g.element_order(x);
        if crate::numtheory::prime_power(o as u64).is_none() {
            continue;
        }
        let c = g.closure_of(&[x]);
        if seen.insert(c, x).is_none() {
            pp_gens.push(x);
        }
    }

    // Every subgroup is generated by prime-power cyclic subgroups, added one at a
    // time; expanding one representative per class reaches every class.
    let mut next = 0;
    while next < b.classes.len() {
        let rep = b.classes[next][0];
        next += 1;
        let h = b.subgroups[rep].clone();
        let hg = b.gens[rep].clone();
        if h.count() == n {
            continue;
        }
        let hn = h.count();
        // When |K : H| is prime, every element of K outside H generates K with H.
        let mut covered = h.clone();
        for &x in &pp_gens {
            if covered.contains(x) {
                continue;
            }
            let k = extend(g, &h, &hg, x);
            if crate::numtheory::is_prime((k.count() / hn) as u64) {
                covered.union_with(&k);
            }
            let mut kg = hg.clone();
            kg.push(x);
            b.add_class(k, kg)?;
        }
    }
    Ok(SubgroupLattice {
        subgroups: b.subgroups.into_iter().map(SubgroupSet::trusted).collect(),
        class_of: b.class_of,
        classes: b.classes,
    })
}

pub fn all_subgroups(g: &PermGroup, caps: LatticeCaps) -> Result<Vec<SubgroupSet>> {
    Ok(subgroup_lattice(g, caps)?.subgroups)
}

#[derive(Clone, Debug)]
pub struct MaximalClassList {
    /// lexicographically smallest member of each class
    pub reps: Vec<SubgroupSet>,
    pub class_orbit_sizes: Vec<usize>,
    /// all conjugates, per class
    pub members: Vec<Vec<SubgroupSet>>,
}

impl MaximalClassList {
    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }
}

fn maximal_from_lattice(g: &PermGroup, lat: &SubgroupLattice) -> Result<MaximalClassList> {
    let n = g.order();
    let mut found = Vec::new();
    for class in &lat.classes {
        let h = &lat.subgroups[class[0]];
        if h.size == n {
            continue;
        }
        let covered = lat.subgroups.iter().any(|k| {
            k.size > h.size && k.size < n && k.size % h.size == 0 && h.members.is_subset(&k.members)
        });
        if !covered {
            let mut members: Vec<SubgroupSet> =
                class.iter().map(|&i| lat.subgroups[i].clone()).collect();
            members.sort_by(|a, b| a.members.lex_cmp(&b.members));
            found.push(members);
        }
    }
    found.sort_by(|a, b| {
        b[0].size
            .cmp(&a[0].size)
            .then_with(|| a[0].members.lex_cmp(&b[0].members))
    });
    if found.len() > MAX_ROWS {
        return Err(Error::TooManyMaximalClasses {
            found: found.len(),
            limit: MAX_ROWS,
        });
    }
    Ok(MaximalClassList {
        reps: found.iter().map(|m| m[0].clone()).collect(),
        class_orbit_sizes: found.iter().map(Vec::len).collect(),
        members: found,
    })
}

/// Conjugacy classes of maximal subgroups, largest order first.
pub fn maximal_classes(g: &PermGroup, caps: LatticeCaps) -> Result<MaximalClassList> {
    maximal_from_lattice(g, &subgroup_lattice(g, caps)?)
}

/// Intersection of all maximal subgroups.
pub fn frattini_subgroup(g: &PermGroup, maximals: &MaximalClassList) -> SubgroupSet {
    let mut set = BitSet::full(g.order());
    for h in maximals.members.iter().flatten() {
        set.intersect_with(&h.members);
    }
    SubgroupSet::trusted(set)
}

/// Marks which conjugacy classes meet each maximal class.
pub fn intersection_matrix(
    g: &PermGroup,
    classes: &ConjugacyTable,
    maximals: &MaximalClassList,
) -> Result<GenerationProfile> {
    let rows = maximals
        .reps
        .iter()
        .zip(&maximals.class_orbit_sizes)
        .map(|(h, &orbit)| {
            let mut contains = vec![false; classes.len()];
            for x in h.members.iter() {
                contains[classes.class_of[x]] = true;
            }
            MaximalRow {
                label: Some(format!("order {}", h.size)),
                orbit_size: Some(orbit as u64),
                contains,
            }
        })
        .collect();
    GenerationProfile::new(
        BigUint::from(g.order()),
        classes
            .class_sizes
            .iter()
            .map(|&s| BigUint::from(s))
            .collect(),
        rows,
        Some(classes.class_of[0]),
    )
}

/// Everything the engine and the simulator need about a small group.
#[derive(Clone, Debug)]
pub struct GroupData {
    pub classes: ConjugacyTable,
    pub maximals: MaximalClassList,
    pub profile: GenerationProfile,
}

pub fn analyze(g: &PermGroup, caps: LatticeCaps) -> Result<GroupData> {
    let classes = crate::group_core::conjugacy_classes(g);
    let maximals = maximal_classes(g, caps)?;
    let profile = intersection_matrix(g, &classes, &maximals)?;
    Ok(GroupData {
        classes,
        maximals,
        profile,
    })
}

/// Shortcut: generation profile of a group built from scratch.
pub fn profile_of(g: &PermGroup, caps: LatticeCaps) -> Result<GenerationProfile> {
    Ok(analyze(g, caps)?.profile)
}
