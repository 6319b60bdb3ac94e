// Permutation groups small enough to enumerate completely.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::numtheory::{inv_mod, is_prime, pow_mod, primitive_root};

pub const DEFAULT_ORDER_CAP: usize = 5000;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<u32>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let d = images.len();
        if d == 0 {
            return Err(Error::InvalidPermutation(
                "degree must be at least 1".into(),
            ));
        }
        let mut seen = vec![false; d];
        for &i in &images {
            if i >= d || seen[i] {
                return Err(Error::InvalidPermutation(format!(
                    "{images:?} is not a bijection"
                )));
            }
            seen[i] = true;
        }
        Ok(Permutation {
            images: images.into_iter().map(|i| i as u32).collect(),
        })
    }

    pub fn identity(degree: usize) -> Self {
        Permutation {
            images: (0..degree as u32).collect(),
        }
    }

    /// Builds a permutation from disjoint cycles.
    pub fn from_cycles(degree: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut img: Vec<usize> = (0..degree).collect();
        for c in cycles {
            for (k, &a) in c.iter().enumerate() {
                if a >= degree {
                    return Err(Error::InvalidPermutation(format!("point {a} out of range")));
                }
                img[a] = c[(k + 1) % c.len()];
            }
        }
        Self::new(img)
    }

    fn from_fn(degree: usize, f: impl Fn(usize) -> usize) -> Self {
        Permutation {
            images: (0..degree).map(|i| f(i) as u32).collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i] as usize
    }

    pub fn images(&self) -> Vec<usize> {
        self.images.iter().map(|&i| i as usize).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i as u32 == j)
    }

    /// Cycle lengths, including fixed points, sorted decreasingly.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut seen = vec![false; self.degree()];
        let mut out = Vec::new();
        for s in 0..self.degree() {
            if seen[s] {
                continue;
            }
            let mut len = 0;
            let mut x = s;
            while !seen[x] {
                seen[x] = true;
                x = self.apply(x);
                len += 1;
            }
            out.push(len);
        }
        out.sort_unstable_by(|a, b| b.cmp(a));
        out
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut seen = vec![false; self.degree()];
        let mut any = false;
        for s in 0..self.degree() {
            if seen[s] || self.apply(s) == s {
                continue;
            }
            any = true;
            write!(f, "(")?;
            let mut x = s;
            let mut first = true;
            while !seen[x] {
                seen[x] = true;
                if !first {
                    write!(f, " ")?;
                }
                write!(f, "{x}")?;
                first = false;
                x = self.apply(x);
            }
            write!(f, ")")?;
        }
        if !any {
            write!(f, "()")?;
        }
        Ok(())
    }
}

/// i ↦ a(b(i))
pub fn perm_compose(a: &Permutation, b: &Permutation) -> Result<Permutation> {
    if a.degree() != b.degree() {
        return Err(Error::DegreeMismatch(a.degree(), b.degree()));
    }
    Ok(Permutation {
        images: b.images.iter().map(|&i| a.images[i as usize]).collect(),
    })
}

pub fn perm_inverse(a: &Permutation) -> Permutation {
    let mut inv = vec![0u32; a.degree()];
    for (i, &j) in a.images.iter().enumerate() {
        inv[j as usize] = i as u32;
    }
    Permutation { images: inv }
}

struct Closure {
    elements: Vec<Permutation>,
    // (parent, generator) with elements[j] = elements[parent] * gens[generator]
    parent: Vec<(u32, u32)>,
    // right multiplication by each generator
    right: Vec<u32>,
}

fn closure(degree: usize, gens: &[Permutation], cap: usize) -> Result<Closure> {
    for g in gens {
        if g.degree() != degree {
            return Err(Error::DegreeMismatch(degree, g.degree()));
        }
    }
    let ng = gens.len();
    let mut elements = vec![Permutation::identity(degree)];
    let mut index: HashMap<Permutation, u32> = HashMap::new();
    index.insert(elements[0].clone(), 0);
    let mut parent = vec![(0, 0)];
    let mut right = Vec::new();
    let mut head = 0;
    while head < elements.len() {
        for (k, g) in gens.iter().enumerate() {
            let y = perm_compose(&elements[head], g)?;
            let j = match index.get(&y) {
                Some(&j) => j,
                None => {
                    if elements.len() >= cap {
                        return Err(Error::OrderCap { cap });
                    }
                    let j = elements.len() as u32;
                    index.insert(y.clone(), j);
                    elements.push(y);
                    parent.push((head as u32, k as u32));
                    j
                }
            };
            debug_assert_eq!(right.len(), head * ng + k);
            right.push(j);
        }
        head += 1;
    }
    Ok(Closure {
        elements,
        parent,
        right,
    })
}

/// Breadth-first closure of `gens` from the identity, in first-discovery order.
pub fn enumerate_elements(
    degree: usize,
    gens: &[Permutation],
    cap: usize,
) -> Result<Vec<Permutation>> {
    if cap == 0 {
        return Err(Error::InvalidParameter("cap must be at least 1".into()));
    }
    Ok(closure(degree, gens, cap)?.elements)
}

/// A permutation group with enumerated elements and a full multiplication table.
#[derive(Clone)]
pub struct PermGroup {
    degree: usize,
    generators: Vec<Permutation>,
    elements: Vec<Permutation>,
    index: HashMap<Permutation, usize>,
    gen_index: Vec<usize>,
    table: Vec<u32>,
    inverse: Vec<u32>,
}

impl fmt::Debug for PermGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PermGroup")
            .field("degree", &self.degree)
            .field("order", &self.order())
            .field("generators", &self.generators)
            .finish()
    }
}

impl PermGroup {
    pub fn from_generators(
        degree: usize,
        generators: Vec<Permutation>,
        cap: usize,
    ) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidParameter("degree must be at least 1".into()));
        }
        let cl = closure(degree, &generators, cap)?;
        let n = cl.elements.len();
        let ng = generators.len();
        let mut table = vec![0u32; n * n];
        for i in 0..n {
            let row = &mut table[i * n..(i + 1) * n];
            row[0] = i as u32;
            for j in 1..n {
                let (p, k) = cl.parent[j];
                row[j] = cl.right[row[p as usize] as usize * ng + k as usize];
            }
        }
        let mut inverse = vec![0u32; n];
        for i in 0..n {
            let row = &table[i * n..(i + 1) * n];
            inverse[i] = row
                .iter()
                .position(|&x| x == 0)
                .expect("group element has an inverse") as u32;
        }
        let gen_index = (0..ng).map(|k| cl.right[k] as usize).collect();
        let index = cl
            .elements
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, p)| (p, i))
            .collect();
        Ok(PermGroup {
            degree,
            generators,
            elements: cl.elements,
            index,
            gen_index,
            table,
            inverse,
        })
    }

    pub fn trivial(degree: usize) -> Self {
        Self::from_generators(degree, Vec::new(), 1).expect("trivial group")
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    /// Element indices of the generators.
    pub fn generator_indices(&self) -> &[usize] {
        &self.gen_index
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Permutation {
        &self.elements[i]
    }

    pub fn index_of(&self, p: &Permutation) -> Option<usize> {
        self.index.get(p).copied()
    }

    #[inline]
    pub fn mul(&self, i: usize, j: usize) -> usize {
        self.table[i * self.elements.len() + j] as usize
    }

    #[inline]
    pub fn inv(&self, i: usize) -> usize {
        self.inverse[i] as usize
    }

    /// g⁻¹ x g
    #[inline]
    pub fn conjugate(&self, x: usize, g: usize) -> usize {
        self.mul(self.mul(self.inv(g), x), g)
    }

    pub fn element_order(&self, i: usize) -> usize {
        let mut k = 1;
        let mut x = i;
        while x != 0 {
            x = self.mul(x, i);
            k += 1;
        }
        k
    }

    /// Element set of the subgroup generated by the given element indices.
    pub fn closure_of(&self, gens: &[usize]) -> BitSet {
        let mut set = BitSet::new(self.order());
        set.insert(0);
        let mut list = vec![0];
        let mut head = 0;
        while head < list.len() {
            let x = list[head];
            for &g in gens {
                let y = self.mul(x, g);
                if set.insert(y) {
                    list.push(y);
                }
            }
            head += 1;
        }
        set
    }

    /// Checks that a set of element indices is a subgroup.
    pub fn is_subgroup(&self, set: &BitSet) -> bool {
        if set.len() != self.order() || !set.contains(0) {
            return false;
        }
        let members: Vec<usize> = set.iter().collect();
        members
            .iter()
            .all(|&a| members.iter().all(|&b| set.contains(self.mul(a, b))))
    }

    pub fn is_normal(&self, set: &BitSet) -> bool {
        self.gen_index
            .iter()
            .all(|&g| set.iter().all(|x| set.contains(self.conjugate(x, g))))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjugacyTable {
    pub class_reps: Vec<usize>,
    pub class_sizes: Vec<usize>,
    pub class_of: Vec<usize>,
}

impl ConjugacyTable {
    pub fn len(&self) -> usize {
        self.class_reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class_reps.is_empty()
    }
}

/// Orbits of the conjugation action, ordered by their smallest element index.
pub fn conjugacy_classes(g: &PermGroup) -> ConjugacyTable {
    let n = g.order();
    let mut class_of = vec![usize::MAX; n];
    let mut reps = Vec::new();
    let mut sizes = Vec::new();
    for x in 0..n {
        if class_of[x] != usize::MAX {
            continue;
        }
        let c = reps.len();
        class_of[x] = c;
        let mut orbit = vec![x];
        let mut head = 0;
        while head < orbit.len() {
            let y = orbit[head];
            for &s in g.generator_indices() {
                let z = g.conjugate(y, s);
                if class_of[z] == usize::MAX {
                    class_of[z] = c;
                    orbit.push(z);
                }
            }
            head += 1;
        }
        reps.push(x);
        sizes.push(orbit.len());
    }
    ConjugacyTable {
        class_reps: reps,
        class_sizes: sizes,
        class_of,
    }
}

/// The action of G on the left cosets of a normal subgroup N, a faithful copy of G/N.
pub fn coset_action(g: &PermGroup, n: &BitSet) -> Result<PermGroup> {
    if !g.is_subgroup(n) {
        return Err(Error::NotSubgroup);
    }
    if !g.is_normal(n) {
        return Err(Error::NotNormal);
    }
    let mut coset = vec![usize::MAX; g.order()];
    let mut reps = Vec::new();
    for x in 0..g.order() {
        if coset[x] != usize::MAX {
            continue;
        }
        let c = reps.len();
        for y in n.iter() {
            coset[g.mul(x, y)] = c;
        }
        reps.push(x);
    }
    let k = reps.len();
    let gens = g
        .generator_indices()
        .iter()
        .map(|&s| Permutation::from_fn(k, |c| coset[g.mul(s, reps[c])]))
        .filter(|p| !p.is_identity())
        .collect();
    PermGroup::from_generators(k, gens, g.order())
}

/// G1 × G2 acting on the disjoint union of their point sets.
pub fn direct_product(g1: &PermGroup, g2: &PermGroup, cap: usize) -> Result<PermGroup> {
    let order = g1.order().saturating_mul(g2.order());
    if order > cap {
        return Err(Error::OrderCap { cap });
    }
    let (d1, d2) = (g1.degree(), g2.degree());
    let d = d1 + d2;
    let mut gens: Vec<Permutation> = g1
        .generators()
        .iter()
        .map(|p| Permutation::from_fn(d, |i| if i < d1 { p.apply(i) } else { i }))
        .collect();
    gens.extend(
        g2.generators()
            .iter()
            .map(|p| Permutation::from_fn(d, |i| if i < d1 { i } else { d1 + p.apply(i - d1) })),
    );
    PermGroup::from_generators(d, gens, cap)
}

/// Named group families, tagged by `family` in JSON.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupSpec {
    Cyclic {
        n: usize,
    },
    /// Dihedral group of order 2n acting on n points.
    Dihedral {
        n: usize,
    },
    Symmetric {
        n: usize,
    },
    Alternating {
        n: usize,
    },
    ElementaryAbelian {
        p: u64,
        k: usize,
    },
    Abelian {
        factors: Vec<usize>,
    },
    Psl2 {
        p: u64,
    },
    Sl2 {
        p: u64,
    },
    /// x ↦ ax + t over F_p; with `index` ℓ the multipliers are restricted to ℓ-th powers.
    Affine {
        p: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        index: Option<u64>,
    },
    Borel3 {
        p: u64,
    },
    DirectProduct {
        factors: Vec<GroupSpec>,
    },
    Generators {
        degree: usize,
        generators: Vec<Vec<usize>>,
    },
}

impl GroupSpec {
    /// Order predicted by the family formula.
    pub fn expected_order(&self) -> Option<u128> {
        let fact = |n: usize| (1..=n as u128).product::<u128>();
        Some(match self {
            GroupSpec::Cyclic { n } => *n as u128,
            GroupSpec::Dihedral { n } => 2 * *n as u128,
            GroupSpec::Symmetric { n } => fact(*n),
            GroupSpec::Alternating { n } => (fact(*n) / 2).max(1),
            GroupSpec::ElementaryAbelian { p, k } => (*p as u128).pow(*k as u32),
            GroupSpec::Abelian { factors } => factors.iter().map(|&f| f as u128).product(),
            GroupSpec::Psl2 { p } => {
                let p = *p as u128;
                p * (p * p - 1) / if p == 2 { 1 } else { 2 }
            }
            GroupSpec::Sl2 { p } => {
                let p = *p as u128;
                p * (p * p - 1)
            }
            GroupSpec::Affine { p, index } => {
                (*p as u128) * (*p as u128 - 1) / index.unwrap_or(1) as u128
            }
            GroupSpec::Borel3 { p } => {
                let p = *p as u128;
                p.pow(3) * (p - 1).pow(2)
            }
            GroupSpec::DirectProduct { factors } => factors
                .iter()
                .map(|f| f.expected_order())
                .product::<Option<u128>>()?,
            GroupSpec::Generators { .. } => return None,
        })
    }

    /// Short display name.
    pub fn label(&self) -> String {
        match self {
            GroupSpec::Cyclic { n } => format!("Z/{n}"),
            GroupSpec::Dihedral { n } => format!("D{}", 2 * n),
            GroupSpec::Symmetric { n } => format!("S{n}"),
            GroupSpec::Alternating { n } => format!("A{n}"),
            GroupSpec::ElementaryAbelian { p, k } => format!("F{p}^{k}"),
            GroupSpec::Abelian { factors } => factors
                .iter()
                .map(|f| format!("Z/{f}"))
                .collect::<Vec<_>>()
                .join(" x "),
            GroupSpec::Psl2 { p } => format!("PSL(2,{p})"),
            GroupSpec::Sl2 { p } => format!("SL(2,{p})"),
            GroupSpec::Affine { p, index: None } => format!("H{p}"),
            GroupSpec::Affine { p, index: Some(l) } => format!("C{l} in H{p}"),
            GroupSpec::Borel3 { p } => format!("B3({p})"),
            GroupSpec::DirectProduct { factors } => factors
                .iter()
                .map(|f| f.label())
                .collect::<Vec<_>>()
                .join(" x "),
            GroupSpec::Generators { degree, generators } => {
                format!("<{} generators on {degree} points>", generators.len())
            }
        }
    }
}

fn require_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{p} is not prime")))
    }
}

fn cycle(degree: usize, points: impl IntoIterator<Item = usize>) -> Permutation {
    let pts: Vec<usize> = points.into_iter().collect();
    Permutation::from_cycles(degree, &[&pts]).expect("valid cycle")
}

fn disjoint_cycles(lengths: &[usize]) -> (usize, Vec<Permutation>) {
    let degree: usize = lengths.iter().sum::<usize>().max(1);
    let mut gens = Vec::new();
    let mut start = 0;
    for &l in lengths {
        if l > 1 {
            gens.push(cycle(degree, start..start + l));
        }
        start += l;
    }
    (degree, gens)
}

fn vec_index(v: &[u64], p: u64) -> usize {
    v.iter().fold(0, |acc, &x| acc * p + x) as usize - 1
}

// Action of a matrix on the nonzero vectors of F_p^k, indexed in base p minus one.
fn matrix_action(m: &[Vec<u64>], p: u64) -> Permutation {
    let k = m.len();
    let count = (p as usize).pow(k as u32) - 1;
    Permutation::from_fn(count, |i| {
        let mut v = vec![0u64; k];
        let mut x = i as u64 + 1;
        for c in (0..k).rev() {
            v[c] = x % p;
            x /= p;
        }
        let w: Vec<u64> = (0..k)
            .map(|r| (0..k).map(|c| m[r][c] * v[c]).sum::<u64>() % p)
            .collect();
        vec_index(&w, p)
    })
}

/// Builds a faithful permutation representation of the family member.
pub fn build_group(spec: &GroupSpec, cap: usize) -> Result<PermGroup> {
    let bad = |msg: &str| Err(Error::InvalidParameter(msg.into()));
    let (degree, gens) = match spec {
        GroupSpec::Cyclic { n } => {
            if *n == 0 {
                return bad("cyclic group needs n >= 1");
            }
            disjoint_cycles(&[*n])
        }
        GroupSpec::Dihedral { n } => {
            if *n < 3 {
                return bad("dihedral group needs n >= 3 points");
            }
            let n = *n;
            (
                n,
                vec![cycle(n, 0..n), Permutation::from_fn(n, |i| (n - i) % n)],
            )
        }
        GroupSpec::Symmetric { n } => match *n {
            0 => return bad("symmetric group needs n >= 1"),
            1 => (1, vec![]),
            2 => (2, vec![cycle(2, 0..2)]),
            n => (n, vec![cycle(n, 0..2), cycle(n, 0..n)]),
        },
        GroupSpec::Alternating { n } => match *n {
            0 => return bad("alternating group needs n >= 1"),
            1 | 2 => (*n, vec![]),
            3 => (3, vec![cycle(3, 0..3)]),
            n if n % 2 == 1 => (n, vec![cycle(n, 0..3), cycle(n, 0..n)]),
            n => (n, vec![cycle(n, 0..3), cycle(n, 1..n)]),
        },
        GroupSpec::ElementaryAbelian { p, k } => {
            require_prime(*p)?;
            if *k == 0 {
                return bad("elementary abelian group needs k >= 1");
            }
            disjoint_cycles(&vec![*p as usize; *k])
        }
        GroupSpec::Abelian { factors } => {
            if factors.is_empty() || factors.contains(&0) {
                return bad("abelian group needs a nonempty list of positive factors");
            }
            disjoint_cycles(factors)
        }
        GroupSpec::Psl2 { p } => {
            require_prime(*p)?;
            let p = *p;
            let inf = p as usize;
            let d = inf + 1;
            let t = Permutation::from_fn(d, |x| if x == inf { inf } else { (x + 1) % inf });
            let s = Permutation::from_fn(d, |x| match x {
                0 => inf,
                x if x == inf => 0,
                x => ((p - inv_mod(x as u64, p)) % p) as usize,
            });
            (d, vec![t, s])
        }
        GroupSpec::Sl2 { p } => {
            require_prime(*p)?;
            let p = *p;
            let gens = vec![
                matrix_action(&[vec![1, 1], vec![0, 1]], p),
                matrix_action(&[vec![1, 0], vec![1, 1]], p),
            ];
            ((p * p - 1) as usize, gens)
        }
        GroupSpec::Affine { p, index } => {
            require_prime(*p)?;
            let p = *p;
            let l = index.unwrap_or(1);
            if l == 0 || (p - 1) % l != 0 {
                return bad("affine index must divide p - 1");
            }
            let d = p as usize;
            let mut gens = vec![cycle(d, 0..d)];
            let a = pow_mod(primitive_root(p), l, p);
            if a != 1 {
                gens.push(Permutation::from_fn(d, |x| (x as u64 * a % p) as usize));
            }
            (d, gens)
        }
        GroupSpec::Borel3 { p } => {
            require_prime(*p)?;
            let p = *p;
            let mut mats = vec![
                vec![vec![1, 1, 0], vec![0, 1, 0], vec![0, 0, 1]],
                vec![vec![1, 0, 0], vec![0, 1, 1], vec![0, 0, 1]],
            ];
            if p > 2 {
                let g = primitive_root(p);
                let gi = inv_mod(g, p);
                mats.push(vec![vec![g, 0, 0], vec![0, gi, 0], vec![0, 0, 1]]);
                mats.push(vec![vec![1, 0, 0], vec![0, g, 0], vec![0, 0, gi]]);
            }
            (
                (p.pow(3) - 1) as usize,
                mats.iter().map(|m| matrix_action(m, p)).collect(),
            )
        }
        GroupSpec::DirectProduct { factors } => {
            if factors.is_empty() {
                return bad("direct product needs at least one factor");
            }
            let mut acc = build_group(&factors[0], cap)?;
            for f in &factors[1..] {
                let g = build_group(f, cap)?;
                acc = direct_product(&acc, &g, cap)?;
            }
            return Ok(acc);
        }
        GroupSpec::Generators { degree, generators } => {
            if *degree == 0 {
                return bad("degree must be at least 1");
            }
            let gens = generators
                .iter()
                .map(|g| {
                    if g.len() != *degree {
                        return Err(Error::DegreeMismatch(*degree, g.len()));
                    }
                    Permutation::new(g.clone())
                })
                .collect::<Result<Vec<_>>>()?;
            (*degree, gens)
        }
    };
    if let Some(o) = spec.expected_order() {
        if o > cap as u128 {
            return Err(Error::OrderCap { cap });
        }
    }
    PermGroup::from_generators(degree, gens, cap)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(d: usize, cycles: &[&[usize]]) -> Permutation {
        Permutation::from_cycles(d, cycles).unwrap()
    }

    #[test]
    fn compose_and_inverse() {
        let t = c(2, &[&[0, 1]]);
        assert!(perm_compose(&t, &t).unwrap().is_identity());
        let r = c(3, &[&[0, 1, 2]]);
        assert_eq!(perm_compose(&r, &r).unwrap(), c(3, &[&[0, 2, 1]]));
        assert_eq!(perm_inverse(&r), c(3, &[&[0, 2, 1]]));
        assert_eq!(perm_inverse(&t), t);
        let id = Permutation::identity(3);
        assert_eq!(perm_compose(&id, &r).unwrap(), r);
        assert!(matches!(
            perm_compose(&t, &r),
            Err(Error::DegreeMismatch(2, 3))
        ));
    }

    #[test]
    fn rejects_non_bijection() {
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::new(vec![]).is_err());
    }

    #[test]
    fn enumeration_order_is_bfs() {
        let els = enumerate_elements(3, &[c(3, &[&[0, 1, 2]])], 10).unwrap();
        assert_eq!(els.len(), 3);
        assert!(els[0].is_identity());
        let s4 = enumerate_elements(4, &[c(4, &[&[0, 1]]), c(4, &[&[0, 1, 2, 3]])], 100).unwrap();
        assert_eq!(s4.len(), 24);
        assert_eq!(s4[1], c(4, &[&[0, 1]]));
        assert_eq!(s4[2], c(4, &[&[0, 1, 2, 3]]));
        assert!(matches!(
            enumerate_elements(4, &[c(4, &[&[0, 1, 2, 3]])], 3),
            Err(Error::OrderCap { cap: 3 })
        ));
    }

    #[test]
    fn multiplication_table_matches_composition() {
        let g = build_group(&GroupSpec::Symmetric { n: 4 }, 100).unwrap();
        for i in 0..g.order() {
            for j in 0..g.order() {
                let p = perm_compose(g.element(i), g.element(j)).unwrap();
                assert_eq!(g.index_of(&p), Some(g.mul(i, j)));
            }
            assert_eq!(g.mul(i, g.inv(i)), 0);
        }
    }

    #[test]
    fn family_orders() {
        let cases = [
            GroupSpec::Cyclic { n: 12 },
            GroupSpec::Dihedral { n: 6 },
            GroupSpec::Symmetric { n: 5 },
            GroupSpec::Alternating { n: 6 },
            GroupSpec::Alternating { n: 3 },
            GroupSpec::ElementaryAbelian { p: 3, k: 3 },
            GroupSpec::Abelian {
                factors: vec![2, 4, 3],
            },
            GroupSpec::Psl2 { p: 2 },
            GroupSpec::Psl2 { p: 3 },
            GroupSpec::Psl2 { p: 7 },
            GroupSpec::Psl2 { p: 13 },
            GroupSpec::Sl2 { p: 5 },
            GroupSpec::Affine { p: 5, index: None },
            GroupSpec::Affine {
                p: 17,
                index: Some(8),
            },
            GroupSpec::Borel3 { p: 2 },
            GroupSpec::Borel3 { p: 3 },
            GroupSpec::DirectProduct {
                factors: vec![GroupSpec::Alternating { n: 5 }, GroupSpec::Cyclic { n: 2 }],
            },
        ];
        for s in &cases {
            let g = build_group(s, DEFAULT_ORDER_CAP).unwrap();
            assert_eq!(g.order() as u128, s.expected_order().unwrap(), "{s:?}");
        }
        assert_eq!(
            build_group(&GroupSpec::Psl2 { p: 7 }, 5000)
                .unwrap()
                .order(),
            168
        );
        assert_eq!(
            build_group(&GroupSpec::Affine { p: 5, index: None }, 5000)
                .unwrap()
                .order(),
            20
        );
        assert_eq!(
            build_group(&GroupSpec::Borel3 { p: 3 }, 5000)
                .unwrap()
                .order(),
            108
        );
        assert_eq!(
            build_group(&GroupSpec::Psl2 { p: 5 }, 5000)
                .unwrap()
                .order(),
            60
        );
    }

    #[test]
    fn invalid_specs() {
        assert!(build_group(&GroupSpec::Psl2 { p: 9 }, 5000).is_err());
        assert!(build_group(&GroupSpec::Cyclic { n: 0 }, 5000).is_err());
        assert!(matches!(
            build_group(&GroupSpec::Symmetric { n: 8 }, 5000),
            Err(Error::OrderCap { cap: 5000 })
        ));
        assert!(build_group(
            &GroupSpec::Affine {
                p: 7,
                index: Some(4)
            },
            5000
        )
        .is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let s: GroupSpec = serde_json::from_str(r#"{"family":"psl2","p":7}"#).unwrap();
        assert_eq!(s, GroupSpec::Psl2 { p: 7 });
        let s: GroupSpec = serde_json::from_str(r#"{"family":"abelian","factors":[2,4]}"#).unwrap();
        assert_eq!(build_group(&s, 100).unwrap().order(), 8);
        let s: GroupSpec = serde_json::from_str(
            r#"{"family":"generators","degree":4,"generators":[[1,0,2,3],[1,2,3,0]]}"#,
        )
        .unwrap();
        assert_eq!(build_group(&s, 100).unwrap().order(), 24);
        let back: GroupSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    fn sorted_sizes(t: &ConjugacyTable) -> Vec<usize> {
        let mut v = t.class_sizes.clone();
        v.sort_unstable();
        v
    }

    #[test]
    fn classes_of_small_groups() {
        let s3 = build_group(&GroupSpec::Symmetric { n: 3 }, 100).unwrap();
        assert_eq!(sorted_sizes(&conjugacy_classes(&s3)), vec![1, 2, 3]);
        let h5 = build_group(&GroupSpec::Affine { p: 5, index: None }, 100).unwrap();
        assert_eq!(sorted_sizes(&conjugacy_classes(&h5)), vec![1, 4, 5, 5, 5]);
    }

    #[test]
    fn classes_of_a5_match_orbit_oracle() {
        let g = build_group(&GroupSpec::Alternating { n: 5 }, 100).unwrap();
        let t = conjugacy_classes(&g);
        assert_eq!(sorted_sizes(&t), vec![1, 12, 12, 15, 20]);
        // oracle: conjugate by every element, not just generators
        for x in 0..g.order() {
            let orbit: std::collections::BTreeSet<usize> =
                (0..g.order()).map(|h| g.conjugate(x, h)).collect();
            assert_eq!(orbit.len(), t.class_sizes[t.class_of[x]]);
            assert!(orbit.iter().all(|&y| t.class_of[y] == t.class_of[x]));
        }
        assert_eq!(t.class_of[0], 0);
        assert_eq!(t.class_sizes[0], 1);
    }

    #[test]
    fn quotients() {
        let z4 = build_group(&GroupSpec::Cyclic { n: 4 }, 100).unwrap();
        let sq = z4.closure_of(&[z4.mul(1, 1)]);
        assert_eq!(coset_action(&z4, &sq).unwrap().order(), 2);

        let s4 = build_group(&GroupSpec::Symmetric { n: 4 }, 100).unwrap();
        let evens: Vec<usize> = (0..24)
            .filter(|&i| (4 - s4.element(i).cycle_type().len()).is_multiple_of(2))
            .collect();
        let a4 = BitSet::from_indices(24, evens);
        assert_eq!(coset_action(&s4, &a4).unwrap().order(), 2);
        let not_normal = s4.closure_of(&[1]);
        assert_eq!(
            coset_action(&s4, &not_normal).unwrap_err(),
            Error::NotNormal
        );
        let not_sub = BitSet::from_indices(24, [0, 1, 2]);
        assert_eq!(coset_action(&s4, &not_sub).unwrap_err(), Error::NotSubgroup);

        let sl = build_group(&GroupSpec::Sl2 { p: 5 }, 1000).unwrap();
        let minus = Permutation::from_fn(24, |i| {
            let (a, b) = ((i as u64 + 1) / 5, (i as u64 + 1) % 5);
            vec_index(&[(5 - a) % 5, (5 - b) % 5], 5)
        });
        let z = sl.index_of(&minus).unwrap();
        let centre = BitSet::from_indices(sl.order(), [0, z]);
        assert_eq!(coset_action(&sl, &centre).unwrap().order(), 60);
    }

    #[test]
    fn products() {
        let z2 = build_group(&GroupSpec::Cyclic { n: 2 }, 10).unwrap();
        let z3 = build_group(&GroupSpec::Cyclic { n: 3 }, 10).unwrap();
        assert_eq!(direct_product(&z2, &z3, 100).unwrap().order(), 6);
        let v = direct_product(&z2, &z2, 100).unwrap();
        assert_eq!(v.order(), 4);
        assert!((1..4).all(|i| v.element_order(i) == 2));
        let a5 = build_group(&GroupSpec::Alternating { n: 5 }, 100).unwrap();
        assert_eq!(direct_product(&a5, &z2, 1000).unwrap().order(), 120);
        assert!(direct_product(&a5, &z2, 100).is_err());
    }

    #[test]
    fn deterministic_indexing() {
        let s = GroupSpec::Psl2 { p: 11 };
        let a = build_group(&s, 5000).unwrap();
        let b = build_group(&s, 5000).unwrap();
        assert_eq!(a.elements(), b.elements());
        assert_eq!(conjugacy_classes(&a), conjugacy_classes(&b));
    }
}
