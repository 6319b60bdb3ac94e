// Cycle-type combinatorics for S_n and A_n, and the profiles built from the
// intransitive maximal subgroups.

use num_bigint::BigUint;
use num_traits::One;

use crate::bitset::BitSet;
use crate::chebotarev_engine::{invariants, GenerationProfile, MaximalRow};
use crate::error::{Error, Result};
use crate::Rational;

pub const MAX_N: usize = 60;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(Error::InvalidParameter(
                "partition parts must be positive".into(),
            ));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Partition { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn is_even(&self) -> bool {
        (self.n() - self.parts.len()).is_multiple_of(2)
    }
}

impl std::fmt::Display for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "[{}]", s.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleTypeClass {
    pub partition: Partition,
    pub size: BigUint,
    pub even: bool,
    pub sumset: BitSet,
}

impl CycleTypeClass {
    pub fn of(partition: Partition) -> Self {
        CycleTypeClass {
            size: class_size(&partition),
            even: partition.is_even(),
            sumset: subset_sums(&partition),
            partition,
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if n > MAX_N {
        return Err(Error::InvalidParameter(format!(
            "n = {n} exceeds the cap {MAX_N}"
        )));
    }
    Ok(())
}

/// All partitions of n, in reverse-lexicographic order starting from [n].
pub fn partitions(n: usize) -> Result<Vec<Partition>> {
    check_n(n)?;
    let mut out = Vec::new();
    let mut cur = vec![n];
    loop {
        out.push(Partition { parts: cur.clone() });
        // Strip trailing ones, then lower the last part above one and refill.
        let mut ones = 0;
        while cur.last() == Some(&1) {
            cur.pop();
            ones += 1;
        }
        let Some(last) = cur.pop() else { break };
        let k = last - 1;
        cur.push(k);
        let mut rest = ones + 1;
        while rest > 0 {
            let t = rest.min(k);
            cur.push(t);
            rest -= t;
        }
    }
    Ok(out)
}

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |a, k| a * BigUint::from(k))
}

/// n!/z_λ, the number of permutations of cycle type λ.
pub fn class_size(lambda: &Partition) -> BigUint {
    let mut z = BigUint::one();
    let mut i = 0;
    while i < lambda.parts.len() {
        let p = lambda.parts[i];
        let m = lambda.parts[i..].iter().take_while(|&&q| q == p).count();
        z *= BigUint::from(p).pow(m as u32) * factorial(m);
        i += m;
    }
    factorial(lambda.n()) / z
}

/// Sums of sub-multisets of the parts, as a bit set over 0..=n.
pub fn subset_sums(lambda: &Partition) -> BitSet {
    let n = lambda.n();
    let mut reach = vec![false; n + 1];
    reach[0] = true;
    for &p in &lambda.parts {
        for s in (p..=n).rev() {
            if reach[s - p] {
                reach[s] = true;
            }
        }
    }
    BitSet::from_indices(n + 1, (0..=n).filter(|&s| reach[s]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Sym,
    Alt,
}

/// Profile over cycle types whose rows are the set stabilizers of i-sets,
/// 1 ≤ i < n/2, together with A_n for the symmetric variant.
pub fn partial_profile(n: usize, variant: Variant) -> Result<GenerationProfile> {
    let min = match variant {
        Variant::Sym => 2,
        Variant::Alt => 3,
    };
    if n < min {
        return Err(Error::InvalidParameter(format!("n must be at least {min}")));
    }
    let classes: Vec<CycleTypeClass> = partitions(n)?
        .into_iter()
        .filter(|p| variant == Variant::Sym || p.is_even())
        .map(CycleTypeClass::of)
        .collect();
    let mut order = factorial(n);
    if variant == Variant::Alt {
        order /= 2u32;
    }
    let mut rows = Vec::new();
    if variant == Variant::Sym {
        rows.push(MaximalRow {
            label: Some(format!("A{n}")),
            orbit_size: Some(1),
            contains: classes.iter().map(|c| c.even).collect(),
        });
    }
    for i in 1..n.div_ceil(2) {
        rows.push(MaximalRow {
            label: Some(format!("stab of {i}-set")),
            orbit_size: None,
            contains: classes.iter().map(|c| c.sumset.contains(i)).collect(),
        });
    }
    let identity = classes.len() - 1;
    GenerationProfile::new(
        order,
        classes.into_iter().map(|c| c.size).collect(),
        rows,
        Some(identity),
    )
}

pub fn partial_invariants(n: usize, variant: Variant) -> Result<(Rational, Rational)> {
    invariants(&partial_profile(n, variant)?)
}
