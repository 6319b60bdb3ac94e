// Inclusion–exclusion over the maximal classes of a generation profile.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::Rational;

pub const MAX_ROWS: usize = 30;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaximalRow {
    pub label: Option<String>,
    pub orbit_size: Option<u64>,
    pub contains: Vec<bool>,
}

/// Class weights and the maximal-class × conjugacy-class incidence matrix.
///
/// `class_sizes` sum to `order`; densities are `class_sizes[i] / order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenerationProfile {
    order: BigUint,
    class_sizes: Vec<BigUint>,
    rows: Vec<MaximalRow>,
    identity_class: Option<usize>,
}

impl GenerationProfile {
    pub fn new(
        order: BigUint,
        class_sizes: Vec<BigUint>,
        rows: Vec<MaximalRow>,
        identity_class: Option<usize>,
    ) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidProfile(m));
        if order.is_zero() {
            return bad("order must be positive".into());
        }
        if class_sizes.iter().any(Zero::is_zero) {
            return bad("class sizes must be positive".into());
        }
        if class_sizes.iter().sum::<BigUint>() != order {
            return bad("class sizes do not sum to the order".into());
        }
        if rows.len() > MAX_ROWS {
            return Err(Error::TooManyMaximalClasses {
                found: rows.len(),
                limit: MAX_ROWS,
            });
        }
        for (k, r) in rows.iter().enumerate() {
            if r.contains.len() != class_sizes.len() {
                return bad(format!(
                    "row {k} has {} entries, expected {}",
                    r.contains.len(),
                    class_sizes.len()
                ));
            }
            if r.contains.iter().all(|&b| b) {
                return bad(format!(
                    "row {k} meets every class, so it is not a proper subgroup class"
                ));
            }
            if let Some(e) = identity_class {
                if !r.contains.get(e).copied().unwrap_or(false) {
                    return bad(format!("row {k} misses the identity class"));
                }
            }
        }
        if let Some(e) = identity_class {
            if e >= class_sizes.len() {
                return bad("identity class out of range".into());
            }
        }
        Ok(GenerationProfile {
            order,
            class_sizes,
            rows,
            identity_class,
        })
    }

    /// Builds a profile from rational densities, using their common denominator as the order.
    pub fn from_densities(densities: &[Rational], rows: Vec<MaximalRow>) -> Result<Self> {
        if densities.iter().any(|d| d <= &Rational::zero()) {
            return Err(Error::InvalidProfile("densities must be positive".into()));
        }
        if densities.iter().sum::<Rational>() != Rational::one() {
            return Err(Error::InvalidProfile("densities do not sum to 1".into()));
        }
        let l = densities
            .iter()
            .fold(BigInt::one(), |acc, d| acc.lcm(d.denom()));
        let sizes = densities
            .iter()
            .map(|d| {
                (d.numer() * (&l / d.denom()))
                    .to_biguint()
                    .expect("positive")
            })
            .collect();
        Self::new(l.to_biguint().expect("positive"), sizes, rows, None)
    }

    pub fn order(&self) -> &BigUint {
        &self.order
    }

    pub fn class_sizes(&self) -> &[BigUint] {
        &self.class_sizes
    }

    pub fn rows(&self) -> &[MaximalRow] {
        &self.rows
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_classes(&self) -> usize {
        self.class_sizes.len()
    }

    pub fn identity_class(&self) -> Option<usize> {
        self.identity_class
    }

    pub fn density(&self, class: usize) -> Rational {
        Rational::new(
            self.class_sizes[class].clone().into(),
            self.order.clone().into(),
        )
    }

    pub fn densities(&self) -> Vec<Rational> {
        (0..self.num_classes()).map(|i| self.density(i)).collect()
    }

    fn row_bits(&self, k: usize) -> BitSet {
        BitSet::from_indices(
            self.num_classes(),
            (0..self.num_classes()).filter(|&i| self.rows[k].contains[i]),
        )
    }

    /// ν of the classes flagged in `set`.
    pub fn measure(&self, set: &BitSet) -> Rational {
        let w: BigUint = set.iter().map(|i| &self.class_sizes[i]).sum();
        Rational::new(w.into(), self.order.clone().into())
    }

    /// Keeps only the listed rows, in the given order.
    pub fn restrict(&self, rows: &[usize]) -> Result<Self> {
        let mut out = Vec::new();
        for &k in rows {
            out.push(
                self.rows
                    .get(k)
                    .ok_or_else(|| Error::InvalidParameter(format!("row {k} out of range")))?
                    .clone(),
            );
        }
        Ok(GenerationProfile {
            rows: out,
            ..self.clone()
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(RawProfile::from(self)).expect("serializable")
    }

    pub fn from_json(v: &str) -> Result<Self> {
        let raw: RawProfile = serde_json::from_str(v)?;
        raw.try_into()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Count {
    Num(u64),
    Str(String),
}

impl Count {
    fn from_big(b: &BigUint) -> Self {
        match b.to_u64() {
            Some(v) => Count::Num(v),
            None => Count::Str(b.to_string()),
        }
    }

    fn to_big(&self) -> Result<BigUint> {
        match self {
            Count::Num(v) => Ok(BigUint::from(*v)),
            Count::Str(s) => s
                .parse()
                .map_err(|_| Error::InvalidProfile(format!("bad integer {s:?}"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRow {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    orbit_size: Option<u64>,
    contains: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProfile {
    order: Count,
    class_sizes: Vec<Count>,
    maximal_classes: Vec<RawRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    identity_class: Option<usize>,
}

impl From<&GenerationProfile> for RawProfile {
    fn from(p: &GenerationProfile) -> Self {
        RawProfile {
            order: Count::from_big(&p.order),
            class_sizes: p.class_sizes.iter().map(Count::from_big).collect(),
            maximal_classes: p
                .rows
                .iter()
                .map(|r| RawRow {
                    label: r.label.clone(),
                    orbit_size: r.orbit_size,
                    contains: r.contains.clone(),
                })
                .collect(),
            identity_class: p.identity_class,
        }
    }
}

impl TryFrom<RawProfile> for GenerationProfile {
    type Error = Error;

    fn try_from(r: RawProfile) -> Result<Self> {
        let sizes = r
            .class_sizes
            .iter()
            .map(Count::to_big)
            .collect::<Result<Vec<_>>>()?;
        let rows = r
            .maximal_classes
            .into_iter()
            .map(|x| MaximalRow {
                label: x.label,
                orbit_size: x.orbit_size,
                contains: x.contains,
            })
            .collect();
        GenerationProfile::new(r.order.to_big()?, sizes, rows, r.identity_class)
    }
}

/// For each conjunction weight k, the signed count Σ (−1)^{|I|+1} over the
/// nonempty row sets I whose common classes weigh k (out of `total`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spectrum {
    pub total: BigUint,
    pub rows: usize,
    pub coef: BTreeMap<BigUint, i64>,
}

trait Weight: Clone + Ord + Send + Sync + std::ops::Sub<Output = Self> + std::iter::Sum + Zero {}
impl<W: Clone + Ord + Send + Sync + std::ops::Sub<Output = W> + std::iter::Sum + Zero> Weight
    for W
{
}

fn sweep_from<W: Weight>(
    rows: &[BitSet],
    weights: &[W],
    start: usize,
    conj: &BitSet,
    w: &W,
    sign: i64,
    out: &mut BTreeMap<W, i64>,
) {
    for r in start..rows.len() {
        let next = conj.intersection(&rows[r]);
        if absorbed(rows, r + 1, &next) {
            continue;
        }
        let mut removed = conj.clone();
        removed.difference_with(&rows[r]);
        let nw = w.clone() - removed.iter().map(|i| weights[i].clone()).sum::<W>();
        *out.entry(nw.clone()).or_insert(0) += sign;
        sweep_from(rows, weights, r + 1, &next, &nw, -sign, out);
    }
}

// If a later row contains the conjunction, adding it never changes the weight,
// so the node and its whole subtree cancel out.
fn absorbed(rows: &[BitSet], from: usize, conj: &BitSet) -> bool {
    rows[from..].iter().any(|r| conj.is_subset(r))
}

fn sweep<W: Weight>(rows: &[BitSet], weights: &[W]) -> BTreeMap<W, i64> {
    let parts: Vec<BTreeMap<W, i64>> = (0..rows.len())
        .into_par_iter()
        .map(|r0| {
            let mut out = BTreeMap::new();
            let conj = rows[r0].clone();
            if absorbed(rows, r0 + 1, &conj) {
                return out;
            }
            let w: W = conj.iter().map(|i| weights[i].clone()).sum();
            *out.entry(w.clone()).or_insert(0) += 1;
            sweep_from(rows, weights, r0 + 1, &conj, &w, -1, &mut out);
            out
        })
        .collect();
    let mut coef = BTreeMap::new();
    for part in parts {
        for (k, c) in part {
            *coef.entry(k).or_insert(0) += c;
        }
    }
    coef.retain(|_, c| *c != 0);
    coef
}

impl Spectrum {
    pub fn of(profile: &GenerationProfile) -> Result<Self> {
        let m = profile.num_rows();
        if m > MAX_ROWS {
            return Err(Error::TooManyMaximalClasses {
                found: m,
                limit: MAX_ROWS,
            });
        }
        // Classes with the same membership pattern behave as one column.
        let mut merged: BTreeMap<Vec<bool>, BigUint> = BTreeMap::new();
        for (i, size) in profile.class_sizes.iter().enumerate() {
            let pattern: Vec<bool> = profile.rows.iter().map(|r| r.contains[i]).collect();
            *merged.entry(pattern).or_insert_with(BigUint::zero) += size;
        }
        let cols = merged.len();
        let rows: Vec<BitSet> = (0..m)
            .map(|k| {
                BitSet::from_indices(
                    cols,
                    merged
                        .keys()
                        .enumerate()
                        .filter(|(_, p)| p[k])
                        .map(|(j, _)| j),
                )
            })
            .collect();
        let coef = if profile.order.bits() <= 127 {
            let weights: Vec<u128> = merged
                .values()
                .map(|s| s.to_u128().expect("fits"))
                .collect();
            sweep(&rows, &weights)
                .into_iter()
                .map(|(k, c)| (BigUint::from(k), c))
                .collect()
        } else {
            let weights: Vec<BigUint> = merged.into_values().collect();
            sweep(&rows, &weights)
        };
        Ok(Spectrum {
            total: profile.order.clone(),
            rows: m,
            coef,
        })
    }

    fn terms(&self) -> impl Iterator<Item = (BigInt, BigInt, BigInt)> + '_ {
        let n = BigInt::from(self.total.clone());
        self.coef
            .iter()
            .map(move |(k, &c)| (BigInt::from(c), BigInt::from(k.clone()), n.clone()))
    }

    /// Σ coef · 1/(1−ν)
    pub fn first_moment<T: Scalar>(&self) -> T {
        if self.rows == 0 {
            return T::one();
        }
        self.terms().fold(T::zero(), |acc, (c, k, n)| {
            acc + T::from_ratio(&(c * &n), &(&n - k))
        })
    }

    /// Σ coef · (1+ν)/(1−ν)²
    pub fn second_moment<T: Scalar>(&self) -> T {
        if self.rows == 0 {
            return T::one();
        }
        self.terms().fold(T::zero(), |acc, (c, k, n)| {
            let d = &n - &k;
            acc + T::from_ratio(&(c * &n * (&n + &k)), &(&d * &d))
        })
    }

    /// Σ coef · ν^n
    pub fn tail_probability<T: Scalar>(&self, n: u32) -> T {
        if self.rows == 0 {
            return if n == 0 { T::one() } else { T::zero() };
        }
        self.terms().fold(T::zero(), |acc, (c, k, total)| {
            acc + T::from_ratio(&(c * k.pow(n)), &total.pow(n))
        })
    }
}

pub fn nu_intersection(profile: &GenerationProfile, rows: &[usize]) -> Result<Rational> {
    if rows.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut conj = BitSet::full(profile.num_classes());
    for &k in rows {
        if k >= profile.num_rows() {
            return Err(Error::InvalidParameter(format!("row {k} out of range")));
        }
        conj.intersect_with(&profile.row_bits(k));
    }
    Ok(profile.measure(&conj))
}

pub fn chebotarev(profile: &GenerationProfile) -> Result<Rational> {
    chebotarev_as(profile)
}

pub fn chebotarev_as<T: Scalar>(profile: &GenerationProfile) -> Result<T> {
    Ok(Spectrum::of(profile)?.first_moment())
}

pub fn secondary(profile: &GenerationProfile) -> Result<Rational> {
    secondary_as(profile)
}

pub fn secondary_as<T: Scalar>(profile: &GenerationProfile) -> Result<T> {
    Ok(Spectrum::of(profile)?.second_moment())
}

/// Both invariants from a single sweep.
pub fn invariants(profile: &GenerationProfile) -> Result<(Rational, Rational)> {
    let s = Spectrum::of(profile)?;
    Ok((s.first_moment(), s.second_moment()))
}

/// P(τ > n)
pub fn non_generation_probability(profile: &GenerationProfile, n: u32) -> Result<Rational> {
    Ok(Spectrum::of(profile)?.tail_probability(n))
}

/// P(τ = n) for n = 1..=n_max.
pub fn distribution(profile: &GenerationProfile, n_max: u32) -> Result<Vec<Rational>> {
    let s = Spectrum::of(profile)?;
    let tails: Vec<Rational> = (0..=n_max).map(|n| s.tail_probability(n)).collect();
    Ok(tails.windows(2).map(|w| &w[0] - &w[1]).collect())
}

/// Largest single-row density.
pub fn max_row_density(profile: &GenerationProfile) -> Rational {
    (0..profile.num_rows())
        .map(|k| profile.measure(&profile.row_bits(k)))
        .max()
        .unwrap_or_else(Rational::zero)
}

/// Encloses c(G) between 1 + Σ_{n≤N} P(τ>n) and that sum plus m·ρ^{N+1}/(1−ρ).
pub fn series_bracket(profile: &GenerationProfile, n: u32) -> Result<(Rational, Rational)> {
    let s = Spectrum::of(profile)?;
    let lo = (0..=n)
        .map(|k| s.tail_probability::<Rational>(k))
        .sum::<Rational>();
    let rho = max_row_density(profile);
    let m = Rational::from_integer(profile.num_rows().into());
    let bound = m * num_traits::pow(rho.clone(), n as usize + 1) / (Rational::one() - rho);
    Ok((lo.clone(), lo + bound))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialBounds {
    pub e1: Rational,
    pub e2: Rational,
    pub c_lo: Rational,
    pub c_hi: Rational,
    pub c2_lo: Rational,
    pub c2_hi: Rational,
}

/// 1 − ν of the union of the rows outside `m`.
pub fn p_m(profile: &GenerationProfile, m: &[usize]) -> Result<Rational> {
    let mut union = BitSet::new(profile.num_classes());
    for k in 0..profile.num_rows() {
        if !m.contains(&k) {
            union.union_with(&profile.row_bits(k));
        }
    }
    Ok(Rational::one() - profile.measure(&union))
}

/// Waiting-time moments restricted to the rows in `m`, with the resulting bounds on c and c₂.
pub fn partial_bounds(
    profile: &GenerationProfile,
    m: &[usize],
    pm: &Rational,
) -> Result<PartialBounds> {
    if m.is_empty() {
        return Err(Error::EmptySet);
    }
    if pm <= &Rational::zero() || pm > &Rational::one() {
        return Err(Error::InvalidParameter("p_M must lie in (0, 1]".into()));
    }
    let s = Spectrum::of(&profile.restrict(m)?)?;
    let e1: Rational = s.first_moment();
    let e2: Rational = s.second_moment();
    let one = Rational::one();
    let two = Rational::from_integer(2.into());
    Ok(PartialBounds {
        c_lo: e1.clone(),
        c_hi: &e1 - &one + pm.recip(),
        c2_lo: e2.clone(),
        c2_hi: &e2 + (two - pm) / (pm * pm) - one,
        e1,
        e2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn row(bits: &[bool]) -> MaximalRow {
        MaximalRow {
            label: None,
            orbit_size: None,
            contains: bits.to_vec(),
        }
    }

    fn profile(sizes: &[u64], rows: &[&[bool]]) -> GenerationProfile {
        let order = sizes.iter().sum::<u64>();
        GenerationProfile::new(
            order.into(),
            sizes.iter().map(|&s| BigUint::from(s)).collect(),
            rows.iter().map(|r| row(r)).collect(),
            Some(0),
        )
        .unwrap()
    }

    // classes: id, 3-cycles, transpositions
    fn s3() -> GenerationProfile {
        profile(&[1, 2, 3], &[&[true, true, false], &[true, false, true]])
    }

    fn z2() -> GenerationProfile {
        profile(&[1, 1], &[&[true, false]])
    }

    #[test]
    fn nu_of_s3_rows() {
        let p = s3();
        assert_eq!(nu_intersection(&p, &[0]).unwrap(), q(1, 2));
        assert_eq!(nu_intersection(&p, &[0, 1]).unwrap(), q(1, 6));
        assert_eq!(nu_intersection(&p, &[]), Err(Error::EmptySet));
    }

    #[test]
    fn small_invariants() {
        assert_eq!(invariants(&z2()).unwrap(), (q(2, 1), q(6, 1)));
        assert_eq!(invariants(&s3()).unwrap(), (q(19, 5), q(483, 25)));
        let triv = GenerationProfile::new(1u32.into(), vec![1u32.into()], vec![], Some(0)).unwrap();
        assert_eq!(invariants(&triv).unwrap(), (q(1, 1), q(1, 1)));
        let c: f64 = chebotarev_as(&s3()).unwrap();
        assert!((c - 3.8).abs() < 1e-12);
        let c: f32 = secondary_as(&s3()).unwrap();
        assert!((c - 19.32).abs() < 1e-4);
    }

    #[test]
    fn tails_and_distribution() {
        let p = s3();
        assert_eq!(non_generation_probability(&p, 0).unwrap(), q(1, 1));
        assert_eq!(non_generation_probability(&p, 1).unwrap(), q(1, 1));
        assert_eq!(non_generation_probability(&p, 2).unwrap(), q(2, 3));
        let d = distribution(&p, 2).unwrap();
        assert_eq!(d, vec![q(0, 1), q(1, 3)]);
        let d = distribution(&z2(), 5).unwrap();
        for (n, x) in d.iter().enumerate() {
            assert_eq!(*x, q(1, 1 << (n + 1)));
        }
    }

    #[test]
    fn bracket_contains_value() {
        let p = s3();
        let (lo, hi) = series_bracket(&p, 40).unwrap();
        let c = chebotarev(&p).unwrap();
        assert!(lo <= c && c <= hi);
        assert!(&hi - &lo < q(1, 1000));
    }

    #[test]
    fn partial_bounds_examples() {
        let p = s3();
        let b = partial_bounds(&p, &[0, 1], &q(1, 1)).unwrap();
        assert_eq!(b.c_lo, b.c_hi);
        assert_eq!(b.c_lo, q(19, 5));
        assert_eq!(b.c2_lo, b.c2_hi);
        let pm = p_m(&p, &[0]).unwrap();
        assert_eq!(pm, q(1, 3));
        let b = partial_bounds(&p, &[0], &pm).unwrap();
        assert_eq!((b.c_lo.clone(), b.c_hi.clone()), (q(2, 1), q(4, 1)));
        assert!(b.c_lo <= q(19, 5) && q(19, 5) <= b.c_hi);
        assert!(partial_bounds(&p, &[0], &q(0, 1)).is_err());
        assert!(partial_bounds(&p, &[], &q(1, 1)).is_err());
    }

    #[test]
    fn validation() {
        let bad = GenerationProfile::new(
            2u32.into(),
            vec![1u32.into(), 1u32.into()],
            vec![row(&[true, true])],
            None,
        );
        assert!(matches!(bad, Err(Error::InvalidProfile(_))));
        let bad = GenerationProfile::new(3u32.into(), vec![1u32.into(), 1u32.into()], vec![], None);
        assert!(bad.is_err());
        let rows = (0..31).map(|_| row(&[true, false])).collect();
        let bad = GenerationProfile::new(2u32.into(), vec![1u32.into(), 1u32.into()], rows, None);
        assert!(matches!(
            bad,
            Err(Error::TooManyMaximalClasses {
                found: 31,
                limit: 30
            })
        ));
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"order":60,"class_sizes":[1,15,20,12,12],"maximal_classes":[
            {"label":"A4","orbit_size":5,"contains":[true,true,true,false,false]},
            {"label":"D10","orbit_size":6,"contains":[true,true,false,true,true]},
            {"label":"S3","orbit_size":10,"contains":[true,true,true,false,false]}]}"#;
        let p = GenerationProfile::from_json(text).unwrap();
        assert_eq!(p.num_rows(), 3);
        let back = GenerationProfile::from_json(&p.to_json().to_string()).unwrap();
        assert_eq!(back, p);
        let big = r#"{"order":"43252003274489856000","class_sizes":["43252003274489855999",1],"maximal_classes":[]}"#;
        let p = GenerationProfile::from_json(big).unwrap();
        assert_eq!(p.order().to_string(), "43252003274489856000");
    }

    #[test]
    fn from_densities_matches_sizes() {
        let p = GenerationProfile::from_densities(
            &[q(1, 6), q(1, 3), q(1, 2)],
            vec![row(&[true, true, false]), row(&[true, false, true])],
        )
        .unwrap();
        assert_eq!(invariants(&p).unwrap(), (q(19, 5), q(483, 25)));
    }
}
