// Waiting until every set of a collection has been hit by i.i.d. draws.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::One;
use serde::Deserialize;

use crate::bitset::BitSet;
use crate::chebotarev_engine::{GenerationProfile, MAX_ROWS};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::Rational;

pub const MAX_DP_SETS: usize = 16;

/// Probability weights on the ground set {0..d−1}.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMeasure<T> {
    weights: Vec<T>,
}

impl<T: Scalar> FiniteMeasure<T> {
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParameter("empty ground set".into()));
        }
        if weights.iter().any(|w| w < &T::zero()) {
            return Err(Error::InvalidParameter("negative weight".into()));
        }
        let total = weights.iter().fold(T::zero(), |a, w| a + w.clone());
        if (total - T::one()).abs() > T::tolerance() {
            return Err(Error::InvalidParameter("weights do not sum to 1".into()));
        }
        Ok(FiniteMeasure { weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn measure(&self, set: &BitSet) -> T {
        set.iter()
            .fold(T::zero(), |a, i| a + self.weights[i].clone())
    }
}

/// A nonempty collection of nonempty subsets of the ground set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetSystem {
    ground: usize,
    sets: Vec<BitSet>,
}

impl SubsetSystem {
    pub fn new(ground: usize, sets: &[Vec<usize>]) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::InvalidParameter(
                "the collection must be nonempty".into(),
            ));
        }
        let mut out = Vec::new();
        for s in sets {
            if s.is_empty() {
                return Err(Error::InvalidParameter("sets must be nonempty".into()));
            }
            if let Some(&x) = s.iter().find(|&&x| x >= ground) {
                return Err(Error::InvalidParameter(format!(
                    "element {x} outside the ground set"
                )));
            }
            out.push(BitSet::from_indices(ground, s.iter().copied()));
        }
        Ok(SubsetSystem { ground, sets: out })
    }

    pub fn from_bitsets(ground: usize, sets: Vec<BitSet>) -> Result<Self> {
        let lists: Vec<Vec<usize>> = sets.iter().map(|s| s.iter().collect()).collect();
        Self::new(ground, &lists)
    }

    pub fn ground(&self) -> usize {
        self.ground
    }

    pub fn sets(&self) -> &[BitSet] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

fn check<T: Scalar>(mu: &FiniteMeasure<T>, sys: &SubsetSystem) -> Result<()> {
    if mu.len() != sys.ground {
        return Err(Error::InvalidParameter(
            "measure and collection use different ground sets".into(),
        ));
    }
    if sys.len() > MAX_ROWS {
        return Err(Error::StateCap {
            found: sys.len(),
            limit: MAX_ROWS,
        });
    }
    if sys.sets.iter().any(|e| mu.measure(e).is_zero()) {
        return Err(Error::InfiniteWaitingTime);
    }
    Ok(())
}

// Signed count Σ (−1)^{|I|+1} per distinct union E_I.
fn union_spectrum(sys: &SubsetSystem) -> Vec<(BitSet, i64)> {
    fn go(sets: &[BitSet], start: usize, acc: &BitSet, sign: i64, out: &mut HashMap<BitSet, i64>) {
        for r in start..sets.len() {
            let u = acc.union(&sets[r]);
            go(sets, r + 1, &u, -sign, out);
            *out.entry(u).or_insert(0) += sign;
        }
    }
    let mut map = HashMap::new();
    go(&sys.sets, 0, &BitSet::new(sys.ground), 1, &mut map);
    let mut v: Vec<(BitSet, i64)> = map.into_iter().filter(|(_, c)| *c != 0).collect();
    v.sort_by(|a, b| a.0.lex_cmp(&b.0));
    v
}

/// E(τ) = Σ (−1)^{|I|+1} / μ(E_I)
pub fn expected_time<T: Scalar>(mu: &FiniteMeasure<T>, sys: &SubsetSystem) -> Result<T> {
    check(mu, sys)?;
    Ok(union_spectrum(sys)
        .into_iter()
        .fold(T::zero(), |acc, (u, c)| {
            acc + T::from_int(c) / mu.measure(&u)
        }))
}

/// E(τ²) = Σ (−1)^{|I|} (1/μ)(1 − 2/μ), with μ = μ(E_I)
pub fn second_moment<T: Scalar>(mu: &FiniteMeasure<T>, sys: &SubsetSystem) -> Result<T> {
    check(mu, sys)?;
    let two = T::from_int(2);
    Ok(union_spectrum(sys)
        .into_iter()
        .fold(T::zero(), |acc, (u, c)| {
            let m = mu.measure(&u);
            acc + T::from_int(c) * (two.clone() - m.clone()) / (m.clone() * m)
        }))
}

fn positive<T: Scalar>(mu: &FiniteMeasure<T>, s: &BitSet) -> Result<T> {
    if s.len() != mu.len() {
        return Err(Error::InvalidParameter(
            "set and measure use different ground sets".into(),
        ));
    }
    let m = mu.measure(s);
    if m.is_zero() {
        Err(Error::InfiniteWaitingTime)
    } else {
        Ok(m)
    }
}

/// E(T_I T_J) = (1/μ(E_I ∪ E_J)) (1/μ(E_I) + 1/μ(E_J) − 1)
pub fn pair_expectation<T: Scalar>(mu: &FiniteMeasure<T>, a: &BitSet, b: &BitSet) -> Result<T> {
    let p = positive(mu, a)?;
    let q = positive(mu, b)?;
    let s = mu.measure(&a.union(b));
    Ok((T::one() / p + T::one() / q - T::one()) / s)
}

fn powi<T: Scalar>(x: &T, n: u64) -> T {
    (0..n).fold(T::one(), |acc, _| acc * x.clone())
}

/// P(T_I = n, T_J = m), with r taken as the measure of the set intersection.
pub fn joint_pmf<T: Scalar>(
    mu: &FiniteMeasure<T>,
    a: &BitSet,
    b: &BitSet,
    n: u64,
    m: u64,
) -> Result<T> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidParameter("n and m must be at least 1".into()));
    }
    let p = mu.measure(a);
    let q = mu.measure(b);
    let r = mu.measure(&a.intersection(b));
    let s = mu.measure(&a.union(b));
    let mut only_a = a.clone();
    only_a.difference_with(b);
    let mut only_b = b.clone();
    only_b.difference_with(a);
    let miss = T::one() - s;
    Ok(if n == m {
        powi(&miss, n - 1) * r
    } else if n < m {
        powi(&miss, n - 1) * mu.measure(&only_a) * powi(&(T::one() - q.clone()), m - n - 1) * q
    } else {
        powi(&miss, m - 1) * mu.measure(&only_b) * powi(&(T::one() - p.clone()), n - m - 1) * p
    })
}

// Transition law of the witnessed-set chain: probability of each hit pattern.
fn hit_patterns<T: Scalar>(mu: &FiniteMeasure<T>, sys: &SubsetSystem) -> Result<Vec<(usize, T)>> {
    if sys.len() > MAX_DP_SETS {
        return Err(Error::StateCap {
            found: sys.len(),
            limit: MAX_DP_SETS,
        });
    }
    check(mu, sys)?;
    let mut out: Vec<(usize, T)> = Vec::new();
    for d in 0..mu.len() {
        let h = sys
            .sets
            .iter()
            .enumerate()
            .filter(|(_, e)| e.contains(d))
            .fold(0, |acc, (k, _)| acc | 1 << k);
        match out.iter_mut().find(|(m, _)| *m == h) {
            Some((_, w)) => *w = w.clone() + mu.weights[d].clone(),
            None => out.push((h, mu.weights[d].clone())),
        }
    }
    out.sort_by_key(|(h, _)| *h);
    Ok(out)
}

/// P(τ = n) for n = 1..=n_max, by dynamic programming on the set of members already hit.
pub fn exact_distribution_dp<T: Scalar>(
    mu: &FiniteMeasure<T>,
    sys: &SubsetSystem,
    n_max: usize,
) -> Result<Vec<T>> {
    let hits = hit_patterns(mu, sys)?;
    let full = (1usize << sys.len()) - 1;
    let mut state = vec![T::zero(); full];
    state[0] = T::one();
    let mut out = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        let mut next = vec![T::zero(); full];
        let mut done = T::zero();
        for (s, w) in state.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            for (h, p) in &hits {
                let t = s | h;
                let x = w.clone() * p.clone();
                if t == full {
                    done = done + x;
                } else {
                    next[t] = next[t].clone() + x;
                }
            }
        }
        out.push(done);
        state = next;
    }
    Ok(out)
}

/// Exact E(τ) and E(τ²) by solving the absorbing witnessed-set chain.
pub fn exact_moments_dp<T: Scalar>(mu: &FiniteMeasure<T>, sys: &SubsetSystem) -> Result<(T, T)> {
    let hits = hit_patterns(mu, sys)?;
    let full = (1usize << sys.len()) - 1;
    let mut t = vec![T::zero(); full + 1];
    let mut u = vec![T::zero(); full + 1];
    let one = T::one();
    let two = T::from_int(2);
    for s in (0..full).rev() {
        let mut stay = T::zero();
        let mut first = one.clone();
        let mut second = T::zero();
        for (h, p) in &hits {
            let n = s | h;
            if n == s {
                stay = stay + p.clone();
            } else {
                first = first + p.clone() * t[n].clone();
                second =
                    second + p.clone() * (one.clone() + two.clone() * t[n].clone() + u[n].clone());
            }
        }
        let leave = one.clone() - stay.clone();
        if leave.is_zero() {
            return Err(Error::InfiniteWaitingTime);
        }
        t[s] = first / leave.clone();
        u[s] = (stay * (one.clone() + two.clone() * t[s].clone()) + second) / leave;
    }
    Ok((t[0].clone(), u[0].clone()))
}

/// ∫_0^∞ (1 − Π_E (1 − e^{−μ(E) t})) dt for pairwise disjoint sets, by expanding the product.
pub fn integral_expectation_disjoint<T: Scalar>(
    mu: &FiniteMeasure<T>,
    sys: &SubsetSystem,
) -> Result<T> {
    check(mu, sys)?;
    for (i, a) in sys.sets.iter().enumerate() {
        if sys.sets[i + 1..].iter().any(|b| a.intersects(b)) {
            return Err(Error::InvalidParameter(
                "sets are not pairwise disjoint".into(),
            ));
        }
    }
    // Π (1 − e^{−r t}) as a list of (rate, coefficient)
    let mut poly: Vec<(T, i64)> = vec![(T::zero(), 1)];
    for e in &sys.sets {
        let rate = mu.measure(e);
        let mut next = poly.clone();
        for (r, c) in &poly {
            let r2 = r.clone() + rate.clone();
            match next.iter_mut().find(|(x, _)| *x == r2) {
                Some((_, k)) => *k -= c,
                None => next.push((r2, -c)),
            }
        }
        poly = next;
    }
    Ok(poly
        .into_iter()
        .filter(|(r, _)| !r.is_zero())
        .fold(T::zero(), |acc, (r, c)| acc + T::from_int(-c) / r))
}

/// Σ_{n,m≤N} nm P(T_I=n, T_J=m) and an upper bound on the omitted mass of E(T_I T_J).
pub fn pair_expectation_bracket(
    mu: &FiniteMeasure<Rational>,
    a: &BitSet,
    b: &BitSet,
    n: u64,
) -> Result<(Rational, Rational)> {
    let p = positive(mu, a)?;
    let q = positive(mu, b)?;
    let one = Rational::one();
    let rho = (&one - &p).max(&one - &q);
    let mut sum = Rational::from_integer(0.into());
    for i in 1..=n {
        for j in 1..=n {
            let w = joint_pmf(mu, a, b, i, j)?;
            sum += w * Rational::from_integer(BigInt::from(i * j));
        }
    }
    // nm ≤ M² with M = max(T_I, T_J), and P(M > k) ≤ 2ρ^k, so the rest is at most
    // 2 Σ_{k>N} k² ρ^{k−1} ≤ 2 (N+1)² ρ^N / (1 − θ) with θ = ((N+2)/(N+1))² ρ.
    let n1 = Rational::from_integer(BigInt::from(n + 1));
    let n2 = Rational::from_integer(BigInt::from(n + 2));
    let theta = (&n2 / &n1) * (&n2 / &n1) * &rho;
    if theta >= one {
        return Err(Error::InvalidParameter(
            "truncation point too small for a certified tail".into(),
        ));
    }
    let tail = Rational::from_integer(2.into()) * &n1 * &n1 * num_traits::pow(rho, n as usize)
        / (&one - theta);
    Ok((sum, tail))
}

/// The coupon formulation of a generation profile: D = classes, E = complements of the rows.
pub fn from_profile(
    profile: &GenerationProfile,
) -> Result<(FiniteMeasure<Rational>, SubsetSystem)> {
    let mu = FiniteMeasure::new(profile.densities())?;
    let n = profile.num_classes();
    let sets: Vec<Vec<usize>> = profile
        .rows()
        .iter()
        .map(|r| (0..n).filter(|&i| !r.contains[i]).collect())
        .collect();
    Ok((mu, SubsetSystem::new(n, &sets)?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    weights: Vec<(String, String)>,
    sets: Vec<Vec<usize>>,
}

/// Parses `{"weights":[["1","3"],…],"sets":[[0],…]}`.
pub fn parse_instance(json: &str) -> Result<(FiniteMeasure<Rational>, SubsetSystem)> {
    let raw: RawInstance = serde_json::from_str(json)?;
    let mut w = Vec::new();
    for (n, d) in &raw.weights {
        let n: BigInt = n
            .trim()
            .parse()
            .map_err(|_| Error::Json(format!("bad numerator {n:?}")))?;
        let d: BigInt = d
            .trim()
            .parse()
            .map_err(|_| Error::Json(format!("bad denominator {d:?}")))?;
        if d == BigInt::from(0) {
            return Err(Error::Json("zero denominator".into()));
        }
        w.push(Rational::new(n, d));
    }
    let mu = FiniteMeasure::new(w)?;
    let sys = SubsetSystem::new(mu.len(), &raw.sets)?;
    Ok((mu, sys))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn halves() -> (FiniteMeasure<Rational>, SubsetSystem) {
        (
            FiniteMeasure::new(vec![q(1, 2), q(1, 2)]).unwrap(),
            SubsetSystem::new(2, &[vec![0], vec![1]]).unwrap(),
        )
    }

    fn thirds() -> (FiniteMeasure<Rational>, SubsetSystem) {
        (
            FiniteMeasure::new(vec![q(1, 3); 3]).unwrap(),
            SubsetSystem::new(3, &[vec![0], vec![1], vec![2]]).unwrap(),
        )
    }

    #[test]
    fn expectation_examples() {
        let (mu, sys) = halves();
        assert_eq!(expected_time(&mu, &sys).unwrap(), q(3, 1));
        assert_eq!(second_moment(&mu, &sys).unwrap(), q(11, 1));
        let whole = SubsetSystem::new(2, &[vec![0, 1]]).unwrap();
        assert_eq!(expected_time(&mu, &whole).unwrap(), q(1, 1));
        assert_eq!(second_moment(&mu, &whole).unwrap(), q(1, 1));
        let (mu, sys) = thirds();
        assert_eq!(expected_time(&mu, &sys).unwrap(), q(11, 2));
        assert_eq!(
            second_moment(&mu, &sys).unwrap(),
            exact_moments_dp(&mu, &sys).unwrap().1
        );
        let f: f64 = expected_time(&FiniteMeasure::new(vec![1.0 / 3.0; 3]).unwrap(), &sys).unwrap();
        assert!((f - 5.5).abs() < 1e-12);
    }

    #[test]
    fn zero_measure_is_rejected() {
        let mu = FiniteMeasure::new(vec![q(1, 1), q(0, 1)]).unwrap();
        let sys = SubsetSystem::new(2, &[vec![1]]).unwrap();
        assert_eq!(expected_time(&mu, &sys), Err(Error::InfiniteWaitingTime));
        assert!(FiniteMeasure::new(vec![q(1, 2)]).is_err());
        assert!(SubsetSystem::new(2, &[vec![]]).is_err());
        assert!(SubsetSystem::new(2, &[]).is_err());
    }

    #[test]
    fn pair_examples() {
        let mu = FiniteMeasure::new(vec![q(1, 4); 4]).unwrap();
        let a = BitSet::from_indices(4, [0, 1]);
        let b = BitSet::from_indices(4, [2, 3]);
        assert_eq!(pair_expectation(&mu, &a, &a).unwrap(), q(6, 1));
        assert_eq!(pair_expectation(&mu, &a, &b).unwrap(), q(3, 1));
        let small = BitSet::from_indices(4, [0]);
        assert_eq!(pair_expectation(&mu, &small, &a).unwrap(), q(10, 1));
        assert_eq!(pair_expectation(&mu, &a, &small).unwrap(), q(10, 1));
    }

    #[test]
    fn joint_law_examples() {
        let mu = FiniteMeasure::new(vec![q(1, 2), q(1, 2)]).unwrap();
        let a = BitSet::from_indices(2, [0]);
        let b = BitSet::from_indices(2, [1]);
        assert_eq!(joint_pmf(&mu, &a, &b, 1, 1).unwrap(), q(0, 1));
        assert_eq!(joint_pmf(&mu, &a, &b, 2, 1).unwrap(), q(1, 4));
        for n in 1..6u64 {
            for m in 1..6u64 {
                let expect = if n == m { q(1, 1 << n) } else { q(0, 1) };
                assert_eq!(joint_pmf(&mu, &a, &a, n, m).unwrap(), expect);
            }
        }
        assert!(joint_pmf(&mu, &a, &b, 0, 1).is_err());
    }

    #[test]
    fn dp_examples() {
        let mu = FiniteMeasure::new(vec![q(1, 2), q(1, 2)]).unwrap();
        let whole = SubsetSystem::new(2, &[vec![0, 1]]).unwrap();
        assert_eq!(
            exact_distribution_dp(&mu, &whole, 3).unwrap(),
            vec![q(1, 1), q(0, 1), q(0, 1)]
        );
        let (mu, sys) = halves();
        let d = exact_distribution_dp(&mu, &sys, 10).unwrap();
        assert_eq!(d[0], q(0, 1));
        for k in 2..=10 {
            assert_eq!(d[k - 1], q(1, 1 << (k - 1)));
        }
        assert_eq!(exact_moments_dp(&mu, &sys).unwrap(), (q(3, 1), q(11, 1)));
    }

    #[test]
    fn dp_state_cap() {
        let mu = FiniteMeasure::new(vec![q(1, 17); 17]).unwrap();
        let sets: Vec<Vec<usize>> = (0..17).map(|i| vec![i]).collect();
        let sys = SubsetSystem::new(17, &sets).unwrap();
        assert_eq!(
            exact_distribution_dp(&mu, &sys, 2).unwrap_err(),
            Error::StateCap {
                found: 17,
                limit: 16
            }
        );
    }

    #[test]
    fn instance_json() {
        let (mu, sys) =
            parse_instance(r#"{"weights":[["1","3"],["1","3"],["1","3"]],"sets":[[0],[1],[2]]}"#)
                .unwrap();
        assert_eq!(expected_time(&mu, &sys).unwrap(), q(11, 2));
        assert!(parse_instance(r#"{"weights":[["1","0"]],"sets":[[0]]}"#).is_err());
    }

    // weights with denominators ≤ 12 and up to four random sets over ≤ 6 points
    fn instance() -> impl Strategy<Value = (Vec<Rational>, Vec<Vec<usize>>)> {
        (1usize..=6).prop_flat_map(|d| {
            (
                proptest::collection::vec(1i64..=12, d),
                1i64..=12,
                proptest::collection::vec(proptest::collection::vec(any::<bool>(), d), 1..=4),
            )
                .prop_map(move |(raw, den, sets)| {
                    let total: i64 = raw.iter().sum();
                    // renormalize against a denominator, keeping denominators small
                    let w: Vec<Rational> = raw.iter().map(|&x| q(x * den, total * den)).collect();
                    let sets = sets
                        .into_iter()
                        .map(|bits| {
                            let s: Vec<usize> = (0..d).filter(|&i| bits[i]).collect();
                            if s.is_empty() {
                                vec![0]
                            } else {
                                s
                            }
                        })
                        .collect();
                    (w, sets)
                })
        })
    }

    proptest! {
        #[test]
        fn formulas_match_dp((w, sets) in instance()) {
            let mu = FiniteMeasure::new(w.clone()).unwrap();
            let sys = SubsetSystem::new(w.len(), &sets).unwrap();
            let (e1, e2) = exact_moments_dp(&mu, &sys).unwrap();
            prop_assert_eq!(expected_time(&mu, &sys).unwrap(), e1);
            prop_assert_eq!(second_moment(&mu, &sys).unwrap(), e2);
        }

        #[test]
        fn pair_expectation_is_symmetric((w, sets) in instance()) {
            let mu = FiniteMeasure::new(w.clone()).unwrap();
            let a = BitSet::from_indices(w.len(), sets[0].iter().copied());
            let b = BitSet::from_indices(w.len(), sets[sets.len() - 1].iter().copied());
            prop_assert_eq!(pair_expectation(&mu, &a, &b).unwrap(), pair_expectation(&mu, &b, &a).unwrap());
        }

        #[test]
        fn disjoint_integral_identity(parts in proptest::collection::vec(1i64..=9, 1..=5)) {
            let total: i64 = parts.iter().sum();
            let w: Vec<Rational> = parts.iter().map(|&x| q(x, total)).collect();
            let sets: Vec<Vec<usize>> = (0..parts.len()).map(|i| vec![i]).collect();
            let mu = FiniteMeasure::new(w).unwrap();
            let sys = SubsetSystem::new(parts.len(), &sets).unwrap();
            prop_assert_eq!(integral_expectation_disjoint(&mu, &sys).unwrap(), expected_time(&mu, &sys).unwrap());
        }
    }

    #[test]
    fn marginal_of_joint_law() {
        let mu = FiniteMeasure::new(vec![q(1, 4), q(1, 4), q(1, 2)]).unwrap();
        let a = BitSet::from_indices(3, [0, 1]);
        let b = BitSet::from_indices(3, [1, 2]);
        let p = q(1, 2);
        for n in 1..5u64 {
            let partial: Rational = (1..=60)
                .map(|m| joint_pmf(&mu, &a, &b, n, m).unwrap())
                .sum();
            let geo = &p * num_traits::pow(Rational::one() - &p, n as usize - 1);
            assert!(partial <= geo && &geo - &partial < q(1, 1_000_000_000));
        }
        let (lo, tail) = pair_expectation_bracket(&mu, &a, &b, 60).unwrap();
        let exact = pair_expectation(&mu, &a, &b).unwrap();
        assert!(lo <= exact && exact <= &lo + &tail);
    }
}
