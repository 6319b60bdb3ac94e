// Closed formulas for abelian and affine groups, and certified series.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::numtheory::{factorize, prime_power, squarefree_divisors};
use crate::scalar::Scalar;
use crate::Rational;

fn ratio<T: Scalar>(n: i64, d: i64) -> T {
    T::from_ratio(&BigInt::from(n), &BigInt::from(d))
}

fn big_ratio<T: Scalar>(n: BigInt, d: BigInt) -> T {
    T::from_ratio(&n, &d)
}

fn q(n: impl Into<BigInt>, d: impl Into<BigInt>) -> Rational {
    Rational::new(n.into(), d.into())
}

/// −Σ_{1≠d|n} μ(d)/(1−1/d); 1 for the trivial group.
pub fn cheb_cyclic(n: u64) -> Rational {
    cheb_cyclic_as(n)
}

pub fn cheb_cyclic_as<T: Scalar>(n: u64) -> T {
    if n <= 1 {
        return T::one();
    }
    squarefree_divisors(n)
        .into_iter()
        .fold(T::zero(), |acc, (d, mu)| {
            // −μ(d) d/(d−1)
            acc + ratio::<T>(-(mu as i64) * d as i64, d as i64 - 1)
        })
}

fn sec_cyclic_sum<T: Scalar>(n: u64) -> T {
    squarefree_divisors(n)
        .into_iter()
        .fold(T::zero(), |acc, (d, mu)| {
            // −μ(d)(1+1/d)/(1−1/d)² = −μ(d) d(d+1)/(d−1)²
            let d = d as i64;
            acc + ratio::<T>(-(mu as i64) * d * (d + 1), (d - 1) * (d - 1))
        })
}

/// −Σ_{1≠d|n} μ(d)(1+1/d)/(1−1/d)²; 1 for the trivial group.
pub fn sec_cyclic(n: u64) -> Rational {
    sec_cyclic_as(n)
}

pub fn sec_cyclic_as<T: Scalar>(n: u64) -> T {
    if n <= 1 {
        T::one()
    } else {
        sec_cyclic_sum(n)
    }
}

fn check_prime(p: u64) -> Result<()> {
    if crate::numtheory::is_prime(p) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{p} is not prime")))
    }
}

fn check_k(k: u32) -> Result<()> {
    if k == 0 {
        Err(Error::InvalidParameter("k must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// k + Σ_{j≤k} 1/(p^j − 1)
pub fn cheb_elementary(p: u64, k: u32) -> Result<Rational> {
    cheb_elementary_as(p, k)
}

pub fn cheb_elementary_as<T: Scalar>(p: u64, k: u32) -> Result<T> {
    check_prime(p)?;
    check_k(k)?;
    let p = BigInt::from(p);
    Ok((1..=k).fold(T::from_int(k as i64), |acc, j| {
        acc + big_ratio::<T>(BigInt::one(), p.pow(j) - 1)
    }))
}

/// c(F_p^k)² + Σ_{j≤k} p^j/(p^j − 1)²
pub fn sec_elementary(p: u64, k: u32) -> Result<Rational> {
    sec_elementary_as(p, k)
}

pub fn sec_elementary_as<T: Scalar>(p: u64, k: u32) -> Result<T> {
    let c: T = cheb_elementary_as(p, k)?;
    let p = BigInt::from(p);
    Ok((1..=k).fold(c.clone() * c, |acc, j| {
        let pj = p.pow(j);
        let d = &pj - 1;
        acc + big_ratio::<T>(pj, &d * &d)
    }))
}

/// Gaussian binomial coefficient (k choose j)_p.
pub fn gaussian_binomial(k: u32, j: u32, p: u64) -> BigUint {
    if j > k {
        return BigUint::zero();
    }
    let p = BigUint::from(p);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..j {
        num *= p.pow(k - i) - 1u32;
        den *= p.pow(i + 1) - 1u32;
    }
    num / den
}

// Signed number of j-subsets of hyperplanes with codimension-j intersection, summed.
fn qbinomial_coefficient(p: u64, k: u32, j: u32) -> BigInt {
    let c = BigInt::from(gaussian_binomial(k, j, p)) * BigInt::from(p).pow(j * (j - 1) / 2);
    if j % 2 == 1 {
        c
    } else {
        -c
    }
}

/// Σ_j (−1)^{j+1}/(1−p^{−j}) (k j)_p p^{j(j−1)/2}
pub fn cheb_elementary_qbinomial(p: u64, k: u32) -> Result<Rational> {
    check_prime(p)?;
    check_k(k)?;
    let pb = BigInt::from(p);
    Ok((1..=k)
        .map(|j| {
            let pj = pb.pow(j);
            Rational::new(qbinomial_coefficient(p, k, j) * &pj, pj - 1)
        })
        .sum())
}

/// Σ_j (−1)^{j+1}(1+p^{−j})/(1−p^{−j})² (k j)_p p^{j(j−1)/2}
pub fn sec_elementary_qbinomial(p: u64, k: u32) -> Result<Rational> {
    check_prime(p)?;
    check_k(k)?;
    let pb = BigInt::from(p);
    Ok((1..=k)
        .map(|j| {
            let pj = pb.pow(j);
            let d = &pj - 1;
            Rational::new(qbinomial_coefficient(p, k, j) * &pj * (&pj + 1), &d * &d)
        })
        .sum())
}

fn affine_q(q: u64) -> Result<()> {
    if q < 2 {
        return Err(Error::InvalidParameter("q must be at least 2".into()));
    }
    if prime_power(q).is_none() {
        return Err(Error::InvalidParameter(format!("{q} is not a prime power")));
    }
    Ok(())
}

/// c(H_q) = q − q⁻¹ Σ_{1≠d|q−1} μ(d)/((1−1/d)(1−1/d+1/q))
pub fn cheb_affine(q: u64) -> Result<Rational> {
    cheb_affine_as(q)
}

pub fn cheb_affine_as<T: Scalar>(qq: u64) -> Result<T> {
    affine_q(qq)?;
    let qi = qq as i64;
    let s = squarefree_divisors(qq - 1)
        .into_iter()
        .fold(T::zero(), |acc, (d, mu)| {
            let d = d as i64;
            // μ / ((d−1)/d · (q(d−1)+d)/(dq)) = μ d² q / ((d−1)(q(d−1)+d))
            acc + big_ratio::<T>(
                BigInt::from(mu) * d * d * qi,
                BigInt::from(d - 1) * BigInt::from(qi * (d - 1) + d),
            )
        });
    Ok(T::from_int(qi) - s / T::from_int(qi))
}

/// c₂(H_q) = q(2q−1) + c₂(Z/(q−1)) + Σ μ(d)(1+1/d−1/q)/(1−1/d+1/q)²
pub fn sec_affine(q: u64) -> Result<Rational> {
    sec_affine_as(q)
}

pub fn sec_affine_as<T: Scalar>(qq: u64) -> Result<T> {
    affine_q(qq)?;
    let qi = qq as i64;
    let s = squarefree_divisors(qq - 1)
        .into_iter()
        .fold(T::zero(), |acc, (d, mu)| {
            let d = d as i64;
            // (1+1/d−1/q)/(1−1/d+1/q)² = dq(dq+q−d)/(dq−q+d)²
            let den = d * qi - qi + d;
            acc + big_ratio::<T>(
                BigInt::from(mu) * d * qi * (d * qi + qi - d),
                BigInt::from(den) * BigInt::from(den),
            )
        });
    Ok(T::from_int(qi * (2 * qi - 1)) + sec_cyclic_sum::<T>(qq - 1) + s)
}

/// p-ranks of a finite abelian group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianShape {
    pub prime_ranks: BTreeMap<u64, u32>,
    pub delta: u32,
}

impl AbelianShape {
    /// r_p = number of factors divisible by p.
    pub fn from_factors(factors: &[u64]) -> Result<Self> {
        if factors.contains(&0) {
            return Err(Error::InvalidParameter("factors must be positive".into()));
        }
        let mut ranks = BTreeMap::new();
        for &f in factors {
            for (p, _) in factorize(f) {
                *ranks.entry(p).or_insert(0) += 1;
            }
        }
        let delta = ranks.values().copied().max().unwrap_or(0);
        Ok(AbelianShape {
            prime_ranks: ranks,
            delta,
        })
    }

    pub fn cyclic(n: u64) -> Self {
        Self::from_factors(&[n.max(1)]).expect("positive")
    }

    pub fn is_trivial(&self) -> bool {
        self.prime_ranks.is_empty()
    }
}

/// A closed interval with rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertifiedValue {
    pub lower: Rational,
    pub upper: Rational,
}

impl CertifiedValue {
    pub fn exact(v: Rational) -> Self {
        CertifiedValue {
            lower: v.clone(),
            upper: v,
        }
    }

    pub fn width(&self) -> Rational {
        &self.upper - &self.lower
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lower <= x && x <= &self.upper
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lower + &self.upper) / Rational::from_integer(2.into())
    }

    pub fn intersect(&self, other: &CertifiedValue) -> CertifiedValue {
        CertifiedValue {
            lower: self.lower.clone().max(other.lower.clone()),
            upper: self.upper.clone().min(other.upper.clone()),
        }
    }
}

fn check_tol(tol: &Rational) -> Result<()> {
    if tol <= &Rational::zero() {
        Err(Error::InvalidParameter("tolerance must be positive".into()))
    } else {
        Ok(())
    }
}

// 1 − Π_p Π_{i≤r_p} (1 − p^{−(δ+j−i)})
fn pomerance_term(shape: &AbelianShape, j: u32) -> Rational {
    let mut prod = Rational::one();
    for (&p, &r) in &shape.prime_ranks {
        for i in 1..=r {
            let e = shape.delta + j - i;
            prod *= Rational::one() - q(1, BigInt::from(p).pow(e));
        }
    }
    Rational::one() - prod
}

// Σ_p Σ_i p^{i−δ}/(p−1) · p^{−J} bounds the tail beyond J; `weight` selects
// Σ_{j>J} x^j (false) or Σ_{j>J} (2j+2δ−1) x^j (true), with x = 1/p.
fn pomerance_tail(shape: &AbelianShape, big_j: u32, weighted: bool) -> Rational {
    let mut total = Rational::zero();
    for (&p, &r) in &shape.prime_ranks {
        let x = q(1, p);
        let one = Rational::one();
        let xj1 = num_traits::pow(x.clone(), big_j as usize + 1);
        let s0 = &xj1 / (&one - &x);
        let series = if weighted {
            let jj = Rational::from_integer(big_j.into());
            let s1 = &xj1 * (&jj + &one - &jj * &x) / ((&one - &x) * (&one - &x));
            s1 * Rational::from_integer(2.into())
                + s0 * Rational::from_integer((2 * shape.delta as i64 - 1).into())
        } else {
            s0
        };
        let coeff: Rational = (1..=r)
            .map(|i| Rational::new(BigInt::from(p).pow(i), BigInt::from(p).pow(shape.delta)))
            .sum();
        total += coeff * series;
    }
    total
}

fn pomerance_series(
    shape: &AbelianShape,
    tol: &Rational,
    secondary: bool,
) -> Result<CertifiedValue> {
    check_tol(tol)?;
    if shape.is_trivial() {
        return Ok(CertifiedValue::exact(Rational::one()));
    }
    let delta = shape.delta as i64;
    let mut sum = if secondary {
        q(delta * delta, 1)
    } else {
        q(delta, 1)
    };
    let mut j = 0u32;
    loop {
        let tail = pomerance_tail(shape, j, secondary);
        if &tail <= tol {
            return Ok(CertifiedValue {
                lower: sum.clone(),
                upper: sum + tail,
            });
        }
        j += 1;
        let t = pomerance_term(shape, j);
        sum += if secondary {
            t * q(2 * j as i64 + 2 * delta - 1, 1)
        } else {
            t
        };
    }
}

/// δ + Σ_{j≥1}(1 − Π_p Π_i (1 − p^{−(δ+j−i)})), enclosed to within `tol`.
pub fn cheb_abelian(shape: &AbelianShape, tol: &Rational) -> Result<CertifiedValue> {
    pomerance_series(shape, tol, false)
}

/// δ² + Σ_{j≥1}(2j+2δ−1)(1 − Π …), enclosed to within `tol`.
pub fn sec_abelian(shape: &AbelianShape, tol: &Rational) -> Result<CertifiedValue> {
    pomerance_series(shape, tol, true)
}

const ZETA_SCALE_BITS: u32 = 120;

// Fixed-point enclosure of Σ_{n≤N} n^{−k}, extended incrementally.
struct ZetaPartial {
    k: u32,
    n: u64,
    lo: u128,
    hi: u128,
}

impl ZetaPartial {
    fn new(k: u32) -> Self {
        ZetaPartial {
            k,
            n: 0,
            lo: 0,
            hi: 0,
        }
    }

    fn extend_to(&mut self, n_max: u64) {
        let scale = 1u128 << ZETA_SCALE_BITS;
        while self.n < n_max {
            self.n += 1;
            match (self.n as u128).checked_pow(self.k) {
                Some(d) if d <= scale => {
                    self.lo += scale / d;
                    self.hi += scale.div_ceil(d);
                }
                _ => self.hi += 1,
            }
        }
    }

    // ζ(k) ∈ [lo, hi]
    fn enclosure(&self) -> (Rational, Rational) {
        let scale = BigUint::one() << ZETA_SCALE_BITS;
        let km1 = BigUint::from(self.k - 1);
        let n = BigUint::from(self.n);
        let t_lo = &scale / (&km1 * (&n + 1u32).pow(self.k - 1));
        let t_hi = Integer::div_ceil(&scale, &(&km1 * n.pow(self.k - 1)));
        let s = BigInt::from(scale);
        (
            Rational::new(BigInt::from(BigUint::from(self.lo) + t_lo), s.clone()),
            Rational::new(BigInt::from(BigUint::from(self.hi) + t_hi), s),
        )
    }
}

/// Encloses 2 + Σ_{k≥2}(1 − 1/ζ(k)), the limsup of c over cyclic groups.
pub fn niven_limit(tol: &Rational) -> Result<CertifiedValue> {
    check_tol(tol)?;
    let mut zetas: Vec<ZetaPartial> = Vec::new();
    let mut acc: Option<CertifiedValue> = None;
    for level in 0u32.. {
        // target width 2^{−level}
        let w = (-(level as f64)).exp2();
        let mut big_k = 2u32;
        loop {
            // Σ_{k>K}(1 − 1/ζ(k)) ≤ 2^{−K}(1 + 2/K)
            let tail = (-(big_k as f64)).exp2() * (1.0 + 2.0 / big_k as f64);
            if tail <= w / 2.0 {
                break;
            }
            big_k += 1;
        }
        let one = Rational::one();
        let mut lo = q(2, 1);
        let mut hi = q(2, 1);
        for k in 2..=big_k {
            if zetas.len() < (k - 1) as usize {
                zetas.push(ZetaPartial::new(k));
            }
            let z = &mut zetas[(k - 2) as usize];
            let need = (4.0 * big_k as f64 / w)
                .powf(1.0 / k as f64)
                .ceil()
                .max(2.0) as u64;
            z.extend_to(need.next_power_of_two().max(z.n));
            let (zl, zh) = z.enclosure();
            lo += &one - zl.recip();
            hi += &one - zh.recip();
        }
        let k = Rational::from_integer(big_k.into());
        hi += (&one + q(2, 1) / &k) / Rational::from_integer(BigInt::from(2).pow(big_k));
        let cur = CertifiedValue {
            lower: lo,
            upper: hi,
        };
        let merged = match acc {
            Some(a) => a.intersect(&cur),
            None => cur,
        };
        if &merged.width() <= tol {
            return Ok(merged);
        }
        acc = Some(merged);
    }
    unreachable!()
}
