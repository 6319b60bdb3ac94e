// Seeded Monte Carlo estimates of the waiting time, and the Poisson cycle model.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chebotarev_engine::GenerationProfile;
use crate::error::{Error, Result};
use crate::group_core::{ConjugacyTable, PermGroup};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
    /// Poisson model: number of cycle lengths sampled.
    pub l: usize,
    /// Poisson model: largest subsum tracked.
    pub b: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            trials: 100_000,
            seed: 0,
            l: 100,
            b: 1024,
        }
    }
}

impl SimConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        SimConfig {
            trials,
            seed,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.b == 0 {
            return Err(Error::InvalidParameter(
                "subsum cap must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub counts: BTreeMap<u64, u64>,
    pub trials: u64,
    pub mean: f64,
    pub second_moment: f64,
    pub stderr: f64,
}

impl Histogram {
    fn from_counts(counts: BTreeMap<u64, u64>) -> Self {
        let trials: u64 = counts.values().sum();
        let t = trials as f64;
        let mean = counts
            .iter()
            .map(|(&k, &c)| k as f64 * c as f64)
            .sum::<f64>()
            / t;
        let second_moment = counts
            .iter()
            .map(|(&k, &c)| (k * k) as f64 * c as f64)
            .sum::<f64>()
            / t;
        let var = if trials > 1 {
            (second_moment - mean * mean).max(0.0) * t / (t - 1.0)
        } else {
            0.0
        };
        Histogram {
            counts,
            trials,
            mean,
            second_moment,
            stderr: (var / t).sqrt(),
        }
    }

    pub fn frequency(&self, k: u64) -> f64 {
        self.counts.get(&k).copied().unwrap_or(0) as f64 / self.trials as f64
    }

    pub fn summary_json(&self, seed: u64) -> serde_json::Value {
        serde_json::json!({
            "mean": format!("{:.4}", self.mean),
            "stderr": format!("{:.4}", self.stderr),
            "trials": self.trials,
            "seed": seed,
        })
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn run_trials(cfg: &SimConfig, f: impl Fn(&mut ChaCha8Rng) -> u64 + Sync) -> Histogram {
    const CHUNK: u64 = 1024;
    let chunks = cfg.trials.div_ceil(CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut local = BTreeMap::new();
            for t in c * CHUNK..((c + 1) * CHUNK).min(cfg.trials) {
                let mut rng = trial_rng(cfg.seed, t);
                *local.entry(f(&mut rng)).or_insert(0u64) += 1;
            }
            local
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, c) in b {
                *a.entry(k).or_insert(0) += c;
            }
            a
        });
    Histogram::from_counts(counts)
}

/// Draws uniform elements until no maximal class can still contain all of them.
pub fn empirical_chebotarev(
    g: &PermGroup,
    classes: &ConjugacyTable,
    profile: &GenerationProfile,
    cfg: &SimConfig,
) -> Result<Histogram> {
    cfg.validate()?;
    if profile.num_classes() != classes.len() {
        return Err(Error::InvalidProfile(format!(
            "profile has {} classes but the group has {}",
            profile.num_classes(),
            classes.len()
        )));
    }
    // Bit k of column[c] is set when row k meets class c.
    let column: Vec<u32> = (0..profile.num_classes())
        .map(|c| {
            profile
                .rows()
                .iter()
                .enumerate()
                .filter(|(_, r)| r.contains[c])
                .fold(0, |m, (k, _)| m | (1 << k))
        })
        .collect();
    let all: u32 = (1u32 << profile.num_rows()) - 1;
    let order = g.order();
    Ok(run_trials(cfg, |rng| {
        let mut alive = all;
        let mut k = 0;
        loop {
            k += 1;
            let x = rng.gen_range(0..order);
            alive &= column[classes.class_of[x]];
            if alive == 0 {
                return k;
            }
        }
    }))
}

/// Rows `k,count,frequency` in increasing k.
pub fn empirical_distribution_csv(h: &Histogram) -> String {
    let mut out = String::from("k,count,frequency\n");
    for (&k, &c) in &h.counts {
        out.push_str(&format!("{k},{c},{:.6}\n", c as f64 / h.trials as f64));
    }
    out
}

fn poisson(rng: &mut ChaCha8Rng, lambda: f64) -> usize {
    let u: f64 = rng.gen();
    let mut k = 0;
    let mut p = (-lambda).exp();
    let mut cdf = p;
    while u >= cdf && k < 1000 {
        k += 1;
        p *= lambda / k as f64;
        cdf += p;
    }
    k
}

// Positive subsums up to b of a multiset with `counts[i-1]` copies of i.
fn positive_subsums(counts: &[usize], b: usize) -> Vec<bool> {
    let mut reach = vec![false; b + 1];
    reach[0] = true;
    for (i, &m) in counts.iter().enumerate() {
        let len = i + 1;
        for _ in 0..m {
            for s in (len..=b).rev() {
                if reach[s - len] {
                    reach[s] = true;
                }
            }
        }
    }
    reach[0] = false;
    reach
}

/// Limit model for A_n: cycle counts ϖ_i ~ Poisson(1/i) for i ≤ L; stop once
/// the draws share no positive subsum up to B.
pub fn poisson_model_estimate(cfg: &SimConfig) -> Result<Histogram> {
    cfg.validate()?;
    Ok(run_trials(cfg, |rng| {
        let mut common: Option<Vec<bool>> = None;
        let mut k = 0;
        loop {
            k += 1;
            let counts: Vec<usize> = (1..=cfg.l).map(|i| poisson(rng, 1.0 / i as f64)).collect();
            let sums = positive_subsums(&counts, cfg.b);
            let next = match common {
                None => sums,
                Some(c) => c.iter().zip(&sums).map(|(a, b)| *a && *b).collect(),
            };
            if !next.iter().any(|&x| x) {
                return k;
            }
            common = Some(next);
        }
    }))
}
