// Reproduction of the invariant tables for small groups.

use rayon::prelude::*;

use crate::chebotarev_engine::invariants;
use crate::decimal;
use crate::error::{Error, Result};
use crate::group_core::{build_group, GroupSpec};
use crate::numtheory::is_prime;
use crate::subgroup_lattice::{profile_of, LatticeCaps};
use crate::sym_alt::{partial_invariants, Variant};
use crate::Rational;

pub const TABLE_IDS: [u32; 6] = [1, 2, 3, 4, 11, 12];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct TableOptions {
    pub max_n: Option<usize>,
    pub max_p: Option<u64>,
    pub caps: LatticeCaps,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowError {
    pub code: &'static str,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableRow {
    pub label: String,
    pub order: String,
    pub value: std::result::Result<(Rational, Rational), RowError>,
}

impl TableRow {
    pub fn c_text(&self) -> Option<String> {
        self.value.as_ref().ok().map(|(c, _)| decimal::table(c))
    }

    pub fn c2_text(&self) -> Option<String> {
        self.value.as_ref().ok().map(|(_, c2)| decimal::table(c2))
    }
}

enum Job {
    Group(String, GroupSpec),
    PartialAlt(usize),
}

fn primes_upto(max: u64) -> impl Iterator<Item = u64> {
    (2..=max).filter(|&p| is_prime(p))
}

fn jobs(id: u32, opts: &TableOptions) -> Result<Vec<Job>> {
    let group = |s: GroupSpec| Job::Group(s.label(), s);
    Ok(match id {
        1 => (2..=opts.max_n.unwrap_or(7))
            .map(|n| group(GroupSpec::Alternating { n }))
            .collect(),
        2 => (3..=opts.max_n.unwrap_or(20))
            .map(Job::PartialAlt)
            .collect(),
        3 => (2..=opts.max_n.unwrap_or(6))
            .map(|n| group(GroupSpec::Symmetric { n }))
            .collect(),
        4 => {
            let mut rows = vec![group(GroupSpec::Cyclic { n: 17 })];
            for l in [8, 4, 2] {
                rows.push(group(GroupSpec::Affine {
                    p: 17,
                    index: Some(l),
                }));
            }
            rows.push(group(GroupSpec::Affine { p: 17, index: None }));
            rows
        }
        11 => primes_upto(opts.max_p.unwrap_or(5))
            .map(|p| group(GroupSpec::Borel3 { p }))
            .collect(),
        12 => primes_upto(opts.max_p.unwrap_or(13))
            .map(|p| group(GroupSpec::Psl2 { p }))
            .collect(),
        _ => {
            return Err(Error::InvalidParameter(format!(
                "unknown table {id}; expected one of {TABLE_IDS:?}"
            )))
        }
    })
}

fn run(job: &Job, caps: LatticeCaps) -> TableRow {
    let (label, order, value) = match job {
        Job::Group(label, spec) => {
            let order = spec
                .expected_order()
                .map(|o| o.to_string())
                .unwrap_or_default();
            let value = build_group(spec, caps.max_order)
                .and_then(|g| profile_of(&g, caps))
                .and_then(|p| invariants(&p));
            (label.clone(), order, value)
        }
        Job::PartialAlt(n) => {
            let order = (3..=*n as u128).product::<u128>().to_string();
            (n.to_string(), order, partial_invariants(*n, Variant::Alt))
        }
    };
    let value = value.map_err(|e| RowError {
        code: e.code(),
        message: e.to_string(),
    });
    TableRow {
        label,
        order,
        value,
    }
}

/// Computes the rows of a table; rows that fail carry their error.
pub fn table_rows(id: u32, opts: &TableOptions) -> Result<Vec<TableRow>> {
    let jobs = jobs(id, opts)?;
    Ok(jobs.par_iter().map(|j| run(j, opts.caps)).collect())
}
