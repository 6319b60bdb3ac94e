use std::process::ExitCode;

use chebotarev::chebotarev_engine::{invariants, p_m, partial_bounds, GenerationProfile};
use chebotarev::closed_forms::{
    cheb_abelian, cheb_affine, cheb_cyclic, cheb_elementary, niven_limit, sec_abelian, sec_affine,
    sec_cyclic, sec_elementary, AbelianShape, CertifiedValue,
};
use chebotarev::coupon_collector::{expected_time, parse_instance, second_moment};
use chebotarev::decimal;
use chebotarev::error::Error;
use chebotarev::group_core::{build_group, GroupSpec, DEFAULT_ORDER_CAP};
use chebotarev::simulation::{
    empirical_chebotarev, empirical_distribution_csv, poisson_model_estimate, SimConfig,
};
use chebotarev::subgroup_lattice::{analyze, LatticeCaps, DEFAULT_SUBGROUP_CAP};
use chebotarev::tables::{table_rows, TableOptions};
use chebotarev::Rational;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::{One, Zero};
use serde_json::{json, Value};

const ENV_MAX_ORDER: &str = "CHEBOTAREV_MAX_ORDER";
const ENV_MAX_SUBGROUPS: &str = "CHEBOTAREV_MAX_SUBGROUPS";

#[derive(Parser)]
#[command(
    name = "chebotarev",
    version,
    about = "Chebotarev invariants of finite groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CapArgs {
    /// Largest group order to enumerate (default from CHEBOTAREV_MAX_ORDER, else 5000).
    #[arg(long)]
    max_order: Option<usize>,
    /// Largest number of subgroups to enumerate (default from CHEBOTAREV_MAX_SUBGROUPS, else 200000).
    #[arg(long)]
    max_subgroups: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact c(G) and c₂(G) for a group or an imported profile.
    Compute {
        /// Group as JSON, e.g. '{"family":"alternating","n":5}'.
        #[arg(long, conflicts_with = "profile", required_unless_present = "profile")]
        group: Option<String>,
        /// Path to a generation profile JSON file.
        #[arg(long)]
        profile: Option<String>,
        /// Comma-separated maximal-class rows for the partial bounds.
        #[arg(long, value_delimiter = ',')]
        partial: Option<Vec<usize>>,
        /// Lower bound on the probability that the partial rows alone decide generation.
        #[arg(long, requires = "partial")]
        pm: Option<String>,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// CSV rows of the invariant tables.
    Tables {
        #[arg(long)]
        table: u32,
        #[arg(long)]
        max_n: Option<usize>,
        #[arg(long)]
        max_p: Option<u64>,
        /// Row selection for table 4; only the solvable rows are computable.
        #[arg(long, default_value = "solvable")]
        rows: String,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Monte Carlo waiting times.
    Simulate {
        #[arg(long, required_unless_present = "poisson")]
        group: Option<String>,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Run the Poisson cycle model instead of a group.
        #[arg(long, conflicts_with = "group")]
        poisson: bool,
        #[arg(long, default_value_t = 100)]
        l: usize,
        #[arg(long, default_value_t = 1024)]
        b: usize,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Moments of a coupon collector instance.
    Coupon {
        /// Path to `{"weights":[["num","den"],…],"sets":[[…],…]}`.
        #[arg(long)]
        spec: String,
    },
    /// Closed forms for cyclic, elementary abelian, affine and abelian groups.
    ClosedForm {
        #[arg(long, group = "which")]
        cyclic: Option<u64>,
        /// p,k
        #[arg(long, group = "which", value_delimiter = ',')]
        elementary: Option<Vec<u64>>,
        #[arg(long, group = "which")]
        affine: Option<u64>,
        /// Invariant factors, comma separated.
        #[arg(long, group = "which", value_delimiter = ',')]
        abelian: Option<Vec<u64>>,
        #[arg(long, group = "which")]
        niven: bool,
        /// Interval width for series evaluations.
        #[arg(long, default_value = "1e-12")]
        tol: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

struct Failure {
    code: &'static str,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: e.code(),
            message: e.to_string(),
        }
    }
}

fn fail(code: &'static str, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn env_cap(var: &str, default: usize) -> Result<usize, Failure> {
    match std::env::var(var) {
        Ok(v) => v.trim().parse().map_err(|_| {
            fail(
                "invalid_parameter",
                format!("{var} must be a positive integer"),
            )
        }),
        Err(_) => Ok(default),
    }
}

fn caps(args: &CapArgs) -> Result<LatticeCaps, Failure> {
    Ok(LatticeCaps {
        max_order: match args.max_order {
            Some(v) => v,
            None => env_cap(ENV_MAX_ORDER, DEFAULT_ORDER_CAP)?,
        },
        max_subgroups: match args.max_subgroups {
            Some(v) => v,
            None => env_cap(ENV_MAX_SUBGROUPS, DEFAULT_SUBGROUP_CAP)?,
        },
    })
}

// Accepts "a/b", integers, decimals and scientific notation.
fn parse_rational(s: &str) -> Result<Rational, Failure> {
    let bad = || {
        fail(
            "invalid_parameter",
            format!("cannot read {s:?} as a number"),
        )
    };
    let s = s.trim();
    if s.contains('/') {
        return s.parse().map_err(|_| bad());
    }
    let (mant, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    let digits: Rational = format!("{int}{frac}").parse().map_err(|_| bad())?;
    Ok(digits * pow10(exp - frac.len() as i32, &Rational::from_integer(10.into())))
}

fn pow10(e: i32, ten: &Rational) -> Rational {
    let p = num_traits::pow::pow(ten.clone(), e.unsigned_abs() as usize);
    if e < 0 {
        Rational::one() / p
    } else {
        p
    }
}

fn fraction(x: &Rational) -> Value {
    json!({"num": x.numer().to_string(), "den": x.denom().to_string()})
}

fn read_file(path: &str) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| fail("io", format!("{path}: {e}")))
}

fn parse_group(s: &str) -> Result<GroupSpec, Failure> {
    serde_json::from_str(s).map_err(|e| fail("invalid_spec", e.to_string()))
}

fn compute(
    group: Option<String>,
    profile: Option<String>,
    partial: Option<Vec<usize>>,
    pm: Option<String>,
    caps_args: &CapArgs,
) -> Result<String, Failure> {
    let (label, profile) = match (group, profile) {
        (Some(g), _) => {
            let spec = parse_group(&g)?;
            let c = caps(caps_args)?;
            let g = build_group(&spec, c.max_order)?;
            (Some(spec.label()), analyze(&g, c)?.profile)
        }
        (None, Some(path)) => (None, GenerationProfile::from_json(&read_file(&path)?)?),
        (None, None) => {
            return Err(fail(
                "invalid_parameter",
                "either --group or --profile is required",
            ))
        }
    };
    let partial_json = match &partial {
        Some(rows) => {
            let pm = match pm {
                Some(s) => parse_rational(&s)?,
                None => p_m(&profile, rows)?,
            };
            let b = partial_bounds(&profile, rows, &pm)?;
            let entry = |x: &Rational| json!({"value": fraction(x), "decimal": decimal::table(x)});
            Some(json!({
                "rows": rows,
                "p_m": fraction(&pm),
                "e1": entry(&b.e1),
                "e2": entry(&b.e2),
                "c_lower": entry(&b.c_lo),
                "c_upper": entry(&b.c_hi),
                "c2_lower": entry(&b.c2_lo),
                "c2_upper": entry(&b.c2_hi),
            }))
        }
        None => None,
    };
    let (c, c2) = invariants(&profile)?;
    let mut out = json!({
        "order": profile.order().to_string(),
        "maximal_classes": profile.num_rows(),
        "chebotarev": fraction(&c),
        "decimal": decimal::table(&c),
        "secondary": fraction(&c2),
        "secondary_decimal": decimal::table(&c2),
    });
    if let Some(l) = label {
        out["group"] = json!(l);
    }
    if let Some(p) = partial_json {
        out["partial"] = p;
    }
    Ok(format!("{out}\n"))
}

fn tables(
    table: u32,
    max_n: Option<usize>,
    max_p: Option<u64>,
    rows: &str,
    caps_args: &CapArgs,
) -> Result<String, Failure> {
    if rows != "solvable" {
        return Err(fail(
            "invalid_parameter",
            format!("unsupported row selection {rows:?}; only \"solvable\""),
        ));
    }
    let opts = TableOptions {
        max_n,
        max_p,
        caps: caps(caps_args)?,
    };
    let result = table_rows(table, &opts)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let key = if table == 2 { "n" } else { "group" };
    let csv_err = |e: csv::Error| fail("io", e.to_string());
    w.write_record([key, "order", "c", "c2", "error"])
        .map_err(csv_err)?;
    for r in &result {
        let err = r.value.as_ref().err().map(|e| e.code).unwrap_or("");
        let (c, c2) = (
            r.c_text().unwrap_or_default(),
            r.c2_text().unwrap_or_default(),
        );
        w.write_record([r.label.as_str(), &r.order, &c, &c2, err])
            .map_err(csv_err)?;
        if let Err(e) = &r.value {
            eprintln!(
                "{}",
                json!({"error": {"code": e.code, "message": e.message, "row": r.label}})
            );
        }
    }
    let bytes = w.into_inner().map_err(|e| fail("io", e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("utf-8"))
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    group: Option<String>,
    trials: u64,
    seed: u64,
    format: Format,
    poisson: bool,
    l: usize,
    b: usize,
    caps_args: &CapArgs,
) -> Result<String, Failure> {
    let cfg = SimConfig { trials, seed, l, b };
    let h = if poisson {
        poisson_model_estimate(&cfg)?
    } else {
        let spec = parse_group(group.as_deref().unwrap_or_default())?;
        let c = caps(caps_args)?;
        let g = build_group(&spec, c.max_order)?;
        let data = analyze(&g, c)?;
        empirical_chebotarev(&g, &data.classes, &data.profile, &cfg)?
    };
    Ok(match format {
        Format::Csv => empirical_distribution_csv(&h),
        Format::Json => {
            let mut v = h.summary_json(seed);
            if poisson {
                v["l"] = json!(l);
                v["b"] = json!(b);
            }
            format!("{v}\n")
        }
    })
}

fn coupon(path: &str) -> Result<String, Failure> {
    let (mu, sys) = parse_instance(&read_file(path)?)?;
    let e: Rational = expected_time(&mu, &sys)?;
    let e2: Rational = second_moment(&mu, &sys)?;
    let out = json!({
        "expected": fraction(&e),
        "expected_decimal": decimal::table(&e),
        "second_moment": fraction(&e2),
        "second_moment_decimal": decimal::table(&e2),
    });
    Ok(format!("{out}\n"))
}

fn exact_pair(c: Rational, c2: Rational) -> Value {
    json!({
        "chebotarev": fraction(&c),
        "decimal": decimal::table(&c),
        "secondary": fraction(&c2),
        "secondary_decimal": decimal::table(&c2),
    })
}

// Decimal endpoints rounded outward, with enough digits to resolve the requested width.
fn interval(v: &CertifiedValue, tol: &Rational) -> Value {
    let ten = Rational::from_integer(10.into());
    let mut digits = 6;
    while pow10(-(digits as i32), &ten) > tol / &ten {
        digits += 1;
    }
    let scale = pow10(digits as i32, &ten);
    let lower = (&v.lower * &scale).floor() / &scale;
    let upper = (&v.upper * &scale).ceil() / &scale;
    json!({
        "lower": decimal::fixed(&lower, digits),
        "upper": decimal::fixed(&upper, digits),
        "width": decimal::significant(&v.width(), 3),
    })
}

fn closed_form(
    cyclic: Option<u64>,
    elementary: Option<Vec<u64>>,
    affine: Option<u64>,
    abelian: Option<Vec<u64>>,
    niven: bool,
    tol: &str,
) -> Result<String, Failure> {
    let out = if let Some(n) = cyclic {
        if n == 0 {
            return Err(fail("invalid_parameter", "n must be at least 1"));
        }
        exact_pair(cheb_cyclic(n), sec_cyclic(n))
    } else if let Some(pk) = elementary {
        if pk.len() != 2 {
            return Err(fail("invalid_parameter", "--elementary takes p,k"));
        }
        let k = u32::try_from(pk[1]).map_err(|_| fail("invalid_parameter", "k is too large"))?;
        exact_pair(cheb_elementary(pk[0], k)?, sec_elementary(pk[0], k)?)
    } else if let Some(q) = affine {
        exact_pair(cheb_affine(q)?, sec_affine(q)?)
    } else {
        let tol = parse_rational(tol)?;
        if tol <= Rational::zero() {
            return Err(fail("invalid_parameter", "--tol must be positive"));
        }
        if let Some(factors) = abelian {
            let shape = AbelianShape::from_factors(&factors)?;
            json!({
                "chebotarev": interval(&cheb_abelian(&shape, &tol)?, &tol),
                "secondary": interval(&sec_abelian(&shape, &tol)?, &tol),
            })
        } else if niven {
            json!({"limit": interval(&niven_limit(&tol)?, &tol)})
        } else {
            return Err(fail(
                "invalid_parameter",
                "one of --cyclic, --elementary, --affine, --abelian, --niven is required",
            ));
        }
    };
    Ok(format!("{out}\n"))
}

fn run(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Compute {
            group,
            profile,
            partial,
            pm,
            caps,
        } => compute(group, profile, partial, pm, &caps),
        Command::Tables {
            table,
            max_n,
            max_p,
            rows,
            caps,
        } => tables(table, max_n, max_p, &rows, &caps),
        Command::Simulate {
            group,
            trials,
            seed,
            format,
            poisson,
            l,
            b,
            caps,
        } => simulate(group, trials, seed, format, poisson, l, b, &caps),
        Command::Coupon { spec } => coupon(&spec),
        Command::ClosedForm {
            cyclic,
            elementary,
            affine,
            abelian,
            niven,
            tol,
        } => closed_form(cyclic, elementary, affine, abelian, niven, &tol),
    }
}

// A closed pipe downstream is not an error worth reporting.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn report(f: Failure) -> ExitCode {
    eprintln!(
        "{}",
        json!({"error": {"code": f.code, "message": f.message}})
    );
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            emit(&e.to_string());
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let head = msg.split("Usage:").next().unwrap_or_default();
            let text = head.split_whitespace().collect::<Vec<_>>().join(" ");
            return report(fail("usage", text.trim_start_matches("error: ").trim()));
        }
    };
    match run(cli) {
        Ok(out) => {
            emit(&out);
            ExitCode::SUCCESS
        }
        Err(f) => report(f),
    }
}
