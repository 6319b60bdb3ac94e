// Decimal rendering of exact rationals with round-half-to-even.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Significant digits printed in the paper's tables.
pub const TABLE_DIGITS: usize = 7;

fn round_half_even(num: &BigInt, den: &BigInt) -> BigInt {
    // den > 0
    let (q, r) = num.div_mod_floor(den);
    let twice = &r * 2;
    if twice > *den || (twice == *den && q.is_odd()) {
        q + 1
    } else {
        q
    }
}

/// Rounds to `frac` digits after the point.
pub fn fixed(x: &BigRational, frac: usize) -> String {
    let scale = BigInt::from(10).pow(frac as u32);
    let n = round_half_even(&(x.numer() * &scale), x.denom());
    render(&n, frac)
}

fn render(n: &BigInt, frac: usize) -> String {
    let neg = n.sign() == Sign::Minus;
    let digits = n.abs().to_string();
    let digits = if digits.len() <= frac {
        format!("{}{}", "0".repeat(frac + 1 - digits.len()), digits)
    } else {
        digits
    };
    let (int, fr) = digits.split_at(digits.len() - frac);
    let mut s = String::new();
    if neg {
        s.push('-');
    }
    s.push_str(int);
    if frac > 0 {
        s.push('.');
        s.push_str(fr);
    }
    s
}

/// Rounds to `sig` significant digits, never dropping integer digits.
pub fn significant(x: &BigRational, sig: usize) -> String {
    if x.is_zero() {
        return fixed(x, sig.saturating_sub(1));
    }
    let a = x.abs();
    // number of integer digits (k such that 10^(k-1) <= a < 10^k), k may be <= 0
    let mut k: i64 = a.to_integer().to_string().len() as i64;
    if a < BigRational::one() {
        k = 0;
        let ten = BigRational::from_integer(BigInt::from(10));
        let mut t = a.clone();
        while t < BigRational::new(BigInt::one(), BigInt::from(10)) {
            t *= &ten;
            k -= 1;
        }
    }
    let frac = (sig as i64 - k).max(0) as usize;
    let s = fixed(x, frac);
    // rounding may carry into a new leading digit
    let int_len = s
        .trim_start_matches('-')
        .split('.')
        .next()
        .unwrap()
        .trim_start_matches('0')
        .len() as i64;
    if k > 0 && int_len > k && frac > 0 {
        fixed(x, frac - 1)
    } else {
        s
    }
}

/// The paper's table precision.
pub fn table(x: &BigRational) -> String {
    significant(x, TABLE_DIGITS)
}

/// Rounds `x` to as many fractional digits as the printed reference has.
pub fn like(x: &BigRational, printed: &str) -> String {
    let frac = printed.split('.').nth(1).map_or(0, str::len);
    fixed(x, frac)
}
