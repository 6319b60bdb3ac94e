// Small integer helpers shared by the group constructors and the closed forms.

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Prime factorization as (prime, exponent) pairs in increasing order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Squarefree divisors d > 1 of n with their Möbius values.
pub fn squarefree_divisors(n: u64) -> Vec<(u64, i32)> {
    let primes: Vec<u64> = factorize(n).into_iter().map(|(p, _)| p).collect();
    let mut out = Vec::new();
    for mask in 1u32..(1 << primes.len()) {
        let mut d = 1;
        let mut sign = 1;
        for (i, p) in primes.iter().enumerate() {
            if mask >> i & 1 == 1 {
                d *= p;
                sign = -sign;
            }
        }
        out.push((d, sign));
    }
    out.sort_unstable();
    out
}

pub fn mobius(n: u64) -> i32 {
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

pub fn divisor_count(n: u64) -> u64 {
    factorize(n).iter().map(|&(_, e)| e as u64 + 1).product()
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

/// Multiplicative inverse modulo a prime.
pub fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// Smallest generator of the multiplicative group of F_p.
pub fn primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let qs: Vec<u64> = factorize(p - 1).into_iter().map(|(q, _)| q).collect();
    (2..p)
        .find(|&g| qs.iter().all(|&q| pow_mod(g, (p - 1) / q, p) != 1))
        .expect("prime modulus has a primitive root")
}

/// Splits q into (p, f) with q = p^f, if q is a prime power.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    match factorize(q).as_slice() {
        [(p, f)] => Some((*p, *f)),
        _ => None,
    }
}
