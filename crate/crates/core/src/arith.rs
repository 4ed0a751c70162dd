//! Exact integer helpers: factorization, valuations, Kronecker symbols.

use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest magnitude accepted by [`factorize`]. The Miller-Rabin base set
/// below is deterministic up to 3.317e24.
pub const FACTOR_LIMIT: u128 = 3_317_044_064_679_887_385_961_981;

const TRIAL_LIMIT: u64 = 1_000_000;

/// One generalized Fermat equation x^2 + B y^2 = C z^n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Instance {
    pub b: i128,
    pub c: i128,
    pub n: u32,
}

impl Instance {
    pub fn new(b: i128, c: i128, n: u32) -> Result<Self> {
        if b == 0 {
            return invalid("B must be nonzero");
        }
        if c == 0 {
            return invalid("C must be nonzero");
        }
        if n < 3 || n % 2 == 0 {
            return invalid(format!("n must be odd and at least 3 (got {n})"));
        }
        Ok(Instance { b, c, n })
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x^2 + {} y^2 = {} z^{}", self.b, self.c, self.n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactoredInt {
    pub sign: i8,
    /// (prime, exponent), primes strictly increasing.
    pub factors: Vec<(i128, u32)>,
}

impl FactoredInt {
    pub fn value(&self) -> i128 {
        let mut v: i128 = self.sign as i128;
        for &(p, e) in &self.factors {
            v *= p.pow(e);
        }
        v
    }

    pub fn primes(&self) -> impl Iterator<Item = i128> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn exponent(&self, p: i128) -> u32 {
        self.factors
            .iter()
            .find(|&&(q, _)| q == p)
            .map(|&(_, e)| e)
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquarefreeSplit {
    pub f: i128,
    pub b0: i128,
}

pub fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a as i128
}

/// Returns (g, x, y) with a*x + b*y = g = gcd(a, b) >= 0.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// v_p(m); m must be nonzero.
pub fn valuation(m: i128, p: i128) -> u32 {
    debug_assert!(m != 0 && p > 1);
    let mut m = m;
    let mut v = 0;
    while m % p == 0 {
        m /= p;
        v += 1;
    }
    v
}

/// Splits m = p^v * rest with p not dividing rest.
pub fn split_power(m: i128, p: i128) -> (u32, i128) {
    let mut m = m;
    let mut v = 0;
    while m % p == 0 {
        m /= p;
        v += 1;
    }
    (v, m)
}

pub fn checked_pow(base: i128, e: u32) -> Result<i128> {
    base.checked_pow(e)
        .ok_or_else(|| Error::OutOfRange(format!("{base}^{e} overflows 128 bits")))
}

pub fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    // float estimate is within a few units; fix it up exactly
    while x.checked_mul(x).map_or(true, |s| s > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).map_or(false, |s| s <= n) {
        x += 1;
    }
    x
}

/// Exact square root of a nonnegative perfect square, None otherwise.
pub fn exact_sqrt(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    let u = n as u128;
    if !QR64[(u % 64) as usize] || !QR63[(u % 63) as usize] || !QR65[(u % 65) as usize] {
        return None;
    }
    let r = isqrt(u);
    if r * r == u {
        Some(r as i128)
    } else {
        None
    }
}

const fn residue_table<const M: usize>() -> [bool; M] {
    let mut t = [false; M];
    let mut i = 0;
    while i < M {
        t[(i * i) % M] = true;
        i += 1;
    }
    t
}

static QR64: [bool; 64] = residue_table::<64>();
static QR63: [bool; 63] = residue_table::<63>();
static QR65: [bool; 65] = residue_table::<65>();

/// Kronecker symbol (a/m).
pub fn kronecker(a: i128, m: i128) -> i32 {
    if m == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut res = 1;
    let mut m = m;
    if m < 0 {
        m = -m;
        if a < 0 {
            res = -res;
        }
    }
    let v = m.trailing_zeros();
    m >>= v;
    if v > 0 {
        if a % 2 == 0 {
            return 0;
        }
        let r = a.rem_euclid(8);
        if v % 2 == 1 && (r == 3 || r == 5) {
            res = -res;
        }
    }
    if m == 1 {
        return res;
    }
    res * jacobi(a.rem_euclid(m) as u128, m as u128)
}

/// Jacobi symbol for odd positive n.
fn jacobi(a: u128, n: u128) -> i32 {
    let (mut a, mut n) = (a % n, n);
    let mut res = 1;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz % 2 == 1 && (n % 8 == 3 || n % 8 == 5) {
            res = -res;
        }
        if a % 4 == 3 && n % 4 == 3 {
            res = -res;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        res
    } else {
        0
    }
}

/// (n-1)/n, the genus attached to exponent n.
pub fn genus_info(n: u32) -> Result<Ratio<i64>> {
    if n < 3 || n % 2 == 0 {
        return invalid("n must be odd and at least 3");
    }
    Ok(Ratio::new(n as i64 - 1, n as i64))
}

fn mul_mod(a: u128, b: u128, m: u128) -> u128 {
    if m <= u64::MAX as u128 {
        return (a * b) % m;
    }
    // double-and-add; only reached for cofactors beyond 64 bits
    let (mut a, mut b) = (a % m, b % m);
    let mut r: u128 = 0;
    while b > 0 {
        if b & 1 == 1 {
            r = add_mod(r, a, m);
        }
        a = add_mod(a, a, m);
        b >>= 1;
    }
    r
}

fn add_mod(a: u128, b: u128, m: u128) -> u128 {
    let s = a.wrapping_add(b);
    if s < a || s >= m {
        s.wrapping_sub(m)
    } else {
        s
    }
}

fn pow_mod(mut b: u128, mut e: u128, m: u128) -> u128 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

const MR_BASES: [u128; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// Deterministic primality test for n < FACTOR_LIMIT.
pub fn is_prime(n: u128) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'outer: for &a in &MR_BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

fn ugcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

// Brent's variant of Pollard rho; n is odd, composite and not a prime power
// of a small prime.
fn rho(n: u128) -> u128 {
    let mut c: u128 = 1;
    loop {
        let f = |x: u128| add_mod(mul_mod(x, x, n), c, n);
        let (mut y, mut r, mut q) = (2u128, 1u64, 1u128);
        let mut g = 1u128;
        let mut x = y;
        let mut ys = y;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..std::cmp::min(128, r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = ugcd(q, n);
                k += 128;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = ugcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

fn split_large(n: u128, out: &mut Vec<u128>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = rho(n);
    split_large(d, out);
    split_large(n / d, out);
}

/// Prime factorization of a nonzero integer with |m| < FACTOR_LIMIT.
pub fn factorize(m: i128) -> Result<FactoredInt> {
    if m == 0 {
        return invalid("cannot factor zero");
    }
    let mut n = m.unsigned_abs();
    if n >= FACTOR_LIMIT {
        return Err(Error::OutOfRange(format!(
            "|{m}| exceeds the factorization limit {FACTOR_LIMIT}"
        )));
    }
    let sign = if m < 0 { -1 } else { 1 };
    let mut factors: Vec<(i128, u32)> = Vec::new();
    let push = |p: u128, e: u32, f: &mut Vec<(i128, u32)>| {
        if e > 0 {
            f.push((p as i128, e));
        }
    };
    let tz = n.trailing_zeros();
    n >>= tz;
    push(2, tz, &mut factors);
    let mut p: u64 = 3;
    while p < TRIAL_LIMIT && (p as u128) * (p as u128) <= n {
        let pp = p as u128;
        if n % pp == 0 {
            let mut e = 0;
            while n % pp == 0 {
                n /= pp;
                e += 1;
            }
            push(pp, e, &mut factors);
        }
        p += 2;
    }
    if n > 1 {
        if (p as u128) * (p as u128) > n || is_prime(n) {
            push(n, 1, &mut factors);
        } else {
            let mut big = Vec::new();
            split_large(n, &mut big);
            big.sort_unstable();
            let mut i = 0;
            while i < big.len() {
                let mut j = i;
                while j < big.len() && big[j] == big[i] {
                    j += 1;
                }
                push(big[i], (j - i) as u32, &mut factors);
                i = j;
            }
        }
    }
    Ok(FactoredInt { sign, factors })
}

pub fn squarefree_split(b: i128) -> Result<SquarefreeSplit> {
    if b == 0 {
        return invalid("B must be nonzero");
    }
    let fac = factorize(b)?;
    let mut f: i128 = 1;
    let mut b0: i128 = fac.sign as i128;
    for &(p, e) in &fac.factors {
        f *= p.pow(e / 2);
        if e % 2 == 1 {
            b0 *= p;
        }
    }
    Ok(SquarefreeSplit { f, b0 })
}

/// Square root of a modulo an odd prime p (a must be a residue).
pub fn sqrt_mod_prime(a: i128, p: i128) -> Option<i128> {
    let a = a.rem_euclid(p) as u128;
    let pu = p as u128;
    if a == 0 {
        return Some(0);
    }
    if pu == 2 {
        return Some(a as i128);
    }
    if pow_mod(a, (pu - 1) / 2, pu) != 1 {
        return None;
    }
    if pu % 4 == 3 {
        return Some(pow_mod(a, (pu + 1) / 4, pu) as i128);
    }
    // Tonelli-Shanks
    let s = (pu - 1).trailing_zeros();
    let q = (pu - 1) >> s;
    let mut z = 2u128;
    while pow_mod(z, (pu - 1) / 2, pu) != pu - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, pu);
    let mut t = pow_mod(a, q, pu);
    let mut r = pow_mod(a, (q + 1) / 2, pu);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mul_mod(tt, tt, pu);
            i += 1;
        }
        let b = pow_mod(c, 1u128 << (m - i - 1), pu);
        m = i;
        c = mul_mod(b, b, pu);
        t = mul_mod(t, c, pu);
        r = mul_mod(r, b, pu);
    }
    Some(r as i128)
}

/// Smallest-prime-factor sieve for 0..=limit.
pub fn spf_sieve(limit: usize) -> Vec<u32> {
    let mut spf = vec![0u32; limit + 1];
    for i in 2..=limit {
        if spf[i] == 0 {
            let mut j = i;
            while j <= limit {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    spf
}

pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut comp = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !comp[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                comp[j] = true;
                j += i;
            }
        }
    }
    out
}
