//! Counting experiments over boxes of coefficients, Euler-product constants
//! with certified enclosures, and products of local densities.

use std::io::Write;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{primes_up_to, spf_sieve, Instance};
use crate::cascade::{decide, DecideOptions};
use crate::error::{invalid, Error, Result};
use crate::local::{criterion, density_factor_2, local_density_factor};
use crate::oracle::Point;
use crate::verdict::Status;

pub const GLOBAL_T_CAP: u32 = 10_000;
pub const LOCAL_T_CAP: u32 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    Local,
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub n: u32,
    #[serde(rename = "T")]
    pub t: u32,
    pub mode: SweepMode,
    pub total_pairs: u64,
    pub locally_soluble: u64,
    /// Global mode only.
    pub decided_solvable: Option<u64>,
    pub decided_unsolvable: Option<u64>,
    pub undecided: Option<u64>,
    #[serde(skip)]
    pub elapsed: f64,
}

impl SweepResult {
    /// decided_solvable + decided_unsolvable + undecided = locally_soluble.
    pub fn partition_holds(&self) -> bool {
        match (self.decided_solvable, self.decided_unsolvable, self.undecided) {
            (Some(a), Some(b), Some(c)) => a + b + c == self.locally_soluble,
            (None, None, None) => self.mode == SweepMode::Local,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRow {
    pub b: i64,
    pub c: i64,
    pub local: bool,
    pub verdict: Option<Status>,
    pub witness: Option<Point>,
}

// Odd primes dividing m to odd order, from a smallest-prime-factor table.
fn odd_primes_odd_exp(mut m: usize, spf: &[u32]) -> Vec<i128> {
    let mut out = Vec::new();
    while m > 1 {
        let p = spf[m] as usize;
        let mut e = 0;
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        if p != 2 && e % 2 == 1 {
            out.push(p as i128);
        }
    }
    out
}

fn valuation_unit(mut m: i128, p: i128) -> (u32, i128) {
    let mut k = 0;
    while m % p == 0 {
        m /= p;
        k += 1;
    }
    (k, m)
}

/// Local solubility at 2 and at the odd primes dividing C to odd order.
fn locally_soluble_fast(b: i128, c: i128, n: u32, odd: &[i128]) -> bool {
    let (k, bp) = valuation_unit(b, 2);
    let ell = valuation_unit(c, 2).0;
    if !criterion(2, n, k, ell, bp).0 {
        return false;
    }
    for &p in odd {
        let (k, bp) = valuation_unit(b, p);
        let ell = valuation_unit(c, p).0;
        if !criterion(p, n, k, ell, bp).0 {
            return false;
        }
    }
    true
}

fn check_sweep_args(n: u32, t: u32, mode: SweepMode) -> Result<()> {
    if n < 3 || n % 2 == 0 {
        return invalid(format!("n = {n} must be odd and at least 3"));
    }
    if t < 2 {
        return invalid("T must be at least 2");
    }
    let cap = match mode {
        SweepMode::Local => LOCAL_T_CAP,
        SweepMode::Global => GLOBAL_T_CAP,
    };
    if t > cap {
        return Err(Error::ResourceExceeded(format!("T = {t} exceeds the {mode:?} cap {cap}")));
    }
    Ok(())
}

/// Counts over 0 < |B|, |C| < T. Rows are collected when `rows` is given.
pub fn sweep(n: u32, t: u32, mode: SweepMode, opts: &DecideOptions, rows: Option<&mut Vec<SweepRow>>) -> Result<SweepResult> {
    check_sweep_args(n, t, mode)?;
    let start = Instant::now();
    let spf = spf_sieve(t as usize);
    let tt = t as i128;
    let c_odd: Vec<Vec<i128>> = (0..t as usize).map(|m| odd_primes_odd_exp(m, &spf)).collect();
    let want_rows = rows.is_some();
    let bs: Vec<i128> = (-(tt - 1)..tt).filter(|&b| b != 0).collect();
    let per_row: Vec<Result<(u64, [u64; 3], Vec<SweepRow>)>> = bs
        .par_iter()
        .map(|&b| {
            let mut loc = 0u64;
            let mut counts = [0u64; 3];
            let mut out = Vec::new();
            for c in -(tt - 1)..tt {
                if c == 0 {
                    continue;
                }
                let ok = locally_soluble_fast(b, c, n, &c_odd[c.unsigned_abs() as usize]);
                let mut row = SweepRow { b: b as i64, c: c as i64, local: ok, verdict: None, witness: None };
                if ok {
                    loc += 1;
                    if mode == SweepMode::Global {
                        let v = decide(b, c, n, opts)?;
                        let i = match v.status {
                            Status::Solvable => 0,
                            Status::Unsolvable => 1,
                            Status::Undecided => 2,
                        };
                        counts[i] += 1;
                        row.verdict = Some(v.status);
                        row.witness = v.witness;
                    }
                } else if mode == SweepMode::Global {
                    row.verdict = Some(Status::Unsolvable);
                }
                if want_rows {
                    out.push(row);
                }
            }
            Ok((loc, counts, out))
        })
        .collect();
    let mut res = SweepResult {
        n,
        t,
        mode,
        total_pairs: 0,
        locally_soluble: 0,
        decided_solvable: None,
        decided_unsolvable: None,
        undecided: None,
        elapsed: 0.0,
    };
    let mut counts = [0u64; 3];
    let mut all_rows = Vec::new();
    for r in per_row {
        let (loc, c, rs) = r?;
        res.locally_soluble += loc;
        for i in 0..3 {
            counts[i] += c[i];
        }
        all_rows.extend(rs);
    }
    res.total_pairs = (2 * (t as u64 - 1)).pow(2);
    if mode == SweepMode::Global {
        res.decided_solvable = Some(counts[0]);
        res.decided_unsolvable = Some(counts[1]);
        res.undecided = Some(counts[2]);
    }
    if let Some(r) = rows {
        *r = all_rows;
    }
    res.elapsed = start.elapsed().as_secs_f64();
    Ok(res)
}

/// Writes sweep rows as CSV: B, C, local, verdict, witness.
pub fn write_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut wr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    let io = |e: csv::Error| Error::Internal(format!("csv: {e}"));
    wr.write_record(["B", "C", "local", "verdict", "witness"]).map_err(io)?;
    for r in rows {
        let verdict = match r.verdict {
            Some(Status::Solvable) => "solvable",
            Some(Status::Unsolvable) => "unsolvable",
            Some(Status::Undecided) => "undecided",
            None => "",
        };
        let witness = r.witness.map(|(x, y, z)| format!("{x} {y} {z}")).unwrap_or_default();
        wr.write_record([r.b.to_string(), r.c.to_string(), r.local.to_string(), verdict.to_string(), witness])
            .map_err(io)?;
    }
    wr.flush().map_err(|e| Error::Internal(format!("csv: {e}")))?;
    Ok(())
}

// Fixed-point numbers v / 2^FRAC with directed rounding.
const FRAC: usize = 256;

fn one() -> BigInt {
    BigInt::one() << FRAC
}

fn from_ratio(num: &BigInt, den: &BigInt, up: bool) -> BigInt {
    let s = num << FRAC;
    let (q, r) = (&s / den, &s % den);
    if up && !r.is_zero() {
        q + 1
    } else {
        q
    }
}

fn mul(a: &BigInt, b: &BigInt, up: bool) -> BigInt {
    let p = a * b;
    let q = &p >> FRAC;
    if up && (&q << FRAC) != p {
        q + 1
    } else {
        q
    }
}

fn div(a: &BigInt, b: &BigInt, up: bool) -> BigInt {
    from_ratio(a, b, up)
}

fn sqrt(a: &BigInt, up: bool) -> BigInt {
    let s = a << FRAC;
    let r = num_integer::Roots::sqrt(&s);
    if up && &r * &r != s {
        r + 1
    } else {
        r
    }
}

fn to_rational(a: &BigInt) -> BigRational {
    BigRational::new(a.clone(), one())
}

// pi to 64 decimals, as an enclosing interval
const PI_DIGITS: &str = "31415926535897932384626433832795028841971693993751058209749445923";

fn pi_bounds() -> (BigInt, BigInt) {
    let num: BigInt = PI_DIGITS.parse().unwrap();
    let den = num_traits::pow(BigInt::from(10), PI_DIGITS.len() - 1);
    (from_ratio(&num, &den, false), from_ratio(&(num + 1), &den, true))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstantEnclosure {
    pub name: String,
    #[serde(with = "ratio_str")]
    pub lower: BigRational,
    #[serde(with = "ratio_str")]
    pub upper: BigRational,
    #[serde(rename = "X")]
    pub x: u64,
}

impl ConstantEnclosure {
    pub fn lower_f64(&self) -> f64 {
        ratio_f64(&self.lower)
    }

    pub fn upper_f64(&self) -> f64 {
        ratio_f64(&self.upper)
    }

    pub fn contains(&self, other: &ConstantEnclosure) -> bool {
        self.lower <= other.lower && other.upper <= self.upper
    }

    /// Lower and upper rounded outward to `digits` decimals.
    pub fn decimal(&self, digits: usize) -> (String, String) {
        (round_decimal(&self.lower, digits, false), round_decimal(&self.upper, digits, true))
    }
}

// exact rationals as "num/den"
mod ratio_str {
    use num_rational::BigRational;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}/{}", v.numer(), v.denom()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        String::deserialize(d)?.parse().map_err(|_| D::Error::custom("bad rational"))
    }
}

fn ratio_f64(r: &BigRational) -> f64 {
    let scale = BigInt::from(10).pow(30);
    let v = (r * BigRational::from_integer(scale.clone())).floor().to_integer();
    v.to_string().parse::<f64>().unwrap() / 1e30
}

fn round_decimal(r: &BigRational, digits: usize, up: bool) -> String {
    let scale = BigInt::from(10).pow(digits as u32);
    let s = r * BigRational::from_integer(scale);
    let v = if up { s.ceil() } else { s.floor() }.to_integer();
    let neg = v.is_negative();
    let mut t = v.abs().to_string();
    while t.len() <= digits {
        t.insert(0, '0');
    }
    let (a, b) = t.split_at(t.len() - digits);
    format!("{}{a}.{b}", if neg { "-" } else { "" })
}

// (lower, upper) of prod_{p <= X} (1 - p^-2) and of the tail
// prod_{p > X} (1 - p^-2) = (6 / pi^2) / prod_{p <= X} (1 - p^-2).
fn zeta2_tail(primes: &[u64]) -> (BigInt, BigInt) {
    let (mut lo, mut hi) = (one(), one());
    for &p in primes {
        let p2 = BigInt::from(p) * p;
        let num = &p2 - 1;
        lo = mul(&lo, &from_ratio(&num, &p2, false), false);
        hi = mul(&hi, &from_ratio(&num, &p2, true), true);
    }
    let (pi_lo, pi_hi) = pi_bounds();
    let six = BigInt::from(6) << FRAC;
    let inv_z2_lo = div(&six, &mul(&pi_hi, &pi_hi, true), false);
    let inv_z2_hi = div(&six, &mul(&pi_lo, &pi_lo, false), true);
    let tail_lo = div(&inv_z2_lo, &hi, false);
    let tail_hi = div(&inv_z2_hi, &lo, true).min(one());
    (tail_lo, tail_hi)
}

fn check_x(x: u64) -> Result<Vec<u64>> {
    if x < 100 {
        return invalid(format!("truncation X = {x} must be at least 100"));
    }
    Ok(primes_up_to(x))
}

/// kappa_1 = pi^(-1/2) prod_p (1 + 1/2p)(1 - 1/p)^(1/2). Every factor is
/// below 1, so truncation at X gives an upper bound; the squared factor is
/// 1 - 3/(4p^2) - 1/(4p^3) >= 1 - p^-2, so the tail is at least the square
/// root of prod_{p > X} (1 - p^-2).
pub fn kappa1(x: u64) -> Result<ConstantEnclosure> {
    let primes = check_x(x)?;
    let (mut lo, mut hi) = (one(), one());
    for &p in &primes {
        let p = BigInt::from(p);
        // (2p + 1)^2 (p - 1) / (4 p^3)
        let q: BigInt = 2 * &p + 1;
        let num = &q * &q * (&p - 1);
        let den = 4 * p.pow(3);
        lo = mul(&lo, &from_ratio(&num, &den, false), false);
        hi = mul(&hi, &from_ratio(&num, &den, true), true);
    }
    let (tail_lo, _) = zeta2_tail(&primes);
    let (pi_lo, pi_hi) = pi_bounds();
    let inv_sqrt_pi_lo = div(&one(), &sqrt(&pi_hi, true), false);
    let inv_sqrt_pi_hi = div(&one(), &sqrt(&pi_lo, false), true);
    let lower = mul(&inv_sqrt_pi_lo, &sqrt(&mul(&lo, &tail_lo, false), false), false);
    let upper = mul(&inv_sqrt_pi_hi, &sqrt(&hi, true), true);
    Ok(ConstantEnclosure { name: "kappa1".into(), lower: to_rational(&lower), upper: to_rational(&upper), x })
}

/// Euler factor of kappa_2 at p: 1 - p^-2 - (1/2)p^-2(1 - 1/p)(2p/(2p+1)),
/// which simplifies to 1 - 3/(p(2p+1)).
pub fn kappa2_factor(p: u64) -> BigRational {
    let p = BigInt::from(p);
    BigRational::one() - BigRational::new(BigInt::from(3), &p * (2 * &p + 1))
}

/// kappa_2 = prod_p (1 - 3/(p(2p+1))). Factors are below 1, and
/// 1 - 3/(p(2p+1)) >= (1 - p^-2)^(3/2) for every p, which bounds the tail.
pub fn kappa2(x: u64) -> Result<ConstantEnclosure> {
    let primes = check_x(x)?;
    let (mut lo, mut hi) = (one(), one());
    for &p in &primes {
        let f = kappa2_factor(p);
        lo = mul(&lo, &from_ratio(f.numer(), f.denom(), false), false);
        hi = mul(&hi, &from_ratio(f.numer(), f.denom(), true), true);
    }
    let (tail_lo, _) = zeta2_tail(&primes);
    let t15 = mul(&tail_lo, &sqrt(&tail_lo, false), false);
    let lower = mul(&lo, &t15, false);
    Ok(ConstantEnclosure { name: "kappa2".into(), lower: to_rational(&lower), upper: to_rational(&hi), x })
}

/// prod_{odd p <= P} (local density factor at p) times the factor at 2.
pub fn density_product(n: u32, p_max: u64) -> Result<BigRational> {
    let mut acc = density_factor_2(n)?;
    for p in primes_up_to(p_max) {
        if p == 2 {
            continue;
        }
        acc *= local_density_factor(p as i128, n)?;
    }
    Ok(acc)
}

/// Locally soluble check used by sweeps, exposed for recounts.
pub fn locally_soluble(b: i128, c: i128, n: u32) -> Result<bool> {
    let inst = Instance::new(b, c, n)?;
    Ok(crate::local::everywhere_locally_solvable(&inst)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa2_factor_at_two() {
        let want = BigRational::one()
            - BigRational::new(1.into(), 4.into())
            - BigRational::new(1.into(), 8.into()) * BigRational::new(1.into(), 2.into()) * BigRational::new(4.into(), 5.into());
        assert_eq!(kappa2_factor(2), want);
    }

    #[test]
    fn enclosures_nest() {
        let a = kappa1(1000).unwrap();
        let b = kappa1(5000).unwrap();
        assert!(a.lower <= a.upper);
        assert!(a.contains(&b));
        assert!(kappa1(100).unwrap().upper_f64() - kappa1(100).unwrap().lower_f64() < 1e-3);
        let a = kappa2(1000).unwrap();
        let b = kappa2(5000).unwrap();
        assert!(a.contains(&b));
        assert!(kappa1(50).is_err());
    }

    #[test]
    fn kappa_float_oracle() {
        // independent f64 truncated products at X = 5000
        let ps = primes_up_to(5000);
        let k1: f64 = ps.iter().map(|&p| {
            let p = p as f64;
            (1.0 + 0.5 / p) * (1.0 - 1.0 / p).sqrt()
        }).product::<f64>() / std::f64::consts::PI.sqrt();
        let k2: f64 = ps.iter().map(|&p| {
            let p = p as f64;
            1.0 - p.powi(-2) - 0.5 * p.powi(-2) * (1.0 - 1.0 / p) * (2.0 * p / (2.0 * p + 1.0))
        }).product();
        let e1 = kappa1(5000).unwrap();
        let e2 = kappa2(5000).unwrap();
        assert!((e1.upper_f64() - k1).abs() < 1e-12);
        assert!((e2.upper_f64() - k2).abs() < 1e-12);
    }

    #[test]
    fn density_product_decreasing() {
        let a = density_product(3, 3).unwrap();
        assert_eq!(a, density_factor_2(3).unwrap() * BigRational::new(2597.into(), 2880.into()));
        let b = density_product(3, 50).unwrap();
        assert!(b < a);
    }

    #[test]
    fn local_sweep_matches_slow_path() {
        let mut rows = Vec::new();
        let r = sweep(3, 30, SweepMode::Local, &DecideOptions::default(), Some(&mut rows)).unwrap();
        assert!(r.partition_holds());
        assert_eq!(rows.len() as u64, r.total_pairs);
        for row in &rows {
            assert_eq!(row.local, locally_soluble(row.b as i128, row.c as i128, 3).unwrap(), "{row:?}");
        }
    }

    #[test]
    fn sweep_caps() {
        assert!(sweep(3, GLOBAL_T_CAP + 1, SweepMode::Global, &DecideOptions::default(), None).is_err());
        assert!(sweep(4, 10, SweepMode::Local, &DecideOptions::default(), None).is_err());
    }

    #[test]
    fn decimal_rounding() {
        let e = ConstantEnclosure {
            name: "x".into(),
            lower: BigRational::new(1.into(), 3.into()),
            upper: BigRational::new(2.into(), 3.into()),
            x: 100,
        };
        assert_eq!(e.decimal(3), ("0.333".to_string(), "0.667".to_string()));
    }
}
