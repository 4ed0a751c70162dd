//! Brute-force ground truth: bounded search for primitive solutions and
//! exhaustive p-adic lifting.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{exact_sqrt, gcd, kronecker, split_power, valuation, Instance};
use crate::error::{invalid, Error, Result};

pub type Point = (i128, i128, i128);

/// Conditions on u = x + f sqrt(-B0) y and on y, z used to filter hits.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointFilter {
    pub f: i128,
    pub b0: i128,
    /// Primes p with u not in p O_K.
    pub star0: Vec<i128>,
    /// x and f y both odd (only meaningful for B0 = 3 mod 4).
    pub tilde0_2: bool,
    pub y_coprime: Vec<i128>,
    pub z_coprime: Vec<i128>,
}

/// u = x + f sqrt(-B0) y lies in p O_K.
pub fn u_in_p_ok(x: i128, y: i128, f: i128, b0: i128, p: i128) -> bool {
    let fy = f * y;
    if p == 2 && b0.rem_euclid(4) == 3 {
        (x - fy).rem_euclid(2) == 0
    } else {
        x % p == 0 && fy % p == 0
    }
}

impl PointFilter {
    pub fn is_empty(&self) -> bool {
        self.star0.is_empty() && !self.tilde0_2 && self.y_coprime.is_empty() && self.z_coprime.is_empty()
    }

    pub fn accepts(&self, (x, y, z): Point) -> bool {
        if self.star0.iter().any(|&p| u_in_p_ok(x, y, self.f, self.b0, p)) {
            return false;
        }
        if self.tilde0_2 && !(x % 2 != 0 && (self.f * y) % 2 != 0) {
            return false;
        }
        if self.y_coprime.iter().any(|&p| y % p == 0) {
            return false;
        }
        !self.z_coprime.iter().any(|&p| z % p == 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBound {
    pub z_max: i128,
    pub y_max: i128,
    /// Optional cap on |x|.
    pub x_max: Option<i128>,
    pub filter: Option<PointFilter>,
}

impl SearchBound {
    pub fn new(z_max: i128, y_max: i128) -> Result<Self> {
        if z_max <= 0 || y_max <= 0 {
            return invalid("search bounds must be positive");
        }
        Ok(SearchBound { z_max, y_max, x_max: None, filter: None })
    }

    pub fn with_filter(mut self, f: PointFilter) -> Self {
        self.filter = Some(f);
        self
    }

    pub fn with_x_max(mut self, x: i128) -> Self {
        self.x_max = Some(x);
        self
    }
}

impl Default for SearchBound {
    fn default() -> Self {
        SearchBound { z_max: 200, y_max: 100_000, x_max: None, filter: None }
    }
}

/// Checks x^2 + B y^2 = C z^n and gcd(x, y, z) = 1 exactly.
pub fn verify_point(inst: &Instance, (x, y, z): Point) -> bool {
    if gcd(gcd(x, y), z) != 1 {
        return false;
    }
    let lhs = BigInt::from(x) * x + BigInt::from(inst.b) * y * y;
    let rhs = BigInt::from(inst.c) * num_traits::pow(BigInt::from(z), inst.n as usize);
    lhs == rhs
}

fn z_order(z_max: i128) -> Vec<i128> {
    let mut v = vec![0];
    for a in 1..=z_max {
        v.push(a);
        v.push(-a);
    }
    v
}

fn hits_for_z(inst: &Instance, bound: &SearchBound, z: i128, first_only: bool) -> Result<Vec<Point>> {
    let mut out = Vec::new();
    let r = match z.checked_pow(inst.n).and_then(|t| t.checked_mul(inst.c)) {
        Some(r) => r,
        None => return Err(Error::OutOfRange(format!("C z^n overflows at z = {z}"))),
    };
    let y_top = if inst.b > 0 {
        if r < 0 {
            return Ok(out);
        }
        std::cmp::min(bound.y_max, crate::arith::isqrt((r / inst.b) as u128) as i128)
    } else {
        bound.y_max
    };
    for y in 0..=y_top {
        let by2 = match inst.b.checked_mul(y * y) {
            Some(v) => v,
            None => return Err(Error::OutOfRange(format!("B y^2 overflows at y = {y}"))),
        };
        let w = match r.checked_sub(by2) {
            Some(w) => w,
            None => return Err(Error::OutOfRange("C z^n - B y^2 overflows".into())),
        };
        let Some(x) = exact_sqrt(w) else { continue };
        if bound.x_max.map_or(false, |m| x > m) {
            continue;
        }
        if gcd(gcd(x, y), z) != 1 {
            continue;
        }
        for p in [(x, y, z), (-x, y, z)] {
            if p.0 < 0 && x == 0 {
                continue;
            }
            if bound.filter.as_ref().map_or(true, |f| f.accepts(p)) {
                out.push(p);
                if first_only {
                    return Ok(out);
                }
            }
        }
    }
    Ok(out)
}

/// All primitive solutions with |z| <= z_max, 0 <= y <= y_max, ordered by
/// |z| (positive first), then y, then x >= 0 before -x.
pub fn search_primitive(inst: &Instance, bound: &SearchBound) -> Result<Vec<Point>> {
    let zs = z_order(bound.z_max);
    let per: Vec<Result<Vec<Point>>> = zs.par_iter().map(|&z| hits_for_z(inst, bound, z, false)).collect();
    let mut out = Vec::new();
    for r in per {
        out.extend(r?);
    }
    Ok(out)
}

/// First primitive solution in the order of [`search_primitive`].
pub fn search_first(inst: &Instance, bound: &SearchBound) -> Result<Option<Point>> {
    let zs = z_order(bound.z_max);
    for chunk in zs.chunks(32) {
        let per: Vec<Result<Vec<Point>>> = chunk.par_iter().map(|&z| hits_for_z(inst, bound, z, true)).collect();
        for r in per {
            if let Some(p) = r?.into_iter().next() {
                return Ok(Some(p));
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LiftOutcome {
    Solvable,
    Unsolvable,
    /// The search tree was still alive at the depth limit.
    Inconclusive,
}

pub fn default_lift_depth(inst: &Instance, p: i128) -> u32 {
    2 * (valuation(inst.b, p) + valuation(inst.c, p)) + 4 * inst.n + 8
}

// Valuation and unit part (mod 8p) of w = C z^n - B y^2, None when w = 0.
fn eval_w(inst: &Instance, y: i128, z: i128, p: i128) -> Option<(u32, i128)> {
    let small = z
        .checked_pow(inst.n)
        .and_then(|t| t.checked_mul(inst.c))
        .and_then(|r| inst.b.checked_mul(y).and_then(|by| by.checked_mul(y)).and_then(|by2| r.checked_sub(by2)));
    if let Some(w) = small {
        if w == 0 {
            return None;
        }
        let (v, u) = split_power(w, p);
        return Some((v, u.rem_euclid(8 * p)));
    }
    let w = BigInt::from(inst.c) * num_traits::pow(BigInt::from(z), inst.n as usize) - BigInt::from(inst.b) * y * y;
    if w.is_zero() {
        return None;
    }
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut u = w;
    loop {
        let (q, r) = u.div_rem(&pb);
        if !r.is_zero() {
            break;
        }
        u = q;
        v += 1;
    }
    let m = BigInt::from(8 * p);
    Some((v, u.mod_floor(&m).to_i128().unwrap()))
}

fn unit_is_square(u: i128, p: i128) -> bool {
    if p == 2 {
        u.rem_euclid(8) == 1
    } else {
        kronecker(u, p) == 1
    }
}

fn val_or_inf(m: i128, p: i128) -> u32 {
    if m == 0 {
        u32::MAX
    } else {
        valuation(m, p)
    }
}

/// Decides whether x^2 + B y^2 = C z^n has a primitive Z_p point by lifting
/// residue classes of (y, z) and testing whether C z^n - B y^2 is a p-adic
/// square.
pub fn local_solvable_exhaustive(inst: &Instance, p: i128, depth: u32) -> LiftOutcome {
    let vb2 = valuation(2 * inst.b, p);
    let vnc = valuation(inst.n as i128 * inst.c, p);
    let mut level: Vec<(i128, i128)> = Vec::new();
    for y in 0..p {
        for z in 0..p {
            if y != 0 || z != 0 {
                level.push((y, z));
            }
        }
    }
    let mut pm = p;
    for m in 1..=depth {
        let mut next = Vec::new();
        for &(y, z) in &level {
            let Some((v, u)) = eval_w(inst, y, z, p) else {
                // x = 0 gives a point
                return LiftOutcome::Solvable;
            };
            if v % 2 == 0 && unit_is_square(u, p) {
                return LiftOutcome::Solvable;
            }
            // Hensel for g(y, z) = C z^n - B y^2 at this representative
            let gy = vb2.saturating_add(val_or_inf(y, p));
            let gz = vnc.saturating_add(val_or_inf(z, p).saturating_mul(inst.n - 1));
            let vg = gy.min(gz);
            if vg != u32::MAX && v > 2 * vg {
                return LiftOutcome::Solvable;
            }
            let determined = if v % 2 == 1 {
                v < m
            } else if p == 2 {
                v + 3 <= m
            } else {
                v < m
            };
            if determined {
                continue;
            }
            for i in 0..p {
                for j in 0..p {
                    next.push((y + i * pm, z + j * pm));
                }
            }
        }
        if next.is_empty() {
            return LiftOutcome::Unsolvable;
        }
        level = next;
        pm = match pm.checked_mul(p) {
            Some(v) => v,
            None => return LiftOutcome::Inconclusive,
        };
    }
    LiftOutcome::Inconclusive
}
