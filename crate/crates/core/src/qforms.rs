//! Binary quadratic forms, class groups of quadratic orders, and the orders
//! attached to x^2 + B y^2 = C z^n.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{ext_gcd, factorize, gcd, isqrt, kronecker, sqrt_mod_prime};
use crate::error::{invalid, Error, Result};

/// Default cap on |D| for class group construction.
pub const DEFAULT_MAX_DISC: i128 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Discriminant(i128);

impl Discriminant {
    pub fn new(d: i128) -> Result<Self> {
        if d == 0 {
            return invalid("discriminant must be nonzero");
        }
        if d.rem_euclid(4) > 1 {
            return invalid(format!("discriminant {d} is not 0 or 1 mod 4"));
        }
        if d > 0 {
            let s = isqrt(d as u128) as i128;
            if s * s == d {
                return invalid(format!("discriminant {d} is a perfect square"));
            }
        }
        Ok(Discriminant(d))
    }

    pub fn value(self) -> i128 {
        self.0
    }

    /// Discriminant of the maximal order containing this one, and the
    /// conductor.
    pub fn fundamental(self) -> Result<(i128, i128)> {
        let fac = factorize(self.0)?;
        let mut d = self.0;
        let mut f = 1;
        for &(p, e) in &fac.factors {
            for _ in 0..e / 2 {
                let q = d / (p * p);
                if d % (p * p) == 0 && q.rem_euclid(4) <= 1 {
                    d = q;
                    f *= p;
                }
            }
        }
        Ok((d, f))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QForm {
    pub a: i128,
    pub b: i128,
    pub c: i128,
}

impl fmt::Display for QForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

impl QForm {
    pub fn new(a: i128, b: i128, c: i128) -> Self {
        QForm { a, b, c }
    }

    pub fn disc(&self) -> i128 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn is_primitive(&self) -> bool {
        gcd(gcd(self.a, self.b), self.c) == 1
    }

    pub fn inverse(&self) -> QForm {
        QForm::new(self.a, -self.b, self.c)
    }

    pub fn principal(d: Discriminant) -> QForm {
        let d = d.value();
        if d.rem_euclid(4) == 0 {
            QForm::new(1, 0, -d / 4)
        } else {
            QForm::new(1, 1, (1 - d) / 4)
        }
    }

    fn with_b(a: i128, b: i128, d: i128) -> QForm {
        QForm::new(a, b, (b * b - d) / (4 * a))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplittingType {
    Split,
    Inert,
    Ramified,
}

pub fn splitting(d: Discriminant, p: i128) -> SplittingType {
    match kronecker(d.value(), p) {
        1 => SplittingType::Split,
        -1 => SplittingType::Inert,
        _ => SplittingType::Ramified,
    }
}

fn check_form(f: &QForm, d: Discriminant) -> Result<()> {
    if f.disc() != d.value() {
        return invalid(format!("form {f} has discriminant {} not {}", f.disc(), d.value()));
    }
    if !f.is_primitive() {
        return invalid(format!("form {f} is not primitive"));
    }
    if d.value() < 0 && f.a <= 0 {
        return invalid(format!("form {f} is not positive definite"));
    }
    Ok(())
}

fn reduce_definite(f: QForm) -> QForm {
    let d = f.disc();
    let (mut a, mut b) = (f.a, f.b);
    let mut c;
    loop {
        let m = 2 * a;
        let mut r = b.rem_euclid(m);
        if r > a {
            r -= m;
        }
        b = r;
        c = (b * b - d) / (4 * a);
        if a > c {
            a = c;
            b = -b;
            continue;
        }
        if (a == c || b == -a) && b < 0 {
            b = -b;
        }
        return QForm::new(a, b, c);
    }
}

fn is_reduced_indefinite(f: &QForm, s: i128, d: i128) -> bool {
    let a2 = 2 * f.a.abs();
    f.b > 0 && f.b <= s && (a2 + f.b) * (a2 + f.b) > d && (a2 - f.b <= 0 || (a2 - f.b) * (a2 - f.b) < d)
}

// One step of the cycle map; returns the image and the t of the transforming
// matrix [[0, -1], [1, t]].
fn rho(f: &QForm, s: i128, d: i128) -> (QForm, i128) {
    let c = f.c;
    let m = 2 * c.abs();
    let nb = if c * c > d {
        let mut r = (-f.b).rem_euclid(m);
        if r > c.abs() {
            r -= m;
        }
        r
    } else {
        s - (s + f.b).rem_euclid(m)
    };
    let t = (nb + f.b) / (2 * c);
    (QForm::with_b(c, nb, d), t)
}

fn reduce_indefinite(f: QForm) -> QForm {
    let d = f.disc();
    let s = isqrt(d as u128) as i128;
    let mut g = f;
    while !is_reduced_indefinite(&g, s, d) {
        g = rho(&g, s, d).0;
    }
    g
}

fn cycle_of(f: QForm) -> Vec<QForm> {
    let d = f.disc();
    let s = isqrt(d as u128) as i128;
    let mut out = vec![f];
    let mut g = rho(&f, s, d).0;
    while g != f {
        out.push(g);
        g = rho(&g, s, d).0;
    }
    out
}

/// Reduced representative: the unique reduced form for D < 0, and the least
/// element of the cycle of reduced forms for D > 0.
pub fn reduce(form: QForm) -> Result<QForm> {
    let d = Discriminant::new(form.disc())?;
    check_form(&form, d)?;
    Ok(reduce_unchecked(form))
}

fn reduce_unchecked(form: QForm) -> QForm {
    if form.disc() < 0 {
        reduce_definite(form)
    } else {
        let r = reduce_indefinite(form);
        *cycle_of(r).iter().min().unwrap()
    }
}

// Dirichlet composition, unreduced.
fn compose_raw(x: &QForm, y: &QForm, d: i128) -> QForm {
    let s = (x.b + y.b) / 2;
    let (d1, x1, y1) = ext_gcd(x.a, y.a);
    let (g, x2, w) = ext_gcd(d1, s);
    let (u, v) = (x1 * x2, y1 * x2);
    let a = x.a * y.a / (g * g);
    let num = u * x.a * y.b + v * y.a * x.b + w * ((x.b * y.b + d) / 2);
    let m = 2 * a.abs();
    let mut b = (num / g).rem_euclid(m);
    if b > a.abs() {
        b -= m;
    }
    debug_assert_eq!((b * b - d) % (4 * a), 0);
    QForm::with_b(a, b, d)
}

pub fn compose(x: &QForm, y: &QForm) -> Result<QForm> {
    let d = Discriminant::new(x.disc())?;
    if y.disc() != d.value() {
        return invalid(format!("discriminants differ: {} vs {}", x.disc(), y.disc()));
    }
    check_form(x, d)?;
    check_form(y, d)?;
    Ok(reduce_unchecked(compose_raw(x, y, d.value())))
}

/// A prime form (p, b, c) above a split or ramified prime p not dividing the
/// conductor.
pub fn prime_form(d: Discriminant, p: i128) -> Result<QForm> {
    let dv = d.value();
    if splitting(d, p) == SplittingType::Inert {
        return invalid(format!("{p} is inert for discriminant {dv}"));
    }
    if dv % (p * p) == 0 && (dv / (p * p)).rem_euclid(4) <= 1 {
        return invalid(format!("{p} divides the conductor of discriminant {dv}"));
    }
    let b = if p == 2 {
        match dv.rem_euclid(8) {
            1 => 1,
            0 => 0,
            _ => 2,
        }
    } else if dv % p == 0 {
        if dv % 2 == 0 {
            0
        } else {
            p
        }
    } else {
        let r = sqrt_mod_prime(dv, p)
            .ok_or_else(|| Error::Internal(format!("no square root of {dv} mod {p}")))?;
        if (r - dv).rem_euclid(2) == 0 {
            r
        } else {
            p - r
        }
    };
    Ok(QForm::with_b(p, b, dv))
}

/// Finite abelian group of narrow form classes of one discriminant.
#[derive(Debug, Clone)]
pub struct ClassGroup {
    pub disc: i128,
    /// Canonical representative per class; index 0 is the principal class.
    pub classes: Vec<QForm>,
    pub elementary_divisors: Vec<i64>,
    pub generators: Vec<QForm>,
    /// Coordinates of each class with respect to `generators`.
    pub dlog: Vec<Vec<i64>>,
    index: HashMap<QForm, usize>,
    reduced_count: usize,
}

impl ClassGroup {
    pub fn order(&self) -> usize {
        self.classes.len()
    }

    /// Number of reduced forms (equals the class number when D < 0).
    pub fn reduced_form_count(&self) -> usize {
        self.reduced_count
    }

    pub fn reduced_forms(&self) -> Vec<QForm> {
        let mut v: Vec<QForm> = self.index.keys().copied().collect();
        v.sort();
        v
    }

    pub fn class_of(&self, f: &QForm) -> Result<usize> {
        if f.disc() != self.disc {
            return invalid(format!("form {f} is not of discriminant {}", self.disc));
        }
        let r = if self.disc < 0 {
            reduce_definite(*f)
        } else {
            reduce_indefinite(*f)
        };
        self.index
            .get(&r)
            .copied()
            .ok_or_else(|| Error::Internal(format!("reduced form {r} missing from table")))
    }

    pub fn mul(&self, i: usize, j: usize) -> usize {
        let f = compose_raw(&self.classes[i], &self.classes[j], self.disc);
        self.class_of(&f).expect("composite lies in the group")
    }

    pub fn inverse_class(&self, i: usize) -> usize {
        self.class_of(&self.classes[i].inverse()).expect("inverse lies in the group")
    }

    pub fn dlog_of(&self, f: &QForm) -> Result<Vec<i64>> {
        Ok(self.dlog[self.class_of(f)?].clone())
    }

    /// Sum of two coordinate vectors, reduced mod the divisors.
    pub fn add(&self, x: &[i64], y: &[i64]) -> Vec<i64> {
        self.combine(x, y, 1)
    }

    pub fn combine(&self, x: &[i64], y: &[i64], sy: i64) -> Vec<i64> {
        x.iter()
            .zip(y)
            .zip(&self.elementary_divisors)
            .map(|((a, b), d)| (a + sy * b).rem_euclid(*d))
            .collect()
    }

    pub fn scale(&self, x: &[i64], k: i64) -> Vec<i64> {
        x.iter()
            .zip(&self.elementary_divisors)
            .map(|(a, d)| ((*a as i128 * k as i128).rem_euclid(*d as i128)) as i64)
            .collect()
    }

    pub fn zero(&self) -> Vec<i64> {
        vec![0; self.elementary_divisors.len()]
    }

    /// Membership of a coordinate vector in n * Cl.
    pub fn vector_in_nth_powers(&self, v: &[i64], n: u32) -> bool {
        v.iter()
            .zip(&self.elementary_divisors)
            .all(|(x, d)| x.rem_euclid(gcd(n as i128, *d as i128) as i64) == 0)
    }

    pub fn is_nth_power_class(&self, f: &QForm, n: u32) -> Result<bool> {
        Ok(self.vector_in_nth_powers(&self.dlog_of(f)?, n))
    }

    /// Coordinates projected to Cl / n Cl.
    pub fn project_mod_n(&self, v: &[i64], n: u32) -> Vec<i64> {
        v.iter()
            .zip(&self.elementary_divisors)
            .map(|(x, d)| x.rem_euclid(gcd(n as i128, *d as i128) as i64))
            .collect()
    }

    fn build(disc: i128) -> Result<ClassGroup> {
        let (reps, index, reduced_count) = if disc < 0 {
            enumerate_definite(disc)
        } else {
            enumerate_indefinite(disc)
        };
        let mut g = ClassGroup {
            disc,
            classes: reps,
            elementary_divisors: Vec::new(),
            generators: Vec::new(),
            dlog: Vec::new(),
            index,
            reduced_count,
        };
        g.compute_structure()?;
        Ok(g)
    }

    fn compute_structure(&mut self) -> Result<()> {
        let h = self.classes.len();
        // coordinates w.r.t. the incrementally chosen generators
        let mut coords: Vec<Option<Vec<i64>>> = vec![None; h];
        coords[0] = Some(Vec::new());
        let mut members = vec![0usize];
        let mut gens: Vec<usize> = Vec::new();
        let mut rels: Vec<(i64, Vec<i64>)> = Vec::new();
        for cand in 0..h {
            if coords[cand].is_some() {
                continue;
            }
            let k = gens.len();
            let mut x = cand;
            let mut e: i64 = 1;
            while coords[x].is_none() {
                x = self.mul(x, cand);
                e += 1;
            }
            rels.push((e, coords[x].clone().unwrap()));
            for c in coords.iter_mut().flatten() {
                c.push(0);
            }
            let base = members.clone();
            let mut power = 0usize;
            for i in 1..e {
                power = if i == 1 { cand } else { self.mul(power, cand) };
                for &m in &base {
                    let y = self.mul(m, power);
                    let mut v = coords[m].clone().unwrap();
                    v[k] = i;
                    if coords[y].is_some() {
                        return Err(Error::Internal("subgroup enumeration revisited a class".into()));
                    }
                    coords[y] = Some(v);
                    members.push(y);
                }
            }
            gens.push(cand);
        }
        let k = gens.len();
        let mut rel = vec![vec![0i128; k]; k];
        for (j, (e, c)) in rels.iter().enumerate() {
            rel[j][j] = *e as i128;
            for (i, ci) in c.iter().enumerate() {
                rel[j][i] -= *ci as i128;
            }
        }
        let (diag, v, vinv) = smith(rel);
        let keep: Vec<usize> = (0..k).filter(|&i| diag[i] != 1).collect();
        self.elementary_divisors = keep.iter().map(|&i| diag[i] as i64).collect();
        self.generators = keep
            .iter()
            .map(|&i| {
                let mut acc = 0usize;
                for (j, &g) in gens.iter().enumerate() {
                    let ex = vinv[i][j].rem_euclid(diag[i]);
                    for _ in 0..ex {
                        acc = self.mul(acc, g);
                    }
                }
                self.classes[acc]
            })
            .collect();
        self.dlog = coords
            .into_iter()
            .map(|c| {
                let c = c.expect("every class reached");
                keep.iter()
                    .map(|&i| {
                        let mut s: i128 = 0;
                        for (j, cj) in c.iter().enumerate() {
                            s += *cj as i128 * v[j][i];
                        }
                        s.rem_euclid(diag[i]) as i64
                    })
                    .collect()
            })
            .collect();
        Ok(())
    }
}

fn enumerate_definite(d: i128) -> (Vec<QForm>, HashMap<QForm, usize>, usize) {
    let amax = isqrt((-d / 3) as u128) as i128;
    let mut forms = Vec::new();
    for a in 1..=amax {
        let mut b = -a + 1;
        if (b - d).rem_euclid(2) != 0 {
            b += 1;
        }
        while b <= a {
            let num = b * b - d;
            if num % (4 * a) == 0 {
                let c = num / (4 * a);
                let ok = c >= a && !(b < 0 && a == c);
                if ok && gcd(gcd(a, b), c) == 1 {
                    forms.push(QForm::new(a, b, c));
                }
            }
            b += 2;
        }
    }
    // principal form is (1, b, c), the first one enumerated
    let index: HashMap<QForm, usize> = forms.iter().enumerate().map(|(i, f)| (*f, i)).collect();
    let n = forms.len();
    (forms, index, n)
}

fn enumerate_indefinite(d: i128) -> (Vec<QForm>, HashMap<QForm, usize>, usize) {
    let s = isqrt(d as u128) as i128;
    let mut reduced = Vec::new();
    let mut b = if d % 2 == 0 { 2 } else { 1 };
    while b <= s {
        let m = (d - b * b) / 4;
        let mut q = 1;
        while q * q <= m {
            if m % q == 0 {
                for a0 in [q, m / q] {
                    for a in [a0, -a0] {
                        let f = QForm::new(a, b, -m / a);
                        if is_reduced_indefinite(&f, s, d) && f.is_primitive() && !reduced.contains(&f) {
                            reduced.push(f);
                        }
                    }
                    if q * q == m {
                        break;
                    }
                }
            }
            q += 1;
        }
        b += 2;
    }
    reduced.sort();
    reduced.dedup();
    let mut index: HashMap<QForm, usize> = HashMap::new();
    let mut reps = Vec::new();
    let principal = reduce_indefinite(QForm::principal(Discriminant(d)));
    let mut order: Vec<QForm> = vec![principal];
    order.extend(reduced.iter().copied().filter(|f| *f != principal));
    for f in order {
        if index.contains_key(&f) {
            continue;
        }
        let cyc = cycle_of(f);
        let id = reps.len();
        reps.push(*cyc.iter().min().unwrap());
        for g in cyc {
            index.insert(g, id);
        }
    }
    let n = index.len();
    (reps, index, n)
}

// Smith normal form of a square integer matrix. Returns the diagonal and the
// column transform V with its inverse.
#[allow(clippy::type_complexity)]
fn smith(mut m: Vec<Vec<i128>>) -> (Vec<i128>, Vec<Vec<i128>>, Vec<Vec<i128>>) {
    let k = m.len();
    let ident = |k: usize| {
        (0..k)
            .map(|i| (0..k).map(|j| if i == j { 1 } else { 0 }).collect::<Vec<i128>>())
            .collect::<Vec<_>>()
    };
    let mut v = ident(k);
    let mut vinv = ident(k);
    for t in 0..k {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..k {
                for j in t..k {
                    if m[i][j] != 0 && best.map_or(true, |(bi, bj)| m[i][j].abs() < m[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else { break };
            m.swap(t, bi);
            if bj != t {
                for row in m.iter_mut() {
                    row.swap(t, bj);
                }
                for row in v.iter_mut() {
                    row.swap(t, bj);
                }
                vinv.swap(t, bj);
            }
            let piv = m[t][t];
            let mut clean = true;
            for i in t + 1..k {
                let q = m[i][t].div_euclid(piv);
                if q != 0 {
                    for j in t..k {
                        m[i][j] -= q * m[t][j];
                    }
                }
                if m[i][t] != 0 {
                    clean = false;
                }
            }
            for j in t + 1..k {
                let q = m[t][j].div_euclid(piv);
                if q != 0 {
                    for row in m.iter_mut() {
                        row[j] -= q * row[t];
                    }
                    for row in v.iter_mut() {
                        row[j] -= q * row[t];
                    }
                    for c in 0..k {
                        vinv[t][c] += q * vinv[j][c];
                    }
                }
                if m[t][j] != 0 {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            let bad = (t + 1..k).find(|&i| (t + 1..k).any(|j| m[i][j] % piv != 0));
            match bad {
                Some(i) => {
                    for j in t..k {
                        m[t][j] += m[i][j];
                    }
                }
                None => break,
            }
        }
    }
    let diag = (0..k).map(|i| m[i][i].abs()).collect();
    (diag, v, vinv)
}

fn max_disc() -> i128 {
    std::env::var("GFE_MAX_DISC")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_MAX_DISC)
}

fn cache_capacity() -> usize {
    std::env::var("GFE_CLASSGROUP_CACHE")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(4096)
}

type Cache = RwLock<HashMap<i128, Arc<ClassGroup>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Class group of discriminant D, memoized process-wide.
pub fn class_group(d: Discriminant) -> Result<Arc<ClassGroup>> {
    let dv = d.value();
    if dv.abs() > max_disc() {
        return Err(Error::ResourceExceeded(format!(
            "|D| = {} exceeds the class group limit {}",
            dv.abs(),
            max_disc()
        )));
    }
    if let Some(g) = cache().read().unwrap().get(&dv) {
        return Ok(g.clone());
    }
    let built = Arc::new(ClassGroup::build(dv)?);
    let mut w = cache().write().unwrap();
    if let Some(g) = w.get(&dv) {
        return Ok(g.clone());
    }
    if w.len() >= cache_capacity() {
        w.clear();
    }
    w.insert(dv, built.clone());
    Ok(built)
}

/// Which of the four order cases applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrderCase {
    /// B0 = 1, 2 mod 4: Z[f sqrt(-B0)].
    #[serde(rename = "b0-1-2-mod-4")]
    B0OneTwoMod4,
    /// B0 = 3 mod 8, C odd: Z[f sqrt(-B0)], conductor 2f.
    #[serde(rename = "b0-3-mod-8-c-odd")]
    B0ThreeMod8COdd,
    /// B0 = 3 mod 8, C even: Z[f (1 + sqrt(-B0))/2].
    #[serde(rename = "b0-3-mod-8-c-even")]
    B0ThreeMod8CEven,
    /// B0 = 7 mod 8: Z[f (1 + sqrt(-B0))/2].
    #[serde(rename = "b0-7-mod-8")]
    B0SevenMod8,
    /// B0 = 3 mod 8, 4 || C: Z[f sqrt(-B0)], conductor 2f, used for the
    /// odd-x odd-y points.
    #[serde(rename = "b0-3-mod-8-tilde")]
    B0ThreeMod8Tilde,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadOrder {
    pub b0: i128,
    pub f: i128,
    pub case: OrderCase,
    /// Conductor relative to the maximal order.
    pub conductor: i128,
    pub field_disc: i128,
    pub disc: Discriminant,
}

impl QuadOrder {
    pub fn ring(&self) -> String {
        match self.case {
            OrderCase::B0OneTwoMod4 | OrderCase::B0ThreeMod8COdd | OrderCase::B0ThreeMod8Tilde => {
                format!("Z[{}*sqrt({})]", self.f, -self.b0)
            }
            _ => format!("Z[{}*(1+sqrt({}))/2]", self.f, -self.b0),
        }
    }
}

pub fn field_discriminant(b0: i128) -> i128 {
    if (-b0).rem_euclid(4) == 1 {
        -b0
    } else {
        -4 * b0
    }
}

pub fn order_for(b0: i128, f: i128, c: i128) -> Result<QuadOrder> {
    if b0 == -1 {
        return invalid("B0 = -1 (so -B is a square) has no quadratic order");
    }
    if f <= 0 || c == 0 || b0 == 0 {
        return invalid("order_for needs f > 0, C != 0, B0 != 0");
    }
    if gcd(f, c) != 1 {
        return invalid(format!("gcd(f, C) = gcd({f}, {c}) != 1"));
    }
    let r8 = b0.rem_euclid(8);
    let (case, s) = match r8 {
        1 | 2 | 5 | 6 => (OrderCase::B0OneTwoMod4, 1),
        3 if c % 2 != 0 => (OrderCase::B0ThreeMod8COdd, 2),
        3 => (OrderCase::B0ThreeMod8CEven, 1),
        7 => (OrderCase::B0SevenMod8, 1),
        _ => return invalid(format!("B0 = {b0} is not squarefree")),
    };
    let field_disc = field_discriminant(b0);
    let conductor = f * s;
    let disc = Discriminant::new(conductor * conductor * field_disc)?;
    Ok(QuadOrder { b0, f, case, conductor, field_disc, disc })
}

/// Number of roots of unity in the imaginary order of discriminant D.
fn roots_of_unity(d: i128) -> i128 {
    match d {
        -3 => 6,
        -4 => 4,
        _ => 2,
    }
}

/// (t, u) of the fundamental totally positive unit (t + u sqrt(D))/2, read
/// off the automorph accumulated along the principal cycle.
pub fn fundamental_positive_unit(d: Discriminant) -> Result<(BigInt, BigInt)> {
    let dv = d.value();
    if dv < 0 {
        return invalid("real discriminant required");
    }
    let s = isqrt(dv as u128) as i128;
    let f0 = reduce_indefinite(QForm::principal(d));
    let mut m = [[BigInt::from(1), BigInt::zero()], [BigInt::zero(), BigInt::from(1)]];
    let mut g = f0;
    loop {
        let (next, t) = rho(&g, s, dv);
        let t = BigInt::from(t);
        // m <- m * [[0, -1], [1, t]]
        let r0 = [m[0][1].clone(), -&m[0][0] + &t * &m[0][1]];
        let r1 = [m[1][1].clone(), -&m[1][0] + &t * &m[1][1]];
        m = [r0, r1];
        g = next;
        if g == f0 {
            break;
        }
    }
    let trace = &m[0][0] + &m[1][1];
    let u = (&m[1][0] / BigInt::from(f0.a)).abs();
    let t = trace.abs();
    if &t * &t - BigInt::from(dv) * &u * &u != BigInt::from(4) {
        return Err(Error::Internal(format!("automorph of D={dv} is not a unit")));
    }
    Ok((t, u))
}

/// Index [O1^x_+ : O2^x_+] for O2 inside O1 (totally positive units when real).
fn unit_index(d1: i128, d2: i128, rel: i128) -> Result<i128> {
    if d1 < 0 {
        return Ok(roots_of_unity(d1) / roots_of_unity(d2));
    }
    let (t1, u1) = fundamental_positive_unit(Discriminant::new(d1)?)?;
    let (t2, u2) = fundamental_positive_unit(Discriminant::new(d2)?)?;
    let target_u = u2 * BigInt::from(rel);
    let dd = BigInt::from(d1);
    let two = BigInt::from(2);
    let (mut t, mut u) = (t1.clone(), u1.clone());
    for k in 1..=1_000_000i128 {
        if t == t2 && u == target_u {
            return Ok(k);
        }
        if u > target_u {
            break;
        }
        let nt = (&t * &t1 + &dd * &u * &u1) / &two;
        let nu = (&t * &u1 + &u * &t1) / &two;
        t = nt;
        u = nu;
    }
    Err(Error::Internal(format!("unit of D={d2} is not a power of the unit of D={d1}")))
}

/// Checks h(O')/h(O) * [O^x : O'^x] = r * prod_{p | r} (1 - (D_O/p)/p) for the
/// orders of conductors cond1 | cond2 in the field of discriminant k_disc.
pub fn class_number_ratio_check(k_disc: Discriminant, cond1: i128, cond2: i128) -> Result<bool> {
    if cond1 <= 0 || cond2 % cond1 != 0 {
        return invalid("need 0 < cond1 | cond2");
    }
    let d1 = cond1 * cond1 * k_disc.value();
    let d2 = cond2 * cond2 * k_disc.value();
    let g1 = class_group(Discriminant::new(d1)?)?;
    let g2 = class_group(Discriminant::new(d2)?)?;
    let rel = cond2 / cond1;
    let idx = unit_index(d1, d2, rel)?;
    let lhs = Ratio::new(g2.order() as i128 * idx, g1.order() as i128);
    let mut rhs = Ratio::from_integer(rel);
    if rel > 1 {
        for p in factorize(rel)?.primes() {
            rhs *= Ratio::new(p - kronecker(d1, p) as i128, p);
        }
    }
    Ok(lhs == rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc(d: i128) -> Discriminant {
        Discriminant::new(d).unwrap()
    }

    #[test]
    fn discriminant_validation() {
        assert!(Discriminant::new(-332).is_ok());
        assert!(Discriminant::new(-6).is_err());
        assert!(Discriminant::new(16).is_err());
        assert!(Discriminant::new(0).is_err());
    }

    #[test]
    fn order_examples() {
        let o = order_for(83, 1, 23).unwrap();
        assert_eq!(o.disc.value(), -332);
        assert_eq!(o.ring(), "Z[1*sqrt(-83)]");
        let o = order_for(7, 1, 1).unwrap();
        assert_eq!(o.disc.value(), -7);
        assert_eq!(o.case, OrderCase::B0SevenMod8);
        let o = order_for(3, 1, 3).unwrap();
        assert_eq!(o.disc.value(), -12);
        assert_eq!(o.conductor, 2);
        assert_eq!(order_for(83, 9, 23).unwrap().disc.value(), -26892);
        assert!(order_for(-1, 1, 3).is_err());
        assert!(order_for(83, 3, 69).is_err());
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(reduce(QForm::new(1, 0, 83)).unwrap(), QForm::new(1, 0, 83));
        let g = class_group(disc(-332)).unwrap();
        let r = reduce(QForm::new(3, 2, 28)).unwrap();
        assert!(g.reduced_forms().contains(&r));
        assert!(r.b.abs() <= r.a && r.a <= r.c);
        // (2, 2, 42) has discriminant -332 but content 2
        assert!(reduce(QForm::new(2, 2, 42)).is_err());
        assert_eq!(reduce(QForm::new(1, 0, 83)).unwrap(), reduce(QForm::new(83, 0, 1)).unwrap());
        assert!(reduce(QForm::new(2, 0, 2)).is_err());
    }

    #[test]
    fn known_class_groups() {
        for (d, divs) in [
            (-332, vec![9]),
            (-26892, vec![3, 18]),
            (-116, vec![6]),
            (-4 * 339, vec![3, 6]),
        ] {
            let g = class_group(disc(d)).unwrap();
            assert_eq!(g.elementary_divisors, divs, "D={d}");
        }
    }

    #[test]
    fn prime_form_examples() {
        assert_eq!(prime_form(disc(-116), 3).unwrap(), QForm::new(3, 2, 10));
        assert_eq!(prime_form(disc(-332), 23).unwrap().a, 23);
        let f = prime_form(disc(-12), 3).unwrap();
        assert_eq!((f.a, f.disc()), (3, -12));
        assert!(prime_form(disc(-12), 5).is_err());
        assert!(prime_form(disc(-26892), 3).is_err());
        assert_eq!(splitting(disc(-116), 3), SplittingType::Split);
        assert_eq!(splitting(disc(-332), 83), SplittingType::Ramified);
        assert_eq!(splitting(disc(-12), 5), SplittingType::Inert);
    }

    #[test]
    fn nth_power_examples() {
        let g = class_group(disc(-332)).unwrap();
        assert!(g.is_nth_power_class(&QForm::new(1, 0, 83), 3).unwrap());
        let order3: Vec<&QForm> = g
            .classes
            .iter()
            .filter(|f| g.scale(&g.dlog_of(f).unwrap(), 3) == g.zero() && **f != g.classes[0])
            .collect();
        assert_eq!(order3.len(), 2);
        for f in order3 {
            assert!(g.is_nth_power_class(f, 3).unwrap());
        }
        let g = class_group(disc(-116)).unwrap();
        let gen = g.generators[0];
        assert!(!g.is_nth_power_class(&gen, 3).unwrap());
    }

    #[test]
    fn order_nine_generator_cycles() {
        let g = class_group(disc(-332)).unwrap();
        let x = g.generators[0];
        let mut acc = x;
        for _ in 1..9 {
            acc = compose(&acc, &x).unwrap();
        }
        assert_eq!(acc, QForm::principal(disc(-332)));
    }

    #[test]
    fn ratio_examples() {
        assert!(class_number_ratio_check(disc(-83), 1, 2).unwrap());
        assert!(class_number_ratio_check(disc(-83), 2, 18).unwrap());
        assert!(class_number_ratio_check(disc(-83), 1, 1).unwrap());
        assert_eq!(class_group(disc(-83 * 4)).unwrap().order(), 9);
        assert_eq!(class_group(disc(-83 * 4 * 81)).unwrap().order(), 54);
        assert!(class_number_ratio_check(disc(-4), 1, 3).unwrap());
        assert!(class_number_ratio_check(disc(-3), 1, 2).unwrap());
        assert!(class_number_ratio_check(disc(5), 1, 2).unwrap());
        assert!(class_number_ratio_check(disc(12), 1, 5).unwrap());
    }

    #[test]
    fn positive_unit_is_minimal() {
        for d in [5i128, 8, 12, 13, 21, 28, 41, 60, 61, 85, 136, 229] {
            let (t, u) = fundamental_positive_unit(disc(d)).unwrap();
            // smallest u >= 1 with D u^2 + 4 a square
            let mut uu: i128 = 1;
            let tt = loop {
                let v = d * uu * uu + 4;
                let r = isqrt(v as u128) as i128;
                if r * r == v {
                    break r;
                }
                uu += 1;
            };
            assert_eq!((t, u), (BigInt::from(tt), BigInt::from(uu)), "D={d}");
        }
    }

    #[test]
    fn real_class_numbers() {
        // narrow class numbers
        for (d, h) in [(5i128, 1usize), (8, 1), (12, 2), (13, 1), (17, 1), (24, 2), (40, 2), (60, 4), (136, 4)] {
            assert_eq!(class_group(disc(d)).unwrap().order(), h, "D={d}");
        }
    }

    #[test]
    fn structure_invariants() {
        for d in [-23i128, -47, -71, -104, -3299, -4 * 5 * 7 * 11 * 13, 5 * 13 * 17 * 4, 229, 3 * 5 * 7 * 11 * 4] {
            let g = class_group(disc(d)).unwrap();
            let prod: i64 = g.elementary_divisors.iter().product();
            assert_eq!(prod as usize, g.order());
            for w in g.elementary_divisors.windows(2) {
                assert_eq!(w[1] % w[0], 0);
            }
            for (i, gen) in g.generators.iter().enumerate() {
                let c = g.class_of(gen).unwrap();
                let mut acc = 0;
                let mut ord = 0;
                loop {
                    acc = g.mul(acc, c);
                    ord += 1;
                    if acc == 0 {
                        break;
                    }
                }
                assert_eq!(ord, g.elementary_divisors[i]);
            }
            for i in 0..g.order() {
                for j in 0..g.order().min(12) {
                    let k = g.mul(i, j);
                    assert_eq!(g.dlog[k], g.add(&g.dlog[i], &g.dlog[j]));
                }
            }
            if d < 0 {
                assert_eq!(g.reduced_form_count(), g.order());
            }
        }
    }
}
