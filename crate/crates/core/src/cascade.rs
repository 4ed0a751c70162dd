//! The full decision procedure: strip common squares, branch over the exact
//! power of each prime dividing u = x + f sqrt(-B0) y, transform every branch
//! to a base case, and decide the base cases with the class-group criteria.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{exact_sqrt, factorize, gcd, squarefree_split, valuation, Instance};
use crate::error::{invalid, Error, Result};
use crate::global::{decide_star0, decide_star0_tilde, tilde_m_allowed, GlobalCertificate};
use crate::local::everywhere_locally_solvable;
use crate::oracle::{search_first, verify_point, Point, PointFilter, SearchBound};
use crate::verdict::{CascadeNode, LemmaId, NodeReport, StarCondition, StarKind, Status, TrailStep, Verdict};

/// Cap on the number of leaves of one cascade.
pub const MAX_LEAVES: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecideOptions {
    pub bound: SearchBound,
    /// Search for an explicit point when the criterion already says Solvable.
    pub want_witness: bool,
    /// Record every leaf in the verdict.
    pub trace: bool,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions { bound: SearchBound::default(), want_witness: true, trace: false }
    }
}

fn ipow(p: i128, e: u32) -> Result<i128> {
    p.checked_pow(e).ok_or_else(|| Error::OutOfRange(format!("{p}^{e} overflows")))
}

fn mul(a: i128, b: i128) -> Result<i128> {
    a.checked_mul(b).ok_or_else(|| Error::OutOfRange(format!("{a} * {b} overflows")))
}

fn ceil_div(a: u32, b: u32) -> u32 {
    a.div_ceil(b)
}

/// Removes (p^2, p^2) from (B, C) while p^2 divides both.
pub fn strip_common_squares(b: i128, c: i128) -> Result<(i128, i128, Vec<TrailStep>)> {
    if b == 0 || c == 0 {
        return invalid("B and C must be nonzero");
    }
    let g = gcd(b, c);
    let (mut b, mut c) = (b, c);
    let mut steps = Vec::new();
    for (p, _) in factorize(g)?.factors {
        let p2 = p * p;
        while b % p2 == 0 && c % p2 == 0 {
            steps.push(TrailStep { lemma: LemmaId::SquareStrip, p, t: 1, source: (b, c), x_mul: p, y_mul: 1, z_mul: 1 });
            b /= p2;
            c /= p2;
        }
    }
    Ok((b, c, steps))
}

/// Some p | n with v_p(f) > v_p(C)/2 and v_p(f) - v_p(C)/2 at least n (v_p(C)
/// even) or (n + 1)/2 (v_p(C) odd). Such instances can leave a p | n
/// constraint on y that the criteria cannot discharge.
pub fn in_excluded_set(b: i128, c: i128, n: u32) -> Result<Option<i128>> {
    if b == 0 || c == 0 {
        return invalid("B and C must be nonzero");
    }
    let f = squarefree_split(b)?.f;
    for (p, _) in factorize(n as i128)?.factors {
        let twice = 2 * valuation(f, p) as i64 - valuation(c, p) as i64;
        if twice <= 0 {
            continue;
        }
        let need = if valuation(c, p) % 2 == 0 { 2 * n as i64 } else { n as i64 + 1 };
        if twice >= need {
            return Ok(Some(p));
        }
    }
    Ok(None)
}

/// One admissible level at p: `Star` t means p^t exactly divides u; at p = 2
/// and t >= 1 the set splits into the tilde part (`Tildestar`, level t - 1)
/// and its complement (`Star`, level t).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Level {
    pub t: u32,
    pub kind: StarKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Regime {
    /// p | f only.
    F,
    /// p | C only.
    Y,
    /// p | f and p || C.
    Fc,
}

fn regime(b: i128, c: i128, p: i128) -> Result<Option<(Regime, u32, u32)>> {
    let r = squarefree_split(b)?.f;
    let r = valuation(r, p);
    let v = valuation(c, p);
    Ok(match (r, v) {
        (0, 0) => None,
        (_, 0) => Some((Regime::F, r, v)),
        (0, _) => Some((Regime::Y, r, v)),
        (_, 1) => Some((Regime::Fc, r, v)),
        _ => return invalid(format!("{p}^2 divides gcd(B, C); strip common squares first")),
    })
}

/// The levels at p not ruled out by the cascade lemmas.
pub fn enumerate_star_levels(b: i128, c: i128, n: u32, p: i128) -> Result<Vec<Level>> {
    let Some((reg, r, v)) = regime(b, c, p)? else {
        return invalid(format!("{p} divides neither f nor C"));
    };
    let star = |t| Level { t, kind: StarKind::Star };
    let tilde = |t| Level { t, kind: StarKind::Tildestar };
    let mut out = Vec::new();
    match reg {
        Regime::F => {
            out.push(star(0));
            for t in 1..=r {
                if t % n == 0 || t == r {
                    out.push(star(t));
                }
            }
            if p == 2 {
                out.push(tilde(r));
            }
        }
        Regime::Y => {
            out.push(star(0));
            for t in 1..=v / 2 {
                if p == 2 {
                    out.push(tilde(t - 1));
                }
                out.push(star(t));
            }
            if p == 2 {
                out.push(tilde(v / 2));
            }
        }
        Regime::Fc => {
            for t in 1..=r {
                if (2 * t - 1) % n == 0 || t == r {
                    out.push(star(t));
                }
            }
            if p == 2 {
                out.push(tilde(r));
            }
        }
    }
    out.sort();
    Ok(out)
}

fn push_star(node: &mut CascadeNode, cond: StarCondition) {
    node.star_conditions.push(cond);
    node.star_conditions.sort();
}

fn add_y(node: &mut CascadeNode, p: i128) {
    if !node.y_coprime.contains(&p) {
        node.y_coprime.push(p);
        node.y_coprime.sort();
    }
}

fn add_z(node: &mut CascadeNode, p: i128) -> Result<()> {
    if node.z_coprime % p != 0 {
        node.z_coprime = mul(node.z_coprime, p)?;
    }
    Ok(())
}

/// C * p^e for e possibly negative.
fn scale_c(c: i128, p: i128, e: i64) -> Result<i128> {
    if e >= 0 {
        mul(c, ipow(p, e as u32)?)
    } else {
        let d = ipow(p, (-e) as u32)?;
        if c % d != 0 {
            return Err(Error::Internal(format!("{d} does not divide {c}")));
        }
        Ok(c / d)
    }
}

/// Transforms `node` along level `lvl` at p. None when the level set is
/// empty by the lemmas.
pub fn apply_cascade_step(node: &CascadeNode, n: u32, p: i128, lvl: Level) -> Result<Option<CascadeNode>> {
    let (b, c) = (node.bp, node.cp);
    let levels = enumerate_star_levels(b, c, n, p)?;
    if !levels.contains(&lvl) {
        return invalid(format!("level {:?} {} at {p} is not admissible for ({b}, {c})", lvl.kind, lvl.t));
    }
    let (reg, r, v) = regime(b, c, p)?.expect("checked by enumerate_star_levels");
    let mut out = node.clone();
    let cond = if lvl.kind == StarKind::Tildestar { StarCondition::tilde0() } else { StarCondition::star0(p) };
    push_star(&mut out, cond);
    let t = lvl.t;
    let step = |lemma, x_mul, y_mul, z_mul| TrailStep { lemma, p, t, source: (b, c), x_mul, y_mul, z_mul };
    let pp = |e: u32| ipow(p, e);
    let lemma_f = if p == 2 { LemmaId::CascadeF2 } else { LemmaId::CascadeF };
    let lemma_fc = if p == 2 { LemmaId::Fc2 } else { LemmaId::FcOdd };
    match (reg, lvl.kind) {
        (_, StarKind::Star) if t == 0 => {
            if reg == Regime::Fc {
                return Ok(None);
            }
        }
        (Regime::F, StarKind::Star) => {
            // p^t | x, p^(ceil(2t/n)) | z
            let k = ceil_div(2 * t, n);
            out.bp = b / pp(2 * t)?;
            if t % n == 0 {
                add_y(&mut out, p);
            } else {
                out.cp = scale_c(c, p, (k * n) as i64 - 2 * t as i64)?;
            }
            out.trail.push(step(lemma_f, pp(t)?, 1, pp(k)?));
        }
        (Regime::F, StarKind::Tildestar) => {
            let k = ceil_div(2 * r, n);
            out.bp = b / pp(2 * r)?;
            out.cp = scale_c(c, p, (k * n) as i64 - 2 * r as i64)?;
            out.trail.push(step(lemma_f, pp(r)?, 1, pp(k)?));
        }
        (Regime::Y, StarKind::Star) => {
            out.cp = c / pp(2 * t)?;
            add_z(&mut out, p)?;
            let lemma = if p == 2 { LemmaId::CascadeY2 } else { LemmaId::CascadeY };
            out.trail.push(step(lemma, pp(t)?, pp(t)?, 1));
        }
        (Regime::Y, StarKind::Tildestar) => {
            out.cp = c / pp(2 * t)?;
            if t > 0 {
                add_z(&mut out, p)?;
            }
            out.trail.push(step(LemmaId::CascadeY2, pp(t)?, pp(t)?, 1));
        }
        (Regime::Fc, StarKind::Star) => {
            out.bp = b / pp(2 * t)?;
            if (2 * t - 1) % n == 0 {
                out.cp = c / p;
                add_y(&mut out, p);
                out.trail.push(step(lemma_fc, pp(t)?, 1, pp((2 * t - 1) / n)?));
            } else {
                let k = ceil_div(2 * t - 1, n);
                out.cp = scale_c(c, p, (k * n) as i64 - 2 * t as i64)?;
                out.trail.push(step(lemma_fc, pp(t)?, 1, pp(k)?));
            }
        }
        (Regime::Fc, StarKind::Tildestar) => {
            let k = ceil_div(2 * r - 1, n);
            out.bp = b / pp(2 * r)?;
            out.cp = scale_c(c, p, (k * n) as i64 - 2 * r as i64)?;
            out.trail.push(step(lemma_fc, pp(r)?, 1, pp(k)?));
        }
    }
    let _ = v;
    Ok(Some(out))
}

/// Primes of f C: those of gcd(f, C) first, then the rest ascending.
fn cascade_primes(b: i128, c: i128) -> Result<Vec<i128>> {
    let f = squarefree_split(b)?.f;
    let g = gcd(f, c);
    let mut first: Vec<i128> = factorize(g)?.primes().collect();
    let mut rest: Vec<i128> = factorize(f)?.primes().chain(factorize(c)?.primes()).filter(|p| g % p != 0).collect();
    rest.sort();
    rest.dedup();
    first.extend(rest);
    Ok(first)
}

/// All base-case nodes below `root`.
pub fn expand(root: &CascadeNode, n: u32) -> Result<Vec<CascadeNode>> {
    let primes = cascade_primes(root.bp, root.cp)?;
    let bound: u32 = primes.iter().map(|&p| valuation(root.bp, p) + valuation(root.cp, p)).sum::<u32>() + root.trail.len() as u32;
    let mut level = vec![root.clone()];
    for p in primes {
        let mut next = Vec::new();
        for node in &level {
            for lvl in enumerate_star_levels(node.bp, node.cp, n, p)? {
                if let Some(child) = apply_cascade_step(node, n, p, lvl)? {
                    next.push(child);
                }
            }
        }
        if next.len() > MAX_LEAVES {
            return Err(Error::ResourceExceeded(format!("cascade exceeds {MAX_LEAVES} leaves")));
        }
        level = next;
    }
    for node in &level {
        if node.trail.len() as u32 > bound {
            return Err(Error::Internal("cascade depth bound violated".into()));
        }
    }
    Ok(level)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Discharge {
    Free,
    UndecidableAt { p: i64 },
}

/// Whether every p | y constraint can be dropped: p | C' with p not dividing
/// f', or gcd(p, n C') = 1.
pub fn discharge_y_constraints(node: &CascadeNode, n: u32) -> Result<Discharge> {
    let f = squarefree_split(node.bp)?.f;
    for &p in &node.y_coprime {
        let obs = node.cp % p == 0 && f % p != 0;
        let prop = gcd(p, mul(n as i128, node.cp)?) == 1;
        let tilde_two = p == 2 && node.has_tilde();
        if !(obs || prop || tilde_two) {
            return Ok(Discharge::UndecidableAt { p: p as i64 });
        }
    }
    Ok(Discharge::Free)
}

/// Which criteria apply at a leaf: (*0, tilde-*0).
fn leaf_kinds(node: &CascadeNode, b0: i128) -> (bool, bool) {
    let two: Vec<&StarCondition> = node.star_conditions.iter().filter(|s| s.p == 2).collect();
    let b0_3 = b0.rem_euclid(4) == 3;
    match two.first().map(|s| s.kind) {
        Some(StarKind::Star) => (true, false),
        Some(StarKind::Tildestar) => (false, b0_3),
        None => (true, b0_3),
    }
}

#[derive(Debug, Clone)]
struct LeafResult {
    node: CascadeNode,
    status: Status,
    reason: String,
    certificate: Option<GlobalCertificate>,
    discharge: Discharge,
    /// Filter describing the points the criterion promised.
    filter: Option<PointFilter>,
}

fn leaf_filter(node: &CascadeNode, f: i128, b0: i128, tilde: bool) -> Result<PointFilter> {
    let mut star0: Vec<i128> = node.star_conditions.iter().filter(|s| s.kind == StarKind::Star).map(|s| s.p).collect();
    if !tilde && !star0.contains(&2) {
        star0.push(2);
    }
    star0.sort();
    Ok(PointFilter {
        f,
        b0,
        star0,
        tilde0_2: tilde,
        y_coprime: node.y_coprime.clone(),
        z_coprime: factorize(node.z_coprime)?.primes().collect(),
    })
}

fn decide_leaf(node: &CascadeNode, n: u32) -> Result<LeafResult> {
    let s = squarefree_split(node.bp)?;
    let (try_star, try_tilde) = leaf_kinds(node, s.b0);
    let discharge = discharge_y_constraints(node, n)?;
    let mut reasons = Vec::new();
    let mut res = LeafResult {
        node: node.clone(),
        status: Status::Unsolvable,
        reason: String::new(),
        certificate: None,
        discharge,
        filter: None,
    };
    if try_star {
        let v = decide_star0(node.bp, node.cp, n, node.z_coprime)?;
        reasons.push(format!("star0:{}", v.reason));
        if v.status == Status::Solvable {
            res.status = Status::Solvable;
            res.certificate = v.certificate;
            res.filter = Some(leaf_filter(node, s.f, s.b0, false)?);
        } else if res.certificate.is_none() {
            res.certificate = v.certificate;
        }
    }
    if try_tilde && res.status != Status::Solvable {
        if tilde_m_allowed(s.b0, node.cp, node.z_coprime) {
            let v = decide_star0_tilde(node.bp, node.cp, n, node.z_coprime)?;
            reasons.push(format!("tilde:{}", v.reason));
            if v.status == Status::Solvable {
                res.status = Status::Solvable;
                res.certificate = v.certificate;
                res.filter = Some(leaf_filter(node, s.f, s.b0, true)?);
            }
        } else {
            reasons.push("tilde:z-parity".into());
        }
    }
    res.reason = reasons.join(",");
    Ok(res)
}

fn search_leaf(leaf: &LeafResult, n: u32, root: &Instance, bound: &SearchBound) -> Result<Option<Point>> {
    let inst = Instance::new(leaf.node.bp, leaf.node.cp, n)?;
    let b = SearchBound { filter: leaf.filter.clone(), ..bound.clone() };
    if let Some(p) = search_first(&inst, &b)? {
        if let Some(w) = leaf.node.replay(p) {
            if verify_point(root, w) {
                return Ok(Some(w));
            }
        }
    }
    Ok(None)
}

fn report(l: &LeafResult, status: Status, witness: Option<Point>) -> NodeReport {
    NodeReport { node: l.node.clone(), status, reason: l.reason.clone(), witness }
}

/// Runs the cascade from the stripped instance and aggregates leaf verdicts.
fn run_cascade(inst: &Instance, opts: &DecideOptions) -> Result<Verdict> {
    let (b, c, steps) = strip_common_squares(inst.b, inst.c)?;
    let mut root = CascadeNode::root(b, c);
    root.trail = steps;
    let leaves = expand(&root, inst.n)?;
    let results: Vec<LeafResult> = leaves.par_iter().map(|l| decide_leaf(l, inst.n)).collect::<Result<_>>()?;

    let mut reports: Vec<NodeReport> = Vec::new();
    let free = results.iter().find(|r| r.status == Status::Solvable && r.discharge == Discharge::Free);
    if let Some(l) = free {
        let mut witness = None;
        if opts.want_witness {
            witness = search_leaf(l, inst.n, inst, &opts.bound)?;
            if witness.is_none() {
                witness = search_first(inst, &opts.bound)?;
            }
        }
        if opts.trace {
            reports = results.iter().map(|r| report(r, r.status, None)).collect();
        }
        let mut v = Verdict::solvable(format!("criterion:{}", l.reason));
        v.witness = witness;
        v.certificate = l.certificate.clone();
        v.nodes = reports;
        return Ok(v);
    }
    let pending: Vec<&LeafResult> = results.iter().filter(|r| r.status == Status::Solvable).collect();
    let mut open = Vec::new();
    for l in &pending {
        if let Some(w) = search_leaf(l, inst.n, inst, &opts.bound)? {
            if opts.trace {
                reports = results.iter().map(|r| report(r, r.status, None)).collect();
            }
            let mut v = Verdict::solvable("oracle").with_witness(w);
            v.certificate = l.certificate.clone();
            v.nodes = reports;
            return Ok(v);
        }
        open.push(l.node.clone());
    }
    if opts.trace {
        reports = results
            .iter()
            .map(|r| {
                let st = if r.status == Status::Solvable { Status::Undecided } else { r.status };
                report(r, st, None)
            })
            .collect();
    }
    let mut v = if open.is_empty() {
        Verdict::unsolvable("criterion")
    } else {
        let p = match &pending[0].discharge {
            Discharge::UndecidableAt { p } => *p,
            Discharge::Free => 0,
        };
        Verdict::new(Status::Undecided, format!("y-constraint:{p}"))
    };
    if open.is_empty() && results.len() == 1 {
        v.certificate = results[0].certificate.clone();
    }
    v.open_nodes = open;
    v.nodes = reports;
    Ok(v)
}

/// Decides whether x^2 + B y^2 = C z^n has a primitive integer solution.
pub fn decide(b: i128, c: i128, n: u32, opts: &DecideOptions) -> Result<Verdict> {
    let inst = Instance::new(b, c, n)?;
    if let Some(s) = exact_sqrt(-b) {
        return Ok(Verdict::solvable("minus-b-square").with_witness((s, 1, 0)));
    }
    let (ok, failing) = everywhere_locally_solvable(&inst)?;
    if !ok {
        let mut v = Verdict::unsolvable("local");
        v.local_failure = failing;
        return Ok(v);
    }
    if let Some(p) = in_excluded_set(b, c, n)? {
        if let Some(w) = search_first(&inst, &opts.bound)? {
            let mut v = Verdict::solvable("excluded-oracle").with_witness(w);
            v.excluded_prime = Some(p);
            return Ok(v);
        }
        let inner = run_cascade(&inst, &DecideOptions { want_witness: false, ..opts.clone() })?;
        let mut v = Verdict::new(Status::Undecided, "excluded");
        v.excluded_prime = Some(p);
        v.open_nodes = inner.open_nodes;
        v.nodes = inner.nodes;
        return Ok(v);
    }
    let v = run_cascade(&inst, opts)?;
    if let Some(w) = v.witness {
        if !verify_point(&inst, w) {
            return Err(Error::Internal(format!("witness {w:?} fails verification")));
        }
    }
    Ok(v)
}

/// For A x^2 + B y^2 = C z^n with A squarefree: the instance (A B, A C).
pub fn reduce_general_a(a: i128, b: i128, c: i128, n: u32) -> Result<Instance> {
    if a == 0 {
        return invalid("A must be nonzero");
    }
    let s = squarefree_split(a)?;
    if s.f != 1 {
        return Err(Error::InvalidInput(format!("A = {a} is not squarefree (unsupported)")));
    }
    Instance::new(mul(a, b)?, mul(a, c)?, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star(t: u32) -> Level {
        Level { t, kind: StarKind::Star }
    }

    #[test]
    fn strip_examples() {
        assert_eq!(strip_common_squares(9 * 29, 27).unwrap().0, 29);
        assert_eq!(strip_common_squares(9 * 29, 27).unwrap().1, 3);
        assert_eq!(strip_common_squares(29, 3).unwrap().2.len(), 0);
        let (b, c, _) = strip_common_squares(28, 8).unwrap();
        assert_eq!((b, c), (7, 2));
    }

    #[test]
    fn excluded_examples() {
        assert_eq!(in_excluded_set(60507, 69, 3).unwrap(), Some(3));
        assert_eq!(in_excluded_set(243, 93, 3).unwrap(), None);
        assert_eq!(in_excluded_set(29, 19, 3).unwrap(), None);
    }

    #[test]
    fn level_examples() {
        assert_eq!(enumerate_star_levels(6723, 69, 3, 3).unwrap(), vec![star(2)]);
        assert_eq!(enumerate_star_levels(544563, 69, 3, 3).unwrap(), vec![star(2), star(4)]);
        assert_eq!(enumerate_star_levels(83, 207, 3, 3).unwrap(), vec![star(0), star(1)]);
    }

    #[test]
    fn step_examples() {
        let s = apply_cascade_step(&CascadeNode::root(6723, 69), 3, 3, star(2)).unwrap().unwrap();
        assert_eq!((s.bp, s.cp, s.y_coprime.clone()), (83, 23, vec![3]));
        let s = apply_cascade_step(&CascadeNode::root(243, 93), 3, 3, star(2)).unwrap().unwrap();
        assert_eq!((s.bp, s.cp, s.y_coprime.clone()), (3, 31, vec![3]));
        let s = apply_cascade_step(&CascadeNode::root(83, 207), 3, 3, star(1)).unwrap().unwrap();
        assert_eq!((s.bp, s.cp, s.z_coprime), (83, 23, 3));
        assert!(apply_cascade_step(&CascadeNode::root(6723, 69), 3, 3, star(1)).is_err());
    }

    #[test]
    fn discharge_examples() {
        let mut node = CascadeNode::root(83, 23);
        node.y_coprime = vec![3];
        assert_eq!(discharge_y_constraints(&node, 3).unwrap(), Discharge::UndecidableAt { p: 3 });
        node.y_coprime = vec![5];
        assert_eq!(discharge_y_constraints(&node, 3).unwrap(), Discharge::Free);
        let mut node = CascadeNode::root(29, 19);
        node.y_coprime = vec![19];
        assert_eq!(discharge_y_constraints(&node, 3).unwrap(), Discharge::Free);
    }

    #[test]
    fn general_a() {
        assert_eq!(reduce_general_a(1, 7, 3, 3).unwrap(), Instance::new(7, 3, 3).unwrap());
        let i = reduce_general_a(5, 1, 1, 3).unwrap();
        assert_eq!((i.b, i.c), (5, 5));
        assert!(reduce_general_a(4, 1, 1, 3).is_err());
    }

    #[test]
    fn decide_examples() {
        let o = DecideOptions::default();
        let v = decide(6723, 69, 3, &o).unwrap();
        assert_eq!(v.status, Status::Solvable);
        let v = decide(544563, 69, 3, &o).unwrap();
        assert_eq!(v.status, Status::Solvable);
        assert_eq!(v.witness, Some((549, 2, 33)));
        let v = decide(60507, 69, 3, &DecideOptions { bound: SearchBound::new(30, 10_000).unwrap(), ..o.clone() }).unwrap();
        assert_eq!(v.status, Status::Undecided);
        assert_eq!(v.excluded_prime, Some(3));
        assert!(v.open_nodes.iter().any(|nd| (nd.bp, nd.cp) == (747, 23)));
        let v = decide(243, 93, 3, &DecideOptions { bound: SearchBound::new(30, 10_000).unwrap(), ..o.clone() }).unwrap();
        assert_eq!(v.status, Status::Undecided);
        assert_eq!((v.open_nodes[0].bp, v.open_nodes[0].cp), (3, 31));
        assert_eq!(decide(29, 3, 3, &o).unwrap().status, Status::Unsolvable);
        let v = decide(29, 19, 3, &o).unwrap();
        assert_eq!(v.status, Status::Solvable);
        assert!(v.witness.is_some());
        let v = decide(-4, 7, 3, &o).unwrap();
        assert_eq!(v.witness, Some((2, 1, 0)));
    }
}
