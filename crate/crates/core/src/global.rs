//! Class-group criteria for points with u = x + f sqrt(-B0) y not divisible
//! by any rational prime (`*0`), and for the 2-adic variant with x and f y
//! both odd (`tilde-*0`).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::arith::{factorize, gcd, squarefree_split, valuation};
use crate::error::{invalid, Error, Result};
use crate::qforms::{
    class_group, field_discriminant, order_for, prime_form, splitting, ClassGroup, Discriminant, OrderCase, QForm,
    QuadOrder, SplittingType,
};
use crate::verdict::Verdict;

/// Largest number of split primes handled.
pub const MAX_SPLIT_PRIMES: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPrime {
    #[serde(with = "crate::verdict::int_str")]
    pub p: i128,
    pub exponent: u32,
    /// Prime form of one prime above p, and of its conjugate.
    pub form: QForm,
    pub conjugate: QForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Obstruction {
    /// An inert prime divides C.
    Inert { p: i64 },
    /// A ramified prime divides C to order at least 2.
    Ramified { p: i64 },
    /// B0 = 3 mod 4 and C even (no `*0` points).
    EvenC,
    /// B0 = 3 mod 8 with v_2(C) != 2 (no `tilde-*0` points).
    TwoAdic,
    /// f even, so x and f y cannot both be odd.
    EvenF,
}

impl Obstruction {
    pub fn code(&self) -> &'static str {
        match self {
            Obstruction::Inert { .. } => "inert",
            Obstruction::Ramified { .. } => "ramified",
            Obstruction::EvenC => "even-c",
            Obstruction::TwoAdic => "two-adic",
            Obstruction::EvenF => "even-f",
        }
    }
}

/// Shape of C O_K = 2^ell j+ j- r^2 (2^ell only split off in the tilde case).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CFactorization {
    pub ell: u32,
    pub sign: i8,
    /// (p, exponent) over ramified p.
    pub ramified_part: Vec<(i64, u32)>,
    pub split_part: Vec<SplitPrime>,
    /// Odd inert prime dividing C, if any.
    pub inert_violation: Option<i64>,
}

impl CFactorization {
    pub fn reconstruct(&self) -> i128 {
        let mut v = self.sign as i128 * 2i128.pow(self.ell);
        for &(p, e) in &self.ramified_part {
            v *= (p as i128).pow(e);
        }
        for s in &self.split_part {
            v *= s.p.pow(s.exponent);
        }
        v
    }
}

fn check_pre(b0: i128, f: i128, c: i128) -> Result<()> {
    if c == 0 || b0 == 0 || f <= 0 {
        return invalid("B, C must be nonzero");
    }
    if b0 == -1 {
        return invalid("-B is a perfect square");
    }
    if gcd(f, c) != 1 {
        return invalid(format!("gcd(f, C) = {} != 1", gcd(f, c)));
    }
    Ok(())
}

/// Splits the support of C by splitting type in Q(sqrt(-B0)). With `tilde`
/// the power of 2 is recorded as `ell` and not classified.
pub fn factor_c_over_k(b0: i128, f: i128, c: i128, tilde: bool) -> Result<std::result::Result<CFactorization, Obstruction>> {
    check_pre(b0, f, c)?;
    let order = order_for(b0, f, c)?;
    let dk = Discriminant::new(field_discriminant(b0))?;
    let fc = factorize(c)?;
    let mut out = CFactorization {
        ell: 0,
        sign: fc.sign,
        ramified_part: Vec::new(),
        split_part: Vec::new(),
        inert_violation: None,
    };
    let mut obstruction = None;
    for &(p, e) in &fc.factors {
        if tilde && p == 2 {
            out.ell = e;
            continue;
        }
        match splitting(dk, p) {
            SplittingType::Inert => {
                if out.inert_violation.is_none() {
                    out.inert_violation = Some(p as i64);
                }
                obstruction.get_or_insert(Obstruction::Inert { p: p as i64 });
            }
            SplittingType::Ramified => {
                out.ramified_part.push((p as i64, e));
                if e >= 2 {
                    obstruction.get_or_insert(Obstruction::Ramified { p: p as i64 });
                }
            }
            SplittingType::Split => {
                let form = prime_form(order.disc, p)?;
                out.split_part.push(SplitPrime { p, exponent: e, form, conjugate: form.inverse() });
            }
        }
    }
    Ok(match obstruction {
        Some(o) => Err(o),
        None => Ok(out),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Clause {
    /// [j+ ∩ O] in n Cl(O).
    Star0,
    /// [j+ ∩ O] in ±(2 - ell)[p2] + n Cl(O).
    Tilde0,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassGroupSummary {
    #[serde(with = "crate::verdict::int_str")]
    pub disc: i128,
    pub order: usize,
    pub elementary_divisors: Vec<i64>,
    pub generators: Vec<QForm>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalCertificate {
    pub order: QuadOrder,
    pub class_group: ClassGroupSummary,
    pub n: u32,
    pub factorization: CFactorization,
    /// Sign per split prime: +1 puts the recorded prime form into j+.
    pub signs: Vec<i8>,
    /// Class of j+ ∩ O (all +1 signs when membership fails).
    pub j_plus_class_vector: Vec<i64>,
    /// Coset representative the class is tested against.
    pub target_vector: Vec<i64>,
    pub membership: bool,
    pub clause: Clause,
}

impl GlobalCertificate {
    /// Recomputes the membership flag from the recorded data.
    pub fn recheck(&self) -> Result<bool> {
        let cg = class_group(self.order.disc)?;
        let jp = j_plus_vector(&cg, &self.factorization.split_part, &self.signs)?;
        if jp != self.j_plus_class_vector {
            return Ok(false);
        }
        let diff = cg.combine(&jp, &self.target_vector, -1);
        Ok(cg.vector_in_nth_powers(&diff, self.n))
    }
}

fn j_plus_vector(cg: &ClassGroup, split: &[SplitPrime], signs: &[i8]) -> Result<Vec<i64>> {
    let mut v = cg.zero();
    for (s, &sg) in split.iter().zip(signs) {
        let d = cg.dlog_of(&s.form)?;
        v = cg.combine(&v, &d, sg as i64 * s.exponent as i64);
    }
    Ok(v)
}

/// Searches signs s_i with sum s_i e_i [P_i] in target + n Cl for one of the
/// targets. Works in Cl / n Cl by dynamic programming over reachable sums, and
/// fixes s_0 = +1 since conjugating everything negates the sum.
fn find_signs(cg: &ClassGroup, n: u32, split: &[SplitPrime], targets: &[Vec<i64>]) -> Result<Option<(Vec<i8>, usize)>> {
    if split.len() > MAX_SPLIT_PRIMES {
        return Err(Error::ResourceExceeded(format!(
            "{} split primes exceed the cap of {MAX_SPLIT_PRIMES}",
            split.len()
        )));
    }
    let steps: Vec<Vec<i64>> = split
        .iter()
        .map(|s| Ok(cg.project_mod_n(&cg.scale(&cg.dlog_of(&s.form)?, s.exponent as i64), n)))
        .collect::<Result<_>>()?;
    let proj = |v: &[i64]| cg.project_mod_n(v, n);
    // layers[i]: reachable sum -> (sign of step i, predecessor)
    let mut layers: Vec<HashMap<Vec<i64>, (i8, Vec<i64>)>> = Vec::new();
    let mut frontier: Vec<Vec<i64>> = vec![proj(&cg.zero())];
    for (i, st) in steps.iter().enumerate() {
        let mut layer = HashMap::new();
        let signs: &[i8] = if i == 0 { &[1] } else { &[1, -1] };
        for v in &frontier {
            for &sg in signs {
                let w = proj(&cg.combine(v, st, sg as i64));
                layer.entry(w).or_insert((sg, v.clone()));
            }
        }
        frontier = layer.keys().cloned().collect();
        frontier.sort();
        layers.push(layer);
    }
    for (ti, t) in targets.iter().enumerate() {
        let t = proj(t);
        let hit = if layers.is_empty() { t == proj(&cg.zero()) } else { layers.last().unwrap().contains_key(&t) };
        if !hit {
            continue;
        }
        let mut signs = vec![0i8; steps.len()];
        let mut cur = t;
        for i in (0..steps.len()).rev() {
            let (sg, prev) = layers[i][&cur].clone();
            signs[i] = sg;
            cur = prev;
        }
        return Ok(Some((signs, ti)));
    }
    Ok(None)
}

/// Re-derives the split prime forms in another discriminant.
fn rebase_forms(mut fact: CFactorization, d: Discriminant) -> Result<CFactorization> {
    for s in fact.split_part.iter_mut() {
        s.form = prime_form(d, s.p)?;
        s.conjugate = s.form.inverse();
    }
    Ok(fact)
}

fn summary(cg: &ClassGroup) -> ClassGroupSummary {
    ClassGroupSummary {
        disc: cg.disc,
        order: cg.order(),
        elementary_divisors: cg.elementary_divisors.clone(),
        generators: cg.generators.clone(),
    }
}

fn certify(
    order: QuadOrder,
    n: u32,
    fact: CFactorization,
    targets: Vec<Vec<i64>>,
    clause: Clause,
) -> Result<Verdict> {
    let cg = class_group(order.disc)?;
    let found = find_signs(&cg, n, &fact.split_part, &targets)?;
    let (signs, target, membership) = match found {
        Some((s, ti)) => (s, targets[ti].clone(), true),
        None => (vec![1; fact.split_part.len()], targets[0].clone(), false),
    };
    let jp = j_plus_vector(&cg, &fact.split_part, &signs)?;
    let cert = GlobalCertificate {
        order,
        class_group: summary(&cg),
        n,
        factorization: fact,
        signs,
        j_plus_class_vector: jp,
        target_vector: target,
        membership,
        clause,
    };
    let v = if membership { Verdict::solvable("class-membership") } else { Verdict::unsolvable("class-membership") };
    Ok(v.with_certificate(cert))
}

fn split_b(b: i128, c: i128) -> Result<(i128, i128)> {
    if b == 0 || c == 0 {
        return invalid("B and C must be nonzero");
    }
    let s = squarefree_split(b)?;
    check_pre(s.b0, s.f, c)?;
    Ok((s.f, s.b0))
}

fn check_n(n: u32) -> Result<()> {
    if n < 3 || n % 2 == 0 {
        return invalid(format!("n = {n} must be odd and at least 3"));
    }
    Ok(())
}

/// Non-emptiness of the `*0` points. `m` only constrains witness searches.
pub fn decide_star0(b: i128, c: i128, n: u32, m: i128) -> Result<Verdict> {
    check_n(n)?;
    let _ = m;
    let (f, b0) = split_b(b, c)?;
    if b0.rem_euclid(4) == 3 && c % 2 == 0 {
        return Ok(Verdict::unsolvable(Obstruction::EvenC.code()));
    }
    let fact = match factor_c_over_k(b0, f, c, false)? {
        Ok(fc) => fc,
        Err(o) => return Ok(Verdict::unsolvable(o.code())),
    };
    let order = order_for(b0, f, c)?;
    let cg = class_group(order.disc)?;
    certify(order, n, fact, vec![cg.zero()], Clause::Star0)
}

/// Whether m is an allowed z-coprimality parameter for the tilde criterion:
/// odd m always; even m only when B0 = 3 mod 8 or 8 | C. With C odd every
/// tilde point has z even, and with 2 || C or 4 || C and B0 = 7 mod 8 the
/// construction only gives even z.
pub fn tilde_m_allowed(b0: i128, c: i128, m: i128) -> bool {
    m % 2 != 0 || b0.rem_euclid(8) == 3 || valuation(c, 2) >= 3
}

/// Non-emptiness of the `tilde-*0` points (B0 = 3 mod 4).
pub fn decide_star0_tilde(b: i128, c: i128, n: u32, m: i128) -> Result<Verdict> {
    check_n(n)?;
    let (f, b0) = split_b(b, c)?;
    if b0.rem_euclid(4) != 3 {
        return invalid(format!("B0 = {b0} is not 3 mod 4"));
    }
    if !tilde_m_allowed(b0, c, m) {
        return invalid(format!("M = {m} is not admissible for B0 = {b0}, C = {c}"));
    }
    if f % 2 == 0 {
        return Ok(Verdict::unsolvable(Obstruction::EvenF.code()));
    }
    let ell = valuation(c, 2);
    if b0.rem_euclid(8) == 3 {
        if ell != 2 {
            return Ok(Verdict::unsolvable(Obstruction::TwoAdic.code()));
        }
        return tilde_inert_two(b, c, n, f, b0);
    }
    let fact = match factor_c_over_k(b0, f, c, true)? {
        Ok(fc) => fc,
        Err(o) => return Ok(Verdict::unsolvable(o.code())),
    };
    let order = order_for(b0, f, c)?;
    let cg = class_group(order.disc)?;
    let p2 = cg.dlog_of(&prime_form(order.disc, 2)?)?;
    let k = 2 - ell as i64;
    certify(order, n, fact, vec![cg.scale(&p2, k), cg.scale(&p2, -k)], Clause::Tilde0)
}

// B0 = 3 mod 8 and 4 || C. Here 2 is inert and O / 2O = F_4; a point has x, y
// odd iff u = (x + f sqrt(-B0) y)/2 is a unit mod 2 outside F_2, i.e. iff the
// class of uO ∩ Z[f sqrt(-B0)] is a nonzero element of the kernel of
// Cl(Z[f sqrt(-B0)]) -> Cl(O). That kernel is generated by (4, 2, (1 + B)/4)
// and has order 3 unless B = 3, so the test differs from plain membership in
// n Cl(O) exactly when 3 | n.
fn tilde_inert_two(b: i128, c: i128, n: u32, f: i128, b0: i128) -> Result<Verdict> {
    let mut fact = match factor_c_over_k(b0, f, c / 4, false)? {
        Ok(fc) => fc,
        Err(o) => return Ok(Verdict::unsolvable(o.code())),
    };
    fact.ell = 2;
    let mut order = order_for(b0, f, c)?;
    order.case = OrderCase::B0ThreeMod8Tilde;
    order.conductor = 2 * f;
    order.disc = Discriminant::new(-4 * b)?;
    let fact = rebase_forms(fact, order.disc)?;
    let cg = class_group(order.disc)?;
    let k = cg.dlog_of(&QForm::new(4, 2, (1 + b) / 4))?;
    let targets = if k == cg.zero() { vec![k] } else { vec![k.clone(), cg.scale(&k, -1)] };
    certify(order, n, fact, targets, Clause::Tilde0)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::verdict::Status;

    #[test]
    fn factor_examples() {
        let fc = factor_c_over_k(29, 1, 19, false).unwrap().unwrap();
        assert_eq!(fc.split_part.len(), 1);
        assert_eq!(fc.split_part[0].p, 19);
        assert_eq!(fc.reconstruct(), 19);
        assert!(factor_c_over_k(29, 1, 3, false).unwrap().is_ok());
        assert_eq!(factor_c_over_k(3, 1, 25, false).unwrap(), Err(Obstruction::Inert { p: 5 }));
        assert!(factor_c_over_k(29, 3, 3, false).is_err());
    }

    #[test]
    fn star0_examples() {
        for (b, c, want) in [(29, 3, Status::Unsolvable), (29, 19, Status::Solvable), (339, 29, Status::Unsolvable), (83, 69, Status::Unsolvable)] {
            let v = decide_star0(b, c, 3, 1).unwrap();
            assert_eq!(v.status, want, "({b}, {c})");
            if let Some(cert) = &v.certificate {
                assert_eq!(cert.recheck().unwrap(), cert.membership);
            }
        }
        assert_eq!(decide_star0(83, 23, 3, 1).unwrap().status, Status::Solvable);
        assert_eq!(decide_star0(6723, 23, 3, 1).unwrap().status, Status::Solvable);
        assert_eq!(decide_star0(83, 207, 3, 1).unwrap().status, Status::Unsolvable);
    }

    #[test]
    fn tilde_examples() {
        assert_eq!(decide_star0_tilde(3, 124, 3, 1).unwrap().status, Status::Solvable);
        assert_eq!(decide_star0_tilde(3, 31, 3, 1).unwrap().status, Status::Unsolvable);
        assert_eq!(decide_star0_tilde(7, 1, 3, 1).unwrap().status, Status::Solvable);
        assert!(decide_star0_tilde(29, 1, 3, 1).is_err());
        // 2 inert: cubes of units of F_4 lie in F_2, so x and y are even
        assert_eq!(decide_star0_tilde(11, 4, 3, 1).unwrap().status, Status::Unsolvable);
        assert_eq!(decide_star0_tilde(27, 4, 3, 1).unwrap().status, Status::Unsolvable);
        assert_eq!(decide_star0_tilde(11, 4, 5, 1).unwrap().status, Status::Solvable);
        assert_eq!(decide_star0_tilde(3, 4, 3, 1).unwrap().status, Status::Solvable);
        assert!(decide_star0_tilde(7, 1, 3, 2).is_err());
        assert!(decide_star0_tilde(7, 8, 3, 2).is_ok());
    }

    #[test]
    fn conjugation_symmetry() {
        let v = decide_star0(6723, 23, 3, 1).unwrap();
        let cert = v.certificate.unwrap();
        let mut flipped = cert.clone();
        for s in flipped.factorization.split_part.iter_mut() {
            std::mem::swap(&mut s.form, &mut s.conjugate);
        }
        let cg = class_group(cert.order.disc).unwrap();
        let jp = j_plus_vector(&cg, &flipped.factorization.split_part, &flipped.signs).unwrap();
        assert!(cg.vector_in_nth_powers(&jp, 3));
    }
}
