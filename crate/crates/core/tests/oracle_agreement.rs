//! Cross-checks the criteria against brute-force search on small sweeps.

use gfe::arith::{exact_sqrt, gcd, squarefree_split};
use gfe::cascade::{decide, DecideOptions};
use gfe::global::{decide_star0, decide_star0_tilde};
use gfe::local::everywhere_locally_solvable;
use gfe::oracle::{search_primitive, SearchBound};
use gfe::verdict::Status;
use gfe::Instance;
use rayon::prelude::*;

fn is_star0(x: i128, y: i128, f: i128, b0: i128) -> bool {
    if b0.rem_euclid(4) == 3 {
        gcd(x, f * y) == 1 && (x + f * y) % 2 != 0
    } else {
        gcd(x, f * y) == 1
    }
}

fn pairs(t: i128) -> Vec<(i128, i128)> {
    let mut v = Vec::new();
    for b in -t..=t {
        for c in -t..=t {
            if b != 0 && c != 0 {
                v.push((b, c));
            }
        }
    }
    v
}

#[test]
fn star0_matches_search() {
    let bound = SearchBound::new(30, 400).unwrap();
    let bad: Vec<String> = pairs(60)
        .par_iter()
        .filter_map(|&(b, c)| {
            let s = squarefree_split(b).unwrap();
            if s.b0 == -1 || gcd(s.f, c) != 1 {
                return None;
            }
            let v = decide_star0(b, c, 3, 1).unwrap();
            let inst = Instance::new(b, c, 3).unwrap();
            let hits = search_primitive(&inst, &bound).unwrap();
            let star = hits.iter().find(|p| is_star0(p.0, p.1, s.f, s.b0));
            if v.status == Status::Unsolvable && star.is_some() {
                return Some(format!("({b},{c}) Unsolvable but {star:?}"));
            }
            if v.status == Status::Solvable && !everywhere_locally_solvable(&inst).unwrap().0 {
                return Some(format!("({b},{c}) Solvable but not locally soluble"));
            }
            None
        })
        .collect();
    assert!(bad.is_empty(), "{bad:#?}");
}

#[test]
fn star0_solvable_found_at_small_height() {
    // in this box every Solvable verdict has a *0 point of modest height
    let bound = SearchBound::new(60, 3000).unwrap();
    let (total, miss): (usize, Vec<(i128, i128)>) = {
        let res: Vec<Option<bool>> = pairs(30)
            .par_iter()
            .map(|&(b, c)| {
                let s = squarefree_split(b).unwrap();
                if s.b0 == -1 || gcd(s.f, c) != 1 || b < 0 {
                    return None;
                }
                let v = decide_star0(b, c, 3, 1).unwrap();
                if v.status != Status::Solvable {
                    return None;
                }
                let inst = Instance::new(b, c, 3).unwrap();
                let hits = search_primitive(&inst, &bound).unwrap();
                Some(hits.iter().any(|p| is_star0(p.0, p.1, s.f, s.b0)))
            })
            .collect();
        let ps = pairs(30);
        let miss = ps.iter().zip(&res).filter(|(_, r)| **r == Some(false)).map(|(p, _)| *p).collect();
        (res.iter().filter(|r| r.is_some()).count(), miss)
    };
    assert!(total > 0);
    assert!(miss.is_empty(), "Solvable without a small *0 point: {miss:?}");
}

#[test]
fn decide_sound_against_search() {
    let bound = SearchBound::new(30, 300).unwrap();
    let opts = DecideOptions { bound: bound.clone(), want_witness: false, trace: false };
    let bad: Vec<String> = pairs(50)
        .par_iter()
        .filter_map(|&(b, c)| {
            let v = decide(b, c, 3, &opts).unwrap();
            let inst = Instance::new(b, c, 3).unwrap();
            let hits = search_primitive(&inst, &bound).unwrap();
            match (v.status, hits.first()) {
                (Status::Unsolvable, Some(p)) => Some(format!("({b},{c}) Unsolvable but {p:?} ({})", v.reason)),
                (Status::Undecided, Some(p)) if v.open_nodes.is_empty() && v.excluded_prime.is_none() => {
                    Some(format!("({b},{c}) Undecided without open nodes, point {p:?}"))
                }
                _ => None,
            }
        })
        .collect();
    assert!(bad.is_empty(), "{bad:#?}");
}

#[test]
fn minus_b_square_always_solvable() {
    for s in 1..20i128 {
        let v = decide(-s * s, 7, 3, &DecideOptions::default()).unwrap();
        assert_eq!(v.status, Status::Solvable);
        assert_eq!(exact_sqrt(s * s), Some(s));
        assert_eq!(v.witness, Some((s, 1, 0)));
    }
}

#[test]
fn tilde_matches_search() {
    let bound = SearchBound::new(40, 2000).unwrap();
    let bad: Vec<String> = pairs(60)
        .par_iter()
        .filter_map(|&(b, c)| {
            let s = squarefree_split(b).unwrap();
            if s.b0 == -1 || gcd(s.f, c) != 1 || s.b0.rem_euclid(4) != 3 {
                return None;
            }
            let v = decide_star0_tilde(b, c, 3, 1).unwrap();
            let inst = Instance::new(b, c, 3).unwrap();
            let hits = search_primitive(&inst, &bound).unwrap();
            let tilde = hits.iter().find(|p| gcd(p.0, s.f * p.1) == 1 && p.0 % 2 != 0 && (s.f * p.1) % 2 != 0);
            match (v.status, tilde) {
                (Status::Unsolvable, Some(p)) => Some(format!("({b},{c}) Unsolvable but {p:?}")),
                (Status::Solvable, None) if b > 0 && b.abs() <= 30 && c.abs() <= 30 => {
                    Some(format!("({b},{c}) Solvable but no small tilde point"))
                }
                _ => None,
            }
        })
        .collect();
    assert!(bad.is_empty(), "{bad:#?}");
}

#[test]
fn criteria_match_search_other_exponents() {
    for (n, z_max) in [(5u32, 12i128), (9, 5)] {
        let bound = SearchBound::new(z_max, 3000).unwrap();
        let bad: Vec<String> = pairs(30)
            .par_iter()
            .filter_map(|&(b, c)| {
                let s = squarefree_split(b).unwrap();
                if s.b0 == -1 || gcd(s.f, c) != 1 {
                    return None;
                }
                let inst = Instance::new(b, c, n).unwrap();
                let hits = search_primitive(&inst, &bound).unwrap();
                let star = decide_star0(b, c, n, 1).unwrap().status;
                if star == Status::Unsolvable && hits.iter().any(|p| is_star0(p.0, p.1, s.f, s.b0)) {
                    return Some(format!("n={n} ({b},{c}) star0 Unsolvable"));
                }
                if s.b0.rem_euclid(4) == 3 {
                    let tilde = decide_star0_tilde(b, c, n, 1).unwrap().status;
                    let found = hits.iter().any(|p| gcd(p.0, s.f * p.1) == 1 && p.0 % 2 != 0 && (s.f * p.1) % 2 != 0);
                    if tilde == Status::Unsolvable && found {
                        return Some(format!("n={n} ({b},{c}) tilde Unsolvable"));
                    }
                }
                None
            })
            .collect();
        assert!(bad.is_empty(), "{bad:#?}");
    }
}
