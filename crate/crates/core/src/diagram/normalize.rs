//! Rewriting to a canonical layered form.
//!
//! Two passes alternate until nothing changes:
//!
//! - a carry pass walks from the bottom up and pushes every charge as high
//!   as it can go, through neutral generators, past braids (where it changes
//!   strand) and past charged boxes (picking up q-phases). A charge that is
//!   stopped is parked, together with the others stopped by the same
//!   generator, in a sorted and merged run directly below it. Runs under a
//!   cap are moved onto the cap's right leg.
//! - a structural pass removes closed loops, straightens zigzags and
//!   cancels inverse braid pairs.
//!
//! The result has one generator per layer.

use super::{q_eps, zeta_eps, Diagram, Elem, Scalar};

/// Canonical form with the same evaluation.
pub fn normalize(dg: &Diagram) -> Diagram {
    if dg.is_zero() {
        return dg.clone();
    }
    let Ok((mut elems, mut sc)) = dg.to_elems() else {
        return dg.clone();
    };
    let d = dg.d;
    loop {
        let before = elems.clone();
        elems = carry(d, &elems, &mut sc);
        match structural(d, &elems, &mut sc) {
            Some(e) => elems = e,
            None => return Diagram::zero(d, dg.in_points, dg.out_points),
        }
        if elems == before {
            break;
        }
    }
    Diagram::from_elems(d, dg.in_points, &elems, sc).unwrap_or_else(|_| dg.clone())
}

/// How a generator treats a charge arriving from below on strand `s`
/// (output-side coordinates).
enum Pass {
    Blocked,
    /// Continues above on this strand, with a q-exponent.
    Through(usize, i64),
}

fn pass_rule(e: &Elem, s: usize, k: i64) -> Pass {
    match e {
        Elem::Charge { .. } => unreachable!(),
        Elem::Cap { p } => {
            if s == *p || s == p + 1 {
                Pass::Blocked
            } else if s < *p {
                Pass::Through(s, 0)
            } else {
                Pass::Through(s - 2, 0)
            }
        }
        Elem::Cup { p } => Pass::Through(if s < *p { s } else { s + 2 }, 0),
        Elem::Braid { p, positive: true } => {
            if s == *p {
                Pass::Blocked
            } else if s == p + 1 {
                Pass::Through(*p, 0)
            } else {
                Pass::Through(s, 0)
            }
        }
        Elem::Braid { p, positive: false } => {
            if s == p + 1 {
                Pass::Blocked
            } else if s == *p {
                Pass::Through(p + 1, 0)
            } else {
                Pass::Through(s, 0)
            }
        }
        Elem::Sym { p, .. } => {
            if s >= *p && s < p + 4 {
                Pass::Blocked
            } else {
                Pass::Through(s, 0)
            }
        }
        Elem::Box { p, w, charge, .. } => {
            if s >= *p && s < p + w {
                Pass::Blocked
            } else if s < *p {
                Pass::Through(s, k * charge)
            } else {
                Pass::Through(s, -k * charge)
            }
        }
    }
}

/// q-exponent picked up when c_a^x, sitting left of (below) c_b^y, is
/// moved to its right.
fn swap_q(a: usize, x: i64, b: usize, y: i64) -> i64 {
    match a.cmp(&b) {
        std::cmp::Ordering::Less => x * y,
        std::cmp::Ordering::Greater => -x * y,
        std::cmp::Ordering::Equal => 0,
    }
}

/// Sort a word by strand (stable) and merge equal strands; returns the
/// q-exponent of the reordering.
fn canonical_run(d: usize, word: &[(usize, i64)]) -> (Vec<(usize, i64)>, i64) {
    let mut w = word.to_vec();
    let mut qe = 0;
    // bubble sort keeps track of each adjacent exchange
    for i in 0..w.len() {
        for j in 0..w.len() - 1 - i {
            if w[j].0 > w[j + 1].0 {
                qe += swap_q(w[j].0, w[j].1, w[j + 1].0, w[j + 1].1);
                w.swap(j, j + 1);
            }
        }
    }
    let mut out: Vec<(usize, i64)> = vec![];
    for (s, k) in w {
        match out.last_mut() {
            Some(last) if last.0 == s => last.1 += k,
            _ => out.push((s, k)),
        }
    }
    let out = out
        .into_iter()
        .map(|(s, k)| (s, k.rem_euclid(d as i64)))
        .filter(|&(_, k)| k != 0)
        .collect();
    (out, qe)
}

fn carry(d: usize, elems: &[Elem], sc: &mut Scalar) -> Vec<Elem> {
    // walk upward; `word` is in operator order (index 0 is the lowest)
    let mut up: Vec<Elem> = vec![];
    let mut word: Vec<(usize, i64)> = vec![];
    let mut eps = 0i64;
    for e in elems.iter().rev() {
        if let Elem::Charge { s, k } = e {
            word.push((*s, *k));
            continue;
        }
        let rules: Vec<Pass> = word.iter().map(|&(s, k)| pass_rule(e, s, k)).collect();
        // split into blocked (stays below) and passing (moves above)
        let mut blocked: Vec<(usize, i64)> = vec![];
        let mut passing: Vec<(usize, i64, usize)> = vec![];
        for (i, r) in rules.iter().enumerate() {
            let (s, k) = word[i];
            match r {
                Pass::Blocked => {
                    // every passing charge currently left of it moves right past it
                    for &(ps, pk, _) in &passing {
                        eps += q_eps(d, swap_q(ps, pk, s, k));
                    }
                    blocked.push((s, k));
                }
                Pass::Through(t, qe) => {
                    eps += q_eps(d, *qe);
                    passing.push((s, k, *t));
                }
            }
        }
        let (mut run, qe) = canonical_run(d, &blocked);
        eps += q_eps(d, qe);
        if let Elem::Cap { p } = e {
            // fold a left-leg charge onto the right leg
            if let Some(pos) = run.iter().position(|&(s, _)| s == *p) {
                let y = run[pos].1;
                let x = run.iter().find(|&&(s, _)| s == p + 1).map(|&(_, k)| k).unwrap_or(0);
                eps += q_eps(d, x * y) + zeta_eps(d, y * y);
                run = vec![(p + 1, (x + y).rem_euclid(d as i64))];
                run.retain(|&(_, k)| k != 0);
            }
        }
        for (s, k) in run {
            up.push(Elem::Charge { s, k });
        }
        up.push(e.clone());
        word = passing.into_iter().map(|(_, k, t)| (t, k)).collect();
    }
    let (run, qe) = canonical_run(d, &word);
    eps += q_eps(d, qe);
    for (s, k) in run {
        up.push(Elem::Charge { s, k });
    }
    sc.add_eps(eps, d);
    up.reverse();
    up
}

/// One sweep of loop removal, zigzag straightening and braid
/// cancellation. `None` means the diagram is zero.
fn structural(d: usize, elems: &[Elem], sc: &mut Scalar) -> Option<Vec<Elem>> {
    let mut out: Vec<Elem> = Vec::with_capacity(elems.len());
    let mut i = 0;
    while i < elems.len() {
        match &elems[i] {
            Elem::Cap { p } => {
                let p = *p;
                let (k, next) = match elems.get(i + 1) {
                    Some(Elem::Charge { s, k }) if *s == p + 1 => (*k, i + 2),
                    _ => (0, i + 1),
                };
                match elems.get(next) {
                    Some(Elem::Cup { p: c }) if *c == p => {
                        if k.rem_euclid(d as i64) != 0 {
                            return None;
                        }
                        sc.quarter += 2;
                        i = next + 1;
                        continue;
                    }
                    Some(Elem::Cup { p: c }) if *c == p + 1 => {
                        if k != 0 {
                            out.push(Elem::Charge { s: p, k });
                            sc.add_eps(zeta_eps(d, -k * k), d);
                        }
                        i = next + 1;
                        continue;
                    }
                    Some(Elem::Cup { p: c }) if p >= 1 && *c == p - 1 => {
                        if k != 0 {
                            out.push(Elem::Charge { s: p - 1, k });
                        }
                        i = next + 1;
                        continue;
                    }
                    _ => {}
                }
                out.push(elems[i].clone());
                i += 1;
            }
            Elem::Braid { p, positive } => {
                if let Some(Elem::Braid { p: p2, positive: q2 }) = elems.get(i + 1) {
                    if p2 == p && q2 != positive {
                        i += 2;
                        continue;
                    }
                }
                out.push(elems[i].clone());
                i += 1;
            }
            e => {
                out.push(e.clone());
                i += 1;
            }
        }
    }
    Some(out)
}
