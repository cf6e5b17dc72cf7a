//! Four circuit simplifications used when reading protocols off pictures.
//!
//! 1. G^{±1} on a control wire commutes with the controlled gate.
//! 2. G^{±1} right before a meter can be dropped.
//! 3. C_{1,X^{-1}} before two meters can be dropped if the gate fed by the
//!    second meter is followed by the inverse gate fed by the first
//!    (for gates with T^d = 1).
//! 4. X^{-k} then Y^{-k} fed by one meter is Z^k up to a phase.

use crate::error::Result;
use crate::linalg::{self, max_diff, Mat};
use crate::numerics::PhaseRing;
use crate::sim::circuit::{parse_circuit, random_state, Branch};
use crate::sim::gates::{controlled_matrix, embed, fourier_gate, gaussian_gate, pauli_gate, Pauli};
use crate::sim::state::QState;

/// Worst residual of each trick.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TricksReport {
    pub trick1: f64,
    pub trick2: f64,
    pub trick3: f64,
    pub trick4: f64,
}

impl TricksReport {
    pub fn max(&self) -> f64 {
        self.trick1.max(self.trick2).max(self.trick3).max(self.trick4)
    }
}

/// Compare two branch lists keyed by register values. `relabel` maps the
/// left registers to the matching right ones; only the unmeasured qudits
/// in `keep` are compared. With `up_to_phase` each branch state is
/// compared by overlap instead of entrywise.
fn compare_branches(
    left: &[Branch],
    right: &[Branch],
    keep: &[usize],
    relabel: impl Fn(&Branch) -> Vec<usize>,
    up_to_phase: bool,
) -> Result<f64> {
    let key = |b: &Branch| b.registers.values().cloned().collect::<Vec<_>>();
    let mut worst: f64 = 0.0;
    if left.len() != right.len() {
        return Ok(1.0);
    }
    for l in left {
        let want = relabel(l);
        let Some(r) = right.iter().find(|r| key(r) == want) else {
            return Ok(1.0);
        };
        worst = worst.max((l.probability - r.probability).abs());
        let (ls, rs) = (l.state.restrict(keep)?, r.state.restrict(keep)?);
        let diff = if up_to_phase { 1.0 - ls.overlap(&rs) } else { ls.max_diff(&rs) };
        worst = worst.max(diff);
    }
    Ok(worst)
}

fn trick1(ring: &PhaseRing) -> Result<f64> {
    let d = ring.d;
    let g = gaussian_gate(ring);
    let mut worst: f64 = 0.0;
    let targets = [pauli_gate(ring, Pauli::X), pauli_gate(ring, Pauli::Z), fourier_gate(ring)];
    for a in &targets {
        let c = controlled_matrix(d, a);
        for gp in [g.clone(), linalg::mat_pow(&g, -1)] {
            let g1 = linalg::kron(&gp, &linalg::identity(d));
            worst = worst.max(max_diff(&(&c * &g1), &(&g1 * &c)));
        }
    }
    Ok(worst)
}

fn trick2(ring: &PhaseRing, psi: &QState) -> Result<f64> {
    let d = ring.d;
    let mut worst: f64 = 0.0;
    for pow in [1, -1] {
        let with = parse_circuit(&format!("circuit d={d} n=2\ngate G^{pow}@1\nmeasure@1 -> m\n"))?;
        let without = parse_circuit(&format!("circuit d={d} n=2\nmeasure@1 -> m\n"))?;
        let a = with.branches(ring, psi)?;
        let b = without.branches(ring, psi)?;
        worst = worst.max(compare_branches(&a, &b, &[1], |x| x.registers.values().cloned().collect(), true)?);
    }
    Ok(worst)
}

fn trick3(ring: &PhaseRing, psi: &QState) -> Result<f64> {
    let d = ring.d;
    // meter-fed powers are read mod d, so T needs T^d = 1; Y is not diagonal
    let left = parse_circuit(&format!(
        "circuit d={d} n=3\nctrl X^-1 c=1 t=2\nmeasure@1 -> a\nmeasure@2 -> b\ncond b apply Y^b @3\n"
    ))?;
    let right = parse_circuit(&format!(
        "circuit d={d} n=3\nmeasure@1 -> a\nmeasure@2 -> b\ncond b apply Y^b @3\ncond a apply Y^-a @3\n"
    ))?;
    let l = left.branches(ring, psi)?;
    let r = right.branches(ring, psi)?;
    // left reads (a, b − a) where right reads (a, b)
    compare_branches(
        &l,
        &r,
        &[2],
        |x| {
            let a = x.registers["a"];
            let b = x.registers["b"];
            vec![a, (a + b) % d]
        },
        false,
    )
}

fn trick4(ring: &PhaseRing, psi: &QState) -> Result<f64> {
    let d = ring.d;
    let left = parse_circuit(&format!("circuit d={d} n=2\nmeasure@1 -> k\ncond k apply X^-k @2\ncond k apply Y^-k @2\n"))?;
    let right = parse_circuit(&format!("circuit d={d} n=2\nmeasure@1 -> k\ncond k apply Z^k @2\n"))?;
    let a = left.branches(ring, psi)?;
    let b = right.branches(ring, psi)?;
    let mut worst = compare_branches(&a, &b, &[1], |x| x.registers.values().cloned().collect(), true)?;
    // the operator identity behind it: Y^{-k} X^{-k} = ζ^{-k²} Z^k
    let (x, y, z) = (pauli_gate(ring, Pauli::X), pauli_gate(ring, Pauli::Y), pauli_gate(ring, Pauli::Z));
    for k in 0..d as i64 {
        let lhs: Mat = linalg::mat_pow(&y, -k) * linalg::mat_pow(&x, -k);
        let rhs = linalg::mat_pow(&z, k).map(|w| w * ring.zeta_pow(-k * k));
        worst = worst.max(max_diff(&lhs, &rhs));
    }
    Ok(worst)
}

/// Check all four tricks on seeded random inputs.
pub fn circuit_tricks_check(ring: &PhaseRing) -> Result<TricksReport> {
    let d = ring.d;
    let psi2 = random_state(d, 2, 101)?;
    let psi3 = random_state(d, 3, 202)?;
    // keep `embed` honest as well: trick 1 on a 3-qudit register
    let c = embed(d, 3, &[0, 2], &controlled_matrix(d, &pauli_gate(ring, Pauli::X)))?;
    let g = embed(d, 3, &[0], &gaussian_gate(ring))?;
    let t1 = trick1(ring)?.max(max_diff(&(&c.matrix * &g.matrix), &(&g.matrix * &c.matrix)));
    Ok(TricksReport { trick1: t1, trick2: trick2(ring, &psi2)?, trick3: trick3(ring, &psi3)?, trick4: trick4(ring, &psi2)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::make_phase_ring;

    #[test]
    fn tricks_hold() {
        for d in [2, 3, 4, 5] {
            let r = make_phase_ring(d).unwrap();
            let rep = circuit_tricks_check(&r).unwrap();
            assert!(rep.max() < 1e-9, "d={d} {rep:?}");
        }
    }
}
