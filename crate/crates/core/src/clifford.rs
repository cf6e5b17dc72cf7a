//! Clifford identities for the string Fourier transform, a phase-free
//! closure search and a Pauli-normalizer membership test.

use std::collections::{HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::evaluator::{braid_op, BraidSign};
use crate::linalg::{self, kron, mat_pow, max_diff, Mat, C64};
use crate::numerics::PhaseRing;
use crate::sim::gates::{controlled_gate, controlled_matrix, cz_gate, fourier_gate, gaussian_gate, pauli_gate, ControlFlavor, Pauli};
use crate::sim::sft::{sft_gate, SftMethod};
use crate::sim::state::{state_dim, QOperator};

/// A unitary taken modulo global phase: the first entry (column-major)
/// with modulus above 1e-9 is rotated onto the positive real axis.
#[derive(Clone, Debug)]
pub struct PhaselessUnitary {
    pub d: usize,
    pub n: usize,
    pub matrix: Mat,
}

/// Hash grid for deduplication.
const GRID: f64 = 1e6;

impl PhaselessUnitary {
    pub fn new(d: usize, n: usize, m: &Mat) -> Self {
        let lead = m.iter().find(|z| z.norm() > 1e-9).cloned().unwrap_or(C64::new(1.0, 0.0));
        let ph = lead.conj() / lead.norm();
        PhaselessUnitary { d, n, matrix: m.map(|z| z * ph) }
    }

    pub fn from_op(u: &QOperator) -> Self {
        PhaselessUnitary::new(u.d, u.n_in, &u.matrix)
    }

    /// Rounded entries; equal keys mean equal up to phase at the 1e-6 grid.
    pub fn key(&self) -> Vec<(i64, i64)> {
        self.matrix.iter().map(|z| ((z.re * GRID).round() as i64, (z.im * GRID).round() as i64)).collect()
    }
}

fn two(ring: &PhaseRing) -> (Mat, Mat, Mat, Mat) {
    let g = gaussian_gate(ring);
    let f = fourier_gate(ring);
    (g.clone(), mat_pow(&g, -1), f.clone(), mat_pow(&f, -1))
}

fn sft2(ring: &PhaseRing) -> Result<Mat> {
    Ok(sft_gate(ring, 2, SftMethod::MatrixFormula)?.matrix)
}

/// Residual of C_Z = (GF^{−1} ⊗ FG^{−1}) 𝔉ₛ (1 ⊗ F^{−1}G^{−1}), phase included.
pub fn verify_fsclifford1(ring: &PhaseRing) -> Result<f64> {
    let (g, gi, f, fi) = two(ring);
    let id = linalg::identity(ring.d);
    let rhs = kron(&(&g * &fi), &(&f * &gi)) * sft2(ring)? * kron(&id, &(&fi * &gi));
    Ok(max_diff(&cz_gate(ring), &rhs))
}

/// Residual of C_Z = ω (G^{−1}F^{−1} ⊗ FG^{−1}) 𝔉ₛ (G^{−1}F ⊗ F^{−1}G^{−1}),
/// the form of the factorisation that holds.
pub fn verify_fsclifford1_corrected(ring: &PhaseRing) -> Result<f64> {
    let (_, gi, f, fi) = two(ring);
    let rhs = kron(&(&gi * &fi), &(&f * &gi)) * sft2(ring)? * kron(&(&gi * &f), &(&fi * &gi));
    Ok(max_diff(&cz_gate(ring), &rhs.map(|z| z * ring.omega)))
}

/// Residuals of the two two-qudit factorisations of 𝔉ₛ and of the Bell
/// state corollary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sft2Report {
    pub first: f64,
    pub second: f64,
    pub bell: f64,
}

impl Sft2Report {
    pub fn max(&self) -> f64 {
        self.first.max(self.second).max(self.bell)
    }
}

/// 𝔉ₛ = (G^{−1}⊗G) C_{1,X}^{−1} (F⊗1) C_{1,X} = C_{X,1}^{−1} (1⊗F) C_{X,1} (G⊗G^{−1}),
/// and 𝔉ₛ|0,0⟩ = C_{1,X}^{−1} (F⊗1)|0,0⟩.
pub fn verify_sft2(ring: &PhaseRing) -> Result<Sft2Report> {
    let (g, gi, f, _) = two(ring);
    let id = linalg::identity(ring.d);
    let x = pauli_gate(ring, Pauli::X);
    let c1x = controlled_gate(ring, 2, 0, 1, &x, ControlFlavor::FirstControls)?.matrix;
    let cx1 = controlled_gate(ring, 2, 0, 1, &x, ControlFlavor::SecondControls)?.matrix;
    let c1x_inv = mat_pow(&c1x, -1);
    let cx1_inv = mat_pow(&cx1, -1);
    let s = sft2(ring)?;
    let first = kron(&gi, &g) * &c1x_inv * kron(&f, &id) * &c1x;
    let second = &cx1_inv * kron(&id, &f) * &cx1 * kron(&g, &gi);
    let mut e0 = linalg::zeros(ring.d * ring.d, 1);
    e0[(0, 0)] = C64::new(1.0, 0.0);
    let bell_lhs = &s * &e0;
    let bell_rhs = &c1x_inv * kron(&f, &id) * &e0;
    Ok(Sft2Report { first: max_diff(&s, &first), second: max_diff(&s, &second), bell: max_diff(&bell_lhs, &bell_rhs) })
}

fn b23(ring: &PhaseRing, phase: C64) -> Result<f64> {
    let (_, gi, _, _) = two(ring);
    let id = linalg::identity(ring.d);
    let b = braid_op(ring, 2, 2, BraidSign::Negative)?.matrix;
    let rhs = kron(&id, &gi) * sft2(ring)? * kron(&gi, &id);
    Ok(max_diff(&b, &rhs.map(|z| z * phase)))
}

/// Residual of b_{2,3,−} = ω (1⊗G^{−1}) 𝔉ₛ (G^{−1}⊗1).
pub fn verify_braid_clifford(ring: &PhaseRing) -> Result<f64> {
    b23(ring, ring.omega)
}

/// Residual of b_{2,3,−} = ω^{1/2} (1⊗G^{−1}) 𝔉ₛ (G^{−1}⊗1).
pub fn verify_braid_clifford_corrected(ring: &PhaseRing) -> Result<f64> {
    b23(ring, ring.omega_sqrt)
}

/// Outcome of a closure search.
#[derive(Clone, Debug)]
pub struct GroupReport {
    pub d: usize,
    pub n: usize,
    /// Elements found (modulo phase).
    pub order: usize,
    /// True if the search stopped at the cap before closing.
    pub cap_hit: bool,
    pub generators: usize,
    /// Membership of C_Z, CNOT (d = 2 only) and b_{2,3,−}; two-qudit searches only.
    pub has_cz: Option<bool>,
    pub has_cnot: Option<bool>,
    pub has_b23: Option<bool>,
    keys: HashSet<Vec<(i64, i64)>>,
}

impl GroupReport {
    /// Whether `u` (up to phase) was reached.
    pub fn contains(&self, u: &Mat) -> bool {
        self.keys.contains(&PhaselessUnitary::new(self.d, self.n, u).key())
    }
}

/// Breadth-first closure of the generators modulo global phase, stopping
/// after `cap` elements.
pub fn generate_group(ring: &PhaseRing, n: usize, generators: &[Mat], cap: usize) -> Result<GroupReport> {
    let d = ring.d;
    let dim = state_dim(d, n)?;
    if dim > 81 {
        return Err(Error::TooLarge(dim));
    }
    for g in generators {
        if g.nrows() != dim || g.ncols() != dim {
            return Err(Error::Width(format!("generator is {}x{}, expected {dim}", g.nrows(), g.ncols())));
        }
        let r = linalg::unitarity_residual(g);
        if r > 1e-8 {
            return Err(Error::NotUnitary(r));
        }
    }
    let start = PhaselessUnitary::new(d, n, &linalg::identity(dim));
    let mut keys = HashSet::new();
    keys.insert(start.key());
    let mut queue = VecDeque::from([start.matrix]);
    let mut cap_hit = false;
    'bfs: while let Some(u) = queue.pop_front() {
        for g in generators {
            let next = PhaselessUnitary::new(d, n, &(g * &u));
            if keys.insert(next.key()) {
                if keys.len() >= cap {
                    cap_hit = true;
                    break 'bfs;
                }
                queue.push_back(next.matrix);
            }
        }
    }
    let mut rep = GroupReport {
        d,
        n,
        order: keys.len(),
        cap_hit,
        generators: generators.len(),
        has_cz: None,
        has_cnot: None,
        has_b23: None,
        keys,
    };
    if n == 2 {
        rep.has_cz = Some(rep.contains(&cz_gate(ring)));
        if d == 2 {
            rep.has_cnot = Some(rep.contains(&controlled_matrix(d, &pauli_gate(ring, Pauli::X))));
        }
        rep.has_b23 = Some(rep.contains(&braid_op(ring, 2, 2, BraidSign::Negative)?.matrix));
    }
    Ok(rep)
}

/// X, Y, Z, F, G on every qudit plus 𝔉ₛ on the whole register.
pub fn standard_generators(ring: &PhaseRing, n: usize) -> Result<Vec<Mat>> {
    let mut out = vec![];
    for j in 0..n {
        for m in [
            pauli_gate(ring, Pauli::X),
            pauli_gate(ring, Pauli::Y),
            pauli_gate(ring, Pauli::Z),
            fourier_gate(ring),
            gaussian_gate(ring),
        ] {
            out.push(crate::sim::gates::embed(ring.d, n, &[j], &m)?.matrix);
        }
    }
    if n > 1 {
        out.push(sft_gate(ring, n, SftMethod::MatrixFormula)?.matrix);
    }
    Ok(out)
}

/// If `v` is λ·(X^a Z^b) for a Pauli word, returns true.
fn is_pauli_word(ring: &PhaseRing, n: usize, v: &Mat, tol: f64) -> bool {
    let d = ring.d;
    let dim = v.nrows();
    // X part from where |0⟩ goes
    let Some(r0) = (0..dim).find(|&r| v[(r, 0)].norm() > 0.5) else {
        return false;
    };
    let a = linalg::digits(r0, d, n);
    let lambda = v[(r0, 0)];
    // predicted phase on column i: λ q^{b·digits(i)}; read b from unit columns
    let mut b = vec![0i64; n];
    for j in 0..n {
        let mut e = vec![0; n];
        e[j] = 1;
        let col = linalg::index_of(&e, d);
        let row: Vec<usize> = e.iter().zip(&a).map(|(x, y)| (x + y) % d).collect();
        let z = v[(linalg::index_of(&row, d), col)] / lambda;
        let ang = z.arg() / (2.0 * std::f64::consts::PI) * d as f64;
        b[j] = ang.round().rem_euclid(d as f64) as i64;
    }
    for col in 0..dim {
        let k = linalg::digits(col, d, n);
        let row: Vec<usize> = k.iter().zip(&a).map(|(x, y)| (x + y) % d).collect();
        let r = linalg::index_of(&row, d);
        let qe: i64 = k.iter().zip(&b).map(|(&x, &y)| x as i64 * y).sum();
        let want = lambda * ring.q_pow(qe);
        for rr in 0..dim {
            let expect = if rr == r { want } else { C64::new(0.0, 0.0) };
            if (v[(rr, col)] - expect).norm() > tol {
                return false;
            }
        }
    }
    true
}

/// True iff U X_j U† and U Z_j U† are phases times Pauli words for every j.
pub fn is_clifford(ring: &PhaseRing, u: &QOperator) -> Result<bool> {
    let r = linalg::unitarity_residual(&u.matrix);
    if r > 1e-8 {
        return Err(Error::NotUnitary(r));
    }
    let n = u.n_in;
    let ud = u.matrix.adjoint();
    for j in 0..n {
        for p in [Pauli::X, Pauli::Z] {
            let pj = crate::sim::gates::embed(ring.d, n, &[j], &pauli_gate(ring, p))?.matrix;
            let v = &u.matrix * pj * &ud;
            if !is_pauli_word(ring, n, &v, 1e-8) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::make_phase_ring;

    #[test]
    fn corrected_identities_hold() {
        for d in [2, 3, 5] {
            let r = make_phase_ring(d).unwrap();
            assert!(verify_fsclifford1_corrected(&r).unwrap() < 1e-9, "d={d}");
            assert!(verify_braid_clifford_corrected(&r).unwrap() < 1e-9, "d={d}");
            assert!(verify_sft2(&r).unwrap().max() < 1e-9, "d={d}");
        }
    }

    #[test]
    fn canonical_form_ignores_phase() {
        let r = make_phase_ring(3).unwrap();
        let f = fourier_gate(&r);
        let a = PhaselessUnitary::new(3, 1, &f);
        let b = PhaselessUnitary::new(3, 1, &f.map(|z| z * C64::from_polar(1.0, 1.234)));
        assert_eq!(a.key(), b.key());
        let again = PhaselessUnitary::new(3, 1, &a.matrix);
        assert_eq!(again.key(), a.key());
    }

    #[test]
    fn closure_reaches_cz_and_repeats_under_reordering() {
        let r = make_phase_ring(2).unwrap();
        let g1 = standard_generators(&r, 1).unwrap();
        let a = generate_group(&r, 1, &g1, 10_000).unwrap();
        assert!(!a.cap_hit);
        assert!(a.contains(&fourier_gate(&r)) && a.contains(&gaussian_gate(&r)));
        let mut rev = g1.clone();
        rev.reverse();
        assert_eq!(generate_group(&r, 1, &rev, 10_000).unwrap().order, a.order);

        let g2 = standard_generators(&r, 2).unwrap();
        let b = generate_group(&r, 2, &g2, 100_000).unwrap();
        assert!(!b.cap_hit);
        assert_eq!(b.has_cz, Some(true));
        assert_eq!(b.has_cnot, Some(true));
        assert_eq!(b.has_b23, Some(true));
        let small = generate_group(&r, 2, &g2, 10).unwrap();
        assert!(small.cap_hit && small.order == 10);
    }

    #[test]
    fn pauli_words_detected() {
        let r = make_phase_ring(3).unwrap();
        let x = pauli_gate(&r, Pauli::X);
        let z = pauli_gate(&r, Pauli::Z);
        let w = kron(&(&x * &z), &mat_pow(&z, 2)).map(|c| c * r.zeta);
        assert!(is_pauli_word(&r, 2, &w, 1e-9));
        assert!(!is_pauli_word(&r, 1, &fourier_gate(&r), 1e-9));
    }

    #[test]
    fn clifford_membership() {
        for d in [2, 3] {
            let r = make_phase_ring(d).unwrap();
            for n in [1, 2] {
                let f = sft_gate(&r, n, SftMethod::MatrixFormula).unwrap();
                assert!(is_clifford(&r, &f).unwrap());
                assert!(is_clifford(&r, &QOperator::identity(d, n)).unwrap());
            }
        }
        let r = make_phase_ring(2).unwrap();
        let mut t = linalg::identity(2);
        t[(1, 1)] = C64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        assert!(!is_clifford(&r, &QOperator::square(2, 1, t).unwrap()).unwrap());
    }
}
