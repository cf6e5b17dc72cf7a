//! Max and GHZ resource states, their bases, and entanglement entropy.

use crate::error::{Error, Result};
use crate::linalg::{self, c, Mat, C64};
use crate::numerics::PhaseRing;
use crate::sim::state::{check_sites, state_dim, QState};

/// Eigenvalues below this are treated as zero in the entropy.
pub const ENTROPY_CUTOFF: f64 = 1e-12;

/// A density matrix on `n` qudits.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    pub d: usize,
    pub n: usize,
    pub matrix: Mat,
}

impl DensityMatrix {
    /// |ψ⟩⟨ψ| for a normalised copy of ψ.
    pub fn from_state(s: &QState) -> Self {
        let s = s.normalized();
        let v = Mat::from_column_slice(s.dim(), 1, &s.amps);
        DensityMatrix { d: s.d, n: s.n, matrix: &v * v.adjoint() }
    }

    /// Check hermiticity, unit trace and positivity.
    pub fn validate(&self) -> Result<()> {
        let herm = linalg::max_diff(&self.matrix, &self.matrix.adjoint());
        if herm > 1e-10 {
            return Err(Error::Invalid(format!("not Hermitian (residual {herm:.3e})")));
        }
        let tr = self.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(Error::Invalid(format!("trace is {tr}")));
        }
        if let Some(min) = self.eigenvalues().into_iter().reduce(f64::min) {
            if min < -1e-9 {
                return Err(Error::Invalid(format!("negative eigenvalue {min:.3e}")));
            }
        }
        Ok(())
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.matrix + self.matrix.adjoint()).map(|z| z * 0.5);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().cloned().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }
}

/// Reduced density matrix on the 0-based sites in `keep`, in that order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::Invalid("partial trace needs at least one kept site".into()));
    }
    check_sites(rho.n, keep)?;
    let (d, n) = (rho.d, rho.n);
    let traced: Vec<usize> = (0..n).filter(|s| !keep.contains(s)).collect();
    let kd = d.pow(keep.len() as u32);
    let td = d.pow(traced.len() as u32);
    let full_index = |kdig: &[usize], tdig: &[usize]| {
        let mut full = vec![0; n];
        for (j, &s) in keep.iter().enumerate() {
            full[s] = kdig[j];
        }
        for (j, &s) in traced.iter().enumerate() {
            full[s] = tdig[j];
        }
        linalg::index_of(&full, d)
    };
    let mut out = linalg::zeros(kd, kd);
    for r in 0..kd {
        let rd = linalg::digits(r, d, keep.len());
        for col in 0..kd {
            let cd = linalg::digits(col, d, keep.len());
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..td {
                let tdig = linalg::digits(t, d, traced.len());
                acc += rho.matrix[(full_index(&rd, &tdig), full_index(&cd, &tdig))];
            }
            out[(r, col)] = acc;
        }
    }
    Ok(DensityMatrix { d, n: keep.len(), matrix: out })
}

/// Von Neumann entropy in nats, −Σ λ ln λ over eigenvalues above the cutoff.
pub fn entropy(rho: &DensityMatrix) -> f64 {
    rho.eigenvalues().into_iter().filter(|&l| l > ENTROPY_CUTOFF).map(|l| -l * l.ln()).sum()
}

/// Entropy of the reduction of a pure state to `keep`.
pub fn entanglement_entropy(s: &QState, keep: &[usize]) -> Result<f64> {
    Ok(entropy(&partial_trace(&DensityMatrix::from_state(s), keep)?))
}

fn check_charges(d: usize, ks: &[i64]) -> Result<()> {
    if ks.is_empty() {
        return Err(Error::Invalid("need at least one qudit".into()));
    }
    for &k in ks {
        if k < 0 || k >= d as i64 {
            return Err(Error::Range(format!("charge {k} outside 0..{d}")));
        }
    }
    Ok(())
}

/// d^{−(n−1)/2} Σ_{|ℓ| ≡ 0} |ℓ⟩.
pub fn max_state(ring: &PhaseRing, n: usize) -> Result<QState> {
    max_basis(ring, &vec![0; n])
}

/// d^{−1/2} Σ_k |k, …, k⟩.
pub fn ghz_state(ring: &PhaseRing, n: usize) -> Result<QState> {
    ghz_basis(ring, &vec![0; n])
}

/// |Max_k⟩ = ζ^{−|k|²} d^{−(n−1)/2} Σ_{|ℓ| ≡ |k|} q^{Σ_j (k_1+⋯+k_j) ℓ_j} |ℓ⟩,
/// |k| the integer digit sum.
pub fn max_basis(ring: &PhaseRing, ks: &[i64]) -> Result<QState> {
    let d = ring.d;
    check_charges(d, ks)?;
    let n = ks.len();
    let dim = state_dim(d, n)?;
    let ksum: i64 = ks.iter().sum();
    let pref = (d as f64).powf(-((n - 1) as f64) / 2.0);
    let partial: Vec<i64> = ks.iter().scan(0, |acc, &k| {
        *acc += k;
        Some(*acc)
    }).collect();
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    for (i, a) in amps.iter_mut().enumerate() {
        let ls = linalg::digits(i, d, n);
        let lsum: i64 = ls.iter().map(|&x| x as i64).sum();
        if (lsum - ksum).rem_euclid(d as i64) != 0 {
            continue;
        }
        let qe: i64 = ls.iter().zip(&partial).map(|(&l, &p)| l as i64 * p).sum();
        *a = ring.eps_pow(ring.zeta_eps(-ksum * ksum) + ring.q_eps(qe)) * c(pref, 0.0);
    }
    QState::from_amps(d, n, amps)
}

/// |GHZ_k⟩ = ζ^{−|k|²} d^{−1/2} Σ_s q^{−s|k|} |k_1+s, k_1+k_2+s, …, |k|+s⟩.
pub fn ghz_basis(ring: &PhaseRing, ks: &[i64]) -> Result<QState> {
    let d = ring.d;
    check_charges(d, ks)?;
    let n = ks.len();
    let dim = state_dim(d, n)?;
    let ksum: i64 = ks.iter().sum();
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    for s in 0..d as i64 {
        let mut acc = 0;
        let digits: Vec<usize> = ks
            .iter()
            .map(|&k| {
                acc += k;
                (acc + s).rem_euclid(d as i64) as usize
            })
            .collect();
        let e = ring.zeta_eps(-ksum * ksum) + ring.q_eps(-s * ksum);
        amps[linalg::index_of(&digits, d)] += ring.eps_pow(e) / ring.sqrt_d();
    }
    QState::from_amps(d, n, amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::make_phase_ring;

    #[test]
    fn bell_and_ghz_qubits() {
        let r = make_phase_ring(2).unwrap();
        let h = 1.0 / 2f64.sqrt();
        let bell = QState::from_amps(2, 2, vec![c(h, 0.), c(0., 0.), c(0., 0.), c(h, 0.)]).unwrap();
        assert!(max_state(&r, 2).unwrap().max_diff(&bell) < 1e-12);
        assert!(ghz_state(&r, 2).unwrap().max_diff(&bell) < 1e-12);
        let g3 = ghz_state(&r, 3).unwrap();
        assert!((g3.amps[0].re - h).abs() < 1e-12 && (g3.amps[7].re - h).abs() < 1e-12);
    }

    #[test]
    fn max3_qutrit_has_nine_terms() {
        let r = make_phase_ring(3).unwrap();
        let m = max_state(&r, 3).unwrap();
        let nz: Vec<_> = m.amps.iter().filter(|z| z.norm() > 1e-12).collect();
        assert_eq!(nz.len(), 9);
        assert!(nz.iter().all(|z| (**z - c(1.0 / 3.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn entropy_extremes() {
        let r = make_phase_ring(3).unwrap();
        let pure = DensityMatrix::from_state(&QState::basis(3, &[1, 2]).unwrap());
        assert!(entropy(&pure).abs() < 1e-12);
        let mixed = partial_trace(&DensityMatrix::from_state(&max_state(&r, 2).unwrap()), &[0]).unwrap();
        assert!(linalg::max_diff(&mixed.matrix, &linalg::identity(3).map(|z| z / 3.0)) < 1e-12);
        assert!((entropy(&mixed) - 3f64.ln()).abs() < 1e-10);
        mixed.validate().unwrap();
        assert!(partial_trace(&pure, &[]).is_err());
    }

    #[test]
    fn charges_are_range_checked() {
        let r = make_phase_ring(3).unwrap();
        assert!(matches!(max_basis(&r, &[3, 0]), Err(Error::Range(_))));
        assert!(matches!(ghz_basis(&r, &[-1]), Err(Error::Range(_))));
    }
}
