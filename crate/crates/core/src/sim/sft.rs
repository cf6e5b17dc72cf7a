//! The string Fourier transform, built two independent ways.

use crate::error::Result;
use crate::evaluator::{braid_op, BraidSign};
use crate::linalg::{self, c, Mat};
use crate::numerics::PhaseRing;
use crate::sim::state::{state_dim, QOperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SftMethod {
    /// ω^{1/2} b₋(2n−1) ⋯ b₋(1): the rotation written as local braids.
    BraidProduct,
    /// The closed-form matrix elements.
    MatrixFormula,
}

/// ⟨ℓ|𝔉ₛ|k⟩ = d^{(1−n)/2} ζ^{|ℓ|²} Π_{j₁<j₂} q^{−ℓ_{j₁}k_{j₂}} when |ℓ| ≡ |k| (mod d),
/// with |ℓ| the integer sum of the digits.
pub fn sft_matrix(ring: &PhaseRing, n: usize) -> Result<Mat> {
    let d = ring.d;
    let dim = state_dim(d, n)?;
    let pref = (d as f64).powf((1.0 - n as f64) / 2.0);
    let mut m = linalg::zeros(dim, dim);
    for row in 0..dim {
        let l = linalg::digits(row, d, n);
        let lsum: i64 = l.iter().map(|&x| x as i64).sum();
        for col in 0..dim {
            let k = linalg::digits(col, d, n);
            let ksum: i64 = k.iter().map(|&x| x as i64).sum();
            if (lsum - ksum).rem_euclid(d as i64) != 0 {
                continue;
            }
            let mut qexp = 0i64;
            for j1 in 0..n {
                for j2 in j1 + 1..n {
                    qexp -= (l[j1] * k[j2]) as i64;
                }
            }
            let eps = ring.zeta_eps(lsum * lsum) + ring.q_eps(qexp);
            m[(row, col)] = ring.eps_pow(eps) * c(pref, 0.0);
        }
    }
    Ok(m)
}

/// 𝔉ₛ on `n` qudits.
pub fn sft_gate(ring: &PhaseRing, n: usize, method: SftMethod) -> Result<QOperator> {
    let m = match method {
        SftMethod::MatrixFormula => sft_matrix(ring, n)?,
        SftMethod::BraidProduct => {
            let dim = state_dim(ring.d, n)?;
            let mut u = linalg::identity(dim);
            for s in 1..2 * n {
                let b = braid_op(ring, n, s, BraidSign::Negative)?;
                u = &b.matrix * u;
            }
            u.map(|z| z * ring.omega_sqrt)
        }
    };
    QOperator::square(ring.d, n, m)
}
