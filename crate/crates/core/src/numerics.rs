//! Roots of unity and the scalars every amplitude is built from.
//!
//! With ε = e^{iπ/d} we have q = ε², ζ a square root of q with ζ^{d²} = 1,
//! and ω = d^{-1/2} Σ_j ζ^{j²}. Powers of q, ζ and ε are always reduced on
//! the integer exponent before any floating point work happens.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Which root a [`PhaseRing::phase_pow`] call raises.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Base {
    Q,
    Zeta,
    Epsilon,
    Omega,
}

/// The scalar system for a fixed qudit degree `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseRing {
    pub d: usize,
    pub q: C64,
    pub zeta: C64,
    pub epsilon: C64,
    pub omega: C64,
    pub omega_sqrt: C64,
    /// ζ = ε^zeta_exp (1 for even d, d + 1 for odd d).
    zeta_exp: i64,
}

/// Build the ring for degree `d`.
pub fn make_phase_ring(d: usize) -> Result<PhaseRing> {
    PhaseRing::new(d)
}

impl PhaseRing {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::BadDegree(d));
        }
        let zeta_exp = if d % 2 == 0 { 1 } else { d as i64 + 1 };
        let mut ring = PhaseRing {
            d,
            q: C64::new(0.0, 0.0),
            zeta: C64::new(0.0, 0.0),
            epsilon: C64::new(0.0, 0.0),
            omega: C64::new(0.0, 0.0),
            omega_sqrt: C64::new(0.0, 0.0),
            zeta_exp,
        };
        ring.epsilon = ring.eps_pow(1);
        ring.q = ring.q_pow(1);
        ring.zeta = ring.zeta_pow(1);
        let sum: C64 = (0..d as i64).map(|j| ring.zeta_pow(j * j)).sum();
        ring.omega = sum / (d as f64).sqrt();
        // principal branch: half of arg ω with arg in (-π, π]
        let (r, theta) = ring.omega.to_polar();
        ring.omega_sqrt = C64::from_polar(r.sqrt(), theta / 2.0);
        Ok(ring)
    }

    /// Order of ε (and of ζ's ambient group): 2d.
    pub fn two_d(&self) -> i64 {
        2 * self.d as i64
    }

    /// ε^e, with e reduced mod 2d first.
    pub fn eps_pow(&self, e: i64) -> C64 {
        let m = e.rem_euclid(self.two_d());
        C64::from_polar(1.0, PI * m as f64 / self.d as f64)
    }

    /// q^e = ε^{2e}.
    pub fn q_pow(&self, e: i64) -> C64 {
        self.eps_pow(2 * e.rem_euclid(self.d as i64))
    }

    /// ζ^e.
    pub fn zeta_pow(&self, e: i64) -> C64 {
        self.eps_pow(self.zeta_eps(e))
    }

    /// The ε-exponent of ζ^e, reduced mod 2d.
    pub fn zeta_eps(&self, e: i64) -> i64 {
        (e.rem_euclid(self.two_d()) * self.zeta_exp).rem_euclid(self.two_d())
    }

    /// The ε-exponent of q^e, reduced mod 2d.
    pub fn q_eps(&self, e: i64) -> i64 {
        (2 * e).rem_euclid(self.two_d())
    }

    /// ω^e. ω is an eighth root of unity, so e is reduced mod 8.
    pub fn omega_pow(&self, e: i64) -> C64 {
        self.omega.powi(e.rem_euclid(8) as i32)
    }

    /// ω^{e/2} on the fixed branch of ω^{1/2}.
    pub fn omega_half_pow(&self, e: i64) -> C64 {
        self.omega_sqrt.powi(e.rem_euclid(16) as i32)
    }

    /// Exact-exponent power of one of the named roots.
    pub fn phase_pow(&self, base: Base, e: i64) -> C64 {
        match base {
            Base::Q => self.q_pow(e),
            Base::Zeta => self.zeta_pow(e),
            Base::Epsilon => self.eps_pow(e),
            Base::Omega => self.omega_pow(e),
        }
    }

    /// √d.
    pub fn sqrt_d(&self) -> f64 {
        (self.d as f64).sqrt()
    }

    /// d^{e/4}.
    pub fn quarter_pow(&self, e: i64) -> f64 {
        (self.d as f64).powf(e as f64 / 4.0)
    }

    /// Reduce an integer mod d into 0..d.
    pub fn modd(&self, k: i64) -> i64 {
        k.rem_euclid(self.d as i64)
    }
}

/// |LHS − RHS| for d^{-1/2} Σ_k q^{kℓ} ζ^{k²} = ω ζ^{-ℓ²}.
pub fn gauss_identity_residual(ring: &PhaseRing, l: i64) -> f64 {
    let d = ring.d as i64;
    let lhs: C64 = (0..d).map(|k| ring.q_pow(k * l) * ring.zeta_pow(k * k)).sum::<C64>() / ring.sqrt_d();
    let rhs = ring.omega * ring.zeta_pow(-l * l);
    (lhs - rhs).norm()
}

/// Free-function form of [`PhaseRing::phase_pow`].
pub fn phase_pow(ring: &PhaseRing, base: Base, e: i64) -> C64 {
    ring.phase_pow(base, e)
}
