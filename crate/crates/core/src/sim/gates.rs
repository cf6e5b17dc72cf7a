//! Named gates and their placement on a register.

use crate::error::{Error, Result};
use crate::evaluator::{braid_op, BraidSign};
use crate::linalg::{self, c, mat_pow, Mat};
use crate::numerics::PhaseRing;
use crate::sim::sft::{sft_gate, SftMethod};
use crate::sim::state::{check_sites, QOperator, QState};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// X|k⟩ = |k+1⟩, Y|k⟩ = ζ^{1-2k}|k-1⟩, Z|k⟩ = q^k|k⟩, with k in 0..d.
pub fn pauli_gate(ring: &PhaseRing, which: Pauli) -> Mat {
    let d = ring.d;
    let mut m = linalg::zeros(d, d);
    for k in 0..d {
        let ki = k as i64;
        match which {
            Pauli::X => m[((k + 1) % d, k)] = c(1.0, 0.0),
            Pauli::Y => m[((k + d - 1) % d, k)] = ring.zeta_pow(1 - 2 * ki),
            Pauli::Z => m[(k, k)] = ring.q_pow(ki),
        }
    }
    m
}

/// F|k⟩ = d^{-1/2} Σ_ℓ q^{kℓ}|ℓ⟩.
pub fn fourier_gate(ring: &PhaseRing) -> Mat {
    let d = ring.d;
    Mat::from_fn(d, d, |l, k| ring.q_pow((k * l) as i64) / ring.sqrt_d())
}

/// G|k⟩ = ζ^{k²}|k⟩.
pub fn gaussian_gate(ring: &PhaseRing) -> Mat {
    let d = ring.d;
    Mat::from_fn(d, d, |i, j| if i == j { ring.zeta_pow((i * i) as i64) } else { c(0.0, 0.0) })
}

/// Which qudit of the pair holds the control.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ControlFlavor {
    /// C_{1,A}|k₁,k₂⟩ = |k₁, A^{k₁}k₂⟩: the first site controls the second.
    FirstControls,
    /// C_{A,1}|k₁,k₂⟩ = |A^{k₂}k₁, k₂⟩: the second site controls the first.
    SecondControls,
}

/// Σ_ℓ |ℓ⟩⟨ℓ| ⊗ A^ℓ as a two-qudit matrix (control first).
pub fn controlled_matrix(d: usize, a: &Mat) -> Mat {
    let mut out = linalg::zeros(d * d, d * d);
    let mut pow = linalg::identity(d);
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                out[(l * d + i, l * d + j)] = pow[(i, j)];
            }
        }
        pow = a * &pow;
    }
    out
}

/// Controlled gate on an `n`-qudit register. With `FirstControls`, `a`
/// controls `b`; with `SecondControls`, `b` controls `a`.
pub fn controlled_gate(ring: &PhaseRing, n: usize, a: usize, b: usize, op: &Mat, flavor: ControlFlavor) -> Result<QOperator> {
    if a == b {
        return Err(Error::SiteClash(a + 1));
    }
    check_sites(n, &[a, b])?;
    let (ctl, tgt) = match flavor {
        ControlFlavor::FirstControls => (a, b),
        ControlFlavor::SecondControls => (b, a),
    };
    let local = controlled_matrix(ring.d, op);
    embed(ring.d, n, &[ctl, tgt], &local)
}

/// C_Z|k₁,k₂⟩ = q^{k₁k₂}|k₁,k₂⟩.
pub fn cz_gate(ring: &PhaseRing) -> Mat {
    controlled_matrix(ring.d, &pauli_gate(ring, Pauli::Z))
}

/// b_m|k,l⟩ = q^{mkl}|l,k⟩.
pub fn sym_matrix(ring: &PhaseRing, m: i64) -> Mat {
    let d = ring.d;
    let mut out = linalg::zeros(d * d, d * d);
    for k in 0..d {
        for l in 0..d {
            out[(l * d + k, k * d + l)] = ring.q_pow(m * (k * l) as i64);
        }
    }
    out
}

/// b_m on qudits (j, j+1) of an `n`-qudit register (j 0-based).
pub fn sym_gate(ring: &PhaseRing, n: usize, j: usize, m: i64) -> Result<QOperator> {
    if j + 1 >= n {
        return Err(Error::Range(format!("symmetry at qudit {} needs a right neighbour in {n}", j + 1)));
    }
    embed(ring.d, n, &[j, j + 1], &sym_matrix(ring, m))
}

/// Full matrix of a local gate on the listed sites.
pub fn embed(d: usize, n: usize, sites: &[usize], local: &Mat) -> Result<QOperator> {
    check_sites(n, sites)?;
    let dim = crate::sim::state::state_dim(d, n)?;
    let mut m = linalg::identity(dim);
    for col in 0..dim {
        let mut column: Vec<_> = m.column(col).iter().cloned().collect();
        crate::sim::state::apply_local_raw(&mut column, d, n, sites, local);
        m.column_mut(col).copy_from_slice(&column);
    }
    QOperator::square(d, n, m)
}

/// Symbolic gate kinds.
#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    X,
    Y,
    Z,
    F,
    G,
    /// Controlled `base`; `sites[0]`, `sites[1]` are read per the flavor.
    Controlled { base: Box<GateKind>, flavor: ControlFlavor },
    CZ,
    /// Braid on strands (s, s+1), s = `sites[0]` as a 1-based strand index.
    Braid { positive: bool },
    /// b_m on qudits (sites[0], sites[0] + 1).
    Sym { m: i64 },
    /// The string Fourier transform on the listed contiguous sites.
    Sft,
    Custom(Mat),
}

/// A gate with its placement and an integer power.
#[derive(Clone, Debug, PartialEq)]
pub struct GateSpec {
    pub kind: GateKind,
    pub sites: Vec<usize>,
    pub power: i64,
}

impl GateSpec {
    pub fn new(kind: GateKind, sites: Vec<usize>) -> Self {
        GateSpec { kind, sites, power: 1 }
    }

    pub fn pow(mut self, power: i64) -> Self {
        self.power = power;
        self
    }

    /// The qudits touched and the local matrix (power applied).
    pub fn local(&self, ring: &PhaseRing, n: usize) -> Result<(Vec<usize>, Mat)> {
        let (sites, base) = self.local_base(ring, n)?;
        check_sites(n, &sites)?;
        Ok((sites, mat_pow(&base, self.power)))
    }

    fn local_base(&self, ring: &PhaseRing, n: usize) -> Result<(Vec<usize>, Mat)> {
        let one = |what: &str| -> Result<usize> {
            match self.sites.as_slice() {
                [s] => Ok(*s),
                _ => Err(Error::Invalid(format!("{what} takes one site"))),
            }
        };
        Ok(match &self.kind {
            GateKind::X => (vec![one("X")?], pauli_gate(ring, Pauli::X)),
            GateKind::Y => (vec![one("Y")?], pauli_gate(ring, Pauli::Y)),
            GateKind::Z => (vec![one("Z")?], pauli_gate(ring, Pauli::Z)),
            GateKind::F => (vec![one("F")?], fourier_gate(ring)),
            GateKind::G => (vec![one("G")?], gaussian_gate(ring)),
            GateKind::Custom(m) => (self.sites.clone(), m.clone()),
            GateKind::CZ | GateKind::Controlled { .. } => {
                let (a, b) = match self.sites.as_slice() {
                    [a, b] => (*a, *b),
                    _ => return Err(Error::Invalid("controlled gates take two sites".into())),
                };
                if a == b {
                    return Err(Error::SiteClash(a + 1));
                }
                match &self.kind {
                    GateKind::CZ => (vec![a, b], cz_gate(ring)),
                    GateKind::Controlled { base, flavor } => {
                        let inner = GateSpec::new((**base).clone(), vec![0]).local_base(ring, 1)?.1;
                        let (ctl, tgt) = match flavor {
                            ControlFlavor::FirstControls => (a, b),
                            ControlFlavor::SecondControls => (b, a),
                        };
                        (vec![ctl, tgt], controlled_matrix(ring.d, &inner))
                    }
                    _ => unreachable!(),
                }
            }
            GateKind::Braid { positive } => {
                let s = one("braid")?;
                let sign = if *positive { BraidSign::Positive } else { BraidSign::Negative };
                if s == 0 || s >= 2 * n {
                    return Err(Error::Range(format!("braid strand {s} of {}", 2 * n)));
                }
                if s % 2 == 1 {
                    (vec![(s - 1) / 2], braid_op(ring, 1, 1, sign)?.matrix)
                } else {
                    (vec![s / 2 - 1, s / 2], braid_op(ring, 2, 2, sign)?.matrix)
                }
            }
            GateKind::Sym { m } => {
                let j = one("sym")?;
                (vec![j, j + 1], sym_matrix(ring, *m))
            }
            GateKind::Sft => {
                let sites = self.sites.clone();
                if sites.is_empty() || sites.windows(2).any(|w| w[1] != w[0] + 1) {
                    return Err(Error::Invalid("SFT needs contiguous increasing sites".into()));
                }
                let k = sites.len();
                (sites, sft_gate(ring, k, SftMethod::MatrixFormula)?.matrix)
            }
        })
    }

    /// Apply to a state in place.
    pub fn apply(&self, ring: &PhaseRing, s: &mut QState) -> Result<()> {
        let (sites, m) = self.local(ring, s.n)?;
        s.apply_local(&sites, &m)
    }

    /// Full operator on `n` qudits (verification mode).
    pub fn operator(&self, ring: &PhaseRing, n: usize) -> Result<QOperator> {
        let (sites, m) = self.local(ring, n)?;
        embed(ring.d, n, &sites, &m)
    }
}
