//! Compiling diagrams to qudit operators through the Jordan-Wigner map.
//!
//! Strands are numbered left to right; qudit j (1-based) owns strands
//! 2j−1 (left) and 2j (right). A charge k on the right strand of qudit j
//! is X^k on qudit j, on the left strand it is Y^{−k}; both carry Z^k on
//! every later qudit. Everything here is a monomial, so charges are
//! applied as permutations with ε-power phases and never as dense
//! matrices.

use std::collections::HashMap;

use crate::diagram::{adjoint, compose, Diagram, Elem, Generator};
use crate::error::{Error, Result};
use crate::linalg::{self, c, Mat, C64};
use crate::numerics::PhaseRing;
use crate::sim::gates::{cz_gate, fourier_gate, gaussian_gate, pauli_gate, sym_matrix, Pauli};
use crate::sim::sft::sft_matrix;
pub use crate::sim::state::QOperator;
use crate::sim::state::{apply_local_raw, state_dim};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A strand named by its qudit (1-based) and side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StringSite {
    pub qudit: usize,
    pub side: Side,
}

impl StringSite {
    pub fn new(qudit: usize, side: Side) -> Self {
        StringSite { qudit, side }
    }

    /// From a 1-based strand index.
    pub fn from_strand(s: usize) -> Self {
        let side = if s % 2 == 1 { Side::Left } else { Side::Right };
        StringSite { qudit: s.div_ceil(2), side }
    }

    /// 1-based strand index.
    pub fn strand(&self) -> usize {
        match self.side {
            Side::Left => 2 * self.qudit - 1,
            Side::Right => 2 * self.qudit,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BraidSign {
    Positive,
    Negative,
}

/// `|i⟩ ↦ ε^{eps[i]} |target[i]⟩`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Monomial {
    target: Vec<usize>,
    eps: Vec<i64>,
}

impl Monomial {
    pub(crate) fn identity(dim: usize) -> Self {
        Monomial { target: (0..dim).collect(), eps: vec![0; dim] }
    }

    /// c_s^k on `n` qudits, `s` a 0-based strand.
    pub(crate) fn charge(ring: &PhaseRing, n: usize, s: usize, k: i64) -> Self {
        let d = ring.d;
        let dim = d.pow(n as u32);
        let j = s / 2;
        let kk = k.rem_euclid(d as i64) as usize;
        let mut target = Vec::with_capacity(dim);
        let mut eps = Vec::with_capacity(dim);
        for i in 0..dim {
            let mut ds = linalg::digits(i, d, n);
            let tail: i64 = ds[j + 1..].iter().map(|&x| x as i64).sum();
            let mut e = ring.q_eps(kk as i64 * tail);
            if s % 2 == 0 {
                // Y^{-1}|m⟩ = ζ^{2m+1}|m+1⟩
                let mut m = ds[j];
                for _ in 0..kk {
                    e += ring.zeta_eps(2 * m as i64 + 1);
                    m = (m + 1) % d;
                }
                ds[j] = m;
            } else {
                ds[j] = (ds[j] + kk) % d;
            }
            target.push(linalg::index_of(&ds, d));
            eps.push(e.rem_euclid(ring.two_d()));
        }
        Monomial { target, eps }
    }

    /// Z^c on every qudit from `first` (0-based) on.
    fn z_tail(ring: &PhaseRing, n: usize, first: usize, c: i64) -> Self {
        let d = ring.d;
        let dim = d.pow(n as u32);
        let eps = (0..dim)
            .map(|i| {
                let tail: i64 = linalg::digits(i, d, n)[first..].iter().map(|&x| x as i64).sum();
                ring.q_eps(c * tail)
            })
            .collect();
        Monomial { target: (0..dim).collect(), eps }
    }

    /// `self` applied after `first`.
    pub(crate) fn after(&self, first: &Monomial) -> Monomial {
        let target = first.target.iter().map(|&t| self.target[t]).collect();
        let eps = first.eps.iter().zip(&first.target).map(|(e, &t)| e + self.eps[t]).collect();
        Monomial { target, eps }
    }

    /// Left-multiply a matrix, scaled by `coef`.
    fn apply_into(&self, ring: &PhaseRing, m: &Mat, coef: C64, out: &mut Mat) {
        let rows = m.nrows();
        let src = m.as_slice();
        let dst = out.as_mut_slice();
        let phases: Vec<C64> = self.eps.iter().map(|&e| ring.eps_pow(e) * coef).collect();
        for (scol, dcol) in src.chunks(rows).zip(dst.chunks_mut(rows)) {
            for i in 0..rows {
                dcol[self.target[i]] += phases[i] * scol[i];
            }
        }
    }

    fn apply(&self, ring: &PhaseRing, m: &Mat) -> Mat {
        let mut out = linalg::zeros(m.nrows(), m.ncols());
        self.apply_into(ring, m, c(1.0, 0.0), &mut out);
        out
    }

    pub(crate) fn to_matrix(&self, ring: &PhaseRing) -> Mat {
        self.apply(ring, &linalg::identity(self.target.len()))
    }
}

/// Monomial for a word of charges; `word[0]` is applied first.
fn word_monomial(ring: &PhaseRing, n: usize, word: &[(usize, i64)]) -> Monomial {
    let mut acc = Monomial::identity(ring.d.pow(n as u32));
    for &(s, k) in word {
        acc = Monomial::charge(ring, n, s, k).after(&acc);
    }
    acc
}

/// A weighted sum of charge words, applied to a matrix.
fn apply_sum(ring: &PhaseRing, n: usize, terms: &[(C64, Vec<(usize, i64)>)], m: &Mat) -> Mat {
    let mut out = linalg::zeros(m.nrows(), m.ncols());
    for (coef, word) in terms {
        if coef.norm() == 0.0 {
            continue;
        }
        word_monomial(ring, n, word).apply_into(ring, m, *coef, &mut out);
    }
    out
}

/// Terms of the braid on 0-based strands (a, a+1).
fn braid_terms(ring: &PhaseRing, a: usize, sign: BraidSign) -> Vec<(C64, Vec<(usize, i64)>)> {
    let d = ring.d as i64;
    let sd = ring.sqrt_d();
    (0..d)
        .map(|k| match sign {
            // (ωd)^{-1/2} Σ c_{a+1}^{-k} c_a^k
            BraidSign::Positive => (ring.omega_half_pow(-1) / sd, vec![(a, k), (a + 1, -k)]),
            // ω^{1/2} d^{-1/2} Σ c_a^k c_{a+1}^{-k}
            BraidSign::Negative => (ring.omega_sqrt / sd, vec![(a + 1, -k), (a, k)]),
        })
        .collect()
}

/// Terms of the Temperley-Lieb generator on 0-based strands (a, a+1).
fn tl_terms(ring: &PhaseRing, a: usize) -> Vec<(C64, Vec<(usize, i64)>)> {
    let d = ring.d as i64;
    (0..d).map(|k| (ring.zeta_pow(k * k) / ring.sqrt_d(), vec![(a + 1, -k), (a, k)])).collect()
}

/// Insert |0⟩ as qudit `j` (0-based) of the row space.
fn insert_qudit(d: usize, n: usize, j: usize, m: &Mat) -> Mat {
    let low = d.pow((n - j) as u32);
    let mut out = linalg::zeros(m.nrows() * d, m.ncols());
    for col in 0..m.ncols() {
        for r in 0..m.nrows() {
            let (hi, lo) = (r / low, r % low);
            out[(hi * low * d + lo, col)] = m[(r, col)];
        }
    }
    out
}

/// Project qudit `j` (0-based) of the row space onto ⟨0|.
fn project_qudit(d: usize, n: usize, j: usize, m: &Mat) -> Mat {
    let low = d.pow((n - 1 - j) as u32);
    let rows = m.nrows() / d;
    let mut out = linalg::zeros(rows, m.ncols());
    for col in 0..m.ncols() {
        for r in 0..rows {
            let (hi, lo) = (r / low, r % low);
            out[(r, col)] = m[(hi * low * d + lo, col)];
        }
    }
    out
}

/// Apply a local matrix to the listed 0-based qudits of every column.
fn apply_local_cols(d: usize, n: usize, sites: &[usize], u: &Mat, m: &Mat) -> Mat {
    let mut out = m.clone();
    let rows = m.nrows();
    for col in out.as_mut_slice().chunks_mut(rows) {
        apply_local_raw(col, d, n, sites, u);
    }
    out
}

/// Parafermion expansion of a `w`-strand operator: coefficients of the
/// monomials c_0^{e_0} ⋯ c_{w−1}^{e_{w−1}} (leftmost applied last).
fn expansion(ring: &PhaseRing, t: &Mat, w: usize) -> Vec<(C64, Vec<i64>)> {
    let d = ring.d;
    let nq = w / 2;
    let norm = 1.0 / d.pow(nq as u32) as f64;
    let count = d.pow(w as u32);
    let mut out = vec![];
    for idx in 0..count {
        let es: Vec<i64> = linalg::digits(idx, d, w).into_iter().map(|x| x as i64).collect();
        let word: Vec<(usize, i64)> = es.iter().enumerate().rev().map(|(s, &e)| (s, e)).collect();
        let mono = word_monomial(ring, nq, &word);
        // Tr(M† T) = Σ_i conj(phase_i) T[target_i, i]
        let mut tr = C64::new(0.0, 0.0);
        for i in 0..mono.target.len() {
            tr += ring.eps_pow(-mono.eps[i]) * t[(mono.target[i], i)];
        }
        let coef = tr * norm;
        if coef.norm() > 1e-13 {
            out.push((coef, es));
        }
    }
    out
}

/// Charge c with Z^{⊗} T Z^{⊗−1} = q^c T, if T is homogeneous.
pub fn operator_charge(ring: &PhaseRing, t: &Mat, nq: usize) -> Option<i64> {
    let d = ring.d;
    let z = Monomial::z_tail(ring, nq, 0, 1);
    let zt = z.apply(ring, t);
    // Z T Z^{-1}: column scaling by the inverse phases
    let mut conj = zt;
    for col in 0..t.ncols() {
        let ph = ring.eps_pow(-z.eps[col]);
        for r in 0..t.nrows() {
            conj[(r, col)] *= ph;
        }
    }
    (0..d as i64).find(|&cc| linalg::max_diff(&conj, &t.map(|x| x * ring.q_pow(cc))) < 1e-9)
}

/// Named boxes available to diagrams. A trailing `*` on a name means the
/// adjoint of the registered operator.
#[derive(Clone, Debug, Default)]
pub struct BoxRegistry {
    boxes: HashMap<String, Mat>,
}

impl BoxRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// X, Y, Z, F, G, CZ, SWAP, SFT2 and SYM1 (the b₁ symmetry).
    pub fn standard(ring: &PhaseRing) -> Self {
        let mut r = BoxRegistry::new();
        r.boxes.insert("X".into(), pauli_gate(ring, Pauli::X));
        r.boxes.insert("Y".into(), pauli_gate(ring, Pauli::Y));
        r.boxes.insert("Z".into(), pauli_gate(ring, Pauli::Z));
        r.boxes.insert("F".into(), fourier_gate(ring));
        r.boxes.insert("G".into(), gaussian_gate(ring));
        r.boxes.insert("CZ".into(), cz_gate(ring));
        r.boxes.insert("SWAP".into(), sym_matrix(ring, 0));
        r.boxes.insert("SYM1".into(), sym_matrix(ring, 1));
        if let Ok(m) = sft_matrix(ring, 2) {
            r.boxes.insert("SFT2".into(), m);
        }
        r
    }

    pub fn insert(&mut self, name: &str, m: Mat) -> Result<()> {
        if name.is_empty() || name.ends_with('*') || name.contains(char::is_whitespace) || name.contains('@') {
            return Err(Error::Invalid(format!("bad box name `{name}`")));
        }
        if m.nrows() != m.ncols() {
            return Err(Error::Invalid(format!("box `{name}` is not square")));
        }
        self.boxes.insert(name.to_string(), m);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<Mat> {
        if let Some(m) = self.boxes.get(name) {
            return Ok(m.clone());
        }
        match name.strip_suffix('*').and_then(|b| self.boxes.get(b)) {
            Some(m) => Ok(linalg::dagger(m)),
            None => Err(Error::UnknownBox(name.to_string())),
        }
    }
}

struct Ctx<'a> {
    ring: &'a PhaseRing,
    reg: &'a BoxRegistry,
}

impl Ctx<'_> {
    fn cap(&self, p: usize, w: usize, m: &Mat) -> Mat {
        let d = self.ring.d;
        let n = w / 2;
        if p % 2 == 0 {
            insert_qudit(d, n, p / 2, m) * c(self.ring.quarter_pow(1), 0.0)
        } else {
            let m = self.cap(p - 1, w, m);
            apply_sum(self.ring, n + 1, &tl_terms(self.ring, p), &m)
        }
    }

    fn cup(&self, p: usize, w: usize, m: &Mat) -> Mat {
        let d = self.ring.d;
        let n = w / 2;
        if p % 2 == 0 {
            project_qudit(d, n, p / 2, m) * c(self.ring.quarter_pow(1), 0.0)
        } else {
            let m = apply_sum(self.ring, n, &tl_terms(self.ring, p), m);
            self.cup(p - 1, w, &m)
        }
    }

    /// A `bw`-strand operator at strand offset `p`.
    fn block(&self, p: usize, bw: usize, t: &Mat, charge: i64, w: usize, m: &Mat) -> Mat {
        let n = w / 2;
        if p % 2 == 0 {
            let first = p / 2;
            let sites: Vec<usize> = (first..first + bw / 2).collect();
            let out = apply_local_cols(self.ring.d, n, &sites, t, m);
            if charge.rem_euclid(self.ring.d as i64) == 0 || first + bw / 2 >= n {
                out
            } else {
                Monomial::z_tail(self.ring, n, first + bw / 2, charge).apply(self.ring, &out)
            }
        } else {
            let terms: Vec<(C64, Vec<(usize, i64)>)> = expansion(self.ring, t, bw)
                .into_iter()
                .map(|(coef, es)| (coef, es.iter().enumerate().rev().map(|(s, &e)| (p + s, e)).collect()))
                .collect();
            apply_sum(self.ring, n, &terms, m)
        }
    }

    fn apply(&self, e: &Elem, w: usize, m: &Mat) -> Result<Mat> {
        let ring = self.ring;
        let n = w / 2;
        Ok(match e {
            Elem::Charge { s, k } => Monomial::charge(ring, n, *s, *k).apply(ring, m),
            Elem::Cap { p } => {
                state_dim(ring.d, n + 1)?;
                self.cap(*p, w, m)
            }
            Elem::Cup { p } => self.cup(*p, w, m),
            Elem::Braid { p, positive } => {
                let sign = if *positive { BraidSign::Positive } else { BraidSign::Negative };
                apply_sum(ring, n, &braid_terms(ring, *p, sign), m)
            }
            Elem::Sym { p, m: idx } => self.block(*p, 4, &sym_matrix(ring, *idx), 0, w, m),
            Elem::Box { p, w: bw, name, charge } => {
                let t = self.reg.get(name)?;
                let dim = state_dim(ring.d, bw / 2)?;
                if t.nrows() != dim {
                    return Err(Error::Width(format!("box `{name}` is {}x{} but spans {bw} strands", t.nrows(), t.ncols())));
                }
                match operator_charge(ring, &t, bw / 2) {
                    Some(cc) if cc == charge.rem_euclid(ring.d as i64) => {}
                    Some(cc) => return Err(Error::Invalid(format!("box `{name}` has charge {cc}, declared {charge}"))),
                    None => return Err(Error::Invalid(format!("box `{name}` is not charge-homogeneous"))),
                }
                self.block(*p, *bw, &t, *charge, w, m)
            }
        })
    }
}

/// Evaluate with the standard box registry.
pub fn evaluate(ring: &PhaseRing, dg: &Diagram) -> Result<QOperator> {
    evaluate_with(ring, dg, &BoxRegistry::standard(ring))
}

/// The operator of a diagram: elementary operations applied top first,
/// times the diagram scalar.
pub fn evaluate_with(ring: &PhaseRing, dg: &Diagram, reg: &BoxRegistry) -> Result<QOperator> {
    if ring.d != dg.d {
        return Err(Error::Invalid(format!("ring has d={}, diagram d={}", ring.d, dg.d)));
    }
    if dg.in_points % 2 != 0 || dg.out_points % 2 != 0 {
        return Err(Error::OddBoundary(dg.in_points + dg.out_points));
    }
    let (n_in, n_out) = (dg.in_points / 2, dg.out_points / 2);
    let (din, dout) = (state_dim(ring.d, n_in)?, state_dim(ring.d, n_out)?);
    if dg.is_zero() {
        return QOperator::new(ring.d, n_in, n_out, linalg::zeros(dout, din));
    }
    let (elems, sc) = dg.to_elems()?;
    let ctx = Ctx { ring, reg };
    let mut m = linalg::identity(din);
    let mut w = dg.in_points;
    for e in &elems {
        m = ctx.apply(e, w, &m)?;
        w = e.width_after(w);
    }
    let s = sc.value(ring);
    QOperator::new(ring.d, n_in, n_out, m.map(|z| z * s))
}

fn check_strand(n: usize, s: usize, span: usize) -> Result<()> {
    if s == 0 || s + span - 1 > 2 * n {
        return Err(Error::Range(format!("strand {s} (span {span}) on {n} qudits")));
    }
    Ok(())
}

/// c_s^k on `n` qudits.
pub fn charge_op(ring: &PhaseRing, n: usize, site: StringSite, k: i64) -> Result<QOperator> {
    check_strand(n, site.strand(), 1)?;
    state_dim(ring.d, n)?;
    QOperator::square(ring.d, n, Monomial::charge(ring, n, site.strand() - 1, k).to_matrix(ring))
}

/// Max residual of c_s^d = 1 and c_s c_t = q c_t c_s (s < t) over all
/// strands of `n` qudits.
pub fn parafermion_relations_check(ring: &PhaseRing, n: usize) -> Result<f64> {
    let cs: Vec<Mat> = (1..=2 * n)
        .map(|s| charge_op(ring, n, StringSite::from_strand(s), 1).map(|o| o.matrix))
        .collect::<Result<_>>()?;
    let id = linalg::identity(cs[0].nrows());
    let mut worst: f64 = 0.0;
    for (i, a) in cs.iter().enumerate() {
        worst = worst.max(linalg::max_diff(&linalg::mat_pow(a, ring.d as i64), &id));
        for b in &cs[i + 1..] {
            let lhs = a * b;
            let rhs = (b * a).map(|z| z * ring.q);
            worst = worst.max(linalg::max_diff(&lhs, &rhs));
        }
    }
    Ok(worst)
}

/// The braid on 1-based strands (s, s+1) of `n` qudits.
pub fn braid_op(ring: &PhaseRing, n: usize, s: usize, sign: BraidSign) -> Result<QOperator> {
    check_strand(n, s, 2)?;
    let dim = state_dim(ring.d, n)?;
    let m = apply_sum(ring, n, &braid_terms(ring, s - 1, sign), &linalg::identity(dim));
    QOperator::square(ring.d, n, m)
}

/// The Temperley-Lieb generator E on 1-based strands (s, s+1): the cup
/// followed by the cap.
pub fn tl_op(ring: &PhaseRing, n: usize, s: usize) -> Result<QOperator> {
    check_strand(n, s, 2)?;
    let dim = state_dim(ring.d, n)?;
    let m = apply_sum(ring, n, &tl_terms(ring, s - 1), &linalg::identity(dim));
    QOperator::square(ring.d, n, m)
}

/// Insert a cap between strand `at` and `at + 1` (0 ≤ at ≤ 2n, 0 is the
/// far left) of an `n`-qudit space.
pub fn cap_op(ring: &PhaseRing, n: usize, at: usize) -> Result<QOperator> {
    if at > 2 * n {
        return Err(Error::Range(format!("cap position {at} on {n} qudits")));
    }
    let dg = Diagram::cap(ring.d, 2 * n, at)?;
    evaluate(ring, &dg)
}

/// Close strands `at + 1` and `at + 2` (1-based) of an `(n+1)`-qudit space.
pub fn cup_op(ring: &PhaseRing, n: usize, at: usize) -> Result<QOperator> {
    if at > 2 * n {
        return Err(Error::Range(format!("cup position {at} on {} qudits", n + 1)));
    }
    let dg = Diagram::cup(ring.d, 2 * n + 2, at)?;
    evaluate(ring, &dg)
}

/// ‖d^{−1/2} Σ_k (cap with charge k) ∘ (cup with charge −k) − 1‖ on two strands.
pub fn resolution_of_identity_check(ring: &PhaseRing) -> Result<f64> {
    let d = ring.d;
    let mut acc = linalg::zeros(d, d);
    for k in 0..d as i64 {
        let cap = Diagram::from_top(d, 0, vec![vec![Generator::Cap { left: 0 }], vec![Generator::Charge { strand: 1, k, tier: 0 }]])?;
        let cup = adjoint(&cap);
        let term = evaluate(ring, &compose(&cup, &cap)?)?;
        acc += term.matrix;
    }
    let acc = acc.map(|z| z / ring.sqrt_d());
    Ok(linalg::max_diff(&acc, &linalg::identity(d)))
}

/// Split T into its charge components: T = Σ_c T_c with Z T_c Z^{-1} = q^c T_c.
fn charge_components(ring: &PhaseRing, t: &Mat, nq: usize) -> Vec<Mat> {
    let d = ring.d;
    let z = Monomial::z_tail(ring, nq, 0, 1);
    let mut comps = vec![linalg::zeros(t.nrows(), t.ncols()); d];
    for (c_idx, comp) in comps.iter_mut().enumerate() {
        for row in 0..t.nrows() {
            for col in 0..t.ncols() {
                // Z^j T Z^{-j} at (row, col) = q^{j (|row| - |col|)} T
                let diff = z.eps[row] - z.eps[col];
                let mut s = C64::new(0.0, 0.0);
                for j in 0..d as i64 {
                    s += ring.eps_pow(j * diff - ring.q_eps(j * c_idx as i64));
                }
                comp[(row, col)] = t[(row, col)] * s / d as f64;
            }
        }
    }
    comps
}

/// Apply T to the qudits of one party. The party's qudits are swapped
/// into a contiguous block at the party's first qudit, T acts there with
/// its Jordan-Wigner tail (Z^c on every later qudit for the charge-c part
/// of T) and the qudits are swapped back.
pub fn local_conjugation_op(ring: &PhaseRing, owner: &[usize], party: usize, t: &QOperator) -> Result<QOperator> {
    let n = owner.len();
    let mine: Vec<usize> = (0..n).filter(|&j| owner[j] == party).collect();
    if mine.is_empty() {
        return Err(Error::Invalid(format!("party {party} owns no qudit")));
    }
    if t.n_in != mine.len() || t.n_out != mine.len() {
        return Err(Error::Width(format!("operator on {} qudits, party owns {}", t.n_in, mine.len())));
    }
    let d = ring.d;
    let dim = state_dim(d, n)?;
    // new position -> old qudit
    let first = mine[0];
    let mut order: Vec<usize> = (0..first).collect();
    order.extend(&mine);
    order.extend((first..n).filter(|j| owner[*j] != party));
    let block: Vec<usize> = (first..first + mine.len()).collect();
    let comps = charge_components(ring, &t.matrix, mine.len());
    let mut total = linalg::zeros(dim, dim);
    for (cc, comp) in comps.iter().enumerate() {
        if comp.iter().all(|z| z.norm() < 1e-14) {
            continue;
        }
        let mut m = apply_local_cols(d, n, &block, comp, &linalg::identity(dim));
        let after = first + mine.len();
        if cc != 0 && after < n {
            m = Monomial::z_tail(ring, n, after, cc as i64).apply(ring, &m);
        }
        total += m;
    }
    // conjugate by the permutation: P|old digits⟩ = |digits in new order⟩
    let perm: Vec<usize> = (0..dim)
        .map(|i| {
            let ds = linalg::digits(i, d, n);
            let nd: Vec<usize> = order.iter().map(|&o| ds[o]).collect();
            linalg::index_of(&nd, d)
        })
        .collect();
    let mut out = linalg::zeros(dim, dim);
    for r in 0..dim {
        for col in 0..dim {
            out[(r, col)] = total[(perm[r], perm[col])];
        }
    }
    QOperator::square(d, n, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_diff;
    use crate::numerics::make_phase_ring;

    #[test]
    fn string_sites() {
        assert_eq!(StringSite::from_strand(1), StringSite::new(1, Side::Left));
        assert_eq!(StringSite::from_strand(4), StringSite::new(2, Side::Right));
        for s in 1..9 {
            assert_eq!(StringSite::from_strand(s).strand(), s);
        }
    }

    #[test]
    fn charges_are_jordan_wigner() {
        let r = make_phase_ring(3).unwrap();
        let x = pauli_gate(&r, Pauli::X);
        let y = pauli_gate(&r, Pauli::Y);
        let z = pauli_gate(&r, Pauli::Z);
        let right = charge_op(&r, 3, StringSite::new(1, Side::Right), 1).unwrap();
        assert!(max_diff(&right.matrix, &linalg::kron_all(&[x, z.clone(), z.clone()])) < 1e-12);
        let left = charge_op(&r, 3, StringSite::new(1, Side::Left), 1).unwrap();
        let yi = linalg::mat_pow(&y, -1);
        assert!(max_diff(&left.matrix, &linalg::kron_all(&[yi, z.clone(), z])) < 1e-12);
        let id = charge_op(&r, 2, StringSite::new(2, Side::Left), 0).unwrap();
        assert!(max_diff(&id.matrix, &linalg::identity(9)) < 1e-12);
        assert!(charge_op(&r, 2, StringSite::new(3, Side::Left), 1).is_err());
    }

    #[test]
    fn relations_hold() {
        for (d, n) in [(2, 2), (3, 2), (5, 1), (4, 2)] {
            let r = make_phase_ring(d).unwrap();
            assert!(parafermion_relations_check(&r, n).unwrap() < 1e-9);
        }
    }

    #[test]
    fn braids_are_inverse_unitaries() {
        for d in 2..=5 {
            let r = make_phase_ring(d).unwrap();
            for s in 1..4 {
                let p = braid_op(&r, 2, s, BraidSign::Positive).unwrap();
                let m = braid_op(&r, 2, s, BraidSign::Negative).unwrap();
                assert!(p.is_unitary(1e-10));
                assert!(max_diff(&(&p.matrix * &m.matrix), &linalg::identity(d * d)) < 1e-10);
            }
        }
    }

    #[test]
    fn resolution_of_identity() {
        for d in [2, 3, 5] {
            assert!(resolution_of_identity_check(&make_phase_ring(d).unwrap()).unwrap() < 1e-9);
        }
    }

    #[test]
    fn charge_detection() {
        let r = make_phase_ring(3).unwrap();
        assert_eq!(operator_charge(&r, &pauli_gate(&r, Pauli::X), 1), Some(1));
        assert_eq!(operator_charge(&r, &pauli_gate(&r, Pauli::Y), 1), Some(2));
        assert_eq!(operator_charge(&r, &cz_gate(&r), 2), Some(0));
        assert_eq!(operator_charge(&r, &fourier_gate(&r), 1), None);
    }

    #[test]
    fn registry_adjoints() {
        let r = make_phase_ring(3).unwrap();
        let reg = BoxRegistry::standard(&r);
        let g = reg.get("G").unwrap();
        let gs = reg.get("G*").unwrap();
        assert!(max_diff(&(&g * &gs), &linalg::identity(3)) < 1e-12);
        assert!(matches!(reg.get("nope"), Err(Error::UnknownBox(_))));
    }
}
