//! State vectors, operators and the site-local kernel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, checked_dim, C64, Mat};
use crate::MAX_STATE_ENTRIES;

/// A dense operator from `n_in` qudits to `n_out` qudits.
#[derive(Clone, Debug, PartialEq)]
pub struct QOperator {
    pub d: usize,
    pub n_in: usize,
    pub n_out: usize,
    pub matrix: Mat,
}

impl QOperator {
    pub fn new(d: usize, n_in: usize, n_out: usize, matrix: Mat) -> Result<Self> {
        let rows = checked_dim(d, n_out).ok_or(Error::TooLarge(usize::MAX))?;
        let cols = checked_dim(d, n_in).ok_or(Error::TooLarge(usize::MAX))?;
        if matrix.nrows() != rows || matrix.ncols() != cols {
            return Err(Error::Width(format!(
                "matrix is {}x{}, expected {rows}x{cols}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(QOperator { d, n_in, n_out, matrix })
    }

    /// Square operator on `n` qudits.
    pub fn square(d: usize, n: usize, matrix: Mat) -> Result<Self> {
        Self::new(d, n, n, matrix)
    }

    pub fn identity(d: usize, n: usize) -> Self {
        let dim = d.pow(n as u32);
        QOperator { d, n_in: n, n_out: n, matrix: linalg::identity(dim) }
    }

    /// Operator product `self · rhs` (rhs acts first).
    pub fn mul(&self, rhs: &QOperator) -> Result<QOperator> {
        if self.n_in != rhs.n_out || self.d != rhs.d {
            return Err(Error::Width(format!("cannot multiply {} <- {} by {} <- {}", self.n_out, self.n_in, rhs.n_out, rhs.n_in)));
        }
        Ok(QOperator { d: self.d, n_in: rhs.n_in, n_out: self.n_out, matrix: &self.matrix * &rhs.matrix })
    }

    pub fn adjoint(&self) -> QOperator {
        QOperator { d: self.d, n_in: self.n_out, n_out: self.n_in, matrix: self.matrix.adjoint() }
    }

    pub fn tensor(&self, rhs: &QOperator) -> QOperator {
        QOperator {
            d: self.d,
            n_in: self.n_in + rhs.n_in,
            n_out: self.n_out + rhs.n_out,
            matrix: linalg::kron(&self.matrix, &rhs.matrix),
        }
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.n_in == self.n_out && linalg::unitarity_residual(&self.matrix) < tol
    }

    /// Apply to a state with matching qudit count.
    pub fn apply(&self, s: &QState) -> Result<QState> {
        if s.n != self.n_in || s.d != self.d {
            return Err(Error::Width(format!("operator expects {} qudits, state has {}", self.n_in, s.n)));
        }
        let v = nalgebra::DVector::from_column_slice(&s.amps);
        let w = &self.matrix * v;
        Ok(QState { d: self.d, n: self.n_out, amps: w.as_slice().to_vec() })
    }
}

/// A state vector in the decreasing basis, index = Σ k_j d^{n-j}.
#[derive(Clone, Debug, PartialEq)]
pub struct QState {
    pub d: usize,
    pub n: usize,
    pub amps: Vec<C64>,
}

impl QState {
    /// |k_1, ..., k_n⟩ (entries taken mod d).
    pub fn basis(d: usize, ks: &[i64]) -> Result<Self> {
        let n = ks.len();
        let dim = state_dim(d, n)?;
        let ds: Vec<usize> = ks.iter().map(|&k| k.rem_euclid(d as i64) as usize).collect();
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[linalg::index_of(&ds, d)] = C64::new(1.0, 0.0);
        Ok(QState { d, n, amps })
    }

    pub fn zero(d: usize, n: usize) -> Result<Self> {
        Self::basis(d, &vec![0; n])
    }

    pub fn from_amps(d: usize, n: usize, amps: Vec<C64>) -> Result<Self> {
        let dim = state_dim(d, n)?;
        if amps.len() != dim {
            return Err(Error::Width(format!("{} amplitudes for {n} qudits of degree {d}", amps.len())));
        }
        Ok(QState { d, n, amps })
    }

    /// Haar-ish random state from a seeded generator (normalised Gaussian).
    pub fn random(d: usize, n: usize, rng: &mut impl Rng) -> Result<Self> {
        let dim = state_dim(d, n)?;
        let mut amps: Vec<C64> = (0..dim).map(|_| C64::new(gauss(rng), gauss(rng))).collect();
        let nrm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in amps.iter_mut() {
            *z /= nrm;
        }
        Ok(QState { d, n, amps })
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> QState {
        let nrm = self.norm();
        QState { d: self.d, n: self.n, amps: self.amps.iter().map(|z| z / nrm).collect() }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn tensor(&self, rhs: &QState) -> QState {
        let mut amps = Vec::with_capacity(self.dim() * rhs.dim());
        for a in &self.amps {
            for b in &rhs.amps {
                amps.push(a * b);
            }
        }
        QState { d: self.d, n: self.n + rhs.n, amps }
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &QState) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// |⟨self|other⟩| / (‖self‖‖other‖): fidelity up to global phase.
    pub fn overlap(&self, other: &QState) -> f64 {
        linalg::overlap(&self.amps, &other.amps)
    }

    pub fn max_diff(&self, other: &QState) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Apply a `d^k × d^k` matrix to the listed sites (0-based), in place.
    /// The first listed site is the most significant digit of the local index.
    pub fn apply_local(&mut self, sites: &[usize], u: &Mat) -> Result<()> {
        check_sites(self.n, sites)?;
        let local = self.d.pow(sites.len() as u32);
        if u.nrows() != local || u.ncols() != local {
            return Err(Error::Width(format!("{}x{} matrix on {} sites", u.nrows(), u.ncols(), sites.len())));
        }
        apply_local_raw(&mut self.amps, self.d, self.n, sites, u);
        Ok(())
    }

    /// Probability of each outcome when measuring `site`.
    pub fn marginal(&self, site: usize) -> Vec<f64> {
        let stride = self.d.pow((self.n - 1 - site) as u32);
        let mut p = vec![0.0; self.d];
        for (i, z) in self.amps.iter().enumerate() {
            p[(i / stride) % self.d] += z.norm_sqr();
        }
        p
    }

    /// Unnormalised projection onto outcome `k` at `site`.
    pub fn project(&self, site: usize, k: usize) -> QState {
        let stride = self.d.pow((self.n - 1 - site) as u32);
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, z)| if (i / stride) % self.d == k { *z } else { C64::new(0.0, 0.0) })
            .collect();
        QState { d: self.d, n: self.n, amps }
    }

    /// Drop qudits that sit in a definite basis state, keeping `keep` in
    /// the listed order. Fails if a dropped qudit is not in a basis state.
    pub fn restrict(&self, keep: &[usize]) -> Result<QState> {
        check_sites(self.n, keep)?;
        let drop: Vec<usize> = (0..self.n).filter(|s| !keep.contains(s)).collect();
        let mut fixed = vec![None; self.n];
        for &s in &drop {
            let m = self.marginal(s);
            let total: f64 = m.iter().sum();
            let (k, pk) = m.iter().enumerate().fold((0, 0.0), |b, (k, &p)| if p > b.1 { (k, p) } else { b });
            if (pk - total).abs() > 1e-9 * total.max(1.0) {
                return Err(Error::Invalid(format!("qudit {} is not in a basis state", s + 1)));
            }
            fixed[s] = Some(k);
        }
        let kd = self.d.pow(keep.len() as u32);
        let mut amps = vec![C64::new(0.0, 0.0); kd];
        for (r, amp) in amps.iter_mut().enumerate() {
            let kds = linalg::digits(r, self.d, keep.len());
            let mut full = vec![0; self.n];
            for (j, &s) in keep.iter().enumerate() {
                full[s] = kds[j];
            }
            for &s in &drop {
                full[s] = fixed[s].unwrap();
            }
            *amp = self.amps[linalg::index_of(&full, self.d)];
        }
        Ok(QState { d: self.d, n: keep.len(), amps })
    }

    /// Reorder qudits: new qudit j is old qudit `order[j]`.
    pub fn permute(&self, order: &[usize]) -> Result<QState> {
        if order.len() != self.n {
            return Err(Error::Width("permutation length".into()));
        }
        let mut seen = vec![false; self.n];
        for &o in order {
            if o >= self.n || seen[o] {
                return Err(Error::Invalid("not a permutation".into()));
            }
            seen[o] = true;
        }
        let mut amps = vec![C64::new(0.0, 0.0); self.dim()];
        for (i, z) in self.amps.iter().enumerate() {
            let old = linalg::digits(i, self.d, self.n);
            let new: Vec<usize> = order.iter().map(|&o| old[o]).collect();
            amps[linalg::index_of(&new, self.d)] = *z;
        }
        Ok(QState { d: self.d, n: self.n, amps })
    }
}

fn gauss(rng: &mut impl Rng) -> f64 {
    // Box-Muller; keeps the dependency list short
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub(crate) fn state_dim(d: usize, n: usize) -> Result<usize> {
    match checked_dim(d, n) {
        Some(dim) if dim <= MAX_STATE_ENTRIES => Ok(dim),
        Some(dim) => Err(Error::TooLarge(dim)),
        None => Err(Error::TooLarge(usize::MAX)),
    }
}

pub(crate) fn check_sites(n: usize, sites: &[usize]) -> Result<()> {
    for (i, &s) in sites.iter().enumerate() {
        if s >= n {
            return Err(Error::Range(format!("qudit {} of {n}", s + 1)));
        }
        if sites[..i].contains(&s) {
            return Err(Error::SiteClash(s + 1));
        }
    }
    Ok(())
}

/// The strided kernel: gathers the `d^k` amplitudes sharing all other
/// digits, multiplies, scatters back.
pub(crate) fn apply_local_raw(amps: &mut [C64], d: usize, n: usize, sites: &[usize], u: &Mat) {
    let k = sites.len();
    let local = d.pow(k as u32);
    let stride = |s: usize| d.pow((n - 1 - s) as u32);
    let offsets: Vec<usize> = (0..local)
        .map(|r| {
            let ds = linalg::digits(r, d, k);
            ds.iter().zip(sites).map(|(&dig, &s)| dig * stride(s)).sum()
        })
        .collect();
    let others: Vec<usize> = (0..n).filter(|s| !sites.contains(s)).map(stride).collect();
    let count = d.pow(others.len() as u32);
    let mut buf = vec![C64::new(0.0, 0.0); local];
    for t in 0..count {
        let ds = linalg::digits(t, d, others.len());
        let base: usize = ds.iter().zip(&others).map(|(&dig, &st)| dig * st).sum();
        for (r, off) in offsets.iter().enumerate() {
            buf[r] = amps[base + off];
        }
        for (r, off) in offsets.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (cidx, b) in buf.iter().enumerate() {
                acc += u[(r, cidx)] * b;
            }
            amps[base + off] = acc;
        }
    }
}

/// Measure `site` in the computational basis with the given generator.
/// Returns (outcome, renormalised post-state, probability).
pub fn measure_with(state: &QState, site: usize, rng: &mut impl Rng) -> Result<(usize, QState, f64)> {
    check_sites(state.n, &[site])?;
    let p = state.marginal(site);
    let total: f64 = p.iter().sum();
    let r: f64 = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut outcome = p.iter().rposition(|&x| x > 0.0).unwrap_or(0);
    for (k, pk) in p.iter().enumerate() {
        acc += pk;
        if r < acc && *pk > 0.0 {
            outcome = k;
            break;
        }
    }
    let post = state.project(site, outcome).normalized();
    Ok((outcome, post, p[outcome] / total))
}

/// Seeded measurement; the same seed always gives the same outcome.
pub fn measure(state: &QState, site: usize, seed: u64) -> Result<(usize, QState, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    measure_with(state, site, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn kernel_matches_kron() {
        let d = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = QState::random(d, 3, &mut rng).unwrap();
        let u = Mat::from_fn(3, 3, |i, j| c((i * 3 + j) as f64, (i as f64) - (j as f64)));
        let mut t = s.clone();
        t.apply_local(&[1], &u).unwrap();
        let full = linalg::kron_all(&[linalg::identity(3), u.clone(), linalg::identity(3)]);
        let expect = QOperator::square(d, 3, full).unwrap().apply(&s).unwrap();
        assert!(t.max_diff(&expect) < 1e-12);
    }

    #[test]
    fn kernel_respects_site_order() {
        let d = 2;
        let swap = Mat::from_fn(4, 4, |i, j| {
            let (a, b) = (i / 2, i % 2);
            if j == b * 2 + a { c(1.0, 0.0) } else { c(0.0, 0.0) }
        });
        let cnot = Mat::from_fn(4, 4, |i, j| {
            let (a, b) = (j / 2, j % 2);
            if i == a * 2 + (a ^ b) { c(1.0, 0.0) } else { c(0.0, 0.0) }
        });
        // control on qudit 3, target qudit 1
        let mut s = QState::basis(d, &[0, 0, 1]).unwrap();
        s.apply_local(&[2, 0], &cnot).unwrap();
        assert!(s.max_diff(&QState::basis(d, &[1, 0, 1]).unwrap()) < 1e-15);
        let mut t = QState::basis(d, &[1, 0, 0]).unwrap();
        t.apply_local(&[0, 2], &swap).unwrap();
        assert!(t.max_diff(&QState::basis(d, &[0, 0, 1]).unwrap()) < 1e-15);
    }

    #[test]
    fn basis_measurement_is_certain() {
        let s = QState::basis(5, &[3, 1]).unwrap();
        for seed in 0..10 {
            let (k, post, p) = measure(&s, 0, seed).unwrap();
            assert_eq!(k, 3);
            assert!((p - 1.0).abs() < 1e-12);
            assert!(post.max_diff(&s) < 1e-12);
        }
    }

    #[test]
    fn seeded_measurement_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = QState::random(3, 2, &mut rng).unwrap();
        let a = measure(&s, 1, 42).unwrap();
        let b = measure(&s, 1, 42).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn permute_and_restrict() {
        let s = QState::basis(3, &[1, 2, 0]).unwrap();
        let p = s.permute(&[2, 0, 1]).unwrap();
        assert!(p.max_diff(&QState::basis(3, &[0, 1, 2]).unwrap()) < 1e-15);
        let r = s.restrict(&[2, 0]).unwrap();
        assert!(r.max_diff(&QState::basis(3, &[0, 1]).unwrap()) < 1e-15);
    }

    #[test]
    fn rejects_huge_registers() {
        assert!(matches!(QState::zero(2, 21), Err(Error::TooLarge(_))));
    }
}
