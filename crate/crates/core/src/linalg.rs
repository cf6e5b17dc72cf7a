//! Dense complex helpers.

use nalgebra::DMatrix;
pub use num_complex::Complex64 as C64;

/// Dense complex matrix.
pub type Mat = DMatrix<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> Mat {
    Mat::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> Mat {
    Mat::zeros(r, c)
}

/// Kronecker product, first argument is the first tensor factor.
pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

pub fn kron_all(ms: &[Mat]) -> Mat {
    let mut out = identity(1);
    for m in ms {
        out = kron(&out, m);
    }
    out
}

pub fn dagger(a: &Mat) -> Mat {
    a.adjoint()
}

/// Integer power of a square matrix; negative powers go through the inverse.
pub fn mat_pow(a: &Mat, e: i64) -> Mat {
    let base = if e < 0 {
        a.clone().try_inverse().expect("singular matrix raised to a negative power")
    } else {
        a.clone()
    };
    let mut k = e.unsigned_abs();
    let mut acc = identity(a.nrows());
    let mut sq = base;
    while k > 0 {
        if k & 1 == 1 {
            acc = &acc * &sq;
        }
        sq = &sq * &sq;
        k >>= 1;
    }
    acc
}

/// Largest entrywise modulus of `a - b`.
pub fn max_diff(a: &Mat, b: &Mat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in comparison");
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Residual of `a = λ b` for the best unit phase λ, taken from the
/// largest entry of `b`. Returns `max|a - λ b|`.
pub fn max_diff_up_to_phase(a: &Mat, b: &Mat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in comparison");
    let (idx, _) = b
        .iter()
        .enumerate()
        .fold((0, 0.0), |best, (i, z)| if z.norm() > best.1 { (i, z.norm()) } else { best });
    let bz = b.as_slice()[idx];
    let az = a.as_slice()[idx];
    if bz.norm() == 0.0 {
        return a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    }
    let ratio = az / bz;
    let phase = if ratio.norm() > 0.0 { ratio / ratio.norm() } else { C64::new(1.0, 0.0) };
    let scaled = b.map(|z| z * phase);
    max_diff(a, &scaled)
}

/// `max |U U† - 1|`.
pub fn unitarity_residual(u: &Mat) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    max_diff(&(u * dagger(u)), &identity(u.nrows()))
}

/// Modulus of the inner product of two normalised vectors, i.e. the
/// fidelity up to global phase.
pub fn overlap(a: &[C64], b: &[C64]) -> f64 {
    let ip: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let na: f64 = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    ip.norm() / (na * nb)
}

/// Digits of a basis index, most significant (qudit 1) first.
pub fn digits(mut idx: usize, d: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for j in (0..n).rev() {
        out[j] = idx % d;
        idx /= d;
    }
    out
}

/// Inverse of [`digits`].
pub fn index_of(ds: &[usize], d: usize) -> usize {
    ds.iter().fold(0, |acc, &k| acc * d + k)
}

/// d^n with an overflow check.
pub fn checked_dim(d: usize, n: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..n {
        acc = acc.checked_mul(d)?;
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digits_round_trip() {
        for idx in 0..27 {
            let ds = digits(idx, 3, 3);
            assert_eq!(index_of(&ds, 3), idx);
        }
        assert_eq!(digits(5, 2, 3), vec![1, 0, 1]);
    }

    #[test]
    fn phase_insensitive_compare() {
        let a = Mat::from_fn(2, 2, |i, j| c((i + 2 * j) as f64, 1.0));
        let b = a.map(|z| z * C64::from_polar(1.0, 0.7));
        assert!(max_diff(&a, &b) > 0.1);
        assert!(max_diff_up_to_phase(&a, &b) < 1e-12);
    }

    #[test]
    fn powers() {
        let x = Mat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(max_diff(&mat_pow(&x, 2), &identity(2)) < 1e-15);
        assert!(max_diff(&mat_pow(&x, -3), &x) < 1e-15);
        assert!(max_diff(&mat_pow(&x, 0), &identity(2)) < 1e-15);
    }
}
