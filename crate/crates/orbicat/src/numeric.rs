//! Dense complex linear algebra with a single tolerance policy.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs_eps: f64,
    pub rel_eps: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs_eps: 1e-9, rel_eps: 1e-9 }
    }
}

impl Tolerance {
    pub fn new(abs_eps: f64, rel_eps: f64) -> Self {
        assert!(abs_eps >= 0.0 && rel_eps >= 0.0, "tolerances must be nonnegative");
        Tolerance { abs_eps, rel_eps }
    }

    pub fn uniform(eps: f64) -> Self {
        Tolerance::new(eps, eps)
    }

    pub fn close(&self, x: C64, y: C64) -> bool {
        (x - y).norm() <= self.abs_eps + self.rel_eps * x.norm().max(y.norm())
    }

    pub fn close_real(&self, x: f64, y: f64) -> bool {
        (x - y).abs() <= self.abs_eps + self.rel_eps * x.abs().max(y.abs())
    }

    /// Singular values above this count towards the rank.
    pub fn rank_threshold(&self, largest: f64) -> f64 {
        self.abs_eps * largest.max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericError {
    #[error("matrix is not idempotent (residual {residual:e})")]
    NotIdempotent { residual: f64 },
    #[error("basis is not closed under multiplication (residual {residual:e})")]
    NotClosed { residual: f64 },
    #[error("could not separate the spectrum after {attempts} seeds")]
    DegenerateSpectrum { attempts: usize },
    #[error("matrix is singular or not square ({rows}x{cols})")]
    Singular { rows: usize, cols: usize },
    #[error("splitting failed: {0}")]
    SplitFailure(String),
}

pub fn zeros(r: usize, c: usize) -> CMat {
    CMat::zeros(r, c)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Kronecker product with `a` as the slow index.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Singular values in descending order together with matching left/right vectors.
/// `u` has min(r, c) columns; `v` is a full c×c unitary.
pub struct Svd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

fn to_faer(m: &CMat) -> faer::Mat<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub fn svd(m: &CMat) -> Svd {
    let (r, c) = m.shape();
    let k = r.min(c);
    if k == 0 {
        return Svd { u: zeros(r, 0), s: vec![], v: eye(c) };
    }
    let dec = to_faer(m).svd().expect("svd converges");
    let (fu, fs, fv) = (dec.U(), dec.S().column_vector(), dec.V());
    let s = (0..k).map(|i| fs[i].re).collect();
    let u = CMat::from_fn(r, k, |i, j| fu[(i, j)]);
    let v = CMat::from_fn(c, c, |i, j| fv[(i, j)]);
    Svd { u, s, v }
}

/// Eigenvalues of a square matrix.
pub fn eigenvalues(m: &CMat) -> Option<Vec<C64>> {
    if m.nrows() == 0 {
        return Some(vec![]);
    }
    to_faer(m).eigenvalues().ok()
}

pub fn rank(m: &CMat, tol: &Tolerance) -> usize {
    let d = svd(m);
    let top = d.s.first().copied().unwrap_or(0.0);
    let th = tol.rank_threshold(top);
    d.s.iter().take(m.nrows().min(m.ncols())).filter(|&&x| x > th).count()
}

/// Orthonormal basis (columns) of the kernel of `m`.
pub fn null_space(m: &CMat, tol: &Tolerance) -> CMat {
    let (r, c) = m.shape();
    if r == 0 {
        return eye(c);
    }
    let d = svd(m);
    let top = d.s.first().copied().unwrap_or(0.0);
    let th = tol.rank_threshold(top);
    let rk = d.s.iter().take(r.min(c)).filter(|&&x| x > th).count();
    d.v.columns(rk, c - rk).into_owned()
}

/// Orthonormal basis (columns) of the column space of `m`.
pub fn column_space(m: &CMat, tol: &Tolerance) -> CMat {
    let (r, c) = m.shape();
    let d = svd(m);
    let top = d.s.first().copied().unwrap_or(0.0);
    let th = tol.rank_threshold(top);
    let rk = d.s.iter().take(r.min(c)).filter(|&&x| x > th).count();
    d.u.columns(0, rk).into_owned()
}

pub fn inverse(m: &CMat) -> Result<CMat, NumericError> {
    let (r, c) = m.shape();
    if r != c {
        return Err(NumericError::Singular { rows: r, cols: c });
    }
    if r == 0 {
        return Ok(zeros(0, 0));
    }
    m.clone().try_inverse().ok_or(NumericError::Singular { rows: r, cols: c })
}

pub fn pinv(m: &CMat, tol: &Tolerance) -> CMat {
    let (r, c) = m.shape();
    let d = svd(m);
    let top = d.s.first().copied().unwrap_or(0.0);
    let th = tol.rank_threshold(top);
    let mut out = zeros(c, r);
    for k in 0..r.min(c) {
        if d.s[k] > th {
            let vk = d.v.column(k);
            let uk = d.u.column(k);
            out += (vk * uk.adjoint()) * c64_inv(d.s[k]);
        }
    }
    out
}

fn c64_inv(x: f64) -> C64 {
    C64::new(1.0 / x, 0.0)
}

/// Factor an idempotent `p = embed * retract` with `retract * embed = 1`.
pub fn split_idempotent(p: &CMat, tol: &Tolerance) -> Result<(CMat, CMat), NumericError> {
    let (r, c) = p.shape();
    if r != c {
        return Err(NumericError::Singular { rows: r, cols: c });
    }
    let residual = max_abs_diff(&(p * p), p);
    let scale = max_abs(p).max(1.0);
    if residual > 10.0 * (tol.abs_eps + tol.rel_eps * scale) {
        return Err(NumericError::NotIdempotent { residual });
    }
    let d = svd(p);
    let top = d.s.first().copied().unwrap_or(0.0);
    let th = tol.rank_threshold(top);
    let rk = d.s.iter().filter(|&&x| x > th).count();
    let mut embed = d.u.columns(0, rk).into_owned();
    for k in 0..rk {
        embed.column_mut(k).scale_mut(d.s[k]);
    }
    let retract = d.v.columns(0, rk).adjoint();
    Ok((embed, retract))
}

/// Coordinates of matrices in the span of a basis, by least squares.
pub struct SpanSolver {
    pinv: CMat,
    flat: CMat,
}

impl SpanSolver {
    pub fn new(basis: &[CMat], tol: &Tolerance) -> Self {
        let d = basis.first().map(|b| b.len()).unwrap_or(0);
        let mut flat = zeros(d, basis.len());
        for (k, b) in basis.iter().enumerate() {
            for (i, z) in b.iter().enumerate() {
                flat[(i, k)] = *z;
            }
        }
        SpanSolver { pinv: pinv(&flat, tol), flat }
    }

    pub fn coords(&self, m: &CMat) -> nalgebra::DVector<C64> {
        let v = nalgebra::DVector::from_iterator(m.len(), m.iter().copied());
        &self.pinv * v
    }

    /// Distance (max-abs) of `m` from the span.
    pub fn residual(&self, m: &CMat) -> f64 {
        let v = nalgebra::DVector::from_iterator(m.len(), m.iter().copied());
        let back = &self.flat * (&self.pinv * &v);
        back.iter().zip(v.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
    }
}

/// Dimension of the span of a set of equally shaped matrices.
pub fn span_dim(mats: &[CMat], tol: &Tolerance) -> usize {
    if mats.is_empty() {
        return 0;
    }
    let d = mats[0].len();
    let mut flat = zeros(d, mats.len());
    for (k, b) in mats.iter().enumerate() {
        for (i, z) in b.iter().enumerate() {
            flat[(i, k)] = *z;
        }
    }
    rank(&flat, tol)
}

pub fn closure_residual(basis: &[CMat], tol: &Tolerance) -> f64 {
    if basis.is_empty() {
        return 0.0;
    }
    let solver = SpanSolver::new(basis, tol);
    let n = basis[0].nrows();
    let mut worst = solver.residual(&eye(n));
    for a in basis {
        for b in basis {
            worst = worst.max(solver.residual(&(a * b)));
        }
    }
    worst
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const MAX_RESEED: usize = 16;

/// Complete set of orthogonal primitive idempotents of the algebra spanned by `basis`.
pub fn primitive_idempotents(
    basis: &[CMat],
    seed: u64,
    tol: &Tolerance,
) -> Result<Vec<CMat>, NumericError> {
    if basis.is_empty() {
        return Ok(vec![]);
    }
    let n = basis[0].nrows();
    if n == 0 {
        return Ok(vec![]);
    }
    let scale = basis.iter().map(max_abs).fold(1.0, f64::max);
    let closure = closure_residual(basis, tol);
    if closure > 1e3 * (tol.abs_eps + tol.rel_eps * scale) {
        return Err(NumericError::NotClosed { residual: closure });
    }
    for attempt in 0..MAX_RESEED {
        let mut rng = seeded_rng(seed.wrapping_mul(0x9E37_79B9).wrapping_add(attempt as u64));
        let mut x = zeros(n, n);
        for b in basis {
            let g: f64 = rng.random_range(-1.0..1.0);
            let h: f64 = rng.random_range(-1.0..1.0);
            x += b * C64::new(g, h);
        }
        if let Some(idems) = eigen_projections(&x, tol) {
            if idempotents_ok(&idems, basis, tol) {
                return Ok(idems);
            }
        }
    }
    Err(NumericError::DegenerateSpectrum { attempts: MAX_RESEED })
}

/// Spectral projections of a diagonalizable matrix, one per eigenvalue cluster.
pub fn eigen_projections(x: &CMat, tol: &Tolerance) -> Option<Vec<CMat>> {
    let n = x.nrows();
    let eig = eigenvalues(x)?;
    let spread = eig.iter().fold(0.0f64, |a, z| a.max(z.norm())).max(1.0);
    let gap = 1e-6 * spread;
    let mut clusters: Vec<Vec<C64>> = Vec::new();
    for &z in eig.iter() {
        match clusters.iter_mut().find(|cl| (cl[0] - z).norm() < gap) {
            Some(cl) => cl.push(z),
            None => clusters.push(vec![z]),
        }
    }
    // reject ambiguous clustering
    for (p, a) in clusters.iter().enumerate() {
        for b in clusters.iter().skip(p + 1) {
            if (a[0] - b[0]).norm() < 1e3 * gap {
                return None;
            }
        }
    }
    let mut out = Vec::with_capacity(clusters.len());
    for cl in &clusters {
        let m = cl.len();
        let lam = cl.iter().sum::<C64>() / c(m as f64);
        let shifted = x - eye(n) * lam;
        let right = svd(&shifted);
        let left = svd(&shifted.adjoint());
        let v = right.v.columns(n - m, m).into_owned();
        let u = left.v.columns(n - m, m).into_owned();
        let g = u.adjoint() * &v;
        let gi = inverse(&g).ok()?;
        out.push(&v * gi * u.adjoint());
    }
    let _ = tol;
    Some(out)
}

fn idempotents_ok(idems: &[CMat], basis: &[CMat], tol: &Tolerance) -> bool {
    let n = basis[0].nrows();
    let loose = 1e3 * tol.abs_eps.max(1e-12);
    let mut sum = zeros(n, n);
    for (p, e) in idems.iter().enumerate() {
        if max_abs_diff(&(e * e), e) > loose {
            return false;
        }
        for f in idems.iter().skip(p + 1) {
            if max_abs(&(e * f)) > loose || max_abs(&(f * e)) > loose {
                return false;
            }
        }
        let corner: Vec<CMat> = basis.iter().map(|b| e * b * e).collect();
        if span_dim(&corner, &Tolerance::uniform(1e-7)) != 1 {
            return false;
        }
        sum += e;
    }
    max_abs_diff(&sum, &eye(n)) <= loose
}

/// Group idempotents into isomorphism classes: e ~ f iff e·B·f ≠ 0.
pub fn idempotent_classes(idems: &[CMat], basis: &[CMat], tol: &Tolerance) -> Vec<Vec<usize>> {
    let mut classes: Vec<Vec<usize>> = Vec::new();
    'outer: for (k, e) in idems.iter().enumerate() {
        for cl in classes.iter_mut() {
            let f = &idems[cl[0]];
            let linked = basis.iter().any(|b| max_abs(&(e * b * f)) > 1e3 * tol.abs_eps);
            if linked {
                cl.push(k);
                continue 'outer;
            }
        }
        classes.push(vec![k]);
    }
    classes
}

/// Principal square root, with the positive-imaginary root on the negative real axis.
pub fn principal_sqrt(z: C64) -> C64 {
    if z.im == 0.0 && z.re < 0.0 {
        C64::new(0.0, (-z.re).sqrt())
    } else {
        z.sqrt()
    }
}

/// Serialize a complex number as `[re, im]`.
pub fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn from_pair(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svd_kernel_of_rank_one() {
        let m = CMat::from_row_slice(2, 3, &[ONE, ONE, ZERO, ONE, ONE, ZERO]);
        let k = null_space(&m, &Tolerance::default());
        assert_eq!(k.ncols(), 2);
        assert!(max_abs(&(&m * &k)) < 1e-12);
    }

    #[test]
    fn split_zero_has_rank_zero() {
        let (e, r) = split_idempotent(&zeros(2, 2), &Tolerance::default()).unwrap();
        assert_eq!(e.shape(), (2, 0));
        assert_eq!(r.shape(), (0, 2));
    }

    #[test]
    fn split_rejects_non_idempotent() {
        let p = eye(2) * c(2.0);
        assert!(matches!(
            split_idempotent(&p, &Tolerance::default()),
            Err(NumericError::NotIdempotent { .. })
        ));
    }

    #[test]
    fn sqrt_branch_for_negative_reals() {
        let r = principal_sqrt(c(-4.0));
        assert!((r - C64::new(0.0, 2.0)).norm() < 1e-15);
        let r = principal_sqrt(C64::new(-4.0, -0.0));
        assert!((r - C64::new(0.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn pinv_of_invertible_is_inverse() {
        let m = CMat::from_row_slice(2, 2, &[c(2.0), c(1.0), c(0.0), c(3.0)]);
        let p = pinv(&m, &Tolerance::default());
        assert!(max_abs_diff(&(&m * &p), &eye(2)) < 1e-12);
    }
}
