//! Dense complex matrix kernel: Hermitian eigendecomposition, matrix
//! functions and generalized inverses, support projections, the real
//! Hilbert–Schmidt geometry, and the canonical generator constructions
//! (Pauli matrices, quaternion embedding, spin factors).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

pub type CMat = DMatrix<Complex64>;

/// Relative Hermitian defect accepted before an input is rejected.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Relative reconstruction tolerance of the eigensolver.
pub const EIG_TOL: f64 = 1e-12;
/// Eigenvalues below `RANK_TOL * lambda_max` count as kernel.
pub const RANK_TOL: f64 = 1e-10;
/// Relative tolerance for negative eigenvalue dust on PSD inputs.
pub const PSD_TOL: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn eye(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn zeros(d: usize) -> CMat {
    CMat::zeros(d, d)
}

pub fn diag(entries: &[f64]) -> CMat {
    CMat::from_diagonal(&DVector::from_iterator(
        entries.len(),
        entries.iter().map(|&x| cr(x)),
    ))
}

pub fn frob(a: &CMat) -> f64 {
    a.norm()
}

pub fn all_finite(a: &CMat) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Real Hilbert–Schmidt inner product `Re tr A*B`.
pub fn hs_inner(a: &CMat, b: &CMat) -> Result<f64> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(Error::DimMismatch(a.nrows(), b.nrows()));
    }
    Ok(a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.re * y.re + x.im * y.im)
        .sum())
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Jordan product `(AB + BA)/2`.
pub fn jordan(a: &CMat, b: &CMat) -> CMat {
    (a * b + b * a).scale(0.5)
}

pub fn hermitize(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

/// `‖A − A*‖_F / (1 + ‖A‖_F)`.
pub fn hermitian_defect(a: &CMat) -> f64 {
    (a - a.adjoint()).norm() / (1.0 + a.norm())
}

pub fn ensure_hermitian(a: &CMat) -> Result<()> {
    if !all_finite(a) {
        return Err(Error::NonFinite);
    }
    let defect = hermitian_defect(a);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian { defect });
    }
    Ok(())
}

/// Hermitian eigendecomposition `A = U diag(λ) U*`, eigenvalues descending.
pub struct HermEig {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Unitary matrix of eigenvectors, column `k` belonging to `values[k]`.
    pub vectors: CMat,
}

impl HermEig {
    pub fn reconstruct(&self) -> CMat {
        (&self.vectors * diag(&self.values)) * self.vectors.adjoint()
    }
}

/// Cyclic two-sided Jacobi diagonalization of a Hermitian matrix. Slower
/// than tridiagonal QR but unconditionally stable, deterministic, and
/// immune to eigenpair mispairing on structured inputs (exact zero rows
/// defeat the QR path of some solvers).
fn jacobi_hermitian(a: &CMat) -> (Vec<f64>, CMat) {
    let d = a.nrows();
    let mut b = hermitize(a);
    let mut u = eye(d);
    let scale = b.norm().max(1e-300);
    let tol = 1e-15 * scale;
    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for p in 0..d {
            for q in (p + 1)..d {
                off += b[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = b[(p, q)];
                let h = apq.norm();
                if h <= tol / (d as f64) {
                    continue;
                }
                // phase that makes the pivot real, then a real rotation
                let w = apq / cr(h);
                let app = b[(p, p)].re;
                let aqq = b[(q, q)].re;
                let tau = (aqq - app) / (2.0 * h);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let cth = 1.0 / (1.0 + t * t).sqrt();
                let sth = t * cth;
                // columns: (p, q) <- (c·p - s·w̄·q, s·w·p + c·q)
                let (cp, sp) = (cr(cth), w.conj() * cr(sth));
                let (sq, cq) = (w * cr(sth), cr(cth));
                for i in 0..d {
                    let bp = b[(i, p)];
                    let bq = b[(i, q)];
                    b[(i, p)] = bp * cp - bq * sp;
                    b[(i, q)] = bp * sq + bq * cq;
                    let up = u[(i, p)];
                    let uq = u[(i, q)];
                    u[(i, p)] = up * cp - uq * sp;
                    u[(i, q)] = up * sq + uq * cq;
                }
                for j in 0..d {
                    let bp = b[(p, j)];
                    let bq = b[(q, j)];
                    b[(p, j)] = bp * cp.conj() - bq * sp.conj();
                    b[(q, j)] = bp * sq.conj() + bq * cq.conj();
                }
                b[(p, q)] = cr(0.0);
                b[(q, p)] = cr(0.0);
            }
        }
    }
    let values: Vec<f64> = (0..d).map(|i| b[(i, i)].re).collect();
    (values, u)
}

pub fn herm_eig(a: &CMat) -> Result<HermEig> {
    ensure_hermitian(a)?;
    let d = a.nrows();
    let (raw_values, raw_vectors) = jacobi_hermitian(a);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| raw_values[j].partial_cmp(&raw_values[i]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| raw_values[i]).collect();
    let mut vectors = zeros(d);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &raw_vectors.column(i));
    }
    Ok(HermEig { values, vectors })
}

/// Eigendecomposition of a real symmetric matrix by the same Jacobi
/// scheme, eigenvalues ascending with correctly paired vectors. This is
/// the backend for every Gram-matrix nullspace in the crate.
pub fn sym_eig_real(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let d = a.nrows();
    let ac = CMat::from_fn(d, d, |i, j| cr((a[(i, j)] + a[(j, i)]) / 2.0));
    let (raw_values, raw_vectors) = jacobi_hermitian(&ac);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| raw_values[i].partial_cmp(&raw_values[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| raw_values[i]).collect();
    let mut vectors = DMatrix::zeros(d, d);
    for (k, &i) in order.iter().enumerate() {
        for r in 0..d {
            vectors[(r, k)] = raw_vectors[(r, i)].re;
        }
    }
    (values, vectors)
}

/// What a matrix function does on the numerical kernel of its argument.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OnKernel {
    /// Kernel eigenvalues map to 0 (generalized-inverse convention).
    Zero,
    /// Kernel eigenvalues map to 1.
    Identity,
}

/// Applies `f` on the spectrum of a Hermitian matrix. Eigenvalues with
/// `|λ| ≤ rank_tol · max|λ|` are treated as kernel and map to 0 or 1
/// according to `on_kernel`; `f` is never evaluated there.
pub fn matfun<F>(a: &CMat, on_kernel: OnKernel, rank_tol: f64, f: F) -> Result<CMat>
where
    F: Fn(f64) -> Option<f64>,
{
    let eig = herm_eig(a)?;
    let scale = eig.values.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let cut = rank_tol * scale;
    let mut mapped = Vec::with_capacity(eig.values.len());
    for &lam in &eig.values {
        if lam.abs() <= cut {
            mapped.push(match on_kernel {
                OnKernel::Zero => 0.0,
                OnKernel::Identity => 1.0,
            });
        } else {
            mapped.push(f(lam).ok_or(Error::FunctionUndefined { eigenvalue: lam })?);
        }
    }
    Ok((&eig.vectors * diag(&mapped)) * eig.vectors.adjoint())
}

/// Moore–Penrose inverse of a Hermitian matrix (zero on the kernel).
pub fn geninv(a: &CMat) -> Result<CMat> {
    matfun(a, OnKernel::Zero, RANK_TOL, |lam| Some(1.0 / lam))
}

/// Minimum eigenvalue of a Hermitian matrix.
pub fn min_eig(a: &CMat) -> Result<f64> {
    let eig = herm_eig(a)?;
    Ok(*eig.values.last().expect("nonempty spectrum"))
}

pub fn ensure_psd(a: &CMat) -> Result<()> {
    let me = min_eig(a)?;
    if me < -PSD_TOL * (1.0 + a.norm()) {
        return Err(Error::NotPsd { min_eig: me });
    }
    Ok(())
}

/// Square root of a PSD matrix; negative dust within tolerance is clipped.
pub fn sqrt_psd(a: &CMat) -> Result<CMat> {
    ensure_psd(a)?;
    matfun(a, OnKernel::Zero, RANK_TOL, |lam| Some(lam.max(0.0).sqrt()))
}

/// Generalized inverse square root of a PSD matrix (zero on the kernel).
pub fn inv_sqrt_psd(a: &CMat) -> Result<CMat> {
    ensure_psd(a)?;
    matfun(a, OnKernel::Zero, RANK_TOL, |lam| {
        if lam > 0.0 {
            Some(1.0 / lam.sqrt())
        } else {
            None
        }
    })
}

/// Support projection of a PSD matrix: rank counts eigenvalues above
/// `rank_tol · lambda_max`.
pub fn support_proj(a: &CMat, rank_tol: f64) -> Result<CMat> {
    ensure_psd(a)?;
    matfun(a, OnKernel::Zero, rank_tol, |_| Some(1.0))
}

/// The Pauli matrices `(σ1, σ2, σ3)`.
pub fn pauli() -> [CMat; 3] {
    let sx = CMat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)]);
    let sy = CMat::from_row_slice(2, 2, &[cr(0.0), c(0.0, -1.0), c(0.0, 1.0), cr(0.0)]);
    let sz = CMat::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(-1.0)]);
    [sx, sy, sz]
}

/// A quaternion in `(w, x, y, z)` storage order.
pub type Quaternion = [f64; 4];

/// 2x2 complex realization of a single quaternion, the standard form
/// `[[w+zi, -y+xi], [y+xi, w-zi]]`. It is a ring homomorphism and sends
/// quaternion conjugation to the adjoint.
pub fn quaternion_block(q: Quaternion) -> CMat {
    let [w, x, y, z] = q;
    CMat::from_row_slice(2, 2, &[c(w, z), c(-y, x), c(y, x), c(w, -z)])
}

/// Entry-wise complex realization of an `n×n` quaternion matrix
/// (row-major entries) as a `2n×2n` complex matrix.
pub fn quaternion_embed(n: usize, entries: &[Quaternion]) -> CMat {
    assert_eq!(entries.len(), n * n, "need n*n quaternion entries");
    let mut out = zeros(2 * n);
    for a in 0..n {
        for b in 0..n {
            let blk = quaternion_block(entries[a * n + b]);
            for s in 0..2 {
                for t in 0..2 {
                    out[(2 * a + s, 2 * b + t)] = blk[(s, t)];
                }
            }
        }
    }
    out
}

/// Hermitian generators of a spin factor: `γ_i ∘ γ_j = δ_ij I`.
pub struct SpinFactorGenerators {
    pub n: usize,
    /// `n` Hermitian matrices of dimension `2^⌊n/2⌋`, entries in {0, ±1, ±i}.
    pub gammas: Vec<CMat>,
}

/// Spin-factor generators of rank `n ≥ 1`, dimension `2^⌊n/2⌋`. Base cases
/// `n ≤ 4` are fixed explicitly (Pauli matrices, and the quadruple
/// `σ1⊗σ1, σ1⊗σ2, σ1⊗σ3, σ3⊗I` at `n = 4`); `n+2` comes from `n` by the
/// 2x2 block recursion `γ'_i = offdiag(γ_i)`, `γ'_{n+1} = diag(I, -I)`,
/// `γ'_{n+2} = [[0,-iI],[iI,0]]`.
pub fn spin_factor(n: usize) -> SpinFactorGenerators {
    assert!(n >= 1);
    let [sx, sy, sz] = pauli();
    let gammas = match n {
        1 => vec![eye(1)],
        2 => vec![sx, sz],
        3 => vec![sx, sy, sz],
        4 => vec![
            sx.kronecker(&sx),
            sx.kronecker(&sy),
            sx.kronecker(&sz),
            sz.kronecker(&eye(2)),
        ],
        _ => {
            let prev = spin_factor(n - 2);
            let d = prev.gammas[0].nrows();
            let mut out = Vec::with_capacity(n);
            for g in &prev.gammas {
                let mut m = zeros(2 * d);
                for i in 0..d {
                    for j in 0..d {
                        m[(i, d + j)] = g[(i, j)];
                        m[(d + i, j)] = g[(i, j)];
                    }
                }
                out.push(m);
            }
            let mut gp = zeros(2 * d);
            let mut gq = zeros(2 * d);
            for i in 0..d {
                gp[(i, i)] = cr(1.0);
                gp[(d + i, d + i)] = cr(-1.0);
                gq[(i, d + i)] = c(0.0, -1.0);
                gq[(d + i, i)] = c(0.0, 1.0);
            }
            out.push(gp);
            out.push(gq);
            out
        }
    };
    SpinFactorGenerators { n, gammas }
}

// ---------------------------------------------------------------------
// Real vectorization of B(H): row-major entries, [re, im] interleaved.
// The canonical basis {E_kl, iE_kl} is orthonormal for the real HS inner
// product, so vectorize is an isometry onto R^(2d^2).
// ---------------------------------------------------------------------

pub fn vec_dim(d: usize) -> usize {
    2 * d * d
}

pub fn vectorize(a: &CMat) -> DVector<f64> {
    let d = a.nrows();
    let mut v = DVector::zeros(2 * d * d);
    for k in 0..d {
        for l in 0..d {
            let z = a[(k, l)];
            v[2 * (k * d + l)] = z.re;
            v[2 * (k * d + l) + 1] = z.im;
        }
    }
    v
}

pub fn unvectorize(d: usize, v: &DVector<f64>) -> CMat {
    assert_eq!(v.len(), 2 * d * d);
    CMat::from_fn(d, d, |k, l| c(v[2 * (k * d + l)], v[2 * (k * d + l) + 1]))
}

/// Canonical orthonormal real basis of B(H): `E_kl` then `iE_kl`, row-major.
pub fn std_basis(d: usize) -> Vec<CMat> {
    let mut out = Vec::with_capacity(2 * d * d);
    for k in 0..d {
        for l in 0..d {
            let mut e = zeros(d);
            e[(k, l)] = cr(1.0);
            let mut ie = zeros(d);
            ie[(k, l)] = c(0.0, 1.0);
            out.push(e);
            out.push(ie);
        }
    }
    out
}

/// Orthonormal basis of the Hermitian operators: diagonal units, then
/// `(E_kl + E_lk)/√2` and `i(E_kl − E_lk)/√2` for `k < l`.
pub fn herm_basis(d: usize) -> Vec<CMat> {
    let mut out = Vec::with_capacity(d * d);
    let s = 1.0 / 2.0f64.sqrt();
    for k in 0..d {
        let mut e = zeros(d);
        e[(k, k)] = cr(1.0);
        out.push(e);
    }
    for k in 0..d {
        for l in (k + 1)..d {
            let mut re = zeros(d);
            re[(k, l)] = cr(s);
            re[(l, k)] = cr(s);
            out.push(re);
            let mut im = zeros(d);
            im[(k, l)] = c(0.0, s);
            im[(l, k)] = c(0.0, -s);
            out.push(im);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn approx_eq(a: &CMat, b: &CMat, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
    }

    #[test]
    fn hs_inner_identity_and_paulis() {
        let [sx, sy, _] = pauli();
        assert_eq!(hs_inner(&eye(2), &eye(2)).unwrap(), 2.0);
        assert_eq!(hs_inner(&sx, &sy).unwrap(), 0.0);
        let a = CMat::from_row_slice(2, 2, &[c(1.0, 2.0), c(0.0, -1.0), cr(3.0), c(-2.0, 0.5)]);
        let sq: f64 = a.iter().map(|z| z.norm_sqr()).sum();
        assert!((hs_inner(&a, &a).unwrap() - sq).abs() < 1e-14);
        assert!(hs_inner(&eye(2), &eye(3)).is_err());
    }

    #[test]
    fn herm_eig_pinned_cases() {
        let [_, _, sz] = pauli();
        let eig = herm_eig(&sz).unwrap();
        assert_eq!(eig.values, vec![1.0, -1.0]);
        assert!(approx_eq(&eig.reconstruct(), &sz, 1e-14));

        let eig3 = herm_eig(&eye(3)).unwrap();
        assert_eq!(eig3.values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn herm_eig_rejects_non_hermitian() {
        let mut a = eye(2);
        a[(0, 1)] = cr(0.5);
        assert!(matches!(herm_eig(&a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn herm_eig_reconstructs_random_hermitian() {
        // residual check is the oracle
        let mut rng = crate::sampling::rng_from_seed(11);
        for d in [2usize, 3, 5, 8] {
            let a = crate::sampling::random_hermitian(d, &mut rng);
            let eig = herm_eig(&a).unwrap();
            assert!((eig.reconstruct() - &a).norm() < 1e-12 * (1.0 + a.norm()));
            let u = &eig.vectors;
            assert!(approx_eq(&(u.adjoint() * u), &eye(d), 1e-12));
            for w in eig.values.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn matfun_pinned_cases() {
        let a = diag(&[4.0, 0.0]);
        let r = matfun(&a, OnKernel::Zero, RANK_TOL, |l| Some(l.sqrt())).unwrap();
        assert!(approx_eq(&r, &diag(&[2.0, 0.0]), 1e-14));

        let g = geninv(&diag(&[2.0, 0.0])).unwrap();
        assert!(approx_eq(&g, &diag(&[0.5, 0.0]), 1e-14));

        let k = matfun(&diag(&[3.0, 0.0]), OnKernel::Identity, RANK_TOL, |l| Some(l)).unwrap();
        assert!(approx_eq(&k, &diag(&[3.0, 1.0]), 1e-14));

        // f undefined on a retained eigenvalue
        let bad = matfun(&diag(&[-1.0, 2.0]), OnKernel::Zero, RANK_TOL, |l| {
            if l > 0.0 {
                Some(l.sqrt())
            } else {
                None
            }
        });
        assert!(matches!(bad, Err(Error::FunctionUndefined { .. })));
    }

    #[test]
    fn inv_sqrt_of_rank_deficient_psd_satisfies_moore_penrose() {
        let mut rng = crate::sampling::rng_from_seed(7);
        for d in [3usize, 5] {
            let a = crate::sampling::random_rank_deficient_psd(d, d - 1, &mut rng);
            let x = inv_sqrt_psd(&a).unwrap();
            // X is the MP inverse of A^{1/2}: X² = geninv(A), A^{1/2} X = supp(A)
            let gi = geninv(&a).unwrap();
            assert!(approx_eq(&(&x * &x), &gi, 1e-9));
            let s = support_proj(&a, RANK_TOL).unwrap();
            let h = sqrt_psd(&a).unwrap();
            assert!(approx_eq(&(&h * &x), &s, 1e-9));
        }
    }

    #[test]
    fn support_proj_pinned_cases() {
        let s = support_proj(&diag(&[0.7, 0.3, 0.0]), RANK_TOL).unwrap();
        assert!(approx_eq(&s, &diag(&[1.0, 1.0, 0.0]), 1e-14));

        let p = support_proj(&diag(&[0.5, 0.1]), RANK_TOL).unwrap();
        assert!(approx_eq(&p, &eye(2), 1e-14));

        // rank-1 projector is its own support
        let v = DVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        let proj = CMat::from_fn(2, 2, |i, j| v[i] * v[j].conj());
        assert!(approx_eq(
            &support_proj(&proj, RANK_TOL).unwrap(),
            &proj,
            1e-12
        ));

        assert!(matches!(
            support_proj(&diag(&[1.0, -0.5]), RANK_TOL),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn quaternion_units_pinned() {
        assert!(approx_eq(
            &quaternion_block([1.0, 0.0, 0.0, 0.0]),
            &eye(2),
            0.0
        ));
        let [sx, _, _] = pauli();
        let i_sx = sx.map(|z| z * c(0.0, 1.0));
        assert!(approx_eq(&quaternion_block([0.0, 1.0, 0.0, 0.0]), &i_sx, 0.0));
    }

    // independent quaternion arithmetic oracle
    fn qmul(a: Quaternion, b: Quaternion) -> Quaternion {
        let [aw, ax, ay, az] = a;
        let [bw, bx, by, bz] = b;
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    }

    fn qmat_mul(n: usize, a: &[Quaternion], b: &[Quaternion]) -> Vec<Quaternion> {
        let mut out = vec![[0.0; 4]; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = [0.0; 4];
                for k in 0..n {
                    let p = qmul(a[i * n + k], b[k * n + j]);
                    for t in 0..4 {
                        acc[t] += p[t];
                    }
                }
                out[i * n + j] = acc;
            }
        }
        out
    }

    proptest! {
        #[test]
        fn quaternion_embed_is_ring_homomorphism(
            a in proptest::collection::vec(-2.0f64..2.0, 16),
            b in proptest::collection::vec(-2.0f64..2.0, 16),
        ) {
            let qa: Vec<Quaternion> = a.chunks(4).map(|q| [q[0], q[1], q[2], q[3]]).collect();
            let qb: Vec<Quaternion> = b.chunks(4).map(|q| [q[0], q[1], q[2], q[3]]).collect();
            let ea = quaternion_embed(2, &qa);
            let eb = quaternion_embed(2, &qb);
            let eab = quaternion_embed(2, &qmat_mul(2, &qa, &qb));
            prop_assert!((ea.clone() * &eb - &eab).norm() < 1e-10);
            // sum and adjoint
            let qsum: Vec<Quaternion> = qa.iter().zip(&qb)
                .map(|(x, y)| [x[0]+y[0], x[1]+y[1], x[2]+y[2], x[3]+y[3]]).collect();
            prop_assert!((&ea + &eb - quaternion_embed(2, &qsum)).norm() < 1e-12);
            let qconj_t: Vec<Quaternion> = (0..4)
                .map(|idx| {
                    let (i, j) = (idx / 2, idx % 2);
                    let q = qa[j * 2 + i];
                    [q[0], -q[1], -q[2], -q[3]]
                })
                .collect();
            prop_assert!((ea.adjoint() - quaternion_embed(2, &qconj_t)).norm() < 1e-12);
        }

        #[test]
        fn hs_inner_is_a_real_inner_product(
            x in proptest::collection::vec(-3.0f64..3.0, 8),
            y in proptest::collection::vec(-3.0f64..3.0, 8),
            r in -2.0f64..2.0,
        ) {
            let a = CMat::from_fn(2, 2, |i, j| c(x[2*(2*i+j)], x[2*(2*i+j)+1]));
            let b = CMat::from_fn(2, 2, |i, j| c(y[2*(2*i+j)], y[2*(2*i+j)+1]));
            let ab = hs_inner(&a, &b).unwrap();
            prop_assert!((hs_inner(&b, &a).unwrap() - ab).abs() < 1e-12);
            let scaled = hs_inner(&a.map(|z| z * cr(r)), &b).unwrap();
            prop_assert!((scaled - r * ab).abs() < 1e-10);
            if a.norm() > 1e-9 {
                prop_assert!(hs_inner(&a, &a).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn matfun_identity_function_recovers_input() {
        let mut rng = crate::sampling::rng_from_seed(3);
        let a = crate::sampling::random_hermitian(4, &mut rng);
        let r = matfun(&a, OnKernel::Zero, RANK_TOL, |l| Some(l)).unwrap();
        assert!((r - &a).norm() <= EIG_TOL * (1.0 + a.norm()) * 10.0);
    }

    #[test]
    fn sqrt_squares_back_for_psd() {
        let mut rng = crate::sampling::rng_from_seed(4);
        let a = crate::sampling::random_psd(5, &mut rng);
        let r = sqrt_psd(&a).unwrap();
        assert!((&r * &r - &a).norm() <= 1e-10 * (1.0 + a.norm()));
    }

    #[test]
    fn spin_factor_relations_exact() {
        for n in 1..=7 {
            let sf = spin_factor(n);
            assert_eq!(sf.gammas.len(), n);
            let d = 1 << (n / 2);
            assert_eq!(sf.gammas[0].nrows(), d);
            for g in &sf.gammas {
                assert_eq!(hermitian_defect(g), 0.0);
                // entries exactly in {0, ±1, ±i}
                for z in g.iter() {
                    let ok = (z.re == 0.0 && z.im == 0.0)
                        || (z.re.abs() == 1.0 && z.im == 0.0)
                        || (z.im.abs() == 1.0 && z.re == 0.0);
                    assert!(ok, "entry {z} not in {{0, ±1, ±i}}");
                }
            }
            for i in 0..n {
                for j in 0..n {
                    let jp = jordan(&sf.gammas[i], &sf.gammas[j]);
                    let expect = if i == j { eye(d) } else { zeros(d) };
                    assert_eq!((jp - expect).norm(), 0.0, "n={n} i={i} j={j}");
                }
            }
        }
    }

    #[test]
    fn spin_factor_three_is_pauli() {
        let sf = spin_factor(3);
        let [sx, sy, sz] = pauli();
        assert_eq!((&sf.gammas[0] - sx).norm(), 0.0);
        assert_eq!((&sf.gammas[1] - sy).norm(), 0.0);
        assert_eq!((&sf.gammas[2] - sz).norm(), 0.0);
    }

    #[test]
    fn paper_gamma4_generators_pass_the_same_check() {
        let [s1, s2, s3] = pauli();
        let gens = [
            s1.kronecker(&s1),
            s1.kronecker(&s2),
            s1.kronecker(&s3),
            s3.kronecker(&eye(2)),
        ];
        for i in 0..4 {
            for j in 0..4 {
                let jp = jordan(&gens[i], &gens[j]);
                let expect = if i == j { eye(4) } else { zeros(4) };
                assert!((jp - expect).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn vectorize_roundtrip_and_isometry() {
        let a = CMat::from_row_slice(2, 2, &[c(1.0, -2.0), cr(0.5), c(0.0, 3.0), c(-1.0, 1.0)]);
        let v = vectorize(&a);
        assert_eq!(unvectorize(2, &v), a);
        let b = CMat::from_row_slice(2, 2, &[cr(2.0), c(1.0, 1.0), cr(0.0), c(0.0, -1.0)]);
        assert!((v.dot(&vectorize(&b)) - hs_inner(&a, &b).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn bases_are_orthonormal() {
        for basis in [std_basis(3), herm_basis(3)] {
            for (i, a) in basis.iter().enumerate() {
                for (j, b) in basis.iter().enumerate() {
                    let ip = hs_inner(a, b).unwrap();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - expect).abs() < 1e-14);
                }
            }
        }
        assert_eq!(herm_basis(3).len(), 9);
        for h in herm_basis(3) {
            assert!(hermitian_defect(&h) < 1e-15);
        }
    }
}
