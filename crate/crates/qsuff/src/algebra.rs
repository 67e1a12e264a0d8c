//! Real-linear operator subspaces with orthonormal bases under the real
//! Hilbert–Schmidt inner product; closure generation for real *-algebras
//! and real Jordan algebras; orthogonal projections; structural
//! predicates (closure flags, modular invariance, commutants).

use nalgebra::{DMatrix, DVector};

use crate::matcore::{
    self, c, eye, hermitian_defect, jordan, unvectorize, vec_dim, vectorize, CMat,
};
use crate::model::Superoperator;
use crate::{Error, Result};

/// Orthonormality tolerance of stored bases.
pub const ORTHO_TOL: f64 = 1e-10;
/// Absolute membership threshold, scaled by `1 + ‖B‖`.
pub const MEMBER_TOL: f64 = 1e-8;
/// Candidate directions with smaller residual norm are dropped.
pub const SPAN_TOL: f64 = 1e-10;
/// Faithfulness threshold for projections onto algebras.
pub const FAITHFUL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SubspaceFlags {
    pub contains_identity: bool,
    /// Closed under the adjoint.
    pub star_closed: bool,
    /// Closed under the operator product.
    pub mult_closed: bool,
    /// Hermitian basis closed under the Jordan product.
    pub jordan_closed: bool,
    /// Closed under multiplication by i.
    pub complex_closed: bool,
}

impl SubspaceFlags {
    pub fn is_star_algebra(&self) -> bool {
        self.contains_identity && self.star_closed && self.mult_closed
    }

    pub fn is_jordan_algebra(&self) -> bool {
        self.contains_identity && self.jordan_closed
    }
}

/// Scalar field for algebra closure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scalars {
    Real,
    Complex,
}

/// Result of a membership test.
#[derive(Clone, Copy, Debug)]
pub struct Membership {
    pub contained: bool,
    /// `‖B − Π(B)‖ / ‖B‖` (zero for the zero operator).
    pub residual: f64,
    /// `‖B − Π(B)‖`.
    pub abs_residual: f64,
}

/// Finite real-linear subspace of operators with an orthonormal basis.
#[derive(Clone, Debug)]
pub struct RealSubspace {
    pub dim_ambient: usize,
    basis: Vec<CMat>,
    /// Column `k` is `vectorize(basis[k])`.
    bmat: DMatrix<f64>,
    pub flags: SubspaceFlags,
}

fn first_significant_sign(v: &nalgebra::DVector<f64>) -> f64 {
    for &x in v.iter() {
        if x.abs() > 1e-8 {
            return x.signum();
        }
    }
    1.0
}

/// Orthonormal extension by pivoted modified Gram–Schmidt: each chunk is
/// projected against the current basis (two passes), then the largest
/// residual column is normalized, adjoined, and swept out of the rest.
fn extend(dim: usize, basis: &mut Vec<CMat>, bmat: &mut DMatrix<f64>, candidates: &[CMat]) -> usize {
    let n = vec_dim(dim);
    let cap = n;
    let mut added = 0;
    for chunk in candidates.chunks(1024) {
        if basis.len() >= cap {
            break;
        }
        let mut cm = DMatrix::zeros(n, chunk.len());
        for (j, op) in chunk.iter().enumerate() {
            cm.set_column(j, &vectorize(op));
        }
        let scales: Vec<f64> = (0..chunk.len()).map(|j| cm.column(j).norm()).collect();
        for _ in 0..2 {
            if !basis.is_empty() {
                let coeff = bmat.transpose() * &cm;
                cm -= &*bmat * coeff;
            }
        }
        loop {
            if basis.len() >= cap {
                break;
            }
            let (best, best_norm) = (0..chunk.len())
                .map(|j| (j, cm.column(j).norm()))
                .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap_or((0, 0.0));
            if best_norm <= SPAN_TOL * (1.0 + scales[best]) {
                break;
            }
            let mut col = cm.column(best).clone_owned();
            // a second full re-orthogonalization pass on the winner
            if !basis.is_empty() {
                let coeff = bmat.transpose() * &col;
                col -= &*bmat * coeff;
            }
            let nrm = col.norm();
            if nrm <= SPAN_TOL * (1.0 + scales[best]) {
                cm.set_column(best, &DVector::zeros(n));
                continue;
            }
            col /= nrm;
            // sweep the new direction out of the remaining candidates
            let coeff = col.transpose() * &cm;
            for j in 0..chunk.len() {
                let upd = cm.column(j) - &col * coeff[(0, j)];
                cm.set_column(j, &upd);
            }
            bmat.resize_horizontally_mut(basis.len() + 1, 0.0);
            bmat.set_column(basis.len(), &col);
            basis.push(unvectorize(dim, &col));
            added += 1;
        }
    }
    added
}

impl RealSubspace {
    /// Orthonormal real span of the given operators.
    pub fn span(dim: usize, ops: &[CMat]) -> RealSubspace {
        let mut basis = Vec::new();
        let mut bmat = DMatrix::zeros(vec_dim(dim), 0);
        extend(dim, &mut basis, &mut bmat, ops);
        let mut v = RealSubspace {
            dim_ambient: dim,
            basis,
            bmat,
            flags: SubspaceFlags::default(),
        };
        v.canonicalize();
        v.flags = v.compute_flags();
        v
    }

    /// Wraps an already orthonormal family (e.g. an SVD nullspace basis).
    pub fn from_orthonormal(dim: usize, basis: Vec<CMat>) -> RealSubspace {
        let mut bmat = DMatrix::zeros(vec_dim(dim), basis.len());
        for (k, b) in basis.iter().enumerate() {
            bmat.set_column(k, &vectorize(b));
        }
        let mut v = RealSubspace {
            dim_ambient: dim,
            basis,
            bmat,
            flags: SubspaceFlags::default(),
        };
        v.canonicalize();
        v.flags = v.compute_flags();
        v
    }

    /// Sign convention: the first significant vectorized coefficient of
    /// every basis element is positive.
    fn canonicalize(&mut self) {
        for k in 0..self.basis.len() {
            let col = self.bmat.column(k).clone_owned();
            if first_significant_sign(&col) < 0.0 {
                self.bmat.set_column(k, &(-col));
                self.basis[k] = self.basis[k].map(|z| -z);
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CMat] {
        &self.basis
    }

    pub fn member(&self, b: &CMat) -> Membership {
        let v = vectorize(b);
        let norm = v.norm();
        let coeff = self.bmat.transpose() * &v;
        let resid = &v - &self.bmat * coeff;
        let abs_residual = resid.norm();
        Membership {
            contained: abs_residual <= MEMBER_TOL * (1.0 + norm),
            residual: if norm > 0.0 { abs_residual / norm } else { 0.0 },
            abs_residual,
        }
    }

    /// Orthogonal projection onto the subspace.
    pub fn project(&self, b: &CMat) -> CMat {
        let v = vectorize(b);
        let coeff = self.bmat.transpose() * &v;
        unvectorize(self.dim_ambient, &(&self.bmat * coeff))
    }

    /// The projection as an explicit superoperator.
    pub fn projector_superop(&self) -> Superoperator {
        Superoperator {
            dim: self.dim_ambient,
            mat: &self.bmat * self.bmat.transpose(),
        }
    }

    /// Max residual over the other subspace's basis; contained iff every
    /// basis element of `other` is a member here.
    pub fn contains(&self, other: &RealSubspace) -> (bool, f64) {
        let mut worst = 0.0f64;
        let mut ok = true;
        for b in &other.basis {
            let m = self.member(b);
            worst = worst.max(m.abs_residual);
            ok &= m.contained;
        }
        (ok, worst)
    }

    /// Hermitian elements of the subspace, as a subspace: the coefficient
    /// nullspace of `v ↦ v − v*`.
    pub fn hermitian_part(&self) -> RealSubspace {
        let k = self.basis.len();
        if k == 0 {
            return RealSubspace::span(self.dim_ambient, &[]);
        }
        let n = vec_dim(self.dim_ambient);
        let mut defect = DMatrix::zeros(n, k);
        for (j, b) in self.basis.iter().enumerate() {
            defect.set_column(j, &vectorize(&(b - b.adjoint())));
        }
        let gram = defect.transpose() * &defect;
        let (vals, vecs) = matcore::sym_eig_real(&gram);
        let lmax = vals.last().copied().unwrap_or(0.0);
        let mut herm = Vec::new();
        for (i, &lam) in vals.iter().enumerate() {
            if lam <= 1e-12 * lmax.max(1.0) {
                let mut acc = matcore::zeros(self.dim_ambient);
                for (j, b) in self.basis.iter().enumerate() {
                    acc += b.scale(vecs[(j, i)]);
                }
                herm.push(acc);
            }
        }
        RealSubspace::span(self.dim_ambient, &herm)
    }

    fn compute_flags(&self) -> SubspaceFlags {
        let d = self.dim_ambient;
        let k = self.basis.len();
        let contains_identity = self.member(&eye(d)).contained;
        let star_closed = self
            .basis
            .iter()
            .all(|b| self.member(&b.adjoint()).contained);
        let complex_closed = self
            .basis
            .iter()
            .all(|b| self.member(&b.map(|z| z * c(0.0, 1.0))).contained);
        // subsample pairs when the full quadratic sweep would be large
        let stride = if k * k > 4096 { k * k / 4096 + 1 } else { 1 };
        let mut mult_closed = true;
        let mut jordan_closed = self.basis.iter().all(|b| hermitian_defect(b) <= 1e-10);
        let mut idx = 0usize;
        for i in 0..k {
            for j in 0..k {
                if idx % stride == 0 {
                    let p = &self.basis[i] * &self.basis[j];
                    mult_closed &= self.member(&p).contained;
                    if jordan_closed {
                        let jp = jordan(&self.basis[i], &self.basis[j]);
                        jordan_closed &= self.member(&jp).contained;
                    }
                }
                idx += 1;
            }
        }
        SubspaceFlags {
            contains_identity,
            star_closed,
            mult_closed,
            jordan_closed,
            complex_closed,
        }
    }
}

fn close(
    dim: usize,
    seeds: &[CMat],
    products: bool,
    jordan_products: bool,
    scalars: Scalars,
    maps: &[&Superoperator],
) -> RealSubspace {
    let full = vec_dim(dim);
    let mut seed_all: Vec<CMat> = vec![eye(dim)];
    seed_all.extend_from_slice(seeds);
    if products {
        seed_all.extend(seeds.iter().map(|s| s.adjoint()));
    }
    if scalars == Scalars::Complex {
        let imag: Vec<CMat> = seed_all.iter().map(|s| s.map(|z| z * c(0.0, 1.0))).collect();
        seed_all.extend(imag);
    }
    let mut basis = Vec::new();
    let mut bmat = DMatrix::zeros(full, 0);
    extend(dim, &mut basis, &mut bmat, &seed_all);
    let mut frontier_start = 0usize;
    while basis.len() < full {
        let mut candidates = Vec::new();
        let frontier = frontier_start..basis.len();
        for i in frontier.clone() {
            for j in 0..basis.len() {
                if products {
                    candidates.push(&basis[i] * &basis[j]);
                    if j < frontier_start {
                        candidates.push(&basis[j] * &basis[i]);
                    }
                } else if jordan_products {
                    candidates.push(jordan(&basis[i], &basis[j]));
                }
            }
            if products {
                candidates.push(basis[i].adjoint());
            }
            if scalars == Scalars::Complex {
                candidates.push(basis[i].map(|z| z * c(0.0, 1.0)));
            }
            for t in maps {
                candidates.push(t.apply(&basis[i]));
            }
        }
        frontier_start = basis.len();
        let added = extend(dim, &mut basis, &mut bmat, &candidates);
        if added == 0 {
            break;
        }
    }
    let mut v = RealSubspace {
        dim_ambient: dim,
        basis,
        bmat,
        flags: SubspaceFlags::default(),
    };
    v.canonicalize();
    v.flags = v.compute_flags();
    v
}

/// Smallest subspace containing the generators and `I`, closed under
/// products, adjoints, and the requested scalar field.
pub fn generate_star(dim: usize, gens: &[CMat], scalars: Scalars) -> RealSubspace {
    close(dim, gens, true, false, scalars, &[])
}

/// Star closure that additionally adjoins images under the given maps
/// each round (used for modular-image adjunction).
pub fn generate_star_invariant(
    dim: usize,
    gens: &[CMat],
    scalars: Scalars,
    maps: &[&Superoperator],
) -> RealSubspace {
    close(dim, gens, true, false, scalars, maps)
}

/// Smallest real span containing the Hermitian generators and `I`, closed
/// under the Jordan product.
pub fn generate_jordan(dim: usize, gens: &[CMat]) -> Result<RealSubspace> {
    for g in gens {
        let defect = hermitian_defect(g);
        if defect > matcore::HERMITIAN_TOL * 10.0 {
            return Err(Error::NotHermitian { defect });
        }
    }
    let herm: Vec<CMat> = gens.iter().map(matcore::hermitize).collect();
    Ok(close(dim, &herm, false, true, Scalars::Real, &[]))
}

/// Commutant of the subspace inside the full operator algebra.
pub fn commutant(v: &RealSubspace) -> RealSubspace {
    let d = v.dim_ambient;
    let n = vec_dim(d);
    let mut gram = DMatrix::<f64>::zeros(n, n);
    for b in v.basis() {
        let b = b.clone();
        let sop = Superoperator::from_map(d, |x| &b * x - x * &b);
        gram += sop.mat.transpose() * &sop.mat;
    }
    let (vals, vecs) = matcore::sym_eig_real(&gram);
    let lmax = vals.last().copied().unwrap_or(0.0);
    let mut basis = Vec::new();
    for (k, &lam) in vals.iter().enumerate() {
        if lam <= 1e-12 * lmax.max(1.0) {
            basis.push(unvectorize(d, &vecs.column(k).clone_owned()));
        }
    }
    RealSubspace::from_orthonormal(d, basis)
}

/// Whether `ρ b ρ^{-1}` stays in the subspace for every basis element.
/// Requires a real *-subalgebra.
pub fn is_modular_invariant(v: &RealSubspace, rho: &CMat) -> Result<bool> {
    Ok(modular_residual(v, rho)?.1)
}

/// Max modular-image membership residual over the basis, and the verdict.
pub fn modular_residual(v: &RealSubspace, rho: &CMat) -> Result<(f64, bool)> {
    if !v.flags.is_star_algebra() {
        return Err(Error::MissingClosure("real *-subalgebra"));
    }
    let delta = crate::model::modular_superop(rho)?;
    let mut worst = 0.0f64;
    let mut ok = true;
    for b in v.basis() {
        let m = v.member(&delta.apply(b));
        worst = worst.max(m.abs_residual);
        ok &= m.contained;
    }
    Ok((worst, ok))
}

/// Per-predicate residual report.
#[derive(Clone, Debug)]
pub struct PredicateReport {
    pub contains_identity: (bool, f64),
    pub star_closed: (bool, f64),
    pub mult_closed: (bool, f64),
    pub jordan_closed: (bool, f64),
    pub complex_closed: (bool, f64),
    /// Smallest eigenvalue seen in the sampled real-CP inequality for the
    /// orthogonal projection (star algebras only).
    pub real_cp_min_eig: Option<f64>,
}

/// Residual checks for every closure flag, plus a sampled real complete
/// positivity smoke test of the orthogonal projection when the subspace
/// is a star algebra: `Σ_ij A_i* Π(B_i* B_j) A_j ≥ 0` for collections of
/// size ≤ 3.
pub fn verify_predicates(v: &RealSubspace, seed: u64) -> PredicateReport {
    let d = v.dim_ambient;
    let worst =
        |ops: &mut dyn Iterator<Item = CMat>| -> (bool, f64) {
            let mut w = 0.0f64;
            let mut ok = true;
            for op in ops {
                let m = v.member(&op);
                w = w.max(m.abs_residual);
                ok &= m.contained;
            }
            (ok, w)
        };
    let contains_identity = worst(&mut std::iter::once(eye(d)));
    let star_closed = worst(&mut v.basis().iter().map(|b| b.adjoint()));
    let complex_closed = worst(&mut v.basis().iter().map(|b| b.map(|z| z * c(0.0, 1.0))));
    let pairs = || {
        v.basis()
            .iter()
            .flat_map(|a| v.basis().iter().map(move |b| (a, b)))
    };
    let mult_closed = worst(&mut pairs().map(|(a, b)| a * b));
    let all_herm = v.basis().iter().all(|b| hermitian_defect(b) <= 1e-10);
    let jordan_closed = if all_herm {
        worst(&mut pairs().map(|(a, b)| jordan(a, b)))
    } else {
        (false, f64::INFINITY)
    };

    let real_cp_min_eig = if v.flags.is_star_algebra() {
        let mut rng = crate::sampling::rng_from_seed(seed);
        let mut min_eig = f64::INFINITY;
        for _ in 0..20 {
            let n = 1 + (crate::sampling::random_hermitian(1, &mut rng)[(0, 0)].re.abs() as usize) % 3;
            let a: Vec<CMat> = (0..n)
                .map(|_| v.project(&crate::sampling::random_complex_gaussian(d, &mut rng)))
                .collect();
            let b: Vec<CMat> = (0..n)
                .map(|_| crate::sampling::random_complex_gaussian(d, &mut rng))
                .collect();
            let mut acc = matcore::zeros(d);
            for i in 0..n {
                for j in 0..n {
                    acc += a[i].adjoint() * v.project(&(b[i].adjoint() * &b[j])) * &a[j];
                }
            }
            let scale = 1.0 + acc.norm();
            if let Ok(me) = matcore::min_eig(&matcore::hermitize(&acc)) {
                min_eig = min_eig.min(me / scale);
            }
        }
        Some(min_eig)
    } else {
        None
    };

    PredicateReport {
        contains_identity,
        star_closed,
        mult_closed,
        jordan_closed,
        complex_closed,
        real_cp_min_eig,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::cr;
    use crate::matcore::{diag, pauli, zeros};
    use crate::sampling;

    #[test]
    fn span_pinned_cases() {
        let v = RealSubspace::span(2, &[eye(2), eye(2).scale(2.0)]);
        assert_eq!(v.dim(), 1);

        // real span distinguishes X from iX
        let [sx, _, _] = pauli();
        let isx = sx.map(|z| z * c(0.0, 1.0));
        let v = RealSubspace::span(2, &[sx, isx]);
        assert_eq!(v.dim(), 2);

        let v = RealSubspace::span(2, &[]);
        assert_eq!(v.dim(), 0);
    }

    #[test]
    fn member_pinned_cases() {
        let v = RealSubspace::span(2, &[eye(2)]);
        assert!(v.member(&eye(2)).contained);

        let [sx, sy, sz] = pauli();
        let v = RealSubspace::span(2, &[eye(2), sx.clone(), sz]);
        let isy = sy.map(|z| z * c(0.0, 1.0));
        let m = v.member(&isy);
        assert!(!m.contained);
        assert!(m.residual > 0.99); // fully orthogonal to the span
    }

    #[test]
    fn basis_is_orthonormal_and_canonical() {
        let mut rng = sampling::rng_from_seed(2);
        let ops: Vec<CMat> = (0..6).map(|_| sampling::random_complex_gaussian(3, &mut rng)).collect();
        let v = RealSubspace::span(3, &ops);
        for (i, a) in v.basis().iter().enumerate() {
            for (j, b) in v.basis().iter().enumerate() {
                let ip = matcore::hs_inner(a, b).unwrap();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < ORTHO_TOL, "i={i} j={j} ip={ip}");
            }
            let sign = super::first_significant_sign(&vectorize(a));
            assert!(sign > 0.0);
        }
    }

    #[test]
    fn generate_star_pinned_cases() {
        let [sx, _, sz] = pauli();
        // {σz} closes to span{I, σz}
        let v = generate_star(2, &[sz.clone()], Scalars::Real);
        assert_eq!(v.dim(), 2);
        assert!(v.flags.is_star_algebra());

        // {σx, σz} closes to M2(R): {I, σx, iσy, σz}
        let v = generate_star(2, &[sx.clone(), sz.clone()], Scalars::Real);
        assert_eq!(v.dim(), 4);
        assert!(!v.flags.complex_closed);

        // complex scalars give all of M2(C), real dimension 8
        let v = generate_star(2, &[sx, sz], Scalars::Complex);
        assert_eq!(v.dim(), 8);
        assert!(v.flags.complex_closed);
    }

    #[test]
    fn generate_jordan_pinned_cases() {
        let [sx, _, sz] = pauli();
        // Jordan closure of {σx, σz} stops at dimension 3
        let v = generate_jordan(2, &[sx.clone(), sz.clone()]).unwrap();
        assert_eq!(v.dim(), 3);
        assert!(v.flags.jordan_closed);
        assert!(!v.flags.mult_closed);

        // spin factor Γ4 has dimension 5; the symmetrized quadruple
        // product escapes it and lands exactly on σ2⊗I2
        let sf = matcore::spin_factor(4);
        let v = generate_jordan(4, &sf.gammas).unwrap();
        assert_eq!(v.dim(), 5);
        let g = &sf.gammas;
        let quad = (&g[0] * &g[1] * &g[2] * &g[3] + &g[3] * &g[2] * &g[1] * &g[0]).scale(0.5);
        let [_, s2, _] = pauli();
        assert!((&quad - s2.kronecker(&eye(2))).norm() < 1e-14);
        let m = v.member(&quad);
        assert!(!m.contained);
        assert!(m.residual > 0.9);

        // commutative functional calculus: polynomials of a diagonal
        let a = diag(&[1.0, 2.0, 3.0]);
        let v = generate_jordan(3, &[a]).unwrap();
        assert_eq!(v.dim(), 3);

        // non-Hermitian generators are rejected
        let mut bad = zeros(2);
        bad[(0, 1)] = cr(1.0);
        assert!(generate_jordan(2, &[bad]).is_err());
    }

    #[test]
    fn projection_matches_paper_example_for_m2r() {
        let [sx, sy, sz] = pauli();
        let isy = sy.map(|z| z * c(0.0, 1.0));
        let m2r = RealSubspace::span(2, &[eye(2), sx, isy, sz]);
        assert_eq!(m2r.dim(), 4);
        assert!(m2r.flags.is_star_algebra());

        let mut real_lower = zeros(2);
        real_lower[(1, 0)] = cr(1.0);
        assert!((m2r.project(&real_lower) - &real_lower).norm() < 1e-12);

        let mut imag_lower = zeros(2);
        imag_lower[(1, 0)] = c(0.0, 1.0);
        assert!(m2r.project(&imag_lower).norm() < 1e-12);
    }

    #[test]
    fn projection_is_idempotent_contraction() {
        let mut rng = sampling::rng_from_seed(14);
        let gens: Vec<CMat> = (0..2).map(|_| sampling::random_hermitian(3, &mut rng)).collect();
        let v = generate_star(3, &gens, Scalars::Real);
        for _ in 0..20 {
            let b = sampling::random_complex_gaussian(3, &mut rng);
            let p = v.project(&b);
            assert!((v.project(&p) - &p).norm() <= 1e-9 * (1.0 + p.norm()));
            assert!(p.norm() <= b.norm() + 1e-12);
            // star-closed: projection commutes with the adjoint
            assert!((v.project(&b.adjoint()) - p.adjoint()).norm() < 1e-10);
        }
    }

    #[test]
    fn projection_positivity_and_faithfulness() {
        let mut rng = sampling::rng_from_seed(15);
        for _ in 0..5 {
            let gens: Vec<CMat> = (0..2).map(|_| sampling::random_hermitian(3, &mut rng)).collect();
            let v = generate_star(3, &gens, Scalars::Real);
            for _ in 0..10 {
                let b = sampling::random_psd(3, &mut rng);
                let p = v.project(&b);
                assert!(matcore::min_eig(&matcore::hermitize(&p)).unwrap() >= -1e-10 * (1.0 + b.norm()));
                // quantitative faithfulness: tr B ≤ √d ‖Π(B)‖
                let tr_b: f64 = (0..3).map(|i| b[(i, i)].re).sum();
                assert!(tr_b <= 3.0f64.sqrt() * p.norm() + 1e-9);
            }
        }
    }

    #[test]
    fn jordan_projection_positive_and_faithful() {
        let mut rng = sampling::rng_from_seed(19);
        for _ in 0..5 {
            let gens: Vec<CMat> =
                (0..2).map(|_| sampling::random_hermitian(3, &mut rng)).collect();
            let v = generate_jordan(3, &gens).unwrap();
            for _ in 0..20 {
                let b = sampling::random_psd(3, &mut rng);
                let p = matcore::hermitize(&v.project(&b));
                assert!(matcore::min_eig(&p).unwrap() >= -1e-10 * (1.0 + b.norm()));
                let tr: f64 = (0..3).map(|i| b[(i, i)].re).sum();
                assert!(tr <= 3.0f64.sqrt() * p.norm() + 1e-9);
            }
        }
    }

    #[test]
    fn jordan_triple_product_stays_inside() {
        let mut rng = sampling::rng_from_seed(16);
        let gens: Vec<CMat> = (0..2).map(|_| sampling::random_hermitian(3, &mut rng)).collect();
        let v = generate_jordan(3, &gens).unwrap();
        let k = v.dim();
        for i in 0..k.min(4) {
            for j in 0..k.min(4) {
                for l in 0..k.min(4) {
                    let (a, b, cc) = (&v.basis()[i], &v.basis()[j], &v.basis()[l]);
                    let triple = (a * b * cc + cc * b * a).scale(0.5);
                    assert!(v.member(&triple).contained, "triple product escaped");
                }
            }
        }
    }

    #[test]
    fn modular_invariance_pinned_cases() {
        let [sx, _, sz] = pauli();
        // maximally mixed reference: everything is invariant
        let v = generate_star(2, &[sx.clone()], Scalars::Real);
        assert!(is_modular_invariant(&v, &eye(2).scale(0.5)).unwrap());

        // diagonal algebra, diagonal rho
        let vdiag = generate_star(2, &[sz], Scalars::Real);
        assert!(is_modular_invariant(&vdiag, &diag(&[0.75, 0.25])).unwrap());

        // span{I, σx} is not invariant for rho = diag(3/4, 1/4):
        // the modular image of σx is [[0, 3], [1/3, 0]]
        let vx = generate_star(2, &[sx.clone()], Scalars::Real);
        let rho = diag(&[0.75, 0.25]);
        assert!(!is_modular_invariant(&vx, &rho).unwrap());
        let delta = crate::model::modular_superop(&rho).unwrap();
        let img = delta.apply(&sx);
        let expect = CMat::from_row_slice(2, 2, &[cr(0.0), cr(3.0), cr(1.0 / 3.0), cr(0.0)]);
        assert!((img - expect).norm() < 1e-12);
    }

    #[test]
    fn commutant_pinned_cases() {
        // full matrix algebra: commutant is span{I, iI}
        let full = generate_star(2, &pauli(), Scalars::Real);
        assert_eq!(full.dim(), 8);
        let com = commutant(&full);
        assert_eq!(com.dim(), 2);
        assert!(com.member(&eye(2)).contained);
        assert!(com.member(&eye(2).map(|z| z * c(0.0, 1.0))).contained);

        // span{I}: commutant is everything
        let trivial = RealSubspace::span(2, &[eye(2)]);
        assert_eq!(commutant(&trivial).dim(), 8);

        // M2(C)⊗I2 inside dim 4: commutant is I2⊗M2(C)
        let [sx, sy, sz] = pauli();
        let gens: Vec<CMat> = [sx, sy, sz].iter().map(|s| s.kronecker(&eye(2))).collect();
        let big = generate_star(4, &gens, Scalars::Real);
        let com = commutant(&big);
        assert_eq!(com.dim(), 8);
        for s in pauli() {
            assert!(com.member(&eye(2).kronecker(&s)).contained);
        }
    }

    #[test]
    fn verify_predicates_reports() {
        let [sx, sy, sz] = pauli();
        let isy = sy.map(|z| z * c(0.0, 1.0));
        let m2r = RealSubspace::span(2, &[eye(2), sx.clone(), isy, sz.clone()]);
        let rep = verify_predicates(&m2r, 1);
        assert!(rep.star_closed.0);
        assert!(rep.mult_closed.0);
        assert!(!rep.complex_closed.0);
        assert!(rep.real_cp_min_eig.unwrap() > -1e-9);

        let gamma4 = generate_jordan(4, &matcore::spin_factor(4).gammas).unwrap();
        let rep = verify_predicates(&gamma4, 1);
        assert!(rep.jordan_closed.0);
        assert!(!rep.mult_closed.0);

        // random-unitary conjugate of M2(C) ⊕ R stays star and complex closed
        let mut rng = sampling::rng_from_seed(77);
        let u = sampling::haar_unitary(3, &mut rng);
        let mut gens = Vec::new();
        for s in pauli() {
            let mut g = zeros(3);
            for i in 0..2 {
                for j in 0..2 {
                    g[(i, j)] = s[(i, j)];
                }
            }
            gens.push(&u * g * u.adjoint());
        }
        let v = generate_star(3, &gens, Scalars::Complex);
        let rep = verify_predicates(&v, 1);
        assert!(rep.star_closed.0 && rep.complex_closed.0 && rep.mult_closed.0);
    }

    #[test]
    fn hermitian_part_of_full_algebra() {
        let full = generate_star(2, &pauli(), Scalars::Real);
        let h = full.hermitian_part();
        assert_eq!(h.dim(), 4);
        for b in h.basis() {
            assert!(hermitian_defect(b) < 1e-10);
        }
    }
}
