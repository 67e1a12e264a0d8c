//! Statistical models: a PSD reference operator plus tagged self-adjoint
//! elements, restriction to the joint support space, square-root
//! likelihood ratios and symmetric logarithmic derivatives, and the
//! superoperators associated with the reference state.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::matcore::{
    self, cr, ensure_hermitian, ensure_psd, geninv, herm_eig, hermitize, inv_sqrt_psd,
    sqrt_psd, std_basis, support_proj, unvectorize, vec_dim, vectorize, CMat, RANK_TOL,
};
use crate::{Error, Result};

/// Relative residual accepted when checking the defining factorizations
/// `RρR = X` and `ρ∘L = X`.
pub const RECON_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    /// PSD element absolutely continuous with respect to the reference.
    State,
    /// General Hermitian element (a derivative of a state family).
    Derivative,
}

#[derive(Clone, Debug)]
pub struct ModelElement {
    pub kind: ElementKind,
    pub label: String,
    pub op: CMat,
}

/// A family of self-adjoint operators with a distinguished PSD reference.
/// The reference is always element 0.
#[derive(Clone, Debug)]
pub struct Model {
    pub dim: usize,
    pub rho: CMat,
    pub elements: Vec<ModelElement>,
    pub restricted: bool,
}

impl Model {
    /// Validates and assembles a model. The reference is inserted as the
    /// first element if no element coincides with it.
    pub fn new(rho: CMat, elements: Vec<ModelElement>) -> Result<Model> {
        let dim = rho.nrows();
        ensure_hermitian(&rho)?;
        ensure_psd(&rho)?;
        for e in &elements {
            if e.op.nrows() != dim {
                return Err(Error::DimMismatch(e.op.nrows(), dim));
            }
            ensure_hermitian(&e.op)?;
            if e.kind == ElementKind::State {
                ensure_psd(&e.op)?;
            }
        }
        let mut all = Vec::with_capacity(elements.len() + 1);
        let has_ref = elements
            .iter()
            .any(|e| e.kind == ElementKind::State && (&e.op - &rho).norm() <= 1e-12 * (1.0 + rho.norm()));
        if !has_ref {
            all.push(ModelElement {
                kind: ElementKind::State,
                label: "rho".to_string(),
                op: rho.clone(),
            });
        }
        all.extend(elements);
        Ok(Model {
            dim,
            rho,
            elements: all,
            restricted: false,
        })
    }

    /// Elements other than the reference.
    pub fn non_reference(&self) -> impl Iterator<Item = &ModelElement> {
        let rho = &self.rho;
        self.elements
            .iter()
            .filter(move |e| (&e.op - rho).norm() > 1e-12 * (1.0 + rho.norm()))
    }
}

/// A restricted model together with the isometry onto the joint support.
pub struct RestrictedModel {
    pub model: Model,
    /// Columns span the joint support inside the original space.
    pub isometry: CMat,
}

/// Compresses the model onto the joint column space of its elements.
/// Pairings `Re tr X B` with operators supported there are preserved.
pub fn restrict_to_hs(m: &Model) -> Result<RestrictedModel> {
    restrict_to_hs_with(m, RANK_TOL)
}

/// `restrict_to_hs` with an explicit rank cut for the joint support.
pub fn restrict_to_hs_with(m: &Model, rank_tol: f64) -> Result<RestrictedModel> {
    if m.restricted {
        return Err(Error::AlreadyRestricted);
    }
    let mut acc = matcore::zeros(m.dim);
    for e in &m.elements {
        acc += &e.op * &e.op;
    }
    let scale = acc.norm();
    if scale == 0.0 {
        return Err(Error::EmptySupport);
    }
    let eig = herm_eig(&acc)?;
    let cut = rank_tol * eig.values[0].abs();
    let r = eig.values.iter().filter(|&&v| v > cut).count();
    if r == 0 {
        return Err(Error::EmptySupport);
    }
    if r == m.dim {
        // full joint support: nothing to compress
        let mut model = m.clone();
        model.restricted = true;
        return Ok(RestrictedModel {
            model,
            isometry: matcore::eye(m.dim),
        });
    }
    let mut p = DMatrix::zeros(m.dim, r);
    for k in 0..r {
        p.set_column(k, &eig.vectors.column(k));
    }
    let compress = |x: &CMat| p.adjoint() * x * &p;
    let elements = m
        .elements
        .iter()
        .map(|e| ModelElement {
            kind: e.kind,
            label: e.label.clone(),
            op: compress(&e.op),
        })
        .collect();
    Ok(RestrictedModel {
        model: Model {
            dim: r,
            rho: compress(&m.rho),
            elements,
            restricted: true,
        },
        isometry: p,
    })
}

/// Minimal-norm PSD solution of `X = R ρ R`, namely
/// `R = X^{1/2} (X^{1/2} ρ X^{1/2})^{-1/2} X^{1/2}`.
pub fn sqrt_likelihood_ratio(x: &CMat, rho: &CMat) -> Result<CMat> {
    ensure_psd(x)?;
    ensure_psd(rho)?;
    let xs = sqrt_psd(x)?;
    let mid = &xs * rho * &xs;
    let r = &xs * inv_sqrt_psd(&mid)? * &xs;
    let residual = (&r * rho * &r - x).norm() / (1.0 + x.norm());
    if residual > RECON_TOL {
        return Err(Error::NotAbsolutelyContinuous { residual });
    }
    Ok(r)
}

/// Minimal-norm Hermitian solution of `X = (Lρ + ρL)/2`, the generalized
/// inverse of `J_ρ = ρ∘·` applied to `X` (zero weight off the support).
pub fn sld(x: &CMat, rho: &CMat) -> Result<CMat> {
    ensure_hermitian(x)?;
    ensure_psd(rho)?;
    let eig = herm_eig(rho)?;
    let xe = eig.vectors.adjoint() * x * &eig.vectors;
    let d = rho.nrows();
    let cut = RANK_TOL * eig.values[0].abs().max(0.0);
    let mut le = matcore::zeros(d);
    for i in 0..d {
        for j in 0..d {
            let denom = (eig.values[i] + eig.values[j]) / 2.0;
            if denom > cut {
                le[(i, j)] = xe[(i, j)] / cr(denom);
            }
        }
    }
    let l = &eig.vectors * le * eig.vectors.adjoint();
    let residual = (matcore::jordan(rho, &l) - x).norm() / (1.0 + x.norm());
    if residual > RECON_TOL {
        return Err(Error::NotInSldRange { residual });
    }
    Ok(hermitize(&l))
}

/// The likelihood-ratio set of a restricted model: `R_X` for state-kind
/// elements (the reference contributes `supp ρ`), `L_X` for
/// derivative-kind elements.
pub fn likelihood_ratio_set(m: &Model) -> Result<Vec<CMat>> {
    if !m.restricted {
        return Err(Error::NotRestricted);
    }
    let is_ref =
        |e: &ModelElement| (&e.op - &m.rho).norm() <= 1e-12 * (1.0 + m.rho.norm());
    let mut out = Vec::with_capacity(m.elements.len());
    for e in &m.elements {
        if is_ref(e) {
            out.push(support_proj(&m.rho, RANK_TOL)?);
        } else {
            out.push(match e.kind {
                ElementKind::State => sqrt_likelihood_ratio(&e.op, &m.rho)?,
                ElementKind::Derivative => sld(&e.op, &m.rho)?,
            });
        }
    }
    Ok(out)
}

/// Real-linear map on operators, materialized as a `(2d²)×(2d²)` real
/// matrix over the canonical orthonormal operator basis.
#[derive(Clone, Debug)]
pub struct Superoperator {
    pub dim: usize,
    pub mat: DMatrix<f64>,
}

impl Superoperator {
    pub fn from_map(dim: usize, f: impl Fn(&CMat) -> CMat) -> Superoperator {
        let n = vec_dim(dim);
        let mut mat = DMatrix::zeros(n, n);
        for (k, b) in std_basis(dim).iter().enumerate() {
            mat.set_column(k, &vectorize(&f(b)));
        }
        Superoperator { dim, mat }
    }

    pub fn identity(dim: usize) -> Superoperator {
        Superoperator {
            dim,
            mat: DMatrix::identity(vec_dim(dim), vec_dim(dim)),
        }
    }

    pub fn apply(&self, b: &CMat) -> CMat {
        unvectorize(self.dim, &(&self.mat * vectorize(b)))
    }

    /// Composition `self ∘ other`.
    pub fn compose(&self, other: &Superoperator) -> Superoperator {
        Superoperator {
            dim: self.dim,
            mat: &self.mat * &other.mat,
        }
    }

    /// Adjoint with respect to the real HS inner product.
    pub fn hs_adjoint(&self) -> Superoperator {
        Superoperator {
            dim: self.dim,
            mat: self.mat.transpose(),
        }
    }

    pub fn scale(&self, s: f64) -> Superoperator {
        Superoperator {
            dim: self.dim,
            mat: self.mat.scale(s),
        }
    }

    pub fn add(&self, other: &Superoperator) -> Superoperator {
        Superoperator {
            dim: self.dim,
            mat: &self.mat + &other.mat,
        }
    }

    /// Defect of unitality `‖T(I) − I‖`.
    pub fn unital_defect(&self) -> f64 {
        (self.apply(&matcore::eye(self.dim)) - matcore::eye(self.dim)).norm()
    }
}

/// The modular superoperator `B ↦ ρ B ρ^{-1}` (generalized inverse).
pub fn modular_superop(rho: &CMat) -> Result<Superoperator> {
    ensure_psd(rho)?;
    let inv = geninv(rho)?;
    let rho = rho.clone();
    Ok(Superoperator::from_map(inv.nrows(), move |b| {
        &rho * b * &inv
    }))
}

/// `D̃_ρ = (L_ρ − R_ρ)/(L_ρ + R_ρ)`: in the eigenbasis of ρ the matrix
/// unit `|i⟩⟨j|` is scaled by `(p_i − p_j)/(p_i + p_j)`, with the
/// Moore–Penrose convention when `p_i + p_j` vanishes.
pub fn d_tilde(rho: &CMat) -> Result<Superoperator> {
    ensure_psd(rho)?;
    let eig = herm_eig(rho)?;
    let d = rho.nrows();
    let cut = RANK_TOL * eig.values[0].abs().max(0.0);
    let u = eig.vectors.clone();
    let udag = eig.vectors.adjoint();
    let vals = eig.values;
    Ok(Superoperator::from_map(d, move |b| {
        let be = &udag * b * &u;
        let mut out = matcore::zeros(d);
        for i in 0..d {
            for j in 0..d {
                let sum = vals[i] + vals[j];
                if sum > cut {
                    out[(i, j)] = be[(i, j)] * cr((vals[i] - vals[j]) / sum);
                }
            }
        }
        &u * out * &udag
    }))
}

/// `D_ρ = i·D̃_ρ`.
pub fn d_rho(rho: &CMat) -> Result<Superoperator> {
    let dt = d_tilde(rho)?;
    let mult_i = Superoperator::from_map(dt.dim, |b| b.map(|z| z * matcore::c(0.0, 1.0)));
    Ok(mult_i.compose(&dt))
}

/// `J_ρ = ρ ∘ ·` as a superoperator.
pub fn j_rho(rho: &CMat) -> Result<Superoperator> {
    ensure_psd(rho)?;
    let rho = rho.clone();
    Ok(Superoperator::from_map(rho.nrows(), move |b| {
        matcore::jordan(&rho, b)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::hs_inner;
    use crate::matcore::{c, diag, eye, pauli, zeros};
    use crate::sampling;

    fn approx(a: &CMat, b: &CMat, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    fn state_elem(label: &str, op: CMat) -> ModelElement {
        ModelElement {
            kind: ElementKind::State,
            label: label.into(),
            op,
        }
    }

    #[test]
    fn restriction_compresses_padded_models() {
        // block-embedded full-rank state on C^4 restricts to C^2
        let mut rho4 = zeros(4);
        rho4[(0, 0)] = cr(0.6);
        rho4[(1, 1)] = cr(0.4);
        let mut x4 = zeros(4);
        x4[(0, 0)] = cr(0.7);
        x4[(1, 1)] = cr(0.3);
        let m = Model::new(rho4, vec![state_elem("x", x4)]).unwrap();
        let r = restrict_to_hs(&m).unwrap();
        assert_eq!(r.model.dim, 2);
        assert!(r.model.restricted);

        // any model containing an invertible element keeps its dimension
        let m2 = Model::new(eye(3).scale(1.0 / 3.0), vec![]).unwrap();
        assert_eq!(restrict_to_hs(&m2).unwrap().model.dim, 3);

        // single projector element restricts to one dimension
        let mut proj = zeros(3);
        proj[(2, 2)] = cr(1.0);
        let m3 = Model::new(proj, vec![]).unwrap();
        assert_eq!(restrict_to_hs(&m3).unwrap().model.dim, 1);

        assert!(matches!(
            restrict_to_hs(&restrict_to_hs(&m2).unwrap().model),
            Err(Error::AlreadyRestricted)
        ));
    }

    #[test]
    fn restriction_preserves_pairings() {
        let mut rng = sampling::rng_from_seed(21);
        let rho = sampling::direct_sum(&sampling::random_state(2, 2, &mut rng), &zeros(2));
        let x = sampling::direct_sum(&sampling::random_hermitian(2, &mut rng), &zeros(2));
        let m = Model::new(rho, vec![ModelElement {
            kind: ElementKind::Derivative,
            label: "d".into(),
            op: x,
        }])
        .unwrap();
        let r = restrict_to_hs(&m).unwrap();
        let p = &r.isometry;
        for _ in 0..10 {
            let b_small = sampling::random_complex_gaussian(r.model.dim, &mut rng);
            let b_embedded = p * &b_small * p.adjoint();
            for (orig, comp) in m.elements.iter().zip(&r.model.elements) {
                let lhs = hs_inner(&orig.op, &b_embedded).unwrap();
                let rhs = hs_inner(&comp.op, &b_small).unwrap();
                assert!((lhs - rhs).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn ratio_pinned_cases() {
        // X = rho gives the support projection
        let rho = diag(&[0.5, 0.5]);
        let r = sqrt_likelihood_ratio(&rho, &rho).unwrap();
        assert!(approx(&r, &eye(2), 1e-10));

        let x = diag(&[0.75, 0.25]);
        let r = sqrt_likelihood_ratio(&x, &rho).unwrap();
        let expect = diag(&[(1.5f64).sqrt(), (0.5f64).sqrt()]);
        assert!(approx(&r, &expect, 1e-10));
        assert!(approx(&(&r * &rho * &r), &x, 1e-12));

        // not absolutely continuous
        let err = sqrt_likelihood_ratio(&diag(&[0.0, 1.0]), &diag(&[1.0, 0.0]));
        assert!(matches!(err, Err(Error::NotAbsolutelyContinuous { .. })));
    }

    #[test]
    fn ratio_is_minimal_norm_and_psd_on_random_inputs() {
        let mut rng = sampling::rng_from_seed(33);
        for _ in 0..20 {
            let rho = sampling::random_state(3, 3, &mut rng);
            let r0 = sampling::random_psd(3, &mut rng);
            let x = &r0 * &rho * &r0;
            let r = sqrt_likelihood_ratio(&x, &rho).unwrap();
            assert!(matcore::min_eig(&r).unwrap() > -1e-9);
            assert!((&r * &rho * &r - &x).norm() <= RECON_TOL * (1.0 + x.norm()));
        }
    }

    #[test]
    fn sld_pinned_cases() {
        let [_, _, sz] = pauli();
        // X = rho gives the support projection
        let rho = diag(&[0.5, 0.5]);
        assert!(approx(&sld(&rho, &rho).unwrap(), &eye(2), 1e-10));

        // J_rho = id/2 for the maximally mixed state, checked against a
        // vectorized linear solve as an independent oracle
        let x = sz.scale(0.5);
        let l = sld(&x, &rho).unwrap();
        assert!(approx(&l, &sz, 1e-10));
        let jmat = j_rho(&rho).unwrap();
        let sol = jmat
            .mat
            .clone()
            .svd(true, true)
            .solve(&vectorize(&x), 1e-12)
            .unwrap();
        assert!(approx(&unvectorize(2, &sol), &l, 1e-8));

        // componentwise solve of the Sylvester system
        let (p, xval) = (0.3, 0.2);
        let rho = diag(&[p, 1.0 - p]);
        let x = diag(&[xval, -xval]);
        let l = sld(&x, &rho).unwrap();
        assert!(approx(&l, &diag(&[xval / p, -xval / (1.0 - p)]), 1e-10));

        // off-support weight is rejected
        let bad = sld(&diag(&[0.0, 1.0]), &diag(&[1.0, 0.0]));
        assert!(matches!(bad, Err(Error::NotInSldRange { .. })));
    }

    #[test]
    fn sld_minimal_norm_is_orthogonal_to_kernel() {
        let mut rng = sampling::rng_from_seed(17);
        let rho = sampling::direct_sum(&sampling::random_state(2, 2, &mut rng), &zeros(1));
        let l0 = sampling::random_hermitian(3, &mut rng);
        let x = matcore::jordan(&rho, &l0);
        let l = sld(&x, &rho).unwrap();
        // kernel of J_rho is spanned by corner units on the complement
        let mut k = zeros(3);
        k[(2, 2)] = cr(1.0);
        assert!(hs_inner(&l, &k).unwrap().abs() < 1e-10);
        assert!((matcore::jordan(&rho, &l) - &x).norm() <= RECON_TOL * (1.0 + x.norm()));
    }

    #[test]
    fn likelihood_ratio_set_by_kind() {
        // model {rho} alone: just the support projection
        let rho = diag(&[0.5, 0.5]);
        let m = restrict_to_hs(&Model::new(rho.clone(), vec![]).unwrap())
            .unwrap()
            .model;
        let set = likelihood_ratio_set(&m).unwrap();
        assert_eq!(set.len(), 1);
        assert!(approx(&set[0], &eye(2), 1e-12));

        // qubit local model {rho, sz/2} -> {I, sz}
        let [_, _, sz] = pauli();
        let m = Model::new(rho.clone(), vec![ModelElement {
            kind: ElementKind::Derivative,
            label: "dz".into(),
            op: sz.scale(0.5),
        }])
        .unwrap();
        let m = restrict_to_hs(&m).unwrap().model;
        let set = likelihood_ratio_set(&m).unwrap();
        assert!(approx(&set[0], &eye(2), 1e-12));
        assert!(approx(&set[1], &sz, 1e-10));

        // commuting two-state model -> {I, diag(sqrt(3/2), sqrt(1/2))}
        let m = Model::new(rho, vec![state_elem("x", diag(&[0.75, 0.25]))]).unwrap();
        let m = restrict_to_hs(&m).unwrap().model;
        let set = likelihood_ratio_set(&m).unwrap();
        assert!(approx(
            &set[1],
            &diag(&[(1.5f64).sqrt(), (0.5f64).sqrt()]),
            1e-10
        ));

        let unrestricted = Model::new(diag(&[1.0, 0.0]), vec![]).unwrap();
        assert!(matches!(
            likelihood_ratio_set(&unrestricted),
            Err(Error::NotRestricted)
        ));
    }

    #[test]
    fn modular_superop_pinned_cases() {
        let idm = modular_superop(&eye(3).scale(1.0 / 3.0)).unwrap();
        assert!((idm.mat - DMatrix::identity(18, 18)).norm() < 1e-12);

        let sop = modular_superop(&diag(&[0.6, 0.4])).unwrap();
        let mut e01 = zeros(2);
        e01[(0, 1)] = cr(1.0);
        assert!(approx(&sop.apply(&e01), &e01.scale(0.6 / 0.4), 1e-12));

        // generalized inverse kills everything off the support
        let sop = modular_superop(&diag(&[1.0, 0.0])).unwrap();
        let mut off = zeros(2);
        off[(1, 0)] = c(2.0, 1.0);
        off[(1, 1)] = cr(-3.0);
        assert!(sop.apply(&off).norm() < 1e-14);
    }

    #[test]
    fn d_tilde_pinned_cases() {
        let z = d_tilde(&eye(4).scale(0.25)).unwrap();
        assert!(z.mat.norm() < 1e-12);

        let dt = d_tilde(&diag(&[0.75, 0.25])).unwrap();
        let mut e01 = zeros(2);
        e01[(0, 1)] = cr(1.0);
        assert!(approx(&dt.apply(&e01), &e01.scale(0.5), 1e-12));

        // block action for degenerate rho: sAκ fixed, κAs negated, κAκ killed
        let rho = diag(&[0.5, 0.5, 0.0]);
        let dt = d_tilde(&rho).unwrap();
        let mut sak = zeros(3);
        sak[(0, 2)] = c(1.0, -2.0);
        assert!(approx(&dt.apply(&sak), &sak, 1e-12));
        let kas = sak.adjoint();
        assert!(approx(&dt.apply(&kas), &kas.scale(-1.0), 1e-12));
        let mut kak = zeros(3);
        kak[(2, 2)] = cr(1.0);
        assert!(dt.apply(&kak).norm() < 1e-14);
    }

    #[test]
    fn d_tilde_spectrum_is_a_contraction() {
        let mut rng = sampling::rng_from_seed(8);
        for rank in [3usize, 2] {
            let rho = sampling::random_state(3, rank, &mut rng);
            let dt = d_tilde(&rho).unwrap();
            let svd = dt.mat.clone().svd(false, false);
            let top = svd.singular_values.max();
            assert!(top <= 1.0 + 1e-10, "spectral bound violated: {top}");
        }
    }

    #[test]
    fn d_tilde_generates_modular_on_faithful_states() {
        // Δ = (I + D̃)/(I − D̃) as superoperator functions on the support
        let mut rng = sampling::rng_from_seed(42);
        let rho = sampling::random_state(3, 3, &mut rng);
        let dt = d_tilde(&rho).unwrap();
        let n = dt.mat.nrows();
        let id = DMatrix::<f64>::identity(n, n);
        let delta = modular_superop(&rho).unwrap();
        let lhs = (&id - &dt.mat)
            .lu()
            .solve(&(&id + &dt.mat))
            .expect("I - D̃ invertible for faithful rho");
        assert!((lhs - &delta.mat).norm() < 1e-8 * (1.0 + delta.mat.norm()));
    }

    #[test]
    fn d_rho_is_i_times_d_tilde() {
        let mut rng = sampling::rng_from_seed(55);
        let rho = sampling::random_state(3, 3, &mut rng);
        let dt = d_tilde(&rho).unwrap();
        let dr = d_rho(&rho).unwrap();
        let b = sampling::random_complex_gaussian(3, &mut rng);
        let want = dt.apply(&b).map(|z| z * c(0.0, 1.0));
        assert!((dr.apply(&b) - want).norm() < 1e-12);
    }

    #[test]
    fn superoperator_adjoint_matches_inner_product() {
        let mut rng = sampling::rng_from_seed(3);
        let rho = sampling::random_state(3, 3, &mut rng);
        let sop = modular_superop(&rho).unwrap();
        let a = sampling::random_complex_gaussian(3, &mut rng);
        let b = sampling::random_complex_gaussian(3, &mut rng);
        let lhs = hs_inner(&a, &sop.apply(&b)).unwrap();
        let rhs = hs_inner(&sop.hs_adjoint().apply(&a), &b).unwrap();
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn model_requires_psd_reference() {
        let bad = Model::new(diag(&[0.5, -0.5]), vec![]);
        assert!(matches!(bad, Err(Error::NotPsd { .. })));
    }
}
