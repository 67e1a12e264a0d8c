//! Sufficiency machinery: verification of sufficient maps, conditional
//! expectations onto modular-invariant algebras (including degenerate
//! references via a faithful extension), minimal sufficient real and
//! complex *-subalgebras and Jordan algebras, and the fixed-point
//! pipeline that produces the supporting operator and the three
//! conditional expectations.

use nalgebra::{DMatrix, DVector};

use crate::algebra::{
    self, generate_jordan, generate_star, generate_star_invariant, RealSubspace, Scalars,
};
use crate::matcore::{
    self, eye, herm_basis, hermitize, hs_inner, inv_sqrt_psd, min_eig, sqrt_psd, std_basis,
    support_proj, vectorize, CMat, RANK_TOL,
};
use crate::model::{modular_superop, Model, Superoperator};
use crate::{Error, Result};

/// Default residual tolerance for sufficiency verification.
pub const SUFF_TOL: f64 = 1e-9;
/// Tolerance for certificate invariants.
pub const CERT_TOL: f64 = 1e-8;

/// Outcome of a sufficiency check.
#[derive(Clone, Copy, Debug)]
pub struct SufficiencyCheck {
    pub passed: bool,
    pub max_residual: f64,
}

/// Checks `Re tr X B = Re tr X α(B)` for every model element `X` and
/// every operator basis element `B`; linearity makes the basis check
/// exhaustive. Returns the largest absolute difference.
pub fn verify_sufficient(m: &Model, alpha: &Superoperator, tol: f64) -> Result<SufficiencyCheck> {
    if !m.restricted {
        return Err(Error::NotRestricted);
    }
    if alpha.dim != m.dim {
        return Err(Error::DimMismatch(alpha.dim, m.dim));
    }
    let mut max_residual = 0.0f64;
    for e in &m.elements {
        let v = vectorize(&e.op);
        let diff = alpha.mat.transpose() * &v - &v;
        max_residual = max_residual.max(diff.amax());
    }
    Ok(SufficiencyCheck {
        passed: max_residual <= tol,
        max_residual,
    })
}

/// Faithful extension of a degenerate reference adapted to an algebra:
/// `σ = ρ + δ + κ̃` is strictly positive, the three parts have mutually
/// orthogonal supports, and `σ A σ^{-1} ⊆ A` still holds.
#[derive(Clone, Debug)]
pub struct FaithfulExtension {
    pub sigma: CMat,
    pub delta: CMat,
    pub kappa_tilde: CMat,
    /// Orthonormal basis of the real space `κ A s`.
    pub basis_fk: Vec<CMat>,
}

pub fn faithful_extension(a: &RealSubspace, rho: &CMat) -> Result<FaithfulExtension> {
    let d = a.dim_ambient;
    let (worst, invariant) = algebra::modular_residual(a, rho)?;
    if !invariant {
        return Err(Error::NotModularInvariant {
            index: 0,
            residual: worst,
        });
    }
    let s = support_proj(rho, RANK_TOL)?;
    let kappa = eye(d) - &s;
    let kas: Vec<CMat> = a.basis().iter().map(|b| &kappa * b * &s).collect();
    let fk = RealSubspace::span(d, &kas);
    let mut delta = matcore::zeros(d);
    for f in fk.basis() {
        delta += f * rho * f.adjoint();
    }
    delta = hermitize(&delta);
    let s_tilde = if delta.norm() > 1e-14 {
        support_proj(&delta, RANK_TOL)?
    } else {
        matcore::zeros(d)
    };
    let kappa_tilde = eye(d) - &s - &s_tilde;
    let sigma = rho + &delta + &kappa_tilde;
    // mutual support orthogonality
    for (x, y, what) in [
        (rho, &delta, "rho ⊥ delta"),
        (rho, &kappa_tilde, "rho ⊥ kappa~"),
        (&delta, &kappa_tilde, "delta ⊥ kappa~"),
    ] {
        if (x * y).norm() > 1e-9 * (1.0 + x.norm()) * (1.0 + y.norm()) {
            return Err(Error::InternalConsistency(format!(
                "faithful extension parts not orthogonal: {what}"
            )));
        }
    }
    if min_eig(&sigma)? <= 1e-10 * (1.0 + sigma.norm()) {
        return Err(Error::InternalConsistency(
            "faithful extension is not strictly positive".into(),
        ));
    }
    let (_, inv) = algebra::modular_residual(a, &sigma)?;
    if !inv {
        return Err(Error::InternalConsistency(
            "faithful extension lost modular invariance".into(),
        ));
    }
    Ok(FaithfulExtension {
        sigma,
        delta,
        kappa_tilde,
        basis_fk: fk.basis().to_vec(),
    })
}

fn ce_faithful(a: &RealSubspace, rho: &CMat) -> Result<Superoperator> {
    let rho0 = hermitize(&a.project(rho));
    let r_half = sqrt_psd(rho)?;
    let r0_inv_half = inv_sqrt_psd(&rho0)?;
    let a = a.clone();
    Ok(Superoperator::from_map(rho.nrows(), move |b| {
        &r0_inv_half * a.project(&(&r_half * b * &r_half)) * &r0_inv_half
    }))
}

/// Real conditional expectation onto a modular-invariant real
/// *-subalgebra that preserves all pairings with `ρ`. For degenerate `ρ`
/// the construction routes through the faithful extension. When the
/// algebra is complex-closed the map is complex-linear.
pub fn conditional_expectation(a: &RealSubspace, rho: &CMat) -> Result<Superoperator> {
    let d = a.dim_ambient;
    let (worst, invariant) = algebra::modular_residual(a, rho)?;
    if !invariant {
        // report the offending basis element
        let delta = modular_superop(rho)?;
        let idx = a
            .basis()
            .iter()
            .enumerate()
            .max_by(|(_, x), (_, y)| {
                let rx = a.member(&delta.apply(x)).abs_residual;
                let ry = a.member(&delta.apply(y)).abs_residual;
                rx.partial_cmp(&ry).unwrap()
            })
            .map(|(i, _)| i)
            .unwrap_or(0);
        return Err(Error::NotModularInvariant {
            index: idx,
            residual: worst,
        });
    }
    let s = support_proj(rho, RANK_TOL)?;
    let faithful = (&s - eye(d)).norm() <= 1e-10 * (d as f64);
    let ce = if faithful {
        ce_faithful(a, rho)?
    } else {
        let ext = faithful_extension(a, rho)?;
        ce_faithful(a, &ext.sigma)?
    };
    // postconditions: unital, rho-pairing preservation, bimodule law
    let unital = ce.unital_defect();
    if unital > CERT_TOL * (d as f64) {
        return Err(Error::NotUnital(unital));
    }
    for b in std_basis(d) {
        let lhs = hs_inner(rho, &b)?;
        let rhs = hs_inner(rho, &ce.apply(&b))?;
        if (lhs - rhs).abs() > CERT_TOL * (1.0 + rho.norm()) {
            return Err(Error::CertificateInvariant {
                check: "conditional expectation preserves rho-pairings".into(),
                value: (lhs - rhs).abs(),
                tol: CERT_TOL,
            });
        }
    }
    let probes: Vec<CMat> = if 2 * d * d * a.dim() <= 4096 {
        std_basis(d)
    } else {
        std_basis(d).into_iter().step_by(3).collect()
    };
    for ab in a.basis() {
        for b in &probes {
            let gap = (ab * ce.apply(b) - ce.apply(&(ab * b))).norm();
            if gap > CERT_TOL * (1.0 + b.norm()) * (1.0 + ab.norm()) * 10.0 {
                return Err(Error::CertificateInvariant {
                    check: "bimodule law".into(),
                    value: gap,
                    tol: CERT_TOL,
                });
            }
        }
    }
    Ok(ce)
}

/// Smallest star-closed (optionally complex-closed) subspace containing
/// the likelihood-ratio set and closed under `B ↦ ρ B ρ^{-1}`.
pub fn minimal_sufficient_star(m: &Model, scalars: Scalars) -> Result<RealSubspace> {
    if !m.restricted {
        return Err(Error::NotRestricted);
    }
    let ratios = crate::model::likelihood_ratio_set(m)?;
    let delta = modular_superop(&m.rho)?;
    let v = generate_star_invariant(m.dim, &ratios, scalars, &[&delta]);
    debug_assert!(v.flags.is_star_algebra());
    Ok(v)
}

/// Minimal sufficient real Jordan algebra: generated by the
/// likelihood-ratio set together with the projection `ρ₀` of the
/// reference onto the minimal sufficient real *-subalgebra. Returns the
/// algebra and `ρ₀`.
pub fn minimal_sufficient_jordan(m: &Model) -> Result<(RealSubspace, CMat)> {
    let a_r = minimal_sufficient_star(m, Scalars::Real)?;
    let rho0 = hermitize(&a_r.project(&m.rho));
    let mut gens = crate::model::likelihood_ratio_set(m)?;
    gens.push(rho0.clone());
    let a_j = generate_jordan(m.dim, &gens)?;
    Ok((a_j, rho0))
}

// ---------------------------------------------------------------------
// Maps on the Hermitian part
// ---------------------------------------------------------------------

/// Real-linear map on Hermitian operators, stored as a `d²×d²` real
/// matrix over the orthonormal Hermitian basis.
#[derive(Clone, Debug)]
pub struct HermMap {
    pub dim: usize,
    pub mat: DMatrix<f64>,
}

pub fn herm_coords(b: &CMat) -> DVector<f64> {
    let d = b.nrows();
    let basis = herm_basis(d);
    DVector::from_iterator(d * d, basis.iter().map(|h| hs_inner(h, b).unwrap()))
}

pub fn herm_uncoords(d: usize, v: &DVector<f64>) -> CMat {
    let basis = herm_basis(d);
    let mut acc = matcore::zeros(d);
    for (k, h) in basis.iter().enumerate() {
        acc += h.scale(v[k]);
    }
    acc
}

impl HermMap {
    /// Restriction of a full superoperator to the Hermitian part. Errors
    /// if the map does not send Hermitian operators to Hermitian ones.
    pub fn from_superop(s: &Superoperator) -> Result<HermMap> {
        let d = s.dim;
        let basis = herm_basis(d);
        let mut mat = DMatrix::zeros(d * d, d * d);
        for (k, h) in basis.iter().enumerate() {
            let img = s.apply(h);
            let defect = matcore::hermitian_defect(&img);
            if defect > 1e-9 {
                return Err(Error::NotHermitian { defect });
            }
            mat.set_column(k, &herm_coords(&hermitize(&img)));
        }
        Ok(HermMap { dim: d, mat })
    }

    pub fn identity(d: usize) -> HermMap {
        HermMap {
            dim: d,
            mat: DMatrix::identity(d * d, d * d),
        }
    }

    pub fn apply(&self, b: &CMat) -> CMat {
        herm_uncoords(self.dim, &(&self.mat * herm_coords(b)))
    }

    pub fn compose(&self, other: &HermMap) -> HermMap {
        HermMap {
            dim: self.dim,
            mat: &self.mat * &other.mat,
        }
    }

    pub fn hs_adjoint(&self) -> HermMap {
        HermMap {
            dim: self.dim,
            mat: self.mat.transpose(),
        }
    }

    /// Canonical real-linear extension to all operators, acting
    /// separately on the Hermitian and anti-Hermitian parts.
    pub fn to_superop(&self) -> Superoperator {
        let map = self.clone();
        Superoperator::from_map(self.dim, move |b| {
            let h = hermitize(b);
            let k = (b - b.adjoint()).scale(0.5).map(|z| z * matcore::c(0.0, -1.0));
            let mut out = map.apply(&h);
            out += map.apply(&k).map(|z| z * matcore::c(0.0, 1.0));
            out
        })
    }
}

/// Spectral projector onto the fixed points of `T` along the range of
/// `T − I`; valid for power-bounded maps whose only unimodular
/// eigenvalue is 1.
pub fn fixed_point_projector(t: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = t.nrows();
    let diff = t - DMatrix::<f64>::identity(n, n);
    // kernel via the Gram matrix of columns of (T − I)
    let gram_k = diff.transpose() * &diff;
    let (vals_k, vecs_k) = matcore::sym_eig_real(&gram_k);
    let lmax_k = vals_k.last().copied().unwrap_or(0.0);
    let mut kernel: Vec<DVector<f64>> = Vec::new();
    for (j, &lam) in vals_k.iter().enumerate() {
        if lam <= 1e-12 * lmax_k.max(1.0) {
            kernel.push(vecs_k.column(j).clone_owned());
        }
    }
    // range via the Gram matrix of rows
    let gram_r = &diff * diff.transpose();
    let (vals_r, vecs_r) = matcore::sym_eig_real(&gram_r);
    let lmax_r = vals_r.last().copied().unwrap_or(0.0);
    let mut range: Vec<DVector<f64>> = Vec::new();
    for (j, &lam) in vals_r.iter().enumerate() {
        if lam > 1e-12 * lmax_r.max(1.0) {
            range.push(vecs_r.column(j).clone_owned());
        }
    }
    if kernel.len() + range.len() != n {
        return Err(Error::InternalConsistency(format!(
            "fixed-point eigenvalue 1 is not semisimple: ker {} + range {} != {}",
            kernel.len(),
            range.len(),
            n
        )));
    }
    let mut s = DMatrix::zeros(n, n);
    for (j, v) in kernel.iter().chain(range.iter()).enumerate() {
        s.set_column(j, v);
    }
    let s_inv = s
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::InternalConsistency("fixed-point splitting is singular".into()))?;
    let mut sel = DMatrix::zeros(n, n);
    for j in 0..kernel.len() {
        sel[(j, j)] = 1.0;
    }
    Ok(s * sel * s_inv)
}

/// Literal power iteration `T, T², T³, …` with the stated stopping rule;
/// retained as a cross-check for the spectral projector.
pub fn fixed_point_projector_power(t: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut current = t.clone();
    for _ in 0..10_000 {
        let next = &current * t;
        if (&next - &current).norm() < 1e-12 {
            return Ok(next);
        }
        current = next;
    }
    Err(Error::InternalConsistency(
        "power iteration did not converge within 10^4 steps".into(),
    ))
}

/// Certificate produced by the fixed-point pipeline: the sufficient map,
/// its fixed-point Jordan algebra with the generated real and complex
/// algebras, the three conditional expectations, the supporting operator
/// `ω`, and the projection `ρ₀` of the reference.
#[derive(Clone, Debug)]
pub struct SufficiencyCertificate {
    pub alpha: Superoperator,
    pub a_j: RealSubspace,
    pub a_r: RealSubspace,
    pub a_c: RealSubspace,
    pub beta_j: HermMap,
    pub beta_r: Superoperator,
    pub beta_c: Superoperator,
    pub omega: CMat,
    pub rho0: CMat,
}

fn cert_check(check: &str, value: f64, tol: f64) -> Result<()> {
    if value > tol {
        return Err(Error::CertificateInvariant {
            check: check.into(),
            value,
            tol,
        });
    }
    Ok(())
}

/// Runs the fixed-point pipeline for a sufficient, positive, unital map:
/// the projector onto the fixed-point Jordan algebra is the spectral
/// projection of `(id + α)/2` at eigenvalue 1, `ω` is the image of `I`
/// under its adjoint, and the real/complex conditional expectations are
/// the `ω^{1/2}`-sandwich projections. All certificate invariants are
/// verified before the certificate is returned.
pub fn fixed_point_pipeline(
    m: &Model,
    alpha: &Superoperator,
    seed: u64,
) -> Result<SufficiencyCertificate> {
    let d = m.dim;
    if !m.restricted {
        return Err(Error::NotRestricted);
    }
    let suff = verify_sufficient(m, alpha, SUFF_TOL * 10.0)?;
    if !suff.passed {
        return Err(Error::NotSufficient {
            residual: suff.max_residual,
        });
    }
    let unital = alpha.unital_defect();
    if unital > CERT_TOL {
        return Err(Error::NotUnital(unital));
    }
    // sampled positivity: α(PSD) must stay PSD
    let mut rng = crate::sampling::rng_from_seed(seed);
    for _ in 0..50 {
        let b = crate::sampling::random_psd(d, &mut rng);
        let img = alpha.apply(&b);
        let defect = matcore::hermitian_defect(&img);
        if defect > 1e-9 {
            return Err(Error::NotPositiveMap(defect));
        }
        let me = min_eig(&hermitize(&img))?;
        if me < -CERT_TOL * (1.0 + b.norm()) {
            return Err(Error::NotPositiveMap(-me));
        }
    }

    let alpha_h = HermMap::from_superop(alpha)?;
    let t = (&alpha_h.mat + DMatrix::<f64>::identity(d * d, d * d)).scale(0.5);
    let proj = fixed_point_projector(&t)?;
    cert_check(
        "beta_J idempotent",
        (&proj * &proj - &proj).norm(),
        1e-9 * (1.0 + proj.norm()),
    )?;
    let beta_j = HermMap { dim: d, mat: proj };

    // fixed-point Jordan algebra from the kernel of T − I
    let diff = &t - DMatrix::<f64>::identity(d * d, d * d);
    let gram = diff.transpose() * &diff;
    let (vals, vecs) = matcore::sym_eig_real(&gram);
    let lmax = vals.last().copied().unwrap_or(0.0);
    let mut fixed = Vec::new();
    for (j, &lam) in vals.iter().enumerate() {
        if lam <= 1e-12 * lmax.max(1.0) {
            fixed.push(herm_uncoords(d, &vecs.column(j).clone_owned()));
        }
    }
    let a_j = RealSubspace::from_orthonormal(d, fixed);
    if !a_j.flags.is_jordan_algebra() {
        return Err(Error::CertificateInvariant {
            check: "fixed points form a Jordan algebra".into(),
            value: 1.0,
            tol: 0.0,
        });
    }
    let a_r = generate_star(d, a_j.basis(), Scalars::Real);
    let a_c = generate_star(d, a_j.basis(), Scalars::Complex);

    // supporting operator: tr ω B = tr β_J(B)
    let omega = hermitize(&beta_j.hs_adjoint().apply(&eye(d)));
    let omega_min = min_eig(&omega)?;
    if omega_min <= 1e-10 {
        return Err(Error::CertificateInvariant {
            check: "omega strictly positive".into(),
            value: omega_min,
            tol: 1e-10,
        });
    }
    let w_half = sqrt_psd(&omega)?;
    let pr = a_r.projector_superop();
    let pc = a_c.projector_superop();
    let wh = w_half.clone();
    let beta_r = Superoperator::from_map(d, move |b| {
        crate::matcore::unvectorize(d, &(&pr.mat * vectorize(&(&wh * b * &wh))))
    });
    let wh = w_half.clone();
    let beta_c = Superoperator::from_map(d, move |b| {
        crate::matcore::unvectorize(d, &(&pc.mat * vectorize(&(&wh * b * &wh))))
    });
    let rho0 = hermitize(&a_r.project(&m.rho));

    let cert = SufficiencyCertificate {
        alpha: alpha.clone(),
        a_j,
        a_r,
        a_c,
        beta_j,
        beta_r,
        beta_c,
        omega,
        rho0,
    };
    verify_certificate(&cert, m, seed)?;
    Ok(cert)
}

/// All certificate invariants; every violation is an error.
fn verify_certificate(cert: &SufficiencyCertificate, m: &Model, seed: u64) -> Result<()> {
    let d = m.dim;
    let omega = &cert.omega;
    let scale = 1.0 + omega.norm();

    // projections of omega are the identity in all three algebras
    for (v, name) in [
        (&cert.a_j, "Pi_J(omega) = I"),
        (&cert.a_r, "Pi_R(omega) = I"),
        (&cert.a_c, "Pi_C(omega) = I"),
    ] {
        cert_check(name, (v.project(omega) - eye(d)).norm(), CERT_TOL * scale)?;
    }
    // omega commutes with the complex algebra and with every model element
    for b in cert.a_c.basis() {
        cert_check(
            "[omega, A_C] = 0",
            matcore::commutator(omega, b).norm(),
            1e-9 * scale * (1.0 + b.norm()),
        )?;
    }
    for e in &m.elements {
        cert_check(
            "[omega, X] = 0",
            matcore::commutator(omega, &e.op).norm(),
            1e-9 * scale * (1.0 + e.op.norm()),
        )?;
    }
    // X ω^{-1} lands in the fixed-point Jordan algebra
    let w_inv = matcore::geninv(omega)?;
    for e in &m.elements {
        let x0 = &e.op * &w_inv;
        cert_check(
            "X omega^{-1} in A_J",
            cert.a_j.member(&x0).abs_residual,
            CERT_TOL * (1.0 + x0.norm()),
        )?;
    }
    // beta_J fixes A_J and preserves omega-pairings
    for b in cert.a_j.basis() {
        cert_check(
            "beta_J fixes A_J",
            (cert.beta_j.apply(b) - b).norm(),
            1e-9 * (1.0 + b.norm()),
        )?;
    }
    let mut rng = crate::sampling::rng_from_seed(seed.wrapping_add(1));
    for _ in 0..50 {
        let b = crate::sampling::random_hermitian(d, &mut rng);
        let img = cert.beta_j.apply(&b);
        cert_check(
            "tr omega B = tr omega beta_J(B)",
            (hs_inner(omega, &b)? - hs_inner(omega, &img)?).abs(),
            CERT_TOL * scale * (1.0 + b.norm()),
        )?;
        // operator norm bound ‖α_h‖ = 1
        let bn = matcore::herm_eig(&b)?
            .values
            .iter()
            .fold(0.0f64, |acc, &v| acc.max(v.abs()));
        let imgn = matcore::herm_eig(&hermitize(&cert.alpha.apply(&b)))?
            .values
            .iter()
            .fold(0.0f64, |acc, &v| acc.max(v.abs()));
        cert_check("alpha_h norm bound", imgn - bn, 1e-8 * (1.0 + bn))?;
        // positivity of beta_J on PSD inputs
        let p = crate::sampling::random_psd(d, &mut rng);
        let me = min_eig(&hermitize(&cert.beta_j.apply(&p)))?;
        cert_check("beta_J positive", -me, 1e-8 * (1.0 + p.norm()))?;
    }
    // the sandwich maps are conditional expectations sufficient for S ∪ {ω}
    for (beta, v, name) in [
        (&cert.beta_r, &cert.a_r, "beta_R"),
        (&cert.beta_c, &cert.a_c, "beta_C"),
    ] {
        cert_check(
            &format!("{name} unital"),
            beta.unital_defect(),
            CERT_TOL * (d as f64),
        )?;
        for e in &m.elements {
            let vx = vectorize(&e.op);
            let diff = beta.mat.transpose() * &vx - &vx;
            cert_check(
                &format!("{name} sufficient for S"),
                diff.amax(),
                CERT_TOL * (1.0 + e.op.norm()),
            )?;
        }
        let vw = vectorize(omega);
        let diff = beta.mat.transpose() * &vw - &vw;
        cert_check(
            &format!("{name} sufficient for omega"),
            diff.amax(),
            CERT_TOL * scale,
        )?;
        // bimodule law on sampled pairs
        for _ in 0..20 {
            let b = crate::sampling::random_complex_gaussian(d, &mut rng);
            let k = rng_index(&mut rng, v.dim());
            let a = &v.basis()[k];
            cert_check(
                &format!("{name} bimodule"),
                (a * beta.apply(&b) - beta.apply(&(a * &b))).norm(),
                CERT_TOL * 100.0 * (1.0 + b.norm()),
            )?;
        }
    }
    Ok(())
}

fn rng_index(rng: &mut impl rand::Rng, len: usize) -> usize {
    if len == 0 {
        0
    } else {
        rng.gen_range(0..len)
    }
}

/// Certificate whose fixed-point algebra is the minimal sufficient real
/// Jordan algebra: runs the pipeline on the witness map `Π_J ∘ β_R`,
/// where `β_R` is the conditional expectation onto the minimal
/// sufficient real *-subalgebra.
pub fn jordan_witness_pipeline(m: &Model, seed: u64) -> Result<SufficiencyCertificate> {
    let a_r = minimal_sufficient_star(m, Scalars::Real)?;
    let beta_r = conditional_expectation(&a_r, &m.rho)?;
    let (a_j, _rho0) = minimal_sufficient_jordan(m)?;
    let witness = a_j.projector_superop().compose(&beta_r);
    fixed_point_pipeline(m, &witness, seed)
}

/// Membership report of one likelihood-type operator in `A_J`.
#[derive(Clone, Debug)]
pub struct LikelihoodMembership {
    pub label: String,
    pub residual: f64,
    pub contained: bool,
}

/// Recomputes every likelihood-type operator through the supporting
/// operator (`X₀ = Xω^{-1}`, `ρ₀ = ρω^{-1}`) and reports its membership
/// residual in the fixed-point Jordan algebra.
pub fn likelihood_in_algebra_check(
    cert: &SufficiencyCertificate,
    m: &Model,
) -> Result<Vec<LikelihoodMembership>> {
    if !m.restricted {
        return Err(Error::NotRestricted);
    }
    let w_inv = matcore::geninv(&cert.omega)?;
    let rho0 = hermitize(&(&m.rho * &w_inv));
    let is_ref = |op: &CMat| (op - &m.rho).norm() <= 1e-12 * (1.0 + m.rho.norm());
    let mut out = Vec::new();
    for e in &m.elements {
        let x0 = hermitize(&(&e.op * &w_inv));
        let ratio = if is_ref(&e.op) {
            support_proj(&rho0, RANK_TOL)?
        } else {
            match e.kind {
                crate::model::ElementKind::State => {
                    crate::model::sqrt_likelihood_ratio(&x0, &rho0)?
                }
                crate::model::ElementKind::Derivative => crate::model::sld(&x0, &rho0)?,
            }
        };
        let mem = cert.a_j.member(&ratio);
        out.push(LikelihoodMembership {
            label: e.label.clone(),
            residual: mem.abs_residual,
            contained: mem.contained,
        });
    }
    Ok(out)
}
