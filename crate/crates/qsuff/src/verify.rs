//! Executable theorem battery: runs every property the engine promises
//! on a concrete model and returns a residual table. Used by the CLI
//! `verify` and `selftest` commands and by the acceptance suite.

use crate::algebra::{self, RealSubspace, Scalars};
use crate::matcore::{self, hermitize, min_eig, CMat};
use crate::model::{d_tilde, Model, Superoperator};
use crate::structure::{self, Mode};
use crate::sufficiency::{self, SUFF_TOL};
use crate::Result;

/// One`check = value (tol)` row; `pass` is `value <= tol`.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ResidualEntry {
    pub check: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct VerifyReport {
    pub entries: Vec<ResidualEntry>,
}

impl VerifyReport {
    pub fn push(&mut self, check: impl Into<String>, value: f64, tol: f64) {
        let check = check.into();
        self.entries.push(ResidualEntry {
            check,
            value,
            tol,
            pass: value <= tol,
        });
    }

    pub fn push_bool(&mut self, check: impl Into<String>, ok: bool) {
        self.push(check, if ok { 0.0 } else { 1.0 }, 0.5);
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn merge(&mut self, prefix: &str, other: VerifyReport) {
        for mut e in other.entries {
            e.check = format!("{prefix}.{}", e.check);
            self.entries.push(e);
        }
    }
}

/// Projection-theorem properties of the orthogonal projection onto a
/// star algebra: adjoint preservation, positivity, quantitative
/// faithfulness, and the bimodule law.
pub fn projection_theorem_report(a: &RealSubspace, seed: u64) -> VerifyReport {
    let mut rep = VerifyReport::default();
    let d = a.dim_ambient;
    let mut rng = crate::sampling::rng_from_seed(seed);
    let mut adj = 0.0f64;
    let mut pos = 0.0f64;
    let mut faith = 0.0f64;
    for _ in 0..50 {
        let b = crate::sampling::random_complex_gaussian(d, &mut rng);
        let p = a.project(&b);
        adj = adj.max((a.project(&b.adjoint()) - p.adjoint()).norm());
        let x = crate::sampling::random_psd(d, &mut rng);
        let px = hermitize(&a.project(&x));
        pos = pos.max(-min_eig(&px).unwrap_or(f64::NEG_INFINITY) / (1.0 + x.norm()));
        // tr B ≤ √d ‖Π(B)‖ makes faithfulness quantitative
        let tr: f64 = (0..d).map(|i| x[(i, i)].re).sum();
        faith = faith.max(tr - (d as f64).sqrt() * px.norm());
    }
    rep.push("projection preserves adjoints", adj, 1e-9);
    rep.push("projection positive on PSD", pos, 1e-10);
    rep.push("projection faithfulness bound", faith, 1e-8);
    let mut bimod = 0.0f64;
    for x in a.basis() {
        for b in matcore::std_basis(d).iter().step_by(2) {
            let gap = (x * a.project(b) - a.project(&(x * b))).norm();
            bimod = bimod.max(gap / (1.0 + x.norm()) / (1.0 + b.norm()));
        }
    }
    rep.push("projection bimodule law", bimod, 1e-9);
    rep
}

/// Schwarz inequality and Hermitian preservation for a positive unital
/// map, on random Hermitian inputs.
pub fn schwarz_report(name: &str, alpha: &Superoperator, seed: u64) -> VerifyReport {
    let mut rep = VerifyReport::default();
    let d = alpha.dim;
    let mut rng = crate::sampling::rng_from_seed(seed);
    let mut herm = 0.0f64;
    let mut schwarz = 0.0f64;
    for _ in 0..50 {
        let b = crate::sampling::random_hermitian(d, &mut rng);
        let img = alpha.apply(&b);
        herm = herm.max(matcore::hermitian_defect(&img));
        let lhs = alpha.apply(&(&b * &b));
        let rhs = &img * &img;
        let gap = hermitize(&(lhs - rhs));
        schwarz = schwarz.max(-min_eig(&gap).unwrap_or(f64::NEG_INFINITY) / (1.0 + b.norm_squared()));
    }
    rep.push(format!("{name} maps Hermitian to Hermitian"), herm, 1e-9);
    rep.push(format!("{name} Schwarz inequality"), schwarz, 1e-9);
    rep
}

/// Modular-equivalence battery on an algebra/reference pair: agreement
/// of conditional-expectation existence, the two-sided modular identity,
/// modular invariance, and D-tilde invariance.
pub fn modular_equivalence_report(a: &RealSubspace, rho: &CMat) -> Result<VerifyReport> {
    let mut rep = VerifyReport::default();
    let (worst, invariant) = algebra::modular_residual(a, rho)?;
    let ce = sufficiency::conditional_expectation(a, rho);
    rep.push_bool(
        "CE existence agrees with modular invariance",
        ce.is_ok() == invariant,
    );
    // rho A rho^{-1} = rho0 A rho0^{-1}
    let rho0 = hermitize(&a.project(rho));
    let delta = crate::model::modular_superop(rho)?;
    let delta0 = crate::model::modular_superop(&rho0)?;
    let mut two_sided = 0.0f64;
    for b in a.basis() {
        two_sided = two_sided.max((delta.apply(b) - delta0.apply(b)).norm());
    }
    if invariant {
        rep.push("modular identity rhoA = rho0A", two_sided, 1e-7);
    } else {
        rep.push_bool(
            "two-sided identity fails with invariance",
            two_sided > worst.min(1e-7) || two_sided > 1e-9,
        );
    }
    // D-tilde invariance agrees with modular invariance
    let dt = d_tilde(rho)?;
    let mut dt_worst = 0.0f64;
    for b in a.basis() {
        dt_worst = dt_worst.max(a.member(&dt.apply(b)).abs_residual);
    }
    let dt_invariant = dt_worst <= algebra::MEMBER_TOL * 10.0;
    rep.push_bool(
        "D-tilde invariance agrees with modular invariance",
        dt_invariant == invariant,
    );
    Ok(rep)
}

/// Jordan conditional-expectation laws for the fixed-point projector.
pub fn jordan_ce_report(cert: &sufficiency::SufficiencyCertificate, seed: u64) -> VerifyReport {
    let mut rep = VerifyReport::default();
    let d = cert.omega.nrows();
    let mut rng = crate::sampling::rng_from_seed(seed);
    let mut law1 = 0.0f64;
    let mut law2 = 0.0f64;
    for _ in 0..50 {
        let b = crate::sampling::random_hermitian(d, &mut rng);
        for a in cert.a_j.basis().iter().take(6) {
            let scale = (1.0 + a.norm()) * (1.0 + b.norm());
            let g1 = (cert.beta_j.apply(&matcore::jordan(a, &b))
                - matcore::jordan(a, &cert.beta_j.apply(&b)))
            .norm();
            law1 = law1.max(g1 / scale);
            let g2 = (cert.beta_j.apply(&(a * &b * a)) - a * cert.beta_j.apply(&b) * a).norm();
            law2 = law2.max(g2 / (scale * (1.0 + a.norm())));
        }
    }
    rep.push("Jordan CE law A∘beta(B)", law1, 1e-9);
    rep.push("Jordan CE law A beta(B) A", law2, 1e-9);
    rep
}

/// Full theorem battery for one restricted model.
pub fn verify_model(m: &Model, seed: u64) -> Result<VerifyReport> {
    let mut rep = VerifyReport::default();
    let d = m.dim;

    // likelihood ratios exist and reconstruct their elements
    let ratios = crate::model::likelihood_ratio_set(m)?;
    rep.push_bool("likelihood ratios exist", ratios.len() == m.elements.len());

    // minimal sufficient algebras
    let a_r = sufficiency::minimal_sufficient_star(m, Scalars::Real)?;
    let a_c = sufficiency::minimal_sufficient_star(m, Scalars::Complex)?;
    let (a_j, _rho0) = sufficiency::minimal_sufficient_jordan(m)?;
    let (ar_contains, worst_r) = {
        let mut worst = 0.0f64;
        let mut ok = true;
        for r in &ratios {
            let mem = a_r.member(r);
            worst = worst.max(mem.abs_residual);
            ok &= mem.contained;
        }
        (ok, worst)
    };
    rep.push("ratios inside minimal star algebra", worst_r, 1e-8);
    rep.push_bool("ratios membership verdict", ar_contains);
    let (mod_res, mod_ok) = algebra::modular_residual(&a_r, &m.rho)?;
    rep.push("minimal star algebra modular residual", mod_res, 1e-8);
    rep.push_bool("minimal star algebra modular invariant", mod_ok);
    rep.push_bool(
        "jordan algebra inside complex algebra",
        a_c.contains(&a_j).0,
    );

    // conditional expectations and sufficiency
    let beta_r = sufficiency::conditional_expectation(&a_r, &m.rho)?;
    let chk = sufficiency::verify_sufficient(m, &beta_r, SUFF_TOL)?;
    rep.push("CE onto minimal star algebra sufficient", chk.max_residual, SUFF_TOL);
    let pj = a_j.projector_superop();
    let beta_j_witness = pj.compose(&beta_r);
    let chk_j = sufficiency::verify_sufficient(m, &beta_j_witness, SUFF_TOL)?;
    rep.push("Jordan witness map sufficient", chk_j.max_residual, SUFF_TOL);

    // projection theorem and Schwarz properties
    rep.merge("proj", projection_theorem_report(&a_r, seed));
    rep.merge("schwarz", schwarz_report("CE", &beta_r, seed.wrapping_add(1)));

    // modular equivalence on the minimal algebra
    rep.merge("modular", modular_equivalence_report(&a_r, &m.rho)?);

    // fixed-point pipeline and certificate invariants
    match sufficiency::fixed_point_pipeline(m, &beta_r, seed) {
        Ok(cert) => {
            rep.push_bool("pipeline certificate valid", true);
            rep.push(
                "omega strictly positive",
                -min_eig(&cert.omega)?,
                -1e-10,
            );
            rep.merge("pos2J", jordan_ce_report(&cert, seed.wrapping_add(2)));
            let members = sufficiency::likelihood_in_algebra_check(&cert, m)?;
            let worst = members.iter().fold(0.0f64, |a, r| a.max(r.residual));
            rep.push("likelihood ratios inside fixed-point algebra", worst, 1e-8);

            // structure identification round trips
            match structure::identify_structure(&cert.a_j, Mode::Jordan, seed) {
                Ok(sd) => {
                    rep.push_bool(
                        "jordan_dim matches identified blocks",
                        structure::jordan_dim(&sd.blocks) == cert.a_j.dim(),
                    );
                    match sufficiency::jordan_witness_pipeline(m, seed)
                        .and_then(|wcert| structure::ki_decompose(m, &wcert, Mode::Jordan, seed))
                    {
                        Ok(ki) => {
                            let mut worst = 0.0f64;
                            for (idx, e) in m.elements.iter().enumerate() {
                                let gap = (ki.reassemble(idx) - &e.op).norm()
                                    / (1.0 + e.op.norm());
                                worst = worst.max(gap);
                            }
                            rep.push("KI reassembly", worst, 1e-8);
                        }
                        Err(e) => {
                            rep.push_bool(format!("KI decomposition failed: {e}"), false);
                        }
                    }
                }
                Err(e) => {
                    rep.push_bool(format!("structure identification failed: {e}"), false);
                }
            }
        }
        Err(e) => {
            rep.push_bool(format!("pipeline failed: {e}"), false);
        }
    }

    // support-size bound sanity on the identified structure
    if let Ok((aj2, _)) = sufficiency::minimal_sufficient_jordan(m) {
        if let Ok(sd) = structure::identify_structure(&aj2, Mode::Jordan, seed) {
            let djordan = structure::jordan_dim(&sd.blocks);
            let n_derivs = m
                .elements
                .iter()
                .filter(|e| e.kind == crate::model::ElementKind::Derivative)
                .count()
                .max(1);
            let local = structure::support_size_bound(&sd.blocks, n_derivs, structure::Setting::Local);
            let bayes = structure::support_size_bound(&sd.blocks, 1, structure::Setting::Bayesian);
            rep.push_bool("local bound at least bayesian bound", local >= bayes);
            rep.push_bool("bayesian bound equals jordan dim", bayes == djordan);
        }
    }
    let _ = d;
    Ok(rep)
}

/// Random-model suite: deterministic trials derived from a master seed.
pub fn selftest(dims: &[usize], trials: usize, master_seed: u64) -> Result<Vec<(String, VerifyReport)>> {
    let mut out = Vec::new();
    for (di, &d) in dims.iter().enumerate() {
        for t in 0..trials {
            let stream = (di * 1000 + t) as u64;
            let mut rng = crate::sampling::derived_rng(master_seed, stream);
            use rand::Rng;
            let degenerate = d >= 3 && t % 3 == 2;
            let rank = if degenerate { d - 1 } else { d };
            let n_state = rng.gen_range(0..=1);
            let n_deriv = 1 + rng.gen_range(0..=1);
            let m0 = crate::sampling::random_model(d, rank, n_state, n_deriv, &mut rng);
            let m = crate::model::restrict_to_hs(&m0)?.model;
            let rep = verify_model(&m, master_seed.wrapping_add(stream))?;
            out.push((format!("dim{d}/trial{t}"), rep));
        }
    }
    Ok(out)
}
