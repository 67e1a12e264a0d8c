//! Batch front door: model ingestion, command dispatch, deterministic
//! JSON reports, and the reproducible verification harness.
//!
//! Exit codes: 0 all residuals pass, 1 a verification failed, 2 input
//! error.

mod codec;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use codec::{blocks_to_json, matrix_to_json, parse_model, parse_povm, subspace_to_json};
use qsuff::algebra::Scalars;
use qsuff::model::{restrict_to_hs_with, Model};
use qsuff::structure::{self, Mode, Setting};
use qsuff::sufficiency;
use qsuff::verify::{self, ResidualEntry};
use report::{digest, Report};

#[derive(Parser)]
#[command(name = "qsuff", version, about = "Minimal sufficient algebras for quantum statistical models")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Residual tolerance used for pass/fail verdicts.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,

    /// Relative rank cut for support projections and restriction.
    #[arg(long, global = true, default_value_t = 1e-10)]
    rank_tol: f64,

    /// Master seed for all randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output format: the JSON report is the contract.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScalarsArg {
    Real,
    Complex,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Star,
    Jordan,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SettingArg {
    Local,
    Bayesian,
}

#[derive(Subcommand)]
enum Command {
    /// Restrict a model to the joint support of its elements.
    Restrict { model: PathBuf },
    /// Compute the likelihood-ratio set of the restricted model.
    Ratios { model: PathBuf },
    /// Minimal sufficient *-subalgebra (real or complex scalars).
    Minsuff {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = ScalarsArg::Real)]
        scalars: ScalarsArg,
    },
    /// Minimal sufficient real Jordan algebra.
    Jordan { model: PathBuf },
    /// Conditional expectation onto the minimal sufficient real algebra.
    Ce { model: PathBuf },
    /// Fixed-point pipeline: certificate with supporting operator.
    Pipeline { model: PathBuf },
    /// Block-structure identification of the minimal sufficient algebra.
    Structure {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Jordan)]
        mode: ModeArg,
    },
    /// Koashi-Imoto decomposition of the model.
    Ki {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Jordan)]
        target: ModeArg,
    },
    /// POVM support-size bound from the minimal sufficient Jordan algebra.
    Bound {
        model: PathBuf,
        #[arg(long, value_enum)]
        setting: SettingArg,
        #[arg(long)]
        params: usize,
    },
    /// Classical Fisher information matrix of a POVM for the model.
    Fisher {
        model: PathBuf,
        #[arg(long)]
        povm: PathBuf,
    },
    /// Full theorem property suite on the given model.
    Verify { model: PathBuf },
    /// Random-model suite over the given dimensions.
    Selftest {
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        trials: usize,
    },
}

fn tolerances(cli: &Cli) -> Value {
    json!({
        "tol": cli.tol,
        "rank_tol": cli.rank_tol,
        "hermitian_tol": qsuff::matcore::HERMITIAN_TOL,
        "psd_tol": qsuff::matcore::PSD_TOL,
        "member_tol": qsuff::algebra::MEMBER_TOL,
        "struct_tol": qsuff::structure::STRUCT_TOL,
        "fisher_floor": qsuff::structure::FISHER_FLOOR,
    })
}

struct Ctx {
    tol: f64,
    rank_tol: f64,
    seed: u64,
}

fn load_model(path: &PathBuf) -> Result<(Model, Vec<u8>), String> {
    let bytes = std::fs::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let text =
        String::from_utf8(bytes.clone()).map_err(|_| "model file is not UTF-8".to_string())?;
    let model = parse_model(&text).map_err(|e| e.to_string())?;
    Ok((model, bytes))
}

fn restricted(model: &Model, ctx: &Ctx) -> qsuff::Result<Model> {
    Ok(restrict_to_hs_with(model, ctx.rank_tol)?.model)
}

/// Minimal sufficient real algebra plus its conditional expectation.
fn minimal_ce(
    m: &Model,
) -> qsuff::Result<(qsuff::algebra::RealSubspace, qsuff::model::Superoperator)> {
    let a = sufficiency::minimal_sufficient_star(m, Scalars::Real)?;
    let ce = sufficiency::conditional_expectation(&a, &m.rho)?;
    Ok((a, ce))
}

fn entry(check: &str, value: f64, tol: f64) -> ResidualEntry {
    ResidualEntry {
        check: check.to_string(),
        value,
        tol,
        pass: value <= tol,
    }
}

fn run_command(cli: &Cli) -> Result<Report, String> {
    let ctx = Ctx {
        tol: cli.tol,
        rank_tol: cli.rank_tol,
        seed: cli.seed,
    };
    let (name, results, table, digest_parts): (String, Value, Vec<ResidualEntry>, Vec<Vec<u8>>) =
        match &cli.command {
            Command::Restrict { model } => {
                let (m, bytes) = load_model(model)?;
                let r = restrict_to_hs_with(&m, ctx.rank_tol).map_err(|e| e.to_string())?;
                let results = json!({
                    "dim_before": m.dim,
                    "dim_after": r.model.dim,
                    "isometry": matrix_to_json(&r.isometry),
                    "reference": matrix_to_json(&r.model.rho),
                    "elements": r.model.elements.iter().map(|e| json!({
                        "kind": format!("{:?}", e.kind).to_lowercase(),
                        "label": e.label,
                        "matrix": matrix_to_json(&e.op),
                    })).collect::<Vec<_>>(),
                });
                let table = vec![entry(
                    "restriction preserves pairings",
                    restriction_pairing_residual(&m, &r),
                    ctx.tol.max(1e-10),
                )];
                ("restrict".into(), results, table, vec![bytes])
            }
            Command::Ratios { model } => {
                let (m0, bytes) = load_model(model)?;
                let m = restricted(&m0, &ctx).map_err(|e| e.to_string())?;
                let ratios = match qsuff::model::likelihood_ratio_set(&m) {
                    Ok(r) => r,
                    Err(e) => return fail_report(cli, "ratios", &e.to_string(), vec![bytes]),
                };
                let mut table = Vec::new();
                for (e, r) in m.elements.iter().zip(&ratios) {
                    let is_ref = (&e.op - &m.rho).norm() <= 1e-12 * (1.0 + m.rho.norm());
                    let recon = if is_ref {
                        0.0
                    } else {
                        match e.kind {
                            qsuff::model::ElementKind::State => {
                                (r * &m.rho * r - &e.op).norm() / (1.0 + e.op.norm())
                            }
                            qsuff::model::ElementKind::Derivative => {
                                (qsuff::matcore::jordan(&m.rho, r) - &e.op).norm()
                                    / (1.0 + e.op.norm())
                            }
                        }
                    };
                    table.push(entry(
                        &format!("ratio reconstructs {}", e.label),
                        recon,
                        qsuff::model::RECON_TOL,
                    ));
                }
                let kinds: std::collections::BTreeSet<_> = m
                    .non_reference()
                    .map(|e| format!("{:?}", e.kind))
                    .collect();
                let results = json!({
                    "dim": m.dim,
                    // absolutely continuous and local elements may be
                    // mixed; the per-element kind rule applies
                    "mixed_model": kinds.len() > 1,
                    "ratios": m.elements.iter().zip(&ratios).map(|(e, r)| json!({
                        "label": e.label,
                        "kind": format!("{:?}", e.kind).to_lowercase(),
                        "matrix": matrix_to_json(r),
                    })).collect::<Vec<_>>(),
                });
                ("ratios".into(), results, table, vec![bytes])
            }
            Command::Minsuff { model, scalars } => {
                let (m0, bytes) = load_model(model)?;
                let m = restricted(&m0, &ctx).map_err(|e| e.to_string())?;
                let sc = match scalars {
                    ScalarsArg::Real => Scalars::Real,
                    ScalarsArg::Complex => Scalars::Complex,
                };
                let a = match sufficiency::minimal_sufficient_star(&m, sc) {
                    Ok(a) => a,
                    Err(e) => return fail_report(cli, "minsuff", &e.to_string(), vec![bytes]),
                };
                let mut table = Vec::new();
                let (mod_res, _) =
                    qsuff::algebra::modular_residual(&a, &m.rho).map_err(|e| e.to_string())?;
                table.push(entry("modular invariance", mod_res, ctx.tol.max(1e-8)));
                match sufficiency::conditional_expectation(&a, &m.rho) {
                    Ok(ce) => {
                        let chk = sufficiency::verify_sufficient(&m, &ce, ctx.tol)
                            .map_err(|e| e.to_string())?;
                        table.push(entry(
                            "conditional expectation sufficient",
                            chk.max_residual,
                            ctx.tol,
                        ));
                    }
                    Err(e) => table.push(entry(
                        &format!("conditional expectation failed: {e}"),
                        1.0,
                        0.0,
                    )),
                }
                let results = json!({
                    "scalars": if sc == Scalars::Real { "real" } else { "complex" },
                    "algebra": subspace_to_json(&a),
                });
                ("minsuff".into(), results, table, vec![bytes])
            }
            Command::Jordan { model } => {
                let (m0, bytes) = load_model(model)?;
                let m = restricted(&m0, &ctx).map_err(|e| e.to_string())?;
                let (a_j, rho0) = match sufficiency::minimal_sufficient_jordan(&m) {
                    Ok(x) => x,
                    Err(e) => return fail_report(cli, "jordan", &e.to_string(), vec![bytes]),
                };
                let (a_r, beta_r) = minimal_ce(&m).map_err(|e| e.to_string())?;
                let beta_j = a_j.projector_superop().compose(&beta_r);
                let chk = sufficiency::verify_sufficient(&m, &beta_j, ctx.tol)
                    .map_err(|e| e.to_string())?;
                let table = vec![entry(
                    "Jordan witness map sufficient",
                    chk.max_residual,
                    ctx.tol,
                )];
                let results = json!({
                    "algebra": subspace_to_json(&a_j),
                    "rho0": matrix_to_json(&rho0),
                    "star_dim": a_r.dim(),
                });
                ("jordan".into(), results, table, vec![bytes])
            }
            Command::Ce { model } => {
                let (m0, bytes) = load_model(model)?;
                let m = restricted(&m0, &ctx).map_err(|e| e.to_string())?;
                let (a, ce) = match minimal_ce(&m) {
                    Ok(x) => x,
                    Err(e) => return fail_report(cli, "ce", &e.to_string(), vec![bytes]),
                };
                let chk =
                    sufficiency::verify_sufficient(&m, &ce, ctx.tol).map_err(|e| e.to_string())?;
                let table = vec![
                    entry("sufficient", chk.max_residual, ctx.tol),
                    entry("unital", ce.unital_defect(), 1e-8),
                ];
                let results = json!({
                    "algebra_dim": a.dim(),
                    "superoperator_dim": ce.mat.nrows(),
                });
                ("ce".into(), results, table, vec![bytes])
            }
            Command::Pipeline { model } => {
                let (m0, bytes) = load_model(model)?;
                let m = restricted(&m0, &ctx).map_err(|e| e.to_string())?;
                let (_, ce) = match minimal_ce(&m) {
                    Ok(x) => x,
                    Err(e) => return fail_report(cli, "pipeline", &e.to_string(), vec![bytes]),
                };
                let cert = match sufficiency::fixed_point_pipeline(&m, &ce, ctx.seed) {
                    Ok(c) => c,
                    Err(e) => return fail_report(cli, "pipeline", &e.to_string(), vec![bytes]),
                };
                let members = sufficiency::likelihood_in_algebra_check(&cert, &m)
                    .map_err(|e| e.to_string())?;
                let mut table = vec![entry(
                    "omega strictly positive",
                    -qsuff::matcore::min_eig(&cert.omega).map_err(|e| e.to_string())?,
                    -1e-10,
                )];
                for r in &members {
                    table.push(entry(
                        &format!("likelihood ratio of {} in A_J", r.label),
                        r.residual,
                        qsuff::algebra::MEMBER_TOL * 10.0,
                    ));
                }
                let results = json!({
                    "a_j": subspace_to_json(&cert.a_j),
                    "a_r": subspace_to_json(&cert.a_r),
                    "a_c": subspace_to_json(&cert.a_c),
                    "omega": matrix_to_json(&cert.omega),
                    "rho0": matrix_to_json(&cert.rho0),
                });
                ("pipeline".into(), results, table, vec![bytes])
            }
            Command::Structure { model, mode } => {
                let (m0, bytes) = load_model(model)?;
                let m = restricted(&m0, &ctx).map_err(|e| e.to_string())?;
                let (target_mode, algebra) = match mode {
                    ModeArg::Star => (
                        Mode::Star,
                        sufficiency::minimal_sufficient_star(&m, Scalars::Real)
                            .map_err(|e| e.to_string())?,
                    ),
                    ModeArg::Jordan => (
                        Mode::Jordan,
                        sufficiency::minimal_sufficient_jordan(&m)
                            .map_err(|e| e.to_string())?
                            .0,
                    ),
                };
                let sd = match structure::identify_structure(&algebra, target_mode, ctx.seed) {
                    Ok(sd) => sd,
                    Err(e) => return fail_report(cli, "structure", &e.to_string(), vec![bytes]),
                };
                let mut worst = 0.0f64;
                let canon = structure::canonical_algebra(&sd.blocks, target_mode);
                for b in algebra.basis() {
                    let moved = sd.u.adjoint() * b * &sd.u;
                    worst = worst.max(canon.member(&moved).abs_residual);
                }
                let table = vec![entry("canonical membership", worst, structure::STRUCT_TOL)];
                let mut results = json!({
                    "mode": if target_mode == Mode::Star { "star" } else { "jordan" },
                    "blocks": blocks_to_json(&sd.blocks),
                    "unitary": matrix_to_json(&sd.u),
                    "algebra_dim": algebra.dim(),
                });
                if target_mode == Mode::Jordan {
                    results["jordan_dim"] = json!(structure::jordan_dim(&sd.blocks));
                }
                ("structure".into(), results, table, vec![bytes])
            }
            Command::Ki { model, target } => {
                let (m0, bytes) = load_model(model)?;
                let m = restricted(&m0, &ctx).map_err(|e| e.to_string())?;
                let cert = match sufficiency::jordan_witness_pipeline(&m, ctx.seed) {
                    Ok(c) => c,
                    Err(e) => return fail_report(cli, "ki", &e.to_string(), vec![bytes]),
                };
                let target_mode = match target {
                    ModeArg::Star => Mode::Star,
                    ModeArg::Jordan => Mode::Jordan,
                };
                let ki = match structure::ki_decompose(&m, &cert, target_mode, ctx.seed) {
                    Ok(k) => k,
                    Err(e) => return fail_report(cli, "ki", &e.to_string(), vec![bytes]),
                };
                let mut table = Vec::new();
                for (idx, e) in m.elements.iter().enumerate() {
                    let gap = (ki.reassemble(idx) - &e.op).norm() / (1.0 + e.op.norm());
                    table.push(entry(&format!("reassembly of {}", e.label), gap, 1e-8));
                }
                let results = json!({
                    "blocks": blocks_to_json(&ki.structure.blocks),
                    "unitary": matrix_to_json(&ki.structure.u),
                    "p_blocks": ki.p_blocks,
                    "x_blocks": ki.x_blocks.iter().map(|cores| {
                        cores.iter().map(matrix_to_json).collect::<Vec<_>>()
                    }).collect::<Vec<_>>(),
                    "element_labels": m.elements.iter().map(|e| e.label.clone()).collect::<Vec<_>>(),
                });
                ("ki".into(), results, table, vec![bytes])
            }
            Command::Bound {
                model,
                setting,
                params,
            } => {
                let (m0, bytes) = load_model(model)?;
                let m = restricted(&m0, &ctx).map_err(|e| e.to_string())?;
                let (a_j, _) =
                    sufficiency::minimal_sufficient_jordan(&m).map_err(|e| e.to_string())?;
                let sd = match structure::identify_structure(&a_j, Mode::Jordan, ctx.seed) {
                    Ok(sd) => sd,
                    Err(e) => return fail_report(cli, "bound", &e.to_string(), vec![bytes]),
                };
                let st = match setting {
                    SettingArg::Local => Setting::Local,
                    SettingArg::Bayesian => Setting::Bayesian,
                };
                if st == Setting::Local && *params == 0 {
                    return Err("local setting needs --params >= 1".into());
                }
                let bound = structure::support_size_bound(&sd.blocks, *params, st);
                let dimj = structure::jordan_dim(&sd.blocks);
                let table = vec![entry(
                    "jordan_dim matches basis count",
                    (dimj as f64 - a_j.dim() as f64).abs(),
                    0.0,
                )];
                let results = json!({
                    "setting": if st == Setting::Local { "local" } else { "bayesian" },
                    "params": params,
                    "jordan_dim": dimj,
                    "blocks": blocks_to_json(&sd.blocks),
                    "bound": bound,
                });
                ("bound".into(), results, table, vec![bytes])
            }
            Command::Fisher { model, povm } => {
                let (m0, bytes) = load_model(model)?;
                let povm_bytes = std::fs::read(povm)
                    .map_err(|e| format!("cannot read {}: {e}", povm.display()))?;
                let povm_text = String::from_utf8(povm_bytes.clone())
                    .map_err(|_| "povm file is not UTF-8".to_string())?;
                let elements = parse_povm(&povm_text, m0.dim).map_err(|e| e.to_string())?;
                let derivs: Vec<_> = m0
                    .elements
                    .iter()
                    .filter(|e| e.kind == qsuff::model::ElementKind::Derivative)
                    .map(|e| e.op.clone())
                    .collect();
                if derivs.is_empty() {
                    return Err("fisher needs at least one derivative-kind element".into());
                }
                let j = match structure::classical_fisher(&m0.rho, &derivs, &elements) {
                    Ok(j) => j,
                    Err(e) => {
                        return fail_report(cli, "fisher", &e.to_string(), vec![bytes, povm_bytes])
                    }
                };
                let sym = (&j - j.transpose()).norm();
                let (eigs, _) = qsuff::matcore::sym_eig_real(&j);
                let min_eig = eigs.first().copied().unwrap_or(0.0);
                let table = vec![
                    entry("fisher matrix symmetric", sym, 1e-10),
                    entry("fisher matrix PSD", -min_eig, 1e-10),
                ];
                let results = json!({
                    "outcomes": elements.len(),
                    "fisher": (0..j.nrows()).map(|i| {
                        (0..j.ncols()).map(|k| j[(i, k)]).collect::<Vec<_>>()
                    }).collect::<Vec<_>>(),
                });
                ("fisher".into(), results, table, vec![bytes, povm_bytes])
            }
            Command::Verify { model } => {
                let (m0, bytes) = load_model(model)?;
                let m = restricted(&m0, &ctx).map_err(|e| e.to_string())?;
                let rep = match verify::verify_model(&m, ctx.seed) {
                    Ok(r) => r,
                    Err(e) => return fail_report(cli, "verify", &e.to_string(), vec![bytes]),
                };
                let results = json!({
                    "dim": m.dim,
                    "checks": rep.entries.len(),
                });
                ("verify".into(), results, rep.entries, vec![bytes])
            }
            Command::Selftest { dims, trials } => {
                let outcome =
                    verify::selftest(dims, *trials, ctx.seed).map_err(|e| e.to_string())?;
                let mut table = Vec::new();
                let mut trial_summaries = Vec::new();
                for (tag, rep) in outcome {
                    trial_summaries.push(json!({
                        "trial": tag,
                        "passed": rep.passed(),
                        "checks": rep.entries.len(),
                    }));
                    for mut e in rep.entries {
                        e.check = format!("{tag}.{}", e.check);
                        table.push(e);
                    }
                }
                let results = json!({
                    "dims": dims,
                    "trials_per_dim": trials,
                    "trials": trial_summaries,
                });
                let flag_bytes = format!("{dims:?}/{trials}").into_bytes();
                ("selftest".into(), results, table, vec![flag_bytes])
            }
        };
    let seed_bytes = ctx.seed.to_le_bytes();
    let inputs_digest = {
        let mut parts: Vec<&[u8]> = vec![name.as_bytes()];
        for p in &digest_parts {
            parts.push(p);
        }
        parts.push(&seed_bytes);
        digest(&parts)
    };
    Ok(Report {
        command: name,
        inputs_digest,
        seed: ctx.seed,
        tolerances: tolerances(cli),
        results,
        residual_table: table,
    })
}

/// A computation failure is a verification outcome, not an input error.
fn fail_report(
    cli: &Cli,
    command: &str,
    message: &str,
    digest_parts: Vec<Vec<u8>>,
) -> Result<Report, String> {
    let mut parts: Vec<&[u8]> = vec![command.as_bytes()];
    for p in &digest_parts {
        parts.push(p);
    }
    let seed_bytes = cli.seed.to_le_bytes();
    parts.push(&seed_bytes);
    Ok(Report {
        command: command.to_string(),
        inputs_digest: digest(&parts),
        seed: cli.seed,
        tolerances: tolerances(cli),
        results: json!({ "error": message }),
        residual_table: vec![ResidualEntry {
            check: format!("computation failed: {message}"),
            value: 1.0,
            tol: 0.0,
            pass: false,
        }],
    })
}

fn restriction_pairing_residual(m: &Model, r: &qsuff::model::RestrictedModel) -> f64 {
    // Re tr X B must match Re tr X' (P* B P) for B supported on H_S
    let mut rng = qsuff::sampling::rng_from_seed(1);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let small = qsuff::sampling::random_complex_gaussian(r.model.dim, &mut rng);
        let embedded = &r.isometry * &small * r.isometry.adjoint();
        for (orig, comp) in m.elements.iter().zip(&r.model.elements) {
            let lhs = qsuff::matcore::hs_inner(&orig.op, &embedded).unwrap_or(f64::NAN);
            let rhs = qsuff::matcore::hs_inner(&comp.op, &small).unwrap_or(f64::NAN);
            worst = worst.max((lhs - rhs).abs());
        }
    }
    worst
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run_command(&cli) {
        Ok(report) => {
            let rendered = match cli.format {
                Format::Json => report.to_json_string(),
                Format::Text => report.to_text(),
            };
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, &rendered) {
                    eprintln!("cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                print!("{rendered}");
            }
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
