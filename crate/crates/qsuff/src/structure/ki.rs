//! Koashi–Imoto type decomposition: in the canonical frame of the target
//! algebra the supporting operator becomes `⊕ I_n ⊗ C_b`; diagonalizing
//! each `C_b` fixes the positive weights `P_b`, and `X ω^{-1}` supplies
//! the per-element block factors.


use super::*;
use crate::matcore::{geninv, herm_eig, hermitize};

/// Extracts the multiplicity-side factor `C` from a block of the form
/// `I_n ⊗ C`, and the residual of that form.
fn extract_mult_factor(block: &CMat, n: usize, m: usize) -> (CMat, f64) {
    let mut c_acc = zeros(m);
    for i in 0..n {
        for mu in 0..m {
            for nu in 0..m {
                c_acc[(mu, nu)] += block[(i * m + mu, i * m + nu)];
            }
        }
    }
    c_acc = c_acc.scale(1.0 / n as f64);
    let recon = eye(n).kronecker(&c_acc);
    let residual = (block - recon).norm() / (1.0 + block.norm());
    (c_acc, residual)
}

/// Extracts the n-side factor `X` from a block of the form `X ⊗ I_m`.
fn extract_core_factor(block: &CMat, n: usize, m: usize) -> (CMat, f64) {
    let mut x_acc = zeros(n);
    for i in 0..n {
        for j in 0..n {
            for mu in 0..m {
                x_acc[(i, j)] += block[(i * m + mu, j * m + mu)];
            }
        }
    }
    x_acc = x_acc.scale(1.0 / m as f64);
    let recon = x_acc.kronecker(&eye(m));
    let residual = (block - recon).norm() / (1.0 + block.norm());
    (x_acc, residual)
}

fn slice_block(a: &CMat, r: &std::ops::Range<usize>) -> CMat {
    CMat::from_fn(r.len(), r.len(), |i, j| a[(r.start + i, r.start + j)])
}

/// Core side length of one block in the canonical layout.
fn core_len(desc: &BlockDescriptor) -> usize {
    match desc.kind {
        BlockKind::C | BlockKind::R => desc.n,
        BlockKind::H => 2 * desc.n,
        BlockKind::Gamma => 1usize << (desc.n / 2),
    }
}

/// Diagonalizes the multiplicity factor of one block and returns the
/// rotation (descending eigenvalues, deterministic tie-break) plus the
/// strictly positive weights.
fn weight_rotation(c_mat: &CMat) -> Result<(CMat, Vec<f64>)> {
    let eig = herm_eig(&hermitize(c_mat))?;
    let p: Vec<f64> = eig.values.clone();
    if p.iter().any(|&x| x <= 0.0) {
        return Err(Error::Classification(
            "multiplicity weight is not strictly positive".into(),
        ));
    }
    Ok((eig.vectors, p))
}

/// Koashi–Imoto decomposition of a model against the certificate of a
/// sufficient map. `target` picks the real *-algebra or the Jordan
/// algebra from the certificate.
pub fn ki_decompose(
    m: &Model,
    cert: &SufficiencyCertificate,
    target: Mode,
    seed: u64,
) -> Result<KIDecomposition> {
    let algebra = match target {
        Mode::Star => &cert.a_r,
        Mode::Jordan => &cert.a_j,
    };
    let sd = identify_structure(algebra, target, seed)?;
    let d = m.dim;
    let omega_f = sd.u.adjoint() * &cert.omega * &sd.u;

    // per block: check I⊗C form, diagonalize C, fold the rotation into U
    let mut u = sd.u.clone();
    let mut p_blocks: Vec<Vec<f64>> = Vec::new();
    for (b, desc) in sd.blocks.iter().enumerate() {
        let r = &sd.ranges[b];
        let blk = slice_block(&omega_f, r);
        let nn = core_len(desc);
        let mut rot = zeros(r.len());
        let mut weights: Vec<f64> = Vec::new();
        if desc.kind == BlockKind::C && desc.conj > 0 {
            let plain = desc.m - desc.conj;
            let parts = [(0usize, plain), (desc.n * plain, desc.conj)];
            for (offset, mult) in parts {
                if mult == 0 {
                    continue;
                }
                let sub = CMat::from_fn(desc.n * mult, desc.n * mult, |i, j| {
                    blk[(offset + i, offset + j)]
                });
                let (c_mat, resid) = extract_mult_factor(&sub, desc.n, mult);
                if resid > STRUCT_TOL * 10.0 {
                    return Err(Error::Classification(format!(
                        "omega block {b} is not of the form I⊗C (residual {resid:.3e})"
                    )));
                }
                let (q, mut p) = weight_rotation(&c_mat)?;
                let qbig = eye(desc.n).kronecker(&q);
                for i in 0..desc.n * mult {
                    for j in 0..desc.n * mult {
                        rot[(offset + i, offset + j)] = qbig[(i, j)];
                    }
                }
                weights.append(&mut p);
            }
        } else {
            let mm = desc.m;
            let (c_mat, resid) = extract_mult_factor(&blk, nn, mm);
            if resid > STRUCT_TOL * 10.0 {
                return Err(Error::Classification(format!(
                    "omega block {b} is not of the form I⊗C (residual {resid:.3e})"
                )));
            }
            let (q, mut p) = weight_rotation(&c_mat)?;
            rot = eye(nn).kronecker(&q);
            weights.append(&mut p);
        }
        // fold the multiplicity rotation into the global frame
        let mut big_rot = eye(d);
        for (i, gi) in r.clone().enumerate() {
            for (j, gj) in r.clone().enumerate() {
                big_rot[(gi, gj)] = rot[(i, j)];
            }
        }
        u = &u * big_rot;
        p_blocks.push(weights);
    }

    // per element: extract the core factors from X ω^{-1}
    let w_inv = geninv(&cert.omega)?;
    let mut x_blocks: Vec<Vec<CMat>> = Vec::new();
    for e in &m.elements {
        let x0 = &u.adjoint() * (&e.op * &w_inv) * &u;
        let mut cores = Vec::new();
        for (b, desc) in sd.blocks.iter().enumerate() {
            let r = &sd.ranges[b];
            let blk = slice_block(&x0, r);
            let core = if desc.kind == BlockKind::C && desc.conj > 0 {
                let plain = desc.m - desc.conj;
                let sub = CMat::from_fn(desc.n * plain, desc.n * plain, |i, j| blk[(i, j)]);
                let (x_plain, res1) = extract_core_factor(&sub, desc.n, plain);
                let off = desc.n * plain;
                let sub2 = CMat::from_fn(desc.n * desc.conj, desc.n * desc.conj, |i, j| {
                    blk[(off + i, off + j)]
                });
                let (x_conj, res2) = extract_core_factor(&sub2, desc.n, desc.conj);
                let pair_gap = (x_conj - x_plain.map(|z| z.conj())).norm();
                if res1.max(res2) > STRUCT_TOL * 10.0
                    || pair_gap > STRUCT_TOL * 10.0 * (1.0 + x_plain.norm())
                {
                    return Err(Error::Classification(format!(
                        "element {} does not factor over block {b}",
                        e.label
                    )));
                }
                x_plain
            } else {
                let (core, resid) = extract_core_factor(&blk, core_len(desc), desc.m);
                if resid > STRUCT_TOL * 10.0 {
                    return Err(Error::Classification(format!(
                        "element {} does not factor over block {b} (residual {resid:.3e})",
                        e.label
                    )));
                }
                core
            };
            cores.push(hermitize(&core));
        }
        x_blocks.push(cores);
    }

    let ki = KIDecomposition {
        structure: StructureDecomposition {
            blocks: sd.blocks,
            u,
            ranges: sd.ranges,
        },
        p_blocks,
        x_blocks,
    };
    // reassembly gate
    for (idx, e) in m.elements.iter().enumerate() {
        let recon = ki.reassemble(idx);
        let gap = (&recon - &e.op).norm() / (1.0 + e.op.norm());
        if gap > 1e-8 {
            return Err(Error::Classification(format!(
                "element {} reassembly residual {gap:.3e}",
                e.label
            )));
        }
    }
    Ok(ki)
}

/// Refits the multiplicity weights of every block from one element alone
/// (given its core factors); used to confirm the weights do not depend
/// on the element.
pub fn fit_block_weights(ki: &KIDecomposition, elem: &CMat, idx: usize) -> Result<Vec<Vec<f64>>> {
    let u = &ki.structure.u;
    let xf = u.adjoint() * elem * u;
    let mut out = Vec::new();
    for (b, desc) in ki.structure.blocks.iter().enumerate() {
        let r = &ki.structure.ranges[b];
        let blk = slice_block(&xf, r);
        let core = &ki.x_blocks[idx][b];
        let fit = |sub: &CMat, core: &CMat, mult: usize| -> Vec<f64> {
            let nn = core.nrows();
            let denom: f64 = core.iter().map(|z| z.norm_sqr()).sum();
            let mut p = vec![0.0f64; mult];
            for (mu, pv) in p.iter_mut().enumerate() {
                let mut acc = 0.0;
                for i in 0..nn {
                    for j in 0..nn {
                        acc += (core[(i, j)].conj() * sub[(i * mult + mu, j * mult + mu)]).re;
                    }
                }
                *pv = acc / denom;
            }
            p
        };
        if desc.kind == BlockKind::C && desc.conj > 0 {
            let plain = desc.m - desc.conj;
            let sub = CMat::from_fn(desc.n * plain, desc.n * plain, |i, j| blk[(i, j)]);
            let mut p = fit(&sub, core, plain);
            let off = desc.n * plain;
            let sub2 = CMat::from_fn(desc.n * desc.conj, desc.n * desc.conj, |i, j| {
                blk[(off + i, off + j)]
            });
            let core_c = core.map(|z| z.conj());
            p.extend(fit(&sub2, &core_c, desc.conj));
            out.push(p);
        } else {
            out.push(fit(&blk, core, desc.m));
        }
    }
    Ok(out)
}
