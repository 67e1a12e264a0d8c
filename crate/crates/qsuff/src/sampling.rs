//! Seeded random generators for matrices, unitaries, canonical block
//! structures, and whole models. Every generator takes an explicit RNG so
//! results are reproducible from a single master seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matcore::{self, c, cr, CMat};
use crate::model::{ElementKind, Model, ModelElement};
use crate::structure::{BlockDescriptor, BlockKind};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream for sub-task `k`, keeping trial results
/// independent of evaluation order.
pub fn derived_rng(master: u64, k: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(master);
    r.set_stream(k.wrapping_add(1));
    r
}

pub fn random_complex_gaussian(d: usize, rng: &mut impl Rng) -> CMat {
    CMat::from_fn(d, d, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn random_hermitian(d: usize, rng: &mut impl Rng) -> CMat {
    matcore::hermitize(&random_complex_gaussian(d, rng))
}

/// Strictly positive definite with spectrum bounded away from zero.
pub fn random_pd(d: usize, rng: &mut impl Rng) -> CMat {
    let g = random_complex_gaussian(d, rng);
    let a = &g * g.adjoint();
    a + matcore::eye(d).scale(0.1)
}

pub fn random_psd(d: usize, rng: &mut impl Rng) -> CMat {
    let g = random_complex_gaussian(d, rng);
    &g * g.adjoint()
}

pub fn random_rank_deficient_psd(d: usize, rank: usize, rng: &mut impl Rng) -> CMat {
    assert!(rank <= d);
    let mut acc = matcore::zeros(d);
    for _ in 0..rank {
        let v = nalgebra::DVector::from_fn(d, |_, _| {
            c(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        acc += CMat::from_fn(d, d, |i, j| v[i] * v[j].conj());
    }
    acc
}

/// Haar-random unitary via QR of a complex Ginibre matrix with the phase
/// convention diag(R) > 0.
pub fn haar_unitary(d: usize, rng: &mut impl Rng) -> CMat {
    let g = random_complex_gaussian(d, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..d {
        let z = r[(k, k)];
        let phase = if z.norm() > 0.0 { z / cr(z.norm()) } else { cr(1.0) };
        for i in 0..d {
            q[(i, k)] *= phase.conj();
        }
    }
    q
}

/// Random density matrix (PSD, trace one); `rank < d` gives a degenerate one.
pub fn random_state(d: usize, rank: usize, rng: &mut impl Rng) -> CMat {
    let a = if rank >= d {
        random_pd(d, rng)
    } else {
        random_rank_deficient_psd(d, rank, rng)
    };
    let tr: f64 = (0..d).map(|i| a[(i, i)].re).sum();
    a.scale(1.0 / tr)
}

/// Random model on dimension `d`: a reference state plus `n_state`
/// absolutely continuous elements and `n_deriv` local (derivative)
/// elements, constructed so the defining factorizations exist.
pub fn random_model(
    d: usize,
    rank: usize,
    n_state: usize,
    n_deriv: usize,
    rng: &mut impl Rng,
) -> Model {
    let rho = random_state(d, rank, rng);
    let mut elements = Vec::new();
    for k in 0..n_state {
        let r = random_psd(d, rng).scale(0.5);
        let x = &r * &rho * &r;
        elements.push(ModelElement {
            kind: ElementKind::State,
            label: format!("X{k}"),
            op: x,
        });
    }
    for k in 0..n_deriv {
        let l = random_hermitian(d, rng);
        let x = matcore::jordan(&rho, &l);
        elements.push(ModelElement {
            kind: ElementKind::Derivative,
            label: format!("D{k}"),
            op: x,
        });
    }
    Model::new(rho, elements).expect("construction is valid by design")
}

/// Random block structure with total space dimension exactly `d`,
/// drawn from the canonical descriptor set of the given mode. In Jordan
/// mode the collision classes are excluded (`H` needs `n ≥ 3` there
/// since `M_1(H)_h ≅ R` and `M_2(H)_h ≅ Γ_5`); Gamma blocks use
/// `n ∈ {4, 5}` (space 4 per copy) and exist only in Jordan mode.
pub fn random_block_structure(
    d: usize,
    mode: crate::structure::Mode,
    rng: &mut impl Rng,
) -> Vec<BlockDescriptor> {
    let jordan = mode == crate::structure::Mode::Jordan;
    loop {
        let mut blocks: Vec<BlockDescriptor> = Vec::new();
        let mut rem = d;
        let mut give_up = false;
        while rem > 0 {
            let h_min_space = if jordan { 6 } else { 2 };
            let desc = match rng.gen_range(0..4) {
                2 if rem >= h_min_space => {
                    let n = if jordan {
                        3
                    } else {
                        rng.gen_range(1..=(rem / 2).min(2))
                    };
                    let m = rng.gen_range(1..=(rem / (2 * n)).min(2));
                    BlockDescriptor { kind: BlockKind::H, n, m, conj: 0 }
                }
                3 if jordan && rem >= 4 => {
                    let n = rng.gen_range(4..=5);
                    let m = rng.gen_range(1..=(rem / 4).min(2));
                    BlockDescriptor { kind: BlockKind::Gamma, n, m, conj: 0 }
                }
                k => {
                    let kind = if k == 0 { BlockKind::C } else { BlockKind::R };
                    let n = rng.gen_range(1..=rem.min(3));
                    let m = rng.gen_range(1..=(rem / n).min(2));
                    BlockDescriptor { kind, n, m, conj: 0 }
                }
            };
            if desc.space_dim() > rem {
                give_up = true;
                break;
            }
            rem -= desc.space_dim();
            blocks.push(desc);
        }
        if give_up || blocks.is_empty() {
            continue;
        }
        // jordan-mode canonical exclusions beyond H: C_1 and H_1 reduce
        // to R_1, and Gamma never collides at n >= 4
        let ok = blocks.iter().all(|b| match (jordan, b.kind) {
            (true, BlockKind::C) => b.n >= 2,
            (true, BlockKind::H) => b.n >= 3,
            _ => true,
        });
        if ok {
            blocks.sort();
            return blocks;
        }
    }
}

/// Random Hermitian element of the canonical block algebra of `desc`
/// (jordan mode: the Hermitian part; kinds R/H draw from the real form).
pub fn random_block_hermitian(desc: &BlockDescriptor, rng: &mut impl Rng) -> CMat {
    let n = desc.n;
    let core = match desc.kind {
        BlockKind::C => random_hermitian(n, rng),
        BlockKind::R => {
            let g = CMat::from_fn(n, n, |_, _| cr(rng.sample(StandardNormal)));
            (g.clone() + g.transpose()).scale(0.5)
        }
        BlockKind::H => {
            // quaternion-Hermitian: real diagonal, conjugate off-diagonal pairs
            let mut q = vec![[0.0f64; 4]; n * n];
            for i in 0..n {
                q[i * n + i] = [rng.sample(StandardNormal), 0.0, 0.0, 0.0];
                for j in (i + 1)..n {
                    let e: [f64; 4] = [
                        rng.sample(StandardNormal),
                        rng.sample(StandardNormal),
                        rng.sample(StandardNormal),
                        rng.sample(StandardNormal),
                    ];
                    q[i * n + j] = e;
                    q[j * n + i] = [e[0], -e[1], -e[2], -e[3]];
                }
            }
            matcore::quaternion_embed(n, &q)
        }
        BlockKind::Gamma => {
            let sf = matcore::spin_factor(n);
            let dim = sf.gammas[0].nrows();
            let mut acc = matcore::eye(dim).scale(rng.sample::<f64, _>(StandardNormal));
            for g in &sf.gammas {
                acc += g.scale(rng.sample::<f64, _>(StandardNormal));
            }
            acc
        }
    };
    inflate(desc, &core)
}

/// Sends an n-side factor to the canonical block space, honoring the
/// conjugate-pair layout for C blocks with `conj > 0`.
pub fn inflate(desc: &BlockDescriptor, core: &CMat) -> CMat {
    match desc.kind {
        BlockKind::C if desc.conj > 0 => {
            let p = desc.m - desc.conj;
            let a = core.kronecker(&matcore::eye(p));
            let b = core.map(|z| z.conj()).kronecker(&matcore::eye(desc.conj));
            direct_sum(&a, &b)
        }
        _ => core.kronecker(&matcore::eye(desc.m)),
    }
}

/// Strictly positive definite Hermitian element of one canonical block
/// kind (on the core side).
pub fn random_block_pd(desc: &BlockDescriptor, rng: &mut impl Rng) -> CMat {
    match desc.kind {
        BlockKind::Gamma => {
            let sf = matcore::spin_factor(desc.n);
            let dim = sf.gammas[0].nrows();
            let dir: Vec<f64> = (0..desc.n).map(|_| rng.sample(StandardNormal)).collect();
            let norm: f64 = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
            let mut acc = matcore::eye(dim).scale(norm + 0.2 + rng.gen_range(0.0..1.0));
            for (g, &x) in sf.gammas.iter().zip(&dir) {
                acc += g.scale(x);
            }
            acc
        }
        _ => {
            // square a generic Hermitian of the right kind and shift
            let h = {
                let desc1 = BlockDescriptor { m: 1, conj: 0, ..*desc };
                let core = random_block_hermitian(&desc1, rng);
                let dim = core.nrows();
                let sq = &core * &core;
                sq + matcore::eye(dim).scale(0.2)
            };
            h
        }
    }
}

/// Model of the planted form `X = U (⊕_b X_b ⊗ P_b) U*`: a strictly
/// positive reference of the same shape plus `n_derivs` derivative-kind
/// elements. Returns the model (unrestricted) and the scrambling unitary.
pub fn random_ki_model(
    blocks: &[BlockDescriptor],
    n_derivs: usize,
    rng: &mut impl Rng,
) -> (Model, CMat) {
    let total: usize = blocks.iter().map(|b| b.space_dim()).sum();
    let u = haar_unitary(total, rng);
    let weights: Vec<Vec<f64>> = blocks
        .iter()
        .map(|b| (0..b.m).map(|_| 0.2 + rng.gen_range(0.0..1.5)).collect())
        .collect();
    let assemble = |cores: &[CMat], rng_weights: &[Vec<f64>]| -> CMat {
        let mut out = matcore::zeros(total);
        let mut offset = 0usize;
        for ((core, w), desc) in cores.iter().zip(rng_weights).zip(blocks) {
            let big = crate::structure::inflate_weighted(desc, core, w);
            let bd = big.nrows();
            for i in 0..bd {
                for j in 0..bd {
                    out[(offset + i, offset + j)] = big[(i, j)];
                }
            }
            offset += bd;
        }
        &u * out * u.adjoint()
    };
    let rho_cores: Vec<CMat> = blocks.iter().map(|b| random_block_pd(b, rng)).collect();
    let rho_raw = assemble(&rho_cores, &weights);
    let tr: f64 = (0..total).map(|i| rho_raw[(i, i)].re).sum();
    let rho = rho_raw.scale(1.0 / tr);
    let mut elements = Vec::new();
    for k in 0..n_derivs {
        let cores: Vec<CMat> = blocks.iter().map(|b| random_block_hermitian_core(b, rng)).collect();
        elements.push(ModelElement {
            kind: ElementKind::Derivative,
            label: format!("D{k}"),
            op: assemble(&cores, &weights),
        });
    }
    let model = Model::new(rho, elements).expect("planted model is valid");
    (model, u)
}

/// Core-side random Hermitian for one block (no multiplicity inflation).
pub fn random_block_hermitian_core(desc: &BlockDescriptor, rng: &mut impl Rng) -> CMat {
    let desc1 = BlockDescriptor { m: 1, conj: 0, ..*desc };
    random_block_hermitian(&desc1, rng)
}

pub fn direct_sum(a: &CMat, b: &CMat) -> CMat {
    let (da, db) = (a.nrows(), b.nrows());
    let mut out = matcore::zeros(da + db);
    for i in 0..da {
        for j in 0..da {
            out[(i, j)] = a[(i, j)];
        }
    }
    for i in 0..db {
        for j in 0..db {
            out[(da + i, da + j)] = b[(i, j)];
        }
    }
    out
}
