//! Block-structure identification of real *-subalgebras and real Jordan
//! algebras (complex, real, quaternionic, and spin-factor blocks with
//! multiplicities), Koashi–Imoto type decompositions, the Jordan
//! dimension formula, POVM support-size bounds, and the classical Fisher
//! information matrix.

use std::ops::Range;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{self, RealSubspace, Scalars};
use crate::matcore::{self, cr, eye, hs_inner, zeros, CMat};
use crate::model::Model;
use crate::sampling::{direct_sum, inflate};
use crate::sufficiency::SufficiencyCertificate;
use crate::{Error, Result};

/// Residual tolerance for structure identification and block matching.
pub const STRUCT_TOL: f64 = 1e-7;
/// POVM outcomes with smaller probability are dropped from Fisher sums.
pub const FISHER_FLOOR: f64 = 1e-12;

/// Identification mode: full *-algebra blocks or Hermitian Jordan blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Star,
    Jordan,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BlockKind {
    C,
    R,
    H,
    Gamma,
}

/// One canonical block: `M_n(K) ⊗ I_m` (or its Hermitian part), or a spin
/// factor `Γ_n ⊗ I_m`. For complex blocks, `conj` of the `m` multiplicity
/// slots carry the conjugate copy `Ā` instead of `A`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BlockDescriptor {
    pub kind: BlockKind,
    pub n: usize,
    pub m: usize,
    #[serde(default)]
    pub conj: usize,
}

impl BlockDescriptor {
    pub fn new(kind: BlockKind, n: usize, m: usize) -> BlockDescriptor {
        BlockDescriptor { kind, n, m, conj: 0 }
    }

    /// Hilbert space dimension occupied by the block.
    pub fn space_dim(&self) -> usize {
        match self.kind {
            BlockKind::C | BlockKind::R => self.n * self.m,
            BlockKind::H => 2 * self.n * self.m,
            BlockKind::Gamma => (1usize << (self.n / 2)) * self.m,
        }
    }

    /// Real dimension of the block algebra in the given mode.
    pub fn real_dim(&self, mode: Mode) -> usize {
        let n = self.n;
        match (self.kind, mode) {
            (BlockKind::C, Mode::Star) => 2 * n * n,
            (BlockKind::C, Mode::Jordan) => n * n,
            (BlockKind::R, Mode::Star) => n * n,
            (BlockKind::R, Mode::Jordan) => n * (n + 1) / 2,
            (BlockKind::H, Mode::Star) => 4 * n * n,
            (BlockKind::H, Mode::Jordan) => 2 * n * n - n,
            (BlockKind::Gamma, _) => n + 1,
        }
    }
}

/// `dim A_J = Σ n_i² + Σ n_j(n_j+1)/2 + Σ (2n_k² − n_k) + Σ (n_l + 1)`.
pub fn jordan_dim(blocks: &[BlockDescriptor]) -> usize {
    blocks.iter().map(|b| b.real_dim(Mode::Jordan)).sum()
}

/// Estimation setting for the POVM support-size bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Setting {
    Local,
    Bayesian,
}

/// Sufficient POVM support size: `dim A_J + d(d+1)/2 − 1` for local
/// estimation with `d` parameters, `dim A_J` for Bayesian estimation.
pub fn support_size_bound(blocks: &[BlockDescriptor], d: usize, setting: Setting) -> usize {
    let dim = jordan_dim(blocks);
    match setting {
        Setting::Local => {
            assert!(d >= 1, "local setting needs at least one parameter");
            dim + d * (d + 1) / 2 - 1
        }
        Setting::Bayesian => dim,
    }
}

/// Classical Fisher information matrix of a POVM at the given state:
/// `J_ij = Σ_x (tr ∂_iρ M_x)(tr ∂_jρ M_x) / tr ρ M_x`, outcomes with
/// probability below `FISHER_FLOOR` dropped.
pub fn classical_fisher(rho: &CMat, derivs: &[CMat], povm: &[CMat]) -> Result<DMatrix<f64>> {
    let dim = rho.nrows();
    let mut sum = zeros(dim);
    for m in povm {
        matcore::ensure_psd(m)?;
        sum += m;
    }
    let resolution_defect = (&sum - eye(dim)).norm();
    if resolution_defect > 1e-8 * (dim as f64) {
        return Err(Error::PovmNotResolution(resolution_defect));
    }
    let d = derivs.len();
    let mut j = DMatrix::zeros(d, d);
    for m in povm {
        let p = hs_inner(rho, m)?;
        if p <= FISHER_FLOOR {
            continue;
        }
        let scores: Vec<f64> = derivs
            .iter()
            .map(|dx| hs_inner(dx, m))
            .collect::<Result<_>>()?;
        for a in 0..d {
            for b in 0..d {
                j[(a, b)] += scores[a] * scores[b] / p;
            }
        }
    }
    Ok(j)
}

/// SLD Fisher information matrix `Re tr ρ L_i L_j` of a local model.
pub fn sld_fisher(rho: &CMat, derivs: &[CMat]) -> Result<DMatrix<f64>> {
    let slds: Vec<CMat> = derivs
        .iter()
        .map(|x| crate::model::sld(x, rho))
        .collect::<Result<_>>()?;
    let d = slds.len();
    let mut out = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            out[(i, j)] = hs_inner(&(rho * &slds[i]), &slds[j])?;
        }
    }
    // symmetrize away the antisymmetric imaginary part
    Ok((&out + out.transpose()).scale(0.5))
}

// ---------------------------------------------------------------------
// Canonical block algebras
// ---------------------------------------------------------------------

/// Basis (not orthonormal) of one canonical block in the given mode, on
/// its own block space.
pub fn canonical_block_basis(desc: &BlockDescriptor, mode: Mode) -> Vec<CMat> {
    let n = desc.n;
    let mut cores: Vec<CMat> = Vec::new();
    match (desc.kind, mode) {
        (BlockKind::C, Mode::Star) => {
            for b in matcore::std_basis(n) {
                cores.push(b);
            }
        }
        (BlockKind::C, Mode::Jordan) => {
            cores.extend(matcore::herm_basis(n));
        }
        (BlockKind::R, Mode::Star) => {
            for k in 0..n {
                for l in 0..n {
                    let mut e = zeros(n);
                    e[(k, l)] = cr(1.0);
                    cores.push(e);
                }
            }
        }
        (BlockKind::R, Mode::Jordan) => {
            for k in 0..n {
                for l in k..n {
                    let mut e = zeros(n);
                    e[(k, l)] = cr(1.0);
                    e[(l, k)] = cr(1.0);
                    cores.push(e);
                }
            }
        }
        (BlockKind::H, Mode::Star) => {
            let units: [[f64; 4]; 4] = [
                [1.0, 0.0, 0.0, 0.0],
                [0.0, 1.0, 0.0, 0.0],
                [0.0, 0.0, 1.0, 0.0],
                [0.0, 0.0, 0.0, 1.0],
            ];
            for k in 0..n {
                for l in 0..n {
                    for u in units {
                        let mut q = vec![[0.0f64; 4]; n * n];
                        q[k * n + l] = u;
                        cores.push(matcore::quaternion_embed(n, &q));
                    }
                }
            }
        }
        (BlockKind::H, Mode::Jordan) => {
            // real diagonal plus conjugate quaternion pairs off-diagonal
            for k in 0..n {
                let mut q = vec![[0.0f64; 4]; n * n];
                q[k * n + k] = [1.0, 0.0, 0.0, 0.0];
                cores.push(matcore::quaternion_embed(n, &q));
            }
            for k in 0..n {
                for l in (k + 1)..n {
                    for t in 0..4 {
                        let mut unit = [0.0f64; 4];
                        unit[t] = 1.0;
                        let mut conj = unit;
                        for s in 1..4 {
                            conj[s] = -conj[s];
                        }
                        let mut q = vec![[0.0f64; 4]; n * n];
                        q[k * n + l] = unit;
                        q[l * n + k] = conj;
                        cores.push(matcore::quaternion_embed(n, &q));
                    }
                }
            }
        }
        (BlockKind::Gamma, _) => {
            let sf = matcore::spin_factor(n);
            cores.push(eye(sf.gammas[0].nrows()));
            cores.extend(sf.gammas);
        }
    }
    cores.iter().map(|core| inflate(desc, core)).collect()
}

/// Canonical direct-sum algebra for a block list, as a subspace of the
/// full space `⊕ block spaces`.
pub fn canonical_algebra(blocks: &[BlockDescriptor], mode: Mode) -> RealSubspace {
    let total: usize = blocks.iter().map(|b| b.space_dim()).sum();
    let mut ops = Vec::new();
    let mut offset = 0usize;
    for desc in blocks {
        let bd = desc.space_dim();
        for core in canonical_block_basis(desc, mode) {
            let mut big = zeros(total);
            for i in 0..bd {
                for j in 0..bd {
                    big[(offset + i, offset + j)] = core[(i, j)];
                }
            }
            ops.push(big);
        }
        offset += bd;
    }
    // the identity of the whole space
    ops.push(eye(total));
    RealSubspace::span(total, &ops)
}

/// Result of block-structure identification: `U* V U` equals the
/// canonical direct sum described by `blocks`, laid out over `ranges`.
#[derive(Clone, Debug)]
pub struct StructureDecomposition {
    pub blocks: Vec<BlockDescriptor>,
    pub u: CMat,
    pub ranges: Vec<Range<usize>>,
}

/// Koashi–Imoto type decomposition: every model element is
/// `U (⊕_b X_b ⊗ P_b) U*` with block factors `X_b` depending on the
/// element and fixed strictly positive diagonal weights `P_b`.
#[derive(Clone, Debug)]
pub struct KIDecomposition {
    pub structure: StructureDecomposition,
    /// Per block, the diagonal of the positive weight matrix (length m).
    pub p_blocks: Vec<Vec<f64>>,
    /// Per element (model order), per block, the n-side Hermitian factor.
    pub x_blocks: Vec<Vec<CMat>>,
}

impl KIDecomposition {
    /// Rebuilds element `idx` from its block factors.
    pub fn reassemble(&self, idx: usize) -> CMat {
        let total = self.structure.u.nrows();
        let mut out = zeros(total);
        for (b, desc) in self.structure.blocks.iter().enumerate() {
            let core = &self.x_blocks[idx][b];
            let scaled = inflate_weighted(desc, core, &self.p_blocks[b]);
            let r = &self.structure.ranges[b];
            for (i, gi) in r.clone().enumerate() {
                for (j, gj) in r.clone().enumerate() {
                    out[(gi, gj)] = scaled[(i, j)];
                }
            }
        }
        &self.structure.u * out * self.structure.u.adjoint()
    }
}

/// `X_b ⊗ diag(p)`, honoring the conjugate-pair layout of C blocks.
pub fn inflate_weighted(desc: &BlockDescriptor, core: &CMat, p: &[f64]) -> CMat {
    assert_eq!(p.len(), desc.m);
    match desc.kind {
        BlockKind::C if desc.conj > 0 => {
            let plain = desc.m - desc.conj;
            let pa = CMat::from_fn(plain, plain, |i, j| {
                if i == j {
                    cr(p[i])
                } else {
                    cr(0.0)
                }
            });
            let pb = CMat::from_fn(desc.conj, desc.conj, |i, j| {
                if i == j {
                    cr(p[plain + i])
                } else {
                    cr(0.0)
                }
            });
            let a = core.kronecker(&pa);
            let b = core.map(|z| z.conj()).kronecker(&pb);
            direct_sum(&a, &b)
        }
        _ => {
            let pm = CMat::from_fn(desc.m, desc.m, |i, j| {
                if i == j {
                    cr(p[i])
                } else {
                    cr(0.0)
                }
            });
            core.kronecker(&pm)
        }
    }
}

mod identify;
pub use identify::identify_structure;

mod ki;
pub use ki::{fit_block_weights, ki_decompose};
