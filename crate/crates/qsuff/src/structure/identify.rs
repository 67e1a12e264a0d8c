//! Identification of the canonical block structure of a real
//! *-subalgebra or real Jordan algebra: splitting into simple ideals by
//! central projections, classification of each ideal by its invariants,
//! and construction of the basis-change unitary via matrix units.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::*;
use crate::matcore::{hs_inner, min_eig, sqrt_psd};
use crate::sampling::rng_from_seed;

/// Gap threshold for clustering eigenvalues of generic elements.
const CLUSTER_GAP: f64 = 1e-6;

fn random_combo(basis: &[CMat], rng: &mut impl Rng) -> CMat {
    let d = basis[0].nrows();
    let mut acc = zeros(d);
    for b in basis {
        acc += b.scale(rng.sample::<f64, _>(rand_distr::StandardNormal));
    }
    acc
}

fn random_hermitian_member(v: &RealSubspace, rng: &mut impl Rng) -> Result<CMat> {
    let herm = v.hermitian_part();
    if herm.dim() == 0 {
        return Err(Error::Classification(
            "subspace has no Hermitian elements".into(),
        ));
    }
    Ok(matcore::hermitize(&random_combo(herm.basis(), rng)))
}

/// Eigenvalue clusters of a descending spectrum, split at relative gaps.
fn cluster(values: &[f64]) -> Vec<std::ops::Range<usize>> {
    let scale = 1.0 + values.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..values.len() {
        if (values[i - 1] - values[i]).abs() > CLUSTER_GAP * scale {
            out.push(start..i);
            start = i;
        }
    }
    out.push(start..values.len());
    out
}

/// Central Hermitian elements of the subspace (commuting with every
/// basis element), solved in subspace coordinates.
fn central_hermitian(v: &RealSubspace) -> Result<Vec<CMat>> {
    let k = v.dim();
    let d = v.dim_ambient;
    let n = matcore::vec_dim(d);
    let mut gram = DMatrix::<f64>::zeros(k, k);
    // commutator constraints against every basis element
    for b in v.basis() {
        let mut cols = DMatrix::<f64>::zeros(n, k);
        for (i, z) in v.basis().iter().enumerate() {
            cols.set_column(i, &matcore::vectorize(&matcore::commutator(z, b)));
        }
        gram += cols.transpose() * &cols;
    }
    // hermiticity constraints
    let mut cols = DMatrix::<f64>::zeros(n, k);
    for (i, z) in v.basis().iter().enumerate() {
        cols.set_column(i, &matcore::vectorize(&(z - z.adjoint())));
    }
    gram += cols.transpose() * &cols;

    let (vals, vecs) = matcore::sym_eig_real(&gram);
    let lmax = vals.last().copied().unwrap_or(0.0);
    let mut out = Vec::new();
    for (j, &lam) in vals.iter().enumerate() {
        if lam <= 1e-12 * lmax.max(1.0) {
            let mut acc = zeros(d);
            for (i, b) in v.basis().iter().enumerate() {
                acc += b.scale(vecs[(i, j)]);
            }
            out.push(matcore::hermitize(&acc));
        }
    }
    if out.is_empty() {
        return Err(Error::Classification("empty center".into()));
    }
    Ok(out)
}

/// Splits the algebra into simple ideals: returns per ideal the isometry
/// onto its block space and the compressed subspace.
fn split_ideals(
    v: &RealSubspace,
    rng: &mut impl Rng,
) -> Result<Vec<(CMat, RealSubspace)>> {
    let d = v.dim_ambient;
    let center = central_hermitian(v)?;
    for _attempt in 0..8 {
        let zeta = matcore::hermitize(&random_combo(&center, rng));
        let eig = matcore::herm_eig(&zeta)?;
        let clusters = cluster(&eig.values);
        if clusters.len() != center.len() {
            continue;
        }
        let mut out = Vec::new();
        let mut ok = true;
        for cl in &clusters {
            let mut q = DMatrix::zeros(d, cl.len());
            for (t, idx) in cl.clone().enumerate() {
                q.set_column(t, &eig.vectors.column(idx));
            }
            // the central projection must belong to the algebra
            let proj = &q * q.adjoint();
            if !v.member(&proj).contained {
                ok = false;
                break;
            }
            let compressed: Vec<CMat> = v.basis().iter().map(|b| q.adjoint() * b * &q).collect();
            out.push((q, RealSubspace::span(cl.len(), &compressed)));
        }
        if ok {
            return Ok(out);
        }
    }
    Err(Error::Classification(
        "could not split into simple ideals (central projections unstable)".into(),
    ))
}

/// Spectral projections of a generic Hermitian member with the expected
/// cluster structure: `n` clusters of equal rank.
fn generic_projections(
    v: &RealSubspace,
    rng: &mut impl Rng,
) -> Result<(Vec<CMat>, usize)> {
    let h = random_hermitian_member(v, rng)?;
    let eig = matcore::herm_eig(&h)?;
    let clusters = cluster(&eig.values);
    let rank = clusters[0].len();
    if clusters.iter().any(|c| c.len() != rank) {
        return Err(Error::Classification("uneven generic clusters".into()));
    }
    let d = v.dim_ambient;
    let mut projections = Vec::new();
    for cl in &clusters {
        let mut p = zeros(d);
        for idx in cl.clone() {
            let u = eig.vectors.column(idx);
            p += CMat::from_fn(d, d, |a, b| u[a] * u[b].conj());
        }
        if !v.member(&p).contained {
            return Err(Error::Classification(
                "generic spectral projection escapes the algebra".into(),
            ));
        }
        projections.push(p);
    }
    Ok((projections, rank))
}

/// Matrix-unit partial isometries `E_{1j}` connecting the minimal
/// projections of a simple algebra, built from the polar parts of
/// `P_1 b P_j` for a generic `b`.
fn unit_row(
    v: &RealSubspace,
    projections: &[CMat],
    rng: &mut impl Rng,
) -> Result<Vec<CMat>> {
    let n = projections.len();
    let b = random_combo(v.basis(), rng);
    let mut row = vec![projections[0].clone()];
    for j in 1..n {
        let w = &projections[0] * &b * &projections[j];
        let wsq = matcore::hermitize(&(w.adjoint() * &w));
        let wabs = sqrt_psd(&wsq)?;
        let e1j = &w * matcore::geninv(&wabs)?;
        // must be a full partial isometry between the two ranges
        if ((&e1j * e1j.adjoint()) - &projections[0]).norm() > 1e-7 * (1.0 + projections[0].norm())
        {
            return Err(Error::Classification("degenerate matrix-unit polar".into()));
        }
        row.push(e1j);
    }
    Ok(row)
}

/// Orthonormal column basis of the range of a projection.
fn range_basis(p: &CMat, rank: usize) -> Result<CMat> {
    let eig = matcore::herm_eig(p)?;
    let d = p.nrows();
    let mut q = DMatrix::zeros(d, rank);
    for k in 0..rank {
        if eig.values[k] < 0.5 {
            return Err(Error::Classification("projection rank deficit".into()));
        }
        q.set_column(k, &eig.vectors.column(k));
    }
    Ok(q)
}

/// Frame for C- and R-type simple algebras: columns `E_{j1} u_μ` ordered
/// `(j, μ)` with the multiplicity index fastest.
fn unit_frame(row: &[CMat], p1: &CMat, rank: usize) -> Result<CMat> {
    let d = p1.nrows();
    let n = row.len();
    let u = range_basis(p1, rank)?;
    let mut frame = DMatrix::zeros(d, n * rank);
    for (j, e1j) in row.iter().enumerate() {
        let ej1 = e1j.adjoint();
        for mu in 0..rank {
            let col = &ej1 * u.column(mu);
            frame.set_column(j * rank + mu, &col);
        }
    }
    Ok(frame)
}

fn check_unitary(u: &CMat) -> Result<()> {
    let d = u.nrows();
    if u.ncols() != d {
        return Err(Error::Classification("frame is not square".into()));
    }
    let defect = (u.adjoint() * u - eye(d)).norm();
    if defect > 1e-7 * (d as f64) {
        return Err(Error::Classification(format!(
            "frame is not unitary (defect {defect:.3e})"
        )));
    }
    Ok(())
}

/// Quaternion-type frame: matrix units give the coarse `n×n` grid; the
/// corner algebra `P_1 V P_1 ≅ H` supplies the 2x2 spin frame inside
/// each cell.
fn quaternionic_frame(
    v: &RealSubspace,
    projections: &[CMat],
    rank2m: usize,
    rng: &mut impl Rng,
) -> Result<CMat> {
    let d = v.dim_ambient;
    let m = rank2m / 2;
    let row = unit_row(v, projections, rng)?;
    let p1 = &projections[0];
    // corner algebra: span of P1 b P1
    let corner_ops: Vec<CMat> = v.basis().iter().map(|b| p1 * b * p1).collect();
    let corner = RealSubspace::span(d, &corner_ops);
    if corner.dim() != 4 {
        return Err(Error::Classification(format!(
            "quaternionic corner has dimension {}, expected 4",
            corner.dim()
        )));
    }
    // anti-Hermitian part of the corner: imaginary quaternion units
    let mut anti: Vec<CMat> = Vec::new();
    for b in corner.basis() {
        let a = (b - b.adjoint()).scale(0.5);
        if a.norm() > 1e-8 {
            anti.push(a);
        }
    }
    let anti_span = RealSubspace::span(d, &anti);
    if anti_span.dim() != 3 {
        return Err(Error::Classification(
            "quaternionic corner lacks three imaginary units".into(),
        ));
    }
    // Gram–Schmidt under B(a,b) = -Re tr(ab)/(2m), which normalizes the
    // anticommutation relations X_a X_b + X_b X_a = -2 δ_ab P_1
    let bq = |a: &CMat, b: &CMat| -> f64 {
        // -Re tr(a b) / (2m)
        let prod = a * b;
        let tr: f64 = (0..prod.nrows()).map(|i| prod[(i, i)].re).sum();
        -tr / (2.0 * m as f64)
    };
    let mut x: Vec<CMat> = Vec::new();
    for cand in anti_span.basis() {
        let mut w = cand.clone();
        for prev in &x {
            let coeff = bq(prev, &w);
            w -= prev.scale(coeff);
        }
        let nrm = bq(&w, &w);
        if nrm > 1e-10 {
            x.push(w.scale(1.0 / nrm.sqrt()));
        }
    }
    if x.len() != 3 {
        return Err(Error::Classification(
            "quaternionic units failed to orthonormalize".into(),
        ));
    }
    // fix the orientation: k = ij
    let x3 = &x[0] * &x[1];
    let x1 = x[0].clone();
    // the +i eigenspace of X_3 on range(P_1)
    let minus_i_x3 = x3.map(|z| z * matcore::c(0.0, -1.0));
    let herm_part = matcore::hermitize(&(&minus_i_x3 + p1 - eye(d)));
    // restrict to the corner range: eigenvectors with eigenvalue ~ +1
    let eig = matcore::herm_eig(&(herm_part + p1))?;
    // on range(P1): -iX_3 has eigenvalues ±1, so (-iX_3 + P1 - I + P1)
    // has eigenvalue 1 on the +1 corner space, -1 on the -1 corner
    // space, and -... off the corner; select the +1 cluster
    let mut vplus: Vec<DVector<num_complex::Complex64>> = Vec::new();
    for (k, &lam) in eig.values.iter().enumerate() {
        if (lam - 2.0).abs() < 1e-6 {
            vplus.push(eig.vectors.column(k).clone_owned());
        }
    }
    if vplus.len() != m {
        return Err(Error::Classification(format!(
            "spin eigenspace has dimension {}, expected {m}",
            vplus.len()
        )));
    }
    let n = projections.len();
    let mut frame = DMatrix::zeros(d, d);
    for (j, e1j) in row.iter().enumerate() {
        let ej1 = e1j.adjoint();
        for (mu, vp) in vplus.iter().enumerate() {
            let top = &ej1 * vp;
            let bot = &ej1 * (x1.map(|z| z * matcore::c(0.0, -1.0)) * vp);
            frame.set_column((2 * j) * m + mu, &top);
            frame.set_column((2 * j + 1) * m + mu, &bot);
        }
    }
    let _ = n;
    Ok(frame)
}

/// Classification and frame for one simple ideal in star mode.
fn classify_star_ideal(
    vb: &RealSubspace,
    rng: &mut impl Rng,
) -> Result<(BlockDescriptor, CMat)> {
    let dd = vb.dim_ambient;
    let dim_v = vb.dim();
    if vb.flags.complex_closed {
        // plain complex block
        let n2 = dim_v / 2;
        let n = (n2 as f64).sqrt().round() as usize;
        if 2 * n * n != dim_v || dd % n != 0 {
            return Err(Error::Classification(format!(
                "complex ideal dimensions inconsistent: dim {dim_v} on space {dd}"
            )));
        }
        let m = dd / n;
        let (projections, rank) = generic_projections(vb, rng)?;
        if projections.len() != n || rank != m {
            return Err(Error::Classification("complex cluster mismatch".into()));
        }
        let row = unit_row(vb, &projections, rng)?;
        let frame = unit_frame(&row, &projections[0], m)?;
        check_unitary(&frame)?;
        return Ok((BlockDescriptor::new(BlockKind::C, n, m), frame));
    }
    // complexification
    let mut with_i: Vec<CMat> = vb.basis().to_vec();
    with_i.extend(
        vb.basis()
            .iter()
            .map(|b| b.map(|z| z * matcore::c(0.0, 1.0))),
    );
    let w = RealSubspace::span(dd, &with_i);
    let w_center = central_hermitian(&w)?;
    if w_center.len() == 2 {
        return classify_paired_complex(vb, &w, rng);
    }
    if w_center.len() != 1 {
        return Err(Error::Classification(format!(
            "simple ideal complexification has {} central projections",
            w_center.len()
        )));
    }
    // real form of a simple complex algebra: R or H by Hermitian dimension
    let nn = (w.dim() / 2) as f64;
    let nbig = nn.sqrt().round() as usize;
    if 2 * nbig * nbig != w.dim() {
        return Err(Error::Classification("real form envelope not square".into()));
    }
    let h = vb.hermitian_part().dim();
    if h == nbig * (nbig + 1) / 2 {
        // real type: matrix units live inside the real algebra
        let m = dd / nbig;
        let (projections, rank) = generic_projections(vb, rng)?;
        if projections.len() != nbig || rank != m {
            return Err(Error::Classification("real-type cluster mismatch".into()));
        }
        let row = unit_row(vb, &projections, rng)?;
        let frame = unit_frame(&row, &projections[0], m)?;
        check_unitary(&frame)?;
        Ok((BlockDescriptor::new(BlockKind::R, nbig, m), frame))
    } else if h == nbig * (nbig - 1) / 2 {
        // quaternionic type: N = 2n
        if nbig % 2 != 0 {
            return Err(Error::Classification(
                "quaternionic type with odd envelope size".into(),
            ));
        }
        let n = nbig / 2;
        let m = dd / (2 * n);
        let (projections, rank) = generic_projections(vb, rng)?;
        if projections.len() != n || rank != 2 * m {
            return Err(Error::Classification(
                "quaternionic cluster mismatch".into(),
            ));
        }
        let frame = quaternionic_frame(vb, &projections, rank, rng)?;
        check_unitary(&frame)?;
        Ok((BlockDescriptor::new(BlockKind::H, n, m), frame))
    } else {
        Err(Error::Classification(format!(
            "Hermitian dimension {h} matches neither real nor quaternionic form of size {nbig}"
        )))
    }
}

/// Conjugate-paired complex block `{A⊗I_p ⊕ Ā⊗I_q}`.
fn classify_paired_complex(
    vb: &RealSubspace,
    w: &RealSubspace,
    rng: &mut impl Rng,
) -> Result<(BlockDescriptor, CMat)> {
    let dd = vb.dim_ambient;
    let dim_v = vb.dim();
    let n = ((dim_v / 2) as f64).sqrt().round() as usize;
    if 2 * n * n != dim_v {
        return Err(Error::Classification("paired block dimension".into()));
    }
    // split the complexification into its two simple complex ideals
    let ideals = split_ideals(w, rng)?;
    if ideals.len() != 2 {
        return Err(Error::Classification("pair split failed".into()));
    }
    // order: larger multiplicity first (the plain side)
    let mut sides: Vec<(CMat, RealSubspace, usize)> = Vec::new();
    for (q, wi) in ideals {
        let di = q.ncols();
        if di % n != 0 {
            return Err(Error::Classification("pair side dimension".into()));
        }
        sides.push((q, wi, di / n));
    }
    sides.sort_by_key(|s| std::cmp::Reverse(s.2));
    let (p, q_mult) = (sides[0].2, sides[1].2);

    let mut frames: Vec<CMat> = Vec::new();
    for (qiso, wi, mult) in &sides {
        let _ = qiso;
        let (projections, rank) = generic_projections(wi, rng)?;
        if projections.len() != n || rank != *mult {
            return Err(Error::Classification("pair side clusters".into()));
        }
        let row = unit_row(wi, &projections, rng)?;
        let frame = unit_frame(&row, &projections[0], *mult)?;
        check_unitary(&frame)?;
        frames.push(frame);
    }
    // read the pairing map ψ in the two frames from the V basis and
    // solve the antilinear intertwiner T with ψ(A) = T Ā T*
    let a_of = |b: &CMat, side: usize| -> CMat {
        let q = &sides[side].0;
        let fr = &frames[side];
        let compressed = fr.adjoint() * (q.adjoint() * b * q) * fr;
        // n-side slice at multiplicity (0,0)
        let mult = sides[side].2;
        CMat::from_fn(n, n, |i, j| compressed[(i * mult, j * mult)])
    };
    // constraints: B_k T = T conj(A_k) over the basis of V
    let nv = matcore::vec_dim(n);
    let mut gram = DMatrix::<f64>::zeros(nv, nv);
    for b in vb.basis() {
        let ak = a_of(b, 0);
        let bk = a_of(b, 1);
        let akc = ak.map(|z| z.conj());
        let sop = crate::model::Superoperator::from_map(n, move |t| &bk * t - t * &akc);
        gram += sop.mat.transpose() * &sop.mat;
    }
    let (vals, vecs) = matcore::sym_eig_real(&gram);
    let lmax = vals.last().copied().unwrap_or(0.0);
    let mut t_candidates = Vec::new();
    for (j, &lam) in vals.iter().enumerate() {
        if lam <= 1e-10 * lmax.max(1.0) {
            t_candidates.push(matcore::unvectorize(n, &vecs.column(j).clone_owned()));
        }
    }
    if t_candidates.is_empty() {
        return Err(Error::Classification("no pairing intertwiner".into()));
    }
    let t0 = random_combo(&t_candidates, rng);
    let tsq = matcore::hermitize(&(t0.adjoint() * &t0));
    let t_unit = &t0 * matcore::geninv(&sqrt_psd(&tsq)?)?;
    if (t_unit.adjoint() * &t_unit - eye(n)).norm() > 1e-7 * (n as f64) {
        return Err(Error::Classification("pairing intertwiner not unitary".into()));
    }
    // rotate the conjugate side so its component reads exactly Ā
    let frame1 = frames[1].clone() * t_unit.kronecker(&eye(q_mult));
    // assemble the global frame: plain side columns then conjugate side
    let mut u = DMatrix::zeros(dd, dd);
    let d0 = sides[0].0.ncols();
    let left = &sides[0].0 * &frames[0];
    let right = &sides[1].0 * &frame1;
    for c in 0..d0 {
        u.set_column(c, &left.column(c));
    }
    for c in 0..sides[1].0.ncols() {
        u.set_column(d0 + c, &right.column(c));
    }
    check_unitary(&u)?;
    Ok((
        BlockDescriptor {
            kind: BlockKind::C,
            n,
            m: p + q_mult,
            conj: q_mult,
        },
        u,
    ))
}

/// Gamma frame: an orthonormal spin basis of the traceless part and a
/// unitary intertwiner with the canonical generators.
fn gamma_frame(
    vb: &RealSubspace,
    n: usize,
    rng: &mut impl Rng,
) -> Result<(BlockDescriptor, CMat)> {
    let dd = vb.dim_ambient;
    let dirr = 1usize << (n / 2);
    if dd % dirr != 0 {
        return Err(Error::Classification("gamma space dimension".into()));
    }
    let m = dd / dirr;
    // traceless part of the ideal
    let idn = eye(dd).scale(1.0 / (dd as f64).sqrt());
    let traceless: Vec<CMat> = vb
        .basis()
        .iter()
        .map(|b| {
            let c = hs_inner(&idn, b).unwrap();
            b - idn.scale(c)
        })
        .collect();
    let tl = RealSubspace::span(dd, &traceless);
    if tl.dim() != n {
        return Err(Error::Classification(format!(
            "gamma traceless part has dimension {}, expected {n}",
            tl.dim()
        )));
    }
    // Gram–Schmidt under the normalized trace form; the Jordan relations
    // g_i ∘ g_j = δ_ij I then hold automatically in a spin factor
    let tau = |a: &CMat, b: &CMat| -> f64 {
        let p = matcore::jordan(a, b);
        (0..dd).map(|i| p[(i, i)].re).sum::<f64>() / (dd as f64)
    };
    let mut g: Vec<CMat> = Vec::new();
    for cand in tl.basis() {
        let mut wv = cand.clone();
        for prev in &g {
            let coeff = tau(prev, &wv);
            wv -= prev.scale(coeff);
        }
        let nrm = tau(&wv, &wv);
        if nrm > 1e-12 {
            g.push(wv.scale(1.0 / nrm.sqrt()));
        }
    }
    if g.len() != n {
        return Err(Error::Classification("gamma basis collapse".into()));
    }
    for i in 0..n {
        for j in 0..n {
            let jp = matcore::jordan(&g[i], &g[j]);
            let expect = if i == j { eye(dd) } else { zeros(dd) };
            if (jp - expect).norm() > 1e-7 * (dd as f64) {
                return Err(Error::Classification("gamma relations failed".into()));
            }
        }
    }
    let canon = matcore::spin_factor(n);
    // solve the intertwiner U γ_i^{can}⊗I_m = g_i U; for odd n the two
    // orientations of the last generator are tried in turn
    for flip in [1.0f64, -1.0] {
        let mut gens = g.clone();
        let last = gens.len() - 1;
        gens[last] = gens[last].scale(flip);
        let nv = matcore::vec_dim(dd);
        let mut gram = DMatrix::<f64>::zeros(nv, nv);
        for (gi, ci) in gens.iter().zip(&canon.gammas) {
            let big = ci.kronecker(&eye(m));
            let gi = gi.clone();
            let sop = crate::model::Superoperator::from_map(dd, move |t| &gi * t - t * &big);
            gram += sop.mat.transpose() * &sop.mat;
        }
        let (vals, vecs) = matcore::sym_eig_real(&gram);
        let lmax = vals.last().copied().unwrap_or(0.0);
        let mut cands = Vec::new();
        for (j, &lam) in vals.iter().enumerate() {
            if lam <= 1e-10 * lmax.max(1.0) {
                cands.push(matcore::unvectorize(dd, &vecs.column(j).clone_owned()));
            }
        }
        if cands.is_empty() {
            continue;
        }
        let u0 = random_combo(&cands, rng);
        let usq = matcore::hermitize(&(u0.adjoint() * &u0));
        if min_eig(&usq)? < 1e-8 {
            continue;
        }
        let u = &u0 * matcore::geninv(&sqrt_psd(&usq)?)?;
        if (u.adjoint() * &u - eye(dd)).norm() > 1e-7 * (dd as f64) {
            continue;
        }
        return Ok((BlockDescriptor::new(BlockKind::Gamma, n, m), u));
    }
    Err(Error::Classification(
        "no unitary intertwiner onto the canonical spin factor".into(),
    ))
}

/// Classification and frame for one simple ideal in Jordan mode.
fn classify_jordan_ideal(
    vb: &RealSubspace,
    rng: &mut impl Rng,
) -> Result<(BlockDescriptor, CMat)> {
    let dd = vb.dim_ambient;
    let dim_v = vb.dim();
    // degree: distinct eigenvalues of a generic element
    let h = random_hermitian_member(vb, rng)?;
    let eig = matcore::herm_eig(&h)?;
    let degree = cluster(&eig.values).len();
    if degree == 1 {
        // scalars on the block
        if dim_v != 1 {
            return Err(Error::Classification("degree-1 ideal not scalar".into()));
        }
        return Ok((BlockDescriptor::new(BlockKind::R, 1, dd), eye(dd)));
    }
    if degree == 2 && dim_v >= 5 {
        return gamma_frame(vb, dim_v - 1, rng);
    }
    // associative kinds: dim determines the flavor at fixed degree
    let n = degree;
    let kind = if dim_v == n * (n + 1) / 2 {
        BlockKind::R
    } else if dim_v == n * n {
        BlockKind::C
    } else if dim_v == 2 * n * n - n {
        BlockKind::H
    } else {
        return Err(Error::Classification(format!(
            "jordan ideal of degree {n} and dimension {dim_v} matches no kind"
        )));
    };
    // route through the enveloping real *-algebra
    let envelope = algebra::generate_star(dd, vb.basis(), Scalars::Real);
    let (desc, frame) = classify_star_ideal(&envelope, rng)?;
    if desc.kind != kind || desc.n != n {
        return Err(Error::Classification(format!(
            "envelope classified as {:?}({}) but jordan invariants say {:?}({})",
            desc.kind, desc.n, kind, n
        )));
    }
    Ok((desc, frame))
}

/// Finds a unitary and a block list such that the conjugated subspace
/// equals the canonical direct-sum algebra.
pub fn identify_structure(
    v: &RealSubspace,
    mode: Mode,
    seed: u64,
) -> Result<StructureDecomposition> {
    match mode {
        Mode::Star => {
            if !v.flags.is_star_algebra() {
                return Err(Error::MissingClosure("real *-subalgebra"));
            }
        }
        Mode::Jordan => {
            if !v.flags.is_jordan_algebra() {
                return Err(Error::MissingClosure("real Jordan algebra"));
            }
        }
    }
    let d = v.dim_ambient;
    let mut last_err = None;
    for attempt in 0..10 {
        let mut rng = rng_from_seed(seed.wrapping_add(attempt).wrapping_mul(0x9e37_79b9));
        let result = (|| -> Result<StructureDecomposition> {
            let ideals = split_ideals(v, &mut rng)?;
            let mut pieces: Vec<(BlockDescriptor, CMat)> = Vec::new();
            for (q, vb) in &ideals {
                let (desc, frame) = match mode {
                    Mode::Star => classify_star_ideal(vb, &mut rng)?,
                    Mode::Jordan => classify_jordan_ideal(vb, &mut rng)?,
                };
                pieces.push((desc, q * frame));
            }
            pieces.sort_by(|a, b| a.0.cmp(&b.0));
            let mut u = DMatrix::zeros(d, d);
            let mut ranges = Vec::new();
            let mut offset = 0usize;
            let mut blocks = Vec::new();
            for (desc, cols) in &pieces {
                let w = cols.ncols();
                for c in 0..w {
                    u.set_column(offset + c, &cols.column(c));
                }
                ranges.push(offset..offset + w);
                offset += w;
                blocks.push(*desc);
            }
            if offset != d {
                return Err(Error::Classification("blocks do not fill the space".into()));
            }
            check_unitary(&u)?;
            // final gate: the conjugated basis must land in the canonical
            // algebra span and the dimensions must agree
            let canonical = canonical_algebra(&blocks, mode);
            if canonical.dim() != v.dim() {
                return Err(Error::Classification(format!(
                    "canonical dimension {} != algebra dimension {}",
                    canonical.dim(),
                    v.dim()
                )));
            }
            let mut worst = 0.0f64;
            for b in v.basis() {
                let moved = u.adjoint() * b * &u;
                worst = worst.max(canonical.member(&moved).abs_residual);
            }
            if worst > STRUCT_TOL {
                return Err(Error::Classification(format!(
                    "canonical membership residual {worst:.3e}"
                )));
            }
            Ok(StructureDecomposition { blocks, u, ranges })
        })();
        match result {
            Ok(sd) => return Ok(sd),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::Classification("identification failed".into())))
}
