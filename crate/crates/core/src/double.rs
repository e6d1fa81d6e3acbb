//! Fusion objects for a finite group: conjugation-equivariant bundles over
//! the group elements with a convolution product, a braiding, simple objects
//! induced from centralizer representations, character-based decomposition,
//! the center of the group algebra, extension of transformations to morphism
//! bundles over any gerbe, and the inversion dictionary between
//! transformations and fusion objects.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bundle::{CMat, TwistedBundle, DEFAULT_TOL};
use crate::cochain::CochainError;
use crate::extract::{irr_system, ExtractError};
use crate::geochar::{
    character_of_morphism, compose_morphisms, double_character, GBundleOverG, GeoCharError,
};
use crate::gerbe::{tensor, Gerbe, GerbeError};
use crate::grp::{analyze, build_group, FiniteGroup, GroupError, GroupSpec};

pub const MAX_DOUBLE_GROUP: usize = 48;
pub const MAX_CENTER_GROUP: usize = 64;

#[derive(Debug, Error)]
pub enum DoubleError {
    #[error("objects live over different groups")]
    GroupMismatch,
    #[error("group order {0} exceeds bound {1}")]
    GroupTooLarge(usize, usize),
    #[error("multiplicity of simple {index} is not a nonnegative integer: {value}")]
    BadMultiplicity { index: usize, value: Complex64 },
    #[error("dimensions at element {g} resum to {got}, object has {want}")]
    DimMismatch { g: usize, got: usize, want: usize },
    #[error("coefficient vector must have one entry per group element")]
    BadCoefficientLength,
    #[error("simple object {0} failed to build: {1}")]
    SimpleFailed(usize, String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Gerbe(#[from] GerbeError),
    #[error(transparent)]
    Cochain(#[from] CochainError),
    #[error(transparent)]
    GeoChar(#[from] GeoCharError),
}

/// Fiber of the product at g is the lex-ordered sum over factorizations
/// g = a·b of the blocks V_a ⊗ W_b; a is the first-factor index.
fn fused_dims(group: &FiniteGroup, vd: &[usize], wd: &[usize]) -> Vec<usize> {
    (0..group.order)
        .map(|g| {
            (0..group.order)
                .map(|a| vd[a] * wd[group.mul(group.inv(a), g)])
                .sum()
        })
        .collect()
}

fn fuse_offset(group: &FiniteGroup, vd: &[usize], wd: &[usize], g: usize, a: usize) -> usize {
    (0..a)
        .map(|ap| vd[ap] * wd[group.mul(group.inv(ap), g)])
        .sum()
}

/// Unit for fusion: a line at the identity element.
pub fn unit_object(group: Arc<FiniteGroup>) -> GBundleOverG {
    let n = group.order;
    let mut dims = vec![0usize; n];
    dims[group.identity] = 1;
    let maps = (0..n)
        .map(|_h| {
            (0..n)
                .map(|g| {
                    if g == group.identity {
                        CMat::identity(1, 1)
                    } else {
                        CMat::zeros(0, 0)
                    }
                })
                .collect()
        })
        .collect();
    GBundleOverG { group, dims, maps, tol: DEFAULT_TOL }
}

/// (V⊗W)_g = ⊕_{ab=g} V_a ⊗ W_b, with h acting blockwise by V(h:a)⊗W(h:b).
pub fn fuse(v: &GBundleOverG, w: &GBundleOverG) -> Result<GBundleOverG, DoubleError> {
    if v.group.mult != w.group.mult {
        return Err(DoubleError::GroupMismatch);
    }
    let group = v.group.clone();
    let n = group.order;
    let dims = fused_dims(&group, &v.dims, &w.dims);
    let mut maps = Vec::with_capacity(n);
    for h in 0..n {
        let mut row = Vec::with_capacity(n);
        for g in 0..n {
            let tgt = group.conj(h, g);
            let mut m = CMat::zeros(dims[tgt], dims[g]);
            for a in 0..n {
                let b = group.mul(group.inv(a), g);
                let (rows, cols) = (
                    v.dims[group.conj(h, a)] * w.dims[group.conj(h, b)],
                    v.dims[a] * w.dims[b],
                );
                if rows == 0 || cols == 0 {
                    continue;
                }
                let kron = v.maps[h][a].kronecker(&w.maps[h][b]);
                m.view_mut(
                    (fuse_offset(&group, &v.dims, &w.dims, tgt, group.conj(h, a)),
                     fuse_offset(&group, &v.dims, &w.dims, g, a)),
                    (rows, cols),
                )
                .copy_from(&kron);
            }
            row.push(m);
        }
        maps.push(row);
    }
    Ok(GBundleOverG { group, dims, maps, tol: v.tol.max(w.tol) })
}

pub fn total_dim(v: &GBundleOverG) -> usize {
    v.dims.iter().sum()
}

/// Braiding (V⊗W)_g → (W⊗V)_g: the block V_a⊗W_b lands in (W_b, V-index
/// b⁻¹ab) as w ⊗ V(b⁻¹: a)v.
pub fn braid(v: &GBundleOverG, w: &GBundleOverG) -> Result<Vec<CMat>, DoubleError> {
    if v.group.mult != w.group.mult {
        return Err(DoubleError::GroupMismatch);
    }
    let group = &v.group;
    let n = group.order;
    let src_dims = fused_dims(group, &v.dims, &w.dims);
    let tgt_dims = fused_dims(group, &w.dims, &v.dims);
    let mut out = Vec::with_capacity(n);
    for g in 0..n {
        let mut m = CMat::zeros(tgt_dims[g], src_dims[g]);
        for a in 0..n {
            let b = group.mul(group.inv(a), g);
            let (dv, dw) = (v.dims[a], w.dims[b]);
            if dv == 0 || dw == 0 {
                continue;
            }
            let moved = &v.maps[group.inv(b)][a];
            let dv2 = moved.nrows();
            let src_off = fuse_offset(group, &v.dims, &w.dims, g, a);
            let tgt_off = fuse_offset(group, &w.dims, &v.dims, g, b);
            for i in 0..dv {
                for j in 0..dw {
                    for i2 in 0..dv2 {
                        m[(tgt_off + j * dv2 + i2, src_off + i * dw + j)] = moved[(i2, i)];
                    }
                }
            }
        }
        out.push(m);
    }
    Ok(out)
}

/// Permutation matrices (V⊗W)⊗U → V⊗(W⊗U) re-sorting the factorization
/// blocks from (ab, a)-lex to (a, b)-lex; entries are identity blocks.
pub fn assoc_fusion(
    v: &GBundleOverG,
    w: &GBundleOverG,
    u: &GBundleOverG,
) -> Result<Vec<CMat>, DoubleError> {
    if v.group.mult != w.group.mult || v.group.mult != u.group.mult {
        return Err(DoubleError::GroupMismatch);
    }
    let group = &v.group;
    let n = group.order;
    let vw = fused_dims(group, &v.dims, &w.dims);
    let wu = fused_dims(group, &w.dims, &u.dims);
    let left = fused_dims(group, &vw, &u.dims);
    let right = fused_dims(group, &v.dims, &wu);
    let mut out = Vec::with_capacity(n);
    for g in 0..n {
        debug_assert_eq!(left[g], right[g]);
        let mut m = CMat::zeros(right[g], left[g]);
        for a in 0..n {
            for b in 0..n {
                let p = group.mul(a, b);
                let c = group.mul(group.inv(p), g);
                let block = v.dims[a] * w.dims[b] * u.dims[c];
                if block == 0 {
                    continue;
                }
                let src = fuse_offset(group, &vw, &u.dims, g, p)
                    + fuse_offset(group, &v.dims, &w.dims, p, a) * u.dims[c];
                // Right layout: outer block a (stride wu[a⁻¹g] per V-basis
                // vector), inner block b inside W⊗U.
                let inner = fuse_offset(group, &w.dims, &u.dims, group.mul(group.inv(a), g), b);
                let outer = fuse_offset(group, &v.dims, &wu, g, a);
                let stride = wu[group.mul(group.inv(a), g)];
                for i in 0..v.dims[a] {
                    for jk in 0..w.dims[b] * u.dims[c] {
                        m[(outer + i * stride + inner + jk, src + i * w.dims[b] * u.dims[c] + jk)] =
                            Complex64::ONE;
                    }
                }
            }
        }
        out.push(m);
    }
    Ok(out)
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// B_{ab}⊗id_c on the left-associated fiber at g.
fn tensor_id_block(
    bab: &[CMat],
    g: usize,
    a: &GBundleOverG,
    b: &GBundleOverG,
    c: &GBundleOverG,
) -> CMat {
    let group = &a.group;
    let n = group.order;
    let ab = fused_dims(group, &a.dims, &b.dims);
    let ba = fused_dims(group, &b.dims, &a.dims);
    let src = fused_dims(group, &ab, &c.dims);
    let tgt = fused_dims(group, &ba, &c.dims);
    let mut m = CMat::zeros(tgt[g], src[g]);
    for p in 0..n {
        let q = group.mul(group.inv(p), g);
        if ab[p] * c.dims[q] == 0 {
            continue;
        }
        let kron = bab[p].kronecker(&CMat::identity(c.dims[q], c.dims[q]));
        m.view_mut(
            (fuse_offset(group, &ba, &c.dims, g, p), fuse_offset(group, &ab, &c.dims, g, p)),
            kron.shape(),
        )
        .copy_from(&kron);
    }
    m
}

/// id_a⊗B_{bc} on the right-associated fiber at g.
fn id_tensor_block(
    a: &GBundleOverG,
    g: usize,
    bbc: &[CMat],
    b: &GBundleOverG,
    c: &GBundleOverG,
) -> CMat {
    let group = &a.group;
    let n = group.order;
    let bc = fused_dims(group, &b.dims, &c.dims);
    let cb = fused_dims(group, &c.dims, &b.dims);
    let src = fused_dims(group, &a.dims, &bc);
    let tgt = fused_dims(group, &a.dims, &cb);
    let mut m = CMat::zeros(tgt[g], src[g]);
    for p in 0..n {
        let q = group.mul(group.inv(p), g);
        if a.dims[p] * bc[q] == 0 {
            continue;
        }
        let kron = CMat::identity(a.dims[p], a.dims[p]).kronecker(&bbc[q]);
        m.view_mut(
            (fuse_offset(group, &a.dims, &cb, g, p), fuse_offset(group, &a.dims, &bc, g, p)),
            kron.shape(),
        )
        .copy_from(&kron);
    }
    m
}

/// Swap of the first two factors on the left-associated fibers.
fn swap12_maps(
    a: &GBundleOverG,
    b: &GBundleOverG,
    c: &GBundleOverG,
) -> Result<Vec<CMat>, DoubleError> {
    let bab = braid(a, b)?;
    Ok((0..a.group.order).map(|g| tensor_id_block(&bab, g, a, b, c)).collect())
}

/// Swap of the last two factors, conjugated back to the left-associated
/// layout by the re-association permutations.
fn swap23_maps(
    a: &GBundleOverG,
    b: &GBundleOverG,
    c: &GBundleOverG,
) -> Result<Vec<CMat>, DoubleError> {
    let alpha = assoc_fusion(a, b, c)?;
    let bbc = braid(b, c)?;
    let acb = assoc_fusion(a, c, b)?;
    Ok((0..a.group.order)
        .map(|g| acb[g].adjoint() * id_tensor_block(a, g, &bbc, b, c) * &alpha[g])
        .collect())
}

/// Worst fiberwise deviation of S₂₃S₁₂S₂₃ = S₁₂S₂₃S₁₂ for the adjacent
/// swaps acting on V⊗W⊗U in the left-associated layout.
pub fn yang_baxter_residual(
    v: &GBundleOverG,
    w: &GBundleOverG,
    u: &GBundleOverG,
) -> Result<f64, DoubleError> {
    let r23_vwu = swap23_maps(v, w, u)?;
    let r12_vuw = swap12_maps(v, u, w)?;
    let r23_uvw = swap23_maps(u, v, w)?;
    let r12_vwu = swap12_maps(v, w, u)?;
    let r23_wvu = swap23_maps(w, v, u)?;
    let r12_wuv = swap12_maps(w, u, v)?;
    let mut worst = 0.0f64;
    for g in 0..v.group.order {
        let lhs = &r23_uvw[g] * &r12_vuw[g] * &r23_vwu[g];
        let rhs = &r12_wuv[g] * &r23_wvu[g] * &r12_vwu[g];
        worst = worst.max(max_abs(&(lhs - rhs)));
    }
    Ok(worst)
}

/// Worst fiberwise deviations of the two coherence squares comparing one
/// braiding move against its two-step factorization: first braiding V past
/// W⊗U, then braiding V⊗W past U.
pub fn hexagon_residuals(
    v: &GBundleOverG,
    w: &GBundleOverG,
    u: &GBundleOverG,
) -> Result<(f64, f64), DoubleError> {
    let n = v.group.order;
    let wu = fuse(w, u)?;
    let vw = fuse(v, w)?;

    let alpha_vwu = assoc_fusion(v, w, u)?;
    let alpha_wvu = assoc_fusion(w, v, u)?;
    let alpha_wuv = assoc_fusion(w, u, v)?;
    let b_v_wu = braid(v, &wu)?;
    let b_vw = braid(v, w)?;
    let b_vu = braid(v, u)?;
    let mut first = 0.0f64;
    for g in 0..n {
        // one move: (vw)u → v(wu) → (wu)v → w(uv)
        let one = &alpha_wuv[g] * &b_v_wu[g] * &alpha_vwu[g];
        // two moves: (vw)u → (wv)u → w(vu) → w(uv)
        let two = id_tensor_block(w, g, &b_vu, v, u) * &alpha_wvu[g]
            * tensor_id_block(&b_vw, g, v, w, u);
        first = first.max(max_abs(&(one - two)));
    }

    let b_vw_u = braid(&vw, u)?;
    let alpha_uvw = assoc_fusion(u, v, w)?;
    let b_wu = braid(w, u)?;
    let alpha_vuw = assoc_fusion(v, u, w)?;
    let mut second = 0.0f64;
    for g in 0..n {
        // one move: (vw)u → u(vw), already in the nested layout
        let one = &b_vw_u[g];
        // two moves: (vw)u → v(wu) → v(uw) → (vu)w → (uv)w → u(vw)
        let two = &alpha_uvw[g]
            * tensor_id_block(&b_vu, g, v, u, w)
            * alpha_vuw[g].adjoint()
            * id_tensor_block(v, g, &b_wu, w, u)
            * &alpha_vwu[g];
        second = second.max(max_abs(&(one - two)));
    }
    Ok((first, second))
}

/// One simple object per conjugacy class and irreducible centralizer
/// representation, induced along the minimal transversal.
pub fn simples(group: &Arc<FiniteGroup>, seed: u64) -> Result<Vec<GBundleOverG>, DoubleError> {
    if group.order > MAX_DOUBLE_GROUP {
        return Err(DoubleError::GroupTooLarge(group.order, MAX_DOUBLE_GROUP));
    }
    let n = group.order;
    let an = analyze(group);
    let mut out = Vec::new();
    for (ci, class) in an.classes.iter().enumerate() {
        let rep = class[0];
        let cent = &an.centralizers[rep];
        let local = subgroup_group(group, cent)?;
        let cent_arc = Arc::new(local);
        let sys = irr_with_retry(&cent_arc, seed.wrapping_add(ci as u64))
            .map_err(|e| DoubleError::SimpleFailed(ci, e.to_string()))?;
        // transversal[x] conjugates the class representative to x.
        let transversal: Vec<Option<usize>> = (0..n)
            .map(|x| {
                if an.class_of[x] == ci {
                    Some((0..n).find(|&t| group.conj(t, rep) == x).expect("x is in the class"))
                } else {
                    None
                }
            })
            .collect();
        let loc = |e: usize| cent.binary_search(&e).expect("element lies in the centralizer");
        for (ri, rho) in sys.reps.iter().enumerate() {
            let d = sys.dims[ri];
            let dims: Vec<usize> =
                (0..n).map(|x| if an.class_of[x] == ci { d } else { 0 }).collect();
            let maps: Vec<Vec<CMat>> = (0..n)
                .map(|h| {
                    (0..n)
                        .map(|x| {
                            let Some(tx) = transversal[x] else {
                                return CMat::zeros(0, 0);
                            };
                            let tgt = transversal[group.conj(h, x)].expect("class is invariant");
                            let w = group.mul(group.mul(group.inv(tgt), h), tx);
                            rho[loc(w)].clone()
                        })
                        .collect()
                })
                .collect();
            out.push(GBundleOverG { group: group.clone(), dims, maps, tol: sys.tol });
        }
    }
    Ok(out)
}

fn irr_with_retry(
    group: &Arc<FiniteGroup>,
    seed: u64,
) -> Result<crate::extract::IrrSystem, ExtractError> {
    let mut last = None;
    for attempt in 0..4u64 {
        match irr_system(group, seed.wrapping_add(attempt.wrapping_mul(0x9e3779b9))) {
            Ok(sys) => return Ok(sys),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt ran"))
}

fn subgroup_group(group: &FiniteGroup, elements: &[usize]) -> Result<FiniteGroup, GroupError> {
    let mult: Vec<Vec<usize>> = elements
        .iter()
        .map(|&a| {
            elements
                .iter()
                .map(|&b| {
                    elements
                        .binary_search(&group.mul(a, b))
                        .expect("subgroup is closed")
                })
                .collect()
        })
        .collect();
    build_group(&GroupSpec::Table { name: None, mult })
}

/// Multiplicity of each simple inside v, by the double-character pairing
/// over commuting pairs; entries must come out as nonnegative integers and
/// the dimensions must resum exactly.
pub fn decompose(
    v: &GBundleOverG,
    simples: &[GBundleOverG],
) -> Result<Vec<usize>, DoubleError> {
    let group = &v.group;
    if simples.iter().any(|s| s.group.mult != group.mult) {
        return Err(DoubleError::GroupMismatch);
    }
    let n = group.order;
    let chi_v = double_character(v);
    let mut mults = Vec::with_capacity(simples.len());
    for (si, s) in simples.iter().enumerate() {
        let chi_s = double_character(s);
        let mut acc = Complex64::ZERO;
        for (&(g, h), z) in &chi_s.table {
            acc += z.conj() * chi_v.at(g, h);
        }
        acc /= n as f64;
        let rounded = acc.re.round();
        if (acc.re - rounded).abs() > 1e-6 || acc.im.abs() > 1e-6 || rounded < 0.0 {
            return Err(DoubleError::BadMultiplicity { index: si, value: acc });
        }
        mults.push(rounded as usize);
    }
    for g in 0..n {
        let got: usize = mults.iter().zip(simples).map(|(m, s)| m * s.dims[g]).sum();
        if got != v.dims[g] {
            return Err(DoubleError::DimMismatch { g, got, want: v.dims[g] });
        }
    }
    Ok(mults)
}

/// Matrix on the group algebra of multiplication by Σ_g t_{g⁻¹}·g.
pub fn central_matrix(group: &FiniteGroup, t: &[Rational64]) -> DMatrix<Rational64> {
    let n = group.order;
    DMatrix::from_fn(n, n, |y, x| t[group.mul(x, group.inv(y))])
}

fn central_matrix_c(group: &FiniteGroup, t: &[Complex64]) -> CMat {
    let n = group.order;
    CMat::from_fn(n, n, |y, x| t[group.mul(x, group.inv(y))])
}

/// Convolution matching matrix composition: v(s∘t) = v(s)·v(t).
pub fn convolve(group: &FiniteGroup, s: &[Rational64], t: &[Rational64]) -> Vec<Rational64> {
    (0..group.order)
        .map(|h| {
            (0..group.order)
                .map(|x| t[x] * s[group.mul(group.inv(x), h)])
                .sum()
        })
        .collect()
}

fn convolve_c(group: &FiniteGroup, s: &[Complex64], t: &[Complex64]) -> Vec<Complex64> {
    (0..group.order)
        .map(|h| {
            (0..group.order)
                .map(|x| t[x] * s[group.mul(group.inv(x), h)])
                .sum()
        })
        .collect()
}

/// Coefficients recovered from the identity column: t_g = M[g⁻¹, e].
pub fn restrict_matrix(group: &FiniteGroup, m: &DMatrix<Rational64>) -> Vec<Rational64> {
    (0..group.order).map(|g| m[(group.inv(g), group.identity)]).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct CenterReport {
    pub class_count: usize,
    pub center_dim: usize,
    /// Exact checks on rational class functions: centrality, convolution
    /// homomorphism, restriction-extension round trip.
    pub exact_pass: bool,
    /// Max residual of the same checks on seeded complex coefficients.
    pub seeded_residual: f64,
    /// Indicators of multi-element classes must fail centrality pointwise.
    pub negative_pass: bool,
    pub pass: bool,
}

fn commutes_exactly(group: &FiniteGroup, m: &DMatrix<Rational64>) -> bool {
    let n = group.order;
    for a in 0..n {
        // Left translation by a: e_x ↦ e_{ax}.
        for y in 0..n {
            for x in 0..n {
                // (L_a M)[y,x] = M[a⁻¹y, x]; (M L_a)[y,x] = M[y, ax].
                if m[(group.mul(group.inv(a), y), x)] != m[(y, group.mul(a, x))] {
                    return false;
                }
            }
        }
    }
    true
}

/// The center of the group algebra, checked exactly on rational class
/// functions and numerically on seeded coefficients.
pub fn center_check(group: &Arc<FiniteGroup>, seed: u64) -> Result<CenterReport, DoubleError> {
    if group.order > MAX_CENTER_GROUP {
        return Err(DoubleError::GroupTooLarge(group.order, MAX_CENTER_GROUP));
    }
    let n = group.order;
    let an = analyze(group);
    let mut exact_pass = true;

    // Class indicators: central, and their convolutions match matrix
    // products exactly.
    let indicators: Vec<Vec<Rational64>> = an
        .classes
        .iter()
        .map(|class| {
            let mut t = vec![Rational64::zero(); n];
            for &x in class {
                t[x] = Rational64::from_integer(1);
            }
            t
        })
        .collect();
    for t in &indicators {
        let m = central_matrix(group, t);
        exact_pass &= commutes_exactly(group, &m);
        exact_pass &= restrict_matrix(group, &m) == *t;
    }
    for s in &indicators {
        for t in &indicators {
            let lhs = central_matrix(group, &convolve(group, s, t));
            let rhs = central_matrix(group, s) * central_matrix(group, t);
            exact_pass &= lhs == rhs;
        }
    }

    // Seeded complex class functions.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut seeded_residual: f64 = 0.0;
    for _ in 0..5 {
        let mut draw = || {
            let per_class: Vec<Complex64> = (0..an.classes.len())
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            (0..n).map(|g| per_class[an.class_of[g]]).collect::<Vec<_>>()
        };
        let (s, t) = (draw(), draw());
        let ms = central_matrix_c(group, &s);
        let mt = central_matrix_c(group, &t);
        let mc = central_matrix_c(group, &convolve_c(group, &s, &t));
        let prod = &ms * &mt;
        seeded_residual = seeded_residual
            .max((&prod - &mc).iter().map(|z| z.norm()).fold(0.0, f64::max));
        for a in 0..n {
            let mut la = CMat::zeros(n, n);
            for x in 0..n {
                la[(group.mul(a, x), x)] = Complex64::ONE;
            }
            let comm = &la * &ms - &ms * &la;
            seeded_residual = seeded_residual.max(comm.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
        for (g, &coef) in s.iter().enumerate() {
            let back = ms[(group.inv(g), group.identity)];
            seeded_residual = seeded_residual.max((back - coef).norm());
        }
    }

    // Indicators of single elements in larger classes must not be central.
    let mut negative_pass = true;
    for class in &an.classes {
        if class.len() < 2 {
            continue;
        }
        let mut t = vec![Rational64::zero(); n];
        t[class[0]] = Rational64::from_integer(1);
        negative_pass &= !commutes_exactly(group, &central_matrix(group, &t));
    }

    let pass = exact_pass && seeded_residual < 1e-10 && negative_pass;
    Ok(CenterReport {
        class_count: an.classes.len(),
        center_dim: an.classes.len(),
        exact_pass,
        seeded_residual,
        negative_pass,
        pass,
    })
}

/// Components of g with the fiber over the pair (g·x, x), ascending in g.
fn arrow_components(x: &Gerbe, a: usize, b: usize) -> Vec<usize> {
    (0..x.group().order).filter(|&g| x.gset.apply(g, b) == a).collect()
}

/// Extend a transformation to a morphism bundle of the gerbe: the fiber over
/// (x′, x) stacks the blocks T_g with g·x = x′, and h transports the g-block
/// to the hgh⁻¹-block with the phase that makes the twisted composition law
/// hold on the nose.
pub fn extend_transformation(
    t: &GBundleOverG,
    x: &Gerbe,
) -> Result<TwistedBundle, DoubleError> {
    if t.group.mult != x.group().mult {
        return Err(DoubleError::GroupMismatch);
    }
    let carrier = Arc::new(tensor(x, x, true)?);
    let xs = x.gset.size;
    let n = t.group.order;
    let comps: Vec<Vec<usize>> = (0..carrier.gset.size)
        .map(|p| arrow_components(x, p / xs, p % xs))
        .collect();
    let dims: Vec<usize> = comps
        .iter()
        .map(|c| c.iter().map(|&g| t.dims[g]).sum())
        .collect();
    let offset = |p: usize, g: usize| -> usize {
        comps[p].iter().take_while(|&&u| u != g).map(|&u| t.dims[u]).sum()
    };
    let group = x.group().clone();
    let mut maps = Vec::with_capacity(n);
    for h in 0..n {
        let mut row = Vec::with_capacity(carrier.gset.size);
        for p in 0..carrier.gset.size {
            let q = carrier.gset.apply(h, p);
            let b = p % xs;
            let mut m = CMat::zeros(dims[q], dims[p]);
            for &g in &comps[p] {
                if t.dims[g] == 0 {
                    continue;
                }
                let g2 = group.conj(h, g);
                let phase = (x.cocycle.at2(b, h, g) - x.cocycle.at2(b, g2, h)).to_complex();
                let block = &t.maps[h][g] * phase;
                m.view_mut((offset(q, g2), offset(p, g)), block.shape())
                    .copy_from(&block);
            }
            row.push(m);
        }
        maps.push(row);
    }
    Ok(TwistedBundle { gerbe: carrier, dims, maps, tol: t.tol })
}

/// Largest character deviation between T̂_y∘E and E∘T̂_x for a morphism
/// bundle E from x to y.
pub fn naturality_residual(
    t: &GBundleOverG,
    e: &TwistedBundle,
    x: &Gerbe,
    y: &Gerbe,
) -> Result<f64, DoubleError> {
    let tx = extend_transformation(t, x)?;
    let ty = extend_transformation(t, y)?;
    let left = compose_morphisms(&ty, e, x, y, y)?;
    let right = compose_morphisms(e, &tx, x, x, y)?;
    let chl = character_of_morphism(&left, x, y)?;
    let chr = character_of_morphism(&right, x, y)?;
    let mut residual: f64 = 0.0;
    for (a, b) in chl.iter().zip(&chr) {
        residual = residual.max((a - b).iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    Ok(residual)
}

/// The inversion dictionary: V(T)_g = T_{g⁻¹}, acted on through T's own
/// maps. Applying it twice gives T back.
pub fn vee(t: &GBundleOverG) -> GBundleOverG {
    let group = t.group.clone();
    let n = group.order;
    let dims: Vec<usize> = (0..n).map(|g| t.dims[group.inv(g)]).collect();
    let maps: Vec<Vec<CMat>> = (0..n)
        .map(|h| (0..n).map(|g| t.maps[h][group.inv(g)].clone()).collect())
        .collect();
    GBundleOverG { group, dims, maps, tol: t.tol }
}

/// Composite of transformations as convolution over the free actor: the
/// fiber at h stacks T_u ⊗ S_{hu⁻¹} by ascending u.
pub fn compose_transformations(
    t: &GBundleOverG,
    s: &GBundleOverG,
) -> Result<GBundleOverG, DoubleError> {
    if t.group.mult != s.group.mult {
        return Err(DoubleError::GroupMismatch);
    }
    let group = t.group.clone();
    let n = group.order;
    let block = |h: usize, u: usize| t.dims[u] * s.dims[group.mul(h, group.inv(u))];
    let dims: Vec<usize> = (0..n).map(|h| (0..n).map(|u| block(h, u)).sum()).collect();
    let offset = |h: usize, u: usize| (0..u).map(|up| block(h, up)).sum::<usize>();
    let mut maps = Vec::with_capacity(n);
    for hp in 0..n {
        let mut row = Vec::with_capacity(n);
        for h in 0..n {
            let tgt = group.conj(hp, h);
            let mut m = CMat::zeros(dims[tgt], dims[h]);
            for u in 0..n {
                let w = group.mul(h, group.inv(u));
                if block(h, u) == 0 {
                    continue;
                }
                let kron = t.maps[hp][u].kronecker(&s.maps[hp][w]);
                if kron.nrows() == 0 || kron.ncols() == 0 {
                    continue;
                }
                m.view_mut((offset(tgt, group.conj(hp, u)), offset(h, u)), kron.shape())
                    .copy_from(&kron);
            }
            row.push(m);
        }
        maps.push(row);
    }
    Ok(GBundleOverG { group, dims, maps, tol: t.tol.max(s.tol) })
}

#[derive(Debug, Clone, Serialize)]
pub struct FynReport {
    pub dims_match: bool,
    /// Residual of the coherence map intertwining fuse(V(S),V(T)) with
    /// V(T∘S).
    pub coherence_residual: f64,
    /// Residual between the transported interchange and the braiding.
    pub braid_residual: f64,
    /// First (g, block) where the braiding comparison exceeds tolerance.
    pub witness: Option<(usize, usize)>,
    pub pass: bool,
}

/// Coherence fuse(V(S),V(T))_g → V(T∘S)_g: the block at first-factor index
/// a applies S(g⁻¹a) to the S-leg, swaps the legs, and lands at block g⁻¹a.
fn fyn_coherence(t: &GBundleOverG, s: &GBundleOverG, g: usize) -> CMat {
    let group = &t.group;
    let n = group.order;
    let vs_dims: Vec<usize> = (0..n).map(|a| s.dims[group.inv(a)]).collect();
    let vt_dims: Vec<usize> = (0..n).map(|a| t.dims[group.inv(a)]).collect();
    let src_dims = fused_dims(group, &vs_dims, &vt_dims);
    let ginv = group.inv(g);
    let comp_block = |u: usize| t.dims[u] * s.dims[group.mul(ginv, group.inv(u))];
    let comp_dim: usize = (0..n).map(comp_block).sum();
    let comp_offset = |u: usize| (0..u).map(comp_block).sum::<usize>();
    let mut m = CMat::zeros(comp_dim, src_dims[g]);
    for a in 0..n {
        let b = group.mul(group.inv(a), g);
        let (ds, dt) = (vs_dims[a], vt_dims[b]);
        if ds == 0 || dt == 0 {
            continue;
        }
        let u = group.mul(ginv, a);
        let smap = &s.maps[u][group.inv(a)];
        let ds2 = smap.nrows();
        let src = fuse_offset(group, &vs_dims, &vt_dims, g, a);
        let tgt = comp_offset(u);
        for js in 0..ds {
            for it in 0..dt {
                for is2 in 0..ds2 {
                    m[(tgt + it * ds2 + is2, src + js * dt + it)] = smap[(is2, js)];
                }
            }
        }
    }
    m
}

/// Interchange (T∘S)_h → (S∘T)_h: the block T_u⊗S_w swaps legs through
/// T(w: u) and lands at block w.
fn interchange(t: &GBundleOverG, s: &GBundleOverG, h: usize) -> CMat {
    let group = &t.group;
    let n = group.order;
    let src_block = |u: usize| t.dims[u] * s.dims[group.mul(h, group.inv(u))];
    let tgt_block = |u: usize| s.dims[u] * t.dims[group.mul(h, group.inv(u))];
    let src_dim: usize = (0..n).map(src_block).sum();
    let tgt_dim: usize = (0..n).map(tgt_block).sum();
    let src_offset = |u: usize| (0..u).map(src_block).sum::<usize>();
    let tgt_offset = |u: usize| (0..u).map(tgt_block).sum::<usize>();
    let mut m = CMat::zeros(tgt_dim, src_dim);
    for u in 0..n {
        let w = group.mul(h, group.inv(u));
        let (dt, ds) = (t.dims[u], s.dims[w]);
        if dt == 0 || ds == 0 {
            continue;
        }
        let tmap = &t.maps[w][u];
        let dt2 = tmap.nrows();
        let src = src_offset(u);
        let tgt = tgt_offset(w);
        for it in 0..dt {
            for js in 0..ds {
                for it2 in 0..dt2 {
                    m[(tgt + js * dt2 + it2, src + it * ds + js)] = tmap[(it2, it)];
                }
            }
        }
    }
    m
}

/// Check the inversion dictionary: composition of transformations matches
/// fusion of the associated objects, and the transported interchange matches
/// the braiding.
pub fn fyn_check(t: &GBundleOverG, s: &GBundleOverG, tol: f64) -> Result<FynReport, DoubleError> {
    if t.group.mult != s.group.mult {
        return Err(DoubleError::GroupMismatch);
    }
    let group = &t.group;
    let n = group.order;
    let (vt, vs) = (vee(t), vee(s));
    let fused = fuse(&vs, &vt)?;
    let comp = vee(&compose_transformations(t, s)?);
    let mut dims_match = fused.dims == comp.dims;

    let phi: Vec<CMat> = (0..n).map(|g| fyn_coherence(t, s, g)).collect();
    let mut coherence_residual: f64 = 0.0;
    for g in 0..n {
        let (r, c) = phi[g].shape();
        if r != comp.dims[g] || c != fused.dims[g] {
            dims_match = false;
        }
        let gram = phi[g].adjoint() * &phi[g] - CMat::identity(fused.dims[g], fused.dims[g]);
        coherence_residual =
            coherence_residual.max(gram.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    for h in 0..n {
        for g in 0..n {
            let tgt = group.conj(h, g);
            let diff = &phi[tgt] * &fused.maps[h][g] - &comp.maps[h][g] * &phi[g];
            coherence_residual =
                coherence_residual.max(diff.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }

    // Interchange transported across the dictionary versus the braiding.
    let braiding = braid(&vs, &vt)?;
    let phi_ts: Vec<CMat> = (0..n).map(|g| fyn_coherence(s, t, g)).collect();
    let mut braid_residual: f64 = 0.0;
    let mut witness = None;
    for g in 0..n {
        let iota = interchange(t, s, group.inv(g));
        let transported = phi_ts[g].adjoint() * iota * &phi[g];
        let diff = &transported - &braiding[g];
        let res = diff.iter().map(|z| z.norm()).fold(0.0, f64::max);
        braid_residual = braid_residual.max(res);
        let cols = phi_ts[g].ncols();
        let gram = phi_ts[g].adjoint() * &phi_ts[g] - CMat::identity(cols, cols);
        coherence_residual =
            coherence_residual.max(gram.iter().map(|z| z.norm()).fold(0.0, f64::max));
        if res > tol && witness.is_none() {
            let block = (0..n).find(|&a| {
                let b = group.mul(group.inv(a), g);
                let cols = s.dims[group.inv(a)] * t.dims[group.inv(b)];
                if cols == 0 {
                    return false;
                }
                let off = fuse_offset(
                    group,
                    &vs.dims,
                    &vt.dims,
                    g,
                    a,
                );
                diff.view((0, off), (diff.nrows(), cols))
                    .iter()
                    .any(|z| z.norm() > tol)
            });
            witness = Some((g, block.unwrap_or(0)));
        }
    }

    let pass = dims_match && coherence_residual < tol && braid_residual < tol;
    Ok(FynReport { dims_match, coherence_residual, braid_residual, witness, pass })
}

/// fusionobj.json payload: like bundle.json but the carrier is the group
/// under conjugation. Map keys are "g,h" for the element g moved by h;
/// missing keys are zero blocks.
#[derive(Debug, Serialize, Deserialize)]
pub struct FusionObjFile {
    pub group: serde_json::Value,
    pub dims: Vec<usize>,
    #[serde(default)]
    pub maps: BTreeMap<String, Vec<Vec<[f64; 2]>>>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

pub fn fusionobj_from_json(text: &str) -> Result<GBundleOverG, String> {
    let file: FusionObjFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let group = Arc::new(crate::grp::build_group_from_json(&file.group.to_string())?);
    let n = group.order;
    if file.dims.len() != n {
        return Err("dims length must equal the group order".into());
    }
    let mut maps: Vec<Vec<CMat>> = (0..n)
        .map(|h| {
            (0..n)
                .map(|g| CMat::zeros(file.dims[group.conj(h, g)], file.dims[g]))
                .collect()
        })
        .collect();
    for (key, rows) in &file.maps {
        let (gs, hs) = key.split_once(',').ok_or_else(|| format!("bad map key {key:?}"))?;
        let g: usize = gs.trim().parse().map_err(|_| format!("bad map key {key:?}"))?;
        let h: usize = hs.trim().parse().map_err(|_| format!("bad map key {key:?}"))?;
        if g >= n || h >= n {
            return Err(format!("map key {key:?} out of range"));
        }
        let (nr, nc) = (file.dims[group.conj(h, g)], file.dims[g]);
        if rows.len() != nr || rows.iter().any(|r| r.len() != nc) {
            return Err(format!("matrix at {key:?} has the wrong shape"));
        }
        let mut m = CMat::zeros(nr, nc);
        for (i, row) in rows.iter().enumerate() {
            for (j, &[re, im]) in row.iter().enumerate() {
                m[(i, j)] = Complex64::new(re, im);
            }
        }
        maps[h][g] = m;
    }
    Ok(GBundleOverG { group, dims: file.dims, maps, tol: file.tol })
}
