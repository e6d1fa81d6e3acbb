//! From a finite group with a chosen normal subgroup: the permutation of the
//! kernel's irreducible characters induced on the quotient, and the phase
//! data the extension carries over that permutation set.
//!
//! A set-theoretic section s of E → G = E/K (with s(e) = e) twists each
//! irreducible of K by conjugation; matching twisted characters gives a
//! G-set on the irreducible classes. Schur-averaged intertwiners between the
//! twisted and the catalogued copies compose associatively only up to a
//! scalar, and those scalars assemble into a 2-cocycle over the G-set. Its
//! class does not depend on the section or on the averaging seeds; the
//! canonical metric weights each class by dim/|K|.

use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bundle::{irreducible_bundles, BundleError, CMat, DEFAULT_TOL};
use crate::cochain::{Cochain, CochainError, Phase};
use crate::gerbe::{make_gerbe, Gerbe, GerbeError};
use crate::grp::{build_group, build_group_from_json, FiniteGroup, GroupError, GroupSpec};
use crate::gspace::{build_gset, validate_gset, GSet, GSetSpec, GSpaceError};

/// Largest acceptable distance between a measured phase and its snapped
/// rational value, in turns.
pub const SNAP_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("kernel is not a subgroup")]
    NotASubgroup,
    #[error("kernel is not normal: conjugating element {k} by {g} leaves it")]
    NotNormal { g: usize, k: usize },
    #[error("bad section: {0}")]
    BadSection(String),
    #[error("irreducible system rejected: {0}")]
    BadIrrSystem(String),
    #[error("twisted character of irreducible {irrep} under {g} matches {found} catalogue entries")]
    CharacterMatch { irrep: usize, g: usize, found: usize },
    #[error("averaging for irreducible {irrep} under {g} vanished")]
    AveragingZero { irrep: usize, g: usize },
    #[error("composite deviates from a scalar multiple by {residual:.3e}")]
    NotScalar { residual: f64 },
    #[error("phase {turns} is no closer than {residual:.3e} to any rational of denominator <= {max_denom}")]
    PhaseSnap {
        turns: f64,
        residual: f64,
        max_denom: i64,
    },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Space(#[from] GSpaceError),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Gerbe(#[from] GerbeError),
    #[error(transparent)]
    Cochain(#[from] CochainError),
}

/// A finite group with a normal subgroup and a chosen coset section.
///
/// Cosets are ordered by minimal element, so the identity coset is index 0
/// and the quotient's identity sits at 0 as every group here requires.
#[derive(Debug, Clone)]
pub struct ExtensionData {
    pub ambient: Arc<FiniteGroup>,
    /// Sorted element indices of the kernel inside the ambient group.
    pub kernel: Vec<usize>,
    /// The kernel with its own multiplication table; local index i is
    /// `kernel[i]`.
    pub kernel_group: Arc<FiniteGroup>,
    pub quotient: Arc<FiniteGroup>,
    /// Sorted cosets, ordered by minimal element.
    pub cosets: Vec<Vec<usize>>,
    pub coset_of: Vec<usize>,
    /// section[a] is an ambient element of coset a; section[0] = identity.
    pub section: Vec<usize>,
}

impl ExtensionData {
    /// Position of an ambient element inside the kernel list.
    pub fn kernel_index(&self, e: usize) -> Option<usize> {
        self.kernel.binary_search(&e).ok()
    }

    /// s(g₂)·s(g₁)·s(g₂g₁)⁻¹, always a kernel element.
    pub fn factor_set(&self, g2: usize, g1: usize) -> usize {
        let e = &self.ambient;
        let s21 = self.section[self.quotient.mul(g2, g1)];
        e.mul(e.mul(self.section[g2], self.section[g1]), e.inv(s21))
    }
}

pub fn extension_data(
    ambient: Arc<FiniteGroup>,
    kernel_elements: &[usize],
    section: Option<&[usize]>,
) -> Result<ExtensionData, ExtractError> {
    let mut kernel: Vec<usize> = kernel_elements.to_vec();
    kernel.sort_unstable();
    kernel.dedup();
    if !ambient.is_subgroup(&kernel) {
        return Err(ExtractError::NotASubgroup);
    }
    let mut member = vec![false; ambient.order];
    for &k in &kernel {
        member[k] = true;
    }
    for g in ambient.elements() {
        for &k in &kernel {
            if !member[ambient.conj(g, k)] {
                return Err(ExtractError::NotNormal { g, k });
            }
        }
    }

    let mut coset_of = vec![usize::MAX; ambient.order];
    let mut cosets: Vec<Vec<usize>> = Vec::new();
    for x in ambient.elements() {
        if coset_of[x] != usize::MAX {
            continue;
        }
        let mut coset: Vec<usize> = kernel.iter().map(|&k| ambient.mul(x, k)).collect();
        coset.sort_unstable();
        for &y in &coset {
            coset_of[y] = cosets.len();
        }
        cosets.push(coset);
    }
    let mult: Vec<Vec<usize>> = cosets
        .iter()
        .map(|a| {
            cosets
                .iter()
                .map(|b| coset_of[ambient.mul(a[0], b[0])])
                .collect()
        })
        .collect();
    let quotient = Arc::new(build_group(&GroupSpec::Table { name: None, mult })?);

    let section = match section {
        None => cosets.iter().map(|c| c[0]).collect(),
        Some(s) => {
            if s.len() != quotient.order {
                return Err(ExtractError::BadSection(format!(
                    "expected {} entries, got {}",
                    quotient.order,
                    s.len()
                )));
            }
            for (a, &e) in s.iter().enumerate() {
                if e >= ambient.order || coset_of[e] != a {
                    return Err(ExtractError::BadSection(format!(
                        "entry {a} = {e} does not represent coset {a}"
                    )));
                }
            }
            if s[0] != ambient.identity {
                return Err(ExtractError::BadSection(
                    "section must send the identity coset to the identity".into(),
                ));
            }
            s.to_vec()
        }
    };

    let local: Vec<Vec<usize>> = kernel
        .iter()
        .map(|&a| {
            kernel
                .iter()
                .map(|&b| {
                    kernel
                        .binary_search(&ambient.mul(a, b))
                        .expect("kernel is closed")
                })
                .collect()
        })
        .collect();
    let kernel_group = Arc::new(build_group(&GroupSpec::Table {
        name: None,
        mult: local,
    })?);

    Ok(ExtensionData {
        ambient,
        kernel,
        kernel_group,
        quotient,
        cosets,
        coset_of,
        section,
    })
}

/// A complete set of irreducible unitary representations of one group,
/// indexed locally: reps[i][k] is a dims[i]×dims[i] matrix.
#[derive(Debug, Clone)]
pub struct IrrSystem {
    pub group: Arc<FiniteGroup>,
    pub reps: Vec<Vec<CMat>>,
    pub dims: Vec<usize>,
    pub characters: Vec<Vec<Complex64>>,
    pub tol: f64,
}

/// Compute the irreducibles of the kernel by splitting its regular module.
pub fn irr_system(group: &Arc<FiniteGroup>, seed: u64) -> Result<IrrSystem, ExtractError> {
    let pt = Arc::new(build_gset(group.clone(), &GSetSpec::Point)?);
    let gerbe = Arc::new(make_gerbe(
        pt.clone(),
        Cochain::zero(pt, 2),
        vec![Rational64::from_integer(1)],
    )?);
    let blocks = irreducible_bundles(&gerbe, seed, DEFAULT_TOL)?;
    let reps: Vec<Vec<CMat>> = blocks
        .iter()
        .map(|b| (0..group.order).map(|k| b.maps[k][0].clone()).collect())
        .collect();
    let sys = IrrSystem {
        group: group.clone(),
        dims: blocks.iter().map(|b| b.dims[0]).collect(),
        characters: reps
            .iter()
            .map(|r| r.iter().map(|m| m.diagonal().iter().sum()).collect())
            .collect(),
        reps,
        tol: DEFAULT_TOL,
    };
    validate_irr_system(&sys)?;
    Ok(sys)
}

/// Shape, homomorphism and unitarity of every representation, character
/// orthonormality, and the dimension count Σ dims² = |K|.
pub fn validate_irr_system(sys: &IrrSystem) -> Result<(), ExtractError> {
    let n = sys.group.order;
    let m = sys.reps.len();
    if sys.dims.len() != m || sys.characters.len() != m {
        return Err(ExtractError::BadIrrSystem("field lengths disagree".into()));
    }
    if sys.dims.iter().map(|d| d * d).sum::<usize>() != n {
        return Err(ExtractError::BadIrrSystem(format!(
            "squared dimensions sum to {}, group order is {n}",
            sys.dims.iter().map(|d| d * d).sum::<usize>()
        )));
    }
    for (i, r) in sys.reps.iter().enumerate() {
        let d = sys.dims[i];
        if r.len() != n || r.iter().any(|mat| mat.nrows() != d || mat.ncols() != d) {
            return Err(ExtractError::BadIrrSystem(format!(
                "representation {i} has the wrong shape"
            )));
        }
        if sys.characters[i].len() != n {
            return Err(ExtractError::BadIrrSystem(format!(
                "character {i} has the wrong length"
            )));
        }
        for k in 0..n {
            let u = &r[k];
            let hom = max_abs(&(u * &r[sys.group.inv(k)] - CMat::identity(d, d)));
            if hom > sys.tol || max_abs(&(u * u.adjoint() - CMat::identity(d, d))) > sys.tol {
                return Err(ExtractError::BadIrrSystem(format!(
                    "representation {i} is not a unitary homomorphism at {k}"
                )));
            }
            let chi: Complex64 = u.diagonal().iter().sum();
            if (chi - sys.characters[i][k]).norm() > sys.tol {
                return Err(ExtractError::BadIrrSystem(format!(
                    "character {i} disagrees with its representation at {k}"
                )));
            }
        }
        for k2 in 0..n {
            for k1 in 0..n {
                if max_abs(&(&r[k2] * &r[k1] - &r[sys.group.mul(k2, k1)])) > sys.tol {
                    return Err(ExtractError::BadIrrSystem(format!(
                        "representation {i} fails multiplicativity at ({k2},{k1})"
                    )));
                }
            }
        }
    }
    for i in 0..m {
        for j in 0..m {
            let mut ip = Complex64::ZERO;
            for k in 0..n {
                ip += sys.characters[i][k].conj() * sys.characters[j][k];
            }
            ip /= n as f64;
            let want = if i == j { 1.0 } else { 0.0 };
            if (ip - want).norm() > 1e-6 {
                return Err(ExtractError::BadIrrSystem(format!(
                    "characters {i},{j} have inner product {ip}"
                )));
            }
        }
    }
    Ok(())
}

/// Kernel-local permutation k ↦ s(g)⁻¹ k s(g).
fn twist_perm(ext: &ExtensionData, g: usize) -> Vec<usize> {
    let e = &ext.ambient;
    let s = ext.section[g];
    ext.kernel
        .iter()
        .map(|&k| {
            ext.kernel_index(e.mul(e.mul(e.inv(s), k), s))
                .expect("kernel is normal")
        })
        .collect()
}

/// The quotient's action on the irreducible classes of the kernel, found by
/// matching the conjugation-twisted characters against the catalogue.
pub fn action_on_irr(ext: &ExtensionData, irr: &IrrSystem) -> Result<Arc<GSet>, ExtractError> {
    if irr.group.mult != ext.kernel_group.mult {
        return Err(ExtractError::BadIrrSystem(
            "irreducible system belongs to a different kernel".into(),
        ));
    }
    let n = ext.kernel.len();
    let m = irr.reps.len();
    let mut act = Vec::with_capacity(ext.quotient.order);
    for g in ext.quotient.elements() {
        let perm = twist_perm(ext, g);
        let mut row = Vec::with_capacity(m);
        for i in 0..m {
            let twisted: Vec<Complex64> = (0..n).map(|k| irr.characters[i][perm[k]]).collect();
            let matches: Vec<usize> = (0..m)
                .filter(|&j| {
                    let d2: f64 = (0..n)
                        .map(|k| (irr.characters[j][k] - twisted[k]).norm_sqr())
                        .sum();
                    d2 < 1e-6 * n as f64
                })
                .collect();
            match matches[..] {
                [j] => row.push(j),
                _ => {
                    return Err(ExtractError::CharacterMatch {
                        irrep: i,
                        g,
                        found: matches.len(),
                    })
                }
            }
        }
        act.push(row);
    }
    Ok(Arc::new(validate_gset(ext.quotient.clone(), act)?))
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn random_matrix(rng: &mut rand_chacha::ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

/// Unitary u with u·ρ_{g·i}(k) = ρ_i(s(g)⁻¹ k s(g))·u for all k, produced by
/// averaging a seeded random matrix; the entry of largest modulus is rotated
/// to the positive real axis so the result is canonical given the seed.
fn average_intertwiner(
    ext: &ExtensionData,
    irr: &IrrSystem,
    act: &GSet,
    g: usize,
    i: usize,
    seed: u64,
) -> Result<CMat, ExtractError> {
    let n = ext.kernel.len();
    let d = irr.dims[i];
    let j = act.apply(g, i);
    debug_assert_eq!(irr.dims[j], d, "twisting preserves dimension");
    let perm = twist_perm(ext, g);
    let mut rng =
        rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ ((g as u64) << 32) ^ ((i as u64) << 16));
    for _ in 0..4 {
        let a = random_matrix(&mut rng, d, d);
        let mut u0 = CMat::zeros(d, d);
        for k in 0..n {
            u0 += &irr.reps[i][perm[k]] * &a * irr.reps[j][k].adjoint();
        }
        u0 /= Complex64::from(n as f64);
        let gram = u0.adjoint() * &u0;
        let lambda = gram.diagonal().iter().sum::<Complex64>().re / d as f64;
        if lambda < 1e-10 {
            continue;
        }
        let residual = max_abs(&(gram - CMat::identity(d, d) * Complex64::from(lambda)));
        if residual > irr.tol * (1.0 + lambda) {
            return Err(ExtractError::NotScalar { residual });
        }
        let mut u = u0 / Complex64::from(lambda.sqrt());
        let (mut best, mut best_norm) = ((0, 0), -1.0);
        for r in 0..d {
            for c in 0..d {
                if u[(r, c)].norm() > best_norm {
                    best_norm = u[(r, c)].norm();
                    best = (r, c);
                }
            }
        }
        let top = u[best];
        u *= top.conj() / top.norm();
        return Ok(u);
    }
    Err(ExtractError::AveragingZero { irrep: i, g })
}

fn snap(turns: f64, max_denom: i64) -> (Phase, f64) {
    let mut best = (Phase::ZERO, f64::INFINITY);
    for q in 1..=max_denom {
        let p = (turns * q as f64).round();
        let err = (turns - p / q as f64).abs();
        if err < best.1 {
            best = (Phase::from_frac(p as i64, q), err);
        }
    }
    best
}

/// The gerbe an extension induces on the irreducible classes of its kernel.
///
/// u(g,i) maps the catalogue copy at g·i into the s(g)-twist of copy i; the
/// composite ρ_i(s⁻¹φs)·u(g₁,i)·u(g₂,g₁·i) with s = s(g₂g₁) and
/// φ = s(g₂)s(g₁)s(g₂g₁)⁻¹ intertwines exactly like u(g₂g₁,i), so it is a
/// unit scalar times it. Reading that scalar at the largest entry and
/// snapping to a rational of denominator ≤ 2|E| gives c_i(g₂,g₁); the
/// normalization u(e,i) = 1 makes c exactly normalized, and the associativity
/// of the three-fold composite is the cocycle law the construction then
/// certifies. The metric weighs point i by dims[i]/|K|.
pub fn extract_gerbe(
    ext: &ExtensionData,
    irr: &IrrSystem,
    seed: u64,
) -> Result<Gerbe, ExtractError> {
    let carrier = action_on_irr(ext, irr)?;
    let m = irr.reps.len();
    let nq = ext.quotient.order;
    let max_denom = 2 * ext.ambient.order as i64;

    let mut u: Vec<Vec<CMat>> = Vec::with_capacity(nq);
    u.push((0..m).map(|i| CMat::identity(irr.dims[i], irr.dims[i])).collect());
    for g in 1..nq {
        let row = (0..m)
            .map(|i| average_intertwiner(ext, irr, &carrier, g, i, seed))
            .collect::<Result<Vec<_>, _>>()?;
        u.push(row);
    }

    let mut values = vec![Phase::ZERO; m * nq * nq];
    for i in 0..m {
        for g2 in 1..nq {
            for g1 in 1..nq {
                let g21 = ext.quotient.mul(g2, g1);
                let s21 = ext.section[g21];
                let phi = ext.factor_set(g2, g1);
                let conj = ext
                    .ambient
                    .mul(ext.ambient.mul(ext.ambient.inv(s21), phi), s21);
                let mk = ext.kernel_index(conj).expect("kernel is normal");
                let j1 = carrier.apply(g1, i);
                let d = &irr.reps[i][mk] * &u[g1][i] * &u[g2][j1];
                let target = &u[g21][i];
                let (mut best, mut best_norm) = ((0, 0), -1.0);
                for r in 0..target.nrows() {
                    for c in 0..target.ncols() {
                        if target[(r, c)].norm() > best_norm {
                            best_norm = target[(r, c)].norm();
                            best = (r, c);
                        }
                    }
                }
                let lambda = d[best] / target[best];
                let residual = max_abs(&(&d - target * lambda));
                if residual > 1e-6 {
                    return Err(ExtractError::NotScalar { residual });
                }
                let turns = lambda.arg() / std::f64::consts::TAU;
                let (phase, err) = snap(turns, max_denom);
                if err > SNAP_TOL {
                    return Err(ExtractError::PhaseSnap {
                        turns,
                        residual: err,
                        max_denom,
                    });
                }
                values[(i * nq + g2) * nq + g1] = phase;
            }
        }
    }

    let cocycle = Cochain::from_values(carrier.clone(), 2, values)?;
    let metric = (0..m)
        .map(|i| Rational64::new(irr.dims[i] as i64, ext.kernel.len() as i64))
        .collect();
    Ok(make_gerbe(carrier, cocycle, metric)?)
}

/// extension.json payload.
#[derive(Debug, Serialize, Deserialize)]
pub struct ExtensionFile {
    #[serde(rename = "E")]
    pub ambient: serde_json::Value,
    #[serde(rename = "K")]
    pub kernel: Vec<usize>,
    #[serde(default)]
    pub section: Option<Vec<usize>>,
}

pub fn extension_from_json(text: &str) -> Result<ExtensionData, String> {
    let file: ExtensionFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let ambient = Arc::new(build_group_from_json(&file.ambient.to_string())?);
    extension_data(ambient, &file.kernel, file.section.as_deref()).map_err(|e| e.to_string())
}
