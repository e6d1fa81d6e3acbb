//! Twisted unitary equivariant vector bundles over a gerbe, their characters
//! as flat sections over the loop groupoid, and a numeric splitting of the
//! twisted groupoid algebra into irreducibles.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cochain::{check_cocycle, transgress, Cochain, CochainError, Phase};
use crate::gerbe::Gerbe;
use crate::gspace::{loop_groupoid, same_gset, GSpaceError, LoopGroupoid, LoopPoint};

pub type CMat = DMatrix<Complex64>;

pub const DEFAULT_TOL: f64 = 1e-8;
/// Cap on |X|·|G| for the algebra split.
pub const DEFAULT_ALGEBRA_BOUND: usize = 256;

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("map table must be |G| rows of |X| matrices")]
    BadMapShape,
    #[error("dims must list one entry per point")]
    BadDimsLength,
    #[error("bundle fails validation: {0:?}")]
    Invalid(BundleWitness),
    #[error("twisting cochain does not live on the loop groupoid (degree 1)")]
    BadTwist,
    #[error("twisting cochain fails the cocycle law")]
    TwistNotCocycle,
    #[error("flat-section methods disagree: components {component}, integral {integral}, nullspace {numeric}")]
    MethodsDisagree {
        component: usize,
        integral: usize,
        numeric: usize,
    },
    #[error("algebra dimension {0} exceeds bound {1}")]
    AlgebraTooLarge(usize, usize),
    #[error("block split unstable at this tolerance; retry with a different seed ({0})")]
    SplitUnstable(String),
    #[error("bundles live over different gerbes")]
    GerbeMismatch,
    #[error(transparent)]
    Space(#[from] GSpaceError),
    #[error(transparent)]
    Cochain(#[from] CochainError),
}

#[derive(Debug, Clone)]
pub struct TwistedBundle {
    pub gerbe: Arc<Gerbe>,
    pub dims: Vec<usize>,
    /// maps[g][x] = Ê(g ← x), a dims[g·x] × dims[x] matrix.
    pub maps: Vec<Vec<CMat>>,
    pub tol: f64,
}

/// First violation found, scanning identity, unitarity, functoriality, then
/// orbit-dimension constancy, each in index order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum BundleWitness {
    Shape { x: usize, g: usize },
    Identity { x: usize, residual: f64 },
    Unitarity { x: usize, g: usize, residual: f64 },
    Functoriality { x: usize, g2: usize, g1: usize, residual: f64 },
    OrbitDims { x: usize, y: usize },
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BundleReport {
    pub identity_residual: f64,
    pub unitarity_residual: f64,
    pub functoriality_residual: f64,
    pub pass: bool,
    pub witness: Option<BundleWitness>,
}

fn unit(p: Phase) -> Complex64 {
    p.to_complex()
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl TwistedBundle {
    pub fn gset(&self) -> &crate::gspace::GSet {
        &self.gerbe.gset
    }

    pub fn map(&self, g: usize, x: usize) -> &CMat {
        &self.maps[g][x]
    }
}

/// All-ones line bundle; valid over gerbes with zero cocycle.
pub fn trivial_line_bundle(gerbe: Arc<Gerbe>) -> TwistedBundle {
    let n = gerbe.group().order;
    let size = gerbe.size();
    let one = CMat::from_element(1, 1, Complex64::new(1.0, 0.0));
    TwistedBundle {
        gerbe,
        dims: vec![1; size],
        maps: vec![vec![one; size]; n],
        tol: DEFAULT_TOL,
    }
}

pub fn validate_bundle(e: &TwistedBundle, tol: f64) -> Result<BundleReport, BundleError> {
    let gset = &e.gerbe.gset;
    let n = gset.group.order;
    if e.dims.len() != gset.size {
        return Err(BundleError::BadDimsLength);
    }
    if e.maps.len() != n || e.maps.iter().any(|row| row.len() != gset.size) {
        return Err(BundleError::BadMapShape);
    }
    for g in 0..n {
        for x in 0..gset.size {
            let m = &e.maps[g][x];
            if m.nrows() != e.dims[gset.apply(g, x)] || m.ncols() != e.dims[x] {
                return Err(BundleError::Invalid(BundleWitness::Shape { x, g }));
            }
        }
    }

    let mut identity_residual: f64 = 0.0;
    let mut unitarity_residual: f64 = 0.0;
    let mut functoriality_residual: f64 = 0.0;
    let mut witness = None;

    for x in 0..gset.size {
        let eye = CMat::identity(e.dims[x], e.dims[x]);
        let r = max_abs(&(&e.maps[0][x] - &eye));
        identity_residual = identity_residual.max(r);
        if r > tol && witness.is_none() {
            witness = Some(BundleWitness::Identity { x, residual: r });
        }
    }
    for g in 0..n {
        for x in 0..gset.size {
            let m = &e.maps[g][x];
            let eye = CMat::identity(m.ncols(), m.ncols());
            let r = max_abs(&(m.adjoint() * m - eye));
            unitarity_residual = unitarity_residual.max(r);
            if r > tol && witness.is_none() {
                witness = Some(BundleWitness::Unitarity { x, g, residual: r });
            }
        }
    }
    for g2 in 0..n {
        for g1 in 0..n {
            for x in 0..gset.size {
                let lhs = &e.maps[g2][gset.apply(g1, x)] * &e.maps[g1][x];
                let phase = unit(e.gerbe.cocycle.at2(x, g2, g1));
                let rhs = &e.maps[gset.group.mul(g2, g1)][x] * phase;
                let r = max_abs(&(lhs - rhs));
                functoriality_residual = functoriality_residual.max(r);
                if r > tol && witness.is_none() {
                    witness = Some(BundleWitness::Functoriality { x, g2, g1, residual: r });
                }
            }
        }
    }
    if witness.is_none() {
        'orbits: for orbit in &gset.orbits {
            let d = e.dims[orbit[0]];
            for &y in orbit {
                if e.dims[y] != d {
                    witness = Some(BundleWitness::OrbitDims { x: orbit[0], y });
                    break 'orbits;
                }
            }
        }
    }
    Ok(BundleReport {
        identity_residual,
        unitarity_residual,
        functoriality_residual,
        pass: witness.is_none(),
        witness,
    })
}

/// χ(x,g) = Tr Ê(g ← x) per loop object, unconjugated: this is the variant
/// flat for +τ(c). Set `conjugate` for the variant flat for −τ(c).
pub fn twisted_character(
    e: &TwistedBundle,
    lam: &LoopGroupoid,
    conjugate: bool,
) -> Result<Vec<Complex64>, BundleError> {
    if !same_gset(&lam.base, &e.gerbe.gset) {
        return Err(BundleError::BadTwist);
    }
    lam.labels
        .iter()
        .map(|label| {
            let LoopPoint::One { x, g } = *label else {
                return Err(BundleError::BadTwist);
            };
            let tr: Complex64 = e.maps[g][x].diagonal().iter().sum();
            Ok(if conjugate { tr.conj() } else { tr })
        })
        .collect()
}

/// Groupoid inner product of two sections over the same loop groupoid:
/// (s, s′) = Σ conj(s)·s′ / |G|.
pub fn section_inner(lam: &LoopGroupoid, a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let total: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    total / lam.points.group.order as f64
}

/// Blocks concatenate in argument order.
pub fn direct_sum(a: &TwistedBundle, b: &TwistedBundle) -> Result<TwistedBundle, BundleError> {
    if !same_gset(&a.gerbe.gset, &b.gerbe.gset)
        || a.gerbe.cocycle.values != b.gerbe.cocycle.values
    {
        return Err(BundleError::GerbeMismatch);
    }
    let gset = &a.gerbe.gset;
    let dims: Vec<usize> = (0..gset.size).map(|x| a.dims[x] + b.dims[x]).collect();
    let maps = (0..gset.group.order)
        .map(|g| {
            (0..gset.size)
                .map(|x| {
                    let y = gset.apply(g, x);
                    let mut m = CMat::zeros(dims[y], dims[x]);
                    m.view_mut((0, 0), (a.dims[y], a.dims[x]))
                        .copy_from(&a.maps[g][x]);
                    m.view_mut((a.dims[y], a.dims[x]), (b.dims[y], b.dims[x]))
                        .copy_from(&b.maps[g][x]);
                    m
                })
                .collect()
        })
        .collect();
    Ok(TwistedBundle {
        gerbe: a.gerbe.clone(),
        dims,
        maps,
        tol: a.tol.max(b.tol),
    })
}

/// Basis of flat sections, one per flat component, exact phases evaluated to
/// complex values.
#[derive(Debug, Clone)]
pub struct FlatSectionSpace {
    pub dim: usize,
    /// Section values per loop object; support is a single orbit.
    pub basis: Vec<Vec<Complex64>>,
    /// Orbit index of each basis section.
    pub flat_orbits: Vec<usize>,
}

/// Dimension of the flat sections of the line bundle twisted by α, computed
/// three ways: orbit components, exact transgression integral, numeric
/// nullspace. The methods must agree.
pub fn flat_sections(lam: &LoopGroupoid, alpha: &Cochain) -> Result<FlatSectionSpace, BundleError> {
    if alpha.degree != 1 || !same_gset(&alpha.carrier, &lam.points) {
        return Err(BundleError::BadTwist);
    }
    check_cocycle(alpha).map_err(|_| BundleError::TwistNotCocycle)?;
    let points = &lam.points;
    let n = points.group.order;

    // Components: an orbit is flat iff α restricts trivially to the
    // automorphism group of its representative.
    let mut flat_orbits = Vec::new();
    for (idx, orbit) in points.orbits.iter().enumerate() {
        let rep = orbit[0];
        if points.stabilizers[rep]
            .iter()
            .all(|&h| alpha.at1(rep, h).is_zero())
        {
            flat_orbits.push(idx);
        }
    }
    let component = flat_orbits.len();

    // Integral of the transgressed function over the next loop groupoid.
    // Per object the inner sum runs over a coset structure of a finite
    // cyclic subgroup of U(1): it is exactly |Aut| when every phase is zero
    // and exactly zero otherwise (geometric series), so the integral stays
    // rational.
    let next = loop_groupoid(points, 1)?;
    let tau = transgress(alpha, &next)?;
    let mut per_object_sum = vec![(0usize, true); points.size];
    for (i, label) in next.labels.iter().enumerate() {
        let LoopPoint::One { x, .. } = *label else { unreachable!() };
        per_object_sum[x].0 += 1;
        per_object_sum[x].1 &= tau.at0(i).is_zero();
    }
    let total: i64 = per_object_sum
        .iter()
        .map(|&(count, all_zero)| if all_zero { count as i64 } else { 0 })
        .sum();
    let integral = Rational64::new(total, n as i64);
    if !integral.is_integer() {
        return Err(BundleError::SplitUnstable(format!(
            "transgression integral {integral} is not an integer"
        )));
    }
    let integral = integral.to_integer() as usize;

    // Numeric nullspace of the flatness system s(h·o) = e(α(h←o))·s(o).
    let rows = points.size * n;
    let mut m = CMat::zeros(rows, points.size);
    for o in 0..points.size {
        for h in 0..n {
            let row = o * n + h;
            m[(row, points.apply(h, o))] += Complex64::new(1.0, 0.0);
            m[(row, o)] -= unit(alpha.at1(o, h));
        }
    }
    let h = m.adjoint() * &m;
    let eig = h.symmetric_eigen();
    let lmax = eig.eigenvalues.iter().fold(0.0_f64, |a, &b| a.max(b));
    let null_tol = 1e-8 * lmax.max(1.0);
    let numeric = eig.eigenvalues.iter().filter(|&&l| l < null_tol).count();

    if component != integral || component != numeric {
        return Err(BundleError::MethodsDisagree {
            component,
            integral,
            numeric,
        });
    }

    // Basis: transport 1 at the representative along the action; consistent
    // because the restricted character is trivial on flat orbits.
    let mut basis = Vec::with_capacity(component);
    for &idx in &flat_orbits {
        let orbit = &points.orbits[idx];
        let rep = orbit[0];
        let mut section = vec![Complex64::zero(); points.size];
        for k in 0..n {
            let target = points.apply(k, rep);
            if section[target] == Complex64::zero() {
                section[target] = unit(alpha.at1(rep, k));
            }
        }
        basis.push(section);
    }
    Ok(FlatSectionSpace {
        dim: component,
        basis,
        flat_orbits,
    })
}

pub fn flat_section_dim(lam: &LoopGroupoid, alpha: &Cochain) -> Result<usize, BundleError> {
    Ok(flat_sections(lam, alpha)?.dim)
}

/// Index bookkeeping for the twisted groupoid algebra in its arrow basis.
/// Arrow (h ← y) has index y·|G| + h and grade (target) h·y; each grade
/// holds exactly |G| arrows.
struct ArrowAlgebra {
    n: usize,
    size: usize,
    /// Arrow indices with target x, increasing.
    grade: Vec<Vec<usize>>,
    /// Position of each arrow inside its grade.
    pos: Vec<usize>,
}

impl ArrowAlgebra {
    fn new(gset: &crate::gspace::GSet) -> ArrowAlgebra {
        let n = gset.group.order;
        let size = gset.size;
        let mut grade = vec![Vec::new(); size];
        let mut pos = vec![0usize; size * n];
        for y in 0..size {
            for h in 0..n {
                let a = y * n + h;
                let target = gset.apply(h, y);
                pos[a] = grade[target].len();
                grade[target].push(a);
            }
        }
        ArrowAlgebra { n, size, grade, pos }
    }
}

/// The regular twisted bundle: fibers spanned by the arrows into each point,
/// arrows acting by twisted left translation. Every fiber has dimension |G|.
pub fn regular_twisted_bundle(gerbe: Arc<Gerbe>) -> TwistedBundle {
    let gset = gerbe.gset.clone();
    let alg = ArrowAlgebra::new(&gset);
    let n = alg.n;
    let maps: Vec<Vec<CMat>> = (0..n)
        .map(|g| {
            (0..alg.size)
                .map(|x| {
                    let gx = gset.apply(g, x);
                    let mut m = CMat::zeros(n, n);
                    for (j, &a) in alg.grade[x].iter().enumerate() {
                        let (y, h) = (a / n, a % n);
                        let target_arrow = y * n + gset.group.mul(g, h);
                        debug_assert_eq!(gset.apply(gset.group.mul(g, h), y), gx);
                        m[(alg.pos[target_arrow], j)] = unit(gerbe.cocycle.at2(y, g, h));
                    }
                    m
                })
                .collect()
        })
        .collect();
    TwistedBundle {
        gerbe,
        dims: vec![n; alg.size],
        maps,
        tol: DEFAULT_TOL,
    }
}

fn gram_schmidt(columns: Vec<DVector<Complex64>>, rank_tol: f64) -> Vec<DVector<Complex64>> {
    let mut basis: Vec<DVector<Complex64>> = Vec::new();
    for mut v in columns {
        for b in &basis {
            let coeff = b.dotc(&v);
            v -= b * coeff;
        }
        // Second pass for numerical orthogonality.
        for b in &basis {
            let coeff = b.dotc(&v);
            v -= b * coeff;
        }
        let norm = v.norm();
        if norm > rank_tol {
            basis.push(v / Complex64::new(norm, 0.0));
        }
    }
    basis
}

/// Split the twisted groupoid algebra into irreducible twisted bundles via
/// the eigenspaces of a seeded self-adjoint element of the commutant (right
/// translations) acting on the regular module.
pub fn irreducible_bundles(
    gerbe: &Arc<Gerbe>,
    seed: u64,
    tol: f64,
) -> Result<Vec<TwistedBundle>, BundleError> {
    irreducible_bundles_bounded(gerbe, seed, tol, DEFAULT_ALGEBRA_BOUND)
}

pub fn irreducible_bundles_bounded(
    gerbe: &Arc<Gerbe>,
    seed: u64,
    tol: f64,
    bound: usize,
) -> Result<Vec<TwistedBundle>, BundleError> {
    let gset = &gerbe.gset;
    let n = gset.group.order;
    let total = gset.size * n;
    if total > bound {
        return Err(BundleError::AlgebraTooLarge(total, bound));
    }
    let alg = ArrowAlgebra::new(gset);
    let c = &gerbe.cocycle;

    // Right translation by arrow (k ← z): (h ← y) ↦ e(c_z(h,k))·(hk ← z)
    // when y = k·z. Commutes with the left action.
    let mut t = CMat::zeros(total, total);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for z in 0..gset.size {
        for k in 0..n {
            let w = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let y = gset.apply(k, z);
            for h in 0..n {
                let src = y * n + h;
                let dst = z * n + gset.group.mul(h, k);
                t[(dst, src)] += w * unit(c.at2(z, h, k));
            }
        }
    }
    let t = &t + t.adjoint();

    let eig = t.symmetric_eigen();
    let mut order: Vec<usize> = (0..total).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let scale = order
        .iter()
        .map(|&i| eig.eigenvalues[i].abs())
        .fold(1.0_f64, f64::max);
    let gap = 1e-7 * scale;

    // Cluster eigenvalues; each cluster spans a left-submodule.
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match clusters.last_mut() {
            Some(cl)
                if (eig.eigenvalues[i] - eig.eigenvalues[*cl.last().unwrap()]).abs() < gap =>
            {
                cl.push(i)
            }
            _ => clusters.push(vec![i]),
        }
    }

    let lam = loop_groupoid(gset, 1)?;
    let tau = transgress(c, &lam)?;
    let expected = flat_sections(&lam, &tau)?.dim;

    let mut bundles: Vec<TwistedBundle> = Vec::new();
    let mut characters: Vec<Vec<Complex64>> = Vec::new();
    for cluster in &clusters {
        // Orthonormal basis of each graded piece of the eigenspace.
        let mut graded_basis: Vec<Vec<DVector<Complex64>>> = Vec::with_capacity(gset.size);
        for x in 0..gset.size {
            let cols: Vec<DVector<Complex64>> = cluster
                .iter()
                .map(|&ei| {
                    DVector::from_iterator(
                        n,
                        alg.grade[x].iter().map(|&a| eig.eigenvectors[(a, ei)]),
                    )
                })
                .collect();
            graded_basis.push(gram_schmidt(cols, 1e-6));
        }
        let dims: Vec<usize> = graded_basis.iter().map(|b| b.len()).collect();
        if dims.iter().sum::<usize>() != cluster.len() {
            return Err(BundleError::SplitUnstable(format!(
                "cluster of size {} split into grades {:?}",
                cluster.len(),
                dims
            )));
        }
        let basis_mats: Vec<CMat> = graded_basis
            .iter()
            .map(|cols| {
                let mut m = CMat::zeros(n, cols.len());
                for (j, col) in cols.iter().enumerate() {
                    m.column_mut(j).copy_from(col);
                }
                m
            })
            .collect();
        let maps: Vec<Vec<CMat>> = (0..n)
            .map(|g| {
                (0..gset.size)
                    .map(|x| {
                        let gx = gset.apply(g, x);
                        // Left translation in grade-local coordinates.
                        let mut l = CMat::zeros(n, n);
                        for (j, &a) in alg.grade[x].iter().enumerate() {
                            let (y, h) = (a / n, a % n);
                            let target_arrow = y * n + gset.group.mul(g, h);
                            l[(alg.pos[target_arrow], j)] = unit(c.at2(y, g, h));
                        }
                        basis_mats[gx].adjoint() * l * &basis_mats[x]
                    })
                    .collect()
            })
            .collect();
        let bundle = TwistedBundle {
            gerbe: gerbe.clone(),
            dims,
            maps,
            tol,
        };
        let report = validate_bundle(&bundle, tol)?;
        if !report.pass {
            return Err(BundleError::SplitUnstable(format!(
                "extracted block fails validation: {:?}",
                report.witness
            )));
        }
        let chi = twisted_character(&bundle, &lam, false)?;
        let norm = section_inner(&lam, &chi, &chi);
        if (norm.re - 1.0).abs() > 1e-6 || norm.im.abs() > 1e-6 {
            return Err(BundleError::SplitUnstable(format!(
                "block character has norm² {norm}, expected 1"
            )));
        }
        let duplicate = characters.iter().any(|prev| {
            let ip = section_inner(&lam, prev, &chi);
            ip.norm() > 0.5
        });
        if !duplicate {
            bundles.push(bundle);
            characters.push(chi);
        }
    }

    if bundles.len() != expected {
        return Err(BundleError::SplitUnstable(format!(
            "found {} non-isomorphic blocks, flat-section count expects {}",
            bundles.len(),
            expected
        )));
    }
    for i in 0..characters.len() {
        for j in 0..i {
            let ip = section_inner(&lam, &characters[i], &characters[j]);
            if ip.norm() > 1e-6 {
                return Err(BundleError::SplitUnstable(format!(
                    "characters {j} and {i} are not orthogonal: {ip}"
                )));
            }
        }
    }
    Ok(bundles)
}

/// bundle.json payload. Matrices are rows of [re, im] pairs; map keys are
/// "x,g".
#[derive(Debug, Serialize, Deserialize)]
pub struct BundleFile {
    pub gerbe: serde_json::Value,
    pub dims: Vec<usize>,
    pub maps: BTreeMap<String, Vec<Vec<[f64; 2]>>>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

pub fn bundle_from_json(text: &str) -> Result<TwistedBundle, String> {
    let file: BundleFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let gerbe = Arc::new(crate::gerbe::gerbe_from_json(&file.gerbe.to_string())?);
    let gset = &gerbe.gset;
    let n = gset.group.order;
    if file.dims.len() != gset.size {
        return Err("dims length must equal the number of points".into());
    }
    let mut maps: Vec<Vec<CMat>> = (0..n)
        .map(|g| {
            (0..gset.size)
                .map(|x| CMat::zeros(file.dims[gset.apply(g, x)], file.dims[x]))
                .collect()
        })
        .collect();
    for (key, rows) in &file.maps {
        let (xs, gs) = key
            .split_once(',')
            .ok_or_else(|| format!("bad map key {key:?}"))?;
        let x: usize = xs.trim().parse().map_err(|_| format!("bad map key {key:?}"))?;
        let g: usize = gs.trim().parse().map_err(|_| format!("bad map key {key:?}"))?;
        if x >= gset.size || g >= n {
            return Err(format!("map key {key:?} out of range"));
        }
        let (nr, nc) = (file.dims[gset.apply(g, x)], file.dims[x]);
        if rows.len() != nr || rows.iter().any(|r| r.len() != nc) {
            return Err(format!("matrix at {key:?} has the wrong shape"));
        }
        let mut m = CMat::zeros(nr, nc);
        for (i, row) in rows.iter().enumerate() {
            for (j, &[re, im]) in row.iter().enumerate() {
                m[(i, j)] = Complex64::new(re, im);
            }
        }
        maps[g][x] = m;
    }
    Ok(TwistedBundle {
        gerbe,
        dims: file.dims,
        maps,
        tol: file.tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cochain::klein_pairing_cocycle;
    use crate::gerbe::{make_gerbe, regular_gerbe, trivial_point_gerbe, Gerbe};
    use crate::grp::{build_group, FiniteGroup, GroupSpec};
    use crate::gspace::{build_gset, GSetSpec};

    fn s3() -> Arc<FiniteGroup> {
        Arc::new(build_group(&GroupSpec::Symmetric(3)).unwrap())
    }

    fn klein() -> Arc<FiniteGroup> {
        Arc::new(
            build_group(&GroupSpec::Product(
                Box::new(GroupSpec::Cyclic(2)),
                Box::new(GroupSpec::Cyclic(2)),
            ))
            .unwrap(),
        )
    }

    fn klein_gerbe() -> Arc<Gerbe> {
        let gset = Arc::new(build_gset(klein(), &GSetSpec::Point).unwrap());
        let c = klein_pairing_cocycle(gset.clone());
        Arc::new(make_gerbe(gset, c, vec![Rational64::from_integer(1)]).unwrap())
    }

    fn coset_gerbe(group: Arc<FiniteGroup>, h: Vec<usize>) -> Arc<Gerbe> {
        let gset = Arc::new(build_gset(group, &GSetSpec::Coset(h)).unwrap());
        let c = Cochain::zero(gset.clone(), 2);
        let metric = vec![Rational64::from_integer(1); gset.size];
        Arc::new(make_gerbe(gset, c, metric).unwrap())
    }

    #[test]
    fn trivial_line_bundle_is_flat() {
        let g = Arc::new(trivial_point_gerbe(s3()));
        let e = trivial_line_bundle(g);
        let report = validate_bundle(&e, DEFAULT_TOL).unwrap();
        assert!(report.pass);
        assert_eq!(report.unitarity_residual, 0.0);
        assert_eq!(report.functoriality_residual, 0.0);
    }

    #[test]
    fn regular_twisted_bundle_passes() {
        for gerbe in [klein_gerbe(), Arc::new(regular_gerbe(s3()))] {
            let e = regular_twisted_bundle(gerbe);
            let report = validate_bundle(&e, DEFAULT_TOL).unwrap();
            assert!(report.pass, "witness {:?}", report.witness);
        }
    }

    #[test]
    fn perturbed_bundle_fails_with_witness() {
        let g = Arc::new(trivial_point_gerbe(s3()));
        let mut e = trivial_line_bundle(g);
        e.maps[2][0][(0, 0)] += Complex64::new(1e-3, 0.0);
        let report = validate_bundle(&e, DEFAULT_TOL).unwrap();
        assert!(!report.pass);
        assert!(matches!(
            report.witness,
            Some(BundleWitness::Unitarity { g: 2, .. })
        ));
    }

    #[test]
    fn character_of_trivial_bundle_is_one() {
        let g = Arc::new(trivial_point_gerbe(s3()));
        let lam = loop_groupoid(&g.gset, 1).unwrap();
        let e = trivial_line_bundle(g);
        let chi = twisted_character(&e, &lam, false).unwrap();
        assert!(chi.iter().all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn character_of_regular_bundle_counts_group() {
        let gerbe = Arc::new(trivial_point_gerbe(s3()));
        let lam = loop_groupoid(&gerbe.gset, 1).unwrap();
        // Regular bundle over BG: fiber C[G] at the point.
        let e = regular_twisted_bundle(gerbe);
        let chi = twisted_character(&e, &lam, false).unwrap();
        for (i, label) in lam.labels.iter().enumerate() {
            let LoopPoint::One { g, .. } = *label else { panic!() };
            let expect = if g == 0 { 6.0 } else { 0.0 };
            assert!((chi[i] - Complex64::new(expect, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn sign_representation_character() {
        let gerbe = Arc::new(trivial_point_gerbe(s3()));
        let lam = loop_groupoid(&gerbe.gset, 1).unwrap();
        // Permutation parity: indices 1,2,5 are the transpositions.
        let sign = |g: usize| -> f64 {
            if [1, 2, 5].contains(&g) {
                -1.0
            } else {
                1.0
            }
        };
        let maps: Vec<Vec<CMat>> = (0..6)
            .map(|g| vec![CMat::from_element(1, 1, Complex64::new(sign(g), 0.0))])
            .collect();
        let e = TwistedBundle {
            gerbe,
            dims: vec![1],
            maps,
            tol: DEFAULT_TOL,
        };
        assert!(validate_bundle(&e, DEFAULT_TOL).unwrap().pass);
        let chi = twisted_character(&e, &lam, false).unwrap();
        for (i, label) in lam.labels.iter().enumerate() {
            let LoopPoint::One { g, .. } = *label else { panic!() };
            assert!((chi[i].re - sign(g)).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_dims_oracles() {
        // Untwisted loops over B S3 count the classes.
        let g = Arc::new(trivial_point_gerbe(s3()));
        let lam = loop_groupoid(&g.gset, 1).unwrap();
        let zero = Cochain::zero(lam.points.clone(), 1);
        assert_eq!(flat_section_dim(&lam, &zero).unwrap(), 3);

        // Transgressed pairing cocycle leaves one flat component.
        let kg = klein_gerbe();
        let lam = loop_groupoid(&kg.gset, 1).unwrap();
        let tau = transgress(&kg.cocycle, &lam).unwrap();
        assert_eq!(flat_section_dim(&lam, &tau).unwrap(), 1);

        // Free action: only the identity loops, one component.
        let reg = Arc::new(regular_gerbe(s3()));
        let lam = loop_groupoid(&reg.gset, 1).unwrap();
        let zero = Cochain::zero(lam.points.clone(), 1);
        assert_eq!(flat_section_dim(&lam, &zero).unwrap(), 1);
    }

    #[test]
    fn flat_basis_sections_are_flat() {
        let kg = klein_gerbe();
        let lam = loop_groupoid(&kg.gset, 1).unwrap();
        let tau = transgress(&kg.cocycle, &lam).unwrap();
        let space = flat_sections(&lam, &tau).unwrap();
        assert_eq!(space.dim, space.basis.len());
        let n = lam.points.group.order;
        for s in &space.basis {
            for o in 0..lam.points.size {
                for h in 0..n {
                    let lhs = s[lam.points.apply(h, o)];
                    let rhs = unit(tau.at1(o, h)) * s[o];
                    assert!((lhs - rhs).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn irreducibles_of_untwisted_s3() {
        let gerbe = Arc::new(trivial_point_gerbe(s3()));
        let irr = irreducible_bundles(&gerbe, 0, DEFAULT_TOL).unwrap();
        let mut dims: Vec<usize> = irr.iter().map(|b| b.dims[0]).collect();
        dims.sort_unstable();
        assert_eq!(dims, vec![1, 1, 2]);
    }

    #[test]
    fn irreducibles_of_twisted_klein_point() {
        let gerbe = klein_gerbe();
        let irr = irreducible_bundles(&gerbe, 0, DEFAULT_TOL).unwrap();
        assert_eq!(irr.len(), 1);
        assert_eq!(irr[0].dims, vec![2]);
    }

    #[test]
    fn irreducible_of_trivial_group() {
        let g = Arc::new(build_group(&GroupSpec::Cyclic(1)).unwrap());
        let gerbe = Arc::new(trivial_point_gerbe(g));
        let irr = irreducible_bundles(&gerbe, 0, DEFAULT_TOL).unwrap();
        assert_eq!(irr.len(), 1);
        assert_eq!(irr[0].dims, vec![1]);
    }

    #[test]
    fn squared_dims_match_stabilizer_order() {
        // Transitive untwisted gerbe with stabilizer H: the algebra is
        // Morita-trivial down to C[H].
        for (h, expect) in [(vec![0usize, 3, 4], 3usize), (vec![0usize, 1], 2)] {
            let gerbe = coset_gerbe(s3(), h);
            let irr = irreducible_bundles(&gerbe, 0, DEFAULT_TOL).unwrap();
            let sum: usize = irr.iter().map(|b| b.dims[0] * b.dims[0]).sum();
            assert_eq!(sum, expect);
        }
        let reg = Arc::new(regular_gerbe(s3()));
        let irr = irreducible_bundles(&reg, 0, DEFAULT_TOL).unwrap();
        assert_eq!(irr.len(), 1);
        assert_eq!(irr[0].dims, vec![1; 6]);
    }

    #[test]
    fn character_gram_is_identity() {
        let gerbes = [
            Arc::new(trivial_point_gerbe(s3())),
            klein_gerbe(),
            coset_gerbe(s3(), vec![0, 3, 4]),
            Arc::new(regular_gerbe(klein())),
        ];
        for gerbe in gerbes {
            let irr = irreducible_bundles(&gerbe, 0, DEFAULT_TOL).unwrap();
            let lam = loop_groupoid(&gerbe.gset, 1).unwrap();
            let chis: Vec<Vec<Complex64>> = irr
                .iter()
                .map(|b| twisted_character(b, &lam, false).unwrap())
                .collect();
            for i in 0..chis.len() {
                for j in 0..chis.len() {
                    let ip = section_inner(&lam, &chis[i], &chis[j]);
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (ip - Complex64::new(expect, 0.0)).norm() < 1e-6,
                        "gram[{i}][{j}] = {ip}"
                    );
                }
            }
        }
    }

    #[test]
    fn characters_flat_for_transgressed_twist() {
        let gerbe = klein_gerbe();
        let lam = loop_groupoid(&gerbe.gset, 1).unwrap();
        let tau = transgress(&gerbe.cocycle, &lam).unwrap();
        let irr = irreducible_bundles(&gerbe, 0, DEFAULT_TOL).unwrap();
        let n = lam.points.group.order;
        for b in &irr {
            let chi = twisted_character(b, &lam, false).unwrap();
            for o in 0..lam.points.size {
                for h in 0..n {
                    let lhs = chi[lam.points.apply(h, o)];
                    let rhs = unit(tau.at1(o, h)) * chi[o];
                    assert!((lhs - rhs).norm() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn direct_sum_adds_characters() {
        let gerbe = Arc::new(trivial_point_gerbe(s3()));
        let lam = loop_groupoid(&gerbe.gset, 1).unwrap();
        let irr = irreducible_bundles(&gerbe, 0, DEFAULT_TOL).unwrap();
        let sum = direct_sum(&irr[0], &irr[1]).unwrap();
        assert!(validate_bundle(&sum, DEFAULT_TOL).unwrap().pass);
        let a = twisted_character(&irr[0], &lam, false).unwrap();
        let b = twisted_character(&irr[1], &lam, false).unwrap();
        let s = twisted_character(&sum, &lam, false).unwrap();
        for i in 0..s.len() {
            assert!((s[i] - a[i] - b[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn bundle_json_round_trip() {
        let text = r#"{
            "gerbe": {
                "gset": {"builtin":"point","group":{"builtin":"cyclic","params":[2]}},
                "metric": ["1"]
            },
            "dims": [1],
            "maps": {
                "0,0": [[[1.0, 0.0]]],
                "0,1": [[[-1.0, 0.0]]]
            },
            "tol": 1e-8
        }"#;
        let e = bundle_from_json(text).unwrap();
        let report = validate_bundle(&e, e.tol).unwrap();
        assert!(report.pass);
        assert_eq!(e.maps[1][0][(0, 0)].re, -1.0);
    }
}
