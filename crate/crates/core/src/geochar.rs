//! The character functor from gerbes to conjugation-equivariant bundles
//! over the group: fibers over fixed-point sets, characters of morphism
//! bundles, hom-dimension integrals, double characters, and the search for
//! non-isomorphic actions the double character cannot tell apart.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Rational64;
use serde::Serialize;
use thiserror::Error;

use crate::bundle::{CMat, TwistedBundle, DEFAULT_TOL};
use crate::cochain::{coboundary, double_transgress, Cochain, CochainError, Phase};
use crate::cyclotomic::weighted_phase_sum_integer;
use crate::gerbe::{make_gerbe, tensor, Gerbe, GerbeError};
use crate::grp::FiniteGroup;
use crate::gspace::{loop_groupoid, same_gset, union_gsets, GSet, GSpaceError};

#[derive(Debug, Error)]
pub enum GeoCharError {
    #[error("gerbes live over different groups")]
    GroupMismatch,
    #[error("bundle does not live over the conjugate-tensor gerbe of the endpoints")]
    EndpointMismatch,
    #[error("character matrices fail to intertwine the endpoint actions (residual {0:.3e})")]
    NotIntertwining(f64),
    #[error("loop integral is not a nonnegative integer: {0}")]
    NotIntegral(String),
    #[error("search bound exceeded: {0}")]
    BoundExceeded(String),
    #[error(transparent)]
    Gerbe(#[from] GerbeError),
    #[error(transparent)]
    Cochain(#[from] CochainError),
    #[error(transparent)]
    Space(#[from] GSpaceError),
}

/// Unitary bundle over the group elements, equivariant for conjugation.
#[derive(Debug, Clone)]
pub struct GBundleOverG {
    pub group: Arc<FiniteGroup>,
    pub dims: Vec<usize>,
    /// maps[h][g] = V(h: g), a dims[hgh⁻¹] × dims[g] matrix.
    pub maps: Vec<Vec<CMat>>,
    pub tol: f64,
}

/// First violation found, scanning shape, identity, unitarity, then
/// composition, each in index order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GBundleWitness {
    Shape { h: usize, g: usize },
    Identity { g: usize, residual: f64 },
    Unitarity { h: usize, g: usize, residual: f64 },
    Composition { h2: usize, h1: usize, g: usize, residual: f64 },
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GBundleReport {
    pub identity_residual: f64,
    pub unitarity_residual: f64,
    pub composition_residual: f64,
    pub pass: bool,
    pub witness: Option<GBundleWitness>,
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn validate_gbundle(v: &GBundleOverG, tol: f64) -> GBundleReport {
    let n = v.group.order;
    let mut report = GBundleReport {
        identity_residual: 0.0,
        unitarity_residual: 0.0,
        composition_residual: 0.0,
        pass: true,
        witness: None,
    };
    for h in 0..n {
        for g in 0..n {
            let tgt = v.group.conj(h, g);
            if v.maps[h][g].shape() != (v.dims[tgt], v.dims[g]) {
                report.pass = false;
                report.witness = Some(GBundleWitness::Shape { h, g });
                return report;
            }
        }
    }
    let e = v.group.identity;
    for g in 0..n {
        let r = max_abs(&(&v.maps[e][g] - CMat::identity(v.dims[g], v.dims[g])));
        report.identity_residual = report.identity_residual.max(r);
        if r > tol && report.witness.is_none() {
            report.pass = false;
            report.witness = Some(GBundleWitness::Identity { g, residual: r });
        }
    }
    for h in 0..n {
        for g in 0..n {
            let m = &v.maps[h][g];
            let r = max_abs(&(m.adjoint() * m - CMat::identity(v.dims[g], v.dims[g])))
                .max(max_abs(&(m * m.adjoint() - CMat::identity(m.nrows(), m.nrows()))));
            report.unitarity_residual = report.unitarity_residual.max(r);
            if r > tol && report.witness.is_none() {
                report.pass = false;
                report.witness = Some(GBundleWitness::Unitarity { h, g, residual: r });
            }
        }
    }
    for h2 in 0..n {
        for h1 in 0..n {
            for g in 0..n {
                let mid = v.group.conj(h1, g);
                let lhs = &v.maps[h2][mid] * &v.maps[h1][g];
                let r = max_abs(&(lhs - &v.maps[v.group.mul(h2, h1)][g]));
                report.composition_residual = report.composition_residual.max(r);
                if r > tol && report.witness.is_none() {
                    report.pass = false;
                    report.witness = Some(GBundleWitness::Composition { h2, h1, g, residual: r });
                }
            }
        }
    }
    report
}

/// Points of the underlying set fixed by g, ascending.
pub fn fix_points(gset: &GSet, g: usize) -> Vec<usize> {
    (0..gset.size).filter(|&x| gset.apply(g, x) == x).collect()
}

/// Phase by which h transports the g-fixed point x.
fn loop_phase(c: &Cochain, x: usize, g: usize, h: usize) -> Phase {
    let grp = &c.carrier.group;
    c.at2(x, grp.conj(h, g), h) - c.at2(x, h, g)
}

/// Fiber at g has one basis vector per g-fixed point, normalized by the
/// square root of the metric; the action of h is monomial with unit phases,
/// because the metric is constant on orbits and the normalization cancels.
pub fn geometric_character(x: &Gerbe) -> GBundleOverG {
    let group = x.gset.group.clone();
    let n = group.order;
    let fixes: Vec<Vec<usize>> = (0..n).map(|g| fix_points(&x.gset, g)).collect();
    let dims: Vec<usize> = fixes.iter().map(|f| f.len()).collect();
    let pos: Vec<BTreeMap<usize, usize>> = fixes
        .iter()
        .map(|f| f.iter().enumerate().map(|(i, &p)| (p, i)).collect())
        .collect();
    let mut maps = Vec::with_capacity(n);
    for h in 0..n {
        let mut row = Vec::with_capacity(n);
        for g in 0..n {
            let tgt = group.conj(h, g);
            let mut m = CMat::zeros(dims[tgt], dims[g]);
            for (col, &pt) in fixes[g].iter().enumerate() {
                let r = pos[tgt][&x.gset.apply(h, pt)];
                m[(r, col)] = loop_phase(&x.cocycle, pt, g, h).to_complex();
            }
            row.push(m);
        }
        maps.push(row);
    }
    GBundleOverG { group, dims, maps, tol: DEFAULT_TOL }
}

/// χ(g, h) = Tr V(h: g) over ordered commuting pairs.
#[derive(Debug, Clone)]
pub struct DoubleCharacter {
    pub order: usize,
    pub table: BTreeMap<(usize, usize), Complex64>,
}

impl DoubleCharacter {
    pub fn at(&self, g: usize, h: usize) -> Complex64 {
        self.table[&(g, h)]
    }
}

pub fn double_character(v: &GBundleOverG) -> DoubleCharacter {
    let n = v.group.order;
    let mut table = BTreeMap::new();
    for g in 0..n {
        for h in 0..n {
            if v.group.commute(g, h) {
                let tr: Complex64 = v.maps[h][g].diagonal().iter().sum();
                table.insert((g, h), tr);
            }
        }
    }
    DoubleCharacter { order: n, table }
}

pub fn gbundle_direct_sum(a: &GBundleOverG, b: &GBundleOverG) -> Result<GBundleOverG, GeoCharError> {
    if a.group.mult != b.group.mult {
        return Err(GeoCharError::GroupMismatch);
    }
    let n = a.group.order;
    let dims: Vec<usize> = (0..n).map(|g| a.dims[g] + b.dims[g]).collect();
    let mut maps = Vec::with_capacity(n);
    for h in 0..n {
        let mut row = Vec::with_capacity(n);
        for g in 0..n {
            let tgt = a.group.conj(h, g);
            let mut m = CMat::zeros(dims[tgt], dims[g]);
            m.view_mut((0, 0), (a.dims[tgt], a.dims[g])).copy_from(&a.maps[h][g]);
            m.view_mut((a.dims[tgt], a.dims[g]), (b.dims[tgt], b.dims[g]))
                .copy_from(&b.maps[h][g]);
            row.push(m);
        }
        maps.push(row);
    }
    Ok(GBundleOverG { group: a.group.clone(), dims, maps, tol: a.tol.max(b.tol) })
}

/// Exact transport phases of h on the points fixed by both g and h.
fn fixed_pair_phases(x: &Gerbe, g: usize, h: usize) -> Vec<Phase> {
    (0..x.gset.size)
        .filter(|&p| x.gset.apply(g, p) == p && x.gset.apply(h, p) == p)
        .map(|p| loop_phase(&x.cocycle, p, g, h))
        .collect()
}

/// Dimension of the space of maps between the two gerbes: the groupoid
/// integral of the doubly transgressed conjugate-tensor cocycle, evaluated
/// exactly in the cyclotomic field and asserted to be a nonnegative integer.
pub fn hom_dimension(x: &Gerbe, y: &Gerbe) -> Result<Rational64, GeoCharError> {
    if x.group().mult != y.group().mult {
        return Err(GeoCharError::GroupMismatch);
    }
    let t = tensor(y, x, true)?;
    let lam2 = loop_groupoid(&t.gset, 2)?;
    let tau2 = double_transgress(&t.cocycle, &lam2)?;
    let mut counts: BTreeMap<Phase, i64> = BTreeMap::new();
    for i in 0..lam2.object_count() {
        *counts.entry(tau2.at0(i)).or_insert(0) += 1;
    }
    let total = weighted_phase_sum_integer(&counts)
        .ok_or_else(|| GeoCharError::NotIntegral("irrational loop integral".into()))?;
    let order = t.gset.group.order as i64;
    if total < 0 || total % order != 0 {
        return Err(GeoCharError::NotIntegral(format!("{total}/{order}")));
    }
    Ok(Rational64::new(total, order))
}

fn matches_gerbe(bundle_gerbe: &Gerbe, t: &Gerbe) -> bool {
    same_gset(&bundle_gerbe.gset, &t.gset)
        && bundle_gerbe.cocycle.values == t.cocycle.values
        && bundle_gerbe.metric == t.metric
}

/// Character matrices of a morphism bundle E over the conjugate-tensor gerbe
/// of (y, x): entry (b, a) of the g-th matrix is the conjugated trace of the
/// g-loop of E at the simultaneously fixed pair (b, a). Loop traces transform
/// by e(τ) under conjugation, so the conjugated entries intertwine the
/// entrywise-conjugated endpoint actions; that law is checked within the
/// bundle tolerance.
pub fn character_of_morphism(
    e: &TwistedBundle,
    x: &Gerbe,
    y: &Gerbe,
) -> Result<Vec<CMat>, GeoCharError> {
    let t = tensor(y, x, true)?;
    if !matches_gerbe(&e.gerbe, &t) {
        return Err(GeoCharError::EndpointMismatch);
    }
    let xs = x.gset.size;
    let n = x.gset.group.order;
    let mut out = Vec::with_capacity(n);
    for g in 0..n {
        let fy = fix_points(&y.gset, g);
        let fx = fix_points(&x.gset, g);
        let mut m = CMat::zeros(fy.len(), fx.len());
        for (r, &yy) in fy.iter().enumerate() {
            for (c, &xx) in fx.iter().enumerate() {
                let tr: Complex64 = e.maps[g][yy * xs + xx].diagonal().iter().sum();
                m[(r, c)] = tr.conj();
            }
        }
        out.push(m);
    }
    let chx = geometric_character(x);
    let chy = geometric_character(y);
    let mut residual: f64 = 0.0;
    for h in 0..n {
        for g in 0..n {
            let tgt = x.gset.group.conj(h, g);
            let lhs = chy.maps[h][g].conjugate() * &out[g];
            let rhs = &out[tgt] * chx.maps[h][g].conjugate();
            residual = residual.max(max_abs(&(lhs - rhs)));
        }
    }
    if residual > e.tol {
        return Err(GeoCharError::NotIntertwining(residual));
    }
    Ok(out)
}

fn diagonal_morphism(x: &Gerbe, t: Gerbe, phase_at: impl Fn(usize, usize) -> Phase) -> TwistedBundle {
    let t = Arc::new(t);
    let xs = x.gset.size;
    let n = x.gset.group.order;
    let dims: Vec<usize> = (0..t.gset.size).map(|p| usize::from(p / xs == p % xs)).collect();
    let maps = (0..n)
        .map(|g| {
            (0..t.gset.size)
                .map(|p| {
                    if dims[p] == 1 {
                        CMat::from_element(1, 1, phase_at(p % xs, g).to_complex())
                    } else {
                        CMat::zeros(dims[t.gset.apply(g, p)], 0)
                    }
                })
                .collect()
        })
        .collect();
    TwistedBundle { gerbe: t, dims, maps, tol: DEFAULT_TOL }
}

/// The unit morphism of a gerbe: one-dimensional fibers on the diagonal,
/// where the conjugate-tensor cocycle cancels, and zero elsewhere.
pub fn identity_morphism(x: &Gerbe) -> Result<TwistedBundle, GeoCharError> {
    Ok(diagonal_morphism(x, tensor(x, x, true)?, |_, _| Phase::ZERO))
}

/// Morphism from a gerbe to its twist by the coboundary of gamma, acting by
/// e(γ(g ← x)) on the diagonal.
pub fn coboundary_morphism(
    x: &Gerbe,
    gamma: &Cochain,
) -> Result<(Gerbe, TwistedBundle), GeoCharError> {
    let d = coboundary(gamma)?;
    let twisted = make_gerbe(x.gset.clone(), x.cocycle.add(&d)?, x.metric.clone())?;
    let e = diagonal_morphism(x, tensor(&twisted, x, true)?, |pt, g| gamma.at1(pt, g));
    Ok((twisted, e))
}

/// Composite of morphism bundles: fibers are direct sums over the middle
/// points of tensor products, and the middle twists cancel exactly.
pub fn compose_morphisms(
    f: &TwistedBundle,
    e: &TwistedBundle,
    x: &Gerbe,
    y: &Gerbe,
    z: &Gerbe,
) -> Result<TwistedBundle, GeoCharError> {
    if !matches_gerbe(&e.gerbe, &tensor(y, x, true)?) || !matches_gerbe(&f.gerbe, &tensor(z, y, true)?) {
        return Err(GeoCharError::EndpointMismatch);
    }
    let t = Arc::new(tensor(z, x, true)?);
    let (xs, ys) = (x.gset.size, y.gset.size);
    let n = x.gset.group.order;
    let block = |p: usize, yy: usize| {
        let (zz, xx) = (p / xs, p % xs);
        f.dims[zz * ys + yy] * e.dims[yy * xs + xx]
    };
    let dims: Vec<usize> = (0..t.gset.size).map(|p| (0..ys).map(|yy| block(p, yy)).sum()).collect();
    let offset = |p: usize, yy: usize| (0..yy).map(|w| block(p, w)).sum::<usize>();
    let mut maps = Vec::with_capacity(n);
    for g in 0..n {
        let mut row = Vec::with_capacity(t.gset.size);
        for p in 0..t.gset.size {
            let q = t.gset.apply(g, p);
            let (zz, xx) = (p / xs, p % xs);
            let mut m = CMat::zeros(dims[q], dims[p]);
            for yy in 0..ys {
                let (rows, cols) = (block(q, y.gset.apply(g, yy)), block(p, yy));
                if rows == 0 || cols == 0 {
                    continue;
                }
                let kron = f.maps[g][zz * ys + yy].kronecker(&e.maps[g][yy * xs + xx]);
                m.view_mut((offset(q, y.gset.apply(g, yy)), offset(p, yy)), (rows, cols))
                    .copy_from(&kron);
            }
            row.push(m);
        }
        maps.push(row);
    }
    Ok(TwistedBundle { gerbe: t, dims, maps, tol: f.tol.max(e.tol) })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FaithfulPair {
    pub i: usize,
    pub j: usize,
    pub hom_dim: i64,
    pub pairing: i64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FaithfulReport {
    pub pairs: Vec<FaithfulPair>,
    pub pass: bool,
}

/// For every ordered catalog pair, compare the hom dimension with the
/// inner product of double characters, both evaluated exactly.
pub fn verify_fully_faithful(catalog: &[&Gerbe]) -> Result<FaithfulReport, GeoCharError> {
    if catalog.is_empty() {
        return Ok(FaithfulReport { pairs: Vec::new(), pass: true });
    }
    let g0 = catalog[0].group().clone();
    if catalog.iter().any(|x| x.group().mult != g0.mult) {
        return Err(GeoCharError::GroupMismatch);
    }
    let order = g0.order;
    let mut pairs = Vec::new();
    for (i, x) in catalog.iter().enumerate() {
        for (j, y) in catalog.iter().enumerate() {
            let hom_dim = hom_dimension(x, y)?.to_integer();
            let mut counts: BTreeMap<Phase, i64> = BTreeMap::new();
            for g in 0..order {
                for h in 0..order {
                    if !g0.commute(g, h) {
                        continue;
                    }
                    let px = fixed_pair_phases(x, g, h);
                    let py = fixed_pair_phases(y, g, h);
                    for &a in &px {
                        for &b in &py {
                            *counts.entry(b - a).or_insert(0) += 1;
                        }
                    }
                }
            }
            let total = weighted_phase_sum_integer(&counts)
                .ok_or_else(|| GeoCharError::NotIntegral("irrational character pairing".into()))?;
            if total % order as i64 != 0 {
                return Err(GeoCharError::NotIntegral(format!("{total}/{order}")));
            }
            let pairing = total / order as i64;
            pairs.push(FaithfulPair { i, j, hom_dim, pairing, pass: hom_dim == pairing });
        }
    }
    let pass = pairs.iter().all(|p| p.pass);
    Ok(FaithfulReport { pairs, pass })
}

pub const MAX_SEARCH_GROUP: usize = 48;
pub const MAX_SEARCH_POINTS: usize = 12;

/// Subgroup generated by the given elements, as a sorted element list.
fn closure(group: &FiniteGroup, gens: &[usize]) -> Vec<usize> {
    let mut in_set = vec![false; group.order];
    in_set[group.identity] = true;
    let mut elems = vec![group.identity];
    let mut i = 0;
    while i < elems.len() {
        let a = elems[i];
        i += 1;
        for &g in gens {
            let p = group.mul(a, g);
            if !in_set[p] {
                in_set[p] = true;
                elems.push(p);
            }
        }
    }
    elems.sort_unstable();
    elems
}

fn all_subgroups(group: &FiniteGroup) -> Vec<Vec<usize>> {
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let trivial = vec![group.identity];
    seen.insert(trivial.clone());
    let mut queue = vec![trivial];
    while let Some(h) = queue.pop() {
        for g in group.elements() {
            if h.binary_search(&g).is_err() {
                let mut gens = h.clone();
                gens.push(g);
                let k = closure(group, &gens);
                if seen.insert(k.clone()) {
                    queue.push(k);
                }
            }
        }
    }
    seen.into_iter().collect()
}

fn small_generated_subgroups(group: &FiniteGroup) -> Vec<Vec<usize>> {
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    for a in group.elements() {
        for b in group.elements() {
            seen.insert(closure(group, &[a, b]));
        }
    }
    seen.into_iter().collect()
}

/// Representatives of conjugacy classes of subgroups, lex-least first.
fn subgroup_class_reps(group: &FiniteGroup, subs: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut visited: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut reps = Vec::new();
    for h in subs {
        if visited.contains(h) {
            continue;
        }
        reps.push(h.clone());
        for a in group.elements() {
            let mut c: Vec<usize> = h.iter().map(|&x| group.conj(a, x)).collect();
            c.sort_unstable();
            visited.insert(c);
        }
    }
    reps
}

fn fixed_by_all(gset: &GSet, sub: &[usize]) -> usize {
    (0..gset.size)
        .filter(|&x| sub.iter().all(|&h| gset.apply(h, x) == x))
        .count()
}

/// Backtracking search for an equivariant bijection, matching orbits whose
/// representatives have equal stabilizers.
fn equivariant_bijection(a: &GSet, b: &GSet) -> Option<Vec<usize>> {
    if a.size != b.size || a.group.mult != b.group.mult {
        return None;
    }
    fn assign(a: &GSet, b: &GSet, oi: usize, map: &mut [usize], used: &mut [bool]) -> bool {
        if oi == a.orbits.len() {
            return true;
        }
        let rep = a.orbits[oi][0];
        for (bj, borbit) in b.orbits.iter().enumerate() {
            if used[bj] || borbit.len() != a.orbits[oi].len() {
                continue;
            }
            for &t in borbit {
                if b.stabilizers[t] != a.stabilizers[rep] {
                    continue;
                }
                used[bj] = true;
                for g in a.group.elements() {
                    map[a.apply(g, rep)] = b.apply(g, t);
                }
                if assign(a, b, oi + 1, map, used) {
                    return true;
                }
                used[bj] = false;
            }
        }
        false
    }
    let mut map = vec![usize::MAX; a.size];
    let mut used = vec![false; b.orbits.len()];
    assign(a, b, 0, &mut map, &mut used).then_some(map)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum IsoCertificate {
    /// A subgroup generated by at most two elements with different
    /// fixed-point counts on the two sets.
    DistinctMarks { subgroup: Vec<usize>, fix_x: usize, fix_y: usize },
    /// Exhaustive backtracking found no equivariant bijection.
    NoEquivariantBijection,
}

fn certify_non_isomorphic(x: &GSet, y: &GSet, small_subs: &[Vec<usize>]) -> Option<IsoCertificate> {
    for sub in small_subs {
        let (fx, fy) = (fixed_by_all(x, sub), fixed_by_all(y, sub));
        if fx != fy {
            return Some(IsoCertificate::DistinctMarks { subgroup: sub.clone(), fix_x: fx, fix_y: fy });
        }
    }
    equivariant_bijection(x, y)
        .is_none()
        .then_some(IsoCertificate::NoEquivariantBijection)
}

#[derive(Debug, Clone, Serialize)]
pub struct TransitiveType {
    /// Sorted elements of the stabilizer subgroup representative.
    pub subgroup: Vec<usize>,
    pub size: usize,
}

#[derive(Debug)]
pub struct NonDistinguishedPair {
    pub x_multiplicities: Vec<usize>,
    pub y_multiplicities: Vec<usize>,
    pub x: GSet,
    pub y: GSet,
    pub certificate: IsoCertificate,
}

#[derive(Debug)]
pub struct NonDistinguishReport {
    pub types: Vec<TransitiveType>,
    pub pairs: Vec<NonDistinguishedPair>,
}

fn enum_multisets(sizes: &[usize], idx: usize, budget: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if idx == sizes.len() {
        if current.iter().any(|&m| m > 0) {
            out.push(current.clone());
        }
        return;
    }
    for m in 0..=budget / sizes[idx] {
        current[idx] = m;
        enum_multisets(sizes, idx + 1, budget - m * sizes[idx], current, out);
    }
    current[idx] = 0;
}

fn build_union(pieces: &[GSet], mult: &[usize]) -> Result<GSet, GSpaceError> {
    let mut acc: Option<GSet> = None;
    for (t, &m) in mult.iter().enumerate() {
        for _ in 0..m {
            acc = Some(match acc {
                None => pieces[t].clone(),
                Some(a) => union_gsets(&a, &pieces[t])?,
            });
        }
    }
    Ok(acc.expect("multiset is nonempty"))
}

/// Exhaustive search over unions of transitive actions of total size at most
/// max_size for pairs of non-isomorphic actions with equal double character
/// tables. Equality of tables is decided on exact simultaneous fixed-point
/// counts; non-isomorphism is certified per pair.
pub fn nondistinguish_search(
    group: &Arc<FiniteGroup>,
    max_size: usize,
) -> Result<NonDistinguishReport, GeoCharError> {
    if group.order > MAX_SEARCH_GROUP {
        return Err(GeoCharError::BoundExceeded(format!(
            "group order {} > {MAX_SEARCH_GROUP}",
            group.order
        )));
    }
    if max_size > MAX_SEARCH_POINTS {
        return Err(GeoCharError::BoundExceeded(format!(
            "max size {max_size} > {MAX_SEARCH_POINTS}"
        )));
    }
    let subs = all_subgroups(group);
    let mut types: Vec<TransitiveType> = subgroup_class_reps(group, &subs)
        .into_iter()
        .filter(|h| group.order / h.len() <= max_size)
        .map(|h| TransitiveType { size: group.order / h.len(), subgroup: h })
        .collect();
    types.sort_by(|a, b| (a.size, &a.subgroup).cmp(&(b.size, &b.subgroup)));
    let pieces: Vec<GSet> = types
        .iter()
        .map(|t| crate::gspace::build_gset(group.clone(), &crate::gspace::GSetSpec::Coset(t.subgroup.clone())))
        .collect::<Result<_, _>>()?;
    let commuting: Vec<(usize, usize)> = group
        .elements()
        .flat_map(|g| group.elements().map(move |h| (g, h)))
        .filter(|&(g, h)| group.commute(g, h))
        .collect();
    let tables: Vec<Vec<usize>> = pieces
        .iter()
        .map(|p| {
            commuting
                .iter()
                .map(|&(g, h)| {
                    (0..p.size)
                        .filter(|&x| p.apply(g, x) == x && p.apply(h, x) == x)
                        .count()
                })
                .collect()
        })
        .collect();
    let sizes: Vec<usize> = types.iter().map(|t| t.size).collect();
    let mut multisets = Vec::new();
    enum_multisets(&sizes, 0, max_size, &mut vec![0; sizes.len()], &mut multisets);
    let mut buckets: BTreeMap<Vec<usize>, Vec<Vec<usize>>> = BTreeMap::new();
    for m in multisets {
        let table: Vec<usize> = (0..commuting.len())
            .map(|k| m.iter().zip(&tables).map(|(&mi, t)| mi * t[k]).sum())
            .collect();
        buckets.entry(table).or_default().push(m);
    }
    let small_subs = small_generated_subgroups(group);
    let mut pairs = Vec::new();
    for bucket in buckets.values().filter(|b| b.len() >= 2) {
        for i in 0..bucket.len() {
            for j in i + 1..bucket.len() {
                let x = build_union(&pieces, &bucket[i])?;
                let y = build_union(&pieces, &bucket[j])?;
                let Some(certificate) = certify_non_isomorphic(&x, &y, &small_subs) else {
                    unreachable!("distinct transitive multiplicities give non-isomorphic unions");
                };
                pairs.push(NonDistinguishedPair {
                    x_multiplicities: bucket[i].clone(),
                    y_multiplicities: bucket[j].clone(),
                    x,
                    y,
                    certificate,
                });
            }
        }
    }
    Ok(NonDistinguishReport { types, pairs })
}
