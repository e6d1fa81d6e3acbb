//! Fusion rings with duality, sign symbols on admissible triples, and the
//! mod-2 classification of such symbols up to basis rescaling.  Includes
//! solvers for the induced scale equations over U(1) and over {-1, +1},
//! Perron dimension vectors, grouplike counts for group rings, and a seeded
//! consistency check for weighted dagger transports between semisimple
//! blocks.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use thiserror::Error;

use crate::bundle::CMat;
use crate::cochain::Phase;
use crate::grp::FiniteGroup;
use crate::snf::{gcd, smith_form};

pub const MAX_FUSION_RANK: usize = 24;

/// Multiplicities above this bound are rejected so validation sums stay in u64.
pub const MAX_FUSION_MULT: u32 = 1 << 20;

#[derive(Debug, Error)]
pub enum PivotalError {
    #[error("rank {0} outside supported range 1..={MAX_FUSION_RANK}")]
    RankOutOfRange(usize),
    #[error("star table must be a rank-length involution fixing 0; bad near index {0}")]
    BadStar(usize),
    #[error("entry at ({i},{j},{k}) out of range: indices < rank, multiplicity <= {MAX_FUSION_MULT}")]
    BadEntry { i: usize, j: usize, k: usize },
    #[error("unit coefficient wrong at (i={i}, j={j})")]
    UnitFailure { i: usize, j: usize },
    #[error("duality coefficient wrong at (j={j}, k={k}): N^0 must be delta(k, star j)")]
    DualityFailure { j: usize, k: usize },
    #[error("structure constants not star-compatible at ({i},{j},{k})")]
    StarSymmetryFailure { i: usize, j: usize, k: usize },
    #[error("associativity fails at witness (i={i}, j={j}, k={k}; l={l})")]
    AssociativityFailure { i: usize, j: usize, k: usize, l: usize },
    #[error("unknown builtin ring {0:?}")]
    UnknownBuiltin(String),
    #[error("symbol attached to non-admissible triple ({0},{1},{2})")]
    NotAdmissible(usize, usize, usize),
    #[error("no symbol stored for admissible triple ({0},{1},{2})")]
    MissingSymbol(usize, usize, usize),
    #[error("symbol values must be +1 or -1")]
    NotASign,
    #[error("symbol mismatch between {0:?} and {1:?}")]
    SymmetryViolation((usize, usize, usize), (usize, usize, usize)),
    #[error("triple {0:?} touches the unit and must carry +1")]
    UnitSymbolNotOne((usize, usize, usize)),
    #[error("weights must be finite and positive")]
    BadWeights,
    #[error("dimension vector must be nonzero reals, equal on star-paired indices")]
    BadDimensions,
    #[error("iteration failed to converge")]
    NoConvergence,
    #[error("integer overflow while reducing the relation lattice")]
    Overflow,
}

/// Based ring with unit index 0, a star involution, and nonnegative integer
/// structure constants.  `coeff(i, j, k)` is the multiplicity of basis
/// element `i` inside the product of `j` and `k`; every axiom (unit rows,
/// duality against star, star compatibility, associativity) is scanned at
/// construction and failures carry an index witness.
#[derive(Debug, Clone)]
pub struct FusionRing {
    pub name: String,
    pub rank: usize,
    pub star: Vec<usize>,
    n: Vec<u32>,
}

impl FusionRing {
    /// Unit products are filled in automatically; `entries` overwrite the
    /// table, so explicit contradictions surface as validation failures.
    pub fn new(
        name: &str,
        rank: usize,
        star: Vec<usize>,
        entries: &[(usize, usize, usize, u32)],
    ) -> Result<FusionRing, PivotalError> {
        if rank == 0 || rank > MAX_FUSION_RANK {
            return Err(PivotalError::RankOutOfRange(rank));
        }
        if star.len() != rank {
            return Err(PivotalError::BadStar(star.len().min(rank)));
        }
        for i in 0..rank {
            if star[i] >= rank || star[star[i]] != i {
                return Err(PivotalError::BadStar(i));
            }
        }
        if star[0] != 0 {
            return Err(PivotalError::BadStar(0));
        }
        let mut n = vec![0u32; rank * rank * rank];
        for j in 0..rank {
            n[(j * rank) * rank + j] = 1;
            n[(j * rank + j) * rank] = 1;
        }
        for &(i, j, k, c) in entries {
            if i >= rank || j >= rank || k >= rank || c > MAX_FUSION_MULT {
                return Err(PivotalError::BadEntry { i, j, k });
            }
            n[(i * rank + j) * rank + k] = c;
        }
        let ring = FusionRing { name: name.to_string(), rank, star, n };
        ring.validate()?;
        Ok(ring)
    }

    #[inline]
    pub fn coeff(&self, i: usize, j: usize, k: usize) -> u32 {
        self.n[(i * self.rank + j) * self.rank + k]
    }

    #[inline]
    pub fn admissible(&self, i: usize, j: usize, k: usize) -> bool {
        self.coeff(i, j, k) > 0
    }

    /// All triples with nonzero coefficient, lexicographically ordered.
    pub fn admissible_triples(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.rank {
            for j in 0..self.rank {
                for k in 0..self.rank {
                    if self.admissible(i, j, k) {
                        out.push((i, j, k));
                    }
                }
            }
        }
        out
    }

    fn validate(&self) -> Result<(), PivotalError> {
        let r = self.rank;
        for i in 0..r {
            for j in 0..r {
                let d = u32::from(i == j);
                if self.coeff(i, 0, j) != d || self.coeff(i, j, 0) != d {
                    return Err(PivotalError::UnitFailure { i, j });
                }
            }
        }
        for j in 0..r {
            for k in 0..r {
                if self.coeff(0, j, k) != u32::from(k == self.star[j]) {
                    return Err(PivotalError::DualityFailure { j, k });
                }
            }
        }
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    if self.coeff(i, j, k) != self.coeff(self.star[i], self.star[k], self.star[j]) {
                        return Err(PivotalError::StarSymmetryFailure { i, j, k });
                    }
                }
            }
        }
        // (e_i e_j) e_k and e_i (e_j e_k), compared on the coefficient of e_l.
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    for l in 0..r {
                        let mut lhs = 0u64;
                        let mut rhs = 0u64;
                        for m in 0..r {
                            lhs += u64::from(self.coeff(m, i, j)) * u64::from(self.coeff(l, m, k));
                            rhs += u64::from(self.coeff(m, j, k)) * u64::from(self.coeff(l, i, m));
                        }
                        if lhs != rhs {
                            return Err(PivotalError::AssociativityFailure { i, j, k, l });
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Builtins: "A1" (unit alone), "YangLee" (rank 2, X^2 = 1 + X), "B<n>"
/// (cyclic part of order n plus one extra object Y with Y^2 = (n-1)Y + sum
/// of the cyclic part), "TY<k>" (cyclic part of order k, Y^2 = sum of the
/// cyclic part with no Y term).
pub fn builtin_ring(name: &str) -> Result<FusionRing, PivotalError> {
    if name == "A1" {
        return FusionRing::new("A1", 1, vec![0], &[]);
    }
    if name == "YangLee" {
        return FusionRing::new("YangLee", 2, vec![0, 1], &[(0, 1, 1, 1), (1, 1, 1, 1)]);
    }
    if let Some(rest) = name.strip_prefix("TY") {
        if let Ok(k) = rest.parse::<usize>() {
            if k >= 1 {
                return tambara_yamagami(k);
            }
        }
    } else if let Some(rest) = name.strip_prefix('B') {
        if let Ok(n) = rest.parse::<usize>() {
            if n >= 1 {
                return near_group(n);
            }
        }
    }
    Err(PivotalError::UnknownBuiltin(name.to_string()))
}

fn cyclic_block(n: usize, extra: usize) -> (Vec<usize>, Vec<(usize, usize, usize, u32)>) {
    let mut star: Vec<usize> = (0..n).map(|i| (n - i) % n).collect();
    star.push(extra);
    let mut entries = Vec::new();
    for i in 0..n {
        for j in 0..n {
            entries.push(((i + j) % n, i, j, 1));
        }
    }
    for i in 1..n {
        entries.push((extra, i, extra, 1));
        entries.push((extra, extra, i, 1));
    }
    (star, entries)
}

fn near_group(n: usize) -> Result<FusionRing, PivotalError> {
    let y = n;
    let (star, mut entries) = cyclic_block(n, y);
    for i in 0..n {
        entries.push((i, y, y, 1));
    }
    entries.push((y, y, y, (n - 1) as u32));
    FusionRing::new(&format!("B{n}"), n + 1, star, &entries)
}

fn tambara_yamagami(k: usize) -> Result<FusionRing, PivotalError> {
    let y = k;
    let (star, mut entries) = cyclic_block(k, y);
    for g in 0..k {
        entries.push((g, y, y, 1));
    }
    FusionRing::new(&format!("TY{k}"), k + 1, star, &entries)
}

/// Integral group ring on the elements of `group`.
pub fn group_ring(group: &FiniteGroup) -> Result<FusionRing, PivotalError> {
    let n = group.order;
    let mut entries = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            entries.push((group.mul(a, b), a, b, 1));
        }
    }
    let label = match &group.name {
        Some(s) => format!("Z[{s}]"),
        None => format!("Z[order {n}]"),
    };
    FusionRing::new(&label, n, group.inv.clone(), &entries)
}

/// Rank-two table sometimes printed with X^2 = X; the duality scan rejects
/// it, and the witness is kept as a regression oracle.
pub fn yang_lee_literal() -> Result<FusionRing, PivotalError> {
    FusionRing::new("YangLeeLiteral", 2, vec![0, 1], &[(1, 1, 1, 1)])
}

fn sym1(star: &[usize], t: (usize, usize, usize)) -> (usize, usize, usize) {
    (star[t.2], star[t.0], t.1)
}

fn sym2(star: &[usize], t: (usize, usize, usize)) -> (usize, usize, usize) {
    (star[t.0], star[t.2], star[t.1])
}

fn touches_unit(t: (usize, usize, usize)) -> bool {
    t.0 == 0 || t.1 == 0 || t.2 == 0
}

/// Orbits of the admissible triples under the two index symmetries, each
/// orbit sorted, orbits ordered by least member.
pub fn triple_orbits(ring: &FusionRing) -> Vec<Vec<(usize, usize, usize)>> {
    let mut pool: BTreeSet<(usize, usize, usize)> = ring.admissible_triples().into_iter().collect();
    let mut out = Vec::new();
    while let Some(&seed) = pool.iter().next() {
        let mut members = BTreeSet::new();
        let mut frontier = vec![seed];
        while let Some(t) = frontier.pop() {
            if !members.insert(t) {
                continue;
            }
            for img in [sym1(&ring.star, t), sym2(&ring.star, t)] {
                if pool.contains(&img) && !members.contains(&img) {
                    frontier.push(img);
                }
            }
        }
        for t in &members {
            pool.remove(t);
        }
        out.push(members.into_iter().collect());
    }
    out
}

/// Signs on the admissible triples, constant on symmetry orbits and +1 on
/// every triple touching the unit.
#[derive(Debug, Clone)]
pub struct PivotalSymbols {
    signs: BTreeMap<(usize, usize, usize), i32>,
}

impl PivotalSymbols {
    pub fn all_plus(ring: &FusionRing) -> PivotalSymbols {
        let signs = ring.admissible_triples().into_iter().map(|t| (t, 1)).collect();
        PivotalSymbols { signs }
    }

    /// Unlisted triples default to +1.
    pub fn from_entries(
        ring: &FusionRing,
        entries: &[(usize, usize, usize, i32)],
    ) -> Result<PivotalSymbols, PivotalError> {
        let mut out = PivotalSymbols::all_plus(ring);
        for &(i, j, k, s) in entries {
            if s != 1 && s != -1 {
                return Err(PivotalError::NotASign);
            }
            match out.signs.get_mut(&(i, j, k)) {
                Some(slot) => *slot = s,
                None => return Err(PivotalError::NotAdmissible(i, j, k)),
            }
        }
        out.check(ring)?;
        Ok(out)
    }

    /// Toggles the whole symmetry orbit of each listed triple.
    pub fn flip_orbits(
        ring: &FusionRing,
        seeds: &[(usize, usize, usize)],
    ) -> Result<PivotalSymbols, PivotalError> {
        let orbits = triple_orbits(ring);
        let mut out = PivotalSymbols::all_plus(ring);
        for &seed in seeds {
            let orbit = orbits
                .iter()
                .find(|o| o.contains(&seed))
                .ok_or(PivotalError::NotAdmissible(seed.0, seed.1, seed.2))?;
            for t in orbit {
                let slot = out.signs.get_mut(t).unwrap();
                *slot = -*slot;
            }
        }
        out.check(ring)?;
        Ok(out)
    }

    pub fn sign(&self, i: usize, j: usize, k: usize) -> Option<i32> {
        self.signs.get(&(i, j, k)).copied()
    }

    pub fn check(&self, ring: &FusionRing) -> Result<(), PivotalError> {
        let triples = ring.admissible_triples();
        if self.signs.len() != triples.len() {
            for t in self.signs.keys() {
                if !ring.admissible(t.0, t.1, t.2) {
                    return Err(PivotalError::NotAdmissible(t.0, t.1, t.2));
                }
            }
        }
        for &t in &triples {
            let s = match self.sign(t.0, t.1, t.2) {
                Some(s) => s,
                None => return Err(PivotalError::MissingSymbol(t.0, t.1, t.2)),
            };
            if s != 1 && s != -1 {
                return Err(PivotalError::NotASign);
            }
            for img in [sym1(&ring.star, t), sym2(&ring.star, t)] {
                if self.sign(img.0, img.1, img.2) != Some(s) {
                    return Err(PivotalError::SymmetryViolation(t, img));
                }
            }
            if touches_unit(t) && s != 1 {
                return Err(PivotalError::UnitSymbolNotOne(t));
            }
        }
        Ok(())
    }
}

fn word_len(bits: usize) -> usize {
    bits.div_ceil(64)
}

fn word_get(words: &[u64], bit: usize) -> bool {
    words[bit / 64] >> (bit % 64) & 1 == 1
}

fn word_flip(words: &mut [u64], bit: usize) {
    words[bit / 64] ^= 1 << (bit % 64);
}

fn word_xor(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

fn word_first(words: &[u64]) -> Option<usize> {
    for (w, chunk) in words.iter().enumerate() {
        if *chunk != 0 {
            return Some(w * 64 + chunk.trailing_zeros() as usize);
        }
    }
    None
}

/// Sign collections modulo rescaling, as an elementary abelian 2-group.
/// Columns are the orbits away from the unit; the reduced rows span the
/// rescaling sublattice, and `generators` are orbit representatives for a
/// basis of the quotient.
#[derive(Debug, Clone)]
pub struct PivotalCohomology {
    pub rank: usize,
    pub generators: Vec<(usize, usize, usize)>,
    orbits: Vec<Vec<(usize, usize, usize)>>,
    echelon: Vec<(usize, Vec<u64>)>,
}

impl PivotalCohomology {
    pub fn order(&self) -> Option<u128> {
        if self.rank >= 128 {
            None
        } else {
            Some(1u128 << self.rank)
        }
    }
}

pub fn pivotal_cohomology(ring: &FusionRing) -> PivotalCohomology {
    let orbits: Vec<Vec<(usize, usize, usize)>> = triple_orbits(ring)
        .into_iter()
        .filter(|o| !touches_unit(o[0]))
        .collect();
    let cols = orbits.len();
    let words = word_len(cols);

    // One rescaling row per star-class of non-unit indices: the bit records
    // whether the class meets the orbit's representative an odd number of times.
    let mut echelon: Vec<(usize, Vec<u64>)> = Vec::new();
    let classes: BTreeSet<usize> = (1..ring.rank).map(|i| i.min(ring.star[i])).collect();
    for rep in classes {
        let pair = [rep, ring.star[rep]];
        let mut row = vec![0u64; words];
        for (c, orbit) in orbits.iter().enumerate() {
            let (a, b, d) = orbit[0];
            let hits = [a, b, d].iter().filter(|x| pair.contains(x)).count();
            if hits % 2 == 1 {
                word_flip(&mut row, c);
            }
        }
        for (p, r) in &echelon {
            if word_get(&row, *p) {
                word_xor(&mut row, r);
            }
        }
        if let Some(p) = word_first(&row) {
            for (_, r) in echelon.iter_mut() {
                if word_get(r, p) {
                    word_xor(r, &row);
                }
            }
            echelon.push((p, row));
        }
    }

    let pivots: BTreeSet<usize> = echelon.iter().map(|(p, _)| *p).collect();
    let generators: Vec<(usize, usize, usize)> =
        (0..cols).filter(|c| !pivots.contains(c)).map(|c| orbits[c][0]).collect();
    PivotalCohomology { rank: cols - echelon.len(), generators, orbits, echelon }
}

/// Coordinates of a sign collection in the quotient basis of
/// `pivotal_cohomology`; `components[g]` pairs with `generators[g]`.
#[derive(Debug, Clone)]
pub struct SymbolClass {
    pub is_trivial: bool,
    pub components: Vec<bool>,
}

pub fn symbol_class(ring: &FusionRing, eps: &PivotalSymbols) -> Result<SymbolClass, PivotalError> {
    eps.check(ring)?;
    let h = pivotal_cohomology(ring);
    let cols = h.orbits.len();
    let mut v = vec![0u64; word_len(cols)];
    for (c, orbit) in h.orbits.iter().enumerate() {
        let (i, j, k) = orbit[0];
        if eps.sign(i, j, k) == Some(-1) {
            word_flip(&mut v, c);
        }
    }
    for (p, r) in &h.echelon {
        if word_get(&v, *p) {
            word_xor(&mut v, r);
        }
    }
    let pivots: BTreeSet<usize> = h.echelon.iter().map(|(p, _)| *p).collect();
    let components: Vec<bool> =
        (0..cols).filter(|c| !pivots.contains(c)).map(|c| word_get(&v, c)).collect();
    let is_trivial = v.iter().all(|w| *w == 0);
    Ok(SymbolClass { is_trivial, components })
}

/// Outcome of the scale equations t_j t_k = eps^i_{jk} t_i.  `values` is one
/// solution; `torsor` counts all solutions when that count is finite.
#[derive(Debug, Clone)]
pub struct TwistedSolution {
    pub exists: bool,
    pub values: Option<Vec<Complex64>>,
    pub torsor: Option<u128>,
}

fn lead(row: &[i128]) -> Option<usize> {
    row.iter().position(|&x| x != 0)
}

/// Integer row reduction of `rows . x = rhs/2 (mod 1)`.  Returns the echelon
/// rows plus feasibility of every relation that cancelled to zero.
fn relation_echelon(
    rows: Vec<(Vec<i128>, i128)>,
    cols: usize,
) -> (Vec<(Vec<i128>, i128)>, bool) {
    let mut ech: Vec<(Vec<i128>, i128)> = Vec::new();
    let mut feasible = true;
    for (mut r, mut b) in rows {
        let mut c = 0;
        let mut stored = false;
        while c < cols {
            if r[c] == 0 {
                c += 1;
                continue;
            }
            match ech.iter().position(|(e, _)| lead(e) == Some(c)) {
                None => {
                    if r[c] < 0 {
                        for x in r.iter_mut() {
                            *x = -*x;
                        }
                        b = -b;
                    }
                    ech.push((r, b));
                    ech.sort_by_key(|(e, _)| lead(e).unwrap());
                    stored = true;
                    break;
                }
                Some(idx) => {
                    loop {
                        let p = ech[idx].0[c];
                        let q = r[c].div_euclid(p);
                        if q != 0 {
                            for t in 0..cols {
                                r[t] -= q * ech[idx].0[t];
                            }
                            b -= q * ech[idx].1;
                        }
                        if r[c] == 0 {
                            break;
                        }
                        std::mem::swap(&mut r, &mut ech[idx].0);
                        std::mem::swap(&mut b, &mut ech[idx].1);
                    }
                    c += 1;
                }
            }
        }
        if !stored && b.rem_euclid(2) != 0 {
            feasible = false;
        }
    }
    (ech, feasible)
}

fn no_solution() -> TwistedSolution {
    TwistedSolution { exists: false, values: None, torsor: None }
}

fn solve_unit_circle(ring: &FusionRing, eps: &PivotalSymbols) -> Result<TwistedSolution, PivotalError> {
    let n = ring.rank;
    let mut rows: BTreeSet<(Vec<i128>, i128)> = BTreeSet::new();
    for (i, j, k) in ring.admissible_triples() {
        let mut row = vec![0i128; n];
        row[j] += 1;
        row[k] += 1;
        row[i] -= 1;
        let b = i128::from(eps.sign(i, j, k) == Some(-1));
        rows.insert((row, b));
    }
    let (ech, feasible) = relation_echelon(rows.into_iter().collect(), n);
    if !feasible {
        return Ok(no_solution());
    }
    let a: Vec<Vec<i128>> = ech.iter().map(|(r, _)| r.clone()).collect();
    let b: Vec<i128> = ech.iter().map(|(_, b)| *b).collect();
    let m = a.len();
    let smith = smith_form(&a);
    // D y = (U b)/2 with x = V y; zero invariant factors demand even parity.
    let mut y: Vec<(i128, i128)> = vec![(0, 1); n];
    for t in 0..m {
        let mut c = 0i128;
        for s in 0..m {
            c += smith.u[t][s] * b[s];
        }
        let d = smith.diag.get(t).copied().unwrap_or(0);
        if d == 0 {
            if c.rem_euclid(2) != 0 {
                return Ok(no_solution());
            }
            continue;
        }
        let den = 2 * d;
        let g = gcd(c.abs(), den.abs()).max(1);
        y[t] = (c / g, den / g);
    }
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let (mut num, mut den) = (0i128, 1i128);
        for (t, &(yn, yd)) in y.iter().enumerate() {
            if yn == 0 {
                continue;
            }
            num = num * yd + yn * smith.v[i][t] * den;
            den *= yd;
            let g = gcd(num.abs(), den.abs()).max(1);
            num /= g;
            den /= g;
        }
        let (p, q) = (i64::try_from(num), i64::try_from(den));
        match (p, q) {
            (Ok(p), Ok(q)) => values.push(Phase::from_frac(p, q).to_complex()),
            _ => return Err(PivotalError::Overflow),
        }
    }
    let torsor = if m == n {
        let mut count = 1u128;
        for d in &smith.diag {
            count = count.saturating_mul(d.unsigned_abs() as u128);
        }
        Some(count)
    } else {
        None
    };
    Ok(TwistedSolution { exists: true, values: Some(values), torsor })
}

fn solve_signs(ring: &FusionRing, eps: &PivotalSymbols) -> TwistedSolution {
    let n = ring.rank;
    let mut ech: Vec<(u32, u64, bool)> = Vec::new();
    for (i, j, k) in ring.admissible_triples() {
        let mut mask = 1u64 << j;
        mask ^= 1 << k;
        mask ^= 1 << i;
        let mut rhs = eps.sign(i, j, k) == Some(-1);
        for (p, em, er) in &ech {
            if mask >> p & 1 == 1 {
                mask ^= em;
                rhs ^= er;
            }
        }
        if mask == 0 {
            if rhs {
                return no_solution();
            }
            continue;
        }
        let p = mask.trailing_zeros();
        for (_, em, er) in ech.iter_mut() {
            if *em >> p & 1 == 1 {
                *em ^= mask;
                *er ^= rhs;
            }
        }
        ech.push((p, mask, rhs));
    }
    let mut bits = 0u64;
    for (p, _, rhs) in &ech {
        if *rhs {
            bits |= 1 << p;
        }
    }
    let values = (0..n)
        .map(|i| Complex64::new(if bits >> i & 1 == 1 { -1.0 } else { 1.0 }, 0.0))
        .collect();
    let free = n - ech.len();
    TwistedSolution { exists: true, values: Some(values), torsor: Some(1u128 << free) }
}

/// Solves t_j t_k = eps^i_{jk} t_i over unit-modulus scalars, or over signs
/// when `spherical` is set.  The unit row forces t_0 = 1 and the duality
/// rows force t against star-conjugation without special casing.
pub fn solve_twisted(
    ring: &FusionRing,
    eps: &PivotalSymbols,
    spherical: bool,
) -> Result<TwistedSolution, PivotalError> {
    eps.check(ring)?;
    if spherical {
        Ok(solve_signs(ring, eps))
    } else {
        solve_unit_circle(ring, eps)
    }
}

/// Largest deviation of d_j d_k from sum_i eps^i_{jk} N^i_{jk} d_i.  The
/// dimension vector must be nonzero and equal on star-paired indices.
pub fn dimension_checks(
    ring: &FusionRing,
    eps: &PivotalSymbols,
    dims: &[f64],
) -> Result<f64, PivotalError> {
    eps.check(ring)?;
    if dims.len() != ring.rank {
        return Err(PivotalError::BadDimensions);
    }
    for i in 0..ring.rank {
        if !dims[i].is_finite() || dims[i] == 0.0 || dims[i] != dims[ring.star[i]] {
            return Err(PivotalError::BadDimensions);
        }
    }
    let mut worst = 0.0f64;
    for j in 0..ring.rank {
        for k in 0..ring.rank {
            let mut rhs = 0.0;
            for i in 0..ring.rank {
                let c = ring.coeff(i, j, k);
                if c > 0 {
                    rhs += f64::from(eps.sign(i, j, k).unwrap()) * f64::from(c) * dims[i];
                }
            }
            worst = worst.max((dims[j] * dims[k] - rhs).abs());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone)]
pub struct FrobeniusPerron {
    pub dims: Vec<f64>,
    /// Largest deviation of d_j d_k from sum_i N^i_{jk} d_i.
    pub residual: f64,
}

/// Power iteration for the positive dimension character.  The unit column
/// keeps the iteration matrix primitive, so the limit is strictly positive.
pub fn frobenius_perron(ring: &FusionRing) -> Result<FrobeniusPerron, PivotalError> {
    let n = ring.rank;
    let triples = ring.admissible_triples();
    let mut v = vec![1.0f64; n];
    let mut converged = false;
    for _ in 0..200_000 {
        let mut w = vec![0.0f64; n];
        for &(i, j, k) in &triples {
            w[k] += f64::from(ring.coeff(i, j, k)) * v[i];
        }
        let norm = w.iter().cloned().fold(0.0, f64::max);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(PivotalError::NoConvergence);
        }
        for x in w.iter_mut() {
            *x /= norm;
        }
        let diff = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = w;
        if diff < 1e-14 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(PivotalError::NoConvergence);
    }
    let d0 = v[0];
    let dims: Vec<f64> = v.iter().map(|x| x / d0).collect();
    let mut residual = 0.0f64;
    for j in 0..n {
        for k in 0..n {
            let mut rhs = 0.0;
            for i in 0..n {
                rhs += f64::from(ring.coeff(i, j, k)) * dims[i];
            }
            residual = residual.max((dims[j] * dims[k] - rhs).abs());
        }
    }
    Ok(FrobeniusPerron { dims, residual })
}

/// (number of unit-modulus solutions of t_a t_b = t_{ab}, number of sign
/// solutions): the orders of the character groups of the abelianization and
/// of its mod-2 quotient.
pub fn grouplike_counts(group: &FiniteGroup) -> (u128, u128) {
    let n = group.order;
    let mut rows: BTreeSet<Vec<i128>> = BTreeSet::new();
    for a in 0..n {
        for b in 0..n {
            let mut row = vec![0i128; n];
            row[a] += 1;
            row[b] += 1;
            row[group.mul(a, b)] -= 1;
            rows.insert(row);
        }
    }
    let with_rhs: Vec<(Vec<i128>, i128)> = rows.into_iter().map(|r| (r, 0)).collect();
    let (ech, _) = relation_echelon(with_rhs, n);
    let a: Vec<Vec<i128>> = ech.into_iter().map(|(r, _)| r).collect();
    let smith = smith_form(&a);
    let mut full = 1u128;
    let mut signs = 1u128;
    for t in 0..n {
        let d = smith.diag.get(t).copied().unwrap_or(0).unsigned_abs() as u128;
        assert!(d != 0, "abelianization lattice must have full rank");
        full = full.saturating_mul(d);
        signs = signs.saturating_mul(gcd(d as i128, 2) as u128);
    }
    (full, signs)
}

fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> CMat {
    if d == 0 {
        return CMat::zeros(0, 0);
    }
    let m = CMat::from_fn(d, d, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let qr = m.qr();
    qr.q()
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn dagger_gap(
    weights_a: &[f64],
    weights_b: &[f64],
    seed: u64,
    perturb: bool,
) -> Result<f64, PivotalError> {
    if weights_a.is_empty() || weights_b.is_empty() {
        return Err(PivotalError::BadWeights);
    }
    if weights_a.iter().chain(weights_b).any(|w| !w.is_finite() || *w <= 0.0) {
        return Err(PivotalError::BadWeights);
    }
    let ra = weights_a.len();
    let rb = weights_b.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dims_f: Vec<Vec<usize>> =
        (0..rb).map(|_| (0..ra).map(|_| rng.random_range(0..=3)).collect()).collect();
    let mut dims_g: Vec<Vec<usize>> =
        (0..rb).map(|_| (0..ra).map(|_| rng.random_range(0..=3)).collect()).collect();
    let live = (0..rb).any(|mu| (0..ra).any(|i| dims_f[mu][i] > 0 && dims_g[mu][i] > 0));
    if !live {
        dims_f[0][0] = 1;
        dims_g[0][0] = 1;
    }
    let mut blocks = Vec::new();
    for mu in 0..rb {
        for i in 0..ra {
            let m = dims_f[mu][i];
            let n = dims_g[mu][i];
            if m == 0 || n == 0 {
                continue;
            }
            let uf = random_unitary(&mut rng, m);
            let ug = random_unitary(&mut rng, n);
            let theta = CMat::from_fn(n, m, |_, _| {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            blocks.push((mu, i, uf, ug, theta.transpose()));
        }
    }
    // Perturbations are drawn after the shared block data so both variants
    // see identical transports at the same seed.
    let mut leg = |len: usize| -> Vec<f64> {
        (0..len).map(|_| 1.0 + rng.random_range(-0.1..0.1)).collect()
    };
    let (pfa, pfb, pga, pgb) = if perturb {
        (leg(ra), leg(rb), leg(ra), leg(rb))
    } else {
        (vec![1.0; ra], vec![1.0; rb], vec![1.0; ra], vec![1.0; rb])
    };
    let mut worst = 0.0f64;
    for (mu, i, uf, ug, theta_t) in &blocks {
        let scale = (weights_a[*i] / weights_b[*mu]).sqrt();
        let phi_f = uf.scale(scale);
        let phi_g_inv = ug.adjoint().scale(1.0 / scale);
        let d_right = &phi_f * theta_t * &phi_g_inv;
        let rf = (weights_a[*i] * pfa[*i]) / (weights_b[*mu] * pfb[*mu]);
        let rg = (weights_a[*i] * pga[*i]) / (weights_b[*mu] * pgb[*mu]);
        let d_left = &phi_f.scale(rf) * theta_t * &phi_g_inv.scale(1.0 / rg);
        worst = worst.max(max_abs(&(d_left - d_right)));
    }
    Ok(worst)
}

/// Seeded two-functor block model with the given endpoint weights; returns
/// the largest entrywise gap between the dagger transported through the
/// right adjunctions and the one transported through the weighted trace
/// transposes.  The gap vanishes whenever both transports are built from
/// the same weight data.
pub fn semisimple_dagger_check(
    weights_a: &[f64],
    weights_b: &[f64],
    seed: u64,
) -> Result<f64, PivotalError> {
    dagger_gap(weights_a, weights_b, seed, false)
}

/// Negative control: each functor rebuilds its trace transpose from an
/// independently perturbed copy of the weights (10% per entry), so the
/// scale factors no longer cancel and the gap detects the mismatch.
pub fn semisimple_dagger_check_perturbed(
    weights_a: &[f64],
    weights_b: &[f64],
    seed: u64,
) -> Result<f64, PivotalError> {
    dagger_gap(weights_a, weights_b, seed, true)
}

#[derive(Debug, Deserialize)]
struct FusionRingFile {
    #[serde(default)]
    name: Option<String>,
    rank: usize,
    #[serde(default)]
    unit: usize,
    star: Vec<usize>,
    #[serde(rename = "N", default)]
    entries: Vec<(usize, usize, usize, u32)>,
}

pub fn fusion_ring_from_json(text: &str) -> Result<FusionRing, String> {
    let file: FusionRingFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if file.unit != 0 {
        return Err(format!("unit index must be 0, got {}", file.unit));
    }
    FusionRing::new(
        file.name.as_deref().unwrap_or("custom"),
        file.rank,
        file.star,
        &file.entries,
    )
    .map_err(|e| e.to_string())
}

#[derive(Debug, Deserialize)]
struct PivotalFile {
    eps: Vec<(usize, usize, usize, i32)>,
}

pub fn pivotal_from_json(ring: &FusionRing, text: &str) -> Result<PivotalSymbols, String> {
    let file: PivotalFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
    PivotalSymbols::from_entries(ring, &file.eps).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grp::{build_group, GroupSpec};

    fn s3() -> FiniteGroup {
        build_group(&GroupSpec::Symmetric(3)).unwrap()
    }

    fn cyclic(n: usize) -> FiniteGroup {
        build_group(&GroupSpec::Cyclic(n)).unwrap()
    }

    fn klein() -> FiniteGroup {
        build_group(&GroupSpec::Product(
            Box::new(GroupSpec::Cyclic(2)),
            Box::new(GroupSpec::Cyclic(2)),
        ))
        .unwrap()
    }

    fn equation_residual(ring: &FusionRing, eps: &PivotalSymbols, vals: &[Complex64]) -> f64 {
        ring.admissible_triples()
            .into_iter()
            .map(|(i, j, k)| {
                let s = f64::from(eps.sign(i, j, k).unwrap());
                (vals[j] * vals[k] - vals[i] * s).norm()
            })
            .fold(0.0, f64::max)
    }

    fn brute_signs_exist(ring: &FusionRing, eps: &PivotalSymbols) -> bool {
        let triples = ring.admissible_triples();
        (0u32..1 << ring.rank).any(|mask| {
            let t = |a: usize| if mask >> a & 1 == 1 { -1i32 } else { 1 };
            triples.iter().all(|&(i, j, k)| t(j) * t(k) == eps.sign(i, j, k).unwrap() * t(i))
        })
    }

    #[test]
    fn builtin_rings_pass_validation() {
        for (name, rank) in
            [("A1", 1), ("YangLee", 2), ("B2", 3), ("B3", 4), ("B4", 5), ("B5", 6), ("TY2", 3), ("TY3", 4), ("TY4", 5)]
        {
            let ring = builtin_ring(name).unwrap();
            assert_eq!(ring.rank, rank, "{name}");
        }
        assert_eq!(group_ring(&s3()).unwrap().rank, 6);
        assert!(matches!(builtin_ring("Frob"), Err(PivotalError::UnknownBuiltin(_))));
        assert!(matches!(builtin_ring("B0"), Err(PivotalError::UnknownBuiltin(_))));
        assert!(matches!(builtin_ring("TY0"), Err(PivotalError::UnknownBuiltin(_))));
    }

    #[test]
    fn rank_two_idempotent_table_is_rejected() {
        assert!(matches!(
            yang_lee_literal(),
            Err(PivotalError::DualityFailure { j: 1, k: 1 })
        ));
    }

    #[test]
    fn orbit_layout_of_b3_is_frozen() {
        let ring = builtin_ring("B3").unwrap();
        let orbits = triple_orbits(&ring);
        assert_eq!(orbits.len(), 7);
        let unit: Vec<_> = orbits.iter().filter(|o| touches_unit(o[0])).collect();
        assert_eq!(unit.len(), 4);
        let free: Vec<_> = orbits.iter().filter(|o| !touches_unit(o[0])).map(|o| o[0]).collect();
        assert_eq!(free, vec![(1, 2, 2), (1, 3, 3), (3, 3, 3)]);
        let big = orbits.iter().find(|o| o.contains(&(1, 3, 3))).unwrap();
        assert_eq!(big.len(), 6);
    }

    #[test]
    fn cohomology_ranks_match_hand_reductions() {
        let expect: [(&str, usize); 7] = [
            ("A1", 0),
            ("YangLee", 0),
            ("B2", 0),
            ("B3", 1),
            ("B4", 1),
            ("TY2", 0),
            ("TY3", 1),
        ];
        for (name, rank) in expect {
            let h = pivotal_cohomology(&builtin_ring(name).unwrap());
            assert_eq!(h.rank, rank, "{name}");
            assert_eq!(h.order(), Some(1u128 << rank), "{name}");
        }
        assert_eq!(pivotal_cohomology(&builtin_ring("B3").unwrap()).generators, vec![(1, 3, 3)]);
        assert_eq!(pivotal_cohomology(&builtin_ring("B4").unwrap()).generators, vec![(2, 4, 4)]);
        assert_eq!(pivotal_cohomology(&group_ring(&cyclic(2)).unwrap()).rank, 0);
    }

    fn permuted(ring: &FusionRing, rng: &mut ChaCha8Rng) -> FusionRing {
        let r = ring.rank;
        let mut pi: Vec<usize> = (0..r).collect();
        for i in (2..r).rev() {
            let j = rng.random_range(1..=i);
            pi.swap(i, j);
        }
        let mut star = vec![0; r];
        for i in 0..r {
            star[pi[i]] = pi[ring.star[i]];
        }
        let mut entries = Vec::new();
        for (i, j, k) in ring.admissible_triples() {
            entries.push((pi[i], pi[j], pi[k], ring.coeff(i, j, k)));
        }
        FusionRing::new("perm", r, star, &entries).unwrap()
    }

    #[test]
    fn cohomology_rank_is_relabeling_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for name in ["B3", "B4", "B5", "TY3", "TY4"] {
            let ring = builtin_ring(name).unwrap();
            let base = pivotal_cohomology(&ring).rank;
            for _ in 0..5 {
                let shuffled = permuted(&ring, &mut rng);
                assert_eq!(pivotal_cohomology(&shuffled).rank, base, "{name}");
            }
        }
    }

    #[test]
    fn symbol_classes_separate_orbit_flips() {
        let ring = builtin_ring("B3").unwrap();
        let plus = symbol_class(&ring, &PivotalSymbols::all_plus(&ring)).unwrap();
        assert!(plus.is_trivial);
        assert_eq!(plus.components, vec![false]);

        let flip_b = PivotalSymbols::flip_orbits(&ring, &[(1, 2, 2)]).unwrap();
        let cb = symbol_class(&ring, &flip_b).unwrap();
        assert!(!cb.is_trivial);
        assert_eq!(cb.components, vec![true]);

        let flip_a = PivotalSymbols::flip_orbits(&ring, &[(1, 3, 3)]).unwrap();
        let ca = symbol_class(&ring, &flip_a).unwrap();
        assert!(!ca.is_trivial);
        assert_eq!(ca.components, cb.components);

        // The lone orbit of the extra object is a rescaling, hence trivial.
        let flip_c = PivotalSymbols::flip_orbits(&ring, &[(3, 3, 3)]).unwrap();
        assert!(symbol_class(&ring, &flip_c).unwrap().is_trivial);

        // Flipping both nontrivial-class orbits is the rescaling by the
        // paired non-unit class, so the flips cancel.
        let both = PivotalSymbols::flip_orbits(&ring, &[(1, 2, 2), (1, 3, 3)]).unwrap();
        assert!(symbol_class(&ring, &both).unwrap().is_trivial);
    }

    fn class_twist(ring: &FusionRing, eps: &PivotalSymbols, rng: &mut ChaCha8Rng) -> PivotalSymbols {
        let mut f = vec![1i32; ring.rank];
        for i in 1..ring.rank {
            if i <= ring.star[i] {
                let s = if rng.random_bool(0.5) { -1 } else { 1 };
                f[i] = s;
                f[ring.star[i]] = s;
            }
        }
        let entries: Vec<(usize, usize, usize, i32)> = ring
            .admissible_triples()
            .into_iter()
            .map(|(i, j, k)| (i, j, k, eps.sign(i, j, k).unwrap() * f[i] * f[j] * f[k]))
            .collect();
        PivotalSymbols::from_entries(ring, &entries).unwrap()
    }

    #[test]
    fn rescaling_preserves_the_class() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for name in ["B3", "B4", "TY3"] {
            let ring = builtin_ring(name).unwrap();
            let reps: Vec<(usize, usize, usize)> = triple_orbits(&ring)
                .into_iter()
                .filter(|o| !touches_unit(o[0]))
                .map(|o| o[0])
                .collect();
            for _ in 0..10 {
                let seeds: Vec<_> = reps.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
                let eps = PivotalSymbols::flip_orbits(&ring, &seeds).unwrap();
                let base = symbol_class(&ring, &eps).unwrap();
                let twisted = class_twist(&ring, &eps, &mut rng);
                let got = symbol_class(&ring, &twisted).unwrap();
                assert_eq!(got.is_trivial, base.is_trivial, "{name}");
                assert_eq!(got.components, base.components, "{name}");
            }
        }
    }

    #[test]
    fn bad_symbol_tables_are_witnessed() {
        let ring = builtin_ring("B3").unwrap();
        match PivotalSymbols::from_entries(&ring, &[(1, 3, 3, -1)]) {
            Err(PivotalError::SymmetryViolation(a, b)) => {
                assert_eq!(a, (1, 3, 3));
                assert_eq!(b, (3, 2, 3));
            }
            other => panic!("expected symmetry witness, got {other:?}"),
        }
        match PivotalSymbols::flip_orbits(&ring, &[(0, 1, 2)]) {
            Err(PivotalError::UnitSymbolNotOne(t)) => assert_eq!(t.0, 0),
            other => panic!("expected unit witness, got {other:?}"),
        }
        assert!(matches!(
            PivotalSymbols::from_entries(&ring, &[(1, 1, 1, -1)]),
            Err(PivotalError::NotAdmissible(1, 1, 1))
        ));
        assert!(matches!(
            PivotalSymbols::from_entries(&ring, &[(1, 2, 2, 3)]),
            Err(PivotalError::NotASign)
        ));
    }

    #[test]
    fn twisted_solver_matches_hand_solutions() {
        let yl = builtin_ring("YangLee").unwrap();
        let sol = solve_twisted(&yl, &PivotalSymbols::all_plus(&yl), false).unwrap();
        assert!(sol.exists);
        assert_eq!(sol.torsor, Some(1));
        let vals = sol.values.unwrap();
        assert!((vals[0] - 1.0).norm() < 1e-12 && (vals[1] - 1.0).norm() < 1e-12);

        let z3 = group_ring(&cyclic(3)).unwrap();
        let plus3 = PivotalSymbols::all_plus(&z3);
        let circle = solve_twisted(&z3, &plus3, false).unwrap();
        assert!(circle.exists);
        assert_eq!(circle.torsor, Some(3));
        let signs = solve_twisted(&z3, &plus3, true).unwrap();
        assert!(signs.exists);
        assert_eq!(signs.torsor, Some(1));

        let z2 = group_ring(&cyclic(2)).unwrap();
        let signs2 = solve_twisted(&z2, &PivotalSymbols::all_plus(&z2), true).unwrap();
        assert_eq!(signs2.torsor, Some(2));

        let b3 = builtin_ring("B3").unwrap();
        for seed in [(1, 2, 2), (1, 3, 3)] {
            let eps = PivotalSymbols::flip_orbits(&b3, &[seed]).unwrap();
            for spherical in [false, true] {
                let out = solve_twisted(&b3, &eps, spherical).unwrap();
                assert!(!out.exists, "{seed:?} {spherical}");
                assert!(out.values.is_none() && out.torsor.is_none());
            }
        }

        // Trivial-class twist: the unique solution flips only the extra object.
        let eps_c = PivotalSymbols::flip_orbits(&b3, &[(3, 3, 3)]).unwrap();
        let sph = solve_twisted(&b3, &eps_c, true).unwrap();
        assert!(sph.exists);
        assert_eq!(sph.torsor, Some(1));
        let v = sph.values.unwrap();
        let signs: Vec<f64> = v.iter().map(|z| z.re).collect();
        assert_eq!(signs, vec![1.0, 1.0, 1.0, -1.0]);
        let circ = solve_twisted(&b3, &eps_c, false).unwrap();
        assert!(circ.exists);
        assert_eq!(circ.torsor, Some(1));
        assert!(equation_residual(&b3, &eps_c, &circ.values.unwrap()) < 1e-12);
    }

    #[test]
    fn circle_solutions_respect_unit_and_star() {
        let rings = [group_ring(&cyclic(3)).unwrap(), group_ring(&cyclic(4)).unwrap(), builtin_ring("TY3").unwrap()];
        for ring in &rings {
            let eps = PivotalSymbols::all_plus(ring);
            let sol = solve_twisted(ring, &eps, false).unwrap();
            let vals = sol.values.unwrap();
            assert!((vals[0] - 1.0).norm() < 1e-12);
            for i in 0..ring.rank {
                assert!((vals[i].norm() - 1.0).abs() < 1e-12);
                assert!((vals[ring.star[i]] - vals[i].conj()).norm() < 1e-12);
            }
            assert!(equation_residual(ring, &eps, &vals) < 1e-12);
        }
    }

    #[test]
    fn sign_solvability_agrees_with_class_and_brute_force() {
        let pool: Vec<FusionRing> = vec![
            builtin_ring("YangLee").unwrap(),
            builtin_ring("B2").unwrap(),
            builtin_ring("B3").unwrap(),
            builtin_ring("B4").unwrap(),
            builtin_ring("B5").unwrap(),
            builtin_ring("TY2").unwrap(),
            builtin_ring("TY3").unwrap(),
            group_ring(&cyclic(2)).unwrap(),
            group_ring(&cyclic(4)).unwrap(),
            group_ring(&klein()).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(0x5f);
        for round in 0..100 {
            let ring = &pool[rng.random_range(0..pool.len())];
            let reps: Vec<(usize, usize, usize)> = triple_orbits(ring)
                .into_iter()
                .filter(|o| !touches_unit(o[0]))
                .map(|o| o[0])
                .collect();
            let seeds: Vec<_> = reps.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
            let eps = PivotalSymbols::flip_orbits(ring, &seeds).unwrap();
            let trivial = symbol_class(ring, &eps).unwrap().is_trivial;
            let brute = brute_signs_exist(ring, &eps);
            let sph = solve_twisted(ring, &eps, true).unwrap();
            assert_eq!(trivial, brute, "round {round} ring {}", ring.name);
            assert_eq!(sph.exists, brute, "round {round} ring {}", ring.name);
            if sph.exists {
                let vals = sph.values.unwrap();
                assert!(equation_residual(ring, &eps, &vals) < 1e-12);
                assert!(sph.torsor.unwrap() >= 1);
                let circ = solve_twisted(ring, &eps, false).unwrap();
                assert!(circ.exists);
                assert!(equation_residual(ring, &eps, &circ.values.unwrap()) < 1e-12);
            }
        }
    }

    #[test]
    fn dimension_residuals_match_known_vectors() {
        let zs3 = group_ring(&s3()).unwrap();
        let ones = vec![1.0; 6];
        assert_eq!(dimension_checks(&zs3, &PivotalSymbols::all_plus(&zs3), &ones).unwrap(), 0.0);

        let yl = builtin_ring("YangLee").unwrap();
        let plus = PivotalSymbols::all_plus(&yl);
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        assert!(dimension_checks(&yl, &plus, &[1.0, phi]).unwrap() < 1e-10);
        assert!(dimension_checks(&yl, &plus, &[1.0, (1.0 - 5.0f64.sqrt()) / 2.0]).unwrap() < 1e-10);

        let minus = PivotalSymbols::flip_orbits(&yl, &[(1, 1, 1)]).unwrap();
        assert!(dimension_checks(&yl, &minus, &[1.0, 1.0 / phi]).unwrap() < 1e-10);
        assert!(dimension_checks(&yl, &minus, &[1.0, phi]).unwrap() > 1.0);

        let b3 = builtin_ring("B3").unwrap();
        let d = vec![1.0, 1.0, 1.0, 3.0];
        assert_eq!(dimension_checks(&b3, &PivotalSymbols::all_plus(&b3), &d).unwrap(), 0.0);

        assert!(matches!(
            dimension_checks(&yl, &plus, &[1.0, 0.0]),
            Err(PivotalError::BadDimensions)
        ));
        assert!(matches!(
            dimension_checks(&b3, &PivotalSymbols::all_plus(&b3), &[1.0, 2.0, 1.0, 3.0]),
            Err(PivotalError::BadDimensions)
        ));
    }

    #[test]
    fn perron_dimensions_converge() {
        let yl = frobenius_perron(&builtin_ring("YangLee").unwrap()).unwrap();
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        assert!((yl.dims[1] - phi).abs() < 1e-10);
        assert!((yl.dims[1] * yl.dims[1] - yl.dims[1] - 1.0).abs() < 1e-10);
        assert!(yl.residual < 1e-9);

        let ty2 = frobenius_perron(&builtin_ring("TY2").unwrap()).unwrap();
        assert!((ty2.dims[2] - 2.0f64.sqrt()).abs() < 1e-10);
        assert!(ty2.residual < 1e-9);

        let zs3 = frobenius_perron(&group_ring(&s3()).unwrap()).unwrap();
        assert_eq!(zs3.dims, vec![1.0; 6]);
        assert_eq!(zs3.residual, 0.0);

        let b3 = frobenius_perron(&builtin_ring("B3").unwrap()).unwrap();
        for (i, want) in [1.0, 1.0, 1.0, 3.0].iter().enumerate() {
            assert!((b3.dims[i] - want).abs() < 1e-10);
        }
    }

    #[test]
    fn grouplike_counts_match_abelianizations() {
        assert_eq!(grouplike_counts(&cyclic(3)), (3, 1));
        assert_eq!(grouplike_counts(&cyclic(4)), (4, 2));
        assert_eq!(grouplike_counts(&s3()), (2, 2));
        assert_eq!(grouplike_counts(&klein()), (4, 4));
        let q8 = build_group(&GroupSpec::Quaternion).unwrap();
        assert_eq!(grouplike_counts(&q8), (4, 4));
    }

    #[test]
    fn dagger_gap_vanishes_for_shared_weights() {
        assert_eq!(semisimple_dagger_check(&[2.0], &[2.0], 7).unwrap(), 0.0);
        for seed in 0..6 {
            let gap = semisimple_dagger_check(&[1.0, 2.0, 3.0], &[1.0, 1.0], seed).unwrap();
            assert!(gap < 1e-9, "seed {seed}: {gap}");
        }
        let gap = semisimple_dagger_check(&[0.5, 2.0], &[1.0, 3.0, 0.25], 11).unwrap();
        assert!(gap < 1e-9);
        assert!(matches!(semisimple_dagger_check(&[], &[1.0], 0), Err(PivotalError::BadWeights)));
        assert!(matches!(
            semisimple_dagger_check(&[1.0], &[-1.0], 0),
            Err(PivotalError::BadWeights)
        ));
    }

    #[test]
    fn dagger_gap_flags_independent_scales() {
        for seed in 0..6 {
            let gap =
                semisimple_dagger_check_perturbed(&[1.0, 2.0, 3.0], &[1.0, 1.0], seed).unwrap();
            assert!(gap > 1e-3, "seed {seed}: {gap}");
        }
    }

    #[test]
    fn json_documents_round_trip() {
        let ring = fusion_ring_from_json(
            r#"{
                "name": "B2",
                "rank": 3,
                "unit": 0,
                "star": [0, 1, 2],
                "N": [
                    [0, 1, 1, 1], [2, 1, 2, 1], [2, 2, 1, 1],
                    [0, 2, 2, 1], [1, 2, 2, 1], [2, 2, 2, 1]
                ]
            }"#,
        )
        .unwrap();
        assert_eq!(ring.rank, 3);
        assert_eq!(ring.coeff(2, 2, 2), 1);
        assert_eq!(pivotal_cohomology(&ring).rank, 0);

        let err = fusion_ring_from_json(
            r#"{"rank": 2, "unit": 0, "star": [0, 1], "N": [[1, 1, 1, 1]]}"#,
        )
        .unwrap_err();
        assert!(err.contains("duality"), "{err}");

        let err = fusion_ring_from_json(r#"{"rank": 1, "unit": 1, "star": [0], "N": []}"#)
            .unwrap_err();
        assert!(err.contains("unit"), "{err}");

        let b3 = builtin_ring("B3").unwrap();
        let eps = pivotal_from_json(
            &b3,
            r#"{"eps": [[1, 2, 2, -1], [2, 1, 1, -1]]}"#,
        )
        .unwrap();
        assert!(!symbol_class(&b3, &eps).unwrap().is_trivial);

        let err = pivotal_from_json(&b3, r#"{"eps": [[1, 2, 2, -1]]}"#).unwrap_err();
        assert!(err.contains("mismatch"), "{err}");
        let err = pivotal_from_json(&b3, r#"{"eps": [[1, 1, 1, -1]]}"#).unwrap_err();
        assert!(err.contains("non-admissible"), "{err}");
    }
}
