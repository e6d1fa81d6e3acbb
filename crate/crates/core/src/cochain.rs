//! Exact U(1) phases and groupoid cochains.
//!
//! A phase is a reduced rational r in [0,1) standing for exp(2πi·r); all
//! cochain arithmetic is additive and exact. Complex numbers appear only
//! when a phase is evaluated at the bundle/character boundary.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gspace::{same_gset, GSet, LoopGroupoid, LoopPoint};
use crate::snf::{solve_mod, Obstruction, SolveOutcome};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Phase(Rational64);

impl Phase {
    pub const ZERO: Phase = Phase(Rational64::new_raw(0, 1));

    pub fn new(r: Rational64) -> Phase {
        Phase(r - r.floor())
    }

    pub fn from_frac(p: i64, q: i64) -> Phase {
        Phase::new(Rational64::new(p, q))
    }

    pub fn rational(&self) -> Rational64 {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    /// exp(2πi·r).
    pub fn to_complex(&self) -> Complex64 {
        let turns = *self.0.numer() as f64 / *self.0.denom() as f64;
        Complex64::from_polar(1.0, std::f64::consts::TAU * turns)
    }

    pub fn parse(s: &str) -> Result<Phase, String> {
        let r: Rational64 = s.trim().parse().map_err(|e| format!("bad phase {s:?}: {e}"))?;
        Ok(Phase::new(r))
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Phase({})", self.0)
    }
}

impl Add for Phase {
    type Output = Phase;
    fn add(self, rhs: Phase) -> Phase {
        Phase::new(self.0 + rhs.0)
    }
}

impl Sub for Phase {
    type Output = Phase;
    fn sub(self, rhs: Phase) -> Phase {
        Phase::new(self.0 - rhs.0)
    }
}

impl Neg for Phase {
    type Output = Phase;
    fn neg(self) -> Phase {
        Phase::new(-self.0)
    }
}

impl std::iter::Sum for Phase {
    fn sum<I: Iterator<Item = Phase>>(iter: I) -> Phase {
        iter.fold(Phase::ZERO, Add::add)
    }
}

impl Serialize for Phase {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Phase {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Phase, D::Error> {
        let s = String::deserialize(d)?;
        Phase::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Dense table of phases over an action groupoid.
///
/// Degree 0 stores one value per object; degree 1 one value per arrow, index
/// x·|G| + g for γ(g ← x); degree 2 one value per composable pair, index
/// (x·|G| + g₂)·|G| + g₁ for c_x(g₂, g₁) where g₂ acts after g₁.
#[derive(Debug, Clone)]
pub struct Cochain {
    pub carrier: Arc<GSet>,
    pub degree: u8,
    pub values: Vec<Phase>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CochainError {
    #[error("degree must be 0, 1, or 2")]
    BadDegree,
    #[error("expected {expected} entries, got {got}")]
    BadLength { expected: usize, got: usize },
    #[error("cochains live on different carriers")]
    CarrierMismatch,
    #[error("loop groupoid does not sit over this carrier")]
    WrongLoopGroupoid,
    #[error("input fails the cocycle law: {0:?}")]
    NotACocycle(CocycleViolation),
}

/// First failing tuple, scanned in lexicographic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CocycleViolation {
    /// c_x(e,g) or c_x(g,e) nonzero.
    Unnormalized { x: usize, g: usize },
    /// Degree-2 law fails at (x, g3, g2, g1).
    Law { x: usize, g3: usize, g2: usize, g1: usize },
    /// Degree-1 homomorphism law fails at (x, g2, g1).
    HomLaw { x: usize, g2: usize, g1: usize },
}

impl Cochain {
    pub fn expected_len(carrier: &GSet, degree: u8) -> usize {
        let n = carrier.group.order;
        carrier.size * n.pow(degree as u32)
    }

    pub fn zero(carrier: Arc<GSet>, degree: u8) -> Cochain {
        let len = Cochain::expected_len(&carrier, degree);
        Cochain {
            carrier,
            degree,
            values: vec![Phase::ZERO; len],
        }
    }

    pub fn from_values(
        carrier: Arc<GSet>,
        degree: u8,
        values: Vec<Phase>,
    ) -> Result<Cochain, CochainError> {
        if degree > 2 {
            return Err(CochainError::BadDegree);
        }
        let expected = Cochain::expected_len(&carrier, degree);
        if values.len() != expected {
            return Err(CochainError::BadLength {
                expected,
                got: values.len(),
            });
        }
        Ok(Cochain {
            carrier,
            degree,
            values,
        })
    }

    pub fn from_fn_deg1(carrier: Arc<GSet>, mut f: impl FnMut(usize, usize) -> Phase) -> Cochain {
        let n = carrier.group.order;
        let values = (0..carrier.size)
            .flat_map(|x| (0..n).map(move |g| (x, g)))
            .map(|(x, g)| f(x, g))
            .collect();
        Cochain {
            carrier,
            degree: 1,
            values,
        }
    }

    pub fn from_fn_deg2(carrier: Arc<GSet>, mut f: impl FnMut(usize, usize, usize) -> Phase) -> Cochain {
        let n = carrier.group.order;
        let mut values = Vec::with_capacity(carrier.size * n * n);
        for x in 0..carrier.size {
            for g2 in 0..n {
                for g1 in 0..n {
                    values.push(f(x, g2, g1));
                }
            }
        }
        Cochain {
            carrier,
            degree: 2,
            values,
        }
    }

    #[inline]
    pub fn at0(&self, x: usize) -> Phase {
        self.values[x]
    }

    /// γ(g ← x).
    #[inline]
    pub fn at1(&self, x: usize, g: usize) -> Phase {
        self.values[x * self.carrier.group.order + g]
    }

    /// c_x(g2, g1): phase for g2 composed after g1 at base point x.
    #[inline]
    pub fn at2(&self, x: usize, g2: usize, g1: usize) -> Phase {
        let n = self.carrier.group.order;
        self.values[(x * n + g2) * n + g1]
    }

    pub fn add(&self, other: &Cochain) -> Result<Cochain, CochainError> {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Cochain) -> Result<Cochain, CochainError> {
        self.combine(other, |a, b| a - b)
    }

    fn combine(
        &self,
        other: &Cochain,
        op: impl Fn(Phase, Phase) -> Phase,
    ) -> Result<Cochain, CochainError> {
        if self.degree != other.degree || !same_gset(&self.carrier, &other.carrier) {
            return Err(CochainError::CarrierMismatch);
        }
        Ok(Cochain {
            carrier: self.carrier.clone(),
            degree: self.degree,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        })
    }

    pub fn neg(&self) -> Cochain {
        Cochain {
            carrier: self.carrier.clone(),
            degree: self.degree,
            values: self.values.iter().map(|&v| -v).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Phase::is_zero)
    }
}

pub fn check_cocycle(c: &Cochain) -> Result<(), CocycleViolation> {
    let x_count = c.carrier.size;
    let n = c.carrier.group.order;
    match c.degree {
        0 => Ok(()),
        1 => {
            for x in 0..x_count {
                for g2 in 0..n {
                    for g1 in 0..n {
                        let lhs = c.at1(c.carrier.apply(g1, x), g2) + c.at1(x, g1);
                        let rhs = c.at1(x, c.carrier.group.mul(g2, g1));
                        if lhs != rhs {
                            return Err(CocycleViolation::HomLaw { x, g2, g1 });
                        }
                    }
                }
            }
            Ok(())
        }
        2 => {
            for x in 0..x_count {
                for g in 0..n {
                    if !c.at2(x, 0, g).is_zero() || !c.at2(x, g, 0).is_zero() {
                        return Err(CocycleViolation::Unnormalized { x, g });
                    }
                }
            }
            let group = &c.carrier.group;
            for x in 0..x_count {
                for g3 in 0..n {
                    for g2 in 0..n {
                        for g1 in 0..n {
                            let lhs = c.at2(x, g2, g1) + c.at2(x, g3, group.mul(g2, g1));
                            let rhs = c.at2(c.carrier.apply(g1, x), g3, g2)
                                + c.at2(x, group.mul(g3, g2), g1);
                            if lhs != rhs {
                                return Err(CocycleViolation::Law { x, g3, g2, g1 });
                            }
                        }
                    }
                }
            }
            Ok(())
        }
        _ => unreachable!("degree checked at construction"),
    }
}

/// (dγ)_x(g₂,g₁) = γ(g₂ ← g₁·x) + γ(g₁ ← x) − γ(g₂g₁ ← x).
pub fn coboundary(gamma: &Cochain) -> Result<Cochain, CochainError> {
    match gamma.degree {
        0 => Ok(Cochain::from_fn_deg1(gamma.carrier.clone(), |x, g| {
            gamma.at0(gamma.carrier.apply(g, x)) - gamma.at0(x)
        })),
        1 => {
            let group = gamma.carrier.group.clone();
            Ok(Cochain::from_fn_deg2(gamma.carrier.clone(), |x, g2, g1| {
                gamma.at1(gamma.carrier.apply(g1, x), g2) + gamma.at1(x, g1)
                    - gamma.at1(x, group.mul(g2, g1))
            }))
        }
        _ => Err(CochainError::BadDegree),
    }
}

/// Twist by the coboundary of γ(g ← x) = c_x(e,e), which clears the unit
/// slots of any table satisfying the composition law. Returns the normalized
/// cochain and the twist used, so the adjustment stays explicit.
pub fn normalize(c: &Cochain) -> Result<(Cochain, Cochain), CochainError> {
    if c.degree != 2 {
        return Err(CochainError::BadDegree);
    }
    let twist = Cochain::from_fn_deg1(c.carrier.clone(), |x, _| c.at2(x, 0, 0));
    let normalized = c.sub(&coboundary(&twist)?)?;
    Ok((normalized, twist))
}

/// Restriction of a degree-1 or degree-2 cochain to one orbit of its
/// carrier, over that orbit with the induced action.
pub fn orbit_restriction(c: &Cochain, orbit: usize) -> Result<Cochain, CochainError> {
    let points = &c.carrier.orbits[orbit];
    let order = c.carrier.group.order;
    let act: Vec<Vec<usize>> = (0..order)
        .map(|g| {
            points
                .iter()
                .map(|&x| points.binary_search(&c.carrier.apply(g, x)).expect("orbit is invariant"))
                .collect()
        })
        .collect();
    let sub = Arc::new(
        crate::gspace::validate_gset(c.carrier.group.clone(), act)
            .expect("induced orbit action is valid"),
    );
    match c.degree {
        1 => Ok(Cochain::from_fn_deg1(sub, |xi, g| c.at1(points[xi], g))),
        2 => Ok(Cochain::from_fn_deg2(sub, |xi, g2, g1| c.at2(points[xi], g2, g1))),
        _ => Err(CochainError::BadDegree),
    }
}

/// Push a cochain one loop level down: degree 2 on X gives degree 1 on ΛX
/// via τ(c)(h ← (x,g)) = c_x(hgh⁻¹, h) − c_x(h, g); degree 1 on X gives
/// degree 0 on ΛX by evaluating at the loop.
pub fn transgress(c: &Cochain, lam: &LoopGroupoid) -> Result<Cochain, CochainError> {
    if !same_gset(&c.carrier, &lam.base) {
        return Err(CochainError::WrongLoopGroupoid);
    }
    check_cocycle(c).map_err(CochainError::NotACocycle)?;
    let group = c.carrier.group.clone();
    match c.degree {
        2 => {
            let n = group.order;
            let mut values = Vec::with_capacity(lam.points.size * n);
            for label in &lam.labels {
                let LoopPoint::One { x, g } = *label else {
                    return Err(CochainError::WrongLoopGroupoid);
                };
                for h in 0..n {
                    values.push(c.at2(x, group.conj(h, g), h) - c.at2(x, h, g));
                }
            }
            Cochain::from_values(lam.points.clone(), 1, values)
        }
        1 => {
            let values = lam
                .labels
                .iter()
                .map(|label| {
                    let LoopPoint::One { x, g } = *label else {
                        return Err(CochainError::WrongLoopGroupoid);
                    };
                    Ok(c.at1(x, g))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Cochain::from_values(lam.points.clone(), 0, values)
        }
        _ => Err(CochainError::BadDegree),
    }
}

/// Degree 2 on X straight to degree 0 on Λ²X: at a commuting pair the two
/// τ steps collapse to c_x(g,h) − c_x(h,g).
pub fn double_transgress(c: &Cochain, lam2: &LoopGroupoid) -> Result<Cochain, CochainError> {
    if c.degree != 2 {
        return Err(CochainError::BadDegree);
    }
    if lam2.level != 2 || !same_gset(&c.carrier, &lam2.base) {
        return Err(CochainError::WrongLoopGroupoid);
    }
    check_cocycle(c).map_err(CochainError::NotACocycle)?;
    let values = lam2
        .labels
        .iter()
        .map(|label| {
            let LoopPoint::Two { x, g, h } = *label else {
                return Err(CochainError::WrongLoopGroupoid);
            };
            Ok(c.at2(x, g, h) - c.at2(x, h, g))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Cochain::from_values(lam2.points.clone(), 0, values)
}

/// Outcome of the cohomology-class decision.
#[derive(Debug, Clone)]
pub enum CohomologyVerdict {
    /// γ with dγ = c′ − c.
    Witness(Cochain),
    /// No γ exists; integer functional annihilating every coboundary at the
    /// working modulus while pairing nontrivially with c′ − c.
    Distinct(NonCobCertificate),
}

#[derive(Debug, Clone)]
pub struct NonCobCertificate {
    pub modulus: i64,
    /// Indexed like the dense entry table of the difference cochain.
    pub functional: Vec<i64>,
    /// functional · (modulus · (c′ − c)) mod modulus; nonzero.
    pub pairing: i64,
}

impl CohomologyVerdict {
    pub fn witness(&self) -> Option<&Cochain> {
        match self {
            CohomologyVerdict::Witness(g) => Some(g),
            CohomologyVerdict::Distinct(_) => None,
        }
    }

    pub fn is_witness(&self) -> bool {
        matches!(self, CohomologyVerdict::Witness(_))
    }
}

/// Decide whether c and c′ differ by a coboundary. Works for degree 2
/// (solving for a degree-1 γ) and degree 1 (solving for a degree-0 γ).
///
/// Denominators are cleared to N = lcm of the denominators of c′ − c. A
/// degree-0 witness never needs phases finer than N, but a degree-1 witness
/// may: Nγ is then a 1-cocycle, which up to a real coboundary is a character
/// of each stabilizer, so γ only needs phases of order dividing N·L with L
/// the lcm of the stabilizer orders. Solving the integer system mod that
/// modulus by Smith reduction is therefore exact in both directions.
pub fn cohomologous(c: &Cochain, cp: &Cochain) -> Result<CohomologyVerdict, CochainError> {
    if c.degree != cp.degree || !same_gset(&c.carrier, &cp.carrier) {
        return Err(CochainError::CarrierMismatch);
    }
    if c.degree == 0 {
        return Err(CochainError::BadDegree);
    }
    check_cocycle(c).map_err(CochainError::NotACocycle)?;
    check_cocycle(cp).map_err(CochainError::NotACocycle)?;
    let diff = cp.sub(c)?;
    let carrier = &c.carrier;
    let n_grp = carrier.group.order;
    let cleared: i64 = diff
        .values
        .iter()
        .fold(1i64, |acc, p| acc.lcm(&p.denom()));
    let modulus: i64 = match c.degree {
        2 => {
            let stab_lcm = carrier
                .stabilizers
                .iter()
                .fold(1i64, |acc, s| acc.lcm(&(s.len() as i64)));
            cleared * stab_lcm
        }
        _ => cleared,
    };
    let gamma_degree = c.degree - 1;
    let unknowns = Cochain::expected_len(carrier, gamma_degree);

    let mut rows: Vec<Vec<i128>> = Vec::with_capacity(diff.values.len());
    let mut rhs: Vec<i128> = Vec::with_capacity(diff.values.len());
    let push_rhs = |p: Phase| -> i128 {
        let r = p.rational() * Rational64::from_integer(modulus);
        debug_assert!(r.denom().abs() == 1);
        i128::from(*r.numer())
    };
    match c.degree {
        2 => {
            for x in 0..carrier.size {
                for g2 in 0..n_grp {
                    for g1 in 0..n_grp {
                        let mut row = vec![0i128; unknowns];
                        row[carrier.apply(g1, x) * n_grp + g2] += 1;
                        row[x * n_grp + g1] += 1;
                        row[x * n_grp + carrier.group.mul(g2, g1)] -= 1;
                        rows.push(row);
                        rhs.push(push_rhs(diff.at2(x, g2, g1)));
                    }
                }
            }
        }
        1 => {
            for x in 0..carrier.size {
                for g in 0..n_grp {
                    let mut row = vec![0i128; unknowns];
                    row[carrier.apply(g, x)] += 1;
                    row[x] -= 1;
                    rows.push(row);
                    rhs.push(push_rhs(diff.at1(x, g)));
                }
            }
        }
        _ => unreachable!(),
    }

    match solve_mod(&rows, &rhs, i128::from(modulus)) {
        SolveOutcome::Solution(y) => {
            let values: Vec<Phase> = y
                .iter()
                .map(|&v| Phase::from_frac(v as i64, modulus))
                .collect();
            let gamma = Cochain::from_values(carrier.clone(), gamma_degree, values)?;
            debug_assert!(coboundary(&gamma)?.sub(&diff)?.is_zero());
            Ok(CohomologyVerdict::Witness(gamma))
        }
        SolveOutcome::Obstruction(Obstruction {
            functional,
            pairing,
        }) => Ok(CohomologyVerdict::Distinct(NonCobCertificate {
            modulus,
            functional: functional.iter().map(|&x| x as i64).collect(),
            pairing: pairing as i64,
        })),
    }
}

/// Exhaustive search over all γ with phases in (1/order)Z. Exponential in
/// the arrow count; only for cross-checking the Smith path at desk scale.
pub fn cohomologous_brute(
    c: &Cochain,
    cp: &Cochain,
    order: i64,
) -> Result<Option<Cochain>, CochainError> {
    if c.degree != cp.degree || !same_gset(&c.carrier, &cp.carrier) {
        return Err(CochainError::CarrierMismatch);
    }
    if c.degree == 0 {
        return Err(CochainError::BadDegree);
    }
    let diff = cp.sub(c)?;
    let gamma_degree = c.degree - 1;
    let unknowns = Cochain::expected_len(&c.carrier, gamma_degree);
    assert!(
        (order as f64).powi(unknowns as i32) <= 2e7,
        "brute-force search space too large"
    );
    let mut digits = vec![0i64; unknowns];
    loop {
        let values: Vec<Phase> = digits.iter().map(|&d| Phase::from_frac(d, order)).collect();
        let gamma = Cochain::from_values(c.carrier.clone(), gamma_degree, values)?;
        if coboundary(&gamma)?.sub(&diff)?.is_zero() {
            return Ok(Some(gamma));
        }
        let mut i = 0;
        loop {
            if i == unknowns {
                return Ok(None);
            }
            digits[i] += 1;
            if digits[i] < order {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// cocycle.json payload.
#[derive(Debug, Serialize, Deserialize)]
pub struct CochainFile {
    pub gset: serde_json::Value,
    pub degree: u8,
    pub entries: Vec<String>,
}

pub fn cochain_from_json(text: &str) -> Result<Cochain, String> {
    let file: CochainFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let gset = Arc::new(crate::gspace::build_gset_from_json(&file.gset.to_string())?);
    let values = file
        .entries
        .iter()
        .map(|s| Phase::parse(s))
        .collect::<Result<Vec<_>, _>>()?;
    Cochain::from_values(gset, file.degree, values).map_err(|e| e.to_string())
}

/// The standard order-2 pairing cocycle on (Z/2)² over a point:
/// c((a₁,b₁),(a₂,b₂)) = a₁b₂/2 with elements encoded as a·2+b.
pub fn klein_pairing_cocycle(carrier: Arc<GSet>) -> Cochain {
    assert_eq!(carrier.size, 1);
    assert_eq!(carrier.group.order, 4);
    Cochain::from_fn_deg2(carrier, |_, g2, g1| {
        Phase::from_frac(((g2 / 2) * (g1 % 2)) as i64, 2)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grp::{build_group, GroupSpec};
    use crate::gspace::{build_gset, loop_groupoid, GSetSpec};
    use rand::{Rng, SeedableRng};

    fn klein_point() -> Arc<GSet> {
        let g = Arc::new(
            build_group(&GroupSpec::Product(
                Box::new(GroupSpec::Cyclic(2)),
                Box::new(GroupSpec::Cyclic(2)),
            ))
            .unwrap(),
        );
        Arc::new(build_gset(g, &GSetSpec::Point).unwrap())
    }

    fn s3_point() -> Arc<GSet> {
        let g = Arc::new(build_group(&GroupSpec::Symmetric(3)).unwrap());
        Arc::new(build_gset(g, &GSetSpec::Point).unwrap())
    }

    fn s3_coset() -> Arc<GSet> {
        let g = Arc::new(build_group(&GroupSpec::Symmetric(3)).unwrap());
        Arc::new(build_gset(g, &GSetSpec::Coset(vec![0, 1])).unwrap())
    }

    fn random_deg1(carrier: Arc<GSet>, seed: u64, denom: i64) -> Cochain {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Cochain::from_fn_deg1(carrier, |_, _| {
            Phase::from_frac(rng.random_range(0..denom), denom)
        })
    }

    #[test]
    fn phase_arithmetic_wraps() {
        let a = Phase::from_frac(3, 4);
        let b = Phase::from_frac(1, 2);
        assert_eq!(a + b, Phase::from_frac(1, 4));
        assert_eq!(-a, Phase::from_frac(1, 4));
        assert_eq!(Phase::from_frac(7, 2), Phase::from_frac(1, 2));
        assert_eq!(Phase::parse("5/4").unwrap(), Phase::from_frac(1, 4));
    }

    #[test]
    fn zero_cochains_pass() {
        let x = s3_point();
        for degree in [1, 2] {
            assert_eq!(check_cocycle(&Cochain::zero(x.clone(), degree)), Ok(()));
        }
    }

    #[test]
    fn klein_pairing_is_a_cocycle() {
        let c = klein_pairing_cocycle(klein_point());
        assert_eq!(check_cocycle(&c), Ok(()));
    }

    #[test]
    fn witness_can_need_finer_phases_than_the_difference() {
        // 2γ(g) = 1/2 has no solution with γ in (1/2)Z but does in (1/4)Z
        let g = Arc::new(build_group(&GroupSpec::Cyclic(2)).unwrap());
        let x = Arc::new(build_gset(g, &GSetSpec::Point).unwrap());
        let c = Cochain::from_fn_deg2(x.clone(), |_, g2, g1| {
            if g2 == 1 && g1 == 1 {
                Phase::from_frac(1, 2)
            } else {
                Phase::ZERO
            }
        });
        let zero = Cochain::zero(x, 2);
        match cohomologous(&zero, &c).unwrap() {
            CohomologyVerdict::Witness(gamma) => {
                assert!(coboundary(&gamma).unwrap().sub(&c).unwrap().is_zero());
                assert_eq!(gamma.at1(0, 1).denom(), 4);
            }
            CohomologyVerdict::Distinct(_) => panic!("everything bounds over a two-element group"),
        }
    }

    #[test]
    fn orbit_restriction_keeps_values() {
        let g = Arc::new(build_group(&GroupSpec::Symmetric(3)).unwrap());
        let a = build_gset(g.clone(), &GSetSpec::Coset(vec![0, 3, 4])).unwrap();
        let b = build_gset(g.clone(), &GSetSpec::Regular).unwrap();
        let x = Arc::new(crate::gspace::union_gsets(&a, &b).unwrap());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let c = Cochain::from_fn_deg2(x.clone(), |_, g2, g1| {
            if g2 == 0 || g1 == 0 {
                Phase::ZERO
            } else {
                Phase::from_frac(rng.random_range(0..12), 12)
            }
        });
        assert_eq!(x.orbits.len(), 2);
        for orbit in 0..2 {
            let r = orbit_restriction(&c, orbit).unwrap();
            assert_eq!(r.carrier.size, x.orbits[orbit].len());
            for (xi, &xx) in x.orbits[orbit].iter().enumerate() {
                for g2 in 0..6 {
                    for g1 in 0..6 {
                        assert_eq!(r.at2(xi, g2, g1), c.at2(xx, g2, g1));
                    }
                }
            }
        }
        let d = random_deg1(x.clone(), 5, 8);
        let r = orbit_restriction(&d, 1).unwrap();
        for (xi, &xx) in x.orbits[1].iter().enumerate() {
            for g in 0..6 {
                assert_eq!(r.at1(xi, g), d.at1(xx, g));
            }
        }
    }

    #[test]
    fn random_table_rejected() {
        let x = s3_point();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let c = Cochain::from_fn_deg2(x, |_, g2, g1| {
            if g2 == 0 || g1 == 0 {
                Phase::ZERO
            } else {
                Phase::from_frac(rng.random_range(0..8), 8)
            }
        });
        assert!(check_cocycle(&c).is_err());
    }

    #[test]
    fn unnormalized_rejected_and_normalize_fixes() {
        let x = klein_point();
        // d of a γ with γ(e ← x) ≠ 0 is a cocycle but unnormalized.
        let gamma = Cochain::from_fn_deg1(x.clone(), |_, g| Phase::from_frac(1 + g as i64, 4));
        let c = coboundary(&gamma).unwrap();
        assert!(matches!(
            check_cocycle(&c),
            Err(CocycleViolation::Unnormalized { .. })
        ));
        let (cn, twist) = normalize(&c).unwrap();
        assert_eq!(check_cocycle(&cn), Ok(()));
        assert!(cn.add(&coboundary(&twist).unwrap()).unwrap().sub(&c).unwrap().is_zero());
    }

    #[test]
    fn coboundaries_are_cocycles() {
        let carriers = [s3_point(), s3_coset(), klein_point()];
        for seed in 0..50 {
            let carrier = carriers[seed as usize % carriers.len()].clone();
            let mut gamma = random_deg1(carrier.clone(), seed, 8);
            // Force normalization of dγ.
            for x in 0..carrier.size {
                gamma.values[x * carrier.group.order] = Phase::ZERO;
            }
            let c = coboundary(&gamma).unwrap();
            assert_eq!(check_cocycle(&c), Ok(()), "seed {seed}");
        }
    }

    #[test]
    fn deg1_coboundary_on_z2_point() {
        let g = Arc::new(build_group(&GroupSpec::Cyclic(2)).unwrap());
        let x = Arc::new(build_gset(g, &GSetSpec::Point).unwrap());
        let gamma = Cochain::from_fn_deg1(x, |_, g| {
            if g == 1 {
                Phase::from_frac(1, 4)
            } else {
                Phase::ZERO
            }
        });
        let c = coboundary(&gamma).unwrap();
        assert_eq!(c.at2(0, 1, 1), Phase::from_frac(1, 2));
    }

    #[test]
    fn transgression_of_klein_pairing() {
        let x = klein_point();
        let c = klein_pairing_cocycle(x.clone());
        let lam = loop_groupoid(&x, 1).unwrap();
        let tau = transgress(&c, &lam).unwrap();
        assert_eq!(check_cocycle(&tau), Ok(()));
        // Object (pt, g) sits at label index g; τ(c)(h ← g) = c(g,h) − c(h,g).
        let obj = lam
            .index_of(&LoopPoint::One { x: 0, g: 2 })
            .unwrap();
        assert_eq!(tau.at1(obj, 1), Phase::from_frac(1, 2));
        // Nondegenerate alternating pairing: every nonidentity g pairs
        // nontrivially with some h.
        for g in 1..4 {
            let obj = lam.index_of(&LoopPoint::One { x: 0, g }).unwrap();
            assert!((0..4).any(|h| !tau.at1(obj, h).is_zero()));
        }
    }

    #[test]
    fn transgression_is_additive_and_kills_zero() {
        let x = s3_point();
        let lam = loop_groupoid(&x, 1).unwrap();
        let zero = Cochain::zero(x.clone(), 2);
        assert!(transgress(&zero, &lam).unwrap().is_zero());
        // Build two cocycles as coboundaries, transgress each.
        for seed in [5u64, 9] {
            let mut g1 = random_deg1(x.clone(), seed, 8);
            let mut g2 = random_deg1(x.clone(), seed + 100, 8);
            g1.values[0] = Phase::ZERO;
            g2.values[0] = Phase::ZERO;
            let (c1, c2) = (coboundary(&g1).unwrap(), coboundary(&g2).unwrap());
            let lhs = transgress(&c1.add(&c2).unwrap(), &lam).unwrap();
            let rhs = transgress(&c1, &lam)
                .unwrap()
                .add(&transgress(&c2, &lam).unwrap())
                .unwrap();
            assert!(lhs.sub(&rhs).unwrap().is_zero());
        }
    }

    #[test]
    fn transgressed_coboundary_is_a_coboundary() {
        let x = s3_coset();
        let lam = loop_groupoid(&x, 1).unwrap();
        for seed in [1u64, 2, 3] {
            let mut gamma = random_deg1(x.clone(), seed, 4);
            for p in 0..x.size {
                gamma.values[p * x.group.order] = Phase::ZERO;
            }
            let tau = transgress(&coboundary(&gamma).unwrap(), &lam).unwrap();
            let zero = Cochain::zero(tau.carrier.clone(), 1);
            let verdict = cohomologous(&zero, &tau).unwrap();
            assert!(verdict.is_witness(), "seed {seed}");
        }
    }

    #[test]
    fn cohomologous_to_self_and_to_shifted() {
        let x = klein_point();
        let c = klein_pairing_cocycle(x.clone());
        let same = cohomologous(&c, &c).unwrap();
        let witness = same.witness().expect("c ~ c");
        assert!(coboundary(witness).unwrap().is_zero());

        let mut gamma = random_deg1(x.clone(), 77, 4);
        for p in 0..x.size {
            gamma.values[p * x.group.order] = Phase::ZERO;
        }
        let shifted = c.add(&coboundary(&gamma).unwrap()).unwrap();
        let verdict = cohomologous(&c, &shifted).unwrap();
        let w = verdict.witness().expect("c ~ c + dγ");
        assert!(coboundary(w)
            .unwrap()
            .sub(&shifted.sub(&c).unwrap())
            .unwrap()
            .is_zero());
    }

    #[test]
    fn klein_pairing_is_not_a_coboundary() {
        let x = klein_point();
        let c = klein_pairing_cocycle(x.clone());
        let zero = Cochain::zero(x.clone(), 2);
        match cohomologous(&zero, &c).unwrap() {
            CohomologyVerdict::Witness(_) => panic!("pairing class must be nontrivial"),
            CohomologyVerdict::Distinct(cert) => {
                assert_ne!(cert.pairing % cert.modulus, 0);
            }
        }
        // Brute-force cross-check at order 4 over the 4 arrows.
        assert!(cohomologous_brute(&zero, &c, 4).unwrap().is_none());
    }

    #[test]
    fn brute_force_agrees_on_coboundary_case() {
        let x = klein_point();
        let mut gamma = random_deg1(x.clone(), 13, 2);
        gamma.values[0] = Phase::ZERO;
        let c = coboundary(&gamma).unwrap();
        let zero = Cochain::zero(x.clone(), 2);
        let brute = cohomologous_brute(&zero, &c, 2).unwrap().expect("dγ ~ 0");
        assert!(coboundary(&brute).unwrap().sub(&c).unwrap().is_zero());
        assert!(cohomologous(&zero, &c).unwrap().is_witness());
    }

    #[test]
    fn double_transgress_matches_two_steps() {
        let x = klein_point();
        let c = klein_pairing_cocycle(x.clone());
        let lam2 = loop_groupoid(&x, 2).unwrap();
        let tau2 = double_transgress(&c, &lam2).unwrap();
        for (i, label) in lam2.labels.iter().enumerate() {
            let LoopPoint::Two { g, h, .. } = *label else { panic!() };
            let expect = c.at2(0, g, h) - c.at2(0, h, g);
            assert_eq!(tau2.at0(i), expect);
        }
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{
            "gset": {"builtin":"point","group":{"builtin":"cyclic","params":[2]}},
            "degree": 2,
            "entries": ["0","0","0","1/2"]
        }"#;
        let c = cochain_from_json(text).unwrap();
        assert_eq!(check_cocycle(&c), Ok(()));
        assert_eq!(c.at2(0, 1, 1), Phase::from_frac(1, 2));
    }
}
