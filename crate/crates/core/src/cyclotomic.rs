//! Exact evaluation of integer-weighted sums of roots of unity.
//!
//! A sum Σ n_k·exp(2πi·p_k) with rational phases is an algebraic integer in
//! a cyclotomic field; it is rational precisely when its residue modulo the
//! cyclotomic polynomial is a constant. Degrees here stay tiny (the lcm of
//! phase denominators at desk scale), so plain i64 polynomial arithmetic is
//! enough.

use std::collections::BTreeMap;

use num_integer::Integer;

use crate::cochain::Phase;

/// Coefficients of the n-th cyclotomic polynomial, constant term first.
pub fn cyclotomic_poly(n: usize) -> Vec<i64> {
    assert!(n >= 1);
    let mut p = vec![0i64; n + 1];
    p[0] = -1;
    p[n] = 1;
    for d in 1..n {
        if n % d == 0 {
            let phi_d = cyclotomic_poly(d);
            p = poly_div_exact(&p, &phi_d);
        }
    }
    p
}

/// Exact division by a monic divisor; panics if the remainder is nonzero.
fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let (q, r) = poly_div_rem(num, den);
    assert!(r.iter().all(|&c| c == 0), "division must be exact");
    q
}

/// Division with remainder by a monic divisor.
fn poly_div_rem(num: &[i64], den: &[i64]) -> (Vec<i64>, Vec<i64>) {
    let dd = den.len() - 1;
    assert_eq!(den[dd], 1, "divisor must be monic");
    let mut rem = num.to_vec();
    let mut quot = vec![0i64; num.len().saturating_sub(dd)];
    for i in (dd..num.len()).rev() {
        let c = rem[i];
        if c != 0 {
            quot[i - dd] = c;
            for (j, &dj) in den.iter().enumerate() {
                rem[i - dd + j] -= c * dj;
            }
        }
    }
    rem.truncate(dd.max(1));
    (quot, rem)
}

/// Evaluate Σ count·exp(2πi·phase) exactly; Some(m) iff the sum is the
/// rational integer m, None when the sum is irrational.
pub fn weighted_phase_sum_integer(counts: &BTreeMap<Phase, i64>) -> Option<i64> {
    let n = counts
        .keys()
        .fold(1i64, |acc, p| acc.lcm(&p.denom()))
        .unsigned_abs() as usize;
    let mut coeffs = vec![0i64; n.max(1)];
    for (p, &c) in counts {
        let k = (p.numer() * (n as i64 / p.denom())) as usize;
        coeffs[k % n.max(1)] += c;
    }
    if n <= 1 {
        return Some(coeffs[0]);
    }
    let phi = cyclotomic_poly(n);
    let (_, rem) = poly_div_rem(&coeffs, &phi);
    if rem.iter().skip(1).all(|&c| c == 0) {
        Some(rem.first().copied().unwrap_or(0))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(entries: &[(i64, i64, i64)]) -> BTreeMap<Phase, i64> {
        let mut m = BTreeMap::new();
        for &(p, q, c) in entries {
            *m.entry(Phase::from_frac(p, q)).or_insert(0) += c;
        }
        m
    }

    #[test]
    fn small_cyclotomics() {
        assert_eq!(cyclotomic_poly(1), vec![-1, 1]);
        assert_eq!(cyclotomic_poly(2), vec![1, 1]);
        assert_eq!(cyclotomic_poly(3), vec![1, 1, 1]);
        assert_eq!(cyclotomic_poly(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_poly(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_poly(12), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn vanishing_sums() {
        // Full orbits of roots of unity sum to zero.
        assert_eq!(
            weighted_phase_sum_integer(&counts(&[(0, 1, 1), (1, 3, 1), (2, 3, 1)])),
            Some(0)
        );
        assert_eq!(
            weighted_phase_sum_integer(&counts(&[(1, 4, 1), (3, 4, 1)])),
            Some(0)
        );
    }

    #[test]
    fn integer_sums() {
        assert_eq!(
            weighted_phase_sum_integer(&counts(&[(0, 1, 2), (1, 2, 1)])),
            Some(1)
        );
        assert_eq!(weighted_phase_sum_integer(&counts(&[(0, 1, 5)])), Some(5));
        assert_eq!(weighted_phase_sum_integer(&counts(&[])), Some(0));
    }

    #[test]
    fn irrational_sums_rejected() {
        assert_eq!(weighted_phase_sum_integer(&counts(&[(1, 4, 1)])), None);
        assert_eq!(
            weighted_phase_sum_integer(&counts(&[(1, 3, 1), (0, 1, 1)])),
            None
        );
        // exp(2πi/5) + exp(-2πi/5) = golden-ratio related, irrational.
        assert_eq!(
            weighted_phase_sum_integer(&counts(&[(1, 5, 1), (4, 5, 1)])),
            None
        );
    }
}
