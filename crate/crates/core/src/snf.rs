//! Integer Smith reduction and modular linear solving.
//!
//! `smith_form` diagonalizes an integer matrix by unimodular row and column
//! operations, tracking both transforms so callers can recover solutions and
//! obstruction functionals. Entries are i128 throughout; the matrices here
//! are small (hundreds of rows) so Euclidean pivoting keeps growth harmless.

/// U * A * V = D with D diagonal (entries `diag`, nonnegative), U and V
/// unimodular.
#[derive(Debug, Clone)]
pub struct SmithForm {
    pub rows: usize,
    pub cols: usize,
    pub diag: Vec<i128>,
    pub u: Vec<Vec<i128>>,
    pub v: Vec<Vec<i128>>,
}

fn identity(n: usize) -> Vec<Vec<i128>> {
    (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect()
}

pub fn smith_form(a_in: &[Vec<i128>]) -> SmithForm {
    let rows = a_in.len();
    let cols = a_in.first().map_or(0, |r| r.len());
    let mut a = a_in.to_vec();
    let mut u = identity(rows);
    let mut v = identity(cols);
    let mut t = 0;
    while t < rows && t < cols {
        let mut pivot = None;
        for i in t..rows {
            for j in t..cols {
                if a[i][j] != 0
                    && pivot.is_none_or(|(pi, pj): (usize, usize)| {
                        a[i][j].abs() < a[pi][pj].abs()
                    })
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        a.swap(t, pi);
        u.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        for row in v.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            for i in t + 1..rows {
                while a[i][t] != 0 {
                    let q = a[i][t].div_euclid(a[t][t]);
                    for j in 0..cols {
                        a[i][j] -= q * a[t][j];
                    }
                    for j in 0..rows {
                        u[i][j] -= q * u[t][j];
                    }
                    if a[i][t] != 0 {
                        a.swap(t, i);
                        u.swap(t, i);
                    }
                }
            }
            for j in t + 1..cols {
                while a[t][j] != 0 {
                    let q = a[t][j].div_euclid(a[t][t]);
                    for i in 0..rows {
                        a[i][j] -= q * a[i][t];
                    }
                    for i in 0..cols {
                        v[i][j] -= q * v[i][t];
                    }
                    if a[t][j] != 0 {
                        for row in a.iter_mut() {
                            row.swap(t, j);
                        }
                        for row in v.iter_mut() {
                            row.swap(t, j);
                        }
                    }
                }
            }
            // Column clearing can dirty the pivot row and vice versa.
            let col_clean = (t + 1..rows).all(|i| a[i][t] == 0);
            let row_clean = (t + 1..cols).all(|j| a[t][j] == 0);
            if col_clean && row_clean {
                break;
            }
        }
        if a[t][t] < 0 {
            for j in 0..cols {
                a[t][j] = -a[t][j];
            }
            for j in 0..rows {
                u[t][j] = -u[t][j];
            }
        }
        t += 1;
    }
    let diag = (0..rows.min(cols)).map(|i| a[i][i]).collect();
    SmithForm { rows, cols, diag, u, v }
}

/// Invariant-factor chain d1 | d2 | ... derived from any diagonal form by
/// repeated gcd/lcm normalization; zeros sort last.
pub fn invariant_factors(diag: &[i128]) -> Vec<i128> {
    let mut d: Vec<i128> = diag.to_vec();
    loop {
        let mut changed = false;
        for i in 0..d.len() {
            for j in i + 1..d.len() {
                let (a, b) = (d[i], d[j]);
                if b % a.max(1) != 0 || (a == 0 && b != 0) {
                    let g = gcd(a, b);
                    let l = if g == 0 { 0 } else { a / g * b };
                    d[i] = g;
                    d[j] = l.abs();
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    d
}

pub fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Extended gcd: returns (g, x, y) with a·x + b·y = g ≥ 0.
fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// Witness that `a·y ≡ b (mod n)` has no solution: an integer row functional
/// with w·a ≡ 0 (mod n) on every column while w·b ≢ 0 (mod n).
#[derive(Debug, Clone)]
pub struct Obstruction {
    pub functional: Vec<i128>,
    /// w·b mod n, nonzero.
    pub pairing: i128,
}

pub enum SolveOutcome {
    /// One solution with entries in [0, n).
    Solution(Vec<i128>),
    Obstruction(Obstruction),
}

/// Solve a·y ≡ b (mod n) for integer y via Smith reduction.
pub fn solve_mod(a: &[Vec<i128>], b: &[i128], n: i128) -> SolveOutcome {
    assert!(n >= 1);
    let s = smith_form(a);
    assert_eq!(b.len(), s.rows);
    let c: Vec<i128> = s
        .u
        .iter()
        .map(|row| {
            row.iter()
                .zip(b)
                .map(|(&u, &bv)| u * bv)
                .sum::<i128>()
                .rem_euclid(n)
        })
        .collect();
    let mut z = vec![0i128; s.cols];
    for i in 0..s.rows {
        let d = if i < s.diag.len() { s.diag[i] } else { 0 };
        let rhs = c[i];
        if d == 0 {
            if rhs != 0 {
                return SolveOutcome::Obstruction(Obstruction {
                    functional: s.u[i].clone(),
                    pairing: rhs,
                });
            }
            continue;
        }
        let g = gcd(d, n);
        if rhs % g != 0 {
            let scale = n / g;
            let functional: Vec<i128> = s.u[i].iter().map(|&x| (x * scale).rem_euclid(n)).collect();
            return SolveOutcome::Obstruction(Obstruction {
                functional,
                pairing: (scale * rhs).rem_euclid(n),
            });
        }
        let nn = n / g;
        let (_, inv, _) = ext_gcd((d / g).rem_euclid(nn), nn);
        z[i] = ((rhs / g) % nn * inv.rem_euclid(nn.max(1))).rem_euclid(nn.max(1));
    }
    let y: Vec<i128> = (0..s.cols)
        .map(|i| {
            s.v[i]
                .iter()
                .zip(&z)
                .map(|(&v, &zv)| v * zv)
                .sum::<i128>()
                .rem_euclid(n)
        })
        .collect();
    SolveOutcome::Solution(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn mat_mul(a: &[Vec<i128>], b: &[Vec<i128>]) -> Vec<Vec<i128>> {
        let (n, m, p) = (a.len(), b.len(), b[0].len());
        (0..n)
            .map(|i| {
                (0..p)
                    .map(|j| (0..m).map(|k| a[i][k] * b[k][j]).sum())
                    .collect()
            })
            .collect()
    }

    fn check_decomposition(a: &[Vec<i128>]) {
        let s = smith_form(a);
        let uav = mat_mul(&mat_mul(&s.u, a), &s.v);
        for i in 0..s.rows {
            for j in 0..s.cols {
                let want = if i == j && i < s.diag.len() { s.diag[i] } else { 0 };
                assert_eq!(uav[i][j], want, "at ({i},{j})");
            }
        }
    }

    #[test]
    fn smith_on_seeded_matrices() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let rows = rng.random_range(1..6);
            let cols = rng.random_range(1..6);
            let a: Vec<Vec<i128>> = (0..rows)
                .map(|_| (0..cols).map(|_| rng.random_range(-9..10)).collect())
                .collect();
            check_decomposition(&a);
        }
    }

    #[test]
    fn invariant_chain_divides() {
        let f = invariant_factors(&[6, 4, 10]);
        assert_eq!(f, vec![2, 2, 60]);
        let f = invariant_factors(&[0, 3, 2]);
        assert_eq!(f, vec![1, 6, 0]);
    }

    #[test]
    fn solve_finds_known_solution() {
        // y0 + y1 = 1, y0 - y1 = 3 (mod 4) has y = (0, 1) among solutions.
        let a = vec![vec![1, 1], vec![1, -1]];
        match solve_mod(&a, &[1, 3], 4) {
            SolveOutcome::Solution(y) => {
                assert_eq!((y[0] + y[1]).rem_euclid(4), 1);
                assert_eq!((y[0] - y[1]).rem_euclid(4), 3);
            }
            SolveOutcome::Obstruction(_) => panic!("expected solution"),
        }
    }

    #[test]
    fn obstruction_certifies() {
        // 2y ≡ 1 (mod 4) is unsolvable.
        let a = vec![vec![2]];
        match solve_mod(&a, &[1], 4) {
            SolveOutcome::Solution(_) => panic!("expected obstruction"),
            SolveOutcome::Obstruction(o) => {
                let wa: i128 = o.functional[0] * 2;
                assert_eq!(wa.rem_euclid(4), 0);
                assert_ne!(o.pairing.rem_euclid(4), 0);
            }
        }
    }

    #[test]
    fn seeded_systems_roundtrip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let rows = rng.random_range(1..5);
            let cols = rng.random_range(1..5);
            let n = [2, 3, 4, 6, 8][rng.random_range(0..5)] as i128;
            let a: Vec<Vec<i128>> = (0..rows)
                .map(|_| (0..cols).map(|_| rng.random_range(-3..4)).collect())
                .collect();
            let b: Vec<i128> = (0..rows).map(|_| rng.random_range(0..n)).collect();
            match solve_mod(&a, &b, n) {
                SolveOutcome::Solution(y) => {
                    for i in 0..rows {
                        let lhs: i128 = (0..cols).map(|j| a[i][j] * y[j]).sum();
                        assert_eq!(lhs.rem_euclid(n), b[i].rem_euclid(n));
                    }
                }
                SolveOutcome::Obstruction(o) => {
                    for j in 0..cols {
                        let col: i128 = (0..rows).map(|i| o.functional[i] * a[i][j]).sum();
                        assert_eq!(col.rem_euclid(n), 0, "functional must kill the image");
                    }
                    let wb: i128 = (0..rows).map(|i| o.functional[i] * b[i]).sum();
                    assert_ne!(wb.rem_euclid(n), 0);
                }
            }
        }
    }
}
