//! Integer matrices: Smith normal form, determinants, and linear systems with
//! right-hand side in `Q/Z`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::circle::CircleValue;

/// Dense integer matrix stored as rows.
pub type IntMatrix = Vec<Vec<i64>>;

/// Dense arbitrary-precision integer matrix stored as rows.
pub type BigMatrix = Vec<Vec<BigInt>>;

/// Result of [`smith_normal_form`]: `u · m · v = d`.
///
/// The transforms are kept in arbitrary precision because their entries can
/// grow far beyond the entries of `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snf {
    pub u: BigMatrix,
    pub d: IntMatrix,
    pub v: BigMatrix,
}

impl Snf {
    /// Diagonal entries of `d` (length `min(rows, cols)`).
    pub fn diagonal(&self) -> Vec<i64> {
        let k = self.d.len().min(self.d.first().map_or(0, |r| r.len()));
        (0..k).map(|i| self.d[i][i]).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|&&x| x != 0).count()
    }
}

pub fn identity(n: usize) -> IntMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect()
}

pub fn mat_mul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let n = a.len();
    let k = b.len();
    let m = b.first().map_or(0, |r| r.len());
    let mut out = vec![vec![0i64; m]; n];
    for i in 0..n {
        assert_eq!(a[i].len(), k, "dimension mismatch");
        for t in 0..k {
            let x = a[i][t];
            if x == 0 {
                continue;
            }
            for j in 0..m {
                out[i][j] += x * b[t][j];
            }
        }
    }
    out
}

pub fn to_big(m: &IntMatrix) -> BigMatrix {
    m.iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect()
}

pub fn big_mat_mul(a: &BigMatrix, b: &BigMatrix) -> BigMatrix {
    let m = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            assert_eq!(row.len(), b.len(), "dimension mismatch");
            (0..m)
                .map(|j| row.iter().zip(b).map(|(x, r)| x * &r[j]).sum())
                .collect()
        })
        .collect()
}

/// `(x, y, p/g, q/g)` with `x·p + y·q = g = gcd(p, q)`; plain subtraction when `p | q`.
fn unimodular_pair(p: &BigInt, q: &BigInt) -> (BigInt, BigInt, BigInt, BigInt) {
    if (q % p).is_zero() {
        return (BigInt::one(), BigInt::zero(), BigInt::one(), q / p);
    }
    let e = p.extended_gcd(q);
    (e.x, e.y, p / &e.gcd, q / &e.gcd)
}

// (row_s, row_i) <- (x·row_s + y·row_i, -q·row_s + p·row_i), determinant 1
fn combine_rows(m: &mut [Vec<BigInt>], s: usize, i: usize, c: &(BigInt, BigInt, BigInt, BigInt)) {
    let (x, y, p, q) = c;
    for j in 0..m[s].len() {
        let (a, b) = (m[s][j].clone(), m[i][j].clone());
        m[s][j] = x * &a + y * &b;
        m[i][j] = p * &b - q * &a;
    }
}

fn combine_cols(m: &mut [Vec<BigInt>], s: usize, j: usize, c: &(BigInt, BigInt, BigInt, BigInt)) {
    let (x, y, p, q) = c;
    for row in m.iter_mut() {
        let (a, b) = (row[s].clone(), row[j].clone());
        row[s] = x * &a + y * &b;
        row[j] = p * &b - q * &a;
    }
}

fn narrow(x: i128) -> i64 {
    i64::try_from(x).expect("integer matrix entry overflow")
}

/// Smith normal form of an integer matrix.
///
/// Returns unimodular `u`, `v` with `u · m · v = d`, where `d` is diagonal with
/// nonnegative entries `d_1 | d_2 | …` (zeros last).
pub fn smith_normal_form(m: &IntMatrix) -> Snf {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    for r in m {
        assert_eq!(r.len(), cols, "ragged matrix");
    }
    let mut a = to_big(m);
    let mut u = to_big(&identity(rows));
    let mut v = to_big(&identity(cols));

    for t in 0..rows.min(cols) {
        // smallest nonzero entry of the trailing block becomes the pivot
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !a[i][j].is_zero() && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs())
                {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        u.swap(t, pi);
        for row in a.iter_mut().chain(v.iter_mut()) {
            row.swap(t, pj);
        }

        loop {
            // clear column t below the pivot, then row t right of it
            for i in t + 1..rows {
                if !a[i][t].is_zero() {
                    let c = unimodular_pair(&a[t][t], &a[i][t]);
                    combine_rows(&mut a, t, i, &c);
                    combine_rows(&mut u, t, i, &c);
                }
            }
            let mut dirty = false;
            for j in t + 1..cols {
                if !a[t][j].is_zero() {
                    let c = unimodular_pair(&a[t][t], &a[t][j]);
                    combine_cols(&mut a, t, j, &c);
                    combine_cols(&mut v, t, j, &c);
                    dirty = true;
                }
            }
            if dirty && (t + 1..rows).any(|i| !a[i][t].is_zero()) {
                continue;
            }
            // divisibility: fold a bad row into row t and repeat
            let p = a[t][t].clone();
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !(&a[i][j] % &p).is_zero()));
            match bad {
                Some(i) => {
                    for j in t..cols {
                        let x = a[i][j].clone();
                        a[t][j] += x;
                    }
                    for j in 0..rows {
                        let x = u[i][j].clone();
                        u[t][j] += x;
                    }
                }
                None => break,
            }
        }
        if a[t][t].is_negative() {
            for x in a[t].iter_mut().chain(u[t].iter_mut()) {
                *x = -&*x;
            }
        }
    }

    let d = a
        .into_iter()
        .map(|r| {
            r.into_iter()
                .map(|x| x.to_i64().expect("Smith invariant overflows i64"))
                .collect()
        })
        .collect();
    Snf { u, d, v }
}

/// Determinant by fraction-free (Bareiss) elimination.
pub fn determinant(m: &IntMatrix) -> i64 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut a: Vec<Vec<i128>> = m
        .iter()
        .map(|r| {
            assert_eq!(r.len(), n, "determinant of a non-square matrix");
            r.iter().map(|&x| x as i128).collect()
        })
        .collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    narrow(sign * a[n - 1][n - 1])
}

/// Solves `rows · t = rhs` for `t` with entries in `Q/Z`.
///
/// `Q/Z` is divisible, so the system is solvable exactly when every integer
/// relation among the rows is satisfied by the right-hand side. The solver
/// brings the rows to echelon form with unimodular integer row operations and
/// back-substitutes; free unknowns are set to zero. Returns `None` when the
/// system is inconsistent.
pub fn solve_mod_one(
    rows: &[Vec<i64>],
    rhs: &[CircleValue],
    unknowns: usize,
) -> Option<Vec<CircleValue>> {
    assert_eq!(rows.len(), rhs.len(), "row/rhs length mismatch");
    let mut a: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| {
            assert_eq!(r.len(), unknowns, "row length mismatch");
            r.iter().map(|&x| x as i128).collect()
        })
        .collect();
    let mut b: Vec<CircleValue> = rhs.to_vec();
    let m = a.len();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut r = 0;
    for c in 0..unknowns {
        if r >= m {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for i in r..m {
                if a[i][c] != 0 && best.is_none_or(|bi| a[i][c].abs() < a[bi][c].abs()) {
                    best = Some(i);
                }
            }
            let Some(bi) = best else { break };
            a.swap(r, bi);
            b.swap(r, bi);
            let mut done = true;
            for i in r + 1..m {
                if a[i][c] != 0 {
                    let q = Integer::div_floor(&a[i][c], &a[r][c]);
                    for j in c..unknowns {
                        a[i][j] -= q * a[r][j];
                    }
                    b[i] = b[i] - b[r].mul_int(narrow(q));
                    if a[i][c] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                pivots.push((r, c));
                r += 1;
                break;
            }
        }
    }
    if b[r..].iter().any(|x| !x.is_zero()) {
        return None;
    }
    let mut t = vec![CircleValue::zero(); unknowns];
    for &(row, col) in pivots.iter().rev() {
        let mut acc = b[row];
        for j in col + 1..unknowns {
            if a[row][j] != 0 {
                acc = acc - t[j].mul_int(narrow(a[row][j]));
            }
        }
        t[col] = acc.div_int(narrow(a[row][col]));
    }
    Some(t)
}

#[cfg(test)]
fn big_determinant(m: &BigMatrix) -> BigInt {
    use num_rational::BigRational;
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .map(|r| {
            r.iter()
                .map(|x| BigRational::from_integer(x.clone()))
                .collect()
        })
        .collect();
    let mut det = BigRational::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !a[i][k].is_zero()) else {
            return BigInt::zero();
        };
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        det *= a[k][k].clone();
        for i in k + 1..n {
            let f = &a[i][k] / &a[k][k];
            for j in k..n {
                let x = &f * &a[k][j];
                a[i][j] -= x;
            }
        }
    }
    det.to_integer()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_snf(m: &IntMatrix) {
        let s = smith_normal_form(m);
        assert_eq!(
            big_mat_mul(&big_mat_mul(&s.u, &to_big(m)), &s.v),
            to_big(&s.d)
        );
        assert!(big_determinant(&s.u).abs().is_one());
        assert!(big_determinant(&s.v).abs().is_one());
        let diag = s.diagonal();
        for (i, row) in s.d.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                if i != j {
                    assert_eq!(x, 0);
                }
            }
        }
        for w in diag.windows(2) {
            if w[1] != 0 {
                assert!(w[0] != 0 && w[1] % w[0] == 0, "{diag:?}");
            } else {
                assert!(w[0] >= 0);
            }
        }
    }

    #[test]
    fn snf_of_a2_cartan() {
        let m = vec![vec![2, -1], vec![-1, 2]];
        let s = smith_normal_form(&m);
        assert_eq!(s.diagonal(), vec![1, 3]);
        check_snf(&m);
    }

    #[test]
    fn snf_identity_and_zero() {
        let id = identity(3);
        assert_eq!(smith_normal_form(&id).d, id);
        let z = vec![vec![0; 3]; 2];
        assert_eq!(smith_normal_form(&z).d, z);
    }

    #[test]
    fn snf_rectangular() {
        check_snf(&vec![vec![4, 6, 8], vec![2, 2, 10]]);
        check_snf(&vec![vec![2, 4], vec![6, 8], vec![4, 6]]);
        let s = smith_normal_form(&vec![vec![2, 0], vec![0, 3]]);
        assert_eq!(s.diagonal(), vec![1, 6]);
    }

    #[test]
    fn determinant_values() {
        assert_eq!(determinant(&vec![vec![2, -1], vec![-1, 2]]), 3);
        assert_eq!(determinant(&vec![vec![0, 1], vec![1, 0]]), -1);
        assert_eq!(determinant(&vec![vec![1, 2], vec![2, 4]]), 0);
        assert_eq!(
            determinant(&vec![vec![0, 2, 1], vec![3, 0, 1], vec![1, 1, 0]]),
            5
        );
    }

    #[test]
    fn mod_one_solver() {
        // 2t = 1/2 has solutions 1/4, 3/4
        let t = solve_mod_one(&[vec![2]], &[CircleValue::new(1, 2)], 1).unwrap();
        assert_eq!(t[0].mul_int(2), CircleValue::new(1, 2));
        // t - t = 1/2 is inconsistent
        assert!(solve_mod_one(
            &[vec![1], vec![1]],
            &[CircleValue::zero(), CircleValue::new(1, 2)],
            1
        )
        .is_none());
        // 0·t = 0 leaves t free
        assert_eq!(
            solve_mod_one(&[vec![0]], &[CircleValue::zero()], 1).unwrap(),
            vec![CircleValue::zero()]
        );
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn matrix() -> impl Strategy<Value = IntMatrix> {
        (1usize..=8, 1usize..=8).prop_flat_map(|(r, c)| {
            proptest::collection::vec(proptest::collection::vec(-9i64..=9, c), r)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn snf_is_unimodular_diagonalization(m in matrix()) {
            let s = smith_normal_form(&m);
            prop_assert_eq!(big_mat_mul(&big_mat_mul(&s.u, &to_big(&m)), &s.v), to_big(&s.d));
            prop_assert!(big_determinant(&s.u).abs().is_one());
            prop_assert!(big_determinant(&s.v).abs().is_one());
            let diag = s.diagonal();
            for w in diag.windows(2) {
                if w[1] != 0 {
                    prop_assert!(w[0] != 0 && w[1] % w[0] == 0);
                }
            }
        }

        #[test]
        fn mod_one_solutions_satisfy_the_system(
            rows in proptest::collection::vec(proptest::collection::vec(-3i64..=3, 4), 1..6),
            t in proptest::collection::vec(0i64..12, 4),
        ) {
            let t: Vec<CircleValue> = t.into_iter().map(|x| CircleValue::new(x, 12)).collect();
            let rhs: Vec<CircleValue> = rows
                .iter()
                .map(|r| r.iter().zip(&t).map(|(&a, x)| x.mul_int(a)).sum())
                .collect();
            let sol = solve_mod_one(&rows, &rhs, 4).expect("consistent system");
            for (r, b) in rows.iter().zip(&rhs) {
                let lhs: CircleValue = r.iter().zip(&sol).map(|(&a, x)| x.mul_int(a)).sum();
                prop_assert_eq!(lhs, *b);
            }
        }
    }
}
