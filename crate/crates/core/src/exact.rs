//! Fraction-free integer elimination.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Determinant of a square integer matrix by Bareiss elimination.
pub fn determinant(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    assert!(m.iter().all(|row| row.len() == n), "matrix is not square");
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// Rank over the rationals, by fraction-free row reduction.
pub fn rank(rows: &[Vec<BigInt>]) -> usize {
    let Some(width) = rows.first().map(Vec::len) else {
        return 0;
    };
    let mut m: Vec<Vec<BigInt>> = rows.to_vec();
    let mut r = 0;
    let mut prev = BigInt::one();
    for c in 0..width {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..m.len() {
            for j in c + 1..width {
                let v = (&m[i][j] * &m[r][c] - &m[i][c] * &m[r][j]) / &prev;
                m[i][j] = v;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[r][c].abs();
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }

    /// Leibniz expansion.
    fn det_by_permutations(m: &[Vec<BigInt>]) -> BigInt {
        fn perms(n: usize) -> Vec<Vec<usize>> {
            if n == 0 {
                return vec![Vec::new()];
            }
            let mut out = Vec::new();
            for p in perms(n - 1) {
                for pos in 0..=p.len() {
                    let mut q = p.clone();
                    q.insert(pos, n - 1);
                    out.push(q);
                }
            }
            out
        }
        let n = m.len();
        perms(n)
            .into_iter()
            .map(|p| {
                let inversions = (0..n)
                    .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                    .filter(|&(i, j)| p[i] > p[j])
                    .count();
                let term: BigInt = (0..n).map(|i| m[i][p[i]].clone()).product();
                if inversions % 2 == 0 {
                    term
                } else {
                    -term
                }
            })
            .sum()
    }

    #[test]
    fn small_determinants() {
        assert_eq!(determinant(mat(&[&[2, 1], &[1, 3]])), BigInt::from(5));
        assert_eq!(determinant(mat(&[&[0, 1], &[1, 0]])), BigInt::from(-1));
        assert_eq!(determinant(mat(&[&[1, 2], &[2, 4]])), BigInt::zero());
        assert_eq!(determinant(Vec::new()), BigInt::one());
    }

    #[test]
    fn determinant_matches_expansion() {
        let m = mat(&[
            &[3, -2, 0, 5],
            &[0, 0, 7, 1],
            &[-4, 1, 2, 2],
            &[6, 0, -3, 1],
        ]);
        assert_eq!(determinant(m.clone()), det_by_permutations(&m));
    }

    #[test]
    fn ranks() {
        assert_eq!(rank(&mat(&[&[1, 2, 3], &[2, 4, 6], &[0, 1, 1]])), 2);
        assert_eq!(rank(&mat(&[&[0, 0], &[0, 0]])), 0);
        assert_eq!(rank(&mat(&[&[2, 0], &[0, -2], &[2, 2]])), 2);
        assert_eq!(rank(&[]), 0);
    }
}
