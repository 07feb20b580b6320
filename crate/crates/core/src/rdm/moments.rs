//! Exact Gaussian moments of Vandermonde-weighted symmetric polynomials.
//!
//! `G[m][m'] = E[e_m(ε) e_m'(ε) V(ε)²]` for `ε` a standard normal vector in
//! `n` dimensions, `e_m` the elementary symmetric polynomials and `V` the
//! Vandermonde product. All values are integers.

use itertools::Itertools;
use rug::Integer;

/// `E[ε^k]` for a standard normal: `(k-1)!!` for even `k`, else 0.
pub fn normal_moment(k: usize) -> Integer {
    if k % 2 == 1 {
        return Integer::new();
    }
    let mut acc = Integer::from(1);
    let mut j = k as u64;
    while j > 1 {
        acc *= j - 1;
        j -= 2;
    }
    acc
}

pub fn binomial(n: usize, k: usize) -> Integer {
    if k > n {
        return Integer::new();
    }
    Integer::from(Integer::binomial_u(n as u32, k as u32))
}

fn permutation_sign(p: &[usize]) -> i32 {
    let inversions = p.iter().tuple_combinations().filter(|(a, b)| a > b).count();
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Fraction-free (Bareiss) determinant.
pub fn bareiss_det(mut m: Vec<Vec<Integer>>) -> Integer {
    let n = m.len();
    if n == 0 {
        return Integer::from(1);
    }
    let mut sign = 1;
    let mut prev = Integer::from(1);
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            match (k + 1..n).find(|&r| m[r][k] != 0) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return Integer::new(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = Integer::from(&m[i][j] * &m[k][k]) - Integer::from(&m[i][k] * &m[k][j]);
                m[i][j] = t.div_exact(&prev);
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if sign < 0 {
        -d
    } else {
        d
    }
}

/// `E[Π_{i<u} ε_i² Π_{u<=i<u+v} ε_i V(ε)²]`.
///
/// Writing `V = det[ε_i^j]`, the double sum over permutations collapses to a
/// single sum of determinants; rows with equal extra power are interchangeable
/// so only the assignment of value sets to the three power classes matters.
fn pattern_moment(n: usize, u: usize, v: usize) -> Integer {
    let c0 = n - u - v;
    let mut total = Integer::new();
    let all: Vec<usize> = (0..n).collect();
    for twos in all.iter().copied().combinations(u) {
        let rest: Vec<usize> = all.iter().copied().filter(|x| !twos.contains(x)).collect();
        for ones in rest.iter().copied().combinations(v) {
            let zeros: Vec<usize> = rest.iter().copied().filter(|x| !ones.contains(x)).collect();
            let sigma: Vec<usize> = zeros.iter().chain(&ones).chain(&twos).copied().collect();
            let powers = std::iter::repeat_n(0, c0)
                .chain(std::iter::repeat_n(1, v))
                .chain(std::iter::repeat_n(2, u));
            let rows: Vec<Vec<Integer>> = sigma
                .iter()
                .zip(powers)
                .map(|(&s, p)| (0..n).map(|b| normal_moment(s + b + p)).collect())
                .collect();
            let det = bareiss_det(rows);
            if permutation_sign(&sigma) > 0 {
                total += det;
            } else {
                total -= det;
            }
        }
    }
    let fact = |k: usize| Integer::from(Integer::factorial(k as u32));
    total * fact(c0) * fact(v) * fact(u)
}

/// The `(n+1)×(n+1)` table `G[m][m']`.
pub fn vandermonde_moments(n: usize) -> Vec<Vec<Integer>> {
    let mut cache = std::collections::HashMap::new();
    let mut g = vec![vec![Integer::new(); n + 1]; n + 1];
    for m in 0..=n {
        for mp in m..=n {
            if (m + mp) % 2 == 1 {
                continue;
            }
            let mut acc = Integer::new();
            for u in (m + mp).saturating_sub(n)..=m.min(mp) {
                let v = m + mp - 2 * u;
                let pm = cache.entry((u, v)).or_insert_with(|| pattern_moment(n, u, v)).clone();
                acc += binomial(n, u) * binomial(n - u, m - u) * binomial(n - m, mp - u) * pm;
            }
            g[m][mp] = acc.clone();
            g[mp][m] = acc;
        }
    }
    g
}
