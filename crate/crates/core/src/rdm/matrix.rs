use serde::Serialize;

use super::kernel::{powers, KernelPolynomial};
use super::RdmError;
use crate::harmonium::HarmoniumParams;
use crate::real::Real;

/// Square band matrix stored by diagonals: `diag[d][k] = M[k][k+d]`.
#[derive(Debug, Clone, Serialize)]
pub struct SymBand<T> {
    pub dim: usize,
    pub bandwidth: usize,
    pub diag: Vec<Vec<T>>,
}

impl<T: Real> SymBand<T> {
    pub fn zeros(dim: usize, bandwidth: usize) -> Self {
        let diag = (0..=bandwidth)
            .map(|d| vec![T::zero(); dim.saturating_sub(d)])
            .collect();
        SymBand { dim, bandwidth, diag }
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        if d > self.bandwidth {
            T::zero()
        } else {
            self.diag[d][lo].clone()
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).collect())
            .collect()
    }
}

/// Truncated one-body density matrix in the scale-L Hermite basis.
#[derive(Debug, Clone, Serialize)]
pub struct RdmMatrix<T> {
    pub n_particles: usize,
    /// Half bandwidth 2(N-1).
    pub band: SymBand<T>,
    pub trace_target: usize,
    /// Roundoff estimate per entry.
    pub element_error_bound: T,
}

impl<T: Real> RdmMatrix<T> {
    pub fn dim(&self) -> usize {
        self.band.dim
    }

    pub fn bandwidth(&self) -> usize {
        self.band.bandwidth
    }

    pub fn get(&self, k: usize, n: usize) -> T {
        self.band.get(k, n)
    }

    pub fn trace(&self) -> T {
        self.band.diag[0].iter().fold(T::zero(), |a, v| a + v)
    }

    /// Block of indices with `k % 2 == parity`; half bandwidth N-1.
    pub fn parity_block(&self, parity: usize) -> SymBand<T> {
        let idx: Vec<usize> = (parity..self.dim()).step_by(2).collect();
        let w = self.bandwidth() / 2;
        let mut out = SymBand::zeros(idx.len(), w);
        for d in 0..=w {
            for i in 0..idx.len().saturating_sub(d) {
                out.diag[d][i] = self.get(idx[i], idx[i + d]);
            }
        }
        out
    }

    /// TOML dump with full-precision entries.
    pub fn to_structured(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(out, "dim = {}\nbandwidth = {}", self.dim(), self.bandwidth());
        let _ = writeln!(
            out,
            "element_error_bound = \"{}\"",
            self.element_error_bound.to_decimal()
        );
        let _ = writeln!(out, "entries = [");
        for (d, diag) in self.band.diag.iter().enumerate() {
            for (k, v) in diag.iter().enumerate() {
                if !v.is_zero() {
                    let _ = writeln!(out, "  [{}, {}, \"{}\"],", k, k + d, v.to_decimal());
                }
            }
        }
        out.push_str("]\n");
        out
    }
}

/// Powers of the position operator `X = (a + a†)/√2` in a truncated number
/// basis of size `b`, as band matrices (`X^p` has half bandwidth `p`).
struct PositionPowers<T> {
    /// p → rows of `2p+1` entries, offset `j - k + p`.
    powers: Vec<Vec<Vec<T>>>,
}

impl<T: Real> PositionPowers<T> {
    fn new(size: usize, max_power: usize) -> Self {
        let half = T::from_ratio(1, 2);
        let sq: Vec<T> = (0..=size).map(|k| (T::from_usize(k) * &half).sqrt()).collect();
        let mut powers: Vec<Vec<Vec<T>>> = vec![(0..size).map(|_| vec![T::one()]).collect()];
        for p in 1..=max_power {
            let prev = &powers[p - 1];
            let mut cur = vec![vec![T::zero(); 2 * p + 1]; size];
            for (k, row) in cur.iter_mut().enumerate() {
                // (X^p)_{kj} = √(k/2)(X^{p-1})_{k-1,j} + √((k+1)/2)(X^{p-1})_{k+1,j}
                for (src, w) in [
                    (k.checked_sub(1), &sq[k]),
                    ((k + 1 < size).then_some(k + 1), &sq[k + 1]),
                ] {
                    let Some(src) = src else { continue };
                    for (off, v) in prev[src].iter().enumerate() {
                        if v.is_zero() {
                            continue;
                        }
                        // column j = src + off - (p-1)
                        let j = src as isize + off as isize - (p as isize - 1);
                        let new_off = (j - k as isize + p as isize) as usize;
                        row[new_off] += v.clone() * w;
                    }
                }
            }
            powers.push(cur);
        }
        PositionPowers { powers }
    }

    /// Nonzero range of row `k` of `X^p` as (first column, values).
    fn row(&self, p: usize, k: usize) -> (isize, &[T]) {
        (k as isize - p as isize, &self.powers[p][k])
    }
}

/// `ρ_kn = Σ_ab f_ab Σ_m (X^a)_{km} w_m (X^b)_{mn}` with Mehler weights
/// `w_m = √π √(1-q²) q^m`.
///
/// The inner sum over `m` is finite because `X^a` is banded, so no series
/// truncation enters; `element_error_bound` is a roundoff estimate.
pub fn matrix_elements<T: Real>(
    kernel: &KernelPolynomial<T>,
    params: &HarmoniumParams<T>,
    dim: usize,
) -> Result<RdmMatrix<T>, RdmError> {
    let nn = kernel.n_particles;
    if params.n_particles != nn {
        return Err(RdmError::ParticleMismatch {
            kernel: nn,
            params: params.n_particles,
        });
    }
    let deg = kernel.degree;
    let bandwidth = 2 * (nn - 1);
    if dim < nn || dim <= bandwidth {
        return Err(RdmError::DimensionTooSmall { dim, bandwidth });
    }
    let size = dim + deg + 1;
    let xp = PositionPowers::<T>::new(size, deg);

    let q = &kernel.mehler_q;
    let prefactor = T::pi().sqrt() * (T::one() - q.clone() * q).sqrt();
    let weights: Vec<T> = powers(q, size - 1).into_iter().map(|w| w * &prefactor).collect();

    // P_a = Σ_b f_ab X^b as band rows with half bandwidth deg
    let width = 2 * deg + 1;
    let mut pa: Vec<Vec<Vec<T>>> = Vec::with_capacity(deg + 1);
    let mut pa_abs: Vec<Vec<Vec<T>>> = Vec::with_capacity(deg + 1);
    for a in 0..=deg {
        let mut rows = vec![vec![T::zero(); width]; size];
        let mut rows_abs = vec![vec![T::zero(); width]; size];
        for b in 0..=deg {
            let f = &kernel.coeffs[a][b];
            if f.is_zero() {
                continue;
            }
            let fa = f.abs();
            for m in 0..size {
                let (start, vals) = xp.row(b, m);
                for (i, v) in vals.iter().enumerate() {
                    let j = start + i as isize;
                    if j < 0 || j as usize >= size {
                        continue;
                    }
                    let off = (j - m as isize + deg as isize) as usize;
                    rows[m][off] += f.clone() * v;
                    rows_abs[m][off] += fa.clone() * v.abs();
                }
            }
        }
        pa.push(rows);
        pa_abs.push(rows_abs);
    }

    let mut band = SymBand::zeros(dim, bandwidth);
    let mut worst = T::zero();
    for k in 0..dim {
        for d in 0..=bandwidth.min(dim - 1 - k) {
            let n = k + d;
            let mut acc = T::zero();
            let mut mag = T::zero();
            for a in 0..=deg {
                let (start, vals) = xp.row(a, k);
                for (i, xv) in vals.iter().enumerate() {
                    if xv.is_zero() {
                        continue;
                    }
                    let m = start + i as isize;
                    if m < 0 || m as usize >= size {
                        continue;
                    }
                    let m = m as usize;
                    let off = n as isize - m as isize + deg as isize;
                    if off < 0 || off as usize >= width {
                        continue;
                    }
                    let t = xv.clone() * &weights[m];
                    acc += t.clone() * &pa[a][m][off as usize];
                    mag += t.abs() * &pa_abs[a][m][off as usize];
                }
            }
            band.diag[d][k] = acc;
            worst = worst.max_of(mag);
        }
    }
    let ops = T::from_usize(4 * (deg + 1) * (deg + 1) + 8);
    let element_error_bound = worst * T::epsilon() * ops;

    Ok(RdmMatrix {
        n_particles: nn,
        band,
        trace_target: nn,
        element_error_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonium::params_from_kappa;
    use crate::rdm::kernel::{bosonic_kernel, marginal_kernel};
    use crate::rdm::quadrature::quadrature_oracle;
    use approx::assert_relative_eq;

    fn build(n: usize, kappa: f64, dim: usize) -> (KernelPolynomial<f64>, RdmMatrix<f64>) {
        let p = params_from_kappa(n, kappa).unwrap();
        let k = marginal_kernel(&p).unwrap();
        let m = matrix_elements(&k, &p, dim).unwrap();
        (k, m)
    }

    #[test]
    fn position_powers_match_dense_products() {
        let size = 12;
        let xp = PositionPowers::<f64>::new(size, 4);
        let mut x = vec![vec![0.0; size]; size];
        for k in 0..size - 1 {
            let v = ((k + 1) as f64 / 2.0).sqrt();
            x[k][k + 1] = v;
            x[k + 1][k] = v;
        }
        let mut acc = x.clone();
        for p in 2..=4 {
            let mut next = vec![vec![0.0; size]; size];
            for i in 0..size {
                for j in 0..size {
                    next[i][j] = (0..size).map(|t| acc[i][t] * x[t][j]).sum();
                }
            }
            acc = next;
            for i in 0..size {
                let (start, vals) = xp.row(p, i);
                for j in 0..size {
                    let off = j as isize - start;
                    let got = if off >= 0 && (off as usize) < vals.len() {
                        vals[off as usize]
                    } else {
                        0.0
                    };
                    assert!((got - acc[i][j]).abs() < 1e-12, "p={p} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn free_fermions_fill_lowest_levels() {
        let (_, m) = build(2, 0.0, 8);
        for k in 0..8 {
            for n in 0..8 {
                let expected = if k == n && k < 2 { 1.0 } else { 0.0 };
                assert!((m.get(k, n) - expected).abs() < 1e-13, "({k},{n}) = {}", m.get(k, n));
            }
        }
    }

    #[test]
    fn trace_parity_and_symmetry() {
        for (n, kappa) in [(2usize, 0.1), (3, 1.0), (4, 10.0), (5, 1.0)] {
            let (_, m) = build(n, kappa, 60);
            assert_relative_eq!(m.trace(), n as f64, max_relative = 1e-10);
            for k in 0..60 {
                for d in (1..=m.bandwidth()).step_by(2) {
                    if k + d < 60 {
                        assert_eq!(m.get(k, k + d), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn agrees_with_quadrature_oracle_including_band_zeros() {
        for (n, kappa) in [(3usize, 1.0), (2, 0.1), (4, 10.0), (5, 0.1)] {
            let (ker, m) = build(n, kappa, 12);
            let bw = m.bandwidth();
            for k in 0..12 {
                for j in k..12 {
                    let o = quadrature_oracle(&ker, k, j, &1e-14).unwrap();
                    let tol = 1e-12 + 10.0 * m.element_error_bound;
                    if j - k > bw {
                        assert!(o.abs() < tol, "band zero ({k},{j}) = {o}");
                    } else {
                        assert!(
                            (m.get(k, j) - o).abs() < tol,
                            "N={n} κ={kappa} ({k},{j}): {} vs {o}",
                            m.get(k, j)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn bosonic_reduction_is_diagonal_geometric() {
        for (n, kappa) in [(3usize, 1.0), (4, 10.0)] {
            let p = params_from_kappa(n, kappa).unwrap();
            let ker = bosonic_kernel(&p).unwrap();
            let m = matrix_elements(&ker, &p, 30).unwrap();
            let q = p.kernel_q;
            for k in 0..30 {
                assert_relative_eq!(
                    m.get(k, k),
                    n as f64 * (1.0 - q) * f64::powi(q, k as i32),
                    max_relative = 1e-11,
                    epsilon = 1e-300
                );
                if k + 2 < 30 {
                    assert!(m.get(k, k + 2).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn parity_block_layout() {
        let (_, m) = build(3, 1.0, 11);
        let even = m.parity_block(0);
        let odd = m.parity_block(1);
        assert_eq!((even.dim, odd.dim), (6, 5));
        assert_eq!(even.bandwidth, 2);
        assert_eq!(even.get(1, 3), m.get(2, 6));
        assert_eq!(odd.get(0, 2), m.get(1, 5));
    }

    #[test]
    fn rejects_tiny_dimension() {
        let p = params_from_kappa(3, 1.0).unwrap();
        let k = marginal_kernel(&p).unwrap();
        assert!(matches!(
            matrix_elements(&k, &p, 4),
            Err(RdmError::DimensionTooSmall { .. })
        ));
    }
}
