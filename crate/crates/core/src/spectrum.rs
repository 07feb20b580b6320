//! Natural occupation numbers from the truncated density matrix.

use serde::Serialize;
use thiserror::Error;

use crate::band::{band_eigenvalues, EigenError};
use crate::harmonium::HarmoniumParams;
use crate::polytope::OccupationSpectrum;
use crate::precision::Precision;
use crate::rdm::{marginal_kernel, matrix_elements, KernelPolynomial, RdmError, RdmMatrix};
use crate::real::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("tail target must be positive, got {0}")]
    BadTarget(f64),
    #[error("tail target {target:e} needs R = {needed}, above the limit {max_r}")]
    Unreachable { target: f64, needed: usize, max_r: usize },
    #[error("spectra at R = {r} and R + 4 differ by {diff:e} in l1, above the target {target:e}")]
    NotConverged { r: usize, diff: f64, target: f64 },
    #[error("eigenvalue {value:e} is negative beyond round-off ({threshold:e})")]
    NegativeEigenvalue { value: f64, threshold: f64 },
    #[error(transparent)]
    Rdm(#[from] RdmError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumRequest<T> {
    pub params: HarmoniumParams<T>,
    /// Required l¹ bound on omitted occupation numbers.
    pub target_tail: f64,
    pub max_r: usize,
    pub precision: Precision,
}

pub const DEFAULT_MAX_R: usize = 40_000;

impl<T: Real> SpectrumRequest<T> {
    pub fn new(params: HarmoniumParams<T>, target_tail: f64) -> Self {
        SpectrumRequest {
            params,
            target_tail,
            max_r: DEFAULT_MAX_R,
            precision: Precision::from_bits(T::BITS).unwrap_or(Precision::Bits512),
        }
    }
}

fn decay_tail(n: usize, q: f64, r: usize) -> f64 {
    n as f64 / (1.0 - q) * q.powi(r as i32 + 1)
}

/// `C q^(R+1)` with `C = N/(1-q)`.
pub fn tail_estimate<T: Real>(params: &HarmoniumParams<T>, r: usize) -> f64 {
    decay_tail(params.n_particles, params.q.to_f64(), r)
}

/// Same estimate with the Mehler factor of the kernel, which is the actual
/// asymptotic decay rate of the matrix elements.
pub fn kernel_tail_estimate<T: Real>(params: &HarmoniumParams<T>, r: usize) -> f64 {
    decay_tail(params.n_particles, params.kernel_q.to_f64(), r)
}

fn r_for_decay(n: usize, q: f64, target_tail: f64, limit: usize) -> usize {
    let floor = n + 4 * (n - 1);
    if q <= 0.0 {
        return floor;
    }
    // C q^(R+1) < t  ⇔  R + 1 > ln(t/C)/ln q
    let x = (target_tail * (1.0 - q) / n as f64).ln() / q.ln();
    let mut r = (x.floor().max(0.0) as usize).max(1) - 1;
    while decay_tail(n, q, r) >= target_tail && r <= limit.max(floor) {
        r += 1;
    }
    r.max(floor)
}

/// Smallest R with `C q^(R+1) < target`, at least `N + 2·bandwidth`.
pub fn choose_r<T: Real>(params: &HarmoniumParams<T>, target_tail: f64, max_r: usize) -> Result<usize, SpectrumError> {
    if !(target_tail > 0.0) {
        return Err(SpectrumError::BadTarget(target_tail));
    }
    let needed = r_for_decay(params.n_particles, params.q.to_f64(), target_tail, max_r);
    if needed > max_r {
        return Err(SpectrumError::Unreachable {
            target: target_tail,
            needed,
            max_r,
        });
    }
    Ok(needed)
}

/// Eigenvalues of both parity blocks, merged, descending, with round-off
/// excursions below 0 or above 1 clipped.
pub fn matrix_spectrum<T: Real>(matrix: &RdmMatrix<T>) -> Result<Vec<T>, SpectrumError> {
    let mut all = band_eigenvalues(&matrix.parity_block(0))?;
    all.extend(band_eigenvalues(&matrix.parity_block(1))?);
    all.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    let norm = all.first().cloned().unwrap_or_else(T::zero).abs();
    let eig_roundoff = norm * T::epsilon() * T::from_usize(matrix.dim()).sqrt();
    let threshold = T::from_i128(10) * (matrix.element_error_bound.clone() + eig_roundoff);
    for v in all.iter_mut() {
        if *v < T::zero() {
            if -v.clone() > threshold {
                return Err(SpectrumError::NegativeEigenvalue {
                    value: v.to_f64(),
                    threshold: threshold.to_f64(),
                });
            }
            *v = T::zero();
        } else if *v > T::one() && v.clone() - T::one() <= threshold {
            *v = T::one();
        }
    }
    Ok(all)
}

fn l1_distance<T: Real>(a: &[T], b: &[T]) -> T {
    let len = a.len().max(b.len());
    let mut acc = T::zero();
    for i in 0..len {
        let x = a.get(i).cloned().unwrap_or_else(T::zero);
        let y = b.get(i).cloned().unwrap_or_else(T::zero);
        acc += (x - y).abs();
    }
    acc
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumResult<T> {
    pub spectrum: OccupationSpectrum<T>,
    pub r: usize,
    /// l¹ distance to the spectrum at R + 4.
    pub convergence_gap: T,
    pub element_error_bound: T,
}

/// Full pipeline: kernel, matrix, eigenvalues, and the `R + 4` agreement
/// check. `R` starts at or below [`choose_r`] and may grow up to `max_r`.
pub fn eigen_spectrum<T: Real>(request: &SpectrumRequest<T>) -> Result<SpectrumResult<T>, SpectrumError> {
    let kernel = marginal_kernel(&request.params)?;
    eigen_spectrum_with(&kernel, request)
}

pub fn eigen_spectrum_with<T: Real>(
    kernel: &KernelPolynomial<T>,
    request: &SpectrumRequest<T>,
) -> Result<SpectrumResult<T>, SpectrumError> {
    // start at the kernel's decay rate, never above choose_r, and grow until
    // R and R + 4 agree; at weak coupling the occupations fall off only like
    // sqrt(q) per level, so choose_r itself can be too small
    let cap = request.max_r;
    let start = match choose_r(&request.params, request.target_tail, cap) {
        Ok(r) => r,
        Err(SpectrumError::Unreachable { .. }) => cap,
        Err(e) => return Err(e),
    };
    let n = request.params.n_particles;
    let mut r = r_for_decay(n, request.params.kernel_q.to_f64(), request.target_tail, cap).min(start);
    let (m, values, gap) = loop {
        let m = matrix_elements(kernel, &request.params, r)?;
        let values = matrix_spectrum(&m)?;
        let values4 = matrix_spectrum(&matrix_elements(kernel, &request.params, r + 4)?)?;
        let gap = l1_distance(&values, &values4);
        if gap.to_f64() < request.target_tail {
            break (m, values, gap);
        }
        if r >= cap {
            return Err(SpectrumError::NotConverged {
                r,
                diff: gap.to_f64(),
                target: request.target_tail,
            });
        }
        r = (r + (r / 4).max(4)).min(cap);
    };
    // the gap covers four levels decaying at least like sqrt(q) each, so the
    // tail beyond R sums to at most gap / (1 - q²)
    let q4 = request.params.kernel_q.to_f64().powi(2);
    let tail_bound = T::from_f64(kernel_tail_estimate(&request.params, r)).max_of(gap.clone() / T::from_f64(1.0 - q4))
        + T::from_usize(r) * &m.element_error_bound;
    Ok(SpectrumResult {
        spectrum: OccupationSpectrum::new(values, request.params.n_particles, tail_bound, request.precision),
        r,
        convergence_gap: gap,
        element_error_bound: m.element_error_bound,
    })
}

/// Convenience wrapper at 64-bit precision.
pub fn nons_f64(n: usize, kappa: f64, tail: f64) -> Result<SpectrumResult<f64>, SpectrumError> {
    let params = crate::harmonium::params_from_kappa(n, kappa).map_err(|_| SpectrumError::BadTarget(kappa))?;
    eigen_spectrum(&SpectrumRequest::new(params, tail))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonium::{params_from_delta, params_from_kappa};
    use crate::rdm::bosonic_kernel;
    use crate::real::Mp;
    use approx::assert_relative_eq;

    const KAPPA1_NONS: [f64; 9] = [
        0.999998533821,
        0.999807955780,
        0.999806535259,
        0.000193443778,
        0.000192047307,
        0.000001455434,
        0.000000028353,
        0.000000000265,
        0.000000000002,
    ];

    #[test]
    fn choose_r_examples() {
        let free = params_from_kappa(3, 0.0).unwrap();
        assert_eq!(choose_r(&free, 1e-12, 100).unwrap(), 3 + 8);
        let p = params_from_kappa(3, 1.0).unwrap();
        let r = choose_r(&p, 1e-12, 100).unwrap();
        // independent solve of (3/(1-q)) q^(R+1) < 1e-12
        let q = 1.0 - 6.0 / (3.0 + 13.5f64.sqrt());
        let by_hand = (0..100).find(|&r| 3.0 / (1.0 - q) * q.powi(r + 1) < 1e-12).unwrap() as usize;
        assert_eq!(r, by_hand.max(11));
        assert!((12..=13).contains(&r));
        assert!(choose_r(&params_from_kappa(3, 1e6).unwrap(), 1e-12, 1000).is_err());
        assert!(choose_r(&p, 0.0, 100).is_err());
    }

    #[test]
    fn free_fermions() {
        let res = nons_f64(3, 0.0, 1e-12).unwrap();
        let v = &res.spectrum.values;
        assert!(v[..3].iter().all(|x| (x - 1.0).abs() < 1e-14));
        assert!(v[3..].iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn kappa1_regression() {
        let res = nons_f64(3, 1.0, 1e-12).unwrap();
        for (i, (got, want)) in res.spectrum.values.iter().zip(KAPPA1_NONS).enumerate() {
            assert!((got - want).abs() <= 1e-10, "λ{} = {got} vs {want}", i + 1);
        }
    }

    #[test]
    fn duality_of_spectra() {
        for n in [2usize, 3, 4] {
            let a = eigen_spectrum(&SpectrumRequest::new(params_from_delta(n, 0.4).unwrap(), 1e-13)).unwrap();
            let b = eigen_spectrum(&SpectrumRequest::new(params_from_delta(n, -0.4).unwrap(), 1e-13)).unwrap();
            for (x, y) in a.spectrum.values.iter().zip(&b.spectrum.values).take(12) {
                assert!((x - y).abs() < 1e-13, "n={n}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn bosonic_reduction_spectrum() {
        let p = params_from_kappa(3, 2.0).unwrap();
        let ker = bosonic_kernel(&p).unwrap();
        let res = eigen_spectrum_with(&ker, &SpectrumRequest::new(p.clone(), 1e-12)).unwrap();
        for (k, v) in res.spectrum.values.iter().take(10).enumerate() {
            let want = 3.0 * (1.0 - p.kernel_q) * p.kernel_q.powi(k as i32);
            assert_relative_eq!(*v, want, max_relative = 1e-10, epsilon = 1e-15);
        }
    }

    #[test]
    fn sum_rule_and_convergence_ratio() {
        let res = nons_f64(4, 3.0, 1e-12).unwrap();
        let total: f64 = res.spectrum.values.iter().sum();
        assert!((total - 4.0).abs() < res.spectrum.tail_bound + 1e-12);

        let p = params_from_kappa(3, 30.0).unwrap();
        let ker = marginal_kernel(&p).unwrap();
        let gaps: Vec<f64> = [16usize, 20, 24, 28]
            .iter()
            .map(|&r| {
                let a = matrix_spectrum(&matrix_elements(&ker, &p, r).unwrap()).unwrap();
                let b = matrix_spectrum(&matrix_elements(&ker, &p, r + 4).unwrap()).unwrap();
                l1_distance(&a, &b)
            })
            .collect();
        for w in gaps.windows(2) {
            assert!(w[1] < w[0], "{gaps:?}");
        }
    }

    #[test]
    fn multiprecision_matches_f64() {
        let p = params_from_kappa(3, Mp::<128>::from_f64(1.0)).unwrap();
        let hi = eigen_spectrum(&SpectrumRequest::new(p, 1e-14)).unwrap();
        let lo = nons_f64(3, 1.0, 1e-14).unwrap();
        for (a, b) in hi.spectrum.values.iter().zip(&lo.spectrum.values).take(9) {
            assert!((a.to_f64() - b).abs() < 1e-14);
        }
    }
}
