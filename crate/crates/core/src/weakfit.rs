//! Leading-order series coefficients in δ from high-precision samples.
//!
//! Fits run in the scaled variable `t = δ/δ_max` on a Gram–Schmidt
//! orthogonalized basis, entirely in the sample precision.

use serde::Serialize;
use thiserror::Error;

use crate::catalog::GpcCatalog;
use crate::harmonium::{params_from_delta, HarmoniumError};
use crate::polytope::{d_min, hf_distance, truncate, PolytopeError};
use crate::real::Real;
use crate::spectrum::{eigen_spectrum, SpectrumError, SpectrumRequest};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("ill-conditioned grid: {0}")]
    IllConditioned(String),
    #[error("relative residual {residual:e} above tolerance {tolerance:e}")]
    Misfit { residual: f64, tolerance: f64 },
    #[error("all fitted coefficients vanish")]
    AllZero,
    #[error("max_order must be even, got {0}")]
    OddOrder(u32),
}

#[derive(Debug, Clone, Serialize)]
pub struct FitResult<T> {
    /// Lowest power with a nonvanishing coefficient; always even.
    pub exponent: u32,
    pub coefficient: T,
    /// Relative residual `‖v - fit‖ / ‖v‖`.
    pub residual: T,
    pub sample_grid: Vec<T>,
    /// Every fitted `(power, coefficient)`.
    pub coefficients: Vec<(u32, T)>,
}

/// Relative size below which a coefficient counts as zero.
pub const ZERO_RATIO: f64 = 1e-3;
/// Default residual tolerance.
pub const MAX_RESIDUAL: f64 = 1e-4;

fn check_grid<T: Real>(samples: &[(T, T)], needed: usize) -> Result<T, FitError> {
    if samples.len() < needed {
        return Err(FitError::IllConditioned(format!(
            "{} samples, need at least {needed}",
            samples.len()
        )));
    }
    let mut xs: Vec<f64> = samples.iter().map(|(d, _)| d.to_f64()).collect();
    xs.sort_by(f64::total_cmp);
    if xs.windows(2).any(|w| w[1] - w[0] <= 1e-12 * w[1].abs()) {
        return Err(FitError::IllConditioned("repeated sample points".into()));
    }
    let max = samples.iter().map(|(d, _)| d.abs()).fold(T::zero(), T::max_of);
    if !(max > T::zero()) {
        return Err(FitError::IllConditioned("all sample points are zero".into()));
    }
    Ok(max)
}

/// Least squares `v(x) ≈ Σ c_p x^p` over the given powers. Returns the
/// coefficients (in unscaled `x`) and the relative residual.
pub fn fit_powers<T: Real>(samples: &[(T, T)], powers: &[u32]) -> Result<(Vec<T>, T), FitError> {
    let scale = check_grid(samples, powers.len())?;
    let m = samples.len();
    let k = powers.len();
    let ts: Vec<T> = samples.iter().map(|(d, _)| d.clone() / &scale).collect();
    // columns of the design matrix
    let mut q: Vec<Vec<T>> = powers.iter().map(|&p| ts.iter().map(|t| t.powi(p)).collect()).collect();
    let mut r = vec![vec![T::zero(); k]; k];
    let dot = |a: &[T], b: &[T]| a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + x.clone() * y);
    for j in 0..k {
        // two passes of modified Gram–Schmidt
        for _ in 0..2 {
            for i in 0..j {
                let c = dot(&q[i], &q[j]);
                for row in 0..m {
                    let v = c.clone() * &q[i][row];
                    q[j][row] -= v;
                }
                r[i][j] += c;
            }
        }
        let norm = dot(&q[j], &q[j]).sqrt();
        if !(norm > T::epsilon() * T::from_usize(m)) {
            return Err(FitError::IllConditioned(format!(
                "basis column t^{} is dependent",
                powers[j]
            )));
        }
        for v in q[j].iter_mut() {
            *v /= &norm;
        }
        r[j][j] = norm;
    }
    let ys: Vec<T> = samples.iter().map(|(_, v)| v.clone()).collect();
    let qty: Vec<T> = q.iter().map(|col| dot(col, &ys)).collect();
    let mut c = vec![T::zero(); k];
    for i in (0..k).rev() {
        let mut s = qty[i].clone();
        for j in i + 1..k {
            s -= r[i][j].clone() * &c[j];
        }
        c[i] = s / &r[i][i];
    }
    let mut res2 = T::zero();
    let mut y2 = T::zero();
    for (row, y) in ys.iter().enumerate() {
        let fit = powers
            .iter()
            .zip(&c)
            .fold(T::zero(), |acc, (&p, cp)| acc + cp.clone() * ts[row].powi(p));
        let d = y.clone() - fit;
        res2 += d.clone() * &d;
        y2 += y.clone() * y;
    }
    let residual = if y2.is_zero() { res2.sqrt() } else { (res2 / y2).sqrt() };
    let unscaled = powers.iter().zip(c).map(|(&p, cp)| cp / scale.powi(p)).collect();
    Ok((unscaled, residual))
}

/// Fit on even powers `0..=max_order` and report the lowest nonvanishing
/// term.
///
/// A coefficient counts as zero when its contribution at the largest sample
/// is below [`ZERO_RATIO`] times the largest higher-order contribution there.
pub fn fit_leading<T: Real>(samples: &[(T, T)], max_order: u32) -> Result<FitResult<T>, FitError> {
    fit_leading_with(samples, max_order, MAX_RESIDUAL)
}

pub fn fit_leading_with<T: Real>(samples: &[(T, T)], max_order: u32, tolerance: f64) -> Result<FitResult<T>, FitError> {
    if max_order % 2 == 1 {
        return Err(FitError::OddOrder(max_order));
    }
    check_grid(samples, (max_order / 2 + 2) as usize)?;
    let powers: Vec<u32> = (0..=max_order).step_by(2).collect();
    let (coeffs, residual) = fit_powers(samples, &powers)?;
    if residual.to_f64() > tolerance {
        return Err(FitError::Misfit {
            residual: residual.to_f64(),
            tolerance,
        });
    }
    let dmax = samples.iter().map(|(d, _)| d.abs()).fold(T::zero(), T::max_of);
    let contrib: Vec<T> = powers
        .iter()
        .zip(&coeffs)
        .map(|(&p, c)| (c.clone() * dmax.powi(p)).abs())
        .collect();
    let ratio = T::from_f64(ZERO_RATIO);
    let mut leading = None;
    for i in 0..powers.len() {
        let higher = contrib[i + 1..].iter().cloned().fold(T::zero(), T::max_of);
        if contrib[i] > ratio.clone() * higher {
            leading = Some(i);
            break;
        }
    }
    let i = leading.ok_or(FitError::AllZero)?;
    if contrib[i].is_zero() {
        return Err(FitError::AllZero);
    }
    Ok(FitResult {
        exponent: powers[i],
        coefficient: coeffs[i].clone(),
        residual,
        sample_grid: samples.iter().map(|(d, _)| d.clone()).collect(),
        coefficients: powers.into_iter().zip(coeffs).collect(),
    })
}

/// Leading even exponent of `D_min(δ)`, fitted up to the largest order the
/// grid supports.
pub fn scaling_exponent<T: Real>(samples: &[(T, T)]) -> Result<u32, FitError> {
    if samples.len() < 3 {
        return Err(FitError::IllConditioned(format!(
            "{} samples, need at least 3",
            samples.len()
        )));
    }
    let max_order = (2 * (samples.len() as u32 - 2)).min(24);
    Ok(fit_leading(samples, max_order)?.exponent)
}

/// Slope of `log|v|` against `log δ` by ordinary least squares.
pub fn loglog_slope<T: Real>(samples: &[(T, T)]) -> Result<f64, FitError> {
    if samples.len() < 2 {
        return Err(FitError::IllConditioned("need two samples".into()));
    }
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .map(|(d, v)| (d.abs().ln().to_f64(), v.abs().ln().to_f64()))
        .collect();
    if pts.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(FitError::IllConditioned("zero sample in log-log fit".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return Err(FitError::IllConditioned("degenerate abscissae".into()));
    }
    Ok(sxy / sxx)
}

/// Quantity sampled along a δ grid.
#[derive(Debug, Clone)]
pub enum Quantity {
    /// `1 - λ_i` (1-based).
    OneMinus(usize),
    /// `λ_i` (1-based).
    Occupation(usize),
    /// D_min after truncating to the catalog's setting.
    Dmin(GpcCatalog),
    HfDistance,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SampleError {
    #[error(transparent)]
    Model(#[from] HarmoniumError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error("occupation index {0} outside the computed spectrum")]
    Index(usize),
}

/// Evaluate `quantity` on the N-particle spectrum at coupling `δ`.
pub fn sample<T: Real>(n: usize, delta: &T, quantity: &Quantity, tail: f64) -> Result<T, SampleError> {
    let params = params_from_delta(n, delta.clone())?;
    let spec = eigen_spectrum(&SpectrumRequest::new(params, tail))?.spectrum;
    let at = |i: usize| spec.values.get(i.wrapping_sub(1)).cloned().ok_or(SampleError::Index(i));
    Ok(match quantity {
        Quantity::OneMinus(i) => T::one() - at(*i)?,
        Quantity::Occupation(i) => at(*i)?,
        Quantity::Dmin(cat) => {
            let (small, _) = truncate(&spec, cat.setting)?;
            d_min(cat, &small)?.0
        }
        Quantity::HfDistance => hf_distance(&spec).value,
    })
}

/// Tail target that keeps sample noise far below the fitted terms.
pub fn default_tail<T: Real>() -> f64 {
    (T::epsilon().to_f64() * 1e6).clamp(1e-200, 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::Mp;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    type M = Mp<256>;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<M> {
        (0..n)
            .map(|i| M::from_f64(lo + (hi - lo) * i as f64 / (n - 1) as f64))
            .collect()
    }

    fn poly(coeffs: &[(u32, f64)]) -> impl Fn(&M) -> M + '_ {
        move |d| {
            coeffs
                .iter()
                .fold(M::zero(), |acc, &(p, c)| acc + M::from_f64(c) * d.powi(p))
        }
    }

    #[test]
    fn recovers_exact_even_series() {
        let f = poly(&[(4, 15.0 / 64.0), (6, -95.0 / 256.0), (8, 0.5), (10, -0.3)]);
        let s: Vec<(M, M)> = grid(0.1, 0.3, 9).into_iter().map(|d| (d.clone(), f(&d))).collect();
        let fit = fit_leading(&s, 12).unwrap();
        assert_eq!(fit.exponent, 4);
        assert_relative_eq!(fit.coefficient.to_f64(), 15.0 / 64.0, max_relative = 1e-20);
        assert!(fit.residual.to_f64() < 1e-60);
    }

    #[test]
    fn constant_samples() {
        let s: Vec<(M, M)> = grid(0.1, 0.3, 6).into_iter().map(|d| (d, M::from_f64(2.5))).collect();
        let fit = fit_leading(&s, 4).unwrap();
        assert_eq!(fit.exponent, 0);
        assert_relative_eq!(fit.coefficient.to_f64(), 2.5, max_relative = 1e-30);
    }

    #[test]
    fn grid_validation() {
        let s: Vec<(M, M)> = grid(0.1, 0.3, 5).into_iter().map(|d| (d.clone(), d)).collect();
        assert!(matches!(fit_leading(&s, 12), Err(FitError::IllConditioned(_))));
        assert!(matches!(fit_leading(&s, 3), Err(FitError::OddOrder(3))));
        let dup = vec![(M::from_f64(0.1), M::one()); 6];
        assert!(matches!(fit_leading(&dup, 2), Err(FitError::IllConditioned(_))));
    }

    #[test]
    fn misfit_is_reported() {
        // |δ| is not an even polynomial of low order
        let s: Vec<(M, M)> = grid(0.01, 0.5, 12).into_iter().map(|d| (d.clone(), d.sqrt())).collect();
        assert!(matches!(fit_leading(&s, 4), Err(FitError::Misfit { .. })));
    }

    #[test]
    fn odd_powers_vanish_for_even_data() {
        let f = poly(&[(8, 0.107), (10, 0.2)]);
        let s: Vec<(M, M)> = grid(0.05, 0.25, 14).into_iter().map(|d| (d.clone(), f(&d))).collect();
        let powers: Vec<u32> = (0..=12).collect();
        let (c, _) = fit_powers(&s, &powers).unwrap();
        for (p, ci) in powers.iter().zip(&c) {
            if p % 2 == 1 {
                assert!(ci.to_f64().abs() < 1e-40, "c{p} = {ci:?}");
            }
        }
    }

    #[test]
    fn scaling_and_slope() {
        let f = poly(&[(8, 0.1), (10, 1.0)]);
        let s: Vec<(M, M)> = grid(0.05, 0.3, 10).into_iter().map(|d| (d.clone(), f(&d))).collect();
        assert_eq!(scaling_exponent(&s).unwrap(), 8);
        let small: Vec<(M, M)> = grid(1e-3, 3e-3, 5).into_iter().map(|d| (d.clone(), f(&d))).collect();
        assert!((loglog_slope(&small).unwrap() - 8.0).abs() < 0.01);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        // residual shrinks like the first omitted power as the grid contracts
        #[test]
        fn residual_tracks_first_omitted_power(c in 0.1f64..2.0) {
            let f = |d: &M| M::from_f64(c) * d.powi(4) + d.powi(10);
            let fit_at = |hi: f64| {
                let s: Vec<(M, M)> = grid(hi / 3.0, hi, 8).into_iter().map(|d| (d.clone(), f(&d))).collect();
                let (_, r) = fit_powers(&s, &[4, 6, 8]).unwrap();
                r.to_f64()
            };
            let (r1, r2) = (fit_at(0.2), fit_at(0.1));
            // relative residual scales as δ^(10-4)
            let ratio = r1 / r2;
            prop_assert!(ratio > 40.0 && ratio < 90.0, "{ratio}");
        }
    }
}
