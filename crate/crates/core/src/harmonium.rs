//! Parameters of the one-dimensional N-Harmonium in natural units
//! (ħ = m = ω = 1, so the centre-of-mass length l is 1).
//!
//! Two decay factors are carried. `q` is the closed form in the coupling,
//! used for truncation bounds and reported by `pin-lab model`. `kernel_q` is
//! the geometric ratio of the bosonic kernel that the Gaussian integration
//! actually produces; it equals the same closed form evaluated at the length
//! ratio `l/l̃ - 1 = e^δ - 1` instead of κ. Since `q` is increasing in its
//! argument and `e^δ - 1 <= κ`, `q >= kernel_q` and bounds built on `q` are
//! conservative.

use serde::Serialize;
use thiserror::Error;

use crate::real::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarmoniumError {
    #[error("coupling must satisfy kappa >= 0, got {0}")]
    NegativeCoupling(f64),
    #[error("coupling lies beyond the stability bound (1 + kappa must be positive), got kappa = {0}")]
    Unstable(f64),
    #[error("particle number must be at least 2, got {0}")]
    TooFewParticles(usize),
}

#[derive(Debug, Clone, Serialize)]
pub struct HarmoniumParams<T> {
    pub n_particles: usize,
    /// κ = NK/(mω²) = (l/l̃)⁴ - 1.
    pub kappa: T,
    /// δ = ln(l/l̃) = ln(1 + κ)/4.
    pub delta: T,
    /// l/l̃ = (1 + κ)^(1/4).
    pub scale_ratio: T,
    /// Closed-form decay factor q(κ).
    pub q: T,
    /// Geometric ratio of the bosonic kernel's Mehler expansion.
    pub kernel_q: T,
    /// Length scale L of the reference Hermite basis, in units of l.
    pub basis_scale: T,
}

impl<T: Real> HarmoniumParams<T> {
    /// Relative-motion length l̃ in units of l.
    pub fn l_tilde(&self) -> T {
        T::one() / &self.scale_ratio
    }

    pub fn to_f64(&self) -> HarmoniumParams<f64> {
        HarmoniumParams {
            n_particles: self.n_particles,
            kappa: self.kappa.to_f64(),
            delta: self.delta.to_f64(),
            scale_ratio: self.scale_ratio.to_f64(),
            q: self.q.to_f64(),
            kernel_q: self.kernel_q.to_f64(),
            basis_scale: self.basis_scale.to_f64(),
        }
    }
}

/// Closed-form decay factor evaluated at an arbitrary argument `x`:
/// `1 - 2N / (N + sqrt(N² - (N-1)[2 - (1+x)² - (1+x)⁻²]))`.
pub fn decay_closed_form<T: Real>(n: usize, x: &T) -> T {
    let nn = T::from_usize(n);
    let t = T::one() + x;
    let t2 = t.clone() * &t;
    let bracket = T::from_i128(2) - &t2 - T::one() / &t2;
    let disc = nn.clone() * &nn - T::from_usize(n - 1) * bracket;
    T::one() - T::from_usize(2 * n) / (nn + disc.sqrt())
}

fn quarter_root<T: Real>(x: &T) -> T {
    x.sqrt().sqrt()
}

fn build<T: Real>(n: usize, kappa: T, delta: T) -> HarmoniumParams<T> {
    let one_plus = T::one() + &kappa;
    let scale_ratio = quarter_root(&one_plus);
    let q = decay_closed_form(n, &kappa);
    let kernel_q = decay_closed_form(n, &(scale_ratio.clone() - T::one()));

    let lt = T::one() / &scale_ratio;
    let lt2 = lt.clone() * &lt;
    let nm1 = T::from_usize(n - 1);
    let ratio = (nm1.clone() * &lt2 + T::one()) / (lt2 + nm1);
    let basis_scale = lt.sqrt() * quarter_root(&ratio);

    HarmoniumParams {
        n_particles: n,
        kappa,
        delta,
        scale_ratio,
        q,
        kernel_q,
        basis_scale,
    }
}

/// Parameters for an attractive coupling κ >= 0.
pub fn params_from_kappa<T: Real>(n: usize, kappa: T) -> Result<HarmoniumParams<T>, HarmoniumError> {
    if n < 2 {
        return Err(HarmoniumError::TooFewParticles(n));
    }
    if !(kappa >= T::zero()) {
        return Err(HarmoniumError::NegativeCoupling(kappa.to_f64()));
    }
    let delta = (T::one() + &kappa).ln() / T::from_i128(4);
    Ok(build(n, kappa, delta))
}

/// Parameters from δ = ln(l/l̃). Negative δ is allowed here: it is the dual,
/// weakly repulsive partner of `-δ` (κ = e^(4δ) - 1 ∈ (-1, 0)).
pub fn params_from_delta<T: Real>(n: usize, delta: T) -> Result<HarmoniumParams<T>, HarmoniumError> {
    if n < 2 {
        return Err(HarmoniumError::TooFewParticles(n));
    }
    let kappa = kappa_from_delta(&delta);
    if !(kappa > -T::one()) {
        return Err(HarmoniumError::Unstable(kappa.to_f64()));
    }
    Ok(build(n, kappa, delta))
}

/// κ(δ) = e^(4δ) - 1.
pub fn kappa_from_delta<T: Real>(delta: &T) -> T {
    (T::from_i128(4) * delta).exp() - T::one()
}

/// Two-term weak-coupling series `((N-1)/N²)(κ² + κ³)`.
pub fn q_weak_expansion<T: Real>(n: usize, kappa: &T) -> T {
    let k2 = kappa.clone() * kappa;
    let k3 = k2.clone() * kappa;
    T::from_ratio((n as i128) - 1, (n * n) as i128) * (k2 + k3)
}

/// Bosonic natural occupation numbers `N(1 - q̃) q̃^k`, k = 0..=k_max, with
/// q̃ the kernel decay ratio. They sum to N over all k.
pub fn bosonic_spectrum<T: Real>(params: &HarmoniumParams<T>, k_max: usize) -> Vec<T> {
    let q = &params.kernel_q;
    let mut w = T::from_usize(params.n_particles) * (T::one() - q);
    let mut out = Vec::with_capacity(k_max + 1);
    for _ in 0..=k_max {
        out.push(w.clone());
        w *= q;
    }
    out
}

/// The dual partner δ → -δ, i.e. l/l̃ → l̃/l.
pub fn duality_pair<T: Real>(params: &HarmoniumParams<T>) -> HarmoniumParams<T> {
    let delta = -params.delta.clone();
    let kappa = kappa_from_delta(&delta);
    build(params.n_particles, kappa, delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn non_interacting_limit() {
        let p = params_from_kappa(3, 0.0).unwrap();
        assert_eq!(p.q, 0.0);
        assert_eq!(p.kernel_q, 0.0);
        assert_relative_eq!(p.basis_scale, 1.0, epsilon = 1e-15);
        assert_relative_eq!(p.l_tilde(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn closed_form_at_unit_coupling() {
        let p = params_from_kappa(3, 1.0).unwrap();
        // 1 - 6/(3 + sqrt(13.5))
        let expected = 1.0 - 6.0 / (3.0 + 13.5f64.sqrt());
        assert_relative_eq!(p.q, expected, max_relative = 1e-14);
        assert_relative_eq!(p.q, 0.10102, epsilon = 1e-5);
        assert!(p.kernel_q < p.q);
    }

    #[test]
    fn delta_one_maps_to_kappa() {
        let k = kappa_from_delta(&1.0f64);
        assert_relative_eq!(k, 1f64.exp().powi(4) - 1.0, max_relative = 1e-14);
        assert!((k - 53.6).abs() < 0.01);
        let p = params_from_kappa(3, 0.37).unwrap();
        assert_relative_eq!(p.delta, 1.37f64.ln() / 4.0, max_relative = 1e-15);
    }

    #[test]
    fn weak_series_values() {
        assert_relative_eq!(
            q_weak_expansion(3, &0.01f64),
            2.0 / 9.0 * (1e-4 + 1e-6),
            max_relative = 1e-14
        );
        assert_eq!(q_weak_expansion(2, &0.0f64), 0.0);
    }

    #[test]
    fn weak_series_leading_term_matches_closed_form() {
        // ratio -> 1; the closed form's cubic term is -(N-1)/N² κ³, so the
        // ratio deviates by about -2κ.
        for n in [2usize, 3, 5] {
            let mut prev = f64::INFINITY;
            for k in [1e-2, 1e-3, 1e-4] {
                let p = params_from_kappa(n, k).unwrap();
                let dev = (p.q / q_weak_expansion(n, &k) - 1.0).abs();
                assert!(dev < prev);
                assert!((dev - 2.0 * k).abs() < 10.0 * k * k, "n={n} k={k} dev={dev}");
                prev = dev;
            }
        }
    }

    #[test]
    fn q_monotone_and_bounded() {
        for n in [2usize, 3, 4, 8] {
            let mut prev = -1.0;
            for i in 0..200 {
                let k = 1e-3 * 10f64.powf(i as f64 * 0.05);
                let p = params_from_kappa(n, k).unwrap();
                assert!(p.q > prev && p.q < 1.0);
                assert!(p.kernel_q <= p.q);
                prev = p.q;
            }
            let p = params_from_kappa(n, 1e9).unwrap();
            assert!(p.q > 0.9999);
        }
    }

    #[test]
    fn bosonic_spectrum_normalization() {
        let p = params_from_kappa(3, 1.0).unwrap();
        let spec = bosonic_spectrum(&p, 200);
        let total: f64 = spec.iter().sum();
        assert_relative_eq!(total, 3.0, max_relative = 1e-13);
        assert_relative_eq!(spec[0], 3.0 * (1.0 - p.kernel_q), max_relative = 1e-15);
        let free = bosonic_spectrum(&params_from_kappa(4, 0.0).unwrap(), 3);
        assert_eq!(free, vec![4.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn duality_inverts_scale_and_keeps_kernel_decay() {
        let zero = params_from_delta(3, 0.0f64).unwrap();
        let dual0 = duality_pair(&zero);
        assert_eq!(dual0.delta, 0.0);
        assert_relative_eq!(dual0.kappa, 0.0, epsilon = 1e-16);

        let p = params_from_delta(3, 0.2f64).unwrap();
        let d = duality_pair(&p);
        assert_relative_eq!(p.scale_ratio, 0.2f64.exp(), max_relative = 1e-15);
        assert_relative_eq!(d.scale_ratio, (-0.2f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(d.kernel_q, p.kernel_q, max_relative = 1e-12);
        assert!(d.kappa < 0.0 && d.kappa > -1.0);
    }

    #[test]
    fn basis_scale_under_length_exchange() {
        // Exchanging l and l̃ inverts the bracket, so L(l, l̃)·L(l̃, l) = l·l̃.
        for k in [0.1f64, 1.0, 10.0] {
            let p = params_from_kappa(4, k).unwrap();
            let lt = p.l_tilde();
            let n = 3.0;
            let swapped = lt.sqrt() * ((n + lt * lt) / (1.0 + n * lt * lt)).powf(0.25);
            assert_relative_eq!(swapped * p.basis_scale, lt, max_relative = 1e-14);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(
            params_from_kappa(3, -0.5).unwrap_err(),
            HarmoniumError::NegativeCoupling(-0.5)
        );
        assert!(matches!(
            params_from_kappa(1, 0.5),
            Err(HarmoniumError::TooFewParticles(1))
        ));
        assert!(matches!(
            params_from_delta(3, -40.0f64),
            Err(HarmoniumError::Unstable(_))
        ));
    }
}
