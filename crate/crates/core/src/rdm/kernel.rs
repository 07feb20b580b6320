use serde::Serialize;

use super::moments::{binomial, normal_moment, vandermonde_moments};
use super::RdmError;
use crate::harmonium::HarmoniumParams;
use crate::real::Real;

/// One-body kernel `ρ(X,Y) = F(X,Y) exp(-A(X²+Y²) + BXY)` with `X = x/L`.
///
/// `coeffs[a][b]` multiplies `X^a Y^b`; the normalization makes
/// `∫ρ(X,X) dX = N`.
#[derive(Debug, Clone, Serialize)]
pub struct KernelPolynomial<T> {
    pub n_particles: usize,
    pub coeffs: Vec<Vec<T>>,
    /// Exponent parameters in units of l.
    pub alpha: T,
    pub beta: T,
    /// Maximal degree in each variable, 2(N-1).
    pub degree: usize,
    /// L implied by (α, β).
    pub basis_scale: T,
    /// Mehler ratio implied by (α, β).
    pub mehler_q: T,
    /// When set, the Vandermonde factor was dropped (bosonic reference).
    pub bosonic: bool,
}

impl<T: Real> KernelPolynomial<T> {
    /// `A = αL²`.
    pub fn a_scaled(&self) -> T {
        self.alpha.clone() * &self.basis_scale * &self.basis_scale
    }

    /// `B = βL²`.
    pub fn b_scaled(&self) -> T {
        self.beta.clone() * &self.basis_scale * &self.basis_scale
    }

    pub fn polynomial(&self, x: &T, y: &T) -> T {
        let ypow = powers(y, self.degree);
        let mut acc = T::zero();
        let mut xp = T::one();
        for row in &self.coeffs {
            let mut inner = T::zero();
            for (c, yb) in row.iter().zip(&ypow) {
                if !c.is_zero() {
                    inner += c.clone() * yb;
                }
            }
            acc += inner * &xp;
            xp *= x;
        }
        acc
    }

    /// Full kernel in X units.
    pub fn eval(&self, x: &T, y: &T) -> T {
        let e = -(self.a_scaled() * (x.clone() * x + y.clone() * y)) + self.b_scaled() * x * y;
        self.polynomial(x, y) * e.exp()
    }
}

pub(crate) fn powers<T: Real>(x: &T, k: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(k + 1);
    let mut p = T::one();
    for _ in 0..=k {
        out.push(p.clone());
        p *= x;
    }
    out
}

/// `∫ X^(2k) e^{-sX²} dX / √(π/s) = (2k-1)!!/(2s)^k`.
fn gaussian_even_moment<T: Real>(k: usize, s: &T) -> T {
    T::from_integer(&normal_moment(2 * k)) / (T::from_i128(2) * s).powi(k as u32)
}

/// Integrate out N-1 coordinates of `Ψ(x,z)Ψ(y,z)` exactly.
///
/// With `a = 1/l̃²` and `b = (a-1)/N` the exponent of `Ψ(x,z)Ψ(y,z)` is
/// quadratic in `z`; eliminating `z` leaves `exp(-α(x²+y²) + βxy)` and shifts
/// the mean to `γ(x+y)` along the all-ones direction. Translation invariance
/// of the Vandermonde product turns the remaining polynomial moments into the
/// exact table of [`vandermonde_moments`].
pub fn marginal_kernel<T: Real>(params: &HarmoniumParams<T>) -> Result<KernelPolynomial<T>, RdmError> {
    build_kernel(params, false)
}

/// Same elimination with the Vandermonde factor replaced by 1.
pub fn bosonic_kernel<T: Real>(params: &HarmoniumParams<T>) -> Result<KernelPolynomial<T>, RdmError> {
    build_kernel(params, true)
}

fn build_kernel<T: Real>(params: &HarmoniumParams<T>, bosonic: bool) -> Result<KernelPolynomial<T>, RdmError> {
    let nn = params.n_particles;
    if nn < 2 {
        return Err(RdmError::TooFewParticles(nn));
    }
    let n = nn - 1;
    let two = T::from_i128(2);
    let four = T::from_i128(4);

    let a = params.scale_ratio.clone() * &params.scale_ratio;
    let b = (a.clone() - T::one()) / T::from_usize(nn);
    let nt = T::from_usize(n);
    let d = a.clone() - nt.clone() * &b;
    let c1 = T::one() / (two.clone() * &a);
    let c2 = b.clone() / (two.clone() * &a * &d);
    if !(d > T::zero()) || !(c1.clone() + nt.clone() * &c2 > T::zero()) {
        return Err(RdmError::Indefinite);
    }
    let gamma = b.clone() / (two.clone() * &d);
    let g = b.clone() * &b * &nt / (four * &d);
    let alpha = (a.clone() - &b) / two.clone() - &g;
    let beta = two.clone() * &g;
    if !(alpha.clone() * &two > beta.clone().abs()) {
        return Err(RdmError::Indefinite);
    }

    // Mehler form of exp(-α(x²+y²)+βxy)
    let plus = two.clone() * &alpha + &beta;
    let minus = two.clone() * &alpha - &beta;
    let basis_scale = T::one() / (plus.clone() * &minus).sqrt().sqrt();
    let ratio = (plus / &minus).sqrt();
    let mehler_q = (ratio.clone() - T::one()) / (ratio + T::one());

    let degree = if bosonic { 0 } else { 2 * n };
    let mut f = vec![vec![T::zero(); degree + 1]; degree + 1];
    if bosonic {
        f[0][0] = T::one();
    } else {
        // H[j][j'] = E_w[e_j(w) e_j'(w) V(w)²] / σ^{n(n-1)}, w = σε + t·1
        let gm = vandermonde_moments(n);
        let c1p = powers(&c1, n);
        let c2p = powers(&c2, n);
        let mut h = vec![vec![T::zero(); n + 1]; n + 1];
        for j in 0..=n {
            for jp in 0..=n {
                if (j + jp) % 2 == 1 {
                    continue;
                }
                let mut acc = T::zero();
                for m in 0..=j {
                    for mp in 0..=jp {
                        if (m + mp) % 2 == 1 || gm[m][mp] == 0 {
                            continue;
                        }
                        let p = j - m + jp - mp;
                        let w = binomial(n - m, j - m) * binomial(n - mp, jp - mp) * normal_moment(p) * &gm[m][mp];
                        acc += T::from_integer(&w) * &c1p[(m + mp) / 2] * &c2p[p / 2];
                    }
                }
                h[j][jp] = acc;
            }
        }

        // F = Σ_{k,l} (-1)^{k+l} H[n-k][n-l] x'^k y'^l with
        // x' = u x + v y, y' = v x + u y, u = 1-γ, v = -γ.
        let u = T::one() - &gamma;
        let v = -gamma.clone();
        let up = powers(&u, n);
        let vp = powers(&v, n);
        for k in 0..=n {
            for l in 0..=n {
                let hk = &h[n - k][n - l];
                if hk.is_zero() {
                    continue;
                }
                let sign = if (k + l) % 2 == 0 { T::one() } else { -T::one() };
                let base = sign * hk;
                for i in 0..=k {
                    // x'^k = Σ_i C(k,i) u^i v^{k-i} x^i y^{k-i}
                    let ci = T::from_integer(&binomial(k, i)) * &up[i] * &vp[k - i];
                    for jj in 0..=l {
                        // y'^l = Σ_j C(l,j) v^j u^{l-j} x^j y^{l-j}
                        let cj = T::from_integer(&binomial(l, jj)) * &vp[jj] * &up[l - jj];
                        f[i + jj][k - i + l - jj] += base.clone() * &ci * &cj;
                    }
                }
            }
        }
    }

    // to X = x/L units
    let lp = powers(&basis_scale, 2 * degree);
    for (i, row) in f.iter_mut().enumerate() {
        for (j, c) in row.iter_mut().enumerate() {
            *c *= &lp[i + j];
        }
    }

    // ∫ F(X,X) e^{-sX²} dX with s = (2α-β)L²
    let s = minus * &basis_scale * &basis_scale;
    let mut diag = vec![T::zero(); 2 * degree + 1];
    for (i, row) in f.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            diag[i + j] += c;
        }
    }
    let mut integral = T::zero();
    for (p, c) in diag.iter().enumerate().step_by(2) {
        integral += c.clone() * gaussian_even_moment(p / 2, &s);
    }
    integral *= (T::pi() / &s).sqrt();
    if !(integral > T::zero()) || !integral.is_finite() {
        return Err(RdmError::Indefinite);
    }
    let scale = T::from_usize(nn) / integral;
    for row in f.iter_mut() {
        for c in row.iter_mut() {
            *c *= &scale;
        }
    }

    Ok(KernelPolynomial {
        n_particles: nn,
        coeffs: f,
        alpha,
        beta,
        degree,
        basis_scale,
        mehler_q,
        bosonic,
    })
}
