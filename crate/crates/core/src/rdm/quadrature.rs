//! Gauss–Hermite quadrature and the independent matrix-element oracle.

use super::kernel::KernelPolynomial;
use super::RdmError;
use crate::real::Real;

/// Orthonormal Hermite polynomials `p_0..p_{n}` at `x` w.r.t. `e^{-x²}`.
fn orthonormal_hermite<T: Real>(x: &T, n: usize) -> Vec<T> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(T::one() / T::pi().sqrt().sqrt());
    if n >= 1 {
        p.push(p[0].clone() * x * T::from_i128(2).sqrt());
    }
    for j in 1..n {
        let a = (T::from_ratio(2, (j + 1) as i128)).sqrt();
        let b = (T::from_ratio(j as i128, (j + 1) as i128)).sqrt();
        let next = a * x * &p[j] - b * &p[j - 1];
        p.push(next);
    }
    p
}

/// Hermite functions `φ_0..φ_{count-1}` at `x` (unit length scale).
pub fn hermite_functions<T: Real>(x: &T, count: usize) -> Vec<T> {
    let damp = (-(x.clone() * x) / T::from_i128(2)).exp();
    let mut p = orthonormal_hermite(x, count.saturating_sub(1));
    p.truncate(count);
    p.into_iter().map(|v| v * &damp).collect()
}

/// Nodes and weights of the `n`-point rule for `∫ f(x) e^{-x²} dx`,
/// ascending.
pub fn gauss_hermite<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1);
    // initial guesses in f64 (asymptotic formulas for the largest roots,
    // then extrapolation from the previous ones), polished by Newton
    let mut roots = vec![0.0f64; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let f64_newton = |mut z: f64| {
        for _ in 0..100 {
            let p = orthonormal_hermite(&z, n);
            let dp = (2.0 * nf).sqrt() * p[n - 1];
            let dz = p[n] / dp;
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        z
    };
    for i in 0..m {
        let z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => roots[0] - 1.14 * nf.powf(0.426) / roots[0],
            2 => 1.86 * roots[1] - 0.86 * roots[0],
            3 => 1.91 * roots[2] - 0.91 * roots[1],
            _ => 2.0 * roots[i - 1] - roots[i - 2],
        };
        roots[i] = f64_newton(z);
    }
    if n % 2 == 1 {
        roots[m - 1] = 0.0;
    }

    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let nt = T::from_usize(2 * n).sqrt();
    let tol = T::epsilon() * T::from_i128(4);
    for &r in roots.iter().take(m) {
        let mut z = T::from_f64(r);
        if r != 0.0 {
            for _ in 0..16 {
                let p = orthonormal_hermite(&z, n);
                let dz = p[n].clone() / (nt.clone() * &p[n - 1]);
                z -= &dz;
                if dz.abs() <= tol.clone() * z.abs() {
                    break;
                }
            }
        }
        // Christoffel weight 1/Σ p_j(z)²
        let p = orthonormal_hermite(&z, n - 1);
        let s = p.iter().fold(T::zero(), |acc, v| acc + v.clone() * v);
        nodes.push(z);
        weights.push(T::one() / s);
    }
    let mut pairs: Vec<(T, T)> = Vec::with_capacity(n);
    for (z, w) in nodes.into_iter().zip(weights) {
        if !z.is_zero() {
            pairs.push((-z.clone(), w.clone()));
        }
        pairs.push((z, w));
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite nodes"));
    pairs.into_iter().unzip()
}

const MAX_NODES: usize = 200;

/// `⟨φ_k|ρ|φ_n⟩` by two-dimensional Gauss–Hermite quadrature.
///
/// In `u = (X+Y)/√2`, `v = (X-Y)/√2` the Gaussian part of `φ_k(X)ρ(X,Y)φ_n(Y)`
/// separates into `e^{-p_u u² - p_v v²}`, leaving a polynomial. The node count
/// is raised until two successive rules agree to `tol` (relative to the
/// diagonal scale of the kernel).
pub fn quadrature_oracle<T: Real>(kernel: &KernelPolynomial<T>, k: usize, n: usize, tol: &T) -> Result<T, RdmError> {
    let half = T::from_ratio(1, 2);
    let a = kernel.a_scaled();
    let b = kernel.b_scaled();
    let pu = a.clone() + &half - b.clone() * &half;
    let pv = a + &half + b * &half;
    let spu = pu.sqrt();
    let spv = pv.sqrt();
    let r2 = T::from_i128(2).sqrt();
    let norm = T::one() / (spu.clone() * &spv);

    let rule = |nodes: usize| -> T {
        let (t, w) = gauss_hermite::<T>(nodes);
        let us: Vec<T> = t.iter().map(|x| x.clone() / &spu).collect();
        let vs: Vec<T> = t.iter().map(|x| x.clone() / &spv).collect();
        let mut acc = T::zero();
        for (u, wu) in us.iter().zip(&w) {
            for (v, wv) in vs.iter().zip(&w) {
                let x = (u.clone() + v) / &r2;
                let y = (u.clone() - v) / &r2;
                let hx = orthonormal_hermite(&x, k);
                let hy = orthonormal_hermite(&y, n);
                acc += wu.clone() * wv * &hx[k] * &hy[n] * kernel.polynomial(&x, &y);
            }
        }
        acc * &norm
    };

    // exact once 2·nodes - 1 >= k + n + 2·degree
    let mut nodes = (k + n + 2 * kernel.degree) / 2 + 2;
    let mut prev = rule(nodes);
    while nodes < MAX_NODES {
        nodes += 4;
        let next = rule(nodes);
        let scale = T::from_usize(kernel.n_particles);
        if (next.clone() - &prev).abs() <= tol.clone() * scale {
            return Ok(next);
        }
        prev = next;
    }
    Err(RdmError::QuadratureNotConverged { k, n })
}
