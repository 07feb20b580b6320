//! Quasipinning measures on occupation spectra.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::catalog::{GpcCatalog, GpcConstraint, Setting};
use crate::precision::Precision;
use crate::real::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolytopeError {
    #[error("dimension mismatch: constraint has {constraint} coefficients, spectrum has {spectrum} values")]
    DimensionMismatch { constraint: usize, spectrum: usize },
    #[error("catalog has no inequality constraints")]
    EmptyCatalog,
    #[error("cannot truncate an N = {n} spectrum of length {len} to setting {target}")]
    InfeasibleTruncation { n: usize, len: usize, target: Setting },
}

/// Decreasingly ordered natural occupation numbers.
#[derive(Debug, Clone, Serialize)]
pub struct OccupationSpectrum<T> {
    pub values: Vec<T>,
    pub particle_number: usize,
    /// l¹ bound on the occupation numbers not listed.
    pub tail_bound: T,
    pub precision: Precision,
}

impl<T: Real> OccupationSpectrum<T> {
    pub fn new(values: Vec<T>, particle_number: usize, tail_bound: T, precision: Precision) -> Self {
        OccupationSpectrum {
            values,
            particle_number,
            tail_bound,
            precision,
        }
    }

    /// Spectrum without tail, at the precision implied by `T`.
    pub fn exact(values: Vec<T>, particle_number: usize) -> Self {
        let precision = Precision::from_bits(T::BITS).unwrap_or(Precision::Bits512);
        Self::new(values, particle_number, T::zero(), precision)
    }

    pub fn hartree_fock(setting: Setting) -> Self {
        let v = (0..setting.dim)
            .map(|i| if i < setting.n_particles { T::one() } else { T::zero() })
            .collect();
        Self::exact(v, setting.n_particles)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, v| acc + v)
    }

    pub fn to_f64(&self) -> OccupationSpectrum<f64> {
        OccupationSpectrum {
            values: self.values.iter().map(Real::to_f64).collect(),
            particle_number: self.particle_number,
            tail_bound: self.tail_bound.to_f64(),
            precision: self.precision,
        }
    }
}

pub fn evaluate<T: Real>(constraint: &GpcConstraint, spectrum: &OccupationSpectrum<T>) -> Result<T, PolytopeError> {
    if constraint.coeffs.len() != spectrum.len() {
        return Err(PolytopeError::DimensionMismatch {
            constraint: constraint.coeffs.len(),
            spectrum: spectrum.len(),
        });
    }
    let mut acc = T::from_i128(constraint.kappa0 as i128);
    for (&c, v) in constraint.coeffs.iter().zip(&spectrum.values) {
        if c != 0 {
            acc += T::from_i128(c as i128) * v;
        }
    }
    Ok(acc)
}

/// l¹ distance to the hyperplane `D = 0`, i.e. `2|D|`.
pub fn l1_plane_distance<T: Real>(
    constraint: &GpcConstraint,
    spectrum: &OccupationSpectrum<T>,
) -> Result<T, PolytopeError> {
    Ok(T::from_i128(2) * evaluate(constraint, spectrum)?.abs())
}

/// Smallest inequality value and its label; the first one wins on ties.
pub fn d_min<T: Real>(catalog: &GpcCatalog, spectrum: &OccupationSpectrum<T>) -> Result<(T, String), PolytopeError> {
    let mut best: Option<(T, &str)> = None;
    for c in catalog.inequalities() {
        let v = evaluate(c, spectrum)?;
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, &c.label));
        }
    }
    best.map(|(v, l)| (v, l.to_string())).ok_or(PolytopeError::EmptyCatalog)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SimplexViolation {
    Bound { index: usize, value: f64 },
    Ordering { index: usize, gap: f64 },
    Normalization { sum: f64, expected: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplexReport {
    pub violations: Vec<SimplexViolation>,
}

impl SimplexReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `1 >= λ₁ >= … >= 0` and `Σλ = N` (allowing the tail bound).
pub fn pauli_simplex_check<T: Real>(spectrum: &OccupationSpectrum<T>, tol: f64) -> SimplexReport {
    let t = T::from_f64(tol);
    let mut violations = Vec::new();
    for (i, v) in spectrum.values.iter().enumerate() {
        if *v > T::one() + &t || *v < -t.clone() {
            violations.push(SimplexViolation::Bound {
                index: i,
                value: v.to_f64(),
            });
        }
    }
    for (i, w) in spectrum.values.windows(2).enumerate() {
        let gap = w[1].clone() - &w[0];
        if gap > t {
            violations.push(SimplexViolation::Ordering {
                index: i,
                gap: gap.to_f64(),
            });
        }
    }
    let sum = spectrum.total();
    let dev = (sum.clone() - T::from_usize(spectrum.particle_number)).abs();
    if dev > t + &spectrum.tail_bound {
        violations.push(SimplexViolation::Normalization {
            sum: sum.to_f64(),
            expected: spectrum.particle_number,
        });
    }
    SimplexReport { violations }
}

#[derive(Debug, Clone, Serialize)]
pub struct HfDistance<T> {
    pub value: T,
    pub uncertainty: T,
}

/// `Σ_{i<=N}|1 - λ_i| + Σ_{i>N}|λ_i|`, with the tail bound as uncertainty.
pub fn hf_distance<T: Real>(spectrum: &OccupationSpectrum<T>) -> HfDistance<T> {
    let n = spectrum.particle_number;
    let mut value = T::zero();
    for (i, v) in spectrum.values.iter().enumerate() {
        if i < n {
            value += (T::one() - v).abs();
        } else {
            value += v.abs();
        }
    }
    // occupations missing from a too-short spectrum count as zero
    for _ in spectrum.len()..n {
        value += T::one();
    }
    HfDistance {
        value,
        uncertainty: spectrum.tail_bound.clone(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncationPlan<T> {
    /// Leading occupations fixed to 1.
    pub r: usize,
    /// Trailing occupations set to 0.
    pub s: usize,
    pub target: Setting,
    /// `Σ_{i<=r}(1 - λ_i) + Σ_{j>r+d'} λ_j` plus the spectrum's tail bound.
    /// Conservative.
    pub error_bound: T,
}

/// Drop `r = N - N'` leading and all trailing values beyond the target
/// dimension. The remainder is not renormalized.
pub fn truncate<T: Real>(
    spectrum: &OccupationSpectrum<T>,
    target: Setting,
) -> Result<(OccupationSpectrum<T>, TruncationPlan<T>), PolytopeError> {
    let n = spectrum.particle_number;
    let len = spectrum.len();
    let infeasible = PolytopeError::InfeasibleTruncation { n, len, target };
    if target.n_particles > n {
        return Err(infeasible);
    }
    let r = n - target.n_particles;
    if r + target.dim > len {
        return Err(infeasible);
    }
    let s = len - r - target.dim;
    let mut error_bound = spectrum.tail_bound.clone();
    for v in &spectrum.values[..r] {
        error_bound += T::one() - v;
    }
    for v in &spectrum.values[r + target.dim..] {
        error_bound += v;
    }
    let kept = OccupationSpectrum {
        values: spectrum.values[r..r + target.dim].to_vec(),
        particle_number: target.n_particles,
        tail_bound: spectrum.tail_bound.clone(),
        precision: spectrum.precision,
    };
    Ok((
        kept,
        TruncationPlan {
            r,
            s,
            target,
            error_bound,
        },
    ))
}

/// Q surrogate per inequality: `log₁₀(min_{i∈S} ξ_i / D)` with
/// `ξ_i = min(λ_i, 1 - λ_i)` over the constraint's support `S`.
///
/// `D = 0` yields `+∞`; violated constraints (`D < 0`) yield NaN and are left
/// out of the overall maximum.
pub fn q_parameter<T: Real>(
    catalog: &GpcCatalog,
    spectrum: &OccupationSpectrum<T>,
) -> Result<(Vec<(String, f64)>, f64), PolytopeError> {
    let mut out = Vec::new();
    let mut overall = f64::NAN;
    for c in catalog.inequalities() {
        let d = evaluate(c, spectrum)?;
        let q = if d.is_zero() {
            f64::INFINITY
        } else if d < T::zero() {
            f64::NAN
        } else {
            let xi = c
                .support()
                .into_iter()
                .map(|i| {
                    let v = &spectrum.values[i];
                    v.clone().min_of(T::one() - v)
                })
                .reduce(T::min_of)
                .unwrap_or_else(T::zero);
            if xi <= T::zero() {
                f64::NEG_INFINITY
            } else {
                (xi / d).log10().to_f64()
            }
        };
        if !q.is_nan() && (overall.is_nan() || q > overall) {
            overall = q;
        }
        out.push((c.label.clone(), q));
    }
    if out.is_empty() {
        return Err(PolytopeError::EmptyCatalog);
    }
    Ok((out, overall))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// D_min and its uncertainty both vanish within tolerance.
    Pinned,
    /// Truncation error below a tenth of |D_min|.
    Conclusive,
    Inconclusive,
}

impl Verdict {
    pub fn describe(self) -> &'static str {
        match self {
            Verdict::Pinned => "pinned",
            Verdict::Conclusive => "conclusive",
            Verdict::Inconclusive => "inconclusive at this setting",
        }
    }
}

/// Relative size of the truncation error below which D_min is conclusive.
pub const CONCLUSIVE_RATIO: f64 = 0.1;

#[derive(Debug, Clone, Serialize)]
pub struct PinningReport<T> {
    pub setting: Setting,
    pub d_values: Vec<(String, T)>,
    pub d_min: T,
    pub argmin_label: String,
    /// Error-law bound on d_min: max |coefficient| × truncation error.
    pub d_min_uncertainty: T,
    pub q_values: Vec<(String, f64)>,
    pub q_overall: f64,
    pub plan: TruncationPlan<T>,
    pub hf_distance: HfDistance<T>,
    pub verdict: Verdict,
}

pub fn pinning_report<T: Real>(
    catalog: &GpcCatalog,
    spectrum: &OccupationSpectrum<T>,
    target: Setting,
) -> Result<PinningReport<T>, PolytopeError> {
    if target != catalog.setting {
        return Err(PolytopeError::DimensionMismatch {
            constraint: catalog.setting.dim,
            spectrum: target.dim,
        });
    }
    let (small, plan) = truncate(spectrum, target)?;
    let d_values = catalog
        .constraints
        .iter()
        .map(|c| Ok((c.label.clone(), evaluate(c, &small)?)))
        .collect::<Result<Vec<_>, PolytopeError>>()?;
    let (d_min, argmin_label) = d_min(catalog, &small)?;
    let (q_values, q_overall) = q_parameter(catalog, &small)?;
    let max_coeff = catalog
        .inequalities()
        .map(GpcConstraint::max_abs_coeff)
        .max()
        .unwrap_or(1);
    let d_min_uncertainty = T::from_i128(max_coeff as i128) * &plan.error_bound;

    let tol = T::from_f64(spectrum.precision.simplex_tolerance());
    let verdict = if d_min.abs() <= tol && d_min_uncertainty <= tol {
        Verdict::Pinned
    } else if d_min_uncertainty < T::from_f64(CONCLUSIVE_RATIO) * d_min.abs() {
        Verdict::Conclusive
    } else {
        Verdict::Inconclusive
    };

    Ok(PinningReport {
        setting: target,
        d_values,
        d_min,
        argmin_label,
        d_min_uncertainty,
        q_values,
        q_overall,
        plan,
        hf_distance: hf_distance(spectrum),
        verdict,
    })
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.escape_default())
}

fn render_q(q: f64) -> String {
    if q.is_nan() {
        "nan".into()
    } else if q == f64::INFINITY {
        "inf".into()
    } else if q == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{q:e}")
    }
}

impl<T: Real> PinningReport<T> {
    /// TOML rendering; reals are full-precision decimal strings.
    pub fn to_structured(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "[report]");
        let _ = writeln!(out, "setting = {}", quote(&self.setting.to_string()));
        let _ = writeln!(out, "d_min = {}", quote(&self.d_min.to_decimal()));
        let _ = writeln!(
            out,
            "d_min_uncertainty = {}",
            quote(&self.d_min_uncertainty.to_decimal())
        );
        let _ = writeln!(out, "argmin_label = {}", quote(&self.argmin_label));
        let _ = writeln!(out, "q_overall = {}", render_q(self.q_overall));
        let _ = writeln!(out, "hf_distance = {}", quote(&self.hf_distance.value.to_decimal()));
        let _ = writeln!(
            out,
            "hf_uncertainty = {}",
            quote(&self.hf_distance.uncertainty.to_decimal())
        );
        let _ = writeln!(out, "verdict = {}", quote(self.verdict.describe()));
        let _ = writeln!(out, "\n[truncation]");
        let _ = writeln!(out, "r = {}\ns = {}", self.plan.r, self.plan.s);
        let _ = writeln!(out, "target = {}", quote(&self.plan.target.to_string()));
        let _ = writeln!(out, "error_bound = {}", quote(&self.plan.error_bound.to_decimal()));
        let _ = writeln!(out, "conservative = true");
        let _ = writeln!(out, "\n[d_values]");
        for (label, v) in &self.d_values {
            let _ = writeln!(out, "{} = {}", quote(label), quote(&v.to_decimal()));
        }
        let _ = writeln!(out, "\n[q_values]");
        for (label, q) in &self.q_values {
            let _ = writeln!(out, "{} = {}", quote(label), render_q(*q));
        }
        out
    }
}
