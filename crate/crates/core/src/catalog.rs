//! Generalized Pauli constraint catalogs.
//!
//! A constraint is an integer affine function `D(λ) = κ₀ + Σ κᵢ λᵢ` that is
//! non-negative on the polytope of its setting. Only the Borland–Dennis
//! setting (3,6) and the setting (4,8) ship with the crate; every other
//! setting must be supplied as a catalog file (see [`load_catalog`]).
//!
//! # File format
//!
//! Catalogs are TOML documents:
//!
//! ```toml
//! # pin-lab GPC catalog
//! [setting]
//! n_particles = 3
//! dim = 6
//!
//! [[constraints]]
//! label = "D1"
//! kappa0 = 2
//! coeffs = [-1, -1, 0, -1, 0, 0]
//! ```
//!
//! An optional `structural = true` marks one half of an equality; such
//! constraints are checked but never enter `D_min`. [`serialize_catalog`]
//! writes exactly this layout, so `serialize ∘ load` is byte-identical on
//! its own output.

use std::fmt::{self, Write as _};
use std::path::Path;

use itertools::Itertools;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("no built-in catalog for setting {0}; load one from a catalog file")]
    UnsupportedSetting(Setting),
    #[error("setting {0} is trivial: its constraints are not proper inequalities")]
    TrivialSetting(Setting),
    #[error("invalid setting (N = {n}, d = {d}): need 1 <= N <= d")]
    InvalidSetting { n: usize, d: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("constraint has only zero coefficients")]
    ZeroConstraint,
    #[error("restriction out of range: r = {r}, s = {s} for setting {setting}")]
    RestrictionRange { setting: Setting, r: usize, s: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("restricted function is violated on the target polytope (minimum {min:e})")]
    NotImplied { min: f64 },
    #[error("setting {0} is too large for vertex enumeration")]
    EnumerationTooLarge(Setting),
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

/// An (N, d) setting: N fermions in a d-dimensional one-particle space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, PartialOrd, Ord)]
pub struct Setting {
    pub n_particles: usize,
    pub dim: usize,
}

impl Setting {
    pub fn new(n_particles: usize, dim: usize) -> Result<Self, CatalogError> {
        if n_particles == 0 || dim < n_particles {
            return Err(CatalogError::InvalidSetting { n: n_particles, d: dim });
        }
        Ok(Setting { n_particles, dim })
    }

    /// Hartree–Fock vertex (1,…,1,0,…,0).
    pub fn hartree_fock(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|i| if i < self.n_particles { 1.0 } else { 0.0 })
            .collect()
    }

    /// Pairs with N = 2 (or d - N = 2, its particle-hole mirror) and below
    /// only carry equalities.
    pub fn is_trivial(&self) -> bool {
        self.n_particles <= 2 || self.dim - self.n_particles <= 2
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.n_particles, self.dim)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GpcConstraint {
    pub label: String,
    pub kappa0: i64,
    pub coeffs: Vec<i64>,
    /// One half of an equality pair; excluded from D_min.
    pub structural: bool,
}

impl GpcConstraint {
    pub fn new(label: impl Into<String>, kappa0: i64, coeffs: Vec<i64>) -> Self {
        GpcConstraint {
            label: label.into(),
            kappa0,
            coeffs,
            structural: false,
        }
    }

    pub fn structural(mut self) -> Self {
        self.structural = true;
        self
    }

    pub fn affine(&self) -> AffineFunction {
        AffineFunction {
            kappa0: self.kappa0,
            coeffs: self.coeffs.clone(),
        }
    }

    /// Indices with a nonzero coefficient.
    pub fn support(&self) -> Vec<usize> {
        self.coeffs.iter().positions(|&c| c != 0).collect()
    }

    pub fn max_abs_coeff(&self) -> i64 {
        self.coeffs.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn eval_f64(&self, lambda: &[f64]) -> f64 {
        self.affine().eval_f64(lambda)
    }
}

/// Integer affine function `κ₀ + κ·λ`, e.g. the restriction of a constraint
/// to a smaller setting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AffineFunction {
    pub kappa0: i64,
    pub coeffs: Vec<i64>,
}

impl AffineFunction {
    pub fn eval_f64(&self, lambda: &[f64]) -> f64 {
        self.kappa0 as f64 + self.coeffs.iter().zip(lambda).map(|(&c, &l)| c as f64 * l).sum::<f64>()
    }

    fn gcd(&self) -> i64 {
        std::iter::once(self.kappa0)
            .chain(self.coeffs.iter().copied())
            .fold(0i64, |g, v| gcd(g, v.abs()))
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    Builtin,
    ExternalFile,
}

#[derive(Debug, Clone, Serialize)]
pub struct GpcCatalog {
    pub setting: Setting,
    pub constraints: Vec<GpcConstraint>,
    pub provenance: Provenance,
}

impl GpcCatalog {
    /// Constraints that take part in D_min.
    pub fn inequalities(&self) -> impl Iterator<Item = &GpcConstraint> {
        self.constraints.iter().filter(|c| !c.structural)
    }

    pub fn get(&self, label: &str) -> Option<&GpcConstraint> {
        self.constraints.iter().find(|c| c.label == label)
    }

    /// Same setting and constraint list, regardless of provenance.
    pub fn same_constraints(&self, other: &GpcCatalog) -> bool {
        self.setting == other.setting && self.constraints == other.constraints
    }
}

/// Divide all entries by the gcd of their absolute values.
pub fn canonicalize(constraint: &GpcConstraint) -> Result<GpcConstraint, CatalogError> {
    let g = constraint.affine().gcd();
    if g == 0 {
        return Err(CatalogError::ZeroConstraint);
    }
    Ok(GpcConstraint {
        label: constraint.label.clone(),
        kappa0: constraint.kappa0 / g,
        coeffs: constraint.coeffs.iter().map(|c| c / g).collect(),
        structural: constraint.structural,
    })
}

fn canonical_affine(f: &AffineFunction) -> Option<AffineFunction> {
    let g = f.gcd();
    (g != 0).then(|| AffineFunction {
        kappa0: f.kappa0 / g,
        coeffs: f.coeffs.iter().map(|c| c / g).collect(),
    })
}

fn equality_pair(label: usize, i: usize, j: usize, d: usize) -> [GpcConstraint; 2] {
    let mut up = vec![0; d];
    up[i] = 1;
    up[j] = 1;
    let down: Vec<i64> = up.iter().map(|c| -c).collect();
    [
        GpcConstraint::new(format!("E{label}+"), -1, up).structural(),
        GpcConstraint::new(format!("E{label}-"), 1, down).structural(),
    ]
}

fn borland_dennis() -> Vec<GpcConstraint> {
    let mut out = vec![GpcConstraint::new("D1", 2, vec![-1, -1, 0, -1, 0, 0])];
    for (k, (i, j)) in [(0, 5), (1, 4), (2, 3)].into_iter().enumerate() {
        out.extend(equality_pair(k + 1, i, j, 6));
    }
    out
}

fn setting_4_8() -> Vec<GpcConstraint> {
    // (κ₀, κ₁..κ₈). Rows 8 and 9 share a label in the source listing; they
    // are numbered consecutively here.
    const ROWS: [(i64, [i64; 8]); 14] = [
        (0, [0, 0, 0, 0, -1, 1, 1, 1]),
        (0, [-1, 1, 0, 0, 0, 0, 1, 1]),
        (0, [-1, 0, 1, 0, 0, 1, 0, 1]),
        (0, [-1, 0, 0, 1, 0, 1, 1, 0]),
        (0, [-1, 0, 0, 1, 1, 0, 0, 1]),
        (0, [0, 0, -1, 1, 0, 0, 1, 1]),
        (0, [0, -1, 0, 1, 0, 1, 0, 1]),
        (2, [0, -1, -1, 0, -1, 0, 0, 1]),
        (2, [-1, 0, -1, 0, 0, -1, 0, 1]),
        (2, [-1, -1, 0, 0, 0, 0, -1, 1]),
        (2, [-1, -1, -1, 1, 0, 0, 0, 0]),
        (2, [-1, 0, 0, -1, -1, 0, 0, 1]),
        (2, [-1, -1, 0, 0, -1, 1, 0, 0]),
        (2, [-1, 0, -1, 0, -1, 0, 1, 0]),
    ];
    ROWS.iter()
        .enumerate()
        .map(|(i, (k0, c))| GpcConstraint::new(format!("D{}", i + 1), *k0, c.to_vec()))
        .collect()
}

/// Built-in catalogs: (3,6) (Borland–Dennis, equalities as inequality pairs)
/// and (4,8).
pub fn builtin_catalog(setting: Setting) -> Result<GpcCatalog, CatalogError> {
    let constraints = match (setting.n_particles, setting.dim) {
        (3, 6) => borland_dennis(),
        (4, 8) => setting_4_8(),
        _ => {
            if setting.is_trivial() {
                return Err(CatalogError::TrivialSetting(setting));
            }
            return Err(CatalogError::UnsupportedSetting(setting));
        }
    };
    Ok(GpcCatalog {
        setting,
        constraints,
        provenance: Provenance::Builtin,
    })
}

fn validation(msg: impl Into<String>) -> CatalogError {
    CatalogError::Validation(msg.into())
}

fn get_int(table: &toml::Table, key: &str, ctx: &str) -> Result<i64, CatalogError> {
    match table.get(key) {
        Some(toml::Value::Integer(v)) => Ok(*v),
        Some(other) => Err(validation(format!("{ctx}: `{key}` must be an integer, got {other}"))),
        None => Err(validation(format!("{ctx}: missing `{key}`"))),
    }
}

/// Parse and validate a catalog document.
pub fn load_catalog(document: &str) -> Result<GpcCatalog, CatalogError> {
    let root: toml::Table = document
        .parse()
        .map_err(|e: toml::de::Error| CatalogError::Parse(e.message().to_string()))?;

    let setting_tbl = root
        .get("setting")
        .and_then(|v| v.as_table())
        .ok_or_else(|| validation("missing [setting] table"))?;
    let n = get_int(setting_tbl, "n_particles", "setting")?;
    let d = get_int(setting_tbl, "dim", "setting")?;
    if n <= 0 || d <= 0 {
        return Err(validation(format!("setting entries must be positive, got ({n},{d})")));
    }
    let setting = Setting::new(n as usize, d as usize)?;
    if setting.is_trivial() {
        return Err(CatalogError::TrivialSetting(setting));
    }

    let list = match root.get("constraints") {
        Some(toml::Value::Array(a)) => a,
        Some(_) => return Err(validation("`constraints` must be an array of tables")),
        None => return Err(validation("catalog has no constraints")),
    };
    if list.is_empty() {
        return Err(validation("catalog has no constraints"));
    }

    let hf = setting.hartree_fock();
    let mut constraints: Vec<GpcConstraint> = Vec::with_capacity(list.len());
    for (idx, entry) in list.iter().enumerate() {
        let tbl = entry
            .as_table()
            .ok_or_else(|| validation(format!("constraint #{}: not a table", idx + 1)))?;
        let label = match tbl.get("label") {
            Some(toml::Value::String(s)) if !s.is_empty() => s.clone(),
            Some(_) => {
                return Err(validation(format!(
                    "constraint #{}: `label` must be a non-empty string",
                    idx + 1
                )))
            }
            None => return Err(validation(format!("constraint #{}: missing `label`", idx + 1))),
        };
        let ctx = format!("constraint {label}");
        let kappa0 = get_int(tbl, "kappa0", &ctx)?;
        let coeffs = match tbl.get("coeffs") {
            Some(toml::Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    toml::Value::Integer(i) => Ok(*i),
                    other => Err(validation(format!("{ctx}: non-integer coefficient {other}"))),
                })
                .collect::<Result<Vec<_>, _>>()?,
            Some(_) => return Err(validation(format!("{ctx}: `coeffs` must be an array"))),
            None => return Err(validation(format!("{ctx}: missing `coeffs`"))),
        };
        if coeffs.len() != setting.dim {
            return Err(validation(format!(
                "{ctx}: {} coefficients for dimension {}",
                coeffs.len(),
                setting.dim
            )));
        }
        let structural = match tbl.get("structural") {
            None => false,
            Some(toml::Value::Boolean(b)) => *b,
            Some(_) => return Err(validation(format!("{ctx}: `structural` must be a boolean"))),
        };
        if let Some(key) = tbl
            .keys()
            .find(|k| !matches!(k.as_str(), "label" | "kappa0" | "coeffs" | "structural"))
        {
            return Err(validation(format!("{ctx}: unknown key `{key}`")));
        }
        let raw = GpcConstraint {
            label,
            kappa0,
            coeffs,
            structural,
        };
        let c = canonicalize(&raw).map_err(|_| validation(format!("{ctx}: all coefficients are zero")))?;
        let at_hf = c.eval_f64(&hf);
        if at_hf < 0.0 {
            return Err(validation(format!(
                "{ctx}: Hartree-Fock vertex violates the constraint (value {at_hf})"
            )));
        }
        if constraints.iter().any(|o| o.label == c.label) {
            return Err(validation(format!("{ctx}: duplicate label")));
        }
        if let Some(o) = constraints
            .iter()
            .find(|o| o.kappa0 == c.kappa0 && o.coeffs == c.coeffs)
        {
            return Err(validation(format!(
                "{ctx}: positive multiple of constraint {}",
                o.label
            )));
        }
        constraints.push(c);
    }
    if let Some(key) = root.keys().find(|k| !matches!(k.as_str(), "setting" | "constraints")) {
        return Err(validation(format!("unknown top-level key `{key}`")));
    }

    Ok(GpcCatalog {
        setting,
        constraints,
        provenance: Provenance::ExternalFile,
    })
}

pub fn load_catalog_file(path: &Path) -> Result<GpcCatalog, CatalogError> {
    let text = std::fs::read_to_string(path).map_err(|e| CatalogError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    load_catalog(&text)
}

/// Canonical text form of a catalog.
pub fn serialize_catalog(catalog: &GpcCatalog) -> String {
    let mut out = String::new();
    out.push_str("# pin-lab GPC catalog\n");
    let _ = writeln!(
        out,
        "[setting]\nn_particles = {}\ndim = {}",
        catalog.setting.n_particles, catalog.setting.dim
    );
    for c in &catalog.constraints {
        let coeffs = c.coeffs.iter().join(", ");
        let _ = write!(
            out,
            "\n[[constraints]]\nlabel = \"{}\"\nkappa0 = {}\ncoeffs = [{}]\n",
            c.label.escape_default(),
            c.kappa0,
            coeffs
        );
        if c.structural {
            out.push_str("structural = true\n");
        }
    }
    out
}

/// Fix the first `r` arguments to 1 and the last `s` to 0.
pub fn restrict(constraint: &GpcConstraint, r: usize, s: usize) -> Result<AffineFunction, CatalogError> {
    let d = constraint.coeffs.len();
    // the source setting's N is not stored on the constraint; range checks
    // against it happen in `restrict_in`
    if r + s > d {
        return Err(CatalogError::DimensionMismatch {
            expected: d,
            got: r + s,
        });
    }
    let kappa0 = constraint.kappa0 + constraint.coeffs[..r].iter().sum::<i64>();
    Ok(AffineFunction {
        kappa0,
        coeffs: constraint.coeffs[r..d - s].to_vec(),
    })
}

/// [`restrict`] with the range checks `0 <= r <= N'` and `0 <= s <= d' - N'`;
/// returns the target setting `(N' - r, d' - r - s)` alongside the function.
pub fn restrict_in(
    source: Setting,
    constraint: &GpcConstraint,
    r: usize,
    s: usize,
) -> Result<(Setting, AffineFunction), CatalogError> {
    if constraint.coeffs.len() != source.dim {
        return Err(CatalogError::DimensionMismatch {
            expected: source.dim,
            got: constraint.coeffs.len(),
        });
    }
    if r > source.n_particles || s > source.dim - source.n_particles {
        return Err(CatalogError::RestrictionRange { setting: source, r, s });
    }
    let target = Setting {
        n_particles: source.n_particles - r,
        dim: source.dim - r - s,
    };
    Ok((target, restrict(constraint, r, s)?))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum RestrictionClass {
    /// Positive multiple of the named catalog member (modulo normalization).
    ProperGpc { label: String },
    /// Implied by the target polytope but not one of its facets.
    Dependent,
    /// Constant non-negative function.
    Tautology,
}

/// Does `f = α g + t (Σλ - N)` hold for some α > 0 and real t?
fn positive_multiple_on_slice(f: &AffineFunction, g: &AffineFunction, n: i64) -> bool {
    let d = f.coeffs.len();
    // find α = p/q from a pair with g_i != g_j
    let Some((i, j)) = (0..d).tuple_combinations().find(|&(i, j)| g.coeffs[i] != g.coeffs[j]) else {
        return false;
    };
    let (mut p, mut q) = (f.coeffs[i] - f.coeffs[j], g.coeffs[i] - g.coeffs[j]);
    if q < 0 {
        p = -p;
        q = -q;
    }
    if p <= 0 {
        return false;
    }
    // q·f_k - p·g_k must equal a common value q·t, and q·f₀ - p·g₀ = -N·q·t
    let qt = q * f.coeffs[0] - p * g.coeffs[0];
    let uniform = (0..d).all(|k| q * f.coeffs[k] - p * g.coeffs[k] == qt);
    uniform && q * f.kappa0 - p * g.kappa0 == -n * qt
}

/// Classify a restricted function against the catalog of its target setting.
pub fn classify_restriction(
    restricted: &AffineFunction,
    target: &GpcCatalog,
) -> Result<RestrictionClass, CatalogError> {
    let d = target.setting.dim;
    if restricted.coeffs.len() != d {
        return Err(CatalogError::DimensionMismatch {
            expected: d,
            got: restricted.coeffs.len(),
        });
    }
    if restricted.coeffs.iter().all(|&c| c == 0) {
        return if restricted.kappa0 >= 0 {
            Ok(RestrictionClass::Tautology)
        } else {
            Err(CatalogError::NotImplied {
                min: restricted.kappa0 as f64,
            })
        };
    }
    let f = canonical_affine(restricted).expect("nonzero coefficients");
    let n = target.setting.n_particles as i64;
    for c in &target.constraints {
        let g = c.affine();
        if g == f || positive_multiple_on_slice(&f, &g, n) {
            return Ok(RestrictionClass::ProperGpc { label: c.label.clone() });
        }
    }
    let vertices = polytope_vertices(target)?;
    let min = vertices.iter().map(|v| f.eval_f64(v)).fold(f64::INFINITY, f64::min);
    if min >= -VERTEX_TOL {
        Ok(RestrictionClass::Dependent)
    } else {
        Err(CatalogError::NotImplied { min })
    }
}

const VERTEX_TOL: f64 = 1e-9;
const MAX_VERTEX_BASES: usize = 2_000_000;

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Vertices of the catalog polytope inside the ordered Pauli simplex, by
/// brute-force basis enumeration. Intended for small settings only.
pub fn polytope_vertices(catalog: &GpcCatalog) -> Result<Vec<Vec<f64>>, CatalogError> {
    let d = catalog.setting.dim;
    let n = catalog.setting.n_particles as f64;
    // rows (a, b) meaning a·λ + b >= 0
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    let unit = |i: usize, s: f64| {
        let mut a = vec![0.0; d];
        a[i] = s;
        a
    };
    rows.push((unit(0, -1.0), 1.0));
    rows.push((unit(d - 1, 1.0), 0.0));
    for i in 0..d - 1 {
        let mut a = vec![0.0; d];
        a[i] = 1.0;
        a[i + 1] = -1.0;
        rows.push((a, 0.0));
    }
    for c in &catalog.constraints {
        rows.push((c.coeffs.iter().map(|&x| x as f64).collect(), c.kappa0 as f64));
    }
    if binomial(rows.len(), d - 1) > MAX_VERTEX_BASES {
        return Err(CatalogError::EnumerationTooLarge(catalog.setting));
    }

    let mut vertices: Vec<Vec<f64>> = Vec::new();
    for active in (0..rows.len()).combinations(d - 1) {
        let mut m = Vec::with_capacity(d);
        let mut rhs = Vec::with_capacity(d);
        m.push(vec![1.0; d]);
        rhs.push(n);
        for &k in &active {
            m.push(rows[k].0.clone());
            rhs.push(-rows[k].1);
        }
        let Some(x) = solve_dense(m, rhs) else {
            continue;
        };
        if rows
            .iter()
            .all(|(a, b)| a.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() + b >= -VERTEX_TOL)
            && !vertices
                .iter()
                .any(|v| v.iter().zip(&x).all(|(p, q)| (p - q).abs() < 1e-9))
        {
            vertices.push(x);
        }
    }
    Ok(vertices)
}

fn solve_dense(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            if f != 0.0 {
                for k in col..n {
                    m[row][k] -= f * m[col][k];
                }
                rhs[row] -= f * rhs[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| m[row][k] * x[k]).sum();
        x[row] = (rhs[row] - s) / m[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(n: usize, d: usize) -> Setting {
        Setting::new(n, d).unwrap()
    }

    #[test]
    fn borland_dennis_catalog_contents() {
        let cat = builtin_catalog(s(3, 6)).unwrap();
        let bd = cat.get("D1").unwrap();
        assert_eq!(bd.kappa0, 2);
        assert_eq!(bd.coeffs, vec![-1, -1, 0, -1, 0, 0]);
        assert!(!bd.structural);
        assert_eq!(cat.constraints.len(), 7);
        assert_eq!(cat.inequalities().count(), 1);
        // λ1 + λ6 = 1 stored as two opposing halves
        let up = cat.get("E1+").unwrap();
        let down = cat.get("E1-").unwrap();
        assert_eq!((up.kappa0, &up.coeffs), (-1, &vec![1, 0, 0, 0, 0, 1]));
        assert_eq!((down.kappa0, &down.coeffs), (1, &vec![-1, 0, 0, 0, 0, -1]));
    }

    #[test]
    fn setting_4_8_catalog_contents() {
        let cat = builtin_catalog(s(4, 8)).unwrap();
        assert_eq!(cat.constraints.len(), 14);
        assert_eq!(cat.constraints[0].kappa0, 0);
        assert_eq!(cat.constraints[0].coeffs, vec![0, 0, 0, 0, -1, 1, 1, 1]);
        assert_eq!(cat.get("D11").unwrap().coeffs, vec![-1, -1, -1, 1, 0, 0, 0, 0]);
        // the second of the doubly labelled rows becomes D9
        assert_eq!(cat.get("D9").unwrap().coeffs, vec![-1, 0, -1, 0, 0, -1, 0, 1]);
        let hf = cat.setting.hartree_fock();
        for (i, c) in cat.constraints.iter().enumerate() {
            assert_eq!(canonicalize(c).unwrap(), *c);
            let v = c.eval_f64(&hf);
            assert!(v >= 0.0);
            if i < 7 {
                assert_eq!(v, 0.0, "{}", c.label);
            }
        }
    }

    #[test]
    fn unsupported_and_trivial_settings() {
        assert_eq!(
            builtin_catalog(s(3, 7)).unwrap_err(),
            CatalogError::UnsupportedSetting(s(3, 7))
        );
        assert_eq!(
            builtin_catalog(s(2, 6)).unwrap_err(),
            CatalogError::TrivialSetting(s(2, 6))
        );
        assert!(Setting::new(4, 3).is_err());
        assert!(Setting::new(0, 3).is_err());
    }

    #[test]
    fn canonicalize_examples() {
        let c = GpcConstraint::new("x", 4, vec![-2, -2, 0, -2, 0, 0]);
        let k = canonicalize(&c).unwrap();
        assert_eq!(k.kappa0, 2);
        assert_eq!(k.coeffs, vec![-1, -1, 0, -1, 0, 0]);
        assert_eq!(canonicalize(&k).unwrap(), k);
        let z = GpcConstraint::new("z", 0, vec![0; 6]);
        assert_eq!(canonicalize(&z).unwrap_err(), CatalogError::ZeroConstraint);
    }

    #[test]
    fn serialize_then_load_is_identity() {
        for setting in [s(3, 6), s(4, 8)] {
            let cat = builtin_catalog(setting).unwrap();
            let text = serialize_catalog(&cat);
            let back = load_catalog(&text).unwrap();
            assert!(back.same_constraints(&cat));
            assert_eq!(back.provenance, Provenance::ExternalFile);
            assert_eq!(serialize_catalog(&back), text);
        }
    }

    #[test]
    fn load_rejects_wrong_length() {
        let doc = "[setting]\nn_particles = 3\ndim = 6\n\n[[constraints]]\nlabel = \"x\"\nkappa0 = 2\ncoeffs = [-1, -1, 0, -1, 0, 0, 0]\n";
        assert!(matches!(load_catalog(doc), Err(CatalogError::Validation(_))));
    }

    #[test]
    fn load_rejects_non_integer_and_hf_violation() {
        let float = "[setting]\nn_particles = 3\ndim = 6\n[[constraints]]\nlabel = \"x\"\nkappa0 = 2\ncoeffs = [-1, -1.5, 0, -1, 0, 0]\n";
        assert!(matches!(load_catalog(float), Err(CatalogError::Validation(m)) if m.contains("non-integer")));
        let bad = "[setting]\nn_particles = 3\ndim = 6\n[[constraints]]\nlabel = \"x\"\nkappa0 = 1\ncoeffs = [-1, -1, 0, -1, 0, 0]\n";
        assert!(matches!(load_catalog(bad), Err(CatalogError::Validation(m)) if m.contains("Hartree")));
        assert!(matches!(load_catalog("[setting\n"), Err(CatalogError::Parse(_))));
        let dup = "[setting]\nn_particles = 3\ndim = 6\n[[constraints]]\nlabel = \"a\"\nkappa0 = 2\ncoeffs = [-1, -1, 0, -1, 0, 0]\n[[constraints]]\nlabel = \"b\"\nkappa0 = 4\ncoeffs = [-2, -2, 0, -2, 0, 0]\n";
        assert!(matches!(load_catalog(dup), Err(CatalogError::Validation(m)) if m.contains("multiple")));
    }

    #[test]
    fn load_accepts_single_4_8_constraint_and_canonicalizes() {
        let doc = "[setting]\nn_particles = 4\ndim = 8\n[[constraints]]\nlabel = \"D11\"\nkappa0 = 4\ncoeffs = [-2, -2, -2, 2, 0, 0, 0, 0]\n";
        let cat = load_catalog(doc).unwrap();
        let c = &cat.constraints[0];
        assert_eq!(c.kappa0, 2);
        assert_eq!(c.eval_f64(&[1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn restrict_examples() {
        let cat = builtin_catalog(s(4, 8)).unwrap();
        let (target, f) = restrict_in(cat.setting, cat.get("D11").unwrap(), 1, 2).unwrap();
        assert_eq!(target, s(3, 5));
        assert_eq!(
            f,
            AffineFunction {
                kappa0: 1,
                coeffs: vec![-1, -1, 1, 0, 0]
            }
        );

        let (_, f) = restrict_in(cat.setting, cat.get("D1").unwrap(), 1, 2).unwrap();
        assert_eq!(
            f,
            AffineFunction {
                kappa0: 0,
                coeffs: vec![0, 0, 0, -1, 1]
            }
        );

        let d5 = cat.get("D5").unwrap();
        assert_eq!(restrict(d5, 0, 0).unwrap(), d5.affine());
        assert!(matches!(
            restrict_in(cat.setting, d5, 5, 0),
            Err(CatalogError::RestrictionRange { .. })
        ));
        assert!(matches!(
            restrict_in(cat.setting, d5, 0, 5),
            Err(CatalogError::RestrictionRange { .. })
        ));
    }

    #[test]
    fn borland_dennis_polytope_vertices() {
        let cat = builtin_catalog(s(3, 6)).unwrap();
        let verts = polytope_vertices(&cat).unwrap();
        // HF, (1,½,½,½,½,0), the flat point and (¾,¾,½,½,¼,¼)
        assert_eq!(verts.len(), 4, "{verts:?}");
        for v in &verts {
            assert!((v.iter().sum::<f64>() - 3.0).abs() < 1e-12);
            assert!(cat.constraints.iter().all(|c| c.eval_f64(v) >= -1e-12));
        }
        let expected = [
            [1.0, 1.0, 1.0, 0.0, 0.0, 0.0],
            [1.0, 0.5, 0.5, 0.5, 0.5, 0.0],
            [0.5; 6],
            [0.75, 0.75, 0.5, 0.5, 0.25, 0.25],
        ];
        for e in expected {
            assert!(
                verts
                    .iter()
                    .any(|v| v.iter().zip(&e).all(|(a, b)| (a - b).abs() < 1e-12)),
                "{e:?}"
            );
        }
    }

    #[test]
    fn classify_examples() {
        let cat = builtin_catalog(s(3, 6)).unwrap();
        let taut = AffineFunction {
            kappa0: 1,
            coeffs: vec![0; 6],
        };
        assert_eq!(classify_restriction(&taut, &cat).unwrap(), RestrictionClass::Tautology);

        let bd = AffineFunction {
            kappa0: 4,
            coeffs: vec![-2, -2, 0, -2, 0, 0],
        };
        assert_eq!(
            classify_restriction(&bd, &cat).unwrap(),
            RestrictionClass::ProperGpc { label: "D1".into() }
        );
        // BD shifted by the normalization (Σλ - 3) is the same facet on the slice
        let shifted = AffineFunction {
            kappa0: -1,
            coeffs: vec![0, 0, 1, 0, 1, 1],
        };
        assert_eq!(
            classify_restriction(&shifted, &cat).unwrap(),
            RestrictionClass::ProperGpc { label: "D1".into() }
        );
        // 1 - λ1 >= 0 holds on the polytope but is not a facet of it
        let pauli = AffineFunction {
            kappa0: 1,
            coeffs: vec![-1, 0, 0, 0, 0, 0],
        };
        assert_eq!(classify_restriction(&pauli, &cat).unwrap(), RestrictionClass::Dependent);
        // 3 - λ1 - λ2 - λ3 - λ4 >= BD-type slack: strictly dominated
        let loose = AffineFunction {
            kappa0: 3,
            coeffs: vec![-1, -1, 0, -1, 0, 0],
        };
        assert_eq!(classify_restriction(&loose, &cat).unwrap(), RestrictionClass::Dependent);
        // 2λ1 - 2λ2 - 1 is negative at HF
        let violated = AffineFunction {
            kappa0: -1,
            coeffs: vec![2, -2, 0, 0, 0, 0],
        };
        assert!(matches!(
            classify_restriction(&violated, &cat),
            Err(CatalogError::NotImplied { .. })
        ));
        let wrong = AffineFunction {
            kappa0: 1,
            coeffs: vec![0; 5],
        };
        assert!(matches!(
            classify_restriction(&wrong, &cat),
            Err(CatalogError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn restrictions_of_4_8_to_borland_dennis_are_classified() {
        // every (4,8) constraint restricted with r = 1, s = 1 lands on (3,6)
        let big = builtin_catalog(s(4, 8)).unwrap();
        let small = builtin_catalog(s(3, 6)).unwrap();
        let mut proper = 0;
        for c in &big.constraints {
            let (target, f) = restrict_in(big.setting, c, 1, 1).unwrap();
            assert_eq!(target, small.setting);
            match classify_restriction(&f, &small).unwrap() {
                RestrictionClass::ProperGpc { .. } => proper += 1,
                RestrictionClass::Dependent | RestrictionClass::Tautology => {}
            }
        }
        // the Borland–Dennis inequality must have at least one extension
        assert!(proper >= 1);
    }

    fn arb_constraint() -> impl Strategy<Value = GpcConstraint> {
        (-5i64..=5, proptest::collection::vec(-5i64..=5, 6))
            .prop_filter("nonzero", |(k, c)| *k != 0 || c.iter().any(|&x| x != 0))
            .prop_map(|(k, c)| GpcConstraint::new("p", k, c))
    }

    proptest! {
        #[test]
        fn canonicalize_idempotent_and_sign_preserving(c in arb_constraint(), scale in 1i64..7,
                                                        lam in proptest::collection::vec(0.0f64..1.0, 6)) {
            let k = canonicalize(&c).unwrap();
            prop_assert_eq!(canonicalize(&k).unwrap(), k.clone());
            let scaled = GpcConstraint::new("p", c.kappa0 * scale, c.coeffs.iter().map(|x| x * scale).collect());
            prop_assert_eq!(canonicalize(&scaled).unwrap(), k.clone());
            let (a, b) = (c.eval_f64(&lam), k.eval_f64(&lam));
            prop_assert!(a.signum() == b.signum() || a.abs() < 1e-12);
        }

        #[test]
        fn restrict_commutes_with_canonicalize(c in arb_constraint(), r in 0usize..3, s in 0usize..3) {
            let k = canonicalize(&c).unwrap();
            let a = canonical_affine(&restrict(&c, r, s).unwrap());
            let b = canonical_affine(&restrict(&k, r, s).unwrap());
            prop_assert_eq!(a, b);
        }
    }
}
