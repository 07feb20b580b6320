//! Catalog discovery: builtins, explicit files, and the search directory.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use pinlab::catalog::{builtin_catalog, load_catalog_file, GpcCatalog, Setting};

use crate::CliError;

pub const SEARCH_PATH_VAR: &str = "PINLAB_CATALOG_PATH";

fn search_dirs(var: Option<OsString>) -> Vec<PathBuf> {
    var.map(|v| {
        std::env::split_paths(&v)
            .filter(|p| !p.as_os_str().is_empty())
            .collect()
    })
    .unwrap_or_default()
}

/// Resolve `path` directly, then against each search directory.
pub fn resolve(path: &Path, dirs: &[PathBuf]) -> Result<PathBuf, CliError> {
    if path.is_file() {
        return Ok(path.to_path_buf());
    }
    if path.is_relative() {
        for d in dirs {
            let p = d.join(path);
            if p.is_file() {
                return Ok(p);
            }
        }
    }
    Err(CliError::Validation(format!(
        "catalog file {} not found",
        path.display()
    )))
}

/// Every `*.toml` in the search directories, sorted by path.
pub fn discovered(dirs: &[PathBuf]) -> Result<Vec<GpcCatalog>, CliError> {
    let mut files = Vec::new();
    for d in dirs {
        let Ok(entries) = std::fs::read_dir(d) else {
            continue;
        };
        for e in entries {
            let p = e?.path();
            if p.extension().is_some_and(|x| x == "toml") && p.is_file() {
                files.push(p);
            }
        }
    }
    files.sort();
    files.iter().map(|p| Ok(load_catalog_file(p)?)).collect()
}

/// Builtin catalogs a spectrum of `n` particles can be truncated to.
pub fn builtins_for(n: usize) -> Vec<GpcCatalog> {
    [(3, 6), (4, 8)]
        .into_iter()
        .filter(|&(m, _)| m <= n)
        .filter_map(|(m, d)| builtin_catalog(Setting::new(m, d).ok()?).ok())
        .collect()
}

/// Builtins, explicit files and discovered files applicable to `n`
/// particles, without duplicates, in that order.
pub fn gather(n: usize, explicit: &[PathBuf]) -> Result<Vec<GpcCatalog>, CliError> {
    gather_with(n, explicit, std::env::var_os(SEARCH_PATH_VAR))
}

pub fn gather_with(n: usize, explicit: &[PathBuf], var: Option<OsString>) -> Result<Vec<GpcCatalog>, CliError> {
    let dirs = search_dirs(var);
    let mut all = builtins_for(n);
    for p in explicit {
        let path = resolve(p, &dirs)?;
        all.push(load_catalog_file(&path)?);
    }
    all.extend(discovered(&dirs)?);
    let mut out: Vec<GpcCatalog> = Vec::new();
    for c in all {
        if c.setting.n_particles > n {
            continue;
        }
        if !out.iter().any(|o| o.setting == c.setting && o.same_constraints(&c)) {
            out.push(c);
        }
    }
    Ok(out)
}
