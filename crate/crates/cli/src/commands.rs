use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;

use pinlab::catalog::{builtin_catalog, load_catalog_file, serialize_catalog, GpcCatalog, Setting};
use pinlab::harmonium::{params_from_delta, params_from_kappa, HarmoniumParams};
use pinlab::polytope::{pinning_report, PinningReport};
use pinlab::spectrum::{eigen_spectrum, SpectrumRequest, SpectrumResult};
use pinlab::weakfit::{default_tail, fit_leading, sample, FitResult, Quantity};
use pinlab::{with_precision, Precision, Real};

use crate::args::{CatalogAction, Coupling, FitArgs, Format, ModelArgs, NonsArgs, PinArgs, SweepArgs};
use crate::catalogs::gather;
use crate::svg::render_sweep_svg;
use crate::CliError;

fn precision(bits: u32) -> Result<Precision, CliError> {
    Precision::from_bits(bits).ok_or_else(|| CliError::Usage(format!("unsupported precision {bits} bits (1..=512)")))
}

fn parse_real<T: Real>(flag: &str, s: &str) -> Result<T, CliError> {
    T::parse_decimal(s).ok_or_else(|| CliError::Usage(format!("--{flag}: cannot parse {s:?}")))
}

fn params<T: Real>(c: &Coupling) -> Result<HarmoniumParams<T>, CliError> {
    match (&c.kappa, &c.delta) {
        (Some(k), None) => Ok(params_from_kappa(c.n, parse_real::<T>("kappa", k)?)?),
        (None, Some(d)) => Ok(params_from_delta(c.n, parse_real::<T>("delta", d)?)?),
        _ => Err(CliError::Usage("exactly one of --kappa and --delta is required".into())),
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.escape_default())
}

/// f64 rendering shared by the CSV and structured outputs.
fn render_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        v.to_decimal()
    }
}

pub fn cmd_model(a: &ModelArgs, out: &mut dyn Write) -> Result<(), CliError> {
    with_precision!(precision(a.coupling.precision_bits)?, T => {
        let p = params::<T>(&a.coupling)?;
        let rows = [
            ("n_particles", p.n_particles.to_string()),
            ("kappa", p.kappa.to_decimal()),
            ("delta", p.delta.to_decimal()),
            ("scale_ratio", p.scale_ratio.to_decimal()),
            ("l_tilde", p.l_tilde().to_decimal()),
            ("q", p.q.to_decimal()),
            ("kernel_q", p.kernel_q.to_decimal()),
            ("basis_scale", p.basis_scale.to_decimal()),
        ];
        match a.format {
            Format::Structured => {
                writeln!(out, "[model]")?;
                for (k, v) in rows {
                    if k == "n_particles" {
                        writeln!(out, "{k} = {v}")?;
                    } else {
                        writeln!(out, "{k} = {}", quote(&v))?;
                    }
                }
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(rows.iter().map(|r| r.0))?;
                w.write_record(rows.iter().map(|r| r.1.as_str()))?;
                w.flush()?;
            }
        }
        Ok(())
    })
}

pub fn cmd_catalog(action: &CatalogAction, out: &mut dyn Write) -> Result<(), CliError> {
    match action {
        CatalogAction::Validate { file } => {
            let c = load_catalog_file(file)?;
            writeln!(
                out,
                "valid: setting {} with {} constraints ({} structural)",
                c.setting,
                c.constraints.len(),
                c.constraints.iter().filter(|c| c.structural).count()
            )?;
        }
        CatalogAction::Show { n_particles, dim, file } => {
            let c = match (n_particles, dim, file) {
                (_, _, Some(f)) => load_catalog_file(f)?,
                (Some(n), Some(d), None) => builtin_catalog(Setting::new(*n, *d)?)?,
                _ => return Err(CliError::Usage("catalog show needs N and d, or --file".into())),
            };
            write!(out, "{}", serialize_catalog(&c))?;
        }
    }
    Ok(())
}

pub fn cmd_nons(a: &NonsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    with_precision!(precision(a.coupling.precision_bits)?, T => {
        let p = params::<T>(&a.coupling)?;
        let res = eigen_spectrum(&SpectrumRequest::new(p, a.tail))?;
        let count = a.count.unwrap_or(res.spectrum.len()).min(res.spectrum.len());
        let values = &res.spectrum.values[..count];
        match a.format {
            Format::Structured => {
                writeln!(out, "[nons]")?;
                writeln!(out, "n_particles = {}", res.spectrum.particle_number)?;
                writeln!(out, "r = {}", res.r)?;
                writeln!(out, "precision = {}", quote(&res.spectrum.precision.to_string()))?;
                writeln!(out, "tail_bound = {}", quote(&res.spectrum.tail_bound.to_decimal()))?;
                writeln!(out, "convergence_gap = {}", quote(&res.convergence_gap.to_decimal()))?;
                writeln!(out, "element_error_bound = {}", quote(&res.element_error_bound.to_decimal()))?;
                writeln!(out, "values = [")?;
                for v in values {
                    writeln!(out, "  {},", quote(&v.to_decimal()))?;
                }
                writeln!(out, "]")?;
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(["index", "lambda"])?;
                for (i, v) in values.iter().enumerate() {
                    w.write_record([(i + 1).to_string(), v.to_decimal()])?;
                }
                w.flush()?;
            }
        }
        Ok(())
    })
}

/// Spectrum plus one report per applicable catalog.
pub struct Analysis<T> {
    pub spectrum: SpectrumResult<T>,
    pub reports: Vec<PinningReport<T>>,
    /// Index into `reports` with the smallest d_min uncertainty.
    pub best: usize,
}

pub fn analyze<T: Real>(
    params: HarmoniumParams<T>,
    tail: f64,
    catalogs: &[GpcCatalog],
) -> Result<Analysis<T>, CliError> {
    let spectrum = eigen_spectrum(&SpectrumRequest::new(params, tail))?;
    let mut reports = Vec::new();
    for c in catalogs {
        // catalogs that cannot be reached by truncation are skipped
        if let Ok(r) = pinning_report(c, &spectrum.spectrum, c.setting) {
            reports.push(r);
        }
    }
    if reports.is_empty() {
        return Err(CliError::Validation(format!(
            "no applicable catalog for N = {}",
            spectrum.spectrum.particle_number
        )));
    }
    let mut best = 0;
    for (i, r) in reports.iter().enumerate() {
        if r.d_min_uncertainty < reports[best].d_min_uncertainty {
            best = i;
        }
    }
    Ok(Analysis {
        spectrum,
        reports,
        best,
    })
}

pub fn cmd_pin(a: &PinArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let catalogs = gather(a.coupling.n, &a.catalogs)?;
    with_precision!(precision(a.coupling.precision_bits)?, T => {
        let p = params::<T>(&a.coupling)?;
        let (kappa, delta) = (p.kappa.clone(), p.delta.clone());
        let an = analyze(p, a.tail, &catalogs)?;
        match a.format {
            Format::Structured => {
                let mut s = String::new();
                let _ = writeln!(s, "[pin]");
                let _ = writeln!(s, "n_particles = {}", a.coupling.n);
                let _ = writeln!(s, "kappa = {}", quote(&kappa.to_decimal()));
                let _ = writeln!(s, "delta = {}", quote(&delta.to_decimal()));
                let _ = writeln!(s, "r = {}", an.spectrum.r);
                let _ = writeln!(s, "tail_bound = {}", quote(&an.spectrum.spectrum.tail_bound.to_decimal()));
                let _ = writeln!(s, "selected_setting = {}", quote(&an.reports[an.best].setting.to_string()));
                let _ = writeln!(s);
                s.push_str(&an.reports[an.best].to_structured());
                for (i, r) in an.reports.iter().enumerate() {
                    let _ = writeln!(s, "\n[[catalogs]]");
                    let _ = writeln!(s, "setting = {}", quote(&r.setting.to_string()));
                    let _ = writeln!(s, "selected = {}", i == an.best);
                    let _ = writeln!(s, "d_min = {}", quote(&r.d_min.to_decimal()));
                    let _ = writeln!(s, "d_min_uncertainty = {}", quote(&r.d_min_uncertainty.to_decimal()));
                    let _ = writeln!(s, "argmin_label = {}", quote(&r.argmin_label));
                    let _ = writeln!(s, "verdict = {}", quote(r.verdict.describe()));
                }
                out.write_all(s.as_bytes())?;
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(SWEEP_HEADER)?;
                for r in &an.reports {
                    w.write_record(row_fields(&kappa, &delta, r, "ok"))?;
                }
                w.flush()?;
            }
        }
        Ok(())
    })
}

pub const SWEEP_HEADER: [&str; 9] = [
    "kappa",
    "delta",
    "d_min",
    "argmin_label",
    "q_overall",
    "hf_distance",
    "truncation_error",
    "setting",
    "status",
];

fn row_fields<T: Real>(kappa: &T, delta: &T, r: &PinningReport<T>, status: &str) -> Vec<String> {
    vec![
        kappa.to_decimal(),
        delta.to_decimal(),
        r.d_min.to_decimal(),
        r.argmin_label.clone(),
        render_f64(r.q_overall),
        r.hf_distance.value.to_decimal(),
        r.d_min_uncertainty.to_decimal(),
        r.setting.to_string(),
        status.to_string(),
    ]
}

/// Log-spaced grid from `MIN:MAX:POINTS`; the endpoints are the parsed
/// literals themselves.
pub fn log_grid<T: Real>(spec: &str) -> Result<Vec<T>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, pts] = parts[..] else {
        return Err(CliError::Usage(format!("grid {spec:?} is not MIN:MAX:POINTS")));
    };
    let points: usize = pts
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("grid point count {pts:?}")))?;
    let lo: T = parse_real("kappa", lo)?;
    let hi: T = parse_real("kappa", hi)?;
    if points == 0 {
        return Err(CliError::Usage("empty κ grid".into()));
    }
    if !(lo > T::zero()) || hi < lo {
        return Err(CliError::Usage("κ grid needs 0 < MIN <= MAX".into()));
    }
    if points == 1 {
        return if lo == hi {
            Ok(vec![lo])
        } else {
            Err(CliError::Usage("κ grid needs at least 2 points".into()))
        };
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - &a) / T::from_usize(points - 1);
    Ok((0..points)
        .map(|i| match i {
            0 => lo.clone(),
            i if i == points - 1 => hi.clone(),
            i => (a.clone() + step.clone() * T::from_usize(i)).exp(),
        })
        .collect())
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(format!("--jobs: {e}")))
}

/// One CSV row per grid point, in grid order. Failures become rows with a
/// status message.
pub fn sweep_rows<T: Real>(
    n: usize,
    grid: &[T],
    tail: f64,
    catalogs: &[GpcCatalog],
    jobs: Option<usize>,
) -> Result<Vec<Vec<String>>, CliError> {
    let pool = pool(jobs)?;
    Ok(pool.install(|| {
        grid.par_iter()
            .map(|kappa| {
                let point = params_from_kappa(n, kappa.clone())
                    .map_err(CliError::from)
                    .and_then(|p| analyze(p, tail, catalogs));
                match point {
                    Ok(an) => row_fields(kappa, &kappa_delta(kappa), &an.reports[an.best], "ok"),
                    Err(e) => {
                        let mut row = vec![String::new(); SWEEP_HEADER.len()];
                        row[0] = kappa.to_decimal();
                        row[1] = kappa_delta(kappa).to_decimal();
                        row[8] = format!("error: {e}");
                        row
                    }
                }
            })
            .collect()
    }))
}

fn kappa_delta<T: Real>(kappa: &T) -> T {
    (T::one() + kappa).ln() / T::from_i128(4)
}

pub fn sweep_csv(rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Numerical(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Numerical(e.to_string()))
}

pub fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if !(a.tail > 0.0) {
        return Err(CliError::Usage(format!("--tail must be positive, got {}", a.tail)));
    }
    let catalogs = gather(a.n, &a.catalogs)?;
    if catalogs.is_empty() {
        return Err(CliError::Validation(format!("no applicable catalog for N = {}", a.n)));
    }
    let csv_text = with_precision!(precision(a.precision_bits)?, T => {
        let grid = log_grid::<T>(&a.kappa)?;
        sweep_csv(&sweep_rows(a.n, &grid, a.tail, &catalogs, a.jobs)?)?
    });
    if let Some(p) = &a.out_csv {
        std::fs::write(p, &csv_text)?;
    }
    if let Some(p) = &a.out_svg {
        std::fs::write(p, render_sweep_svg(&csv_text, a.n)?)?;
    }
    if a.out_csv.is_none() || a.format == Format::Structured {
        match a.format {
            Format::Csv => out.write_all(csv_text.as_bytes())?,
            Format::Structured => {
                let mut rdr = csv::Reader::from_reader(csv_text.as_bytes());
                for rec in rdr.records() {
                    let rec = rec?;
                    writeln!(out, "[[points]]")?;
                    for (k, v) in SWEEP_HEADER.iter().zip(rec.iter()) {
                        writeln!(out, "{k} = {}", quote(v))?;
                    }
                    writeln!(out)?;
                }
            }
        }
    }
    Ok(())
}

/// Quantity names accepted by `fit-weak`.
pub fn parse_quantity(n: usize, name: &str, catalogs: &[GpcCatalog]) -> Result<Quantity, CliError> {
    let index = |s: &str| -> Result<usize, CliError> {
        match s.parse::<usize>() {
            Ok(i) if i >= 1 => Ok(i),
            _ => Err(CliError::Usage(format!("bad occupation index {s:?}"))),
        }
    };
    if let Some(i) = name.strip_prefix("one-minus:") {
        return Ok(Quantity::OneMinus(index(i)?));
    }
    if let Some(i) = name.strip_prefix("lambda:") {
        return Ok(Quantity::Occupation(index(i)?));
    }
    if name == "hf-distance" {
        return Ok(Quantity::HfDistance);
    }
    let setting = if name == "dmin" {
        None
    } else if let Some(s) = name.strip_prefix("dmin:") {
        let (m, d) = s
            .split_once(',')
            .ok_or_else(|| CliError::Usage(format!("expected dmin:N,d, got {name:?}")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("bad setting {s:?}")))
        };
        Some(Setting::new(parse(m)?, parse(d)?)?)
    } else {
        return Err(CliError::Usage(format!("unknown quantity {name:?}")));
    };
    let pick = match setting {
        Some(s) => catalogs.iter().find(|c| c.setting == s),
        // the largest catalog for exactly N particles
        None => catalogs
            .iter()
            .filter(|c| c.setting.n_particles == n)
            .max_by_key(|c| c.setting.dim),
    };
    pick.cloned().map(Quantity::Dmin).ok_or_else(|| {
        CliError::Validation(match setting {
            Some(s) => format!("no catalog for setting {s}"),
            None => format!("dmin for N = {n} needs an ({n},d) catalog"),
        })
    })
}

/// Linear grid `MIN:MAX:POINTS`.
pub fn linear_grid<T: Real>(spec: &str) -> Result<Vec<T>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, pts] = parts[..] else {
        return Err(CliError::Usage(format!("grid {spec:?} is not MIN:MAX:POINTS")));
    };
    let points: usize = pts
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("grid point count {pts:?}")))?;
    if points < 2 {
        return Err(CliError::Usage("δ grid needs at least 2 points".into()));
    }
    let lo: T = parse_real("delta", lo)?;
    let hi: T = parse_real("delta", hi)?;
    let step = (hi - &lo) / T::from_usize(points - 1);
    Ok((0..points)
        .map(|i| lo.clone() + step.clone() * T::from_usize(i))
        .collect())
}

pub struct WeakFit<T> {
    pub fit: FitResult<T>,
    pub samples: Vec<(T, T)>,
    pub max_order: u32,
}

pub fn weak_fit<T: Real>(
    n: usize,
    quantity: &Quantity,
    grid: &[T],
    max_order: u32,
    tail: f64,
    jobs: Option<usize>,
) -> Result<WeakFit<T>, CliError> {
    let pool = pool(jobs)?;
    let samples = pool.install(|| {
        grid.par_iter()
            .map(|d| Ok((d.clone(), sample(n, d, quantity, tail)?)))
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    let fit = fit_leading(&samples, max_order)?;
    Ok(WeakFit {
        fit,
        samples,
        max_order,
    })
}

pub const MIN_FIT_BITS: u32 = 200;

pub fn cmd_fit_weak(a: &FitArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if a.precision_bits < MIN_FIT_BITS {
        return Err(CliError::Usage(format!("fit-weak needs at least {MIN_FIT_BITS} bits")));
    }
    let catalogs = gather(a.n, &a.catalogs)?;
    let quantity = parse_quantity(a.n, &a.quantity, &catalogs)?;
    let max_order = a.max_order.unwrap_or(2 * a.n as u32 + 8);
    let default_grid = format!("0.05:0.25:{}", max_order / 2 + 3);
    let grid_spec = a.delta.clone().unwrap_or(default_grid);
    with_precision!(precision(a.precision_bits)?, T => {
        let grid = linear_grid::<T>(&grid_spec)?;
        let tail = a.tail.unwrap_or_else(default_tail::<T>);
        let wf = weak_fit(a.n, &quantity, &grid, max_order, tail, a.jobs)?;
        if let Some(p) = &a.out_csv {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["delta", "value"])?;
            for (d, v) in &wf.samples {
                w.write_record([d.to_decimal(), v.to_decimal()])?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::Numerical(e.to_string()))?;
            std::fs::write(p, bytes)?;
        }
        match a.format {
            Format::Structured => {
                writeln!(out, "[fit]")?;
                writeln!(out, "n_particles = {}", a.n)?;
                writeln!(out, "quantity = {}", quote(&a.quantity))?;
                writeln!(out, "precision = {}", quote(&precision(a.precision_bits)?.to_string()))?;
                writeln!(out, "max_order = {}", wf.max_order)?;
                writeln!(out, "exponent = {}", wf.fit.exponent)?;
                writeln!(out, "coefficient = {}", quote(&wf.fit.coefficient.to_decimal()))?;
                writeln!(out, "residual = {}", quote(&wf.fit.residual.to_decimal()))?;
                writeln!(out, "sample_grid = [")?;
                for d in &wf.fit.sample_grid {
                    writeln!(out, "  {},", quote(&d.to_decimal()))?;
                }
                writeln!(out, "]\n\n[coefficients]")?;
                for (p, c) in &wf.fit.coefficients {
                    writeln!(out, "\"{p}\" = {}", quote(&c.to_decimal()))?;
                }
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(["power", "coefficient", "leading"])?;
                for (p, c) in &wf.fit.coefficients {
                    w.write_record([p.to_string(), c.to_decimal(), (*p == wf.fit.exponent).to_string()])?;
                }
                w.flush()?;
            }
        }
        Ok(())
    })
}
