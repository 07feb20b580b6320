//! Sweep plots drawn from the CSV text, never from in-memory results.

use std::fmt::Write as _;

use crate::CliError;

struct Point {
    log_kappa: f64,
    d_min: f64,
    error: f64,
    q: f64,
}

fn parse_points(csv_text: &str) -> Result<Vec<Point>, CliError> {
    let mut rdr = csv::Reader::from_reader(csv_text.as_bytes());
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Validation(format!("sweep csv lacks column {name}")))
    };
    let (ck, cd, ce, cq, cs) = (
        col("kappa")?,
        col("d_min")?,
        col("truncation_error")?,
        col("q_overall")?,
        col("status")?,
    );
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if &rec[cs] != "ok" {
            continue;
        }
        let num = |i: usize| rec[i].parse::<f64>().unwrap_or(f64::NAN);
        let kappa = num(ck);
        if kappa > 0.0 {
            out.push(Point {
                log_kappa: kappa.log10(),
                d_min: num(cd),
                error: num(ce),
                q: num(cq),
            });
        }
    }
    Ok(out)
}

struct Panel {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    xr: (f64, f64),
    yr: (f64, f64),
}

impl Panel {
    fn x(&self, v: f64) -> f64 {
        self.x0 + (v - self.xr.0) / (self.xr.1 - self.xr.0) * self.w
    }

    fn y(&self, v: f64) -> f64 {
        let v = v.clamp(self.yr.0, self.yr.1);
        self.y0 + self.h - (v - self.yr.0) / (self.yr.1 - self.yr.0) * self.h
    }

    fn frame(&self, s: &mut String, title: &str, xlabel: &str, ylabel: &str, log_y: bool) {
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            self.x0, self.y0, self.w, self.h
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">{title}</text>"#,
            self.x0 + self.w / 2.0,
            self.y0 - 10.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">{xlabel}</text>"#,
            self.x0 + self.w / 2.0,
            self.y0 + self.h + 36.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12" transform="rotate(-90 {:.2} {:.2})">{ylabel}</text>"#,
            self.x0 - 48.0,
            self.y0 + self.h / 2.0,
            self.x0 - 48.0,
            self.y0 + self.h / 2.0
        );
        for k in self.xr.0.ceil() as i64..=self.xr.1.floor() as i64 {
            let x = self.x(k as f64);
            let _ = writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle" font-size="10">1e{k}</text>"#,
                self.y0 + self.h,
                self.y0 + self.h - 5.0,
                self.y0 + self.h + 16.0
            );
        }
        let (lo, hi) = self.yr;
        let step = nice_step(hi - lo, log_y);
        let mut v = (lo / step).ceil() * step;
        while v <= hi + 1e-9 {
            let y = self.y(v);
            let label = if log_y {
                format!("1e{}", v.round() as i64)
            } else {
                format!("{v:.1}")
            };
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end" font-size="10">{label}</text>"#,
                self.x0,
                self.x0 + 5.0,
                self.x0 - 4.0,
                y + 3.0
            );
            v += step;
        }
    }
}

fn nice_step(span: f64, integer: bool) -> f64 {
    let raw = (span / 6.0).max(1e-9);
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    if integer {
        step.max(1.0).round()
    } else {
        step
    }
}

fn range(values: impl Iterator<Item = f64>, pad: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-9 {
        return (lo - 1.0, hi + 1.0);
    }
    (lo - pad * (hi - lo), hi + pad * (hi - lo))
}

/// Log-log D_min(κ) with truncation error bars beside log-linear Q(κ).
pub fn render_sweep_svg(csv_text: &str, n: usize) -> Result<String, CliError> {
    let pts = parse_points(csv_text)?;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="1000" height="440" viewBox="0 0 1000 440" font-family="sans-serif">"#
    );
    let _ = writeln!(s, r#"<rect width="1000" height="440" fill="white"/>"#);

    let xr = range(pts.iter().map(|p| p.log_kappa), 0.03);
    let positive: Vec<&Point> = pts.iter().filter(|p| p.d_min > 0.0).collect();
    let yr_d = range(
        positive
            .iter()
            .flat_map(|p| [p.d_min.log10(), (p.d_min + p.error.max(0.0)).log10()]),
        0.05,
    );
    let left = Panel {
        x0: 80.0,
        y0: 40.0,
        w: 380.0,
        h: 330.0,
        xr,
        yr: yr_d,
    };
    left.frame(&mut s, &format!("D_min, N = {n}"), "kappa", "D_min", true);
    for p in &positive {
        let x = left.x(p.log_kappa);
        let top = p.d_min + p.error.max(0.0);
        let bottom = p.d_min - p.error.max(0.0);
        let yb = if bottom > 0.0 {
            left.y(bottom.log10())
        } else {
            left.y(left.yr.0)
        };
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{yb:.2}" stroke="red"/><circle cx="{x:.2}" cy="{:.2}" r="2.5" fill="black"/>"#,
            left.y(top.log10()),
            left.y(p.d_min.log10())
        );
    }

    let finite_q: Vec<&Point> = pts.iter().filter(|p| p.q.is_finite()).collect();
    let right = Panel {
        x0: 580.0,
        y0: 40.0,
        w: 380.0,
        h: 330.0,
        xr,
        yr: range(finite_q.iter().map(|p| p.q), 0.05),
    };
    right.frame(&mut s, &format!("Q, N = {n}"), "kappa", "Q", false);
    let path: Vec<String> = finite_q
        .iter()
        .map(|p| format!("{:.2},{:.2}", right.x(p.log_kappa), right.y(p.q)))
        .collect();
    if !path.is_empty() {
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="blue"/>"#,
            path.join(" ")
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CSV: &str = "kappa,delta,d_min,argmin_label,q_overall,hf_distance,truncation_error,setting,status\n\
        1e-1,0.02,1e-14,D1,3.1,1e-5,8e-13,\"(3,6)\",ok\n\
        1e0,0.17,6.6e-8,D1,1.34,7.7e-4,2.9e-8,\"(3,6)\",ok\n\
        1e1,0.6,,,,,,,error: failed\n\
        1e2,1.1,5e-2,D1,0.04,0.61,2.7e-2,\"(3,6)\",ok\n";

    #[test]
    fn renders_ok_points_only() {
        let svg = render_sweep_svg(CSV, 3).unwrap();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("<polyline"));
        assert_eq!(svg, render_sweep_svg(CSV, 3).unwrap());
    }

    #[test]
    fn missing_column_is_rejected() {
        assert!(render_sweep_svg("kappa,d_min\n1,2\n", 3).is_err());
    }
}
