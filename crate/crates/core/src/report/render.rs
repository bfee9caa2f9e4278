use std::fmt::Write as _;

use crate::stats::{significance_stars, BinSummary, RegressionResult, INTERCEPT};

/// Plain-text regression table: one column per dependent variable, each
/// term as `estimate stars` over `(std error)`, the constant last, then the
/// fit statistics.
pub fn render_regression_text(results: &[(String, RegressionResult)]) -> String {
    let mut terms: Vec<&str> = Vec::new();
    for (_, r) in results {
        for c in &r.coefficients {
            if c.name != INTERCEPT && !terms.contains(&c.name.as_str()) {
                terms.push(&c.name);
            }
        }
    }
    terms.push(INTERCEPT);

    let mut body: Vec<(String, Vec<String>)> = Vec::new();
    for term in &terms {
        let mut est = Vec::new();
        let mut se = Vec::new();
        for (_, r) in results {
            match r.coefficient(term) {
                Some(c) => {
                    est.push(format!("{:.3}{}", c.estimate, c.stars));
                    se.push(format!("({:.3})", c.std_error));
                }
                None => {
                    est.push(String::new());
                    se.push(String::new());
                }
            }
        }
        body.push((term.to_string(), est));
        body.push((String::new(), se));
        body.push((String::new(), vec![String::new(); results.len()]));
    }
    body.pop();

    let footer: Vec<(String, Vec<String>)> = vec![
        ("Observations".into(), results.iter().map(|(_, r)| r.n_obs.to_string()).collect()),
        ("R2".into(), results.iter().map(|(_, r)| format!("{:.5}", r.r2)).collect()),
        ("Adjusted R2".into(), results.iter().map(|(_, r)| format!("{:.5}", r.adj_r2)).collect()),
        (
            "Residual Std. Error".into(),
            results
                .iter()
                .map(|(_, r)| format!("{:.5} (df = {})", r.resid_std_error, r.df_resid))
                .collect(),
        ),
        (
            "F Statistic".into(),
            results
                .iter()
                .map(|(_, r)| {
                    format!(
                        "{:.5}{} (df = {}; {})",
                        r.f_stat,
                        significance_stars(r.f_p_value),
                        r.df_model,
                        r.df_resid
                    )
                })
                .collect(),
        ),
    ];

    let header: Vec<String> = results.iter().map(|(d, _)| d.clone()).collect();
    let numbers: Vec<String> = (1..=results.len()).map(|i| format!("({i})")).collect();
    let label_w = body
        .iter()
        .chain(&footer)
        .map(|(l, _)| l.len())
        .max()
        .unwrap_or(0)
        .max("Dependent variable:".len());
    let col_w: Vec<usize> = (0..results.len())
        .map(|j| {
            body.iter()
                .chain(&footer)
                .map(|(_, cells)| cells[j].len())
                .chain([header[j].len(), numbers[j].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let total_w = label_w + col_w.iter().map(|w| w + 2).sum::<usize>();
    let rule = "=".repeat(total_w);
    let thin = "-".repeat(total_w);

    let mut out = String::new();
    let line = |out: &mut String, label: &str, cells: &[String]| {
        let mut s = format!("{label:<label_w$}");
        for (c, w) in cells.iter().zip(&col_w) {
            let _ = write!(s, "  {c:>w$}");
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    out.push_str(&rule);
    out.push('\n');
    line(&mut out, "Dependent variable:", &header);
    line(&mut out, "", &numbers);
    out.push_str(&thin);
    out.push('\n');
    for (l, cells) in &body {
        line(&mut out, l, cells);
    }
    out.push_str(&thin);
    out.push('\n');
    for (l, cells) in &footer {
        line(&mut out, l, cells);
    }
    out.push_str(&rule);
    out.push('\n');
    out.push_str("Note: *p<0.05; **p<0.01; ***p<0.001\n");
    out
}

/// Single-file SVG of bin means with their confidence intervals.
pub fn render_binscatter_svg(bins: &[BinSummary], x_label: &str, y_label: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const PAD: f64 = 60.0;
    let xs: Vec<f64> = bins.iter().map(|b| (b.x_low + b.x_high) / 2.0).collect();
    let (x0, x1) = bounds(xs.iter().copied());
    let (y0, y1) = bounds(bins.iter().flat_map(|b| [b.ci_low, b.ci_high]));
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<line x1="{PAD}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/>"#,
        b = H - PAD,
        r = W - PAD
    );
    let _ = writeln!(s, r#"<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{b}" stroke="black"/>"#, b = H - PAD);
    for (v, anchor_y) in [(y0, H - PAD), (y1, PAD)] {
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{anchor_y:.2}" font-size="11" text-anchor="end">{v:.3}</text>"#,
            x = PAD - 6.0
        );
    }
    for (v, anchor_x) in [(x0, PAD), (x1, W - PAD)] {
        let _ = writeln!(
            s,
            r#"<text x="{anchor_x:.2}" y="{y:.2}" font-size="11" text-anchor="middle">{v:.3}</text>"#,
            y = H - PAD + 16.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{x:.2}" y="{y:.2}" font-size="13" text-anchor="middle">{}</text>"#,
        escape(x_label),
        x = W / 2.0,
        y = H - 14.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{y:.2}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {y:.2})">{}</text>"#,
        escape(y_label),
        y = H / 2.0
    );
    for (b, x) in bins.iter().zip(&xs) {
        let cx = sx(*x);
        let _ = writeln!(
            s,
            r#"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="steelblue"/>"#,
            sy(b.ci_low),
            sy(b.ci_high)
        );
        let _ = writeln!(
            s,
            r#"<circle cx="{cx:.2}" cy="{:.2}" r="4" fill="steelblue"/>"#,
            sy(b.mean_y)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() || !hi.is_finite() {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
