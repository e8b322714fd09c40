//! Publication-style text tables and a line-oriented `key=value` dump of an [`EvalReport`].

use std::fmt::Write;

use crate::eval::cv::{CellStatus, EvalReport};

fn percent(rate: f64) -> String {
    let p = rate * 100.0;
    if (p - p.round()).abs() < 1e-9 {
        format!("{}%", p.round())
    } else {
        format!("{p}%")
    }
}

fn fixed5(v: f64) -> String {
    let s = format!("{v:.5}");
    if s == "-0.00000" {
        "0.00000".to_owned()
    } else {
        s
    }
}

fn pad_row(out: &mut String, cells: &[String], widths: &[usize]) {
    let line: Vec<String> = cells
        .iter()
        .zip(widths)
        .map(|(c, &w)| format!("{c:<w$}"))
        .collect();
    out.push_str(line.join("  ").trim_end());
    out.push('\n');
}

fn table(out: &mut String, title: &str, header: Vec<String>, body: Vec<Vec<String>>) {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in &body {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    out.push_str(title);
    out.push('\n');
    pad_row(out, &header, &widths);
    for row in &body {
        pad_row(out, row, &widths);
    }
    out.push('\n');
}

/// Text report: one RMSE table per missing rate (rows = models, columns = datasets, cells
/// `mean[std]` to five decimals, the lowest mean per column wrapped in `**`), followed by a Δacc
/// table per rate.
pub fn render_text(report: &EvalReport, config: &[(String, String)]) -> String {
    let mut out = String::new();
    out.push_str("# mcdimpute report\n");
    for (k, v) in config {
        let _ = writeln!(out, "# {k}={v}");
    }
    out.push('\n');

    let mut header = vec!["Models".to_owned()];
    header.extend(report.datasets.iter().cloned());
    for &rate in &report.rates {
        let best: Vec<Option<f64>> = report
            .datasets
            .iter()
            .map(|ds| {
                report
                    .models
                    .iter()
                    .filter_map(|&m| report.cell(ds, m, rate).and_then(|c| c.rmse_mean))
                    .min_by(f64::total_cmp)
            })
            .collect();
        let body = report
            .models
            .iter()
            .map(|&m| {
                let mut row = vec![m.display_name().to_owned()];
                for (ds, best) in report.datasets.iter().zip(&best) {
                    let text = match report.cell(ds, m, rate) {
                        Some(c) => match (&c.status, c.rmse_mean, c.rmse_std) {
                            (CellStatus::Ok, Some(mean), Some(std)) => {
                                let s = format!("{mean:.5}[{std:.5}]");
                                if Some(mean) == *best {
                                    format!("**{s}**")
                                } else {
                                    s
                                }
                            }
                            _ => "failed".to_owned(),
                        },
                        None => "-".to_owned(),
                    };
                    row.push(text);
                }
                row
            })
            .collect();
        table(
            &mut out,
            &format!("{} missing data (RMSE)", percent(rate)),
            header.clone(),
            body,
        );
    }
    for &rate in &report.rates {
        let body = report
            .models
            .iter()
            .map(|&m| {
                let mut row = vec![m.display_name().to_owned()];
                for ds in &report.datasets {
                    row.push(match report.cell(ds, m, rate).and_then(|c| c.delta_acc) {
                        Some(v) => fixed5(v),
                        None => "failed".to_owned(),
                    });
                }
                row
            })
            .collect();
        table(
            &mut out,
            &format!("{} missing data (Δacc)", percent(rate)),
            header.clone(),
            body,
        );
    }
    out
}

/// Every number of the report as `key=value` lines; floats use the shortest round-trip form.
pub fn render_kv(report: &EvalReport, config: &[(String, String)]) -> String {
    let mut out = String::new();
    for (k, v) in config {
        let _ = writeln!(out, "config.{k}={v}");
    }
    for c in &report.cells {
        let key = format!("cell.{}.{}.{}", c.dataset, c.model.id(), c.rate);
        match &c.status {
            CellStatus::Ok => {
                let _ = writeln!(out, "{key}.status=ok");
            }
            CellStatus::Failed(msg) => {
                let _ = writeln!(out, "{key}.status=failed: {msg}");
            }
        }
        if let (Some(m), Some(s), Some(a), Some(d)) =
            (c.rmse_mean, c.rmse_std, c.rmse_all_mean, c.delta_acc)
        {
            let _ = writeln!(out, "{key}.rmse_mean={m}");
            let _ = writeln!(out, "{key}.rmse_std={s}");
            let _ = writeln!(out, "{key}.rmse_all_mean={a}");
            let _ = writeln!(out, "{key}.delta_acc={d}");
        }
        for (f, ((r, a), d)) in c
            .fold_rmse
            .iter()
            .zip(&c.fold_rmse_all)
            .zip(&c.fold_delta_acc)
            .enumerate()
        {
            let _ = writeln!(out, "{key}.fold{f}.rmse={r}");
            let _ = writeln!(out, "{key}.fold{f}.rmse_all={a}");
            let _ = writeln!(out, "{key}.fold{f}.delta_acc={d}");
        }
    }
    out
}
