use std::fmt::Write as _;
use std::path::Path;

use super::config::ReportFormat;
use super::run::ReportRow;
use crate::error::{Error, Result};

pub const REPORT_COLUMNS: [&str; 11] = [
    "n", "m", "rep", "seed", "n1", "n1_frac", "pred", "abs_err", "deg_tv", "max_fw", "wall_ms",
];

const SIGNIFICANT: i32 = 10;

/// `%.10g`: ten significant digits, trailing zeros dropped, exponent form
/// outside `[1e-5, 1e10)`.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", (SIGNIFICANT - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..SIGNIFICANT).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (SIGNIFICANT - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

enum Cell {
    Int(u64),
    Float(f64),
    Missing,
}

fn cells(row: &ReportRow) -> [Cell; 11] {
    let int = |v: Option<usize>| v.map_or(Cell::Missing, |v| Cell::Int(v as u64));
    let float = |v: Option<f64>| match v {
        Some(x) if x.is_finite() => Cell::Float(x),
        _ => Cell::Missing,
    };
    [
        Cell::Int(row.n as u64),
        Cell::Int(row.m as u64),
        Cell::Int(row.rep as u64),
        Cell::Int(row.seed),
        int(row.n1),
        float(row.n1_frac),
        float(Some(row.pred)),
        float(row.abs_err),
        float(row.deg_tv),
        int(row.max_fw),
        float(row.wall_ms),
    ]
}

pub fn render_report(rows: &[ReportRow], format: ReportFormat) -> String {
    let mut out = String::new();
    match format {
        ReportFormat::Csv => {
            out.push_str(&REPORT_COLUMNS.join(","));
            out.push('\n');
            for row in rows {
                let line: Vec<String> = cells(row)
                    .iter()
                    .map(|c| match c {
                        Cell::Int(v) => v.to_string(),
                        Cell::Float(x) => format_sig(*x),
                        Cell::Missing => String::new(),
                    })
                    .collect();
                out.push_str(&line.join(","));
                out.push('\n');
            }
        }
        ReportFormat::Jsonl => {
            for row in rows {
                out.push('{');
                for (i, (key, cell)) in REPORT_COLUMNS.iter().zip(cells(row)).enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    let _ = match cell {
                        Cell::Int(v) => write!(out, "\"{key}\":{v}"),
                        Cell::Float(x) => write!(out, "\"{key}\":{}", format_sig(x)),
                        Cell::Missing => write!(out, "\"{key}\":null"),
                    };
                }
                out.push_str("}\n");
            }
        }
    }
    out
}

pub fn emit_report(rows: &[ReportRow], format: ReportFormat, path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Config("no rows to report".into()));
    }
    std::fs::write(path, render_report(rows, format)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(rep: usize) -> ReportRow {
        ReportRow {
            n: 1000,
            m: 1000,
            rep,
            seed: 17,
            n1: Some(950),
            n1_frac: Some(0.95),
            pred: 0.958_675_145_1,
            abs_err: Some(0.008_675_145_1),
            deg_tv: None,
            max_fw: Some(7),
            b_full: None,
            b_regular: None,
            b_simple: None,
            wall_ms: None,
        }
    }

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(0.5), "0.5");
        assert_eq!(format_sig(1.0 / 3.0), "0.3333333333");
        assert_eq!(format_sig(123456.789), "123456.789");
        assert_eq!(format_sig(1e-7), "1e-07");
        assert_eq!(format_sig(2.5e12), "2.5e+12");
        assert_eq!(format_sig(-0.000123), "-0.000123");
        assert_eq!(format_sig(9_999_999_999.6), "1e+10");
        for x in [0.958_675_145_1f64, 1e-9, 3.2e15, 7.0] {
            let back: f64 = format_sig(x).parse().unwrap();
            assert!((back - x).abs() <= 5e-10 * x.abs());
        }
    }

    #[test]
    fn one_row_csv() {
        let text = render_report(&[row(0)], ReportFormat::Csv);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(
            lines[0],
            "n,m,rep,seed,n1,n1_frac,pred,abs_err,deg_tv,max_fw,wall_ms"
        );
        assert_eq!(
            lines[1],
            "1000,1000,0,17,950,0.95,0.9586751451,0.0086751451,,7,"
        );
    }

    #[test]
    fn jsonl_lines_parse() {
        let text = render_report(&[row(0), row(1), row(2)], ReportFormat::Jsonl);
        assert_eq!(text.lines().count(), 3);
        for (i, line) in text.lines().enumerate() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert_eq!(v["rep"], i);
            assert!(v["deg_tv"].is_null());
            let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
            assert_eq!(keys.len(), REPORT_COLUMNS.len());
        }
    }

    #[test]
    fn emit_writes_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        emit_report(&[row(0)], ReportFormat::Csv, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 2);
        assert!(emit_report(&[], ReportFormat::Csv, &path).is_err());
        assert!(emit_report(
            &[row(0)],
            ReportFormat::Csv,
            &dir.path().join("no/such/dir")
        )
        .is_err());
    }
}
