//! Flat effect records and their table/CSV rendering.

use std::io::Write;

use oce::{Error, Result};

/// One effect value: intervention node, outcome node, shift, outcome
/// level, value and method tag, plus the Monte Carlo standard error when
/// there is one. `rep` tags bootstrap replicates.
#[derive(Debug, Clone)]
pub struct Record {
    pub rep: Option<usize>,
    pub i: usize,
    pub o: usize,
    pub l: usize,
    pub l_prime: usize,
    pub k: usize,
    pub value: f64,
    pub method: &'static str,
    pub std_err: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Table,
    Csv,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Render records in the fixed column order
/// `i,o,l,l_prime,k,value,method,std_err`, preceded by `rep` when any
/// record carries one.
pub fn write_records(out: &mut dyn Write, records: &[Record], format: Format) -> Result<()> {
    let with_rep = records.iter().any(|r| r.rep.is_some());
    let res = match format {
        Format::Csv => write_records_csv(out, records, with_rep),
        Format::Table => write_records_table(out, records, with_rep),
    };
    res.map_err(|e| Error::Data(format!("cannot write report: {e}")))
}

fn write_records_csv(
    out: &mut dyn Write,
    records: &[Record],
    with_rep: bool,
) -> std::io::Result<()> {
    if with_rep {
        writeln!(out, "rep,i,o,l,l_prime,k,value,method,std_err")?;
    } else {
        writeln!(out, "i,o,l,l_prime,k,value,method,std_err")?;
    }
    for r in records {
        if with_rep {
            write!(out, "{},", r.rep.map(|x| x.to_string()).unwrap_or_default())?;
        }
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.i,
            r.o,
            r.l,
            r.l_prime,
            r.k,
            r.value,
            r.method,
            fmt_opt(r.std_err)
        )?;
    }
    Ok(())
}

fn write_records_table(
    out: &mut dyn Write,
    records: &[Record],
    with_rep: bool,
) -> std::io::Result<()> {
    if with_rep {
        writeln!(
            out,
            "{:>6} {:>4} {:>4} {:>4} {:>8} {:>4} {:>14} {:>14} {:>12}",
            "rep", "i", "o", "l", "l_prime", "k", "value", "method", "std_err"
        )?;
    } else {
        writeln!(
            out,
            "{:>4} {:>4} {:>4} {:>8} {:>4} {:>14} {:>14} {:>12}",
            "i", "o", "l", "l_prime", "k", "value", "method", "std_err"
        )?;
    }
    for r in records {
        let se = r
            .std_err
            .map(|x| format!("{x:.3e}"))
            .unwrap_or_else(|| "-".into());
        if with_rep {
            writeln!(
                out,
                "{:>6} {:>4} {:>4} {:>4} {:>8} {:>4} {:>14.8} {:>14} {:>12}",
                r.rep.map(|x| x.to_string()).unwrap_or_default(),
                r.i,
                r.o,
                r.l,
                r.l_prime,
                r.k,
                r.value,
                r.method,
                se
            )?;
        } else {
            writeln!(
                out,
                "{:>4} {:>4} {:>4} {:>8} {:>4} {:>14.8} {:>14} {:>12}",
                r.i, r.o, r.l, r.l_prime, r.k, r.value, r.method, se
            )?;
        }
    }
    Ok(())
}

/// Per-outcome-level summary of a replicate sweep.
#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub k: usize,
    pub mean: f64,
    pub sd: f64,
    pub q025: f64,
    pub q500: f64,
    pub q975: f64,
}

/// Linear-interpolation quantile of a sorted slice.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Mean, standard deviation and 2.5/50/97.5% quantiles per outcome level
/// across replicates (`values[rep][k]`).
pub fn summarize(values: &[Vec<f64>]) -> Vec<SummaryRow> {
    if values.is_empty() {
        return Vec::new();
    }
    let levels = values[0].len();
    let reps = values.len() as f64;
    (0..levels)
        .map(|k| {
            let mut column: Vec<f64> = values.iter().map(|v| v[k]).collect();
            column.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mean = column.iter().sum::<f64>() / reps;
            let var =
                column.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (reps - 1.0).max(1.0);
            SummaryRow {
                k: k + 1,
                mean,
                sd: var.sqrt(),
                q025: quantile(&column, 0.025),
                q500: quantile(&column, 0.5),
                q975: quantile(&column, 0.975),
            }
        })
        .collect()
}

pub fn write_summary(out: &mut dyn Write, rows: &[SummaryRow], format: Format) -> Result<()> {
    let res = (|| -> std::io::Result<()> {
        match format {
            Format::Csv => {
                writeln!(out, "k,mean,sd,q025,q500,q975")?;
                for r in rows {
                    writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        r.k, r.mean, r.sd, r.q025, r.q500, r.q975
                    )?;
                }
            }
            Format::Table => {
                writeln!(
                    out,
                    "{:>4} {:>12} {:>12} {:>12} {:>12} {:>12}",
                    "k", "mean", "sd", "q2.5%", "median", "q97.5%"
                )?;
                for r in rows {
                    writeln!(
                        out,
                        "{:>4} {:>12.6} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
                        r.k, r.mean, r.sd, r.q025, r.q500, r.q975
                    )?;
                }
            }
        }
        Ok(())
    })();
    res.map_err(|e| Error::Data(format!("cannot write summary: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert_eq!(quantile(&v, 0.5), 2.5);
    }

    #[test]
    fn summary_shapes() {
        let rows = summarize(&[vec![0.1, -0.1], vec![0.3, -0.3]]);
        assert_eq!(rows.len(), 2);
        assert!((rows[0].mean - 0.2).abs() < 1e-15);
        assert_eq!(rows[0].k, 1);
    }

    #[test]
    fn csv_layout_is_stable() {
        let records = vec![Record {
            rep: None,
            i: 1,
            o: 2,
            l: 1,
            l_prime: 2,
            k: 1,
            value: -0.25,
            method: "closed",
            std_err: None,
        }];
        let mut buf = Vec::new();
        write_records(&mut buf, &records, Format::Csv).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("i,o,l,l_prime,k,value,method,std_err\n"));
        assert!(text.contains("1,2,1,2,1,-0.25,closed,"));
    }
}
