//! Per-pair metric rows and the mean ± sample-std aggregate, as CSV.

use std::io::Write;

use crate::error::{Error, Result};
use crate::metrics::MetricsReport;

pub const CSV_HEADER: [&str; 9] = [
    "id", "f1", "f1_theta", "cl_dice", "hdf_euc", "hdf_rbf", "tp", "fp", "fn",
];

/// Id of the final CSV row.
pub const AGGREGATE_ID: &str = "aggregate";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator); 0 for a single value.
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> MeanStd {
        let n = values.len();
        if n == 0 {
            return MeanStd { mean: f64::NAN, std: f64::NAN };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        MeanStd { mean, std }
    }
}

impl std::fmt::Display for MeanStd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}±{}", self.mean, self.std)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub count: usize,
    pub f1: MeanStd,
    pub f1_theta: MeanStd,
    pub cl_dice: MeanStd,
    pub hdf_euc: MeanStd,
    pub hdf_rbf: MeanStd,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

pub fn aggregate<'a>(reports: impl IntoIterator<Item = &'a MetricsReport>) -> Aggregate {
    let reports: Vec<&MetricsReport> = reports.into_iter().collect();
    let col = |f: fn(&MetricsReport) -> f64| MeanStd::of(&reports.iter().map(|r| f(r)).collect::<Vec<_>>());
    Aggregate {
        count: reports.len(),
        f1: col(|r| r.f1),
        f1_theta: col(|r| r.f1_theta),
        cl_dice: col(|r| r.cl_dice),
        hdf_euc: col(|r| r.hdf_euc),
        hdf_rbf: col(|r| r.hdf_rbf),
        tp: reports.iter().map(|r| r.tp).sum(),
        fp: reports.iter().map(|r| r.fp).sum(),
        fn_: reports.iter().map(|r| r.fn_).sum(),
    }
}

/// Writes the header, one row per pair and a final aggregate row whose metric
/// cells read `mean±std` and whose counts are totals.
pub fn write_csv<W: Write>(out: W, rows: &[(String, MetricsReport)]) -> Result<()> {
    let csv_err = |e: csv::Error| Error::Io {
        path: "<csv>".into(),
        source: std::io::Error::other(e),
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for (id, r) in rows {
        w.write_record([
            id.clone(),
            r.f1.to_string(),
            r.f1_theta.to_string(),
            r.cl_dice.to_string(),
            r.hdf_euc.to_string(),
            r.hdf_rbf.to_string(),
            r.tp.to_string(),
            r.fp.to_string(),
            r.fn_.to_string(),
        ])
        .map_err(csv_err)?;
    }
    let a = aggregate(rows.iter().map(|(_, r)| r));
    w.write_record([
        AGGREGATE_ID.to_string(),
        a.f1.to_string(),
        a.f1_theta.to_string(),
        a.cl_dice.to_string(),
        a.hdf_euc.to_string(),
        a.hdf_rbf.to_string(),
        a.tp.to_string(),
        a.fp.to_string(),
        a.fn_.to_string(),
    ])
    .map_err(csv_err)?;
    w.flush().map_err(|e| Error::io("<csv>", e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(f1: f64, tp: usize) -> MetricsReport {
        MetricsReport {
            f1,
            f1_theta: f1,
            cl_dice: f1,
            hdf_euc: 0.0,
            hdf_rbf: 0.0,
            tp,
            fp: 1,
            fn_: 2,
            skeleton_gt: 0,
            skeleton_pred: 0,
        }
    }

    #[test]
    fn sample_std() {
        let m = MeanStd::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert!((m.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(MeanStd::of(&[7.0]).std, 0.0);
    }

    #[test]
    fn csv_layout() {
        let rows = vec![
            ("a".to_string(), report(0.5, 3)),
            ("b".to_string(), report(1.0, 4)),
        ];
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "id,f1,f1_theta,cl_dice,hdf_euc,hdf_rbf,tp,fp,fn");
        assert_eq!(lines[1], "a,0.5,0.5,0.5,0,0,3,1,2");
        assert!(lines[3].starts_with("aggregate,0.75±0.3535533905932738,"));
        assert!(lines[3].ends_with(",0±0,0±0,7,2,4"));
    }
}
