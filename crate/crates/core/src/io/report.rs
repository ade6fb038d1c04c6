//! CSV reports for metrics and training logs.

use crate::error::{Error, Result};
use crate::metrics::MetricReport;
use crate::trainer::EpochLog;

pub const METRICS_HEADER: [&str; 5] = ["image_id", "f_beta", "mae", "e_measure", "iou_adaptive"];
pub const LOG_HEADER: [&str; 10] = [
    "epoch", "lr", "loss", "pce", "ssc", "lsc", "gsa", "aux", "train_iou", "test_iou",
];
/// Row id of the dataset summary in the metrics report.
pub const AGGREGATE_ID: &str = "aggregate";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn finish(writer: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// One row per image plus a final `aggregate` row (per-image average).
pub fn metrics_csv(rows: &[(String, MetricReport)], aggregate: Option<&MetricReport>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(METRICS_HEADER).map_err(csv_err)?;
    let mut emit = |id: &str, r: &MetricReport| {
        w.write_record([
            id.to_string(),
            r.f_beta.to_string(),
            r.mae.to_string(),
            r.e_measure.to_string(),
            r.iou_adaptive.to_string(),
        ])
    };
    for (id, r) in rows {
        emit(id, r).map_err(csv_err)?;
    }
    if let Some(r) = aggregate {
        emit(AGGREGATE_ID, r).map_err(csv_err)?;
    }
    finish(w)
}

/// Training log, one row per epoch. Disabled terms are left empty.
pub fn training_log_csv(log: &[EpochLog]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(LOG_HEADER).map_err(csv_err)?;
    for e in log {
        w.write_record([
            e.epoch.to_string(),
            e.lr.to_string(),
            e.loss.to_string(),
            e.pce.to_string(),
            opt(e.ssc),
            opt(e.lsc),
            opt(e.gsa),
            opt(e.aux),
            e.train_iou.to_string(),
            opt(e.test_iou),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}
