use std::fs;
use std::path::Path;

use riesz_core::diagnostics::EnergyReport;
use riesz_core::timestep::FieldStack;
use serde_json::{json, Value};

use crate::error::{LabError, LabResult};

pub const CONVENTIONS: &str = "Domain [0, 2*pi)^d with unit-free variables. Integrals, L2 and \
Sobolev norms are taken over the torus of volume (2*pi)^d, not averaged. m_c is the \
sigma^-N weighted momentum integral. Rates are in inverse time units of the simulation.";

pub fn create_dir(dir: &Path) -> LabResult<()> {
    fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))
}

pub fn fmt(v: f64) -> String {
    format!("{v:.17e}")
}

/// Column names, with `m_c` expanded per component.
pub fn timeseries_header(dim: usize) -> Vec<String> {
    let mut h = vec!["t".to_string(), "mass".into(), "neutrality_residual".into()];
    h.extend((0..dim).map(|j| format!("m_c_{j}")));
    h.extend(
        [
            "norm_h_hm", "norm_u_hm", "norm_hm", "norm_l2", "L", "E", "E_mu", "cross_term", "X_m",
            "D", "min_rho",
        ]
        .map(String::from),
    );
    h
}

pub fn timeseries_row(r: &EnergyReport) -> Vec<String> {
    let mut row = vec![fmt(r.t), fmt(r.mass), fmt(r.neutrality_residual)];
    row.extend(r.m_c.iter().map(|v| fmt(*v)));
    row.extend(
        [
            r.norm_h_hm,
            r.norm_u_hm,
            r.norm_hm,
            r.norm_l2,
            r.l,
            r.e,
            r.e_mu,
            r.cross_term,
            r.x_m,
            r.d,
            r.min_rho,
        ]
        .map(fmt),
    );
    row
}

pub fn write_csv(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> LabResult<()> {
    let io = |e: csv::Error| LabError::io(path, e.into());
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| LabError::io(path, e))
}

pub fn write_timeseries(path: &Path, dim: usize, reports: &[EnergyReport]) -> LabResult<()> {
    write_csv(path, &timeseries_header(dim), reports.iter().map(timeseries_row))
}

/// Replaces non-finite numbers by `null` and returns their JSON paths.
pub fn sanitize(v: &mut Value, path: &str, dropped: &mut Vec<String>) {
    match v {
        Value::Number(n) => {
            if !n.as_f64().is_some_and(f64::is_finite) {
                dropped.push(path.to_string());
                *v = Value::Null;
            }
        }
        Value::Array(items) => {
            for (i, item) in items.iter_mut().enumerate() {
                sanitize(item, &format!("{path}[{i}]"), dropped);
            }
        }
        Value::Object(map) => {
            for (k, item) in map.iter_mut() {
                sanitize(item, &format!("{path}.{k}"), dropped);
            }
        }
        _ => {}
    }
}

/// JSON float that maps non-finite values to `null`.
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

pub fn write_summary(path: &Path, mut summary: Value) -> LabResult<()> {
    let mut dropped = Vec::new();
    sanitize(&mut summary, "$", &mut dropped);
    if let Value::Object(map) = &mut summary {
        map.insert("conventions".into(), json!(CONVENTIONS));
        map.insert(
            "versions".into(),
            json!({ "riesz-lab": env!("CARGO_PKG_VERSION") }),
        );
        if !dropped.is_empty() {
            map.insert("non_finite_fields".into(), json!(dropped));
        }
    }
    let text = serde_json::to_string_pretty(&summary).expect("json serializes");
    fs::write(path, text + "\n").map_err(|e| LabError::io(path, e))
}

/// Writes `<stem>.bin` (little-endian f64, fields one after another, last
/// axis fastest) and `<stem>.json` with the grid metadata.
pub fn write_snapshot(dir: &Path, stem: &str, t: f64, names: &[String], y: &FieldStack) -> LabResult<()> {
    let grid = y.grid();
    let mut bytes = Vec::with_capacity(8 * grid.len() * y.fields().len());
    for f in y.fields() {
        for v in f.samples() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    let bin = dir.join(format!("{stem}.bin"));
    fs::write(&bin, bytes).map_err(|e| LabError::io(&bin, e))?;
    let meta = json!({
        "t": t,
        "dim": grid.dim(),
        "points": grid.points(),
        "shape": vec![grid.points(); grid.dim()],
        "fields": names,
        "dtype": "float64",
        "byte_order": "little-endian",
        "layout": "fields stored consecutively; within a field row-major with the last axis fastest",
        "domain": "[0, 2*pi)^d, sample j at x = 2*pi*j/points",
    });
    let side = dir.join(format!("{stem}.json"));
    fs::write(&side, serde_json::to_string_pretty(&meta).expect("json") + "\n")
        .map_err(|e| LabError::io(&side, e))
}

/// Reads back a snapshot written by [`write_snapshot`].
pub fn read_snapshot(bin: &Path) -> LabResult<Vec<f64>> {
    let bytes = fs::read(bin).map_err(|e| LabError::io(bin, e))?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect())
}
