//! Writes a [`Verdict`] to disk: `report.json`, `timing.json`, `tables/*.csv`, `witnesses/*.json`.

use crate::error::{Error, Result};
use crate::linalg::Point;
use crate::minimize::TestField;
use crate::verdict::Verdict;
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

/// Deterministic pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct WitnessFile<'a> {
    check: &'a str,
    x0: Point,
    value: f64,
    m: usize,
    vertices: &'a [Point],
    cells: Vec<&'a [usize]>,
    values: &'a [f64],
    clamped: &'a [usize],
}

fn witness_json(check: &str, x0: Point, value: f64, w: &TestField) -> Result<String> {
    let cells = (0..w.mesh.num_cells()).map(|c| w.mesh.cell(c)).collect();
    to_json(&WitnessFile { check, x0, value, m: w.m, vertices: w.mesh.vertices(), cells, values: &w.values, clamped: &w.clamped })
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(&self.header).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

fn s<T: ToString>(x: T) -> String {
    x.to_string()
}

fn joined(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn tables(v: &Verdict) -> Vec<(String, Table)> {
    let mut out = Vec::new();
    if !v.qc.is_empty() {
        let mut t = Table::new(&["index", "x0_1", "x0_2", "xi", "cap", "deficit", "iterations", "low_confidence"]);
        for (i, r) in v.qc.iter().enumerate() {
            for row in &r.table {
                t.push(vec![
                    s(i),
                    s(r.x0[0]),
                    s(r.x0[1]),
                    joined(&r.xi.entries()),
                    s(row.cap),
                    s(row.deficit),
                    s(row.iterations),
                    s(row.low_confidence),
                ]);
            }
        }
        out.push(("qc.csv".to_string(), t));
    }
    if !v.qslb.is_empty() {
        let mut t = Table::new(&["index", "x0_1", "x0_2", "normal_1", "normal_2", "h", "deficit", "c_inf", "violated", "low_confidence"]);
        for (i, r) in v.qslb.iter().enumerate() {
            let violated = r.verdict == crate::qslb::QslbVerdict::Violated;
            t.push(vec![
                s(i),
                s(r.x0[0]),
                s(r.x0[1]),
                s(r.normal[0]),
                s(r.normal[1]),
                s(r.h),
                s(r.deficit),
                s(r.c_inf),
                s(violated),
                s(r.low_confidence),
            ]);
        }
        out.push(("qslb.csv".to_string(), t));
    }
    if !v.refinement.is_empty() {
        let mut t = Table::new(&["x0_1", "x0_2", "h", "deficit"]);
        for r in &v.refinement {
            t.push(vec![s(r.x0[0]), s(r.x0[1]), s(r.h), s(r.deficit)]);
        }
        out.push(("refinement.csv".to_string(), t));
    }
    if !v.epsdelta.is_empty() {
        let mut t = Table::new(&["index", "x0_1", "x0_2", "eps", "delta", "minima", "signature"]);
        for (i, r) in v.epsdelta.iter().enumerate() {
            for row in &r.rows {
                let sig = serde_json::to_string(&row.signature).unwrap_or_default().trim_matches('"').to_string();
                t.push(vec![s(i), s(r.x0[0]), s(r.x0[1]), s(row.eps), s(row.delta), joined(&row.minima), sig]);
            }
        }
        out.push(("epsdelta.csv".to_string(), t));
    }
    for (i, r) in v.liminf.iter().enumerate() {
        let mut t = Table::new(&["n", "value", "tail_min", "limit_value"]);
        for row in &r.rows {
            t.push(vec![s(row.n), s(row.value), s(row.tail_min), s(r.limit_value)]);
        }
        out.push((format!("liminf_{i}.csv"), t));
    }
    for (i, c) in v.necessity.iter().enumerate() {
        let mut t = Table::new(&["n", "energy_gap", "threshold"]);
        for row in &c.rows {
            t.push(vec![s(row.n), s(row.energy_gap), s(c.threshold)]);
        }
        out.push((format!("necessity_{i}.csv"), t));
    }
    if let Some(d) = &v.decomposition {
        let mut t = Table::new(&["n", "k", "coupling", "sup_coupling", "component_tv"]);
        for m in &d.result.members {
            t.push(vec![s(m.n), s(m.k), joined(&m.coupling), joined(&m.sup_coupling), joined(&m.component_tv)]);
        }
        out.push(("decomposition.csv".to_string(), t));
        let mut t = Table::new(&["n", "residual", "relative"]);
        for r in &d.additivity.rows {
            t.push(vec![s(r.n), s(r.residual), s(r.relative)]);
        }
        out.push(("additivity.csv".to_string(), t));
        for st in &d.result.s_tables {
            let mut t = Table::new(&["m", "estimate", "sup_deviation", "within_bound"]);
            for r in &st.rows {
                t.push(vec![s(r.m), s(r.estimate), s(r.sup_deviation), s(r.within_bound)]);
            }
            out.push((format!("s_table_{}.csv", st.set), t));
        }
    }
    if !v.recession.is_empty() {
        let mut t = Table::new(&["x0_1", "x0_2", "xi", "estimate", "analytic", "rate"]);
        for r in &v.recession {
            let est = r.estimate.map(s).unwrap_or_default();
            let rate = r.rate.map(s).unwrap_or_default();
            t.push(vec![s(r.x0[0]), s(r.x0[1]), joined(&r.xi.entries()), est, s(r.analytic), rate]);
        }
        out.push(("recession.csv".to_string(), t));
    }
    if let Some(mu) = &v.mu {
        let mut t = Table::new(&["t", "sampled", "analytic"]);
        for m in mu {
            t.push(vec![s(m.t), s(m.sampled), m.analytic.map(s).unwrap_or_default()]);
        }
        out.push(("mu.csv".to_string(), t));
    }
    out
}

/// Writes every artifact under `dir` and returns the written paths in a fixed order.
pub fn write_artifacts(v: &Verdict, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let report = dir.join("report.json");
    fs::write(&report, to_json(v)?)?;
    written.push(report);
    let timing = dir.join("timing.json");
    fs::write(&timing, to_json(&v.timing)?)?;
    written.push(timing);
    let tdir = dir.join("tables");
    fs::create_dir_all(&tdir)?;
    for (name, t) in tables(v) {
        let p = tdir.join(name);
        t.write(&p)?;
        written.push(p);
    }
    let mut witnesses = Vec::new();
    for (i, r) in v.qc.iter().enumerate() {
        if let Some(w) = &r.witness {
            witnesses.push((format!("qc_{i}.json"), witness_json("qc", r.x0, r.deficit, w)?));
        }
    }
    for (i, r) in v.qslb.iter().enumerate() {
        if let Some(w) = &r.witness {
            witnesses.push((format!("qslb_{i}.json"), witness_json("qslb", r.x0, r.deficit, w)?));
        }
    }
    if !witnesses.is_empty() {
        let wdir = dir.join("witnesses");
        fs::create_dir_all(&wdir)?;
        for (name, body) in witnesses {
            let p = wdir.join(name);
            fs::write(&p, body)?;
            written.push(p);
        }
    }
    Ok(written)
}
