use std::path::Path;

use anyhow::{bail, Context, Result};
use trikoorn_core::koornwinder::{index_to_linear, linear_to_index};
use trikoorn_core::{CoeffVec, TriIndex, TriPoint};

/// Contents of an input CSV, identified by its header.
pub enum CsvInput {
    Coefficients(Vec<(TriIndex, f64)>),
    Samples(Vec<(TriPoint, f64)>),
}

pub fn read_csv(path: &Path) -> Result<CsvInput> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let records = rdr.records().collect::<std::result::Result<Vec<_>, _>>()?;
    match header.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["n", "k", "value"] => {
            let mut out = Vec::new();
            for r in &records {
                let n: i64 = r[0].parse().with_context(|| format!("bad n in {r:?}"))?;
                let k: i64 = r[1].parse().with_context(|| format!("bad k in {r:?}"))?;
                let v: f64 = r[2].parse().with_context(|| format!("bad value in {r:?}"))?;
                out.push((TriIndex::new(n, k)?, v));
            }
            Ok(CsvInput::Coefficients(out))
        }
        ["x", "y", "value"] => {
            let mut out = Vec::new();
            for r in &records {
                let x: f64 = r[0].parse().with_context(|| format!("bad x in {r:?}"))?;
                let y: f64 = r[1].parse().with_context(|| format!("bad y in {r:?}"))?;
                let v: f64 = r[2].parse().with_context(|| format!("bad value in {r:?}"))?;
                let pt = TriPoint::new(x, y);
                if x < 0.0 || y < 0.0 || pt.z() < -1e-12 {
                    bail!("sample ({x}, {y}) lies outside the triangle");
                }
                out.push((pt, v));
            }
            Ok(CsvInput::Samples(out))
        }
        _ => bail!("unrecognized CSV header {header:?}; expected n,k,value or x,y,value"),
    }
}

/// Places `(n, k, value)` rows into a coefficient vector of the given basis.
pub fn coefficients_into(rows: &[(TriIndex, f64)], v: &mut CoeffVec) -> Result<()> {
    for (idx, value) in rows {
        let i = index_to_linear(*idx)?;
        if i >= v.values.len() {
            bail!("coefficient {idx} exceeds degree {}", v.basis.maxdeg);
        }
        v.values[i] = *value;
    }
    Ok(())
}

pub fn coefficients_csv(v: &CoeffVec) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "k", "value"])?;
    for (i, value) in v.values.iter().enumerate() {
        let idx = linear_to_index(i);
        w.write_record([idx.n.to_string(), idx.k.to_string(), value.to_string()])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn grid_csv(pts: &[TriPoint], values: &[f64]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "y", "value"])?;
    for (p, v) in pts.iter().zip(values) {
        w.write_record([p.x.to_string(), p.y.to_string(), v.to_string()])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// `(i/g, j/g)` for `i + j <= g`, ordered by `i` then `j`.
pub fn barycentric_grid(g: usize) -> Vec<TriPoint> {
    let g = g.max(1);
    let mut pts = Vec::new();
    for i in 0..=g {
        for j in 0..=(g - i) {
            pts.push(TriPoint::new(i as f64 / g as f64, j as f64 / g as f64));
        }
    }
    pts
}

pub fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
