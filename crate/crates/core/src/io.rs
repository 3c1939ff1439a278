//! CSV serialization for datasets, summary tables and EDF curves.
//!
//! Dataset files carry the header `d,y1..yp,z1..zk,x1..xq`. Floats are
//! written in shortest round-trip form, so reading a written file back
//! reproduces every value bit for bit.

use std::fmt::Write as _;
use std::io::Read;

use crate::data::{Dataset, Dims, Observation};
use crate::error::{Error, Result};
use crate::montecarlo::{EdfCurve, SummaryRow};

pub fn dataset_header(dims: Dims) -> String {
    let mut cols = vec!["d".to_string()];
    cols.extend((1..=dims.p).map(|i| format!("y{i}")));
    cols.extend((1..=dims.k).map(|i| format!("z{i}")));
    cols.extend((1..=dims.q).map(|i| format!("x{i}")));
    cols.join(",")
}

pub fn write_dataset_csv(data: &Dataset) -> String {
    let mut out = dataset_header(data.dims());
    out.push('\n');
    for o in data.observations() {
        write!(out, "{}", o.d).unwrap();
        for v in o.y.iter().chain(&o.z).chain(&o.x) {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

fn parse_header(fields: &[&str]) -> Result<Dims> {
    let bad = |reason: String| Error::Parse { line: 1, reason };
    if fields.first().map(|s| s.trim()) != Some("d") {
        return Err(bad("first column must be `d`".into()));
    }
    let mut dims = Dims { k: 0, p: 0, q: 0 };
    // columns must appear as y1.., then z1.., then x1..
    let mut stage = 0;
    for name in &fields[1..] {
        let name = name.trim();
        let (prefix, idx) = name.split_at(name.len().min(1));
        let idx: usize = idx
            .parse()
            .map_err(|_| bad(format!("unexpected column `{name}`")))?;
        let (slot, this_stage) = match prefix {
            "y" => (&mut dims.p, 0),
            "z" => (&mut dims.k, 1),
            "x" => (&mut dims.q, 2),
            _ => return Err(bad(format!("unexpected column `{name}`"))),
        };
        if this_stage < stage || idx != *slot + 1 {
            return Err(bad(format!("column `{name}` out of order")));
        }
        stage = this_stage;
        *slot += 1;
    }
    if dims.k == 0 || dims.p == 0 || dims.q == 0 {
        return Err(bad("header needs at least one y, z and x column".into()));
    }
    Ok(dims)
}

pub fn read_dataset_csv<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(Ok(r)) => r,
        Some(Err(e)) => {
            return Err(Error::Parse {
                line: 1,
                reason: e.to_string(),
            })
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                reason: "missing header".into(),
            })
        }
    };
    let dims = parse_header(&header.iter().collect::<Vec<_>>())?;
    let width = 1 + dims.p + dims.k + dims.q;
    let mut observations = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            reason: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let err = |reason: String| Error::Parse { line, reason };
        if rec.len() == 1 && rec[0].trim().is_empty() {
            continue;
        }
        if rec.len() != width {
            return Err(err(format!("expected {width} fields, found {}", rec.len())));
        }
        let d = match rec[0].trim() {
            "0" => 0u8,
            "1" => 1u8,
            other => return Err(err(format!("d must be 0 or 1, got `{other}`"))),
        };
        let mut vals = Vec::with_capacity(width - 1);
        for (col, field) in rec.iter().enumerate().skip(1) {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| err(format!("column {} is not a number: `{field}`", col + 1)))?;
            if !v.is_finite() {
                return Err(err(format!("column {} is not finite", col + 1)));
            }
            vals.push(v);
        }
        let z_start = dims.p;
        let x_start = dims.p + dims.k;
        observations.push(Observation {
            d,
            y: vals[..z_start].to_vec(),
            z: vals[z_start..x_start].to_vec(),
            x: vals[x_start..].to_vec(),
        });
    }
    if observations.is_empty() {
        return Err(Error::Parse {
            line: 2,
            reason: "no observations".into(),
        });
    }
    Dataset::new(observations, dims)
}

fn opt(v: Option<f64>) -> String {
    v.map(|c| c.to_string()).unwrap_or_default()
}

pub const SUMMARY_HEADER: &str = "variant,N,c,bias,rmse,median,mean_ad,median_ad,reps_used";

pub fn write_summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        let s = &r.stats;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.variant,
            r.n,
            opt(r.c),
            s.bias,
            s.rmse,
            s.median,
            s.mean_ad,
            s.median_ad,
            r.reps_used
        )
        .unwrap();
    }
    out
}

pub const EDF_HEADER: &str = "variant,N,value,fraction";

/// Variant id used in EDF files; kernel variants carry their scale as `label@c`.
pub fn curve_id(curve: &EdfCurve) -> String {
    match curve.c {
        Some(c) => format!("{}@{c}", curve.variant),
        None => curve.variant.to_string(),
    }
}

pub fn write_edf_csv(curves: &[EdfCurve]) -> String {
    let mut out = String::from(EDF_HEADER);
    out.push('\n');
    for c in curves {
        let id = curve_id(c);
        for (v, f) in &c.points {
            writeln!(out, "{id},{},{v},{f}", c.n).unwrap();
        }
    }
    out
}
