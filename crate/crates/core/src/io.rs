//! CSV and JSON output.
//!
//! CSV files start with `# key=value` metadata lines, then a column header,
//! then data. Floats are written in shortest round-trip form (exponent
//! notation for very small or large magnitudes), so reading a file back
//! reproduces the values bit for bit.

use crate::charfun::{CfRow, CfTable, DensityGrid, DensityMethod};
use crate::error::{Error, Result};
use crate::moments::MomentTable;
use crate::simulate::{Completion, SampleKind, SampleSet};
use serde_json::json;
use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }

    /// From the file extension, defaulting to CSV.
    pub fn from_path(p: &Path) -> Self {
        match p.extension().and_then(|e| e.to_str()) {
            Some("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

/// A parsed CSV file: metadata, column names and numeric rows.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub metadata: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn meta(&self, key: &str) -> Result<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| Error::Format(format!("missing metadata key `{key}`")))
    }

    fn meta_parse<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let v = self.meta(key)?;
        v.parse()
            .map_err(|_| Error::Format(format!("bad value `{v}` for `{key}`")))
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("missing column `{name}`")))?;
        Ok(self.rows.iter().map(|r| r[i]).collect())
    }
}

pub fn write_table<W: Write>(mut w: W, t: &Table) -> Result<()> {
    for (k, v) in &t.metadata {
        writeln!(w, "# {k}={v}")?;
    }
    let mut cw = csv::Writer::from_writer(w);
    cw.write_record(&t.header)?;
    for r in &t.rows {
        cw.write_record(r.iter().map(|x| format!("{x:?}")))?;
    }
    cw.flush()?;
    Ok(())
}

pub fn read_table<R: Read>(mut r: R) -> Result<Table> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let mut metadata = Vec::new();
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        let body = line.trim_start_matches('#').trim();
        let (k, v) = body
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("metadata line without `=`: {line}")))?;
        metadata.push((k.to_string(), v.to_string()));
    }
    let mut cr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = cr.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in cr.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::Format(format!("not a number: `{f}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(Table {
        metadata,
        header,
        rows,
    })
}

fn kv(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

pub fn samples_table(s: &SampleSet) -> Table {
    Table {
        metadata: vec![
            kv("kind", s.kind.name()),
            kv("m", s.m),
            kv("S", s.s),
            kv("b", s.b),
            kv("alpha", s.alpha),
            kv("beta", s.beta),
            kv("n_steps", s.n_steps),
            kv("replicas", s.replicas),
            kv("seed", s.seed),
            kv("completion", s.completion.name()),
        ],
        header: vec!["value".into()],
        rows: s.values.iter().map(|v| vec![*v]).collect(),
    }
}

pub fn samples_from_table(t: &Table) -> Result<SampleSet> {
    let kind = t.meta("kind")?;
    let completion = t.meta("completion")?;
    Ok(SampleSet {
        kind: SampleKind::parse(kind).ok_or_else(|| Error::Format(format!("unknown kind `{kind}`")))?,
        m: t.meta_parse("m")?,
        s: t.meta_parse("S")?,
        b: t.meta_parse("b")?,
        alpha: t.meta_parse("alpha")?,
        beta: t.meta_parse("beta")?,
        n_steps: t.meta_parse("n_steps")?,
        replicas: t.meta_parse("replicas")?,
        seed: t.meta_parse("seed")?,
        completion: Completion::parse(completion)
            .ok_or_else(|| Error::Format(format!("unknown completion `{completion}`")))?,
        values: t.column("value")?,
    })
}

pub fn write_samples<W: Write>(w: W, s: &SampleSet, fmt: Format) -> Result<()> {
    match fmt {
        Format::Csv => write_table(w, &samples_table(s)),
        Format::Json => Ok(serde_json::to_writer_pretty(w, s)?),
    }
}

/// Reads a sample set written in either format; JSON is recognized by its
/// leading `{`.
pub fn read_samples<R: Read>(mut r: R) -> Result<SampleSet> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    if text.trim_start().starts_with('{') {
        Ok(serde_json::from_str(&text)?)
    } else {
        samples_from_table(&read_table(text.as_bytes())?)
    }
}

pub fn read_samples_file(path: &Path) -> Result<SampleSet> {
    read_samples(std::fs::File::open(path)?)
}

pub fn moments_table(t: &MomentTable) -> Table {
    let p = &t.params;
    Table {
        metadata: vec![
            kv("m", p.m),
            kv("S", p.s),
            kv("b", p.b),
            kv("order", t.order),
            kv("precision", format!("{:?}", t.precision)),
        ],
        header: ["n", "a_n", "b_n", "residual"].map(String::from).to_vec(),
        rows: (0..=t.order)
            .map(|n| vec![n as f64, t.a_seq[n], t.b_seq[n], t.residuals[n]])
            .collect(),
    }
}

pub fn write_moments<W: Write>(w: W, t: &MomentTable, fmt: Format) -> Result<()> {
    match fmt {
        Format::Csv => write_table(w, &moments_table(t)),
        Format::Json => {
            let p = &t.params;
            let v = json!({
                "m": p.m, "S": p.s, "b": p.b,
                "order": t.order,
                "precision": t.precision,
                "a_n": t.a_seq, "b_n": t.b_seq,
                "residual": t.residuals,
            });
            Ok(serde_json::to_writer_pretty(w, &v)?)
        }
    }
}

pub fn density_table(d: &DensityGrid) -> Table {
    let mut metadata = vec![
        kv("m", d.m),
        kv("S", d.s),
        kv("b", d.b),
        kv("alpha", d.alpha),
        kv("beta", d.beta),
        kv("method", d.method.name()),
        kv("truncation_t", d.truncation_t),
        kv("tol", d.tol),
    ];
    metadata.extend(d.metadata.iter().cloned());
    Table {
        metadata,
        header: ["x", "p", "error"].map(String::from).to_vec(),
        rows: (0..d.points.len())
            .map(|i| vec![d.points[i], d.values[i], d.errors[i]])
            .collect(),
    }
}

const DENSITY_KEYS: [&str; 8] = ["m", "S", "b", "alpha", "beta", "method", "truncation_t", "tol"];

pub fn density_from_table(t: &Table) -> Result<DensityGrid> {
    let method = match t.meta("method")? {
        "fourier" => DensityMethod::FourierInversion,
        "mixture" => DensityMethod::Mixture,
        other => return Err(Error::Format(format!("unknown method `{other}`"))),
    };
    Ok(DensityGrid {
        m: t.meta_parse("m")?,
        s: t.meta_parse("S")?,
        b: t.meta_parse("b")?,
        alpha: t.meta_parse("alpha")?,
        beta: t.meta_parse("beta")?,
        method,
        truncation_t: t.meta_parse("truncation_t")?,
        tol: t.meta_parse("tol")?,
        points: t.column("x")?,
        values: t.column("p")?,
        errors: t.column("error")?,
        metadata: t
            .metadata
            .iter()
            .filter(|(k, _)| !DENSITY_KEYS.contains(&k.as_str()))
            .cloned()
            .collect(),
    })
}

pub fn write_density<W: Write>(w: W, d: &DensityGrid, fmt: Format) -> Result<()> {
    match fmt {
        Format::Csv => write_table(w, &density_table(d)),
        Format::Json => {
            // NaN is not JSON; absent parameters become null.
            let num = |x: f64| if x.is_finite() { json!(x) } else { json!(null) };
            let meta: BTreeMap<_, _> = d.metadata.iter().cloned().collect();
            let v = json!({
                "m": d.m, "S": d.s, "b": d.b,
                "alpha": d.alpha, "beta": d.beta,
                "method": d.method.name(),
                "truncation_t": num(d.truncation_t),
                "tol": num(d.tol),
                "metadata": meta,
                "x": d.points, "p": d.values, "error": d.errors,
            });
            Ok(serde_json::to_writer_pretty(w, &v)?)
        }
    }
}

pub fn cf_table(t: &CfTable) -> Table {
    Table {
        metadata: vec![
            kv("m", t.m),
            kv("S", t.s),
            kv("b", t.b),
            kv("alpha", t.alpha),
            kv("beta", t.beta),
        ],
        header: ["x", "F_re", "F_im", "G_re", "G_im", "phi_re", "phi_im"]
            .map(String::from)
            .to_vec(),
        rows: t
            .rows
            .iter()
            .map(|r| vec![r.x, r.f_re, r.f_im, r.g_re, r.g_im, r.phi_re, r.phi_im])
            .collect(),
    }
}

pub fn cf_from_table(t: &Table) -> Result<CfTable> {
    if t.rows.iter().any(|r| r.len() != 7) {
        return Err(Error::Format("characteristic-function rows have 7 columns".into()));
    }
    Ok(CfTable {
        m: t.meta_parse("m")?,
        s: t.meta_parse("S")?,
        b: t.meta_parse("b")?,
        alpha: t.meta_parse("alpha")?,
        beta: t.meta_parse("beta")?,
        rows: t
            .rows
            .iter()
            .map(|r| CfRow {
                x: r[0],
                f_re: r[1],
                f_im: r[2],
                g_re: r[3],
                g_im: r[4],
                phi_re: r[5],
                phi_im: r[6],
            })
            .collect(),
    })
}

pub fn write_cf<W: Write>(w: W, t: &CfTable, fmt: Format) -> Result<()> {
    match fmt {
        Format::Csv => write_table(w, &cf_table(t)),
        Format::Json => Ok(serde_json::to_writer_pretty(w, t)?),
    }
}
