//! Edge lists, label CSVs and `key = value` configuration files.
//!
//! Edge list: a header line `n m`, then `m` lines `u v` with `0 ≤ u < v < n`.
//! Label CSV: header `vertex,c0,..,c{k−1}`, one row of membership weights per
//! vertex; sign labels use the header `vertex,sign`.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{Graph, LabelMatrix};

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("line {line}: {msg}"))
}

pub fn read_edge_list(reader: impl BufRead) -> Result<Graph> {
    let mut lines = reader.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(s) if s.trim().is_empty() || s.trim_start().starts_with('#') => None,
        other => Some((i + 1, other)),
    });
    let (no, header) = lines
        .next()
        .ok_or_else(|| Error::Parse("empty edge list".into()))?;
    let header = header?;
    let mut it = header.split_whitespace();
    let n: usize = parse_field(it.next(), no, "vertex count")?;
    let m: usize = parse_field(it.next(), no, "edge count")?;
    let mut graph = Graph::new(n);
    let mut seen = 0;
    for (no, line) in lines {
        let line = line?;
        let mut it = line.split_whitespace();
        let u: usize = parse_field(it.next(), no, "endpoint")?;
        let v: usize = parse_field(it.next(), no, "endpoint")?;
        if it.next().is_some() {
            return Err(parse_err(no, "expected two endpoints"));
        }
        if u >= v || v >= n {
            return Err(parse_err(
                no,
                format!("edge ({u}, {v}) must satisfy u < v < {n}"),
            ));
        }
        if graph.has_edge(u, v) {
            return Err(parse_err(no, format!("duplicate edge ({u}, {v})")));
        }
        graph.add_edge(u, v)?;
        seen += 1;
    }
    if seen != m {
        return Err(Error::Parse(format!(
            "header announces {m} edges, found {seen}"
        )));
    }
    Ok(graph)
}

fn parse_field<T: FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("bad {what} {tok:?}")))
}

pub fn write_edge_list(graph: &Graph, mut w: impl Write) -> Result<()> {
    writeln!(w, "{} {}", graph.n(), graph.num_edges())?;
    for (u, v) in graph.edges() {
        writeln!(w, "{u} {v}")?;
    }
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

pub fn write_labels_csv(labels: &LabelMatrix, w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["vertex".to_string()];
    header.extend((0..labels.k()).map(|s| format!("c{s}")));
    out.write_record(&header).map_err(csv_err)?;
    for (i, row) in labels.rows().enumerate() {
        let mut rec = vec![i.to_string()];
        rec.extend(row.iter().map(|v| v.to_string()));
        out.write_record(&rec).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_labels_csv(r: impl std::io::Read) -> Result<LabelMatrix> {
    let mut rdr = csv::Reader::from_reader(r);
    let k = rdr.headers().map_err(csv_err)?.len().saturating_sub(1);
    if k == 0 {
        return Err(Error::Parse(
            "label CSV needs at least one community column".into(),
        ));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let vertex: usize = parse_field(rec.get(0), i + 2, "vertex")?;
        if vertex != i {
            return Err(parse_err(
                i + 2,
                format!("expected vertex {i}, found {vertex}"),
            ));
        }
        let row = (1..=k)
            .map(|c| parse_field::<f64>(rec.get(c), i + 2, "weight"))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    LabelMatrix::from_rows(&rows)
}

pub fn write_signs_csv(signs: &[f64], w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["vertex", "sign"]).map_err(csv_err)?;
    for (i, s) in signs.iter().enumerate() {
        out.write_record([i.to_string(), format!("{}", *s as i64)])
            .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads `±1` labels, either as a `vertex,sign` file or as a two-column label
/// matrix (community 0 ↦ +1).
pub fn read_signs_csv(r: impl std::io::Read) -> Result<Vec<f64>> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let signs_format = headers.get(1) == Some("sign") && headers.len() == 2;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let v = if signs_format {
            let s: f64 = parse_field(rec.get(1), i + 2, "sign")?;
            if s != 1.0 && s != -1.0 {
                return Err(parse_err(i + 2, "sign must be 1 or -1"));
            }
            s
        } else {
            let a: f64 = parse_field(rec.get(1), i + 2, "weight")?;
            if a >= 0.5 {
                1.0
            } else {
                -1.0
            }
        };
        out.push(v);
    }
    Ok(out)
}

pub fn write_vector_csv(name: &str, x: &[f64], w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["vertex", name]).map_err(csv_err)?;
    for (i, v) in x.iter().enumerate() {
        out.write_record([i.to_string(), v.to_string()])
            .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// `key = value` pairs; `#` starts a comment, blank lines are ignored and
/// later keys override earlier ones.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| parse_err(i + 1, format!("expected key = value, got {line:?}")))?;
            let key = k.trim();
            if key.is_empty() {
                return Err(parse_err(i + 1, "empty key"));
            }
            entries.insert(key.to_string(), v.trim().to_string());
        }
        Ok(Config { entries })
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::InvalidParams(format!("config key {key}: cannot parse {v:?}"))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Comma-separated list; a present but empty value is an empty list.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        let Some(v) = self.raw(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse().map_err(|_| {
                    Error::InvalidParams(format!("config key {key}: cannot parse {s:?}"))
                })
            })
            .collect::<Result<Vec<T>>>()
            .map(Some)
    }
}
