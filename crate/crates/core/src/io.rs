//! Text formats: hypergraph edge lists, covariate CSV, sample lines,
//! parameter files and key-value reports.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::covariates::CovariateMatrix;
use crate::error::{Error, Result};
use crate::hypergraph::WeightedHypergraph;
use crate::model::{ModelParameters, SpinConfiguration};
use crate::optimizer::TrajectoryPoint;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parse `hypergraph n=<n> m=<m>` followed by `w v1 ... vk` lines.
/// Blank lines and text after `#` are ignored.
pub fn parse_hypergraph(text: &str) -> Result<WeightedHypergraph> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges: Vec<(Vec<usize>, f64)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        match header {
            None => {
                if tokens.next() != Some("hypergraph") {
                    return Err(parse_err(line_no, "expected header `hypergraph n=<n> m=<m>`"));
                }
                let (mut n, mut m) = (None, None);
                for tok in tokens {
                    let (key, value) = tok
                        .split_once('=')
                        .ok_or_else(|| parse_err(line_no, format!("malformed header field `{tok}`")))?;
                    let value: usize = value
                        .parse()
                        .map_err(|_| parse_err(line_no, format!("header value `{value}` is not an integer")))?;
                    match key {
                        "n" => n = Some(value),
                        "m" => m = Some(value),
                        _ => return Err(parse_err(line_no, format!("unknown header field `{key}`"))),
                    }
                }
                match (n, m) {
                    (Some(n), Some(m)) => header = Some((n, m)),
                    _ => return Err(parse_err(line_no, "header needs both n and m")),
                }
            }
            Some((n, m)) => {
                let w: f64 = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| parse_err(line_no, "edge line must start with a numeric weight"))?;
                let vertices = tokens
                    .map(|t| {
                        t.parse::<usize>()
                            .map_err(|_| parse_err(line_no, format!("vertex `{t}` is not a non-negative integer")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if vertices.len() < 2 || vertices.len() > m {
                    return Err(parse_err(
                        line_no,
                        format!("edge has {} vertices, allowed range is 2..={m}", vertices.len()),
                    ));
                }
                if let Some(&v) = vertices.iter().find(|&&v| v >= n) {
                    return Err(parse_err(line_no, format!("vertex {v} out of range for n = {n}")));
                }
                edges.push((vertices, w));
            }
        }
    }
    let (n, m) = header.ok_or_else(|| parse_err(0, "missing hypergraph header"))?;
    WeightedHypergraph::new(n, m, edges)
}

pub fn format_hypergraph(g: &WeightedHypergraph) -> String {
    let mut out = format!("hypergraph n={} m={}\n", g.n(), g.m());
    for e in g.edges() {
        let _ = write!(out, "{}", e.weight());
        for v in e.vertices() {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}

pub fn read_hypergraph(path: impl AsRef<Path>) -> Result<WeightedHypergraph> {
    parse_hypergraph(&fs::read_to_string(path)?)
}

pub fn write_hypergraph(path: impl AsRef<Path>, g: &WeightedHypergraph) -> Result<()> {
    fs::write(path, format_hypergraph(g))?;
    Ok(())
}

/// Read covariates from CSV. A first record that does not parse as numbers is
/// treated as a header. `expected_n` enforces the row count.
pub fn read_covariates_from<R: Read>(reader: R, expected_n: Option<usize>) -> Result<CovariateMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let record = record?;
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if idx == 0 => continue,
            Err(e) => return Err(parse_err(idx + 1, format!("non-numeric covariate: {e}"))),
        }
    }
    if let Some(n) = expected_n {
        if rows.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "covariate file has {} rows, hypergraph has n = {n}",
                rows.len()
            )));
        }
    }
    CovariateMatrix::from_rows(&rows)
}

pub fn read_covariates(path: impl AsRef<Path>, expected_n: Option<usize>) -> Result<CovariateMatrix> {
    read_covariates_from(fs::File::open(path)?, expected_n)
}

pub fn write_covariates(path: impl AsRef<Path>, x: &CovariateMatrix) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    wtr.write_record((0..x.d()).map(|k| format!("x{k}")))?;
    for i in 0..x.n() {
        wtr.write_record(x.row(i).iter().map(|v| v.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

/// One configuration per non-empty line. With `zero_one`, entries are `{0,1}`
/// and `0` maps to `−1`.
pub fn parse_samples(text: &str, zero_one: bool) -> Result<Vec<SpinConfiguration>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let values = line
            .split_whitespace()
            .map(|t| {
                let v: i64 = t
                    .trim_start_matches('+')
                    .parse()
                    .map_err(|_| parse_err(idx + 1, format!("spin `{t}` is not an integer")))?;
                Ok(match (zero_one, v) {
                    (true, 0) => -1,
                    (true, 1) => 1,
                    (true, other) => return Err(parse_err(idx + 1, format!("expected 0 or 1, found {other}"))),
                    (false, v) => v,
                })
            })
            .collect::<Result<Vec<i64>>>()?;
        out.push(SpinConfiguration::from_values(&values)?);
    }
    Ok(out)
}

pub fn format_sample(y: &SpinConfiguration) -> String {
    y.as_slice().iter().map(|s| if *s > 0 { "1" } else { "-1" }).collect::<Vec<_>>().join(" ")
}

/// Read the first configuration of a sample file and check its length.
pub fn read_sample(path: impl AsRef<Path>, zero_one: bool, expected_n: usize) -> Result<SpinConfiguration> {
    let samples = parse_samples(&fs::read_to_string(path)?, zero_one)?;
    let y = samples.into_iter().next().ok_or_else(|| parse_err(0, "sample file is empty"))?;
    if y.len() != expected_n {
        return Err(Error::DimensionMismatch(format!(
            "sample has {} spins, hypergraph has n = {expected_n}",
            y.len()
        )));
    }
    Ok(y)
}

pub fn write_samples(path: impl AsRef<Path>, samples: &[SpinConfiguration]) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    for y in samples {
        writeln!(f, "{}", format_sample(y))?;
    }
    f.flush()?;
    Ok(())
}

/// Parameters as key-value text: `theta = t1 t2 ...` and `beta = b`.
/// Commas are accepted as separators in the theta list.
pub fn parse_parameters(text: &str) -> Result<ModelParameters> {
    let kv = parse_key_values(text)?;
    let theta_raw = kv
        .iter()
        .find(|(k, _)| k == "theta")
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| parse_err(0, "missing `theta`"))?;
    let beta_raw = kv
        .iter()
        .find(|(k, _)| k == "beta")
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| parse_err(0, "missing `beta`"))?;
    let theta = parse_f64_list(theta_raw)?;
    let beta = beta_raw
        .trim()
        .parse()
        .map_err(|_| parse_err(0, format!("beta `{beta_raw}` is not a number")))?;
    ModelParameters::new(theta, beta)
}

pub fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| parse_err(0, format!("`{t}` is not a number"))))
        .collect()
}

pub fn format_parameters(p: &ModelParameters) -> String {
    let theta: Vec<String> = p.theta.iter().map(|t| t.to_string()).collect();
    format!("theta = {}\nbeta = {}\n", theta.join(" "), p.beta)
}

pub fn read_parameters(path: impl AsRef<Path>) -> Result<ModelParameters> {
    parse_parameters(&fs::read_to_string(path)?)
}

pub fn write_parameters(path: impl AsRef<Path>, p: &ModelParameters) -> Result<()> {
    fs::write(path, format_parameters(p))?;
    Ok(())
}

/// `key = value` lines; `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| parse_err(idx + 1, "expected `key = value`"))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn format_key_values<K: AsRef<str>, V: AsRef<str>>(pairs: &[(K, V)]) -> String {
    let mut out = String::new();
    for (k, v) in pairs {
        let _ = writeln!(out, "{} = {}", k.as_ref(), v.as_ref());
    }
    out
}

pub fn write_trajectory_csv(path: impl AsRef<Path>, trajectory: &[TrajectoryPoint]) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    for point in trajectory {
        wtr.serialize(point)?;
    }
    wtr.flush()?;
    Ok(())
}
