//! Result emission: CSV tables plus a JSON metadata sidecar.
//!
//! The CSV header records the seed and library version; rows are written in
//! dispatch order with shortest-roundtrip float formatting, so repeated runs
//! with the same config and seed produce byte-identical files up to the
//! trailing wall_ms column.

use std::io::Write;
use std::path::Path;

use crate::config::ExperimentConfig;
use crate::runner::{Row, RunResult};

pub const CSV_COLUMNS: &str =
    "observable,params,value_re,value_im,std_error,samples,bound,epsilon,delta,method,bias,wall_ms";

pub fn params_string(params: &[(String, String)]) -> String {
    params
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn render_csv(cfg: &ExperimentConfig, result: &RunResult) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# pfmc {} kind={} seed={}\n",
        env!("CARGO_PKG_VERSION"),
        cfg.kind,
        cfg.seed
    ));
    out.push_str(CSV_COLUMNS);
    out.push('\n');
    for row in &result.rows {
        out.push_str(&render_row(row));
        out.push('\n');
    }
    out
}

pub fn render_row(row: &Row) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{:.3}",
        row.observable,
        params_string(&row.params),
        row.value.re,
        row.value.im,
        row.std_error,
        row.samples,
        row.bound,
        row.epsilon,
        row.delta,
        row.method,
        row.bias,
        row.wall_ms
    )
}

/// Write `<stem>.csv` and `<stem>.meta.json` under `dir`.
pub fn write_result(
    dir: &Path,
    stem: &str,
    cfg: &ExperimentConfig,
    result: &RunResult,
) -> anyhow::Result<(std::path::PathBuf, std::path::PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let meta_path = dir.join(format!("{stem}.meta.json"));
    let mut f = std::fs::File::create(&csv_path)?;
    f.write_all(render_csv(cfg, result).as_bytes())?;
    let mut f = std::fs::File::create(&meta_path)?;
    f.write_all(serde_json::to_string_pretty(&result.metadata)?.as_bytes())?;
    f.write_all(b"\n")?;
    Ok((csv_path, meta_path))
}

/// Parse a result CSV back into rows (used by `plotdata`).
pub fn parse_csv(text: &str) -> anyhow::Result<Vec<Row>> {
    let mut rows = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') || line.is_empty() || line.starts_with("observable,") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 12 {
            anyhow::bail!(
                "malformed result row ({} fields, expected 12): {line}",
                fields.len()
            );
        }
        let params = if fields[1].is_empty() {
            Vec::new()
        } else {
            fields[1]
                .split(';')
                .map(|kv| match kv.split_once('=') {
                    Some((k, v)) => Ok((k.to_string(), v.to_string())),
                    None => anyhow::bail!("malformed parameter {kv:?}"),
                })
                .collect::<anyhow::Result<Vec<_>>>()?
        };
        rows.push(Row {
            observable: fields[0].to_string(),
            params,
            value: num_complex::Complex64::new(fields[2].parse()?, fields[3].parse()?),
            std_error: fields[4].parse()?,
            samples: fields[5].parse()?,
            bound: fields[6].parse()?,
            epsilon: fields[7].parse()?,
            delta: fields[8].parse()?,
            method: fields[9].to_string(),
            bias: fields[10].parse()?,
            wall_ms: fields[11].parse()?,
        });
    }
    Ok(rows)
}
