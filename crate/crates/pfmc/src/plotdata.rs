//! Reshape result rows into tidy (x, y, yerr, series) tables for external
//! plotting.

use std::collections::BTreeSet;

use crate::config::PlotSpec;
use crate::runner::Row;

fn key_of(row: &Row, key: &str) -> Option<String> {
    if key == "observable" {
        return Some(row.observable.clone());
    }
    row.params
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.clone())
}

/// Render the tidy CSV. Rows missing the x key are skipped; an empty result
/// yields the header only. Unknown filter/series values produce an error
/// listing what is available.
pub fn render_plot_data(rows: &[Row], spec: &PlotSpec) -> anyhow::Result<String> {
    let mut filtered: Vec<&Row> = Vec::new();
    'rows: for row in rows {
        for (k, want) in &spec.filter {
            match key_of(row, k) {
                Some(v) if &v == want => {}
                _ => continue 'rows,
            }
        }
        filtered.push(row);
    }
    if !rows.is_empty() && filtered.is_empty() && !spec.filter.is_empty() {
        let available: BTreeSet<String> = rows.iter().map(|r| r.observable.clone()).collect();
        anyhow::bail!(
            "no rows match the filter; available observables: {}",
            available.into_iter().collect::<Vec<_>>().join(", ")
        );
    }
    let mut table: Vec<(String, f64, f64, String)> = Vec::new();
    for row in &filtered {
        let Some(x) = key_of(row, &spec.x) else {
            continue;
        };
        let series = key_of(row, &spec.series).unwrap_or_else(|| row.observable.clone());
        table.push((x, row.value.re, row.std_error, series));
    }
    if !filtered.is_empty() && table.is_empty() {
        let mut keys: BTreeSet<String> = BTreeSet::new();
        for row in &filtered {
            keys.insert("observable".into());
            for (k, _) in &row.params {
                keys.insert(k.clone());
            }
        }
        anyhow::bail!(
            "x key {:?} not found; available keys: {}",
            spec.x,
            keys.into_iter().collect::<Vec<_>>().join(", ")
        );
    }
    // stable order: series, then numeric x when possible, then input order
    table.sort_by(|a, b| {
        a.3.cmp(&b.3).then_with(|| {
            match (a.0.parse::<f64>(), b.0.parse::<f64>()) {
                (Ok(x), Ok(y)) => x.partial_cmp(&y).unwrap_or(std::cmp::Ordering::Equal),
                _ => a.0.cmp(&b.0),
            }
        })
    });
    let mut out = String::from("x,y,yerr,series\n");
    for (x, y, yerr, series) in table {
        out.push_str(&format!("{x},{y},{yerr},{series}\n"));
    }
    Ok(out)
}
