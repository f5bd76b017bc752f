use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{median, ColumnKind, ColumnSchema, RegressionDataset, TabularDataset, Task};
use crate::{Error, Result, FORMAT_VERSION};

/// Category assigned to empty cells in categorical columns.
pub const MISSING_CATEGORY: &str = "<missing>";

struct RawTable {
    headers: Vec<String>,
    cells: Vec<Vec<String>>,
}

fn read_raw(path: &Path) -> Result<RawTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let headers = reader
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut cells = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        cells.push(record.iter().map(|c| c.trim().to_string()).collect());
    }
    Ok(RawTable { headers, cells })
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into())
}

/// Encode every non-label column. Columns whose non-empty cells all parse as
/// numbers are numeric (missing -> column median); the rest are categorical
/// with sorted ordinal codes (missing -> [`MISSING_CATEGORY`]).
fn encode_features(raw: &RawTable, label_idx: usize) -> Result<(Vec<ColumnSchema>, Array2<f64>)> {
    let n = raw.cells.len();
    let feature_cols: Vec<usize> = (0..raw.headers.len()).filter(|&j| j != label_idx).collect();
    let mut schema = Vec::with_capacity(feature_cols.len());
    let mut matrix = Array2::<f64>::zeros((n, feature_cols.len()));

    for (out_j, &j) in feature_cols.iter().enumerate() {
        let name = raw.headers[j].clone();
        let column: Vec<&str> = raw.cells.iter().map(|r| r[j].as_str()).collect();
        let parsed: Vec<Option<f64>> = column
            .iter()
            .map(|c| {
                if c.is_empty() {
                    None
                } else {
                    c.parse::<f64>().ok()
                }
            })
            .collect();
        let numeric = column
            .iter()
            .zip(&parsed)
            .all(|(c, p)| c.is_empty() || p.is_some_and(f64::is_finite));

        if numeric {
            let present: Vec<f64> = parsed.iter().flatten().copied().collect();
            if present.is_empty() {
                let row = column.iter().position(|c| c.is_empty()).unwrap_or(0);
                return Err(Error::Unparseable {
                    row,
                    column: name,
                    value: String::new(),
                });
            }
            let fill = median(&present);
            for (i, p) in parsed.iter().enumerate() {
                matrix[[i, out_j]] = p.unwrap_or(fill);
            }
            schema.push(ColumnSchema::numeric(name));
        } else {
            let categories: Vec<String> = column
                .iter()
                .map(|c| if c.is_empty() { MISSING_CATEGORY } else { c })
                .collect::<BTreeSet<_>>()
                .into_iter()
                .map(str::to_string)
                .collect();
            let col = ColumnSchema {
                name,
                kind: ColumnKind::Categorical,
                categories,
            };
            for (i, c) in column.iter().enumerate() {
                let v = if c.is_empty() { MISSING_CATEGORY } else { c };
                matrix[[i, out_j]] = col.encode(v).expect("category collected above") as f64;
            }
            schema.push(col);
        }
    }
    Ok((schema, matrix))
}

fn label_index(raw: &RawTable, label_column: &str) -> Result<usize> {
    raw.headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::MissingLabelColumn(label_column.to_string()))
}

fn check_label_cells(raw: &RawTable, label_idx: usize) -> Result<()> {
    if let Some(row) = raw.cells.iter().position(|r| r[label_idx].is_empty()) {
        return Err(Error::Unparseable {
            row,
            column: raw.headers[label_idx].clone(),
            value: String::new(),
        });
    }
    Ok(())
}

/// Load a classification CSV. Class ids follow the lexicographic order of
/// the original label strings.
pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<TabularDataset> {
    let path = path.as_ref();
    let raw = read_raw(path)?;
    let label_idx = label_index(&raw, label_column)?;
    check_label_cells(&raw, label_idx)?;
    let classes: Vec<String> = raw
        .cells
        .iter()
        .map(|r| r[label_idx].clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if classes.len() < 2 {
        return Err(Error::SingleClass);
    }
    let labels = raw
        .cells
        .iter()
        .map(|r| {
            classes
                .binary_search(&r[label_idx])
                .expect("collected above")
        })
        .collect();
    let (mut schema, matrix) = encode_features(&raw, label_idx)?;
    let task = if classes.len() == 2 {
        Task::Binary
    } else {
        Task::Multiclass
    };
    schema.insert(
        label_idx,
        ColumnSchema {
            name: label_column.to_string(),
            kind: ColumnKind::Label,
            categories: classes,
        },
    );
    TabularDataset::new(stem(path), schema, matrix, labels, task)
}

/// Load a CSV with a continuous target, for median binarisation.
pub fn load_regression_csv(
    path: impl AsRef<Path>,
    label_column: &str,
) -> Result<RegressionDataset> {
    let path = path.as_ref();
    let raw = read_raw(path)?;
    let label_idx = label_index(&raw, label_column)?;
    check_label_cells(&raw, label_idx)?;
    let targets = raw
        .cells
        .iter()
        .enumerate()
        .map(|(row, r)| {
            r[label_idx]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Unparseable {
                    row,
                    column: label_column.to_string(),
                    value: r[label_idx].clone(),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let (mut schema, rows) = encode_features(&raw, label_idx)?;
    schema.insert(
        label_idx,
        ColumnSchema {
            name: label_column.to_string(),
            kind: ColumnKind::Label,
            categories: Vec::new(),
        },
    );
    Ok(RegressionDataset {
        name: stem(path),
        schema,
        rows,
        targets,
    })
}

#[derive(Serialize, Deserialize)]
struct SchemaSidecar {
    format_version: u32,
    name: String,
    task: Task,
    n_rows: usize,
    columns: Vec<ColumnSchema>,
}

/// Write `<dir>/<name>.csv` (encoded features plus label id, in schema
/// order) and `<dir>/<name>.schema.json`.
pub fn save_canonical(dataset: &TabularDataset, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv_path = dir.join(format!("{}.csv", dataset.name));
    let mut out = String::new();
    let header: Vec<&str> = dataset.schema.iter().map(|c| c.name.as_str()).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for (i, row) in dataset.rows.outer_iter().enumerate() {
        let mut features = row.iter();
        let cells: Vec<String> = dataset
            .schema
            .iter()
            .map(|c| match c.kind {
                ColumnKind::Label => dataset.labels[i].to_string(),
                _ => features.next().expect("schema matches rows").to_string(),
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    fs::write(&csv_path, out).map_err(|e| Error::io(&csv_path, e))?;

    let sidecar = SchemaSidecar {
        format_version: FORMAT_VERSION,
        name: dataset.name.clone(),
        task: dataset.task,
        n_rows: dataset.n_rows(),
        columns: dataset.schema.clone(),
    };
    let schema_path = dir.join(format!("{}.schema.json", dataset.name));
    let json = serde_json::to_string_pretty(&sidecar)?;
    fs::write(&schema_path, json + "\n").map_err(|e| Error::io(&schema_path, e))
}

/// Read a dataset written by [`save_canonical`].
pub fn load_canonical(dir: impl AsRef<Path>, name: &str) -> Result<TabularDataset> {
    let dir = dir.as_ref();
    let schema_path = dir.join(format!("{name}.schema.json"));
    let text = fs::read_to_string(&schema_path).map_err(|e| Error::io(&schema_path, e))?;
    let sidecar: SchemaSidecar = serde_json::from_str(&text)?;
    if sidecar.format_version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "schema version {} unsupported",
            sidecar.format_version
        )));
    }
    let csv_path = dir.join(format!("{name}.csv"));
    let raw = read_raw(&csv_path)?;
    let names: Vec<&str> = sidecar.columns.iter().map(|c| c.name.as_str()).collect();
    if raw.headers != names {
        return Err(Error::Format(format!(
            "{} header does not match schema",
            csv_path.display()
        )));
    }
    let d = sidecar.columns.len() - 1;
    let mut rows = Array2::zeros((raw.cells.len(), d));
    let mut labels = Vec::with_capacity(raw.cells.len());
    for (i, record) in raw.cells.iter().enumerate() {
        let mut j = 0;
        for (col, cell) in sidecar.columns.iter().zip(record) {
            let bad = || Error::Unparseable {
                row: i,
                column: col.name.clone(),
                value: cell.clone(),
            };
            if col.kind == ColumnKind::Label {
                labels.push(cell.parse::<usize>().map_err(|_| bad())?);
            } else {
                rows[[i, j]] = cell.parse::<f64>().map_err(|_| bad())?;
                j += 1;
            }
        }
    }
    if labels.len() != sidecar.n_rows {
        return Err(Error::Format(format!(
            "{} has {} rows, schema records {}",
            csv_path.display(),
            labels.len(),
            sidecar.n_rows
        )));
    }
    TabularDataset::new(sidecar.name, sidecar.columns, rows, labels, sidecar.task)
}
