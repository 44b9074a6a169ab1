use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use ndarray::Array2;

use super::{remap_labels, Dataset, Source};
use crate::error::{Error, Result};
use crate::graph::{GaussianCloud, SparseGraph};
use crate::hypergraph::{from_categorical_table, CategoricalHypergraph, CategoricalSchema};
use crate::scalar::{cast, Scalar};

/// Reads a `x y z label` point cloud file (`#` lines ignored) into a
/// Gaussian-kernel dataset with the coordinates as features.
pub fn load_point_cloud<T: Scalar>(path: impl AsRef<Path>, sigma: T) -> Result<Dataset<T>> {
    parse_point_cloud(BufReader::new(File::open(path)?), sigma)
}

pub fn parse_point_cloud<T: Scalar, R: BufRead>(reader: R, sigma: T) -> Result<Dataset<T>> {
    let mut coords = Vec::new();
    let mut raw_labels = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: idx + 1,
            message,
        };
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(err(format!(
                "expected `x y z label`, found {} fields",
                fields.len()
            )));
        }
        for f in &fields[..3] {
            let v: f64 = f
                .parse()
                .map_err(|e| err(format!("bad coordinate `{f}`: {e}")))?;
            coords.push(cast::<T>(v));
        }
        let label: u64 = fields[3]
            .parse()
            .map_err(|e| err(format!("bad label `{}`: {e}", fields[3])))?;
        raw_labels.push(label.to_string());
    }
    let n = raw_labels.len();
    if n < 2 {
        return Err(Error::InvalidCloud(format!(
            "{n} point(s), at least 2 required"
        )));
    }
    let points = Array2::from_shape_vec((n, 3), coords).expect("three coordinates per point");
    let (labels, class_names) = remap_labels(&raw_labels);
    let cloud = GaussianCloud::new(points.clone(), sigma)?;
    Dataset::new(Source::PointCloud(cloud), points, labels, class_names)
}

/// Writes a point-cloud dataset back in the `x y z label` format, using the
/// original label values.
pub fn write_point_cloud<T: Scalar, W: Write>(dataset: &Dataset<T>, mut w: W) -> Result<()> {
    let Source::PointCloud(cloud) = &dataset.source else {
        return Err(Error::InvalidArgument(
            "dataset is not a point cloud".into(),
        ));
    };
    for (row, &label) in cloud.points().rows().into_iter().zip(&dataset.labels) {
        let [x, y, z] = [row[0], row[1], row[2]].map(|v| v.to_f64().unwrap_or(f64::NAN));
        writeln!(w, "{x:?} {y:?} {z:?} {}", dataset.class_names[label])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an `i j w` edge list (0-based, each undirected edge once) with
/// optional per-node integer labels, one per line. Features are one-hot
/// node indicators.
pub fn load_edge_list<T: Scalar>(
    path: impl AsRef<Path>,
    labels_path: Option<&Path>,
) -> Result<Dataset<T>> {
    let mut edges = Vec::new();
    let mut n = 0;
    for (idx, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: idx + 1,
            message,
        };
        let fields: Vec<&str> = text.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(err("expected `i j [w]`".into()));
        }
        let i: usize = fields[0]
            .parse()
            .map_err(|e| err(format!("bad node index: {e}")))?;
        let j: usize = fields[1]
            .parse()
            .map_err(|e| err(format!("bad node index: {e}")))?;
        let w: f64 = match fields.get(2) {
            Some(f) => f.parse().map_err(|e| err(format!("bad weight: {e}")))?,
            None => 1.0,
        };
        n = n.max(i + 1).max(j + 1);
        edges.push((i, j, cast::<T>(w)));
    }

    let raw_labels: Vec<String> = match labels_path {
        Some(p) => {
            let mut out = Vec::new();
            for (idx, line) in BufReader::new(File::open(p)?).lines().enumerate() {
                let line = line?;
                let text = line.trim();
                if text.is_empty() || text.starts_with('#') {
                    continue;
                }
                let label: u64 = text.parse().map_err(|e| Error::Parse {
                    line: idx + 1,
                    message: format!("bad label: {e}"),
                })?;
                out.push(label.to_string());
            }
            n = n.max(out.len());
            if out.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "edge list labels",
                    expected: n,
                    found: out.len(),
                });
            }
            out
        }
        None => vec!["0".to_string(); n],
    };
    let graph = SparseGraph::from_edges(n, &edges)?;
    let (labels, class_names) = remap_labels(&raw_labels);
    Dataset::new(
        Source::SparseGraph(graph),
        Array2::eye(n),
        labels,
        class_names,
    )
}

/// Delimited-text options for [`load_categorical`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub has_header: bool,
    /// Keep only rows with these labels.
    pub classes: Option<Vec<String>>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            has_header: true,
            classes: None,
        }
    }
}

/// Builds a hypergraph dataset from a delimited table and a schema file.
/// Features are the 0/1 incidence matrix.
pub fn load_categorical<T: Scalar>(
    path: impl AsRef<Path>,
    schema_path: impl AsRef<Path>,
    options: &CsvOptions,
) -> Result<(Dataset<T>, CategoricalHypergraph<T>)> {
    let schema = CategoricalSchema::load(schema_path)?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(options.has_header)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_error)?;
    if options.has_header {
        let header = reader.headers().map_err(csv_error)?;
        if header.len() != schema.columns().len() {
            return Err(Error::Schema(format!(
                "header has {} columns, schema lists {}",
                header.len(),
                schema.columns().len()
            )));
        }
    }
    let rows = reader
        .records()
        .map(|r| r.map(|rec| rec.iter().map(str::to_string).collect::<Vec<_>>()))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(csv_error)?;

    let built = from_categorical_table::<T>(&rows, &schema, options.classes.as_deref())?;
    let (labels, class_names) = remap_labels(&built.labels);
    let features = built.hypergraph.incidence_dense();
    let dataset = Dataset::new(
        Source::Hypergraph(built.hypergraph.clone()),
        features,
        labels,
        class_names,
    )?;
    Ok((dataset, built))
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            line,
            message: format!("{other:?}"),
        },
    }
}
