use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::Hypergraph;

/// Bin count for continuous columns when the schema gives none.
pub const DEFAULT_BINS: usize = 10;

const MISSING: [&str; 2] = ["?", ""];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnRole {
    Categorical,
    Continuous { bins: usize },
    Binary,
    Label,
    Ignore,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSpec {
    pub name: String,
    pub role: ColumnRole,
}

/// Per-column roles of a categorical table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoricalSchema {
    columns: Vec<ColumnSpec>,
    label: usize,
    /// Drop attributes with any missing value (`?` or empty) instead of
    /// failing.
    pub skip_missing: bool,
}

impl CategoricalSchema {
    pub fn new(columns: Vec<ColumnSpec>) -> Result<Self> {
        let labels: Vec<usize> = columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.role == ColumnRole::Label)
            .map(|(i, _)| i)
            .collect();
        let [label] = labels[..] else {
            return Err(Error::Schema(format!(
                "exactly one label column required, found {}",
                labels.len()
            )));
        };
        if let Some(c) = columns
            .iter()
            .find(|c| matches!(c.role, ColumnRole::Continuous { bins: 0 }))
        {
            return Err(Error::Schema(format!("column {} has zero bins", c.name)));
        }
        Ok(Self {
            columns,
            label,
            skip_missing: true,
        })
    }

    /// Parses one `name role [bins]` line per column; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut columns = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse {
                line: idx + 1,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let role = match (fields.get(1).copied(), fields.get(2)) {
                (Some("categorical"), None) => ColumnRole::Categorical,
                (Some("binary"), None) => ColumnRole::Binary,
                (Some("label"), None) => ColumnRole::Label,
                (Some("ignore"), None) => ColumnRole::Ignore,
                (Some("continuous"), bins) => ColumnRole::Continuous {
                    bins: bins
                        .map(|b| b.parse())
                        .transpose()
                        .map_err(|e| err(format!("bad bin count: {e}")))?
                        .unwrap_or(DEFAULT_BINS),
                },
                _ => return Err(err(format!("expected `name role [bins]`, got `{line}`"))),
            };
            if fields.len() > 3 {
                return Err(err(format!("trailing fields in `{line}`")));
            }
            columns.push(ColumnSpec {
                name: fields[0].to_string(),
                role,
            });
        }
        Self::new(columns)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn columns(&self) -> &[ColumnSpec] {
        &self.columns
    }

    pub fn label_column(&self) -> usize {
        self.label
    }
}

/// A hypergraph built from a table, with the row bookkeeping needed to
/// attach labels.
#[derive(Debug, Clone)]
pub struct CategoricalHypergraph<T> {
    pub hypergraph: Hypergraph<T>,
    /// Raw label of each node.
    pub labels: Vec<String>,
    /// Table row of each node.
    pub rows: Vec<usize>,
    /// `column=value` or `column[bin]` name of each hyperedge.
    pub edge_names: Vec<String>,
    /// Attributes dropped for containing missing values.
    pub skipped_columns: Vec<String>,
}

/// One hyperedge per categorical value, per non-empty continuous bin and per
/// binary column (true values), with unit weights. Hyperedges with fewer
/// than two members are dropped.
///
/// When `classes` is given, only rows with those labels become nodes. Bin
/// ranges are still taken over the full table, and pruning sees the subset.
pub fn from_categorical_table<T: Scalar>(
    rows: &[Vec<String>],
    schema: &CategoricalSchema,
    classes: Option<&[String]>,
) -> Result<CategoricalHypergraph<T>> {
    if rows.is_empty() {
        return Err(Error::Schema("table has no rows".into()));
    }
    let width = schema.columns.len();
    for (r, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::Schema(format!(
                "row {r} has {} fields, schema lists {width} columns",
                row.len()
            )));
        }
        if is_missing(&row[schema.label]) {
            return Err(Error::MissingLabel { row: r });
        }
    }

    let kept: Vec<usize> = (0..rows.len())
        .filter(|&r| classes.is_none_or(|c| c.iter().any(|l| *l == rows[r][schema.label].trim())))
        .collect();
    let mut node_of = vec![usize::MAX; rows.len()];
    for (node, &r) in kept.iter().enumerate() {
        node_of[r] = node;
    }

    let mut edges: Vec<Vec<usize>> = Vec::new();
    let mut edge_names = Vec::new();
    let mut skipped_columns = Vec::new();
    for (c, spec) in schema.columns.iter().enumerate() {
        if matches!(spec.role, ColumnRole::Label | ColumnRole::Ignore) {
            continue;
        }
        if rows.iter().any(|row| is_missing(&row[c])) {
            if schema.skip_missing {
                skipped_columns.push(spec.name.clone());
                continue;
            }
            return Err(Error::Schema(format!(
                "column {} has missing values",
                spec.name
            )));
        }
        // Group key per full-table row, in order of first appearance.
        let keys: Vec<String> = match spec.role {
            ColumnRole::Categorical => rows.iter().map(|row| row[c].trim().to_string()).collect(),
            ColumnRole::Continuous { bins } => {
                let values = rows
                    .iter()
                    .enumerate()
                    .map(|(r, row)| {
                        row[c].trim().parse::<f64>().map_err(|e| {
                            Error::Schema(format!("row {r}, column {}: {e}", spec.name))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                bin_indices(&values, bins)
                    .into_iter()
                    .map(|b| format!("[{b}]"))
                    .collect()
            }
            ColumnRole::Binary => rows
                .iter()
                .enumerate()
                .map(|(r, row)| {
                    parse_bool(&row[c])
                        .map(|b| if b { "true" } else { "" }.to_string())
                        .ok_or_else(|| {
                            Error::Schema(format!(
                                "row {r}, column {}: `{}` is not a boolean",
                                spec.name, row[c]
                            ))
                        })
                })
                .collect::<Result<_>>()?,
            ColumnRole::Label | ColumnRole::Ignore => unreachable!(),
        };

        let mut slot: HashMap<&str, usize> = HashMap::new();
        let mut groups: Vec<(String, Vec<usize>)> = Vec::new();
        for (r, key) in keys.iter().enumerate() {
            if key.is_empty() {
                continue;
            }
            let g = *slot.entry(key.as_str()).or_insert_with(|| {
                groups.push((key.clone(), Vec::new()));
                groups.len() - 1
            });
            if node_of[r] != usize::MAX {
                groups[g].1.push(node_of[r]);
            }
        }
        for (key, members) in groups {
            if members.len() >= 2 {
                edge_names.push(match spec.role {
                    ColumnRole::Categorical => format!("{}={key}", spec.name),
                    ColumnRole::Binary => spec.name.clone(),
                    _ => format!("{}{key}", spec.name),
                });
                edges.push(members);
            }
        }
    }

    let hypergraph = Hypergraph::unweighted(kept.len(), edges)?;
    Ok(CategoricalHypergraph {
        hypergraph,
        labels: kept
            .iter()
            .map(|&r| rows[r][schema.label].trim().to_string())
            .collect(),
        rows: kept,
        edge_names,
        skipped_columns,
    })
}

fn is_missing(value: &str) -> bool {
    MISSING.contains(&value.trim())
}

fn parse_bool(value: &str) -> Option<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "t" | "yes" | "y" => Some(true),
        "0" | "false" | "f" | "no" | "n" => Some(false),
        _ => None,
    }
}

/// Equal-width bins over `[min, max]`; the maximum falls in the last bin.
fn bin_indices(values: &[f64], bins: usize) -> Vec<usize> {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let width = (hi - lo) / bins as f64;
    values
        .iter()
        .map(|&v| {
            if width > 0.0 {
                (((v - lo) / width).floor() as usize).min(bins - 1)
            } else {
                0
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[&[&str]]) -> Vec<Vec<String>> {
        rows.iter()
            .map(|r| r.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    fn schema(text: &str) -> CategoricalSchema {
        CategoricalSchema::parse(text).unwrap()
    }

    #[test]
    fn one_hyperedge_per_value() {
        let rows = table(&[&["a", "0"], &["a", "0"], &["b", "1"], &["b", "1"]]);
        let s = schema("color categorical\nclass label\n");
        let out = from_categorical_table::<f64>(&rows, &s, None).unwrap();
        assert_eq!(out.hypergraph.edges(), &[vec![0, 1], vec![2, 3]]);
        assert_eq!(out.edge_names, vec!["color=a", "color=b"]);
        assert_eq!(out.labels, vec!["0", "0", "1", "1"]);
    }

    #[test]
    fn continuous_bins_close_on_the_right() {
        let rows = table(&[&["0", "x"], &["0.05", "x"], &["0.95", "y"], &["1.0", "y"]]);
        let s = schema("v continuous 10\nclass label\n");
        let out = from_categorical_table::<f64>(&rows, &s, None).unwrap();
        assert_eq!(out.hypergraph.edges(), &[vec![0, 1], vec![2, 3]]);
        assert_eq!(out.edge_names, vec!["v[0]", "v[9]"]);
        assert_eq!(
            bin_indices(&[0.0, 0.05, 0.1, 0.95, 1.0], 10),
            vec![0, 0, 1, 9, 9]
        );
        assert_eq!(bin_indices(&[2.0, 2.0], 10), vec![0, 0]);
    }

    #[test]
    fn binary_columns_only_index_true_values() {
        let rows = table(&[
            &["1", "a", "c"],
            &["1", "a", "c"],
            &["0", "b", "c"],
            &["0", "b", "c"],
        ]);
        let s = schema("flag binary\nk categorical\nclass label\n");
        let out = from_categorical_table::<f64>(&rows, &s, None).unwrap();
        assert_eq!(out.hypergraph.edge_count(), 3);
        assert_eq!(out.edge_names[0], "flag");
        assert_eq!(out.hypergraph.edges()[0], vec![0, 1]);
    }

    #[test]
    fn singletons_pruned_and_missing_columns_skipped() {
        let rows = table(&[
            &["a", "?", "p", "0"],
            &["a", "u", "q", "0"],
            &["b", "u", "q", "1"],
            &["b", "v", "r", "1"],
        ]);
        let s = schema("c1 categorical\nc2 categorical\nc3 categorical\nclass label\n");
        let out = from_categorical_table::<f64>(&rows, &s, None).unwrap();
        assert_eq!(out.skipped_columns, vec!["c2"]);
        assert_eq!(out.edge_names, vec!["c1=a", "c1=b", "c3=q"]);

        let mut strict = s.clone();
        strict.skip_missing = false;
        assert!(from_categorical_table::<f64>(&rows, &strict, None).is_err());
    }

    #[test]
    fn class_subset_prunes_after_filtering_but_bins_on_full_range() {
        let rows = table(&[
            &["0", "a", "4"],
            &["1", "a", "4"],
            &["5", "b", "5"],
            &["9", "b", "5"],
            &["10", "a", "6"],
        ]);
        let s = schema("v continuous 2\nk categorical\nclass label\n");
        let keep = vec!["4".to_string(), "5".to_string()];
        let out = from_categorical_table::<f64>(&rows, &s, Some(&keep)).unwrap();
        assert_eq!(out.rows, vec![0, 1, 2, 3]);
        // Range [0, 10] in two bins: {0, 1} | {5, 9, 10}; row 4 is filtered.
        assert_eq!(out.edge_names, vec!["v[0]", "v[1]", "k=a", "k=b"]);
        assert_eq!(out.hypergraph.edges()[1], vec![2, 3]);
    }

    #[test]
    fn errors() {
        let rows = table(&[&["a", "0"], &["a", ""]]);
        let s = schema("c categorical\nclass label\n");
        assert!(matches!(
            from_categorical_table::<f64>(&rows, &s, None),
            Err(Error::MissingLabel { row: 1 })
        ));
        let rows = table(&[&["a", "0"], &["b", "1"]]);
        assert!(matches!(
            from_categorical_table::<f64>(&rows, &s, None),
            Err(Error::EmptyHypergraph)
        ));
        let rows = table(&[&["a", "0"], &["a", "0"], &["b", "1"]]);
        assert!(matches!(
            from_categorical_table::<f64>(&rows, &s, None),
            Err(Error::IsolatedNode { node: 2 })
        ));
        assert!(CategoricalSchema::parse("a categorical\n").is_err());
        assert!(CategoricalSchema::parse("a label\nb label\n").is_err());
        assert!(matches!(
            CategoricalSchema::parse("a label\nb frobnicate\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert_eq!(
            CategoricalSchema::parse("# comment\na continuous\nb label\n")
                .unwrap()
                .columns()[0]
                .role,
            ColumnRole::Continuous { bins: DEFAULT_BINS }
        );
    }
}
