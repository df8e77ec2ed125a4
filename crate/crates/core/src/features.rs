//! Feature matrix assembly, standardization and multicollinearity reduction
//! via iterative variance-inflation-factor elimination.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::linalg::lstsq_qr_rankdef;
use crate::semantic::SemanticFeatures;
use crate::temporal::TemporalFeatures;

/// The canonical 19 feature columns: seven temporal followed by twelve
/// semantic. Lexical diversity carries the vocabulary information, so the
/// raw unique-word count is reported but not a matrix column.
pub const FEATURE_NAMES: [&str; 19] = [
    "periodicity",
    "loglik",
    "sumsq_ar",
    "error_var",
    "fit_length",
    "n_local_maxima",
    "secondary_power_ratio",
    "lexical_diversity",
    "mean_words",
    "var_words",
    "hashtag_freq",
    "rho1",
    "rho2",
    "rho3",
    "rho4",
    "rho5",
    "sent_afinn_slot",
    "sent_bing_slot",
    "sent_nrc_slot",
];

/// Per-column standardization statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub mean: f64,
    /// Population standard deviation; 0 marks a constant column.
    pub sd: f64,
}

impl ColumnStats {
    pub fn is_constant(&self) -> bool {
        self.sd == 0.0
    }
}

/// A users-by-features matrix with optional labels and standardization
/// statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub user_ids: Vec<String>,
    pub feature_names: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub labels: Vec<Option<Label>>,
    /// Set once [`standardize`] has been applied; carries the statistics
    /// needed to transform calibration and test rows consistently.
    pub standardization: Option<Vec<ColumnStats>>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.values.len()
    }

    pub fn n_cols(&self) -> usize {
        self.feature_names.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[j]).collect()
    }

    /// Row indices whose user id is in `ids`.
    pub fn rows_in(&self, ids: &std::collections::BTreeSet<String>) -> Vec<usize> {
        self.user_ids
            .iter()
            .enumerate()
            .filter(|(_, id)| ids.contains(*id))
            .map(|(i, _)| i)
            .collect()
    }

    /// New matrix restricted to the given row indices.
    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            user_ids: rows.iter().map(|&i| self.user_ids[i].clone()).collect(),
            feature_names: self.feature_names.clone(),
            values: rows.iter().map(|&i| self.values[i].clone()).collect(),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            standardization: self.standardization.clone(),
        }
    }

    /// New matrix restricted to the named columns, in the given order.
    pub fn select_columns(&self, names: &[String]) -> Result<FeatureMatrix> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.feature_names
                    .iter()
                    .position(|f| f == n)
                    .ok_or_else(|| Error::FeatureNameMismatch(format!("unknown feature '{n}'")))
            })
            .collect::<Result<_>>()?;
        Ok(FeatureMatrix {
            user_ids: self.user_ids.clone(),
            feature_names: names.to_vec(),
            values: self
                .values
                .iter()
                .map(|row| idx.iter().map(|&j| row[j]).collect())
                .collect(),
            labels: self.labels.clone(),
            standardization: self
                .standardization
                .as_ref()
                .map(|s| idx.iter().map(|&j| s[j]).collect()),
        })
    }

    /// New matrix without column `j`.
    pub fn drop_column(&self, j: usize) -> FeatureMatrix {
        let names: Vec<String> = self
            .feature_names
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != j)
            .map(|(_, n)| n.clone())
            .collect();
        self.select_columns(&names).expect("names come from self")
    }

    /// Labels as a dense vector; errors if any row is unlabeled.
    pub fn labels_required(&self) -> Result<Vec<Label>> {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, l)| {
                l.ok_or_else(|| {
                    Error::InvalidParameter(format!("row {i} ({}) is unlabeled", self.user_ids[i]))
                })
            })
            .collect()
    }
}

/// Assemble the canonical 19-column matrix from per-user temporal and
/// semantic features. Both maps must cover exactly the same users.
pub fn assemble_matrix(
    temporal: &BTreeMap<String, TemporalFeatures>,
    semantic: &BTreeMap<String, SemanticFeatures>,
    labels: &BTreeMap<String, Option<Label>>,
) -> Result<FeatureMatrix> {
    let only_t: Vec<&String> = temporal.keys().filter(|k| !semantic.contains_key(*k)).collect();
    let only_s: Vec<&String> = semantic.keys().filter(|k| !temporal.contains_key(*k)).collect();
    if !only_t.is_empty() || !only_s.is_empty() {
        return Err(Error::UserSetMismatch(format!(
            "temporal-only {only_t:?}, semantic-only {only_s:?}"
        )));
    }
    let mut user_ids = Vec::with_capacity(temporal.len());
    let mut values = Vec::with_capacity(temporal.len());
    let mut row_labels = Vec::with_capacity(temporal.len());
    for (id, t) in temporal {
        let s = &semantic[id];
        let row = vec![
            t.periodicity,
            t.loglik,
            t.sumsq_ar,
            t.error_var,
            t.fit_length as f64,
            t.n_local_maxima as f64,
            t.secondary_power_ratio,
            s.lexical_diversity,
            s.mean_words,
            s.var_words,
            s.hashtag_freq,
            s.rho[0],
            s.rho[1],
            s.rho[2],
            s.rho[3],
            s.rho[4],
            s.sentiment[0],
            s.sentiment[1],
            s.sentiment[2],
        ];
        debug_assert_eq!(row.len(), FEATURE_NAMES.len());
        user_ids.push(id.clone());
        values.push(row);
        row_labels.push(labels.get(id).copied().flatten());
    }
    Ok(FeatureMatrix {
        user_ids,
        feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        values,
        labels: row_labels,
        standardization: None,
    })
}

/// Population mean/sd statistics of each column over the given rows.
pub fn column_stats(matrix: &FeatureMatrix, rows: &[usize]) -> Vec<ColumnStats> {
    let n = rows.len() as f64;
    (0..matrix.n_cols())
        .map(|j| {
            let mean = rows.iter().map(|&i| matrix.values[i][j]).sum::<f64>() / n;
            let var = rows
                .iter()
                .map(|&i| {
                    let d = matrix.values[i][j] - mean;
                    d * d
                })
                .sum::<f64>()
                / n;
            ColumnStats {
                mean,
                sd: var.sqrt(),
            }
        })
        .collect()
}

/// Standardize every column to mean 0 / sd 1 using statistics estimated on
/// `stat_rows` (the training split). Constant columns map to all zeros and
/// keep sd 0 as the flag. The statistics are stored on the result for reuse.
pub fn standardize(matrix: &FeatureMatrix, stat_rows: &[usize]) -> Result<FeatureMatrix> {
    if stat_rows.len() < 2 {
        return Err(Error::TooFewRows {
            need: 2,
            got: stat_rows.len(),
        });
    }
    let stats = column_stats(matrix, stat_rows);
    let mut out = matrix.clone();
    apply_standardization(&mut out, &stats);
    Ok(out)
}

/// Apply existing standardization statistics to a matrix in place.
pub fn apply_standardization(matrix: &mut FeatureMatrix, stats: &[ColumnStats]) {
    for row in &mut matrix.values {
        for (v, s) in row.iter_mut().zip(stats) {
            *v = if s.is_constant() { 0.0 } else { (*v - s.mean) / s.sd };
        }
    }
    matrix.standardization = Some(stats.to_vec());
}

/// Variance inflation factors: `VIF_j = 1 / (1 - R^2_j)` from regressing
/// column j on all other columns plus an intercept. Exact collinearity is
/// reported as `f64::INFINITY`.
pub fn vif(matrix: &FeatureMatrix) -> Result<BTreeMap<String, f64>> {
    vif_on_rows(matrix, &(0..matrix.n_rows()).collect::<Vec<_>>())
}

/// [`vif`] restricted to a subset of rows.
pub fn vif_on_rows(matrix: &FeatureMatrix, rows: &[usize]) -> Result<BTreeMap<String, f64>> {
    let d = matrix.n_cols();
    let n = rows.len();
    if n <= d {
        return Err(Error::NotEnoughRows { rows: n, cols: d });
    }
    let vals = crate::parallel::map_range(d, |j| {
        // regress column j on the others plus intercept
        let cols = d; // intercept + d-1 others
        let mut design = Vec::with_capacity(n * cols);
        let mut y = Vec::with_capacity(n);
        for &i in rows {
            design.push(1.0);
            for k in 0..d {
                if k != j {
                    design.push(matrix.values[i][k]);
                }
            }
            y.push(matrix.values[i][j]);
        }
        let mean_y = y.iter().sum::<f64>() / n as f64;
        let tss: f64 = y.iter().map(|v| (v - mean_y) * (v - mean_y)).sum();
        if tss <= 0.0 {
            // constant column: undefined, flagged as 1 (no inflation)
            return 1.0;
        }
        let beta = lstsq_qr_rankdef(&design, &y, n, cols);
        let mut rss = 0.0;
        for (r, &i) in rows.iter().enumerate() {
            let mut pred = beta[0];
            let mut c = 1;
            for k in 0..d {
                if k != j {
                    pred += beta[c] * matrix.values[i][k];
                    c += 1;
                }
            }
            let e = y[r] - pred;
            rss += e * e;
        }
        let r2 = 1.0 - rss / tss;
        if r2 >= 1.0 - 1e-12 {
            f64::INFINITY
        } else {
            (1.0 / (1.0 - r2)).max(1.0)
        }
    });
    Ok(matrix
        .feature_names
        .iter()
        .cloned()
        .zip(vals)
        .collect())
}

/// One elimination step in a [`VifReport`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VifElimination {
    pub feature: String,
    #[serde(with = "crate::features::vif_value")]
    pub vif_at_removal: f64,
}

/// Outcome of iterative VIF elimination.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VifReport {
    pub threshold: f64,
    pub elimination_trace: Vec<VifElimination>,
    pub retained: Vec<String>,
    #[serde(with = "crate::features::vif_map")]
    pub final_vifs: BTreeMap<String, f64>,
    /// Set when elimination stopped because fewer features than rows-allow
    /// remained while some VIF still exceeded the threshold.
    pub unresolved: bool,
}

/// Iteratively drop the feature with the largest VIF at or above the
/// threshold (ties broken toward the earlier canonical index) until all
/// remaining VIFs fall below it.
pub fn select_by_vif(
    matrix: &FeatureMatrix,
    rows: &[usize],
    threshold: f64,
) -> Result<VifReport> {
    if threshold <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "VIF threshold must exceed 1, got {threshold}"
        )));
    }
    let mut current = matrix.select_rows(rows);
    let all_rows: Vec<usize> = (0..current.n_rows()).collect();
    let mut trace = Vec::new();
    loop {
        let vifs = vif_on_rows(&current, &all_rows)?;
        // worst feature by VIF, ties toward the earlier column index
        let worst = current
            .feature_names
            .iter()
            .enumerate()
            .map(|(j, name)| (j, name.clone(), vifs[name]))
            .filter(|(_, _, v)| *v >= threshold)
            .max_by(|a, b| {
                a.2.partial_cmp(&b.2)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(b.0.cmp(&a.0))
            });
        match worst {
            None => {
                return Ok(VifReport {
                    threshold,
                    elimination_trace: trace,
                    retained: current.feature_names.clone(),
                    final_vifs: vifs,
                    unresolved: false,
                });
            }
            Some((j, name, v)) => {
                if current.n_cols() == 1 {
                    return Ok(VifReport {
                        threshold,
                        elimination_trace: trace,
                        retained: current.feature_names.clone(),
                        final_vifs: vifs,
                        unresolved: true,
                    });
                }
                trace.push(VifElimination {
                    feature: name,
                    vif_at_removal: v,
                });
                current = current.drop_column(j);
            }
        }
    }
}

/// serde helpers representing infinite VIFs as the string "inf" in JSON.
pub(crate) mod vif_value {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, ser: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            ser.serialize_f64(*v)
        } else {
            ser.serialize_str("inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(de)? {
            Raw::Num(v) => Ok(v),
            Raw::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Raw::Str(s) => Err(D::Error::custom(format!("bad VIF value '{s}'"))),
        }
    }
}

pub(crate) mod vif_map {
    use std::collections::BTreeMap;

    use serde::ser::SerializeMap;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        m: &BTreeMap<String, f64>,
        ser: S,
    ) -> Result<S::Ok, S::Error> {
        let mut map = ser.serialize_map(Some(m.len()))?;
        for (k, v) in m {
            if v.is_finite() {
                map.serialize_entry(k, v)?;
            } else {
                map.serialize_entry(k, "inf")?;
            }
        }
        map.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> Result<BTreeMap<String, f64>, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(#[allow(dead_code)] String),
        }
        let raw: BTreeMap<String, Raw> = BTreeMap::deserialize(de)?;
        Ok(raw
            .into_iter()
            .map(|(k, v)| {
                let v = match v {
                    Raw::Num(x) => x,
                    Raw::Str(_) => f64::INFINITY,
                };
                (k, v)
            })
            .collect())
    }
}

/// Write a feature matrix as CSV: `user_id`, one column per feature, `label`.
pub fn write_matrix_csv(matrix: &FeatureMatrix, writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["user_id".to_string()];
    header.extend(matrix.feature_names.iter().cloned());
    header.push("label".into());
    w.write_record(&header)?;
    for i in 0..matrix.n_rows() {
        let mut record = vec![matrix.user_ids[i].clone()];
        for v in &matrix.values[i] {
            record.push(format_float(*v));
        }
        record.push(match matrix.labels[i] {
            Some(l) => l.as_str().to_string(),
            None => String::new(),
        });
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest decimal representation that round-trips the exact f64.
fn format_float(v: f64) -> String {
    let mut buf = ryu_format(v);
    if buf.ends_with(".0") {
        buf.truncate(buf.len() - 2);
    }
    buf
}

fn ryu_format(v: f64) -> String {
    // serde_json uses ryu internally; route through it for identical bytes
    serde_json::to_string(&v).unwrap_or_else(|_| v.to_string())
}

/// Read a feature matrix CSV produced by [`write_matrix_csv`].
pub fn read_matrix_csv(reader: impl Read) -> Result<FeatureMatrix> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.clone();
    if header.len() < 3 || &header[0] != "user_id" || &header[header.len() - 1] != "label" {
        return Err(Error::FeatureNameMismatch(
            "feature CSV must be 'user_id,<features...>,label'".into(),
        ));
    }
    let feature_names: Vec<String> = header
        .iter()
        .skip(1)
        .take(header.len() - 2)
        .map(String::from)
        .collect();
    let mut user_ids = Vec::new();
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (idx, record) in r.records().enumerate() {
        let record = record?;
        if record.len() != header.len() {
            return Err(Error::CorpusParse {
                line: idx + 2,
                message: format!("expected {} fields, got {}", header.len(), record.len()),
            });
        }
        user_ids.push(record[0].to_string());
        let row: Vec<f64> = record
            .iter()
            .skip(1)
            .take(feature_names.len())
            .map(|s| {
                s.parse::<f64>().map_err(|_| Error::CorpusParse {
                    line: idx + 2,
                    message: format!("bad float '{s}'"),
                })
            })
            .collect::<Result<_>>()?;
        values.push(row);
        let label_field = &record[record.len() - 1];
        labels.push(if label_field.is_empty() {
            None
        } else {
            Some(Label::parse(label_field).ok_or_else(|| Error::CorpusParse {
                line: idx + 2,
                message: format!("bad label '{label_field}'"),
            })?)
        });
    }
    Ok(FeatureMatrix {
        user_ids,
        feature_names,
        values,
        labels,
        standardization: None,
    })
}
