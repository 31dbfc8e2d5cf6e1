//! Tabular regression data: CSV ingestion, seeded splits, standardization.

use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const INTERCEPT_NAME: &str = "intercept";

/// Row-major feature matrix plus response vector.
///
/// When `has_intercept_column` is set, the last column is the constant 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    targets: Vec<f64>,
    n: usize,
    d: usize,
    feature_names: Vec<String>,
    target_name: String,
    has_intercept_column: bool,
}

impl Dataset {
    pub fn new(
        features: Vec<f64>,
        targets: Vec<f64>,
        feature_names: Vec<String>,
        target_name: impl Into<String>,
        has_intercept_column: bool,
    ) -> Result<Self> {
        let n = targets.len();
        let d = feature_names.len();
        if n == 0 {
            return Err(Error::Empty("dataset has no rows"));
        }
        if d == 0 {
            return Err(Error::Empty("dataset has no feature columns"));
        }
        if features.len() != n * d {
            return Err(Error::DimensionMismatch {
                expected: n * d,
                got: features.len(),
            });
        }
        if features.iter().chain(&targets).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if has_intercept_column && features.chunks_exact(d).any(|row| row[d - 1] != 1.0) {
            return Err(Error::InvalidData(
                "intercept column must be constant 1".into(),
            ));
        }
        Ok(Self {
            features,
            targets,
            n,
            d,
            feature_names,
            target_name: target_name.into(),
            has_intercept_column,
        })
    }

    /// Builds a dataset from rows, optionally appending a constant intercept column.
    pub fn from_rows(
        rows: &[Vec<f64>],
        targets: Vec<f64>,
        mut feature_names: Vec<String>,
        target_name: impl Into<String>,
        add_intercept: bool,
    ) -> Result<Self> {
        if rows.len() != targets.len() {
            return Err(Error::DimensionMismatch {
                expected: targets.len(),
                got: rows.len(),
            });
        }
        let width = feature_names.len();
        let mut features = Vec::with_capacity(rows.len() * (width + add_intercept as usize));
        for row in rows {
            if row.len() != width {
                return Err(Error::DimensionMismatch {
                    expected: width,
                    got: row.len(),
                });
            }
            features.extend_from_slice(row);
            if add_intercept {
                features.push(1.0);
            }
        }
        if add_intercept {
            feature_names.push(INTERCEPT_NAME.to_string());
        }
        Self::new(features, targets, feature_names, target_name, add_intercept)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.features.chunks_exact(self.d)
    }

    pub fn target(&self, i: usize) -> f64 {
        self.targets[i]
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    pub fn has_intercept_column(&self) -> bool {
        self.has_intercept_column
    }

    pub fn intercept_index(&self) -> Option<usize> {
        self.has_intercept_column.then(|| self.d - 1)
    }

    /// New dataset holding the given rows, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Empty("subset selects no rows"));
        }
        let mut features = Vec::with_capacity(indices.len() * self.d);
        let mut targets = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            targets.push(self.targets[i]);
        }
        Ok(Self {
            features,
            targets,
            n: indices.len(),
            d: self.d,
            feature_names: self.feature_names.clone(),
            target_name: self.target_name.clone(),
            has_intercept_column: self.has_intercept_column,
        })
    }

    /// Indices of rows for which `keep` returns true.
    pub fn indices_where(&self, mut keep: impl FnMut(&[f64]) -> bool) -> Vec<usize> {
        self.rows()
            .enumerate()
            .filter_map(|(i, row)| keep(row).then_some(i))
            .collect()
    }

    /// Per-dimension minimum and maximum over all rows.
    pub fn feature_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.d];
        let mut hi = vec![f64::NEG_INFINITY; self.d];
        for row in self.rows() {
            for j in 0..self.d {
                lo[j] = lo[j].min(row[j]);
                hi[j] = hi[j].max(row[j]);
            }
        }
        (lo, hi)
    }

    /// Writes the dataset as CSV. The intercept column is omitted so the file
    /// can be re-read with `add_intercept = true`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        let free: Vec<usize> = (0..self.d)
            .filter(|&j| Some(j) != self.intercept_index())
            .collect();
        let mut header: Vec<&str> = free.iter().map(|&j| self.feature_names[j].as_str()).collect();
        header.push(&self.target_name);
        out.write_record(&header)?;
        for (i, row) in self.rows().enumerate() {
            let mut record: Vec<String> = free.iter().map(|&j| row[j].to_string()).collect();
            record.push(self.targets[i].to_string());
            out.write_record(&record)?;
        }
        out.flush().map_err(|source| Error::Io {
            path: "<csv writer>".into(),
            source,
        })?;
        Ok(())
    }
}

/// Loads a headed, comma-separated file. The target column is removed from the
/// features; with `add_intercept` a constant-1 column is appended.
pub fn load_csv(path: impl AsRef<Path>, target_column: &str, add_intercept: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, target_column, add_intercept)
}

pub fn read_csv<R: Read>(reader: R, target_column: &str, add_intercept: bool) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let target_idx = header
        .iter()
        .position(|h| h == target_column)
        .ok_or_else(|| Error::MissingTarget(target_column.to_string()))?;
    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != target_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut rows = Vec::new();
    let mut targets = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let mut row = Vec::with_capacity(feature_names.len());
        for (j, cell) in record.iter().enumerate() {
            let value = cell
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    row: r + 1,
                    column: header[j].clone(),
                    value: cell.to_string(),
                })?;
            if j == target_idx {
                targets.push(value);
            } else {
                row.push(value);
            }
        }
        rows.push(row);
    }
    if targets.is_empty() {
        return Err(Error::Empty("csv has no data rows"));
    }
    if targets.iter().all(|&t| t == targets[0]) {
        return Err(Error::ConstantTarget);
    }
    Dataset::from_rows(&rows, targets, feature_names, target_column, add_intercept)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_frac: f64,
    pub val_frac: f64,
    pub test_frac: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_frac: f64, val_frac: f64, test_frac: f64, seed: u64) -> Result<Self> {
        let spec = Self {
            train_frac,
            val_frac,
            test_frac,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let fracs = [self.train_frac, self.val_frac, self.test_frac];
        if fracs.iter().any(|f| !(*f > 0.0 && *f < 1.0)) {
            return Err(Error::InvalidSplit(format!(
                "fractions must lie in (0, 1), got {fracs:?}"
            )));
        }
        let sum: f64 = fracs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSplit(format!("fractions sum to {sum}, not 1")));
        }
        Ok(())
    }

    /// Split sizes `(train, val, test)`; flooring remainders go to train.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        // small slack so that e.g. 0.3 * 10 floors to 3
        let floor = |f: f64| (f * n as f64 + 1e-9).floor() as usize;
        let val = floor(self.val_frac);
        let test = floor(self.test_frac);
        (n - val - test, val, test)
    }
}

/// Disjoint row-index partition produced by [`split_indices`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

pub fn split_indices(n: usize, spec: &SplitSpec) -> Result<SplitIndices> {
    spec.validate()?;
    if n < 3 {
        return Err(Error::InvalidSplit(format!("need at least 3 rows, got {n}")));
    }
    let (n_train, n_val, n_test) = spec.sizes(n);
    if n_train == 0 || n_val == 0 || n_test == 0 {
        return Err(Error::InvalidSplit(format!(
            "split of {n} rows leaves an empty part ({n_train}, {n_val}, {n_test})"
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let test = perm.split_off(n_train + n_val);
    let val = perm.split_off(n_train);
    Ok(SplitIndices {
        train: perm,
        val,
        test,
    })
}

pub fn split(data: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset, Dataset)> {
    let idx = split_indices(data.n(), spec)?;
    Ok((
        data.subset(&idx.train)?,
        data.subset(&idx.val)?,
        data.subset(&idx.test)?,
    ))
}

/// Per-column affine scaling fitted on training rows (sample standard deviation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub feature_mean: Vec<f64>,
    pub feature_std: Vec<f64>,
    /// Columns left untouched (the intercept).
    pub exempt: Vec<bool>,
    pub target_mean: f64,
    pub target_std: f64,
    pub standardize_target: bool,
}

fn mean_and_sample_std(values: &[f64]) -> (f64, f64) {
    let count = values.len();
    let mean = values.iter().sum::<f64>() / count as f64;
    if count < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (count - 1) as f64).sqrt())
}

impl Standardizer {
    pub fn fit(train: &Dataset, standardize_target: bool) -> Result<Self> {
        let d = train.d();
        let mut feature_mean = vec![0.0; d];
        let mut feature_std = vec![1.0; d];
        let mut exempt = vec![false; d];
        for j in 0..d {
            if Some(j) == train.intercept_index() {
                exempt[j] = true;
                continue;
            }
            let column: Vec<f64> = train.rows().map(|r| r[j]).collect();
            let (m, s) = mean_and_sample_std(&column);
            if !(s > 0.0) {
                return Err(Error::ZeroVariance(train.feature_names()[j].clone()));
            }
            feature_mean[j] = m;
            feature_std[j] = s;
        }
        let (target_mean, target_std) = if standardize_target {
            let (m, s) = mean_and_sample_std(train.targets());
            if !(s > 0.0) {
                return Err(Error::ConstantTarget);
            }
            (m, s)
        } else {
            (0.0, 1.0)
        };
        Ok(Self {
            feature_mean,
            feature_std,
            exempt,
            target_mean,
            target_std,
            standardize_target,
        })
    }

    pub fn apply(&self, data: &Dataset) -> Result<Dataset> {
        if data.d() != self.feature_mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.feature_mean.len(),
                got: data.d(),
            });
        }
        let mut features = data.features().to_vec();
        for row in features.chunks_exact_mut(data.d()) {
            self.forward_point(row);
        }
        let targets = data
            .targets()
            .iter()
            .map(|&y| (y - self.target_mean) / self.target_std)
            .collect();
        Dataset::new(
            features,
            targets,
            data.feature_names().to_vec(),
            data.target_name(),
            data.has_intercept_column(),
        )
    }

    pub fn forward_point(&self, x: &mut [f64]) {
        for (j, v) in x.iter_mut().enumerate() {
            if !self.exempt[j] {
                *v = (*v - self.feature_mean[j]) / self.feature_std[j];
            }
        }
    }

    pub fn inverse_point(&self, x: &mut [f64]) {
        for (j, v) in x.iter_mut().enumerate() {
            if !self.exempt[j] {
                *v = *v * self.feature_std[j] + self.feature_mean[j];
            }
        }
    }

    /// Maps a single coordinate back to original units.
    pub fn inverse_coord(&self, j: usize, v: f64) -> f64 {
        if self.exempt[j] {
            v
        } else {
            v * self.feature_std[j] + self.feature_mean[j]
        }
    }

    pub fn inverse_target(&self, y: f64) -> f64 {
        y * self.target_std + self.target_mean
    }

    /// Scale factor turning a standardized-unit MSE into original units.
    pub fn mse_scale(&self) -> f64 {
        self.target_std * self.target_std
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv_text(text: &str, add_intercept: bool) -> Result<Dataset> {
        read_csv(text.as_bytes(), "y", add_intercept)
    }

    #[test]
    fn loads_with_intercept() {
        let data = csv_text("a,b,y\n1,2,3\n4,5,6\n7,8,10\n", true).unwrap();
        assert_eq!((data.n(), data.d()), (3, 3));
        assert_eq!(data.feature_names(), ["a", "b", "intercept"]);
        assert!(data.has_intercept_column());
        assert_eq!(data.row(1), [4.0, 5.0, 1.0]);
        assert_eq!(data.targets(), [3.0, 6.0, 10.0]);
    }

    #[test]
    fn target_may_be_any_column() {
        let data = csv_text("y,a\n1,2\n3,4\n", false).unwrap();
        assert_eq!(data.feature_names(), ["a"]);
        assert_eq!(data.row(0), [2.0]);
    }

    #[test]
    fn nan_cell_names_row_and_column() {
        let err = csv_text("a,b,y\n1,2,3\n4,NaN,6\n", false).unwrap_err();
        match err {
            Error::Parse { row, column, value } => {
                assert_eq!((row, column.as_str(), value.as_str()), (2, "b", "NaN"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn loader_errors() {
        assert!(matches!(
            csv_text("a,b\n1,2\n", false),
            Err(Error::MissingTarget(_))
        ));
        assert!(matches!(
            csv_text("a,y\n1,2\n3,2\n", false),
            Err(Error::ConstantTarget)
        ));
        assert!(matches!(csv_text("a,y\n1,x\n", false), Err(Error::Parse { .. })));
        assert!(matches!(
            load_csv("/nonexistent/file.csv", "y", false),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn split_sizes_floor_and_remainder_to_train() {
        let spec = SplitSpec::new(0.5, 0.3, 0.2, 7).unwrap();
        assert_eq!(spec.sizes(10), (5, 3, 2));
        assert_eq!(spec.sizes(1000), (500, 300, 200));
        assert_eq!(spec.sizes(11), (6, 3, 2));
    }

    #[test]
    fn split_is_deterministic_partition() {
        let spec = SplitSpec::new(0.5, 0.3, 0.2, 42).unwrap();
        let a = split_indices(37, &spec).unwrap();
        let b = split_indices(37, &spec).unwrap();
        assert_eq!(a, b);
        let mut all: Vec<usize> = a.train.iter().chain(&a.val).chain(&a.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..37).collect::<Vec<_>>());
        let other = split_indices(37, &SplitSpec { seed: 43, ..spec }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn split_rejects_bad_specs() {
        assert!(SplitSpec::new(0.5, 0.5, 0.0, 0).is_err());
        assert!(SplitSpec::new(0.5, 0.3, 0.3, 0).is_err());
        let spec = SplitSpec::new(0.8, 0.1, 0.1, 0).unwrap();
        // 5 rows: val and test floor to 0
        assert!(split_indices(5, &spec).is_err());
        assert!(split_indices(2, &spec).is_err());
    }

    #[test]
    fn standardize_uses_sample_std_and_skips_intercept() {
        let data = Dataset::from_rows(
            &[vec![1.0], vec![2.0], vec![3.0]],
            vec![0.0, 1.0, 5.0],
            vec!["a".into()],
            "y",
            true,
        )
        .unwrap();
        let s = Standardizer::fit(&data, false).unwrap();
        let z = s.apply(&data).unwrap();
        let col: Vec<f64> = z.rows().map(|r| r[0]).collect();
        for (got, want) in col.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(z.rows().all(|r| r[1] == 1.0));
        assert_eq!(z.targets(), data.targets());

        let mut at_mean = [2.0, 1.0];
        s.forward_point(&mut at_mean);
        assert_eq!(at_mean, [0.0, 1.0]);
    }

    #[test]
    fn zero_variance_column_is_rejected() {
        let data = Dataset::from_rows(
            &[vec![1.0, 4.0], vec![2.0, 4.0]],
            vec![0.0, 1.0],
            vec!["a".into(), "b".into()],
            "y",
            false,
        )
        .unwrap();
        assert!(matches!(
            Standardizer::fit(&data, true),
            Err(Error::ZeroVariance(c)) if c == "b"
        ));
    }

    #[test]
    fn csv_write_round_trips() {
        let data = csv_text("a,b,y\n0.1,2.5,3\n-4,5e-3,6\n7,8,1.25\n", true).unwrap();
        let mut buf = Vec::new();
        data.write_csv(&mut buf).unwrap();
        let back = read_csv(buf.as_slice(), "y", true).unwrap();
        assert_eq!(back, data);
    }
}
