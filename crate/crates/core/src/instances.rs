//! Matrix files, decision-stump matrices and synthetic instance generators.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{BoostMatrix, MatrixError};

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("cannot read {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    /// Coordinates are 1-based.
    #[error("row {row}, col {col}: cannot parse '{text}' as a number")]
    Parse { row: usize, col: usize, text: String },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("row {row}: label {value} is not -1 or +1")]
    Label { row: usize, value: f64 },
    #[error("dataset needs at least one feature column and one label column")]
    NoFeatures,
    #[error("no stump separates any pair of points")]
    NoStumps,
    #[error("explicit thresholds given for {given} features, dataset has {features}")]
    ThresholdCount { given: usize, features: usize },
    #[error("generator parameters: {0}")]
    Generator(String),
}

fn open(path: &Path) -> Result<File, InstanceError> {
    File::open(path).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_cell(text: &str, row: usize, col: usize) -> Result<f64, InstanceError> {
    text.trim().parse::<f64>().map_err(|_| InstanceError::Parse {
        row,
        col,
        text: text.to_string(),
    })
}

/// Reads a headerless, comma-separated numeric table.
fn read_table<R: Read>(r: R, skip_header: bool) -> Result<Vec<Vec<f64>>, InstanceError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(r);
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if (skip_header && i == 0) || rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        rows.push(
            rec.iter()
                .enumerate()
                .map(|(j, f)| parse_cell(f, i + 1, j + 1))
                .collect::<Result<Vec<_>, _>>()?,
        );
    }
    Ok(rows)
}

pub fn parse_matrix<R: Read>(r: R) -> Result<BoostMatrix, InstanceError> {
    Ok(BoostMatrix::from_rows(read_table(r, false)?)?)
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<BoostMatrix, InstanceError> {
    parse_matrix(open(path.as_ref())?)
}

/// Writes entries in shortest round-trip form, so reading back is bit-exact.
pub fn write_matrix<W: Write>(a: &BoostMatrix, w: W) -> Result<(), InstanceError> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for i in 0..a.rows() {
        out.write_record(a.row(i).iter().map(|v| v.to_string()))?;
    }
    out.flush().map_err(|source| InstanceError::Io {
        path: "<writer>".into(),
        source,
    })?;
    Ok(())
}

pub fn save_matrix(a: &BoostMatrix, path: impl AsRef<Path>) -> Result<(), InstanceError> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    write_matrix(a, f)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
}

/// Numeric features with the label in the last column. A first line that
/// does not parse as numbers is taken as a header.
pub fn parse_dataset<R: Read>(mut r: R) -> Result<Dataset, InstanceError> {
    let mut text = String::new();
    r.read_to_string(&mut text).map_err(|source| InstanceError::Io {
        path: "<dataset>".into(),
        source,
    })?;
    let header = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .is_some_and(|l| l.split(',').any(|f| f.trim().parse::<f64>().is_err()));
    let rows = read_table(text.as_bytes(), header)?;
    let width = rows.first().map_or(0, Vec::len);
    if width < 2 {
        return Err(InstanceError::NoFeatures);
    }
    let mut features = Vec::with_capacity(rows.len());
    let mut labels = Vec::with_capacity(rows.len());
    for (i, mut row) in rows.into_iter().enumerate() {
        if row.len() != width {
            return Err(MatrixError::Ragged {
                row: i + 1,
                expected: width,
                found: row.len(),
            }
            .into());
        }
        let y = row.pop().expect("width >= 2");
        if y != 1.0 && y != -1.0 {
            return Err(InstanceError::Label { row: i + 1, value: y });
        }
        features.push(row);
        labels.push(y);
    }
    Ok(Dataset { features, labels })
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset, InstanceError> {
    parse_dataset(open(path.as_ref())?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Thresholds {
    /// Midpoints between consecutive sorted distinct values of each feature.
    Midpoints,
    /// One list per feature.
    Explicit(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StumpSpec {
    pub thresholds: Thresholds,
    pub include_negations: bool,
}

impl Default for StumpSpec {
    fn default() -> Self {
        StumpSpec {
            thresholds: Thresholds::Midpoints,
            include_negations: true,
        }
    }
}

/// `h(x) = +1` if `x[feature] > threshold`, else `-1`; negated when `negated`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub negated: bool,
}

impl Stump {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let h = if x[self.feature] > self.threshold { 1.0 } else { -1.0 };
        if self.negated {
            -h
        } else {
            h
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StumpMatrix {
    pub matrix: BoostMatrix,
    /// The stump behind each column.
    pub stumps: Vec<Stump>,
}

fn midpoints(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

/// One column `-y_i h(x_i)` per stump, keeping only the first of any
/// identical columns.
pub fn build_stump_matrix(data: &Dataset, spec: &StumpSpec) -> Result<StumpMatrix, InstanceError> {
    let d = data.features.first().map_or(0, Vec::len);
    if d == 0 {
        return Err(InstanceError::NoFeatures);
    }
    let per_feature: Vec<Vec<f64>> = match &spec.thresholds {
        Thresholds::Midpoints => (0..d)
            .map(|f| midpoints(data.features.iter().map(|x| x[f])))
            .collect(),
        Thresholds::Explicit(t) => {
            if t.len() != d {
                return Err(InstanceError::ThresholdCount {
                    given: t.len(),
                    features: d,
                });
            }
            t.clone()
        }
    };

    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut stumps = Vec::new();
    for (feature, ts) in per_feature.iter().enumerate() {
        for &threshold in ts {
            let polarities: &[bool] = if spec.include_negations { &[false, true] } else { &[false] };
            for &negated in polarities {
                let s = Stump {
                    feature,
                    threshold,
                    negated,
                };
                let col: Vec<f64> = data
                    .features
                    .iter()
                    .zip(&data.labels)
                    .map(|(x, y)| -y * s.predict(x))
                    .collect();
                if !columns.contains(&col) {
                    columns.push(col);
                    stumps.push(s);
                }
            }
        }
    }
    if columns.is_empty() {
        return Err(InstanceError::NoStumps);
    }
    let m = data.labels.len();
    let n = columns.len();
    let mut flat = vec![0.0; m * n];
    for (j, col) in columns.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            flat[i * n + j] = v;
        }
    }
    Ok(StumpMatrix {
        matrix: BoostMatrix::from_row_major(m, n, flat)?,
        stumps,
    })
}

fn generator_error(msg: impl Into<String>) -> InstanceError {
    InstanceError::Generator(msg.into())
}

/// Adds a zero-sum perturbation to `base` (all entries in `[-1, 1]`) that keeps
/// every entry in `[-1, 1]`.
fn zero_sum_jitter(rng: &mut ChaCha8Rng, base: &mut [f64]) {
    if base.len() < 2 {
        return;
    }
    let mut u: Vec<f64> = base.iter().map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let mean = u.iter().sum::<f64>() / u.len() as f64;
    u.iter_mut().for_each(|x| *x -= mean);
    let mut s: f64 = 1.0;
    for (b, x) in base.iter().zip(&u) {
        if *x > 0.0 {
            s = s.min((1.0 - b) / x);
        } else if *x < 0.0 {
            s = s.min((1.0 + b) / -x);
        }
    }
    for (b, x) in base.iter_mut().zip(&u) {
        *b = (*b + s * x).clamp(-1.0, 1.0);
    }
}

/// Separable instance whose uniform weighting over the first `ceil(n/2)`
/// columns has minimum margin exactly `gamma`. Every column holds both an
/// entry below zero and one above, so no single hypothesis is perfect and
/// exact line searches stay bounded.
pub fn planted(m: usize, n: usize, gamma: f64, seed: u64) -> Result<BoostMatrix, InstanceError> {
    if m < 2 || n < 2 {
        return Err(generator_error("planted needs m >= 2 and n >= 2"));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(generator_error(format!("gamma = {gamma} outside (0, 1)")));
    }
    let k = n.div_ceil(2).max(2);
    let kf = k as f64;
    // a good column with entry -delta on a row leaves the rest averaging (k mu + delta)/(k-1)
    if kf * gamma >= kf - 1.0 {
        return Err(generator_error(format!("gamma = {gamma} too large for {k} planted columns")));
    }
    if m < k {
        return Err(generator_error(format!("planted needs m >= {k} rows")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    with_mixed_signs(|| {
        let mut rows = vec![vec![0.0; n]; m];
        for (i, row) in rows.iter_mut().enumerate() {
            let headroom = (kf - 1.0) / kf - gamma;
            let mu = if i == 0 {
                gamma
            } else {
                gamma + rng.gen_range(0.0..0.25) * headroom
            };
            let slack = kf - 1.0 - kf * mu;
            let delta = rng.gen_range(0.05..=0.5f64).min(slack).min(1.0);
            let victim = i % k;
            let rest = (kf * mu + delta) / (kf - 1.0);
            let mut others = vec![rest; k - 1];
            zero_sum_jitter(&mut rng, &mut others);
            let mut it = others.into_iter();
            for (j, v) in row.iter_mut().enumerate().take(k) {
                let d = if j == victim { -delta } else { it.next().expect("k - 1 values") };
                *v = -d;
            }
            for v in row.iter_mut().skip(k) {
                *v = rng.gen_range(-1.0..=1.0);
            }
        }
        rows
    })
}

fn mixed_signs(rows: &[Vec<f64>]) -> bool {
    (0..rows[0].len()).all(|j| rows.iter().any(|r| r[j] < 0.0) && rows.iter().any(|r| r[j] > 0.0))
}

/// Redraws until every column holds both signs.
fn with_mixed_signs(mut draw: impl FnMut() -> Vec<Vec<f64>>) -> Result<BoostMatrix, InstanceError> {
    for _ in 0..10_000 {
        let rows = draw();
        if mixed_signs(&rows) {
            return Ok(BoostMatrix::from_rows(rows)?);
        }
    }
    Err(generator_error("could not draw an instance with mixed-sign columns"))
}

/// Binary analogue of [`planted`]: the first `k` columns agree with each row
/// often enough that their uniform weighting has margin at least `gamma`,
/// and each of them is wrong on some row.
pub fn planted_binary(m: usize, n: usize, gamma: f64, seed: u64) -> Result<BoostMatrix, InstanceError> {
    if m < 2 || n < 2 {
        return Err(generator_error("planted_binary needs m >= 2 and n >= 2"));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(generator_error(format!("gamma = {gamma} outside (0, 1)")));
    }
    let k = n.div_ceil(2).max(2);
    let correct = (k as f64 * (1.0 + gamma) / 2.0).ceil() as usize;
    if correct >= k {
        return Err(generator_error(format!("gamma = {gamma} needs more than {k} planted columns")));
    }
    if m < k {
        return Err(generator_error(format!("planted_binary needs m >= {k} rows")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    with_mixed_signs(|| {
        let mut rows = vec![vec![0.0; n]; m];
        for (i, row) in rows.iter_mut().enumerate() {
            let mut order: Vec<usize> = (0..k).filter(|&j| j != i % k).collect();
            order.shuffle(&mut rng);
            // column i mod k is wrong on row i; the first `correct` of the rest are right
            for (pos, &j) in order.iter().enumerate() {
                row[j] = if pos < correct { -1.0 } else { 1.0 };
            }
            row[i % k] = 1.0;
            for v in row.iter_mut().skip(k) {
                *v = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            }
        }
        rows
    })
}

/// `m0` easy rows stacked on `m1` hard rows. The hard rows have a zero first
/// entry and a strictly positive, non-uniform combination of them vanishes,
/// so none can be pushed negative without pushing another positive. Easy
/// rows are strictly negative in the first column, so the first basis
/// vector certifies them while vanishing on the hard block.
pub fn mixed(m0: usize, m1: usize, n: usize, seed: u64) -> Result<BoostMatrix, InstanceError> {
    if m1 == 1 {
        return Err(generator_error("a hard block needs zero or at least two rows"));
    }
    if m0 + m1 == 0 {
        return Err(generator_error("mixed needs at least one row"));
    }
    if n < 2 && m1 > 0 {
        return Err(generator_error("a hard block needs n >= 2"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(m0 + m1);
    for _ in 0..m0 {
        let mut r: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        r[0] = rng.gen_range(-1.0..=-0.5);
        rows.push(r);
    }
    if m1 > 0 {
        loop {
            let mut block: Vec<Vec<f64>> = (0..m1 - 1)
                .map(|_| {
                    let mut r: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                    r[0] = 0.0;
                    r
                })
                .collect();
            let mut s = vec![0.0; n];
            for r in &block {
                let w = rng.gen_range(0.5..=2.0);
                s.iter_mut().zip(r).for_each(|(a, b)| *a += w * b);
            }
            let scale = s.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            if scale < 1e-3 {
                continue;
            }
            block.push(s.iter().map(|v| -v / scale).collect());
            rows.extend(block);
            break;
        }
    }
    Ok(BoostMatrix::from_rows(rows)?)
}
