//! Dataset I/O, compositional preprocessing and the synthetic generator.
//!
//! CSV conventions: comma separated, `.` decimal, LF or CRLF line endings,
//! and an optional single header row detected by a non-numeric first line.
//! A generated dataset bundle is `X.csv` + `y.csv` + `meta.json`.
//!
//! Synthetic generation draws the latent matrix `M` row-wise from
//! `N(omega, Sigma)` with `Sigma_ij = 0.5^|i-j|` via the stationary AR(1)
//! recursion `M_t = omega_t + 0.5 (M_{t-1} - omega_{t-1}) + sqrt(0.75) e_t`
//! (unit marginal variance, no Cholesky). Rows are then softmax-normalized
//! onto the simplex and the response is built from the log design as
//! `y = log(Z) x_true + noise`.
//!
//! Randomness is a fixed set of ChaCha8 streams derived from the one seed:
//! stream 0 feeds row `i` of `M` through a per-row subseed (rows are
//! independent, so generation could be parallelized without changing
//! output), stream 1 the coefficient pattern, stream 2 the noise. Draw
//! order within each stream is documented at the point of use.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rand::distr::uniform::SampleUniform;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: file is empty")]
    EmptyFile { path: PathBuf },
    #[error("{path}: line {line} has {got} fields, expected {expected}")]
    RaggedRow {
        path: PathBuf,
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("{path}: non-numeric value {token:?} at line {line}, column {col}")]
    NonNumericCell {
        path: PathBuf,
        line: usize,
        col: usize,
        token: String,
    },
    #[error("entry at row {row}, column {col} is {value}: log transform needs strictly positive data")]
    NonPositiveEntry { row: usize, col: usize, value: f64 },
    #[error("coefficient support of size {k} invalid for {n} variables (need 2 <= k <= n)")]
    BadSupport { k: usize, n: usize },
    #[error("matrix has {rows} rows but response has {len}")]
    ResponseLength { rows: usize, len: usize },
}

/// A design/response pair, with centering offsets kept for prediction.
#[derive(Debug, Clone)]
pub struct Dataset<F> {
    /// Either compositional rows (before the log transform) or the design.
    pub x: DenseMatrix<F>,
    pub y: Vec<F>,
    pub is_log_transformed: bool,
    pub column_means: Option<Vec<F>>,
    pub y_mean: Option<F>,
}

impl<F: Scalar> Dataset<F> {
    pub fn new(x: DenseMatrix<F>, y: Vec<F>) -> Result<Self, DataError> {
        if x.nrows() != y.len() {
            return Err(DataError::ResponseLength {
                rows: x.nrows(),
                len: y.len(),
            });
        }
        Ok(Self {
            x,
            y,
            is_log_transformed: false,
            column_means: None,
            y_mean: None,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    /// Entry-wise natural log; every entry must be strictly positive
    /// (compositional models do not admit zeros).
    // Negated comparison so NaN entries are rejected too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn log_transform(mut self) -> Result<Self, DataError> {
        let (m, n) = (self.x.nrows(), self.x.ncols());
        for j in 0..n {
            for i in 0..m {
                let v = self.x.get(i, j);
                if !(v > F::zero()) {
                    return Err(DataError::NonPositiveEntry {
                        row: i + 1,
                        col: j + 1,
                        value: v.to_f64().unwrap_or(f64::NAN),
                    });
                }
                self.x.set(i, j, v.ln());
            }
        }
        self.is_log_transformed = true;
        Ok(self)
    }

    /// Shifts every column of the design and the response to mean zero,
    /// accumulating the offsets for later prediction.
    pub fn center(mut self) -> Self {
        let (m, n) = (self.x.nrows(), self.x.ncols());
        let m_f = F::from_usize(m).unwrap();
        let mut means = vec![F::zero(); n];
        for (j, mean) in means.iter_mut().enumerate() {
            let mut acc = F::zero();
            for i in 0..m {
                acc += self.x.get(i, j);
            }
            *mean = acc / m_f;
            for i in 0..m {
                let v = self.x.get(i, j) - *mean;
                self.x.set(i, j, v);
            }
        }
        let y_mean = crate::matrix::sum(&self.y) / m_f;
        for v in &mut self.y {
            *v -= y_mean;
        }
        match &mut self.column_means {
            Some(prev) => {
                for (p, m) in prev.iter_mut().zip(&means) {
                    *p += *m;
                }
            }
            None => self.column_means = Some(means),
        }
        self.y_mean = Some(self.y_mean.unwrap_or(F::zero()) + y_mean);
        self
    }
}

/// Coefficient pattern of the synthetic generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CoefMode {
    /// Six fixed coefficients `(1, -0.8, 0.6, 0, 0, -1.5, -0.5, 1.2)` on
    /// the first eight variables, three of them overlapping the major
    /// components; needs `n >= 8`.
    SixFixed,
    /// `fraction` of the variables carry coefficients drawn uniformly from
    /// `(low, high)`, recentered over the support so they sum to zero.
    RandomFraction { fraction: f64, low: f64, high: f64 },
}

/// Parameters of the synthetic compositional-regression generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub m: usize,
    pub n: usize,
    pub coef_mode: CoefMode,
    pub noise_sd: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn six_fixed(m: usize, n: usize, seed: u64) -> Self {
        Self {
            m,
            n,
            coef_mode: CoefMode::SixFixed,
            noise_sd: 0.5,
            seed,
        }
    }

    pub fn random_fraction(m: usize, n: usize, fraction: f64, seed: u64) -> Self {
        Self {
            m,
            n,
            coef_mode: CoefMode::RandomFraction {
                fraction,
                low: -1.0,
                high: 1.0,
            },
            noise_sd: 0.5,
            seed,
        }
    }
}

/// SplitMix64 step; derives independent subseeds from the master seed.
fn mix_seed(base: u64, salt: u64) -> u64 {
    let mut z = base
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(salt.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seeded generator for a named stream of a master seed.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(seed, stream))
}

const STREAM_ROWS: u64 = 0;
const STREAM_COEF: u64 = 1;
const STREAM_NOISE: u64 = 2;

/// Generates a compositional dataset and the true coefficient vector.
///
/// The returned dataset holds the simplex rows `Z` (not yet
/// log-transformed); the response was built from `log(Z)`, so running
/// [`Dataset::log_transform`] recovers exactly the design the response came
/// from. `x_true` sums to zero exactly: its last support entry is defined
/// as minus the sum of the others.
pub fn gen_synthetic<F>(spec: &SyntheticSpec) -> Result<(Dataset<F>, Vec<F>), DataError>
where
    F: Scalar + SampleUniform,
    StandardNormal: Distribution<F>,
{
    let (m, n) = (spec.m, spec.n);
    let x_true = gen_coefficients::<F>(spec)?;

    // Latent AR(1) rows, shifted by the major-component means
    // omega_j = log(0.5 n) for the first five variables.
    let phi = F::cast(0.5);
    let innov_sd = F::cast(0.75).sqrt();
    let omega_major = F::cast((0.5 * n as f64).ln());
    let omega = |j: usize| if j < 5 { omega_major } else { F::zero() };

    let rows_seed = mix_seed(spec.seed, STREAM_ROWS);
    let mut z = DenseMatrix::<F>::zeros(m, n);
    let mut log_z = DenseMatrix::<F>::zeros(m, n);
    let mut mrow = vec![F::zero(); n];
    for i in 0..m {
        // Row stream: n standard normals, one per column, in order.
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(rows_seed, i as u64));
        let mut dev = F::zero();
        for (j, slot) in mrow.iter_mut().enumerate() {
            let e: F = StandardNormal.sample(&mut rng);
            dev = if j == 0 { e } else { phi * dev + innov_sd * e };
            *slot = omega(j) + dev;
        }
        // Stable softmax onto the simplex.
        let mut mx = F::neg_infinity();
        for &v in &mrow {
            mx = mx.max(v);
        }
        let mut denom = F::zero();
        for &v in &mrow {
            denom += (v - mx).exp();
        }
        let log_denom = denom.ln() + mx;
        for (j, &mv) in mrow.iter().enumerate() {
            let lz = mv - log_denom;
            log_z.set(i, j, lz);
            z.set(i, j, lz.exp());
        }
    }

    // Response from the log design over the coefficient support, plus
    // N(0, noise_sd^2) noise; one noise draw per sample, in row order.
    let support: Vec<usize> = (0..n).filter(|&j| x_true[j] != F::zero()).collect();
    let mut noise_rng = seeded_rng(spec.seed, STREAM_NOISE);
    let noise_sd = F::cast(spec.noise_sd);
    let mut y = vec![F::zero(); m];
    for (i, yi) in y.iter_mut().enumerate() {
        let mut acc = F::zero();
        for &j in &support {
            acc += log_z.get(i, j) * x_true[j];
        }
        let e: F = StandardNormal.sample(&mut noise_rng);
        *yi = acc + noise_sd * e;
    }

    Ok((Dataset::new(z, y)?, x_true))
}

fn gen_coefficients<F>(spec: &SyntheticSpec) -> Result<Vec<F>, DataError>
where
    F: Scalar + SampleUniform,
{
    let n = spec.n;
    let mut x = vec![F::zero(); n];
    match spec.coef_mode {
        CoefMode::SixFixed => {
            if n < 8 {
                return Err(DataError::BadSupport { k: 8, n });
            }
            for (j, v) in [1.0, -0.8, 0.6, 0.0, 0.0, -1.5, -0.5].into_iter().enumerate() {
                x[j] = F::cast(v);
            }
            // Last support entry balances the rest exactly (its value is
            // 1.2 up to one rounding).
            let partial: F = x.iter().take(7).fold(F::zero(), |a, &v| a + v);
            x[7] = -partial;
        }
        CoefMode::RandomFraction {
            fraction,
            low,
            high,
        } => {
            let k = (fraction * n as f64).round() as usize;
            if k < 2 || k > n {
                return Err(DataError::BadSupport { k, n });
            }
            // Coefficient stream: k index draws (sample without
            // replacement), then k uniform values assigned in ascending
            // index order.
            let mut rng = seeded_rng(spec.seed, STREAM_COEF);
            let mut support = rand::seq::index::sample(&mut rng, n, k).into_vec();
            support.sort_unstable();
            let vals: Vec<F> = (0..k)
                .map(|_| rng.random_range(F::cast(low)..F::cast(high)))
                .collect();
            let mean = vals.iter().fold(F::zero(), |a, &v| a + v) / F::from_usize(k).unwrap();
            for (idx, &j) in support.iter().enumerate() {
                x[j] = vals[idx] - mean;
            }
            // Pin the exact zero sum on the last support entry.
            let last = *support.last().unwrap();
            let partial: F = support[..k - 1].iter().map(|&j| x[j]).sum();
            x[last] = -partial;
        }
    }
    Ok(x)
}

// ---------------------------------------------------------------------------
// CSV + bundle I/O
// ---------------------------------------------------------------------------

fn parse_csv_lines<F: Scalar>(
    path: &Path,
    text: &str,
) -> Result<(Vec<Vec<F>>, Option<String>), DataError> {
    let mut rows: Vec<Vec<F>> = Vec::new();
    let mut header = None;
    let mut expected: Option<usize> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let mut parsed = Vec::with_capacity(fields.len());
        let mut bad: Option<(usize, String)> = None;
        for (c, tok) in fields.iter().enumerate() {
            match tok.trim().parse::<F>() {
                Ok(v) => parsed.push(v),
                Err(_) => {
                    bad = Some((c + 1, tok.trim().to_string()));
                    break;
                }
            }
        }
        if let Some((col, token)) = bad {
            // A non-numeric first row is a header; anywhere else it is an
            // error with coordinates.
            if rows.is_empty() && header.is_none() {
                header = Some(line.to_string());
                expected.get_or_insert(fields.len());
                continue;
            }
            return Err(DataError::NonNumericCell {
                path: path.to_path_buf(),
                line: line_no,
                col,
                token,
            });
        }
        if let Some(e) = expected {
            if parsed.len() != e {
                return Err(DataError::RaggedRow {
                    path: path.to_path_buf(),
                    line: line_no,
                    expected: e,
                    got: parsed.len(),
                });
            }
        } else {
            expected = Some(parsed.len());
        }
        rows.push(parsed);
    }
    if rows.is_empty() {
        return Err(DataError::EmptyFile {
            path: path.to_path_buf(),
        });
    }
    Ok((rows, header))
}

fn read_to_string(path: &Path) -> Result<String, DataError> {
    fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a rectangular numeric CSV as a matrix.
pub fn load_matrix_csv<F: Scalar>(path: &Path) -> Result<DenseMatrix<F>, DataError> {
    let text = read_to_string(path)?;
    let (rows, _) = parse_csv_lines::<F>(path, &text)?;
    Ok(DenseMatrix::from_rows(&rows))
}

/// Reads a single-column numeric CSV as a vector.
pub fn load_vector_csv<F: Scalar>(path: &Path) -> Result<Vec<F>, DataError> {
    let text = read_to_string(path)?;
    let (rows, _) = parse_csv_lines::<F>(path, &text)?;
    for (i, r) in rows.iter().enumerate() {
        if r.len() != 1 {
            return Err(DataError::RaggedRow {
                path: path.to_path_buf(),
                line: i + 1,
                expected: 1,
                got: r.len(),
            });
        }
    }
    Ok(rows.into_iter().map(|r| r[0]).collect())
}

/// Loads a dataset from a matrix file plus either a separate response file
/// or, when `y_path` is `None`, the last column of the matrix file.
pub fn load_dataset<F: Scalar>(
    x_path: &Path,
    y_path: Option<&Path>,
) -> Result<Dataset<F>, DataError> {
    match y_path {
        Some(yp) => {
            let x = load_matrix_csv(x_path)?;
            let y = load_vector_csv(yp)?;
            Dataset::new(x, y)
        }
        None => {
            let text = read_to_string(x_path)?;
            let (mut rows, _) = parse_csv_lines::<F>(x_path, &text)?;
            let n = rows.first().map_or(0, Vec::len);
            if n < 2 {
                return Err(DataError::RaggedRow {
                    path: x_path.to_path_buf(),
                    line: 1,
                    expected: 2,
                    got: n,
                });
            }
            let y: Vec<F> = rows.iter_mut().map(|r| r.pop().unwrap()).collect();
            Dataset::new(DenseMatrix::from_rows(&rows), y)
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), DataError> {
    fs::write(path, contents).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes a matrix as plain CSV. `Display` formatting round-trips floats
/// exactly (shortest representation that parses back to the same value).
pub fn write_matrix_csv<F: Scalar>(path: &Path, m: &DenseMatrix<F>) -> Result<(), DataError> {
    let mut out = String::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", m.get(i, j));
        }
        out.push('\n');
    }
    write_file(path, &out)
}

pub fn write_vector_csv<F: Scalar>(path: &Path, v: &[F]) -> Result<(), DataError> {
    let mut out = String::new();
    for x in v {
        let _ = writeln!(out, "{x}");
    }
    write_file(path, &out)
}

/// Sidecar metadata of a generated bundle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub spec: SyntheticSpec,
    pub is_log_transformed: bool,
    pub centered: bool,
    /// True coefficients as sparse (index, value) pairs.
    pub x_true: Vec<(usize, f64)>,
}

/// Writes `X.csv`, `y.csv` and `meta.json` into `dir`.
pub fn write_bundle<F: Scalar>(
    dir: &Path,
    dataset: &Dataset<F>,
    x_true: &[F],
    spec: &SyntheticSpec,
) -> Result<(), DataError> {
    fs::create_dir_all(dir).map_err(|source| DataError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    write_matrix_csv(&dir.join("X.csv"), &dataset.x)?;
    write_vector_csv(&dir.join("y.csv"), &dataset.y)?;
    let meta = DatasetMeta {
        m: dataset.n_samples(),
        n: dataset.n_features(),
        seed: spec.seed,
        spec: spec.clone(),
        is_log_transformed: dataset.is_log_transformed,
        centered: dataset.column_means.is_some(),
        x_true: x_true
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != F::zero())
            .map(|(i, v)| (i, v.to_f64().unwrap()))
            .collect(),
    };
    let path = dir.join("meta.json");
    let json = serde_json::to_string_pretty(&meta).expect("meta serializes");
    let mut f = fs::File::create(&path).map_err(|source| DataError::Io {
        path: path.clone(),
        source,
    })?;
    f.write_all(json.as_bytes()).map_err(|source| DataError::Io {
        path,
        source,
    })?;
    Ok(())
}

pub fn read_meta(dir: &Path) -> Result<DatasetMeta, DataError> {
    let path = dir.join("meta.json");
    let text = read_to_string(&path)?;
    serde_json::from_str(&text).map_err(|e| DataError::Io {
        path,
        source: io::Error::new(io::ErrorKind::InvalidData, e),
    })
}
