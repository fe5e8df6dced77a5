//! Error metrics and Monte-Carlo reference statistics.

use serde::{Deserialize, Serialize};

use crate::distributions::ParameterSpace;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::qmc::mc_design;
use crate::summation::{compensated_sum, CompensatedSum};

fn check_shapes(a: &Matrix, b: &Matrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!(
            "{:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    if a.as_slice().is_empty() {
        return Err(Error::ShapeMismatch("no entries to compare".into()));
    }
    Ok(())
}

fn mse(pred: &Matrix, truth: &Matrix) -> f64 {
    let sq = pred.as_slice().iter().zip(truth.as_slice()).map(|(p, t)| (p - t) * (p - t));
    compensated_sum(sq) / pred.as_slice().len() as f64
}

/// Root mean squared difference over all `k·P` entries.
pub fn rmse(pred: &Matrix, truth: &Matrix) -> Result<f64> {
    check_shapes(pred, truth)?;
    Ok(mse(pred, truth).sqrt())
}

/// Mean squared error over the population variance of `truth` (all entries
/// pooled). `None` when `truth` is constant.
pub fn relative_mse(pred: &Matrix, truth: &Matrix) -> Result<Option<f64>> {
    check_shapes(pred, truth)?;
    let t = truth.as_slice();
    let n = t.len() as f64;
    let mean = compensated_sum(t.iter().copied()) / n;
    let var = compensated_sum(t.iter().map(|&v| (v - mean) * (v - mean))) / n;
    if !(var > 0.0) {
        return Ok(None);
    }
    Ok(Some(mse(pred, truth) / var))
}

/// `sqrt(Σ w_p (a_p − b_p)²)` with uniform `w_p = 1/P` unless given.
pub fn l2_field_error(a: &[f64], b: &[f64], weights: Option<&[f64]>) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!("fields of length {} and {}", a.len(), b.len())));
    }
    if let Some(w) = weights {
        if w.len() != a.len() {
            return Err(Error::ShapeMismatch(format!("{} weights for {} cells", w.len(), a.len())));
        }
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let uniform = 1.0 / a.len() as f64;
    let mut acc = CompensatedSum::default();
    for (p, (x, y)) in a.iter().zip(b).enumerate() {
        let w = weights.map_or(uniform, |w| w[p]);
        acc.add(w * (x - y) * (x - y));
    }
    Ok(acc.value().sqrt())
}

/// Per-cell running mean and sum of squared deviations (Welford), with the
/// pairwise merge for combining shards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunningStats {
    count: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl RunningStats {
    pub fn new(cells: usize) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; cells],
            m2: vec![0.0; cells],
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn push(&mut self, y: &[f64]) {
        assert_eq!(y.len(), self.mean.len(), "cell count");
        self.count += 1;
        let n = self.count as f64;
        for ((m, s), &v) in self.mean.iter_mut().zip(&mut self.m2).zip(y) {
            let d = v - *m;
            *m += d / n;
            *s += d * (v - *m);
        }
    }

    pub fn merge(&mut self, other: &RunningStats) -> Result<()> {
        if other.mean.len() != self.mean.len() {
            return Err(Error::ShapeMismatch("merging statistics of different widths".into()));
        }
        if other.count == 0 {
            return Ok(());
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        for p in 0..self.mean.len() {
            let d = other.mean[p] - self.mean[p];
            self.mean[p] += d * nb / n;
            self.m2[p] += other.m2[p] + d * d * na * nb / n;
        }
        self.count += other.count;
        Ok(())
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Sample standard deviation (`n − 1` denominator); zero below two rows.
    pub fn sd(&self) -> Vec<f64> {
        if self.count < 2 {
            return vec![0.0; self.mean.len()];
        }
        let d = (self.count - 1) as f64;
        self.m2.iter().map(|s| (s.max(0.0) / d).sqrt()).collect()
    }
}

/// Monte-Carlo mean and standard deviation per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceStats {
    pub count: u64,
    pub seed: Option<u64>,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl ReferenceStats {
    pub fn from_running(stats: &RunningStats, seed: Option<u64>) -> Self {
        Self {
            count: stats.count(),
            seed,
            mean: stats.mean().to_vec(),
            sd: stats.sd(),
        }
    }

    /// Statistics of the rows of an `n × P` output table.
    pub fn from_outputs(outputs: &Matrix, seed: Option<u64>) -> Self {
        let mut s = RunningStats::new(outputs.ncols());
        outputs.rows().for_each(|r| s.push(r));
        Self::from_running(&s, seed)
    }

    pub fn cells(&self) -> usize {
        self.mean.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.mean.len() != self.sd.len() {
            return Err(Error::ShapeMismatch("mean and sd lengths differ".into()));
        }
        if self.mean.iter().any(|v| !v.is_finite()) || self.sd.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Parse("reference statistics must be finite with sd ≥ 0".into()));
        }
        Ok(())
    }
}

/// Reference statistics from the first `n` rows of the MC stream `seed`.
/// Rows are generated in chunks to bound memory.
pub fn mc_reference<F>(evaluator: F, space: &ParameterSpace, n: usize, seed: u64) -> Result<ReferenceStats>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    const CHUNK: usize = 4096;
    let mut stats: Option<RunningStats> = None;
    let mut start = 0usize;
    while start < n {
        let len = CHUNK.min(n - start);
        let design = mc_design(space, start as u64, len, seed)?;
        for i in 0..len {
            let y = evaluator(design.row(i));
            let s = stats.get_or_insert_with(|| RunningStats::new(y.len()));
            if y.len() != s.mean.len() {
                return Err(Error::ShapeMismatch("evaluator returned varying output lengths".into()));
            }
            s.push(&y);
        }
        start += len;
    }
    Ok(ReferenceStats::from_running(&stats.unwrap_or_else(|| RunningStats::new(0)), Some(seed)))
}
