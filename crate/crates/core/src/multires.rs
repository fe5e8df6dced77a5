//! Dyadic multi-resolution machinery.
//!
//! Each input dimension is split into `2^Nr` equal-probability stochastic
//! subdomains (SDs). On every (dimension, bin) pair a data-driven orthonormal
//! basis is built from the training samples falling into that bin and scaled
//! by `2^(Nr/2)`, which makes the piecewise polynomials orthonormal on the
//! whole domain. The multivariate basis functions `Φ_{l,α}` are tensor
//! products over dimensions, supported on the single SD box `l`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::ParameterSpace;
use crate::error::{Error, Result};
use crate::polybasis::{build_basis_from_samples, OrthonormalBasis1D};
use crate::qmc::DesignMatrix;

/// Relative slack when comparing `Σ α_i^q` against `No^q`.
const QNORM_SLACK: f64 = 1e-10;

/// Where SD breakpoints come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantileSource {
    /// Empirical quantiles of the training design.
    #[default]
    Empirical,
    /// Quantiles of the declared marginal distributions.
    Marginal,
}

/// Per-dimension breakpoints of the dyadic partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    nr: u32,
    /// `breakpoints[j]` has `2^nr + 1` nondecreasing entries.
    breakpoints: Vec<Vec<f64>>,
    #[serde(default)]
    warnings: Vec<String>,
}

fn bins_for(nr: u32) -> Result<usize> {
    if nr >= 31 {
        return Err(Error::Overflow("2^Nr bins"));
    }
    Ok(1usize << nr)
}

impl Decomposition {
    /// Rebuilds from stored breakpoints, checking their shape.
    pub fn from_breakpoints(nr: u32, breakpoints: Vec<Vec<f64>>) -> Result<Self> {
        let bins = bins_for(nr)?;
        for (j, b) in breakpoints.iter().enumerate() {
            if b.len() != bins + 1 || b.iter().any(|x| !x.is_finite()) {
                return Err(Error::Decomposition {
                    dim: j,
                    reason: format!("expected {} finite breakpoints, got {}", bins + 1, b.len()),
                });
            }
            if b.windows(2).any(|w| !(w[0] <= w[1])) || (bins > 1 && b.windows(2).any(|w| w[0] >= w[1])) {
                return Err(Error::Decomposition {
                    dim: j,
                    reason: "breakpoints must increase".into(),
                });
            }
        }
        if breakpoints.is_empty() {
            return Err(Error::Decomposition {
                dim: 0,
                reason: "no dimensions".into(),
            });
        }
        Ok(Self {
            nr,
            breakpoints,
            warnings: Vec::new(),
        })
    }

    pub fn nr(&self) -> u32 {
        self.nr
    }

    pub fn dim(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn bins_per_dim(&self) -> usize {
        1usize << self.nr
    }

    pub fn breakpoints(&self, dim: usize) -> &[f64] {
        &self.breakpoints[dim]
    }

    /// Tie-induced imbalance notes collected while splitting.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Total number of SDs, `2^(M·Nr)`.
    pub fn num_subdomains(&self) -> Result<usize> {
        let bits = self.nr as usize * self.dim();
        if bits >= usize::BITS as usize - 1 {
            return Err(Error::Overflow("2^(M·Nr) subdomains"));
        }
        Ok(1usize << bits)
    }

    /// Bin of `x` in dimension `dim`; interior breakpoints belong to the upper
    /// bin, the last bin is closed. Values outside the outer breakpoints are
    /// clamped into the nearest bin and flagged.
    pub fn bin_of(&self, dim: usize, x: f64) -> (usize, bool) {
        let b = &self.breakpoints[dim];
        let bins = b.len() - 1;
        let k = b[1..bins].partition_point(|&e| e <= x);
        (k, x < b[0] || x > b[bins])
    }

    /// SD multi-index of `x` and whether any coordinate was clamped.
    pub fn locate(&self, x: &[f64]) -> (SdIndex, bool) {
        let mut clamped = false;
        let l = x
            .iter()
            .enumerate()
            .map(|(j, &xj)| {
                let (k, c) = self.bin_of(j, xj);
                clamped |= c;
                k as u32
            })
            .collect();
        (SdIndex(l), clamped)
    }

    /// Per-dimension, per-bin lists of design rows.
    pub fn membership(&self, design: &DesignMatrix) -> Vec<Vec<Vec<usize>>> {
        (0..self.dim())
            .map(|j| {
                let mut bins = vec![Vec::new(); self.bins_per_dim()];
                for i in 0..design.nrows() {
                    bins[self.bin_of(j, design.row(i)[j]).0].push(i);
                }
                bins
            })
            .collect()
    }
}

/// Dyadic split of every dimension at empirical quantiles `k / 2^nr`.
///
/// The split after the `c`-th smallest sample (`c = ceil(n k / 2^nr)`) is
/// placed midway between the `c`-th and `(c+1)`-th order statistics, so bin
/// membership matches the inverse-empirical-CDF quantile and no training
/// sample sits on an interior breakpoint. Ties that prevent the exact split
/// move it to the nearest feasible position and record a warning.
pub fn decompose(design: &DesignMatrix, nr: u32) -> Result<Decomposition> {
    let bins = bins_for(nr)?;
    let n = design.nrows();
    let mut breakpoints = Vec::with_capacity(design.dim());
    let mut warnings = Vec::new();
    for j in 0..design.dim() {
        let mut xs = design.values.column(j);
        if n == 0 {
            return Err(Error::Decomposition {
                dim: j,
                reason: "no samples".into(),
            });
        }
        xs.sort_by(f64::total_cmp);
        // feasible split counts c: xs[c-1] < xs[c]
        let feasible: Vec<usize> = (1..n).filter(|&c| xs[c - 1] < xs[c]).collect();
        if feasible.len() + 1 < bins {
            return Err(Error::Decomposition {
                dim: j,
                reason: format!(
                    "{} distinct values cannot fill {bins} bins",
                    feasible.len() + 1
                ),
            });
        }
        let mut b = Vec::with_capacity(bins + 1);
        b.push(xs[0]);
        let mut lower = 0usize; // index into `feasible` of the first usable split
        for k in 1..bins {
            let target = (n * k).div_ceil(bins);
            // keep enough feasible splits for the remaining bins
            let upper = feasible.len() - (bins - 1 - k) - 1;
            let pos = feasible[lower..=upper].partition_point(|&c| c < target) + lower;
            let pick = [pos.checked_sub(1), Some(pos)]
                .into_iter()
                .flatten()
                .filter(|&p| p >= lower && p <= upper)
                .min_by_key(|&p| feasible[p].abs_diff(target))
                .expect("non-empty feasible window");
            let c = feasible[pick];
            if c != target {
                warnings.push(format!(
                    "dimension {j}: ties moved split {k} from {target} to {c} samples"
                ));
            }
            b.push(0.5 * (xs[c - 1] + xs[c]));
            lower = pick + 1;
        }
        b.push(xs[n - 1]);
        breakpoints.push(b);
    }
    let mut dec = Decomposition::from_breakpoints(nr, breakpoints)?;
    dec.warnings = warnings;
    Ok(dec)
}

/// Dyadic split at the quantiles `k / 2^nr` of the declared marginals.
pub fn decompose_marginal(space: &ParameterSpace, nr: u32) -> Result<Decomposition> {
    let bins = bins_for(nr)?;
    let breakpoints = space
        .dims()
        .iter()
        .map(|p| {
            (0..=bins)
                .map(|k| p.dist.quantile(k as f64 / bins as f64))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Decomposition::from_breakpoints(nr, breakpoints)
}

/// SD multi-index `l = (l_1, …, l_M)`, each `l_j < 2^Nr`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SdIndex(pub Vec<u32>);

impl SdIndex {
    /// `Σ_j l_j · 2^(Nr·j)` (0-based `j`).
    pub fn linearize(&self, nr: u32) -> usize {
        self.0
            .iter()
            .enumerate()
            .map(|(j, &l)| (l as usize) << (nr as usize * j))
            .sum()
    }

    pub fn from_linear(lin: usize, m: usize, nr: u32) -> Self {
        let mask = (1usize << nr) - 1;
        SdIndex((0..m).map(|j| ((lin >> (nr as usize * j)) & mask) as u32).collect())
    }
}

/// `‖α‖_q = (Σ α_i^q)^(1/q)`.
pub fn q_norm(alpha: &[u32], q: f64) -> f64 {
    alpha
        .iter()
        .map(|&a| (a as f64).powf(q))
        .sum::<f64>()
        .powf(1.0 / q)
}

fn within_truncation(alpha: &[u32], no: u32, q: f64) -> bool {
    if q == 1.0 {
        return alpha.iter().map(|&a| a as u64).sum::<u64>() <= no as u64;
    }
    let lhs: f64 = alpha.iter().map(|&a| (a as f64).powf(q)).sum();
    lhs <= (no as f64).powf(q) * (1.0 + QNORM_SLACK)
}

/// Hyperbolically truncated set `{α : ‖α‖_q ≤ No}` in graded lexicographic
/// order (total degree first, then lexicographic).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeIndexSet {
    m: usize,
    no: u32,
    q: f64,
    indices: Vec<Vec<u32>>,
}

/// Enumerates the truncated degree set.
pub fn degree_set(m: usize, no: u32, q: f64) -> Result<DegreeIndexSet> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::InvalidTruncation(format!("q must lie in (0, 1], got {q}")));
    }
    if m == 0 {
        return Err(Error::InvalidTruncation("at least one dimension required".into()));
    }
    if m > 64 {
        return Err(Error::InvalidTruncation("at most 64 dimensions supported".into()));
    }
    let mut out = Vec::new();
    let mut cur = vec![0u32; m];
    fn rec(j: usize, cur: &mut Vec<u32>, no: u32, q: f64, out: &mut Vec<Vec<u32>>) {
        if j == cur.len() {
            out.push(cur.clone());
            return;
        }
        for a in 0..=no {
            cur[j] = a;
            // prefix check prunes: later zeros leave the norm unchanged
            let prefix_ok = within_truncation(&cur[..=j], no, q);
            if !prefix_ok {
                break;
            }
            rec(j + 1, cur, no, q, out);
        }
        cur[j] = 0;
    }
    rec(0, &mut cur, no, q, &mut out);
    out.sort_by(|a, b| {
        let (da, db): (u32, u32) = (a.iter().sum(), b.iter().sum());
        da.cmp(&db).then_with(|| a.cmp(b))
    });
    Ok(DegreeIndexSet {
        m,
        no,
        q,
        indices: out,
    })
}

impl DegreeIndexSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn max_degree(&self) -> u32 {
        self.no
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn get(&self, i: usize) -> &[u32] {
        &self.indices[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> {
        self.indices.iter().map(|v| v.as_slice())
    }

    pub fn position(&self, alpha: &[u32]) -> Option<usize> {
        self.indices.iter().position(|a| a.as_slice() == alpha)
    }

    /// Bit `j` set iff `α_j > 0`.
    pub fn support_mask(&self, i: usize) -> u64 {
        self.indices[i]
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0)
            .fold(0u64, |m, (j, _)| m | (1 << j))
    }

    pub fn contains(&self, alpha: &[u32]) -> bool {
        self.position(alpha).is_some()
    }
}

fn binomial(n: u64, k: u64) -> Option<u64> {
    let k = k.min(n - k);
    let mut r: u64 = 1;
    for i in 1..=k {
        // r * (n - k + i) / i stays integral at every step
        r = r.checked_mul(n - k + i)? / i;
    }
    Some(r)
}

/// Full-tensor coefficient count `2^(M·Nr) · (No+M)! / (No!·M!)`.
pub fn ncf(m: u32, nr: u32, no: u32) -> Result<u64> {
    let per_sd = binomial(no as u64 + m as u64, m as u64).ok_or(Error::Overflow("N_cf"))?;
    let shift = m.checked_mul(nr).filter(|&s| s < 64).ok_or(Error::Overflow("N_cf"))?;
    per_sd
        .checked_mul(1u64 << shift)
        .ok_or(Error::Overflow("N_cf"))
}

/// Per-dimension, per-bin orthonormal bases plus the partition they live on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseBasis {
    decomposition: Decomposition,
    degree: u32,
    /// `bases[j][bin]`.
    bases: Vec<Vec<OrthonormalBasis1D>>,
}

/// Builds the bin bases from the design rows in each (dimension, bin).
pub fn build_piecewise_basis(design: &DesignMatrix, dec: &Decomposition, no: u32) -> Result<PiecewiseBasis> {
    if design.dim() != dec.dim() {
        return Err(Error::DimensionMismatch {
            expected: dec.dim(),
            actual: design.dim(),
        });
    }
    let membership = dec.membership(design);
    let jobs: Vec<(usize, usize)> = (0..dec.dim())
        .flat_map(|j| (0..dec.bins_per_dim()).map(move |b| (j, b)))
        .collect();
    let built: Vec<Result<OrthonormalBasis1D>> = jobs
        .par_iter()
        .map(|&(j, b)| {
            let rows = &membership[j][b];
            let xs: Vec<f64> = rows.iter().map(|&i| design.row(i)[j]).collect();
            if xs.is_empty() {
                return Err(Error::BinBasis {
                    dim: j,
                    bin: b,
                    source: Box::new(Error::TooFewSamples { needed: 1, got: 0 }),
                });
            }
            build_basis_from_samples(&xs, None, no as usize).map_err(|e| Error::BinBasis {
                dim: j,
                bin: b,
                source: Box::new(e),
            })
        })
        .collect();
    let mut bases = vec![Vec::with_capacity(dec.bins_per_dim()); dec.dim()];
    for ((j, _), r) in jobs.into_iter().zip(built) {
        bases[j].push(r?);
    }
    Ok(PiecewiseBasis {
        decomposition: dec.clone(),
        degree: no,
        bases,
    })
}

impl PiecewiseBasis {
    /// Reassembles a stored basis; every dimension needs one basis per bin,
    /// each of degree `degree`.
    pub fn from_parts(decomposition: Decomposition, degree: u32, bases: Vec<Vec<OrthonormalBasis1D>>) -> Result<Self> {
        if bases.len() != decomposition.dim()
            || bases.iter().any(|b| {
                b.len() != decomposition.bins_per_dim()
                    || b.iter().any(|p| p.degree() != degree as usize)
            })
        {
            return Err(Error::Parse("piecewise basis does not match its decomposition".into()));
        }
        Ok(Self {
            decomposition,
            degree,
            bases,
        })
    }

    pub fn decomposition(&self) -> &Decomposition {
        &self.decomposition
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.bases.len()
    }

    pub fn nr(&self) -> u32 {
        self.decomposition.nr
    }

    pub fn bin_basis(&self, dim: usize, bin: usize) -> &OrthonormalBasis1D {
        &self.bases[dim][bin]
    }

    pub fn bases(&self) -> &[Vec<OrthonormalBasis1D>] {
        &self.bases
    }

    /// Largest per-bin Gram deviation.
    pub fn gram_tol(&self) -> f64 {
        self.bases
            .iter()
            .flatten()
            .map(|b| b.gram_error())
            .fold(0.0, f64::max)
    }

    /// Global normalization `2^(Nr/2)` applied per dimension.
    pub fn dim_scale(&self) -> f64 {
        (0.5 * self.nr() as f64).exp2()
    }

    /// Evaluates every `Φ_{l,α}(x)`, `α ∈ degrees`, for the SD `l` containing
    /// `x`. Returns `(lin(l), clamped, values)`; all other SDs vanish at `x`.
    pub fn eval(&self, x: &[f64], degrees: &DegreeIndexSet) -> (usize, bool, Vec<f64>) {
        let mut out = vec![0.0; degrees.len()];
        let (lin, clamped) = self.eval_into(x, degrees, &mut out);
        (lin, clamped, out)
    }

    pub fn eval_into(&self, x: &[f64], degrees: &DegreeIndexSet, out: &mut [f64]) -> (usize, bool) {
        let (l, clamped) = self.decomposition.locate(x);
        let scale = self.dim_scale();
        let width = self.degree as usize + 1;
        let mut uni = vec![0.0; self.dim() * width];
        for (j, (&xj, &lj)) in x.iter().zip(&l.0).enumerate() {
            let v = &mut uni[j * width..(j + 1) * width];
            self.bases[j][lj as usize].eval_into(xj, v);
            v.iter_mut().for_each(|e| *e *= scale);
        }
        for (o, alpha) in out.iter_mut().zip(degrees.iter()) {
            *o = alpha
                .iter()
                .enumerate()
                .map(|(j, &a)| uni[j * width + a as usize])
                .product();
        }
        (l.linearize(self.nr()), clamped)
    }

    /// `Φ_{l,α}(x)` for an explicit `(l, α)`; zero when `x ∉ SD_l`.
    pub fn eval_single(&self, l: &SdIndex, alpha: &[u32], x: &[f64]) -> f64 {
        let (at, _) = self.decomposition.locate(x);
        if &at != l {
            return 0.0;
        }
        let scale = self.dim_scale();
        alpha
            .iter()
            .enumerate()
            .map(|(j, &a)| scale * self.bases[j][l.0[j] as usize].eval(x[j])[a as usize])
            .product()
    }
}
