//! Moments and variance-based sensitivity indices from expansion coefficients.
//!
//! For aMR-PC the zero-degree coefficients carry variance between SDs. Work
//! with centred coefficients `c'_{l,0} = c_{l,0} − avg_l c_{l,0}` and the
//! closed variances
//!
//! ```text
//! T_J = 2^(−Nr·(M−|J|)) Σ_{l_J} Σ_{α: supp α ⊆ J} ( Σ_{l : l_J fixed} c'_{l,α} )²
//! ```
//!
//! which equal `Var(E[Y | ζ_J])` of the surrogate. Partial variances follow by
//! inclusion–exclusion, `σ²_I = Σ_{J⊆I} (−1)^{|I∖J|} T_J`, and totals by
//! `σ² − T_{N∖{i}}`. At `Nr = 0` everything collapses to sums of squared
//! coefficients over support sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::ParameterSpace;
use crate::error::{Error, Result};
use crate::qmc::{map_design, mc_points, Provenance};
use crate::summation::CompensatedSum;
use crate::surrogate::{Grid, SurrogateModel};

pub const DEFAULT_VAR_FLOOR: f64 = 1e-10;
/// Negative indices below `-TOL_NEG` are counted in the report.
pub const TOL_NEG: f64 = 1e-8;
/// Full interaction enumeration is limited to this many dimensions.
pub const MAX_ENUMERATION_DIM: usize = 12;
pub const REPORT_VERSION: u32 = 1;

/// Nonempty sorted set of 0-based dimension indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IndexSubset(Vec<usize>);

impl IndexSubset {
    pub fn new(mut dims: Vec<usize>, m: usize) -> Result<Self> {
        dims.sort_unstable();
        dims.dedup();
        if dims.is_empty() {
            return Err(Error::InvalidSubset("empty subset".into()));
        }
        if let Some(&d) = dims.iter().find(|&&d| d >= m) {
            return Err(Error::InvalidSubset(format!("dimension {d} outside 0..{m}")));
        }
        if m > 64 {
            return Err(Error::InvalidSubset("at most 64 dimensions supported".into()));
        }
        Ok(Self(dims))
    }

    pub fn single(i: usize, m: usize) -> Result<Self> {
        Self::new(vec![i], m)
    }

    pub fn from_mask(mask: u64) -> Self {
        Self((0..64).filter(|j| mask >> j & 1 == 1).collect())
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn mask(&self) -> u64 {
        self.0.iter().fold(0, |m, &j| m | 1 << j)
    }

    /// Parameter names joined by `,`.
    pub fn label(&self, names: &[String]) -> String {
        self.0.iter().map(|&j| names[j].as_str()).collect::<Vec<_>>().join(",")
    }
}

fn zero_scale(model: &SurrogateModel) -> f64 {
    (-(model.dim() as f64) * model.meta.nr as f64 / 2.0).exp2()
}

/// `Σ_l c_{l,0} · 2^(−M·Nr/2)` per cell.
pub fn mean_from_coeffs(model: &SurrogateModel) -> Vec<f64> {
    let (nsd, k) = (model.num_subdomains(), model.coeffs_per_sd());
    let s = zero_scale(model);
    (0..model.cells())
        .map(|cell| {
            let c = model.cell_coefficients(cell);
            let mut acc = CompensatedSum::default();
            (0..nsd).for_each(|l| acc.add(c[l * k]));
            acc.value() * s
        })
        .collect()
}

/// Coefficients of one cell with zero-degree terms centred.
fn centred(model: &SurrogateModel, cell: usize) -> Vec<f64> {
    let (nsd, k) = (model.num_subdomains(), model.coeffs_per_sd());
    let mut c = model.cell_coefficients(cell).to_vec();
    let mut acc = CompensatedSum::default();
    (0..nsd).for_each(|l| acc.add(c[l * k]));
    let avg = acc.value() / nsd as f64;
    (0..nsd).for_each(|l| c[l * k] -= avg);
    c
}

fn sum_sq(values: impl Iterator<Item = f64>) -> f64 {
    let mut acc = CompensatedSum::default();
    values.for_each(|v| acc.add(v * v));
    acc.value()
}

/// `Σ_l Σ_α c²_{l,α} − mean²` per cell, evaluated in centred form so it is
/// exactly zero for constant fits. Never negative.
pub fn variance_from_coeffs(model: &SurrogateModel) -> Vec<f64> {
    (0..model.cells())
        .into_par_iter()
        .map(|cell| sum_sq(centred(model, cell).into_iter()))
        .collect()
}

/// Precomputed bookkeeping for the closed variance of one subset `J`.
struct ClosedPlan {
    alphas: Vec<usize>,
    /// `lin & lin_mask` projects an SD index onto the dimensions in `J`.
    lin_mask: usize,
    factor: f64,
}

fn closed_plan(model: &SurrogateModel, jmask: u64) -> ClosedPlan {
    let (m, nr) = (model.dim(), model.meta.nr as usize);
    let alphas = (0..model.coeffs_per_sd())
        .filter(|&a| model.degrees.support_mask(a) & !jmask == 0)
        .collect();
    let bin_bits = (1usize << nr) - 1;
    let lin_mask = (0..m)
        .filter(|j| jmask >> j & 1 == 1)
        .fold(0usize, |acc, j| acc | bin_bits << (nr * j));
    let outside = m - jmask.count_ones() as usize;
    ClosedPlan {
        alphas,
        lin_mask,
        factor: (-((nr * outside) as f64)).exp2(),
    }
}

fn closed_from_centred(c: &[f64], nsd: usize, k: usize, plan: &ClosedPlan, scratch: &mut Vec<f64>) -> f64 {
    let na = plan.alphas.len();
    scratch.clear();
    scratch.resize(nsd * na, 0.0);
    for lin in 0..nsd {
        let key = lin & plan.lin_mask;
        for (t, &a) in plan.alphas.iter().enumerate() {
            scratch[key * na + t] += c[lin * k + a];
        }
    }
    plan.factor * sum_sq(scratch.iter().copied())
}

/// `T_J = Var(E[Y | ζ_J])` per cell; `jmask` bit `j` selects dimension `j`.
pub fn closed_variance(model: &SurrogateModel, jmask: u64) -> Vec<f64> {
    let plan = closed_plan(model, jmask);
    let (nsd, k) = (model.num_subdomains(), model.coeffs_per_sd());
    (0..model.cells())
        .into_par_iter()
        .map(|cell| {
            let mut scratch = Vec::new();
            closed_from_centred(&centred(model, cell), nsd, k, &plan, &mut scratch)
        })
        .collect()
}

fn submasks(mask: u64) -> impl Iterator<Item = u64> {
    // all submasks including 0 and `mask` itself
    let mut sub = mask;
    let mut done = false;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let cur = sub;
        if sub == 0 {
            done = true;
        } else {
            sub = (sub - 1) & mask;
        }
        Some(cur)
    })
}

fn check_subset(model: &SurrogateModel, subset: &IndexSubset) -> Result<()> {
    match subset.dims().last() {
        Some(&d) if d < model.dim() => Ok(()),
        Some(&d) => Err(Error::InvalidSubset(format!("dimension {d} outside 0..{}", model.dim()))),
        None => Err(Error::InvalidSubset("empty subset".into())),
    }
}

/// Unnormalized ANOVA partial variance `σ²_I` per cell.
pub fn amrpc_variance_index(model: &SurrogateModel, subset: &IndexSubset) -> Result<Vec<f64>> {
    check_subset(model, subset)?;
    let imask = subset.mask();
    let plans: Vec<(f64, ClosedPlan)> = submasks(imask)
        .filter(|&j| j != 0)
        .map(|j| {
            let sign = if (imask & !j).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
            (sign, closed_plan(model, j))
        })
        .collect();
    let (nsd, k) = (model.num_subdomains(), model.coeffs_per_sd());
    Ok((0..model.cells())
        .into_par_iter()
        .map(|cell| {
            let c = centred(model, cell);
            let mut scratch = Vec::new();
            let mut acc = CompensatedSum::default();
            for (sign, plan) in &plans {
                acc.add(sign * closed_from_centred(&c, nsd, k, plan, &mut scratch));
            }
            acc.value()
        })
        .collect())
}

fn normalize(num: Vec<f64>, var: &[f64], var_floor: f64) -> Vec<f64> {
    num.into_iter()
        .zip(var)
        .map(|(n, &v)| if v >= var_floor && v > 0.0 { n / v } else { f64::NAN })
        .collect()
}

/// `S_I = σ²_I / σ²`; `NaN` where `σ² < var_floor`.
pub fn amrpc_sobol(model: &SurrogateModel, subset: &IndexSubset, var_floor: f64) -> Result<Vec<f64>> {
    let num = amrpc_variance_index(model, subset)?;
    Ok(normalize(num, &variance_from_coeffs(model), var_floor))
}

/// `S^T_i = 1 − T_{N∖{i}} / σ²`; `NaN` where `σ² < var_floor`.
pub fn amrpc_total(model: &SurrogateModel, i: usize, var_floor: f64) -> Result<Vec<f64>> {
    let m = model.dim();
    if i >= m {
        return Err(Error::InvalidSubset(format!("dimension {i} outside 0..{m}")));
    }
    let full = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    let var = variance_from_coeffs(model);
    let rest = closed_variance(model, full & !(1 << i));
    let num = var.iter().zip(&rest).map(|(v, r)| v - r).collect();
    Ok(normalize(num, &var, var_floor))
}

fn require_pce(model: &SurrogateModel) -> Result<()> {
    if model.meta.nr != 0 {
        return Err(Error::WrongMethod(model.meta.nr));
    }
    Ok(())
}

fn pce_partial(model: &SurrogateModel, keep: impl Fn(u64) -> bool, var_floor: f64) -> Vec<f64> {
    let k = model.coeffs_per_sd();
    let chosen: Vec<usize> = (1..k).filter(|&a| keep(model.degrees.support_mask(a))).collect();
    let num = (0..model.cells())
        .map(|cell| {
            let c = model.cell_coefficients(cell);
            sum_sq(chosen.iter().map(|&a| c[a]))
        })
        .collect();
    normalize(num, &variance_from_coeffs(model), var_floor)
}

/// Sobol' index from squared coefficients whose support is exactly `I`.
pub fn pce_sobol(model: &SurrogateModel, subset: &IndexSubset, var_floor: f64) -> Result<Vec<f64>> {
    require_pce(model)?;
    check_subset(model, subset)?;
    let mask = subset.mask();
    Ok(pce_partial(model, |s| s == mask, var_floor))
}

/// Total index from every squared coefficient with `α_i > 0`.
pub fn pce_total(model: &SurrogateModel, i: usize, var_floor: f64) -> Result<Vec<f64>> {
    require_pce(model)?;
    if i >= model.dim() {
        return Err(Error::InvalidSubset(format!("dimension {i} outside 0..{}", model.dim())));
    }
    Ok(pce_partial(model, |s| s >> i & 1 == 1, var_floor))
}

/// All `2^M − 1` partial variances per cell, indexed by mask (entry 0 unused).
pub fn all_variance_indices(model: &SurrogateModel) -> Result<Vec<Vec<f64>>> {
    let m = model.dim();
    if m > MAX_ENUMERATION_DIM {
        return Err(Error::InvalidSubset(format!(
            "full enumeration limited to {MAX_ENUMERATION_DIM} dimensions, model has {m}"
        )));
    }
    let nmask = 1usize << m;
    let plans: Vec<ClosedPlan> = (0..nmask as u64).map(|j| closed_plan(model, j)).collect();
    let (nsd, k) = (model.num_subdomains(), model.coeffs_per_sd());
    let per_cell: Vec<Vec<f64>> = (0..model.cells())
        .into_par_iter()
        .map(|cell| {
            let c = centred(model, cell);
            let mut scratch = Vec::new();
            let mut f: Vec<f64> = plans
                .iter()
                .map(|p| closed_from_centred(&c, nsd, k, p, &mut scratch))
                .collect();
            f[0] = 0.0;
            // Möbius inversion over the subset lattice
            for b in 0..m {
                for mask in 0..nmask {
                    if mask >> b & 1 == 1 {
                        f[mask] -= f[mask ^ (1 << b)];
                    }
                }
            }
            f
        })
        .collect();
    // transpose to mask-major
    Ok((0..nmask)
        .map(|mask| per_cell.iter().map(|f| f[mask]).collect())
        .collect())
}

/// Type-7 quantile of sorted data.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Five-number summary with Tukey whiskers at 1.5·IQR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSummary {
    pub min: f64,
    pub whisker_low: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_high: f64,
    pub max: f64,
    pub outliers: Vec<f64>,
}

impl BoxSummary {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut s = values.to_vec();
        s.sort_by(f64::total_cmp);
        let (q1, median, q3) = (quantile_sorted(&s, 0.25), quantile_sorted(&s, 0.5), quantile_sorted(&s, 0.75));
        let iqr = q3 - q1;
        let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
        let inside: Vec<f64> = s.iter().copied().filter(|v| (lo_fence..=hi_fence).contains(v)).collect();
        Some(Self {
            min: s[0],
            whisker_low: inside.first().copied().unwrap_or(q1),
            q1,
            median,
            q3,
            whisker_high: inside.last().copied().unwrap_or(q3),
            max: s[s.len() - 1],
            outliers: s.into_iter().filter(|v| !(lo_fence..=hi_fence).contains(v)).collect(),
        })
    }
}

/// Cells whose variance reaches the floor.
pub fn retained_cells(variance: &[f64], var_floor: f64) -> Vec<usize> {
    variance
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= var_floor)
        .map(|(i, _)| i)
        .collect()
}

/// Average of one index field over retained cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceAverage {
    pub retained: usize,
    /// `None` when no cell is retained.
    pub mean: Option<f64>,
    pub summary: Option<BoxSummary>,
}

impl SpaceAverage {
    pub fn is_empty(&self) -> bool {
        self.retained == 0
    }
}

pub fn space_average(field: &[f64], variance: &[f64], var_floor: f64) -> SpaceAverage {
    let vals: Vec<f64> = retained_cells(variance, var_floor)
        .into_iter()
        .map(|i| field[i])
        .filter(|v| v.is_finite())
        .collect();
    let mean = if vals.is_empty() {
        None
    } else {
        let mut acc = CompensatedSum::default();
        vals.iter().for_each(|&v| acc.add(v));
        Some(acc.value() / vals.len() as f64)
    };
    SpaceAverage {
        retained: vals.len(),
        mean,
        summary: BoxSummary::from_values(&vals),
    }
}

/// Which indices `analyze` computes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub var_floor: f64,
    pub first_order: bool,
    pub total: bool,
    /// Every subset with two or more dimensions (needs `M ≤ 12`).
    pub interactions: bool,
    /// Extra subsets computed on request.
    pub subsets: Vec<IndexSubset>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            var_floor: DEFAULT_VAR_FLOOR,
            first_order: true,
            total: true,
            interactions: false,
            subsets: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexField {
    pub label: String,
    pub dims: Vec<usize>,
    /// `null` for cells below the variance floor.
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedIndex {
    pub label: String,
    #[serde(flatten)]
    pub average: SpaceAverage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceAveraged {
    pub retained_cells: usize,
    pub excluded_cells: usize,
    pub empty: bool,
    pub first_order: Vec<AveragedIndex>,
    pub total: Vec<AveragedIndex>,
    pub interactions: Vec<AveragedIndex>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub version: u32,
    pub parameters: Vec<String>,
    pub nr: u32,
    pub no: u32,
    pub q: f64,
    pub n_train: usize,
    pub var_floor: f64,
    pub tol_neg: f64,
    pub cells: usize,
    pub grid: Option<Grid>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub meta: ReportMeta,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub first_order: Vec<IndexField>,
    pub total: Vec<IndexField>,
    pub interactions: Vec<IndexField>,
    /// Count of reported index values below `-tol_neg`.
    pub negative_indices: usize,
    pub space_averaged: SpaceAveraged,
}

fn to_field(label: String, dims: Vec<usize>, values: Vec<f64>) -> IndexField {
    IndexField {
        label,
        dims,
        values: values.into_iter().map(|v| v.is_finite().then_some(v)).collect(),
    }
}

fn averaged(fields: &[IndexField], variance: &[f64], var_floor: f64) -> Vec<AveragedIndex> {
    fields
        .iter()
        .map(|f| {
            let vals: Vec<f64> = f.values.iter().map(|v| v.unwrap_or(f64::NAN)).collect();
            AveragedIndex {
                label: f.label.clone(),
                average: space_average(&vals, variance, var_floor),
            }
        })
        .collect()
}

/// Mean, variance and the requested indices for every cell.
pub fn analyze(model: &SurrogateModel, opts: &AnalysisOptions) -> Result<SensitivityReport> {
    let m = model.dim();
    let names = &model.meta.parameter_names;
    let floor = opts.var_floor;
    if !(floor >= 0.0) {
        return Err(Error::Config(format!("var_floor must be nonnegative, got {floor}")));
    }
    let variance = variance_from_coeffs(model);
    let enumerate_all = opts.interactions || (opts.first_order && m <= MAX_ENUMERATION_DIM);
    let all = if enumerate_all {
        Some(all_variance_indices(model)?)
    } else {
        None
    };
    let partial = |s: &IndexSubset| -> Result<Vec<f64>> {
        match &all {
            Some(a) => Ok(normalize(a[s.mask() as usize].clone(), &variance, floor)),
            None => amrpc_sobol(model, s, floor),
        }
    };
    let mut first_order = Vec::new();
    if opts.first_order {
        for i in 0..m {
            let s = IndexSubset::single(i, m)?;
            first_order.push(to_field(names[i].clone(), vec![i], partial(&s)?));
        }
    }
    let mut total = Vec::new();
    if opts.total {
        for i in 0..m {
            total.push(to_field(names[i].clone(), vec![i], amrpc_total(model, i, floor)?));
        }
    }
    let mut subsets: Vec<IndexSubset> = Vec::new();
    if opts.interactions {
        subsets.extend(
            (1..1u64 << m)
                .filter(|s| s.count_ones() >= 2)
                .map(IndexSubset::from_mask),
        );
        subsets.sort_by(|a, b| a.dims().len().cmp(&b.dims().len()).then_with(|| a.cmp(b)));
    }
    for s in &opts.subsets {
        check_subset(model, s)?;
        if s.dims().len() >= 2 && !subsets.contains(s) {
            subsets.push(s.clone());
        }
    }
    let interactions = subsets
        .iter()
        .map(|s| Ok(to_field(s.label(names), s.dims().to_vec(), partial(s)?)))
        .collect::<Result<Vec<_>>>()?;

    let negative_indices = first_order
        .iter()
        .chain(&total)
        .chain(&interactions)
        .flat_map(|f| f.values.iter().flatten())
        .filter(|&&v| v < -TOL_NEG)
        .count();
    let retained = retained_cells(&variance, floor).len();
    let space_averaged = SpaceAveraged {
        retained_cells: retained,
        excluded_cells: model.cells() - retained,
        empty: retained == 0,
        first_order: averaged(&first_order, &variance, floor),
        total: averaged(&total, &variance, floor),
        interactions: averaged(&interactions, &variance, floor),
    };
    Ok(SensitivityReport {
        meta: ReportMeta {
            version: REPORT_VERSION,
            parameters: names.clone(),
            nr: model.meta.nr,
            no: model.meta.no,
            q: model.meta.q,
            n_train: model.meta.n_train,
            var_floor: floor,
            tol_neg: TOL_NEG,
            cells: model.cells(),
            grid: model.meta.grid.clone(),
        },
        mean: mean_from_coeffs(model),
        variance,
        first_order,
        total,
        interactions,
        negative_indices,
        space_averaged,
    })
}

/// Settings of the pick-freeze Monte-Carlo estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    pub n: usize,
    pub seed: u64,
    pub bootstrap: usize,
    pub var_floor: f64,
}

impl OracleOptions {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            seed,
            bootstrap: 200,
            var_floor: DEFAULT_VAR_FLOOR,
        }
    }
}

/// Point estimate with bootstrap spread for one (dimension, cell).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Estimate {
    const UNDEFINED: Estimate = Estimate {
        value: f64::NAN,
        std_error: f64::NAN,
        ci_low: f64::NAN,
        ci_high: f64::NAN,
    };

    pub fn is_defined(&self) -> bool {
        self.value.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub n: usize,
    pub seed: u64,
    pub variance: Vec<f64>,
    pub defined: Vec<bool>,
    /// `first[i][cell]`.
    pub first: Vec<Vec<Estimate>>,
    pub total: Vec<Vec<Estimate>>,
}

pub const MIN_ORACLE_SAMPLES: usize = 64;
const BOOTSTRAP_STREAM: u64 = 0x5851_f42d_4c95_7f2d;

/// Raw sums for one (dimension, cell) over a resample of row indices.
fn pick_freeze(fa: &[f64], fb: &[f64], fab: &[f64], idx: impl Iterator<Item = usize> + Clone) -> (f64, f64, f64) {
    let (mut s_all, mut s2_all, mut cnt) = (CompensatedSum::default(), CompensatedSum::default(), 0usize);
    let (mut first, mut total) = (CompensatedSum::default(), CompensatedSum::default());
    let mut mean_acc = CompensatedSum::default();
    for i in idx.clone() {
        mean_acc.add(fa[i] + fb[i]);
        cnt += 2;
    }
    let mu = mean_acc.value() / cnt as f64;
    let n = (cnt / 2) as f64;
    for i in idx {
        let (a, b) = (fa[i] - mu, fb[i] - mu);
        s_all.add(a + b);
        s2_all.add(a * a + b * b);
        first.add(fb[i] * (fab[i] - fa[i]));
        let d = fa[i] - fab[i];
        total.add(d * d);
    }
    let var = s2_all.value() / cnt as f64 - (s_all.value() / cnt as f64).powi(2);
    (var, first.value() / n, total.value() / (2.0 * n))
}

fn estimate(point: f64, boots: &mut [f64]) -> Estimate {
    boots.sort_by(f64::total_cmp);
    let nb = boots.len() as f64;
    let mean = boots.iter().sum::<f64>() / nb;
    let sd = (boots.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (nb - 1.0).max(1.0)).sqrt();
    Estimate {
        value: point,
        std_error: sd,
        ci_low: quantile_sorted(boots, 0.025),
        ci_high: quantile_sorted(boots, 0.975),
    }
}

/// Saltelli first-order and Jansen total estimators with bootstrap
/// intervals. Costs `n · (M + 2)` evaluations.
pub fn mc_sobol_oracle<F>(evaluator: F, space: &ParameterSpace, opts: &OracleOptions) -> Result<OracleResult>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    let (n, m) = (opts.n, space.len());
    if n < MIN_ORACLE_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_ORACLE_SAMPLES,
            got: n,
        });
    }
    let doubled = ParameterSpace::new(
        space
            .dims()
            .iter()
            .chain(space.dims())
            .enumerate()
            .map(|(j, p)| crate::distributions::Parameter {
                name: format!("{}#{j}", p.name),
                dist: p.dist,
            })
            .collect(),
    )?;
    let ab = map_design(&mc_points(2 * m, n, opts.seed), &doubled, Provenance::Mc { seed: opts.seed })?;
    let eval_rows = |make: &(dyn Fn(usize) -> Vec<f64> + Sync)| -> Vec<Vec<f64>> {
        (0..n).into_par_iter().map(|i| evaluator(&make(i))).collect()
    };
    let fa = eval_rows(&|i| ab.row(i)[..m].to_vec());
    let fb = eval_rows(&|i| ab.row(i)[m..].to_vec());
    let p = fa.first().map_or(0, Vec::len);
    if fa.iter().chain(&fb).any(|r| r.len() != p) {
        return Err(Error::ShapeMismatch("evaluator returned varying output lengths".into()));
    }
    let fab: Vec<Vec<Vec<f64>>> = (0..m)
        .map(|j| {
            eval_rows(&|i| {
                let mut x = ab.row(i)[..m].to_vec();
                x[j] = ab.row(i)[m + j];
                x
            })
        })
        .collect();
    let col = |rows: &[Vec<f64>], c: usize| -> Vec<f64> { rows.iter().map(|r| r[c]).collect() };

    let resamples: Vec<Vec<usize>> = (0..opts.bootstrap)
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ BOOTSTRAP_STREAM);
            rng.set_stream(b as u64 + 1);
            (0..n).map(|_| rng.random_range(0..n)).collect()
        })
        .collect();

    let mut variance = Vec::with_capacity(p);
    let mut defined = Vec::with_capacity(p);
    let mut first = vec![Vec::with_capacity(p); m];
    let mut total = vec![Vec::with_capacity(p); m];
    for cell in 0..p {
        let (a, b) = (col(&fa, cell), col(&fb, cell));
        let per_dim: Vec<(f64, Estimate, Estimate)> = (0..m)
            .into_par_iter()
            .map(|j| {
                let ab_j = col(&fab[j], cell);
                let (var, d1, dt) = pick_freeze(&a, &b, &ab_j, 0..n);
                if !(var >= opts.var_floor && var > 0.0) {
                    return (var, Estimate::UNDEFINED, Estimate::UNDEFINED);
                }
                let (mut b1, mut bt): (Vec<f64>, Vec<f64>) = resamples
                    .iter()
                    .map(|idx| {
                        let (v, s1, st) = pick_freeze(&a, &b, &ab_j, idx.iter().copied());
                        (s1 / v, st / v)
                    })
                    .unzip();
                (var, estimate(d1 / var, &mut b1), estimate(dt / var, &mut bt))
            })
            .collect();
        let var = per_dim.first().map_or(0.0, |t| t.0);
        variance.push(var);
        defined.push(var >= opts.var_floor && var > 0.0);
        for (j, (_, s1, st)) in per_dim.into_iter().enumerate() {
            first[j].push(s1);
            total[j].push(st);
        }
    }
    Ok(OracleResult {
        n,
        seed: opts.seed,
        variance,
        defined,
        first,
        total,
    })
}
