//! Least-squares fitting and evaluation of aPC / aMR-PC surrogates.
//!
//! Every output cell gets its own expansion over the same basis. Because the
//! piecewise basis functions vanish outside their SD, the regression splits
//! into one independent block per SD; each block is factored once by SVD and
//! the pseudoinverse is applied to all cells at once.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::multires::{
    build_piecewise_basis, decompose, decompose_marginal, degree_set, DegreeIndexSet, PiecewiseBasis,
    QuantileSource, SdIndex,
};
use crate::polybasis::{build_basis_from_samples, OrthonormalBasis1D};
use crate::qmc::{DesignMatrix, Provenance};
use crate::summation::CompensatedSum;
use crate::distributions::ParameterSpace;

/// Default relative singular-value cutoff of the block pseudoinverse.
pub const DEFAULT_RCOND: f64 = 1e-10;

/// Layout of the output cells. Cell index is
/// `component · rows · cols + row · cols + col`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub rows: usize,
    pub cols: usize,
    pub components: Vec<String>,
}

impl Grid {
    pub fn new(rows: usize, cols: usize, components: Vec<String>) -> Result<Self> {
        if rows == 0 || cols == 0 || components.is_empty() {
            return Err(Error::ShapeMismatch("grid needs rows, cols and components".into()));
        }
        Ok(Self { rows, cols, components })
    }

    pub fn cells(&self) -> usize {
        self.rows * self.cols * self.components.len()
    }

    /// `(component, row, col)` of a flat cell index.
    pub fn position(&self, cell: usize) -> (usize, usize, usize) {
        let per = self.rows * self.cols;
        (cell / per, (cell % per) / self.cols, cell % self.cols)
    }
}

/// Paired inputs and field outputs of `n` model runs.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub design: DesignMatrix,
    /// `n × P`, row `i` is the field produced by design row `i`.
    pub outputs: Matrix,
    pub cell_names: Vec<String>,
    pub grid: Option<Grid>,
}

impl TrainingSet {
    pub fn new(design: DesignMatrix, outputs: Matrix) -> Result<Self> {
        let names = (0..outputs.ncols()).map(|p| format!("y{p}")).collect();
        Self::with_names(design, outputs, names, None)
    }

    pub fn with_names(
        design: DesignMatrix,
        outputs: Matrix,
        cell_names: Vec<String>,
        grid: Option<Grid>,
    ) -> Result<Self> {
        if design.nrows() != outputs.nrows() {
            return Err(Error::RowMismatch {
                design: design.nrows(),
                outputs: outputs.nrows(),
            });
        }
        if cell_names.len() != outputs.ncols() {
            return Err(Error::ShapeMismatch(format!(
                "{} cell names for {} output columns",
                cell_names.len(),
                outputs.ncols()
            )));
        }
        if let Some(g) = &grid {
            if g.cells() != outputs.ncols() {
                return Err(Error::ShapeMismatch(format!(
                    "grid has {} cells, outputs have {} columns",
                    g.cells(),
                    outputs.ncols()
                )));
            }
        }
        let bad = design.values.non_finite_rows();
        if !bad.is_empty() {
            return Err(Error::NonFinite { what: "design", rows: bad });
        }
        let bad = outputs.non_finite_rows();
        if !bad.is_empty() {
            return Err(Error::NonFinite { what: "outputs", rows: bad });
        }
        Ok(Self {
            design,
            outputs,
            cell_names,
            grid,
        })
    }

    pub fn cells(&self) -> usize {
        self.outputs.ncols()
    }
}

/// Fit settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub nr: u32,
    pub no: u32,
    pub q: f64,
    pub rcond: f64,
    pub quantiles: QuantileSource,
}

impl FitOptions {
    pub fn new(nr: u32, no: u32, q: f64) -> Self {
        Self {
            nr,
            no,
            q,
            rcond: DEFAULT_RCOND,
            quantiles: QuantileSource::Empirical,
        }
    }
}

/// Solver report for one SD block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdDiagnostics {
    pub lin: usize,
    pub rows: usize,
    pub rank: usize,
    /// Ratio of largest to smallest retained singular value; `None` when
    /// every singular value was dropped.
    pub condition: Option<f64>,
}

impl SdDiagnostics {
    pub fn underdetermined(&self, coeffs_per_sd: usize) -> bool {
        self.rows < coeffs_per_sd
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub subdomains: Vec<SdDiagnostics>,
    pub gram_tol: f64,
    pub warnings: Vec<String>,
}

/// Everything describing a fit except the coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub nr: u32,
    pub no: u32,
    pub q: f64,
    pub rcond: f64,
    pub n_train: usize,
    pub quantiles: QuantileSource,
    pub provenance: Provenance,
    pub parameter_names: Vec<String>,
    pub cell_names: Vec<String>,
    pub grid: Option<Grid>,
}

/// A fitted expansion for `P` output cells.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateModel {
    pub meta: ModelMeta,
    pub basis: PiecewiseBasis,
    pub degrees: DegreeIndexSet,
    pub diagnostics: FitDiagnostics,
    /// `coeffs[(cell · n_sd + lin) · K + a]`, `K = |degrees|`.
    coeffs: Vec<f64>,
}

impl SurrogateModel {
    /// Assembles a model from parts, checking the coefficient count.
    pub fn from_parts(
        meta: ModelMeta,
        basis: PiecewiseBasis,
        degrees: DegreeIndexSet,
        diagnostics: FitDiagnostics,
        coeffs: Vec<f64>,
    ) -> Result<Self> {
        if basis.dim() != degrees.dim()
            || basis.nr() != meta.nr
            || basis.degree() != meta.no
            || degrees.max_degree() != meta.no
            || degrees.q() != meta.q
            || meta.parameter_names.len() != basis.dim()
        {
            return Err(Error::ShapeMismatch("basis, degree set and metadata disagree".into()));
        }
        let per_cell = basis
            .decomposition()
            .num_subdomains()?
            .checked_mul(degrees.len())
            .ok_or(Error::Overflow("coefficient count"))?;
        let expected = per_cell
            .checked_mul(meta.cell_names.len())
            .ok_or(Error::Overflow("coefficient count"))?;
        if coeffs.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "expected {expected} coefficients, found {}",
                coeffs.len()
            )));
        }
        if let Some(g) = &meta.grid {
            if g.cells() != meta.cell_names.len() {
                return Err(Error::ShapeMismatch("grid does not match the cell count".into()));
            }
        }
        Ok(Self {
            meta,
            basis,
            degrees,
            diagnostics,
            coeffs,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn cells(&self) -> usize {
        self.meta.cell_names.len()
    }

    pub fn num_subdomains(&self) -> usize {
        1usize << (self.meta.nr as usize * self.dim())
    }

    pub fn coeffs_per_sd(&self) -> usize {
        self.degrees.len()
    }

    pub fn coeffs_per_cell(&self) -> usize {
        self.num_subdomains() * self.degrees.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficients of one cell, SD-major then graded-lex `α`.
    pub fn cell_coefficients(&self, cell: usize) -> &[f64] {
        let n = self.coeffs_per_cell();
        &self.coeffs[cell * n..(cell + 1) * n]
    }

    /// `c[cell][lin][α]`.
    pub fn coefficient(&self, cell: usize, lin: usize, alpha: usize) -> f64 {
        self.coeffs[(cell * self.num_subdomains() + lin) * self.degrees.len() + alpha]
    }

    /// Surrogate value at `x` for every cell, plus whether `x` was clamped
    /// into the outer bins.
    pub fn predict_flagged(&self, x: &[f64]) -> (Vec<f64>, bool) {
        assert_eq!(x.len(), self.dim(), "point dimension");
        let k = self.degrees.len();
        let mut phi = vec![0.0; k];
        let (lin, clamped) = self.basis.eval_into(x, &self.degrees, &mut phi);
        let nsd = self.num_subdomains();
        let out = (0..self.cells())
            .map(|cell| {
                let c = &self.coeffs[(cell * nsd + lin) * k..(cell * nsd + lin + 1) * k];
                c.iter().zip(&phi).map(|(a, b)| a * b).sum()
            })
            .collect();
        (out, clamped)
    }

    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        self.predict_flagged(x).0
    }

    /// Row-wise [`predict`](Self::predict); row order is preserved.
    pub fn predict_batch(&self, points: &Matrix) -> Result<Matrix> {
        if points.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: points.ncols(),
            });
        }
        let rows: Vec<Vec<f64>> = (0..points.nrows())
            .into_par_iter()
            .map(|i| self.predict(points.row(i)))
            .collect();
        let mut data = Vec::with_capacity(points.nrows() * self.cells());
        rows.into_iter().for_each(|r| data.extend(r));
        Matrix::from_vec(points.nrows(), self.cells(), data)
    }
}

/// One decoupled least-squares block: rows of the design located in SD `lin`.
#[derive(Debug, Clone)]
pub struct SdBlock {
    pub lin: usize,
    pub rows: Vec<usize>,
    /// `rows.len() × |degrees|`, entries `Φ_{l,α}(ζ_i)`.
    pub matrix: DMatrix<f64>,
}

/// Splits the regression matrix into its per-SD blocks.
pub fn assemble_design(basis: &PiecewiseBasis, degrees: &DegreeIndexSet, design: &DesignMatrix) -> Result<Vec<SdBlock>> {
    if design.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            actual: design.dim(),
        });
    }
    let nsd = basis.decomposition().num_subdomains()?;
    let k = degrees.len();
    let evals: Vec<(usize, Vec<f64>)> = (0..design.nrows())
        .into_par_iter()
        .map(|i| {
            let (lin, _, v) = basis.eval(design.row(i), degrees);
            (lin, v)
        })
        .collect();
    let mut members = vec![Vec::new(); nsd];
    for (i, (lin, _)) in evals.iter().enumerate() {
        members[*lin].push(i);
    }
    if let Some(lin) = members.iter().position(Vec::is_empty) {
        return Err(Error::EmptySubdomain(lin));
    }
    Ok(members
        .into_iter()
        .enumerate()
        .map(|(lin, rows)| {
            let matrix = DMatrix::from_fn(rows.len(), k, |r, a| evals[rows[r]].1[a]);
            SdBlock { lin, rows, matrix }
        })
        .collect())
}

struct BlockSolution {
    coeffs: DMatrix<f64>,
    diag: SdDiagnostics,
}

/// `pinv(A) · Y` with singular values below `rcond · σ_max` dropped.
fn solve_block(lin: usize, a: &DMatrix<f64>, y: &DMatrix<f64>, rcond: f64) -> Result<BlockSolution> {
    let svd = a.clone().svd(true, true);
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::DegenerateMoments(format!("SVD failed for subdomain {lin}"))),
    };
    let s = &svd.singular_values;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    if !smax.is_finite() {
        return Err(Error::NonFinite {
            what: "basis evaluations",
            rows: vec![],
        });
    }
    let cutoff = rcond * smax;
    let keep: Vec<usize> = (0..s.len()).filter(|&i| s[i] > cutoff && s[i] > 0.0).collect();
    let smin = keep.iter().map(|&i| s[i]).fold(f64::INFINITY, f64::min);
    // pinv(A) Y = V Σ⁺ Uᵀ Y
    let uty = u.transpose() * y;
    let mut scaled = DMatrix::zeros(s.len(), y.ncols());
    for &i in &keep {
        let inv = 1.0 / s[i];
        for c in 0..y.ncols() {
            scaled[(i, c)] = uty[(i, c)] * inv;
        }
    }
    let coeffs = vt.transpose() * scaled;
    Ok(BlockSolution {
        coeffs,
        diag: SdDiagnostics {
            lin,
            rows: a.nrows(),
            rank: keep.len(),
            condition: (!keep.is_empty()).then_some(smax / smin),
        },
    })
}

fn column_means(m: &Matrix) -> Vec<f64> {
    let n = m.nrows();
    (0..m.ncols())
        .map(|p| {
            let mut s = CompensatedSum::default();
            for i in 0..n {
                s.add(m.get(i, p));
            }
            if n == 0 { 0.0 } else { s.value() / n as f64 }
        })
        .collect()
}

/// Solves every block and scatters into cell-major storage.
///
/// Outputs are centred by their training mean before the solve and the mean
/// is restored on the zero-degree coefficient of every SD. For full-rank
/// blocks this equals `pinv(A)·y`; for rank-deficient blocks it keeps
/// constant fields exactly constant.
fn solve_all(
    blocks: &[SdBlock],
    train: &TrainingSet,
    nsd: usize,
    k: usize,
    zero_scale: f64,
    rcond: f64,
) -> Result<(Vec<f64>, Vec<SdDiagnostics>)> {
    let p = train.cells();
    let ybar = column_means(&train.outputs);
    let sols: Vec<BlockSolution> = blocks
        .par_iter()
        .map(|b| {
            let y = DMatrix::from_fn(b.rows.len(), p, |r, c| train.outputs.get(b.rows[r], c) - ybar[c]);
            solve_block(b.lin, &b.matrix, &y, rcond)
        })
        .collect::<Result<_>>()?;
    let mut coeffs = vec![0.0; p * nsd * k];
    for (cell, &mean) in ybar.iter().enumerate() {
        for sol in &sols {
            let base = (cell * nsd + sol.diag.lin) * k;
            for a in 0..k {
                coeffs[base + a] = sol.coeffs[(a, cell)];
            }
            coeffs[base] += mean * zero_scale;
        }
    }
    Ok((coeffs, sols.into_iter().map(|s| s.diag).collect()))
}

fn check_options(opts: &FitOptions) -> Result<()> {
    if !(opts.rcond >= 0.0 && opts.rcond < 1.0) {
        return Err(Error::Config(format!("rcond must lie in [0, 1), got {}", opts.rcond)));
    }
    Ok(())
}

/// Fits an aMR-PC surrogate (plain aPC when `nr == 0`).
///
/// `space` is only consulted for [`QuantileSource::Marginal`].
pub fn fit(train: &TrainingSet, opts: &FitOptions, space: Option<&ParameterSpace>) -> Result<SurrogateModel> {
    check_options(opts)?;
    let m = train.design.dim();
    let degrees = degree_set(m, opts.no, opts.q)?;
    let dec = match opts.quantiles {
        QuantileSource::Empirical => decompose(&train.design, opts.nr)?,
        QuantileSource::Marginal => {
            let space = space.ok_or_else(|| Error::Config("marginal quantiles need a parameter space".into()))?;
            if space.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: space.len(),
                    actual: m,
                });
            }
            decompose_marginal(space, opts.nr)?
        }
    };
    let nsd = dec.num_subdomains()?;
    let basis = build_piecewise_basis(&train.design, &dec, opts.no)?;
    let blocks = assemble_design(&basis, &degrees, &train.design)?;
    let k = degrees.len();
    let zero_scale = (-(m as f64) * opts.nr as f64 / 2.0).exp2();
    let (coeffs, subdomains) = solve_all(&blocks, train, nsd, k, zero_scale, opts.rcond)?;

    let mut warnings = dec.warnings().to_vec();
    let under: Vec<usize> = subdomains.iter().filter(|d| d.underdetermined(k)).map(|d| d.lin).collect();
    if !under.is_empty() {
        warnings.push(format!(
            "{} of {nsd} subdomains have fewer rows than the {k} coefficients per subdomain; minimum-norm solutions used (first: {})",
            under.len(),
            under[0]
        ));
    }
    let deficient = subdomains.iter().filter(|d| d.rank < k && d.rows >= k).count();
    if deficient > 0 {
        warnings.push(format!("{deficient} subdomain blocks are rank deficient"));
    }
    let gram_tol = basis.gram_tol();
    SurrogateModel::from_parts(
        meta_for(train, opts),
        basis,
        degrees,
        FitDiagnostics {
            subdomains,
            gram_tol,
            warnings,
        },
        coeffs,
    )
}

fn meta_for(train: &TrainingSet, opts: &FitOptions) -> ModelMeta {
    ModelMeta {
        nr: opts.nr,
        no: opts.no,
        q: opts.q,
        rcond: opts.rcond,
        n_train: train.design.nrows(),
        quantiles: opts.quantiles,
        provenance: train.design.provenance,
        parameter_names: train.design.names.clone(),
        cell_names: train.cell_names.clone(),
        grid: train.grid.clone(),
    }
}

/// Plain aPC regression on global per-dimension bases, without any
/// subdomain bookkeeping.
pub fn fit_pce(train: &TrainingSet, no: u32, q: f64, rcond: f64) -> Result<SurrogateModel> {
    let opts = FitOptions {
        rcond,
        ..FitOptions::new(0, no, q)
    };
    check_options(&opts)?;
    let design = &train.design;
    let m = design.dim();
    let degrees = degree_set(m, no, q)?;
    let bases: Vec<OrthonormalBasis1D> = (0..m)
        .map(|j| {
            build_basis_from_samples(&design.values.column(j), None, no as usize).map_err(|e| Error::BinBasis {
                dim: j,
                bin: 0,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let n = design.nrows();
    if n == 0 {
        return Err(Error::EmptySubdomain(0));
    }
    let uni: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|i| bases.iter().zip(design.row(i)).map(|(b, &x)| b.eval(x)).collect())
        .collect();
    let a = DMatrix::from_fn(n, degrees.len(), |i, k| {
        degrees
            .get(k)
            .iter()
            .enumerate()
            .map(|(j, &d)| uni[i][j][d as usize])
            .product()
    });
    let block = SdBlock {
        lin: 0,
        rows: (0..n).collect(),
        matrix: a,
    };
    let (coeffs, subdomains) = solve_all(std::slice::from_ref(&block), train, 1, degrees.len(), 1.0, rcond)?;

    let mut breakpoints = Vec::with_capacity(m);
    for j in 0..m {
        let col = design.values.column(j);
        let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        breakpoints.push(vec![lo, hi]);
    }
    let dec = crate::multires::Decomposition::from_breakpoints(0, breakpoints)?;
    let gram_tol = bases.iter().map(|b| b.gram_error()).fold(0.0, f64::max);
    let basis = PiecewiseBasis::from_parts(dec, no, bases.into_iter().map(|b| vec![b]).collect())?;
    SurrogateModel::from_parts(
        meta_for(train, &opts),
        basis,
        degrees,
        FitDiagnostics {
            subdomains,
            gram_tol,
            warnings: Vec::new(),
        },
        coeffs,
    )
}

/// Direct evaluation `Σ_l Σ_α c_{l,α} Φ_{l,α}(x)` over every term, used to
/// cross-check [`SurrogateModel::predict`].
pub fn predict_exhaustive(model: &SurrogateModel, x: &[f64]) -> Vec<f64> {
    let nsd = model.num_subdomains();
    let m = model.dim();
    let nr = model.meta.nr;
    (0..model.cells())
        .map(|cell| {
            let mut s = 0.0;
            for lin in 0..nsd {
                let l = SdIndex::from_linear(lin, m, nr);
                for (a, alpha) in model.degrees.iter().enumerate() {
                    let phi = model.basis.eval_single(&l, alpha, x);
                    s += model.coefficient(cell, lin, a) * phi;
                }
            }
            s
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{table1_space, DistributionSpec};
    use crate::qmc::{mc_design, qmc_design};
    use proptest::prelude::*;

    fn uniform_space(m: usize) -> ParameterSpace {
        ParameterSpace::iid(m, DistributionSpec::uniform(0.0, 1.0).unwrap()).unwrap()
    }

    fn outputs_from(design: &DesignMatrix, f: impl Fn(&[f64]) -> Vec<f64>) -> Matrix {
        let rows: Vec<Vec<f64>> = (0..design.nrows()).map(|i| f(design.row(i))).collect();
        let p = rows.first().map_or(0, Vec::len);
        Matrix::from_rows(p, &rows).unwrap()
    }

    fn train(design: &DesignMatrix, f: impl Fn(&[f64]) -> Vec<f64>) -> TrainingSet {
        TrainingSet::new(design.clone(), outputs_from(design, f)).unwrap()
    }

    #[test]
    fn constant_model_is_exact() {
        let space = table1_space();
        let design = qmc_design(&space, 256, 1).unwrap();
        let t = train(&design, |_| vec![3.0, -1.5]);
        for (nr, no) in [(0, 0), (0, 3), (1, 2)] {
            let model = fit(&t, &FitOptions::new(nr, no, 1.0), None).unwrap();
            let probe = mc_design(&space, 0, 50, 3).unwrap();
            for i in 0..probe.nrows() {
                let y = model.predict(probe.row(i));
                assert!((y[0] - 3.0).abs() < 1e-12 && (y[1] + 1.5).abs() < 1e-12, "{y:?}");
            }
            let nsd = model.num_subdomains();
            for cell in 0..2 {
                for lin in 0..nsd {
                    for a in 1..model.coeffs_per_sd() {
                        assert_eq!(model.coefficient(cell, lin, a), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn recovers_product_of_degree_one_polynomials() {
        let space = table1_space();
        let design = qmc_design(&space, 512, 1).unwrap();
        let b0 = build_basis_from_samples(&design.values.column(0), None, 2).unwrap();
        let b1 = build_basis_from_samples(&design.values.column(1), None, 2).unwrap();
        let t = train(&design, |x| vec![b0.eval(x[0])[1] * b1.eval(x[1])[1]]);
        let model = fit(&t, &FitOptions::new(0, 2, 1.0), None).unwrap();
        let target = model.degrees.position(&[1, 1, 0, 0, 0]).unwrap();
        for a in 0..model.coeffs_per_sd() {
            let c = model.coefficient(0, 0, a);
            if a == target {
                assert!((c - 1.0).abs() < 1e-8, "{c}");
            } else {
                assert!(c.abs() <= 1e-8, "{a}: {c}");
            }
        }
    }

    #[test]
    fn coefficient_counts() {
        let space = table1_space();
        let design = qmc_design(&space, 2048, 1).unwrap();
        let t = train(&design, |x| vec![x[0]]);
        assert_eq!(fit(&t, &FitOptions::new(1, 2, 1.0), None).unwrap().coeffs_per_cell(), 672);
        assert_eq!(fit(&t, &FitOptions::new(0, 2, 1.0), None).unwrap().coeffs_per_cell(), 21);
    }

    #[test]
    fn nr_zero_matches_plain_pce() {
        let space = table1_space();
        let design = qmc_design(&space, 1024, 1).unwrap();
        let t = train(&design, |x| vec![x[0].sin() * x[2] + x[3] * x[3], (x[1] * 1e3).ln()]);
        let a = fit(&t, &FitOptions::new(0, 3, 1.0), None).unwrap();
        let b = fit_pce(&t, 3, 1.0, DEFAULT_RCOND).unwrap();
        for (x, y) in a.coefficients().iter().zip(b.coefficients()) {
            assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()), "{x} {y}");
        }
    }

    #[test]
    fn blocks_partition_rows_and_zero_column_is_scaled_indicator() {
        let space = uniform_space(3);
        let design = qmc_design(&space, 1024, 1).unwrap();
        let dec = decompose(&design, 1).unwrap();
        let basis = build_piecewise_basis(&design, &dec, 2).unwrap();
        let degrees = degree_set(3, 2, 1.0).unwrap();
        let blocks = assemble_design(&basis, &degrees, &design).unwrap();
        assert_eq!(blocks.len(), 8);
        assert_eq!(blocks.iter().map(|b| b.rows.len()).sum::<usize>(), 1024);
        let expected = (3.0f64 / 2.0).exp2();
        for b in &blocks {
            for r in 0..b.matrix.nrows() {
                assert!((b.matrix[(r, 0)] - expected).abs() < 1e-12);
            }
        }
        let nr0 = assemble_design(
            &build_piecewise_basis(&design, &decompose(&design, 0).unwrap(), 2).unwrap(),
            &degrees,
            &design,
        )
        .unwrap();
        assert_eq!(nr0.len(), 1);
        assert_eq!(nr0[0].matrix.shape(), (1024, degrees.len()));
    }

    #[test]
    fn empty_subdomain_is_named() {
        let space = uniform_space(2);
        let design = qmc_design(&space, 64, 1).unwrap();
        let dec = crate::multires::Decomposition::from_breakpoints(
            1,
            vec![vec![0.0, 0.5, 1.0], vec![0.0, 0.999999, 1.0]],
        )
        .unwrap();
        let basis_err = build_piecewise_basis(&design, &dec, 0);
        assert!(basis_err.is_err());
        let t = train(&design, |x| vec![x[0]]);
        let mut opts = FitOptions::new(3, 0, 1.0);
        opts.quantiles = QuantileSource::Empirical;
        let small = TrainingSet::new(
            DesignMatrix::new(design.values.slice_rows(0, 8), design.names.clone(), Provenance::External).unwrap(),
            t.outputs.slice_rows(0, 8),
        )
        .unwrap();
        match fit(&small, &opts, None) {
            Err(Error::EmptySubdomain(_)) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn underdetermined_blocks_warn() {
        let space = table1_space();
        let design = qmc_design(&space, 512, 1).unwrap();
        let t = train(&design, |x| vec![x[0] * x[4]]);
        let model = fit(&t, &FitOptions::new(1, 2, 1.0), None).unwrap();
        assert!(model.diagnostics.warnings.iter().any(|w| w.contains("minimum-norm")));
        assert!(model.coefficients().iter().all(|c| c.is_finite()));
    }

    #[test]
    fn interpolatory_fit_reproduces_training_outputs() {
        let space = uniform_space(1);
        let design = qmc_design(&space, 6, 1).unwrap();
        let t = train(&design, |x| vec![(3.0 * x[0]).sin()]);
        let model = fit(&t, &FitOptions::new(1, 2, 1.0), None).unwrap();
        for i in 0..6 {
            let y = model.predict(design.row(i));
            assert!((y[0] - t.outputs.get(i, 0)).abs() < 1e-10);
        }
    }

    #[test]
    fn predict_matches_exhaustive_sum() {
        let space = table1_space();
        let design = qmc_design(&space, 2048, 1).unwrap();
        let t = train(&design, |x| vec![x[0] * x[2], (x[4] * 1e6).sqrt()]);
        let model = fit(&t, &FitOptions::new(1, 2, 1.0), None).unwrap();
        let probe = mc_design(&space, 0, 100, 11).unwrap();
        for i in 0..probe.nrows() {
            let a = model.predict(probe.row(i));
            let b = predict_exhaustive(&model, probe.row(i));
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()));
            }
        }
        let batch = model.predict_batch(&probe.values).unwrap();
        for i in 0..probe.nrows() {
            assert_eq!(batch.row(i), model.predict(probe.row(i)).as_slice());
        }
    }

    #[test]
    fn zero_cells_give_empty_prediction() {
        let space = uniform_space(2);
        let design = qmc_design(&space, 64, 1).unwrap();
        let t = TrainingSet::new(design.clone(), Matrix::zeros(64, 0)).unwrap();
        let model = fit(&t, &FitOptions::new(0, 2, 1.0), None).unwrap();
        assert!(model.predict(&[0.3, 0.3]).is_empty());
    }

    #[test]
    fn ingestion_rejects_bad_rows() {
        let space = uniform_space(2);
        let design = qmc_design(&space, 4, 1).unwrap();
        let mut y = Matrix::zeros(4, 1);
        y.set(2, 0, f64::NAN);
        match TrainingSet::new(design.clone(), y) {
            Err(Error::NonFinite { rows, .. }) => assert_eq!(rows, vec![2]),
            other => panic!("{other:?}"),
        }
        match TrainingSet::new(design, Matrix::zeros(5, 1)) {
            Err(Error::RowMismatch { design: 4, outputs: 5 }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_function_gives_zero_tensor() {
        let space = table1_space();
        let design = qmc_design(&space, 1024, 1).unwrap();
        let t = train(&design, |_| vec![0.0]);
        let model = fit(&t, &FitOptions::new(1, 1, 1.0), None).unwrap();
        assert!(model.coefficients().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn fit_is_deterministic() {
        let space = table1_space();
        let design = qmc_design(&space, 1024, 1).unwrap();
        let t = train(&design, |x| vec![x[0] + x[1] * x[2], x[3]]);
        let a = fit(&t, &FitOptions::new(1, 2, 1.0), None).unwrap();
        let b = fit(&t, &FitOptions::new(1, 2, 1.0), None).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn fit_is_linear(a in -5.0f64..5.0, b in -5.0f64..5.0, nr in 0u32..2) {
            let space = uniform_space(2);
            let design = qmc_design(&space, 512, 1).unwrap();
            let f1 = |x: &[f64]| (2.0 * x[0]).sin() + x[1];
            let f2 = |x: &[f64]| x[0] * x[1] * x[1];
            let opts = FitOptions::new(nr, 3, 1.0);
            let m1 = fit(&train(&design, |x| vec![f1(x)]), &opts, None).unwrap();
            let m2 = fit(&train(&design, |x| vec![f2(x)]), &opts, None).unwrap();
            let m = fit(&train(&design, |x| vec![a * f1(x) + b * f2(x)]), &opts, None).unwrap();
            for ((c, c1), c2) in m.coefficients().iter().zip(m1.coefficients()).zip(m2.coefficients()) {
                prop_assert!((c - (a * c1 + b * c2)).abs() < 1e-10);
            }
        }

        #[test]
        fn row_permutation_leaves_coefficients(seed in 0u64..1000) {
            let space = uniform_space(2);
            let design = qmc_design(&space, 256, 1).unwrap();
            let f = |x: &[f64]| vec![x[0].exp() * x[1]];
            let base = fit(&train(&design, f), &FitOptions::new(1, 2, 1.0), None).unwrap();
            let mut order: Vec<usize> = (0..256).collect();
            let mut s = seed;
            for i in (1..order.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                order.swap(i, (s >> 33) as usize % (i + 1));
            }
            let permuted = DesignMatrix::new(design.values.select_rows(&order), design.names.clone(), Provenance::External).unwrap();
            let model = fit(&train(&permuted, f), &FitOptions::new(1, 2, 1.0), None).unwrap();
            for (x, y) in model.coefficients().iter().zip(base.coefficients()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
