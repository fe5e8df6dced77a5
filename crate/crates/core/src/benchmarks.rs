//! Analytic test models standing in for an external field solver.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::distributions::{table1_space, DistributionSpec, ParameterSpace};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::multires::{build_piecewise_basis, decompose, degree_set, DegreeIndexSet, PiecewiseBasis, SdIndex};
use crate::qmc::DesignMatrix;
use crate::surrogate::Grid;

/// Unnormalized variance decomposition of a scalar model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub variance: f64,
    /// `D_i`, first-order partial variances.
    pub first: Vec<f64>,
    /// `D^T_i`, total partial variances.
    pub total: Vec<f64>,
}

impl ClosedForm {
    pub fn first_index(&self, i: usize) -> f64 {
        self.first[i] / self.variance
    }

    pub fn total_index(&self, i: usize) -> f64 {
        self.total[i] / self.variance
    }
}

/// One `c · Φ_{l,α}` term of a [`span_polynomial`] model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanTerm {
    pub sd: SdIndex,
    pub alpha: Vec<u32>,
    pub coefficient: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    GFunction { a: Vec<f64> },
    Ishigami { a: f64, b: f64 },
    Span {
        basis: Box<PiecewiseBasis>,
        degrees: DegreeIndexSet,
        terms: Vec<SpanTerm>,
    },
    FieldToy { rows: usize, cols: usize },
}

/// Deterministic evaluator `R^M → R^P` with its input distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticModel {
    name: String,
    space: ParameterSpace,
    grid: Option<Grid>,
    kind: Kind,
}

impl AnalyticModel {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &ParameterSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.len()
    }

    pub fn grid(&self) -> Option<&Grid> {
        self.grid.as_ref()
    }

    pub fn cells(&self) -> usize {
        self.grid.as_ref().map_or(1, Grid::cells)
    }

    pub fn cell_names(&self) -> Vec<String> {
        match &self.grid {
            None => vec!["y".into()],
            Some(g) => (0..g.cells())
                .map(|p| {
                    let (comp, r, c) = g.position(p);
                    format!("{}_{r}_{c}", g.components[comp])
                })
                .collect(),
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        match &self.kind {
            Kind::GFunction { a } => vec![x
                .iter()
                .zip(a)
                .map(|(&z, &ai)| ((4.0 * z - 2.0).abs() + ai) / (1.0 + ai))
                .product()],
            Kind::Ishigami { a, b } => {
                vec![x[0].sin() + a * x[1].sin().powi(2) + b * x[2].powi(4) * x[0].sin()]
            }
            Kind::Span { basis, terms, .. } => vec![terms
                .iter()
                .map(|t| t.coefficient * basis.eval_single(&t.sd, &t.alpha, x))
                .sum()],
            Kind::FieldToy { rows, cols } => field_toy_eval(*rows, *cols, x),
        }
    }

    /// Evaluates every design row; row `i` of the result belongs to row `i`.
    pub fn evaluate_design(&self, design: &DesignMatrix) -> Result<Matrix> {
        if design.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: design.dim(),
            });
        }
        let rows: Vec<Vec<f64>> = (0..design.nrows()).map(|i| self.evaluate(design.row(i))).collect();
        Matrix::from_rows(self.cells(), &rows)
    }

    /// Analytic decomposition when one is known.
    pub fn closed_form(&self) -> Option<ClosedForm> {
        match &self.kind {
            Kind::GFunction { a } => {
                let d: Vec<f64> = a.iter().map(|ai| (1.0 / 3.0) / (1.0 + ai).powi(2)).collect();
                let prod: f64 = d.iter().map(|di| 1.0 + di).product();
                let total = d.iter().map(|di| di * prod / (1.0 + di)).collect();
                Some(ClosedForm {
                    variance: prod - 1.0,
                    first: d,
                    total,
                })
            }
            Kind::Ishigami { a, b } => {
                let v1 = 0.5 * (1.0 + b * PI.powi(4) / 5.0).powi(2);
                let v2 = a * a / 8.0;
                let v13 = b * b * PI.powi(8) * 8.0 / 225.0;
                Some(ClosedForm {
                    variance: v1 + v2 + v13,
                    first: vec![v1, v2, 0.0],
                    total: vec![v1 + v13, v2, v13],
                })
            }
            _ => None,
        }
    }

    /// Terms of a span model.
    pub fn span_terms(&self) -> Option<&[SpanTerm]> {
        match &self.kind {
            Kind::Span { terms, .. } => Some(terms),
            _ => None,
        }
    }

    /// Basis of a span model.
    pub fn span_basis(&self) -> Option<(&PiecewiseBasis, &DegreeIndexSet)> {
        match &self.kind {
            Kind::Span { basis, degrees, .. } => Some((basis, degrees)),
            _ => None,
        }
    }
}

/// Sobol' g-function on `U[0,1]^M`.
pub fn g_function(a: &[f64]) -> Result<AnalyticModel> {
    if a.is_empty() || a.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidSpace("g-function needs finite a_i ≥ 0".into()));
    }
    Ok(AnalyticModel {
        name: "g_function".into(),
        space: ParameterSpace::iid(a.len(), DistributionSpec::uniform(0.0, 1.0)?)?,
        grid: None,
        kind: Kind::GFunction { a: a.to_vec() },
    })
}

/// Ishigami function with `a = 7`, `b = 0.1` on `U[−π,π]^3`.
pub fn ishigami() -> AnalyticModel {
    AnalyticModel {
        name: "ishigami".into(),
        space: ParameterSpace::iid(3, DistributionSpec::uniform(-PI, PI).expect("valid bounds"))
            .expect("valid space"),
        grid: None,
        kind: Kind::Ishigami { a: 7.0, b: 0.1 },
    }
}

/// A function that lies exactly in the truncated aMR-PC span built from
/// `design` at refinement `nr`, so its expansion coefficients are known.
pub fn span_polynomial(
    space: &ParameterSpace,
    design: &DesignMatrix,
    nr: u32,
    no: u32,
    q: f64,
    terms: Vec<SpanTerm>,
) -> Result<AnalyticModel> {
    if design.dim() != space.len() {
        return Err(Error::DimensionMismatch {
            expected: space.len(),
            actual: design.dim(),
        });
    }
    let degrees = degree_set(space.len(), no, q)?;
    let bins = 1u32 << nr;
    for t in &terms {
        if !degrees.contains(&t.alpha) {
            return Err(Error::InvalidTruncation(format!("index {:?} outside the truncation", t.alpha)));
        }
        if t.sd.0.len() != space.len() || t.sd.0.iter().any(|&l| l >= bins) {
            return Err(Error::InvalidTruncation(format!("subdomain {:?} outside the partition", t.sd.0)));
        }
    }
    let basis = build_piecewise_basis(design, &decompose(design, nr)?, no)?;
    Ok(AnalyticModel {
        name: "span_polynomial".into(),
        space: space.clone(),
        grid: None,
        kind: Kind::Span {
            basis: Box::new(basis),
            degrees,
            terms,
        },
    })
}

/// Maps table-1 parameters to `[0,1]` (log scale for the permeabilities).
fn field_toy_inputs(x: &[f64]) -> [f64; 5] {
    [
        x[0] / 10.0,
        (x[1].log10() + 5.0) / 3.0,
        (x[2] - 0.1) / 9.9,
        x[3] / 10.0,
        (x[4].log10() + 8.0) / 3.0,
    ]
}

fn field_toy_eval(rows: usize, cols: usize, x: &[f64]) -> Vec<f64> {
    let u = field_toy_inputs(x);
    let g = |v: f64| v + 0.5 * v * v;
    let (g1, g5) = (g(u[0]), g(u[4]));
    let rest = 0.2 * u[1] * u[2] + 0.1 * u[3];
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            if r == 0 {
                out.push(1.0);
                continue;
            }
            let s = if cols > 1 { c as f64 / (cols - 1) as f64 } else { 0.5 };
            let amp = 1.0 + r as f64 / rows as f64;
            out.push(amp * ((1.0 - s) * g1 + s * g5 + rest));
        }
    }
    out
}

/// Synthetic `rows × cols` field on the table-1 space.
///
/// Row 0 is constant (zero variance). Elsewhere the field mixes a
/// `β_sj`-driven and a `k_pm`-driven term with weights `1 − s` and `s`,
/// `s = col / (cols − 1)`, so total indices of `β_sj` fall and those of `k_pm`
/// rise along each row.
pub fn field_toy(rows: usize, cols: usize) -> Result<AnalyticModel> {
    Ok(AnalyticModel {
        name: "field_toy".into(),
        space: table1_space(),
        grid: Some(Grid::new(rows, cols, vec!["y".into()])?),
        kind: Kind::FieldToy { rows, cols },
    })
}

/// Cells of the constant strip of a [`field_toy`] grid.
pub fn field_toy_strip(cols: usize) -> Vec<usize> {
    (0..cols).collect()
}

/// Names accepted by [`by_name`].
pub const MODEL_NAMES: [&str; 3] = ["g_function", "ishigami", "field_toy"];

/// Builds a named benchmark with default parameters.
pub fn by_name(name: &str, g_a: Option<&[f64]>, grid: Option<(usize, usize)>) -> Result<AnalyticModel> {
    match name {
        "g_function" => g_function(g_a.unwrap_or(&[0.0, 1.0, 9.0])),
        "ishigami" => Ok(ishigami()),
        "field_toy" => {
            let (r, c) = grid.unwrap_or((20, 20));
            field_toy(r, c)
        }
        other => Err(Error::Config(format!(
            "unknown benchmark {other:?}; expected one of {}",
            MODEL_NAMES.join(", ")
        ))),
    }
}
