//! Surrogate model file: container with magic `AMRPCMDL`.
//!
//! The JSON header holds metadata, breakpoints, per-bin recurrence
//! coefficients and fit diagnostics. The payload is the coefficient tensor
//! in cell-major, SD, graded-lex `α` order. Decoding rebuilds every part
//! through its validating constructor.

use serde::{Deserialize, Serialize};

use super::container;
use crate::error::{Error, Result};
use crate::multires::{degree_set, Decomposition, PiecewiseBasis};
use crate::polybasis::OrthonormalBasis1D;
use crate::surrogate::{FitDiagnostics, ModelMeta, SurrogateModel};

pub const MODEL_MAGIC: &[u8; 8] = b"AMRPCMDL";

/// Upper bound on `|degree set|` accepted when decoding.
const MAX_DEGREE_SET: u128 = 1 << 20;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BinRecord {
    a: Vec<f64>,
    b: Vec<f64>,
    center: f64,
    half_width: f64,
    gram_error: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    meta: ModelMeta,
    breakpoints: Vec<Vec<f64>>,
    /// `bases[dim][bin]`.
    bases: Vec<Vec<BinRecord>>,
    coeffs_per_sd: usize,
    coefficients: u64,
    diagnostics: FitDiagnostics,
}

pub fn encode_model(model: &SurrogateModel) -> Result<Vec<u8>> {
    let basis = &model.basis;
    let header = Header {
        meta: model.meta.clone(),
        breakpoints: (0..basis.dim()).map(|j| basis.decomposition().breakpoints(j).to_vec()).collect(),
        bases: basis
            .bases()
            .iter()
            .map(|bins| {
                bins.iter()
                    .map(|b| {
                        let (a, bb, center, half_width) = b.parts();
                        BinRecord {
                            a: a.to_vec(),
                            b: bb.to_vec(),
                            center,
                            half_width,
                            gram_error: b.gram_error(),
                        }
                    })
                    .collect()
            })
            .collect(),
        coeffs_per_sd: model.coeffs_per_sd(),
        coefficients: model.coefficients().len() as u64,
        diagnostics: model.diagnostics.clone(),
    };
    let json = serde_json::to_string(&header).map_err(|e| Error::Parse(e.to_string()))?;
    Ok(container::encode(MODEL_MAGIC, &json, model.coefficients()))
}

fn binomial_u128(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 1..=k {
        r = r.checked_mul(n - k + i)? / i;
    }
    Some(r)
}

pub fn decode_model(bytes: &[u8]) -> Result<SurrogateModel> {
    let (json, coeffs) = container::decode(MODEL_MAGIC, bytes)?;
    let h: Header = serde_json::from_str(json).map_err(|e| Error::Parse(format!("model header: {e}")))?;
    if h.coefficients != coeffs.len() as u64 {
        return Err(Error::Parse(format!(
            "header announces {} coefficients, payload holds {}",
            h.coefficients,
            coeffs.len()
        )));
    }
    let meta = h.meta;
    let m = meta.parameter_names.len();
    if m == 0 || m > 64 || meta.nr as usize * m > 30 {
        return Err(Error::Parse(format!("unsupported model shape (M = {m}, Nr = {})", meta.nr)));
    }
    // bound the degree-set enumeration before running it
    let full = binomial_u128(meta.no as u128 + m as u128, m as u128);
    if full.is_none_or(|c| c > MAX_DEGREE_SET) {
        return Err(Error::Parse("degree set too large".into()));
    }
    let degrees = degree_set(m, meta.no, meta.q).map_err(|e| Error::Parse(e.to_string()))?;
    if degrees.len() != h.coeffs_per_sd {
        return Err(Error::Parse(format!(
            "header announces {} coefficients per SD, degree set has {}",
            h.coeffs_per_sd,
            degrees.len()
        )));
    }
    let dec = Decomposition::from_breakpoints(meta.nr, h.breakpoints)?;
    if dec.dim() != m {
        return Err(Error::Parse("breakpoints do not match the parameter count".into()));
    }
    let bases = h
        .bases
        .into_iter()
        .map(|bins| {
            bins.into_iter()
                .map(|r| OrthonormalBasis1D::from_parts(r.a, r.b, r.center, r.half_width, r.gram_error))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let basis = PiecewiseBasis::from_parts(dec, meta.no, bases)?;
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::Parse("non-finite coefficient".into()));
    }
    SurrogateModel::from_parts(meta, basis, degrees, h.diagnostics, coeffs)
        .map_err(|e| Error::Parse(e.to_string()))
}
