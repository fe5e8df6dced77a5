//! Per-cell field CSVs with grid coordinates (`cell,component,row,col,value`).

use crate::error::Result;
use crate::gsa::{amrpc_total, mean_from_coeffs, variance_from_coeffs};
use crate::surrogate::{Grid, SurrogateModel};

use super::tables::format_f64;

/// Written in place of `ln σ²` (and undefined indices) for cells below the
/// variance floor.
pub const LOG_VARIANCE_SENTINEL: &str = "nan";

#[derive(Debug, Clone, PartialEq)]
pub struct ExportedField {
    /// File stem, e.g. `mean` or `total_k_pm`.
    pub name: String,
    pub csv: String,
}

/// Cell layout when the model carries no grid: one row, one column per cell.
fn layout(model: &SurrogateModel) -> Grid {
    model.meta.grid.clone().unwrap_or_else(|| Grid {
        rows: 1,
        cols: model.cells().max(1),
        components: vec!["y".into()],
    })
}

/// Renders one field; `None` entries are written as the sentinel.
pub fn field_csv(values: &[Option<f64>], grid: &Grid) -> String {
    let mut out = format!(
        "# grid rows={} cols={} components={}\ncell,component,row,col,value\n",
        grid.rows,
        grid.cols,
        grid.components.join(",")
    );
    for (p, v) in values.iter().enumerate() {
        let (c, r, col) = grid.position(p);
        let v = v.map_or_else(|| LOG_VARIANCE_SENTINEL.to_string(), format_f64);
        out.push_str(&format!("{p},{},{r},{col},{v}\n", grid.components[c]));
    }
    out
}

/// Mean, standard deviation, log-variance and per-parameter total-index
/// fields.
pub fn export_fields(model: &SurrogateModel, var_floor: f64) -> Result<Vec<ExportedField>> {
    let grid = layout(model);
    let mean = mean_from_coeffs(model);
    let var = variance_from_coeffs(model);
    let mut out = vec![
        ExportedField {
            name: "mean".into(),
            csv: field_csv(&mean.iter().map(|&v| Some(v)).collect::<Vec<_>>(), &grid),
        },
        ExportedField {
            name: "sd".into(),
            csv: field_csv(&var.iter().map(|&v| Some(v.sqrt())).collect::<Vec<_>>(), &grid),
        },
        ExportedField {
            name: "log_variance".into(),
            csv: field_csv(
                &var.iter().map(|&v| (v >= var_floor && v > 0.0).then(|| v.ln())).collect::<Vec<_>>(),
                &grid,
            ),
        },
    ];
    for (i, name) in model.meta.parameter_names.iter().enumerate() {
        let t = amrpc_total(model, i, var_floor)?;
        out.push(ExportedField {
            name: format!("total_{name}"),
            csv: field_csv(&t.iter().map(|v| v.is_finite().then_some(*v)).collect::<Vec<_>>(), &grid),
        });
    }
    Ok(out)
}
