//! Subcommand bodies. Flags override the run configuration, which overrides
//! built-in defaults.

use std::path::{Path, PathBuf};

use amrpc::benchmarks::{self, AnalyticModel};
use amrpc::config::{parse_config, preset_space, DesignKind, RunConfig};
use amrpc::distributions::ParameterSpace;
use amrpc::gsa::{self, AnalysisOptions, IndexSubset, OracleOptions, OracleResult};
use amrpc::io::{self, decode_model, decode_reference, encode_model, encode_reference};
use amrpc::metrics::{l2_field_error, mc_reference, relative_mse, rmse};
use amrpc::multires::QuantileSource;
use amrpc::qmc::{mc_design, qmc_design, DesignMatrix};
use amrpc::surrogate::{fit as fit_model, FitOptions, SurrogateModel, TrainingSet};
use serde::Serialize;

use crate::output::{emit, read_bytes, read_text, write_atomic};
use crate::{
    AnalyzeArgs, BenchArgs, CliError, CliResult, DesignArgs, ExportArgs, FitArgs, Kind, MetricsArgs, ModelSelect,
    OracleArgs, Quantiles, SampleArgs,
};

pub fn load_config(path: Option<&Path>) -> CliResult<RunConfig> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::config(format!("{}: {e}", p.display())))?;
            parse_config(&text).map_err(|e| CliError::config(format!("{}: {e}", p.display())))
        }
    }
}

fn required(path: Option<PathBuf>, fallback: &Option<PathBuf>, what: &str) -> CliResult<PathBuf> {
    path.or_else(|| fallback.clone())
        .ok_or_else(|| CliError::config(format!("no {what} given (flag or [paths] entry)")))
}

fn make_design(space: &ParameterSpace, cfg: &RunConfig, args: &DesignArgs) -> CliResult<DesignMatrix> {
    let n = args.n.unwrap_or(cfg.design.n);
    let kind = match args.kind {
        Some(Kind::Qmc) => DesignKind::Qmc,
        Some(Kind::Mc) => DesignKind::Mc,
        None => cfg.design.kind,
    };
    if n == 0 {
        eprintln!("warning: n = 0, writing a header-only design");
    }
    let design = match kind {
        DesignKind::Qmc => qmc_design(space, n, args.skip.unwrap_or(cfg.design.skip))?,
        DesignKind::Mc => mc_design(space, 0, n, args.seed.unwrap_or(cfg.design.seed))?,
    };
    Ok(design)
}

pub fn sample(cfg: &RunConfig, args: SampleArgs) -> CliResult<()> {
    let space = match &args.preset {
        Some(p) => preset_space(p)?,
        None => cfg
            .space()?
            .ok_or_else(|| CliError::config("no parameter space: pass --preset or configure one"))?,
    };
    let design = make_design(&space, cfg, &args.design)?;
    let text = io::write_design(&design)?;
    emit(args.out.as_deref().or(cfg.paths.design.as_deref()), &text)
}

fn parse_grid_flag(s: &str) -> CliResult<(usize, usize)> {
    let parsed = s
        .split_once(['x', 'X'])
        .and_then(|(r, c)| Some((r.trim().parse().ok()?, c.trim().parse().ok()?)));
    parsed.ok_or_else(|| CliError::config(format!("--grid expects ROWSxCOLS, got {s:?}")))
}

fn select_model(sel: &ModelSelect, cfg: &RunConfig) -> CliResult<AnalyticModel> {
    let name = sel
        .name
        .as_deref()
        .ok_or_else(|| CliError::config("--model NAME is required (see `bench --list`)"))?;
    let grid = match &sel.grid {
        Some(s) => Some(parse_grid_flag(s)?),
        None => cfg.grid.as_ref().map(|g| (g.rows, g.cols)),
    };
    Ok(benchmarks::by_name(name, sel.a.as_deref(), grid)?)
}

pub fn bench(cfg: &RunConfig, args: BenchArgs) -> CliResult<()> {
    if args.list {
        for name in benchmarks::MODEL_NAMES {
            let m = benchmarks::by_name(name, None, None)?;
            println!("{name}\tM={}\tcells={}", m.dim(), m.cells());
        }
        return Ok(());
    }
    let model = select_model(&args.model, cfg)?;
    let design = match &args.design_in {
        Some(p) => io::parse_design(&read_text(p)?)?,
        None => make_design(model.space(), cfg, &args.design)?,
    };
    let outputs = model.evaluate_design(&design)?;
    if let Some(p) = args.design_out.as_deref().or(cfg.paths.design.as_deref()) {
        write_atomic(p, io::write_design(&design)?.as_bytes())?;
    }
    let text = io::write_outputs(&outputs, &model.cell_names(), model.grid())?;
    emit(args.outputs_out.as_deref().or(cfg.paths.outputs.as_deref()), &text)?;
    if let Some(p) = args.reference_out.as_deref().or(cfg.paths.reference.as_deref()) {
        let stats = mc_reference(|x| model.evaluate(x), model.space(), args.reference_n, args.reference_seed)?;
        write_atomic(p, &encode_reference(&stats)?)?;
    }
    Ok(())
}

pub fn fit(cfg: &RunConfig, args: FitArgs) -> CliResult<()> {
    let design_path = required(args.design, &cfg.paths.design, "design file")?;
    let outputs_path = required(args.outputs, &cfg.paths.outputs, "outputs file")?;
    let out = required(args.out, &cfg.paths.model, "model output path")?;
    let design = io::parse_design(&read_text(&design_path)?)?;
    let table = io::parse_outputs(&read_text(&outputs_path)?)?;
    let grid = match table.grid {
        Some(g) => Some(g),
        None => cfg.grid()?,
    };
    let train = TrainingSet::with_names(design, table.values, table.names, grid)?;
    let s = &cfg.surrogate;
    let opts = FitOptions {
        nr: args.nr.unwrap_or(s.nr),
        no: args.no.unwrap_or(s.no),
        q: args.q.unwrap_or(s.q),
        rcond: args.rcond.unwrap_or(s.rcond),
        quantiles: match args.quantiles {
            Some(Quantiles::Empirical) => QuantileSource::Empirical,
            Some(Quantiles::Marginal) => QuantileSource::Marginal,
            None => s.quantiles,
        },
    };
    let space = cfg.space()?;
    let model = fit_model(&train, &opts, space.as_ref())?;
    write_atomic(&out, &encode_model(&model)?)?;
    report_fit(&model);
    Ok(())
}

fn report_fit(model: &SurrogateModel) {
    let d = &model.diagnostics;
    let rows: Vec<usize> = d.subdomains.iter().map(|s| s.rows).collect();
    let max_cond = d.subdomains.iter().filter_map(|s| s.condition).fold(0.0f64, f64::max);
    eprintln!(
        "fitted {} cells: {} subdomains x {} coefficients, rows per subdomain {}..{}, max condition {:.3e}, gram tolerance {:.3e}",
        model.cells(),
        model.num_subdomains(),
        model.coeffs_per_sd(),
        rows.iter().min().copied().unwrap_or(0),
        rows.iter().max().copied().unwrap_or(0),
        max_cond,
        d.gram_tol
    );
    for w in &d.warnings {
        eprintln!("warning: {w}");
    }
}

fn load_model(path: Option<PathBuf>, cfg: &RunConfig) -> CliResult<SurrogateModel> {
    let p = required(path, &cfg.paths.model, "model file")?;
    Ok(decode_model(&read_bytes(&p)?)?)
}

fn parse_subset(spec: &str, names: &[String]) -> CliResult<IndexSubset> {
    let dims = spec
        .split('+')
        .map(|n| {
            let n = n.trim();
            names
                .iter()
                .position(|x| x == n)
                .or_else(|| n.parse::<usize>().ok().filter(|&i| i < names.len()))
                .ok_or_else(|| CliError::config(format!("unknown parameter {n:?} in subset {spec:?}")))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(IndexSubset::new(dims, names.len())?)
}

pub fn analyze(cfg: &RunConfig, args: AnalyzeArgs) -> CliResult<()> {
    let model = load_model(args.model, cfg)?;
    let mut opts = AnalysisOptions {
        var_floor: args.var_floor.unwrap_or(cfg.surrogate.var_floor),
        first_order: false,
        total: false,
        interactions: false,
        subsets: Vec::new(),
    };
    for kind in &args.indices {
        match kind.trim() {
            "first" => opts.first_order = true,
            "total" => opts.total = true,
            "all" => {
                opts.first_order = true;
                opts.total = true;
                opts.interactions = true;
            }
            "" => {}
            other => return Err(CliError::config(format!("unknown index kind {other:?}"))),
        }
    }
    for s in &args.subsets {
        opts.subsets.push(parse_subset(s, &model.meta.parameter_names)?);
    }
    let report = gsa::analyze(&model, &opts)?;
    if report.negative_indices > 0 {
        eprintln!("warning: {} index values below -{:e}", report.negative_indices, gsa::TOL_NEG);
    }
    if report.space_averaged.empty {
        eprintln!("warning: every cell is below the variance floor");
    }
    emit(args.out.as_deref().or(cfg.paths.report.as_deref()), &io::to_json(&report)?)
}

#[derive(Serialize)]
struct PredictionErrors {
    n_test: usize,
    rmse: f64,
    relative_mse: Option<f64>,
}

#[derive(Serialize)]
struct MomentErrors {
    reference_count: u64,
    mean_l2_error: f64,
    sd_l2_error: f64,
}

#[derive(Serialize)]
struct MetricsReport {
    version: u32,
    cells: usize,
    prediction: Option<PredictionErrors>,
    moments: Option<MomentErrors>,
}

pub fn metrics(cfg: &RunConfig, args: MetricsArgs) -> CliResult<()> {
    let model = load_model(args.model, cfg)?;
    let test = match args.test {
        Some(v) if v.len() == 2 => Some((v[0].clone(), v[1].clone())),
        Some(_) => return Err(CliError::config("--test expects DESIGN.csv,OUTPUTS.csv")),
        None => match (&cfg.paths.test_design, &cfg.paths.test_outputs) {
            (Some(d), Some(o)) => Some((d.clone(), o.clone())),
            _ => None,
        },
    };
    let reference = args.reference.or_else(|| cfg.paths.reference.clone());
    if test.is_none() && reference.is_none() {
        return Err(CliError::config("give --test and/or --reference"));
    }
    let prediction = match test {
        Some((dp, op)) => {
            let design = io::parse_design(&read_text(&dp)?)?;
            let truth = io::parse_outputs(&read_text(&op)?)?.values;
            let pred = model.predict_batch(&design.values)?;
            Some(PredictionErrors {
                n_test: truth.nrows(),
                rmse: rmse(&pred, &truth)?,
                relative_mse: relative_mse(&pred, &truth)?,
            })
        }
        None => None,
    };
    let moments = match reference {
        Some(rp) => {
            let r = decode_reference(&read_bytes(&rp)?)?;
            let mean = gsa::mean_from_coeffs(&model);
            let sd: Vec<f64> = gsa::variance_from_coeffs(&model).iter().map(|v| v.max(0.0).sqrt()).collect();
            Some(MomentErrors {
                reference_count: r.count,
                mean_l2_error: l2_field_error(&mean, &r.mean, None)?,
                sd_l2_error: l2_field_error(&sd, &r.sd, None)?,
            })
        }
        None => None,
    };
    let report = MetricsReport {
        version: 1,
        cells: model.cells(),
        prediction,
        moments,
    };
    emit(args.out.as_deref().or(cfg.paths.metrics.as_deref()), &io::to_json(&report)?)
}

pub fn export(cfg: &RunConfig, args: ExportArgs) -> CliResult<()> {
    let model = load_model(args.model, cfg)?;
    let dir = required(args.out_dir, &cfg.paths.export_dir, "export directory")?;
    std::fs::create_dir_all(&dir).map_err(|e| CliError::data(format!("{}: {e}", dir.display())))?;
    let floor = args.var_floor.unwrap_or(cfg.surrogate.var_floor);
    for f in io::export_fields(&model, floor)? {
        write_atomic(&dir.join(format!("{}.csv", f.name)), f.csv.as_bytes())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct OracleReport {
    model: String,
    parameters: Vec<String>,
    cells: Vec<usize>,
    bootstrap: usize,
    #[serde(flatten)]
    result: OracleResult,
}

pub fn oracle(cfg: &RunConfig, args: OracleArgs) -> CliResult<()> {
    let model = select_model(&args.model, cfg)?;
    let cells = match args.cells {
        Some(c) => {
            if let Some(&bad) = c.iter().find(|&&p| p >= model.cells()) {
                return Err(CliError::config(format!("cell {bad} out of range (model has {})", model.cells())));
            }
            c
        }
        None => (0..model.cells()).collect(),
    };
    let opts = OracleOptions {
        n: args.n,
        seed: args.seed,
        bootstrap: args.bootstrap,
        var_floor: args.var_floor.unwrap_or(cfg.surrogate.var_floor),
    };
    let result = gsa::mc_sobol_oracle(
        |x| {
            let y = model.evaluate(x);
            cells.iter().map(|&p| y[p]).collect()
        },
        model.space(),
        &opts,
    )?;
    let report = OracleReport {
        model: model.name().to_string(),
        parameters: model.space().names().iter().map(|s| s.to_string()).collect(),
        cells,
        bootstrap: args.bootstrap,
        result,
    };
    emit(args.out.as_deref(), &io::to_json(&report)?)
}
