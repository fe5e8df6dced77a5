use amrpc::benchmarks::{field_toy, g_function, ishigami, AnalyticModel};
use amrpc::gsa::{amrpc_total, analyze, mc_sobol_oracle, AnalysisOptions, OracleOptions, DEFAULT_VAR_FLOOR};
use amrpc::io::{decode_model, encode_model, parse_design, parse_outputs, to_json, write_design, write_outputs};
use amrpc::qmc::{qmc_design, DesignMatrix};
use amrpc::surrogate::{fit, FitOptions, SurrogateModel, TrainingSet};

fn fitted(model: &AnalyticModel, design: &DesignMatrix, nr: u32) -> SurrogateModel {
    let y = model.evaluate_design(design).unwrap();
    let train = TrainingSet::with_names(design.clone(), y, model.cell_names(), model.grid().cloned()).unwrap();
    fit(&train, &FitOptions::new(nr, 2, 1.0), None).unwrap()
}

#[test]
fn files_carry_a_fit_without_loss() {
    let model = field_toy(3, 3).unwrap();
    let design = qmc_design(model.space(), 1024, 1).unwrap();
    let y = model.evaluate_design(&design).unwrap();

    // through the text formats and back
    let design_back = parse_design(&write_design(&design).unwrap()).unwrap();
    let table = parse_outputs(&write_outputs(&y, &model.cell_names(), model.grid()).unwrap()).unwrap();
    assert_eq!(design_back, design);
    assert_eq!(table.values, y);
    assert_eq!(table.grid.as_ref(), model.grid());

    let train = TrainingSet::with_names(design_back, table.values, table.names, table.grid).unwrap();
    let sur = fit(&train, &FitOptions::new(1, 2, 1.0), None).unwrap();
    let back = decode_model(&encode_model(&sur).unwrap()).unwrap();
    let probe = qmc_design(model.space(), 64, 5000).unwrap();
    assert_eq!(sur.predict_batch(&probe.values).unwrap(), back.predict_batch(&probe.values).unwrap());
    let opts = AnalysisOptions::default();
    assert_eq!(
        to_json(&analyze(&sur, &opts).unwrap()).unwrap(),
        to_json(&analyze(&back, &opts).unwrap()).unwrap()
    );
}

#[test]
fn ishigami_oracle_recovers_its_decomposition() {
    let model = ishigami();
    let cf = model.closed_form().unwrap();
    let opts = OracleOptions {
        bootstrap: 50,
        ..OracleOptions::new(200_000, 17)
    };
    let r = mc_sobol_oracle(|x| model.evaluate(x), model.space(), &opts).unwrap();
    let s2 = r.first[1][0];
    assert!((s2.value - cf.first_index(1)).abs() < 0.01, "{s2:?}");
    let s3 = r.first[2][0];
    assert!(s3.ci_low - 0.01 <= 0.0 && 0.0 <= s3.ci_high + 0.01, "{s3:?}");
    for i in 0..3 {
        let t = r.total[i][0];
        assert!((t.value - cf.total_index(i)).abs() <= 0.01f64.max(3.0 * t.std_error), "T{i}: {t:?}");
    }
}

#[test]
fn g_function_examples_hold() {
    let g = g_function(&[0.0, 99.0]).unwrap();
    assert_eq!(g.evaluate(&[0.5, 0.3])[0], 0.0);
    let cf = g.closed_form().unwrap();
    let d1 = 1.0 / 3.0;
    let d2 = d1 / 1e4;
    let d = (1.0 + d1) * (1.0 + d2) - 1.0;
    assert!((cf.first_index(0) - d1 / d).abs() < 1e-12);
    let sym = g_function(&[0.0, 0.0]).unwrap().closed_form().unwrap();
    assert_eq!(sym.first_index(0), sym.first_index(1));
}

#[test]
fn field_toy_totals_move_along_each_row() {
    let cols = 16;
    let model = field_toy(2, cols).unwrap();
    // probe row 1, every column
    let probes: Vec<usize> = (0..cols).map(|c| cols + c).collect();
    let r = mc_sobol_oracle(
        |x| {
            let y = model.evaluate(x);
            probes.iter().map(|&p| y[p]).collect()
        },
        model.space(),
        &OracleOptions {
            bootstrap: 20,
            ..OracleOptions::new(20_000, 3)
        },
    )
    .unwrap();
    let beta: Vec<f64> = r.total[0].iter().map(|e| e.value).collect();
    let kpm: Vec<f64> = r.total[4].iter().map(|e| e.value).collect();
    assert!(beta.windows(2).all(|w| w[1] < w[0]), "{beta:?}");
    assert!(kpm.windows(2).all(|w| w[1] > w[0]), "{kpm:?}");

    // the surrogate sees the same trend
    let design = qmc_design(model.space(), 8192, 1).unwrap();
    let sur = fitted(&model, &design, 1);
    let t0 = amrpc_total(&sur, 0, DEFAULT_VAR_FLOOR).unwrap();
    let t4 = amrpc_total(&sur, 4, DEFAULT_VAR_FLOOR).unwrap();
    for (k, &p) in probes.iter().enumerate() {
        let (b, s) = (r.total[0][k].value, r.total[0][k].std_error);
        assert!((t0[p] - b).abs() < 0.01 + 4.0 * s, "cell {p}: {} vs {b} (se {s})", t0[p]);
        let (b, s) = (r.total[4][k].value, r.total[4][k].std_error);
        assert!((t4[p] - b).abs() < 0.01 + 4.0 * s, "cell {p}: {} vs {b} (se {s})", t4[p]);
    }
}
