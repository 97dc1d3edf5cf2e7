//! Handlers behind the subcommands: load inputs, call the library, write
//! flat CSV/JSON outputs.

use std::path::Path;

use mrlsr::data::{
    derive_seed, generate_synthetic_with, load_csv, parse_csv_features, split, ColumnSelector,
    Dataset, SplitSpec,
};
use mrlsr::equivalence::run_z_equivalence_experiment;
use mrlsr::eval::{cross_validate, curve_to_csv, learning_curve, run_paper_benchmark, CVPlan};
use mrlsr::kernel::{bandwidth_heuristic, gram, KernelSpec};
use mrlsr::oracle::{minimize_dual, OracleConfig};
use mrlsr::solver::{dual_objective, fit_mrlsr, Model, SolverConfig};
use mrlsr::stability::empirical_stability;
use mrlsr::{Error, Result};

use crate::Command;

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Synth {
            n,
            seed,
            no_noise,
            out,
        } => synth(n, seed, !no_noise, &out),
        Command::Gram {
            data,
            target,
            mu,
            stats: _,
        } => gram_stats(&data, &target, mu),
        Command::Fit {
            data,
            target,
            m,
            lambda,
            mu,
            tol,
            max_iter,
            out,
        } => fit(&data, &target, m, lambda, mu, tol, max_iter, &out),
        Command::Predict {
            model,
            data,
            target,
            out,
        } => predict(&model, &data, target.as_deref(), &out),
        Command::Cv {
            data,
            target,
            protocol: _,
            m_grid,
            lambda_grid,
            folds,
            repeats,
            mu,
            seed,
            out,
        } => cv(
            &data,
            &target,
            m_grid,
            lambda_grid,
            folds,
            repeats,
            mu,
            seed,
            &out,
        ),
        Command::Curve {
            data,
            target,
            m,
            lambda,
            fractions,
            seed,
            out,
        } => curve(&data, &target, m, lambda, fractions, seed, &out),
        Command::Zequiv {
            data,
            target,
            m,
            lambda,
            parts,
            seed,
            out,
        } => zequiv(&data, &target, m, lambda, parts, seed, &out),
        Command::Stability {
            data,
            target,
            m,
            lambda,
            probe_n,
            seed,
            out,
        } => stability(&data, &target, m, lambda, probe_n, seed, out.as_deref()),
        Command::OracleCheck {
            n,
            m,
            lambda,
            seed,
            steps,
        } => oracle_check(n, m, lambda, seed, steps),
        Command::Bench {
            paper_protocol: _,
            data,
            target,
            n,
            folds,
            repeats,
            standardize,
            seed,
            out,
        } => bench(
            data.as_deref(),
            target.as_deref(),
            n,
            folds,
            repeats,
            standardize,
            seed,
            &out,
        ),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_dataset(path: &Path, target: &str) -> Result<Dataset> {
    let selector: ColumnSelector = target.parse().expect("column selector parse is infallible");
    load_csv(path, &selector)
}

fn kernel_for(dataset: &Dataset, mu: Option<f64>) -> Result<KernelSpec> {
    match mu {
        Some(mu) => KernelSpec::new(mu),
        None => KernelSpec::new(bandwidth_heuristic(dataset)?),
    }
}

fn dataset_to_csv(dataset: &Dataset) -> String {
    let p = dataset.dim();
    let mut out = String::new();
    for j in 0..p {
        out.push_str(&format!("x{},", j + 1));
    }
    out.push_str("y\n");
    for i in 0..dataset.len() {
        for j in 0..p {
            out.push_str(&format!("{},", dataset.features()[(i, j)]));
        }
        out.push_str(&format!("{}\n", dataset.targets()[i]));
    }
    out
}

fn synth(n: usize, seed: u64, noise: bool, out: &Path) -> Result<()> {
    let dataset = generate_synthetic_with(n, seed, noise)?;
    write_file(out, &dataset_to_csv(&dataset))?;
    println!(
        "wrote {} rows x {} features to {}",
        dataset.len(),
        dataset.dim(),
        out.display()
    );
    Ok(())
}

fn gram_stats(data: &Path, target: &str, mu: Option<f64>) -> Result<()> {
    let dataset = load_dataset(data, target)?;
    let kernel = kernel_for(&dataset, mu)?;
    let k = gram(&dataset, &kernel);
    let n = dataset.len();
    let mut off_min = f64::INFINITY;
    let mut off_max = f64::NEG_INFINITY;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                off_min = off_min.min(k[(i, j)]);
                off_max = off_max.max(k[(i, j)]);
            }
        }
    }
    println!("n={n}");
    println!("p={}", dataset.dim());
    println!("bandwidth={}", kernel.bandwidth());
    if n > 1 {
        println!("offdiag_min={off_min}");
        println!("offdiag_max={off_max}");
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn fit(
    data: &Path,
    target: &str,
    m: f64,
    lambda: f64,
    mu: Option<f64>,
    tol: f64,
    max_iter: usize,
    out: &Path,
) -> Result<()> {
    let dataset = load_dataset(data, target)?;
    let kernel = kernel_for(&dataset, mu)?;
    let config = SolverConfig::new(m, lambda)?
        .with_tolerance(tol)?
        .with_max_iter(max_iter);
    let model = fit_mrlsr(&dataset, &kernel, &config)?;
    write_file(out, &model.to_json_string())?;
    let report = model.report();
    println!("c0={}", report.c0);
    println!("residual={}", report.residual);
    println!("iterations={}", report.newton_iterations);
    println!("candidates={}", report.candidate_count);
    Ok(())
}

fn predict(model_path: &Path, data: &Path, target: Option<&str>, out: &Path) -> Result<()> {
    let model = Model::from_json_bytes(&read_file(model_path)?)?;
    let queries = match target {
        Some(column) => load_dataset(data, column)?.features().clone(),
        None => parse_csv_features(&read_file(data)?)?,
    };
    let predictions = model.predict(&queries)?;
    let mut text = String::from("prediction\n");
    for v in predictions.iter() {
        text.push_str(&format!("{v}\n"));
    }
    write_file(out, &text)?;
    println!(
        "wrote {} predictions to {}",
        predictions.len(),
        out.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cv(
    data: &Path,
    target: &str,
    m_grid: Option<Vec<f64>>,
    lambda_grid: Option<Vec<f64>>,
    folds: Option<usize>,
    repeats: Option<usize>,
    mu: Option<f64>,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let dataset = load_dataset(data, target)?;
    let base = CVPlan::paper_protocol(seed);
    let plan = CVPlan::new(
        m_grid.unwrap_or(base.m_grid),
        lambda_grid.unwrap_or(base.lambda_grid),
        folds.unwrap_or(base.fold_count),
        repeats.unwrap_or(base.repeats),
        seed,
    )?;
    let kernel = kernel_for(&dataset, mu)?;
    let result = cross_validate(&dataset, &plan, &kernel)?;
    write_file(out, &result.to_csv())?;
    println!("best_m={}", result.best_m);
    println!("best_lambda={}", result.best_lambda);
    Ok(())
}

fn curve(
    data: &Path,
    target: &str,
    m: f64,
    lambda: f64,
    fractions: Option<Vec<f64>>,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let dataset = load_dataset(data, target)?;
    // 10% to 100% in steps of 5%
    let fractions =
        fractions.unwrap_or_else(|| (2..=20).map(|k| k as f64 * 0.05).collect::<Vec<_>>());
    let points = learning_curve(&dataset, m, lambda, &fractions, seed)?;
    write_file(out, &curve_to_csv(&points))?;
    println!("wrote {} curve points to {}", points.len(), out.display());
    Ok(())
}

fn zequiv(
    data: &Path,
    target: &str,
    m: f64,
    lambda: f64,
    parts: usize,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let dataset = load_dataset(data, target)?;
    let report = run_z_equivalence_experiment(&dataset, m, lambda, parts, seed)?;
    write_file(out, &report.to_csv())?;
    println!("lambda2={}", report.lambda2);
    for part in &report.parts {
        println!(
            "Z{}: alpha_diff={} rkhs_diff={}",
            part.part, part.alpha_diff, part.rkhs_diff
        );
    }
    Ok(())
}

fn stability(
    data: &Path,
    target: &str,
    m: f64,
    lambda: f64,
    probe_n: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<()> {
    let dataset = load_dataset(data, target)?;
    let n = dataset.len();
    if probe_n == 0 || probe_n + 1 >= n {
        return Err(Error::InvalidParameter {
            name: "probe_n",
            value: probe_n as f64,
            requirement: "must leave at least two training rows",
        });
    }
    let train_fraction = (n - probe_n) as f64 / n as f64;
    let (train, probe) = split(
        &dataset,
        &SplitSpec::new(train_fraction, derive_seed(seed, 0x51), 2),
    )?;
    let kernel = kernel_for(&train, None)?;
    let config = SolverConfig::new(m, lambda)?;
    let report = empirical_stability(&train, &kernel, &config, &probe)?;

    let c_y = train
        .targets()
        .iter()
        .chain(probe.targets().iter())
        .fold(0.0f64, |acc, &y| acc.max(y.abs()));
    let mut text =
        String::from("m,lambda,train_n,probe_n,c_y,lipschitz_const,beta,empirical_max,satisfied\n");
    text.push_str(&format!(
        "{m},{lambda},{},{},{c_y},{},{},{},{}\n",
        train.len(),
        probe.len(),
        report.lipschitz_const,
        report.beta,
        report.empirical_max,
        report.satisfied
    ));
    match out {
        Some(path) => {
            write_file(path, &text)?;
            println!("beta={}", report.beta);
            println!("empirical_max={}", report.empirical_max);
            println!("satisfied={}", report.satisfied);
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn oracle_check(n: usize, m: f64, lambda: f64, seed: u64, steps: usize) -> Result<()> {
    let dataset = generate_synthetic_with(n, derive_seed(seed, 0x07), true)?;
    let kernel = kernel_for(&dataset, None)?;
    let config = SolverConfig::new(m, lambda)?;
    let model = fit_mrlsr(&dataset, &kernel, &config)?;
    let k = gram(&dataset, &kernel);
    let solver_objective = dual_objective(&k, dataset.targets(), model.alpha(), lambda, m)?;

    let oracle_config = OracleConfig {
        max_steps: steps,
        seed: derive_seed(seed, 0x08),
        ..OracleConfig::default()
    };
    let outcome = minimize_dual(&k, dataset.targets(), lambda, m, &oracle_config)?;
    let gap = (outcome.objective - solver_objective).abs() / (1.0 + solver_objective.abs());
    println!("solver_objective={solver_objective}");
    println!("oracle_objective={}", outcome.objective);
    println!("relative_gap={gap}");
    println!("oracle_converged={}", outcome.converged);
    println!("oracle_steps={}", outcome.steps);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn bench(
    data: Option<&Path>,
    target: Option<&str>,
    n: usize,
    folds: usize,
    repeats: usize,
    standardize: bool,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let dataset = match (data, target) {
        (Some(path), Some(column)) => load_dataset(path, column)?,
        (None, None) => generate_synthetic_with(n, derive_seed(seed, 0x0D), true)?,
        _ => {
            return Err(Error::InvalidParameter {
                name: "data/target",
                value: f64::NAN,
                requirement: "--data and --target must be given together",
            })
        }
    };
    let base = CVPlan::paper_protocol(seed);
    let plan = CVPlan::new(base.m_grid, base.lambda_grid, folds, repeats, seed)?;
    let report = run_paper_benchmark(&dataset, &plan, standardize)?;
    write_file(out, &report.to_csv())?;
    println!("best_m={}", report.best_m);
    println!("best_lambda={}", report.best_lambda);
    println!("mrlsr_rmse={}", report.mrlsr_rmse);
    println!("krr_lambda2={}", report.krr_lambda2);
    println!("krr_rmse={}", report.krr_rmse);
    Ok(())
}
