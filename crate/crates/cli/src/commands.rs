use std::path::Path;

use serde_json::json;

use weibull_tail::amse::{amse, classify_ordering, OrderingCase, PredictedOrder};
use weibull_tail::distributions::{catalog, parse_model_spec, WeibullTailModel};
use weibull_tail::estimators::{quantile_hat, theta_hat, EstimatorVariant, SortedSample};
use weibull_tail::montecarlo::{
    mse_decomposition, quantile_mse_decomposition, run_with_workers, ExperimentPlan, MseRow,
};

use crate::output::{self, ErrorRow};
use crate::{
    AmseArgs, AppError, AppResult, CompareArgs, EstimateArgs, FiguresArgs, SimulateArgs,
};

fn dash_for(v: EstimatorVariant) -> Option<&'static str> {
    match v {
        EstimatorVariant::V1 => None,
        EstimatorVariant::V2 => Some("7 4"),
        EstimatorVariant::V3 => Some("2 4"),
    }
}

/// Parse a data file: one observation per line, `#` comments, blank lines
/// ignored. Errors carry 1-based line numbers.
fn parse_observations(text: &str) -> AppResult<Vec<f64>> {
    let mut values = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| {
            AppError::Data(format!(
                "line {}: could not parse '{line}' as a number",
                idx + 1
            ))
        })?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(AppError::Data(format!(
                "line {}: observations must be positive, got {line}",
                idx + 1
            )));
        }
        values.push(v);
    }
    Ok(values)
}

pub fn estimate(args: &EstimateArgs) -> AppResult<()> {
    let text = std::fs::read_to_string(&args.input).map_err(|e| {
        AppError::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", args.input.display()),
        ))
    })?;
    let sample = SortedSample::from_unsorted(parse_observations(&text)?)?;
    let n = sample.n();
    let k_max = args.k_max.unwrap_or_else(|| 150.min(n - 1));
    if args.k_min > k_max {
        return Err(AppError::Data(format!(
            "empty level range: k_min = {} exceeds k_max = {k_max}",
            args.k_min
        )));
    }
    let mut rows = Vec::new();
    for k in args.k_min..=k_max {
        for &variant in &args.variants.0 {
            let point = theta_hat(&sample, k, variant)?;
            let x_p = match args.p {
                Some(p) => Some(quantile_hat(&sample, k, p, variant)?),
                None => None,
            };
            rows.push((point, x_p));
        }
    }
    let w = output::open_out(args.out.as_deref())?;
    output::write_estimates(w, &rows, args.p.is_some())
}

pub fn simulate(args: &SimulateArgs) -> AppResult<()> {
    let model = parse_model_spec(&args.model)?;
    let plan = ExperimentPlan {
        model: model.clone(),
        n: args.n,
        replications: args.replications,
        k_min: args.k_min,
        k_max: args.k_max,
        variants: args.variants.0.clone(),
        seed: args.seed,
    };
    plan.validate()?;
    if let Some(p) = args.p {
        // Validate the regime before spending time on the theta study.
        if !(p > 0.0 && p < 1.0 / args.n as f64) {
            return Err(AppError::Data(format!(
                "extreme-quantile regime requires 0 < p < 1/n, got p = {p} with n = {}",
                args.n
            )));
        }
    }

    let (mse_rows, quantile_rows) = run_with_workers(args.workers, || {
        let mse = mse_decomposition(&plan)?;
        let quant = match args.p {
            Some(p) => Some(quantile_mse_decomposition(&plan, p)?),
            None => None,
        };
        Ok::<_, weibull_tail::Error>((mse, quant))
    })??;

    std::fs::create_dir_all(&args.out)?;
    let slug = model.slug();
    let mut files = Vec::new();

    let name = format!("{slug}_mse.csv");
    write_table(&args.out, &name, &to_rows(&mse_rows), Some("mse"))?;
    files.push(name);
    if let Some(rows) = &quantile_rows {
        let name = format!("{slug}_quantile_mse.csv");
        write_table(&args.out, &name, &to_rows(rows), Some("quantile_mse"))?;
        files.push(name);
    }

    let manifest = json!({
        "command": "simulate",
        "version": env!("CARGO_PKG_VERSION"),
        "model": model.name(),
        "slug": slug,
        "n": args.n,
        "replications": args.replications,
        "k_min": args.k_min,
        "k_max": args.k_max,
        "variants": variant_names(&args.variants.0),
        "seed": args.seed,
        "p": args.p,
        "files": files,
    });
    let path = args.out.join("manifest.json");
    output::write_json(&path, &manifest)?;
    println!("wrote {}", path.display());
    Ok(())
}

pub fn amse_table(args: &AmseArgs) -> AppResult<()> {
    let model = parse_model_spec(&args.model)?;
    if args.k_min < 2 || args.k_min > args.k_max || args.k_max >= args.n {
        return Err(AppError::Data(format!(
            "k range {}..={} must be nonempty and lie in [2, {}]",
            args.k_min,
            args.k_max,
            args.n.saturating_sub(1)
        )));
    }
    let mut rows = Vec::new();
    for k in args.k_min..=args.k_max {
        for &variant in &args.variants.0 {
            rows.push(ErrorRow::from(&amse(&model, args.n, k, variant)?));
        }
    }
    match &args.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let name = format!("{}_amse.csv", model.slug());
            write_table(dir, &name, &rows, None)
        }
        None => output::write_error_table(std::io::stdout(), &rows, None),
    }
}

pub fn compare(args: &CompareArgs) -> AppResult<()> {
    let model = parse_model_spec(&args.model)?;
    let rule_k = args.k_rule.apply(args.n, &model)?;
    let verdict = classify_ordering(&model, args.n, |_| rule_k)?;

    println!(
        "model: {}  (theta = {}, bias {})",
        model.name(),
        model.theta(),
        model.bias_sign()
    );
    println!("rule {} chose k = {} at n = {}", args.k_rule.label(), verdict.k, verdict.n);
    let stat = match verdict.case {
        OrderingCase::NegBiasLargeAlpha | OrderingCase::NegBiasSmallAlpha => {
            format!("alpha_n = {:.6}", verdict.statistic)
        }
        OrderingCase::PosBiasLargeBeta | OrderingCase::PosBiasSmallBeta => {
            format!("beta_n = {:.6}", verdict.statistic)
        }
        OrderingCase::ZeroBias => "exact zero-bias family".into(),
    };
    println!("case: {}  ({stat})", verdict.case);
    println!("predicted ordering: {}", verdict.predicted);

    let mut empirical = None;
    if args.empirical {
        let k_min = 10.clamp(2, args.n - 1);
        let k_max = 150.min(args.n - 1);
        let plan = ExperimentPlan {
            model: model.clone(),
            n: args.n,
            replications: args.replications,
            k_min,
            k_max,
            variants: EstimatorVariant::ALL.to_vec(),
            seed: args.seed,
        };
        let rows = run_with_workers(args.workers, || mse_decomposition(&plan))??;
        let (agree, levels) = prediction_agreement(&rows, &verdict.predicted);
        println!(
            "empirical check: prediction holds at {:.1}% of k in [{k_min}, {k_max}]  ({} replications, seed {})",
            100.0 * agree,
            args.replications,
            args.seed
        );
        empirical = Some(json!({
            "agreement": agree,
            "levels": levels,
            "k_min": k_min,
            "k_max": k_max,
            "replications": args.replications,
            "seed": args.seed,
        }));
    }

    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        let order = match verdict.predicted {
            PredictedOrder::Strict(order) => {
                Some(order.iter().map(|v| v.to_string()).collect::<Vec<_>>())
            }
            PredictedOrder::V1NotWorse => None,
        };
        let doc = json!({
            "command": "compare",
            "version": env!("CARGO_PKG_VERSION"),
            "model": model.name(),
            "slug": model.slug(),
            "theta": verdict.theta,
            "bias_sign": model.bias_sign().to_string(),
            "n": verdict.n,
            "k": verdict.k,
            "k_rule": args.k_rule.label(),
            "case": verdict.case.to_string(),
            "statistic": verdict.statistic,
            "predicted": verdict.predicted.to_string(),
            "order": order,
            "empirical": empirical,
        });
        let path = dir.join(format!("{}_compare.json", model.slug()));
        output::write_json(&path, &doc)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Fraction of levels k at which the simulated MSE totals satisfy the
/// predicted relation. Rows must cover all three variants.
fn prediction_agreement(rows: &[MseRow], predicted: &PredictedOrder) -> (f64, usize) {
    let mut held = 0usize;
    let mut levels = 0usize;
    let mut k_seen = None;
    let mut totals = [f64::NAN; 3];
    let mut filled = 0;
    for row in rows {
        if k_seen != Some(row.k) {
            k_seen = Some(row.k);
            filled = 0;
        }
        let idx = EstimatorVariant::ALL.iter().position(|&v| v == row.variant).unwrap();
        totals[idx] = row.total;
        filled += 1;
        if filled == 3 {
            levels += 1;
            let holds = match predicted {
                PredictedOrder::Strict(order) => {
                    let t = |v: EstimatorVariant| {
                        totals[EstimatorVariant::ALL.iter().position(|&w| w == v).unwrap()]
                    };
                    t(order[0]) < t(order[1]) && t(order[1]) < t(order[2])
                }
                PredictedOrder::V1NotWorse => {
                    totals[0] <= totals[1] && totals[0] <= totals[2]
                }
            };
            held += holds as usize;
        }
    }
    if levels == 0 {
        (0.0, 0)
    } else {
        (held as f64 / levels as f64, levels)
    }
}

pub fn figures(args: &FiguresArgs) -> AppResult<()> {
    let n = args.n;
    let k_min = args.k_min;
    let k_max = args.k_max.min(n.saturating_sub(1));
    let models = catalog();

    type PerModel = (WeibullTailModel, Vec<MseRow>, Vec<ErrorRow>);
    let computed: Vec<PerModel> = run_with_workers(args.workers, || {
        models
            .iter()
            .map(|model| {
                let plan = ExperimentPlan {
                    model: model.clone(),
                    n,
                    replications: args.replications,
                    k_min,
                    k_max,
                    variants: EstimatorVariant::ALL.to_vec(),
                    seed: args.seed,
                };
                let mse = mse_decomposition(&plan)?;
                let mut amse_rows = Vec::new();
                for k in k_min..=k_max {
                    for variant in EstimatorVariant::ALL {
                        amse_rows.push(ErrorRow::from(&amse(model, n, k, variant)?));
                    }
                }
                Ok((model.clone(), mse, amse_rows))
            })
            .collect::<weibull_tail::Result<_>>()
    })??;

    std::fs::create_dir_all(&args.out)?;
    let mut files = Vec::new();
    for (model, mse_rows, amse_rows) in &computed {
        let slug = model.slug();

        let name = format!("{slug}_mse.csv");
        write_table(&args.out, &name, &to_rows(mse_rows), Some("mse"))?;
        files.push(name);

        let name = format!("{slug}_amse.csv");
        write_table(&args.out, &name, amse_rows, Some("amse"))?;
        files.push(name);

        if args.svg {
            let chart = render_chart(model, mse_rows, amse_rows, args);
            let name = format!("{slug}.svg");
            std::fs::write(args.out.join(&name), chart)?;
            println!("wrote {}", args.out.join(&name).display());
            files.push(name);
        }
    }

    let manifest = json!({
        "command": "figures",
        "version": env!("CARGO_PKG_VERSION"),
        "models": computed.iter().map(|(m, _, _)| m.slug()).collect::<Vec<_>>(),
        "n": n,
        "replications": args.replications,
        "k_min": k_min,
        "k_max": k_max,
        "variants": variant_names(&EstimatorVariant::ALL),
        "seed": args.seed,
        "svg": args.svg,
        "log_y": args.log_y,
        "files": files,
    });
    let path = args.out.join("manifest.json");
    output::write_json(&path, &manifest)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn render_chart(
    model: &WeibullTailModel,
    mse_rows: &[MseRow],
    amse_rows: &[ErrorRow],
    args: &FiguresArgs,
) -> String {
    let series_for = |totals: &dyn Fn(EstimatorVariant) -> Vec<(f64, f64)>| {
        EstimatorVariant::ALL
            .iter()
            .map(|&v| crate::svg::Series {
                label: v.to_string(),
                dash: dash_for(v),
                points: totals(v),
            })
            .collect::<Vec<_>>()
    };
    let mse_points = |v: EstimatorVariant| {
        mse_rows
            .iter()
            .filter(|r| r.variant == v)
            .map(|r| (r.k as f64, r.total))
            .collect()
    };
    let amse_points = |v: EstimatorVariant| {
        amse_rows
            .iter()
            .filter(|r| r.variant == v.to_string())
            .map(|r| (r.k as f64, r.total))
            .collect()
    };
    let panels = [
        crate::svg::Panel {
            title: format!(
                "empirical MSE  (n = {}, {} replications, seed {})",
                args.n, args.replications, args.seed
            ),
            y_label: "MSE".into(),
            series: series_for(&mse_points),
        },
        crate::svg::Panel {
            title: "asymptotic MSE".into(),
            y_label: "AMSE".into(),
            series: series_for(&amse_points),
        },
    ];
    crate::svg::chart(model.name(), "k", &panels, args.log_y)
}

fn to_rows(rows: &[MseRow]) -> Vec<ErrorRow> {
    rows.iter().map(ErrorRow::from).collect()
}

fn variant_names(variants: &[EstimatorVariant]) -> Vec<String> {
    variants.iter().map(|v| v.to_string()).collect()
}

fn write_table(
    dir: &Path,
    name: &str,
    rows: &[ErrorRow],
    tag: Option<&str>,
) -> AppResult<()> {
    let file = std::fs::File::create(dir.join(name))?;
    output::write_error_table(file, rows, tag)?;
    println!("wrote {}", dir.join(name).display());
    Ok(())
}
