//! One function per subcommand, each producing a [`Report`].

use groupfx_core::apc::{apc_arrangement, apc_arrangement_with_anchor, detect_groups, is_all_positive};
use groupfx_core::clr::{solve_clr, ClrConfig, Selection};
use groupfx_core::effects::{estimate_effect, individual_effects, variability_weights, EffectEstimate};
use groupfx_core::linmod::{correlation, fit_ols, Dataset};
use groupfx_core::optimal::{optimal_effect, MAX_GROUP_SIZE};
use groupfx_core::sim::{ClaimCheck, SimCaseConfig, SimReport};
use groupfx_core::uniform::{table1, UniformSpec};
use groupfx_core::weights::WeightVector;
use rayon::ThreadPool;
use serde_json::{json, Value as Json};

use crate::cli::{AnalyzeConfig, ClrRunConfig, GroupSource, SelectKind, SimulateConfig, UniformConfig};
use crate::data::{load_dataset, resolve_column, resolve_group, ColumnRef};
use crate::error::{CliError, CliResult};
use crate::parallel;
use crate::render::{json_number, json_numbers, Cell, Report, Table};

pub const INTERCEPT_LABEL: &str = "(Intercept)";

pub fn uniform(cfg: &UniformConfig) -> CliResult<Report> {
    let mut report = Report::new("uniform");
    report.meta("p", json!(cfg.p));
    report.meta("sigma2", json_number(cfg.sigma2));
    let mut columns = vec!["r", "var_avg", "var_indiv"];
    if cfg.delta.is_some() {
        columns.push("var_delta");
    }
    if cfg.budget.is_some() {
        columns.push("delta_bound");
    }
    let mut table = Table::new("variances", &columns);
    for row in table1(cfg.p, &cfg.r_list, cfg.sigma2)? {
        let spec = UniformSpec::with_sigma2(cfg.p, row.r, cfg.sigma2)?;
        let mut cells: Vec<Cell> = vec![row.r.into(), row.var_avg.into(), row.var_indiv.into()];
        if let Some(d) = cfg.delta {
            cells.push(spec.delta_variance(d)?.into());
        }
        if let Some(b) = cfg.budget {
            cells.push(spec.estimable_delta_bound(b)?.into());
        }
        table.push(cells);
    }
    report.tables.push(table);
    Ok(report)
}

fn effect_row(label: String, e: &EffectEstimate) -> Vec<Cell> {
    vec![
        label.into(),
        e.value.into(),
        e.std_error.into(),
        e.t_stat.into(),
        e.p_value.into(),
    ]
}

pub fn analyze(cfg: &AnalyzeConfig) -> CliResult<Report> {
    let data = load_dataset(&cfg.csv, &cfg.response)?;
    analyze_dataset(&data, &cfg.groups, cfg.anchor.as_ref())
}

/// Individual coefficients, then `tau_w`, `tau_a` and `tau_star` for each
/// group. Group effects use the sign arrangement found from the group's
/// correlations.
pub fn analyze_dataset(data: &Dataset, groups: &GroupSource, anchor: Option<&ColumnRef>) -> CliResult<Report> {
    let groups: Vec<Vec<usize>> = match groups {
        GroupSource::Listed(specs) => specs
            .iter()
            .map(|s| resolve_group(data, s))
            .collect::<CliResult<_>>()?,
        GroupSource::Detect { threshold } => {
            let all: Vec<usize> = (0..data.n_predictors()).collect();
            detect_groups(&correlation(data, &all)?, *threshold)
        }
    };
    for (g, group) in groups.iter().enumerate() {
        if group.is_empty() {
            return Err(CliError::data(format!("group {} is empty", g + 1)));
        }
    }
    let anchor = anchor.map(|a| resolve_column(data, a)).transpose()?;
    if let Some(a) = anchor {
        if !groups.iter().any(|g| g.contains(&a)) {
            return Err(CliError::data(format!(
                "anchor {} is not a member of any group",
                data.names()[a]
            )));
        }
    }

    let fit = fit_ols(data)?;
    let names = data.names();
    let mut effects = Table::new("effects", &["effect", "estimate", "std_error", "t", "p"]);
    for (i, e) in individual_effects(&fit).iter().enumerate() {
        let label = match (fit.has_intercept, i) {
            (true, 0) => INTERCEPT_LABEL.to_string(),
            (true, _) => names[i - 1].clone(),
            (false, _) => names[i].clone(),
        };
        effects.push(effect_row(label, e));
    }

    let mut members = Table::new(
        "groups",
        &["group", "predictor", "anchor", "sign", "weight_w", "weight_a", "weight_star"],
    );
    let mut summary = Table::new("group_summary", &["group", "size", "apc_condition", "all_positive"]);
    for group in &groups {
        let label: String = group.iter().map(|&j| names[j].as_str()).collect::<Vec<_>>().join("+");
        let p = group.len();
        let corr = correlation(data, group)?;
        let apc = match anchor.and_then(|a| group.iter().position(|&j| j == a)) {
            Some(pos) => apc_arrangement_with_anchor(&corr, pos)?,
            None => apc_arrangement(&corr),
        };
        let ww = variability_weights(&corr)?;
        let wa = WeightVector::average(p)?;
        let tau_w = estimate_effect(&fit, group, &ww, &apc.signs)?;
        let tau_a = estimate_effect(&fit, group, &wa, &apc.signs)?;
        effects.push(effect_row(format!("tau_w[{label}]"), &tau_w));
        effects.push(effect_row(format!("tau_a[{label}]"), &tau_a));
        let star = if p <= MAX_GROUP_SIZE {
            let opt = optimal_effect(&fit, group)?;
            effects.push(effect_row(format!("tau_star[{label}]"), &opt.estimate(&fit, group)?));
            Some(opt.weights.as_slice().to_vec())
        } else {
            None
        };
        let signed_w = apc.signs.apply(ww.as_slice());
        let signed_a = apc.signs.apply(wa.as_slice());
        for (k, &j) in group.iter().enumerate() {
            members.push(vec![
                label.clone().into(),
                names[j].clone().into(),
                (k == apc.anchor).into(),
                Cell::Int(apc.signs.as_slice()[k] as i64),
                signed_w[k].into(),
                signed_a[k].into(),
                star.as_ref().map_or(f64::NAN, |s| s[k]).into(),
            ]);
        }
        summary.push(vec![
            label.into(),
            p.into(),
            apc.condition_holds.into(),
            is_all_positive(&corr, &apc.signs).into(),
        ]);
    }

    let mut model = Table::new("model", &["n", "dof", "sigma2", "rss"]);
    model.push(vec![fit.n.into(), fit.dof.into(), fit.sigma2_hat.into(), fit.rss.into()]);

    let mut report = Report::new("analyze");
    report.tables.extend([effects, members, summary, model]);
    Ok(report)
}

fn transforms_text(cfg: &SimCaseConfig) -> String {
    cfg.transforms
        .iter()
        .map(|t| {
            let sign = if t.flip { "-" } else { "" };
            if t.scale == 1.0 {
                format!("{sign}x{}", t.column + 1)
            } else {
                format!("{sign}{}*x{}", t.scale, t.column + 1)
            }
        })
        .collect::<Vec<_>>()
        .join(";")
}

fn simulation_report(reports: &[SimReport], claims: Option<&[ClaimCheck]>, seed: u64) -> Report {
    let mut report = Report::new("simulate");
    report.meta("seed", json!(seed));
    let mut effects = Table::new(
        "effects",
        &["case", "effect", "true_value", "mean", "variance", "mc_std_error", "exact_variance"],
    );
    let mut cases = Table::new("cases", &["case", "w1", "w2", "n", "sigma2", "replicates", "transforms"]);
    let mut ranges = Table::new("correlations", &["case", "group", "min", "max"]);
    for r in reports {
        for e in &r.effects {
            effects.push(vec![
                r.name.clone().into(),
                e.label.clone().into(),
                e.true_value.into(),
                e.mean.into(),
                e.variance.into(),
                e.mc_std_error.into(),
                e.exact_variance.into(),
            ]);
        }
        cases.push(vec![
            r.name.clone().into(),
            r.config.w1.into(),
            r.config.w2.into(),
            r.config.n.into(),
            r.config.sigma2.into(),
            r.replicates.into(),
            transforms_text(&r.config).into(),
        ]);
        for c in &r.correlation_ranges {
            ranges.push(vec![r.name.clone().into(), c.label.clone().into(), c.min.into(), c.max.into()]);
        }
    }
    report.tables.extend([effects, cases, ranges]);
    if let Some(claims) = claims {
        let mut t = Table::new("claims", &["claim", "passed", "detail"]);
        for c in claims {
            t.push(vec![c.name.clone().into(), c.passed.into(), c.detail.clone().into()]);
        }
        report.tables.push(t);
    }
    report
}

pub fn simulate(cfg: &SimulateConfig, seed: u64, pool: &ThreadPool) -> CliResult<Report> {
    match cfg {
        SimulateConfig::Suite { replicates } => {
            let (reports, claims) = parallel::run_suite(seed, *replicates, pool)?;
            Ok(simulation_report(&reports, Some(&claims), seed))
        }
        SimulateConfig::Case { name, config } => {
            let report = parallel::run_case(name, config, pool)?;
            Ok(simulation_report(&[report], None, config.seed))
        }
    }
}

pub fn clr(cfg: &ClrRunConfig, seed: u64) -> CliResult<Report> {
    let data = load_dataset(&cfg.csv, &cfg.response)?;
    clr_dataset(&data, cfg, seed)
}

pub fn clr_dataset(data: &Dataset, cfg: &ClrRunConfig, seed: u64) -> CliResult<Report> {
    let group = resolve_group(data, &cfg.group)?;
    if group.is_empty() {
        return Err(CliError::data("group is empty"));
    }
    let anchor = match &cfg.anchor {
        Some(a) => {
            let col = resolve_column(data, a)?;
            let pos = group.iter().position(|&j| j == col).ok_or_else(|| {
                CliError::data(format!("anchor {} is not a member of the group", data.names()[col]))
            })?;
            Some(pos)
        }
        None => None,
    };
    let selection = match cfg.select {
        SelectKind::MinRss => Selection::MinRss,
        SelectKind::Kfold => Selection::KFold { folds: cfg.folds },
    };
    let config = ClrConfig {
        c_offset: cfg.c_offset,
        offset_grid: cfg.offset_grid.clone(),
        selection,
        seed,
        anchor,
    };
    let sol = solve_clr(data, &group, &config)?;

    let names = data.names();
    let signs: Vec<f64> = (0..group.len()).map(|k| sol.signs.sign(k)).collect();
    let original = |v: &[f64]| -> Vec<f64> { v.iter().zip(&signs).map(|(x, s)| x * s).collect() };
    let beta_star = original(&sol.beta_star);
    let plus = original(&sol.candidates[0]);
    let minus = original(&sol.candidates[1]);
    let side = |i: usize| if i == 0 { "+" } else { "-" };

    let mut report = Report::new("clr");
    report.meta(
        "group",
        json!(group.iter().map(|&j| names[j].as_str()).collect::<Vec<_>>()),
    );
    report.meta("beta_star", json_numbers(&beta_star));
    report.meta(
        "candidates",
        json!([
            { "side": "+", "coefficients": json_numbers(&plus), "score": json_number(sol.scores[0]) },
            { "side": "-", "coefficients": json_numbers(&minus), "score": json_number(sol.scores[1]) },
        ]),
    );
    report.meta(
        "chosen",
        json!({ "side": side(sol.chosen_index), "coefficients": json_numbers(&sol.chosen) }),
    );
    let (method, folds) = match cfg.select {
        SelectKind::MinRss => ("min-rss", Json::Null),
        SelectKind::Kfold => ("kfold", json!(cfg.folds)),
    };
    report.meta(
        "diagnostics",
        json!({
            "signs": sol.signs.as_slice(),
            "weights": json_numbers(sol.weights.as_slice()),
            "tau_hat": json_number(sol.tau_hat),
            "min_norm_sq": json_number(sol.min_norm_sq),
            "c_offset": json_number(sol.c_offset),
            "c": json_number(sol.c),
            "direction": json_numbers(&original(&sol.direction)),
            "selection": method,
            "folds": folds,
            "seed": seed,
            "rss_ols": json_number(sol.rss_ols),
            "rss_beta_star": json_number(sol.rss_beta_star),
            "rss_chosen": json_number(sol.rss_chosen),
        }),
    );

    let mut members = Table::new(
        "group",
        &["predictor", "sign", "weight", "ols", "beta_star", "candidate_plus", "candidate_minus", "chosen"],
    );
    for (k, &j) in group.iter().enumerate() {
        members.push(vec![
            names[j].clone().into(),
            Cell::Int(sol.signs.as_slice()[k] as i64),
            sol.weights.as_slice()[k].into(),
            sol.ols_group[k].into(),
            beta_star[k].into(),
            plus[k].into(),
            minus[k].into(),
            sol.chosen[k].into(),
        ]);
    }
    let fit = fit_ols(data)?;
    let mut coefs = Table::new("coefficients", &["term", "ols", "clr"]);
    for i in 0..fit.n_coefficients() {
        let label = match (fit.has_intercept, i) {
            (true, 0) => INTERCEPT_LABEL.to_string(),
            (true, _) => names[i - 1].clone(),
            (false, _) => names[i].clone(),
        };
        coefs.push(vec![label.into(), fit.beta_hat[i].into(), sol.coefficients[i].into()]);
    }
    report.tables.extend([members, coefs]);
    Ok(report)
}
