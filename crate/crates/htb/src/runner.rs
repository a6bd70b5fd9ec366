//! Command implementations shared by the binary and the integration
//! tests: compute, convert to report DTOs, render.

use htb_core::{
    classify_regime, cote_asymptotic, counterexample_suite, dependent_constants,
    independent_constants, spectral_constants, var_asymptotic, verify_bounds,
    convergence_study_on, DependenceSpec, EvalMethod, RiskConstants,
};

use crate::batchfile::write_batches;
use crate::config::AnalysisConfig;
use crate::error::{AppError, AppResult};
use crate::parallel::sample_f_parallel;
use crate::report::{
    BoundsReportDto, ConstantsBlockDto, ConstantsReportDto, ConvergenceReportDto,
    CounterexampleReportDto, QuantileRowDto, RegimeReportDto, VERSION,
};

/// Report rendering selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

fn to_json<T: serde::Serialize>(value: &T) -> AppResult<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Expectation route for constants: exact enumeration whenever the
/// sharing model supports it, otherwise seeded Monte Carlo over matrix
/// draws using the configured draw count and seed.
fn eval_method(cfg: &AnalysisConfig) -> EvalMethod {
    if cfg.model.supports_exact() {
        EvalMethod::Exact
    } else {
        EvalMethod::MonteCarlo { n: cfg.n, seed: cfg.seed }
    }
}

fn quantile_rows(
    blocks: &[&RiskConstants],
    gammas: &[f64],
    alpha: f64,
) -> AppResult<Vec<QuantileRowDto>> {
    let mut rows = Vec::new();
    for c in blocks {
        let mut targets: Vec<(String, f64)> = c
            .per_agent
            .iter()
            .enumerate()
            .map(|(i, e)| (format!("agent {i}"), e.value))
            .collect();
        targets.push(("market".to_string(), c.market.value));
        for (target, value) in targets {
            for &gamma in gammas {
                let var = var_asymptotic(value, alpha, gamma)?;
                let cote = if alpha > 1.0 {
                    Some(cote_asymptotic(value, alpha, gamma)?)
                } else {
                    None
                };
                rows.push(QuantileRowDto {
                    dependence: c.dependence.label().to_string(),
                    target: target.clone(),
                    gamma,
                    var,
                    cote,
                });
            }
        }
    }
    Ok(rows)
}

/// `constants`: the three dependence structures' risk constants plus
/// the asymptotic quantiles they imply at the configured tail levels.
pub fn run_constants(cfg: &AnalysisConfig, format: Format) -> AppResult<String> {
    let method = eval_method(cfg);
    let ind = independent_constants(&cfg.model, &cfg.tail, cfg.norm, method)?;
    let dep = dependent_constants(&cfg.model, &cfg.tail, cfg.norm, method)?;
    let rho = cfg.canonical_measure()?;
    let cus = spectral_constants(&cfg.model, &cfg.tail, &rho, cfg.norm, method)?;
    let report = ConstantsReportDto {
        version: VERSION.to_string(),
        command: "constants".to_string(),
        alpha: cfg.tail.alpha(),
        r: cfg.norm.r(),
        constants: vec![
            ConstantsBlockDto::from_core(&ind),
            ConstantsBlockDto::from_core(&dep),
            ConstantsBlockDto::from_core(&cus),
        ],
        quantiles: quantile_rows(&[&ind, &dep, &cus], &cfg.gammas, cfg.tail.alpha())?,
    };
    match format {
        Format::Json => to_json(&report),
        Format::Csv => Ok(report.to_csv()),
    }
}

/// `bounds`: verify every ordering the regime guarantees. The boolean
/// is `all_guaranteed_pass`; callers map `false` to exit code 3.
pub fn run_bounds(cfg: &AnalysisConfig, format: Format) -> AppResult<(String, bool)> {
    let rho = cfg.canonical_measure()?;
    let report = verify_bounds(&cfg.model, &cfg.tail, &rho, cfg.norm, eval_method(cfg))?;
    let dto = BoundsReportDto::from_core(&report);
    let rendered = match format {
        Format::Json => to_json(&dto)?,
        Format::Csv => dto.to_csv(),
    };
    Ok((rendered, report.all_guaranteed_pass))
}

/// `counterexample`: closed-form vs. numeric evaluation of the
/// common-shock construction. The boolean is overall consistency;
/// callers map `false` to exit code 3.
pub fn run_counterexample(alpha: f64, r: f64, format: Format) -> AppResult<(String, bool)> {
    let report = counterexample_suite(alpha, r)?;
    let dto = CounterexampleReportDto::from_core(&report);
    let rendered = match format {
        Format::Json => to_json(&dto)?,
        Format::Csv => dto.to_csv(),
    };
    Ok((rendered, report.values_agree && report.crossovers_match))
}

/// `simulate`: chunk-parallel sampling, then the convergence study.
/// Also persists raw batches when the config asks for it.
pub fn run_simulate(
    cfg: &AnalysisConfig,
    format: Format,
    threads: Option<usize>,
) -> AppResult<String> {
    for pair in cfg.gammas.windows(2) {
        if !(pair[1] < pair[0]) {
            return Err(AppError::validation_one(
                "/gammas",
                "tail levels must be strictly decreasing for a convergence study",
            ));
        }
    }
    let spec = DependenceSpec::new(cfg.dependence.clone(), cfg.tail.clone())?;
    let batches = sample_f_parallel(&spec, &cfg.model, cfg.norm, cfg.n, cfg.seed, threads)?;
    if let Some(path) = &cfg.outputs.batches {
        write_batches(path, &batches).map_err(|e| AppError::io(path.clone(), e))?;
        log::info!("batches written to {}", path.display());
    }
    let study = convergence_study_on(&batches, &spec, &cfg.model, cfg.norm, &cfg.gammas)?;
    let dto = ConvergenceReportDto::from_core(&study);
    match format {
        Format::Json => to_json(&dto),
        Format::Csv => Ok(dto.to_csv()),
    }
}

/// `regime`: classification only; `format = None` renders terminal text.
pub fn run_regime(alpha: f64, r: f64, format: Option<Format>) -> AppResult<String> {
    let classification = classify_regime(alpha, r)?;
    let dto = RegimeReportDto::from_core(&classification);
    match format {
        None => Ok(dto.regime.to_text()),
        Some(Format::Json) => to_json(&dto),
        Some(Format::Csv) => Ok(dto.to_csv()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{build_config, parse_config};

    fn cfg(doc: serde_json::Value) -> AnalysisConfig {
        build_config(parse_config(&doc.to_string()).unwrap(), None).unwrap()
    }

    fn worked_example() -> AnalysisConfig {
        cfg(serde_json::json!({
            "schema": "htb-config/1",
            "tail": {"alpha": 2.0, "k": [1.0, 1.0]},
            "r": 1.0,
            "sharing": {"type": "deterministic", "matrix": [[1.0, 0.5], [0.0, 0.5]]},
            "dependence": {"kind": "independent"},
            "gammas": [0.01],
            "mc": {"n": 100, "seed": 5}
        }))
    }

    #[test]
    fn constants_json_report_is_complete_and_reproducible() {
        let c = worked_example();
        let a = run_constants(&c, Format::Json).unwrap();
        let b = run_constants(&c, Format::Json).unwrap();
        assert_eq!(a, b);
        let v: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v["constants"].as_array().unwrap().len(), 3);
        assert_eq!(v["constants"][0]["dependence"], "independent");
        assert_eq!(v["constants"][0]["market"]["value"], 2.0);
        assert_eq!(v["constants"][0]["per_agent"][0]["value"], 1.25);
        assert_eq!(v["constants"][1]["market"]["value"], 4.0);
        // Independent kind: custom block reproduces the independent one.
        assert_eq!(v["constants"][2]["market"]["value"], 2.0);
        // VaR at gamma = 0.01 for C = 2, alpha = 2: sqrt(200).
        let var = v["quantiles"]
            .as_array()
            .unwrap()
            .iter()
            .find(|q| q["dependence"] == "independent" && q["target"] == "market")
            .unwrap();
        assert!((var["var"].as_f64().unwrap() - 200f64.sqrt()).abs() < 1e-12);
        assert!((var["cote"].as_f64().unwrap() - 2.0 * 200f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn constants_csv_has_one_row_per_target() {
        let c = worked_example();
        let csv = run_constants(&c, Format::Csv).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "dependence,target,value,std_error,method");
        // 3 blocks x (2 agents + market).
        assert_eq!(lines.len(), 1 + 3 * 3);
        assert!(lines[1].starts_with("independent,agent 0,1.25,0,exact"));
    }

    #[test]
    fn bounds_pass_in_a_guaranteed_regime() {
        let (rendered, pass) = run_bounds(&worked_example(), Format::Csv).unwrap();
        assert!(pass);
        assert!(rendered.starts_with("name,lhs,rhs,guaranteed,pass,slack,stderr\n"));
        for line in rendered.lines().skip(1) {
            assert_eq!(line.split(',').count(), 7, "row: {line}");
        }
    }

    #[test]
    fn counterexample_is_consistent_and_flags_activations() {
        let (rendered, ok) = run_counterexample(1.5, 3.0, Format::Json).unwrap();
        assert!(ok);
        let v: serde_json::Value = serde_json::from_str(&rendered).unwrap();
        assert_eq!(v["values"].as_array().unwrap().len(), 6);
        assert_eq!(v["crossovers"].as_array().unwrap().len(), 4);
        for c in v["crossovers"].as_array().unwrap() {
            assert_eq!(c["active"], true, "1 < alpha < r activates every crossover");
        }
    }

    #[test]
    fn simulate_produces_the_documented_csv_shape() {
        let mut c = worked_example();
        c.n = 4000;
        c.gammas = vec![0.05, 0.02];
        let csv = run_simulate(&c, Format::Csv, Some(2)).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "gamma,target,empirical,asymptotic,ratio,stderr");
        // (2 agents + aggregate) x 2 gammas x 2 metrics.
        assert_eq!(lines.len(), 1 + 3 * 2 * 2);
        assert!(lines.iter().any(|l| l.contains(",aggregate/var,")));
        assert!(lines.iter().any(|l| l.contains(",agent 0/cote,")));
    }

    #[test]
    fn simulate_rejects_unordered_gammas_with_a_pointer() {
        let mut c = worked_example();
        c.gammas = vec![0.01, 0.05];
        let err = run_simulate(&c, Format::Csv, None).unwrap_err();
        assert!(err.to_string().contains("/gammas"));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn regime_text_mentions_the_degenerate_equality() {
        let text = run_regime(1.0, 1.0, None).unwrap();
        assert!(text.contains("degenerate equality"));
        let json = run_regime(1.0, 1.0, Some(Format::Json)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["degenerate_equality"], true);
    }
}
