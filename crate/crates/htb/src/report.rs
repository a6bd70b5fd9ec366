//! Report documents: serializable mirrors of the analysis results plus
//! plot-ready CSV renderings.
//!
//! CSV conventions: `.` decimal point, no locale, no quoting (labels
//! contain no commas), `\n` line endings, empty cell for "not
//! applicable". All numbers use shortest round-trip formatting, so a
//! report is bit-for-bit reproducible from (config, seed, version).

use serde::Serialize;

use htb_core::{
    BoundCheck, BoundReport, ConvergenceStudy, CounterexampleReport, MethodTag,
    RegimeClassification, Relation, RiskConstants, TailMetric,
};

use crate::config::MeasureDto;

/// Crate version stamped into every JSON report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn fmt_f64(x: f64) -> String {
    x.to_string()
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

// ---------------------------------------------------------------------
// Shared DTO pieces
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct EstimateDto {
    pub value: f64,
    pub std_error: f64,
    pub method: String,
}

fn method_label(tag: MethodTag) -> String {
    match tag {
        MethodTag::ExactEnumeration => "exact".into(),
        MethodTag::MonteCarlo { n, seed } => format!("monte_carlo(n={n};seed={seed})"),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsBlockDto {
    /// Which dependence structure: independent / dependent / custom.
    pub dependence: String,
    pub per_agent: Vec<EstimateDto>,
    pub market: EstimateDto,
}

impl ConstantsBlockDto {
    pub fn from_core(c: &RiskConstants) -> Self {
        let est = |e: &htb_core::ExpectationEstimate| EstimateDto {
            value: e.value,
            std_error: e.std_error,
            method: method_label(e.method),
        };
        ConstantsBlockDto {
            dependence: c.dependence.label().to_string(),
            per_agent: c.per_agent.iter().map(est).collect(),
            market: est(&c.market),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RegimeDto {
    pub alpha: f64,
    pub r: f64,
    pub individual: String,
    pub market_independent: String,
    pub market_dependent: String,
    pub counterexample_zone: bool,
    pub degenerate_equality: bool,
}

impl RegimeDto {
    pub fn from_core(c: &RegimeClassification) -> Self {
        use htb_core::{IndividualRegime, MarketBound};
        let market = |b: MarketBound| {
            match b {
                MarketBound::Lower => "lower_bound",
                MarketBound::Upper => "upper_bound",
                MarketBound::NoneGuaranteed => "none_guaranteed",
            }
            .to_string()
        };
        RegimeDto {
            alpha: c.alpha,
            r: c.r,
            individual: match c.individual {
                IndividualRegime::SandwichUp => "independent <= custom <= dependent",
                IndividualRegime::SandwichDown => "dependent <= custom <= independent",
            }
            .to_string(),
            market_independent: market(c.market_independent),
            market_dependent: market(c.market_dependent),
            counterexample_zone: c.counterexample_zone,
            degenerate_equality: c.degenerate_equality,
        }
    }

    /// Human-readable multi-line classification for terminal output.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("alpha = {}, r = {}\n", self.alpha, self.r));
        out.push_str(&format!("individual constants: {}\n", self.individual));
        out.push_str(&format!(
            "market: independent-vs-custom {}, dependent-vs-custom {}\n",
            self.market_independent.replace('_', " "),
            self.market_dependent.replace('_', " "),
        ));
        if self.degenerate_equality {
            out.push_str(
                "degenerate equality: all market constants coincide at alpha = r = 1\n",
            );
        }
        if self.counterexample_zone {
            out.push_str(
                "counterexample zone: neither reference structure bounds the market constant\n",
            );
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckDto {
    pub name: String,
    pub relation: String,
    pub lhs: f64,
    pub rhs: f64,
    pub guaranteed: bool,
    pub pass: bool,
    pub slack: f64,
    pub std_error: f64,
}

impl CheckDto {
    fn from_core(c: &BoundCheck) -> Self {
        CheckDto {
            name: c.name.clone(),
            relation: match c.relation {
                Relation::Le => "le",
                Relation::Eq => "eq",
                Relation::Info => "info",
            }
            .to_string(),
            lhs: c.lhs,
            rhs: c.rhs,
            guaranteed: c.guaranteed,
            pass: c.pass,
            slack: c.slack,
            std_error: c.std_error,
        }
    }
}

const CHECK_CSV_HEADER: &str = "name,lhs,rhs,guaranteed,pass,slack,stderr";

fn check_csv_row(c: &CheckDto) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        c.name,
        fmt_f64(c.lhs),
        fmt_f64(c.rhs),
        c.guaranteed,
        c.pass,
        fmt_f64(c.slack),
        fmt_f64(c.std_error)
    )
}

// ---------------------------------------------------------------------
// constants
// ---------------------------------------------------------------------

/// One asymptotic tail quantile row: Value-at-Risk and (for alpha > 1)
/// conditional tail expectation implied by a constant at a tail level.
#[derive(Debug, Clone, Serialize)]
pub struct QuantileRowDto {
    pub dependence: String,
    pub target: String,
    pub gamma: f64,
    pub var: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cote: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsReportDto {
    pub version: String,
    pub command: String,
    pub alpha: f64,
    pub r: f64,
    pub constants: Vec<ConstantsBlockDto>,
    /// Asymptotic quantiles implied by the constants at the configured
    /// tail levels.
    pub quantiles: Vec<QuantileRowDto>,
}

impl ConstantsReportDto {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dependence,target,value,std_error,method\n");
        for block in &self.constants {
            for (i, e) in block.per_agent.iter().enumerate() {
                out.push_str(&format!(
                    "{},agent {},{},{},{}\n",
                    block.dependence,
                    i,
                    fmt_f64(e.value),
                    fmt_f64(e.std_error),
                    e.method
                ));
            }
            out.push_str(&format!(
                "{},market,{},{},{}\n",
                block.dependence,
                fmt_f64(block.market.value),
                fmt_f64(block.market.std_error),
                block.market.method
            ));
        }
        out
    }
}

// ---------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct RealizationDto {
    pub checked: usize,
    pub violations: usize,
    pub worst_slack: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsReportDto {
    pub version: String,
    pub command: String,
    pub regime: RegimeDto,
    pub constants: Vec<ConstantsBlockDto>,
    pub checks: Vec<CheckDto>,
    pub realizations: RealizationDto,
    pub all_guaranteed_pass: bool,
}

impl BoundsReportDto {
    pub fn from_core(r: &BoundReport) -> Self {
        BoundsReportDto {
            version: VERSION.to_string(),
            command: "bounds".to_string(),
            regime: RegimeDto::from_core(&r.regime),
            constants: vec![
                ConstantsBlockDto::from_core(&r.independent),
                ConstantsBlockDto::from_core(&r.dependent),
                ConstantsBlockDto::from_core(&r.custom),
            ],
            checks: r.checks.iter().map(CheckDto::from_core).collect(),
            realizations: RealizationDto {
                checked: r.realizations.checked,
                violations: r.realizations.violations,
                worst_slack: r.realizations.worst_slack,
            },
            all_guaranteed_pass: r.all_guaranteed_pass,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CHECK_CSV_HEADER);
        out.push('\n');
        for c in &self.checks {
            out.push_str(&check_csv_row(c));
            out.push('\n');
        }
        out
    }
}

// ---------------------------------------------------------------------
// counterexample
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct FunctionalValueDto {
    pub name: String,
    pub numeric: f64,
    pub closed_form: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossoverDto {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub active: bool,
    pub predicted: bool,
    pub boundary: bool,
    pub matches: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleReportDto {
    pub version: String,
    pub command: String,
    pub alpha: f64,
    pub r: f64,
    /// The standardized common-shock measure the suite is built on.
    pub common_shock: MeasureDto,
    pub values: Vec<FunctionalValueDto>,
    pub crossovers: Vec<CrossoverDto>,
    pub max_rel_error: f64,
    pub values_agree: bool,
    pub crossovers_match: bool,
}

impl CounterexampleReportDto {
    pub fn from_core(r: &CounterexampleReport) -> Self {
        CounterexampleReportDto {
            version: VERSION.to_string(),
            command: "counterexample".to_string(),
            alpha: r.alpha,
            r: r.r,
            common_shock: MeasureDto::from_core(&r.common_shock),
            values: r
                .values
                .iter()
                .map(|v| FunctionalValueDto {
                    name: v.name.to_string(),
                    numeric: v.numeric,
                    closed_form: v.closed_form,
                    rel_error: v.rel_error,
                })
                .collect(),
            crossovers: r
                .crossovers
                .iter()
                .map(|c| CrossoverDto {
                    name: c.name.to_string(),
                    lhs: c.lhs,
                    rhs: c.rhs,
                    active: c.active,
                    predicted: c.predicted,
                    boundary: c.boundary,
                    matches: c.matches,
                })
                .collect(),
            max_rel_error: r.max_rel_error,
            values_agree: r.values_agree,
            crossovers_match: r.crossovers_match,
        }
    }

    /// Same column layout as the bounds CSV: functional-value rows are
    /// equality checks of numeric vs. closed form; crossover rows put
    /// the strict inequality's sides in lhs/rhs, `guaranteed` marks the
    /// theoretical prediction, and `pass` marks agreement with it.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CHECK_CSV_HEADER);
        out.push('\n');
        for v in &self.values {
            out.push_str(&format!(
                "{},{},{},true,{},{},0\n",
                v.name,
                fmt_f64(v.numeric),
                fmt_f64(v.closed_form),
                v.rel_error <= 1e-12,
                fmt_f64(-(v.numeric - v.closed_form).abs()),
            ));
        }
        for c in &self.crossovers {
            out.push_str(&format!(
                "{},{},{},{},{},{},0\n",
                c.name,
                fmt_f64(c.lhs),
                fmt_f64(c.rhs),
                c.predicted,
                c.matches,
                fmt_f64(c.rhs - c.lhs),
            ));
        }
        out
    }
}

// ---------------------------------------------------------------------
// simulate (convergence study)
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRowDto {
    pub gamma: f64,
    /// Batch label plus metric, e.g. `"aggregate/var"`.
    pub target: String,
    pub empirical: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub asymptotic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReportDto {
    pub version: String,
    pub command: String,
    pub alpha: f64,
    pub r: f64,
    pub n: usize,
    pub seed: u64,
    pub constants: ConstantsBlockDto,
    pub rows: Vec<ConvergenceRowDto>,
}

impl ConvergenceReportDto {
    pub fn from_core(s: &ConvergenceStudy) -> Self {
        ConvergenceReportDto {
            version: VERSION.to_string(),
            command: "simulate".to_string(),
            alpha: s.alpha,
            r: s.r,
            n: s.n,
            seed: s.seed,
            constants: ConstantsBlockDto::from_core(&s.constants),
            rows: s
                .rows
                .iter()
                .map(|row| ConvergenceRowDto {
                    gamma: row.gamma,
                    target: format!(
                        "{}/{}",
                        row.target,
                        match row.metric {
                            TailMetric::Var => "var",
                            TailMetric::Cote => "cote",
                        }
                    ),
                    empirical: row.empirical,
                    asymptotic: row.asymptotic,
                    ratio: row.ratio,
                    std_error: row.std_error,
                })
                .collect(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("gamma,target,empirical,asymptotic,ratio,stderr\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                fmt_f64(row.gamma),
                row.target,
                fmt_f64(row.empirical),
                fmt_opt(row.asymptotic),
                fmt_opt(row.ratio),
                fmt_opt(row.std_error),
            ));
        }
        out
    }
}

// ---------------------------------------------------------------------
// regime
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct RegimeReportDto {
    pub version: String,
    pub command: String,
    #[serde(flatten)]
    pub regime: RegimeDto,
}

impl RegimeReportDto {
    pub fn from_core(c: &RegimeClassification) -> Self {
        RegimeReportDto {
            version: VERSION.to_string(),
            command: "regime".to_string(),
            regime: RegimeDto::from_core(c),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "alpha,r,individual,market_independent,market_dependent,\
             counterexample_zone,degenerate_equality\n",
        );
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_f64(self.regime.alpha),
            fmt_f64(self.regime.r),
            self.regime.individual,
            self.regime.market_independent,
            self.regime.market_dependent,
            self.regime.counterexample_zone,
            self.regime.degenerate_equality,
        ));
        out
    }
}
