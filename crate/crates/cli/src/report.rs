//! Run reports and their JSON and table renderings.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use peakshare_core::axioms::ImplicationFailure;
use peakshare_core::dominance::{DominationVerdict, OptionBox, UniquenessReport};
use peakshare_core::rules::LambdaSolution;
use peakshare_core::{Allocation, AxiomReport, Bundle, Rational};

use crate::scenario::{Format, Scenario};
use crate::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct Versions {
    pub peakshare_cli: &'static str,
    pub peakshare_core: &'static str,
}

impl Default for Versions {
    fn default() -> Self {
        Versions {
            peakshare_cli: env!("CARGO_PKG_VERSION"),
            peakshare_core: peakshare_core::VERSION,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    /// A certified premise with a refuted conclusion.
    Inconsistent,
    GoldenMismatch,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Inconsistent | Status::GoldenMismatch => 3,
        }
    }
}

fn one_based<S: serde::Serializer>(v: &usize, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u64(*v as u64 + 1)
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ResultItem {
    Allocation {
        rule: String,
        allocation: Allocation,
        decimal: Vec<Vec<String>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        lambdas: Option<Vec<LambdaSolution>>,
    },
    Axiom(AxiomReport),
    Implications {
        rule: String,
        failures: Vec<ImplicationFailure>,
    },
    OptionBox {
        rule: String,
        #[serde(serialize_with = "one_based")]
        agent: usize,
        others: Vec<Bundle>,
        #[serde(flatten)]
        option_box: OptionBox,
    },
    Domination(DominationVerdict),
    /// An operation declined because a precondition is not certified.
    Refused {
        rule: String,
        operation: String,
        failed: Vec<String>,
    },
    Uniqueness(UniquenessReport),
    Golden {
        check: String,
        pass: bool,
        expected: Value,
        actual: Value,
    },
}

impl ResultItem {
    pub fn allocation(rule: String, allocation: Allocation, lambdas: Option<Vec<LambdaSolution>>) -> Self {
        let decimal = allocation
            .shares()
            .iter()
            .map(|b| b.iter().map(|x| x.to_decimal_string(6)).collect())
            .collect();
        ResultItem::Allocation {
            rule,
            allocation,
            decimal,
            lambdas,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub versions: Versions,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Scenario>,
    pub status: Status,
    pub results: Vec<ResultItem>,
    /// Only present when timings are requested, so reports stay
    /// byte-stable by default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

impl RunReport {
    pub fn new(command: &str, scenario: Option<Scenario>) -> Self {
        RunReport {
            tool: "peakshare",
            versions: Versions::default(),
            command: command.to_string(),
            case: None,
            scenario,
            status: Status::Ok,
            results: Vec::new(),
            elapsed_ms: None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    /// Golden checks that did not match.
    pub fn golden_failures(&self) -> Vec<&str> {
        self.results
            .iter()
            .filter_map(|r| match r {
                ResultItem::Golden { check, pass: false, .. } => Some(check.as_str()),
                _ => None,
            })
            .collect()
    }
}

pub fn render(report: &RunReport, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Table => render_table(report),
    }
}

/// Writes the rendered report to `path`, or stdout when `path` is `None`.
pub fn emit_report(report: &RunReport, format: Format, path: Option<&Path>) -> Result<String, CliError> {
    let text = render(report, format);
    match path {
        Some(p) => std::fs::write(p, &text).map_err(|e| CliError::Write {
            path: p.display().to_string(),
            source: e,
        })?,
        None => print!("{text}"),
    }
    Ok(text)
}

fn num(x: &Rational) -> String {
    let frac = x.to_fraction_string();
    let dec = x.to_decimal_string(6);
    format!("{frac} ({dec})")
}

fn bundle(b: &Bundle) -> String {
    let parts: Vec<String> = b.iter().map(num).collect();
    format!("({})", parts.join(", "))
}

fn short(b: &Bundle) -> String {
    b.to_string()
}

fn profile_of(bundles: &[Bundle]) -> String {
    let parts: Vec<String> = bundles.iter().map(short).collect();
    format!("[{}]", parts.join(", "))
}

fn render_table(report: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "peakshare {} | command {}{} | status {:?}",
        report.versions.peakshare_cli,
        report.command,
        report.case.as_ref().map(|c| format!(" {c}")).unwrap_or_default(),
        report.status
    );
    if report.results.is_empty() {
        let _ = writeln!(out, "(no results)");
    }
    let mut previous_golden = false;
    for item in &report.results {
        let golden = matches!(item, ResultItem::Golden { .. });
        if !(golden && previous_golden) {
            out.push('\n');
        }
        previous_golden = golden;
        match item {
            ResultItem::Allocation { rule, allocation, lambdas, .. } => {
                let _ = writeln!(out, "allocation  rule {rule}");
                for (i, share) in allocation.shares().iter().enumerate() {
                    let _ = writeln!(out, "  agent {:<3} {}", i + 1, bundle(share));
                }
                if let Some(ls) = lambdas {
                    for (l, sol) in ls.iter().enumerate() {
                        let _ = writeln!(
                            out,
                            "  commodity {} level {} {:?}",
                            l + 1,
                            num(&sol.lambda),
                            sol.mode
                        );
                    }
                }
            }
            ResultItem::Axiom(r) => {
                let _ = writeln!(
                    out,
                    "{:<26} rule {:<24} {:<18} checked {}",
                    r.axiom.name(),
                    r.rule,
                    format!("{:?}", r.verdict),
                    r.profiles_checked
                );
                if let Some(w) = &r.witness {
                    let _ = writeln!(out, "  profile    {}", profile_of(w.profile.peaks()));
                    if let Some(a) = w.agent {
                        let _ = writeln!(out, "  agent      {}", a + 1);
                    }
                    if let Some(a) = w.other_agent {
                        let _ = writeln!(out, "  other      {}", a + 1);
                    }
                    if let Some(l) = w.commodity {
                        let _ = writeln!(out, "  commodity  {}", l + 1);
                    }
                    if let Some(d) = &w.deviation {
                        let _ = writeln!(out, "  deviation  {}", bundle(d));
                    }
                    for (i, share) in w.truthful.shares().iter().enumerate() {
                        let _ = writeln!(out, "  truthful   agent {} {}", i + 1, bundle(share));
                    }
                    if let Some(dev) = &w.deviated {
                        for (i, share) in dev.shares().iter().enumerate() {
                            let _ = writeln!(out, "  deviated   agent {} {}", i + 1, bundle(share));
                        }
                    }
                    if let Some(q) = &w.preference {
                        let ws: Vec<String> = q.weights().iter().map(num).collect();
                        let _ = writeln!(out, "  weights    [{}]", ws.join(", "));
                    }
                }
                if let Some(n) = &r.note {
                    let _ = writeln!(out, "  note       {n}");
                }
            }
            ResultItem::Implications { rule, failures } => {
                for f in failures {
                    let premises: Vec<&str> = f.premises.iter().map(|a| a.name()).collect();
                    let _ = writeln!(
                        out,
                        "INCONSISTENT rule {rule}: {} certified but {} refuted",
                        premises.join(" + "),
                        f.conclusion.name()
                    );
                }
            }
            ResultItem::OptionBox { rule, agent, others, option_box } => {
                let _ = writeln!(
                    out,
                    "option box  rule {rule}  agent {}  others {}",
                    agent + 1,
                    profile_of(others)
                );
                let iv = &option_box.intervals;
                for l in 0..iv.lower.len() {
                    let _ = writeln!(
                        out,
                        "  commodity {} [{}, {}]",
                        l + 1,
                        num(&iv.lower[l]),
                        num(&iv.upper[l])
                    );
                }
                let _ = writeln!(out, "  valid {}  swept {}", option_box.valid, option_box.swept);
            }
            ResultItem::Domination(v) => {
                let _ = writeln!(
                    out,
                    "domination  A {}  B {}  relation {:?}  conditioning profiles {}",
                    v.rule_a, v.rule_b, v.relation, v.conditioning_profiles
                );
                for e in &v.evidence {
                    let _ = writeln!(
                        out,
                        "  {:?} fails: agent {} others {} point {}",
                        e.direction,
                        e.agent + 1,
                        profile_of(&e.others),
                        bundle(&e.point)
                    );
                }
            }
            ResultItem::Refused { rule, operation, failed } => {
                let _ = writeln!(out, "{operation} refused for {rule}: not certified {}", failed.join(", "));
            }
            ResultItem::Uniqueness(u) => {
                let _ = writeln!(
                    out,
                    "uniqueness  verdict {:?}  survivors {}  match uniform {}",
                    u.verdict,
                    u.survivors.join(", "),
                    u.survivors_match_uniform
                );
                for e in &u.entries {
                    let reasons: Vec<String> = e
                        .eliminated_by
                        .iter()
                        .map(|x| format!("{} ({})", x.axiom.name(), x.detail))
                        .collect();
                    let status = if e.survives { "survives".to_string() } else { reasons.join("; ") };
                    let _ = writeln!(out, "  {:<32} {status}", e.rule);
                }
            }
            ResultItem::Golden { check, pass, expected, actual } => {
                let mark = if *pass { "ok  " } else { "FAIL" };
                let _ = writeln!(out, "{mark} {check}");
                if !pass {
                    let _ = writeln!(out, "  expected {expected}");
                    let _ = writeln!(out, "  actual   {actual}");
                }
            }
        }
    }
    if let Some(ms) = report.elapsed_ms {
        let _ = writeln!(out, "\nelapsed {ms} ms");
    }
    out
}
