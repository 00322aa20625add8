//! Allocation rules as pure maps from peak profiles to allocations.
//!
//! Every rule here is peaks-only: the allocation depends on preferences
//! through reported peaks alone, and each commodity is divided separately.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::econ::{is_feasible, Allocation, Bundle, Economy, PeakProfile};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::waterfill::{highest_level, lowest_level};

/// Which side of the endowment the peak sum falls on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Peaks sum to more than the endowment: agents are capped.
    ExcessDemand,
    /// Peaks sum to less than the endowment: agents are topped up.
    ExcessSupply,
    /// Peaks sum exactly to the endowment.
    Balanced,
}

/// The common level of the one-commodity uniform rule.
///
/// In excess demand `∑ min(p_i, λ) = Ω` and `λ` is the smallest solution;
/// in excess supply `∑ max(p_i, λ) = Ω` and `λ` is the largest solution.
/// A balanced commodity reports `λ = max p_i`, at which the demand formula
/// hands everyone her peak.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaSolution {
    pub lambda: Rational,
    pub mode: Mode,
}

impl LambdaSolution {
    /// The allotment of an agent with peak `peak` at this level.
    pub fn allot(&self, peak: Rational) -> Rational {
        match self.mode {
            Mode::ExcessDemand => peak.min(self.lambda),
            Mode::ExcessSupply => peak.max(self.lambda),
            Mode::Balanced => peak,
        }
    }
}

fn check_column(peaks: &[Rational], omega: Rational, commodity: usize) -> Result<()> {
    for (agent, p) in peaks.iter().enumerate() {
        if p.is_negative() || *p > omega {
            return Err(Error::InvalidPeak {
                agent,
                commodity,
                value: p.to_string(),
                bound: omega.to_string(),
            });
        }
    }
    Ok(())
}

/// Solves the uniform rule's feasibility equation for one commodity.
pub fn solve_lambda(peaks: &[Rational], omega: Rational) -> Result<LambdaSolution> {
    check_column(peaks, omega, 0)?;
    Ok(lambda_unchecked(peaks, omega))
}

fn lambda_unchecked(peaks: &[Rational], omega: Rational) -> LambdaSolution {
    let total: Rational = peaks.iter().sum();
    let zeros = vec![Rational::ZERO; peaks.len()];
    if total > omega {
        let lambda = lowest_level(peaks, &zeros, omega, Some(Rational::ZERO))
            .expect("excess demand always has a nonnegative level");
        LambdaSolution {
            lambda,
            mode: Mode::ExcessDemand,
        }
    } else if total < omega {
        let lambda = highest_level(peaks, &zeros, omega, None)
            .expect("excess supply always has a level");
        LambdaSolution {
            lambda,
            mode: Mode::ExcessSupply,
        }
    } else {
        let lambda = peaks.iter().copied().fold(Rational::ZERO, Rational::max);
        LambdaSolution {
            lambda,
            mode: Mode::Balanced,
        }
    }
}

/// Per-commodity levels of the uniform rule.
pub fn uniform_lambdas(econ: &Economy, peaks: &PeakProfile) -> Result<Vec<LambdaSolution>> {
    econ.check_profile(peaks)?;
    Ok((0..econ.commodities())
        .map(|l| lambda_unchecked(&peaks.column(l), econ.omega()[l]))
        .collect())
}

/// The multidimensional uniform rule: per commodity, `min(p_i, λ)` under
/// excess demand and `max(p_i, λ)` under excess supply.
pub fn uniform_allocate(econ: &Economy, peaks: &PeakProfile) -> Result<Allocation> {
    let lambdas = uniform_lambdas(econ, peaks)?;
    let columns: Vec<Vec<Rational>> = lambdas
        .iter()
        .enumerate()
        .map(|(l, sol)| peaks.column(l).into_iter().map(|p| sol.allot(p)).collect())
        .collect();
    Ok(Allocation::from_columns(&columns, econ.agents()))
}

/// Checks that `reference` is a feasible allocation of the economy.
pub fn check_reference(econ: &Economy, reference: &Allocation) -> Result<()> {
    econ.check_allocation_shape(reference)
        .map_err(|e| Error::InvalidReference(e.to_string()))?;
    if !is_feasible(reference, econ)? {
        return Err(Error::InvalidReference(format!(
            "{reference:?} does not divide the endowment {:?}",
            econ.omega()
        )));
    }
    Ok(())
}

/// One commodity of the reference-point sequential rule.
fn sequential_column(peaks: &[Rational], reference: &[Rational], omega: Rational) -> Vec<Rational> {
    let total: Rational = peaks.iter().sum();
    if total >= omega {
        // min(p_i, g_i + λ), λ >= 0
        let lambda = lowest_level(peaks, reference, omega, Some(Rational::ZERO))
            .expect("a feasible reference admits a demand level");
        peaks
            .iter()
            .zip(reference)
            .map(|(p, g)| (*p).min(*g + lambda))
            .collect()
    } else {
        // max(p_i, g_i − λ), λ >= 0
        let level = highest_level(peaks, reference, omega, Some(Rational::ZERO))
            .expect("a feasible reference admits a supply level");
        peaks
            .iter()
            .zip(reference)
            .map(|(p, g)| (*p).max(*g + level))
            .collect()
    }
}

/// Sequential rule anchored at the feasible reference allocation `g`:
/// agents move from `g` toward their peaks at a common speed until the
/// commodity is exactly divided.
pub fn sequential_allocate(
    econ: &Economy,
    reference: &Allocation,
    peaks: &PeakProfile,
) -> Result<Allocation> {
    check_reference(econ, reference)?;
    econ.check_profile(peaks)?;
    Ok(sequential_unchecked(econ, reference, peaks))
}

fn sequential_unchecked(econ: &Economy, reference: &Allocation, peaks: &PeakProfile) -> Allocation {
    let columns: Vec<Vec<Rational>> = (0..econ.commodities())
        .map(|l| sequential_column(&peaks.column(l), &reference.column(l), econ.omega()[l]))
        .collect();
    Allocation::from_columns(&columns, econ.agents())
}

/// Checks one priority order per commodity, each a permutation of agents.
pub fn check_orders(econ: &Economy, orders: &[Vec<usize>]) -> Result<()> {
    if orders.len() != econ.commodities() {
        return Err(Error::InvalidOrder(format!(
            "{} orders for {} commodities",
            orders.len(),
            econ.commodities()
        )));
    }
    for (l, order) in orders.iter().enumerate() {
        let mut seen = vec![false; econ.agents()];
        if order.len() != econ.agents() {
            return Err(Error::InvalidOrder(format!(
                "order for commodity {l} lists {} agents, economy has {}",
                order.len(),
                econ.agents()
            )));
        }
        for &agent in order {
            if agent >= econ.agents() || std::mem::replace(&mut seen[agent], true) {
                return Err(Error::InvalidOrder(format!(
                    "order for commodity {l} is not a permutation: {order:?}"
                )));
            }
        }
    }
    Ok(())
}

fn serial_column(peaks: &[Rational], order: &[usize], omega: Rational) -> Vec<Rational> {
    let mut out = vec![Rational::ZERO; peaks.len()];
    let mut remaining = omega;
    let (last, rest) = order.split_last().expect("at least one agent");
    for &agent in rest {
        let take = peaks[agent].min(remaining);
        out[agent] = take;
        remaining -= take;
    }
    out[*last] = remaining;
    out
}

/// Serial rule: along each commodity's priority order, agents take their
/// peak amount while supply lasts; the last agent takes what is left.
/// `orders` are 0-indexed.
pub fn serial_allocate(econ: &Economy, orders: &[Vec<usize>], peaks: &PeakProfile) -> Result<Allocation> {
    check_orders(econ, orders)?;
    econ.check_profile(peaks)?;
    Ok(serial_unchecked(econ, orders, peaks))
}

fn serial_unchecked(econ: &Economy, orders: &[Vec<usize>], peaks: &PeakProfile) -> Allocation {
    let columns: Vec<Vec<Rational>> = (0..econ.commodities())
        .map(|l| serial_column(&peaks.column(l), &orders[l], econ.omega()[l]))
        .collect();
    Allocation::from_columns(&columns, econ.agents())
}

/// Proportional rule: shares `p_i / ∑p` of each commodity, equal split when
/// every peak is zero.
pub fn proportional_allocate(econ: &Economy, peaks: &PeakProfile) -> Result<Allocation> {
    econ.check_profile(peaks)?;
    let n = Rational::from(econ.agents());
    let columns: Vec<Vec<Rational>> = (0..econ.commodities())
        .map(|l| {
            let col = peaks.column(l);
            let omega = econ.omega()[l];
            let total: Rational = col.iter().sum();
            if total.is_positive() {
                col.iter().map(|p| *p * omega / total).collect()
            } else {
                vec![omega / n; col.len()]
            }
        })
        .collect();
    Ok(Allocation::from_columns(&columns, econ.agents()))
}

/// Serializable description of a rule.
///
/// Agents in serial orders are 0-indexed here and 1-indexed in files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawRuleSpec", into = "RawRuleSpec")]
pub enum RuleSpec {
    Uniform,
    Sequential { reference: Allocation },
    Serial { orders: Vec<Vec<usize>> },
    Proportional,
    /// Ignores the reports. Strategy-proof but not unanimous.
    Constant { allocation: Allocation },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
enum RawRuleSpec {
    Uniform,
    Sequential { reference: Allocation },
    Serial { orders: Vec<Vec<usize>> },
    Proportional,
    Constant { allocation: Allocation },
}

impl TryFrom<RawRuleSpec> for RuleSpec {
    type Error = Error;
    fn try_from(raw: RawRuleSpec) -> Result<Self> {
        Ok(match raw {
            RawRuleSpec::Uniform => RuleSpec::Uniform,
            RawRuleSpec::Proportional => RuleSpec::Proportional,
            RawRuleSpec::Sequential { reference } => RuleSpec::Sequential { reference },
            RawRuleSpec::Constant { allocation } => RuleSpec::Constant { allocation },
            RawRuleSpec::Serial { orders } => {
                let orders = orders
                    .into_iter()
                    .map(|order| {
                        order
                            .into_iter()
                            .map(|a| {
                                a.checked_sub(1).ok_or_else(|| {
                                    Error::InvalidOrder("agents are numbered from 1".into())
                                })
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                RuleSpec::Serial { orders }
            }
        })
    }
}

impl From<RuleSpec> for RawRuleSpec {
    fn from(spec: RuleSpec) -> Self {
        match spec {
            RuleSpec::Uniform => RawRuleSpec::Uniform,
            RuleSpec::Proportional => RawRuleSpec::Proportional,
            RuleSpec::Sequential { reference } => RawRuleSpec::Sequential { reference },
            RuleSpec::Constant { allocation } => RawRuleSpec::Constant { allocation },
            RuleSpec::Serial { orders } => RawRuleSpec::Serial {
                orders: orders
                    .into_iter()
                    .map(|o| o.into_iter().map(|a| a + 1).collect())
                    .collect(),
            },
        }
    }
}

impl RuleSpec {
    /// Serial rule using the same 0-indexed order in every commodity.
    pub fn serial_with_order(econ: &Economy, order: &[usize]) -> RuleSpec {
        RuleSpec::Serial {
            orders: vec![order.to_vec(); econ.commodities()],
        }
    }

    /// Serial rule with agents in index order.
    pub fn serial_identity(econ: &Economy) -> RuleSpec {
        let order: Vec<usize> = (0..econ.agents()).collect();
        RuleSpec::serial_with_order(econ, &order)
    }

    pub fn constant_equal_division(econ: &Economy) -> RuleSpec {
        RuleSpec::Constant {
            allocation: econ.equal_division(),
        }
    }

    /// Sequential rule whose reference gives agent `i` the fraction
    /// `(i+1) / (1+2+…+n)` of every commodity.
    pub fn skewed_sequential(econ: &Economy) -> RuleSpec {
        let n = econ.agents();
        let total = Rational::from(n * (n + 1) / 2);
        let shares = (0..n)
            .map(|i| {
                let w = Rational::from(i + 1) / total;
                Bundle::new(econ.omega().iter().map(|o| *o * w).collect())
            })
            .collect();
        RuleSpec::Sequential {
            reference: Allocation::new(shares),
        }
    }

    pub fn validate(&self, econ: &Economy) -> Result<()> {
        match self {
            RuleSpec::Uniform | RuleSpec::Proportional => Ok(()),
            RuleSpec::Sequential { reference } => check_reference(econ, reference),
            RuleSpec::Serial { orders } => check_orders(econ, orders),
            RuleSpec::Constant { allocation } => {
                econ.check_allocation_shape(allocation)
                    .map_err(|e| Error::InvalidAllocation(e.to_string()))?;
                if is_feasible(allocation, econ)? {
                    Ok(())
                } else {
                    Err(Error::InvalidAllocation(format!(
                        "{allocation:?} is not feasible"
                    )))
                }
            }
        }
    }

    /// Short human-readable name, 1-indexed agents.
    pub fn label(&self) -> String {
        fn bundles(a: &Allocation) -> String {
            a.shares()
                .iter()
                .map(|b| b.to_string())
                .collect::<Vec<_>>()
                .join(",")
        }
        match self {
            RuleSpec::Uniform => "uniform".into(),
            RuleSpec::Proportional => "proportional".into(),
            RuleSpec::Sequential { reference } => format!("sequential[{}]", bundles(reference)),
            RuleSpec::Constant { allocation } => format!("constant[{}]", bundles(allocation)),
            RuleSpec::Serial { orders } => {
                let mut s = String::from("serial[");
                let all_same = orders.windows(2).all(|w| w[0] == w[1]);
                let shown = if all_same { &orders[..orders.len().min(1)] } else { &orders[..] };
                for (k, order) in shown.iter().enumerate() {
                    if k > 0 {
                        s.push('|');
                    }
                    let names: Vec<String> = order.iter().map(|a| (a + 1).to_string()).collect();
                    let _ = write!(s, "{}", names.join(","));
                }
                s.push(']');
                s
            }
        }
    }
}

/// Dispatches to the rule named by `spec`.
pub fn evaluate_rule(spec: &RuleSpec, econ: &Economy, peaks: &PeakProfile) -> Result<Allocation> {
    spec.validate(econ)?;
    econ.check_profile(peaks)?;
    Ok(match spec {
        RuleSpec::Uniform => uniform_allocate(econ, peaks)?,
        RuleSpec::Sequential { reference } => sequential_unchecked(econ, reference, peaks),
        RuleSpec::Serial { orders } => serial_unchecked(econ, orders, peaks),
        RuleSpec::Proportional => proportional_allocate(econ, peaks)?,
        RuleSpec::Constant { allocation } => allocation.clone(),
    })
}

/// A rule that reads only the reported peaks.
pub trait PeaksOnlyRule: Sync {
    fn label(&self) -> String;
    fn allocate(&self, econ: &Economy, peaks: &PeakProfile) -> Result<Allocation>;
}

impl PeaksOnlyRule for RuleSpec {
    fn label(&self) -> String {
        RuleSpec::label(self)
    }

    fn allocate(&self, econ: &Economy, peaks: &PeakProfile) -> Result<Allocation> {
        evaluate_rule(self, econ, peaks)
    }
}

impl<R: PeaksOnlyRule + ?Sized> PeaksOnlyRule for &R {
    fn label(&self) -> String {
        (**self).label()
    }

    fn allocate(&self, econ: &Economy, peaks: &PeakProfile) -> Result<Allocation> {
        (**self).allocate(econ, peaks)
    }
}
