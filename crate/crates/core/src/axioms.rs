//! Exhaustive axiom certification over peak grids.
//!
//! A rule is evaluated once at every grid profile; each axiom is then a
//! scan over that table. Scans are split across a worker pool and always
//! return the violation with the smallest profile index (ties broken by
//! agent, deviation and commodity in that order), so reports do not depend
//! on the number of workers.
//!
//! Strategy-proofness, equal treatment and the egalitarian lower bound are
//! properties of full preferences. For peaks-only rules they reduce to
//! betweenness: an agent with peak `p` weakly prefers `x` to `y` under every
//! multidimensional single-peaked preference iff `x = y` or `x` lies between
//! `p` and `y`. Betweenness gives strict preference by single-peakedness,
//! and whenever `x` is not between `p` and `y` some single-peaked preference
//! with peak `p` ranks `y` strictly above `x`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use rayon::ThreadPool;
use serde::{Deserialize, Serialize};

use crate::econ::{
    is_between, is_feasible, sp_witness_preference, Allocation, Bundle, Economy, PeakProfile,
    QuadraticPreference, WeightLadder,
};
use crate::error::{Error, Result};
use crate::grid::{PeakGrid, ProfileSpace};
use crate::rational::Rational;
use crate::rules::PeaksOnlyRule;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axiom {
    StrategyProofness,
    SameSidedness,
    Unanimity,
    EqualTreatment,
    ReplacementMonotonicity,
    NonBossiness,
    EgalitarianLowerBound,
    /// One-commodity only: an agent already past her peak keeps her
    /// allotment under any report on the same side of it.
    Uncompromisingness,
    /// Search for a strategy-proof rule dominating the tested one.
    ParetoUndominatedProbe,
    /// Uniqueness of the uniform rule within a rule catalog.
    UniformUniqueness,
}

impl Axiom {
    /// The axioms checked by a plain grid sweep, in report order.
    pub const GRID: [Axiom; 7] = [
        Axiom::StrategyProofness,
        Axiom::SameSidedness,
        Axiom::Unanimity,
        Axiom::EqualTreatment,
        Axiom::ReplacementMonotonicity,
        Axiom::NonBossiness,
        Axiom::EgalitarianLowerBound,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Axiom::StrategyProofness => "strategy-proofness",
            Axiom::SameSidedness => "same-sidedness",
            Axiom::Unanimity => "unanimity",
            Axiom::EqualTreatment => "equal-treatment",
            Axiom::ReplacementMonotonicity => "replacement-monotonicity",
            Axiom::NonBossiness => "non-bossiness",
            Axiom::EgalitarianLowerBound => "egalitarian-lower-bound",
            Axiom::Uncompromisingness => "uncompromisingness",
            Axiom::ParetoUndominatedProbe => "pareto-undominated-probe",
            Axiom::UniformUniqueness => "uniform-uniqueness",
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axiom {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        const ALL: [Axiom; 10] = [
            Axiom::StrategyProofness,
            Axiom::SameSidedness,
            Axiom::Unanimity,
            Axiom::EqualTreatment,
            Axiom::ReplacementMonotonicity,
            Axiom::NonBossiness,
            Axiom::EgalitarianLowerBound,
            Axiom::Uncompromisingness,
            Axiom::ParetoUndominatedProbe,
            Axiom::UniformUniqueness,
        ];
        ALL.into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown axiom `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// No violation anywhere on the enumerated grid.
    CertifiedOnGrid,
    Refuted,
}

mod one_based {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<usize>, s: S) -> Result<S::Ok, S::Error> {
        v.map(|x| x + 1).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<usize>, D::Error> {
        let v: Option<usize> = Option::deserialize(d)?;
        v.map(|x| {
            x.checked_sub(1)
                .ok_or_else(|| serde::de::Error::custom("indices start at 1"))
        })
        .transpose()
    }
}

/// A concrete violation. Indices are 0-based in memory and 1-based when
/// serialized.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub profile: PeakProfile,
    #[serde(with = "one_based", default, skip_serializing_if = "Option::is_none")]
    pub agent: Option<usize>,
    #[serde(with = "one_based", default, skip_serializing_if = "Option::is_none")]
    pub other_agent: Option<usize>,
    #[serde(with = "one_based", default, skip_serializing_if = "Option::is_none")]
    pub commodity: Option<usize>,
    /// Misreported peak of `agent`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deviation: Option<Bundle>,
    /// Allocation at `profile`.
    pub truthful: Allocation,
    /// Allocation after the deviation (or under a competing rule).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deviated: Option<Allocation>,
    /// A quadratic preference with `agent`'s peak that exhibits the loss.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preference: Option<QuadraticPreference>,
}

impl Witness {
    fn at(profile: PeakProfile, truthful: Allocation) -> Self {
        Witness {
            profile,
            agent: None,
            other_agent: None,
            commodity: None,
            deviation: None,
            truthful,
            deviated: None,
            preference: None,
        }
    }

    /// The profile after the recorded deviation.
    pub fn deviated_profile(&self) -> Option<PeakProfile> {
        Some(self.profile.with_peak(self.agent?, self.deviation.clone()?))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub rule: String,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// Profiles (or candidates, for probes) examined before stopping.
    pub profiles_checked: usize,
    /// Points per commodity axis of the grid used.
    pub grid_points: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// Wall time; excluded from serialization so reports are reproducible.
    #[serde(skip)]
    pub elapsed: Duration,
}

// Timing is not part of a report's identity.
impl PartialEq for AxiomReport {
    fn eq(&self, other: &Self) -> bool {
        self.axiom == other.axiom
            && self.rule == other.rule
            && self.verdict == other.verdict
            && self.witness == other.witness
            && self.profiles_checked == other.profiles_checked
            && self.grid_points == other.grid_points
            && self.note == other.note
    }
}

impl Eq for AxiomReport {}

impl AxiomReport {
    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::CertifiedOnGrid
    }

    pub fn is_refuted(&self) -> bool {
        self.verdict == Verdict::Refuted
    }
}

/// Allocations of one rule at every profile of a grid.
pub struct RuleTable {
    pub space: ProfileSpace,
    pub allocations: Vec<Allocation>,
}

impl RuleTable {
    pub fn get(&self, index: usize) -> &Allocation {
        &self.allocations[index]
    }
}

/// Grid sweeps for one economy.
#[derive(Clone)]
pub struct AxiomLab<'a> {
    econ: &'a Economy,
    grid: &'a PeakGrid,
    ladder: WeightLadder,
    pool: Arc<ThreadPool>,
}

pub(crate) fn build_pool(workers: usize) -> Result<Arc<ThreadPool>> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map(Arc::new)
        .map_err(|e| Error::Pool(e.to_string()))
}

impl<'a> AxiomLab<'a> {
    /// A single-worker lab.
    pub fn new(econ: &'a Economy, grid: &'a PeakGrid) -> Result<Self> {
        if grid.commodities() != econ.commodities() {
            return Err(Error::InvalidGrid(format!(
                "grid has {} axes, economy has {} commodities",
                grid.commodities(),
                econ.commodities()
            )));
        }
        Ok(AxiomLab {
            econ,
            grid,
            ladder: WeightLadder::default(),
            pool: build_pool(1)?,
        })
    }

    pub fn with_workers(mut self, workers: usize) -> Result<Self> {
        self.pool = build_pool(workers)?;
        Ok(self)
    }

    pub fn with_ladder(mut self, ladder: WeightLadder) -> Self {
        self.ladder = ladder;
        self
    }

    pub fn economy(&self) -> &'a Economy {
        self.econ
    }

    pub fn grid(&self) -> &'a PeakGrid {
        self.grid
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }

    pub(crate) fn pool(&self) -> &ThreadPool {
        &self.pool
    }

    pub fn ladder(&self) -> WeightLadder {
        self.ladder
    }

    /// Evaluates `rule` at every grid profile.
    pub fn table<R: PeaksOnlyRule>(&self, rule: &R) -> Result<RuleTable> {
        let space = ProfileSpace::new(self.grid, self.econ.agents())?;
        let allocations = self.pool.install(|| {
            (0..space.len())
                .into_par_iter()
                .map(|idx| rule.allocate(self.econ, &space.profile(idx)))
                .collect::<Result<Vec<_>>>()
        })?;
        Ok(RuleTable { space, allocations })
    }

    /// Runs one axiom.
    pub fn check<R: PeaksOnlyRule>(&self, axiom: Axiom, rule: &R) -> Result<AxiomReport> {
        let table = self.table(rule)?;
        self.check_on(axiom, &rule.label(), &table)
    }

    /// Runs several axioms against one table.
    pub fn check_all<R: PeaksOnlyRule>(&self, rule: &R, axioms: &[Axiom]) -> Result<Vec<AxiomReport>> {
        if axioms.is_empty() {
            return Ok(Vec::new());
        }
        let table = self.table(rule)?;
        let label = rule.label();
        axioms.iter().map(|a| self.check_on(*a, &label, &table)).collect()
    }

    pub fn check_strategy_proof<R: PeaksOnlyRule>(&self, rule: &R) -> Result<AxiomReport> {
        self.check(Axiom::StrategyProofness, rule)
    }

    pub fn check_same_sided<R: PeaksOnlyRule>(&self, rule: &R) -> Result<AxiomReport> {
        self.check(Axiom::SameSidedness, rule)
    }

    pub fn check_unanimity<R: PeaksOnlyRule>(&self, rule: &R) -> Result<AxiomReport> {
        self.check(Axiom::Unanimity, rule)
    }

    pub fn check_equal_treatment<R: PeaksOnlyRule>(&self, rule: &R) -> Result<AxiomReport> {
        self.check(Axiom::EqualTreatment, rule)
    }

    pub fn check_replacement_monotone<R: PeaksOnlyRule>(&self, rule: &R) -> Result<AxiomReport> {
        self.check(Axiom::ReplacementMonotonicity, rule)
    }

    pub fn check_non_bossy<R: PeaksOnlyRule>(&self, rule: &R) -> Result<AxiomReport> {
        self.check(Axiom::NonBossiness, rule)
    }

    pub fn check_egalitarian_bound<R: PeaksOnlyRule>(&self, rule: &R) -> Result<AxiomReport> {
        self.check(Axiom::EgalitarianLowerBound, rule)
    }

    pub fn check_uncompromising_1d<R: PeaksOnlyRule>(&self, rule: &R) -> Result<AxiomReport> {
        self.check(Axiom::Uncompromisingness, rule)
    }

    /// Runs `axiom` on a precomputed table.
    pub fn check_on(&self, axiom: Axiom, label: &str, table: &RuleTable) -> Result<AxiomReport> {
        let start = Instant::now();
        let found = match axiom {
            Axiom::StrategyProofness => self.sweep(table, |i| self.sp_at(table, i)),
            Axiom::SameSidedness => self.sweep(table, |i| self.same_sided_at(table, i)),
            Axiom::Unanimity => self.sweep(table, |i| self.unanimity_at(table, i)),
            Axiom::EqualTreatment => self.sweep(table, |i| self.equal_treatment_at(table, i)),
            Axiom::ReplacementMonotonicity => self.sweep(table, |i| self.rm_at(table, i)),
            Axiom::NonBossiness => self.sweep(table, |i| self.non_bossy_at(table, i)),
            Axiom::EgalitarianLowerBound => self.sweep(table, |i| self.egalitarian_at(table, i)),
            Axiom::Uncompromisingness => {
                if self.econ.commodities() != 1 {
                    return Err(Error::MultiCommodity(self.econ.commodities()));
                }
                self.sweep(table, |i| self.uncompromising_at(table, i))
            }
            Axiom::ParetoUndominatedProbe | Axiom::UniformUniqueness => {
                return Err(Error::InvalidGrid(format!(
                    "{axiom} is not a grid sweep; see the dominance module"
                )))
            }
        };
        let (verdict, witness, checked) = match found {
            Some((idx, w)) => (Verdict::Refuted, Some(w), idx + 1),
            None => (Verdict::CertifiedOnGrid, None, table.space.len()),
        };
        let note = match (&witness, axiom) {
            (Some(w), Axiom::StrategyProofness | Axiom::EgalitarianLowerBound)
                if w.preference.is_none() =>
            {
                Some("betweenness fails; no quadratic preference on the weight ladder separates the bundles".into())
            }
            _ => None,
        };
        Ok(AxiomReport {
            axiom,
            rule: label.to_string(),
            verdict,
            witness,
            profiles_checked: checked,
            grid_points: self.grid.axes().iter().map(Vec::len).collect(),
            note,
            elapsed: start.elapsed(),
        })
    }

    fn sweep<F>(&self, table: &RuleTable, at: F) -> Option<(usize, Witness)>
    where
        F: Fn(usize) -> Option<Witness> + Sync + Send,
    {
        self.pool.install(|| {
            (0..table.space.len())
                .into_par_iter()
                .find_map_first(|idx| at(idx).map(|w| (idx, w)))
        })
    }

    fn witness_at(&self, table: &RuleTable, idx: usize) -> Witness {
        Witness::at(table.space.profile(idx), table.get(idx).clone())
    }

    fn with_deviation(
        &self,
        table: &RuleTable,
        idx: usize,
        agent: usize,
        point: usize,
    ) -> Witness {
        let dev = table.space.replace(idx, agent, point);
        let mut w = self.witness_at(table, idx);
        w.agent = Some(agent);
        w.deviation = Some(table.space.points()[point].clone());
        w.deviated = Some(table.get(dev).clone());
        w
    }

    fn sp_at(&self, table: &RuleTable, idx: usize) -> Option<Witness> {
        let space = &table.space;
        let digits = space.digits(idx);
        let truthful = table.get(idx);
        for (agent, &d) in digits.iter().enumerate() {
            let peak = &space.points()[d];
            let x = truthful.share(agent);
            for point in 0..space.radix() {
                if point == d {
                    continue;
                }
                let y = table.get(space.replace(idx, agent, point)).share(agent);
                if x != y && !is_between(x.coords(), peak.coords(), y.coords()) {
                    let mut w = self.with_deviation(table, idx, agent, point);
                    w.preference = sp_witness_preference(peak, y, x, self.ladder).ok().flatten();
                    return Some(w);
                }
            }
        }
        None
    }

    fn same_sided_at(&self, table: &RuleTable, idx: usize) -> Option<Witness> {
        let profile = table.space.profile(idx);
        let alloc = table.get(idx);
        for (l, omega) in self.econ.omega().iter().enumerate() {
            let total: Rational = profile.peaks().iter().map(|p| p[l]).sum();
            for agent in 0..self.econ.agents() {
                let x = alloc.share(agent)[l];
                let p = profile.peak(agent)[l];
                if (total >= *omega && x > p) || (total <= *omega && x < p) {
                    let mut w = self.witness_at(table, idx);
                    w.agent = Some(agent);
                    w.commodity = Some(l);
                    return Some(w);
                }
            }
        }
        None
    }

    fn unanimity_at(&self, table: &RuleTable, idx: usize) -> Option<Witness> {
        let profile = table.space.profile(idx);
        let balanced = self.econ.omega().iter().enumerate().all(|(l, omega)| {
            profile.peaks().iter().map(|p| p[l]).sum::<Rational>() == *omega
        });
        if !balanced {
            return None;
        }
        let alloc = table.get(idx);
        let agent = (0..self.econ.agents()).find(|&i| alloc.share(i) != profile.peak(i))?;
        let mut w = self.witness_at(table, idx);
        w.agent = Some(agent);
        Some(w)
    }

    fn equal_treatment_at(&self, table: &RuleTable, idx: usize) -> Option<Witness> {
        let digits = table.space.digits(idx);
        let alloc = table.get(idx);
        let n = digits.len();
        for i in 0..n {
            for j in i + 1..n {
                if digits[i] == digits[j] && alloc.share(i) != alloc.share(j) {
                    let mut w = self.witness_at(table, idx);
                    w.agent = Some(i);
                    w.other_agent = Some(j);
                    return Some(w);
                }
            }
        }
        None
    }

    fn rm_at(&self, table: &RuleTable, idx: usize) -> Option<Witness> {
        let space = &table.space;
        let digits = space.digits(idx);
        let before = table.get(idx);
        let n = digits.len();
        for (agent, &d) in digits.iter().enumerate() {
            for point in 0..space.radix() {
                if point == d {
                    continue;
                }
                let after = table.get(space.replace(idx, agent, point));
                for l in 0..self.econ.commodities() {
                    let own_before = before.share(agent)[l];
                    let own_after = after.share(agent)[l];
                    for other in (0..n).filter(|&j| j != agent) {
                        let b = before.share(other)[l];
                        let a = after.share(other)[l];
                        let bad = (own_before <= own_after && b < a)
                            || (own_before >= own_after && b > a);
                        if bad {
                            let mut w = self.with_deviation(table, idx, agent, point);
                            w.other_agent = Some(other);
                            w.commodity = Some(l);
                            return Some(w);
                        }
                    }
                }
            }
        }
        None
    }

    fn non_bossy_at(&self, table: &RuleTable, idx: usize) -> Option<Witness> {
        let space = &table.space;
        let digits = space.digits(idx);
        let before = table.get(idx);
        for (agent, &d) in digits.iter().enumerate() {
            for point in 0..space.radix() {
                if point == d {
                    continue;
                }
                let after = table.get(space.replace(idx, agent, point));
                if before.share(agent) == after.share(agent) && before != after {
                    let other = (0..digits.len()).find(|&j| before.share(j) != after.share(j));
                    let mut w = self.with_deviation(table, idx, agent, point);
                    w.other_agent = other;
                    return Some(w);
                }
            }
        }
        None
    }

    fn egalitarian_at(&self, table: &RuleTable, idx: usize) -> Option<Witness> {
        let share = self.econ.equal_share();
        let digits = table.space.digits(idx);
        let alloc = table.get(idx);
        for (agent, &d) in digits.iter().enumerate() {
            let peak = &table.space.points()[d];
            let x = alloc.share(agent);
            if *x != share && !is_between(x.coords(), peak.coords(), share.coords()) {
                let mut w = self.witness_at(table, idx);
                w.agent = Some(agent);
                w.preference = sp_witness_preference(peak, &share, x, self.ladder).ok().flatten();
                return Some(w);
            }
        }
        None
    }

    fn uncompromising_at(&self, table: &RuleTable, idx: usize) -> Option<Witness> {
        let space = &table.space;
        let digits = space.digits(idx);
        let before = table.get(idx);
        for (agent, &d) in digits.iter().enumerate() {
            let p = space.points()[d][0];
            let x = before.share(agent)[0];
            if p == x {
                continue;
            }
            for point in 0..space.radix() {
                if point == d {
                    continue;
                }
                let t = space.points()[point][0];
                let applies = (p < x && t <= x) || (p > x && t >= x);
                if applies && table.get(space.replace(idx, agent, point)).share(agent)[0] != x {
                    return Some(self.with_deviation(table, idx, agent, point));
                }
            }
        }
        None
    }
}

/// Re-evaluates a refuted report's witness and confirms the violation.
///
/// Returns `Ok(false)` when the recorded allocations no longer match the
/// rule or the recorded data does not exhibit a violation.
pub fn replay_witness<R: PeaksOnlyRule>(
    report: &AxiomReport,
    rule: &R,
    econ: &Economy,
    ladder: WeightLadder,
) -> Result<bool> {
    let Some(w) = &report.witness else {
        return Ok(false);
    };
    let truthful = rule.allocate(econ, &w.profile)?;
    if truthful != w.truthful {
        return Ok(false);
    }
    let deviated = match w.deviated_profile() {
        Some(p) => {
            let alloc = rule.allocate(econ, &p)?;
            if Some(&alloc) != w.deviated.as_ref() {
                return Ok(false);
            }
            Some(alloc)
        }
        None => None,
    };
    let agent = w.agent;
    let profile = &w.profile;
    Ok(match report.axiom {
        Axiom::StrategyProofness => {
            let (Some(i), Some(dev)) = (agent, &deviated) else {
                return Ok(false);
            };
            let x = truthful.share(i);
            let y = dev.share(i);
            let manipulable = x != y && !is_between(x.coords(), profile.peak(i).coords(), y.coords());
            let preference_ok = match &w.preference {
                Some(q) => q.peak() == profile.peak(i) && q.strictly_prefers(y, x)?,
                None => sp_witness_preference(profile.peak(i), y, x, ladder)?.is_none(),
            };
            manipulable && preference_ok
        }
        Axiom::SameSidedness => {
            let (Some(i), Some(l)) = (agent, w.commodity) else {
                return Ok(false);
            };
            let total: Rational = profile.peaks().iter().map(|p| p[l]).sum();
            let x = truthful.share(i)[l];
            let p = profile.peak(i)[l];
            let omega = econ.omega()[l];
            (total >= omega && x > p) || (total <= omega && x < p)
        }
        Axiom::Unanimity => {
            let Some(i) = agent else { return Ok(false) };
            let balanced = (0..econ.commodities()).all(|l| {
                profile.peaks().iter().map(|p| p[l]).sum::<Rational>() == econ.omega()[l]
            });
            balanced && truthful.share(i) != profile.peak(i)
        }
        Axiom::EqualTreatment => {
            let (Some(i), Some(j)) = (agent, w.other_agent) else {
                return Ok(false);
            };
            profile.peak(i) == profile.peak(j) && truthful.share(i) != truthful.share(j)
        }
        Axiom::ReplacementMonotonicity => {
            let (Some(i), Some(j), Some(l), Some(dev)) = (agent, w.other_agent, w.commodity, &deviated)
            else {
                return Ok(false);
            };
            let (ob, oa) = (truthful.share(i)[l], dev.share(i)[l]);
            let (b, a) = (truthful.share(j)[l], dev.share(j)[l]);
            (ob <= oa && b < a) || (ob >= oa && b > a)
        }
        Axiom::NonBossiness => {
            let (Some(i), Some(dev)) = (agent, &deviated) else {
                return Ok(false);
            };
            truthful.share(i) == dev.share(i) && truthful != *dev
        }
        Axiom::EgalitarianLowerBound => {
            let Some(i) = agent else { return Ok(false) };
            let share = econ.equal_share();
            let x = truthful.share(i);
            *x != share && !is_between(x.coords(), profile.peak(i).coords(), share.coords())
        }
        Axiom::Uncompromisingness => {
            let (Some(i), Some(dev), Some(t)) = (agent, &deviated, &w.deviation) else {
                return Ok(false);
            };
            let p = profile.peak(i)[0];
            let x = truthful.share(i)[0];
            let t = t[0];
            ((p < x && t <= x) || (p > x && t >= x)) && dev.share(i)[0] != x
        }
        Axiom::ParetoUndominatedProbe | Axiom::UniformUniqueness => false,
    })
}

/// An implication between axioms that failed on one rule and grid.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImplicationFailure {
    pub rule: String,
    pub premises: Vec<Axiom>,
    pub conclusion: Axiom,
}

/// Known implications between axioms, as (premises, conclusion).
pub const IMPLICATIONS: [(&[Axiom], Axiom); 3] = [
    (&[Axiom::ReplacementMonotonicity], Axiom::NonBossiness),
    (
        &[Axiom::StrategyProofness, Axiom::Unanimity, Axiom::NonBossiness],
        Axiom::SameSidedness,
    ),
    (&[Axiom::SameSidedness], Axiom::Unanimity),
];

/// Checks every implication whose premises and conclusion all appear in
/// `reports` (which must concern one rule on one grid).
pub fn check_implications(reports: &[AxiomReport]) -> Vec<ImplicationFailure> {
    let find = |a: Axiom| reports.iter().find(|r| r.axiom == a);
    let rule = reports.first().map(|r| r.rule.clone()).unwrap_or_default();
    IMPLICATIONS
        .iter()
        .filter_map(|(premises, conclusion)| {
            let concl = find(*conclusion)?;
            let all_certified = premises
                .iter()
                .map(|p| find(*p).map(AxiomReport::is_certified))
                .collect::<Option<Vec<bool>>>()?
                .into_iter()
                .all(|c| c);
            (all_certified && concl.is_refuted()).then(|| ImplicationFailure {
                rule: rule.clone(),
                premises: premises.to_vec(),
                conclusion: *conclusion,
            })
        })
        .collect()
}

/// Searches the allocations reachable on `search` (agents `0..n-1` pick grid
/// bundles, the last agent takes the remainder) for one that every agent
/// weakly prefers to `alloc` and some agent strictly prefers. The first hit
/// in lexicographic order is returned.
pub fn find_pareto_improvement(
    alloc: &Allocation,
    prefs: &[QuadraticPreference],
    econ: &Economy,
    search: &PeakGrid,
) -> Result<Option<Allocation>> {
    if !is_feasible(alloc, econ)? {
        return Err(Error::InvalidAllocation(format!("{alloc:?} is not feasible")));
    }
    if prefs.len() != econ.agents() {
        return Err(Error::Shape(format!(
            "{} preferences for {} agents",
            prefs.len(),
            econ.agents()
        )));
    }
    if search.commodities() != econ.commodities() {
        return Err(Error::InvalidGrid("search grid does not match the economy".into()));
    }
    let current: Vec<Rational> = prefs
        .iter()
        .zip(alloc.shares())
        .map(|(q, x)| q.cost(x))
        .collect::<Result<_>>()?;
    let points = search.bundles();
    let n = econ.agents();
    let mut chosen: Vec<Bundle> = Vec::with_capacity(n);
    Ok(improve_from(
        &points, prefs, &current, econ, &mut chosen, econ.omega().clone(), false,
    ))
}

fn improve_from(
    points: &[Bundle],
    prefs: &[QuadraticPreference],
    current: &[Rational],
    econ: &Economy,
    chosen: &mut Vec<Bundle>,
    remaining: Bundle,
    strict_so_far: bool,
) -> Option<Allocation> {
    let agent = chosen.len();
    let n = econ.agents();
    let evaluate = |x: &Bundle| prefs[agent].cost(x).expect("shape checked");
    if agent == n - 1 {
        let cost = evaluate(&remaining);
        let strict = strict_so_far || cost < current[agent];
        if cost <= current[agent] && strict {
            let mut shares = chosen.clone();
            shares.push(remaining);
            return Some(Allocation::new(shares));
        }
        return None;
    }
    for x in points {
        if x.iter().zip(remaining.iter()).any(|(a, r)| a > r) {
            continue;
        }
        let cost = evaluate(x);
        if cost > current[agent] {
            continue;
        }
        let rest = Bundle::new(remaining.iter().zip(x.iter()).map(|(r, a)| *r - *a).collect());
        chosen.push(x.clone());
        let found = improve_from(
            points,
            prefs,
            current,
            econ,
            chosen,
            rest,
            strict_so_far || cost < current[agent],
        );
        chosen.pop();
        if found.is_some() {
            return found;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::econ::make_economy;
    use crate::grid::make_grid;
    use crate::rules::RuleSpec;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn b(xs: &[&str]) -> Bundle {
        Bundle::new(xs.iter().map(|s| q(s)).collect())
    }

    fn one_dim(omega: &str, n: usize, points: usize) -> (Economy, PeakGrid) {
        let e = make_economy(1, vec![q(omega)], n).unwrap();
        let g = make_grid(&e, points).unwrap();
        (e, g)
    }

    #[test]
    fn axiom_names_round_trip() {
        for a in Axiom::GRID {
            assert_eq!(a.name().parse::<Axiom>().unwrap(), a);
            assert_eq!(serde_json::to_string(&a).unwrap(), format!("\"{}\"", a.name()));
        }
        assert!("efficiency".parse::<Axiom>().is_err());
    }

    #[test]
    fn uniform_passes_one_dimensional_sweep() {
        let (e, g) = one_dim("6", 3, 7);
        let lab = AxiomLab::new(&e, &g).unwrap();
        let mut axioms = Axiom::GRID.to_vec();
        axioms.push(Axiom::Uncompromisingness);
        for r in lab.check_all(&RuleSpec::Uniform, &axioms).unwrap() {
            assert!(r.is_certified(), "{} refuted: {:?}", r.axiom, r.witness);
            assert_eq!(r.profiles_checked, 343);
        }
    }

    #[test]
    fn proportional_is_manipulable_with_replayable_witness() {
        let (e, g) = one_dim("10", 2, 6);
        let lab = AxiomLab::new(&e, &g).unwrap();
        let r = lab.check_strategy_proof(&RuleSpec::Proportional).unwrap();
        assert!(r.is_refuted());
        let w = r.witness.as_ref().unwrap();
        let i = w.agent.unwrap();
        let q = w.preference.as_ref().expect("separating preference");
        assert!(q
            .strictly_prefers(w.deviated.as_ref().unwrap().share(i), w.truthful.share(i))
            .unwrap());
        assert!(replay_witness(&r, &RuleSpec::Proportional, &e, lab.ladder()).unwrap());
        // a tampered witness does not replay
        let mut bad = r.clone();
        bad.witness.as_mut().unwrap().truthful = e.equal_division();
        assert!(!replay_witness(&bad, &RuleSpec::Proportional, &e, lab.ladder()).unwrap());
    }

    #[test]
    fn serial_and_constant_refutations() {
        let (e, g) = one_dim("6", 2, 4);
        let lab = AxiomLab::new(&e, &g).unwrap();
        let serial = RuleSpec::serial_identity(&e);
        let et = lab.check_equal_treatment(&serial).unwrap();
        assert!(et.is_refuted());
        let w = et.witness.as_ref().unwrap();
        assert_eq!(w.profile.peak(0), w.profile.peak(1));
        assert!(replay_witness(&et, &serial, &e, lab.ladder()).unwrap());
        assert!(lab.check_egalitarian_bound(&serial).unwrap().is_refuted());
        assert!(lab.check_strategy_proof(&serial).unwrap().is_certified());

        let constant = RuleSpec::constant_equal_division(&e);
        let un = lab.check_unanimity(&constant).unwrap();
        assert!(un.is_refuted());
        assert!(replay_witness(&un, &constant, &e, lab.ladder()).unwrap());
        assert!(lab.check_strategy_proof(&constant).unwrap().is_certified());
    }

    #[test]
    fn first_witness_independent_of_workers() {
        let e = make_economy(2, vec![q("4"), q("2")], 3).unwrap();
        let g = make_grid(&e, 3).unwrap();
        let one = AxiomLab::new(&e, &g).unwrap();
        let four = one.clone().with_workers(4).unwrap();
        for rule in [RuleSpec::Proportional, RuleSpec::serial_identity(&e)] {
            let a = one.check_all(&rule, &Axiom::GRID).unwrap();
            let b = four.check_all(&rule, &Axiom::GRID).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn uncompromisingness_needs_one_commodity() {
        let e = make_economy(2, vec![q("1"), q("1")], 2).unwrap();
        let g = make_grid(&e, 2).unwrap();
        let lab = AxiomLab::new(&e, &g).unwrap();
        assert_eq!(
            lab.check_uncompromising_1d(&RuleSpec::Uniform).unwrap_err(),
            Error::MultiCommodity(2)
        );
    }

    #[test]
    fn grid_shape_must_match() {
        let e = make_economy(2, vec![q("1"), q("1")], 2).unwrap();
        let (_, g) = one_dim("1", 2, 2);
        assert!(AxiomLab::new(&e, &g).is_err());
    }

    fn report(axiom: Axiom, verdict: Verdict) -> AxiomReport {
        AxiomReport {
            axiom,
            rule: "r".into(),
            verdict,
            witness: None,
            profiles_checked: 0,
            grid_points: vec![],
            note: None,
            elapsed: Duration::ZERO,
        }
    }

    #[test]
    fn implication_failures_are_reported() {
        use Axiom::*;
        use Verdict::*;
        let ok = vec![
            report(ReplacementMonotonicity, CertifiedOnGrid),
            report(NonBossiness, CertifiedOnGrid),
            report(SameSidedness, Refuted),
            report(Unanimity, Refuted),
        ];
        assert!(check_implications(&ok).is_empty());
        let bad = vec![
            report(ReplacementMonotonicity, CertifiedOnGrid),
            report(NonBossiness, Refuted),
        ];
        let f = check_implications(&bad);
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].conclusion, NonBossiness);
        let chain = vec![
            report(StrategyProofness, CertifiedOnGrid),
            report(Unanimity, CertifiedOnGrid),
            report(NonBossiness, CertifiedOnGrid),
            report(SameSidedness, Refuted),
        ];
        assert_eq!(check_implications(&chain)[0].conclusion, SameSidedness);
        assert!(check_implications(&[]).is_empty());
    }

    #[test]
    fn pareto_improvement_search() {
        let e = make_economy(2, vec![q("18"), q("12")], 2).unwrap();
        let prefs = vec![
            QuadraticPreference::isotropic(b(&["2", "4"])),
            QuadraticPreference::isotropic(b(&["16", "8"])),
        ];
        let g = PeakGrid::with_steps(&e, &[q("1"), q("1")]).unwrap();
        let efficient = Allocation::new(vec![b(&["2", "4"]), b(&["16", "8"])]);
        assert_eq!(find_pareto_improvement(&efficient, &prefs, &e, &g).unwrap(), None);
        let wasteful = Allocation::new(vec![b(&["16", "8"]), b(&["2", "4"])]);
        let better = find_pareto_improvement(&wasteful, &prefs, &e, &g).unwrap().unwrap();
        assert!(is_feasible(&better, &e).unwrap());
        for (i, pref) in prefs.iter().enumerate() {
            assert!(pref.weakly_prefers(better.share(i), wasteful.share(i)).unwrap());
        }
        let infeasible = Allocation::new(vec![b(&["18", "12"]), b(&["1", "0"])]);
        assert!(find_pareto_improvement(&infeasible, &prefs, &e, &g).is_err());
    }
}
