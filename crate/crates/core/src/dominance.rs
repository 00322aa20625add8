//! Option sets, domination between strategy-proof rules, and a finite
//! search for dominating rules.
//!
//! The option set of an agent, given the others' peaks, is the set of
//! bundles she can obtain by varying her own report. For a strategy-proof
//! peaks-only rule it is a box, and her allotment is the projection of her
//! peak onto it. One rule dominates another iff every agent's option set
//! under the other is contained in hers under the first, for every
//! conditioning profile.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};

use crate::axioms::{Axiom, AxiomLab, AxiomReport, RuleTable, Verdict, Witness};
use crate::econ::{is_between, Allocation, Bundle, Economy, PeakProfile};
use crate::error::{Error, Result};
use crate::grid::{PeakGrid, ProfileSpace};
use crate::rational::Rational;
use crate::rules::{PeaksOnlyRule, RuleSpec};

/// Per-commodity intervals, serialized as `[["a","b"], ...]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Intervals {
    pub lower: Bundle,
    pub upper: Bundle,
}

impl Intervals {
    pub fn contains(&self, x: &Bundle) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(self.upper.iter()))
            .all(|(v, (a, b))| a <= v && v <= b)
    }

    pub fn contains_box(&self, other: &Intervals) -> bool {
        self.contains(&other.lower) && self.contains(&other.upper)
    }

    pub fn is_singleton(&self) -> bool {
        self.lower == self.upper
    }

    /// A corner of `other` outside `self`, if any.
    fn escaping_corner(&self, other: &Intervals) -> Option<Bundle> {
        if self.contains_box(other) {
            return None;
        }
        let coords = (0..other.lower.len())
            .map(|l| {
                if other.lower[l] < self.lower[l] {
                    other.lower[l]
                } else {
                    other.upper[l]
                }
            })
            .collect();
        Some(Bundle::new(coords))
    }
}

impl Serialize for Intervals {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.lower.len()))?;
        for (a, b) in self.lower.iter().zip(self.upper.iter()) {
            seq.serialize_element(&[a, b])?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Intervals {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<[Rational; 2]> = Vec::deserialize(d)?;
        if pairs.iter().any(|[a, b]| a > b) {
            return Err(serde::de::Error::custom("interval with lower end above upper end"));
        }
        Ok(Intervals {
            lower: Bundle::new(pairs.iter().map(|p| p[0]).collect()),
            upper: Bundle::new(pairs.iter().map(|p| p[1]).collect()),
        })
    }
}

/// A swept report whose allotment is not the projection onto the box.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxViolation {
    pub peak: Bundle,
    pub allotment: Bundle,
}

/// Hull of an agent's swept allotments, with the raw sweep kept for
/// validation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OptionBox {
    #[serde(rename = "box")]
    pub intervals: Intervals,
    /// Whether every swept allotment is the projection of the swept peak.
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<BoxViolation>,
    pub swept: usize,
    #[serde(skip)]
    pub points: Vec<(Bundle, Bundle)>,
}

impl OptionBox {
    /// Builds the hull of `(peak, allotment)` pairs and validates them.
    pub fn from_sweep(points: Vec<(Bundle, Bundle)>) -> OptionBox {
        let first = &points.first().expect("non-empty sweep").1;
        let mut lower = first.clone();
        let mut upper = first.clone();
        for (_, x) in &points[1..] {
            for l in 0..x.len() {
                lower.coords_mut()[l] = lower[l].min(x[l]);
                upper.coords_mut()[l] = upper[l].max(x[l]);
            }
        }
        let violation = points
            .iter()
            .find(|(t, x)| t.clamp(&lower, &upper) != *x)
            .map(|(t, x)| BoxViolation {
                peak: t.clone(),
                allotment: x.clone(),
            });
        OptionBox {
            intervals: Intervals { lower, upper },
            valid: violation.is_none(),
            violation,
            swept: points.len(),
            points,
        }
    }

    pub fn lower(&self) -> &Bundle {
        &self.intervals.lower
    }

    pub fn upper(&self) -> &Bundle {
        &self.intervals.upper
    }
}

/// The sweep grid with both ends of every consumption interval added, so
/// the hull of a strategy-proof rule's sweep is its full option box.
fn with_corners(econ: &Economy, sweep: &PeakGrid) -> Result<PeakGrid> {
    let axes = sweep
        .axes()
        .iter()
        .zip(econ.omega().iter())
        .map(|(axis, omega)| {
            let mut v = axis.clone();
            v.push(Rational::ZERO);
            v.push(*omega);
            v.sort();
            v.dedup();
            v
        })
        .collect();
    PeakGrid::from_values(econ, axes)
}

fn check_others(econ: &Economy, agent: usize, others: &[Bundle]) -> Result<()> {
    if agent >= econ.agents() {
        return Err(Error::Shape(format!(
            "agent {} out of range for {} agents",
            agent + 1,
            econ.agents()
        )));
    }
    if others.len() + 1 != econ.agents() {
        return Err(Error::Shape(format!(
            "{} conditioning peaks for {} agents",
            others.len(),
            econ.agents()
        )));
    }
    Ok(())
}

/// Sweeps `agent`'s report over `sweep` (plus the corners of her
/// consumption set) with the others fixed at `others`.
pub fn option_box<R: PeaksOnlyRule + ?Sized>(
    rule: &R,
    econ: &Economy,
    agent: usize,
    others: &[Bundle],
    sweep: &PeakGrid,
) -> Result<OptionBox> {
    check_others(econ, agent, others)?;
    let full = with_corners(econ, sweep)?;
    let points = full
        .bundles()
        .into_iter()
        .map(|t| {
            let profile = PeakProfile::assemble(agent, t.clone(), others);
            let x = rule.allocate(econ, &profile)?.share(agent).clone();
            Ok((t, x))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OptionBox::from_sweep(points))
}

/// Whether `a` is weakly better than `b` for every agent under every
/// single-peaked preference with the given peaks.
pub fn welfare_dominates(a: &Allocation, b: &Allocation, peaks: &PeakProfile) -> bool {
    (0..peaks.agents()).all(|i| {
        let (x, y) = (a.share(i), b.share(i));
        x == y || is_between(x.coords(), peaks.peak(i).coords(), y.coords())
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    ADominatesB,
    BDominatesA,
    Equivalent,
    Incomparable,
}

/// Which containment failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// Some box of B escapes the matching box of A.
    AOverB,
    /// Some box of A escapes the matching box of B.
    BOverA,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NestingFailure {
    pub direction: Direction,
    #[serde(with = "one_based")]
    pub agent: usize,
    pub others: Vec<Bundle>,
    /// Option point of the would-be dominated rule outside the other box.
    pub point: Bundle,
    pub box_a: Intervals,
    pub box_b: Intervals,
}

mod one_based {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &usize, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(*v as u64 + 1)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<usize, D::Error> {
        usize::deserialize(d)?
            .checked_sub(1)
            .ok_or_else(|| serde::de::Error::custom("indices start at 1"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominationVerdict {
    pub rule_a: String,
    pub rule_b: String,
    pub relation: Relation,
    /// First failure per direction and agent.
    pub evidence: Vec<NestingFailure>,
    /// Conditioning profiles compared per agent.
    pub conditioning_profiles: usize,
}

/// Indices `0..total`, or `cap` of them evenly strided when `cap < total`.
fn sample_indices(total: usize, cap: Option<usize>) -> Vec<usize> {
    match cap {
        Some(k) if k < total => (0..k).map(|j| j * total / k).collect(),
        _ => (0..total).collect(),
    }
}

/// Compares the option boxes of two strategy-proof rules.
///
/// Both rules are certified on `lab`'s grid first; conditioning profiles
/// range over the same grid, optionally capped at `conditioning_sample`.
pub fn check_domination<A, B>(
    rule_a: &A,
    rule_b: &B,
    lab: &AxiomLab<'_>,
    conditioning_sample: Option<usize>,
) -> Result<DominationVerdict>
where
    A: PeaksOnlyRule + ?Sized,
    B: PeaksOnlyRule + ?Sized,
{
    if !lab.check_strategy_proof(&rule_a)?.is_certified() {
        return Err(Error::NotStrategyProof(rule_a.label()));
    }
    if !lab.check_strategy_proof(&rule_b)?.is_certified() {
        return Err(Error::NotStrategyProof(rule_b.label()));
    }
    let econ = lab.economy();
    let grid = lab.grid();
    let n = econ.agents();
    let cond = ProfileSpace::new(grid, n - 1)?;
    let sample = sample_indices(cond.len(), conditioning_sample);

    let jobs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| sample.iter().map(move |&c| (i, c)))
        .collect();
    let boxes = lab.pool().install(|| {
        jobs.par_iter()
            .map(|&(i, c)| {
                let others = cond.profile(c).peaks().to_vec();
                let a = option_box(rule_a, econ, i, &others, grid)?;
                let b = option_box(rule_b, econ, i, &others, grid)?;
                Ok((i, others, a.intervals, b.intervals))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut a_over_b = true;
    let mut b_over_a = true;
    let mut evidence = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, others, box_a, box_b) in boxes {
        for (dir, outer, inner) in [
            (Direction::AOverB, &box_a, &box_b),
            (Direction::BOverA, &box_b, &box_a),
        ] {
            if let Some(point) = outer.escaping_corner(inner) {
                match dir {
                    Direction::AOverB => a_over_b = false,
                    Direction::BOverA => b_over_a = false,
                }
                if seen.insert((dir, i)) {
                    evidence.push(NestingFailure {
                        direction: dir,
                        agent: i,
                        others: others.clone(),
                        point,
                        box_a: box_a.clone(),
                        box_b: box_b.clone(),
                    });
                }
            }
        }
    }
    let relation = match (a_over_b, b_over_a) {
        (true, true) => Relation::Equivalent,
        (true, false) => Relation::ADominatesB,
        (false, true) => Relation::BDominatesA,
        (false, false) => Relation::Incomparable,
    };
    Ok(DominationVerdict {
        rule_a: rule_a.label(),
        rule_b: rule_b.label(),
        relation,
        evidence,
        conditioning_profiles: sample.len(),
    })
}

/// First grid profile at which `a` fails to welfare-dominate `b`.
pub fn first_domination_failure(a: &RuleTable, b: &RuleTable, lab: &AxiomLab<'_>) -> Option<usize> {
    lab.pool().install(|| {
        (0..a.space.len()).into_par_iter().find_first(|&idx| {
            !welfare_dominates(a.get(idx), b.get(idx), &a.space.profile(idx))
        })
    })
}

/// The implemented rule fixtures for an economy.
pub fn default_catalog(econ: &Economy) -> Vec<RuleSpec> {
    let reversed: Vec<usize> = (0..econ.agents()).rev().collect();
    vec![
        RuleSpec::Uniform,
        RuleSpec::Proportional,
        RuleSpec::serial_identity(econ),
        RuleSpec::serial_with_order(econ, &reversed),
        RuleSpec::constant_equal_division(econ),
        RuleSpec::skewed_sequential(econ),
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Lower,
    Upper,
}

/// Moves one endpoint of one agent's option box, at one conditioning
/// profile, to the next grid value outward.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxEdit {
    #[serde(with = "one_based")]
    pub agent: usize,
    pub others: Vec<Bundle>,
    #[serde(with = "one_based")]
    pub commodity: usize,
    pub side: Side,
    pub from: Rational,
    pub to: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Candidate {
    Catalog { rule: String },
    BoxEdit(BoxEdit),
}

impl Candidate {
    pub fn describe(&self) -> String {
        match self {
            Candidate::Catalog { rule } => rule.clone(),
            Candidate::BoxEdit(e) => format!(
                "box edit: agent {}, others {:?}, commodity {}, {:?} end {} -> {}",
                e.agent + 1,
                e.others,
                e.commodity + 1,
                e.side,
                e.from,
                e.to
            )
            .to_lowercase(),
        }
    }
}

/// A strategy-proof rule that dominates the probed one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dominator {
    pub candidate: Candidate,
    /// A profile where the dominator differs, with both allocations.
    pub profile: PeakProfile,
    pub probed: Allocation,
    pub dominating: Allocation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominatorSearch {
    pub catalog_examined: usize,
    pub edits_examined: usize,
    pub edits_available: usize,
    pub found: Option<Dominator>,
}

/// Per-commodity option box of `agent` at conditioning index `cond_idx`,
/// read off a rule table, or `None` if the sweep is not a box.
fn table_box(
    table: &RuleTable,
    cond: &ProfileSpace,
    agent: usize,
    cond_idx: usize,
) -> (Vec<usize>, Option<OptionBox>) {
    let space = &table.space;
    let rows: Vec<usize> = (0..space.radix())
        .map(|d| profile_index(space, cond, agent, cond_idx, d))
        .collect();
    let points = rows
        .iter()
        .enumerate()
        .map(|(d, &row)| (space.points()[d].clone(), table.get(row).share(agent).clone()))
        .collect();
    let b = OptionBox::from_sweep(points);
    let ok = b.valid;
    (rows, ok.then_some(b))
}

fn profile_index(space: &ProfileSpace, cond: &ProfileSpace, agent: usize, cond_idx: usize, d: usize) -> usize {
    let mut digits = cond.digits(cond_idx);
    digits.insert(agent, d);
    space.index_of(&digits)
}

/// Shifts `delta` of commodity `l` onto the other agents, each moving
/// only toward her own peak, in index order. `None` if they cannot absorb
/// it that way.
fn absorb(
    alloc: &Allocation,
    peaks: &PeakProfile,
    agent: usize,
    l: usize,
    delta: Rational,
) -> Option<Allocation> {
    let mut out = alloc.clone();
    let mut need = delta;
    for j in (0..peaks.agents()).filter(|&j| j != agent) {
        if need.is_zero() {
            break;
        }
        let x = out.share(j)[l];
        let p = peaks.peak(j)[l];
        // positive delta: others give up, but only down toward their peaks
        let room = if need.is_positive() {
            (x - p).max(Rational::ZERO)
        } else {
            (x - p).min(Rational::ZERO)
        };
        let take = if need.is_positive() { room.min(need) } else { room.max(need) };
        out.shares_mut()[j].coords_mut()[l] = x - take;
        need -= take;
    }
    if !need.is_zero() {
        return None;
    }
    out.shares_mut()[agent].coords_mut()[l] = alloc.share(agent)[l] + delta;
    Some(out)
}

struct EditOutcome {
    overrides: BTreeMap<usize, Allocation>,
}

/// Re-materializes an edited box as a rule: the edited agent gets the
/// projection of her peak onto the enlarged box, the others absorb the
/// difference. `None` when absorption fails somewhere.
fn materialize(
    table: &RuleTable,
    rows: &[usize],
    agent: usize,
    enlarged: &Intervals,
    commodity: usize,
) -> Option<EditOutcome> {
    let space = &table.space;
    let mut overrides = BTreeMap::new();
    for (d, &row) in rows.iter().enumerate() {
        let t = &space.points()[d];
        let target = t.clamp(&enlarged.lower, &enlarged.upper);
        let base = table.get(row);
        let delta = target[commodity] - base.share(agent)[commodity];
        if delta.is_zero() {
            continue;
        }
        let profile = space.profile(row);
        overrides.insert(row, absorb(base, &profile, agent, commodity, delta)?);
    }
    Some(EditOutcome { overrides })
}

/// Strategy-proofness of the table patched with `overrides`. The base table
/// must already be certified on the same grid, so only triples touching a
/// patched profile can fail.
fn patched_is_strategy_proof(table: &RuleTable, overrides: &BTreeMap<usize, Allocation>) -> bool {
    let space = &table.space;
    let value = |idx: usize| overrides.get(&idx).unwrap_or_else(|| table.get(idx));
    let manipulable = |truth: usize, lie: usize, agent: usize, peak: &Bundle| {
        let x = value(truth).share(agent);
        let y = value(lie).share(agent);
        x != y && !is_between(x.coords(), peak.coords(), y.coords())
    };
    overrides.keys().all(|&idx| {
        let digits = space.digits(idx);
        digits.iter().enumerate().all(|(k, &dk)| {
            (0..space.radix()).filter(|&d| d != dk).all(|d| {
                let other = space.replace(idx, k, d);
                !manipulable(idx, other, k, &space.points()[dk])
                    && !manipulable(other, idx, k, &space.points()[d])
            })
        })
    })
}

/// Searches the catalog and up to `budget` box edits for a strategy-proof
/// rule dominating `rule`. Does not check any hypotheses on `rule` beyond
/// strategy-proofness on the grid.
pub fn search_dominators<R: PeaksOnlyRule + ?Sized>(
    rule: &R,
    lab: &AxiomLab<'_>,
    catalog: &[RuleSpec],
    budget: usize,
) -> Result<DominatorSearch> {
    let base = lab.table(&rule)?;
    if !lab
        .check_on(Axiom::StrategyProofness, &rule.label(), &base)?
        .is_certified()
    {
        return Err(Error::NotStrategyProof(rule.label()));
    }

    let mut catalog_examined = 0;
    for spec in catalog {
        catalog_examined += 1;
        let table = lab.table(spec)?;
        let differs = lab.pool().install(|| {
            (0..base.space.len())
                .into_par_iter()
                .find_first(|&i| table.get(i) != base.get(i))
        });
        let Some(diff) = differs else { continue };
        if first_domination_failure(&table, &base, lab).is_some() {
            continue;
        }
        if lab
            .check_on(Axiom::StrategyProofness, &spec.label(), &table)?
            .is_certified()
        {
            return Ok(DominatorSearch {
                catalog_examined,
                edits_examined: 0,
                edits_available: 0,
                found: Some(Dominator {
                    candidate: Candidate::Catalog { rule: spec.label() },
                    profile: base.space.profile(diff),
                    probed: base.get(diff).clone(),
                    dominating: table.get(diff).clone(),
                }),
            });
        }
    }

    let econ = lab.economy();
    let n = econ.agents();
    let commodities = econ.commodities();
    let cond = ProfileSpace::new(lab.grid(), n - 1)?;
    let per_agent = cond.len() * commodities * 2;
    let available = n * per_agent;
    let examined = available.min(budget);
    let axes = lab.grid().axes();

    let found = lab.pool().install(|| {
        (0..examined).into_par_iter().find_map_first(|c| {
            let agent = c / per_agent;
            let rest = c % per_agent;
            let cond_idx = rest / (commodities * 2);
            let commodity = (rest / 2) % commodities;
            let side = if rest % 2 == 0 { Side::Lower } else { Side::Upper };

            let (rows, ob) = table_box(&base, &cond, agent, cond_idx);
            let ob = ob?;
            let axis = &axes[commodity];
            let mut enlarged = ob.intervals.clone();
            let (from, to) = match side {
                Side::Lower => {
                    let a = ob.lower()[commodity];
                    let to = *axis.iter().rev().find(|v| **v < a)?;
                    enlarged.lower.coords_mut()[commodity] = to;
                    (a, to)
                }
                Side::Upper => {
                    let b = ob.upper()[commodity];
                    let to = *axis.iter().find(|v| **v > b)?;
                    enlarged.upper.coords_mut()[commodity] = to;
                    (b, to)
                }
            };
            let outcome = materialize(&base, &rows, agent, &enlarged, commodity)?;
            let (&row, alloc) = outcome.overrides.iter().next()?;
            let profile = base.space.profile(row);
            if !outcome
                .overrides
                .iter()
                .all(|(&i, a)| welfare_dominates(a, base.get(i), &base.space.profile(i)))
            {
                return None;
            }
            if !patched_is_strategy_proof(&base, &outcome.overrides) {
                return None;
            }
            Some((
                c,
                Dominator {
                    candidate: Candidate::BoxEdit(BoxEdit {
                        agent,
                        others: cond.profile(cond_idx).peaks().to_vec(),
                        commodity,
                        side,
                        from,
                        to,
                    }),
                    probed: base.get(row).clone(),
                    dominating: alloc.clone(),
                    profile,
                },
            ))
        })
    });
    Ok(match found {
        Some((c, d)) => DominatorSearch {
            catalog_examined,
            edits_examined: c + 1,
            edits_available: available,
            found: Some(d),
        },
        None => DominatorSearch {
            catalog_examined,
            edits_examined: examined,
            edits_available: available,
            found: None,
        },
    })
}

pub const DEFAULT_BUDGET: usize = 10_000;

/// Probe for a strategy-proof dominator of a rule that is strategy-proof,
/// unanimous and replacement monotone on the grid.
///
/// A clean result means no dominator exists within the searched family:
/// evidence, not proof.
pub fn pusp_probe<R: PeaksOnlyRule + ?Sized>(
    rule: &R,
    lab: &AxiomLab<'_>,
    budget: usize,
) -> Result<AxiomReport> {
    let start = std::time::Instant::now();
    let hypotheses = [
        Axiom::StrategyProofness,
        Axiom::Unanimity,
        Axiom::ReplacementMonotonicity,
    ];
    let failed: Vec<String> = lab
        .check_all(&rule, &hypotheses)?
        .into_iter()
        .filter(|r| r.is_refuted())
        .map(|r| r.axiom.name().to_string())
        .collect();
    if !failed.is_empty() {
        return Err(Error::HypothesesNotCertified {
            rule: rule.label(),
            failed,
        });
    }
    let catalog = default_catalog(lab.economy());
    let search = search_dominators(rule, lab, &catalog, budget)?;
    let examined = search.catalog_examined + search.edits_examined;
    let scope = format!(
        "searched {} catalog rules and {} of {} box edits",
        search.catalog_examined, search.edits_examined, search.edits_available
    );
    let (verdict, witness, note) = match search.found {
        Some(d) => {
            let mut w = Witness {
                profile: d.profile,
                agent: None,
                other_agent: None,
                commodity: None,
                deviation: None,
                truthful: d.probed,
                deviated: Some(d.dominating),
                preference: None,
            };
            if let Candidate::BoxEdit(e) = &d.candidate {
                w.agent = Some(e.agent);
                w.commodity = Some(e.commodity);
            }
            (
                Verdict::Refuted,
                Some(w),
                format!("dominated by {}; {scope}", d.candidate.describe()),
            )
        }
        None => (
            Verdict::CertifiedOnGrid,
            None,
            format!("no strategy-proof dominator found; {scope}"),
        ),
    };
    Ok(AxiomReport {
        axiom: Axiom::ParetoUndominatedProbe,
        rule: rule.label(),
        verdict,
        witness,
        profiles_checked: examined,
        grid_points: lab.grid().axes().iter().map(Vec::len).collect(),
        note: Some(note),
        elapsed: start.elapsed(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Elimination {
    pub axiom: Axiom,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub rule: String,
    pub survives: bool,
    /// Failed criteria in check order; empty for survivors.
    pub eliminated_by: Vec<Elimination>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub verdict: Verdict,
    pub entries: Vec<CatalogEntry>,
    pub survivors: Vec<String>,
    /// Survivors coincide with the uniform rule at every grid profile.
    pub survivors_match_uniform: bool,
    /// Non-bossiness was checked in place of replacement monotonicity.
    pub non_bossy_substituted: bool,
    pub grid_points: Vec<usize>,
}

/// Checks which catalog rules are strategy-proof, pass the dominator probe,
/// treat equals equally and are replacement monotone (or non-bossy, when
/// `non_bossy` is set), and whether the survivors all equal uniform.
pub fn uniqueness_spotcheck(
    lab: &AxiomLab<'_>,
    catalog: Option<Vec<RuleSpec>>,
    non_bossy: bool,
    budget: usize,
) -> Result<UniquenessReport> {
    let econ = lab.economy();
    let catalog = catalog.unwrap_or_else(|| default_catalog(econ));
    let last = if non_bossy {
        Axiom::NonBossiness
    } else {
        Axiom::ReplacementMonotonicity
    };
    let axioms = [
        Axiom::StrategyProofness,
        Axiom::Unanimity,
        Axiom::EqualTreatment,
        Axiom::ReplacementMonotonicity,
        Axiom::NonBossiness,
    ];
    let uniform = lab.table(&RuleSpec::Uniform)?;
    let mut tables = Vec::with_capacity(catalog.len());
    let mut reports = Vec::with_capacity(catalog.len());
    for spec in &catalog {
        let t = lab.table(spec)?;
        let label = spec.label();
        reports.push(
            axioms
                .iter()
                .map(|a| Ok((*a, lab.check_on(*a, &label, &t)?)))
                .collect::<Result<BTreeMap<Axiom, AxiomReport>>>()?,
        );
        tables.push(t);
    }

    let mut entries = Vec::with_capacity(catalog.len());
    for (k, spec) in catalog.iter().enumerate() {
        let r = &reports[k];
        let mut out = Vec::new();
        let sp = r[&Axiom::StrategyProofness].is_certified();
        if !sp {
            out.push(Elimination {
                axiom: Axiom::StrategyProofness,
                detail: "manipulable on the grid".into(),
            });
        }
        match pusp_probe(spec, lab, budget) {
            Ok(rep) if rep.is_refuted() => out.push(Elimination {
                axiom: Axiom::ParetoUndominatedProbe,
                detail: rep.note.unwrap_or_default(),
            }),
            Ok(_) => {}
            Err(Error::HypothesesNotCertified { failed, .. }) => {
                let dominated_by = if sp {
                    catalog.iter().enumerate().find(|&(j, _)| {
                        j != k
                            && reports[j][&Axiom::StrategyProofness].is_certified()
                            && tables[j].allocations != tables[k].allocations
                            && first_domination_failure(&tables[j], &tables[k], lab).is_none()
                    })
                } else {
                    None
                };
                for name in failed {
                    let axiom: Axiom = name.parse().expect("axiom names round-trip");
                    if out.iter().any(|e| e.axiom == axiom) {
                        continue;
                    }
                    let mut detail = "dominator probe hypothesis not met".to_string();
                    if let Some((_, d)) = dominated_by {
                        detail.push_str(&format!("; dominated by {}", d.label()));
                    }
                    out.push(Elimination { axiom, detail });
                }
            }
            Err(e) => return Err(e),
        }
        if r[&Axiom::EqualTreatment].is_refuted() {
            out.push(Elimination {
                axiom: Axiom::EqualTreatment,
                detail: "agents with equal peaks receive different bundles".into(),
            });
        }
        if r[&last].is_refuted() && !out.iter().any(|e| e.axiom == last) {
            out.push(Elimination {
                axiom: last,
                detail: "refuted on the grid".into(),
            });
        }
        entries.push(CatalogEntry {
            rule: spec.label(),
            survives: out.is_empty(),
            eliminated_by: out,
        });
    }

    let survivors: Vec<usize> = (0..catalog.len()).filter(|&k| entries[k].survives).collect();
    let survivors_match_uniform = survivors
        .iter()
        .all(|&k| tables[k].allocations == uniform.allocations);
    let verdict = if !survivors.is_empty() && survivors_match_uniform {
        Verdict::CertifiedOnGrid
    } else {
        Verdict::Refuted
    };
    Ok(UniquenessReport {
        verdict,
        survivors: survivors.iter().map(|&k| entries[k].rule.clone()).collect(),
        entries,
        survivors_match_uniform,
        non_bossy_substituted: non_bossy,
        grid_points: lab.grid().axes().iter().map(Vec::len).collect(),
    })
}
