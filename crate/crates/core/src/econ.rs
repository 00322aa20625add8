//! Economies, bundles, allocations, betweenness and the quadratic
//! single-peaked preference family.

use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// A point of the consumption box: one amount per commodity.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bundle(Vec<Rational>);

impl Bundle {
    pub fn new(coords: Vec<Rational>) -> Self {
        Bundle(coords)
    }

    pub fn zeros(commodities: usize) -> Self {
        Bundle(vec![Rational::ZERO; commodities])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn coords_mut(&mut self) -> &mut [Rational] {
        &mut self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rational> {
        self.0.iter()
    }

    pub fn into_inner(self) -> Vec<Rational> {
        self.0
    }

    /// Coordinatewise projection onto the box `[lower, upper]`.
    pub fn clamp(&self, lower: &Bundle, upper: &Bundle) -> Bundle {
        Bundle(
            self.0
                .iter()
                .zip(lower.iter().zip(upper.iter()))
                .map(|(x, (lo, hi))| Rational::clamp(*x, *lo, *hi))
                .collect(),
        )
    }
}

impl Index<usize> for Bundle {
    type Output = Rational;
    fn index(&self, commodity: usize) -> &Rational {
        &self.0[commodity]
    }
}

impl From<Vec<Rational>> for Bundle {
    fn from(v: Vec<Rational>) -> Self {
        Bundle(v)
    }
}

impl fmt::Debug for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, x) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Reported peaks, one bundle per agent.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PeakProfile(Vec<Bundle>);

impl PeakProfile {
    pub fn new(peaks: Vec<Bundle>) -> Self {
        PeakProfile(peaks)
    }

    pub fn agents(&self) -> usize {
        self.0.len()
    }

    pub fn peak(&self, agent: usize) -> &Bundle {
        &self.0[agent]
    }

    pub fn peaks(&self) -> &[Bundle] {
        &self.0
    }

    /// The profile with `agent`'s peak replaced.
    pub fn with_peak(&self, agent: usize, peak: Bundle) -> PeakProfile {
        let mut peaks = self.0.clone();
        peaks[agent] = peak;
        PeakProfile(peaks)
    }

    /// Peaks of every agent in one commodity.
    pub fn column(&self, commodity: usize) -> Vec<Rational> {
        self.0.iter().map(|b| b[commodity]).collect()
    }

    /// Removes `agent`, returning the others' peaks in index order.
    pub fn without(&self, agent: usize) -> Vec<Bundle> {
        self.0
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != agent)
            .map(|(_, b)| b.clone())
            .collect()
    }

    /// Inserts `peak` for `agent` into a list of the others' peaks.
    pub fn assemble(agent: usize, peak: Bundle, others: &[Bundle]) -> PeakProfile {
        let mut peaks = Vec::with_capacity(others.len() + 1);
        peaks.extend_from_slice(&others[..agent]);
        peaks.push(peak);
        peaks.extend_from_slice(&others[agent..]);
        PeakProfile(peaks)
    }
}

impl fmt::Debug for PeakProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// One bundle per agent. Feasibility is not enforced by construction; see
/// [`is_feasible`].
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Allocation(Vec<Bundle>);

impl Allocation {
    pub fn new(shares: Vec<Bundle>) -> Self {
        Allocation(shares)
    }

    /// Builds an allocation from per-commodity columns.
    pub fn from_columns(columns: &[Vec<Rational>], agents: usize) -> Self {
        let shares = (0..agents)
            .map(|i| Bundle(columns.iter().map(|col| col[i]).collect()))
            .collect();
        Allocation(shares)
    }

    pub fn agents(&self) -> usize {
        self.0.len()
    }

    pub fn share(&self, agent: usize) -> &Bundle {
        &self.0[agent]
    }

    pub fn shares(&self) -> &[Bundle] {
        &self.0
    }

    pub fn shares_mut(&mut self) -> &mut [Bundle] {
        &mut self.0
    }

    pub fn column(&self, commodity: usize) -> Vec<Rational> {
        self.0.iter().map(|b| b[commodity]).collect()
    }
}

impl fmt::Debug for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// The fixed arena: endowment `omega` (one entry per commodity) shared by
/// `agents` agents.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawEconomy", into = "RawEconomy")]
pub struct Economy {
    omega: Bundle,
    agents: usize,
}

#[derive(Serialize, Deserialize)]
struct RawEconomy {
    omega: Vec<Rational>,
    agents: usize,
}

impl TryFrom<RawEconomy> for Economy {
    type Error = Error;
    fn try_from(raw: RawEconomy) -> Result<Self> {
        make_economy(raw.omega.len(), raw.omega, raw.agents)
    }
}

impl From<Economy> for RawEconomy {
    fn from(e: Economy) -> Self {
        RawEconomy {
            omega: e.omega.into_inner(),
            agents: e.agents,
        }
    }
}

/// Validates and builds an economy with `l` commodities and `n` agents.
pub fn make_economy(l: usize, omega: Vec<Rational>, n: usize) -> Result<Economy> {
    if l == 0 || n == 0 {
        return Err(Error::InvalidDimensions(format!(
            "need at least one commodity and one agent (got l={l}, n={n})"
        )));
    }
    if omega.len() != l {
        return Err(Error::InvalidDimensions(format!(
            "endowment has {} entries for {l} commodities",
            omega.len()
        )));
    }
    if let Some((commodity, value)) = omega.iter().enumerate().find(|(_, w)| w.is_negative()) {
        return Err(Error::InvalidEndowment {
            commodity,
            value: value.to_string(),
        });
    }
    Ok(Economy {
        omega: Bundle(omega),
        agents: n,
    })
}

impl Economy {
    pub fn commodities(&self) -> usize {
        self.omega.len()
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn omega(&self) -> &Bundle {
        &self.omega
    }

    /// Membership in the consumption box `∏ [0, Ω^ℓ]`.
    pub fn contains(&self, bundle: &Bundle) -> bool {
        bundle.len() == self.commodities()
            && bundle
                .iter()
                .zip(self.omega.iter())
                .all(|(x, w)| !x.is_negative() && x <= w)
    }

    /// `Ω / n`.
    pub fn equal_share(&self) -> Bundle {
        let n = Rational::from(self.agents);
        Bundle(self.omega.iter().map(|w| *w / n).collect())
    }

    pub fn equal_division(&self) -> Allocation {
        Allocation(vec![self.equal_share(); self.agents])
    }

    pub fn zero_bundle(&self) -> Bundle {
        Bundle::zeros(self.commodities())
    }

    pub fn check_bundle_shape(&self, bundle: &Bundle) -> Result<()> {
        if bundle.len() != self.commodities() {
            return Err(Error::Shape(format!(
                "bundle has {} coordinates, economy has {} commodities",
                bundle.len(),
                self.commodities()
            )));
        }
        Ok(())
    }

    /// Shape check plus membership of every peak in the consumption box.
    pub fn check_profile(&self, profile: &PeakProfile) -> Result<()> {
        if profile.agents() != self.agents {
            return Err(Error::Shape(format!(
                "profile has {} agents, economy has {}",
                profile.agents(),
                self.agents
            )));
        }
        for (agent, peak) in profile.peaks().iter().enumerate() {
            self.check_bundle_shape(peak)?;
            for (commodity, (p, w)) in peak.iter().zip(self.omega.iter()).enumerate() {
                if p.is_negative() || p > w {
                    return Err(Error::InvalidPeak {
                        agent,
                        commodity,
                        value: p.to_string(),
                        bound: w.to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn check_allocation_shape(&self, alloc: &Allocation) -> Result<()> {
        if alloc.agents() != self.agents {
            return Err(Error::Shape(format!(
                "allocation has {} bundles, economy has {} agents",
                alloc.agents(),
                self.agents
            )));
        }
        alloc
            .shares()
            .iter()
            .try_for_each(|b| self.check_bundle_shape(b))
    }
}

/// True iff every column sums exactly to the endowment and every share lies
/// in the consumption box.
pub fn is_feasible(alloc: &Allocation, econ: &Economy) -> Result<bool> {
    econ.check_allocation_shape(alloc)?;
    if !alloc.shares().iter().all(|b| econ.contains(b)) {
        return Ok(false);
    }
    Ok((0..econ.commodities()).all(|l| {
        alloc.shares().iter().map(|b| b[l]).sum::<Rational>() == econ.omega()[l]
    }))
}

/// Whether `x` lies, coordinate by coordinate, in the closed interval spanned
/// by `a` and `b`.
pub fn between(x: &Bundle, a: &Bundle, b: &Bundle) -> Result<bool> {
    if x.len() != a.len() || x.len() != b.len() {
        return Err(Error::Shape(format!(
            "betweenness over bundles of lengths {}, {}, {}",
            x.len(),
            a.len(),
            b.len()
        )));
    }
    Ok(is_between(x.coords(), a.coords(), b.coords()))
}

/// Unchecked [`between`] for hot loops; slices must have equal length.
#[inline]
pub fn is_between(x: &[Rational], a: &[Rational], b: &[Rational]) -> bool {
    debug_assert!(x.len() == a.len() && x.len() == b.len());
    x.iter().zip(a.iter().zip(b.iter())).all(|(x, (a, b))| {
        if a <= b {
            a <= x && x <= b
        } else {
            b <= x && x <= a
        }
    })
}

/// Weighted squared distance to a peak: lower is better.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawQuadratic", into = "RawQuadratic")]
pub struct QuadraticPreference {
    peak: Bundle,
    weights: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
struct RawQuadratic {
    peak: Bundle,
    weights: Vec<Rational>,
}

impl TryFrom<RawQuadratic> for QuadraticPreference {
    type Error = Error;
    fn try_from(raw: RawQuadratic) -> Result<Self> {
        QuadraticPreference::new(raw.peak, raw.weights)
    }
}

impl From<QuadraticPreference> for RawQuadratic {
    fn from(q: QuadraticPreference) -> Self {
        RawQuadratic {
            peak: q.peak,
            weights: q.weights,
        }
    }
}

impl fmt::Debug for QuadraticPreference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Quadratic(peak {:?}, weights {:?})", self.peak, self.weights)
    }
}

impl QuadraticPreference {
    pub fn new(peak: Bundle, weights: Vec<Rational>) -> Result<Self> {
        if weights.len() != peak.len() {
            return Err(Error::Shape(format!(
                "{} weights for a peak with {} coordinates",
                weights.len(),
                peak.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_positive()) {
            return Err(Error::InvalidPreference(format!(
                "weights must be strictly positive, got {w}"
            )));
        }
        Ok(QuadraticPreference { peak, weights })
    }

    /// Equal unit weights.
    pub fn isotropic(peak: Bundle) -> Self {
        let weights = vec![Rational::ONE; peak.len()];
        QuadraticPreference { peak, weights }
    }

    pub fn peak(&self) -> &Bundle {
        &self.peak
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    /// `∑ w^ℓ (x^ℓ − p^ℓ)²`.
    pub fn cost(&self, x: &Bundle) -> Result<Rational> {
        if x.len() != self.peak.len() {
            return Err(Error::Shape(format!(
                "bundle has {} coordinates, preference has {}",
                x.len(),
                self.peak.len()
            )));
        }
        Ok(self.cost_unchecked(x.coords()))
    }

    fn cost_unchecked(&self, x: &[Rational]) -> Rational {
        x.iter()
            .zip(self.peak.iter().zip(self.weights.iter()))
            .map(|(x, (p, w))| {
                let d = *x - *p;
                *w * d * d
            })
            .sum()
    }

    pub fn strictly_prefers(&self, x: &Bundle, y: &Bundle) -> Result<bool> {
        Ok(self.cost(x)? < self.cost(y)?)
    }

    pub fn weakly_prefers(&self, x: &Bundle, y: &Bundle) -> Result<bool> {
        Ok(self.cost(x)? <= self.cost(y)?)
    }
}

/// Candidate weights `base^k` for `k` in `-max_exponent..=max_exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightLadder {
    pub base: u32,
    pub max_exponent: u32,
}

impl Default for WeightLadder {
    fn default() -> Self {
        WeightLadder {
            base: 2,
            max_exponent: 8,
        }
    }
}

impl WeightLadder {
    fn power(&self, k: u32) -> Rational {
        (0..k).fold(Rational::ONE, |acc, _| acc * Rational::from(self.base))
    }
}

/// Looks for a quadratic preference with the given peak that strictly prefers
/// `better` to `worse`.
///
/// For each coordinate the contribution `(better−p)² − (worse−p)²` has a
/// fixed sign, so the best weights on the ladder put the largest weight on
/// coordinates where `better` is closer and the smallest where it is
/// farther. Exponents are tried from 0 upward and the first success is
/// returned. `None` only means the quadratic family cannot separate the two
/// bundles; a single-peaked preference doing so still exists whenever
/// `worse` is not between the peak and `better`.
pub fn sp_witness_preference(
    peak: &Bundle,
    better: &Bundle,
    worse: &Bundle,
    ladder: WeightLadder,
) -> Result<Option<QuadraticPreference>> {
    if between(worse, peak, better)? {
        return Err(Error::BetweennessHolds);
    }
    let gaps: Vec<Rational> = peak
        .iter()
        .zip(better.iter().zip(worse.iter()))
        .map(|(p, (b, w))| {
            let db = *b - *p;
            let dw = *w - *p;
            db * db - dw * dw
        })
        .collect();
    for k in 0..=ladder.max_exponent {
        let heavy = ladder.power(k);
        let light = Rational::ONE / heavy;
        let weights: Vec<Rational> = gaps
            .iter()
            .map(|g| {
                if g.is_negative() {
                    heavy
                } else if g.is_positive() {
                    light
                } else {
                    Rational::ONE
                }
            })
            .collect();
        let total: Rational = gaps.iter().zip(&weights).map(|(g, w)| *g * *w).sum();
        if total.is_negative() {
            return QuadraticPreference::new(peak.clone(), weights).map(Some);
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn b(xs: &[&str]) -> Bundle {
        Bundle::new(xs.iter().map(|s| q(s)).collect())
    }

    #[test]
    fn make_economy_examples() {
        let e = make_economy(2, vec![q("12"), q("15")], 3).unwrap();
        assert_eq!(e.commodities(), 2);
        assert_eq!(e.agents(), 3);
        assert_eq!(e.omega(), &b(&["12", "15"]));

        let zero = make_economy(1, vec![q("0")], 2).unwrap();
        assert_eq!(zero.omega(), &b(&["0"]));
        assert_eq!(zero.equal_share(), b(&["0"]));

        let ex1 = make_economy(2, vec![q("18"), q("12")], 2).unwrap();
        assert_eq!(ex1.equal_share(), b(&["9", "6"]));
    }

    #[test]
    fn make_economy_errors() {
        assert!(matches!(
            make_economy(2, vec![q("1"), q("-1")], 2),
            Err(Error::InvalidEndowment { commodity: 1, .. })
        ));
        assert!(matches!(
            make_economy(0, vec![], 2),
            Err(Error::InvalidDimensions(_))
        ));
        assert!(matches!(
            make_economy(1, vec![q("1")], 0),
            Err(Error::InvalidDimensions(_))
        ));
        assert!(matches!(
            make_economy(2, vec![q("1")], 1),
            Err(Error::InvalidDimensions(_))
        ));
    }

    #[test]
    fn economy_deserialization_validates() {
        let ok: Economy = serde_json::from_str(r#"{"omega": ["18", 12], "agents": 2}"#).unwrap();
        assert_eq!(ok.omega(), &b(&["18", "12"]));
        assert!(serde_json::from_str::<Economy>(r#"{"omega": ["-1"], "agents": 2}"#).is_err());
    }

    #[test]
    fn feasibility_examples() {
        let e = make_economy(2, vec![q("18"), q("12")], 2).unwrap();
        let half = Allocation::new(vec![b(&["9", "6"]), b(&["9", "6"])]);
        assert!(is_feasible(&half, &e).unwrap());
        let over = Allocation::new(vec![b(&["18", "12"]), b(&["1", "0"])]);
        assert!(!is_feasible(&over, &e).unwrap());
        let trade = Allocation::new(vec![b(&["7.5", "7.5"]), b(&["10.5", "4.5"])]);
        assert!(is_feasible(&trade, &e).unwrap());
        let negative = Allocation::new(vec![b(&["19", "6"]), b(&["-1", "6"])]);
        assert!(!is_feasible(&negative, &e).unwrap());
        let short = Allocation::new(vec![b(&["18", "12"])]);
        assert!(matches!(is_feasible(&short, &e), Err(Error::Shape(_))));
    }

    #[test]
    fn between_examples() {
        assert!(between(&b(&["2", "3"]), &b(&["1", "5"]), &b(&["4", "2"])).unwrap());
        let a = b(&["1", "5"]);
        assert!(between(&a, &a, &b(&["4", "2"])).unwrap());
        assert!(!between(&b(&["0", "0"]), &b(&["1", "1"]), &b(&["2", "2"])).unwrap());
        assert!(matches!(
            between(&b(&["0"]), &b(&["1", "1"]), &b(&["2", "2"])),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn quadratic_examples() {
        let p1 = QuadraticPreference::new(b(&["13.5", "9"]), vec![q("1"), q("3")]).unwrap();
        assert_eq!(p1.cost(&b(&["7.5", "7.5"])).unwrap(), q("42.75"));
        assert_eq!(p1.cost(&b(&["9", "6"])).unwrap(), q("47.25"));
        assert!(p1
            .strictly_prefers(&b(&["7.5", "7.5"]), &b(&["9", "6"]))
            .unwrap());

        let p2 = QuadraticPreference::new(b(&["12", "10.5"]), vec![q("3"), q("1")]).unwrap();
        assert_eq!(p2.cost(&b(&["10.5", "4.5"])).unwrap(), q("42.75"));
        assert_eq!(p2.cost(&b(&["9", "6"])).unwrap(), q("47.25"));
        assert!(p2
            .strictly_prefers(&b(&["10.5", "4.5"]), &b(&["9", "6"]))
            .unwrap());

        assert!(p1
            .strictly_prefers(&b(&["13.5", "9"]), &b(&["13.5", "8.9"]))
            .unwrap());
    }

    #[test]
    fn quadratic_rejects_bad_weights() {
        assert!(matches!(
            QuadraticPreference::new(b(&["1", "1"]), vec![q("1"), q("0")]),
            Err(Error::InvalidPreference(_))
        ));
        assert!(matches!(
            QuadraticPreference::new(b(&["1"]), vec![q("-2")]),
            Err(Error::InvalidPreference(_))
        ));
        let raw = r#"{"peak": ["1"], "weights": ["0"]}"#;
        assert!(serde_json::from_str::<QuadraticPreference>(raw).is_err());
    }

    #[test]
    fn witness_search() {
        let ladder = WeightLadder::default();
        let w = sp_witness_preference(
            &b(&["13.5", "9"]),
            &b(&["7.5", "7.5"]),
            &b(&["9", "6"]),
            ladder,
        )
        .unwrap()
        .expect("a quadratic witness exists");
        assert!(w
            .strictly_prefers(&b(&["7.5", "7.5"]), &b(&["9", "6"]))
            .unwrap());
        assert_eq!(w.weights(), &[q("1/2"), q("2")]);

        let w = sp_witness_preference(&b(&["4"]), &b(&["30/7"]), &b(&["10/3"]), ladder)
            .unwrap()
            .unwrap();
        assert_eq!(w.weights(), &[q("1")]);

        assert_eq!(
            sp_witness_preference(&b(&["5"]), &b(&["9"]), &b(&["4"]), ladder).unwrap(),
            None
        );

        assert_eq!(
            sp_witness_preference(&b(&["5"]), &b(&["9"]), &b(&["7"]), ladder),
            Err(Error::BetweennessHolds)
        );
    }

    #[test]
    fn witness_needs_enough_ladder() {
        // coordinate 1 gains 1, coordinate 2 loses 15: needs weight ratio > 15
        let peak = b(&["0", "0"]);
        let better = b(&["0", "4"]);
        let worse = b(&["1", "1"]);
        let narrow = WeightLadder {
            base: 2,
            max_exponent: 1,
        };
        assert_eq!(
            sp_witness_preference(&peak, &better, &worse, narrow).unwrap(),
            None
        );
        let wide = sp_witness_preference(&peak, &better, &worse, WeightLadder::default())
            .unwrap()
            .unwrap();
        assert!(wide.strictly_prefers(&better, &worse).unwrap());
    }
}
