//! Finite peak grids standing in for the continuum of reports.

use serde::{Deserialize, Serialize};

use crate::econ::{Bundle, Economy, PeakProfile};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// Sorted candidate values per commodity, each inside `[0, Ω^ℓ]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeakGrid {
    values: Vec<Vec<Rational>>,
}

/// `points_per_axis` evenly spaced values `0, Ω/k, …, Ω` per commodity.
/// A commodity with zero endowment collapses to `{0}`.
pub fn make_grid(econ: &Economy, points_per_axis: usize) -> Result<PeakGrid> {
    if points_per_axis < 2 {
        return Err(Error::InvalidGrid(format!(
            "need at least 2 points per axis, got {points_per_axis}"
        )));
    }
    let steps = Rational::from(points_per_axis - 1);
    let values = econ
        .omega()
        .iter()
        .map(|omega| {
            if omega.is_zero() {
                vec![Rational::ZERO]
            } else {
                (0..points_per_axis)
                    .map(|k| *omega * Rational::from(k) / steps)
                    .collect()
            }
        })
        .collect();
    Ok(PeakGrid { values })
}

impl PeakGrid {
    /// Explicit values; each axis must be strictly increasing and within
    /// the consumption box.
    pub fn from_values(econ: &Economy, values: Vec<Vec<Rational>>) -> Result<PeakGrid> {
        if values.len() != econ.commodities() {
            return Err(Error::InvalidGrid(format!(
                "{} axes for {} commodities",
                values.len(),
                econ.commodities()
            )));
        }
        for (l, axis) in values.iter().enumerate() {
            if axis.is_empty() {
                return Err(Error::InvalidGrid(format!("axis {l} is empty")));
            }
            if axis.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidGrid(format!("axis {l} is not strictly increasing")));
            }
            let omega = econ.omega()[l];
            if axis.iter().any(|v| v.is_negative() || *v > omega) {
                return Err(Error::InvalidGrid(format!("axis {l} leaves [0, {omega}]")));
            }
        }
        Ok(PeakGrid { values })
    }

    /// Multiples of `step[ℓ]` up to `Ω^ℓ`, with `Ω^ℓ` appended when the step
    /// does not divide it.
    pub fn with_steps(econ: &Economy, steps: &[Rational]) -> Result<PeakGrid> {
        if steps.len() != econ.commodities() {
            return Err(Error::InvalidGrid(format!(
                "{} steps for {} commodities",
                steps.len(),
                econ.commodities()
            )));
        }
        let mut values = Vec::with_capacity(steps.len());
        for (step, omega) in steps.iter().zip(econ.omega().iter()) {
            if !step.is_positive() {
                return Err(Error::InvalidGrid(format!("step {step} is not positive")));
            }
            let mut axis = vec![Rational::ZERO];
            let mut x = *step;
            while x < *omega {
                axis.push(x);
                x += *step;
            }
            if omega.is_positive() {
                axis.push(*omega);
            }
            values.push(axis);
        }
        Ok(PeakGrid { values })
    }

    pub fn axes(&self) -> &[Vec<Rational>] {
        &self.values
    }

    pub fn commodities(&self) -> usize {
        self.values.len()
    }

    /// Number of bundles a single agent can report.
    pub fn points_per_agent(&self) -> usize {
        self.values.iter().map(Vec::len).product()
    }

    /// All grid bundles, commodity 0 varying slowest.
    pub fn bundles(&self) -> Vec<Bundle> {
        let mut out = vec![Vec::new()];
        for axis in &self.values {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    axis.iter().map(move |v| {
                        let mut next = prefix.clone();
                        next.push(*v);
                        next
                    })
                })
                .collect();
        }
        out.into_iter().map(Bundle::new).collect()
    }

    /// Number of profiles for `agents` agents, if it fits in `usize`.
    pub fn profile_count(&self, agents: usize) -> Option<usize> {
        (0..agents).try_fold(1usize, |acc, _| acc.checked_mul(self.points_per_agent()))
    }

    /// Whether every coordinate of `bundle` is a grid value.
    pub fn contains(&self, bundle: &Bundle) -> bool {
        bundle.len() == self.values.len()
            && bundle
                .iter()
                .zip(&self.values)
                .all(|(x, axis)| axis.binary_search(x).is_ok())
    }
}

/// Mixed-radix indexing of all profiles over a grid, agent 0 most
/// significant, so index order is lexicographic order.
#[derive(Clone, Debug)]
pub struct ProfileSpace {
    points: Vec<Bundle>,
    agents: usize,
    total: usize,
    places: Vec<usize>,
}

impl ProfileSpace {
    pub fn new(grid: &PeakGrid, agents: usize) -> Result<ProfileSpace> {
        let total = grid
            .profile_count(agents)
            .ok_or_else(|| Error::InvalidGrid("profile count overflows".into()))?;
        let radix = grid.points_per_agent();
        let places = (0..agents)
            .map(|a| radix.pow((agents - 1 - a) as u32))
            .collect();
        Ok(ProfileSpace {
            points: grid.bundles(),
            agents,
            total,
            places,
        })
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    /// Candidate reports of a single agent.
    pub fn points(&self) -> &[Bundle] {
        &self.points
    }

    pub fn radix(&self) -> usize {
        self.points.len()
    }

    /// Index of each agent's point in the profile with the given index.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let m = self.radix();
        let mut digits = vec![0; self.agents];
        for d in digits.iter_mut().rev() {
            *d = index % m;
            index /= m;
        }
        digits
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        digits.iter().fold(0, |acc, d| acc * self.radix() + d)
    }

    /// Index of the profile obtained by replacing `agent`'s point.
    pub fn replace(&self, index: usize, agent: usize, point: usize) -> usize {
        let place = self.places[agent];
        let current = (index / place) % self.radix();
        index - current * place + point * place
    }

    pub fn profile(&self, index: usize) -> PeakProfile {
        PeakProfile::new(
            self.digits(index)
                .into_iter()
                .map(|d| self.points[d].clone())
                .collect(),
        )
    }
}
