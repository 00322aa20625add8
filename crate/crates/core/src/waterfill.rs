//! Exact solver for one-commodity water-filling equations.
//!
//! The map `t ↦ ∑ min(cap_i, base_i + t)` is continuous, nondecreasing and
//! piecewise linear with breakpoints `cap_i − base_i`. Walking the sorted
//! breakpoints and solving one linear piece at a time yields the level in
//! closed form, so the solution is exact in rational arithmetic.

use crate::rational::Rational;

/// Smallest level `t` (no smaller than `floor`, when given) such that
/// `∑ min(caps[i], bases[i] + t) == target`.
///
/// Returns `None` when no such level exists.
pub fn lowest_level(
    caps: &[Rational],
    bases: &[Rational],
    target: Rational,
    floor: Option<Rational>,
) -> Option<Rational> {
    assert_eq!(caps.len(), bases.len(), "caps and bases differ in length");
    let n = caps.len();
    if n == 0 {
        return target.is_zero().then(|| floor.unwrap_or(Rational::ZERO));
    }

    // breakpoint of agent i: satisfied (capped) once t >= cap_i - base_i
    let mut order: Vec<usize> = (0..n).collect();
    let keys: Vec<Rational> = caps.iter().zip(bases).map(|(c, b)| *c - *b).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]).then(a.cmp(&b)));

    let mut satisfied = 0usize;
    if let Some(t0) = floor {
        let value: Rational = caps
            .iter()
            .zip(bases)
            .map(|(c, b)| (*c).min(*b + t0))
            .sum();
        if value == target {
            return Some(t0);
        }
        if value > target {
            return None;
        }
        satisfied = order.iter().take_while(|&&i| keys[i] <= t0).count();
    }

    let mut capped_sum: Rational = order[..satisfied].iter().map(|&i| caps[i]).sum();
    let mut free_base: Rational = order[satisfied..].iter().map(|&i| bases[i]).sum();
    for k in satisfied..n {
        let slope = Rational::from(n - k);
        let level = (target - capped_sum - free_base) / slope;
        let next = order[k];
        if level <= keys[next] {
            return Some(level);
        }
        capped_sum += caps[next];
        free_base -= bases[next];
    }
    None
}

/// Largest level `t` (no larger than `ceiling`, when given) such that
/// `∑ max(floors[i], bases[i] + t) == target`.
pub fn highest_level(
    floors: &[Rational],
    bases: &[Rational],
    target: Rational,
    ceiling: Option<Rational>,
) -> Option<Rational> {
    // max(f, b + t) = -min(-f, -b - t): reflect and reuse the demand solver
    let caps: Vec<Rational> = floors.iter().map(|f| -*f).collect();
    let neg_bases: Vec<Rational> = bases.iter().map(|b| -*b).collect();
    lowest_level(&caps, &neg_bases, -target, ceiling.map(|c| -c)).map(|s| -s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| Rational::from(x)).collect()
    }

    #[test]
    fn demand_level() {
        let zeros = v(&[0, 0, 0]);
        assert_eq!(
            lowest_level(&v(&[2, 4, 8]), &zeros, Rational::from(12), Some(Rational::ZERO)),
            Some(Rational::from(6))
        );
        assert_eq!(
            lowest_level(&v(&[0, 5, 10]), &zeros, Rational::from(9), Some(Rational::ZERO)),
            Some(Rational::new(9, 2))
        );
    }

    #[test]
    fn supply_level() {
        let zeros = v(&[0, 0, 0]);
        assert_eq!(
            highest_level(&v(&[2, 7, 4]), &zeros, Rational::from(15), None),
            Some(Rational::from(4))
        );
    }

    #[test]
    fn offsets_shift_the_level() {
        // min(1, 6+t) + min(9, 4+t) + min(9, 2+t) = 12  →  t = 5/2
        let t = lowest_level(
            &v(&[1, 9, 9]),
            &v(&[6, 4, 2]),
            Rational::from(12),
            Some(Rational::ZERO),
        );
        assert_eq!(t, Some(Rational::new(5, 2)));
    }

    #[test]
    fn floor_already_solves() {
        assert_eq!(
            lowest_level(&v(&[9, 9]), &v(&[3, 3]), Rational::from(6), Some(Rational::ZERO)),
            Some(Rational::ZERO)
        );
    }

    #[test]
    fn unreachable_targets() {
        assert_eq!(
            lowest_level(&v(&[1, 1]), &v(&[0, 0]), Rational::from(5), Some(Rational::ZERO)),
            None
        );
        assert_eq!(
            lowest_level(&v(&[4, 4]), &v(&[3, 3]), Rational::from(2), Some(Rational::ZERO)),
            None
        );
        assert_eq!(lowest_level(&[], &[], Rational::from(1), None), None);
        assert_eq!(lowest_level(&[], &[], Rational::ZERO, None), Some(Rational::ZERO));
    }
}
