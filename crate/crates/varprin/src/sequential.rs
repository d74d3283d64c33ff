//! Sequential vocabulary induced by a distance function — convergence,
//! Cauchy moduli, sublevel sets — and the nested-family intersection
//! procedure that both engines rest on.
//!
//! Only finite prefixes of sequences can be stored, so a [`SequenceTrace`]
//! carries an explicit tail rule. On a finite space a sequence converges
//! (in either the right or left sense) exactly when it is eventually
//! constant, by the identity axiom, so eventually-constant tails are the
//! ones that yield definitive verdicts.

use crate::distance::Distance;
use crate::error::{Error, Result};
use crate::space::{ExtendedObjective, PointSet, PointSpace};

/// What the sequence does past its stored prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailRule {
    /// All terms from the given index on coincide with the term there.
    EventuallyConstant(usize),
    /// Nothing is known beyond the prefix.
    Unspecified,
}

/// Stored prefix `x_0, …, x_m` of a sequence, plus its tail rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceTrace {
    terms: Vec<usize>,
    tail: TailRule,
}

impl SequenceTrace {
    pub fn new(space: &PointSpace, terms: Vec<usize>, tail: TailRule) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Validation("sequence prefix must be nonempty".into()));
        }
        if let Some(&bad) = terms.iter().find(|&&t| t >= space.len()) {
            return Err(Error::UnknownPoint(format!("index {bad}")));
        }
        if let TailRule::EventuallyConstant(k) = tail {
            if k >= terms.len() {
                return Err(Error::Validation(format!(
                    "tail index {k} outside the stored prefix"
                )));
            }
            let c = terms[k];
            if terms[k..].iter().any(|&t| t != c) {
                return Err(Error::Validation(
                    "prefix is not constant from the declared tail index".into(),
                ));
            }
        }
        Ok(Self { terms, tail })
    }

    pub fn terms(&self) -> &[usize] {
        &self.terms
    }

    pub fn tail(&self) -> TailRule {
        self.tail
    }

    /// The constant the tail settles at, if declared.
    pub fn tail_constant(&self) -> Option<usize> {
        match self.tail {
            TailRule::EventuallyConstant(k) => Some(self.terms[k]),
            TailRule::Unspecified => None,
        }
    }
}

/// Which argument slot of `d` the sequence terms occupy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Right notions: convergence `d(x, x_i) → 0`, Cauchy
    /// `sup_{j≥i} d(x_j, x_i) → 0`.
    Right,
    /// Left notions: the mirrored argument order.
    Left,
}

/// Per-index Cauchy modulus over the stored prefix: entry `i` is
/// `sup_{j ≥ i} d(x_j, x_i)` for [`Side::Right`] (arguments swapped for
/// [`Side::Left`]). Under an eventually-constant tail the prefix already
/// realizes the supremum of the full infinite sequence, so the reported
/// modulus is exact.
pub fn cauchy_modulus(d: &Distance, seq: &SequenceTrace, side: Side) -> Vec<f64> {
    let terms = seq.terms();
    (0..terms.len())
        .map(|i| {
            terms[i..]
                .iter()
                .map(|&j| match side {
                    Side::Right => d.eval(j, terms[i]),
                    Side::Left => d.eval(terms[i], j),
                })
                .fold(0.0_f64, f64::max)
        })
        .collect()
}

/// Verdict of a convergence query on finite data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Yes,
    No,
    /// The stored prefix cannot decide (unspecified tail).
    Inconclusive,
}

/// Does the sequence converge to `x` on the given side?
///
/// With an eventually-constant tail the limit candidate works exactly when
/// it equals the tail constant (identity axiom). With an unspecified tail
/// no finite prefix certifies a limit, so the verdict is inconclusive; the
/// last prefix distance and `tol` only qualify how far the data is from
/// settling.
pub fn converges_to(
    d: &Distance,
    seq: &SequenceTrace,
    x: usize,
    side: Side,
    _tol: f64,
) -> Verdict {
    let _ = side; // both sides reduce to tail equality on finite spaces
    let _ = d;
    match seq.tail_constant() {
        Some(c) if c == x => Verdict::Yes,
        Some(_) => Verdict::No,
        None => Verdict::Inconclusive,
    }
}

/// Sublevel set `S_f(λ) = { x | f(x) ≤ λ }`; +∞ values never qualify.
pub fn sublevel_set(space: &PointSpace, f: &ExtendedObjective, lambda: f64) -> PointSet {
    PointSet::filter(space.len(), |i| f.value(i) <= lambda)
}

/// How ball containment of a nested family is checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContainmentMode {
    /// `d(y, c_i) < r_i`, the ball definition — for user-built families.
    Strict,
    /// `d(y, c_i) ≤ r_i` (with a small float guard) — engine-derived
    /// families satisfy the non-strict estimate their construction proves.
    NonStrict,
}

/// Decreasing sets `S_0 ⊇ S_1 ⊇ …` with centers `c_i ∈ S_i` and radii
/// bounding each set inside the right ball about its center.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedFamily {
    pub sets: Vec<PointSet>,
    pub centers: Vec<usize>,
    pub radii: Vec<f64>,
    pub containment: ContainmentMode,
}

/// Float guard for non-strict containment checks.
const CONTAINMENT_GUARD: f64 = 1e-9;

/// Finite surrogate of the Cantor intersection lemma.
///
/// Validates the hypotheses — nesting, nonemptiness, centers inside their
/// sets, ball containment per the family's mode, positive radii descending
/// below `cutoff` (default: half the least positive distance, which forces
/// the last ball to be a singleton) — and returns the unique point of the
/// intersection together with the singleton check.
///
/// The default cutoff computation scans all pairs; pass an explicit cutoff
/// on large derived spaces.
pub fn cantor_intersect(
    space: &PointSpace,
    d: &Distance,
    fam: &NestedFamily,
    cutoff: Option<f64>,
) -> Result<(usize, bool)> {
    let m = fam.sets.len();
    if m == 0 || fam.centers.len() != m || fam.radii.len() != m {
        return Err(Error::HypothesisViolation(
            "family must have equally many nonempty sets, centers and radii".into(),
        ));
    }
    for (i, set) in fam.sets.iter().enumerate() {
        if set.is_empty() {
            return Err(Error::HypothesisViolation(format!("set {i} is empty")));
        }
        if set.indices().iter().any(|&p| p >= space.len()) {
            return Err(Error::UnknownPoint(format!("in set {i}")));
        }
        if !(fam.radii[i] > 0.0) {
            return Err(Error::HypothesisViolation(format!(
                "radius {i} must be positive"
            )));
        }
        if !set.contains(fam.centers[i]) {
            return Err(Error::HypothesisViolation(format!(
                "center `{}` lies outside set {i}",
                space.id(fam.centers[i])
            )));
        }
        if i + 1 < m && !fam.sets[i + 1].is_subset_of(set) {
            return Err(Error::HypothesisViolation(format!(
                "set {} is not contained in set {i}",
                i + 1
            )));
        }
        for &y in set.indices() {
            let dist = d.eval(y, fam.centers[i]);
            let inside = match fam.containment {
                ContainmentMode::Strict => dist < fam.radii[i],
                ContainmentMode::NonStrict => dist <= fam.radii[i] + CONTAINMENT_GUARD,
            };
            if !inside {
                return Err(Error::HypothesisViolation(format!(
                    "set {i} escapes the ball about `{}`: d = {dist}, r = {}",
                    space.id(fam.centers[i]),
                    fam.radii[i]
                )));
            }
        }
    }
    let cutoff = match cutoff {
        Some(c) => c,
        None => 0.5 * d.min_positive(),
    };
    let last_r = *fam.radii.last().expect("nonempty");
    if !(last_r < cutoff) {
        return Err(Error::HypothesisViolation(format!(
            "radii do not descend below the cutoff: last radius {last_r} ≥ {cutoff}"
        )));
    }
    // Nesting makes the intersection equal the last set.
    let tail = fam.sets.last().expect("nonempty");
    if tail.len() > 1 {
        return Err(Error::NonSingleton(format!(
            "{} points survive every set",
            tail.len()
        )));
    }
    Ok((tail.indices()[0], true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::DistanceSpec;

    fn space3() -> PointSpace {
        PointSpace::new(["a", "b", "c"]).unwrap()
    }

    fn dist(space: &PointSpace, m: Vec<Vec<f64>>) -> Distance {
        Distance::build(DistanceSpec::Table { matrix: m }, space).unwrap()
    }

    #[test]
    fn trace_validation() {
        let s = space3();
        assert!(SequenceTrace::new(&s, vec![], TailRule::Unspecified).is_err());
        assert!(SequenceTrace::new(&s, vec![0, 9], TailRule::Unspecified).is_err());
        assert!(SequenceTrace::new(&s, vec![0, 1, 0], TailRule::EventuallyConstant(1)).is_err());
        assert!(SequenceTrace::new(&s, vec![0, 1, 1], TailRule::EventuallyConstant(1)).is_ok());
    }

    #[test]
    fn modulus_constant_sequence_is_zero() {
        let s = space3();
        let d = dist(
            &s,
            vec![
                vec![0.0, 1.0, 1.0],
                vec![1.0, 0.0, 1.0],
                vec![1.0, 1.0, 0.0],
            ],
        );
        let seq = SequenceTrace::new(&s, vec![1, 1, 1], TailRule::EventuallyConstant(0)).unwrap();
        assert_eq!(cauchy_modulus(&d, &seq, Side::Right), vec![0.0, 0.0, 0.0]);
        assert_eq!(cauchy_modulus(&d, &seq, Side::Left), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn modulus_alternating_stays_at_one() {
        let s = space3();
        let d = dist(
            &s,
            vec![
                vec![0.0, 1.0, 5.0],
                vec![1.0, 0.0, 5.0],
                vec![5.0, 5.0, 0.0],
            ],
        );
        let seq =
            SequenceTrace::new(&s, vec![0, 1, 0, 1], TailRule::Unspecified).unwrap();
        let m = cauchy_modulus(&d, &seq, Side::Right);
        assert_eq!(m, vec![1.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn modulus_vanishes_from_tail_index() {
        let s = space3();
        let d = dist(
            &s,
            vec![
                vec![0.0, 2.0, 2.0],
                vec![3.0, 0.0, 2.0],
                vec![3.0, 3.0, 0.0],
            ],
        );
        let seq = SequenceTrace::new(
            &s,
            vec![0, 1, 0, 2, 2, 2],
            TailRule::EventuallyConstant(3),
        )
        .unwrap();
        let m = cauchy_modulus(&d, &seq, Side::Right);
        assert_eq!(&m[3..], &[0.0, 0.0, 0.0]);
        assert!(m[0] > 0.0);
    }

    #[test]
    fn convergence_verdicts() {
        let s = space3();
        let d = dist(
            &s,
            vec![
                vec![0.0, 1.0, 1.0],
                vec![1.0, 0.0, 1.0],
                vec![1.0, 1.0, 0.0],
            ],
        );
        let ec = SequenceTrace::new(&s, vec![0, 2, 2], TailRule::EventuallyConstant(1)).unwrap();
        assert_eq!(converges_to(&d, &ec, 2, Side::Right, 1e-9), Verdict::Yes);
        assert_eq!(converges_to(&d, &ec, 0, Side::Right, 1e-9), Verdict::No);
        let open = SequenceTrace::new(&s, vec![0, 1], TailRule::Unspecified).unwrap();
        assert_eq!(
            converges_to(&d, &open, 1, Side::Right, 1e-9),
            Verdict::Inconclusive
        );
    }

    #[test]
    fn eventually_constant_converges_to_exactly_one_point() {
        let s = space3();
        let d = dist(
            &s,
            vec![
                vec![0.0, 4.0, 2.0],
                vec![1.0, 0.0, 2.0],
                vec![3.0, 5.0, 0.0],
            ],
        );
        let seq = SequenceTrace::new(&s, vec![0, 1, 1], TailRule::EventuallyConstant(1)).unwrap();
        let yeses: Vec<usize> = (0..3)
            .filter(|&x| converges_to(&d, &seq, x, Side::Right, 1e-9) == Verdict::Yes)
            .collect();
        assert_eq!(yeses, vec![1]);
    }

    #[test]
    fn sublevel_examples() {
        let s = space3();
        let f = ExtendedObjective::new(vec![0.0, 1.0, 2.0]).unwrap();
        assert!(sublevel_set(&s, &f, -0.5).is_empty());
        assert_eq!(sublevel_set(&s, &f, 1.0).ids(&s), vec!["a", "b"]);
        assert_eq!(sublevel_set(&s, &f, 100.0).len(), 3);
        let g = ExtendedObjective::new(vec![0.0, f64::INFINITY, 2.0]).unwrap();
        assert_eq!(sublevel_set(&s, &g, 1e300).ids(&s), vec!["a", "c"]);
    }

    #[test]
    fn sublevel_monotone() {
        let s = space3();
        let f = ExtendedObjective::new(vec![3.0, 1.0, 2.0]).unwrap();
        let lo = sublevel_set(&s, &f, 1.5);
        let hi = sublevel_set(&s, &f, 2.5);
        assert!(lo.is_subset_of(&hi));
    }

    #[test]
    fn cantor_constant_family() {
        let s = space3();
        let d = dist(
            &s,
            vec![
                vec![0.0, 1.0, 1.0],
                vec![1.0, 0.0, 1.0],
                vec![1.0, 1.0, 0.0],
            ],
        );
        let fam = NestedFamily {
            sets: vec![PointSet::new(vec![1]); 4],
            centers: vec![1; 4],
            radii: (0..4).map(|i| 0.5_f64.powi(i)).collect(),
            containment: ContainmentMode::Strict,
        };
        // min positive distance 1 → default cutoff 0.5; last radius 1/8.
        let (p, singleton) = cantor_intersect(&s, &d, &fam, None).unwrap();
        assert_eq!((p, singleton), (1, true));
    }

    #[test]
    fn cantor_rejects_flat_radii() {
        let s = space3();
        let d = dist(
            &s,
            vec![
                vec![0.0, 1.0, 1.0],
                vec![1.0, 0.0, 1.0],
                vec![1.0, 1.0, 0.0],
            ],
        );
        let fam = NestedFamily {
            sets: vec![PointSet::new(vec![1]); 3],
            centers: vec![1; 3],
            radii: vec![1.0; 3],
            containment: ContainmentMode::Strict,
        };
        assert!(matches!(
            cantor_intersect(&s, &d, &fam, None),
            Err(Error::HypothesisViolation(_))
        ));
    }

    #[test]
    fn cantor_rejects_broken_nesting_and_escaped_ball() {
        let s = space3();
        let d = dist(
            &s,
            vec![
                vec![0.0, 1.0, 1.0],
                vec![1.0, 0.0, 1.0],
                vec![1.0, 1.0, 0.0],
            ],
        );
        let broken = NestedFamily {
            sets: vec![PointSet::new(vec![0]), PointSet::new(vec![1])],
            centers: vec![0, 1],
            radii: vec![1.0, 0.25],
            containment: ContainmentMode::Strict,
        };
        assert!(matches!(
            cantor_intersect(&s, &d, &broken, None),
            Err(Error::HypothesisViolation(_))
        ));
        let escaped = NestedFamily {
            sets: vec![PointSet::new(vec![0, 1]), PointSet::new(vec![0])],
            centers: vec![0, 0],
            radii: vec![0.5, 0.25],
            containment: ContainmentMode::Strict,
        };
        // d(b, a) = 1 ≥ 0.5, so S_0 escapes B(a, 0.5).
        assert!(matches!(
            cantor_intersect(&s, &d, &escaped, None),
            Err(Error::HypothesisViolation(_))
        ));
    }

    #[test]
    fn cantor_detects_non_singleton() {
        // Two points at distance below the cutoff would defeat uniqueness;
        // engineer radii small enough that the last set still holds both.
        let s = space3();
        let d = dist(
            &s,
            vec![
                vec![0.0, 0.001, 1.0],
                vec![0.001, 0.0, 1.0],
                vec![1.0, 1.0, 0.0],
            ],
        );
        let pair = PointSet::new(vec![0, 1]);
        let fam = NestedFamily {
            sets: vec![pair.clone(), pair],
            centers: vec![0, 0],
            radii: vec![0.01, 0.002],
            containment: ContainmentMode::Strict,
        };
        // default cutoff = 0.0005; force an explicit one above the last radius
        assert!(matches!(
            cantor_intersect(&s, &d, &fam, Some(0.01)),
            Err(Error::NonSingleton(_))
        ));
    }
}
