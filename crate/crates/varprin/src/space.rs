//! Finite point spaces, point sets and extended-real objectives.
//!
//! Every construction in this crate runs on a [`PointSpace`]: a finite,
//! ordered list of distinct point identifiers, optionally carrying real
//! coordinate vectors of a common dimension. Points are addressed by index
//! internally; identifiers appear at the serialization boundary.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Finite ground set with optional coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSpace {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    coords: Option<Vec<Vec<f64>>>,
}

impl PointSpace {
    /// Builds a space from distinct identifiers, without coordinates.
    pub fn new<I, S>(ids: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::build(ids.into_iter().map(Into::into).collect(), None)
    }

    /// Builds a space whose points carry coordinate vectors. All vectors
    /// must share one dimension `n >= 1`.
    pub fn with_coords<I, S>(ids: I, coords: Vec<Vec<f64>>) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::build(ids.into_iter().map(Into::into).collect(), Some(coords))
    }

    fn build(ids: Vec<String>, coords: Option<Vec<Vec<f64>>>) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::Validation("point space must be nonempty".into()));
        }
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::Validation(format!(
                    "duplicate point identifier `{id}`"
                )));
            }
        }
        if let Some(cs) = &coords {
            if cs.len() != ids.len() {
                return Err(Error::Validation(format!(
                    "coordinate count {} does not match point count {}",
                    cs.len(),
                    ids.len()
                )));
            }
            let dim = cs[0].len();
            if dim == 0 {
                return Err(Error::Validation(
                    "coordinate vectors must have dimension >= 1".into(),
                ));
            }
            for (i, v) in cs.iter().enumerate() {
                if v.len() != dim {
                    return Err(Error::Validation(format!(
                        "coordinate vector of `{}` has dimension {} (expected {})",
                        ids[i],
                        v.len(),
                        dim
                    )));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Validation(format!(
                        "coordinate vector of `{}` contains a non-finite entry",
                        ids[i]
                    )));
                }
            }
        }
        Ok(Self { ids, index, coords })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Identifier of the point at `i`. Panics if out of bounds.
    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Index of the point with identifier `id`.
    pub fn idx(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownPoint(id.to_string()))
    }

    pub fn has_coords(&self) -> bool {
        self.coords.is_some()
    }

    pub fn coord(&self, i: usize) -> Result<&[f64]> {
        match &self.coords {
            Some(cs) => Ok(&cs[i]),
            None => Err(Error::DomainViolation(
                "space carries no coordinates".into(),
            )),
        }
    }

    pub fn dim(&self) -> Option<usize> {
        self.coords.as_ref().map(|cs| cs[0].len())
    }
}

/// Subset of a space, canonically stored as strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSet {
    indices: Vec<usize>,
}

impl PointSet {
    /// Builds a set from arbitrary indices; sorts and deduplicates.
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Self { indices }
    }

    /// Collects the indices satisfying `pred`, in space order.
    pub fn filter(n: usize, pred: impl Fn(usize) -> bool) -> Self {
        Self {
            indices: (0..n).filter(|&i| pred(i)).collect(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn is_subset_of(&self, other: &PointSet) -> bool {
        self.indices.iter().all(|&i| other.contains(i))
    }

    /// Identifiers of the members, in space order.
    pub fn ids<'a>(&self, space: &'a PointSpace) -> Vec<&'a str> {
        self.indices.iter().map(|&i| space.id(i)).collect()
    }
}

impl FromIterator<usize> for PointSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

/// Function `X -> R ∪ {+∞}`, stored aligned with the space order.
///
/// Infinite values use `f64::INFINITY`; NaN and `-∞` are rejected. At least
/// one value must be finite, and finite values are automatically bounded
/// below on a finite space.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedObjective {
    values: Vec<f64>,
}

impl ExtendedObjective {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Validation("objective must be nonempty".into()));
        }
        for (i, v) in values.iter().enumerate() {
            if v.is_nan() || *v == f64::NEG_INFINITY {
                return Err(Error::Validation(format!(
                    "objective value at index {i} must be finite or +inf"
                )));
            }
        }
        if !values.iter().any(|v| v.is_finite()) {
            return Err(Error::Validation(
                "objective must be finite at least at one point".into(),
            ));
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Value at index `i`; `f64::INFINITY` marks +∞.
    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Minimum over the finite values (the infimum over the whole space).
    pub fn min_finite(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .fold(f64::INFINITY, f64::min)
    }

    /// Lowest index attaining the minimum finite value.
    pub fn argmin(&self) -> usize {
        let m = self.min_finite();
        self.values.iter().position(|&v| v == m).expect("finite somewhere")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicate_ids() {
        let err = PointSpace::new(["a", "b", "a"]).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn rejects_empty_space() {
        assert!(PointSpace::new(Vec::<String>::new()).is_err());
    }

    #[test]
    fn rejects_mixed_dimensions() {
        let err =
            PointSpace::with_coords(["a", "b"], vec![vec![0.0], vec![1.0, 2.0]]).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn index_roundtrip() {
        let s = PointSpace::new(["a", "b", "c"]).unwrap();
        assert_eq!(s.idx("b").unwrap(), 1);
        assert_eq!(s.id(2), "c");
        assert!(matches!(s.idx("zz"), Err(Error::UnknownPoint(_))));
    }

    #[test]
    fn point_set_canonical_and_subset() {
        let a = PointSet::new(vec![2, 0, 2, 1]);
        assert_eq!(a.indices(), &[0, 1, 2]);
        let b = PointSet::new(vec![1, 2]);
        assert!(b.is_subset_of(&a));
        assert!(!a.is_subset_of(&b));
    }

    #[test]
    fn objective_requires_one_finite_value() {
        assert!(ExtendedObjective::new(vec![f64::INFINITY, f64::INFINITY]).is_err());
        let f = ExtendedObjective::new(vec![f64::INFINITY, 3.0]).unwrap();
        assert_eq!(f.min_finite(), 3.0);
        assert_eq!(f.argmin(), 1);
    }

    #[test]
    fn objective_rejects_nan_and_neg_inf() {
        assert!(ExtendedObjective::new(vec![f64::NAN]).is_err());
        assert!(ExtendedObjective::new(vec![f64::NEG_INFINITY, 0.0]).is_err());
    }
}
