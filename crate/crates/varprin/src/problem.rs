//! Problem-file schema, validation, and digests.
//!
//! A problem file is one JSON document:
//!
//! ```json
//! {
//!   "meta":      { "name": "two-point", "seed": 1 },
//!   "space":     { "points": ["a", "b"], "coords": { "a": [0.0], "b": [1.0] } },
//!   "distance":  { "family": "table", "params": { "matrix": [[0, 1], [1, 0]] } },
//!   "objective": { "a": 0.0, "b": 1.0 },
//!   "schedule":  { "epsilon": 2.0, "delta0": 0.5, "gamma": 0.5 },
//!   "z0": "b"
//! }
//! ```
//!
//! Sections beyond `space` and `distance` are optional; each command
//! requires its own (`bp`: objective, schedule, z0; `ekeland`: objective,
//! epsilon, z0; `caristi`: potential, map, epsilon; `ep`: potential,
//! bifunction, and optionally eps_schedule). Infinite objective or
//! potential values are written as the string `"+inf"`. Validation
//! enforces every module invariant — identity axiom on tables, KL
//! positivity and normalization, referential integrity of identifiers —
//! at parse time.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::applications::{Bifunction, PotentialFn, SetValuedMap};
use crate::distance::{Distance, DistanceSpec};
use crate::engine::{PerturbationSchedule, ScheduleTail};
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::space::{ExtendedObjective, PointSpace};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceSection {
    pub points: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<BTreeMap<String, Vec<f64>>>,
}

/// `epsilon` and `delta0` plus exactly one of `gamma` (geometric tail) or
/// `deltas` (explicit finite list `δ_1 …`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSection {
    pub epsilon: f64,
    pub delta0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
}

impl ScheduleSection {
    pub fn to_schedule(&self) -> Result<PerturbationSchedule> {
        let tail = match (&self.gamma, &self.deltas) {
            (Some(g), None) => ScheduleTail::Geometric { gamma: *g },
            (None, Some(ds)) => ScheduleTail::Explicit { deltas: ds.clone() },
            _ => {
                return Err(Error::Validation(
                    "schedule needs exactly one of `gamma` or `deltas`".into(),
                ))
            }
        };
        let sched = PerturbationSchedule {
            epsilon: self.epsilon,
            delta0: self.delta0,
            tail,
        };
        sched.validate()?;
        Ok(sched)
    }
}

/// The raw, serializable problem document. Field order and BTreeMap keys
/// make `to_canonical_json` deterministic, which the input digest relies
/// on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    #[serde(default)]
    pub meta: Meta,
    pub space: SpaceSection,
    pub distance: DistanceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<BTreeMap<String, ExtReal>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z0: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<Vec<[String; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<BTreeMap<String, ExtReal>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bifunction: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_schedule: Option<Vec<f64>>,
}

impl Problem {
    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s)
            .map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))
    }

    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("problem serializes")
    }

    pub fn to_pretty_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem serializes")
    }

    fn value_table(
        &self,
        space: &PointSpace,
        table: &BTreeMap<String, ExtReal>,
        section: &str,
    ) -> Result<Vec<f64>> {
        for id in table.keys() {
            space
                .idx(id)
                .map_err(|_| Error::Validation(format!("{section} names unknown point `{id}`")))?;
        }
        let mut values = Vec::with_capacity(space.len());
        for i in 0..space.len() {
            match table.get(space.id(i)) {
                Some(v) => values.push(v.0),
                None => {
                    return Err(Error::Validation(format!(
                        "{section} is missing a value for `{}`",
                        space.id(i)
                    )))
                }
            }
        }
        Ok(values)
    }

    /// Validates every section and binds identifiers to indices. All
    /// module-level invariants are enforced here.
    pub fn validate(self) -> Result<BoundProblem> {
        let space = match &self.space.coords {
            None => PointSpace::new(self.space.points.clone())?,
            Some(cmap) => {
                for id in cmap.keys() {
                    if !self.space.points.iter().any(|p| p == id) {
                        return Err(Error::Validation(format!(
                            "coords name unknown point `{id}`"
                        )));
                    }
                }
                let coords = self
                    .space
                    .points
                    .iter()
                    .map(|p| {
                        cmap.get(p).cloned().ok_or_else(|| {
                            Error::Validation(format!("coords are missing point `{p}`"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                PointSpace::with_coords(self.space.points.clone(), coords)?
            }
        };
        let distance = Distance::build(self.distance.clone(), &space)?;
        let objective = self
            .objective
            .as_ref()
            .map(|t| ExtendedObjective::new(self.value_table(&space, t, "objective")?))
            .transpose()?;
        let potential = self
            .potential
            .as_ref()
            .map(|t| PotentialFn::new(self.value_table(&space, t, "potential")?))
            .transpose()?;
        let schedule = self.schedule.as_ref().map(|s| s.to_schedule()).transpose()?;
        let z0 = self.z0.as_ref().map(|id| space.idx(id)).transpose()?;
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e.is_finite()) {
                return Err(Error::Validation("epsilon must be positive".into()));
            }
        }
        let map = self
            .map
            .as_ref()
            .map(|pairs| {
                let graph = pairs
                    .iter()
                    .map(|[x, y]| Ok((space.idx(x)?, space.idx(y)?)))
                    .collect::<Result<Vec<_>>>()?;
                SetValuedMap::from_graph(&space, &graph)
            })
            .transpose()?;
        let bifunction = self
            .bifunction
            .as_ref()
            .map(|rows| Bifunction::new(&space, rows))
            .transpose()?;
        if let Some(es) = &self.eps_schedule {
            if es.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
                return Err(Error::Validation(
                    "eps_schedule entries must be positive".into(),
                ));
            }
        }
        Ok(BoundProblem {
            space,
            distance,
            objective,
            schedule,
            z0,
            epsilon: self.epsilon,
            map,
            potential,
            bifunction,
            eps_schedule: self.eps_schedule.clone(),
            problem: self,
        })
    }
}

/// A parsed, fully validated problem with identifiers resolved to indices.
#[derive(Debug, Clone)]
pub struct BoundProblem {
    pub problem: Problem,
    pub space: PointSpace,
    pub distance: Distance,
    pub objective: Option<ExtendedObjective>,
    pub schedule: Option<PerturbationSchedule>,
    pub z0: Option<usize>,
    pub epsilon: Option<f64>,
    pub map: Option<SetValuedMap>,
    pub potential: Option<PotentialFn>,
    pub bifunction: Option<Bifunction>,
    pub eps_schedule: Option<Vec<f64>>,
}

impl BoundProblem {
    pub fn objective(&self) -> Result<&ExtendedObjective> {
        self.objective
            .as_ref()
            .ok_or_else(|| Error::Validation("problem has no `objective` section".into()))
    }

    pub fn schedule(&self) -> Result<&PerturbationSchedule> {
        self.schedule
            .as_ref()
            .ok_or_else(|| Error::Validation("problem has no `schedule` section".into()))
    }

    pub fn z0(&self) -> Result<usize> {
        self.z0
            .ok_or_else(|| Error::Validation("problem has no `z0` field".into()))
    }

    pub fn epsilon(&self) -> Result<f64> {
        self.epsilon
            .ok_or_else(|| Error::Validation("problem has no `epsilon` field".into()))
    }

    pub fn map(&self) -> Result<&SetValuedMap> {
        self.map
            .as_ref()
            .ok_or_else(|| Error::Validation("problem has no `map` section".into()))
    }

    pub fn potential(&self) -> Result<&PotentialFn> {
        self.potential
            .as_ref()
            .ok_or_else(|| Error::Validation("problem has no `potential` section".into()))
    }

    pub fn bifunction(&self) -> Result<&Bifunction> {
        self.bifunction
            .as_ref()
            .ok_or_else(|| Error::Validation("problem has no `bifunction` section".into()))
    }
}

/// Reads and validates a problem file.
pub fn parse_problem(path: &Path) -> Result<BoundProblem> {
    let text = std::fs::read_to_string(path)?;
    Problem::from_json_str(&text)?.validate()
}

/// Stable hex digest of the canonical serialization of `problem` plus the
/// run-relevant parts of `extra` (command, tolerance, picker, seed…).
pub fn input_digest(problem: &Problem, extra: &str) -> String {
    let mut h = Sha256::new();
    h.update(problem.to_canonical_json().as_bytes());
    h.update(b"\n");
    h.update(extra.as_bytes());
    hex::encode(h.finalize())
}
