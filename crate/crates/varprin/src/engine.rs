//! The two inductive minimizer constructions and their certificate
//! checkers.
//!
//! Both engines shrink a sublevel-style set around successive
//! quasi-minimizers of a perturbed objective:
//!
//! - **Borwein-Preiss**: the perturbation accumulates,
//!   `g_i(z) = f(z) + Σ_{k≤i} δ_k d(z, z_k)`, with
//!   `S_i = { z ∈ S_{i-1} | g_i(z) ≤ g_{i-1}(z_i) }` and step slack
//!   `ε δ_i / (2^i δ_0)`. Every set obeys `d(z, z_i) ≤ ε/(2^i δ_0)`.
//! - **Ekeland**: the perturbation is memoryless,
//!   `S_i = { z ∈ S_{i-1} | f(z) + ε d(z, z_i) ≤ f(z_i) }` with step slack
//!   `ε/2^i`, giving `d(z, z_i) ≤ 2^{-i}` (and `≤ 1` at `i = 0`).
//!
//! On a finite space the exact picker stabilizes by the second set; the
//! seeded quasi picker stabilizes once the radius bound drops below the
//! least positive distance. Certificates restate the constructions'
//! advertised conclusions as brute-force-checkable claims with numeric
//! margins.
//!
//! A caution that the certificates make visible: with the accumulating
//! perturbation, a point that once leaves the shrinking set can never beat
//! the limit again, so the global-minimality claim (c) always verifies.
//! The memoryless Ekeland sets have no such memory — on strongly
//! asymmetric distances a point far from `z_0` but close to `z̄` can
//! undercut claim (c), and on some instances *no* point satisfies all
//! three conclusions. [`ekeland_conclusion_witnesses`] decides which case
//! a failing instance is in.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distance::Distance;
use crate::error::{Error, Result};
use crate::ext::{ext_sub, ExtReal};
use crate::sequential::{ContainmentMode, NestedFamily};
use crate::space::{ExtendedObjective, PointSet, PointSpace};

/// Perturbation weights `δ_0, δ_1, …` plus the admissibility budget `ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSchedule {
    pub epsilon: f64,
    pub delta0: f64,
    pub tail: ScheduleTail,
}

/// How `δ_i` continues past `δ_0`.
#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleTail {
    /// `δ_i = δ_0 γ^i` with `γ ∈ (0,1)` — the series stays positive and
    /// summable, as the construction requires.
    Geometric { gamma: f64 },
    /// Explicit `δ_1 … δ_m`; the sequence *ends* there, a documented
    /// deviation flagged in certificates. Runs needing more steps abort.
    Explicit { deltas: Vec<f64> },
}

impl PerturbationSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::BadParameter("epsilon must be positive".into()));
        }
        if !(self.delta0 > 0.0 && self.delta0.is_finite()) {
            return Err(Error::BadParameter("delta0 must be positive".into()));
        }
        match &self.tail {
            ScheduleTail::Geometric { gamma } => {
                if !(*gamma > 0.0 && *gamma < 1.0) {
                    return Err(Error::BadParameter(format!(
                        "gamma must lie in (0, 1), got {gamma}"
                    )));
                }
            }
            ScheduleTail::Explicit { deltas } => {
                if deltas.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
                    return Err(Error::BadParameter(
                        "explicit deltas must all be positive".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// `δ_k`, or `None` once an explicit list is exhausted.
    pub fn delta(&self, k: usize) -> Option<f64> {
        if k == 0 {
            return Some(self.delta0);
        }
        match &self.tail {
            ScheduleTail::Geometric { gamma } => Some(self.delta0 * gamma.powi(k as i32)),
            ScheduleTail::Explicit { deltas } => deltas.get(k - 1).copied(),
        }
    }

    /// `Σ_{k≥from} δ_k` — closed form for the geometric tail, explicit sum
    /// (zero past the end) for finite lists.
    pub fn tail_sum(&self, from: usize) -> f64 {
        match &self.tail {
            ScheduleTail::Geometric { gamma } => {
                self.delta0 * gamma.powi(from as i32) / (1.0 - gamma)
            }
            ScheduleTail::Explicit { .. } => {
                let mut s = 0.0;
                let mut k = from;
                while let Some(d) = self.delta(k) {
                    s += d;
                    k += 1;
                }
                s
            }
        }
    }

    pub fn is_finite_tail(&self) -> bool {
        matches!(self.tail, ScheduleTail::Explicit { .. })
    }
}

/// How the next iterate is selected among admissible quasi-minimizers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Picker {
    /// Exact argmin of the running perturbed objective, ties broken by
    /// lowest space index. Deterministic; stabilizes within `|X| + 1`.
    Exact,
    /// Uniformly random point within the step's slack of the infimum,
    /// exercising the constructions' full generality.
    Quasi { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    BorweinPreiss,
    Ekeland,
}

/// One step of a construction: the iterate, the set it pins, the slack
/// budget the iterate was chosen under, and the radius bound the set obeys.
#[derive(Debug, Clone, PartialEq)]
pub struct Iterate {
    pub z: usize,
    pub set: PointSet,
    pub slack: f64,
    pub radius: f64,
}

/// Full record of a run: `iterates[i]` holds `(z_i, S_i, slack_i, r_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub kind: TraceKind,
    pub iterates: Vec<Iterate>,
    /// First index whose set is a singleton.
    pub stabilized_at: Option<usize>,
}

impl Trace {
    pub fn centers(&self) -> Vec<usize> {
        self.iterates.iter().map(|it| it.z).collect()
    }

    pub fn last_set(&self) -> &PointSet {
        &self.iterates.last().expect("nonempty trace").set
    }
}

fn check_start(f: &ExtendedObjective, z0: usize, epsilon: f64, n: usize) -> Result<()> {
    if z0 >= n {
        return Err(Error::UnknownPoint(format!("index {z0}")));
    }
    if !f.value(z0).is_finite() {
        return Err(Error::HypothesisViolation(
            "f(z0) must be finite".into(),
        ));
    }
    if !(f.value(z0) < f.min_finite() + epsilon) {
        return Err(Error::HypothesisViolation(format!(
            "z0 is not an ε-quasi-minimizer: f(z0) = {} ≥ inf f + ε = {}",
            f.value(z0),
            f.min_finite() + epsilon
        )));
    }
    Ok(())
}

/// Lowest-index argmin of `vals` over `set`.
fn argmin_over(set: &PointSet, vals: &[f64]) -> usize {
    let mut best = set.indices()[0];
    for &z in set.indices() {
        if vals[z] < vals[best] {
            best = z;
        }
    }
    best
}

fn pick(
    set: &PointSet,
    vals: &[f64],
    slack: f64,
    picker: Picker,
    rng: &mut Option<ChaCha8Rng>,
) -> usize {
    match picker {
        Picker::Exact => argmin_over(set, vals),
        Picker::Quasi { .. } => {
            let m = vals[argmin_over(set, vals)];
            let admissible: Vec<usize> = set
                .indices()
                .iter()
                .copied()
                .filter(|&z| vals[z] <= m + slack)
                .collect();
            let rng = rng.as_mut().expect("quasi picker carries an rng");
            admissible[rng.gen_range(0..admissible.len())]
        }
    }
}

/// Runs the Borwein-Preiss construction from `z0`, which must satisfy
/// `f(z0) < inf f + ε`. Returns the located point `z̄` (sole member of the
/// final set) and the full trace.
pub fn borwein_preiss(
    space: &PointSpace,
    d: &Distance,
    f: &ExtendedObjective,
    sched: &PerturbationSchedule,
    z0: usize,
    picker: Picker,
    max_iter: usize,
) -> Result<(usize, Trace)> {
    sched.validate()?;
    let n = space.len();
    if d.len() != n || f.len() != n {
        return Err(Error::BadParameter(
            "space, distance and objective sizes differ".into(),
        ));
    }
    check_start(f, z0, sched.epsilon, n)?;
    let mut rng = match picker {
        Picker::Quasi { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        Picker::Exact => None,
    };

    // g holds the running perturbed values f(z) + Σ_{k≤i} δ_k d(z, z_k).
    let mut g: Vec<f64> = f.values().to_vec();
    let threshold0 = g[z0];
    for (z, gz) in g.iter_mut().enumerate() {
        *gz += sched.delta0 * d.eval(z, z0);
    }
    let s0 = PointSet::filter(n, |z| g[z] <= threshold0);
    debug_assert!(s0.contains(z0));

    let mut iterates = vec![Iterate {
        z: z0,
        set: s0,
        slack: sched.epsilon,
        radius: sched.epsilon / sched.delta0,
    }];
    let mut i = 0usize;
    while iterates[i].set.len() > 1 {
        i += 1;
        if i > max_iter {
            return Err(Error::IterationLimit(format!(
                "no singleton after {max_iter} iterations"
            )));
        }
        let delta_i = sched.delta(i).ok_or_else(|| {
            Error::BadParameter(format!(
                "explicit delta list exhausted at iteration {i} before stabilization"
            ))
        })?;
        let slack = sched.epsilon * delta_i / (2f64.powi(i as i32) * sched.delta0);
        let prev = &iterates[i - 1].set;
        let zi = pick(prev, &g, slack, picker, &mut rng);
        let threshold = g[zi];
        for (z, gz) in g.iter_mut().enumerate() {
            *gz += delta_i * d.eval(z, zi);
        }
        let si = PointSet::filter(n, |z| prev.contains(z) && g[z] <= threshold);
        debug_assert!(si.contains(zi) && si.is_subset_of(prev));
        let radius = sched.epsilon / (2f64.powi(i as i32) * sched.delta0);
        debug_assert!(si
            .indices()
            .iter()
            .all(|&z| d.eval(z, zi) <= radius + 1e-9));
        iterates.push(Iterate {
            z: zi,
            set: si,
            slack,
            radius,
        });
    }
    let zbar = iterates[i].set.indices()[0];
    Ok((
        zbar,
        Trace {
            kind: TraceKind::BorweinPreiss,
            iterates,
            stabilized_at: Some(i),
        },
    ))
}

/// Runs the Ekeland construction from `z0` (same admissibility hypothesis),
/// with the memoryless sets intersected into their predecessors so the
/// family stays nested.
pub fn ekeland(
    space: &PointSpace,
    d: &Distance,
    f: &ExtendedObjective,
    epsilon: f64,
    z0: usize,
    picker: Picker,
    max_iter: usize,
) -> Result<(usize, Trace)> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::BadParameter("epsilon must be positive".into()));
    }
    let n = space.len();
    if d.len() != n || f.len() != n {
        return Err(Error::BadParameter(
            "space, distance and objective sizes differ".into(),
        ));
    }
    check_start(f, z0, epsilon, n)?;
    let mut rng = match picker {
        Picker::Quasi { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        Picker::Exact => None,
    };

    let fz0 = f.value(z0);
    let s0 = PointSet::filter(n, |z| f.value(z) + epsilon * d.eval(z, z0) <= fz0);
    debug_assert!(s0.contains(z0));
    let mut iterates = vec![Iterate {
        z: z0,
        set: s0,
        slack: epsilon,
        radius: 1.0,
    }];
    let mut i = 0usize;
    while iterates[i].set.len() > 1 {
        i += 1;
        if i > max_iter {
            return Err(Error::IterationLimit(format!(
                "no singleton after {max_iter} iterations"
            )));
        }
        let slack = epsilon / 2f64.powi(i as i32);
        let prev = &iterates[i - 1].set;
        let zi = pick(prev, f.values(), slack, picker, &mut rng);
        let fzi = f.value(zi);
        let si = PointSet::filter(n, |z| {
            prev.contains(z) && f.value(z) + epsilon * d.eval(z, zi) <= fzi
        });
        let radius = 1.0 / 2f64.powi(i as i32);
        debug_assert!(si.contains(zi) && si.is_subset_of(prev));
        debug_assert!(si
            .indices()
            .iter()
            .all(|&z| d.eval(z, zi) <= radius + 1e-9));
        iterates.push(Iterate {
            z: zi,
            set: si,
            slack,
            radius,
        });
    }
    let zbar = iterates[i].set.indices()[0];
    Ok((
        zbar,
        Trace {
            kind: TraceKind::Ekeland,
            iterates,
            stabilized_at: Some(i),
        },
    ))
}

/// Weak form: starts from the lowest-index global minimizer with `ε = 1`,
/// so the perturbed function `f + Σ δ_k d(·, z_k)` has the returned point
/// as its unique minimizer.
pub fn weak_borwein_preiss(
    space: &PointSpace,
    d: &Distance,
    f: &ExtendedObjective,
    delta0: f64,
    gamma: f64,
) -> Result<(usize, Trace)> {
    let sched = PerturbationSchedule {
        epsilon: 1.0,
        delta0,
        tail: ScheduleTail::Geometric { gamma },
    };
    borwein_preiss(space, d, f, &sched, f.argmin(), Picker::Exact, space.len() + 1)
}

/// Weak form: starts from the lowest-index global minimizer, so the
/// perturbed function `f + ε d(·, z̄)` is minimized at the returned point.
pub fn weak_ekeland(
    space: &PointSpace,
    d: &Distance,
    f: &ExtendedObjective,
    epsilon: f64,
) -> Result<(usize, Trace)> {
    ekeland(space, d, f, epsilon, f.argmin(), Picker::Exact, space.len() + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertKind {
    Bp,
    Ekeland,
}

/// One verified conclusion with its numeric margin (how far inside the
/// inequality the data sits; negative means violated).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub label: char,
    pub satisfied: bool,
    pub margin: ExtReal,
}

/// Machine-checkable statement of the conclusions (a), (b), (c) for one
/// run, with margins, the tolerance used, and informational notes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertKind,
    pub zbar: String,
    pub claims: Vec<Claim>,
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Certificate {
    pub fn all_satisfied(&self) -> bool {
        self.claims.iter().all(|c| c.satisfied)
    }

    pub fn claim(&self, label: char) -> Option<&Claim> {
        self.claims.iter().find(|c| c.label == label)
    }
}

/// Full perturbed value `f(w) + Σ_{k=0}^∞ δ_k d(w, z_k)`: explicit prefix
/// over the stored iterates plus the closed-form geometric tail, which is
/// exact because every iterate past stabilization equals `z̄`.
fn bp_perturbed_value(
    f: &ExtendedObjective,
    d: &Distance,
    sched: &PerturbationSchedule,
    zs: &[usize],
    zbar: usize,
    w: usize,
) -> f64 {
    let mut v = f.value(w);
    for (k, &zk) in zs.iter().enumerate() {
        v += sched.delta(k).unwrap_or(0.0) * d.eval(w, zk);
    }
    v + sched.tail_sum(zs.len()) * d.eval(w, zbar)
}

/// Checks a Borwein-Preiss run: replays the set construction from the
/// trace's iterate choices (mismatch is an error), then evaluates
///
/// - (a) `d(z̄, z_i) ≤ ε/(2^i δ_0)` at every index, against the tighter of
///   the recorded and the recomputed radius, so tampered radii fail;
/// - (b) `f(z̄) + Σ δ_k d(z̄, z_k) ≤ f(z_0)`;
/// - (c) `f(z) + Σ δ_k d(z, z_k)` exceeds the value at `z̄` strictly, for
///   every `z ≠ z̄` (margin must clear `tol`).
pub fn verify_bp(
    space: &PointSpace,
    d: &Distance,
    f: &ExtendedObjective,
    sched: &PerturbationSchedule,
    z0: usize,
    zbar: usize,
    trace: &Trace,
    tol: f64,
) -> Result<Certificate> {
    sched.validate()?;
    let n = space.len();
    if zbar >= n || z0 >= n {
        return Err(Error::UnknownPoint("z0 or zbar outside the space".into()));
    }
    if trace.iterates.is_empty() {
        return Err(Error::TraceMismatch("empty trace".into()));
    }
    if trace.kind != TraceKind::BorweinPreiss {
        return Err(Error::TraceMismatch("trace is not a BP trace".into()));
    }
    if trace.iterates[0].z != z0 {
        return Err(Error::TraceMismatch(format!(
            "trace starts at `{}`, inputs say `{}`",
            space.id(trace.iterates[0].z),
            space.id(z0)
        )));
    }
    if trace
        .iterates
        .iter()
        .any(|it| it.z >= n || it.set.indices().iter().any(|&p| p >= n))
    {
        return Err(Error::TraceMismatch("trace references unknown points".into()));
    }

    // Replay the construction with the trace's own iterate choices.
    let mut g: Vec<f64> = f.values().to_vec();
    let threshold0 = g[z0];
    for (z, gz) in g.iter_mut().enumerate() {
        *gz += sched.delta0 * d.eval(z, z0);
    }
    let s0 = PointSet::filter(n, |z| g[z] <= threshold0);
    if s0 != trace.iterates[0].set {
        return Err(Error::TraceMismatch("set 0 does not match its rule".into()));
    }
    for i in 1..trace.iterates.len() {
        let zi = trace.iterates[i].z;
        let prev = &trace.iterates[i - 1].set;
        if !prev.contains(zi) {
            return Err(Error::TraceMismatch(format!(
                "iterate {i} was not chosen from set {}",
                i - 1
            )));
        }
        let delta_i = sched.delta(i).ok_or_else(|| {
            Error::TraceMismatch(format!("schedule provides no δ_{i} for this trace"))
        })?;
        let threshold = g[zi];
        for (z, gz) in g.iter_mut().enumerate() {
            *gz += delta_i * d.eval(z, zi);
        }
        let si = PointSet::filter(n, |z| prev.contains(z) && g[z] <= threshold);
        if si != trace.iterates[i].set {
            return Err(Error::TraceMismatch(format!(
                "set {i} does not match its rule"
            )));
        }
    }

    let zs = trace.centers();

    // (a): radii — never trust a recorded radius looser than the formula.
    let mut margin_a = f64::INFINITY;
    for (i, it) in trace.iterates.iter().enumerate() {
        let formula = sched.epsilon / (2f64.powi(i as i32) * sched.delta0);
        let bound = it.radius.min(formula);
        margin_a = margin_a.min(bound - d.eval(zbar, it.z));
    }

    // (b): the tail past the stored prefix vanishes at z̄.
    let phi_zbar = bp_perturbed_value(f, d, sched, &zs, zbar, zbar);
    let margin_b = ext_sub(f.value(z0), phi_zbar);

    // (c): strict global minimality of the perturbed function at z̄.
    let mut margin_c = f64::INFINITY;
    for z in 0..n {
        if z != zbar {
            let phi = bp_perturbed_value(f, d, sched, &zs, zbar, z);
            margin_c = margin_c.min(ext_sub(phi, phi_zbar));
        }
    }

    let mut notes = Vec::new();
    if sched.is_finite_tail() {
        notes.push(
            "finite delta list: perturbation series truncated at the list end".to_string(),
        );
    }
    Ok(Certificate {
        kind: CertKind::Bp,
        zbar: space.id(zbar).to_string(),
        claims: vec![
            Claim {
                label: 'a',
                satisfied: margin_a >= -tol,
                margin: margin_a.into(),
            },
            Claim {
                label: 'b',
                satisfied: margin_b >= -tol,
                margin: margin_b.into(),
            },
            Claim {
                label: 'c',
                satisfied: margin_c > tol,
                margin: margin_c.into(),
            },
        ],
        tol,
        notes,
    })
}

/// Checks an Ekeland run's conclusions directly from the inputs (no trace
/// is needed):
///
/// - (a) `d(z̄, z_0) ≤ 1`;
/// - (b) `f(z̄) + ε d(z̄, z_0) ≤ f(z_0)`;
/// - (c) `f(z) + ε d(z, z̄) ≥ f(z̄)` for every `z`, non-strict.
pub fn verify_ekeland(
    space: &PointSpace,
    d: &Distance,
    f: &ExtendedObjective,
    epsilon: f64,
    z0: usize,
    zbar: usize,
    tol: f64,
) -> Result<Certificate> {
    let n = space.len();
    if zbar >= n || z0 >= n {
        return Err(Error::UnknownPoint("z0 or zbar outside the space".into()));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::BadParameter("epsilon must be positive".into()));
    }
    let margin_a = 1.0 - d.eval(zbar, z0);
    let margin_b = ext_sub(f.value(z0), f.value(zbar) + epsilon * d.eval(zbar, z0));
    let mut margin_c = f64::INFINITY;
    for z in 0..n {
        let lhs = f.value(z) + epsilon * d.eval(z, zbar);
        margin_c = margin_c.min(ext_sub(lhs, f.value(zbar)));
    }
    Ok(Certificate {
        kind: CertKind::Ekeland,
        zbar: space.id(zbar).to_string(),
        claims: vec![
            Claim {
                label: 'a',
                satisfied: margin_a >= -tol,
                margin: margin_a.into(),
            },
            Claim {
                label: 'b',
                satisfied: margin_b >= -tol,
                margin: margin_b.into(),
            },
            Claim {
                label: 'c',
                satisfied: margin_c >= -tol,
                margin: margin_c.into(),
            },
        ],
        tol,
        notes: vec![
            "enforced set radii are 1, 2^{-i}; the looser ε/2^i bounds hold a fortiori when ε ≥ ... see radius fields".to_string(),
        ],
    })
}

/// Brute-force search for every point satisfying all three Ekeland
/// conclusions for these inputs. Empty output on an instance whose
/// hypothesis holds demonstrates that no selection strategy could have
/// produced a verifiable run.
pub fn ekeland_conclusion_witnesses(
    space: &PointSpace,
    d: &Distance,
    f: &ExtendedObjective,
    epsilon: f64,
    z0: usize,
    tol: f64,
) -> PointSet {
    PointSet::filter(space.len(), |w| {
        if d.eval(w, z0) > 1.0 + tol {
            return false;
        }
        if ext_sub(f.value(z0), f.value(w) + epsilon * d.eval(w, z0)) < -tol {
            return false;
        }
        (0..space.len()).all(|z| {
            ext_sub(f.value(z) + epsilon * d.eval(z, w), f.value(w)) >= -tol
        })
    })
}

/// Harvests a trace into a nested family for the intersection procedure,
/// continuing past stabilization — where every set is `{z̄}` and the radius
/// law keeps halving — until the radius drops below `cutoff` (default:
/// half the least positive distance).
pub fn trace_to_family(trace: &Trace, d: &Distance, cutoff: Option<f64>) -> NestedFamily {
    let mut sets: Vec<PointSet> = trace.iterates.iter().map(|it| it.set.clone()).collect();
    let mut centers = trace.centers();
    let mut radii: Vec<f64> = trace.iterates.iter().map(|it| it.radius).collect();
    let cutoff = cutoff.unwrap_or_else(|| 0.5 * d.min_positive());
    let zbar = *sets
        .last()
        .expect("nonempty trace")
        .indices()
        .first()
        .expect("nonempty set");
    let singleton = PointSet::new(vec![zbar]);
    let mut r = *radii.last().expect("nonempty");
    while r >= cutoff {
        r /= 2.0;
        sets.push(singleton.clone());
        centers.push(zbar);
        radii.push(r);
    }
    NestedFamily {
        sets,
        centers,
        radii,
        containment: ContainmentMode::NonStrict,
    }
}
