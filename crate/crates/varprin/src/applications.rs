//! Applications of the engine: Caristi fixed-point search for set-valued
//! maps, and equilibrium problems for bifunctions with a potential lower
//! estimate. Both come with exhaustive enumeration oracles.

use crate::distance::{pair_components, pair_index, product_distance, Distance};
use crate::engine::{weak_ekeland, Certificate};
use crate::error::{Error, Result};
use crate::ext::ext_sub;
use crate::space::{ExtendedObjective, PointSet, PointSpace};

/// Set-valued map `T : X ⊸ X`, stored as per-point target sets. The graph
/// is the set of ordered pairs `(x, y)` with `y ∈ T(x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetValuedMap {
    targets: Vec<Vec<usize>>,
}

impl SetValuedMap {
    /// Builds the map from graph pairs; target sets may be empty.
    pub fn from_graph(space: &PointSpace, graph: &[(usize, usize)]) -> Result<Self> {
        let n = space.len();
        let mut targets = vec![Vec::new(); n];
        for &(x, y) in graph {
            if x >= n || y >= n {
                return Err(Error::UnknownPoint(format!("graph pair ({x}, {y})")));
            }
            targets[x].push(y);
        }
        for t in &mut targets {
            t.sort_unstable();
            t.dedup();
        }
        Ok(Self { targets })
    }

    pub fn targets(&self, x: usize) -> &[usize] {
        &self.targets[x]
    }

    pub fn graph(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.targets
            .iter()
            .enumerate()
            .flat_map(|(x, ys)| ys.iter().map(move |&y| (x, y)))
    }

    pub fn graph_len(&self) -> usize {
        self.targets.iter().map(Vec::len).sum()
    }
}

/// Potential `φ : X → R ∪ {+∞}` — same shape and invariants as an
/// objective.
pub type PotentialFn = ExtendedObjective;

/// A pair violating the descent condition, with its margin
/// `φ(x) − d(x,y) − φ(y)` (negative when violated).
#[derive(Debug, Clone, PartialEq)]
pub struct DescentViolation {
    pub x: usize,
    pub y: usize,
    pub margin: f64,
}

/// Checks the Caristi descent hypothesis `φ(y) ≤ φ(x) − d(x,y)` on every
/// graph pair (pairs off the graph are vacuous: the indicator pushes the
/// right side to +∞).
pub fn check_caristi_hypothesis(
    d: &Distance,
    phi: &PotentialFn,
    map: &SetValuedMap,
    tol: f64,
) -> (bool, Vec<DescentViolation>) {
    let mut witnesses = Vec::new();
    for (x, y) in map.graph() {
        let margin = ext_sub(phi.value(x) - d.eval(x, y), phi.value(y));
        if margin < -tol {
            witnesses.push(DescentViolation { x, y, margin });
        }
    }
    (witnesses.is_empty(), witnesses)
}

/// Exhaustive enumeration of `fix(T) = {x | x ∈ T(x)}` and
/// `Endpoints(T) = {x | T(x) = {x}}`.
pub fn brute_fixed_points(space: &PointSpace, map: &SetValuedMap) -> (PointSet, PointSet) {
    let fixed = PointSet::filter(space.len(), |x| map.targets(x).contains(&x));
    let endpoints = PointSet::filter(space.len(), |x| map.targets(x) == [x]);
    (fixed, endpoints)
}

/// Everything the Caristi run produced, conclusions re-checked numerically.
#[derive(Debug, Clone)]
pub struct CaristiOutcome {
    /// The fixed point `ȳ` (with `ȳ ∈ T(ȳ)`).
    pub point: usize,
    /// Whether `T(ȳ) = {ȳ}` exactly.
    pub endpoint_ok: bool,
    /// The minimizing pair `(x̄, ȳ)` on the square space.
    pub pair: (usize, usize),
    /// Margin of the pair-space minimality inequality
    /// `f(x̄,ȳ) ≤ f(x,y) + ε ρ((x,y),(x̄,ȳ))` over all graph pairs.
    pub evp_min_margin: f64,
    /// Margins of the rearranged forcing inequality
    /// `0 ≤ φ(x̄) − φ(ȳ) − d(x̄,ȳ) ≤ −(1−2ε) d(ȳ,z̄)` per `z̄ ∈ T(ȳ)`:
    /// `(lower, upper)` with both nonnegative when the forcing argument
    /// closes.
    pub forcing_margins: Vec<(f64, f64)>,
    /// Certificate of the underlying weak-form run on the square space.
    pub pair_certificate: Certificate,
}

/// Locates a fixed point of `T` from a potential `φ` satisfying the
/// descent hypothesis, by minimizing
/// `f(x,y) = φ(x) − (1−ε) d(x,y) + ι_{gr T}(x,y)` on the square space
/// under the swapped-order pair distance.
///
/// Requires `ε ∈ (0, 1/2)`, a valid hypothesis, and a nonempty target set
/// at every point — the extraction step follows an arrow out of `ȳ`, so an
/// empty `T(ȳ)` would strand it (and the fixed-point conclusion can
/// genuinely fail for maps with empty values).
pub fn caristi_fixed_point(
    space: &PointSpace,
    d: &Distance,
    phi: &PotentialFn,
    map: &SetValuedMap,
    eps: f64,
    tol: f64,
) -> Result<CaristiOutcome> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::BadParameter(format!(
            "caristi epsilon must lie in the open interval (0, 1/2), got {eps}"
        )));
    }
    if map.graph_len() == 0 {
        return Err(Error::EmptyGraph);
    }
    if let Some(x) = (0..space.len()).find(|&x| map.targets(x).is_empty()) {
        return Err(Error::HypothesisViolation(format!(
            "T(`{}`) is empty; the map must have nonempty values",
            space.id(x)
        )));
    }
    let (ok, witnesses) = check_caristi_hypothesis(d, phi, map, tol);
    if !ok {
        let w = &witnesses[0];
        return Err(Error::HypothesisViolation(format!(
            "descent condition fails at ({}, {}): margin {}",
            space.id(w.x),
            space.id(w.y),
            w.margin
        )));
    }

    let n = space.len();
    let (pair_space, rho) = product_distance(d, space)?;
    // f(x,y) = φ(x) − (1−ε) d(x,y) on the graph, +∞ off it.
    let mut values = vec![f64::INFINITY; n * n];
    for (x, y) in map.graph() {
        values[pair_index(n, x, y)] = phi.value(x) - (1.0 - eps) * d.eval(x, y);
    }
    let objective = ExtendedObjective::new(values)?;
    let (pair_min, _trace) = weak_ekeland(&pair_space, &rho, &objective, eps)?;
    let (xbar, ybar) = pair_components(n, pair_min);

    let pair_certificate = crate::engine::verify_ekeland(
        &pair_space,
        &rho,
        &objective,
        eps,
        objective.argmin(),
        pair_min,
        tol,
    )?;

    // Minimality of the located pair against every graph pair.
    let f_min = objective.value(pair_min);
    let mut evp_min_margin = f64::INFINITY;
    for (x, y) in map.graph() {
        let p = pair_index(n, x, y);
        let lhs = objective.value(p) + eps * rho.eval(p, pair_min);
        evp_min_margin = evp_min_margin.min(ext_sub(lhs, f_min));
    }

    // Forcing argument: each successor of ȳ is pinned onto ȳ.
    let a = phi.value(xbar) - phi.value(ybar) - d.eval(xbar, ybar);
    let mut forcing_margins = Vec::new();
    for &z in map.targets(ybar) {
        let upper = -(1.0 - 2.0 * eps) * d.eval(ybar, z);
        forcing_margins.push((a, upper - a));
    }

    let endpoint_ok = map.targets(ybar) == [ybar];
    Ok(CaristiOutcome {
        point: ybar,
        endpoint_ok,
        pair: (xbar, ybar),
        evp_min_margin,
        forcing_margins,
        pair_certificate,
    })
}

/// Bifunction `F : X × X → R`, dense row-major over the space order.
#[derive(Debug, Clone, PartialEq)]
pub struct Bifunction {
    n: usize,
    values: Vec<f64>,
}

impl Bifunction {
    pub fn new(space: &PointSpace, rows: &[Vec<f64>]) -> Result<Self> {
        let n = space.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Validation(format!(
                "bifunction matrix must be {n}×{n}"
            )));
        }
        let mut values = Vec::with_capacity(n * n);
        for row in rows {
            for &v in row {
                if !v.is_finite() {
                    return Err(Error::Validation(
                        "bifunction values must be finite".into(),
                    ));
                }
                values.push(v);
            }
        }
        Ok(Self { n, values })
    }

    pub fn value(&self, x: usize, y: usize) -> f64 {
        self.values[x * self.n + y]
    }
}

/// Exhaustive `EP(F, X) = { x | F(x,y) ≥ 0 for all y }`.
pub fn brute_equilibria(space: &PointSpace, f: &Bifunction) -> PointSet {
    let n = space.len();
    PointSet::filter(n, |x| (0..n).all(|y| f.value(x, y) >= 0.0))
}

/// Result of the staged equilibrium search.
#[derive(Debug, Clone)]
pub struct EquilibriumOutcome {
    pub xbar: usize,
    /// `min_y F(x_i, y)` per stage, in schedule order.
    pub residuals: Vec<f64>,
    /// Stage iterates `x_i` (one per executed stage).
    pub stage_points: Vec<usize>,
    /// Margins of the stage inequality
    /// `min_y [F(x_i,y) + ε_i d(y,x_i)] ≥ 0` per executed stage.
    pub stage_margins: Vec<f64>,
}

/// Solves `EP(F, X)` through the weak-form runs on a potential `φ` whose
/// lower estimate `F(x,y) ≥ φ(y) − φ(x)` is validated by full scan first.
/// Each stage locates `x_i` with `φ(y) + ε_i d(y, x_i) ≥ φ(x_i)` for all
/// `y`; the returned point is the most frequent stage iterate (lowest
/// index on ties), which on a finite space stands in for the convergent
/// subsequence a compactness argument would extract.
pub fn equilibrium_solve(
    space: &PointSpace,
    d: &Distance,
    f: &Bifunction,
    phi: &PotentialFn,
    eps_schedule: &[f64],
    tol: f64,
) -> Result<EquilibriumOutcome> {
    let n = space.len();
    if eps_schedule.is_empty() {
        return Err(Error::BadParameter(
            "epsilon schedule must be nonempty".into(),
        ));
    }
    if eps_schedule.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::BadParameter(
            "epsilon schedule entries must be positive".into(),
        ));
    }
    if eps_schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::BadParameter(
            "epsilon schedule must be strictly decreasing".into(),
        ));
    }
    for x in 0..n {
        for y in 0..n {
            let estimate = ext_sub(f.value(x, y), phi.value(y) - phi.value(x));
            if estimate < -tol {
                return Err(Error::EstimateViolation(format!(
                    "F({x_id}, {y_id}) = {} < φ({y_id}) − φ({x_id}) = {}",
                    f.value(x, y),
                    phi.value(y) - phi.value(x),
                    x_id = space.id(x),
                    y_id = space.id(y),
                )));
            }
        }
    }

    let mut stage_points = Vec::new();
    let mut residuals = Vec::new();
    let mut stage_margins = Vec::new();
    for &eps_i in eps_schedule {
        let (x_i, _) = weak_ekeland(space, d, phi, eps_i)?;
        stage_points.push(x_i);
        let residual = (0..n)
            .map(|y| f.value(x_i, y))
            .fold(f64::INFINITY, f64::min);
        residuals.push(residual);
        let stage_margin = (0..n)
            .map(|y| f.value(x_i, y) + eps_i * d.eval(y, x_i))
            .fold(f64::INFINITY, f64::min);
        stage_margins.push(stage_margin);
        if residual >= -tol {
            break;
        }
    }

    // Pigeonhole surrogate for subsequence extraction.
    let mut best = stage_points[0];
    let mut best_count = 0usize;
    for &candidate in &stage_points {
        let count = stage_points.iter().filter(|&&p| p == candidate).count();
        if count > best_count || (count == best_count && candidate < best) {
            best = candidate;
            best_count = count;
        }
    }
    let xbar = best;
    let final_residual = (0..n)
        .map(|y| f.value(xbar, y))
        .fold(f64::INFINITY, f64::min);
    if final_residual < -tol {
        // Unreachable when the estimate holds: the weak-form run starts at
        // the argmin of φ, where F(x̄, y) ≥ φ(y) − φ(x̄) ≥ 0.
        return Err(Error::NoConvergence(format!(
            "residual {final_residual} after {} stages",
            residuals.len()
        )));
    }
    Ok(EquilibriumOutcome {
        xbar,
        residuals,
        stage_points,
        stage_margins,
    })
}
