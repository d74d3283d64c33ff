//! Generalized distance functions: non-negative, zero exactly on the
//! diagonal, and otherwise unconstrained — no symmetry, no triangle
//! inequality.
//!
//! A [`DistanceSpec`] is the serializable description (family plus
//! parameters); binding it to a [`PointSpace`] validates the identity axiom
//! `d(x,y) = 0 ⟺ x = y` and produces a [`Distance`] that evaluates by
//! index pair. Coordinate families compile to a dense table at bind time;
//! the pair-space distance stays lazy because its square space can be large.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{PointSet, PointSpace};

/// Serializable description of a distance function.
///
/// Families:
/// - `table`: explicit `|X|²` row-major matrix, zero diagonal, strictly
///   positive off-diagonal;
/// - `euclidean`: `√Σ(xᵢ-yᵢ)²` (a metric, kept as the control family);
/// - `lp_frac`: `(Σ|xᵢ-yᵢ|^p)^{1/p}` with `p ∈ (0,1)` — the classical
///   non-triangular quasinorm distance;
/// - `kl`: `Σ xᵢ ln(xᵢ/yᵢ)` on strictly positive probability vectors;
/// - `itakura_saito`: `Σ (xᵢ/yᵢ − ln(xᵢ/yᵢ) − 1)` on strictly positive
///   vectors;
/// - `sq_euclidean`: `Σ(xᵢ-yᵢ)²` (symmetric but non-triangular);
/// - `symmetrized`: `w_r·d(x,y) + w_l·d(y,x)` over an inner spec;
/// - `product`: the pair-space distance `ρ((x,y),(x',y')) = d(x',x) + d(y',y)`
///   over an inner spec (note the swapped argument order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum DistanceSpec {
    Table { matrix: Vec<Vec<f64>> },
    Euclidean {},
    LpFrac { p: f64 },
    Kl {},
    ItakuraSaito {},
    SqEuclidean {},
    Symmetrized {
        w_right: f64,
        w_left: f64,
        inner: Box<DistanceSpec>,
    },
    Product { inner: Box<DistanceSpec> },
}

impl DistanceSpec {
    pub fn family_name(&self) -> &'static str {
        match self {
            DistanceSpec::Table { .. } => "table",
            DistanceSpec::Euclidean {} => "euclidean",
            DistanceSpec::LpFrac { .. } => "lp_frac",
            DistanceSpec::Kl {} => "kl",
            DistanceSpec::ItakuraSaito {} => "itakura_saito",
            DistanceSpec::SqEuclidean {} => "sq_euclidean",
            DistanceSpec::Symmetrized { .. } => "symmetrized",
            DistanceSpec::Product { .. } => "product",
        }
    }
}

/// KL probability vectors must sum to 1 within this tolerance.
pub const KL_NORMALIZATION_TOL: f64 = 1e-9;

/// Full identity-axiom scans are refused above this many ordered pairs.
const BIND_SCAN_CAP: usize = 100_000_000;

#[derive(Debug, Clone)]
enum Kernel {
    /// Dense row-major matrix, `n × n`.
    Table(Vec<f64>),
    /// Pair-space distance over a base of size `base_n`; pair index
    /// `i = a·base_n + b` encodes the ordered pair `(a, b)`.
    Product { base: Box<Distance>, base_n: usize },
    /// Lazy weighted symmetrization (used when materializing is too big).
    Symmetrized {
        base: Box<Distance>,
        w_right: f64,
        w_left: f64,
    },
}

/// A distance function bound to a space of `n` points, validated at
/// construction: `eval(i,i) == 0` exactly and `eval(i,j) > 0` for `i ≠ j`.
#[derive(Debug, Clone)]
pub struct Distance {
    n: usize,
    kernel: Kernel,
    spec: DistanceSpec,
}

fn sym_eval(w_right: f64, w_left: f64, d_xy: f64, d_yx: f64) -> f64 {
    // Equal weights use one multiplication so the result is bitwise
    // symmetric in (x, y).
    if w_right == w_left {
        w_right * (d_xy + d_yx)
    } else {
        w_right * d_xy + w_left * d_yx
    }
}

impl Distance {
    /// Binds `spec` to `space`, validating parameters, coordinate domains
    /// and the identity axiom (full scan for table-backed kernels).
    pub fn build(spec: DistanceSpec, space: &PointSpace) -> Result<Self> {
        let n = space.len();
        match &spec {
            DistanceSpec::Table { matrix } => {
                if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
                    return Err(Error::BadParameter(format!(
                        "table must be {n}×{n} to match the space"
                    )));
                }
                let mut flat = Vec::with_capacity(n * n);
                for (i, row) in matrix.iter().enumerate() {
                    for (j, &v) in row.iter().enumerate() {
                        if !v.is_finite() || v < 0.0 {
                            return Err(Error::BadParameter(format!(
                                "table entry ({}, {}) must be a finite nonnegative real",
                                space.id(i),
                                space.id(j)
                            )));
                        }
                        flat.push(v);
                    }
                }
                let d = Self {
                    n,
                    kernel: Kernel::Table(flat),
                    spec,
                };
                d.validate_identity(space)?;
                Ok(d)
            }
            DistanceSpec::Euclidean {}
            | DistanceSpec::LpFrac { .. }
            | DistanceSpec::Kl {}
            | DistanceSpec::ItakuraSaito {}
            | DistanceSpec::SqEuclidean {} => {
                if let DistanceSpec::LpFrac { p } = &spec {
                    if !(*p > 0.0 && *p < 1.0) {
                        return Err(Error::BadParameter(format!(
                            "lp_frac exponent p must lie in (0, 1), got {p}"
                        )));
                    }
                }
                if !space.has_coords() {
                    return Err(Error::DomainViolation(format!(
                        "family `{}` requires point coordinates",
                        spec.family_name()
                    )));
                }
                validate_coord_domain(&spec, space)?;
                let mut flat = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        let v = coord_eval(&spec, space.coord(i)?, space.coord(j)?);
                        if !v.is_finite() {
                            return Err(Error::DomainViolation(format!(
                                "`{}` evaluates to a non-finite value at ({}, {})",
                                spec.family_name(),
                                space.id(i),
                                space.id(j)
                            )));
                        }
                        flat.push(v);
                    }
                }
                let d = Self {
                    n,
                    kernel: Kernel::Table(flat),
                    spec,
                };
                d.validate_identity(space)?;
                Ok(d)
            }
            DistanceSpec::Symmetrized {
                w_right,
                w_left,
                inner,
            } => {
                let inner_d = Self::build((**inner).clone(), space)?;
                inner_d.symmetrize(*w_right, *w_left)
            }
            DistanceSpec::Product { inner } => {
                // A product spec describes a distance on the square space;
                // bind the base here and derive the pair space alongside.
                let _ = inner;
                Err(Error::BadParameter(
                    "product distances are built with product_distance(), not bound to the base space"
                        .into(),
                ))
            }
        }
    }

    /// Weighted symmetrization `w_r·d(x,y) + w_l·d(y,x)`.
    ///
    /// Both weights must be nonnegative and not both zero; the identity
    /// axiom is preserved. With equal weights the result is exactly
    /// symmetric (one shared multiplication per unordered pair).
    pub fn symmetrize(&self, w_right: f64, w_left: f64) -> Result<Self> {
        if !(w_right >= 0.0 && w_left >= 0.0) {
            return Err(Error::BadParameter(
                "symmetrization weights must be nonnegative".into(),
            ));
        }
        if w_right + w_left <= 0.0 {
            return Err(Error::BadParameter(
                "symmetrization weights must not both be zero".into(),
            ));
        }
        let spec = DistanceSpec::Symmetrized {
            w_right,
            w_left,
            inner: Box::new(self.spec.clone()),
        };
        let kernel = match &self.kernel {
            Kernel::Table(m) => {
                let n = self.n;
                let mut flat = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        flat.push(sym_eval(w_right, w_left, m[i * n + j], m[j * n + i]));
                    }
                }
                Kernel::Table(flat)
            }
            _ => Kernel::Symmetrized {
                base: Box::new(self.clone()),
                w_right,
                w_left,
            },
        };
        Ok(Self {
            n: self.n,
            kernel,
            spec,
        })
    }

    /// Number of points of the bound space.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spec(&self) -> &DistanceSpec {
        &self.spec
    }

    /// `d(i, j)` by index. Panics if out of bounds.
    pub fn eval(&self, i: usize, j: usize) -> f64 {
        match &self.kernel {
            Kernel::Table(m) => m[i * self.n + j],
            Kernel::Product { base, base_n } => {
                let (a, b) = (i / base_n, i % base_n);
                let (c, d) = (j / base_n, j % base_n);
                // ρ((a,b),(c,d)) = d(c,a) + d(d,b): second pair's
                // components land in the first slot.
                base.eval(c, a) + base.eval(d, b)
            }
            Kernel::Symmetrized {
                base,
                w_right,
                w_left,
            } => sym_eval(*w_right, *w_left, base.eval(i, j), base.eval(j, i)),
        }
    }

    /// `d(x, y)` by identifier.
    pub fn eval_ids(&self, space: &PointSpace, x: &str, y: &str) -> Result<f64> {
        if space.len() != self.n {
            return Err(Error::BadParameter(
                "space does not match the bound distance".into(),
            ));
        }
        Ok(self.eval(space.idx(x)?, space.idx(y)?))
    }

    /// Least positive value `d(i,j)` over `i ≠ j`.
    pub fn min_positive(&self) -> f64 {
        match &self.kernel {
            // One equal slot plus a minimal jump in the other realizes the
            // pair-space minimum, so it equals the base minimum.
            Kernel::Product { base, .. } => base.min_positive(),
            _ => {
                let mut m = f64::INFINITY;
                for i in 0..self.n {
                    for j in 0..self.n {
                        if i != j {
                            m = m.min(self.eval(i, j));
                        }
                    }
                }
                m
            }
        }
    }

    fn validate_identity(&self, space: &PointSpace) -> Result<()> {
        if self.n * self.n > BIND_SCAN_CAP {
            return Err(Error::BudgetExceeded(
                "space too large for the identity-axiom scan".into(),
            ));
        }
        for i in 0..self.n {
            if self.eval(i, i) != 0.0 {
                return Err(Error::AxiomViolation(format!(
                    "d({id}, {id}) = {} must be exactly zero",
                    self.eval(i, i),
                    id = space.id(i)
                )));
            }
            for j in 0..self.n {
                if i != j && self.eval(i, j) <= 0.0 {
                    return Err(Error::AxiomViolation(format!(
                        "d({}, {}) = {} must be strictly positive",
                        space.id(i),
                        space.id(j),
                        self.eval(i, j)
                    )));
                }
            }
        }
        Ok(())
    }
}

fn validate_coord_domain(spec: &DistanceSpec, space: &PointSpace) -> Result<()> {
    match spec {
        DistanceSpec::Kl {} | DistanceSpec::ItakuraSaito {} => {
            for i in 0..space.len() {
                let v = space.coord(i)?;
                if v.iter().any(|&x| x <= 0.0) {
                    return Err(Error::DomainViolation(format!(
                        "`{}` requires strictly positive coordinates; `{}` violates this",
                        spec.family_name(),
                        space.id(i)
                    )));
                }
                if matches!(spec, DistanceSpec::Kl {}) {
                    let s: f64 = v.iter().sum();
                    if (s - 1.0).abs() > KL_NORMALIZATION_TOL {
                        return Err(Error::DomainViolation(format!(
                            "kl requires probability vectors; `{}` sums to {s}",
                            space.id(i)
                        )));
                    }
                }
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

fn coord_eval(spec: &DistanceSpec, x: &[f64], y: &[f64]) -> f64 {
    match spec {
        DistanceSpec::Euclidean {} => x
            .iter()
            .zip(y)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt(),
        DistanceSpec::SqEuclidean {} => {
            x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
        }
        DistanceSpec::LpFrac { p } => {
            let s: f64 = x.iter().zip(y).map(|(a, b)| (a - b).abs().powf(*p)).sum();
            s.powf(1.0 / p)
        }
        DistanceSpec::Kl {} => x.iter().zip(y).map(|(a, b)| a * (a / b).ln()).sum(),
        DistanceSpec::ItakuraSaito {} => x
            .iter()
            .zip(y)
            .map(|(a, b)| {
                let r = a / b;
                r - r.ln() - 1.0
            })
            .sum(),
        _ => unreachable!("coord_eval only serves coordinate families"),
    }
}

/// The square space of ordered pairs together with the swapped-order pair
/// distance `ρ((x,y),(x',y')) = d(x',x) + d(y',y)`.
///
/// Pair identifiers are `(x,y)` built from the base identifiers; the pair
/// at base indices `(a, b)` sits at index `a·|X| + b`.
pub fn product_distance(base: &Distance, space: &PointSpace) -> Result<(PointSpace, Distance)> {
    if space.len() != base.len() {
        return Err(Error::BadParameter(
            "space does not match the bound distance".into(),
        ));
    }
    let n = space.len();
    let mut ids = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            ids.push(format!("({},{})", space.id(a), space.id(b)));
        }
    }
    let pair_space = PointSpace::new(ids)?;
    let spec = DistanceSpec::Product {
        inner: Box::new(base.spec().clone()),
    };
    // Identity holds analytically: both components vanish exactly on the
    // diagonal of the validated base, and some component is positive off it.
    Ok((
        pair_space,
        Distance {
            n: n * n,
            kernel: Kernel::Product {
                base: Box::new(base.clone()),
                base_n: n,
            },
            spec,
        },
    ))
}

/// Pair index of `(a, b)` in the space produced by [`product_distance`].
pub fn pair_index(base_n: usize, a: usize, b: usize) -> usize {
    a * base_n + b
}

/// Inverse of [`pair_index`].
pub fn pair_components(base_n: usize, pair: usize) -> (usize, usize) {
    (pair / base_n, pair % base_n)
}

/// How an axiom scan covered the space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ScanMode {
    /// Every pair and every ordered triple.
    Full,
    /// `budget` pairs and `budget` triples sampled uniformly under `seed`.
    Sampled { budget: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryWitness {
    pub x: String,
    pub y: String,
    pub d_xy: f64,
    pub d_yx: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleWitness {
    pub x: String,
    pub y: String,
    pub z: String,
    pub d_xz: f64,
    /// `d(x,y) + d(y,z)`, the path the triangle inequality would bound by.
    pub via_y: f64,
}

/// Outcome of an axiom audit: identity verdict plus every symmetry and
/// triangle violation found (exhaustive under [`ScanMode::Full`],
/// best-effort under sampling).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub identity_ok: bool,
    pub mode: ScanMode,
    pub tol: f64,
    pub symmetry_witnesses: Vec<SymmetryWitness>,
    pub triangle_witnesses: Vec<TriangleWitness>,
}

/// Full-scan triple count above which [`ScanMode::Full`] is refused.
const FULL_SCAN_CAP: usize = 100_000_000;

/// Audits symmetry and the triangle inequality, which a distance function
/// is *not* required to satisfy; the report documents how far this one
/// strays. A symmetry witness is recorded when `|d(x,y) − d(y,x)| > tol`,
/// a triangle witness when `d(x,z) > d(x,y) + d(y,z) + tol`.
pub fn axiom_report(
    d: &Distance,
    space: &PointSpace,
    tol: f64,
    mode: ScanMode,
) -> Result<AxiomReport> {
    if space.len() != d.len() {
        return Err(Error::BadParameter(
            "space does not match the bound distance".into(),
        ));
    }
    let n = d.len();
    // The diagonal is O(n); scan it fully in either mode.
    let mut identity_ok = (0..n).all(|i| d.eval(i, i).abs() <= tol);
    let mut sym = Vec::new();
    let mut tri = Vec::new();

    fn pair_witness(
        d: &Distance,
        space: &PointSpace,
        tol: f64,
        i: usize,
        j: usize,
    ) -> Option<SymmetryWitness> {
        let (a, b) = (d.eval(i, j), d.eval(j, i));
        ((a - b).abs() > tol).then(|| SymmetryWitness {
            x: space.id(i).to_string(),
            y: space.id(j).to_string(),
            d_xy: a,
            d_yx: b,
        })
    }
    fn triple_witness(
        d: &Distance,
        space: &PointSpace,
        tol: f64,
        x: usize,
        y: usize,
        z: usize,
    ) -> Option<TriangleWitness> {
        let direct = d.eval(x, z);
        let via = d.eval(x, y) + d.eval(y, z);
        (direct > via + tol).then(|| TriangleWitness {
            x: space.id(x).to_string(),
            y: space.id(y).to_string(),
            z: space.id(z).to_string(),
            d_xz: direct,
            via_y: via,
        })
    }

    match mode {
        ScanMode::Full => {
            if n.saturating_mul(n).saturating_mul(n) > FULL_SCAN_CAP {
                return Err(Error::BudgetExceeded(format!(
                    "full scan needs {} triples; supply a sampling budget",
                    n.saturating_mul(n).saturating_mul(n)
                )));
            }
            for i in 0..n {
                for j in (i + 1)..n {
                    if d.eval(i, j).abs() <= tol || d.eval(j, i).abs() <= tol {
                        identity_ok = false;
                    }
                    sym.extend(pair_witness(d, space, tol, i, j));
                }
            }
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        tri.extend(triple_witness(d, space, tol, x, y, z));
                    }
                }
            }
        }
        ScanMode::Sampled { budget, seed } => {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..budget {
                let i = rng.gen_range(0..n);
                let j = rng.gen_range(0..n);
                if i != j {
                    if d.eval(i, j).abs() <= tol {
                        identity_ok = false;
                    }
                    sym.extend(pair_witness(d, space, tol, i, j));
                }
            }
            for _ in 0..budget {
                let x = rng.gen_range(0..n);
                let y = rng.gen_range(0..n);
                let z = rng.gen_range(0..n);
                tri.extend(triple_witness(d, space, tol, x, y, z));
            }
            sym.sort_by(|a, b| (&a.x, &a.y).cmp(&(&b.x, &b.y)));
            sym.dedup();
            tri.sort_by(|a, b| (&a.x, &a.y, &a.z).cmp(&(&b.x, &b.y, &b.z)));
            tri.dedup();
        }
    }
    Ok(AxiomReport {
        identity_ok,
        mode,
        tol,
        symmetry_witnesses: sym,
        triangle_witnesses: tri,
    })
}

/// Membership test of the right ball `B(x, r) = { y | d(y, x) < r }`.
///
/// Note the argument order: the candidate `y` sits in the first slot.
pub fn right_ball(space: &PointSpace, d: &Distance, x: usize, r: f64) -> Result<PointSet> {
    if x >= space.len() || space.len() != d.len() {
        return Err(Error::UnknownPoint(format!("index {x}")));
    }
    if !(r > 0.0) {
        return Err(Error::BadParameter("ball radius must be positive".into()));
    }
    Ok(PointSet::filter(space.len(), |y| d.eval(y, x) < r))
}
