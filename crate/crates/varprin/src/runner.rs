//! Command orchestration: runs a problem through an engine, verifies the
//! outcome, and assembles the machine-readable run report the CLI prints
//! and stores.
//!
//! Verdicts: `verified` (exit 0) when every check clears its tolerance;
//! `hypothesis-violation` (exit 1) when the inputs fail a theorem's
//! premise; `verification-failure` (exit 2) when a produced result does
//! not check out — for `ekeland` the report then says whether *any* point
//! could have satisfied the conclusions on this instance.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::applications::{
    brute_equilibria, brute_fixed_points, caristi_fixed_point, check_caristi_hypothesis,
    equilibrium_solve,
};
use crate::distance::{axiom_report, AxiomReport, ScanMode};
use crate::engine::{
    borwein_preiss, ekeland, ekeland_conclusion_witnesses, verify_bp, verify_ekeland, Certificate,
    Iterate, Picker, Trace, TraceKind,
};
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::problem::{input_digest, BoundProblem};
use crate::space::{PointSet, PointSpace};

/// Everything about a run that is not the problem file itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFlags {
    pub tol: f64,
    pub picker: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    /// Raw `--schedule "eps,delta0,gamma"` override, recorded so rechecks
    /// reproduce the effective inputs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule_override: Option<String>,
}

impl Default for RunFlags {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            picker: "exact".into(),
            seed: 0,
            max_iter: None,
            schedule_override: None,
        }
    }
}

impl RunFlags {
    pub fn picker(&self) -> Result<Picker> {
        match self.picker.as_str() {
            "exact" => Ok(Picker::Exact),
            "quasi" => Ok(Picker::Quasi { seed: self.seed }),
            other => Err(Error::BadParameter(format!("unknown picker `{other}`"))),
        }
    }

    fn max_iter(&self, n: usize) -> usize {
        self.max_iter.unwrap_or(10 * n)
    }

    fn digest_extra(&self, command: &str) -> String {
        format!(
            "{command}|tol={}|picker={}|seed={}|max_iter={:?}|schedule={:?}",
            self.tol, self.picker, self.seed, self.max_iter, self.schedule_override
        )
    }

    /// Parses the `--schedule "eps,delta0,gamma"` override, if present.
    pub fn schedule_section(&self) -> Result<Option<crate::problem::ScheduleSection>> {
        let Some(raw) = &self.schedule_override else {
            return Ok(None);
        };
        let parts: Vec<&str> = raw.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::BadParameter(format!(
                "--schedule expects `eps,delta0,gamma`, got `{raw}`"
            )));
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::BadParameter(format!("--schedule: {e}")))
            })
            .collect::<Result<_>>()?;
        Ok(Some(crate::problem::ScheduleSection {
            epsilon: nums[0],
            delta0: nums[1],
            gamma: Some(nums[2]),
            deltas: None,
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunVerdict {
    Verified,
    HypothesisViolation,
    VerificationFailure,
}

impl RunVerdict {
    pub fn exit_code(self) -> i32 {
        match self {
            RunVerdict::Verified => 0,
            RunVerdict::HypothesisViolation => 1,
            RunVerdict::VerificationFailure => 2,
        }
    }
}

/// Serializable image of a trace, point identifiers instead of indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceDto {
    pub kind: String,
    pub iterates: Vec<IterateDto>,
    pub stabilized_at: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateDto {
    pub z: String,
    pub set: Vec<String>,
    pub slack: f64,
    pub radius: f64,
}

impl TraceDto {
    pub fn from_trace(trace: &Trace, space: &PointSpace) -> Self {
        Self {
            kind: match trace.kind {
                TraceKind::BorweinPreiss => "borwein_preiss".into(),
                TraceKind::Ekeland => "ekeland".into(),
            },
            iterates: trace
                .iterates
                .iter()
                .map(|it| IterateDto {
                    z: space.id(it.z).to_string(),
                    set: it.set.ids(space).iter().map(|s| s.to_string()).collect(),
                    slack: it.slack,
                    radius: it.radius,
                })
                .collect(),
            stabilized_at: trace.stabilized_at,
        }
    }

    pub fn to_trace(&self, space: &PointSpace) -> Result<Trace> {
        let kind = match self.kind.as_str() {
            "borwein_preiss" => TraceKind::BorweinPreiss,
            "ekeland" => TraceKind::Ekeland,
            other => return Err(Error::TraceMismatch(format!("unknown trace kind `{other}`"))),
        };
        let iterates = self
            .iterates
            .iter()
            .map(|it| {
                Ok(Iterate {
                    z: space.idx(&it.z)?,
                    set: it
                        .set
                        .iter()
                        .map(|id| space.idx(id))
                        .collect::<Result<Vec<_>>>()
                        .map(PointSet::new)?,
                    slack: it.slack,
                    radius: it.radius,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Trace {
            kind,
            iterates,
            stabilized_at: self.stabilized_at,
        })
    }
}

/// Caristi outcome plus its oracle checks, in identifier form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaristiDto {
    pub point: String,
    pub endpoint_ok: bool,
    pub pair: [String; 2],
    pub evp_min_margin: ExtReal,
    pub forcing_margins: Vec<(f64, f64)>,
    pub fixed: Vec<String>,
    pub endpoints: Vec<String>,
    pub point_in_fixed: bool,
    pub fix_equals_endpoints: bool,
    pub pair_certificate: Certificate,
}

/// Equilibrium outcome plus its oracle checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumDto {
    pub xbar: String,
    pub residuals: Vec<f64>,
    pub stage_points: Vec<String>,
    pub stage_margins: Vec<f64>,
    pub min_residual: f64,
    pub brute_set: Vec<String>,
    pub in_brute_set: bool,
}

/// Extra analysis attached to a failed `ekeland` verification: the set of
/// points (possibly empty) that satisfy all three conclusions for these
/// inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EkelandAnalysis {
    pub conclusion_witnesses: Vec<String>,
    pub witness_exists: bool,
}

/// The report a command run produces: digest, verdict, certificate and
/// trace where applicable, and the human summary line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub digest: String,
    pub flags: RunFlags,
    pub verdict: RunVerdict,
    pub summary: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axioms: Option<AxiomReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caristi: Option<CaristiDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equilibrium: Option<EquilibriumDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ekeland_analysis: Option<EkelandAnalysis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Informational only; excluded from determinism guarantees.
    pub wall_time_ms: f64,
}

fn blank_report(command: &str, digest: String, flags: RunFlags) -> RunReport {
    RunReport {
        command: command.to_string(),
        digest,
        flags,
        verdict: RunVerdict::Verified,
        summary: String::new(),
        certificate: None,
        trace: None,
        axioms: None,
        caristi: None,
        equilibrium: None,
        ekeland_analysis: None,
        error: None,
        wall_time_ms: 0.0,
    }
}

/// Classifies an error: premise failures produce a hypothesis-violation
/// report; anything else propagates for the caller to map to an exit code.
fn premise_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::HypothesisViolation(_) | Error::EstimateViolation(_) | Error::EmptyGraph
    )
}

/// Runs `command` ∈ {check-distance, bp, ekeland, caristi, ep} on a
/// validated problem.
pub fn run_command(command: &str, bound: &BoundProblem, flags: &RunFlags) -> Result<RunReport> {
    let start = Instant::now();
    let digest = input_digest(&bound.problem, &flags.digest_extra(command));
    let mut report = blank_report(command, digest, flags.clone());
    let outcome = dispatch(command, bound, flags, &mut report);
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    match outcome {
        Ok(()) => Ok(report),
        Err(e) if premise_failure(&e) => {
            report.verdict = RunVerdict::HypothesisViolation;
            report.summary = format!("hypothesis violation: {e}");
            report.error = Some(e.to_string());
            Ok(report)
        }
        Err(e) => Err(e),
    }
}

fn dispatch(
    command: &str,
    bound: &BoundProblem,
    flags: &RunFlags,
    report: &mut RunReport,
) -> Result<()> {
    let space = &bound.space;
    let d = &bound.distance;
    let n = space.len();
    match command {
        "check-distance" => {
            let mode = if n * n * n <= 1_000_000 {
                ScanMode::Full
            } else {
                ScanMode::Sampled {
                    budget: 1_000_000,
                    seed: flags.seed,
                }
            };
            let rep = axiom_report(d, space, flags.tol, mode)?;
            report.summary = format!(
                "identity {}; {} symmetry witnesses, {} triangle witnesses",
                if rep.identity_ok { "ok" } else { "VIOLATED" },
                rep.symmetry_witnesses.len(),
                rep.triangle_witnesses.len()
            );
            report.verdict = if rep.identity_ok {
                RunVerdict::Verified
            } else {
                RunVerdict::VerificationFailure
            };
            report.axioms = Some(rep);
        }
        "bp" => {
            let f = bound.objective()?;
            let sched = bound.schedule()?;
            let z0 = bound.z0()?;
            let (zbar, trace) = borwein_preiss(
                space,
                d,
                f,
                sched,
                z0,
                flags.picker()?,
                flags.max_iter(n),
            )?;
            let cert = verify_bp(space, d, f, sched, z0, zbar, &trace, flags.tol)?;
            report.summary = format!(
                "zbar = {} after {} sets; claims {}",
                space.id(zbar),
                trace.iterates.len(),
                claims_line(&cert)
            );
            report.verdict = if cert.all_satisfied() {
                RunVerdict::Verified
            } else {
                RunVerdict::VerificationFailure
            };
            report.trace = Some(TraceDto::from_trace(&trace, space));
            report.certificate = Some(cert);
        }
        "ekeland" => {
            let f = bound.objective()?;
            let eps = bound.epsilon()?;
            let z0 = bound.z0()?;
            let (zbar, trace) =
                ekeland(space, d, f, eps, z0, flags.picker()?, flags.max_iter(n))?;
            let cert = verify_ekeland(space, d, f, eps, z0, zbar, flags.tol)?;
            report.summary = format!(
                "zbar = {} after {} sets; claims {}",
                space.id(zbar),
                trace.iterates.len(),
                claims_line(&cert)
            );
            if cert.all_satisfied() {
                report.verdict = RunVerdict::Verified;
            } else {
                report.verdict = RunVerdict::VerificationFailure;
                let witnesses = ekeland_conclusion_witnesses(space, d, f, eps, z0, flags.tol);
                let exists = !witnesses.is_empty();
                report.ekeland_analysis = Some(EkelandAnalysis {
                    conclusion_witnesses: witnesses
                        .ids(space)
                        .iter()
                        .map(|s| s.to_string())
                        .collect(),
                    witness_exists: exists,
                });
                report.summary.push_str(if exists {
                    "; a conclusion witness exists but the iteration missed it"
                } else {
                    "; no point satisfies all conclusions on this instance"
                });
            }
            report.trace = Some(TraceDto::from_trace(&trace, space));
            report.certificate = Some(cert);
        }
        "caristi" => {
            let phi = bound.potential()?;
            let map = bound.map()?;
            let eps = bound.epsilon()?;
            let out = caristi_fixed_point(space, d, phi, map, eps, flags.tol)?;
            let (fixed, endpoints) = brute_fixed_points(space, map);
            let point_in_fixed = fixed.contains(out.point);
            let fix_equals_endpoints = fixed == endpoints;
            let margins_ok = out.evp_min_margin >= -flags.tol
                && out
                    .forcing_margins
                    .iter()
                    .all(|(lo, hi)| *lo >= -flags.tol && *hi >= -flags.tol);
            report.summary = format!(
                "fixed point {} (endpoint: {}); fix = endpoints: {}",
                space.id(out.point),
                out.endpoint_ok,
                fix_equals_endpoints
            );
            report.verdict = if point_in_fixed && out.endpoint_ok && fix_equals_endpoints && margins_ok
            {
                RunVerdict::Verified
            } else {
                RunVerdict::VerificationFailure
            };
            report.caristi = Some(CaristiDto {
                point: space.id(out.point).to_string(),
                endpoint_ok: out.endpoint_ok,
                pair: [
                    space.id(out.pair.0).to_string(),
                    space.id(out.pair.1).to_string(),
                ],
                evp_min_margin: out.evp_min_margin.into(),
                forcing_margins: out.forcing_margins,
                fixed: fixed.ids(space).iter().map(|s| s.to_string()).collect(),
                endpoints: endpoints.ids(space).iter().map(|s| s.to_string()).collect(),
                point_in_fixed,
                fix_equals_endpoints,
                pair_certificate: out.pair_certificate,
            });
        }
        "ep" => {
            let phi = bound.potential()?;
            let f = bound.bifunction()?;
            let default_schedule: Vec<f64> = (0..20).map(|i| 0.5_f64.powi(i)).collect();
            let eps_schedule = bound.eps_schedule.as_deref().unwrap_or(&default_schedule);
            let out = equilibrium_solve(space, d, f, phi, eps_schedule, flags.tol)?;
            let brute = brute_equilibria(space, f);
            let in_brute = brute.contains(out.xbar);
            let min_residual = (0..n)
                .map(|y| f.value(out.xbar, y))
                .fold(f64::INFINITY, f64::min);
            let stage_ok = out.stage_margins.iter().all(|m| *m >= -flags.tol);
            report.summary = format!(
                "xbar = {} after {} stages; min residual {:.3e}",
                space.id(out.xbar),
                out.residuals.len(),
                min_residual
            );
            report.verdict = if in_brute && min_residual >= -flags.tol && stage_ok {
                RunVerdict::Verified
            } else {
                RunVerdict::VerificationFailure
            };
            report.equilibrium = Some(EquilibriumDto {
                xbar: space.id(out.xbar).to_string(),
                residuals: out.residuals,
                stage_points: out
                    .stage_points
                    .iter()
                    .map(|&p| space.id(p).to_string())
                    .collect(),
                stage_margins: out.stage_margins,
                min_residual,
                brute_set: brute.ids(space).iter().map(|s| s.to_string()).collect(),
                in_brute_set: in_brute,
            });
        }
        other => {
            return Err(Error::BadParameter(format!("unknown command `{other}`")));
        }
    }
    Ok(())
}

fn claims_line(cert: &Certificate) -> String {
    cert.claims
        .iter()
        .map(|c| format!("({}){}", c.label, if c.satisfied { "✓" } else { "✗" }))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Rechecks a stored report against its problem file without re-running
/// the construction: the digest must match, and the stored outputs must
/// still verify. Returns the fresh verification report.
pub fn verify_report(stored: &RunReport, bound: &BoundProblem) -> Result<RunReport> {
    let start = Instant::now();
    let expected = input_digest(&bound.problem, &stored.flags.digest_extra(&stored.command));
    let mut report = blank_report(&stored.command, expected.clone(), stored.flags.clone());
    if stored.digest != expected {
        report.verdict = RunVerdict::VerificationFailure;
        report.summary = format!(
            "digest mismatch: certificate was issued for different inputs (stored {}, recomputed {})",
            stored.digest, expected
        );
        report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
        return Ok(report);
    }
    let space = &bound.space;
    let d = &bound.distance;
    let tol = stored.flags.tol;
    match stored.command.as_str() {
        "bp" => {
            let cert = stored
                .certificate
                .as_ref()
                .ok_or_else(|| Error::Validation("report carries no certificate".into()))?;
            let dto = stored
                .trace
                .as_ref()
                .ok_or_else(|| Error::Validation("report carries no trace".into()))?;
            let trace = dto.to_trace(space)?;
            let fresh = verify_bp(
                space,
                d,
                bound.objective()?,
                bound.schedule()?,
                bound.z0()?,
                space.idx(&cert.zbar)?,
                &trace,
                tol,
            )?;
            report.verdict = if fresh.all_satisfied() {
                RunVerdict::Verified
            } else {
                RunVerdict::VerificationFailure
            };
            report.summary = format!("recheck of zbar = {}: claims {}", cert.zbar, claims_line(&fresh));
            report.certificate = Some(fresh);
        }
        "ekeland" => {
            let cert = stored
                .certificate
                .as_ref()
                .ok_or_else(|| Error::Validation("report carries no certificate".into()))?;
            let fresh = verify_ekeland(
                space,
                d,
                bound.objective()?,
                bound.epsilon()?,
                bound.z0()?,
                space.idx(&cert.zbar)?,
                tol,
            )?;
            report.verdict = if fresh.all_satisfied() {
                RunVerdict::Verified
            } else {
                RunVerdict::VerificationFailure
            };
            report.summary = format!("recheck of zbar = {}: claims {}", cert.zbar, claims_line(&fresh));
            report.certificate = Some(fresh);
        }
        "caristi" => {
            let dto = stored
                .caristi
                .as_ref()
                .ok_or_else(|| Error::Validation("report carries no caristi outcome".into()))?;
            let map = bound.map()?;
            let phi = bound.potential()?;
            let point = space.idx(&dto.point)?;
            let (ok, _) = check_caristi_hypothesis(d, phi, map, tol);
            let (fixed, endpoints) = brute_fixed_points(space, map);
            let good = ok
                && fixed.contains(point)
                && map.targets(point) == [point]
                && fixed == endpoints;
            report.verdict = if good {
                RunVerdict::Verified
            } else {
                RunVerdict::VerificationFailure
            };
            report.summary = format!("recheck of fixed point {}: {}", dto.point, good);
        }
        "ep" => {
            let dto = stored
                .equilibrium
                .as_ref()
                .ok_or_else(|| Error::Validation("report carries no equilibrium outcome".into()))?;
            let f = bound.bifunction()?;
            let xbar = space.idx(&dto.xbar)?;
            let brute = brute_equilibria(space, f);
            let min_residual = (0..space.len())
                .map(|y| f.value(xbar, y))
                .fold(f64::INFINITY, f64::min);
            let good = brute.contains(xbar) && min_residual >= -tol;
            report.verdict = if good {
                RunVerdict::Verified
            } else {
                RunVerdict::VerificationFailure
            };
            report.summary = format!("recheck of xbar = {}: {}", dto.xbar, good);
        }
        other => {
            return Err(Error::Validation(format!(
                "cannot verify reports for command `{other}`"
            )));
        }
    }
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}
