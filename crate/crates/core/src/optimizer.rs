//! Derivative-free maximization of the Holevo quantity over ensembles of
//! pure qubit states with free priors.
//!
//! Each restart picks the best of a batch of candidate ensembles (a few
//! axis-aligned antipodal pairs plus random draws), then alternates
//! compass steps on every Bloch angle with exact line searches on the
//! priors. The Holevo quantity is concave in the priors for fixed states,
//! so moving probability mass between two states is a unimodal 1-D problem
//! solved by golden section. Restarts run in parallel and are reduced in
//! index order, so results are bit-identical for a fixed seed.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channels::{make_channel, ChannelKind, QuantumChannel};
use crate::error::{Error, Result};
use crate::holevo::{
    capacity_closed_form, capacity_splaying_scan, holevo_chi, CapacityResult, Ensemble, Method,
    ScanGrid,
};
use crate::qlinalg::{density_to_bloch, DensityMatrix};
use crate::search::golden_section_max;

pub const MIN_STATES: usize = 2;
pub const MAX_STATES: usize = 4;

/// Pure signal states given by Bloch angles, with priors on the simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleParams {
    /// `(theta, phi)` per state, `theta ∈ [0, π]`, `phi ∈ [0, 2π)`.
    pub angles: Vec<(f64, f64)>,
    pub priors: Vec<f64>,
}

impl EnsembleParams {
    pub fn new(angles: Vec<(f64, f64)>, priors: Vec<f64>) -> Result<Self> {
        if angles.len() != priors.len() {
            return Err(Error::InvalidEnsemble(format!(
                "{} angle pairs but {} priors",
                angles.len(),
                priors.len()
            )));
        }
        if let Some(&(t, p)) = angles
            .iter()
            .find(|(t, p)| !(0.0..=PI).contains(t) || !(0.0..TAU).contains(p))
        {
            return Err(Error::InvalidEnsemble(format!(
                "angles ({t}, {p}) out of range"
            )));
        }
        let total: f64 = priors.iter().sum();
        if priors.iter().any(|p| p.is_nan() || *p < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidEnsemble(format!(
                "priors {priors:?} not on the simplex"
            )));
        }
        Ok(Self { angles, priors })
    }

    pub fn n(&self) -> usize {
        self.angles.len()
    }

    pub fn ensemble(&self) -> Result<Ensemble> {
        Ensemble::new(
            self.priors
                .iter()
                .zip(&self.angles)
                .map(|(&p, &(t, f))| (p, DensityMatrix::pure_qubit(t, f)))
                .collect(),
        )
    }

    /// Unit Bloch vectors of the signal states.
    pub fn bloch_vectors(&self) -> Vec<[f64; 3]> {
        self.angles
            .iter()
            .map(|&(t, f)| crate::qlinalg::BlochVector::from_angles(t, f).components())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub restarts: usize,
    /// Maximum number of refinement sweeps per restart.
    pub max_iters: usize,
    /// Sweeps stop once the objective improves by less than this at the
    /// finest step size.
    pub tol: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iters: 2000,
            tol: 1e-10,
            seed: 42,
        }
    }
}

impl OptimizerConfig {
    fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be at least 1".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidConfig("tol must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convergence {
    Converged,
    /// `max_iters` sweeps ran out; the result is the best found so far.
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizedEnsemble {
    pub capacity: CapacityResult,
    pub params: EnsembleParams,
    pub convergence: Convergence,
}

/// Smallest compass step on angles.
const MIN_ANGLE_STEP: f64 = 1e-9;
const INITIAL_ANGLE_STEP: f64 = 0.5;
/// Candidates drawn per restart before local refinement.
const CANDIDATES_PER_RESTART: usize = 48;
const PRIOR_LINE_TOL: f64 = 1e-10;

/// Unconstrained working point; angles are canonicalized on output.
#[derive(Debug, Clone)]
struct Point {
    angles: Vec<(f64, f64)>,
    priors: Vec<f64>,
}

impl Point {
    fn canonical(&self) -> Result<EnsembleParams> {
        let angles = self
            .angles
            .iter()
            .map(|&(t, f)| canonical_angles(t, f))
            .collect();
        EnsembleParams::new(angles, project_to_simplex(&self.priors))
    }
}

/// Maps any `(theta, phi)` to the same Bloch point with `theta ∈ [0, π]`,
/// `phi ∈ [0, 2π)`.
fn canonical_angles(theta: f64, phi: f64) -> (f64, f64) {
    let mut theta = theta.rem_euclid(TAU);
    let mut phi = phi;
    if theta > PI {
        theta = TAU - theta;
        phi += PI;
    }
    let phi = phi.rem_euclid(TAU);
    (theta, if phi >= TAU { 0.0 } else { phi })
}

/// Euclidean projection onto the probability simplex.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut shift = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if u - candidate > 0.0 {
            shift = candidate;
        }
    }
    let mut p: Vec<f64> = v.iter().map(|x| (x - shift).max(0.0)).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    p
}

struct Objective<'a> {
    channel: &'a QuantumChannel,
}

impl Objective<'_> {
    fn eval(&self, point: &Point) -> Result<f64> {
        let entries = point
            .priors
            .iter()
            .zip(&point.angles)
            .map(|(&p, &(t, f))| (p, DensityMatrix::pure_qubit(t, f)))
            .collect();
        holevo_chi(self.channel, &Ensemble::new(entries)?)
    }
}

fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Point {
    let angles = (0..n)
        .map(|_| {
            // Uniform on the sphere.
            let z: f64 = rng.random_range(-1.0..=1.0);
            (z.acos(), rng.random_range(0.0..TAU))
        })
        .collect();
    // Flat Dirichlet via normalized exponentials.
    let weights: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    Point {
        angles,
        priors: project_to_simplex(&weights),
    }
}

/// Antipodal pairs along the three axes, padded with zero-prior states.
fn axis_points(n: usize) -> Vec<Point> {
    let pairs = [
        [(0.0, 0.0), (PI, 0.0)],
        [(FRAC_PI_2, 0.0), (FRAC_PI_2, PI)],
        [(FRAC_PI_2, FRAC_PI_2), (FRAC_PI_2, 3.0 * FRAC_PI_2)],
    ];
    pairs
        .iter()
        .map(|pair| {
            let mut angles = pair.to_vec();
            let mut priors = vec![0.5, 0.5];
            for k in 2..n {
                angles.push((FRAC_PI_2 * (k - 1) as f64 / 2.0, 0.0));
                priors.push(0.0);
            }
            Point { angles, priors }
        })
        .collect()
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64 + 1);
    rng
}

/// Local refinement from `start`; returns the final point, its value and
/// whether the sweep budget ran out.
fn refine(
    objective: &Objective<'_>,
    start: Point,
    cfg: &OptimizerConfig,
) -> Result<(Point, f64, Convergence)> {
    let mut point = start;
    let mut best = objective.eval(&point)?;
    let mut step = INITIAL_ANGLE_STEP;
    let n = point.angles.len();

    for _ in 0..cfg.max_iters {
        let before = best;

        for i in 0..n {
            for coord in 0..2 {
                for dir in [1.0, -1.0] {
                    let mut trial = point.clone();
                    let a = &mut trial.angles[i];
                    if coord == 0 {
                        a.0 += dir * step;
                    } else {
                        a.1 += dir * step;
                    }
                    let v = objective.eval(&trial)?;
                    if v > best {
                        point = trial;
                        best = v;
                        break;
                    }
                }
            }
        }

        for i in 0..n {
            for j in (i + 1)..n {
                let (pi, pj) = (point.priors[i], point.priors[j]);
                if pi + pj <= 0.0 {
                    continue;
                }
                // Move mass t from j to i, t ∈ [−pi, pj].
                let shifted = |t: f64| {
                    let mut trial = point.clone();
                    trial.priors[i] = (pi + t).max(0.0);
                    trial.priors[j] = (pj - t).max(0.0);
                    trial
                };
                let (t, v) =
                    golden_section_max(|t| objective.eval(&shifted(t)), -pi, pj, PRIOR_LINE_TOL)?;
                if v > best {
                    point = shifted(t);
                    best = v;
                }
            }
        }

        let gain = best - before;
        if gain < cfg.tol {
            if step <= MIN_ANGLE_STEP {
                return Ok((point, best, Convergence::Converged));
            }
            step *= 0.5;
        }
    }
    Ok((point, best, Convergence::IterationLimit))
}

fn best_start(objective: &Objective<'_>, candidates: Vec<Point>) -> Result<Point> {
    let mut best: Option<(Point, f64)> = None;
    for c in candidates {
        let v = objective.eval(&c)?;
        if best.as_ref().is_none_or(|(_, b)| v > *b) {
            best = Some((c, v));
        }
    }
    Ok(best.expect("at least one candidate").0)
}

fn search_n(
    channel: &QuantumChannel,
    n: usize,
    cfg: &OptimizerConfig,
    seeded: Option<Point>,
) -> Result<(Point, f64, Convergence)> {
    let objective = Objective { channel };
    let outcomes: Vec<(Point, f64, Convergence)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let start = match (&seeded, r) {
                (Some(p), 0) => p.clone(),
                _ => {
                    let mut rng = restart_rng(cfg.seed, r);
                    let mut candidates: Vec<Point> = (0..CANDIDATES_PER_RESTART)
                        .map(|_| random_point(&mut rng, n))
                        .collect();
                    if r <= 1 {
                        candidates.extend(axis_points(n));
                    }
                    best_start(&objective, candidates)?
                }
            };
            refine(&objective, start, cfg)
        })
        .collect::<Result<_>>()?;

    let mut best_idx = 0;
    for (idx, (_, v, _)) in outcomes.iter().enumerate() {
        if *v > outcomes[best_idx].1 {
            best_idx = idx;
        }
    }
    Ok(outcomes.into_iter().nth(best_idx).expect("restarts ≥ 1"))
}

/// Best Holevo quantity over ensembles of `n` pure qubit states.
///
/// The `n`-state search is seeded with the best `(n − 1)`-state ensemble
/// plus one zero-prior state, so the value never decreases with `n`.
pub fn optimize_ensemble(
    channel: &QuantumChannel,
    n: usize,
    cfg: &OptimizerConfig,
) -> Result<OptimizedEnsemble> {
    if !(MIN_STATES..=MAX_STATES).contains(&n) {
        return Err(Error::Domain {
            name: "n",
            value: n as f64,
            range: "[2, 4]",
        });
    }
    if channel.dim_in() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: channel.dim_in(),
        });
    }
    cfg.validate()?;

    let (mut point, _, mut convergence) = search_n(channel, MIN_STATES, cfg, None)?;
    for size in (MIN_STATES + 1)..=n {
        let mut seeded = point.clone();
        seeded.angles.push((FRAC_PI_2, 0.0));
        seeded.priors.push(0.0);
        let (p, _, c) = search_n(channel, size, cfg, Some(seeded))?;
        point = p;
        convergence = c;
    }

    let params = point.canonical()?;
    let ensemble = params.ensemble()?;
    let value_bits = holevo_chi(channel, &ensemble)?;
    Ok(OptimizedEnsemble {
        capacity: CapacityResult {
            value_bits,
            ensemble,
            method: Method::GeneralOptimizer,
            params: None,
            restricted: false,
        },
        params,
        convergence,
    })
}

/// Angles and priors of any qubit ensemble, for reporting.
pub fn describe_ensemble(ensemble: &Ensemble) -> Vec<(f64, f64, f64, f64)> {
    ensemble
        .entries()
        .iter()
        .map(|(p, rho)| match density_to_bloch(rho) {
            Ok(w) => {
                let (t, f) = w.angles();
                (t, f, w.norm(), *p)
            }
            Err(_) => (f64::NAN, f64::NAN, f64::NAN, *p),
        })
        .collect()
}

/// Any optimizer value more than this above the reference is flagged.
pub const EXCEEDANCE_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct AuditRow {
    /// `None` for the splaying channel.
    pub eta: Option<f64>,
    /// The closed-form value, or the restricted scan for splaying.
    pub reference_bits: f64,
    /// The orthogonal-pair value (splaying only).
    pub orthogonal_bits: Option<f64>,
    pub optimizer_n2: f64,
    pub optimizer_n3: f64,
    pub convergence: Convergence,
}

impl AuditRow {
    /// Best optimizer value minus the reference value.
    pub fn gap(&self) -> f64 {
        self.optimizer_n2.max(self.optimizer_n3) - self.reference_bits
    }

    pub fn exceeds_reference(&self) -> bool {
        self.gap() > EXCEEDANCE_TOL
    }

    /// Whether the two-state optimizer fell short of the reference.
    pub fn falls_short(&self) -> bool {
        self.optimizer_n2 < self.reference_bits - EXCEEDANCE_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub kind: ChannelKind,
    pub rows: Vec<AuditRow>,
}

impl AuditReport {
    pub fn exceedances(&self) -> impl Iterator<Item = &AuditRow> {
        self.rows.iter().filter(|r| r.exceeds_reference())
    }
}

/// Compares the general optimizer (n = 2 and 3) against the closed form or
/// restricted scan at every `eta`. The splaying channel has no parameter and
/// produces a single row regardless of `eta_grid`.
pub fn audit_channel(
    kind: ChannelKind,
    eta_grid: &[f64],
    cfg: &OptimizerConfig,
) -> Result<AuditReport> {
    let mut rows = Vec::new();
    if kind == ChannelKind::Splaying {
        let scan = capacity_splaying_scan(&ScanGrid::default())?;
        let channel = make_channel(kind, 0.0)?;
        rows.push(audit_row(
            &channel,
            None,
            scan.capacity.value_bits,
            Some(scan.orthogonal.value_bits),
            cfg,
        )?);
    } else {
        for &eta in eta_grid {
            let reference = capacity_closed_form(kind, eta)?.value_bits;
            let channel = make_channel(kind, eta)?;
            rows.push(audit_row(&channel, Some(eta), reference, None, cfg)?);
        }
    }
    Ok(AuditReport { kind, rows })
}

fn audit_row(
    channel: &QuantumChannel,
    eta: Option<f64>,
    reference_bits: f64,
    orthogonal_bits: Option<f64>,
    cfg: &OptimizerConfig,
) -> Result<AuditRow> {
    let two = optimize_ensemble(channel, 2, cfg)?;
    let three = optimize_ensemble(channel, 3, cfg)?;
    let convergence = if [two.convergence, three.convergence].contains(&Convergence::IterationLimit)
    {
        Convergence::IterationLimit
    } else {
        Convergence::Converged
    };
    Ok(AuditRow {
        eta,
        reference_bits,
        orthogonal_bits,
        optimizer_n2: two.capacity.value_bits,
        optimizer_n3: three.capacity.value_bits,
        convergence,
    })
}
