//! Ensembles, the Holevo quantity, closed-form capacities and the
//! restricted two-state scans for the non-unital channels.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rayon::prelude::*;

use crate::channels::{check_eta, make_channel, ChannelKind, QuantumChannel};
use crate::error::{Error, Result};
use crate::qlinalg::{
    binary_entropy, bloch_to_density, von_neumann_entropy, BlochVector, ComplexMatrix,
    DensityMatrix,
};
use crate::search::golden_section_max;

/// Tolerance on the sum of ensemble priors.
pub const PRIOR_TOL: f64 = 1e-12;
/// Values within this of the running maximum count as ties in grid scans.
pub const TIE_TOL: f64 = 1e-12;

/// Signal states with prior probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    entries: Vec<(f64, DensityMatrix)>,
}

impl Ensemble {
    pub fn new(entries: Vec<(f64, DensityMatrix)>) -> Result<Self> {
        let Some((_, first)) = entries.first() else {
            return Err(Error::InvalidEnsemble("no states".into()));
        };
        let dim = first.dim();
        if let Some((p, _)) = entries.iter().find(|(p, _)| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidEnsemble(format!(
                "prior {p} is not a probability"
            )));
        }
        if entries.iter().any(|(_, rho)| rho.dim() != dim) {
            return Err(Error::InvalidEnsemble("states differ in dimension".into()));
        }
        let total: f64 = entries.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > PRIOR_TOL {
            return Err(Error::InvalidEnsemble(format!("priors sum to {total}")));
        }
        Ok(Self { entries })
    }

    /// Equal priors over `states`.
    pub fn uniform(states: Vec<DensityMatrix>) -> Result<Self> {
        let p = 1.0 / states.len() as f64;
        Self::new(states.into_iter().map(|s| (p, s)).collect())
    }

    pub fn entries(&self) -> &[(f64, DensityMatrix)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.entries[0].1.dim()
    }
}

/// `S(Σ p_j ε(ρ_j)) − Σ p_j S(ε(ρ_j))`, in bits.
pub fn holevo_chi(channel: &QuantumChannel, ensemble: &Ensemble) -> Result<f64> {
    if ensemble.dim() != channel.dim_in() {
        return Err(Error::DimensionMismatch {
            expected: channel.dim_in(),
            found: ensemble.dim(),
        });
    }
    let mut mixture = ComplexMatrix::zeros(channel.dim_out(), channel.dim_out())?;
    let mut mean_entropy = 0.0;
    for (p, rho) in ensemble.entries().iter().filter(|(p, _)| *p > 0.0) {
        let out = channel.apply(rho)?;
        mixture = mixture + out.matrix().scale(*p);
        mean_entropy += p * von_neumann_entropy(&out);
    }
    // Priors are only normalized to PRIOR_TOL.
    let mixture = DensityMatrix::new(mixture.scale(1.0 / mixture.trace().re))?;
    Ok(von_neumann_entropy(&mixture) - mean_entropy)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    ClosedForm,
    RestrictedScan,
    GeneralOptimizer,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed-form",
            Method::RestrictedScan => "restricted-scan",
            Method::GeneralOptimizer => "optimizer",
        }
    }
}

/// Rotation angle of the second signal state and its prior `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestrictedSearchParams {
    pub psi: f64,
    pub tau: f64,
}

impl RestrictedSearchParams {
    pub fn new(psi: f64, tau: f64) -> Result<Self> {
        if !(0.0..TAU).contains(&psi) {
            return Err(Error::Domain {
                name: "psi",
                value: psi,
                range: "[0, 2π)",
            });
        }
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::Domain {
                name: "tau",
                value: tau,
                range: "[0, 1]",
            });
        }
        Ok(Self { psi, tau })
    }

    /// `A = τ(1 − τ)`, which lies in `[0, ¼]`.
    pub fn a(&self) -> f64 {
        self.tau * (1.0 - self.tau)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityResult {
    pub value_bits: f64,
    /// The ensemble achieving `value_bits`.
    pub ensemble: Ensemble,
    pub method: Method,
    pub params: Option<RestrictedSearchParams>,
    /// Set when the value is a maximum over a restricted input family
    /// rather than over all ensembles.
    pub restricted: bool,
}

fn x_axis_pair() -> Vec<DensityMatrix> {
    vec![
        DensityMatrix::pure_qubit(FRAC_PI_2, 0.0),
        DensityMatrix::pure_qubit(FRAC_PI_2, PI),
    ]
}

fn y_axis_pair() -> Vec<DensityMatrix> {
    vec![
        DensityMatrix::pure_qubit(FRAC_PI_2, FRAC_PI_2),
        DensityMatrix::pure_qubit(FRAC_PI_2, 3.0 * FRAC_PI_2),
    ]
}

fn z_axis_pair() -> Vec<DensityMatrix> {
    vec![
        DensityMatrix::pure_qubit(0.0, 0.0),
        DensityMatrix::pure_qubit(PI, 0.0),
    ]
}

fn h(x: f64) -> f64 {
    binary_entropy(x.clamp(0.0, 1.0)).expect("clamped into [0, 1]")
}

/// `H((1−η)/2) − H((1 − √(1−η+η²))/2)`: the best equal-latitude two-state
/// value for amplitude damping.
pub fn amplitude_damping_capacity(eta: f64) -> f64 {
    h(0.5 * (1.0 - eta)) - h(0.5 * (1.0 - (1.0 - eta + eta * eta).sqrt()))
}

/// Closed-form capacities and their achieving ensembles.
pub fn capacity_closed_form(kind: ChannelKind, eta: f64) -> Result<CapacityResult> {
    check_eta(eta)?;
    let (value_bits, states, restricted) = match kind {
        ChannelKind::Depolarizing => (1.0 - h(2.0 * eta / 3.0), z_axis_pair(), false),
        ChannelKind::Erasure => (1.0 - eta, z_axis_pair(), false),
        ChannelKind::PhaseDamping | ChannelKind::PhaseFlip => (1.0, z_axis_pair(), false),
        ChannelKind::BitFlip => (1.0, x_axis_pair(), false),
        ChannelKind::BitPhaseFlip => (1.0, y_axis_pair(), false),
        ChannelKind::TwoPauli if eta < 2.0 / 3.0 => (1.0 - h(eta / 2.0), x_axis_pair(), false),
        ChannelKind::TwoPauli => (1.0 - h(eta), z_axis_pair(), false),
        ChannelKind::AmplitudeDamping => (amplitude_damping_capacity(eta), x_axis_pair(), true),
        ChannelKind::Splaying | ChannelKind::Custom => {
            return Err(Error::UnsupportedKind {
                operation: "closed-form capacity",
                kind: kind.to_string(),
            })
        }
    };
    let params = (kind == ChannelKind::AmplitudeDamping)
        .then_some(RestrictedSearchParams { psi: PI, tau: 0.5 });
    Ok(CapacityResult {
        value_bits,
        ensemble: Ensemble::uniform(states)?,
        method: Method::ClosedForm,
        params,
        restricted,
    })
}

/// Amplitude-damping inputs: `w = (1, 0, 0)` and `w` rotated by `psi`
/// about the z axis.
pub fn amplitude_pair(psi: f64) -> (DensityMatrix, DensityMatrix) {
    let (s, c) = psi.sin_cos();
    (
        DensityMatrix::pure_qubit(FRAC_PI_2, 0.0),
        pure_from_vector([c, -s, 0.0]),
    )
}

/// Splaying inputs: `w = (1, 0, 0)` and `w` rotated by `psi` in the x–z plane.
pub fn splaying_pair(psi: f64) -> (DensityMatrix, DensityMatrix) {
    let (s, c) = psi.sin_cos();
    (
        DensityMatrix::pure_qubit(FRAC_PI_2, 0.0),
        pure_from_vector([c, 0.0, -s]),
    )
}

fn pure_from_vector(w: [f64; 3]) -> DensityMatrix {
    let w = BlochVector::new(w).expect("rotation of a unit vector");
    bloch_to_density(&w).expect("unit Bloch vector")
}

/// Eigenvalues of the amplitude-damping mixture `(1−τ)ρ1′ + τρ2′`:
/// `½ ± ½√(η² + (1−η)(1 − 2A(1 − cos ψ)))` with `A = τ(1−τ)`.
pub fn amplitude_mixture_spectrum(eta: f64, params: RestrictedSearchParams) -> (f64, f64) {
    let radicand = eta * eta + (1.0 - eta) * (1.0 - 2.0 * params.a() * (1.0 - params.psi.cos()));
    let r = radicand.max(0.0).sqrt();
    (0.5 + 0.5 * r, 0.5 - 0.5 * r)
}

/// Resolution of the restricted scans.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanGrid {
    /// Grid points spanning `psi ∈ [0, 2π]`.
    pub psi_points: usize,
    /// Grid points spanning `tau ∈ [0, 1]`.
    pub tau_points: usize,
    /// Width at which golden-section refinement stops.
    pub refine_tol: f64,
}

impl Default for ScanGrid {
    fn default() -> Self {
        Self {
            psi_points: 721,
            tau_points: 101,
            refine_tol: 1e-6,
        }
    }
}

impl ScanGrid {
    fn psi_values(&self) -> Result<Vec<f64>> {
        if self.psi_points < 8 {
            return Err(Error::DegenerateGrid(format!(
                "{} psi points (need at least 8)",
                self.psi_points
            )));
        }
        if self.refine_tol.is_nan() || self.refine_tol <= 0.0 {
            return Err(Error::DegenerateGrid("refine_tol must be positive".into()));
        }
        let step = TAU / (self.psi_points - 1) as f64;
        Ok((0..self.psi_points).map(|k| k as f64 * step).collect())
    }

    fn tau_values(&self) -> Result<Vec<f64>> {
        if self.tau_points < 2 {
            return Err(Error::DegenerateGrid(format!(
                "{} tau points (need at least 2)",
                self.tau_points
            )));
        }
        let step = 1.0 / (self.tau_points - 1) as f64;
        Ok((0..self.tau_points).map(|k| k as f64 * step).collect())
    }
}

/// Grid maximum of `objective(psi, tau)` followed by alternating
/// golden-section refinement. Ties resolve to the smallest `psi`, then the
/// smallest `tau`.
fn scan_and_refine<F>(
    objective: F,
    psis: &[f64],
    taus: &[f64],
    tol: f64,
) -> Result<(RestrictedSearchParams, f64)>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    let values: Vec<f64> = (0..psis.len() * taus.len())
        .into_par_iter()
        .map(|idx| objective(psis[idx / taus.len()], taus[idx % taus.len()]))
        .collect::<Result<_>>()?;
    let mut best_idx = 0;
    for (idx, &v) in values.iter().enumerate() {
        if v > values[best_idx] + TIE_TOL {
            best_idx = idx;
        }
    }
    let (mut psi, mut tau) = (psis[best_idx / taus.len()], taus[best_idx % taus.len()]);
    let mut best = values[best_idx];

    let psi_step = psis[1] - psis[0];
    let tau_step = if taus.len() > 1 {
        taus[1] - taus[0]
    } else {
        0.0
    };
    for _ in 0..50 {
        let before = best;
        let (p, v) =
            golden_section_max(|p| objective(p, tau), psi - psi_step, psi + psi_step, tol)?;
        if v > best {
            psi = p;
            best = v;
        }
        if tau_step > 0.0 {
            let (lo, hi) = ((tau - tau_step).max(0.0), (tau + tau_step).min(1.0));
            let (t, v) = golden_section_max(|t| objective(psi, t), lo, hi, tol)?;
            if v > best {
                tau = t;
                best = v;
            }
        }
        if best - before <= f64::EPSILON {
            break;
        }
    }
    let psi = psi.rem_euclid(TAU);
    let psi = if psi >= TAU { 0.0 } else { psi };
    Ok((RestrictedSearchParams::new(psi, tau)?, best))
}

fn pair_ensemble(pair: (DensityMatrix, DensityMatrix), tau: f64) -> Result<Ensemble> {
    Ensemble::new(vec![(1.0 - tau, pair.0), (tau, pair.1)])
}

/// Maximizes the Holevo quantity of amplitude damping over the pair
/// `amplitude_pair(psi)` with priors `(1 − tau, tau)`.
pub fn capacity_amplitude_scan(eta: f64, grid: &ScanGrid) -> Result<CapacityResult> {
    check_eta(eta)?;
    let channel = make_channel(ChannelKind::AmplitudeDamping, eta)?;
    let objective =
        |psi: f64, tau: f64| holevo_chi(&channel, &pair_ensemble(amplitude_pair(psi), tau)?);
    let (params, value_bits) = scan_and_refine(
        objective,
        &grid.psi_values()?,
        &grid.tau_values()?,
        grid.refine_tol,
    )?;
    Ok(CapacityResult {
        value_bits,
        ensemble: pair_ensemble(amplitude_pair(params.psi), params.tau)?,
        method: Method::RestrictedScan,
        params: Some(params),
        restricted: true,
    })
}

/// Outcome of the splaying-channel scan.
#[derive(Debug, Clone, PartialEq)]
pub struct SplayingScan {
    /// Best equal-prior pair over the rotation angle.
    pub capacity: CapacityResult,
    /// The orthogonal pair, `psi = π`.
    pub orthogonal: CapacityResult,
}

impl SplayingScan {
    /// How much the best pair beats the orthogonal one.
    pub fn advantage_bits(&self) -> f64 {
        self.capacity.value_bits - self.orthogonal.value_bits
    }
}

/// Holevo quantity of the splaying channel on `splaying_pair(psi)` with
/// equal priors.
pub fn splaying_pair_chi(psi: f64) -> Result<f64> {
    let channel = make_channel(ChannelKind::Splaying, 0.0)?;
    holevo_chi(&channel, &pair_ensemble(splaying_pair(psi), 0.5)?)
}

pub fn capacity_splaying_scan(grid: &ScanGrid) -> Result<SplayingScan> {
    let channel = make_channel(ChannelKind::Splaying, 0.0)?;
    let objective =
        |psi: f64, _tau: f64| holevo_chi(&channel, &pair_ensemble(splaying_pair(psi), 0.5)?);
    let (params, value_bits) =
        scan_and_refine(objective, &grid.psi_values()?, &[0.5], grid.refine_tol)?;
    let capacity = CapacityResult {
        value_bits,
        ensemble: pair_ensemble(splaying_pair(params.psi), 0.5)?,
        method: Method::RestrictedScan,
        params: Some(params),
        restricted: true,
    };
    let orthogonal = CapacityResult {
        value_bits: objective(PI, 0.5)?,
        ensemble: pair_ensemble(splaying_pair(PI), 0.5)?,
        method: Method::RestrictedScan,
        params: Some(RestrictedSearchParams::new(PI, 0.5)?),
        restricted: true,
    };
    Ok(SplayingScan {
        capacity,
        orthogonal,
    })
}

/// Closed-form output eigenvalues for a parametrized pair of inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputSpectra {
    /// First output, descending.
    pub alpha: (f64, f64),
    /// Second output, descending.
    pub beta: (f64, f64),
}

fn split(r: f64) -> (f64, f64) {
    (0.5 + 0.5 * r, 0.5 - 0.5 * r)
}

/// Per-state output eigenvalues in closed form.
///
/// `angle` is the polar angle θ of the first input for phase damping and
/// two-Pauli (the second input is antipodal), and the rotation angle ψ of
/// the second input for amplitude damping and splaying. The matching inputs
/// come from [`formula_inputs`].
pub fn eigenvalue_formulas(kind: ChannelKind, eta: f64, angle: f64) -> Result<OutputSpectra> {
    if kind != ChannelKind::Splaying {
        check_eta(eta)?;
    }
    let spectra = match kind {
        ChannelKind::PhaseDamping => {
            let mu = eta / 2.0;
            let r = (1.0 - 4.0 * mu * (1.0 - mu) * angle.sin().powi(2))
                .max(0.0)
                .sqrt();
            OutputSpectra {
                alpha: split(r),
                beta: split(r),
            }
        }
        ChannelKind::TwoPauli => {
            let radicand =
                1.0 - 4.0 * eta * (1.0 - eta) + eta * (2.0 - 3.0 * eta) * angle.sin().powi(2);
            let r = radicand.max(0.0).sqrt();
            OutputSpectra {
                alpha: split(r),
                beta: split(r),
            }
        }
        ChannelKind::AmplitudeDamping => {
            let r = (1.0 - eta + eta * eta).sqrt();
            OutputSpectra {
                alpha: split(r),
                beta: split(r),
            }
        }
        ChannelKind::Splaying => {
            let s = angle.sin();
            let half_r = (4.0 - 2.0 * s - 2.0 * s * s).max(0.0).sqrt() / 6.0;
            OutputSpectra {
                alpha: (5.0 / 6.0, 1.0 / 6.0),
                beta: (0.5 + half_r, 0.5 - half_r),
            }
        }
        _ => {
            return Err(Error::UnsupportedKind {
                operation: "eigenvalue formulas",
                kind: kind.to_string(),
            })
        }
    };
    Ok(spectra)
}

/// The input pair whose output spectra [`eigenvalue_formulas`] describes.
pub fn formula_inputs(kind: ChannelKind, angle: f64) -> Result<(DensityMatrix, DensityMatrix)> {
    match kind {
        ChannelKind::PhaseDamping | ChannelKind::TwoPauli => Ok((
            DensityMatrix::pure_qubit(angle, 0.0),
            DensityMatrix::pure_qubit(angle + PI, 0.0),
        )),
        ChannelKind::AmplitudeDamping => Ok(amplitude_pair(angle)),
        ChannelKind::Splaying => Ok(splaying_pair(angle)),
        _ => Err(Error::UnsupportedKind {
            operation: "eigenvalue formulas",
            kind: kind.to_string(),
        }),
    }
}
