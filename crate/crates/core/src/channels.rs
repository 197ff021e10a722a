//! Channel catalog, operator-sum application and the Stokes (affine) form.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qlinalg::{
    BlochVector, ComplexMatrix, DensityMatrix, IDENTITY_2, PAULIS, PAULI_X, PAULI_Y, PAULI_Z,
};

/// Tolerance for completeness and unitality checks.
pub const CPTP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChannelKind {
    Depolarizing,
    Erasure,
    PhaseDamping,
    BitFlip,
    BitPhaseFlip,
    PhaseFlip,
    TwoPauli,
    AmplitudeDamping,
    Splaying,
    Custom,
}

impl ChannelKind {
    /// Every kind `make_channel` can build.
    pub const CATALOG: [ChannelKind; 9] = [
        ChannelKind::Depolarizing,
        ChannelKind::Erasure,
        ChannelKind::PhaseDamping,
        ChannelKind::BitFlip,
        ChannelKind::BitPhaseFlip,
        ChannelKind::PhaseFlip,
        ChannelKind::TwoPauli,
        ChannelKind::AmplitudeDamping,
        ChannelKind::Splaying,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::Depolarizing => "depolarizing",
            ChannelKind::Erasure => "erasure",
            ChannelKind::PhaseDamping => "phase-damping",
            ChannelKind::BitFlip => "bit-flip",
            ChannelKind::BitPhaseFlip => "bit-phase-flip",
            ChannelKind::PhaseFlip => "phase-flip",
            ChannelKind::TwoPauli => "two-pauli",
            ChannelKind::AmplitudeDamping => "amplitude-damping",
            ChannelKind::Splaying => "splaying",
            ChannelKind::Custom => "custom",
        }
    }

    /// Whether the channel is parametrized by a noise probability.
    pub fn takes_eta(self) -> bool {
        !matches!(self, ChannelKind::Splaying | ChannelKind::Custom)
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .trim()
            .to_ascii_lowercase()
            .chars()
            .filter(|c| !matches!(c, '-' | '_' | ' '))
            .collect();
        let kind = match key.as_str() {
            "depolarizing" | "depolarising" => ChannelKind::Depolarizing,
            "erasure" => ChannelKind::Erasure,
            "phasedamping" => ChannelKind::PhaseDamping,
            "bitflip" => ChannelKind::BitFlip,
            "bitphaseflip" => ChannelKind::BitPhaseFlip,
            "phaseflip" => ChannelKind::PhaseFlip,
            "twopauli" => ChannelKind::TwoPauli,
            "amplitude" | "amplitudedamping" => ChannelKind::AmplitudeDamping,
            "splaying" | "spraying" => ChannelKind::Splaying,
            "custom" => ChannelKind::Custom,
            _ => return Err(Error::UnknownKind(s.to_string())),
        };
        Ok(kind)
    }
}

/// A CPTP map given by Kraus operators, applied as `ρ ↦ Σ E ρ E†`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    kind: ChannelKind,
    name: String,
    eta: Option<f64>,
    kraus: Vec<ComplexMatrix>,
    dim_in: usize,
    dim_out: usize,
}

pub(crate) fn check_eta(eta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eta) {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "eta",
            value: eta,
            range: "[0, 1]",
        })
    }
}

/// Kraus operators of the splaying channel, `T = diag(1/√3, 0, 1/3)`,
/// `t = (0, 0, 1/3)`.
///
/// They come from the eigendecomposition of the channel's Choi matrix, which
/// splits into the blocks `[[5/6, s], [s, 1/2]]` (eigenvalues 1, 1/3) and
/// `[[1/6, s], [s, 1/2]]` (eigenvalues 2/3, 0) with `s = 1/(2√3)`. The zero
/// eigenvalue contributes no operator.
fn splaying_kraus() -> Vec<ComplexMatrix> {
    let r3 = 3f64.sqrt();
    vec![
        ComplexMatrix::real_2x2([[r3 / 2.0, 0.0], [0.0, 0.5]]),
        ComplexMatrix::real_2x2([[1.0 / (2.0 * r3), 0.0], [0.0, -0.5]]),
        ComplexMatrix::real_2x2([[0.0, 0.5f64.sqrt()], [1.0 / 6f64.sqrt(), 0.0]]),
    ]
}

fn erasure_kraus(eta: f64) -> Result<Vec<ComplexMatrix>> {
    let mut embed = ComplexMatrix::zeros(3, 2)?;
    embed.set(0, 0, Complex64::new(1.0, 0.0));
    embed.set(1, 1, Complex64::new(1.0, 0.0));
    let flag = eta.sqrt();
    Ok(vec![
        embed.scale((1.0 - eta).sqrt()),
        ComplexMatrix::unit(3, 2, 2, 0)?.scale(flag),
        ComplexMatrix::unit(3, 2, 2, 1)?.scale(flag),
    ])
}

/// Builds a catalog channel. `eta` is ignored for [`ChannelKind::Splaying`].
pub fn make_channel(kind: ChannelKind, eta: f64) -> Result<QuantumChannel> {
    if kind.takes_eta() {
        check_eta(eta)?;
    }
    let keep = (1.0 - eta).sqrt();
    let kraus = match kind {
        ChannelKind::Depolarizing => {
            let flip = (eta / 3.0).sqrt();
            vec![
                IDENTITY_2.scale(keep),
                PAULI_X.scale(flip),
                PAULI_Y.scale(flip),
                PAULI_Z.scale(flip),
            ]
        }
        ChannelKind::Erasure => erasure_kraus(eta)?,
        ChannelKind::PhaseDamping => vec![
            IDENTITY_2.scale(keep),
            ComplexMatrix::real_2x2([[eta.sqrt(), 0.0], [0.0, 0.0]]),
            ComplexMatrix::real_2x2([[0.0, 0.0], [0.0, eta.sqrt()]]),
        ],
        ChannelKind::BitFlip => vec![IDENTITY_2.scale(keep), PAULI_X.scale(eta.sqrt())],
        ChannelKind::BitPhaseFlip => vec![IDENTITY_2.scale(keep), PAULI_Y.scale(eta.sqrt())],
        ChannelKind::PhaseFlip => vec![IDENTITY_2.scale(keep), PAULI_Z.scale(eta.sqrt())],
        ChannelKind::TwoPauli => {
            let flip = (eta / 2.0).sqrt();
            vec![
                IDENTITY_2.scale(keep),
                PAULI_X.scale(flip),
                PAULI_Y.scale(flip),
            ]
        }
        ChannelKind::AmplitudeDamping => vec![
            ComplexMatrix::real_2x2([[1.0, 0.0], [0.0, keep]]),
            ComplexMatrix::real_2x2([[0.0, eta.sqrt()], [0.0, 0.0]]),
        ],
        ChannelKind::Splaying => splaying_kraus(),
        ChannelKind::Custom => {
            return Err(Error::UnsupportedKind {
                operation: "make_channel",
                kind: kind.to_string(),
            })
        }
    };
    let dim_out = kraus[0].rows();
    Ok(QuantumChannel {
        kind,
        name: kind.name().to_string(),
        eta: kind.takes_eta().then_some(eta),
        kraus,
        dim_in: 2,
        dim_out,
    })
}

/// `max |Σ E†E − I|` over entries.
pub fn completeness_deviation(kraus: &[ComplexMatrix]) -> Result<f64> {
    let first = kraus
        .first()
        .ok_or_else(|| Error::Structural("empty Kraus set".into()))?;
    let (rows, cols) = (first.rows(), first.cols());
    if let Some((k, e)) = kraus
        .iter()
        .enumerate()
        .find(|(_, e)| (e.rows(), e.cols()) != (rows, cols))
    {
        return Err(Error::Structural(format!(
            "operator {k} is {}×{}, operator 0 is {rows}×{cols}",
            e.rows(),
            e.cols()
        )));
    }
    let mut sum = ComplexMatrix::zeros(cols, cols)?;
    for e in kraus {
        sum = sum + e.adjoint() * *e;
    }
    Ok(sum.max_abs_diff(&ComplexMatrix::identity(cols)?))
}

/// Checks `Σ E†E = I` within [`CPTP_TOL`].
pub fn validate_cptp(kraus: &[ComplexMatrix]) -> Result<()> {
    let max_deviation = completeness_deviation(kraus)?;
    if max_deviation > CPTP_TOL {
        Err(Error::NotTracePreserving { max_deviation })
    } else {
        Ok(())
    }
}

impl QuantumChannel {
    /// A custom channel from a Kraus set; rejected unless trace preserving.
    pub fn from_kraus(name: impl Into<String>, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        validate_cptp(&kraus)?;
        let (dim_out, dim_in) = (kraus[0].rows(), kraus[0].cols());
        Ok(Self {
            kind: ChannelKind::Custom,
            name: name.into(),
            eta: None,
            kraus,
            dim_in,
            dim_out,
        })
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Noise parameter, absent for the splaying channel and custom channels.
    pub fn eta(&self) -> Option<f64> {
        self.eta
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    /// `Σ E X E†` for any `dim_in × dim_in` operator `X`.
    pub fn apply_operator(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if !x.is_square() || x.dim() != self.dim_in {
            return Err(Error::DimensionMismatch {
                expected: self.dim_in,
                found: x.rows(),
            });
        }
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out)?;
        for e in &self.kraus {
            out = out + *e * *x * e.adjoint();
        }
        Ok(out)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::new(self.apply_operator(rho.matrix())?)
    }

    /// Whether `ε(I) = I` within [`CPTP_TOL`].
    pub fn is_unital(&self) -> Result<bool> {
        if self.dim_in != self.dim_out {
            return Err(Error::UnitalityUndefined {
                dim_in: self.dim_in,
                dim_out: self.dim_out,
            });
        }
        let identity = ComplexMatrix::identity(self.dim_in)?;
        Ok(self.apply_operator(&identity)?.max_abs_diff(&identity) <= CPTP_TOL)
    }

    /// The `(T, t)` action on Bloch vectors:
    /// `T[i][j] = ½ tr(σ_i ε(σ_j))`, `t[i] = ½ tr(σ_i ε(I))`.
    pub fn affine_representation(&self) -> Result<AffineMap> {
        if self.dim_in != 2 || self.dim_out != 2 {
            return Err(Error::NoAffineForm {
                dim_in: self.dim_in,
                dim_out: self.dim_out,
            });
        }
        let component = |out: &ComplexMatrix, i: usize| 0.5 * (PAULIS[i] * *out).trace().re;
        let mut linear = [[0.0; 3]; 3];
        for (j, sigma) in PAULIS.iter().enumerate() {
            let image = self.apply_operator(sigma)?;
            for (i, row) in linear.iter_mut().enumerate() {
                row[j] = component(&image, i);
            }
        }
        let image = self.apply_operator(&IDENTITY_2)?;
        let shift = [0, 1, 2].map(|i| component(&image, i));
        Ok(AffineMap { linear, shift })
    }
}

/// Bloch-vector action `w ↦ t + T w` of a qubit channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub linear: [[f64; 3]; 3],
    pub shift: [f64; 3],
}

impl AffineMap {
    pub fn apply(&self, w: &BlochVector) -> [f64; 3] {
        let w = w.components();
        let mut out = self.shift;
        for (o, row) in out.iter_mut().zip(&self.linear) {
            *o += row.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
        }
        out
    }

    /// Diagonal of `T` (the contraction factors χ1, χ2, χ3).
    pub fn diagonal(&self) -> [f64; 3] {
        [0, 1, 2].map(|i| self.linear[i][i])
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        (0..3).all(|i| (0..3).all(|j| i == j || self.linear[i][j].abs() <= tol))
    }
}

/// On-disk channel definition (JSON).
///
/// ```json
/// { "name": "bit-flip 0.1", "dim_in": 2, "dim_out": 2,
///   "kraus": [ [[[0.948683, 0], [0, 0]], [[0, 0], [0.948683, 0]]], ... ] }
/// ```
/// Each Kraus matrix is `dim_out` rows of `dim_in` `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelDefinition {
    pub name: String,
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

impl ChannelDefinition {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn from_channel(channel: &QuantumChannel) -> Self {
        let kraus = channel
            .kraus()
            .iter()
            .map(|e| {
                (0..e.rows())
                    .map(|i| {
                        (0..e.cols())
                            .map(|j| [e.get(i, j).re, e.get(i, j).im])
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self {
            name: channel.name().to_string(),
            dim_in: channel.dim_in(),
            dim_out: channel.dim_out(),
            kraus,
        }
    }

    /// Kraus matrices, checked against the declared dimensions.
    pub fn kraus_matrices(&self) -> Result<Vec<ComplexMatrix>> {
        if self.kraus.is_empty() {
            return Err(Error::Structural("empty Kraus set".into()));
        }
        self.kraus
            .iter()
            .enumerate()
            .map(|(k, rows)| {
                if rows.len() != self.dim_out || rows.iter().any(|r| r.len() != self.dim_in) {
                    return Err(Error::Structural(format!(
                        "operator {k} is not {}×{}",
                        self.dim_out, self.dim_in
                    )));
                }
                let rows: Vec<Vec<Complex64>> = rows
                    .iter()
                    .map(|r| r.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
                    .collect();
                ComplexMatrix::from_rows(&rows)
            })
            .collect()
    }

    pub fn into_channel(self) -> Result<QuantumChannel> {
        let kraus = self.kraus_matrices()?;
        QuantumChannel::from_kraus(self.name, kraus)
    }
}

/// Reads and validates a channel definition file.
pub fn load_channel_file(path: &Path) -> Result<QuantumChannel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        line: 0,
        column: 0,
        message: format!("{}: {e}", path.display()),
    })?;
    ChannelDefinition::parse(&text)?.into_channel()
}
