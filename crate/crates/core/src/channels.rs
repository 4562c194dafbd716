//! Polarization channels and the intensities they detect at a fixed pair
//! geometry.
//!
//! The far-field amplitude radiated by atom α into polarization ε is
//! `E_α = ε*·D_α`. Second-order terms in the exchange coupling give
//!
//! ```text
//! L₂ = Σ_α ⟨E†_α E_α⟩^[2]
//! C₂ = 2 Re{⟨E†_1 E_2⟩^[2] e^{ik·r₁₂}}
//! ```
//!
//! and the elastic parts replace each correlator by the product of dipole
//! expectation values, summed over order pairs `[n]×[m]` with `n + m = 2`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::geometry::{ComplexVec3, Spherical, C64};
use crate::liouvillian::{contract, dipole_components, DipoleModel, Incident};
use crate::operators::{observable_coordinates, ObservableCoordinates, Op4, PairOperator};
use crate::solver::SteadyStateOrders;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    /// Circular in, same helicity out (ε = ê₋₁ in the fixed basis).
    HparH,
    /// Linear ê₀ in, linear ŷ out.
    LinPerpLin,
    /// Circular in, opposite helicity out.
    HperpH,
    /// Linear ê₀ in and out.
    LinParLin,
    /// HperpH restricted to the driven transition.
    ScalarTwoLevel,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("unknown channel `{0}` (expected hparh, linperplin, hperph, linparlin or scalar)")]
    Unknown(String),
    #[error("need perturbative orders up to 2, got {found}")]
    MissingOrders { found: usize },
    #[error("steady state was computed for a different incident polarization or dipole model than channel {0}")]
    Mismatch(Channel),
}

impl Channel {
    pub const ALL: [Channel; 5] = [
        Channel::HparH,
        Channel::LinPerpLin,
        Channel::HperpH,
        Channel::LinParLin,
        Channel::ScalarTwoLevel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Channel::HparH => "hparh",
            Channel::LinPerpLin => "linperplin",
            Channel::HperpH => "hperph",
            Channel::LinParLin => "linparlin",
            Channel::ScalarTwoLevel => "scalar",
        }
    }

    pub fn incident(self) -> Incident {
        match self {
            Channel::LinPerpLin | Channel::LinParLin => Incident::LinearZ,
            _ => Incident::CircularPlus,
        }
    }

    /// Detected polarization ε.
    pub fn detection(self) -> ComplexVec3 {
        match self {
            Channel::HparH => ComplexVec3::basis(Spherical::Minus),
            Channel::HperpH | Channel::ScalarTwoLevel => ComplexVec3::basis(Spherical::Plus),
            Channel::LinParLin => ComplexVec3::basis(Spherical::Zero),
            Channel::LinPerpLin => ComplexVec3::from_cartesian([C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)]),
        }
    }

    pub fn dipole_model(self) -> DipoleModel {
        match self {
            Channel::ScalarTwoLevel => DipoleModel::DrivenTransition,
            _ => DipoleModel::Full,
        }
    }

    /// Parallel channels detect the single-scattering signal as well.
    pub fn is_parallel(self) -> bool {
        matches!(self, Channel::HperpH | Channel::LinParLin | Channel::ScalarTwoLevel)
    }

    /// Single-atom operator `E = ε*·D`.
    pub fn emission_operator(self) -> Op4 {
        let eps = self.detection().to_cartesian().map(|z| z.conj());
        contract(&eps, &dipole_components(self.dipole_model(), self.incident()))
    }

    /// Linear functionals for `⟨E_α⟩`, `⟨E†_α⟩` (α = 0, 1), the ladder sum
    /// `Σ_α E†_α E_α` and the cross correlator `E†_1 E_2`.
    pub fn observables(self) -> ChannelObservableSet {
        let e = self.emission_operator();
        let ed = e.adjoint();
        let f = |op: &PairOperator| observable_coordinates(op).expect("finite operator");
        ChannelObservableSet {
            emit: [0, 1].map(|a| f(&PairOperator::on_atom(a, e))),
            emit_dagger: [0, 1].map(|a| f(&PairOperator::on_atom(a, ed))),
            ladder: f(&PairOperator::on_first(ed * e).plus(PairOperator::on_second(ed * e))),
            crossed: f(&PairOperator::product(ed, e)),
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Channel {
    type Err = ChannelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        match key.as_str() {
            "hparh" | "hh" => Ok(Channel::HparH),
            "linperplin" | "linperp" => Ok(Channel::LinPerpLin),
            "hperph" | "hperp" => Ok(Channel::HperpH),
            "linparlin" | "linpar" => Ok(Channel::LinParLin),
            "scalar" | "scalartwolevel" => Ok(Channel::ScalarTwoLevel),
            _ => Err(ChannelError::Unknown(s.to_string())),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ChannelObservableSet {
    pub emit: [ObservableCoordinates; 2],
    pub emit_dagger: [ObservableCoordinates; 2],
    pub ladder: ObservableCoordinates,
    pub crossed: ObservableCoordinates,
}

/// Intensities at one geometry, in the units of `|g|²` times the squared
/// dipole matrix element (prefactor set to one).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntensityTerms {
    /// Order-0 signal `Σ_α⟨…⟩^[0]`.
    pub single_scatter: f64,
    pub ladder: f64,
    pub crossed: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedGeometryIntensities {
    pub total: IntensityTerms,
    pub elastic: IntensityTerms,
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn check(channel: Channel, orders: &SteadyStateOrders) -> Result<(), ChannelError> {
    if orders.orders.len() < 3 {
        return Err(ChannelError::MissingOrders { found: orders.orders.len().saturating_sub(1) });
    }
    if orders.drive.incident != channel.incident() || orders.dipole != channel.dipole_model() {
        return Err(ChannelError::Mismatch(channel));
    }
    Ok(())
}

/// `e^{ik·r₁₂}` for detection at angle `theta` from backscattering.
pub fn detection_phase(channel: Channel, orders: &SteadyStateOrders, theta: f64) -> C64 {
    let geom = &orders.geometry;
    let k = channel.incident().detection_direction(theta).map(|x| x * geom.k0);
    C64::from_polar(1.0, dot(k, geom.separation()))
}

fn order_value(obs: &ObservableCoordinates, orders: &SteadyStateOrders, n: usize) -> C64 {
    if n == 0 {
        obs.expectation(&orders.orders[0])
    } else {
        obs.correction(&orders.orders[n])
    }
}

pub fn total_intensity_terms(
    channel: Channel,
    orders: &SteadyStateOrders,
    theta: f64,
) -> Result<IntensityTerms, ChannelError> {
    check(channel, orders)?;
    let obs = channel.observables();
    let phase = detection_phase(channel, orders, theta);
    Ok(IntensityTerms {
        single_scatter: order_value(&obs.ladder, orders, 0).re,
        ladder: order_value(&obs.ladder, orders, 2).re,
        crossed: 2.0 * (order_value(&obs.crossed, orders, 2) * phase).re,
    })
}

pub fn elastic_intensity_terms(
    channel: Channel,
    orders: &SteadyStateOrders,
    theta: f64,
) -> Result<IntensityTerms, ChannelError> {
    check(channel, orders)?;
    let obs = channel.observables();
    let phase = detection_phase(channel, orders, theta);
    let pairs = |a: &ObservableCoordinates, b: &ObservableCoordinates, total: usize| -> C64 {
        (0..=total).map(|n| order_value(a, orders, n) * order_value(b, orders, total - n)).sum()
    };
    let single: f64 = (0..2).map(|a| pairs(&obs.emit_dagger[a], &obs.emit[a], 0).re).sum();
    let ladder: f64 = (0..2).map(|a| pairs(&obs.emit_dagger[a], &obs.emit[a], 2).re).sum();
    let crossed = 2.0 * (pairs(&obs.emit_dagger[0], &obs.emit[1], 2) * phase).re;
    Ok(IntensityTerms { single_scatter: single, ladder, crossed })
}

pub fn fixed_geometry_intensities(
    channel: Channel,
    orders: &SteadyStateOrders,
    theta: f64,
) -> Result<FixedGeometryIntensities, ChannelError> {
    Ok(FixedGeometryIntensities {
        total: total_intensity_terms(channel, orders, theta)?,
        elastic: elastic_intensity_terms(channel, orders, theta)?,
    })
}

/// Single-atom total and elastic scattered intensity, `s/(1+s)` and
/// `s/(1+s)²`.
pub fn single_atom_reference(s: f64) -> (f64, f64) {
    let s = s.max(0.0);
    (s / (1.0 + s), s / (1.0 + s).powi(2))
}

/// Direct and reversed amplitudes of a doubly scattered elastic photon:
/// the first-order dipoles of the two atoms with their propagation phases.
pub fn elastic_amplitudes(channel: Channel, orders: &SteadyStateOrders, theta: f64) -> Result<(C64, C64), ChannelError> {
    check(channel, orders)?;
    let obs = channel.observables();
    let geom = &orders.geometry;
    let k = channel.incident().detection_direction(theta).map(|x| x * geom.k0);
    let amp = |atom: usize| order_value(&obs.emit[atom], orders, 1) * C64::from_polar(1.0, -dot(k, geom.position(atom)));
    Ok((amp(0), amp(1)))
}
