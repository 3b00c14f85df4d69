//! Steady-state population model of the NV⁻ centre.
//!
//! Five levels: ground and excited triplet, each split into an m_s=0 level
//! and a merged m_s=±1 manifold, plus the metastable singlet. The merged
//! ±1 manifold carries statistical weight 2, so spin mixing transfers
//! population at rate `2k` from m_s=0 into the manifold and `k` back out,
//! which reproduces the 1:2 equilibrium of three equally mixed sublevels.
//!
//! All routines are pure functions and safe to call concurrently.

use serde::{Deserialize, Serialize};

use crate::consts::photon_energy;
use crate::error::{Error, Result};
use crate::linalg::{hermitian3_eigen, solve_linear};
use crate::real::Real;

/// Transition rates of the five-level model, all in 1/s.
///
/// `isc_e1 > isc_e0` (stronger shelving from the excited ±1 manifold) is
/// what makes m_s=0 the "brighter" state; the config loader enforces it for
/// physical setups, while the solver itself only requires nonnegative rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NvRates<R> {
    /// 532 nm excitation rate per NV centre.
    pub pump_rate: R,
    /// Radiative decay ³E → ³A₂, spin conserving.
    pub radiative_decay: R,
    /// Intersystem crossing ³E (m_s=0) → singlet.
    pub isc_e0: R,
    /// Intersystem crossing ³E (m_s=±1) → singlet.
    pub isc_e1: R,
    /// Singlet decay back to the ground triplet.
    pub singlet_decay: R,
    /// Fraction of singlet decay ending in ground m_s=0.
    pub singlet_branch_g0: R,
    /// Ground-state m_s=0 ↔ ±1 mixing rate.
    pub mix_ground: R,
    /// Excited-state m_s=0 ↔ ±1 mixing rate.
    pub mix_excited: R,
}

impl<R: Real> NvRates<R> {
    /// Checks the hard invariants: nonnegative rates, branching in [0, 1].
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("pump_rate", self.pump_rate),
            ("radiative_decay", self.radiative_decay),
            ("isc_e0", self.isc_e0),
            ("isc_e1", self.isc_e1),
            ("singlet_decay", self.singlet_decay),
            ("mix_ground", self.mix_ground),
            ("mix_excited", self.mix_excited),
        ];
        for (name, value) in nonneg {
            if !(value >= R::zero()) {
                return Err(Error::InvalidRates(format!(
                    "{name} must be >= 0, got {value}"
                )));
            }
        }
        if !(self.singlet_branch_g0 >= R::zero() && self.singlet_branch_g0 <= R::one()) {
            return Err(Error::InvalidRates(format!(
                "singlet_branch_g0 must be in [0, 1], got {}",
                self.singlet_branch_g0
            )));
        }
        Ok(())
    }
}

/// Occupation probabilities of the five levels; they sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NvPopulations<R> {
    pub g0: R,
    pub g1: R,
    pub e0: R,
    pub e1: R,
    pub s: R,
}

impl<R: Real> NvPopulations<R> {
    /// Total excited-triplet population e0 + e1.
    pub fn excited(&self) -> R {
        self.e0 + self.e1
    }

    pub fn total(&self) -> R {
        self.g0 + self.g1 + self.e0 + self.e1 + self.s
    }

    pub fn as_array(&self) -> [R; 5] {
        [self.g0, self.g1, self.e0, self.e1, self.s]
    }
}

/// Ground-triplet spin Hamiltonian parameters (Hz, Hz/T, T).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinHamiltonianParams<R> {
    /// Zero-field splitting D, Hz.
    pub zero_field_d: R,
    /// Transverse strain E, Hz.
    pub strain_e: R,
    /// Electron gyromagnetic ratio, Hz/T.
    pub gyromagnetic_ratio: R,
    /// Magnetic field in the NV frame, tesla, (x, y, z) with z the NV axis.
    pub b_field: [R; 3],
}

impl<R: Real> SpinHamiltonianParams<R> {
    pub fn validate(&self) -> Result<()> {
        if !(self.zero_field_d > R::zero()) {
            return Err(Error::InvalidRates(format!(
                "zero_field_d must be > 0, got {}",
                self.zero_field_d
            )));
        }
        if !(self.gyromagnetic_ratio > R::zero()) {
            return Err(Error::InvalidRates(format!(
                "gyromagnetic_ratio must be > 0, got {}",
                self.gyromagnetic_ratio
            )));
        }
        Ok(())
    }
}

/// Gain-medium parameters of the NV-doped diamond plate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainMediumParams<R> {
    /// NV⁻ number density, 1/m³.
    pub nv_density: R,
    /// Effective stimulated-emission cross-section at the seed wavelength, m².
    pub stim_cross_section: R,
    /// Geometric thickness of the diamond plate, m.
    pub medium_thickness: R,
    /// Intrinsic host absorption at the seed wavelength, 1/m.
    pub intrinsic_absorption: R,
    /// Pump-induced absorption at the seed wavelength, 1/(m·W of pump).
    pub induced_absorption_coeff: R,
}

impl<R: Real> GainMediumParams<R> {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("nv_density", self.nv_density),
            ("stim_cross_section", self.stim_cross_section),
            ("medium_thickness", self.medium_thickness),
            ("intrinsic_absorption", self.intrinsic_absorption),
            ("induced_absorption_coeff", self.induced_absorption_coeff),
        ];
        for (name, value) in fields {
            if !(value >= R::zero()) {
                return Err(Error::InvalidRates(format!(
                    "{name} must be >= 0, got {value}"
                )));
            }
        }
        Ok(())
    }
}

/// Pump beam excitation derived from optical power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpExcitation<R> {
    /// Beam intensity P / (π w²), W/m².
    pub intensity: R,
    /// Excitation rate per NV centre, 1/s.
    pub pump_rate: R,
}

/// Converts pump power to intensity and per-NV excitation rate.
///
/// Convention: intensity = power / (π · waist²); the rate is
/// intensity · cross_section / photon_energy(wavelength).
pub fn pump_rate_from_power<R: Real>(
    power: R,
    beam_waist: R,
    absorption_cross_section: R,
    wavelength: R,
) -> Result<PumpExcitation<R>> {
    if !(beam_waist > R::zero()) {
        return Err(Error::InvalidGeometry(format!(
            "beam waist must be > 0, got {beam_waist}"
        )));
    }
    if !(power >= R::zero()) {
        return Err(Error::InvalidGeometry(format!(
            "pump power must be >= 0, got {power}"
        )));
    }
    let intensity = power / (R::PI() * beam_waist * beam_waist);
    let pump_rate = intensity * absorption_cross_section / photon_energy(wavelength);
    Ok(PumpExcitation {
        intensity,
        pump_rate,
    })
}

/// Rate matrix M with dp/dt = M p, state order [g0, g1, e0, e1, s].
///
/// Column sums vanish (population conservation).
pub fn rate_matrix<R: Real>(rates: &NvRates<R>) -> [[R; 5]; 5] {
    let z = R::zero();
    let two = R::lit(2.0);
    let p = rates.pump_rate;
    let gr = rates.radiative_decay;
    let i0 = rates.isc_e0;
    let i1 = rates.isc_e1;
    let gs = rates.singlet_decay;
    let beta = rates.singlet_branch_g0;
    let kg = rates.mix_ground;
    let ke = rates.mix_excited;

    [
        // g0
        [-(p + two * kg), kg, gr, z, beta * gs],
        // g1
        [two * kg, -(p + kg), z, gr, (R::one() - beta) * gs],
        // e0
        [p, z, -(gr + i0 + two * ke), ke, z],
        // e1
        [z, p, two * ke, -(gr + i1 + ke), z],
        // s
        [z, z, i0, i1, -gs],
    ]
}

/// Steady-state populations: the normalized null-space vector of the rate
/// matrix.
///
/// When the steady state is not unique (no pumping and no mixing leaves the
/// two ground levels disconnected), the degenerate direction is resolved
/// toward the statistical 1:2 split of the merged manifold. A system with
/// all rates zero has no steady state and errors.
pub fn steady_state_populations<R: Real>(rates: &NvRates<R>) -> Result<NvPopulations<R>> {
    rates.validate()?;

    match solve_steady(rates) {
        Ok(pops) => Ok(pops),
        Err(Error::SingularSystem { .. }) => {
            let max_rate = [
                rates.pump_rate,
                rates.radiative_decay,
                rates.isc_e0,
                rates.isc_e1,
                rates.singlet_decay,
            ]
            .into_iter()
            .fold(R::zero(), R::max);
            if max_rate == R::zero() {
                return Err(Error::NoUniqueSteadyState(
                    "all rates are zero".to_string(),
                ));
            }
            // Tie-break the disconnected ground manifolds with an
            // infinitesimal mixing rate, then solve again.
            let mut regularized = *rates;
            let eps = max_rate * R::lit(1e-9);
            regularized.mix_ground = regularized.mix_ground + eps;
            regularized.mix_excited = regularized.mix_excited + eps;
            solve_steady(&regularized)
                .map_err(|_| Error::NoUniqueSteadyState("degenerate rate matrix".to_string()))
        }
        Err(e) => Err(e),
    }
}

fn solve_steady<R: Real>(rates: &NvRates<R>) -> Result<NvPopulations<R>> {
    let m = rate_matrix(rates);
    // Replace the first balance equation (linearly dependent on the rest)
    // with the normalization constraint sum p = 1.
    let mut a: Vec<Vec<R>> = vec![vec![R::one(); 5]];
    for row in &m[1..] {
        a.push(row.to_vec());
    }
    let mut b = vec![R::one(), R::zero(), R::zero(), R::zero(), R::zero()];
    let mut x = solve_linear(&mut a, &mut b)?;

    let floor = -R::lit(1e-9);
    for v in &mut x {
        if *v < floor {
            return Err(Error::NoUniqueSteadyState(format!(
                "negative steady-state population {v}"
            )));
        }
        if *v < R::zero() {
            *v = R::zero();
        }
    }
    let total: R = x.iter().copied().sum();
    for v in &mut x {
        *v = *v / total;
    }
    Ok(NvPopulations {
        g0: x[0],
        g1: x[1],
        e0: x[2],
        e1: x[3],
        s: x[4],
    })
}

/// Photoluminescence rate per NV, 1/s: radiative decay times the total
/// excited population.
pub fn pl_rate<R: Real>(pops: &NvPopulations<R>, rates: &NvRates<R>) -> R {
    rates.radiative_decay * pops.excited()
}

/// Net NV gain coefficient at the seed wavelength, 1/m.
///
/// Stimulated-emission gain proportional to the excited population minus the
/// pump-induced absorption; the intrinsic host absorption is booked in the
/// cavity loss budget instead.
pub fn gain_coefficient<R: Real>(
    pops: &NvPopulations<R>,
    medium: &GainMediumParams<R>,
    pump_power: R,
) -> R {
    medium.nv_density * medium.stim_cross_section * pops.excited()
        - medium.induced_absorption_coeff * pump_power
}

/// Result of diagonalizing the ground-triplet spin Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeemanLevels<R> {
    /// The two microwave transition frequencies out of the m_s=0-like
    /// eigenstate, Hz, ascending.
    pub transition_freqs: [R; 2],
    /// Normalized m_s=0 ↔ ±1 eigenstate mixing: 0 for pure spin states,
    /// 1 when the m_s=0 character is spread evenly.
    pub mixing_scale: R,
}

/// Diagonalizes H = D·Sz² + E·(Sx² − Sy²) + γ·B⃗·S⃗ for spin 1.
///
/// Basis order is {m_s=+1, 0, −1}; frequencies are energy differences from
/// the eigenstate with the largest m_s=0 character.
pub fn zeeman_levels<R: Real>(params: &SpinHamiltonianParams<R>) -> ZeemanLevels<R> {
    let d = params.zero_field_d;
    let e = params.strain_e;
    let g = params.gyromagnetic_ratio;
    let [bx, by, bz] = params.b_field;
    let z = R::zero();
    let inv_sqrt2 = R::one() / R::lit(2.0).sqrt();

    // Real part: D Sz² + E (Sx² − Sy²) + γ(Bx Sx + Bz Sz).
    let wx = g * bx * inv_sqrt2;
    let re = [
        [d + g * bz, wx, e],
        [wx, z, wx],
        [e, wx, d - g * bz],
    ];
    // Imaginary part: γ By Sy.
    let wy = g * by * inv_sqrt2;
    let im = [[z, -wy, z], [wy, z, -wy], [z, wy, z]];

    let (values, populations) = hermitian3_eigen(&re, &im);

    // m_s=0 is basis index 1.
    let mut ground = 0;
    for i in 1..3 {
        if populations[i][1] > populations[ground][1] {
            ground = i;
        }
    }
    let mut freqs: Vec<R> = (0..3)
        .filter(|&i| i != ground)
        .map(|i| values[i] - values[ground])
        .collect();
    freqs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));

    let p_max = populations[ground][1];
    let mixing_scale = (R::lit(2.0) * (R::one() - p_max))
        .max(R::zero())
        .min(R::one());

    ZeemanLevels {
        transition_freqs: [freqs[0], freqs[1]],
        mixing_scale,
    }
}

/// Effective transverse field B·cos(α/2) seen by every NV orientation when
/// the field is applied along the (100) crystal direction; α is the angle
/// between NV axes.
pub fn effective_transverse_field<R: Real>(b_magnitude: R, tetrahedral_angle: R) -> R {
    b_magnitude * (tetrahedral_angle / R::lit(2.0)).cos()
}
