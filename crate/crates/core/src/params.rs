//! Physical parameters of the atom–cavity–waveguide system and the
//! quantities derived from them.
//!
//! All quantities are in natural units. The ground state is the energy
//! reference, so there is no field for it. The atom–cavity coupling `g` is
//! real and non-negative.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raw model constants.
///
/// The two waveguide coupling points sit at `x = +d/2` (coupling `J1`) and
/// `x = -d/2` (coupling `J2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub omega_e: f64,
    pub omega_s: f64,
    pub omega_c: f64,
    pub g: f64,
    pub j1_mag: f64,
    pub j2_mag: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub v: f64,
    pub d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedRates {
    /// Total single-point damping `Γ = 2π(|J1|² + |J2|²)/v`.
    pub gamma_total: f64,
    /// Collective damping `γ = 4π|J1 J2| cos(φ1 − φ2)/v`.
    pub gamma_coll: f64,
    /// Delay between the coupling points, `d/v`.
    pub tau: f64,
    /// Atom–cavity detuning `ω_e − ω_s − ω_c`.
    pub delta: f64,
    pub lambda_e: f64,
    pub coherence_length: f64,
}

/// Dressed-state quantities of the atom–cavity block with `n + 1` excitations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubspaceParams {
    pub n: u32,
    pub g_n: f64,
    pub delta_n: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub theta_n: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
}

impl SubspaceParams {
    /// Dressed-state offsets from `ω_e`: `−δ/2 ± Δ_n`.
    pub fn shift_plus(&self, omega_e: f64) -> f64 {
        self.omega_plus - omega_e
    }

    pub fn shift_minus(&self, omega_e: f64) -> f64 {
        self.omega_minus - omega_e
    }

    pub fn cos2_theta(&self) -> f64 {
        self.theta_n.cos().powi(2)
    }

    pub fn sin2_theta(&self) -> f64 {
        self.theta_n.sin().powi(2)
    }
}

impl SystemParams {
    /// Builds a parameter set with equal coupling magnitudes from the damping
    /// rates directly. `φ1 = 0` and `φ2` is chosen so that `cos(φ1 − φ2) = γ/Γ`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_rates(
        omega_e: f64,
        omega_s: f64,
        omega_c: f64,
        g: f64,
        gamma_total: f64,
        gamma_coll: f64,
        v: f64,
        d: f64,
    ) -> Result<Self> {
        if !(gamma_total >= 0.0) || !gamma_total.is_finite() {
            return Err(Error::param("gamma_total", "must be finite and >= 0"));
        }
        if gamma_coll.abs() > gamma_total {
            return Err(Error::param(
                "gamma_coll",
                format!(
                    "|γ| = {} exceeds Γ = {}; the model requires Γ ≥ |γ|",
                    gamma_coll.abs(),
                    gamma_total
                ),
            ));
        }
        if !(v > 0.0) {
            return Err(Error::param("v", "group velocity must be > 0"));
        }
        let j = (gamma_total * v / (4.0 * PI)).sqrt();
        let ratio = if gamma_total > 0.0 { gamma_coll / gamma_total } else { 0.0 };
        let phi2 = -ratio.clamp(-1.0, 1.0).acos();
        let p = SystemParams {
            omega_e,
            omega_s,
            omega_c,
            g,
            j1_mag: j,
            j2_mag: j,
            phi1: 0.0,
            phi2,
            v,
            d,
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks every field and returns the first violation.
    pub fn validate(&self) -> Result<()> {
        self.violations().into_iter().next().map_or(Ok(()), Err)
    }

    /// All violations at once.
    pub fn violations(&self) -> Vec<Error> {
        let mut out = Vec::new();
        let fields = [
            ("omega_e", self.omega_e),
            ("omega_s", self.omega_s),
            ("omega_c", self.omega_c),
            ("g", self.g),
            ("j1_mag", self.j1_mag),
            ("j2_mag", self.j2_mag),
            ("phi1", self.phi1),
            ("phi2", self.phi2),
            ("v", self.v),
            ("d", self.d),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                out.push(Error::param(name, "must be finite"));
            }
        }
        if !(self.v > 0.0) {
            out.push(Error::param("v", "group velocity must be > 0"));
        }
        if !(self.d > 0.0) {
            out.push(Error::param("d", "coupling-point separation must be > 0"));
        }
        if !(self.omega_e > 0.0) {
            out.push(Error::param("omega_e", "excited-state frequency must be > 0"));
        }
        if self.g < 0.0 {
            out.push(Error::param("g", "atom–cavity coupling must be real and >= 0"));
        }
        if self.j1_mag < 0.0 {
            out.push(Error::param("j1_mag", "coupling magnitude must be >= 0"));
        }
        if self.j2_mag < 0.0 {
            out.push(Error::param("j2_mag", "coupling magnitude must be >= 0"));
        }
        out
    }

    pub fn gamma_total(&self) -> f64 {
        2.0 * PI * (self.j1_mag * self.j1_mag + self.j2_mag * self.j2_mag) / self.v
    }

    pub fn gamma_coll(&self) -> f64 {
        4.0 * PI * self.j1_mag * self.j2_mag * (self.phi1 - self.phi2).cos() / self.v
    }

    pub fn tau(&self) -> f64 {
        self.d / self.v
    }

    pub fn delta(&self) -> f64 {
        self.omega_e - self.omega_s - self.omega_c
    }

    /// Complex coupling `J1 = |J1| e^{iφ1}` at `x = +d/2`.
    pub fn j1(&self) -> Complex64 {
        Complex64::from_polar(self.j1_mag, self.phi1)
    }

    /// Complex coupling `J2 = |J2| e^{iφ2}` at `x = −d/2`.
    pub fn j2(&self) -> Complex64 {
        Complex64::from_polar(self.j2_mag, self.phi2)
    }

    /// `g_n = g √(n+1)`.
    pub fn g_n(&self, n: u32) -> f64 {
        self.g * f64::from(n + 1).sqrt()
    }
}

pub fn derive_rates(p: &SystemParams) -> Result<DerivedRates> {
    p.validate()?;
    let gamma_total = p.gamma_total();
    let gamma_coll = p.gamma_coll();
    // |γ| ≤ Γ follows from 2ab|cos| ≤ a² + b²; allow for rounding only.
    debug_assert!(gamma_coll.abs() <= gamma_total * (1.0 + 1e-12) + f64::MIN_POSITIVE);
    Ok(DerivedRates {
        gamma_total,
        gamma_coll,
        tau: p.tau(),
        delta: p.delta(),
        lambda_e: 2.0 * PI * p.v / p.omega_e,
        coherence_length: if gamma_total > 0.0 { p.v / gamma_total } else { f64::INFINITY },
    })
}

pub fn subspace_params(p: &SystemParams, n: u32) -> SubspaceParams {
    let g_n = p.g_n(n);
    let delta = p.delta();
    let delta_n = (g_n * g_n + delta * delta / 4.0).sqrt();
    let omega_plus = p.omega_e - delta / 2.0 + delta_n;
    let omega_minus = p.omega_e - delta / 2.0 - delta_n;
    let theta_n = if delta_n > 0.0 {
        let sin = ((2.0 * delta_n - delta) / (4.0 * delta_n)).max(0.0).sqrt();
        let cos = ((2.0 * delta_n + delta) / (4.0 * delta_n)).max(0.0).sqrt();
        sin.atan2(cos)
    } else {
        // g_n = δ = 0: no mixing, the dressed states are degenerate.
        PI / 4.0
    };
    SubspaceParams {
        n,
        g_n,
        delta_n,
        omega_plus,
        omega_minus,
        theta_n,
        lambda_plus: 2.0 * PI * p.v / omega_plus,
        lambda_minus: 2.0 * PI * p.v / omega_minus,
    }
}

/// Lab frame to the frame rotating at `ω_e`: `U = u e^{iω_e t}`.
pub fn to_rotating_frame(u_e: Complex64, u_s: Complex64, t: f64, omega_e: f64) -> (Complex64, Complex64) {
    let phase = Complex64::from_polar(1.0, omega_e * t);
    (u_e * phase, u_s * phase)
}

pub fn from_rotating_frame(big_u_e: Complex64, big_u_s: Complex64, t: f64, omega_e: f64) -> (Complex64, Complex64) {
    let phase = Complex64::from_polar(1.0, -omega_e * t);
    (big_u_e * phase, big_u_s * phase)
}
