//! Emitted field in the waveguide, rebuilt from retarded atomic amplitudes.
//!
//! A photon emitted at the coupling point `x = +d/2` (coupling `J1`) reaches
//! `x` after `|x/v − τ/2|`; one emitted at `x = −d/2` after `|x/v + τ/2|`.
//! With equal coupling magnitudes and `φ1 − φ2 = kπ`,
//!
//! ```text
//! Ψ(x,t) = −i A [e^{iφ1} u_e(t − |τ_x⁻|) Θ(t − |τ_x⁻|) + e^{iφ2} u_e(t − |τ_x⁺|) Θ(t − |τ_x⁺|)]
//! ```
//!
//! with `A = √(Γ/4v)`. That prefactor makes the outgoing flux `2v|Ψ|²`
//! equal the population loss rate `Γ|u_e|²` of the amplitude equations, and
//! it agrees with the discretized-mode oracle. Inside the atom, a bound
//! state at frequency `ω` superposes both retarded terms into the standing
//! wave `2A e^{iφ1} u_e(t) sin(ω(d − 2x)/2v)`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dde::Trajectory;
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::params::{SubspaceParams, SystemParams};
use crate::spectral::BicSolution;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub nt: usize,
}

impl SpacetimeGrid {
    pub fn new(x_min: f64, x_max: f64, nx: usize, t_min: f64, t_max: f64, nt: usize) -> Result<Self> {
        let g = SpacetimeGrid {
            x_min,
            x_max,
            nx,
            t_min,
            t_max,
            nt,
        };
        g.validate()?;
        Ok(g)
    }

    /// `x ∈ [−3d, 3d]` with 601 points, `t ∈ [0, 50/Γ]` with 1001 points.
    pub fn default_for(p: &SystemParams) -> Self {
        let gamma = p.gamma_total();
        let t_max = if gamma > 0.0 { 50.0 / gamma } else { 50.0 };
        SpacetimeGrid {
            x_min: -3.0 * p.d,
            x_max: 3.0 * p.d,
            nx: 601,
            t_min: 0.0,
            t_max,
            nt: 1001,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.t_min, self.t_max].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::param("grid", "bounds must be finite"));
        }
        if !(self.x_min < self.x_max) {
            return Err(Error::param("grid", "need x_min < x_max"));
        }
        if !(self.t_min <= self.t_max) {
            return Err(Error::param("grid", "need t_min <= t_max"));
        }
        if self.nx < 2 || self.nt < 2 {
            return Err(Error::param("grid", "need nx, nt >= 2"));
        }
        Ok(())
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + (self.x_max - self.x_min) * i as f64 / (self.nx - 1) as f64
    }

    pub fn t(&self, j: usize) -> f64 {
        self.t_min + (self.t_max - self.t_min) * j as f64 / (self.nt - 1) as f64
    }
}

/// `I(x_i, t_j)`, stored row-major with time as the outer index.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityField {
    pub grid: SpacetimeGrid,
    pub values: Vec<f64>,
}

impl IntensityField {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.nx + i]
    }

    /// One time slice `I(·, t_j)`.
    pub fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.grid.nx..(j + 1) * self.grid.nx]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// CSV `x,t,intensity`, time-major.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,t,intensity")?;
        for j in 0..self.grid.nt {
            let t = fmt_f64(self.grid.t(j));
            for i in 0..self.grid.nx {
                writeln!(w, "{},{},{}", fmt_f64(self.grid.x(i)), t, fmt_f64(self.at(i, j)))?;
            }
        }
        Ok(())
    }
}

/// The propagating-field formula needs `|J1| = |J2|` and `φ1 − φ2 = kπ`.
pub fn check_field_preconditions(p: &SystemParams) -> Result<()> {
    let scale = p.j1_mag.max(p.j2_mag).max(f64::MIN_POSITIVE);
    if (p.j1_mag - p.j2_mag).abs() > 1e-12 * scale {
        return Err(Error::Precondition(format!(
            "field reconstruction needs |J1| = |J2|, got {} and {}",
            p.j1_mag, p.j2_mag
        )));
    }
    let k = (p.phi1 - p.phi2) / PI;
    if (k - k.round()).abs() > 1e-9 {
        return Err(Error::Precondition(format!(
            "field reconstruction needs φ1 − φ2 = kπ, got {}π",
            k
        )));
    }
    Ok(())
}

/// Prefactor of each retarded term, `√(Γ/4v)`.
pub fn propagating_prefactor(p: &SystemParams) -> f64 {
    (p.gamma_total() / (4.0 * p.v)).sqrt()
}

/// Prefactor of the standing bound-state wave, `√(Γ/v)` (twice the propagating one).
pub fn standing_prefactor(p: &SystemParams) -> f64 {
    (p.gamma_total() / p.v).sqrt()
}

/// Retardation times `(|τ_x⁻|, |τ_x⁺|)` from the points at `+d/2` and `−d/2`.
pub fn retardations(p: &SystemParams, x: f64) -> (f64, f64) {
    let half = p.tau() / 2.0;
    ((x / p.v - half).abs(), (x / p.v + half).abs())
}

fn amplitude_unchecked(traj: &Trajectory, p: &SystemParams, prefactor: f64, x: f64, t: f64) -> Result<Complex64> {
    let (tm, tp) = retardations(p, x);
    let mut psi = Complex64::new(0.0, 0.0);
    if t >= tm {
        psi += Complex64::from_polar(prefactor, p.phi1) * traj.u_e_lab_at(t - tm)?;
    }
    if t >= tp {
        psi += Complex64::from_polar(prefactor, p.phi2) * traj.u_e_lab_at(t - tp)?;
    }
    Ok(-I * psi)
}

/// Emitted amplitude `Ψ_n(x, t)`. Exactly zero before the first retarded
/// signal arrives.
pub fn emitted_amplitude(traj: &Trajectory, p: &SystemParams, x: f64, t: f64) -> Result<Complex64> {
    check_field_preconditions(p)?;
    amplitude_unchecked(traj, p, propagating_prefactor(p), x, t)
}

/// `I_n(x, t) = |Ψ_n(x, t)|²` on every grid point. Rows are evaluated in
/// parallel; the output order is fixed.
pub fn intensity_map(traj: &Trajectory, p: &SystemParams, grid: &SpacetimeGrid) -> Result<IntensityField> {
    check_field_preconditions(p)?;
    grid.validate()?;
    let a = propagating_prefactor(p);
    let rows: Vec<Vec<f64>> = (0..grid.nt)
        .into_par_iter()
        .map(|j| {
            let t = grid.t(j);
            (0..grid.nx)
                .map(|i| amplitude_unchecked(traj, p, a, grid.x(i), t).map(|z| z.norm_sqr()))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(IntensityField {
        grid: *grid,
        values: rows.concat(),
    })
}

/// Closed-form long-time field of the emergent bound states: a standing
/// wave between the coupling points, zero outside.
pub fn steady_bic_field(p: &SystemParams, solutions: &[BicSolution], x: f64, t: f64) -> Complex64 {
    let half_d = p.d / 2.0;
    if x < -half_d || x > half_d {
        return Complex64::new(0.0, 0.0);
    }
    let pref = Complex64::from_polar(standing_prefactor(p), p.phi1);
    solutions
        .iter()
        .map(|s| {
            let w = s.lab_frequency(p.omega_e);
            let arg = w * (p.d - 2.0 * x) / (2.0 * p.v);
            // Bound-state frequencies satisfy ωτ = kπ, so both ends are nodes.
            let shape = if x == half_d || x == -half_d { 0.0 } else { arg.sin() };
            pref * s.amplitude_at(p.omega_e, t) * shape
        })
        .sum()
}

/// Temporal period of the two-bound-state beat, `2π/|ω_{n+} − ω_{n−}| = π/Δ_n`.
pub fn beat_period(sub: &SubspaceParams) -> Result<f64> {
    if !(sub.delta_n > 0.0) {
        return Err(Error::Degenerate("Δ_n = 0: dressed states are degenerate".into()));
    }
    Ok(PI / sub.delta_n)
}

/// Spatial beat length `λ_nb = 2πv/(ω_{n+} − ω_{n−})`.
pub fn beat_wavelength(sub: &SubspaceParams, v: f64) -> Result<f64> {
    Ok(beat_period(sub)? * v)
}
