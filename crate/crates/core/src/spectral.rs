//! Bound states in the continuum: pure-imaginary poles of the resolvent,
//! their long-time residues, and parameter design for one, two, or
//! cross-subspace bound states.
//!
//! A pole `s = −iω` on the imaginary axis requires
//!
//! ```text
//! ((γ/2) sin((ω+ω_e)τ) − ω)(ω+δ) + g_n² = 0
//! (Γ/2 + (γ/2) cos((ω+ω_e)τ))(ω+δ)       = 0
//! ```
//!
//! With `Γ = ±γ` the second line forces a phase condition and the first
//! then reduces to the dressed-state equation, so the only candidates are
//! the dressed shifts `ω = −δ/2 ± Δ_n`. The search tests those two values
//! rather than scanning the plane.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dde::InitialCondition;
use crate::error::{Error, Result};
use crate::params::{derive_rates, subspace_params, SubspaceParams, SystemParams};

pub const DEFAULT_TOL: f64 = 1e-9;

/// Tolerance on `δ` for operations that are only defined at resonance.
const RESONANCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Plus => "+",
            Branch::Minus => "-",
        })
    }
}

/// Which phase condition applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Interference {
    /// `Γ = γ`: `(ω+ω_e)τ = (2q+1)π`.
    Destructive,
    /// `Γ = −γ`: `(ω+ω_e)τ = 2qπ`.
    Constructive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BicSolution {
    pub n: u32,
    pub branch: Branch,
    /// Pole frequency in the rotating frame, `ω'_{n±}`.
    pub omega: f64,
    pub q: i64,
    /// Long-time coefficient of the lab-frame `u_ne` for the initial
    /// condition the search was run with.
    pub residue_e: Complex64,
    pub phase_residual: f64,
}

impl BicSolution {
    /// Lab-frame frequency `ω_e + ω'`.
    pub fn lab_frequency(&self, omega_e: f64) -> f64 {
        omega_e + self.omega
    }

    /// Lab-frame long-time component `u_ne^±(t)`.
    pub fn amplitude_at(&self, omega_e: f64, t: f64) -> Complex64 {
        self.residue_e * Complex64::from_polar(1.0, -self.lab_frequency(omega_e) * t)
    }
}

/// A phase condition missed by less than ten times the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NearMiss {
    pub n: u32,
    pub branch: Branch,
    pub omega: f64,
    pub q: i64,
    pub phase_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BicSearch {
    pub solutions: Vec<BicSolution>,
    pub near_misses: Vec<NearMiss>,
}

fn interference(p: &SystemParams, tol: f64) -> Result<Option<Interference>> {
    let r = derive_rates(p)?;
    if !(r.gamma_total > 0.0) || (r.gamma_total - r.gamma_coll.abs()).abs() > tol * r.gamma_total {
        return Ok(None);
    }
    Ok(Some(if r.gamma_coll > 0.0 {
        Interference::Destructive
    } else {
        Interference::Constructive
    }))
}

fn nearest_q(phase: f64, kind: Interference) -> (i64, f64) {
    match kind {
        Interference::Destructive => {
            let q = ((phase / PI - 1.0) / 2.0).round();
            (q as i64, (phase - (2.0 * q + 1.0) * PI).abs())
        }
        Interference::Constructive => {
            let q = (phase / (2.0 * PI)).round();
            (q as i64, (phase - 2.0 * q * PI).abs())
        }
    }
}

/// Residuals of the two pole equations at the rotating-frame frequency `omega`.
pub fn pole_residuals(p: &SystemParams, n: u32, omega: f64) -> (f64, f64) {
    let (gamma_total, gamma_coll) = (p.gamma_total(), p.gamma_coll());
    let (tau, delta, g_n) = (p.tau(), p.delta(), p.g_n(n));
    let phase = (omega + p.omega_e) * tau;
    let real = (gamma_coll / 2.0 * phase.sin() - omega) * (omega + delta) + g_n * g_n;
    let imag = (gamma_total / 2.0 + gamma_coll / 2.0 * phase.cos()) * (omega + delta);
    (real.abs(), imag.abs())
}

/// Long-time residue of `u_ne` on one dressed branch.
///
/// With `g_n = 0` the atom decouples from the cavity and the only trapped
/// component is the bare excited state, weight `2/(|γ|τ + 2)`.
pub fn branch_residue(p: &SystemParams, sub: &SubspaceParams, branch: Branch, init: &InitialCondition) -> Result<Complex64> {
    let gt = p.gamma_coll().abs() * p.tau();
    if sub.g_n == 0.0 {
        let carries_excited = match branch {
            Branch::Plus => p.delta() >= 0.0,
            Branch::Minus => p.delta() < 0.0,
        };
        return Ok(if carries_excited {
            init.u_e0 * (2.0 / (gt + 2.0))
        } else {
            Complex64::new(0.0, 0.0)
        });
    }
    let (weight, denom) = match branch {
        Branch::Plus => (sub.cos2_theta(), p.delta() + 2.0 * sub.delta_n),
        Branch::Minus => (sub.sin2_theta(), p.delta() - 2.0 * sub.delta_n),
    };
    if denom == 0.0 {
        return Err(Error::Degenerate(format!("δ ± 2Δ_n vanishes on the {branch} branch")));
    }
    let coef = 2.0 * weight / (gt * weight + 2.0);
    Ok((init.u_e0 + init.u_s0 * (2.0 * sub.g_n / denom)) * coef)
}

/// Pure-imaginary poles in subspace `n`, with residues for `init`.
pub fn find_bics_with_init(p: &SystemParams, n: u32, init: &InitialCondition, tol: f64) -> Result<BicSearch> {
    init.validate()?;
    if !(tol > 0.0) {
        return Err(Error::param("tol", "must be > 0"));
    }
    let Some(kind) = interference(p, tol)? else {
        return Ok(BicSearch::default());
    };
    let sub = subspace_params(p, n);
    let candidates: Vec<(Branch, f64)> = if sub.g_n == 0.0 {
        // Bare excited state; the cavity-like pole at ω = −δ carries no
        // excited-state weight.
        let branch = if p.delta() >= 0.0 { Branch::Plus } else { Branch::Minus };
        vec![(branch, 0.0)]
    } else {
        vec![
            (Branch::Plus, sub.shift_plus(p.omega_e)),
            (Branch::Minus, sub.shift_minus(p.omega_e)),
        ]
    };

    let mut out = BicSearch::default();
    for (branch, omega) in candidates {
        let phase = (omega + p.omega_e) * p.tau();
        let (q, phase_residual) = nearest_q(phase, kind);
        let (ra, rb) = pole_residuals(p, n, omega);
        if phase_residual < tol && ra < tol && rb < tol {
            out.solutions.push(BicSolution {
                n,
                branch,
                omega,
                q,
                residue_e: branch_residue(p, &sub, branch, init)?,
                phase_residual,
            });
        } else if phase_residual < 10.0 * tol {
            out.near_misses.push(NearMiss {
                n,
                branch,
                omega,
                q,
                phase_residual,
            });
        }
    }
    Ok(out)
}

/// Pure-imaginary poles in subspace `n`; residues refer to an atom
/// starting in its excited state.
pub fn find_bics(p: &SystemParams, n: u32, tol: f64) -> Result<BicSearch> {
    find_bics_with_init(p, n, &InitialCondition::excited(), tol)
}

/// Sum of the emergent long-time components, lab frame.
pub fn longtime_from(solutions: &[BicSolution], omega_e: f64, t: f64) -> Complex64 {
    solutions.iter().map(|s| s.amplitude_at(omega_e, t)).sum()
}

/// Long-time lab-frame amplitude `u_ne(t)` once all decaying poles have died out.
/// Zero when no bound state exists.
pub fn longtime_amplitude(p: &SystemParams, n: u32, init: &InitialCondition, t: f64) -> Result<Complex64> {
    let search = find_bics_with_init(p, n, init, DEFAULT_TOL)?;
    Ok(longtime_from(&search.solutions, p.omega_e, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubleBicDesign {
    pub omega_e: f64,
    pub g_n: f64,
    pub q_plus: i64,
    pub q_minus: i64,
    pub tau: f64,
}

impl DoubleBicDesign {
    /// Parameters realizing the design in subspace `n` at resonance, with
    /// `Γ = γ = gamma_total`, the given `v`, and `ω_s`.
    pub fn to_params(&self, n: u32, gamma_total: f64, v: f64, omega_s: f64) -> Result<SystemParams> {
        let g = self.g_n / f64::from(n + 1).sqrt();
        let omega_c = self.omega_e - omega_s;
        SystemParams::from_rates(self.omega_e, omega_s, omega_c, g, gamma_total, gamma_total, v, self.tau * v)
    }
}

/// Resonant parameters hosting two bound states with indices `q_plus`,
/// `q_minus` (for `Γ = γ`): `ω_e τ = (q⁺ + q⁻ + 1)π`, `g_n τ = (q⁺ − q⁻)π`.
///
/// The difference `q⁺ − q⁻` fixes `g_n`. If the sum does not put `ω_e` at
/// the allowed value closest to `omega_e_target`, both indices are shifted
/// by the same amount until it does.
pub fn design_double_bic(omega_e_target: f64, tau: f64, q_plus: i64, q_minus: i64) -> Result<DoubleBicDesign> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::param("tau", "must be finite and > 0"));
    }
    if !(q_plus > q_minus && q_minus >= 0) {
        return Err(Error::param("q_plus", "need q_plus > q_minus >= 0"));
    }
    let diff = q_plus - q_minus;
    let mut q_minus = q_minus;
    if omega_e_target.is_finite() {
        // ω_e τ/π − 1 = 2q⁻ + diff
        let wanted = (omega_e_target * tau / PI - 1.0 - diff as f64) / 2.0;
        q_minus = wanted.round().max(0.0) as i64;
    }
    let q_plus = q_minus + diff;
    let omega_e = (q_plus + q_minus + 1) as f64 * PI / tau;
    let g_n = diff as f64 * PI / tau;
    // ω_{n−} = (2q⁻+1)π/τ > 0 by construction.
    debug_assert!(omega_e - g_n > 0.0);
    Ok(DoubleBicDesign {
        omega_e,
        g_n,
        q_plus,
        q_minus,
        tau,
    })
}

fn require_resonance(p: &SystemParams) -> Result<()> {
    if p.delta().abs() > RESONANCE_TOL {
        return Err(Error::Precondition(format!("requires δ = 0, got δ = {}", p.delta())));
    }
    Ok(())
}

/// Candidate separation for one bound state in subspace `m` (branch `alpha`,
/// index `q_m`) to coexist with one in subspace `n` (branch `beta`, index
/// `q_n`): `d = 2πv(q_m − q_n)/(α g_m − β g_n)`.
///
/// This is only the difference of the two phase conditions; confirm a
/// candidate with [`design_coexistence`].
#[allow(clippy::too_many_arguments)]
pub fn coexistence_distance(p: &SystemParams, m: u32, n: u32, alpha: Branch, beta: Branch, q_m: i64, q_n: i64) -> Result<f64> {
    require_resonance(p)?;
    let denom = alpha.sign() * p.g_n(m) - beta.sign() * p.g_n(n);
    let scale = p.g_n(m) + p.g_n(n);
    if denom == 0.0 || denom.abs() <= 1e-12 * scale {
        return Err(Error::Degenerate("α g_m − β g_n vanishes".into()));
    }
    let d = 2.0 * PI * p.v * (q_m - q_n) as f64 / denom;
    if !(d > 0.0) {
        return Err(Error::Degenerate(format!(
            "indices q_m = {q_m}, q_n = {q_n} give non-positive separation {d}"
        )));
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoexistenceDesign {
    pub d: f64,
    pub omega_e: f64,
    /// `find_bics` confirmed the requested branch in both subspaces.
    pub verified: bool,
}

/// Places `d` from [`coexistence_distance`], then moves `ω_e` (keeping
/// `δ = 0` via `ω_c`) onto the phase condition of subspace `m`, and checks
/// both subspaces with the pole finder.
#[allow(clippy::too_many_arguments)]
pub fn design_coexistence(
    p: &SystemParams,
    m: u32,
    n: u32,
    alpha: Branch,
    beta: Branch,
    q_m: i64,
    q_n: i64,
) -> Result<(SystemParams, CoexistenceDesign)> {
    let d = coexistence_distance(p, m, n, alpha, beta, q_m, q_n)?;
    let Some(kind) = interference(p, DEFAULT_TOL)? else {
        return Err(Error::Precondition("bound states need Γ = |γ|".into()));
    };
    let tau = d / p.v;
    let target_phase = match kind {
        Interference::Destructive => (2 * q_m + 1) as f64 * PI,
        Interference::Constructive => 2.0 * q_m as f64 * PI,
    };
    let omega_e = target_phase / tau - alpha.sign() * p.g_n(m);
    let mut q = *p;
    q.d = d;
    q.omega_c += omega_e - q.omega_e;
    q.omega_e = omega_e;
    for (k, b) in [(m, alpha), (n, beta)] {
        let w = omega_e + b.sign() * q.g_n(k);
        if !(w > 0.0) {
            return Err(Error::Degenerate(format!(
                "dressed frequency ω_{{{k}{b}}} = {w} is not positive"
            )));
        }
    }
    let has = |k: u32, b: Branch| -> Result<bool> { Ok(find_bics(&q, k, DEFAULT_TOL)?.solutions.iter().any(|s| s.branch == b)) };
    let verified = has(m, alpha)? && has(n, beta)?;
    Ok((q, CoexistenceDesign { d, omega_e, verified }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioCheck {
    pub rational: bool,
    /// `(q_n⁺ − q_n⁻, q_m⁺ − q_m⁻)` in lowest terms.
    pub witness: Option<(u64, u64)>,
    /// `Δ_n / Δ_m = √((n+1)/(m+1))`.
    pub ratio: f64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn exact_sqrt(x: u64) -> Option<u64> {
    let r = (x as f64).sqrt().round() as u64;
    (r.saturating_sub(1)..=r + 1).find(|c| c * c == x)
}

/// Whether oscillating bound states can coexist in subspaces `n` and `m`:
/// `Δ_n/Δ_m` must be a ratio of integers.
pub fn oscillation_ratio_check(p: &SystemParams, m: u32, n: u32) -> Result<RatioCheck> {
    require_resonance(p)?;
    let (a, b) = (u64::from(n) + 1, u64::from(m) + 1);
    let k = gcd(a, b);
    let (a, b) = (a / k, b / k);
    let ratio = (a as f64 / b as f64).sqrt();
    let witness = exact_sqrt(a).zip(exact_sqrt(b));
    if let Some((x, y)) = witness {
        debug_assert!((x as f64 / y as f64 - ratio).abs() < 1e-9);
    }
    Ok(RatioCheck {
        rational: witness.is_some(),
        witness,
        ratio,
    })
}
