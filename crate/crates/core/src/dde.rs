//! Method-of-steps integration of the delayed amplitude equations
//!
//! ```text
//! dU_e/dt = −i g_n U_s − (Γ/2) U_e − (γ/2) e^{iω_e τ} U_e(t−τ) Θ(t−τ)
//! dU_s/dt =  i δ  U_s − i g_n U_e
//! ```
//!
//! in the frame rotating at `ω_e`. The step is an exact divisor of `τ`, so
//! the delayed sample at the start and end of every step is a stored grid
//! value; the midpoint stage uses a cubic interpolant of the history that
//! never straddles a multiple of `τ`, where the solution has derivative
//! kinks.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::params::{derive_rates, SystemParams};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub const DEFAULT_STEPS_PER_DELAY: usize = 200;
pub const MIN_STEPS_PER_DELAY: usize = 20;
pub const DEFAULT_LOCAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialCondition {
    pub u_e0: Complex64,
    pub u_s0: Complex64,
}

impl InitialCondition {
    pub fn excited() -> Self {
        InitialCondition {
            u_e0: Complex64::new(1.0, 0.0),
            u_s0: Complex64::new(0.0, 0.0),
        }
    }

    pub fn new(u_e0: Complex64, u_s0: Complex64) -> Result<Self> {
        let ic = InitialCondition { u_e0, u_s0 };
        ic.validate()?;
        Ok(ic)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.u_e0.re, self.u_e0.im, self.u_s0.re, self.u_s0.im];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::param("init", "amplitudes must be finite"));
        }
        let norm = self.u_e0.norm_sqr() + self.u_s0.norm_sqr();
        if norm > 1.0 + 1e-12 {
            return Err(Error::param("init", format!("|u_e0|² + |u_s0|² = {norm} exceeds 1")));
        }
        Ok(())
    }
}

impl Default for InitialCondition {
    fn default() -> Self {
        Self::excited()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub steps_per_delay: usize,
    /// Bound on the a-priori local truncation error per step.
    pub local_tol: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            steps_per_delay: DEFAULT_STEPS_PER_DELAY,
            local_tol: DEFAULT_LOCAL_TOL,
        }
    }
}

impl IntegratorConfig {
    pub fn with_steps(steps_per_delay: usize) -> Self {
        IntegratorConfig {
            steps_per_delay,
            ..Self::default()
        }
    }
}

/// Rotating-frame amplitudes `U_e`, `U_s` on the grid `t_k = k·dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub n: u32,
    pub dt: f64,
    pub omega_e: f64,
    /// Grid points per delay interval, or `None` when no delayed feedback
    /// acts (point-like atom); used to keep interpolation stencils inside
    /// one smooth segment.
    pub segment: Option<usize>,
    pub u_e: Vec<Complex64>,
    pub u_s: Vec<Complex64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.u_e.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u_e.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    pub fn horizon(&self) -> f64 {
        self.time(self.len().saturating_sub(1))
    }

    /// `|U_e|² + |U_s|²` at every grid point.
    pub fn sector_norm(&self) -> Vec<f64> {
        self.u_e
            .iter()
            .zip(&self.u_s)
            .map(|(e, s)| e.norm_sqr() + s.norm_sqr())
            .collect()
    }

    /// Rotating-frame `U_e(t)` between grid points (cubic).
    pub fn u_e_at(&self, t: f64) -> Result<Complex64> {
        let h = self.horizon();
        if !(t >= 0.0) || t > h * (1.0 + 1e-12) {
            return Err(Error::BeyondHorizon { t, horizon: h });
        }
        Ok(cubic_sample(&self.u_e, self.len(), t / self.dt, self.segment))
    }

    /// Lab-frame `u_e(t) = U_e(t) e^{−iω_e t}`. The slowly varying
    /// rotating-frame amplitude is interpolated and the carrier applied
    /// exactly.
    pub fn u_e_lab_at(&self, t: f64) -> Result<Complex64> {
        Ok(self.u_e_at(t)? * Complex64::from_polar(1.0, -self.omega_e * t))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,re_ue,im_ue,re_us,im_us,p_e")?;
        for k in 0..self.len() {
            let (e, s) = (self.u_e[k], self.u_s[k]);
            writeln!(
                w,
                "{},{},{},{},{},{}",
                fmt_f64(self.time(k)),
                fmt_f64(e.re),
                fmt_f64(e.im),
                fmt_f64(s.re),
                fmt_f64(s.im),
                fmt_f64(e.norm_sqr())
            )?;
        }
        Ok(())
    }
}

/// Four-point Lagrange interpolation of `y` at fractional index `s`, using
/// only the first `avail` entries. With `segment = Some(m)` the stencil is
/// kept inside `[j·m, (j+1)·m]`.
pub(crate) fn cubic_sample(y: &[Complex64], avail: usize, s: f64, segment: Option<usize>) -> Complex64 {
    debug_assert!(avail >= 2 && avail <= y.len());
    let last = avail - 1;
    let j = (s.floor().max(0.0) as usize).min(last - 1);
    let frac = s - j as f64;
    if frac == 0.0 {
        return y[j];
    }
    let (lo, hi) = match segment {
        Some(m) => {
            let seg = j / m;
            (seg * m, ((seg + 1) * m).min(last))
        }
        None => (0, last),
    };
    if hi - lo < 3 {
        // Too few points in this segment for a cubic; fall back to linear.
        return y[j] * (1.0 - frac) + y[j + 1] * frac;
    }
    let start = j.saturating_sub(1).clamp(lo, hi - 3);
    let x = s - start as f64;
    let (y0, y1, y2, y3) = (y[start], y[start + 1], y[start + 2], y[start + 3]);
    let w0 = -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0;
    let w1 = x * (x - 2.0) * (x - 3.0) / 2.0;
    let w2 = -x * (x - 1.0) * (x - 3.0) / 2.0;
    let w3 = x * (x - 1.0) * (x - 2.0) / 6.0;
    y0 * w0 + y1 * w1 + y2 * w2 + y3 * w3
}

/// Per-subspace coefficients of the right-hand side.
#[derive(Debug, Clone, Copy)]
struct Rhs {
    g_n: f64,
    half_gamma: f64,
    /// `(γ/2) e^{iω_e τ}`
    feedback: Complex64,
    delta: f64,
}

impl Rhs {
    #[inline]
    fn eval(&self, ue: Complex64, us: Complex64, delayed: Complex64) -> (Complex64, Complex64) {
        let due = -I * self.g_n * us - ue * self.half_gamma - self.feedback * delayed;
        let dus = I * self.delta * us - I * self.g_n * ue;
        (due, dus)
    }

    /// Row-sum bound on the generator, used for the local error estimate.
    fn scale(&self) -> f64 {
        (self.g_n + self.half_gamma + self.feedback.norm()).max(self.delta.abs() + self.g_n)
    }
}

fn check_inputs(p: &SystemParams, init: &InitialCondition, t_max: f64, cfg: &IntegratorConfig) -> Result<()> {
    p.validate()?;
    init.validate()?;
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::param("t_max", "must be finite and > 0"));
    }
    if cfg.steps_per_delay < MIN_STEPS_PER_DELAY {
        return Err(Error::param(
            "steps_per_delay",
            format!("must be >= {MIN_STEPS_PER_DELAY}, got {}", cfg.steps_per_delay),
        ));
    }
    if !(cfg.local_tol > 0.0) {
        return Err(Error::param("local_tol", "must be > 0"));
    }
    Ok(())
}

fn run(
    p: &SystemParams,
    n: u32,
    init: &InitialCondition,
    t_max: f64,
    cfg: &IntegratorConfig,
    delayed: bool,
) -> Result<Trajectory> {
    check_inputs(p, init, t_max, cfg)?;
    let rates = derive_rates(p)?;
    let m = cfg.steps_per_delay;
    let dt = rates.tau / m as f64;
    let rhs = Rhs {
        g_n: p.g_n(n),
        half_gamma: rates.gamma_total / 2.0,
        feedback: if delayed {
            Complex64::from_polar(rates.gamma_coll / 2.0, p.omega_e * rates.tau)
        } else {
            Complex64::new(0.0, 0.0)
        },
        delta: rates.delta,
    };
    // Classical RK4 on a linear system: local error ≈ (‖A‖dt)^5 / 120.
    let estimate = (rhs.scale() * dt).powi(5) / 120.0;
    if estimate > cfg.local_tol {
        return Err(Error::StepSize {
            estimate,
            tolerance: cfg.local_tol,
        });
    }

    let steps = (t_max / dt - 1e-9).ceil().max(1.0) as usize;
    let mut u_e = Vec::with_capacity(steps + 1);
    let mut u_s = Vec::with_capacity(steps + 1);
    u_e.push(init.u_e0);
    u_s.push(init.u_s0);
    let zero = Complex64::new(0.0, 0.0);
    let (h, h2) = (dt, dt / 2.0);

    for k in 0..steps {
        let (ue, us) = (u_e[k], u_s[k]);
        // Step [t_k, t_{k+1}] lies entirely before τ when k < m; the
        // feedback switches on exactly at the node t = τ.
        let (d0, dmid, d1) = if delayed && k >= m {
            let j = k - m;
            (u_e[j], cubic_sample(&u_e, k + 1, j as f64 + 0.5, Some(m)), u_e[j + 1])
        } else {
            (zero, zero, zero)
        };
        let (k1e, k1s) = rhs.eval(ue, us, d0);
        let (k2e, k2s) = rhs.eval(ue + k1e * h2, us + k1s * h2, dmid);
        let (k3e, k3s) = rhs.eval(ue + k2e * h2, us + k2s * h2, dmid);
        let (k4e, k4s) = rhs.eval(ue + k3e * h, us + k3s * h, d1);
        let ne = ue + (k1e + k2e * 2.0 + k3e * 2.0 + k4e) * (h / 6.0);
        let ns = us + (k1s + k2s * 2.0 + k3s * 2.0 + k4s) * (h / 6.0);
        if !(ne.re.is_finite() && ne.im.is_finite() && ns.re.is_finite() && ns.im.is_finite()) {
            return Err(Error::Degenerate(format!("non-finite amplitude at step {k}")));
        }
        u_e.push(ne);
        u_s.push(ns);
    }

    Ok(Trajectory {
        n,
        dt,
        omega_e: p.omega_e,
        segment: delayed.then_some(m),
        u_e,
        u_s,
    })
}

/// Integrates the giant-atom equations for subspace `n` up to `t_max`.
pub fn integrate(p: &SystemParams, n: u32, init: &InitialCondition, t_max: f64, cfg: &IntegratorConfig) -> Result<Trajectory> {
    run(p, n, init, t_max, cfg, true)
}

/// Same equations with the delayed feedback removed: a point-like
/// three-level atom. The grid spacing is still `τ / steps_per_delay`.
pub fn integrate_point_atom(
    p: &SystemParams,
    n: u32,
    init: &InitialCondition,
    t_max: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    run(p, n, init, t_max, cfg, false)
}

/// Excited-state population `|U_e|²`; the frame rotation leaves the modulus unchanged.
pub fn population(traj: &Trajectory) -> Vec<f64> {
    traj.u_e.iter().map(|u| u.norm_sqr()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn params(omega_e: f64, g: f64, gamma_coll: f64) -> SystemParams {
        SystemParams::from_rates(omega_e, 1.0, omega_e - 1.0, g, 1.0, gamma_coll, 1.0, 1.0).unwrap()
    }

    #[test]
    fn empty_excitation_stays_empty() {
        let p = params(202.0 * PI, PI, 1.0);
        let init = InitialCondition::new(Complex64::default(), Complex64::default()).unwrap();
        let tr = integrate(&p, 0, &init, 5.0, &IntegratorConfig::default()).unwrap();
        assert!(population(&tr).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn starts_at_initial_population() {
        let p = params(202.0 * PI, PI, 1.0);
        let tr = integrate(&p, 0, &InitialCondition::excited(), 1.0, &IntegratorConfig::default()).unwrap();
        assert_eq!(population(&tr)[0], 1.0);
        assert_eq!(tr.len(), 201);
        assert_eq!(tr.dt, 0.005);
    }

    #[test]
    fn exponential_population_at_one_lifetime() {
        let mut p = params(100.0, 0.0, 0.0);
        p.phi2 = PI / 2.0;
        let tr = integrate(&p, 0, &InitialCondition::excited(), 1.0, &IntegratorConfig::default()).unwrap();
        let pop = population(&tr);
        assert!((pop[pop.len() - 1] - (-1.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn rejects_coarse_grid_and_bad_horizon() {
        let p = params(100.0, 0.3, 1.0);
        let ic = InitialCondition::excited();
        assert!(matches!(
            integrate(&p, 0, &ic, 1.0, &IntegratorConfig::with_steps(10)),
            Err(Error::InvalidParameter {
                name: "steps_per_delay",
                ..
            })
        ));
        assert!(integrate(&p, 0, &ic, 0.0, &IntegratorConfig::default()).is_err());
        assert!(integrate(&p, 0, &ic, f64::NAN, &IntegratorConfig::default()).is_err());
        let mut bad = p;
        bad.g = f64::INFINITY;
        assert!(integrate(&bad, 0, &ic, 1.0, &IntegratorConfig::default()).is_err());
    }

    #[test]
    fn reports_step_size_failure() {
        let p = params(100.0, 40.0, 1.0);
        let r = integrate(&p, 0, &InitialCondition::excited(), 1.0, &IntegratorConfig::default());
        assert!(matches!(r, Err(Error::StepSize { .. })), "{r:?}");
        // Refining the grid cures it.
        assert!(integrate(
            &p,
            0,
            &InitialCondition::excited(),
            1.0,
            &IntegratorConfig::with_steps(20_000)
        )
        .is_ok());
    }

    #[test]
    fn feedback_phase_is_invisible_before_the_delay() {
        let a = integrate(
            &params(201.0 * PI, 0.8, 1.0),
            0,
            &InitialCondition::excited(),
            3.0,
            &IntegratorConfig::default(),
        )
        .unwrap();
        let b = integrate(
            &params(201.5 * PI, 0.8, 1.0),
            0,
            &InitialCondition::excited(),
            3.0,
            &IntegratorConfig::default(),
        )
        .unwrap();
        for k in 0..=200 {
            assert_eq!(a.u_e[k], b.u_e[k], "step {k}");
        }
        assert_ne!(a.u_e[260], b.u_e[260]);
    }

    #[test]
    fn norm_decays_before_feedback_and_never_exceeds_one() {
        let p = params(201.0 * PI, 0.0, 1.0);
        let tr = integrate(&p, 0, &InitialCondition::excited(), 20.0, &IntegratorConfig::default()).unwrap();
        let norm = tr.sector_norm();
        assert!(norm.iter().all(|&x| x <= 1.0 + 1e-12));
        for w in norm[..=200].windows(2) {
            assert!(w[1] <= w[0] + 1e-9);
        }
        // Re-absorption between the coupling points: the population rises
        // again on (τ, 2τ).
        assert!(norm[300] > norm[200]);
    }

    #[test]
    fn grid_refinement_is_fourth_order() {
        let p = params(202.0 * PI, 1.3, 1.0);
        let ic = InitialCondition::excited();
        let at_end = |m: usize| {
            let tr = integrate(
                &p,
                0,
                &ic,
                6.0,
                &IntegratorConfig {
                    steps_per_delay: m,
                    local_tol: 1.0,
                },
            )
            .unwrap();
            tr.u_e[tr.len() - 1]
        };
        let (a, b, c) = (at_end(25), at_end(50), at_end(100));
        let ratio = (a - b).norm() / (b - c).norm();
        // 2^4 = 16 for a fourth-order scheme.
        assert!(ratio > 12.0, "convergence ratio {ratio}");
    }

    #[test]
    fn cubic_sample_is_exact_for_cubics() {
        let f = |x: f64| Complex64::new(x * x * x - 2.0 * x, 0.5 * x * x);
        let y: Vec<Complex64> = (0..12).map(|k| f(k as f64)).collect();
        for s in [0.3, 4.5, 9.9, 10.7] {
            assert!((cubic_sample(&y, 12, s, None) - f(s)).norm() < 1e-12);
        }
        for s in [0.3, 4.5, 5.2, 9.9] {
            assert!((cubic_sample(&y, 12, s, Some(5)) - f(s)).norm() < 1e-12);
        }
        // The trailing segment [10, 11] has a single interval: linear.
        let lin = y[10] * 0.3 + y[11] * 0.7;
        assert!((cubic_sample(&y, 12, 10.7, Some(5)) - lin).norm() < 1e-12);
    }

    #[test]
    fn cubic_sample_respects_segments() {
        // A kink at index 5 must not leak into interpolation on either side.
        let y: Vec<Complex64> = (0..12)
            .map(|k| Complex64::new(if k <= 5 { k as f64 } else { 10.0 - k as f64 }, 0.0))
            .collect();
        assert!((cubic_sample(&y, 12, 4.5, Some(5)).re - 4.5).abs() < 1e-14);
        assert!((cubic_sample(&y, 12, 5.5, Some(5)).re - 4.5).abs() < 1e-14);
    }

    #[test]
    fn csv_header_and_rows() {
        let p = params(50.0, 0.5, 1.0);
        let tr = integrate(&p, 0, &InitialCondition::excited(), 0.2, &IntegratorConfig::default()).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,re_ue,im_ue,re_us,im_us,p_e"));
        assert_eq!(lines.next(), Some("0,1,0,0,0,1"));
        assert_eq!(text.lines().count(), tr.len() + 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn integration_is_linear(
            a_re in -0.5f64..0.5, a_im in -0.5f64..0.5, b_re in -0.5f64..0.5, b_im in -0.5f64..0.5,
            g in 0.0f64..3.0, phase in 0.0f64..6.3,
        ) {
            let p = params(200.0 * PI + phase, g, 1.0);
            let cfg = IntegratorConfig::default();
            let ia = InitialCondition::new(Complex64::new(a_re, a_im), Complex64::default()).unwrap();
            let ib = InitialCondition::new(Complex64::default(), Complex64::new(b_re, b_im)).unwrap();
            let sum = InitialCondition::new(ia.u_e0, ib.u_s0).unwrap();
            let (ta, tb, ts) = (
                integrate(&p, 0, &ia, 3.0, &cfg).unwrap(),
                integrate(&p, 0, &ib, 3.0, &cfg).unwrap(),
                integrate(&p, 0, &sum, 3.0, &cfg).unwrap(),
            );
            for k in 0..ts.len() {
                prop_assert!((ta.u_e[k] + tb.u_e[k] - ts.u_e[k]).norm() < 1e-12);
                prop_assert!((ta.u_s[k] + tb.u_s[k] - ts.u_s[k]).norm() < 1e-12);
            }
        }

        #[test]
        fn sector_norm_bounded(g in 0.0f64..3.0, gc in -1.0f64..1.0, phase in 0.0f64..6.3) {
            let p = params(200.0 * PI + phase, g, gc);
            let tr = integrate(&p, 0, &InitialCondition::excited(), 6.0, &IntegratorConfig::default()).unwrap();
            prop_assert!(tr.sector_norm().iter().all(|&x| x <= 1.0 + 1e-9));
        }
    }
}
