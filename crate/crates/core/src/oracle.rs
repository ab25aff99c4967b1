//! Brute-force cross-check: the waveguide continuum discretized into a
//! finite set of modes and the full single-excitation Schrödinger equation
//! integrated directly, with no delay equation involved.
//!
//! Each frequency channel `ω_j = v κ_j`, `κ_j = κ_min + (j + ½)·dκ`, carries
//! a right-moving wave `e^{iκ_j x}` and a left-moving wave `e^{−iκ_j x}`.
//! With `κ_min = 0` this is exactly the `ω = v|k|` line. A negative
//! `κ_min` continues both directions below zero frequency, which is the
//! flat band the delay equation assumes; the band is then symmetric about
//! `ω_e` and the edges stay far from every frequency of interest.
//!
//! Every mode starts in vacuum and obeys `ψ̇ = −iΔ_j ψ − i c U_e` (frame
//! rotating at `ω_e`, `Δ_j = vκ_j − ω_e`), so `ψ_{±κ_j} = c(±κ_j) f_j` with
//! one driven oscillator `f_j` per channel. The atom sees `Σ_j w_j f_j` with
//! `w_j = (|c(κ_j)|² + |c(−κ_j)|²)·dκ`.
//!
//! The per-mode coupling is `c(k) = (J1 e^{−ikd/2} + J2 e^{ikd/2})/√2`; the
//! `1/√2` makes the continuum limit reproduce the damping `Γ/2` and the
//! feedback `γ/2` of the delay equation exactly.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dde::{InitialCondition, Trajectory};
use crate::error::{Error, Result};
use crate::field::{IntensityField, SpacetimeGrid};
use crate::params::SystemParams;

pub const DEFAULT_MODES: usize = 8192;
/// Largest `|Δ_j|·dt` accepted by the stepper.
pub const MAX_PHASE_STEP: f64 = 0.1;
/// Recurrence time over horizon kept by the default band.
const RECURRENCE_MARGIN: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeGrid {
    pub k_min: f64,
    pub k_max: f64,
    /// Channels; each holds one right- and one left-moving mode.
    pub modes: usize,
    pub dk: f64,
}

impl ModeGrid {
    pub fn new(k_min: f64, k_max: f64, modes: usize) -> Result<Self> {
        if !(k_min.is_finite() && k_max.is_finite() && k_max > k_min) {
            return Err(Error::param("k_max", "need finite k_min < k_max"));
        }
        if modes < 2 {
            return Err(Error::param("modes", "need at least 2 modes per direction"));
        }
        Ok(ModeGrid {
            k_min,
            k_max,
            modes,
            dk: (k_max - k_min) / modes as f64,
        })
    }

    /// Band `vκ ∈ [ω_e − W, ω_e + W]`.
    pub fn centred(p: &SystemParams, half_width: f64, modes: usize) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::param("half_width", "must be > 0"));
        }
        Self::new((p.omega_e - half_width) / p.v, (p.omega_e + half_width) / p.v, modes)
    }

    /// Widest centred band whose first echo still arrives after `horizon`.
    pub fn for_horizon(p: &SystemParams, modes: usize, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(Error::param("horizon", "must be > 0"));
        }
        let span = RECURRENCE_MARGIN * (horizon + p.tau());
        Self::centred(p, PI * modes as f64 / span, modes)
    }

    pub fn k(&self, j: usize) -> f64 {
        self.k_min + (j as f64 + 0.5) * self.dk
    }

    /// Signed wavenumber of entry `idx` of [`FullState::psi`]: left movers
    /// first, then right movers.
    pub fn wavenumber(&self, idx: usize) -> f64 {
        if idx < self.modes {
            -self.k(idx)
        } else {
            self.k(idx - self.modes)
        }
    }

    pub fn half_width(&self, p: &SystemParams) -> f64 {
        (p.omega_e - p.v * self.k_min).min(p.v * self.k_max - p.omega_e)
    }

    /// Time after which the discrete spectrum refocuses emitted amplitude.
    pub fn recurrence_time(&self, v: f64) -> f64 {
        2.0 * PI / (v * self.dk)
    }

    /// Earliest spurious return: the recurrence shortened by the transit
    /// between the coupling points.
    pub fn first_echo(&self, p: &SystemParams) -> f64 {
        self.recurrence_time(p.v) - p.tau()
    }

    pub fn check(&self, p: &SystemParams) -> Result<()> {
        let margin = 10.0 * p.gamma_total();
        if !(self.half_width(p) > margin) {
            return Err(Error::Precondition(format!(
                "band must cover ω_e ± 10Γ, got [{}, {}]",
                p.v * self.k_min,
                p.v * self.k_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub modes: usize,
    /// Band half-width in frequency; `None` takes the widest band allowed
    /// by the recurrence time.
    pub half_width: Option<f64>,
    /// Spacing of the recorded trajectory; the stepper subdivides it.
    pub dt_record: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            modes: DEFAULT_MODES,
            half_width: None,
            dt_record: 0.005,
        }
    }
}

impl OracleConfig {
    pub fn grid(&self, p: &SystemParams, horizon: f64) -> Result<ModeGrid> {
        match self.half_width {
            Some(w) => ModeGrid::centred(p, w, self.modes),
            None => ModeGrid::for_horizon(p, self.modes, horizon),
        }
    }
}

/// Complete state at one instant. `psi[idx]` belongs to wavenumber
/// [`ModeGrid::wavenumber`]`(idx)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FullState {
    pub t: f64,
    pub u_e: Complex64,
    pub u_s: Complex64,
    pub psi: Vec<Complex64>,
}

impl FullState {
    pub fn norm(&self, grid: &ModeGrid) -> f64 {
        self.u_e.norm_sqr() + self.u_s.norm_sqr() + self.psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.dk
    }
}

#[derive(Debug, Clone)]
pub struct OracleRun {
    pub grid: ModeGrid,
    pub trajectory: Trajectory,
    /// `max_t |N(t) − N(0)|` with `N = |U_e|² + |U_s|² + Σ|ψ_k|²dk`.
    pub norm_drift: f64,
    pub snapshots: Vec<FullState>,
    pub dt: f64,
    pub warnings: Vec<String>,
}

/// Mode coupling `c(k)` including the continuum normalization.
fn coupling(p: &SystemParams, k: f64) -> Complex64 {
    let half = k * p.d / 2.0;
    (p.j1() * Complex64::from_polar(1.0, -half) + p.j2() * Complex64::from_polar(1.0, half)) / 2f64.sqrt()
}

const LANES: usize = 8;
type Lane = [f64; LANES];

/// Channel data in fixed-width chunks; padding channels carry zero weight.
struct Modes {
    detuning: Vec<Lane>,
    weight: Vec<Lane>,
}

struct Split {
    re: Vec<Lane>,
    im: Vec<Lane>,
}

impl Split {
    fn zeros(chunks: usize) -> Self {
        Split {
            re: vec![[0.0; LANES]; chunks],
            im: vec![[0.0; LANES]; chunks],
        }
    }

    fn get(&self, j: usize) -> Complex64 {
        Complex64::new(self.re[j / LANES][j % LANES], self.im[j / LANES][j % LANES])
    }
}

impl Modes {
    fn new(p: &SystemParams, grid: &ModeGrid) -> Self {
        let chunks = grid.modes.div_ceil(LANES);
        let mut detuning = vec![[0.0; LANES]; chunks];
        let mut weight = vec![[0.0; LANES]; chunks];
        for j in 0..grid.modes {
            let k = grid.k(j);
            detuning[j / LANES][j % LANES] = p.v * k - p.omega_e;
            weight[j / LANES][j % LANES] = (coupling(p, k).norm_sqr() + coupling(p, -k).norm_sqr()) * grid.dk;
        }
        Modes { detuning, weight }
    }

    /// One RK4 stage over all channels. Forms `ḟ = −i(Δ x + U_e)` from the
    /// stage state `x`, sets (`FIRST`) or bumps the accumulator by
    /// `acc·ḟ`, and writes `f + next·ḟ` into `out`. Returns `Σ w x` summed
    /// lane-wise in a fixed order.
    #[allow(clippy::too_many_arguments)]
    fn stage<const FIRST: bool>(
        &self,
        ue: Complex64,
        f: &Split,
        x: &Split,
        acc_buf: &mut Split,
        out: &mut Split,
        acc: f64,
        next: f64,
    ) -> Complex64 {
        let mut sr: Lane = [0.0; LANES];
        let mut si: Lane = [0.0; LANES];
        let rows = self
            .detuning
            .iter()
            .zip(&self.weight)
            .zip(f.re.iter().zip(&f.im))
            .zip(x.re.iter().zip(&x.im))
            .zip(acc_buf.re.iter_mut().zip(acc_buf.im.iter_mut()))
            .zip(out.re.iter_mut().zip(out.im.iter_mut()));
        for (((((det, w), (fr, fi)), (xr, xi)), (ar, ai)), (or, oi)) in rows {
            for l in 0..LANES {
                sr[l] += w[l] * xr[l];
                si[l] += w[l] * xi[l];
                // −i(a + ib) = b − ia
                let d_re = det[l] * xi[l] + ue.im;
                let d_im = -(det[l] * xr[l] + ue.re);
                if FIRST {
                    ar[l] = acc * d_re;
                    ai[l] = acc * d_im;
                } else {
                    ar[l] += acc * d_re;
                    ai[l] += acc * d_im;
                }
                or[l] = fr[l] + next * d_re;
                oi[l] = fi[l] + next * d_im;
            }
        }
        Complex64::new(sr.iter().sum(), si.iter().sum())
    }

    fn field_norm(&self, f: &Split) -> f64 {
        let mut s: Lane = [0.0; LANES];
        for ((w, re), im) in self.weight.iter().zip(&f.re).zip(&f.im) {
            for l in 0..LANES {
                s[l] += w[l] * (re[l] * re[l] + im[l] * im[l]);
            }
        }
        s.iter().sum()
    }
}

/// Integrates the full atom–cavity–waveguide system for subspace `n` up to
/// `t_max`. `snapshot_times` selects instants at which the complete mode
/// state is kept (rounded to the nearest recorded step).
pub fn integrate_full(
    p: &SystemParams,
    n: u32,
    init: &InitialCondition,
    grid: &ModeGrid,
    t_max: f64,
    dt_record: f64,
    snapshot_times: &[f64],
) -> Result<OracleRun> {
    p.validate()?;
    init.validate()?;
    grid.check(p)?;
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::param("t_max", "must be finite and > 0"));
    }
    if !(dt_record > 0.0) {
        return Err(Error::param("dt_record", "must be > 0"));
    }
    let mut warnings = Vec::new();
    let echo = grid.first_echo(p);
    if echo < t_max {
        warnings.push(format!(
            "first discrete-band echo at t = {echo:.3} precedes the horizon {t_max}; late samples are contaminated by wrap-around"
        ));
    }

    let modes = Modes::new(p, grid);
    let fastest = (p.omega_e - p.v * grid.k_min).max(p.v * grid.k_max - p.omega_e);
    let substeps = ((dt_record * fastest / MAX_PHASE_STEP).floor() as usize + 1).max(1);
    let h = dt_record / substeps as f64;
    let records = (t_max / dt_record - 1e-9).ceil().max(1.0) as usize;

    let g_n = p.g_n(n);
    let delta = p.delta();
    let i = Complex64::new(0.0, 1.0);
    let atom = |ue: Complex64, us: Complex64, sum: Complex64| -> (Complex64, Complex64) {
        (-i * (us * g_n + sum), i * delta * us - i * g_n * ue)
    };

    let chunks = modes.detuning.len();
    let mut f = Split::zeros(chunks);
    let mut x = Split::zeros(chunks);
    let mut y = Split::zeros(chunks);
    let mut acc = Split::zeros(chunks);
    let (mut ue, mut us) = (init.u_e0, init.u_s0);

    let n0 = ue.norm_sqr() + us.norm_sqr();
    let mut drift = 0.0f64;

    let mut snap_steps: Vec<usize> = snapshot_times
        .iter()
        .map(|&t| ((t / dt_record).round().max(0.0) as usize).min(records))
        .collect();
    snap_steps.sort_unstable();
    let mut snapshots = Vec::with_capacity(snap_steps.len());
    let mut next_snap = 0;
    let take = |step: usize, ue: Complex64, us: Complex64, f: &Split| FullState {
        t: step as f64 * dt_record,
        u_e: ue,
        u_s: us,
        psi: full_line(p, grid, f),
    };

    let mut rec_e = Vec::with_capacity(records + 1);
    let mut rec_s = Vec::with_capacity(records + 1);
    rec_e.push(ue);
    rec_s.push(us);
    while next_snap < snap_steps.len() && snap_steps[next_snap] == 0 {
        snapshots.push(take(0, ue, us, &f));
        next_snap += 1;
    }

    let (h2, h6) = (h / 2.0, h / 6.0);
    for step in 1..=records {
        for _ in 0..substeps {
            let s1 = modes.stage::<true>(ue, &f, &f, &mut acc, &mut x, 1.0, h2);
            let (k1e, k1s) = atom(ue, us, s1);
            let (u2e, u2s) = (ue + k1e * h2, us + k1s * h2);
            let s2 = modes.stage::<false>(u2e, &f, &x, &mut acc, &mut y, 2.0, h2);
            let (k2e, k2s) = atom(u2e, u2s, s2);
            let (u3e, u3s) = (ue + k2e * h2, us + k2s * h2);
            let s3 = modes.stage::<false>(u3e, &f, &y, &mut acc, &mut x, 2.0, h);
            let (k3e, k3s) = atom(u3e, u3s, s3);
            let (u4e, u4s) = (ue + k3e * h, us + k3s * h);
            let s4 = modes.stage::<false>(u4e, &f, &x, &mut acc, &mut y, 1.0, 0.0);
            let (k4e, k4s) = atom(u4e, u4s, s4);

            for ((fr, fi), (ar, ai)) in f.re.iter_mut().zip(f.im.iter_mut()).zip(acc.re.iter().zip(&acc.im)) {
                for l in 0..LANES {
                    fr[l] += ar[l] * h6;
                    fi[l] += ai[l] * h6;
                }
            }
            ue += (k1e + k2e * 2.0 + k3e * 2.0 + k4e) * h6;
            us += (k1s + k2s * 2.0 + k3s * 2.0 + k4s) * h6;
        }
        if !(ue.re.is_finite() && ue.im.is_finite()) {
            return Err(Error::Degenerate(format!("oracle diverged at record {step}")));
        }
        rec_e.push(ue);
        rec_s.push(us);
        let norm = ue.norm_sqr() + us.norm_sqr() + modes.field_norm(&f);
        drift = drift.max((norm - n0).abs());
        while next_snap < snap_steps.len() && snap_steps[next_snap] == step {
            snapshots.push(take(step, ue, us, &f));
            next_snap += 1;
        }
    }

    Ok(OracleRun {
        grid: *grid,
        trajectory: Trajectory {
            n,
            dt: dt_record,
            omega_e: p.omega_e,
            segment: None,
            u_e: rec_e,
            u_s: rec_s,
        },
        norm_drift: drift,
        snapshots,
        dt: h,
        warnings,
    })
}

/// Expands the channel oscillators to `ψ_k` on the signed line.
fn full_line(p: &SystemParams, grid: &ModeGrid, f: &Split) -> Vec<Complex64> {
    (0..2 * grid.modes)
        .map(|idx| {
            let j = if idx < grid.modes { idx } else { idx - grid.modes };
            coupling(p, grid.wavenumber(idx)) * f.get(j)
        })
        .collect()
}

/// Smooth taper of the Fourier sum near the band edges, flat over the
/// inner half of the band.
fn band_window(detuning: f64, half_width: f64) -> f64 {
    let r = (detuning.abs() / half_width).min(1.0);
    if r <= 0.5 {
        1.0
    } else {
        let c = (PI * (r - 0.5)).cos();
        c * c
    }
}

/// Field amplitude `Σ_k e^{ikx} ψ_k dk / √(2π)` (windowed) of one snapshot.
/// The discrete sum is periodic in `x` with period `2π/dk`, so emission
/// that has travelled further than that reappears aliased.
pub fn oracle_field(state: &FullState, grid: &ModeGrid, p: &SystemParams, x: f64) -> Complex64 {
    let half_width = grid.half_width(p).max(f64::MIN_POSITIVE);
    let sum: Complex64 = state
        .psi
        .iter()
        .enumerate()
        .map(|(idx, &psi)| {
            let j = if idx < grid.modes { idx } else { idx - grid.modes };
            let w = band_window(p.v * grid.k(j) - p.omega_e, half_width);
            psi * Complex64::from_polar(w, grid.wavenumber(idx) * x)
        })
        .sum();
    sum * (grid.dk / (2.0 * PI).sqrt())
}

/// Intensity from the stored mode snapshots. The snapshot times must be
/// the grid's time samples, in order.
pub fn oracle_intensity(run: &OracleRun, p: &SystemParams, grid: &SpacetimeGrid) -> Result<IntensityField> {
    grid.validate()?;
    if run.snapshots.len() != grid.nt {
        return Err(Error::Precondition(format!(
            "{} snapshots stored, grid needs {}",
            run.snapshots.len(),
            grid.nt
        )));
    }
    let tol = run.trajectory.dt / 2.0 + 1e-12;
    let mut values = Vec::with_capacity(grid.nx * grid.nt);
    for (j, snap) in run.snapshots.iter().enumerate() {
        if (snap.t - grid.t(j)).abs() > tol {
            return Err(Error::Precondition(format!(
                "snapshot {j} at t = {} does not match grid time {}",
                snap.t,
                grid.t(j)
            )));
        }
        values.extend((0..grid.nx).map(|i| oracle_field(snap, &run.grid, p, grid.x(i)).norm_sqr()));
    }
    Ok(IntensityField { grid: *grid, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(omega_e: f64, g: f64, gamma_coll: f64) -> SystemParams {
        SystemParams::from_rates(omega_e, 1.0, omega_e - 1.0, g, 1.0, gamma_coll, 1.0, 1.0).unwrap()
    }

    #[test]
    fn grid_layout() {
        let g = ModeGrid::new(0.0, 10.0, 4).unwrap();
        assert_eq!(g.dk, 2.5);
        assert_eq!(g.k(0), 1.25);
        assert_eq!(g.k(3), 8.75);
        assert_eq!(g.wavenumber(0), -1.25);
        assert_eq!(g.wavenumber(5), 3.75);
        assert!((g.recurrence_time(1.0) - 2.0 * PI / 2.5).abs() < 1e-15);
        assert!(ModeGrid::new(1.0, 1.0, 4).is_err());
        assert!(ModeGrid::new(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn horizon_band_keeps_recurrence_ahead() {
        let p = small(40.0, 0.0, 1.0);
        let g = ModeGrid::for_horizon(&p, 1024, 20.0).unwrap();
        assert!(g.first_echo(&p) > 20.0);
        assert!((g.half_width(&p) - PI * 1024.0 / (1.05 * 21.0)).abs() < 1e-9);
        assert!((p.omega_e - g.k_min - (g.k_max - p.omega_e)).abs() < 1e-9);
    }

    #[test]
    fn band_must_cover_resonance() {
        let p = small(40.0, 0.0, 1.0);
        let g = ModeGrid::centred(&p, 5.0, 512).unwrap();
        assert!(matches!(g.check(&p), Err(Error::Precondition(_))));
        assert!(ModeGrid::centred(&p, 40.0, 512).unwrap().check(&p).is_ok());
    }

    #[test]
    fn weights_integrate_to_rates() {
        // Σ w_j ≈ ∫ dκ (|c(κ)|² + |c(−κ)|²) and the flat part of |c|² is
        // Γv/(4π) for each direction.
        let p = small(40.0, 0.0, 0.0);
        let grid = ModeGrid::centred(&p, 40.0, 4096).unwrap();
        let m = Modes::new(&p, &grid);
        let total: f64 = m.weight.iter().flatten().sum();
        let expect = p.gamma_total() * p.v / (2.0 * PI) * (grid.k_max - grid.k_min);
        assert!((total / expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vacuum_field_at_start_and_warning_on_wraparound() {
        let p = small(30.0, 0.5, 1.0);
        let grid = ModeGrid::centred(&p, 30.0, 64).unwrap();
        let run = integrate_full(&p, 0, &InitialCondition::excited(), &grid, 12.0, 0.01, &[0.0, 2.0]).unwrap();
        assert!(!run.warnings.is_empty(), "recurrence {}", grid.recurrence_time(1.0));
        let s0 = &run.snapshots[0];
        assert!(s0.psi.iter().all(|z| *z == Complex64::default()));
        assert_eq!(oracle_field(s0, &grid, &p, 0.3), Complex64::default());
        assert!(run.snapshots[1].psi.iter().any(|z| z.norm() > 0.0));
    }

    #[test]
    fn norm_is_conserved() {
        let p = small(30.0, 0.8, 1.0);
        let grid = ModeGrid::for_horizon(&p, 1000, 10.0).unwrap();
        let run = integrate_full(&p, 0, &InitialCondition::excited(), &grid, 10.0, 0.01, &[10.0]).unwrap();
        assert!(run.warnings.is_empty());
        assert!(run.norm_drift < 1e-6, "drift {}", run.norm_drift);
        let n = run.snapshots[0].norm(&grid);
        assert!((n - 1.0).abs() < 1e-6, "snapshot norm {n}");
    }

    #[test]
    fn window_is_flat_inside_and_zero_at_edges() {
        assert_eq!(band_window(0.0, 10.0), 1.0);
        assert_eq!(band_window(4.9, 10.0), 1.0);
        assert!(band_window(10.0, 10.0) < 1e-30);
        assert!(band_window(7.5, 10.0) > 0.4 && band_window(7.5, 10.0) < 0.6);
    }
}
