//! Single-photon scattering in the open channel: reflection and transmission
//! amplitudes, loss into the second channel, resonance positions, and the
//! Fano line shape near the Feshbach point.
//!
//! With `s_a = sqrt(v_a1² + 4 v_a2 Δ)` and the b-channel self-energy Σ_b(Δ),
//! the reflection amplitude is evaluated in the rearranged form
//!
//! ```text
//! r(Δ) = -i γ_a v_a1 / (s_a (Δ - Σ_b) + i γ_a v_a1),    t = 1 + r,
//! ```
//!
//! which stays finite at the band minimum (s_a = 0 gives r = -1 exactly)
//! instead of multiplying a divergent self-energy by a vanishing width.
//! Below the b band minimum Σ_b is real, reflection and transmission share
//! one denominator, and R + T = 1 holds to rounding; above it the open
//! channel leaks into b and 1 - R - T is the channel loss.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bound_states::bound_state_closed_form;
use crate::error::{ensure_finite, Error, Result};
use crate::self_energy::{sigma, SelfEnergyInput};
use crate::waveguide::ChannelPair;

/// Half-width of the detuning window around the b-channel branch point
/// inside which Σ_b is evaluated at the window edge instead (same side,
/// exact hits resolve to the lossless side). Keeps sweeps finite across the
/// square-root singularity.
pub const BRANCH_POINT_WINDOW: f64 = 1e-12;

/// Why a scattering point was evaluated at a protected limit rather than
/// naively.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitKind {
    /// At (or clamped to) the open-channel band minimum: r = -1, t = 0.
    BandMinimum,
    /// Inside the branch-point window of the b channel.
    BranchWindow,
}

/// One evaluated scattering point. `k` is the open-channel wavenumber when
/// the point came from a dispersive model (`None` for the linear model,
/// which never resolves k).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringPoint {
    pub k: Option<f64>,
    pub delta: f64,
    pub r: Complex64,
    pub t: Complex64,
    pub reflection: f64,
    pub transmission: f64,
    pub loss: f64,
    pub limit: Option<LimitKind>,
}

fn sigma_b_clamped(pair: &ChannelPair, delta: f64) -> Result<(Complex64, Option<LimitKind>)> {
    if pair.gamma_b() == 0.0 {
        return Ok((Complex64::new(0.0, 0.0), None));
    }
    let edge = pair.delta_max_f();
    let (delta_eff, flag) = if (delta - edge).abs() < BRANCH_POINT_WINDOW {
        let side = if delta > edge {
            edge + BRANCH_POINT_WINDOW
        } else {
            edge - BRANCH_POINT_WINDOW
        };
        (side, Some(LimitKind::BranchWindow))
    } else {
        (delta, None)
    };
    let input = SelfEnergyInput::new(
        *pair.b(),
        pair.gamma_b(),
        pair.b().omega0() + delta_eff,
    )?;
    Ok((sigma(&input)?.value, flag))
}

/// Core evaluation for an in-band detuning (delta >= delta_min assumed).
fn scatter_at(pair: &ChannelPair, delta: f64) -> Result<ScatteringPoint> {
    let a = pair.a();
    let delta_min = pair.delta_min();
    let disc = a.v1() * a.v1() + 4.0 * a.v2() * delta;
    if delta <= delta_min || disc <= 0.0 {
        return Ok(ScatteringPoint {
            k: Some(a.k_min()),
            delta: delta_min,
            r: Complex64::new(-1.0, 0.0),
            t: Complex64::new(0.0, 0.0),
            reflection: 1.0,
            transmission: 0.0,
            loss: 0.0,
            limit: Some(LimitKind::BandMinimum),
        });
    }
    let s_a = disc.sqrt();
    let (sigma_b, flag) = sigma_b_clamped(pair, delta)?;
    let width = pair.gamma_a() * a.v1().abs();
    let denom = s_a * (delta - sigma_b) + Complex64::new(0.0, width);
    let r = Complex64::new(0.0, -width) / denom;
    let t = 1.0 + r;
    let reflection = r.norm_sqr();
    let transmission = t.norm_sqr();
    let (near_k, _) = a.k_of_detuning(delta)?;
    Ok(ScatteringPoint {
        k: Some(near_k),
        delta,
        r,
        t,
        reflection,
        transmission,
        loss: 1.0 - reflection - transmission,
        limit: flag,
    })
}

/// Scattering observables of the quadratic two-channel model at a detuning
/// from ω0. Fails below the open-channel band minimum, where no scattering
/// state exists; exactly at the minimum the limit point r = -1 is returned
/// and flagged.
pub fn scatter_quadratic(pair: &ChannelPair, delta: f64) -> Result<ScatteringPoint> {
    ensure_finite("delta", delta)?;
    if delta < pair.delta_min() {
        return Err(Error::BelowBandMinimum {
            detuning: delta,
            band_min: pair.delta_min(),
        });
    }
    scatter_at(pair, delta)
}

/// Same observables parameterized by the open-channel wavenumber. Every
/// finite k maps into the band (the quadratic branch attains its minimum),
/// so this never reports a below-band error; rounding that lands a vertex
/// evaluation below the minimum is clamped onto it.
pub fn scatter_quadratic_by_k(pair: &ChannelPair, k: f64) -> Result<ScatteringPoint> {
    ensure_finite("k", k)?;
    let delta = pair.a().detuning_of_k(k).max(pair.delta_min());
    let mut point = scatter_at(pair, delta)?;
    point.k = Some(k);
    Ok(point)
}

/// Markovian (linear-dispersion) scattering: both channels reduced to
/// constant rates, `r = -i γ_a / (Δ1 + i (γ_a + γ_b))`. The detuning Δ1 is
/// measured from the emitter frequency; no wavenumber is resolved.
pub fn scatter_linear(gamma_a: f64, gamma_b: f64, delta1: f64) -> Result<ScatteringPoint> {
    if ensure_finite("gamma_a", gamma_a)? <= 0.0 {
        return Err(Error::Invalid(format!(
            "gamma_a must be positive, got {gamma_a}"
        )));
    }
    if ensure_finite("gamma_b", gamma_b)? < 0.0 {
        return Err(Error::Invalid(format!(
            "gamma_b must be nonnegative, got {gamma_b}"
        )));
    }
    ensure_finite("delta1", delta1)?;
    let r = Complex64::new(0.0, -gamma_a) / Complex64::new(delta1, gamma_a + gamma_b);
    let t = 1.0 + r;
    let reflection = r.norm_sqr();
    let transmission = t.norm_sqr();
    Ok(ScatteringPoint {
        k: None,
        delta: delta1,
        r,
        t,
        reflection,
        transmission,
        loss: 1.0 - reflection - transmission,
        limit: None,
    })
}

/// Where the open channel reflects completely, and the band landmarks those
/// points are measured against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceSet {
    /// Total-reflection wavenumbers of the bare emitter line (Δ = 0); present
    /// only when the b channel is uncoupled, since any loss spoils them.
    pub k_res: Vec<f64>,
    /// Band-minimum wavenumber of the open channel.
    pub k_c: f64,
    /// Wavenumbers at which the Feshbach detuning is reached, when it lies
    /// inside the open band.
    pub k_f: Option<(f64, f64)>,
    /// Feshbach detuning (present whenever the b channel is coupled).
    pub delta_f: Option<f64>,
    /// Open-channel band minimum as a detuning.
    pub delta_min: f64,
    /// b-channel band minimum as a detuning (branch point of Σ_b).
    pub delta_max_f: f64,
}

impl ResonanceSet {
    /// True when a Feshbach pole exists but sits below the open band, so no
    /// real wavenumber reaches it.
    pub fn feshbach_outside_band(&self) -> bool {
        self.delta_f.is_some() && self.k_f.is_none()
    }
}

pub fn find_resonances(pair: &ChannelPair) -> ResonanceSet {
    let a = pair.a();
    let delta_min = pair.delta_min();
    let (delta_f, k_f, k_res) = if pair.gamma_b() > 0.0 {
        let delta_f = bound_state_closed_form(
            a.omega0(),
            pair.b().v1(),
            pair.b().v2(),
            pair.gamma_b(),
        )
        .map(|bs| bs.delta_f)
        .ok();
        let k_f = delta_f
            .filter(|&df| df >= delta_min)
            .and_then(|df| a.k_of_detuning(df).ok());
        (delta_f, k_f, Vec::new())
    } else {
        let bare = a.k_of_detuning(0.0).map(|(n, f)| vec![n, f]).unwrap_or_default();
        (None, None, bare)
    };
    ResonanceSet {
        k_res,
        k_c: a.k_min(),
        k_f,
        delta_f,
        delta_min,
        delta_max_f: pair.delta_max_f(),
    }
}

/// Which decay channels dress the emitter in [`excitation_amplitude`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelSelector {
    /// Photon injected in channel a, emitter dressed by both channels.
    TwoChannelA,
    /// Photon injected in channel b with channel a absent.
    SingleB,
}

/// Steady-state amplitude of the excited level under a monochromatic photon,
/// `β = g / (Δ - Σ(Δ))` with the self-energies of the selected channels. At
/// the open-channel band minimum the amplitude vanishes (the divergent
/// density of states pins the emitter to the ground state).
pub fn excitation_amplitude(
    pair: &ChannelPair,
    delta: f64,
    channel: ChannelSelector,
) -> Result<Complex64> {
    ensure_finite("delta", delta)?;
    match channel {
        ChannelSelector::TwoChannelA => {
            let delta_min = pair.delta_min();
            if delta < delta_min {
                return Err(Error::BelowBandMinimum {
                    detuning: delta,
                    band_min: delta_min,
                });
            }
            if delta == delta_min {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let a = pair.a();
            let g1 = crate::self_energy::coupling_of_rate(pair.gamma_a(), a.v1().abs())?;
            let sigma_a = sigma(&SelfEnergyInput::new(
                *a,
                pair.gamma_a(),
                a.omega0() + delta,
            )?)?
            .value;
            let (sigma_b, _) = sigma_b_clamped(pair, delta)?;
            Ok(g1 / (delta - sigma_a - sigma_b))
        }
        ChannelSelector::SingleB => {
            if pair.gamma_b() == 0.0 {
                return Err(Error::Invalid(
                    "b channel carries no width; nothing to excite through".into(),
                ));
            }
            let edge = pair.delta_max_f();
            if delta <= edge {
                return Err(Error::BelowBandMinimum {
                    detuning: delta,
                    band_min: edge,
                });
            }
            let b = pair.b();
            let g2 = crate::self_energy::coupling_of_rate(pair.gamma_b(), b.v1().abs())?;
            let sigma_b = sigma(&SelfEnergyInput::new(
                *b,
                pair.gamma_b(),
                b.omega0() + delta,
            )?)?
            .value;
            Ok(g2 / (delta - sigma_b))
        }
    }
}

/// Fano line shape `f(Δ) = (Δ - Δ_F + q)² / ((Δ - Δ_F)² + d²)` with
/// asymmetry q and width d ≠ 0.
pub fn fano_profile(delta: f64, delta_f: f64, q: f64, d: f64) -> Result<f64> {
    ensure_finite("delta", delta)?;
    ensure_finite("delta_f", delta_f)?;
    ensure_finite("q", q)?;
    if ensure_finite("d", d)? == 0.0 {
        return Err(Error::Invalid("fano width d must be nonzero".into()));
    }
    let x = delta - delta_f;
    Ok((x + q) * (x + q) / (x * x + d * d))
}

/// Finds every transmission zero of the quadratic model in a wavenumber
/// window: samples T(k) on a uniform grid, refines each local minimum by
/// golden-section search, and keeps minima whose refined transmission falls
/// below `t_threshold`. The window must bracket the zeros strictly (grid
/// endpoints are not candidates).
pub fn locate_transmission_zeros(
    pair: &ChannelPair,
    k_lo: f64,
    k_hi: f64,
    n_grid: usize,
    t_threshold: f64,
) -> Result<Vec<f64>> {
    ensure_finite("k_lo", k_lo)?;
    ensure_finite("k_hi", k_hi)?;
    if k_lo >= k_hi {
        return Err(Error::Invalid(format!(
            "need k_lo < k_hi, got [{k_lo}, {k_hi}]"
        )));
    }
    if n_grid < 16 {
        return Err(Error::Invalid(format!(
            "grid too coarse to bracket minima: {n_grid} points"
        )));
    }
    if ensure_finite("t_threshold", t_threshold)? <= 0.0 {
        return Err(Error::Invalid(format!(
            "t_threshold must be positive, got {t_threshold}"
        )));
    }
    let trans = |k: f64| -> Result<f64> {
        Ok(scatter_quadratic_by_k(pair, k)?.transmission)
    };
    let step = (k_hi - k_lo) / (n_grid - 1) as f64;
    let mut t_grid = Vec::with_capacity(n_grid);
    for i in 0..n_grid {
        t_grid.push(trans(k_lo + step * i as f64)?);
    }
    let mut zeros = Vec::new();
    for i in 1..n_grid - 1 {
        if t_grid[i] <= t_grid[i - 1] && t_grid[i] <= t_grid[i + 1] {
            let a = k_lo + step * (i - 1) as f64;
            let b = k_lo + step * (i + 1) as f64;
            let (k_star, t_star) = golden_min(&trans, a, b, 100)?;
            if t_star < t_threshold {
                let duplicate = zeros
                    .iter()
                    .any(|&z: &f64| (z - k_star).abs() < 4.0 * step);
                if !duplicate {
                    zeros.push(k_star);
                }
            }
        }
    }
    zeros.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(zeros)
}

fn golden_min<F: Fn(f64) -> Result<f64>>(
    f: &F,
    mut a: f64,
    mut b: f64,
    iters: usize,
) -> Result<(f64, f64)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..iters {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}
