//! Level shift and broadening of the emitter from one quadratic-dispersion
//! channel: the closed-form self-energy, the Markov decay-rate conversions,
//! and a slow-but-independent integral evaluation used to cross-check the
//! closed form.
//!
//! For a channel `ω(k) = ω0 + v1 k + v2 k²` with coupling rate γ, the
//! self-energy at energy E (retarded prescription E + i0⁺) is
//!
//! ```text
//! Σ(E) = -i γ v1 / sqrt(v1² + 4 v2 (E - ω0))
//! ```
//!
//! purely imaginary above the band minimum (the emitter decays) and real
//! negative below it (the band only shifts the level). The square root's
//! branch is fixed by sqrt(x + i0⁺) = i sqrt(|x|) for x < 0.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::waveguide::QuadraticDispersion;

/// Which side of the band minimum the evaluation energy sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// Above the band minimum: Σ is purely imaginary, the level acquires a
    /// width.
    Propagating,
    /// Below the band minimum: Σ is real and negative, a pure level shift.
    Evanescent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfEnergyValue {
    pub value: Complex64,
    pub branch: Branch,
}

/// One channel's contribution: its dispersion, the decay rate γ ≥ 0 the
/// coupling would produce in the Markov limit, and the energy at which the
/// self-energy is wanted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfEnergyInput {
    pub dispersion: QuadraticDispersion,
    pub gamma: f64,
    pub energy: f64,
}

impl SelfEnergyInput {
    pub fn new(dispersion: QuadraticDispersion, gamma: f64, energy: f64) -> Result<Self> {
        if ensure_finite("gamma", gamma)? < 0.0 {
            return Err(Error::Invalid(format!(
                "gamma must be nonnegative, got {gamma}"
            )));
        }
        ensure_finite("energy", energy)?;
        Ok(Self {
            dispersion,
            gamma,
            energy,
        })
    }
}

/// Markov decay rate γ = 2π g² / v1 into a channel with group velocity
/// v1 > 0 at the emitter frequency.
pub fn decay_rate(g: f64, v1: f64) -> Result<f64> {
    ensure_finite("g", g)?;
    if ensure_finite("v1", v1)? <= 0.0 {
        return Err(Error::Invalid(format!("v1 must be positive, got {v1}")));
    }
    Ok(2.0 * std::f64::consts::PI * g * g / v1)
}

/// Inverse of [`decay_rate`]: the coupling magnitude g = sqrt(γ v1 / 2π)
/// producing a given rate.
pub fn coupling_of_rate(gamma: f64, v1: f64) -> Result<f64> {
    if ensure_finite("gamma", gamma)? < 0.0 {
        return Err(Error::Invalid(format!(
            "gamma must be nonnegative, got {gamma}"
        )));
    }
    if ensure_finite("v1", v1)? <= 0.0 {
        return Err(Error::Invalid(format!("v1 must be positive, got {v1}")));
    }
    Ok((gamma * v1 / (2.0 * std::f64::consts::PI)).sqrt())
}

/// Closed-form self-energy of one channel. The rate is paired with |v1| so
/// that a channel expanded around negative k0 contributes the same loss as
/// its mirror image. Errors exactly on the branch point (band minimum),
/// where the expression diverges.
pub fn sigma(input: &SelfEnergyInput) -> Result<SelfEnergyValue> {
    let d = &input.dispersion;
    let delta = input.energy - d.omega0();
    let arg = d.v1() * d.v1() + 4.0 * d.v2() * delta;
    let strength = input.gamma * d.v1().abs();
    if arg > 0.0 {
        Ok(SelfEnergyValue {
            value: Complex64::new(0.0, -strength / arg.sqrt()),
            branch: Branch::Propagating,
        })
    } else if arg < 0.0 {
        Ok(SelfEnergyValue {
            value: Complex64::new(-strength / (-arg).sqrt(), 0.0),
            branch: Branch::Evanescent,
        })
    } else {
        Err(Error::BranchPoint {
            energy: input.energy,
        })
    }
}

/// A wavenumber cutoff beyond which the dispersion integrand is deep in its
/// 1/k² tail: well past both poles and the band-minimum wavenumber.
pub fn default_k_cutoff(input: &SelfEnergyInput) -> f64 {
    let d = &input.dispersion;
    let delta = (input.energy - d.omega0()).abs();
    50.0 * ((delta / d.v2()).sqrt() + d.v1().abs() / d.v2())
}

/// Single η-regulated evaluation of the self-energy integral
///
/// ```text
/// Σ_η(E) = ∫ dk g² / (E - ω(k) + iη),   g² = γ |v1| / 2π,
/// ```
///
/// over the full quadratic branch ω(k) = ω0 + v1 k + v2 k² (all real k; the
/// two monotone half-branches meet at the parabola vertex). The interval
/// [-K, K] is integrated directly with panels split at the pole projections,
/// and the two tails are folded to finite intervals by u = 1/|k|, where the
/// integrand tends smoothly to -g²/v2. `k_cutoff` is a lower bound on K; it
/// is raised automatically to clear the pole region. Deviation from the
/// closed form is linear in η, which is what the Richardson ladder in
/// [`sigma_integral_oracle`] exploits.
pub fn sigma_integral_once(
    input: &SelfEnergyInput,
    eta: f64,
    k_cutoff: f64,
    panels: usize,
) -> Result<Complex64> {
    if ensure_finite("eta", eta)? <= 0.0 {
        return Err(Error::Invalid(format!("eta must be positive, got {eta}")));
    }
    if ensure_finite("k_cutoff", k_cutoff)? <= 0.0 {
        return Err(Error::Invalid(format!(
            "k_cutoff must be positive, got {k_cutoff}"
        )));
    }
    if panels < 4 {
        return Err(Error::Invalid(format!(
            "need at least 4 panels per segment, got {panels}"
        )));
    }
    let d = &input.dispersion;
    let (v1, v2) = (d.v1(), d.v2());
    let delta = input.energy - d.omega0();
    let g2 = input.gamma * v1.abs() / (2.0 * std::f64::consts::PI);
    if g2 == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }

    let delta_c = Complex64::new(delta, eta);
    let f = move |k: f64| g2 / (delta_c - (v1 + v2 * k) * k);

    // Complex pole pair of the denominator; their real parts are where the
    // integrand peaks.
    let s_c = Complex64::new(v1 * v1 + 4.0 * v2 * delta, 4.0 * v2 * eta).sqrt();
    let p_plus = (-v1 + s_c.re) / (2.0 * v2);
    let p_minus = (-v1 - s_c.re) / (2.0 * v2);
    let vertex = d.k_min();

    let extent = p_plus.abs().max(p_minus.abs()).max(vertex.abs());
    let big_k = k_cutoff.max(2.0 * extent + 1.0);

    let mut cuts = vec![-big_k, big_k];
    for p in [p_plus, p_minus, vertex] {
        if p.abs() < big_k {
            cuts.push(p);
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();

    // Absolute tolerance scaled to the regulated magnitude of the result.
    let arg = v1 * v1 + 4.0 * v2 * delta;
    let scale = input.gamma * v1.abs() / (arg.abs() + 4.0 * v2 * eta).sqrt();
    let tol = 1e-9 * scale;

    let mut total = Complex64::new(0.0, 0.0);
    for w in cuts.windows(2) {
        total += integrate(&f, w[0], w[1], panels, tol)?;
    }

    // Tails |k| > K via u = 1/|k|; both integrands are finite at u = 0.
    let tail_plus = move |u: f64| g2 / (delta_c * u * u - v1 * u - v2);
    let tail_minus = move |u: f64| g2 / (delta_c * u * u + v1 * u - v2);
    total += integrate(&tail_plus, 0.0, 1.0 / big_k, panels, tol)?;
    total += integrate(&tail_minus, 0.0, 1.0 / big_k, panels, tol)?;
    Ok(total)
}

/// Independent evaluation of the self-energy by quadrature: three regulated
/// integrals at η = {10⁻², 10⁻³, 10⁻⁴} ω0, combined pairwise by Richardson
/// extrapolation in η. Returns the finest extrapolant and errors if the two
/// extrapolants disagree, which would mean the η → 0 limit is not yet linear.
pub fn sigma_integral_oracle(input: &SelfEnergyInput) -> Result<Complex64> {
    let omega0 = input.dispersion.omega0();
    let etas = [1e-2 * omega0, 1e-3 * omega0, 1e-4 * omega0];
    let k_cut = default_k_cutoff(input);
    let mut vals = [Complex64::new(0.0, 0.0); 3];
    for (v, eta) in vals.iter_mut().zip(etas) {
        *v = sigma_integral_once(input, eta, k_cut, 64)?;
    }
    let extrapolate = |i_coarse: Complex64, i_fine: Complex64, e_coarse: f64, e_fine: f64| {
        (i_fine * e_coarse - i_coarse * e_fine) / (e_coarse - e_fine)
    };
    let first = extrapolate(vals[0], vals[1], etas[0], etas[1]);
    let second = extrapolate(vals[1], vals[2], etas[1], etas[2]);
    let spread = (second - first).norm();
    if spread > 5e-3 * (second.norm() + 1e-300) {
        return Err(Error::NoConvergence(format!(
            "regulator extrapolants differ by {spread:.3e} at energy {}",
            input.energy
        )));
    }
    Ok(second)
}

/// Adaptive Simpson over [a, b], pre-split into uniform panels so narrow
/// features are never missed by the first coarse estimate.
fn integrate<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    panels: usize,
    tol: f64,
) -> Result<Complex64> {
    let h = (b - a) / panels as f64;
    let panel_tol = tol / panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..panels {
        let lo = a + h * i as f64;
        let hi = if i + 1 == panels { b } else { a + h * (i + 1) as f64 };
        let mid = 0.5 * (lo + hi);
        let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
        let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        total += refine(f, lo, flo, mid, fmid, hi, fhi, whole, panel_tol, 48)?;
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    fa: Complex64,
    m: f64,
    fm: Complex64,
    b: f64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
    depth: u32,
) -> Result<Complex64> {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let change = left + right - whole;
    if change.norm() <= 15.0 * tol {
        return Ok(left + right + change / 15.0);
    }
    if depth == 0 {
        return Err(Error::NoConvergence(format!(
            "quadrature panel [{a}, {b}] did not settle"
        )));
    }
    Ok(refine(f, a, fa, lm, flm, m, fm, left, tol, depth - 1)?
        + refine(f, m, fm, rm, frm, b, fb, right, tol, depth - 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveguide::{ChannelPair, CurvatureForm};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn reference_pair() -> ChannelPair {
        ChannelPair::from_delta(1.0, 0.8, 1.0, 0.01, 0.05, CurvatureForm::Exact).unwrap()
    }

    #[test]
    fn rate_and_coupling_are_inverses() {
        let g = coupling_of_rate(0.01, 1.0).unwrap();
        assert_relative_eq!(g, 0.03989422804014327, max_relative = 1e-15);
        assert_relative_eq!(decay_rate(g, 1.0).unwrap(), 0.01, max_relative = 1e-14);
        assert!(decay_rate(0.1, 0.0).is_err());
        assert!(coupling_of_rate(-0.1, 1.0).is_err());
    }

    #[test]
    fn closed_form_is_imaginary_above_and_real_below_the_band_edge() {
        let pair = reference_pair();
        let b = *pair.b();

        // Propagating: E = 0.9 sits between the b band minimum (~0.8056) and omega0.
        let s = sigma(&SelfEnergyInput::new(b, 0.05, 0.9).unwrap()).unwrap();
        assert_eq!(s.branch, Branch::Propagating);
        assert_eq!(s.value.re, 0.0);
        assert_relative_eq!(s.value.im, -0.07174300539794388, max_relative = 1e-13);

        // Evanescent: E = 0.7 is below the minimum; pure negative shift.
        let s = sigma(&SelfEnergyInput::new(b, 0.05, 0.7).unwrap()).unwrap();
        assert_eq!(s.branch, Branch::Evanescent);
        assert_eq!(s.value.im, 0.0);
        assert_relative_eq!(s.value.re, -0.06786208925382972, max_relative = 1e-13);

        // On resonance the width is exactly gamma.
        let s = sigma(&SelfEnergyInput::new(b, 0.05, 1.0).unwrap()).unwrap();
        assert_relative_eq!(s.value.im, -0.05, max_relative = 1e-14);
    }

    #[test]
    fn branch_point_is_rejected_exactly() {
        let d = crate::waveguide::QuadraticDispersion::new(1.0, 1.0, 0.25).unwrap();
        // v1^2 + 4 v2 (E - omega0) = 1 - 1 = 0 exactly at E = 0.
        let r = sigma(&SelfEnergyInput::new(d, 0.05, 0.0).unwrap());
        assert!(matches!(r, Err(Error::BranchPoint { .. })));
    }

    #[test]
    fn mirrored_expansion_gives_the_same_loss() {
        let d_fwd = crate::waveguide::QuadraticDispersion::new(1.0, 0.8, 0.18).unwrap();
        let d_bwd = crate::waveguide::QuadraticDispersion::new(1.0, -0.8, 0.18).unwrap();
        let s_fwd = sigma(&SelfEnergyInput::new(d_fwd, 0.02, 1.1).unwrap()).unwrap();
        let s_bwd = sigma(&SelfEnergyInput::new(d_bwd, 0.02, 1.1).unwrap()).unwrap();
        assert_eq!(s_fwd.value, s_bwd.value);
    }

    #[test]
    fn quadrature_reproduces_the_closed_form_on_both_branches() {
        let pair = reference_pair();
        let b = *pair.b();
        for energy in [1.0, 0.95, 0.86, 0.75, 0.6] {
            let input = SelfEnergyInput::new(b, 0.05, energy).unwrap();
            let exact = sigma(&input).unwrap().value;
            let numeric = sigma_integral_oracle(&input).unwrap();
            assert!(
                (numeric - exact).norm() <= 1e-3 * exact.norm(),
                "energy {energy}: quadrature {numeric} vs closed form {exact}"
            );
        }
    }

    #[test]
    fn quadrature_handles_zero_coupling() {
        let pair = reference_pair();
        let input = SelfEnergyInput::new(*pair.b(), 0.0, 0.9).unwrap();
        let v = sigma_integral_once(&input, 1e-3, 50.0, 8).unwrap();
        assert_abs_diff_eq!(v.norm(), 0.0, epsilon = 1e-300);
    }
}
