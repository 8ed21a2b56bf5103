//! Poles of the emitter propagator dressed by the b channel: the true bound
//! state below the b band minimum and the quasibound (resonance) pair it is
//! degenerate with through the cubic pole equation.
//!
//! With detuning x = E - ω0, the pole condition in the region where the b
//! channel is evanescent reads
//!
//! ```text
//! x = -γ_b v_b1 / sqrt(-(v_b1² + 4 v_b2 x))
//! ```
//!
//! Squaring gives the cubic `4 v_b2 x³ + v_b1² x² + γ_b² v_b1² = 0`, which for
//! any γ_b > 0 has exactly one real root — always below the b band minimum
//! `-v_b1²/(4 v_b2)`, so the bound state never dissolves into the band — plus
//! a complex-conjugate pair on the other sheet. The real root is the Feshbach
//! detuning Δ_F at which the open channel shows total reflection.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::self_energy::{sigma, SelfEnergyInput};
use crate::waveguide::{ChannelPair, QuadraticDispersion};

/// All three pole-equation roots for one channel, as energies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundStateSet {
    /// Energy of the true bound state, `ω0 + delta_f`.
    pub e_bound: f64,
    /// Detuning of the bound state from ω0; this is the Feshbach detuning.
    pub delta_f: f64,
    /// The conjugate quasibound pair, positive imaginary part first.
    pub quasibound: (Complex64, Complex64),
    /// |x - Σ_b(x)| of the real root in the unsquared pole condition.
    pub residual: f64,
    /// Band minimum of the channel (as a detuning); upper bound for delta_f.
    pub delta_max_f: f64,
}

fn validate_channel(v_b1: f64, v_b2: f64, gamma_b: f64) -> Result<f64> {
    if ensure_finite("v_b1", v_b1)? == 0.0 {
        return Err(Error::Invalid("v_b1 must be nonzero".into()));
    }
    if ensure_finite("v_b2", v_b2)? <= 0.0 {
        return Err(Error::Invalid(format!(
            "v_b2 must be positive, got {v_b2}"
        )));
    }
    if ensure_finite("gamma_b", gamma_b)? < 0.0 {
        return Err(Error::Invalid(format!(
            "gamma_b must be nonnegative, got {gamma_b}"
        )));
    }
    if gamma_b == 0.0 {
        return Err(Error::NoBoundState {
            limit: -v_b1 * v_b1 / (4.0 * v_b2),
        });
    }
    Ok(v_b1.abs())
}

fn pole_residual(x: f64, v1: f64, v2: f64, gamma: f64) -> f64 {
    let arg = -(v1 * v1 + 4.0 * v2 * x);
    if arg > 0.0 {
        (x + gamma * v1 / arg.sqrt()).abs()
    } else {
        f64::MAX
    }
}

/// Radical solution of the pole cubic. The discriminant combination
///
/// ```text
/// l = -v1⁶ - 216 v1² v2² γ² + 12 √3 sqrt(v1⁴ v2² γ² (v1⁴ + 108 v2² γ²))
/// ```
///
/// is negative for every valid channel, so its real cube root u < 0 and the
/// roots
///
/// ```text
/// x_real = (u² - u v1² + v1⁴) / (12 u v2)
/// x_±    = ((-1 ± i√3) u - 2 v1² + (-1 ∓ i√3) v1⁴/u) / (24 v2)
/// ```
///
/// are free of division hazards. The two terms of l cancel almost exactly
/// when γ_b v2 dominates v1², so l is computed through its rationalized form
/// l = -v1¹² / (v1⁶ + 216 v1² v2² γ² + 12√3 sqrt(…)), which has no
/// subtraction.
pub fn bound_state_closed_form(
    omega0: f64,
    v_b1: f64,
    v_b2: f64,
    gamma_b: f64,
) -> Result<BoundStateSet> {
    ensure_finite("omega0", omega0)?;
    let v1 = validate_channel(v_b1, v_b2, gamma_b)?;
    let v2 = v_b2;
    let g2 = gamma_b * gamma_b;
    let v1_2 = v1 * v1;
    let v1_4 = v1_2 * v1_2;
    let v1_6 = v1_4 * v1_2;
    let inner = v1_4 * v2 * v2 * g2 * (v1_4 + 108.0 * v2 * v2 * g2);
    let l = -(v1_6 * v1_6)
        / (v1_6 + 216.0 * v1_2 * v2 * v2 * g2 + 12.0 * 3.0f64.sqrt() * inner.sqrt());
    let u = l.cbrt();
    let x_real = (u * u - u * v1_2 + v1_4) / (12.0 * u * v2);

    let s3 = 3.0f64.sqrt();
    let quarter = 1.0 / (24.0 * v2);
    let x_plus = Complex64::new(
        (-u - 2.0 * v1_2 - v1_4 / u) * quarter,
        (s3 * u - s3 * v1_4 / u) * quarter,
    );
    let x_minus = x_plus.conj();
    let (hi, lo) = if x_plus.im >= x_minus.im {
        (x_plus, x_minus)
    } else {
        (x_minus, x_plus)
    };

    Ok(BoundStateSet {
        e_bound: omega0 + x_real,
        delta_f: x_real,
        quasibound: (omega0 + hi, omega0 + lo),
        residual: pole_residual(x_real, v1, v2, gamma_b),
        delta_max_f: -v1_2 / (4.0 * v2),
    })
}

/// Same three roots found without radicals: simultaneous Weierstrass
/// (Durand-Kerner) iteration on the monic cubic. Serves as an independent
/// check on the closed form.
pub fn bound_state_numeric(
    omega0: f64,
    v_b1: f64,
    v_b2: f64,
    gamma_b: f64,
) -> Result<BoundStateSet> {
    ensure_finite("omega0", omega0)?;
    let v1 = validate_channel(v_b1, v_b2, gamma_b)?;
    let v2 = v_b2;
    let a2 = v1 * v1 / (4.0 * v2);
    let a0 = gamma_b * gamma_b * a2;
    let roots = durand_kerner(a2, 0.0, a0)?;

    let real_idx = (0..3)
        .min_by(|&i, &j| {
            roots[i]
                .im
                .abs()
                .partial_cmp(&roots[j].im.abs())
                .unwrap()
        })
        .unwrap();
    let x_real = roots[real_idx];
    if x_real.im.abs() > 1e-8 * (1.0 + x_real.re.abs()) {
        return Err(Error::NoConvergence(format!(
            "no root settled on the real axis (closest had imaginary part {})",
            x_real.im
        )));
    }
    let pair: Vec<Complex64> = (0..3).filter(|&i| i != real_idx).map(|i| roots[i]).collect();
    let (hi, lo) = if pair[0].im >= pair[1].im {
        (pair[0], pair[1])
    } else {
        (pair[1], pair[0])
    };

    Ok(BoundStateSet {
        e_bound: omega0 + x_real.re,
        delta_f: x_real.re,
        quasibound: (omega0 + hi, omega0 + lo),
        residual: pole_residual(x_real.re, v1, v2, gamma_b),
        delta_max_f: -a2,
    })
}

fn durand_kerner(a2: f64, a1: f64, a0: f64) -> Result<[Complex64; 3]> {
    let p = |z: Complex64| ((z + a2) * z + a1) * z + a0;
    let radius = 1.0 + a2.abs().max(a1.abs()).max(a0.abs());
    let seed = Complex64::new(0.4, 0.9);
    let mut z = [seed * radius, seed * seed * radius, seed * seed * seed * radius];
    for _ in 0..200 {
        let mut worst = 0.0f64;
        for j in 0..3 {
            let mut denom = Complex64::new(1.0, 0.0);
            for m in 0..3 {
                if m != j {
                    denom *= z[j] - z[m];
                }
            }
            if denom.norm() == 0.0 {
                z[j] += Complex64::new(1e-12 * radius, 1e-12 * radius);
                continue;
            }
            let step = p(z[j]) / denom;
            z[j] -= step;
            worst = worst.max(step.norm() / (1.0 + z[j].norm()));
        }
        if worst <= 1e-15 {
            return Ok(z);
        }
    }
    Err(Error::NoConvergence(
        "root iteration did not settle in 200 sweeps".into(),
    ))
}

/// The only pole of the linear-dispersion (Markovian) model: `ω0 - i γ_b`.
pub fn bound_state_linear(omega0: f64, gamma_b: f64) -> Result<Complex64> {
    ensure_finite("omega0", omega0)?;
    if ensure_finite("gamma_b", gamma_b)? < 0.0 {
        return Err(Error::Invalid(format!(
            "gamma_b must be nonnegative, got {gamma_b}"
        )));
    }
    Ok(Complex64::new(omega0, -gamma_b))
}

/// Feshbach detuning of a channel pair: the real pole produced by the b
/// channel, at which the a channel reflects completely.
pub fn feshbach_detuning(pair: &ChannelPair) -> Result<f64> {
    Ok(bound_state_closed_form(
        pair.a().omega0(),
        pair.b().v1(),
        pair.b().v2(),
        pair.gamma_b(),
    )?
    .delta_f)
}

/// On-shell t-matrix of the b channel alone,
/// `t_b(ω) = g₂² / (ω - ω0 - Σ_b(ω))`, defined for frequencies where the
/// channel propagates. At ω = ω0 it reduces to `-i v_b1 / 2π`.
pub fn b_mode_t_matrix(
    dispersion: &QuadraticDispersion,
    gamma_b: f64,
    omega: f64,
) -> Result<Complex64> {
    if ensure_finite("gamma_b", gamma_b)? <= 0.0 {
        return Err(Error::Invalid(format!(
            "gamma_b must be positive for a b-channel t-matrix, got {gamma_b}"
        )));
    }
    ensure_finite("omega", omega)?;
    if omega <= dispersion.band_minimum() {
        return Err(Error::BelowBandMinimum {
            detuning: omega - dispersion.omega0(),
            band_min: dispersion.delta_min(),
        });
    }
    let g2_sq = gamma_b * dispersion.v1().abs() / (2.0 * std::f64::consts::PI);
    let s = sigma(&SelfEnergyInput::new(*dispersion, gamma_b, omega)?)?;
    Ok(g2_sq / (omega - dispersion.omega0() - s.value))
}
