//! Rectangular-waveguide geometry: TE-mode cutoffs, transverse profiles,
//! dipole couplings, and the quadratic expansion of the exact dispersion
//! around the emitter frequency.
//!
//! A hollow guide of cross-section `l_x × l_y` carries TE modes indexed by
//! `(m, n)` with cutoff wavenumber `k_cut = sqrt((m π / l_x)² + (n π / l_y)²)`
//! and exact dispersion `ω(k) = c sqrt(k_cut² + k²)` along the guide axis.
//! The two lowest modes relevant here are TE01 (channel a, lower cutoff) and
//! TE11 (channel b, higher cutoff).
//!
//! Field amplitudes use natural units ħ = ε₀ = 1, so the per-photon amplitude
//! in quantization volume `V_k = 2π l_x l_y / |k|` is `ε_k = sqrt(ω / (2 V_k))`.
//! Only |g|² reaches any observable, through the decay rate γ = 2π|g|²/v1.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Cross-section and propagation speed of the guide. Lengths and `c` are in
/// mutually consistent units; nothing here assumes SI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveguideGeometry {
    l_x: f64,
    l_y: f64,
    c: f64,
}

impl WaveguideGeometry {
    pub fn new(l_x: f64, l_y: f64, c: f64) -> Result<Self> {
        for (name, v) in [("l_x", l_x), ("l_y", l_y), ("c", c)] {
            if ensure_finite(name, v)? <= 0.0 {
                return Err(Error::Invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { l_x, l_y, c })
    }

    pub fn l_x(&self) -> f64 {
        self.l_x
    }

    pub fn l_y(&self) -> f64 {
        self.l_y
    }

    pub fn c(&self) -> f64 {
        self.c
    }
}

/// Transverse TE mode labels `(m, n)`; at least one index must be nonzero for
/// the mode to carry any field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeIndex {
    pub m: u32,
    pub n: u32,
}

impl ModeIndex {
    /// Channel a: the lowest mode of a guide with `l_x ≤ l_y`.
    pub const TE01: ModeIndex = ModeIndex { m: 0, n: 1 };
    /// Channel b: first mode with structure along both transverse axes.
    pub const TE11: ModeIndex = ModeIndex { m: 1, n: 1 };
}

/// Two-level emitter: transition frequency, position in the cross-section,
/// and the in-plane dipole components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomParams {
    pub omega0: f64,
    pub x0: f64,
    pub y0: f64,
    pub d_x: f64,
    pub d_y: f64,
}

/// Which side of the parabola the expansion point sits on: sign of the
/// on-shell wavenumber k0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Positive,
    Negative,
}

/// How the quadratic coefficient is reconstructed in
/// [`ChannelPair::from_delta`]. `Exact` is the Taylor coefficient of the
/// exact dispersion; `Legacy` reproduces a traditional shorthand that drops
/// one factor of v1 in the correction term (the two agree at v1 = 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurvatureForm {
    #[default]
    Exact,
    Legacy,
}

pub fn cutoff_wavenumber(geom: &WaveguideGeometry, mode: ModeIndex) -> f64 {
    let kx = f64::from(mode.m) * std::f64::consts::PI / geom.l_x;
    let ky = f64::from(mode.n) * std::f64::consts::PI / geom.l_y;
    kx.hypot(ky)
}

pub fn cutoff_frequency(geom: &WaveguideGeometry, mode: ModeIndex) -> f64 {
    geom.c * cutoff_wavenumber(geom, mode)
}

/// Exact TE dispersion `ω = c sqrt(k_cut² + k²)` at axial wavenumber `k`.
pub fn exact_dispersion(geom: &WaveguideGeometry, mode: ModeIndex, k: f64) -> f64 {
    geom.c * cutoff_wavenumber(geom, mode).hypot(k)
}

/// Real transverse pattern `(p_x, p_y)` of a TE mode at a point in the
/// cross-section. The full mode functions are
/// `u_x = -i ε_k p_x e^{ikz}` and `u_y = +i ε_k p_y e^{ikz}` with
///
/// ```text
/// p_x = (2 n π / (k_cut l_y)) cos(m π x / l_x) sin(n π y / l_y)
/// p_y = (2 m π / (k_cut l_x)) sin(m π x / l_x) cos(n π y / l_y)
/// ```
///
/// The (0, 0) index carries no field and returns (0, 0).
pub fn mode_profile(
    geom: &WaveguideGeometry,
    mode: ModeIndex,
    x: f64,
    y: f64,
) -> Result<(f64, f64)> {
    ensure_finite("x", x)?;
    ensure_finite("y", y)?;
    if !(0.0..=geom.l_x).contains(&x) || !(0.0..=geom.l_y).contains(&y) {
        return Err(Error::Invalid(format!(
            "point ({x}, {y}) lies outside the cross-section {} x {}",
            geom.l_x, geom.l_y
        )));
    }
    if mode.m == 0 && mode.n == 0 {
        return Ok((0.0, 0.0));
    }
    let pi = std::f64::consts::PI;
    let k_cut = cutoff_wavenumber(geom, mode);
    let mx = f64::from(mode.m) * pi * x / geom.l_x;
    let ny = f64::from(mode.n) * pi * y / geom.l_y;
    let p_x = 2.0 * f64::from(mode.n) * pi / (k_cut * geom.l_y) * mx.cos() * ny.sin();
    let p_y = 2.0 * f64::from(mode.m) * pi / (k_cut * geom.l_x) * mx.sin() * ny.cos();
    Ok((p_x, p_y))
}

/// Propagation factor `e^{ikz}` along the guide axis.
pub fn longitudinal_phase(k: f64, z: f64) -> Complex64 {
    Complex64::cis(k * z)
}

/// Per-photon field amplitude `ε_k = sqrt(ω / (2 V_k))` with quantization
/// volume `V_k = 2π l_x l_y / |k|` (natural units ħ = ε₀ = 1). Vanishing `k`
/// has no finite quantization volume and is rejected.
pub fn field_amplitude(geom: &WaveguideGeometry, mode: ModeIndex, k: f64) -> Result<f64> {
    ensure_finite("k", k)?;
    if k == 0.0 {
        return Err(Error::Invalid(
            "field amplitude is undefined at k = 0 (infinite quantization volume)".into(),
        ));
    }
    let omega = exact_dispersion(geom, mode, k);
    let v_k = 2.0 * std::f64::consts::PI * geom.l_x * geom.l_y / k.abs();
    Ok((omega / (2.0 * v_k)).sqrt())
}

/// Dipole coupling `g = -d·u(r0) = i ε_k (d_x p_x - d_y p_y)` of the emitter
/// to one mode at axial wavenumber `k` (emitter at z = 0).
pub fn coupling_strength(
    geom: &WaveguideGeometry,
    atom: &AtomParams,
    mode: ModeIndex,
    k: f64,
) -> Result<Complex64> {
    ensure_finite("d_x", atom.d_x)?;
    ensure_finite("d_y", atom.d_y)?;
    let eps = field_amplitude(geom, mode, k)?;
    let (p_x, p_y) = mode_profile(geom, mode, atom.x0, atom.y0)?;
    Ok(Complex64::new(0.0, eps * (atom.d_x * p_x - atom.d_y * p_y)))
}

/// One channel of the problem: the dispersion `ω(k) = ω0 + v1 k + v2 k²`
/// obtained by expanding the exact branch to second order around the on-shell
/// point, valid for detunings small against ω0. The band minimum sits at
/// `k_C = -v1/(2 v2)`, i.e. at detuning `-v1²/(4 v2)` below ω0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticDispersion {
    omega0: f64,
    v1: f64,
    v2: f64,
}

impl QuadraticDispersion {
    pub fn new(omega0: f64, v1: f64, v2: f64) -> Result<Self> {
        if ensure_finite("omega0", omega0)? <= 0.0 {
            return Err(Error::Invalid(format!(
                "omega0 must be positive, got {omega0}"
            )));
        }
        if ensure_finite("v1", v1)? == 0.0 {
            return Err(Error::Invalid("v1 must be nonzero".into()));
        }
        if ensure_finite("v2", v2)? <= 0.0 {
            return Err(Error::Invalid(format!("v2 must be positive, got {v2}")));
        }
        Ok(Self { omega0, v1, v2 })
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn v1(&self) -> f64 {
        self.v1
    }

    pub fn v2(&self) -> f64 {
        self.v2
    }

    /// Lowest frequency of the band, `ω0 - v1²/(4 v2)`.
    pub fn band_minimum(&self) -> f64 {
        self.omega0 + self.delta_min()
    }

    /// Detuning of the band minimum below the emitter frequency,
    /// `-v1²/(4 v2)` (always negative).
    pub fn delta_min(&self) -> f64 {
        -self.v1 * self.v1 / (4.0 * self.v2)
    }

    /// Wavenumber of the band minimum, `k_C = -v1/(2 v2)`.
    pub fn k_min(&self) -> f64 {
        -self.v1 / (2.0 * self.v2)
    }

    /// Detuning `Δ(k) = v1 k + v2 k²` of the quadratic branch from ω0.
    pub fn detuning_of_k(&self, k: f64) -> f64 {
        (self.v1 + self.v2 * k) * k
    }

    /// Both wavenumbers at which the branch reaches detuning `Δ`, ordered
    /// with the root on the expansion side of the parabola first (the one
    /// that tends to 0 as Δ → 0). Fails below the band minimum. Each root is
    /// computed from the cancellation-free half of the quadratic formula.
    pub fn k_of_detuning(&self, delta: f64) -> Result<(f64, f64)> {
        ensure_finite("delta", delta)?;
        let q = self.v1 * self.v1;
        let mut disc = q + 4.0 * self.v2 * delta;
        if disc < 0.0 {
            // Absorb the rounding of delta_min() itself; anything further
            // below the vertex is genuinely outside the band.
            if disc >= -8.0 * f64::EPSILON * q {
                disc = 0.0;
            } else {
                return Err(Error::BelowBandMinimum {
                    detuning: delta,
                    band_min: self.delta_min(),
                });
            }
        }
        let s = disc.sqrt();
        let sign = self.v1.signum();
        let big = self.v1.abs() + s;
        let near = 2.0 * delta / (sign * big);
        let far = -sign * big / (2.0 * self.v2);
        Ok((near, far))
    }
}

/// Second-order Taylor expansion of the exact TE dispersion around the
/// on-shell wavenumber `k0` with `ω(k0) = omega0`:
/// `v1 = c² k0 / ω0`, `v2 = c⁴ k_cut² / (2 ω0³)`. Fails when the mode is not
/// open at `omega0`.
pub fn quadratic_expand(
    geom: &WaveguideGeometry,
    omega0: f64,
    mode: ModeIndex,
    direction: Direction,
) -> Result<QuadraticDispersion> {
    if ensure_finite("omega0", omega0)? <= 0.0 {
        return Err(Error::Invalid(format!(
            "omega0 must be positive, got {omega0}"
        )));
    }
    let k_cut = cutoff_wavenumber(geom, mode);
    let cutoff = geom.c * k_cut;
    if omega0 <= cutoff {
        return Err(Error::ChannelClosed { omega0, cutoff });
    }
    let c2 = geom.c * geom.c;
    let k0_abs = (omega0 * omega0 / c2 - k_cut * k_cut).sqrt();
    let k0 = match direction {
        Direction::Positive => k0_abs,
        Direction::Negative => -k0_abs,
    };
    let v1 = c2 * k0 / omega0;
    let v2 = c2 * c2 * k_cut * k_cut / (2.0 * omega0 * omega0 * omega0);
    QuadraticDispersion::new(omega0, v1, v2)
}

/// Largest square cross-section (side length) for which a given transition
/// frequency still falls below the second cutoff, so the guide is genuinely
/// single-mode at ω0: `L_c = (√2 - 1) π c / ω0`. Here `c` and `ω0` are in
/// explicit physical units (e.g. m/s and rad/s).
pub fn critical_size(omega0: f64, c: f64) -> Result<f64> {
    if ensure_finite("omega0", omega0)? <= 0.0 {
        return Err(Error::Invalid(format!(
            "omega0 must be positive, got {omega0}"
        )));
    }
    if ensure_finite("c", c)? <= 0.0 {
        return Err(Error::Invalid(format!("c must be positive, got {c}")));
    }
    Ok((2.0f64.sqrt() - 1.0) * std::f64::consts::PI * c / omega0)
}

/// The two transverse channels sharing one emitter: the open channel a
/// (photon comes in and leaves here) and the closed-or-open channel b whose
/// band minimum sits inside the a band. Stores the Markovian decay rates
/// γ_a > 0 and γ_b ≥ 0 into each channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelPair {
    a: QuadraticDispersion,
    b: QuadraticDispersion,
    gamma_a: f64,
    gamma_b: f64,
}

impl ChannelPair {
    pub fn new(
        a: QuadraticDispersion,
        b: QuadraticDispersion,
        gamma_a: f64,
        gamma_b: f64,
    ) -> Result<Self> {
        if a.omega0() != b.omega0() {
            return Err(Error::Invalid(format!(
                "channels must share the emitter frequency: {} vs {}",
                a.omega0(),
                b.omega0()
            )));
        }
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
        Ok(Self {
            a,
            b,
            gamma_a,
            gamma_b,
        })
    }

    /// Builds the pair from the cutoff offset `δ` of the a channel, defined
    /// by `ω0² - ω_a,cut² = δ²` with `0 < |δ| < ω0` (sign of δ follows the
    /// sign of the on-shell k0). For a square cross-section the b-channel
    /// coefficients follow from the same geometry:
    ///
    /// ```text
    /// v_a2 = ω0 v_a1² / (2 δ²) - v_a1²/(2 ω0)      (Exact)
    /// v_b1 = |v_a1| sqrt(2 δ² - ω0²) / δ
    /// v_b2 = 2 v_a2
    /// ```
    ///
    /// requiring `2 δ² > ω0²`, i.e. the b channel open at ω0.
    pub fn from_delta(
        omega0: f64,
        delta: f64,
        v_a1: f64,
        gamma_a: f64,
        gamma_b: f64,
        form: CurvatureForm,
    ) -> Result<Self> {
        if ensure_finite("omega0", omega0)? <= 0.0 {
            return Err(Error::Invalid(format!(
                "omega0 must be positive, got {omega0}"
            )));
        }
        ensure_finite("delta", delta)?;
        ensure_finite("v_a1", v_a1)?;
        if delta == 0.0 || delta.abs() >= omega0 {
            return Err(Error::Invalid(format!(
                "delta must satisfy 0 < |delta| < omega0, got {delta}"
            )));
        }
        let two_d2 = 2.0 * delta * delta;
        if two_d2 <= omega0 * omega0 {
            // For a square cross-section the b cutoff is sqrt(2) times the a
            // cutoff; this is where it crosses omega0.
            return Err(Error::ChannelClosed {
                omega0,
                cutoff: (2.0 * (omega0 * omega0 - delta * delta)).sqrt(),
            });
        }
        let va1_sq = v_a1 * v_a1;
        let v_a2 = match form {
            CurvatureForm::Exact => {
                omega0 * va1_sq / (2.0 * delta * delta) - va1_sq / (2.0 * omega0)
            }
            CurvatureForm::Legacy => {
                omega0 * va1_sq / (2.0 * delta * delta) - v_a1 / (2.0 * omega0)
            }
        };
        if v_a2 <= 0.0 || v_a2.is_nan() {
            return Err(Error::Invalid(format!(
                "reconstructed v_a2 = {v_a2} is not positive"
            )));
        }
        let v_b1 = v_a1.abs() * (two_d2 - omega0 * omega0).sqrt() / delta;
        let v_b2 = 2.0 * v_a2;
        let a = QuadraticDispersion::new(omega0, v_a1, v_a2)?;
        let b = QuadraticDispersion::new(omega0, v_b1, v_b2)?;
        Self::new(a, b, gamma_a, gamma_b)
    }

    /// Expands both channels of a physical geometry around the emitter
    /// frequency and converts the dipole couplings at the on-shell
    /// wavenumbers into decay rates. Fails if either mode is closed at ω0 or
    /// if the a-channel coupling vanishes at the emitter position.
    pub fn from_geometry(geom: &WaveguideGeometry, atom: &AtomParams) -> Result<Self> {
        let a = quadratic_expand(geom, atom.omega0, ModeIndex::TE01, Direction::Positive)?;
        let b = quadratic_expand(geom, atom.omega0, ModeIndex::TE11, Direction::Positive)?;
        let c2 = geom.c * geom.c;
        let k0 = |mode: ModeIndex| -> f64 {
            let k_cut = cutoff_wavenumber(geom, mode);
            (atom.omega0 * atom.omega0 / c2 - k_cut * k_cut).sqrt()
        };
        let g_a = coupling_strength(geom, atom, ModeIndex::TE01, k0(ModeIndex::TE01))?;
        let g_b = coupling_strength(geom, atom, ModeIndex::TE11, k0(ModeIndex::TE11))?;
        let gamma_a = crate::self_energy::decay_rate(g_a.norm(), a.v1())?;
        let gamma_b = crate::self_energy::decay_rate(g_b.norm(), b.v1())?;
        if gamma_a == 0.0 {
            return Err(Error::Invalid(
                "a-channel coupling vanishes at the emitter position".into(),
            ));
        }
        Self::new(a, b, gamma_a, gamma_b)
    }

    pub fn a(&self) -> &QuadraticDispersion {
        &self.a
    }

    pub fn b(&self) -> &QuadraticDispersion {
        &self.b
    }

    pub fn gamma_a(&self) -> f64 {
        self.gamma_a
    }

    pub fn gamma_b(&self) -> f64 {
        self.gamma_b
    }

    pub fn with_gamma_b(&self, gamma_b: f64) -> Result<Self> {
        Self::new(self.a, self.b, self.gamma_a, gamma_b)
    }

    /// Band minimum of the open channel, as a detuning from ω0. Scattering
    /// states exist only above this.
    pub fn delta_min(&self) -> f64 {
        self.a.delta_min()
    }

    /// Band minimum of the b channel, as a detuning from ω0. This is the
    /// upper limit of bound-state detunings and the branch point of the
    /// b-channel self-energy.
    pub fn delta_max_f(&self) -> f64 {
        self.b.delta_min()
    }
}
