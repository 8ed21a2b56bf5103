//! Single-photon scattering in a finite-cross-section rectangular waveguide
//! coupled to a two-level emitter.
//!
//! The emitter talks to two transverse modes of the guide. Photons arrive in
//! the lower (a) mode; the upper (b) mode opens a second decay path whose
//! band edge sits inside the a band, so transmission shows both a bare-line
//! resonance and a Feshbach-type bound-state resonance with its asymmetric
//! line shape. The crate computes:
//!
//! - mode geometry: cutoffs, exact dispersion, mode profiles, dipole
//!   couplings, and the quadratic expansion of each branch about the emitter
//!   frequency ([`waveguide`]);
//! - the b-channel self-energy in closed form and by direct quadrature of
//!   the dispersion integral ([`self_energy`]);
//! - bound and quasibound poles of the dressed emitter, including the
//!   Feshbach detuning where transmission vanishes ([`bound_states`]);
//! - reflection, transmission, and channel-loss amplitudes in the linear and
//!   quadratic dispersion approximations, resonance catalogs, excitation
//!   amplitudes, and Fano profiles ([`scattering`]);
//! - configurable grid sweeps with figure presets, CSV/JSON output, and a
//!   named-invariant self-check battery ([`sweep`]).
//!
//! Natural units: ħ = ε₀ = 1 and frequencies are measured against the
//! emitter transition, so a "detuning" Δ is E − ω₀ throughout.

pub mod bound_states;
pub mod error;
pub mod scattering;
pub mod self_energy;
pub mod sweep;
pub mod waveguide;

pub use bound_states::{
    b_mode_t_matrix, bound_state_closed_form, bound_state_linear, bound_state_numeric,
    feshbach_detuning, BoundStateSet,
};
pub use error::{Error, Result};
pub use scattering::{
    excitation_amplitude, fano_profile, find_resonances, locate_transmission_zeros,
    scatter_linear, scatter_quadratic, scatter_quadratic_by_k, ChannelSelector, LimitKind,
    ResonanceSet, ScatteringPoint, BRANCH_POINT_WINDOW,
};
pub use self_energy::{
    coupling_of_rate, decay_rate, default_k_cutoff, sigma, sigma_integral_once,
    sigma_integral_oracle, Branch, SelfEnergyInput, SelfEnergyValue,
};
pub use sweep::{
    apply_set, parse_config, preset, resolve_pair, run_sweep, verify, Axis, CheckResult, Column,
    Model, OutputFormat, Params, Range, RowFlag, SweepConfig, SweepError, SweepResult, SweepRow,
    VerifyReport,
};
pub use waveguide::{
    coupling_strength, critical_size, cutoff_frequency, cutoff_wavenumber, exact_dispersion,
    field_amplitude, longitudinal_phase, mode_profile, quadratic_expand, AtomParams, ChannelPair,
    CurvatureForm, Direction, ModeIndex, QuadraticDispersion, WaveguideGeometry,
};
