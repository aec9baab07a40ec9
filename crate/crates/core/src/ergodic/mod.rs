//! Ergodic properties of the stage maps and their limit: Birkhoff averages, invariant
//! measures on the curves `y = u − g(x)`, oscillatory-integral bounds, uniform windows of
//! angles, density of orbits and Fourier diagnostics.

mod birkhoff;
mod density;
mod diagnostics;
mod observable;
mod oscillatory;
mod quadrature;
mod window;

pub use birkhoff::{
    birkhoff_average, deviation_sup, dirichlet_sum, last_exceedance, log_checkpoints, observe, pure_x_partial_sum,
    BirkhoffResult, Checkpoint, Dynamics,
};
pub use density::{density_check, extremal_points, scanned_oscillation, DensityReport};
pub use diagnostics::{
    coboundary_solve, difference_coefficients, lacunarity_report, sine_coefficients, small_divisor, CoboundaryMode,
    CoboundaryReport, LacunarityReport, DIVERGENCE_TOLERANCE,
};
pub use observable::{Observable, Term};
pub use oscillatory::{
    check_ladder, ladder_value, oscillatory_certificate, LadderCheck, OscillatoryOptions, OscillatoryReport,
    PiecewiseLinearCurve, QuadratureOutcome,
};
pub use quadrature::{
    bandwidth, bessel_cutoff, curve_integral, required_points, single_sine_integral, term_integral, term_points,
    MeasureProfile,
};
pub use window::{
    base_angle, gradient_sup, k_samples, lattice, rotation_horizon, stage_map, uniform_window, window_deviation,
    UniformWindow, WindowOptions,
};
