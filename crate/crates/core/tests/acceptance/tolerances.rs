//! Thresholds of the acceptance suite, one block per criterion.

// 1-2: phase algebra over the box |k_i| <= 64
pub const PHASE_BOX: usize = 64;
pub const PHASE_EPSILONS: [f64; 3] = [0.0, 0.5, 1.0];
pub const PHASE_RUNTIME_S: f64 = 30.0;

// 3: reference solver
pub const LINEAR_TOL: f64 = 1e-10;
pub const SELF_CONVERGENCE_ORDER: f64 = 3.5;
pub const CONVERGENCE_BAND: usize = 64;

// 4: conservation at ε = 0
pub const CONSERVATION_L2_NORM: f64 = 0.5;
pub const L2_DRIFT: f64 = 1e-8;
pub const H_DRIFT: f64 = 1e-6;
pub const CONSERVATION_RUNTIME_S: f64 = 60.0;

// 5: dissipation identity
pub const IDENTITY_EPSILONS: [f64; 3] = [0.01, 0.1, 1.0];
pub const IDENTITY_RESIDUAL: f64 = 1e-6;

// 6: operator oracle
pub const ORACLE_TRIALS: usize = 100;
pub const ORACLE_MAX_BAND: usize = 4;
pub const ORACLE_TOL: f64 = 1e-13;

// 7: Picard against reference
pub const PICARD_BAND: usize = 128;
pub const PICARD_DATA_NORM: f64 = 0.1;
pub const PICARD_DISTANCE: f64 = 1e-6;
pub const CONTRACTION_RATIO: f64 = 0.5;
pub const PICARD_RUNTIME_S: f64 = 300.0;

// 8: N-scaling probes
pub const PROBE_SPLITS: [usize; 4] = [8, 16, 32, 64];
pub const BOUNDARY_EXPONENT_MAX: f64 = -0.9;
pub const REMAINDER_EXPONENT_WINDOW: f64 = 0.2;

// 9-10: inviscid rates
pub const SWEEP_EPSILONS: [f64; 5] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
pub const SWEEP_BAND: usize = 128;
pub const RATE_MIN: f64 = 0.45;
pub const RATE_R2_MIN: f64 = 0.95;
pub const RATE_DECADE_GAIN: f64 = 10.0;
pub const SWEEP_RUNTIME_S: f64 = 900.0;

// 11: uniform continuity
pub const LIPSCHITZ_EPSILONS: [f64; 4] = [1e-3, 1e-2, 1e-1, 1.0];
pub const LIPSCHITZ_PERTURBATION: f64 = 1e-4;
pub const LIPSCHITZ_SPREAD: f64 = 2.0;

// 12: budgets
pub const BUDGET_SPREAD: f64 = 2.0;

// 13: quintic probe
pub const QUINTIC_BANDS: [usize; 2] = [64, 128];
pub const QUINTIC_VARIATION: f64 = 0.5;
