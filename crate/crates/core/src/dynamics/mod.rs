//! Time-dependent side of the model: propagators, wave operators, sojourn
//! times and the time-delay sweep.

pub mod propagation;
pub mod propagator;
pub mod sojourn;
pub mod sweep;
pub mod wave;

pub use propagation::{propagation_functional, propagation_functional_of, PropagationMethod};
pub use propagator::{build_propagator, Evolution, Propagator, SpectralPacket};
pub use sojourn::{
    free_sojourn_analytic, free_sojourn_numeric, full_sojourn, momentum_extent, sojourn, ScatteringStates, SojournMethod,
    SojournOptions, SojournValue, ToeplitzWindow,
};
pub use sweep::{fit_power_law, time_delay_sweep, Extrapolation, FitModel, SojournRecord, SweepOptions, SweepResult};
pub use wave::{wave_operator, WaveMethod, WaveOptions, WaveResult, WaveSign};
