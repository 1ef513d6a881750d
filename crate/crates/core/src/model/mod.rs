//! Physical inputs: level structure, induced dipoles, and the driving pulse.

mod pulse;
mod system;
mod timefn;

pub use pulse::{DerivativeMode, PhaseConvention, PulseSpec, VALIDATION_SAMPLES};
pub use system::{Sign, SystemModel, SystemSample};
pub use timefn::{
    format_sample_table, parse_sample_table, read_sample_table, Interpolation, Table, TimeFunction,
};
