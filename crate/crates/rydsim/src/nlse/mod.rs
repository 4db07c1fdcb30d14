//! Classical propagation in a blockade-saturated nonlocal Kerr medium.

mod field;
mod kernel;
mod propagate;
mod stability;

pub use field::{ComplexField2D, Fft2, TransverseGrid};
pub use kernel::{
    spinwave_correlator, thin_slab, volume_integral, BlockadeInteraction, KernelOptions, KernelProfile,
    NonlocalKernel, SpinwaveCorrelator,
};
pub use propagate::{absorption_law, propagate, AbsorbingRim, Propagator};
pub use stability::{bogoliubov_rate, plane_wave_stability, StabilityCurve};
