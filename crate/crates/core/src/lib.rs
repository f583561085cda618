//! Generalized comb filters (GCF) for ΣΔ decimation: design, a partial
//! polyphase decimator, coefficient sensitivity, zero displacement and
//! folding-band quantization-noise metrics.

pub mod error;
pub mod exec;
pub mod filter;
pub mod poly;
pub mod polyphase;
pub mod qn;
pub mod quadrature;
pub mod quantize;
pub mod roots;
pub mod sensitivity;
pub mod zeros;

pub use error::{GcfError, Result};
pub use exec::Execution;
pub use filter::{comb_tf, gcf3_impulse, gcf3_tf_oracle, gcf_tf, GcfSpec, ImpulseResponse};
pub use poly::RealPolynomial;
pub use polyphase::{
    decimate_stream, polyphase_components, reference_decimate, split, CascadeSpec,
    PartialPolyphaseDecimator, PolyphaseBank,
};
pub use qn::{delta_pqn, deltapqn_sweep, pqn, qn_psd, QnModel, SweepTable, SweepTemplate};
pub use quantize::{po2_expand, round_to_error, Po2Expansion, QuantizedCoefficientSet};
pub use sensitivity::{error_function, freq_response, FrequencyGrid, PerturbationConfig};
pub use zeros::{
    displacement_hn, displacement_hp, nominal_zeros_gcf, nominal_zeros_hn, nominal_zeros_hp,
    root_oracle, ZeroSet,
};
