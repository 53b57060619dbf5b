//! Bit-level encoding and decoding of lifted coupled codes.

pub mod decode;
pub mod encode;

pub use decode::{
    decode_layered, decode_slme, decode_windowed, default_step, layer_ordering, DecodeConfig, DecodeOutput, Decoder,
    Executor, Variant,
};
pub use encode::Encoder;
