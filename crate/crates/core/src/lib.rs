//! A McEliece-type public-key scheme over convolutional codes.
//!
//! The secret key is a Reed-Solomon generator `G`, a polynomial scrambler
//! `S(D)` with invertible lowest coefficient, and an invertible Laurent
//! polynomial matrix `T(D, D^-1) = Π Δ(D) Γ`. The public encoder is the
//! polynomial matrix `G'(D) = S(D) G T^-1`. Messages are streams of `k`-vectors;
//! errors may be spread along the stream as long as every `2μ+1` consecutive
//! error coefficients carry at most `t` nonzero symbols in total. Decryption
//! runs sequentially with a fixed delay.
//!
//! Modules:
//! - [`field`]: arithmetic in F_q.
//! - [`block_code`]: the inner Reed-Solomon code and its decoder.
//! - [`laurent`]: Laurent polynomial matrices and the admissible transforms.
//! - [`keygen`]: key pairs and the sliding/truncated generator matrices.
//! - [`channel`]: sliding-window error sequences.
//! - [`stream`]: encryption and streaming decryption.
//! - [`analysis`]: key-space counts and information-set-decoding estimates.
//! - [`format`]: binary key and ciphertext files.

pub mod analysis;
pub mod block_code;
pub mod channel;
pub mod error;
pub mod field;
pub mod format;
pub mod keygen;
pub mod laurent;
pub mod linalg;
pub mod poly;
pub mod stream;

pub use error::{Error, Result};
pub use field::{Field, FieldElement, FieldSpec};
pub use linalg::Matrix;
