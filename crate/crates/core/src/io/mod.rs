//! File formats and synthetic test sequences.

mod flo;
mod synth;
mod text;
mod yuv;

use thiserror::Error;

use crate::camera_est::CameraEstError;
use crate::mocomp::MocompError;

pub use flo::{encode_flo, parse_flo, read_flo, write_flo, FLO_MAGIC};
pub use synth::{synth_dolly, SceneShape, SynthSequence, SynthSpec};
pub use text::{
    format_pairs, format_q_csv, format_rd_csv, parse_pairs, parse_q_csv, parse_rd_csv, pixel_pairs_to_bearings,
    read_pairs, read_q_csv, read_rd_csv, write_q_csv, Q_DECIMALS,
};
pub use yuv::{read_sequence, read_yuv_frame, write_sequence, write_yuv_frame, ChromaFormat, SequenceSpec};

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("io: malformed input: {0}")]
    Format(String),
    #[error("io: truncated input: {0}")]
    Truncated(String),
    #[error("io: out of range: {0}")]
    Range(String),
    #[error("io: {0}")]
    Invalid(String),
    #[error("io: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Frame(#[from] MocompError),
    #[error(transparent)]
    Flow(#[from] CameraEstError),
}
