//! Per-frame camera-motion codec.
//!
//! Each frame carries the difference between the spherical angles of its
//! motion direction `q` and a prediction `q̂` taken from already decoded
//! frames. The two residual angles are quantized to signed fixed point and
//! written as Exp-Golomb magnitudes plus sign flags. Prediction is
//! closed-loop: the encoder only ever predicts from dequantized vectors.

mod bitstream;
mod container;

use std::f64::consts::PI;

use thiserror::Error;

use crate::geometry::{wrap_angle, wrap_angle_half_open_above, SphericalPoint, UnitVector3};

pub use bitstream::{eg_decode, eg_encode, eg_len, BitReader, BitWriter, MAX_EG_ORDER};
pub use container::{
    decode_stream, encode_stream, write_container, BitReport, DecodedStream, EncodedStream, MAGIC, VERSION,
};

/// Fractional bits of [`Q24Angle`].
pub const FRAC_BITS: u32 = 24;
/// Exp-Golomb order used for residual magnitudes.
pub const EG_ORDER: u32 = 18;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CamCodeError {
    #[error("cam_code: bitstream ended inside a codeword")]
    Truncated,
    #[error("cam_code: {0}")]
    Format(String),
    #[error("cam_code: duplicate picture order count {0}")]
    DuplicatePoc(u32),
    #[error("cam_code: {0}")]
    Invalid(String),
}

/// Codec parameters. The container does not store them; both ends must agree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodecConfig {
    pub frac_bits: u32,
    pub k: u32,
}

impl Default for CodecConfig {
    fn default() -> Self {
        Self {
            frac_bits: FRAC_BITS,
            k: EG_ORDER,
        }
    }
}

/// Signed fixed-point angle, `raw / 2^frac_bits` radians.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Q24Angle {
    pub raw: i64,
}

impl Q24Angle {
    pub fn to_radians(self, frac_bits: u32) -> f64 {
        self.raw as f64 / (1u64 << frac_bits) as f64
    }
}

/// Rounds to the nearest grid point, ties away from zero.
pub fn quantize(angle: f64, frac_bits: u32) -> Q24Angle {
    Q24Angle {
        raw: (angle * (1u64 << frac_bits) as f64).round() as i64,
    }
}

pub fn quantize_q24(angle: f64) -> Q24Angle {
    quantize(angle, FRAC_BITS)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CamMotionRecord {
    pub poc: u32,
    pub theta_res: Q24Angle,
    pub phi_res: Q24Angle,
}

/// Nearest decoded neighbor by picture order count. Equidistant neighbors
/// are averaged; if they nearly cancel, the lower POC wins. With nothing
/// decoded the prediction is `+z`.
pub fn predict_q(poc: u32, decoded: &[(u32, UnitVector3)]) -> UnitVector3 {
    let dist = |p: u32| (p as i64 - poc as i64).unsigned_abs();
    let Some(best) = decoded.iter().map(|&(p, _)| dist(p)).min() else {
        return UnitVector3::Z;
    };
    let mut nearest: Vec<&(u32, UnitVector3)> = decoded.iter().filter(|(p, _)| dist(*p) == best).collect();
    nearest.sort_by_key(|(p, _)| *p);
    if nearest.len() == 1 {
        return nearest[0].1;
    }
    let sum = nearest[0].1.as_vector() + nearest[1].1.as_vector();
    if sum.norm() < 1e-6 {
        return nearest[0].1;
    }
    UnitVector3::from_vector(sum).expect("norm checked above")
}

/// `(θ(q) − θ(q̂), wrap(φ(q) − φ(q̂)))` with the difference of azimuths in
/// `(−π, π]`.
pub fn residual_angles(q: &UnitVector3, q_hat: &UnitVector3) -> (f64, f64) {
    let (a, b) = (q.to_spherical(), q_hat.to_spherical());
    (a.theta - b.theta, wrap_angle_half_open_above(a.phi - b.phi))
}

/// Inverse of [`residual_angles`].
pub fn reconstruct_q(q_hat: &UnitVector3, theta_res: f64, phi_res: f64) -> UnitVector3 {
    let b = q_hat.to_spherical();
    SphericalPoint {
        theta: b.theta + theta_res,
        phi: wrap_angle(b.phi + phi_res),
    }
    .to_cartesian()
}

fn put_signed(w: &mut BitWriter, raw: i64, k: u32) {
    eg_encode(w, raw.unsigned_abs(), k);
    if raw != 0 {
        w.put_bit(raw < 0);
    }
}

fn get_signed(r: &mut BitReader<'_>, k: u32) -> Result<i64, CamCodeError> {
    let mag = eg_decode(r, k)?;
    let mag = i64::try_from(mag).map_err(|_| CamCodeError::Format("residual magnitude overflow".into()))?;
    if mag != 0 && r.get_bit()? {
        Ok(-mag)
    } else {
        Ok(mag)
    }
}

/// Appends the residual payload of one record and pads to a byte boundary.
/// Returns the payload length in bits before padding.
pub fn encode_record(w: &mut BitWriter, rec: &CamMotionRecord, k: u32) -> usize {
    let start = w.bit_len();
    put_signed(w, rec.theta_res.raw, k);
    put_signed(w, rec.phi_res.raw, k);
    let bits = w.bit_len() - start;
    w.align();
    bits
}

/// Reads the residuals written by [`encode_record`] and skips the padding.
pub fn decode_record(r: &mut BitReader<'_>, poc: u32, k: u32) -> Result<CamMotionRecord, CamCodeError> {
    let theta = get_signed(r, k)?;
    let phi = get_signed(r, k)?;
    r.align();
    Ok(CamMotionRecord {
        poc,
        theta_res: Q24Angle { raw: theta },
        phi_res: Q24Angle { raw: phi },
    })
}

/// Quantized residual of `q` against the prediction from `decoded`, plus the
/// vector the decoder will reconstruct from it.
pub fn code_frame(
    poc: u32,
    q: &UnitVector3,
    decoded: &[(u32, UnitVector3)],
    cfg: &CodecConfig,
) -> (CamMotionRecord, UnitVector3) {
    let q_hat = predict_q(poc, decoded);
    let (dt, dp) = residual_angles(q, &q_hat);
    let rec = CamMotionRecord {
        poc,
        theta_res: quantize(dt, cfg.frac_bits),
        phi_res: quantize(dp, cfg.frac_bits),
    };
    (rec, reconstruct_record(&rec, &q_hat, cfg))
}

pub fn reconstruct_record(rec: &CamMotionRecord, q_hat: &UnitVector3, cfg: &CodecConfig) -> UnitVector3 {
    reconstruct_q(
        q_hat,
        rec.theta_res.to_radians(cfg.frac_bits),
        rec.phi_res.to_radians(cfg.frac_bits),
    )
}

/// Upper bound on the per-frame reconstruction angle for `frac_bits`.
pub fn max_reconstruction_error(frac_bits: u32) -> f64 {
    (2f64).sqrt() / (1u64 << frac_bits) as f64 + 1e-12
}

/// Largest residual magnitude a valid record can carry.
pub fn max_raw(frac_bits: u32) -> i64 {
    (PI * (1u64 << frac_bits) as f64).ceil() as i64 + 1
}
