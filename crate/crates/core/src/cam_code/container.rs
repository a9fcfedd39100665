//! `GCMH` container: magic, version, record count, then per record a POC
//! and its byte-aligned residual payload. Integers are big-endian.

use std::collections::HashSet;

use super::{
    code_frame, decode_record, encode_record, predict_q, reconstruct_record, BitReader, BitWriter, CamCodeError,
    CamMotionRecord, CodecConfig,
};
use crate::geometry::UnitVector3;

pub const MAGIC: &[u8; 4] = b"GCMH";
pub const VERSION: u16 = 1;
const HEADER_LEN: usize = 10;

/// Camera-motion bit accounting of a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BitReport {
    pub frames: usize,
    /// Residual payload bits before byte padding.
    pub payload_bits: usize,
    /// Residual payload bytes after padding (POC fields excluded).
    pub payload_bytes: usize,
    pub container_bytes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedStream {
    pub bytes: Vec<u8>,
    pub records: Vec<CamMotionRecord>,
    /// Vectors as the decoder will reconstruct them, in decode order.
    pub reconstructed: Vec<(u32, UnitVector3)>,
    pub report: BitReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodedStream {
    pub records: Vec<CamMotionRecord>,
    pub q: Vec<(u32, UnitVector3)>,
    pub report: BitReport,
}

/// Encodes frames given in decode order as `(poc, q)`.
pub fn encode_stream(frames: &[(u32, UnitVector3)], cfg: &CodecConfig) -> Result<EncodedStream, CamCodeError> {
    let mut decoded: Vec<(u32, UnitVector3)> = Vec::with_capacity(frames.len());
    let mut records = Vec::with_capacity(frames.len());
    for (poc, q) in frames {
        let (rec, q_rec) = code_frame(*poc, q, &decoded, cfg);
        records.push(rec);
        decoded.push((*poc, q_rec));
    }
    let (bytes, report) = write_container(&records, cfg)?;
    Ok(EncodedStream {
        bytes,
        records,
        reconstructed: decoded,
        report,
    })
}

/// Serializes already quantized records.
pub fn write_container(records: &[CamMotionRecord], cfg: &CodecConfig) -> Result<(Vec<u8>, BitReport), CamCodeError> {
    let mut seen = HashSet::new();
    let count = u32::try_from(records.len()).map_err(|_| CamCodeError::Invalid("too many records".into()))?;
    let mut bytes = Vec::with_capacity(HEADER_LEN + records.len() * 9);
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&VERSION.to_be_bytes());
    bytes.extend_from_slice(&count.to_be_bytes());
    let mut report = BitReport {
        frames: records.len(),
        ..BitReport::default()
    };
    for rec in records {
        if !seen.insert(rec.poc) {
            return Err(CamCodeError::DuplicatePoc(rec.poc));
        }
        bytes.extend_from_slice(&rec.poc.to_be_bytes());
        let mut w = BitWriter::new();
        report.payload_bits += encode_record(&mut w, rec, cfg.k);
        let payload = w.into_bytes();
        report.payload_bytes += payload.len();
        bytes.extend_from_slice(&payload);
    }
    report.container_bytes = bytes.len();
    Ok((bytes, report))
}

fn read_u32(bytes: &[u8], at: usize) -> Result<u32, CamCodeError> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes(b.try_into().unwrap()))
        .ok_or(CamCodeError::Truncated)
}

/// Parses a container and reconstructs every frame's motion direction.
pub fn decode_stream(bytes: &[u8], cfg: &CodecConfig) -> Result<DecodedStream, CamCodeError> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(CamCodeError::Format("missing GCMH magic".into()));
    }
    let version = u16::from_be_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(CamCodeError::Format(format!("unsupported version {version}")));
    }
    let count = read_u32(bytes, 6)? as usize;
    let mut pos = HEADER_LEN;
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    let mut q: Vec<(u32, UnitVector3)> = Vec::new();
    let mut report = BitReport {
        frames: count,
        ..BitReport::default()
    };
    for _ in 0..count {
        let poc = read_u32(bytes, pos)?;
        pos += 4;
        if !seen.insert(poc) {
            return Err(CamCodeError::DuplicatePoc(poc));
        }
        let mut r = BitReader::new(&bytes[pos..]);
        let rec = decode_record(&mut r, poc, cfg.k)?;
        let used = r.position() / 8;
        let mut w = BitWriter::new();
        report.payload_bits += encode_record(&mut w, &rec, cfg.k);
        report.payload_bytes += used;
        pos += used;
        let q_hat = predict_q(poc, &q);
        q.push((poc, reconstruct_record(&rec, &q_hat, cfg)));
        records.push(rec);
    }
    if pos != bytes.len() {
        return Err(CamCodeError::Format(format!("{} trailing bytes", bytes.len() - pos)));
    }
    report.container_bytes = bytes.len();
    Ok(DecodedStream { records, q, report })
}

#[cfg(test)]
mod tests {
    use super::super::{max_reconstruction_error, FRAC_BITS};
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_unit(rng: &mut impl Rng) -> UnitVector3 {
        loop {
            let v = nalgebra::Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            if v.norm() > 0.1 && v.norm() <= 1.0 {
                return UnitVector3::from_vector(v).unwrap();
            }
        }
    }

    #[test]
    fn single_frame_along_z_is_five_bytes() {
        let s = encode_stream(&[(0, UnitVector3::Z)], &CodecConfig::default()).unwrap();
        assert_eq!(s.report.payload_bytes, 5);
        assert_eq!(s.report.payload_bits, 38);
        assert_eq!(s.bytes.len(), 10 + 4 + 5);
        assert_eq!(&s.bytes[..10], b"GCMH\x00\x01\x00\x00\x00\x01");
    }

    #[test]
    fn repeated_direction_predicts_perfectly() {
        let q = UnitVector3::normalize(0.1, 0.7, -0.2).unwrap();
        let s = encode_stream(&[(0, q), (1, q)], &CodecConfig::default()).unwrap();
        assert_eq!(s.records[1].theta_res.raw, 0);
        assert_eq!(s.records[1].phi_res.raw, 0);
    }

    #[test]
    fn stream_round_trip_and_reencode() {
        let cfg = CodecConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let frames: Vec<_> = [0u32, 8, 4, 2, 6, 1, 3, 5, 7]
            .iter()
            .map(|&p| (p, random_unit(&mut rng)))
            .collect();
        let enc = encode_stream(&frames, &cfg).unwrap();
        let dec = decode_stream(&enc.bytes, &cfg).unwrap();
        assert_eq!(dec.records, enc.records);
        assert_eq!(dec.q, enc.reconstructed);
        assert_eq!(dec.report, enc.report);
        for ((_, a), (_, b)) in frames.iter().zip(&dec.q) {
            assert!(a.angle_to(b) <= max_reconstruction_error(FRAC_BITS));
        }
        assert_eq!(write_container(&dec.records, &cfg).unwrap().0, enc.bytes);
        assert_eq!(encode_stream(&dec.q, &cfg).unwrap().bytes, enc.bytes);
    }

    #[test]
    fn closed_loop_with_coarse_quantizer() {
        let cfg = CodecConfig { frac_bits: 6, k: 2 };
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let frames: Vec<_> = (0..32).map(|p| (p, random_unit(&mut rng))).collect();
        let enc = encode_stream(&frames, &cfg).unwrap();
        let dec = decode_stream(&enc.bytes, &cfg).unwrap();
        // bit-identical vectors prove the encoder predicted from decoded data
        assert_eq!(dec.q, enc.reconstructed);
        for ((_, a), (_, b)) in frames.iter().zip(&dec.q) {
            assert!(a.angle_to(b) <= max_reconstruction_error(cfg.frac_bits));
        }
    }

    #[test]
    fn format_errors() {
        let cfg = CodecConfig::default();
        assert!(matches!(
            decode_stream(b"XXXX\x00\x01\x00\x00\x00\x00", &cfg),
            Err(CamCodeError::Format(_))
        ));
        assert!(matches!(
            decode_stream(b"GCMH\x00\x02\x00\x00\x00\x00", &cfg),
            Err(CamCodeError::Format(_))
        ));
        let dup = [(3, UnitVector3::Z), (3, UnitVector3::X)];
        assert_eq!(encode_stream(&dup, &cfg).unwrap_err(), CamCodeError::DuplicatePoc(3));
        let one = encode_stream(&[(3, UnitVector3::Z)], &cfg).unwrap().bytes;
        let mut twice = one.clone();
        twice[9] = 2;
        twice.extend_from_slice(&one[10..]);
        assert_eq!(decode_stream(&twice, &cfg).unwrap_err(), CamCodeError::DuplicatePoc(3));
        assert_eq!(
            decode_stream(&one[..one.len() - 1], &cfg).unwrap_err(),
            CamCodeError::Truncated
        );
    }
}
