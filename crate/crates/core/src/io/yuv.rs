//! Raw planar YUV files.
//!
//! A frame is the luma plane followed, for 4:2:0, by Cb and Cr planes of
//! `ceil(W/2) × ceil(H/2)`. 8-bit samples take one byte; 10-bit samples take
//! two bytes, little-endian. Frame `i` starts at byte `i · frame_bytes`.

use std::fs::File;
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use super::IoError;
use crate::mocomp::{chroma_size, ErpFrame, Plane};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChromaFormat {
    Mono,
    Yuv420,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceSpec {
    pub path: PathBuf,
    pub width: usize,
    pub height: usize,
    pub bit_depth: u8,
    pub frame_count: usize,
    pub chroma: ChromaFormat,
}

impl SequenceSpec {
    /// Validates the layout against the file. With `frame_count = None` the
    /// file must hold a whole number of frames.
    pub fn open(
        path: impl AsRef<Path>,
        width: usize,
        height: usize,
        bit_depth: u8,
        chroma: ChromaFormat,
        frame_count: Option<usize>,
    ) -> Result<Self, IoError> {
        if width == 0 || height == 0 {
            return Err(IoError::Format(format!("invalid frame size {width}x{height}")));
        }
        if bit_depth != 8 && bit_depth != 10 {
            return Err(IoError::Format(format!("unsupported bit depth {bit_depth}")));
        }
        let path = path.as_ref().to_path_buf();
        let size = std::fs::metadata(&path)?.len() as usize;
        let mut spec = Self {
            path,
            width,
            height,
            bit_depth,
            frame_count: 0,
            chroma,
        };
        let frame = spec.frame_bytes();
        spec.frame_count = match frame_count {
            Some(n) if n * frame > size => {
                return Err(IoError::Truncated(format!(
                    "{} holds {size} bytes, {n} frames need {}",
                    spec.path.display(),
                    n * frame
                )))
            }
            Some(n) => n,
            None if !size.is_multiple_of(frame) => {
                return Err(IoError::Truncated(format!(
                    "{} holds {size} bytes, not a whole number of {frame}-byte frames",
                    spec.path.display()
                )))
            }
            None => size / frame,
        };
        Ok(spec)
    }

    pub fn bytes_per_sample(&self) -> usize {
        if self.bit_depth > 8 {
            2
        } else {
            1
        }
    }

    pub fn frame_bytes(&self) -> usize {
        frame_samples(self.width, self.height, self.chroma) * self.bytes_per_sample()
    }
}

fn frame_samples(width: usize, height: usize, chroma: ChromaFormat) -> usize {
    let (cw, ch) = chroma_size(width, height);
    match chroma {
        ChromaFormat::Mono => width * height,
        ChromaFormat::Yuv420 => width * height + 2 * cw * ch,
    }
}

fn decode_samples(bytes: &[u8], bit_depth: u8) -> Vec<u16> {
    if bit_depth > 8 {
        bytes
            .chunks_exact(2)
            .map(|b| u16::from_le_bytes([b[0], b[1]]))
            .collect()
    } else {
        bytes.iter().map(|&b| b as u16).collect()
    }
}

/// Reads frame `index` of the sequence.
pub fn read_yuv_frame(spec: &SequenceSpec, index: usize) -> Result<ErpFrame, IoError> {
    if index >= spec.frame_count {
        return Err(IoError::Range(format!(
            "frame {index} requested from a {}-frame sequence",
            spec.frame_count
        )));
    }
    let mut file = File::open(&spec.path)?;
    let len = spec.frame_bytes();
    file.seek(SeekFrom::Start((index * len) as u64))?;
    let mut buf = vec![0u8; len];
    file.read_exact(&mut buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => IoError::Truncated(format!("frame {index} is incomplete")),
        _ => IoError::Io(e),
    })?;
    let samples = decode_samples(&buf, spec.bit_depth);
    frame_from_samples(&samples, spec.width, spec.height, spec.bit_depth, spec.chroma)
}

fn frame_from_samples(
    samples: &[u16],
    w: usize,
    h: usize,
    bit_depth: u8,
    chroma: ChromaFormat,
) -> Result<ErpFrame, IoError> {
    let luma = Plane::new(w, h, samples[..w * h].to_vec())?;
    let chroma_planes = match chroma {
        ChromaFormat::Mono => None,
        ChromaFormat::Yuv420 => {
            let (cw, ch) = chroma_size(w, h);
            let n = cw * ch;
            let cb = Plane::new(cw, ch, samples[w * h..w * h + n].to_vec())?;
            let cr = Plane::new(cw, ch, samples[w * h + n..w * h + 2 * n].to_vec())?;
            Some([cb, cr])
        }
    };
    Ok(ErpFrame::new(luma, bit_depth, chroma_planes)?)
}

/// Reads every frame of the sequence.
pub fn read_sequence(spec: &SequenceSpec) -> Result<Vec<ErpFrame>, IoError> {
    (0..spec.frame_count).map(|i| read_yuv_frame(spec, i)).collect()
}

/// Appends one frame in the layout implied by its bit depth and chroma.
/// Mono frames written as 4:2:0 get mid-grey chroma.
pub fn write_yuv_frame(out: &mut impl Write, frame: &ErpFrame, chroma: ChromaFormat) -> Result<(), IoError> {
    let put = |out: &mut dyn Write, data: &[u16]| -> std::io::Result<()> {
        if frame.bit_depth > 8 {
            let bytes: Vec<u8> = data.iter().flat_map(|s| s.to_le_bytes()).collect();
            out.write_all(&bytes)
        } else {
            let bytes: Vec<u8> = data.iter().map(|&s| s as u8).collect();
            out.write_all(&bytes)
        }
    };
    put(out, &frame.luma.data)?;
    if chroma == ChromaFormat::Yuv420 {
        match &frame.chroma {
            Some([cb, cr]) => {
                put(out, &cb.data)?;
                put(out, &cr.data)?;
            }
            None => {
                let (cw, ch) = chroma_size(frame.width(), frame.height());
                let grey = vec![1u16 << (frame.bit_depth - 1); cw * ch];
                put(out, &grey)?;
                put(out, &grey)?;
            }
        }
    }
    Ok(())
}

pub fn write_sequence(path: impl AsRef<Path>, frames: &[ErpFrame], chroma: ChromaFormat) -> Result<(), IoError> {
    let mut out = std::io::BufWriter::new(File::create(path)?);
    for f in frames {
        write_yuv_frame(&mut out, f, chroma)?;
    }
    out.flush()?;
    Ok(())
}
