//! Shared flag groups and value parsers.

use std::f64::consts::PI;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use ged_core::io::{ChromaFormat, SequenceSpec};
use ged_core::mocomp::Predictor;
use ged_core::motion_model::{GeodesicModelConfig, ModelVariant, Scaling};
use ged_core::UnitVector3;

/// `x,y,z` → unit vector (normalized).
pub fn parse_q(s: &str) -> Result<UnitVector3, String> {
    let v = parse_floats::<3>(s)?;
    UnitVector3::normalize(v[0], v[1], v[2]).map_err(|e| e.to_string())
}

/// `tu,tv`.
pub fn parse_t(s: &str) -> Result<[f64; 2], String> {
    parse_floats::<2>(s)
}

fn parse_floats<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let vals: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| format!("expected {N} comma-separated numbers, got '{s}'"))?;
    vals.try_into()
        .map_err(|_| format!("expected {N} comma-separated numbers, got '{s}'"))
}

/// `MxN` block size (width x height).
pub fn parse_block(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got '{s}'"))?;
    let w: usize = w.trim().parse().map_err(|_| format!("bad block width in '{s}'"))?;
    let h: usize = h.trim().parse().map_err(|_| format!("bad block height in '{s}'"))?;
    if w == 0 || h == 0 {
        return Err("block dimensions must be positive".into());
    }
    Ok((w, h))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    /// Plain ERP translation.
    Trans,
    /// Original geodesic model.
    Orig,
    /// Geometry-corrected model; radius chosen by --scaling.
    Gc,
    /// Geometry-corrected, global scaling.
    Gcg,
    /// Geometry-corrected, local scaling.
    Gcl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScalingArg {
    Global,
    Local,
}

impl From<ScalingArg> for Scaling {
    fn from(s: ScalingArg) -> Self {
        match s {
            ScalingArg::Global => Scaling::Global,
            ScalingArg::Local => Scaling::Local,
        }
    }
}

impl VariantArg {
    pub fn predictor(self, scaling: ScalingArg, delta: f64) -> Result<Predictor> {
        let cfg = |v, s| GeodesicModelConfig::new(v, s, delta).map(Predictor::Geodesic);
        Ok(match self {
            VariantArg::Trans => {
                if !(delta > 0.0 && delta < PI / 2.0) {
                    bail!("cli: delta must lie in (0, pi/2)");
                }
                Predictor::Translational { delta }
            }
            VariantArg::Orig => cfg(ModelVariant::Original, Scaling::Global)?,
            VariantArg::Gc => cfg(ModelVariant::GeometryCorrected, scaling.into())?,
            VariantArg::Gcg => cfg(ModelVariant::GeometryCorrected, Scaling::Global)?,
            VariantArg::Gcl => cfg(ModelVariant::GeometryCorrected, Scaling::Local)?,
        })
    }

    /// Model kernel and scaling for operation counting.
    pub fn kernel(self, scaling: ScalingArg) -> Result<(ModelVariant, Scaling)> {
        Ok(match self {
            VariantArg::Trans => bail!("cli: the translational predictor has no model kernel to count"),
            VariantArg::Orig => (ModelVariant::Original, Scaling::Global),
            VariantArg::Gc => (ModelVariant::GeometryCorrected, scaling.into()),
            VariantArg::Gcg => (ModelVariant::GeometryCorrected, Scaling::Global),
            VariantArg::Gcl => (ModelVariant::GeometryCorrected, Scaling::Local),
        })
    }
}

/// Raw YUV layout flags.
#[derive(Debug, Clone, Args)]
pub struct FrameArgs {
    #[arg(long)]
    pub width: usize,
    #[arg(long)]
    pub height: usize,
    #[arg(long = "bitdepth", default_value_t = 8)]
    pub bit_depth: u8,
    /// Luma-only files (default is 4:2:0).
    #[arg(long)]
    pub mono: bool,
}

impl FrameArgs {
    pub fn chroma(&self) -> ChromaFormat {
        if self.mono {
            ChromaFormat::Mono
        } else {
            ChromaFormat::Yuv420
        }
    }

    pub fn open(&self, path: &PathBuf) -> Result<SequenceSpec> {
        SequenceSpec::open(path, self.width, self.height, self.bit_depth, self.chroma(), None)
            .with_context(|| format!("opening {}", path.display()))
    }

    /// Default angular step: one luma row.
    pub fn default_delta(&self) -> f64 {
        PI / self.height as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parsers() {
        assert_eq!(parse_block("16x8"), Ok((16, 8)));
        assert!(parse_block("16").is_err());
        assert!(parse_block("0x8").is_err());
        assert_eq!(parse_t("1,-2.5"), Ok([1.0, -2.5]));
        assert!(parse_t("1").is_err());
        assert_eq!(parse_q("0,0,2"), Ok(UnitVector3::Z));
        assert!(parse_q("0,0,0").is_err());
    }
}
