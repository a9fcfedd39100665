//! Geodesic motion compensation toolkit for 360-degree (ERP) video.
//!
//! * [`geometry`] – ERP ↔ sphere ↔ Cartesian conversions and the
//!   epipole-oriented frame.
//! * [`motion_model`] – original and geometry-corrected geodesic models,
//!   block mappings and operation counts.
//! * [`mocomp`] – bilinear ERP sampling, block prediction and motion search.
//! * [`camera_est`] – eight-point estimation of the camera motion direction
//!   and optical-flow refinement.
//! * [`cam_code`] – bit-exact per-frame camera-motion codec.
//! * [`metrics`] – WS-PSNR, BD-rate and report tables.
//! * [`io`] – raw YUV, `.flo`, CSV files and synthetic dolly sequences.

pub mod cam_code;
pub mod camera_est;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod mocomp;
pub mod motion_model;

pub use geometry::{ErpCoord, Rotation3, SphericalPoint, UnitVector3};
pub use mocomp::{BlockSpec, ErpFrame, Plane, Predictor};
pub use motion_model::{GeodesicModelConfig, ModelVariant, MotionVector2D, Scaling};
