//! Ego-motion of a ground-facing camera from block-matching optical flow.
//!
//! The stages are usable on their own:
//!
//! * [`block_match`] turns two grayscale frames into a [`FlowField`] of
//!   per-macroblock motion vectors (exhaustive SAD search);
//! * [`motion_model`] fits a 2D rigid transform to a field with RANSAC and
//!   removes the image shift caused by roll/pitch rates;
//! * [`metric_scale`] converts the transform to metric body-frame velocity
//!   using the ground distance, and integrates it into a planar pose;
//! * [`simulator`] renders synthetic sequences with exact ground truth;
//! * [`pipeline_eval`] chains everything over a stream and scores it.
//!
//! Streams of flow fields are stored in a small binary format (see
//! [`encode_mv_stream`]); sensor logs and results are CSV.

pub mod block_match;
pub mod cli;
mod error;
pub mod flow_core;
pub mod metric_scale;
pub mod motion_model;
pub mod pipeline_eval;
pub mod simulator;

pub use block_match::{compute_flow_field, match_block, GrayImage, MatchParams};
pub use error::{Error, Result};
pub use flow_core::{
    decode_mv_stream, encode_mv_stream, CameraIntrinsics, EstimateStatus, FlowField, GyroSample,
    MotionVector, Pose2D, RangeSample, RigidTransform2D, TimedPose, VelocityEstimate,
};
pub use metric_scale::{flow_to_velocity, integrate_pose, velocity_envelope};
pub use motion_model::{
    average_gyro, compensate_rotation, fit_rigid_2d, ransac_iterations, ransac_rigid, RansacParams,
};
pub use pipeline_eval::{run_pipeline, PipelineConfig, PipelineOutput};
pub use simulator::{simulate_sequence, SimConfig, SimOutput};
