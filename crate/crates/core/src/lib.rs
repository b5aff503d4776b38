//! Extended-score inference for score-based diffusion models.
//!
//! The crate is organised bottom-up:
//!
//! * [`models`]: analytic distributions with exact smoothed and extended scores
//! * [`xscore`]: the extended-score operator over any [`ScoreOracle`]
//! * [`sampler`]: time schedules and the standard and extended inference loops
//! * [`nnscore`]: a learned denoiser that plugs in as a score oracle
//! * [`synthdata`]: seeded synthetic datasets and their reference manifolds
//! * [`oracle`]: brute-force reference computations and statistical tests
//! * [`validation`]: closed forms checked against those references

pub mod error;
pub mod linalg;
pub mod models;
pub mod nnscore;
pub mod oracle;
pub mod sampler;
pub mod synthdata;
pub mod validation;
pub mod xscore;

pub use error::{Error, Result};
pub use models::{Model, ScoreKind};
pub use sampler::{Method, Sampler, TimeSchedule, Trajectory};
pub use xscore::{Derivative, MadParams, ScoreOracle};
