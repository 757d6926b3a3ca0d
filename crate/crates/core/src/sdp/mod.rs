//! Semidefinite programming: a real interior-point solver, its complex front end,
//! and the channel problems built on them.

pub mod embed;
pub mod pic;
pub mod solver;

pub use embed::{complex_to_real_embed, real_to_complex, ComplexConstraint, ComplexSdp, ComplexSolution};
pub use pic::{
    compress_choi, fidelity_sdp, fmax, lambda_max_sdp, pic_feasibility, FmaxContext, FmaxOptions, FmaxResult, PicOptions,
    PicVerdict,
};
pub use solver::{solve, Constraint, Residuals, SdpOptions, SdpProblem, SdpSolution, SdpStatus, Sense};
