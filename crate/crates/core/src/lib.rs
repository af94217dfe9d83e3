//! Two-stage stochastic integer programming with stage-wise Fenchel
//! decomposition and integer-set reduction.

pub mod fcg;
pub mod gen;
pub mod isg;
pub mod lp;
pub mod mip;
pub mod model;
pub mod sfd;
