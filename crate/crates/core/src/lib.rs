#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod channel;
pub mod cm;
pub mod constellation;
pub mod error;
pub mod heterodyne;
pub mod majorization;
pub mod multimode;
pub mod par;
pub mod receiver;
pub mod rng;
