// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod config;
pub mod exec;
pub mod expr;
pub mod flow;
pub mod hessfield;
pub mod output;
pub mod selftest;
pub mod symkernel;
pub mod verify;
