#![allow(dead_code)]

pub mod models;
pub mod oracles;
pub mod props;
