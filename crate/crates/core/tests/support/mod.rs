#![allow(dead_code)]

pub mod dot_grammar;
pub mod fixtures;
pub mod oracles;
