// Each test target uses a different subset of these helpers.
#![allow(dead_code)]

pub mod dense;
pub mod mock_llm;
pub mod qasm;
