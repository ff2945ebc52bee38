// SPDX-License-Identifier: Apache-2.0

//! Specification mining for RTL designs: stream simulation waveforms,
//! sample the design state, and report likely invariants as a text
//! specification that a CI pipeline can publish on every commit.

pub mod ci;
pub mod cli;
pub mod daikon;
pub mod encoding;
pub mod miner;
pub mod num;
pub mod spec;
pub mod state;
pub mod vcd;
