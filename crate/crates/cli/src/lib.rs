// SPDX-License-Identifier: Apache-2.0
//! Command line and HTTP front end for `magmec`.
//!
//! [`commands`] holds the subcommands behind the `magmec` binary and
//! [`server`] the JSON session service started by `magmec serve`.

pub mod commands;
pub mod server;
