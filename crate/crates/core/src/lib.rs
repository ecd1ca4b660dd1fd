//! infrafix: technology-agnostic repair of infrastructure-as-code scripts.
//!
//! The pipeline: a frontend parses an Ansible or Puppet subset into a
//! span-preserving IR ([`ir`], [`frontend`]); [`normalize`] rewrites
//! technology-specific names and reserved values to canonical ones;
//! [`infer`] computes the system states a script can produce (or derives a
//! state from a syscall trace plus filesystem probing); [`repair`] searches
//! for minimal edit sets that make the script satisfy a desired state; and
//! [`patch`] splices verified edits back into the original text by span.
//! [`scenario`] generates mutation-based repair scenarios and runs them as
//! an evaluation suite.

pub mod frontend;
pub mod infer;
pub mod ir;
pub mod normalize;
pub mod patch;
pub mod repair;
pub mod scenario;
pub mod state;
