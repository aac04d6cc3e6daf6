//! Network topology inference from pairwise tunnel interference.
//!
//! Hosts (overlay nodes) hang off an unobservable router network (underlay)
//! and exchange traffic over shortest-path tunnels. The only observation is
//! which pairs of tunnels share a directed link. This crate computes and
//! measures that interference matrix, bounds the size of the smallest network
//! consistent with it, and recovers trees, rings and general topologies.

pub mod bitset;
pub mod graph;
pub mod interference;
pub mod bounds;
pub mod ilp;
pub mod recovery;
pub mod eval;
pub mod cli;
