//! Covering reductions: balancing, label cover to set cover, set cover to
//! dominating set, and exact oracles for both covering problems.

pub mod balance;
pub mod domset;
pub mod exact;
pub mod setcover;

pub use balance::{balance, BalanceHandle, BalanceMode};
pub use domset::{ds_opt, ds_opt_bruteforce, ds_pad, ds_recover, ds_transform, greedy_domset, DomSetGraph, Role};
pub use setcover::{
    greedy_cover, sc_law, sc_opt, sc_opt_bruteforce, sc_recover, sc_transform, ScLayout, SetCoverInstance,
};
