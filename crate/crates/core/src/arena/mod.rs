//! Seeded tournaments, win-rate significance tests, and report exports.

mod export;
mod stats;
mod tournament;

pub use export::{
    export, heatmap_cell, load_json, to_csv, to_heatmap, to_json, Format, JSON_SCHEMA,
};
pub use stats::{erfc, normal_cdf, two_sided_p, z_test, Verdict, ZTest, ALPHA};
pub use tournament::{
    config_hash, leader_for, play_game, run_matrix, run_pairing, run_pairing_agents, MatrixReport,
    PairingResult, Side,
};
