//! Disc graphs over unit discs and exact crossing / circuit detection.

mod annulus;
mod crossing;
mod grid;
mod lens;
mod union_find;

pub use annulus::{annulus_vacant_circuit, Annulus};
pub use crossing::{
    crossing_threshold, occupied_crossing, occupied_horizontal_crossing,
    occupied_vertical_crossing, vacant_crossing, DiscGraph,
};
pub use grid::SpatialGrid;
pub use lens::{disc_meets_rect, lens_meets_rect};
pub use union_find::UnionFind;

/// Tolerance for every boundary comparison; near-degenerate cases resolve
/// toward adjacency and attachment.
pub const TOL: f64 = 1e-9;

/// Disc radius; all lengths are measured in these units.
pub const RADIUS: f64 = 1.0;

/// Two discs overlap iff their centres are at most this far apart.
pub const ADJACENCY: f64 = 2.0 * RADIUS;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Direction {
    Horizontal,
    Vertical,
}
