//! Standard squares, truncated parabolas, the standard-square covering
//! tree with its Hausdorff sums, and box-counting dimension estimates.

mod boxcount;
mod cover;
mod escape;
mod geometry;
mod tower;

pub use boxcount::{box_count, box_dimension, BoxCountFit};
pub use cover::{
    build_cover_root, build_cover_root_with, count_covering_squares, count_covering_squares_ln,
    hausdorff_sum, ln_analytic_ratio, refine_cover, run_cover_experiment, CoverConfig, CoverElement,
    CoverGeneration, CoverReport, CoverRow, SquareCount, DEFAULT_KAPPA_BOUND, DEFAULT_K_KOEBE,
};
pub use escape::{escape_index_grid, escape_set_sample};
pub use geometry::{parabola_contains, DoubleSquare, ParabolaRegion, StandardSquare, STANDARD_SIDE};
pub use tower::Tower;
