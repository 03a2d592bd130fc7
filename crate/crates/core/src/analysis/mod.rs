//! Finite-window measurements of point sets and sequences.

mod diophantine;
mod heavy;
mod structure;
mod uniformity;
mod visibility;

pub use diophantine::{dist_to_integers, udt_check, UdtMargin, UDT_WORK_LIMIT};
pub use heavy::{heavy_box, BoxRange, HeavyBox, ASPECT_SAMPLES, EXACT_SEARCH_LIMIT};
pub use structure::{density_profile, min_gap, min_gap_of, vacant_strip, StripReport, DUAL_INDEX_BOUND};
pub use uniformity::{
    default_resolution, discrepancy, discrepancy_1d, dispersion, dispersion_1d, dispersion_on_grid, shift_samples,
    sud_estimate, sud_estimate_with, xi_samples, DispersionReport, SudEstimate, CRITICAL_BOX_LIMIT,
    MAX_SHIFT_SAMPLES,
};
pub use visibility::{
    check_visibility, estimate_visibility, find_empty_tube, line_partition, LinePartition, VisibilityReport,
    VISIBILITY_LEVELS,
};

/// Fractional parts `{v_k}`, `k = first, …, first + N − 1`, of a driving
/// sequence, as points of the unit cube.
pub fn fractional_parts(seq: &crate::generators::SequenceSpec, n: usize) -> crate::Result<Vec<Vec<f64>>> {
    let first = seq.first_index();
    (0..n as i64)
        .map(|k| {
            seq.eval(first + k)
                .map(|v| v.into_iter().map(|x| x - x.floor()).map(|f| if f >= 1.0 { 0.0 } else { f }).collect())
        })
        .collect()
}
