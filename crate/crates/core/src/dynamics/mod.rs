//! Trajectory post-processing and the numerical experiments on the network.

mod basin;
mod bifurcation;
mod classify;
mod hdelay;
mod hidden;
mod maxima;
mod parallel;
mod shift;

pub use basin::{basin_scan, BasinGrid, BasinLabel, BasinSpec, Plane};
pub use bifurcation::{
    bifurcation_sweep, cross_section, BifurcationCell, BifurcationDataset, Branch, CrossSection,
    HnnFamily, Sweep, SweepParameter,
};
pub use classify::{
    classify_trajectory, AttractorSign, ClassifierTolerances, TrajectoryClass, TrajectoryKind,
};
pub use hdelay::{h_delay_study, BranchRole, HDelayConfig, HDelayStudy, ShiftRow, ShiftTable};
pub use hidden::{
    hidden_attractor_test, AttractorVerdict, HiddenAttractorReport, NeighborhoodReport, Tallies,
};
pub use maxima::{extract_maxima, find_peaks, MaximaSet, Peak};
pub use parallel::{map_indexed, Jobs};
pub use shift::{branch_shift, ShiftEstimate, ShiftOptions};
