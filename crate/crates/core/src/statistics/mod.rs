//! The h statistic, the `F`/`G`/`H` sets, Monte Carlo estimators and the
//! checkers for the inequalities they feed.

mod covering;
mod estimate;
mod fgh;
mod fit;
mod h;
mod inequality;

pub use covering::{build_covering, count_good_bad, counting_bounds_report, CountingReport, GoodBad};
pub use estimate::{
    clopper_pearson_interval, count_successes, estimate_probability, tally, wilson_interval,
    Estimate, MeanEstimate, MonteCarlo, Z95,
};
pub use fgh::{
    characterization_mismatches, closure_multiplicity, compute_fgh, neighbour_arm_sets, FghSets,
    NeighbourArmSets,
};
pub use fit::{fit_exponent, fit_power_law, ExponentFit};
pub use h::{h_from_counts, h_statistic};
pub use inequality::{
    check_central_inequality, clb_report, closure_counts, distant_two_arms_report,
    find_best_boundary_site, hoeffding_bound, hoeffding_exact, hoeffding_tail_report,
    theta_proxy, BestSite, Direction, HoeffdingCell, HoeffdingReport, InequalityReport, Interval,
    NamedEstimate, Verdict,
};
