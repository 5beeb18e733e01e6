//! Numerical checks of the soundness analysis: unbalanced matching edges,
//! heavy/light and sector decompositions, conditioning bounds and the
//! generalized birthday paradox.

mod birthday;
mod distribution;
mod geometry;
mod matching;

pub use birthday::{
    birthday_collision_exact, birthday_expectation, birthday_iid_exact, birthday_monte_carlo,
    birthday_proof_intermediates, birthday_uniform, check_sortlem, close_family, cumulative, BirthdayIntermediates,
    FourWiseSampler, SortLemReport, CLAIMED_EXPECTATION_FLOOR,
};
pub use distribution::{
    check_unbalwrt, conditional_variation, heavy_light_decompose, overlap_bound, CondVarReport, DiscreteDistribution,
    HeavyLight, UnbalwrtReport,
};
pub use geometry::{far_from_unit_vectors, random_far_family, sector_split, SectorSplit, FAR_GRID_POINTS};
pub use matching::{
    check_matching_theorem, disagreement_prob, edge_stats, random_matching, unbalanced_set, EdgeStats,
    MatchingTheoremReport, UnbalancedSet, DEFAULT_C, DEFAULT_D,
};
