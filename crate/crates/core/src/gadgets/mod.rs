//! Concrete reductions: Matching to 3-regular Matching, the MaxXOR gadget
//! into MaxCUT, MaxCUT to SparsestCut with powering, Unique Games to
//! BalancedSeparator, 1F-CSP and NotEqualCSP.

pub mod balsep;
pub mod matching3reg;
pub mod maxcut;
pub mod sparsest;
pub mod ugcsp;

pub use matching3reg::{build_matching_3reg, d2n_graph, CycleOrder, D2n};
pub use maxcut::{maxxor_to_maxcut, validate_gadget, xor0_clause, GadgetTemplate, GadgetUnion};
pub use sparsest::{maxcut_to_sparsestcut, maxcut_to_sparsestcut_base, power_instance, power_solution, verify_power_completeness, PoweredInstance};
pub use balsep::{ug_to_balsep, verify_balsep_completeness};
pub use ugcsp::{ug_to_1fcsp, ug_to_csp, ug_to_noteqcsp, verify_ug_csp_completeness, UgCspKind, UgCspReduction};
