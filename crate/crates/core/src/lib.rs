//! Equivariant gerbes over finite group actions: groupoid integrals,
//! twisted vector bundles and their characters, fusion data for the
//! quantum double, and pivotal structures on fusion rings.

pub mod bundle;
pub mod catalog;
pub mod cochain;
pub mod cyclotomic;
pub mod double;
pub mod extract;
pub mod geochar;
pub mod gerbe;
pub mod grp;
pub mod gspace;
pub mod pivotal;
pub mod snf;
pub mod tqft;
pub mod twohilb;

pub use bundle::{flat_section_dim, irreducible_bundles, twisted_character, validate_bundle, TwistedBundle};
pub use catalog::{
    catalog_entry, group_by_name, orbit_component, standard_catalog, CatalogEntry, CatalogError,
    CATALOG_GROUPS,
};
pub use cochain::{check_cocycle, coboundary, cohomologous, transgress, Cochain, Phase};
pub use double::{
    braid, center_check, compose_transformations, decompose, extend_transformation, fuse,
    fusionobj_from_json, fyn_check, hexagon_residuals, simples, unit_object, yang_baxter_residual,
    CenterReport, DoubleError, FynReport,
};
pub use extract::{action_on_irr, extension_data, extract_gerbe, irr_system, ExtensionData, IrrSystem};
pub use geochar::{
    double_character, geometric_character, hom_dimension, nondistinguish_search,
    verify_fully_faithful, GBundleOverG,
};
pub use gerbe::{isometric_equivalent, make_gerbe, regular_gerbe, tensor, Gerbe};
pub use grp::{analyze, build_group, FiniteGroup, GroupAnalysis, GroupSpec};
pub use gspace::{build_gset, loop_groupoid, GSet, GSetSpec, LoopGroupoid, LoopPoint};
pub use pivotal::{
    builtin_ring, dimension_checks, frobenius_perron, fusion_ring_from_json, group_ring,
    grouplike_counts, pivotal_cohomology, pivotal_from_json, semisimple_dagger_check,
    semisimple_dagger_check_perturbed, solve_twisted, symbol_class, triple_orbits,
    yang_lee_literal, FrobeniusPerron, FusionRing, PivotalCohomology, PivotalError,
    PivotalSymbols, SymbolClass, TwistedSolution,
};
pub use tqft::{torus_fields, torus_partition, verify_crossing, CrossingReport, FieldGroupoid, TqftError};
pub use twohilb::{
    compose_weighted, frobenius_algebra, nat_inner_product, weighted_matrix, weighted_space,
    FrobeniusAlgebra, WeightedMatrix, WeightedSpace,
};
