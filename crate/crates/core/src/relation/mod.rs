//! Relation collapse per entity pair, verb clustering and the canonical
//! relation map.

pub mod cluster;
pub mod collapse;
pub mod map;
pub mod similarity;

pub use cluster::{cluster_relations, cluster_representative, silhouettes, ClusterPartition};
pub use collapse::{
    collapse_relations, compute_support, select_centroid_verb, select_most_frequent_relation,
    CentroidChoice, LabelCounts,
};
pub use map::{
    apply_relation_map, build_relation_map, default_ef_static_map, export_relation_clusters,
    import_curated_map, MapProvenance, RelationMap, DEFAULT_EF_STATIC_MAP,
};
pub use similarity::{cosine_similarity, embed_entity, EntityVector, VectorProvenance};
