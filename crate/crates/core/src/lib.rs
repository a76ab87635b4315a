//! Ward-like hierarchical clustering on dissimilarity matrices with
//! observation weights, and its spatially constrained variant.
//!
//! The pipeline is: build a [`DissimMatrix`](dissim::DissimMatrix) from
//! features, coordinates or an adjacency structure; turn it into an
//! aggregation matrix with [`delta_singletons`](ward::delta_singletons);
//! agglomerate; cut the resulting [`Dendrogram`](dendrogram::Dendrogram).
//! [`hclustgeo`](mixing::hclustgeo) runs the whole chain for one or two
//! matrices, and [`choice_alpha`](quality::choice_alpha) scores a grid of
//! mixing values.
//!
//! ```
//! use wardgeo::prelude::*;
//!
//! let d0 = DissimMatrix::from_condensed(4, vec![1.0, 4.0, 5.0, 3.5, 4.5, 1.5]).unwrap();
//! let tree = hclustgeo(&d0, None, MixSpec::default(), None, Kernel::Auto).unwrap();
//! let total = total_inertia(&d0, &WeightVector::uniform(4)).unwrap();
//! assert!((tree.height_sum() - total).abs() < 1e-12);
//! assert_eq!(cut_tree(&tree, 2).unwrap().labels(), [1, 1, 2, 2]);
//! ```

pub mod condensed;
pub mod dendrogram;
pub mod dissim;
pub mod error;
pub mod geojson;
pub mod io;
pub mod mixing;
pub mod numeric;
pub mod quality;
pub mod svg;
pub mod ward;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::dendrogram::{cut_tree, Dendrogram, Merge, NodeRef, Partition};
    pub use crate::dissim::{
        adjacency_dissim, euclidean_dissim, geodesic_dissim, normalize_max, AdjacencyList,
        DissimMatrix, FeatureTable, GeoPoints, WeightVector,
    };
    pub use crate::mixing::{hclustgeo, mix_delta, MixSpec};
    pub use crate::quality::{
        centroid_inertia_oracle, choice_alpha, mixed_within, pseudo_inertia, q_criterion,
        within_inertia, AlphaGrid, ChoiceOptions, QTable,
    };
    pub use crate::ward::{
        agglomerate, agglomerate_inspect, agglomerate_nnchain, agglomerate_with, delta_direct,
        delta_singletons, lw_update, total_inertia, DeltaMatrix, Kernel,
    };
    pub use crate::{Error, Result};
}
