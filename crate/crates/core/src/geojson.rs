//! Adds cluster labels to the features of a GeoJSON FeatureCollection.

use std::collections::{BTreeSet, HashMap};

use serde_json::Value;

use crate::error::{Error, Result};
use crate::io::json_id;

/// Where each feature's observation id is read from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IdSource {
    /// The feature's top-level `id` member.
    FeatureId,
    /// A named entry of `properties`.
    Property(String),
}

/// Outcome of [`annotate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Annotated {
    pub collection: Value,
    /// Label ids with no matching feature.
    pub unknown_labels: Vec<String>,
    /// Feature ids with no label.
    pub unlabeled_features: Vec<String>,
    /// Count of features per cluster label.
    pub counts: Vec<(usize, usize)>,
}

impl Annotated {
    pub fn mismatch_count(&self) -> usize {
        self.unknown_labels.len() + self.unlabeled_features.len()
    }
}

fn feature_id(feature: &Value, source: &IdSource) -> Option<String> {
    match source {
        IdSource::FeatureId => feature.get("id").and_then(json_id),
        IdSource::Property(name) => feature.get("properties")?.get(name).and_then(json_id),
    }
}

/// Copies the collection and sets an integer `property` on every feature
/// whose id has a label. Ids are compared as strings.
pub fn annotate(
    collection: &Value,
    labels: &[(String, usize)],
    source: &IdSource,
    property: &str,
) -> Result<Annotated> {
    let mut out = collection.clone();
    if out.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(Error::InvalidArgument(
            "GeoJSON root is not a FeatureCollection".into(),
        ));
    }
    let features = out
        .get_mut("features")
        .and_then(Value::as_array_mut)
        .ok_or_else(|| Error::InvalidArgument("FeatureCollection has no features array".into()))?;

    let mut by_id: HashMap<&str, usize> = HashMap::with_capacity(labels.len());
    for (id, label) in labels {
        if by_id.insert(id.as_str(), *label).is_some() {
            return Err(Error::InvalidArgument(format!(
                "label for id {id} given twice"
            )));
        }
    }
    let mut used = BTreeSet::new();
    let mut unlabeled = Vec::new();
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for (k, feature) in features.iter_mut().enumerate() {
        let id = feature_id(feature, source)
            .ok_or_else(|| Error::InvalidArgument(format!("feature {k} has no usable id")))?;
        match by_id.get(id.as_str()) {
            Some(&label) => {
                used.insert(id.clone());
                *counts.entry(label).or_default() += 1;
                let props = feature
                    .as_object_mut()
                    .ok_or_else(|| Error::InvalidArgument(format!("feature {k} is not an object")))?
                    .entry("properties")
                    .or_insert_with(|| Value::Object(Default::default()));
                if props.is_null() {
                    *props = Value::Object(Default::default());
                }
                props
                    .as_object_mut()
                    .ok_or_else(|| {
                        Error::InvalidArgument(format!("feature {k} properties is not an object"))
                    })?
                    .insert(property.to_string(), Value::from(label));
            }
            None => unlabeled.push(id),
        }
    }
    let unknown = labels
        .iter()
        .filter(|(id, _)| !used.contains(id))
        .map(|(id, _)| id.clone())
        .collect();
    let mut counts: Vec<(usize, usize)> = counts.into_iter().collect();
    counts.sort_unstable();
    Ok(Annotated {
        collection: out,
        unknown_labels: unknown,
        unlabeled_features: unlabeled,
        counts,
    })
}
