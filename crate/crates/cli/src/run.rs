use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde_json::Value;
use wardgeo::dissim::{
    adjacency_dissim, euclidean_dissim, geodesic_dissim, DissimMatrix, WeightVector,
};
use wardgeo::geojson::{annotate, IdSource};
use wardgeo::io::{
    condensed_text, partition_text, read_adjacency, read_coords, read_dissim, read_features,
    read_ids, read_labels, read_weights, square_text, DissimFormat,
};
use wardgeo::mixing::{hclustgeo, MixSpec};
use wardgeo::numeric::fmt_sig7;
use wardgeo::quality::{choice_alpha, AlphaGrid, ChoiceOptions};
use wardgeo::svg::qtable_charts;
use wardgeo::ward::{cut_tree, Dendrogram};

use crate::args::{
    svg_paths, ChoiceAlphaArgs, ClusterArgs, Command, CutArgs, DistArgs, MatrixFormat, Metric,
    RenderMapArgs,
};
use crate::failure::Failure;

pub fn write_output(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .map_err(|e| Failure::internal(format!("cannot write {}: {e}", path.display())))
}

/// Runs one subcommand. Text meant for standard output is returned.
pub fn execute(command: &Command) -> Result<String, Failure> {
    match command {
        Command::Dist(a) => dist(a),
        Command::Cluster(a) => cluster(a),
        Command::Cut(a) => cut(a),
        Command::ChoiceAlpha(a) => choicealpha(a),
        Command::RenderMap(a) => render_map(a),
        Command::Replay(_) => Err(Failure::internal(
            "replay cannot be executed as a recorded command",
        )),
    }
}

fn dist(a: &DistArgs) -> Result<String, Failure> {
    let d = if let Some(path) = &a.features {
        if a.metric == Some(Metric::Haversine) {
            return Err(Failure::input("--metric haversine needs --coords"));
        }
        let table = read_features(path)?;
        let table = if a.standardize {
            table.standardized()
        } else {
            table
        };
        euclidean_dissim(&table)?
    } else {
        if a.standardize {
            return Err(Failure::input("--standardize applies to --features only"));
        }
        if let Some(path) = &a.coords {
            if a.metric == Some(Metric::Euclidean) {
                return Err(Failure::input(
                    "coordinates are in degrees; use --metric haversine",
                ));
            }
            geodesic_dissim(&read_coords(path)?)?
        } else {
            if a.metric.is_some() {
                return Err(Failure::input(
                    "--metric applies to --features and --coords only",
                ));
            }
            match (&a.adjacency, &a.square_csv) {
                (Some(path), _) => adjacency_dissim(&read_adjacency(path)?)?,
                (_, Some(path)) => read_dissim(path, Some(DissimFormat::Square))?,
                _ => {
                    return Err(Failure::input(
                        "one of --features, --coords, --adjacency, --square-csv is required",
                    ))
                }
            }
        }
    };
    let text = match a.format {
        MatrixFormat::Condensed => condensed_text(&d),
        MatrixFormat::Square => square_text(&d),
    };
    write_output(&a.out, &text)?;
    Ok(String::new())
}

/// Ids from the first source that has them; every other source must agree.
fn resolve_ids(n: usize, sources: &[(&str, Option<Vec<String>>)]) -> Result<Vec<String>, Failure> {
    let mut chosen: Option<(&str, Vec<String>)> = None;
    for (name, ids) in sources {
        let Some(ids) = ids else { continue };
        if ids.len() != n {
            return Err(Failure::consistency(format!(
                "{name} lists {} ids for {n} observations",
                ids.len()
            )));
        }
        match &chosen {
            None => chosen = Some((name, ids.clone())),
            Some((first, seen)) => {
                if let Some(i) = (0..n).find(|&i| seen[i] != ids[i]) {
                    return Err(Failure::consistency(format!(
                        "observation {}: id {:?} in {first} but {:?} in {name}",
                        i + 1,
                        seen[i],
                        ids[i]
                    )));
                }
            }
        }
    }
    Ok(chosen.map_or_else(|| (1..=n).map(|i| i.to_string()).collect(), |(_, ids)| ids))
}

/// Reads weights and puts them in observation order when the file names
/// its ids.
fn load_weights(path: &Path, ids: &[String]) -> Result<WeightVector, Failure> {
    let (wids, w) = read_weights(path)?;
    let Some(wids) = wids else {
        if w.len() != ids.len() {
            return Err(Failure::consistency(format!(
                "{}: {} weights for {} observations",
                path.display(),
                w.len(),
                ids.len()
            )));
        }
        return Ok(w);
    };
    let by_id: HashMap<&str, f64> = wids
        .iter()
        .map(String::as_str)
        .zip(w.as_slice().iter().copied())
        .collect();
    if by_id.len() != wids.len() {
        return Err(Failure::input(format!("{}: repeated id", path.display())));
    }
    let missing: Vec<&str> = ids
        .iter()
        .map(String::as_str)
        .filter(|id| !by_id.contains_key(id))
        .collect();
    if !missing.is_empty() || wids.len() != ids.len() {
        return Err(Failure::consistency(format!(
            "{}: weight ids do not match the observations (missing: {})",
            path.display(),
            if missing.is_empty() {
                "none, extra ids present".into()
            } else {
                missing.join(", ")
            }
        )));
    }
    Ok(WeightVector::new(
        ids.iter().map(|id| by_id[id.as_str()]).collect(),
    )?)
}

fn owned_ids(d: &DissimMatrix) -> Option<Vec<String>> {
    d.ids().map(<[String]>::to_vec)
}

fn cluster(a: &ClusterArgs) -> Result<String, Failure> {
    if a.d1.is_none() && a.alpha != 0.0 {
        return Err(Failure::input("--alpha other than 0 needs --d1"));
    }
    if a.d1.is_none() && a.no_scale {
        return Err(Failure::input("--no-scale only matters with --d1"));
    }
    let spec = MixSpec::new(a.alpha, !a.no_scale)?;
    let d0 = read_dissim(&a.d0, None)?;
    let d1 = a.d1.as_deref().map(|p| read_dissim(p, None)).transpose()?;
    let n = d0.n();
    if let Some(d1) = &d1 {
        if d1.n() != n {
            return Err(Failure::consistency(format!(
                "D0 has {n} observations, D1 has {}",
                d1.n()
            )));
        }
    }
    let ids = resolve_ids(
        n,
        &[
            ("--ids", a.ids.as_deref().map(read_ids).transpose()?),
            ("--d0", owned_ids(&d0)),
            ("--d1", d1.as_ref().and_then(owned_ids)),
        ],
    )?;
    let wt = a
        .weights
        .as_deref()
        .map(|p| load_weights(p, &ids))
        .transpose()?;
    let tree = hclustgeo(&d0, d1.as_ref(), spec, wt.as_ref(), a.kernel.into())?.with_ids(ids)?;
    write_output(&a.out, &tree.to_json())?;
    Ok(format!("{}\n", fmt_sig7(tree.height_sum())))
}

fn cut(a: &CutArgs) -> Result<String, Failure> {
    let text = fs::read_to_string(&a.tree)
        .map_err(|e| Failure::input(format!("{}: {e}", a.tree.display())))?;
    let tree = Dendrogram::from_json(&text)
        .map_err(|e| Failure::input(format!("{}: {e}", a.tree.display())))?;
    let p = cut_tree(&tree, a.k)?;
    let csv = partition_text(tree.ids(), &p);
    match &a.out {
        Some(path) => {
            write_output(path, &csv)?;
            Ok(String::new())
        }
        None => Ok(csv),
    }
}

fn choicealpha(a: &ChoiceAlphaArgs) -> Result<String, Failure> {
    let grid: AlphaGrid = a.grid.parse()?;
    let d0 = read_dissim(&a.d0, None)?;
    let d1 = read_dissim(&a.d1, None)?;
    let n = d0.n();
    if d1.n() != n {
        return Err(Failure::consistency(format!(
            "D0 has {n} observations, D1 has {}",
            d1.n()
        )));
    }
    let ids = resolve_ids(n, &[("--d0", owned_ids(&d0)), ("--d1", owned_ids(&d1))])?;
    let wt = a
        .weights
        .as_deref()
        .map(|p| load_weights(p, &ids))
        .transpose()?;
    let opts = ChoiceOptions {
        scale: !a.no_scale,
        require_anchors: !a.raw_only,
        kernel: a.kernel.into(),
    };
    let table = choice_alpha(&d0, &d1, &grid, a.k, wt.as_ref(), opts)?;
    for v in table.anchor_violations() {
        eprintln!("warning: {v}");
    }
    if let Some(prefix) = &a.svg_prefix {
        let (raw, norm) = qtable_charts(&table);
        let (q_path, qnorm_path) = svg_paths(prefix);
        write_output(&q_path, &raw)?;
        if !a.raw_only {
            write_output(&qnorm_path, &norm)?;
        }
    }
    let csv = table.to_csv();
    match &a.out {
        Some(path) => {
            write_output(path, &csv)?;
            Ok(String::new())
        }
        None => Ok(csv),
    }
}

fn render_map(a: &RenderMapArgs) -> Result<String, Failure> {
    let text = fs::read_to_string(&a.geojson)
        .map_err(|e| Failure::input(format!("{}: {e}", a.geojson.display())))?;
    let collection: Value = serde_json::from_str(&text)
        .map_err(|e| Failure::input(format!("{}:{}: {e}", a.geojson.display(), e.line())))?;
    let labels = read_labels(&a.labels)?;
    let source = match &a.id_property {
        Some(name) => IdSource::Property(name.clone()),
        None => IdSource::FeatureId,
    };
    let out = annotate(&collection, &labels, &source, &a.property)?;
    if out.mismatch_count() > 0 {
        let mut msg = format!(
            "{} id mismatches between labels and map",
            out.mismatch_count()
        );
        if !out.unknown_labels.is_empty() {
            msg.push_str(&format!(
                "\n  ids in labels but not in map: {}",
                out.unknown_labels.join(", ")
            ));
        }
        if !out.unlabeled_features.is_empty() {
            msg.push_str(&format!(
                "\n  map features without a label: {}",
                out.unlabeled_features.join(", ")
            ));
        }
        return Err(Failure::consistency(msg));
    }
    let mut json =
        serde_json::to_string(&out.collection).map_err(|e| Failure::internal(e.to_string()))?;
    json.push('\n');
    write_output(&a.out, &json)?;
    let summary: Vec<String> = out
        .counts
        .iter()
        .map(|(label, count)| format!("{label}:{count}"))
        .collect();
    eprintln!("labelled {} features ({})", labels.len(), summary.join(" "));
    Ok(String::new())
}
