use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "wardgeo",
    version,
    about = "Ward-like hierarchical clustering with soft spatial constraints"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Recorded in the run manifest; no step is random.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Where to write the run manifest [default: <output>.manifest.json]
    #[arg(long, global = true, value_name = "PATH")]
    pub manifest: Option<PathBuf>,

    /// Do not write a run manifest.
    #[arg(long, global = true, conflicts_with = "manifest")]
    pub no_manifest: bool,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "name", content = "args", rename_all = "kebab-case")]
pub enum Command {
    /// Build a dissimilarity matrix from features, coordinates or adjacency.
    Dist(DistArgs),
    /// Cluster one matrix, or two mixed by alpha, into a dendrogram.
    Cluster(ClusterArgs),
    /// Cut a dendrogram into K clusters.
    Cut(CutArgs),
    /// Score a grid of alpha values by explained pseudo-inertia.
    #[command(name = "choicealpha")]
    #[serde(rename = "choicealpha")]
    ChoiceAlpha(ChoiceAlphaArgs),
    /// Add cluster labels to the features of a GeoJSON map.
    RenderMap(RenderMapArgs),
    /// Re-run the command recorded in a manifest and compare outputs.
    #[serde(skip)]
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    Haversine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixFormat {
    Condensed,
    Square,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelArg {
    /// Naive scan for small inputs, NN-chain otherwise.
    Auto,
    Naive,
    Chain,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(group(ArgGroup::new("source").required(true).multiple(false)))]
pub struct DistArgs {
    /// Feature CSV: id column then numeric columns.
    #[arg(long, group = "source")]
    pub features: Option<PathBuf>,
    /// Coordinate CSV with columns id,lat,lon (degrees).
    #[arg(long, group = "source")]
    pub coords: Option<PathBuf>,
    /// Adjacency JSON: {"id": ["neighbour id", ...], ...}.
    #[arg(long, group = "source")]
    pub adjacency: Option<PathBuf>,
    /// Existing square matrix CSV, validated and rewritten.
    #[arg(long = "square-csv", group = "source")]
    pub square_csv: Option<PathBuf>,
    /// euclidean for features, haversine (km) for coordinates.
    #[arg(long, value_enum)]
    pub metric: Option<Metric>,
    /// z-score each feature column before computing distances.
    #[arg(long)]
    pub standardize: bool,
    #[arg(long, value_enum, default_value = "condensed")]
    pub format: MatrixFormat,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ClusterArgs {
    /// Feature-space dissimilarities (square or condensed).
    #[arg(long)]
    pub d0: PathBuf,
    /// Constraint-space dissimilarities.
    #[arg(long)]
    pub d1: Option<PathBuf>,
    /// Mixing value in [0, 1]; anything but 0 needs --d1.
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    /// Observation weights: id,weight or one value per line [default: 1/n].
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Keep D0 and D1 as given instead of dividing each by its maximum.
    #[arg(long)]
    pub no_scale: bool,
    #[arg(long, value_enum, default_value = "auto")]
    pub kernel: KernelArg,
    /// Observation ids, one per line, for matrices that carry none.
    #[arg(long)]
    pub ids: Option<PathBuf>,
    /// Dendrogram JSON.
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CutArgs {
    /// Dendrogram JSON written by `cluster`.
    #[arg(long)]
    pub tree: PathBuf,
    #[arg(long, short)]
    pub k: usize,
    /// Partition CSV (id,label) [default: standard output].
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ChoiceAlphaArgs {
    #[arg(long)]
    pub d0: PathBuf,
    #[arg(long)]
    pub d1: PathBuf,
    #[arg(long, short)]
    pub k: usize,
    /// start:stop:step or a comma-separated list.
    #[arg(long, default_value = "0:0.1:1")]
    pub grid: String,
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long)]
    pub no_scale: bool,
    /// Allow a grid without 0 or 1; normalised columns become NA.
    #[arg(long)]
    pub raw_only: bool,
    #[arg(long, value_enum, default_value = "auto")]
    pub kernel: KernelArg,
    /// Q table CSV [default: standard output].
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Write <prefix>Q.svg and <prefix>Qnorm.svg.
    #[arg(long)]
    pub svg_prefix: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RenderMapArgs {
    /// GeoJSON FeatureCollection.
    #[arg(long)]
    pub geojson: PathBuf,
    /// Partition CSV (id,label).
    #[arg(long)]
    pub labels: PathBuf,
    /// Read feature ids from this property instead of the feature id.
    #[arg(long)]
    pub id_property: Option<String>,
    /// Name of the property that receives the label.
    #[arg(long, default_value = "cluster")]
    pub property: String,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    pub manifest_path: PathBuf,
    /// Write outputs into this directory instead of their recorded paths.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// The raw and normalised chart paths for an SVG prefix.
pub fn svg_paths(prefix: &Path) -> (PathBuf, PathBuf) {
    let with = |suffix: &str| {
        let mut s = prefix.as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    };
    (with("Q.svg"), with("Qnorm.svg"))
}

fn absolute(p: &mut PathBuf) {
    if let Ok(abs) = std::path::absolute(&*p) {
        *p = abs;
    }
}

fn redirect(p: &mut PathBuf, dir: &Path) {
    if let Some(name) = p.file_name() {
        *p = dir.join(name);
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Dist(_) => "dist",
            Command::Cluster(_) => "cluster",
            Command::Cut(_) => "cut",
            Command::ChoiceAlpha(_) => "choicealpha",
            Command::RenderMap(_) => "render-map",
            Command::Replay(_) => "replay",
        }
    }

    pub fn inputs(&self) -> Vec<&Path> {
        let v: Vec<Option<&PathBuf>> = match self {
            Command::Dist(a) => vec![
                a.features.as_ref(),
                a.coords.as_ref(),
                a.adjacency.as_ref(),
                a.square_csv.as_ref(),
            ],
            Command::Cluster(a) => vec![
                Some(&a.d0),
                a.d1.as_ref(),
                a.weights.as_ref(),
                a.ids.as_ref(),
            ],
            Command::Cut(a) => vec![Some(&a.tree)],
            Command::ChoiceAlpha(a) => vec![Some(&a.d0), Some(&a.d1), a.weights.as_ref()],
            Command::RenderMap(a) => vec![Some(&a.geojson), Some(&a.labels)],
            Command::Replay(a) => vec![Some(&a.manifest_path)],
        };
        v.into_iter().flatten().map(PathBuf::as_path).collect()
    }

    /// Files the command writes, in a fixed order.
    pub fn outputs(&self) -> Vec<PathBuf> {
        match self {
            Command::Dist(a) => vec![a.out.clone()],
            Command::Cluster(a) => vec![a.out.clone()],
            Command::Cut(a) => a.out.iter().cloned().collect(),
            Command::ChoiceAlpha(a) => {
                let mut v: Vec<PathBuf> = a.out.iter().cloned().collect();
                if let Some(prefix) = &a.svg_prefix {
                    let (q, qnorm) = svg_paths(prefix);
                    v.push(q);
                    if !a.raw_only {
                        v.push(qnorm);
                    }
                }
                v
            }
            Command::RenderMap(a) => vec![a.out.clone()],
            Command::Replay(_) => Vec::new(),
        }
    }

    /// Makes every path absolute so a manifest does not depend on the
    /// directory it is replayed from.
    pub fn absolutize(&mut self) {
        match self {
            Command::Dist(a) => {
                for p in [
                    &mut a.features,
                    &mut a.coords,
                    &mut a.adjacency,
                    &mut a.square_csv,
                ]
                .into_iter()
                .flatten()
                {
                    absolute(p);
                }
                absolute(&mut a.out);
            }
            Command::Cluster(a) => {
                for p in [&mut a.d1, &mut a.weights, &mut a.ids]
                    .into_iter()
                    .flatten()
                {
                    absolute(p);
                }
                absolute(&mut a.d0);
                absolute(&mut a.out);
            }
            Command::Cut(a) => {
                absolute(&mut a.tree);
                a.out.iter_mut().for_each(absolute);
            }
            Command::ChoiceAlpha(a) => {
                absolute(&mut a.d0);
                absolute(&mut a.d1);
                for p in [&mut a.weights, &mut a.out, &mut a.svg_prefix]
                    .into_iter()
                    .flatten()
                {
                    absolute(p);
                }
            }
            Command::RenderMap(a) => {
                absolute(&mut a.geojson);
                absolute(&mut a.labels);
                absolute(&mut a.out);
            }
            Command::Replay(a) => absolute(&mut a.manifest_path),
        }
    }

    /// Moves every output into `dir`, keeping file names.
    pub fn redirect_outputs(&mut self, dir: &Path) {
        match self {
            Command::Dist(a) => redirect(&mut a.out, dir),
            Command::Cluster(a) => redirect(&mut a.out, dir),
            Command::Cut(a) => a.out.iter_mut().for_each(|p| redirect(p, dir)),
            Command::ChoiceAlpha(a) => {
                a.out.iter_mut().for_each(|p| redirect(p, dir));
                a.svg_prefix.iter_mut().for_each(|p| redirect(p, dir));
            }
            Command::RenderMap(a) => redirect(&mut a.out, dir),
            Command::Replay(_) => {}
        }
    }
}

impl From<KernelArg> for wardgeo::ward::Kernel {
    fn from(k: KernelArg) -> Self {
        match k {
            KernelArg::Auto => Self::Auto,
            KernelArg::Naive => Self::Naive,
            KernelArg::Chain => Self::NnChain,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn output_paths() {
        let (q, qn) = svg_paths(Path::new("out/fig_"));
        assert_eq!(q, Path::new("out/fig_Q.svg"));
        assert_eq!(qn, Path::new("out/fig_Qnorm.svg"));
        let cli = Cli::try_parse_from([
            "wardgeo",
            "choicealpha",
            "--d0",
            "a",
            "--d1",
            "b",
            "-k",
            "3",
            "--raw-only",
            "--svg-prefix",
            "p_",
            "-o",
            "q.csv",
        ])
        .unwrap();
        let mut cmd = cli.command;
        assert_eq!(
            cmd.outputs(),
            [PathBuf::from("q.csv"), PathBuf::from("p_Q.svg")]
        );
        cmd.redirect_outputs(Path::new("/tmp/r"));
        assert_eq!(cmd.outputs()[0], Path::new("/tmp/r/q.csv"));
    }

    #[test]
    fn recorded_command_round_trips() {
        let cli = Cli::try_parse_from([
            "wardgeo", "cluster", "--d0", "a.csv", "--alpha", "0.2", "--d1", "b.csv", "-o",
            "t.json",
        ])
        .unwrap();
        let json = serde_json::to_string(&cli.command).unwrap();
        let back: Command = serde_json::from_str(&json).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
        assert!(json.contains(r#""name":"cluster""#));
    }
}
