//! Signed edge-list readers, bootstrap subgraph sampling and summary stats.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use flate2::read::GzDecoder;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::energy::binomial;
use crate::engine::rng_for;
use crate::graph::{triad_count_upper_bound, NodeId, Sign, SignedGraph};
use crate::{Error, Result};

/// On-disk edge-list layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetFormat {
    /// Whitespace separated `src dst sign`, `#` comments.
    #[serde(alias = "snap")]
    SnapTabSigned,
    /// `SOURCE,TARGET,RATING,TIME`; the sign is `signum(RATING)`.
    #[serde(alias = "bitcoin")]
    BitcoinCsv,
    /// `src,dst,sign`.
    #[serde(alias = "generic", alias = "csv")]
    GenericCsv,
}

impl FromStr for DatasetFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "snap" | "snap-tab-signed" => Ok(DatasetFormat::SnapTabSigned),
            "bitcoin" | "bitcoin-csv" => Ok(DatasetFormat::BitcoinCsv),
            "generic" | "generic-csv" | "csv" => Ok(DatasetFormat::GenericCsv),
            _ => Err(Error::Config(format!("unknown dataset format `{s}` (snap, bitcoin, generic)"))),
        }
    }
}

impl fmt::Display for DatasetFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DatasetFormat::SnapTabSigned => "snap",
            DatasetFormat::BitcoinCsv => "bitcoin",
            DatasetFormat::GenericCsv => "generic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub path: PathBuf,
    pub format: DatasetFormat,
}

/// One parsed, accepted record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeListRecord {
    pub src: String,
    pub dst: String,
    pub raw_weight: i64,
    pub sign: Sign,
}

/// Counts of records that were skipped or overwritten while parsing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseReport {
    pub lines: usize,
    pub records: usize,
    /// Later records for an already seen pair (either direction).
    pub duplicates: usize,
    pub self_loops: usize,
    pub zero_weight: usize,
}

/// Parsed graph with the dense-id to label mapping.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub graph: SignedGraph,
    /// `labels[id]` is the original label of node `id`.
    pub labels: Vec<String>,
    pub report: ParseReport,
}

impl Dataset {
    pub fn id_of(&self, label: &str) -> Option<NodeId> {
        self.labels.iter().position(|l| l == label)
    }
}

fn open(path: &Path) -> Result<Box<dyn BufRead>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader: Box<dyn Read> =
        if path.extension().is_some_and(|e| e == "gz") { Box::new(GzDecoder::new(file)) } else { Box::new(file) };
    Ok(Box::new(BufReader::new(reader)))
}

pub fn parse_edge_list(spec: &DatasetSpec) -> Result<Dataset> {
    parse_reader(open(&spec.path)?, spec.format, &spec.path)
}

/// Splits one data line into `(src, dst, weight)` fields, or `None` for a
/// blank or comment line.
fn fields(line: &str, format: DatasetFormat) -> Option<Vec<&str>> {
    let t = line.trim();
    if t.is_empty() || t.starts_with('#') || t.starts_with('%') {
        return None;
    }
    Some(match format {
        DatasetFormat::SnapTabSigned => t.split_whitespace().collect(),
        _ => t.split(',').map(str::trim).collect(),
    })
}

/// Interprets split fields. `Ok(None)` marks a leading header row.
fn record(f: &[&str], format: DatasetFormat, first: bool) -> std::result::Result<Option<EdgeListRecord>, String> {
    let want = match format {
        DatasetFormat::BitcoinCsv => 4,
        _ => 3,
    };
    if f.len() != want {
        return Err(format!("expected {want} fields, found {}", f.len()));
    }
    let raw_weight = match f[2].parse::<i64>() {
        Ok(w) => w,
        Err(_) if first && f[2].parse::<f64>().is_err() => return Ok(None),
        Err(_) => match f[2].parse::<f64>() {
            Ok(w) if w.is_finite() && w.fract() == 0.0 => w as i64,
            _ => return Err(format!("invalid weight `{}`", f[2])),
        },
    };
    if format == DatasetFormat::BitcoinCsv && f[3].parse::<f64>().is_err() {
        return Err(format!("invalid timestamp `{}`", f[3]));
    }
    if format == DatasetFormat::GenericCsv && !(-1..=1).contains(&raw_weight) {
        return Err(format!("sign {raw_weight} not in {{-1, 0, 1}}"));
    }
    if f[0].is_empty() || f[1].is_empty() {
        return Err("empty node label".into());
    }
    Ok(Some(EdgeListRecord {
        src: f[0].to_string(),
        dst: f[1].to_string(),
        raw_weight,
        sign: Sign::signum(raw_weight),
    }))
}

/// Parses an edge list from any reader. `path` is used only in messages.
pub fn parse_reader<R: BufRead>(reader: R, format: DatasetFormat, path: &Path) -> Result<Dataset> {
    let mut report = ParseReport::default();
    let mut ids: HashMap<String, NodeId> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut edges: HashMap<(NodeId, NodeId), Sign> = HashMap::new();
    let mut first_data = true;

    for (k, line) in reader.lines().enumerate() {
        let lineno = k + 1;
        let line = line.map_err(|e| Error::Parse { path: path.into(), line: lineno, msg: e.to_string() })?;
        report.lines += 1;
        let Some(f) = fields(&line, format) else { continue };
        let err = |msg: String| Error::Parse { path: path.into(), line: lineno, msg };
        let header = std::mem::replace(&mut first_data, false);
        let Some(rec) = record(&f, format, header).map_err(err)? else { continue };
        report.records += 1;
        if rec.sign.is_zero() {
            report.zero_weight += 1;
            continue;
        }
        if rec.src == rec.dst {
            report.self_loops += 1;
            continue;
        }
        let mut id = |label: &str| {
            *ids.entry(label.to_string()).or_insert_with(|| {
                labels.push(label.to_string());
                labels.len() - 1
            })
        };
        let (u, v) = (id(&rec.src), id(&rec.dst));
        if edges.insert((u.min(v), u.max(v)), rec.sign).is_some() {
            report.duplicates += 1;
        }
    }
    if edges.is_empty() {
        return Err(Error::EmptyDataset(path.into()));
    }
    let mut list: Vec<_> = edges.into_iter().collect();
    list.sort_unstable_by_key(|&(k, _)| k);
    let mut graph = SignedGraph::new(labels.len());
    for ((u, v), s) in list {
        graph.set_sign(u, v, s)?;
    }
    Ok(Dataset { graph, labels, report })
}

/// Writes `g` as a GenericCsv edge list, using `labels` when given.
pub fn write_generic_csv<W: Write>(w: &mut W, g: &SignedGraph, labels: Option<&[String]>) -> std::io::Result<()> {
    writeln!(w, "src,dst,sign")?;
    for (i, j, s) in g.edges() {
        match labels {
            Some(l) => writeln!(w, "{},{},{}", l[i], l[j], s.value())?,
            None => writeln!(w, "{i},{j},{}", s.value())?,
        }
    }
    Ok(())
}

/// Connected induced subgraph drawn by [`bootstrap_connected_subgraph`].
#[derive(Debug, Clone)]
pub struct BootstrapSample {
    pub graph: SignedGraph,
    /// Source-graph ids of the sampled nodes; node `k` of `graph` is `nodes[k]`.
    pub nodes: Vec<NodeId>,
    pub seed_node: NodeId,
    pub sample_seed: u64,
}

/// Grows a connected node set of exactly `size` nodes from a uniformly chosen
/// seed, adding a uniformly chosen frontier node at each step.
pub fn bootstrap_connected_subgraph(g: &SignedGraph, size: usize, sample_seed: u64) -> Result<BootstrapSample> {
    let (label, count) = g.components();
    let mut sizes = vec![0usize; count];
    for &c in &label {
        sizes[c] += 1;
    }
    let largest = sizes.iter().copied().max().unwrap_or(0);
    if size == 0 || size > largest {
        return Err(Error::ComponentTooSmall { requested: size, largest });
    }
    let eligible: Vec<NodeId> = (0..g.node_count()).filter(|&v| sizes[label[v]] >= size).collect();
    let mut rng = rng_for(sample_seed);
    let seed_node = eligible[rng.gen_range(0..eligible.len())];

    let mut queued = vec![false; g.node_count()];
    let mut nodes = Vec::with_capacity(size);
    let mut frontier = vec![seed_node];
    queued[seed_node] = true;
    while nodes.len() < size {
        let k = rng.gen_range(0..frontier.len());
        let u = frontier.swap_remove(k);
        nodes.push(u);
        for &v in g.neighbors(u) {
            if !queued[v] {
                queued[v] = true;
                frontier.push(v);
            }
        }
    }
    Ok(BootstrapSample { graph: g.induced(&nodes), nodes, seed_node, sample_seed })
}

/// Node ids of the largest connected component, ascending.
pub fn largest_component(g: &SignedGraph) -> Vec<NodeId> {
    let (label, count) = g.components();
    let mut sizes = vec![0usize; count];
    for &c in &label {
        sizes[c] += 1;
    }
    let Some(best) = (0..count).max_by_key(|&c| (sizes[c], std::cmp::Reverse(c))) else {
        return Vec::new();
    };
    (0..g.node_count()).filter(|&v| label[v] == best).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GraphStats {
    pub n: usize,
    pub m: usize,
    /// `m / C(n, 2)`.
    pub density: f64,
    pub triads: u64,
    pub triad_bound: f64,
    pub positive_fraction: f64,
    pub balanced_fraction: f64,
}

pub fn graph_stats(g: &SignedGraph) -> GraphStats {
    let n = g.node_count();
    let m = g.edge_count();
    let pairs = binomial(n as u64, 2);
    let mut triads = 0u64;
    let mut balanced = 0u64;
    for (i, j, k) in g.triads() {
        triads += 1;
        if g.sign(i, j).value() * g.sign(j, k).value() * g.sign(i, k).value() > 0 {
            balanced += 1;
        }
    }
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
    GraphStats {
        n,
        m,
        density: ratio(m as f64, pairs),
        triads,
        triad_bound: triad_count_upper_bound(n as u64, m as u64),
        positive_fraction: ratio(g.positive_edge_count() as f64, m as f64),
        balanced_fraction: ratio(balanced as f64, triads as f64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, format: DatasetFormat) -> Result<Dataset> {
        parse_reader(text.as_bytes(), format, Path::new("mem"))
    }

    #[test]
    fn snap_minimal() {
        let d = parse("# comment\n1\t2\t-1\n", DatasetFormat::SnapTabSigned).unwrap();
        assert_eq!(d.graph.node_count(), 2);
        assert_eq!(d.graph.edge_count(), 1);
        assert_eq!(d.graph.sign(0, 1), Sign::Negative);
    }

    #[test]
    fn bitcoin_signum() {
        let d = parse("6,2,4,1289241911\n", DatasetFormat::BitcoinCsv).unwrap();
        let (a, b) = (d.id_of("6").unwrap(), d.id_of("2").unwrap());
        assert_eq!(d.graph.sign(a, b), Sign::Positive);
        let d = parse("6,2,-10,1\n", DatasetFormat::BitcoinCsv).unwrap();
        assert_eq!(d.graph.sign(0, 1), Sign::Negative);
    }

    #[test]
    fn zero_rating_is_counted() {
        let d = parse("1,2,0,5\n1,3,2,5\n", DatasetFormat::BitcoinCsv).unwrap();
        assert_eq!(d.report.zero_weight, 1);
        assert_eq!(d.graph.edge_count(), 1);
    }

    #[test]
    fn duplicates_last_writer_wins() {
        let d = parse("a,b,1\nb,a,-1\na,a,1\n", DatasetFormat::GenericCsv).unwrap();
        assert_eq!(d.report.duplicates, 1);
        assert_eq!(d.report.self_loops, 1);
        assert_eq!(d.graph.sign(0, 1), Sign::Negative);
    }

    #[test]
    fn header_row_skipped() {
        let d = parse("src,dst,sign\nx,y,1\n", DatasetFormat::GenericCsv).unwrap();
        assert_eq!(d.labels, vec!["x", "y"]);
    }

    #[test]
    fn malformed_line_reports_number() {
        let e = parse("1 2 1\n1 2\n", DatasetFormat::SnapTabSigned).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
        let e = parse("1 2 1\n3 4 x\n", DatasetFormat::SnapTabSigned).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
    }

    #[test]
    fn empty_file_is_error() {
        assert!(matches!(parse("# nothing\n", DatasetFormat::SnapTabSigned), Err(Error::EmptyDataset(_))));
    }

    #[test]
    fn generic_round_trip() {
        let d = parse("p,q,1\nq,r,-1\nr,p,1\n", DatasetFormat::GenericCsv).unwrap();
        let mut buf = Vec::new();
        write_generic_csv(&mut buf, &d.graph, Some(&d.labels)).unwrap();
        let back = parse(std::str::from_utf8(&buf).unwrap(), DatasetFormat::GenericCsv).unwrap();
        assert_eq!(back.labels, d.labels);
        assert_eq!(back.graph.edges().collect::<Vec<_>>(), d.graph.edges().collect::<Vec<_>>());
    }

    #[test]
    fn bootstrap_whole_and_single() {
        let g = SignedGraph::complete(6, Sign::Positive);
        let s = bootstrap_connected_subgraph(&g, 6, 1).unwrap();
        assert_eq!(s.graph.edge_count(), 15);
        let s = bootstrap_connected_subgraph(&g, 1, 1).unwrap();
        assert_eq!(s.graph.node_count(), 1);
        assert_eq!(s.graph.edge_count(), 0);
        assert!(matches!(
            bootstrap_connected_subgraph(&g, 7, 1),
            Err(Error::ComponentTooSmall { requested: 7, largest: 6 })
        ));
    }

    #[test]
    fn bootstrap_is_seeded() {
        let mut g = SignedGraph::new(40);
        for i in 0..39 {
            g.set_sign(i, i + 1, if i % 3 == 0 { Sign::Negative } else { Sign::Positive }).unwrap();
        }
        let a = bootstrap_connected_subgraph(&g, 10, 5).unwrap();
        let b = bootstrap_connected_subgraph(&g, 10, 5).unwrap();
        assert_eq!(a.nodes, b.nodes);
        assert_eq!(a.graph.components().1, 1);
        for (k, (i, j, s)) in a.graph.edges().enumerate() {
            assert_eq!(s, g.sign(a.nodes[i], a.nodes[j]), "edge {k}");
        }
    }

    #[test]
    fn stats_basic() {
        let s = graph_stats(&SignedGraph::complete(100, Sign::Positive));
        assert_eq!(s.density, 1.0);
        assert_eq!(s.triads, 161_700);
        let s = graph_stats(&SignedGraph::new(5));
        assert_eq!((s.density, s.triads), (0.0, 0));
    }

    #[test]
    fn largest_component_picks_biggest() {
        let g = SignedGraph::from_edges(6, [(0, 1, Sign::Positive), (2, 3, Sign::Negative), (3, 4, Sign::Positive)])
            .unwrap();
        assert_eq!(largest_component(&g), vec![2, 3, 4]);
    }
}
