//! Plain-text exporters: GraphML and DOT for graphs, CSV for tables.
//! Every writer iterates sorted containers, so identical inputs produce
//! byte-identical output.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::community::CommunityPartition;
use crate::euler::Circuit;
use crate::generate::UndirectedGraph;
use crate::network::{degree_stats, ScoreNetwork};
use crate::pcset::PcSet;
use crate::series::LabeledSeries;
use crate::tonal::{AnnotationFile, RegionTable};

/// Quote a CSV field when it contains a comma, quote, or newline.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// GraphML of the directed chord network. Node attributes: pcset label,
/// occurrence count, total degree, and (when given) community id; edge
/// attribute: traversal weight.
pub fn graphml(net: &ScoreNetwork, communities: Option<&CommunityPartition>) -> String {
    let stats = degree_stats(net);
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    out.push_str("  <key id=\"d0\" for=\"node\" attr.name=\"pcset\" attr.type=\"string\"/>\n");
    out.push_str("  <key id=\"d1\" for=\"node\" attr.name=\"count\" attr.type=\"int\"/>\n");
    out.push_str("  <key id=\"d2\" for=\"node\" attr.name=\"degree\" attr.type=\"int\"/>\n");
    if communities.is_some() {
        out.push_str("  <key id=\"d3\" for=\"node\" attr.name=\"community\" attr.type=\"int\"/>\n");
    }
    out.push_str("  <key id=\"d4\" for=\"edge\" attr.name=\"weight\" attr.type=\"int\"/>\n");
    out.push_str("  <graph id=\"G\" edgedefault=\"directed\">\n");
    for (&id, info) in &net.nodes {
        let _ = writeln!(out, "    <node id=\"n{id}\">");
        let _ = writeln!(
            out,
            "      <data key=\"d0\">{}</data>",
            xml_escape(&info.pcset.label())
        );
        let _ = writeln!(out, "      <data key=\"d1\">{}</data>", info.count);
        let _ = writeln!(
            out,
            "      <data key=\"d2\">{}</data>",
            stats.per_node[&id].total
        );
        if let Some(part) = communities {
            if let Some(&c) = part.assignment.get(&id) {
                let _ = writeln!(out, "      <data key=\"d3\">{c}</data>");
            }
        }
        out.push_str("    </node>\n");
    }
    for (&(s, t), &w) in &net.edges {
        let _ = writeln!(
            out,
            "    <edge source=\"n{s}\" target=\"n{t}\"><data key=\"d4\">{w}</data></edge>"
        );
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}

/// GraphML of an undirected (generated) graph with pcset labels.
pub fn graphml_undirected(g: &UndirectedGraph, labels: &BTreeMap<u32, PcSet>) -> String {
    let degrees = g.degrees();
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    out.push_str("  <key id=\"d0\" for=\"node\" attr.name=\"pcset\" attr.type=\"string\"/>\n");
    out.push_str("  <key id=\"d2\" for=\"node\" attr.name=\"degree\" attr.type=\"int\"/>\n");
    out.push_str("  <key id=\"d4\" for=\"edge\" attr.name=\"weight\" attr.type=\"int\"/>\n");
    out.push_str("  <graph id=\"G\" edgedefault=\"undirected\">\n");
    for &id in &g.nodes {
        let _ = writeln!(out, "    <node id=\"n{id}\">");
        if let Some(pcset) = labels.get(&id) {
            let _ = writeln!(
                out,
                "      <data key=\"d0\">{}</data>",
                xml_escape(&pcset.label())
            );
        }
        let _ = writeln!(out, "      <data key=\"d2\">{}</data>", degrees[&id]);
        out.push_str("    </node>\n");
    }
    for (&(s, t), &w) in &g.edges {
        let _ = writeln!(
            out,
            "    <edge source=\"n{s}\" target=\"n{t}\"><data key=\"d4\">{w}</data></edge>"
        );
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}

/// DOT (Graphviz) form of the directed chord network.
pub fn dot(net: &ScoreNetwork, communities: Option<&CommunityPartition>) -> String {
    let stats = degree_stats(net);
    let mut out = String::from("digraph score {\n");
    for (&id, info) in &net.nodes {
        let mut attrs = format!(
            "label=\"{}\", count={}, degree={}",
            dot_escape(&info.pcset.label()),
            info.count,
            stats.per_node[&id].total
        );
        if let Some(part) = communities {
            if let Some(&c) = part.assignment.get(&id) {
                let _ = write!(attrs, ", community={c}");
            }
        }
        let _ = writeln!(out, "  n{id} [{attrs}];");
    }
    for (&(s, t), &w) in &net.edges {
        let _ = writeln!(out, "  n{s} -> n{t} [weight={w}];");
    }
    out.push_str("}\n");
    out
}

/// Event table: index, bar, id, pcset.
pub fn series_csv(series: &LabeledSeries) -> String {
    let mut out = String::from("index,bar,id,pcset\n");
    for (i, (&id, &bar)) in series.values.iter().zip(&series.bars).enumerate() {
        let _ = writeln!(
            out,
            "{i},{bar},{id},{}",
            csv_field(&series.dictionary[id as usize].label())
        );
    }
    out
}

/// Occurrence histogram: id, count, pcset. Ids are already in descending
/// count order.
pub fn histogram_csv(series: &LabeledSeries) -> String {
    let mut out = String::from("id,count,pcset\n");
    for (id, &count) in series.counts.iter().enumerate() {
        let _ = writeln!(
            out,
            "{id},{count},{}",
            csv_field(&series.dictionary[id].label())
        );
    }
    out
}

/// Degree distribution: total degree, number of nodes at that degree
/// (log-log plot data).
pub fn degree_distribution_csv(net: &ScoreNetwork) -> String {
    let stats = degree_stats(net);
    let mut dist: BTreeMap<u32, u32> = BTreeMap::new();
    for d in stats.per_node.values() {
        *dist.entry(d.total).or_insert(0) += 1;
    }
    let mut out = String::from("degree,nodes\n");
    for (degree, nodes) in dist {
        let _ = writeln!(out, "{degree},{nodes}");
    }
    out
}

/// Layer-similarity matrix as heat-map cells: row, col, similarity.
pub fn similarity_csv(matrix: &[Vec<f64>]) -> String {
    let mut out = String::from("row,col,similarity\n");
    for (i, row) in matrix.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let _ = writeln!(out, "{i},{j},{v:.6}");
        }
    }
    out
}

/// Region table: section, measures, prevalent_chord, region.
pub fn regions_csv(table: &RegionTable) -> String {
    let mut out = String::from("section,measures,prevalent_chord,region\n");
    for row in &table.rows {
        let measures = if row.bar_start == row.bar_end {
            row.bar_start.to_string()
        } else {
            format!("{}-{}", row.bar_start, row.bar_end)
        };
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.section,
            csv_field(&measures),
            csv_field(&row.prevalent.label()),
            csv_field(&row.label)
        );
    }
    out
}

/// Annotation form of a region table: global-key header then
/// start_bar,end_bar,region rows over the disjoint owned ranges.
pub fn annotations_csv(ann: &AnnotationFile) -> String {
    let mut out = format!("global_key={}\n", ann.global);
    out.push_str("start_bar,end_bar,region\n");
    for &(start, end, ref label) in &ann.rows {
        let _ = writeln!(out, "{start},{end},{}", csv_field(label));
    }
    out
}

/// Circuit as a chord sequence: step, node id, pcset.
pub fn circuit_csv(circuit: &Circuit, labels: &BTreeMap<u32, PcSet>) -> String {
    let mut out = String::from("step,node,pcset\n");
    for (i, &node) in circuit.nodes.iter().enumerate() {
        let label = labels.get(&node).map(|p| p.label()).unwrap_or_default();
        let _ = writeln!(out, "{i},{node},{}", csv_field(&label));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::NodeInfo;

    fn tiny_net() -> ScoreNetwork {
        let mut net = ScoreNetwork::default();
        net.nodes.insert(
            0,
            NodeInfo {
                pcset: PcSet::tet12(&[0, 4, 7]),
                count: 2,
            },
        );
        net.nodes.insert(
            1,
            NodeInfo {
                pcset: PcSet::tet12(&[7, 11, 2]),
                count: 1,
            },
        );
        net.edges.insert((0, 1), 3);
        net.edges.insert((1, 0), 1);
        net
    }

    #[test]
    fn csv_fields_quote_only_when_needed() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn graphml_is_well_formed_and_sorted() {
        let net = tiny_net();
        let xml = graphml(&net, None);
        let doc = roxmltree::Document::parse(&xml).unwrap();
        let nodes: Vec<_> = doc
            .descendants()
            .filter(|n| n.has_tag_name("node"))
            .collect();
        assert_eq!(nodes.len(), 2);
        assert_eq!(nodes[0].attribute("id"), Some("n0"));
        let edges: Vec<_> = doc
            .descendants()
            .filter(|n| n.has_tag_name("edge"))
            .collect();
        assert_eq!(edges.len(), 2);
        assert_eq!(edges[0].attribute("source"), Some("n0"));
    }

    #[test]
    fn graphml_escapes_markup() {
        let mut net = ScoreNetwork::default();
        net.nodes.insert(
            0,
            NodeInfo {
                pcset: PcSet::tet12(&[0]),
                count: 1,
            },
        );
        let xml = graphml(&net, None);
        // The pcset label "[0]" is safe, but parse to prove structure anyway.
        roxmltree::Document::parse(&xml).unwrap();
    }

    #[test]
    fn dot_lists_nodes_then_edges() {
        let net = tiny_net();
        let text = dot(&net, None);
        assert!(text.starts_with("digraph score {"));
        assert!(text.contains("n0 [label=\"[0,4,7]\", count=2, degree=2];"));
        assert!(text.contains("n0 -> n1 [weight=3];"));
        assert!(text.ends_with("}\n"));
    }

    #[test]
    fn exports_are_deterministic() {
        let net = tiny_net();
        assert_eq!(graphml(&net, None), graphml(&net, None));
        assert_eq!(dot(&net, None), dot(&net, None));
    }

    #[test]
    fn series_and_histogram_tables_align() {
        let series = LabeledSeries::from_events(vec![
            (PcSet::tet12(&[0, 4, 7]), 1),
            (PcSet::tet12(&[7, 11, 2]), 1),
            (PcSet::tet12(&[0, 4, 7]), 2),
        ])
        .unwrap();
        let csv = series_csv(&series);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "index,bar,id,pcset");
        assert_eq!(lines[1], "0,1,0,\"[0,4,7]\"");
        assert_eq!(lines[3], "2,2,0,\"[0,4,7]\"");
        let hist = histogram_csv(&series);
        assert!(hist.lines().nth(1).unwrap().starts_with("0,2,"));
    }

    #[test]
    fn similarity_cells_cover_the_matrix() {
        let m = vec![vec![1.0, 0.5], vec![0.5, 1.0]];
        let csv = similarity_csv(&m);
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.contains("0,1,0.500000"));
    }
}
