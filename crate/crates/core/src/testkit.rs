//! Reference oracles for the test suites.
//!
//! Everything here recomputes expected results from first principles
//! (breadth-first traversal, exhaustive pair enumeration) so that the fast
//! production paths can be checked against an independent implementation.
//! Compiled only with the `testkit` feature; never used at run time.

use std::collections::{HashMap, HashSet, VecDeque};

/// Connected components by breadth-first search over an undirected edge list.
///
/// `nodes` lists every node that must appear in the result, edges or not.
/// Components are returned in canonical form: members sorted bytewise inside
/// each component, components sorted by their smallest member.
pub fn bfs_components(nodes: &[String], edges: &[(String, String)]) -> Vec<Vec<String>> {
    let mut adjacency: HashMap<&str, Vec<&str>> = HashMap::new();
    for node in nodes {
        adjacency.entry(node).or_default();
    }
    for (a, b) in edges {
        adjacency.entry(a).or_default().push(b);
        adjacency.entry(b).or_default().push(a);
    }
    let mut seen: HashSet<&str> = HashSet::new();
    let mut components = Vec::new();
    let mut starts: Vec<&str> = adjacency.keys().copied().collect();
    starts.sort_unstable();
    for start in starts {
        if seen.contains(start) {
            continue;
        }
        let mut queue = VecDeque::from([start]);
        seen.insert(start);
        let mut members = Vec::new();
        while let Some(node) = queue.pop_front() {
            members.push(node.to_string());
            for next in &adjacency[node] {
                if seen.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    components.sort();
    components
}

/// Pairwise precision and recall by brute-force enumeration of every
/// unordered address pair. Quadratic on purpose; keep inputs small.
///
/// `clusters` maps address -> cluster key, `truth` maps address -> entity.
/// Returns (precision, recall, matching, predicted, truth_pairs) where the
/// counts are over pairs. Empty denominators score 1.0.
pub fn pairwise_by_enumeration(
    clusters: &HashMap<String, u64>,
    truth: &HashMap<String, String>,
) -> (f64, f64, u64, u64, u64) {
    let mut addrs: Vec<&String> = clusters.keys().collect();
    addrs.sort_unstable();
    let mut matching = 0u64;
    let mut predicted = 0u64;
    let mut truth_pairs = 0u64;
    for i in 0..addrs.len() {
        for j in i + 1..addrs.len() {
            let same_cluster = clusters[addrs[i]] == clusters[addrs[j]];
            let same_entity = truth[addrs[i]] == truth[addrs[j]];
            if same_cluster {
                predicted += 1;
            }
            if same_entity {
                truth_pairs += 1;
            }
            if same_cluster && same_entity {
                matching += 1;
            }
        }
    }
    let precision = if predicted == 0 { 1.0 } else { matching as f64 / predicted as f64 };
    let recall = if truth_pairs == 0 { 1.0 } else { matching as f64 / truth_pairs as f64 };
    (precision, recall, matching, predicted, truth_pairs)
}

/// Peak resident set size of the current process in bytes, if the platform
/// exposes it (Linux VmHWM).
pub fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    for line in status.lines() {
        if let Some(rest) = line.strip_prefix("VmHWM:") {
            let kb: u64 = rest.trim().trim_end_matches(" kB").trim().parse().ok()?;
            return Some(kb * 1024);
        }
    }
    None
}
