//! Labels clusters from seed addresses and summarizes the result.
//!
//! A cluster takes a seed's name only when every seeded member agrees on
//! it. Disagreement is surfaced as a conflict list, never resolved by
//! majority: a wrong merge should be visible, not papered over.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::model::Address;
use crate::partition::Cluster;

/// Business category of a seed label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    Exchange,
    MerchantService,
    P2pExchange,
    HostedWallet,
    Other,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Exchange => "exchange",
            Category::MerchantService => "merchant service",
            Category::P2pExchange => "p2p exchange",
            Category::HostedWallet => "hosted wallet",
            Category::Other => "other",
        }
    }

    /// Exact-name lookup; anything unrecognized is `None` so callers can
    /// warn and fall back to [`Category::Other`].
    #[allow(clippy::should_implement_trait)] // fallible wire-token lookup, not a parse
    pub fn from_str(s: &str) -> Option<Self> {
        Some(match s {
            "exchange" => Category::Exchange,
            "merchant service" => Category::MerchantService,
            "p2p exchange" => Category::P2pExchange,
            "hosted wallet" => Category::HostedWallet,
            "other" => Category::Other,
            _ => return None,
        })
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One externally sourced address attribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedLabel {
    pub address: Address,
    pub name: String,
    pub category: Category,
    pub source: String,
}

/// A cluster annotated with the label outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledCluster {
    pub cluster_id: u64,
    pub representative: Address,
    pub members: Vec<Address>,
    pub heuristics: Vec<String>,
    /// `(name, category)` when exactly one seed name occurs in the cluster.
    pub label: Option<(String, Category)>,
    /// All seed names present when two or more disagree, sorted bytewise.
    pub conflicts: Vec<String>,
}

/// Annotates every cluster with the unique seed name among its members, if
/// any. Clusters containing two or more distinct seed names get no label
/// and report all names as conflicts. Seedless clusters pass through
/// unlabeled. No names are invented and no votes are taken.
pub fn propagate_labels(clusters: &[Cluster], seeds: &[SeedLabel]) -> Vec<LabeledCluster> {
    let by_address: HashMap<&Address, &SeedLabel> = seeds.iter().map(|s| (&s.address, s)).collect();
    clusters
        .iter()
        .map(|cluster| {
            let mut names: BTreeSet<&str> = BTreeSet::new();
            // Track the winning category deterministically: members are
            // bytewise-sorted, so the first seeded member carrying the
            // winning name decides when sources disagree on category.
            let mut category_of: HashMap<&str, Category> = HashMap::new();
            for member in &cluster.members {
                if let Some(seed) = by_address.get(member) {
                    names.insert(&seed.name);
                    category_of.entry(&seed.name).or_insert(seed.category);
                }
            }
            let (label, conflicts) = match names.len() {
                0 => (None, Vec::new()),
                1 => {
                    let name = names.first().expect("one name");
                    (Some((name.to_string(), category_of[name])), Vec::new())
                }
                _ => (None, names.iter().map(|n| n.to_string()).collect()),
            };
            LabeledCluster {
                cluster_id: cluster.cluster_id,
                representative: cluster.representative.clone(),
                members: cluster.members.clone(),
                heuristics: cluster.heuristics.iter().map(|t| t.as_str().to_string()).collect(),
                label,
                conflicts,
            }
        })
        .collect()
}

/// One line of the census table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusRow {
    pub category: String,
    pub name: String,
    pub num_addresses: u64,
}

/// Census over labeled clusters: the `top_n` largest labeled clusters plus
/// one trailing aggregate for everything unlabeled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusReport {
    pub rows: Vec<CensusRow>,
    pub unlabeled_addresses: u64,
}

pub const UNLABELED_ROW_NAME: &str = "(unlabeled)";

/// Builds the census: one row per labeled cluster sorted by member count
/// descending (ties bytewise by name), truncated to `top_n`, then the
/// unlabeled aggregate. Conflicted clusters count as unlabeled.
pub fn census(labeled: &[LabeledCluster], top_n: usize) -> CensusReport {
    let mut rows = Vec::new();
    let mut unlabeled_addresses = 0u64;
    for cluster in labeled {
        match &cluster.label {
            Some((name, category)) => rows.push(CensusRow {
                category: category.as_str().to_string(),
                name: name.clone(),
                num_addresses: cluster.members.len() as u64,
            }),
            None => unlabeled_addresses += cluster.members.len() as u64,
        }
    }
    rows.sort_by(|a, b| b.num_addresses.cmp(&a.num_addresses).then_with(|| a.name.cmp(&b.name)));
    rows.truncate(top_n);
    CensusReport { rows, unlabeled_addresses }
}

impl CensusReport {
    /// All rows including the trailing unlabeled aggregate, as rendered.
    pub fn all_rows(&self) -> Vec<CensusRow> {
        let mut rows = self.rows.clone();
        rows.push(CensusRow {
            category: String::new(),
            name: UNLABELED_ROW_NAME.to_string(),
            num_addresses: self.unlabeled_addresses,
        });
        rows
    }

    /// Aligned three-column text table with grouped counts.
    pub fn render_table(&self) -> String {
        let rows = self.all_rows();
        let counts: Vec<String> = rows.iter().map(|r| group_thousands(r.num_addresses)).collect();
        let cat_width = rows.iter().map(|r| r.category.len()).chain(["category".len()]).max().unwrap();
        let name_width = rows.iter().map(|r| r.name.len()).chain(["name".len()]).max().unwrap();
        let num_header = "number of addresses";
        let num_width = counts.iter().map(String::len).chain([num_header.len()]).max().unwrap();
        let mut out = String::new();
        out.push_str(&format!(
            "{:<cat_width$}  {:<name_width$}  {:>num_width$}\n",
            "category", "name", num_header
        ));
        out.push_str(&format!(
            "{}  {}  {}\n",
            "-".repeat(cat_width),
            "-".repeat(name_width),
            "-".repeat(num_width)
        ));
        for (row, count) in rows.iter().zip(&counts) {
            out.push_str(&format!(
                "{:<cat_width$}  {:<name_width$}  {:>num_width$}\n",
                row.category, row.name, count
            ));
        }
        out
    }
}

/// `23189630` -> `"23,189,630"`.
pub fn group_thousands(n: u64) -> String {
    let digits = n.to_string();
    let mut grouped = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            grouped.push(',');
        }
        grouped.push(c);
    }
    grouped
}
