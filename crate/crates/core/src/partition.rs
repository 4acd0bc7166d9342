//! Disjoint-set partition over interned addresses.
//!
//! Addresses are interned to dense `u32` indices; union by rank with path
//! compression keeps merge chains flat at the hundred-million-address scale.
//! Every successful union is appended to a merge log so a partition built on
//! one input shard can be replayed into another, and so finalized clusters
//! can report which heuristics stitched them together.

use std::collections::HashMap;
use std::fmt;

use crate::model::Address;

/// Which inference rule requested a union. Stored per merge-log entry and
/// surfaced per cluster after finalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HeuristicTag {
    CommonSpending,
    Change,
    ExchangeSeed,
    Gathering,
}

impl HeuristicTag {
    pub fn as_str(self) -> &'static str {
        match self {
            HeuristicTag::CommonSpending => "common_spending",
            HeuristicTag::Change => "change",
            HeuristicTag::ExchangeSeed => "exchange_seed",
            HeuristicTag::Gathering => "gathering",
        }
    }

    #[allow(clippy::should_implement_trait)] // fallible wire-token lookup, not a parse
    pub fn from_str(s: &str) -> Option<Self> {
        Some(match s {
            "common_spending" => HeuristicTag::CommonSpending,
            "change" => HeuristicTag::Change,
            "exchange_seed" => HeuristicTag::ExchangeSeed,
            "gathering" => HeuristicTag::Gathering,
            _ => return None,
        })
    }
}

impl fmt::Display for HeuristicTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One successful union: the two set representatives that were merged and
/// the provenance of the merge. `origin` is the transaction id for
/// transaction-driven merges and the entity name for seed-driven ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeEvent {
    pub tag: HeuristicTag,
    pub origin: String,
    pub roots: (u32, u32),
}

/// A finalized cluster: bytewise-sorted members, the bytewise-smallest
/// member as representative, and the tags of every heuristic that
/// contributed a merge inside the cluster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    pub cluster_id: u64,
    pub representative: Address,
    pub members: Vec<Address>,
    pub heuristics: Vec<HeuristicTag>,
}

#[derive(Debug, Default, Clone)]
pub struct Partition {
    index: HashMap<Address, u32>,
    addresses: Vec<Address>,
    parent: Vec<u32>,
    rank: Vec<u8>,
    merges: Vec<MergeEvent>,
}

impl Partition {
    pub fn new() -> Self {
        Partition::default()
    }

    /// Interns an address, returning its dense index. Idempotent: the same
    /// address always maps to the index it got on first sight.
    pub fn intern(&mut self, addr: &Address) -> u32 {
        if let Some(&id) = self.index.get(addr) {
            return id;
        }
        let id = u32::try_from(self.addresses.len()).expect("address count exceeds u32 range");
        self.index.insert(addr.clone(), id);
        self.addresses.push(addr.clone());
        self.parent.push(id);
        self.rank.push(0);
        id
    }

    pub fn contains(&self, addr: &Address) -> bool {
        self.index.contains_key(addr)
    }

    /// Number of interned addresses.
    pub fn len(&self) -> usize {
        self.addresses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.addresses.is_empty()
    }

    pub fn address(&self, id: u32) -> &Address {
        &self.addresses[id as usize]
    }

    /// Current set representative, compressing the path walked.
    pub fn find(&mut self, id: u32) -> u32 {
        let mut root = id;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cursor = id;
        while self.parent[cursor as usize] != root {
            let next = self.parent[cursor as usize];
            self.parent[cursor as usize] = root;
            cursor = next;
        }
        root
    }

    /// Representative lookup without mutation; usable on a shared partition
    /// once building has finished.
    pub fn find_readonly(&self, id: u32) -> u32 {
        let mut root = id;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        root
    }

    /// Root of an address that may or may not be interned yet.
    pub fn root_of(&self, addr: &Address) -> Option<u32> {
        self.index.get(addr).map(|&id| self.find_readonly(id))
    }

    /// Unions two interned sets. Returns true when two distinct sets merged,
    /// false for a no-op; only true unions reach the merge log.
    pub fn union_ids(&mut self, a: u32, b: u32, tag: HeuristicTag, origin: &str) -> bool {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return false;
        }
        let (parent, child) = match self.rank[ra as usize].cmp(&self.rank[rb as usize]) {
            std::cmp::Ordering::Less => (rb, ra),
            std::cmp::Ordering::Greater => (ra, rb),
            std::cmp::Ordering::Equal => {
                self.rank[ra as usize] += 1;
                (ra, rb)
            }
        };
        self.parent[child as usize] = parent;
        self.merges.push(MergeEvent { tag, origin: origin.to_string(), roots: (ra, rb) });
        true
    }

    /// Interns both addresses as needed, then unions their sets.
    pub fn union(&mut self, a: &Address, b: &Address, tag: HeuristicTag, origin: &str) -> bool {
        let ia = self.intern(a);
        let ib = self.intern(b);
        self.union_ids(ia, ib, tag, origin)
    }

    pub fn merge_log(&self) -> &[MergeEvent] {
        &self.merges
    }

    /// Cluster count without finalizing: interned addresses minus successful
    /// unions.
    pub fn cluster_count(&self) -> usize {
        self.addresses.len() - self.merges.len()
    }

    /// Folds another partition, built on a disjoint input shard, into this
    /// one: interns its addresses and replays its merge log. The result has
    /// the same connectivity as a single partition built over both shards'
    /// input in any order.
    pub fn absorb(&mut self, other: &Partition) {
        for addr in &other.addresses {
            self.intern(addr);
        }
        for event in &other.merges {
            let a = other.address(event.roots.0).clone();
            let b = other.address(event.roots.1).clone();
            self.union(&a, &b, event.tag, &event.origin);
        }
    }

    /// Emits the clusters in canonical order: members bytewise-sorted, the
    /// smallest member as representative, clusters sorted by representative,
    /// ids assigned by emission rank. The result is a pure function of the
    /// partition's connectivity, regardless of union order.
    pub fn finalize(&self) -> Vec<Cluster> {
        let mut members_by_root: HashMap<u32, Vec<Address>> = HashMap::new();
        for id in 0..self.addresses.len() as u32 {
            let root = self.find_readonly(id);
            members_by_root.entry(root).or_default().push(self.addresses[id as usize].clone());
        }
        let mut tags_by_root: HashMap<u32, Vec<HeuristicTag>> = HashMap::new();
        for event in &self.merges {
            let root = self.find_readonly(event.roots.0);
            let tags = tags_by_root.entry(root).or_default();
            if !tags.contains(&event.tag) {
                tags.push(event.tag);
            }
        }
        let mut clusters: Vec<Cluster> = members_by_root
            .into_iter()
            .map(|(root, mut members)| {
                members.sort_unstable();
                let mut heuristics = tags_by_root.remove(&root).unwrap_or_default();
                heuristics.sort_unstable_by_key(|tag| tag.as_str());
                Cluster { cluster_id: 0, representative: members[0].clone(), members, heuristics }
            })
            .collect();
        clusters.sort_unstable_by(|a, b| a.representative.cmp(&b.representative));
        for (rank, cluster) in clusters.iter_mut().enumerate() {
            cluster.cluster_id = rank as u64;
        }
        clusters
    }
}
