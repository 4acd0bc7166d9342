//! File formats: newline-delimited JSON record streams and the seed CSV.
//!
//! Readers are single-pass iterators that validate as they go and point at
//! the offending line on failure. They never sort: a stream that is not
//! already in chain order is an input error, not something to repair.
//! Writers emit one canonical JSON object per line so identical data
//! serializes to identical bytes.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::account::{DepositInference, DepositOutcome, RejectReason};
use crate::label::{Category, LabeledCluster, SeedLabel};
use crate::model::{AccountTransfer, Address, Amount, ChainPosition, ModelError, UtxoTransaction};
use crate::partition::{Cluster, HeuristicTag};
use crate::utxo::{AbstainReason, ChangeDecision, ChangeOutcome};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {detail}")]
    Record { line: usize, detail: String },
    #[error("line {line}: duplicate txid {txid:?}")]
    DuplicateTxid { line: usize, txid: String },
    #[error("line {line}: {got} comes after {prev}, stream must be position-ordered")]
    OutOfOrder { line: usize, prev: ChainPosition, got: ChainPosition },
    #[error("seed file header must be \"address,name,category,source\", found {found:?}")]
    SeedHeader { found: String },
    #[error("line {line}: seed address {address} already labelled {first:?}, conflicting {second:?}")]
    SeedConflict { line: usize, address: String, first: String, second: String },
}

impl IngestError {
    fn at(line: usize, err: impl std::fmt::Display) -> Self {
        IngestError::Record { line, detail: err.to_string() }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct IoEntry {
    address: String,
    value: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct UtxoRecord {
    txid: String,
    block: u64,
    index: u64,
    coinbase: bool,
    inputs: Vec<IoEntry>,
    outputs: Vec<IoEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TransferRecord {
    hash: String,
    block: u64,
    index: u64,
    from: String,
    to: String,
    value: String,
    asset: String,
}

/// Streaming reader over UTXO transaction records.
///
/// Validates record shape, address and amount syntax, the coinbase/input
/// invariant, txid uniqueness, and non-decreasing chain position. Fused
/// after the first error.
pub struct UtxoReader<R: BufRead> {
    lines: std::iter::Enumerate<std::io::Lines<R>>,
    decimals: u32,
    seen_txids: HashSet<String>,
    prev_position: Option<ChainPosition>,
    failed: bool,
}

impl<R: BufRead> UtxoReader<R> {
    pub fn new(reader: R, decimals: u32) -> Self {
        UtxoReader {
            lines: reader.lines().enumerate(),
            decimals,
            seen_txids: HashSet::new(),
            prev_position: None,
            failed: false,
        }
    }

    fn parse_line(&mut self, line_no: usize, line: &str) -> Result<UtxoTransaction, IngestError> {
        let record: UtxoRecord = serde_json::from_str(line).map_err(|e| IngestError::at(line_no, e))?;
        let position = ChainPosition::new(record.block, record.index);
        if let Some(prev) = self.prev_position {
            if position < prev {
                return Err(IngestError::OutOfOrder { line: line_no, prev, got: position });
            }
        }
        if self.seen_txids.contains(&record.txid) {
            return Err(IngestError::DuplicateTxid { line: line_no, txid: record.txid });
        }
        let inputs = convert_entries(&record.inputs, self.decimals).map_err(|e| IngestError::at(line_no, e))?;
        let outputs = convert_entries(&record.outputs, self.decimals).map_err(|e| IngestError::at(line_no, e))?;
        let tx = UtxoTransaction::new(record.txid, position, record.coinbase, inputs, outputs)
            .map_err(|e| IngestError::at(line_no, e))?;
        self.seen_txids.insert(tx.txid.clone());
        self.prev_position = Some(position);
        Ok(tx)
    }
}

fn convert_entries(entries: &[IoEntry], decimals: u32) -> Result<Vec<(Address, Amount)>, ModelError> {
    entries
        .iter()
        .map(|e| Ok((Address::new(e.address.clone())?, Amount::parse(&e.value, decimals)?)))
        .collect()
}

impl<R: BufRead> Iterator for UtxoReader<R> {
    type Item = Result<UtxoTransaction, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            let (idx, line) = self.lines.next()?;
            let line = match line {
                Ok(line) => line,
                Err(e) => {
                    self.failed = true;
                    return Some(Err(e.into()));
                }
            };
            if line.trim().is_empty() {
                continue;
            }
            let result = self.parse_line(idx + 1, &line);
            if result.is_err() {
                self.failed = true;
            }
            return Some(result);
        }
    }
}

/// Streaming reader over account transfer records, with the same
/// line-precise validation and ordering contract as [`UtxoReader`].
pub struct TransferReader<R: BufRead> {
    lines: std::iter::Enumerate<std::io::Lines<R>>,
    decimals: u32,
    seen_hashes: HashSet<String>,
    prev_position: Option<ChainPosition>,
    failed: bool,
}

impl<R: BufRead> TransferReader<R> {
    pub fn new(reader: R, decimals: u32) -> Self {
        TransferReader {
            lines: reader.lines().enumerate(),
            decimals,
            seen_hashes: HashSet::new(),
            prev_position: None,
            failed: false,
        }
    }

    fn parse_line(&mut self, line_no: usize, line: &str) -> Result<AccountTransfer, IngestError> {
        let record: TransferRecord = serde_json::from_str(line).map_err(|e| IngestError::at(line_no, e))?;
        let position = ChainPosition::new(record.block, record.index);
        if let Some(prev) = self.prev_position {
            if position < prev {
                return Err(IngestError::OutOfOrder { line: line_no, prev, got: position });
            }
        }
        if self.seen_hashes.contains(&record.hash) {
            return Err(IngestError::DuplicateTxid { line: line_no, txid: record.hash });
        }
        let transfer = AccountTransfer {
            hash: record.hash,
            position,
            from: Address::new(record.from).map_err(|e| IngestError::at(line_no, e))?,
            to: Address::new(record.to).map_err(|e| IngestError::at(line_no, e))?,
            value: Amount::parse(&record.value, self.decimals).map_err(|e| IngestError::at(line_no, e))?,
            asset: record.asset,
        };
        if transfer.asset.is_empty() {
            return Err(IngestError::at(line_no, "empty asset name"));
        }
        self.seen_hashes.insert(transfer.hash.clone());
        self.prev_position = Some(position);
        Ok(transfer)
    }
}

impl<R: BufRead> Iterator for TransferReader<R> {
    type Item = Result<AccountTransfer, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            let (idx, line) = self.lines.next()?;
            let line = match line {
                Ok(line) => line,
                Err(e) => {
                    self.failed = true;
                    return Some(Err(e.into()));
                }
            };
            if line.trim().is_empty() {
                continue;
            }
            let result = self.parse_line(idx + 1, &line);
            if result.is_err() {
                self.failed = true;
            }
            return Some(result);
        }
    }
}

fn write_json_line<W: Write, T: Serialize>(w: &mut W, record: &T) -> Result<(), IngestError> {
    serde_json::to_writer(&mut *w, record).map_err(|e| IngestError::Record { line: 0, detail: e.to_string() })?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn write_utxo_transactions<'a, W, I>(w: &mut W, txs: I) -> Result<(), IngestError>
where
    W: Write,
    I: IntoIterator<Item = &'a UtxoTransaction>,
{
    for tx in txs {
        let record = UtxoRecord {
            txid: tx.txid.clone(),
            block: tx.position.block,
            index: tx.position.index,
            coinbase: tx.coinbase,
            inputs: to_entries(&tx.inputs),
            outputs: to_entries(&tx.outputs),
        };
        write_json_line(w, &record)?;
    }
    Ok(())
}

fn to_entries(pairs: &[(Address, Amount)]) -> Vec<IoEntry> {
    pairs
        .iter()
        .map(|(a, v)| IoEntry { address: a.as_str().to_string(), value: v.to_string() })
        .collect()
}

pub fn write_transfers<'a, W, I>(w: &mut W, transfers: I) -> Result<(), IngestError>
where
    W: Write,
    I: IntoIterator<Item = &'a AccountTransfer>,
{
    for t in transfers {
        let record = TransferRecord {
            hash: t.hash.clone(),
            block: t.position.block,
            index: t.position.index,
            from: t.from.as_str().to_string(),
            to: t.to.as_str().to_string(),
            value: t.value.to_string(),
            asset: t.asset.clone(),
        };
        write_json_line(w, &record)?;
    }
    Ok(())
}

/// Seed CSV loading result: the deduplicated seeds plus one warning per
/// unrecognized category encountered.
#[derive(Debug)]
pub struct SeedLoad {
    pub seeds: Vec<SeedLabel>,
    pub warnings: Vec<String>,
}

/// Loads `address,name,category,source` rows. Exact duplicate addresses
/// with the same name collapse to the first occurrence; the same address
/// under two names is an error. Unknown categories map to `other` with a
/// warning.
pub fn load_seed_labels<R: std::io::Read>(reader: R) -> Result<SeedLoad, IngestError> {
    let mut csv_reader = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = csv_reader
        .headers()
        .map_err(|e| IngestError::Record { line: 1, detail: e.to_string() })?
        .clone();
    let expected = ["address", "name", "category", "source"];
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(IngestError::SeedHeader { found: header.iter().collect::<Vec<_>>().join(",") });
    }
    let mut seeds: Vec<SeedLabel> = Vec::new();
    let mut by_address: std::collections::HashMap<Address, usize> = std::collections::HashMap::new();
    let mut warnings = Vec::new();
    for result in csv_reader.into_records() {
        let record = result.map_err(|e| IngestError::Record { line: 0, detail: e.to_string() })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != 4 {
            return Err(IngestError::Record { line, detail: format!("expected 4 fields, found {}", record.len()) });
        }
        let address = Address::new(record[0].to_string()).map_err(|e| IngestError::at(line, e))?;
        let name = record[1].to_string();
        if name.is_empty() {
            return Err(IngestError::Record { line, detail: "empty seed name".to_string() });
        }
        let category = match Category::from_str(&record[2]) {
            Some(c) => c,
            None => {
                warnings.push(format!(
                    "line {line}: unknown category {:?} for {address}, treating as \"other\"",
                    &record[2]
                ));
                Category::Other
            }
        };
        if let Some(&at) = by_address.get(&address) {
            if seeds[at].name != name {
                return Err(IngestError::SeedConflict {
                    line,
                    address: address.as_str().to_string(),
                    first: seeds[at].name.clone(),
                    second: name,
                });
            }
            continue;
        }
        by_address.insert(address.clone(), seeds.len());
        seeds.push(SeedLabel { address, name, category, source: record[3].to_string() });
    }
    Ok(SeedLoad { seeds, warnings })
}

pub fn write_seed_labels<'a, W, I>(w: &mut W, seeds: I) -> Result<(), IngestError>
where
    W: Write,
    I: IntoIterator<Item = &'a SeedLabel>,
{
    let mut csv_writer = csv::Writer::from_writer(w);
    csv_writer
        .write_record(["address", "name", "category", "source"])
        .map_err(|e| IngestError::Record { line: 0, detail: e.to_string() })?;
    for seed in seeds {
        csv_writer
            .write_record([seed.address.as_str(), &seed.name, seed.category.as_str(), &seed.source])
            .map_err(|e| IngestError::Record { line: 0, detail: e.to_string() })?;
    }
    csv_writer.flush()?;
    Ok(())
}

/// Census rows as CSV, in the order given (already ranked by the census).
pub fn write_census_csv<'a, W, I>(w: &mut W, rows: I) -> Result<(), IngestError>
where
    W: Write,
    I: IntoIterator<Item = &'a crate::label::CensusRow>,
{
    let mut csv_writer = csv::Writer::from_writer(w);
    csv_writer
        .write_record(["category", "name", "num_addresses"])
        .map_err(|e| IngestError::Record { line: 0, detail: e.to_string() })?;
    for row in rows {
        csv_writer
            .write_record([&row.category, &row.name, &row.num_addresses.to_string()])
            .map_err(|e| IngestError::Record { line: 0, detail: e.to_string() })?;
    }
    csv_writer.flush()?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct LabelRecord {
    pub name: String,
    pub category: String,
}

/// Wire form of a cluster, before or after labeling: `label` is null and
/// `conflicts` empty straight out of clustering.
#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ClusterRecord {
    pub cluster_id: u64,
    pub representative: String,
    pub addresses: Vec<String>,
    pub label: Option<LabelRecord>,
    pub heuristics: Vec<String>,
    pub conflicts: Vec<String>,
}

impl ClusterRecord {
    pub fn from_cluster(cluster: &Cluster) -> Self {
        ClusterRecord {
            cluster_id: cluster.cluster_id,
            representative: cluster.representative.as_str().to_string(),
            addresses: cluster.members.iter().map(|a| a.as_str().to_string()).collect(),
            label: None,
            heuristics: cluster.heuristics.iter().map(|t| t.as_str().to_string()).collect(),
            conflicts: Vec::new(),
        }
    }

    pub fn from_labeled(cluster: &LabeledCluster) -> Self {
        ClusterRecord {
            cluster_id: cluster.cluster_id,
            representative: cluster.representative.as_str().to_string(),
            addresses: cluster.members.iter().map(|a| a.as_str().to_string()).collect(),
            label: cluster.label.as_ref().map(|(name, category)| LabelRecord {
                name: name.clone(),
                category: category.as_str().to_string(),
            }),
            heuristics: cluster.heuristics.clone(),
            conflicts: cluster.conflicts.clone(),
        }
    }

    /// Domain view of the record; addresses must be valid and sorted with
    /// the representative first.
    pub fn to_labeled(&self, line: usize) -> Result<LabeledCluster, IngestError> {
        let members: Vec<Address> = self
            .addresses
            .iter()
            .map(|a| Address::new(a.clone()).map_err(|e| IngestError::at(line, e)))
            .collect::<Result<_, _>>()?;
        if members.is_empty() {
            return Err(IngestError::Record { line, detail: "cluster with no addresses".to_string() });
        }
        if !members.windows(2).all(|w| w[0] < w[1]) {
            return Err(IngestError::Record {
                line,
                detail: "cluster addresses must be unique and bytewise-sorted".to_string(),
            });
        }
        let representative = Address::new(self.representative.clone()).map_err(|e| IngestError::at(line, e))?;
        if representative != members[0] {
            return Err(IngestError::Record {
                line,
                detail: "representative must be the bytewise-smallest member".to_string(),
            });
        }
        let label = match &self.label {
            None => None,
            Some(l) => {
                let category = Category::from_str(&l.category)
                    .ok_or_else(|| IngestError::Record { line, detail: format!("unknown category {:?}", l.category) })?;
                Some((l.name.clone(), category))
            }
        };
        Ok(LabeledCluster {
            cluster_id: self.cluster_id,
            representative,
            members,
            heuristics: self.heuristics.clone(),
            label,
            conflicts: self.conflicts.clone(),
        })
    }

    /// Pre-labeling view: any label or conflicts already present are
    /// dropped so the record can be relabeled against a fresh seed set.
    pub fn to_cluster(&self, line: usize) -> Result<Cluster, IngestError> {
        let labeled = self.to_labeled(line)?;
        let heuristics = labeled
            .heuristics
            .iter()
            .map(|tag| {
                HeuristicTag::from_str(tag)
                    .ok_or_else(|| IngestError::Record { line, detail: format!("unknown heuristic {tag:?}") })
            })
            .collect::<Result<_, _>>()?;
        Ok(Cluster {
            cluster_id: labeled.cluster_id,
            representative: labeled.representative,
            members: labeled.members,
            heuristics,
        })
    }
}

pub fn write_cluster_records<'a, W, I>(w: &mut W, clusters: I) -> Result<(), IngestError>
where
    W: Write,
    I: IntoIterator<Item = &'a Cluster>,
{
    for cluster in clusters {
        write_json_line(w, &ClusterRecord::from_cluster(cluster))?;
    }
    Ok(())
}

pub fn write_labeled_records<'a, W, I>(w: &mut W, clusters: I) -> Result<(), IngestError>
where
    W: Write,
    I: IntoIterator<Item = &'a LabeledCluster>,
{
    for cluster in clusters {
        write_json_line(w, &ClusterRecord::from_labeled(cluster))?;
    }
    Ok(())
}

pub fn read_labeled_clusters<R: BufRead>(reader: R) -> Result<Vec<LabeledCluster>, IngestError> {
    let mut clusters = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ClusterRecord = serde_json::from_str(&line).map_err(|e| IngestError::at(idx + 1, e))?;
        clusters.push(record.to_labeled(idx + 1)?);
    }
    Ok(clusters)
}

pub fn read_cluster_records<R: BufRead>(reader: R) -> Result<Vec<Cluster>, IngestError> {
    let mut clusters = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ClusterRecord = serde_json::from_str(&line).map_err(|e| IngestError::at(idx + 1, e))?;
        clusters.push(record.to_cluster(idx + 1)?);
    }
    Ok(clusters)
}

#[derive(Debug, Serialize, Deserialize)]
struct ChangeDecisionRecord {
    txid: String,
    outcome: String,
    address: Option<String>,
    reason: Option<String>,
}

pub fn write_change_decisions<'a, W, I>(w: &mut W, decisions: I) -> Result<(), IngestError>
where
    W: Write,
    I: IntoIterator<Item = &'a ChangeDecision>,
{
    for decision in decisions {
        let record = match &decision.outcome {
            ChangeOutcome::Inferred(addr) => ChangeDecisionRecord {
                txid: decision.txid.clone(),
                outcome: "inferred".to_string(),
                address: Some(addr.as_str().to_string()),
                reason: None,
            },
            ChangeOutcome::Abstained(reason) => ChangeDecisionRecord {
                txid: decision.txid.clone(),
                outcome: "abstained".to_string(),
                address: None,
                reason: Some(reason.as_str().to_string()),
            },
        };
        write_json_line(w, &record)?;
    }
    Ok(())
}

pub fn read_change_decisions<R: BufRead>(reader: R) -> Result<Vec<ChangeDecision>, IngestError> {
    let mut decisions = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let record: ChangeDecisionRecord = serde_json::from_str(&line).map_err(|e| IngestError::at(line_no, e))?;
        let outcome = match (record.outcome.as_str(), &record.address, &record.reason) {
            ("inferred", Some(addr), None) => {
                ChangeOutcome::Inferred(Address::new(addr.clone()).map_err(|e| IngestError::at(line_no, e))?)
            }
            ("abstained", None, Some(reason)) => ChangeOutcome::Abstained(
                AbstainReason::from_str(reason)
                    .ok_or_else(|| IngestError::Record { line: line_no, detail: format!("unknown reason {reason:?}") })?,
            ),
            _ => {
                return Err(IngestError::Record {
                    line: line_no,
                    detail: "outcome must be inferred-with-address or abstained-with-reason".to_string(),
                })
            }
        };
        decisions.push(ChangeDecision { txid: record.txid, outcome });
    }
    Ok(decisions)
}

#[derive(Debug, Serialize, Deserialize)]
struct DepositInferenceRecord {
    address: String,
    entity: Option<String>,
    outcome: String,
    reason: Option<String>,
    sweep_count: u64,
}

pub fn write_deposit_inferences<'a, W, I>(w: &mut W, inferences: I) -> Result<(), IngestError>
where
    W: Write,
    I: IntoIterator<Item = &'a DepositInference>,
{
    for inference in inferences {
        let record = match &inference.outcome {
            DepositOutcome::Inferred(entity) => DepositInferenceRecord {
                address: inference.address.as_str().to_string(),
                entity: Some(entity.clone()),
                outcome: "inferred".to_string(),
                reason: None,
                sweep_count: inference.sweep_count,
            },
            DepositOutcome::Rejected(reason) => DepositInferenceRecord {
                address: inference.address.as_str().to_string(),
                entity: None,
                outcome: "rejected".to_string(),
                reason: Some(reason.as_str().to_string()),
                sweep_count: inference.sweep_count,
            },
        };
        write_json_line(w, &record)?;
    }
    Ok(())
}

pub fn read_deposit_inferences<R: BufRead>(reader: R) -> Result<Vec<DepositInference>, IngestError> {
    let mut inferences = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let record: DepositInferenceRecord = serde_json::from_str(&line).map_err(|e| IngestError::at(line_no, e))?;
        let outcome = match (record.outcome.as_str(), &record.entity, &record.reason) {
            ("inferred", Some(entity), None) => DepositOutcome::Inferred(entity.clone()),
            ("rejected", None, Some(reason)) => DepositOutcome::Rejected(
                RejectReason::from_str(reason)
                    .ok_or_else(|| IngestError::Record { line: line_no, detail: format!("unknown reason {reason:?}") })?,
            ),
            _ => {
                return Err(IngestError::Record {
                    line: line_no,
                    detail: "outcome must be inferred-with-entity or rejected-with-reason".to_string(),
                })
            }
        };
        inferences.push(DepositInference {
            address: Address::new(record.address).map_err(|e| IngestError::at(line_no, e))?,
            outcome,
            sweep_count: record.sweep_count,
        });
    }
    Ok(inferences)
}

#[derive(Debug, Serialize, Deserialize)]
struct AddressTruthRecord {
    address: String,
    entity: String,
    role: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct ChangeTruthRecord {
    txid: String,
    change_index: Option<u64>,
}

pub fn write_address_truth<'a, W, I>(w: &mut W, rows: I) -> Result<(), IngestError>
where
    W: Write,
    I: IntoIterator<Item = (&'a Address, &'a str, &'a str)>,
{
    for (address, entity, role) in rows {
        let record = AddressTruthRecord {
            address: address.as_str().to_string(),
            entity: entity.to_string(),
            role: role.to_string(),
        };
        write_json_line(w, &record)?;
    }
    Ok(())
}

pub fn read_address_truth<R: BufRead>(reader: R) -> Result<Vec<(Address, String, String)>, IngestError> {
    let mut rows = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: AddressTruthRecord = serde_json::from_str(&line).map_err(|e| IngestError::at(idx + 1, e))?;
        rows.push((
            Address::new(record.address).map_err(|e| IngestError::at(idx + 1, e))?,
            record.entity,
            record.role,
        ));
    }
    Ok(rows)
}

pub fn write_change_truth<'a, W, I>(w: &mut W, rows: I) -> Result<(), IngestError>
where
    W: Write,
    I: IntoIterator<Item = (&'a str, Option<u64>)>,
{
    for (txid, change_index) in rows {
        write_json_line(w, &ChangeTruthRecord { txid: txid.to_string(), change_index })?;
    }
    Ok(())
}

pub fn read_change_truth<R: BufRead>(reader: R) -> Result<Vec<(String, Option<u64>)>, IngestError> {
    let mut rows = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ChangeTruthRecord = serde_json::from_str(&line).map_err(|e| IngestError::at(idx + 1, e))?;
        rows.push((record.txid, record.change_index));
    }
    Ok(rows)
}
