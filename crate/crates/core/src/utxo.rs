//! Clustering heuristics for UTXO chains.
//!
//! Two passes over a position-ordered transaction stream:
//!
//! 1. Common spending: every non-coinbase transaction joins all of its
//!    distinct input addresses, since they were signed by one party.
//! 2. One-time change: a transaction's single freshly generated output is
//!    attributed to the spender when a conjunction of predicates holds.
//!
//! Both passes are incremental so callers can stream arbitrarily long
//! chains without materializing them.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::model::{Address, ChainPosition, UtxoTransaction};
use crate::partition::{HeuristicTag, Partition};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum UtxoError {
    #[error("address history already covers {frontier}, cannot evaluate transaction {txid} at {position}")]
    HistoryAhead { txid: String, frontier: ChainPosition, position: ChainPosition },
}

/// Why change inference declined a transaction. Ordered like the predicates
/// that produce them; the first failing predicate wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AbstainReason {
    Coinbase,
    SingleOutput,
    SingleInput,
    NoNewOutput,
    MultipleNewOutputs,
    RoundAmount,
    AddressOverlap,
}

impl AbstainReason {
    pub fn as_str(self) -> &'static str {
        match self {
            AbstainReason::Coinbase => "coinbase",
            AbstainReason::SingleOutput => "single_output",
            AbstainReason::SingleInput => "single_input",
            AbstainReason::NoNewOutput => "no_new_output",
            AbstainReason::MultipleNewOutputs => "multiple_new_outputs",
            AbstainReason::RoundAmount => "round_amount",
            AbstainReason::AddressOverlap => "address_overlap",
        }
    }

    #[allow(clippy::should_implement_trait)] // fallible wire-token lookup, not a parse
    pub fn from_str(s: &str) -> Option<Self> {
        Some(match s {
            "coinbase" => AbstainReason::Coinbase,
            "single_output" => AbstainReason::SingleOutput,
            "single_input" => AbstainReason::SingleInput,
            "no_new_output" => AbstainReason::NoNewOutput,
            "multiple_new_outputs" => AbstainReason::MultipleNewOutputs,
            "round_amount" => AbstainReason::RoundAmount,
            "address_overlap" => AbstainReason::AddressOverlap,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChangeOutcome {
    /// The named output address is the spender's change.
    Inferred(Address),
    Abstained(AbstainReason),
}

/// Per-transaction verdict of the change pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChangeDecision {
    pub txid: String,
    pub outcome: ChangeOutcome,
}

/// First-appearance index over addresses, advanced in chain order.
///
/// `used_before(a, p)` answers whether `a` appeared in any transaction at a
/// position strictly before `p`. Appearances queue in `record` and only
/// become visible once the stream moves past their position, so several
/// transactions sharing a position see identical history.
#[derive(Debug, Default)]
pub struct AddressHistory {
    first_seen: HashMap<Address, ChainPosition>,
    pending: Vec<(Address, ChainPosition)>,
    /// Largest position among visible appearances.
    visible_watermark: Option<ChainPosition>,
}

impl AddressHistory {
    pub fn new() -> Self {
        AddressHistory::default()
    }

    /// Largest position the visible history covers, if any.
    pub fn visible_watermark(&self) -> Option<ChainPosition> {
        self.visible_watermark
    }

    /// Queues an appearance of `addr` at `position`. It stays invisible
    /// until the stream advances strictly past `position`.
    pub fn record(&mut self, addr: &Address, position: ChainPosition) {
        if !self.first_seen.contains_key(addr) {
            self.pending.push((addr.clone(), position));
        }
    }

    /// Makes every appearance strictly before `position` visible.
    pub fn advance_to(&mut self, position: ChainPosition) {
        if self.pending.iter().all(|(_, p)| *p >= position) {
            return;
        }
        let mut keep = Vec::new();
        for (addr, p) in self.pending.drain(..) {
            if p < position {
                if self.visible_watermark.is_none_or(|w| w < p) {
                    self.visible_watermark = Some(p);
                }
                self.first_seen.entry(addr).or_insert(p);
            } else {
                keep.push((addr, p));
            }
        }
        self.pending = keep;
    }

    /// True when `addr` first appeared strictly before `position`.
    pub fn used_before(&self, addr: &Address, position: ChainPosition) -> bool {
        self.first_seen.get(addr).is_some_and(|&p| p < position)
    }
}

/// Decides whether exactly one output of `tx` is the spender's change.
///
/// The predicates run in a fixed order and the first failure is reported:
/// the transaction must not be coinbase and must have at least two outputs;
/// it must spend from at least two distinct addresses; exactly one output
/// address must be new to the chain while all others have been seen before;
/// the candidate amount must carry more than four significant fractional
/// digits; and no address may appear on both sides of the transaction.
///
/// `history` must reflect exactly the transactions strictly before
/// `tx.position` (pending appearances at `tx.position` or later are fine).
pub fn infer_change_address(tx: &UtxoTransaction, history: &AddressHistory) -> Result<ChangeDecision, UtxoError> {
    if let Some(frontier) = history.visible_watermark() {
        if frontier >= tx.position {
            return Err(UtxoError::HistoryAhead { txid: tx.txid.clone(), frontier, position: tx.position });
        }
    }
    let abstain = |reason: AbstainReason| {
        Ok(ChangeDecision { txid: tx.txid.clone(), outcome: ChangeOutcome::Abstained(reason) })
    };

    if tx.coinbase {
        return abstain(AbstainReason::Coinbase);
    }
    if tx.outputs.len() < 2 {
        return abstain(AbstainReason::SingleOutput);
    }

    let distinct_inputs: HashSet<&Address> = tx.inputs.iter().map(|(a, _)| a).collect();
    if distinct_inputs.len() < 2 {
        return abstain(AbstainReason::SingleInput);
    }

    // An address first seen in this very transaction's outputs is new; two
    // occurrences of one new address still count as two new outputs.
    let mut candidate: Option<&(Address, crate::model::Amount)> = None;
    let mut new_outputs = 0usize;
    for entry in &tx.outputs {
        if !history.used_before(&entry.0, tx.position) {
            new_outputs += 1;
            candidate = Some(entry);
        }
    }
    if new_outputs == 0 {
        return abstain(AbstainReason::NoNewOutput);
    }
    if new_outputs > 1 {
        return abstain(AbstainReason::MultipleNewOutputs);
    }
    let (candidate_addr, candidate_amount) = candidate.expect("exactly one new output");

    if candidate_amount.fractional_digits() <= 4 {
        return abstain(AbstainReason::RoundAmount);
    }

    if tx.outputs.iter().any(|(a, _)| distinct_inputs.contains(a)) {
        return abstain(AbstainReason::AddressOverlap);
    }

    Ok(ChangeDecision { txid: tx.txid.clone(), outcome: ChangeOutcome::Inferred(candidate_addr.clone()) })
}

/// Joins all distinct input addresses of a non-coinbase transaction by
/// unioning each with the first input address. Output addresses are interned
/// so they surface as singletons, but never joined.
pub fn join_common_inputs(tx: &UtxoTransaction, partition: &mut Partition) {
    for (addr, _) in &tx.outputs {
        partition.intern(addr);
    }
    if tx.coinbase {
        return;
    }
    let first = partition.intern(&tx.inputs[0].0);
    for (addr, _) in &tx.inputs[1..] {
        let id = partition.intern(addr);
        partition.union_ids(first, id, HeuristicTag::CommonSpending, &tx.txid);
    }
    #[cfg(debug_assertions)]
    {
        let root = partition.find(first);
        for (addr, _) in &tx.inputs {
            let id = partition.intern(addr);
            debug_assert_eq!(partition.find(id), root, "inputs of {} not joined", tx.txid);
        }
    }
}

/// Common-spending pass over a whole stream.
pub fn cluster_common_spending<'a, I>(txs: I, partition: &mut Partition)
where
    I: IntoIterator<Item = &'a UtxoTransaction>,
{
    for tx in txs {
        join_common_inputs(tx, partition);
    }
}

/// Incremental driver for the change pass: feeds transactions in chain
/// order, maintains the address history, and unions each inferred change
/// address with the transaction's first input address.
#[derive(Debug, Default)]
pub struct ChangeScan {
    history: AddressHistory,
}

impl ChangeScan {
    pub fn new() -> Self {
        ChangeScan::default()
    }

    pub fn observe(&mut self, tx: &UtxoTransaction, partition: &mut Partition) -> Result<ChangeDecision, UtxoError> {
        self.history.advance_to(tx.position);
        let decision = infer_change_address(tx, &self.history)?;
        if let ChangeOutcome::Inferred(change) = &decision.outcome {
            partition.union(&tx.inputs[0].0, change, HeuristicTag::Change, &tx.txid);
        }
        for (addr, _) in tx.inputs.iter().chain(&tx.outputs) {
            self.history.record(addr, tx.position);
        }
        Ok(decision)
    }
}

/// Change pass over a whole stream, one decision per transaction in input
/// order.
pub fn apply_change_heuristic<'a, I>(txs: I, partition: &mut Partition) -> Vec<ChangeDecision>
where
    I: IntoIterator<Item = &'a UtxoTransaction>,
{
    let mut scan = ChangeScan::new();
    txs.into_iter()
        .map(|tx| scan.observe(tx, partition).expect("stream is position-ordered"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Amount;

    fn addr(s: &str) -> Address {
        Address::new(s).unwrap()
    }

    fn amt(text: &str) -> Amount {
        Amount::parse(text, 8).unwrap()
    }

    fn tx(
        txid: &str,
        position: (u64, u64),
        inputs: &[(&str, &str)],
        outputs: &[(&str, &str)],
    ) -> UtxoTransaction {
        UtxoTransaction::new(
            txid,
            ChainPosition::new(position.0, position.1),
            inputs.is_empty(),
            inputs.iter().map(|(a, v)| (addr(a), amt(v))).collect(),
            outputs.iter().map(|(a, v)| (addr(a), amt(v))).collect(),
        )
        .unwrap()
    }

    fn decide(stream: &[UtxoTransaction]) -> Vec<ChangeDecision> {
        let mut p = Partition::new();
        apply_change_heuristic(stream, &mut p)
    }

    #[test]
    fn infers_the_single_fresh_nonround_output() {
        let history_feed = tx("t0", (1, 0), &[("payer", "9")], &[("in1", "3"), ("in2", "3"), ("payee", "3")]);
        let spend = tx(
            "t1",
            (2, 0),
            &[("in1", "3"), ("in2", "3")],
            &[("payee", "2.5"), ("fresh", "3.49990134")],
        );
        let decisions = decide(&[history_feed, spend]);
        assert_eq!(decisions[1].outcome, ChangeOutcome::Inferred(addr("fresh")));
    }

    #[test]
    fn abstains_on_coinbase_then_single_output() {
        let coinbase = tx("cb", (1, 0), &[], &[("w", "50")]);
        let decisions = decide(&[coinbase]);
        assert_eq!(decisions[0].outcome, ChangeOutcome::Abstained(AbstainReason::Coinbase));

        let single = tx("t", (1, 0), &[("a", "1"), ("b", "1")], &[("c", "1.99999991")]);
        assert_eq!(decide(&[single])[0].outcome, ChangeOutcome::Abstained(AbstainReason::SingleOutput));
    }

    #[test]
    fn abstains_when_inputs_are_one_address() {
        // Two UTXOs held by one address still count as a single input address.
        let spend = tx("t", (1, 0), &[("a", "1"), ("a", "2")], &[("b", "1.5"), ("c", "1.49990134")]);
        assert_eq!(decide(&[spend])[0].outcome, ChangeOutcome::Abstained(AbstainReason::SingleInput));
    }

    #[test]
    fn abstains_when_no_output_is_new() {
        let feed = tx("t0", (1, 0), &[("x", "9")], &[("a", "3"), ("b", "3"), ("p", "3")]);
        let spend = tx("t1", (2, 0), &[("a", "3"), ("b", "3")], &[("p", "2.5"), ("p", "3.49990134")]);
        let decisions = decide(&[feed, spend]);
        assert_eq!(decisions[1].outcome, ChangeOutcome::Abstained(AbstainReason::NoNewOutput));
    }

    #[test]
    fn abstains_when_two_outputs_are_new() {
        let feed = tx("t0", (1, 0), &[("x", "9")], &[("a", "3"), ("b", "3")]);
        let spend = tx("t1", (2, 0), &[("a", "3"), ("b", "3")], &[("p", "2.5"), ("q", "3.49990134")]);
        let decisions = decide(&[feed, spend]);
        assert_eq!(decisions[1].outcome, ChangeOutcome::Abstained(AbstainReason::MultipleNewOutputs));
    }

    #[test]
    fn one_address_appearing_twice_in_outputs_counts_as_two_new() {
        let feed = tx("t0", (1, 0), &[("x", "9")], &[("a", "3"), ("b", "3")]);
        let spend = tx("t1", (2, 0), &[("a", "3"), ("b", "3")], &[("q", "2.5"), ("q", "3.49990134")]);
        let decisions = decide(&[feed, spend]);
        assert_eq!(decisions[1].outcome, ChangeOutcome::Abstained(AbstainReason::MultipleNewOutputs));
    }

    #[test]
    fn abstains_on_round_candidate_amounts() {
        let feed = tx("t0", (1, 0), &[("x", "9")], &[("a", "3"), ("b", "3"), ("p", "3")]);
        // Candidate has exactly 4 fractional digits: not strictly more, so round.
        let spend = tx("t1", (2, 0), &[("a", "3"), ("b", "3")], &[("p", "2.5"), ("fresh", "3.4999")]);
        let decisions = decide(&[feed, spend]);
        assert_eq!(decisions[1].outcome, ChangeOutcome::Abstained(AbstainReason::RoundAmount));
    }

    #[test]
    fn abstains_when_an_address_sits_on_both_sides() {
        let feed = tx("t0", (1, 0), &[("x", "9")], &[("a", "3"), ("b", "3"), ("p", "3")]);
        let spend = tx(
            "t1",
            (2, 0),
            &[("a", "3"), ("b", "3")],
            &[("p", "1"), ("a", "1.5"), ("fresh", "3.49990134")],
        );
        let decisions = decide(&[feed, spend]);
        assert_eq!(decisions[1].outcome, ChangeOutcome::Abstained(AbstainReason::AddressOverlap));
    }

    #[test]
    fn same_position_transactions_share_history() {
        // Both t1 and t2 sit at block 2: t2 must not see t1's fresh output.
        let feed = tx("t0", (1, 0), &[("x", "9")], &[("a", "3"), ("b", "3"), ("p", "3")]);
        let t1 = tx("t1", (2, 0), &[("a", "1"), ("b", "1")], &[("p", "0.5"), ("f1", "1.49990134")]);
        let t2 = tx("t2", (2, 0), &[("a", "1"), ("b", "1")], &[("p", "0.5"), ("f1", "1.39990134")]);
        let decisions = decide(&[feed, t1, t2]);
        assert_eq!(decisions[1].outcome, ChangeOutcome::Inferred(addr("f1")));
        // f1 is still pending for position (2,0), so it is new again here.
        assert_eq!(decisions[2].outcome, ChangeOutcome::Inferred(addr("f1")));
    }

    #[test]
    fn later_position_sees_earlier_same_block_outputs() {
        let feed = tx("t0", (1, 0), &[("x", "9")], &[("a", "3"), ("b", "3"), ("p", "3")]);
        let t1 = tx("t1", (2, 0), &[("a", "1"), ("b", "1")], &[("p", "0.5"), ("f1", "1.49990134")]);
        let t2 = tx("t2", (2, 1), &[("a", "1"), ("b", "1")], &[("p", "0.5"), ("f1", "1.39990134")]);
        let decisions = decide(&[feed, t1, t2]);
        assert_eq!(decisions[2].outcome, ChangeOutcome::Abstained(AbstainReason::NoNewOutput));
    }

    #[test]
    fn inferred_change_joins_the_first_input_address() {
        let feed = tx("t0", (1, 0), &[("x", "9")], &[("a", "3"), ("b", "3"), ("p", "3")]);
        let spend = tx("t1", (2, 0), &[("a", "3"), ("b", "3")], &[("p", "2.5"), ("fresh", "3.49990134")]);
        let mut p = Partition::new();
        let decisions = apply_change_heuristic(&[feed, spend], &mut p);
        assert_eq!(decisions[1].outcome, ChangeOutcome::Inferred(addr("fresh")));
        assert_eq!(p.root_of(&addr("fresh")), p.root_of(&addr("a")));
        let log = p.merge_log();
        assert_eq!(log.len(), 1);
        assert_eq!(log[0].tag, HeuristicTag::Change);
        assert_eq!(log[0].origin, "t1");
    }

    #[test]
    fn decisions_cover_every_transaction_in_order() {
        let stream = vec![
            tx("cb", (0, 0), &[], &[("w", "50")]),
            tx("t1", (1, 0), &[("w", "50")], &[("a", "25"), ("b", "25")]),
            tx("t2", (2, 0), &[("a", "25"), ("b", "25")], &[("w", "10"), ("f", "39.99990134")]),
        ];
        let decisions = decide(&stream);
        let ids: Vec<&str> = decisions.iter().map(|d| d.txid.as_str()).collect();
        assert_eq!(ids, vec!["cb", "t1", "t2"]);
    }

    #[test]
    fn common_spending_joins_inputs_and_interns_outputs() {
        let stream = vec![
            tx("cb", (0, 0), &[], &[("w1", "50"), ("w2", "50"), ("w3", "50")]),
            tx("t1", (1, 0), &[("w1", "50"), ("w2", "50")], &[("out1", "100")]),
            tx("t2", (2, 0), &[("w2", "10"), ("w3", "10")], &[("out2", "20")]),
        ];
        let mut p = Partition::new();
        cluster_common_spending(&stream, &mut p);
        // w1-w2 joined, then w2-w3: transitively one set.
        assert_eq!(p.root_of(&addr("w1")), p.root_of(&addr("w3")));
        // Outputs are present but solitary.
        assert!(p.contains(&addr("out1")));
        assert_ne!(p.root_of(&addr("out1")), p.root_of(&addr("w1")));
        assert_ne!(p.root_of(&addr("out1")), p.root_of(&addr("out2")));
        assert_eq!(p.len(), 5);
        assert_eq!(p.cluster_count(), 3);
    }

    #[test]
    fn coinbase_contributes_no_joins() {
        let stream = vec![tx("cb", (0, 0), &[], &[("w1", "50"), ("w2", "50")])];
        let mut p = Partition::new();
        cluster_common_spending(&stream, &mut p);
        assert_eq!(p.cluster_count(), 2);
        assert!(p.merge_log().is_empty());
    }

    #[test]
    fn history_ahead_of_the_transaction_is_a_contract_error() {
        let mut history = AddressHistory::new();
        history.record(&addr("a"), ChainPosition::new(5, 0));
        history.advance_to(ChainPosition::new(6, 0));
        let stale = tx("t", (4, 0), &[("a", "1"), ("b", "1")], &[("c", "0.5"), ("d", "1.49990134")]);
        assert_eq!(
            infer_change_address(&stale, &history),
            Err(UtxoError::HistoryAhead {
                txid: "t".into(),
                frontier: ChainPosition::new(5, 0),
                position: ChainPosition::new(4, 0),
            })
        );
    }

    #[test]
    fn change_pass_is_deterministic() {
        let stream = vec![
            tx("t0", (1, 0), &[("x", "9")], &[("a", "3"), ("b", "3"), ("p", "3")]),
            tx("t1", (2, 0), &[("a", "3"), ("b", "3")], &[("p", "2.5"), ("fresh", "3.49990134")]),
        ];
        assert_eq!(decide(&stream), decide(&stream));
    }
}
