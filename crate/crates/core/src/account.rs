//! Deposit-address inference for account-model chains.
//!
//! Exchanges publish nothing, but their deposit addresses behave alike:
//! funds arrive from customers and leave only toward the exchange's known
//! hot wallets. Any address whose entire outgoing flow lands in one
//! exchange's wallets is credited to that exchange.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::label::{Category, SeedLabel};
use crate::model::{AccountTransfer, Address};
use crate::partition::{HeuristicTag, Partition};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AccountError {
    #[error("seed address {0} is claimed by both {1:?} and {2:?}")]
    ConflictingSeed(Address, String, String),
    #[error("inference references entity {0:?} which has no seed addresses")]
    UnknownEntity(String),
}

/// Known exchange-controlled wallet addresses, grouped by exchange name.
#[derive(Debug, Default, Clone)]
pub struct ExchangeSeedSet {
    by_entity: BTreeMap<String, BTreeSet<Address>>,
    by_address: BTreeMap<Address, String>,
}

impl ExchangeSeedSet {
    /// Builds the set from seed labels, keeping only exchange-category rows.
    pub fn from_seeds(seeds: &[SeedLabel]) -> Result<Self, AccountError> {
        let mut set = ExchangeSeedSet::default();
        for seed in seeds.iter().filter(|s| s.category == Category::Exchange) {
            set.insert(seed.address.clone(), seed.name.clone())?;
        }
        Ok(set)
    }

    pub fn insert(&mut self, address: Address, entity: String) -> Result<(), AccountError> {
        if let Some(existing) = self.by_address.get(&address) {
            if *existing != entity {
                return Err(AccountError::ConflictingSeed(address, existing.clone(), entity));
            }
            return Ok(());
        }
        self.by_address.insert(address.clone(), entity.clone());
        self.by_entity.entry(entity).or_default().insert(address);
        Ok(())
    }

    /// The exchange owning `addr`, if it is a known wallet.
    pub fn entity_of(&self, addr: &Address) -> Option<&str> {
        self.by_address.get(addr).map(String::as_str)
    }

    pub fn is_seed(&self, addr: &Address) -> bool {
        self.by_address.contains_key(addr)
    }

    /// Bytewise-smallest wallet of an exchange, the anchor all of its
    /// cluster merges attach to.
    pub fn anchor_of(&self, entity: &str) -> Option<&Address> {
        self.by_entity.get(entity).and_then(|set| set.iter().next())
    }

    pub fn entities(&self) -> impl Iterator<Item = (&String, &BTreeSet<Address>)> {
        self.by_entity.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.by_address.is_empty()
    }
}

/// Why an address with outgoing transfers was not credited to an exchange.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    /// The address is itself a known exchange wallet.
    IsSeed,
    /// Outgoing flow reaches wallets of two or more exchanges.
    MultiExchange,
    /// Some outgoing transfer leaves the known wallet set.
    SendsElsewhere,
    /// Not enough qualifying outgoing flow to call it.
    NoOutgoing,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::IsSeed => "is_seed",
            RejectReason::MultiExchange => "multi_exchange",
            RejectReason::SendsElsewhere => "sends_elsewhere",
            RejectReason::NoOutgoing => "no_outgoing",
        }
    }

    #[allow(clippy::should_implement_trait)] // fallible wire-token lookup, not a parse
    pub fn from_str(s: &str) -> Option<Self> {
        Some(match s {
            "is_seed" => RejectReason::IsSeed,
            "multi_exchange" => RejectReason::MultiExchange,
            "sends_elsewhere" => RejectReason::SendsElsewhere,
            "no_outgoing" => RejectReason::NoOutgoing,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DepositOutcome {
    /// The address is a deposit address of the named exchange.
    Inferred(String),
    Rejected(RejectReason),
}

/// Verdict for one address that showed outgoing activity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepositInference {
    pub address: Address,
    pub outcome: DepositOutcome,
    /// Outgoing transfers that landed in known exchange wallets.
    pub sweep_count: u64,
}

/// Classifies every address with outgoing activity.
///
/// Transfers are pooled across assets; self-transfers are invisible. An
/// address is credited to exchange X only when every outgoing transfer
/// lands in X's wallets and there are at least `min_sweeps` of them.
/// Addresses that only ever receive produce no record. The result is sorted
/// by address and depends only on the multiset of transfers, not their
/// order.
pub fn infer_deposit_addresses(
    transfers: &[AccountTransfer],
    seeds: &ExchangeSeedSet,
    min_sweeps: u64,
) -> Vec<DepositInference> {
    #[derive(Default)]
    struct Outgoing {
        total: u64,
        sweeps: u64,
        entities: BTreeSet<String>,
        off_book: bool,
    }

    let mut by_sender: BTreeMap<&Address, Outgoing> = BTreeMap::new();
    for t in transfers {
        if t.from == t.to {
            continue;
        }
        let entry = by_sender.entry(&t.from).or_default();
        entry.total += 1;
        match seeds.entity_of(&t.to) {
            Some(entity) => {
                entry.sweeps += 1;
                entry.entities.insert(entity.to_string());
            }
            None => entry.off_book = true,
        }
    }

    by_sender
        .into_iter()
        .map(|(address, out)| {
            let outcome = if seeds.is_seed(address) {
                DepositOutcome::Rejected(RejectReason::IsSeed)
            } else if out.entities.len() >= 2 {
                DepositOutcome::Rejected(RejectReason::MultiExchange)
            } else if !out.off_book && out.entities.len() == 1 && out.total >= min_sweeps {
                DepositOutcome::Inferred(out.entities.first().expect("one entity").clone())
            } else if out.off_book {
                DepositOutcome::Rejected(RejectReason::SendsElsewhere)
            } else {
                // Every transfer swept to one exchange but fewer than
                // min_sweeps of them: not enough evidence.
                DepositOutcome::Rejected(RejectReason::NoOutgoing)
            };
            DepositInference { address: address.clone(), outcome, sweep_count: out.sweeps }
        })
        .collect()
}

/// Unions each exchange's wallets together and attaches every inferred
/// deposit address to its exchange's bytewise-smallest wallet. Rejected
/// inferences contribute nothing.
pub fn build_exchange_clusters(
    inferences: &[DepositInference],
    seeds: &ExchangeSeedSet,
    partition: &mut Partition,
) -> Result<(), AccountError> {
    for (entity, wallets) in seeds.entities() {
        let mut wallets = wallets.iter();
        let anchor = wallets.next().expect("entities always hold at least one wallet");
        partition.intern(anchor);
        for wallet in wallets {
            partition.union(anchor, wallet, HeuristicTag::ExchangeSeed, entity);
        }
    }
    for inference in inferences {
        let DepositOutcome::Inferred(entity) = &inference.outcome else {
            continue;
        };
        let anchor = seeds.anchor_of(entity).ok_or_else(|| AccountError::UnknownEntity(entity.clone()))?;
        partition.union(anchor, &inference.address, HeuristicTag::Gathering, entity);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Amount, ChainPosition};

    fn addr(s: &str) -> Address {
        Address::new(s).unwrap()
    }

    fn transfer(hash: &str, block: u64, from: &str, to: &str, value: &str) -> AccountTransfer {
        AccountTransfer {
            hash: hash.to_string(),
            position: ChainPosition::new(block, 0),
            from: addr(from),
            to: addr(to),
            value: Amount::parse(value, 18).unwrap(),
            asset: "ETH".to_string(),
        }
    }

    fn seeds(pairs: &[(&str, &str)]) -> ExchangeSeedSet {
        let mut set = ExchangeSeedSet::default();
        for (a, e) in pairs {
            set.insert(addr(a), e.to_string()).unwrap();
        }
        set
    }

    fn outcome_of<'a>(results: &'a [DepositInference], a: &str) -> Option<&'a DepositInference> {
        results.iter().find(|r| r.address == addr(a))
    }

    #[test]
    fn credits_an_address_sweeping_to_one_exchange() {
        let seeds = seeds(&[("hot1", "binance.com")]);
        let transfers = vec![
            transfer("h1", 100, "cust", "dep", "174.65893626"),
            transfer("h2", 101, "dep", "hot1", "174.6625659"),
            transfer("h3", 102, "cust", "dep", "137.8303045"),
            transfer("h4", 103, "dep", "hot1", "137.8298845"),
        ];
        let results = infer_deposit_addresses(&transfers, &seeds, 1);
        let dep = outcome_of(&results, "dep").unwrap();
        assert_eq!(dep.outcome, DepositOutcome::Inferred("binance.com".to_string()));
        assert_eq!(dep.sweep_count, 2);
        // The customer wallet sends off-book (to dep, not a seed).
        let cust = outcome_of(&results, "cust").unwrap();
        assert_eq!(cust.outcome, DepositOutcome::Rejected(RejectReason::SendsElsewhere));
        assert_eq!(cust.sweep_count, 0);
        // The hot wallet never sends, so it has no record at all.
        assert!(outcome_of(&results, "hot1").is_none());
    }

    #[test]
    fn rejects_mixed_destination_flow() {
        let seeds = seeds(&[("hot1", "binance.com")]);
        let transfers = vec![
            transfer("h1", 100, "a", "hot1", "5"),
            transfer("h2", 101, "a", "friend", "1"),
        ];
        let results = infer_deposit_addresses(&transfers, &seeds, 1);
        let a = outcome_of(&results, "a").unwrap();
        assert_eq!(a.outcome, DepositOutcome::Rejected(RejectReason::SendsElsewhere));
        assert_eq!(a.sweep_count, 1);
    }

    #[test]
    fn rejects_flow_into_two_exchanges() {
        let seeds = seeds(&[("hot1", "binance.com"), ("hot2", "kraken.com")]);
        let transfers = vec![
            transfer("h1", 100, "a", "hot1", "5"),
            transfer("h2", 101, "a", "hot2", "5"),
        ];
        let results = infer_deposit_addresses(&transfers, &seeds, 1);
        assert_eq!(
            outcome_of(&results, "a").unwrap().outcome,
            DepositOutcome::Rejected(RejectReason::MultiExchange)
        );
    }

    #[test]
    fn rejects_known_wallets_by_name() {
        // Hot-to-hot shuffles must never register as deposit behavior.
        let seeds = seeds(&[("hot1", "binance.com"), ("hot2", "binance.com")]);
        let transfers = vec![transfer("h1", 100, "hot1", "hot2", "1000")];
        let results = infer_deposit_addresses(&transfers, &seeds, 1);
        let hot = outcome_of(&results, "hot1").unwrap();
        assert_eq!(hot.outcome, DepositOutcome::Rejected(RejectReason::IsSeed));
        assert_eq!(hot.sweep_count, 1);
    }

    #[test]
    fn below_min_sweeps_is_rejected_not_inferred() {
        let seeds = seeds(&[("hot1", "binance.com")]);
        let transfers = vec![transfer("h1", 100, "dep", "hot1", "5")];
        let results = infer_deposit_addresses(&transfers, &seeds, 2);
        let dep = outcome_of(&results, "dep").unwrap();
        assert_eq!(dep.outcome, DepositOutcome::Rejected(RejectReason::NoOutgoing));
        assert_eq!(dep.sweep_count, 1);
    }

    #[test]
    fn self_transfers_are_invisible() {
        let seeds = seeds(&[("hot1", "binance.com")]);
        let transfers = vec![transfer("h1", 100, "a", "a", "5")];
        assert!(infer_deposit_addresses(&transfers, &seeds, 1).is_empty());
    }

    #[test]
    fn receive_only_addresses_have_no_record() {
        let seeds = seeds(&[("hot1", "binance.com")]);
        let transfers = vec![transfer("h1", 100, "a", "b", "5")];
        let results = infer_deposit_addresses(&transfers, &seeds, 1);
        assert!(outcome_of(&results, "b").is_none());
        assert_eq!(results.len(), 1);
    }

    #[test]
    fn assets_pool_into_one_judgement() {
        let seeds = seeds(&[("hot1", "binance.com")]);
        let mut t1 = transfer("h1", 100, "dep", "hot1", "5");
        t1.asset = "USDT".to_string();
        let t2 = transfer("h2", 101, "dep", "hot1", "7");
        let results = infer_deposit_addresses(&[t1, t2], &seeds, 2);
        let dep = outcome_of(&results, "dep").unwrap();
        assert_eq!(dep.outcome, DepositOutcome::Inferred("binance.com".to_string()));
        assert_eq!(dep.sweep_count, 2);
    }

    #[test]
    fn output_is_sorted_and_order_insensitive() {
        let seeds = seeds(&[("hot1", "binance.com")]);
        let mut transfers = vec![
            transfer("h1", 100, "zeta", "hot1", "1"),
            transfer("h2", 101, "alpha", "hot1", "1"),
            transfer("h3", 102, "mid", "other", "1"),
        ];
        let forward = infer_deposit_addresses(&transfers, &seeds, 1);
        transfers.reverse();
        let backward = infer_deposit_addresses(&transfers, &seeds, 1);
        assert_eq!(forward, backward);
        let order: Vec<&str> = forward.iter().map(|r| r.address.as_str()).collect();
        assert_eq!(order, vec!["alpha", "mid", "zeta"]);
    }

    #[test]
    fn raising_min_sweeps_only_shrinks_the_inferred_set() {
        let seeds = seeds(&[("hot1", "binance.com")]);
        let transfers = vec![
            transfer("h1", 100, "dep1", "hot1", "1"),
            transfer("h2", 101, "dep1", "hot1", "1"),
            transfer("h3", 102, "dep2", "hot1", "1"),
        ];
        let inferred = |k: u64| -> Vec<Address> {
            infer_deposit_addresses(&transfers, &seeds, k)
                .into_iter()
                .filter(|r| matches!(r.outcome, DepositOutcome::Inferred(_)))
                .map(|r| r.address)
                .collect()
        };
        let at1 = inferred(1);
        let at2 = inferred(2);
        let at3 = inferred(3);
        assert_eq!(at1.len(), 2);
        assert_eq!(at2, vec![addr("dep1")]);
        assert!(at3.is_empty());
        assert!(at2.iter().all(|a| at1.contains(a)));
    }

    #[test]
    fn seed_conflicts_are_rejected_at_insert() {
        let mut set = ExchangeSeedSet::default();
        set.insert(addr("hot1"), "binance.com".to_string()).unwrap();
        set.insert(addr("hot1"), "binance.com".to_string()).unwrap();
        let err = set.insert(addr("hot1"), "kraken.com".to_string()).unwrap_err();
        assert_eq!(err, AccountError::ConflictingSeed(addr("hot1"), "binance.com".into(), "kraken.com".into()));
    }

    #[test]
    fn clusters_join_wallets_and_deposits_per_exchange() {
        let seeds = seeds(&[
            ("hotB", "binance.com"),
            ("hotA", "binance.com"),
            ("hotK", "kraken.com"),
        ]);
        let inferences = vec![
            DepositInference {
                address: addr("dep1"),
                outcome: DepositOutcome::Inferred("binance.com".to_string()),
                sweep_count: 2,
            },
            DepositInference {
                address: addr("dep2"),
                outcome: DepositOutcome::Inferred("kraken.com".to_string()),
                sweep_count: 1,
            },
            DepositInference {
                address: addr("noise"),
                outcome: DepositOutcome::Rejected(RejectReason::SendsElsewhere),
                sweep_count: 0,
            },
        ];
        let mut p = Partition::new();
        build_exchange_clusters(&inferences, &seeds, &mut p).unwrap();
        assert_eq!(p.root_of(&addr("hotA")), p.root_of(&addr("hotB")));
        assert_eq!(p.root_of(&addr("hotA")), p.root_of(&addr("dep1")));
        assert_ne!(p.root_of(&addr("hotA")), p.root_of(&addr("hotK")));
        assert_eq!(p.root_of(&addr("hotK")), p.root_of(&addr("dep2")));
        assert!(!p.contains(&addr("noise")));
        // Merged via the bytewise-smallest wallet of each exchange.
        let gathering: Vec<_> =
            p.merge_log().iter().filter(|e| e.tag == HeuristicTag::Gathering).collect();
        assert_eq!(gathering.len(), 2);
        assert_eq!(gathering[0].origin, "binance.com");
    }

    #[test]
    fn unknown_entity_in_an_inference_is_an_error() {
        let seeds = seeds(&[("hot1", "binance.com")]);
        let inferences = vec![DepositInference {
            address: addr("dep"),
            outcome: DepositOutcome::Inferred("ghost.example".to_string()),
            sweep_count: 1,
        }];
        let mut p = Partition::new();
        let err = build_exchange_clusters(&inferences, &seeds, &mut p).unwrap_err();
        assert_eq!(err, AccountError::UnknownEntity("ghost.example".to_string()));
    }
}
