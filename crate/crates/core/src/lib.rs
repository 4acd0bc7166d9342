//! Address clustering for cryptocurrency transaction graphs.
//!
//! The crate groups addresses that are likely controlled by the same party.
//! Two chain models are covered: UTXO chains, where multi-input spending and
//! one-time change outputs link addresses, and account chains, where deposit
//! addresses are recognized by the way they sweep funds into known exchange
//! hot wallets. Clusters can then be tagged from a seed list of labelled
//! addresses and summarized in a census table.
//!
//! A deterministic synthetic chain generator and a precision/recall evaluator
//! round out the crate so every inference path can be scored against ground
//! truth.

pub mod account;
pub mod eval;
pub mod ingest;
pub mod label;
pub mod model;
pub mod partition;
pub mod synth;
pub mod utxo;

#[cfg(feature = "testkit")]
pub mod testkit;

pub use account::{infer_deposit_addresses, DepositInference, DepositOutcome, ExchangeSeedSet};
pub use eval::{evaluate, EvalReport};
pub use label::{census, propagate_labels, CensusReport, LabeledCluster};
pub use model::{AccountTransfer, Address, Amount, ChainPosition, UtxoTransaction};
pub use partition::{Cluster, HeuristicTag, Partition};
pub use synth::{generate_account_chain, generate_utxo_chain, GenConfig, GroundTruth, UtxoChainGen};
pub use utxo::{apply_change_heuristic, cluster_common_spending, ChangeDecision, ChangeOutcome};
