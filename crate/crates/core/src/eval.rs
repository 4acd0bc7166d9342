//! Scoring heuristic output against generator ground truth.
//!
//! Pairwise clustering quality is computed from per-cluster entity tallies,
//! so it stays linear in the number of addresses; the quadratic
//! pair-enumeration definition it must agree with lives in the test kit.
//! Zero-denominator convention throughout: precision is 1.0 when nothing
//! was inferred, recall is 1.0 when there was nothing to find.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::account::{DepositInference, DepositOutcome};
use crate::model::Address;
use crate::synth::GroundTruth;
use crate::utxo::{ChangeDecision, ChangeOutcome};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("address {0} missing from ground truth")]
    MissingAddress(Address),
    #[error("transaction {0} missing from change truth")]
    MissingTxid(String),
    #[error("change truth for {0} names an output index but no address; supply the transaction stream to resolve it")]
    UnresolvedChange(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseMetrics {
    pub precision: f64,
    pub recall: f64,
    pub matching_pairs: u64,
    pub predicted_pairs: u64,
    pub truth_pairs: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChangeMetrics {
    pub precision: f64,
    pub recall: f64,
    /// Recall against the structurally-decidable subset, when the truth
    /// knows it (generated chains only). The conservative patterns abstain
    /// on single-input spends by design, so this is the denominator the
    /// heuristic can actually be held to.
    pub recall_over_eligible: Option<f64>,
    pub inferred: u64,
    pub correct: u64,
    pub with_change: u64,
    pub eligible: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DepositMetrics {
    pub precision: f64,
    pub recall: f64,
    pub inferred: u64,
    pub correct: u64,
    pub deposit_addresses: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub pairwise: PairwiseMetrics,
    pub change: Option<ChangeMetrics>,
    pub deposit: Option<DepositMetrics>,
}

fn ratio(numerator: u64, denominator: u64) -> f64 {
    if denominator == 0 {
        1.0
    } else {
        numerator as f64 / denominator as f64
    }
}

fn pairs(n: u64) -> u64 {
    if n < 2 {
        0
    } else {
        n * (n - 1) / 2
    }
}

/// Scores clusters (as member lists) and, when provided, change decisions
/// and deposit inferences against `truth`. Truth must cover every address
/// referenced; recall denominators for pairwise metrics are the truth
/// pairs among clustered addresses.
pub fn evaluate(
    clusters: &[Vec<Address>],
    decisions: Option<&[ChangeDecision]>,
    inferences: Option<&[DepositInference]>,
    truth: &GroundTruth,
) -> Result<EvalReport, EvalError> {
    Ok(EvalReport {
        pairwise: pairwise_metrics(clusters, truth)?,
        change: decisions.map(|d| change_metrics(d, truth)).transpose()?,
        deposit: inferences.map(|i| deposit_metrics(i, truth)).transpose()?,
    })
}

fn pairwise_metrics(clusters: &[Vec<Address>], truth: &GroundTruth) -> Result<PairwiseMetrics, EvalError> {
    let mut predicted_pairs = 0u64;
    let mut matching_pairs = 0u64;
    let mut entity_sizes: HashMap<&str, u64> = HashMap::new();
    for cluster in clusters {
        predicted_pairs += pairs(cluster.len() as u64);
        let mut tally: HashMap<&str, u64> = HashMap::new();
        for address in cluster {
            let entity = truth
                .entity_of(address)
                .ok_or_else(|| EvalError::MissingAddress(address.clone()))?;
            *tally.entry(entity).or_default() += 1;
            *entity_sizes.entry(entity).or_default() += 1;
        }
        matching_pairs += tally.values().map(|&n| pairs(n)).sum::<u64>();
    }
    let truth_pairs = entity_sizes.values().map(|&n| pairs(n)).sum();
    Ok(PairwiseMetrics {
        precision: ratio(matching_pairs, predicted_pairs),
        recall: ratio(matching_pairs, truth_pairs),
        matching_pairs,
        predicted_pairs,
        truth_pairs,
    })
}

fn change_metrics(decisions: &[ChangeDecision], truth: &GroundTruth) -> Result<ChangeMetrics, EvalError> {
    let mut rows = HashMap::with_capacity(truth.change.len());
    for row in &truth.change {
        if row.change_index.is_some() && row.change_address.is_none() {
            return Err(EvalError::UnresolvedChange(row.txid.clone()));
        }
        rows.insert(row.txid.as_str(), row);
    }
    let mut inferred = 0u64;
    let mut correct = 0u64;
    let mut correct_eligible = 0u64;
    for decision in decisions {
        let row = rows
            .get(decision.txid.as_str())
            .ok_or_else(|| EvalError::MissingTxid(decision.txid.clone()))?;
        if let ChangeOutcome::Inferred(address) = &decision.outcome {
            inferred += 1;
            if row.change_address.as_ref() == Some(address) {
                correct += 1;
                if row.eligible == Some(true) {
                    correct_eligible += 1;
                }
            }
        }
    }
    let with_change = truth.change.iter().filter(|r| r.change_index.is_some()).count() as u64;
    let eligible = truth
        .change
        .iter()
        .all(|r| r.eligible.is_some())
        .then(|| truth.change.iter().filter(|r| r.eligible == Some(true)).count() as u64);
    Ok(ChangeMetrics {
        precision: ratio(correct, inferred),
        recall: ratio(correct, with_change),
        recall_over_eligible: eligible.map(|e| ratio(correct_eligible, e)),
        inferred,
        correct,
        with_change,
        eligible,
    })
}

fn deposit_metrics(inferences: &[DepositInference], truth: &GroundTruth) -> Result<DepositMetrics, EvalError> {
    let deposits = truth.deposit_entities();
    let mut inferred = 0u64;
    let mut correct = 0u64;
    for inference in inferences {
        if truth.entity_of(&inference.address).is_none() {
            return Err(EvalError::MissingAddress(inference.address.clone()));
        }
        if let DepositOutcome::Inferred(entity) = &inference.outcome {
            inferred += 1;
            if deposits.get(&inference.address) == Some(&entity.as_str()) {
                correct += 1;
            }
        }
    }
    let deposit_addresses = deposits.len() as u64;
    Ok(DepositMetrics {
        precision: ratio(correct, inferred),
        recall: ratio(correct, deposit_addresses),
        inferred,
        correct,
        deposit_addresses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::account::RejectReason;
    use crate::synth::{ChangeTruth, Role};
    use crate::testkit::pairwise_by_enumeration;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn addr(s: &str) -> Address {
        Address::new(s).unwrap()
    }

    fn truth_of(assignments: &[(&str, &str)]) -> GroundTruth {
        let mut truth = GroundTruth::default();
        for (address, entity) in assignments {
            truth.record(addr(address), *entity, Role::EntityWallet);
        }
        truth
    }

    #[test]
    fn perfect_partition_scores_ones() {
        let truth = truth_of(&[("a", "X"), ("b", "X"), ("c", "Y")]);
        let clusters = vec![vec![addr("a"), addr("b")], vec![addr("c")]];
        let report = evaluate(&clusters, None, None, &truth).unwrap();
        assert_eq!(report.pairwise.precision, 1.0);
        assert_eq!(report.pairwise.recall, 1.0);
        assert_eq!(report.pairwise.matching_pairs, 1);
        assert!(report.change.is_none());
        assert!(report.deposit.is_none());
    }

    #[test]
    fn singletons_have_empty_precision_and_zero_recall() {
        let truth = truth_of(&[("a", "X"), ("b", "X")]);
        let clusters = vec![vec![addr("a")], vec![addr("b")]];
        let report = evaluate(&clusters, None, None, &truth).unwrap();
        assert_eq!(report.pairwise.predicted_pairs, 0);
        assert_eq!(report.pairwise.precision, 1.0);
        assert_eq!(report.pairwise.recall, 0.0);
        assert_eq!(report.pairwise.truth_pairs, 1);
    }

    #[test]
    fn mixed_clusters_score_by_hand_check() {
        // Entities: X={a,b,c,d}, Y={e}. Clusters: {a,b} and {c,d,e}.
        // Predicted pairs 1+3=4, matching 1+1=2, truth pairs 6.
        let truth = truth_of(&[("a", "X"), ("b", "X"), ("c", "X"), ("d", "X"), ("e", "Y")]);
        let clusters = vec![vec![addr("a"), addr("b")], vec![addr("c"), addr("d"), addr("e")]];
        let report = evaluate(&clusters, None, None, &truth).unwrap();
        assert_eq!(report.pairwise.predicted_pairs, 4);
        assert_eq!(report.pairwise.matching_pairs, 2);
        assert_eq!(report.pairwise.truth_pairs, 6);
        assert_eq!(report.pairwise.precision, 0.5);
        assert_eq!(report.pairwise.recall, 2.0 / 6.0);
    }

    #[test]
    fn unknown_address_is_an_error() {
        let truth = truth_of(&[("a", "X")]);
        let clusters = vec![vec![addr("a"), addr("mystery")]];
        let err = evaluate(&clusters, None, None, &truth).unwrap_err();
        assert!(matches!(err, EvalError::MissingAddress(a) if a.as_str() == "mystery"));
    }

    #[test]
    fn tallied_metrics_match_enumeration_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(97);
        for _ in 0..12 {
            let n = rng.gen_range(2..=500usize);
            let n_entities = rng.gen_range(1..=20usize);
            let n_clusters = rng.gen_range(1..=30usize);
            let mut truth = GroundTruth::default();
            let mut clusters: Vec<Vec<Address>> = vec![Vec::new(); n_clusters];
            let mut cluster_of = HashMap::new();
            let mut entity_of = HashMap::new();
            for i in 0..n {
                let name = format!("a{i:04}");
                let entity = format!("entity{:02}", rng.gen_range(0..n_entities));
                let cluster = rng.gen_range(0..n_clusters);
                truth.record(addr(&name), entity.clone(), Role::EntityWallet);
                clusters[cluster].push(addr(&name));
                cluster_of.insert(name.clone(), cluster as u64);
                entity_of.insert(name, entity);
            }
            let report = evaluate(&clusters, None, None, &truth).unwrap();
            let (precision, recall, matching, predicted, truth_pairs) =
                pairwise_by_enumeration(&cluster_of, &entity_of);
            assert_eq!(report.pairwise.matching_pairs, matching);
            assert_eq!(report.pairwise.predicted_pairs, predicted);
            assert_eq!(report.pairwise.truth_pairs, truth_pairs);
            assert_eq!(report.pairwise.precision, precision);
            assert_eq!(report.pairwise.recall, recall);
        }
    }

    fn change_row(txid: &str, change: Option<&str>, eligible: Option<bool>) -> ChangeTruth {
        ChangeTruth {
            txid: txid.to_string(),
            change_index: change.map(|_| 1),
            change_address: change.map(addr),
            eligible,
        }
    }

    #[test]
    fn change_metrics_count_address_exact_matches() {
        let mut truth = truth_of(&[("a", "X")]);
        truth.change = vec![
            change_row("t1", Some("c1"), Some(true)),
            change_row("t2", Some("c2"), Some(false)),
            change_row("t3", Some("c3"), Some(false)),
            change_row("t4", None, Some(false)),
        ];
        let decisions = vec![
            ChangeDecision { txid: "t1".to_string(), outcome: ChangeOutcome::Inferred(addr("c1")) },
            ChangeDecision { txid: "t2".to_string(), outcome: ChangeOutcome::Inferred(addr("wrong")) },
            ChangeDecision {
                txid: "t3".to_string(),
                outcome: ChangeOutcome::Abstained(crate::utxo::AbstainReason::SingleInput),
            },
            ChangeDecision {
                txid: "t4".to_string(),
                outcome: ChangeOutcome::Abstained(crate::utxo::AbstainReason::SingleOutput),
            },
        ];
        let report = evaluate(&[], Some(&decisions), None, &truth).unwrap();
        let change = report.change.unwrap();
        assert_eq!(change.inferred, 2);
        assert_eq!(change.correct, 1);
        assert_eq!(change.with_change, 3);
        assert_eq!(change.precision, 0.5);
        assert_eq!(change.recall, 1.0 / 3.0);
        assert_eq!(change.eligible, Some(1));
        assert_eq!(change.recall_over_eligible, Some(1.0));
    }

    #[test]
    fn eligibility_unknown_drops_the_eligible_recall() {
        let mut truth = truth_of(&[("a", "X")]);
        truth.change = vec![change_row("t1", Some("c1"), None)];
        let decisions = vec![ChangeDecision {
            txid: "t1".to_string(),
            outcome: ChangeOutcome::Inferred(addr("c1")),
        }];
        let change = evaluate(&[], Some(&decisions), None, &truth).unwrap().change.unwrap();
        assert_eq!(change.recall_over_eligible, None);
        assert_eq!(change.eligible, None);
        assert_eq!(change.precision, 1.0);
    }

    #[test]
    fn empty_decision_list_uses_the_convention() {
        let mut truth = truth_of(&[("a", "X")]);
        truth.change = vec![change_row("t1", None, Some(false))];
        let change = evaluate(&[], Some(&[]), None, &truth).unwrap().change.unwrap();
        assert_eq!(change.precision, 1.0);
        assert_eq!(change.recall, 1.0);
        assert_eq!(change.recall_over_eligible, Some(1.0));
    }

    #[test]
    fn decision_for_unknown_transaction_is_an_error() {
        let truth = truth_of(&[("a", "X")]);
        let decisions = vec![ChangeDecision {
            txid: "ghost".to_string(),
            outcome: ChangeOutcome::Inferred(addr("c1")),
        }];
        let err = evaluate(&[], Some(&decisions), None, &truth).unwrap_err();
        assert!(matches!(err, EvalError::MissingTxid(t) if t == "ghost"));
    }

    #[test]
    fn unresolved_change_truth_is_an_error() {
        let mut truth = truth_of(&[("a", "X")]);
        truth.change = vec![ChangeTruth {
            txid: "t1".to_string(),
            change_index: Some(1),
            change_address: None,
            eligible: None,
        }];
        let err = evaluate(&[], Some(&[]), None, &truth).unwrap_err();
        assert!(matches!(err, EvalError::UnresolvedChange(t) if t == "t1"));
    }

    #[test]
    fn deposit_metrics_require_entity_and_address_match() {
        let mut truth = GroundTruth::default();
        truth.record(addr("d1"), "ex1", Role::DepositAddress);
        truth.record(addr("d2"), "ex1", Role::DepositAddress);
        truth.record(addr("d3"), "ex2", Role::DepositAddress);
        truth.record(addr("w1"), "noise", Role::NoiseWallet);
        let inferences = vec![
            DepositInference {
                address: addr("d1"),
                outcome: DepositOutcome::Inferred("ex1".to_string()),
                sweep_count: 2,
            },
            DepositInference {
                address: addr("d2"),
                outcome: DepositOutcome::Inferred("ex2".to_string()),
                sweep_count: 1,
            },
            DepositInference {
                address: addr("w1"),
                outcome: DepositOutcome::Rejected(RejectReason::SendsElsewhere),
                sweep_count: 0,
            },
        ];
        let deposit = evaluate(&[], None, Some(&inferences), &truth).unwrap().deposit.unwrap();
        assert_eq!(deposit.inferred, 2);
        assert_eq!(deposit.correct, 1);
        assert_eq!(deposit.deposit_addresses, 3);
        assert_eq!(deposit.precision, 0.5);
        assert_eq!(deposit.recall, 1.0 / 3.0);

        let ghost = vec![DepositInference {
            address: addr("ghost"),
            outcome: DepositOutcome::Rejected(RejectReason::NoOutgoing),
            sweep_count: 0,
        }];
        let err = evaluate(&[], None, Some(&ghost), &truth).unwrap_err();
        assert!(matches!(err, EvalError::MissingAddress(_)));
    }

    #[test]
    fn report_serializes_with_stable_field_order() {
        let truth = truth_of(&[("a", "X"), ("b", "X")]);
        let clusters = vec![vec![addr("a"), addr("b")]];
        let report = evaluate(&clusters, None, None, &truth).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        assert_eq!(
            json,
            "{\"pairwise\":{\"precision\":1.0,\"recall\":1.0,\"matching_pairs\":1,\
             \"predicted_pairs\":1,\"truth_pairs\":1},\"change\":null,\"deposit\":null}"
        );
    }
}
