//! Deterministic synthetic chains with complete ground truth.
//!
//! The generator simulates entities exchanging payments so that every
//! structural assumption the heuristics rely on is true by construction,
//! then lets two adversarial knobs break those assumptions at a controlled
//! rate. All randomness comes from explicitly seeded ChaCha8 streams, so a
//! config reproduces the same chain byte for byte on any platform.
//!
//! Three independent streams keep runs comparable across knob settings: the
//! structure stream decides who pays whom with which coins, while the
//! round-change and address-reuse streams only decide whether a given
//! change output gets degraded. Two configs differing only in an
//! adversarial rate therefore produce transaction-for-transaction
//! comparable chains.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::label::{Category, SeedLabel};
use crate::model::{pow10, AccountTransfer, Address, Amount, ChainPosition, UtxoTransaction, MAX_DECIMALS};

const ROUND_STREAM_SALT: u64 = 0x726f756e64;
const REUSE_STREAM_SALT: u64 = 0x7265757365;

/// Probability that a change-bearing transaction deliberately gathers
/// several coins instead of spending the minimum.
const CONSOLIDATE_RATE: f64 = 0.7;
/// Probability that a payment goes to a never-seen counterparty address.
const FRESH_PAYEE_RATE: f64 = 0.15;
/// Whole units granted to every bootstrap wallet on top of the fee budget.
const BOOTSTRAP_UNITS: u128 = 25;
/// Payment size range, in whole units.
const PAYMENT_UNITS: std::ops::RangeInclusive<u64> = 1..=40;
/// Transactions per block.
const BLOCK_FILL: std::ops::RangeInclusive<u64> = 1..=5;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid generator config: {0}")]
    Config(String),
    #[error("step {step}: every entity is out of funds, need {needed} base units")]
    BalanceExhausted { step: u64, needed: u128 },
}

/// Generator parameters. Accepted programmatically, as CLI flags, and as a
/// flat key=value file whose keys are exactly these field names.
#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub rng_seed: u64,
    pub n_entities: u64,
    pub wallets_per_entity: u64,
    pub n_transactions: u64,
    pub change_rate: f64,
    pub payment_round_decimals: u32,
    pub change_min_fractional_digits: u32,
    pub adversarial_round_change_rate: f64,
    pub address_reuse_rate: f64,
    pub decimals: u32,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            rng_seed: 0,
            n_entities: 4,
            wallets_per_entity: 3,
            n_transactions: 200,
            change_rate: 0.8,
            payment_round_decimals: 2,
            change_min_fractional_digits: 5,
            adversarial_round_change_rate: 0.0,
            address_reuse_rate: 0.0,
            decimals: 8,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        fn probability(name: &str, value: f64) -> Result<(), SynthError> {
            if !(0.0..=1.0).contains(&value) {
                return Err(SynthError::Config(format!("{name} must be in [0, 1], got {value}")));
            }
            Ok(())
        }
        if self.n_entities == 0 {
            return Err(SynthError::Config("n_entities must be at least 1".to_string()));
        }
        if self.wallets_per_entity == 0 {
            return Err(SynthError::Config("wallets_per_entity must be at least 1".to_string()));
        }
        probability("change_rate", self.change_rate)?;
        probability("adversarial_round_change_rate", self.adversarial_round_change_rate)?;
        probability("address_reuse_rate", self.address_reuse_rate)?;
        if !(4..=MAX_DECIMALS).contains(&self.decimals) {
            return Err(SynthError::Config(format!(
                "decimals must be in [4, {MAX_DECIMALS}], got {}",
                self.decimals
            )));
        }
        if self.payment_round_decimals > self.decimals {
            return Err(SynthError::Config(format!(
                "payment_round_decimals ({}) exceeds decimals ({})",
                self.payment_round_decimals, self.decimals
            )));
        }
        if self.change_min_fractional_digits == 0 || self.change_min_fractional_digits > self.decimals {
            return Err(SynthError::Config(format!(
                "change_min_fractional_digits must be in [1, {}], got {}",
                self.decimals, self.change_min_fractional_digits
            )));
        }
        Ok(())
    }

    /// Sets one field by its name. Later assignments win, so CLI flags can
    /// override a config file by being applied afterwards.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), SynthError> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, SynthError>
        where
            T::Err: fmt::Display,
        {
            value
                .parse()
                .map_err(|e| SynthError::Config(format!("{key}: bad value {value:?}: {e}")))
        }
        match key {
            "rng_seed" => self.rng_seed = parse(key, value)?,
            "n_entities" => self.n_entities = parse(key, value)?,
            "wallets_per_entity" => self.wallets_per_entity = parse(key, value)?,
            "n_transactions" => self.n_transactions = parse(key, value)?,
            "change_rate" => self.change_rate = parse(key, value)?,
            "payment_round_decimals" => self.payment_round_decimals = parse(key, value)?,
            "change_min_fractional_digits" => self.change_min_fractional_digits = parse(key, value)?,
            "adversarial_round_change_rate" => self.adversarial_round_change_rate = parse(key, value)?,
            "address_reuse_rate" => self.address_reuse_rate = parse(key, value)?,
            "decimals" => self.decimals = parse(key, value)?,
            _ => return Err(SynthError::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Parses a flat key=value file. Blank lines and `#` comments are
    /// skipped; unknown keys and malformed values are errors naming the
    /// line. Starts from defaults, validates the combined result.
    pub fn from_key_values(text: &str) -> Result<GenConfig, SynthError> {
        let mut cfg = GenConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                SynthError::Config(format!("line {}: expected key=value, found {raw:?}", idx + 1))
            })?;
            cfg.set(key.trim(), value.trim()).map_err(|e| match e {
                SynthError::Config(msg) => SynthError::Config(format!("line {}: {msg}", idx + 1)),
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// What an address is for, from the generator's point of view.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    EntityWallet,
    ChangeAddress,
    CustomerWallet,
    DepositAddress,
    HotWallet,
    NoiseWallet,
}

impl Role {
    pub fn as_str(&self) -> &'static str {
        match self {
            Role::EntityWallet => "entity_wallet",
            Role::ChangeAddress => "change_address",
            Role::CustomerWallet => "customer_wallet",
            Role::DepositAddress => "deposit_address",
            Role::HotWallet => "hot_wallet",
            Role::NoiseWallet => "noise_wallet",
        }
    }

    #[allow(clippy::should_implement_trait)] // fallible wire-token lookup, not a parse
    pub fn from_str(text: &str) -> Option<Role> {
        Some(match text {
            "entity_wallet" => Role::EntityWallet,
            "change_address" => Role::ChangeAddress,
            "customer_wallet" => Role::CustomerWallet,
            "deposit_address" => Role::DepositAddress,
            "hot_wallet" => Role::HotWallet,
            "noise_wallet" => Role::NoiseWallet,
            _ => return None,
        })
    }
}

/// Per-transaction change truth. `change_address` and `eligible` are
/// in-memory conveniences; only txid and index go to disk. `eligible`
/// records whether the conservative change patterns structurally select
/// the true change output, which bounds achievable recall.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChangeTruth {
    pub txid: String,
    pub change_index: Option<u64>,
    pub change_address: Option<Address>,
    pub eligible: Option<bool>,
}

/// Everything the generator knows that the heuristics must rediscover.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundTruth {
    entities: BTreeMap<Address, String>,
    roles: BTreeMap<Address, Role>,
    pub change: Vec<ChangeTruth>,
}

impl GroundTruth {
    pub fn record(&mut self, address: Address, entity: impl Into<String>, role: Role) {
        let entity = entity.into();
        if let Some(existing) = self.entities.get(&address) {
            assert_eq!(existing, &entity, "{address} recorded under two entities");
            return;
        }
        self.entities.insert(address.clone(), entity);
        self.roles.insert(address, role);
    }

    pub fn entity_of(&self, address: &Address) -> Option<&str> {
        self.entities.get(address).map(String::as_str)
    }

    pub fn role_of(&self, address: &Address) -> Option<Role> {
        self.roles.get(address).copied()
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    /// Address rows in bytewise address order, ready for serialization.
    pub fn address_rows(&self) -> impl Iterator<Item = (&Address, &str, &str)> {
        self.entities
            .iter()
            .map(|(address, entity)| (address, entity.as_str(), self.roles[address].as_str()))
    }

    /// Deposit address to owning exchange, per the generator.
    pub fn deposit_entities(&self) -> BTreeMap<&Address, &str> {
        self.roles
            .iter()
            .filter(|(_, role)| **role == Role::DepositAddress)
            .map(|(address, _)| (address, self.entities[address].as_str()))
            .collect()
    }

    /// Rebuilds truth from wire rows (change eligibility unknown).
    pub fn from_rows(
        address_rows: Vec<(Address, String, String)>,
        change_rows: Vec<(String, Option<u64>, Option<Address>)>,
    ) -> Result<GroundTruth, SynthError> {
        let mut truth = GroundTruth::default();
        for (address, entity, role) in address_rows {
            let role = Role::from_str(&role)
                .ok_or_else(|| SynthError::Config(format!("unknown role {role:?} for {address}")))?;
            truth.record(address, entity, role);
        }
        truth.change = change_rows
            .into_iter()
            .map(|(txid, change_index, change_address)| ChangeTruth {
                txid,
                change_index,
                change_address,
                eligible: None,
            })
            .collect();
        Ok(truth)
    }
}

/// Carves a value with exactly `digits` fractional digits out of `raw`,
/// never exceeding it. The digit at the last fractional place is `lead`
/// (1..=9), everything below is zero. Requires raw >= 2 * 10^(decimals-digits+1).
fn carve_amount(raw: u128, decimals: u32, digits: u32, lead: u128) -> u128 {
    debug_assert!((1..=9).contains(&lead));
    debug_assert!(digits >= 1 && digits <= decimals);
    let unit = pow10(decimals - digits);
    let coarse = unit * 10;
    debug_assert!(raw >= 2 * coarse);
    let mut carved = raw / coarse * coarse + lead * unit;
    if carved > raw {
        carved -= coarse;
    }
    debug_assert!(carved > 0 && carved <= raw);
    carved
}

struct EntityState {
    /// Unspent coins: (holding address, value in base units).
    pool: Vec<(Address, u128)>,
    /// Addresses the entity has received funds on before; payee-reuse pool.
    receive_addresses: Vec<Address>,
    /// Past change addresses; the address-reuse knob draws from here.
    change_addresses: Vec<Address>,
}

/// Streaming UTXO chain generator. Yields bootstrap coinbases first, then
/// `n_transactions` payments. Ground truth accumulates as transactions are
/// emitted; take it with [`UtxoChainGen::into_truth`] once the iterator is
/// exhausted.
pub struct UtxoChainGen {
    cfg: GenConfig,
    rng: ChaCha8Rng,
    round_rng: ChaCha8Rng,
    reuse_rng: ChaCha8Rng,
    fee: u128,
    payment_quantum: u128,
    /// Selection overshoot reserved for carving change; sized for the
    /// coarsest digit count either knob can request.
    margin: u128,
    entities: Vec<EntityState>,
    truth: GroundTruth,
    pending: VecDeque<UtxoTransaction>,
    next_address_serial: u64,
    emitted: u64,
    block: u64,
    index: u64,
    left_in_block: u64,
    failed: bool,
}

impl UtxoChainGen {
    pub fn new(cfg: &GenConfig) -> Result<Self, SynthError> {
        cfg.validate()?;
        if cfg.n_transactions > 0 && cfg.n_entities < 2 {
            return Err(SynthError::Config(
                "payments need a counterparty: n_entities must be at least 2 when n_transactions > 0".to_string(),
            ));
        }
        let decimals = cfg.decimals;
        let fee = pow10(decimals - 4);
        let payment_quantum = pow10(decimals - cfg.payment_round_decimals);
        let coarsest_digits = cfg.change_min_fractional_digits.min(3);
        let margin = 3 * pow10(decimals + 1 - coarsest_digits);

        let mut gen = UtxoChainGen {
            cfg: cfg.clone(),
            rng: ChaCha8Rng::seed_from_u64(cfg.rng_seed),
            round_rng: ChaCha8Rng::seed_from_u64(cfg.rng_seed ^ ROUND_STREAM_SALT),
            reuse_rng: ChaCha8Rng::seed_from_u64(cfg.rng_seed ^ REUSE_STREAM_SALT),
            fee,
            payment_quantum,
            margin,
            entities: Vec::new(),
            truth: GroundTruth::default(),
            pending: VecDeque::new(),
            next_address_serial: 0,
            emitted: 0,
            block: cfg.n_entities.saturating_sub(1),
            index: 0,
            left_in_block: 0,
            failed: false,
        };
        if cfg.n_transactions > 0 {
            gen.bootstrap();
        }
        Ok(gen)
    }

    /// One coinbase per entity funds its wallets. The grant covers the
    /// nominal balance plus the whole run's worst-case fee burn so honest
    /// configs cannot exhaust mid-run.
    fn bootstrap(&mut self) {
        let cfg = self.cfg.clone();
        let total_wallets = cfg.n_entities as u128 * cfg.wallets_per_entity as u128;
        let burn_bound = self.fee + self.payment_quantum + self.margin;
        let headroom = cfg.n_transactions as u128 * burn_bound / total_wallets + 1;
        let grant = BOOTSTRAP_UNITS * pow10(cfg.decimals) + headroom;
        for entity in 0..cfg.n_entities {
            let mut state = EntityState {
                pool: Vec::new(),
                receive_addresses: Vec::new(),
                change_addresses: Vec::new(),
            };
            let mut outputs = Vec::new();
            for _ in 0..cfg.wallets_per_entity {
                let address = self.fresh_address(entity);
                self.truth.record(address.clone(), entity_name(entity), Role::EntityWallet);
                state.pool.push((address.clone(), grant));
                state.receive_addresses.push(address.clone());
                outputs.push((address, amount(grant, cfg.decimals)));
            }
            let txid = format!("cb{entity:02}");
            let tx = UtxoTransaction::new(txid.clone(), ChainPosition::new(entity, 0), true, vec![], outputs)
                .expect("bootstrap coinbase is structurally valid");
            self.truth.change.push(ChangeTruth {
                txid,
                change_index: None,
                change_address: None,
                eligible: Some(false),
            });
            self.entities.push(state);
            self.pending.push_back(tx);
        }
    }

    fn fresh_address(&mut self, entity: u64) -> Address {
        let serial = self.next_address_serial;
        self.next_address_serial += 1;
        Address::new(format!("e{entity:02}-{serial:07}")).expect("generated addresses are well-formed")
    }

    fn advance_position(&mut self) -> ChainPosition {
        if self.left_in_block == 0 {
            self.block += 1;
            self.index = 0;
            self.left_in_block = self.rng.gen_range(BLOCK_FILL);
        }
        let position = ChainPosition::new(self.block, self.index);
        self.index += 1;
        self.left_in_block -= 1;
        position
    }

    /// Entities able to fund a change-bearing spend of `need`, and those
    /// holding a single coin big enough for a sweep payment.
    fn afford_total(&self, need: u128) -> Vec<usize> {
        self.entities
            .iter()
            .enumerate()
            .filter(|(_, e)| e.pool.iter().map(|(_, v)| v).sum::<u128>() >= need)
            .map(|(i, _)| i)
            .collect()
    }

    fn afford_single(&self, need: u128) -> Vec<usize> {
        self.entities
            .iter()
            .enumerate()
            .filter(|(_, e)| e.pool.iter().any(|(_, v)| *v >= need))
            .map(|(i, _)| i)
            .collect()
    }

    fn draw_counterparty(&mut self, sender: usize) -> usize {
        let other = self.rng.gen_range(0..self.entities.len() - 1);
        if other >= sender {
            other + 1
        } else {
            other
        }
    }

    /// Payee address on the counterparty side: usually a previously used
    /// address (so the one-new-output pattern holds), occasionally fresh.
    fn draw_payee(&mut self, counterparty: usize) -> (Address, bool) {
        let fresh = self.rng.gen::<f64>() < FRESH_PAYEE_RATE || self.entities[counterparty].receive_addresses.is_empty();
        if fresh {
            let address = self.fresh_address(counterparty as u64);
            self.truth
                .record(address.clone(), entity_name(counterparty as u64), Role::EntityWallet);
            self.entities[counterparty].receive_addresses.push(address.clone());
            (address, true)
        } else {
            let pool = &self.entities[counterparty].receive_addresses;
            let pick = self.rng.gen_range(0..pool.len());
            (pool[pick].clone(), false)
        }
    }

    fn next_payment(&mut self, step: u64) -> Result<UtxoTransaction, SynthError> {
        let cfg = self.cfg.clone();
        let decimals = cfg.decimals;
        let position = self.advance_position();
        let has_change = self.rng.gen::<f64>() < cfg.change_rate;

        // The degradation streams advance for every change-bearing
        // transaction no matter what the rates are, so two configs that
        // differ only in a rate see identical structure.
        let mut round_flip = false;
        let mut adversarial_digits = 0u32;
        let mut adversarial_lead = 0u128;
        let mut reuse_flip = false;
        let mut reuse_pick = 0u64;
        if has_change {
            round_flip = self.round_rng.gen::<f64>() < cfg.adversarial_round_change_rate;
            adversarial_digits = self.round_rng.gen_range(3..=4);
            adversarial_lead = self.round_rng.gen_range(1..=9);
            reuse_flip = self.reuse_rng.gen::<f64>() < cfg.address_reuse_rate;
            reuse_pick = self.reuse_rng.gen::<u64>();
        }

        let txid = format!("t{step:07}");
        if has_change {
            let payment = self.draw_payment_value();
            let need = payment + self.fee + self.margin;
            let candidates = self.afford_total(need);
            if candidates.is_empty() {
                return Err(SynthError::BalanceExhausted { step, needed: need });
            }
            let sender = candidates[self.rng.gen_range(0..candidates.len())];
            let counterparty = self.draw_counterparty(sender);
            let (payee, payee_fresh) = self.draw_payee(counterparty);

            let inputs = self.select_inputs(sender, need);
            let total_in: u128 = inputs.iter().map(|(_, v)| v).sum();
            let raw_change = total_in - payment - self.fee;

            let spread = (cfg.change_min_fractional_digits + 2).min(decimals);
            let structural_digits = self.rng.gen_range(cfg.change_min_fractional_digits..=spread);
            let structural_lead = self.rng.gen_range(1..=9u128);
            // The pool keeps the structural value even when the emitted
            // output is degraded: internal accounting must not see the
            // knob, or coin selection would drift and two runs differing
            // only in a rate would stop being transaction-aligned. The
            // record format carries no outpoint references, so nothing
            // consumes the emitted value downstream.
            let structural_value = carve_amount(raw_change, decimals, structural_digits, structural_lead);
            let emitted_value = if round_flip {
                carve_amount(raw_change, decimals, adversarial_digits, adversarial_lead)
            } else {
                structural_value
            };

            let (change_address, change_fresh) =
                if reuse_flip && !self.entities[sender].change_addresses.is_empty() {
                    let pool = &self.entities[sender].change_addresses;
                    (pool[reuse_pick as usize % pool.len()].clone(), false)
                } else {
                    let address = self.fresh_address(sender as u64);
                    self.truth
                        .record(address.clone(), entity_name(sender as u64), Role::ChangeAddress);
                    self.entities[sender].change_addresses.push(address.clone());
                    (address, true)
                };

            let change_index = self.rng.gen_range(0..2u64);
            let mut outputs = vec![(payee.clone(), amount(payment, decimals))];
            outputs.insert(change_index as usize, (change_address.clone(), amount(emitted_value, decimals)));

            self.entities[counterparty].pool.push((payee.clone(), payment));
            self.entities[sender].pool.push((change_address.clone(), structural_value));

            let input_addresses: HashSet<&Address> = inputs.iter().map(|(a, _)| a).collect();
            let distinct_inputs = input_addresses.len();
            let overlap = input_addresses.contains(&payee) || input_addresses.contains(&change_address);
            let non_round = amount(emitted_value, decimals).fractional_digits() > 4;
            let eligible =
                distinct_inputs >= 2 && change_fresh && !payee_fresh && non_round && !overlap;

            self.truth.change.push(ChangeTruth {
                txid: txid.clone(),
                change_index: Some(change_index),
                change_address: Some(change_address),
                eligible: Some(eligible),
            });
            let inputs = inputs
                .into_iter()
                .map(|(a, v)| (a, amount(v, decimals)))
                .collect();
            Ok(UtxoTransaction::new(txid, position, false, inputs, outputs)
                .expect("generated payment is structurally valid"))
        } else {
            // Sweep shape: one coin in, one rounded payment out, no change.
            let need = self.fee + self.payment_quantum;
            let candidates = self.afford_single(need);
            if candidates.is_empty() {
                return Err(SynthError::BalanceExhausted { step, needed: need });
            }
            let sender = candidates[self.rng.gen_range(0..candidates.len())];
            let counterparty = self.draw_counterparty(sender);
            let (payee, _) = self.draw_payee(counterparty);

            let qualifying: Vec<usize> = self.entities[sender]
                .pool
                .iter()
                .enumerate()
                .filter(|(_, (_, v))| *v >= need)
                .map(|(i, _)| i)
                .collect();
            let pick = qualifying[self.rng.gen_range(0..qualifying.len())];
            let (address, value) = self.entities[sender].pool.swap_remove(pick);
            let payment = (value - self.fee) / self.payment_quantum * self.payment_quantum;

            self.entities[counterparty].pool.push((payee.clone(), payment));
            self.truth.change.push(ChangeTruth {
                txid: txid.clone(),
                change_index: None,
                change_address: None,
                eligible: Some(false),
            });
            Ok(UtxoTransaction::new(
                txid,
                position,
                false,
                vec![(address, amount(value, decimals))],
                vec![(payee, amount(payment, decimals))],
            )
            .expect("generated sweep is structurally valid"))
        }
    }

    fn draw_payment_value(&mut self) -> u128 {
        let cfg = &self.cfg;
        let units = self.rng.gen_range(PAYMENT_UNITS) as u128 * pow10(cfg.decimals);
        let fraction = if cfg.payment_round_decimals == 0 {
            0
        } else {
            self.rng.gen_range(0..pow10(cfg.payment_round_decimals))
                * pow10(cfg.decimals - cfg.payment_round_decimals)
        };
        units + fraction
    }

    /// Removes coins from the sender pool until they cover `need`. In
    /// consolidate mode at least two coins are gathered, which is what
    /// makes multi-input spends (and thus common-spending evidence) common.
    fn select_inputs(&mut self, sender: usize, need: u128) -> Vec<(Address, u128)> {
        let consolidate = self.rng.gen::<f64>() < CONSOLIDATE_RATE;
        let pool = &mut self.entities[sender].pool;
        let mut picked: Vec<(Address, u128)> = Vec::new();
        let mut total = 0u128;
        if consolidate && pool.len() >= 2 {
            let count = self.rng.gen_range(2..=4.min(pool.len()));
            for _ in 0..count {
                let idx = self.rng.gen_range(0..pool.len());
                let coin = pool.swap_remove(idx);
                total += coin.1;
                picked.push(coin);
            }
        }
        while total < need {
            let idx = self.rng.gen_range(0..pool.len());
            let coin = pool.swap_remove(idx);
            total += coin.1;
            picked.push(coin);
        }
        picked
    }

    /// Ground truth for everything emitted so far. Call after exhausting
    /// the iterator for the whole chain's truth.
    pub fn into_truth(self) -> GroundTruth {
        self.truth
    }
}

impl Iterator for UtxoChainGen {
    type Item = Result<UtxoTransaction, SynthError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        if let Some(tx) = self.pending.pop_front() {
            return Some(Ok(tx));
        }
        if self.emitted == self.cfg.n_transactions {
            return None;
        }
        let step = self.emitted;
        match self.next_payment(step) {
            Ok(tx) => {
                self.emitted += 1;
                Some(Ok(tx))
            }
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

fn entity_name(entity: u64) -> String {
    format!("entity{entity:02}")
}

fn amount(base_units: u128, decimals: u32) -> Amount {
    Amount::from_base_units(base_units, decimals).expect("generator decimals are validated")
}

pub fn generate_utxo_chain(cfg: &GenConfig) -> Result<(Vec<UtxoTransaction>, GroundTruth), SynthError> {
    let mut gen = UtxoChainGen::new(cfg)?;
    let mut txs = Vec::new();
    for tx in &mut gen {
        txs.push(tx?);
    }
    Ok((txs, gen.into_truth()))
}

/// Fixed deposit-sweep fee: 0.00042 whole units at any supported scale.
fn sweep_fee(decimals: u32) -> u128 {
    42 * pow10(decimals - 5)
}

/// Account-model chain: per exchange one hot wallet (emitted as a seed) and
/// `wallets_per_entity` customers, each funding a dedicated deposit address
/// that sweeps to the hot wallet. `n_transactions` noise transfers and one
/// hot-wallet withdrawal per exchange are added when n_transactions > 0.
pub fn generate_account_chain(
    cfg: &GenConfig,
) -> Result<(Vec<AccountTransfer>, GroundTruth, Vec<SeedLabel>), SynthError> {
    cfg.validate()?;
    if cfg.decimals < 5 {
        return Err(SynthError::Config(
            "account chains need decimals >= 5 for the sweep fee quantum".to_string(),
        ));
    }
    let decimals = cfg.decimals;
    let fee = sweep_fee(decimals);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut truth = GroundTruth::default();
    let mut transfers = Vec::new();
    let mut seeds = Vec::new();
    let mut hot_wallets = Vec::new();
    let mut first_customers = Vec::new();
    let mut block = 0u64;
    let mut serial = 0u64;

    let mut push = |transfers: &mut Vec<AccountTransfer>, from: &Address, to: &Address, value: u128| {
        let hash = format!("a{serial:06}");
        serial += 1;
        let position = ChainPosition::new(block, 0);
        block += 1;
        transfers.push(AccountTransfer {
            hash,
            position,
            from: from.clone(),
            to: to.clone(),
            value: amount(value, decimals),
            asset: "SYN".to_string(),
        });
    };

    for exchange in 0..cfg.n_entities {
        let name = format!("exchange{exchange:02}.example");
        let hot = Address::new(format!("e{exchange:02}-hot")).expect("well-formed");
        truth.record(hot.clone(), name.clone(), Role::HotWallet);
        seeds.push(SeedLabel {
            address: hot.clone(),
            name: name.clone(),
            category: Category::Exchange,
            source: "synthetic".to_string(),
        });
        hot_wallets.push(hot);
        for customer in 0..cfg.wallets_per_entity {
            let wallet = Address::new(format!("cust-{exchange:02}-{customer:04}")).expect("well-formed");
            let deposit = Address::new(format!("e{exchange:02}-dep{customer:04}")).expect("well-formed");
            truth.record(wallet.clone(), wallet.as_str(), Role::CustomerWallet);
            truth.record(deposit.clone(), name.clone(), Role::DepositAddress);
            if customer == 0 {
                first_customers.push(wallet.clone());
            }
            let units = rng.gen_range(1..=200u64) as u128 * pow10(decimals);
            let fraction = if cfg.payment_round_decimals == 0 {
                0
            } else {
                rng.gen_range(0..pow10(cfg.payment_round_decimals))
                    * pow10(decimals - cfg.payment_round_decimals)
            };
            let value = units + fraction;
            push(&mut transfers, &wallet, &deposit, value);
            push(&mut transfers, &deposit, &hot_wallets[exchange as usize], value - fee);
        }
    }

    if cfg.n_transactions > 0 {
        let noise_count = 2 * cfg.n_entities;
        let noise: Vec<Address> = (0..noise_count)
            .map(|i| Address::new(format!("noise-{i:03}")).expect("well-formed"))
            .collect();
        for wallet in &noise {
            truth.record(wallet.clone(), wallet.as_str(), Role::NoiseWallet);
        }
        for _ in 0..cfg.n_transactions {
            let from = rng.gen_range(0..noise.len());
            let to = {
                let other = rng.gen_range(0..noise.len() - 1);
                if other >= from {
                    other + 1
                } else {
                    other
                }
            };
            let value = rng.gen_range(1..=50_000u64) as u128 * pow10(decimals - 3);
            push(&mut transfers, &noise[from], &noise[to], value);
        }
        for exchange in 0..cfg.n_entities as usize {
            let value = 5 * pow10(decimals - 1);
            push(&mut transfers, &hot_wallets[exchange], &first_customers[exchange], value);
        }
    }

    Ok((transfers, truth, seeds))
}
