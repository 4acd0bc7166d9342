//! Command-line pipeline: generate synthetic chains, cluster addresses,
//! attach labels, and score results against ground truth.
//!
//! Every command reads and writes files; nothing goes to standard output
//! except the census table and diagnostics. Each output file gets a
//! `.manifest.json` sibling recording the command, its configuration,
//! input digests, and tool version. Exit codes: 0 success, 1 input or
//! validation error (the message names the file and line), 2 usage error.

mod manifest;

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use chain_cluster::account::build_exchange_clusters;
use chain_cluster::ingest::{self, TransferReader, UtxoReader};
use chain_cluster::model::MAX_DECIMALS;
use chain_cluster::synth::GroundTruth;
use chain_cluster::utxo::{join_common_inputs, ChangeScan};
use chain_cluster::{
    census, evaluate, generate_account_chain, infer_deposit_addresses, propagate_labels,
    AccountTransfer, Address, ExchangeSeedSet, GenConfig, Partition, UtxoChainGen,
};

use manifest::ManifestBuilder;

#[derive(Parser)]
#[command(
    name = "chain-cluster",
    version,
    about = "Address clustering over cryptocurrency transaction graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic UTXO chain plus ground truth files.
    SynthUtxo(SynthUtxoArgs),
    /// Generate a synthetic account-model transfer history plus ground truth.
    SynthAccount(SynthAccountArgs),
    /// Cluster UTXO transactions: common spending, then change inference.
    ClusterUtxo(ClusterUtxoArgs),
    /// Infer exchange deposit addresses and cluster them with their exchanges.
    ClusterAccount(ClusterAccountArgs),
    /// Propagate seed labels onto clusters.
    Label(LabelArgs),
    /// Print a census of the labeled population; optionally write it as CSV.
    Census(CensusArgs),
    /// Score clusters, change decisions, and deposit inferences against truth.
    Eval(EvalArgs),
}

/// Generator knobs. Precedence: built-in defaults, then --config, then flags.
#[derive(Args)]
struct GenFlags {
    /// Flat key=value config file (generator keys; `#` comments allowed).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Generator RNG seed.
    #[arg(long, alias = "rng-seed")]
    seed: Option<u64>,
    /// Number of entities (exchanges, for account chains).
    #[arg(long)]
    entities: Option<u64>,
    /// Wallets per entity (customers per exchange, for account chains).
    #[arg(long)]
    wallets_per_entity: Option<u64>,
    /// Payment count (noise transfer count, for account chains).
    #[arg(long)]
    transactions: Option<u64>,
    /// Probability that a payment carries a change output.
    #[arg(long)]
    change_rate: Option<f64>,
    /// Payments are quantized to at most this many fractional digits.
    #[arg(long)]
    payment_round_decimals: Option<u32>,
    /// Honest change carries at least this many fractional digits.
    #[arg(long)]
    change_min_fractional_digits: Option<u32>,
    /// Probability that a change output is rounded to look like a payment.
    #[arg(long)]
    adversarial_round_change_rate: Option<f64>,
    /// Probability that change reuses an earlier change address.
    #[arg(long)]
    address_reuse_rate: Option<f64>,
    /// Chain decimals (8 for Bitcoin-like, 18 for Ethereum-like chains).
    #[arg(long)]
    decimals: Option<u32>,
}

impl GenFlags {
    fn resolve(&self, manifest: &mut ManifestBuilder) -> Result<GenConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                manifest.input(path)?;
                let text =
                    std::fs::read_to_string(path).with_context(|| path.display().to_string())?;
                GenConfig::from_key_values(&text).with_context(|| path.display().to_string())?
            }
            None => GenConfig::default(),
        };
        if let Some(v) = self.seed {
            cfg.rng_seed = v;
        }
        if let Some(v) = self.entities {
            cfg.n_entities = v;
        }
        if let Some(v) = self.wallets_per_entity {
            cfg.wallets_per_entity = v;
        }
        if let Some(v) = self.transactions {
            cfg.n_transactions = v;
        }
        if let Some(v) = self.change_rate {
            cfg.change_rate = v;
        }
        if let Some(v) = self.payment_round_decimals {
            cfg.payment_round_decimals = v;
        }
        if let Some(v) = self.change_min_fractional_digits {
            cfg.change_min_fractional_digits = v;
        }
        if let Some(v) = self.adversarial_round_change_rate {
            cfg.adversarial_round_change_rate = v;
        }
        if let Some(v) = self.address_reuse_rate {
            cfg.address_reuse_rate = v;
        }
        if let Some(v) = self.decimals {
            cfg.decimals = v;
        }
        cfg.validate()?;
        manifest.config("rng_seed", cfg.rng_seed);
        manifest.config("n_entities", cfg.n_entities);
        manifest.config("wallets_per_entity", cfg.wallets_per_entity);
        manifest.config("n_transactions", cfg.n_transactions);
        manifest.config("change_rate", cfg.change_rate);
        manifest.config("payment_round_decimals", cfg.payment_round_decimals);
        manifest.config("change_min_fractional_digits", cfg.change_min_fractional_digits);
        manifest.config("adversarial_round_change_rate", cfg.adversarial_round_change_rate);
        manifest.config("address_reuse_rate", cfg.address_reuse_rate);
        manifest.config("decimals", cfg.decimals);
        Ok(cfg)
    }
}

#[derive(Args)]
struct SynthUtxoArgs {
    #[command(flatten)]
    gen: GenFlags,
    /// Transactions out, one JSON object per line, in chain order.
    #[arg(long)]
    out: PathBuf,
    /// Address ground truth out (address, entity, role).
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Per-transaction change ground truth out (txid, change_index).
    #[arg(long)]
    change_truth: Option<PathBuf>,
}

#[derive(Args)]
struct SynthAccountArgs {
    #[command(flatten)]
    gen: GenFlags,
    /// Transfers out, one JSON object per line, in chain order.
    #[arg(long)]
    out: PathBuf,
    /// Address ground truth out (address, entity, role).
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Exchange hot-wallet seed CSV out (address,name,category,source).
    #[arg(long)]
    seeds: Option<PathBuf>,
}

#[derive(Args)]
struct ClusterUtxoArgs {
    /// Input transactions, one JSON object per line, in chain order.
    #[arg(long)]
    txs: PathBuf,
    /// Base-unit decimals for amounts (8 for Bitcoin-like, 18 for Ethereum-like).
    #[arg(long)]
    decimals: u32,
    /// Run only the common-spending pass.
    #[arg(long)]
    no_change_heuristic: bool,
    /// Cluster records out, one JSON object per line.
    #[arg(long)]
    out: PathBuf,
    /// Change decisions out, one per transaction (empty when the pass is disabled).
    #[arg(long)]
    decisions: PathBuf,
}

#[derive(Args)]
struct ClusterAccountArgs {
    /// Input transfers, one JSON object per line, in chain order.
    #[arg(long)]
    transfers: PathBuf,
    /// Exchange seed CSV (address,name,category,source).
    #[arg(long)]
    seeds: PathBuf,
    /// Base-unit decimals for amounts (8 for Bitcoin-like, 18 for Ethereum-like).
    #[arg(long)]
    decimals: u32,
    /// Sweeps required before a deposit address is accepted.
    #[arg(long, default_value_t = 1)]
    min_sweeps: u64,
    /// Cluster records out, one JSON object per line.
    #[arg(long)]
    out: PathBuf,
    /// Per-sender deposit inference records out.
    #[arg(long)]
    inferences: PathBuf,
}

#[derive(Args)]
struct LabelArgs {
    /// Cluster records to label.
    #[arg(long)]
    clusters: PathBuf,
    /// Seed CSV (address,name,category,source).
    #[arg(long)]
    seeds: PathBuf,
    /// Labeled cluster records out.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CensusArgs {
    /// Labeled cluster records.
    #[arg(long)]
    labeled: PathBuf,
    /// Keep only the N largest labeled clusters.
    #[arg(long, default_value_t = 10)]
    top: usize,
    /// Also write the rows (category,name,num_addresses) as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Cluster records to score (labeled or not).
    #[arg(long)]
    clusters: PathBuf,
    /// Address ground truth (address, entity, role).
    #[arg(long)]
    truth: PathBuf,
    /// Change decisions to score.
    #[arg(long, requires_all = ["change_truth", "txs", "decimals"])]
    decisions: Option<PathBuf>,
    /// Change ground truth (txid, change_index) from the generator.
    #[arg(long, requires = "decisions")]
    change_truth: Option<PathBuf>,
    /// Transactions the decisions were made over; resolves change indexes to addresses.
    #[arg(long, requires = "decisions")]
    txs: Option<PathBuf>,
    /// Base-unit decimals for parsing --txs.
    #[arg(long, requires = "decisions")]
    decimals: Option<u32>,
    /// Deposit inferences to score.
    #[arg(long)]
    inferences: Option<PathBuf>,
    /// Metrics report (JSON) out.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::SynthUtxo(args) => synth_utxo(args),
        Command::SynthAccount(args) => synth_account(args),
        Command::ClusterUtxo(args) => cluster_utxo(args),
        Command::ClusterAccount(args) => cluster_account(args),
        Command::Label(args) => label_clusters(args),
        Command::Census(args) => print_census(args),
        Command::Eval(args) => eval_clusters(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn file_reader(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| path.display().to_string())?))
}

fn file_writer(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| path.display().to_string())?))
}

fn check_decimals(decimals: u32) -> Result<()> {
    if !(1..=MAX_DECIMALS).contains(&decimals) {
        bail!("--decimals must be in [1, {MAX_DECIMALS}], got {decimals}");
    }
    Ok(())
}

fn synth_utxo(args: &SynthUtxoArgs) -> Result<()> {
    let mut manifest = ManifestBuilder::new("synth-utxo");
    let cfg = args.gen.resolve(&mut manifest)?;
    let mut generator = UtxoChainGen::new(&cfg)?;
    let mut out = file_writer(&args.out)?;
    for item in &mut generator {
        let tx = item?;
        ingest::write_utxo_transactions(&mut out, [&tx])
            .with_context(|| args.out.display().to_string())?;
    }
    out.flush()?;
    let truth = generator.into_truth();

    let mut outputs: Vec<&Path> = vec![&args.out];
    if let Some(path) = &args.truth {
        let mut writer = file_writer(path)?;
        ingest::write_address_truth(&mut writer, truth.address_rows())
            .with_context(|| path.display().to_string())?;
        writer.flush()?;
        outputs.push(path);
    }
    if let Some(path) = &args.change_truth {
        let mut writer = file_writer(path)?;
        ingest::write_change_truth(
            &mut writer,
            truth.change.iter().map(|c| (c.txid.as_str(), c.change_index)),
        )
        .with_context(|| path.display().to_string())?;
        writer.flush()?;
        outputs.push(path);
    }
    manifest.write_alongside(&outputs)
}

fn synth_account(args: &SynthAccountArgs) -> Result<()> {
    let mut manifest = ManifestBuilder::new("synth-account");
    let cfg = args.gen.resolve(&mut manifest)?;
    let (transfers, truth, seeds) = generate_account_chain(&cfg)?;

    let mut out = file_writer(&args.out)?;
    ingest::write_transfers(&mut out, &transfers).with_context(|| args.out.display().to_string())?;
    out.flush()?;

    let mut outputs: Vec<&Path> = vec![&args.out];
    if let Some(path) = &args.truth {
        let mut writer = file_writer(path)?;
        ingest::write_address_truth(&mut writer, truth.address_rows())
            .with_context(|| path.display().to_string())?;
        writer.flush()?;
        outputs.push(path);
    }
    if let Some(path) = &args.seeds {
        let mut writer = file_writer(path)?;
        ingest::write_seed_labels(&mut writer, &seeds)
            .with_context(|| path.display().to_string())?;
        writer.flush()?;
        outputs.push(path);
    }
    manifest.write_alongside(&outputs)
}

fn cluster_utxo(args: &ClusterUtxoArgs) -> Result<()> {
    check_decimals(args.decimals)?;
    let mut manifest = ManifestBuilder::new("cluster-utxo");
    manifest.input(&args.txs)?;
    manifest.config("decimals", args.decimals);
    manifest.config("change_heuristic", !args.no_change_heuristic);

    let mut partition = Partition::new();
    let reader = UtxoReader::new(file_reader(&args.txs)?, args.decimals);
    for tx in reader {
        let tx = tx.with_context(|| args.txs.display().to_string())?;
        join_common_inputs(&tx, &mut partition);
    }

    let mut decisions_out = file_writer(&args.decisions)?;
    if !args.no_change_heuristic {
        let reader = UtxoReader::new(file_reader(&args.txs)?, args.decimals);
        let mut scan = ChangeScan::new();
        for tx in reader {
            let tx = tx.with_context(|| args.txs.display().to_string())?;
            let decision = scan
                .observe(&tx, &mut partition)
                .with_context(|| args.txs.display().to_string())?;
            ingest::write_change_decisions(&mut decisions_out, [&decision])
                .with_context(|| args.decisions.display().to_string())?;
        }
    }
    decisions_out.flush()?;

    let clusters = partition.finalize();
    let mut out = file_writer(&args.out)?;
    ingest::write_cluster_records(&mut out, &clusters)
        .with_context(|| args.out.display().to_string())?;
    out.flush()?;
    manifest.write_alongside(&[&args.out, &args.decisions])
}

fn cluster_account(args: &ClusterAccountArgs) -> Result<()> {
    check_decimals(args.decimals)?;
    let mut manifest = ManifestBuilder::new("cluster-account");
    manifest.input(&args.transfers)?;
    manifest.input(&args.seeds)?;
    manifest.config("decimals", args.decimals);
    manifest.config("min_sweeps", args.min_sweeps);

    let transfers: Vec<AccountTransfer> =
        TransferReader::new(file_reader(&args.transfers)?, args.decimals)
            .collect::<Result<_, _>>()
            .with_context(|| args.transfers.display().to_string())?;
    let seed_load = ingest::load_seed_labels(file_reader(&args.seeds)?)
        .with_context(|| args.seeds.display().to_string())?;
    for warning in &seed_load.warnings {
        eprintln!("{}: {warning}", args.seeds.display());
    }
    let seed_set = ExchangeSeedSet::from_seeds(&seed_load.seeds)
        .with_context(|| args.seeds.display().to_string())?;

    let inferences = infer_deposit_addresses(&transfers, &seed_set, args.min_sweeps);
    let mut partition = Partition::new();
    for transfer in &transfers {
        partition.intern(&transfer.from);
        partition.intern(&transfer.to);
    }
    build_exchange_clusters(&inferences, &seed_set, &mut partition)?;

    let clusters = partition.finalize();
    let mut out = file_writer(&args.out)?;
    ingest::write_cluster_records(&mut out, &clusters)
        .with_context(|| args.out.display().to_string())?;
    out.flush()?;
    let mut inferences_out = file_writer(&args.inferences)?;
    ingest::write_deposit_inferences(&mut inferences_out, &inferences)
        .with_context(|| args.inferences.display().to_string())?;
    inferences_out.flush()?;
    manifest.write_alongside(&[&args.out, &args.inferences])
}

fn label_clusters(args: &LabelArgs) -> Result<()> {
    let mut manifest = ManifestBuilder::new("label");
    manifest.input(&args.clusters)?;
    manifest.input(&args.seeds)?;

    let clusters = ingest::read_cluster_records(file_reader(&args.clusters)?)
        .with_context(|| args.clusters.display().to_string())?;
    let seed_load = ingest::load_seed_labels(file_reader(&args.seeds)?)
        .with_context(|| args.seeds.display().to_string())?;
    for warning in &seed_load.warnings {
        eprintln!("{}: {warning}", args.seeds.display());
    }

    let labeled = propagate_labels(&clusters, &seed_load.seeds);
    let mut out = file_writer(&args.out)?;
    ingest::write_labeled_records(&mut out, &labeled)
        .with_context(|| args.out.display().to_string())?;
    out.flush()?;
    manifest.write_alongside(&[&args.out])
}

fn print_census(args: &CensusArgs) -> Result<()> {
    let mut manifest = ManifestBuilder::new("census");
    manifest.input(&args.labeled)?;
    manifest.config("top", args.top);

    let labeled = ingest::read_labeled_clusters(file_reader(&args.labeled)?)
        .with_context(|| args.labeled.display().to_string())?;
    let report = census(&labeled, args.top);
    print!("{}", report.render_table());

    if let Some(path) = &args.csv {
        let mut writer = file_writer(path)?;
        ingest::write_census_csv(&mut writer, &report.all_rows())
            .with_context(|| path.display().to_string())?;
        writer.flush()?;
        manifest.write_alongside(&[path])?;
    }
    Ok(())
}

fn eval_clusters(args: &EvalArgs) -> Result<()> {
    let mut manifest = ManifestBuilder::new("eval");
    manifest.input(&args.clusters)?;
    manifest.input(&args.truth)?;

    let clusters = ingest::read_cluster_records(file_reader(&args.clusters)?)
        .with_context(|| args.clusters.display().to_string())?;
    let member_lists: Vec<Vec<Address>> = clusters.into_iter().map(|c| c.members).collect();
    let address_rows = ingest::read_address_truth(file_reader(&args.truth)?)
        .with_context(|| args.truth.display().to_string())?;

    let decisions = match &args.decisions {
        Some(path) => {
            manifest.input(path)?;
            Some(
                ingest::read_change_decisions(file_reader(path)?)
                    .with_context(|| path.display().to_string())?,
            )
        }
        None => None,
    };
    let change_rows = match &args.change_truth {
        Some(path) => {
            manifest.input(path)?;
            let rows = ingest::read_change_truth(file_reader(path)?)
                .with_context(|| path.display().to_string())?;
            let txs = args.txs.as_ref().expect("clap enforces --txs with --decisions");
            let decimals = args.decimals.expect("clap enforces --decimals with --decisions");
            check_decimals(decimals)?;
            manifest.config("decimals", decimals);
            manifest.input(txs)?;
            resolve_change_addresses(rows, txs, decimals)?
        }
        None => Vec::new(),
    };
    let inferences = match &args.inferences {
        Some(path) => {
            manifest.input(path)?;
            Some(
                ingest::read_deposit_inferences(file_reader(path)?)
                    .with_context(|| path.display().to_string())?,
            )
        }
        None => None,
    };

    let truth = GroundTruth::from_rows(address_rows, change_rows)
        .with_context(|| args.truth.display().to_string())?;
    let report = evaluate(&member_lists, decisions.as_deref(), inferences.as_deref(), &truth)?;

    let mut out = file_writer(&args.out)?;
    serde_json::to_writer_pretty(&mut out, &report)?;
    out.write_all(b"\n")?;
    out.flush()?;
    manifest.write_alongside(&[&args.out])
}

/// Truth row ready for scoring: txid, change output index, resolved address.
type ResolvedChangeRow = (String, Option<u64>, Option<Address>);

/// Looks up each truth row's change output address in the transaction file.
/// The truth only stores output indexes; scoring needs addresses.
fn resolve_change_addresses(
    rows: Vec<(String, Option<u64>)>,
    txs_path: &Path,
    decimals: u32,
) -> Result<Vec<ResolvedChangeRow>> {
    let mut wanted: HashMap<String, u64> = rows
        .iter()
        .filter_map(|(txid, index)| index.map(|i| (txid.clone(), i)))
        .collect();
    let mut resolved: HashMap<String, Address> = HashMap::new();
    if !wanted.is_empty() {
        let reader = UtxoReader::new(file_reader(txs_path)?, decimals);
        for tx in reader {
            let tx = tx.with_context(|| txs_path.display().to_string())?;
            if let Some(index) = wanted.remove(&tx.txid) {
                let output = tx.outputs.get(index as usize).ok_or_else(|| {
                    anyhow!(
                        "{}: change truth names output {index} of {} but it has {} outputs",
                        txs_path.display(),
                        tx.txid,
                        tx.outputs.len()
                    )
                })?;
                resolved.insert(tx.txid.clone(), output.0.clone());
            }
        }
        if let Some(txid) = wanted.keys().next() {
            bail!("{}: change truth references unknown txid {txid:?}", txs_path.display());
        }
    }
    Ok(rows
        .into_iter()
        .map(|(txid, index)| {
            let address = resolved.get(&txid).cloned();
            (txid, index, address)
        })
        .collect())
}
