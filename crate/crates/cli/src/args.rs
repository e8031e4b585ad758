use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "protoscribe", version, about = "Privacy-gated prototype evidence reports")]
pub struct Cli {
    /// Where to write the run manifest (default: next to the main output).
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Distill prototype records into a memory bank.
    Distill(DistillArgs),
    /// Fit, apply or sweep the (k, l) release gate.
    #[command(subcommand)]
    Gate(GateCommand),
    /// Run the propose/critique loop for every case.
    Generate(GenerateArgs),
    /// Score generated reports.
    #[command(subcommand)]
    Evaluate(EvaluateCommand),
    /// Run a built-in attacker against a release.
    Attack(AttackArgs),
    /// Write a seeded synthetic cohort.
    Cohort(CohortArgs),
    /// Seeded end-to-end run on a synthetic cohort.
    Demo(DemoArgs),
}

#[derive(Debug, Args)]
pub struct DistillArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub prototypes: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum GateCommand {
    /// Build the equivalence-class index from population records.
    Fit(GateFitArgs),
    /// Gate a memory bank against an index.
    Apply(GateApplyArgs),
    /// Tabulate utility, visibility and linkage over a (k, l) grid.
    Sweep(GateSweepArgs),
}

#[derive(Debug, Args)]
pub struct GateFitArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub population: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GateApplyArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub bank: PathBuf,
    #[arg(long)]
    pub index: PathBuf,
    /// Override the configured k.
    #[arg(long)]
    pub k: Option<usize>,
    /// Override the configured l.
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GateSweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub prototypes: PathBuf,
    #[arg(long)]
    pub population: PathBuf,
    /// Backbone outputs whose neighborhoods define utility.
    #[arg(long)]
    pub backbone: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub l: Option<Vec<usize>>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Template,
    Adversarial,
    Http,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Gated bank from `gate apply`.
    #[arg(long)]
    pub gated: PathBuf,
    #[arg(long)]
    pub cases: PathBuf,
    #[arg(long)]
    pub backbone: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the grounded state of every case (the CSF references).
    #[arg(long)]
    pub states: Option<PathBuf>,
    /// Override the configured scribe backend.
    #[arg(long, value_enum)]
    pub backend: Option<BackendArg>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Worker threads; output order does not depend on it.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Request/response log for the http backend.
    #[arg(long)]
    pub transcripts: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum EvaluateCommand {
    /// Comparison-set faithfulness of reports against grounded states.
    Csf(CsfArgs),
}

#[derive(Debug, Args)]
pub struct CsfArgs {
    #[arg(long)]
    pub reports: PathBuf,
    /// Grounded states written by `generate --states`.
    #[arg(long)]
    pub references: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Count claims about unknown evidence as errors instead of failing.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AttackKindArg {
    Mia,
    Aia,
    Link,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReleaseArg {
    Gated,
    Ungated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TieArg {
    Fractional,
    Strict,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[arg(value_enum)]
    pub kind: AttackKindArg,
    #[arg(long)]
    pub config: PathBuf,
    /// Prototype records held in memory.
    #[arg(long)]
    pub members: PathBuf,
    /// Population the gate is fit on; doubles as the linkage registry.
    #[arg(long)]
    pub population: PathBuf,
    #[arg(long)]
    pub non_members: PathBuf,
    #[arg(long, value_enum, default_value_t = ReleaseArg::Gated)]
    pub release: ReleaseArg,
    #[arg(long, value_enum)]
    pub tie_policy: Option<TieArg>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CohortArgs {
    /// TOML cohort spec; defaults apply when omitted.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = BackendArg::Template)]
    pub backend: BackendArg,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}
