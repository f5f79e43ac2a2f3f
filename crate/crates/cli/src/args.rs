use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Counts such as `100000`, `1e7` or `2.5e6`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let (mant, exp) = s.split_once(['e', 'E']).ok_or_else(|| format!("`{s}` is not a count"))?;
    let exp: u32 = exp.parse().map_err(|_| format!("`{exp}` is not an exponent"))?;
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    let frac = frac.trim_end_matches('0');
    if frac.len() as u32 > exp {
        return Err(format!("`{s}` is not an integer"));
    }
    let digits = format!("{int}{frac}");
    let base: u64 = digits.parse().map_err(|_| format!("`{mant}` is not a decimal"))?;
    10u64
        .checked_pow(exp - frac.len() as u32)
        .and_then(|p| base.checked_mul(p))
        .ok_or_else(|| format!("`{s}` overflows 64 bits"))
}

#[derive(Debug, Parser)]
#[command(name = "cocycle-lab", version, about = "Exact experiments with step cocycles over irrational rotations")]
pub struct Cli {
    /// Record wall-clock seconds in the manifest (replay output then differs in that field).
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Continued fractions of α.
    #[command(subcommand)]
    Cf(CfCommand),
    /// Ostrowski expansions and special-β plans.
    #[command(subcommand)]
    Ostrowski(OstrowskiCommand),
    /// Birkhoff sums of step cocycles.
    #[command(subcommand)]
    Cocycle(CocycleCommand),
    /// The linear coboundary equation and its series.
    #[command(subcommand)]
    Coboundary(CoboundaryCommand),
    /// Skew-product simulation.
    #[command(subcommand)]
    Skew(SkewCommand),
    /// Run the acceptance checklist.
    Verify(VerifyArgs),
    /// Rerun the command recorded in a report's manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct AlphaArg {
    /// α spec, e.g. `periodic:[0;1]`, `rule:factorial`, `sparse:{j:"3n+1", a_j:"n!", filler:1}`.
    #[arg(long)]
    pub alpha: String,
}

#[derive(Debug, Subcommand)]
pub enum CfCommand {
    /// Partial quotients and convergents `p_n/q_n` for `n = -1..=N`.
    Convergents {
        #[command(flatten)]
        alpha: AlphaArg,
        #[arg(long)]
        n: usize,
    },
    /// The interval between `p_d/q_d` and `p_{d+1}/q_{d+1}`.
    Enclosure {
        #[command(flatten)]
        alpha: AlphaArg,
        #[arg(long)]
        depth: usize,
    },
    /// Enclosure of `‖kα‖`.
    Norm {
        #[command(flatten)]
        alpha: AlphaArg,
        #[arg(long, allow_hyphen_values = true)]
        k: String,
        /// Target width `2^-bits`.
        #[arg(long, default_value_t = 64)]
        bits: u32,
    },
}

#[derive(Debug, Subcommand)]
pub enum OstrowskiCommand {
    /// Greedy digits of β up to index J, with `H_r` partial sums.
    Expand {
        #[command(flatten)]
        alpha: AlphaArg,
        #[arg(long, allow_hyphen_values = true)]
        beta: String,
        #[arg(long)]
        horizon: usize,
        /// Exponents r of the `H_r` partial sums.
        #[arg(long, value_delimiter = ',', default_values_t = [1u32, 2])]
        r: Vec<u32>,
    },
    /// Sparse-digit β for a sparse α, with multipliers from `--d`.
    ConstructBeta {
        #[command(flatten)]
        alpha: AlphaArg,
        #[arg(long, default_value = "n")]
        d: String,
        #[arg(long, default_value_t = 25)]
        n_max: usize,
        /// Number of digits kept in the truncated β (default: as many as the tail bound allows).
        #[arg(long)]
        terms: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Fast,
    Naive,
    Both,
}

#[derive(Debug, Args)]
pub struct CocycleArgs {
    #[command(flatten)]
    pub alpha: AlphaArg,
    /// Point spec: `r:p/q`, `lat:r+m*alpha`, `d:<decimal>` or a plan file.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: String,
    /// With γ the cocycle is `φ_{β,γ}`, else `φ_β`.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<String>,
}

#[derive(Debug, Args)]
pub struct TrajectoryArgs {
    /// Write the trajectory `(j, x_j, y_j)` as CSV to this file.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
    /// Print the trajectory CSV on stdout instead of the JSON report.
    #[arg(long, conflicts_with = "trajectory")]
    pub csv: bool,
}

#[derive(Debug, Subcommand)]
pub enum CocycleCommand {
    /// `S_n φ(x)` by floor sums, by orbit evaluation, or both.
    Birkhoff {
        #[command(flatten)]
        cocycle: CocycleArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, value_parser = parse_count)]
        n: u64,
        #[arg(long, value_enum, default_value_t = MethodArg::Both)]
        method: MethodArg,
        #[command(flatten)]
        out: TrajectoryArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SeriesId {
    Criterion,
    H4,
    #[value(name = "A")]
    A,
    #[value(name = "B")]
    B,
    #[value(name = "C")]
    C,
    #[value(name = "D")]
    D,
    #[value(name = "E")]
    E,
    #[value(name = "F")]
    F,
    #[value(name = "G")]
    G,
    #[value(name = "H")]
    H,
}

#[derive(Debug, Subcommand)]
pub enum CoboundaryCommand {
    /// Truncated Fourier solution `ψ_N` of `φ_{β,γ} = ψ − ψ∘T_α` and its grid residual.
    Solve {
        #[command(flatten)]
        alpha: AlphaArg,
        #[arg(long, allow_hyphen_values = true)]
        beta: String,
        #[arg(long, allow_hyphen_values = true)]
        gamma: String,
        #[arg(long = "N", value_parser = parse_count)]
        n: u64,
        #[arg(long, value_parser = parse_count, default_value = "65536")]
        grid: u64,
    },
    /// Partial sums of a convergence series.
    Series {
        #[arg(long, value_enum)]
        id: SeriesId,
        #[command(flatten)]
        alpha: AlphaArg,
        #[arg(long, allow_hyphen_values = true)]
        beta: String,
        /// Needed by `criterion`.
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<String>,
        #[arg(long = "N", value_parser = parse_count)]
        n: u64,
        /// Cutoffs to report (default: 1, 2, 10, 20, … and N).
        #[arg(long, value_delimiter = ',', value_parser = parse_count)]
        cutoffs: Vec<u64>,
    },
}

#[derive(Debug, Args)]
pub struct StartArgs {
    /// Initial point; defaults to the seeded point.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum SkewCommand {
    /// Iterate `(x, y) ↦ (x + α, y + φ(x))` exactly.
    Simulate {
        #[command(flatten)]
        cocycle: CocycleArgs,
        #[command(flatten)]
        start: StartArgs,
        #[arg(long, value_parser = parse_count)]
        n: u64,
        #[command(flatten)]
        out: TrajectoryArgs,
    },
    /// Distribution of `y_j mod a` along one orbit.
    Quotient {
        #[command(flatten)]
        cocycle: CocycleArgs,
        #[command(flatten)]
        start: StartArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [2u64, 3, 5])]
        a: Vec<u64>,
        #[arg(long, value_parser = parse_count)]
        n: u64,
        #[arg(long, value_parser = parse_count, default_value = "1000")]
        burn_in: u64,
        #[arg(long, default_value_t = 4)]
        joint_depth: u32,
    },
    /// Dyadic-cell probe for an essential value.
    Probe {
        #[command(flatten)]
        cocycle: CocycleArgs,
        /// Integer part of the target value `u + vβ`.
        #[arg(long, allow_hyphen_values = true, required_unless_present = "infinity")]
        value: Option<i64>,
        /// β part of the target value.
        #[arg(long, allow_hyphen_values = true, default_value_t = 0)]
        value_beta: i64,
        /// Probe for `∞` instead: `|u| >= threshold`.
        #[arg(long, conflicts_with = "value")]
        infinity: Option<i64>,
        #[arg(long, default_value_t = 6)]
        depth: u32,
        #[arg(long, value_parser = parse_count)]
        nmax: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Residual of `εφ_β − φ_β∘T_γ = ψ − ψ∘T_α` for a solution file from `coboundary solve`.
    Commute {
        /// Solution file.
        #[arg(long)]
        psi: String,
        /// Defaults to the solution's γ.
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<String>,
        #[arg(long, allow_hyphen_values = true, default_value_t = 1)]
        epsilon: i8,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileArg {
    Quick,
    Full,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = ProfileArg::Quick)]
    pub profile: ProfileArg,
    /// Emit the JSON report instead of the table.
    #[arg(long)]
    pub json: bool,
    /// Test hook: corrupt the cached `q_n` before criterion 1.
    #[arg(long, hide = true)]
    pub inject_convergent_fault: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// A JSON report produced by this tool.
    pub report: String,
}
