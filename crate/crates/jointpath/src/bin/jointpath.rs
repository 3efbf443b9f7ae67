use clap::Parser;
use jointpath::cli::{run_scenario, RunConfig};
use jointpath::pathopt::{AngleDiff, CostKind, F5Direction};
use jointpath::trajectory::MotionProfile;
use std::path::PathBuf;
use std::process::ExitCode;

/// Straight-line trajectory planning and joint-path optimization for a 6-DOF
/// arm: solves the inverse kinematics at every via-point, then picks the
/// minimum-cost joint sequence.
#[derive(Parser, Debug)]
#[command(name = "jointpath", version, about)]
struct Args {
    /// Bundled scenario name (test1..test7) or path to a scenario JSON file.
    #[arg(long, default_value = "test1")]
    scenario: String,

    /// Geometry JSON file; bundled myCobot-280 geometry when omitted.
    #[arg(long)]
    geometry: Option<PathBuf>,

    /// Cost functions to optimize, comma separated (f1..f6).
    #[arg(long, value_delimiter = ',', default_value = "f1")]
    cost: Vec<String>,

    /// Motion profile override: uniform or quintic.
    #[arg(long)]
    profile: Option<String>,

    /// Subdivision count override.
    #[arg(long = "T")]
    t_steps: Option<u32>,

    /// Cost weights w1,w2,w3 or w1,w2,w3,w4,w5.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,

    /// Joint difference convention: wrapped or raw.
    #[arg(long = "angle-diff", default_value = "wrapped")]
    angle_diff: String,

    /// Manipulability cost direction: as-paper or negated.
    #[arg(long = "f5", default_value = "as-paper")]
    f5_direction: String,

    /// Seeds for the random-selection baseline, comma separated.
    #[arg(long = "random-seeds", value_delimiter = ',')]
    random_seeds: Option<Vec<u64>>,

    /// Output directory for the emitted CSV/JSON artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn parse_args(args: Args) -> Result<RunConfig, String> {
    let costs = args
        .cost
        .iter()
        .map(|c| c.parse::<CostKind>())
        .collect::<Result<Vec<_>, _>>()?;
    let profile = match args.profile.as_deref() {
        None => None,
        Some("uniform") => Some(MotionProfile::Uniform),
        Some("quintic") => Some(MotionProfile::Quintic),
        Some(other) => return Err(format!("unknown profile `{other}`, expected uniform|quintic")),
    };
    let angle_diff = match args.angle_diff.as_str() {
        "wrapped" => AngleDiff::Wrapped,
        "raw" => AngleDiff::Raw,
        other => return Err(format!("unknown angle-diff `{other}`, expected wrapped|raw")),
    };
    let f5_direction = match args.f5_direction.as_str() {
        "as-paper" => F5Direction::AsPaper,
        "negated" => F5Direction::Negated,
        other => return Err(format!("unknown f5 mode `{other}`, expected as-paper|negated")),
    };
    Ok(RunConfig {
        scenario: args.scenario,
        geometry: args.geometry,
        costs,
        profile,
        t_steps: args.t_steps,
        weights: args.weights,
        angle_diff,
        f5_direction,
        random_seeds: args.random_seeds.unwrap_or_default(),
        out_dir: args.out,
    })
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            // Help and version requests are not errors.
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let config = match parse_args(args) {
        Ok(config) => config,
        Err(message) => {
            eprintln!("error: {message}");
            return ExitCode::from(1);
        }
    };
    match run_scenario(&config) {
        Ok(summary) => {
            println!(
                "{}: {} layers, {} solutions, feasible = {}",
                summary.scenario, summary.layer_count, summary.total_solutions, summary.feasible
            );
            for (kind, cost) in &summary.costs {
                println!("  {kind}: total cost {:.6} (start node {})", cost.total_cost, cost.start_index);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
