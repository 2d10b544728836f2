//! `su2ladder`: runs the verification suite and dumps the constructions it
//! checks.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use su2ladder::casimir::{annihilation_claims, canonical_basis_s1, lattice_report, CasimirStack};
use su2ladder::io::{basis_to_json, canonical_dump, parse_sector, spectrum_csv, spectrum_rows, OperatorDump};
use su2ladder::ladder::{right_functions, solve_sigma, AlphaMatrix, Family};
use su2ladder::schwinger::{su2_generators, CasimirSpectrum};
use su2ladder::verify::{parse_override, run_suite, OutputFormat, SuiteConfig};
use su2ladder::{SectorBasis, SparseOperator};

/// Exit status for runs that produced no report (bad input, I/O).
const EXIT_ERROR: u8 = 255;

#[derive(Parser, Debug)]
#[command(name = "su2ladder", version, about = "Casimir ladder operators for Jordan-Schwinger su(2)")]
struct Cli {
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// json or csv; csv is accepted by `verify` and `spectrum` only.
    #[arg(long, global = true)]
    format: Option<OutputFormat>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the verification suite; exit status is the number of failed checks.
    Verify(VerifyArgs),
    /// Eigenvalues of J² per (n, w) sector with their j labels.
    Spectrum {
        #[command(flatten)]
        space: Space,
        /// Only this sector, as `n,w`.
        #[arg(long, value_parser = sector_arg)]
        sector: Option<(u32, i64)>,
    },
    /// α-matrices, right functions and σ polynomials for one spin.
    Ladders {
        #[arg(long)]
        spin: u32,
    },
    /// The |n, j> lattice of the J_z kernel with τ arrows and annihilation claims.
    Kernel {
        #[command(flatten)]
        space: Space,
    },
    /// Occupation vectors in basis order, or the spin-1 canonical basis.
    Basis {
        #[command(flatten)]
        space: Space,
        #[arg(long, value_parser = sector_arg, conflicts_with = "canonical")]
        sector: Option<(u32, i64)>,
        /// Spin 1 only: |n, j, j_z> built from τ†_{±1} and J_±.
        #[arg(long)]
        canonical: bool,
    },
    /// One operator as coordinate triplets.
    DumpOp {
        #[command(flatten)]
        space: Space,
        /// jz, jplus, jminus, j2, n, jhat, a:MU, adag:MU, p:K, m:K, tau:THETA
        /// or tau-lower:THETA.
        #[arg(long = "op")]
        op: String,
    },
}

#[derive(Args, Debug)]
struct Space {
    #[arg(long)]
    spin: u32,
    #[arg(long, default_value_t = 4)]
    nmax: u32,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Comma-separated or repeated.
    #[arg(long, value_delimiter = ',', default_values_t = [1u32, 2])]
    spin: Vec<u32>,
    #[arg(long, default_value_t = 4)]
    nmax: u32,
    /// Tolerance for every check without an override.
    #[arg(long, env = "SU2LADDER_TOLERANCE")]
    tolerance: Option<f64>,
    /// Per-check tolerance, `name=value`; repeatable.
    #[arg(long = "override", value_name = "NAME=VALUE")]
    overrides: Vec<String>,
    /// Worker threads; 0 uses the global pool.
    #[arg(long, default_value_t = 0)]
    parallelism: usize,
    /// Record wall time per check. Timed reports are not byte-stable.
    #[arg(long)]
    timings: bool,
}

fn sector_arg(s: &str) -> Result<(u32, i64), String> {
    parse_sector(s).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_ERROR) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let format = cli.format;
    let json_only = |what: &str| -> anyhow::Result<()> {
        if format == Some(OutputFormat::Csv) {
            bail!("`{what}` has no CSV form");
        }
        Ok(())
    };
    let (text, code) = match cli.command {
        Command::Verify(args) => {
            let config = verify_config(args, format.unwrap_or_default())?;
            let report = run_suite(&config)?;
            if cli.out.is_some() {
                eprintln!("{} passed, {} failed", report.passed, report.failed);
            }
            (report.render(config.output_format)?, report.exit_code() as u8)
        }
        Command::Spectrum { space, sector } => {
            let basis = std::sync::Arc::new(SectorBasis::full(space.spin, space.nmax));
            let spectrum = CasimirSpectrum::new(&su2_generators(&basis)?)?;
            let rows = spectrum_rows(&spectrum, sector)?;
            let text = match format.unwrap_or(OutputFormat::Csv) {
                OutputFormat::Csv => spectrum_csv(&rows)?,
                OutputFormat::Json => serde_json::to_string_pretty(&rows)? + "\n",
            };
            (text, 0)
        }
        Command::Ladders { spin } => {
            json_only("ladders")?;
            (ladders_json(spin)?, 0)
        }
        Command::Kernel { space } => {
            json_only("kernel")?;
            let stack = CasimirStack::new(space.spin, space.nmax)?;
            let report = lattice_report(&stack, stack.taus())?;
            let claims = annihilation_claims(&report);
            let value = json!({ "lattice": report, "claims": claims });
            (serde_json::to_string_pretty(&value)? + "\n", 0)
        }
        Command::Basis { space, sector, canonical } => {
            json_only("basis")?;
            let text = if canonical {
                let stack = CasimirStack::new(space.spin, space.nmax)?;
                let vectors = canonical_basis_s1(&stack, space.nmax)?;
                serde_json::to_string(&canonical_dump(stack.basis(), &vectors))? + "\n"
            } else {
                let basis = SectorBasis::full(space.spin, space.nmax);
                match sector {
                    None => basis_to_json(&basis)?,
                    Some((n, w)) => {
                        let states: Vec<&[u32]> = basis
                            .sector_indices(n, w)
                            .into_iter()
                            .map(|i| basis.state(i).occupations())
                            .collect();
                        serde_json::to_string(&states)? + "\n"
                    }
                }
            };
            (text, 0)
        }
        Command::DumpOp { space, op } => {
            json_only("dump-op")?;
            (OperatorDump::from_operator(&named_operator(&space, &op)?).to_json()?, 0)
        }
    };
    match &cli.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(code)
}

fn verify_config(args: VerifyArgs, output_format: OutputFormat) -> anyhow::Result<SuiteConfig> {
    let mut tolerance_overrides = BTreeMap::new();
    for o in &args.overrides {
        let (name, value) = parse_override(o)?;
        tolerance_overrides.insert(name, value);
    }
    let config = SuiteConfig {
        spins: args.spin,
        n_max: args.nmax,
        tolerance: args.tolerance,
        tolerance_overrides,
        output_format,
        parallelism: args.parallelism,
        timings: args.timings,
    };
    config.validate()?;
    Ok(config)
}

fn ladders_json(spin: u32) -> anyhow::Result<String> {
    let mut alphas = Vec::new();
    let mut sigmas = Vec::new();
    for family in [Family::P, Family::M] {
        let alpha = AlphaMatrix::derive(spin, family)?;
        for theta in family.thetas(spin) {
            sigmas.push(solve_sigma(&alpha, theta)?);
        }
        alphas.push(alpha);
    }
    sigmas.sort_by_key(|s| s.theta);
    let value = json!({
        "spin": spin,
        "alpha": alphas,
        "right_functions": right_functions(spin)?,
        "sigmas": sigmas,
    });
    // Compact: pretty printing puts every [numerator, denominator] pair on
    // four lines.
    Ok(serde_json::to_string(&value)? + "\n")
}

fn named_operator(space: &Space, name: &str) -> anyhow::Result<SparseOperator> {
    let (head, arg) = match name.split_once(':') {
        Some((h, a)) => (h, Some(a.trim().parse::<i64>().with_context(|| format!("operator argument in {name:?}"))?)),
        None => (name, None),
    };
    let index = |what: &str| arg.with_context(|| format!("`{head}` needs `{head}:{what}`"));
    let unsigned = |what: &str| -> anyhow::Result<u32> {
        let k = index(what)?;
        u32::try_from(k).with_context(|| format!("{what} must be non-negative, got {k}"))
    };
    let basis = std::sync::Arc::new(SectorBasis::full(space.spin, space.nmax));
    let op = match head {
        "jz" | "jplus" | "jminus" | "j2" | "n" | "jhat" => {
            let g = su2_generators(&basis)?;
            match head {
                "jz" => g.jz,
                "jplus" => g.jplus,
                "jminus" => g.jminus,
                "j2" => g.j2,
                "n" => g.ntot,
                _ => CasimirSpectrum::new(&g)?.jhat(),
            }
        }
        "a" => SparseOperator::annihilation(&basis, index("MU")?)?,
        "adag" => SparseOperator::creation(&basis, index("MU")?)?,
        "p" | "m" => {
            let stack = CasimirStack::unverified(space.spin, space.nmax)?;
            let k = unsigned("K")?;
            let found = if head == "p" {
                stack.families.p_ops.get(k as usize)
            } else {
                stack.families.m(k)
            };
            match found {
                Some(op) => op.clone(),
                None => bail!("no {head}†_{k} at spin {}", space.spin),
            }
        }
        "tau" | "tau-lower" => {
            let theta = index("THETA")?;
            let stack = CasimirStack::new(space.spin, space.nmax)?;
            let Some(tau) = stack.tau(theta) else {
                bail!("θ = {theta} outside -{0}..={0}", space.spin);
            };
            if head == "tau" {
                tau.op.clone()
            } else {
                tau.lowering()
            }
        }
        other => bail!("unknown operator {other:?}"),
    };
    Ok(op)
}
