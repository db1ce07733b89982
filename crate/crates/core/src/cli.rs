//! Command-line driver.
//!
//! Exit codes: 0 when every check passed, 1 when a verification failed,
//! 2 for usage or input errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use serde_json::{json, Value};

use crate::ktheory::{e4_page, group_json, k1_surface, CohomologySpec, E4Page, FGAbelianGroup};
use crate::lattice::{standard_lattice, Lattice, StandardLattice};
use crate::mukai::mukai_lattice;
use crate::verifier::{
    self, TrialConfig, VerificationReport, DEFAULT_COORD_BOUND, DEFAULT_PHI_TRIALS, DEFAULT_SEED, DEFAULT_TRIALS,
    DEFAULT_WORD_LENGTH,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// The bundled Enriques cohomology, with the nontrivial Brauer class as `alpha`.
pub const ENRIQUES_SPEC: &str = include_str!("../data/enriques.json");

#[derive(Debug, Parser)]
#[command(name = "twisted-mukai", version, about = "Twisted Mukai lattice and K-theory checks for Enriques surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the randomized and structural verification suites.
    Verify {
        #[command(subcommand)]
        suite: Suite,
    },
    /// Compute K¹ and the E₄ page of the twisted Atiyah–Hirzebruch spectral sequence.
    Ktheory(KtheoryArgs),
    /// Lattice diagnostics.
    Lattice {
        #[command(subcommand)]
        action: LatticeAction,
    },
}

#[derive(Debug, Subcommand)]
enum Suite {
    /// Claims 1 and 2 and the structure of the T-invariant sublattice.
    Claims {
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_COORD_BOUND, value_parser = clap::value_parser!(u32).range(1..))]
        coord_bound: u32,
        #[arg(long)]
        json: bool,
    },
    /// Sample T-equivariant isometries and check that φ(0,0,1) is 2-divisible in degree 2.
    PhiIntegrality {
        #[arg(long, default_value_t = DEFAULT_PHI_TRIALS)]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_WORD_LENGTH)]
        word_length: u32,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_COORD_BOUND, value_parser = clap::value_parser!(u32).range(1..))]
        coord_bound: u32,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["enriques", "input"])))]
struct KtheoryArgs {
    /// Use the bundled Enriques cohomology.
    #[arg(long, requires = "twist")]
    enriques: bool,
    /// Twist by the nontrivial Brauer class.
    #[arg(long, group = "twist", requires = "enriques")]
    twisted: bool,
    /// No twist.
    #[arg(long, group = "twist", requires = "enriques")]
    untwisted: bool,
    /// Cohomology spec file (JSON).
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Subcommand)]
enum LatticeAction {
    /// Rank, Gram matrix, determinant, parity and definiteness.
    Info {
        #[arg(long, value_enum)]
        name: LatticeName,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LatticeName {
    U,
    E8,
    MinusE8,
    EnriquesH2,
    MukaiH2,
    MukaiFull,
}

impl LatticeName {
    fn build(self) -> Lattice {
        match self {
            LatticeName::U => standard_lattice(StandardLattice::U),
            LatticeName::E8 => standard_lattice(StandardLattice::E8),
            LatticeName::MinusE8 => standard_lattice(StandardLattice::MinusE8),
            LatticeName::EnriquesH2 => standard_lattice(StandardLattice::EnriquesH2),
            LatticeName::MukaiH2 => standard_lattice(StandardLattice::MukaiH2),
            LatticeName::MukaiFull => mukai_lattice().clone(),
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            LatticeName::U => "u",
            LatticeName::E8 => "e8",
            LatticeName::MinusE8 => "minus-e8",
            LatticeName::EnriquesH2 => "enriques-h2",
            LatticeName::MukaiH2 => "mukai-h2",
            LatticeName::MukaiFull => "mukai-full",
        }
    }
}

/// Runs the CLI with process stdout/stderr and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{rendered}") } else { write!(out, "{rendered}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Verify { suite } => run_verify(suite, out),
        Command::Ktheory(args) => run_ktheory(args, out),
        Command::Lattice { action: LatticeAction::Info { name, json } } => run_lattice_info(name, json, out),
    };
    match result {
        Ok(code) => code,
        Err(CliError { code, message }) => {
            let _ = writeln!(err, "error: {message}");
            code
        }
    }
}

struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError { code: EXIT_FAILED, message: format!("write failed: {e}") }
    }
}

fn emit_json(out: &mut dyn Write, value: &Value) -> Result<(), CliError> {
    writeln!(out, "{}", serde_json::to_string_pretty(value).expect("JSON values serialize"))?;
    Ok(())
}

fn run_verify(suite: Suite, out: &mut dyn Write) -> Result<i32, CliError> {
    let start = Instant::now();
    let (command, cfg, word_length, json, reports) = match suite {
        Suite::Claims { trials, seed, coord_bound, json } => {
            let cfg = TrialConfig { trials, seed, coord_bound };
            let reports = vec![
                verifier::verify_claim1(&cfg),
                verifier::verify_claim2(&cfg),
                verifier::verify_invariant_lattice(),
            ];
            ("verify claims", cfg, None, json, reports)
        }
        Suite::PhiIntegrality { trials, word_length, seed, coord_bound, json } => {
            let cfg = TrialConfig { trials, seed, coord_bound };
            let report = verifier::verify_phi_integrality(&cfg, word_length)
                .map_err(|e| CliError { code: EXIT_FAILED, message: e.to_string() })?;
            ("verify phi-integrality", cfg, Some(word_length), json, vec![report])
        }
    };
    let all_passed = reports.iter().all(|r| r.passed);
    if json {
        let value = json!({
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "config": {
                "trials": cfg.trials,
                "seed": cfg.seed,
                "coord_bound": cfg.coord_bound,
                "word_length": word_length,
            },
            "checks": reports.iter().map(VerificationReport::check_json).collect::<Vec<_>>(),
            "passed": all_passed,
            "elapsed_ms": start.elapsed().as_millis() as u64,
        });
        emit_json(out, &value)?;
    } else {
        writeln!(
            out,
            "{command}: trials={} seed={} coord_bound={}{}",
            cfg.trials,
            cfg.seed,
            cfg.coord_bound,
            word_length.map(|w| format!(" word_length={w}")).unwrap_or_default()
        )?;
        for r in &reports {
            write_report_text(out, r)?;
        }
        writeln!(out, "{}", if all_passed { "all checks passed" } else { "verification FAILED" })?;
    }
    Ok(if all_passed { EXIT_OK } else { EXIT_FAILED })
}

fn write_report_text(out: &mut dyn Write, r: &VerificationReport) -> std::io::Result<()> {
    writeln!(
        out,
        "{} {} ({} trials, {} ms)",
        if r.passed { "PASS" } else { "FAIL" },
        r.check_name,
        r.trials_run,
        r.elapsed.as_millis()
    )?;
    for d in &r.details {
        writeln!(out, "    {d}")?;
    }
    if let Some(cx) = &r.counterexample {
        writeln!(out, "    counterexample: {}", cx.description)?;
        for v in &cx.vectors {
            let coords: Vec<String> = v.coords.iter().map(ToString::to_string).collect();
            writeln!(out, "      {} = [{}]", v.name, coords.join(", "))?;
        }
    }
    Ok(())
}

fn load_spec(args: &KtheoryArgs) -> Result<(String, CohomologySpec), CliError> {
    let invalid = |e: crate::ktheory::SpecFileError| CliError::usage(format!("invalid cohomology spec: {e}"));
    if args.enriques {
        let spec = CohomologySpec::from_json(ENRIQUES_SPEC).map_err(invalid)?;
        if args.twisted {
            return Ok(("Enriques surface, twisted by the nontrivial Brauer class".into(), spec));
        }
        let n = spec.h[3].num_generators();
        let spec = spec.with_alpha(vec![BigInt::default(); n]).expect("zero is always valid");
        return Ok(("Enriques surface, untwisted".into(), spec));
    }
    let path = args.input.as_ref().expect("clap enforces a source");
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let spec = CohomologySpec::from_json(&text).map_err(invalid)?;
    Ok((path.display().to_string(), spec))
}

fn h0_column_label(page: &E4Page, h0: &FGAbelianGroup) -> String {
    if page.k.is_one() {
        return page.columns[0].to_string();
    }
    if *h0 == FGAbelianGroup::free(1) {
        return format!("{}Z", page.k);
    }
    format!("{}*({h0}) = {}", page.k, page.columns[0])
}

fn run_ktheory(args: KtheoryArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let start = Instant::now();
    let (label, spec) = load_spec(&args)?;
    let k1 = k1_surface(&spec);
    let page = e4_page(&spec);
    let h0_label = h0_column_label(&page, &spec.h[0]);
    if args.json {
        let columns: Vec<Value> = page
            .columns
            .iter()
            .enumerate()
            .map(|(p, g)| {
                let mut v = json!({ "degree": p, "group": group_json(g) });
                if p == 0 {
                    v["label"] = json!(h0_label);
                }
                v
            })
            .collect();
        let k = page.k.to_u64().map_or_else(|| json!(page.k.to_string()), |k| json!(k));
        let d3: Vec<String> = page.d3_image.coords().iter().map(ToString::to_string).collect();
        let value = json!({
            "schema_version": SCHEMA_VERSION,
            "command": "ktheory",
            "input": label,
            "twisted": spec.is_twisted(),
            "alpha_order": k,
            "k1": group_json(&k1),
            "e4_page": columns,
            "d3": { "source": "H0", "target": "H3", "image_of_generator": d3 },
            "k0_graded": {
                "pieces": page.k0_graded().iter().map(|g| group_json(g)).collect::<Vec<_>>(),
                "extension_resolved": false,
            },
            "elapsed_ms": start.elapsed().as_millis() as u64,
        });
        emit_json(out, &value)?;
    } else {
        writeln!(out, "input: {label}")?;
        writeln!(out, "order of alpha: k = {}", page.k)?;
        let [_, c1, c2, c3, c4] = &page.columns;
        writeln!(out, "E4 page: k*H0 = {h0_label} | H1 = {c1} | H2 = {c2} | H3/alpha = {c3} | H4 = {c4}")?;
        let d3: Vec<String> = page.d3_image.coords().iter().map(ToString::to_string).collect();
        writeln!(out, "d3: H0 -> H3, 1 |-> -alpha = [{}]", d3.join(", "))?;
        writeln!(out, "K1 = {k1}")?;
        let [_, g2, g4] = page.k0_graded();
        writeln!(out, "K0 graded pieces: {h0_label}, {g2}, {g4} (extension problem not resolved)")?;
    }
    Ok(EXIT_OK)
}

fn run_lattice_info(name: LatticeName, json: bool, out: &mut dyn Write) -> Result<i32, CliError> {
    let start = Instant::now();
    let l = name.build();
    let det = l.determinant();
    let definiteness = l.definiteness();
    if json {
        let gram: Vec<Vec<i64>> = l
            .gram()
            .row_vecs()
            .iter()
            .map(|row| row.iter().map(|x| x.to_i64().expect("standard Gram entries are small")).collect())
            .collect();
        let value = json!({
            "schema_version": SCHEMA_VERSION,
            "command": "lattice info",
            "lattice": {
                "name": name.as_str(),
                "label": l.label(),
                "rank": l.rank(),
                "gram": gram,
                "determinant": det.to_i64(),
                "even": l.is_even(),
                "unimodular": l.is_unimodular(),
                "definiteness": definiteness.as_str(),
            },
            "elapsed_ms": start.elapsed().as_millis() as u64,
        });
        emit_json(out, &value)?;
    } else {
        writeln!(out, "lattice: {} ({})", name.as_str(), l.label())?;
        writeln!(out, "rank: {}", l.rank())?;
        writeln!(out, "determinant: {det}")?;
        writeln!(out, "parity: {}", if l.is_even() { "even" } else { "odd" })?;
        writeln!(out, "unimodular: {}", l.is_unimodular())?;
        writeln!(out, "definiteness: {}", definiteness.as_str())?;
        writeln!(out, "gram:")?;
        for row in l.gram().row_vecs() {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:>2}")).collect();
            writeln!(out, "  {}", cells.join(" "))?;
        }
    }
    Ok(EXIT_OK)
}
