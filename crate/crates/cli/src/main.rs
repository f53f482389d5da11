use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use randsub::cochain::Cochain;
use randsub::expectation::{
    c_plus, expected_block_counts, expected_chi, expected_cw_polynomial, expected_face_polynomial,
};
use randsub::gallery::{
    genus_surface_epsilon, holed_sphere_epsilon, sphere_epsilon, verify_construction, SurfaceConstruction,
};
use randsub::harness::{convergence_table, run, Caps, ExperimentSpec, McColumns, Mode};
use randsub::measure::{mu_z, MuRoute};
use randsub::subdivision::{barycentric_subdivide_capped, q_coefficients, subdivide_iter};
use randsub::{build_v, parse_q, Error, SimplicialComplex, Q};

const EXIT_OK: u8 = 0;
const EXIT_FAILURE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_CAP: u8 = 3;
const EXIT_USAGE: u8 = 64;

/// Random subcomplexes of barycentric subdivisions.
#[derive(Parser, Debug)]
#[command(name = "randsub", version)]
struct Cli {
    /// TOML file with `threads`, `seed`, `max_simplices`, `max_enum_bits`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[arg(long, global = true)]
    max_simplices: Option<u64>,

    #[arg(long, global = true)]
    max_enum_bits: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
enum Command {
    /// Iterated barycentric subdivision of a complex file.
    Subdivide {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        depth: usize,
        #[arg(long)]
        #[serde(skip)]
        output: Option<PathBuf>,
    },
    /// Mod 2 Betti numbers and Euler characteristic.
    Betti {
        #[arg(long)]
        input: PathBuf,
    },
    /// Builds `V_ε` from a hex-encoded cochain.
    Vbuild {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        epsilon: String,
        #[arg(long, default_value_t = 0)]
        depth: usize,
        /// Where to write the `V_ε` complex file.
        #[arg(long)]
        #[serde(skip)]
        out: Option<PathBuf>,
    },
    /// Measure of the cocycles `Z^{k-1}(Δ_p)`.
    Muz {
        #[arg(long)]
        nu: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        p: usize,
        #[arg(long, default_value = "auto")]
        route: String,
    },
    /// Exact expectations.
    Expect {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        nu: String,
        #[arg(long, value_parser = ["face", "chi", "cw", "blocks", "cplus"])]
        what: String,
    },
    /// Monte Carlo run.
    Sample {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Exhaustive run over every cochain.
    Enumerate {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Normalized expectations for `d = 0..=dmax`.
    Converge {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        nu: String,
        #[arg(long)]
        dmax: usize,
        /// Adds Monte Carlo Betti columns.
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        #[serde(skip)]
        out: Option<PathBuf>,
        #[arg(long)]
        #[serde(skip)]
        csv: Option<PathBuf>,
    },
    /// Coefficients `q_{p,n}` of the limiting f-vector.
    Qcoeff {
        #[arg(long)]
        n: usize,
        /// Also evaluate `q_n^∞` at this rational.
        #[arg(long)]
        eval: Option<String>,
    },
    /// Explicit surfaces in `Sd^d(Δ_3)`.
    Gallery(GalleryArgs),
}

#[derive(Args, Debug, Serialize)]
struct RunArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    nu: String,
    #[arg(long, default_value_t = 0)]
    depth: usize,
    /// Tally connected components by Betti type.
    #[arg(long)]
    census: bool,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct GalleryArgs {
    /// Build `V_ε` and check its homology.
    #[arg(long, global = true)]
    verify: bool,
    /// Where to write the `V_ε` complex file.
    #[arg(long, global = true)]
    #[serde(skip)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    target: GalleryTarget,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "target", rename_all = "lowercase")]
enum GalleryTarget {
    Sphere,
    Holes {
        #[arg(long)]
        r: usize,
    },
    Surface {
        #[arg(long)]
        genus: usize,
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    threads: Option<usize>,
    seed: Option<u64>,
    max_simplices: Option<u64>,
    max_enum_bits: Option<usize>,
}

struct Settings {
    caps: Caps,
    seed: u64,
    echo: Value,
}

enum Failure {
    Lib(Error),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

type Outcome<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                ErrorKind::InvalidSubcommand
                | ErrorKind::MissingSubcommand
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => EXIT_USAGE,
                _ => EXIT_VALIDATION,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let start = Instant::now();
    let code = match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            EXIT_VALIDATION
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::CapExceeded { .. } => EXIT_CAP,
                Error::RouteMismatch { .. } | Error::VerificationFailed(_) => EXIT_FAILURE,
                _ => EXIT_VALIDATION,
            }
        }
    };
    eprintln!("elapsed: {:.3} s", start.elapsed().as_secs_f64());
    ExitCode::from(code)
}

fn settings(cli: &Cli) -> Outcome<Settings> {
    let file = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            toml::from_str::<ConfigFile>(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?
        }
        None => ConfigFile::default(),
    };
    let defaults = Caps::default();
    let caps = Caps {
        max_simplices: cli
            .max_simplices
            .or(file.max_simplices)
            .map_or(defaults.max_simplices, u128::from),
        max_enum_bits: cli.max_enum_bits.or(file.max_enum_bits).unwrap_or(defaults.max_enum_bits),
    };
    if let Some(n) = cli.threads.or(file.threads) {
        if n == 0 {
            return Err(Failure::Input("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Input(e.to_string()))?;
    }
    let seed = file.seed.unwrap_or(0);
    let echo = json!({
        "caps": {
            "max_simplices": caps.max_simplices.to_string(),
            "max_enum_bits": caps.max_enum_bits,
        },
        "arguments": serde_json::to_value(&cli.command).expect("arguments serialize"),
    });
    Ok(Settings { caps, seed, echo })
}

fn nu_arg(s: &str) -> Outcome<Q> {
    let q = parse_q(s)?;
    randsub::Measure::new(q.clone())?;
    Ok(q)
}

fn load(path: &Path) -> Outcome<SimplicialComplex> {
    let k = SimplicialComplex::load(path)?;
    if k.is_empty() {
        return Err(Failure::Input(format!("{}: complex is empty", path.display())));
    }
    Ok(k)
}

fn check_k(k: &SimplicialComplex, kk: usize) -> Outcome<()> {
    let n = k.dim().unwrap_or(0);
    if kk == 0 || kk > n {
        return Err(Failure::Input(format!("--k must lie in 1..={n}, got {kk}")));
    }
    Ok(())
}

fn write_text(path: Option<&Path>, text: &str) -> Outcome<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn emit(value: &Value, path: Option<&Path>) -> Outcome<()> {
    let mut text = serde_json::to_string_pretty(value).expect("json value serializes");
    text.push('\n');
    write_text(path, &text)
}

fn strings(v: &[Q]) -> Vec<String> {
    v.iter().map(|q| q.to_string()).collect()
}

fn dispatch(cli: Cli) -> Outcome<()> {
    let s = settings(&cli)?;
    match &cli.command {
        Command::Subdivide { input, depth, output } => {
            let k = load(input)?;
            let sd = subdivide_iter(&k, *depth, s.caps.max_simplices)?;
            let mut text = sd.to_json_string();
            text.push('\n');
            write_text(output.as_deref(), &text)
        }
        Command::Betti { input } => {
            let k = load(input)?;
            let b = randsub::homology::betti_capped(&k, s.caps.max_simplices)?;
            emit(&json!({ "betti": b.0, "chi": b.chi() }), None)
        }
        Command::Vbuild { input, k: kk, epsilon, depth, out } => {
            let k = load(input)?;
            check_k(&k, *kk)?;
            let base = Arc::new(subdivide_iter(&k, *depth, s.caps.max_simplices)?);
            let host = Arc::new(barycentric_subdivide_capped(&base, s.caps.max_simplices)?);
            let eps = Cochain::from_hex(kk - 1, base.count(kk - 1), epsilon)?;
            let v = build_v(&host, &eps, *kk)?;
            let b = v.betti();
            let vc = v.complex().with_name(format!("V({})", base.name()));
            if let Some(p) = out {
                fs::write(p, vc.to_json_string() + "\n")?;
            }
            emit(
                &json!({
                    "artifact_version": randsub::ARTIFACT_VERSION,
                    "config": s.echo,
                    "host": host.complex().name(),
                    "k": kk,
                    "epsilon_hex": eps.to_hex(),
                    "f_vector": v.f_vector(),
                    "betti": b.trimmed().0,
                    "chi": v.euler_characteristic(),
                }),
                None,
            )
        }
        Command::Muz { nu, k, p, route } => {
            let nu = nu_arg(nu)?;
            let r: MuRoute = route.parse()?;
            let m = mu_z(&nu, *k, *p, r, s.caps.max_enum_bits)?;
            emit(&json!({ "mu_z": m.to_string() }), None)
        }
        Command::Expect { input, k: kk, nu, what } => {
            let k = load(input)?;
            check_k(&k, *kk)?;
            let nu = nu_arg(nu)?;
            let value = match what.as_str() {
                "face" => json!({ "E_face": expected_face_polynomial(&k, *kk, &nu)?.to_strings() }),
                "chi" => json!({ "E_chi": expected_chi(&k, *kk, &nu)?.to_string() }),
                "cw" => {
                    if *kk != 1 {
                        return Err(Failure::Input("--what cw needs --k 1".into()));
                    }
                    json!({ "E_cw": expected_cw_polynomial(&k, &nu).to_strings() })
                }
                "blocks" => json!({ "E_blocks": strings(&expected_block_counts(&k, *kk, &nu)?) }),
                _ => {
                    let c = c_plus(k.dim().unwrap_or(0), *kk, &nu)?;
                    json!({ "c_plus": strings(&c.c), "alternating_sum": c.alternating_sum().to_string() })
                }
            };
            emit(&value, None)
        }
        Command::Sample { run: r, trials, seed } => {
            experiment(r, Mode::MonteCarlo { trials: *trials }, seed.unwrap_or(s.seed), &s)
        }
        Command::Enumerate { run: r } => experiment(r, Mode::Exhaustive, 0, &s),
        Command::Converge { input, k: kk, nu, dmax, trials, seed, out, csv } => {
            let k = load(input)?;
            check_k(&k, *kk)?;
            let nu = nu_arg(nu)?;
            let mc = trials.map(|t| McColumns { trials: t, seed: seed.unwrap_or(s.seed) });
            let table = convergence_table(&k, *kk, &nu, *dmax, mc, s.caps)?;
            if let Some(p) = csv {
                fs::write(p, table.to_csv())?;
            }
            let mut value = serde_json::to_value(&table).expect("table serializes");
            value["artifact_version"] = json!(randsub::ARTIFACT_VERSION);
            value["config"] = s.echo.clone();
            emit(&value, out.as_deref())
        }
        Command::Qcoeff { n, eval } => {
            let q = q_coefficients(*n)?;
            let mut value = json!({ "q": strings(&q.q) });
            if let Some(t) = eval {
                value["value"] = json!(q.eval(&parse_q(t)?).to_string());
            }
            emit(&value, None)
        }
        Command::Gallery(g) => gallery(g, &s),
    }
}

fn experiment(r: &RunArgs, mode: Mode, seed: u64, s: &Settings) -> Outcome<()> {
    let k = load(&r.input)?;
    check_k(&k, r.k)?;
    let spec = ExperimentSpec {
        complex: k,
        k: r.k,
        nu: nu_arg(&r.nu)?,
        depth: r.depth,
        mode,
        seed,
        census: r.census,
        caps: s.caps,
    };
    let mut report = run(&spec)?;
    let mut echo = s.echo.clone();
    echo["seed"] = json!(seed);
    report.config = Some(echo);
    if let Some(p) = &r.csv {
        fs::write(p, report.to_csv())?;
    }
    write_text(r.out.as_deref(), &(report.to_json() + "\n"))
}

fn gallery(g: &GalleryArgs, s: &Settings) -> Outcome<()> {
    let c: SurfaceConstruction = match g.target {
        GalleryTarget::Sphere => sphere_epsilon()?,
        GalleryTarget::Holes { r } => holed_sphere_epsilon(r)?,
        GalleryTarget::Surface { genus, depth } => genus_surface_epsilon(genus, depth)?,
    };
    let mut value = json!({
        "artifact_version": randsub::ARTIFACT_VERSION,
        "config": s.echo,
        "target": c.target.descriptor(),
        "depth": c.depth,
        "host": format!("Sd({})", c.base.name()),
        "epsilon_hex": c.epsilon.to_hex(),
    });
    if g.verify || g.out.is_some() {
        let v = c.build_v()?;
        if let Some(p) = &g.out {
            let vc = v.complex().with_name(c.target.descriptor());
            fs::write(p, vc.to_json_string() + "\n")?;
        }
    }
    if g.verify {
        let rep = verify_construction(&c)?;
        let passed = rep.passed;
        let diagnostic = rep.diagnostic.clone();
        value["verification"] = serde_json::to_value(&rep).expect("report serializes");
        emit(&value, None)?;
        if !passed {
            return Err(Failure::Lib(Error::VerificationFailed(diagnostic.unwrap_or_default())));
        }
        return Ok(());
    }
    emit(&value, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(toml::from_str::<ConfigFile>("thread = 2").is_err());
        let c: ConfigFile = toml::from_str("threads = 2\nseed = 9\nmax_enum_bits = 12").unwrap();
        assert_eq!((c.threads, c.seed, c.max_enum_bits), (Some(2), Some(9), Some(12)));
    }
}
