//! The `ncid` command line: every subcommand prints one JSON document on
//! standard output and maps its outcome to an exit code.

use std::fs;

use clap::{Parser, Subcommand, ValueEnum};
use ncid::algebra::CMatrix;
use ncid::certify::{certify, levy_hincin_extract, DEFAULT_TOL};
use ncid::convolution::{boolean_convolve, cfree_convolve, free_convolve, root};
use ncid::cumulants::{cumulants_of, CumulantKind};
use ncid::distribution::{bernoulli, generate_realizable, point_mass, semicircle};
use ncid::json;
use ncid::ncfun::{check_cauchy_relation, check_identity, check_nc_function_axioms, tensor_compatibility, Identity, NilpotentPoint, Transform};
use ncid::{AlgebraPair, Error, MomentFunctional};
use num_complex::Complex64;
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_FAILED: i32 = 2;

/// Residual bound for the functional equations, axioms and amplification checks.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Residual bound for the Laurent form of the Cauchy relation.
pub const CAUCHY_TOL: f64 = 1e-9;

const PROBE_SCALE: f64 = 0.7;
const CAUCHY_LAMBDA: Complex64 = Complex64::new(2.0, 0.0);

#[derive(Parser, Debug)]
#[command(name = "ncid", about = "Operator-valued cumulants, convolutions and divisibility certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Boolean,
    Free,
    Cfree,
}

impl From<Kind> for CumulantKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Boolean => CumulantKind::Boolean,
            Kind::Free => CumulantKind::Free,
            Kind::Cfree => CumulantKind::CFree,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Preset {
    Semicircle,
    Bernoulli,
    Delta,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum Check {
    #[value(name = "B")]
    B,
    #[value(name = "R")]
    R,
    #[value(name = "cR")]
    CR,
    #[value(name = "G")]
    G,
    #[value(name = "axioms")]
    Axioms,
    #[value(name = "tensor")]
    Tensor,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Seeded realizable distribution over `M_k ⊆ M_d`, or a scalar preset.
    Gen {
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long)]
        trunc: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Ambient dimension of the representing matrix model.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        /// Atom of the `delta` preset.
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        at: f64,
    },
    Cumulants {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long = "in")]
        input: String,
        #[arg(long)]
        aux: Option<String>,
    },
    /// c-free arguments are `{"mu", "nu"}` pair files.
    Convolve {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(required = true, num_args = 2..)]
        files: Vec<String>,
    },
    Root {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        n: usize,
        input: String,
        #[arg(long)]
        aux: Option<String>,
    },
    Certify {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        degree: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        input: String,
        #[arg(long)]
        aux: Option<String>,
    },
    Check {
        #[arg(long, value_enum)]
        identity: Check,
        #[arg(long)]
        order: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        input: String,
        #[arg(long)]
        aux: Option<String>,
    },
    Extract {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        input: String,
        #[arg(long)]
        aux: Option<String>,
    },
}

/// Runs one command line (without the program name) and returns the exit code
/// and the JSON text for standard output.
pub fn run<I, S>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv = std::iter::once("ncid".into()).chain(args.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            return (EXIT_OK, e.to_string());
        }
        Err(e) => {
            let v = json!({ "error": "Usage", "message": e.to_string() });
            return (EXIT_INPUT, json::to_string(&v));
        }
    };
    match execute(cli.command) {
        Ok((code, v)) => (code, json::to_string(&v)),
        Err(e) => (EXIT_INPUT, json::to_string(&json::error_value(&e))),
    }
}

fn read_value(path: &str) -> Result<Value, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{path}: {e}")))?;
    json::parse(&text)
}

/// `A` alone, `A` as a pair file, or `A` with `--aux`.
fn load(input: &str, aux: Option<&str>) -> Result<(MomentFunctional, Option<MomentFunctional>), Error> {
    let (mu, nu) = json::distributions_from(&read_value(input)?)?;
    match aux {
        Some(path) => Ok((mu, Some(json::functional_from(&read_value(path)?)?))),
        None => Ok((mu, nu)),
    }
}

fn need_nu(nu: Option<&MomentFunctional>) -> Result<&MomentFunctional, Error> {
    nu.ok_or_else(|| Error::Parse("c-free input needs ν (pair file or --aux)".into()))
}

fn execute(command: Command) -> Result<(i32, Value), Error> {
    match command {
        Command::Gen { k, d, trunc, seed, m, preset, at } => {
            let mu = match preset {
                Some(Preset::Semicircle) => semicircle(trunc),
                Some(Preset::Bernoulli) => bernoulli(trunc),
                Some(Preset::Delta) => point_mass(at, trunc),
                None => {
                    if k == 0 || d % k != 0 {
                        return Err(Error::InvalidEmbedding(format!("k = {k} must divide d = {d}")));
                    }
                    let pair = AlgebraPair::ampliation(k, d / k);
                    generate_realizable(seed, &pair, trunc, m.unwrap_or(2 * d))?
                }
            };
            Ok((EXIT_OK, json::functional_value(&mu)))
        }
        Command::Cumulants { kind, input, aux } => {
            let (mu, nu) = load(&input, aux.as_deref())?;
            let family = cumulants_of(kind.into(), &mu, nu.as_ref())?;
            Ok((EXIT_OK, json::cumulants_value(&family)))
        }
        Command::Convolve { kind, files } => {
            let docs = files.iter().map(|f| read_value(f)).collect::<Result<Vec<_>, _>>()?;
            match kind {
                Kind::Boolean | Kind::Free => {
                    let mus = docs.iter().map(json::functional_from).collect::<Result<Vec<_>, _>>()?;
                    let out = if matches!(kind, Kind::Boolean) { boolean_convolve(&mus)? } else { free_convolve(&mus)? };
                    Ok((EXIT_OK, json::functional_value(&out)))
                }
                Kind::Cfree => {
                    let pairs = docs
                        .iter()
                        .map(|v| match json::distributions_from(v)? {
                            (mu, Some(nu)) => Ok((mu, nu)),
                            _ => Err(Error::Parse("c-free convolution takes {\"mu\", \"nu\"} pair files".into())),
                        })
                        .collect::<Result<Vec<_>, Error>>()?;
                    let (mu, nu) = cfree_convolve(&pairs)?;
                    Ok((EXIT_OK, json::pair_value(&mu, &nu)))
                }
            }
        }
        Command::Root { kind, n, input, aux } => {
            let (mu, nu) = load(&input, aux.as_deref())?;
            let out = match root(kind.into(), &mu, nu.as_ref(), n)? {
                (m, Some(v)) => json::pair_value(&m, &v),
                (m, None) => json::functional_value(&m),
            };
            Ok((EXIT_OK, out))
        }
        Command::Certify { kind, degree, tol, input, aux } => {
            let (mu, nu) = load(&input, aux.as_deref())?;
            let certs = certify(kind.into(), &mu, nu.as_ref(), degree, tol)?;
            let code = if certs.iter().all(|c| c.pass) { EXIT_OK } else { EXIT_FAILED };
            let out = match certs.as_slice() {
                [single] => json::certificate_value(single),
                many => Value::Array(many.iter().map(json::certificate_value).collect()),
            };
            Ok((code, out))
        }
        Command::Check { identity, order, seed, input, aux } => {
            let (mu, nu) = load(&input, aux.as_deref())?;
            check(identity, order, seed, &mu, nu.as_ref())
        }
        Command::Extract { kind, tol, input, aux } => {
            let (mu, nu) = load(&input, aux.as_deref())?;
            let kind: CumulantKind = kind.into();
            match levy_hincin_extract(kind, &mu, nu.as_ref(), tol) {
                Ok(data) => Ok((EXIT_OK, json::levy_value(kind, &data))),
                Err(Error::CertificateFailed { .. }) => {
                    let certs = certify(kind, &mu, nu.as_ref(), mu.truncation() / 2, tol)?;
                    let failed: Vec<Value> = certs.iter().filter(|c| !c.pass).map(json::certificate_value).collect();
                    Ok((EXIT_FAILED, json!({ "kind": kind.name(), "refused": true, "certificates": failed })))
                }
                Err(e) => Err(e),
            }
        }
    }
}

fn probe_value(kind: &str, k: usize, size: usize, seed: u64) -> Value {
    json!({ "kind": kind, "k": k, "size": size, "seed": seed, "scale": PROBE_SCALE })
}

/// Invertible upper-triangular similarity with a dominant diagonal.
fn upper_similarity(m: usize, seed: u64) -> CMatrix {
    let mut r = ncid::rng::seeded(seed);
    let mut s = ncid::rng::matrix(&mut r, m, m, 0.5);
    for i in 0..m {
        for j in 0..i {
            s[(i, j)] = Complex64::new(0.0, 0.0);
        }
        s[(i, i)] += Complex64::new(1.0 + i as f64, 0.0);
    }
    s
}

/// Transforms defined for the input: `M`, `B`, `R` when `μ` is `B`-valued, `ᶜR` with `ν`.
fn transforms(mu: &MomentFunctional, nu: Option<&MomentFunctional>) -> Result<Vec<(&'static str, Transform)>, Error> {
    let mut out = vec![("M", Transform::moment(mu)), ("B", Transform::b(mu)?)];
    if mu.is_b_valued() {
        out.push(("R", Transform::r(mu)?));
    }
    if let Some(nu) = nu {
        out.push(("cR", Transform::cr(mu, nu)?));
    }
    Ok(out)
}

fn check(which: Check, order: usize, seed: u64, mu: &MomentFunctional, nu: Option<&MomentFunctional>) -> Result<(i32, Value), Error> {
    let k = mu.pair().k();
    let size = order + 1;
    let (name, probe, residual, tol) = match which {
        Check::B | Check::R | Check::CR => {
            let (name, id) = match which {
                Check::B => ("B", Identity::B),
                Check::R => ("R", Identity::R),
                _ => ("cR", Identity::CR),
            };
            let b = NilpotentPoint::random(seed, k, size, PROBE_SCALE);
            let nu = if id == Identity::CR { Some(need_nu(nu)?) } else { None };
            (name, probe_value("random", k, size, seed), check_identity(id, mu, nu, &b)?, IDENTITY_TOL)
        }
        Check::G => {
            let c = NilpotentPoint::random(seed, k, size, PROBE_SCALE);
            let mut probe = probe_value("random", k, size, seed);
            probe["lambda"] = json::complex_value(CAUCHY_LAMBDA);
            ("G", probe, check_cauchy_relation(mu, order, CAUCHY_LAMBDA, &c)?, CAUCHY_TOL)
        }
        Check::Axioms => {
            let a = NilpotentPoint::random(seed, k, size, PROBE_SCALE);
            let b = NilpotentPoint::random(seed.wrapping_add(1), k, order.max(1), PROBE_SCALE);
            let s = upper_similarity(size, seed);
            let mut worst: f64 = 0.0;
            for (_, f) in transforms(mu, nu)? {
                let (sum, sim) = check_nc_function_axioms(&f, &a, &b, &s)?;
                worst = worst.max(sum).max(sim);
            }
            let probe = json!({ "a": probe_value("random", k, size, seed), "b": probe_value("random", k, order.max(1), seed.wrapping_add(1)), "similarity": "upper-triangular" });
            ("axioms", probe, worst, IDENTITY_TOL)
        }
        Check::Tensor => {
            let mut worst = tensor_compatibility(CumulantKind::Boolean, mu, None, order)?;
            if mu.is_b_valued() {
                worst = worst.max(tensor_compatibility(CumulantKind::Free, mu, None, order)?);
            }
            if let Some(nu) = nu {
                worst = worst.max(tensor_compatibility(CumulantKind::CFree, mu, Some(nu), order)?);
            }
            ("tensor", json!({ "kind": "amplification", "n": order }), worst, IDENTITY_TOL)
        }
    };
    let pass = residual <= tol;
    let report = json!({ "identity": name, "probe": probe, "residual": residual, "pass": pass });
    Ok((if pass { EXIT_OK } else { EXIT_FAILED }, report))
}

/// Applies `NCID_THREADS` to the global thread pool.
pub fn configure_threads() {
    if let Some(n) = std::env::var("NCID_THREADS").ok().and_then(|s| s.parse::<usize>().ok()).filter(|&n| n > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}
