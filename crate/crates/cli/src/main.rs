use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rlwe_forge::attacks::{
    chi_square_attack, default_alpha, dual_decision_attack, modulus_switch_experiment, ramified_decision_attack,
    search_attack, vulnerability_search, AttackReport, BinChoice, RamifiedBinning, ScanBudget,
};
use rlwe_forge::io::{instance_hash, read_dual, read_json, read_samples, write_dual, write_json, write_samples, Header};
use rlwe_forge::rlwe::{generate_uniform_samples, DualParams, FieldSpec, InstanceParams, RlweInstance, RlweSample};
use rlwe_forge::stats::success_lower_bound;
use rlwe_forge::{Error, ResidueContext, SecretMode, SigmaMode};
use serde::de::DeserializeOwned;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "rlwe-forge", version, about = "RLWE instance generation and statistical attacks")]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an instance file and a sample file.
    Gen(GenArgs),
    /// Run an attack and emit a JSON report.
    Attack {
        #[command(subcommand)]
        kind: AttackKind,
    },
    /// Sweep candidate fields for vulnerable (m, H, q) and emit CSV rows.
    Scan(ScanArgs),
    /// Success-probability lower bound as a function of Delta, as CSV.
    Curve(CurveArgs),
}

fn kebab<T: DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

#[derive(Args, Clone, Default)]
struct FieldArgs {
    /// Conductor of the cyclotomic field (odd, squarefree).
    #[arg(long)]
    m: Option<u64>,
    /// Generators of H, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    gens: Vec<i64>,
    /// Prime p for Q(zeta_p).
    #[arg(long)]
    p: Option<u64>,
}

impl FieldArgs {
    fn spec(&self) -> Result<FieldSpec> {
        match (self.m, self.p) {
            (Some(m), None) => {
                let gens = if self.gens.is_empty() { vec![1] } else { self.gens.clone() };
                Ok(FieldSpec::Subgroup { m, h_gens: gens })
            }
            (None, Some(p)) => Ok(FieldSpec::PrimeCyclotomic { p }),
            _ => bail!("give exactly one of --m or --p"),
        }
    }
}

#[derive(Args, Clone)]
struct ParamArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Modulus (defaults to p for Q(zeta_p)).
    #[arg(long)]
    q: Option<u64>,
    #[arg(long)]
    sigma0: Option<f64>,
    /// How sigma0 becomes the sampler width.
    #[arg(long, value_parser = kebab::<SigmaMode>, default_value = "geometric-mean")]
    sigma_mode: SigmaMode,
    #[arg(long, value_parser = kebab::<SecretMode>, default_value = "uniform")]
    secret_mode: SecretMode,
    #[arg(long)]
    seed: Option<u64>,
}

impl ParamArgs {
    fn params(&self) -> Result<InstanceParams> {
        let field = self.field.spec()?;
        let q = match (&field, self.q) {
            (_, Some(q)) => q,
            (FieldSpec::PrimeCyclotomic { p }, None) => *p,
            _ => bail!("--q is required with --m"),
        };
        Ok(InstanceParams {
            field,
            q,
            sigma0: self.sigma0.ok_or_else(|| anyhow!("--sigma0 is required"))?,
            sigma_mode: self.sigma_mode,
            secret_mode: self.secret_mode,
            seed: self.seed.ok_or_else(|| anyhow!("--seed is required"))?,
        })
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Dual width r (Q(zeta_p) only); writes observations instead of samples.
    #[arg(long, conflicts_with = "sigma0")]
    r: Option<f64>,
    #[arg(long)]
    count: usize,
    /// Uniform control samples of the same shape.
    #[arg(long)]
    uniform: bool,
    #[arg(long, default_value = "instance.json")]
    instance_out: PathBuf,
    #[arg(long, default_value = "samples.csv")]
    samples_out: PathBuf,
}

#[derive(Args, Clone)]
struct SourceArgs {
    /// Instance JSON; samples are read from --samples or generated.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, requires = "instance")]
    samples: Option<PathBuf>,
    #[command(flatten)]
    params: ParamArgs,
    /// Number of samples to generate when no sample file is given.
    #[arg(long)]
    count: Option<usize>,
    /// Attack uniform samples of the same shape instead.
    #[arg(long)]
    uniform: bool,
}

struct Loaded {
    params: InstanceParams,
    samples: Vec<RlweSample>,
    uniform: bool,
}

impl SourceArgs {
    fn params(&self) -> Result<InstanceParams> {
        match &self.instance {
            Some(p) => read_json(p).with_context(|| format!("reading {}", p.display())),
            None => self.params.params(),
        }
    }

    fn load(&self, default_count: impl FnOnce(&InstanceParams) -> usize) -> Result<Loaded> {
        let params = self.params()?;
        if let Some(path) = &self.samples {
            let (header, samples) = read_samples(path).with_context(|| format!("reading {}", path.display()))?;
            header.check_instance(&instance_hash(&params)?)?;
            return Ok(Loaded { params, samples, uniform: header.kind == "uniform" });
        }
        let count = self.count.unwrap_or_else(|| default_count(&params));
        let samples = if self.uniform {
            let n = params.field.descriptor()?.degree_n;
            generate_uniform_samples(n, params.q, count, params.seed)
        } else {
            RlweInstance::new(params.clone())?.generate_samples(count)
        };
        Ok(Loaded { params, samples, uniform: self.uniform })
    }
}

#[derive(Args)]
struct Common {
    /// Chi-square confidence level (default depends on the attack).
    #[arg(long)]
    alpha: Option<f64>,
    /// Report path (default: stdout).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Subcommand)]
enum AttackKind {
    /// Algorithm 1 against one prime above q.
    Decision {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        common: Common,
        /// Coset representative selecting the prime.
        #[arg(long, default_value_t = 1)]
        twist: u64,
        #[arg(long, value_parser = kebab::<BinChoice>, default_value = "per-element")]
        bins: BinChoice,
        /// Stop at the first rejected guess.
        #[arg(long)]
        early_exit: bool,
        /// Include every guess's chi-square value.
        #[arg(long)]
        chi2: bool,
    },
    /// Full secret recovery, one decision attack per prime above q.
    Search {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = kebab::<BinChoice>, default_value = "per-element")]
        bins: BinChoice,
        #[arg(long)]
        early_exit: bool,
    },
    /// Decision attack for Q(zeta_p), q = p, through (1 - zeta_p).
    Ramified {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = kebab::<RamifiedBinning>, default_value = "coarse")]
        binning: RamifiedBinning,
    },
    /// Circle test on dual observations rho(b') mod p.
    Dual {
        #[arg(long)]
        p: Option<u64>,
        /// Coefficient width sqrt(p) * r.
        #[arg(long, conflicts_with = "r")]
        r_sqrtp: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Dual instance JSON, with --observations.
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long, requires = "instance")]
        observations: Option<PathBuf>,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Switch samples from q down to a smaller prime and attack there.
    Modswitch {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        common: Common,
        /// Target modulus.
        #[arg(long)]
        to: u64,
        /// Width of the rounding Gaussian.
        #[arg(long, default_value_t = 0.05)]
        tau: f64,
        #[arg(long, value_parser = kebab::<BinChoice>, default_value = "per-element")]
        bins: BinChoice,
    },
}

#[derive(Args)]
struct ScanArgs {
    /// Candidate as m:g1,g2,... (repeatable).
    #[arg(long = "candidate")]
    candidates: Vec<String>,
    /// File with one candidate per line, `m g1 g2 ...`; '#' starts a comment.
    #[arg(long)]
    candidates_file: Option<PathBuf>,
    /// Primes q with q_lo < q < q_hi.
    #[arg(long, default_value_t = 2)]
    q_lo: u64,
    #[arg(long, default_value_t = 200)]
    q_hi: u64,
    #[arg(long, default_value_t = 2)]
    f: u32,
    #[arg(long, default_value_t = 1.0)]
    sigma0: f64,
    #[arg(long)]
    alpha: Option<f64>,
    /// Only estimate; never run the attack.
    #[arg(long)]
    estimate_only: bool,
    #[arg(long, default_value_t = 100_000)]
    error_samples: usize,
    #[arg(long, default_value_t = 50_000)]
    max_attack_samples: u64,
    #[arg(long, default_value_t = 600.0)]
    max_seconds: f64,
    #[arg(long, value_parser = kebab::<BinChoice>, default_value = "per-element")]
    bins: BinChoice,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CurveArgs {
    /// Number of guesses N.
    #[arg(long)]
    n_guesses: u64,
    #[arg(long)]
    samples: u64,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    delta_max: f64,
    #[arg(long, default_value_t = 50)]
    steps: usize,
}

fn emit_report(report: &AttackReport, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => write_json(p, report)?,
        None => {
            let mut out = std::io::stdout().lock();
            serde_json::to_writer_pretty(&mut out, report)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

fn sample_header(kind: &str, params: &InstanceParams, n: usize, count: usize) -> Result<Header> {
    Ok(Header::new(
        kind,
        &[
            ("n", n.to_string()),
            ("q", params.q.to_string()),
            ("count", count.to_string()),
            ("instance", instance_hash(params)?),
        ],
    ))
}

fn cmd_gen(a: &GenArgs) -> Result<()> {
    if let Some(r) = a.r {
        let p = a.params.field.p.ok_or_else(|| anyhow!("--r needs --p"))?;
        let seed = a.params.seed.ok_or_else(|| anyhow!("--seed is required"))?;
        let dp = DualParams { p, r, seed };
        let obs = dp.generate(a.count)?;
        let hash = instance_hash(&dp)?;
        write_json(&a.instance_out, &dp)?;
        let header = Header::new("dual", &[("p", p.to_string()), ("count", a.count.to_string()), ("instance", hash)]);
        write_dual(&a.samples_out, &header, &obs)?;
        println!("dual p={p} r={r} coefficient width sqrt(p)*r={:.6}", (p as f64).sqrt() * r);
        return Ok(());
    }
    let params = a.params.params()?;
    let inst = RlweInstance::new(params.clone())?;
    let n = inst.n;
    let (kind, samples) = if a.uniform {
        ("uniform", generate_uniform_samples(n, params.q, a.count, params.seed))
    } else {
        ("samples", inst.generate_samples(a.count))
    };
    write_json(&a.instance_out, &params)?;
    write_samples(&a.samples_out, &sample_header(kind, &params, n, a.count)?, &samples)?;
    let gs = inst.geometry.sampler.gs_norms();
    let gm = (gs.iter().map(|x| x.ln()).sum::<f64>() / n as f64).exp();
    let (lo, hi) = gs.iter().fold((f64::INFINITY, 0f64), |(l, h), &x| (l.min(x), h.max(x)));
    println!("n={n} q={} sigma0={} sigma={:.6}", params.q, params.sigma0, inst.sigma);
    println!("|d_K|^(1/2n)={:.6}", (inst.geometry.log_disc / (2.0 * n as f64)).exp());
    println!("gram-schmidt norms: min={lo:.6} max={hi:.6} geometric-mean={gm:.6}");
    println!("precision={} bits, wrote {} {kind} rows", inst.geometry.precision_bits, a.count);
    Ok(())
}

/// q^f for the pinned prime, used for default sample counts.
fn residue_field_size(p: &InstanceParams) -> usize {
    let f = p.field.descriptor().and_then(|h| h.residue_degree(p.q)).unwrap_or(1);
    (p.q as usize).saturating_pow(f)
}

fn planted_residue(params: &InstanceParams, ctx: &ResidueContext, twist: u64) -> Result<Vec<u64>> {
    let inst = RlweInstance::new(params.clone())?;
    let s: Vec<i64> = inst.secret.iter().map(|&x| x as i64).collect();
    Ok(ctx.subfield.coords(ctx.reduce_to_sub(&s, &ctx.twisted_sub_vector(twist)?)))
}

fn cmd_attack(kind: &AttackKind) -> Result<()> {
    match kind {
        AttackKind::Decision { source, common, twist, bins, early_exit, chi2 } => {
            let ld = source.load(|p| 5 * residue_field_size(p))?;
            let h = ld.params.field.descriptor()?;
            let ctx = ResidueContext::build(&h, ld.params.q)?;
            let alpha = common.alpha.unwrap_or_else(|| default_alpha(ctx.subfield.size));
            let mut r = chi_square_attack(&ctx, &ld.samples, *twist, alpha, &bins.build(&ctx), *early_exit)?;
            if !chi2 {
                r.chi2_by_guess = None;
            }
            r.seed = Some(ld.params.seed);
            if !ld.uniform {
                let planted = planted_residue(&ld.params, &ctx, *twist)?;
                r.extra = serde_json::json!({ "matches_planted": r.guess.as_ref() == Some(&planted) });
            }
            r.params = serde_json::json!({ "instance": ld.params, "twist": twist, "uniform_input": ld.uniform, "attack": r.params });
            emit_report(&r, common.report.as_deref())
        }
        AttackKind::Search { source, common, bins, early_exit } => {
            let ld = source.load(|p| 10 * residue_field_size(p))?;
            let h = ld.params.field.descriptor()?;
            let ctx = ResidueContext::build(&h, ld.params.q)?;
            let g = h.prime_twists(ld.params.q)?.len();
            let alpha = common.alpha.unwrap_or(1.0 - 1.0 / (100.0 * (ctx.subfield.size * g) as f64));
            let out = search_attack(&ctx, &ld.samples, alpha, &bins.build(&ctx), *early_exit)?;
            let mut r = out.report;
            r.seed = Some(ld.params.seed);
            if !ld.uniform {
                let planted = RlweInstance::new(ld.params.clone())?.secret;
                r.extra = serde_json::json!({ "matches_planted": planted == out.secret });
            }
            r.params = serde_json::json!({ "instance": ld.params, "attack": r.params });
            emit_report(&r, common.report.as_deref())
        }
        AttackKind::Ramified { source, common, binning } => {
            let ld = source.load(|p| 5 * p.q as usize)?;
            let p = match ld.params.field {
                FieldSpec::PrimeCyclotomic { p } if ld.params.q == p => p,
                _ => bail!("the ramified attack needs Q(zeta_p) with q = p"),
            };
            let alpha = common.alpha.unwrap_or(1.0 - 1.0 / (100.0 * p as f64));
            let mut r = ramified_decision_attack(p, &ld.samples, alpha, *binning)?;
            r.seed = Some(ld.params.seed);
            r.chi2_by_guess = None;
            r.params = serde_json::json!({ "instance": ld.params, "uniform_input": ld.uniform });
            emit_report(&r, common.report.as_deref())
        }
        AttackKind::Dual { p, r_sqrtp, r, count, seed, instance, observations, bins, common } => {
            let (dp, obs) = match (instance, observations) {
                (Some(ip), Some(op)) => {
                    let dp: DualParams = read_json(ip)?;
                    let (header, obs) = read_dual(op)?;
                    header.check_instance(&instance_hash(&dp)?)?;
                    (dp, obs)
                }
                (Some(ip), None) => {
                    let dp: DualParams = read_json(ip)?;
                    let obs = dp.generate(count.unwrap_or(5 * dp.p as usize))?;
                    (dp, obs)
                }
                _ => {
                    let p = p.ok_or_else(|| anyhow!("--p is required"))?;
                    let r = match (r, r_sqrtp) {
                        (Some(r), None) => *r,
                        (None, Some(w)) => w / (p as f64).sqrt(),
                        _ => bail!("give --r or --r-sqrtp"),
                    };
                    let dp = DualParams { p, r, seed: seed.ok_or_else(|| anyhow!("--seed is required"))? };
                    let obs = dp.generate(count.unwrap_or(5 * p as usize))?;
                    (dp, obs)
                }
            };
            let alpha = common.alpha.unwrap_or(1.0 - 1.0 / (10.0 * *bins as f64));
            let mut rep = dual_decision_attack(dp.p, &obs, *bins, alpha)?;
            rep.seed = Some(dp.seed);
            rep.params = serde_json::json!({ "instance": dp, "nbins": bins });
            emit_report(&rep, common.report.as_deref())
        }
        AttackKind::Modswitch { source, common, to, tau, bins } => {
            let params = source.params()?;
            let count = source.count.ok_or_else(|| anyhow!("--count is required"))?;
            let inst = RlweInstance::new(params.clone())?;
            let ctx = ResidueContext::build(inst.descriptor(), *to)?;
            let alpha = common.alpha.unwrap_or(1.0 - 1.0 / (100.0 * ctx.subfield.size as f64));
            let mut out = modulus_switch_experiment(&inst, *to, *tau, count, alpha, *bins)?;
            out.attack.seed = Some(params.seed);
            emit_report(&out.attack, common.report.as_deref())
        }
    }
}

fn parse_candidate(s: &str) -> Result<(u64, Vec<i64>)> {
    let (m, gens) = s.split_once(':').unwrap_or((s, "1"));
    let m = m.trim().parse().with_context(|| format!("bad conductor in {s}"))?;
    let gens = gens.split(',').map(|g| g.trim().parse::<i64>()).collect::<std::result::Result<_, _>>()?;
    Ok((m, gens))
}

fn cmd_scan(a: &ScanArgs) -> Result<()> {
    let mut cands = a.candidates.iter().map(|c| parse_candidate(c)).collect::<Result<Vec<_>>>()?;
    if let Some(path) = &a.candidates_file {
        for line in std::fs::read_to_string(path)?.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace().map(str::parse::<i64>);
            let m = it.next().ok_or_else(|| anyhow!("empty line"))?? as u64;
            let gens = it.collect::<std::result::Result<Vec<_>, _>>()?;
            cands.push((m, if gens.is_empty() { vec![1] } else { gens }));
        }
    }
    let budget = ScanBudget {
        error_samples: a.error_samples,
        max_attack_samples: a.max_attack_samples,
        estimate_only: a.estimate_only,
        max_seconds: a.max_seconds,
        bins: a.bins,
        ..Default::default()
    };
    let rows = vulnerability_search(&cands, a.q_lo, a.q_hi, a.f, a.sigma0, a.alpha, &budget, a.seed);
    let sink: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(sink);
    w.write_record(["m", "gens", "n", "q", "f", "sigma0", "delta_hat", "delta_floor", "samples", "bound", "status", "seconds", "note"])?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_curve(a: &CurveArgs) -> Result<()> {
    let alpha = a.alpha.unwrap_or_else(|| default_alpha(a.n_guesses as usize));
    let mut out = std::io::stdout().lock();
    writeln!(out, "delta,bound")?;
    for i in 0..=a.steps {
        let d = a.delta_max * i as f64 / a.steps as f64;
        writeln!(out, "{d},{}", success_lower_bound(a.n_guesses, a.samples, d, alpha)?)?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(k).build_global()?;
    }
    match &cli.cmd {
        Command::Gen(a) => cmd_gen(a),
        Command::Attack { kind } => cmd_attack(kind),
        Command::Scan(a) => cmd_scan(a),
        Command::Curve(a) => cmd_curve(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::InsufficientSamples { .. }) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
