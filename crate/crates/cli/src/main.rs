//! `qds`: key simulation, signing, verification, attacks, bounds, rate
//! sweeps and postprocessing benchmarks.
//!
//! Exit codes: 0 success or accept, 1 verification reject, 2 key misuse,
//! 3 configuration error, 4 infeasible parameters.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qds_core::bounds::{epsilon_budget, epsilon_forgery, required_group_size, DEFAULT_EPS_COR, DEFAULT_EPS_PRIME};
use qds_core::error::{KgpError, ProtocolError};
use qds_core::hash::Scheme;
use qds_core::kgp::{
    figure_preset, optimized_rate, parse_config, simulate, sweep, Curve, KgpProtocol, RatePoint, RateScheme,
    SearchSettings, SimConfig,
};
use qds_core::par::derive_seed;
use qds_core::postproc::{bench_csv, benchmark_postproc, BenchSettings};
use qds_core::protocol::{
    alice_sign, append_journal, group_keys, load_key_groups, parse_key_file, run_verification, simulate_forgery,
    write_key_file, Frame, FrameKind, KeyGroups, MemoryTransport, PermutationSeeds, RawKeyPair, Role,
    SignaturePacket, Transport,
};
use qds_core::{BitString, ExecMode};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

const RNG_NAME: &str = "chacha20";

#[derive(Parser)]
#[command(name = "qds", version, about = "One-time universal hashing signatures with imperfect keys")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate key generation and write key files for Alice, Bob and Charlie.
    KeygenSim(KeygenArgs),
    /// Sign a message file with one of Alice's key groups.
    Sign(SignArgs),
    /// Run Bob's and Charlie's verification of a packet.
    Verify(VerifyArgs),
    /// Monte-Carlo forgery attack against perfect keys.
    Attack(AttackArgs),
    /// Security calculator; prints key=value lines.
    Bounds(BoundsArgs),
    /// Signature-rate sweeps as CSV.
    Rates(RatesArgs),
    /// Classical postprocessing tools.
    #[command(subcommand)]
    Postproc(PostprocCommand),
}

#[derive(Subcommand)]
enum PostprocCommand {
    /// Time Cascade against Toeplitz amplification over a grid of key sizes.
    Bench(BenchArgs),
}

/// Channel and source parameters.
#[derive(Args, Clone)]
struct SimArgs {
    /// Flat key=value config file.
    #[arg(long, env = "QDS_CONFIG")]
    config: Option<PathBuf>,
    /// Override one config entry; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Total fiber length between the users.
    #[arg(long)]
    distance_km: Option<f64>,
    /// Number of transmitted pulses N.
    #[arg(long, short = 'N')]
    pulses: Option<f64>,
}

#[derive(Args)]
struct KeygenArgs {
    #[command(flatten)]
    sim: SimArgs,
    /// Key generation protocol: tptf, bb84, sns.
    #[arg(long, default_value = "tptf")]
    kgp: String,
    /// Hash family: lfsr or gdh.
    #[arg(long, default_value = "gdh")]
    scheme: String,
    /// Message length the groups are sized for, in bits.
    #[arg(long, default_value_t = 1e6)]
    message_bits: f64,
    /// Signing acts to write, capped by the simulated key length.
    #[arg(long, default_value_t = 4)]
    acts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SignArgs {
    /// Alice's key file.
    #[arg(long)]
    keys: PathBuf,
    /// Consumption journal; defaults to the key file path plus `.journal`.
    #[arg(long)]
    journal: Option<PathBuf>,
    #[arg(long)]
    act: usize,
    #[arg(long)]
    message: PathBuf,
    /// Packet output path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    bob: PathBuf,
    #[arg(long)]
    charlie: PathBuf,
    #[arg(long)]
    packet: PathBuf,
    /// Message file to check instead of the copy inside the packet.
    #[arg(long)]
    message: Option<PathBuf>,
    #[arg(long)]
    act: usize,
    /// Print every transport event, including frame payloads.
    #[arg(long)]
    verbose: bool,
}

#[derive(Args)]
struct AttackArgs {
    #[arg(long, default_value = "lfsr")]
    scheme: String,
    /// Group size.
    #[arg(long, default_value_t = 16)]
    n: usize,
    /// Message length in bits.
    #[arg(long, default_value_t = 4096)]
    m: usize,
    /// Number of key candidates the forger covers; defaults to the maximum.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    sim: SimArgs,
    #[arg(long, default_value = "gdh")]
    scheme: String,
    #[arg(long, default_value_t = 1e6)]
    message_bits: f64,
    /// Target forgery probability; defaults to the config's eps.
    #[arg(long)]
    eps: Option<f64>,
    /// Evaluate at this group size instead of the required one.
    #[arg(long)]
    n: Option<usize>,
    /// Key source. `perfect` treats every key bit as secret.
    #[arg(long, default_value = "perfect")]
    kgp: String,
}

#[derive(Args)]
struct RatesArgs {
    #[command(flatten)]
    sim: SimArgs,
    /// Figure preset; overrides the curve and grid flags.
    #[arg(long, value_parser = clap::value_parser!(u8).range(3..=6))]
    figure: Option<u8>,
    #[arg(long, default_value = "tptf")]
    kgp: String,
    /// lfsr, gdh or single.
    #[arg(long, default_value = "gdh")]
    scheme: String,
    #[arg(long, default_value_t = 1e6)]
    message_bits: f64,
    #[arg(long, default_value_t = 0.0)]
    from_km: f64,
    #[arg(long, default_value_t = 700.0)]
    to_km: f64,
    #[arg(long, default_value_t = 50.0)]
    step_km: f64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated key sizes.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize << 16, 1 << 18, 1 << 20])]
    nz_grid: Vec<usize>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = BenchSettings::default().qber)]
    qber: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long)]
    sequential: bool,
}

/// A non-zero outcome with its exit code.
#[derive(Debug)]
enum Failure {
    Reject,
    Misuse(String),
    Config(String),
    Infeasible(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Reject => 1,
            Failure::Misuse(_) => 2,
            Failure::Config(_) => 3,
            Failure::Infeasible(_) => 4,
        }
    }
}

impl From<ProtocolError> for Failure {
    fn from(e: ProtocolError) -> Self {
        match e {
            ProtocolError::OneTimeViolation { .. }
            | ProtocolError::NoSuchGroup { .. }
            | ProtocolError::KeyExhausted { .. }
            | ProtocolError::Role(_) => Failure::Misuse(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<KgpError> for Failure {
    fn from(e: KgpError) -> Self {
        match e {
            KgpError::Infeasible(m) => Failure::Infeasible(m),
            KgpError::InvalidArgument(m) => Failure::Config(m),
        }
    }
}

type Outcome = Result<(), Failure>;

fn config_err(m: impl std::fmt::Display) -> Failure {
    Failure::Config(m.to_string())
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

fn write(path: &Path, data: impl AsRef<[u8]>) -> Outcome {
    fs::write(path, data).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

fn mode(sequential: bool) -> ExecMode {
    if sequential {
        ExecMode::Sequential
    } else {
        ExecMode::Parallel
    }
}

fn parse_scheme(s: &str) -> Result<Scheme, Failure> {
    s.parse().map_err(config_err)
}

fn parse_kgp(s: &str) -> Result<KgpProtocol, Failure> {
    KgpProtocol::parse(s).ok_or_else(|| config_err(format!("unknown key generation protocol {s:?}")))
}

impl SimArgs {
    fn load(&self) -> Result<SimConfig, Failure> {
        let mut cfg = SimConfig::default();
        if let Some(p) = &self.config {
            let text = fs::read_to_string(p).map_err(|e| config_err(format!("{}: {e}", p.display())))?;
            cfg.apply(parse_config(&text).map_err(config_err)?).map_err(config_err)?;
        }
        let mut overrides = parse_config(&self.set.join("\n")).map_err(config_err)?;
        if let Some(d) = self.distance_km {
            overrides.insert("distance_km".into(), d.to_string());
        }
        if let Some(n) = self.pulses {
            overrides.insert("N".into(), n.to_string());
        }
        cfg.apply(overrides).map_err(config_err)?;
        Ok(cfg)
    }
}

fn journal_path(keys: &Path, journal: Option<&PathBuf>) -> PathBuf {
    journal.cloned().unwrap_or_else(|| {
        let mut p = keys.as_os_str().to_owned();
        p.push(".journal");
        PathBuf::from(p)
    })
}

fn cmd_keygen(a: &KeygenArgs) -> Outcome {
    let cfg = a.sim.load()?;
    let protocol = parse_kgp(&a.kgp)?;
    if protocol == KgpProtocol::SnsRp {
        return Err(config_err("random pairing only applies to the single-bit baseline"));
    }
    let scheme = parse_scheme(&a.scheme)?;
    if a.acts == 0 {
        return Err(config_err("at least one act is required"));
    }
    let point = optimized_rate(protocol, RateScheme::from(scheme), a.message_bits, &cfg, &SearchSettings::default());
    let Some(est) = point.estimates.filter(|_| point.feasible) else {
        return Err(Failure::Infeasible(format!(
            "no group size reaches eps={:e} for {} bits at {} km with N={:e}",
            cfg.channel.eps, a.message_bits, cfg.channel.distance_km, cfg.channel.n_pulses
        )));
    };
    let n = point.n_for_group as usize;
    let per_act = scheme.strings_per_act() * n;
    let available = (est.n_z / per_act as f64).floor() as usize;
    let acts = a.acts.min(available);
    if acts < a.acts {
        eprintln!("only {acts} acts fit in the simulated key; writing {acts}");
    }

    // The simulated key is represented by uniform agreed strings; its
    // leakage is accounted for in the group size, not in the bits.
    let mut rng = ChaCha20Rng::seed_from_u64(a.seed);
    let bob_raw = RawKeyPair::agreed(BitString::random(acts * per_act, &mut rng));
    let charlie_raw = RawKeyPair::agreed(BitString::random(acts * per_act, &mut rng));
    let seeds = PermutationSeeds {
        bob: Some(derive_seed(a.seed, 1)),
        charlie: Some(derive_seed(a.seed, 2)),
    };
    let groups = group_keys(&bob_raw, &charlie_raw, n, scheme, seeds)?;
    fs::create_dir_all(&a.out_dir).map_err(|e| config_err(format!("{}: {e}", a.out_dir.display())))?;
    for g in &groups {
        write(&a.out_dir.join(format!("{}.keys", g.role())), write_key_file(g))?;
    }
    let sidecar = serde_json::json!({
        "rng": RNG_NAME,
        "seed": a.seed,
        "kgp": protocol.name(),
        "scheme": scheme.to_string(),
        "message_bits": a.message_bits,
        "n": n,
        "acts": acts,
        "hn": point.hn,
        "epsilon": point.epsilon,
        "rate_tps": point.rate_tps,
        "source": point.source,
        "config": cfg,
        "estimates": est,
    });
    let text = serde_json::to_string_pretty(&sidecar).map_err(config_err)?;
    write(&a.out_dir.join("estimates.json"), text + "\n")?;
    println!(
        "kgp={} scheme={scheme} n={n} acts={acts} hn={:.3} epsilon={:e} out={}",
        protocol.name(),
        point.hn,
        point.epsilon,
        a.out_dir.display()
    );
    Ok(())
}

fn cmd_sign(a: &SignArgs) -> Outcome {
    let journal = journal_path(&a.keys, a.journal.as_ref());
    let mut groups = load_key_groups(&a.keys, &journal)?;
    let message = BitString::from_bytes(&read(&a.message)?);
    let mut rng = ChaCha20Rng::seed_from_u64(a.seed);
    let packet = alice_sign(&message, &mut groups, a.act, &mut rng)?;
    // Journal first: a crash after this point wastes a group but never
    // reuses one.
    append_journal(&journal, a.act)?;
    write(&a.out, packet.to_bytes())?;
    println!(
        "signed act={} scheme={} n={} message_bits={} rng={RNG_NAME} seed={}",
        a.act,
        groups.scheme(),
        groups.n(),
        message.len(),
        a.seed
    );
    Ok(())
}

fn load_role(path: &Path, role: Role) -> Result<KeyGroups, Failure> {
    let text = String::from_utf8(read(path)?).map_err(|_| config_err(format!("{} is not text", path.display())))?;
    let g = parse_key_file(&text)?;
    if g.role() != role {
        return Err(Failure::Misuse(format!("{} holds {} keys, expected {role}", path.display(), g.role())));
    }
    Ok(g)
}

fn cmd_verify(a: &VerifyArgs) -> Outcome {
    let bob = load_role(&a.bob, Role::Bob)?;
    let charlie = load_role(&a.charlie, Role::Charlie)?;
    let mut bytes = read(&a.packet)?;
    if let Some(m) = &a.message {
        // Re-encode with the given message so the receivers check it.
        let message = BitString::from_bytes(&read(m)?);
        match SignaturePacket::from_bytes(&bytes) {
            Ok(mut p) => {
                p.header.message_bits = message.len() as u64;
                p.message = message;
                bytes = p.to_bytes();
            }
            Err(e) => eprintln!("unreadable packet: {e}"),
        }
    }
    let mut transport = MemoryTransport::new();
    transport.send(Frame {
        from: Role::Alice,
        to: Role::Bob,
        kind: FrameKind::Packet,
        payload: bytes,
    })?;
    let t = run_verification(a.act, &bob, &charlie, &mut transport, None)?;
    if a.verbose {
        print!("{}", t.render());
    }
    let show = |v: Option<qds_core::protocol::Verdict>| v.map_or_else(|| "none".to_string(), |v| v.to_string());
    println!("act={}", t.act);
    println!("bob={}", show(t.bob));
    println!("charlie={}", show(t.charlie));
    if let Some(f) = t.failure {
        println!("failure={f}");
    }
    if t.both_accept() {
        println!("verdict=accept");
        Ok(())
    } else {
        println!("verdict=reject");
        Err(Failure::Reject)
    }
}

fn cmd_attack(a: &AttackArgs) -> Outcome {
    let scheme = parse_scheme(&a.scheme)?;
    let budget = a.budget.unwrap_or_else(|| qds_core::protocol::max_guess_budget(scheme, a.n, a.m));
    let stats = simulate_forgery(scheme, a.n, a.m, budget, a.trials, a.seed, mode(a.sequential))?;
    let eps = epsilon_forgery(a.m as f64, a.n as f64, a.n, scheme).max().value();
    println!("scheme={scheme}");
    println!("n={}", a.n);
    println!("m={}", a.m);
    println!("budget={budget}");
    println!("guesses={}", stats.guesses);
    println!("trials={}", stats.trials);
    println!("successes={}", stats.successes);
    println!("success_rate={:e}", stats.rate());
    println!("eps_single_guess={eps:e}");
    println!("rng={RNG_NAME}");
    println!("seed={}", a.seed);
    Ok(())
}

fn cmd_bounds(a: &BoundsArgs) -> Outcome {
    let cfg = a.sim.load()?;
    let scheme = parse_scheme(&a.scheme)?;
    let eps = a.eps.unwrap_or(cfg.channel.eps);
    let m = a.message_bits;
    let mut out = String::new();
    let c = scheme.strings_per_act() as f64;
    let (hn, n_max): (Box<dyn Fn(usize) -> f64>, usize) = if a.kgp == "perfect" {
        (Box::new(|n| n as f64), u32::MAX as usize)
    } else {
        let protocol = parse_kgp(&a.kgp)?;
        let est = simulate(protocol, &cfg)?;
        let _ = writeln!(out, "kgp={}", protocol.name());
        let _ = writeln!(out, "distance_km={}", cfg.channel.distance_km);
        let _ = writeln!(out, "N={:e}", cfg.channel.n_pulses);
        let _ = writeln!(out, "n_z={:e}", est.n_z);
        let _ = writeln!(out, "e_z={:e}", est.e_z);
        let _ = writeln!(out, "s0_z={:e}", est.s0_z);
        let _ = writeln!(out, "s11_z={:e}", est.s11_z);
        let _ = writeln!(out, "phi11_z={:e}", est.phi11_z);
        let n_max = (est.n_z / c).floor().min(u32::MAX as f64) as usize;
        (Box::new(move |n| est.hn(n)), n_max)
    };
    let required = required_group_size(m, eps, scheme, n_max, &hn);
    let _ = writeln!(out, "scheme={scheme}");
    let _ = writeln!(out, "message_bits={m}");
    let _ = writeln!(out, "eps_target={eps:e}");
    match &required {
        Ok(n) => {
            let _ = writeln!(out, "required_n={n}");
        }
        Err(_) => {
            let _ = writeln!(out, "required_n=none");
        }
    }
    let n = match (a.n, &required) {
        (Some(n), _) => n,
        (None, Ok(n)) if scheme == Scheme::Gdh => n.div_ceil(8) * 8,
        (None, Ok(n)) => *n,
        (None, Err(e)) => {
            print!("{out}");
            return Err(Failure::Infeasible(e.to_string()));
        }
    };
    let h = hn(n);
    let f = epsilon_forgery(m, h, n, scheme);
    let budget = epsilon_budget(DEFAULT_EPS_COR, DEFAULT_EPS_PRIME, f.max().value()).map_err(config_err)?;
    let _ = writeln!(out, "n={n}");
    let _ = writeln!(out, "hn={h:.6}");
    let _ = writeln!(out, "eps_for_analytic={}", f.analytic);
    let _ = writeln!(out, "eps_for_floor={}", f.floor);
    let _ = writeln!(out, "eps_for={}", f.max());
    let _ = writeln!(out, "eps_cor={:e}", budget.eps_cor);
    let _ = writeln!(out, "eps_prime={:e}", budget.eps_prime);
    let _ = writeln!(out, "eps_rob={:e}", budget.eps_rob);
    let _ = writeln!(out, "eps_rep={:e}", budget.eps_rep);
    let _ = writeln!(out, "eps_total={:e}", budget.eps_total);
    print!("{out}");
    Ok(())
}

const RATES_HEADER: &str = "curve,distance_km,n_for_group,Hn,rate_tps,epsilon";

fn rate_rows(out: &mut String, label: &str, points: &[RatePoint]) {
    for p in points {
        let _ = writeln!(
            out,
            "{label},{},{},{:e},{:e},{:e}",
            p.distance_km, p.n_for_group, p.hn, p.rate_tps, p.epsilon
        );
    }
}

fn cmd_rates(a: &RatesArgs) -> Outcome {
    let cfg = a.sim.load()?;
    let (curves, distances) = match a.figure {
        Some(fig) => figure_preset(fig)?,
        None => {
            let protocol = parse_kgp(&a.kgp)?;
            let scheme = RateScheme::parse(&a.scheme).ok_or_else(|| config_err(format!("unknown scheme {:?}", a.scheme)))?;
            if !(a.step_km > 0.0) {
                return Err(config_err("step must be positive"));
            }
            let mut grid = Vec::new();
            let mut i = 0;
            loop {
                let d = a.from_km + i as f64 * a.step_km;
                if d > a.to_km + 1e-9 {
                    break;
                }
                grid.push(d);
                i += 1;
            }
            (vec![Curve::new(protocol, scheme, a.message_bits, cfg.channel.n_pulses)], grid)
        }
    };
    let mut out = String::from(RATES_HEADER);
    out.push('\n');
    let settings = SearchSettings::default();
    for c in &curves {
        let points = sweep(c, &distances, &cfg, &settings, mode(a.sequential));
        rate_rows(&mut out, &c.label, &points);
    }
    write(&a.out, out)
}

fn cmd_bench(a: &BenchArgs) -> Outcome {
    let s = BenchSettings {
        qber: a.qber,
        seed: a.seed,
        reps: a.reps,
        ..BenchSettings::default()
    };
    let rows = benchmark_postproc(&a.nz_grid, &s, mode(a.sequential)).map_err(config_err)?;
    write(&a.out, bench_csv(&rows))
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::KeygenSim(a) => cmd_keygen(a),
        Command::Sign(a) => cmd_sign(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Attack(a) => cmd_attack(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Rates(a) => cmd_rates(a),
        Command::Postproc(PostprocCommand::Bench(a)) => cmd_bench(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // clap uses 2 for usage errors, which is taken by key misuse.
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Reject => {}
                Failure::Misuse(m) => eprintln!("key misuse: {m}"),
                Failure::Config(m) => eprintln!("error: {m}"),
                Failure::Infeasible(m) => eprintln!("infeasible: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
