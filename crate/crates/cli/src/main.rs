//! `floorline` command-line front end.
//!
//! Exit codes: 0 success, 2 invalid input or arguments, 3 a stage failed
//! while running.

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use floorline::absorption::{classify_set, enumerate_sets, induced_topology, EnumerationOptions, Topology, TopologyFile};
use floorline::channel::{parse_grid, sigma2_from_ebn0_db};
use floorline::code::{build_qc_matrix, girth, gf2_rank, load_alist, write_alist, SparseParityCheck, TannerGraph};
use floorline::decoder::{Algorithm, Decoder, DecoderConfig};
use floorline::density::{DensityEvolution, GainReading, DEFAULT_RESOLUTION};
use floorline::dynamics::{ber_estimate, AnalyzedSet, Formula};
use floorline::harness::{self, fmt_num, is_row, EnsembleSpec, ExperimentManifest};
use floorline::sampling::{BiasSpec, Campaign, CampaignConfig};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "floorline", version = harness::VERSION, about = "LDPC error-floor workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build or inspect parity-check matrices.
    #[command(subcommand)]
    Code(CodeCmd),
    /// Decode one channel LLR vector.
    Decode(DecodeArgs),
    /// Enumerate or check absorption sets.
    #[command(subcommand)]
    Sets(SetsCmd),
    /// Set failure probability over an SNR grid.
    Analyze(AnalyzeCmd),
    /// Density evolution of a regular ensemble.
    De(DeArgs),
    /// Importance-sampling campaign.
    Is(IsArgs),
    /// Run an experiment manifest (file path or bundled name).
    Run(RunArgs),
}

#[derive(Subcommand)]
enum CodeCmd {
    /// Quasi-cyclic matrix from a shift table (one block row per line).
    Build {
        #[arg(long)]
        shifts: PathBuf,
        #[arg(long)]
        p: usize,
        /// Write the alist here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Length, checks, rank, girth and degree profile.
    Info { code: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Sp,
    Cms,
}

impl From<Algo> for Algorithm {
    fn from(a: Algo) -> Self {
        match a {
            Algo::Sp => Algorithm::Sp,
            Algo::Cms => Algorithm::Cms,
        }
    }
}

#[derive(Args)]
struct DecoderArgs {
    #[arg(long, value_enum, default_value = "cms")]
    algo: Algo,
    #[arg(long, default_value_t = 10.0)]
    clip: f64,
    #[arg(long, default_value_t = 50)]
    iters: usize,
    /// Fixed-point message width; floating point when absent.
    #[arg(long)]
    bits: Option<u32>,
    /// Keep iterating after the syndrome is satisfied.
    #[arg(long)]
    no_early_stop: bool,
}

impl DecoderArgs {
    fn config(&self) -> DecoderConfig {
        let mut c = DecoderConfig::new(self.algo.into(), self.iters, self.clip);
        if let Some(b) = self.bits {
            c = c.with_bits(b);
        }
        c.early_stop = !self.no_early_stop;
        c
    }
}

#[derive(Args)]
struct DecodeArgs {
    /// Alist path or builtin name (tanner155, proxy-6-32).
    #[arg(long)]
    code: String,
    #[command(flatten)]
    decoder: DecoderArgs,
    /// Whitespace-separated channel LLRs.
    #[arg(long)]
    llr_file: PathBuf,
    /// Variables whose accumulated LLR is traced, 0-based, comma separated.
    #[arg(long, value_delimiter = ',')]
    trace_vars: Vec<usize>,
    /// CSV (iteration, variable, llr) for the traced variables.
    #[arg(long, requires = "trace_vars")]
    trace_csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SetsCmd {
    /// JSON line per set on stdout; census table on stderr.
    Enumerate {
        #[arg(long)]
        code: String,
        #[arg(long)]
        amax: usize,
        #[arg(long)]
        bmax: usize,
        /// Exploit a cyclic automorphism of this order.
        #[arg(long)]
        qc: Option<usize>,
    },
    /// Classify a variable set (0-based indices).
    Check {
        #[arg(long)]
        code: String,
        #[arg(long, value_delimiter = ',', required = true)]
        vars: Vec<usize>,
    },
}

#[derive(Args)]
#[command(args_conflicts_with_subcommands = true, subcommand_negates_reqs = true)]
struct AnalyzeCmd {
    #[command(subcommand)]
    sub: Option<AnalyzeSub>,
    #[command(flatten)]
    args: AnalyzeArgs,
}

#[derive(Subcommand)]
enum AnalyzeSub {
    /// Dominant eigenvalue and eigenvector of the set's VC matrix.
    Eigen {
        #[arg(long)]
        set: String,
        #[arg(long)]
        code: Option<String>,
    },
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Topology JSON path, bundled fixture name, or comma-separated
    /// variables of `--code`.
    #[arg(long, required = true)]
    set: Option<String>,
    #[arg(long)]
    code: Option<String>,
    #[arg(long, default_value_t = 10)]
    iters: usize,
    #[arg(long, default_value_t = 10.0)]
    clip: f64,
    /// `start:stop:step` or a single value, in dB.
    #[arg(long, default_value = "2:6:0.5")]
    snr: String,
    #[arg(long, default_value = "refined")]
    formula: Formula,
    /// Ensemble degrees for density evolution; default from the code.
    #[arg(long)]
    dv: Option<usize>,
    #[arg(long)]
    dc: Option<usize>,
    /// Code rate; default from the code.
    #[arg(long)]
    rate: Option<f64>,
    /// Sets of this shape in the code.
    #[arg(long, default_value_t = 1)]
    multiplicity: usize,
    /// Code length for the BER estimate; default from the code.
    #[arg(long)]
    length: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    resolution: usize,
    #[arg(long, value_enum, default_value = "independent")]
    gain: Gain,
}

#[derive(Clone, Copy, ValueEnum)]
enum Gain {
    Independent,
    MeanField,
}

impl From<Gain> for GainReading {
    fn from(g: Gain) -> Self {
        match g {
            Gain::Independent => GainReading::Independent,
            Gain::MeanField => GainReading::MeanField,
        }
    }
}

#[derive(Args)]
struct DeArgs {
    #[arg(long)]
    dv: usize,
    #[arg(long)]
    dc: usize,
    /// Eb/N0 in dB.
    #[arg(long)]
    snr: f64,
    #[arg(long, default_value_t = 10.0)]
    clip: f64,
    #[arg(long, default_value_t = 10)]
    iters: usize,
    /// Rate for the SNR conversion; the design rate 1 − dv/dc by default.
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    resolution: usize,
    #[arg(long, value_enum, default_value = "independent")]
    gain: Gain,
}

#[derive(Args)]
struct IsArgs {
    #[arg(long)]
    code: String,
    #[command(flatten)]
    decoder: DecoderArgs,
    /// JSON array of variable lists, or JSON lines with a `variables` field.
    #[arg(long)]
    sets: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    shift: f64,
    #[arg(long, default_value = "4:6:1")]
    snr: String,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Code rate; default `(n − rank)/n`.
    #[arg(long)]
    rate: Option<f64>,
    /// Write the CSV here and the campaign JSON next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Manifest path or bundled name.
    #[arg(required_unless_present = "list")]
    manifest: Option<String>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// List bundled manifests.
    #[arg(long)]
    list: bool,
}

/// Error with its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

trait Classify<T> {
    fn usage(self) -> Result<T, Failure>;
    fn stage(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage(self) -> Result<T, Failure> {
        self.map_err(|e| Failure { code: 2, error: e.into() })
    }
    fn stage(self) -> Result<T, Failure> {
        self.map_err(|e| Failure { code: 3, error: e.into() })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = harness::init_workers_from_env() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Code(c) => code_cmd(c),
        Command::Decode(a) => decode_cmd(a),
        Command::Sets(s) => sets_cmd(s),
        Command::Analyze(a) => match a.sub {
            Some(AnalyzeSub::Eigen { set, code }) => eigen_cmd(&set, code.as_deref()),
            None => analyze_cmd(a.args),
        },
        Command::De(a) => de_cmd(a),
        Command::Is(a) => is_cmd(a),
        Command::Run(a) => run_cmd(a),
    }
}

fn load_code(spec: &str) -> anyhow::Result<SparseParityCheck> {
    if let Some(h) = harness::builtin_code(spec) {
        return Ok(h);
    }
    load_alist(spec).with_context(|| format!("loading code {spec}"))
}

fn parse_snr(spec: &str) -> anyhow::Result<Vec<f64>> {
    parse_grid(spec).ok_or_else(|| anyhow!("bad SNR grid {spec:?}; expected start:stop:step or a value"))
}

fn code_cmd(c: CodeCmd) -> Result<(), Failure> {
    match c {
        CodeCmd::Build { shifts, p, out } => {
            let text = std::fs::read_to_string(&shifts)
                .with_context(|| format!("reading {}", shifts.display()))
                .usage()?;
            let table = text
                .lines()
                .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
                .map(|l| l.split([' ', '\t', ',']).filter(|t| !t.is_empty()).map(str::parse).collect())
                .collect::<Result<Vec<Vec<usize>>, _>>()
                .context("shift table must hold nonnegative integers")
                .usage()?;
            let h = build_qc_matrix(&table, p).usage()?;
            let alist = write_alist(&h);
            match out {
                Some(path) => std::fs::write(path, alist).stage()?,
                None => print!("{alist}"),
            }
            Ok(())
        }
        CodeCmd::Info { code } => {
            let h = load_code(&code).usage()?;
            let rank = gf2_rank(&h);
            let (cols, rows) = h.degree_profile();
            let profile = |p: &[(usize, usize)]| p.iter().map(|(d, k)| format!("{d}:{k}")).collect::<Vec<_>>().join(" ");
            println!("n {}", h.n_cols());
            println!("m {}", h.n_rows());
            println!("rank {rank}");
            println!("dimension {}", h.n_cols() - rank);
            println!("girth {}", girth(&h).map_or("none".into(), |g| g.to_string()));
            println!("variable_degrees {}", profile(&cols));
            println!("check_degrees {}", profile(&rows));
            Ok(())
        }
    }
}

fn decode_cmd(a: DecodeArgs) -> Result<(), Failure> {
    let h = load_code(&a.code).usage()?;
    let text = std::fs::read_to_string(&a.llr_file)
        .with_context(|| format!("reading {}", a.llr_file.display()))
        .usage()?;
    let llr: Vec<f64> = text
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .context("LLR file must hold numbers")
        .usage()?;
    let graph = TannerGraph::new(&h);
    let mut dec = Decoder::new(&graph, a.decoder.config()).usage()?;
    let out = dec.decode_traced(&llr, &a.trace_vars).usage()?;
    if let (Some(path), Some(trace)) = (&a.trace_csv, &out.trace) {
        let mut s = String::from("iteration,variable,llr\n");
        for (it, v, x) in trace.triples() {
            s.push_str(&format!("{it},{v},{}\n", fmt_num(x)));
        }
        std::fs::write(path, s).stage()?;
    }
    println!("{}", serde_json::to_string(&out).stage()?);
    Ok(())
}

fn sets_cmd(s: SetsCmd) -> Result<(), Failure> {
    match s {
        SetsCmd::Enumerate { code, amax, bmax, qc } => {
            let h = load_code(&code).usage()?;
            let mut opts = EnumerationOptions::new(amax, bmax);
            if let Some(p) = qc {
                opts = opts.with_qc(p);
            }
            let res = enumerate_sets(&h, &opts).usage()?;
            let stdout = std::io::stdout();
            let mut out = std::io::BufWriter::new(stdout.lock());
            for (&(a, b), sets) in &res.sets {
                for vars in sets {
                    let line = serde_json::json!({ "variables": vars, "a": a, "b": b });
                    writeln!(out, "{line}").stage()?;
                }
            }
            out.flush().stage()?;
            let counts = res.multiplicities();
            eprintln!("a\tb\texists\tmultiplicity");
            for a in 1..=amax {
                for b in 0..=bmax {
                    let k = counts.get(&(a, b)).copied().unwrap_or(0);
                    eprintln!("{a}\t{b}\t{}\t{}", if k > 0 { "yes" } else { "no" }, k);
                }
            }
            if !res.exhaustive {
                eprintln!("warning: enumeration stopped early; counts are lower bounds");
            }
            Ok(())
        }
        SetsCmd::Check { code, vars } => {
            let h = load_code(&code).usage()?;
            let verdict = match classify_set(&h, &vars) {
                Ok(set) => serde_json::json!({
                    "absorption": true,
                    "a": set.a(),
                    "b": set.b(),
                    "simple": set.simple,
                    "unsatisfied_checks": set.unsatisfied_checks,
                }),
                Err(reason) => serde_json::json!({ "absorption": false, "reason": reason.to_string() }),
            };
            println!("{verdict}");
            Ok(())
        }
    }
}

/// Topology from a JSON file, a fixture name, or a variable list in `code`.
fn load_set(spec: &str, code: Option<&SparseParityCheck>) -> anyhow::Result<Topology> {
    let path = Path::new(spec);
    if path.extension().is_some_and(|e| e == "json") || path.is_file() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {spec}"))?;
        let file: TopologyFile = serde_json::from_str(&text).context("parsing topology JSON")?;
        return Ok(Topology::from_file(&file)?);
    }
    if let Some(file) = floorline::fixtures::by_name(spec) {
        return Ok(Topology::from_file(&file)?);
    }
    let vars: Vec<usize> = spec
        .split(',')
        .map(|t| t.trim().parse())
        .collect::<Result<_, _>>()
        .with_context(|| format!("{spec:?} is not a topology file, fixture or variable list"))?;
    let h = code.ok_or_else(|| anyhow!("a variable-list set needs --code"))?;
    let set = classify_set(h, &vars)?;
    Ok(induced_topology(h, &set)?)
}

fn eigen_cmd(set: &str, code: Option<&str>) -> Result<(), Failure> {
    let h = code.map(load_code).transpose().usage()?;
    let topo = load_set(set, h.as_ref()).usage()?;
    let an = AnalyzedSet::new(&topo).stage()?;
    println!("a {}", topo.a());
    println!("b {}", topo.b());
    println!("mu_max {}", fmt_num(an.eigen.mu_max));
    println!("residual {:e}", an.eigen.residual);
    println!("edge,v_max");
    for (e, v) in an.eigen.v_max.iter().enumerate() {
        println!("{},{}", e + 1, fmt_num(*v));
    }
    Ok(())
}

fn analyze_cmd(a: AnalyzeArgs) -> Result<(), Failure> {
    let h = a.code.as_deref().map(load_code).transpose().usage()?;
    let set = a.set.as_deref().expect("required by clap");
    let topo = load_set(set, h.as_ref()).usage()?;
    let snr = parse_snr(&a.snr).usage()?;
    let degrees = h.as_ref().and_then(|h| h.regular_degrees());
    let (d_v, d_c) = match (a.dv, a.dc, degrees) {
        (Some(v), Some(c), _) => (v, c),
        (None, None, Some(d)) => d,
        _ => return Err(anyhow!("give --dv and --dc, or a regular --code")).usage(),
    };
    let rate = match (a.rate, &h) {
        (Some(r), _) => r,
        (None, Some(h)) => (h.n_cols() - gf2_rank(h)) as f64 / h.n_cols() as f64,
        (None, None) => return Err(anyhow!("give --rate or --code")).usage(),
    };
    let length = a.length.or(h.as_ref().map(|h| h.n_cols()));
    let an = AnalyzedSet::new(&topo).stage()?;
    let ensemble = EnsembleSpec {
        d_v,
        d_c,
        resolution: a.resolution,
        gain: a.gain.into(),
    };
    let curve = harness::formula_curve(&an, a.formula, &ensemble, rate, a.clip, a.iters, &snr).stage()?;
    println!("EbN0_dB,P_AS,BER_estimate");
    for (db, p) in curve {
        let ber = length.map_or(f64::NAN, |n| ber_estimate(&[(a.multiplicity, topo.a(), p)], n));
        println!("{},{},{}", fmt_num(db), fmt_num(p), fmt_num(ber));
    }
    Ok(())
}

fn de_cmd(a: DeArgs) -> Result<(), Failure> {
    if a.dv == 0 || (a.dc <= a.dv && a.rate.is_none()) {
        return Err(anyhow!("design rate 1 − dv/dc must be positive; pass --rate")).usage();
    }
    let rate = a.rate.unwrap_or(1.0 - a.dv as f64 / a.dc as f64);
    let de = DensityEvolution::new(a.clip, a.resolution).usage()?;
    let t = de.evolve(a.dv, a.dc, sigma2_from_ebn0_db(a.snr, rate), a.iters).usage()?;
    let g = t.gains(a.gain.into());
    println!("iteration,m_ext,g");
    for i in 0..t.m_cv.len() {
        println!("{},{},{}", i + 1, fmt_num(t.m_cv[i]), fmt_num(g[i + 1]));
    }
    Ok(())
}

/// Reads target sets from a JSON array of lists or JSON lines objects.
fn load_targets(path: &Path) -> anyhow::Result<Vec<Vec<usize>>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if let Ok(list) = serde_json::from_str::<Vec<Vec<usize>>>(&text) {
        return Ok(list);
    }
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            let v: serde_json::Value = serde_json::from_str(l).with_context(|| format!("line {}", i + 1))?;
            serde_json::from_value(v["variables"].clone()).with_context(|| format!("line {} has no variables list", i + 1))
        })
        .collect()
}

fn is_cmd(a: IsArgs) -> Result<(), Failure> {
    let h = load_code(&a.code).usage()?;
    let targets = load_targets(&a.sets).usage()?;
    let snr = parse_snr(&a.snr).usage()?;
    let rate = a
        .rate
        .unwrap_or_else(|| (h.n_cols() - gf2_rank(&h)) as f64 / h.n_cols() as f64);
    let config = CampaignConfig {
        decoder: a.decoder.config(),
        rate,
        samples: a.samples,
        seed: a.seed,
    };
    let bias = BiasSpec::new(targets, a.shift);
    let campaign = Campaign::new(&h, bias.clone(), config.clone()).usage()?;
    let estimates = campaign.run(&snr).stage()?;
    let mut csv = String::from("EbN0_dB,BER,FER,var,rel_halfwidth,raw_errors\n");
    for e in &estimates {
        let row: Vec<String> = is_row(e).into_iter().map(fmt_num).collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    match &a.out {
        Some(path) => {
            std::fs::write(path, &csv).stage()?;
            let record = serde_json::json!({
                "version": harness::VERSION,
                "code": a.code,
                "snr": snr,
                "config": config,
                "bias": bias,
                "estimates": estimates,
            });
            let mut side = path.clone().into_os_string();
            side.push(".campaign.json");
            std::fs::write(side, serde_json::to_string_pretty(&record).stage()? + "\n").stage()?;
        }
        None => print!("{csv}"),
    }
    for e in estimates.iter().filter(|e| e.variance_flag()) {
        eprintln!(
            "warning: {} dB estimate is unreliable (failures {}, ESS ratio {:.3})",
            e.ebn0_db, e.raw_errors, e.ess_ratio
        );
    }
    Ok(())
}

fn run_cmd(a: RunArgs) -> Result<(), Failure> {
    if a.list {
        for name in harness::bundled_names() {
            println!("{name}");
        }
        return Ok(());
    }
    let spec = a.manifest.expect("required by clap");
    let path = Path::new(&spec);
    let (mut manifest, base) = if path.is_file() {
        let text = std::fs::read_to_string(path).usage()?;
        let m = ExperimentManifest::from_json(&text).usage()?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        (m, base)
    } else if let Some(m) = harness::bundled(&spec) {
        (m, PathBuf::from("."))
    } else {
        return Err(anyhow!("{spec} is neither a manifest file nor a bundled manifest")).usage();
    };
    if let Some(out) = a.out {
        manifest.output = Some(std::path::absolute(out).stage()?);
    }
    match harness::run_manifest(&manifest, &base) {
        Ok(bundle) => {
            for f in &bundle.files {
                println!("{}", f.display());
            }
            Ok(())
        }
        Err(e) => {
            let code = e.exit_code() as u8;
            Err(Failure {
                code,
                error: anyhow::Error::new(e),
            })
        }
    }
}
