//! Command-line front end: `gen`, `index`, `query`, `bench` and `verify`.

pub mod record;

use std::fmt;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tamics::index::{
    build_tie_tree, build_tuc_list, load_index, save_index, select_topic_vectors, TieSettings,
    TieTree, TucList,
};
use tamics::query::{indexed_query, online_query, IndexProbe};
use tamics::testkit::verify::{run_suite, Fault, VerifyConfig};
use tamics::testkit::{gen_synthetic, random_topic};
use tamics::{
    community_stats, InteractionGraph, Normalization, QueryMode, QueryRequest, QueryResult,
    SampleParams, SocialNetwork, TopicVector,
};

use record::{list, Record};

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_ORACLE: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Io(String),
    OracleFailure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Io(_) => EXIT_IO,
            CliError::OracleFailure(_) => EXIT_ORACLE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Io(m) | CliError::OracleFailure(m) => f.write_str(m),
        }
    }
}

impl From<tamics::Error> for CliError {
    fn from(e: tamics::Error) -> Self {
        match e {
            tamics::Error::Io(_) | tamics::Error::IndexFormat { .. } => CliError::Io(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn io_at(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

fn load_graph(path: &Path) -> Result<SocialNetwork, CliError> {
    SocialNetwork::load(path).map_err(|e| match e {
        tamics::Error::Io(io) => io_at(path)(io),
        other => other.into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Human,
    Machine,
}

#[derive(Debug, Parser)]
#[command(name = "tamics", version, about = "Topic-aware most influential community search")]
pub struct Cli {
    /// Worker threads (default: TAMICS_THREADS, then all cores)
    #[arg(long, global = true, env = "TAMICS_THREADS")]
    pub threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,

    /// Leave wall-clock fields out of the output
    #[arg(long, global = true)]
    pub no_timings: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic network
    Gen(GenArgs),
    /// Build the threshold lists and the topic-vector tree
    Index(IndexArgs),
    /// Run queries
    Query(QueryArgs),
    /// Time a query batch in both modes
    Bench(BenchArgs),
    /// Run the small-instance oracle suite
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    /// Expected out-degree
    #[arg(long, default_value_t = 10.0)]
    pub avg_degree: f64,
    #[arg(long, default_value_t = 10)]
    pub z: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Clone)]
pub struct SamplingArgs {
    /// Edge-probability normalization: clamp or exponential
    #[arg(long = "f")]
    pub normalization: Option<Normalization>,
    /// Propagation scaling factor (not fixed by the model; default 1)
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Additive error of influence estimates, as a fraction of n (not fixed by the model)
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Failure probability of the estimates (not fixed by the model)
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SamplingArgs {
    fn params(&self) -> Result<SampleParams, CliError> {
        Ok(SampleParams::new(self.epsilon, self.delta, self.alpha, self.seed)?)
    }

    fn normalization(&self) -> Normalization {
        self.normalization.unwrap_or_default()
    }
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    /// Number of representative topic vectors
    #[arg(long, default_value_t = 1000)]
    pub h: usize,
    /// Most vectors per tree leaf
    #[arg(long, default_value_t = 5)]
    pub leaf_capacity: usize,
    /// Topic vectors to cluster, one per line; Dirichlet(1) draws when absent
    #[arg(long)]
    pub topic_samples: Option<PathBuf>,
    /// Number of Dirichlet draws (default 4h)
    #[arg(long)]
    pub sample_count: Option<usize>,
}

#[derive(Debug, Args, Clone)]
pub struct QuerySpec {
    /// Query topic vector, e.g. "0.5,0.5"
    #[arg(long, conflicts_with = "queries")]
    pub q: Option<String>,
    /// Batch file, one query per line: "k l eta q1 .. qz"
    #[arg(long)]
    pub queries: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 5)]
    pub l: usize,
    #[arg(long, default_value_t = 0.2)]
    pub eta: f64,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Required in indexed mode
    #[arg(long)]
    pub index: Option<PathBuf>,
    #[arg(long, default_value = "online")]
    pub mode: QueryMode,
    #[command(flatten)]
    pub spec: QuerySpec,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    /// Also report density and similarity
    #[arg(long)]
    pub stats: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Required unless --online-only
    #[arg(long)]
    pub index: Option<PathBuf>,
    /// Batch file; otherwise --count Dirichlet(1) queries with the given k, l, eta
    #[arg(long)]
    pub queries: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    pub count: usize,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 5)]
    pub l: usize,
    #[arg(long, default_value_t = 0.2)]
    pub eta: f64,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[arg(long)]
    pub online_only: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 100)]
    pub cases: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Switch on a deliberate defect (dp-bug) to check the suite
    #[arg(long)]
    pub inject: Option<Fault>,
}

/// Output settings shared by all commands.
pub struct Out<'w> {
    pub format: Format,
    pub timings: bool,
    pub w: &'w mut dyn Write,
}

impl Out<'_> {
    fn record(&mut self, r: &Record) -> io::Result<()> {
        writeln!(self.w, "{r}")
    }
}

fn ms(d: Duration) -> String {
    format!("{:.3}", d.as_secs_f64() * 1e3)
}

/// Configures the global thread pool, then runs the command.
pub fn run(cli: Cli, w: &mut dyn Write) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(invalid("--threads must be at least 1"));
        }
        // a second call in one process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let mut out = Out {
        format: cli.format,
        timings: !cli.no_timings,
        w,
    };
    match cli.command {
        Command::Gen(a) => cmd_gen(&a, &mut out),
        Command::Index(a) => cmd_index(&a, &mut out),
        Command::Query(a) => cmd_query(&a, &mut out),
        Command::Bench(a) => cmd_bench(&a, &mut out),
        Command::Verify(a) => cmd_verify(&a, &mut out),
    }
}

pub fn cmd_gen(a: &GenArgs, out: &mut Out) -> Result<(), CliError> {
    let net = gen_synthetic(a.n, a.avg_degree, a.z, a.seed)?;
    net.save(&a.out).map_err(io_at(&a.out))?;
    let mut r = Record::new("gen");
    r.push("n", net.vertex_count())
        .push("m", net.edge_count())
        .push("z", net.topic_count())
        .push("out", a.out.display());
    match out.format {
        Format::Machine => out.record(&r)?,
        Format::Human => writeln!(
            out.w,
            "wrote {}: n={} m={} z={}",
            a.out.display(),
            net.vertex_count(),
            net.edge_count(),
            net.topic_count()
        )?,
    }
    Ok(())
}

fn read_topic_samples(path: &Path, z: usize) -> Result<Vec<TopicVector>, CliError> {
    let text = std::fs::read_to_string(path).map_err(io_at(path))?;
    let mut samples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let q = TopicVector::parse_query(line)
            .map_err(|e| invalid(format!("{}: line {}: {e}", path.display(), i + 1)))?;
        if q.dim() != z {
            return Err(invalid(format!(
                "{}: line {}: {} topics, graph has {z}",
                path.display(),
                i + 1,
                q.dim()
            )));
        }
        samples.push(q);
    }
    if samples.is_empty() {
        return Err(invalid(format!("{}: no topic vectors", path.display())));
    }
    Ok(samples)
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

// Streams below 2^32 belong to influence sampling.
const SAMPLE_STREAM: u64 = 1 << 40;
const CLUSTER_STREAM: u64 = (1 << 40) + 1;
const BENCH_STREAM: u64 = (1 << 40) + 2;

pub fn cmd_index(a: &IndexArgs, out: &mut Out) -> Result<(), CliError> {
    if a.h == 0 {
        return Err(invalid("--h must be at least 1"));
    }
    if a.leaf_capacity == 0 {
        return Err(invalid("--leaf-capacity must be at least 1"));
    }
    let params = a.sampling.params()?;
    let f = a.sampling.normalization();
    let net = load_graph(&a.graph)?;
    let z = net.topic_count();

    let t = Instant::now();
    let tuc = build_tuc_list(&InteractionGraph::supergraph(&net, f));
    let tuc_time = t.elapsed();

    let t = Instant::now();
    let samples = match &a.topic_samples {
        Some(p) => read_topic_samples(p, z)?,
        None => {
            let count = a.sample_count.unwrap_or(4 * a.h);
            let mut rng = stream_rng(params.seed, SAMPLE_STREAM);
            (0..count).map(|_| random_topic(&mut rng, z)).collect()
        }
    };
    let mut rng = stream_rng(params.seed, CLUSTER_STREAM);
    let gammas = select_topic_vectors(&samples, a.h, &mut rng)?;
    let settings = TieSettings {
        leaf_capacity: a.leaf_capacity,
        normalization: f,
        params,
    };
    let tie = build_tie_tree(&net, gammas, settings)?;
    let tie_time = t.elapsed();

    save_index(&a.out, &net.fingerprint(), &tuc, &tie).map_err(|e| match e {
        tamics::Error::Io(io) => io_at(&a.out)(io),
        other => other.into(),
    })?;
    let bytes = std::fs::metadata(&a.out).map_err(io_at(&a.out))?.len();

    let keys: usize = tuc.cells().iter().map(|c| c.keys().len()).sum();
    let entries: usize = tuc
        .cells()
        .iter()
        .flat_map(|c| c.groups())
        .map(|g| g.len())
        .sum();
    let mut r = Record::new("index");
    r.push("k_max", tuc.k_max())
        .push("l_max", tuc.l_max())
        .push("tuc_keys", keys)
        .push("tuc_entries", entries)
        .push("h", tie.gammas().len())
        .push("tie_nodes", tie.nodes().len())
        .push("tie_leaves", tie.leaf_count())
        .push("samples", tie.tables()[0].samples())
        .push("bytes", bytes);
    if out.timings {
        r.push("tuc_ms", ms(tuc_time)).push("tie_ms", ms(tie_time));
    }
    match out.format {
        Format::Machine => out.record(&r)?,
        Format::Human => {
            writeln!(out.w, "index written to {} ({bytes} bytes)", a.out.display())?;
            write!(
                out.w,
                "  threshold lists: {}x{} cells, {keys} keys, {entries} entries",
                tuc.k_max(),
                tuc.l_max()
            )?;
            if out.timings {
                write!(out.w, ", built in {} ms", ms(tuc_time))?;
            }
            writeln!(out.w)?;
            write!(
                out.w,
                "  topic tree: {} vectors, {} nodes, {} leaves, {} samples per table",
                tie.gammas().len(),
                tie.nodes().len(),
                tie.leaf_count(),
                tie.tables()[0].samples()
            )?;
            if out.timings {
                write!(out.w, ", built in {} ms", ms(tie_time))?;
            }
            writeln!(out.w)?;
        }
    }
    Ok(())
}

/// One parsed query before sampling settings are attached.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryLine {
    pub k: usize,
    pub l: usize,
    pub eta: f64,
    pub q: TopicVector,
}

pub fn parse_query_file(path: &Path) -> Result<Vec<QueryLine>, CliError> {
    let text = std::fs::read_to_string(path).map_err(io_at(path))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |msg: String| invalid(format!("{}: line {}: {msg}", path.display(), i + 1));
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() < 4 {
            return Err(bad("expected 'k l eta q1 .. qz'".into()));
        }
        let k = toks[0].parse().map_err(|_| bad(format!("bad k '{}'", toks[0])))?;
        let l = toks[1].parse().map_err(|_| bad(format!("bad l '{}'", toks[1])))?;
        let eta = toks[2].parse().map_err(|_| bad(format!("bad eta '{}'", toks[2])))?;
        let q = TopicVector::parse_query(&toks[3..].join(" ")).map_err(|e| bad(e.to_string()))?;
        out.push(QueryLine { k, l, eta, q });
    }
    Ok(out)
}

fn query_lines(spec: &QuerySpec) -> Result<Vec<QueryLine>, CliError> {
    match (&spec.q, &spec.queries) {
        (Some(q), None) => Ok(vec![QueryLine {
            k: spec.k,
            l: spec.l,
            eta: spec.eta,
            q: TopicVector::parse_query(q)?,
        }]),
        (None, Some(path)) => parse_query_file(path),
        _ => Err(invalid("give exactly one of --q and --queries")),
    }
}

struct LoadedIndex {
    tuc: TucList,
    tie: TieTree,
}

fn open_index(path: &Path, net: &SocialNetwork) -> Result<LoadedIndex, CliError> {
    let (tuc, tie) = load_index(path, &net.fingerprint()).map_err(|e| match e {
        tamics::Error::Io(io) => io_at(path)(io),
        tamics::Error::IndexMismatch(m) => invalid(format!("{}: {m}", path.display())),
        other => CliError::from(other),
    })?;
    Ok(LoadedIndex { tuc, tie })
}

fn indexed_settings(
    sampling: &SamplingArgs,
    index: &LoadedIndex,
) -> Result<(SampleParams, Normalization), CliError> {
    let s = index.tie.settings();
    if let Some(f) = sampling.normalization {
        if f != s.normalization {
            return Err(invalid(format!(
                "index was built with --f {}, not {}",
                s.normalization.name(),
                f.name()
            )));
        }
    }
    Ok((s.params, s.normalization))
}

fn run_one(
    net: &SocialNetwork,
    line: &QueryLine,
    mode: QueryMode,
    params: SampleParams,
    f: Normalization,
    index: Option<&LoadedIndex>,
) -> Result<QueryResult, CliError> {
    let req = QueryRequest {
        q: line.q.clone(),
        k: line.k,
        l: line.l,
        eta: line.eta,
        params,
        normalization: f,
        mode,
    };
    Ok(match mode {
        QueryMode::Online => online_query(net, &req)?,
        QueryMode::Indexed => {
            let ix = index.ok_or_else(|| invalid("indexed mode needs --index"))?;
            indexed_query(net, &req, &ix.tuc, &ix.tie)?
        }
    })
}

fn query_record(
    id: usize,
    line: &QueryLine,
    res: &QueryResult,
    stats: Option<(&SocialNetwork, Normalization)>,
    timings: bool,
) -> Result<Record, CliError> {
    let mut r = Record::new("query");
    r.push("id", id)
        .push("mode", res.mode.name())
        .push("k", line.k)
        .push("l", line.l)
        .push("eta", line.eta)
        .push("status", res.status.name());
    match &res.community {
        Some(c) => {
            r.push("size", c.len())
                .push("influence", c.influence())
                .push("vertices", list(c.vertices()));
        }
        None => {
            r.push("size", 0).push("influence", "-").push("vertices", "-");
        }
    }
    if let Some((net, f)) = stats {
        match &res.community {
            Some(c) => {
                let g = InteractionGraph::extract_induced(net, &line.q, f, c.vertices())?;
                let s = community_stats(c, &g, net, &line.q, f);
                r.push("density", s.density);
                r.push("similarity", s.similarity.map(|x| x.to_string()).unwrap_or_default());
            }
            None => {
                r.push("density", "-").push("similarity", "-");
            }
        }
    }
    if let Some(IndexProbe {
        gamma_index,
        gamma,
        j_star,
        candidate_count,
    }) = &res.probe
    {
        r.push("gamma_index", gamma_index)
            .push("gamma", list(gamma.as_slice()))
            .push("j_star", j_star.map(|j| j.to_string()).unwrap_or_default())
            .push("candidates", candidate_count);
    }
    if timings {
        let t = &res.timings;
        r.push("probe_ms", ms(t.probe))
            .push("extract_ms", ms(t.extract))
            .push("core_ms", ms(t.core))
            .push("influence_ms", ms(t.influence))
            .push("search_ms", ms(t.search))
            .push("total_ms", ms(t.total()));
    }
    Ok(r)
}

fn human_query(w: &mut dyn Write, r: &Record) -> io::Result<()> {
    let g = |k: &str| r.get(k).unwrap_or("-");
    writeln!(
        w,
        "query {} [{} k={} l={} eta={}]: {}",
        g("id"),
        g("mode"),
        g("k"),
        g("l"),
        g("eta"),
        g("status")
    )?;
    if g("status") == "found" {
        writeln!(w, "  community: {}", g("vertices").replace(',', " "))?;
        writeln!(w, "  size: {}  influence: {}", g("size"), g("influence"))?;
    }
    if r.get("density").is_some() {
        writeln!(w, "  density: {}  similarity: {}", g("density"), g("similarity"))?;
    }
    if r.get("gamma").is_some() {
        writeln!(
            w,
            "  nearest topic vector #{} ({}), first key position {}, {} candidates",
            g("gamma_index"),
            g("gamma"),
            g("j_star"),
            g("candidates")
        )?;
    }
    if r.get("total_ms").is_some() {
        writeln!(
            w,
            "  time (ms): probe {} extract {} core {} influence {} search {} total {}",
            g("probe_ms"),
            g("extract_ms"),
            g("core_ms"),
            g("influence_ms"),
            g("search_ms"),
            g("total_ms")
        )?;
    }
    Ok(())
}

pub fn cmd_query(a: &QueryArgs, out: &mut Out) -> Result<(), CliError> {
    let lines = query_lines(&a.spec)?;
    let net = load_graph(&a.graph)?;
    let index = match (a.mode, &a.index) {
        (QueryMode::Indexed, Some(p)) => Some(open_index(p, &net)?),
        (QueryMode::Indexed, None) => return Err(invalid("indexed mode needs --index")),
        (QueryMode::Online, _) => None,
    };
    let (params, f) = match &index {
        Some(ix) => indexed_settings(&a.sampling, ix)?,
        None => (a.sampling.params()?, a.sampling.normalization()),
    };
    for (id, line) in lines.iter().enumerate() {
        let res = run_one(&net, line, a.mode, params, f, index.as_ref())?;
        let stats = a.stats.then_some((&net, f));
        let r = query_record(id, line, &res, stats, out.timings)?;
        match out.format {
            Format::Machine => out.record(&r)?,
            Format::Human => human_query(out.w, &r)?,
        }
    }
    Ok(())
}

#[derive(Default)]
struct ModeSummary {
    found: usize,
    stage_ms: [f64; 6],
}

const STAGES: [&str; 6] = [
    "probe_ms",
    "extract_ms",
    "core_ms",
    "influence_ms",
    "search_ms",
    "total_ms",
];

/// Aggregates per-query records (as printed by `query`) into the bench summary.
pub fn summarize(records: &[Record], timings: bool, online_only: bool) -> Record {
    let mut online = ModeSummary::default();
    let mut indexed = ModeSummary::default();
    let mut ratios = [0.0f64; 3];
    let mut paired = 0usize;
    let mut queries = 0usize;
    let mut pending: Option<&Record> = None;
    for r in records.iter().filter(|r| r.kind() == Some("query")) {
        let s = match r.get("mode") {
            Some("online") => {
                queries += 1;
                pending = Some(r);
                &mut online
            }
            _ => &mut indexed,
        };
        if r.get("status") == Some("found") {
            s.found += 1;
        }
        for (acc, key) in s.stage_ms.iter_mut().zip(STAGES) {
            *acc += r.number(key).unwrap_or(0.0);
        }
        if r.get("mode") == Some("indexed") {
            if let Some(on) = pending.take() {
                let both = on.get("status") == Some("found") && r.get("status") == Some("found");
                if both {
                    paired += 1;
                    for (acc, key) in ratios.iter_mut().zip(["influence", "density", "size"]) {
                        let (x, y) = (r.number(key).unwrap_or(0.0), on.number(key).unwrap_or(0.0));
                        *acc += if y > 0.0 { x / y } else if x == 0.0 { 1.0 } else { 0.0 };
                    }
                }
            }
        }
    }

    let mut s = Record::new("bench");
    s.push("queries", queries).push("online_found", online.found);
    if !online_only {
        s.push("indexed_found", indexed.found).push("paired", paired);
    }
    if timings && queries > 0 {
        for (v, key) in online.stage_ms.iter().zip(STAGES) {
            s.push(&format!("online_{key}"), format!("{:.3}", v / queries as f64));
        }
        if !online_only {
            for (v, key) in indexed.stage_ms.iter().zip(STAGES) {
                s.push(&format!("indexed_{key}"), format!("{:.3}", v / queries as f64));
            }
            let speedup = if indexed.stage_ms[5] > 0.0 {
                format!("{:.3}", online.stage_ms[5] / indexed.stage_ms[5])
            } else {
                "-".into()
            };
            s.push("speedup", speedup);
        }
    }
    if !online_only && paired > 0 {
        for (v, key) in ratios.iter().zip(["influence", "density", "size"]) {
            s.push(&format!("{key}_ratio"), format!("{:.6}", v / paired as f64));
        }
    }
    s
}

pub fn cmd_bench(a: &BenchArgs, out: &mut Out) -> Result<(), CliError> {
    let net = load_graph(&a.graph)?;
    let index = match (&a.index, a.online_only) {
        (_, true) => None,
        (Some(p), false) => Some(open_index(p, &net)?),
        (None, false) => return Err(invalid("bench needs --index unless --online-only")),
    };
    let (params, f) = match &index {
        Some(ix) => indexed_settings(&a.sampling, ix)?,
        None => (a.sampling.params()?, a.sampling.normalization()),
    };
    let lines = match &a.queries {
        Some(p) => parse_query_file(p)?,
        None => {
            let mut rng = stream_rng(a.sampling.seed, BENCH_STREAM);
            (0..a.count)
                .map(|_| QueryLine {
                    k: a.k,
                    l: a.l,
                    eta: a.eta,
                    q: random_topic(&mut rng, net.topic_count()),
                })
                .collect()
        }
    };

    // timings are always collected here; the flag only hides them
    let mut records = Vec::new();
    for (id, line) in lines.iter().enumerate() {
        let mut modes = vec![QueryMode::Online];
        if index.is_some() {
            modes.push(QueryMode::Indexed);
        }
        for mode in modes {
            let res = run_one(&net, line, mode, params, f, index.as_ref())?;
            let text = query_record(id, line, &res, Some((&net, f)), true)?.to_string();
            records.push(Record::parse(&text).map_err(invalid)?);
        }
    }
    let summary = summarize(&records, out.timings, a.online_only);

    match out.format {
        Format::Machine => {
            for r in &records {
                let mut shown = Record::new("query");
                for key in r.keys().skip(1) {
                    if out.timings || !key.ends_with("_ms") {
                        shown.push(key, r.get(key).unwrap());
                    }
                }
                out.record(&shown)?;
            }
            out.record(&summary)?;
        }
        Format::Human => human_bench(out.w, &summary, a.online_only)?,
    }
    Ok(())
}

fn human_bench(w: &mut dyn Write, s: &Record, online_only: bool) -> io::Result<()> {
    let g = |k: &str| s.get(k).unwrap_or("-").to_string();
    writeln!(w, "queries: {}", g("queries"))?;
    let modes: &[&str] = if online_only { &["online"] } else { &["online", "indexed"] };
    write!(w, "{:<10}{:>8}", "mode", "found")?;
    let timed = s.get("online_total_ms").is_some();
    if timed {
        for st in STAGES {
            write!(w, "{:>14}", st)?;
        }
    }
    writeln!(w)?;
    if g("queries") == "0" {
        return Ok(());
    }
    for m in modes {
        write!(w, "{:<10}{:>8}", m, g(&format!("{m}_found")))?;
        if timed {
            for st in STAGES {
                write!(w, "{:>14}", g(&format!("{m}_{st}")))?;
            }
        }
        writeln!(w)?;
    }
    if !online_only {
        if timed {
            writeln!(w, "speedup (online / indexed total): {}", g("speedup"))?;
        }
        writeln!(
            w,
            "indexed vs online over {} queries found by both: influence {}, density {}, size {}",
            g("paired"),
            g("influence_ratio"),
            g("density_ratio"),
            g("size_ratio")
        )?;
    }
    Ok(())
}

pub fn cmd_verify(a: &VerifyArgs, out: &mut Out) -> Result<(), CliError> {
    if a.cases == 0 {
        return Err(invalid("--cases must be at least 1"));
    }
    let reports = run_suite(&VerifyConfig {
        cases: a.cases,
        seed: a.seed,
        fault: a.inject,
    });
    let mut failed = Vec::new();
    for rep in &reports {
        let mut r = Record::new("verify");
        r.push("property", rep.name)
            .push("cases", rep.cases)
            .push("result", if rep.passed() { "pass" } else { "fail" });
        match out.format {
            Format::Machine => out.record(&r)?,
            Format::Human => match &rep.failure {
                None => writeln!(out.w, "PASS {} ({} cases)", rep.name, rep.cases)?,
                Some(msg) => writeln!(out.w, "FAIL {}: {msg}", rep.name)?,
            },
        }
        if !rep.passed() {
            failed.push(rep.name);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::OracleFailure(format!("failed properties: {}", failed.join(", "))))
    }
}
