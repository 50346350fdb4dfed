use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use subsum_core::cache::{CacheKey, ScanCache, CACHE_DIR_ENV};
use subsum_core::constructions::{
    coset_extremal_set, dir2_sharp_example, fact1_extremal_sequence, staircase_example,
};
use subsum_core::dfs::Budget;
use subsum_core::group::{abelian_groups_in_range, GroupSpec};
use subsum_core::par::ExecMode;
use subsum_core::report::{render, to_value, AnalysisReport, Format};
use subsum_core::scan::{group_report, scan, GroupCommand};
use subsum_core::structure::{fact_bounds_check, is_nice, SearchConfig, DEFAULT_DELTA};
use subsum_core::sumset::{iterated_sumset, largest_subgroup_in, subset_sums};
use subsum_core::text::{format_set, parse_group, parse_items_any, parse_sequence, parse_set};
use subsum_core::theory::{
    compute_constants, profile_subgroup_theorem, sample_spread_subset, verify_fact1,
    verify_fact_bounds, verify_half_plus_two, verify_olson_growth, verify_zero_sum, ProfileMode,
    SpreadOptions, VerifierReport,
};
use subsum_core::{Error, MultisetSequence};

const EXIT_VIOLATION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(name = "subsum", version, about = "Subset sums in finite abelian groups")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Group as comma-separated cyclic factor orders, e.g. 9,5
    #[arg(long, global = true)]
    group: Option<String>,
    /// Set such as {1,2,3} or {(0,0),(1,0)}
    #[arg(long, global = true)]
    set: Option<String>,
    /// Sequence such as seq{1,1,3}
    #[arg(long, global = true)]
    seq: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true)]
    budget_nodes: Option<u64>,
    #[arg(long, global = true)]
    budget_seconds: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Jsonl)]
    format: FormatArg,
    #[arg(long, global = true, env = CACHE_DIR_ENV)]
    cache_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    no_cache: bool,
    /// Run on the calling thread only
    #[arg(long, global = true)]
    sequential: bool,
    /// Fixed include/exclude depth per parallel search task
    #[arg(long, global = true, default_value_t = 6)]
    split_depth: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Jsonl,
    Csv,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Completeness, niceness and bound checks for one set or sequence
    Analyze,
    /// Critical number by exhaustive search, against the closed formula
    Critical,
    /// Run a per-group command over all abelian groups in an order range
    Scan {
        /// Order range lo..hi (inclusive)
        #[arg(long, default_value = "4..24")]
        orders: String,
        #[arg(value_enum)]
        per_group: ScanKind,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
        #[arg(long, default_value_t = 4)]
        max_l: u32,
        #[arg(long)]
        allow_zero: bool,
    },
    /// Exhaustive verification of one property
    Verify {
        #[arg(value_enum)]
        property: Property,
        #[arg(long)]
        max_order: Option<u64>,
        #[arg(long, default_value_t = 4)]
        max_l: u32,
        /// Primes for fact1 (default 2,3,5,7,11)
        #[arg(long, value_delimiter = ',')]
        p: Vec<u64>,
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.25)]
        delta: f64,
        #[arg(long, default_value_t = 1000)]
        max_attempts: u32,
        /// Use the real-valued size window of the sampler verbatim
        #[arg(long)]
        strict_window: bool,
        /// Treat deviations from the printed growth bound as violations
        #[arg(long)]
        strict_literal: bool,
        #[arg(long, default_value_t = 1)]
        threshold: usize,
        /// Sample this many sets instead of enumerating
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Build and check an extremal construction
    Construct {
        #[arg(value_enum)]
        name: ConstructionName,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long)]
        q: Option<u64>,
    },
    /// The constants C(ε) and n(ε)
    Constants {
        #[arg(long)]
        epsilon: f64,
    },
    /// Subset sums of a set or sequence, or an l-fold sumset with --l
    Sumset {
        #[arg(long)]
        l: Option<i64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ScanKind {
    Critical,
    MaxIncomplete,
    MaxNonNice,
    HalfPlusTwo,
    ZeroSum,
    Olson,
    FactBounds,
    CosetExtremal,
}

#[derive(Clone, Copy, ValueEnum)]
enum Property {
    Fact1,
    HalfPlusTwo,
    ZeroSum,
    Olson,
    Constants,
    SpreadLemma,
    SubgroupProfile,
    FactBounds,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstructionName {
    Staircase,
    Dir2Sharp,
    Fact1Extremal,
    CosetExtremal,
}

/// Input problems surface as usage errors.
struct Usage(String);

impl From<Error> for Usage {
    fn from(e: Error) -> Self {
        Usage(e.to_string())
    }
}

type Out = Result<Vec<AnalysisReport>, Usage>;

struct Ctx<'a> {
    global: &'a Global,
    search: SearchConfig,
    cache: Option<ScanCache>,
}

impl Ctx<'_> {
    fn group(&self) -> Result<GroupSpec, Usage> {
        let text = self
            .global
            .group
            .as_deref()
            .ok_or_else(|| Usage("--group is required".into()))?;
        Ok(parse_group(text)?)
    }

    fn items(&self, g: &GroupSpec) -> Result<(MultisetSequence, Value), Usage> {
        match (&self.global.set, &self.global.seq) {
            (Some(s), None) => Ok((parse_items_any(g, s)?, json!({ "set": s }))),
            (None, Some(s)) => Ok((parse_sequence(g, s)?, json!({ "seq": s }))),
            (Some(_), Some(_)) => Err(Usage("give either --set or --seq, not both".into())),
            (None, None) => Err(Usage("--set or --seq is required".into())),
        }
    }

    fn mode(&self) -> ExecMode {
        self.search.mode
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let t0 = Instant::now();
    let global = &cli.global;
    let mode = if global.sequential {
        ExecMode::Sequential
    } else {
        ExecMode::Parallel
    };
    let search = SearchConfig {
        budget: Budget {
            max_nodes: global.budget_nodes,
            max_seconds: global.budget_seconds,
        },
        mode,
        split_depth: global.split_depth,
    };
    let cache = match (&global.cache_dir, global.no_cache) {
        (Some(dir), false) => match ScanCache::open(dir) {
            Ok(c) => Some(c),
            Err(e) => {
                eprintln!("error: cache at {}: {e}", dir.display());
                return ExitCode::from(EXIT_USAGE);
            }
        },
        _ => None,
    };
    let ctx = Ctx {
        global,
        search,
        cache,
    };
    let result = match &cli.command {
        Command::Analyze => analyze(&ctx),
        Command::Critical => critical(&ctx),
        Command::Scan {
            orders,
            per_group,
            delta,
            max_l,
            allow_zero,
        } => run_scan(&ctx, orders, *per_group, *delta, *max_l, *allow_zero),
        Command::Verify {
            property,
            max_order,
            max_l,
            p,
            epsilon,
            delta,
            max_attempts,
            strict_window,
            strict_literal,
            threshold,
            samples,
        } => verify(
            &ctx,
            *property,
            VerifyOpts {
                max_order: *max_order,
                max_l: *max_l,
                primes: p.clone(),
                epsilon: *epsilon,
                delta: *delta,
                max_attempts: *max_attempts,
                strict_window: *strict_window,
                strict_literal: *strict_literal,
                threshold: *threshold,
                samples: *samples,
            },
        ),
        Command::Construct { name, p, q } => construct(&ctx, *name, *p, *q),
        Command::Constants { epsilon } => constants(*epsilon),
        Command::Sumset { l } => sumset_cmd(&ctx, *l),
    };
    let mut reports = match result {
        Ok(r) => r,
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if reports.len() == 1 && reports[0].elapsed_ms == 0.0 {
        let r = reports.pop().expect("one report");
        reports.push(r.elapsed(t0.elapsed().as_secs_f64() * 1e3));
    }
    let format = match global.format {
        FormatArg::Jsonl => Format::Jsonl,
        FormatArg::Csv => Format::Csv,
        FormatArg::Table => Format::Table,
    };
    print!("{}", render(&reports, format));
    if reports.iter().any(|r| !r.passed) {
        ExitCode::from(EXIT_VIOLATION)
    } else if reports.iter().any(|r| r.truncated) {
        ExitCode::from(EXIT_BUDGET)
    } else {
        ExitCode::SUCCESS
    }
}

fn analyze(ctx: &Ctx) -> Out {
    let g = ctx.group()?;
    let (items, echo) = ctx.items(&g)?;
    let sums = subset_sums(&g, &items)?;
    let support = items.support();
    let complete = sums.is_full();
    let mut verdict = json!({
        "complete": complete,
        "subset_sums": sums.to_vec(),
        "subset_sums_text": format_set(&g, &sums),
        "missing": sums.complement().to_vec(),
    });
    let nice = is_nice(&g, &support);
    verdict["nice"] = json!(nice.nice);
    verdict["niceness"] = to_value(&nice);
    let mut passed = true;
    if !complete && items.entries().iter().all(|&(_, m)| m == 1) {
        let fb = fact_bounds_check(&g, &support)?;
        passed = fb.all_pass;
        verdict["fact_bounds"] = to_value(&fb);
    }
    if g.order() <= g.config().lattice_cap {
        if let Some(l) = largest_subgroup_in(&g, &sums)? {
            verdict["largest_subgroup_in_sums"] = to_value(&l.subgroup);
        }
    }
    let mut params = json!({ "command": "analyze", "group": g.factors() });
    params.as_object_mut().expect("object").extend(echo.as_object().expect("object").clone());
    let summary = format!(
        "complete={complete} nice={} S_A={}",
        nice.nice,
        format_set(&g, &sums)
    );
    Ok(vec![AnalysisReport::new("analyze", params, Some(&g), verdict)
        .summary(summary)
        .passed(passed)])
}

/// Run one per-group command through the cache.
fn cached_group_report(ctx: &Ctx, g: &GroupSpec, cmd: &GroupCommand) -> AnalysisReport {
    let key = CacheKey::new(&g.canonical_key().to_string(), cmd.id(), &cmd.params(g, &ctx.search));
    if let Some(hit) = ctx.cache.as_ref().and_then(|c| c.get(&key)) {
        return hit;
    }
    let r = group_report(g, cmd, &ctx.search);
    if let Some(c) = &ctx.cache {
        if !r.truncated {
            if let Err(e) = c.put(key, &r) {
                eprintln!("warning: cache append failed: {e}");
            }
        }
    }
    r
}

fn critical(ctx: &Ctx) -> Out {
    let g = ctx.group()?;
    if g.order() < 2 {
        return Err(Usage("critical number needs a group of order >= 2".into()));
    }
    Ok(vec![cached_group_report(ctx, &g, &GroupCommand::Critical)])
}

fn parse_range(s: &str) -> Result<(u64, u64), Usage> {
    let bad = || Usage(format!("expected an order range lo..hi, got {s:?}"));
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    let hi = hi.strip_prefix('=').unwrap_or(hi);
    let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
    if lo < 2 || lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn run_scan(ctx: &Ctx, orders: &str, kind: ScanKind, delta: f64, max_l: u32, allow_zero: bool) -> Out {
    let (lo, hi) = parse_range(orders)?;
    let cmd = match kind {
        ScanKind::Critical => GroupCommand::Critical,
        ScanKind::MaxIncomplete => GroupCommand::MaxIncomplete { allow_zero },
        ScanKind::MaxNonNice => GroupCommand::MaxNonNice { delta },
        ScanKind::HalfPlusTwo => GroupCommand::HalfPlusTwo {
            seed: ctx.global.seed,
        },
        ScanKind::ZeroSum => GroupCommand::ZeroSum,
        ScanKind::Olson => GroupCommand::Olson { max_l },
        ScanKind::FactBounds => GroupCommand::FactBounds,
        ScanKind::CosetExtremal => GroupCommand::CosetExtremal,
    };
    let out = scan(lo, hi, &cmd, &ctx.search, ctx.cache.as_ref());
    let mut rows = out.rows;
    rows.push(out.summary);
    Ok(rows)
}

struct VerifyOpts {
    max_order: Option<u64>,
    max_l: u32,
    primes: Vec<u64>,
    epsilon: f64,
    delta: f64,
    max_attempts: u32,
    strict_window: bool,
    strict_literal: bool,
    threshold: usize,
    samples: Option<usize>,
}

/// Groups addressed by a verifier: `--group` if given, else every group up
/// to `--max-order`.
fn verifier_groups(ctx: &Ctx, max_order: Option<u64>, default_max: u64) -> Result<Vec<GroupSpec>, Usage> {
    if ctx.global.group.is_some() {
        return Ok(vec![ctx.group()?]);
    }
    Ok(abelian_groups_in_range(2, max_order.unwrap_or(default_max)))
}

fn verifier_out(property: &str, params: Value, group: Option<&GroupSpec>, r: VerifierReport, strict: bool) -> AnalysisReport {
    let passed = r.passed() && !(strict && !r.findings.is_empty());
    let summary = format!(
        "instances={} violations={} findings={}{}",
        r.instances,
        r.violations.len(),
        r.findings.len(),
        if r.sampled { " (sampled)" } else { "" }
    );
    let elapsed = r.elapsed_ms;
    AnalysisReport::new(property, params, group, to_value(&r))
        .summary(summary)
        .passed(passed)
        .elapsed(elapsed)
}

fn verify(ctx: &Ctx, property: Property, o: VerifyOpts) -> Out {
    let mode = ctx.mode();
    let range_text = |groups: &[GroupSpec]| match groups {
        [g] => g.to_string(),
        _ => format!("orders 2..={}", groups.last().map_or(0, |g| g.order())),
    };
    match property {
        Property::Fact1 => {
            let primes = if o.primes.is_empty() {
                vec![2, 3, 5, 7, 11]
            } else {
                o.primes.clone()
            };
            let parts = primes
                .iter()
                .map(|&p| verify_fact1(p, mode))
                .collect::<Result<Vec<_>, _>>()?;
            let r = VerifierReport::combine("fact1", format!("p in {primes:?}"), parts);
            Ok(vec![verifier_out("verify-fact1", json!({ "property": "fact1", "primes": primes }), None, r, false)])
        }
        Property::HalfPlusTwo => {
            let groups = verifier_groups(ctx, o.max_order, 18)?;
            let parts = groups
                .iter()
                .map(|g| verify_half_plus_two(g, mode, o.samples.unwrap_or(10_000), ctx.global.seed))
                .collect();
            let r = VerifierReport::combine("half-plus-two", range_text(&groups), parts);
            let params = json!({ "property": "half-plus-two", "groups": range_text(&groups), "seed": ctx.global.seed });
            Ok(vec![verifier_out("verify-half-plus-two", params, single(&groups), r, false)])
        }
        Property::ZeroSum => {
            let groups = verifier_groups(ctx, o.max_order, 18)?;
            let parts = groups
                .iter()
                .map(|g| verify_zero_sum(g, mode))
                .collect::<Result<Vec<_>, _>>()?;
            let r = VerifierReport::combine("zero-sum", range_text(&groups), parts);
            let params = json!({ "property": "zero-sum", "groups": range_text(&groups) });
            Ok(vec![verifier_out("verify-zero-sum", params, single(&groups), r, false)])
        }
        Property::Olson => {
            let groups = verifier_groups(ctx, o.max_order, 14)?;
            let parts = groups
                .iter()
                .map(|g| verify_olson_growth(g, o.max_l, mode))
                .collect::<Result<Vec<_>, _>>()?;
            let r = VerifierReport::combine("olson", range_text(&groups), parts);
            let params = json!({
                "property": "olson",
                "groups": range_text(&groups),
                "max_l": o.max_l,
                "strict_literal": o.strict_literal,
            });
            Ok(vec![verifier_out("verify-olson", params, single(&groups), r, o.strict_literal)])
        }
        Property::FactBounds => {
            let groups = verifier_groups(ctx, o.max_order, 16)?;
            let parts = groups
                .iter()
                .map(|g| verify_fact_bounds(g, mode))
                .collect::<Result<Vec<_>, _>>()?;
            let r = VerifierReport::combine("fact-bounds", range_text(&groups), parts);
            let params = json!({ "property": "fact-bounds", "groups": range_text(&groups) });
            Ok(vec![verifier_out("verify-fact-bounds", params, single(&groups), r, false)])
        }
        Property::Constants => constants(o.epsilon),
        Property::SpreadLemma => {
            let g = ctx.group()?;
            let s = match &ctx.global.set {
                Some(text) => parse_set(&g, text)?,
                None => g.full_set(),
            };
            let opts = SpreadOptions {
                max_attempts: o.max_attempts,
                strict_window: o.strict_window,
            };
            let params = json!({
                "property": "spread-lemma",
                "group": g.factors(),
                "set": s.to_vec(),
                "delta": o.delta,
                "seed": ctx.global.seed,
                "max_attempts": o.max_attempts,
                "strict_window": o.strict_window,
            });
            let report = match sample_spread_subset(&g, &s, o.delta, ctx.global.seed, opts) {
                Ok(r) => AnalysisReport::new("verify-spread-lemma", params, Some(&g), to_value(&r))
                    .summary(format!(
                        "|S'|={} max fraction {:.4} <= {:.4} after {} attempts",
                        r.subset.count(),
                        r.max_fraction,
                        r.fraction_bound,
                        r.attempts
                    )),
                Err(e @ Error::AttemptsExhausted { .. }) => {
                    AnalysisReport::new("verify-spread-lemma", params, Some(&g), json!({ "error": e.to_string() }))
                        .summary(e.to_string())
                        .passed(false)
                }
                Err(e) => return Err(e.into()),
            };
            Ok(vec![report])
        }
        Property::SubgroupProfile => {
            let g = ctx.group()?;
            let mode_p = match o.samples {
                Some(samples) => ProfileMode::Sampled { samples },
                None => ProfileMode::Exhaustive,
            };
            let r = profile_subgroup_theorem(&g, o.threshold, mode_p, ctx.global.seed, mode)?;
            let params = json!({
                "property": "subgroup-profile",
                "group": g.factors(),
                "threshold": o.threshold,
                "mode": to_value(&mode_p),
                "seed": ctx.global.seed,
            });
            let summary = format!(
                "{} sets, ratio min {:.4} median {:.4} max {:.4} (empirical)",
                r.instances, r.min, r.median, r.max
            );
            Ok(vec![AnalysisReport::new("verify-subgroup-profile", params, Some(&g), to_value(&r)).summary(summary)])
        }
    }
}

fn single(groups: &[GroupSpec]) -> Option<&GroupSpec> {
    match groups {
        [g] => Some(g),
        _ => None,
    }
}

fn construct(ctx: &Ctx, name: ConstructionName, p: Option<u64>, q: Option<u64>) -> Out {
    let need = |x: Option<u64>, flag: &str| x.ok_or_else(|| Usage(format!("--{flag} is required")));
    let (r, params) = match name {
        ConstructionName::Staircase => {
            let p = need(p, "p")?;
            (staircase_example(p)?, json!({ "name": "staircase", "p": p }))
        }
        ConstructionName::Dir2Sharp => {
            let (p, q) = (need(p, "p")?, need(q, "q")?);
            (dir2_sharp_example(p, q)?, json!({ "name": "dir2-sharp", "p": p, "q": q }))
        }
        ConstructionName::Fact1Extremal => {
            let p = need(p, "p")?;
            (fact1_extremal_sequence(p)?, json!({ "name": "fact1-extremal", "p": p }))
        }
        ConstructionName::CosetExtremal => {
            let g = ctx.group()?;
            (coset_extremal_set(&g)?, json!({ "name": "coset-extremal", "group": g.factors() }))
        }
    };
    let failed: Vec<&str> = r.properties().iter().filter(|c| !c.passed()).map(|c| c.id).collect();
    let summary = if failed.is_empty() {
        format!("{} valid, {} properties checked", r.name(), r.properties().len())
    } else {
        format!("{} INVALID: {}", r.name(), failed.join(", "))
    };
    Ok(vec![AnalysisReport::new("construct", params, Some(r.group()), to_value(&r))
        .summary(summary)
        .passed(r.is_valid())])
}

fn constants(epsilon: f64) -> Out {
    let r = compute_constants(epsilon)?;
    let b = &r.boundary;
    let passed = b.holds_at_n_eps && b.fails_below && b.samples_hold && r.sanity_500;
    let summary = format!("C={:.12} n_eps={} (500/eps^4 = {})", r.c, r.n_eps, r.limit_500);
    Ok(vec![AnalysisReport::new(
        "constants",
        json!({ "command": "constants", "epsilon": epsilon }),
        None,
        to_value(&r),
    )
    .summary(summary)
    .passed(passed)])
}

fn sumset_cmd(ctx: &Ctx, l: Option<i64>) -> Out {
    let g = ctx.group()?;
    let (items, echo) = ctx.items(&g)?;
    let mut params = json!({ "command": "sumset", "group": g.factors(), "l": l });
    params.as_object_mut().expect("object").extend(echo.as_object().expect("object").clone());
    let out = match l {
        None => subset_sums(&g, &items)?,
        Some(l) => iterated_sumset(&g, &items.support(), l)?,
    };
    let text = format_set(&g, &out);
    let verdict = json!({
        "result": out.to_vec(),
        "result_text": text,
        "size": out.count(),
        "complete": out.is_full(),
    });
    Ok(vec![AnalysisReport::new("sumset", params, Some(&g), verdict).summary(text)])
}
