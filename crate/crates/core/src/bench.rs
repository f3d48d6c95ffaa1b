//! Benchmark families: generate instances per seed, run solver modes on the
//! same instances, and aggregate into CSV rows.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{ParseError, SolveError};
use crate::generators::{parse_key_values, GenSpec, GridGenSpec, KeyValue};
use crate::high_level::{solve, solve_as_mapf, Outcome, SolveConfig};
use crate::instance::TapfInstance;
use crate::oracle::{optimal_makespan, OracleOutcome, DEFAULT_STATE_LIMIT};
use crate::solution::{validate_solution, Solution};

pub const CSV_HEADER: &str =
    "family,agents,team_size,mode,seed_count,success_rate,mean_makespan,mean_time_s,mean_hl_nodes,mean_ll_calls";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Cbm,
    CbmUnweighted,
    MapfRandomAssign,
    Oracle,
}

impl Mode {
    pub const ALL: [Mode; 4] = [
        Mode::Cbm,
        Mode::CbmUnweighted,
        Mode::MapfRandomAssign,
        Mode::Oracle,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Cbm => "cbm",
            Mode::CbmUnweighted => "cbm-unweighted",
            Mode::MapfRandomAssign => "mapf-random-assign",
            Mode::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown mode '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub outcome: Outcome,
    pub solution: Option<Solution>,
    pub time: Duration,
    pub hl_nodes: usize,
    pub ll_calls: usize,
}

impl RunResult {
    pub fn makespan(&self) -> Option<usize> {
        self.solution.as_ref().map(Solution::makespan)
    }
}

/// Runs one solver mode. `seed` drives the random assignment of
/// `mapf-random-assign` and is ignored otherwise.
pub fn run_mode(
    instance: &TapfInstance,
    mode: Mode,
    seed: u64,
    config: &SolveConfig,
) -> Result<RunResult, SolveError> {
    let report = match mode {
        Mode::Cbm => solve(instance, &SolveConfig { weighted: true, ..*config })?,
        Mode::CbmUnweighted => solve(instance, &SolveConfig { weighted: false, ..*config })?,
        Mode::MapfRandomAssign => solve_as_mapf(instance, seed, config)?,
        Mode::Oracle => {
            let started = Instant::now();
            let cap = config.max_t.unwrap_or(usize::MAX);
            let r = optimal_makespan(instance, cap, DEFAULT_STATE_LIMIT)
                .map_err(|e| SolveError::Unsupported(e.to_string()))?;
            let (outcome, solution) = match r {
                OracleOutcome::Optimal { solution, .. } => (Outcome::Solution, Some(solution)),
                OracleOutcome::Infeasible => (Outcome::NoSolution, None),
                OracleOutcome::CapReached => (Outcome::HorizonCap, None),
            };
            return Ok(RunResult {
                outcome,
                solution,
                time: started.elapsed(),
                hl_nodes: 0,
                ll_calls: 0,
            });
        }
    };
    Ok(RunResult {
        outcome: report.outcome,
        solution: report.solution,
        time: report.stats.wall_time,
        hl_nodes: report.stats.nodes_generated,
        ll_calls: report.stats.low_level_calls,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    pub name: String,
    /// Instance spec; team counts and seeds are overridden per run.
    pub spec: GenSpec,
    /// Total agent counts (grid families only).
    pub agents: Vec<usize>,
    /// Team sizes (grid families only).
    pub team_sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    pub modes: Vec<Mode>,
    pub time_limit: Option<Duration>,
    /// Horizon cap; `None` uses four times the vertex count.
    pub max_t: Option<usize>,
}

impl Family {
    /// Reads a family from `key = value` text. Besides the generator keys:
    /// `name`, `agents` and `team_size` (lists, grid only), `seeds` (count),
    /// `first_seed`, `modes` (list), `time_limit` (seconds), `max_t`.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let pairs = parse_key_values(text)?;
        let mut gen_pairs: Vec<KeyValue> = Vec::new();
        let mut name = "family".to_string();
        let mut agents = None;
        let mut team_sizes = None;
        let mut seed_count = 1u64;
        let mut first_seed = 0u64;
        let mut modes = vec![Mode::Cbm];
        let mut time_limit = None;
        let mut max_t = None;
        for p in pairs {
            match p.key.as_str() {
                "name" => name = p.value.clone(),
                "agents" => agents = Some(p.parse_list::<usize>()?),
                "team_size" => team_sizes = Some(p.parse_list::<usize>()?),
                "seeds" => seed_count = p.parse()?,
                "first_seed" => first_seed = p.parse()?,
                "modes" => {
                    modes = p
                        .value
                        .split_whitespace()
                        .map(|m| m.parse::<Mode>().map_err(|e| ParseError::new(p.line, e)))
                        .collect::<Result<_, _>>()?
                }
                "time_limit" => time_limit = Some(Duration::from_secs_f64(p.parse::<f64>()?)),
                "max_t" => max_t = Some(p.parse()?),
                _ => gen_pairs.push(p),
            }
        }
        if name.contains(',') {
            return Err(ParseError::new(0, "family name must not contain ','"));
        }
        let spec = GenSpec::from_pairs(&gen_pairs)?;
        let (agents, team_sizes) = match &spec {
            GenSpec::Grid(g) => {
                let sizes = team_sizes.unwrap_or(vec![g.team_size]);
                let agents = agents.unwrap_or(vec![g.team_count * g.team_size]);
                for &a in &agents {
                    for &k in &sizes {
                        if k == 0 || a % k != 0 {
                            return Err(ParseError::new(
                                0,
                                format!("{a} agents cannot be split into teams of {k}"),
                            ));
                        }
                    }
                }
                (agents, sizes)
            }
            GenSpec::Warehouse(w) => {
                if agents.is_some() || team_sizes.is_some() {
                    return Err(ParseError::new(
                        0,
                        "agents and team_size apply to grid families only",
                    ));
                }
                (vec![w.agent_count()], vec![w.units_per_station])
            }
        };
        Ok(Family {
            name,
            spec,
            agents,
            team_sizes,
            seeds: (first_seed..first_seed + seed_count).collect(),
            modes,
            time_limit,
            max_t,
        })
    }

    /// The instance for one configuration and seed. All modes share it.
    pub fn instance(&self, agents: usize, team_size: usize, seed: u64) -> Result<TapfInstance, String> {
        let spec = match &self.spec {
            GenSpec::Grid(g) => GenSpec::Grid(GridGenSpec {
                team_count: agents / team_size,
                team_size,
                seed,
                ..*g
            }),
            w => w.with_seed(seed),
        };
        spec.generate().map_err(|e| e.to_string())
    }

    /// (agents, team size) pairs. A warehouse spec fixes its own single pair.
    fn configurations(&self) -> Vec<(usize, usize)> {
        if let GenSpec::Warehouse(w) = &self.spec {
            return vec![(w.agent_count(), w.units_per_station)];
        }
        let mut out = Vec::new();
        for &a in &self.agents {
            for &k in &self.team_sizes {
                out.push((a, k));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub family: String,
    pub agents: usize,
    pub team_size: usize,
    pub mode: Mode,
    pub seed_count: usize,
    pub success_rate: f64,
    /// Means over solved instances only; `None` when nothing was solved.
    pub mean_makespan: Option<f64>,
    pub mean_time_s: Option<f64>,
    pub mean_hl_nodes: Option<f64>,
    pub mean_ll_calls: Option<f64>,
}

impl BenchRow {
    pub fn to_csv(&self, timing: bool) -> String {
        let opt = |v: Option<f64>, digits: usize| match v {
            Some(x) => format!("{x:.digits$}"),
            None => "NA".to_string(),
        };
        format!(
            "{},{},{},{},{},{:.4},{},{},{},{}",
            self.family,
            self.agents,
            self.team_size,
            self.mode,
            self.seed_count,
            self.success_rate,
            opt(self.mean_makespan, 4),
            if timing { opt(self.mean_time_s, 6) } else { "NA".into() },
            opt(self.mean_hl_nodes, 2),
            opt(self.mean_ll_calls, 2),
        )
    }
}

/// One solver run inside a benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRun {
    pub agents: usize,
    pub team_size: usize,
    pub mode: Mode,
    pub seed: u64,
    pub result: Result<RunResult, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOutput {
    pub rows: Vec<BenchRow>,
    pub runs: Vec<BenchRun>,
    /// Invalid solutions and cbm/oracle makespan disagreements.
    pub problems: Vec<String>,
}

impl BenchOutput {
    pub fn to_csv(&self, timing: bool) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.to_csv(timing));
            out.push('\n');
        }
        out
    }
}

/// Runs every (configuration, mode, seed) of the family in parallel and
/// aggregates in configuration, mode, seed order.
pub fn run_family(family: &Family, base: &SolveConfig) -> BenchOutput {
    let mut jobs = Vec::new();
    for (a, k) in family.configurations() {
        for &mode in &family.modes {
            for &seed in &family.seeds {
                jobs.push((a, k, mode, seed));
            }
        }
    }
    let runs: Vec<BenchRun> = jobs
        .par_iter()
        .map(|&(agents, team_size, mode, seed)| {
            let result = family.instance(agents, team_size, seed).and_then(|inst| {
                let config = SolveConfig {
                    time_limit: family.time_limit.or(base.time_limit),
                    max_t: family
                        .max_t
                        .or(base.max_t)
                        .or(Some(4 * inst.graph.vertex_count())),
                    ..*base
                };
                run_mode(&inst, mode, seed, &config).map_err(|e| e.to_string())
            });
            BenchRun {
                agents,
                team_size,
                mode,
                seed,
                result,
            }
        })
        .collect();

    let mut problems = Vec::new();
    for run in &runs {
        let Ok(r) = &run.result else { continue };
        let Some(sol) = &r.solution else { continue };
        let inst = family
            .instance(run.agents, run.team_size, run.seed)
            .expect("generated before");
        if let Err(v) = validate_solution(&inst, sol) {
            problems.push(format!(
                "{} agents={} team_size={} seed={}: invalid solution: {}",
                run.mode,
                run.agents,
                run.team_size,
                run.seed,
                v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
            ));
        }
    }
    for (a, k) in family.configurations() {
        for &seed in &family.seeds {
            let find = |mode: Mode| {
                runs.iter()
                    .find(|r| (r.agents, r.team_size, r.mode, r.seed) == (a, k, mode, seed))
                    .and_then(|r| r.result.as_ref().ok())
                    .map(|r| (r.outcome, r.makespan()))
            };
            if let (Some(cbm), Some(oracle)) = (find(Mode::Cbm), find(Mode::Oracle)) {
                let comparable = cbm.0 != Outcome::Timeout && oracle.0 != Outcome::HorizonCap;
                if comparable && cbm.1 != oracle.1 {
                    problems.push(format!(
                        "agents={a} team_size={k} seed={seed}: cbm makespan {:?} differs from oracle {:?}",
                        cbm.1, oracle.1
                    ));
                }
            }
        }
    }

    let mut rows = Vec::new();
    for (a, k) in family.configurations() {
        for &mode in &family.modes {
            let mine: Vec<&BenchRun> = runs
                .iter()
                .filter(|r| (r.agents, r.team_size, r.mode) == (a, k, mode))
                .collect();
            let solved: Vec<&RunResult> = mine
                .iter()
                .filter_map(|r| r.result.as_ref().ok())
                .filter(|r| r.outcome == Outcome::Solution)
                .collect();
            let mean = |f: &dyn Fn(&RunResult) -> f64| {
                (!solved.is_empty())
                    .then(|| solved.iter().map(|r| f(r)).sum::<f64>() / solved.len() as f64)
            };
            rows.push(BenchRow {
                family: family.name.clone(),
                agents: a,
                team_size: k,
                mode,
                seed_count: mine.len(),
                success_rate: solved.len() as f64 / mine.len().max(1) as f64,
                mean_makespan: mean(&|r| r.makespan().unwrap_or(0) as f64),
                mean_time_s: mean(&|r| r.time.as_secs_f64()),
                mean_hl_nodes: mean(&|r| r.hl_nodes as f64),
                mean_ll_calls: mean(&|r| r.ll_calls as f64),
            });
        }
    }
    BenchOutput {
        rows,
        runs,
        problems,
    }
}
