//! Seeded instance generators: random 4-neighbor grids and warehouse
//! layouts with inventory stations.
//!
//! Specs can be read from `key = value` text, one pair per line, `#` starts
//! a comment. `kind = grid` or `kind = warehouse` selects the family.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{GenError, ParseError};
use crate::graph::{Graph, VertexId};
use crate::instance::{TapfInstance, Team, TeamFlags};

/// Attempts at drawing a usable blocked mask before giving up.
pub const MAX_RESAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGenSpec {
    pub width: usize,
    pub height: usize,
    /// Fraction of cells to block, in `[0, 1)`.
    pub blocked_fraction: f64,
    pub team_count: usize,
    pub team_size: usize,
    pub seed: u64,
}

impl Default for GridGenSpec {
    fn default() -> Self {
        GridGenSpec {
            width: 30,
            height: 30,
            blocked_fraction: 0.1,
            team_count: 2,
            team_size: 5,
            seed: 0,
        }
    }
}

/// Random grid: `⌊fraction · cells⌋` blocked cells drawn uniformly, then
/// distinct start and target cells drawn uniformly from the free cells. The
/// whole draw is repeated until every team's starts and targets share a
/// connected component.
pub fn gen_grid(spec: &GridGenSpec) -> Result<TapfInstance, GenError> {
    let cells = spec.width * spec.height;
    let agents = spec.team_count * spec.team_size;
    if !(0.0..1.0).contains(&spec.blocked_fraction) {
        return Err(GenError::Unsatisfiable(format!(
            "blocked_fraction {} outside [0, 1)",
            spec.blocked_fraction
        )));
    }
    let blocked_count = (spec.blocked_fraction * cells as f64).floor() as usize;
    if agents == 0 || 2 * agents > cells - blocked_count {
        return Err(GenError::Unsatisfiable(format!(
            "{agents} agents need {} free cells, grid has {}",
            2 * agents,
            cells - blocked_count
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..MAX_RESAMPLES {
        let mut order: Vec<usize> = (0..cells).collect();
        order.shuffle(&mut rng);
        let mut blocked = vec![false; cells];
        for &c in &order[..blocked_count] {
            blocked[c] = true;
        }
        let graph = Graph::grid(spec.width, spec.height, blocked).expect("mask has grid size");
        let mut free: Vec<VertexId> = (0..graph.vertex_count()).collect();
        free.shuffle(&mut rng);
        let starts = &free[..agents];
        let targets = &free[agents..2 * agents];
        let comp = graph.components();
        let teams: Vec<Team> = (0..spec.team_count)
            .map(|i| {
                let r = i * spec.team_size..(i + 1) * spec.team_size;
                Team::new(starts[r.clone()].to_vec(), targets[r].to_vec())
            })
            .collect();
        let connected = teams.iter().all(|t| {
            let c = comp[t.starts[0]];
            t.starts.iter().chain(&t.targets).all(|&v| comp[v] == c)
        });
        if connected {
            return Ok(TapfInstance::new(graph, teams));
        }
    }
    Err(GenError::ResampleLimit(MAX_RESAMPLES))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WarehouseGenSpec {
    pub stations: usize,
    /// Incoming units per station.
    pub units_per_station: usize,
    /// Outgoing units leaving each station's exit; defaults to
    /// `units_per_station`.
    pub outgoing_per_station: Option<usize>,
    /// Extra empty storage cells offered to the outgoing team.
    pub surplus_cells: usize,
    /// Storage blocks are two rows high and `block_width` cells wide.
    pub block_rows: usize,
    pub block_cols: usize,
    pub block_width: usize,
    pub seed: u64,
}

impl Default for WarehouseGenSpec {
    fn default() -> Self {
        WarehouseGenSpec {
            stations: 3,
            units_per_station: 4,
            outgoing_per_station: None,
            surplus_cells: 0,
            block_rows: 4,
            block_cols: 2,
            block_width: 4,
            seed: 0,
        }
    }
}

/// Cell roles of a warehouse layout, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cell {
    Aisle,
    Storage,
    Entrance(usize),
    Exit(usize),
    Wall,
}

struct Layout {
    width: usize,
    height: usize,
    cells: Vec<Cell>,
}

impl WarehouseGenSpec {
    pub fn outgoing(&self) -> usize {
        self.outgoing_per_station.unwrap_or(self.units_per_station)
    }

    pub fn agent_count(&self) -> usize {
        self.stations * (self.units_per_station + self.outgoing())
    }

    /// Column 0 holds the stations (entrance above exit, three rows apart),
    /// columns 1-2 are an aisle, and the storage blocks follow, each block
    /// preceded by an aisle column and separated vertically by aisle rows.
    fn layout(&self) -> Layout {
        let width = 3 + self.block_cols * (self.block_width + 1);
        let height = (3 * self.block_rows + 1).max(3 * self.stations + 1);
        let mut cells = vec![Cell::Aisle; width * height];
        for y in 0..height {
            cells[y * width] = Cell::Wall;
        }
        for s in 0..self.stations {
            cells[(3 * s + 1) * width] = Cell::Entrance(s);
            cells[(3 * s + 2) * width] = Cell::Exit(s);
        }
        for r in 0..self.block_rows {
            for dy in 1..=2 {
                let y = 3 * r + dy;
                for c in 0..self.block_cols {
                    let x0 = 3 + c * (self.block_width + 1) + 1;
                    for x in x0..x0 + self.block_width {
                        cells[y * width + x] = Cell::Storage;
                    }
                }
            }
        }
        Layout {
            width,
            height,
            cells,
        }
    }
}

/// Warehouse instance: one funnel team per station whose units start in
/// storage and all end at the station entrance, plus one outgoing team that
/// leaves the station exits one unit per step and parks in the vacated
/// storage cells (or in surplus empty cells). Storage cells holding neither
/// a unit nor a surplus slot are blocked.
pub fn gen_warehouse(spec: &WarehouseGenSpec) -> Result<TapfInstance, GenError> {
    if spec.stations == 0 || spec.units_per_station == 0 || spec.block_width == 0 {
        return Err(GenError::Unsatisfiable("empty warehouse".into()));
    }
    let layout = spec.layout();
    let storage: Vec<usize> = (0..layout.cells.len())
        .filter(|&c| layout.cells[c] == Cell::Storage)
        .collect();
    let incoming = spec.stations * spec.units_per_station;
    let open_slots = incoming + spec.surplus_cells;
    if open_slots > storage.len() {
        return Err(GenError::Unsatisfiable(format!(
            "{open_slots} storage cells needed, layout has {}",
            storage.len()
        )));
    }
    let outgoing_total = spec.stations * spec.outgoing();
    if outgoing_total > open_slots {
        return Err(GenError::Unsatisfiable(format!(
            "{outgoing_total} outgoing units but only {open_slots} open storage cells"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut picked = storage.clone();
    picked.shuffle(&mut rng);
    picked.truncate(open_slots);

    let mut blocked: Vec<bool> = layout
        .cells
        .iter()
        .map(|&c| matches!(c, Cell::Wall | Cell::Storage))
        .collect();
    for &c in &picked {
        blocked[c] = false;
    }
    let graph = Graph::grid(layout.width, layout.height, blocked).expect("layout has grid size");
    let meta = graph.grid_meta().expect("grid graph");
    let vertex = |cell: usize| {
        meta.vertex_at(cell % layout.width, cell / layout.width)
            .expect("open cell")
    };
    let station_cell = |want: Cell| {
        (0..layout.cells.len())
            .find(|&c| layout.cells[c] == want)
            .expect("station exists")
    };

    let mut teams = Vec::with_capacity(spec.stations + 1);
    let (unit_cells, surplus) = picked.split_at(incoming);
    for s in 0..spec.stations {
        let starts: Vec<VertexId> = unit_cells[s * spec.units_per_station..(s + 1) * spec.units_per_station]
            .iter()
            .map(|&c| vertex(c))
            .collect();
        let entrance = vertex(station_cell(Cell::Entrance(s)));
        teams.push(
            Team::new(starts, vec![entrance; spec.units_per_station]).with_flags(TeamFlags {
                funnel_target: true,
                ..TeamFlags::default()
            }),
        );
    }
    let mut out_starts = Vec::with_capacity(outgoing_total);
    for s in 0..spec.stations {
        let exit = vertex(station_cell(Cell::Exit(s)));
        out_starts.extend(std::iter::repeat_n(exit, spec.outgoing()));
    }
    let mut out_targets: Vec<VertexId> = unit_cells.iter().chain(surplus).map(|&c| vertex(c)).collect();
    out_targets.sort_unstable();
    let flags = TeamFlags {
        shared_start_spread: true,
        surplus_targets: out_targets.len() > out_starts.len(),
        ..TeamFlags::default()
    };
    if !out_starts.is_empty() {
        teams.push(Team::new(out_starts, out_targets).with_flags(flags));
    }
    Ok(TapfInstance::new(graph, teams))
}

#[derive(Debug, Clone, PartialEq)]
pub enum GenSpec {
    Grid(GridGenSpec),
    Warehouse(WarehouseGenSpec),
}

impl GenSpec {
    pub fn seed(&self) -> u64 {
        match self {
            GenSpec::Grid(g) => g.seed,
            GenSpec::Warehouse(w) => w.seed,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        match *self {
            GenSpec::Grid(g) => GenSpec::Grid(GridGenSpec { seed, ..g }),
            GenSpec::Warehouse(w) => GenSpec::Warehouse(WarehouseGenSpec { seed, ..w }),
        }
    }

    pub fn generate(&self) -> Result<TapfInstance, GenError> {
        match self {
            GenSpec::Grid(g) => gen_grid(g),
            GenSpec::Warehouse(w) => gen_warehouse(w),
        }
    }

    /// Reads a spec from `key = value` pairs. Unknown keys are rejected;
    /// missing keys keep their defaults.
    pub fn from_pairs(pairs: &[KeyValue]) -> Result<Self, ParseError> {
        let kind = pairs
            .iter()
            .find(|p| p.key == "kind")
            .map(|p| p.value.as_str())
            .unwrap_or("grid");
        match kind {
            "grid" => {
                let mut g = GridGenSpec::default();
                for p in pairs {
                    match p.key.as_str() {
                        "kind" => {}
                        "width" => g.width = p.parse()?,
                        "height" => g.height = p.parse()?,
                        "blocked_fraction" => g.blocked_fraction = p.parse()?,
                        "team_count" | "teams" => g.team_count = p.parse()?,
                        "team_size" => g.team_size = p.parse()?,
                        "seed" => g.seed = p.parse()?,
                        _ => return Err(p.unknown()),
                    }
                }
                Ok(GenSpec::Grid(g))
            }
            "warehouse" => {
                let mut w = WarehouseGenSpec::default();
                for p in pairs {
                    match p.key.as_str() {
                        "kind" => {}
                        "stations" => w.stations = p.parse()?,
                        "units_per_station" => w.units_per_station = p.parse()?,
                        "outgoing_per_station" => w.outgoing_per_station = Some(p.parse()?),
                        "surplus_cells" => w.surplus_cells = p.parse()?,
                        "block_rows" => w.block_rows = p.parse()?,
                        "block_cols" => w.block_cols = p.parse()?,
                        "block_width" => w.block_width = p.parse()?,
                        "seed" => w.seed = p.parse()?,
                        _ => return Err(p.unknown()),
                    }
                }
                Ok(GenSpec::Warehouse(w))
            }
            other => Err(ParseError::new(0, format!("unknown kind '{other}'"))),
        }
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        Self::from_pairs(&parse_key_values(text)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyValue {
    pub key: String,
    pub value: String,
    pub line: usize,
}

impl KeyValue {
    pub fn parse<T: std::str::FromStr>(&self) -> Result<T, ParseError> {
        self.value
            .parse()
            .map_err(|_| ParseError::new(self.line, format!("bad value '{}' for {}", self.value, self.key)))
    }

    /// Whitespace-separated list value.
    pub fn parse_list<T: std::str::FromStr>(&self) -> Result<Vec<T>, ParseError> {
        self.value
            .split_whitespace()
            .map(|w| {
                w.parse()
                    .map_err(|_| ParseError::new(self.line, format!("bad value '{w}' for {}", self.key)))
            })
            .collect()
    }

    pub fn unknown(&self) -> ParseError {
        ParseError::new(self.line, format!("unknown key '{}'", self.key))
    }
}

/// Splits `key = value` lines. Blank lines and `#` comments are skipped.
pub fn parse_key_values(text: &str) -> Result<Vec<KeyValue>, ParseError> {
    let mut out: Vec<KeyValue> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ParseError::new(i + 1, "expected 'key = value'"))?;
        let key = k.trim().to_string();
        if out.iter().any(|p| p.key == key) {
            return Err(ParseError::new(i + 1, format!("duplicate key '{key}'")));
        }
        out.push(KeyValue {
            key,
            value: v.trim().to_string(),
            line: i + 1,
        });
    }
    Ok(out)
}
