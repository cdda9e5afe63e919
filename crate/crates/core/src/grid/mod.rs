//! Distribution network description and the matrices derived from it.

mod linalg;
mod matrices;

use std::collections::{HashMap, VecDeque};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use linalg::{ComplexMatrix, SquareMatrix};
pub use matrices::{
    build_adjacency, build_admittance, build_admittance_with_loads, normalized_propagation,
    source_injections, AdjacencyMatrix, AdjacencyMode, AdmittanceMatrix,
};

pub const PHASES: usize = 3;

const POTSDAM13: &str = include_str!("../../data/networks/potsdam13.json");
const IEEE123_MAIN46: &str = include_str!("../../data/networks/ieee123-main46.json");

/// Names of the network descriptions compiled into the crate.
pub const BUNDLED_NETWORKS: [&str; 2] = ["potsdam13", "ieee123-main46"];

#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub name: String,
    /// Nominal line-to-line RMS voltage in volts.
    pub nominal_ll_volts: f64,
}

impl Bus {
    /// Peak phase-to-ground voltage used as the per-unit base for waveforms.
    pub fn peak_phase_volts(&self) -> f64 {
        self.nominal_ll_volts * (2.0f64 / 3.0).sqrt()
    }

    pub fn rms_phase_volts(&self) -> f64 {
        self.nominal_ll_volts / 3.0f64.sqrt()
    }
}

/// Three-phase line with identical, uncoupled per-phase series impedance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub from: usize,
    pub to: usize,
    pub impedance: Complex64,
}

/// Thevenin source: per-phase EMF behind an internal impedance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Source {
    pub bus: usize,
    pub phasors: [Complex64; PHASES],
    pub impedance: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LoadModel {
    /// Complex power per phase in VA, converted to a constant admittance at
    /// nominal voltage.
    Power([Complex64; PHASES]),
    /// Shunt admittance per phase in siemens.
    Admittance([Complex64; PHASES]),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Load {
    pub bus: usize,
    pub model: LoadModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGraph {
    name: String,
    frequency_hz: f64,
    buses: Vec<Bus>,
    lines: Vec<Line>,
    sources: Vec<Source>,
    loads: Vec<Load>,
}

impl NetworkGraph {
    /// Builds a graph after checking bus references, self-loops and values.
    /// Connectivity is not required here; see [`NetworkGraph::components`].
    pub fn new(
        name: impl Into<String>,
        frequency_hz: f64,
        buses: Vec<Bus>,
        lines: Vec<Line>,
        sources: Vec<Source>,
        loads: Vec<Load>,
    ) -> Result<Self> {
        let n = buses.len();
        if n == 0 {
            return Err(Error::Validation("network has no buses".into()));
        }
        if !(frequency_hz > 0.0) {
            return Err(Error::Validation(format!("frequency must be positive, got {frequency_hz}")));
        }
        let mut seen = HashMap::new();
        for (i, bus) in buses.iter().enumerate() {
            if let Some(prev) = seen.insert(bus.name.clone(), i) {
                return Err(Error::Validation(format!(
                    "bus name `{}` declared twice (entries {prev} and {i})",
                    bus.name
                )));
            }
            if !(bus.nominal_ll_volts > 0.0) {
                return Err(Error::Validation(format!("bus `{}` has non-positive nominal voltage", bus.name)));
            }
        }
        for (k, line) in lines.iter().enumerate() {
            if line.from >= n || line.to >= n {
                return Err(Error::Validation(format!("line {k} references a bus outside 0..{n}")));
            }
            if line.from == line.to {
                return Err(Error::Validation(format!("line {k} is a self-loop at bus {}", line.from)));
            }
        }
        for (k, src) in sources.iter().enumerate() {
            if src.bus >= n {
                return Err(Error::Validation(format!("source {k} references a bus outside 0..{n}")));
            }
            if src.impedance.norm() == 0.0 {
                return Err(Error::Validation(format!("source {k} has zero internal impedance")));
            }
        }
        for (k, load) in loads.iter().enumerate() {
            if load.bus >= n {
                return Err(Error::Validation(format!("load {k} references a bus outside 0..{n}")));
            }
        }
        Ok(Self {
            name: name.into(),
            frequency_hz,
            buses,
            lines,
            sources,
            loads,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn frequency_hz(&self) -> f64 {
        self.frequency_hz
    }

    pub fn n_buses(&self) -> usize {
        self.buses.len()
    }

    pub fn n_lines(&self) -> usize {
        self.lines.len()
    }

    pub fn buses(&self) -> &[Bus] {
        &self.buses
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn sources(&self) -> &[Source] {
        &self.sources
    }

    pub fn loads(&self) -> &[Load] {
        &self.loads
    }

    pub fn bus_index(&self, name: &str) -> Option<usize> {
        self.buses.iter().position(|b| b.name == name)
    }

    /// Resolves bus labels as written in config files to node indices.
    pub fn resolve_buses<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|name| {
                self.bus_index(name.as_ref())
                    .ok_or_else(|| Error::Validation(format!("unknown bus `{}`", name.as_ref())))
            })
            .collect()
    }

    /// Per-phase shunt admittance of a load at its bus's nominal voltage.
    pub fn load_admittance(&self, load: &Load) -> [Complex64; PHASES] {
        match load.model {
            LoadModel::Admittance(y) => y,
            LoadModel::Power(s) => {
                let v = self.buses[load.bus].rms_phase_volts();
                s.map(|s| s.conj() / (v * v))
            }
        }
    }

    /// Number of connected components (lines treated as undirected edges).
    pub fn components(&self) -> usize {
        let n = self.n_buses();
        let mut adj = vec![Vec::new(); n];
        for line in &self.lines {
            adj[line.from].push(line.to);
            adj[line.to].push(line.from);
        }
        let mut seen = vec![false; n];
        let mut count = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        count
    }

    pub fn is_connected(&self) -> bool {
        self.components() == 1
    }

    /// Serializes back into the network-description JSON schema.
    pub fn to_json(&self) -> Result<String> {
        let file = NetworkFile {
            name: self.name.clone(),
            frequency_hz: self.frequency_hz,
            buses: self
                .buses
                .iter()
                .map(|b| BusEntry {
                    name: b.name.clone(),
                    v_ll: b.nominal_ll_volts,
                })
                .collect(),
            lines: self
                .lines
                .iter()
                .map(|l| LineEntry {
                    from: self.buses[l.from].name.clone(),
                    to: self.buses[l.to].name.clone(),
                    z: [l.impedance.re, l.impedance.im],
                })
                .collect(),
            sources: self
                .sources
                .iter()
                .map(|s| SourceEntry {
                    bus: self.buses[s.bus].name.clone(),
                    phasors: s.phasors.map(|p| [p.re, p.im]),
                    z: [s.impedance.re, s.impedance.im],
                })
                .collect(),
            loads: self
                .loads
                .iter()
                .map(|l| {
                    let (power, admittance) = match l.model {
                        LoadModel::Power(s) => (Some(s.map(|s| [s.re, s.im])), None),
                        LoadModel::Admittance(y) => (None, Some(y.map(|y| [y.re, y.im]))),
                    };
                    LoadEntry {
                        bus: self.buses[l.bus].name.clone(),
                        power,
                        admittance,
                    }
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    name: String,
    #[serde(default = "default_frequency")]
    frequency_hz: f64,
    buses: Vec<BusEntry>,
    #[serde(default)]
    lines: Vec<LineEntry>,
    #[serde(default)]
    sources: Vec<SourceEntry>,
    #[serde(default)]
    loads: Vec<LoadEntry>,
}

fn default_frequency() -> f64 {
    60.0
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BusEntry {
    name: String,
    v_ll: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LineEntry {
    from: String,
    to: String,
    z: [f64; 2],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SourceEntry {
    bus: String,
    phasors: [[f64; 2]; PHASES],
    z: [f64; 2],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoadEntry {
    bus: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    power: Option<[[f64; 2]; PHASES]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    admittance: Option<[[f64; 2]; PHASES]>,
}

fn cpx([re, im]: [f64; 2]) -> Complex64 {
    Complex64::new(re, im)
}

/// Parses a network description from JSON text and validates it, including
/// connectivity.
pub fn parse_network(text: &str) -> Result<NetworkGraph> {
    let file: NetworkFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;

    let buses: Vec<Bus> = file
        .buses
        .iter()
        .map(|b| Bus {
            name: b.name.clone(),
            nominal_ll_volts: b.v_ll,
        })
        .collect();
    let index: HashMap<&str, usize> = file
        .buses
        .iter()
        .enumerate()
        .map(|(i, b)| (b.name.as_str(), i))
        .collect();
    let lookup = |name: &str, what: &str| {
        index
            .get(name)
            .copied()
            .ok_or_else(|| Error::Validation(format!("{what} references undeclared bus `{name}`")))
    };

    let lines = file
        .lines
        .iter()
        .enumerate()
        .map(|(k, l)| {
            Ok(Line {
                from: lookup(&l.from, &format!("line {k}"))?,
                to: lookup(&l.to, &format!("line {k}"))?,
                impedance: cpx(l.z),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let sources = file
        .sources
        .iter()
        .enumerate()
        .map(|(k, s)| {
            Ok(Source {
                bus: lookup(&s.bus, &format!("source {k}"))?,
                phasors: s.phasors.map(cpx),
                impedance: cpx(s.z),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let loads = file
        .loads
        .iter()
        .enumerate()
        .map(|(k, l)| {
            let model = match (l.power, l.admittance) {
                (Some(p), None) => LoadModel::Power(p.map(cpx)),
                (None, Some(y)) => LoadModel::Admittance(y.map(cpx)),
                _ => {
                    return Err(Error::Validation(format!(
                        "load {k} must give exactly one of `power` or `admittance`"
                    )))
                }
            };
            Ok(Load {
                bus: lookup(&l.bus, &format!("load {k}"))?,
                model,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let graph = NetworkGraph::new(file.name, file.frequency_hz, buses, lines, sources, loads)?;
    let components = graph.components();
    if components != 1 {
        return Err(Error::Validation(format!(
            "network must be connected, found {components} components"
        )));
    }
    Ok(graph)
}

/// Reads and validates a network description file.
pub fn load_network(path: impl AsRef<Path>) -> Result<NetworkGraph> {
    let text = std::fs::read_to_string(path)?;
    parse_network(&text)
}

/// Returns one of the bundled networks by name.
pub fn bundled_network(name: &str) -> Result<NetworkGraph> {
    match name {
        "potsdam13" => parse_network(POTSDAM13),
        "ieee123-main46" => parse_network(IEEE123_MAIN46),
        other => Err(Error::InvalidArgument(format!(
            "unknown bundled network `{other}` (available: {})",
            BUNDLED_NETWORKS.join(", ")
        ))),
    }
}

/// Loads a network from a file path, falling back to the bundled name.
pub fn resolve_network(name_or_path: &str) -> Result<NetworkGraph> {
    let path = Path::new(name_or_path);
    if path.exists() {
        load_network(path)
    } else {
        bundled_network(name_or_path)
    }
}
