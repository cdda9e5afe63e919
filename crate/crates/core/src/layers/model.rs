use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::conv::{Conv1dPool, ConvCache};
use super::dense::{Dense, DenseCache};
use super::gcn::{propagation_tensor, Gcn, GcnCache};
use super::pool::{pool_nodes, pool_nodes_backward, NodePooling, PoolCache};
use super::recurrent::{CellType, Recurrent, RecurrentCache};
use crate::dataset::{derive_seed, Task};
use crate::error::{Error, Result};
use crate::grid::{AdjacencyMatrix, PHASES};
use crate::nn::ops::{concat_cols, concat_cols_backward, sigmoid, softmax_rows};
use crate::nn::{
    dropout, dropout_backward, load_checkpoint, save_checkpoint, Activation, Grads, ParamStore, Tensor,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Ann,
    Lstm,
    Cnn,
    Gcn,
    Rgcn,
}

impl Architecture {
    pub const ALL: [Architecture; 5] = [
        Architecture::Ann,
        Architecture::Lstm,
        Architecture::Cnn,
        Architecture::Gcn,
        Architecture::Rgcn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Architecture::Ann => "ann",
            Architecture::Lstm => "lstm",
            Architecture::Cnn => "cnn",
            Architecture::Gcn => "gcn",
            Architecture::Rgcn => "rgcn",
        }
    }

    /// Whether the trunk emits per-node features.
    pub fn is_graph(self) -> bool {
        matches!(self, Architecture::Gcn | Architecture::Rgcn)
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Architecture {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Architecture::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::UnknownArchitecture(s.to_string()))
    }
}

/// Hidden width of each task head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadWidths {
    pub event: usize,
    #[serde(rename = "type")]
    pub fault_type: usize,
    pub phase: usize,
    pub location: usize,
}

impl HeadWidths {
    pub fn get(&self, task: Task) -> usize {
        match task {
            Task::Event => self.event,
            Task::Type => self.fault_type,
            Task::Phase => self.phase,
            Task::Location => self.location,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSizes {
    /// Trunk widths: dense units (ann), hidden sizes (lstm), channels (cnn),
    /// GCN widths (gcn), or recurrent hidden size then GCN width (rgcn).
    pub trunk: Vec<usize>,
    /// Convolution kernel length (cnn only).
    #[serde(default)]
    pub kernel: usize,
    /// Pool width after each convolution (cnn only).
    #[serde(default)]
    pub pools: Vec<usize>,
    pub heads: HeadWidths,
}

impl LayerSizes {
    pub fn for_architecture(arch: Architecture) -> Self {
        let small = HeadWidths {
            event: 16,
            fault_type: 32,
            phase: 32,
            location: 0,
        };
        let (trunk, kernel, pools, heads) = match arch {
            Architecture::Ann => (
                vec![512, 128],
                0,
                vec![],
                HeadWidths {
                    event: 32,
                    fault_type: 64,
                    phase: 64,
                    location: 64,
                },
            ),
            Architecture::Lstm => (vec![13, 3], 0, vec![], HeadWidths { location: 26, ..small }),
            Architecture::Cnn => (vec![20, 4], 3, vec![2, 3], HeadWidths { location: 39, ..small }),
            Architecture::Gcn => (vec![24, 8], 0, vec![], HeadWidths { location: 3, ..small }),
            Architecture::Rgcn => (vec![5, 8], 0, vec![], HeadWidths { location: 8, ..small }),
        };
        Self {
            trunk,
            kernel,
            pools,
            heads,
        }
    }
}

/// Declarative description of a model: architecture, input geometry, layer
/// sizes and task heads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub architecture: Architecture,
    pub heads: Vec<Task>,
    pub n_buses: usize,
    #[serde(default = "default_phases")]
    pub n_phases: usize,
    pub window: usize,
    pub sizes: LayerSizes,
    #[serde(default)]
    pub pooling: NodePooling,
    #[serde(default)]
    pub cell: CellType,
    #[serde(default = "default_dropout")]
    pub dropout: f64,
    /// Initialization seed.
    #[serde(default)]
    pub seed: u64,
}

fn default_phases() -> usize {
    PHASES
}

fn default_dropout() -> f64 {
    0.1
}

impl ModelSpec {
    pub fn new(architecture: Architecture, heads: &[Task], n_buses: usize, window: usize) -> Self {
        Self {
            architecture,
            heads: heads.to_vec(),
            n_buses,
            n_phases: PHASES,
            window,
            sizes: LayerSizes::for_architecture(architecture),
            pooling: NodePooling::Mean,
            cell: CellType::Lstm,
            dropout: 0.1,
            seed: 0,
        }
    }

    pub fn input_width(&self) -> usize {
        self.n_buses * self.n_phases * self.window
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n_buses == 0 || self.window == 0 || self.n_phases != PHASES {
            return bad(format!(
                "input geometry {}x{}x{} is invalid",
                self.n_buses, self.n_phases, self.window
            ));
        }
        if self.heads.is_empty() {
            return bad("a model needs at least one task head".into());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout {} outside [0, 1)", self.dropout));
        }
        if self.sizes.trunk.len() != 2 || self.sizes.trunk.contains(&0) {
            return bad(format!("{} expects two positive trunk widths", self.architecture));
        }
        if self.heads.iter().any(|&t| self.sizes.heads.get(t) == 0) {
            return bad("head widths must be positive".into());
        }
        if self.architecture == Architecture::Cnn {
            if self.sizes.pools.len() != 2 {
                return bad("cnn expects two pool widths".into());
            }
            let mut len = self.window;
            for &p in &self.sizes.pools {
                if self.sizes.kernel == 0 || self.sizes.kernel > len || p == 0 || p > len + 1 - self.sizes.kernel {
                    return bad(format!("cnn kernel/pool do not fit window {}", self.window));
                }
                len = (len + 1 - self.sizes.kernel) / p;
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ModelSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone)]
enum Trunk {
    Ann(Vec<Dense>),
    Lstm(Vec<Recurrent>),
    Cnn(Vec<Conv1dPool>),
    Gcn(Vec<Gcn>),
    Rgcn { rnn: Recurrent, gcn: Gcn },
}

#[derive(Debug, Clone)]
enum TrunkCache {
    Ann(Vec<DenseCache>),
    Lstm(Vec<RecurrentCache>),
    Cnn(Vec<ConvCache>),
    Gcn(Vec<GcnCache>),
    Rgcn(RecurrentCache, GcnCache),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum HeadInput {
    /// One feature row per sample.
    Vector,
    /// Node rows pooled into one row per sample.
    Pooled(NodePooling),
    /// Shared per-node hidden layer, flattened into a dense N-way output.
    PerNode,
}

#[derive(Debug, Clone)]
struct Head {
    input: HeadInput,
    hidden: Dense,
    out: Dense,
}

#[derive(Debug, Clone)]
struct HeadCache {
    pool: Option<PoolCache>,
    hidden: DenseCache,
    mask: Option<Tensor>,
    out: DenseCache,
}

/// Intermediate values of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    batch: usize,
    task: Task,
    trunk: TrunkCache,
    head: HeadCache,
}

/// Dropout switch and seed for a forward pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mode {
    pub training: bool,
    pub seed: u64,
}

impl Mode {
    pub const EVAL: Mode = Mode {
        training: false,
        seed: 0,
    };

    pub fn train(seed: u64) -> Self {
        Self { training: true, seed }
    }
}

/// Trunk plus task heads over a named parameter registry. Trunk parameters
/// are named `trunk.*`, head parameters `head.<task>.*`.
#[derive(Debug, Clone)]
pub struct Model {
    spec: ModelSpec,
    pub store: ParamStore,
    trunk: Trunk,
    heads: Vec<(Task, Head)>,
}

/// `[B, N*3*K]` samples to K step inputs `[B*N, 3]` (per-node sequences).
fn node_sequences(x: &Tensor, n: usize, d: usize, k: usize) -> Result<Vec<Tensor>> {
    let b = x.rows();
    (0..k)
        .map(|t| {
            let mut data = Vec::with_capacity(b * n * d);
            for s in 0..b {
                let row = x.row(s);
                for node in 0..n {
                    for p in 0..d {
                        data.push(row[(node * d + p) * k + t]);
                    }
                }
            }
            Tensor::new(&[b * n, d], data)
        })
        .collect()
}

/// `[B, N*3*K]` samples to K step inputs `[B, N*3]`.
fn graph_sequences(x: &Tensor, width: usize, k: usize) -> Result<Vec<Tensor>> {
    let b = x.rows();
    (0..k)
        .map(|t| {
            let data = (0..b)
                .flat_map(|s| (0..width).map(move |c| (s, c)))
                .map(|(s, c)| x.row(s)[c * k + t])
                .collect();
            Tensor::new(&[b, width], data)
        })
        .collect()
}

/// `[B, C*K]` channel-major samples to time-major `[B*K, C]`.
fn time_major(x: &Tensor, channels: usize, k: usize) -> Result<Tensor> {
    let b = x.rows();
    let mut data = Vec::with_capacity(x.len());
    for s in 0..b {
        let row = x.row(s);
        for t in 0..k {
            for c in 0..channels {
                data.push(row[c * k + t]);
            }
        }
    }
    Tensor::new(&[b * k, channels], data)
}

fn cat(parts: &[Tensor]) -> Result<Tensor> {
    concat_cols(&parts.iter().collect::<Vec<_>>())
}

impl Model {
    /// Builds and initializes a model. The adjacency supplies the GCN
    /// propagation matrix and must have `spec.n_buses` nodes.
    pub fn new(spec: ModelSpec, adjacency: &AdjacencyMatrix) -> Result<Self> {
        spec.validate()?;
        if adjacency.n_nodes() != spec.n_buses {
            return Err(Error::shape("build_model", &[spec.n_buses], &[adjacency.n_nodes()]));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut store = ParamStore::new();
        let (n, d, k) = (spec.n_buses, spec.n_phases, spec.window);
        let sizes = &spec.sizes;
        let relu = Activation::Relu;
        let (trunk, feature_width) = match spec.architecture {
            Architecture::Ann => {
                let mut layers = Vec::new();
                let mut width = spec.input_width();
                for (i, &w) in sizes.trunk.iter().enumerate() {
                    layers.push(Dense::new(&mut store, &format!("trunk.dense{i}"), width, w, relu, &mut rng)?);
                    width = w;
                }
                (Trunk::Ann(layers), width)
            }
            Architecture::Lstm => {
                let mut layers = Vec::new();
                let mut width = n * d;
                for (i, &h) in sizes.trunk.iter().enumerate() {
                    layers.push(Recurrent::new(&mut store, &format!("trunk.rnn{i}"), spec.cell, width, h, &mut rng)?);
                    width = h;
                }
                (Trunk::Lstm(layers), width * k)
            }
            Architecture::Cnn => {
                let mut convs = Vec::new();
                let (mut channels, mut length) = (n * d, k);
                for (i, (&c, &p)) in sizes.trunk.iter().zip(&sizes.pools).enumerate() {
                    let conv = Conv1dPool::new(
                        &mut store,
                        &format!("trunk.conv{i}"),
                        channels,
                        c,
                        sizes.kernel,
                        p,
                        length,
                        &mut rng,
                    )?;
                    length = conv.out_length();
                    channels = c;
                    convs.push(conv);
                }
                (Trunk::Cnn(convs), channels * length)
            }
            Architecture::Gcn => {
                let p = propagation_tensor(adjacency)?;
                let mut layers = Vec::new();
                let mut width = d * k;
                let last = sizes.trunk.len() - 1;
                for (i, &w) in sizes.trunk.iter().enumerate() {
                    let act = if i == last { Activation::Identity } else { relu };
                    layers.push(Gcn::new(&mut store, &format!("trunk.gcn{i}"), width, w, act, p.clone(), &mut rng)?);
                    width = w;
                }
                (Trunk::Gcn(layers), width)
            }
            Architecture::Rgcn => {
                let (h, w) = (sizes.trunk[0], sizes.trunk[1]);
                let rnn = Recurrent::new(&mut store, "trunk.rnn", spec.cell, d, h, &mut rng)?;
                let p = propagation_tensor(adjacency)?;
                let gcn = Gcn::new(&mut store, "trunk.gcn", h * k, w, Activation::Identity, p, &mut rng)?;
                (Trunk::Rgcn { rnn, gcn }, w)
            }
        };

        let mut heads = Vec::new();
        for &task in &spec.heads {
            if heads.iter().any(|(t, _)| *t == task) {
                return Err(Error::InvalidArgument(format!("duplicate {task} head")));
            }
            let input = match (spec.architecture.is_graph(), task) {
                (false, _) => HeadInput::Vector,
                (true, Task::Location) => HeadInput::PerNode,
                (true, _) => HeadInput::Pooled(spec.pooling),
            };
            let hidden_width = sizes.heads.get(task);
            let out_inputs = if input == HeadInput::PerNode { n * hidden_width } else { hidden_width };
            let name = format!("head.{task}");
            let hidden = Dense::new(&mut store, &format!("{name}.hidden"), feature_width, hidden_width, relu, &mut rng)?;
            let out = Dense::new(
                &mut store,
                &format!("{name}.out"),
                out_inputs,
                task.output_width(n),
                Activation::Identity,
                &mut rng,
            )?;
            heads.push((task, Head { input, hidden, out }));
        }
        Ok(Self {
            spec,
            store,
            trunk,
            heads,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn set_dropout(&mut self, rate: f64) -> Result<()> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::InvalidArgument(format!("dropout {rate} outside [0, 1)")));
        }
        self.spec.dropout = rate;
        Ok(())
    }

    pub fn architecture(&self) -> Architecture {
        self.spec.architecture
    }

    pub fn tasks(&self) -> Vec<Task> {
        self.heads.iter().map(|(t, _)| *t).collect()
    }

    pub fn has_head(&self, task: Task) -> bool {
        self.heads.iter().any(|(t, _)| *t == task)
    }

    fn head(&self, task: Task) -> Result<&Head> {
        self.heads
            .iter()
            .find(|(t, _)| *t == task)
            .map(|(_, h)| h)
            .ok_or_else(|| Error::Task(format!("model has no {task} head")))
    }

    /// Replaces the graph used by GCN layers (same node count).
    pub fn set_adjacency(&mut self, adjacency: &AdjacencyMatrix) -> Result<()> {
        if adjacency.n_nodes() != self.spec.n_buses {
            return Err(Error::shape("set_adjacency", &[self.spec.n_buses], &[adjacency.n_nodes()]));
        }
        let p = propagation_tensor(adjacency)?;
        match &mut self.trunk {
            Trunk::Gcn(layers) => layers.iter_mut().for_each(|g| g.propagation = p.clone()),
            Trunk::Rgcn { gcn, .. } => gcn.propagation = p,
            _ => {}
        }
        Ok(())
    }

    fn trunk_forward(&self, x: &Tensor) -> Result<(Tensor, TrunkCache)> {
        let s = &self.store;
        let (n, d, k) = (self.spec.n_buses, self.spec.n_phases, self.spec.window);
        Ok(match &self.trunk {
            Trunk::Ann(layers) => {
                let mut h = x.clone();
                let mut caches = Vec::new();
                for l in layers {
                    let (y, c) = l.forward(s, &h)?;
                    caches.push(c);
                    h = y;
                }
                (h, TrunkCache::Ann(caches))
            }
            Trunk::Lstm(layers) => {
                let mut seq = graph_sequences(x, n * d, k)?;
                let mut caches = Vec::new();
                for l in layers {
                    let (hs, c) = l.forward(s, &seq)?;
                    caches.push(c);
                    seq = hs;
                }
                (cat(&seq)?, TrunkCache::Lstm(caches))
            }
            Trunk::Cnn(convs) => {
                let mut h = time_major(x, n * d, k)?;
                let mut caches = Vec::new();
                for conv in convs {
                    let (y, c) = conv.forward(s, &h)?;
                    caches.push(c);
                    h = y;
                }
                let width = h.len() / x.rows();
                (h.into_shape(&[x.rows(), width])?, TrunkCache::Cnn(caches))
            }
            Trunk::Gcn(layers) => {
                let mut h = x.reshape(&[x.rows() * n, d * k])?;
                let mut caches = Vec::new();
                for l in layers {
                    let (y, c) = l.forward(s, &h)?;
                    caches.push(c);
                    h = y;
                }
                (h, TrunkCache::Gcn(caches))
            }
            Trunk::Rgcn { rnn, gcn } => {
                let (hs, rc) = rnn.forward(s, &node_sequences(x, n, d, k)?)?;
                let (y, gc) = gcn.forward(s, &cat(&hs)?)?;
                (y, TrunkCache::Rgcn(rc, gc))
            }
        })
    }

    fn trunk_backward(&self, cache: &TrunkCache, dy: &Tensor, grads: &mut Grads) -> Result<()> {
        let s = &self.store;
        match (&self.trunk, cache) {
            (Trunk::Ann(layers), TrunkCache::Ann(caches)) => {
                let mut g = dy.clone();
                for (l, c) in layers.iter().zip(caches).rev() {
                    g = l.backward(s, c, &g, grads)?;
                }
            }
            (Trunk::Lstm(layers), TrunkCache::Lstm(caches)) => {
                let k = self.spec.window;
                let last = layers.last().map_or(0, Recurrent::hidden);
                let mut dhs = concat_cols_backward(dy, &vec![last; k])?;
                for (l, c) in layers.iter().zip(caches).rev() {
                    dhs = l.backward(s, c, &dhs, grads)?;
                }
            }
            (Trunk::Cnn(convs), TrunkCache::Cnn(caches)) => {
                let last = convs.last().expect("two convolutions");
                let mut g = dy.reshape(&[dy.rows() * last.out_length(), last.out_channels])?;
                for (conv, c) in convs.iter().zip(caches).rev() {
                    g = conv.backward(s, c, &g, grads)?;
                }
            }
            (Trunk::Gcn(layers), TrunkCache::Gcn(caches)) => {
                let mut g = dy.clone();
                for (l, c) in layers.iter().zip(caches).rev() {
                    g = l.backward(s, c, &g, grads)?;
                }
            }
            (Trunk::Rgcn { rnn, gcn }, TrunkCache::Rgcn(rc, gc)) => {
                let dh = gcn.backward(s, gc, dy, grads)?;
                let dhs = concat_cols_backward(&dh, &vec![rnn.hidden(); self.spec.window])?;
                rnn.backward(s, rc, &dhs, grads)?;
            }
            _ => return Err(Error::InvalidArgument("trunk cache does not match the model".into())),
        }
        Ok(())
    }

    /// Logits for `task`: `[B, 1]` for event, `[B, classes]` otherwise.
    pub fn forward(&self, x: &Tensor, task: Task, mode: Mode) -> Result<(Tensor, ForwardCache)> {
        if x.cols() != self.spec.input_width() {
            return Err(Error::shape("model forward", x.shape(), &[x.rows(), self.spec.input_width()]));
        }
        let head = self.head(task)?;
        let batch = x.rows();
        let (features, trunk) = self.trunk_forward(x)?;
        let (pooled, pool) = match head.input {
            HeadInput::Pooled(mode) => {
                let (p, c) = pool_nodes(&features, self.spec.n_buses, mode)?;
                (p, Some(c))
            }
            _ => (features, None),
        };
        let (h, hidden) = head.hidden.forward(&self.store, &pooled)?;
        let seed = derive_seed(mode.seed, &[task as u64]);
        let (mut h, mask) = dropout(&h, self.spec.dropout, mode.training, seed)?;
        if head.input == HeadInput::PerNode {
            let width = h.cols() * self.spec.n_buses;
            h = h.into_shape(&[batch, width])?;
        }
        let (logits, out) = head.out.forward(&self.store, &h)?;
        let cache = ForwardCache {
            batch,
            task,
            trunk,
            head: HeadCache {
                pool,
                hidden,
                mask,
                out,
            },
        };
        Ok((logits, cache))
    }

    /// Accumulates parameter gradients for upstream logit gradients `dlogits`.
    pub fn backward(&self, cache: &ForwardCache, dlogits: &Tensor, grads: &mut Grads) -> Result<()> {
        let head = self.head(cache.task)?;
        let mut g = head.out.backward(&self.store, &cache.head.out, dlogits, grads)?;
        if head.input == HeadInput::PerNode {
            let width = g.cols() / self.spec.n_buses;
            g = g.into_shape(&[cache.batch * self.spec.n_buses, width])?;
        }
        let g = dropout_backward(&g, cache.head.mask.as_ref())?;
        let mut g = head.hidden.backward(&self.store, &cache.head.hidden, &g, grads)?;
        if let Some(pc) = &cache.head.pool {
            g = pool_nodes_backward(pc, &g)?;
        }
        self.trunk_backward(&cache.trunk, &g, grads)
    }

    /// Inference logits with dropout off.
    pub fn logits(&self, x: &Tensor, task: Task) -> Result<Tensor> {
        Ok(self.forward(x, task, Mode::EVAL)?.0)
    }

    /// Class probabilities: sigmoid of the event logit, softmax otherwise.
    pub fn predict_proba(&self, x: &Tensor, task: Task) -> Result<Tensor> {
        let z = self.logits(x, task)?;
        Ok(match task {
            Task::Event => sigmoid(&z),
            _ => softmax_rows(&z),
        })
    }

    /// Copies every `trunk.*` parameter value from `source`.
    pub fn copy_trunk_from(&mut self, source: &Model) -> Result<()> {
        let ids: Vec<_> = self
            .store
            .iter()
            .filter(|(_, name, _)| name.starts_with("trunk."))
            .map(|(id, name, _)| (id, name.to_string()))
            .collect();
        for (id, name) in ids {
            let src = source
                .store
                .id(&name)
                .ok_or_else(|| Error::InvalidArgument(format!("source model lacks `{name}`")))?;
            let value = source.store.value(src);
            if value.shape() != self.store.value(id).shape() {
                return Err(Error::shape("copy_trunk_from", self.store.value(id).shape(), value.shape()));
            }
            self.store.get_mut(id).value = value.clone();
        }
        Ok(())
    }

    pub fn set_trunk_frozen(&mut self, frozen: bool) {
        self.store.set_frozen_where(frozen, |n| n.starts_with("trunk."));
    }

    /// Values of every trunk parameter, in registry order.
    pub fn trunk_values(&self) -> Vec<(String, Tensor)> {
        self.store
            .iter()
            .filter(|(_, n, _)| n.starts_with("trunk."))
            .map(|(_, n, p)| (n.to_string(), p.value.clone()))
            .collect()
    }

    /// Writes the checkpoint and the spec as `<path>.json`.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        save_checkpoint(&self.store, path)?;
        std::fs::write(spec_path(path), self.spec.to_json()? + "\n")?;
        Ok(())
    }

    /// Rebuilds a model from a checkpoint written by [`Model::save`].
    pub fn load(path: impl AsRef<Path>, adjacency: &AdjacencyMatrix) -> Result<Self> {
        let path = path.as_ref();
        let spec = ModelSpec::from_json(&std::fs::read_to_string(spec_path(path))?)?;
        let mut model = Model::new(spec, adjacency)?;
        model.store.load_entries(&load_checkpoint(path)?)?;
        Ok(model)
    }
}

/// Spec sidecar of a checkpoint file.
pub fn spec_path(checkpoint: &Path) -> std::path::PathBuf {
    checkpoint.with_extension("json")
}
