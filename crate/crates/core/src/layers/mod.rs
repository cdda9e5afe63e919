//! Dense, graph convolution, recurrent (LSTM and GRU), convolution and node
//! pooling layers, and the five model architectures assembled from them.

mod conv;
mod dense;
mod gcn;
mod model;
mod pool;
mod recurrent;
#[cfg(test)]
pub(crate) mod testing;

pub use conv::{Conv1dPool, ConvCache};
pub use dense::{Dense, DenseCache};
pub use gcn::{propagation_tensor, Gcn, GcnCache};
pub use model::{spec_path, Architecture, ForwardCache, HeadWidths, LayerSizes, Mode, Model, ModelSpec};
pub use pool::{pool_nodes, pool_nodes_backward, NodePooling, PoolCache};
pub use recurrent::{CellType, GruCell, GruStep, LstmCell, LstmOutput, LstmStep, Recurrent, RecurrentCache};
