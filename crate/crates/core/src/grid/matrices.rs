use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::linalg::{ComplexMatrix, SquareMatrix};
use super::{NetworkGraph, PHASES};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdjacencyMode {
    #[default]
    Binary,
    AdmittanceWeighted,
}

/// Symmetric, zero-diagonal, non-negative node adjacency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjacencyMatrix {
    mode: AdjacencyMode,
    entries: SquareMatrix,
}

impl AdjacencyMatrix {
    /// Wraps an arbitrary matrix after checking the adjacency invariants.
    pub fn from_matrix(entries: SquareMatrix, mode: AdjacencyMode) -> Result<Self> {
        let n = entries.dim();
        for i in 0..n {
            if entries[(i, i)] != 0.0 {
                return Err(Error::InvalidArgument(format!("adjacency diagonal entry {i} is nonzero")));
            }
            for j in 0..n {
                let a = entries[(i, j)];
                if !(a >= 0.0) || !a.is_finite() {
                    return Err(Error::InvalidArgument(format!("adjacency entry ({i},{j}) = {a} is not a finite non-negative value")));
                }
                if a != entries[(j, i)] {
                    return Err(Error::InvalidArgument(format!("adjacency is not symmetric at ({i},{j})")));
                }
                if mode == AdjacencyMode::Binary && a != 1.0 && a != 0.0 {
                    return Err(Error::InvalidArgument(format!("binary adjacency entry ({i},{j}) = {a}")));
                }
            }
        }
        Ok(Self { mode, entries })
    }

    pub fn mode(&self) -> AdjacencyMode {
        self.mode
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.entries
    }

    pub fn n_nodes(&self) -> usize {
        self.entries.dim()
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            mode: self.mode,
            entries: self.entries.permuted(perm),
        }
    }
}

pub fn build_adjacency(graph: &NetworkGraph, mode: AdjacencyMode) -> Result<AdjacencyMatrix> {
    let components = graph.components();
    if components != 1 {
        return Err(Error::Disconnected { components });
    }
    let mut a = SquareMatrix::zeros(graph.n_buses());
    for (k, line) in graph.lines().iter().enumerate() {
        let (i, j) = (line.from, line.to);
        match mode {
            AdjacencyMode::Binary => {
                a[(i, j)] = 1.0;
                a[(j, i)] = 1.0;
            }
            AdjacencyMode::AdmittanceWeighted => {
                if line.impedance.norm() == 0.0 {
                    return Err(Error::ZeroImpedance { line: k, from: i, to: j });
                }
                // parallel lines add their admittances
                let w = a[(i, j)] + line.impedance.inv().norm();
                a[(i, j)] = w;
                a[(j, i)] = w;
            }
        }
    }
    Ok(AdjacencyMatrix { mode, entries: a })
}

/// Renormalized propagation matrix `D^-1/2 (A + I) D^-1/2` of a GCN layer.
pub fn normalized_propagation(adjacency: &AdjacencyMatrix) -> Result<SquareMatrix> {
    let a = adjacency.matrix();
    let n = a.dim();
    let mut tilde = a.clone();
    for i in 0..n {
        tilde[(i, i)] += 1.0;
    }
    let degree: Vec<f64> = (0..n)
        .map(|i| {
            // sorted summation keeps the result invariant under node relabeling
            let mut row: Vec<f64> = (0..n).map(|j| tilde[(i, j)]).collect();
            row.sort_by(f64::total_cmp);
            row.iter().sum()
        })
        .collect();
    if let Some(i) = degree.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::InvalidArgument(format!("zero degree at node {i} of A + I")));
    }
    let mut p = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let t = tilde[(i, j)];
            if t != 0.0 {
                p[(i, j)] = t / (degree[i] * degree[j]).sqrt();
            }
        }
    }
    Ok(p)
}

/// Per-phase nodal admittance, ordered bus-major then phase a, b, c.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmittanceMatrix(pub ComplexMatrix);

impl AdmittanceMatrix {
    pub fn index(bus: usize, phase: usize) -> usize {
        bus * PHASES + phase
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn matrix_mut(&mut self) -> &mut ComplexMatrix {
        &mut self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }
}

/// Nominal admittance matrix: lines, load shunts at nominal power, and
/// source internal admittances.
pub fn build_admittance(graph: &NetworkGraph) -> Result<AdmittanceMatrix> {
    let unit = vec![[1.0; PHASES]; graph.loads().len()];
    build_admittance_with_loads(graph, &unit)
}

/// Admittance matrix with each load's per-phase admittance scaled by
/// `multipliers[load][phase]`.
pub fn build_admittance_with_loads(
    graph: &NetworkGraph,
    multipliers: &[[f64; PHASES]],
) -> Result<AdmittanceMatrix> {
    if multipliers.len() != graph.loads().len() {
        return Err(Error::shape(
            "build_admittance_with_loads",
            &[graph.loads().len(), PHASES],
            &[multipliers.len(), PHASES],
        ));
    }
    let n = graph.n_buses();
    let mut y = ComplexMatrix::zeros(n * PHASES);
    for (k, line) in graph.lines().iter().enumerate() {
        if line.impedance.norm() == 0.0 {
            return Err(Error::ZeroImpedance {
                line: k,
                from: line.from,
                to: line.to,
            });
        }
        let yl = line.impedance.inv();
        for p in 0..PHASES {
            let i = AdmittanceMatrix::index(line.from, p);
            let j = AdmittanceMatrix::index(line.to, p);
            y[(i, i)] += yl;
            y[(j, j)] += yl;
            y[(i, j)] -= yl;
            y[(j, i)] -= yl;
        }
    }
    for (load, scale) in graph.loads().iter().zip(multipliers) {
        let yl = graph.load_admittance(load);
        for p in 0..PHASES {
            let i = AdmittanceMatrix::index(load.bus, p);
            y[(i, i)] += yl[p] * scale[p];
        }
    }
    for src in graph.sources() {
        let ys = src.impedance.inv();
        for p in 0..PHASES {
            let i = AdmittanceMatrix::index(src.bus, p);
            y[(i, i)] += ys;
        }
    }
    Ok(AdmittanceMatrix(y))
}

/// Norton current injections of the sources, same ordering as the matrix.
pub fn source_injections(graph: &NetworkGraph) -> Vec<Complex64> {
    let mut current = vec![Complex64::new(0.0, 0.0); graph.n_buses() * PHASES];
    for src in graph.sources() {
        for p in 0..PHASES {
            current[AdmittanceMatrix::index(src.bus, p)] += src.phasors[p] / src.impedance;
        }
    }
    current
}
