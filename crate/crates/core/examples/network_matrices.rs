//! Loads a network description and prints its graph and nodal matrices.
//!
//! cargo run --example network_matrices [potsdam13|ieee123-main46|path.json]

use gridfault::grid::{
    build_adjacency, build_admittance, normalized_propagation, resolve_network, AdjacencyMode,
};

fn main() -> gridfault::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "potsdam13".into());
    let net = resolve_network(&name)?;
    println!(
        "{}: {} buses, {} lines, {} sources, {} loads, {} Hz",
        net.name(),
        net.n_buses(),
        net.n_lines(),
        net.sources().len(),
        net.loads().len(),
        net.frequency_hz()
    );

    let a = build_adjacency(&net, AdjacencyMode::Binary)?;
    let p = normalized_propagation(&a)?;
    let show = net.n_buses().min(6);
    println!("\npropagation matrix, first {show} rows/cols:");
    for row in p.to_rows().iter().take(show) {
        let cells: Vec<String> = row.iter().take(show).map(|v| format!("{v:6.3}")).collect();
        println!("  {}", cells.join(" "));
    }

    let w = build_adjacency(&net, AdjacencyMode::AdmittanceWeighted)?;
    let heaviest = w.matrix().as_slice().iter().cloned().fold(0.0f64, f64::max);
    println!("\nlargest branch admittance magnitude: {heaviest:.4} S");

    let y = build_admittance(&net)?;
    println!("bus admittance matrix: {0}x{0} complex (3 decoupled phases per bus)", y.dim());
    let d = y.matrix()[(0, 0)];
    println!("Y[bus {} phase A, same] = {:.4} {:+.4}j S", net.buses()[0].name, d.re, d.im);
    Ok(())
}
