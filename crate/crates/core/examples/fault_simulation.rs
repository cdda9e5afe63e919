//! Solves one operating point before and after a fault and prints the
//! per-phase voltages at the fault bus, then a few waveform samples around
//! the onset.
//!
//! cargo run --example fault_simulation [category] [bus name] [ohms]

use gridfault::grid::bundled_network;
use gridfault::sim::{solve_phasors, synthesize_waveforms, FaultCategory, FaultSpec, LoadScenario, WaveformParams};

fn main() -> gridfault::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let category: FaultCategory = args.get(1).map(String::as_str).unwrap_or("BCG").parse()?;
    let bus_name = args.get(2).cloned().unwrap_or_else(|| "7".into());
    let resistance: f64 = args.get(3).and_then(|r| r.parse().ok()).unwrap_or(1.0);

    let net = bundled_network("potsdam13")?;
    let bus = net.resolve_buses(&[bus_name.as_str()])?[0];
    let scenario = LoadScenario::random(42, net.loads().len());
    let fault = FaultSpec {
        category,
        resistance,
        bus,
        onset: 0.4,
    };
    let pre = solve_phasors(&net, &scenario, None)?;
    let post = solve_phasors(&net, &scenario, Some(&fault))?;
    let base = net.buses()[bus].peak_phase_volts();

    println!("{} fault through {resistance} ohm at bus {bus_name}", category.name());
    println!("phase   pre (pu)   post (pu)");
    for (p, name) in ["A", "B", "C"].iter().enumerate() {
        println!(
            "  {name}     {:.4}     {:.4}",
            pre.magnitude(bus, p) / base,
            post.magnitude(bus, p) / base
        );
    }
    println!("KCL residual after the fault: {:.1e}", post.residual);

    let params = WaveformParams::default();
    let record = synthesize_waveforms(&pre.voltages, &post.voltages, fault.onset, &params)?;
    let k0 = record.onset_index();
    println!("\nphase A samples at bus {bus_name} around sample {k0}:");
    for k in k0 - 3..k0 + 4 {
        println!("  t = {:.3} s  v = {:8.1} V", params.time(k), record.trace(bus, 0)[k]);
    }
    Ok(())
}
