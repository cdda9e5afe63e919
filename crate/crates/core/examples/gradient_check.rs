//! Central-difference gradient checks of individual layers and of a whole
//! R-GCN, printed as max relative errors.
//!
//! cargo run --example gradient_check

use gridfault::dataset::Task;
use gridfault::grid::{AdjacencyMatrix, AdjacencyMode, SquareMatrix};
use gridfault::layers::{propagation_tensor, Architecture, Dense, Gcn, LstmCell, Mode, Model, ModelSpec};
use gridfault::nn::ops::{concat_cols, concat_cols_backward};
use gridfault::nn::{check_layer, grad_check, random_tensor, Activation, Grads, ParamStore};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ring(n: usize) -> AdjacencyMatrix {
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        rows[i][(i + 1) % n] = 1.0;
        rows[(i + 1) % n][i] = 1.0;
    }
    AdjacencyMatrix::from_matrix(SquareMatrix::from_rows(&rows).unwrap(), AdjacencyMode::Binary).unwrap()
}

fn main() -> gridfault::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);

    let mut store = ParamStore::new();
    let dense = Dense::new(&mut store, "d", 6, 4, Activation::Tanh, &mut rng)?;
    let e = check_layer(&store, 1, &[3, 6], |s, x| dense.forward(s, x), |s, c, dy, g| dense.backward(s, c, dy, g))?;
    println!("dense (tanh)   {e:.2e}");

    let mut store = ParamStore::new();
    let gcn = Gcn::new(&mut store, "g", 4, 8, Activation::Relu, propagation_tensor(&ring(5))?, &mut rng)?;
    let e = check_layer(&store, 2, &[10, 4], |s, x| gcn.forward(s, x), |s, c, dy, g| gcn.backward(s, c, dy, g))?;
    println!("gcn (relu)     {e:.2e}");

    let mut store = ParamStore::new();
    let lstm = LstmCell::new(&mut store, "l", 3, 5, &mut rng)?;
    let e = check_layer(
        &store,
        3,
        &[2, 13],
        |s, v| {
            let p = concat_cols_backward(v, &[3, 5, 5])?;
            let (h, c, cache) = lstm.step(s, &p[0], &p[1], &p[2])?;
            Ok((concat_cols(&[&h, &c])?, cache))
        },
        |s, cache, dy, g| {
            let d = concat_cols_backward(dy, &[5, 5])?;
            let (dx, dh, dc) = lstm.step_backward(s, cache, &d[0], &d[1], g)?;
            concat_cols(&[&dx, &dh, &dc])
        },
    )?;
    println!("lstm step      {e:.2e}");

    // whole model: logits projected on a fixed random vector
    let (n, k) = (4, 8);
    let mut spec = ModelSpec::new(Architecture::Rgcn, &[Task::Type], n, k);
    spec.dropout = 0.0;
    let model = Model::new(spec, &ring(n))?;
    let x = random_tensor(&[2, n * 3 * k], &mut rng);
    let w = random_tensor(&[2, 6], &mut rng);
    let flat: Vec<f64> = model.store.iter().flat_map(|(_, _, p)| p.value.data().to_vec()).collect();
    let e = grad_check(
        |v| {
            let mut m = model.clone();
            let mut at = 0;
            for (_, p) in m.store.params_mut() {
                let len = p.value.len();
                p.value.data_mut().copy_from_slice(&v[at..at + len]);
                at += len;
            }
            let (z, cache) = m.forward(&x, Task::Type, Mode::EVAL)?;
            let mut grads = Grads::zeros_like(&m.store);
            m.backward(&cache, &w, &mut grads)?;
            Ok((z.data().iter().zip(w.data()).map(|(a, b)| a * b).sum(), grads.flatten()))
        },
        &flat,
        1e-6,
    )?;
    println!("r-gcn ({} parameters) {e:.2e}", flat.len());
    Ok(())
}
