mod support;

use std::sync::Arc;

use mpmc::autodiff::Tensor;
use mpmc::gnn::{build_radius_graph, init_model};
use mpmc::ProjectionIndexSet;
use support::*;

const TOL: f64 = 1e-4;

#[test]
fn matmul_add_and_biases() {
    for s in 0..20 {
        let mut g = rng(100 + s);
        let a = random_tensor(&mut g, 4, 3, -1.0, 1.0);
        let b = random_tensor(&mut g, 3, 5, -1.0, 1.0);
        assert!(op_gradient_error(&[a.clone(), b], |t, v| t.matmul(v[0], v[1]).unwrap(), s) < TOL);
        let c = random_tensor(&mut g, 4, 3, -1.0, 1.0);
        assert!(op_gradient_error(&[a.clone(), c], |t, v| t.add(v[0], v[1]).unwrap(), s) < TOL);
        let bias = random_tensor(&mut g, 1, 3, -1.0, 1.0);
        assert!(op_gradient_error(&[a.clone(), bias.clone()], |t, v| t.add_bias(v[0], v[1]).unwrap(), s) < TOL);
        let w: Arc<[f64]> = vec![0.0, 2.0, 1.0, 5.0].into();
        let e = op_gradient_error(&[a, bias], |t, v| t.add_weighted_bias(v[0], v[1], w.clone()).unwrap(), s);
        assert!(e < TOL);
    }
}

#[test]
fn pointwise_ops() {
    for s in 0..20 {
        let mut g = rng(200 + s);
        let x = off_kink_tensor(&mut g, 5, 3);
        assert!(op_gradient_error(&[x.clone()], |t, v| t.relu(v[0]), s) < TOL);
        let z = random_tensor(&mut g, 5, 3, -4.0, 4.0);
        assert!(op_gradient_error(&[z.clone()], |t, v| t.sigmoid(v[0]), s) < TOL);
        assert!(op_gradient_error(&[z.clone()], |t, v| t.scale(v[0], -2.5), s) < TOL);
        assert!(op_gradient_error(&[z], |t, v| t.sum(v[0]), s) < TOL);
    }
}

#[test]
fn structural_ops() {
    for s in 0..20 {
        let mut g = rng(300 + s);
        let a = random_tensor(&mut g, 4, 2, -1.0, 1.0);
        let b = random_tensor(&mut g, 4, 3, -1.0, 1.0);
        assert!(op_gradient_error(&[a.clone(), b], |t, v| t.concat(v[0], v[1]).unwrap(), s) < TOL);
        let index: Arc<[usize]> = vec![3, 0, 0, 2, 1, 3].into();
        assert!(op_gradient_error(&[a.clone()], |t, v| t.gather(v[0], index.clone()).unwrap(), s) < TOL);
        let targets: Arc<[usize]> = vec![1, 1, 4, 0].into();
        assert!(op_gradient_error(&[a], |t, v| t.scatter_sum(v[0], targets.clone(), 6).unwrap(), s) < TOL);
    }
}

#[test]
fn discrepancy_losses() {
    for s in 0..20 {
        let mut g = rng(400 + s);
        for d in [1, 2, 3] {
            let p = separated_points(&mut g, 9, d, 1e-4);
            let x = Tensor::from_points(&p);
            assert!(op_gradient_error(&[x.clone()], |t, v| t.warnock_loss(v[0]).unwrap(), s) < TOL, "seed {s} d {d}");
            let subsets: Arc<[ProjectionIndexSet]> =
                (1..1u64 << d).map(|m| ProjectionIndexSet::from_mask(m).unwrap()).collect::<Vec<_>>().into();
            let e = op_gradient_error(&[x], |t, v| t.hickernell_loss(v[0], subsets.clone()).unwrap(), s);
            assert!(e < TOL, "seed {s} d {d}");
        }
    }
}

#[test]
fn end_to_end_warnock_loss() {
    for s in 0..20 {
        let mut g = rng(500 + s);
        let inputs = random_points(&mut g, 16, 2);
        let graph = build_radius_graph(&inputs, 0.4).unwrap();
        let model = init_model(2, 8, 2, s).unwrap();
        let (e, compared) = mpmc_gradient_error(&model, &inputs, &graph);
        assert!(e < TOL, "seed {s}: {e}");
        assert!(compared * 10 >= model.n_params() * 9, "seed {s}: only {compared} of {} compared", model.n_params());
    }
}
