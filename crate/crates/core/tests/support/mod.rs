//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use mpmc::autodiff::{Tape, Tensor, Var};
use mpmc::gnn::{Graph, MpmcModel};
use mpmc::PointSet64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    mpmc::seed::rng(seed)
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> PointSet64 {
    let coords = (0..n * d).map(|_| rng.random::<f64>()).collect();
    PointSet64::new(n, d, coords).unwrap()
}

/// Coordinates on the grid `k/8`, so ties and boundary values are common.
pub fn grid_points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> PointSet64 {
    let coords = (0..n * d).map(|_| rng.random_range(0..=8) as f64 / 8.0).collect();
    PointSet64::new(n, d, coords).unwrap()
}

/// Random points whose coordinates differ by more than `gap` within every column.
pub fn separated_points(rng: &mut ChaCha8Rng, n: usize, d: usize, gap: f64) -> PointSet64 {
    loop {
        let p = random_points(rng, n, d);
        let ok = (0..d).all(|k| {
            let mut c = p.column(k);
            c.sort_by(f64::total_cmp);
            c.windows(2).all(|w| w[1] - w[0] > gap)
        });
        if ok {
            return p;
        }
    }
}

/// Squared L2 star discrepancy by tensor-grid Gauss-Legendre quadrature of
/// `(#{p < x}/N - vol[0,x))^2`. The cube is cut at every coordinate, the
/// count is constant on each cell and the integrand is quadratic in each
/// variable, so two nodes per axis and cell are exact.
pub fn quadrature_l2_squared(points: &PointSet64) -> f64 {
    let (n, d) = (points.n_points(), points.dim());
    let cuts: Vec<Vec<f64>> = (0..d)
        .map(|k| {
            let mut c = points.column(k);
            c.extend([0.0, 1.0]);
            c.sort_by(f64::total_cmp);
            c.dedup();
            c
        })
        .collect();
    let g = 0.5 / 3f64.sqrt();
    let mut total = 0.0;
    let mut cell = vec![0usize; d];
    loop {
        let lo: Vec<f64> = (0..d).map(|k| cuts[k][cell[k]]).collect();
        let hi: Vec<f64> = (0..d).map(|k| cuts[k][cell[k] + 1]).collect();
        let count = points.rows().filter(|p| (0..d).all(|k| p[k] <= lo[k])).count() as f64 / n as f64;
        let jac: f64 = (0..d).map(|k| hi[k] - lo[k]).product();
        for mask in 0..1usize << d {
            let vol: f64 = (0..d)
                .map(|k| {
                    let mid = 0.5 * (lo[k] + hi[k]);
                    let off = if mask >> k & 1 == 1 { g } else { -g };
                    mid + off * (hi[k] - lo[k])
                })
                .product();
            total += jac / (1 << d) as f64 * (count - vol).powi(2);
        }
        let mut k = 0;
        loop {
            if k == d {
                return total;
            }
            cell[k] += 1;
            if cell[k] + 1 < cuts[k].len() {
                break;
            }
            cell[k] = 0;
            k += 1;
        }
    }
}

/// Star discrepancy from every corner whose coordinates are point
/// coordinates, 0 or 1, comparing both closed and open box counts.
pub fn naive_star(points: &PointSet64) -> f64 {
    let (n, d) = (points.n_points(), points.dim());
    let axes: Vec<Vec<f64>> = (0..d)
        .map(|k| {
            let mut c = points.column(k);
            c.extend([0.0, 1.0]);
            c
        })
        .collect();
    let mut best = 0f64;
    let mut idx = vec![0usize; d];
    loop {
        let x: Vec<f64> = (0..d).map(|k| axes[k][idx[k]]).collect();
        let vol: f64 = x.iter().product();
        let closed = points.rows().filter(|p| (0..d).all(|k| p[k] <= x[k])).count() as f64 / n as f64;
        let open = points.rows().filter(|p| (0..d).all(|k| p[k] < x[k])).count() as f64 / n as f64;
        best = best.max((closed - vol).abs()).max((open - vol).abs());
        let mut k = 0;
        loop {
            if k == d {
                return best;
            }
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

pub fn random_tensor(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> Tensor {
    Tensor::new(rows, cols, (0..rows * cols).map(|_| rng.random_range(lo..hi)).collect()).unwrap()
}

/// ReLU-friendly values: magnitudes in `[0.1, 1)` with random sign.
pub fn off_kink_tensor(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Tensor {
    let data = (0..rows * cols)
        .map(|_| {
            let m = rng.random_range(0.1..1.0);
            if rng.random::<bool>() { m } else { -m }
        })
        .collect();
    Tensor::new(rows, cols, data).unwrap()
}

/// `|a - b| <= tol * max(|a|, |b|, floor)`.
pub fn rel_close(a: f64, b: f64, tol: f64, floor: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(floor)
}

/// Largest relative deviation between the tape gradient and central
/// differences of `r · op(inputs) · w` for random weights `r`, `w`.
pub fn op_gradient_error<F>(inputs: &[Tensor], op: F, seed: u64) -> f64
where
    F: Fn(&mut Tape, &[Var]) -> Var,
{
    let shape = {
        let mut t = Tape::new();
        let vars: Vec<Var> = inputs.iter().map(|x| t.constant(x.clone())).collect();
        let y = op(&mut t, &vars);
        t.value(y).shape()
    };
    let mut g = rng(seed);
    let r = random_tensor(&mut g, 1, shape.0, -1.0, 1.0);
    let w = random_tensor(&mut g, shape.1, 1, -1.0, 1.0);
    let loss = |tape: &mut Tape, vars: &[Var]| {
        let y = op(tape, vars);
        let rv = tape.constant(r.clone());
        let wv = tape.constant(w.clone());
        let ry = tape.matmul(rv, y).unwrap();
        tape.matmul(ry, wv).unwrap()
    };
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|x| tape.leaf(x.clone())).collect();
    let l = loss(&mut tape, &vars);
    tape.backward(l).unwrap();
    let grads: Vec<Tensor> = vars.iter().map(|&v| tape.grad(v).unwrap().clone()).collect();

    let eval = |xs: &[Tensor]| {
        let mut t = Tape::new();
        let vars: Vec<Var> = xs.iter().map(|x| t.constant(x.clone())).collect();
        let l = loss(&mut t, &vars);
        t.value(l).data()[0]
    };
    let h = 1e-6;
    let mut worst = 0f64;
    let mut xs = inputs.to_vec();
    for a in 0..xs.len() {
        for e in 0..xs[a].data().len() {
            let x0 = xs[a].data()[e];
            xs[a].data_mut()[e] = x0 + h;
            let up = eval(&xs);
            xs[a].data_mut()[e] = x0 - h;
            let down = eval(&xs);
            xs[a].data_mut()[e] = x0;
            let fd = (up - down) / (2.0 * h);
            let got = grads[a].data()[e];
            worst = worst.max((got - fd).abs() / got.abs().max(fd.abs()).max(1e-3));
        }
    }
    worst
}

pub fn mpmc_loss_on_tape(model: &MpmcModel, inputs: &PointSet64, graph: &Graph, tape: &mut Tape, leaves: bool) -> (Vec<Var>, Var) {
    let params: Vec<Var> = model
        .params()
        .into_iter()
        .map(|p| if leaves { tape.leaf(p.clone()) } else { tape.constant(p.clone()) })
        .collect();
    let x = tape.constant(Tensor::from_points(inputs));
    let out = model.forward_on_tape(tape, &params, x, graph).unwrap();
    let loss = tape.warnock_loss(out).unwrap();
    (params, loss)
}

pub fn mpmc_loss(model: &MpmcModel, inputs: &PointSet64, graph: &Graph) -> f64 {
    let mut tape = Tape::new();
    let (_, l) = mpmc_loss_on_tape(model, inputs, graph, &mut tape, false);
    tape.value(l).data()[0]
}

/// Largest relative deviation of the end-to-end Warnock-loss gradient from
/// central differences, and the number of parameters compared. Parameters
/// whose step crosses a ReLU kink are left out.
pub fn mpmc_gradient_error(model: &MpmcModel, inputs: &PointSet64, graph: &Graph) -> (f64, usize) {
    let mut tape = Tape::new();
    let (params, l) = mpmc_loss_on_tape(model, inputs, graph, &mut tape, true);
    tape.backward(l).unwrap();
    let grads: Vec<Tensor> = params.iter().map(|&p| tape.grad(p).unwrap().clone()).collect();
    let base = mpmc_loss(model, inputs, graph);
    let scale = grads.iter().flat_map(|g| g.data()).fold(0f64, |m, g| m.max(g.abs()));
    let h = 1e-6;
    let mut m = model.clone();
    let mut worst = 0f64;
    let mut compared = 0;
    for (a, grad) in grads.iter().enumerate() {
        for e in 0..grad.data().len() {
            let x0 = m.params_mut()[a].data()[e];
            let mut at = |x: f64| {
                m.params_mut()[a].data_mut()[e] = x;
                mpmc_loss(&m, inputs, graph)
            };
            let (up, down) = (at(x0 + h), at(x0 - h));
            let (up10, down10) = (at(x0 + h / 10.0), at(x0 - h / 10.0));
            at(x0);
            // One-sided slopes differ by about h times the curvature on smooth
            // stretches, so the gap shrinks tenfold with the step; a kink
            // inside one of the steps breaks that scaling.
            let gap = ((up - base) - (base - down)).abs() / h;
            let gap10 = ((up10 - base) - (base - down10)).abs() / (h / 10.0);
            if gap > 1e-6 * scale && (gap10 / gap - 0.1).abs() > 0.05 {
                continue;
            }
            compared += 1;
            let fd = (up - down) / (2.0 * h);
            worst = worst.max((grad.data()[e] - fd).abs() / grad.data()[e].abs().max(fd.abs()).max(1e-3 * scale));
        }
    }
    (worst, compared)
}
