//! The message-passing network that maps input points to new points.
//!
//! Each node carries a hidden feature row. An affine encoder lifts the input
//! coordinates, `L` message-passing blocks update the features by
//!
//! ```text
//! h_i <- phi([h_i; sum_{j in N(i)} psi([h_i; h_j])])
//! ```
//!
//! and an affine decoder followed by a sigmoid maps back into the open cube.
//! `psi` and `phi` are two-layer ReLU perceptrons. Neighbourhoods come from a
//! radius graph over the input points that stays fixed for the lifetime of
//! the model.
//!
//! The first layer of `psi` is stored as two blocks acting on `h_i` and `h_j`
//! (`[h_i; h_j]·W = h_i·W_self + h_j·W_nbr`), and its second affine layer is
//! applied after summation, which is the same function because it is linear.

use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Tape, Tensor, Var};
use crate::{seed, Error, PointSet, Result};

/// Symmetric radius graph without self-loops. Edge `(i, j)` means `j` is a
/// neighbour of `i`; edges are sorted.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    n_nodes: usize,
    radius: f64,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// The same graph with node `i` renamed to `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Graph {
        let mut edges: Vec<_> = self.edges.iter().map(|&(i, j)| (perm[i], perm[j])).collect();
        edges.sort_unstable();
        Graph { n_nodes: self.n_nodes, radius: self.radius, edges }
    }

    fn index(&self) -> EdgeIndex {
        let targets: Arc<[usize]> = self.edges.iter().map(|e| e.0).collect();
        let sources: Arc<[usize]> = self.edges.iter().map(|e| e.1).collect();
        let mut degree = vec![0.0; self.n_nodes];
        for &(i, _) in &self.edges {
            degree[i] += 1.0;
        }
        EdgeIndex { targets, sources, degree: degree.into() }
    }
}

#[derive(Clone)]
struct EdgeIndex {
    targets: Arc<[usize]>,
    sources: Arc<[usize]>,
    degree: Arc<[f64]>,
}

/// Connects every ordered pair of distinct points within Euclidean distance `r`.
pub fn build_radius_graph(points: &PointSet<f64>, r: f64) -> Result<Graph> {
    let max = (points.dim() as f64).sqrt();
    if !(0.0..=max).contains(&r) {
        return Err(Error::InvalidRadius { radius: r, max });
    }
    let n = points.n_points();
    let mut edges = Vec::new();
    for i in 0..n {
        let xi = points.point(i);
        for j in 0..n {
            if i == j {
                continue;
            }
            let sq: f64 = xi.iter().zip(points.point(j)).map(|(a, b)| (a - b) * (a - b)).sum();
            if sq.sqrt() <= r {
                edges.push((i, j));
            }
        }
    }
    Ok(Graph { n_nodes: n, radius: r, edges })
}

/// Affine map `x·weight + bias` on row vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub weight: Tensor,
    pub bias: Tensor,
}

impl Dense {
    fn init<R: Rng>(fan_in: usize, fan_out: usize, rng: &mut R) -> Self {
        Self { weight: glorot(fan_in, fan_out, fan_in, fan_out, rng), bias: Tensor::zeros(1, fan_out) }
    }
}

fn glorot<R: Rng>(rows: usize, cols: usize, fan_in: usize, fan_out: usize, rng: &mut R) -> Tensor {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let data = (0..rows * cols).map(|_| rng.random_range(-limit..=limit)).collect();
    Tensor::new(rows, cols, data).expect("shape matches")
}

/// One message-passing block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MessageBlock {
    /// Rows of the first `psi` layer that act on the receiving node.
    pub psi_self: Tensor,
    /// Rows of the first `psi` layer that act on the neighbour.
    pub psi_nbr: Tensor,
    pub psi_bias: Tensor,
    pub psi_out: Dense,
    pub phi_in: Dense,
    pub phi_out: Dense,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MpmcModel {
    pub dim: usize,
    pub hidden: usize,
    pub encoder: Dense,
    pub layers: Vec<MessageBlock>,
    pub decoder: Dense,
}

/// Hidden widths and depths covered by the hyperparameter search space.
pub fn in_search_space(hidden: usize, layers: usize) -> bool {
    [32, 64, 128, 256].contains(&hidden) && (1..=10).contains(&layers)
}

/// Glorot-uniform weights and zero biases. `layers = 0` gives an
/// encoder-decoder model with no message passing.
pub fn init_model(dim: usize, hidden: usize, layers: usize, seed: u64) -> Result<MpmcModel> {
    if dim == 0 || hidden == 0 {
        return Err(Error::InvalidConfig(format!("dim {dim} and hidden {hidden} must be positive")));
    }
    let mut rng = seed::rng(seed);
    let m = hidden;
    let encoder = Dense::init(dim, m, &mut rng);
    let layers = (0..layers)
        .map(|_| MessageBlock {
            psi_self: glorot(m, m, 2 * m, m, &mut rng),
            psi_nbr: glorot(m, m, 2 * m, m, &mut rng),
            psi_bias: Tensor::zeros(1, m),
            psi_out: Dense::init(m, m, &mut rng),
            phi_in: Dense::init(2 * m, m, &mut rng),
            phi_out: Dense::init(m, m, &mut rng),
        })
        .collect();
    let decoder = Dense::init(m, dim, &mut rng);
    Ok(MpmcModel { dim, hidden, encoder, layers, decoder })
}

impl MpmcModel {
    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    /// Parameters in a fixed order shared with [`MpmcModel::params_mut`].
    pub fn params(&self) -> Vec<&Tensor> {
        let mut out = vec![&self.encoder.weight, &self.encoder.bias];
        for b in &self.layers {
            out.extend([
                &b.psi_self,
                &b.psi_nbr,
                &b.psi_bias,
                &b.psi_out.weight,
                &b.psi_out.bias,
                &b.phi_in.weight,
                &b.phi_in.bias,
                &b.phi_out.weight,
                &b.phi_out.bias,
            ]);
        }
        out.extend([&self.decoder.weight, &self.decoder.bias]);
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = vec![&mut self.encoder.weight, &mut self.encoder.bias];
        for b in &mut self.layers {
            out.extend([
                &mut b.psi_self,
                &mut b.psi_nbr,
                &mut b.psi_bias,
                &mut b.psi_out.weight,
                &mut b.psi_out.bias,
                &mut b.phi_in.weight,
                &mut b.phi_in.bias,
                &mut b.phi_out.weight,
                &mut b.phi_out.bias,
            ]);
        }
        out.extend([&mut self.decoder.weight, &mut self.decoder.bias]);
        out
    }

    pub fn n_params(&self) -> usize {
        self.params().iter().map(|t| t.data().len()).sum()
    }

    fn check(&self) -> Result<()> {
        let m = self.hidden;
        let d = self.dim;
        let mut expected = vec![(d, m), (1, m)];
        for _ in &self.layers {
            expected.extend([(m, m), (m, m), (1, m), (m, m), (1, m), (2 * m, m), (1, m), (m, m), (1, m)]);
        }
        expected.extend([(m, d), (1, d)]);
        for (t, want) in self.params().iter().zip(&expected) {
            if t.shape() != *want {
                return Err(Error::Shape(format!("parameter of shape {:?}, expected {want:?}", t.shape())));
            }
        }
        Ok(())
    }

    /// Records the network on `tape`. `params` are the tape handles of
    /// [`MpmcModel::params`] in order.
    pub fn forward_on_tape(&self, tape: &mut Tape, params: &[Var], inputs: Var, graph: &Graph) -> Result<Var> {
        self.record(tape, params, inputs, &graph.index(), graph.n_nodes)
    }

    fn record(&self, tape: &mut Tape, params: &[Var], inputs: Var, index: &EdgeIndex, n: usize) -> Result<Var> {
        if tape.value(inputs).cols() != self.dim {
            return Err(Error::Shape(format!("inputs have {} columns, model dim {}", tape.value(inputs).cols(), self.dim)));
        }
        if tape.value(inputs).rows() != n {
            return Err(Error::Shape(format!("{} inputs for a graph on {n} nodes", tape.value(inputs).rows())));
        }
        let mut p = params.iter().copied();
        let mut next = || p.next().ok_or_else(|| Error::Shape("too few parameters".into()));

        let h = tape.matmul(inputs, next()?)?;
        let mut h = tape.add_bias(h, next()?)?;
        for _ in &self.layers {
            let (w_self, w_nbr, b1, w2, b2) = (next()?, next()?, next()?, next()?, next()?);
            let (phi_w1, phi_b1, phi_w2, phi_b2) = (next()?, next()?, next()?, next()?);

            let a = tape.matmul(h, w_self)?;
            let b = tape.matmul(h, w_nbr)?;
            let ea = tape.gather(a, index.targets.clone())?;
            let eb = tape.gather(b, index.sources.clone())?;
            let e = tape.add(ea, eb)?;
            let e = tape.add_bias(e, b1)?;
            let e = tape.relu(e);
            let s = tape.scatter_sum(e, index.targets.clone(), n)?;
            let msg = tape.matmul(s, w2)?;
            let msg = tape.add_weighted_bias(msg, b2, index.degree.clone())?;

            let c = tape.concat(h, msg)?;
            let z = tape.matmul(c, phi_w1)?;
            let z = tape.add_bias(z, phi_b1)?;
            let z = tape.relu(z);
            let z = tape.matmul(z, phi_w2)?;
            h = tape.add_bias(z, phi_b2)?;
        }
        let o = tape.matmul(h, next()?)?;
        let o = tape.add_bias(o, next()?)?;
        Ok(tape.sigmoid(o))
    }
}

/// Evaluates the model on `points` with neighbourhoods from `graph`.
pub fn forward(model: &MpmcModel, points: &PointSet<f64>, graph: &Graph) -> Result<PointSet<f64>> {
    model.check()?;
    if points.dim() != model.dim {
        return Err(Error::Shape(format!("points have dim {}, model dim {}", points.dim(), model.dim)));
    }
    let mut tape = Tape::new();
    let params: Vec<Var> = model.params().into_iter().map(|t| tape.constant(t.clone())).collect();
    let x = tape.constant(Tensor::from_points(points));
    let out = model.forward_on_tape(&mut tape, &params, x, graph)?;
    let t = tape.value(out);
    PointSet::new(t.rows(), t.cols(), t.data().to_vec())
}

const FORMAT: &str = "mpmc-checkpoint";

/// A trained model together with the graph radius and input points it was
/// trained on, so that its output set can be regenerated exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub dim: usize,
    pub hidden: usize,
    pub layers: usize,
    pub seed: u64,
    pub radius: f64,
    pub model: MpmcModel,
    pub inputs: Option<Tensor>,
}

impl Checkpoint {
    pub fn new(model: MpmcModel, seed: u64, radius: f64, inputs: Option<&PointSet<f64>>) -> Self {
        Self {
            format: FORMAT.into(),
            dim: model.dim,
            hidden: model.hidden,
            layers: model.n_layers(),
            seed,
            radius,
            inputs: inputs.map(Tensor::from_points),
            model,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: Checkpoint = serde_json::from_str(s)?;
        if c.format != FORMAT {
            return Err(Error::InvalidConfig(format!("not a checkpoint: format {:?}", c.format)));
        }
        if c.dim != c.model.dim || c.hidden != c.model.hidden || c.layers != c.model.n_layers() {
            return Err(Error::InvalidConfig("checkpoint header disagrees with its weights".into()));
        }
        c.model.check()?;
        Ok(c)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(self.to_json()?.as_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn input_points(&self) -> Result<Option<PointSet<f64>>> {
        self.inputs.as_ref().map(|t| PointSet::new(t.rows(), t.cols(), t.data().to_vec())).transpose()
    }

    /// Output points of the stored model on its stored inputs.
    pub fn generate(&self) -> Result<PointSet<f64>> {
        let inputs = self
            .input_points()?
            .ok_or_else(|| Error::InvalidConfig("checkpoint stores no input points".into()))?;
        let graph = build_radius_graph(&inputs, self.radius)?;
        forward(&self.model, &inputs, &graph)
    }
}
