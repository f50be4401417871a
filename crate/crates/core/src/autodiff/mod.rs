//! Minimal reverse-mode automatic differentiation over `ndarray` matrices.
//!
//! Every tensor is a 2-D `f64` array. A [`Tape`] records the forward ops;
//! [`Tape::backward`] walks them in reverse and accumulates gradients per
//! node. Images are carried as channels-last rows (one row per sample,
//! `height * width * channels` columns) so convolution reduces to
//! [`Tape::im2col`] plus a matmul.
//!
//! Parameters live in a [`Params`] registry owned by each agent; a tape
//! leafifies them on demand and remembers the mapping so gradients can be
//! read back per parameter after a backward pass.

mod ops;
pub mod gradcheck;

pub use ops::ImageDims;

use ndarray::Array2;
use std::collections::HashMap;
use std::rc::Rc;

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var {
    pub(crate) id: usize,
}

type BackwardFn = Box<dyn Fn(&Array2<f64>, &mut [Option<Array2<f64>>])>;

pub(crate) struct Node {
    pub(crate) value: Rc<Array2<f64>>,
    pub(crate) backward: Option<BackwardFn>,
}

/// Records one forward computation; rebuilt for every graph.
#[derive(Default)]
pub struct Tape {
    pub(crate) nodes: Vec<Node>,
    param_vars: HashMap<usize, Var>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn push(&mut self, value: Array2<f64>, backward: Option<BackwardFn>) -> Var {
        self.nodes.push(Node {
            value: Rc::new(value),
            backward,
        });
        Var {
            id: self.nodes.len() - 1,
        }
    }

    /// A node with no gradient flow (inputs, targets, masks, ...).
    pub fn constant(&mut self, value: Array2<f64>) -> Var {
        self.push(value, None)
    }

    pub fn scalar(&mut self, value: f64) -> Var {
        self.constant(Array2::from_elem((1, 1), value))
    }

    /// Leafify a registered parameter. Repeated calls within one tape reuse
    /// the same node so gradients accumulate in a single slot.
    pub fn param(&mut self, params: &Params, id: ParamId) -> Var {
        if let Some(v) = self.param_vars.get(&id.0) {
            return *v;
        }
        let var = self.push(params.entries[id.0].value.clone(), None);
        self.param_vars.insert(id.0, var);
        var
    }

    pub fn value(&self, v: Var) -> &Array2<f64> {
        &self.nodes[v.id].value
    }

    pub(crate) fn value_rc(&self, v: Var) -> Rc<Array2<f64>> {
        Rc::clone(&self.nodes[v.id].value)
    }

    pub fn shape(&self, v: Var) -> (usize, usize) {
        let d = self.nodes[v.id].value.dim();
        (d.0, d.1)
    }

    /// Reverse pass from a scalar loss. Returns one gradient slot per node.
    pub fn backward(&self, loss: Var) -> Gradients {
        assert_eq!(
            self.shape(loss),
            (1, 1),
            "backward expects a scalar (1x1) loss"
        );
        let mut slots: Vec<Option<Array2<f64>>> = vec![None; self.nodes.len()];
        slots[loss.id] = Some(Array2::from_elem((1, 1), 1.0));
        for id in (0..=loss.id).rev() {
            if slots[id].is_none() {
                continue;
            }
            if let Some(bw) = &self.nodes[id].backward {
                let grad = slots[id].take().unwrap();
                bw(&grad, &mut slots);
                slots[id] = Some(grad);
            }
        }
        Gradients {
            slots,
            param_vars: self.param_vars.clone(),
        }
    }
}

/// Gradients produced by one backward pass.
pub struct Gradients {
    slots: Vec<Option<Array2<f64>>>,
    param_vars: HashMap<usize, Var>,
}

impl Gradients {
    pub fn of(&self, v: Var) -> Option<&Array2<f64>> {
        self.slots[v.id].as_ref()
    }

    /// Gradient of the loss w.r.t. a parameter; zero-shaped None when the
    /// parameter did not participate in the graph.
    pub fn of_param(&self, id: ParamId) -> Option<&Array2<f64>> {
        self.param_vars.get(&id.0).and_then(|v| self.of(*v))
    }
}

pub(crate) fn accumulate(slot: &mut Option<Array2<f64>>, grad: Array2<f64>) {
    match slot {
        Some(existing) => *existing += &grad,
        None => *slot = Some(grad),
    }
}

/// Handle into a [`Params`] registry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParamId(pub(crate) usize);

pub(crate) struct ParamEntry {
    pub(crate) name: String,
    pub(crate) value: Rc<Array2<f64>>,
    pub(crate) trainable: bool,
}

/// Named parameter registry for one agent. Non-trainable entries hold
/// buffers such as batch-norm running statistics; they are checkpointed but
/// skipped by the optimizer.
#[derive(Default)]
pub struct Params {
    pub(crate) entries: Vec<ParamEntry>,
}

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: &str, value: Array2<f64>) -> ParamId {
        self.insert(name, value, true)
    }

    pub fn add_buffer(&mut self, name: &str, value: Array2<f64>) -> ParamId {
        self.insert(name, value, false)
    }

    fn insert(&mut self, name: &str, value: Array2<f64>, trainable: bool) -> ParamId {
        assert!(
            self.entries.iter().all(|e| e.name != name),
            "duplicate parameter name {name}"
        );
        self.entries.push(ParamEntry {
            name: name.to_string(),
            value: Rc::new(value),
            trainable,
        });
        ParamId(self.entries.len() - 1)
    }

    pub fn get(&self, id: ParamId) -> &Array2<f64> {
        &self.entries[id.0].value
    }

    pub fn set(&mut self, id: ParamId, value: Array2<f64>) {
        self.entries[id.0].value = Rc::new(value);
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.entries[id.0].name
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> + '_ {
        (0..self.entries.len()).map(ParamId)
    }

    pub fn trainable_ids(&self) -> Vec<ParamId> {
        (0..self.entries.len())
            .filter(|i| self.entries[*i].trainable)
            .map(ParamId)
            .collect()
    }

    pub fn is_trainable(&self, id: ParamId) -> bool {
        self.entries[id.0].trainable
    }

    /// Total number of trainable scalar coefficients.
    pub fn trainable_count(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.trainable)
            .map(|e| e.value.len())
            .sum()
    }

    pub fn lookup(&self, name: &str) -> Option<ParamId> {
        self.entries
            .iter()
            .position(|e| e.name == name)
            .map(ParamId)
    }
}
