//! A one-hidden-layer perceptron predicting a relation from the
//! concatenated subject and object embeddings.
//!
//! All arithmetic is `f64` in a fixed order and the only randomness comes
//! from a seeded ChaCha stream, so equal inputs give bitwise-equal weights.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ingest::{ClassifierParams, EmbeddingTable};
use crate::model::SupportedTriple;
use crate::relation::embed_entity;

const CHECKPOINT_HEADER: &str = "scholarkg-mlp 1";

/// Subject vector followed by object vector.
pub fn pair_input(subject: &str, object: &str, table: &EmbeddingTable) -> Result<Vec<f64>> {
    let mut v = embed_entity(subject, table)?.vector;
    v.extend(embed_entity(object, table)?.vector);
    Ok(v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyClassifier {
    classes: Vec<String>,
    input_dim: usize,
    hidden: usize,
    /// hidden x input, row-major.
    w1: Vec<f64>,
    b1: Vec<f64>,
    /// classes x hidden, row-major.
    w2: Vec<f64>,
    b2: Vec<f64>,
    epochs_run: usize,
    final_loss: f64,
}

impl ConsistencyClassifier {
    /// Trains on `(input, class label)` rows. Classes are the distinct
    /// labels in lexicographic order.
    pub fn train(examples: &[(Vec<f64>, String)], params: &ClassifierParams) -> Result<Self> {
        let classes: Vec<String> = examples
            .iter()
            .map(|(_, c)| c.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if classes.len() < 2 {
            return Err(Error::TooFewClasses(classes.len()));
        }
        let input_dim = examples[0].0.len();
        if let Some((bad, _)) = examples.iter().find(|(x, _)| x.len() != input_dim) {
            return Err(Error::DimensionMismatch {
                left: input_dim,
                right: bad.len(),
            });
        }
        let targets: Vec<usize> = examples
            .iter()
            .map(|(_, c)| classes.binary_search(c).expect("class collected above"))
            .collect();

        let hidden = params.hidden_width;
        let k = classes.len();
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let mut uniform = |n: usize, fan_in: usize, fan_out: usize| -> Vec<f64> {
            let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
            (0..n).map(|_| rng.gen_range(-a..a)).collect()
        };
        let mut model = ConsistencyClassifier {
            w1: uniform(hidden * input_dim, input_dim, hidden),
            b1: vec![0.0; hidden],
            w2: uniform(k * hidden, hidden, k),
            b2: vec![0.0; k],
            classes,
            input_dim,
            hidden,
            epochs_run: 0,
            final_loss: f64::NAN,
        };

        let mut order: Vec<usize> = (0..examples.len()).collect();
        let mut losses: Vec<f64> = Vec::new();
        let mut grads = Gradients::zeros(&model);
        let mut h = vec![0.0; hidden];
        let mut p = vec![0.0; k];
        for _ in 0..params.max_epochs {
            order.shuffle(&mut rng);
            let mut epoch_loss = 0.0;
            for batch in order.chunks(params.batch_size) {
                grads.clear();
                for &i in batch {
                    let x = &examples[i].0;
                    let y = targets[i];
                    model.forward(x, &mut h, &mut p);
                    epoch_loss -= p[y].max(f64::MIN_POSITIVE).ln();
                    grads.accumulate(&model, x, &h, &p, y);
                }
                let step = params.learning_rate / batch.len() as f64;
                grads.apply(&mut model, step);
            }
            losses.push(epoch_loss / examples.len() as f64);
            model.epochs_run += 1;
            let n = losses.len();
            if n > params.plateau_epochs
                && losses[n - 1 - params.plateau_epochs] - losses[n - 1] < params.plateau_tolerance
            {
                break;
            }
        }
        model.final_loss = losses.last().copied().unwrap_or(f64::NAN);
        Ok(model)
    }

    fn forward(&self, x: &[f64], h: &mut [f64], p: &mut [f64]) {
        for (j, hj) in h.iter_mut().enumerate() {
            let row = &self.w1[j * self.input_dim..(j + 1) * self.input_dim];
            let z: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.b1[j];
            *hj = z.max(0.0);
        }
        for (c, pc) in p.iter_mut().enumerate() {
            let row = &self.w2[c * self.hidden..(c + 1) * self.hidden];
            *pc = row.iter().zip(h.iter()).map(|(w, v)| w * v).sum::<f64>() + self.b2[c];
        }
        let max = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for pc in p.iter_mut() {
            *pc = (*pc - max).exp();
            sum += *pc;
        }
        p.iter_mut().for_each(|pc| *pc /= sum);
    }

    /// Class probabilities for one input.
    pub fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                left: self.input_dim,
                right: x.len(),
            });
        }
        let mut h = vec![0.0; self.hidden];
        let mut p = vec![0.0; self.classes.len()];
        self.forward(x, &mut h, &mut p);
        Ok(p)
    }

    /// The most probable class; ties go to the lexicographically smallest.
    pub fn predict(&self, x: &[f64]) -> Result<&str> {
        let p = self.predict_proba(x)?;
        let mut best = 0;
        for (i, &v) in p.iter().enumerate() {
            if v > p[best] {
                best = i;
            }
        }
        Ok(&self.classes[best])
    }

    /// Fraction of rows predicted correctly.
    pub fn accuracy(&self, examples: &[(Vec<f64>, String)]) -> Result<f64> {
        let mut hits = 0;
        for (x, c) in examples {
            if self.predict(x)? == c {
                hits += 1;
            }
        }
        Ok(hits as f64 / examples.len().max(1) as f64)
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn epochs_run(&self) -> usize {
        self.epochs_run
    }

    pub fn final_loss(&self) -> f64 {
        self.final_loss
    }

    /// Text dump with every weight as the hex of its bit pattern, so that
    /// loading restores the model exactly.
    pub fn to_checkpoint(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{CHECKPOINT_HEADER}");
        let _ = writeln!(
            out,
            "dims {} {} {} {} {:016x}",
            self.input_dim,
            self.hidden,
            self.classes.len(),
            self.epochs_run,
            self.final_loss.to_bits()
        );
        for c in &self.classes {
            let _ = writeln!(out, "class {c}");
        }
        for (name, values) in [("w1", &self.w1), ("b1", &self.b1), ("w2", &self.w2), ("b2", &self.b2)] {
            out.push_str(name);
            for v in values {
                let _ = write!(out, " {:016x}", v.to_bits());
            }
            out.push('\n');
        }
        out
    }

    pub fn from_checkpoint(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::Checkpoint(m.to_owned());
        let mut lines = text.lines();
        if lines.next() != Some(CHECKPOINT_HEADER) {
            return Err(bad("unknown classifier checkpoint header"));
        }
        let dims: Vec<&str> = lines
            .next()
            .and_then(|l| l.strip_prefix("dims "))
            .ok_or_else(|| bad("missing dims line"))?
            .split(' ')
            .collect();
        if dims.len() != 5 {
            return Err(bad("dims line needs 5 fields"));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad("bad dimension"));
        let (input_dim, hidden, k, epochs_run) = (num(dims[0])?, num(dims[1])?, num(dims[2])?, num(dims[3])?);
        let final_loss = hex_f64(dims[4]).ok_or_else(|| bad("bad loss"))?;
        let mut classes = Vec::with_capacity(k);
        for _ in 0..k {
            let c = lines
                .next()
                .and_then(|l| l.strip_prefix("class "))
                .ok_or_else(|| bad("missing class line"))?;
            classes.push(c.to_owned());
        }
        let mut arrays = Vec::new();
        for (name, len) in [("w1", hidden * input_dim), ("b1", hidden), ("w2", k * hidden), ("b2", k)] {
            let line = lines.next().ok_or_else(|| bad("missing weights"))?;
            let mut fields = line.split(' ');
            if fields.next() != Some(name) {
                return Err(bad(&format!("expected `{name}`")));
            }
            let values: Option<Vec<f64>> = fields.map(hex_f64).collect();
            let values = values.ok_or_else(|| bad("bad weight"))?;
            if values.len() != len {
                return Err(bad(&format!("`{name}` has {} values, expected {len}", values.len())));
            }
            arrays.push(values);
        }
        let b2 = arrays.pop().unwrap();
        let w2 = arrays.pop().unwrap();
        let b1 = arrays.pop().unwrap();
        let w1 = arrays.pop().unwrap();
        Ok(ConsistencyClassifier {
            classes,
            input_dim,
            hidden,
            w1,
            b1,
            w2,
            b2,
            epochs_run,
            final_loss,
        })
    }
}

fn hex_f64(s: &str) -> Option<f64> {
    u64::from_str_radix(s, 16).ok().map(f64::from_bits)
}

struct Gradients {
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: Vec<f64>,
    dh: Vec<f64>,
}

impl Gradients {
    fn zeros(m: &ConsistencyClassifier) -> Self {
        Gradients {
            w1: vec![0.0; m.w1.len()],
            b1: vec![0.0; m.b1.len()],
            w2: vec![0.0; m.w2.len()],
            b2: vec![0.0; m.b2.len()],
            dh: vec![0.0; m.hidden],
        }
    }

    fn clear(&mut self) {
        for v in [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2] {
            v.iter_mut().for_each(|x| *x = 0.0);
        }
    }

    /// Adds the cross-entropy gradient of one example.
    #[allow(clippy::needless_range_loop)]
    fn accumulate(&mut self, m: &ConsistencyClassifier, x: &[f64], h: &[f64], p: &[f64], y: usize) {
        self.dh.iter_mut().for_each(|d| *d = 0.0);
        for (c, &pc) in p.iter().enumerate() {
            let dz = pc - if c == y { 1.0 } else { 0.0 };
            self.b2[c] += dz;
            let row = c * m.hidden;
            for j in 0..m.hidden {
                self.w2[row + j] += dz * h[j];
                self.dh[j] += dz * m.w2[row + j];
            }
        }
        for j in 0..m.hidden {
            if h[j] <= 0.0 {
                continue;
            }
            let d = self.dh[j];
            self.b1[j] += d;
            let row = &mut self.w1[j * m.input_dim..(j + 1) * m.input_dim];
            for (g, v) in row.iter_mut().zip(x) {
                *g += d * v;
            }
        }
    }

    fn apply(&self, m: &mut ConsistencyClassifier, step: f64) {
        for (w, g) in [
            (&mut m.w1, &self.w1),
            (&mut m.b1, &self.b1),
            (&mut m.w2, &self.w2),
            (&mut m.b2, &self.b2),
        ] {
            for (wi, gi) in w.iter_mut().zip(g) {
                *wi -= step * gi;
            }
        }
    }
}

/// Training rows from valid triples: the pair input and the relation label.
/// Triples with an unembeddable endpoint are skipped.
pub fn training_examples(valid: &[SupportedTriple], table: &EmbeddingTable) -> Vec<(Vec<f64>, String)> {
    valid
        .iter()
        .filter_map(|t| match pair_input(&t.subject, &t.object, table) {
            Ok(x) => Some((x, t.relation.clone())),
            Err(e) => {
                log::debug!("skipping {} for training: {e}", t.key());
                None
            }
        })
        .collect()
}

pub fn train_consistency_classifier(
    valid: &[SupportedTriple],
    table: &EmbeddingTable,
    params: &ClassifierParams,
) -> Result<ConsistencyClassifier> {
    let examples = training_examples(valid, table);
    if examples.is_empty() {
        return Err(Error::TooFewClasses(0));
    }
    ConsistencyClassifier::train(&examples, params)
}
