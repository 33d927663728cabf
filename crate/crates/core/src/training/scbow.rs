//! Adjacent-sentence objective: a softmax over cosine similarities between
//! a center sentence and its candidates, trained with cross-entropy against
//! a target that spreads mass `1/|S+|` over the true neighbours.

use crate::error::{Error, Result};
use crate::sentence::TaggedSentence;
use crate::vector::{axpy, cosine_unchecked, dot_unchecked, norm, softmax};

use super::model::{Gradients, Model};

/// One training instance: a center sentence with its neighbours (`S+`) and
/// sampled non-neighbours (`S−`).
#[derive(Debug, Clone, Copy)]
pub struct ScbowInstance<'a> {
    pub center: &'a TaggedSentence,
    pub positives: &'a [&'a TaggedSentence],
    pub negatives: &'a [&'a TaggedSentence],
}

impl ScbowInstance<'_> {
    fn check(&self) -> Result<()> {
        if self.positives.is_empty() || self.negatives.is_empty() {
            return Err(Error::Domain("instance needs at least one positive and one negative".into()));
        }
        Ok(())
    }

    /// Target distribution over `positives ++ negatives`.
    pub fn target(&self) -> Vec<f64> {
        let p = 1.0 / self.positives.len() as f64;
        std::iter::repeat_n(p, self.positives.len())
            .chain(std::iter::repeat_n(0.0, self.negatives.len()))
            .collect()
    }

    fn candidates(&self) -> impl Iterator<Item = &TaggedSentence> {
        self.positives.iter().chain(self.negatives).copied()
    }
}

/// `p_j = exp(cos(center, c_j)) / Σ_k exp(cos(center, c_k))`.
pub fn scbow_prob(center: &[f64], candidates: &[Vec<f64>]) -> Result<Vec<f64>> {
    if candidates.is_empty() {
        return Err(Error::Domain("candidate list is empty".into()));
    }
    let mut cos = Vec::with_capacity(candidates.len());
    for c in candidates {
        if c.len() != center.len() {
            return Err(Error::Dimension {
                expected: center.len(),
                got: c.len(),
            });
        }
        cos.push(cosine_unchecked(center, c));
    }
    Ok(softmax(&cos))
}

/// Cross-entropy `−Σ_j p(j) ln p_θ(j)` of predicted against target distribution.
pub fn cross_entropy(target: &[f64], predicted: &[f64]) -> f64 {
    target
        .iter()
        .zip(predicted)
        .filter(|(t, _)| **t > 0.0)
        .map(|(t, p)| -t * p.ln())
        .sum()
}

pub fn scbow_loss(instance: &ScbowInstance<'_>, model: &Model) -> Result<f64> {
    instance.check()?;
    let center = model.forward(instance.center)?.vector;
    let cands = instance
        .candidates()
        .map(|s| model.forward(s).map(|f| f.vector))
        .collect::<Result<Vec<_>>>()?;
    let p = scbow_prob(&center, &cands)?;
    Ok(cross_entropy(&instance.target(), &p))
}

/// Gradient of `cos(u, v)` with respect to `u`: `v/(|u||v|) − cos·u/|u|²`.
fn d_cos(u: &[f64], v: &[f64], out: &mut [f64], alpha: f64) {
    let nu = norm(u);
    let nv = norm(v);
    if nu == 0.0 || nv == 0.0 {
        return;
    }
    let cos = dot_unchecked(u, v) / (nu * nv);
    axpy(alpha / (nu * nv), v, out);
    axpy(-alpha * cos / (nu * nu), u, out);
}

/// Loss and its gradient with respect to every word and tag row involved.
pub fn scbow_loss_and_grad(instance: &ScbowInstance<'_>, model: &Model) -> Result<(f64, Gradients)> {
    instance.check()?;
    let center = model.forward(instance.center)?;
    let cands = instance
        .candidates()
        .map(|s| model.forward(s))
        .collect::<Result<Vec<_>>>()?;
    let vectors: Vec<Vec<f64>> = cands.iter().map(|f| f.vector.clone()).collect();
    let p = scbow_prob(&center.vector, &vectors)?;
    let target = instance.target();
    let loss = cross_entropy(&target, &p);

    let dim = model.dim();
    let mut grads = Gradients::new(dim);
    let mut d_center = vec![0.0; dim];
    for (j, cand) in cands.iter().enumerate() {
        // ∂L/∂cos_j = p_j − target_j since the target sums to one
        let d = p[j] - target[j];
        d_cos(&center.vector, &cand.vector, &mut d_center, d);
        let mut d_cand = vec![0.0; dim];
        d_cos(&cand.vector, &center.vector, &mut d_cand, d);
        model.backward(cand, &d_cand, &mut grads);
    }
    model.backward(&center, &d_center, &mut grads);
    Ok((loss, grads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identical_candidates_give_uniform() {
        let c = vec![1.0, 2.0];
        let p = scbow_prob(&[0.3, -0.1], &[c.clone(), c.clone(), c]).unwrap();
        for v in p {
            assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn cosines_one_minus_one() {
        let u = [1.0, 0.0];
        let p = scbow_prob(&u, &[vec![2.0, 0.0], vec![-1.0, 0.0], vec![-3.0, 0.0]]).unwrap();
        let e = std::f64::consts::E;
        let z = e + 2.0 / e;
        assert_abs_diff_eq!(p[0], e / z, epsilon = 1e-15);
        assert_abs_diff_eq!(p[0], 0.78699, epsilon = 1e-5);
        assert_abs_diff_eq!(p[1], 0.10650, epsilon = 1e-5);
        assert_abs_diff_eq!(p[2], 0.10650, epsilon = 1e-5);
        assert!(scbow_prob(&u, &[]).is_err());
        assert!(scbow_prob(&u, &[vec![1.0]]).is_err());
    }

    #[test]
    fn cross_entropy_values() {
        assert_abs_diff_eq!(cross_entropy(&[1.0, 0.0, 0.0], &[1.0 / 3.0; 3]), 3f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(3f64.ln(), 1.098612, epsilon = 1e-6);
        assert!(cross_entropy(&[1.0, 0.0, 0.0], &[1.0 - 1e-12, 5e-13, 5e-13]) < 1e-11);
        // zero-target terms vanish even when their probability is tiny
        assert!(cross_entropy(&[1.0, 0.0], &[1.0, 0.0]).abs() < 1e-300);
    }
}
