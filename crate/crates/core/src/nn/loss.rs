//! Segment softmax, reconstruction cross-entropy, Gaussian KL and the
//! β-weighted objective.

use serde::{Deserialize, Serialize};

use super::NnError;

/// Loss terms averaged over a batch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub reconstruction: f64,
    pub kl: f64,
    pub beta: f64,
    pub total: f64,
}

pub fn elbo_loss(reconstruction: f64, kl: f64, beta: f64) -> Result<LossBreakdown, NnError> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(NnError::Beta(beta));
    }
    Ok(LossBreakdown {
        reconstruction,
        kl,
        beta,
        total: reconstruction + beta * kl,
    })
}

/// Softmax applied independently to consecutive segments of `logits`.
pub fn segment_softmax(logits: &[f64], segments: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; logits.len()];
    let mut start = 0;
    for &w in segments {
        let seg = &logits[start..start + w];
        let max = seg.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for (o, &x) in out[start..start + w].iter_mut().zip(seg) {
            *o = (x - max).exp();
            sum += *o;
        }
        for o in &mut out[start..start + w] {
            *o /= sum;
        }
        start += w;
    }
    out
}

/// Hot index of every segment of a hard one-hot target.
pub fn hot_indices(target: &[f64], segments: &[usize]) -> Result<Vec<usize>, NnError> {
    let mut out = Vec::with_capacity(segments.len());
    let mut start = 0;
    for (s, &w) in segments.iter().enumerate() {
        let seg = &target[start..start + w];
        let ones = seg.iter().filter(|&&x| x == 1.0).count();
        let zeros = seg.iter().filter(|&&x| x == 0.0).count();
        if ones != 1 || ones + zeros != w {
            return Err(NnError::NotOneHot(s));
        }
        out.push(seg.iter().position(|&x| x == 1.0).unwrap());
        start += w;
    }
    Ok(out)
}

/// Categorical cross-entropy summed over segments, from probabilities.
/// Returns the loss and its gradient with respect to the logits that
/// produced `probs` (`probs - target`).
pub fn recon_loss(probs: &[f64], target: &[f64], segments: &[usize]) -> Result<(f64, Vec<f64>), NnError> {
    if probs.len() != target.len() {
        return Err(NnError::Shape(format!(
            "probabilities {} vs target {}",
            probs.len(),
            target.len()
        )));
    }
    let hot = hot_indices(target, segments)?;
    let mut loss = 0.0;
    let mut start = 0;
    for (&w, &h) in segments.iter().zip(&hot) {
        loss -= probs[start + h].ln();
        start += w;
    }
    let grad = probs.iter().zip(target).map(|(p, t)| p - t).collect();
    Ok((loss, grad))
}

/// Cross-entropy from logits via log-sum-exp. Writes `softmax - target`
/// into `grad` and returns the summed loss.
pub fn cross_entropy_logits(
    logits: &[f64],
    hot: &[usize],
    segments: &[usize],
    grad: &mut [f64],
) -> f64 {
    let mut loss = 0.0;
    let mut start = 0;
    for (&w, &h) in segments.iter().zip(hot) {
        let seg = &logits[start..start + w];
        let max = seg.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for (g, &x) in grad[start..start + w].iter_mut().zip(seg) {
            *g = (x - max).exp();
            sum += *g;
        }
        loss += sum.ln() + max - seg[h];
        for g in &mut grad[start..start + w] {
            *g /= sum;
        }
        grad[start + h] -= 1.0;
        start += w;
    }
    loss
}

/// `0.5·Σ(μ² + e^{lv} − 1 − lv)` and its gradients.
pub fn kl_loss(mu: &[f64], logvar: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
    let mut kl = 0.0;
    let mut dmu = Vec::with_capacity(mu.len());
    let mut dlv = Vec::with_capacity(mu.len());
    for (&m, &lv) in mu.iter().zip(logvar) {
        let e = lv.exp();
        kl += 0.5 * (m * m + e - 1.0 - lv);
        dmu.push(m);
        dlv.push(0.5 * (e - 1.0));
    }
    (kl, dmu, dlv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_segments_sum_to_one() {
        let logits: Vec<f64> = (0..12).map(|i| (i as f64 * 1.7).sin() * 5.0).collect();
        let p = segment_softmax(&logits, &[3, 4, 5]);
        assert!((p[..3].iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((p[3..7].iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((p[7..].iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let u = segment_softmax(&[0.0; 5], &[5]);
        assert!(u.iter().all(|&x| (x - 0.2).abs() < 1e-15));
    }

    #[test]
    fn cross_entropy_cases() {
        let target = [0.0, 1.0, 0.0, 1.0, 0.0];
        let (loss, grad) = recon_loss(&target, &target, &[3, 2]).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grad.iter().all(|&g| g == 0.0));
        let uniform = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.5, 0.5];
        let (loss, _) = recon_loss(&uniform, &target, &[3, 2]).unwrap();
        assert!((loss - (3f64.ln() + 2f64.ln())).abs() < 1e-12);
        assert!(matches!(
            recon_loss(&uniform, &[0.5, 0.5, 0.0, 1.0, 0.0], &[3, 2]),
            Err(NnError::NotOneHot(0))
        ));
    }

    #[test]
    fn logits_and_probability_forms_agree() {
        let logits = [0.3, -1.2, 2.0, 0.5, 0.1];
        let target = [0.0, 0.0, 1.0, 1.0, 0.0];
        let seg = [3, 2];
        let p = segment_softmax(&logits, &seg);
        let (a, ga) = recon_loss(&p, &target, &seg).unwrap();
        let mut gb = [0.0; 5];
        let b = cross_entropy_logits(&logits, &[2, 0], &seg, &mut gb);
        assert!((a - b).abs() < 1e-12);
        for (x, y) in ga.iter().zip(&gb) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn kl_closed_form() {
        assert_eq!(kl_loss(&[0.0; 4], &[0.0; 4]).0, 0.0);
        assert_eq!(kl_loss(&[1.0], &[0.0]).0, 0.5);
        let (_, dmu, dlv) = kl_loss(&[0.3], &[0.2]);
        assert_eq!(dmu[0], 0.3);
        assert!((dlv[0] - 0.5 * (0.2f64.exp() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn elbo_arithmetic() {
        let l = elbo_loss(5.0, 2.0, 0.01).unwrap();
        assert!((l.total - 5.02).abs() < 1e-12);
        assert_eq!(elbo_loss(5.0, 2.0, 1.0).unwrap().total, 7.0);
        let a = elbo_loss(5.0, 2.0, 0.5).unwrap();
        let b = elbo_loss(5.0, 2.0, 5.0).unwrap();
        assert!(((b.total - b.reconstruction) - 10.0 * (a.total - a.reconstruction)).abs() < 1e-12);
        assert!(elbo_loss(1.0, 1.0, 0.0).is_err());
        assert!(elbo_loss(1.0, 1.0, -1.0).is_err());
    }
}
