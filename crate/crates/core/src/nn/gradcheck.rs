//! Central finite-difference checks of the analytic gradient.

use rand::Rng;

use super::{standard_normal, ModelConfig, ModelParams, NnError, Tensor2};

/// Preactivations closer than this to the ReLU kink are resampled.
pub const KINK_MARGIN: f64 = 1e-3;

/// Input 20 split into segments 4+3+3+5+5, hidden 8/4, latent 3.
pub fn tiny_config(cond_dim: usize) -> ModelConfig {
    ModelConfig {
        input_dim: 20,
        cond_dim,
        encoder_hidden: vec![8, 4],
        latent_dim: 3,
        decoder_hidden: vec![4, 8],
        segments: vec![4, 3, 3, 5, 5],
    }
}

/// A random hard one-hot batch over `segments`.
pub fn one_hot_batch<R: Rng>(rng: &mut R, rows: usize, segments: &[usize]) -> Tensor2 {
    let width: usize = segments.iter().sum();
    let mut t = Tensor2::zeros(rows, width);
    for r in 0..rows {
        let mut start = 0;
        for &w in segments {
            t.values[r * width + start + rng.random_range(0..w)] = 1.0;
            start += w;
        }
    }
    t
}

pub struct GradCase {
    pub params: ModelParams,
    pub x: Tensor2,
    pub c: Tensor2,
    pub eps: Tensor2,
    pub beta: f64,
}

/// Draws parameters, inputs and noise until no preactivation lies within
/// [`KINK_MARGIN`] of zero.
pub fn random_case<R: Rng>(rng: &mut R, config: &ModelConfig, batch: usize, beta: f64) -> Result<GradCase, NnError> {
    loop {
        let params = ModelParams::init(config.clone(), rng)?;
        let x = one_hot_batch(rng, batch, &config.segments);
        let c = standard_normal(rng, batch, config.cond_dim);
        let eps = standard_normal(rng, batch, config.latent_dim);
        if params.forward(&x, &c, &eps)?.min_abs_preactivation() > KINK_MARGIN {
            return Ok(GradCase { params, x, c, eps, beta });
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradCheck {
    pub checked: usize,
    pub max_rel_error: f64,
    pub worst: usize,
}

/// Relative error `|a − n| / max(|a|, |n|, 1e-6)` for every parameter.
pub fn check_gradients(case: &mut GradCase, h: f64) -> Result<GradCheck, NnError> {
    let (x, c, eps, beta) = (&case.x, &case.c, &case.eps, case.beta);
    let (_, grads) = case.params.loss_and_grad(x, c, eps, beta)?;
    let mut out = GradCheck {
        checked: grads.len(),
        max_rel_error: 0.0,
        worst: 0,
    };
    for (i, &g) in grads.iter().enumerate() {
        let orig = case.params.values[i];
        case.params.values[i] = orig + h;
        let up = case.params.loss(x, c, eps, beta)?.total;
        case.params.values[i] = orig - h;
        let down = case.params.loss(x, c, eps, beta)?.total;
        case.params.values[i] = orig;
        let fd = (up - down) / (2.0 * h);
        let err = (g - fd).abs() / g.abs().max(fd.abs()).max(1e-6);
        if err > out.max_rel_error {
            out.max_rel_error = err;
            out.worst = i;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn analytic_gradient_matches_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for cond in [0, 2] {
            let mut case = random_case(&mut rng, &tiny_config(cond), 3, 0.7).unwrap();
            let r = check_gradients(&mut case, 1e-4).unwrap();
            assert!(r.max_rel_error < 1e-4, "{r:?}");
            assert_eq!(r.checked, case.params.values.len());
        }
    }
}
