use super::params::Parameters;

/// Compares `analytic` gradients with central differences of `loss` at step
/// `eps`, returning the largest relative error
/// `|a - n| / max(|a|, |n|, 1e-8)` over all parameters.
///
/// `params` is perturbed in place and restored before returning.
pub fn grad_check<P, F>(params: &mut P, analytic: &P, eps: f64, mut loss: F) -> f64
where
    P: Parameters,
    F: FnMut(&P) -> f64,
{
    let base = params.to_flat();
    let analytic = analytic.to_flat();
    let mut worst = 0.0f64;
    let mut probe = base.clone();
    for k in 0..base.len() {
        probe[k] = base[k] + eps;
        params.assign_flat(&probe).expect("same layout");
        let up = loss(params);
        probe[k] = base[k] - eps;
        params.assign_flat(&probe).expect("same layout");
        let down = loss(params);
        probe[k] = base[k];
        let numeric = (up - down) / (2.0 * eps);
        let a = analytic[k];
        let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
        worst = worst.max(err);
    }
    params.assign_flat(&base).expect("same layout");
    worst
}
