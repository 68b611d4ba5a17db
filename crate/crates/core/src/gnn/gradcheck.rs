use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ModelParams;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradCheckOptions {
    /// Central-difference step.
    pub step: f64,
    /// Maximum accepted relative error.
    pub tolerance: f64,
    /// Fraction of each tensor's entries to check.
    pub fraction: f64,
    pub min_per_tensor: usize,
    pub max_per_tensor: usize,
    /// Denominator floor of the relative error, for gradients near zero.
    pub floor: f64,
    pub seed: u64,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        Self {
            step: 1e-5,
            tolerance: 1e-4,
            fraction: 0.01,
            min_per_tensor: 2,
            max_per_tensor: 64,
            floor: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GradCheckReport {
    pub checked: usize,
    pub max_rel_error: f64,
    /// Tensor name and flat index of the largest error.
    pub worst: Option<(String, usize)>,
    /// Entries passed over because the difference quotient crossed a kink.
    pub skipped: usize,
}

/// `|a − n| / max(|a|, |n|, floor)`.
pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

/// Compares `analytic` with central differences of `loss` on a per-tensor
/// sample of entries. Entries with a nonzero analytic gradient are sampled
/// first. Fails with the names of all tensors exceeding the tolerance.
pub fn finite_difference_check(
    params: &ModelParams<f64>,
    analytic: &ModelParams<f64>,
    loss: impl Fn(&ModelParams<f64>) -> f64,
    opts: &GradCheckOptions,
) -> Result<GradCheckReport> {
    check(params, analytic, |p| (loss(p), Vec::new()), opts)
}

/// As [`finite_difference_check`], for a piecewise-smooth loss that also
/// reports which side of each kink it is on. An entry whose `±step` probes
/// change the pattern is skipped and the next candidate of its tensor is
/// checked instead, since the difference quotient there does not estimate the
/// derivative.
pub fn finite_difference_check_kinked(
    params: &ModelParams<f64>,
    analytic: &ModelParams<f64>,
    loss: impl Fn(&ModelParams<f64>) -> (f64, Vec<bool>),
    opts: &GradCheckOptions,
) -> Result<GradCheckReport> {
    check(params, analytic, loss, opts)
}

fn check(
    params: &ModelParams<f64>,
    analytic: &ModelParams<f64>,
    loss: impl Fn(&ModelParams<f64>) -> (f64, Vec<bool>),
    opts: &GradCheckOptions,
) -> Result<GradCheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut probe = params.clone();
    let mut report = GradCheckReport::default();
    let mut failed = Vec::new();
    let pattern = loss(params).1;
    let grads = analytic.tensors();
    for (k, (name, tensor)) in params.tensors().into_iter().enumerate() {
        let g = grads[k].1.as_slice().expect("standard layout");
        let n = tensor.len();
        if n == 0 {
            continue;
        }
        let want = ((n as f64 * opts.fraction).ceil() as usize)
            .clamp(opts.min_per_tensor, opts.max_per_tensor)
            .min(n);
        let (mut active, mut idle): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| g[i] != 0.0);
        active.shuffle(&mut rng);
        idle.shuffle(&mut rng);
        let mut bad = false;
        let mut done = 0;
        for i in active.into_iter().chain(idle) {
            if done == want {
                break;
            }
            let orig = tensor.as_slice().expect("standard layout")[i];
            let set = |p: &mut ModelParams<f64>, v: f64| {
                p.tensors_mut()[k].1.as_slice_mut().expect("standard layout")[i] = v;
            };
            set(&mut probe, orig + opts.step);
            let (up, up_pattern) = loss(&probe);
            set(&mut probe, orig - opts.step);
            let (down, down_pattern) = loss(&probe);
            set(&mut probe, orig);
            if up_pattern != pattern || down_pattern != pattern {
                report.skipped += 1;
                continue;
            }
            let numeric = (up - down) / (2.0 * opts.step);
            let err = relative_error(g[i], numeric, opts.floor);
            done += 1;
            report.checked += 1;
            if err > report.max_rel_error || report.worst.is_none() {
                report.max_rel_error = report.max_rel_error.max(err);
                report.worst = Some((name.to_owned(), i));
            }
            bad |= err > opts.tolerance;
        }
        if bad {
            failed.push(name.to_owned());
        }
    }
    if failed.is_empty() {
        Ok(report)
    } else {
        Err(Error::GradientCheck(failed))
    }
}
