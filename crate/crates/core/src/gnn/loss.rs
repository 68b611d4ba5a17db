use crate::num::lit;
use crate::Real;

/// Probability clamp of the loss.
pub const LOSS_EPS: f64 = 1e-7;

pub fn sigmoid<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// `L = −(1/b) Σ log p⁺ − (1/2b) Σ log(1 − p⁻)` with `p` clamped to
/// `[ε, 1 − ε]`; `b` is the number of positives.
pub fn loss<T: Real>(pos: &[T], neg: &[T]) -> T {
    let eps: T = lit(LOSS_EPS);
    let clamp = |p: T| p.max(eps).min(T::one() - eps);
    let b: T = lit(pos.len().max(1) as f64);
    let two: T = lit(2.0);
    let lp = pos.iter().fold(T::zero(), |acc, &p| acc + clamp(p).ln());
    let ln = neg.iter().fold(T::zero(), |acc, &p| acc + (T::one() - clamp(p)).ln());
    -lp / b - ln / (two * b)
}

/// Loss from decoder logits and its gradient per logit. Clamped
/// probabilities contribute no gradient.
pub fn loss_and_logit_grads<T: Real>(pos: &[T], neg: &[T]) -> (T, Vec<T>, Vec<T>) {
    let eps: T = lit(LOSS_EPS);
    let b: T = lit(pos.len().max(1) as f64);
    let two: T = lit(2.0);
    let ppos: Vec<T> = pos.iter().map(|&z| sigmoid(z)).collect();
    let pneg: Vec<T> = neg.iter().map(|&z| sigmoid(z)).collect();
    let inside = |p: T| p >= eps && p <= T::one() - eps;
    let dpos = ppos
        .iter()
        .map(|&p| if inside(p) { -(T::one() - p) / b } else { T::zero() })
        .collect();
    let dneg = pneg
        .iter()
        .map(|&p| if inside(p) { p / (two * b) } else { T::zero() })
        .collect();
    (loss(&ppos, &pneg), dpos, dneg)
}
