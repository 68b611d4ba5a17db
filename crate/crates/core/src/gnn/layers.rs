//! Forward and backward passes of the graph-attention and dense layers.

use ndarray::{s, Array1, Array2, ArrayView2, Axis};

use crate::graph::Topology;
use crate::num::lit;
use crate::Real;

/// Attention neighborhoods: node `i` itself first, then its graph neighbors.
pub fn neighborhoods(t: &Topology) -> Vec<Vec<usize>> {
    (0..t.node_count())
        .map(|i| std::iter::once(i).chain(t.neighbors(i).iter().copied()).collect())
        .collect()
}

#[inline]
fn leaky<T: Real>(x: T, slope: T) -> T {
    if x > T::zero() {
        x
    } else {
        x * slope
    }
}

pub(crate) struct GatCache<T> {
    x: Array2<T>,
    z: Array2<T>,
    /// Attention weights aligned with the neighborhood lists.
    alpha: Vec<Vec<T>>,
    /// Pre-activation attention logits.
    pre: Vec<Vec<T>>,
}

impl<T> GatCache<T> {
    /// Attention logits before the LeakyReLU, per neighborhood.
    pub(crate) fn attention_logits(&self) -> &[Vec<T>] {
        &self.pre
    }
}

/// Single-head GAT layer: `z = x Wᵀ`, `e_ij = LeakyReLU(a_src·z_i + a_dst·z_j)`,
/// `α_i· = softmax(e_i·)` over `{i} ∪ N(i)`, `out_i = Σ_j α_ij z_j`.
pub(crate) fn gat_forward<T: Real>(
    x: Array2<T>,
    nb: &[Vec<usize>],
    w: &Array2<T>,
    a: &Array2<T>,
    slope: T,
) -> (Array2<T>, GatCache<T>) {
    let h = w.nrows();
    let z = mul_t(x.view(), w.view());
    let src: Array1<T> = z.dot(&a.slice(s![0, ..h]));
    let dst: Array1<T> = z.dot(&a.slice(s![0, h..]));
    let mut out = Array2::zeros((x.nrows(), h));
    let mut alpha = Vec::with_capacity(nb.len());
    let mut pre = Vec::with_capacity(nb.len());
    for (i, hood) in nb.iter().enumerate() {
        let p: Vec<T> = hood.iter().map(|&j| src[i] + dst[j]).collect();
        let e: Vec<T> = p.iter().map(|&v| leaky(v, slope)).collect();
        let max = e.iter().copied().fold(T::neg_infinity(), T::max);
        let ex: Vec<T> = e.iter().map(|&v| (v - max).exp()).collect();
        let sum = ex.iter().copied().fold(T::zero(), |acc, v| acc + v);
        let al: Vec<T> = ex.into_iter().map(|v| v / sum).collect();
        let mut row = out.row_mut(i);
        for (&j, &aij) in hood.iter().zip(&al) {
            row.scaled_add(aij, &z.row(j));
        }
        alpha.push(al);
        pre.push(p);
    }
    (out, GatCache { x, z, alpha, pre })
}

/// Accumulates `dW`, `da` and returns `dx`.
pub(crate) fn gat_backward<T: Real>(
    cache: &GatCache<T>,
    nb: &[Vec<usize>],
    w: &Array2<T>,
    a: &Array2<T>,
    slope: T,
    dout: &Array2<T>,
    dw: &mut Array2<T>,
    da: &mut Array2<T>,
) -> Array2<T> {
    let h = w.nrows();
    let z = &cache.z;
    let n = z.nrows();
    let mut dz = Array2::<T>::zeros((n, h));
    let mut dsrc = vec![T::zero(); n];
    let mut ddst = vec![T::zero(); n];
    let mut dalpha = Vec::new();
    for (i, hood) in nb.iter().enumerate() {
        let g = dout.row(i);
        let al = &cache.alpha[i];
        dalpha.clear();
        dalpha.extend(hood.iter().map(|&j| g.dot(&z.row(j))));
        for (&j, &aij) in hood.iter().zip(al) {
            dz.row_mut(j).scaled_add(aij, &g);
        }
        let mean = al
            .iter()
            .zip(&dalpha)
            .fold(T::zero(), |acc, (&aij, &d)| acc + aij * d);
        for (k, &j) in hood.iter().enumerate() {
            let de = al[k] * (dalpha[k] - mean);
            let dp = if cache.pre[i][k] > T::zero() { de } else { de * slope };
            dsrc[i] += dp;
            ddst[j] += dp;
        }
    }
    let a_src = a.slice(s![0, ..h]);
    let a_dst = a.slice(s![0, h..]);
    {
        let (mut da_src, mut da_dst) = da.multi_slice_mut((s![0, ..h], s![0, h..]));
        for i in 0..n {
            da_src.scaled_add(dsrc[i], &z.row(i));
            da_dst.scaled_add(ddst[i], &z.row(i));
        }
    }
    for i in 0..n {
        let mut row = dz.row_mut(i);
        row.scaled_add(dsrc[i], &a_src);
        row.scaled_add(ddst[i], &a_dst);
    }
    *dw += &dz.t().dot(&cache.x);
    dz.dot(w)
}

/// `x Wᵀ`. With few rows each weight row is streamed once against all of `x`,
/// which avoids packing the whole weight as a general product would.
pub(crate) fn mul_t<T: Real>(x: ArrayView2<T>, w: ArrayView2<T>) -> Array2<T> {
    const FEW_ROWS: usize = 16;
    if x.nrows() > FEW_ROWS || w.strides()[1] != 1 || x.ncols() != w.ncols() {
        return x.dot(&w.t());
    }
    let x = x.as_standard_layout();
    let rows: Vec<&[T]> = x.rows().into_iter().map(|r| r.to_slice().expect("standard layout")).collect();
    let mut out = Array2::zeros((x.nrows(), w.nrows()));
    for (k, wr) in w.rows().into_iter().enumerate() {
        let wr = wr.to_slice().expect("unit column stride");
        for (i, xr) in rows.iter().enumerate() {
            out[[i, k]] = dot(xr, wr);
        }
    }
    out
}

/// Dot product over eight interleaved partial sums.
#[inline]
fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    const LANES: usize = 8;
    let mut acc = [T::zero(); LANES];
    let split = a.len() - a.len() % LANES;
    for (ca, cb) in a[..split].chunks_exact(LANES).zip(b[..split].chunks_exact(LANES)) {
        for l in 0..LANES {
            acc[l] = acc[l] + ca[l] * cb[l];
        }
    }
    let tail = a[split..].iter().zip(&b[split..]).fold(T::zero(), |s, (&u, &v)| s + u * v);
    acc.iter().fold(tail, |s, &v| s + v)
}

/// `y = x Wᵀ + b`.
pub(crate) fn dense_forward<T: Real>(x: ArrayView2<T>, w: &Array2<T>, b: &Array2<T>) -> Array2<T> {
    mul_t(x, w.view()) + b
}

/// Accumulates `dW`, `db` and returns `dx`.
pub(crate) fn dense_backward<T: Real>(
    x: ArrayView2<T>,
    w: &Array2<T>,
    dy: &Array2<T>,
    dw: &mut Array2<T>,
    db: &mut Array2<T>,
) -> Array2<T> {
    *dw += &dy.t().dot(&x);
    *db += &dy.sum_axis(Axis(0)).insert_axis(Axis(0));
    dy.dot(w)
}

pub(crate) fn relu<T: Real>(x: &Array2<T>) -> Array2<T> {
    x.mapv(|v| v.max(T::zero()))
}

/// Zeroes `grad` where the pre-activation was not positive.
pub(crate) fn relu_backward<T: Real>(pre: &Array2<T>, grad: &mut Array2<T>) {
    grad.zip_mut_with(pre, |g, &p| {
        if p <= T::zero() {
            *g = T::zero();
        }
    });
}

/// Public single-layer evaluation, mainly for testing against other oracles.
pub fn gat_layer<T: Real>(
    x: ArrayView2<T>,
    t: &Topology,
    w: &Array2<T>,
    a: &Array2<T>,
    slope: f64,
) -> (Array2<T>, Vec<Vec<T>>) {
    let nb = neighborhoods(t);
    let (out, cache) = gat_forward(x.to_owned(), &nb, w, a, lit(slope));
    (out, cache.alpha)
}

/// Gradients of a single layer for an upstream gradient `dout`: `(dx, dW, da)`.
pub fn gat_layer_backward<T: Real>(
    x: ArrayView2<T>,
    t: &Topology,
    w: &Array2<T>,
    a: &Array2<T>,
    slope: f64,
    dout: &Array2<T>,
) -> (Array2<T>, Array2<T>, Array2<T>) {
    let nb = neighborhoods(t);
    let slope = lit(slope);
    let (_, cache) = gat_forward(x.to_owned(), &nb, w, a, slope);
    let mut dw = Array2::zeros(w.raw_dim());
    let mut da = Array2::zeros(a.raw_dim());
    let dx = gat_backward(&cache, &nb, w, a, slope, dout, &mut dw, &mut da);
    (dx, dw, da)
}
