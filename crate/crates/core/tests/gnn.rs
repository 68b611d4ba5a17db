mod common;

use common::*;
use mpwa_core::gnn::{
    batch_loss_and_grads, batch_loss_with_pattern, decode_pair, encode, finite_difference_check,
    finite_difference_check_kinked, gat_layer, gat_layer_backward, loss,
    loss_and_logit_grads, sample_negatives, sigmoid, AdamW, GradCheckOptions, TrainBatch, LOSS_EPS,
};
use mpwa_core::{Error, ModelParams, Topology};
use ndarray::{Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-1.0..1.0))
}

/// Direct evaluation of one GAT layer with scalar loops.
fn gat_oracle(x: &Array2<f64>, t: &Topology, w: &Array2<f64>, a: &Array2<f64>) -> Array2<f64> {
    let (n, h, d) = (x.nrows(), w.nrows(), x.ncols());
    let mut z = vec![vec![0.0; h]; n];
    for i in 0..n {
        for o in 0..h {
            for k in 0..d {
                z[i][o] += w[[o, k]] * x[[i, k]];
            }
        }
    }
    let mut out = Array2::zeros((n, h));
    for i in 0..n {
        let mut hood = vec![i];
        hood.extend((0..n).filter(|&j| t.has_edge(i, j)));
        let logits: Vec<f64> = hood
            .iter()
            .map(|&j| {
                let mut e = 0.0;
                for o in 0..h {
                    e += a[[0, o]] * z[i][o] + a[[0, h + o]] * z[j][o];
                }
                if e > 0.0 {
                    e
                } else {
                    0.2 * e
                }
            })
            .collect();
        let norm: f64 = logits.iter().map(|e| e.exp()).sum();
        for (k, &j) in hood.iter().enumerate() {
            let alpha = logits[k].exp() / norm;
            for o in 0..h {
                out[[i, o]] += alpha * z[j][o];
            }
        }
    }
    out
}

#[test]
fn gat_matches_scalar_loop_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let t = random_topology(&mut rng, 5, 0.4);
        let x = random_matrix(&mut rng, 5, 7);
        let w = random_matrix(&mut rng, 4, 7);
        let a = random_matrix(&mut rng, 1, 8);
        let (out, alpha) = gat_layer(x.view(), &t, &w, &a, 0.2);
        let oracle = gat_oracle(&x, &t, &w, &a);
        for (p, q) in out.iter().zip(&oracle) {
            assert!((p - q).abs() < 1e-6);
        }
        for row in &alpha {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        }
    }
}

#[test]
fn isolated_node_keeps_its_projection() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let t = Topology::from_edges(3, [(1, 2)]);
    let x = random_matrix(&mut rng, 3, 4);
    let w = random_matrix(&mut rng, 5, 4);
    let a = random_matrix(&mut rng, 1, 10);
    let (out, alpha) = gat_layer(x.view(), &t, &w, &a, 0.2);
    assert_eq!(alpha[0], vec![1.0]);
    let wx = w.dot(&x.row(0));
    for o in 0..5 {
        assert!((out[[0, o]] - wx[o]).abs() < 1e-12);
    }
}

#[test]
fn identical_neighbors_share_attention() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let t = Topology::from_edges(2, [(0, 1)]);
    let row = random_matrix(&mut rng, 1, 4);
    let x = ndarray::concatenate(Axis(0), &[row.view(), row.view()]).unwrap();
    let w = random_matrix(&mut rng, 3, 4);
    let a = random_matrix(&mut rng, 1, 6);
    let (out, alpha) = gat_layer(x.view(), &t, &w, &a, 0.2);
    assert!((alpha[0][0] - 0.5).abs() < 1e-12 && (alpha[0][1] - 0.5).abs() < 1e-12);
    let wx = w.dot(&x.row(0));
    for o in 0..3 {
        assert!((out[[1, o]] - wx[o]).abs() < 1e-12);
    }
}

/// With a zero attention vector the layer is `out = Â X Wᵀ` where `Â` averages
/// each neighborhood, so the gradients have a closed form.
#[test]
fn uniform_attention_gradients_match_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10 {
        let n = 6;
        let t = random_topology(&mut rng, n, 0.5);
        let x = random_matrix(&mut rng, n, 5);
        let w = random_matrix(&mut rng, 4, 5);
        let a = Array2::zeros((1, 8));
        let c = random_matrix(&mut rng, n, 4);
        let mut avg = Array2::<f64>::zeros((n, n));
        for i in 0..n {
            let hood: Vec<usize> = std::iter::once(i).chain(t.neighbors(i).iter().copied()).collect();
            for &j in &hood {
                avg[[i, j]] = 1.0 / hood.len() as f64;
            }
        }
        let dz = avg.t().dot(&c);
        let dw_closed = dz.t().dot(&x);
        let dx_closed = dz.dot(&w);
        let (dx, dw, _) = gat_layer_backward(x.view(), &t, &w, &a, 0.2, &c);
        for (p, q) in dw.iter().zip(&dw_closed) {
            assert!(rel_close(*p, *q, 1e-8), "{p} vs {q}");
        }
        for (p, q) in dx.iter().zip(&dx_closed) {
            assert!(rel_close(*p, *q, 1e-8), "{p} vs {q}");
        }
    }
}

#[test]
fn zero_parameters_give_zero_hidden_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let config = small_config(16);
    let g = random_sentence(&mut rng, &[3, 2, 3], 0.4);
    let inputs = random_inputs(&mut rng, g.node_count(), &config.features);
    let params = ModelParams::<f64>::zeros(&config, LANGUAGES, WORD_ROWS);
    let h = encode(&params, &config.features, 0.2, g.topology(), &inputs);
    assert_eq!(h.dim(), (8, 16));
    assert!(h.iter().all(|&v| v == 0.0));
    let (p, logit) = decode_pair(&params, h.slice(ndarray::s![0..1, ..]), h.slice(ndarray::s![1..2, ..]));
    assert_eq!((p, logit), (0.5, 0.0));
}

#[test]
fn default_hidden_width_is_512() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let config = small_config(512);
    let g = random_sentence(&mut rng, &[2, 2], 0.6);
    let inputs = random_inputs(&mut rng, g.node_count(), &config.features);
    let params = ModelParams::<f32>::init(&config, LANGUAGES, WORD_ROWS, None, &mut rng);
    let h = encode(&params, &config.features, 0.2, g.topology(), &inputs);
    assert_eq!(h.dim(), (4, 512));
}

#[test]
fn encoder_is_permutation_equivariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let config = small_config(16);
    let params = random_params(&mut rng, &config);
    for _ in 0..5 {
        let n = 7;
        let t = random_topology(&mut rng, n, 0.4);
        let inputs = random_inputs(&mut rng, n, &config.features);
        let mut perm: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut rng);
        // Node u moves to perm[u].
        let pt = Topology::from_edges(n, t.edges().map(|(u, v)| (perm[u], perm[v])));
        let mut pin = inputs.clone();
        for u in 0..n {
            pin.nodes[perm[u]] = inputs.nodes[u];
        }
        let h = encode(&params, &config.features, 0.2, &t, &inputs);
        let hp = encode(&params, &config.features, 0.2, &pt, &pin);
        for u in 0..n {
            for k in 0..16 {
                assert!((h[[u, k]] - hp[[perm[u], k]]).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn decoder_probability_in_open_interval() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let config = small_config(16);
    let params = random_params(&mut rng, &config);
    for _ in 0..50 {
        let hi = random_matrix(&mut rng, 1, 16) * 3.0;
        let hj = random_matrix(&mut rng, 1, 16) * 3.0;
        let (p, logit) = decode_pair(&params, hi.view(), hj.view());
        assert!(p > 0.0 && p < 1.0);
        assert!((p - sigmoid(logit)).abs() < 1e-15);
    }
}

#[test]
fn negative_sampling_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    assert_eq!(sample_negatives(&[(0, 0)], 2, 2, &mut rng), vec![(0, 1), (1, 0)]);
    assert!(sample_negatives(&[(0, 0)], 1, 1, &mut rng).is_empty());
    assert_eq!(sample_negatives(&[(0, 0)], 1, 3, &mut rng).len(), 1);
    for _ in 0..200 {
        let (m, l) = (rng.gen_range(2..9), rng.gen_range(2..9));
        let pos: Vec<(usize, usize)> = (0..5).map(|_| (rng.gen_range(0..m), rng.gen_range(0..l))).collect();
        let neg = sample_negatives(&pos, m, l, &mut rng);
        assert_eq!(neg.len(), 2 * pos.len());
        for (k, &(i, j)) in pos.iter().enumerate() {
            let (a, b) = (neg[2 * k], neg[2 * k + 1]);
            assert!(a.0 == i && a.1 != j && a.1 < l);
            assert!(b.1 == j && b.0 != i && b.0 < m);
        }
    }
}

#[test]
fn loss_matches_scalar_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..100 {
        let b = rng.gen_range(1..20);
        let pos: Vec<f64> = (0..b).map(|_| rng.gen_range(0.0..1.0)).collect();
        let neg: Vec<f64> = (0..2 * b).map(|_| rng.gen_range(0.0..1.0)).collect();
        let clamp = |p: f64| p.clamp(LOSS_EPS, 1.0 - LOSS_EPS);
        let mut oracle = 0.0;
        for p in &pos {
            oracle -= clamp(*p).ln() / b as f64;
        }
        for p in &neg {
            oracle -= (1.0 - clamp(*p)).ln() / (2 * b) as f64;
        }
        let l = loss(&pos, &neg);
        assert!((l - oracle).abs() < 1e-9);
        assert!(l >= 0.0);
    }
    assert!((loss(&[0.5f64; 4], &[0.5; 8]) - 1.3863).abs() < 1e-4);
    assert!(loss(&[1.0 - LOSS_EPS; 2], &[LOSS_EPS; 4]) < 1e-6);
}

#[test]
fn loss_is_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let pos: Vec<f64> = (0..3).map(|_| rng.gen_range(0.01..0.99)).collect();
        let neg: Vec<f64> = (0..6).map(|_| rng.gen_range(0.01..0.99)).collect();
        let base = loss(&pos, &neg);
        let mut more_neg = neg.clone();
        more_neg[0] = (more_neg[0] + 0.005).min(0.999);
        assert!(loss(&pos, &more_neg) >= base);
        let mut less_pos = pos.clone();
        less_pos[0] -= 0.005;
        assert!(loss(&less_pos, &neg) >= base);
    }
}

#[test]
fn logit_gradient_matches_difference_quotient() {
    let pos = [0.3f64, -1.2];
    let neg = [0.4f64, 2.0, -0.7, 0.1];
    let (_, dpos, dneg) = loss_and_logit_grads(&pos, &neg);
    let h = 1e-6;
    for k in 0..2 {
        let (mut up, mut down) = (pos, pos);
        up[k] += h;
        down[k] -= h;
        let f = |z: &[f64]| loss_and_logit_grads(z, &neg).0;
        assert!(((f(&up) - f(&down)) / (2.0 * h) - dpos[k]).abs() < 1e-8);
    }
    for k in 0..4 {
        let (mut up, mut down) = (neg, neg);
        up[k] += h;
        down[k] -= h;
        let f = |z: &[f64]| loss_and_logit_grads(&pos, z).0;
        assert!(((f(&up) - f(&down)) / (2.0 * h) - dneg[k]).abs() < 1e-8);
    }
}

fn scalar_params(value: f64) -> ModelParams<f64> {
    let config = small_config(1);
    let mut p = ModelParams::<f64>::zeros(&config, 1, 1);
    p.dec2_b[[0, 0]] = value;
    p
}

#[test]
fn adamw_first_step_closed_form() {
    let (lr, wd, theta) = (1e-3, 0.01, 0.7);
    let mut p = scalar_params(theta);
    let mut g = p.zeros_like();
    g.dec2_b[[0, 0]] = 1.0;
    let mut opt = AdamW::new(lr, wd);
    opt.step(&mut p, &g).unwrap();
    let expected = theta - lr * (1.0 / (1.0 + 1e-8) + wd * theta);
    assert!((p.dec2_b[[0, 0]] - expected).abs() < 1e-15);
}

#[test]
fn adamw_edge_cases() {
    let mut p = scalar_params(0.5);
    let zero = p.zeros_like();
    AdamW::new(1e-3, 0.0).step(&mut p, &zero).unwrap();
    assert_eq!(p.dec2_b[[0, 0]], 0.5);

    let mut opt = AdamW::new(1e-3, 0.01);
    let mut last = 0.5f64;
    for _ in 0..5 {
        opt.step(&mut p, &zero).unwrap();
        assert!(p.dec2_b[[0, 0]].abs() < last.abs());
        last = p.dec2_b[[0, 0]];
    }

    let mut g = p.zeros_like();
    g.dec2_b[[0, 0]] = 3.0;
    let before = p.clone();
    AdamW::new(0.0, 0.01).step(&mut p, &g).unwrap();
    assert_eq!(p, before);

    g.gat1_w[[0, 0]] = f64::NAN;
    let err = AdamW::new(1e-3, 0.01).step(&mut p, &g).unwrap_err();
    assert!(matches!(err, Error::NonFiniteGradient(ref n) if n == "gat1.w"));
    assert_eq!(p, before);
}

fn batch_for<R: Rng>(rng: &mut R, g: &mpwa_core::AlignmentGraph) -> TrainBatch {
    let positives: Vec<(usize, usize)> = g.topology().edges().collect();
    let negatives = mpwa_core::gnn::sample_graph_negatives(g, &positives, rng);
    TrainBatch { positives, negatives }
}

#[test]
fn full_model_gradient_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let config = small_config(16);
    for trial in 0..3 {
        let g = loop {
            let g = random_sentence(&mut rng, &[2, 2, 2], 0.5);
            if g.edge_count() > 0 {
                break g;
            }
        };
        let inputs = random_inputs(&mut rng, 6, &config.features);
        let params = random_params(&mut rng, &config);
        let batch = batch_for(&mut rng, &g);
        let mut grads = params.zeros_like();
        let f = |p: &ModelParams<f64>| {
            batch_loss_and_grads(p, &config.features, 0.2, g.topology(), &inputs, &batch, None)
        };
        batch_loss_and_grads(&params, &config.features, 0.2, g.topology(), &inputs, &batch, Some(&mut grads));
        let opts = GradCheckOptions {
            seed: trial,
            ..GradCheckOptions::default()
        };
        let report = finite_difference_check(&params, &grads, f, &opts).unwrap();
        assert!(report.max_rel_error < 1e-4, "{report:?}");
        assert!(report.checked > 0);
    }
}

#[test]
fn corrupted_gradient_fails_the_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let config = small_config(8);
    let g = random_sentence(&mut rng, &[2, 2, 2], 0.7);
    let inputs = random_inputs(&mut rng, 6, &config.features);
    let params = random_params(&mut rng, &config);
    let batch = batch_for(&mut rng, &g);
    let mut grads = params.zeros_like();
    batch_loss_and_grads(&params, &config.features, 0.2, g.topology(), &inputs, &batch, Some(&mut grads));
    grads.enc_w.mapv_inplace(|v| v * 1.5 + 1e-3);
    let f = |p: &ModelParams<f64>| batch_loss_and_grads(p, &config.features, 0.2, g.topology(), &inputs, &batch, None);
    match finite_difference_check(&params, &grads, f, &GradCheckOptions::default()) {
        Err(Error::GradientCheck(names)) => assert_eq!(names, vec!["encoder.fc.w".to_owned()]),
        other => panic!("expected a failed check, got {other:?}"),
    }
}

#[test]
fn pattern_loss_equals_training_loss() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let config = small_config(8);
    for _ in 0..10 {
        let g = random_sentence(&mut rng, &[2, 3, 2], 0.5);
        let inputs = random_inputs(&mut rng, 7, &config.features);
        let params = random_params(&mut rng, &config);
        let batch = batch_for(&mut rng, &g);
        let plain = batch_loss_and_grads(&params, &config.features, 0.2, g.topology(), &inputs, &batch, None);
        let (with, pattern) = batch_loss_with_pattern(&params, &config.features, 0.2, g.topology(), &inputs, &batch);
        assert_eq!(plain, with);
        assert!(!pattern.is_empty());
    }
}

#[test]
fn kink_crossings_are_skipped_but_errors_still_fail() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let config = small_config(16);
    let g = random_sentence(&mut rng, &[2, 2, 2], 0.7);
    let inputs = random_inputs(&mut rng, 6, &config.features);
    let params = random_params(&mut rng, &config);
    let batch = batch_for(&mut rng, &g);
    let mut grads = params.zeros_like();
    batch_loss_and_grads(&params, &config.features, 0.2, g.topology(), &inputs, &batch, Some(&mut grads));
    let f = |p: &ModelParams<f64>| batch_loss_with_pattern(p, &config.features, 0.2, g.topology(), &inputs, &batch);
    // A coarse step crosses kinks; those probes are skipped, the rest agree.
    let coarse = GradCheckOptions {
        step: 1e-2,
        tolerance: 1e-3,
        ..GradCheckOptions::default()
    };
    let report = finite_difference_check_kinked(&params, &grads, f, &coarse).unwrap();
    assert!(report.skipped > 0, "{report:?}");
    assert!(report.checked > 0);

    grads.gat2_a.mapv_inplace(|v| v * 1.5 + 1e-3);
    match finite_difference_check_kinked(&params, &grads, f, &GradCheckOptions::default()) {
        Err(Error::GradientCheck(names)) => assert_eq!(names, vec!["gat2.a".to_owned()]),
        other => panic!("expected a failed check, got {other:?}"),
    }
}
