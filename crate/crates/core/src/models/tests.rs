use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::dtdg::{Dtdg, Snapshot, Tau};
use crate::tensor::finite_diff_check;

fn small_hyper() -> Hyper {
    Hyper {
        d_in: 4,
        hidden: 4,
        layers: 1,
        heads: 2,
        kernel: 2,
        max_positions: 8,
    }
}

fn random_dtdg(n: usize, t: usize, p: f64, rng: &mut impl Rng) -> Dtdg {
    let snapshots = (0..t)
        .map(|k| {
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(p) {
                        edges.push((u, v));
                    }
                }
            }
            Snapshot::from_edges(k, &edges, n).unwrap()
        })
        .collect();
    Dtdg::new("random", n, snapshots).unwrap()
}

fn model(arch: Arch, n: usize, seed: u64) -> ModelState {
    ModelState::new(arch, n, small_hyper(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn set(model: &mut ModelState, name: &str, value: Tensor) {
    let slot = model.params_mut().get_mut(name).unwrap();
    assert_eq!(slot.shape(), value.shape(), "{name}");
    *slot = value;
}

fn fill(model: &mut ModelState, prefix: &str, value: f64) {
    let names: Vec<String> = model
        .params()
        .iter()
        .filter(|(n, _)| n.starts_with(prefix))
        .map(|(n, _)| n.to_string())
        .collect();
    for name in names {
        model
            .params_mut()
            .get_mut(&name)
            .unwrap()
            .data_mut()
            .fill(value);
    }
}

// Plain-array helpers for the hand-unrolled oracles.
type M = Vec<Vec<f64>>;

fn mm(a: &M, b: &M) -> M {
    let (r, k, c) = (a.len(), b.len(), b[0].len());
    (0..r)
        .map(|i| {
            (0..c)
                .map(|j| (0..k).map(|l| a[i][l] * b[l][j]).sum())
                .collect()
        })
        .collect()
}

fn zip(a: &M, b: &M, f: impl Fn(f64, f64) -> f64) -> M {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| f(*p, *q)).collect())
        .collect()
}

fn apply(a: &M, f: impl Fn(f64) -> f64) -> M {
    a.iter()
        .map(|r| r.iter().map(|&x| f(x)).collect())
        .collect()
}

fn to_m(t: &Tensor) -> M {
    (0..t.rows()).map(|i| t.row(i).to_vec()).collect()
}

fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn assert_close(a: &M, b: &Tensor, tol: f64) {
    for (i, row) in a.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            assert!(
                (x - b.get(i, j)).abs() < tol,
                "[{i}][{j}]: {x} vs {}",
                b.get(i, j)
            );
        }
    }
}

#[test]
fn arch_names_round_trip() {
    for arch in Arch::ALL {
        assert_eq!(arch.name().parse::<Arch>().unwrap(), arch);
        assert_eq!(arch.label().parse::<Arch>().unwrap(), arch);
    }
    assert!("transformer".parse::<Arch>().is_err());
}

#[test]
fn hyper_validation() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let bad_heads = Hyper {
        heads: 3,
        ..small_hyper()
    };
    assert!(ModelState::new(Arch::Dysat, 5, bad_heads, &mut rng).is_err());
    let two_layers = Hyper {
        layers: 2,
        ..small_hyper()
    };
    assert!(ModelState::new(Arch::Egcn, 5, two_layers, &mut rng).is_err());
    assert!(ModelState::new(Arch::Egcn, 1, small_hyper(), &mut rng).is_err());
}

#[test]
fn shape_is_stable_across_window_lengths() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let d = random_dtdg(7, 6, 0.3, &mut rng);
    for arch in Arch::PARAMETRIC {
        let m = model(arch, 7, 2);
        for tau in (1..=6).map(Tau::Finite).chain([Tau::Inf]) {
            let z = m.embeddings(&d.window(5, tau).unwrap()).unwrap();
            assert_eq!(z.shape(), (7, 4), "{arch} {tau}");
            assert!(z.data().iter().all(|x| x.is_finite()));
        }
    }
}

#[test]
fn edgebank_has_no_embeddings() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let d = random_dtdg(5, 3, 0.5, &mut rng);
    let m = model(Arch::EdgeBank, 5, 0);
    assert!(m.params().is_empty());
    assert!(m.embeddings(&d.window(2, Tau::Inf).unwrap()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn output_ignores_snapshots_outside_window(seed in any::<u64>(), tau in 1usize..5, arch_ix in 0usize..5) {
        let arch = Arch::ALL[arch_ix];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 6;
        let base = random_dtdg(n, 7, 0.35, &mut rng);
        let t = 6;
        let start = t + 1 - tau;
        // Replace every snapshot before the window with fresh random structure.
        let other = random_dtdg(n, 7, 0.6, &mut rng);
        let mixed: Vec<Snapshot> = (0..7)
            .map(|k| if k < start { other.snapshots()[k].clone() } else { base.snapshots()[k].clone() })
            .collect();
        let perturbed = Dtdg::new("perturbed", n, mixed).unwrap();
        let m = model(arch, n, seed ^ 7);
        let pairs: Vec<Edge> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let w0 = base.window(t, Tau::Finite(tau)).unwrap();
        let w1 = perturbed.window(t, Tau::Finite(tau)).unwrap();
        prop_assert_eq!(m.score_pairs(&w0, &pairs).unwrap(), m.score_pairs(&w1, &pairs).unwrap());
        if arch.is_parametric() {
            prop_assert_eq!(m.embeddings(&w0).unwrap(), m.embeddings(&w1).unwrap());
        }
    }

    #[test]
    fn decoder_is_symmetric(seed in any::<u64>(), u in 0usize..6, v in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = model(Arch::Gclstm, 6, seed);
        let z = Tensor::glorot(6, 4, &mut rng);
        prop_assert_eq!(
            decode_edge(&z, u, v, m.params()).unwrap(),
            decode_edge(&z, v, u, m.params()).unwrap()
        );
    }
}

#[test]
fn score_pairs_matches_tapeless_decoder() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let d = random_dtdg(6, 4, 0.4, &mut rng);
    let w = d.window(3, Tau::Finite(2)).unwrap();
    for arch in Arch::PARAMETRIC {
        let m = model(arch, 6, 4);
        let z = m.embeddings(&w).unwrap();
        let pairs = [(0, 1), (5, 2), (3, 3), (4, 0)];
        let scores = m.score_pairs(&w, &pairs).unwrap();
        for (&(u, v), s) in pairs.iter().zip(scores) {
            assert!((decode_edge(&z, u, v, m.params()).unwrap() - s).abs() < 1e-12);
        }
    }
}

#[test]
fn zero_decoder_gives_one_half() {
    let mut m = model(Arch::Egcn, 5, 0);
    fill(&mut m, "dec.", 0.0);
    let z = Tensor::glorot(5, 4, &mut ChaCha8Rng::seed_from_u64(1));
    for u in 0..5 {
        for v in 0..5 {
            assert_eq!(decode_edge(&z, u, v, m.params()).unwrap(), 0.5);
        }
    }
}

#[test]
fn single_hidden_unit_decoder_matches_hand_computation() {
    let mut m = model(Arch::Egcn, 3, 0);
    fill(&mut m, "dec.", 0.0);
    // Only hidden unit 0 is live: w1[:,0] reads z_u[0], z_v[1] and (z_u∘z_v)[2].
    let mut w1 = Tensor::zeros(12, 4);
    w1.set(0, 0, 1.0);
    w1.set(4 + 1, 0, -2.0);
    w1.set(8 + 2, 0, 3.0);
    set(&mut m, "dec.w1", w1);
    let mut b1 = Tensor::zeros(1, 4);
    b1.set(0, 0, 0.25);
    set(&mut m, "dec.b1", b1);
    let mut w2 = Tensor::zeros(4, 1);
    w2.set(0, 0, 1.5);
    set(&mut m, "dec.w2", w2);
    set(&mut m, "dec.b2", Tensor::scalar(-0.5));
    let z = Tensor::from_rows(&[
        vec![0.2, 0.1, 0.4, 0.0],
        vec![0.9, -0.3, 0.5, 1.0],
        vec![-1.0, 0.6, 0.7, 0.2],
    ])
    .unwrap();
    // Pair (2, 1) is read as (1, 2): u = 1, v = 2.
    let hidden = (0.25_f64 + 0.9 - 2.0 * 0.6 + 3.0 * 0.5 * 0.7).max(0.0);
    let expected = sig(1.5 * hidden - 0.5);
    assert!((decode_edge(&z, 2, 1, m.params()).unwrap() - expected).abs() < 1e-15);
    let w = Dtdg::new("x", 3, vec![Snapshot::empty(0)]).unwrap();
    let s = m.score_pairs(&w.window(0, Tau::Inf).unwrap(), &[(2, 1)]);
    assert!(s.is_ok());
}

#[test]
fn edgebank_window_membership() {
    let snaps = vec![
        Snapshot::from_edges(0, &[(0, 1)], 4).unwrap(),
        Snapshot::from_edges(1, &[(2, 3)], 4).unwrap(),
        Snapshot::from_edges(2, &[(1, 2)], 4).unwrap(),
    ];
    let d = Dtdg::new("eb", 4, snaps).unwrap();
    // (0,1) only at t-2 for t=2.
    assert_eq!(
        edgebank_score(&d.window(2, Tau::Finite(1)).unwrap(), 0, 1),
        0
    );
    assert_eq!(
        edgebank_score(&d.window(2, Tau::Finite(3)).unwrap(), 1, 0),
        1
    );
    assert_eq!(edgebank_score(&d.window(2, Tau::Inf).unwrap(), 0, 1), 1);
    for tau in [Tau::Finite(1), Tau::Finite(2), Tau::Finite(3), Tau::Inf] {
        assert_eq!(edgebank_score(&d.window(2, tau).unwrap(), 0, 3), 0);
    }
    let m = model(Arch::EdgeBank, 4, 0);
    let w = d.window(2, Tau::Finite(2)).unwrap();
    assert_eq!(
        m.score_pairs(&w, &[(3, 2), (0, 1), (1, 2)]).unwrap(),
        vec![1.0, 0.0, 1.0]
    );
}

#[test]
fn gclstm_zero_embeddings_and_biases_give_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let d = random_dtdg(5, 4, 0.5, &mut rng);
    let mut m = model(Arch::Gclstm, 5, 1);
    fill(&mut m, "embed", 0.0);
    let z = m.embeddings(&d.window(3, Tau::Inf).unwrap()).unwrap();
    assert!(z.data().iter().all(|&x| x == 0.0));
}

struct LstmWeights {
    wx: Vec<M>,
    wh: Vec<M>,
    b: Vec<M>,
}

fn lstm_oracle(x: &M, adj: &[M], w: &LstmWeights, d: usize) -> M {
    let n = x.len();
    let mut h = vec![vec![0.0; d]; n];
    let mut c = vec![vec![0.0; d]; n];
    for a in adj {
        let ax = mm(a, x);
        let ah = mm(a, &h);
        let pre: Vec<M> = (0..4)
            .map(|k| {
                let s = zip(&mm(&ax, &w.wx[k]), &mm(&ah, &w.wh[k]), |p, q| p + q);
                s.iter()
                    .map(|r| r.iter().zip(&w.b[k][0]).map(|(x, b)| x + b).collect())
                    .collect()
            })
            .collect();
        let i = apply(&pre[0], sig);
        let f = apply(&pre[1], sig);
        let o = apply(&pre[2], sig);
        let g = apply(&pre[3], f64::tanh);
        c = zip(
            &zip(&f, &c, |p, q| p * q),
            &zip(&i, &g, |p, q| p * q),
            |p, q| p + q,
        );
        h = zip(&o, &apply(&c, f64::tanh), |p, q| p * q);
    }
    h
}

#[test]
fn gclstm_two_steps_match_hand_unrolled_cell() {
    let hyper = Hyper {
        d_in: 2,
        hidden: 2,
        heads: 1,
        ..small_hyper()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut m = ModelState::new(Arch::Gclstm, 3, hyper, &mut rng).unwrap();
    for g in gclstm::GATES {
        set(
            &mut m,
            &format!("gclstm.b.{g}"),
            Tensor::uniform(1, 2, 0.5, &mut rng),
        );
    }
    let snaps = vec![
        Snapshot::from_edges(0, &[(0, 1)], 3).unwrap(),
        Snapshot::from_edges(1, &[(1, 2), (0, 2)], 3).unwrap(),
    ];
    let d = Dtdg::new("g", 3, snaps).unwrap();
    let p = |name: String| to_m(m.params().get(&name).unwrap());
    let w = LstmWeights {
        wx: gclstm::GATES
            .iter()
            .map(|g| p(format!("gclstm.wx.{g}")))
            .collect(),
        wh: gclstm::GATES
            .iter()
            .map(|g| p(format!("gclstm.wh.{g}")))
            .collect(),
        b: gclstm::GATES
            .iter()
            .map(|g| p(format!("gclstm.b.{g}")))
            .collect(),
    };
    let adj: Vec<M> = d
        .snapshots()
        .iter()
        .map(|s| to_m(&s.normalized_adjacency(3)))
        .collect();
    let x = p("embed".into());
    let expected = lstm_oracle(&x, &adj, &w, 2);
    assert_close(
        &expected,
        &m.embeddings(&d.window(1, Tau::Finite(2)).unwrap()).unwrap(),
        1e-14,
    );

    // Window of one: a single step from zero state, where c = i ∘ g.
    let one = lstm_oracle(&x, &adj[1..], &w, 2);
    assert_close(
        &one,
        &m.embeddings(&d.window(1, Tau::Finite(1)).unwrap()).unwrap(),
        1e-14,
    );
}

fn gru_oracle(theta: &M, input: &M, w: &[M], u: &[M], b: &[M]) -> M {
    let gate = |k: usize, state: &M| {
        zip(
            &zip(&mm(&w[k], input), &mm(&u[k], state), |p, q| p + q),
            &b[k],
            |p, q| p + q,
        )
    };
    let z = apply(&gate(0, theta), sig);
    let r = apply(&gate(1, theta), sig);
    let c = apply(&gate(2, &zip(&r, theta, |p, q| p * q)), f64::tanh);
    zip(
        theta,
        &zip(&z, &zip(&c, theta, |p, q| p - q), |p, q| p * q),
        |p, q| p + q,
    )
}

fn egcn_oracle(m: &ModelState, d: &Dtdg, range: std::ops::Range<usize>) -> (M, Vec<M>) {
    let p = |name: &str| to_m(m.params().get(name).unwrap());
    let w: Vec<M> = ["update", "reset", "cand"]
        .iter()
        .map(|g| p(&format!("egcn.w.{g}")))
        .collect();
    let u: Vec<M> = ["update", "reset", "cand"]
        .iter()
        .map(|g| p(&format!("egcn.u.{g}")))
        .collect();
    let b: Vec<M> = ["update", "reset", "cand"]
        .iter()
        .map(|g| p(&format!("egcn.b.{g}")))
        .collect();
    let n = m.num_nodes();
    let dd = m.hyper().hidden;
    let mut h = mm(&p("embed"), &p("egcn.w_in"));
    let mut theta = p("egcn.theta0");
    let mut thetas = Vec::new();
    for k in range {
        let s = &d.snapshots()[k];
        let active: Vec<usize> = if s.active_nodes().is_empty() {
            (0..n).collect()
        } else {
            s.active_nodes().iter().copied().collect()
        };
        let mean: Vec<f64> = (0..dd)
            .map(|j| active.iter().map(|&v| h[v][j]).sum::<f64>() / active.len() as f64)
            .collect();
        let input: M = mean.iter().map(|&x| vec![x; dd]).collect();
        theta = gru_oracle(&theta, &input, &w, &u, &b);
        thetas.push(theta.clone());
        let a = to_m(&s.normalized_adjacency(n));
        h = apply(&mm(&a, &mm(&h, &theta)), |x| x.max(0.0));
    }
    (h, thetas)
}

#[test]
fn egcn_matches_hand_applied_gru_recurrence() {
    let hyper = Hyper {
        d_in: 3,
        hidden: 2,
        heads: 1,
        ..small_hyper()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut m = ModelState::new(Arch::Egcn, 4, hyper, &mut rng).unwrap();
    for g in ["update", "reset", "cand"] {
        set(
            &mut m,
            &format!("egcn.b.{g}"),
            Tensor::uniform(2, 2, 0.3, &mut rng),
        );
    }
    let snaps = vec![
        Snapshot::from_edges(0, &[(0, 1), (2, 3)], 4).unwrap(),
        Snapshot::from_edges(1, &[(1, 2)], 4).unwrap(),
        Snapshot::empty(2),
    ];
    let d = Dtdg::new("e", 4, snaps).unwrap();
    let (h, thetas) = egcn_oracle(&m, &d, 0..2);
    let w = d.window(1, Tau::Finite(2)).unwrap();
    let got = evolve_weights(&m, &w).unwrap();
    assert_eq!(got.len(), 2);
    for (o, g) in thetas.iter().zip(&got) {
        assert_close(o, g, 1e-14);
    }
    assert_close(&h, &m.embeddings(&w).unwrap(), 1e-14);

    // Empty snapshot: the summary falls back to all nodes.
    let (h, _) = egcn_oracle(&m, &d, 1..3);
    assert_close(
        &h,
        &m.embeddings(&d.window(2, Tau::Finite(2)).unwrap()).unwrap(),
        1e-14,
    );
}

#[test]
fn egcn_identity_carry_reduces_to_stacked_gcn() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let d = random_dtdg(6, 3, 0.4, &mut rng);
    let mut m = model(Arch::Egcn, 6, 9);
    // A saturated-off update gate keeps Θ at its base value.
    fill(&mut m, "egcn.w.update", 0.0);
    fill(&mut m, "egcn.u.update", 0.0);
    fill(&mut m, "egcn.b.update", -1e3);
    let w = d.window(2, Tau::Inf).unwrap();
    let theta0 = m.params().get("egcn.theta0").unwrap().clone();
    for t in evolve_weights(&m, &w).unwrap() {
        assert_eq!(t, theta0);
    }
    let theta = to_m(&theta0);
    let p = |name: &str| to_m(m.params().get(name).unwrap());
    let mut h = mm(&p("embed"), &p("egcn.w_in"));
    for s in d.snapshots() {
        h = apply(
            &mm(&to_m(&s.normalized_adjacency(6)), &mm(&h, &theta)),
            |x| x.max(0.0),
        );
    }
    assert_close(&h, &m.embeddings(&w).unwrap(), 1e-13);
}

#[test]
fn dysat_attention_rows_sum_to_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let d = random_dtdg(6, 5, 0.4, &mut rng);
    let m = model(Arch::Dysat, 6, 2);
    for tau in 1..=5 {
        let a = temporal_attention_weights(&m, &d.window(4, Tau::Finite(tau)).unwrap()).unwrap();
        assert_eq!(a.shape(), (6, tau));
        for i in 0..6 {
            assert!((a.row(i).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        if tau == 1 {
            assert!(a.data().iter().all(|&x| x == 1.0));
        }
    }
}

#[test]
fn dysat_identical_snapshots_attend_uniformly_without_positions() {
    let s = Snapshot::from_edges(0, &[(0, 1), (1, 2), (3, 4)], 5).unwrap();
    let d = Dtdg::new("twin", 5, vec![s.clone(), s]).unwrap();
    let mut m = model(Arch::Dysat, 5, 3);
    fill(&mut m, "dysat.pos", 0.0);
    let a = temporal_attention_weights(&m, &d.window(1, Tau::Inf).unwrap()).unwrap();
    for x in a.data() {
        assert!((x - 0.5).abs() < 1e-12);
    }
}

#[test]
fn dysat_rejects_windows_longer_than_position_table() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let d = random_dtdg(4, 10, 0.5, &mut rng);
    let m = model(Arch::Dysat, 4, 0);
    assert!(m.embeddings(&d.window(9, Tau::Inf).unwrap()).is_err());
    assert!(m.embeddings(&d.window(9, Tau::Finite(8)).unwrap()).is_ok());
}

#[test]
fn stgcn_short_window_depends_only_on_last_snapshot() {
    let hyper = Hyper {
        kernel: 3,
        ..small_hyper()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let a = random_dtdg(5, 3, 0.5, &mut rng);
    let b = random_dtdg(5, 3, 0.5, &mut rng);
    let m = ModelState::new(Arch::Stgcn, 5, hyper, &mut rng).unwrap();
    let mut mixed = b.snapshots().to_vec();
    mixed[2] = a.snapshots()[2].clone();
    let mixed = Dtdg::new("mixed", 5, mixed).unwrap();
    let z1 = m.embeddings(&a.window(2, Tau::Finite(1)).unwrap()).unwrap();
    let z2 = m
        .embeddings(&mixed.window(2, Tau::Finite(1)).unwrap())
        .unwrap();
    assert_eq!(z1, z2);
    // Zero padding: a one-snapshot history gives the same Z as a window of one.
    let lone = Dtdg::new("lone", 5, vec![a.snapshots()[2].clone()]).unwrap();
    assert_eq!(
        z1,
        m.embeddings(&lone.window(0, Tau::Inf).unwrap()).unwrap()
    );
}

#[test]
fn stgcn_graph_reach_is_the_kernel_width() {
    // Node features are static, so only the GCN frames read by the second
    // convolution carry graph content.
    let hyper = Hyper {
        kernel: 3,
        ..small_hyper()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(59);
    let d = random_dtdg(6, 5, 0.5, &mut rng);
    let m = ModelState::new(Arch::Stgcn, 6, hyper, &mut rng).unwrap();
    let z = |g: &Dtdg| m.embeddings(&g.window(4, Tau::Finite(5)).unwrap()).unwrap();
    let base = z(&d);
    let swap = |k: usize| {
        let mut s = d.snapshots().to_vec();
        s[k] = Snapshot::from_edges(k, &[(0, 1), (2, 3)], 6).unwrap();
        Dtdg::new("swap", 6, s).unwrap()
    };
    assert_eq!(z(&swap(1)), base);
    assert_ne!(z(&swap(2)), base);
}

#[test]
fn end_to_end_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let d = random_dtdg(6, 4, 0.4, &mut rng);
    let window = d.window(2, Tau::Finite(3)).unwrap();
    let pairs: Vec<Edge> = vec![(0, 1), (2, 3), (1, 4), (0, 5), (3, 5), (2, 4)];
    let targets = [1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
    for arch in Arch::PARAMETRIC {
        let mut m = model(arch, 6, 43);
        // Zero biases put ReLU inputs exactly on the kink; check at a generic point.
        let biases: Vec<String> = m
            .params()
            .iter()
            .filter(|(n, _)| n.contains(".b"))
            .map(|(n, _)| n.to_string())
            .collect();
        for name in biases {
            let t = m.params().get(&name).unwrap();
            let jitter = Tensor::uniform(t.rows(), t.cols(), 0.2, &mut rng);
            set(&mut m, &name, jitter);
        }
        let mut worst: f64 = 0.0;
        for id in m.params().ids() {
            let loss = |tape: &mut Tape, leaf: Var| -> std::result::Result<Var, TensorError> {
                let mut bound = m.bind(tape);
                bound.replace(id, leaf);
                let z = m.encode(tape, &bound, &window).map_err(|e| match e {
                    Error::Tensor(t) => t,
                    other => panic!("{other}"),
                })?;
                let logits = decoder::logits(tape, &bound, z, &pairs)?;
                tape.bce_with_logits(logits, &targets)
            };
            let err = finite_diff_check(loss, m.params().value(id), 1e-4).unwrap();
            worst = worst.max(err);
            assert!(err < 1e-3, "{arch} {}: {err}", m.params().name(id));
        }
        assert!(worst.is_finite());
    }
}

#[test]
fn checkpoint_round_trip_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    let d = random_dtdg(6, 4, 0.4, &mut rng);
    let w = d.window(3, Tau::Finite(2)).unwrap();
    for arch in Arch::ALL {
        let m = model(arch, 6, 53);
        let text = write_checkpoint_string(&m).unwrap();
        let back = read_checkpoint_str(&text, "mem").unwrap();
        assert_eq!(back.arch(), arch);
        assert_eq!(back.hyper(), m.hyper());
        for ((na, ta), (nb, tb)) in m.params().iter().zip(back.params().iter()) {
            assert_eq!(na, nb);
            assert_eq!(ta, tb);
        }
        let pairs = [(0, 1), (2, 5)];
        assert_eq!(
            m.score_pairs(&w, &pairs).unwrap(),
            back.score_pairs(&w, &pairs).unwrap()
        );
    }
}

#[test]
fn checkpoint_rejects_malformed_documents() {
    let m = model(Arch::Gclstm, 4, 0);
    let text = write_checkpoint_string(&m).unwrap();
    let wrong_tag = text.replace(CHECKPOINT_FORMAT, "something-else");
    assert!(matches!(
        read_checkpoint_str(&wrong_tag, "x"),
        Err(Error::Format { .. })
    ));
    let wrong_arch = text.replace("\"gclstm\"", "\"egcn\"");
    assert!(read_checkpoint_str(&wrong_arch, "x").is_err());
    assert!(read_checkpoint_str("{}", "x").is_err());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    save_checkpoint(&m, &path).unwrap();
    let back = load_checkpoint(&path).unwrap();
    assert_eq!(back.params().num_scalars(), m.params().num_scalars());
}
