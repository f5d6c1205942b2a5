use cyclerisk_core::diff::{finite_diff_check, Bindings, Tape, DEFAULT_FD_STEP};
use cyclerisk_core::net::{Layer, Mlp, MlpParams};
use cyclerisk_core::rng;
use cyclerisk_core::Matrix;
use proptest::prelude::*;
use rand::Rng;

fn random_points(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut r = rng::seeded(seed);
    Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| r.gen_range(-1.0..1.0)).collect())
}

fn with_random_biases(net: &Mlp, seed: u64) -> Mlp {
    let mut r = rng::seeded(seed);
    let layers = net
        .layers()
        .iter()
        .map(|l| {
            let b = Matrix::from_vec(
                1,
                l.output_dim(),
                (0..l.output_dim()).map(|_| r.gen_range(-0.3..0.3)).collect(),
            );
            Layer::new(l.weight.clone(), b)
        })
        .collect();
    Mlp::from_layers(layers, net.norm_budget()).unwrap()
}

#[test]
fn two_layer_gradients_match_finite_differences() {
    let net = with_random_biases(&Mlp::new(&[3, 6, 2], 20.0, 4).unwrap(), 5);
    let mut tape = Tape::new();
    let x = tape.input("x");
    let params = MlpParams::declare(&mut tape, "n", &net);
    let out = params.apply(&mut tape, x.node);
    let sq = tape.mul(out, out);
    tape.mean(sq);
    let mut b = Bindings::new(&tape);
    b.bind(x.slot, random_points(7, 3, 6));
    params.bind(&mut b, &net);
    let r = finite_diff_check(&mut tape, &b, DEFAULT_FD_STEP).unwrap();
    assert!(r.max_rel_error <= 1e-5, "{r:?}");
    assert!(r.checked > 0);
}

#[test]
fn repeated_subexpression_scales_gradient() {
    let net = Mlp::new(&[2, 4, 1], 5.0, 1).unwrap();
    let points = random_points(5, 2, 2);
    let grad_of = |copies: usize| {
        let mut tape = Tape::new();
        let x = tape.input("x");
        let params = MlpParams::declare(&mut tape, "n", &net);
        let mut acc = None;
        for _ in 0..copies {
            let out = params.apply(&mut tape, x.node);
            let m = tape.mean(out);
            acc = Some(match acc {
                None => m,
                Some(a) => tape.add(a, m),
            });
        }
        let mut b = Bindings::new(&tape);
        b.bind(x.slot, points.clone());
        params.bind(&mut b, &net);
        tape.forward(&b).unwrap();
        let g = tape.backward().unwrap();
        params.gradients(&g).into_iter().cloned().collect::<Vec<_>>()
    };
    let one = grad_of(1);
    let three = grad_of(3);
    for (a, b) in one.iter().zip(&three) {
        for (p, q) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((3.0 * p - q).abs() <= 1e-12 * (1.0 + q.abs()));
        }
    }
}

#[test]
fn forward_backward_is_bit_identical() {
    let net = Mlp::new(&[2, 5, 5, 1], 3.0, 8).unwrap();
    let points = random_points(9, 2, 3);
    let run = || {
        let mut tape = Tape::new();
        let x = tape.input("x");
        let params = MlpParams::declare(&mut tape, "n", &net);
        let out = params.apply(&mut tape, x.node);
        tape.sum(out);
        let mut b = Bindings::new(&tape);
        b.bind(x.slot, points.clone());
        params.bind(&mut b, &net);
        let v = tape.forward(&b).unwrap().item().unwrap();
        let g = tape.backward().unwrap();
        (
            v.to_bits(),
            params.gradients(&g).into_iter().cloned().collect::<Vec<_>>(),
        )
    };
    assert_eq!(run(), run());
}

#[test]
fn lipschitz_bound_dominates_empirical_ratio() {
    let net = with_random_biases(&Mlp::new(&[3, 8, 8, 2], 4.0, 12).unwrap(), 13);
    let bound = net.lipschitz_upper_bound();
    let mut r = rng::seeded(14);
    for _ in 0..10_000 {
        let a: Vec<f64> = (0..3).map(|_| r.gen_range(-2.0..2.0)).collect();
        let b: Vec<f64> = (0..3).map(|_| r.gen_range(-2.0..2.0)).collect();
        let dx = a.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        let fa = net.eval(&a);
        let fb = net.eval(&b);
        let dy = fa.iter().zip(&fb).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(dy <= bound * dx * (1.0 + 1e-12) + 1e-15);
    }
}

#[test]
fn stacking_width_matches_coordinate_count() {
    // d copies of width-(2d+3) nets stack to width 2d^2 + 3d.
    for d in 1..=4usize {
        let nets: Vec<Mlp> = (0..d)
            .map(|s| Mlp::new(&[d, 2 * d + 3, 2 * d + 3, 1], 2.0, s as u64).unwrap())
            .collect();
        let stacked = Mlp::stack_parallel(&nets).unwrap();
        assert_eq!(stacked.width(), 2 * d * d + 3 * d);
        let probes = random_points(100, d, 40 + d as u64);
        let out = stacked.forward(&probes).unwrap();
        for (i, net) in nets.iter().enumerate() {
            let single = net.forward(&probes).unwrap();
            for p in 0..100 {
                assert!((out[(p, i)] - single[(p, 0)]).abs() <= 1e-12);
            }
        }
    }
}

fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    (1usize..4, 1usize..7, 1usize..4, 1usize..4).prop_map(|(d, w, depth, out)| {
        let mut v = vec![d];
        v.extend(std::iter::repeat_n(w, depth));
        v.push(out);
        v
    })
}

proptest! {
    #[test]
    fn constructors_respect_budget(dims in dims_strategy(), budget in 0.05f64..20.0, seed in 0u64..500) {
        let net = Mlp::new(&dims, budget, seed).unwrap();
        prop_assert!(net.path_norm() <= budget);
        prop_assert_eq!(net.norm_budget(), budget);
    }

    #[test]
    fn projection_is_idempotent_and_feasible(dims in dims_strategy(), seed in 0u64..500, scale in 1.0f64..50.0, budget in 0.1f64..5.0) {
        let mut net = with_random_biases(&Mlp::new(&dims, 100.0, seed).unwrap(), seed + 1);
        for l in net.layers_mut() {
            l.weight.scale_in_place(scale);
        }
        let p = net.project_to_budget(budget);
        prop_assert!(p.path_norm() <= budget);
        prop_assert_eq!(p.project_to_budget(budget), p.clone());
    }

    #[test]
    fn zero_bias_projection_is_a_scalar_multiple(dims in dims_strategy(), seed in 0u64..500, budget in 0.01f64..1.0) {
        let mut net = Mlp::new(&dims, 100.0, seed).unwrap();
        for l in net.layers_mut() {
            l.weight.scale_in_place(3.0);
        }
        let p = net.project_to_budget(budget);
        let factor: f64 = net
            .layers()
            .iter()
            .zip(p.layers())
            .map(|(a, b)| {
                let (na, nb) = (a.augmented_norm(), b.augmented_norm());
                if na == 0.0 { 1.0 } else { nb / na }
            })
            .product();
        let x = random_points(10, dims[0], seed);
        let before = net.forward(&x).unwrap();
        let after = p.forward(&x).unwrap();
        for (a, b) in before.as_slice().iter().zip(after.as_slice()) {
            prop_assert!((a * factor - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn path_norm_homogeneous(dims in dims_strategy(), seed in 0u64..500, c in 0.01f64..100.0) {
        let net = with_random_biases(&Mlp::new(&dims, 5.0, seed).unwrap(), seed);
        let mut scaled = net.clone();
        let last = scaled.layers().len() - 1;
        scaled.layers_mut()[last].weight.scale_in_place(c);
        scaled.layers_mut()[last].bias.scale_in_place(c);
        let (p, q) = (net.path_norm(), scaled.path_norm());
        prop_assert!((q - c * p).abs() <= 1e-12 * c * p.max(1e-300));
    }

    #[test]
    fn serialization_round_trips(dims in dims_strategy(), seed in 0u64..500) {
        let net = with_random_biases(&Mlp::new(&dims, 2.5, seed).unwrap(), seed);
        let back = Mlp::from_bytes(&net.to_bytes()).unwrap();
        prop_assert_eq!(back.path_norm().to_bits(), net.path_norm().to_bits());
        prop_assert_eq!(back, net);
    }
}
