use proptest::prelude::*;

use inr_core::activations::{softsign_inverse, ActivationSpec};
use inr_core::data::{build_grid, denormalize, normalize, subsample_stride2, ImageTensor};
use inr_core::metrics::{mse, psnr, psnr_from_mse, rmse, ssim, ImageShape};
use inr_core::model::{init_model, predict, Family, LayerParams, ModelConfig, Params};
use inr_core::numkit::{dft_magnitude, matmul, uniform_fill, RealMatrix, SeededRng};

fn matrix(rows: usize, cols: usize, seed: u64) -> RealMatrix {
    uniform_fill(&mut SeededRng::new(seed), rows, cols, -1.0, 1.0).unwrap()
}

fn family() -> impl Strategy<Value = Family> {
    prop::sample::select(Family::ALL.to_vec())
}

/// Reorders hidden neurons of layer `l` (0-based) by `perm`.
fn permute_hidden(params: &Params, l: usize, perm: &[usize]) -> Params {
    let mut layers = params.layers().to_vec();
    match &mut layers[l] {
        LayerParams::Real { weight, bias } => {
            let old_w = weight.clone();
            let old_b = bias.clone();
            for (new, &old) in perm.iter().enumerate() {
                for c in 0..old_w.cols() {
                    weight.set(new, c, old_w.get(old, c));
                }
                bias[new] = old_b[old];
            }
        }
        LayerParams::Complex { weight, bias } => {
            let old_w = weight.clone();
            let old_b = bias.clone();
            for (new, &old) in perm.iter().enumerate() {
                for c in 0..old_w.cols() {
                    weight.set(new, c, old_w.get(old, c));
                }
                bias[2 * new] = old_b[2 * old];
                bias[2 * new + 1] = old_b[2 * old + 1];
            }
        }
    }
    match &mut layers[l + 1] {
        LayerParams::Real { weight, .. } => {
            let old = weight.clone();
            for r in 0..old.rows() {
                for (new, &o) in perm.iter().enumerate() {
                    weight.set(r, new, old.get(r, o));
                }
            }
        }
        LayerParams::Complex { weight, .. } => {
            let old = weight.clone();
            for r in 0..old.rows() {
                for (new, &o) in perm.iter().enumerate() {
                    weight.set(r, new, old.get(r, o));
                }
            }
        }
    }
    Params::from_layers(layers).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matmul_is_associative(m in 1usize..9, k in 1usize..9, n in 1usize..9, p in 1usize..9, seed in any::<u64>()) {
        let a = matrix(m, k, seed);
        let b = matrix(k, n, seed ^ 1);
        let c = matrix(n, p, seed ^ 2);
        let left = matmul(&matmul(&a, &b).unwrap(), &c).unwrap();
        let right = matmul(&a, &matmul(&b, &c).unwrap()).unwrap();
        for (x, y) in left.data().iter().zip(right.data()) {
            prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0));
        }
    }

    #[test]
    fn uniform_fill_stays_in_bounds(lo in -10.0f64..10.0, width in 1e-6f64..5.0, seed in any::<u64>()) {
        let hi = lo + width;
        let m = uniform_fill(&mut SeededRng::new(seed), 50, 20, lo, hi).unwrap();
        prop_assert!(m.data().iter().all(|&v| v >= lo && v < hi));
    }

    #[test]
    fn parseval_with_hermitian_fold(n in 2usize..300, seed in any::<u64>()) {
        let mut rng = SeededRng::new(seed);
        let x: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let mag = dft_magnitude(&x).unwrap();
        let folded: f64 = mag
            .iter()
            .enumerate()
            .map(|(k, m)| if k == 0 || (n % 2 == 0 && k == n / 2) { m * m } else { 2.0 * m * m })
            .sum();
        let energy: f64 = x.iter().map(|v| v * v).sum::<f64>() * n as f64;
        prop_assert!((folded - energy).abs() <= 1e-6 * energy.max(1e-300));
    }

    #[test]
    fn periodic_activations_are_odd(x in -3.0f64..3.0, omega0 in 1.0f64..40.0, r in 0.5f64..3.0) {
        for spec in [ActivationSpec::sine(omega0), ActivationSpec::finer(omega0, 0.5), ActivationSpec::hsiren_first(omega0, r)] {
            prop_assert_eq!(spec.apply(-x), -spec.apply(x));
        }
    }

    #[test]
    fn softsign_series_near_zero(x in -0.3f64..0.3) {
        let s = x.signum();
        let series: f64 = (1..=12).map(|p| if p % 2 == 0 { s * x.powi(p) } else { x.powi(p) }).sum();
        prop_assert!((softsign_inverse(x).unwrap() - series).abs() < 1e-5);
    }

    #[test]
    fn sinh_gap_closed_form(x in -20.0f64..20.0) {
        let gap = (x.sinh() * x.abs().exp() - (2.0 * x).sinh()).abs();
        let want = (1.0 - (-2.0 * x.abs()).exp()) / 2.0;
        prop_assert!((gap - want).abs() <= 1e-9 * (2.0 * x).sinh().abs().max(1.0));
        prop_assert!(want <= 0.5);
    }

    #[test]
    fn normalize_round_trip(values in prop::collection::vec(-1e3f64..1e3, 1..50), lo in -2e3f64..-1e3, span in 3e3f64..5e3) {
        let hi = lo + span;
        let y = normalize(&values, lo, hi).unwrap();
        prop_assert!(y.iter().all(|v| (-1.0..=1.0).contains(v)));
        let back = denormalize(&y, lo, hi).unwrap();
        for (a, b) in values.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-12 * span);
        }
    }

    #[test]
    fn grid_axes_span_the_cube(dims in prop::collection::vec(1usize..7, 1..4)) {
        let g = build_grid(&dims).unwrap();
        let c = g.coords();
        prop_assert_eq!(c.rows(), dims.iter().product::<usize>());
        for (a, &n) in dims.iter().enumerate() {
            let col = c.column(a);
            prop_assert!(col.iter().all(|v| (-1.0..=1.0).contains(v)));
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if n == 1 {
                prop_assert_eq!((lo, hi), (0.0, 0.0));
            } else {
                prop_assert_eq!((lo, hi), (-1.0, 1.0));
            }
        }
    }

    #[test]
    fn stride2_composes_to_stride4(h in 4usize..20, w in 4usize..20, gray in any::<bool>(), seed in any::<u64>()) {
        let c = if gray { 1 } else { 3 };
        let mut rng = SeededRng::new(seed);
        let px: Vec<u8> = (0..h * w * c).map(|_| (rng.next_u64() >> 56) as u8).collect();
        let img = ImageTensor::new(h, w, c, px).unwrap();
        let twice = subsample_stride2(&subsample_stride2(&img).unwrap()).unwrap();
        prop_assert_eq!(twice.height(), h.div_ceil(4));
        prop_assert_eq!(twice.width(), w.div_ceil(4));
        for y in 0..twice.height() {
            for x in 0..twice.width() {
                for ch in 0..c {
                    prop_assert_eq!(twice.get(y, x, ch), img.get(4 * y, 4 * x, ch));
                }
            }
        }
    }

    #[test]
    fn metric_identities(values in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..100)) {
        let (a, b): (Vec<f64>, Vec<f64>) = values.into_iter().unzip();
        let m = mse(&a, &b).unwrap();
        let r = rmse(&a, &b).unwrap();
        prop_assert!((r * r - m).abs() < 1e-12);
        prop_assert_eq!(psnr(&a, &b, 2.0).unwrap(), psnr(&b, &a, 2.0).unwrap());
        if m > 0.0 {
            prop_assert!(psnr_from_mse(m, 2.0) > psnr_from_mse(m * 1.01, 2.0));
        }
    }

    #[test]
    fn ssim_identity_and_symmetry(h in 11usize..20, w in 11usize..20, seed in any::<u64>()) {
        let shape = ImageShape { height: h, width: w, channels: 3 };
        let mut rng = SeededRng::new(seed);
        let a: Vec<f64> = (0..shape.len()).map(|_| rng.uniform(0.0, 255.0)).collect();
        let b: Vec<f64> = (0..shape.len()).map(|_| rng.uniform(0.0, 255.0)).collect();
        prop_assert!((ssim(&a, &a, shape, 255.0).unwrap() - 1.0).abs() < 1e-12);
        let ab = ssim(&a, &b, shape, 255.0).unwrap();
        let ba = ssim(&b, &a, shape, 255.0).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!((-1.0..=1.0).contains(&ab));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fresh_parameters_respect_init_bounds(f in family(), width in 1usize..24, depth in 1usize..4, seed in any::<u64>()) {
        let config = ModelConfig::new(f, 2, 3, width, depth);
        let params = init_model(&config, &mut SeededRng::new(seed)).unwrap();
        for (i, layer) in params.layers().iter().enumerate() {
            let b = config.layer_bounds(i + 1).unwrap();
            prop_assert!(b.weight_hi > 0.0 && b.weight_lo == -b.weight_hi);
            prop_assert!(b.bias_hi > 0.0 && b.bias_lo == -b.bias_hi);
            let [w, bias] = layer.slices();
            prop_assert!(w.iter().all(|&v| v >= b.weight_lo && v < b.weight_hi));
            prop_assert!(bias.iter().all(|&v| v >= b.bias_lo && v < b.bias_hi));
        }
    }

    #[test]
    fn hidden_neuron_order_does_not_matter(f in family(), seed in any::<u64>(), shift in 1usize..6) {
        let config = ModelConfig::new(f, 2, 2, 6, 3);
        let params = init_model(&config, &mut SeededRng::new(seed)).unwrap();
        let coords = matrix(20, 2, seed ^ 7);
        let perm: Vec<usize> = (0..6).map(|i| (i + shift) % 6).rev().collect();
        let base = predict(&params, &config, &coords).unwrap();
        for l in 0..config.hidden_depth {
            let permuted = permute_hidden(&params, l, &perm);
            let out = predict(&permuted, &config, &coords).unwrap();
            for (x, y) in base.data().iter().zip(out.data()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn same_seed_same_parameters(f in family(), seed in any::<u64>()) {
        let config = ModelConfig::new(f, 1, 1, 8, 2);
        let a = init_model(&config, &mut SeededRng::new(seed)).unwrap();
        let b = init_model(&config, &mut SeededRng::new(seed)).unwrap();
        prop_assert_eq!(a.flatten(), b.flatten());
    }
}
