use super::*;
use crate::absorption::Topology;
use crate::channel::q_function;
use crate::fixtures;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const TANNER_V: [f64; 22] = [
    0.2369, 0.2369, 0.2273, 0.2031, 0.2031, 0.2651, 0.2254, 0.2254, 0.1660, 0.1261, 0.1483, 0.1483, 0.1261,
    0.2031, 0.2651, 0.2031, 0.2369, 0.2369, 0.2273, 0.2201, 0.2201, 0.2544,
];

fn tanner_set() -> AnalyzedSet {
    AnalyzedSet::new(&Topology::from_file(&fixtures::tanner_8_2()).unwrap()).unwrap()
}

fn ieee_set() -> AnalyzedSet {
    AnalyzedSet::new(&Topology::from_file(&fixtures::ieee_8_8()).unwrap()).unwrap()
}

#[test]
fn tanner_eigenpair() {
    let s = tanner_set();
    assert!((s.eigen.mu_max - 1.7870).abs() < 1e-3, "{}", s.eigen.mu_max);
    for (got, want) in s.eigen.v_max.iter().zip(TANNER_V) {
        assert!((got - want).abs() < 1e-3, "{got} vs {want}");
    }
    assert!(s.eigen.residual < 1e-9);
    let norm: f64 = s.eigen.v_max.iter().map(|x| x * x).sum();
    assert!((norm - 1.0).abs() < 1e-12);
}

#[test]
fn ieee_eigenpair_is_uniform() {
    let s = ieee_set();
    assert!((s.eigen.mu_max - 4.0).abs() < 1e-12);
    let u = 1.0 / 40f64.sqrt();
    assert!(s.eigen.v_max.iter().all(|x| (x - u).abs() < 1e-12));
}

#[test]
fn four_cycle_pseudo_set() {
    let topo = Topology::from_pairs(vec![0, 1], &[[0, 1], [0, 1]], vec![0, 0]).unwrap();
    let s = AnalyzedSet::new(&topo).unwrap();
    assert_eq!(s.model.dim, 4);
    assert!((s.eigen.mu_max - 1.0).abs() < 1e-12);
    // VC is a permutation matrix
    let mut vc = vec![vec![0.0; 4]; 4];
    for j in 0..4 {
        let mut e = vec![0.0; 4];
        e[j] = 1.0;
        let mut out = vec![0.0; 4];
        s.model.apply_vc(&e, &mut out);
        for i in 0..4 {
            vc[i][j] = out[i];
        }
    }
    for row in &vc {
        assert_eq!(row.iter().sum::<f64>(), 1.0);
    }
}

#[test]
fn identity_keeps_the_start_vector() {
    let e = power_iteration(5, |x, y| y.copy_from_slice(x), 10).unwrap();
    assert!((e.mu_max - 1.0).abs() < 1e-15);
    let u = 1.0 / 5f64.sqrt();
    assert!(e.v_max.iter().all(|x| (x - u).abs() < 1e-15));
}

#[test]
fn nilpotent_and_oscillating_models_error() {
    assert_eq!(
        power_iteration(3, |_, y| y.fill(0.0), 10).unwrap_err(),
        DynamicsError::Nilpotent
    );
    // rotation by 90 degrees has no real dominant eigenvector
    let rot = |x: &[f64], y: &mut [f64]| {
        y[0] = -x[1];
        y[1] = x[0];
    };
    assert!(matches!(power_iteration(2, rot, 50), Err(DynamicsError::NoConvergence { .. })));
}

#[test]
fn v_and_c_structure() {
    let s = tanner_set();
    let v = s.model.v_matrix();
    let sizes = [3, 3, 3, 2, 2, 3, 3, 3];
    let mut start = 0;
    for &k in &sizes {
        for i in start..start + k {
            for j in 0..22 {
                let inside = (start..start + k).contains(&j);
                assert_eq!(v[i][j], u8::from(inside && i != j));
            }
        }
        start += k;
    }
    let c = s.model.c_matrix();
    for i in 0..22 {
        assert_eq!(c[i].iter().map(|&x| x as usize).sum::<usize>(), 1);
        assert_eq!((0..22).map(|r| c[r][i] as usize).sum::<usize>(), 1);
        // C is symmetric, so C·Cᵀ = C² = I
        let j = c[i].iter().position(|&x| x == 1).unwrap();
        assert_eq!(c[j][i], 1);
    }
    let mask: Vec<usize> = s.model.ext_mask().iter().enumerate().filter(|(_, &m)| m).map(|(e, _)| e).collect();
    assert_eq!(mask, [9, 10, 11, 12]);
}

#[test]
fn coefficient_groupings() {
    let s = tanner_set();
    let v = &s.eigen.v_max;
    let c = s.coefficients;
    assert!((c.a - v.iter().sum::<f64>()).abs() < 1e-12);
    assert!((c.b - (v[9] + v[10] + v[11] + v[12])).abs() < 1e-12);
    let d = (v[9] + v[10]).powi(2) + (v[11] + v[12]).powi(2);
    assert!((c.d - d).abs() < 1e-12);
    let ieee = ieee_set().coefficients;
    assert!((ieee.a - ieee.b).abs() < 1e-12);
    assert!((ieee.c - ieee.d).abs() < 1e-12);
    // uniform v: C = a·(d_v·v)²
    assert!((ieee.c - 8.0 * (5.0 / 40f64.sqrt()).powi(2)).abs() < 1e-12);
}

fn inputs(m: f64, m_ext: Vec<f64>, tau: f64) -> ErrorFloorInputs {
    ErrorFloorInputs::unit_gain(m, m_ext, tau).unwrap()
}

#[test]
fn zero_iterations_reduce_to_channel_term() {
    let s = tanner_set();
    let c = s.coefficients;
    let inp = inputs(2.0, vec![], 10.0);
    let expected = q_function(c.a * 2.0 / (2.0 * c.c * 2.0f64).sqrt());
    assert!((s.p_basic(&inp) - expected).abs() < 1e-15);
    assert_eq!(s.p_basic(&inp), s.p_refined(&inp));
    // x_0 = λ: every component is a single channel value
    let det = p_as_matrix(&s.model, &inp);
    assert!((det.probability - q_function(2.0 / 4f64.sqrt())).abs() < 1e-15);
    assert_eq!(det.component, 0);
}

/// Straight evaluation of the nested sums with explicit products.
fn nested_oracle(a: f64, b: f64, c: f64, d: f64, mu: f64, m: f64, m_ext: &[f64], g: &[f64]) -> f64 {
    let big_i = m_ext.len();
    let mut s0 = 0.0;
    for i in 0..=big_i {
        let mut p = 1.0;
        for l in 0..=i {
            p /= g[l];
        }
        s0 += p / mu.powi(i as i32);
    }
    let (mut e1, mut e2) = (0.0, 0.0);
    for i in 1..=big_i {
        let mut p = 1.0;
        for l in 1..=i {
            p /= g[l];
        }
        e1 += m_ext[i - 1] / mu.powi(i as i32) * p;
        e2 += m_ext[i - 1] / mu.powi(2 * i as i32) * p * p;
    }
    let num = a * m * s0 + b * e1;
    let den = (2.0 * c * m * s0 * s0 + 2.0 * d * e2).sqrt();
    0.5 * libm::erfc(num / den / std::f64::consts::SQRT_2)
}

#[test]
fn basic_matches_nested_oracle() {
    let coef = Coefficients { a: 8.0, b: 8.0, c: 8.0, d: 8.0 };
    let inp = inputs(4.0, vec![0.0; 10], 10.0);
    let got = p_as_basic(&coef, 4.0, &inp);
    let want = nested_oracle(8.0, 8.0, 8.0, 8.0, 4.0, 4.0, &[0.0; 10], &[1.0; 11]);
    assert!((got - want).abs() <= 1e-14 * want);
    let m_ext: Vec<f64> = (1..=10).map(|i| 0.3 * i as f64).collect();
    let g: Vec<f64> = (0..=10).map(|l| if l == 0 { 1.0 } else { 1.0 - 0.5 / (l as f64 + 1.0) }).collect();
    let inp = ErrorFloorInputs::new(1.5, m_ext.clone(), g.clone(), 10.0).unwrap();
    let got = p_as_refined(&coef, 1.787, &inp);
    let want = nested_oracle(8.0, 8.0, 8.0, 8.0, 1.787, 1.5, &m_ext, &g);
    assert!((got - want).abs() <= 1e-13 * want, "{got} {want}");
}

#[test]
fn unit_gain_refined_equals_basic() {
    let s = tanner_set();
    let inp = inputs(3.0, (1..=20).map(|i| 0.5 * i as f64).collect(), 10.0);
    assert_eq!(s.p_basic(&inp), s.p_refined(&inp));
}

#[test]
fn tanner_matrix_component_is_edge_6_or_15() {
    let s = tanner_set();
    let inp = inputs(2.0, vec![1.0; 50], 10.0);
    let det = p_as_matrix(&s.model, &inp);
    assert!(det.component == 5 || det.component == 14, "{}", det.component);
}

#[test]
fn ieee_matrix_approaches_refined_with_iterations() {
    let s = ieee_set();
    let mut last = f64::INFINITY;
    for big_i in [5, 10, 15, 20, 25] {
        let inp = inputs(2.0, vec![1.5; big_i], 10.0);
        let (pm, pr) = (s.p_matrix(&inp), s.p_refined(&inp));
        let rel = (pm - pr).abs() / pr;
        assert!(rel < last, "I = {big_i}: {rel}");
        last = rel;
    }
    assert!(last < 1e-9);
}

/// Samples `x_I` by running the recursion on random Gaussian inputs.
fn sample_recursion(model: &SetLinearModel, inp: &ErrorFloorInputs, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let normal = |m: f64, rng: &mut ChaCha8Rng| {
        if m == 0.0 {
            0.0
        } else {
            Normal::new(m, (2.0 * m).sqrt()).unwrap().sample(rng)
        }
    };
    let lam: Vec<f64> = (0..model.a()).map(|_| normal(inp.m_lambda, rng)).collect();
    let mut x: Vec<f64> = model.edge_var.iter().map(|&u| lam[u]).collect();
    let mut y = vec![0.0; model.dim];
    for t in 1..=inp.iters() {
        model.apply_vc(&x, &mut y);
        let ext: Vec<f64> = model
            .external
            .iter()
            .map(|&k| (0..k).map(|_| normal(inp.m_ext[t - 1], rng)).sum())
            .collect();
        for e in 0..model.dim {
            let u = model.edge_var[e];
            x[e] = inp.g[t] * y[e] + lam[u] + ext[u];
        }
    }
    x
}

#[test]
fn matrix_component_law_matches_simulation() {
    for s in [tanner_set(), ieee_set()] {
        let g: Vec<f64> = (0..=6).map(|l| if l == 0 { 1.0 } else { 0.7 + 0.05 * l as f64 }).collect();
        let inp = ErrorFloorInputs::new(0.6, vec![0.2, 0.4, 0.6, 0.8, 1.0, 1.2], g, 10.0).unwrap();
        let det = p_as_matrix(&s.model, &inp);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let trials = 200_000;
        let mut hits = 0usize;
        let mut sum = 0.0;
        for _ in 0..trials {
            let x = sample_recursion(&s.model, &inp, &mut rng);
            sum += x[det.component];
            hits += usize::from(x[det.component] <= 0.0);
        }
        let p = hits as f64 / trials as f64;
        let se = (det.probability * (1.0 - det.probability) / trials as f64).sqrt();
        assert!((p - det.probability).abs() < 4.0 * se, "{p} vs {}", det.probability);
        let mean = sum / trials as f64;
        assert!((mean - det.mean).abs() < 5.0 * det.std_dev / (trials as f64).sqrt());
    }
}

#[test]
fn clipping_lowers_every_variant() {
    let sets = [tanner_set(), ieee_set()];
    for s in &sets {
        for m in [1.0, 2.0, 4.0] {
            let raw: Vec<f64> = (1..=10).map(|i| 2.0 * 1.8f64.powi(i)).collect();
            let probs: Vec<[f64; 3]> = [10.0, 100.0, 1000.0]
                .iter()
                .map(|&tau| {
                    let inp = inputs(m, raw.clone(), tau);
                    [s.p_basic(&inp), s.p_refined(&inp), s.p_matrix(&inp)]
                })
                .collect();
            for f in 0..3 {
                assert!(probs[1][f] < probs[0][f] && probs[2][f] < probs[1][f], "{probs:?}");
            }
        }
    }
}

#[test]
fn ber_aggregation() {
    assert_eq!(ber_estimate(&[(1, 8, 1e-3)], 155), 8.0 * 1e-3 / 155.0);
    let tanner = ber_estimate(&[(465, 8, 1e-6)], 155);
    assert!((tanner - 465.0 * 8.0 / 155.0 * 1e-6).abs() < 1e-18);
    let two = ber_estimate(&[(10, 8, 1e-4), (10, 8, 1e-6)], 155);
    let dominant = ber_estimate(&[(10, 8, 1e-4)], 155);
    assert!((two - dominant) / dominant < 0.01);
    assert_eq!(ber_estimate(&[(1000, 8, 1.0)], 10), 1.0);
}

#[test]
fn inputs_validation() {
    assert!(matches!(
        ErrorFloorInputs::new(1.0, vec![1.0; 3], vec![1.0; 3], 10.0),
        Err(InputsError::GainLength { expected: 4, got: 3 })
    ));
    assert!(matches!(
        ErrorFloorInputs::new(1.0, vec![1.0], vec![0.5, 1.0], 10.0),
        Err(InputsError::FirstGain(_))
    ));
    assert!(matches!(
        ErrorFloorInputs::new(1.0, vec![1.0], vec![1.0, 0.0], 10.0),
        Err(InputsError::GainRange { index: 1, .. })
    ));
    let clipped = ErrorFloorInputs::unit_gain(50.0, vec![5.0, 50.0], 10.0).unwrap();
    assert_eq!(clipped.m_lambda, 10.0);
    assert_eq!(clipped.m_ext, vec![5.0, 10.0]);
}

#[test]
fn channel_mean_is_not_monotone_against_strong_extrinsics() {
    // Independent inputs with variance twice the mean: when the extrinsic
    // part dominates, raising m_λ adds more variance than margin.
    let s = ieee_set();
    let lo = inputs(0.2, vec![4.0], 100.0);
    let hi = inputs(0.21, vec![4.0], 100.0);
    assert!(s.p_basic(&hi) > s.p_basic(&lo));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Nonincreasing in m_λ holds while the extrinsic means stay below it.
    #[test]
    fn monotone_in_channel_mean(
        m in 0.2f64..8.0,
        frac in proptest::collection::vec(0.0f64..1.0, 0..15),
        bump in 0.01f64..1.0,
        tanner in any::<bool>(),
    ) {
        let s = if tanner { tanner_set() } else { ieee_set() };
        let ext: Vec<f64> = frac.iter().map(|f| f * m).collect();
        let inp = inputs(m, ext.clone(), 100.0);
        let more = inputs(m + bump, ext, 100.0);
        for f in Formula::ALL {
            prop_assert!(f.eval(&s, &more) <= f.eval(&s, &inp) * (1.0 + 1e-12), "{:?}", f);
        }
    }


    #[test]
    fn monotone_in_extrinsics_and_mu(
        m in 0.2f64..8.0,
        base in proptest::collection::vec(0.0f64..8.0, 1..15),
        bump in 0.01f64..1.0,
        which in 0usize..15,
        tanner in any::<bool>(),
    ) {
        let s = if tanner { tanner_set() } else { ieee_set() };
        let inp = inputs(m, base.clone(), 100.0);
        let mut ext = base.clone();
        let k = which % ext.len();
        ext[k] += bump;
        let more_ext = inputs(m, ext, 100.0);
        for f in Formula::ALL {
            let p = f.eval(&s, &inp);
            prop_assert!(f.eval(&s, &more_ext) <= p * (1.0 + 1e-12), "{:?} ext", f);
        }
        let c = s.coefficients;
        let mu = s.eigen.mu_max;
        prop_assert!(p_as_basic(&c, mu * 1.05, &inp) >= p_as_basic(&c, mu, &inp) * (1.0 - 1e-12));
        prop_assert!(p_as_refined(&c, mu * 1.05, &inp) >= p_as_refined(&c, mu, &inp) * (1.0 - 1e-12));
    }
}
