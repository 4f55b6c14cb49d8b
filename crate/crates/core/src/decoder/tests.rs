use super::*;
use crate::code::{build_qc_matrix, tanner_155_shifts};
use proptest::prelude::*;

fn tanh_rule(x: &[f64], clip: f64) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    check_update_tanh(x, clip, &mut out);
    out
}

fn cms_rule(x: &[f64], clip: f64) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    check_update_cms(x, clip, &mut out);
    out
}

#[test]
fn tanh_three_ones() {
    let expected = 2.0 * (0.5f64.tanh() * 0.5f64.tanh()).atanh();
    for y in tanh_rule(&[1.0, 1.0, 1.0], 10.0) {
        assert!((y - expected).abs() < 1e-15);
    }
    assert!((expected - 0.43378).abs() < 1e-5);
}

#[test]
fn tanh_zero_annihilates_others() {
    let out = tanh_rule(&[0.0, 3.0, -2.0, 5.0], 10.0);
    assert_eq!(&out[1..], &[0.0, 0.0, 0.0]);
    let t = (1.5f64.tanh() * (-1.0f64).tanh() * 2.5f64.tanh()).atanh() * 2.0;
    assert!((out[0] - t).abs() < 1e-14);
}

#[test]
fn tanh_saturates_at_clip() {
    let out = tanh_rule(&[f64::INFINITY; 6], 10.0);
    assert!(out.iter().all(|&y| y == 10.0));
    // without a binding clip the product clamp bounds the output
    let out = tanh_rule(&[f64::INFINITY; 6], 1e6);
    let cap = 2.0 * PRODUCT_CLAMP.atanh();
    assert!(out.iter().all(|&y| (y - cap).abs() < 1e-12));
}

#[test]
fn cms_large_inputs_get_correction() {
    let out = cms_rule(&[10.0; 32], 100.0);
    let expected = 10.0 - 31f64.ln() / 4.0;
    assert!(out.iter().all(|&y| (y - expected).abs() < 1e-12));
    assert!((expected - 9.1415).abs() < 1e-4);
}

#[test]
fn cms_below_threshold_no_correction() {
    let mut x = vec![10.0; 32];
    x[3] = 1.0;
    let out = cms_rule(&x, 100.0);
    for (j, &y) in out.iter().enumerate() {
        if j == 3 {
            assert!((y - (10.0 - 31f64.ln() / 4.0)).abs() < 1e-12);
        } else {
            assert_eq!(y, 1.0);
        }
    }
}

#[test]
fn cms_sign_parity() {
    let out = cms_rule(&[2.0, -3.0, 4.0, 5.0], 10.0);
    assert!(out[1] > 0.0);
    assert!(out[0] < 0.0 && out[2] < 0.0 && out[3] < 0.0);
}

#[test]
fn cms_zero_counts_as_positive() {
    let out = cms_rule(&[0.0, -3.0, 4.0], 10.0);
    assert_eq!(out[0], -(3.0 - 2f64.ln() / 4.0));
    assert_eq!(out[1], 0.0);
    assert!(out[1].is_sign_positive());
}

#[test]
fn variable_rule_examples() {
    let mut out = [0.0; 3];
    assert_eq!(variable_update(1.5, &[0.0; 3], 10.0, &mut out), 1.5);
    assert_eq!(out, [1.5; 3]);
    let acc = variable_update(1.0, &[2.0, 3.0, 4.0], 10.0, &mut out);
    assert_eq!(out, [8.0, 7.0, 6.0]);
    assert_eq!(acc, 10.0);
    let acc = variable_update(1.0, &[9.0, 9.0, 9.0], 10.0, &mut out);
    assert_eq!(out, [10.0; 3]);
    assert_eq!(acc, 10.0);
}

#[test]
fn quantizer_examples() {
    for b in [2, 4, 6, 10] {
        assert_eq!(quantize(0.0, b, 10.0), 0.0);
        assert_eq!(quantize(10.0, b, 10.0), 10.0);
        assert_eq!(quantize(-10.0, b, 10.0), -10.0);
        assert_eq!(quantize(50.0, b, 10.0), 10.0);
    }
    let delta = 10.0 / 31.0;
    assert!((quantize(5.0, 6, 10.0) - 16.0 * delta).abs() < 1e-12);
    // half steps round away from zero
    assert_eq!(quantize(0.5 * delta, 6, 10.0), delta);
    assert_eq!(quantize(-0.5 * delta, 6, 10.0), -delta);
}

#[test]
fn config_validation() {
    assert!(DecoderConfig::new(Algorithm::Sp, 0, 10.0).validate().is_err());
    assert!(DecoderConfig::new(Algorithm::Sp, 5, 0.0).validate().is_err());
    assert!(DecoderConfig::new(Algorithm::Sp, 5, f64::NAN).validate().is_err());
    assert!(DecoderConfig::new(Algorithm::Cms, 5, 10.0).with_bits(1).validate().is_err());
    assert!(DecoderConfig::new(Algorithm::Cms, 5, 10.0).with_bits(6).validate().is_ok());
}

#[test]
fn config_json_round_trip() {
    let c = DecoderConfig::new(Algorithm::Cms, 50, 10.0).with_bits(6);
    let s = serde_json::to_string(&c).unwrap();
    assert_eq!(serde_json::from_str::<DecoderConfig>(&s).unwrap(), c);
    let short: DecoderConfig =
        serde_json::from_str(r#"{"algorithm":"sp","max_iters":10,"clip":100.0}"#).unwrap();
    assert_eq!(short, DecoderConfig::new(Algorithm::Sp, 10, 100.0));
}

fn tanner() -> SparseParityCheck {
    build_qc_matrix(&tanner_155_shifts(), 31).unwrap()
}

#[test]
fn clean_channel_converges_in_one_iteration() {
    let h = tanner();
    for algo in [Algorithm::Sp, Algorithm::Cms] {
        for q in [Quantization::Float, Quantization::Fixed { bits: 6 }] {
            let mut cfg = DecoderConfig::new(algo, 20, 10.0);
            cfg.quantization = q;
            let out = decode(&h, &vec![4.0; 155], &cfg).unwrap();
            assert!(out.converged);
            assert_eq!(out.iterations, 1);
            assert_eq!(out.bit_errors(), 0);
        }
    }
}

#[test]
fn length_and_trace_errors() {
    let h = tanner();
    let cfg = DecoderConfig::new(Algorithm::Sp, 5, 10.0);
    assert!(matches!(
        decode(&h, &[1.0; 10], &cfg),
        Err(DecoderError::LengthMismatch { expected: 155, got: 10 })
    ));
    let g = TannerGraph::new(&h);
    let mut dec = Decoder::new(&g, cfg).unwrap();
    assert!(matches!(
        dec.decode_traced(&[1.0; 155], &[155]),
        Err(DecoderError::BadTraceVariable(155))
    ));
}

#[test]
fn trace_has_one_row_per_iteration() {
    let h = tanner();
    let g = TannerGraph::new(&h);
    let mut cfg = DecoderConfig::new(Algorithm::Sp, 7, 10.0);
    cfg.early_stop = false;
    let mut dec = Decoder::new(&g, cfg).unwrap();
    let out = dec.decode_traced(&vec![2.0; 155], &[0, 5, 9]).unwrap();
    let trace = out.trace.unwrap();
    assert_eq!(trace.rows.len(), 7);
    assert_eq!(trace.triples().count(), 21);
    assert!(trace.rows.iter().flatten().all(|&x| x > 0.0 && x <= 10.0));
}

/// Bitwise MAP LLRs by brute force over all codewords.
fn map_llrs(h: &SparseParityCheck, llr: &[f64]) -> Vec<f64> {
    let n = h.n_cols();
    let mut p0 = vec![0.0; n];
    let mut p1 = vec![0.0; n];
    for w in 0u32..(1 << n) {
        let word: Vec<u8> = (0..n).map(|i| (w >> i & 1) as u8).collect();
        if !h.is_codeword(&word).unwrap() {
            continue;
        }
        let energy: f64 = word.iter().zip(llr).map(|(&b, &l)| if b == 1 { -l } else { 0.0 }).sum();
        let p = energy.exp();
        for i in 0..n {
            if word[i] == 1 {
                p1[i] += p;
            } else {
                p0[i] += p;
            }
        }
    }
    p0.iter().zip(&p1).map(|(a, b)| (a / b).ln()).collect()
}

#[test]
fn sum_product_is_exact_on_a_tree() {
    // checks {0,1,2}, {2,3,4}, {4,5,6}, {1,7}, {5,8,9}: a tree on 10 variables
    let h = SparseParityCheck::from_rows(
        10,
        vec![vec![0, 1, 2], vec![2, 3, 4], vec![4, 5, 6], vec![1, 7], vec![5, 8, 9]],
    )
    .unwrap();
    assert_eq!(crate::code::girth(&h), None);
    let llr = [0.8, -0.3, 1.1, -0.9, 0.2, 0.5, -1.4, 0.6, 0.1, -0.25];
    let exact = map_llrs(&h, &llr);
    let g = TannerGraph::new(&h);
    let mut cfg = DecoderConfig::new(Algorithm::Sp, 10, 1e3);
    cfg.early_stop = false;
    let mut dec = Decoder::new(&g, cfg).unwrap();
    let mut last = Vec::new();
    let out = dec
        .decode_observed(&llr, &[], |s| last = s.accumulated.to_vec())
        .unwrap();
    for v in 0..10 {
        assert!((last[v] - exact[v]).abs() < 1e-9, "var {v}: {} vs {}", last[v], exact[v]);
        assert_eq!(out.decoded[v], u8::from(exact[v] < 0.0));
    }
}

#[test]
fn messages_never_exceed_clip() {
    let h = tanner();
    let g = TannerGraph::new(&h);
    let llr: Vec<f64> = (0..155).map(|i| ((i * 37 % 23) as f64 - 9.0) * 1.7).collect();
    for algo in [Algorithm::Sp, Algorithm::Cms] {
        let mut cfg = DecoderConfig::new(algo, 30, 3.0);
        cfg.early_stop = false;
        let mut dec = Decoder::new(&g, cfg).unwrap();
        dec.decode_observed(&llr, &[], |s| {
            assert!(s.c2v.iter().chain(s.v2c).chain(s.accumulated).all(|x| x.abs() <= 3.0));
        })
        .unwrap();
    }
}

#[test]
fn wide_fixed_point_matches_float() {
    let h = tanner();
    let g = TannerGraph::new(&h);
    let llr: Vec<f64> = (0..155).map(|i| ((i * 53 % 29) as f64 - 8.0) * 0.45).collect();
    for algo in [Algorithm::Sp, Algorithm::Cms] {
        let float = Decoder::new(&g, DecoderConfig::new(algo, 30, 10.0)).unwrap().decode(&llr).unwrap();
        let fixed = Decoder::new(&g, DecoderConfig::new(algo, 30, 10.0).with_bits(40))
            .unwrap()
            .decode(&llr)
            .unwrap();
        assert_eq!(float.decoded, fixed.decoded);
        assert_eq!(float.iterations, fixed.iterations);
    }
}

fn final_accumulated(g: &TannerGraph, cfg: DecoderConfig, llr: &[f64]) -> (Vec<f64>, Vec<u8>) {
    let mut dec = Decoder::new(g, cfg).unwrap();
    let mut acc = Vec::new();
    let out = dec.decode_observed(llr, &[], |s| acc = s.accumulated.to_vec()).unwrap();
    (acc, out.decoded)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Flipping the LLR signs on the support of a codeword flips exactly
    /// those decisions and the sign of their accumulated LLRs.
    #[test]
    fn codeword_symmetry(
        mags in proptest::collection::vec(0.01f64..6.0, 155),
        signs in proptest::collection::vec(any::<bool>(), 155),
        pick in proptest::collection::vec(any::<bool>(), 64),
        cms in any::<bool>(),
        fixed in any::<bool>(),
    ) {
        // sign(0) = +1 breaks exact symmetry for min-sum once quantization
        // produces zero messages
        prop_assume!(!(cms && fixed));
        let h = tanner();
        let g = TannerGraph::new(&h);
        let mut word = vec![0u8; 155];
        for (b, &take) in crate::code::nullspace_basis(&h).iter().zip(&pick) {
            if take {
                for (w, &x) in word.iter_mut().zip(b) {
                    *w ^= x;
                }
            }
        }
        let algo = if cms { Algorithm::Cms } else { Algorithm::Sp };
        let mut cfg = DecoderConfig::new(algo, 8, 10.0);
        cfg.early_stop = false;
        if fixed {
            cfg = cfg.with_bits(6);
        }
        let llr: Vec<f64> = mags.iter().zip(&signs).map(|(&m, &s)| if s { m } else { -m }).collect();
        let flipped: Vec<f64> = llr.iter().zip(&word).map(|(&x, &c)| if c == 1 { -x } else { x }).collect();
        let (a, da) = final_accumulated(&g, cfg, &llr);
        let (b, db) = final_accumulated(&g, cfg, &flipped);
        for v in 0..155 {
            let s = if word[v] == 1 { -1.0 } else { 1.0 };
            prop_assert!((a[v] - s * b[v]).abs() < 1e-9);
            if a[v] != 0.0 {
                prop_assert_eq!(da[v] ^ word[v], db[v]);
            }
        }
    }

    /// With every check of even degree the all-ones word is a codeword, so
    /// negating all intrinsics negates every message.
    #[test]
    fn negation_symmetry_even_checks(
        llr in proptest::collection::vec(prop_oneof![-6.0f64..-0.01, 0.01f64..6.0], 28),
        cms in any::<bool>(),
    ) {
        let h = build_qc_matrix(&[vec![0, 1, 2, 4], vec![0, 2, 4, 1], vec![0, 3, 6, 5]], 7).unwrap();
        let g = TannerGraph::new(&h);
        let algo = if cms { Algorithm::Cms } else { Algorithm::Sp };
        let mut cfg = DecoderConfig::new(algo, 6, 10.0);
        cfg.early_stop = false;
        let neg: Vec<f64> = llr.iter().map(|x| -x).collect();
        let mut dec = Decoder::new(&g, cfg).unwrap();
        let mut fwd = Vec::new();
        dec.decode_observed(&llr, &[], |s| fwd.push((s.c2v.to_vec(), s.v2c.to_vec()))).unwrap();
        let mut it = 0;
        dec.decode_observed(&neg, &[], |s| {
            let (c, v) = &fwd[it];
            assert!(c.iter().zip(s.c2v).all(|(x, y)| (x + y).abs() < 1e-12));
            assert!(v.iter().zip(s.v2c).all(|(x, y)| (x + y).abs() < 1e-12));
            it += 1;
        }).unwrap();
    }

    #[test]
    fn cms_within_envelope_of_tanh(x in proptest::collection::vec(-12.0f64..12.0, 3..33)) {
        let sp = tanh_rule(&x, 1e3);
        let cms = cms_rule(&x, 1e3);
        let bound = ((x.len() - 1) as f64).ln();
        for (s, c) in sp.iter().zip(&cms) {
            prop_assert!(c.abs() <= s.abs() + bound + 1e-9, "cms {c} sp {s}");
            prop_assert!(s * c >= 0.0);
        }
    }

    #[test]
    fn quantizer_is_odd_and_bounded(x in -50.0f64..50.0, b in 2u32..16, tau in 0.5f64..200.0) {
        let y = quantize(x, b, tau);
        prop_assert_eq!(quantize(-x, b, tau), -y);
        prop_assert!(y.abs() <= tau * (1.0 + 1e-15));
        let delta = tau / ((1u64 << (b - 1)) - 1) as f64;
        prop_assert!((y / delta - (y / delta).round()).abs() < 1e-9);
    }
}
