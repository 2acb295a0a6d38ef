use proptest::prelude::*;
use robin_tri::loeschian::{
    build_sieve, crt_gap_certificate, is_loeschian, max_gap, representable_by_factorization,
    representations, Arithmetic,
};
use robin_tri::spectrum::clusters_up_to;
use robin_tri::LoeschianError;

#[test]
fn sieve_agrees_with_clusters() {
    let sieve = build_sieve(20_000).unwrap();
    let clusters = clusters_up_to(20_000);
    let from_clusters: Vec<u64> = clusters.iter().map(|c| c.r_squared).collect();
    let from_sieve: Vec<u64> = sieve.iter().collect();
    assert_eq!(from_sieve, from_clusters);
    for c in &clusters {
        let w: Vec<(u64, u64)> = c
            .modes
            .iter()
            .map(|m| (m.m() as u64, m.n() as u64))
            .collect();
        assert_eq!(representations(c.r_squared), w);
    }
}

#[test]
fn certificates_agree_across_widths() {
    for k in 1..=8 {
        let a = crt_gap_certificate(k, Arithmetic::Native).unwrap();
        let b = crt_gap_certificate(k, Arithmetic::Wide).unwrap();
        assert_eq!(a, b);
        assert!(a.check_congruences());
    }
    assert_eq!(
        crt_gap_certificate(9, Arithmetic::Native),
        Err(LoeschianError::ArithmeticOverflow { k: 9, width: 64 })
    );
    for k in 9..=13 {
        assert!(crt_gap_certificate(k, Arithmetic::Wide)
            .unwrap()
            .check_congruences());
    }
}

#[test]
fn small_certificates_verified_directly() {
    for k in 1..=5 {
        let cert = crt_gap_certificate(k, Arithmetic::Native).unwrap();
        assert_eq!(cert.verify_brute_force(), Some(true), "K = {k}");
        for &w in &cert.window {
            assert!(!is_loeschian(w as u64).representable);
        }
    }
}

#[test]
fn certificate_window_bounds_sieve_gap() {
    // a window of K non-representable integers below the limit forces a gap > K
    let cert = crt_gap_certificate(3, Arithmetic::Native).unwrap();
    let limit = (*cert.window.last().unwrap() as u64 + 100).max(1000);
    let gap = max_gap(&build_sieve(limit).unwrap());
    assert!(gap.gap > 3);
}

proptest! {
    #[test]
    fn criteria_agree_on_large_integers(k in 0u64..10_000_000_000) {
        prop_assert_eq!(!representations(k).is_empty(), representable_by_factorization(k));
    }

    #[test]
    fn sieve_matches_factorization(limit in 1u64..30_000) {
        let sieve = build_sieve(limit).unwrap();
        for k in 0..=limit {
            prop_assert_eq!(sieve.is_representable(k), representable_by_factorization(k));
        }
    }

    #[test]
    fn witnesses_reproduce_k(m in 0u64..3000, n in 0u64..3000) {
        let k = m * m + m * n + n * n;
        let (a, b) = (m.min(n), m.max(n));
        prop_assert!(representations(k).contains(&(a, b)));
    }
}
