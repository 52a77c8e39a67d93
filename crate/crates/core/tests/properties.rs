use proptest::prelude::*;

use l1codec::bp::{decode_l1, sense_l1, SenseProblem, SubspaceBasis};
use l1codec::codec::{corrupt, Codec, CodeParams, Corruption};
use l1codec::geometry::{min_inf_certificate, CertificateClass, Facet};
use l1codec::linalg::{complement_basis, norm, sample_haar_orthonormal, NormKind, RealMatrix, RealVector, SeedSpec};

fn haar(m: usize, k: usize, seed: u64) -> RealMatrix {
    sample_haar_orthonormal(m, k, SeedSpec::new(seed, 0)).unwrap()
}

fn gaussian(len: usize, seed: u64) -> RealVector {
    let mut rng = SeedSpec::new(seed, 1).rng();
    RealVector::new((0..len).map(|_| rng.normal()).collect()).unwrap()
}

fn permute_rows(a: &RealMatrix, perm: &[usize]) -> RealMatrix {
    a.select_rows(perm)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_chain(v in prop::collection::vec(-1e3f64..1e3, 1..20)) {
        let (l1, l2, li) = (norm(&v, NormKind::L1), norm(&v, NormKind::L2), norm(&v, NormKind::Linf));
        let slack = 1e-12 * (1.0 + l1);
        prop_assert!(li <= l2 + slack);
        prop_assert!(l2 <= l1 + slack);
        prop_assert!(l1 <= (v.len() as f64).sqrt() * l2 + slack);
    }

    #[test]
    fn range_and_complement_split_identity(m in 2usize..12, frac in 0.0f64..1.0, seed in any::<u64>()) {
        let n = 1 + ((m - 1) as f64 * frac) as usize % (m - 1);
        let q = haar(m, n, seed);
        let e = complement_basis(&q).unwrap();
        let sum = q.matmul(&q.transpose()).add(&e.matmul(&e.transpose()));
        prop_assert!(sum.sub(&RealMatrix::identity(m)).max_abs() <= 1e-10);
    }

    #[test]
    fn decode_is_scale_and_translation_equivariant(m in 3usize..9, seed in any::<u64>(), lambda in 0.1f64..10.0) {
        let y = SubspaceBasis::new(haar(m, m / 2, seed)).unwrap();
        let target = gaussian(m, seed);
        let base = decode_l1(&y, &target).unwrap();
        let scaled = decode_l1(&y, &target.scaled(lambda)).unwrap();
        prop_assert!((scaled.objective - lambda * base.objective).abs() <= 1e-8 * (1.0 + lambda * base.objective));
        let shift = RealVector::new(y.matrix().matvec(gaussian(m / 2, seed ^ 1).as_slice())).unwrap();
        let moved = decode_l1(&y, &target.add(&shift)).unwrap();
        prop_assert!((moved.objective - base.objective).abs() <= 1e-8 * (1.0 + base.objective));
    }

    #[test]
    fn decode_and_sense_share_the_optimum(m in 3usize..9, seed in any::<u64>()) {
        // The decode problem over y' + Y is the sensing problem with A = E^T.
        let q = haar(m, m / 2, seed);
        let e = complement_basis(&q).unwrap();
        let target = gaussian(m, seed);
        let dec = decode_l1(&SubspaceBasis::new(q).unwrap(), &target).unwrap();
        let sense = sense_l1(&SenseProblem::measure(e.transpose(), &target).unwrap()).unwrap();
        prop_assert!((dec.objective - sense.objective).abs() <= 1e-8 * (1.0 + dec.objective));
        let residual = target.sub(&dec.u);
        prop_assert!((residual.norm(NormKind::L1) - dec.objective).abs() <= 1e-8 * (1.0 + dec.objective));
    }

    #[test]
    fn certificate_is_permutation_equivariant(m in 3usize..9, seed in any::<u64>(), neg in any::<bool>()) {
        let big_r = 1 + (seed as usize) % (m - 1);
        let e = haar(m, big_r, seed);
        let mut rng = SeedSpec::new(seed, 2).rng();
        let perm = rng.permutation(m);
        let facet = Facet::new(vec![0], vec![if neg { -1 } else { 1 }], m).unwrap();
        let base = min_inf_certificate(&SubspaceBasis::new(e.clone()).unwrap(), &facet).unwrap();
        // Row perm[i] of the permuted basis is row i of the original.
        let mut inverse = vec![0; m];
        for (i, &p) in perm.iter().enumerate() {
            inverse[p] = i;
        }
        let moved = permute_rows(&e, &inverse);
        let moved_facet = Facet::new(vec![perm[0]], facet.signs().to_vec(), m).unwrap();
        let other = min_inf_certificate(&SubspaceBasis::new(moved).unwrap(), &moved_facet).unwrap();
        if base.t_star.is_finite() {
            prop_assert!((base.t_star - other.t_star).abs() <= 1e-8 * (1.0 + base.t_star));
        } else {
            prop_assert!(other.t_star.is_infinite());
        }
    }

    #[test]
    fn certificate_ignores_the_choice_of_basis(m in 3usize..9, seed in any::<u64>()) {
        let big_r = 1 + (seed as usize) % (m - 1);
        let e = haar(m, big_r, seed);
        let rotation = haar(big_r, big_r, seed ^ 7);
        let facet = Facet::new(vec![m - 1], vec![1], m).unwrap();
        let a = min_inf_certificate(&SubspaceBasis::new(e.clone()).unwrap(), &facet).unwrap();
        let b = min_inf_certificate(&SubspaceBasis::new(e.matmul(&rotation)).unwrap(), &facet).unwrap();
        if a.t_star.is_finite() {
            prop_assert!((a.t_star - b.t_star).abs() <= 1e-8 * (1.0 + a.t_star));
        } else {
            prop_assert!(b.t_star.is_infinite());
        }
    }

    #[test]
    fn strict_certificate_means_exact_decode(m in 4usize..10, seed in any::<u64>(), mag in -3.0f64..6.0) {
        let n = m / 3 + 1;
        let codec = Codec::new(CodeParams::new(m, n, 1).unwrap(), SeedSpec::new(seed, 0)).unwrap();
        let facet = Facet::new(vec![seed as usize % m], vec![-1], m).unwrap();
        let cert = min_inf_certificate(codec.complement(), &facet).unwrap();
        prop_assume!(cert.class == CertificateClass::Strict);
        let x = gaussian(n, seed);
        let y = codec.encode(&x).unwrap();
        let z = Corruption::new(facet.support().to_vec(), vec![-(10f64.powf(mag))]).unwrap();
        prop_assert!(codec.decode(&corrupt(&y, &z).unwrap()).unwrap().recovers(&x));
    }

    #[test]
    fn codec_round_trip_and_isometry(m in 3usize..16, seed in any::<u64>()) {
        let n = 1 + seed as usize % (m - 1);
        let codec = Codec::new(CodeParams::new(m, n, 0).unwrap(), SeedSpec::new(seed, 3)).unwrap();
        let x = gaussian(n, seed);
        let y = codec.encode(&x).unwrap();
        prop_assert!((y.norm(NormKind::L2) - x.norm(NormKind::L2)).abs() <= 1e-9 * (1.0 + x.norm(NormKind::L2)));
        let back = codec.decode(&y).unwrap();
        prop_assert!(back.x_hat.sub(&x).norm(NormKind::Linf) <= 1e-9);
    }

    #[test]
    fn quantization_stays_within_budget(seed in any::<u64>(), p in 1i64..50) {
        let codec = Codec::new(CodeParams::new(12, 6, 1).unwrap(), SeedSpec::new(seed, 4)).unwrap();
        let mut rng = SeedSpec::new(seed, 5).rng();
        let x: Vec<i64> = (0..6).map(|_| 1 + rng.below(p as usize) as i64).collect();
        let word = codec.quantized_encode(&x, p).unwrap();
        let exact = codec.encode(&RealVector::new(x.iter().map(|&v| v as f64).collect()).unwrap()).unwrap();
        prop_assert!(word.l1_error_against(&exact) <= 1.0 / 20.0);
        prop_assert_eq!(codec.quantized_decode(&word).unwrap().symbols, x);
    }
}
