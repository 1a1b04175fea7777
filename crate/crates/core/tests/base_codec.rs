use dnafec::base_codec::{
    acceptance_rate, constraints_check, max_run, quaternary_decode, quaternary_encode, ternary_rotate_decode,
    ternary_rotate_encode, ConstraintSpec, BASES,
};
use dnafec::rng::rng_from_seed;
use rand::Rng;

#[test]
fn droplet_example_under_canonical_map() {
    // The toy droplet 111111 is printed as TTT in the source text; the
    // stated map {00,01,10,11} -> {A,T,C,G} gives GGG.
    assert_eq!(quaternary_encode(&[1, 1, 1, 1, 1, 1]).unwrap(), "GGG");
}

#[test]
fn quaternary_roundtrip() {
    let mut rng = rng_from_seed(1);
    for _ in 0..10_000 {
        let n = 2 * rng.random_range(0..40);
        let bits: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        assert_eq!(quaternary_decode(&quaternary_encode(&bits).unwrap()).unwrap(), bits);
    }
}

#[test]
fn rotation_roundtrip_and_no_repeats() {
    let mut rng = rng_from_seed(2);
    for _ in 0..10_000 {
        let start = BASES[rng.random_range(0..4)];
        let trits: Vec<u8> = (0..rng.random_range(0..60)).map(|_| rng.random_range(0..3)).collect();
        let seq = ternary_rotate_encode(&trits, start).unwrap();
        assert!(max_run(seq.as_bytes()) <= 1);
        assert_ne!(seq.as_bytes().first(), Some(&start));
        assert_eq!(ternary_rotate_decode(&seq, start).unwrap(), trits);
    }
}

fn exhaustive_rate(n: usize, c: &ConstraintSpec) -> f64 {
    let mut pass = 0u64;
    let mut buf = vec![0u8; n];
    for code in 0u64..(1 << (2 * n)) {
        for (i, b) in buf.iter_mut().enumerate() {
            *b = BASES[(code >> (2 * i) & 3) as usize];
        }
        if constraints_check(std::str::from_utf8(&buf).unwrap(), c).is_valid() {
            pass += 1;
        }
    }
    pass as f64 / (1u64 << (2 * n)) as f64
}

#[test]
fn screening_rate_matches_enumeration() {
    let c = ConstraintSpec::default();
    let exact12 = exhaustive_rate(12, &c);
    assert!((acceptance_rate(12, &c) - exact12).abs() < 1e-12);
    let loose = ConstraintSpec { gc_min: 0.3, gc_max: 0.7, max_homopolymer: 2 };
    assert!((acceptance_rate(10, &loose) - exhaustive_rate(10, &loose)).abs() < 1e-12);

    // Sampled acceptance of random 150 nt strands against the DP value.
    let mut rng = rng_from_seed(3);
    let trials = 200_000;
    let mut pass = 0;
    for _ in 0..trials {
        let s: String = (0..150).map(|_| BASES[rng.random_range(0..4)] as char).collect();
        pass += constraints_check(&s, &c).is_valid() as usize;
    }
    let sampled = pass as f64 / trials as f64;
    let dp = acceptance_rate(150, &c);
    assert!((sampled - dp).abs() / dp < 0.02, "sampled {sampled} dp {dp}");
}
