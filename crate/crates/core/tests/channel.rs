use dnafec::channel::{
    consensus, pool_sample, preset_illumina, preset_nanopore, quaternary_bit_error_rate, soft_demap,
    split_total_error, transmit, ChannelLevel, ChannelSpec, CopyDist, Fate, SubstitutionModel, SubstitutionPreset,
};
use dnafec::rng::rng_from_seed;
use proptest::prelude::*;
use rand::Rng;

fn within_3_sigma(observed: f64, mean: f64, sd: f64) -> bool {
    (observed - mean).abs() <= 3.0 * sd
}

#[test]
fn total_error_split_partitions() {
    let (i, d, s) = split_total_error(0.01);
    assert!((i - 0.0017).abs() < 1e-15);
    assert!((d - 0.0040).abs() < 1e-15);
    assert!((s - 0.0043).abs() < 1e-15);
    for p in [0.0, 0.002, 0.3, 1.0] {
        let (i, d, s) = split_total_error(p);
        assert!((i + d + s - p).abs() < 1e-15);
    }
}

#[test]
fn clean_and_total_deletion() {
    let mut rng = rng_from_seed(3);
    let bits: Vec<u8> = (0..500).map(|_| rng.random_range(0..2)).collect();
    let (out, trace) = transmit(&bits, &ChannelSpec::clean(ChannelLevel::Bit), &mut rng).unwrap();
    assert_eq!(out, bits);
    assert!(trace.is_clean());
    let spec = ChannelSpec { p_d: 1.0, ..ChannelSpec::clean(ChannelLevel::Base) };
    let (out, trace) = transmit(b"ACGTACGT", &spec, &mut rng).unwrap();
    assert!(out.is_empty());
    assert_eq!(trace.counts().deletions, 8);
}

#[test]
fn bit_level_event_frequencies() {
    let (p_i, p_d, p_s) = (0.02, 0.03, 0.04);
    let spec = ChannelSpec { p_i, p_d, p_s, ..ChannelSpec::clean(ChannelLevel::Bit) };
    let n = 1_000_000usize;
    let mut rng = rng_from_seed(11);
    let input: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
    let (out, trace) = transmit(&input, &spec, &mut rng).unwrap();
    let c = trace.counts();
    let nf = n as f64;
    // Geometric insertion runs: mean P_i/(1-P_i), variance P_i/(1-P_i)^2 per slot.
    let ins_mean = p_i / (1.0 - p_i);
    assert!(within_3_sigma(c.insertions as f64, nf * ins_mean, (nf * p_i).sqrt() / (1.0 - p_i)));
    let q_del = p_d / (1.0 - p_i);
    assert!(within_3_sigma(c.deletions as f64, nf * q_del, (nf * q_del * (1.0 - q_del)).sqrt()));
    let kept = (n - c.deletions) as f64;
    assert!(within_3_sigma(c.substitutions as f64, kept * p_s, (kept * p_s * (1.0 - p_s)).sqrt()));
    assert_eq!(out.len() as i64 - n as i64, *trace.drift().last().unwrap());
    let inserted_ones: usize = trace.slots.iter().flat_map(|e| &e.inserted).map(|&b| b as usize).sum();
    let ni = c.insertions as f64;
    assert!(within_3_sigma(inserted_ones as f64, ni / 2.0, (ni / 4.0).sqrt()));
}

#[test]
fn capped_insertion_runs_follow_truncated_geometric() {
    let (p_i, cap) = (0.2, 2usize);
    let spec = ChannelSpec { p_i, p_d: 0.1, insertion_cap: Some(cap), ..ChannelSpec::clean(ChannelLevel::Bit) };
    let n = 400_000;
    let mut rng = rng_from_seed(12);
    let (_, trace) = transmit(&vec![0u8; n], &spec, &mut rng).unwrap();
    let mut hist = [0usize; 3];
    for e in &trace.slots {
        hist[e.inserted.len()] += 1;
    }
    let alpha = 1.0 / (1.0 - p_i.powi(cap as i32));
    let probs = [1.0 - p_i, alpha * p_i * (1.0 - p_i), alpha * p_i * p_i * (1.0 - p_i)];
    assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    for (h, p) in hist.iter().zip(probs) {
        let nf = n as f64;
        assert!(within_3_sigma(*h as f64, nf * p, (nf * p * (1.0 - p)).sqrt()), "{hist:?}");
    }
}

#[test]
fn matrix_substitution_frequencies() {
    let rows = preset_nanopore(0.05).unwrap();
    let spec = ChannelSpec {
        substitution: SubstitutionModel::Matrix { rows },
        p_s: 0.9, // ignored by the matrix model
        ..ChannelSpec::clean(ChannelLevel::Base)
    };
    spec.validate().unwrap();
    let n = 200_000;
    let mut rng = rng_from_seed(13);
    for (x, &base) in b"ACGT".iter().enumerate() {
        let (out, _) = transmit(&vec![base; n], &spec, &mut rng).unwrap();
        for (y, &b) in b"ACGT".iter().enumerate() {
            let count = out.iter().filter(|&&o| o == b).count() as f64;
            let p = rows[x][y];
            let nf = n as f64;
            assert!(within_3_sigma(count, nf * p, (nf * p * (1.0 - p)).sqrt().max(1e-9)), "{x}->{y}");
        }
    }
}

#[test]
fn preset_structure() {
    let m = preset_nanopore(0.01).unwrap();
    let idx = |b: u8| b"ACGT".iter().position(|&x| x == b).unwrap();
    assert!((m[idx(b'A')][idx(b'G')] - 0.04).abs() < 1e-15);
    assert!((m[idx(b'A')][idx(b'C')] - 0.01).abs() < 1e-15);
    assert!((m[idx(b'A')][idx(b'T')] - 0.01).abs() < 1e-15);
    assert_eq!(m[idx(b'C')][idx(b'G')], 0.0);
    // alpha -> 0 leaves only the constant p3 edges.
    let m = preset_nanopore(1e-15).unwrap();
    for (x, row) in m.iter().enumerate() {
        for (y, &p) in row.iter().enumerate() {
            if x != y {
                assert!(p < 1e-13 || (p - 0.01).abs() < 1e-13);
            }
        }
    }
    let m = preset_illumina(0.2).unwrap();
    assert!((m[idx(b'A')][idx(b'C')] - 0.3).abs() < 1e-15);
    assert!((m[idx(b'C')][idx(b'A')] - 0.2).abs() < 1e-15);
    assert!(preset_nanopore(0.2).is_err());
    assert!(preset_illumina(0.0).is_err());
    assert!(preset_illumina(0.7).is_err());
}

#[test]
fn preset_rows_are_stochastic() {
    let mut rng = rng_from_seed(14);
    for _ in 0..100 {
        for m in [
            preset_nanopore(rng.random_range(1e-6..0.198)).unwrap(),
            preset_illumina(rng.random_range(1e-6..2.0 / 3.0)).unwrap(),
        ] {
            for row in m {
                assert!(row.iter().all(|&p| p >= 0.0));
                assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn preset_override_from_json() {
    let json = r#"{"custom": {"param_max": 0.5, "classes": {"x": [1.0, 0.0]}, "edges": [["A", "T", "x"]]}}"#;
    let m = SubstitutionPreset::from_json(json, "custom").unwrap().matrix(0.1).unwrap();
    assert!((m[0][3] - 0.1).abs() < 1e-15 && (m[0][0] - 0.9).abs() < 1e-15);
    assert_eq!(m[1][1], 1.0);
    assert!(SubstitutionPreset::from_json(json, "missing").is_err());
    let bad = r#"{"b": {"param_max": 0.5, "classes": {}, "edges": [["A", "T", "x"]]}}"#;
    assert!(SubstitutionPreset::from_json(bad, "b").is_err());
}

#[test]
fn analytic_uncoded_ber_matches_simulation() {
    let rows = preset_illumina(0.1).unwrap();
    let spec = ChannelSpec { substitution: SubstitutionModel::Matrix { rows }, ..ChannelSpec::clean(ChannelLevel::Base) };
    let mut rng = rng_from_seed(15);
    let n = 200_000;
    let bits: Vec<u8> = (0..2 * n).map(|_| rng.random_range(0..2)).collect();
    let bases = dnafec::base_codec::quaternary_encode(&bits).unwrap();
    let (out, _) = transmit(bases.as_bytes(), &spec, &mut rng).unwrap();
    let got = dnafec::base_codec::quaternary_decode(std::str::from_utf8(&out).unwrap()).unwrap();
    let errs = dnafec::bits::hamming_distance(&bits, &got) as f64;
    let p = quaternary_bit_error_rate(&rows);
    let nb = 2.0 * n as f64;
    assert!(within_3_sigma(errs, nb * p, (nb * p * (1.0 - p)).sqrt()));
}

#[test]
fn soft_demap_signs() {
    let rows = preset_nanopore(0.02).unwrap();
    let llrs = soft_demap(b"ATCG", &rows).unwrap();
    // A=00, T=01, C=10, G=11
    let expect = [0u8, 0, 0, 1, 1, 0, 1, 1];
    for (l, b) in llrs.iter().zip(expect) {
        assert_eq!(*l < 0.0, b == 1, "{llrs:?}");
    }
    assert!(soft_demap(b"AN", &rows).is_err());
}

#[test]
fn pool_extremes() {
    let oligos: Vec<Vec<u8>> = vec![b"ACGT".to_vec(), b"GGCA".to_vec(), b"TTAC".to_vec()];
    let mut rng = rng_from_seed(16);
    let lost = ChannelSpec { p_l: 1.0, ..ChannelSpec::clean(ChannelLevel::Base) };
    assert!(pool_sample(&oligos, &lost, &mut rng).unwrap().is_empty());
    let one = ChannelSpec::clean(ChannelLevel::Base);
    let reads = pool_sample(&oligos, &one, &mut rng).unwrap();
    assert_eq!(reads.len(), 3);
    for r in reads {
        assert_eq!(r.seq, oligos[r.source]);
    }
}

#[test]
fn pool_read_counts() {
    let oligos: Vec<Vec<u8>> = vec![b"AC".to_vec(); 10];
    let p_l = 0.1;
    for dist in [
        CopyDist::Fixed { copies: 3 },
        CopyDist::Poisson { mean: 4.0 },
        CopyDist::NegativeBinomial { mean: 5.0, dispersion: 2.0 },
    ] {
        let spec = ChannelSpec { p_l, copy_dist: dist.clone(), ..ChannelSpec::clean(ChannelLevel::Base) };
        let mut rng = rng_from_seed(17);
        let trials = 10_000;
        let (mut sum, mut sum2) = (0.0, 0.0);
        for _ in 0..trials {
            let r = pool_sample(&oligos, &spec, &mut rng).unwrap().len() as f64;
            sum += r;
            sum2 += r * r;
        }
        let mean = sum / trials as f64;
        let var = sum2 / trials as f64 - mean * mean;
        let expected = 10.0 * (1.0 - p_l) * dist.mean();
        assert!(within_3_sigma(mean, expected, (var / trials as f64).sqrt()), "{dist:?}: {mean} vs {expected}");
    }
}

#[test]
fn negative_binomial_is_overdispersed() {
    let d = CopyDist::NegativeBinomial { mean: 6.0, dispersion: 3.0 };
    let mut rng = rng_from_seed(18);
    let xs: Vec<f64> = (0..50_000).map(|_| d.sample(&mut rng) as f64).collect();
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64;
    // mean + mean^2 / r
    assert!((v - 18.0).abs() < 1.0, "variance {v}");
}

#[test]
fn consensus_recovers_from_substitutions() {
    let spec = ChannelSpec { p_s: 0.05, ..ChannelSpec::clean(ChannelLevel::Base) };
    let mut rng = rng_from_seed(19);
    let oligo = b"ACGTTGCAACGTAGCT".to_vec();
    let reads: Vec<Vec<u8>> = (0..15).map(|_| transmit(&oligo, &spec, &mut rng).unwrap().0).collect();
    let refs: Vec<&[u8]> = reads.iter().map(|r| r.as_slice()).collect();
    assert_eq!(consensus(&refs).unwrap(), oligo);
}

#[test]
fn spec_json_round_trip() {
    let spec = ChannelSpec {
        insertion_cap: Some(2),
        substitution: SubstitutionModel::Matrix { rows: preset_illumina(0.1).unwrap() },
        copy_dist: CopyDist::default(),
        ..ChannelSpec::clean(ChannelLevel::Base).with_total_error(0.01)
    };
    let text = serde_json::to_string(&spec).unwrap();
    assert!(text.contains("\"schema_version\":1"));
    let back: ChannelSpec = serde_json::from_str(&text).unwrap();
    assert_eq!(back, spec);
    let mut wrong = spec.clone();
    wrong.schema_version = 9;
    assert!(wrong.validate().is_err());
}

proptest! {
    #[test]
    fn trace_replays_output(seed in any::<u64>(), len in 0usize..200, cap in proptest::option::of(1usize..4)) {
        let spec = ChannelSpec { p_i: 0.1, p_d: 0.1, p_s: 0.1, insertion_cap: cap, ..ChannelSpec::clean(ChannelLevel::Base) };
        let mut rng = rng_from_seed(seed);
        let input: Vec<u8> = (0..len).map(|_| b"ACGT"[rng.random_range(0..4)]).collect();
        let (out, trace) = transmit(&input, &spec, &mut rng).unwrap();
        prop_assert_eq!(trace.replay(&input), out.clone());
        prop_assert_eq!(trace.slots.len(), len);
        if let Some(c) = cap {
            prop_assert!(trace.slots.iter().all(|e| e.inserted.len() <= c));
        }
        prop_assert!(trace.slots.iter().all(|e| !matches!(e.fate, Fate::Substitute(b) if !b"ACGT".contains(&b))));
        let d = trace.drift();
        prop_assert_eq!(*d.last().unwrap(), out.len() as i64 - len as i64);
    }

    #[test]
    fn same_seed_same_output(seed in any::<u64>()) {
        let spec = ChannelSpec::clean(ChannelLevel::Bit).with_total_error(0.2);
        let input = vec![1u8; 64];
        let a = transmit(&input, &spec, &mut rng_from_seed(seed)).unwrap();
        let b = transmit(&input, &spec, &mut rng_from_seed(seed)).unwrap();
        prop_assert_eq!(a, b);
    }
}
