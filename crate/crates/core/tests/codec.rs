//! Encoder, decoder schedules and simulator on the shipped design.

use esrl_core::codec::{
    decode_layered, decode_slme, decode_windowed, DecodeConfig, Decoder, Encoder, Executor, Variant,
};
use esrl_core::coupled::CoupledCode;
use esrl_core::golden::CLASSICAL_ROWS;
use esrl_core::profile_io;
use esrl_core::sim::{
    channel_llrs, max_punctured_per_row, noise_variance, run_fer, run_harq, HarqConfig, HarqLinks, Link, SimConfig,
};
use esrl_core::CodeProfile;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn shipped() -> CodeProfile {
    profile_io::from_text(include_str!("../profiles/design-z39.profile")).unwrap()
}

fn random_info(n: usize, rng: &mut ChaCha8Rng) -> Vec<u8> {
    (0..n).map(|_| rng.random_range(0..2)).collect()
}

#[test]
fn encoder_output_has_zero_syndrome_at_every_rate() {
    let p = shipped();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for m in CLASSICAL_ROWS {
        let link = Link::new(&p, 4, Some(m)).unwrap();
        let h = link.code.lift().unwrap();
        for _ in 0..5 {
            let w = link.encoder.encode(&random_info(link.encoder.info_len(), &mut rng)).unwrap();
            assert!(h.is_codeword(&w), "rows {m}");
            assert!(link.decoder.is_codeword(&w));
        }
    }
}

#[test]
fn puncturing_touches_at_most_one_bit_per_check() {
    let p = shipped();
    for m in CLASSICAL_ROWS {
        let cc = CoupledCode::new(&p.prune(m).unwrap(), 10).unwrap();
        assert!(max_punctured_per_row(&cc) <= 1, "rows {m}");
    }
}

#[test]
fn codewords_are_fixed_points() {
    let link = Link::new(&shipped(), 5, Some(6)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let w = link.encoder.encode(&random_info(link.encoder.info_len(), &mut rng)).unwrap();
    // noiseless LLRs, punctured bits erased
    let llr: Vec<f64> = (0..w.len())
        .map(|i| if link.map.transmit.binary_search(&i).is_ok() { 4.0 * (1.0 - 2.0 * f64::from(w[i])) } else { 0.0 })
        .collect();
    for cfg in [
        DecodeConfig::default(),
        DecodeConfig { variant: Variant::SumProduct, ..DecodeConfig::default() },
        DecodeConfig { window: Some((3, 2)), executor: Executor::Lockstep, ..DecodeConfig::default() },
    ] {
        let out = link.decoder.decode(&llr, &cfg).unwrap();
        assert!(out.converged);
        assert_eq!(out.bits, w);
    }
}

#[test]
fn lockstep_matches_sequential_reference() {
    let link = Link::new(&shipped(), 5, Some(6)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sigma2 = noise_variance(3.0, link.rate);
    for _ in 0..40 {
        let w = link.encoder.encode(&random_info(link.encoder.info_len(), &mut rng)).unwrap();
        let llr = channel_llrs(&w, &link.map, sigma2, &mut rng);
        for (wn, s) in [(3, 1), (3, 2), (4, 4)] {
            let a = decode_slme(&link.decoder, &llr, wn, s, 3, Variant::default()).unwrap();
            let b = decode_windowed(&link.decoder, &llr, wn, s, 3, Variant::default()).unwrap();
            assert_eq!(a, b);
        }
    }
}

#[test]
fn full_window_equals_layered() {
    let link = Link::new(&shipped(), 5, Some(9)).unwrap();
    let blocks = link.decoder.blocks();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let sigma2 = noise_variance(2.0, link.rate);
    for _ in 0..20 {
        let w = link.encoder.encode(&random_info(link.encoder.info_len(), &mut rng)).unwrap();
        let llr = channel_llrs(&w, &link.map, sigma2, &mut rng);
        for variant in [Variant::default(), Variant::SumProduct] {
            let full = decode_layered(&link.decoder, &llr, 4, variant).unwrap();
            let slme = decode_slme(&link.decoder, &llr, blocks, blocks, 4, variant).unwrap();
            assert_eq!(full.bits, slme.bits);
            assert_eq!(full.iterations, slme.iterations);
            assert_eq!(full.windows, 1);
        }
    }
}

#[test]
fn window_cost_accounting() {
    let link = Link::new(&shipped(), 10, Some(6)).unwrap();
    let d = &link.decoder;
    assert_eq!(d.blocks(), 11);
    let llr = vec![1.0; d.frame_len()];
    let cfg = DecodeConfig { window: Some((7, 4)), early_stop: false, ..DecodeConfig::default() };
    let out = d.decode(&llr, &cfg).unwrap();
    // window positions 0..7 and 4..11
    assert_eq!(out.windows, 2);
    assert_eq!(out.cn_updates, 5 * (d.sweep_cost(0, 7) + d.sweep_cost(4, 7)));
    let full = d.decode(&llr, &DecodeConfig { early_stop: false, ..DecodeConfig::default() }).unwrap();
    assert_eq!(full.cn_updates, 5 * d.sweep_cost(0, 11));
    // independent count: row degrees times Z over all coupled rows
    let z = d.lifting() as u64;
    let direct: u64 = link.code.rows.iter().map(|r| r.len() as u64 * z).sum();
    assert_eq!(d.sweep_cost(0, 11), direct);
}

#[test]
fn both_variants_decode_at_high_snr() {
    let link = Link::new(&shipped(), 5, Some(6)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sigma2 = noise_variance(5.0, link.rate);
    for _ in 0..20 {
        let w = link.encoder.encode(&random_info(link.encoder.info_len(), &mut rng)).unwrap();
        let llr = channel_llrs(&w, &link.map, sigma2, &mut rng);
        for variant in [Variant::default(), Variant::SumProduct, Variant::Nms { alpha: 1.0 }] {
            let out = decode_layered(&link.decoder, &llr, 20, variant).unwrap();
            assert!(out.converged, "{variant:?}");
            assert_eq!(out.bits, w);
        }
    }
}

#[test]
fn decoder_rejects_bad_windows() {
    let link = Link::new(&shipped(), 4, Some(4)).unwrap();
    let llr = vec![0.5; link.decoder.frame_len()];
    for window in [(0, 1), (3, 4), (6, 1)] {
        let cfg = DecodeConfig { window: Some(window), ..DecodeConfig::default() };
        assert!(link.decoder.decode(&llr, &cfg).is_err(), "{window:?}");
    }
}

#[test]
fn fer_is_reproducible_across_worker_counts() {
    let p = shipped();
    let base = SimConfig {
        length: 4,
        pruning: Some(6),
        ebn0_db: vec![2.0, 3.0],
        max_frames: 70,
        min_errors: 1000,
        seed: 7,
        ..SimConfig::default()
    };
    let one = run_fer(&p, &SimConfig { workers: 1, ..base.clone() }).unwrap();
    let three = run_fer(&p, &SimConfig { workers: 3, ..base.clone() }).unwrap();
    assert_eq!(one.points, three.points);
    assert_eq!(one.config_hash, three.config_hash);
    assert!(one.points[0].fer >= one.points[1].fer);
    let other = run_fer(&p, &SimConfig { seed: 8, ..base }).unwrap();
    assert_ne!(one.config_hash, other.config_hash);
}

#[test]
fn harq_stages_nest() {
    let p = shipped();
    let links = HarqLinks::new(&p, 4, &CLASSICAL_ROWS).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let k = links.stages[0].encoder.info_len();
    for _ in 0..5 {
        assert!(links.nesting_holds(&random_info(k, &mut rng)).unwrap());
    }
    let cfg = HarqConfig { length: 4, ebn0_db: vec![1.0, 4.0], trials: 20, ..HarqConfig::default() };
    let report = run_harq(&p, &cfg).unwrap();
    assert!(report.stage_rates.windows(2).all(|w| w[0] > w[1]));
    for pt in &report.points {
        assert_eq!(pt.nesting_violations, 0);
        assert!(pt.system_rate <= report.stage_rates[0] + 1e-12);
    }
    assert!(report.points[1].system_rate >= report.points[0].system_rate);
}

#[test]
fn standalone_decoder_tables_match_the_code() {
    let cc = CoupledCode::new(&shipped().prune(4).unwrap(), 3).unwrap();
    let enc = Encoder::new(&cc).unwrap();
    let dec = Decoder::new(&cc).unwrap();
    assert_eq!(enc.frame_len(), dec.frame_len());
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut w = enc.encode(&random_info(enc.info_len(), &mut rng)).unwrap();
    assert!(dec.is_codeword(&w));
    w[enc.info_len() / 2] ^= 1;
    assert!(!dec.is_codeword(&w));
}
