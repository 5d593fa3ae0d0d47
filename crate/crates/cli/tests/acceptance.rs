//! Acceptance suite: one test per shipped guarantee, each printing a
//! PASS line with the measured margin (run with `--nocapture` to see them).
//!
//! Run as `cargo test -p specfactor-cli --test acceptance`.

use std::time::Instant;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use specfactor::digital::{
    mobius_transform, solve_couplings, zeta_transform, Assignment, SubsetOrder, TargetKind,
};
use specfactor::measure::{enumerate_paths, prepare_from_window, BranchState, Variant};
use specfactor::numtheory::{factor_oracle, goldbach_check, sieve};
use specfactor::susy::{
    assemble_potential, build_superpotentials, eigen_solve, eigen_solve_refined,
    equivalence_experiment, suggested_grid, Grid, LloydSystem, LloydVariant, RealizationOptions,
};
use specfactor::{factorize, PrimeTable};

fn log_primes(count: usize) -> Vec<f64> {
    sieve(count)
        .unwrap()
        .into_iter()
        .map(|p| (p as f64).ln())
        .collect()
}

#[test]
fn criterion_01_worked_example_231() {
    let start = Instant::now();
    let table = PrimeTable::for_cutoff_exponent(8).unwrap();
    let oracle = factor_oracle(231).unwrap();
    for seed in 0..1000u64 {
        let run = factorize(231, Variant::B, &table, seed).unwrap();
        assert_eq!(run.result, oracle, "seed {seed}");
        assert_eq!(run.counts.measurements, 3, "seed {seed}");
    }

    let tree = enumerate_paths(231, &table).unwrap();
    assert_eq!(tree.leaf_count(), 6);
    let first_stage: Vec<u64> = tree.children.iter().map(|e| e.prime).collect();
    assert_eq!(first_stage, vec![3, 7, 11]);
    assert!(tree.leaf_results().iter().all(|f| **f == oracle));

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "criterion 01 PASS: 231 -> 3*7*11 in exactly 3 measurements across 1000 seeds, \
         6 outcome paths, {elapsed:?}"
    );
}

#[test]
fn criterion_02_measurement_count_law() {
    let start = Instant::now();
    let table = PrimeTable::for_cutoff_exponent(11).unwrap();
    for n in 2u64..=2048 {
        let oracle = factor_oracle(n).unwrap();
        let alpha_sum = oracle.total_multiplicity() as usize;
        let k = oracle.distinct_count();
        for seed in 0..20 {
            let a = factorize(n, Variant::A, &table, seed).unwrap();
            assert_eq!(a.counts.measurements, alpha_sum, "A: n={n} seed={seed}");
            assert_eq!(a.result, oracle, "A: n={n} seed={seed}");
            let b = factorize(n, Variant::B, &table, seed).unwrap();
            assert_eq!(b.counts.measurements, k, "B: n={n} seed={seed}");
            assert_eq!(b.result, oracle, "B: n={n} seed={seed}");
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}");
    println!(
        "criterion 02 PASS: variant A uses sum(alpha), variant B uses k measurements \
         for every N <= 2048 x 20 seeds, {elapsed:?}"
    );
}

#[test]
fn criterion_03_born_statistics() {
    use num_complex::Complex64;
    use rand::SeedableRng;
    let table = PrimeTable::for_cutoff_exponent(8).unwrap();

    // fixed two-branch state at |c|^2 = 1/2
    let amp = Complex64::new(0.5f64.sqrt(), 0.0);
    let state = BranchState::with_amplitudes(21, &table, vec![amp, amp]).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(271828);
    let shots = 100_000;
    let mut threes = 0usize;
    for _ in 0..shots {
        if state.measure_h1(&mut rng).prime == 3 {
            threes += 1;
        }
    }
    let freq = threes as f64 / shots as f64;
    assert!((freq - 0.5).abs() < 0.01, "frequency {freq}");

    // chi-square across Haar-random four-branch states (210 = 2*3*5*7)
    let chi = ChiSquared::new(3.0).unwrap();
    let mut worst_p = 1.0f64;
    for state_seed in [7u64, 99, 1234, 777] {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(state_seed);
        let state = BranchState::random(210, &table, &mut rng).unwrap();
        let expected = state.probabilities();
        let mut counts = [0usize; 4];
        for _ in 0..shots {
            let m = state.measure_h1(&mut rng);
            let idx = state
                .branches()
                .iter()
                .position(|b| b.prime == m.prime)
                .unwrap();
            counts[idx] += 1;
        }
        let chi2: f64 = counts
            .iter()
            .zip(&expected)
            .map(|(&obs, &p)| {
                let e = p * shots as f64;
                (obs as f64 - e).powi(2) / e
            })
            .sum();
        let p_value = 1.0 - chi.cdf(chi2);
        assert!(
            p_value > 1e-3,
            "state seed {state_seed}: chi2 {chi2}, p {p_value}"
        );
        worst_p = worst_p.min(p_value);
    }
    println!(
        "criterion 03 PASS: |c|^2 = 0.5 branch observed at {freq} over 1e5 draws; \
         Haar four-branch chi-square worst p = {worst_p:.4}"
    );
}

#[test]
fn criterion_04_reference_coupling_tables() {
    let start = Instant::now();
    let fixture: serde_json::Value =
        serde_json::from_str(include_str!("../../core/fixtures/coupling_tables.json")).unwrap();
    let tables = fixture["tables"].as_array().unwrap();
    assert_eq!(tables.len(), 4);

    let mut by_d = std::collections::BTreeMap::new();
    for table in tables {
        let d = table["d"].as_u64().unwrap() as u32;
        let size = 1usize << d;
        let mut j = vec![f64::NAN; size];
        for entry in table["entries"].as_array().unwrap() {
            let mask: usize = entry["indices"]
                .as_array()
                .unwrap()
                .iter()
                .map(|i| 1usize << (i.as_u64().unwrap() - 1))
                .sum();
            j[mask] = entry["j"].as_f64().unwrap();
        }
        assert!(j.iter().all(|v| v.is_finite()), "d={d} table incomplete");

        let mut eigen = j.clone();
        zeta_transform(&mut eigen);
        let mut got: Vec<i64> = eigen.iter().map(|&e| e.round() as i64).collect();
        got.sort_unstable();
        let expect: Vec<i64> = sieve(size).unwrap().into_iter().map(|p| p as i64).collect();
        assert_eq!(
            got, expect,
            "d={d}: spectrum is not the first {size} primes"
        );
        if d == 5 {
            assert!(got.contains(&67), "67 must appear at d=5");
        }
        by_d.insert(d, j);
    }

    // digit-for-digit regeneration of the two small tables
    let primes4: Vec<f64> = sieve(4).unwrap().into_iter().map(|p| p as f64).collect();
    let a2 = Assignment::canonical(2, SubsetOrder::Lexicographic).unwrap();
    let cs2 = solve_couplings(2, &primes4, &a2, TargetKind::Primes).unwrap();
    assert_eq!(cs2.couplings(), &by_d[&2][..]);

    let primes8: Vec<f64> = sieve(8).unwrap().into_iter().map(|p| p as f64).collect();
    let a3 = Assignment::canonical(3, SubsetOrder::Paper).unwrap();
    let cs3 = solve_couplings(3, &primes8, &a3, TargetKind::Primes).unwrap();
    assert_eq!(cs3.couplings(), &by_d[&3][..]);

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "criterion 04 PASS: reference tables d=2..5 all spell the first 2^d primes \
         (67 present at d=5); d=2,3 regenerated digit-for-digit, {elapsed:?}"
    );
}

#[test]
fn criterion_05_transform_inversion_exact() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5150);
    for d in 1u32..=12 {
        let size = 1usize << d;
        let original: Vec<f64> = (0..size)
            .map(|_| rng.random_range(-1_000_000i64..=1_000_000) as f64)
            .collect();

        let mut forward = original.clone();
        zeta_transform(&mut forward);
        mobius_transform(&mut forward);
        assert_eq!(forward, original, "mobius(zeta(e)) != e at d={d}");

        let mut backward = original.clone();
        mobius_transform(&mut backward);
        zeta_transform(&mut backward);
        assert_eq!(backward, original, "zeta(mobius(e)) != e at d={d}");
    }
    println!(
        "criterion 05 PASS: zeta/Moebius inversion exact on random integer targets, d = 1..12"
    );
}

#[test]
fn criterion_06_analytic_anchor_ln2() {
    let start = Instant::now();
    let ln2 = std::f64::consts::LN_2;
    let a = ln2.sqrt();
    let grid = Grid::with_step_exponent(12.0, 9).unwrap();
    let sps = build_superpotentials(&[0.0, ln2], grid, &RealizationOptions::raw()).unwrap();

    let reach = 5.0 / a;
    let mut worst_w = 0.0f64;
    for i in 0..grid.node_count() {
        let x = grid.x(i);
        if x.abs() <= reach {
            worst_w = worst_w.max((sps.w_values(0)[i] - (-a * (a * x).tanh())).abs());
        }
    }
    assert!(worst_w < 1e-6, "W deviates by {worst_w}");

    let pt = assemble_potential(&sps).unwrap();
    let mut worst_v = 0.0f64;
    for (i, &v) in pt.values().iter().enumerate() {
        let x = pt.grid().x(i);
        let exact = -2.0 * ln2 / (a * x).cosh().powi(2) + pt.offset();
        worst_v = worst_v.max((v - exact).abs());
    }
    assert!(worst_v < 1e-6, "V deviates by {worst_v}");

    // one bound level, sitting ln 2 below the asymptotic edge
    let levels = eigen_solve(&pt, 2).unwrap();
    let edge = pt.values()[0];
    let spacing = edge - levels[0];
    assert!((spacing - ln2).abs() < 1e-4, "bound spacing {spacing}");
    assert!(levels[1] > edge - 1e-6, "exactly one level below the edge");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "criterion 06 PASS: W within {worst_w:.1e} of the tanh kink, V within {worst_v:.1e} \
         of the sech^2 well, bound level {:.1e} from ln 2, {elapsed:?}",
        (spacing - ln2).abs()
    );
}

fn spacing_deviation(levels: &[f64], targets: &[f64]) -> f64 {
    levels
        .windows(2)
        .zip(targets.windows(2))
        .map(|(l, t)| ((l[1] - l[0]) - (t[1] - t[0])).abs())
        .fold(0.0f64, f64::max)
}

#[test]
fn criterion_07_spectrum_closure() {
    let start = Instant::now();
    let opts = RealizationOptions::default();

    // eight log-prime levels, one refinement, 1e-3
    let targets = log_primes(8);
    let refined = eigen_solve_refined(
        &targets,
        Grid::with_step_exponent(16.0, 9).unwrap(),
        &opts,
        8,
        1e-3,
    )
    .unwrap();
    let dev_logp8 = spacing_deviation(&refined.eigenvalues, &targets);
    assert!(
        dev_logp8 < 1e-3,
        "log-prime spacings deviate by {dev_logp8}"
    );

    // eight log-integer levels
    let targets: Vec<f64> = (2u64..10).map(|m| (m as f64).ln()).collect();
    let refined = eigen_solve_refined(
        &targets,
        Grid::with_step_exponent(16.0, 9).unwrap(),
        &opts,
        8,
        1e-3,
    )
    .unwrap();
    let dev_logi8 = spacing_deviation(&refined.eigenvalues, &targets);
    assert!(
        dev_logi8 < 1e-3,
        "log-integer spacings deviate by {dev_logi8}"
    );

    // sixteen levels of each family within 5e-3
    let mut dev16 = 0.0f64;
    for targets in [
        log_primes(16),
        (2u64..18).map(|m| (m as f64).ln()).collect::<Vec<_>>(),
        (2u64..18).map(|m| m as f64).collect::<Vec<_>>(),
    ] {
        let grid = suggested_grid(&targets, &opts).unwrap();
        let refined = eigen_solve_refined(&targets, grid, &opts, 16, 5e-3).unwrap();
        let dev = spacing_deviation(&refined.eigenvalues, &targets);
        assert!(dev < 5e-3, "16-level spacings deviate by {dev}");
        dev16 = dev16.max(dev);
    }

    // 64 levels: emit the CSV and check the gross single-well morphology
    let targets = log_primes(64);
    let grid = suggested_grid(&targets, &opts).unwrap();
    let sps = build_superpotentials(&targets, grid, &opts).unwrap();
    let pt = assemble_potential(&sps).unwrap();
    let dir = std::env::temp_dir().join("specfactor-acceptance");
    std::fs::create_dir_all(&dir).unwrap();
    let csv_path = dir.join("logprimes64.csv");
    pt.write_csv(std::io::BufWriter::new(
        std::fs::File::create(&csv_path).unwrap(),
    ))
    .unwrap();
    let written = std::fs::metadata(&csv_path).unwrap().len();
    assert!(written > 10_000, "CSV too small: {written} bytes");
    assert_single_well(&pt);

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 300, "took {elapsed:?}");
    println!(
        "criterion 07 PASS: spacing deviations logp8 {dev_logp8:.1e}, logi8 {dev_logi8:.1e}, \
         16-level worst {dev16:.1e}; 64-level single-well CSV emitted ({written} bytes), {elapsed:?}"
    );
}

/// Gross single-well morphology: central minimum, flanks that climb to a
/// flat asymptote once smoothed over the level-imprint oscillations.
///
/// Multi-level inverse-spectral potentials are intrinsically oscillatory
/// (each prescribed level leaves a lump; near-degenerate levels park far
/// from the origin), so strict pointwise monotonicity is not a property of
/// the true curve at this depth. The smoothed envelope must never descend
/// by more than a quarter of the well depth on its way out.
fn assert_single_well(pt: &specfactor::susy::PotentialTable) {
    let v = pt.values();
    let h = pt.grid().step();
    let window = ((2.0 / h).round() as usize).max(1) | 1;
    let smoothed: Vec<f64> = v
        .windows(window)
        .map(|w| w.iter().sum::<f64>() / window as f64)
        .collect();

    let (arg_min, &min) = smoothed
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let edge = v[0].max(v[v.len() - 1]);
    let depth = edge - min;
    assert!(depth > 1.0, "no well: depth {depth}");

    // minimum sits in the central third
    let n = smoothed.len();
    assert!(
        arg_min > n / 3 && arg_min < 2 * n / 3,
        "well minimum off-center: index {arg_min} of {n}"
    );

    // flanks: running maximum never gives back more than 25% of the depth
    let worst_descent = |values: &mut dyn Iterator<Item = f64>| -> f64 {
        let mut run = f64::NEG_INFINITY;
        let mut worst = 0.0f64;
        for value in values {
            run = run.max(value);
            worst = worst.max(run - value);
        }
        worst
    };
    let left = worst_descent(&mut smoothed[..=arg_min].iter().rev().copied());
    let right = worst_descent(&mut smoothed[arg_min..].iter().copied());
    assert!(
        left < 0.25 * depth && right < 0.25 * depth,
        "flank descends by {left:.3}/{right:.3} against depth {depth:.3}"
    );

    // flat asymptote over the outermost unit of x
    let band = ((1.0 / h).round() as usize).min(v.len() - 1);
    let flat = (v[v.len() - 1] - v[v.len() - 1 - band]).abs();
    assert!(flat < 1e-6 * depth.max(1.0), "asymptote not flat: {flat}");
}

#[test]
fn criterion_08_lloyd_structure_and_equivalence() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(88);

    for level_count in 2usize..=5 {
        let targets = log_primes(level_count);
        let grid = Grid::with_step_exponent(12.0, 11).unwrap();
        let sps = build_superpotentials(&targets, grid, &RealizationOptions::raw()).unwrap();
        let m = sps.ladder_size();
        assert_eq!(m, level_count - 1);

        // structure: strictly lower triangle zero, diagonal -W_a, exactly
        let system = LloydSystem::from_superpotentials(&sps);
        let w: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
        let f = system.f(&w);
        for (a, row) in f.iter().enumerate() {
            assert_eq!(row[a], -w[a]);
            for &below in &row[..a] {
                assert_eq!(below, 0.0);
            }
        }

        let report = equivalence_experiment(&sps, 1e-4).unwrap();
        if report.reference_form_holds() {
            assert_eq!(
                m, 1,
                "the reference entry rule only closes for a single equation"
            );
        } else {
            // the discrepancy report must identify the consistent variant
            assert_eq!(
                report.satisfied,
                vec![LloydVariant::LowerPairSign],
                "M = {m}"
            );
            assert!(report.lines.iter().any(|l| l.contains("discrepancy")));
        }
        for line in &report.lines {
            println!("  {line}");
        }
    }
    println!(
        "criterion 08 PASS: f upper-triangular with diagonal -W_a exactly; residual \
         experiment certifies the pair-sign lower-triangular variant below 1e-4 \
         (reference entry rule holds only at M = 1)"
    );
}

#[test]
fn criterion_09_goldbach_desk_check() {
    let start = Instant::now();
    let report = goldbach_check(100, 5).unwrap();
    assert!(report.all_covered(), "uncovered: {:?}", report.uncovered());
    assert_eq!(report.entries.len(), 49);

    let two_copy = goldbach_check(4, 3).unwrap().two_copy;
    assert_eq!(two_copy.pair_count, 8 * 9 / 2);
    assert!(two_copy.exact_products, "products must recover exactly");
    assert!(
        two_copy.max_abs_dev <= 1e-12,
        "energy identity dev {}",
        two_copy.max_abs_dev
    );

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "criterion 09 PASS: every even in [4,100] decomposes over the 2^5 table; \
         two-copy spectrum matches products to {:.1e} (exact integers), {elapsed:?}",
        two_copy.max_abs_dev
    );
}

#[test]
fn criterion_10_window_preparation_mean() {
    let table = PrimeTable::for_cutoff_exponent(8).unwrap();
    let weight = (1.0f64 / 5.0).sqrt();
    let weights = [weight; 5];
    let runs = 10_000u64;
    let total: u64 = (0..runs)
        .map(|seed| {
            prepare_from_window(100, 2, &weights, &table, seed)
                .unwrap()
                .0
        })
        .sum();
    let mean = total as f64 / runs as f64;
    assert!((mean - 5.0).abs() < 0.2, "mean iterations {mean}");
    println!(
        "criterion 10 PASS: uniform width-5 window halts after {mean:.3} iterations on average"
    );
}
