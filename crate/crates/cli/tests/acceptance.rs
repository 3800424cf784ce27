//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured quantities. Run with
//! `cargo test -p teledense-cli --test acceptance -- --nocapture`.

use std::time::Instant;

use teledense::dense::{
    accessible_info_bounds, accessible_info_bounds_df, accessible_info_of_measurement,
    classical_correlation_fidelity, transition_matrix,
};
use teledense::optim::{
    maximize_teleportation_fidelity, optimal_discrimination, pretty_good_measurement, succ_prob,
    Ensemble,
};
use teledense::qcore::linalg;
use teledense::random::Rng;
use teledense::synth::{synthesize, SynthesisInput};
use teledense::teleport::{
    classical_protocol, classical_protocol_with_resource, entanglement_fidelity, random_protocol,
    standard_protocol, TeleportProtocol,
};
use teledense::witness::{
    processed_werner_min_eig, qutrit_to_qubit_channel, reduction_check, werner_state,
};
use teledense::{rng_from_seed, Channel, DensityOp, SystemDims};

fn both_fidelities(p: &TeleportProtocol) -> (f64, f64) {
    let (f_disc, _) = p.fidelity_via_discrimination().unwrap();
    let ch = p.teleportation_channel().unwrap();
    let f_chan = entanglement_fidelity(&ch).unwrap();
    (f_disc, f_chan)
}

/// Criterion 1: the identity between the channel fidelity and the scaled
/// discrimination probability on 100 seeded random protocols.
#[test]
fn criterion_01_identity_on_random_protocols() {
    let start = Instant::now();
    let mut rng = rng_from_seed(104729);
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let dim_a = rng.gen_range(1..=3);
        let dim_b = rng.gen_range(1..=3);
        let dim_c = rng.gen_range(1..=3);
        let n = rng.gen_range(1..=9);
        let p = random_protocol(dim_a, dim_b, dim_c, n, &mut rng).unwrap();
        let (f_disc, p_succ) = p.fidelity_via_discrimination().unwrap();
        let ch = p.teleportation_channel().unwrap();
        let f_chan = entanglement_fidelity(&ch).unwrap();
        let via_p = n as f64 / (dim_c * dim_c) as f64 * p_succ;
        let residual = (f_chan - f_disc).abs().max((f_chan - via_p).abs());
        assert!(
            residual <= 1e-9,
            "trial {trial}: residual {residual:.3e} exceeds 1e-9"
        );
        worst = worst.max(residual);
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "runtime {elapsed:?} exceeds 10 s"
    );
    println!(
        "[acceptance] criterion 01 (fidelity identity, 100 protocols): PASS \
         (worst residual {worst:.3e}, {elapsed:?})"
    );
}

/// Criterion 2: the perfect protocol at d = 2, 3 and its dense-coding dual.
#[test]
fn criterion_02_perfect_protocol() {
    for d in [2usize, 3] {
        let p = standard_protocol(d).unwrap();
        let (f_disc, f_chan) = both_fidelities(&p);
        assert!((f_disc - 1.0).abs() <= 1e-9, "d={d}: F = {f_disc}");
        assert!((f_chan - 1.0).abs() <= 1e-9);
        let w = transition_matrix(&p).unwrap();
        assert_eq!(w.n(), d * d);
        for i in 0..w.n() {
            for j in 0..w.n() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (w.entry(i, j) - want).abs() <= 1e-9,
                    "d={d}: transition ({i},{j}) = {}",
                    w.entry(i, j)
                );
            }
        }
        let f_cl = classical_correlation_fidelity(&w);
        assert!((f_cl - 1.0).abs() <= 1e-9);
    }
    println!("[acceptance] criterion 02 (perfect protocol d=2,3; identity transitions): PASS");
}

/// Criterion 3: the measure-and-prepare protocol hits exactly 1/|C| for
/// any resource state.
#[test]
fn criterion_03_classical_floor() {
    let mut rng = rng_from_seed(7919);
    for dim_c in 2..=5usize {
        for trial in 0..10 {
            let dims = SystemDims::new([("A", 1 + trial % 3), ("B", 1 + (trial / 3) % 3)]).unwrap();
            let rho = teledense::random::random_density(&dims, &mut rng).unwrap();
            let p = classical_protocol_with_resource(&rho, dim_c).unwrap();
            let (f, _) = p.fidelity_via_discrimination().unwrap();
            assert!(
                (f - 1.0 / dim_c as f64).abs() <= 1e-12,
                "dim_c={dim_c} trial={trial}: F = {f}"
            );
        }
    }
    println!("[acceptance] criterion 03 (classical floor 1/|C|, |C| in 2..=5): PASS");
}

/// Criterion 4: the processed Werner threshold at -3/7 and the closed-form
/// eigenvalue branch. The normalization audit (direct eigensolve of the
/// displayed operator) fixes the prefactor of the branch at 1/48.
#[test]
fn criterion_04_werner_threshold_and_closed_form() {
    let start = Instant::now();

    // sign change within 1e-6 of -3/7 by bisection
    let mut lo = -1.0f64;
    let mut hi = 0.0f64;
    assert!(processed_werner_min_eig(lo).unwrap() < 0.0);
    assert!(processed_werner_min_eig(hi).unwrap() > 0.0);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if processed_werner_min_eig(mid).unwrap() < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    assert!(
        (root - (-3.0 / 7.0)).abs() <= 1e-6,
        "threshold at {root}, expected -3/7"
    );

    // audited scaled identity on a 201-point grid over [-1, 1/3], the
    // range on which the branch is the smallest eigenvalue
    let lo_l = -1.0;
    let hi_l = 1.0 / 3.0;
    let mut worst = 0.0f64;
    for k in 0..201 {
        let lambda = lo_l + (hi_l - lo_l) * k as f64 / 200.0;
        let scaled = 48.0 * processed_werner_min_eig(lambda).unwrap();
        let form = 7.0 + 3.0 * lambda - (13.0 - 30.0 * lambda + 37.0 * lambda * lambda).sqrt();
        let diff = (scaled - form).abs();
        assert!(
            diff <= 1e-8,
            "lambda={lambda}: 48*min_eig = {scaled} vs closed form {form}"
        );
        worst = worst.max(diff);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "runtime {elapsed:?} exceeds 5 s");
    println!(
        "[acceptance] criterion 04 (threshold -3/7; 48x scaled closed form on 201-pt grid): PASS \
         (audit: prefactor is 1/48, worst grid residual {worst:.3e}, {elapsed:?})"
    );
}

/// Criterion 5: the constructive protocol from the Werner witness.
#[test]
fn criterion_05_synthesis_from_werner_witness() {
    let rho = werner_state(3, -1.0).unwrap();
    let channel = qutrit_to_qubit_channel();
    let omega = DensityOp::from_herm(channel.apply(rho.herm(), "B").unwrap()).unwrap();
    let report = reduction_check(&omega, &["A"]).unwrap();
    assert!(report.violated);
    let input = SynthesisInput::new(rho, channel, report.witness.unwrap(), 2).unwrap();
    let built = synthesize(input).unwrap();

    let n = built.protocol.message_count();
    assert_eq!(n, 2 + built.r, "N = |C| + r");
    let resid = built.protocol.povm().completeness_residual();
    assert!(resid <= 1e-10, "POVM completeness residual {resid:.3e}");
    let (f_disc, f_chan) = both_fidelities(&built.protocol);
    assert!(f_disc > 0.5, "F = {f_disc} not above 1/2");
    assert!((f_disc - f_chan).abs() <= 1e-9);
    println!(
        "[acceptance] criterion 05 (synthesis: N = 2 + {}, POVM residual {resid:.1e}, \
         F = {f_disc:.6} > 1/2, paths agree): PASS",
        built.r
    );
}

/// Criterion 6: the dimension bound |A|/|C| across generated protocols and
/// the two documented saturation cases.
#[test]
fn criterion_06_dimension_bound() {
    let mut rng = rng_from_seed(2718);
    let mut checked = 0usize;
    let mut check = |p: &TeleportProtocol| {
        let (f, _) = p.fidelity_via_discrimination().unwrap();
        let (bound, _) = p.dim_bound_check().unwrap();
        assert!(f <= bound + 1e-9, "F = {f} above bound {bound}");
        checked += 1;
    };

    for trial in 0..40 {
        let dim_a = 1 + trial % 3;
        let dim_b = 1 + (trial / 3) % 3;
        let dim_c = 1 + (trial / 9) % 3;
        let n = 1 + trial % 6;
        let p = random_protocol(dim_a, dim_b, dim_c, n, &mut rng).unwrap();
        check(&p);
    }
    check(&standard_protocol(2).unwrap());
    check(&standard_protocol(3).unwrap());
    for dim_c in 2..=4 {
        check(&classical_protocol(2, dim_c).unwrap());
    }
    {
        let rho = werner_state(3, -1.0).unwrap();
        let channel = qutrit_to_qubit_channel();
        let omega = DensityOp::from_herm(channel.apply(rho.herm(), "B").unwrap()).unwrap();
        let report = reduction_check(&omega, &["A"]).unwrap();
        let input = SynthesisInput::new(rho, channel, report.witness.unwrap(), 2).unwrap();
        check(&synthesize(input).unwrap().protocol);
    }

    // documented saturation cases
    let p = classical_protocol(1, 3).unwrap();
    let (bound, saturated) = p.dim_bound_check().unwrap();
    assert!((bound - 1.0 / 3.0).abs() < 1e-12);
    assert!(saturated, "|A| = 1 classical case must saturate");
    let p = standard_protocol(2).unwrap();
    let (bound, saturated) = p.dim_bound_check().unwrap();
    assert!((bound - 1.0).abs() < 1e-12);
    assert!(saturated, "perfect protocol must saturate");

    println!(
        "[acceptance] criterion 06 (F <= |A|/|C| on {checked} protocols; both saturation cases): PASS"
    );
}

/// Criterion 7: the see-saw never lifts a PPT resource above the classical
/// fidelity, and the fidelity-form information bound stays at log2(d).
/// This validates no-false-positive behavior of a heuristic lower bound.
#[test]
fn criterion_07_ppt_ceiling() {
    let mut rng = rng_from_seed(31415);
    let dim_c = 2usize;
    let n = 4usize;
    let mut states: Vec<DensityOp> = Vec::new();
    // separable fixtures
    let dims22 = SystemDims::new([("A", 2usize), ("B", 2usize)]).unwrap();
    let dims23 = SystemDims::new([("A", 2usize), ("B", 3usize)]).unwrap();
    states.push(teledense::random::random_separable(&dims22, 1, &mut rng).unwrap());
    states.push(teledense::random::random_separable(&dims23, 3, &mut rng).unwrap());
    let d22 = dims22.total();
    states.push(
        DensityOp::new(
            dims22.clone(),
            linalg::identity(d22).scale(1.0 / d22 as f64),
        )
        .unwrap(),
    );
    for i in 0..17 {
        let dims = if i % 2 == 0 { &dims22 } else { &dims23 };
        if i % 3 == 0 {
            states.push(teledense::random::random_separable(dims, 4, &mut rng).unwrap());
        } else {
            states.push(teledense::random::random_ppt(dims, 1e-4, &mut rng).unwrap());
        }
    }
    assert_eq!(states.len(), 20);

    let mut worst_f = 0.0f64;
    let mut worst_info = 0.0f64;
    for (i, rho) in states.iter().enumerate() {
        let res = maximize_teleportation_fidelity(rho, dim_c, n, 8, 30, 1000 + i as u64, None)
            .unwrap();
        assert!(
            res.value <= 1.0 / dim_c as f64 + 1e-6,
            "state {i}: see-saw F = {} above classical ceiling",
            res.value
        );
        worst_f = worst_f.max(res.value);
        // fidelity-form upper bound at the achieved point
        let p_succ = res.value * (dim_c * dim_c) as f64 / n as f64;
        let bounds = accessible_info_bounds_df(dim_c, res.value, p_succ).unwrap();
        assert!(
            bounds.upper <= (dim_c as f64).log2() + 1e-6,
            "state {i}: info bound {} above log2 d",
            bounds.upper
        );
        worst_info = worst_info.max(bounds.upper);
    }
    println!(
        "[acceptance] criterion 07 (PPT ceiling, 20 states x 8 restarts: max F {worst_f:.9} \
         <= 0.5 + 1e-6, max info bound {worst_info:.9} <= 1 + 1e-6): PASS"
    );
}

/// Criterion 8: the Fano / min-entropy sandwich around the information of
/// the certified optimal measurement, plus both collapse cases.
#[test]
fn criterion_08_information_sandwich() {
    let mut rng = rng_from_seed(1123);
    for trial in 0..50 {
        let n = 2 + trial % 5; // 2..=6
        let d = 2 + (trial / 5) % 5; // 2..=6
        let dims = SystemDims::single("Q", d).unwrap();
        let states: Vec<DensityOp> = (0..n)
            .map(|_| teledense::random::random_density(&dims, &mut rng).unwrap())
            .collect();
        let ens = Ensemble::uniform(states).unwrap();
        let res = optimal_discrimination(&ens).unwrap();
        assert!(res.gap <= 1e-6);
        let bounds = accessible_info_bounds(n, res.p_star).unwrap();
        let info = accessible_info_of_measurement(&ens, &res.povm).unwrap();
        assert!(
            bounds.lower - 1e-9 <= info && info <= bounds.upper + 1e-9,
            "trial {trial}: I = {info} outside [{}, {}]",
            bounds.lower,
            bounds.upper
        );
    }

    // p = 1 collapse: orthogonal ensemble
    let dims = SystemDims::single("Q", 4).unwrap();
    let states: Vec<DensityOp> = (0..4)
        .map(|i| {
            let mut v = linalg::CVec::zeros(4);
            v[i] = linalg::c(1.0, 0.0);
            teledense::PureState::new(dims.clone(), v).unwrap().density()
        })
        .collect();
    let ens = Ensemble::uniform(states).unwrap();
    let res = optimal_discrimination(&ens).unwrap();
    assert!((res.p_star - 1.0).abs() <= 1e-6);
    let bounds = accessible_info_bounds(4, res.p_star).unwrap();
    let info = accessible_info_of_measurement(&ens, &res.povm).unwrap();
    assert!((bounds.lower - 2.0).abs() <= 1e-5);
    assert!((bounds.upper - 2.0).abs() <= 1e-5);
    assert!((info - 2.0).abs() <= 1e-5);

    // p = 1/N collapse: identical states
    let s = teledense::random::random_density(&dims, &mut rng).unwrap();
    let ens = Ensemble::uniform(vec![s.clone(), s.clone(), s.clone(), s]).unwrap();
    let res = optimal_discrimination(&ens).unwrap();
    let bounds = accessible_info_bounds(4, res.p_star).unwrap();
    let info = accessible_info_of_measurement(&ens, &res.povm).unwrap();
    assert!(bounds.upper.abs() <= 1e-5, "upper = {}", bounds.upper);
    assert!(info.abs() <= 1e-5);

    println!(
        "[acceptance] criterion 08 (information sandwich, 50 ensembles + collapse cases): PASS"
    );
}

/// Criterion 9: Monte-Carlo check of the average-fidelity relation
/// `(F d + 1)/(d + 1)` for three reference qubit channels.
#[test]
fn criterion_09_average_fidelity_monte_carlo() {
    let start = Instant::now();
    let d = 2usize;
    let dims = SystemDims::single("C'", d).unwrap();
    let channels = [
        Channel::identity(d, "C'", "C").unwrap(),
        Channel::depolarizing(d, d, "C'", "C").unwrap(),
        Channel::measure_prepare(d, "C'", "C").unwrap(),
    ];
    let mut rng = rng_from_seed(8191);
    for (name, ch) in ["identity", "depolarizing", "measure-prepare"]
        .iter()
        .zip(channels.iter())
    {
        let f = entanglement_fidelity(ch).unwrap();
        let predicted = teledense::teleport::average_fidelity(f, d).unwrap();
        let samples = 100_000usize;
        let mut sum = 0.0f64;
        let mut sum_sq = 0.0f64;
        for _ in 0..samples {
            let psi = teledense::random::random_pure(&dims, &mut rng).unwrap();
            let rho = psi.density();
            let out = ch.apply_raw(rho.matrix());
            let val = (psi.vector().adjoint() * &out * psi.vector())[(0, 0)].re;
            sum += val;
            sum_sq += val * val;
        }
        let mean = sum / samples as f64;
        let var = (sum_sq / samples as f64 - mean * mean).max(0.0);
        let se = (var / samples as f64).sqrt();
        let dev = (mean - predicted).abs();
        assert!(
            dev <= 3.0 * se + 1e-12,
            "{name}: mean {mean} vs predicted {predicted} (3 SE = {:.3e})",
            3.0 * se
        );
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 30.0,
        "runtime {elapsed:?} exceeds 30 s"
    );
    println!(
        "[acceptance] criterion 09 (Haar-averaged fidelity, 3 channels x 1e5 samples): PASS \
         ({elapsed:?})"
    );
}

/// Criterion 10: the discrimination solver against the analytic two-state
/// value, with its dual certificate and the square-root-measurement bound.
#[test]
fn criterion_10_discrimination_solver() {
    let mut rng = rng_from_seed(65537);
    let dims = SystemDims::single("Q", 2).unwrap();
    let mut worst = 0.0f64;
    for trial in 0..50 {
        let a = teledense::random::random_pure(&dims, &mut rng).unwrap().density();
        let b = teledense::random::random_pure(&dims, &mut rng).unwrap().density();
        let overlap = linalg::trace_product(a.matrix(), b.matrix()).re;
        let analytic = 0.5 * (1.0 + (1.0 - overlap).max(0.0).sqrt());
        let ens = Ensemble::uniform(vec![a, b]).unwrap();
        let res = optimal_discrimination(&ens).unwrap();
        let dev = (res.p_star - analytic).abs();
        assert!(
            dev <= 1e-6,
            "trial {trial}: solver {} vs analytic {analytic}",
            res.p_star
        );
        assert!(res.gap <= 1e-6, "trial {trial}: gap {}", res.gap);
        let pgm = pretty_good_measurement(&ens).unwrap();
        let p_pgm = succ_prob(&ens, &pgm).unwrap();
        assert!(
            p_pgm <= res.p_star + 1e-8,
            "trial {trial}: PGM {p_pgm} beats certified optimum {}",
            res.p_star
        );
        worst = worst.max(dev);
    }
    println!(
        "[acceptance] criterion 10 (Helstrom x50, dual gap <= 1e-6, PGM <= optimum): PASS \
         (worst deviation {worst:.3e})"
    );
}

/// Criterion 11: a fixed-seed sweep is byte-identical across reruns.
#[test]
fn criterion_11_deterministic_reports() {
    let bin = env!("CARGO_BIN_EXE_teledense");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let mut outputs: Vec<Vec<u8>> = Vec::new();
    for _ in 0..2 {
        let status = std::process::Command::new(bin)
            .args([
                "werner-sweep",
                "--lambda-min",
                "-1",
                "--lambda-max",
                "0",
                "--step",
                "0.02",
                "--seed",
                "13",
                "--out",
            ])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "sweep outputs differ between runs");
    assert!(!outputs[0].is_empty());
    println!(
        "[acceptance] criterion 11 (byte-identical werner-sweep, {} bytes): PASS",
        outputs[0].len()
    );
}
