//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Reference values are computed here from independent formulas,
//! not from the library's closed forms.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use qchan_core::channels::CPTP_TOL;
use qchan_core::holevo::{amplitude_pair, splaying_pair};
use qchan_core::qlinalg::{IDENTITY_2, PAULIS};
use qchan_core::{
    audit_channel, bloch_to_density, capacity_amplitude_scan, capacity_closed_form,
    capacity_splaying_scan, eigenvalue_formulas, eigenvalues_hermitian, holevo_chi, make_channel,
    optimize_ensemble, validate_cptp, von_neumann_entropy, BlochVector, ChannelKind, DensityMatrix,
    Ensemble, OptimizerConfig, ScanGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

/// Binary entropy, written out independently of the library.
fn h2(x: f64) -> f64 {
    let term = |p: f64| {
        if p <= 0.0 {
            0.0
        } else {
            -p * p.ln() / std::f64::consts::LN_2
        }
    };
    term(x) + term(1.0 - x)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Debug>(err: E) -> String {
    format!("{err:?}")
}

fn random_state(rng: &mut ChaCha8Rng) -> DensityMatrix {
    let r: f64 = rng.random_range(0.0..=1.0);
    let z: f64 = rng.random_range(-1.0..=1.0);
    let w = BlochVector::from_angles(z.acos(), rng.random_range(0.0..TAU))
        .components()
        .map(|x| r * x);
    bloch_to_density(&BlochVector::new(w).unwrap()).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let eta = k as f64 / 99.0;
        let r = capacity_closed_form(ChannelKind::Depolarizing, eta).map_err(e)?;
        worst = worst.max((r.value_bits - (1.0 - h2(2.0 * eta / 3.0))).abs());
    }
    ensure(worst < 1e-12, || format!("closed form off by {worst:e}"))?;
    let mut gaps = Vec::new();
    for eta in [0.1, 0.3, 0.5] {
        let ch = make_channel(ChannelKind::Depolarizing, eta).map_err(e)?;
        let r = optimize_ensemble(&ch, 2, &OptimizerConfig::default()).map_err(e)?;
        let gap = (r.capacity.value_bits - (1.0 - h2(2.0 * eta / 3.0))).abs();
        ensure(gap <= 1e-5, || format!("optimizer gap {gap:e} at η={eta}"))?;
        gaps.push(gap);
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(5), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "closed form max err {worst:.1e}; max optimizer gap {:.1e}; {:.2}s",
        gaps.iter().cloned().fold(0.0, f64::max),
        elapsed.as_secs_f64()
    ))
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let eta = k as f64 / 19.0;
        let closed = capacity_closed_form(ChannelKind::Erasure, eta).map_err(e)?;
        ensure((closed.value_bits - (1.0 - eta)).abs() < 1e-15, || {
            format!("closed form {} at η={eta}", closed.value_bits)
        })?;
        let ch = make_channel(ChannelKind::Erasure, eta).map_err(e)?;
        ensure(ch.dim_out() == 3, || {
            "erasure output is not 3-dimensional".into()
        })?;
        let ens = Ensemble::uniform(vec![
            DensityMatrix::pure_qubit(0.0, 0.0),
            DensityMatrix::pure_qubit(PI, 0.0),
        ])
        .map_err(e)?;
        let chi = holevo_chi(&ch, &ens).map_err(e)?;
        let expected = (1.0 - eta) + h2(eta) - h2(eta);
        worst = worst.max((chi - expected).abs());
    }
    ensure(worst < 1e-10, || format!("χ off by {worst:e}"))?;
    Ok(format!("20 points, max |χ − (1−η)| = {worst:.1e}"))
}

fn criterion_3() -> Outcome {
    let kinds = [
        ChannelKind::PhaseDamping,
        ChannelKind::BitFlip,
        ChannelKind::BitPhaseFlip,
        ChannelKind::PhaseFlip,
    ];
    for kind in kinds {
        for k in 0..=20 {
            let eta = k as f64 / 20.0;
            let r = capacity_closed_form(kind, eta).map_err(e)?;
            ensure(r.value_bits == 1.0, || {
                format!("{kind} η={eta}: {}", r.value_bits)
            })?;
            let ch = make_channel(kind, eta).map_err(e)?;
            let chi = holevo_chi(&ch, &r.ensemble).map_err(e)?;
            ensure((chi - 1.0).abs() < 1e-12, || {
                format!("{kind} η={eta}: achieving ensemble gives {chi}")
            })?;
        }
    }
    for k in 0..=10 {
        let eta = k as f64 / 10.0;
        let s = eigenvalue_formulas(ChannelKind::PhaseDamping, eta, 0.0).map_err(e)?;
        ensure(s.alpha == (1.0, 0.0), || {
            format!("α = {:?} at η={eta}", s.alpha)
        })?;
    }
    let mut worst: f64 = 0.0;
    for kind in kinds {
        for eta in [0.3, 0.7] {
            let ch = make_channel(kind, eta).map_err(e)?;
            let r = optimize_ensemble(&ch, 2, &OptimizerConfig::default()).map_err(e)?;
            worst = worst.max((r.capacity.value_bits - 1.0).abs());
        }
    }
    ensure(worst <= 1e-6, || format!("optimizer off by {worst:e}"))?;
    Ok(format!("all 1 bit; optimizer max deviation {worst:.1e}"))
}

fn criterion_4() -> Outcome {
    let theta_grid: Vec<f64> = (0..=2000).map(|k| FRAC_PI_2 * k as f64 / 2000.0).collect();
    let mut worst: f64 = 0.0;
    for k in 1..=100 {
        let eta = k as f64 / 101.0;
        let formula = if eta < 2.0 / 3.0 {
            1.0 - h2(eta / 2.0)
        } else {
            1.0 - h2(eta)
        };
        let closed = capacity_closed_form(ChannelKind::TwoPauli, eta).map_err(e)?;
        ensure((closed.value_bits - formula).abs() < 1e-12, || {
            format!("closed form {} vs {formula} at η={eta}", closed.value_bits)
        })?;
        let ch = make_channel(ChannelKind::TwoPauli, eta).map_err(e)?;
        let mut best = f64::NEG_INFINITY;
        for &theta in &theta_grid {
            let ens = Ensemble::uniform(vec![
                DensityMatrix::pure_qubit(theta, 0.0),
                DensityMatrix::pure_qubit(theta + PI, 0.0),
            ])
            .map_err(e)?;
            best = best.max(holevo_chi(&ch, &ens).map_err(e)?);
        }
        worst = worst.max((best - formula).abs());
    }
    ensure(worst < 1e-6, || format!("θ-grid max differs by {worst:e}"))?;

    let eta = 2.0 / 3.0;
    let (lower, upper) = (1.0 - h2(eta / 2.0), 1.0 - h2(eta));
    ensure((lower - upper).abs() < 1e-12, || {
        format!("branches {lower} vs {upper}")
    })?;
    ensure((lower - 0.081_704).abs() < 5e-7, || {
        format!("breakpoint value {lower}")
    })?;

    for k in 0..=10 {
        let eta = k as f64 / 10.0;
        let s = eigenvalue_formulas(ChannelKind::TwoPauli, eta, FRAC_PI_2).map_err(e)?;
        let want = (0.5 + 0.5 * (1.0 - eta), 0.5 - 0.5 * (1.0 - eta));
        ensure(
            (s.alpha.0 - want.0).abs() < 1e-15 && (s.alpha.1 - want.1).abs() < 1e-15,
            || format!("θ=π/2 eigenvalues {:?} vs {want:?}", s.alpha),
        )?;
    }
    Ok(format!(
        "θ-grid vs piecewise max err {worst:.1e}; breakpoint {lower:.6}"
    ))
}

fn amplitude_reference(eta: f64) -> f64 {
    h2((1.0 - eta) / 2.0) - h2((1.0 - (1.0 - eta + eta * eta).sqrt()) / 2.0)
}

fn criterion_5() -> Outcome {
    let mut worst: f64 = 0.0;
    for eta in [0.0, 0.1, 0.25, 0.5, 0.75, 0.9] {
        let r = capacity_amplitude_scan(eta, &ScanGrid::default()).map_err(e)?;
        let p = r.params.ok_or("scan reported no argmax")?;
        let err = (r.value_bits - amplitude_reference(eta)).abs();
        ensure(err < 1e-6, || {
            format!("η={eta}: scan {} off by {err:e}", r.value_bits)
        })?;
        ensure(
            (p.psi - PI).abs() < 1e-3 && (p.tau - 0.5).abs() < 1e-3,
            || format!("η={eta}: argmax ψ={} τ={}", p.psi, p.tau),
        )?;
        worst = worst.max(err);
    }

    let mut spread: f64 = 0.0;
    for eta in [0.2, 0.5, 0.8] {
        let ch = make_channel(ChannelKind::AmplitudeDamping, eta).map_err(e)?;
        let mut values = Vec::new();
        for i in 0..20 {
            for j in 0..20 {
                let psi = TAU * i as f64 / 20.0;
                let tau = j as f64 / 19.0;
                let (a, b) = amplitude_pair(psi);
                let sa = von_neumann_entropy(&ch.apply(&a).map_err(e)?);
                let sb = von_neumann_entropy(&ch.apply(&b).map_err(e)?);
                values.push((1.0 - tau) * sa + tau * sb);
            }
        }
        let (lo, hi) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        spread = spread.max(hi - lo);
    }
    ensure(spread < 1e-12, || {
        format!("per-state entropy spread {spread:e}")
    })?;

    let at0 = capacity_closed_form(ChannelKind::AmplitudeDamping, 0.0)
        .map_err(e)?
        .value_bits;
    let at1 = capacity_closed_form(ChannelKind::AmplitudeDamping, 1.0)
        .map_err(e)?
        .value_bits;
    ensure(at0 == 1.0 && at1 == 0.0, || {
        format!("endpoints {at0}, {at1}")
    })?;
    let scan0 = capacity_amplitude_scan(0.0, &ScanGrid::default())
        .map_err(e)?
        .value_bits;
    let scan1 = capacity_amplitude_scan(1.0, &ScanGrid::default())
        .map_err(e)?
        .value_bits;
    ensure((scan0 - 1.0).abs() < 1e-12 && scan1.abs() < 1e-12, || {
        format!("scan endpoints {scan0}, {scan1}")
    })?;
    Ok(format!(
        "scan max err {worst:.1e}; entropy spread {spread:.1e}"
    ))
}

fn criterion_6() -> Outcome {
    let scan = capacity_splaying_scan(&ScanGrid::default()).map_err(e)?;
    let best = scan.capacity.value_bits;
    let psi = scan.capacity.params.ok_or("no argmax")?.psi;
    let orth = scan.orthogonal.value_bits;
    ensure((orth - 0.268_277).abs() <= 1e-5, || {
        format!("orthogonal value {orth}")
    })?;
    ensure((best - 0.268_673).abs() <= 1e-4, || {
        format!("maximum {best}")
    })?;
    ensure((psi - 3.20359).abs() <= 5e-3, || {
        format!("argmax ψ′ = {psi}")
    })?;
    ensure(best > orth, || {
        format!("maximum {best} ≤ orthogonal {orth}")
    })?;

    let ch = make_channel(ChannelKind::Splaying, 0.0).map_err(e)?;
    let (first, _) = splaying_pair(PI);
    let ev = eigenvalues_hermitian(ch.apply(&first).map_err(e)?.matrix()).map_err(e)?;
    ensure(
        (ev[0] - 5.0 / 6.0).abs() < 1e-14 && (ev[1] - 1.0 / 6.0).abs() < 1e-14,
        || format!("first-output eigenvalues {ev:?}"),
    )?;
    Ok(format!(
        "orthogonal {orth:.6}, max {best:.6} at ψ′={psi:.5}, advantage {:.2e}",
        best - orth
    ))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    let mut twirl: f64 = 0.0;
    for _ in 0..500 {
        let rho = random_state(&mut rng);
        let mut sum = *rho.matrix();
        for s in PAULIS {
            sum = sum + s * *rho.matrix() * s;
        }
        twirl = twirl.max(sum.max_abs_diff(&IDENTITY_2.scale(2.0)));
    }
    ensure(twirl < 1e-12, || format!("Pauli identity off by {twirl:e}"))?;

    let etas: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    for kind in ChannelKind::CATALOG {
        for &eta in &etas {
            let ch = make_channel(kind, eta).map_err(e)?;
            validate_cptp(ch.kraus()).map_err(|err| format!("{kind} η={eta}: {err}"))?;
        }
    }

    let mut affine: f64 = 0.0;
    for kind in ChannelKind::CATALOG
        .into_iter()
        .filter(|k| *k != ChannelKind::Erasure)
    {
        let eta = rng.random_range(0.0..=1.0);
        let ch = make_channel(kind, eta).map_err(e)?;
        let map = ch.affine_representation().map_err(e)?;
        for _ in 0..200 {
            let z: f64 = rng.random_range(-1.0..=1.0);
            let w = BlochVector::from_angles(z.acos(), rng.random_range(0.0..TAU));
            let via_kraus = ch.apply(&bloch_to_density(&w).map_err(e)?).map_err(e)?;
            let image = BlochVector::new(map.apply(&w)).map_err(e)?;
            let via_affine = bloch_to_density(&image).map_err(e)?;
            affine = affine.max(via_kraus.matrix().max_abs_diff(via_affine.matrix()));
        }
    }
    ensure(affine < 1e-12, || format!("Kraus vs affine {affine:e}"))?;

    use ChannelKind::*;
    for (kind, unital) in [
        (Depolarizing, true),
        (PhaseDamping, true),
        (BitFlip, true),
        (BitPhaseFlip, true),
        (PhaseFlip, true),
        (TwoPauli, true),
        (AmplitudeDamping, false),
        (Splaying, false),
    ] {
        let ch = make_channel(kind, 0.4).map_err(e)?;
        let got = ch.is_unital().map_err(e)?;
        ensure(got == unital, || format!("{kind} unital = {got}"))?;
        let shift = ch.affine_representation().map_err(e)?.shift;
        let zero_shift = shift.iter().all(|t| t.abs() <= CPTP_TOL);
        ensure(zero_shift == unital, || format!("{kind} t = {shift:?}"))?;
    }
    ensure(
        make_channel(Erasure, 0.4).map_err(e)?.is_unital().is_err(),
        || "erasure unitality should be undefined".into(),
    )?;

    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..1000 {
        let kind = ChannelKind::CATALOG[rng.random_range(0..ChannelKind::CATALOG.len())];
        let ch = make_channel(kind, rng.random_range(0.0..=1.0)).map_err(e)?;
        let n = rng.random_range(1..=4);
        let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0) + 1e-3).collect();
        let total: f64 = weights.iter().sum();
        let entries = weights
            .iter()
            .map(|w| (w / total, random_state(&mut rng)))
            .collect();
        let chi = holevo_chi(&ch, &Ensemble::new(entries).map_err(e)?).map_err(e)?;
        let cap = (ch.dim_out() as f64).log2();
        ensure((-1e-10..=cap + 1e-10).contains(&chi), || {
            format!("{kind}: χ = {chi}")
        })?;
        lo = lo.min(chi);
        hi = hi.max(chi);
    }

    let cfg = OptimizerConfig::default();
    let ch = make_channel(AmplitudeDamping, 0.5).map_err(e)?;
    let a = optimize_ensemble(&ch, 3, &cfg).map_err(e)?;
    let b = optimize_ensemble(&ch, 3, &cfg).map_err(e)?;
    ensure(
        a == b && a.capacity.value_bits.to_bits() == b.capacity.value_bits.to_bits(),
        || "two runs with the same seed differ".into(),
    )?;

    let mut min_step = f64::INFINITY;
    for kind in ChannelKind::CATALOG {
        for eta in [0.2, 0.5, 0.8] {
            let ch = make_channel(kind, eta).map_err(e)?;
            let two = optimize_ensemble(&ch, 2, &cfg)
                .map_err(e)?
                .capacity
                .value_bits;
            let three = optimize_ensemble(&ch, 3, &cfg)
                .map_err(e)?
                .capacity
                .value_bits;
            ensure(three >= two - 1e-10, || {
                format!("{kind} η={eta}: n=3 {three} < n=2 {two}")
            })?;
            min_step = min_step.min(three - two);
        }
    }
    Ok(format!(
        "twirl {twirl:.1e}; affine {affine:.1e}; χ ∈ [{lo:.2e}, {hi:.4}]; min n-step {min_step:.1e}"
    ))
}

fn criterion_8() -> Outcome {
    use ChannelKind::*;
    let cfg = OptimizerConfig::default();
    let mut lines = Vec::new();
    for kind in [
        Depolarizing,
        Erasure,
        PhaseDamping,
        BitFlip,
        BitPhaseFlip,
        PhaseFlip,
        TwoPauli,
        AmplitudeDamping,
        Splaying,
    ] {
        let report = audit_channel(kind, &[0.2, 0.5, 0.8], &cfg).map_err(e)?;
        for row in &report.rows {
            ensure(!row.falls_short(), || {
                format!(
                    "{kind} η={:?}: optimizer {} below reference {}",
                    row.eta, row.optimizer_n2, row.reference_bits
                )
            })?;
        }
        if kind == Splaying {
            let row = &report.rows[0];
            let orth = row.orthogonal_bits.ok_or("no orthogonal value")?;
            ensure(orth < row.reference_bits, || {
                "orthogonal pair not beaten".into()
            })?;
        }
        for row in report.exceedances() {
            lines.push(format!(
                "{kind} η={}: optimizer {:.6} > reference {:.6} (+{:.2e})",
                row.eta.map_or("-".into(), |x| format!("{x}")),
                row.optimizer_n2.max(row.optimizer_n3),
                row.reference_bits,
                row.gap()
            ));
        }
    }
    for line in &lines {
        println!("      exceedance: {line}");
    }
    Ok(format!(
        "no shortfalls; {} exceedance(s) recorded",
        lines.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("depolarizing closed form and optimizer", criterion_1),
        ("erasure capacity 1 − η", criterion_2),
        ("phase damping and flip channels at 1 bit", criterion_3),
        ("two-Pauli piecewise capacity", criterion_4),
        ("amplitude damping restricted scan", criterion_5),
        ("splaying channel scan", criterion_6),
        ("property suites", criterion_7),
        ("optimizer audit", criterion_8),
    ];
    let mut failed = 0;
    for (idx, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{}] {name} ({secs:.2}s): {detail}", idx + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {name} ({secs:.2}s): {why}", idx + 1);
            }
        }
    }
    if failed == 0 {
        println!("acceptance: all {} criteria passed", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of {} criteria failed", criteria.len());
        ExitCode::FAILURE
    }
}
