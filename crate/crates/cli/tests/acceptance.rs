//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use fockmeas::hilbert::{coherent_state, density_view};
use fockmeas::kernel::{kraus_diagonal, two_mode_kraus, Label, SystemParams, TwoModeParams};
use fockmeas::metrics::{
    asymptotic_success, bell_fidelity_closed_form, fock_fidelity_closed_form, fock_success_closed_form,
    superposed_fidelity_closed_form, FidelityCurve,
};
use fockmeas::oracle::{jc_propagator_oracle, qutrit_propagator_oracle, QutritLevel};
use fockmeas::protocol::run_postselected_multi;
use fockmeas::schedule::{
    build_schedule, initial_amplitude, prepare, simulate_strategy, stabilized_indices, tau_bell,
    tau_excited, tau_ground, Couplings, Prepared, StrategySpec, TargetSpec,
};
use fockmeas_cli::config::{Mode, RunConfig, StrategyConfig, TargetConfig};
use fockmeas_cli::presets::{list_presets, run_preset};
use fockmeas_cli::run;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = (bool, String);

fn qubit() -> Couplings {
    Couplings::Qubit(SystemParams::resonant(0.05))
}

fn qutrit() -> Couplings {
    Couplings::Qutrit(TwoModeParams::resonant(0.05, 0.03))
}

fn curve(target: TargetSpec, strategy: StrategySpec) -> FidelityCurve {
    let couplings = if target.is_two_mode() { qutrit() } else { qubit() };
    simulate_strategy(&target, &strategy, &couplings, None).expect("simulation runs")
}

fn swap(l: usize, q: usize, switch_after: usize, cycles: usize) -> StrategySpec {
    StrategySpec::hybrid_swap(l, q, switch_after, TwoModeParams::resonant(0.05, 0.03), cycles)
}

fn first_plus(c: &FidelityCurve, thr: f64) -> Option<usize> {
    c.points.iter().find(|p| p.fidelity >= thr).map(|p| p.cycle)
}

fn first_best(c: &FidelityCurve, thr: f64) -> Option<usize> {
    c.points.iter().find(|p| p.best() >= thr).map(|p| p.cycle)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let qubit_worst = (0..200u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + i);
            let p = SystemParams {
                g: rng.random_range(0.01..=0.1),
                delta: rng.random_range(0.0..=0.05),
            };
            let tau = rng.random_range(1.0..=100.0);
            let u = jc_propagator_oracle(tau, &p, 40).unwrap();
            let mut worst: f64 = 0.0;
            for label in [Label::Excited, Label::Ground] {
                let v = kraus_diagonal(label, tau, &p, 40);
                for k in 0..39 {
                    for kp in 0..39 {
                        let want = if k == kp { v.coeffs[k] } else { C64::new(0.0, 0.0) };
                        worst = worst.max((u.element((label, kp), (label, k)) - want).norm());
                    }
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    let qutrit_worst = (0..200u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(5000 + i);
            let p = TwoModeParams {
                g_a: rng.random_range(0.01..=0.1),
                g_b: rng.random_range(0.01..=0.1),
                delta: rng.random_range(0.0..=0.05),
            };
            let tau = rng.random_range(1.0..=100.0);
            let u = qutrit_propagator_oracle(tau, &p, (12, 12)).unwrap();
            let v = two_mode_kraus(tau, &p, (12, 12));
            let mut worst: f64 = 0.0;
            for k in 0..12 {
                for kp in 0..12 {
                    let el = u.element((QutritLevel::G, k, kp), (QutritLevel::G, k, kp));
                    worst = worst.max((el - v.coeff(k, kp)).norm());
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    (
        qubit_worst < 1e-9 && qutrit_worst < 1e-9 && secs < 30.0,
        format!("qubit max dev {qubit_worst:.2e}, qutrit max dev {qutrit_worst:.2e}, {secs:.1} s"),
    )
}

fn criterion_2() -> Outcome {
    let f15 = curve(TargetSpec::Fock(5), StrategySpec::hybrid(3, 5, 15)).at(15).fidelity;
    let f20 = curve(TargetSpec::Fock(5), StrategySpec::uniform(20)).at(20).fidelity;
    (
        f15 >= 0.996 && (f20 - 0.686).abs() <= 0.01,
        format!("S_3^(5) F(15) = {f15:.5}; uniform F(20) = {f20:.5}"),
    )
}

fn criterion_3() -> Outcome {
    let f = curve(TargetSpec::Fock(10), StrategySpec::hybrid(3, 5, 30)).at(30).fidelity;
    (f >= 0.984, format!("S_3^(5) F(30) = {f:.5}"))
}

fn criterion_4() -> Outcome {
    let n2 = first_plus(&curve(TargetSpec::Fock(2), StrategySpec::hybrid(3, 5, 40)), 0.99);
    let n8 = first_plus(&curve(TargetSpec::Fock(8), StrategySpec::hybrid(3, 5, 40)), 0.99);
    (
        n2 == Some(6) && n8.is_some_and(|n| n.abs_diff(23) <= 2),
        format!("first N with F >= 0.99: |2> at {n2:?}, |8> at {n8:?}"),
    )
}

fn criterion_5() -> Outcome {
    let t = TargetSpec::equal_superposition(5);
    let hybrid = curve(t, StrategySpec::hybrid(3, 5, 10)).at(10).fidelity;
    let uniform = curve(t, StrategySpec::uniform(10)).at(10).fidelity;
    (
        hybrid >= 0.99 && (uniform - 0.71).abs() <= 0.02,
        format!("S_3^(5) F+(10) = {hybrid:.5}; uniform F+(10) = {uniform:.5}"),
    )
}

fn criterion_6() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, want) in [(2usize, 6usize), (4, 8), (6, 14), (8, 20)] {
        let got = first_plus(&curve(TargetSpec::equal_superposition(n), StrategySpec::hybrid(3, 5, 40)), 0.99);
        ok &= got.is_some_and(|g| g.abs_diff(want) <= 1);
        parts.push(format!("n={n}: {got:?} (expected {want})"));
    }
    (ok, parts.join(", "))
}

fn criterion_7() -> Outcome {
    let fock = curve(TargetSpec::Fock(8), StrategySpec::hybrid(3, 5, 40)).at(40).success;
    let fock_ref = asymptotic_success(&TargetSpec::Fock(8));
    let sup_t = TargetSpec::equal_superposition(8);
    let sup = curve(sup_t, StrategySpec::hybrid(3, 5, 40)).at(40).success;
    let sup_ref = asymptotic_success(&sup_t);
    (
        (fock - fock_ref).abs() < 1e-3 && (sup - sup_ref).abs() < 1e-3,
        format!("P_e(40) = {fock:.6} vs {fock_ref:.6}; P_g(40) = {sup:.6} vs {sup_ref:.6}"),
    )
}

fn criterion_8() -> Outcome {
    let t = TargetSpec::equal_bell(4);
    let hybrid = curve(t, swap(3, 5, 15, 30));
    let uniform = curve(t, StrategySpec::uniform(30));
    let fh = hybrid.at(30).best();
    let fu = uniform.at(30).best();
    let p = hybrid.at(30).success;
    (
        fh >= 0.99 && (fu - 0.25).abs() <= 0.05 && (0.018..=0.035).contains(&p),
        format!("S_3^(5,15) F(30) = {fh:.5}; uniform F(30) = {fu:.4}; P_g(30) = {p:.5}"),
    )
}

fn criterion_9() -> Outcome {
    let c1 = curve(TargetSpec::equal_bell(1), swap(3, 5, 8, 40));
    let c3 = curve(TargetSpec::equal_bell(3), swap(3, 5, 8, 40));
    let n1 = first_best(&c1, 0.99);
    let n3 = first_best(&c3, 0.99);
    let (p1, p3) = (c1.at(40).success, c3.at(40).success);
    let ok = n1.is_some_and(|n| n <= 9)
        && n3.is_some_and(|n| n <= 14)
        && (p1 - 0.28).abs() <= 0.01
        && (p3 - 0.06).abs() <= 0.01;
    (
        ok,
        format!(
            "n=1 reaches 0.99 at {n1:?}, n=3 at {n3:?} (F(14) = {:.4}); P_g(40) = {p1:.4}, {p3:.4}",
            c3.at(14).best()
        ),
    )
}

fn criterion_10() -> Outcome {
    let s = coherent_state(C64::new(5f64.sqrt(), 0.0), 64).unwrap();
    let p23 = s.population(23);
    (
        (1e-6..=1e-4).contains(&p23),
        format!("p_23 = {p23:.3e} (|c_23| = {:.3e})", p23.sqrt()),
    )
}

fn criterion_11() -> Outcome {
    let mut failures = Vec::new();
    let cases = [
        (TargetSpec::Fock(5), StrategySpec::hybrid(3, 5, 40)),
        (TargetSpec::Fock(10), StrategySpec::hybrid(2, 5, 40)),
        (TargetSpec::equal_superposition(5), StrategySpec::hybrid(3, 5, 40)),
        (TargetSpec::equal_superposition(8), StrategySpec::uniform(40)),
        (TargetSpec::equal_bell(4), swap(3, 5, 15, 40)),
        (TargetSpec::equal_bell(1), StrategySpec::uniform(40)),
    ];
    for (target, strategy) in cases {
        let couplings = if target.is_two_mode() { qutrit() } else { qubit() };
        let schedule = build_schedule(&target, &strategy, &couplings).unwrap();
        let check = |entries: Vec<(f64, f64)>| {
            // (purity, success) per cycle
            let pure = entries.iter().all(|(p, _)| (p - 1.0).abs() < 1e-12);
            let mono = entries.windows(2).all(|w| w[1].1 <= w[0].1 && w[1].1 > 0.0);
            (pure, mono)
        };
        let (pure, mono) = match prepare(&target, None).unwrap() {
            Prepared::Single { initial, targets } => {
                let r = run_postselected_multi(&initial, &schedule, &targets, true).unwrap();
                check(r.entries.iter().map(|e| (density_view(e.snapshot.as_ref().unwrap()).purity(), e.success)).collect())
            }
            Prepared::TwoMode { initial, targets } => {
                let r = run_postselected_multi(&initial, &schedule, &targets, true).unwrap();
                check(r.entries.iter().map(|e| (density_view(e.snapshot.as_ref().unwrap()).purity(), e.success)).collect())
            }
        };
        if !pure {
            failures.push(format!("purity {target:?}"));
        }
        if !mono {
            failures.push(format!("monotone P {target:?}"));
        }
    }

    // parity alternation of Re C_{n0} for odd l
    for strategy in [StrategySpec::uniform(20), StrategySpec::hybrid(3, 5, 20)] {
        let target = TargetSpec::equal_superposition(5);
        let Prepared::Single { initial, targets } = prepare(&target, None).unwrap() else { unreachable!() };
        let schedule = build_schedule(&target, &strategy, &qubit()).unwrap();
        let r = run_postselected_multi(&initial, &schedule, &targets, true).unwrap();
        let signs: Vec<f64> = r
            .entries
            .iter()
            .map(|e| density_view(e.snapshot.as_ref().unwrap()).coherence(5, 0).re.signum())
            .collect();
        if !signs.windows(2).all(|w| w[1] == -w[0]) {
            failures.push(format!("parity {strategy:?}"));
        }
    }

    // closed forms against simulation on uniform schedules, N <= 60
    let p = SystemParams::resonant(0.05);
    let mut worst: f64 = 0.0;
    for n in [2, 5, 8] {
        let t = TargetSpec::Fock(n);
        let c = curve(t, StrategySpec::uniform(60));
        let alpha = initial_amplitude(&t).unwrap().alpha;
        let Prepared::Single { initial, .. } = prepare(&t, None).unwrap() else { unreachable!() };
        let tau = tau_excited(n, 1, &p).unwrap();
        for pt in &c.points {
            worst = worst.max((pt.fidelity - fock_fidelity_closed_form(n, pt.cycle, tau, &p, alpha, initial.trunc_dim())).abs());
            worst = worst.max((pt.success - fock_success_closed_form(pt.cycle, tau, &p, alpha, initial.trunc_dim())).abs());
        }
        let t = TargetSpec::equal_superposition(n);
        let c = curve(t, StrategySpec::uniform(60));
        let alpha = initial_amplitude(&t).unwrap().alpha;
        let Prepared::Single { initial, .. } = prepare(&t, None).unwrap() else { unreachable!() };
        let tau = tau_ground(n, 1, &p).unwrap();
        for pt in &c.points {
            let (fp, fm, s) = superposed_fidelity_closed_form(&t, pt.cycle, tau, &p, alpha, initial.trunc_dim()).unwrap();
            worst = worst.max((pt.fidelity - fp).abs()).max((pt.fidelity_minus.unwrap() - fm).abs()).max((pt.success - s).abs());
        }
    }
    let q = TwoModeParams::resonant(0.05, 0.03);
    let t = TargetSpec::equal_bell(4);
    let c = curve(t, StrategySpec::uniform(60));
    let amp = initial_amplitude(&t).unwrap();
    let Prepared::TwoMode { initial, .. } = prepare(&t, None).unwrap() else { unreachable!() };
    let tau = tau_bell(4, 4, 1, &q).unwrap();
    for pt in &c.points {
        let (fp, fm, s) =
            bell_fidelity_closed_form(&t, pt.cycle, tau, &q, amp.alpha, amp.beta.unwrap(), initial.trunc_dims()).unwrap();
        worst = worst.max((pt.fidelity - fp).abs()).max((pt.fidelity_minus.unwrap() - fm).abs()).max((pt.success - s).abs());
    }
    if worst >= 1e-10 {
        failures.push(format!("closed form deviation {worst:.2e}"));
    }

    // p_k(N) P(N) = p_k(0) on stabilized indices
    let target = TargetSpec::Fock(5);
    let Prepared::Single { initial, targets } = prepare(&target, Some((64, 1))).unwrap() else { unreachable!() };
    let schedule = build_schedule(&target, &StrategySpec::uniform(40), &qubit()).unwrap();
    let r = run_postselected_multi(&initial, &schedule, &targets, true).unwrap();
    let mut cons: f64 = 0.0;
    for e in &r.entries {
        let s = e.snapshot.as_ref().unwrap();
        for k in stabilized_indices(5, 1, 64, Label::Excited) {
            cons = cons.max((s.population(k) * e.success - initial.population(k)).abs() / initial.population(k));
        }
    }
    if cons >= 1e-12 {
        failures.push(format!("conservation {cons:.2e}"));
    }

    (
        failures.is_empty(),
        if failures.is_empty() {
            format!("purity, monotone P, parity, closed forms (max dev {worst:.1e}), conservation (max rel {cons:.1e})")
        } else {
            failures.join("; ")
        },
    )
}

fn criterion_12() -> Outcome {
    let config = RunConfig {
        strategy: StrategyConfig::Hybrid { l: 3, q: 5 },
        cycles: 15,
        mode: Mode::Trajectories {
            n_traj: 10_000,
            seed: 2024,
            max_restarts: fockmeas::protocol::DEFAULT_MAX_RESTARTS,
        },
        ..RunConfig::minimal(TargetConfig::Fock(5))
    };
    let a = run(&config).unwrap();
    let b = run(&config).unwrap();
    let rep = a.trajectories.clone().unwrap();
    let within = (rep.acceptance_frequency - rep.success_prob).abs() < 3.0 * rep.binomial_sigma;
    let identical = a.artifacts == b.artifacts && a.trajectories == b.trajectories;
    (
        within && identical,
        format!(
            "acceptance {:.5} vs P(15) {:.5} (3σ = {:.5}, {} attempts); reruns identical: {identical}",
            rep.acceptance_frequency,
            rep.success_prob,
            3.0 * rep.binomial_sigma,
            rep.attempts
        ),
    )
}

fn csv_value(contents: &str, n: usize, column: &str) -> f64 {
    let mut lines = contents.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == column).unwrap();
    let row = lines.find(|l| l.split(',').next() == Some(&n.to_string())).unwrap();
    row.split(',').nth(col).unwrap().parse().unwrap()
}

fn criterion_13() -> Outcome {
    let start = Instant::now();
    let mut files = std::collections::BTreeMap::new();
    for name in list_presets() {
        for a in run_preset(name).unwrap().artifacts {
            files.insert(a.name, a.contents);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let f3 = csv_value(&files["fig3_fock5_S3_5.csv"], 15, "fidelity");
    let f8 = csv_value(&files["fig8_bell4_S3_5_15.csv"], 30, "fidelity_plus");
    (
        secs < 60.0 && f3 >= 0.996 && f8 >= 0.99,
        format!("{} files in {secs:.2} s; fig3 S_3^(5) F(15) = {f3}; fig8 S_3^(5,15) F(30) = {f8}", files.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("oracle equivalence", criterion_1),
        ("Fock |5> fidelities", criterion_2),
        ("Fock |10> fidelity", criterion_3),
        ("Fock |2>, |8> cycle counts", criterion_4),
        ("superposed n=5 fidelities", criterion_5),
        ("superposed n=2,4,6,8 cycle counts", criterion_6),
        ("asymptotic success", criterion_7),
        ("Bell |44> fidelities and success", criterion_8),
        ("Bell n=1,3 cycle counts and success", criterion_9),
        ("stabilized residual p_23", criterion_10),
        ("property suite", criterion_11),
        ("Monte-Carlo acceptance", criterion_12),
        ("preset suite runtime", criterion_13),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (ok, detail) = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        });
        if !ok {
            failed += 1;
        }
        println!("criterion {:>2} {} {name}: {detail}", i + 1, if ok { "PASS" } else { "FAIL" });
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
