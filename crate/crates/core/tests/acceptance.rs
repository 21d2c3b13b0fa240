//! One line per acceptance criterion; the test fails if any criterion does.
//! Run with `cargo test -p ctp-core --test acceptance -- --nocapture`.

use std::time::Instant;

use ctp_core::gadgets::{baiting_c_pi, baiting_c_pi_j, baiting_harness, BaitingParams};
use ctp_core::model::random;
use ctp_core::policy::{
    evaluate_by_weathers, evaluate_exact, reference_policy, run_on_weather, simulate, Action,
};
use ctp_core::reductions::{
    certificate, compute_certificate, d_pt_weather, exam_p1, named_graph, normalize_half_prob,
    qbf_to_ctp, qbf_to_ctpdep, vc_to_sensing, DEFAULT_PRECISION,
};
use ctp_core::solve::{
    qbf_eval, solve_dependent, solve_disjoint_bruteforce, solve_independent, solve_sensing,
    QbfFormula,
};
use ctp_core::{q, Cost, Rational, DEFAULT_ENUMERATION_CAP};

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn int(n: usize) -> Rational {
    Rational::integer(n as i64)
}

fn reduction_l(m: usize) -> Rational {
    int(8 * m + 16)
}

fn c1_baiting_optimal() -> Verdict {
    for l in [q(3, 2), q(2, 1)] {
        let inst = baiting_harness(&l).map_err(|e| e.to_string())?;
        let expected = Cost::Finite(baiting_c_pi(&l, &l).map_err(|e| e.to_string())?);
        let r = solve_independent(&inst).map_err(|e| e.to_string())?;
        let first = Some(Action::Move(inst.edge_id("bg.e0").unwrap()));
        if r.optimal_cost != expected || r.optimal_first_action != first {
            return Err(format!(
                "L = {l}: solver {} vs formula {}",
                r.optimal_cost, expected
            ));
        }
    }
    Ok("L = 3/2 and 2: optimum equals C(pi) and starts along the path".into())
}

fn c2_baiting_chain() -> Verdict {
    let mut checked = 0;
    for m in 1..=8 {
        let l = reduction_l(m);
        let n = BaitingParams::new(&l).unwrap().n;
        let c = baiting_c_pi(&l, &l).unwrap();
        if c >= q(3, 4) {
            return Err(format!("m = {m}: C(pi) = {c} is not below 3/4"));
        }
        for j in 1..=n {
            let cj = baiting_c_pi_j(&l, j, &Rational::one()).unwrap();
            if c >= cj {
                return Err(format!("m = {m}, j = {j}: C(pi) >= C(pi_j)"));
            }
            checked += 1;
        }
    }
    Ok(format!("m = 1..8, {checked} (m, j) pairs"))
}

fn c3_observation_inequalities() -> Verdict {
    for m in 1..=8 {
        let l = reduction_l(m);
        let l1 = &l * &q(5, 8);
        let p1 = exam_p1(&l);
        let three_halves = &l * &q(3, 2);
        let two_l1 = &l1 * &int(2);
        let c_prime = &l1 + &int(2);
        let oks = [
            &two_l1 + &int(2) < three_halves,
            three_halves < &(&two_l1 + &(&l1 * &q(3, 4))) + &l1,
            p1 > &Rational::one() - &(&int(2) / &(&(&l * &int(3)) + &Rational::one())),
            c_prime < &Rational::one() + &(&p1 * &(&Rational::one() + &c_prime)),
        ];
        if let Some(i) = oks.iter().position(|ok| !ok) {
            return Err(format!("m = {m}: inequality {} fails", i + 1));
        }
    }
    Ok("m = 1..8, four inequalities each".into())
}

fn c4_dependent_reduction() -> Verdict {
    let cases = [
        (2, "1 2|-1 -2"),
        (2, "1|2"),
        (2, "2|-2"),
        (4, "1 2|3 4|-1 -2"),
        (4, "1 3|2 4|-4"),
        (4, "1 2 3|-2 4|-1 -3 -4"),
        (4, "1 3|2 -4|-1 4"),
    ];
    let (mut sat, mut unsat) = (0, 0);
    for (n, text) in cases {
        let f = QbfFormula::from_clause_text(n, text).map_err(|e| e.to_string())?;
        let truth = qbf_eval(&f);
        let r = qbf_to_ctpdep(&f, None).map_err(|e| e.to_string())?;
        let opt = solve_dependent(&r.instance).map_err(|e| e.to_string())?;
        let want = r
            .instance
            .edge_id(if truth { "sv1" } else { "st" })
            .unwrap();
        let cost_ok = !truth || opt.optimal_cost == Cost::zero();
        if opt.optimal_first_action != Some(Action::Move(want)) || !cost_ok {
            return Err(format!(
                "{text} (n = {n}, {truth}): cost {} first {:?}",
                opt.optimal_cost, opt.optimal_first_action
            ));
        }
        if truth {
            sat += 1;
        } else {
            unsat += 1;
        }
    }
    check(
        sat > 0 && unsat > 0,
        format!("{} formulas, {sat} true and {unsat} false", cases.len()),
    )
}

fn c5_certificates() -> Verdict {
    let mut failures = Vec::new();
    for n in (2..=8).step_by(2) {
        for m in 1..=8 {
            let c = compute_certificate(n, m).map_err(|e| e.to_string())?;
            let offset = &(&q(1, 4).pow(n as u32 / 2) * &int(m)) * &c.p_r0;
            if &c.h - &c.b0 != offset {
                return Err(format!("(n, m) = ({n}, {m}): h - B0 is off"));
            }
            if certificate(n, m).is_err() {
                failures.push(format!("({n},{m})"));
            }
        }
    }
    let sample = compute_certificate(2, 1).unwrap();
    let ratio = (&sample.h - &sample.b0) / (&sample.b1 - &sample.b0);
    check(
        failures.is_empty(),
        format!(
            "h - B0 exact everywhere; B0 < h < B1 fails for {} of 32 pairs, e.g. (2,1) has (h-B0)/(B1-B0) = {}",
            failures.len(),
            ratio.to_decimal(4)
        ),
    )
}

fn c6_trip_cost() -> Verdict {
    let mut lines = Vec::new();
    let mut ok = true;
    for (n, m, text) in [(2, 1, "1 2"), (2, 2, "1 2|-1 -2"), (4, 2, "1 2 3|-2 4")] {
        let f = QbfFormula::from_clause_text(n, text).unwrap();
        let r = qbf_to_ctp(&f).map_err(|e| e.to_string())?;
        let policy = reference_policy("ctp_true_path", &[("at_r0", "stop")]).unwrap();
        let run = run_on_weather(&r.instance, &policy, &d_pt_weather(&r.instance))
            .map_err(|e| e.to_string())?;
        let want = Cost::Finite(r.certificate.d_pt.clone());
        ok &= run.cost == want;
        lines.push(format!("({n},{m}) walk {} formula {}", run.cost, want));
    }
    check(ok, lines.join(", "))
}

fn c7_sensing_reduction() -> Verdict {
    let mut lines = Vec::new();
    for (name, expect_default) in [("p3", false), ("k3", true)] {
        let vc = named_graph(name, 1).unwrap();
        let r = vc_to_sensing(&vc, &q(1, 2), DEFAULT_PRECISION).map_err(|e| e.to_string())?;
        let opt = solve_sensing(&r.instance).map_err(|e| e.to_string())?;
        let st = Action::Move(r.instance.edge_id("st").unwrap());
        let is_default = opt.optimal_first_action == Some(st);
        let c = &r.certificate;
        if is_default != expect_default || !c.g1_lb.is_positive() || !c.g2_ub.is_negative() {
            return Err(format!(
                "{name}: first {:?}, g'_lb {}, g''_ub {}",
                opt.optimal_first_action, c.g1_lb, c.g2_ub
            ));
        }
        let first = opt
            .optimal_first_action
            .map(|a| a.describe(&r.instance, r.instance.source()))
            .unwrap_or_default();
        lines.push(format!("{name}: {first}"));
    }
    Ok(lines.join(", "))
}

fn c8_normalization() -> Verdict {
    for i in 0..20 {
        let inst = random::toy(800 + i as u64, 3 + i % 4, true);
        let out = normalize_half_prob(&inst).map_err(|e| e.to_string())?;
        let fair = out.uncertain_edges().iter().all(|&e| {
            let spec = out.edge(e);
            spec.cost == Cost::zero() && spec.blocking_prior == Rational::half()
        });
        let a = solve_independent(&inst)
            .map_err(|e| e.to_string())?
            .optimal_cost;
        let b = solve_independent(&out)
            .map_err(|e| e.to_string())?
            .optimal_cost;
        if !fair || a != b {
            return Err(format!(
                "instance {i}: {a} before, {b} after, fair coins only: {fair}"
            ));
        }
    }
    Ok("20 instances keep their optimum".into())
}

fn c9_oracles() -> Verdict {
    for i in 0..25u64 {
        let inst = random::disjoint_paths(900 + i, 4, 3);
        let brute = solve_disjoint_bruteforce(&inst)
            .map_err(|e| e.to_string())?
            .optimal_cost;
        let exact = solve_independent(&inst)
            .map_err(|e| e.to_string())?
            .optimal_cost;
        if brute != exact {
            return Err(format!(
                "disjoint instance {i}: brute force {brute}, solver {exact}"
            ));
        }
    }
    for i in 0..10 {
        let inst = random::toy(950 + i as u64, 2 + i % 4, false);
        let policy = solve_independent(&inst)
            .map_err(|e| e.to_string())?
            .as_policy();
        let a = evaluate_exact(&inst, &policy)
            .map_err(|e| e.to_string())?
            .expected_cost;
        let b = evaluate_by_weathers(&inst, &policy, DEFAULT_ENUMERATION_CAP)
            .map_err(|e| e.to_string())?
            .expected_cost;
        if a != b {
            return Err(format!("toy instance {i}: tree {a}, weathers {b}"));
        }
    }
    Ok("25 disjoint-path and 10 evaluation comparisons agree".into())
}

fn c10_simulation() -> Verdict {
    let l = q(2, 1);
    let inst = baiting_harness(&l).unwrap();
    let pi = reference_policy("baiting_pi", &[]).unwrap();
    let (mean, se) = simulate(&inst, &pi, 1_000_000, 2024).map_err(|e| e.to_string())?;
    let again = simulate(&inst, &pi, 1_000_000, 2024).map_err(|e| e.to_string())?;
    let exact = 263.0 / 512.0;
    let z = (mean - exact).abs() / se;
    check(
        z <= 4.0 && again == (mean, se),
        format!(
            "mean {mean:.6} vs {exact:.6}, {z:.2} standard errors, rerun identical: {}",
            again == (mean, se)
        ),
    )
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("baiting gadget optimum", c1_baiting_optimal),
        ("baiting inequality chain", c2_baiting_chain),
        ("observation inequalities", c3_observation_inequalities),
        ("dependent reduction end to end", c4_dependent_reduction),
        ("certificate bounds", c5_certificates),
        ("full-trip cost", c6_trip_cost),
        ("sensing reduction end to end", c7_sensing_reduction),
        ("normalization", c8_normalization),
        ("oracle equivalences", c9_oracles),
        ("simulation consistency", c10_simulation),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = run();
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("criterion {:>2} PASS {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                println!("criterion {:>2} FAIL {name} ({secs:.1}s): {detail}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
