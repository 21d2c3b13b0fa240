use ctp_core::numeric::{q, Cost, Rational};
use ctp_core::policy::{evaluate_exact, reference_policy, run_on_weather, Action};
use ctp_core::reductions::{
    compute_certificate, d_pt_construction, d_pt_weather, exam_harness, has_vertex_cover,
    named_graph, normalize_half_prob, qbf_to_ctp, qbf_to_ctpdep, vc_to_sensing, DEFAULT_PRECISION,
};
use ctp_core::solve::{qbf_eval, solve_dependent, solve_independent, solve_sensing, QbfFormula};

fn formula(n: usize, text: &str) -> QbfFormula {
    QbfFormula::from_clause_text(n, text).unwrap()
}

#[test]
fn dependent_first_move_follows_the_formula() {
    let cases = [
        (2, "1 2|-1 -2"),
        (2, "1|2"),
        (2, "1 2"),
        (2, "2|-2"),
        (4, "1 2|3 4|-1 -2"),
        (4, "1 3|2 4|-4"),
    ];
    let mut truths = Vec::new();
    for (n, text) in cases {
        let f = formula(n, text);
        let truth = qbf_eval(&f);
        truths.push(truth);
        let r = qbf_to_ctpdep(&f, None).unwrap();
        let inst = &r.instance;
        let opt = solve_dependent(inst).unwrap();
        let expected = if truth { "sv1" } else { "st" };
        assert_eq!(
            opt.optimal_first_action,
            Some(Action::Move(inst.edge_id(expected).unwrap())),
            "{text}"
        );
        if truth {
            assert_eq!(opt.optimal_cost, Cost::zero(), "{text}");
        } else {
            assert_eq!(opt.optimal_cost, Cost::Finite(r.h.clone()), "{text}");
        }
    }
    assert!(truths.contains(&true) && truths.contains(&false));
}

#[test]
fn assignment_policy_is_free_on_true_formulas() {
    let f = formula(2, "1 2|-1 -2");
    let inst = qbf_to_ctpdep(&f, None).unwrap().instance;
    let policy = reference_policy(
        "ctpdep_assignment",
        &[("clauses", &f.clause_text()), ("n", "2")],
    )
    .unwrap();
    assert_eq!(
        evaluate_exact(&inst, &policy).unwrap().expected_cost,
        Cost::zero()
    );
}

#[test]
fn ctp_construction_counts() {
    let f = formula(2, "1 2");
    let r = qbf_to_ctp(&f).unwrap();
    let inst = &r.instance;
    let (n, m) = (2usize, 1usize);
    // L = 24: N = 127, the 3L/2 gadget has N1 = 255.
    let (bn, bn1) = (127usize, 255usize);
    let bg_edges = 2 * bn + 3;
    let og_vertices = 5 + 2 * bn + bn1;
    let og_edges = 2 * bg_edges + (2 * bn1 + 3) + 5;
    let dead_ends = 2;
    let vertices = 2
        + (1 + 5 * (m + 1))
        + n
        + n * (1 + 2 * m * (2 + og_vertices))
        + dead_ends
        + (n - 1) * bn
        + 2
        + (m + 2) * bn;
    let edges = 2
        + (2 + 5 * (m + 1))
        + n * (2 + 2 * m + 2 * m * og_edges)
        + (n - 1) * bg_edges
        + 2
        + (m + 2) * bg_edges;
    assert_eq!(inst.vertex_count(), vertices);
    assert_eq!(inst.edge_count(), edges);
    assert_eq!(r.certificate.vertices, Some(vertices));
    let p1 = q(63, 64);
    for &e in inst.uncertain_edges() {
        let p = &inst.edge(e).blocking_prior;
        assert!(
            *p == Rational::half() || *p == q(3, 4) || *p == p1,
            "{}",
            inst.edge_name(e)
        );
    }
    assert_eq!(
        inst.edge(inst.edge_id("st").unwrap()).cost,
        Cost::Finite(r.certificate.h.clone())
    );
}

#[test]
fn true_path_trip_cost() {
    for (n, m, text) in [(2, 1, "1 2"), (2, 2, "1 2|-1 -2"), (4, 2, "1 2 3|-2 4")] {
        let f = formula(n, text);
        let r = qbf_to_ctp(&f).unwrap();
        let inst = &r.instance;
        let policy = reference_policy("ctp_true_path", &[("at_r0", "stop")]).unwrap();
        let run = run_on_weather(inst, &policy, &d_pt_weather(inst)).unwrap();
        assert_eq!(run.cost, Cost::Finite(d_pt_construction(n, m)), "{text}");
        assert!(run.label.contains("r0"), "{}", run.label);
    }
    assert_eq!(
        compute_certificate(2, 2).unwrap().d_pt,
        d_pt_construction(2, 2)
    );
}

#[test]
fn exam_policy_is_optimal_on_the_harness() {
    let inst = exam_harness(1).unwrap();
    let opt = solve_independent(&inst).unwrap();
    let policy = reference_policy("exam", &[]).unwrap();
    assert_eq!(
        evaluate_exact(&inst, &policy).unwrap().expected_cost,
        opt.optimal_cost
    );
    assert_eq!(
        opt.optimal_first_action,
        Some(Action::Move(inst.edge_id("r0t").unwrap()))
    );
}

#[test]
fn sensing_moves_to_t_iff_no_cover() {
    for (name, k) in [("p3", 1), ("k3", 1)] {
        let vc = named_graph(name, k).unwrap();
        let r = vc_to_sensing(&vc, &q(1, 2), DEFAULT_PRECISION).unwrap();
        let inst = &r.instance;
        let opt = solve_sensing(inst).unwrap();
        let st = Action::Move(inst.edge_id("st").unwrap());
        assert_eq!(
            opt.optimal_first_action == Some(st),
            !has_vertex_cover(&vc),
            "{name}"
        );
        assert!(r.certificate.holds());
    }
}

#[test]
fn cover_policy_senses_for_free() {
    let vc = named_graph("p3", 1).unwrap();
    let inst = vc_to_sensing(&vc, &q(1, 2), DEFAULT_PRECISION)
        .unwrap()
        .instance;
    let policy = reference_policy("vc_cover", &[("cover", "b")]).unwrap();
    let run = run_on_weather(&inst, &policy, &inst.sample_weather(7)).unwrap();
    let senses: Vec<&str> = run
        .actions
        .iter()
        .filter_map(|(_, a)| match a {
            Action::Sense(e) => Some(inst.edge_name(*e)),
            _ => None,
        })
        .take(2)
        .collect();
    assert_eq!(senses, vec!["c.a-b", "c.b-c"]);
    let opt = solve_sensing(&inst).unwrap();
    assert!(evaluate_exact(&inst, &policy).unwrap().expected_cost >= opt.optimal_cost);
}

#[test]
fn normalized_toy_keeps_its_value() {
    let mut b = ctp_core::InstanceBuilder::new();
    let s = b.add_vertex("s");
    let a = b.add_vertex("a");
    let t = b.add_vertex("t");
    b.add_uncertain("sa", s, a, q(0, 1), q(7, 8));
    b.add_uncertain("at", a, t, q(2, 1), q(1, 4));
    b.add_sure("st", s, t, q(3, 1));
    b.set_source(s);
    b.set_target(t);
    let inst = b.build().unwrap();
    let out = normalize_half_prob(&inst).unwrap();
    assert_eq!(
        solve_independent(&out).unwrap().optimal_cost,
        solve_independent(&inst).unwrap().optimal_cost
    );
}
