use std::sync::Arc;

use varwave::field::{JetField, SharedField};
use varwave::mappings::{apply_point, invert_point, push_forward_nonlocal, MappingId, NonlocalMapping, PointMapping};
use varwave::solutions::{
    dalembert, general_solution_n1, general_solution_n2, general_solution_quadratic, SolutionPair,
};
use varwave::verify::standard_pool;

fn pairs() -> Vec<SolutionPair> {
    standard_pool(11, 5)
}

#[test]
fn quadratic_closed_form_is_pulled_back_dalembert() {
    let q = PointMapping::q();
    for pair in pairs() {
        let closed = general_solution_quadratic(pair.clone());
        let via_q = apply_point(&invert_point(&q), Arc::new(dalembert(pair)));
        for &(x, t) in &[(0.6, -0.8), (1.0, 0.0), (1.7, 0.4), (2.0, 0.9)] {
            let (a, b) = (closed.jet_at(x, t).unwrap(), via_q.jet_at(x, t).unwrap());
            for (u, v) in a.partials().iter().zip(b.partials().iter()) {
                assert!((u - v).abs() <= 1e-11 * (1.0 + u.abs()), "({x}, {t}): {u} vs {v}");
            }
        }
    }
}

/// Ratio of the push-forward to the closed form at several points.
fn ratios(closed: &dyn JetField, pushed: &SharedField, pts: &[(f64, f64)]) -> Vec<f64> {
    pts.iter()
        .map(|&(x, big_t)| pushed.value_at(x, big_t).unwrap() / closed.value_at(x, big_t).unwrap())
        .collect()
}

#[test]
fn nonlocal_closed_forms_match_push_forwards_up_to_a_constant() {
    let cases = [
        (NonlocalMapping::n1(), [(0.7, 1.5), (1.2, 3.0), (1.9, 6.0)], -1.0 / 27.0),
        (NonlocalMapping::n2(), [(0.7, 0.1), (1.2, 0.3), (1.9, 0.8)], -1.0),
    ];
    for (n, pts, want) in cases {
        for pair in pairs() {
            let u: SharedField = Arc::new(general_solution_quadratic(pair.clone()));
            let pushed = push_forward_nonlocal(&n, u);
            let closed: Box<dyn JetField> = match n.id {
                MappingId::N1 => Box::new(general_solution_n1(pair)),
                _ => Box::new(general_solution_n2(pair)),
            };
            for r in ratios(closed.as_ref(), &pushed, &pts) {
                assert!((r - want).abs() <= 1e-10, "{}: ratio {r}, expected {want}", n.id);
            }
        }
    }
}
