use proptest::prelude::*;
use skdv::parse_config;

const BASE: &str = "\
grid.n = 64
grid.length = 40
model.alpha = -1
model.beta = 1
model.gamma = -1
integrator.dt = 0.01
integrator.t_final = 1
initial.kind = gaussian
";

fn num() -> impl Strategy<Value = f64> {
    prop_oneof![-5.0f64..5.0, (-20i32..20, 1i32..13).prop_map(|(p, q)| p as f64 / q as f64)]
}

proptest! {
    #[test]
    fn canonical_text_is_a_fixed_point(
        alpha in num(), beta in num(), gamma in num(),
        k in 0.1f64..3.0, kind in 0usize..4, dealias: bool,
    ) {
        let initial = [
            "initial.kind = gaussian\ninitial.v_shape = gaussian",
            "initial.kind = soliton\ninitial.c_star = 0.5",
            "initial.kind = snapshot\ninitial.path = some/file.skdv",
            "initial.kind = expression\ninitial.u_re = exp(-x^2)\ninitial.v = 0.5*sech(x)^2",
        ][kind];
        let text = BASE
            .replace("initial.kind = gaussian", initial)
            .replace("model.alpha = -1", &format!("model.alpha = {alpha}"))
            .replace("model.beta = 1", &format!("model.beta = {beta}"))
            .replace("model.gamma = -1", &format!("model.gamma = {gamma}"))
            + &format!("monitor.k = {k}\nintegrator.dealias = {dealias}\n");
        let Ok(cfg) = parse_config(&text) else { return Ok(()) };
        let once = cfg.to_text();
        let again = parse_config(&once).unwrap();
        prop_assert_eq!(&again, &cfg);
        prop_assert_eq!(again.to_text(), once);
    }
}

#[test]
fn default_mu_follows_the_couplings() {
    let c = parse_config(&BASE.replace("model.gamma = -1", "model.gamma = -0.25")).unwrap();
    assert_eq!(c.virial.mu, 0.25);
    let c = parse_config(&(BASE.to_owned() + "virial.theta = 2\n")).unwrap();
    assert_eq!(c.virial.mu, 2.0);
}

#[test]
fn expression_errors_point_at_the_key() {
    let text = BASE.replace("initial.kind = gaussian", "initial.kind = expression\ninitial.v = exp(");
    let err = parse_config(&text).unwrap_err().to_string();
    assert!(err.starts_with("initial.v"), "{err}");
}
