//! Spec-file expressions evaluated against the same formulas in Rust.

use gbc_cli::expr::parse_expression;

type Native = fn(&[f64]) -> f64;

fn table() -> Vec<(&'static str, [f64; 3], Native)> {
    vec![
        ("1", [0.0, 0.0, 0.0], |_| 1.0),
        ("-2.5", [0.0, 0.0, 0.0], |_| -2.5),
        ("1e-3", [0.0, 0.0, 0.0], |_| 1e-3),
        ("x1", [0.3, 0.0, 0.0], |x| x[0]),
        ("x1 + x2", [0.3, 1.7, 0.0], |x| x[0] + x[1]),
        ("x1 - x2 - x3", [0.3, 1.7, -0.4], |x| x[0] - x[1] - x[2]),
        ("x1 * x2 / x3", [0.3, 1.7, -0.4], |x| x[0] * x[1] / x[2]),
        ("x1 / x2 / x3", [0.3, 1.7, -0.4], |x| x[0] / x[1] / x[2]),
        ("2^3^2", [0.0, 0.0, 0.0], |_| 2f64.powf(9.0)),
        ("-x1^2", [0.3, 0.0, 0.0], |x| -(x[0] * x[0])),
        ("(-x1)^2", [0.3, 0.0, 0.0], |x| x[0] * x[0]),
        ("x1^-1", [0.3, 0.0, 0.0], |x| 1.0 / x[0]),
        ("x1^0.5", [0.3, 0.0, 0.0], |x| x[0].sqrt()),
        ("2*x1^2 + 3*x1 + 1", [0.7, 0.0, 0.0], |x| 2.0 * x[0] * x[0] + 3.0 * x[0] + 1.0),
        ("sin(x1)", [0.3, 0.0, 0.0], |x| x[0].sin()),
        ("cos(x2)", [0.3, 1.7, 0.0], |x| x[1].cos()),
        ("exp(x3)", [0.3, 1.7, -0.4], |x| x[2].exp()),
        ("log(x2)", [0.3, 1.7, -0.4], |x| x[1].ln()),
        ("sqrt(x2)", [0.3, 1.7, -0.4], |x| x[1].sqrt()),
        ("sin(x1)*cos(x2)", [0.3, 1.7, 0.0], |x| x[0].sin() * x[1].cos()),
        ("exp(0.6*sin(x1)*cos(x2))", [0.3, 1.7, 0.0], |x| (0.6 * x[0].sin() * x[1].cos()).exp()),
        ("exp(0.6*cos(x3)*sin(x1))", [2.1, 0.2, 5.0], |x| (0.6 * x[2].cos() * x[0].sin()).exp()),
        ("4/(1 + x1^2 + x2^2)^2", [0.3, -0.2, 0.0], |x| 4.0 / (1.0 + x[0] * x[0] + x[1] * x[1]).powi(2)),
        ("4/(1 + x1^2 + x2^2)^2", [3.0, 4.0, 0.0], |x| 4.0 / (1.0 + x[0] * x[0] + x[1] * x[1]).powi(2)),
        ("1.2*sin(x1)*cos(x2)", [1.1, 2.2, 0.0], |x| 1.2 * x[0].sin() * x[1].cos()),
        ("-1.2*sin(x1)*cos(x2)", [1.1, 2.2, 0.0], |x| -1.2 * x[0].sin() * x[1].cos()),
        ("0.3*(1 + 0.5*sin(x1))", [4.0, 0.0, 0.0], |x| 0.3 * (1.0 + 0.5 * x[0].sin())),
        ("sin(cos(exp(x1)))", [0.4, 0.0, 0.0], |x| x[0].exp().cos().sin()),
        ("sqrt(x1^2 + x2^2)", [3.0, 4.0, 0.0], |x| (x[0] * x[0] + x[1] * x[1]).sqrt()),
        ("log(exp(x1))", [0.9, 0.0, 0.0], |x| x[0].exp().ln()),
        ("exp(-x1^2/2)", [1.3, 0.0, 0.0], |x| (-x[0] * x[0] / 2.0).exp()),
        ("1/(2 + sin(x1 + x2))", [0.3, 5.1, 0.0], |x| 1.0 / (2.0 + (x[0] + x[1]).sin())),
        ("x1*x2*x3", [-1.5, 2.5, 0.5], |x| x[0] * x[1] * x[2]),
        ("(x1 + x2)*(x1 - x2)", [2.5, 1.5, 0.0], |x| (x[0] + x[1]) * (x[0] - x[1])),
        ("--x1", [0.8, 0.0, 0.0], |x| x[0]),
        ("x1 - -x2", [0.8, 0.3, 0.0], |x| x[0] + x[1]),
        ("2*-x1", [0.8, 0.0, 0.0], |x| -2.0 * x[0]),
        ("x1^2^0.5", [0.8, 0.0, 0.0], |x| x[0].powf(2f64.sqrt())),
        ("(x1^2)^0.5", [0.8, 0.0, 0.0], |x| x[0]),
        ("cos(x1)^2 + sin(x1)^2", [1.234, 0.0, 0.0], |x| x[0].cos().powi(2) + x[0].sin().powi(2)),
        ("exp(x1)*exp(x2)", [0.2, 0.9, 0.0], |x| x[0].exp() * x[1].exp()),
        ("1 + 2*3 - 4/5", [0.0, 0.0, 0.0], |_| 1.0 + 6.0 - 0.8),
        ("  x1\t+\n x2 ", [0.2, 0.9, 0.0], |x| x[0] + x[1]),
        ("3.5e2*x1", [0.01, 0.0, 0.0], |x| 350.0 * x[0]),
        (".5*x1", [0.8, 0.0, 0.0], |x| 0.5 * x[0]),
        ("sin(2*x1)*cos(3*x2)*exp(0.1*x3)", [0.6, -0.3, 2.0], |x| (2.0 * x[0]).sin() * (3.0 * x[1]).cos() * (0.1 * x[2]).exp()),
        ("log(1 + x1^2)", [-2.0, 0.0, 0.0], |x| (1.0 + x[0] * x[0]).ln()),
        ("sqrt(sqrt(x1))", [16.0, 0.0, 0.0], |x| x[0].sqrt().sqrt()),
        ("x3/(x1*x2)", [0.5, 4.0, 3.0], |x| x[2] / (x[0] * x[1])),
        ("exp(0.6*sin(x1)*cos(x2))*exp(0.6*cos(x3)*sin(x1))", [0.5, 1.0, 1.5], |x| {
            (0.6 * x[0].sin() * x[1].cos()).exp() * (0.6 * x[2].cos() * x[0].sin()).exp()
        }),
    ]
}

#[test]
fn fifty_expressions_match_native() {
    let rows = table();
    assert_eq!(rows.len(), 50);
    for (text, x, native) in rows {
        let e = parse_expression(text, 3).unwrap_or_else(|err| panic!("{text}: {err}"));
        let got = e.eval(&x).unwrap();
        let want = native(&x);
        assert!((got - want).abs() <= 1e-14 * want.abs().max(1.0), "{text} at {x:?}: {got} vs {want}");
    }
}

#[test]
fn display_round_trips() {
    for (text, x, _) in table() {
        let e = parse_expression(text, 3).unwrap();
        let again = parse_expression(&e.to_string(), 3).unwrap();
        assert_eq!(e.eval(&x).unwrap().to_bits(), again.eval(&x).unwrap().to_bits(), "{text}");
    }
}

#[test]
fn error_positions() {
    let e = parse_expression("1 +\n  sin(x4)", 3).unwrap_err();
    assert_eq!((e.line, e.column), (2, 7));
    let e = parse_expression("x1 + tan(x1)", 3).unwrap_err();
    assert_eq!((e.line, e.column), (1, 6));
    let e = parse_expression("(x1", 3).unwrap_err();
    assert_eq!((e.line, e.column), (1, 4));
    let e = parse_expression("x1 $ 2", 3).unwrap_err();
    assert_eq!((e.line, e.column), (1, 4));
}
