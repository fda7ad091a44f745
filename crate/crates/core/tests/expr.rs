use khflow::expr::{Allowed, ExprError, Expression, Vars};
use proptest::prelude::*;

/// Reference tree, rendered to text and interpreted independently.
#[derive(Debug, Clone)]
enum T {
    Num(f64),
    Var(&'static str),
    Neg(Box<T>),
    Bin(char, Box<T>, Box<T>),
    Call(&'static str, Box<T>),
}

fn leaf() -> impl Strategy<Value = T> {
    prop_oneof![
        (0u32..40).prop_map(|n| T::Num(n as f64 / 4.0)),
        Just(T::Num(1.5e-1)),
        Just(T::Num(2e3)),
        prop::sample::select(vec!["x", "y", "r", "theta", "pi", "e"]).prop_map(T::Var),
    ]
}

fn tree() -> impl Strategy<Value = T> {
    leaf().prop_recursive(5, 48, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| T::Neg(Box::new(a))),
            (
                prop::sample::select(vec!['+', '-', '*', '/', '^']),
                inner.clone(),
                inner.clone()
            )
                .prop_map(|(op, a, b)| T::Bin(op, Box::new(a), Box::new(b))),
            (
                prop::sample::select(vec!["sin", "cos", "exp", "log", "sqrt", "abs"]),
                inner
            )
                .prop_map(|(f, a)| T::Call(f, Box::new(a))),
        ]
    })
}

/// Binding level of the grammar rule that produced the node.
fn level(t: &T) -> u8 {
    match t {
        T::Bin('+' | '-', ..) => 0,
        T::Bin('*' | '/', ..) => 1,
        T::Neg(_) => 2,
        T::Bin('^', ..) => 3,
        _ => 4,
    }
}

fn paren(s: String, need: bool) -> String {
    if need {
        format!("( {s} )")
    } else {
        s
    }
}

fn render(t: &T) -> String {
    match t {
        T::Num(v) => format!("{v}"),
        T::Var(v) => v.to_string(),
        T::Call(f, a) => format!("{f}({})", render(a)),
        // operand of unary minus is a factor
        T::Neg(a) => format!("-{}", paren(render(a), level(a) < 2)),
        T::Bin('^', a, b) => format!("{}^{}", paren(render(a), level(a) < 4), paren(render(b), level(b) < 2)),
        T::Bin(op @ ('*' | '/'), a, b) => format!(
            "{} {op} {}",
            paren(render(a), level(a) < 1),
            paren(render(b), level(b) < 2)
        ),
        T::Bin(op, a, b) => format!("{} {op} {}", render(a), paren(render(b), level(b) < 1)),
    }
}

fn interp(t: &T, v: &Vars) -> Option<f64> {
    let ok = |x: f64| x.is_finite().then_some(x);
    match t {
        T::Num(x) => Some(*x),
        T::Var(name) => Some(match *name {
            "x" => v.x,
            "y" => v.y,
            "r" => v.r,
            "theta" => v.theta,
            "pi" => std::f64::consts::PI,
            _ => std::f64::consts::E,
        }),
        T::Neg(a) => Some(-interp(a, v)?),
        T::Bin(op, a, b) => {
            let (a, b) = (interp(a, v)?, interp(b, v)?);
            ok(match op {
                '+' => a + b,
                '-' => a - b,
                '*' => a * b,
                '/' if b == 0.0 => return None,
                '/' => a / b,
                _ => a.powf(b),
            })
        }
        T::Call(f, a) => {
            let a = interp(a, v)?;
            ok(match *f {
                "sin" => a.sin(),
                "cos" => a.cos(),
                "exp" => a.exp(),
                "log" if a <= 0.0 => return None,
                "log" => a.ln(),
                "sqrt" if a < 0.0 => return None,
                "sqrt" => a.sqrt(),
                _ => a.abs(),
            })
        }
    }
}

fn ev(s: &str, v: Vars) -> f64 {
    Expression::parse(s).unwrap().eval(&v).unwrap()
}

#[test]
fn documented_examples() {
    let v = Vars::cartesian(0.3, -0.4);
    assert!((ev("0.5*(x^2+y^2)", v) - 0.125).abs() < 1e-16);
    assert_eq!(ev("exp(r^2)", Vars::polar(1.0, 0.7)), std::f64::consts::E);
    assert_eq!(ev("2^3^2", v), 512.0);
    assert_eq!(ev("-2^2", v), -4.0);
    assert_eq!(ev("  1.5e1 -\t2 ", v), 13.0);
}

#[test]
fn errors() {
    assert!(matches!(
        Expression::parse("1 + * 2"),
        Err(ExprError::Syntax { offset: 4, .. })
    ));
    assert!(matches!(
        Expression::parse("foo"),
        Err(ExprError::UnknownIdentifier { .. })
    ));
    assert!(matches!(
        Expression::parse("tan(x)"),
        Err(ExprError::UnknownFunction { .. })
    ));
    assert!(matches!(
        Expression::parse("t"),
        Err(ExprError::UnknownIdentifier { .. })
    ));
    assert!(Expression::parse_with("t*2", Allowed { time: true }).is_ok());
    let e = Expression::parse("1/(x-x)").unwrap();
    assert!(matches!(
        e.eval(&Vars::cartesian(1.0, 0.0)),
        Err(ExprError::Eval { offset: 1, .. })
    ));
    let e = Expression::parse("log(0)").unwrap();
    assert!(e.eval(&Vars::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn matches_reference_interpreter(t in tree(), x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let text = render(&t);
        let e = Expression::parse(&text).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
        let v = Vars::cartesian(x, y);
        match (e.eval(&v), interp(&t, &v)) {
            (Ok(a), Some(b)) => prop_assert_eq!(a.to_bits(), b.to_bits(), "{}", text),
            (Err(_), None) => {}
            (a, b) => prop_assert!(false, "{text}: {a:?} vs {b:?}"),
        }
    }

    #[test]
    fn garbage_never_panics(s in "[-+*/^() .0-9a-z]{0,24}") {
        let _ = Expression::parse(&s).map(|e| e.eval(&Vars::cartesian(0.5, 0.5)));
    }
}
