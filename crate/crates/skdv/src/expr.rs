//! Initial data given as expressions in `x`.

use evalexpr::{
    build_operator_tree, ContextWithMutableFunctions, ContextWithMutableVariables, DefaultNumericTypes, Function,
    HashMapContext, Node, Value,
};

type Unary = fn(f64) -> f64;

/// A compiled real-valued expression of one variable `x`.
///
/// Besides the `math::*` builtins, `exp`, `sin`, `cos`, `tanh`, `cosh`,
/// `sech`, `sqrt` and the constant `pi` are available. Integer literals
/// divide as integers, so write `1.0/12.0` rather than `1/12`.
#[derive(Debug)]
pub struct Expr {
    source: String,
    node: Node<DefaultNumericTypes>,
}

fn unary(f: fn(f64) -> f64) -> Function<DefaultNumericTypes> {
    Function::new(move |arg: &Value<DefaultNumericTypes>| Ok(Value::Float(f(arg.as_number()?))))
}

impl Expr {
    pub fn parse(source: &str) -> Result<Self, String> {
        let node = build_operator_tree::<DefaultNumericTypes>(source).map_err(|e| e.to_string())?;
        Ok(Self { source: source.to_owned(), node })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    fn context(x: f64) -> Result<HashMapContext<DefaultNumericTypes>, String> {
        let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
        let err = |e: evalexpr::EvalexprError<DefaultNumericTypes>| e.to_string();
        ctx.set_value("x".into(), Value::Float(x)).map_err(err)?;
        ctx.set_value("pi".into(), Value::Float(std::f64::consts::PI)).map_err(err)?;
        let fns: [(&str, Unary); 8] = [
            ("exp", f64::exp),
            ("sin", f64::sin),
            ("cos", f64::cos),
            ("tanh", f64::tanh),
            ("cosh", f64::cosh),
            ("sqrt", f64::sqrt),
            ("abs", f64::abs),
            ("sech", skdv_core::waves::sech),
        ];
        for (name, f) in fns {
            ctx.set_function(name.into(), unary(f)).map_err(err)?;
        }
        Ok(ctx)
    }

    pub fn eval(&self, x: f64) -> Result<f64, String> {
        let ctx = Self::context(x)?;
        let y = self.node.eval_number_with_context(&ctx).map_err(|e| e.to_string())?;
        if y.is_finite() {
            Ok(y)
        } else {
            Err(format!("`{}` is not finite at x = {x}", self.source))
        }
    }

    pub fn sample(&self, xs: &[f64]) -> Result<Vec<f64>, String> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }
}
