//! Runtime values and their canonical text rendering.

use crate::minilang::pretty::escape_str;
use crate::minilang::StaticType;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Str(String),
    List(Vec<Value>),
}

impl Value {
    /// Canonical, total, deterministic rendering. Strings are quoted and
    /// escaped so renderings are unambiguous; lists render element-wise.
    pub fn render(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Bool(b) => if *b { "true" } else { "false" }.to_string(),
            Value::Str(s) => escape_str(s),
            Value::List(items) => {
                let mut out = String::from("[");
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    out.push_str(&item.render());
                }
                out.push(']');
                out
            }
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Bool(_) => "bool",
            Value::Str(_) => "str",
            Value::List(_) => "list",
        }
    }

    /// Zero value for a static type; used to bind parameters defensively.
    pub fn default_for(ty: &StaticType) -> Value {
        match ty {
            StaticType::Int => Value::Int(0),
            StaticType::Bool => Value::Bool(false),
            StaticType::Str => Value::Str(String::new()),
            StaticType::List(_) => Value::List(Vec::new()),
            StaticType::Void => Value::Int(0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rendering_is_canonical() {
        assert_eq!(Value::Int(-3).render(), "-3");
        assert_eq!(Value::Bool(true).render(), "true");
        assert_eq!(Value::Str("a\"b\n".into()).render(), "\"a\\\"b\\n\"");
        let v = Value::List(vec![Value::Int(1), Value::Str("x".into())]);
        assert_eq!(v.render(), "[1, \"x\"]");
        assert_eq!(Value::List(vec![]).render(), "[]");
    }
}
