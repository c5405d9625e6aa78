use serde_json::Value;

/// Significant digits of every floating-point number in JSON output.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().expect("formatted float parses")
}

pub fn fmt_num(x: f64) -> String {
    let r = round_sig(x);
    if r.abs() >= 1e-4 || r == 0.0 {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

fn round_in_place(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            *v = serde_json::Number::from_f64(round_sig(x)).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_in_place),
        Value::Object(map) => map.values_mut().for_each(round_in_place),
        _ => {}
    }
}

/// Prints `value` as one JSON document in json mode, `human` otherwise.
pub fn emit(json: bool, mut value: Value, human: String) {
    if json {
        round_in_place(&mut value);
        println!("{}", serde_json::to_string_pretty(&value).expect("json values serialize"));
    } else {
        println!("{human}");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round_sig(1.0000000000004), 1.0);
        assert_eq!(round_sig(3f64.log2()), 1.58496250072);
        assert_eq!(round_sig(-0.0), 0.0);
        assert_eq!(round_sig(1.234567890123456e-20), 1.23456789012e-20);
        let mut v = serde_json::json!({ "a": [0.1 + 0.2, 3], "b": { "c": 2.0f64.sqrt() } });
        round_in_place(&mut v);
        assert_eq!(v.to_string(), r#"{"a":[0.3,3],"b":{"c":1.41421356237}}"#);
    }
}
