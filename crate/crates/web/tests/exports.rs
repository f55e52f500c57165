use repfib_web::{enumerate_json, error_curve_json, theta_legendre_json};
use serde_json::Value;

#[test]
fn enumeration_lists_known_values() {
    let v: Value = serde_json::from_str(&enumerate_json(2, 4, 40).unwrap()).unwrap();
    let values: Vec<&str> = v.as_array().unwrap().iter().map(|s| s["value"].as_str().unwrap()).collect();
    for x in ["13", "21", "55", "89", "233", "377"] {
        assert!(values.contains(&x), "{x} missing from {values:?}");
    }
    assert!(enumerate_json(2, 10_000, 40).is_err());
}

#[test]
fn error_curve_stays_below_half() {
    let v: Value = serde_json::from_str(&error_curve_json(3, 60).unwrap()).unwrap();
    assert_eq!(v["points"].as_array().unwrap().len(), 60);
    assert_eq!(v["all_below_half"], Value::Bool(true));
    assert!(v["alpha"].as_str().unwrap().starts_with("1.8392867552"));
    assert!(error_curve_json(1, 10).is_err());
}

#[test]
fn theta_legendre_at_round_a_bound() {
    let v: Value = serde_json::from_str(&theta_legendre_json("1.5e282").unwrap()).unwrap();
    assert_eq!(v["n_index"], 570);
    assert_eq!(v["a_max"], "5393");
    assert_eq!(v["argmax"], 135);
    assert_eq!(v["factor"], "5395");
    let head: Vec<&str> = v["quotients"].as_array().unwrap().iter().take(4).map(|x| x.as_str().unwrap()).collect();
    assert_eq!(head, ["3", "3", "9", "2"]);
    assert!(theta_legendre_json("-3").is_err());
    assert!(theta_legendre_json("abc").is_err());
}
