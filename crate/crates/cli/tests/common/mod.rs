#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Output;

use serde_json::{json, Value};

pub fn ode(q: Value, params: Value) -> Value {
    json!({
        "problem": {
            "type": "ode",
            "nonlinearity": {"form": "emden_fowler", "lambda": 3.0, "q": q},
            "t0": 1.0,
            "params": params
        }
    })
}

pub fn power(mu: f64, p: f64) -> Value {
    json!({"kind": "power_decay", "mu": mu, "p": p})
}

pub fn manufactured() -> Value {
    let q = json!({
        "kind": "expr",
        "expr": "2*0.01*t^-3*(1-0.01/t)^-3",
        "envelope": {"scale": 0.02 * 0.99f64.powi(-3), "exponent": 3.0}
    });
    let mut cfg = ode(q, json!({"c": 1.0}));
    cfg["scheme"] = json!("bounded_limit");
    cfg
}

pub fn pde(h0: f64) -> Value {
    json!({
        "problem": {
            "type": "radial_pde",
            "n": 3, "A": 0.5, "eps": 1.0, "C": 0.5, "rho": 0.5, "h0": h0, "s0": 1.0,
            "a": {"kind": "power_decay", "mu": 0.05, "p": 4.0},
            "g": {"kind": "power_decay", "mu": 1.0, "p": 1.0}
        }
    })
}

pub fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

pub fn asympt(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_asympt"))
        .args(args)
        .env_remove("ASYMPT_LOG")
        .output()
        .unwrap()
}

pub fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}
