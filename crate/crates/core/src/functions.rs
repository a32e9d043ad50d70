//! Built-in test functions addressable by name.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub enum TestFunction {
    OneD(fn(f64) -> f64),
    TwoD(fn(f64, f64) -> f64),
}

impl TestFunction {
    pub fn dim(&self) -> usize {
        match self {
            TestFunction::OneD(_) => 1,
            TestFunction::TwoD(_) => 2,
        }
    }
}

fn one(_: f64) -> f64 {
    1.0
}

fn ramp(t: f64) -> f64 {
    t
}

fn step(t: f64) -> f64 {
    if (0.25..0.625).contains(&t) {
        1.0
    } else {
        0.0
    }
}

fn hat(t: f64) -> f64 {
    (1.0 - (4.0 * t - 2.0).abs()).max(0.0)
}

fn cosine(t: f64) -> f64 {
    (2.0 * PI * t).cos()
}

fn cosine_ramp(t: f64) -> f64 {
    (2.0 * PI * t).cos() + t
}

fn piecewise(t: f64) -> f64 {
    if t <= 0.5 {
        (2.0 * PI * t).cos()
    } else {
        0.5 * t * (6.0 * PI * t).sin()
    }
}

fn bump(t: f64) -> f64 {
    (-50.0 * (t - 0.4).powi(2)).exp()
}

fn exp_sine(t: f64) -> f64 {
    t.exp() * (5.0 * t).sin()
}

fn one_2d(_: f64, _: f64) -> f64 {
    1.0
}

fn smooth_2d(x: f64, y: f64) -> f64 {
    (1.5 * PI * x).cos() * (3.0 * PI * y).sin()
}

const BOXES: [(f64, f64, f64, f64, f64); 3] = [
    (0.20, 0.35, 0.60, 0.80, 0.5),
    (0.55, 0.70, 0.15, 0.30, -0.4),
    (0.72, 0.90, 0.70, 0.85, 0.3),
];

fn boxes_2d(x: f64, y: f64) -> f64 {
    let mut v = smooth_2d(x, y);
    for (x0, x1, y0, y1, h) in BOXES {
        if (x0..x1).contains(&x) && (y0..y1).contains(&y) {
            v += h;
        }
    }
    v
}

/// Names, dimensions and short descriptions of the registry.
pub const REGISTRY: &[(&str, &str)] = &[
    ("one", "f(t) = 1"),
    ("ramp", "f(t) = t"),
    ("step", "indicator of [1/4, 5/8)"),
    ("hat", "max(0, 1 - |4t - 2|)"),
    ("cos", "cos(2 pi t)"),
    ("cos-ramp", "cos(2 pi t) + t"),
    (
        "piecewise",
        "cos(2 pi t) on [0, 1/2], t sin(6 pi t) / 2 on (1/2, 1]",
    ),
    ("bump", "exp(-50 (t - 0.4)^2)"),
    ("exp-sine", "e^t sin(5t)"),
    ("one-2d", "f(x, y) = 1"),
    ("smooth-2d", "cos(3 pi x / 2) sin(3 pi y)"),
    ("boxes-2d", "smooth-2d plus three boxes"),
];

pub fn lookup(name: &str) -> Result<TestFunction> {
    Ok(match name {
        "one" => TestFunction::OneD(one),
        "ramp" => TestFunction::OneD(ramp),
        "step" => TestFunction::OneD(step),
        "hat" => TestFunction::OneD(hat),
        "cos" => TestFunction::OneD(cosine),
        "cos-ramp" => TestFunction::OneD(cosine_ramp),
        "piecewise" => TestFunction::OneD(piecewise),
        "bump" => TestFunction::OneD(bump),
        "exp-sine" => TestFunction::OneD(exp_sine),
        "one-2d" => TestFunction::TwoD(one_2d),
        "smooth-2d" => TestFunction::TwoD(smooth_2d),
        "boxes-2d" => TestFunction::TwoD(boxes_2d),
        _ => {
            let names: Vec<&str> = REGISTRY.iter().map(|r| r.0).collect();
            return Err(Error::InvalidParameter(format!(
                "unknown test function '{name}' (known: {})",
                names.join(", ")
            )));
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_resolves_every_name() {
        for (name, _) in REGISTRY {
            let f = lookup(name).unwrap();
            assert_eq!(f.dim(), if name.ends_with("2d") { 2 } else { 1 });
        }
        assert!(lookup("nope").is_err());
        if let TestFunction::OneD(f) = lookup("piecewise").unwrap() {
            assert_eq!(f(0.5), 1.0f64 * (PI).cos());
            assert!((f(0.75) - 0.375 * (4.5 * PI).sin()).abs() < 1e-15);
        }
    }
}
