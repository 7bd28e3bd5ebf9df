/// Huber loss: `a²/2` for `|a| ≤ δ`, `δ(|a| − δ/2)` beyond.
pub fn huber(a: f64, delta: f64) -> f64 {
    let m = a.abs();
    if m <= delta {
        0.5 * a * a
    } else {
        delta * (m - 0.5 * delta)
    }
}

/// `dℓ/da`: `a` inside the quadratic zone, `±δ` outside.
pub fn huber_grad(a: f64, delta: f64) -> f64 {
    if a.abs() <= delta {
        a
    } else {
        delta * a.signum()
    }
}
