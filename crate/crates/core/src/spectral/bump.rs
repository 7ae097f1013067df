//! Smooth radial cut-offs with exact plateaus.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpKind {
    /// Littlewood–Paley cut-off: 1 on `|ξ| ≤ 1`, 0 on `|ξ| ≥ 2`.
    LpPhi,
    /// Perturbation bump: 1 on `|ξ| ≤ 1/4`, 0 on `|ξ| ≥ 1/3`.
    PerturbPhi1,
}

/// Smooth monotone transition between the plateau and the support edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transition {
    /// `S(u) = B(u)/(B(u)+B(1−u))` with `B(u) = e^{-1/u}`.
    ExpQuotient,
}

impl Transition {
    pub fn describe(&self) -> &'static str {
        match self {
            Transition::ExpQuotient => "exp-quotient S(u)=B(u)/(B(u)+B(1-u)), B(u)=exp(-1/u)",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpProfile {
    pub kind: BumpKind,
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub transition: Transition,
}

pub fn make_bump(kind: BumpKind) -> BumpProfile {
    let (inner_radius, outer_radius) = match kind {
        BumpKind::LpPhi => (1.0, 2.0),
        BumpKind::PerturbPhi1 => (0.25, 1.0 / 3.0),
    };
    BumpProfile { kind, inner_radius, outer_radius, transition: Transition::ExpQuotient }
}

/// The `C^∞` step `S(u)`: 0 for `u ≤ 0`, 1 for `u ≥ 1`.
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let b = |v: f64| (-1.0 / v).exp();
    let (p, q) = (b(u), b(1.0 - u));
    p / (p + q)
}

impl BumpProfile {
    /// Value at radius `r = |ξ|`.
    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        if r <= self.inner_radius {
            1.0
        } else if r >= self.outer_radius {
            0.0
        } else {
            smooth_step((self.outer_radius - r) / (self.outer_radius - self.inner_radius))
        }
    }

    /// Band profile `ψ(r) = φ(r) − φ(2r)`, supported in `[inner/2, outer]`.
    pub fn band(&self, r: f64) -> f64 {
        self.eval(r) - self.eval(2.0 * r)
    }
}
