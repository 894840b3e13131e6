//! Structural model objects and their reduced form.
//!
//! A model relates `N` forward-looking controls `Y_t` to a scalar endogenous
//! state `k_t` and a scalar AR(1) exogenous state `z_t`:
//!
//! ```text
//! A0 Y_t = A1 E_t Y_{t+1} + B0 k_t + B1 E_t k_{t+1} + C0 z_t
//! k_t    = rho k_{t-1} + D0 Y_t + e z_t
//! z_t    = p z_{t-1} + eps_t
//! ```
//!
//! Substituting the state law of motion into `E_t k_{t+1}` gives the reduced
//! form `A0 Y_t = A E_t Y_{t+1} + B k_t + C z_t` with `A = A1 + B1 D0`,
//! `B = B0 + rho B1` and `C = C0 + e p B1`.

use std::collections::HashSet;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{MumsError, Result};

/// Column names the CLI uses for the exogenous state, endogenous state and
/// horizon; controls may not shadow them.
pub const RESERVED_NAMES: [&str; 3] = ["n", "z", "k"];

/// Structural description of a model. Plain data: dimensions are only
/// checked by [`ModelSpec::validate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub n_controls: usize,
    pub control_names: Vec<String>,
    pub a0: Vec<Vec<f64>>,
    pub a1: Vec<Vec<f64>>,
    pub b0: Vec<f64>,
    pub b1: Vec<f64>,
    pub c0: Vec<f64>,
    pub d0: Vec<f64>,
    pub rho: f64,
    pub e: f64,
    pub p: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, field: impl Into<String>, rule: impl Into<String>) {
        self.violations.push(Violation {
            field: field.into(),
            rule: rule.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{}: {}", v.field, v.rule)?;
        }
        Ok(())
    }
}

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl ModelSpec {
    /// Checks every invariant and collects all violations; never fails.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let n = self.n_controls;
        if n == 0 {
            report.push("n_controls", "must be at least 1");
        }

        if self.control_names.len() != n {
            report.push(
                "control_names",
                format!("expected {n} names, found {}", self.control_names.len()),
            );
        }
        let mut seen = HashSet::new();
        for name in &self.control_names {
            if !is_identifier(name) {
                report.push("control_names", format!("`{name}` is not an identifier"));
            } else if RESERVED_NAMES.contains(&name.as_str()) {
                report.push("control_names", format!("`{name}` is reserved"));
            } else if !seen.insert(name.as_str()) {
                report.push("control_names", format!("`{name}` is duplicated"));
            }
        }

        for (field, m) in [("A0", &self.a0), ("A1", &self.a1)] {
            if m.len() != n || m.iter().any(|row| row.len() != n) {
                report.push(field, format!("dimensions must be {n}x{n}"));
            } else if m.iter().flatten().any(|x| !x.is_finite()) {
                report.push(field, "entries must be finite");
            }
        }
        for (field, v) in [
            ("B0", &self.b0),
            ("B1", &self.b1),
            ("C0", &self.c0),
            ("D0", &self.d0),
        ] {
            if v.len() != n {
                report.push(field, format!("dimensions must be {n}, found {}", v.len()));
            } else if v.iter().any(|x| !x.is_finite()) {
                report.push(field, "entries must be finite");
            }
        }

        for (field, x) in [("rho", self.rho), ("e", self.e)] {
            if !x.is_finite() {
                report.push(field, "must be finite");
            }
        }
        if !self.p.is_finite() {
            report.push("p", "must be finite");
        } else if !(0.0..1.0).contains(&self.p) {
            report.push("p", format!("must satisfy 0 <= p < 1, found {}", self.p));
        }
        report
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_empty() {
            Ok(())
        } else {
            Err(MumsError::Invalid(report))
        }
    }

    pub fn reduce(&self) -> Result<ReducedModel> {
        self.ensure_valid()?;
        let n = self.n_controls;
        let mat = |rows: &[Vec<f64>]| DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        let vec = |v: &[f64]| DVector::from_column_slice(v);

        let a0 = mat(&self.a0);
        let a1 = mat(&self.a1);
        let b0 = vec(&self.b0);
        let b1 = vec(&self.b1);
        let c0 = vec(&self.c0);
        let d0 = vec(&self.d0);

        let a = &a1 + &b1 * d0.transpose();
        let b = &b0 + &b1 * self.rho;
        let c = &c0 + &b1 * (self.e * self.p);
        Ok(ReducedModel {
            a0,
            a,
            b,
            c,
            d0,
            rho: self.rho,
            e: self.e,
            p: self.p,
        })
    }
}

/// `A0 Y_t = A E_t Y_{t+1} + B k_t + C z_t`, `k_t = rho k_{t-1} + D0 Y_t + e z_t`.
///
/// `d0` holds the row vector `D0` as a column.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedModel {
    pub a0: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
    pub d0: DVector<f64>,
    pub rho: f64,
    pub e: f64,
    pub p: f64,
}

impl ReducedModel {
    pub fn n_controls(&self) -> usize {
        self.b.len()
    }

    /// `M(x) = A0 - x A`.
    pub fn pencil(&self, x: f64) -> DMatrix<f64> {
        &self.a0 - &self.a * x
    }

    /// The model with the state feedback `(B, D0, rho)` scaled by `s`.
    ///
    /// At `s = 0` the controls do not feed back into the state and the only
    /// MSV persistence is zero.
    pub fn with_feedback_scaled(&self, s: f64) -> ReducedModel {
        ReducedModel {
            a0: self.a0.clone(),
            a: self.a.clone(),
            b: &self.b * s,
            c: self.c.clone(),
            d0: &self.d0 * s,
            rho: self.rho * s,
            e: self.e,
            p: self.p,
        }
    }
}

/// Size of the innovation `eps_t` hitting the exogenous state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ShockImpulse(f64);

impl ShockImpulse {
    pub fn new(size: f64) -> Result<Self> {
        if !size.is_finite() || size == 0.0 {
            return Err(MumsError::Parameter {
                field: "shock",
                reason: format!("must be finite and nonzero, found {size}"),
            });
        }
        Ok(Self(size))
    }

    pub fn unit() -> Self {
        Self(1.0)
    }

    pub fn size(self) -> f64 {
        self.0
    }
}

impl Default for ShockImpulse {
    fn default() -> Self {
        Self::unit()
    }
}
