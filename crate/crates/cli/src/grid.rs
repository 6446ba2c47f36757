//! Sweep definitions.
//!
//! A grid is read from a TOML file:
//!
//! ```toml
//! family = "ocp"               # or "circle"
//! omegas = [1e-1, 6.4e-3, 0.0] # table rows; 0.0 runs the classical method
//! elements = [16, 64]          # table columns for "ocp"
//! # eps = [1e-1, 0.0]          # table columns for "circle"
//! methods = ["malm", "qpm"]
//! k_max = 150                  # optional, see `ExperimentGrid::k_max`
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Circle,
    Ocp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Modified augmented Lagrangian; the classical method in `ω = 0` rows.
    Malm,
    Qpm,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Malm => "malm",
            Method::Qpm => "qpm",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentGrid {
    pub family: Family,
    pub omegas: Vec<f64>,
    #[serde(default)]
    pub eps: Vec<f64>,
    #[serde(default)]
    pub elements: Vec<usize>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    /// Outer iteration limit, also used as the cap on total inner iterations.
    /// Defaults to 1000 for the circle and 150 for the control problem.
    pub k_max: Option<usize>,
    pub tol: Option<f64>,
}

fn default_methods() -> Vec<Method> {
    vec![Method::Malm, Method::Qpm]
}

impl ExperimentGrid {
    pub fn circle(omegas: Vec<f64>, eps: Vec<f64>) -> Self {
        Self {
            family: Family::Circle,
            omegas,
            eps,
            elements: Vec::new(),
            methods: default_methods(),
            k_max: None,
            tol: None,
        }
    }

    pub fn ocp(omegas: Vec<f64>, elements: Vec<usize>) -> Self {
        Self {
            family: Family::Ocp,
            omegas,
            eps: Vec::new(),
            elements,
            methods: default_methods(),
            k_max: None,
            tol: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let grid: Self = toml::from_str(text).map_err(|e| HarnessError::Grid(e.to_string()))?;
        grid.validate()?;
        Ok(grid)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Grid(m));
        if let Some(w) = self.omegas.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return bad(format!("omega must be finite and nonnegative, got {w}"));
        }
        match self.family {
            Family::Circle => {
                if !self.elements.is_empty() {
                    return bad("`elements` applies to the ocp family only".into());
                }
                if let Some(e) = self.eps.iter().find(|e| !(**e >= 0.0 && e.is_finite())) {
                    return bad(format!("eps must be finite and nonnegative, got {e}"));
                }
            }
            Family::Ocp => {
                if !self.eps.is_empty() {
                    return bad("`eps` applies to the circle family only".into());
                }
                if self.elements.contains(&0) {
                    return bad("element counts must be positive".into());
                }
            }
        }
        if self.k_max == Some(0) {
            return bad("k_max must be positive".into());
        }
        if let Some(t) = self.tol.filter(|t| !(*t > 0.0)) {
            return bad(format!("tol must be positive, got {t}"));
        }
        Ok(())
    }

    pub fn k_max(&self) -> usize {
        self.k_max.unwrap_or(match self.family {
            Family::Circle => 1000,
            Family::Ocp => 150,
        })
    }

    pub fn num_columns(&self) -> usize {
        match self.family {
            Family::Circle => self.eps.len(),
            Family::Ocp => self.elements.len(),
        }
    }

    /// Column value as printed in table headers.
    pub fn column_value(&self, col: usize) -> f64 {
        match self.family {
            Family::Circle => self.eps[col],
            Family::Ocp => self.elements[col] as f64,
        }
    }

    pub fn column_label(&self, col: usize) -> String {
        match self.family {
            Family::Circle => format!("eps={}", crate::format_sci(self.eps[col])),
            Family::Ocp => format!("N={}", self.elements[col]),
        }
    }

    /// All `(row, col, method)` triples in output order.
    pub fn cells(&self) -> Vec<(usize, usize, Method)> {
        let mut cells = Vec::with_capacity(self.omegas.len() * self.num_columns() * self.methods.len());
        for row in 0..self.omegas.len() {
            for col in 0..self.num_columns() {
                for &m in &self.methods {
                    cells.push((row, col, m));
                }
            }
        }
        cells
    }
}
