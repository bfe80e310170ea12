use std::path::{Path, PathBuf};

use hcx_core::backward_error::BeProblem;
use hcx_core::certificates::QuadraticPair;
use hcx_core::linalg::{Matrix, SymMatrix};
use hcx_core::prs::PrsProblem;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::mm::read_matrix_market;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Prs,
    Be,
}

/// On-disk problem description. `A` is given inline (row-major rows) or as
/// a Matrix Market path in `A_mm`, resolved relative to the problem file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub kind: Kind,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
    #[serde(rename = "A_mm", default, skip_serializing_if = "Option::is_none")]
    pub a_mm: Option<PathBuf>,
    pub b: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Prs(PrsProblem),
    Be(BeProblem),
}

impl Problem {
    pub fn kind(&self) -> Kind {
        match self {
            Self::Prs(_) => Kind::Prs,
            Self::Be(_) => Kind::Be,
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

impl ProblemFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Validates the description and builds the solver input. `base` is the
    /// directory `A_mm` paths are relative to.
    pub fn to_problem(&self, base: &Path) -> Result<Problem> {
        let a = match (&self.a, &self.a_mm) {
            (Some(rows), None) => Matrix::from_rows(rows)?,
            (None, Some(mm)) => read_matrix_market(&base.join(mm))?,
            (Some(_), Some(_)) => return Err(invalid("give exactly one of `A` and `A_mm`, not both")),
            (None, None) => return Err(invalid("missing matrix: give `A` or `A_mm`")),
        };
        if a.rows() == 0 || a.cols() == 0 {
            return Err(invalid("A must be non-empty"));
        }
        if a.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(invalid("A has non-finite entries"));
        }
        match self.kind {
            Kind::Prs => {
                if a.rows() != a.cols() {
                    return Err(invalid(format!("prs needs a square A, got {}x{}", a.rows(), a.cols())));
                }
                if self.b.len() != a.rows() {
                    return Err(invalid("prs needs len(b) == dim(A)"));
                }
                let p = self.p.ok_or_else(|| invalid("prs needs the exponent `p`"))?;
                if p.is_nan() || p <= 2.0 {
                    return Err(invalid("prs needs p > 2"));
                }
                let sym = SymMatrix::from_matrix(&a)?;
                Ok(Problem::Prs(PrsProblem::new(sym, self.b.clone(), p, self.rho.unwrap_or(1.0))?))
            }
            Kind::Be => {
                if self.b.len() != a.rows() {
                    return Err(invalid(format!("be needs len(b) == rows(A) = {}", a.rows())));
                }
                if self.p.is_some() || self.rho.is_some() {
                    return Err(invalid("`p` and `rho` only apply to prs"));
                }
                Ok(Problem::Be(BeProblem::new(a, self.b.clone())?))
            }
        }
    }
}

/// Loads and validates a problem file in one step.
pub fn load_problem(path: &Path) -> Result<Problem> {
    let file = ProblemFile::load(path)?;
    file.to_problem(path.parent().unwrap_or(Path::new(".")))
}

/// Input of the `probe` command: `f(x) = xᵀAx + aᵀx + p`,
/// `g(x) = xᵀBx + bᵀx + q`. Linear and constant terms default to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairFile {
    #[serde(rename = "A")]
    pub a_mat: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b_mat: Vec<Vec<f64>>,
    #[serde(default)]
    pub a: Option<Vec<f64>>,
    #[serde(default)]
    pub b: Option<Vec<f64>>,
    #[serde(default)]
    pub p: f64,
    #[serde(default)]
    pub q: f64,
}

impl PairFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_pair(&self) -> Result<QuadraticPair> {
        let a_mat = SymMatrix::from_rows(&self.a_mat)?;
        let b_mat = SymMatrix::from_rows(&self.b_mat)?;
        let n = a_mat.dim();
        let a = self.a.clone().unwrap_or_else(|| vec![0.0; n]);
        let b = self.b.clone().unwrap_or_else(|| vec![0.0; n]);
        Ok(QuadraticPair::new(a_mat, b_mat, a, b, self.p, self.q)?)
    }
}
