use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::NsdpProblem;
use crate::error::{Error, Result};
use crate::symalg::{packed_dim, smat, svec, SymMatrix};

/// `minimize cᵀx + ½xᵀQx  s.t.  A0 + Σ x_i A_i ⪰ 0`.
#[derive(Clone, Debug)]
pub struct AffineProblem {
    pub name: String,
    pub a0: SymMatrix,
    pub a: Vec<SymMatrix>,
    pub c: DVector<f64>,
    pub q: DMatrix<f64>,
    pub x0: DVector<f64>,
}

/// On-disk form; every matrix is an svec array.
#[derive(Debug, Serialize, Deserialize)]
pub struct AffineProblemFile {
    #[serde(default)]
    pub name: Option<String>,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "A0")]
    pub a0: Vec<f64>,
    #[serde(rename = "Ai")]
    pub ai: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    #[serde(rename = "Q", default)]
    pub q: Option<Vec<f64>>,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
}

impl AffineProblem {
    pub fn new(a0: SymMatrix, a: Vec<SymMatrix>, c: DVector<f64>, q: DMatrix<f64>) -> Self {
        let n = a.len();
        assert_eq!(c.len(), n, "linear objective length must equal n");
        assert_eq!(q.shape(), (n, n), "quadratic objective must be n×n");
        assert!(
            a.iter().all(|ai| ai.dim() == a0.dim()),
            "all A_i must share A0's order"
        );
        Self {
            name: "affine".into(),
            a0,
            a,
            c,
            q: super::symmetric_part(&q),
            x0: DVector::zeros(n),
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_start(mut self, x0: DVector<f64>) -> Self {
        assert_eq!(x0.len(), self.a.len());
        self.x0 = x0;
        self
    }

    pub fn from_file_data(data: AffineProblemFile) -> Result<Self> {
        let (n, m) = (data.n, data.m);
        let a0 = smat(&data.a0)?;
        if a0.dim() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: a0.dim(),
            });
        }
        if data.ai.len() != n || data.c.len() != n {
            return Err(Error::Invalid(format!(
                "expected {n} matrices in Ai and {n} entries in c"
            )));
        }
        let a = data
            .ai
            .iter()
            .map(|v| {
                let ai = smat(v)?;
                if ai.dim() != m {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        found: ai.dim(),
                    });
                }
                Ok(ai)
            })
            .collect::<Result<Vec<_>>>()?;
        let q = match data.q {
            Some(v) if v.len() == packed_dim(n) => smat(&v)?.into_matrix(),
            Some(v) => return Err(Error::BadLength(v.len())),
            None => DMatrix::zeros(n, n),
        };
        let mut prob = Self::new(a0, a, DVector::from_vec(data.c), q);
        if let Some(name) = data.name {
            prob.name = name;
        }
        if let Some(x0) = data.x0 {
            if x0.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: x0.len(),
                });
            }
            prob.x0 = DVector::from_vec(x0);
        }
        Ok(prob)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file_data(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_file_data(&self) -> AffineProblemFile {
        AffineProblemFile {
            name: Some(self.name.clone()),
            n: self.a.len(),
            m: self.a0.dim(),
            a0: svec(&self.a0),
            ai: self.a.iter().map(svec).collect(),
            c: self.c.as_slice().to_vec(),
            q: Some(svec(&SymMatrix::from_lower(&self.q))),
            x0: Some(self.x0.as_slice().to_vec()),
        }
    }
}

impl NsdpProblem for AffineProblem {
    fn name(&self) -> &str {
        &self.name
    }
    fn n(&self) -> usize {
        self.a.len()
    }
    fn m(&self) -> usize {
        self.a0.dim()
    }
    fn start(&self) -> DVector<f64> {
        self.x0.clone()
    }
    fn objective(&self, x: &DVector<f64>) -> f64 {
        self.c.dot(x) + 0.5 * x.dot(&(&self.q * x))
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.c + &self.q * x
    }
    fn hessian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        self.q.clone()
    }
    fn matrix_constraint(&self, x: &DVector<f64>) -> SymMatrix {
        let mut g = self.a0.clone();
        for (ai, xi) in self.a.iter().zip(x.iter()) {
            g += &(ai * *xi);
        }
        g
    }
    fn matrix_constraint_partials(&self, _x: &DVector<f64>) -> Vec<SymMatrix> {
        self.a.clone()
    }
    fn matrix_constraint_curvature(&self, _x: &DVector<f64>, _l: &SymMatrix) -> DMatrix<f64> {
        DMatrix::zeros(self.n(), self.n())
    }
}
