use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::EngineError;
use crate::linalg::Matrix;

pub type MatrixFn = Arc<dyn Fn(f64) -> Matrix<f64> + Send + Sync>;

#[derive(Clone)]
pub enum Generator {
    Constant(Matrix<f64>),
    /// `A(t) = A0 + t A1`.
    LinearInTime {
        a0: Matrix<f64>,
        a1: Matrix<f64>,
    },
    Callback(MatrixFn),
}

impl Generator {
    pub fn at(&self, t: f64) -> Matrix<f64> {
        match self {
            Generator::Constant(a) => a.clone(),
            Generator::LinearInTime { a0, a1 } => a0.add(&a1.scale(&t)),
            Generator::Callback(f) => f(t),
        }
    }
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Constant(a) => f.debug_tuple("Constant").field(a).finish(),
            Generator::LinearInTime { a0, a1 } => {
                f.debug_struct("LinearInTime").field("a0", a0).field("a1", a1).finish()
            }
            Generator::Callback(_) => f.write_str("Callback(..)"),
        }
    }
}

/// `u' = A(t) u` on `[t0, t_end]` from `u0`.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub name: String,
    pub generator: Generator,
    pub u0: Vec<f64>,
    pub t0: f64,
    pub t_end: f64,
}

impl ProblemSpec {
    pub fn new(
        name: impl Into<String>,
        generator: Generator,
        u0: Vec<f64>,
        t0: f64,
        t_end: f64,
    ) -> Result<Self, EngineError> {
        let d = u0.len();
        if d == 0 {
            return Err(EngineError::Shape("state dimension must be at least one"));
        }
        let square = |m: &Matrix<f64>| m.rows() == d && m.cols() == d;
        let ok = match &generator {
            Generator::Constant(a) => square(a),
            Generator::LinearInTime { a0, a1 } => square(a0) && square(a1),
            Generator::Callback(f) => square(&f(t0)),
        };
        if !ok {
            return Err(EngineError::Shape("generator must be d×d"));
        }
        if !(t_end > t0) {
            return Err(EngineError::Interval);
        }
        Ok(ProblemSpec { name: name.into(), generator, u0, t0, t_end })
    }

    pub fn dim(&self) -> usize {
        self.u0.len()
    }

    pub fn with_interval(&self, t0: f64, t_end: f64) -> Result<Self, EngineError> {
        ProblemSpec::new(self.name.clone(), self.generator.clone(), self.u0.clone(), t0, t_end)
    }
}

fn mat2(rows: [[f64; 2]; 2]) -> Matrix<f64> {
    Matrix::from_fn(2, 2, |i, j| rows[i][j])
}

/// Second-difference Dirichlet Laplacian on `d` interior points of `(0, 1)`.
pub fn dirichlet_laplacian(d: usize) -> Matrix<f64> {
    let h = 1.0 / (d as f64 + 1.0);
    let inv_h2 = 1.0 / (h * h);
    Matrix::from_fn(d, d, |i, j| {
        if i == j {
            -2.0 * inv_h2
        } else if i.abs_diff(j) == 1 {
            inv_h2
        } else {
            0.0
        }
    })
}

/// Largest eigenvalue magnitude of [`dirichlet_laplacian`].
pub fn dirichlet_laplacian_spectral_radius(d: usize) -> f64 {
    let h = 1.0 / (d as f64 + 1.0);
    let s = num_traits::Float::sin(d as f64 * core::f64::consts::PI * h / 2.0);
    4.0 / (h * h) * s * s
}

pub const PRESET_NAMES: [&str; 5] = ["noncommuting-2x2", "commuting-diagonal", "laplacian-64", "scalar-decay", "zero"];

/// Bundled model problems.
///
/// * `noncommuting-2x2`: `A0 = [[0,1],[-1,0]]`, `A1 = [[1,0],[0,-1]]`, `u0 = (1,0)`, `[0,1]`.
/// * `commuting-diagonal`: diagonal `A0`, `A1`.
/// * `laplacian-64`: constant Dirichlet Laplacian, alternating-sign `u0`, `[0, 0.1]`.
/// * `scalar-decay`: `A = -100`.
/// * `zero`: `A = 0`.
pub fn preset(name: &str) -> Option<ProblemSpec> {
    let spec = match name {
        "noncommuting-2x2" => ProblemSpec::new(
            name,
            Generator::LinearInTime { a0: mat2([[0.0, 1.0], [-1.0, 0.0]]), a1: mat2([[1.0, 0.0], [0.0, -1.0]]) },
            vec![1.0, 0.0],
            0.0,
            1.0,
        ),
        "commuting-diagonal" => ProblemSpec::new(
            name,
            Generator::LinearInTime { a0: Matrix::diagonal(&[-1.0, 0.5]), a1: Matrix::diagonal(&[0.3, -2.0]) },
            vec![1.0, 1.0],
            0.0,
            1.0,
        ),
        "laplacian-64" => ProblemSpec::new(
            name,
            Generator::Constant(dirichlet_laplacian(64)),
            (0..64).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect(),
            0.0,
            0.1,
        ),
        "scalar-decay" => ProblemSpec::new(name, Generator::Constant(Matrix::diagonal(&[-100.0])), vec![1.0], 0.0, 1.0),
        "zero" => ProblemSpec::new(name, Generator::Constant(Matrix::zeros(2, 2)), vec![1.0, 2.0], 0.0, 1.0),
        _ => return None,
    };
    Some(spec.expect("bundled preset is well-formed"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_well_formed() {
        for name in PRESET_NAMES {
            let p = preset(name).unwrap();
            assert_eq!(p.name, name);
            assert!(p.t_end > p.t0);
        }
        assert!(preset("nope").is_none());
    }

    #[test]
    fn invalid_problems_rejected() {
        let g = Generator::Constant(Matrix::zeros(2, 2));
        assert!(ProblemSpec::new("x", g.clone(), vec![1.0], 0.0, 1.0).is_err());
        assert!(ProblemSpec::new("x", g.clone(), vec![], 0.0, 1.0).is_err());
        assert!(ProblemSpec::new("x", g, vec![1.0, 1.0], 1.0, 1.0).is_err());
    }

    #[test]
    fn laplacian_radius() {
        let rho = dirichlet_laplacian_spectral_radius(64);
        assert!((rho - 16890.132316733157).abs() < 1e-8);
    }
}
