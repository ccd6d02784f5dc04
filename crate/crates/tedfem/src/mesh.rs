//! 1-D reference mesh, linear Lagrange shape functions and Gauss quadrature.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MeshError {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
}

/// 1-D mesh in the reference configuration. Nodes are strictly increasing;
/// elements are consecutive node pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    node_coords: Vec<f64>,
    area: f64,
}

impl Mesh1D {
    /// Uniform mesh with `n` elements spanning `[0, length]`.
    pub fn uniform(length: f64, n: usize, area: f64) -> Result<Self, MeshError> {
        if !(length > 0.0) {
            return Err(MeshError::InvalidMesh(format!("length must be positive, got {length}")));
        }
        if n < 1 {
            return Err(MeshError::InvalidMesh("element count must be >= 1".into()));
        }
        let coords = (0..=n).map(|i| length * i as f64 / n as f64).collect();
        Self::from_coords(coords, area)
    }

    /// Mesh from an arbitrary strictly increasing node set.
    pub fn from_coords(node_coords: Vec<f64>, area: f64) -> Result<Self, MeshError> {
        if !(area > 0.0) {
            return Err(MeshError::InvalidMesh(format!("area must be positive, got {area}")));
        }
        if node_coords.len() < 2 {
            return Err(MeshError::InvalidMesh("need at least two nodes".into()));
        }
        if node_coords.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(MeshError::InvalidMesh("node coordinates must be strictly increasing".into()));
        }
        Ok(Self { node_coords, area })
    }

    pub fn node_coords(&self) -> &[f64] {
        &self.node_coords
    }

    pub fn n_nodes(&self) -> usize {
        self.node_coords.len()
    }

    pub fn n_elem(&self) -> usize {
        self.node_coords.len() - 1
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn length(&self) -> f64 {
        self.node_coords[self.node_coords.len() - 1] - self.node_coords[0]
    }

    /// Element length h of element `e`.
    pub fn elem_length(&self, e: usize) -> f64 {
        self.node_coords[e + 1] - self.node_coords[e]
    }

    /// Physical coordinate of local point `xi` in element `e`.
    pub fn elem_coord(&self, e: usize, xi: f64) -> f64 {
        let [n1, n2] = shape_values(xi);
        n1 * self.node_coords[e] + n2 * self.node_coords[e + 1]
    }
}

/// Linear shape functions at local coordinate `xi` in [-1, 1].
pub fn shape_values(xi: f64) -> [f64; 2] {
    [(1.0 - xi) / 2.0, (1.0 + xi) / 2.0]
}

/// Reference derivatives of the linear shape functions on an element of
/// length `h`. Constant over the element.
pub fn shape_derivs(h: f64) -> [f64; 2] {
    [-1.0 / h, 1.0 / h]
}

/// Gauss-Legendre quadrature rule on [-1, 1]. Exact for polynomials up to
/// degree `2n - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    /// The default rule for element integration.
    pub fn default_rule() -> Self {
        Self::gauss(3)
    }

    /// `n`-point Gauss-Legendre rule computed by Newton iteration on the
    /// Legendre polynomial roots.
    pub fn gauss(n: usize) -> Self {
        assert!(n >= 1, "quadrature order must be >= 1");
        let mut points = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Chebyshev-based initial guess for the i-th root.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            points[i] = -x;
            points[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            points[n / 2] = 0.0;
        }
        Self { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Iterate over (point, weight) pairs.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Legendre polynomial P_n and derivative P_n' at `x` via the three-term
/// recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
