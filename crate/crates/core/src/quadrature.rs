//! Quadrature on the reference triangle and on edges.
//!
//! Triangle rules are given in barycentric coordinates with weights summing to
//! one, so `∫_T f ≈ |T| Σ w_q f(x_q)`. Edge rules live on `[0, 1]` with weights
//! summing to one.

/// Rule on the reference triangle.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// Rule on the unit interval.
#[derive(Debug, Clone)]
pub struct EdgeRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    /// Smallest rule in this module that integrates polynomials of total
    /// degree `degree` exactly.
    pub fn with_degree(degree: usize) -> Self {
        match degree {
            0..=2 => Self::edge_midpoints(),
            3..=5 => Self::radon7(),
            _ => Self::collapsed_gauss((degree + 2).div_ceil(2)),
        }
    }

    /// Three edge midpoints, exact for degree 2.
    pub fn edge_midpoints() -> Self {
        Self {
            points: vec![[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]],
            weights: vec![1.0 / 3.0; 3],
            degree: 2,
        }
    }

    /// Radon's seven-point rule, exact for degree 5.
    pub fn radon7() -> Self {
        let s = 15f64.sqrt();
        let a1 = (6.0 - s) / 21.0;
        let a2 = (6.0 + s) / 21.0;
        let w1 = (155.0 - s) / 1200.0;
        let w2 = (155.0 + s) / 1200.0;
        let b1 = 1.0 - 2.0 * a1;
        let b2 = 1.0 - 2.0 * a2;
        Self {
            points: vec![
                [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
                [a1, a1, b1],
                [a1, b1, a1],
                [b1, a1, a1],
                [a2, a2, b2],
                [a2, b2, a2],
                [b2, a2, a2],
            ],
            weights: vec![9.0 / 40.0, w1, w1, w1, w2, w2, w2],
            degree: 5,
        }
    }

    /// Conical product of `n`-point Gauss–Legendre rules through the Duffy
    /// collapse; exact for degree `2n − 2`.
    pub fn collapsed_gauss(n: usize) -> Self {
        let gauss = EdgeRule::gauss(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (&u, &wu) in gauss.points.iter().zip(&gauss.weights) {
            for (&v, &wv) in gauss.points.iter().zip(&gauss.weights) {
                let x = u;
                let y = v * (1.0 - u);
                points.push([1.0 - x - y, x, y]);
                // Reference area is 1/2; weights are normalized to sum to 1.
                weights.push(2.0 * wu * wv * (1.0 - u));
            }
        }
        Self {
            points,
            weights,
            degree: 2 * n - 2,
        }
    }
}

impl EdgeRule {
    /// Single midpoint.
    pub fn midpoint() -> Self {
        Self {
            points: vec![0.5],
            weights: vec![1.0],
        }
    }

    /// `n`-point Gauss–Legendre on `[0, 1]`, exact for degree `2n − 1`.
    pub fn gauss(n: usize) -> Self {
        let (nodes, weights): (Vec<f64>, Vec<f64>) = match n {
            1 => (vec![0.0], vec![2.0]),
            2 => {
                let x = 1.0 / 3f64.sqrt();
                (vec![-x, x], vec![1.0, 1.0])
            }
            3 => {
                let x = 0.6f64.sqrt();
                (vec![-x, 0.0, x], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
            }
            4 => {
                let r = (6.0f64 / 5.0).sqrt();
                let inner = (3.0 / 7.0 - 2.0 / 7.0 * r).sqrt();
                let outer = (3.0 / 7.0 + 2.0 / 7.0 * r).sqrt();
                let w_inner = (18.0 + 30f64.sqrt()) / 36.0;
                let w_outer = (18.0 - 30f64.sqrt()) / 36.0;
                (
                    vec![-outer, -inner, inner, outer],
                    vec![w_outer, w_inner, w_inner, w_outer],
                )
            }
            _ => legendre_newton(n),
        };
        Self {
            points: nodes.iter().map(|x| 0.5 * (x + 1.0)).collect(),
            weights: weights.iter().map(|w| 0.5 * w).collect(),
        }
    }
}

/// Gauss–Legendre nodes on `[-1, 1]` by Newton iteration on `P_n`.
fn legendre_newton(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}
