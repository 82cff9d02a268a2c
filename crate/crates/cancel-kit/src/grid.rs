//! Sampled vector fields on half-cell-offset uniform periodic grids.
//!
//! Nodes sit at `x_j = -L + (j + 1/2) h` with `h = 2L/N`, so no node ever
//! coincides with the origin and singular weights like `|x|^{-s}` stay
//! finite at every sample.

use crate::exact::Rational;

/// Dense vector-valued field sampled on the grid cube `[-L, L)^n`.
#[derive(Clone, Debug)]
pub struct GridField {
    n: usize,
    n_points: usize,
    half_width: f64,
    comps: usize,
    data: Vec<f64>,
}

impl GridField {
    pub fn zeros(n: usize, n_points: usize, half_width: f64, comps: usize) -> Self {
        assert!((1..=4).contains(&n), "grids support 1 <= n <= 4");
        assert!(
            n_points.is_power_of_two(),
            "points per axis must be a power of two"
        );
        let total = n_points.pow(n as u32);
        Self {
            n,
            n_points,
            half_width,
            comps,
            data: vec![0.0; total * comps],
        }
    }

    /// Samples `f` at every node; `f` writes the component vector.
    pub fn from_fn(
        n: usize,
        n_points: usize,
        half_width: f64,
        comps: usize,
        mut f: impl FnMut(&[f64], &mut [f64]),
    ) -> Self {
        let mut field = Self::zeros(n, n_points, half_width, comps);
        let mut coord = vec![0.0; n];
        for node in 0..field.node_count() {
            field.node_coord(node, &mut coord);
            let start = node * comps;
            f(&coord, &mut field.data[start..start + comps]);
        }
        field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn comps(&self) -> usize {
        self.comps
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n_points as f64
    }

    pub fn node_count(&self) -> usize {
        self.n_points.pow(self.n as u32)
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.n as i32)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn values(&self, node: usize) -> &[f64] {
        &self.data[node * self.comps..(node + 1) * self.comps]
    }

    /// Physical coordinates of a node (row-major axis order).
    pub fn node_coord(&self, node: usize, out: &mut [f64]) {
        let h = self.spacing();
        let mut rest = node;
        for axis in (0..self.n).rev() {
            let j = rest % self.n_points;
            rest /= self.n_points;
            out[axis] = -self.half_width + (j as f64 + 0.5) * h;
        }
    }

    /// Euclidean norm of the value vector at a node.
    pub fn norm_at(&self, node: usize) -> f64 {
        self.values(node).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Midpoint-rule integral of `f(x, values)`.
    pub fn integrate(&self, mut f: impl FnMut(&[f64], &[f64]) -> f64) -> f64 {
        let mut coord = vec![0.0; self.n];
        let mut acc = 0.0;
        for node in 0..self.node_count() {
            self.node_coord(node, &mut coord);
            acc += f(&coord, self.values(node));
        }
        acc * self.cell_volume()
    }

    /// `L^1` norm: integral of the pointwise Euclidean norm.
    pub fn l1_norm(&self) -> f64 {
        self.integrate(|_, v| v.iter().map(|a| a * a).sum::<f64>().sqrt())
    }

    /// `L^2` norm.
    pub fn l2_norm(&self) -> f64 {
        self.integrate(|_, v| v.iter().map(|a| a * a).sum::<f64>())
            .sqrt()
    }

    /// Node closest to the origin.
    pub fn node_nearest_origin(&self) -> usize {
        // By the half-cell offset this is the node with index N/2 - 1 or N/2
        // on each axis; pick the all-(N/2) corner of the central cell.
        let mut node = 0;
        for _ in 0..self.n {
            node = node * self.n_points + self.n_points / 2;
        }
        node
    }

    /// Largest value norm on the outermost cell layer, relative to the
    /// global maximum; used to warn when a field touches the boundary.
    pub fn boundary_to_peak_ratio(&self) -> f64 {
        let mut peak: f64 = 0.0;
        let mut boundary: f64 = 0.0;
        for node in 0..self.node_count() {
            let norm = self.norm_at(node);
            peak = peak.max(norm);
            let mut rest = node;
            let mut on_boundary = false;
            for _ in 0..self.n {
                let j = rest % self.n_points;
                rest /= self.n_points;
                if j == 0 || j + 1 == self.n_points {
                    on_boundary = true;
                }
            }
            if on_boundary {
                boundary = boundary.max(norm);
            }
        }
        if peak == 0.0 {
            0.0
        } else {
            boundary / peak
        }
    }

    /// Multilinear interpolation with zero extension outside the cube.
    pub fn interpolate(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let h = self.spacing();
        // Cell-centred samples: fractional index along each axis.
        let mut base = vec![0isize; self.n];
        let mut frac = vec![0.0; self.n];
        for axis in 0..self.n {
            let t = (x[axis] + self.half_width) / h - 0.5;
            let f = t.floor();
            base[axis] = f as isize;
            frac[axis] = t - f;
        }
        let corners = 1usize << self.n;
        for corner in 0..corners {
            let mut weight = 1.0;
            let mut node: isize = 0;
            let mut valid = true;
            for axis in 0..self.n {
                let bit = (corner >> axis) & 1;
                let idx = base[axis] + bit as isize;
                if idx < 0 || idx >= self.n_points as isize {
                    valid = false;
                    break;
                }
                weight *= if bit == 1 {
                    frac[axis]
                } else {
                    1.0 - frac[axis]
                };
                node = node * self.n_points as isize + idx;
            }
            if !valid || weight == 0.0 {
                continue;
            }
            let vals = self.values(node as usize);
            for c in 0..self.comps {
                out[c] += weight * vals[c];
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Smooth bumps
// ---------------------------------------------------------------------------

/// Seventh-order smoothstep: C^3, increasing from 0 at 0 to 1 at 1.
pub fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let t4 = t * t * t * t;
        t4 * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t * t * t)
    }
}

fn smoothstep_d1(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        let t3 = t * t * t;
        t3 * (140.0 - 420.0 * t + 420.0 * t * t - 140.0 * t * t * t)
    }
}

fn smoothstep_d2(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        let t2 = t * t;
        t2 * (420.0 - 1680.0 * t + 2100.0 * t2 - 840.0 * t2 * t)
    }
}

/// C^3 plateau bump on `[-1, 1]`: one on `|u| <= 1/2`, zero beyond `|u| >= 1`.
pub fn bump1(u: f64) -> f64 {
    smoothstep(2.0 * (1.0 - u.abs()))
}

pub fn bump1_d1(u: f64) -> f64 {
    -2.0 * u.signum() * smoothstep_d1(2.0 * (1.0 - u.abs()))
}

pub fn bump1_d2(u: f64) -> f64 {
    4.0 * smoothstep_d2(2.0 * (1.0 - u.abs()))
}

/// Tensor-product plateau bump `amp * prod_i bump1((x_i - c_i)/w)` with
/// analytic derivatives up to second order.
#[derive(Clone, Debug)]
pub struct SmoothBump {
    pub center: Vec<f64>,
    pub width: f64,
    pub amplitude: f64,
}

impl SmoothBump {
    pub fn value(&self, x: &[f64]) -> f64 {
        let mut acc = self.amplitude;
        for (xi, ci) in x.iter().zip(&self.center) {
            acc *= bump1((xi - ci) / self.width);
            if acc == 0.0 {
                return 0.0;
            }
        }
        acc
    }

    fn factor(&self, x: &[f64], axis: usize, order: u32) -> f64 {
        let u = (x[axis] - self.center[axis]) / self.width;
        match order {
            0 => bump1(u),
            1 => bump1_d1(u) / self.width,
            2 => bump1_d2(u) / (self.width * self.width),
            _ => unreachable!("bump derivatives beyond order two"),
        }
    }

    /// Partial derivative `d^beta` for `|beta| <= 2`.
    pub fn derivative(&self, beta: &[u32], x: &[f64]) -> f64 {
        debug_assert!(beta.iter().sum::<u32>() <= 2);
        let mut acc = self.amplitude;
        for (axis, &order) in beta.iter().enumerate() {
            acc *= self.factor(x, axis, order);
            if acc == 0.0 {
                return 0.0;
            }
        }
        acc
    }
}

/// Seeded sum of random plateau bumps per component; supports fit inside
/// `fraction` of the half-width. Deterministic for a fixed seed.
pub fn random_bump_field(
    n: usize,
    n_points: usize,
    half_width: f64,
    comps: usize,
    seed: u64,
    bumps_per_comp: usize,
    scale: f64,
) -> GridField {
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut bumps: Vec<Vec<SmoothBump>> = Vec::with_capacity(comps);
    for _ in 0..comps {
        let mut comp_bumps = Vec::with_capacity(bumps_per_comp);
        for _ in 0..bumps_per_comp {
            // Supports stay inside |x| <= 0.22 half_width so dilations up to
            // four still fit the cube, with transitions wide enough for the
            // spectral derivative to resolve.
            let center: Vec<f64> = (0..n)
                .map(|_| rng.gen_range(-0.07 * half_width..0.07 * half_width))
                .collect();
            let width = rng.gen_range(0.12 * half_width..0.15 * half_width);
            let amplitude = rng.gen_range(0.5..1.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            comp_bumps.push(SmoothBump {
                center,
                width,
                amplitude,
            });
        }
        bumps.push(comp_bumps);
    }
    GridField::from_fn(n, n_points, half_width, comps, |x, out| {
        let scaled: Vec<f64> = x.iter().map(|v| v / scale).collect();
        for (c, comp_bumps) in bumps.iter().enumerate() {
            out[c] = comp_bumps.iter().map(|b| b.value(&scaled)).sum();
        }
    })
}

/// Exact weight exponent bookkeeping for singular integrals `|x|^{-s}`.
pub fn rational_to_float_exponent(q: &Rational) -> f64 {
    crate::exact::rational_to_f64(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_geometry() {
        let g = GridField::zeros(2, 8, 4.0, 1);
        assert_eq!(g.spacing(), 1.0);
        assert_eq!(g.node_count(), 64);
        let mut coord = [0.0; 2];
        g.node_coord(0, &mut coord);
        assert_eq!(coord, [-3.5, -3.5]);
        g.node_coord(63, &mut coord);
        assert_eq!(coord, [3.5, 3.5]);
        // No node at the origin.
        for node in 0..g.node_count() {
            g.node_coord(node, &mut coord);
            assert!(coord[0].abs() >= 0.4 && coord[1].abs() >= 0.4);
        }
        let near = g.node_nearest_origin();
        g.node_coord(near, &mut coord);
        assert_eq!(coord, [0.5, 0.5]);
    }

    #[test]
    fn midpoint_integration_of_constant() {
        let g = GridField::from_fn(2, 16, 2.0, 1, |_, out| out[0] = 3.0);
        let integral = g.integrate(|_, v| v[0]);
        assert!((integral - 48.0).abs() < 1e-12);
        assert!((g.l1_norm() - 48.0).abs() < 1e-12);
    }

    #[test]
    fn bump_is_smooth_and_compact() {
        assert_eq!(bump1(1.2), 0.0);
        assert_eq!(bump1(0.3), 1.0);
        assert!(bump1(0.75) > 0.0 && bump1(0.75) < 1.0);
        // Derivative consistency by central differences.
        for &u in &[0.6, 0.8, -0.7, 0.55] {
            let h = 1e-5;
            let fd = (bump1(u + h) - bump1(u - h)) / (2.0 * h);
            assert!((fd - bump1_d1(u)).abs() < 1e-6, "u = {u}");
            let fd2 = (bump1_d1(u + h) - bump1_d1(u - h)) / (2.0 * h);
            assert!((fd2 - bump1_d2(u)).abs() < 1e-5, "u = {u}");
        }
    }

    #[test]
    fn tensor_bump_derivatives() {
        let b = SmoothBump {
            center: vec![0.1, -0.2],
            width: 1.5,
            amplitude: 2.0,
        };
        let x = [0.9, 0.7];
        let h = 1e-5;
        let fd_x = (b.value(&[x[0] + h, x[1]]) - b.value(&[x[0] - h, x[1]])) / (2.0 * h);
        assert!((fd_x - b.derivative(&[1, 0], &x)).abs() < 1e-6);
        let fd_xy = (b.derivative(&[1, 0], &[x[0], x[1] + h])
            - b.derivative(&[1, 0], &[x[0], x[1] - h]))
            / (2.0 * h);
        assert!((fd_xy - b.derivative(&[1, 1], &x)).abs() < 1e-5);
    }

    #[test]
    fn interpolation_matches_nodes() {
        let g = GridField::from_fn(2, 16, 2.0, 2, |x, out| {
            out[0] = x[0];
            out[1] = x[1] * 2.0;
        });
        let mut out = [0.0; 2];
        g.interpolate(&[0.3, -0.9], &mut out);
        assert!((out[0] - 0.3).abs() < 1e-12);
        assert!((out[1] + 1.8).abs() < 1e-12);
        g.interpolate(&[5.0, 0.0], &mut out);
        assert_eq!(out, [0.0, 0.0]);
    }

    #[test]
    fn seeded_bumps_are_deterministic() {
        let a = random_bump_field(2, 16, 4.0, 1, 11, 3, 1.0);
        let b = random_bump_field(2, 16, 4.0, 1, 11, 3, 1.0);
        assert_eq!(a.data(), b.data());
        let c = random_bump_field(2, 16, 4.0, 1, 12, 3, 1.0);
        assert_ne!(a.data(), c.data());
    }
}
