//! Discrete Fourier transforms on grid fields and spectral differentiation.
//!
//! The continuous convention is `u^(xi) = integral u(x) e^{-i xi . x} dx`;
//! the discrete counterpart on the half-cell-offset grid over `[-L, L)^n`
//! uses frequencies `xi_m = (pi / L) m` for signed `m in [-N/2, N/2)` and
//! carries the node offset as an explicit per-axis phase, so that forward
//! and inverse transforms approximate the continuum pair:
//!
//! ```text
//! u^(xi_m) = h^n e^{-i xi_m . x_0} FFT[u]_m,    x_0 = (-L + h/2, ...)
//! ```
//!
//! All multiplier operations zero the DC mode and the Nyquist modes: the DC
//! value of a homogeneous multiplier is undefined, and Nyquist frequencies
//! have no conjugate partner on the grid. Legitimate inputs (derivative
//! fields of compactly supported `u`) lose nothing.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::grid::GridField;
use crate::operator::HomOperator;

/// Complex spectrum of a grid field, same node layout as [`GridField`].
#[derive(Clone, Debug)]
pub struct Spectrum {
    n: usize,
    n_points: usize,
    half_width: f64,
    comps: usize,
    data: Vec<Complex64>,
}

impl Spectrum {
    pub fn zeros(n: usize, n_points: usize, half_width: f64, comps: usize) -> Self {
        Self {
            n,
            n_points,
            half_width,
            comps,
            data: vec![Complex64::new(0.0, 0.0); n_points.pow(n as u32) * comps],
        }
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

    pub fn node_count(&self) -> usize {
        self.n_points.pow(self.n as u32)
    }

    pub fn values(&self, node: usize) -> &[Complex64] {
        &self.data[node * self.comps..(node + 1) * self.comps]
    }

    pub fn values_mut(&mut self, node: usize) -> &mut [Complex64] {
        &mut self.data[node * self.comps..(node + 1) * self.comps]
    }

    /// Signed frequency vector `xi_m` of a node.
    pub fn frequency(&self, node: usize, out: &mut [f64]) {
        let base = std::f64::consts::PI / self.half_width;
        let mut rest = node;
        for axis in (0..self.n).rev() {
            let j = rest % self.n_points;
            rest /= self.n_points;
            let signed = if j < self.n_points / 2 {
                j as isize
            } else {
                j as isize - self.n_points as isize
            };
            out[axis] = base * signed as f64;
        }
    }

    /// True when the node is the DC mode or carries a Nyquist component.
    pub fn is_excluded_mode(&self, node: usize) -> bool {
        let mut rest = node;
        let mut all_zero = true;
        for _ in 0..self.n {
            let j = rest % self.n_points;
            rest /= self.n_points;
            if j == self.n_points / 2 {
                return true; // Nyquist
            }
            if j != 0 {
                all_zero = false;
            }
        }
        all_zero
    }

    /// Magnitude of the DC coefficient relative to the largest coefficient.
    pub fn dc_to_peak_ratio(&self) -> f64 {
        let dc: f64 = self.values(0).iter().map(|v| v.norm()).sum();
        let peak = self
            .data
            .chunks(self.comps)
            .map(|c| c.iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0f64, f64::max);
        if peak == 0.0 {
            0.0
        } else {
            dc / peak
        }
    }
}

fn fft_along_axes(data: &mut [Complex64], n: usize, n_points: usize, comps: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n_points)
    } else {
        planner.plan_fft_forward(n_points)
    };
    let node_count = n_points.pow(n as u32);
    let mut line = vec![Complex64::new(0.0, 0.0); n_points];
    // Axis `a` has stride n_points^{n-1-a} in node index space.
    for axis in 0..n {
        let stride = n_points.pow((n - 1 - axis) as u32);
        let blocks = node_count / (n_points * stride);
        for block in 0..blocks {
            for offset in 0..stride {
                let base = block * n_points * stride + offset;
                for c in 0..comps {
                    for j in 0..n_points {
                        line[j] = data[(base + j * stride) * comps + c];
                    }
                    fft.process(&mut line);
                    for j in 0..n_points {
                        data[(base + j * stride) * comps + c] = line[j];
                    }
                }
            }
        }
    }
}

/// Per-axis offset phases `e^{-i xi x_0}` for the forward transform.
fn offset_phases(n_points: usize, half_width: f64) -> Vec<Complex64> {
    let h = 2.0 * half_width / n_points as f64;
    let x0 = -half_width + 0.5 * h;
    let base = std::f64::consts::PI / half_width;
    (0..n_points)
        .map(|j| {
            let signed = if j < n_points / 2 {
                j as isize
            } else {
                j as isize - n_points as isize
            };
            let xi = base * signed as f64;
            Complex64::from_polar(1.0, -xi * x0)
        })
        .collect()
}

fn apply_offset_phase(spec: &mut Spectrum, conjugate: bool) {
    let phases = offset_phases(spec.n_points, spec.half_width);
    let n = spec.n;
    let n_points = spec.n_points;
    for node in 0..spec.node_count() {
        let mut phase = Complex64::new(1.0, 0.0);
        let mut rest = node;
        for _ in 0..n {
            let j = rest % n_points;
            rest /= n_points;
            phase *= phases[j];
        }
        if conjugate {
            phase = phase.conj();
        }
        for v in spec.values_mut(node) {
            *v *= phase;
        }
    }
}

/// Forward transform approximating the continuum Fourier integral.
pub fn forward(field: &GridField) -> Spectrum {
    let mut spec = Spectrum::zeros(
        field.n(),
        field.n_points(),
        field.half_width(),
        field.comps(),
    );
    for (dst, src) in spec.data.iter_mut().zip(field.data()) {
        *dst = Complex64::new(*src, 0.0);
    }
    fft_along_axes(
        &mut spec.data,
        field.n(),
        field.n_points(),
        field.comps(),
        false,
    );
    let scale = field.cell_volume();
    for v in &mut spec.data {
        *v *= scale;
    }
    apply_offset_phase(&mut spec, false);
    spec
}

/// Inverse transform; returns the real part and the largest imaginary
/// residual as a sanity measure.
pub fn inverse(spec: &Spectrum) -> (GridField, f64) {
    let mut work = spec.clone();
    apply_offset_phase(&mut work, true);
    fft_along_axes(&mut work.data, work.n, work.n_points, work.comps, true);
    let scale = (1.0 / (2.0 * work.half_width)).powi(work.n as i32);
    let mut field = GridField::zeros(spec.n, spec.n_points, spec.half_width, spec.comps);
    let mut imag_residual = 0.0f64;
    for (dst, src) in field.data_mut().iter_mut().zip(&work.data) {
        let v = *src * scale;
        *dst = v.re;
        imag_residual = imag_residual.max(v.im.abs());
    }
    (field, imag_residual)
}

/// Applies a frequency-space multiplier. The closure receives the frequency
/// vector and the input coefficients and writes `out_comps` outputs; DC and
/// Nyquist modes are zeroed without calling it.
pub fn map_frequencies(
    spec: &Spectrum,
    out_comps: usize,
    mut multiplier: impl FnMut(&[f64], &[Complex64], &mut [Complex64]),
) -> Spectrum {
    let mut out = Spectrum::zeros(spec.n, spec.n_points, spec.half_width, out_comps);
    let mut xi = vec![0.0; spec.n];
    for node in 0..spec.node_count() {
        if spec.is_excluded_mode(node) {
            continue;
        }
        spec.frequency(node, &mut xi);
        let src = spec.values(node);
        // Split borrow: values_mut indexes out.data disjointly per node.
        let dst = out.values_mut(node);
        multiplier(&xi, src, dst);
    }
    out
}

/// Tuple-major flattening of ordered derivative tuples: component
/// `t * dim_v + a` of the output is `d^{(i_1..i_j)} u_a` where `t` enumerates
/// tuples row-major.
pub fn derivative_tuples(n: usize, order: usize) -> Vec<Vec<usize>> {
    let mut tuples: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..order {
        let mut next = Vec::with_capacity(tuples.len() * n);
        for t in &tuples {
            for axis in 0..n {
                let mut e = t.clone();
                e.push(axis);
                next.push(e);
            }
        }
        tuples = next;
    }
    tuples
}

/// Full derivative tensor `D^j u` computed spectrally.
pub fn spectral_derivative(field: &GridField, order: usize) -> GridField {
    let spec = forward(field);
    let tuples = derivative_tuples(field.n(), order);
    let dim_v = field.comps();
    let factor = Complex64::i().powu(order as u32);
    let out_spec = map_frequencies(&spec, tuples.len() * dim_v, |xi, src, dst| {
        for (t, tuple) in tuples.iter().enumerate() {
            let mono: f64 = tuple.iter().map(|&axis| xi[axis]).product();
            let scale = factor * mono;
            for a in 0..dim_v {
                dst[t * dim_v + a] = scale * src[a];
            }
        }
    });
    inverse(&out_spec).0
}

/// `A(D) u` computed spectrally: `(A(D)u)^ = i^k A(xi) u^`.
pub fn apply_operator(a: &HomOperator, field: &GridField) -> GridField {
    assert_eq!(a.n(), field.n(), "operator and field dimensions differ");
    assert_eq!(
        a.dim_v(),
        field.comps(),
        "operator source dimension differs"
    );
    let spec = forward(field);
    let factor = Complex64::i().powu(a.order());
    let terms: Vec<(Vec<u32>, nalgebra::DMatrix<f64>)> = a
        .terms()
        .iter()
        .map(|(alpha, m)| (alpha.entries().to_vec(), m.to_nalgebra()))
        .collect();
    let dim_e = a.dim_e();
    let dim_v = a.dim_v();
    let out_spec = map_frequencies(&spec, dim_e, |xi, src, dst| {
        for (alpha, m) in &terms {
            let mono: f64 = alpha
                .iter()
                .zip(xi)
                .map(|(&e, x)| x.powi(e as i32))
                .product();
            if mono == 0.0 {
                continue;
            }
            for r in 0..dim_e {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in 0..dim_v {
                    acc += m[(r, c)] * src[c];
                }
                dst[r] += factor * mono * acc;
            }
        }
    });
    inverse(&out_spec).0
}

/// `A(D) u` by fourth-order central differences with periodic wrap; used as
/// an independent cross-check of the spectral route.
pub fn apply_operator_fd(a: &HomOperator, field: &GridField) -> GridField {
    assert_eq!(a.n(), field.n());
    assert_eq!(a.dim_v(), field.comps());
    let n = field.n();
    let n_points = field.n_points();
    let h = field.spacing();
    let dim_e = a.dim_e();
    let dim_v = a.dim_v();

    // Fourth-order first and second derivative stencils.
    let d1 = [
        (-2isize, 1.0 / 12.0),
        (-1, -8.0 / 12.0),
        (1, 8.0 / 12.0),
        (2, -1.0 / 12.0),
    ];
    let d2 = [
        (-2isize, -1.0 / 12.0),
        (-1, 16.0 / 12.0),
        (0, -30.0 / 12.0),
        (1, 16.0 / 12.0),
        (2, -1.0 / 12.0),
    ];

    // Apply one axis derivative of given order to a scalar lattice.
    let axis_stride = |axis: usize| n_points.pow((n - 1 - axis) as u32);
    let node_count = field.node_count();
    let shift_node = |node: usize, axis: usize, offset: isize| -> usize {
        let stride = axis_stride(axis);
        let j = (node / stride) % n_points;
        let shifted = (j as isize + offset).rem_euclid(n_points as isize);
        (node as isize + (shifted - j as isize) * stride as isize) as usize
    };
    let derive = |values: &[f64], axis: usize, order: u32| -> Vec<f64> {
        let mut out = vec![0.0; node_count];
        let stencil: &[(isize, f64)] = match order {
            1 => &d1,
            2 => &d2,
            _ => unreachable!(),
        };
        let scale = h.powi(-(order as i32));
        for node in 0..node_count {
            let mut acc = 0.0;
            for &(offset, w) in stencil {
                acc += w * values[shift_node(node, axis, offset)];
            }
            out[node] = acc * scale;
        }
        out
    };

    let mut out = GridField::zeros(n, n_points, field.half_width(), dim_e);
    for c in 0..dim_v {
        let component: Vec<f64> = (0..node_count).map(|node| field.values(node)[c]).collect();
        for (alpha, m) in a.terms() {
            let mut derived = component.clone();
            for (axis, &e) in alpha.entries().iter().enumerate() {
                match e {
                    0 => {}
                    1 | 2 => derived = derive(&derived, axis, e),
                    _ => {
                        for _ in 0..e {
                            derived = derive(&derived, axis, 1);
                        }
                    }
                }
            }
            for r in 0..dim_e {
                let coeff = crate::exact::rational_to_f64(&m[(r, c)]);
                if coeff == 0.0 {
                    continue;
                }
                for (node, value) in derived.iter().enumerate() {
                    out.data_mut()[node * dim_e + r] += coeff * value;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_field(n_points: usize, sigma: f64) -> GridField {
        GridField::from_fn(2, n_points, 8.0, 1, |x, out| {
            out[0] = (-(x[0] * x[0] + x[1] * x[1]) / (2.0 * sigma * sigma)).exp();
        })
    }

    #[test]
    fn round_trip_is_identity() {
        let u = gaussian_field(64, 1.0);
        let (back, imag) = inverse(&forward(&u));
        assert!(imag < 1e-12);
        let err: f64 = u
            .data()
            .iter()
            .zip(back.data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "round trip error {err}");
    }

    #[test]
    fn spectral_gradient_of_gaussian() {
        let sigma = 1.0;
        let u = gaussian_field(128, sigma);
        let du = spectral_derivative(&u, 1);
        assert_eq!(du.comps(), 2);
        let mut worst = 0.0f64;
        let mut coord = [0.0; 2];
        for node in 0..du.node_count() {
            du.node_coord(node, &mut coord);
            let g = (-(coord[0] * coord[0] + coord[1] * coord[1]) / (2.0 * sigma * sigma)).exp();
            let expected = [-coord[0] * g, -coord[1] * g];
            let vals = du.values(node);
            worst = worst.max((vals[0] - expected[0]).abs());
            worst = worst.max((vals[1] - expected[1]).abs());
        }
        assert!(worst < 1e-8, "gradient error {worst}");
    }

    #[test]
    fn operator_application_matches_derivative() {
        let u = gaussian_field(64, 1.2);
        let grad = crate::operator::stock::gradient(2);
        let via_op = apply_operator(&grad, &u);
        let via_deriv = spectral_derivative(&u, 1);
        let err: f64 = via_op
            .data()
            .iter()
            .zip(via_deriv.data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn finite_difference_cross_check() {
        let u = gaussian_field(128, 1.0);
        let lap = crate::operator::stock::laplacian(2);
        let spectral = apply_operator(&lap, &u);
        let fd = apply_operator_fd(&lap, &u);
        let scale = spectral.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err: f64 = spectral
            .data()
            .iter()
            .zip(fd.data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err / scale < 1e-4, "relative error {}", err / scale);
    }

    #[test]
    fn excluded_modes() {
        let s = Spectrum::zeros(2, 8, 4.0, 1);
        assert!(s.is_excluded_mode(0)); // DC
        assert!(s.is_excluded_mode(4)); // Nyquist on second axis
        assert!(s.is_excluded_mode(4 * 8)); // Nyquist on first axis
        assert!(!s.is_excluded_mode(1));
    }

    #[test]
    fn parseval_scaling() {
        // Forward transform of a centered Gaussian approximates the
        // continuum integral: u^(0) = integral u = 2 pi sigma^2.
        let sigma = 0.8;
        let u = gaussian_field(128, sigma);
        let spec = forward(&u);
        let dc = spec.values(0)[0];
        let expected = 2.0 * std::f64::consts::PI * sigma * sigma;
        assert!((dc.re - expected).abs() < 1e-6, "dc = {dc}");
        assert!(dc.im.abs() < 1e-9);
    }
}
