//! Digital Butterworth band-pass design and zero-phase filtering.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

/// One second-order section, `b0 + b1 z⁻¹ + b2 z⁻²` over `1 + a1 z⁻¹ + a2 z⁻²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[0] + self.a[1])
    }

    fn response(&self, z_inv: Complex64) -> Complex64 {
        let z2 = z_inv * z_inv;
        (self.b[0] + z_inv * self.b[1] + z2 * self.b[2]) / (1.0 + z_inv * self.a[0] + z2 * self.a[1])
    }

    /// Transposed direct form II, state updated in place.
    fn run(&self, data: &mut [f64], mut s: [f64; 2]) {
        let [b0, b1, b2] = self.b;
        let [a1, a2] = self.a;
        for x in data.iter_mut() {
            let y = b0 * *x + s[0];
            s[0] = b1 * *x - a1 * y + s[1];
            s[1] = b2 * *x - a2 * y;
            *x = y;
        }
    }
}

/// Butterworth band-pass as a cascade of second-order sections.
#[derive(Debug, Clone, PartialEq)]
pub struct ButterworthBandpass {
    sections: Vec<Biquad>,
    fs: f64,
}

impl ButterworthBandpass {
    /// Order-`order` prototype mapped to `[low_hz, high_hz]` at sample rate
    /// `fs` (bilinear transform with pre-warped edges). The digital filter
    /// has order `2·order`.
    ///
    /// Panics unless `0 < low_hz < high_hz < fs/2` and `order ≥ 1`.
    pub fn design(order: usize, low_hz: f64, high_hz: f64, fs: f64) -> Self {
        assert!(order >= 1, "filter order must be positive");
        assert!(
            0.0 < low_hz && low_hz < high_hz && high_hz < fs / 2.0,
            "band edges must satisfy 0 < low < high < fs/2"
        );
        let k = 2.0 * fs;
        let wl = k * (PI * low_hz / fs).tan();
        let wh = k * (PI * high_hz / fs).tan();
        let bw = wh - wl;
        let w0 = (wl * wh).sqrt();

        // analog band-pass poles from the low-pass prototype
        let mut poles = Vec::with_capacity(2 * order);
        for i in 0..order {
            let theta = PI * (2 * i + order + 1) as f64 / (2 * order) as f64;
            let p = Complex64::from_polar(1.0, theta) * (bw / 2.0);
            let root = (p * p - w0 * w0).sqrt();
            poles.push(p + root);
            poles.push(p - root);
        }
        let digital: Vec<Complex64> = poles.iter().map(|&p| (k + p) / (k - p)).collect();

        let sections: Vec<Biquad> = pair_poles(&digital)
            .into_iter()
            .map(|(p, q)| Biquad {
                b: [1.0, 0.0, -1.0],
                a: [-(p + q).re, (p * q).re],
            })
            .collect();

        // unit gain at the geometric centre frequency
        let mut filter = Self { sections, fs };
        let gain = filter.response_at_omega(2.0 * (w0 / k).atan()).norm();
        for c in filter.sections[0].b.iter_mut() {
            *c /= gain;
        }
        filter
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    fn response_at_omega(&self, omega: f64) -> Complex64 {
        let z_inv = Complex64::from_polar(1.0, -omega);
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(z_inv))
    }

    /// Complex frequency response of a single forward pass at `freq_hz`.
    pub fn response(&self, freq_hz: f64) -> Complex64 {
        self.response_at_omega(2.0 * PI * freq_hz / self.fs)
    }

    fn run_with_initial_conditions(&self, data: &mut [f64]) {
        let Some(&first) = data.first() else { return };
        let mut scale = 1.0;
        for s in &self.sections {
            // steady-state response of this section to a constant input
            let y = s.dc_gain();
            let zi = [scale * (y - s.b[0]), scale * (s.b[2] - s.a[1] * y)];
            s.run(data, [zi[0] * first, zi[1] * first]);
            scale *= y;
        }
    }

    /// Forward-backward filtering with odd-extension padding, so the net
    /// response has zero phase and squared magnitude.
    pub fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        if n == 0 {
            return Vec::new();
        }
        let pad = (3 * (2 * self.sections.len() + 1)).min(n - 1);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        for i in (1..=pad).rev() {
            ext.push(2.0 * x[0] - x[i]);
        }
        ext.extend_from_slice(x);
        for i in 1..=pad {
            ext.push(2.0 * x[n - 1] - x[n - 1 - i]);
        }
        self.run_with_initial_conditions(&mut ext);
        ext.reverse();
        self.run_with_initial_conditions(&mut ext);
        ext.reverse();
        ext[pad..pad + n].to_vec()
    }
}

/// Groups poles into conjugate pairs; leftover real poles are paired with
/// each other.
fn pair_poles(poles: &[Complex64]) -> Vec<(Complex64, Complex64)> {
    const TOL: f64 = 1e-10;
    let mut complex: Vec<Complex64> = poles.iter().copied().filter(|p| p.im > TOL).collect();
    complex.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let mut real: Vec<Complex64> = poles
        .iter()
        .filter(|p| p.im.abs() <= TOL)
        .map(|p| Complex64::new(p.re, 0.0))
        .collect();
    real.sort_by(|a, b| a.re.total_cmp(&b.re));
    let mut pairs: Vec<_> = complex.into_iter().map(|p| (p, p.conj())).collect();
    for chunk in real.chunks(2) {
        let q = chunk.get(1).copied().unwrap_or(Complex64::new(0.0, 0.0));
        pairs.push((chunk[0], q));
    }
    pairs
}
