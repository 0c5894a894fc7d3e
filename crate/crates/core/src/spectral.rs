//! DFT helpers between symmetric coefficient vectors `c_{-N..N}` and
//! uniform samples on `x_j = j/M`.

use std::cell::RefCell;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub fn fft_forward(buf: &mut [Complex64]) {
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    fft.process(buf);
}

pub fn fft_inverse(buf: &mut [Complex64]) {
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()));
    fft.process(buf);
}

/// Values `sum_n c_n e^{2 pi i n j / M}` for `j = 0..M`. Modes beyond M/2 alias.
pub fn synthesize(coeffs: &[Complex64], max_mode: usize, m: usize) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for (idx, c) in coeffs.iter().enumerate() {
        let n = idx as i64 - max_mode as i64;
        buf[n.rem_euclid(m as i64) as usize] += c;
    }
    fft_inverse(&mut buf);
    buf
}

/// Coefficients `c_n = (1/M) sum_j v_j e^{-2 pi i n j / M}` for `n = -N..N`.
pub fn analyze(values: &[Complex64], max_mode: usize) -> Vec<Complex64> {
    let m = values.len();
    let mut buf = values.to_vec();
    fft_forward(&mut buf);
    let scale = 1.0 / m as f64;
    (-(max_mode as i64)..=max_mode as i64)
        .map(|n| buf[n.rem_euclid(m as i64) as usize] * scale)
        .collect()
}

pub fn grid(m: usize) -> impl Iterator<Item = f64> {
    (0..m).map(move |j| j as f64 / m as f64)
}

pub fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// `e^{2 pi i t}`
pub fn e(t: f64) -> Complex64 {
    cis(TAU * t)
}
