use super::{Axis, BoundaryMode, GridError, GridFunction};

/// First derivative of a uniformly sampled line, second order everywhere.
///
/// One-sided mode needs `f.len() >= 3`; periodic mode needs `f.len() >= 3`.
pub fn d1_line(f: &[f64], h: f64, mode: BoundaryMode, out: &mut [f64]) {
    let n = f.len();
    debug_assert!(n >= 3 && out.len() == n);
    let s = 0.5 / h;
    for i in 1..n - 1 {
        out[i] = (f[i + 1] - f[i - 1]) * s;
    }
    match mode {
        BoundaryMode::OneSided => {
            out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * s;
            out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * s;
        }
        BoundaryMode::Periodic => {
            out[0] = (f[1] - f[n - 1]) * s;
            out[n - 1] = (f[0] - f[n - 2]) * s;
        }
    }
}

/// Second derivative of a uniformly sampled line, second order everywhere.
///
/// One-sided mode needs `f.len() >= 4`; periodic mode needs `f.len() >= 3`.
pub fn d2_line(f: &[f64], h: f64, mode: BoundaryMode, out: &mut [f64]) {
    let n = f.len();
    debug_assert!(out.len() == n);
    let s = 1.0 / (h * h);
    for i in 1..n - 1 {
        out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) * s;
    }
    match mode {
        BoundaryMode::OneSided => {
            out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) * s;
            out[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) * s;
        }
        BoundaryMode::Periodic => {
            out[0] = (f[1] - 2.0 * f[0] + f[n - 1]) * s;
            out[n - 1] = (f[0] - 2.0 * f[n - 1] + f[n - 2]) * s;
        }
    }
}

pub(crate) fn min_points(order: u8, mode: BoundaryMode) -> usize {
    match (order, mode) {
        (2, BoundaryMode::OneSided) => 4,
        _ => 3,
    }
}

/// [`diff_with`] using one-sided boundary stencils.
pub fn diff(f: &GridFunction, axis: Axis, order: u8) -> Result<GridFunction, GridError> {
    diff_with(f, axis, order, BoundaryMode::OneSided)
}

/// Derivative of `order` 1 or 2 along `axis`.
pub fn diff_with(f: &GridFunction, axis: Axis, order: u8, mode: BoundaryMode) -> Result<GridFunction, GridError> {
    assert!(order == 1 || order == 2, "diff supports orders 1 and 2");
    let g = *f.grid();
    let n = g.count(axis);
    let needed = min_points(order, mode);
    if n < needed {
        return Err(GridError::TooFewPoints { axis, needed, got: n });
    }
    let h = g.spacing(axis);
    let stride = match axis {
        Axis::Theta => 1,
        Axis::Eta => g.n_theta,
        Axis::V => g.n_theta * g.n_eta,
    };
    let src = f.values();
    let mut out = vec![0.0; src.len()];
    let mut line = vec![0.0; n];
    let mut dline = vec![0.0; n];
    for start in 0..src.len() {
        if (start / stride) % n != 0 {
            continue;
        }
        for (m, x) in line.iter_mut().enumerate() {
            *x = src[start + m * stride];
        }
        if order == 1 {
            d1_line(&line, h, mode, &mut dline);
        } else {
            d2_line(&line, h, mode, &mut dline);
        }
        for (m, x) in dline.iter().enumerate() {
            out[start + m * stride] = *x;
        }
    }
    Ok(GridFunction::from_raw(g, out))
}
