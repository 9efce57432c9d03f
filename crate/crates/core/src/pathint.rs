//! Pathwise integrals of `|v(s)|^{-β}` for a sampled path `v`, 0 < β < 1.
//!
//! Between nodes `v` is taken to be linear and the singular power is integrated
//! exactly against that interpolant:
//! `∫ₐᵇ |v|^{-β} ds = (b - a) (F(v_b) - F(v_a)) / (v_b - v_a)`, with
//! `F(v) = sgn(v) |v|^{1-β} / (1-β)`. Sign changes and zero endpoints inside a
//! cell are therefore integrable and never produce infinities; only a cell on
//! which `v` vanishes identically diverges.

/// Relative slope below which a cell is integrated by the midpoint value.
const FLAT_CELL: f64 = 1e-5;

fn antiderivative(v: f64, beta: f64) -> f64 {
    v.signum() * v.abs().powf(1.0 - beta) / (1.0 - beta)
}

/// `∫` over one cell of width `width` with `v` linear from `va` to `vb`.
pub fn linear_cell(va: f64, vb: f64, width: f64, beta: f64) -> f64 {
    let scale = va.abs().max(vb.abs());
    if scale == 0.0 {
        return f64::INFINITY;
    }
    let dv = vb - va;
    if dv.abs() <= FLAT_CELL * scale {
        return width * (0.5 * (va + vb)).abs().powf(-beta);
    }
    width * (antiderivative(vb, beta) - antiderivative(va, beta)) / dv
}

/// Running integral at every node, starting from 0.
pub fn cumulative(times: &[f64], vals: &[f64], beta: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(times.len());
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..times.len() {
        acc += linear_cell(vals[k - 1], vals[k], times[k] - times[k - 1], beta);
        out.push(acc);
    }
    out
}

/// Integral over `[times[0], upto]`, cutting the last cell by linear interpolation.
pub fn integral_upto(times: &[f64], vals: &[f64], beta: f64, upto: f64) -> f64 {
    let mut acc = 0.0;
    for k in 1..times.len() {
        let (a, b) = (times[k - 1], times[k]);
        if a >= upto {
            break;
        }
        if b <= upto {
            acc += linear_cell(vals[k - 1], vals[k], b - a, beta);
        } else {
            let w = (upto - a) / (b - a);
            let v_cut = vals[k - 1] + w * (vals[k] - vals[k - 1]);
            acc += linear_cell(vals[k - 1], v_cut, upto - a, beta);
        }
    }
    acc
}

/// Number of cells on which the path changes sign strictly.
pub fn sign_changes(vals: &[f64]) -> usize {
    vals.windows(2).filter(|w| w[0] * w[1] < 0.0).count()
}
