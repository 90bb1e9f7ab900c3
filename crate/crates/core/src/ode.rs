//! Adaptive Dormand–Prince 5(4) integration of complex linear systems, and the
//! single-excitation emitter/mode network both dynamics modules run on.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Hard cap on accepted + rejected steps.
    pub max_steps: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 200_000_000,
        }
    }
}

// Dormand–Prince tableau; the system is autonomous so the nodes c_i are not needed.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates the autonomous system `y' = f(y)` from `t = 0`, calling
/// `observe(k, y)` at each requested output time (ascending, ≥ 0).
///
/// Steps are clipped to land exactly on output times. The error norm is the
/// maximum over components, so appending components that stay identically
/// zero leaves the step sequence unchanged.
pub fn dopri5<F, O>(rhs: F, y0: &[Complex64], output_times: &[f64], opts: &AdaptiveOptions, mut observe: O) -> Result<()>
where
    F: Fn(&[Complex64], &mut [Complex64]),
    O: FnMut(usize, &[Complex64]),
{
    let dim = y0.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<Complex64>> = vec![vec![zero; dim]; 7];
    let mut tmp = vec![zero; dim];
    let mut y_new = vec![zero; dim];

    let t_final = output_times.last().copied().unwrap_or(0.0);
    let mut t = 0.0;
    let mut next_out = 0;
    while next_out < output_times.len() && output_times[next_out] <= 0.0 {
        observe(next_out, &y);
        next_out += 1;
    }
    if next_out == output_times.len() {
        return Ok(());
    }

    rhs(&y, &mut k[0]);
    let scale0 = y
        .iter()
        .map(|v| opts.atol + opts.rtol * v.norm())
        .fold(f64::INFINITY, f64::min);
    let deriv = k[0].iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut h = if deriv > 0.0 {
        (0.01 * scale0.max(opts.atol) / deriv).powf(0.2) * (1.0 / deriv).powf(0.8)
    } else {
        t_final
    };
    h = h.min(output_times[next_out] - t).max(t_final * 1e-14);

    let mut steps = 0usize;
    while next_out < output_times.len() {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::Numerical(format!(
                "adaptive integrator exceeded {} steps at t = {t:.6e} s (h = {h:.3e} s)",
                opts.max_steps
            )));
        }
        let target = output_times[next_out];
        let mut landing = false;
        if t + h >= target {
            h = target - t;
            landing = true;
        }
        if h <= t_final * 1e-15 || h <= f64::MIN_POSITIVE {
            return Err(Error::Numerical(format!(
                "step size underflow at t = {t:.6e} s (h = {h:.3e} s, rtol = {:e}, atol = {:e})",
                opts.rtol, opts.atol
            )));
        }

        stage(&y, &[(A21, &k[0])], h, &mut tmp);
        rhs(&tmp, &mut k[1]);
        stage(&y, &[(A31, &k[0]), (A32, &k[1])], h, &mut tmp);
        rhs(&tmp, &mut k[2]);
        stage(&y, &[(A41, &k[0]), (A42, &k[1]), (A43, &k[2])], h, &mut tmp);
        rhs(&tmp, &mut k[3]);
        stage(&y, &[(A51, &k[0]), (A52, &k[1]), (A53, &k[2]), (A54, &k[3])], h, &mut tmp);
        rhs(&tmp, &mut k[4]);
        stage(
            &y,
            &[(A61, &k[0]), (A62, &k[1]), (A63, &k[2]), (A64, &k[3]), (A65, &k[4])],
            h,
            &mut tmp,
        );
        rhs(&tmp, &mut k[5]);
        stage(
            &y,
            &[(B1, &k[0]), (B3, &k[2]), (B4, &k[3]), (B5, &k[4]), (B6, &k[5])],
            h,
            &mut y_new,
        );
        rhs(&y_new, &mut k[6]);

        let mut err = 0.0f64;
        for i in 0..dim {
            let e = (k[0][i] * E1 + k[2][i] * E3 + k[3][i] * E4 + k[4][i] * E5 + k[5][i] * E6 + k[6][i] * E7) * h;
            let sc = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
            err = err.max(e.norm() / sc);
        }
        if !err.is_finite() {
            return Err(Error::Numerical(format!("non-finite error estimate at t = {t:.6e} s")));
        }

        if err <= 1.0 {
            t = if landing { target } else { t + h };
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6);
            while next_out < output_times.len() && output_times[next_out] <= t {
                observe(next_out, &y);
                next_out += 1;
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
    }
    Ok(())
}

fn stage(y: &[Complex64], terms: &[(f64, &Vec<Complex64>)], h: f64, out: &mut [Complex64]) {
    for i in 0..y.len() {
        let mut acc = y[i];
        for (a, k) in terms {
            acc += k[i] * (a * h);
        }
        out[i] = acc;
    }
}

/// Emitters and bosonic modes sharing a single excitation, in the frame
/// rotating at the emitter transition frequency:
///
/// ```text
///   ċ_e = −i Σ_m g_em b_m
///   ḃ_m = −i Σ_e g_em c_e + s_m b_m,     s_m = i(ω0 − ω_m) − Γ_m/2
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct SingleExcitationSystem {
    /// `couplings[e][m]` in rad/s.
    pub couplings: Vec<Vec<f64>>,
    pub mode_rates: Vec<Complex64>,
}

impl SingleExcitationSystem {
    pub fn emitter_count(&self) -> usize {
        self.couplings.len()
    }

    pub fn mode_count(&self) -> usize {
        self.mode_rates.len()
    }

    fn rhs(&self, y: &[Complex64], dy: &mut [Complex64]) {
        let ne = self.emitter_count();
        let nm = self.mode_count();
        let mi = Complex64::new(0.0, -1.0);
        let (c, b) = y.split_at(ne);
        for e in 0..ne {
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 0..nm {
                acc += b[m] * self.couplings[e][m];
            }
            dy[e] = mi * acc;
        }
        for m in 0..nm {
            let mut acc = Complex64::new(0.0, 0.0);
            for e in 0..ne {
                acc += c[e] * self.couplings[e][m];
            }
            dy[ne + m] = mi * acc + self.mode_rates[m] * b[m];
        }
    }

    /// Evolves from emitter amplitudes `initial` (modes empty) and returns the
    /// full state at each output time.
    pub fn evolve(&self, initial: &[Complex64], times: &[f64], opts: &AdaptiveOptions) -> Result<Vec<Vec<Complex64>>> {
        assert_eq!(initial.len(), self.emitter_count(), "one initial amplitude per emitter");
        let mut y0 = initial.to_vec();
        y0.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), self.mode_count()));
        let mut out = Vec::with_capacity(times.len());
        dopri5(|y, dy| self.rhs(y, dy), &y0, times, opts, |_, y| out.push(y.to_vec()))?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_rotation_is_accurate() {
        let w = 3.0;
        let times: Vec<f64> = (0..=50).map(|k| k as f64 * 0.1).collect();
        let mut got = Vec::new();
        let opts = AdaptiveOptions::default();
        dopri5(
            |y, dy| dy[0] = Complex64::new(0.0, -w) * y[0],
            &[Complex64::new(1.0, 0.0)],
            &times,
            &opts,
            |_, y| got.push(y[0]),
        )
        .unwrap();
        for (t, y) in times.iter().zip(&got) {
            let exact = Complex64::new(0.0, -w * t).exp();
            assert!((y - exact).norm() < 1e-9);
        }
    }

    #[test]
    fn damped_decay() {
        let times = [0.0, 1.0, 2.0];
        let mut got = Vec::new();
        dopri5(
            |y, dy| dy[0] = y[0] * -0.5,
            &[Complex64::new(2.0, 0.0)],
            &times,
            &AdaptiveOptions::default(),
            |_, y| got.push(y[0].re),
        )
        .unwrap();
        assert_eq!(got[0], 2.0);
        assert!((got[2] - 2.0 * (-1.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn step_budget_exhaustion_reports() {
        let opts = AdaptiveOptions {
            max_steps: 3,
            ..Default::default()
        };
        let err = dopri5(
            |y, dy| dy[0] = Complex64::new(0.0, -1e3) * y[0],
            &[Complex64::new(1.0, 0.0)],
            &[100.0],
            &opts,
            |_, _| {},
        )
        .unwrap_err();
        assert!(matches!(err, Error::Numerical(_)));
    }

    #[test]
    fn resonant_pair_rabi_flops() {
        let g = 2.0;
        let sys = SingleExcitationSystem {
            couplings: vec![vec![g]],
            mode_rates: vec![Complex64::new(0.0, 0.0)],
        };
        let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.05).collect();
        let states = sys.evolve(&[Complex64::new(1.0, 0.0)], &times, &AdaptiveOptions::default()).unwrap();
        for (t, s) in times.iter().zip(&states) {
            assert!((s[0].norm_sqr() - (g * t).cos().powi(2)).abs() < 1e-9);
            assert!((s[0].norm_sqr() + s[1].norm_sqr() - 1.0).abs() < 1e-9);
        }
    }
}
