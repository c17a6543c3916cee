//! Embedded Dormand-Prince 5(4) steps with fourth-order dense output.
//!
//! The stepper is generic over the state dimension so the same kernel drives
//! plain phase-space integration (N = 2) and the variational augmentation
//! (N = 6). Step-size control is the standard PI-free controller with a
//! 0.9 safety factor.

pub const MIN_STEP: f64 = 1e-14;

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

// Fifth-order weights coincide with the last tableau row (FSAL).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];

const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

// Dense-output weights (Hairer-Norsett-Wanner DOPRI5 interpolant).
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Accepted step with a quartic interpolant over `[t0, t0 + h]`.
#[derive(Debug, Clone)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    rcont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Interpolated state at `t` in `[t0, t0 + h]`.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let th = ((t - self.t0) / self.h).clamp(0.0, 1.0);
        let th1 = 1.0 - th;
        let mut y = [0.0; N];
        for i in 0..N {
            y[i] = self.rcont[0][i]
                + th
                    * (self.rcont[1][i]
                        + th1
                            * (self.rcont[2][i]
                                + th * (self.rcont[3][i] + th1 * self.rcont[4][i])));
        }
        y
    }
}

#[derive(Debug, Clone, Copy)]
pub enum StepOutcome {
    Accepted,
    /// Step size collapsed below `MIN_STEP`; integration cannot proceed.
    Underflow,
}

/// One-shot adaptive integrator; owns the FSAL derivative cache.
pub struct Dopri5<'a, const N: usize> {
    f: &'a dyn Fn(f64, &[f64; N]) -> [f64; N],
    pub t: f64,
    pub y: [f64; N],
    h: f64,
    rtol: f64,
    atol: f64,
    k1: [f64; N],
    fsal_valid: bool,
}

impl<'a, const N: usize> Dopri5<'a, N> {
    pub fn new(f: &'a dyn Fn(f64, &[f64; N]) -> [f64; N], t0: f64, y0: [f64; N], tol: f64) -> Self {
        Dopri5 {
            f,
            t: t0,
            y: y0,
            h: 1e-3,
            rtol: tol,
            atol: tol,
            k1: [0.0; N],
            fsal_valid: false,
        }
    }

    pub fn with_initial_step(mut self, h: f64) -> Self {
        self.h = h.max(MIN_STEP);
        self
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    pub fn set_step_size(&mut self, h: f64) {
        self.h = h.max(MIN_STEP);
    }

    /// Advances by one accepted step, or reports step-size underflow.
    pub fn step(&mut self) -> (StepOutcome, Option<DenseStep<N>>) {
        if !self.fsal_valid {
            self.k1 = (self.f)(self.t, &self.y);
            self.fsal_valid = true;
        }
        loop {
            if self.h < MIN_STEP {
                return (StepOutcome::Underflow, None);
            }
            let h = self.h;
            let mut k = [[0.0; N]; 7];
            k[0] = self.k1;
            for stage in 1..7 {
                let mut ys = self.y;
                for j in 0..stage {
                    let a = A[stage][j];
                    if a != 0.0 {
                        for i in 0..N {
                            ys[i] += h * a * k[j][i];
                        }
                    }
                }
                k[stage] = (self.f)(self.t + C[stage] * h, &ys);
            }
            let mut y5 = self.y;
            let mut y4 = self.y;
            for j in 0..7 {
                for i in 0..N {
                    y5[i] += h * B5[j] * k[j][i];
                    y4[i] += h * B4[j] * k[j][i];
                }
            }
            // weighted RMS error
            let mut err = 0.0;
            for i in 0..N {
                let sc = self.atol + self.rtol * self.y[i].abs().max(y5[i].abs());
                let e = (y5[i] - y4[i]) / sc;
                err += e * e;
            }
            err = (err / N as f64).sqrt();

            if err <= 1.0 {
                // dense-output coefficients
                let mut rcont = [[0.0; N]; 5];
                for i in 0..N {
                    let ydiff = y5[i] - self.y[i];
                    let bspl = h * k[0][i] - ydiff;
                    rcont[0][i] = self.y[i];
                    rcont[1][i] = ydiff;
                    rcont[2][i] = bspl;
                    rcont[3][i] = ydiff - h * k[6][i] - bspl;
                    let mut acc = 0.0;
                    for j in 0..7 {
                        acc += D[j] * k[j][i];
                    }
                    rcont[4][i] = h * acc;
                }
                let dense = DenseStep {
                    t0: self.t,
                    h,
                    y0: self.y,
                    y1: y5,
                    rcont,
                };
                self.t += h;
                self.y = y5;
                self.k1 = k[6]; // FSAL
                let scale = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                self.h = (h * scale).max(MIN_STEP);
                return (StepOutcome::Accepted, Some(dense));
            }
            let scale = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            self.h = h * scale;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_accuracy() {
        let f = |_t: f64, y: &[f64; 1]| [-y[0]];
        let mut solver = Dopri5::new(&f, 0.0, [1.0], 1e-10);
        while solver.t < 5.0 {
            let remaining = 5.0 - solver.t;
            if solver.h > remaining {
                solver.h = remaining;
            }
            let (o, _) = solver.step();
            assert!(matches!(o, StepOutcome::Accepted));
        }
        assert!((solver.y[0] - (-5.0_f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn dense_output_matches_interior_solution() {
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]]; // harmonic oscillator
        let mut solver = Dopri5::new(&f, 0.0, [1.0, 0.0], 1e-9);
        let mut worst = 0.0_f64;
        while solver.t < 6.0 {
            let (_, dense) = solver.step();
            let dense = dense.unwrap();
            for m in 1..5 {
                let t = dense.t0 + dense.h * m as f64 / 5.0;
                let y = dense.eval(t);
                worst = worst.max((y[0] - t.cos()).abs());
                worst = worst.max((y[1] + t.sin()).abs());
            }
        }
        assert!(worst < 1e-7, "dense output error {worst}");
    }
}
