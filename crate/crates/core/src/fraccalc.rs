//! Grid-based fractional calculus on uniform grids t_j = j·dt.
//!
//! Every convolution ∫_0^t k(t−s) f(s) ds is discretized by product
//! integration against the piecewise-linear interpolant of f. The weights
//! are Toeplitz and follow from the first two antiderivatives K₁, K₂ of the
//! kernel. Functions whose expansion at the origin contains fractional
//! powers t^{σ+i+jδ} declare it through [`Origin`]; the rule is then made
//! exact for those powers by a handful of starting weights attached to the
//! first grid values, which restores O(dt²) accuracy.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FraxionError, Result};
use crate::quad::{integrate, integrate_to_infinity, QuadConfig};
use crate::renewal::{counting_probability, FracOrder, ProcessSpec};
use crate::specfun::contour::invert_parabolic;
use crate::specfun::{gamma, gamma::ln_gamma, ml, pochhammer, recip_gamma_value};

/// Declared behaviour at t = 0: f(t) = Σ c_{ij} t^{σ + i + j·step}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Origin {
    pub sigma: f64,
    pub step: f64,
}

impl Origin {
    pub fn new(sigma: f64, step: f64) -> Result<Self> {
        if !(sigma > -1.0) {
            return Err(FraxionError::domain(format!("origin exponent must exceed -1, got {sigma}")));
        }
        if !(step > 0.0) {
            return Err(FraxionError::domain("origin step must be positive"));
        }
        Ok(Self { sigma, step })
    }

    /// The value at the origin is infinite and is stored as zero.
    pub fn is_singular(&self) -> bool {
        self.sigma < 0.0
    }
}

/// Samples of a real function on the uniform grid t0 + j·dt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    t0: f64,
    dt: f64,
    values: Vec<f64>,
    origin: Option<Origin>,
}

impl GridFunction {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(t0 >= 0.0 && t0.is_finite()) {
            return Err(FraxionError::domain("grid start must be >= 0"));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(FraxionError::domain("grid step must be positive"));
        }
        if values.len() < 2 {
            return Err(FraxionError::domain("grid needs at least two points"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FraxionError::domain(format!("non-finite grid value at index {i}")));
        }
        Ok(Self {
            t0,
            dt,
            values,
            origin: None,
        })
    }

    /// Sample `f` on [0, t_end]; with a singular origin the t = 0 sample is
    /// skipped and stored as zero.
    pub fn sample<F: Fn(f64) -> f64>(f: F, t_end: f64, dt: f64, origin: Option<Origin>) -> Result<Self> {
        let n = (t_end / dt).round() as usize;
        let skip0 = origin.is_some_and(|o| o.is_singular());
        let values = (0..=n)
            .map(|j| if j == 0 && skip0 { 0.0 } else { f(j as f64 * dt) })
            .collect();
        let mut g = Self::new(0.0, dt, values)?;
        g.origin = origin;
        Ok(g)
    }

    /// Fallible sampling, for closures built on library calls.
    pub fn try_sample<F: Fn(f64) -> Result<f64>>(f: F, t_end: f64, dt: f64, origin: Option<Origin>) -> Result<Self> {
        let n = (t_end / dt).round() as usize;
        let skip0 = origin.is_some_and(|o| o.is_singular());
        let values = (0..=n)
            .map(|j| if j == 0 && skip0 { Ok(0.0) } else { f(j as f64 * dt) })
            .collect::<Result<Vec<_>>>()?;
        let mut g = Self::new(0.0, dt, values)?;
        g.origin = origin;
        Ok(g)
    }

    pub fn with_origin(mut self, origin: Option<Origin>) -> Self {
        self.origin = origin;
        self
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn origin(&self) -> Option<Origin> {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn t(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.t(self.values.len() - 1)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(|j| self.t(j))
    }

    /// Piecewise-linear interpolation, constant beyond the last node.
    pub fn eval(&self, t: f64) -> f64 {
        let x = (t - self.t0) / self.dt;
        if x <= 0.0 {
            return self.values[0];
        }
        let last = self.values.len() - 1;
        if x >= last as f64 {
            return self.values[last];
        }
        let j = x.floor() as usize;
        let w = x - j as f64;
        (1.0 - w) * self.values[j] + w * self.values[j + 1]
    }

    /// max |self − other| over grid points with a ≤ t ≤ b.
    pub fn sup_diff(&self, other: &GridFunction, a: f64, b: f64) -> Result<f64> {
        self.sup_diff_by(|t| Ok(other.eval(t)), a, b)
    }

    /// max |self(t) − f(t)| over grid points with a ≤ t ≤ b.
    pub fn sup_diff_by<F: Fn(f64) -> Result<f64>>(&self, f: F, a: f64, b: f64) -> Result<f64> {
        let tol = 1e-9 * self.dt;
        let mut worst: f64 = 0.0;
        for (j, v) in self.values.iter().enumerate() {
            let t = self.t(j);
            if t >= a - tol && t <= b + tol {
                worst = worst.max((v - f(t)?).abs());
            }
        }
        Ok(worst)
    }

    fn require_origin_grid(&self) -> Result<()> {
        if self.t0 != 0.0 {
            return Err(FraxionError::domain("fractional operators need a grid starting at t = 0"));
        }
        Ok(())
    }

    fn map_values(&self, values: Vec<f64>, origin: Option<Origin>) -> Result<GridFunction> {
        let mut g = GridFunction::new(self.t0, self.dt, values)?;
        g.origin = origin;
        Ok(g)
    }
}

// ---------------------------------------------------------------------------
// product integration

/// Kernel k with antiderivatives K₁' = k, K₂' = K₁ (both vanishing at 0) and
/// the exact convolution with s^ν.
trait Kernel {
    fn k1(&self, t: f64) -> Result<f64>;
    fn k2(&self, t: f64) -> Result<f64>;
    /// ∫_0^t k(t−s) s^ν ds
    fn power(&self, nu: f64, t: f64) -> Result<f64>;
}

/// Riemann-Liouville kernel t^{β−1}/Γ(β).
struct RlKernel {
    beta: f64,
}

impl Kernel for RlKernel {
    fn k1(&self, t: f64) -> Result<f64> {
        Ok(t.powf(self.beta) * recip_gamma_value(self.beta + 1.0))
    }
    fn k2(&self, t: f64) -> Result<f64> {
        Ok(t.powf(self.beta + 1.0) * recip_gamma_value(self.beta + 2.0))
    }
    fn power(&self, nu: f64, t: f64) -> Result<f64> {
        Ok((ln_gamma(nu + 1.0) - ln_gamma(nu + 1.0 + self.beta)).exp() * t.powf(nu + self.beta))
    }
}

/// Resolvent kernel t^{α−1} E_{α,α}(−c t^α) of the Abel-Volterra equation.
struct ResolventKernel {
    alpha: f64,
    c: f64,
}

impl Kernel for ResolventKernel {
    fn k1(&self, t: f64) -> Result<f64> {
        let a = self.alpha;
        Ok(t.powf(a) * ml(a, a + 1.0, 1.0, -self.c * t.powf(a))?)
    }
    fn k2(&self, t: f64) -> Result<f64> {
        let a = self.alpha;
        Ok(t.powf(a + 1.0) * ml(a, a + 2.0, 1.0, -self.c * t.powf(a))?)
    }
    fn power(&self, nu: f64, t: f64) -> Result<f64> {
        let a = self.alpha;
        Ok(ln_gamma(nu + 1.0).exp() * t.powf(nu + a) * ml(a, nu + a + 1.0, 1.0, -self.c * t.powf(a))?)
    }
}

const MAX_CORRECTIONS: usize = 8;
const EXPONENT_CAP: f64 = 2.0;

/// Exponents σ + i + Σ_k j_k·step_k below the cap. Powers the linear rule
/// already integrates exactly (t^0, t^1) stay in the set so that the
/// corrections leave them untouched.
fn correction_exponents(sigma: f64, steps: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = vec![sigma];
    let mut frontier = vec![sigma];
    while let Some(e) = frontier.pop() {
        for &s in std::iter::once(&1.0).chain(steps.iter()) {
            let n = e + s;
            if n < EXPONENT_CAP - 1e-12 && !out.iter().any(|&x| (x - n).abs() < 1e-9) {
                out.push(n);
                frontier.push(n);
            }
        }
    }
    if sigma > 0.0 {
        out.push(0.0);
    }
    if !out.iter().any(|&x| (x - 1.0).abs() < 1e-9) {
        out.push(1.0);
    }
    out.sort_by(f64::total_cmp);
    out.truncate(MAX_CORRECTIONS);
    out
}

/// Toeplitz product-integration weights plus starting corrections.
struct ProductRule {
    h: f64,
    /// weight of f_j for 1 ≤ j ≤ n, indexed by m = n − j (m = 0 is the diagonal)
    interior: Vec<f64>,
    /// weight of f_0 at step n
    first: Vec<f64>,
    /// starting weights: corr[n][q−1] multiplies f_q
    corr: Vec<Vec<f64>>,
    use_f0: bool,
}

impl ProductRule {
    fn build<K: Kernel>(kernel: &K, h: f64, n: usize, origin: Option<Origin>, steps: &[f64]) -> Result<Self> {
        let k1: Vec<f64> = (0..=n).map(|m| kernel.k1(m as f64 * h)).collect::<Result<_>>()?;
        let k2: Vec<f64> = (0..=n).map(|m| kernel.k2(m as f64 * h)).collect::<Result<_>>()?;
        let mut interior = vec![0.0; n + 1];
        interior[0] = k2[1] / h;
        for m in 1..n {
            interior[m] = (k2[m + 1] - 2.0 * k2[m] + k2[m - 1]) / h;
        }
        let mut first = vec![0.0; n + 1];
        for m in 1..=n {
            first[m] = k1[m] - (k2[m] - k2[m - 1]) / h;
        }
        let use_f0 = !origin.is_some_and(|o| o.is_singular());
        let mut rule = Self {
            h,
            interior,
            first,
            corr: Vec::new(),
            use_f0,
        };
        if let Some(o) = origin {
            let mut all_steps = vec![o.step];
            all_steps.extend_from_slice(steps);
            let exps = correction_exponents(o.sigma, &all_steps);
            rule.corr = rule.starting_weights(kernel, n, &exps)?;
        }
        Ok(rule)
    }

    fn base(&self, n: usize, f: &[f64]) -> f64 {
        let mut s = if self.use_f0 { self.first[n] * f[0] } else { 0.0 };
        for j in 1..=n {
            s += self.interior[n - j] * f[j];
        }
        s
    }

    fn starting_weights<K: Kernel>(&self, kernel: &K, n: usize, exps: &[f64]) -> Result<Vec<Vec<f64>>> {
        let kq = exps.len().min(n);
        if kq == 0 {
            return Ok(Vec::new());
        }
        let exps = &exps[..kq];
        // V[ν][q] = q^ν after scaling row ν by h^{−ν}
        let v: Vec<Vec<f64>> = exps
            .iter()
            .map(|&nu| (1..=kq).map(|q| (q as f64).powf(nu)).collect())
            .collect();
        let lu = Lu::factor(v)?;
        let mut corr = vec![vec![0.0; kq]; n + 1];
        let mut samples = vec![0.0; n + 1];
        for (i, &nu) in exps.iter().enumerate() {
            for (j, s) in samples.iter_mut().enumerate() {
                *s = if j == 0 {
                    if nu == 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    (j as f64 * self.h).powf(nu)
                };
            }
            for (step, row) in corr.iter_mut().enumerate().skip(1) {
                let resid = kernel.power(nu, step as f64 * self.h)? - self.base(step, &samples);
                row[i] = resid * self.h.powf(-nu);
            }
        }
        for row in corr.iter_mut().skip(1) {
            *row = lu.solve(row);
        }
        Ok(corr)
    }

    fn correction(&self, n: usize, f: &[f64]) -> f64 {
        if self.corr.is_empty() {
            return 0.0;
        }
        self.corr[n].iter().enumerate().map(|(i, w)| w * f[i + 1]).sum()
    }

    fn apply(&self, n: usize, f: &[f64]) -> f64 {
        self.base(n, f) + self.correction(n, f)
    }
}

/// Small dense LU with partial pivoting.
struct Lu {
    a: Vec<Vec<f64>>,
    piv: Vec<usize>,
}

impl Lu {
    fn factor(mut a: Vec<Vec<f64>>) -> Result<Self> {
        let n = a.len();
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
                .expect("non-empty");
            if a[p][k] == 0.0 {
                return Err(FraxionError::domain("singular starting-weight system"));
            }
            a.swap(k, p);
            piv.swap(k, p);
            for i in k + 1..n {
                let m = a[i][k] / a[k][k];
                a[i][k] = m;
                for j in k + 1..n {
                    a[i][j] -= m * a[k][j];
                }
            }
        }
        Ok(Self { a, piv })
    }

    /// Solve A x = b.
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.a.len();
        let mut x: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] -= self.a[i][j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.a[i][j] * x[j];
            }
            x[i] /= self.a[i][i];
        }
        x
    }
}

fn check_order(order: f64) -> Result<()> {
    if order > 0.0 && order <= 1.0 {
        Ok(())
    } else {
        Err(FraxionError::domain(format!("order must lie in (0,1], got {order}")))
    }
}

/// Expansion of the output of an order-`by` operator; a smooth input counts
/// as the expansion in integer powers.
fn shifted_origin(o: Option<Origin>, by: f64) -> Option<Origin> {
    let o = o.unwrap_or(Origin { sigma: 0.0, step: 1.0 });
    Some({
        let mut sigma = o.sigma + by;
        // powers hitting t^{−1}/Γ(0) vanish; the next one leads
        while sigma <= -1.0 + 1e-12 {
            sigma += o.step;
        }
        Origin { sigma, step: o.step }
    })
}

/// (D^{−β} f)(t) = (1/Γ(β)) ∫_0^t (t−s)^{β−1} f(s) ds for 0 < β ≤ 1.
pub fn rl_integral(order: f64, f: &GridFunction) -> Result<GridFunction> {
    check_order(order)?;
    f.require_origin_grid()?;
    let n = f.len() - 1;
    let rule = ProductRule::build(&RlKernel { beta: order }, f.dt, n, f.origin, &[])?;
    let mut out = vec![0.0; n + 1];
    for (k, o) in out.iter_mut().enumerate().skip(1) {
        *o = rule.apply(k, &f.values);
    }
    let origin = shifted_origin(f.origin, order);
    // the origin value is finite and nonzero only for a leading t^0 term
    out[0] = match origin {
        Some(o) if o.sigma.abs() <= 1e-12 => 2.0 * out[1] - out[2],
        _ => 0.0,
    };
    f.map_values(out, origin)
}

/// Riemann-Liouville derivative D^α f = d/dt D^{−(1−α)} f, with second-order
/// differences of the fractional integral.
pub fn rl_derivative(order: FracOrder, f: &GridFunction) -> Result<GridFunction> {
    f.require_origin_grid()?;
    if f.len() < 3 {
        return Err(FraxionError::domain("derivative needs at least three grid points"));
    }
    let a = order.alpha();
    let g = rl_integral(1.0 - a, f)?;
    let v = &g.values;
    let h = f.dt;
    let n = v.len() - 1;
    let mut out = vec![0.0; n + 1];
    for k in 1..n {
        out[k] = (v[k + 1] - v[k - 1]) / (2.0 * h);
    }
    out[n] = (3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]) / (2.0 * h);
    let origin = shifted_origin(f.origin, -a);
    out[0] = if origin.is_some_and(|o| o.is_singular()) {
        0.0
    } else {
        (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
    };
    f.map_values(out, origin)
}

/// Behaviour of f beyond the last grid point, for the Weyl integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TailModel {
    /// f ≡ 0 beyond the grid.
    Zero,
    /// f(t) = a·t^{−p}, with a fitted to the last grid value.
    Power { exponent: f64 },
    /// f(t) = a·e^{−λt}, with a fitted to the last grid value.
    Exponential { rate: f64 },
}

/// (W^α f)(x) = (1/Γ(α)) ∫_x^∞ (t−x)^{α−1} f(t) dt for 0 < α ≤ 1.
///
/// The part on the grid uses the mirrored product rule; beyond the grid the
/// tail model is integrated by quadrature. The value at t = 0 is unreliable
/// for a singular origin.
pub fn weyl_integral(order: f64, f: &GridFunction, tail: TailModel) -> Result<GridFunction> {
    check_order(order)?;
    let n = f.len() - 1;
    let h = f.dt;
    let big_t = f.t_end();
    let last = f.values[n];
    let tail_fn: Box<dyn Fn(f64) -> f64> = match tail {
        TailModel::Zero => Box::new(|_| 0.0),
        TailModel::Power { exponent } => {
            if !(exponent > order) {
                return Err(FraxionError::TailUnbounded(format!(
                    "power tail t^-{exponent} is not integrable against (t-x)^{}",
                    order - 1.0
                )));
            }
            let a = last * big_t.powf(exponent);
            Box::new(move |t: f64| a * t.powf(-exponent))
        }
        TailModel::Exponential { rate } => {
            if !(rate > 0.0) {
                return Err(FraxionError::TailUnbounded(format!("exponential rate {rate} must be positive")));
            }
            let a = last * (rate * big_t).exp();
            Box::new(move |t: f64| a * (-rate * t).exp())
        }
    };
    let kernel = RlKernel { beta: order };
    let k1: Vec<f64> = (0..=n).map(|m| kernel.k1(m as f64 * h)).collect::<Result<_>>()?;
    let k2: Vec<f64> = (0..=n).map(|m| kernel.k2(m as f64 * h)).collect::<Result<_>>()?;
    let diag = k2[1] / h;
    let mut inner = vec![0.0; n + 1];
    for m in 1..n {
        inner[m] = (k2[m + 1] - 2.0 * k2[m] + k2[m - 1]) / h;
    }
    let g_alpha = recip_gamma_value(order);
    let mut out = vec![0.0; n + 1];
    for (k, o) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        if k < n {
            s += diag * f.values[k];
            for j in k + 1..n {
                s += inner[j - k] * f.values[j];
            }
            let m = n - k;
            s += (k1[m] - (k2[m] - k2[m - 1]) / h) * f.values[n];
        }
        s += g_alpha * tail_part(&tail_fn, tail, order, f.t(k), big_t, last)?;
        *o = s;
    }
    f.map_values(out, None)
}

/// ∫_T^∞ (t−x)^{α−1} f_tail(t) dt for x ≤ T.
fn tail_part(tail_fn: &dyn Fn(f64) -> f64, tail: TailModel, order: f64, x: f64, big_t: f64, last: f64) -> Result<f64> {
    match tail {
        TailModel::Zero => Ok(0.0),
        TailModel::Exponential { rate } => {
            // a e^{−λx} λ^{−α} Γ(α, λ(T−x)), with a e^{−λT} = f(T)
            let upper = if big_t > x {
                statrs::function::gamma::gamma_ur(order, rate * (big_t - x))
            } else {
                1.0
            };
            Ok(last * (rate * (big_t - x)).exp() * rate.powf(-order) * gamma(order) * upper)
        }
        TailModel::Power { .. } => {
            let cfg = QuadConfig::new(1e-14, 1e-10);
            let w = big_t.max(1.0);
            let g = |t: f64| (t - x).powf(order - 1.0) * tail_fn(t);
            // the kernel singularity sits on the cut when x = T
            let near = if big_t - x < 1e-12 * big_t {
                crate::quad::integrate_power_left(g, big_t, big_t + w, order, &cfg)?
            } else {
                integrate(g, big_t, big_t + w, &cfg)?
            };
            let far = integrate_to_infinity(g, big_t + w, &cfg)?;
            Ok(near.value + far.value)
        }
    }
}

/// Abel-Volterra equation of the second kind f(x) + c (D^{−α} f)(x) = g(x).
#[derive(Debug, Clone, PartialEq)]
pub struct AbelProblem {
    pub order: FracOrder,
    pub c: f64,
    pub g: GridFunction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AbelMethod {
    /// f = g − c ∫ (x−t)^{α−1} E_{α,α}(−c(x−t)^α) g(t) dt
    Resolvent,
    /// implicit product-integration time stepping of the equation itself
    Stepping,
}

pub fn solve_abel_volterra(problem: &AbelProblem, method: AbelMethod) -> Result<GridFunction> {
    let g = &problem.g;
    g.require_origin_grid()?;
    if !problem.c.is_finite() {
        return Err(FraxionError::domain("coefficient c must be finite"));
    }
    let a = problem.order.alpha();
    let c = problem.c;
    let n = g.len() - 1;
    let origin = g.origin;
    if c == 0.0 {
        return g.map_values(g.values.clone(), origin);
    }
    match method {
        AbelMethod::Resolvent => {
            let rule = ProductRule::build(&ResolventKernel { alpha: a, c }, g.dt, n, g.origin, &[])?;
            let mut out = vec![0.0; n + 1];
            out[0] = g.values[0];
            for (k, o) in out.iter_mut().enumerate().skip(1) {
                *o = g.values[k] - c * rule.apply(k, &g.values);
            }
            g.map_values(out, origin)
        }
        AbelMethod::Stepping => {
            // the unknown picks up powers t^{jα} on top of those of g
            let rule = ProductRule::build(&RlKernel { beta: a }, g.dt, n, g.origin.or(Some(Origin { sigma: 0.0, step: a })), &[a])?;
            let mut f = vec![0.0; n + 1];
            f[0] = if rule.use_f0 { g.values[0] } else { 0.0 };
            let kq = rule.corr.first().map_or(0, |_| rule.corr[1.min(n)].len());
            // the first kq values are coupled through the starting weights
            if kq > 0 {
                let mut m = vec![vec![0.0; kq]; kq];
                let mut rhs = vec![0.0; kq];
                for r in 0..kq {
                    let step = r + 1;
                    rhs[r] = g.values[step] - if rule.use_f0 { c * rule.first[step] * f[0] } else { 0.0 };
                    m[r][r] += 1.0;
                    for j in 1..=step {
                        m[r][j - 1] += c * rule.interior[step - j];
                    }
                    for q in 0..kq {
                        m[r][q] += c * rule.corr[step][q];
                    }
                }
                let lu = Lu::factor(m).map_err(|_| FraxionError::SolverDivergence {
                    step: 1,
                    detail: "singular starting system".into(),
                })?;
                let x = lu.solve(&rhs);
                f[1..=kq].copy_from_slice(&x);
            }
            let diag = 1.0 + c * rule.interior[0];
            if diag.abs() < 1e-12 {
                return Err(FraxionError::SolverDivergence {
                    step: kq + 1,
                    detail: "vanishing implicit diagonal".into(),
                });
            }
            for k in kq + 1..=n {
                let mut hist = if rule.use_f0 { rule.first[k] * f[0] } else { 0.0 };
                for j in 1..k {
                    hist += rule.interior[k - j] * f[j];
                }
                hist += rule.correction(k, &f);
                f[k] = (g.values[k] - c * hist) / diag;
                if !f[k].is_finite() {
                    return Err(FraxionError::SolverDivergence {
                        step: k,
                        detail: "non-finite iterate".into(),
                    });
                }
            }
            g.map_values(f, origin)
        }
    }
}

/// Kernel K_γ(t) = L^{−1}[(1 + s^α/γ)^{−γ}](t) = γ^γ t^{αγ−1} E^γ_{α,αγ}(−γ t^α).
pub fn j_kernel(alpha: f64, gamma_: f64, t: f64) -> f64 {
    invert_parabolic(
        |s: Complex64| (1.0 + s.powf(alpha) / gamma_).powf(-gamma_),
        t,
        crate::specfun::contour::DEFAULT_NODES,
    )
    .value
}

/// Finite-γ J-transform α ∫_0^∞ (x/t)^{α−1} f((x/t)^α) K_γ(t) dt/t of a
/// grid function (linearly interpolated, constant beyond its last node).
pub fn j_transform_approx(order: FracOrder, f: &GridFunction, gamma_: f64, x: f64) -> Result<f64> {
    j_transform_approx_fn(order, |u| f.eval(u), gamma_, x)
}

/// [`j_transform_approx`] for a closure.
pub fn j_transform_approx_fn<F: Fn(f64) -> f64>(order: FracOrder, f: F, gamma_: f64, x: f64) -> Result<f64> {
    if !(gamma_ > 0.0 && gamma_.is_finite()) {
        return Err(FraxionError::domain("gamma must be positive and finite"));
    }
    if !(x > 0.0) {
        return Err(FraxionError::domain("x must be positive"));
    }
    let a = order.alpha();
    let integrand = |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        let r = x / t;
        a * r.powf(a - 1.0) * f(r.powf(a)) * j_kernel(a, gamma_, t) / t
    };
    let cfg = QuadConfig::new(1e-9, 1e-8);
    let head = integrate(integrand, 0.0, 1.0, &cfg)?;
    let tail = integrate_to_infinity(integrand, 1.0, &cfg)?;
    Ok(head.value + tail.value)
}

/// Residual sup of D^α P_{n,α,l} against the differential-difference system
/// (n/(n+l−1)) D^α P_n = P_{n−1} − (n/(n+l−1)) P_n (with P_{−1} ≡ 0) over
/// n ≤ n_max and t ∈ [0.1, horizon].
pub fn ddeq_residual(spec: ProcessSpec, horizon: f64, n_max: u32, dt: f64) -> Result<f64> {
    let a = spec.order.alpha();
    let l = spec.fold as f64;
    let mut worst: f64 = 0.0;
    let mut prev: Option<GridFunction> = None;
    for n in 0..=n_max {
        let sigma = (n as f64 + l) * a - 1.0;
        let at_origin = if sigma.abs() < 1e-12 { pochhammer(l, n) / gamma(n as f64 + 1.0) } else { 0.0 };
        let p = GridFunction::try_sample(
            |t| if t == 0.0 { Ok(at_origin) } else { counting_probability(spec, n, t) },
            horizon,
            dt,
            Some(Origin::new(sigma, a)?),
        )?;
        let d = rl_derivative(spec.order, &p)?;
        // for l > 1 the n = 0 row is void
        let w = if spec.fold == 1 { 1.0 } else { n as f64 / (n as f64 + l - 1.0) };
        for j in 0..p.len() {
            let t = p.t(j);
            if t < 0.1 - 1e-9 || t > horizon + 1e-9 {
                continue;
            }
            let lower = prev.as_ref().map_or(0.0, |q| q.values[j]);
            let r = w * d.values[j] - (lower - w * p.values[j]);
            worst = worst.max(r.abs());
        }
        prev = Some(p);
    }
    Ok(worst)
}

/// Lattice Kolmogorov-Feller residual D^α P_n = P_{n−1} − P_n at dt = 1e−3.
pub fn kf_residual(order: FracOrder, horizon: f64, n_max: u32) -> Result<f64> {
    ddeq_residual(ProcessSpec::single(order), horizon, n_max, 1e-3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponents_for_density_origin() {
        let e = correction_exponents(-0.5, &[0.5]);
        assert_eq!(e, vec![-0.5, 0.0, 0.5, 1.0, 1.5]);
        let e = correction_exponents(0.25, &[1.0]);
        assert_eq!(e, vec![0.0, 0.25, 1.0, 1.25]);
    }

    #[test]
    fn lu_solves_small_system() {
        let lu = Lu::factor(vec![vec![0.0, 2.0], vec![3.0, 1.0]]).unwrap();
        let x = lu.solve(&[4.0, 5.0]);
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(GridFunction::new(0.0, 0.0, vec![1.0, 2.0]).is_err());
        assert!(GridFunction::new(0.0, 0.1, vec![1.0]).is_err());
        assert!(GridFunction::new(0.0, 0.1, vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn interpolation() {
        let g = GridFunction::new(0.0, 0.5, vec![0.0, 1.0, 4.0]).unwrap();
        assert_eq!(g.eval(0.25), 0.5);
        assert_eq!(g.eval(5.0), 4.0);
    }
}
