//! Free complex-time fractional heat kernel on R^d by radial Fourier inversion.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_ur};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use super::bessel::RadialProfile;
use super::gauss::{gl10, gl20};
use crate::complex_time::ComplexTime;
use crate::error::{domain, LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelQuery {
    pub alpha: f64,
    pub d: usize,
    pub z: ComplexTime,
    pub r: f64,
}

impl KernelQuery {
    pub fn new(alpha: f64, d: usize, z: ComplexTime, r: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return domain(format!("alpha must be positive, got {alpha}"));
        }
        if d == 0 {
            return domain("d must be >= 1");
        }
        if !(r.is_finite() && r >= 0.0) {
            return domain(format!("r must be nonnegative, got {r}"));
        }
        Ok(Self { alpha, d, z, r })
    }

    /// r / |z|^{1/alpha}
    pub fn scaled_r(&self) -> f64 {
        self.r / self.z.modulus().powf(1.0 / self.alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Relative (to the L1 mass of the integrand) size of the discarded tail.
    pub truncation_tol: f64,
    /// Relative error target for the value.
    pub panel_tol: f64,
    /// When the rounding floor blocks `panel_tol`, a result is still returned if its
    /// error bound stays below this fraction of the value.
    pub max_rel_err: f64,
    pub max_panels: usize,
    /// Validity envelope: r / |z|^{1/alpha} at most this.
    pub max_scaled_r: f64,
    /// Validity envelope: |theta| at most this.
    pub max_theta: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            truncation_tol: 1e-15,
            panel_tol: 1e-10,
            max_rel_err: 1e-7,
            max_panels: 20_000,
            max_scaled_r: 50.0,
            max_theta: 1.45,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        for (n, v) in [
            ("truncation_tol", self.truncation_tol),
            ("panel_tol", self.panel_tol),
            ("max_rel_err", self.max_rel_err),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return domain(format!("{n} must lie in (0,1), got {v}"));
            }
        }
        if self.max_panels < 1 {
            return domain("max_panels must be >= 1");
        }
        Ok(())
    }

    pub fn with_envelope(mut self, max_scaled_r: f64) -> Self {
        self.max_scaled_r = max_scaled_r;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelValue {
    pub value: Complex64,
    pub abs_err: f64,
    pub panels: usize,
}

struct Integrand {
    alpha: f64,
    z: Complex64,
    r: f64,
    dm1: i32,
    prof: RadialProfile,
}

impl Integrand {
    fn at(&self, s: f64) -> Complex64 {
        let e = (-self.z * s.powf(self.alpha)).exp();
        e * (s.powi(self.dm1) * self.prof.eval(s * self.r))
    }
}

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
    l1: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err && self.a == o.a
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err).then(o.a.total_cmp(&self.a))
    }
}

fn panel(f: &Integrand, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let g10 = gl10();
    let g20 = gl20();
    let mut i10 = Complex64::new(0.0, 0.0);
    for (x, w) in g10.nodes.iter().zip(&g10.weights) {
        i10 += f.at(c + h * x) * *w;
    }
    let mut i20 = Complex64::new(0.0, 0.0);
    let mut l1 = 0.0;
    for (x, w) in g20.nodes.iter().zip(&g20.weights) {
        let v = f.at(c + h * x);
        i20 += v * *w;
        l1 += v.norm() * w;
    }
    // differences inside the rounding noise of the panel are left to the global floor
    let diff = ((i20 - i10) * h).norm();
    let noise = 8.0 * f64::EPSILON * l1 * h;
    Panel {
        a,
        b,
        value: i20 * h,
        err: if diff > noise { diff } else { 0.0 },
        l1: l1 * h,
    }
}

/// Smallest u with Q(k, u) <= tol.
fn truncation_point(k: f64, tol: f64) -> f64 {
    let mut hi = 1.0;
    while gamma_ur(k, hi) > tol {
        hi *= 2.0;
        if hi > 1e6 {
            break;
        }
    }
    let mut lo = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if gamma_ur(k, mid) > tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

pub fn kernel_free(q: &KernelQuery, spec: &QuadratureSpec) -> Result<KernelValue> {
    spec.validate()?;
    let prof = RadialProfile::new(q.d)?;
    let alpha = q.alpha;
    let d = q.d as f64;
    let zc = q.z.to_complex();
    let a = q.z.re();
    let modz = q.z.modulus();
    let f = Integrand {
        alpha,
        z: zc,
        r: q.r,
        dm1: q.d as i32 - 1,
        prof,
    };

    let k = d / alpha;
    let u = truncation_point(k, spec.truncation_tol);
    let big_r = (u / a).powf(1.0 / alpha);
    let tail = prof.sup() * gamma(k) * gamma_ur(k, u) / (alpha * a.powf(k));

    let hp_r = if q.r > 0.0 { PI / q.r } else { f64::INFINITY };
    // half period of exp(-z s^alpha) in s, evaluated at s
    let hp_z = |s: f64| PI / (alpha * modz * s.powf(alpha - 1.0));
    let s_star = modz.powf(-1.0 / alpha);
    let s0 = 0.5 * s_star.min(hp_r).min(big_r);

    let mut panels: Vec<Panel> = Vec::new();
    let levels = 40;
    panels.push(panel(&f, 0.0, s0 / 2f64.powi(levels)));
    for j in (0..levels).rev() {
        let lo = s0 / 2f64.powi(j + 1);
        let hi = s0 / 2f64.powi(j);
        panels.push(panel(&f, lo, hi));
    }
    let mut s = s0;
    while s < big_r {
        if panels.len() >= spec.max_panels {
            break;
        }
        let w1 = hp_r.min(hp_z(s));
        let w = w1.min(hp_z(s + w1)).min(big_r - s).max(1e-300);
        let e = if big_r - (s + w) < 1e-3 * w { big_r } else { s + w };
        panels.push(panel(&f, s, e));
        s = e;
    }
    let covered = s >= big_r;

    let mut heap: BinaryHeap<Panel> = panels.into_iter().collect();
    let floor_factor = 64.0 * f64::EPSILON;
    let mut reason = String::new();
    let ok = loop {
        let (mut total, mut err, mut l1) = (Complex64::new(0.0, 0.0), 0.0, 0.0);
        for p in heap.iter() {
            total += p.value;
            err += p.err;
            l1 += p.l1;
        }
        let floor = floor_factor * l1 + tail;
        let target = spec.panel_tol * total.norm();
        if !covered {
            reason = format!("max_panels {} reached before covering [0, {big_r:.3e}]", spec.max_panels);
            break Err((total, err + floor));
        }
        if err + floor <= target {
            break Ok((total, err + floor, heap.len()));
        }
        if floor > target && err <= floor {
            if err + floor <= spec.max_rel_err * total.norm() {
                break Ok((total, err + floor, heap.len()));
            }
            reason = format!("rounding/truncation floor {floor:.3e} exceeds target {target:.3e}");
            break Err((total, err + floor));
        }
        if heap.len() >= spec.max_panels {
            reason = format!("max_panels {} reached", spec.max_panels);
            break Err((total, err + floor));
        }
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            heap.push(worst);
            reason = "panel width at machine resolution".into();
            let (mut t, mut e) = (Complex64::new(0.0, 0.0), 0.0);
            for p in heap.iter() {
                t += p.value;
                e += p.err;
            }
            break Err((t, e + floor));
        }
        heap.push(panel(&f, worst.a, mid));
        heap.push(panel(&f, mid, worst.b));
    };

    let pre = (2.0 * PI).powf(-d / 2.0);
    let in_envelope = q.scaled_r() <= spec.max_scaled_r && q.z.theta().abs() <= spec.max_theta;
    match ok {
        Ok((v, e, n)) if in_envelope => Ok(KernelValue {
            value: v * pre,
            abs_err: e * pre,
            panels: n,
        }),
        Ok((v, e, _)) => Err(LabError::PrecisionExhausted {
            re: v.re * pre,
            im: v.im * pre,
            err: e * pre,
            reason: format!(
                "query outside validity envelope (r/|z|^(1/alpha)={:.3}, |theta|={:.3})",
                q.scaled_r(),
                q.z.theta().abs()
            ),
        }),
        Err((v, e)) => Err(LabError::PrecisionExhausted {
            re: v.re * pre,
            im: v.im * pre,
            err: e * pre,
            reason,
        }),
    }
}

/// c_d = Γ((d+1)/2) / π^{(d+1)/2}
pub fn poisson_constant(d: usize) -> f64 {
    let h = (d as f64 + 1.0) / 2.0;
    gamma(h) / PI.powf(h)
}

fn check_half_plane(z: Complex64) -> Result<()> {
    if !(z.re > 0.0) {
        return domain(format!("Re z must be positive, got {}", z.re));
    }
    Ok(())
}

/// c_d z / (z^2 + r^2)^{(d+1)/2}, principal branch.
pub fn kernel_poisson(d: usize, z: Complex64, r: f64) -> Result<Complex64> {
    check_half_plane(z)?;
    if d == 0 || !(r >= 0.0) {
        return domain("need d >= 1 and r >= 0");
    }
    let w = z * z + r * r;
    assert!(
        !(w.im == 0.0 && w.re <= 0.0),
        "z^2 + r^2 on the branch cut for Re z > 0"
    );
    let p = (w.ln() * ((d as f64 + 1.0) / 2.0)).exp();
    Ok(z * poisson_constant(d) / p)
}

/// (4πz)^{-d/2} exp(-r^2/(4z)), principal branch.
pub fn kernel_gauss(d: usize, z: Complex64, r: f64) -> Result<Complex64> {
    check_half_plane(z)?;
    if d == 0 || !(r >= 0.0) {
        return domain("need d >= 1 and r >= 0");
    }
    let pre = ((z * (4.0 * PI)).ln() * (-(d as f64) / 2.0)).exp();
    Ok(pre * (-(r * r) / (z * 4.0)).exp())
}

/// (2π)^{-d} |S^{d-1}| Γ(d/α) / (α z^{d/α})
pub fn kernel_at_origin(alpha: f64, d: usize, z: &ComplexTime) -> Result<Complex64> {
    if !(alpha > 0.0) || d == 0 {
        return domain("need alpha > 0 and d >= 1");
    }
    let df = d as f64;
    let sphere = 2.0 * PI.powf(df / 2.0) / gamma(df / 2.0);
    let zp = (z.to_complex().ln() * (df / alpha)).exp();
    Ok(Complex64::new(
        (2.0 * PI).powf(-df) * sphere * gamma(df / alpha) / alpha,
        0.0,
    ) / zp)
}
