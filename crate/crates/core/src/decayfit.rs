//! Exponential and polynomial decay-rate fits of diagnostic series, and
//! envelope checks of the form `C t^{−a} e^{−bt}`.

use serde::{Deserialize, Serialize};

use crate::error::{LandauError, Result};

/// Minimum number of samples inside a fit window.
pub const MIN_FIT_POINTS: usize = 5;

/// Largest admissible slope of `log(y / envelope)` against `t`.
pub const ENVELOPE_TREND_TOL: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitKind {
    /// `log y = log A − rate · t`.
    Exponential,
    /// `log y = log A − rate · log(1 + t)`.
    Polynomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub t_a: f64,
    pub t_b: f64,
}

impl Window {
    pub fn new(t_a: f64, t_b: f64) -> Result<Self> {
        if !(t_a < t_b) || !t_a.is_finite() || !t_b.is_finite() {
            return Err(LandauError::Fit(format!("degenerate window [{t_a}, {t_b}]")));
        }
        Ok(Window { t_a, t_b })
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_a && t <= self.t_b
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub kind: FitKind,
    pub window: Window,
    pub points: usize,
    pub rate: f64,
    pub amplitude: f64,
    /// Root mean square of the log residuals.
    pub residual: f64,
    /// Standard error of the rate from the residuals.
    pub rate_stderr: f64,
    pub prediction: Option<f64>,
    /// `(rate − prediction) / prediction`.
    pub relative_deviation: Option<f64>,
}

impl FitReport {
    pub fn with_prediction(mut self, prediction: f64) -> Self {
        self.prediction = Some(prediction);
        self.relative_deviation = Some((self.rate - prediction) / prediction);
        self
    }

    /// `key = value` lines.
    pub fn to_key_values(&self) -> String {
        let opt = |x: Option<f64>| x.map_or("NA".to_string(), |v| format!("{v:.12e}"));
        let kind = match self.kind {
            FitKind::Exponential => "exponential",
            FitKind::Polynomial => "polynomial",
        };
        format!(
            "kind = {kind}\nt_a = {:.12e}\nt_b = {:.12e}\npoints = {}\nrate = {:.12e}\namplitude = {:.12e}\nresidual = {:.12e}\nrate_stderr = {:.12e}\nprediction = {}\nrelative_deviation = {}\n",
            self.window.t_a,
            self.window.t_b,
            self.points,
            self.rate,
            self.amplitude,
            self.residual,
            self.rate_stderr,
            opt(self.prediction),
            opt(self.relative_deviation)
        )
    }
}

/// Default late-time window: the last 40% of the stretch of the series that
/// stays above `100 × floor`.
pub fn default_window(series: &[(f64, f64)], floor: f64) -> Result<Window> {
    let threshold = 100.0 * floor;
    let resolved: Vec<&(f64, f64)> = series.iter().take_while(|p| p.1 > threshold).collect();
    let (first, last) = match (resolved.first(), resolved.last()) {
        (Some(a), Some(b)) => (a.0, b.0),
        _ => return Err(LandauError::Fit(format!("no samples above {threshold:e}"))),
    };
    Window::new(last - 0.4 * (last - first), last)
}

fn fit_log(series: &[(f64, f64)], window: Window, kind: FitKind) -> Result<FitReport> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(t, y) in series.iter().filter(|p| window.contains(p.0)) {
        if !(y > 0.0) || !y.is_finite() {
            return Err(LandauError::Fit(format!("nonpositive value {y:e} at t = {t}")));
        }
        xs.push(match kind {
            FitKind::Exponential => t,
            FitKind::Polynomial => {
                if !(t > -1.0) {
                    return Err(LandauError::Fit(format!("log(1 + t) undefined at t = {t}")));
                }
                t.ln_1p()
            }
        });
        ys.push(y.ln());
    }
    let m = xs.len();
    if m < MIN_FIT_POINTS {
        return Err(LandauError::Fit(format!(
            "{m} points in [{}, {}], need at least {MIN_FIT_POINTS}",
            window.t_a, window.t_b
        )));
    }
    let mf = m as f64;
    let xm = xs.iter().sum::<f64>() / mf;
    let ym = ys.iter().sum::<f64>() / mf;
    let sxx: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(LandauError::Fit("window abscissae are all equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(FitReport {
        kind,
        window,
        points: m,
        rate: -slope,
        amplitude: intercept.exp(),
        residual: (ss / mf).sqrt(),
        rate_stderr: (ss / ((mf - 2.0) * sxx)).sqrt(),
        prediction: None,
        relative_deviation: None,
    })
}

/// Least squares of `log y` against `t`; the rate is minus the slope.
pub fn fit_exponential(series: &[(f64, f64)], window: Window) -> Result<FitReport> {
    fit_log(series, window, FitKind::Exponential)
}

/// Least squares of `log y` against `log(1 + t)`; the rate is minus the slope.
pub fn fit_polynomial_rate(series: &[(f64, f64)], window: Window) -> Result<FitReport> {
    fit_log(series, window, FitKind::Polynomial)
}

/// `k/|γ| − θ`.
pub fn predicted_poly_rate(k: f64, gamma: f64, theta: f64) -> f64 {
    k / gamma.abs() - theta
}

/// Exponential rates on `[t_a, t_b]` and on its second half `[t_b/2, t_b]`
/// (clipped to the window).
pub fn window_sensitivity(series: &[(f64, f64)], window: Window) -> Result<(FitReport, FitReport)> {
    let full = fit_exponential(series, window)?;
    let half = fit_exponential(series, Window::new((0.5 * window.t_b).max(window.t_a), window.t_b)?)?;
    Ok((full, half))
}

/// `C t^{−a} e^{−bt}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub c: f64,
    pub a: f64,
    pub b: f64,
}

impl Envelope {
    pub fn shape(&self, t: f64) -> f64 {
        t.powf(-self.a) * (-self.b * t).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub pass: bool,
    /// Smallest `C` with the series below the envelope (the supplied `C` unless freed).
    pub fitted_c: f64,
    /// Least-squares slope of `log(y / envelope)` against `t`.
    pub trend: f64,
    /// Largest ratio `y / (C t^{−a} e^{−bt})`.
    pub max_ratio: f64,
}

/// Checks that `series` stays below the envelope without an upward trend in
/// the ratio. With `free_c` the smallest admissible `C` is fitted. Samples at
/// `t ≤ 0` are skipped when `a > 0`.
pub fn envelope_check(series: &[(f64, f64)], envelope: Envelope, free_c: bool) -> Result<EnvelopeReport> {
    if !(envelope.a >= 0.0) || !envelope.a.is_finite() || !envelope.b.is_finite() {
        return Err(LandauError::Fit(format!(
            "degenerate envelope exponents a = {}, b = {}",
            envelope.a, envelope.b
        )));
    }
    if !free_c && (!(envelope.c > 0.0) || !envelope.c.is_finite()) {
        return Err(LandauError::Fit(format!("degenerate envelope constant C = {}", envelope.c)));
    }
    let mut pts = Vec::new();
    for &(t, y) in series {
        if envelope.a > 0.0 && t <= 0.0 {
            continue;
        }
        if !(y > 0.0) || !y.is_finite() {
            return Err(LandauError::Fit(format!("nonpositive value {y:e} at t = {t}")));
        }
        pts.push((t, y / envelope.shape(t)));
    }
    if pts.len() < 2 {
        return Err(LandauError::Fit("fewer than two usable samples".into()));
    }
    let sup = pts.iter().map(|p| p.1).fold(0.0f64, f64::max);
    let fitted_c = if free_c { sup } else { envelope.c };
    let m = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let lm = pts.iter().map(|p| p.1.ln()).sum::<f64>() / m;
    let stt: f64 = pts.iter().map(|p| (p.0 - tm).powi(2)).sum();
    let stl: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1.ln() - lm)).sum();
    let trend = if stt > 0.0 { stl / stt } else { 0.0 };
    let max_ratio = sup / fitted_c;
    let pass = fitted_c.is_finite() && max_ratio <= 1.0 + 1e-12 && trend <= ENVELOPE_TREND_TOL;
    Ok(EnvelopeReport {
        pass,
        fitted_c,
        trend,
        max_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(f: impl Fn(f64) -> f64, t_end: f64, m: usize) -> Vec<(f64, f64)> {
        (0..=m).map(|i| t_end * i as f64 / m as f64).map(|t| (t, f(t))).collect()
    }

    fn all(t_end: f64) -> Window {
        Window::new(0.0, t_end).unwrap()
    }

    #[test]
    fn exact_exponential() {
        let s = sample(|t| 3.0 * (-2.0 * t).exp(), 5.0, 50);
        let r = fit_exponential(&s, all(5.0)).unwrap();
        assert!((r.rate - 2.0).abs() < 1e-9);
        assert!((r.amplitude - 3.0).abs() < 1e-9);
        assert!(r.residual < 1e-12);
    }

    #[test]
    fn constant_series_has_zero_rate() {
        let s = sample(|_| 0.7, 5.0, 20);
        assert!(fit_exponential(&s, all(5.0)).unwrap().rate.abs() < 1e-9);
    }

    #[test]
    fn modulated_exponential_within_one_percent() {
        let s = sample(|t| (-2.0 * t).exp() * (1.0 + 0.01 * t.sin()), 10.0, 200);
        let r = fit_exponential(&s, all(10.0)).unwrap();
        assert!((r.rate - 2.0).abs() < 0.02, "{}", r.rate);
    }

    #[test]
    fn exact_power_law() {
        let s = sample(|t| (1.0 + t).powi(-3), 20.0, 40);
        let r = fit_polynomial_rate(&s, all(20.0)).unwrap();
        assert!((r.rate - 3.0).abs() < 1e-9);
    }

    #[test]
    fn predicted_rate() {
        assert!((predicted_poly_rate(4.0, -0.5, 3.5) - 4.5).abs() < 1e-15);
    }

    #[test]
    fn mixed_series_late_window_is_exponential() {
        // e^{−t}(1+t)^{−1}: the local exponential rate 1 + 1/(1+t) tends to 1.
        let s = sample(|t| (-t).exp() / (1.0 + t), 60.0, 600);
        let early = fit_exponential(&s, Window::new(0.0, 2.0).unwrap()).unwrap();
        let late = fit_exponential(&s, Window::new(40.0, 60.0).unwrap()).unwrap();
        assert!((late.rate - 1.0).abs() < 0.03, "{}", late.rate);
        assert!((late.rate - 1.0).abs() < (early.rate - 1.0).abs());
    }

    #[test]
    fn errors() {
        let s = sample(|t| (-t).exp(), 1.0, 3);
        assert!(matches!(fit_exponential(&s, all(1.0)), Err(LandauError::Fit(_))));
        let mut s = sample(|t| (-t).exp(), 1.0, 10);
        s[4].1 = 0.0;
        assert!(fit_exponential(&s, all(1.0)).is_err());
        assert!(Window::new(1.0, 1.0).is_err());
    }

    #[test]
    fn default_window_skips_floor() {
        let mut s = sample(|t| (-t).exp(), 10.0, 100);
        s.extend((1..10).map(|i| (10.0 + i as f64 * 0.1, 1e-20)));
        let w = default_window(&s, 1e-16).unwrap();
        assert!((w.t_b - 10.0).abs() < 1e-12 && (w.t_a - 6.0).abs() < 1e-12);
    }

    #[test]
    fn sensitivity_of_clean_exponential() {
        let s = sample(|t| (-1.5 * t).exp() * (1.0 + 1e-3 * (7.0 * t).sin()), 10.0, 100);
        let (full, half) = window_sensitivity(&s, all(10.0)).unwrap();
        let unc = 3.0 * full.rate_stderr.max(half.rate_stderr);
        assert!((full.rate - half.rate).abs() < unc, "{} {} {}", full.rate, half.rate, unc);
    }

    #[test]
    fn envelope_exact_and_growing() {
        let env = Envelope { c: 1.0, a: 0.75, b: 1.0 };
        let s: Vec<(f64, f64)> = (1..=40).map(|i| i as f64 * 0.1).map(|t| (t, env.shape(t))).collect();
        let r = envelope_check(&s, env, true).unwrap();
        assert!(r.pass && (r.fitted_c - 1.0).abs() < 1e-12);
        let grow: Vec<(f64, f64)> = s.iter().map(|&(t, y)| (t, y * (0.5 * t).exp())).collect();
        assert!(!envelope_check(&grow, env, true).unwrap().pass);
        assert!(envelope_check(&s, Envelope { c: 1.0, a: -1.0, b: 1.0 }, true).is_err());
    }
}
