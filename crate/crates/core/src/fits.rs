//! Potential-energy-curve fits: Morse well, power-law asymptote and the
//! derived spectroscopic constants.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Hartree to kJ/mol.
pub const HARTREE_TO_KJ_PER_MOL: f64 = 2625.4996;
/// Hartree energy in joules.
pub const HARTREE_J: f64 = 4.359_744_722_207_1e-18;
/// Atomic mass constant in kg.
pub const AMU_KG: f64 = 1.660_539_066_60e-27;
/// Speed of light in cm/s.
pub const LIGHT_CM_PER_S: f64 = 2.997_924_58e10;
pub const ANGSTROM_M: f64 = 1e-10;
/// Half the atomic mass of nitrogen-14, in amu.
pub const N2_REDUCED_MASS: f64 = 7.001_537;

pub const MAX_ITERATIONS: usize = 500;
pub const MIN_POINTS: usize = 4;

/// Inclusive bondlength interval in angstrom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub const MORSE_DEFAULT: Window = Window { lo: 0.9, hi: 1.5 };
    pub const TAIL_DEFAULT: Window = Window {
        lo: 2.0,
        hi: f64::INFINITY,
    };

    pub fn contains(&self, r: f64) -> bool {
        r >= self.lo && r <= self.hi
    }
}

/// Bondlengths and one energy column per electronic state.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveData {
    pub labels: Vec<String>,
    pub r: Vec<f64>,
    pub energies: Vec<Vec<f64>>,
}

impl CurveData {
    pub fn new(labels: Vec<String>, r: Vec<f64>, energies: Vec<Vec<f64>>) -> Result<Self> {
        if labels.len() != energies.len() {
            return Err(Error::Curve("label count differs from state count".into()));
        }
        if energies.iter().any(|e| e.len() != r.len()) {
            return Err(Error::Curve("energy column length differs from R".into()));
        }
        if r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Curve("R must be strictly increasing".into()));
        }
        Ok(CurveData { labels, r, energies })
    }

    /// Parses rows `R E_0 E_1 ...` separated by commas, tabs or spaces. An
    /// optional first non-numeric row names the columns; `#` starts a
    /// comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut header: Option<Vec<String>> = None;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|f| !f.is_empty())
                .collect();
            let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
            match parsed {
                Ok(v) => rows.push(v),
                Err(_) if rows.is_empty() && header.is_none() => {
                    header = Some(fields.iter().map(|s| s.to_string()).collect())
                }
                Err(_) => return Err(Error::Curve(format!("non-numeric row {line:?}"))),
            }
        }
        let width = rows.first().map(Vec::len).ok_or_else(|| Error::Curve("no data rows".into()))?;
        if width < 2 || rows.iter().any(|r| r.len() != width) {
            return Err(Error::Curve("rows need R and at least one energy, all of equal width".into()));
        }
        let labels = match header {
            Some(h) if h.len() == width => h[1..].to_vec(),
            Some(_) => return Err(Error::Curve("header width differs from data".into())),
            None => (0..width - 1).map(|k| format!("state{k}")).collect(),
        };
        let r = rows.iter().map(|row| row[0]).collect();
        let energies = (1..width).map(|k| rows.iter().map(|row| row[k]).collect()).collect();
        Self::new(labels, r, energies)
    }

    pub fn n_states(&self) -> usize {
        self.energies.len()
    }
}

struct LmOutcome {
    params: Vec<f64>,
    jtj: DMatrix<f64>,
    ssr: f64,
    n: usize,
    iterations: usize,
}

/// Levenberg-Marquardt on `eval(params) -> (residuals, jacobian)`.
fn levenberg_marquardt<F>(mut params: Vec<f64>, eval: F) -> Result<LmOutcome>
where
    F: Fn(&[f64]) -> (DVector<f64>, DMatrix<f64>),
{
    let np = params.len();
    let (mut r, mut j) = eval(&params);
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    for it in 0..MAX_ITERATIONS {
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &r;
        if g.amax() <= 1e-15 * (1.0 + cost) {
            return Ok(LmOutcome { params, jtj, ssr: cost, n: r.len(), iterations: it });
        }
        let mut stepped = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for k in 0..np {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let Some(delta) = a.cholesky().map(|c| c.solve(&(-&g))) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = params.iter().zip(delta.iter()).map(|(p, d)| p + d).collect();
            let (rt, jt) = eval(&trial);
            let ct = rt.norm_squared();
            if ct.is_finite() && ct <= cost {
                let small = delta
                    .iter()
                    .zip(&params)
                    .all(|(d, p)| d.abs() <= 1e-14 * (1.0 + p.abs()));
                let flat = cost - ct <= 1e-30 + 1e-16 * cost;
                params = trial;
                r = rt;
                j = jt;
                cost = ct;
                lambda = (lambda / 10.0).max(1e-15);
                stepped = true;
                if small || flat {
                    let jtj = j.transpose() * &j;
                    return Ok(LmOutcome { params, jtj, ssr: cost, n: r.len(), iterations: it + 1 });
                }
                break;
            }
            lambda *= 10.0;
        }
        if !stepped {
            // no descent direction left: at the optimum to working precision
            let jtj = j.transpose() * &j;
            return Ok(LmOutcome { params, jtj, ssr: cost, n: r.len(), iterations: it + 1 });
        }
    }
    Err(Error::Fit(format!("no convergence after {MAX_ITERATIONS} iterations")))
}

/// One-sigma errors from `sigma^2 (J^T J)^-1` and the unit-variance ones.
fn uncertainties(out: &LmOutcome) -> Result<(Vec<f64>, Vec<f64>)> {
    let inv = out
        .jtj
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Fit("singular normal matrix at the optimum".into()))?;
    let dof = out.n.saturating_sub(out.params.len()).max(1) as f64;
    let var = out.ssr / dof;
    let unit: Vec<f64> = (0..out.params.len()).map(|k| inv[(k, k)].max(0.0).sqrt()).collect();
    Ok((unit.iter().map(|u| u * var.sqrt()).collect(), unit))
}

fn select(r: &[f64], e: &[f64], w: Window) -> Result<(Vec<f64>, Vec<f64>)> {
    if r.len() != e.len() {
        return Err(Error::Curve("R and E differ in length".into()));
    }
    let (rs, es): (Vec<f64>, Vec<f64>) = r.iter().zip(e).filter(|(x, _)| w.contains(**x)).map(|(a, b)| (*a, *b)).unzip();
    if rs.len() < MIN_POINTS {
        return Err(Error::Fit(format!(
            "window [{}, {}] holds {} points, need {MIN_POINTS}",
            w.lo,
            w.hi,
            rs.len()
        )));
    }
    Ok((rs, es))
}

/// `E_min + De (1 - exp(-a (R - Re)))^2` with parameters
/// `[E_min, De, a, Re]`.
pub fn morse_model(p: &[f64], r: f64) -> f64 {
    let u = 1.0 - (-p[2] * (r - p[3])).exp();
    p[0] + p[1] * u * u
}

pub fn morse_jacobian(p: &[f64], r: f64) -> [f64; 4] {
    let x = (-p[2] * (r - p[3])).exp();
    let u = 1.0 - x;
    [1.0, u * u, 2.0 * p[1] * u * (r - p[3]) * x, -2.0 * p[1] * u * p[2] * x]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MorseFit {
    pub re: f64,
    pub de_well: f64,
    pub a: f64,
    pub e_min: f64,
    /// Harmonic frequency in cm^-1.
    pub omega: f64,
    pub sigma_re: f64,
    pub sigma_de_well: f64,
    pub sigma_a: f64,
    pub sigma_e_min: f64,
    pub sigma_omega: f64,
    pub residual_rms: f64,
    pub n_points: usize,
    pub iterations: usize,
    pub window: Window,
    pub mu: f64,
}

/// `(a / 2 pi c) sqrt(2 De / mu)` in cm^-1 for `a` in 1/angstrom, `De` in
/// Hartree and `mu` in amu.
pub fn harmonic_frequency(a: f64, de_well: f64, mu: f64) -> f64 {
    let a_si = a / ANGSTROM_M;
    a_si / (2.0 * std::f64::consts::PI * LIGHT_CM_PER_S) * (2.0 * de_well * HARTREE_J / (mu * AMU_KG)).sqrt()
}

fn morse_eval(rs: &[f64], es: &[f64], p: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
    let r = DVector::from_iterator(rs.len(), rs.iter().zip(es).map(|(x, e)| morse_model(p, *x) - e));
    let j = DMatrix::from_fn(rs.len(), 4, |i, k| morse_jacobian(p, rs[i])[k]);
    (r, j)
}

/// Least-squares Morse fit on the points inside `window`.
pub fn fit_morse(r: &[f64], e: &[f64], window: Window, mu: f64) -> Result<MorseFit> {
    if !(mu > 0.0) {
        return Err(Error::Fit(format!("reduced mass {mu} must be positive")));
    }
    let (rs, es) = select(r, e, window)?;
    let imin = (0..es.len()).min_by(|&a, &b| es[a].total_cmp(&es[b])).unwrap();
    // parabola through the minimum and its neighbours
    let c = imin.clamp(1, rs.len() - 2);
    let (x0, x1, x2) = (rs[c - 1], rs[c], rs[c + 1]);
    let (y0, y1, y2) = (es[c - 1], es[c], es[c + 1]);
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curv = 2.0 * (d12 - d01) / (x2 - x0);
    let re0 = if curv > 0.0 {
        0.5 * (x0 + x1) - d01 / curv
    } else {
        rs[imin]
    };
    let re0 = if re0.is_finite() && re0 > rs[0] - 1.0 && re0 < rs[rs.len() - 1] + 1.0 { re0 } else { rs[imin] };
    let k0 = if curv > 0.0 { curv } else { 1.0 };
    let span = es.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - es[imin];
    let mut best: Option<LmOutcome> = None;
    for scale in [1.0, 2.0, 4.0, 8.0, 0.5] {
        let de0 = (span * scale).max(1e-3);
        let a0 = (k0 / (2.0 * de0)).sqrt();
        if let Ok(out) = levenberg_marquardt(vec![es[imin], de0, a0, re0], |p| morse_eval(&rs, &es, p)) {
            if out.params[2] > 0.0 && out.params[1] > 0.0 && best.as_ref().map_or(true, |b| out.ssr < b.ssr) {
                best = Some(out);
            }
        }
    }
    let out = best.ok_or_else(|| Error::Fit("Morse fit did not converge to a bound well".into()))?;
    let (sig, _) = uncertainties(&out)?;
    let p = &out.params;
    let omega = harmonic_frequency(p[2], p[1], mu);
    let sigma_omega = omega * ((sig[2] / p[2]).powi(2) + (0.5 * sig[1] / p[1]).powi(2)).sqrt();
    Ok(MorseFit {
        e_min: p[0],
        de_well: p[1],
        a: p[2],
        re: p[3],
        omega,
        sigma_e_min: sig[0],
        sigma_de_well: sig[1],
        sigma_a: sig[2],
        sigma_re: sig[3],
        sigma_omega,
        residual_rms: (out.ssr / out.n as f64).sqrt(),
        n_points: out.n,
        iterations: out.iterations,
        window,
        mu,
    })
}

/// `E_inf - s exp(alpha) R^(-exp(beta))` with parameters
/// `[E_inf, alpha, beta]` and fixed sign `s`.
pub fn powerlaw_model(p: &[f64], sign: f64, r: f64) -> f64 {
    p[0] - sign * p[1].exp() * r.powf(-p[2].exp())
}

pub fn powerlaw_jacobian(p: &[f64], sign: f64, r: f64) -> [f64; 3] {
    let a = p[1].exp();
    let b = p[2].exp();
    let t = r.powf(-b);
    [1.0, -sign * a * t, sign * a * t * r.ln() * b]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub e_inf: f64,
    /// Signed amplitude `A` of `E_inf - A R^-b`.
    pub amplitude: f64,
    pub exponent: f64,
    pub sigma_e_inf: f64,
    pub sigma_amplitude: f64,
    pub sigma_exponent: f64,
    /// `sqrt(diag((J^T J)^-1))` for `E_inf`, independent of the residual
    /// scale.
    pub unit_sigma_e_inf: f64,
    pub residual_rms: f64,
    pub n_points: usize,
    pub iterations: usize,
    /// False when the tail energies are not monotone in R.
    pub monotone: bool,
    pub window: Window,
}

/// Starting exponent of the tail fit.
pub const POWERLAW_INITIAL_EXPONENT: f64 = 6.0;

/// Asymptote fit `E(R) = E_inf - A R^-b` with `b > 0`. `|A|` and `b` are
/// fitted in log form; the sign of `A` follows the direction in which the
/// tail approaches its limit.
pub fn fit_powerlaw(r: &[f64], e: &[f64], window: Window) -> Result<PowerLawFit> {
    let (rs, es) = select(r, e, window)?;
    let rising = es.windows(2).all(|w| w[1] >= w[0]);
    let falling = es.windows(2).all(|w| w[1] <= w[0]);
    let sign = if rising || !falling && es[es.len() - 1] >= es[0] { 1.0 } else { -1.0 };
    // linear least squares for (E_inf, A) at the starting exponent
    let b0 = POWERLAW_INITIAL_EXPONENT;
    let x = DMatrix::from_fn(rs.len(), 2, |i, k| if k == 0 { 1.0 } else { -rs[i].powf(-b0) });
    let y = DVector::from_column_slice(&es);
    let sol = (x.transpose() * &x)
        .cholesky()
        .map(|c| c.solve(&(x.transpose() * &y)))
        .ok_or_else(|| Error::Fit("degenerate tail data".into()))?;
    let a0 = (sign * sol[1]).max(1e-12);
    let p0 = vec![sol[0], a0.ln(), b0.ln()];
    let eval = |p: &[f64]| {
        let r = DVector::from_iterator(rs.len(), rs.iter().zip(&es).map(|(x, e)| powerlaw_model(p, sign, *x) - e));
        let j = DMatrix::from_fn(rs.len(), 3, |i, k| powerlaw_jacobian(p, sign, rs[i])[k]);
        (r, j)
    };
    let out = levenberg_marquardt(p0, eval)?;
    let (sig, unit) = uncertainties(&out)?;
    let p = &out.params;
    let amp = p[1].exp();
    let b = p[2].exp();
    Ok(PowerLawFit {
        e_inf: p[0],
        amplitude: sign * amp,
        exponent: b,
        sigma_e_inf: sig[0],
        sigma_amplitude: amp * sig[1],
        sigma_exponent: b * sig[2],
        unit_sigma_e_inf: unit[0],
        residual_rms: (out.ssr / out.n as f64).sqrt(),
        n_points: out.n,
        iterations: out.iterations,
        monotone: rising || falling,
        window,
    })
}

/// `(E_inf - E_min)` in kJ/mol with its one-sigma error.
pub fn dissociation_energy(morse: &MorseFit, tail: &PowerLawFit) -> (f64, f64) {
    let d0 = (tail.e_inf - morse.e_min) * HARTREE_TO_KJ_PER_MOL;
    let sigma = HARTREE_TO_KJ_PER_MOL * morse.sigma_e_min.hypot(tail.sigma_e_inf);
    (d0, sigma)
}

/// Morse and tail fits of one state plus the dissociation energy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub state: String,
    pub morse: MorseFit,
    pub tail: PowerLawFit,
    pub d0_diss: f64,
    pub sigma_d0_diss: f64,
}

pub fn fit_state(curve: &CurveData, state: usize, morse_window: Window, tail_window: Window, mu: f64) -> Result<FitReport> {
    let e = curve
        .energies
        .get(state)
        .ok_or_else(|| Error::Curve(format!("no state {state}")))?;
    let morse = fit_morse(&curve.r, e, morse_window, mu)?;
    let tail = fit_powerlaw(&curve.r, e, tail_window)?;
    let (d0, s) = dissociation_energy(&morse, &tail);
    Ok(FitReport {
        state: curve.labels[state].clone(),
        morse,
        tail,
        d0_diss: d0,
        sigma_d0_diss: s,
    })
}

/// Plot table `R, E_data, E_morse, E_tail` for one state; fitted columns
/// are left empty outside their windows.
pub fn fit_table(curve: &CurveData, state: usize, report: &FitReport) -> String {
    let mp = [report.morse.e_min, report.morse.de_well, report.morse.a, report.morse.re];
    let sign = report.tail.amplitude.signum();
    let tp = [report.tail.e_inf, report.tail.amplitude.abs().ln(), report.tail.exponent.ln()];
    let mut out = String::from("R\tE_data\tE_morse\tE_tail\n");
    for (i, &r) in curve.r.iter().enumerate() {
        let m = if report.morse.window.contains(r) { format!("{:.12}", morse_model(&mp, r)) } else { String::new() };
        let t = if report.tail.window.contains(r) { format!("{:.12}", powerlaw_model(&tp, sign, r)) } else { String::new() };
        out.push_str(&format!("{r}\t{:.12}\t{m}\t{t}\n", curve.energies[state][i]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn morse_curve() -> (Vec<f64>, Vec<f64>) {
        let p = [-109.1, 0.35, 2.6, 1.1];
        let r: Vec<f64> = (0..13).map(|i| 0.9 + 0.05 * i as f64).collect();
        let e = r.iter().map(|&x| morse_model(&p, x)).collect();
        (r, e)
    }

    #[test]
    fn morse_round_trip() {
        let (r, e) = morse_curve();
        let f = fit_morse(&r, &e, Window::MORSE_DEFAULT, N2_REDUCED_MASS).unwrap();
        assert!((f.re / 1.1 - 1.0).abs() < 1e-6);
        assert!((f.de_well / 0.35 - 1.0).abs() < 1e-6);
        assert!((f.a / 2.6 - 1.0).abs() < 1e-6);
        assert!(f.residual_rms < 1e-12);
    }

    #[test]
    fn too_few_points() {
        let (r, e) = morse_curve();
        assert!(fit_morse(&r, &e, Window { lo: 0.9, hi: 1.0 }, 7.0).is_err());
        assert!(fit_morse(&r, &e, Window::MORSE_DEFAULT, 0.0).is_err());
    }

    #[test]
    fn powerlaw_round_trip_both_signs() {
        let r: Vec<f64> = (0..10).map(|i| 2.0 + 0.4 * i as f64).collect();
        for (amp, b) in [(-0.5, 6.0), (2.0, 4.0)] {
            let e: Vec<f64> = r.iter().map(|x| -108.9 - amp * x.powf(-b)).collect();
            let f = fit_powerlaw(&r, &e, Window::TAIL_DEFAULT).unwrap();
            assert!((f.e_inf / -108.9 - 1.0).abs() < 1e-6);
            assert!((f.amplitude / amp - 1.0).abs() < 1e-6, "{}", f.amplitude);
            assert!((f.exponent / b - 1.0).abs() < 1e-6);
            assert!(f.monotone);
        }
    }

    #[test]
    fn dissociation_units() {
        let (r, e) = morse_curve();
        let m = fit_morse(&r, &e, Window::MORSE_DEFAULT, 7.0).unwrap();
        let rt: Vec<f64> = (0..6).map(|i| 2.0 + 0.5 * i as f64).collect();
        let et: Vec<f64> = rt.iter().map(|x| -108.8 - x.powf(-6.0)).collect();
        let mut t = fit_powerlaw(&rt, &et, Window::TAIL_DEFAULT).unwrap();
        t.e_inf = m.e_min + 0.1;
        let (d, _) = dissociation_energy(&m, &t);
        assert!((d - 262.54996).abs() < 1e-9);
        t.e_inf = m.e_min;
        assert_eq!(dissociation_energy(&m, &t).0, 0.0);
    }

    #[test]
    fn curve_parsing() {
        let c = CurveData::parse("R,GS,T1\n1.0,-1.0,-0.5\n1.1, -1.1, -0.6\n").unwrap();
        assert_eq!(c.labels, vec!["GS", "T1"]);
        assert_eq!(c.energies[1], vec![-0.5, -0.6]);
        let c = CurveData::parse("1.0 -1\n1.2 -2\n").unwrap();
        assert_eq!(c.labels, vec!["state0"]);
        assert!(CurveData::parse("1.0 -1\n0.9 -2\n").is_err());
        assert!(CurveData::parse("1.0 -1\n1.1\n").is_err());
    }
}
