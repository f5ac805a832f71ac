//! Scalar metrics extracted from coincidence patterns.
//!
//! Every sub-sample location (spectral peak, envelope minimum) is refined
//! with the same 3-point parabola, see [`parabolic_offset`].

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::CoincidencePattern;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PatternMetrics {
    pub fringe_period: Option<f64>,
    pub envelope_first_zero: Option<f64>,
    /// Fringe visibility at `fringe_period`, 0 when no fringes were found.
    pub visibility: f64,
    pub sharpness: f64,
    pub peak_positions: Vec<f64>,
}

impl PatternMetrics {
    pub fn measure(pattern: &CoincidencePattern) -> Self {
        let fringe_period = fringe_period(pattern, None).ok();
        let visibility = fringe_period.and_then(|p| visibility(pattern, p).ok()).unwrap_or(0.0);
        Self {
            fringe_period,
            envelope_first_zero: envelope_first_zero(pattern).ok(),
            visibility,
            sharpness: sharpness(pattern),
            peak_positions: peak_positions(pattern),
        }
    }
}

/// Range of periods searched by [`fringe_period`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodBand {
    pub min: f64,
    pub max: f64,
}

/// Vertex of the parabola through `(-1, y0), (0, y1), (1, y2)`, in `[-1, 1]`.
pub fn parabolic_offset(y0: f64, y1: f64, y2: f64) -> f64 {
    let den = y0 - 2.0 * y1 + y2;
    if den == 0.0 {
        return 0.0;
    }
    (0.5 * (y0 - y2) / den).clamp(-1.0, 1.0)
}

/// Reference centre of a pattern: `x = 0` if inside the coordinate range.
fn center(p: &CoincidencePattern) -> f64 {
    let c = p.coordinate();
    0.0f64.clamp(c[0], c[c.len() - 1])
}

/// Indices with `|x - centre| <= half_width`.
fn window(p: &CoincidencePattern, half_width: f64) -> std::ops::Range<usize> {
    let c = center(p);
    let x = p.coordinate();
    let lo = x.partition_point(|&v| v < c - half_width);
    let hi = x.partition_point(|&v| v <= c + half_width);
    lo..hi
}

/// Dominant spatial period inside the central half of the pattern.
///
/// The windowed samples are mean-subtracted, Hann-tapered and zero-padded;
/// the largest local maximum of the magnitude spectrum inside `band` is
/// refined parabolically. The default band spans periods from 4 samples to a
/// quarter of the analysis window.
pub fn fringe_period(pattern: &CoincidencePattern, band: Option<PeriodBand>) -> Result<f64> {
    let dx = pattern.spacing();
    let range = window(pattern, pattern.extent() / 4.0);
    let samples = &pattern.rate()[range];
    let m = samples.len();
    if m < 16 {
        return Err(Error::WindowTooSmall(format!("{m} samples in the analysis window")));
    }
    let width = m as f64 * dx;
    let band = band.unwrap_or(PeriodBand { min: 4.0 * dx, max: width / 4.0 });
    if !(band.min > 0.0 && band.max > band.min) {
        return Err(Error::InvalidParameter { name: "searchBand", reason: "need 0 < min < max".into() });
    }

    let mean = samples.iter().sum::<f64>() / m as f64;
    let hann: Vec<f64> =
        (0..m).map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (m - 1) as f64).cos()).collect();
    let n_fft = (m.next_power_of_two() * 16).max(1024);
    let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
    for i in 0..m {
        buf[i] = Complex64::new((samples[i] - mean) * hann[i], 0.0);
    }
    FftPlanner::new().plan_fft_forward(n_fft).process(&mut buf);
    let mag: Vec<f64> = buf[..n_fft / 2].iter().map(|c| c.norm()).collect();

    let df = 1.0 / (n_fft as f64 * dx);
    let k_lo = ((1.0 / band.max) / df).ceil().max(1.0) as usize;
    let k_hi = (((1.0 / band.min) / df).floor() as usize).min(n_fft / 2 - 2);
    if k_hi <= k_lo + 2 {
        return Err(Error::WindowTooSmall("search band holds no spectral bins".into()));
    }
    let mut best: Option<usize> = None;
    for k in k_lo.max(1)..=k_hi {
        if mag[k] > mag[k - 1] && mag[k] >= mag[k + 1] && best.is_none_or(|b| mag[k] > mag[b]) {
            best = Some(k);
        }
    }
    let k = best.ok_or(Error::NoFringes)?;

    let mut in_band: Vec<f64> = mag[k_lo..=k_hi].to_vec();
    in_band.sort_by(f64::total_cmp);
    let background = in_band[in_band.len() / 2];
    // amplitude of a cosine of that frequency reconstructed from the peak
    let amplitude = 2.0 * mag[k] / hann.iter().sum::<f64>();
    if mag[k] <= 3.0 * background || amplitude <= 1e-6 * mean.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::NoFringes);
    }
    let delta = parabolic_offset(mag[k - 1], mag[k], mag[k + 1]);
    Ok(1.0 / ((k as f64 + delta) * df))
}

/// Spectral low-pass keeping frequencies below `cutoff` (cycles per metre).
fn low_pass(values: &[f64], dx: f64, cutoff: f64) -> Vec<f64> {
    let n = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let kk = if k <= n / 2 { k } else { n - k };
        if kk as f64 / (n as f64 * dx) > cutoff {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}

/// Distance from the centre to the first envelope minimum, averaged over
/// both sides.
///
/// The envelope is the pattern low-passed at half the fringe frequency, which
/// removes the fringe term of a two-beam pattern and keeps its slow factor.
/// Patterns without fringes are used as their own envelope.
pub fn envelope_first_zero(pattern: &CoincidencePattern) -> Result<f64> {
    let dx = pattern.spacing();
    let envelope = match fringe_period(pattern, None) {
        Ok(p) => low_pass(pattern.rate(), dx, 0.5 / p),
        Err(Error::NoFringes) => pattern.rate().to_vec(),
        Err(e) => return Err(e),
    };
    let x = pattern.coordinate();
    let c0 = center(pattern);
    let reach = 0.375 * pattern.extent();
    let ic = pattern.nearest(c0);
    let peak = envelope[ic];
    let not_found = Error::EnvelopeOutOfGrid { searched: reach, required_extent: 2.0 * reach };
    if peak <= 0.0 {
        return Err(not_found);
    }

    let find = |step: isize| -> Option<f64> {
        let mut i = ic as isize + step;
        while i - 1 >= 0 && ((i + 1) as usize) < envelope.len() && (x[i as usize] - c0).abs() <= reach {
            let (a, b, c) = (envelope[(i - step) as usize], envelope[i as usize], envelope[(i + step) as usize]);
            if b <= a && b < c && b < 0.5 * peak {
                let iu = i as usize;
                let delta = parabolic_offset(envelope[iu - 1], envelope[iu], envelope[iu + 1]);
                return Some((x[iu] + delta * dx - c0).abs());
            }
            i += step;
        }
        None
    };
    match (find(-1), find(1)) {
        (Some(l), Some(r)) => Ok(0.5 * (l + r)),
        _ => Err(not_found),
    }
}

/// Fringe visibility at `period` over the central three periods.
///
/// A quadratic background plus one cosine/sine pair at `period` is fitted by
/// least squares; the result is the fringe amplitude over the mean background,
/// clamped to `[0, 1]`. For an ideal two-beam pattern this is exactly
/// `(Imax - Imin) / (Imax + Imin)`, while slow envelope curvature across the
/// window is not mistaken for fringe contrast.
pub fn visibility(pattern: &CoincidencePattern, period: f64) -> Result<f64> {
    let dx = pattern.spacing();
    if !(period > 2.0 * dx) {
        return Err(Error::WindowTooSmall(format!("period {period:e} m is not above 2*dx = {:e} m", 2.0 * dx)));
    }
    let half = 1.5 * period;
    let c0 = center(pattern);
    let x = pattern.coordinate();
    if c0 - half < x[0] || c0 + half > x[x.len() - 1] {
        return Err(Error::WindowTooSmall(format!("three periods ({:e} m) exceed the pattern", 2.0 * half)));
    }
    let range = window(pattern, half);
    if range.len() < 8 {
        return Err(Error::WindowTooSmall(format!("{} samples in three periods", range.len())));
    }
    let k = 2.0 * std::f64::consts::PI / period;
    let basis = |xi: f64| -> [f64; 5] {
        let u = (xi - c0) / half;
        [1.0, u, u * u, (k * (xi - c0)).cos(), (k * (xi - c0)).sin()]
    };
    let mut ata = [[0.0; 5]; 5];
    let mut atb = [0.0; 5];
    for i in range.clone() {
        let b = basis(x[i]);
        for r in 0..5 {
            atb[r] += b[r] * pattern.rate()[i];
            for c in 0..5 {
                ata[r][c] += b[r] * b[c];
            }
        }
    }
    let coef = solve5(ata, atb).ok_or_else(|| Error::WindowTooSmall("degenerate fit".into()))?;
    let background = range.clone().map(|i| {
        let b = basis(x[i]);
        coef[0] + coef[1] * b[1] + coef[2] * b[2]
    });
    let mean_bg = background.sum::<f64>() / range.len() as f64;
    let amp = coef[3].hypot(coef[4]);
    if mean_bg <= 0.0 {
        return Ok(if amp > 0.0 { 1.0 } else { 0.0 });
    }
    Ok((amp / mean_bg).clamp(0.0, 1.0))
}

/// Gaussian elimination with partial pivoting.
fn solve5(mut a: [[f64; 5]; 5], mut b: [f64; 5]) -> Option<[f64; 5]> {
    for col in 0..5 {
        let piv = (col..5).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..5 {
            let f = a[r][col] / a[col][col];
            for c in col..5 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut out = [0.0; 5];
    for r in (0..5).rev() {
        let s: f64 = (r + 1..5).map(|c| a[r][c] * out[c]).sum();
        out[r] = (b[r] - s) / a[r][r];
    }
    Some(out)
}

/// Normalised gradient energy `sum (I[i+1] - I[i])^2 / (sum I)^2`.
pub fn sharpness(pattern: &CoincidencePattern) -> f64 {
    let r = pattern.rate();
    let total: f64 = r.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let grad: f64 = r.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    grad / (total * total)
}

/// Intensity-weighted centroids of the lobes above half maximum, in
/// increasing order.
pub fn peak_positions(pattern: &CoincidencePattern) -> Vec<f64> {
    lobes(pattern).into_iter().map(|l| l.0).collect()
}

/// (centroid, integrated rate) of each connected run above half maximum.
fn lobes(pattern: &CoincidencePattern) -> Vec<(f64, f64)> {
    let r = pattern.rate();
    let x = pattern.coordinate();
    let thr = 0.5 * r.iter().cloned().fold(0.0, f64::max);
    let mut out = Vec::new();
    let mut i = 0;
    while i < r.len() {
        if r[i] >= thr && thr > 0.0 {
            let (mut w, mut wx) = (0.0, 0.0);
            while i < r.len() && r[i] >= thr {
                w += r[i];
                wx += r[i] * x[i];
                i += 1;
            }
            out.push((wx / w, w));
        } else {
            i += 1;
        }
    }
    out
}

/// Separation of the two strongest image lobes divided by the object slit
/// separation `d`.
pub fn magnification(image: &CoincidencePattern, d: f64) -> Result<f64> {
    crate::error::check_positive("d", d)?;
    let mut l = lobes(image);
    if l.len() < 2 {
        return Err(Error::Unresolved);
    }
    l.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.total_cmp(&b.0)));
    Ok((l[0].0 - l[1].0).abs() / d)
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        if best.is_none_or(|b| *v > values[b]) {
            best = Some(i);
        }
    }
    best
}

/// Root-mean-square difference of two rate arrays, relative to the RMS of
/// `reference`.
pub fn relative_rms(reference: &[f64], other: &[f64]) -> f64 {
    assert_eq!(reference.len(), other.len());
    let num: f64 = reference.iter().zip(other).map(|(a, b)| (a - b).powi(2)).sum();
    let den: f64 = reference.iter().map(|a| a * a).sum();
    (num / den).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::PatternMetadata;
    use crate::wavefield::Grid1D;

    fn pattern(n: usize, dx: f64, f: impl Fn(f64) -> f64) -> CoincidencePattern {
        let g = Grid1D::new(n, dx).unwrap();
        let raw = g.coordinates().into_iter().map(f).collect();
        CoincidencePattern::on_grid(g, raw, PatternMetadata::new("synthetic", g)).unwrap()
    }

    #[test]
    fn parabola_vertex() {
        // y = -(t - 0.3)^2
        let y = |t: f64| -(t - 0.3) * (t - 0.3);
        assert!((parabolic_offset(y(-1.0), y(0.0), y(1.0)) - 0.3).abs() < 1e-12);
        assert_eq!(parabolic_offset(1.0, 1.0, 1.0), 0.0);
    }

    #[test]
    fn solve_small_system() {
        let a = [
            [4.0, 1.0, 0.0, 0.0, 0.0],
            [1.0, 3.0, 1.0, 0.0, 0.0],
            [0.0, 1.0, 5.0, 1.0, 0.0],
            [0.0, 0.0, 1.0, 2.0, 1.0],
            [0.0, 0.0, 0.0, 1.0, 6.0],
        ];
        let want = [1.0, -2.0, 0.5, 3.0, -1.0];
        let mut b = [0.0; 5];
        for r in 0..5 {
            b[r] = (0..5).map(|c| a[r][c] * want[c]).sum();
        }
        let got = solve5(a, b).unwrap();
        for i in 0..5 {
            assert!((got[i] - want[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn argmax_prefers_first() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0, 2.0]), Some(1));
        assert_eq!(argmax(&[]), None);
    }

    #[test]
    fn uniform_is_not_sharp() {
        let p = pattern(256, 1e-5, |_| 0.7);
        assert_eq!(sharpness(&p), 0.0);
        assert!(fringe_period(&p, None).is_err());
    }

    #[test]
    fn lobes_of_two_boxes() {
        let p = pattern(256, 1e-5, |x| if (x.abs() - 3e-4).abs() < 4.5e-5 { 1.0 } else { 0.0 });
        let peaks = peak_positions(&p);
        assert_eq!(peaks.len(), 2);
        assert!((peaks[0] + 3e-4).abs() < 1e-9 && (peaks[1] - 3e-4).abs() < 1e-9, "{peaks:?}");
        assert!((magnification(&p, 3e-4).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn visibility_window_checks() {
        let p = pattern(256, 1e-5, |x| (x * 1e4).cos().powi(2));
        assert!(visibility(&p, 1.5e-5).is_err());
        assert!(visibility(&p, 1e-3).is_err());
    }
}
