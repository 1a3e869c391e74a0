//! Maximal overlap discrete wavelet transform (MODWT).
//!
//! The transform is computed with the pyramid algorithm over a circular
//! boundary. Level `j` detail coefficients are associated with the dyadic
//! scale `tau_j = 2^(j-1)` sampling periods. The first `L_j - 1` coefficients
//! of each level wrap around the series start; [`WaveletDecomposition::boundary_width`]
//! records `L_j = (2^j - 1)(L - 1) + 1` so estimators can drop them.

use std::f64::consts::FRAC_1_SQRT_2;
use std::io::Write;

use crate::error::{Error, Result};

// Least asymmetric width-8 scaling filter (Daubechies "symmlet" phase choice),
// from an extended-precision spectral factorisation.
const LA8_SCALING: [f64; 8] = [
    -0.075_765_714_789_502_213_227_746_2,
    -0.029_635_527_646_002_491_764_369_18,
    0.497_618_667_632_774_989_979_605_5,
    0.803_738_751_805_132_080_878_805_6,
    0.297_857_795_605_306_051_402_901_2,
    -0.099_219_543_576_633_532_585_208_01,
    -0.012_603_967_262_031_303_753_916_1,
    0.032_223_100_604_051_467_871_615_92,
];

/// Orthonormal DWT filter pair. MODWT rescaling by `1/sqrt(2)` per level is
/// applied inside [`decompose`].
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletFilter {
    pub name: String,
    pub scaling: Vec<f64>,
    pub wavelet: Vec<f64>,
}

impl WaveletFilter {
    /// Builds a filter from its scaling coefficients; the wavelet side is the
    /// quadrature mirror `h_l = (-1)^l g_(L-1-l)`.
    pub fn from_scaling(name: &str, scaling: Vec<f64>) -> Self {
        let wavelet = quadrature_mirror(&scaling);
        WaveletFilter {
            name: name.to_string(),
            scaling,
            wavelet,
        }
    }

    pub fn width(&self) -> usize {
        self.scaling.len()
    }

    /// `L_j`, the number of leading level-`j` coefficients touched by the
    /// circular boundary, plus one.
    pub fn boundary_width(&self, level: usize) -> usize {
        boundary_width(self.width(), level)
    }
}

pub fn quadrature_mirror(scaling: &[f64]) -> Vec<f64> {
    let l = scaling.len();
    (0..l)
        .map(|i| {
            let g = scaling[l - 1 - i];
            if i % 2 == 0 {
                g
            } else {
                -g
            }
        })
        .collect()
}

pub fn make_filter(name: &str) -> Result<WaveletFilter> {
    match name.trim().to_ascii_lowercase().as_str() {
        "haar" => Ok(WaveletFilter::from_scaling(
            "haar",
            vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2],
        )),
        "la8" => Ok(WaveletFilter::from_scaling("la8", LA8_SCALING.to_vec())),
        _ => Err(Error::UnknownFilter(name.to_string())),
    }
}

/// Dyadic scale `2^(j-1)` of level `j`, in base sampling periods.
pub fn scale_tau(level: usize) -> usize {
    1usize << (level - 1)
}

pub(crate) fn boundary_width(width: usize, level: usize) -> usize {
    ((1usize << level) - 1) * (width - 1) + 1
}

/// Largest `J` whose unbiased sample count `T - L_J + 1` is at least
/// `min_unbiased`; zero when even level 1 falls short.
pub fn max_level(len: usize, filter: &WaveletFilter, min_unbiased: usize) -> Result<usize> {
    let width = filter.width();
    if len < width {
        return Err(Error::SeriesTooShort { len, width });
    }
    let mut j = 0;
    loop {
        let next = j + 1;
        // past this point L_j overflows any realistic series length
        if next >= usize::BITS as usize - 1 {
            return Ok(j);
        }
        let lj = boundary_width(width, next);
        if lj > len || len - lj + 1 < min_unbiased {
            return Ok(j);
        }
        j = next;
    }
}

/// Crystals of a `J`-level MODWT. Every vector has the input length.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletDecomposition {
    pub levels: usize,
    /// `details[j - 1]` is the level-`j` wavelet crystal.
    pub details: Vec<Vec<f64>>,
    /// Level-`J` scaling crystal.
    pub smooth: Vec<f64>,
    /// `boundary_width[j - 1]` is `L_j`.
    pub boundary_width: Vec<usize>,
    pub filter_name: String,
}

impl WaveletDecomposition {
    pub fn len(&self) -> usize {
        self.smooth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.smooth.is_empty()
    }

    pub fn detail(&self, level: usize) -> &[f64] {
        &self.details[level - 1]
    }

    /// Unbiased sample count `M_j = T - L_j + 1`.
    pub fn unbiased_count(&self, level: usize) -> usize {
        (self.len() + 1).saturating_sub(self.boundary_width[level - 1])
    }

    /// CSV with columns `t, d1..dJ, sJ`.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.levels).map(|j| format!("d{j}")));
        header.push(format!("s{}", self.levels));
        w.write_record(&header)?;
        for t in 0..self.len() {
            let mut rec = vec![t.to_string()];
            rec.extend(self.details.iter().map(|d| d[t].to_string()));
            rec.push(self.smooth[t].to_string());
            w.write_record(&rec)?;
        }
        w.flush()
    }
}

pub fn decompose(
    series: &[f64],
    filter: &WaveletFilter,
    levels: usize,
) -> Result<WaveletDecomposition> {
    let n = series.len();
    if levels == 0 {
        return Err(Error::InvalidParameter("levels must be at least 1".into()));
    }
    let max = max_level(n, filter, 1)?;
    if levels > max {
        return Err(Error::TooManyLevels {
            requested: levels,
            max_level: max,
        });
    }

    let g: Vec<f64> = filter.scaling.iter().map(|c| c * FRAC_1_SQRT_2).collect();
    let h: Vec<f64> = filter.wavelet.iter().map(|c| c * FRAC_1_SQRT_2).collect();

    let mut details = Vec::with_capacity(levels);
    let mut v = series.to_vec();
    for j in 1..=levels {
        let (w, next) = pyramid_step(&v, &h, &g, scale_tau(j));
        details.push(w);
        v = next;
    }
    Ok(WaveletDecomposition {
        levels,
        details,
        smooth: v,
        boundary_width: (1..=levels).map(|j| filter.boundary_width(j)).collect(),
        filter_name: filter.name.clone(),
    })
}

// One level of the pyramid: filters with taps spaced `stride` apart.
fn pyramid_step(v: &[f64], h: &[f64], g: &[f64], stride: usize) -> (Vec<f64>, Vec<f64>) {
    let n = v.len();
    let shift = stride % n;
    let mut w = vec![0.0; n];
    let mut s = vec![0.0; n];
    for t in 0..n {
        let mut k = t;
        let (mut acc_w, mut acc_s) = (0.0, 0.0);
        for (hl, gl) in h.iter().zip(g) {
            acc_w += hl * v[k];
            acc_s += gl * v[k];
            k = if k >= shift { k - shift } else { k + n - shift };
        }
        w[t] = acc_w;
        s[t] = acc_s;
    }
    (w, s)
}

#[cfg(test)]
pub(crate) fn reconstruct(dec: &WaveletDecomposition, filter: &WaveletFilter) -> Vec<f64> {
    let n = dec.len();
    let g: Vec<f64> = filter.scaling.iter().map(|c| c * FRAC_1_SQRT_2).collect();
    let h: Vec<f64> = filter.wavelet.iter().map(|c| c * FRAC_1_SQRT_2).collect();
    let mut v = dec.smooth.clone();
    for j in (1..=dec.levels).rev() {
        let w = dec.detail(j);
        let stride = scale_tau(j);
        let mut prev = vec![0.0; n];
        for (t, out) in prev.iter_mut().enumerate() {
            for l in 0..h.len() {
                let k = (t + stride * l) % n;
                *out += h[l] * w[k] + g[l] * v[k];
            }
        }
        v = prev;
    }
    v
}
