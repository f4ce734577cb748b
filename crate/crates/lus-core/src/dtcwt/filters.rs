//! Wavelet filter coefficient sets.
//!
//! Two families drive the dual tree: an odd-length symmetric biorthogonal
//! 9/7 pair for the first level (the two trees differ by a one-sample shift,
//! realized by the sampling phase) and an even-length orthonormal
//! quarter-sample-shift pair for every deeper level (tree b is the time
//! reverse of tree a).
//!
//! The 9/7 pair is the Cohen–Daubechies–Feauveau spectral factorization; the
//! q-shift set follows the published 14-tap quarter-shift design. Both were
//! projected onto their exact design constraints (halfband product and zero
//! at the Nyquist frequency for the 9/7; orthonormality, `sqrt(2)` DC gain
//! and a Nyquist zero for the q-shift), so perfect reconstruction holds to
//! machine precision rather than to coefficient-table precision.

/// 9-tap analysis lowpass, DC gain 1.
pub const LEVEL1_ANALYSIS_LOWPASS: [f64; 9] = [
    0.026748759998276417,
    -0.016864103400620722,
    -0.07822328961936087,
    0.26686410340062067,
    0.6029490592421689,
    0.26686410340062067,
    -0.07822328961936087,
    -0.016864103400620722,
    0.026748759998276417,
];

/// 7-tap synthesis lowpass, DC gain 2.
pub const LEVEL1_SYNTHESIS_LOWPASS: [f64; 7] = [
    -0.09127179792990726,
    -0.05754349128519219,
    0.5912717979299073,
    1.1150869825703844,
    0.5912717979299073,
    -0.05754349128519219,
    -0.09127179792990726,
];

/// 14-tap orthonormal quarter-shift lowpass for tree a, DC gain `sqrt(2)`.
pub const QSHIFT_LOWPASS_A: [f64; 14] = [
    0.0032544120014348877,
    -0.0038846303148815614,
    0.03466100581483917,
    -0.038873817548943285,
    -0.11721092466619207,
    0.27529607031070413,
    0.7561448478797834,
    0.5688096188578569,
    0.011872502537340074,
    -0.10671043738051687,
    0.023825150927685862,
    0.017027604126644186,
    -0.005440213308343868,
    -0.004557626864315885,
];

/// Modulates a centered odd-length filter: `(-1)^(n - center) * f[n]`.
fn modulate(f: &[f64]) -> Vec<f64> {
    let center = f.len() as i64 / 2;
    f.iter()
        .enumerate()
        .map(|(n, &v)| {
            if (n as i64 - center).rem_euclid(2) == 0 {
                v
            } else {
                -v
            }
        })
        .collect()
}

fn reversed(f: &[f64]) -> Vec<f64> {
    f.iter().rev().copied().collect()
}

/// One-sample delay: prepend a zero.
fn delayed(f: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(f.len() + 1);
    out.push(0.0);
    out.extend_from_slice(f);
    out
}

/// The complete analysis/synthesis filter set for both trees.
#[derive(Debug, Clone)]
pub struct FilterBank {
    /// Level-1 biorthogonal pair, tree a (odd length, near-symmetric role).
    pub level1_lowpass_a: Vec<f64>,
    pub level1_highpass_a: Vec<f64>,
    /// Tree-b level-1 filters: the one-sample-shifted counterparts of tree a.
    pub level1_lowpass_b: Vec<f64>,
    pub level1_highpass_b: Vec<f64>,
    /// Level-1 synthesis pair.
    pub level1_synth_lowpass: Vec<f64>,
    pub level1_synth_highpass: Vec<f64>,
    /// Q-shift analysis filters for levels >= 2 (even length).
    pub qshift_lowpass_a: Vec<f64>,
    pub qshift_lowpass_b: Vec<f64>,
    pub qshift_highpass_a: Vec<f64>,
    pub qshift_highpass_b: Vec<f64>,
    /// Q-shift synthesis filters.
    pub qshift_synth_lowpass_a: Vec<f64>,
    pub qshift_synth_lowpass_b: Vec<f64>,
    pub qshift_synth_highpass_a: Vec<f64>,
    pub qshift_synth_highpass_b: Vec<f64>,
}

impl FilterBank {
    /// The reference bank used throughout the crate.
    ///
    /// Level 1 scales both lowpass filters by `1/sqrt(2)` so the combined
    /// analysis+synthesis chain has unit gain; the highpasses are the
    /// modulated duals. For q-shift levels, tree b is the time reverse of
    /// tree a and synthesis filters are the time reverses of the analysis
    /// ones.
    pub fn reference() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h0o: Vec<f64> = LEVEL1_ANALYSIS_LOWPASS.iter().map(|v| v * s).collect();
        let g0o: Vec<f64> = LEVEL1_SYNTHESIS_LOWPASS.iter().map(|v| v * s).collect();
        let h1o = modulate(&g0o);
        let g1o = modulate(&h0o);

        let h0a = QSHIFT_LOWPASS_A.to_vec();
        let h0b = reversed(&h0a);
        let m = h0a.len();
        let h1a: Vec<f64> = (0..m)
            .map(|n| if n % 2 == 0 { h0a[m - 1 - n] } else { -h0a[m - 1 - n] })
            .collect();
        let h1b = reversed(&h1a);

        FilterBank {
            level1_lowpass_b: delayed(&h0o),
            level1_highpass_b: delayed(&h1o),
            level1_lowpass_a: h0o,
            level1_highpass_a: h1o,
            level1_synth_lowpass: g0o,
            level1_synth_highpass: g1o,
            qshift_synth_lowpass_a: h0b.clone(),
            qshift_synth_lowpass_b: h0a.clone(),
            qshift_synth_highpass_a: h1b.clone(),
            qshift_synth_highpass_b: h1a.clone(),
            qshift_lowpass_a: h0a,
            qshift_lowpass_b: h0b,
            qshift_highpass_a: h1a,
            qshift_highpass_b: h1b,
        }
    }
}
