//! Synthetic lung-ultrasound-style image generator.
//!
//! Each class gets a distinct pattern recipe built from the morphologies the
//! real images exhibit: a bright pleural band, repeated horizontal A-lines,
//! vertical B-line streaks (separate or coalescent), rough texture bands and
//! blotchy consolidation regions. The recipes are stand-ins that exercise
//! orientation-selective and texture features end to end, not clinical
//! simulations.
//!
//! Every subject draws persistent parameter offsets (band positions, spacing,
//! gain, streak phase), so images cluster by subject and leave-one-subject-out
//! is strictly harder than leave-one-image-out. All randomness derives from
//! the spec seed through per-image hashes; output is byte-identical across
//! runs and independent of generation order.

use std::path::{Path, PathBuf};

use lus_core::error::{Error, Result};
use lus_core::imaging::{write_pgm, GrayImage};
use lus_core::pipeline::ClassLabel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generator parameters. The six class recipes are fixed; counts, seed and
/// noise are configurable.
#[derive(Debug, Clone, Copy)]
pub struct SynthSpec {
    pub subjects_per_class: usize,
    pub images_per_subject: usize,
    pub seed: u64,
    pub noise_level: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            subjects_per_class: 4,
            images_per_subject: 30,
            seed: 42,
            noise_level: 0.05,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.subjects_per_class == 0 || self.images_per_subject == 0 {
            return Err(Error::Manifest(
                "subjects_per_class and images_per_subject must be >= 1".into(),
            ));
        }
        if !(0.0..=0.5).contains(&self.noise_level) {
            return Err(Error::Manifest(format!(
                "noise_level must be in [0, 0.5], got {}",
                self.noise_level
            )));
        }
        Ok(())
    }
}

const IMG_H: usize = 260;
const IMG_W: usize = 210;

/// splitmix64; used to derive independent per-subject and per-image seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn derive_seed(seed: u64, class: usize, subject: usize, image: u64) -> u64 {
    mix(seed ^ mix(class as u64 ^ mix(subject as u64 ^ mix(image))))
}

/// Per-class pattern recipe.
struct Recipe {
    pleura_pos: f64,
    pleura_thickness: f64,
    pleura_brightness: f64,
    pleura_wobble: f64,
    a_line_count: usize,
    a_line_spacing: f64,
    b_line_count: usize,
    b_line_width: f64,
    b_line_brightness: f64,
    texture_band: f64,
    blob_count: usize,
}

fn recipe(class: ClassLabel) -> Recipe {
    match class {
        // thin smooth pleura, a few A-lines, quiet lower field
        ClassLabel::Normal => Recipe {
            pleura_pos: 0.16,
            pleura_thickness: 3.0,
            pleura_brightness: 0.85,
            pleura_wobble: 0.6,
            a_line_count: 3,
            a_line_spacing: 0.17,
            b_line_count: 0,
            b_line_width: 0.0,
            b_line_brightness: 0.0,
            texture_band: 0.0,
            blob_count: 0,
        },
        // thick, strongly irregular pleura with a rough texture band and a
        // couple of streaks
        ClassLabel::Cld => Recipe {
            pleura_pos: 0.18,
            pleura_thickness: 9.0,
            pleura_brightness: 0.8,
            pleura_wobble: 5.0,
            a_line_count: 0,
            a_line_spacing: 0.0,
            b_line_count: 2,
            b_line_width: 5.0,
            b_line_brightness: 0.45,
            texture_band: 0.22,
            blob_count: 0,
        },
        // weak broken pleura, blotchy consolidation regions
        ClassLabel::Con => Recipe {
            pleura_pos: 0.17,
            pleura_thickness: 2.0,
            pleura_brightness: 0.35,
            pleura_wobble: 3.0,
            a_line_count: 0,
            a_line_spacing: 0.0,
            b_line_count: 0,
            b_line_width: 0.0,
            b_line_brightness: 0.0,
            texture_band: 0.0,
            blob_count: 4,
        },
        // sharp pleura with many tightly spaced A-lines
        ClassLabel::Ptx => Recipe {
            pleura_pos: 0.14,
            pleura_thickness: 2.5,
            pleura_brightness: 0.95,
            pleura_wobble: 0.4,
            a_line_count: 6,
            a_line_spacing: 0.11,
            b_line_count: 0,
            b_line_width: 0.0,
            b_line_brightness: 0.0,
            texture_band: 0.0,
            blob_count: 0,
        },
        // thickened pleura and broad coalescent streaks filling the field
        ClassLabel::Rds => Recipe {
            pleura_pos: 0.19,
            pleura_thickness: 6.0,
            pleura_brightness: 0.75,
            pleura_wobble: 3.0,
            a_line_count: 0,
            a_line_spacing: 0.0,
            b_line_count: 7,
            b_line_width: 14.0,
            b_line_brightness: 0.55,
            texture_band: 0.0,
            blob_count: 0,
        },
        // normal pleura, an A-line up top, a few separate narrow streaks
        ClassLabel::Ttn => Recipe {
            pleura_pos: 0.16,
            pleura_thickness: 3.5,
            pleura_brightness: 0.8,
            pleura_wobble: 1.0,
            a_line_count: 1,
            a_line_spacing: 0.15,
            b_line_count: 3,
            b_line_width: 4.0,
            b_line_brightness: 0.6,
            texture_band: 0.0,
            blob_count: 0,
        },
    }
}

/// Parameters a subject carries across all of its images.
struct SubjectParams {
    pleura_shift: f64,
    spacing_mul: f64,
    gain: f64,
    streak_phase: f64,
    wobble_phase: f64,
    blob_centers: Vec<(f64, f64, f64)>,
    clinical: [f64; 3],
}

fn subject_params(class: ClassLabel, rng: &mut ChaCha8Rng, r: &Recipe) -> SubjectParams {
    let pleura_shift = rng.gen_range(-0.025..0.025);
    let spacing_mul = rng.gen_range(0.92..1.08);
    let gain = rng.gen_range(0.9..1.1);
    let streak_phase = rng.gen_range(0.0..1.0);
    let wobble_phase = rng.gen_range(0.0..std::f64::consts::TAU);
    let blob_centers = (0..r.blob_count)
        .map(|_| {
            (
                rng.gen_range(0.35..0.85),
                rng.gen_range(0.15..0.85),
                rng.gen_range(14.0..26.0),
            )
        })
        .collect();
    // clinical ranges overlap between most classes; only CLD vs RDS is
    // cleanly separated by age, mirroring why those fields exist at all
    let (ga, dol) = match class {
        ClassLabel::Normal => (rng.gen_range(35.0..41.0), rng.gen_range(1.0..20.0)),
        ClassLabel::Cld => (rng.gen_range(24.0..29.0), rng.gen_range(40.0..120.0)),
        ClassLabel::Con => (rng.gen_range(28.0..38.0), rng.gen_range(5.0..30.0)),
        ClassLabel::Ptx => (rng.gen_range(33.0..40.0), rng.gen_range(1.0..15.0)),
        ClassLabel::Rds => (rng.gen_range(26.0..34.0), rng.gen_range(1.0..10.0)),
        ClassLabel::Ttn => (rng.gen_range(34.0..40.0), rng.gen_range(1.0..5.0)),
    };
    let cgats = ga + dol / 7.0;
    SubjectParams {
        pleura_shift,
        spacing_mul,
        gain,
        streak_phase,
        wobble_phase,
        blob_centers,
        clinical: [ga, cgats, dol],
    }
}

fn render_image(
    class: ClassLabel,
    subj: &SubjectParams,
    rng: &mut ChaCha8Rng,
    noise_level: f64,
) -> GrayImage {
    let r = recipe(class);
    let (h, w) = (IMG_H, IMG_W);
    let mut px = vec![0.0f64; h * w];

    // background speckle
    for v in px.iter_mut() {
        *v = 0.06 + rng.gen_range(0.0..noise_level.max(1e-9));
    }

    let gain = subj.gain;
    let pleura_row = (r.pleura_pos + subj.pleura_shift) * h as f64 + rng.gen_range(-1.5..1.5);
    let add_band = |px: &mut [f64],
                    row0: f64,
                    thickness: f64,
                    brightness: f64,
                    wobble_amp: f64,
                    wobble_phase: f64| {
        for c in 0..w {
            let wob = wobble_amp
                * (std::f64::consts::TAU * 2.3 * c as f64 / w as f64 + wobble_phase).sin();
            let center = row0 + wob;
            let lo = ((center - 3.0 * thickness).floor().max(0.0)) as usize;
            let hi = ((center + 3.0 * thickness).ceil().min(h as f64 - 1.0)) as usize;
            for rr in lo..=hi {
                let d = (rr as f64 - center) / thickness;
                px[rr * w + c] += brightness * (-0.5 * d * d).exp();
            }
        }
    };

    if r.pleura_brightness > 0.0 {
        add_band(
            &mut px,
            pleura_row,
            r.pleura_thickness,
            r.pleura_brightness * gain,
            r.pleura_wobble,
            subj.wobble_phase,
        );
    }
    for i in 1..=r.a_line_count {
        let row = pleura_row + i as f64 * r.a_line_spacing * subj.spacing_mul * h as f64;
        if row >= h as f64 {
            break;
        }
        let fade = 0.72f64.powi(i as i32);
        add_band(
            &mut px,
            row + rng.gen_range(-1.0..1.0),
            r.pleura_thickness * 0.8,
            r.pleura_brightness * fade * gain,
            r.pleura_wobble * 0.5,
            subj.wobble_phase,
        );
    }

    // vertical streaks from the pleura down to the bottom edge
    for i in 0..r.b_line_count {
        let frac = (i as f64 + 0.5) / r.b_line_count as f64;
        let col = ((frac + subj.streak_phase) % 1.0) * w as f64 + rng.gen_range(-2.0..2.0);
        let width = r.b_line_width * subj.spacing_mul;
        let start = pleura_row as usize;
        for c in 0..w {
            let d = (c as f64 - col) / width;
            if d.abs() > 3.0 {
                continue;
            }
            let profile = (-0.5 * d * d).exp();
            for rr in start..h {
                let depth_fade = 1.0 - 0.25 * (rr - start) as f64 / (h - start) as f64;
                px[rr * w + c] += r.b_line_brightness * gain * profile * depth_fade;
            }
        }
    }

    // rough texture band under the pleura
    if r.texture_band > 0.0 {
        let band_lo = (pleura_row + 10.0) as usize;
        let band_hi = ((pleura_row + 0.35 * h as f64) as usize).min(h - 1);
        for rr in band_lo..=band_hi {
            for c in 0..w {
                px[rr * w + c] += rng.gen_range(0.0..r.texture_band) * gain;
            }
        }
    }

    // blotchy consolidation regions with internal speckle
    for &(cy, cx, radius) in &subj.blob_centers {
        let (cy, cx) = (cy * h as f64, cx * w as f64);
        let lo_r = ((cy - 3.0 * radius).max(0.0)) as usize;
        let hi_r = ((cy + 3.0 * radius).min(h as f64 - 1.0)) as usize;
        for rr in lo_r..=hi_r {
            for c in 0..w {
                let dy = (rr as f64 - cy) / radius;
                let dx = (c as f64 - cx) / (radius * 1.4);
                let d2 = dy * dy + dx * dx;
                if d2 > 9.0 {
                    continue;
                }
                let envelope = (-0.5 * d2).exp();
                px[rr * w + c] += envelope * (0.32 + rng.gen_range(0.0..0.22)) * gain;
            }
        }
    }

    for v in px.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    GrayImage::from_pixels(h, w, px).expect("synthetic image construction is in range")
}

/// One generated dataset row.
pub struct SynthRow {
    pub rel_path: String,
    pub subject_id: String,
    pub video_id: String,
    pub label: ClassLabel,
    pub clinical: [f64; 3],
}

/// Generates every image plus the manifest under `out_dir`. Returns the
/// manifest path.
pub fn generate(spec: &SynthSpec, out_dir: &Path) -> Result<PathBuf> {
    spec.validate()?;
    let image_dir = out_dir.join("images");
    std::fs::create_dir_all(&image_dir).map_err(|e| Error::io(&image_dir, e))?;

    let mut rows: Vec<SynthRow> = Vec::new();
    for (class_idx, &class) in ClassLabel::ALL.iter().enumerate() {
        for subject in 0..spec.subjects_per_class {
            let mut subj_rng =
                ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, class_idx, subject, u64::MAX));
            let params = subject_params(class, &mut subj_rng, &recipe(class));
            let subject_id = format!("{}-s{}", class, subject + 1);
            for image in 0..spec.images_per_subject {
                let mut img_rng = ChaCha8Rng::seed_from_u64(derive_seed(
                    spec.seed,
                    class_idx,
                    subject,
                    image as u64,
                ));
                let img = render_image(class, &params, &mut img_rng, spec.noise_level);
                let rel_path = format!("images/{subject_id}-i{:02}.pgm", image + 1);
                write_pgm(&img, &out_dir.join(&rel_path))?;
                rows.push(SynthRow {
                    rel_path,
                    subject_id: subject_id.clone(),
                    // five frames per "video", mirroring upstream sampling
                    video_id: format!("{subject_id}-v{}", image / 5 + 1),
                    label: class,
                    clinical: params.clinical,
                });
            }
        }
    }

    let manifest_path = out_dir.join("manifest.csv");
    let mut text = String::from("image_path,subject_id,video_id,label,ga_weeks,cgats_weeks,dol_days\n");
    for row in &rows {
        text.push_str(&format!(
            "{},{},{},{},{:.3},{:.3},{:.3}\n",
            row.rel_path, row.subject_id, row.video_id, row.label,
            row.clinical[0], row.clinical[1], row.clinical[2]
        ));
    }
    std::fs::write(&manifest_path, text).map_err(|e| Error::io(&manifest_path, e))?;
    Ok(manifest_path)
}
