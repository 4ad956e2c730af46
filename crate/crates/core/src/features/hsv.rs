use super::RawImage;

pub const DEFAULT_BINS_PER_CHANNEL: usize = 10;

/// Hexcone HSV: hue in degrees `[0, 360)`, saturation and value in `[0, 1]`.
/// Achromatic pixels get hue 0.
pub fn rgb_to_hsv([r, g, b]: [u8; 3]) -> (f64, f64, f64) {
    let r = f64::from(r) / 255.0;
    let g = f64::from(g) / 255.0;
    let b = f64::from(b) / 255.0;
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;

    let hue = if delta == 0.0 {
        0.0
    } else if max == r {
        60.0 * ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    let saturation = if max == 0.0 { 0.0 } else { delta / max };
    (hue.rem_euclid(360.0), saturation, max)
}

fn bin(x: f64, bins: usize) -> usize {
    ((x * bins as f64) as usize).min(bins - 1)
}

/// Index of the joint (H, S, V) bin, hue-major.
pub fn hsv_bin(rgb: [u8; 3], bins_per_channel: usize) -> usize {
    let (h, s, v) = rgb_to_hsv(rgb);
    let b = bins_per_channel;
    bin(h / 360.0, b) * b * b + bin(s, b) * b + bin(v, b)
}

/// Unnormalized joint HSV histogram with `bins_per_channel³` entries.
/// Each pixel adds exactly one count.
pub fn hsv_histogram(img: &RawImage, bins_per_channel: usize) -> Vec<f64> {
    assert!(bins_per_channel >= 1, "bins_per_channel must be positive");
    let mut hist = vec![0.0; bins_per_channel.pow(3)];
    for &px in &img.pixels {
        hist[hsv_bin(px, bins_per_channel)] += 1.0;
    }
    hist
}
