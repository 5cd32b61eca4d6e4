use image::RgbImage;

use super::{DetectionError, Rect};

/// Side length of texture-model inputs.
pub const CROP_SIZE: u32 = 224;

/// Cuts `rect` out of `image` (clipped to whole pixels inside the image)
/// and resamples it to 224×224 with nearest-neighbour lookup.
///
/// Output pixel `(x, y)` reads source pixel
/// `(x0 + x·w / 224, y0 + y·h / 224)` using integer division, so a crop that
/// is already 224×224 is copied verbatim.
pub fn crop_and_resize(image: &RgbImage, rect: &Rect) -> Result<RgbImage, DetectionError> {
    let (w, h) = image.dimensions();
    let x0 = rect.left.floor().max(0.0);
    let y0 = rect.top.floor().max(0.0);
    let x1 = rect.right().ceil().min(w as f64);
    let y1 = rect.bottom().ceil().min(h as f64);
    if !(x1 > x0 && y1 > y0) {
        return Err(DetectionError::EmptyCrop(*rect));
    }
    let (x0, y0) = (x0 as u64, y0 as u64);
    let (cw, ch) = (x1 as u64 - x0, y1 as u64 - y0);
    let size = CROP_SIZE as u64;
    Ok(RgbImage::from_fn(CROP_SIZE, CROP_SIZE, |x, y| {
        let sx = x0 + x as u64 * cw / size;
        let sy = y0 + y as u64 * ch / size;
        *image.get_pixel(sx as u32, sy as u32)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgb;
    use std::collections::HashSet;

    #[test]
    fn identity_crop() {
        let img = RgbImage::from_fn(300, 260, |x, y| Rgb([x as u8, y as u8, (x ^ y) as u8]));
        let out = crop_and_resize(&img, &Rect::new(10.0, 20.0, 224.0, 224.0)).unwrap();
        for (x, y, p) in out.enumerate_pixels() {
            assert_eq!(p, img.get_pixel(x + 10, y + 20));
        }
    }

    #[test]
    fn uniform_downscale() {
        let img = RgbImage::from_pixel(448, 448, Rgb([7, 8, 9]));
        let out = crop_and_resize(&img, &Rect::new(0.0, 0.0, 448.0, 448.0)).unwrap();
        assert_eq!(out.dimensions(), (224, 224));
        assert!(out.pixels().all(|p| *p == Rgb([7, 8, 9])));
    }

    #[test]
    fn checkerboard_keeps_palette() {
        let colors = [
            Rgb([255, 0, 0]),
            Rgb([0, 255, 0]),
            Rgb([0, 0, 255]),
            Rgb([9, 9, 9]),
        ];
        let img = RgbImage::from_fn(2, 2, |x, y| colors[(y * 2 + x) as usize]);
        let out = crop_and_resize(&img, &Rect::new(0.0, 0.0, 2.0, 2.0)).unwrap();
        let seen: HashSet<[u8; 3]> = out.pixels().map(|p| p.0).collect();
        let palette: HashSet<[u8; 3]> = colors.iter().map(|p| p.0).collect();
        assert_eq!(seen, palette);
        // Each source pixel fills one 112×112 quadrant.
        assert_eq!(*out.get_pixel(111, 111), colors[0]);
        assert_eq!(*out.get_pixel(112, 111), colors[1]);
        assert_eq!(*out.get_pixel(111, 112), colors[2]);
        assert_eq!(*out.get_pixel(223, 223), colors[3]);
    }

    #[test]
    fn partially_outside_is_clipped() {
        let img = RgbImage::from_pixel(50, 50, Rgb([1, 2, 3]));
        let out = crop_and_resize(&img, &Rect::new(-20.0, 40.0, 40.0, 30.0)).unwrap();
        assert_eq!(out.dimensions(), (224, 224));
    }

    #[test]
    fn outside_is_empty() {
        let img = RgbImage::from_pixel(50, 50, Rgb([1, 2, 3]));
        assert!(matches!(
            crop_and_resize(&img, &Rect::new(60.0, 0.0, 10.0, 10.0)),
            Err(DetectionError::EmptyCrop(_))
        ));
    }
}
