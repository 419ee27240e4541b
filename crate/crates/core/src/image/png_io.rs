//! Grayscale PNG (8/16-bit) via the `png` crate.

use std::path::Path;

use super::{quantize, BitDepth, ImageGrid, RawGray};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub(crate) fn decode_png(bytes: &[u8]) -> Result<RawGray> {
    let mut decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    // Sub-byte grayscale is widened to 8 bits; 16-bit samples are kept.
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::UnsupportedFormat(format!("png: {e}")))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::UnsupportedFormat("png: image too large".into()))?;
    let mut buf = vec![0u8; size];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::UnsupportedFormat(format!("png: {e}")))?;
    if info.color_type != png::ColorType::Grayscale {
        return Err(Error::UnsupportedFormat(format!(
            "png color type {:?}; only grayscale is supported",
            info.color_type
        )));
    }
    let width = info.width as usize;
    let height = info.height as usize;
    let (maxval, samples) = match info.bit_depth {
        png::BitDepth::Sixteen => {
            let mut samples = Vec::with_capacity(width * height);
            for row in buf.chunks(info.line_size).take(height) {
                samples.extend(
                    row[..2 * width]
                        .chunks_exact(2)
                        .map(|b| u32::from(u16::from_be_bytes([b[0], b[1]]))),
                );
            }
            (65535, samples)
        }
        _ => {
            let mut samples = Vec::with_capacity(width * height);
            for row in buf.chunks(info.line_size).take(height) {
                samples.extend(row[..width].iter().map(|&b| u32::from(b)));
            }
            (255, samples)
        }
    };
    Ok(RawGray {
        width,
        height,
        maxval,
        samples,
    })
}

pub(crate) fn encode_png<T: Scalar>(img: &ImageGrid<T>, depth: BitDepth) -> Result<Vec<u8>> {
    let side = img.side() as u32;
    let samples = quantize(img, depth.maxval());
    let data: Vec<u8> = match depth {
        BitDepth::Eight => samples.iter().map(|&s| s as u8).collect(),
        BitDepth::Sixteen => samples.iter().flat_map(|&s| (s as u16).to_be_bytes()).collect(),
    };
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, side, side);
        encoder.set_color(png::ColorType::Grayscale);
        encoder.set_depth(match depth {
            BitDepth::Eight => png::BitDepth::Eight,
            BitDepth::Sixteen => png::BitDepth::Sixteen,
        });
        let mut writer = encoder
            .write_header()
            .map_err(|e| Error::UnsupportedFormat(format!("png: {e}")))?;
        writer
            .write_image_data(&data)
            .map_err(|e| Error::UnsupportedFormat(format!("png: {e}")))?;
    }
    Ok(out)
}

pub fn read_png<T: Scalar>(path: impl AsRef<Path>) -> Result<ImageGrid<T>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_png(&bytes)?.into_grid()
}

pub fn write_png<T: Scalar>(img: &ImageGrid<T>, path: impl AsRef<Path>, depth: BitDepth) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_png(img, depth)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sixteen_bit_saturated_is_one() {
        let img = ImageGrid::new(3, vec![1.0f64; 9]).unwrap();
        let bytes = encode_png(&img, BitDepth::Sixteen).unwrap();
        let back: ImageGrid<f64> = decode_png(&bytes).unwrap().into_grid().unwrap();
        assert_eq!(back.pixels(), &[1.0; 9]);
    }

    #[test]
    fn eight_bit_round_trip_within_half_step() {
        let pixels: Vec<f64> = (0..16).map(|i| i as f64 / 15.0 * 0.93 + 0.01).collect();
        let img = ImageGrid::new(4, pixels).unwrap();
        let bytes = encode_png(&img, BitDepth::Eight).unwrap();
        let back: ImageGrid<f64> = decode_png(&bytes).unwrap().into_grid().unwrap();
        for (a, b) in img.pixels().iter().zip(back.pixels()) {
            assert!((a - b).abs() <= 0.5 / 255.0 + 1e-12);
        }
    }

    #[test]
    fn rejects_color_and_non_square() {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, 1, 1);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Eight);
            enc.write_header().unwrap().write_image_data(&[1, 2, 3]).unwrap();
        }
        assert!(matches!(decode_png(&out), Err(Error::UnsupportedFormat(_))));

        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, 3, 2);
            enc.set_color(png::ColorType::Grayscale);
            enc.set_depth(png::BitDepth::Eight);
            enc.write_header().unwrap().write_image_data(&[0; 6]).unwrap();
        }
        let raw = decode_png(&out).unwrap();
        assert!(matches!(
            raw.into_grid::<f64>(),
            Err(Error::NonSquare { width: 3, height: 2 })
        ));
    }
}
