//! PFM (portable float map) and binary PPM readers and writers.
//!
//! PFM files are written little-endian (scale `-1.0`) with scanlines stored
//! bottom-to-top, as the format prescribes. Invalid pixels are written as
//! NaN and any non-finite value read back marks the pixel invalid. PPM
//! files are 8-bit P6; values map linearly between `[0, 255]` and `[0, 1]`.

use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;

use nalgebra::Vector3;

use super::grid::{ColorImage, Grid, ScalarMap, Texel, VectorMap};
use crate::error::{Error, Result};

/// Pixel types with a PFM representation.
pub trait PfmTexel: Texel {
    const CHANNELS: usize;
    fn to_f32(&self, out: &mut [f32]);
    fn from_f32(v: &[f32]) -> Self;
}

impl PfmTexel for f64 {
    const CHANNELS: usize = 1;
    fn to_f32(&self, out: &mut [f32]) {
        out[0] = *self as f32;
    }
    fn from_f32(v: &[f32]) -> Self {
        v[0] as f64
    }
}

impl PfmTexel for [f64; 3] {
    const CHANNELS: usize = 3;
    fn to_f32(&self, out: &mut [f32]) {
        for k in 0..3 {
            out[k] = self[k] as f32;
        }
    }
    fn from_f32(v: &[f32]) -> Self {
        [v[0] as f64, v[1] as f64, v[2] as f64]
    }
}

impl PfmTexel for Vector3<f64> {
    const CHANNELS: usize = 3;
    fn to_f32(&self, out: &mut [f32]) {
        for k in 0..3 {
            out[k] = self[k] as f32;
        }
    }
    fn from_f32(v: &[f32]) -> Self {
        Vector3::new(v[0] as f64, v[1] as f64, v[2] as f64)
    }
}

pub fn encode_pfm<T: PfmTexel>(grid: &Grid<T>) -> Vec<u8> {
    let (h, w) = grid.dims();
    let magic = if T::CHANNELS == 1 { "Pf" } else { "PF" };
    let mut out = format!("{magic}\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(h * w * T::CHANNELS * 4);
    let mut px = vec![0f32; T::CHANNELS];
    for r in (0..h).rev() {
        for c in 0..w {
            match grid.get(r, c) {
                Some(v) => v.to_f32(&mut px),
                None => px.fill(f32::NAN),
            }
            for v in &px {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    out
}

fn read_token(reader: &mut impl BufRead) -> std::io::Result<String> {
    let mut token = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        if reader.read(&mut byte)? == 0 {
            break;
        }
        let b = byte[0];
        if b == b'#' && token.is_empty() {
            let mut skip = Vec::new();
            reader.read_until(b'\n', &mut skip)?;
            continue;
        }
        if b.is_ascii_whitespace() {
            if token.is_empty() {
                continue;
            }
            break;
        }
        token.push(b);
    }
    Ok(String::from_utf8_lossy(&token).into_owned())
}

fn header_number<T: std::str::FromStr>(
    reader: &mut impl BufRead,
    origin: &Path,
    field: &str,
) -> Result<T> {
    let tok = read_token(reader).map_err(|e| Error::io(origin, e))?;
    tok.parse()
        .map_err(|_| Error::parse(origin, field, format!("expected a number, got `{tok}`")))
}

pub fn decode_pfm<T: PfmTexel>(bytes: &[u8], origin: &Path) -> Result<Grid<T>> {
    let mut reader = std::io::Cursor::new(bytes);
    let magic = read_token(&mut reader).map_err(|e| Error::io(origin, e))?;
    let channels = match magic.as_str() {
        "Pf" => 1,
        "PF" => 3,
        other => {
            return Err(Error::parse(origin, "header", format!("not a PFM file (magic `{other}`)")))
        }
    };
    if channels != T::CHANNELS {
        return Err(Error::parse(
            origin,
            "header",
            format!("expected {} channel(s), file has {channels}", T::CHANNELS),
        ));
    }
    let w: usize = header_number(&mut reader, origin, "width")?;
    let h: usize = header_number(&mut reader, origin, "height")?;
    let scale: f32 = header_number(&mut reader, origin, "scale")?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::parse(origin, "scale", "must be a non-zero number"));
    }
    let little = scale < 0.0;
    let offset = reader.position() as usize;
    let need = h * w * channels * 4;
    let payload = &bytes[offset..];
    if payload.len() < need {
        return Err(Error::parse(
            origin,
            "data",
            format!("expected {need} bytes of pixel data, found {}", payload.len()),
        ));
    }
    let mut data = vec![T::zero(); h * w];
    let mut mask = vec![false; h * w];
    let mut px = vec![0f32; channels];
    for (k, chunk) in payload[..need].chunks_exact(4 * channels).enumerate() {
        for (ch, b) in chunk.chunks_exact(4).enumerate() {
            let raw = [b[0], b[1], b[2], b[3]];
            px[ch] = if little {
                f32::from_le_bytes(raw)
            } else {
                f32::from_be_bytes(raw)
            };
        }
        let (file_row, c) = (k / w, k % w);
        let i = (h - 1 - file_row) * w + c;
        if px.iter().all(|v| v.is_finite()) {
            data[i] = T::from_f32(&px);
            mask[i] = true;
        }
    }
    Grid::with_mask(h, w, data, mask)
}

pub fn write_pfm<T: PfmTexel>(grid: &Grid<T>, path: &Path) -> Result<()> {
    write_bytes(path, &encode_pfm(grid))
}

pub fn read_pfm<T: PfmTexel>(path: &Path) -> Result<Grid<T>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pfm(&bytes, path)
}

pub fn read_scalar_pfm(path: &Path) -> Result<ScalarMap> {
    read_pfm(path)
}

pub fn read_vector_pfm(path: &Path) -> Result<VectorMap> {
    read_pfm(path)
}

fn to_byte(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn encode_ppm(img: &ColorImage) -> Vec<u8> {
    let (h, w) = img.dims();
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    out.reserve(h * w * 3);
    for px in img.data() {
        out.extend(px.iter().map(|v| to_byte(*v)));
    }
    out
}

pub fn decode_ppm(bytes: &[u8], origin: &Path) -> Result<ColorImage> {
    let mut reader = std::io::Cursor::new(bytes);
    let magic = read_token(&mut reader).map_err(|e| Error::io(origin, e))?;
    if magic != "P6" {
        return Err(Error::parse(origin, "header", format!("not a binary PPM (magic `{magic}`)")));
    }
    let w: usize = header_number(&mut reader, origin, "width")?;
    let h: usize = header_number(&mut reader, origin, "height")?;
    let maxval: u32 = header_number(&mut reader, origin, "maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::parse(origin, "maxval", format!("only 8-bit PPM is supported, got {maxval}")));
    }
    let offset = reader.position() as usize;
    let payload = &bytes[offset..];
    if payload.len() < h * w * 3 {
        return Err(Error::parse(origin, "data", "truncated pixel data"));
    }
    let scale = maxval as f64;
    let data = payload[..h * w * 3]
        .chunks_exact(3)
        .map(|p| [p[0] as f64 / scale, p[1] as f64 / scale, p[2] as f64 / scale])
        .collect();
    ColorImage::new(h, w, data)
}

pub fn write_ppm(img: &ColorImage, path: &Path) -> Result<()> {
    write_bytes(path, &encode_ppm(img))
}

pub fn read_ppm(path: &Path) -> Result<ColorImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_ppm(&bytes, path)
}

/// Reads a color image from `.ppm` (8-bit) or `.pfm` (3-channel float).
pub fn read_color(path: &Path) -> Result<ColorImage> {
    let is_pfm = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("pfm"));
    if is_pfm {
        let img: ColorImage = read_pfm(path)?;
        img.check_unit_range()
            .map_err(|e| Error::parse(path, "data", e.to_string()))?;
        Ok(img)
    } else {
        read_ppm(path)
    }
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pfm_layout_is_bottom_to_top() {
        let m = ScalarMap::new(2, 1, vec![1.0, 2.0]).unwrap();
        let bytes = encode_pfm(&m);
        let header = b"Pf\n1 2\n-1.0\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(&bytes[header.len()..header.len() + 4], &2f32.to_le_bytes());
    }

    #[test]
    fn pfm_mask_round_trip() {
        let m = ScalarMap::with_mask(2, 2, vec![1.5, 2.0, -3.25, 4.0], vec![true, false, true, true])
            .unwrap();
        let back: ScalarMap = decode_pfm(&encode_pfm(&m), Path::new("m.pfm")).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn pfm_big_endian_read() {
        let mut bytes = b"Pf\n2 1\n1.0\n".to_vec();
        bytes.extend_from_slice(&0.5f32.to_be_bytes());
        bytes.extend_from_slice(&7f32.to_be_bytes());
        let m: ScalarMap = decode_pfm(&bytes, Path::new("be.pfm")).unwrap();
        assert_eq!(m.data(), &[0.5, 7.0]);
    }

    #[test]
    fn pfm_errors_name_field() {
        let err = decode_pfm::<f64>(b"P5\n1 1\n-1\n", Path::new("x.pfm")).unwrap_err();
        assert!(err.to_string().contains("x.pfm"));
        let err = decode_pfm::<f64>(b"Pf\n2 2\n-1.0\n\0\0", Path::new("t.pfm")).unwrap_err();
        assert!(err.to_string().contains("data"));
        let err = decode_pfm::<f64>(b"PF\n1 1\n-1.0\n", Path::new("c.pfm")).unwrap_err();
        assert!(err.to_string().contains("channel"));
    }

    #[test]
    fn vector_pfm_round_trip() {
        let v = VectorMap::new(1, 2, vec![Vector3::new(0.0, 0.6, 0.8), Vector3::new(1.0, 0.0, 0.0)])
            .unwrap();
        let back: VectorMap = decode_pfm(&encode_pfm(&v), Path::new("n.pfm")).unwrap();
        assert!(back
            .data()
            .iter()
            .zip(v.data())
            .all(|(a, b)| (a - b).amax() < 1e-7));
    }

    #[test]
    fn ppm_round_trip_quantized() {
        let img = ColorImage::from_rgb(1, 2, vec![[0.0, 0.5, 1.0], [0.2, 0.4, 0.6]]).unwrap();
        let back = decode_ppm(&encode_ppm(&img), Path::new("a.ppm")).unwrap();
        for (a, b) in back.data().iter().flatten().zip(img.data().iter().flatten()) {
            assert!((a - b).abs() <= 0.5 / 255.0 + 1e-12);
        }
        // Once quantized, a second round trip is exact.
        let again = decode_ppm(&encode_ppm(&back), Path::new("a.ppm")).unwrap();
        assert_eq!(again, back);
    }

    #[test]
    fn ppm_header_comments() {
        let bytes = b"P6\n# made by hand\n1 1\n255\n\x00\x80\xff";
        let img = decode_ppm(bytes, Path::new("c.ppm")).unwrap();
        assert_eq!(img.data()[0], [0.0, 128.0 / 255.0, 1.0]);
    }
}
