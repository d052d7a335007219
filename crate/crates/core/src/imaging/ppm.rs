//! Binary PPM ("P6", maxval 255) reading and writing.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{ImagingError, Raster, RgbImage};

pub fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.reserve(img.pixels().len() * 3);
    for px in img.pixels() {
        out.extend_from_slice(px);
    }
    out
}

/// Writes a single-channel image with the value replicated across RGB.
pub fn encode_gray_ppm(img: &Raster<u8>) -> Vec<u8> {
    encode_ppm(&img.map(|v| [v, v, v]))
}

pub fn write_ppm(path: impl AsRef<Path>, img: &RgbImage) -> Result<(), ImagingError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&encode_ppm(img))?;
    w.flush()?;
    Ok(())
}

pub fn write_gray_ppm(path: impl AsRef<Path>, img: &Raster<u8>) -> Result<(), ImagingError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&encode_gray_ppm(img))?;
    w.flush()?;
    Ok(())
}

pub fn read_ppm(path: impl AsRef<Path>) -> Result<RgbImage, ImagingError> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    decode_ppm(&bytes)
}

pub fn decode_ppm(bytes: &[u8]) -> Result<RgbImage, ImagingError> {
    let bad = |msg: &str| ImagingError::Ppm(msg.to_string());
    let mut pos = 0usize;
    let next_token = |pos: &mut usize| -> Option<String> {
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
                continue;
            }
            break;
        }
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        (start < *pos).then(|| String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    };

    if next_token(&mut pos).as_deref() != Some("P6") {
        return Err(bad("missing P6 magic"));
    }
    let number = |pos: &mut usize, what: &str| -> Result<usize, ImagingError> {
        next_token(pos)
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad(what))
    };
    let width = number(&mut pos, "bad width")?;
    let height = number(&mut pos, "bad height")?;
    let maxval = number(&mut pos, "bad maxval")?;
    if maxval != 255 {
        return Err(bad("only maxval 255 is supported"));
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    let need = width * height * 3;
    if bytes.len() < pos + need {
        return Err(bad("truncated raster"));
    }
    let data = bytes[pos..pos + need]
        .chunks_exact(3)
        .map(|c| [c[0], c[1], c[2]])
        .collect();
    Ok(Raster::from_vec(width, height, data))
}
