//! Netpbm graymap (P2 ASCII / P5 binary).

use std::path::Path;

use super::{quantize, BitDepth, ImageGrid, RawGray};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PgmEncoding {
    /// P2
    Ascii,
    /// P5
    Binary,
}

struct Header {
    magic: [u8; 2],
    width: usize,
    height: usize,
    maxval: u32,
    data_start: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    if bytes.len() < 2 || bytes[0] != b'P' || !(bytes[1] == b'2' || bytes[1] == b'5') {
        return Err(Error::UnsupportedFormat("not a P2/P5 PGM".into()));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // Skip whitespace and comments.
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::UnsupportedFormat("truncated PGM header".into()));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::UnsupportedFormat("bad PGM header field".into()))?;
    }
    // Exactly one whitespace byte separates the header from binary data.
    if pos >= bytes.len() && bytes[1] == b'5' {
        return Err(Error::UnsupportedFormat("PGM has no pixel data".into()));
    }
    let data_start = (pos + 1).min(bytes.len());
    let maxval = fields[2];
    if maxval == 0 || maxval > 65535 {
        return Err(Error::UnsupportedFormat(format!("PGM maxval {maxval} out of range")));
    }
    Ok(Header {
        magic: [bytes[0], bytes[1]],
        width: fields[0],
        height: fields[1],
        maxval: maxval as u32,
        data_start,
    })
}

pub(crate) fn decode_pgm(bytes: &[u8]) -> Result<RawGray> {
    let header = parse_header(bytes)?;
    let count = header.width * header.height;
    let data = &bytes[header.data_start..];
    let samples: Vec<u32> = if header.magic[1] == b'5' {
        let wide = header.maxval > 255;
        let need = if wide { 2 * count } else { count };
        if data.len() < need {
            return Err(Error::UnsupportedFormat("truncated PGM pixel data".into()));
        }
        if wide {
            data[..need]
                .chunks_exact(2)
                .map(|b| u32::from(u16::from_be_bytes([b[0], b[1]])))
                .collect()
        } else {
            data[..need].iter().map(|&b| u32::from(b)).collect()
        }
    } else {
        let text = std::str::from_utf8(data).map_err(|_| Error::UnsupportedFormat("P2 data is not ASCII".into()))?;
        let samples: Vec<u32> = text
            .split_ascii_whitespace()
            .take(count)
            .map(|t| t.parse::<u32>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::UnsupportedFormat("bad P2 sample".into()))?;
        if samples.len() < count {
            return Err(Error::UnsupportedFormat("truncated PGM pixel data".into()));
        }
        samples
    };
    if samples.iter().any(|&s| s > header.maxval) {
        return Err(Error::UnsupportedFormat("PGM sample exceeds maxval".into()));
    }
    Ok(RawGray {
        width: header.width,
        height: header.height,
        maxval: header.maxval,
        samples,
    })
}

pub(crate) fn encode_pgm<T: Scalar>(img: &ImageGrid<T>, depth: BitDepth, encoding: PgmEncoding) -> Vec<u8> {
    let maxval = depth.maxval();
    let samples = quantize(img, maxval);
    let side = img.side();
    let magic = match encoding {
        PgmEncoding::Ascii => "P2",
        PgmEncoding::Binary => "P5",
    };
    let mut out = format!("{magic}\n{side} {side}\n{maxval}\n").into_bytes();
    match encoding {
        PgmEncoding::Binary => {
            for s in samples {
                if maxval > 255 {
                    out.extend_from_slice(&(s as u16).to_be_bytes());
                } else {
                    out.push(s as u8);
                }
            }
        }
        PgmEncoding::Ascii => {
            for row in samples.chunks(side) {
                let line: Vec<String> = row.iter().map(|s| s.to_string()).collect();
                out.extend_from_slice(line.join(" ").as_bytes());
                out.push(b'\n');
            }
        }
    }
    out
}

pub fn read_pgm<T: Scalar>(path: impl AsRef<Path>) -> Result<ImageGrid<T>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&bytes)?.into_grid()
}

pub fn write_pgm<T: Scalar>(
    img: &ImageGrid<T>,
    path: impl AsRef<Path>,
    depth: BitDepth,
    encoding: PgmEncoding,
) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_pgm(img, depth, encoding)).map_err(|e| Error::io(path, e))
}
