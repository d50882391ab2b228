//! Binary PGM (`P5`) reading and writing, 8-bit only.

use crate::error::{Error, Result};
use crate::grid::{Grid, Image2D};
use crate::image::INTENSITY_MAX;

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderReader<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn number(&mut self, field: &'static str) -> Result<usize> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(match self.bytes.get(self.pos) {
                None => Error::decode(field, "unexpected end of header"),
                Some(&b) => Error::decode(
                    field,
                    format!("expected a decimal number, found byte 0x{b:02x}"),
                ),
            });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| Error::decode(field, "number out of range"))
    }
}

/// Decodes a binary PGM. Pixel values are normalized by the file's maxval,
/// which must not exceed 255.
pub fn load_pgm(bytes: &[u8]) -> Result<Image2D> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        let found = String::from_utf8_lossy(&bytes[..bytes.len().min(2)]).into_owned();
        return Err(Error::decode(
            "magic",
            format!("expected \"P5\", found {found:?}"),
        ));
    }
    let mut r = HeaderReader { bytes, pos: 2 };
    if !r
        .bytes
        .get(2)
        .is_some_and(|b| b.is_ascii_whitespace() || *b == b'#')
    {
        return Err(Error::decode("magic", "expected whitespace after \"P5\""));
    }
    let width = r.number("width")?;
    let height = r.number("height")?;
    let maxval = r.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::decode(
            if width == 0 { "width" } else { "height" },
            "must be positive",
        ));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::decode(
            "maxval",
            format!("only 8-bit images are supported (1..=255), got {maxval}"),
        ));
    }
    match r.bytes.get(r.pos) {
        Some(b) if b.is_ascii_whitespace() => r.pos += 1,
        _ => {
            return Err(Error::decode(
                "maxval",
                "missing whitespace before pixel data",
            ))
        }
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| Error::decode("width", "image size overflow"))?;
    let payload = &bytes[r.pos..];
    if payload.len() < n {
        return Err(Error::decode(
            "pixel data",
            format!("truncated: expected {n} bytes, found {}", payload.len()),
        ));
    }
    let scale = maxval as f64;
    let mut data = Vec::with_capacity(n);
    for (i, &b) in payload[..n].iter().enumerate() {
        if b as usize > maxval {
            return Err(Error::decode(
                "pixel data",
                format!("value {b} at index {i} exceeds maxval {maxval}"),
            ));
        }
        data.push(b as f64 / scale);
    }
    Ok(Grid::from_raw(width, height, data))
}

/// Quantizes a normalized intensity to a byte: clamp to `[0, 1]`, scale by
/// 255, round half away from zero.
#[inline]
pub fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * INTENSITY_MAX).round() as u8
}

/// Encodes an image as binary PGM with maxval 255.
pub fn save_pgm(img: &Image2D) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.len());
    out.extend_from_slice(header.as_bytes());
    out.extend(img.data().iter().map(|&v| quantize(v)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pgm(header: &str, payload: &[u8]) -> Vec<u8> {
        let mut v = header.as_bytes().to_vec();
        v.extend_from_slice(payload);
        v
    }

    #[test]
    fn decodes_simple_image() {
        let img = load_pgm(&pgm("P5\n2 2\n255\n", &[0, 255, 0, 255])).unwrap();
        assert_eq!((img.width(), img.height()), (2, 2));
        assert_eq!(img.data(), &[0.0, 1.0, 0.0, 1.0]);
        let one = load_pgm(&pgm("P5 1 1 255\n", &[128])).unwrap();
        assert_eq!(one.data(), &[128.0 / 255.0]);
    }

    #[test]
    fn header_comments_are_skipped() {
        let img = load_pgm(&pgm(
            "P5\n# made by hand\n3 # w\n1\n# max\n255\n",
            &[1, 2, 3],
        ))
        .unwrap();
        assert_eq!(img.width(), 3);
        assert_eq!(img.get(2, 0), 3.0 / 255.0);
    }

    #[test]
    fn payload_may_start_with_whitespace_byte() {
        // byte 10 is '\n'; only one whitespace byte separates header and data
        let img = load_pgm(&pgm("P5\n2 1\n255\n", &[10, 32])).unwrap();
        assert_eq!(img.data(), &[10.0 / 255.0, 32.0 / 255.0]);
    }

    #[test]
    fn errors_name_the_field() {
        let field = |bytes: &[u8]| match load_pgm(bytes) {
            Err(Error::Decode { field, .. }) => field,
            other => panic!("expected decode error, got {other:?}"),
        };
        assert_eq!(field(&pgm("P6\n1 1\n255\n", &[0, 0, 0])), "magic");
        assert_eq!(field(b""), "magic");
        assert_eq!(field(&pgm("P5\nx 1\n255\n", &[0])), "width");
        assert_eq!(field(&pgm("P5\n1\n", &[])), "height");
        assert_eq!(field(&pgm("P5\n1 1\n65535\n", &[0, 0])), "maxval");
        assert_eq!(field(&pgm("P5\n2 2\n255\n", &[0, 0, 0])), "pixel data");
        assert_eq!(field(&pgm("P5\n1 1\n15\n", &[16])), "pixel data");
    }

    #[test]
    fn lower_maxval_normalizes_to_unit_range() {
        let img = load_pgm(&pgm("P5\n2 1\n15\n", &[0, 15])).unwrap();
        assert_eq!(img.data(), &[0.0, 1.0]);
    }

    #[test]
    fn encoding_rules() {
        let zeros = save_pgm(&Grid::zeros(3, 3));
        assert_eq!(&zeros[..], &pgm("P5\n3 3\n255\n", &[0; 9])[..]);
        let img = Grid::new(4, 1, vec![1.0, 1.7, -0.2, 0.5]).unwrap();
        let bytes = save_pgm(&img);
        assert_eq!(&bytes[bytes.len() - 4..], &[255, 255, 0, 128]);
    }
}
