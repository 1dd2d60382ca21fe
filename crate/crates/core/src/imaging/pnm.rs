//! Binary Netpbm codecs: P6 (RGB) read/write, P5 (gray) read/write.
//!
//! Readers accept any whitespace between header tokens and `#` comments up
//! to end of line. Writers always emit the canonical `P?\n<w> <h>\n255\n`
//! header. Only maxval 255 is supported.

use super::{BinaryMask, ImageError, Rgb, RgbImage};

struct Header {
    width: usize,
    height: usize,
    /// Offset of the first raster byte.
    data_start: usize,
}

fn parse_header(bytes: &[u8], magic: &'static str) -> Result<Header, ImageError> {
    if bytes.len() < 2 {
        return Err(ImageError::MalformedHeader("missing magic number".into()));
    }
    if &bytes[..2] != magic.as_bytes() {
        return Err(ImageError::UnsupportedMagic(
            String::from_utf8_lossy(&bytes[..2]).into_owned(),
            magic,
        ));
    }

    let mut pos = 2;
    let mut fields = [0u32; 3];
    for (i, field) in fields.iter_mut().enumerate() {
        let name = ["width", "height", "maxval"][i];
        // Skip whitespace and comments; a token must be preceded by at least
        // one separator.
        let start = pos;
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while let Some(&b) = bytes.get(pos) {
                        pos += 1;
                        if b == b'\n' || b == b'\r' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
        if pos == start {
            return Err(ImageError::MalformedHeader(format!(
                "expected whitespace before {name}"
            )));
        }
        let digits_start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if pos == digits_start {
            return Err(ImageError::MalformedHeader(format!("missing {name}")));
        }
        let text = std::str::from_utf8(&bytes[digits_start..pos]).expect("ascii digits");
        *field = text
            .parse()
            .map_err(|_| ImageError::MalformedHeader(format!("{name} out of range: {text}")))?;
    }

    // Exactly one whitespace byte separates maxval from the raster.
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => {
            return Err(ImageError::MalformedHeader(
                "expected single whitespace after maxval".into(),
            ))
        }
    }

    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(ImageError::UnsupportedMaxval(maxval));
    }
    let (width, height) = (width as usize, height as usize);
    if width == 0 || height == 0 {
        return Err(ImageError::InvalidDimensions { width, height });
    }
    Ok(Header {
        width,
        height,
        data_start: pos,
    })
}

fn raster<'a>(bytes: &'a [u8], header: &Header, channels: usize) -> Result<&'a [u8], ImageError> {
    let expected = header
        .width
        .checked_mul(header.height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or(ImageError::InvalidDimensions {
            width: header.width,
            height: header.height,
        })?;
    let data = &bytes[header.data_start..];
    if data.len() < expected {
        return Err(ImageError::Truncated {
            expected,
            found: data.len(),
        });
    }
    // Trailing bytes (e.g. a following image in a multi-image stream) are ignored.
    Ok(&data[..expected])
}

/// Decodes a binary PPM (P6, maxval 255).
pub fn read_ppm(bytes: &[u8]) -> Result<RgbImage, ImageError> {
    let header = parse_header(bytes, "P6")?;
    let data = raster(bytes, &header, 3)?;
    let pixels = data
        .chunks_exact(3)
        .map(|c| Rgb::new(c[0], c[1], c[2]))
        .collect();
    RgbImage::new(header.width, header.height, pixels)
}

/// Encodes an image as canonical binary PPM.
pub fn write_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.reserve(img.pixels().len() * 3);
    for px in img.pixels() {
        out.extend_from_slice(&[px.r, px.g, px.b]);
    }
    out
}

/// Encodes a mask as canonical binary PGM (P5, maxval 255).
pub fn write_mask(mask: &BinaryMask) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", mask.width(), mask.height()).into_bytes();
    out.extend_from_slice(mask.values());
    out
}

/// Decodes a binary PGM into a mask. Values other than 0 and 255 are rejected.
pub fn read_pgm(bytes: &[u8]) -> Result<BinaryMask, ImageError> {
    let header = parse_header(bytes, "P5")?;
    let data = raster(bytes, &header, 1)?;
    BinaryMask::new(header.width, header.height, data.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ppm(header: &str, payload: &[u8]) -> Vec<u8> {
        let mut v = header.as_bytes().to_vec();
        v.extend_from_slice(payload);
        v
    }

    #[test]
    fn minimal_ppm() {
        let img = read_ppm(&ppm("P6\n1 1\n255\n", &[255, 0, 0])).unwrap();
        assert_eq!((img.width(), img.height()), (1, 1));
        assert_eq!(img.get(0, 0), Rgb::new(255, 0, 0));
    }

    #[test]
    fn pixels_are_left_to_right() {
        let img = read_ppm(&ppm("P6\n2 1\n255\n", &[1, 2, 3, 4, 5, 6])).unwrap();
        assert_eq!(img.pixels(), &[Rgb::new(1, 2, 3), Rgb::new(4, 5, 6)]);
    }

    #[test]
    fn wrong_magic_is_rejected() {
        let err = read_ppm(&ppm("P5\n1 1\n255\n", &[9])).unwrap_err();
        assert!(matches!(err, ImageError::UnsupportedMagic(ref m, "P6") if m == "P5"));
    }

    #[test]
    fn maxval_must_be_255() {
        let err = read_ppm(&ppm("P6\n1 1\n65535\n", &[0; 6])).unwrap_err();
        assert_eq!(err, ImageError::UnsupportedMaxval(65535));
    }

    #[test]
    fn truncated_payload() {
        let err = read_ppm(&ppm("P6\n2 2\n255\n", &[0; 11])).unwrap_err();
        assert_eq!(
            err,
            ImageError::Truncated {
                expected: 12,
                found: 11
            }
        );
    }

    #[test]
    fn malformed_headers() {
        for bad in [
            "P6",
            "P6\n1\n",
            "P6\nx 1\n255\n",
            "P61 1\n255\n",
            "P6\n1 1\n255",
            "P6\n99999999999 1\n255\n",
        ] {
            assert!(
                matches!(
                    read_ppm(bad.as_bytes()),
                    Err(ImageError::MalformedHeader(_))
                ),
                "{bad:?}"
            );
        }
    }

    #[test]
    fn zero_width_rejected() {
        assert!(matches!(
            read_ppm(b"P6\n0 1\n255\n"),
            Err(ImageError::InvalidDimensions { .. })
        ));
    }

    #[test]
    fn comments_and_odd_whitespace_in_header() {
        let bytes = ppm(
            "P6 # made by hand\n  2\t# width\n1\r\n255\n",
            &[1, 2, 3, 4, 5, 6],
        );
        let img = read_ppm(&bytes).unwrap();
        assert_eq!((img.width(), img.height()), (2, 1));
        assert_eq!(img.get(1, 0), Rgb::new(4, 5, 6));
    }

    #[test]
    fn raster_may_start_with_whitespace_byte() {
        // The raster byte 0x0a must not be eaten as header whitespace.
        let img = read_ppm(&ppm("P6\n1 1\n255\n", b"\n #")).unwrap();
        assert_eq!(img.get(0, 0), Rgb::new(b'\n', b' ', b'#'));
    }

    #[test]
    fn canonical_black_pixel() {
        let img = RgbImage::filled(1, 1, Rgb::new(0, 0, 0)).unwrap();
        let bytes = write_ppm(&img);
        assert_eq!(&bytes[..11], b"P6\n1 1\n255\n");
        assert_eq!(&bytes[11..], &[0, 0, 0]);
        assert_eq!(bytes.len(), 11 + 3);
    }

    #[test]
    fn payload_length_2x2() {
        let img = RgbImage::filled(2, 2, Rgb::new(1, 2, 3)).unwrap();
        let bytes = write_ppm(&img);
        assert_eq!(bytes.len() - b"P6\n2 2\n255\n".len(), 12);
    }

    #[test]
    fn mask_single_foreground() {
        let mask = BinaryMask::new(1, 1, vec![255]).unwrap();
        assert_eq!(write_mask(&mask), b"P5\n1 1\n255\n\xff".to_vec());
    }

    #[test]
    fn all_zero_mask_payload() {
        let mask = BinaryMask::new(3, 3, vec![0; 9]).unwrap();
        let bytes = write_mask(&mask);
        assert_eq!(&bytes[b"P5\n3 3\n255\n".len()..], &[0u8; 9]);
    }

    #[test]
    fn pgm_with_gray_values_rejected_as_mask() {
        assert!(matches!(
            read_pgm(b"P5\n1 1\n255\n\x80"),
            Err(ImageError::NonBinaryValue { value: 128, .. })
        ));
    }

    fn arb_image() -> impl Strategy<Value = RgbImage> {
        (1usize..24, 1usize..24).prop_flat_map(|(w, h)| {
            proptest::collection::vec(any::<[u8; 3]>(), w * h).prop_map(move |px| {
                RgbImage::new(w, h, px.into_iter().map(Rgb::from).collect()).unwrap()
            })
        })
    }

    fn arb_mask() -> impl Strategy<Value = BinaryMask> {
        (1usize..24, 1usize..24).prop_flat_map(|(w, h)| {
            proptest::collection::vec(any::<bool>(), w * h).prop_map(move |bits| {
                BinaryMask::new(
                    w,
                    h,
                    bits.into_iter().map(|b| if b { 255 } else { 0 }).collect(),
                )
                .unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 100, ..ProptestConfig::default() })]

        #[test]
        fn ppm_round_trip(img in arb_image()) {
            let bytes = write_ppm(&img);
            prop_assert_eq!(read_ppm(&bytes).unwrap(), img);
        }

        #[test]
        fn pgm_round_trip(mask in arb_mask()) {
            prop_assert_eq!(read_pgm(&write_mask(&mask)).unwrap(), mask);
        }
    }
}
