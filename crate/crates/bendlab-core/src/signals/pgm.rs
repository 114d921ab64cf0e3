//! Minimal 8-bit PGM (netpbm grayscale) codec.
//!
//! Supports the ASCII (`P2`) and binary (`P5`) flavors with maxval up to
//! 255, which is all the raster pipeline needs. Header comments (`#` to
//! end of line) are accepted anywhere whitespace is.

use super::SignalError;

/// Which PGM flavor to write.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmFormat {
    /// `P2`: human-readable decimal samples.
    Ascii,
    /// `P5`: one raw byte per sample.
    Binary,
}

/// A decoded grayscale image.
pub struct PgmImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub samples: Vec<u8>,
}

/// Reads the next header token, skipping whitespace and `#` comments.
/// Returns the token and the position just past it.
fn next_token(bytes: &[u8], mut pos: usize) -> Result<(String, usize), SignalError> {
    loop {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        break;
    }
    let start = pos;
    while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'#' {
        pos += 1;
    }
    if start == pos {
        return Err(SignalError::MalformedHeader(
            "unexpected end of file in header".into(),
        ));
    }
    let token = std::str::from_utf8(&bytes[start..pos])
        .map_err(|_| SignalError::MalformedHeader("non-ASCII bytes in header".into()))?
        .to_string();
    Ok((token, pos))
}

fn parse_number(token: &str, what: &str) -> Result<usize, SignalError> {
    token
        .parse::<usize>()
        .map_err(|_| SignalError::MalformedHeader(format!("invalid {what}: {token:?}")))
}

/// Decodes a P2 or P5 image from raw file bytes.
pub fn decode(bytes: &[u8]) -> Result<PgmImage, SignalError> {
    let (magic, mut pos) = next_token(bytes, 0)?;
    match magic.as_str() {
        "P2" | "P5" => {}
        "P1" | "P3" | "P4" | "P6" => {
            return Err(SignalError::UnsupportedFormat(format!(
                "netpbm magic {magic} (only grayscale P2/P5 are supported)"
            )));
        }
        other => {
            return Err(SignalError::MalformedHeader(format!(
                "not a PGM file (magic {other:?})"
            )));
        }
    }
    let (tok, p) = next_token(bytes, pos)?;
    let width = parse_number(&tok, "width")?;
    let (tok, p) = next_token(bytes, p)?;
    let height = parse_number(&tok, "height")?;
    let (tok, p) = next_token(bytes, p)?;
    let maxval = parse_number(&tok, "maxval")?;
    pos = p;
    if width == 0 || height == 0 {
        return Err(SignalError::MalformedHeader(format!(
            "zero image dimension {width}x{height}"
        )));
    }
    if maxval == 0 || maxval > 255 {
        return Err(SignalError::UnsupportedFormat(format!(
            "maxval {maxval} (only 8-bit images with maxval 1..=255 are supported)"
        )));
    }
    let count = width * height;
    let samples = if magic == "P5" {
        // Exactly one whitespace byte separates the header from raw data.
        if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
            return Err(SignalError::MalformedHeader(
                "missing separator before binary samples".into(),
            ));
        }
        pos += 1;
        let data = &bytes[pos..];
        if data.len() < count {
            return Err(SignalError::MalformedHeader(format!(
                "expected {count} binary samples, found {}",
                data.len()
            )));
        }
        data[..count].to_vec()
    } else {
        let mut samples = Vec::with_capacity(count);
        let mut p = pos;
        for _ in 0..count {
            let (tok, np) = next_token(bytes, p).map_err(|_| {
                SignalError::MalformedHeader(format!(
                    "expected {count} ASCII samples, found {}",
                    samples.len()
                ))
            })?;
            let v = parse_number(&tok, "sample")?;
            if v > maxval {
                return Err(SignalError::MalformedHeader(format!(
                    "sample {v} exceeds maxval {maxval}"
                )));
            }
            samples.push(v as u8);
            p = np;
        }
        samples
    };
    Ok(PgmImage {
        width,
        height,
        maxval: maxval as u16,
        samples,
    })
}

/// Encodes 8-bit samples (row-major, top row first) as a PGM file.
pub fn encode(width: usize, height: usize, samples: &[u8], format: PgmFormat) -> Vec<u8> {
    assert_eq!(samples.len(), width * height, "sample count mismatch");
    match format {
        PgmFormat::Binary => {
            let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
            out.extend_from_slice(samples);
            out
        }
        PgmFormat::Ascii => {
            let mut out = format!("P2\n{width} {height}\n255\n");
            for row in samples.chunks(width) {
                let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
            out.into_bytes()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decodes_ascii_with_comments() {
        let file = b"P2 # magic\n# a comment line\n3 1\n255\n0 128 255\n";
        let img = decode(file).unwrap();
        assert_eq!((img.width, img.height, img.maxval), (3, 1, 255));
        assert_eq!(img.samples, vec![0, 128, 255]);
    }

    #[test]
    fn binary_round_trip() {
        let samples: Vec<u8> = (0..12).map(|i| (i * 20) as u8).collect();
        let bytes = encode(4, 3, &samples, PgmFormat::Binary);
        let img = decode(&bytes).unwrap();
        assert_eq!(img.samples, samples);
        assert_eq!((img.width, img.height), (4, 3));
    }

    #[test]
    fn ascii_round_trip() {
        let samples: Vec<u8> = vec![255, 0, 7, 200];
        let bytes = encode(2, 2, &samples, PgmFormat::Ascii);
        let img = decode(&bytes).unwrap();
        assert_eq!(img.samples, samples);
    }

    #[test]
    fn truncated_binary_data_is_malformed() {
        let mut bytes = encode(4, 4, &[9u8; 16], PgmFormat::Binary);
        bytes.truncate(bytes.len() - 5);
        assert!(matches!(
            decode(&bytes),
            Err(SignalError::MalformedHeader(_))
        ));
    }

    #[test]
    fn sample_above_maxval_is_malformed() {
        assert!(matches!(
            decode(b"P2\n1 1\n100\n101\n"),
            Err(SignalError::MalformedHeader(_))
        ));
    }

    #[test]
    fn color_and_deep_images_are_unsupported() {
        assert!(matches!(
            decode(b"P6\n1 1\n255\nabc"),
            Err(SignalError::UnsupportedFormat(_))
        ));
        assert!(matches!(
            decode(b"P5\n1 1\n65535\n\x00\x00"),
            Err(SignalError::UnsupportedFormat(_))
        ));
    }
}
