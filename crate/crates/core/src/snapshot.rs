//! Bit-exact binary snapshots of an `(eta, f)` state.
//!
//! ```text
//! B2P1SNAP 1
//! nx=<usize>
//! ny=<usize>
//! Lx=<f64>
//! Ly=<f64>
//! t=<f64>
//! fields=eta,f
//! checksum=<crc32 of payload, lowercase hex>
//!
//! <payload: little-endian f64, eta then f, x index fastest>
//! ```

use thiserror::Error;

use crate::grid::{Field2D, Grid2D};

pub const MAGIC: &str = "B2P1SNAP 1";

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("bad magic line: expected `{MAGIC}`")]
    BadMagic,
    #[error("malformed header: {0}")]
    BadHeader(String),
    #[error("payload truncated: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("payload checksum mismatch: header {expected:08x}, computed {found:08x}")]
    ChecksumMismatch { expected: u32, found: u32 },
}

impl SnapshotError {
    pub fn code(&self) -> &'static str {
        match self {
            SnapshotError::BadMagic => "snapshot-bad-magic",
            SnapshotError::BadHeader(_) => "snapshot-bad-header",
            SnapshotError::TruncatedPayload { .. } => "snapshot-truncated",
            SnapshotError::ChecksumMismatch { .. } => "snapshot-checksum",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub eta: Field2D,
    pub f: Field2D,
}

pub fn write_snapshot(t: f64, eta: &Field2D, f: &Field2D) -> Vec<u8> {
    assert_eq!(eta.grid(), f.grid(), "eta and f must share a grid");
    let g = eta.grid();
    let mut payload = Vec::with_capacity(16 * g.len());
    for v in eta.values().iter().chain(f.values()) {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    let crc = crc32fast::hash(&payload);
    // `{:?}` on f64 prints the shortest string that round-trips.
    let header = format!(
        "{MAGIC}\nnx={}\nny={}\nLx={:?}\nLy={:?}\nt={:?}\nfields=eta,f\nchecksum={crc:08x}\n\n",
        g.nx(),
        g.ny(),
        g.lx(),
        g.ly(),
        t
    );
    let mut out = header.into_bytes();
    out.extend_from_slice(&payload);
    out
}

fn take_line<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a str, SnapshotError> {
    let rest = &bytes[*pos..];
    let end = rest
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| SnapshotError::BadHeader("unterminated header".into()))?;
    *pos += end + 1;
    std::str::from_utf8(&rest[..end])
        .map_err(|_| SnapshotError::BadHeader("non-UTF-8 header".into()))
}

fn field<'a>(line: &'a str, key: &str) -> Result<&'a str, SnapshotError> {
    line.strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| SnapshotError::BadHeader(format!("expected `{key}=`, found `{line}`")))
}

fn parse<T: std::str::FromStr>(line: &str, key: &str) -> Result<T, SnapshotError> {
    let v = field(line, key)?;
    v.parse()
        .map_err(|_| SnapshotError::BadHeader(format!("bad value for {key}: `{v}`")))
}

pub fn read_snapshot(bytes: &[u8]) -> Result<Snapshot, SnapshotError> {
    if !bytes.starts_with(MAGIC.as_bytes()) || bytes.get(MAGIC.len()) != Some(&b'\n') {
        return Err(SnapshotError::BadMagic);
    }
    let mut pos = MAGIC.len() + 1;
    let nx: usize = parse(take_line(bytes, &mut pos)?, "nx")?;
    let ny: usize = parse(take_line(bytes, &mut pos)?, "ny")?;
    let lx: f64 = parse(take_line(bytes, &mut pos)?, "Lx")?;
    let ly: f64 = parse(take_line(bytes, &mut pos)?, "Ly")?;
    let t: f64 = parse(take_line(bytes, &mut pos)?, "t")?;
    let fields = field(take_line(bytes, &mut pos)?, "fields")?;
    if fields != "eta,f" {
        return Err(SnapshotError::BadHeader(format!(
            "unsupported fields `{fields}`"
        )));
    }
    let ck = field(take_line(bytes, &mut pos)?, "checksum")?;
    let expected = u32::from_str_radix(ck, 16)
        .map_err(|_| SnapshotError::BadHeader(format!("bad checksum `{ck}`")))?;
    if !take_line(bytes, &mut pos)?.is_empty() {
        return Err(SnapshotError::BadHeader(
            "missing blank line after header".into(),
        ));
    }
    let grid = Grid2D::new(nx, ny, lx, ly).map_err(|e| SnapshotError::BadHeader(e.to_string()))?;
    let n = grid.len();
    let payload = &bytes[pos..];
    if payload.len() < 16 * n {
        return Err(SnapshotError::TruncatedPayload {
            expected: 16 * n,
            found: payload.len(),
        });
    }
    if payload.len() > 16 * n {
        return Err(SnapshotError::BadHeader(format!(
            "{} trailing bytes after payload",
            payload.len() - 16 * n
        )));
    }
    let found = crc32fast::hash(payload);
    if found != expected {
        return Err(SnapshotError::ChecksumMismatch { expected, found });
    }
    let vals: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let (e, f) = vals.split_at(n);
    Ok(Snapshot {
        t,
        eta: Field2D::from_values(grid, e.to_vec()).expect("sized"),
        f: Field2D::from_values(grid, f.to_vec()).expect("sized"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (f64, Field2D, Field2D) {
        let g = Grid2D::new(16, 18, 0.1 + 0.2, 7.0).unwrap();
        let eta = Field2D::from_fn(g, |x, y| (x * 3.1).sin() * y.cos() / 3.0);
        let f = Field2D::from_fn(g, |x, y| x.exp() - y * 1e-300);
        (1.0 / 3.0, eta, f)
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let (t, eta, f) = sample();
        let bytes = write_snapshot(t, &eta, &f);
        let s = read_snapshot(&bytes).unwrap();
        assert_eq!(s.t.to_bits(), t.to_bits());
        assert_eq!(s.eta.grid().lx().to_bits(), eta.grid().lx().to_bits());
        for (a, b) in s
            .eta
            .values()
            .iter()
            .zip(eta.values())
            .chain(s.f.values().iter().zip(f.values()))
        {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(write_snapshot(s.t, &s.eta, &s.f), bytes);
    }

    #[test]
    fn corrupted_magic() {
        let (t, eta, f) = sample();
        let mut bytes = write_snapshot(t, &eta, &f);
        bytes[0] = b'X';
        assert!(matches!(
            read_snapshot(&bytes),
            Err(SnapshotError::BadMagic)
        ));
    }

    #[test]
    fn truncated_payload() {
        let (t, eta, f) = sample();
        let mut bytes = write_snapshot(t, &eta, &f);
        bytes.truncate(bytes.len() - 8);
        assert!(matches!(
            read_snapshot(&bytes),
            Err(SnapshotError::TruncatedPayload { .. })
        ));
    }

    #[test]
    fn flipped_payload_bit() {
        let (t, eta, f) = sample();
        let mut bytes = write_snapshot(t, &eta, &f);
        let n = bytes.len();
        bytes[n - 3] ^= 0x10;
        assert!(matches!(
            read_snapshot(&bytes),
            Err(SnapshotError::ChecksumMismatch { .. })
        ));
    }
}
