//! Binary packet-capture format.
//!
//! Little-endian throughout:
//!
//! ```text
//! magic  "ISAC"                 4 bytes
//! version u16 (= 1)
//! M u32, N u32, T u32
//! subcarrier_spacing f64, carrier_frequency f64, packet_period f64
//! T packets of M*N (re f32, im f32), subcarrier-major
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scene::RadioConfig;
use crate::sim::PacketMatrix;

pub const MAGIC: [u8; 4] = *b"ISAC";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 4 + 2 + 3 * 4 + 3 * 8;

#[derive(Debug, Clone, PartialEq)]
pub struct CaptureHeader {
    pub version: u16,
    pub num_subcarriers: u32,
    pub num_antennas: u32,
    pub num_packets: u32,
    pub subcarrier_spacing: f64,
    pub carrier_frequency: f64,
    pub packet_period: f64,
}

impl CaptureHeader {
    pub fn for_radio(radio: &RadioConfig, num_packets: usize) -> Self {
        Self {
            version: VERSION,
            num_subcarriers: radio.num_subcarriers as u32,
            num_antennas: radio.num_antennas() as u32,
            num_packets: num_packets as u32,
            subcarrier_spacing: radio.subcarrier_spacing,
            carrier_frequency: radio.carrier_frequency,
            packet_period: radio.packet_period,
        }
    }

    fn packet_bytes(&self) -> usize {
        self.num_subcarriers as usize * self.num_antennas as usize * 8
    }

    fn encode(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        let mut at = 0;
        let mut put = |bytes: &[u8]| {
            out[at..at + bytes.len()].copy_from_slice(bytes);
            at += bytes.len();
        };
        put(&MAGIC);
        put(&self.version.to_le_bytes());
        put(&self.num_subcarriers.to_le_bytes());
        put(&self.num_antennas.to_le_bytes());
        put(&self.num_packets.to_le_bytes());
        put(&self.subcarrier_spacing.to_le_bytes());
        put(&self.carrier_frequency.to_le_bytes());
        put(&self.packet_period.to_le_bytes());
        out
    }

    fn decode(bytes: &[u8; HEADER_LEN]) -> Result<Self> {
        let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
        if magic != MAGIC {
            return Err(Error::NotACapture(magic));
        }
        let u16_at = |i: usize| u16::from_le_bytes(bytes[i..i + 2].try_into().unwrap());
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        let f64_at = |i: usize| f64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());
        let version = u16_at(4);
        if version != VERSION {
            return Err(Error::Unsupported(version));
        }
        let header = Self {
            version,
            num_subcarriers: u32_at(6),
            num_antennas: u32_at(10),
            num_packets: u32_at(14),
            subcarrier_spacing: f64_at(18),
            carrier_frequency: f64_at(26),
            packet_period: f64_at(34),
        };
        if header.num_subcarriers == 0 || header.num_antennas == 0 || header.num_packets == 0 {
            return Err(Error::Corrupt {
                reason: "zero dimension in header".into(),
                packet: None,
            });
        }
        Ok(header)
    }
}

/// Header plus packets, as read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct CaptureFile {
    pub header: CaptureHeader,
    pub packets: Vec<PacketMatrix>,
}

/// Samples are stored as `f32`; values are rounded on the way out.
pub fn encode_capture<W: Write>(mut out: W, header: &CaptureHeader, packets: &[PacketMatrix]) -> std::io::Result<()> {
    let shape = (header.num_subcarriers as usize, header.num_antennas as usize);
    if packets.len() != header.num_packets as usize || packets.iter().any(|p| p.dim() != shape) {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidInput,
            "header does not match packet shapes",
        ));
    }
    out.write_all(&header.encode())?;
    let mut buf = Vec::with_capacity(header.packet_bytes());
    for p in packets {
        buf.clear();
        for z in p.samples.iter() {
            buf.extend_from_slice(&(z.re as f32).to_le_bytes());
            buf.extend_from_slice(&(z.im as f32).to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    out.flush()
}

pub fn decode_capture<R: Read>(mut input: R) -> Result<CaptureFile> {
    let mut head = [0u8; HEADER_LEN];
    read_full(&mut input, &mut head).and_then(|n| {
        if n >= 4 && head[0..4] != MAGIC {
            return Err(Error::NotACapture(head[0..4].try_into().unwrap()));
        }
        if n < HEADER_LEN {
            return Err(Error::Corrupt {
                reason: format!("header truncated at {n} of {HEADER_LEN} bytes"),
                packet: None,
            });
        }
        Ok(())
    })?;
    let header = CaptureHeader::decode(&head)?;
    let (m, n) = (header.num_subcarriers as usize, header.num_antennas as usize);
    let mut buf = vec![0u8; header.packet_bytes()];
    let mut packets = Vec::with_capacity(header.num_packets as usize);
    for t in 0..header.num_packets {
        let got = read_full(&mut input, &mut buf)?;
        if got < buf.len() {
            return Err(Error::Corrupt {
                reason: format!("packet {t} truncated at {got} of {} bytes", buf.len()),
                packet: Some(t),
            });
        }
        let f = |i: usize| f32::from_le_bytes(buf[i..i + 4].try_into().unwrap()) as f64;
        let samples = Array2::from_shape_fn((m, n), |(mm, nn)| {
            let at = (mm * n + nn) * 8;
            Complex64::new(f(at), f(at + 4))
        });
        packets.push(PacketMatrix {
            index: t as usize,
            samples,
        });
    }
    let mut extra = [0u8; 1];
    if read_full(&mut input, &mut extra)? != 0 {
        return Err(Error::Corrupt {
            reason: "trailing bytes after the last packet".into(),
            packet: None,
        });
    }
    Ok(CaptureFile { header, packets })
}

fn read_full<R: Read>(input: &mut R, buf: &mut [u8]) -> Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match input.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(k) => filled += k,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(Error::io("<capture>", e)),
        }
    }
    Ok(filled)
}

pub fn write_capture(path: &Path, header: &CaptureHeader, packets: &[PacketMatrix]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    encode_capture(BufWriter::new(file), header, packets).map_err(|e| Error::io(path, e))
}

pub fn read_capture(path: &Path) -> Result<CaptureFile> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    decode_capture(BufReader::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_capture(seed: u64, m: usize, n: usize, t: usize) -> (CaptureHeader, Vec<PacketMatrix>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let packets = (0..t)
            .map(|index| PacketMatrix {
                index,
                samples: Array2::from_shape_fn((m, n), |_| {
                    // Values representable in f32 survive the round trip exactly.
                    let re: f32 = rng.random::<f32>() - 0.5;
                    let im: f32 = rng.random::<f32>() * 1e3;
                    Complex64::new(re as f64, im as f64)
                }),
            })
            .collect();
        let header = CaptureHeader {
            version: VERSION,
            num_subcarriers: m as u32,
            num_antennas: n as u32,
            num_packets: t as u32,
            subcarrier_spacing: 30e3,
            carrier_frequency: 4.85e9,
            packet_period: 0.005,
        };
        (header, packets)
    }

    fn encoded(header: &CaptureHeader, packets: &[PacketMatrix]) -> Vec<u8> {
        let mut out = Vec::new();
        encode_capture(&mut out, header, packets).unwrap();
        out
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let (header, packets) = random_capture(1, 8, 4, 3);
        let bytes = encoded(&header, &packets);
        assert_eq!(bytes.len(), HEADER_LEN + 3 * 8 * 4 * 8);
        let back = decode_capture(bytes.as_slice()).unwrap();
        assert_eq!(back.header, header);
        assert_eq!(back.packets, packets);
    }

    #[test]
    fn header_layout_is_little_endian() {
        let (header, packets) = random_capture(2, 2, 1, 1);
        let bytes = encoded(&header, &packets);
        assert_eq!(&bytes[0..4], b"ISAC");
        assert_eq!(&bytes[4..6], &[1, 0]);
        assert_eq!(&bytes[6..10], &[2, 0, 0, 0]);
        assert_eq!(&bytes[18..26], &30e3f64.to_le_bytes());
    }

    #[test]
    fn junk_magic_is_not_a_capture() {
        let (header, packets) = random_capture(3, 2, 2, 1);
        let mut bytes = encoded(&header, &packets);
        bytes[0..4].copy_from_slice(b"JUNK");
        assert!(matches!(
            decode_capture(bytes.as_slice()),
            Err(Error::NotACapture(m)) if &m == b"JUNK"
        ));
    }

    #[test]
    fn truncation_reports_packet() {
        let (header, packets) = random_capture(4, 8, 4, 3);
        let bytes = encoded(&header, &packets);
        let cut = HEADER_LEN + 8 * 4 * 8 + 100;
        match decode_capture(&bytes[..cut]) {
            Err(Error::Corrupt { packet, .. }) => assert_eq!(packet, Some(1)),
            other => panic!("expected Corrupt, got {other:?}"),
        }
        assert!(matches!(
            decode_capture(&bytes[..20]),
            Err(Error::Corrupt { packet: None, .. })
        ));
        let mut longer = bytes.clone();
        longer.push(0);
        assert!(matches!(decode_capture(longer.as_slice()), Err(Error::Corrupt { .. })));
    }

    #[test]
    fn other_versions_are_unsupported() {
        let (header, packets) = random_capture(5, 2, 2, 1);
        let mut bytes = encoded(&header, &packets);
        bytes[4] = 2;
        assert!(matches!(decode_capture(bytes.as_slice()), Err(Error::Unsupported(2))));
    }

    #[test]
    fn inconsistent_header_is_refused() {
        let (mut header, packets) = random_capture(6, 2, 2, 2);
        header.num_packets = 3;
        assert!(encode_capture(Vec::new(), &header, &packets).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.isac");
        let (header, packets) = random_capture(7, 6, 2, 4);
        write_capture(&path, &header, &packets).unwrap();
        assert_eq!(read_capture(&path).unwrap().packets, packets);
        assert!(matches!(
            read_capture(&dir.path().join("missing")),
            Err(Error::Io { .. })
        ));
    }

    proptest! {
        #[test]
        fn decode_then_encode_preserves_bytes(
            m in 1usize..6, n in 1usize..4, t in 1usize..4,
            raw in proptest::collection::vec(any::<u32>(), 6 * 4 * 4 * 2),
        ) {
            let header = CaptureHeader {
                version: VERSION,
                num_subcarriers: m as u32,
                num_antennas: n as u32,
                num_packets: t as u32,
                subcarrier_spacing: 15e3,
                carrier_frequency: 3.5e9,
                packet_period: 0.01,
            };
            let mut bytes = header.encode().to_vec();
            // finite f32 payloads only; NaN bit patterns need not survive f64
            for w in raw.iter().take(m * n * t * 2) {
                let v = f32::from_bits(*w);
                let v = if v.is_finite() { v } else { 1.5 };
                bytes.extend_from_slice(&v.to_le_bytes());
            }
            let cap = decode_capture(bytes.as_slice()).unwrap();
            prop_assert_eq!(encoded(&cap.header, &cap.packets), bytes);
        }
    }
}
