//! Deterministic LZW codec.
//!
//! The compressed size produced here serves as the computable upper bound on
//! the description length of an artifact, so the codec is fully pinned: LZW
//! with an initial dictionary of all 256 single-byte strings, variable code
//! width starting at 9 bits and growing as the dictionary grows, dictionary
//! frozen (never reset) at 2^16 entries, MSB-first bit packing. No entropy
//! coder, no heuristics, no platform-dependent behavior — identical input
//! bytes yield identical blobs everywhere.
//!
//! A decompressor is included so the size estimate stays honest: every blob
//! can be expanded back to the exact original bytes.

use std::collections::HashMap;

use thiserror::Error;

/// Number of single-byte entries the dictionary starts with.
const INITIAL_DICT_SIZE: u32 = 256;
/// Dictionary growth stops here; codes never exceed 16 bits.
const MAX_DICT_SIZE: u32 = 1 << 16;
const MIN_CODE_WIDTH: u32 = 9;
const MAX_CODE_WIDTH: u32 = 16;

/// Bits counted for the notional self-delimiting header (version + original
/// length). This constant is part of the size metric, independent of the
/// debug wire encoding below.
pub const HEADER_BITS: u64 = 64;

/// Wire format magic for [`CompressedBlob::to_bytes`].
pub const BLOB_MAGIC: &[u8; 4] = b"TMLZ";
/// Wire format version.
pub const BLOB_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("malformed blob: {0}")]
    MalformedBlob(String),
}

fn malformed(msg: impl Into<String>) -> CodecError {
    CodecError::MalformedBlob(msg.into())
}

/// Code width used when the dictionary holds `size` entries.
///
/// Width increments when the dictionary reaches 2^width and is capped at 16
/// bits once the dictionary freezes.
fn width_for_size(size: u32) -> u32 {
    let bits = 32 - size.leading_zeros();
    bits.clamp(MIN_CODE_WIDTH, MAX_CODE_WIDTH)
}

/// Result of [`compress`]: the emitted code sequence plus framing metadata.
///
/// `codes` holds `(code, bit width)` pairs in emission order; the wire format
/// packs exactly these bits MSB-first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressedBlob {
    codes: Vec<(u16, u8)>,
    pub payload_bits: u64,
    pub original_len: u64,
    pub format_version: u32,
}

impl CompressedBlob {
    /// The emitted `(code, width)` schedule.
    pub fn codes(&self) -> &[(u16, u8)] {
        &self.codes
    }

    /// Serializes to the debug wire format: magic `TMLZ`, u32 LE version,
    /// u64 LE original length, then the codes packed MSB-first within each
    /// byte, zero-padded to a byte boundary.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + (self.payload_bits as usize).div_ceil(8));
        out.extend_from_slice(BLOB_MAGIC);
        out.extend_from_slice(&self.format_version.to_le_bytes());
        out.extend_from_slice(&self.original_len.to_le_bytes());
        let mut acc: u32 = 0;
        let mut nbits: u32 = 0;
        for &(code, width) in &self.codes {
            acc = (acc << width) | u32::from(code);
            nbits += u32::from(width);
            while nbits >= 8 {
                out.push((acc >> (nbits - 8)) as u8);
                nbits -= 8;
                acc &= (1 << nbits) - 1;
            }
        }
        if nbits > 0 {
            out.push((acc << (8 - nbits)) as u8);
        }
        out
    }

    /// Parses the wire format back into a blob.
    ///
    /// The code widths are recovered by replaying the dictionary growth, so
    /// parsing validates the stream as it goes.
    pub fn from_bytes(bytes: &[u8]) -> Result<CompressedBlob, CodecError> {
        if bytes.len() < 16 {
            return Err(malformed("truncated header"));
        }
        if &bytes[0..4] != BLOB_MAGIC {
            return Err(malformed("bad magic"));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != BLOB_VERSION {
            return Err(malformed(format!("unsupported version {version}")));
        }
        let original_len = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
        let mut reader = BitReader::new(&bytes[16..]);
        let mut codes = Vec::new();
        let mut payload_bits: u64 = 0;

        if original_len > 0 {
            // Replay dictionary sizes and entry lengths (contents are not
            // needed to delimit the code stream).
            let mut entry_len: Vec<u32> = Vec::new();
            let mut size = INITIAL_DICT_SIZE;
            let mut produced: u64 = 0;
            let mut prev_len: u64 = 0;
            while produced < original_len {
                let width = width_for_size(size.saturating_add(1).min(MAX_DICT_SIZE));
                let code = reader.read(width)?;
                codes.push((code, width as u8));
                payload_bits += u64::from(width);
                let cur_len: u64 = if u32::from(code) < INITIAL_DICT_SIZE {
                    1
                } else if u32::from(code) < size {
                    u64::from(entry_len[(u32::from(code) - INITIAL_DICT_SIZE) as usize])
                } else if u32::from(code) == size && size < MAX_DICT_SIZE && prev_len > 0 {
                    prev_len + 1
                } else {
                    return Err(malformed(format!(
                        "code {code} out of range for dictionary of {size} entries"
                    )));
                };
                if prev_len > 0 && size < MAX_DICT_SIZE {
                    entry_len.push(prev_len as u32 + 1);
                    size += 1;
                }
                produced += cur_len;
                prev_len = cur_len;
            }
            if produced != original_len {
                return Err(malformed("code stream overruns declared length"));
            }
        }
        reader.expect_only_zero_padding()?;
        Ok(CompressedBlob {
            codes,
            payload_bits,
            original_len,
            format_version: version,
        })
    }
}

/// LZW-compresses `data`. Empty input emits no codes.
pub fn compress(data: &[u8]) -> CompressedBlob {
    let mut codes: Vec<(u16, u8)> = Vec::new();
    let mut payload_bits: u64 = 0;
    if !data.is_empty() {
        let mut dict: HashMap<(u16, u8), u16> = HashMap::new();
        let mut size = INITIAL_DICT_SIZE;
        let emit = |code: u16, size: u32, bits: &mut u64, out: &mut Vec<(u16, u8)>| {
            let width = width_for_size(size);
            out.push((code, width as u8));
            *bits += u64::from(width);
        };
        let mut current = u16::from(data[0]);
        for &byte in &data[1..] {
            if let Some(&code) = dict.get(&(current, byte)) {
                current = code;
            } else {
                emit(current, size, &mut payload_bits, &mut codes);
                if size < MAX_DICT_SIZE {
                    dict.insert((current, byte), size as u16);
                    size += 1;
                }
                current = u16::from(byte);
            }
        }
        emit(current, size, &mut payload_bits, &mut codes);
    }
    CompressedBlob {
        codes,
        payload_bits,
        original_len: data.len() as u64,
        format_version: BLOB_VERSION,
    }
}

/// Expands a blob back to the original bytes.
pub fn decompress(blob: &CompressedBlob) -> Result<Vec<u8>, CodecError> {
    if blob.original_len == 0 {
        if !blob.codes.is_empty() {
            return Err(malformed("codes present for empty original"));
        }
        return Ok(Vec::new());
    }
    if blob.original_len > usize::MAX as u64 {
        return Err(malformed("original length exceeds addressable memory"));
    }
    let expected_len = blob.original_len as usize;
    if blob.codes.is_empty() {
        return Err(malformed("empty code stream for non-empty original"));
    }

    // Parent-pointer dictionary: entry = (parent code, last byte, first byte).
    // Initial single-byte entries are implicit.
    let mut parents: Vec<(u16, u8, u8)> = Vec::new();
    let first_byte = |parents: &Vec<(u16, u8, u8)>, code: u16| -> u8 {
        if u32::from(code) < INITIAL_DICT_SIZE {
            code as u8
        } else {
            parents[(u32::from(code) - INITIAL_DICT_SIZE) as usize].2
        }
    };
    let mut out: Vec<u8> = Vec::with_capacity(expected_len);
    let mut scratch: Vec<u8> = Vec::new();
    let emit_entry =
        |out: &mut Vec<u8>, scratch: &mut Vec<u8>, parents: &Vec<(u16, u8, u8)>, code: u16| {
            scratch.clear();
            let mut c = code;
            while u32::from(c) >= INITIAL_DICT_SIZE {
                let (parent, last, _) = parents[(u32::from(c) - INITIAL_DICT_SIZE) as usize];
                scratch.push(last);
                c = parent;
            }
            scratch.push(c as u8);
            out.extend(scratch.iter().rev());
        };

    let mut size = INITIAL_DICT_SIZE;
    let mut iter = blob.codes.iter();
    let &(first, first_width) = iter.next().unwrap();
    if u32::from(first_width) != width_for_size(size) || u32::from(first) >= INITIAL_DICT_SIZE {
        return Err(malformed("invalid leading code"));
    }
    out.push(first as u8);
    let mut prev = first;

    for &(code, width) in iter {
        let expected_width = width_for_size(size.saturating_add(1).min(MAX_DICT_SIZE));
        if u32::from(width) != expected_width {
            return Err(malformed("code width out of schedule"));
        }
        if u32::from(code) < size {
            if size < MAX_DICT_SIZE {
                parents.push((prev, first_byte(&parents, code), first_byte(&parents, prev)));
                size += 1;
            }
            emit_entry(&mut out, &mut scratch, &parents, code);
        } else if u32::from(code) == size && size < MAX_DICT_SIZE {
            // KwKwK: the referenced entry is the one about to be created.
            let fb = first_byte(&parents, prev);
            parents.push((prev, fb, fb));
            size += 1;
            emit_entry(&mut out, &mut scratch, &parents, code);
        } else {
            return Err(malformed(format!(
                "code {code} out of range for dictionary of {size} entries"
            )));
        }
        if out.len() > expected_len {
            return Err(malformed("decoded output exceeds declared length"));
        }
        prev = code;
    }
    if out.len() != expected_len {
        return Err(malformed("decoded output shorter than declared length"));
    }
    Ok(out)
}

/// Compressed size of `data` in bits: payload plus the fixed 64-bit header
/// overhead for version and original length. Never below [`HEADER_BITS`].
pub fn compressed_size_bits(data: &[u8]) -> u64 {
    compress(data).payload_bits + HEADER_BITS
}

struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
    acc: u32,
    nbits: u32,
}

impl<'a> BitReader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        BitReader {
            bytes,
            pos: 0,
            acc: 0,
            nbits: 0,
        }
    }

    fn read(&mut self, width: u32) -> Result<u16, CodecError> {
        while self.nbits < width {
            if self.pos >= self.bytes.len() {
                return Err(malformed("truncated bit stream"));
            }
            self.acc = (self.acc << 8) | u32::from(self.bytes[self.pos]);
            self.pos += 1;
            self.nbits += 8;
        }
        let shift = self.nbits - width;
        let code = (self.acc >> shift) as u16 & ((1u32 << width) - 1) as u16;
        self.nbits -= width;
        self.acc &= (1 << self.nbits) - 1;
        Ok(code)
    }

    /// After the last code only sub-byte zero padding may remain.
    fn expect_only_zero_padding(&self) -> Result<(), CodecError> {
        if self.pos < self.bytes.len() {
            return Err(malformed("trailing bytes after code stream"));
        }
        if self.acc != 0 {
            return Err(malformed("nonzero padding bits"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use proptest::prelude::*;

    #[test]
    fn empty_input_emits_nothing() {
        let blob = compress(b"");
        assert!(blob.codes().is_empty());
        assert_eq!(blob.payload_bits, 0);
        assert_eq!(blob.original_len, 0);
        assert_eq!(decompress(&blob).unwrap(), b"");
        assert_eq!(compressed_size_bits(b""), 64);
    }

    // Hand trace with the 256-entry initial dictionary:
    // emit 'a'(97), add "aa"=256; emit 256, add "aaa"=257; flush 'a'(97).
    #[test]
    fn aaaa_hand_trace() {
        let blob = compress(b"aaaa");
        assert_eq!(blob.codes(), &[(97, 9), (256, 9), (97, 9)]);
        assert_eq!(blob.payload_bits, 27);
        assert_eq!(decompress(&blob).unwrap(), b"aaaa");
    }

    // 16 codes, all still 9 bits wide: T O B E O R N O T 256 258 260 265 259 261 263.
    #[test]
    fn tobeornot_hand_trace() {
        let data = b"TOBEORNOTTOBEORTOBEORNOT";
        let blob = compress(data);
        assert_eq!(blob.codes().len(), 16);
        assert_eq!(blob.payload_bits, 144);
        assert_eq!(decompress(&blob).unwrap(), data);
    }

    #[test]
    fn zeros_round_trip_and_ratio() {
        let data = vec![0u8; 10 * 1024];
        let blob = compress(&data);
        assert_eq!(decompress(&blob).unwrap(), data);
        // Run-length growth keeps the code count at O(sqrt(n)).
        assert!(compressed_size_bits(&data) <= 10 * 1024 * 8 / 20);
    }

    #[test]
    fn seeded_random_nearly_incompressible() {
        let data = SplitMix64::new(42).bytes(10 * 1024);
        let blob = compress(&data);
        assert_eq!(decompress(&blob).unwrap(), data);
        let bits = compressed_size_bits(&data);
        assert!(bits as f64 >= 0.7 * 10.0 * 1024.0 * 8.0, "bits = {bits}");
    }

    #[test]
    fn monotone_ordering_zeros_vs_random() {
        for n in [256usize, 1024, 4096, 10240] {
            let zeros = vec![0u8; n];
            let random = SplitMix64::new(7).bytes(n);
            assert!(
                compressed_size_bits(&zeros) < compressed_size_bits(&random),
                "ordering violated at n = {n}"
            );
        }
    }

    #[test]
    fn deterministic_across_invocations() {
        let data = SplitMix64::new(3).bytes(4096);
        let a = compress(&data);
        let b = compress(&data);
        assert_eq!(a, b);
        assert_eq!(a.to_bytes(), b.to_bytes());
    }

    #[test]
    fn wire_round_trip() {
        for data in [
            b"".to_vec(),
            b"aaaa".to_vec(),
            b"TOBEORNOTTOBEORTOBEORNOT".to_vec(),
            SplitMix64::new(11).bytes(10_000),
        ] {
            let blob = compress(&data);
            let wire = blob.to_bytes();
            let parsed = CompressedBlob::from_bytes(&wire).unwrap();
            assert_eq!(parsed, blob);
            assert_eq!(decompress(&parsed).unwrap(), data);
        }
    }

    // Pushes the dictionary past the 2^16 freeze point (needs > 65280 codes).
    #[test]
    fn dictionary_freeze_round_trip() {
        let mut data = SplitMix64::new(5).bytes(192 * 1024);
        // Structured tail so frozen-dictionary matches actually occur.
        data.extend(std::iter::repeat_n(b"abcabcabd".as_slice(), 2000).flatten());
        let blob = compress(&data);
        assert!(
            blob.codes().iter().any(|&(_, w)| w == 16),
            "test did not reach 16-bit codes"
        );
        assert_eq!(decompress(&blob).unwrap(), data);
        let parsed = CompressedBlob::from_bytes(&blob.to_bytes()).unwrap();
        assert_eq!(parsed, blob);
    }

    #[test]
    fn malformed_inputs_rejected() {
        // Bad magic.
        assert!(CompressedBlob::from_bytes(b"XXXX0000000000000000").is_err());
        // Truncated header.
        assert!(CompressedBlob::from_bytes(b"TMLZ\x01").is_err());
        // Header declares 4 bytes but no payload follows.
        let mut hdr = Vec::new();
        hdr.extend_from_slice(b"TMLZ");
        hdr.extend_from_slice(&1u32.to_le_bytes());
        hdr.extend_from_slice(&4u64.to_le_bytes());
        assert!(CompressedBlob::from_bytes(&hdr).is_err());
        // First code >= 256 is out of dictionary range.
        let mut bad = hdr.clone();
        bad.extend_from_slice(&[0b1001_0110, 0b0100_0000]); // 9-bit code 300
        assert!(matches!(
            CompressedBlob::from_bytes(&bad),
            Err(CodecError::MalformedBlob(_))
        ));
        // Trailing garbage after a valid stream.
        let mut wire = compress(b"aaaa").to_bytes();
        wire.push(0xFF);
        assert!(CompressedBlob::from_bytes(&wire).is_err());
        // Nonzero padding bits.
        let mut wire = compress(b"aaaa").to_bytes();
        let last = wire.len() - 1;
        wire[last] |= 0x01;
        assert!(CompressedBlob::from_bytes(&wire).is_err());
    }

    #[test]
    fn out_of_range_code_in_blob() {
        let mut blob = compress(b"aaaa");
        blob.codes[1] = (9999 & 0x1FF, 9); // 9-bit container forces <512, use 511
        blob.codes[1] = (511, 9);
        assert!(matches!(
            decompress(&blob),
            Err(CodecError::MalformedBlob(_))
        ));
    }

    #[test]
    fn size_lower_bound() {
        for data in [&b""[..], b"x", b"hello world"] {
            assert!(compressed_size_bits(data) >= 64);
        }
    }

    proptest! {
        #[test]
        fn round_trip_identity(data in proptest::collection::vec(any::<u8>(), 0..4096)) {
            let blob = compress(&data);
            prop_assert_eq!(decompress(&blob).unwrap(), data.clone());
            let parsed = CompressedBlob::from_bytes(&blob.to_bytes()).unwrap();
            prop_assert_eq!(&parsed, &blob);
            prop_assert_eq!(blob.payload_bits,
                blob.codes().iter().map(|&(_, w)| u64::from(w)).sum::<u64>());
        }

        // Appending bytes never removes already-emitted codes; only the final
        // flush code (at most 16 bits) can be absorbed into a longer match.
        #[test]
        fn appending_never_shrinks_much(
            base in proptest::collection::vec(any::<u8>(), 1..1024),
            tail in proptest::collection::vec(any::<u8>(), 1..256),
        ) {
            let before = compressed_size_bits(&base);
            let mut extended = base.clone();
            extended.extend_from_slice(&tail);
            let after = compressed_size_bits(&extended);
            prop_assert!(after + 64 >= before);
        }

        // Hostile wire input must parse or error, never panic. Prefixing the
        // magic steers cases past the cheap header check.
        #[test]
        fn from_bytes_never_panics(data in proptest::collection::vec(any::<u8>(), 0..512)) {
            let _ = CompressedBlob::from_bytes(&data);
            let mut with_magic = BLOB_MAGIC.to_vec();
            with_magic.extend_from_slice(&BLOB_VERSION.to_le_bytes());
            with_magic.extend_from_slice(&data);
            if let Ok(blob) = CompressedBlob::from_bytes(&with_magic) {
                let decoded = decompress(&blob).unwrap();
                prop_assert_eq!(decoded.len() as u64, blob.original_len);
            }
        }

        // Arbitrary code schedules fed straight to the decoder must error
        // out cleanly when inconsistent.
        #[test]
        fn decompress_never_panics(
            codes in proptest::collection::vec((any::<u16>(), 9u8..=16), 0..64),
            original_len in 0u64..4096,
        ) {
            let payload_bits = codes.iter().map(|&(_, w)| u64::from(w)).sum();
            let blob = CompressedBlob {
                codes,
                payload_bits,
                original_len,
                format_version: BLOB_VERSION,
            };
            if let Ok(decoded) = decompress(&blob) {
                prop_assert_eq!(decoded.len() as u64, blob.original_len);
            }
        }
    }
}
