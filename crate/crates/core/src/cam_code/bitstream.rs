//! MSB-first bit writer/reader and order-k Exp-Golomb codes.

use super::CamCodeError;

/// Largest supported Exp-Golomb order.
pub const MAX_EG_ORDER: u32 = 30;

/// Appends bits MSB-first; the last byte is zero padded.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitWriter {
    bytes: Vec<u8>,
    bit_len: usize,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bit_len(&self) -> usize {
        self.bit_len
    }

    pub fn put_bit(&mut self, bit: bool) {
        let offset = self.bit_len % 8;
        if offset == 0 {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 0x80 >> offset;
        }
        self.bit_len += 1;
    }

    /// Writes the low `count` bits of `value`, most significant first.
    pub fn put_bits(&mut self, value: u64, count: u32) {
        debug_assert!(count <= 64);
        for i in (0..count).rev() {
            self.put_bit((value >> i) & 1 == 1);
        }
    }

    /// Pads with zero bits up to the next byte boundary.
    pub fn align(&mut self) {
        self.bit_len = self.bytes.len() * 8;
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    /// The bits written so far as a `0`/`1` string.
    pub fn to_bit_string(&self) -> String {
        (0..self.bit_len)
            .map(|i| {
                if self.bytes[i / 8] & (0x80 >> (i % 8)) != 0 {
                    '1'
                } else {
                    '0'
                }
            })
            .collect()
    }
}

/// Reads bits MSB-first from a byte slice.
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
    bit_len: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self {
            bytes,
            pos: 0,
            bit_len: bytes.len() * 8,
        }
    }

    /// Reader limited to the first `bit_len` bits.
    pub fn with_bit_len(bytes: &'a [u8], bit_len: usize) -> Self {
        Self {
            bytes,
            pos: 0,
            bit_len: bit_len.min(bytes.len() * 8),
        }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.bit_len - self.pos
    }

    pub fn get_bit(&mut self) -> Result<bool, CamCodeError> {
        if self.pos >= self.bit_len {
            return Err(CamCodeError::Truncated);
        }
        let bit = self.bytes[self.pos / 8] & (0x80 >> (self.pos % 8)) != 0;
        self.pos += 1;
        Ok(bit)
    }

    pub fn get_bits(&mut self, count: u32) -> Result<u64, CamCodeError> {
        if self.remaining() < count as usize {
            return Err(CamCodeError::Truncated);
        }
        let mut v = 0u64;
        for _ in 0..count {
            v = (v << 1) | self.get_bit()? as u64;
        }
        Ok(v)
    }

    /// Skips to the next byte boundary.
    pub fn align(&mut self) {
        self.pos = self.pos.div_ceil(8) * 8;
        self.pos = self.pos.min(self.bit_len);
    }
}

/// Length in bits of the order-`k` codeword for `n`: `2m − k + 1` with
/// `m = floor(log2(n + 2^k))`.
pub fn eg_len(n: u64, k: u32) -> u32 {
    let m = 63 - (n + (1u64 << k)).leading_zeros();
    2 * m - k + 1
}

/// Writes `n` as an order-`k` Exp-Golomb codeword.
pub fn eg_encode(w: &mut BitWriter, n: u64, k: u32) {
    assert!(k <= MAX_EG_ORDER, "Exp-Golomb order {k} exceeds {MAX_EG_ORDER}");
    let v = n + (1u64 << k);
    let m = 63 - v.leading_zeros();
    w.put_bits(0, m - k);
    w.put_bits(v, m + 1);
}

/// Reads one order-`k` Exp-Golomb codeword.
pub fn eg_decode(r: &mut BitReader<'_>, k: u32) -> Result<u64, CamCodeError> {
    let mut zeros = 0u32;
    while !r.get_bit()? {
        zeros += 1;
        if zeros + k > 62 {
            return Err(CamCodeError::Format("Exp-Golomb prefix too long".into()));
        }
    }
    // the leading one already consumed is the top bit of the value
    let rest = r.get_bits(zeros + k)?;
    let v = (1u64 << (zeros + k)) | rest;
    Ok(v - (1u64 << k))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(n: u64, k: u32) -> String {
        let mut w = BitWriter::new();
        eg_encode(&mut w, n, k);
        w.to_bit_string()
    }

    #[test]
    fn order_zero_and_one_tables() {
        assert_eq!(code(0, 0), "1");
        assert_eq!(code(1, 0), "010");
        assert_eq!(code(2, 0), "011");
        assert_eq!(code(3, 0), "00100");
        assert_eq!(code(0, 1), "10");
        assert_eq!(code(1, 1), "11");
        assert_eq!(code(2, 1), "0100");
    }

    #[test]
    fn order_eighteen_lengths() {
        assert_eq!(code(0, 18), format!("1{}", "0".repeat(18)));
        assert_eq!(code(1 << 18, 18).len(), 21);
        assert_eq!(eg_len(1 << 18, 18), 21);
    }

    #[test]
    fn decode_examples() {
        let mut w = BitWriter::new();
        w.put_bits(1 << 18, 19);
        let bytes = w.clone().into_bytes();
        assert_eq!(eg_decode(&mut BitReader::with_bit_len(&bytes, 19), 18), Ok(0));

        let mut w = BitWriter::new();
        w.put_bits(0b010, 3);
        let bytes = w.into_bytes();
        assert_eq!(eg_decode(&mut BitReader::with_bit_len(&bytes, 3), 0), Ok(1));

        assert_eq!(eg_decode(&mut BitReader::new(&[]), 0), Err(CamCodeError::Truncated));
        assert_eq!(eg_decode(&mut BitReader::new(&[0x00]), 0), Err(CamCodeError::Truncated));
    }

    #[test]
    fn writer_pads_and_reader_aligns() {
        let mut w = BitWriter::new();
        w.put_bits(0b101, 3);
        w.align();
        w.put_bit(true);
        assert_eq!(w.bit_len(), 9);
        let bytes = w.into_bytes();
        assert_eq!(bytes, vec![0b1010_0000, 0b1000_0000]);
        let mut r = BitReader::new(&bytes);
        assert_eq!(r.get_bits(3), Ok(0b101));
        r.align();
        assert_eq!(r.position(), 8);
        assert_eq!(r.get_bit(), Ok(true));
    }

    #[test]
    fn lengths_are_monotone() {
        for k in [0, 1, 18] {
            let mut prev = 0;
            for n in 0..5000u64 {
                let len = eg_len(n, k);
                assert!(len >= prev);
                assert_eq!(len as usize, code(n, k).len());
                prev = len;
            }
        }
    }

    mod prop {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn round_trip(n in 0u64..(1 << 26), k in 0u32..=24) {
                let mut w = BitWriter::new();
                eg_encode(&mut w, n, k);
                prop_assert_eq!(w.bit_len() as u32, eg_len(n, k));
                let len = w.bit_len();
                let bytes = w.into_bytes();
                let mut r = BitReader::with_bit_len(&bytes, len);
                prop_assert_eq!(eg_decode(&mut r, k), Ok(n));
                prop_assert_eq!(r.remaining(), 0);
            }
        }
    }
}
