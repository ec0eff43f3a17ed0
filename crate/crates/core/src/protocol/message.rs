//! Fixed-width bit payloads and their on-disk framing.
//!
//! A payload is the concatenation of `b0`-bit big-endian grid indices in
//! index-set order. On disk each message is
//!
//! ```text
//! "DNPRMSG1" | machine: u32 BE | bit length: u32 BE | payload, zero-padded to a byte
//! ```
//!
//! and a transcript is a plain concatenation of messages. The budget is
//! counted in payload bits, before padding.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"DNPRMSG1";

/// One machine's transmission.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    machine: u32,
    bit_len: u32,
    payload: Vec<u8>,
}

impl Message {
    /// Builds a message, refusing anything longer than `budget` bits.
    pub fn new(machine: u32, bit_len: u64, payload: Vec<u8>, budget: u64) -> Result<Self> {
        if bit_len > budget {
            return Err(Error::BudgetExceeded {
                machine,
                bits: bit_len,
                budget,
            });
        }
        Self::from_parts(machine, bit_len, payload)
    }

    fn from_parts(machine: u32, bit_len: u64, payload: Vec<u8>) -> Result<Self> {
        let bit_len = u32::try_from(bit_len)
            .map_err(|_| Error::Format(format!("{bit_len} bits exceeds u32")))?;
        if payload.len() != (bit_len as usize).div_ceil(8) {
            return Err(Error::Format(format!(
                "{} payload bytes for {bit_len} bits",
                payload.len()
            )));
        }
        Ok(Message {
            machine,
            bit_len,
            payload,
        })
    }

    pub fn machine(&self) -> u32 {
        self.machine
    }

    pub fn bit_len(&self) -> u64 {
        self.bit_len as u64
    }

    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    pub fn reader(&self) -> BitReader<'_> {
        BitReader::new(&self.payload, self.bit_len as u64)
    }

    pub fn write_to<W: Write>(&self, out: &mut W) -> Result<()> {
        out.write_all(MAGIC)?;
        out.write_all(&self.machine.to_be_bytes())?;
        out.write_all(&self.bit_len.to_be_bytes())?;
        out.write_all(&self.payload)?;
        Ok(())
    }

    /// Reads one message; `Ok(None)` at a clean end of input.
    pub fn read_from<R: Read>(input: &mut R) -> Result<Option<Self>> {
        let mut magic = [0u8; 8];
        match read_exact_or_eof(input, &mut magic)? {
            0 => return Ok(None),
            8 => {}
            got => {
                return Err(Error::Format(format!(
                    "truncated header ({got} of 8 magic bytes)"
                )))
            }
        }
        if &magic != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let mut word = [0u8; 4];
        input.read_exact(&mut word)?;
        let machine = u32::from_be_bytes(word);
        input.read_exact(&mut word)?;
        let bit_len = u32::from_be_bytes(word);
        let mut payload = vec![0u8; (bit_len as usize).div_ceil(8)];
        input.read_exact(&mut payload)?;
        let pad = (8 - bit_len % 8) % 8;
        if pad > 0 && payload.last().is_some_and(|b| b & ((1u8 << pad) - 1) != 0) {
            return Err(Error::Format("nonzero padding bits".into()));
        }
        Self::from_parts(machine, bit_len as u64, payload).map(Some)
    }
}

fn read_exact_or_eof<R: Read>(input: &mut R, buf: &mut [u8]) -> Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match input.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(k) => filled += k,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(filled)
}

pub fn write_transcript<W: Write>(messages: &[Message], out: &mut W) -> Result<()> {
    for msg in messages {
        msg.write_to(out)?;
    }
    Ok(())
}

pub fn read_transcript<R: Read>(input: &mut R) -> Result<Vec<Message>> {
    let mut out = Vec::new();
    while let Some(msg) = Message::read_from(input)? {
        out.push(msg);
    }
    Ok(out)
}

/// MSB-first bit packer.
#[derive(Debug, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    bits: u64,
}

impl BitWriter {
    pub fn with_capacity(bits: u64) -> Self {
        BitWriter {
            bytes: Vec::with_capacity((bits as usize).div_ceil(8)),
            bits: 0,
        }
    }

    /// Appends the low `width` bits of `value`, most significant first.
    pub fn push(&mut self, value: u64, width: u32) {
        debug_assert!(width <= 64);
        debug_assert!(width == 64 || value >> width == 0);
        for k in (0..width).rev() {
            let bit = ((value >> k) & 1) as u8;
            let pos = (self.bits % 8) as u8;
            if pos == 0 {
                self.bytes.push(0);
            }
            if bit == 1 {
                *self.bytes.last_mut().unwrap() |= 0x80 >> pos;
            }
            self.bits += 1;
        }
    }

    pub fn bit_len(&self) -> u64 {
        self.bits
    }

    pub fn finish(self) -> (Vec<u8>, u64) {
        (self.bytes, self.bits)
    }
}

/// MSB-first reader over a bit-length-delimited payload.
#[derive(Debug)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    len: u64,
    pos: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8], len: u64) -> Self {
        BitReader { bytes, len, pos: 0 }
    }

    pub fn read(&mut self, width: u32) -> Option<u64> {
        if self.pos + width as u64 > self.len {
            return None;
        }
        let mut v = 0u64;
        for _ in 0..width {
            let byte = self.bytes[(self.pos / 8) as usize];
            let bit = (byte >> (7 - (self.pos % 8))) & 1;
            v = (v << 1) | bit as u64;
            self.pos += 1;
        }
        Some(v)
    }

    pub fn remaining(&self) -> u64 {
        self.len - self.pos
    }
}
