//! Block checksum used for error detection and decoder early exit.
//!
//! CRC-16/CCITT-FALSE (poly 0x1021, init 0xFFFF) computed bitwise over the
//! payload, appended MSB-first.

pub const CRC_BITS: usize = 16;

const POLY: u16 = 0x1021;
const INIT: u16 = 0xFFFF;

fn crc16(bits: &[u8]) -> u16 {
    let mut reg = INIT;
    for &b in bits {
        let top = ((reg >> 15) as u8) ^ (b & 1);
        reg <<= 1;
        if top == 1 {
            reg ^= POLY;
        }
    }
    reg
}

/// Appends the 16 checksum bits to `payload`.
pub fn append(payload: &[u8]) -> Vec<u8> {
    let c = crc16(payload);
    let mut out = Vec::with_capacity(payload.len() + CRC_BITS);
    out.extend_from_slice(payload);
    for i in (0..CRC_BITS).rev() {
        out.push(((c >> i) & 1) as u8);
    }
    out
}

/// Checks a block whose trailing 16 bits are the checksum of the rest.
pub fn check(block: &[u8]) -> bool {
    if block.len() < CRC_BITS {
        return false;
    }
    let split = block.len() - CRC_BITS;
    let c = crc16(&block[..split]);
    block[split..]
        .iter()
        .enumerate()
        .all(|(i, &b)| b == ((c >> (CRC_BITS - 1 - i)) & 1) as u8)
}
