//! Binary synopsis dumps consumed by the trainer.
//!
//! A file is the magic `PNBS1` followed by records until end of file. Each
//! record is:
//!
//! | bytes | field |
//! |---|---|
//! | 832 | 104 plane masks, `u64` little-endian |
//! | 1 | perspective, 0 = white, 1 = black |
//! | 2 | action label, `u16` little-endian action index |
//! | 1 | winner label from the perspective player, `i8`: 1 win, -1 loss, 0 draw |
//! | 1 | flags: bit 0 soon-win, bit 1 soon-lose |
//! | 12 | true piece counts, own pawn..king then opposing pawn..king |
//! | 1 + n | headset tag, length byte then UTF-8 name |

use std::io::{self, Read, Write};

use super::synopsis::{Synopsis, PLANES};
use crate::game::{Bitboard, Color};

pub const MAGIC: &[u8; 5] = b"PNBS1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DumpRecord {
    pub synopsis: Synopsis,
    pub action: u16,
    pub winner: i8,
    pub soon_win: bool,
    pub soon_lose: bool,
    pub piece_counts: [u8; 12],
    pub headset: String,
}

pub struct DumpWriter<W: Write> {
    out: W,
}

impl<W: Write> DumpWriter<W> {
    pub fn new(mut out: W) -> io::Result<DumpWriter<W>> {
        out.write_all(MAGIC)?;
        Ok(DumpWriter { out })
    }

    pub fn write(&mut self, r: &DumpRecord) -> io::Result<()> {
        let mut buf = Vec::with_capacity(PLANES * 8 + 18 + r.headset.len());
        for p in &r.synopsis.planes {
            buf.extend_from_slice(&p.0.to_le_bytes());
        }
        buf.push(r.synopsis.perspective.index() as u8);
        buf.extend_from_slice(&r.action.to_le_bytes());
        buf.push(r.winner as u8);
        buf.push(r.soon_win as u8 | (r.soon_lose as u8) << 1);
        buf.extend_from_slice(&r.piece_counts);
        let name = r.headset.as_bytes();
        let len = u8::try_from(name.len())
            .map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "headset name longer than 255 bytes"))?;
        buf.push(len);
        buf.extend_from_slice(name);
        self.out.write_all(&buf)
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

fn invalid(msg: &str) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.to_string())
}

/// Reads every record of a dump.
pub fn read_dump<R: Read>(mut input: R) -> io::Result<Vec<DumpRecord>> {
    let mut magic = [0u8; 5];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(invalid("not a PNBS1 dump"));
    }
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let mut records = Vec::new();
    let mut at = 0;
    let fixed = PLANES * 8 + 18;
    while at < bytes.len() {
        if bytes.len() - at < fixed {
            return Err(invalid("truncated record"));
        }
        let mut planes = [Bitboard::EMPTY; PLANES];
        for (i, p) in planes.iter_mut().enumerate() {
            let s = at + i * 8;
            *p = Bitboard(u64::from_le_bytes(bytes[s..s + 8].try_into().unwrap()));
        }
        at += PLANES * 8;
        let perspective = match bytes[at] {
            0 => Color::White,
            1 => Color::Black,
            _ => return Err(invalid("bad perspective byte")),
        };
        let action = u16::from_le_bytes([bytes[at + 1], bytes[at + 2]]);
        let winner = bytes[at + 3] as i8;
        let flags = bytes[at + 4];
        let mut piece_counts = [0u8; 12];
        piece_counts.copy_from_slice(&bytes[at + 5..at + 17]);
        let len = bytes[at + 17] as usize;
        at += 18;
        if bytes.len() - at < len {
            return Err(invalid("truncated headset name"));
        }
        let headset = String::from_utf8(bytes[at..at + len].to_vec()).map_err(|_| invalid("headset name not UTF-8"))?;
        at += len;
        records.push(DumpRecord {
            synopsis: Synopsis { planes, perspective },
            action,
            winner,
            soon_win: flags & 1 != 0,
            soon_lose: flags & 2 != 0,
            piece_counts,
            headset,
        });
    }
    Ok(records)
}
