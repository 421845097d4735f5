//! One-line text form of a [`WorldState`].
//!
//! ```text
//! <board> <w|b> <s|m> <castling> <ep> <lastfrom> <lastto> <capself> <capopp> [key=value ...]
//! ```
//!
//! `<board>` is the FEN piece placement. The four trailing squares (or `-`)
//! are relative to the side to act: its own latest move, the capture that
//! move made, and the capture made by the opponent's latest move. Optional
//! `key=value` fields carry the rest of the history so the text round-trips
//! exactly: `ply=`, `opp=<from>,<to>` (opponent's latest move),
//! `prev=<6 squares>` (both sides' moves before that) and `before=<board>`
//! (placement before the latest move).

use std::fmt;
use std::str::FromStr;

use super::state::MoveMemo;
use super::types::{Bitboard, CastlingRights, Color, Phase, Piece, Square};
use super::{ParseError, WorldState};

fn write_board(f: &mut impl fmt::Write, colors: &[Bitboard; 2], kinds: &[Bitboard; 6]) -> fmt::Result {
    for rank in (0..8).rev() {
        let mut empty = 0;
        for file in 0..8 {
            let sq = Square::from_coords(file, rank);
            let color = Color::ALL.into_iter().find(|c| colors[c.index()].contains(sq));
            let kind = (0..6).find(|&k| kinds[k].contains(sq));
            match (color, kind) {
                (Some(color), Some(k)) => {
                    if empty > 0 {
                        write!(f, "{empty}")?;
                        empty = 0;
                    }
                    write!(f, "{}", Piece::new(color, super::PieceKind::from_index(k)).fen_char())?;
                }
                _ => empty += 1,
            }
        }
        if empty > 0 {
            write!(f, "{empty}")?;
        }
        if rank > 0 {
            f.write_char('/')?;
        }
    }
    Ok(())
}

fn parse_board(s: &str) -> Result<Vec<(Square, Piece)>, ParseError> {
    let err = || ParseError::Board(s.to_string());
    let rows: Vec<&str> = s.split('/').collect();
    if rows.len() != 8 {
        return Err(err());
    }
    let mut out = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let rank = 7 - i as u8;
        let mut file = 0u8;
        for c in row.chars() {
            if let Some(d) = c.to_digit(10) {
                if !(1..=8).contains(&d) {
                    return Err(err());
                }
                file += d as u8;
            } else {
                let piece = Piece::from_fen_char(c).ok_or_else(err)?;
                if file > 7 {
                    return Err(err());
                }
                out.push((Square::from_coords(file, rank), piece));
                file += 1;
            }
            if file > 8 {
                return Err(err());
            }
        }
        if file != 8 {
            return Err(err());
        }
    }
    Ok(out)
}

fn opt_sq(sq: Option<Square>) -> String {
    sq.map_or_else(|| "-".to_string(), |s| s.to_string())
}

fn parse_opt_sq(s: &str) -> Result<Option<Square>, ParseError> {
    if s == "-" {
        Ok(None)
    } else {
        s.parse().map(Some)
    }
}

impl WorldState {
    /// The FEN piece-placement field.
    pub fn board_fen(&self) -> String {
        let mut s = String::new();
        write_board(&mut s, &self.colors, &self.kinds).unwrap();
        s
    }

    /// Builds a state from a FEN placement with the given side, phase and
    /// castling rights; no history.
    pub fn from_board(
        board: &str,
        side: Color,
        phase: Phase,
        castling: CastlingRights,
    ) -> Result<WorldState, ParseError> {
        let mut s = WorldState::empty();
        for (sq, piece) in parse_board(board)? {
            s.put(piece, sq);
        }
        s.set_side(side);
        s.set_phase(phase);
        s.set_castling(castling);
        s.snapshot_before();
        Ok(s)
    }
}

impl fmt::Display for WorldState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let us = self.side.index();
        let them = 1 - us;
        let own = self.memo[us];
        let opp = self.memo[them];
        write_board(f, &self.colors, &self.kinds)?;
        write!(
            f,
            " {} {} {} {} {} {} {} {}",
            self.side.letter(),
            match self.phase {
                Phase::Sense => 's',
                Phase::Move => 'm',
            },
            self.castling,
            opt_sq(self.en_passant),
            opt_sq(own[0].from),
            opt_sq(own[0].to),
            opt_sq(own[0].capture),
            opt_sq(opp[0].capture),
        )?;
        if self.ply != 0 {
            write!(f, " ply={}", self.ply)?;
        }
        if opp[0].from.is_some() || opp[0].to.is_some() {
            write!(f, " opp={},{}", opt_sq(opp[0].from), opt_sq(opp[0].to))?;
        }
        if !own[1].is_none() || !opp[1].is_none() {
            write!(
                f,
                " prev={},{},{},{},{},{}",
                opt_sq(own[1].from),
                opt_sq(own[1].to),
                opt_sq(own[1].capture),
                opt_sq(opp[1].from),
                opt_sq(opp[1].to),
                opt_sq(opp[1].capture)
            )?;
        }
        if self.before_colors != self.colors || self.before_kinds != self.kinds {
            f.write_str(" before=")?;
            write_board(f, &self.before_colors, &self.before_kinds)?;
        }
        Ok(())
    }
}

impl FromStr for WorldState {
    type Err = ParseError;

    /// Parses the format written by `Display`. The side may also be joined
    /// to the board with a slash (`<board>/w`).
    fn from_str(text: &str) -> Result<WorldState, ParseError> {
        let err = |what: &str| ParseError::State(format!("{what} in {text:?}"));
        let mut fields: Vec<&str> = text.split_whitespace().collect();
        if fields.first().is_some_and(|b| b.matches('/').count() == 8) {
            let joined = fields.remove(0);
            let (board, side) = joined.rsplit_once('/').unwrap();
            fields.insert(0, side);
            fields.insert(0, board);
        }
        if fields.len() < 9 {
            return Err(err("expected at least 9 fields"));
        }
        let side = match fields[1] {
            "w" => Color::White,
            "b" => Color::Black,
            _ => return Err(err("bad side")),
        };
        let phase = match fields[2] {
            "s" => Phase::Sense,
            "m" => Phase::Move,
            _ => return Err(err("bad phase")),
        };
        let castling: CastlingRights = fields[3].parse()?;
        let mut s = WorldState::from_board(fields[0], side, phase, castling)?;
        s.set_en_passant(parse_opt_sq(fields[4])?);
        let us = side.index();
        let them = 1 - us;
        s.memo[us][0] = MoveMemo {
            from: parse_opt_sq(fields[5])?,
            to: parse_opt_sq(fields[6])?,
            capture: parse_opt_sq(fields[7])?,
        };
        s.memo[them][0].capture = parse_opt_sq(fields[8])?;
        for ext in &fields[9..] {
            let (key, value) = ext.split_once('=').ok_or_else(|| err("bad extension field"))?;
            match key {
                "ply" => s.ply = value.parse().map_err(|_| err("bad ply"))?,
                "opp" => {
                    let v: Vec<&str> = value.split(',').collect();
                    if v.len() != 2 {
                        return Err(err("bad opp"));
                    }
                    s.memo[them][0].from = parse_opt_sq(v[0])?;
                    s.memo[them][0].to = parse_opt_sq(v[1])?;
                }
                "prev" => {
                    let v: Vec<&str> = value.split(',').collect();
                    if v.len() != 6 {
                        return Err(err("bad prev"));
                    }
                    s.memo[us][1] =
                        MoveMemo { from: parse_opt_sq(v[0])?, to: parse_opt_sq(v[1])?, capture: parse_opt_sq(v[2])? };
                    s.memo[them][1] =
                        MoveMemo { from: parse_opt_sq(v[3])?, to: parse_opt_sq(v[4])?, capture: parse_opt_sq(v[5])? };
                }
                "before" => {
                    s.before_colors = [Bitboard::EMPTY; 2];
                    s.before_kinds = [Bitboard::EMPTY; 6];
                    for (sq, p) in parse_board(value)? {
                        s.before_colors[p.color.index()].insert(sq);
                        s.before_kinds[p.kind.index()].insert(sq);
                    }
                }
                _ => return Err(err("unknown extension field")),
            }
        }
        Ok(s)
    }
}
