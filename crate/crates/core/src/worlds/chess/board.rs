//! Board representation and pseudo-legal move generation.
//!
//! No check, castling, en passant or promotion: kings can be captured, and a
//! pawn on the last rank simply has no moves.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Piece {
    Pawn,
    Knight,
    Bishop,
    Rook,
    Queen,
    King,
}

impl Piece {
    pub const ALL: [Piece; 6] = [Piece::Pawn, Piece::Knight, Piece::Bishop, Piece::Rook, Piece::Queen, Piece::King];

    pub fn value(self) -> u32 {
        match self {
            Piece::Pawn => 1,
            Piece::Knight | Piece::Bishop => 3,
            Piece::Rook => 5,
            Piece::Queen => 9,
            Piece::King => 1000,
        }
    }

    /// Index in the `chessman` observation, where 0 is `Nothing`.
    pub fn code(self) -> u32 {
        self as u32 + 1
    }

    pub fn from_code(code: u32) -> Option<Piece> {
        Piece::ALL.get((code as usize).checked_sub(1)?).copied()
    }

    pub fn letter(self) -> char {
        match self {
            Piece::Pawn => 'p',
            Piece::Knight => 'n',
            Piece::Bishop => 'b',
            Piece::Rook => 'r',
            Piece::Queen => 'q',
            Piece::King => 'k',
        }
    }

    pub fn from_letter(c: char) -> Option<Piece> {
        Piece::ALL.into_iter().find(|p| p.letter() == c.to_ascii_lowercase())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    White,
    Black,
}

impl Side {
    /// Index in the `color` observation.
    pub fn code(self) -> u32 {
        match self {
            Side::Black => 1,
            Side::White => 2,
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::White => Side::Black,
            Side::Black => Side::White,
        }
    }
}

/// Square index `file * 8 + rank`, so numeric order is file-major.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Square(pub u8);

impl Square {
    pub fn new(file: u8, rank: u8) -> Square {
        debug_assert!(file < 8 && rank < 8);
        Square(file * 8 + rank)
    }

    pub fn file(self) -> u8 {
        self.0 / 8
    }

    pub fn rank(self) -> u8 {
        self.0 % 8
    }

    pub fn offset(self, df: i8, dr: i8) -> Option<Square> {
        let f = self.file() as i8 + df;
        let r = self.rank() as i8 + dr;
        ((0..8).contains(&f) && (0..8).contains(&r)).then(|| Square::new(f as u8, r as u8))
    }

    pub fn parse(text: &str) -> Option<Square> {
        let mut chars = text.chars();
        let f = chars.next()?;
        let r = chars.next()?;
        if chars.next().is_some() || !('a'..='h').contains(&f) || !('1'..='8').contains(&r) {
            return None;
        }
        Some(Square::new(f as u8 - b'a', r as u8 - b'1'))
    }
}

impl fmt::Display for Square {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", (b'a' + self.file()) as char, self.rank() + 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Move {
    pub from: Square,
    pub to: Square,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Board {
    squares: [Option<(Side, Piece)>; 64],
}

const KNIGHT: [(i8, i8); 8] = [(1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2)];
const KING: [(i8, i8); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];
const ROOK: [(i8, i8); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];
const BISHOP: [(i8, i8); 4] = [(1, 1), (-1, 1), (-1, -1), (1, -1)];

impl Board {
    pub fn empty() -> Board {
        Board { squares: [None; 64] }
    }

    pub fn initial() -> Board {
        let mut b = Board::empty();
        let back = [
            Piece::Rook,
            Piece::Knight,
            Piece::Bishop,
            Piece::Queen,
            Piece::King,
            Piece::Bishop,
            Piece::Knight,
            Piece::Rook,
        ];
        for (file, piece) in back.into_iter().enumerate() {
            let file = file as u8;
            b.set(Square::new(file, 0), Some((Side::White, piece)));
            b.set(Square::new(file, 1), Some((Side::White, Piece::Pawn)));
            b.set(Square::new(file, 6), Some((Side::Black, Piece::Pawn)));
            b.set(Square::new(file, 7), Some((Side::Black, piece)));
        }
        b
    }

    pub fn get(&self, sq: Square) -> Option<(Side, Piece)> {
        self.squares[sq.0 as usize]
    }

    pub fn set(&mut self, sq: Square, content: Option<(Side, Piece)>) {
        self.squares[sq.0 as usize] = content;
    }

    pub fn pieces(&self) -> impl Iterator<Item = (Square, Side, Piece)> + '_ {
        self.squares
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|(s, p)| (Square(i as u8), s, p)))
    }

    pub fn count(&self, side: Side) -> usize {
        self.pieces().filter(|(_, s, _)| *s == side).count()
    }

    /// Destinations of the piece `piece` of `side` standing on `from`.
    pub fn destinations(&self, from: Square, side: Side, piece: Piece) -> Vec<Square> {
        let mut out = Vec::new();
        let free_or_enemy = |sq: Square| self.get(sq).is_none_or(|(s, _)| s != side);
        match piece {
            Piece::Pawn => {
                let dir: i8 = if side == Side::White { 1 } else { -1 };
                let home = if side == Side::White { 1 } else { 6 };
                if let Some(one) = from.offset(0, dir) {
                    if self.get(one).is_none() {
                        out.push(one);
                        if from.rank() == home {
                            if let Some(two) = from.offset(0, 2 * dir) {
                                if self.get(two).is_none() {
                                    out.push(two);
                                }
                            }
                        }
                    }
                }
                for df in [-1, 1] {
                    if let Some(sq) = from.offset(df, dir) {
                        if self.get(sq).is_some_and(|(s, _)| s != side) {
                            out.push(sq);
                        }
                    }
                }
            }
            Piece::Knight | Piece::King => {
                let deltas = if piece == Piece::Knight { &KNIGHT } else { &KING };
                out.extend(deltas.iter().filter_map(|(df, dr)| from.offset(*df, *dr)).filter(|sq| free_or_enemy(*sq)));
            }
            Piece::Bishop | Piece::Rook | Piece::Queen => {
                let dirs: Vec<(i8, i8)> = match piece {
                    Piece::Bishop => BISHOP.to_vec(),
                    Piece::Rook => ROOK.to_vec(),
                    _ => ROOK.iter().chain(&BISHOP).copied().collect(),
                };
                for (df, dr) in dirs {
                    let mut sq = from;
                    while let Some(next) = sq.offset(df, dr) {
                        match self.get(next) {
                            None => out.push(next),
                            Some((s, _)) => {
                                if s != side {
                                    out.push(next);
                                }
                                break;
                            }
                        }
                        sq = next;
                    }
                }
            }
        }
        out.sort();
        out
    }

    /// Every pseudo-legal move of `side`, sorted by `(from, to)`.
    pub fn moves(&self, side: Side) -> Vec<Move> {
        let mut out: Vec<Move> = self
            .pieces()
            .filter(|(_, s, _)| *s == side)
            .flat_map(|(from, s, p)| self.destinations(from, s, p).into_iter().map(move |to| Move { from, to }))
            .collect();
        out.sort();
        out
    }

    /// Moves `mv`; returns what was captured.
    pub fn apply(&mut self, mv: Move) -> Option<(Side, Piece)> {
        let moving = self.get(mv.from);
        let captured = self.get(mv.to);
        self.set(mv.to, moving);
        self.set(mv.from, None);
        captured
    }
}

/// The opponent's move: the most valuable capture, else the first move, with
/// ties broken by the smallest `(from, to)`.
pub fn opponent_move(board: &Board, side: Side) -> Option<Move> {
    let moves = board.moves(side);
    let best_capture = moves
        .iter()
        .filter_map(|m| board.get(m.to).map(|(_, p)| (p.value(), *m)))
        .max_by(|(va, ma), (vb, mb)| va.cmp(vb).then(mb.cmp(ma)))
        .map(|(_, m)| m);
    best_capture.or_else(|| moves.first().copied())
}
