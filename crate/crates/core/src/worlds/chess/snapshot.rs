//! FEN-like text form of a chess state:
//! `<placement> <eye> <hand> <result> <shown> <plies>`, where placement
//! lists ranks 8 to 1 with White in upper case, hand is `-` or a piece letter
//! and its origin (`Pe2`), and result and shown are `-`, `-1`, `0` or `1`.

use super::board::{Board, Piece, Side, Square};
use super::{ChessState, GameResult};

pub(super) fn write(state: &ChessState) -> String {
    let mut ranks = Vec::with_capacity(8);
    for rank in (0..8).rev() {
        let mut row = String::new();
        let mut gap = 0;
        for file in 0..8 {
            match state.board.get(Square::new(file, rank)) {
                None => gap += 1,
                Some((side, piece)) => {
                    if gap > 0 {
                        row.push_str(&gap.to_string());
                        gap = 0;
                    }
                    let c = piece.letter();
                    row.push(if side == Side::White { c.to_ascii_uppercase() } else { c });
                }
            }
        }
        if gap > 0 {
            row.push_str(&gap.to_string());
        }
        ranks.push(row);
    }
    let hand = match state.hand {
        Some((p, origin)) => format!("{}{origin}", p.letter().to_ascii_uppercase()),
        None => "-".into(),
    };
    let result = |r: Option<GameResult>| r.map_or("-".to_string(), |r| r.to_string());
    format!(
        "{} {} {} {} {} {}",
        ranks.join("/"),
        state.eye,
        hand,
        result(state.result),
        result(state.shown),
        state.plies
    )
}

fn parse_result(text: &str, field: &str) -> Result<Option<GameResult>, String> {
    match text {
        "-" => Ok(None),
        "-1" => Ok(Some(-1)),
        "0" => Ok(Some(0)),
        "1" => Ok(Some(1)),
        _ => Err(format!("{field} must be -, -1, 0 or 1, not `{text}`")),
    }
}

pub(super) fn parse(text: &str) -> Result<ChessState, String> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    let [placement, eye, hand, result, shown, plies] = fields[..] else {
        return Err(format!("expected 6 fields, found {}", fields.len()));
    };
    let rows: Vec<&str> = placement.split('/').collect();
    if rows.len() != 8 {
        return Err(format!("placement needs 8 ranks, found {}", rows.len()));
    }
    let mut board = Board::empty();
    for (i, row) in rows.iter().enumerate() {
        let rank = 7 - i as u8;
        let mut file = 0u8;
        for c in row.chars() {
            if let Some(d) = c.to_digit(10) {
                file += d as u8;
            } else {
                let piece = Piece::from_letter(c).ok_or_else(|| format!("unknown piece `{c}`"))?;
                if file >= 8 {
                    return Err(format!("rank {} is too long", rank + 1));
                }
                let side = if c.is_ascii_uppercase() { Side::White } else { Side::Black };
                board.set(Square::new(file, rank), Some((side, piece)));
                file += 1;
            }
        }
        if file != 8 {
            return Err(format!("rank {} covers {file} files, not 8", rank + 1));
        }
    }
    let eye = Square::parse(eye).ok_or_else(|| format!("bad eye square `{eye}`"))?;
    let hand = if hand == "-" {
        None
    } else {
        let mut chars = hand.chars();
        let piece = chars
            .next()
            .filter(char::is_ascii_uppercase)
            .and_then(Piece::from_letter)
            .ok_or_else(|| format!("bad hand `{hand}`"))?;
        let origin = Square::parse(chars.as_str()).ok_or_else(|| format!("bad hand `{hand}`"))?;
        Some((piece, origin))
    };
    Ok(ChessState {
        board,
        eye,
        hand,
        result: parse_result(result, "result")?,
        shown: parse_result(shown, "shown")?,
        plies: plies.parse().map_err(|_| format!("bad ply count `{plies}`"))?,
    })
}
