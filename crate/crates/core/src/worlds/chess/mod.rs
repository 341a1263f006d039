//! Chess seen through a one-square eye.
//!
//! The agent plays White. It moves an eye over the board and sees the piece
//! under it; it picks a piece up and puts it down elsewhere to move. Black
//! answers at once with a greedy opponent. Moves are pseudo-legal: there is
//! no check, castling, en passant or promotion, and a game ends when a king
//! is captured, when the side to move has no move, or at the ply cap.
//!
//! Within one step the command acts on the square under the eye first, then
//! the eye moves. A step is incorrect as a whole when either part is.

mod board;
mod snapshot;

use serde::{Deserialize, Serialize};

pub use board::{opponent_move, Board, Move, Piece, Side, Square};

use crate::error::{EventError, WorldError};
use crate::interval::IntervalDistribution;
use crate::noise::NoiseDescriptor;
use crate::prob::{self, Prob};
use crate::signature::{Action, Coordinate, MoveGroup, Observation, ScalarSignature};
use crate::theory::{GroupingAutomaton, GroupingRuleSpec, GroupingSpec};
use crate::world::{CumulativeState, WorldModel};

pub const COORD_CHESSMAN: usize = 0;
pub const COORD_COLOR: usize = 1;
pub const COORD_REWARD: usize = 2;

const H_LEFT: u32 = 1;
const H_RIGHT: u32 = 2;
const V_UP: u32 = 1;
const V_DOWN: u32 = 2;
const CMD_PICK_UP: u32 = 1;
const CMD_PUT_DOWN: u32 = 2;
const CMD_NEW_GAME: u32 = 3;

/// Variables per square in the cumulative projection: the three visible
/// ones and the hand.
pub const CUMULATIVE_WIDTH: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChessConfig {
    #[serde(default = "default_opponent")]
    pub opponent: String,
    #[serde(default = "default_ten_percent")]
    pub noise_color_volume: f64,
    #[serde(default = "default_ten_percent")]
    pub noise_chessman_volume: f64,
    #[serde(default = "default_king_volume")]
    pub noise_king_volume: f64,
    #[serde(default = "default_move_cap")]
    pub move_cap: u32,
}

fn default_opponent() -> String {
    "greedy-capture".into()
}
fn default_ten_percent() -> f64 {
    0.10
}
fn default_king_volume() -> f64 {
    0.05
}
fn default_move_cap() -> u32 {
    200
}

impl Default for ChessConfig {
    fn default() -> Self {
        ChessConfig {
            opponent: default_opponent(),
            noise_color_volume: default_ten_percent(),
            noise_chessman_volume: default_ten_percent(),
            noise_king_volume: default_king_volume(),
            move_cap: default_move_cap(),
        }
    }
}

impl ChessConfig {
    pub fn noiseless() -> Self {
        ChessConfig {
            noise_color_volume: 0.0,
            noise_chessman_volume: 0.0,
            noise_king_volume: 0.0,
            ..ChessConfig::default()
        }
    }
}

/// Game result from White's side.
pub type GameResult = i8;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChessState {
    pub board: Board,
    pub eye: Square,
    /// The piece being carried and the square it was lifted from.
    pub hand: Option<(Piece, Square)>,
    /// Set once the game is over.
    pub result: Option<GameResult>,
    /// Result shown on this step only: the step that ended the game.
    pub shown: Option<GameResult>,
    /// Half-moves played in the current game.
    pub plies: u32,
}

impl ChessState {
    pub fn new_game(eye: Square) -> Self {
        ChessState {
            board: Board::initial(),
            eye,
            hand: None,
            result: None,
            shown: None,
            plies: 0,
        }
    }

    pub fn is_over(&self) -> bool {
        self.result.is_some()
    }

    /// Structural invariants: a carried piece's origin is empty and each side
    /// has at most one king.
    pub fn check_invariants(&self) -> Result<(), String> {
        if let Some((_, origin)) = self.hand {
            if self.board.get(origin).is_some() {
                return Err(format!("origin square {origin} of the carried piece is occupied"));
            }
        }
        for side in [Side::White, Side::Black] {
            let kings = self
                .board
                .pieces()
                .filter(|(_, s, p)| *s == side && *p == Piece::King)
                .count();
            if kings > 1 {
                return Err(format!("{side:?} has {kings} kings"));
            }
        }
        Ok(())
    }
}

fn reward_code(r: Option<GameResult>) -> u32 {
    match r {
        None => 0,
        Some(-1) => 1,
        Some(0) => 2,
        Some(_) => 3,
    }
}

#[derive(Clone, Debug)]
pub struct ChessWorld {
    signature: ScalarSignature,
    config: ChessConfig,
    color_noise: NoiseDescriptor,
    chessman_noise: NoiseDescriptor,
    king_noise: NoiseDescriptor,
}

pub fn chess_signature() -> ScalarSignature {
    let actions = vec![
        Coordinate::new("h", ["Nothing", "Left", "Right"]),
        Coordinate::new("v", ["Nothing", "Up", "Down"]),
        Coordinate::new("cmd", ["Nothing", "PickUp", "PutDown", "NewGame"]),
    ];
    let observations = vec![
        Coordinate::new("chessman", ["Nothing", "Pawn", "Knight", "Bishop", "Rook", "Queen", "King"]),
        Coordinate::new("color", ["Nothing", "Black", "White"]),
        Coordinate::new("reward", ["Nothing", "-1", "0", "1"]),
    ];
    let group = |name: &str, cmd| MoveGroup {
        name: name.into(),
        pattern: vec![None, None, Some(cmd)],
    };
    ScalarSignature::new(actions, observations)
        .and_then(|s| {
            s.with_groups(vec![
                group("pick_up", CMD_PICK_UP),
                group("put_down", CMD_PUT_DOWN),
                group("new_game", CMD_NEW_GAME),
            ])
        })
        .expect("static signature is valid")
}

fn volume(v: f64, what: &str) -> Result<Prob, WorldError> {
    if !(0.0..=1.0).contains(&v) {
        return Err(WorldError::MalformedNoise(format!("{what} volume {v} is outside [0, 1]")));
    }
    Ok(prob::from_f64(v))
}

impl ChessWorld {
    pub fn new(config: ChessConfig) -> Result<Self, WorldError> {
        if config.opponent != "greedy-capture" {
            return Err(WorldError::MalformedWorld(format!(
                "unknown opponent `{}`; only `greedy-capture` is available",
                config.opponent
            )));
        }
        if config.move_cap == 0 {
            return Err(WorldError::MalformedWorld("move_cap must be positive".into()));
        }
        let half = prob::ratio(1, 2);
        let z = prob::zero();
        let color_noise = NoiseDescriptor::new(
            volume(config.noise_color_volume, "color")?,
            vec![z.clone(), half.clone(), half.clone()],
        )?;
        let mut man = vec![z.clone(); 7];
        man[Piece::Pawn.code() as usize] = half.clone();
        man[Piece::Bishop.code() as usize] = half;
        let chessman_noise = NoiseDescriptor::new(volume(config.noise_chessman_volume, "chessman")?, man)?;
        let mut king = vec![z; 7];
        king[Piece::Queen.code() as usize] = prob::one();
        let king_noise = NoiseDescriptor::new(volume(config.noise_king_volume, "king")?, king)?;
        Ok(ChessWorld {
            signature: chess_signature(),
            config,
            color_noise,
            chessman_noise,
            king_noise,
        })
    }

    pub fn config(&self) -> &ChessConfig {
        &self.config
    }

    pub fn start_square() -> Square {
        Square::new(4, 1)
    }

    fn eye_target(state: &ChessState, action: &Action) -> Option<Square> {
        let df = match action.0[0] {
            H_LEFT => -1,
            H_RIGHT => 1,
            _ => 0,
        };
        let dr = match action.0[1] {
            V_UP => 1,
            V_DOWN => -1,
            _ => 0,
        };
        state.eye.offset(df, dr)
    }

    fn command_allowed(state: &ChessState, cmd: u32) -> bool {
        let here = state.eye;
        match cmd {
            CMD_PICK_UP => {
                !state.is_over()
                    && state.hand.is_none()
                    && matches!(state.board.get(here), Some((Side::White, p))
                        if !state.board.destinations(here, Side::White, p).is_empty())
            }
            CMD_PUT_DOWN => match state.hand {
                Some((piece, origin)) if !state.is_over() && origin != here => {
                    let mut b = state.board.clone();
                    b.set(origin, Some((Side::White, piece)));
                    b.destinations(origin, Side::White, piece).contains(&here)
                }
                _ => false,
            },
            CMD_NEW_GAME => state.is_over(),
            _ => true,
        }
    }

    /// Deterministic successor, or `None` for an incorrect move.
    pub fn advance(&self, state: &ChessState, action: &Action) -> Option<ChessState> {
        let eye = Self::eye_target(state, action)?;
        let cmd = action.0[2];
        if !Self::command_allowed(state, cmd) {
            return None;
        }
        let mut next = state.clone();
        next.shown = None;
        match cmd {
            CMD_PICK_UP => {
                let (_, piece) = next.board.get(state.eye).expect("checked");
                next.board.set(state.eye, None);
                next.hand = Some((piece, state.eye));
            }
            CMD_PUT_DOWN => {
                let (piece, origin) = next.hand.take().expect("checked");
                next.board.set(origin, Some((Side::White, piece)));
                let captured = next.board.apply(Move { from: origin, to: state.eye });
                next.plies += 1;
                let result = if captured == Some((Side::Black, Piece::King)) {
                    Some(1)
                } else {
                    self.reply(&mut next)
                };
                if result.is_some() {
                    next.result = result;
                    next.shown = result;
                }
            }
            CMD_NEW_GAME => {
                next = ChessState::new_game(eye);
            }
            _ => {}
        }
        next.eye = eye;
        Some(next)
    }

    /// Black's answer; returns the game result if the game ends.
    fn reply(&self, state: &mut ChessState) -> Option<GameResult> {
        let Some(mv) = opponent_move(&state.board, Side::Black) else {
            return Some(0);
        };
        let captured = state.board.apply(mv);
        state.plies += 1;
        if captured == Some((Side::White, Piece::King)) {
            return Some(-1);
        }
        if state.plies >= self.config.move_cap || state.board.moves(Side::White).is_empty() {
            return Some(0);
        }
        None
    }

    /// The state as a cumulative state: the eye's square is the standard
    /// state and every square carries chessman, color, reward and hand.
    pub fn cumulative(&self, state: &ChessState) -> CumulativeState {
        let mut assignment = vec![0u32; 64 * CUMULATIVE_WIDTH];
        let reward = reward_code(state.shown);
        for i in 0..64u8 {
            let base = i as usize * CUMULATIVE_WIDTH;
            if let Some((side, piece)) = state.board.get(Square(i)) {
                assignment[base] = piece.code();
                assignment[base + 1] = side.code();
            }
            assignment[base + 2] = reward;
        }
        if let Some((piece, origin)) = state.hand {
            assignment[origin.0 as usize * CUMULATIVE_WIDTH + 3] = piece.code();
        }
        CumulativeState {
            standard: state.eye.0 as usize,
            assignment,
        }
    }

    pub fn snapshot(&self, state: &ChessState) -> String {
        snapshot::write(state)
    }

    pub fn parse_snapshot(&self, text: &str) -> Result<ChessState, WorldError> {
        let state = snapshot::parse(text).map_err(WorldError::MalformedWorld)?;
        state.check_invariants().map_err(WorldError::MalformedWorld)?;
        Ok(state)
    }
}

impl WorldModel for ChessWorld {
    type State = ChessState;

    fn signature(&self) -> &ScalarSignature {
        &self.signature
    }

    fn initial_state(&self) -> ChessState {
        ChessState::new_game(Self::start_square())
    }

    fn transition(
        &self,
        state: &ChessState,
        action: &Action,
    ) -> Result<Option<IntervalDistribution<ChessState>>, WorldError> {
        Ok(self.advance(state, action).map(IntervalDistribution::certain))
    }

    fn is_correct(&self, state: &ChessState, action: &Action) -> Result<bool, WorldError> {
        Ok(Self::eye_target(state, action).is_some() && Self::command_allowed(state, action.0[2]))
    }

    fn visible(&self, state: &ChessState) -> Observation {
        let (man, color) = match state.board.get(state.eye) {
            Some((side, piece)) => (piece.code(), side.code()),
            None => (0, 0),
        };
        Observation(vec![man, color, reward_code(state.shown)])
    }

    fn noise(&self, state: &ChessState, coord: usize) -> Option<&NoiseDescriptor> {
        let (_, piece) = state.board.get(state.eye)?;
        match coord {
            COORD_CHESSMAN => match piece {
                Piece::Pawn | Piece::Bishop => Some(&self.chessman_noise),
                Piece::King => Some(&self.king_noise),
                _ => None,
            },
            COORD_COLOR => Some(&self.color_noise),
            _ => None,
        }
    }
}

/// Groups for chess: playing with empty hands, holding a piece, and the
/// stretch after a game ended until the next one starts.
pub fn chess_grouping() -> Result<GroupingAutomaton, EventError> {
    let rule = |on: &str, to: &str| GroupingRuleSpec {
        from: "*".into(),
        on: on.into(),
        to: to.into(),
    };
    let spec = GroupingSpec {
        groups: vec!["normal".into(), "holding".into(), "over".into()],
        initial: "normal".into(),
        rules: vec![
            rule("⟨cmd=NewGame;*⟩", "normal"),
            rule("⟨*;reward=-1⟩", "over"),
            rule("⟨*;reward=0⟩", "over"),
            rule("⟨*;reward=1⟩", "over"),
            rule("⟨cmd=PickUp;*⟩", "holding"),
            rule("⟨cmd=PutDown;*⟩", "normal"),
        ],
    };
    GroupingAutomaton::from_spec(&spec, &chess_signature())
}
