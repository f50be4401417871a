//! Grid-world engine for the GoToObj task family.
//!
//! The receiver navigates a small walled grid and must end up facing the
//! object named by the instruction. Observations come in two flavours: the
//! receiver sees only the cell it occupies and the cell it faces, while the
//! sender sees the whole grid (including the receiver) but not the
//! instruction.

mod bfs;
mod env;

pub use bfs::{shortest_path_steps, BfsError};
pub use env::{reset, EnvState, Step};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Grid coordinates, `x` is the column and `y` the row, both 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Position {
    pub x: usize,
    pub y: usize,
}

impl Position {
    pub fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }
}

/// Facing of the receiver. Turning right cycles East -> South -> West -> North.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    East,
    South,
    West,
    North,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::East,
        Direction::South,
        Direction::West,
        Direction::North,
    ];

    pub fn index(self) -> usize {
        match self {
            Direction::East => 0,
            Direction::South => 1,
            Direction::West => 2,
            Direction::North => 3,
        }
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i % 4]
    }

    pub fn left(self) -> Self {
        Self::from_index((self.index() + 3) % 4)
    }

    pub fn right(self) -> Self {
        Self::from_index((self.index() + 1) % 4)
    }

    /// Unit displacement (dx, dy) of one forward move.
    pub fn delta(self) -> (i64, i64) {
        match self {
            Direction::East => (1, 0),
            Direction::South => (0, 1),
            Direction::West => (-1, 0),
            Direction::North => (0, -1),
        }
    }
}

/// The six object/door colors used by every environment family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Color {
    Red,
    Green,
    Blue,
    Purple,
    Yellow,
    Grey,
}

impl Color {
    pub const ALL: [Color; 6] = [
        Color::Red,
        Color::Green,
        Color::Blue,
        Color::Purple,
        Color::Yellow,
        Color::Grey,
    ];

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|c| *c == self).unwrap()
    }

    pub fn name(self) -> &'static str {
        match self {
            Color::Red => "red",
            Color::Green => "green",
            Color::Blue => "blue",
            Color::Purple => "purple",
            Color::Yellow => "yellow",
            Color::Grey => "grey",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObjectKind {
    Key,
    Ball,
    Box,
}

impl ObjectKind {
    pub const ALL: [ObjectKind; 3] = [ObjectKind::Key, ObjectKind::Ball, ObjectKind::Box];

    pub fn name(self) -> &'static str {
        match self {
            ObjectKind::Key => "key",
            ObjectKind::Ball => "ball",
            ObjectKind::Box => "box",
        }
    }
}

/// A placeable object: one of three kinds in one of six colors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WorldObject {
    pub kind: ObjectKind,
    pub color: Color,
}

/// Contents of a single grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cell {
    Floor,
    Wall,
    Door {
        color: Color,
        locked: bool,
        open: bool,
    },
    Object(WorldObject),
}

impl Cell {
    /// Can the receiver stand on this cell?
    pub fn traversable(self) -> bool {
        matches!(self, Cell::Floor | Cell::Door { open: true, .. })
    }
}

/// The seven discrete receiver actions. Index order is fixed: turning left
/// and right are actions 0 and 1, moving forward is action 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    TurnLeft,
    TurnRight,
    Forward,
    Pickup,
    Drop,
    Toggle,
    Done,
}

pub const ACTION_COUNT: usize = 7;

impl Action {
    pub const ALL: [Action; ACTION_COUNT] = [
        Action::TurnLeft,
        Action::TurnRight,
        Action::Forward,
        Action::Pickup,
        Action::Drop,
        Action::Toggle,
        Action::Done,
    ];

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|a| *a == self).unwrap()
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::TurnLeft => "left",
            Action::TurnRight => "right",
            Action::Forward => "forward",
            Action::Pickup => "pickup",
            Action::Drop => "drop",
            Action::Toggle => "toggle",
            Action::Done => "done",
        }
    }
}

/// Word ids for the closed instruction template "go to the <color> <kind>".
pub const INSTRUCTION_WORDS: [&str; 12] = [
    "go", "to", "the", "red", "green", "blue", "purple", "yellow", "grey", "key", "ball", "box",
];

pub const INSTRUCTION_VOCAB: usize = INSTRUCTION_WORDS.len();
/// Token count of every rendered instruction.
pub const INSTRUCTION_LEN: usize = 5;

/// Goal specification shown only to the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Instruction {
    pub color: Color,
    pub kind: ObjectKind,
}

impl Instruction {
    /// Word-id rendering of "go to the <color> <kind>".
    pub fn tokens(&self) -> [usize; INSTRUCTION_LEN] {
        let color_id = 3 + self.color.index();
        let kind_id = 9 + match self.kind {
            ObjectKind::Key => 0,
            ObjectKind::Ball => 1,
            ObjectKind::Box => 2,
        };
        [0, 1, 2, color_id, kind_id]
    }

    pub fn text(&self) -> String {
        format!("go to the {} {}", self.color.name(), self.kind.name())
    }

    pub fn matches(&self, obj: WorldObject) -> bool {
        obj.kind == self.kind && obj.color == self.color
    }
}

/// Environment family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnvFamily {
    GoToObj,
    GoToObjUnlocked,
    GoToObjLockedUnambiguous,
    GoToObjLockedAmbiguous,
}

impl EnvFamily {
    pub const ALL: [EnvFamily; 4] = [
        EnvFamily::GoToObj,
        EnvFamily::GoToObjUnlocked,
        EnvFamily::GoToObjLockedUnambiguous,
        EnvFamily::GoToObjLockedAmbiguous,
    ];

    /// Grid side length (grids are square).
    pub fn grid_size(self) -> usize {
        match self {
            EnvFamily::GoToObj => 8,
            _ => 9,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EnvFamily::GoToObj => "GoToObj",
            EnvFamily::GoToObjUnlocked => "GoToObjUnlocked",
            EnvFamily::GoToObjLockedUnambiguous => "GoToObjLocked1",
            EnvFamily::GoToObjLockedAmbiguous => "GoToObjLocked2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "GoToObj" | "gotoobj" => Some(EnvFamily::GoToObj),
            "GoToObjUnlocked" | "unlocked" => Some(EnvFamily::GoToObjUnlocked),
            "GoToObjLocked1" | "GoToObjLockedUnambiguous" | "locked1" => {
                Some(EnvFamily::GoToObjLockedUnambiguous)
            }
            "GoToObjLocked2" | "GoToObjLockedAmbiguous" | "locked2" => {
                Some(EnvFamily::GoToObjLockedAmbiguous)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub family: EnvFamily,
    pub max_steps: usize,
    pub seed: u64,
}

impl EnvConfig {
    pub fn new(family: EnvFamily) -> Self {
        Self {
            family,
            max_steps: 64,
            seed: 0,
        }
    }
}

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("max_steps must be >= 1")]
    InvalidMaxSteps,
    #[error("could not place all objects after {0} retries")]
    PlacementFailed(usize),
    #[error("step called on a finished episode")]
    EpisodeFinished,
}

// Cell encoding id tables. Every cell maps to a (kind, color, state) triple
// of small integers; the same table is shared by both observation kinds.
pub const KIND_UNSEEN: u8 = 0;
pub const KIND_FLOOR: u8 = 1;
pub const KIND_WALL: u8 = 2;
pub const KIND_DOOR: u8 = 3;
pub const KIND_KEY: u8 = 4;
pub const KIND_BALL: u8 = 5;
pub const KIND_BOX: u8 = 6;
pub const KIND_AGENT: u8 = 7;
pub const KIND_COUNT: usize = 8;

pub const STATE_DOOR_OPEN: u8 = 0;
pub const STATE_DOOR_CLOSED: u8 = 1;
pub const STATE_DOOR_LOCKED: u8 = 2;
/// States 0..3 double as the agent's direction index on the agent cell.
pub const STATE_COUNT: usize = 4;

pub const COLOR_COUNT: usize = 6;

/// (kind, color, state) id triple for one cell.
pub type CellCode = (u8, u8, u8);

pub const UNSEEN_CODE: CellCode = (KIND_UNSEEN, 0, 0);

pub fn encode_cell(cell: Cell) -> CellCode {
    match cell {
        Cell::Floor => (KIND_FLOOR, Color::Grey.index() as u8, 0),
        Cell::Wall => (KIND_WALL, Color::Grey.index() as u8, 0),
        Cell::Door {
            color,
            locked,
            open,
        } => {
            let state = if open {
                STATE_DOOR_OPEN
            } else if locked {
                STATE_DOOR_LOCKED
            } else {
                STATE_DOOR_CLOSED
            };
            (KIND_DOOR, color.index() as u8, state)
        }
        Cell::Object(obj) => {
            let kind = match obj.kind {
                ObjectKind::Key => KIND_KEY,
                ObjectKind::Ball => KIND_BALL,
                ObjectKind::Box => KIND_BOX,
            };
            (kind, obj.color.index() as u8, 0)
        }
    }
}

/// Receiver view: the occupied cell and the faced cell, padded to a 2x2
/// square. Real cells sit in the top row, the bottom row is the unseen code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReceiverObs {
    pub cells: [[CellCode; 2]; 2],
}

impl ReceiverObs {
    pub fn occupied(&self) -> CellCode {
        self.cells[0][0]
    }

    pub fn faced(&self) -> CellCode {
        self.cells[0][1]
    }
}

/// Sender view: the full square grid, with the receiver drawn onto its cell
/// as an agent code whose state id is the direction. Never contains the
/// instruction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SenderObs {
    pub size: usize,
    pub codes: Vec<CellCode>,
}

impl SenderObs {
    pub fn code_at(&self, x: usize, y: usize) -> CellCode {
        self.codes[y * self.size + x]
    }
}

pub(crate) fn random_color(rng: &mut impl Rng) -> Color {
    Color::ALL[rng.random_range(0..Color::ALL.len())]
}

/// Goal objects are always of a non-key kind so the instruction can never
/// name the door key.
pub(crate) fn random_goal_kind(rng: &mut impl Rng) -> ObjectKind {
    if rng.random_range(0..2) == 0 {
        ObjectKind::Ball
    } else {
        ObjectKind::Box
    }
}
