use super::*;
use rand::Rng;

const PLACEMENT_RETRIES: usize = 1000;

/// Full mutable episode state. `step` mutates in place; `reset` builds a
/// fresh one. Cloning is cheap enough for search and tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvState {
    pub width: usize,
    pub height: usize,
    pub grid: Vec<Cell>,
    pub agent_pos: Position,
    pub agent_dir: Direction,
    pub carrying: Option<WorldObject>,
    pub step_count: usize,
    pub max_steps: usize,
    pub goal: Instruction,
    pub done: bool,
}

/// Outcome of one environment step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub reward: f64,
    pub done: bool,
}

impl EnvState {
    pub fn cell(&self, pos: Position) -> Cell {
        self.grid[pos.y * self.width + pos.x]
    }

    pub fn set_cell(&mut self, pos: Position, cell: Cell) {
        self.grid[pos.y * self.width + pos.x] = cell;
    }

    /// Cell one step ahead of the agent, or None when that is off-grid.
    pub fn faced_pos(&self) -> Option<Position> {
        let (dx, dy) = self.agent_dir.delta();
        let x = self.agent_pos.x as i64 + dx;
        let y = self.agent_pos.y as i64 + dy;
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            None
        } else {
            Some(Position::new(x as usize, y as usize))
        }
    }

    pub fn faced_cell(&self) -> Option<Cell> {
        self.faced_pos().map(|p| self.cell(p))
    }

    /// True when the faced cell holds the instructed object.
    pub fn facing_goal(&self) -> bool {
        matches!(self.faced_cell(), Some(Cell::Object(obj)) if self.goal.matches(obj))
    }

    /// Advance the episode by one action.
    pub fn step(&mut self, action: Action) -> Result<Step, EnvError> {
        if self.done {
            return Err(EnvError::EpisodeFinished);
        }

        match action {
            Action::TurnLeft => self.agent_dir = self.agent_dir.left(),
            Action::TurnRight => self.agent_dir = self.agent_dir.right(),
            Action::Forward => {
                if let Some(target) = self.faced_pos() {
                    if self.cell(target).traversable() {
                        self.agent_pos = target;
                    }
                }
            }
            Action::Pickup => {
                if self.carrying.is_none() {
                    if let Some(pos) = self.faced_pos() {
                        if let Cell::Object(obj) = self.cell(pos) {
                            self.carrying = Some(obj);
                            self.set_cell(pos, Cell::Floor);
                        }
                    }
                }
            }
            Action::Drop => {
                if let (Some(obj), Some(pos)) = (self.carrying, self.faced_pos()) {
                    if self.cell(pos) == Cell::Floor {
                        self.set_cell(pos, Cell::Object(obj));
                        self.carrying = None;
                    }
                }
            }
            Action::Toggle => {
                if let Some(pos) = self.faced_pos() {
                    if let Cell::Door {
                        color,
                        locked,
                        open,
                    } = self.cell(pos)
                    {
                        if locked {
                            let has_key = matches!(
                                self.carrying,
                                Some(WorldObject { kind: ObjectKind::Key, color: c }) if c == color
                            );
                            if has_key {
                                self.set_cell(
                                    pos,
                                    Cell::Door {
                                        color,
                                        locked: false,
                                        open: true,
                                    },
                                );
                            }
                        } else {
                            self.set_cell(
                                pos,
                                Cell::Door {
                                    color,
                                    locked: false,
                                    open: !open,
                                },
                            );
                        }
                    }
                }
            }
            Action::Done => {}
        }

        self.step_count += 1;

        if self.facing_goal() {
            self.done = true;
            let frac = self.step_count as f64 / self.max_steps as f64;
            return Ok(Step {
                reward: 1.0 - 0.9 * frac,
                done: true,
            });
        }
        if self.step_count >= self.max_steps {
            self.done = true;
            return Ok(Step {
                reward: 0.0,
                done: true,
            });
        }
        Ok(Step {
            reward: 0.0,
            done: false,
        })
    }

    /// The two-cell receiver view padded to a 2x2 square.
    pub fn receiver_observation(&self) -> ReceiverObs {
        let occupied = encode_cell(self.cell(self.agent_pos));
        let faced = match self.faced_cell() {
            Some(cell) => encode_cell(cell),
            None => encode_cell(Cell::Wall),
        };
        ReceiverObs {
            cells: [[occupied, faced], [UNSEEN_CODE, UNSEEN_CODE]],
        }
    }

    /// The global sender view with the receiver drawn onto its cell.
    pub fn sender_observation(&self) -> SenderObs {
        debug_assert_eq!(self.width, self.height);
        let mut codes: Vec<CellCode> = self.grid.iter().map(|c| encode_cell(*c)).collect();
        codes[self.agent_pos.y * self.width + self.agent_pos.x] = (
            KIND_AGENT,
            Color::Red.index() as u8,
            self.agent_dir.index() as u8,
        );
        SenderObs {
            size: self.width,
            codes,
        }
    }

    /// Debug rendering; one char per cell, agent as <>^v.
    pub fn render_ascii(&self) -> String {
        let mut out = String::new();
        for y in 0..self.height {
            for x in 0..self.width {
                let pos = Position::new(x, y);
                let ch = if pos == self.agent_pos {
                    match self.agent_dir {
                        Direction::East => '>',
                        Direction::South => 'v',
                        Direction::West => '<',
                        Direction::North => '^',
                    }
                } else {
                    match self.cell(pos) {
                        Cell::Floor => '.',
                        Cell::Wall => '#',
                        Cell::Door { open: true, .. } => '/',
                        Cell::Door { locked: true, .. } => 'L',
                        Cell::Door { .. } => 'D',
                        Cell::Object(WorldObject { kind, color }) => {
                            let c = match kind {
                                ObjectKind::Key => 'k',
                                ObjectKind::Ball => 'b',
                                ObjectKind::Box => 'x',
                            };
                            if color == self.goal.color && kind == self.goal.kind {
                                c.to_ascii_uppercase()
                            } else {
                                c
                            }
                        }
                    }
                };
                out.push(ch);
            }
            out.push('\n');
        }
        out
    }

    /// All objects currently on the grid with their positions.
    pub fn objects(&self) -> Vec<(Position, WorldObject)> {
        let mut out = Vec::new();
        for y in 0..self.height {
            for x in 0..self.width {
                if let Cell::Object(obj) = self.cell(Position::new(x, y)) {
                    out.push((Position::new(x, y), obj));
                }
            }
        }
        out
    }

    /// Position of the (unique) object matching the instruction, if present.
    pub fn goal_position(&self) -> Option<Position> {
        self.objects()
            .into_iter()
            .find(|(_, obj)| self.goal.matches(*obj))
            .map(|(p, _)| p)
    }
}

/// Build a fresh episode for the configured family.
pub fn reset(config: &EnvConfig, rng: &mut impl Rng) -> Result<(EnvState, Instruction), EnvError> {
    if config.max_steps == 0 {
        return Err(EnvError::InvalidMaxSteps);
    }
    let state = match config.family {
        EnvFamily::GoToObj => gen_go_to_obj(config, rng)?,
        EnvFamily::GoToObjUnlocked => gen_two_rooms(config, rng, DoorMode::Unlocked, false)?,
        EnvFamily::GoToObjLockedUnambiguous => gen_two_rooms(config, rng, DoorMode::Locked, false)?,
        EnvFamily::GoToObjLockedAmbiguous => gen_two_rooms(config, rng, DoorMode::Locked, true)?,
    };
    let goal = state.goal;
    Ok((state, goal))
}

fn empty_state(size: usize, config: &EnvConfig) -> EnvState {
    EnvState {
        width: size,
        height: size,
        grid: vec![Cell::Wall; size * size],
        agent_pos: Position::new(1, 1),
        agent_dir: Direction::East,
        carrying: None,
        step_count: 0,
        max_steps: config.max_steps,
        goal: Instruction {
            color: Color::Red,
            kind: ObjectKind::Ball,
        },
        done: false,
    }
}

fn random_free_cell(
    state: &EnvState,
    rng: &mut impl Rng,
    xs: std::ops::RangeInclusive<usize>,
    ys: std::ops::RangeInclusive<usize>,
    taken: &[Position],
) -> Result<Position, EnvError> {
    for _ in 0..PLACEMENT_RETRIES {
        let x = rng.random_range(xs.clone());
        let y = rng.random_range(ys.clone());
        let pos = Position::new(x, y);
        if state.cell(pos) == Cell::Floor && !taken.contains(&pos) {
            return Ok(pos);
        }
    }
    Err(EnvError::PlacementFailed(PLACEMENT_RETRIES))
}

fn random_dir(rng: &mut impl Rng) -> Direction {
    Direction::from_index(rng.random_range(0..4))
}

/// 8x8 single room: perimeter walls, one non-key object, agent elsewhere.
fn gen_go_to_obj(config: &EnvConfig, rng: &mut impl Rng) -> Result<EnvState, EnvError> {
    let size = EnvFamily::GoToObj.grid_size();
    let mut state = empty_state(size, config);
    for y in 1..size - 1 {
        for x in 1..size - 1 {
            state.set_cell(Position::new(x, y), Cell::Floor);
        }
    }

    let goal_obj = WorldObject {
        kind: random_goal_kind(rng),
        color: random_color(rng),
    };
    let obj_pos = random_free_cell(&state, rng, 1..=size - 2, 1..=size - 2, &[])?;
    state.set_cell(obj_pos, Cell::Object(goal_obj));

    let agent_pos = random_free_cell(&state, rng, 1..=size - 2, 1..=size - 2, &[])?;
    state.agent_pos = agent_pos;
    state.agent_dir = random_dir(rng);
    state.goal = Instruction {
        color: goal_obj.color,
        kind: goal_obj.kind,
    };
    Ok(state)
}

enum DoorMode {
    Unlocked,
    Locked,
}

/// 9x9 custom map: two connected upper 3x3 rooms plus two unused bottom
/// rooms kept as padding so observations stay square.
fn gen_two_rooms(
    config: &EnvConfig,
    rng: &mut impl Rng,
    door_mode: DoorMode,
    distractor: bool,
) -> Result<EnvState, EnvError> {
    let size = 9;
    let mut state = empty_state(size, config);
    // Four 3x3 room interiors; only the two upper rooms are reachable.
    for (x0, y0) in [(1, 1), (5, 1), (1, 5), (5, 5)] {
        for y in y0..y0 + 3 {
            for x in x0..x0 + 3 {
                state.set_cell(Position::new(x, y), Cell::Floor);
            }
        }
    }

    let door_color = random_color(rng);
    let door_y = rng.random_range(1..=3);
    let locked = matches!(door_mode, DoorMode::Locked);
    state.set_cell(
        Position::new(4, door_y),
        Cell::Door {
            color: door_color,
            locked,
            open: false,
        },
    );

    let goal_obj = WorldObject {
        kind: random_goal_kind(rng),
        color: random_color(rng),
    };
    let goal_pos = random_free_cell(&state, rng, 5..=7, 1..=3, &[])?;
    state.set_cell(goal_pos, Cell::Object(goal_obj));

    if distractor {
        let mut obj = WorldObject {
            kind: random_goal_kind(rng),
            color: random_color(rng),
        };
        for _ in 0..PLACEMENT_RETRIES {
            if obj.kind != goal_obj.kind || obj.color != goal_obj.color {
                break;
            }
            obj = WorldObject {
                kind: random_goal_kind(rng),
                color: random_color(rng),
            };
        }
        if obj.kind == goal_obj.kind && obj.color == goal_obj.color {
            return Err(EnvError::PlacementFailed(PLACEMENT_RETRIES));
        }
        let pos = random_free_cell(&state, rng, 5..=7, 1..=3, &[])?;
        state.set_cell(pos, Cell::Object(obj));
    }

    if locked {
        let key_pos = random_free_cell(&state, rng, 1..=3, 1..=3, &[])?;
        state.set_cell(
            key_pos,
            Cell::Object(WorldObject {
                kind: ObjectKind::Key,
                color: door_color,
            }),
        );
    }

    let agent_pos = random_free_cell(&state, rng, 1..=3, 1..=3, &[])?;
    state.agent_pos = agent_pos;
    state.agent_dir = random_dir(rng);
    state.goal = Instruction {
        color: goal_obj.color,
        kind: goal_obj.kind,
    };
    Ok(state)
}
