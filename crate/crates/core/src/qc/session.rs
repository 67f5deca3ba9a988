use serde::{Deserialize, Serialize};

use super::{gold_check, GoldOutcome, DEFAULT_GOLD_IOU};
use crate::annotations::BBox;
use crate::error::{Error, Result};

pub const HIT_SIZE: usize = 50;
pub const GOLD_PER_HIT: usize = 3;
pub const STARTING_LIVES: u8 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitImage {
    pub image_id: String,
    /// Verified faces when this is a gold-standard image.
    #[serde(default)]
    pub gold: Option<Vec<BBox>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SessionEvent {
    Advanced {
        index: usize,
    },
    GoldPassed {
        index: usize,
    },
    /// The worker is shown `revealed`, the verified faces.
    GoldMistake {
        index: usize,
        lives_left: u8,
        revealed: Vec<BBox>,
    },
    /// All lives lost at `index`; progress reset to the first image.
    Restarted {
        index: usize,
    },
    Completed {
        index: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepOutcome {
    Advanced,
    GoldPassed,
    Mistake { lives_left: u8 },
    Restarted,
    Completed,
}

/// One worker's pass over a HIT: 50 images, 3 of them gold, 2 lives.
///
/// A mistake on a gold image costs a life and keeps the worker on that image;
/// losing the last life restarts the HIT from the first image with full lives.
/// The event log survives restarts.
#[derive(Debug, Clone, PartialEq)]
pub struct QcSession {
    images: Vec<HitImage>,
    tau_gold: f64,
    index: usize,
    lives: u8,
    completed: bool,
    restarts: usize,
    events: Vec<SessionEvent>,
}

impl QcSession {
    pub fn new(images: Vec<HitImage>) -> Result<Self> {
        Self::with_threshold(images, DEFAULT_GOLD_IOU)
    }

    pub fn with_threshold(images: Vec<HitImage>, tau_gold: f64) -> Result<Self> {
        if images.len() != HIT_SIZE {
            return Err(Error::Validation(format!(
                "a HIT holds {HIT_SIZE} images, got {}",
                images.len()
            )));
        }
        let golds = images.iter().filter(|i| i.gold.is_some()).count();
        if golds != GOLD_PER_HIT {
            return Err(Error::Validation(format!(
                "a HIT holds {GOLD_PER_HIT} gold images, got {golds}"
            )));
        }
        if !(tau_gold > 0.0 && tau_gold <= 1.0) {
            return Err(Error::Argument(format!(
                "gold IoU threshold must lie in (0, 1], got {tau_gold}"
            )));
        }
        Ok(QcSession {
            images,
            tau_gold,
            index: 0,
            lives: STARTING_LIVES,
            completed: false,
            restarts: 0,
            events: Vec::new(),
        })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn lives(&self) -> u8 {
        self.lives
    }

    pub fn is_completed(&self) -> bool {
        self.completed
    }

    pub fn restarts(&self) -> usize {
        self.restarts
    }

    pub fn events(&self) -> &[SessionEvent] {
        &self.events
    }

    pub fn images(&self) -> &[HitImage] {
        &self.images
    }

    /// The image the next submission applies to, if not completed.
    pub fn current(&self) -> Option<&HitImage> {
        (!self.completed).then(|| &self.images[self.index])
    }

    pub fn step(&mut self, submission: &[BBox]) -> Result<StepOutcome> {
        if self.completed {
            return Err(Error::Argument("session already completed".into()));
        }
        let index = self.index;
        if let Some(gold) = &self.images[index].gold {
            if gold_check(submission, gold, self.tau_gold)? == GoldOutcome::Mistake {
                self.lives -= 1;
                self.events.push(SessionEvent::GoldMistake {
                    index,
                    lives_left: self.lives,
                    revealed: gold.clone(),
                });
                if self.lives > 0 {
                    return Ok(StepOutcome::Mistake {
                        lives_left: self.lives,
                    });
                }
                self.index = 0;
                self.lives = STARTING_LIVES;
                self.restarts += 1;
                self.events.push(SessionEvent::Restarted { index });
                return Ok(StepOutcome::Restarted);
            }
        }
        let gold = self.images[index].gold.is_some();
        self.index += 1;
        if self.index == self.images.len() {
            self.completed = true;
            self.events.push(SessionEvent::Completed { index });
            return Ok(StepOutcome::Completed);
        }
        if gold {
            self.events.push(SessionEvent::GoldPassed { index });
            Ok(StepOutcome::GoldPassed)
        } else {
            self.events.push(SessionEvent::Advanced { index });
            Ok(StepOutcome::Advanced)
        }
    }
}

/// Value-style step: returns the successor state.
pub fn session_step(session: &QcSession, submission: &[BBox]) -> Result<QcSession> {
    let mut next = session.clone();
    next.step(submission)?;
    Ok(next)
}
