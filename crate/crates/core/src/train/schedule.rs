//! Validation-driven learning-rate decay and early-stopping bookkeeping.
//!
//! Two counters run side by side. `plateau` counts epochs without a strict
//! improvement since the last improvement or decay and triggers a decay when
//! it reaches `plateau_epochs`. `since_improvement` is reset only by an
//! improvement and drives early stopping.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleEvent {
    pub improved: bool,
    pub decayed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    pub epoch: usize,
    pub initial_lr: f64,
    pub decay_factor: f64,
    pub plateau_epochs: usize,
    pub best_val_f1: f64,
    pub since_improvement: usize,
    pub plateau: usize,
    pub decays: u32,
}

impl TrainState {
    pub fn new(initial_lr: f64, decay_factor: f64, plateau_epochs: usize) -> Self {
        Self {
            epoch: 0,
            initial_lr,
            decay_factor,
            plateau_epochs,
            best_val_f1: f64::NEG_INFINITY,
            since_improvement: 0,
            plateau: 0,
            decays: 0,
        }
    }

    /// `lr₀·factor^decays`, recomputed from the count so it never drifts.
    pub fn lr(&self) -> f64 {
        self.initial_lr * self.decay_factor.powi(self.decays as i32)
    }

    /// Feeds one epoch's validation macro F1.
    pub fn lr_schedule_step(&mut self, val_f1: f64) -> ScheduleEvent {
        self.epoch += 1;
        if val_f1 > self.best_val_f1 {
            self.best_val_f1 = val_f1;
            self.since_improvement = 0;
            self.plateau = 0;
            return ScheduleEvent {
                improved: true,
                decayed: false,
            };
        }
        self.since_improvement += 1;
        self.plateau += 1;
        let decayed = self.plateau >= self.plateau_epochs;
        if decayed {
            self.decays += 1;
            self.plateau = 0;
        }
        ScheduleEvent {
            improved: false,
            decayed,
        }
    }
}
