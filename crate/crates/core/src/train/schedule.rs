/// Learning-rate schedule, evaluated per epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    Constant,
    /// Multiply by `factor` every `period` epochs.
    StepLr { factor: f64, period: usize },
    /// Half-cosine from the base rate down to 0 across the run.
    Cosine,
}

impl Schedule {
    pub fn lr_at(&self, base_lr: f64, epoch: usize, total_epochs: usize) -> f64 {
        match *self {
            Schedule::Constant => base_lr,
            Schedule::StepLr { factor, period } => step_lr(base_lr, epoch, factor, period),
            Schedule::Cosine => {
                let total = total_epochs.max(1) as f64;
                base_lr * 0.5 * (1.0 + (std::f64::consts::PI * epoch as f64 / total).cos())
            }
        }
    }
}

/// base_lr * factor^floor(epoch / period).
pub fn step_lr(base_lr: f64, epoch: usize, factor: f64, period: usize) -> f64 {
    base_lr * factor.powi((epoch / period.max(1)) as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_lr_values() {
        assert_eq!(step_lr(5e-4, 0, 0.8, 10), 5e-4);
        assert!((step_lr(5e-4, 10, 0.8, 10) - 4e-4).abs() < 1e-18);
        assert!((step_lr(5e-4, 25, 0.8, 10) - 3.2e-4).abs() < 1e-18);
        // within a period the rate is flat
        assert_eq!(step_lr(1.0, 9, 0.8, 10), 1.0);
    }

    #[test]
    fn cosine_endpoints() {
        let s = Schedule::Cosine;
        assert_eq!(s.lr_at(1.0, 0, 100), 1.0);
        assert!((s.lr_at(1.0, 50, 100) - 0.5).abs() < 1e-12);
        assert!(s.lr_at(1.0, 100, 100).abs() < 1e-12);
    }

    #[test]
    fn constant_is_constant() {
        for e in 0..20 {
            assert_eq!(Schedule::Constant.lr_at(0.3, e, 20), 0.3);
        }
    }
}
