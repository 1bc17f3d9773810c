//! First trial after which the greedy probe stays optimal.

/// Counts consecutive optimal probes. A run is stable once `window` probes
/// in a row equal the optimum; the stable trial is the first of them.
#[derive(Clone, Debug)]
pub struct StabilityTracker {
    optimum: u32,
    window: u32,
    streak: u32,
    streak_start: u32,
    stable_at: Option<u32>,
}

impl StabilityTracker {
    pub fn new(optimum: u32, window: u32) -> Self {
        assert!(window > 0);
        StabilityTracker { optimum, window, streak: 0, streak_start: 0, stable_at: None }
    }

    pub fn optimum(&self) -> u32 {
        self.optimum
    }

    /// Records the probe taken after trial `trial`. Results at or below the
    /// optimum count as optimal.
    pub fn observe(&mut self, trial: u32, result: u32) -> Option<u32> {
        if self.stable_at.is_none() {
            if result <= self.optimum {
                if self.streak == 0 {
                    self.streak_start = trial;
                }
                self.streak += 1;
                if self.streak >= self.window {
                    self.stable_at = Some(self.streak_start);
                }
            } else {
                self.streak = 0;
            }
        }
        self.stable_at
    }

    pub fn stable_at(&self) -> Option<u32> {
        self.stable_at
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn broken_streak_restarts() {
        let mut s = StabilityTracker::new(29, 3);
        s.observe(2, 29);
        s.observe(4, 29);
        s.observe(6, 30);
        assert_eq!(s.stable_at(), None);
        s.observe(8, 29);
        s.observe(10, 29);
        assert_eq!(s.observe(12, 29), Some(8));
        // later failures do not undo it
        assert_eq!(s.observe(14, 100), Some(8));
    }

    proptest! {
        #[test]
        fn stable_exactly_when_some_run_is_long_enough(probes in prop::collection::vec(28u32..31, 0..200), w in 1u32..20) {
            let mut s = StabilityTracker::new(29, w);
            for (i, &p) in probes.iter().enumerate() {
                s.observe(i as u32, p);
            }
            // oracle: first index starting a run of w optimal probes
            let first = (0..probes.len()).find(|&i| {
                i + w as usize <= probes.len() && probes[i..i + w as usize].iter().all(|&p| p <= 29)
            });
            prop_assert_eq!(s.stable_at(), first.map(|i| i as u32));
        }
    }
}
