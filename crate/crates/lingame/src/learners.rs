//! Online-learning machinery for the agent: AdaHedge over a finite expert
//! set in the gains formulation, and the C-tracking rule converting weight
//! streams into integer pulls.

use crate::linalg::{argmin_lowest, SimplexWeights};

/// AdaHedge over `K` experts, gains-native: proposals are exponential
/// weights `w_k ∝ exp(η G_k)` with the parameter-free rate `η = ln(K)/Δ`,
/// where `Δ` accumulates the per-round mixability gaps.
///
/// While `Δ = 0` the rate is `η = ∞` and the learner follows the leader:
/// uniform over the argmax set of cumulative gains (uniform over everything
/// at round one).
#[derive(Debug, Clone)]
pub struct AdaHedge {
    cum_gain: Vec<f64>,
    cum_mix_gap: f64,
    round: u64,
}

impl AdaHedge {
    pub fn new(experts: usize) -> Self {
        assert!(experts >= 1, "AdaHedge needs at least one expert");
        Self {
            cum_gain: vec![0.0; experts],
            cum_mix_gap: 0.0,
            round: 0,
        }
    }

    pub fn experts(&self) -> usize {
        self.cum_gain.len()
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    /// Cumulative mixability gap `Δ` (nonnegative, nondecreasing).
    pub fn cum_mix_gap(&self) -> f64 {
        self.cum_mix_gap
    }

    pub fn cum_gains(&self) -> &[f64] {
        &self.cum_gain
    }

    /// Adds experts with zero cumulative gain (used by samplers whose answer
    /// set grows lazily); existing state is untouched.
    pub fn grow(&mut self, additional: usize) {
        self.cum_gain.extend(std::iter::repeat_n(0.0, additional));
    }

    fn max_gain(&self) -> f64 {
        self.cum_gain
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Current proposal. Strictly positive once `Δ > 0`; sums to one.
    pub fn propose(&self) -> SimplexWeights {
        let k = self.experts();
        let mut w = vec![0.0; k];
        if self.cum_mix_gap <= 0.0 {
            let m = self.max_gain();
            let leaders: Vec<usize> = (0..k).filter(|&i| self.cum_gain[i] >= m).collect();
            let share = 1.0 / leaders.len() as f64;
            for i in leaders {
                w[i] = share;
            }
        } else {
            let eta = (k as f64).ln() / self.cum_mix_gap;
            let m = self.max_gain();
            let mut sum = 0.0;
            for (wi, g) in w.iter_mut().zip(&self.cum_gain) {
                // max-subtraction keeps the exponent ≤ 0
                *wi = (eta * (g - m)).exp();
                sum += *wi;
            }
            for v in &mut w {
                *v /= sum;
            }
        }
        SimplexWeights::new(w).expect("AdaHedge proposal is on the simplex")
    }

    /// Feeds one round of per-expert gains. The mixability gap
    /// `δ_t = mix-gain − ⟨w, g⟩` is clipped at zero against rounding.
    pub fn update(&mut self, gains: &[f64]) {
        assert_eq!(gains.len(), self.experts(), "AdaHedge: gain vector length");
        let w = self.propose();
        let played: f64 = w.as_slice().iter().zip(gains).map(|(wi, g)| wi * g).sum();
        let mix = if self.cum_mix_gap <= 0.0 {
            // η = ∞ limit: mix value is the best gain on the proposal's support
            let m = self.max_gain();
            (0..self.experts())
                .filter(|&i| self.cum_gain[i] >= m)
                .map(|i| gains[i])
                .fold(f64::NEG_INFINITY, f64::max)
        } else {
            let eta = (self.experts() as f64).ln() / self.cum_mix_gap;
            let gm = gains.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let s: f64 = w
                .as_slice()
                .iter()
                .zip(gains)
                .map(|(wi, g)| wi * (eta * (g - gm)).exp())
                .sum();
            gm + s.ln() / eta
        };
        self.cum_mix_gap += (mix - played).max(0.0);
        for (g, inc) in self.cum_gain.iter_mut().zip(gains) {
            *g += inc;
        }
        self.round += 1;
    }
}

/// C-tracking state: cumulative weights `W` and integer pulls `N` over `K`
/// indices, with the drift guarantee `−Σ_{j=2}^K 1/j ≤ N^k − W^k ≤ 1`.
#[derive(Debug, Clone)]
pub struct Tracker {
    cum_weights: Vec<f64>,
    counts: Vec<u64>,
    round: u64,
    lower_bound: f64,
}

fn harmonic_tail(k: usize) -> f64 {
    (2..=k).map(|j| 1.0 / j as f64).sum()
}

impl Tracker {
    pub fn new(indices: usize) -> Self {
        assert!(indices >= 1, "tracker needs at least one index");
        Self {
            cum_weights: vec![0.0; indices],
            counts: vec![0; indices],
            round: 0,
            lower_bound: harmonic_tail(indices),
        }
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn cum_weights(&self) -> &[f64] {
        &self.cum_weights
    }

    /// Adds fresh indices with zero weight and count.
    pub fn grow(&mut self, additional: usize) {
        self.cum_weights
            .extend(std::iter::repeat_n(0.0, additional));
        self.counts.extend(std::iter::repeat_n(0, additional));
        self.lower_bound = harmonic_tail(self.counts.len());
    }

    /// `track_select`: accumulates `w_t` into `W`, selects
    /// `k_t = argmin_k N^k − W^k` (lowest index on ties), increments `N`.
    pub fn select(&mut self, w_t: &SimplexWeights) -> usize {
        assert_eq!(w_t.len(), self.len(), "tracker: weight vector length");
        for (cw, w) in self.cum_weights.iter_mut().zip(w_t.as_slice()) {
            *cw += w;
        }
        let deficits: Vec<f64> = self
            .counts
            .iter()
            .zip(&self.cum_weights)
            .map(|(n, w)| *n as f64 - w)
            .collect();
        let k = argmin_lowest(&deficits);
        self.counts[k] += 1;
        self.round += 1;
        self.assert_bounds();
        k
    }

    fn assert_bounds(&self) {
        for (k, (n, w)) in self.counts.iter().zip(&self.cum_weights).enumerate() {
            let diff = *n as f64 - w;
            assert!(
                diff <= 1.0 + 1e-9 && diff >= -self.lower_bound - 1e-9,
                "tracking bound violated at index {k}: N-W = {diff}"
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn propose_round_one_uniform() {
        for k in [2usize, 3, 7] {
            let learner = AdaHedge::new(k);
            let w = learner.propose();
            for v in w.as_slice() {
                assert_relative_eq!(*v, 1.0 / k as f64, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn propose_tilts_toward_leader() {
        let mut learner = AdaHedge::new(2);
        learner.update(&[1.0, 0.0]);
        assert!(learner.cum_mix_gap() > 0.0);
        let w = learner.propose();
        assert!(w[0] > 0.5 && w[1] > 0.0 && w[1] < 0.5);
    }

    #[test]
    fn identical_gains_stay_uniform() {
        let mut learner = AdaHedge::new(4);
        for _ in 0..50 {
            learner.update(&[0.7; 4]);
            let w = learner.propose();
            for v in w.as_slice() {
                assert_relative_eq!(*v, 0.25, max_relative = 1e-12);
            }
        }
        assert_relative_eq!(learner.cum_mix_gap(), 0.0);
    }

    #[test]
    fn greedy_limit_mix_gap() {
        // round 1, K=2, gains (1,0): proposal (1/2,1/2), η=∞ mix value is 1,
        // so δ₁ = 1 − 0.5 = 0.5
        let mut learner = AdaHedge::new(2);
        learner.update(&[1.0, 0.0]);
        assert_relative_eq!(learner.cum_mix_gap(), 0.5, max_relative = 1e-14);
    }

    #[test]
    fn mix_gap_nonnegative_and_translation_invariant() {
        let mut rng = StdRng::seed_from_u64(2);
        let mut a = AdaHedge::new(3);
        let mut b = AdaHedge::new(3);
        for _ in 0..200 {
            let g: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..1.0)).collect();
            let shifted: Vec<f64> = g.iter().map(|v| v + 2.5).collect();
            let before_a = a.cum_mix_gap();
            a.update(&g);
            b.update(&shifted);
            let delta_a = a.cum_mix_gap() - before_a;
            assert!(delta_a >= -1e-12);
            // shifting every gain by a constant leaves the mix gap unchanged
            assert_relative_eq!(a.cum_mix_gap(), b.cum_mix_gap(), max_relative = 1e-9);
            // and the argmax of cumulative gains agrees
            let am_a = crate::linalg::argmax_lowest(a.cum_gains());
            let am_b = crate::linalg::argmax_lowest(b.cum_gains());
            assert_eq!(am_a, am_b);
        }
    }

    #[test]
    fn proposals_positive_once_gap_positive() {
        let mut rng = StdRng::seed_from_u64(8);
        let mut learner = AdaHedge::new(5);
        for _ in 0..100 {
            let g: Vec<f64> = (0..5).map(|_| rng.random_range(0.0..2.0)).collect();
            learner.update(&g);
            let w = learner.propose();
            let sum: f64 = w.as_slice().iter().sum();
            assert!((sum - 1.0).abs() <= 1e-12);
            if learner.cum_mix_gap() > 0.0 {
                assert!(w.as_slice().iter().all(|v| *v > 0.0));
            }
        }
    }

    /// Lemma-style regret bound: realized regret against the best fixed
    /// expert is at most `2σ√(t ln K) + 16σ(2 + ln K / 3)`.
    #[test]
    fn regret_bound_on_random_sequences() {
        let mut rng = StdRng::seed_from_u64(77);
        for &k in &[2usize, 5] {
            for &sigma in &[1.0, 8.0] {
                for _ in 0..5 {
                    let t = 1000;
                    let mut learner = AdaHedge::new(k);
                    let mut best = vec![0.0; k];
                    let mut played = 0.0;
                    for _ in 0..t {
                        let g: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..sigma)).collect();
                        let w = learner.propose();
                        played += w
                            .as_slice()
                            .iter()
                            .zip(&g)
                            .map(|(wi, gi)| wi * gi)
                            .sum::<f64>();
                        for (b, gi) in best.iter_mut().zip(&g) {
                            *b += gi;
                        }
                        learner.update(&g);
                    }
                    let regret = best.iter().copied().fold(f64::NEG_INFINITY, f64::max) - played;
                    let lnk = (k as f64).ln();
                    let bound =
                        2.0 * sigma * (t as f64 * lnk).sqrt() + 16.0 * sigma * (2.0 + lnk / 3.0);
                    assert!(
                        regret <= bound,
                        "regret {regret} > bound {bound} (K={k}, σ={sigma})"
                    );
                }
            }
        }
    }

    #[test]
    fn tracker_point_mass() {
        let mut tracker = Tracker::new(3);
        let e1 = SimplexWeights::new(vec![1.0, 0.0, 0.0]).unwrap();
        for _ in 0..10 {
            assert_eq!(tracker.select(&e1), 0);
            assert_relative_eq!(
                tracker.counts()[0] as f64 - tracker.cum_weights()[0],
                0.0,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn tracker_uniform_three_rounds_permutation() {
        let mut tracker = Tracker::new(3);
        let u = SimplexWeights::uniform(3);
        let mut pulled: Vec<usize> = (0..3).map(|_| tracker.select(&u)).collect();
        pulled.sort_unstable();
        assert_eq!(pulled, vec![0, 1, 2]);
    }

    #[test]
    fn tracker_bounds_on_random_streams() {
        let mut rng = StdRng::seed_from_u64(4);
        let k = 4;
        let mut tracker = Tracker::new(k);
        for _ in 0..100_000 {
            let mut w: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0)).collect();
            let s: f64 = w.iter().sum();
            for v in &mut w {
                *v /= s;
            }
            // select() asserts −(1/2+1/3+1/4) ≤ N−W ≤ 1 internally
            tracker.select(&SimplexWeights::new(w).unwrap());
        }
        assert_eq!(tracker.round(), 100_000);
        assert_eq!(tracker.counts().iter().sum::<u64>(), 100_000);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn weight_stream(k: usize, len: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
            proptest::collection::vec(
                proptest::collection::vec(0.0f64..1.0, k..=k).prop_filter_map(
                    "weights must not all vanish",
                    |raw| {
                        let s: f64 = raw.iter().sum();
                        (s > 1e-9).then(|| raw.iter().map(|v| v / s).collect::<Vec<_>>())
                    },
                ),
                1..=len,
            )
        }

        proptest! {
            #[test]
            fn tracker_bounds_hold_for_any_stream(stream in weight_stream(5, 60)) {
                let mut tracker = Tracker::new(5);
                for w in stream {
                    // bound assertions run inside select()
                    tracker.select(&SimplexWeights::new(w).unwrap());
                }
            }

            #[test]
            fn adahedge_gap_monotone_and_proposals_simplex(
                gains in proptest::collection::vec(
                    proptest::collection::vec(0.0f64..5.0, 3..=3), 1..=60)
            ) {
                let mut learner = AdaHedge::new(3);
                let mut prev_gap = 0.0;
                for g in gains {
                    learner.update(&g);
                    prop_assert!(learner.cum_mix_gap() >= prev_gap - 1e-12);
                    prev_gap = learner.cum_mix_gap();
                    let w = learner.propose();
                    let sum: f64 = w.as_slice().iter().sum();
                    prop_assert!((sum - 1.0).abs() <= 1e-12);
                    prop_assert!(w.as_slice().iter().all(|v| *v >= 0.0));
                }
            }
        }
    }
}
