use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::basin::BasinLabel;
use super::classify::{classify_trajectory, AttractorSign, ClassifierTolerances};
use super::parallel::{map_indexed, Jobs};
use crate::abm::abm_integrate;
use crate::error::{Error, Result};
use crate::hnn::{hnn_jacobian, Equilibrium, HnnParams, State};
use crate::ivp::SolverConfig;
use crate::stability::{eigenvalues_3x3, stability_index, Verdict};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tallies {
    pub plus: usize,
    pub minus: usize,
    pub undecided: usize,
    pub unbounded: usize,
}

impl Tallies {
    fn add(&mut self, label: BasinLabel) {
        match label {
            BasinLabel::Plus => self.plus += 1,
            BasinLabel::Minus => self.minus += 1,
            BasinLabel::Undecided => self.undecided += 1,
            BasinLabel::Unbounded => self.unbounded += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.plus + self.minus + self.undecided + self.unbounded
    }

    pub fn reached(&self, sign: AttractorSign) -> usize {
        match sign {
            AttractorSign::Plus => self.plus,
            AttractorSign::Minus => self.minus,
            AttractorSign::Undecided => self.undecided,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodReport {
    pub equilibrium: Equilibrium,
    pub stability: Verdict,
    /// Stable equilibria are not sampled.
    pub sampled: bool,
    pub tallies: Tallies,
    /// Sampled initial conditions and their outcomes, in sampling order.
    pub samples: Vec<State>,
    pub labels: Vec<BasinLabel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttractorVerdict {
    /// Reached from at least one equilibrium neighborhood.
    SelfExcited,
    /// Not reached from any sampled neighborhood: a hidden-attractor candidate.
    NotReached,
    /// Every sample blew up; nothing can be concluded.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiddenAttractorReport {
    pub neighborhoods: Vec<NeighborhoodReport>,
    pub attractors: Vec<(AttractorSign, AttractorVerdict)>,
}

/// Uniform sample in the ball: Gaussian direction, radius `r U^(1/3)`.
fn sample_ball(rng: &mut ChaCha8Rng, center: &State, radius: f64) -> State {
    let dir: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let norm = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
    let r = radius * rng.random::<f64>().cbrt();
    std::array::from_fn(|k| center[k] + r * dir[k] / norm)
}

/// Samples `count` initial conditions in a ball of `radius` around every
/// unstable equilibrium, integrates them, and reports which attractors are
/// reached. An attractor is self-excited when some neighborhood trajectory
/// reaches it.
#[allow(clippy::too_many_arguments)]
pub fn hidden_attractor_test(
    params: &HnnParams,
    q: f64,
    equilibria: &[Equilibrium],
    attractors: &[AttractorSign],
    radius: f64,
    count: usize,
    seed: u64,
    config: &SolverConfig,
    tolerances: &ClassifierTolerances,
    jobs: Jobs,
) -> Result<HiddenAttractorReport> {
    if count == 0 {
        return Err(Error::domain("sample count must be at least 1"));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::domain(format!("radius must be positive, got {radius}")));
    }
    config.validate()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut neighborhoods = Vec::with_capacity(equilibria.len());
    let mut samples: Vec<(usize, State)> = Vec::new();
    for (e_idx, eq) in equilibria.iter().enumerate() {
        let report = stability_index(&eigenvalues_3x3(&hnn_jacobian(&eq.point, params)), q);
        let sampled = report.verdict != Verdict::Stable;
        if sampled {
            samples.extend((0..count).map(|_| (e_idx, sample_ball(&mut rng, &eq.point, radius))));
        }
        neighborhoods.push(NeighborhoodReport {
            equilibrium: *eq,
            stability: report.verdict,
            sampled,
            tallies: Tallies::default(),
            samples: Vec::new(),
            labels: Vec::new(),
        });
    }

    let labels = map_indexed(jobs, samples.len(), |k| {
        let traj = abm_integrate(&params.ivp(q, samples[k].1)?, config)?;
        Ok(BasinLabel::from_class(&classify_trajectory(&traj, tolerances)?))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    for ((e_idx, x0), label) in samples.iter().zip(labels) {
        let n = &mut neighborhoods[*e_idx];
        n.tallies.add(label);
        n.samples.push(*x0);
        n.labels.push(label);
    }

    let total_bounded: usize = neighborhoods
        .iter()
        .map(|n| n.tallies.total() - n.tallies.unbounded)
        .sum();
    let attractors = attractors
        .iter()
        .map(|&sign| {
            let verdict = if total_bounded == 0 {
                AttractorVerdict::Inconclusive
            } else if neighborhoods.iter().any(|n| n.tallies.reached(sign) > 0) {
                AttractorVerdict::SelfExcited
            } else {
                AttractorVerdict::NotReached
            };
            (sign, verdict)
        })
        .collect();
    Ok(HiddenAttractorReport {
        neighborhoods,
        attractors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hnn::{default_guesses, find_equilibria};

    #[test]
    fn ball_samples_stay_inside_and_are_reproducible() {
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        let c = [0.5, -1.0, 2.0];
        let mut mean_r = 0.0;
        for _ in 0..2000 {
            let p = sample_ball(&mut a, &c, 0.1);
            assert_eq!(p, sample_ball(&mut b, &c, 0.1));
            let r = ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2) + (p[2] - c[2]).powi(2)).sqrt();
            assert!(r <= 0.1 + 1e-15);
            mean_r += r / 2000.0;
        }
        // E[r] = 3/4 R for the uniform ball.
        assert!((mean_r - 0.075).abs() < 3e-3, "{mean_r}");
    }

    #[test]
    fn preconditions() {
        let p = HnnParams::default();
        let eq = find_equilibria(&p, &default_guesses()).unwrap();
        let cfg = SolverConfig::new(0.05, 10.0);
        let tol = ClassifierTolerances::default();
        let signs = [AttractorSign::Plus, AttractorSign::Minus];
        assert!(hidden_attractor_test(&p, 0.99975, &eq, &signs, 0.1, 0, 0, &cfg, &tol, Jobs::Serial).is_err());
        assert!(hidden_attractor_test(&p, 0.99975, &eq, &signs, 0.0, 5, 0, &cfg, &tol, Jobs::Serial).is_err());
    }

    #[test]
    fn stable_equilibria_are_not_sampled() {
        let p = HnnParams::default();
        let eq = find_equilibria(&p, &default_guesses()).unwrap();
        let cfg = SolverConfig::new(0.05, 20.0);
        let tol = ClassifierTolerances::default();
        let r = hidden_attractor_test(
            &p,
            0.7,
            &eq[1..2],
            &[AttractorSign::Plus],
            0.1,
            3,
            1,
            &cfg,
            &tol,
            Jobs::Serial,
        )
        .unwrap();
        assert!(!r.neighborhoods[0].sampled);
        assert_eq!(r.neighborhoods[0].tallies.total(), 0);
        assert_eq!(r.attractors[0].1, AttractorVerdict::Inconclusive);
    }
}
