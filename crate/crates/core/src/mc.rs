//! Single-ligand jump-process simulation, an independent oracle for p_res.
//!
//! Trial i of a run with seed s draws from ChaCha8 seeded with s on stream i,
//! so results do not depend on how trials are spread over threads.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::crn::ModelParams;
use crate::error::{invalid, Error, Result};
use crate::output::{num, Table};

/// Events after which a trial is abandoned.
pub const MAX_EVENTS: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Response,
    Degraded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub outcome: Outcome,
    pub absorption_time: f64,
    pub events: u64,
}

/// Precomputed jump rates of the ladder.
struct Chain {
    n: usize,
    mu: f64,
    detach: f64,
    phos: f64,
    dephos: f64,
    /// Cumulative attachment rates to C_0..C_k.
    attach_cum: Vec<f64>,
}

impl Chain {
    fn new(p: &ModelParams) -> Result<Self> {
        p.validate()?;
        let mut acc = 0.0;
        let attach_cum = (0..=p.n)
            .map(|k| {
                acc += p.k_attach(k);
                acc
            })
            .collect();
        Ok(Chain {
            n: p.n,
            mu: p.mu(),
            detach: p.k_detach(),
            phos: p.k_phos(),
            dephos: p.k_dephos(),
            attach_cum,
        })
    }

    fn run<R: Rng>(&self, rng: &mut R) -> Result<TrialOutcome> {
        // None is the free state S, Some(k) is C_k
        let mut state: Option<usize> = None;
        let mut time = 0.0;
        let mut events = 0u64;
        loop {
            events += 1;
            if events > MAX_EVENTS {
                return Err(Error::TrialAborted { events: MAX_EVENTS });
            }
            let attach_total = self.attach_cum[self.n];
            let total = match state {
                None => attach_total + self.mu,
                Some(k) => self.detach + self.phos + self.mu + if k > 0 { self.dephos } else { 0.0 },
            };
            let hold: f64 = rng.sample(Exp1);
            time += hold / total;
            let u = rng.gen::<f64>() * total;
            match state {
                None => {
                    if u >= attach_total {
                        return Ok(self.done(Outcome::Degraded, time, events));
                    }
                    let k = self.attach_cum.partition_point(|c| *c <= u).min(self.n);
                    state = Some(k);
                }
                Some(k) => {
                    if u < self.phos {
                        if k == self.n {
                            return Ok(self.done(Outcome::Response, time, events));
                        }
                        state = Some(k + 1);
                    } else if u < self.phos + self.detach {
                        state = None;
                    } else if u < self.phos + self.detach + self.mu {
                        return Ok(self.done(Outcome::Degraded, time, events));
                    } else {
                        state = Some(k - 1);
                    }
                }
            }
        }
    }

    fn done(&self, outcome: Outcome, absorption_time: f64, events: u64) -> TrialOutcome {
        TrialOutcome { outcome, absorption_time, events }
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Trial `trial` of the run with the given seed.
pub fn simulate_trial(p: &ModelParams, seed: u64, trial: u64) -> Result<TrialOutcome> {
    Chain::new(p)?.run(&mut trial_rng(seed, trial))
}

/// One ligand from S until response or degradation.
pub fn simulate_ligand(p: &ModelParams, seed: u64) -> Result<TrialOutcome> {
    simulate_trial(p, seed, 0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub trials: u64,
    pub responses: u64,
    pub seed: u64,
    pub mean_events: f64,
}

/// Binomial estimate of p_res from `trials` independent ligands.
pub fn estimate_pres(p: &ModelParams, trials: u64, seed: u64) -> Result<McEstimate> {
    if trials < 1 {
        return Err(invalid("trials", "must be at least 1"));
    }
    let chain = Chain::new(p)?;
    let (responses, events) = (0..trials)
        .into_par_iter()
        .map(|i| {
            let t = chain.run(&mut trial_rng(seed, i))?;
            Ok(((t.outcome == Outcome::Response) as u64, t.events))
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    let n = trials as f64;
    let p_hat = responses as f64 / n;
    Ok(McEstimate {
        p_hat,
        stderr: (p_hat * (1.0 - p_hat) / n).sqrt(),
        trials,
        responses,
        seed,
        mean_events: events as f64 / n,
    })
}

/// Estimates along a σ grid, one seed per run, as CSV `sigma,p_hat,stderr,trials,seed`.
pub fn mc_sweep(template: &ModelParams, sigmas: &[f64], trials: u64, seed: u64) -> Result<(Vec<McEstimate>, Table)> {
    let mut table = Table::new(&["sigma", "p_hat", "stderr", "trials", "seed"]);
    let mut out = Vec::with_capacity(sigmas.len());
    for &s in sigmas {
        let e = estimate_pres(&template.with_sigma(s), trials, seed)?;
        table.push(vec![num(s), num(e.p_hat), num(e.stderr), trials.to_string(), seed.to_string()]);
        out.push(e);
    }
    Ok((out, table))
}
