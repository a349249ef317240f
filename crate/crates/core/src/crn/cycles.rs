use super::network::{complex, NetworkSpec, Side, ADP, ATP, FREE, PHOSPHATE};
use crate::error::{Error, Result};

/// Default balance tolerance on |δ_k|.
pub const WEGSCHEIDER_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleReport {
    pub k: usize,
    pub delta: f64,
    pub balanced: bool,
}

fn one(name: &str) -> (String, u32) {
    (name.to_string(), 1)
}

fn require(net: &NetworkSpec, r: &Side, p: &Side) -> Result<usize> {
    net.find(r, p).ok_or_else(|| {
        Error::Structure(format!("missing reaction {:?} -> {:?}", r, p))
    })
}

fn is_enlarged(net: &NetworkSpec) -> bool {
    net.species_index(ATP).is_some()
}

/// Number of rungs N, read off the complexes present.
fn rungs(net: &NetworkSpec) -> Result<usize> {
    let mut n = None;
    while net.species_index(&complex(n.map_or(0, |x| x + 1))).is_some() {
        n = Some(n.map_or(0, |x| x + 1));
    }
    match n {
        Some(n) if n >= 1 => Ok(n),
        _ => Err(Error::Structure("network has fewer than two complexes".into())),
    }
}

/// Forward reactions of the k-th basis cycle, k = 0..N−1.
pub fn basis_cycle(net: &NetworkSpec, k: usize) -> Result<Vec<usize>> {
    let (ck, ck1) = (complex(k), complex(k + 1));
    if is_enlarged(net) {
        let kp = |m: usize| -> Side {
            let mut s = vec![one(FREE)];
            if m > 0 {
                s.push((PHOSPHATE.to_string(), m as u32));
            }
            s
        };
        Ok(vec![
            require(net, &vec![one(&ck), one(ATP)], &vec![one(&ck1), one(ADP)])?,
            require(net, &vec![one(&ck1)], &kp(k + 1))?,
            require(net, &kp(k), &vec![one(&ck)])?,
            require(net, &vec![one(ADP), one(PHOSPHATE)], &vec![one(ATP)])?,
        ])
    } else {
        Ok(vec![
            require(net, &vec![one(FREE)], &vec![one(&ck)])?,
            require(net, &vec![one(&ck)], &vec![one(&ck1)])?,
            require(net, &vec![one(&ck1)], &vec![one(FREE)])?,
        ])
    }
}

/// Log ratio of forward to backward rate products around a closed cycle.
pub fn cycle_log_ratio(net: &NetworkSpec, cycle: &[usize]) -> Result<f64> {
    let mut net_stoich = vec![0i64; net.species.len()];
    let mut acc = 0.0;
    for &i in cycle {
        let j = net.reverse_of(i).ok_or_else(|| {
            Error::Structure(format!("reaction {i} has no reverse"))
        })?;
        acc += net.reactions[i].rate.ln() - net.reactions[j].rate.ln();
        for (a, b) in net_stoich.iter_mut().zip(net.stoichiometry(i)) {
            *a += b;
        }
    }
    if net_stoich.iter().any(|&x| x != 0) {
        return Err(Error::Structure("reaction list is not a closed cycle".into()));
    }
    Ok(acc)
}

/// δ_k for the k-th basis cycle.
pub fn cycle_delta(net: &NetworkSpec, k: usize) -> Result<f64> {
    cycle_log_ratio(net, &basis_cycle(net, k)?)
}

/// True iff every basis cycle is balanced within `tol`.
pub fn wegscheider_holds(net: &NetworkSpec, tol: f64) -> Result<(bool, Vec<CycleReport>)> {
    let n = rungs(net)?;
    let mut reports = Vec::with_capacity(n);
    for k in 0..n {
        let delta = cycle_delta(net, k)?;
        reports.push(CycleReport {
            k,
            delta,
            balanced: delta.abs() <= tol,
        });
    }
    Ok((reports.iter().all(|r| r.balanced), reports))
}
