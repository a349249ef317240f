use std::collections::BTreeMap;
use std::fmt;

use super::params::ModelParams;
use crate::error::{Error, Result};

/// Species name of the k-th complex.
pub fn complex(k: usize) -> String {
    format!("C_{k}")
}

pub const FREE: &str = "S";
pub const OUTPUT: &str = "output";
pub const DEGRADED: &str = "degraded";
pub const ATP: &str = "ATP";
pub const ADP: &str = "ADP";
pub const PHOSPHATE: &str = "P";

/// One side of a reaction: species with stoichiometric coefficients.
pub type Side = Vec<(String, u32)>;

#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    pub reactants: Side,
    pub products: Side,
    pub rate: f64,
}

impl Reaction {
    pub fn new(reactants: Side, products: Side, rate: f64) -> Self {
        Reaction {
            reactants: normalize(reactants),
            products: normalize(products),
            rate,
        }
    }

    pub fn simple(from: &str, to: &str, rate: f64) -> Self {
        Self::new(vec![(from.into(), 1)], vec![(to.into(), 1)], rate)
    }

    fn is_reverse_of(&self, other: &Reaction) -> bool {
        self.reactants == other.products && self.products == other.reactants
    }
}

fn normalize(side: Side) -> Side {
    let mut acc: BTreeMap<String, u32> = BTreeMap::new();
    for (s, c) in side {
        if c > 0 {
            *acc.entry(s).or_default() += c;
        }
    }
    acc.into_iter().collect()
}

/// A reaction network with explicit mass-action rates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NetworkSpec {
    pub species: Vec<String>,
    pub reactions: Vec<Reaction>,
}

impl NetworkSpec {
    pub fn new(species: Vec<String>, reactions: Vec<Reaction>) -> Result<Self> {
        let net = NetworkSpec { species, reactions };
        net.check()?;
        Ok(net)
    }

    fn check(&self) -> Result<()> {
        for (i, r) in self.reactions.iter().enumerate() {
            if !(r.rate.is_finite() && r.rate > 0.0) {
                return Err(Error::Structure(format!("reaction {i} has rate {}", r.rate)));
            }
            for (s, _) in r.reactants.iter().chain(&r.products) {
                if !self.species.contains(s) {
                    return Err(Error::Structure(format!("reaction {i} uses unknown species {s}")));
                }
            }
        }
        Ok(())
    }

    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.species.iter().position(|s| s == name)
    }

    pub fn find(&self, reactants: &Side, products: &Side) -> Option<usize> {
        let r = normalize(reactants.clone());
        let p = normalize(products.clone());
        self.reactions
            .iter()
            .position(|x| x.reactants == r && x.products == p)
    }

    pub fn find_simple(&self, from: &str, to: &str) -> Option<usize> {
        self.find(&vec![(from.into(), 1)], &vec![(to.into(), 1)])
    }

    /// Index of the reaction running `i` backwards.
    pub fn reverse_of(&self, i: usize) -> Option<usize> {
        let r = &self.reactions[i];
        self.reactions.iter().position(|x| x.is_reverse_of(r))
    }

    /// Net stoichiometry of reaction `i`, indexed like `species`.
    pub fn stoichiometry(&self, i: usize) -> Vec<i64> {
        let mut v = vec![0i64; self.species.len()];
        let r = &self.reactions[i];
        for (s, c) in &r.reactants {
            v[self.species_index(s).unwrap()] -= *c as i64;
        }
        for (s, c) in &r.products {
            v[self.species_index(s).unwrap()] += *c as i64;
        }
        v
    }

    /// Species × reactions stoichiometric matrix, row-major.
    pub fn stoichiometric_matrix(&self) -> Vec<Vec<i64>> {
        let cols: Vec<Vec<i64>> = (0..self.reactions.len()).map(|i| self.stoichiometry(i)).collect();
        (0..self.species.len())
            .map(|s| cols.iter().map(|c| c[s]).collect())
            .collect()
    }

    /// Mass-action rate of change of every species.
    pub fn mass_action_rhs(&self, conc: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.species.len()];
        let idx = self.index_cache();
        for r in &self.reactions {
            let mut flux = r.rate;
            for (s, c) in &r.reactants {
                flux *= conc[idx[s]].powi(*c as i32);
            }
            for (s, c) in &r.reactants {
                out[idx[s]] -= flux * *c as f64;
            }
            for (s, c) in &r.products {
                out[idx[s]] += flux * *c as f64;
            }
        }
        out
    }

    fn index_cache(&self) -> BTreeMap<&String, usize> {
        self.species.iter().enumerate().map(|(i, s)| (s, i)).collect()
    }

    /// Parse the line format produced by `Display`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut species: Vec<String> = Vec::new();
        let mut reactions = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::Parse {
                line: lineno + 1,
                msg: msg.to_string(),
            };
            let (lhs, rest) = line.split_once("->").ok_or_else(|| err("missing `->`"))?;
            let (rhs, rate) = rest.split_once('@').ok_or_else(|| err("missing `@ rate`"))?;
            let rate: f64 = rate.trim().parse().map_err(|_| err("bad rate"))?;
            let reactants = parse_side(lhs).map_err(|m| err(&m))?;
            let products = parse_side(rhs).map_err(|m| err(&m))?;
            for (s, _) in reactants.iter().chain(&products) {
                if !species.contains(s) {
                    species.push(s.clone());
                }
            }
            reactions.push(Reaction::new(reactants, products, rate));
        }
        NetworkSpec::new(species, reactions)
    }
}

fn parse_side(text: &str) -> std::result::Result<Side, String> {
    let text = text.trim();
    if text == "0" {
        return Ok(Vec::new());
    }
    let mut side = Vec::new();
    for term in text.split('+') {
        let mut parts = term.split_whitespace();
        let first = parts.next().ok_or("empty term")?;
        let (coef, name) = match parts.next() {
            Some(name) => (first.parse::<u32>().map_err(|_| format!("bad coefficient {first}"))?, name),
            None => (1, first),
        };
        if parts.next().is_some() {
            return Err(format!("malformed term `{}`", term.trim()));
        }
        side.push((name.to_string(), coef));
    }
    Ok(side)
}

fn fmt_side(side: &Side) -> String {
    if side.is_empty() {
        return "0".into();
    }
    side.iter()
        .map(|(s, c)| if *c == 1 { s.clone() } else { format!("{c} {s}") })
        .collect::<Vec<_>>()
        .join(" + ")
}

impl fmt::Display for NetworkSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.reactions {
            writeln!(f, "{} -> {} @ {:e}", fmt_side(&r.reactants), fmt_side(&r.products), r.rate)?;
        }
        Ok(())
    }
}

/// The ladder network S ⇄ C_k, C_k ⇄ C_{k+1}, C_N → output, degradation everywhere.
pub fn build_ladder(p: &ModelParams) -> Result<NetworkSpec> {
    p.validate()?;
    let n = p.n;
    let mut species = vec![FREE.to_string()];
    species.extend((0..=n).map(complex));
    species.push(OUTPUT.into());
    species.push(DEGRADED.into());

    let mut rx = Vec::with_capacity(5 * n + 5);
    for k in 0..=n {
        rx.push(Reaction::simple(FREE, &complex(k), p.k_attach(k)));
    }
    for k in 0..=n {
        rx.push(Reaction::simple(&complex(k), FREE, p.k_detach()));
    }
    for k in 0..n {
        rx.push(Reaction::simple(&complex(k), &complex(k + 1), p.k_phos()));
    }
    for k in 1..=n {
        rx.push(Reaction::simple(&complex(k), &complex(k - 1), p.k_dephos()));
    }
    rx.push(Reaction::simple(&complex(n), OUTPUT, p.k_phos()));
    let mu = p.mu();
    rx.push(Reaction::simple(FREE, DEGRADED, mu));
    for k in 0..=n {
        rx.push(Reaction::simple(&complex(k), DEGRADED, mu));
    }
    NetworkSpec::new(species, rx)
}
