//! Population snapshot text.
//!
//! ```text
//! nxcsf-population 1
//! <param> <value>          one line per XCSF parameter
//! time <t>
//! next_id <id>
//! classifiers <count>
//! classifier <id>
//! numerosity <n>
//! experience <n>
//! error <e>
//! fitness <f>
//! as_size <s>
//! ga_timestamp <t>
//! self_adapt <mu> <psi> <omega> <tau>
//! pred_weights <w0> <w1> ...
//! <genome text through its end line>
//! ```
//!
//! Reals use the shortest decimal that parses back to the same bits.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::neuronet::{parse_genome, LifParams, WeightMutation};
use crate::real::Real;

use super::classifier::Classifier;
use super::params::{SelfAdaptive, XcsfParams};
use super::population::Population;
use super::LcsError;

const MAGIC: &str = "nxcsf-population 1";

pub struct Snapshot<R> {
    pub params: XcsfParams<R>,
    pub time: u64,
    pub pop: Population<R>,
}

pub fn write_snapshot<R: Real>(pop: &Population<R>, params: &XcsfParams<R>, time: u64) -> String {
    let mut out = String::new();
    let p = params;
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "max_micro {}", p.max_micro);
    for (k, v) in [
        ("beta", p.beta),
        ("epsilon0", p.epsilon0),
        ("theta_ga", p.theta_ga),
        ("x0", p.x0),
        ("eta", p.eta),
        ("gamma", p.gamma),
        ("alpha", p.alpha),
        ("nu", p.nu),
        ("delta", p.delta),
        ("init_fitness", p.init_fitness),
        ("init_error", p.init_error),
        ("offspring_fitness", p.offspring_fitness),
        ("adapt_floor", p.adapt_floor),
    ] {
        let _ = writeln!(out, "{k} {v}");
    }
    let _ = writeln!(out, "theta_del {}", p.theta_del);
    let _ = writeln!(out, "cover_attempts {}", p.cover_attempts);
    let _ = match p.weight_mutation {
        WeightMutation::Redraw => writeln!(out, "weight_mutation redraw"),
        WeightMutation::Gaussian { sigma } => writeln!(out, "weight_mutation gaussian {sigma}"),
    };
    let _ = writeln!(out, "ga_clock {}", p.ga_clock);
    let _ = writeln!(out, "time {time}");
    let _ = writeln!(out, "next_id {}", pop.next_id());
    let _ = writeln!(out, "classifiers {}", pop.len());
    for c in pop.iter() {
        let _ = writeln!(out, "classifier {}", c.id);
        let _ = writeln!(out, "numerosity {}", c.numerosity);
        let _ = writeln!(out, "experience {}", c.experience);
        let _ = writeln!(out, "error {}", c.error);
        let _ = writeln!(out, "fitness {}", c.fitness);
        let _ = writeln!(out, "as_size {}", c.as_size);
        let _ = writeln!(out, "ga_timestamp {}", c.ga_timestamp);
        let sa = c.self_adapt;
        let _ = writeln!(out, "self_adapt {} {} {} {}", sa.mu, sa.psi, sa.omega, sa.tau);
        let _ = write!(out, "pred_weights");
        for w in &c.pred_weights {
            let _ = write!(out, " {w}");
        }
        let _ = writeln!(out);
        let _ = write!(out, "{}", c.genome);
    }
    out
}

struct Lines<'a, I: Iterator<Item = (usize, &'a str)>> {
    inner: I,
    last: usize,
}

impl<'a, I: Iterator<Item = (usize, &'a str)>> Lines<'a, I> {
    fn err(&self, msg: impl Into<String>) -> LcsError {
        LcsError::Snapshot { line: self.last, msg: msg.into() }
    }

    /// Values after `key` on the next non-blank line.
    fn keyed(&mut self, key: &str) -> Result<Vec<&'a str>, LcsError> {
        let (ln, line) = self.inner.find(|(_, l)| !l.trim().is_empty()).ok_or_else(|| self.err(format!("missing {key}")))?;
        self.last = ln;
        let mut tok = line.split_whitespace();
        if tok.next() != Some(key) {
            return Err(self.err(format!("expected {key}")));
        }
        Ok(tok.collect())
    }

    fn one<T: FromStr>(&mut self, key: &str) -> Result<T, LcsError> {
        let v = self.keyed(key)?;
        match v.as_slice() {
            [x] => x.parse().map_err(|_| self.err(format!("bad value for {key}"))),
            _ => Err(self.err(format!("{key} takes one value"))),
        }
    }

    fn many<T: FromStr>(&mut self, key: &str) -> Result<Vec<T>, LcsError> {
        let v = self.keyed(key)?;
        v.iter().map(|x| x.parse().map_err(|_| self.err(format!("bad value for {key}")))).collect()
    }
}

pub fn read_snapshot<R: Real>(text: &str, lif: &LifParams<R>) -> Result<Snapshot<R>, LcsError> {
    let mut src = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match src.find(|(_, l)| !l.trim().is_empty()) {
        Some((_, l)) if l.trim() == MAGIC => {}
        _ => return Err(LcsError::Snapshot { line: 1, msg: "not a population snapshot".into() }),
    }
    let mut l = Lines { inner: src, last: 1 };
    let mut p = XcsfParams::<R> { max_micro: l.one("max_micro")?, ..Default::default() };
    p.beta = l.one("beta")?;
    p.epsilon0 = l.one("epsilon0")?;
    p.theta_ga = l.one("theta_ga")?;
    p.x0 = l.one("x0")?;
    p.eta = l.one("eta")?;
    p.gamma = l.one("gamma")?;
    p.alpha = l.one("alpha")?;
    p.nu = l.one("nu")?;
    p.delta = l.one("delta")?;
    p.init_fitness = l.one("init_fitness")?;
    p.init_error = l.one("init_error")?;
    p.offspring_fitness = l.one("offspring_fitness")?;
    p.adapt_floor = l.one("adapt_floor")?;
    p.theta_del = l.one("theta_del")?;
    p.cover_attempts = l.one("cover_attempts")?;
    let wm = l.keyed("weight_mutation")?;
    p.weight_mutation = match wm.as_slice() {
        ["redraw"] => WeightMutation::Redraw,
        ["gaussian", s] => WeightMutation::Gaussian { sigma: s.parse().map_err(|_| l.err("bad sigma"))? },
        _ => return Err(l.err("bad weight_mutation")),
    };
    p.ga_clock = l.one::<String>("ga_clock")?.parse().map_err(|m: String| l.err(m))?;
    p.validate().map_err(|m| l.err(m))?;
    let time: u64 = l.one("time")?;
    let next_id: u64 = l.one("next_id")?;
    let count: usize = l.one("classifiers")?;

    let mut pop = Population::new();
    for _ in 0..count {
        let id: u64 = l.one("classifier")?;
        let numerosity: u32 = l.one("numerosity")?;
        let experience: u64 = l.one("experience")?;
        let error: R = l.one("error")?;
        let fitness: R = l.one("fitness")?;
        let as_size: R = l.one("as_size")?;
        let ga_timestamp: u64 = l.one("ga_timestamp")?;
        let sa: Vec<R> = l.many("self_adapt")?;
        let sa: [R; 4] = sa.try_into().map_err(|_| l.err("self_adapt takes four values"))?;
        let weights: Vec<R> = l.many("pred_weights")?;
        let genome = parse_genome(&mut l.inner).map_err(|e| LcsError::Snapshot { line: l.last, msg: e.to_string() })?;
        if weights.len() != genome.input_count() + 1 {
            return Err(l.err("pred_weights length does not match the genome"));
        }
        if numerosity == 0 {
            return Err(l.err("numerosity must be positive"));
        }
        if pop.contains(id) {
            return Err(l.err(format!("duplicate classifier id {id}")));
        }
        let mut c = Classifier::new(id, genome, SelfAdaptive::from_array(sa), ga_timestamp, &p, lif);
        c.numerosity = numerosity;
        c.experience = experience;
        c.error = error;
        c.fitness = fitness;
        c.as_size = as_size;
        c.pred_weights = weights;
        pop.insert(c);
    }
    if next_id < pop.next_id() {
        return Err(l.err("next_id is below an existing classifier id"));
    }
    pop.set_next_id(next_id);
    Ok(Snapshot { params: p, time, pop })
}
