//! Line-oriented genome text form.
//!
//! ```text
//! snn <inputs> <hidden>
//! kinds <E|I>...
//! link <source> <target> <weight> <0|1>
//! ...
//! end
//! ```
//!
//! MLP genomes start with `mlp` and have no `kinds` line. Every legal slot
//! is listed exactly once. Weights are written with the shortest decimal
//! that parses back to the same bits.

use std::fmt;

use crate::real::Real;

use super::genome::{Genome, Link, MlpGenome, NodeKind, SpikingGenome};
use super::NetError;

impl<R: Real> fmt::Display for Genome<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Genome::Spiking(g) => {
                writeln!(f, "snn {} {}", g.input_count(), g.hidden_count())?;
                write!(f, "kinds")?;
                for k in g.hidden() {
                    write!(f, " {}", k.symbol())?;
                }
                writeln!(f)?;
            }
            Genome::Mlp(g) => writeln!(f, "mlp {} {}", g.input_count(), g.hidden_count())?,
        }
        for (s, t, l) in self.connections() {
            writeln!(f, "link {} {} {} {}", s, t, l.weight, l.enabled as u8)?;
        }
        writeln!(f, "end")
    }
}

fn perr(line: usize, msg: impl Into<String>) -> NetError {
    NetError::Parse { line, msg: msg.into() }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, NetError> {
    tok.ok_or_else(|| perr(line, format!("missing {what}")))?
        .parse()
        .map_err(|_| perr(line, format!("bad {what}")))
}

/// Parses one genome from `(line number, text)` pairs, consuming through
/// its `end` line. Blank lines are skipped.
pub fn parse_genome<'a, R: Real>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
) -> Result<Genome<R>, NetError> {
    let mut next = || lines.find(|(_, l)| !l.trim().is_empty());
    let (ln, header) = next().ok_or_else(|| perr(0, "unexpected end of input"))?;
    let mut tok = header.split_whitespace();
    let tag = tok.next().unwrap_or_default();
    let inputs: usize = field(tok.next(), ln, "input count")?;
    let hidden: usize = field(tok.next(), ln, "hidden count")?;
    if hidden == 0 {
        return Err(NetError::NoHiddenNodes);
    }

    let mut genome: Genome<R> = match tag {
        "snn" => {
            let (kl, kinds_line) = next().ok_or_else(|| perr(ln, "missing kinds line"))?;
            let mut tok = kinds_line.split_whitespace();
            if tok.next() != Some("kinds") {
                return Err(perr(kl, "expected kinds line"));
            }
            let kinds = tok
                .map(|k| match k {
                    "E" => Ok(NodeKind::Excitatory),
                    "I" => Ok(NodeKind::Inhibitory),
                    _ => Err(perr(kl, format!("unknown node kind {k}"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            if kinds.len() != hidden {
                return Err(perr(kl, "kinds count does not match hidden count"));
            }
            Genome::Spiking(SpikingGenome::empty(inputs, kinds))
        }
        "mlp" => Genome::Mlp(MlpGenome::empty(inputs, hidden)),
        other => return Err(perr(ln, format!("unknown genome tag {other:?}"))),
    };

    let slots = genome.connections().count();
    let mut seen = vec![false; slots];
    let mut count = 0usize;
    loop {
        let (ll, line) = next().ok_or_else(|| perr(ln, "missing end line"))?;
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("end") => break,
            Some("link") => {}
            _ => return Err(perr(ll, "expected link or end")),
        }
        let s: usize = field(tok.next(), ll, "source")?;
        let t: usize = field(tok.next(), ll, "target")?;
        let w: R = field(tok.next(), ll, "weight")?;
        let e: u8 = field(tok.next(), ll, "enabled flag")?;
        if e > 1 {
            return Err(perr(ll, "enabled flag must be 0 or 1"));
        }
        let slot = slot_index(&genome, s, t).ok_or(NetError::IllegalLink { from: s, to: t })?;
        if std::mem::replace(&mut seen[slot], true) {
            return Err(perr(ll, format!("duplicate link {s} {t}")));
        }
        let link = match &mut genome {
            Genome::Spiking(g) => g.link_mut(s, t),
            Genome::Mlp(g) => g.link_mut(s, t),
        }
        .expect("slot index already checked");
        *link = Link { weight: w, enabled: e == 1 };
        count += 1;
    }
    if count != slots {
        return Err(perr(ln, format!("expected {slots} links, found {count}")));
    }
    genome.validate()?;
    Ok(genome)
}

fn slot_index<R: Real>(genome: &Genome<R>, s: usize, t: usize) -> Option<usize> {
    genome.connections().position(|(a, b, _)| a == s && b == t)
}

impl<R: Real> std::str::FromStr for Genome<R> {
    type Err = NetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut lines = s.lines().enumerate().map(|(i, l)| (i + 1, l));
        let g = parse_genome(&mut lines)?;
        if let Some((ln, _)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(perr(ln, "trailing content after genome"));
        }
        Ok(g)
    }
}
