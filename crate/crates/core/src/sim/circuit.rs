//! A small circuit language with meters and classically controlled gates.
//!
//! ```text
//! circuit d=3 n=3
//! gate F@1
//! ctrl X c=1 t=2
//! gate SFT@2,3
//! measure@1 -> m1
//! cond m1 apply Z^-m1 @3
//! ```
//!
//! Sites are 1-based. Gate names are X, Y, Z, F, G, CZ and SFT, with an
//! optional integer power (`F^-1`). `braid+ @s` and `braid- @s` act on
//! 1-based strands, `sym m @j` on qudits (j, j+1), and a bare `sft`
//! applies the string Fourier transform to the whole register.

use std::collections::BTreeMap;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{parse_err, Error, Result};
use crate::linalg;
use crate::numerics::PhaseRing;
use crate::sim::gates::{embed, ControlFlavor, GateKind, GateSpec};
use crate::sim::state::{measure_with, QOperator, QState};

#[derive(Clone, Debug, PartialEq)]
pub enum Instr {
    Gate(GateSpec),
    Measure { site: usize, reg: String },
    /// Apply `gate` raised to `coef · reg`.
    Cond { reg: String, gate: GateSpec, coef: i64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub d: usize,
    pub n: usize,
    pub instrs: Vec<Instr>,
}

/// One execution path: the final state, the meter readings and the
/// probability of that path.
#[derive(Clone, Debug)]
pub struct Branch {
    pub state: QState,
    pub registers: BTreeMap<String, usize>,
    pub probability: f64,
}

pub(crate) fn parse_kind(name: &str, line: usize) -> Result<(GateKind, i64)> {
    let (base, pow) = match name.split_once('^') {
        Some((b, p)) => (b, p.parse::<i64>().map_err(|_| parse_err(line, format!("bad power `{p}`")))?),
        None => (name, 1),
    };
    let kind = match base {
        "X" => GateKind::X,
        "Y" => GateKind::Y,
        "Z" => GateKind::Z,
        "F" => GateKind::F,
        "G" => GateKind::G,
        "CZ" => GateKind::CZ,
        "SFT" => GateKind::Sft,
        _ => return Err(parse_err(line, format!("unknown gate `{base}`"))),
    };
    Ok((kind, pow))
}

fn parse_sites(s: &str, n: usize, line: usize) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| {
            let v: usize = t.trim().parse().map_err(|_| parse_err(line, format!("bad site `{t}`")))?;
            if v == 0 || v > n {
                return Err(parse_err(line, format!("site {v} outside 1..={n}")));
            }
            Ok(v - 1)
        })
        .collect()
}

fn kv(tok: &str, key: &str, line: usize) -> Result<usize> {
    tok.strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| parse_err(line, format!("expected `{key}=<int>`, got `{tok}`")))
}

/// Parse `X^-2m1` style exponents into (gate name, coefficient, register).
pub(crate) fn parse_cond_gate(tok: &str, line: usize) -> Result<(String, i64, String)> {
    let (name, exp) = tok.split_once('^').ok_or_else(|| parse_err(line, format!("`{tok}` needs an exponent like `Z^-m1`")))?;
    let (sign, rest) = match exp.strip_prefix('-') {
        Some(r) => (-1, r),
        None => (1, exp.strip_prefix('+').unwrap_or(exp)),
    };
    let digits: String = rest.chars().take_while(|c| c.is_ascii_digit()).collect();
    let reg = &rest[digits.len()..];
    if reg.is_empty() {
        return Err(parse_err(line, format!("exponent `{exp}` names no register")));
    }
    let mag: i64 = if digits.is_empty() { 1 } else { digits.parse().map_err(|_| parse_err(line, "bad coefficient"))? };
    Ok((name.to_string(), sign * mag, reg.to_string()))
}

/// Parse the circuit text form.
pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut header: Option<(usize, usize)> = None;
    let mut instrs = vec![];
    let mut regs: Vec<String> = vec![];
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        let Some((d, n)) = header else {
            if toks.len() != 3 || toks[0] != "circuit" {
                return Err(parse_err(line, "expected header `circuit d=<int> n=<int>`"));
            }
            let d = kv(toks[1], "d", line)?;
            let n = kv(toks[2], "n", line)?;
            if d < 2 {
                return Err(parse_err(line, format!("d must be at least 2, got {d}")));
            }
            if n == 0 {
                return Err(parse_err(line, "n must be positive"));
            }
            header = Some((d, n));
            continue;
        };
        let instr = match toks[0] {
            "gate" => {
                let spec = toks.get(1).ok_or_else(|| parse_err(line, "`gate` needs NAME@sites"))?;
                let (name, sites) = spec.split_once('@').ok_or_else(|| parse_err(line, format!("missing `@` in `{spec}`")))?;
                let (kind, pow) = parse_kind(name, line)?;
                Instr::Gate(GateSpec::new(kind, parse_sites(sites, n, line)?).pow(pow))
            }
            "ctrl" => {
                if toks.len() != 4 {
                    return Err(parse_err(line, "expected `ctrl NAME c=<site> t=<site>`"));
                }
                let (kind, pow) = parse_kind(toks[1], line)?;
                let c = kv(toks[2], "c", line)?;
                let t = kv(toks[3], "t", line)?;
                let sites = parse_sites(&format!("{c},{t}"), n, line)?;
                if c == t {
                    return Err(parse_err(line, format!("control and target are both {c}")));
                }
                let base = GateSpec::new(kind, vec![0]).pow(pow);
                let (_, m) = base.local(&PhaseRing::new(d)?, 1).map_err(|e| parse_err(line, e.to_string()))?;
                Instr::Gate(GateSpec::new(
                    GateKind::Controlled { base: Box::new(GateKind::Custom(m)), flavor: ControlFlavor::FirstControls },
                    sites,
                ))
            }
            "sft" => Instr::Gate(GateSpec::new(GateKind::Sft, (0..n).collect())),
            "braid+" | "braid-" => {
                let s: usize = toks
                    .get(1)
                    .and_then(|t| t.strip_prefix('@'))
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| parse_err(line, "expected `braid± @<strand>`"))?;
                if s == 0 || s >= 2 * n {
                    return Err(parse_err(line, format!("braid strand {s} outside 1..{}", 2 * n)));
                }
                Instr::Gate(GateSpec::new(GateKind::Braid { positive: toks[0] == "braid+" }, vec![s]))
            }
            "sym" => {
                if toks.len() != 3 {
                    return Err(parse_err(line, "expected `sym <m> @<site>`"));
                }
                let m: i64 = toks[1].parse().map_err(|_| parse_err(line, format!("bad index `{}`", toks[1])))?;
                let j = parse_sites(toks[2].trim_start_matches('@'), n, line)?[0];
                if j + 1 >= n {
                    return Err(parse_err(line, format!("sym at {} needs a right neighbour", j + 1)));
                }
                Instr::Gate(GateSpec::new(GateKind::Sym { m }, vec![j]))
            }
            t if t.starts_with("measure@") => {
                if toks.len() != 3 || toks[1] != "->" {
                    return Err(parse_err(line, "expected `measure@<site> -> <register>`"));
                }
                let site = parse_sites(&t["measure@".len()..], n, line)?[0];
                regs.push(toks[2].to_string());
                Instr::Measure { site, reg: toks[2].to_string() }
            }
            "cond" => {
                if toks.len() != 5 || toks[2] != "apply" {
                    return Err(parse_err(line, "expected `cond <reg> apply NAME^<exp> @<sites>`"));
                }
                let reg = toks[1].to_string();
                if !regs.contains(&reg) {
                    return Err(parse_err(line, format!("register `{reg}` is read before it is written")));
                }
                let (name, coef, ereg) = parse_cond_gate(toks[3], line)?;
                if ereg != reg {
                    return Err(parse_err(line, format!("exponent uses `{ereg}`, condition reads `{reg}`")));
                }
                let (kind, _) = parse_kind(&name, line)?;
                let sites = parse_sites(toks[4].trim_start_matches('@'), n, line)?;
                Instr::Cond { reg, gate: GateSpec::new(kind, sites), coef }
            }
            other => return Err(parse_err(line, format!("unknown instruction `{other}`"))),
        };
        instrs.push(instr);
    }
    let (d, n) = header.ok_or_else(|| parse_err(1, "empty input"))?;
    Ok(Circuit { d, n, instrs })
}

impl Circuit {
    pub fn new(d: usize, n: usize) -> Self {
        Circuit { d, n, instrs: vec![] }
    }

    pub fn push(mut self, i: Instr) -> Self {
        self.instrs.push(i);
        self
    }

    pub fn has_measurements(&self) -> bool {
        self.instrs.iter().any(|i| matches!(i, Instr::Measure { .. }))
    }

    fn check_ring(&self, ring: &PhaseRing, s: &QState) -> Result<()> {
        if ring.d != self.d || s.d != self.d || s.n != self.n {
            return Err(Error::Invalid(format!(
                "circuit is d={} n={}, got ring d={} and state d={} n={}",
                self.d, self.n, ring.d, s.d, s.n
            )));
        }
        Ok(())
    }

    fn step(&self, ring: &PhaseRing, i: &Instr, b: &mut Branch) -> Result<()> {
        match i {
            Instr::Gate(g) => g.apply(ring, &mut b.state),
            Instr::Cond { reg, gate, coef } => {
                let v = *b.registers.get(reg).ok_or_else(|| Error::UnknownRegister(reg.clone()))? as i64;
                gate.clone().pow(coef * v).apply(ring, &mut b.state)
            }
            Instr::Measure { .. } => unreachable!(),
        }
    }

    /// One seeded run.
    pub fn run(&self, ring: &PhaseRing, input: &QState, seed: u64) -> Result<Branch> {
        self.check_ring(ring, input)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut b = Branch { state: input.normalized(), registers: BTreeMap::new(), probability: 1.0 };
        for i in &self.instrs {
            if let Instr::Measure { site, reg } = i {
                let (k, post, p) = measure_with(&b.state, *site, &mut rng)?;
                b.state = post;
                b.probability *= p;
                b.registers.insert(reg.clone(), k);
            } else {
                self.step(ring, i, &mut b)?;
            }
        }
        Ok(b)
    }

    /// Every branch with probability above `1e-12`, in outcome order.
    pub fn branches(&self, ring: &PhaseRing, input: &QState) -> Result<Vec<Branch>> {
        self.check_ring(ring, input)?;
        let mut live = vec![Branch { state: input.normalized(), registers: BTreeMap::new(), probability: 1.0 }];
        for i in &self.instrs {
            if let Instr::Measure { site, reg } = i {
                let mut next = vec![];
                for b in live {
                    let marg = b.state.marginal(*site);
                    for (k, p) in marg.into_iter().enumerate() {
                        if p * b.probability <= 1e-12 {
                            continue;
                        }
                        let mut regs = b.registers.clone();
                        regs.insert(reg.clone(), k);
                        next.push(Branch {
                            state: b.state.project(*site, k).normalized(),
                            registers: regs,
                            probability: b.probability * p,
                        });
                    }
                }
                live = next;
            } else {
                for b in live.iter_mut() {
                    self.step(ring, i, b)?;
                }
            }
        }
        Ok(live)
    }

    /// The full operator of a measurement-free circuit.
    pub fn unitary(&self, ring: &PhaseRing) -> Result<QOperator> {
        let dim = crate::sim::state::state_dim(self.d, self.n)?;
        let mut u = QOperator::identity(self.d, self.n);
        for i in &self.instrs {
            match i {
                Instr::Gate(g) => {
                    let (sites, m) = g.local(ring, self.n)?;
                    u = embed(self.d, self.n, &sites, &m)?.mul(&u)?;
                }
                _ => return Err(Error::Invalid("circuit has meters; use branches".into())),
            }
        }
        debug_assert_eq!(u.matrix.nrows(), dim);
        Ok(u)
    }
}

/// A uniformly random normalised state (seeded).
pub fn random_state(d: usize, n: usize, seed: u64) -> Result<QState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    QState::random(d, n, &mut rng)
}

/// `max|U - V|` for two measurement-free circuits.
pub fn circuit_distance(ring: &PhaseRing, a: &Circuit, b: &Circuit) -> Result<f64> {
    Ok(linalg::max_diff(&a.unitary(ring)?.matrix, &b.unitary(ring)?.matrix))
}
