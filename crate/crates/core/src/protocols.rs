//! Multi-party protocols: party partitions, pre-shared |Max⟩ resources,
//! meters, classical messages and conditional corrections.
//!
//! The text form (`.pp`), sites written `q1..qn`:
//!
//! ```text
//! protocol d=3 n=3
//! party A: q1 q2
//! party B: q3
//! input q1 random
//! resource max2: q2 q3
//! ctrl X c=q1 t=q2
//! gate F^-1 @q1
//! meter q1 -> m1
//! meter q2 -> m2
//! send A->B m1
//! send A->B m2
//! cond m2 apply X^m2 @q3
//! cond m1 apply Z^m1 @q3
//! expect input @q3
//! ```
//!
//! A party may use a register it measured itself or one that was sent to
//! it. Every gate must act inside one party.

use std::collections::{BTreeMap, BTreeSet};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::entangle::max_state;
use crate::error::{parse_err, Error, Result};
use crate::linalg::{self, C64};
use crate::numerics::PhaseRing;
use crate::sim::circuit::{parse_cond_gate, parse_kind, random_state};
use crate::sim::gates::{ControlFlavor, GateKind, GateSpec};
use crate::sim::state::{measure_with, state_dim, QState};

#[derive(Clone, Debug, PartialEq)]
pub struct Party {
    pub name: String,
    /// 0-based sites.
    pub sites: Vec<usize>,
}

/// A |Max⟩ state on the listed sites, prepared before the protocol starts.
#[derive(Clone, Debug, PartialEq)]
pub struct Resource {
    pub sites: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    Gate(GateSpec),
    Meter { site: usize, reg: String },
    Send { from: String, to: String, reg: String },
    /// Apply `gate` raised to `coef · reg`.
    Cond { reg: String, gate: GateSpec, coef: i64 },
}

/// A per-branch check on the final state.
#[derive(Clone, Debug, PartialEq)]
pub enum Expect {
    /// These sites hold the input state, up to phase.
    Input(Vec<usize>),
    /// These sites hold |Max⟩, up to phase.
    Max(Vec<usize>),
}

/// How the command line should build the input.
#[derive(Clone, Debug, PartialEq)]
pub enum InputSpec {
    Random,
    Basis(Vec<i64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolScript {
    pub d: usize,
    pub n: usize,
    pub parties: Vec<Party>,
    pub resources: Vec<Resource>,
    /// Sites that receive the input state, in order.
    pub inputs: Vec<usize>,
    pub input_spec: InputSpec,
    pub steps: Vec<Step>,
    pub expects: Vec<Expect>,
}

/// The record of one run, or of one branch in exhaustive mode.
#[derive(Clone, Debug)]
pub struct Transcript {
    /// `None` for an enumerated branch.
    pub seed: Option<u64>,
    pub outcomes: BTreeMap<String, usize>,
    pub final_state: QState,
    pub probability: f64,
    pub edits: usize,
    pub cdits: usize,
    /// State after each step, when requested.
    pub snapshots: Vec<QState>,
}

impl Transcript {
    /// `key=value` lines.
    pub fn report(&self) -> String {
        let mut out = String::new();
        if let Some(s) = self.seed {
            out += &format!("seed={s}\n");
        }
        out += &format!("edits={}\ncdits={}\n", self.edits, self.cdits);
        for (k, v) in &self.outcomes {
            out += &format!("outcome.{k}={v}\n");
        }
        out += &format!("probability={:.12}\n", self.probability);
        out
    }
}

impl ProtocolScript {
    pub fn new(d: usize, n: usize) -> Self {
        ProtocolScript {
            d,
            n,
            parties: vec![],
            resources: vec![],
            inputs: vec![],
            input_spec: InputSpec::Random,
            steps: vec![],
            expects: vec![],
        }
    }

    pub fn party(mut self, name: &str, sites: &[usize]) -> Self {
        self.parties.push(Party { name: name.into(), sites: sites.to_vec() });
        self
    }

    pub fn resource(mut self, sites: &[usize]) -> Self {
        self.resources.push(Resource { sites: sites.to_vec() });
        self
    }

    pub fn step(mut self, s: Step) -> Self {
        self.steps.push(s);
        self
    }

    fn gate(self, g: GateSpec) -> Self {
        self.step(Step::Gate(g))
    }

    fn meter(self, site: usize, reg: &str) -> Self {
        self.step(Step::Meter { site, reg: reg.into() })
    }

    fn send(self, from: &str, to: &str, reg: &str) -> Self {
        self.step(Step::Send { from: from.into(), to: to.into(), reg: reg.into() })
    }

    fn cond(self, reg: &str, kind: GateKind, coef: i64, site: usize) -> Self {
        self.step(Step::Cond { reg: reg.into(), gate: GateSpec::new(kind, vec![site]), coef })
    }

    pub fn owner(&self, site: usize) -> Option<&str> {
        self.parties.iter().find(|p| p.sites.contains(&site)).map(|p| p.name.as_str())
    }

    /// Pre-shared resources: those spanning more than one party.
    pub fn edits(&self) -> usize {
        self.resources
            .iter()
            .filter(|r| r.sites.iter().filter_map(|&s| self.owner(s)).collect::<BTreeSet<_>>().len() > 1)
            .count()
    }

    pub fn cdits(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s, Step::Send { .. })).count()
    }

    fn support(&self, ring: &PhaseRing, g: &GateSpec) -> Result<Vec<usize>> {
        Ok(g.local(ring, self.n)?.0)
    }

    fn one_party(&self, sites: &[usize], what: &str) -> Result<String> {
        let owners: BTreeSet<Option<&str>> = sites.iter().map(|&s| self.owner(s)).collect();
        match owners.into_iter().collect::<Vec<_>>().as_slice() {
            [Some(p)] => Ok(p.to_string()),
            [None] => Err(Error::Locality(format!("{what}: site q{} belongs to no party", sites[0] + 1))),
            _ => Err(Error::Locality(format!(
                "{what} crosses parties on sites {}",
                sites.iter().map(|s| format!("q{}", s + 1)).collect::<Vec<_>>().join(",")
            ))),
        }
    }

    /// Check the partition, the resources and the register flow.
    pub fn check(&self, ring: &PhaseRing) -> Result<()> {
        if ring.d != self.d {
            return Err(Error::Invalid(format!("script is d={}, ring is d={}", self.d, ring.d)));
        }
        state_dim(self.d, self.n)?;
        let mut seen = BTreeSet::new();
        for p in &self.parties {
            for &s in &p.sites {
                if s >= self.n {
                    return Err(Error::Range(format!("party {} site q{} outside 1..={}", p.name, s + 1, self.n)));
                }
                if !seen.insert(s) {
                    return Err(Error::SiteClash(s + 1));
                }
            }
        }
        let mut used = BTreeSet::new();
        for s in self.resources.iter().flat_map(|r| r.sites.iter()).chain(&self.inputs) {
            if *s >= self.n {
                return Err(Error::Range(format!("site q{} outside 1..={}", s + 1, self.n)));
            }
            if !used.insert(*s) {
                return Err(Error::SiteClash(s + 1));
            }
        }
        // registers each party can read
        let mut known: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let knows = |known: &BTreeMap<String, BTreeSet<String>>, p: &str, r: &str| known.get(p).is_some_and(|s| s.contains(r));
        for step in &self.steps {
            match step {
                Step::Gate(g) => {
                    self.one_party(&self.support(ring, g)?, "gate")?;
                }
                Step::Meter { site, reg } => {
                    let p = self.one_party(&[*site], "meter")?;
                    known.entry(p).or_default().insert(reg.clone());
                }
                Step::Send { from, to, reg } => {
                    for p in [from, to] {
                        if !self.parties.iter().any(|x| &x.name == p) {
                            return Err(Error::Invalid(format!("unknown party `{p}`")));
                        }
                    }
                    if !knows(&known, from, reg) {
                        return Err(Error::UnknownRegister(format!("{reg} (not held by {from})")));
                    }
                    known.entry(to.clone()).or_default().insert(reg.clone());
                }
                Step::Cond { reg, gate, .. } => {
                    let p = self.one_party(&self.support(ring, gate)?, "correction")?;
                    if !knows(&known, &p, reg) {
                        return Err(Error::UnknownRegister(format!("{reg} (not held by {p})")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Input on the input sites, |Max⟩ on each resource, |0⟩ elsewhere.
    pub fn initial_state(&self, ring: &PhaseRing, input: &QState) -> Result<QState> {
        if input.n != self.inputs.len() || input.d != self.d {
            return Err(Error::Width(format!(
                "script takes a {}-qudit input, got {} qudits at d={}",
                self.inputs.len(),
                input.n,
                input.d
            )));
        }
        let mut factors: Vec<(Vec<usize>, QState)> = vec![];
        if !self.inputs.is_empty() {
            factors.push((self.inputs.clone(), input.normalized()));
        }
        for r in &self.resources {
            factors.push((r.sites.clone(), max_state(ring, r.sites.len())?));
        }
        let dim = state_dim(self.d, self.n)?;
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        let covered: BTreeSet<usize> = factors.iter().flat_map(|f| f.0.iter().cloned()).collect();
        for (i, a) in amps.iter_mut().enumerate() {
            let dg = linalg::digits(i, self.d, self.n);
            if (0..self.n).any(|s| !covered.contains(&s) && dg[s] != 0) {
                continue;
            }
            let mut z = C64::new(1.0, 0.0);
            for (sites, st) in &factors {
                let local: Vec<usize> = sites.iter().map(|&s| dg[s]).collect();
                z *= st.amps[linalg::index_of(&local, self.d)];
            }
            *a = z;
        }
        QState::from_amps(self.d, self.n, amps)
    }

    fn apply(&self, ring: &PhaseRing, step: &Step, s: &mut QState, regs: &BTreeMap<String, usize>) -> Result<()> {
        match step {
            Step::Gate(g) => g.apply(ring, s),
            Step::Cond { reg, gate, coef } => {
                let v = *regs.get(reg).ok_or_else(|| Error::UnknownRegister(reg.clone()))? as i64;
                gate.clone().pow(coef * v).apply(ring, s)
            }
            Step::Send { .. } | Step::Meter { .. } => Ok(()),
        }
    }

    fn transcript(&self, seed: Option<u64>, state: QState, outcomes: BTreeMap<String, usize>, p: f64, snaps: Vec<QState>) -> Transcript {
        Transcript { seed, outcomes, final_state: state, probability: p, edits: self.edits(), cdits: self.cdits(), snapshots: snaps }
    }

    /// One seeded run.
    pub fn run(&self, ring: &PhaseRing, input: &QState, seed: u64) -> Result<Transcript> {
        self.run_inner(ring, input, seed, false)
    }

    /// A seeded run that keeps the state after every step.
    pub fn run_traced(&self, ring: &PhaseRing, input: &QState, seed: u64) -> Result<Transcript> {
        self.run_inner(ring, input, seed, true)
    }

    fn run_inner(&self, ring: &PhaseRing, input: &QState, seed: u64, trace: bool) -> Result<Transcript> {
        self.check(ring)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = self.initial_state(ring, input)?;
        let mut regs = BTreeMap::new();
        let mut prob = 1.0;
        let mut snaps = vec![];
        for step in &self.steps {
            if let Step::Meter { site, reg } = step {
                let (k, post, p) = measure_with(&s, *site, &mut rng)?;
                s = post;
                prob *= p;
                regs.insert(reg.clone(), k);
            } else {
                self.apply(ring, step, &mut s, &regs)?;
            }
            if trace {
                snaps.push(s.clone());
            }
        }
        Ok(self.transcript(Some(seed), s, regs, prob, snaps))
    }

    /// Every outcome branch with probability above 1e-12.
    pub fn branches(&self, ring: &PhaseRing, input: &QState) -> Result<Vec<Transcript>> {
        self.check(ring)?;
        let mut live = vec![(self.initial_state(ring, input)?, BTreeMap::new(), 1.0)];
        for step in &self.steps {
            if let Step::Meter { site, reg } = step {
                let mut next = vec![];
                for (s, regs, p) in live {
                    for (k, pk) in s.marginal(*site).into_iter().enumerate() {
                        if p * pk <= 1e-12 {
                            continue;
                        }
                        let mut r2: BTreeMap<String, usize> = regs.clone();
                        r2.insert(reg.clone(), k);
                        next.push((s.project(*site, k).normalized(), r2, p * pk));
                    }
                }
                live = next;
            } else {
                for (s, regs, _) in live.iter_mut() {
                    self.apply(ring, step, s, regs)?;
                }
            }
        }
        Ok(live.into_iter().map(|(s, r, p)| self.transcript(None, s, r, p, vec![])).collect())
    }

    /// Worst `1 − |⟨want|got⟩|` over the expectations of one transcript.
    pub fn expect_residual(&self, ring: &PhaseRing, input: &QState, t: &Transcript) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for e in &self.expects {
            let (sites, want) = match e {
                Expect::Input(s) => (s, input.clone()),
                Expect::Max(s) => (s, max_state(ring, s.len())?),
            };
            let got = match t.final_state.restrict(sites) {
                Ok(g) => g,
                Err(_) => return Ok(1.0),
            };
            if got.n != want.n {
                return Ok(1.0);
            }
            worst = worst.max(1.0 - got.overlap(&want));
        }
        Ok(worst)
    }

    /// The input described by the script, seeded when random.
    pub fn default_input(&self, seed: u64) -> Result<QState> {
        match &self.input_spec {
            InputSpec::Random => random_state(self.d, self.inputs.len(), seed),
            InputSpec::Basis(ks) => QState::basis(self.d, ks),
        }
    }
}

/// Alice holds q1 (input) and q2, Bob holds q3; q2, q3 share |Max⟩₂.
/// Bob corrects with X^{m₂} then Z^{m₁}.
pub fn teleportation_script(ring: &PhaseRing) -> ProtocolScript {
    let mut s = ProtocolScript::new(ring.d, 3)
        .party("A", &[0, 1])
        .party("B", &[2])
        .resource(&[1, 2])
        .gate(ctrl(GateKind::X, 0, 1))
        .gate(GateSpec::new(GateKind::F, vec![0]).pow(-1))
        .meter(0, "m1")
        .meter(1, "m2")
        .send("A", "B", "m1")
        .send("A", "B", "m2")
        .cond("m2", GateKind::X, 1, 2)
        .cond("m1", GateKind::Z, 1, 2);
    s.inputs = vec![0];
    s.expects = vec![Expect::Input(vec![2])];
    s
}

/// C_A with `c` controlling `t`; `.pow(-1)` gives C_{A^{-1}}.
fn ctrl(kind: GateKind, c: usize, t: usize) -> GateSpec {
    GateSpec::new(GateKind::Controlled { base: Box::new(kind), flavor: ControlFlavor::FirstControls }, vec![c, t])
}

/// Chain |Max⟩₂ resources into |Max⟩ₙ. Party P1 holds q1, P2..P(n−1) hold
/// two qudits each and Pn holds the last one. Each middle party merges
/// its two qudits, meters one, and the next party corrects with
/// Y^{−ℓ}. n−1 resources, n−2 messages.
pub fn build_max_script(ring: &PhaseRing, n: usize) -> Result<ProtocolScript> {
    if n < 2 {
        return Err(Error::Invalid(format!("build_max needs n >= 2, got {n}")));
    }
    let total = 2 * (n - 1);
    let name = |j: usize| format!("P{j}");
    let mut s = ProtocolScript::new(ring.d, total).party(&name(1), &[0]);
    for j in 2..n {
        s = s.party(&name(j), &[2 * j - 3, 2 * j - 2]);
    }
    s = s.party(&name(n), &[total - 1]);
    for i in 0..n - 1 {
        s = s.resource(&[2 * i, 2 * i + 1]);
    }
    let mut keep = vec![0];
    for j in 2..n {
        let (m, e) = (2 * j - 3, 2 * j - 2);
        let reg = format!("l{j}");
        s = s
            .gate(ctrl(GateKind::X, e, m))
            .gate(GateSpec::new(GateKind::F, vec![e]))
            .gate(ctrl(GateKind::X, e, m).pow(-1))
            .meter(e, &reg)
            .send(&name(j), &name(j + 1), &reg)
            .cond(&reg, GateKind::Y, -1, e + 1);
        keep.push(m);
    }
    keep.push(total - 1);
    s.expects = vec![Expect::Max(keep)];
    Ok(s)
}

/// Merge one |Max⟩ per party (sizes n_1..n_p) through a |Max⟩_p held by
/// the party leaders. Party j meters its leader to ℓ_j, applies Z^{−ℓ_j}
/// to each of its members and sends ℓ_j to party j+1 (cyclically), which
/// applies X^{ℓ_j} to its last member.
pub fn bvk_merge_script(ring: &PhaseRing, sizes: &[usize]) -> Result<ProtocolScript> {
    if sizes.len() < 2 || sizes.contains(&0) {
        return Err(Error::Invalid(format!("need at least two parties of size >= 1, got {sizes:?}")));
    }
    let p = sizes.len();
    let total: usize = sizes.iter().map(|k| k + 1).sum();
    let mut s = ProtocolScript::new(ring.d, total);
    let mut members = vec![];
    let mut leaders = vec![];
    let mut at = 0;
    for (j, &k) in sizes.iter().enumerate() {
        let m: Vec<usize> = (at..at + k).collect();
        s = s.party(&format!("P{}", j + 1), &(at..=at + k).collect::<Vec<_>>());
        if k > 1 {
            s = s.resource(&m);
        }
        members.push(m);
        leaders.push(at + k);
        at += k + 1;
    }
    s = s.resource(&leaders);
    for j in 0..p {
        let (e, last) = (leaders[j], *members[j].last().unwrap());
        let reg = format!("l{}", j + 1);
        s = s
            .gate(ctrl(GateKind::X, e, last))
            .gate(GateSpec::new(GateKind::F, vec![e]))
            .gate(ctrl(GateKind::X, e, last).pow(-1))
            .meter(e, &reg);
        for &m in &members[j] {
            s = s.cond(&reg, GateKind::Z, -1, m);
        }
    }
    for j in 0..p {
        let next = (j + 1) % p;
        let reg = format!("l{}", j + 1);
        s = s.send(&format!("P{}", j + 1), &format!("P{}", next + 1), &reg).cond(
            &reg,
            GateKind::X,
            1,
            *members[next].last().unwrap(),
        );
    }
    s.expects = vec![Expect::Max(members.concat())];
    Ok(s)
}

/// Which qudit controls in the phase-space measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseSpaceVariant {
    /// C_X from q1, F^{−1} on q1, C_{X^{−1}}; meters read (ℓ₁, ℓ₂).
    FirstControls,
    /// C_X from q2, F on q2, C_{X^{−1}}; meters read (ℓ₂, ℓ₁).
    SecondControls,
}

/// Two-qudit measurement in phase space, writing registers `l1`, `l2`.
/// On |Max_k⟩ it reads ℓ₁ = −k₂, ℓ₂ = k₁ + 2k₂ with certainty.
pub fn phase_space_measurement(ring: &PhaseRing, variant: PhaseSpaceVariant) -> ProtocolScript {
    let base = ProtocolScript::new(ring.d, 2).party("A", &[0, 1]);
    let mut s = match variant {
        PhaseSpaceVariant::FirstControls => base
            .gate(ctrl(GateKind::X, 0, 1))
            .gate(GateSpec::new(GateKind::F, vec![0]).pow(-1))
            .gate(ctrl(GateKind::X, 0, 1).pow(-1))
            .meter(0, "l1")
            .meter(1, "l2"),
        PhaseSpaceVariant::SecondControls => base
            .gate(ctrl(GateKind::X, 1, 0))
            .gate(GateSpec::new(GateKind::F, vec![1]))
            .gate(ctrl(GateKind::X, 1, 0).pow(-1))
            .meter(0, "l2")
            .meter(1, "l1"),
    };
    s.inputs = vec![0, 1];
    s
}

/// Outcome distribution over (ℓ₁, ℓ₂).
pub fn phase_space_distribution(ring: &PhaseRing, variant: PhaseSpaceVariant, psi: &QState) -> Result<BTreeMap<(usize, usize), f64>> {
    let mut out = BTreeMap::new();
    for t in phase_space_measurement(ring, variant).branches(ring, psi)? {
        *out.entry((t.outcomes["l1"], t.outcomes["l2"])).or_insert(0.0) += t.probability;
    }
    Ok(out)
}

fn site_tok(tok: &str, n: usize, line: usize) -> Result<usize> {
    let v: usize = tok
        .trim()
        .strip_prefix('q')
        .and_then(|r| r.parse().ok())
        .ok_or_else(|| parse_err(line, format!("expected a site like `q1`, got `{tok}`")))?;
    if v == 0 || v > n {
        return Err(parse_err(line, format!("site q{v} outside q1..q{n}")));
    }
    Ok(v - 1)
}

fn site_list(tok: &str, n: usize, line: usize) -> Result<Vec<usize>> {
    tok.trim_start_matches('@').split(',').map(|t| site_tok(t, n, line)).collect()
}

fn kv_int(tok: &str, key: &str, line: usize) -> Result<usize> {
    tok.strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| parse_err(line, format!("expected `{key}=<int>`, got `{tok}`")))
}

/// Parse the protocol text form. Structural checks (locality, register
/// flow) are done by [`ProtocolScript::check`].
pub fn parse_protocol(text: &str) -> Result<ProtocolScript> {
    let mut script: Option<ProtocolScript> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        let Some(s) = script.as_mut() else {
            if toks.len() != 3 || toks[0] != "protocol" {
                return Err(parse_err(line, "expected header `protocol d=<int> n=<int>`"));
            }
            let d = kv_int(toks[1], "d", line)?;
            let n = kv_int(toks[2], "n", line)?;
            if d < 2 || n == 0 {
                return Err(parse_err(line, format!("need d >= 2 and n >= 1, got d={d} n={n}")));
            }
            script = Some(ProtocolScript::new(d, n));
            continue;
        };
        let n = s.n;
        match toks[0] {
            "party" => {
                let name = toks.get(1).and_then(|t| t.strip_suffix(':')).ok_or_else(|| parse_err(line, "expected `party NAME: q1 q2 ...`"))?;
                let sites = toks[2..].iter().map(|t| site_tok(t, n, line)).collect::<Result<Vec<_>>>()?;
                if sites.is_empty() {
                    return Err(parse_err(line, format!("party {name} has no sites")));
                }
                s.parties.push(Party { name: name.into(), sites });
            }
            "resource" => {
                let k: usize = toks
                    .get(1)
                    .and_then(|t| t.strip_prefix("max"))
                    .and_then(|t| t.strip_suffix(':'))
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| parse_err(line, "expected `resource maxK: q.. q..`"))?;
                let sites = toks[2..].iter().map(|t| site_tok(t, n, line)).collect::<Result<Vec<_>>>()?;
                if sites.len() != k {
                    return Err(parse_err(line, format!("max{k} lists {} sites", sites.len())));
                }
                s.resources.push(Resource { sites });
            }
            "input" => {
                let split = toks.iter().skip(1).position(|t| !t.starts_with('q')).map_or(toks.len(), |p| p + 1);
                s.inputs = toks[1..split].iter().map(|t| site_tok(t, n, line)).collect::<Result<Vec<_>>>()?;
                s.input_spec = match toks.get(split) {
                    None | Some(&"random") => InputSpec::Random,
                    Some(&"basis") => InputSpec::Basis(
                        toks[split + 1..]
                            .iter()
                            .map(|t| t.parse().map_err(|_| parse_err(line, format!("bad digit `{t}`"))))
                            .collect::<Result<Vec<i64>>>()?,
                    ),
                    Some(other) => return Err(parse_err(line, format!("unknown input kind `{other}`"))),
                };
                if let InputSpec::Basis(ks) = &s.input_spec {
                    if ks.len() != s.inputs.len() {
                        return Err(parse_err(line, "basis digits must match the input sites"));
                    }
                }
            }
            "gate" => {
                let (name, sites) = match toks.as_slice() {
                    [_, name, sites] => (*name, *sites),
                    _ => return Err(parse_err(line, "expected `gate NAME @q..`")),
                };
                let (kind, pow) = parse_kind(name, line)?;
                s.steps.push(Step::Gate(GateSpec::new(kind, site_list(sites, n, line)?).pow(pow)));
            }
            "ctrl" => {
                if toks.len() != 4 {
                    return Err(parse_err(line, "expected `ctrl NAME c=q.. t=q..`"));
                }
                let (kind, pow) = parse_kind(toks[1], line)?;
                let c = toks[2].strip_prefix("c=").ok_or_else(|| parse_err(line, "expected `c=q..`"))?;
                let t = toks[3].strip_prefix("t=").ok_or_else(|| parse_err(line, "expected `t=q..`"))?;
                let (c, t) = (site_tok(c, n, line)?, site_tok(t, n, line)?);
                if c == t {
                    return Err(parse_err(line, format!("control and target are both q{}", c + 1)));
                }
                s.steps.push(Step::Gate(ctrl(kind, c, t).pow(pow)));
            }
            "meter" => {
                if toks.len() != 4 || toks[2] != "->" {
                    return Err(parse_err(line, "expected `meter q.. -> REG`"));
                }
                s.steps.push(Step::Meter { site: site_tok(toks[1], n, line)?, reg: toks[3].into() });
            }
            "send" => {
                let (from, to) = toks
                    .get(1)
                    .and_then(|t| t.split_once("->"))
                    .filter(|_| toks.len() == 3)
                    .ok_or_else(|| parse_err(line, "expected `send FROM->TO REG`"))?;
                s.steps.push(Step::Send { from: from.into(), to: to.into(), reg: toks[2].into() });
            }
            "cond" => {
                if toks.len() != 5 || toks[2] != "apply" {
                    return Err(parse_err(line, "expected `cond REG apply NAME^EXP @q..`"));
                }
                let (name, coef, reg) = parse_cond_gate(toks[3], line)?;
                if reg != toks[1] {
                    return Err(parse_err(line, format!("exponent uses `{reg}`, condition reads `{}`", toks[1])));
                }
                let (kind, _) = parse_kind(&name, line)?;
                s.steps.push(Step::Cond { reg, gate: GateSpec::new(kind, site_list(toks[4], n, line)?), coef });
            }
            "expect" => {
                let e = match toks.as_slice() {
                    [_, "input", sites] => Expect::Input(site_list(sites, n, line)?),
                    [_, "max", sites] => Expect::Max(site_list(sites, n, line)?),
                    _ => return Err(parse_err(line, "expected `expect input|max @q..`")),
                };
                s.expects.push(e);
            }
            other => return Err(parse_err(line, format!("unknown instruction `{other}`"))),
        }
    }
    script.ok_or_else(|| parse_err(1, "empty input"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entangle::max_basis;
    use crate::numerics::make_phase_ring;

    fn worst(ring: &PhaseRing, s: &ProtocolScript, input: &QState) -> f64 {
        let br = s.branches(ring, input).unwrap();
        let total: f64 = br.iter().map(|t| t.probability).sum();
        assert!((total - 1.0).abs() < 1e-9);
        br.iter().map(|t| s.expect_residual(ring, input, t).unwrap()).fold(0.0, f64::max)
    }

    #[test]
    fn teleportation_every_branch() {
        for d in [2, 3, 5] {
            let r = make_phase_ring(d).unwrap();
            let s = teleportation_script(&r);
            assert_eq!((s.edits(), s.cdits()), (1, 2));
            let psi = random_state(d, 1, 3).unwrap();
            assert_eq!(s.branches(&r, &psi).unwrap().len(), d * d);
            assert!(worst(&r, &s, &psi) < 1e-9, "d={d}");
        }
    }

    #[test]
    fn max_chain_and_merge() {
        for (n, d) in [(2, 3), (3, 2), (3, 3), (4, 2)] {
            let r = make_phase_ring(d).unwrap();
            let s = build_max_script(&r, n).unwrap();
            assert_eq!(s.edits(), n - 1);
            assert_eq!(s.cdits(), n - 2);
            let input = QState::from_amps(d, 0, vec![C64::new(1.0, 0.0)]).unwrap();
            assert!(worst(&r, &s, &input) < 1e-9, "n={n} d={d}");
        }
        for sizes in [vec![1, 1], vec![2, 2], vec![1, 2], vec![1, 1, 1], vec![2, 1, 1]] {
            let r = make_phase_ring(2).unwrap();
            let s = bvk_merge_script(&r, &sizes).unwrap();
            let input = QState::from_amps(2, 0, vec![C64::new(1.0, 0.0)]).unwrap();
            assert_eq!(s.cdits(), sizes.len());
            assert!(worst(&r, &s, &input) < 1e-9, "{sizes:?}");
        }
    }

    #[test]
    fn locality_is_enforced() {
        let r = make_phase_ring(3).unwrap();
        let bad = teleportation_script(&r).gate(ctrl(GateKind::X, 1, 2));
        assert!(matches!(bad.check(&r), Err(Error::Locality(_))));
        let mut unsent = teleportation_script(&r);
        unsent.steps.retain(|s| !matches!(s, Step::Send { reg, .. } if reg == "m1"));
        assert!(matches!(unsent.check(&r), Err(Error::UnknownRegister(_))));
    }

    #[test]
    fn phase_space_reads_max_labels() {
        for d in [2, 3, 4] {
            let r = make_phase_ring(d).unwrap();
            for k1 in 0..d as i64 {
                for k2 in 0..d as i64 {
                    let psi = max_basis(&r, &[k1, k2]).unwrap();
                    let want = ((-k2).rem_euclid(d as i64) as usize, (k1 + 2 * k2).rem_euclid(d as i64) as usize);
                    for v in [PhaseSpaceVariant::FirstControls, PhaseSpaceVariant::SecondControls] {
                        let dist = phase_space_distribution(&r, v, &psi).unwrap();
                        assert!((dist[&want] - 1.0).abs() < 1e-9, "d={d} k=({k1},{k2}) {v:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn parse_round() {
        let text = "protocol d=3 n=3\nparty A: q1 q2\nparty B: q3\ninput q1 basis 2\nresource max2: q2 q3\n\
                    ctrl X c=q1 t=q2\ngate F^-1 @q1\nmeter q1 -> m1\nmeter q2 -> m2\nsend A->B m1\nsend A->B m2\n\
                    cond m2 apply X^m2 @q3\ncond m1 apply Z^m1 @q3\nexpect input @q3\n";
        let s = parse_protocol(text).unwrap();
        let r = make_phase_ring(3).unwrap();
        let mut t = teleportation_script(&r);
        t.input_spec = InputSpec::Basis(vec![2]);
        assert_eq!(s, t);
        assert!(matches!(parse_protocol("protocol d=3 n=2\nparty A: q1\nmeter q4 -> m\n"), Err(Error::Parse { line: 3, .. })));
        let a = s.run(&r, &s.default_input(0).unwrap(), 9).unwrap();
        let b = s.run(&r, &s.default_input(0).unwrap(), 9).unwrap();
        assert_eq!(a.report(), b.report());
    }
}
