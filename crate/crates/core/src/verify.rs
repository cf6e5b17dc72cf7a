//! Named verification suites. Each produces `key=value` lines and a
//! final `PASS` or `FAIL`.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::clifford::{
    is_clifford, verify_braid_clifford, verify_braid_clifford_corrected, verify_fsclifford1,
    verify_fsclifford1_corrected, verify_sft2,
};
use crate::diagram::{parse_diagram, sft_rotate, twisted_tensor_scalar};
use crate::entangle::{entanglement_entropy, ghz_basis, ghz_state, max_basis, max_state};
use crate::error::{Error, Result};
use crate::evaluator::{
    braid_op, evaluate, parafermion_relations_check, resolution_of_identity_check, tl_op, BraidSign,
};
use crate::linalg::{self, kron_all, mat_pow, max_diff, Mat, C64};
use crate::numerics::{make_phase_ring, PhaseRing};
use crate::protocols::{build_max_script, bvk_merge_script, teleportation_script, ProtocolScript};
use crate::sim::circuit::random_state;
use crate::sim::gates::{fourier_gate, gaussian_gate, pauli_gate, Pauli};
use crate::sim::sft::{sft_gate, SftMethod};
use crate::sim::state::{QOperator, QState};
use crate::sim::tricks::circuit_tricks_check;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Relations,
    Sft,
    Entropy,
    Clifford,
    Tricks,
    Protocols,
}

impl Suite {
    pub const ALL: [Suite; 6] = [Suite::Relations, Suite::Sft, Suite::Entropy, Suite::Clifford, Suite::Tricks, Suite::Protocols];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Relations => "relations",
            Suite::Sft => "sft",
            Suite::Entropy => "entropy",
            Suite::Clifford => "clifford",
            Suite::Tricks => "tricks",
            Suite::Protocols => "protocols",
        }
    }

    /// Degrees used when none is given.
    fn default_degrees(self) -> &'static [usize] {
        match self {
            Suite::Relations => &[2, 3, 4, 5],
            Suite::Tricks => &[2, 3],
            _ => &[2, 3, 5],
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown suite `{s}` (relations, sft, entropy, clifford, tricks, protocols)")))
    }
}

/// One line of a report.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub key: String,
    pub value: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: Suite) -> Self {
        SuiteReport { suite, checks: vec![] }
    }

    /// A residual that must stay below `tol`.
    fn residual(&mut self, key: String, value: f64, tol: f64) {
        self.checks.push(Check { key, value, pass: value < tol });
    }

    /// A count or flag that must equal `want`.
    fn exact(&mut self, key: String, value: f64, want: f64) {
        self.checks.push(Check { key, value, pass: value == want });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().filter(|c| c.key.contains("residual")).map(|c| c.value).fold(0.0, f64::max)
    }

    /// `suite.key=value` lines, failing keys marked, then PASS or FAIL.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let s = self.suite.name();
        for c in &self.checks {
            let v = if c.value.fract() == 0.0 && c.value.abs() < 1e15 { format!("{}", c.value as i64) } else { format!("{:.3e}", c.value) };
            let mark = if c.pass { "" } else { " # FAIL" };
            let _ = writeln!(out, "{s}.{}={v}{mark}", c.key);
        }
        let _ = writeln!(out, "{s}.max_residual={:.3e}", self.max_residual());
        out += if self.passed() { "PASS\n" } else { "FAIL\n" };
        out
    }
}

/// Options shared by all suites.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    /// Restrict to one degree.
    pub d: Option<usize>,
    /// Restrict to one qudit count where a suite sweeps n.
    pub n: Option<usize>,
    pub seed: u64,
    pub tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { d: None, n: None, seed: 0, tol: crate::DEFAULT_TOL }
    }
}

impl VerifyConfig {
    fn degrees(&self, suite: Suite) -> Vec<usize> {
        self.d.map_or_else(|| suite.default_degrees().to_vec(), |d| vec![d])
    }

    fn ns(&self, default: &[usize]) -> Vec<usize> {
        self.n.map_or_else(|| default.to_vec(), |n| vec![n])
    }
}

pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> Result<SuiteReport> {
    if cfg.tol <= 0.0 || cfg.tol.is_nan() {
        return Err(Error::Invalid(format!("tolerance must be positive, got {}", cfg.tol)));
    }
    let mut rep = SuiteReport::new(suite);
    for d in cfg.degrees(suite) {
        let ring = make_phase_ring(d)?;
        match suite {
            Suite::Relations => relations(&ring, cfg, &mut rep)?,
            Suite::Sft => sft(&ring, cfg, &mut rep)?,
            Suite::Entropy => entropy(&ring, cfg, &mut rep)?,
            Suite::Clifford => clifford(&ring, cfg, &mut rep)?,
            Suite::Tricks => {
                let t = circuit_tricks_check(&ring)?;
                for (k, v) in [("trick1", t.trick1), ("trick2", t.trick2), ("trick3", t.trick3), ("trick4", t.trick4)] {
                    rep.residual(format!("d{d}.{k}.residual"), v, cfg.tol);
                }
            }
            Suite::Protocols => protocols(&ring, cfg, &mut rep)?,
        }
    }
    Ok(rep)
}

fn ev(ring: &PhaseRing, text: &str) -> Result<Mat> {
    let dg = parse_diagram(&text.replace("{d}", &ring.d.to_string()))?;
    Ok(evaluate(ring, &dg)?.matrix)
}

fn scaled(m: &Mat, z: C64) -> Mat {
    m.map(|x| x * z)
}

/// Planar relations, twists, Reidemeister II/III, particle-braid,
/// braid-Fourier and the parafermion algebra.
fn relations(ring: &PhaseRing, cfg: &VerifyConfig, rep: &mut SuiteReport) -> Result<()> {
    let d = ring.d;
    let tol = cfg.tol;
    let one = |z: f64| C64::new(z, 0.0);
    let id2 = linalg::identity(d);
    let put = |rep: &mut SuiteReport, key: &str, v: f64| rep.residual(format!("d{d}.{key}.residual"), v, tol);
    let (k, l) = (1i64, 2i64 % d as i64 + 1);

    // charges add on a string; a charge-d string is bare
    let two = ev(ring, &format!("diagram d={{d}} in=2 out=2\nchg@1:{k}:0\nchg@1:{l}:0\n"))?;
    let sum = ev(ring, &format!("diagram d={{d}} in=2 out=2\nchg@1:{}:0\n", k + l))?;
    let full = ev(ring, &format!("diagram d={{d}} in=2 out=2\nchg@0:{d}:0\n"))?;
    put(rep, "add_charge", max_diff(&two, &sum).max(max_diff(&full, &id2)));

    // closed loops
    let lp = ev(ring, "diagram d={d} in=0 out=0\ncap@0\ncup@0\n")?;
    put(rep, "quantum_dimension", (lp[(0, 0)] - one(ring.sqrt_d())).norm());
    let charged = ev(ring, &format!("diagram d={{d}} in=0 out=0\ncap@0\nchg@1:{k}:0\ncup@0\n"))?;
    put(rep, "neutrality", charged[(0, 0)].norm());

    // charge pulled over a cap
    let left = ev(ring, &format!("diagram d={{d}} in=0 out=2\ncap@0\nchg@0:{k}:0\n"))?;
    let right = ev(ring, &format!("diagram d={{d}} in=0 out=2\ncap@0\nchg@1:{k}:0\n"))?;
    put(rep, "sf1", max_diff(&left, &scaled(&right, ring.zeta_pow(k * k))));

    // zigzags, both orientations, with a charge riding along
    let bare = ev(ring, &format!("diagram d={{d}} in=2 out=2\nchg@1:{k}:0\n"))?;
    let za = ev(ring, &format!("diagram d={{d}} in=2 out=2\nchg@1:{k}:0\ncap@2\ncup@1\n"))?;
    let zb = ev(ring, &format!("diagram d={{d}} in=2 out=2\nchg@1:{k}:0\ncap@0\ncup@1\n"))?;
    put(rep, "zigzag", max_diff(&za, &bare).max(max_diff(&zb, &bare)));

    // para isotopy and the twisted product
    let low_k = ev(ring, &format!("diagram d={{d}} in=2 out=2\nchg@1:{l}:0\nchg@0:{k}:0\n"))?;
    let high_k = ev(ring, &format!("diagram d={{d}} in=2 out=2\nchg@0:{k}:0\nchg@1:{l}:0\n"))?;
    let same = ev(ring, &format!("diagram d={{d}} in=2 out=2\nchg@0:{k}:0 chg@1:{l}:0\n"))?;
    put(rep, "para_isotopy", max_diff(&low_k, &scaled(&high_k, ring.q_pow(k * l))));
    put(rep, "twisted_product", max_diff(&same, &scaled(&low_k, twisted_tensor_scalar(ring, k, l))));

    // the Pauli pictures
    let x = ev(ring, "diagram d={d} in=2 out=2\nchg@1:1:0\n")?;
    let y = ev(ring, "diagram d={d} in=2 out=2\nchg@0:-1:0\n")?;
    let z = ev(ring, "diagram d={d} in=2 out=2\nchg@0:1:0 chg@1:-1:0\n")?;
    let pauli = max_diff(&x, &pauli_gate(ring, Pauli::X))
        .max(max_diff(&y, &pauli_gate(ring, Pauli::Y)))
        .max(max_diff(&z, &pauli_gate(ring, Pauli::Z)));
    put(rep, "pauli_pictures", pauli);
    let xy = max_diff(&(&x * &y), &scaled(&(&y * &x), ring.q));
    let xyz = max_diff(&(&x * &y * &z), &scaled(&id2, ring.zeta));
    put(rep, "xy_qyx", xy.max(xyz));

    put(rep, "resolution_of_identity", resolution_of_identity_check(ring)?);

    // Temperley-Lieb
    let e1 = tl_op(ring, 2, 1)?.matrix;
    let e2 = tl_op(ring, 2, 2)?.matrix;
    let tl = max_diff(&(&e1 * &e1), &scaled(&e1, one(ring.sqrt_d())))
        .max(max_diff(&(&e1 * &e2 * &e1), &e1))
        .max(max_diff(&(&e2 * &e1 * &e2), &e2));
    put(rep, "temperley_lieb", tl);

    // Reidemeister I: twists
    let pos = ev(ring, "diagram d={d} in=2 out=2\ncap@1\nb+@0\ncup@1\n")?;
    let pos_m = ev(ring, "diagram d={d} in=2 out=2\ncap@1\nb-@1\ncup@0\n")?;
    let neg = ev(ring, "diagram d={d} in=2 out=2\ncap@1\nb-@0\ncup@1\n")?;
    let neg_m = ev(ring, "diagram d={d} in=2 out=2\ncap@1\nb+@1\ncup@0\n")?;
    let wp = scaled(&id2, ring.omega_half_pow(-1));
    let wn = scaled(&id2, ring.omega_half_pow(1));
    put(rep, "reidemeister1", max_diff(&pos, &wp).max(max_diff(&pos_m, &wp)).max(max_diff(&neg, &wn)).max(max_diff(&neg_m, &wn)));

    // Reidemeister II and III
    let id4 = linalg::identity(d * d);
    let r2a = ev(ring, "diagram d={d} in=2 out=2\nb+@0\nb-@0\n")?;
    let r2b = ev(ring, "diagram d={d} in=4 out=4\nb-@1\nb+@1\n")?;
    put(rep, "reidemeister2", max_diff(&r2a, &id2).max(max_diff(&r2b, &id4)));
    let mut r3: f64 = 0.0;
    for s in ["+", "-"] {
        let a = ev(ring, &format!("diagram d={{d}} in=4 out=4\nb{s}@0\nb{s}@1\nb{s}@0\n"))?;
        let b = ev(ring, &format!("diagram d={{d}} in=4 out=4\nb{s}@1\nb{s}@0\nb{s}@1\n"))?;
        r3 = r3.max(max_diff(&a, &b));
    }
    put(rep, "reidemeister3", r3);

    // a charge passes under the braid
    let mut pb: f64 = 0.0;
    for kk in 1..d as i64 {
        let above = ev(ring, &format!("diagram d={{d}} in=4 out=4\nchg@1:{kk}:0\nb+@1\n"))?;
        let below = ev(ring, &format!("diagram d={{d}} in=4 out=4\nb+@1\nchg@2:{kk}:0\n"))?;
        let above_n = ev(ring, &format!("diagram d={{d}} in=4 out=4\nchg@2:{kk}:0\nb-@1\n"))?;
        let below_n = ev(ring, &format!("diagram d={{d}} in=4 out=4\nb-@1\nchg@1:{kk}:0\n"))?;
        pb = pb.max(max_diff(&above, &below)).max(max_diff(&above_n, &below_n));
    }
    put(rep, "particle_braid", pb);

    // braids and the Fourier side: rotating b₊ gives b₋, and b₋ on one
    // qudit is ω^{-1/2} G
    let bp = parse_diagram(&format!("diagram d={d} in=2 out=2\nb+@0\n"))?;
    let rot = evaluate(ring, &sft_rotate(&bp)?)?.matrix;
    let bm = braid_op(ring, 1, 1, BraidSign::Negative)?.matrix;
    let bf = max_diff(&rot, &bm).max(max_diff(&bm, &scaled(&gaussian_gate(ring), ring.omega_half_pow(-1))));
    put(rep, "braid_fourier", bf);

    let nmax = if d <= 3 { 3 } else { 2 };
    let mut para: f64 = 0.0;
    for n in 1..=nmax {
        para = para.max(parafermion_relations_check(ring, n)?);
    }
    put(rep, "parafermion", para);
    Ok(())
}

/// Braid product vs closed form, unitarity, and 𝔉ₛ^{2n}|k⟩ = q^{|k|²}|k⟩.
fn sft(ring: &PhaseRing, cfg: &VerifyConfig, rep: &mut SuiteReport) -> Result<()> {
    let d = ring.d;
    for n in cfg.ns(&[1, 2, 3]) {
        let a = sft_gate(ring, n, SftMethod::BraidProduct)?.matrix;
        let b = sft_gate(ring, n, SftMethod::MatrixFormula)?.matrix;
        rep.residual(format!("d{d}.n{n}.braid_vs_formula.residual"), max_diff(&a, &b), cfg.tol);
        rep.residual(format!("d{d}.n{n}.unitarity.residual"), linalg::unitarity_residual(&b), cfg.tol);
        let p = mat_pow(&b, 2 * n as i64);
        let dim = p.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..dim {
            let ks = linalg::digits(i, d, n);
            let s: i64 = ks.iter().map(|&x| x as i64).sum();
            let mut want = linalg::zeros(dim, 1);
            want[(i, 0)] = ring.q_pow(s * s);
            worst = worst.max(max_diff(&p.columns(i, 1).into_owned(), &want));
        }
        rep.residual(format!("d{d}.n{n}.rotation_2n.residual"), worst, cfg.tol);
    }
    Ok(())
}

fn state_diff(a: &QState, b: &QState) -> f64 {
    a.max_diff(b)
}

fn neutral_tuples(d: usize, n: usize) -> Vec<Vec<i64>> {
    (0..d.pow(n as u32))
        .map(|i| linalg::digits(i, d, n).into_iter().map(|x| x as i64).collect::<Vec<_>>())
        .filter(|ks| ks.iter().sum::<i64>() % d as i64 == 0)
        .collect()
}

/// Max and GHZ identities and singleton-cut entropies.
fn entropy(ring: &PhaseRing, cfg: &VerifyConfig, rep: &mut SuiteReport) -> Result<()> {
    let d = ring.d;
    for n in cfg.ns(&[2, 3]) {
        let f = sft_gate(ring, n, SftMethod::MatrixFormula)?;
        let zero = QState::zero(d, n)?;
        let max = max_state(ring, n)?;
        rep.residual(format!("d{d}.n{n}.sft_zero_is_max.residual"), state_diff(&f.apply(&zero)?, &max), cfg.tol);
        let fall = QOperator::square(d, n, kron_all(&vec![fourier_gate(ring); n]))?;
        let ghz = ghz_state(ring, n)?;
        let fwd = fall.apply(&max)?;
        let back = fall.adjoint().apply(&max)?;
        rep.residual(format!("d{d}.n{n}.ghz_from_max.residual"), state_diff(&fwd, &ghz).max(state_diff(&back, &ghz)), cfg.tol);
        let mut closed: f64 = 0.0;
        for i in 0..d.pow(n as u32) {
            let ks: Vec<i64> = linalg::digits(i, d, n).into_iter().map(|x| x as i64).collect();
            let built = f.apply(&QState::basis(d, &ks)?)?;
            closed = closed.max(state_diff(&built, &max_basis(ring, &ks)?));
            let g = fall.adjoint().apply(&built)?;
            closed = closed.max(1.0 - g.overlap(&ghz_basis(ring, &ks)?));
        }
        rep.residual(format!("d{d}.n{n}.closed_forms.residual"), closed, cfg.tol);
        let mut ent: f64 = 0.0;
        for ks in neutral_tuples(d, n) {
            let s = f.apply(&QState::basis(d, &ks)?)?;
            for j in 0..n {
                ent = ent.max((entanglement_entropy(&s, &[j])? - (d as f64).ln()).abs());
            }
        }
        rep.residual(format!("d{d}.n{n}.singleton_entropy.residual"), ent, 1e-8_f64.max(cfg.tol));
    }
    Ok(())
}

fn clifford(ring: &PhaseRing, cfg: &VerifyConfig, rep: &mut SuiteReport) -> Result<()> {
    let d = ring.d;
    let tol = cfg.tol;
    rep.residual(format!("d{d}.fsclifford1.residual"), verify_fsclifford1(ring)?, tol);
    rep.residual(format!("d{d}.fsclifford1_corrected.residual"), verify_fsclifford1_corrected(ring)?, tol);
    let s = verify_sft2(ring)?;
    rep.residual(format!("d{d}.sft2_first.residual"), s.first, tol);
    rep.residual(format!("d{d}.sft2_second.residual"), s.second, tol);
    rep.residual(format!("d{d}.sft2_bell.residual"), s.bell, tol);
    rep.residual(format!("d{d}.b23_omega.residual"), verify_braid_clifford(ring)?, tol);
    rep.residual(format!("d{d}.b23_omega_half.residual"), verify_braid_clifford_corrected(ring)?, tol);
    for n in cfg.ns(&[1, 2]) {
        let f = sft_gate(ring, n, SftMethod::MatrixFormula)?;
        rep.exact(format!("d{d}.n{n}.sft_is_clifford"), is_clifford(ring, &f)? as u8 as f64, 1.0);
    }
    if d == 2 {
        let mut t = linalg::identity(2);
        t[(1, 1)] = C64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        rep.exact("d2.pi8_is_clifford".into(), is_clifford(ring, &QOperator::square(2, 1, t)?)? as u8 as f64, 0.0);
    }
    Ok(())
}

/// Worst expectation residual over every branch, and the branch count.
pub fn branch_check(ring: &PhaseRing, s: &ProtocolScript, input: &QState) -> Result<(f64, usize)> {
    let br = s.branches(ring, input)?;
    let mut worst: f64 = 0.0;
    for t in &br {
        worst = worst.max(s.expect_residual(ring, input, t)?);
    }
    Ok((worst, br.len()))
}

fn protocols(ring: &PhaseRing, cfg: &VerifyConfig, rep: &mut SuiteReport) -> Result<()> {
    let d = ring.d;
    let tol = cfg.tol;
    let empty = QState::from_amps(d, 0, vec![C64::new(1.0, 0.0)])?;
    let tele = teleportation_script(ring);
    let psi = random_state(d, 1, cfg.seed)?;
    let (w, nb) = branch_check(ring, &tele, &psi)?;
    rep.residual(format!("d{d}.teleport.residual"), w, tol);
    rep.exact(format!("d{d}.teleport.branches"), nb as f64, (d * d) as f64);
    rep.exact(format!("d{d}.teleport.edits"), tele.edits() as f64, 1.0);
    rep.exact(format!("d{d}.teleport.cdits"), tele.cdits() as f64, 2.0);
    for n in cfg.ns(&[3, 4]) {
        if d.pow(2 * (n as u32 - 1)) > 1 << 12 {
            continue;
        }
        let s = build_max_script(ring, n)?;
        rep.residual(format!("d{d}.build_max{n}.residual"), branch_check(ring, &s, &empty)?.0, tol);
        rep.exact(format!("d{d}.build_max{n}.edits"), s.edits() as f64, (n - 1) as f64);
        rep.exact(format!("d{d}.build_max{n}.cdits"), s.cdits() as f64, (n - 1) as f64);
    }
    for sizes in [vec![1, 1], vec![2, 2], vec![1, 1, 1]] {
        let total: usize = sizes.iter().map(|k| k + 1).sum();
        if d.pow(total as u32) > 1 << 12 {
            continue;
        }
        let s = bvk_merge_script(ring, &sizes)?;
        let tag = sizes.iter().map(|k| k.to_string()).collect::<Vec<_>>().join("_");
        rep.residual(format!("d{d}.bvk_{tag}.residual"), branch_check(ring, &s, &empty)?.0, tol);
        rep.exact(format!("d{d}.bvk_{tag}.cdits"), s.cdits() as f64, sizes.len() as f64);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn relations_pass_at_d3() {
        let cfg = VerifyConfig { d: Some(3), ..Default::default() };
        let r = run_suite(Suite::Relations, &cfg).unwrap();
        assert!(r.passed(), "{}", r.render());
    }

    #[test]
    fn render_is_stable() {
        let cfg = VerifyConfig { d: Some(2), n: Some(2), ..Default::default() };
        let a = run_suite(Suite::Sft, &cfg).unwrap().render();
        let b = run_suite(Suite::Sft, &cfg).unwrap().render();
        assert_eq!(a, b);
        assert!(a.ends_with("PASS\n"));
    }
}
