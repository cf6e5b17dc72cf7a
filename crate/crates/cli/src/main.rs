//! `pappa`: evaluate diagrams, run circuits and protocols, and run the
//! verification suites. Reports are `key=value` lines on stdout.
//!
//! Exit status: 0 on success, 1 when a verification fails, 2 on bad
//! input (flags, parse errors, oversized registers).

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pappa::clifford::{generate_group, standard_generators};
use pappa::diagram::{normalize, parse_diagram, sft_rotate};
use pappa::evaluator::evaluate;
use pappa::protocols::parse_protocol;
use pappa::sim::circuit::{parse_circuit, random_state};
use pappa::sim::QState;
use pappa::verify::{branch_check, run_suite, Suite, VerifyConfig};
use pappa::{make_phase_ring, Error, Mat, C64};

#[derive(Parser, Debug)]
#[command(name = "pappa", version, about = "Qudit charged-string diagrams, circuits and protocols")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Qudit degree; overrides the degree in a file header.
    #[arg(long, global = true)]
    d: Option<usize>,
    /// Qudit count for suites that sweep n.
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Comparison tolerance (default 1e-9, or PAPPA_TOL).
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Emit::Report)]
    emit: Emit,
    /// Worker threads for independent suites.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Emit {
    Matrix,
    State,
    Report,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Diagram files (.pd).
    Diagram {
        #[command(subcommand)]
        action: DiagramCmd,
    },
    /// Circuit files (.pc).
    Circuit {
        #[command(subcommand)]
        action: CircuitCmd,
    },
    /// Protocol files (.pp).
    Protocol {
        #[command(subcommand)]
        action: ProtocolCmd,
    },
    /// Run a suite: relations, sft, entropy, clifford, tricks, protocols or all.
    Verify { suite: String },
    /// Close the standard generators (X, Y, Z, F, G per qudit and 𝔉ₛ) under products.
    Group {
        #[arg(long, default_value_t = 20_000)]
        cap: usize,
    },
}

#[derive(Subcommand, Debug)]
enum DiagramCmd {
    /// Evaluate to an operator.
    Eval { file: PathBuf },
    /// Rewrite to normal form and print it.
    Normalize { file: PathBuf },
    /// Rotate the boundary once and print the result.
    Rotate { file: PathBuf },
}

#[derive(Subcommand, Debug)]
enum CircuitCmd {
    /// One seeded run from |0…0⟩ (or a seeded random input).
    Run {
        file: PathBuf,
        #[arg(long)]
        random_input: bool,
    },
    /// Every outcome branch with its probability.
    Branches {
        file: PathBuf,
        #[arg(long)]
        random_input: bool,
    },
}

#[derive(Subcommand, Debug)]
enum ProtocolCmd {
    /// One seeded run with its transcript.
    Run { file: PathBuf },
    /// Check the expectations on every outcome branch.
    Branches { file: PathBuf },
}

/// Bad input; exits with status 2. Failed checks are reported through
/// the `bool` half of [`Out`] instead.
enum Fail {
    Input(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Input(e.to_string())
    }
}

type Out = Result<(String, bool), Fail>;

fn read(path: &PathBuf) -> Result<String, Fail> {
    std::fs::read_to_string(path).map_err(|e| Fail::Input(format!("{}: {e}", path.display())))
}

/// Replace `d=` in the header line when `--d` is given.
fn with_degree(text: &str, d: Option<usize>) -> String {
    let Some(d) = d else { return text.to_string() };
    let mut done = false;
    text.lines()
        .map(|l| {
            let body = l.split('#').next().unwrap_or("").trim();
            if done || body.is_empty() {
                return l.to_string();
            }
            done = true;
            l.split_whitespace().map(|t| if t.starts_with("d=") { format!("d={d}") } else { t.to_string() }).collect::<Vec<_>>().join(" ")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn fmt_c(z: C64) -> String {
    let clean = |x: f64| if x.abs() < 1e-12 { 0.0 } else { x };
    let (re, im) = (clean(z.re), clean(z.im));
    if im == 0.0 {
        format!("{re:.12}")
    } else {
        format!("{re:.12}{:+.12}i", im)
    }
}

fn emit_matrix(out: &mut String, m: &Mat) {
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| fmt_c(m[(r, c)])).collect();
        let _ = writeln!(out, "row{r}={}", row.join(" "));
    }
}

fn emit_state(out: &mut String, s: &QState) {
    for (i, z) in s.amps.iter().enumerate() {
        if z.norm() > 1e-12 {
            let _ = writeln!(out, "amp.{i}={}", fmt_c(*z));
        }
    }
}

fn diagram(c: &Common, action: &DiagramCmd) -> Out {
    let (DiagramCmd::Eval { file } | DiagramCmd::Normalize { file } | DiagramCmd::Rotate { file }) = action;
    let dg = parse_diagram(&with_degree(&read(file)?, c.d))?;
    let mut out = String::new();
    match action {
        DiagramCmd::Eval { .. } => {
            let ring = make_phase_ring(dg.d)?;
            let op = evaluate(&ring, &dg)?;
            let _ = writeln!(out, "d={}\nin={}\nout={}", dg.d, dg.in_points, dg.out_points);
            if op.matrix.len() == 1 {
                let _ = writeln!(out, "scalar={}", fmt_c(op.matrix[(0, 0)]));
            } else if c.emit == Emit::Report {
                let _ = writeln!(out, "rows={}\ncols={}", op.matrix.nrows(), op.matrix.ncols());
                let _ = writeln!(out, "frobenius={:.12}", op.matrix.norm());
            } else {
                emit_matrix(&mut out, &op.matrix);
            }
        }
        DiagramCmd::Normalize { .. } => out += &normalize(&dg).to_dsl(),
        DiagramCmd::Rotate { .. } => out += &sft_rotate(&dg)?.to_dsl(),
    }
    Ok((out, true))
}

fn circuit(c: &Common, action: &CircuitCmd) -> Out {
    let (CircuitCmd::Run { file, random_input } | CircuitCmd::Branches { file, random_input }) = action;
    let circ = parse_circuit(&with_degree(&read(file)?, c.d))?;
    let ring = make_phase_ring(circ.d)?;
    let input = if *random_input { random_state(circ.d, circ.n, c.seed)? } else { QState::zero(circ.d, circ.n)? };
    let mut out = format!("d={}\nn={}\n", circ.d, circ.n);
    match action {
        CircuitCmd::Run { .. } => {
            let b = circ.run(&ring, &input, c.seed)?;
            let _ = writeln!(out, "seed={}", c.seed);
            for (k, v) in &b.registers {
                let _ = writeln!(out, "reg.{k}={v}");
            }
            let _ = writeln!(out, "probability={:.12}", b.probability);
            if c.emit != Emit::Report {
                emit_state(&mut out, &b.state);
            }
        }
        CircuitCmd::Branches { .. } => {
            let br = circ.branches(&ring, &input)?;
            let _ = writeln!(out, "branches={}", br.len());
            for (i, b) in br.iter().enumerate() {
                let regs: Vec<String> = b.registers.iter().map(|(k, v)| format!("{k}:{v}")).collect();
                let _ = writeln!(out, "branch{i}.registers={}", regs.join(","));
                let _ = writeln!(out, "branch{i}.probability={:.12}", b.probability);
            }
        }
    }
    Ok((out, true))
}

fn protocol(c: &Common, tol: f64, action: &ProtocolCmd) -> Out {
    let (ProtocolCmd::Run { file } | ProtocolCmd::Branches { file }) = action;
    let script = parse_protocol(&with_degree(&read(file)?, c.d))?;
    let ring = make_phase_ring(script.d)?;
    script.check(&ring)?;
    let input = script.default_input(c.seed)?;
    let mut out = format!("d={}\nn={}\n", script.d, script.n);
    let residual = match action {
        ProtocolCmd::Run { .. } => {
            let t = script.run(&ring, &input, c.seed)?;
            out += &t.report();
            if c.emit == Emit::State {
                emit_state(&mut out, &t.final_state);
            }
            script.expect_residual(&ring, &input, &t)?
        }
        ProtocolCmd::Branches { .. } => {
            let (w, n) = branch_check(&ring, &script, &input)?;
            let _ = writeln!(out, "edits={}\ncdits={}\nbranches={n}", script.edits(), script.cdits());
            w
        }
    };
    let ok = residual < tol;
    if !script.expects.is_empty() {
        let _ = writeln!(out, "expect.residual={residual:.3e}");
        out += if ok { "PASS\n" } else { "FAIL\n" };
    }
    Ok((out, ok))
}

fn verify(c: &Common, tol: f64, which: &str) -> Out {
    let suites: Vec<Suite> = if which == "all" { Suite::ALL.to_vec() } else { vec![which.parse::<Suite>()?] };
    let cfg = VerifyConfig { d: c.d, n: c.n, seed: c.seed, tol };
    let jobs = c.jobs.max(1);
    let mut reports = Vec::with_capacity(suites.len());
    for chunk in suites.chunks(jobs) {
        let cfg = &cfg;
        let done: Vec<_> = std::thread::scope(|s| {
            let hs: Vec<_> = chunk.iter().map(|&su| s.spawn(move || run_suite(su, cfg))).collect();
            hs.into_iter().map(|h| h.join().expect("suite thread panicked")).collect()
        });
        for r in done {
            reports.push(r?);
        }
    }
    let mut out = String::new();
    let mut ok = true;
    for r in &reports {
        out += &r.render();
        ok &= r.passed();
    }
    Ok((out, ok))
}

fn group(c: &Common, cap: usize) -> Out {
    let d = c.d.unwrap_or(2);
    let n = c.n.unwrap_or(1);
    let ring = make_phase_ring(d)?;
    let gens = standard_generators(&ring, n)?;
    let rep = generate_group(&ring, n, &gens, cap)?;
    let mut out = format!("d={d}\nn={n}\ngenerators={}\norder={}\ncap_hit={}\n", rep.generators, rep.order, rep.cap_hit);
    for (k, v) in [("contains.cz", rep.has_cz), ("contains.cnot", rep.has_cnot), ("contains.b23", rep.has_b23)] {
        if let Some(v) = v {
            let _ = writeln!(out, "{k}={v}");
        }
    }
    Ok((out, true))
}

fn tolerance(c: &Common) -> Result<f64, Fail> {
    let t = match c.tol {
        Some(t) => t,
        None => match std::env::var("PAPPA_TOL") {
            Ok(s) => s.trim().parse().map_err(|_| Fail::Input(format!("PAPPA_TOL is not a number: `{s}`")))?,
            Err(_) => pappa::DEFAULT_TOL,
        },
    };
    if !(t > 0.0) {
        return Err(Fail::Input(format!("tolerance must be positive, got {t}")));
    }
    Ok(t)
}

fn dispatch(cli: &Cli) -> Out {
    let c = &cli.common;
    if let Some(d) = c.d {
        if d < 2 {
            return Err(Fail::Input(format!("--d must be at least 2, got {d}")));
        }
    }
    let tol = tolerance(c)?;
    match &cli.cmd {
        Cmd::Diagram { action } => diagram(c, action),
        Cmd::Circuit { action } => circuit(c, action),
        Cmd::Protocol { action } => protocol(c, tol, action),
        Cmd::Verify { suite } => verify(c, tol, suite),
        Cmd::Group { cap } => group(c, *cap),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok((out, ok)) => {
            print!("{out}");
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Fail::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
