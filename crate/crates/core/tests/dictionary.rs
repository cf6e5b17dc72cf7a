//! Picture-to-circuit dictionary checks: measurements, C_Z, local
//! operators, resource states and small protocols, each against an
//! independently built matrix or state.

use pappa::clifford::{generate_group, standard_generators};
use pappa::diagram::*;
use pappa::entangle::{entanglement_entropy, ghz_state, max_basis, max_state};
use pappa::evaluator::{evaluate, evaluate_with, local_conjugation_op, operator_charge, BoxRegistry};
use pappa::linalg::{self, c, kron_all, mat_pow, max_diff, Mat};
use pappa::protocols::*;
use pappa::sim::state::QOperator;
use pappa::sim::*;
use pappa::{make_phase_ring, C64, PhaseRing};

const TOL: f64 = 1e-9;

fn z_pow(r: &PhaseRing, e: i64) -> Mat {
    mat_pow(&pauli_gate(r, Pauli::Z), e)
}

fn ket(d: usize, l: i64) -> Mat {
    let mut v = linalg::zeros(d, 1);
    v[(l.rem_euclid(d as i64) as usize, 0)] = c(1.0, 0.0);
    v
}

fn embedded(d: usize, n: usize, j: usize, dg: &Diagram) -> Diagram {
    let left = Diagram::identity(d, 2 * j);
    let right = Diagram::identity(d, 2 * (n - j - 1));
    tensor(&tensor(&left, dg).unwrap(), &right).unwrap()
}

// Reading ℓ on qudit j is the costate ⟨ℓ| there and Z^{−ℓ} on every
// later qudit.
#[test]
fn costate_on_one_qudit() {
    for d in [2, 3, 5] {
        let r = make_phase_ring(d).unwrap();
        let n = 3;
        for j in 0..n {
            for l in 0..d as i64 {
                let dg = embedded(d, n, j, &Diagram::basis_costate(d, &[l]).unwrap());
                let mut fs: Vec<Mat> = (0..j).map(|_| linalg::identity(d)).collect();
                fs.push(ket(d, l).adjoint());
                fs.extend((j + 1..n).map(|_| z_pow(&r, -l)));
                assert!(max_diff(&evaluate(&r, &dg).unwrap().matrix, &kron_all(&fs)) < TOL, "d={d} j={j} l={l}");
            }
        }
    }
}

// Preparing ℓ on qudit j is |ℓ⟩ there and Z^{ℓ} on every later qudit.
#[test]
fn state_on_one_qudit() {
    for d in [2, 3, 5] {
        let r = make_phase_ring(d).unwrap();
        let n = 3;
        for j in 0..n {
            for l in 0..d as i64 {
                let dg = embedded(d, n, j, &Diagram::basis_state(d, &[l]).unwrap());
                let mut fs: Vec<Mat> = (0..j).map(|_| linalg::identity(d)).collect();
                fs.push(ket(d, l));
                fs.extend((j + 1..n).map(|_| z_pow(&r, l)));
                assert!(max_diff(&evaluate(&r, &dg).unwrap().matrix, &kron_all(&fs)) < TOL, "d={d} j={j} l={l}");
            }
        }
    }
}

// C_Z under two charged caps exchanges their heights.
#[test]
fn cz_swaps_cap_heights() {
    for d in [2, 3, 4, 5] {
        let r = make_phase_ring(d).unwrap();
        let reg = BoxRegistry::standard(&r);
        for k1 in 0..d as i64 {
            for k2 in 0..d as i64 {
                let state = Diagram::basis_state(d, &[k1, k2]).unwrap();
                let cz = Diagram::from_top(d, 4, vec![vec![Generator::Box {
                    name: "CZ".into(),
                    first: 0,
                    count: 4,
                    charge: 0,
                }]])
                .unwrap();
                let lhs = evaluate_with(&r, &compose(&state, &cz).unwrap(), &reg).unwrap().matrix;
                let swapped = Diagram::from_top(
                    d,
                    0,
                    vec![
                        vec![Generator::Cap { left: 0 }, Generator::Cap { left: 0 }],
                        vec![
                            Generator::Charge { strand: 1, k: k1, tier: 1 },
                            Generator::Charge { strand: 3, k: k2, tier: 2 },
                        ],
                    ],
                )
                .unwrap()
                .times_quarter(-2);
                let rhs = evaluate(&r, &swapped).unwrap().matrix;
                assert!(max_diff(&lhs, &rhs) < TOL, "d={d} k=({k1},{k2})");
                // and the plain matrix action
                let want = kron_all(&[ket(d, k1), ket(d, k2)]).map(|z| z * r.q_pow(k1 * k2));
                assert!(max_diff(&lhs, &want) < TOL);
            }
        }
    }
}

// A charge-k operator conjugated by C_Z picks up Z^k on the neighbour.
#[test]
fn cz_conjugation_attaches_a_tail() {
    for d in [2, 3, 5] {
        let r = make_phase_ring(d).unwrap();
        let cz = cz_gate(&r);
        let x = pauli_gate(&r, Pauli::X);
        let y = pauli_gate(&r, Pauli::Y);
        let g = gaussian_gate(&r);
        for (t, k) in [(mat_pow(&x, 1), 1i64), (mat_pow(&x, 2), 2), (mat_pow(&y, -1), 1), (y.clone(), -1), (g.clone(), 0)] {
            assert_eq!(operator_charge(&r, &t, 1), Some(k.rem_euclid(d as i64)));
            let lhs = &cz * linalg::kron(&t, &linalg::identity(d)) * mat_pow(&cz, -1);
            let rhs = linalg::kron(&t, &z_pow(&r, k));
            assert!(max_diff(&lhs, &rhs) < TOL, "d={d} k={k}");
            // the local-operator embedding gives the same tail
            let op = QOperator::square(d, 1, t.clone()).unwrap();
            let emb = local_conjugation_op(&r, &[0, 1], 0, &op).unwrap();
            assert!(max_diff(&emb.matrix, &rhs) < TOL);
        }
        // a mixed-charge operator has no single charge
        assert_eq!(operator_charge(&r, &(&x + &g), 1), None);
    }
}

#[test]
fn local_operator_on_a_split_party() {
    let d = 3;
    let r = make_phase_ring(d).unwrap();
    let x = pauli_gate(&r, Pauli::X);
    // party 0 holds qudits 1 and 3; X on its first member drags a Z tail
    // over qudit 2 and, being inside the party block, X⊗1 on the pair
    let t = QOperator::square(d, 2, linalg::kron(&x, &linalg::identity(d))).unwrap();
    let emb = local_conjugation_op(&r, &[0, 1, 0], 0, &t).unwrap();
    let want = kron_all(&[x.clone(), pauli_gate(&r, Pauli::Z), linalg::identity(d)]);
    assert!(max_diff(&emb.matrix, &want) < TOL);
    assert!(local_conjugation_op(&r, &[0, 1, 0], 2, &t).is_err());
}

#[test]
fn rotating_a_braid_gives_the_other_braid() {
    for d in [2, 3, 5] {
        let r = make_phase_ring(d).unwrap();
        let pos = Diagram::braid(d, 2, 0, true).unwrap();
        let neg = Diagram::braid(d, 2, 0, false).unwrap();
        let rot = evaluate(&r, &sft_rotate(&pos).unwrap()).unwrap().matrix;
        assert!(max_diff(&rot, &evaluate(&r, &neg).unwrap().matrix) < TOL);
        // one-qudit b− is ω^{−1/2} G
        let want = gaussian_gate(&r).map(|z| z * r.omega_half_pow(-1));
        assert!(max_diff(&evaluate(&r, &neg).unwrap().matrix, &want) < TOL);
    }
}

// Direct construction: uniform amplitude on the zero-sum sector.
fn max_oracle(d: usize, n: usize) -> Vec<C64> {
    let dim = d.pow(n as u32);
    let a = (d as f64).powf(-((n - 1) as f64) / 2.0);
    (0..dim)
        .map(|i| {
            let s: usize = linalg::digits(i, d, n).iter().sum();
            if s % d == 0 { c(a, 0.0) } else { c(0.0, 0.0) }
        })
        .collect()
}

#[test]
fn max_and_ghz_resources() {
    for d in [2, 3, 5] {
        let r = make_phase_ring(d).unwrap();
        for n in 1..=3 {
            let m = max_state(&r, n).unwrap();
            assert!(linalg::overlap(&m.amps, &max_oracle(d, n)) > 1.0 - TOL);
            let via_sft = sft_gate(&r, n, SftMethod::MatrixFormula).unwrap().apply(&QState::zero(d, n).unwrap()).unwrap();
            assert!(via_sft.max_diff(&m) < TOL);
            // Fourier on every qudit maps Max to GHZ
            let mut s = m.clone();
            for j in 0..n {
                s.apply_local(&[j], &fourier_gate(&r)).unwrap();
            }
            assert!(s.max_diff(&ghz_state(&r, n).unwrap()) < TOL, "d={d} n={n}");
            if n >= 2 {
                for j in 0..n {
                    let e = entanglement_entropy(&m, &[j]).unwrap();
                    assert!((e - (d as f64).ln()).abs() < 1e-8);
                }
            }
        }
    }
}

#[test]
fn rotated_basis_state_is_max_basis() {
    for d in [2, 3] {
        let r = make_phase_ring(d).unwrap();
        for k1 in 0..d as i64 {
            for k2 in 0..d as i64 {
                let dg = sft_rotate(&Diagram::basis_state(d, &[k1, k2]).unwrap()).unwrap();
                let v = evaluate(&r, &dg).unwrap().matrix;
                let want = max_basis(&r, &[k1, k2]).unwrap();
                assert!(linalg::overlap(v.as_slice(), &want.amps) > 1.0 - TOL);
            }
        }
    }
}

// Outcome (ℓ₁, ℓ₂) has probability |⟨Max_k|ψ⟩|² with k₂ = −ℓ₁,
// k₁ = ℓ₂ + 2ℓ₁; the costate comes from the rotated cap picture.
#[test]
fn phase_space_outcomes_match_pictures() {
    for d in [2, 3, 5] {
        let r = make_phase_ring(d).unwrap();
        let di = d as i64;
        let psi = pappa::sim::circuit::random_state(d, 2, 11).unwrap();
        for v in [PhaseSpaceVariant::FirstControls, PhaseSpaceVariant::SecondControls] {
            let dist = phase_space_distribution(&r, v, &psi).unwrap();
            let mut total = 0.0;
            for l1 in 0..di {
                for l2 in 0..di {
                    let k = [(l2 + 2 * l1).rem_euclid(di), (-l1).rem_euclid(di)];
                    let rot = sft_rotate(&Diagram::basis_state(d, &k).unwrap()).unwrap();
                    let bra = evaluate(&r, &adjoint(&rot)).unwrap().matrix;
                    let amp = (bra * Mat::from_column_slice(d * d, 1, &psi.amps))[(0, 0)];
                    let p = dist.get(&(l1 as usize, l2 as usize)).copied().unwrap_or(0.0);
                    assert!((p - amp.norm_sqr()).abs() < TOL, "d={d} {v:?} l=({l1},{l2})");
                    total += p;
                }
            }
            assert!((total - 1.0).abs() < TOL);
        }
    }
}

#[test]
fn clifford_closure_spot_check() {
    for (d, n) in [(2, 1), (3, 1), (2, 2)] {
        let r = make_phase_ring(d).unwrap();
        let gens = standard_generators(&r, n).unwrap();
        let g = generate_group(&r, n, &gens, 20000).unwrap();
        assert!(!g.cap_hit);
        let mut rev = gens.clone();
        rev.reverse();
        assert_eq!(generate_group(&r, n, &rev, 20000).unwrap().order, g.order);
        // words in the generators and their inverses stay inside
        let mut rng_state = 7usize;
        for _ in 0..40 {
            let mut w = linalg::identity(d.pow(n as u32));
            for _ in 0..6 {
                rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                w = &gens[(rng_state >> 33) % gens.len()] * w;
            }
            assert!(g.contains(&w));
            assert!(g.contains(&w.adjoint()));
        }
        if d == 2 && n == 1 {
            let t = Mat::from_fn(2, 2, |i, j| match (i, j) {
                (0, 0) => c(1.0, 0.0),
                (1, 1) => C64::from_polar(1.0, std::f64::consts::FRAC_PI_4),
                _ => c(0.0, 0.0),
            });
            assert!(!g.contains(&t));
        }
    }
}

#[test]
fn teleport_plus_state_qubit() {
    let r = make_phase_ring(2).unwrap();
    let s = teleportation_script(&r);
    let h = 1.0 / 2f64.sqrt();
    let plus = QState::from_amps(2, 1, vec![c(h, 0.0), c(h, 0.0)]).unwrap();
    let branches = s.branches(&r, &plus).unwrap();
    assert_eq!(branches.len(), 4);
    for t in &branches {
        assert!((t.probability - 0.25).abs() < TOL);
        assert!(s.expect_residual(&r, &plus, t).unwrap() < TOL);
        assert_eq!((t.edits, t.cdits), (1, 2));
    }
}

#[test]
fn teleport_qutrit_seeded_runs() {
    let r = make_phase_ring(3).unwrap();
    let s = teleportation_script(&r);
    for seed in 0..100 {
        let input = s.default_input(seed).unwrap();
        let t = s.run(&r, &input, seed).unwrap();
        assert!(s.expect_residual(&r, &input, &t).unwrap() < TOL, "seed {seed}");
        assert_eq!(t.report(), s.run(&r, &input, seed).unwrap().report());
    }
}
