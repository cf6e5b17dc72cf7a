//! Layered charged-string tangles.
//!
//! A [`Diagram`] is a stack of layers, stored bottom (output side) first.
//! Each layer is a full left-to-right list of generators; every generator
//! records its offset on the *input* side of its layer, i.e. how many input
//! strands lie to its left. Data flows from the top (inputs) down to the
//! bottom (outputs), so the bottom layer is the leftmost operator factor.
//!
//! Charges carry an integer tier: within one layer a higher tier sits
//! higher, hence acts first. Charges sharing a tier form a twisted product.

mod dsl;
mod normalize;

pub use dsl::parse_diagram;
pub use normalize::normalize;

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::numerics::PhaseRing;

/// One generator of a layer.
#[derive(Clone, Debug, PartialEq)]
pub enum Generator {
    IdStrand,
    Charge { strand: usize, k: i64, tier: i64 },
    Cap { left: usize },
    Cup { left: usize },
    BraidPos { left: usize },
    BraidNeg { left: usize },
    /// b_m on two adjacent qudits, i.e. four strands.
    Sym { left: usize, m: i64 },
    Box { name: String, first: usize, count: usize, charge: i64 },
}

impl Generator {
    /// Strands consumed from above.
    pub fn inputs(&self) -> usize {
        match self {
            Generator::IdStrand | Generator::Charge { .. } => 1,
            Generator::Cap { .. } => 0,
            Generator::Cup { .. } | Generator::BraidPos { .. } | Generator::BraidNeg { .. } => 2,
            Generator::Sym { .. } => 4,
            Generator::Box { count, .. } => *count,
        }
    }

    /// Strands produced below.
    pub fn outputs(&self) -> usize {
        match self {
            Generator::Cap { .. } => 2,
            Generator::Cup { .. } => 0,
            g => g.inputs(),
        }
    }

    /// The recorded input-side offset, if the generator has one.
    pub fn offset(&self) -> Option<usize> {
        match self {
            Generator::IdStrand => None,
            Generator::Charge { strand, .. } => Some(*strand),
            Generator::Cap { left }
            | Generator::Cup { left }
            | Generator::BraidPos { left }
            | Generator::BraidNeg { left }
            | Generator::Sym { left, .. } => Some(*left),
            Generator::Box { first, .. } => Some(*first),
        }
    }

    fn set_offset(&mut self, off: usize) {
        match self {
            Generator::IdStrand => {}
            Generator::Charge { strand, .. } => *strand = off,
            Generator::Cap { left }
            | Generator::Cup { left }
            | Generator::BraidPos { left }
            | Generator::BraidNeg { left }
            | Generator::Sym { left, .. } => *left = off,
            Generator::Box { first, .. } => *first = off,
        }
    }

    /// Vertical reflection. Offsets are recomputed by the caller.
    pub fn reflect(&self) -> Generator {
        match self {
            Generator::IdStrand => Generator::IdStrand,
            Generator::Charge { strand, k, tier } => Generator::Charge { strand: *strand, k: -k, tier: -tier },
            Generator::Cap { left } => Generator::Cup { left: *left },
            Generator::Cup { left } => Generator::Cap { left: *left },
            Generator::BraidPos { left } => Generator::BraidNeg { left: *left },
            Generator::BraidNeg { left } => Generator::BraidPos { left: *left },
            Generator::Sym { left, m } => Generator::Sym { left: *left, m: -m },
            Generator::Box { name, first, count, charge } => Generator::Box {
                name: adjoint_name(name),
                first: *first,
                count: *count,
                charge: -charge,
            },
        }
    }

    fn is_id(&self) -> bool {
        matches!(self, Generator::IdStrand)
    }
}

/// Box names ending in `*` denote the adjoint of the unstarred box.
pub fn adjoint_name(name: &str) -> String {
    match name.strip_suffix('*') {
        Some(base) => base.to_string(),
        None => format!("{name}*"),
    }
}

/// A scalar kept as ε^eps · d^{quarter/4} · residual.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scalar {
    pub eps: i64,
    pub quarter: i64,
    pub residual: C64,
}

impl Scalar {
    pub fn one() -> Self {
        Scalar { eps: 0, quarter: 0, residual: C64::new(1.0, 0.0) }
    }

    pub fn zero() -> Self {
        Scalar { eps: 0, quarter: 0, residual: C64::new(0.0, 0.0) }
    }

    pub fn is_zero(&self) -> bool {
        self.residual == C64::new(0.0, 0.0)
    }

    pub fn value(&self, ring: &PhaseRing) -> C64 {
        ring.eps_pow(self.eps) * ring.quarter_pow(self.quarter) * self.residual
    }

    pub fn mul(&self, o: &Scalar, d: usize) -> Scalar {
        Scalar {
            eps: (self.eps + o.eps).rem_euclid(2 * d as i64),
            quarter: self.quarter + o.quarter,
            residual: self.residual * o.residual,
        }
    }

    pub fn conj(&self, d: usize) -> Scalar {
        Scalar { eps: (-self.eps).rem_euclid(2 * d as i64), quarter: self.quarter, residual: self.residual.conj() }
    }

    pub(crate) fn add_eps(&mut self, e: i64, d: usize) {
        self.eps = (self.eps + e).rem_euclid(2 * d as i64);
    }
}

/// Elementary operations in application order (first = topmost).
/// Strand positions are 0-based on the input side of the operation.
#[derive(Clone, Debug, PartialEq)]
pub enum Elem {
    Charge { s: usize, k: i64 },
    Cap { p: usize },
    Cup { p: usize },
    Braid { p: usize, positive: bool },
    Sym { p: usize, m: i64 },
    Box { p: usize, w: usize, name: String, charge: i64 },
}

impl Elem {
    /// Width below the element given the width above it.
    pub fn width_after(&self, w: usize) -> usize {
        match self {
            Elem::Cap { .. } => w + 2,
            Elem::Cup { .. } => w - 2,
            _ => w,
        }
    }

    /// Check the element fits into a layer of input width `w`.
    pub fn fits(&self, w: usize) -> bool {
        match self {
            Elem::Charge { s, .. } => *s < w,
            Elem::Cap { p } => *p <= w,
            Elem::Cup { p } | Elem::Braid { p, .. } => p + 2 <= w,
            Elem::Sym { p, .. } => p + 4 <= w,
            Elem::Box { p, w: bw, .. } => p + bw <= w,
        }
    }

    fn to_generator(&self) -> Generator {
        match self {
            Elem::Charge { s, k } => Generator::Charge { strand: *s, k: *k, tier: 0 },
            Elem::Cap { p } => Generator::Cap { left: *p },
            Elem::Cup { p } => Generator::Cup { left: *p },
            Elem::Braid { p, positive: true } => Generator::BraidPos { left: *p },
            Elem::Braid { p, positive: false } => Generator::BraidNeg { left: *p },
            Elem::Sym { p, m } => Generator::Sym { left: *p, m: *m },
            Elem::Box { p, w, name, charge } => Generator::Box { name: name.clone(), first: *p, count: *w, charge: *charge },
        }
    }
}

/// A layered charged-string tangle.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagram {
    pub d: usize,
    /// Bottom (output side) first.
    pub layers: Vec<Vec<Generator>>,
    pub in_points: usize,
    pub out_points: usize,
    pub scalar: Scalar,
}

fn fix_offsets(layer: &mut [Generator]) {
    let mut off = 0;
    for g in layer.iter_mut() {
        g.set_offset(off);
        off += g.inputs();
    }
}

fn layer_widths(layer: &[Generator]) -> (usize, usize) {
    (layer.iter().map(|g| g.inputs()).sum(), layer.iter().map(|g| g.outputs()).sum())
}

impl Diagram {
    /// `w` bare strands.
    pub fn identity(d: usize, w: usize) -> Diagram {
        Diagram { d, layers: vec![], in_points: w, out_points: w, scalar: Scalar::one() }
    }

    /// The zero diagram with the given boundary.
    pub fn zero(d: usize, in_points: usize, out_points: usize) -> Diagram {
        Diagram { d, layers: vec![], in_points, out_points, scalar: Scalar::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.scalar.is_zero()
    }

    /// Build from sparse layers listed top (input side) first. Each layer
    /// lists its non-identity generators with their input-side offsets;
    /// identity strands are filled in. A cap at offset `o` sits just left
    /// of input strand `o`.
    pub fn from_top(d: usize, in_points: usize, top_first: Vec<Vec<Generator>>) -> Result<Diagram> {
        let mut width = in_points;
        let mut layers = Vec::with_capacity(top_first.len());
        for (li, sparse) in top_first.into_iter().enumerate() {
            let mut gens: Vec<Generator> = sparse.into_iter().filter(|g| !g.is_id()).collect();
            gens.sort_by_key(|g| (g.offset().unwrap_or(0), g.inputs() != 0));
            let mut full = Vec::new();
            let mut pos = 0;
            for g in gens {
                let off = g.offset().unwrap_or(0);
                if off < pos {
                    return Err(Error::Malformed(format!("layer {}: overlapping generators at offset {off}", li + 1)));
                }
                while pos < off {
                    full.push(Generator::IdStrand);
                    pos += 1;
                }
                pos += g.inputs();
                full.push(g);
            }
            if pos > width {
                return Err(Error::Malformed(format!("layer {}: needs {pos} strands but only {width} arrive", li + 1)));
            }
            while pos < width {
                full.push(Generator::IdStrand);
                pos += 1;
            }
            width = layer_widths(&full).1;
            layers.push(full);
        }
        layers.reverse();
        let dg = Diagram { d, layers, in_points, out_points: width, scalar: Scalar::one() };
        dg.validate()?;
        Ok(dg)
    }

    /// A single generator on a strip of input width `w`.
    pub fn single(d: usize, w: usize, g: Generator) -> Result<Diagram> {
        Diagram::from_top(d, w, vec![vec![g]])
    }

    pub fn cap(d: usize, w: usize, p: usize) -> Result<Diagram> {
        Diagram::single(d, w, Generator::Cap { left: p })
    }

    pub fn cup(d: usize, w: usize, p: usize) -> Result<Diagram> {
        Diagram::single(d, w, Generator::Cup { left: p })
    }

    pub fn charge(d: usize, w: usize, s: usize, k: i64, tier: i64) -> Result<Diagram> {
        Diagram::single(d, w, Generator::Charge { strand: s, k, tier })
    }

    pub fn braid(d: usize, w: usize, p: usize, positive: bool) -> Result<Diagram> {
        let g = if positive { Generator::BraidPos { left: p } } else { Generator::BraidNeg { left: p } };
        Diagram::single(d, w, g)
    }

    /// The decreasing-basis state |k_1, …, k_n⟩: n caps, each charged on
    /// its right leg, qudit 1's charge highest, times d^{-n/4}.
    pub fn basis_state(d: usize, ks: &[i64]) -> Result<Diagram> {
        let n = ks.len();
        let caps = (0..n).map(|_| Generator::Cap { left: 0 }).collect();
        let charges = ks
            .iter()
            .enumerate()
            .map(|(j, &k)| Generator::Charge { strand: 2 * j + 1, k, tier: (n - j) as i64 })
            .collect();
        let mut dg = Diagram::from_top(d, 0, vec![caps, charges])?;
        dg.scalar.quarter = -(n as i64);
        Ok(dg)
    }

    /// The dual basis costate ⟨ℓ_1, …, ℓ_n|, the adjoint of [`Diagram::basis_state`].
    pub fn basis_costate(d: usize, ls: &[i64]) -> Result<Diagram> {
        Ok(adjoint(&Diagram::basis_state(d, ls)?))
    }

    /// Check width bookkeeping and offsets.
    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::BadDegree(self.d));
        }
        if self.is_zero() {
            return Ok(());
        }
        let mut width = self.in_points;
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let (win, wout) = layer_widths(layer);
            if win != width {
                return Err(Error::Width(format!("layer {i} takes {win} strands, {width} arrive")));
            }
            let mut off = 0;
            for g in layer {
                if let Some(o) = g.offset() {
                    if o != off {
                        return Err(Error::Malformed(format!("layer {i}: generator recorded at {o}, sits at {off}")));
                    }
                }
                if let Generator::Box { count, .. } = g {
                    if count % 2 != 0 || *count == 0 {
                        return Err(Error::Malformed(format!("box with {count} strands")));
                    }
                }
                off += g.inputs();
            }
            width = wout;
        }
        if width != self.out_points {
            return Err(Error::Width(format!("bottom width {width} but out_points {}", self.out_points)));
        }
        Ok(())
    }

    /// Flatten to elementary operations (top first). The twisted-product
    /// phases of same-tier charges are returned folded into the scalar.
    pub fn to_elems(&self) -> Result<(Vec<Elem>, Scalar)> {
        self.validate()?;
        let mut out = Vec::new();
        let mut sc = self.scalar;
        for layer in self.layers.iter().rev() {
            let mut charges: Vec<(usize, i64, i64)> = vec![];
            let mut structural: Vec<Elem> = vec![];
            let mut charged_box = false;
            for g in layer {
                match g {
                    Generator::IdStrand => {}
                    Generator::Charge { strand, k, tier } => charges.push((*strand, *k, *tier)),
                    Generator::Cap { left } => structural.push(Elem::Cap { p: *left }),
                    Generator::Cup { left } => structural.push(Elem::Cup { p: *left }),
                    Generator::BraidPos { left } => structural.push(Elem::Braid { p: *left, positive: true }),
                    Generator::BraidNeg { left } => structural.push(Elem::Braid { p: *left, positive: false }),
                    Generator::Sym { left, m } => structural.push(Elem::Sym { p: *left, m: *m }),
                    Generator::Box { name, first, count, charge } => {
                        if charge.rem_euclid(self.d as i64) != 0 {
                            charged_box = true;
                        }
                        structural.push(Elem::Box { p: *first, w: *count, name: name.clone(), charge: *charge })
                    }
                }
            }
            if charged_box && !charges.is_empty() {
                return Err(Error::Malformed("a charged box cannot share a layer with charges".into()));
            }
            // higher tier first; within a tier, right to left (the left
            // charge of a twisted pair is the lower one)
            charges.sort_by(|a, b| b.2.cmp(&a.2).then(b.0.cmp(&a.0)));
            let mut i = 0;
            while i < charges.len() {
                let mut j = i;
                while j < charges.len() && charges[j].2 == charges[i].2 {
                    j += 1;
                }
                let group = &charges[i..j];
                let mut twist = 0i64;
                for a in 0..group.len() {
                    for b in a + 1..group.len() {
                        twist += group[a].1 * group[b].1;
                    }
                }
                // ζ^{-Σ k_a k_b}
                let ring_eps = zeta_eps(self.d, -twist);
                sc.add_eps(ring_eps, self.d);
                for &(s, k, _) in group {
                    out.push(Elem::Charge { s, k });
                }
                i = j;
            }
            // right to left keeps the input offsets of the rest valid; a cap
            // shares its offset with the generator to its right, so ties
            // also go right to left
            structural.reverse();
            structural.sort_by_key(|e| std::cmp::Reverse(elem_pos(e)));
            out.extend(structural);
        }
        Ok((out, sc))
    }

    /// Rebuild a diagram with one elementary operation per layer.
    pub fn from_elems(d: usize, in_points: usize, elems: &[Elem], scalar: Scalar) -> Result<Diagram> {
        let mut top_first = Vec::with_capacity(elems.len());
        let mut w = in_points;
        for e in elems {
            if !e.fits(w) {
                return Err(Error::Width(format!("{e:?} does not fit width {w}")));
            }
            top_first.push(vec![e.to_generator()]);
            w = e.width_after(w);
        }
        let mut dg = Diagram::from_top(d, in_points, top_first)?;
        dg.scalar = scalar;
        Ok(dg)
    }

    /// Multiply the scalar by ε^e.
    pub fn times_eps(mut self, e: i64) -> Diagram {
        self.scalar.add_eps(e, self.d);
        self
    }

    /// Multiply the scalar by d^{e/4}.
    pub fn times_quarter(mut self, e: i64) -> Diagram {
        self.scalar.quarter += e;
        self
    }

    /// Multiply the scalar by an arbitrary complex number.
    pub fn times(mut self, z: C64) -> Diagram {
        self.scalar.residual *= z;
        if self.scalar.is_zero() {
            self.layers.clear();
        }
        self
    }

    /// Number of non-identity generators.
    pub fn generator_count(&self) -> usize {
        self.layers.iter().flatten().filter(|g| !g.is_id()).count()
    }
}

fn elem_pos(e: &Elem) -> usize {
    match e {
        Elem::Charge { s, .. } => *s,
        Elem::Cap { p } | Elem::Cup { p } | Elem::Braid { p, .. } | Elem::Sym { p, .. } | Elem::Box { p, .. } => *p,
    }
}

/// ε-exponent of ζ^e without building a ring.
pub(crate) fn zeta_eps(d: usize, e: i64) -> i64 {
    let two_d = 2 * d as i64;
    let zexp = if d % 2 == 0 { 1 } else { d as i64 + 1 };
    (e.rem_euclid(two_d) * zexp).rem_euclid(two_d)
}

/// ε-exponent of q^e.
pub(crate) fn q_eps(d: usize, e: i64) -> i64 {
    (2 * e).rem_euclid(2 * d as i64)
}

/// Stack `upper` on top of `lower`; data passes through `upper` first.
pub fn compose(upper: &Diagram, lower: &Diagram) -> Result<Diagram> {
    if upper.d != lower.d {
        return Err(Error::Invalid(format!("degrees {} and {} differ", upper.d, lower.d)));
    }
    if lower.in_points != upper.out_points {
        return Err(Error::Width(format!("lower takes {} points, upper gives {}", lower.in_points, upper.out_points)));
    }
    if upper.is_zero() || lower.is_zero() {
        return Ok(Diagram::zero(upper.d, upper.in_points, lower.out_points));
    }
    let mut layers = lower.layers.clone();
    layers.extend(upper.layers.iter().cloned());
    Ok(Diagram {
        d: upper.d,
        layers,
        in_points: upper.in_points,
        out_points: lower.out_points,
        scalar: upper.scalar.mul(&lower.scalar, upper.d),
    })
}

/// Side-by-side juxtaposition. Layers are aligned from the bottom; the
/// shorter diagram is padded with identity layers on top. Tier tags are
/// kept as they are.
pub fn tensor(left: &Diagram, right: &Diagram) -> Result<Diagram> {
    if left.d != right.d {
        return Err(Error::Invalid(format!("degrees {} and {} differ", left.d, right.d)));
    }
    let d = left.d;
    if left.is_zero() || right.is_zero() {
        return Ok(Diagram::zero(d, left.in_points + right.in_points, left.out_points + right.out_points));
    }
    let depth = left.layers.len().max(right.layers.len());
    let pad = |dg: &Diagram, i: usize| -> Vec<Generator> {
        match dg.layers.get(i) {
            Some(l) => l.clone(),
            None => vec![Generator::IdStrand; dg.in_points],
        }
    };
    let mut layers = Vec::with_capacity(depth);
    for i in 0..depth {
        let mut l = pad(left, i);
        l.extend(pad(right, i));
        fix_offsets(&mut l);
        layers.push(l);
    }
    Ok(Diagram {
        d,
        layers,
        in_points: left.in_points + right.in_points,
        out_points: left.out_points + right.out_points,
        scalar: left.scalar.mul(&right.scalar, d),
    })
}

/// Vertical reflection: layers reversed, generators reflected, charges
/// negated, scalar conjugated.
pub fn adjoint(dg: &Diagram) -> Diagram {
    if dg.is_zero() {
        return Diagram::zero(dg.d, dg.out_points, dg.in_points);
    }
    let layers = dg
        .layers
        .iter()
        .rev()
        .map(|l| {
            let mut r: Vec<Generator> = l.iter().map(|g| g.reflect()).collect();
            fix_offsets(&mut r);
            r
        })
        .collect();
    Diagram {
        d: dg.d,
        layers,
        in_points: dg.out_points,
        out_points: dg.in_points,
        scalar: dg.scalar.conj(dg.d),
    }
}

/// ζ^{-kℓ}: converts a same-tier pair (k left, ℓ right) into the order
/// with k below and ℓ above.
pub fn twisted_tensor_scalar(ring: &PhaseRing, k: i64, l: i64) -> C64 {
    ring.zeta_pow(-k * l)
}

/// Rotate the boundary by one point: the first output point travels up
/// the left side and becomes the first input point, the last input point
/// comes down the right side and becomes the last output point. For a
/// state (no inputs) the first output point goes over the top to the end.
pub fn sft_rotate(dg: &Diagram) -> Result<Diagram> {
    let (a, b) = (dg.in_points, dg.out_points);
    if (a + b) % 2 != 0 {
        return Err(Error::OddBoundary(a + b));
    }
    if b == 0 {
        return Err(Error::Invalid("rotation needs at least one output point".into()));
    }
    let d = dg.d;
    let top = Diagram::from_top(d, a, vec![vec![Generator::Cap { left: a }]])?;
    let mid = tensor(&tensor(&Diagram::identity(d, 1), dg)?, &Diagram::identity(d, 1))?;
    let bottom = Diagram::from_top(d, b + 2, vec![vec![Generator::Cup { left: 0 }]])?;
    compose(&compose(&top, &mid)?, &bottom)
}
