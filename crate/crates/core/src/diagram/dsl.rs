//! Text form of diagrams.
//!
//! ```text
//! diagram d=3 in=0 out=4
//! scalar eps=0 quarter=-2        # optional
//! cap@0 cap@0
//! chg@1:1:2 chg@3:2:1
//! ```
//!
//! After the header each non-empty line is one layer, top (input side)
//! first. Offsets are 0-based input-side positions within the layer.
//! Tokens: `cap@i`, `cup@i`, `chg@i:k[:tier]`, `b+@i`, `b-@i`, `sym@i:m`
//! and `box NAME@i:w[:c]`. `#` starts a comment.

use super::{Diagram, Generator, Scalar};
use crate::error::{parse_err, Result};

fn num<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<T> {
    s.trim().parse().map_err(|_| parse_err(line, format!("bad {what} `{s}`")))
}

fn kv<'a>(tok: &'a str, key: &str, line: usize) -> Result<&'a str> {
    tok.strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| parse_err(line, format!("expected `{key}=...`, got `{tok}`")))
}

fn parse_token(tok: &str, line: usize) -> Result<Generator> {
    let (head, args) = tok.split_once('@').ok_or_else(|| parse_err(line, format!("missing `@` in `{tok}`")))?;
    let parts: Vec<&str> = args.split(':').collect();
    let off: usize = num(parts[0], line, "offset")?;
    let arg = |i: usize, what: &str| -> Result<i64> {
        parts.get(i).ok_or_else(|| parse_err(line, format!("`{tok}` needs a {what}"))).and_then(|s| num(s, line, what))
    };
    let expect = |n: usize| -> Result<()> {
        if parts.len() > n {
            Err(parse_err(line, format!("too many fields in `{tok}`")))
        } else {
            Ok(())
        }
    };
    Ok(match head {
        "cap" => {
            expect(1)?;
            Generator::Cap { left: off }
        }
        "cup" => {
            expect(1)?;
            Generator::Cup { left: off }
        }
        "b+" => {
            expect(1)?;
            Generator::BraidPos { left: off }
        }
        "b-" => {
            expect(1)?;
            Generator::BraidNeg { left: off }
        }
        "chg" => {
            expect(3)?;
            let k = arg(1, "charge")?;
            let tier = if parts.len() > 2 { arg(2, "tier")? } else { 0 };
            Generator::Charge { strand: off, k, tier }
        }
        "sym" => {
            expect(2)?;
            Generator::Sym { left: off, m: arg(1, "symmetry index")? }
        }
        _ => return Err(parse_err(line, format!("unknown generator `{head}`"))),
    })
}

fn parse_box(spec: &str, line: usize) -> Result<Generator> {
    let (name, args) = spec.rsplit_once('@').ok_or_else(|| parse_err(line, format!("missing `@` in box `{spec}`")))?;
    if name.is_empty() {
        return Err(parse_err(line, "box without a name"));
    }
    let parts: Vec<&str> = args.split(':').collect();
    if parts.len() < 2 || parts.len() > 3 {
        return Err(parse_err(line, format!("box `{spec}` needs NAME@offset:width[:charge]")));
    }
    let first = num(parts[0], line, "offset")?;
    let count = num(parts[1], line, "width")?;
    let charge = if parts.len() == 3 { num(parts[2], line, "charge")? } else { 0 };
    Ok(Generator::Box { name: name.to_string(), first, count, charge })
}

/// Parse the text form. Errors carry 1-based line numbers.
pub fn parse_diagram(text: &str) -> Result<Diagram> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut scalar = Scalar::one();
    let mut layers = vec![];
    let mut layer_lines = vec![];
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        if header.is_none() {
            if toks[0] != "diagram" || toks.len() != 4 {
                return Err(parse_err(line, "expected header `diagram d=<int> in=<int> out=<int>`"));
            }
            let d = num(kv(toks[1], "d", line)?, line, "d")?;
            let a = num(kv(toks[2], "in", line)?, line, "in")?;
            let b = num(kv(toks[3], "out", line)?, line, "out")?;
            if d < 2 {
                return Err(parse_err(line, format!("d must be at least 2, got {d}")));
            }
            header = Some((d, a, b));
            continue;
        }
        if toks[0] == "scalar" {
            if !layers.is_empty() || toks.len() != 3 {
                return Err(parse_err(line, "`scalar eps=<int> quarter=<int>` must precede the layers"));
            }
            scalar.eps = num(kv(toks[1], "eps", line)?, line, "eps")?;
            scalar.quarter = num(kv(toks[2], "quarter", line)?, line, "quarter")?;
            continue;
        }
        let mut gens = vec![];
        let mut it = toks.iter();
        while let Some(tok) = it.next() {
            if *tok == "box" {
                let spec = it.next().ok_or_else(|| parse_err(line, "`box` needs NAME@offset:width[:charge]"))?;
                gens.push(parse_box(spec, line)?);
            } else if *tok == "id" {
                continue;
            } else {
                gens.push(parse_token(tok, line)?);
            }
        }
        layers.push(gens);
        layer_lines.push(line);
    }
    let (d, a, b) = header.ok_or_else(|| parse_err(1, "empty input"))?;
    // build layer by layer so width errors point at the right line
    let mut width = a;
    for (li, gens) in layers.iter().enumerate() {
        let one = Diagram::from_top(d, width, vec![gens.clone()]).map_err(|e| parse_err(layer_lines[li], e.to_string()))?;
        width = one.out_points;
    }
    if width != b {
        return Err(parse_err(layer_lines.last().copied().unwrap_or(1), format!("diagram ends with {width} points, header says {b}")));
    }
    let mut dg = Diagram::from_top(d, a, layers).map_err(|e| parse_err(1, e.to_string()))?;
    scalar.eps = scalar.eps.rem_euclid(2 * d as i64);
    dg.scalar = scalar;
    Ok(dg)
}

impl Diagram {
    /// Text form accepted by [`parse_diagram`]. The residual part of the
    /// scalar is not representable and must be one.
    pub fn to_dsl(&self) -> String {
        let mut s = format!("diagram d={} in={} out={}\n", self.d, self.in_points, self.out_points);
        if self.scalar.eps != 0 || self.scalar.quarter != 0 {
            s += &format!("scalar eps={} quarter={}\n", self.scalar.eps, self.scalar.quarter);
        }
        for layer in self.layers.iter().rev() {
            let toks: Vec<String> = layer
                .iter()
                .filter_map(|g| match g {
                    Generator::IdStrand => None,
                    Generator::Charge { strand, k, tier } => Some(format!("chg@{strand}:{k}:{tier}")),
                    Generator::Cap { left } => Some(format!("cap@{left}")),
                    Generator::Cup { left } => Some(format!("cup@{left}")),
                    Generator::BraidPos { left } => Some(format!("b+@{left}")),
                    Generator::BraidNeg { left } => Some(format!("b-@{left}")),
                    Generator::Sym { left, m } => Some(format!("sym@{left}:{m}")),
                    Generator::Box { name, first, count, charge } => Some(format!("box {name}@{first}:{count}:{charge}")),
                })
                .collect();
            if toks.is_empty() {
                s += "id\n";
            } else {
                s += &toks.join(" ");
                s += "\n";
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn parses_bell_pair() {
        let dg = parse_diagram("diagram d=3 in=0 out=4\ncap@0 cap@0\nchg@1:1:2 chg@3:2:1\n").unwrap();
        assert_eq!(dg.out_points, 4);
        assert_eq!(dg.generator_count(), 4);
    }

    #[test]
    fn reports_line_numbers() {
        let e = parse_diagram("diagram d=2 in=2 out=2\n\ncup@1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e:?}");
        let e = parse_diagram("diagram d=2 in=2 out=2\nfoo@0\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let e = parse_diagram("diagram d=2 in=2 out=4\nb+@0\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn round_trip() {
        let text = "diagram d=3 in=2 out=2\nbox F@0:2:0\nchg@0:1:0 chg@1:2:0\nb-@0\n";
        let dg = parse_diagram(text).unwrap();
        assert_eq!(parse_diagram(&dg.to_dsl()).unwrap(), dg);
    }
}
