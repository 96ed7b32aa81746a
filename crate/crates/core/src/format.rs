//! Text formats: equation systems (`.pps`), policies (`.pol`), branching models (`.bmdp`)
//! and strategy descriptors.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::bmdp::{Action, Bssg, Owner, Rule, TypeDef};
use crate::error::{Error, Result};
use crate::policy::{Choice, Policy};
use crate::pps::{Equation, MaxMinPps, Monomial, Player, ProbPoly};
use crate::scalar::format_ratio;
use crate::strategy::{StrategyDescriptor, StrategyKind};

fn perr(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn strip_comment(s: &str) -> &str {
    match s.find('#') {
        Some(i) => &s[..i],
        None => s,
    }
}

/// Character cursor over one line; columns are 1-based.
struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn new(s: &'a str, line: usize) -> Self {
        Cursor {
            s: s.as_bytes(),
            pos: 0,
            line,
        }
    }

    fn err_at(&self, pos: usize, msg: impl Into<String>) -> Error {
        perr(self.line, pos + 1, msg)
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        perr(self.line, self.pos + 1, msg)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected '{}'", c as char)))
        }
    }

    fn eat_str(&mut self, t: &str) -> bool {
        self.skip_ws();
        if self.s[self.pos..].starts_with(t.as_bytes()) {
            self.pos += t.len();
            true
        } else {
            false
        }
    }

    fn done(&mut self) -> bool {
        self.peek().is_none()
    }

    fn finish(&mut self) -> Result<()> {
        if self.done() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing input"))
        }
    }

    fn ident(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() {
            let c = self.s[self.pos];
            if c.is_ascii_alphanumeric() || c == b'_' || (c == b'\'' && self.pos > start) {
                self.pos += 1;
            } else {
                break;
            }
        }
        if start == self.pos || self.s[start].is_ascii_digit() {
            self.pos = start;
            return Err(self.err("expected a name"));
        }
        Ok(std::str::from_utf8(&self.s[start..self.pos]).expect("ascii"))
    }

    fn starts_number(&mut self) -> bool {
        matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == b'.')
    }

    fn digits(&mut self) -> &'a str {
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos]).expect("ascii")
    }

    fn unsigned(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        let d = self.digits();
        d.parse().map_err(|_| {
            self.pos = start;
            self.err("expected a non-negative integer")
        })
    }

    /// `num`, `num/den`, or a decimal `d.ddd[e[+-]k]`, all converted exactly.
    fn rational(&mut self) -> Result<BigRational> {
        self.skip_ws();
        let start = self.pos;
        let int = self.digits();
        let mut frac = "";
        if self.pos < self.s.len() && self.s[self.pos] == b'.' {
            self.pos += 1;
            frac = self.digits();
        }
        if int.is_empty() && frac.is_empty() {
            self.pos = start;
            return Err(self.err("expected a number"));
        }
        let mut exp: i64 = 0;
        if self.pos < self.s.len() && (self.s[self.pos] == b'e' || self.s[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            let neg = match self.s.get(self.pos) {
                Some(b'-') => {
                    self.pos += 1;
                    true
                }
                Some(b'+') => {
                    self.pos += 1;
                    false
                }
                _ => false,
            };
            let d = self.digits();
            if d.is_empty() {
                self.pos = save;
            } else {
                exp = d.parse::<i64>().map_err(|_| self.err("exponent too large"))?;
                if neg {
                    exp = -exp;
                }
            }
        }
        let mantissa: BigInt = format!("{int}{frac}").parse().unwrap_or_else(|_| BigInt::zero());
        let scale = exp - frac.len() as i64;
        let ten = BigInt::from(10u32);
        let mut r = BigRational::from_integer(mantissa);
        if scale.unsigned_abs() > 10_000 {
            return Err(self.err("exponent too large"));
        }
        let p = BigRational::from_integer(num_traits::pow(ten, scale.unsigned_abs() as usize));
        if scale >= 0 {
            r *= p;
        } else {
            r /= p;
        }
        if frac.is_empty() && exp == 0 && self.eat(b'/') {
            self.skip_ws();
            let at = self.pos;
            let d = self.digits();
            let den: BigInt = d.parse().map_err(|_| {
                self.pos = at;
                self.err("expected a denominator")
            })?;
            if den.is_zero() {
                self.pos = at;
                return Err(self.err("zero denominator"));
            }
            r /= BigRational::from_integer(den);
        }
        Ok(r)
    }
}

struct Located<'a> {
    line: usize,
    text: &'a str,
}

fn content_lines(text: &str) -> impl Iterator<Item = Located<'_>> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let t = strip_comment(l);
        (!t.trim().is_empty()).then_some(Located { line: i + 1, text: t })
    })
}

// ---------------------------------------------------------------- .pps

fn parse_term(c: &mut Cursor, vars: &HashMap<&str, usize>) -> Result<Monomial> {
    let mut coeff = BigRational::one();
    let mut exps: Vec<(usize, u32)> = Vec::new();
    let mut first = true;
    loop {
        if c.starts_number() {
            coeff *= c.rational()?;
        } else {
            let at = {
                c.skip_ws();
                c.pos
            };
            let name = c.ident().map_err(|e| if first { c.err("expected a term") } else { e })?;
            let v = *vars
                .get(name)
                .ok_or_else(|| c.err_at(at, format!("unknown variable {name}")))?;
            let mut k = 1u32;
            if c.eat(b'^') {
                let at = c.pos;
                k = u32::try_from(c.unsigned()?).map_err(|_| perr(c.line, at + 1, "exponent too large"))?;
            }
            exps.push((v, k));
        }
        first = false;
        if !c.eat(b'*') {
            break;
        }
    }
    Ok(Monomial::new(coeff, exps))
}

fn parse_expr(c: &mut Cursor, vars: &HashMap<&str, usize>) -> Result<ProbPoly> {
    let mut terms = vec![parse_term(c, vars)?];
    while c.eat(b'+') {
        terms.push(parse_term(c, vars)?);
    }
    Ok(ProbPoly::from_terms(terms))
}

/// Parses a `.pps` system; the result is validated.
pub fn parse_pps(text: &str) -> Result<MaxMinPps> {
    let lines: Vec<Located> = content_lines(text).collect();
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    for l in &lines {
        let mut c = Cursor::new(l.text, l.line);
        let at = {
            c.skip_ws();
            c.pos
        };
        let name = c.ident()?;
        if index.insert(name, names.len()).is_some() {
            return Err(c.err_at(at, format!("duplicate variable {name}")));
        }
        names.push(name.to_string());
        c.expect(b'=')?;
    }
    let mut equations = Vec::with_capacity(lines.len());
    for l in &lines {
        let mut c = Cursor::new(l.text, l.line);
        c.ident()?;
        c.expect(b'=')?;
        let player = if c.eat_str("min") {
            Some(Player::Min)
        } else if c.eat_str("max") {
            Some(Player::Max)
        } else {
            None
        };
        let player = match player {
            Some(p) if c.peek() == Some(b'{') => Some(p),
            Some(_) => {
                // a variable whose name starts with min/max
                c = Cursor::new(l.text, l.line);
                c.ident()?;
                c.expect(b'=')?;
                None
            }
            None => None,
        };
        let eq = match player {
            None => Equation::Single(parse_expr(&mut c, &index)?),
            Some(p) => {
                c.expect(b'{')?;
                if c.peek() == Some(b'}') {
                    return Err(c.err(format!("empty {}", if p == Player::Min { "min" } else { "max" })));
                }
                let mut branches = vec![parse_expr(&mut c, &index)?];
                while c.eat(b';') {
                    branches.push(parse_expr(&mut c, &index)?);
                }
                c.expect(b'}')?;
                match p {
                    Player::Min => Equation::MinOf(branches),
                    Player::Max => Equation::MaxOf(branches),
                }
            }
        };
        c.finish()?;
        equations.push(eq);
    }
    if equations.is_empty() {
        return Err(perr(1, 1, "no equations"));
    }
    let pps = MaxMinPps::new(names, equations);
    pps.validate()?;
    Ok(pps)
}

fn write_poly(out: &mut String, p: &ProbPoly, names: &[String]) {
    if p.terms.is_empty() {
        out.push('0');
        return;
    }
    for (i, t) in p.terms.iter().enumerate() {
        if i > 0 {
            out.push_str(" + ");
        }
        let mut parts = Vec::new();
        if !t.coeff.is_one() || t.exps.is_empty() {
            parts.push(format_ratio(&t.coeff));
        }
        for &(v, k) in &t.exps {
            if k == 1 {
                parts.push(names[v].clone());
            } else {
                parts.push(format!("{}^{k}", names[v]));
            }
        }
        out.push_str(&parts.join("*"));
    }
}

pub fn write_pps(pps: &MaxMinPps) -> String {
    let mut out = String::new();
    for (name, eq) in pps.names.iter().zip(&pps.equations) {
        let _ = write!(out, "{name} = ");
        let (kw, bs) = match eq {
            Equation::Single(p) => {
                write_poly(&mut out, p, &pps.names);
                out.push('\n');
                continue;
            }
            Equation::MinOf(b) => ("min", b),
            Equation::MaxOf(b) => ("max", b),
        };
        let _ = write!(out, "{kw}{{ ");
        for (i, b) in bs.iter().enumerate() {
            if i > 0 {
                out.push_str(" ; ");
            }
            write_poly(&mut out, b, &pps.names);
        }
        out.push_str(" }\n");
    }
    out
}

// ---------------------------------------------------------------- .pol

fn parse_choice(c: &mut Cursor) -> Result<Choice> {
    if c.eat(b'{') {
        let mut w = Vec::new();
        loop {
            let b = c.unsigned()? as usize;
            c.expect(b':')?;
            w.push((b, c.rational()?));
            if !c.eat(b',') {
                break;
            }
        }
        c.expect(b'}')?;
        let sum: BigRational = w.iter().map(|(_, x)| x.clone()).sum();
        if !sum.is_one() {
            return Err(c.err(format!("weights sum to {}", format_ratio(&sum))));
        }
        Ok(Choice::mixed(w))
    } else {
        Ok(Choice::Pure(c.unsigned()? as usize))
    }
}

/// Parses policy lines against `pps`. The player is taken from the equations named; lines
/// for the other player's variables are rejected.
pub fn parse_policy(text: &str, pps: &MaxMinPps, player: Player) -> Result<Policy> {
    let lines: Vec<Located> = content_lines(text).collect();
    parse_policy_lines(&lines, pps, player)
}

fn parse_policy_lines(lines: &[Located], pps: &MaxMinPps, player: Player) -> Result<Policy> {
    let mut p = Policy::new(player);
    for l in lines {
        let mut c = Cursor::new(l.text, l.line);
        c.skip_ws();
        let at = c.pos;
        let name = c.ident()?;
        let named = |msg: String| perr(l.line, at + 1, msg);
        let v = pps.index_of(name).ok_or_else(|| named(format!("unknown variable {name}")))?;
        let eq = &pps.equations[v];
        let owner = match eq {
            Equation::MinOf(_) => Some(Player::Min),
            Equation::MaxOf(_) => Some(Player::Max),
            Equation::Single(_) => None,
        };
        if owner != Some(player) {
            return Err(named(format!("{name} is not a {} variable", player_name(player))));
        }
        c.expect(b'=')?;
        let ch = parse_choice(&mut c)?;
        c.finish()?;
        ch.check(eq.branches().len()).map_err(|e| named(e.to_string()))?;
        if p.choices.contains_key(&v) {
            return Err(named(format!("duplicate choice for {name}")));
        }
        p.set(v, ch);
    }
    Ok(p)
}

/// Policy for `player` with the player inferred from the first named variable, or `default`.
pub fn parse_policy_infer(text: &str, pps: &MaxMinPps, default: Player) -> Result<Policy> {
    let player = content_lines(text)
        .find_map(|l| {
            let mut c = Cursor::new(l.text, l.line);
            let name = c.ident().ok()?;
            match &pps.equations[pps.index_of(name)?] {
                Equation::MinOf(_) => Some(Player::Min),
                Equation::MaxOf(_) => Some(Player::Max),
                Equation::Single(_) => None,
            }
        })
        .unwrap_or(default);
    parse_policy(text, pps, player)
}

pub fn player_name(p: Player) -> &'static str {
    match p {
        Player::Max => "max",
        Player::Min => "min",
    }
}

fn write_choice(out: &mut String, c: &Choice) {
    match c {
        Choice::Pure(b) => {
            let _ = write!(out, "{b}");
        }
        Choice::Mixed(w) => {
            let parts: Vec<String> = w.iter().map(|(b, x)| format!("{b}: {}", format_ratio(x))).collect();
            let _ = write!(out, "{{ {} }}", parts.join(", "));
        }
    }
}

pub fn write_policy(p: &Policy, names: &[String]) -> String {
    let mut out = String::new();
    for (&v, c) in &p.choices {
        let _ = write!(out, "{} = ", names[v]);
        write_choice(&mut out, c);
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------- strategies

fn mask_names(mask: &[bool], names: &[String]) -> String {
    let v: Vec<&str> = mask
        .iter()
        .zip(names)
        .filter(|(m, _)| **m)
        .map(|(_, n)| n.as_str())
        .collect();
    v.join(" ")
}

pub fn write_strategy(s: &StrategyDescriptor, names: &[String]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "kind: {}", s.kind_name());
    let _ = writeln!(out, "player: {}", player_name(s.player));
    if let Some(e) = s.epsilon {
        let _ = writeln!(out, "epsilon: {e:e}");
    }
    if !s.note.is_empty() {
        let _ = writeln!(out, "note: {}", s.note.replace('\n', " "));
    }
    let section = |out: &mut String, title: &str, p: &Policy| {
        let _ = writeln!(out, "[{title}]");
        out.push_str(&write_policy(p, names));
    };
    match &s.kind {
        StrategyKind::Static(p) => section(&mut out, "policy", p),
        StrategyKind::Threshold {
            sigma,
            tau,
            threshold,
            effective_threshold,
            uncounted,
        } => {
            let _ = writeln!(out, "threshold: {threshold}");
            let _ = writeln!(out, "effective-threshold: {effective_threshold}");
            let _ = writeln!(out, "uncounted: {}", mask_names(uncounted, names));
            section(&mut out, "sigma", sigma);
            section(&mut out, "tau", tau);
        }
        StrategyKind::QueenWorker {
            queen,
            worker,
            zero,
            trees,
        } => {
            let _ = writeln!(out, "zero: {}", mask_names(zero, names));
            for (v, step) in trees {
                let _ = writeln!(out, "tree: {v} -> {step}");
            }
            section(&mut out, "queen", queen);
            section(&mut out, "worker", worker);
        }
    }
    out
}

fn parse_mask(c: &mut Cursor, pps: &MaxMinPps) -> Result<Vec<bool>> {
    let mut m = vec![false; pps.len()];
    while !c.done() {
        let at = c.pos;
        let n = c.ident()?;
        let v = pps
            .index_of(n)
            .ok_or_else(|| perr(c.line, at + 1, format!("unknown variable {n}")))?;
        m[v] = true;
    }
    Ok(m)
}

/// Parses a strategy descriptor whose policies refer to the variables of `pps`.
pub fn parse_strategy(text: &str, pps: &MaxMinPps) -> Result<StrategyDescriptor> {
    let lines: Vec<Located> = content_lines(text).collect();
    let mut header: HashMap<String, (usize, String)> = HashMap::new();
    let mut trees = Vec::new();
    let mut sections: Vec<(String, usize, Vec<Located>)> = Vec::new();
    for l in lines {
        let t = l.text.trim();
        if let Some(rest) = t.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| perr(l.line, 1, "unterminated section header"))?;
            sections.push((name.trim().to_string(), l.line, Vec::new()));
        } else if let Some(s) = sections.last_mut() {
            s.2.push(l);
        } else {
            let (k, v) = t
                .split_once(':')
                .ok_or_else(|| perr(l.line, 1, "expected 'key: value'"))?;
            let k = k.trim().to_string();
            if k == "tree" {
                let (a, b) = v
                    .split_once("->")
                    .ok_or_else(|| perr(l.line, 1, "expected 'tree: name -> step'"))?;
                trees.push((a.trim().to_string(), b.trim().to_string()));
            } else {
                header.insert(k, (l.line, v.trim().to_string()));
            }
        }
    }
    let get = |k: &str| header.get(k).map(|(l, v)| (*l, v.as_str()));
    let (kl, kind) = get("kind").ok_or_else(|| perr(1, 1, "missing 'kind:' header"))?;
    let player = match get("player").map(|x| x.1) {
        None | Some("min") => Player::Min,
        Some("max") => Player::Max,
        Some(o) => return Err(perr(get("player").unwrap().0, 1, format!("unknown player {o}"))),
    };
    let epsilon = match get("epsilon") {
        None => None,
        Some((l, v)) => Some(v.parse::<f64>().map_err(|_| perr(l, 1, "bad epsilon"))?),
    };
    let note = get("note").map(|x| x.1.to_string()).unwrap_or_default();
    let mut policies: HashMap<String, Policy> = HashMap::new();
    for (name, _, body) in &sections {
        policies.insert(name.clone(), parse_policy_lines(body, pps, player)?);
    }
    let take = |policies: &mut HashMap<String, Policy>, n: &str| {
        policies
            .remove(n)
            .ok_or_else(|| perr(kl, 1, format!("missing [{n}] section")))
    };
    let mask = |k: &str| -> Result<Vec<bool>> {
        match get(k) {
            None => Ok(vec![false; pps.len()]),
            Some((l, v)) => parse_mask(&mut Cursor::new(v, l), pps),
        }
    };
    let kind = match kind {
        "static" | "randomized" => StrategyKind::Static(take(&mut policies, "policy")?),
        "threshold" => {
            let (l, t) = get("threshold").ok_or_else(|| perr(kl, 1, "missing 'threshold:'"))?;
            let threshold: BigUint = t.parse().map_err(|_| perr(l, 1, "bad threshold"))?;
            let effective_threshold = match get("effective-threshold") {
                Some((l, v)) => v.parse().map_err(|_| perr(l, 1, "bad effective-threshold"))?,
                None => u64::try_from(&threshold).unwrap_or(u64::MAX),
            };
            StrategyKind::Threshold {
                sigma: take(&mut policies, "sigma")?,
                tau: take(&mut policies, "tau")?,
                threshold,
                effective_threshold,
                uncounted: mask("uncounted")?,
            }
        }
        "queen-worker" => StrategyKind::QueenWorker {
            queen: take(&mut policies, "queen")?,
            worker: take(&mut policies, "worker")?,
            zero: mask("zero")?,
            trees,
        },
        o => return Err(perr(kl, 1, format!("unknown strategy kind {o}"))),
    };
    Ok(StrategyDescriptor {
        player,
        kind,
        epsilon,
        note,
    })
}

// ---------------------------------------------------------------- .bmdp

fn owner_name(o: Owner) -> &'static str {
    match o {
        Owner::ReachMaximizer => "max",
        Owner::ReachMinimizer => "min",
        Owner::Random => "random",
    }
}

/// Parses a `.bmdp` model; the result is validated.
pub fn parse_bmdp(text: &str) -> Result<Bssg> {
    let lines: Vec<Located> = content_lines(text).collect();
    let mut types: Vec<TypeDef> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut targets = Vec::new();
    let mut rules = Vec::new();
    for l in &lines {
        let mut c = Cursor::new(l.text, l.line);
        c.skip_ws();
        let save = c.pos;
        let kw = c.ident().ok();
        match kw {
            Some("type") if c.peek().is_some_and(|ch| ch != b'-') => {
                let at = {
                    c.skip_ws();
                    c.pos
                };
                let name = c.ident()?;
                c.expect(b':')?;
                let oat = {
                    c.skip_ws();
                    c.pos
                };
                let owner = match c.ident()? {
                    "max" => Owner::ReachMaximizer,
                    "min" => Owner::ReachMinimizer,
                    "random" => Owner::Random,
                    o => return Err(perr(l.line, oat + 1, format!("unknown owner {o}"))),
                };
                c.finish()?;
                if index.contains_key(name) {
                    return Err(perr(l.line, at + 1, format!("duplicate type name {name}")));
                }
                index.insert(name.to_string(), types.len());
                types.push(TypeDef {
                    name: name.to_string(),
                    owner,
                    actions: Vec::new(),
                });
            }
            Some("target") if c.peek().is_some_and(|ch| ch != b'-') => {
                while !c.done() {
                    c.skip_ws();
                    targets.push((l.line, c.pos, c.ident()?.to_string()));
                }
            }
            _ => {
                c.pos = save;
                rules.push(l);
            }
        }
    }
    let mut target_idx = Vec::new();
    for (line, col, n) in targets {
        let t = *index
            .get(&n)
            .ok_or_else(|| perr(line, col + 1, format!("unknown type {n}")))?;
        if !target_idx.contains(&t) {
            target_idx.push(t);
        }
    }
    for l in rules {
        let mut c = Cursor::new(l.text, l.line);
        c.skip_ws();
        let at = c.pos;
        let name = c.ident()?;
        let t = *index
            .get(name)
            .ok_or_else(|| perr(l.line, at + 1, format!("unknown type {name}")))?;
        c.expect(b'-')?;
        let action = c.ident()?.to_string();
        if !c.eat_str("->") {
            return Err(c.err("expected '->'"));
        }
        let mut parsed = Vec::new();
        loop {
            let prob = c.rational()?;
            c.expect(b':')?;
            let mut offspring = Vec::new();
            if c.eat_str("<empty>") {
            } else {
                while matches!(c.peek(), Some(ch) if ch != b'|') {
                    let oat = c.pos;
                    let o = c.ident()?;
                    offspring.push(
                        *index
                            .get(o)
                            .ok_or_else(|| perr(l.line, oat + 1, format!("unknown type {o}")))?,
                    );
                }
                if offspring.is_empty() {
                    return Err(c.err("expected offspring or <empty>"));
                }
            }
            parsed.push(Rule { prob, offspring });
            if !c.eat(b'|') {
                break;
            }
        }
        c.finish()?;
        let td = &mut types[t];
        match td.actions.iter_mut().find(|a| a.name == action) {
            Some(a) => a.rules.extend(parsed),
            None => td.actions.push(Action {
                name: action,
                rules: parsed,
            }),
        }
    }
    let m = Bssg {
        types,
        targets: target_idx,
    };
    m.validate()?;
    Ok(m)
}

pub fn write_bmdp(m: &Bssg) -> String {
    let mut out = String::new();
    for t in &m.types {
        let _ = writeln!(out, "type {} : {}", t.name, owner_name(t.owner));
    }
    let targets: Vec<&str> = m.targets.iter().map(|&t| m.types[t].name.as_str()).collect();
    let _ = writeln!(out, "target {}", targets.join(" "));
    for t in &m.types {
        for a in &t.actions {
            let rules: Vec<String> = a
                .rules
                .iter()
                .map(|r| {
                    let off = if r.offspring.is_empty() {
                        "<empty>".to_string()
                    } else {
                        r.offspring
                            .iter()
                            .map(|&o| m.types[o].name.as_str())
                            .collect::<Vec<_>>()
                            .join(" ")
                    };
                    format!("{} : {off}", format_ratio(&r.prob))
                })
                .collect();
            let _ = writeln!(out, "{} -{}-> {}", t.name, a.name, rules.join(" | "));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    const SAMPLE: &str = "a = min{ 1/3*a + 1/3*b^2 ; 1/2 }  # top\nb = min{ a ; c }\nc = 1/3*c + 1/3\n";

    fn line_col(e: Error) -> (usize, usize, String) {
        match e {
            Error::Parse { line, column, message } => (line, column, message),
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn parses_min_system() {
        let p = parse_pps(SAMPLE).unwrap();
        assert_eq!(p.names, vec!["a", "b", "c"]);
        assert_eq!(p.classify(), crate::pps::SystemClass::MinPps);
        assert_eq!(p.equations[2], Equation::Single(ProbPoly::from_terms(vec![
            Monomial::new(rat(1, 3), vec![(2, 1)]),
            Monomial::constant(rat(1, 3)),
        ])));
    }

    #[test]
    fn decimals_are_exact() {
        let p = parse_pps("x = 0.5*x*x + 0.25").unwrap();
        let Equation::Single(q) = &p.equations[0] else { panic!() };
        assert_eq!(q.terms.iter().map(|t| t.coeff.clone()).collect::<Vec<_>>(), vec![rat(1, 4), rat(1, 2)]);
        assert_eq!(q.terms[1].exps, vec![(0, 2)]);
        let p = parse_pps("x = 25e-2 + 5E-1*x").unwrap();
        assert_eq!(p.equations[0].branches()[0].coefficient_sum(), rat(3, 4));
    }

    #[test]
    fn syntax_errors_have_positions() {
        let (l, c, m) = line_col(parse_pps("x = min{}").unwrap_err());
        assert_eq!((l, c, m.as_str()), (1, 9, "empty min"));
        let (l, c, m) = line_col(parse_pps("x = 1/2\n\ny = 1/2 * z").unwrap_err());
        assert_eq!((l, c, m.as_str()), (3, 11, "unknown variable z"));
        let (_, _, m) = line_col(parse_pps("x = 1/0").unwrap_err());
        assert_eq!(m, "zero denominator");
        assert!(matches!(parse_pps("x = 3/4 + 1/2*x"), Err(Error::Validation(_))));
    }

    #[test]
    fn pps_round_trip() {
        let p = parse_pps(SAMPLE).unwrap();
        let text = write_pps(&p);
        assert_eq!(parse_pps(&text).unwrap(), p);
    }

    #[test]
    fn names_starting_with_keywords() {
        let p = parse_pps("maxi = 1/2*minx\nminx = 1/2").unwrap();
        assert_eq!(p.equations[0], Equation::Single(ProbPoly::from_terms(vec![Monomial::new(rat(1, 2), vec![(1, 1)])])));
    }

    #[test]
    fn policies() {
        let p = parse_pps(SAMPLE).unwrap();
        let pol = parse_policy("b = 0\na = { 0: 1/4, 1: 3/4 }", &p, Player::Min).unwrap();
        assert_eq!(pol.pure(1), Some(0));
        assert_eq!(parse_policy(&write_policy(&pol, &p.names), &p, Player::Min).unwrap(), pol);
        assert!(parse_policy("c = 0", &p, Player::Min).is_err());
        assert!(parse_policy("b = 2", &p, Player::Min).is_err());
        assert!(parse_policy("a = { 0: 1/4, 1: 1/4 }", &p, Player::Min).is_err());
        assert_eq!(parse_policy_infer("b = 1", &p, Player::Max).unwrap().player, Player::Min);
    }

    const MODEL: &str = "\
type A : max
type B : random
type C : random
target C
A -split-> 1 : A A
A -become-> 1 : B
B -go-> 1/2 : C | 1/2 : <empty>
";

    #[test]
    fn bmdp_parse_and_round_trip() {
        let m = parse_bmdp(MODEL).unwrap();
        assert_eq!(m.types.len(), 3);
        assert_eq!(m.types[0].actions.len(), 2);
        assert!(m.types[1].actions[0].rules[1].offspring.is_empty());
        assert_eq!(parse_bmdp(&write_bmdp(&m)).unwrap(), m);
    }

    #[test]
    fn bmdp_errors() {
        let (l, _, m) = line_col(parse_bmdp("type A : max\ntype A : min\ntarget A").unwrap_err());
        assert_eq!((l, m.as_str()), (2, "duplicate type name A"));
        let short = "type B : random\ntype C : random\ntarget C\nB -go-> 1/3 : C\nB -go-> 1/3 : <empty>";
        match parse_bmdp(short) {
            Err(Error::Validation(d)) => assert!(d[0].message.contains("2/3"), "{d:?}"),
            o => panic!("{o:?}"),
        }
    }
}
