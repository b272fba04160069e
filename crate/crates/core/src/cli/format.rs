//! Line-oriented text formats for diversities and self-maps.
//!
//! A diversity file starts with `DIVERSITY 1` and `POINTS <labels…>`,
//! followed by exactly one body:
//!
//! ```text
//! SET {x,y} = 1/2          one line per nonempty subset
//! COUNTING 3               δ(A) = |A| − 1
//! DIAMETER_OF_METRIC       then `DIST u v p/q` for every pair
//! TREE                     then `EDGE u v p/q` and `MARK label edge offset`
//!                          or `MARK label node`
//! GLUE hub=θ               then `BEGIN LEFT` … `END`, `BEGIN RIGHT` … `END`
//! ```
//!
//! Nested blocks repeat the layout, with the `DIVERSITY` line optional.
//! `#` starts a comment. The ground order is always the order of `POINTS`.
//!
//! A map file lists `MAP a -> b` once for every point.

use std::collections::{HashMap, HashSet};

use crate::constructions::{counting_diversity_on, diameter_diversity, glue_diversities, reorder, tree_diversity, GluedDiversitySpec};
use crate::diversity::FiniteDiversity;
use crate::error::{Error, Result};
use crate::fixedpoint::SelfMap;
use crate::metric::FiniteMetric;
use crate::rat::{fmt_rat, parse_rat, Rat};
use crate::sets::{GroundSet, SetFunction, SubsetMask};
use crate::tree::{MetricTree, TreePoint};

pub const FORMAT_VERSION: &str = "1";

#[derive(Clone, Debug)]
pub enum Body {
    Table(SetFunction),
    Counting(usize),
    DiameterOfMetric(FiniteMetric),
    Tree {
        tree: MetricTree,
        /// In `POINTS` order.
        marks: Vec<(String, TreePoint)>,
    },
    Glue {
        hub: String,
        left: Box<DiversityFile>,
        right: Box<DiversityFile>,
    },
}

#[derive(Clone, Debug)]
pub struct DiversityFile {
    pub ground: GroundSet,
    pub body: Body,
}

impl DiversityFile {
    /// The raw table in `POINTS` order. Explicit tables are returned as
    /// written, without checking the axioms.
    pub fn table(&self) -> Result<SetFunction> {
        match &self.body {
            Body::Table(t) => Ok(t.clone()),
            _ => Ok(self.build()?.table().clone()),
        }
    }

    /// The diversity described by the file. Explicit tables are validated;
    /// the other bodies yield diversities by construction.
    pub fn build(&self) -> Result<FiniteDiversity> {
        match &self.body {
            Body::Table(t) => FiniteDiversity::new(t.clone()),
            Body::Counting(_) => counting_diversity_on(&self.ground),
            Body::DiameterOfMetric(m) => diameter_diversity(m),
            Body::Tree { tree, marks } => tree_diversity(tree, marks),
            Body::Glue { hub, left, right } => {
                let glued = glue_diversities(GluedDiversitySpec {
                    left: Box::new(left.build()?),
                    right: Box::new(right.build()?),
                    hub: hub.clone(),
                })?;
                reorder(&FiniteDiversity::materialize(&glued)?, &self.ground)
            }
        }
    }
}

/// Labels must survive a round trip through the token grammar.
pub fn is_writable_label(label: &str) -> bool {
    !label.is_empty()
        && label != "->"
        && !label
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '{' | '}' | ',' | '=' | '#'))
}

/// Serializes the diversity as an explicit table, subsets in mask order.
pub fn write_table(div: &FiniteDiversity) -> Result<String> {
    let ground = div.ground();
    if let Some(bad) = ground.names().iter().find(|l| !is_writable_label(l)) {
        return Err(Error::InvalidLabel(bad.clone()));
    }
    let mut out = format!("DIVERSITY {FORMAT_VERSION}\nPOINTS {}\n", ground.names().join(" "));
    for s in ground.nonempty_subsets() {
        out.push_str(&format!("SET {} = {}\n", ground.format_set(s), fmt_rat(div.get(s))));
    }
    Ok(out)
}

pub fn write_map(map: &SelfMap) -> Result<String> {
    let ground = map.ground();
    if let Some(bad) = ground.names().iter().find(|l| !is_writable_label(l)) {
        return Err(Error::InvalidLabel(bad.clone()));
    }
    let mut out = String::new();
    for x in 0..ground.len() {
        out.push_str(&format!("MAP {} -> {}\n", ground.name(x), ground.name(map.image(x))));
    }
    Ok(out)
}

pub fn parse_diversity(text: &str) -> Result<DiversityFile> {
    let mut p = Parser::new(text);
    let file = p.block(false)?;
    if let Some(line) = p.peek() {
        let t = &line.tokens()[0];
        return Err(p.err(line.no, t.col, format!("unexpected `{}` after the body", t.s)));
    }
    Ok(file)
}

/// Parses a map file against `ground`. Every point needs exactly one line.
pub fn parse_map(text: &str, ground: &GroundSet) -> Result<SelfMap> {
    let mut p = Parser::new(text);
    let mut image: Vec<Option<usize>> = vec![None; ground.len()];
    while let Some(line) = p.next() {
        let toks = line.tokens();
        if toks[0].s != "MAP" {
            return Err(p.err(line.no, toks[0].col, format!("expected `MAP`, found `{}`", toks[0].s)));
        }
        if toks.len() != 4 || toks[2].s != "->" {
            return Err(p.err(line.no, toks[0].col, "expected `MAP a -> b`".into()));
        }
        let from = p.label(ground, line.no, &toks[1])?;
        let to = p.label(ground, line.no, &toks[3])?;
        if image[from].is_some() {
            return Err(p.err(line.no, toks[1].col, format!("`{}` is mapped twice", toks[1].s)));
        }
        image[from] = Some(to);
    }
    let image = image
        .iter()
        .enumerate()
        .map(|(x, t)| {
            t.ok_or_else(|| p.err_end(format!("map is not total: `{}` has no image", ground.name(x))))
        })
        .collect::<Result<Vec<_>>>()?;
    SelfMap::new(ground.clone(), image)
}

#[derive(Clone, Copy)]
struct Line<'a> {
    no: usize,
    text: &'a str,
}

struct Tok<'a> {
    s: &'a str,
    /// One-based, in characters.
    col: usize,
}

impl<'a> Line<'a> {
    fn tokens(&self) -> Vec<Tok<'a>> {
        let mut out = Vec::new();
        let mut start: Option<usize> = None;
        for (i, c) in self.text.char_indices().chain(std::iter::once((self.text.len(), ' '))) {
            match (c.is_whitespace(), start) {
                (true, Some(s)) => {
                    out.push(Tok {
                        s: &self.text[s..i],
                        col: self.col_of(s),
                    });
                    start = None;
                }
                (false, None) => start = Some(i),
                _ => {}
            }
        }
        out
    }

    fn col_of(&self, byte: usize) -> usize {
        self.text[..byte].chars().count() + 1
    }

    fn keyword(&self) -> &'a str {
        self.text.split_whitespace().next().unwrap_or("")
    }
}

struct Parser<'a> {
    lines: Vec<Line<'a>>,
    pos: usize,
    total_lines: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        let mut lines = Vec::new();
        let mut total_lines = 0;
        for (i, raw) in text.lines().enumerate() {
            total_lines = i + 1;
            let text = raw.split('#').next().unwrap_or("");
            if !text.trim().is_empty() {
                lines.push(Line { no: i + 1, text });
            }
        }
        Self {
            lines,
            pos: 0,
            total_lines,
        }
    }

    fn peek(&self) -> Option<Line<'a>> {
        self.lines.get(self.pos).copied()
    }

    fn next(&mut self) -> Option<Line<'a>> {
        let l = self.peek();
        self.pos += 1;
        l
    }

    fn err(&self, line: usize, column: usize, message: String) -> Error {
        Error::Parse {
            line,
            column,
            message,
        }
    }

    fn err_end(&self, message: String) -> Error {
        self.err(self.total_lines + 1, 1, message)
    }

    /// Where the current body ends: the next line, or just past the input.
    fn here(&self) -> usize {
        self.peek().map_or(self.total_lines + 1, |l| l.no)
    }

    fn expect(&mut self, what: &str) -> Result<Line<'a>> {
        self.next()
            .ok_or_else(|| self.err_end(format!("unexpected end of input, expected {what}")))
    }

    fn label(&self, ground: &GroundSet, line: usize, tok: &Tok) -> Result<usize> {
        ground
            .index_of(tok.s)
            .map_err(|_| self.err(line, tok.col, format!("unknown point `{}`", tok.s)))
    }

    fn rational(&self, line: usize, tok: &Tok) -> Result<Rat> {
        parse_rat(tok.s).map_err(|_| self.err(line, tok.col, format!("invalid rational `{}`", tok.s)))
    }

    fn arity(&self, line: Line, toks: &[Tok], n: usize, shape: &str) -> Result<()> {
        if toks.len() == n {
            Ok(())
        } else {
            Err(self.err(line.no, toks[0].col, format!("expected `{shape}`")))
        }
    }

    /// Library errors raised while building a body, located at its
    /// directive line.
    fn at(&self, line: Line) -> impl Fn(Error) -> Error + '_ {
        move |e| self.err(line.no, 1, e.to_string())
    }

    fn block(&mut self, nested: bool) -> Result<DiversityFile> {
        let mut line = self.expect("`DIVERSITY 1`")?;
        let toks = line.tokens();
        if toks[0].s == "DIVERSITY" {
            if toks.len() != 2 {
                return Err(self.err(line.no, toks[0].col, "expected `DIVERSITY 1`".into()));
            }
            if toks[1].s != FORMAT_VERSION {
                return Err(self.err(line.no, toks[1].col, format!("unsupported format version `{}`", toks[1].s)));
            }
            line = self.expect("`POINTS`")?;
        } else if !nested {
            return Err(self.err(line.no, toks[0].col, "expected `DIVERSITY 1`".into()));
        }
        let ground = self.points(line)?;
        let directive = self.expect("a body")?;
        let dtoks = directive.tokens();
        let body = match dtoks[0].s {
            "SET" => {
                self.pos -= 1;
                self.table(&ground)?
            }
            "COUNTING" => {
                self.arity(directive, &dtoks, 2, "COUNTING n")?;
                let n: usize = dtoks[1]
                    .s
                    .parse()
                    .map_err(|_| self.err(directive.no, dtoks[1].col, format!("invalid count `{}`", dtoks[1].s)))?;
                if n != ground.len() {
                    return Err(self.err(
                        directive.no,
                        dtoks[1].col,
                        format!("COUNTING {n} but {} points declared", ground.len()),
                    ));
                }
                Body::Counting(n)
            }
            "DIAMETER_OF_METRIC" => {
                self.arity(directive, &dtoks, 1, "DIAMETER_OF_METRIC")?;
                self.metric(directive, &ground)?
            }
            "TREE" => {
                self.arity(directive, &dtoks, 1, "TREE")?;
                self.tree(directive, &ground)?
            }
            "GLUE" => self.glue(directive, &dtoks, &ground)?,
            other => {
                return Err(self.err(directive.no, dtoks[0].col, format!("unknown directive `{other}`")));
            }
        };
        if nested {
            let end = self.expect("`END`")?;
            let etoks = end.tokens();
            if etoks[0].s != "END" || etoks.len() != 1 {
                return Err(self.err(end.no, etoks[0].col, format!("expected `END`, found `{}`", etoks[0].s)));
            }
        }
        Ok(DiversityFile { ground, body })
    }

    fn points(&self, line: Line) -> Result<GroundSet> {
        let toks = line.tokens();
        if toks[0].s != "POINTS" {
            return Err(self.err(line.no, toks[0].col, format!("expected `POINTS`, found `{}`", toks[0].s)));
        }
        if toks.len() < 2 {
            return Err(self.err(line.no, toks[0].col, "POINTS needs at least one label".into()));
        }
        let mut seen = HashSet::new();
        for t in &toks[1..] {
            if !is_writable_label(t.s) {
                return Err(self.err(line.no, t.col, format!("invalid label `{}`", t.s)));
            }
            if !seen.insert(t.s) {
                return Err(self.err(line.no, t.col, format!("duplicate label `{}`", t.s)));
            }
        }
        GroundSet::new(toks[1..].iter().map(|t| t.s)).map_err(self.at(line))
    }

    fn table(&mut self, ground: &GroundSet) -> Result<Body> {
        let n = ground.len();
        if n > crate::sets::DENSE_CAP {
            return Err(Error::CapExceeded {
                size: n,
                cap: crate::sets::DENSE_CAP,
            });
        }
        let mut values: Vec<Option<Rat>> = vec![None; 1 << n];
        while let Some(line) = self.peek() {
            if line.keyword() != "SET" {
                break;
            }
            self.pos += 1;
            let (set, value) = self.set_line(line, ground)?;
            if values[set.0 as usize].is_some() {
                let col = line.col_of(line.text.find('{').unwrap_or(0));
                return Err(self.err(line.no, col, format!("{} given twice", ground.format_set(set))));
            }
            if set.is_empty() && !num_traits::Zero::is_zero(&value) {
                let col = line.col_of(line.text.find('=').unwrap_or(0));
                return Err(self.err(line.no, col, "the empty set must have value 0".into()));
            }
            values[set.0 as usize] = Some(value);
        }
        let end = self.here();
        let mut full = Vec::with_capacity(values.len());
        for (bits, v) in values.into_iter().enumerate() {
            match v {
                Some(v) => full.push(v),
                None if bits == 0 => full.push(Rat::from_integer(0.into())),
                None => {
                    return Err(self.err(
                        end,
                        1,
                        format!("table is missing {}", ground.format_set(SubsetMask(bits as u64))),
                    ))
                }
            }
        }
        Ok(Body::Table(SetFunction::from_values(ground, full)?))
    }

    fn set_line(&self, line: Line, ground: &GroundSet) -> Result<(SubsetMask, Rat)> {
        let text = line.text;
        let shape = || self.err(line.no, line.col_of(text.find("SET").unwrap_or(0)), "expected `SET {…} = p/q`".into());
        let open = text.find('{').ok_or_else(shape)?;
        let close = text[open..].find('}').map(|i| open + i).ok_or_else(shape)?;
        if !text[..open].trim().eq("SET") {
            return Err(shape());
        }
        let set = ground
            .parse_set(&text[open..=close])
            .map_err(|e| self.err(line.no, line.col_of(open), e.to_string()))?;
        let rest = &text[close + 1..];
        let eq = rest.find('=').ok_or_else(shape)?;
        if !rest[..eq].trim().is_empty() {
            return Err(shape());
        }
        let value_text = &rest[eq + 1..];
        let tail = Line {
            no: line.no,
            text: value_text,
        };
        let toks = tail.tokens();
        if toks.len() != 1 {
            return Err(shape());
        }
        let offset = close + 1 + eq + 1;
        let tok = Tok {
            s: toks[0].s,
            col: line.col_of(offset) + toks[0].col - 1,
        };
        Ok((set, self.rational(line.no, &tok)?))
    }

    fn metric(&mut self, directive: Line, ground: &GroundSet) -> Result<Body> {
        let n = ground.len();
        let mut d: HashMap<(usize, usize), Rat> = HashMap::new();
        while let Some(line) = self.peek() {
            if line.keyword() != "DIST" {
                break;
            }
            self.pos += 1;
            let toks = line.tokens();
            self.arity(line, &toks, 4, "DIST u v p/q")?;
            let u = self.label(ground, line.no, &toks[1])?;
            let v = self.label(ground, line.no, &toks[2])?;
            if u == v {
                return Err(self.err(line.no, toks[2].col, "DIST needs two distinct points".into()));
            }
            let r = self.rational(line.no, &toks[3])?;
            if d.insert((u.min(v), u.max(v)), r).is_some() {
                return Err(self.err(line.no, toks[1].col, format!("distance {} {} given twice", toks[1].s, toks[2].s)));
            }
        }
        for u in 0..n {
            for v in u + 1..n {
                if !d.contains_key(&(u, v)) {
                    return Err(self.err(
                        self.here(),
                        1,
                        format!("missing DIST {} {}", ground.name(u), ground.name(v)),
                    ));
                }
            }
        }
        let metric = FiniteMetric::from_fn(ground.clone(), |u, v| {
            if u == v {
                Rat::from_integer(0.into())
            } else {
                d[&(u.min(v), u.max(v))].clone()
            }
        })
        .map_err(self.at(directive))?;
        Ok(Body::DiameterOfMetric(metric))
    }

    fn tree(&mut self, directive: Line, ground: &GroundSet) -> Result<Body> {
        let mut nodes: Vec<String> = Vec::new();
        let mut edges: Vec<(usize, usize, Rat)> = Vec::new();
        enum Mark {
            Edge(usize, Rat),
            Node(String),
        }
        let mut marks: Vec<Option<(Mark, usize)>> = (0..ground.len()).map(|_| None).collect();
        while let Some(line) = self.peek() {
            let toks = line.tokens();
            match toks[0].s {
                "EDGE" => {
                    self.arity(line, &toks, 4, "EDGE u v p/q")?;
                    let mut node = |name: &str| match nodes.iter().position(|n| n == name) {
                        Some(i) => i,
                        None => {
                            nodes.push(name.to_string());
                            nodes.len() - 1
                        }
                    };
                    let (u, v) = (node(toks[1].s), node(toks[2].s));
                    edges.push((u, v, self.rational(line.no, &toks[3])?));
                }
                "MARK" => {
                    let p = self.label(ground, line.no, &toks[1.min(toks.len() - 1)])?;
                    let mark = match toks.len() {
                        3 => Mark::Node(toks[2].s.to_string()),
                        4 => {
                            let e = toks[2]
                                .s
                                .parse()
                                .map_err(|_| self.err(line.no, toks[2].col, format!("invalid edge index `{}`", toks[2].s)))?;
                            Mark::Edge(e, self.rational(line.no, &toks[3])?)
                        }
                        _ => {
                            return Err(self.err(line.no, toks[0].col, "expected `MARK label edge offset` or `MARK label node`".into()))
                        }
                    };
                    if marks[p].is_some() {
                        return Err(self.err(line.no, toks[1].col, format!("`{}` marked twice", toks[1].s)));
                    }
                    marks[p] = Some((mark, line.no));
                }
                _ => break,
            }
            self.pos += 1;
        }
        if edges.is_empty() {
            return Err(self.err(directive.no, 1, "TREE needs at least one EDGE".into()));
        }
        let tree = MetricTree::new(nodes, edges).map_err(self.at(directive))?;
        let mut placed = Vec::with_capacity(ground.len());
        for (p, m) in marks.into_iter().enumerate() {
            let (mark, line_no) = m.ok_or_else(|| {
                self.err(self.here(), 1, format!("point `{}` is not marked", ground.name(p)))
            })?;
            let located = match mark {
                Mark::Edge(e, off) => tree.point_on_edge(e, off),
                Mark::Node(name) => tree.node_index(&name).and_then(|v| tree.node_point(v)),
            };
            let point = located.map_err(|e| self.err(line_no, 1, e.to_string()))?;
            placed.push((ground.name(p).to_string(), point));
        }
        Ok(Body::Tree { tree, marks: placed })
    }

    fn glue(&mut self, directive: Line, dtoks: &[Tok], ground: &GroundSet) -> Result<Body> {
        self.arity(directive, dtoks, 2, "GLUE hub=label")?;
        let hub = dtoks[1]
            .s
            .strip_prefix("hub=")
            .ok_or_else(|| self.err(directive.no, dtoks[1].col, "expected `hub=label`".into()))?;
        self.label(ground, directive.no, &Tok { s: hub, col: dtoks[1].col + 4 })?;
        let mut side = |name: &str| -> Result<DiversityFile> {
            let begin = self.expect(&format!("`BEGIN {name}`"))?;
            let toks = begin.tokens();
            if toks.len() != 2 || toks[0].s != "BEGIN" || toks[1].s != name {
                return Err(self.err(begin.no, toks[0].col, format!("expected `BEGIN {name}`")));
            }
            self.block(true)
        };
        let left = side("LEFT")?;
        let right = side("RIGHT")?;
        let mut covered = HashSet::new();
        for (name, s) in [("left", &left), ("right", &right)] {
            if s.ground.index_of(hub).is_err() {
                return Err(self.err(directive.no, dtoks[1].col, format!("hub `{hub}` missing on the {name} side")));
            }
            for l in s.ground.names() {
                if ground.index_of(l).is_err() {
                    return Err(self.err(directive.no, 1, format!("`{l}` on the {name} side is not declared in POINTS")));
                }
                if l != hub && !covered.insert(l.clone()) {
                    return Err(self.err(directive.no, 1, format!("`{l}` lies on both sides but is not the hub")));
                }
            }
        }
        if let Some(missing) = ground.names().iter().find(|l| *l != hub && !covered.contains(*l)) {
            return Err(self.err(directive.no, 1, format!("`{missing}` lies on neither side")));
        }
        Ok(Body::Glue {
            hub: hub.to_string(),
            left: Box::new(left),
            right: Box::new(right),
        })
    }
}
