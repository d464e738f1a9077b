//! Text descriptors for sets, elements, sequences, operators and schedules.
//!
//! Every value printed by this crate parses back to an equivalent value.
//! Errors carry the 1-based column and a caret line under the input.

use crate::density::{IndexSet, Rational, Schedule, Target};
use crate::error::{Error, Result};
use crate::operators::{DiagonalRule, FunctionalSpec, Mapping, OperatorSpec, SequenceTransform, WeightRule};
use crate::sequences::{self, Magnitude, SequenceSpec};
use crate::spaces::{Space, SpaceElement};

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Self { src, pos: 0 }
    }

    fn error_at(&self, pos: usize, message: impl Into<String>) -> Error {
        let column = self.src[..pos.min(self.src.len())].chars().count() + 1;
        Error::Parse {
            column,
            message: message.into(),
            input: self.src.to_string(),
            caret: format!("{}^", " ".repeat(column - 1)),
        }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        self.error_at(self.pos, message)
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            let found = self.peek().map_or("end of input".to_string(), |f| format!("`{f}`"));
            Err(self.error(format!("expected `{c}`, found {found}")))
        }
    }

    fn ident(&mut self) -> Result<(usize, &'a str)> {
        self.skip_ws();
        let start = self.pos;
        let len = self.rest().find(|c: char| !(c.is_ascii_alphanumeric() || c == '_')).unwrap_or(self.rest().len());
        if len == 0 {
            return Err(self.error("expected a name"));
        }
        self.pos += len;
        Ok((start, &self.src[start..start + len]))
    }

    fn keyword(&mut self, word: &str) -> Result<()> {
        let (start, w) = self.ident()?;
        if w == word {
            Ok(())
        } else {
            Err(self.error_at(start, format!("expected `{word}`, found `{w}`")))
        }
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        let len = self
            .rest()
            .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E')))
            .unwrap_or(self.rest().len());
        let text = &self.src[start..start + len];
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => {
                self.pos += len;
                Ok(v)
            }
            _ => Err(self.error_at(start, if text.is_empty() { "expected a number".into() } else { format!("invalid number `{text}`") })),
        }
    }

    fn integer(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        let len = self.rest().find(|c: char| !c.is_ascii_digit()).unwrap_or(self.rest().len());
        if len == 0 {
            return Err(self.error("expected a nonnegative integer"));
        }
        self.pos += len;
        self.src[start..start + len].parse().map_err(|_| self.error_at(start, "integer out of range"))
    }

    fn finish(&mut self) -> Result<()> {
        self.skip_ws();
        if self.pos < self.src.len() {
            Err(self.error("unexpected trailing input"))
        } else {
            Ok(())
        }
    }

    /// Wraps a constructor error so it points at `start`.
    fn at<T>(&self, start: usize, r: Result<T>) -> Result<T> {
        r.map_err(|e| match e {
            e @ Error::Parse { .. } => e,
            other => self.error_at(start, other.to_string()),
        })
    }

    fn set(&mut self) -> Result<IndexSet> {
        let (start, name) = self.ident()?;
        match name {
            "primes" => Ok(IndexSet::primes()),
            "squares" => Ok(IndexSet::squares()),
            "multiples" => {
                self.expect('(')?;
                let m = self.integer()?;
                self.expect(')')?;
                self.at(start, IndexSet::multiples(m))
            }
            "finite" => {
                self.expect('(')?;
                let mut items = Vec::new();
                if !self.eat(')') {
                    loop {
                        items.push(self.integer()?);
                        if self.eat(')') {
                            break;
                        }
                        self.expect(',')?;
                    }
                }
                self.at(start, IndexSet::finite(items))
            }
            "complement" => {
                self.expect('(')?;
                let a = self.set()?;
                self.expect(')')?;
                Ok(IndexSet::complement(a))
            }
            "union" | "intersection" => {
                self.expect('(')?;
                let a = self.set()?;
                self.expect(',')?;
                let b = self.set()?;
                self.expect(')')?;
                Ok(if name == "union" { IndexSet::union(a, b) } else { IndexSet::intersection(a, b) })
            }
            other => Err(self.error_at(start, format!("unknown set `{other}`"))),
        }
    }

    fn number_list(&mut self, open: char, close: char) -> Result<Vec<f64>> {
        self.expect(open)?;
        let mut out = Vec::new();
        if self.eat(close) {
            return Ok(out);
        }
        loop {
            out.push(self.number()?);
            if self.eat(close) {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }

    fn element(&mut self) -> Result<SpaceElement> {
        let (start, name) = self.ident()?;
        match name {
            "dense" => {
                let coords = self.number_list('[', ']')?;
                self.at(start, SpaceElement::dense(coords))
            }
            "sparse" => {
                self.expect('{')?;
                let mut pairs = Vec::new();
                if !self.eat('}') {
                    loop {
                        let k = self.integer()?;
                        self.expect(':')?;
                        pairs.push((k, self.number()?));
                        if self.eat('}') {
                            break;
                        }
                        self.expect(',')?;
                    }
                }
                self.at(start, SpaceElement::sparse(pairs))
            }
            other => Err(self.error_at(start, format!("expected `dense[...]` or `sparse{{...}}`, found `{other}`"))),
        }
    }

    fn space(&mut self) -> Result<Space> {
        let (start, name) = self.ident()?;
        match name {
            "sparse" => Ok(Space::Sparse),
            "dim" => {
                self.expect('=')?;
                let p = self.pos;
                let d = self.integer()?;
                if d == 0 {
                    return Err(self.error_at(p, "dimension must be at least 1"));
                }
                Ok(Space::Dense(d as usize))
            }
            other => Err(self.error_at(start, format!("expected `sparse` or `dim=N`, found `{other}`"))),
        }
    }

    fn sequence(&mut self) -> Result<SequenceSpec> {
        let (start, name) = self.ident()?;
        match name {
            "harmonic" => Ok(sequences::harmonic_prefix_sequence()),
            "unit_coords" => Ok(sequences::unit_coords()),
            "prime_coords" => Ok(sequences::prime_coords()),
            "linear" => Ok(sequences::linear()),
            "alternating" => Ok(sequences::alternating()),
            "zero" => {
                self.expect('(')?;
                let s = self.space()?;
                self.expect(')')?;
                Ok(sequences::zero(s))
            }
            "const" => {
                self.expect('(')?;
                let v = self.element()?;
                self.expect(')')?;
                Ok(sequences::constant(v))
            }
            "decay" => {
                self.expect('(')?;
                let s = self.sequence()?;
                self.expect(')')?;
                Ok(sequences::decay(&s))
            }
            "spike" => {
                self.expect('(')?;
                let set = self.set()?;
                self.expect(',')?;
                let mag = if self.peek() == Some('n') {
                    self.keyword("n")?;
                    Magnitude::Index
                } else {
                    Magnitude::Constant(self.number()?)
                };
                let base = if self.eat(',') { self.sequence()? } else { sequences::zero(Space::Dense(1)) };
                self.expect(')')?;
                Ok(sequences::spike_sequence(&base, set, mag))
            }
            "subseq" => {
                self.expect('(')?;
                let s = self.sequence()?;
                self.expect(',')?;
                let set = self.set()?;
                self.expect(')')?;
                Ok(sequences::subsequence(&s, set, sequences::DEFAULT_SUBSEQUENCE_CAP))
            }
            "combine" => {
                self.expect('(')?;
                let a = self.sequence()?;
                self.expect(',')?;
                let b = self.sequence()?;
                self.expect(',')?;
                let alpha = self.number()?;
                self.expect(',')?;
                let beta = self.number()?;
                self.expect(')')?;
                self.at(start, sequences::combine(&a, &b, alpha, beta))
            }
            "random" => {
                self.expect('(')?;
                let s = self.space()?;
                self.expect(',')?;
                self.keyword("seed")?;
                self.expect('=')?;
                let seed = self.integer()?;
                self.expect(')')?;
                Ok(sequences::random_unit_ball(s, seed))
            }
            "apply" => {
                self.expect('(')?;
                let m = self.mapping()?;
                self.expect(',')?;
                let s = self.sequence()?;
                self.expect(')')?;
                self.at(start, crate::operators::image_sequence(&m, &s))
            }
            other => Err(self.error_at(start, format!("unknown sequence `{other}`"))),
        }
    }

    fn functional(&mut self) -> Result<FunctionalSpec> {
        let (start, name) = self.ident()?;
        match name {
            "coord" => {
                self.expect('(')?;
                let j = self.integer()?;
                self.expect(')')?;
                self.at(start, FunctionalSpec::coordinate(j))
            }
            "weights" => {
                let w = self.number_list('[', ']')?;
                if w.is_empty() {
                    return Err(self.error_at(start, "weights need at least one entry"));
                }
                Ok(FunctionalSpec::DenseWeights(w))
            }
            "weighted" => {
                self.expect('(')?;
                let (p, rule) = self.ident()?;
                let rule = match rule {
                    "index" => WeightRule::Index,
                    "inverse_square" => WeightRule::InverseSquare,
                    other => return Err(self.error_at(p, format!("unknown weight rule `{other}`"))),
                };
                self.expect(')')?;
                Ok(FunctionalSpec::weighted(rule))
            }
            other => Err(self.error_at(start, format!("unknown functional `{other}`"))),
        }
    }

    fn rank_one_term(&mut self) -> Result<(FunctionalSpec, SpaceElement, Space)> {
        self.expect('(')?;
        let f = self.functional()?;
        self.expect(',')?;
        let y0 = self.element()?;
        let domain = if self.eat(',') { self.space()? } else { y0.space() };
        self.expect(')')?;
        Ok((f, y0, domain))
    }

    fn operator(&mut self) -> Result<OperatorSpec> {
        let (start, name) = self.ident()?;
        match name {
            "diag" => {
                self.expect('(')?;
                let (p, rule) = self.ident()?;
                let rule = match rule {
                    "prime_scale" => DiagonalRule::PrimeScale,
                    "reciprocal" => DiagonalRule::Reciprocal,
                    "identity" => DiagonalRule::Identity,
                    "const" => {
                        self.expect('(')?;
                        let c = self.number()?;
                        self.expect(')')?;
                        DiagonalRule::Constant(c)
                    }
                    other => return Err(self.error_at(p, format!("unknown diagonal rule `{other}`"))),
                };
                let space = if self.eat(',') { self.space()? } else { Space::Sparse };
                self.expect(')')?;
                Ok(OperatorSpec::diagonal(rule, space))
            }
            "rank1" => {
                let (f, y0, domain) = self.rank_one_term()?;
                self.at(start, OperatorSpec::rank_one(f, y0, domain))
            }
            "finite_rank" => {
                self.expect('(')?;
                let mut terms = Vec::new();
                let mut domain = None;
                loop {
                    let p = self.pos;
                    self.keyword("rank1")?;
                    let (f, y, d) = self.rank_one_term()?;
                    if domain.is_some_and(|prev| prev != d) {
                        return Err(self.error_at(p, "finite_rank terms must share a domain"));
                    }
                    domain = Some(d);
                    terms.push((f, y));
                    if self.eat(')') {
                        break;
                    }
                    self.expect(',')?;
                }
                self.at(start, OperatorSpec::finite_rank(terms, domain.expect("at least one term")))
            }
            "matrix" => {
                self.expect('[')?;
                let mut rows = Vec::new();
                loop {
                    rows.push(self.number_list('[', ']')?);
                    if self.eat(']') {
                        break;
                    }
                    self.expect(',')?;
                }
                self.at(start, OperatorSpec::matrix(rows))
            }
            "compose" => {
                self.expect('(')?;
                let a = self.operator()?;
                self.expect(',')?;
                let b = self.operator()?;
                self.expect(')')?;
                self.at(start, OperatorSpec::compose(a, b))
            }
            "combo" => {
                self.expect('(')?;
                let alpha = self.number()?;
                self.expect(',')?;
                let s = self.operator()?;
                self.expect(',')?;
                let beta = self.number()?;
                self.expect(',')?;
                let t = self.operator()?;
                self.expect(')')?;
                self.at(start, OperatorSpec::linear_combo(alpha, s, beta, t))
            }
            other => Err(self.error_at(start, format!("unknown operator `{other}`"))),
        }
    }

    fn mapping(&mut self) -> Result<Mapping> {
        let save = self.pos;
        let (_, name) = self.ident()?;
        if name == "transform" {
            self.expect('(')?;
            let (p, rule) = self.ident()?;
            if rule != "prime_scale_by_position" {
                return Err(self.error_at(p, format!("unknown transform `{rule}`")));
            }
            self.expect(')')?;
            return Ok(SequenceTransform::prime_scale_by_position().into());
        }
        self.pos = save;
        Ok(Mapping::Operator(self.operator()?))
    }

    fn schedule(&mut self) -> Result<Schedule> {
        let (start, name) = self.ident()?;
        self.expect('(')?;
        let p = self.pos;
        let k = self.integer()?;
        self.expect(')')?;
        match name {
            "geometric" if k >= 2 => Ok(Schedule::Geometric { base: k }),
            "geometric" => Err(self.error_at(p, "geometric base must be at least 2")),
            "linear" if k >= 1 => Ok(Schedule::Linear { step: k }),
            "linear" => Err(self.error_at(p, "linear step must be at least 1")),
            other => Err(self.error_at(start, format!("unknown schedule `{other}`"))),
        }
    }
}

impl Parser<'_> {
    fn target(&mut self) -> Result<Target> {
        self.skip_ws();
        let start = self.pos;
        if self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
            let (p, name) = self.ident()?;
            return match name {
                "zero" => Ok(Target::Zero),
                other => Err(self.error_at(p, format!("unknown target `{other}`"))),
            };
        }
        let num = self.integer()?;
        let den = if self.eat('/') { self.integer()? } else { 1 };
        if den == 0 || num > den {
            return Err(self.error_at(start, "target must be a fraction p/q in [0, 1]"));
        }
        Ok(if num == 0 { Target::Zero } else { Target::Ratio(Rational::new(num, den)) })
    }
}

fn whole<'a, T>(src: &'a str, f: impl FnOnce(&mut Parser<'a>) -> Result<T>) -> Result<T> {
    let mut p = Parser::new(src);
    let v = f(&mut p)?;
    p.finish()?;
    Ok(v)
}

pub fn parse_set(src: &str) -> Result<IndexSet> {
    whole(src, Parser::set)
}

pub fn parse_element(src: &str) -> Result<SpaceElement> {
    whole(src, Parser::element)
}

pub fn parse_space(src: &str) -> Result<Space> {
    whole(src, Parser::space)
}

pub fn parse_sequence(src: &str) -> Result<SequenceSpec> {
    whole(src, Parser::sequence)
}

pub fn parse_functional(src: &str) -> Result<FunctionalSpec> {
    whole(src, Parser::functional)
}

pub fn parse_operator(src: &str) -> Result<OperatorSpec> {
    whole(src, Parser::operator)
}

/// An operator or a sequence transform.
pub fn parse_mapping(src: &str) -> Result<Mapping> {
    whole(src, Parser::mapping)
}

pub fn parse_schedule(src: &str) -> Result<Schedule> {
    whole(src, Parser::schedule)
}

/// `zero` or an exact fraction `p/q`.
pub fn parse_target(src: &str) -> Result<Target> {
    whole(src, Parser::target)
}

/// Comma-separated numbers, e.g. an ε-grid `0.5,0.1,0.01`.
pub fn parse_number_list(src: &str) -> Result<Vec<f64>> {
    whole(src, |p| {
        let mut out = vec![p.number()?];
        while p.eat(',') {
            out.push(p.number()?);
        }
        Ok(out)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sets_round_trip() {
        for s in ["primes", "multiples(3)", "squares", "finite(1,2,3)", "complement(union(primes, squares))", "intersection(multiples(2), complement(finite()))"] {
            assert_eq!(parse_set(s).unwrap().to_string(), s);
        }
        assert_eq!(parse_set(" union( primes ,squares ) ").unwrap().to_string(), "union(primes, squares)");
    }

    #[test]
    fn elements_round_trip() {
        for s in ["dense[1,0.5]", "sparse{1:1, 3:0.25}", "sparse{}", "dense[-2.5,1e-7]"] {
            let e = parse_element(s).unwrap();
            assert_eq!(parse_element(&e.to_string()).unwrap(), e);
        }
        assert_eq!(parse_element("sparse{2:0}").unwrap(), SpaceElement::zero(Space::Sparse));
    }

    #[test]
    fn sequences_round_trip() {
        let srcs = [
            "harmonic",
            "spike(squares, n)",
            "spike(primes, 2.5, zero(sparse))",
            "unit_coords",
            "prime_coords",
            "random(dim=3, seed=7)",
            "random(sparse, seed=1)",
            "combine(harmonic, harmonic, 1, -1)",
            "subseq(linear, multiples(2))",
            "decay(const(dense[1,2]))",
            "apply(diag(prime_scale), unit_coords)",
            "apply(transform(prime_scale_by_position), harmonic)",
        ];
        for s in srcs {
            let seq = parse_sequence(s).unwrap();
            assert_eq!(seq.label(), s);
            let again = parse_sequence(seq.label()).unwrap();
            for n in [1, 2, 5, 49] {
                assert_eq!(seq.element(n).unwrap(), again.element(n).unwrap(), "{s} at {n}");
            }
        }
    }

    #[test]
    fn operators_round_trip() {
        let srcs = [
            "diag(prime_scale)",
            "diag(const(2), dim=3)",
            "rank1(coord(1), sparse{1:1})",
            "rank1(weights[1,-1], dense[0.5], dim=2)",
            "rank1(weighted(index), sparse{1:1})",
            "finite_rank(rank1(coord(1), sparse{1:1}), rank1(coord(2), sparse{2:0.5}))",
            "matrix[[2,0],[0,3]]",
            "compose(diag(reciprocal), diag(prime_scale))",
            "combo(1, diag(identity), -1, diag(reciprocal))",
        ];
        for s in srcs {
            assert_eq!(parse_operator(s).unwrap().to_string(), s);
        }
        assert_eq!(parse_mapping("transform(prime_scale_by_position)").unwrap().to_string(), "transform(prime_scale_by_position)");
    }

    #[test]
    fn errors_point_at_the_problem() {
        let Err(Error::Parse { column, caret, .. }) = parse_set("union(primes, cubes)") else { panic!() };
        assert_eq!(column, 15);
        assert_eq!(caret, "              ^");
        let Err(Error::Parse { column, message, .. }) = parse_set("multiples(0)") else { panic!() };
        assert_eq!(column, 1);
        assert!(message.contains("multiples"), "{message}");
        assert!(matches!(parse_sequence("harmonic extra"), Err(Error::Parse { column: 10, .. })));
        assert!(matches!(parse_element("dense[1,"), Err(Error::Parse { column: 9, .. })));
        assert!(parse_operator("compose(matrix[[1,2]], matrix[[1,2]])").is_err());
    }

    #[test]
    fn schedules_and_lists() {
        assert_eq!(parse_schedule("geometric(10)").unwrap(), Schedule::Geometric { base: 10 });
        assert_eq!(parse_schedule("linear(3)").unwrap(), Schedule::Linear { step: 3 });
        assert!(parse_schedule("geometric(1)").is_err());
        assert_eq!(parse_number_list("0.5, 0.1,0.01").unwrap(), vec![0.5, 0.1, 0.01]);
    }
}
