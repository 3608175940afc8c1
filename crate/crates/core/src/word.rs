//! Exact algebra of the genus-g surface group presentation.
//!
//! The group is presented on generators `a1, b1, ..., ag, bg` with the single
//! relator `R_g = [a1, b1] ... [ag, bg]`, where `[a, b] = a b a⁻¹ b⁻¹`. This
//! module works in the free group on those generators: words are kept freely
//! reduced, group-ring elements are integer combinations of reduced words, and
//! Fox derivatives are computed letter by letter with the product rule.
//!
//! Textual syntax for words is whitespace separated, lower case for a
//! generator and upper case for its inverse: `a1 b1 A1 B1`. The empty word is
//! printed as `1`.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use crate::error::{Error, Result};

/// One of the standard generators `a_k` or `b_k`, with 1-based handle index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Generator {
    A(usize),
    B(usize),
}

impl Generator {
    pub fn handle(self) -> usize {
        match self {
            Generator::A(k) | Generator::B(k) => k,
        }
    }

    /// Position in the flattened generator order `a1, b1, a2, b2, ...`.
    pub fn slot(self) -> usize {
        match self {
            Generator::A(k) => 2 * (k - 1),
            Generator::B(k) => 2 * (k - 1) + 1,
        }
    }

    pub fn from_slot(slot: usize) -> Generator {
        let k = slot / 2 + 1;
        if slot % 2 == 0 {
            Generator::A(k)
        } else {
            Generator::B(k)
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::A(k) => write!(f, "a{k}"),
            Generator::B(k) => write!(f, "b{k}"),
        }
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letter = Letter::from_str(s)?;
        if letter.inverse {
            return Err(Error::InvalidInput(format!("expected a generator, found inverse {s}")));
        }
        Ok(letter.generator)
    }
}

/// A generator or its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    pub generator: Generator,
    pub inverse: bool,
}

impl Letter {
    pub fn new(generator: Generator) -> Self {
        Letter { generator, inverse: false }
    }

    pub fn inv(generator: Generator) -> Self {
        Letter { generator, inverse: true }
    }

    pub fn inverted(self) -> Self {
        Letter { generator: self.generator, inverse: !self.inverse }
    }
}

impl FromStr for Letter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.chars();
        let head = chars.next().ok_or_else(|| Error::UnknownGenerator(s.to_string()))?;
        let handle: usize = chars
            .as_str()
            .parse()
            .map_err(|_| Error::UnknownGenerator(s.to_string()))?;
        if handle == 0 {
            return Err(Error::UnknownGenerator(s.to_string()));
        }
        let (generator, inverse) = match head {
            'a' => (Generator::A(handle), false),
            'b' => (Generator::B(handle), false),
            'A' => (Generator::A(handle), true),
            'B' => (Generator::B(handle), true),
            _ => return Err(Error::UnknownGenerator(s.to_string())),
        };
        Ok(Letter { generator, inverse })
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.generator, self.inverse) {
            (Generator::A(k), false) => write!(f, "a{k}"),
            (Generator::B(k), false) => write!(f, "b{k}"),
            (Generator::A(k), true) => write!(f, "A{k}"),
            (Generator::B(k), true) => write!(f, "B{k}"),
        }
    }
}

/// A freely reduced word, stored as runs of a generator raised to a nonzero
/// exponent. Adjacent runs always carry different generators.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    runs: Vec<(Generator, i32)>,
}

impl Word {
    pub fn empty() -> Self {
        Word { runs: Vec::new() }
    }

    pub fn generator(g: Generator) -> Self {
        Word { runs: vec![(g, 1)] }
    }

    pub fn generator_inverse(g: Generator) -> Self {
        Word { runs: vec![(g, -1)] }
    }

    /// Freely reduces an arbitrary letter sequence.
    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut w = Word::empty();
        for l in letters {
            w.push(l);
        }
        w
    }

    fn push(&mut self, letter: Letter) {
        let step = if letter.inverse { -1 } else { 1 };
        match self.runs.last_mut() {
            Some((g, e)) if *g == letter.generator => {
                *e += step;
                if *e == 0 {
                    self.runs.pop();
                }
            }
            _ => self.runs.push((letter.generator, step)),
        }
    }

    pub fn runs(&self) -> &[(Generator, i32)] {
        &self.runs
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        self.runs.iter().flat_map(|&(g, e)| {
            let letter = Letter { generator: g, inverse: e < 0 };
            std::iter::repeat_n(letter, e.unsigned_abs() as usize)
        })
    }

    pub fn len(&self) -> usize {
        self.runs.iter().map(|(_, e)| e.unsigned_abs() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word { runs: self.runs.iter().rev().map(|&(g, e)| (g, -e)).collect() }
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut w = self.clone();
        for &(g, e) in &other.runs {
            match w.runs.last_mut() {
                Some((h, f)) if *h == g => {
                    *f += e;
                    if *f == 0 {
                        w.runs.pop();
                    }
                }
                _ => w.runs.push((g, e)),
            }
        }
        w
    }

    /// `self · other · self⁻¹ · other⁻¹`.
    pub fn commutator(&self, other: &Word) -> Word {
        self.concat(other).concat(&self.inverse()).concat(&other.inverse())
    }

    /// Largest handle index appearing in the word (0 for the empty word).
    pub fn max_handle(&self) -> usize {
        self.runs.iter().map(|(g, _)| g.handle()).max().unwrap_or(0)
    }
}

impl Mul for &Word {
    type Output = Word;

    fn mul(self, rhs: &Word) -> Word {
        self.concat(rhs)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        for l in self.letters() {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Finite integer combination of reduced words.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroupRingElement {
    terms: BTreeMap<Word, i64>,
}

impl GroupRingElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_word(Word::empty())
    }

    pub fn from_word(w: Word) -> Self {
        Self::term(1, w)
    }

    pub fn term(coefficient: i64, w: Word) -> Self {
        let mut e = Self::zero();
        e.add_term(coefficient, w);
        e
    }

    pub fn add_term(&mut self, coefficient: i64, w: Word) {
        if coefficient == 0 {
            return;
        }
        match self.terms.entry(w) {
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += coefficient;
                if *slot.get() == 0 {
                    slot.remove();
                }
            }
            Entry::Vacant(slot) => {
                slot.insert(coefficient);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, i64)> {
        self.terms.iter().map(|(w, &c)| (w, c))
    }

    pub fn coefficient(&self, w: &Word) -> i64 {
        self.terms.get(w).copied().unwrap_or(0)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// The anti-involution `#`, sending each word to its inverse.
    pub fn anti_involution(&self) -> Self {
        let mut out = Self::zero();
        for (w, c) in self.terms() {
            out.add_term(c, w.inverse());
        }
        out
    }

    /// Sum of coefficients.
    pub fn augmentation(&self) -> i64 {
        self.terms.values().sum()
    }

    pub fn scale(&self, k: i64) -> Self {
        let mut out = Self::zero();
        for (w, c) in self.terms() {
            out.add_term(k * c, w.clone());
        }
        out
    }

    pub fn left_mul_word(&self, w: &Word) -> Self {
        let mut out = Self::zero();
        for (v, c) in self.terms() {
            out.add_term(c, w.concat(v));
        }
        out
    }

    pub fn right_mul_word(&self, w: &Word) -> Self {
        let mut out = Self::zero();
        for (v, c) in self.terms() {
            out.add_term(c, v.concat(w));
        }
        out
    }
}

impl Add for &GroupRingElement {
    type Output = GroupRingElement;

    fn add(self, rhs: &GroupRingElement) -> GroupRingElement {
        let mut out = self.clone();
        for (w, c) in rhs.terms() {
            out.add_term(c, w.clone());
        }
        out
    }
}

impl Sub for &GroupRingElement {
    type Output = GroupRingElement;

    fn sub(self, rhs: &GroupRingElement) -> GroupRingElement {
        let mut out = self.clone();
        for (w, c) in rhs.terms() {
            out.add_term(-c, w.clone());
        }
        out
    }
}

impl Neg for &GroupRingElement {
    type Output = GroupRingElement;

    fn neg(self) -> GroupRingElement {
        self.scale(-1)
    }
}

impl Mul for &GroupRingElement {
    type Output = GroupRingElement;

    fn mul(self, rhs: &GroupRingElement) -> GroupRingElement {
        let mut out = GroupRingElement::zero();
        for (u, c) in self.terms() {
            for (v, d) in rhs.terms() {
                out.add_term(c * d, u.concat(v));
            }
        }
        out
    }
}

impl fmt::Display for GroupRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (w, c)) in self.terms().enumerate() {
            let sign = if c < 0 { "-" } else if i > 0 { "+" } else { "" };
            if i > 0 {
                write!(f, " ")?;
            }
            let mag = c.abs();
            if mag == 1 {
                write!(f, "{sign}({w})")?;
            } else {
                write!(f, "{sign}{mag}({w})")?;
            }
        }
        Ok(())
    }
}

/// Fox derivative `∂w/∂x` in the free group ring, by the letter rule
/// `∂x/∂x = 1`, `∂x⁻¹/∂x = −x⁻¹` and `∂(uv)/∂x = ∂u/∂x + u ∂v/∂x`.
pub fn fox_derivative(w: &Word, x: Generator) -> GroupRingElement {
    let mut out = GroupRingElement::zero();
    let mut prefix = Word::empty();
    for letter in w.letters() {
        if letter.generator == x {
            if letter.inverse {
                out.add_term(-1, prefix.concat(&Word::generator_inverse(x)));
            } else {
                out.add_term(1, prefix.clone());
            }
        }
        prefix.push(letter);
    }
    out
}

/// The formal 2-chain of (group-ring coefficient, generator) pairs that
/// represents the fundamental class of the surface.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoCycle {
    pub terms: Vec<(GroupRingElement, Generator)>,
}

impl TwoCycle {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// The standard one-relator presentation of the genus-g surface group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Presentation {
    genus: usize,
}

impl Presentation {
    pub fn new(genus: usize) -> Result<Self> {
        if genus == 0 {
            return Err(Error::InvalidInput("genus must be at least 1".into()));
        }
        Ok(Presentation { genus })
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn num_generators(&self) -> usize {
        2 * self.genus
    }

    /// Generators in slot order `a1, b1, ..., ag, bg`.
    pub fn generators(&self) -> impl Iterator<Item = Generator> {
        (0..2 * self.genus).map(Generator::from_slot)
    }

    pub fn check_generator(&self, g: Generator) -> Result<()> {
        let k = g.handle();
        if k == 0 || k > self.genus {
            return Err(Error::UnknownGenerator(format!("{g} (genus {})", self.genus)));
        }
        Ok(())
    }

    /// Validates the letters and returns the freely reduced word.
    pub fn reduce(&self, letters: &[Letter]) -> Result<Word> {
        for l in letters {
            self.check_generator(l.generator)?;
        }
        Ok(Word::from_letters(letters.iter().copied()))
    }

    /// Parses the whitespace separated letter syntax. `1` denotes the identity.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let letters = text
            .split_whitespace()
            .filter(|t| *t != "1")
            .map(Letter::from_str)
            .collect::<Result<Vec<_>>>()?;
        self.reduce(&letters)
    }

    /// `R_k = [a1,b1] ... [ak,bk]`; `R_0` is the empty word.
    pub fn relator(&self, k: usize) -> Result<Word> {
        if k > self.genus {
            return Err(Error::InvalidInput(format!(
                "relator index {k} outside 0..={}",
                self.genus
            )));
        }
        let mut w = Word::empty();
        for i in 1..=k {
            let a = Word::generator(Generator::A(i));
            let b = Word::generator(Generator::B(i));
            w = w.concat(&a.commutator(&b));
        }
        Ok(w)
    }

    pub fn full_relator(&self) -> Word {
        self.relator(self.genus).expect("k = genus is in range")
    }

    /// `∂R/∂x` of the full relator via the letter rule.
    pub fn fox_derivative(&self, x: Generator) -> Result<GroupRingElement> {
        self.check_generator(x)?;
        Ok(fox_derivative(&self.full_relator(), x))
    }

    /// The closed forms `∂R/∂a_k = R_{k−1} − R_k b_k` and
    /// `∂R/∂b_k = R_{k−1} a_k − R_k`.
    pub fn fox_derivative_closed_form(&self, x: Generator) -> Result<GroupRingElement> {
        self.check_generator(x)?;
        let k = x.handle();
        let prev = self.relator(k - 1)?;
        let cur = self.relator(k)?;
        let mut e = GroupRingElement::zero();
        match x {
            Generator::A(_) => {
                e.add_term(1, prev);
                e.add_term(-1, cur.concat(&Word::generator(Generator::B(k))));
            }
            Generator::B(_) => {
                e.add_term(1, prev.concat(&Word::generator(Generator::A(k))));
                e.add_term(-1, cur);
            }
        }
        Ok(e)
    }

    /// Dual generator pair `(α_k, β_k)` with `α_k = R_{k−1} b_k⁻¹ R_k⁻¹` and
    /// `β_k = R_k a_k⁻¹ R_{k−1}⁻¹`.
    pub fn dual_pair(&self, k: usize) -> Result<(Word, Word)> {
        if k == 0 || k > self.genus {
            return Err(Error::InvalidInput(format!("handle {k} outside 1..={}", self.genus)));
        }
        let prev = self.relator(k - 1)?;
        let cur = self.relator(k)?;
        let alpha = prev
            .concat(&Word::generator_inverse(Generator::B(k)))
            .concat(&cur.inverse());
        let beta = cur
            .concat(&Word::generator_inverse(Generator::A(k)))
            .concat(&prev.inverse());
        Ok((alpha, beta))
    }

    /// All dual generators in the order `α1, β1, ..., αg, βg`.
    pub fn dual_generators(&self) -> Vec<Word> {
        (1..=self.genus)
            .flat_map(|k| {
                let (a, b) = self.dual_pair(k).expect("handle in range");
                [a, b]
            })
            .collect()
    }

    /// `𝓡_k = [α1,β1] ... [αk,βk]`, which reduces to `R_k⁻¹`.
    pub fn dual_relator(&self, k: usize) -> Result<Word> {
        if k > self.genus {
            return Err(Error::InvalidInput(format!(
                "relator index {k} outside 0..={}",
                self.genus
            )));
        }
        let mut w = Word::empty();
        for i in 1..=k {
            let (a, b) = self.dual_pair(i)?;
            w = w.concat(&a.commutator(&b));
        }
        Ok(w)
    }

    /// `c = Σ_k (∂R/∂a_k, a_k) + (∂R/∂b_k, b_k)`.
    pub fn fundamental_two_cycle(&self) -> TwoCycle {
        let r = self.full_relator();
        TwoCycle {
            terms: self.generators().map(|x| (fox_derivative(&r, x), x)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(g: usize) -> Presentation {
        Presentation::new(g).unwrap()
    }

    #[test]
    fn cancels_inverse_pairs() {
        let pr = p(2);
        assert!(pr.parse_word("a1 A1").unwrap().is_empty());
        assert_eq!(pr.parse_word("a1 b1 B1 a2").unwrap().to_string(), "a1 a2");
        let w = pr.relator(1).unwrap().concat(&Word::generator(Generator::B(1)));
        assert_eq!(w.to_string(), "a1 b1 A1");
    }

    #[test]
    fn rejects_unknown_generators() {
        let pr = p(2);
        assert!(matches!(pr.parse_word("a3"), Err(Error::UnknownGenerator(_))));
        assert!(matches!(pr.parse_word("c1"), Err(Error::UnknownGenerator(_))));
        assert!(matches!(pr.parse_word("a0"), Err(Error::UnknownGenerator(_))));
        assert!(pr.fox_derivative(Generator::B(3)).is_err());
    }

    #[test]
    fn relators() {
        let pr = p(2);
        assert!(pr.relator(0).unwrap().is_empty());
        assert_eq!(pr.relator(1).unwrap().to_string(), "a1 b1 A1 B1");
        assert_eq!(pr.relator(2).unwrap().to_string(), "a1 b1 A1 B1 a2 b2 A2 B2");
        assert!(pr.relator(3).is_err());
    }

    #[test]
    fn fox_derivatives_of_relator() {
        let pr = p(2);
        let da1 = pr.fox_derivative(Generator::A(1)).unwrap();
        let mut expected = GroupRingElement::one();
        expected.add_term(-1, pr.parse_word("a1 b1 A1").unwrap());
        assert_eq!(da1, expected);

        let db1 = pr.fox_derivative(Generator::B(1)).unwrap();
        let mut expected = GroupRingElement::from_word(pr.parse_word("a1").unwrap());
        expected.add_term(-1, pr.parse_word("a1 b1 A1 B1").unwrap());
        assert_eq!(db1, expected);

        // ∂(a1 b1)/∂a1 = 1 + a1·0
        let uv = pr.parse_word("a1 b1").unwrap();
        assert_eq!(fox_derivative(&uv, Generator::A(1)), GroupRingElement::one());
    }

    #[test]
    fn letter_rule_matches_closed_form() {
        for g in 1..=4 {
            let pr = p(g);
            for x in pr.generators() {
                assert_eq!(
                    pr.fox_derivative(x).unwrap(),
                    pr.fox_derivative_closed_form(x).unwrap(),
                    "genus {g}, generator {x}"
                );
            }
        }
    }

    #[test]
    fn anti_involution_examples() {
        let pr = p(2);
        let mut e = GroupRingElement::term(2, pr.parse_word("a1 b1").unwrap());
        e.add_term(-1, pr.parse_word("B2").unwrap());
        let mut expected = GroupRingElement::term(2, pr.parse_word("B1 A1").unwrap());
        expected.add_term(-1, pr.parse_word("b2").unwrap());
        assert_eq!(e.anti_involution(), expected);
        assert_eq!(GroupRingElement::one().anti_involution(), GroupRingElement::one());
    }

    #[test]
    fn dual_generators_g2() {
        let pr = p(2);
        let (a1, b1) = pr.dual_pair(1).unwrap();
        assert_eq!(a1.to_string(), "a1 B1 A1");
        assert_eq!(b1.to_string(), "a1 b1 A1 B1 A1");
        // [α1, β1] · R_1 = 1 since R_0 = 1
        assert!(a1.commutator(&b1).concat(&pr.relator(1).unwrap()).is_empty());
        assert_eq!(pr.dual_generators().len(), 4);
    }

    #[test]
    fn dual_identities_all_handles() {
        for g in 1..=3 {
            let pr = p(g);
            for k in 1..=g {
                let (alpha, beta) = pr.dual_pair(k).unwrap();
                let rk = pr.relator(k).unwrap();
                let rk1 = pr.relator(k - 1).unwrap();
                // [α_k, β_k] = R_{k−1} R_k⁻¹
                let lhs = alpha.commutator(&beta);
                assert_eq!(lhs, rk1.concat(&rk.inverse()));
                // 𝓡_k = R_k⁻¹
                assert_eq!(pr.dual_relator(k).unwrap(), rk.inverse());
                // a_k⁻¹ = 𝓡_k β_k 𝓡_{k−1}⁻¹, b_k⁻¹ = 𝓡_{k−1} α_k 𝓡_k⁻¹
                let dk = pr.dual_relator(k).unwrap();
                let dk1 = pr.dual_relator(k - 1).unwrap();
                let a_inv = dk.concat(&beta).concat(&dk1.inverse());
                assert!(Word::generator(Generator::A(k)).concat(&a_inv).is_empty());
                let b_inv = dk1.concat(&alpha).concat(&dk.inverse());
                assert!(Word::generator(Generator::B(k)).concat(&b_inv).is_empty());
            }
            assert!(pr.dual_relator(g).unwrap().concat(&pr.full_relator()).is_empty());
        }
    }

    #[test]
    fn sharp_of_fox_derivatives_in_dual_generators() {
        // #∂R/∂a_k = R_{k−1}⁻¹ − R_{k−1}⁻¹ α_k and #∂R/∂b_k = R_k⁻¹ β_k − R_k⁻¹
        for g in 1..=3 {
            let pr = p(g);
            for k in 1..=g {
                let (alpha, beta) = pr.dual_pair(k).unwrap();
                let rk = pr.relator(k).unwrap().inverse();
                let rk1 = pr.relator(k - 1).unwrap().inverse();
                let mut ea = GroupRingElement::from_word(rk1.clone());
                ea.add_term(-1, rk1.concat(&alpha));
                assert_eq!(pr.fox_derivative(Generator::A(k)).unwrap().anti_involution(), ea);
                let mut eb = GroupRingElement::from_word(rk.concat(&beta));
                eb.add_term(-1, rk);
                assert_eq!(pr.fox_derivative(Generator::B(k)).unwrap().anti_involution(), eb);
            }
        }
    }

    #[test]
    fn two_cycle_shape() {
        let pr = p(2);
        let c = pr.fundamental_two_cycle();
        assert_eq!(c.len(), 4);
        for (e, x) in &c.terms {
            assert_eq!(*e, pr.fox_derivative_closed_form(*x).unwrap());
        }
        assert_eq!(p(3).fundamental_two_cycle().len(), 6);
    }

    #[test]
    fn display_round_trip() {
        let pr = p(3);
        let w = pr.parse_word("a1 b2 B2 A3 A3 b1").unwrap();
        assert_eq!(w.to_string(), "a1 A3 A3 b1");
        assert_eq!(pr.parse_word(&w.to_string()).unwrap(), w);
        assert_eq!(Word::empty().to_string(), "1");
        assert!(pr.parse_word("1").unwrap().is_empty());
    }
}
