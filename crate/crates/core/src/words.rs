//! Words, presentations, desk-scale word problem and automorphisms.
//!
//! Letters are encoded as `2·gen + inverse`, so the derived order on letters
//! is exactly the shortlex letter order a < A < b < B < …

use std::collections::{HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::settings;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Letter(u8);

impl Letter {
    pub fn new(gen: usize, inverse: bool) -> Self {
        Letter((gen as u8) * 2 + inverse as u8)
    }

    pub fn gen(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn inv(self) -> Self {
        Letter(self.0 ^ 1)
    }
}

/// A freely reduced word. Ordered shortlex.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Word(Vec<Letter>);

impl Ord for Word {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    /// Freely reduces the given letters.
    pub fn new(letters: &[Letter]) -> Self {
        free_reduce_letters(letters)
    }

    pub fn generator(gen: usize) -> Self {
        Word(vec![Letter::new(gen, false)])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    /// Free-group product.
    pub fn mul(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        free_reduce_letters(&v)
    }

    pub fn pow(&self, n: i64) -> Word {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut v = Vec::with_capacity(base.len() * n.unsigned_abs() as usize);
        for _ in 0..n.unsigned_abs() {
            v.extend_from_slice(&base.0);
        }
        free_reduce_letters(&v)
    }

    /// Cyclic rotation moving the first `k` letters to the end (no reduction).
    pub fn rotate(&self, k: usize) -> Word {
        if self.0.is_empty() {
            return self.clone();
        }
        let k = k % self.0.len();
        let mut v = self.0[k..].to_vec();
        v.extend_from_slice(&self.0[..k]);
        Word(v)
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.0.len() < 2 || self.0[0] != self.0[self.0.len() - 1].inv()
    }

    /// Shortlex-minimal rotation of a cyclically reduced word.
    pub fn min_rotation(&self) -> Word {
        (0..self.0.len().max(1)).map(|k| self.rotate(k)).min().unwrap_or_default()
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n].to_vec())
    }
}

fn free_reduce_letters(letters: &[Letter]) -> Word {
    let mut out: Vec<Letter> = Vec::with_capacity(letters.len());
    for &l in letters {
        if out.last() == Some(&l.inv()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    Word(out)
}

pub fn free_reduce(w: &[Letter]) -> Word {
    free_reduce_letters(w)
}

/// Splits `w = conjugator · core · conjugator⁻¹` with `core` cyclically reduced.
pub fn cyclic_reduce(w: &Word) -> (Word, Word) {
    let l = &w.0;
    let mut i = 0;
    let mut j = l.len();
    while j > i + 1 && l[i] == l[j - 1].inv() {
        i += 1;
        j -= 1;
    }
    (Word(l[i..j].to_vec()), Word(l[..i].to_vec()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PresentationKind {
    Free(usize),
    NonorientableSurface(usize),
    OrientableSurface(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Presentation {
    pub kind: PresentationKind,
    pub names: Vec<String>,
    pub relators: Vec<Word>,
    /// ±1 per generator.
    pub orientation: Vec<i8>,
}

fn letter_names(n: usize) -> Vec<String> {
    if n <= 26 {
        (0..n).map(|i| ((b'a' + i as u8) as char).to_string()).collect()
    } else {
        (0..n).map(|i| format!("x{}", i + 1)).collect()
    }
}

impl Presentation {
    pub fn free(rank: usize) -> Self {
        Self {
            kind: PresentationKind::Free(rank),
            names: letter_names(rank),
            relators: Vec::new(),
            orientation: vec![1; rank],
        }
    }

    /// ⟨a₁,…,a_k | a₁²a₂²…a_k²⟩.
    pub fn nonorientable(genus: usize) -> Self {
        let rel: Vec<Letter> = (0..genus).flat_map(|g| [Letter::new(g, false); 2]).collect();
        Self {
            kind: PresentationKind::NonorientableSurface(genus),
            names: letter_names(genus),
            relators: vec![Word(rel)],
            orientation: vec![-1; genus],
        }
    }

    /// ⟨a₁,b₁,…,a_g,b_g | [a₁,b₁]⋯[a_g,b_g]⟩.
    pub fn orientable(genus: usize) -> Self {
        let mut rel = Vec::new();
        for g in 0..genus {
            let (x, y) = (2 * g, 2 * g + 1);
            rel.extend([Letter::new(x, false), Letter::new(y, false), Letter::new(x, true), Letter::new(y, true)]);
        }
        Self {
            kind: PresentationKind::OrientableSurface(genus),
            names: letter_names(2 * genus),
            relators: vec![Word(rel)],
            orientation: vec![1; 2 * genus],
        }
    }

    /// Recognizes one of the supported kinds from generator names and relators.
    pub fn from_parts(names: Vec<String>, relators: Vec<Word>) -> Result<Self> {
        let n = names.len();
        let kind = if relators.is_empty() {
            PresentationKind::Free(n)
        } else if relators.len() == 1 && relators[0] == Self::nonorientable(n).relators[0] {
            PresentationKind::NonorientableSurface(n)
        } else if relators.len() == 1 && n % 2 == 0 && relators[0] == Self::orientable(n / 2).relators[0] {
            PresentationKind::OrientableSurface(n / 2)
        } else {
            return Err(Error::Unsupported("presentation is not a free or standard surface presentation".into()));
        };
        let sign = if matches!(kind, PresentationKind::NonorientableSurface(_)) { -1 } else { 1 };
        Ok(Self { kind, names, relators, orientation: vec![sign; n] })
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn generators(&self) -> Vec<Word> {
        (0..self.rank()).map(Word::generator).collect()
    }

    pub fn is_free(&self) -> bool {
        matches!(self.kind, PresentationKind::Free(_))
    }

    pub fn name(&self) -> String {
        match self.kind {
            PresentationKind::Free(n) => format!("free{n}"),
            PresentationKind::NonorientableSurface(k) => format!("nonorientable{k}"),
            PresentationKind::OrientableSurface(g) => format!("orientable{g}"),
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        let num = |prefix: &str| name.strip_prefix(prefix).and_then(|s| s.parse::<usize>().ok());
        if let Some(n) = num("free") {
            if n >= 1 {
                return Ok(Self::free(n));
            }
        }
        if let Some(k) = num("nonorientable") {
            if k >= 3 {
                return Ok(Self::nonorientable(k));
            }
        }
        if let Some(g) = num("orientable") {
            if g >= 2 {
                return Ok(Self::orientable(g));
            }
        }
        Err(Error::Invalid(format!("unknown presentation '{name}'")))
    }

    fn letter_token(&self, tok: &str) -> Result<Letter> {
        let (base, inv) = match tok.strip_suffix("^-1") {
            Some(b) => (b, true),
            None => (tok, false),
        };
        if let Some(g) = self.names.iter().position(|n| n == base) {
            return Ok(Letter::new(g, inv));
        }
        if !inv {
            let lower = base.to_lowercase();
            if lower != base {
                if let Some(g) = self.names.iter().position(|n| *n == lower) {
                    return Ok(Letter::new(g, true));
                }
            }
        }
        Err(Error::Invalid(format!("unknown generator '{tok}'")))
    }

    /// Parses `a b B`, `a b^-1`, or, with single-character names, `abB`.
    /// `1` and the empty string denote the identity.
    pub fn parse_word(&self, s: &str) -> Result<Word> {
        let s = s.trim();
        if s.is_empty() || s == "1" {
            return Ok(Word::identity());
        }
        let single = self.names.iter().all(|n| n.chars().count() == 1);
        let mut letters = Vec::new();
        if single && !s.contains(char::is_whitespace) && !s.contains('^') {
            for ch in s.chars() {
                letters.push(self.letter_token(&ch.to_string())?);
            }
        } else {
            for tok in s.split_whitespace() {
                letters.push(self.letter_token(tok)?);
            }
        }
        Ok(Word::new(&letters))
    }

    pub fn format_word(&self, w: &Word) -> String {
        if w.is_empty() {
            return "1".into();
        }
        let single = self.names.iter().all(|n| n.chars().count() == 1);
        let parts: Vec<String> = w
            .letters()
            .iter()
            .map(|l| {
                let n = &self.names[l.gen()];
                match (l.is_inverse(), single) {
                    (false, _) => n.clone(),
                    (true, true) => n.to_uppercase(),
                    (true, false) => format!("{n}^-1"),
                }
            })
            .collect();
        if single {
            parts.concat()
        } else {
            parts.join(" ")
        }
    }
}

pub fn orientation_class(p: &Presentation, w: &Word) -> i8 {
    w.letters().iter().map(|l| p.orientation[l.gen()]).product()
}

/// Dehn-style rewriting against all cyclic permutations of the relators and their inverses.
#[derive(Clone, Debug)]
pub struct Rewriter {
    /// Pieces grouped by first letter.
    pieces: HashMap<Letter, Vec<Vec<Letter>>>,
}

impl Rewriter {
    pub fn new(p: &Presentation) -> Self {
        let mut all: HashSet<Vec<Letter>> = HashSet::new();
        for r in &p.relators {
            for w in [r.clone(), r.inverse()] {
                for k in 0..w.len() {
                    all.insert(w.rotate(k).0);
                }
            }
        }
        let mut sorted: Vec<Vec<Letter>> = all.into_iter().collect();
        sorted.sort();
        let mut pieces: HashMap<Letter, Vec<Vec<Letter>>> = HashMap::new();
        for r in sorted {
            pieces.entry(r[0]).or_default().push(r);
        }
        Self { pieces }
    }

    pub fn is_trivial(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Matches of relator pieces starting at `w[i]`: (match length, piece).
    fn matches_at<'a>(&'a self, w: &'a [Letter], i: usize) -> impl Iterator<Item = (usize, &'a Vec<Letter>)> + 'a {
        self.pieces.get(&w[i]).into_iter().flatten().map(move |r| {
            let m = r.iter().zip(&w[i..]).take_while(|(x, y)| x == y).count();
            (m, r)
        })
    }

    fn replace(w: &[Letter], i: usize, m: usize, r: &[Letter]) -> Vec<Letter> {
        let mut v = w[..i].to_vec();
        v.extend(r[m..].iter().rev().map(|l| l.inv()));
        v.extend_from_slice(&w[i + m..]);
        v
    }

    /// One length-decreasing replacement, if any subword exceeds half a relator.
    pub fn dehn_step(&self, w: &[Letter]) -> Option<Word> {
        for i in 0..w.len() {
            for (m, r) in self.matches_at(w, i) {
                if 2 * m > r.len() {
                    return Some(free_reduce_letters(&Self::replace(w, i, m, r)));
                }
            }
        }
        None
    }

    /// All length-preserving replacements of exactly half a relator.
    fn half_swaps(&self, w: &[Letter]) -> Vec<Vec<Letter>> {
        let mut out = Vec::new();
        for i in 0..w.len() {
            for (m, r) in self.matches_at(w, i) {
                if r.len() % 2 == 0 && m >= r.len() / 2 {
                    out.push(Self::replace(w, i, r.len() / 2, r));
                }
            }
        }
        out
    }

    /// Shortlex-least geodesic representative of `w`.
    ///
    /// Dehn replacements are applied until none remains; then the class of
    /// words reachable by half-relator swaps is explored, restarting whenever
    /// one of them admits a shortening.
    pub fn normal_form(&self, w: &Word) -> Result<Word> {
        let mut cur = free_reduce_letters(&w.0);
        if self.is_trivial() {
            return Ok(cur);
        }
        'outer: loop {
            while let Some(s) = self.dehn_step(&cur.0) {
                cur = s;
            }
            let mut seen: HashSet<Vec<Letter>> = HashSet::new();
            seen.insert(cur.0.clone());
            let mut queue = VecDeque::from([cur.0.clone()]);
            let mut best = cur.clone();
            while let Some(x) = queue.pop_front() {
                for y in self.half_swaps(&x) {
                    let yr = free_reduce_letters(&y);
                    if yr.len() < x.len() {
                        cur = yr;
                        continue 'outer;
                    }
                    if let Some(s) = self.dehn_step(&y) {
                        cur = s;
                        continue 'outer;
                    }
                    if seen.insert(y.clone()) {
                        if seen.len() > settings::REWRITE_BUDGET {
                            return Err(Error::BudgetExceeded("geodesic rewrite class too large".into()));
                        }
                        let yw = Word(y.clone());
                        if yw < best {
                            best = yw;
                        }
                        queue.push_back(y);
                    }
                }
            }
            return Ok(best);
        }
    }

    /// One shortening of a cyclic word by a piece that wraps around, if any.
    fn cyclic_dehn_step(&self, w: &Word) -> Option<Word> {
        let n = w.len();
        for k in 0..n {
            let rot = w.rotate(k);
            for (m, r) in self.matches_at(&rot.0, 0) {
                if 2 * m > r.len() {
                    let v = Self::replace(&rot.0, 0, m, r);
                    return Some(cyclic_reduce(&free_reduce_letters(&v)).0);
                }
            }
        }
        None
    }

    /// Canonical representative of the conjugacy class of `w` (optionally
    /// identified with its inverse): a shortest cyclic word, minimized over
    /// rotations and half-relator swaps.
    pub fn cyclic_canonical(&self, w: &Word, with_inverse: bool) -> Result<Word> {
        let mut cur = cyclic_reduce(&free_reduce_letters(&w.0)).0;
        'outer: loop {
            if cur.is_empty() {
                return Ok(cur);
            }
            if let Some(s) = self.cyclic_dehn_step(&cur) {
                cur = s;
                continue;
            }
            for k in 0..cur.len() {
                let nf = self.normal_form(&cur.rotate(k))?;
                let core = cyclic_reduce(&nf).0;
                if core.len() < cur.len() {
                    cur = core;
                    continue 'outer;
                }
            }
            let start = cur.min_rotation();
            let mut seen: HashSet<Word> = HashSet::from([start.clone()]);
            let mut queue = VecDeque::from([start.clone()]);
            let mut best = start;
            while let Some(x) = queue.pop_front() {
                let mut next: Vec<Word> = Vec::new();
                if with_inverse {
                    next.push(x.inverse());
                }
                for k in 0..x.len() {
                    let rot = x.rotate(k);
                    for y in self.half_swaps(&rot.0) {
                        next.push(Word(y));
                    }
                }
                for y in next {
                    let yr = cyclic_reduce(&free_reduce_letters(&y.0)).0;
                    if yr.len() < x.len() {
                        cur = yr;
                        continue 'outer;
                    }
                    if let Some(s) = self.cyclic_dehn_step(&yr) {
                        cur = s;
                        continue 'outer;
                    }
                    let yr = yr.min_rotation();
                    if seen.insert(yr.clone()) {
                        if seen.len() > settings::REWRITE_BUDGET {
                            return Err(Error::BudgetExceeded("cyclic rewrite class too large".into()));
                        }
                        if yr < best {
                            best = yr.clone();
                        }
                        queue.push_back(yr);
                    }
                }
            }
            return Ok(best);
        }
    }
}

/// Largest radius for which the ball is materialized as an explicit table.
pub const TABLE_RADIUS: usize = 8;

/// Outcome of checking rewriting against the reference-representation oracle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallCheck {
    /// Largest orbit-point disagreement between ρ(nf(g·s))·x and ρ(g)ρ(s)·x.
    pub max_residual: f64,
    /// Smallest hyperbolic distance between orbit points of distinct canonical
    /// forms, or a lower bound when no close pair exists.
    pub min_separation: f64,
    /// Pairs on which rewriting and the oracle disagree.
    pub inconsistencies: usize,
}

/// Explicit ball: canonical forms by sphere and the generator moves.
#[derive(Clone, Debug)]
pub struct BallTable {
    pub elements: Vec<Word>,
    pub index: HashMap<Word, u32>,
    /// `moves[g][letter]` is the index of nf(g·letter) when it lies in the ball.
    pub moves: Vec<Vec<Option<u32>>>,
    pub sphere_sizes: Vec<usize>,
    pub check: Option<BallCheck>,
}

/// Ball of radius R about the identity in the Cayley graph.
///
/// Canonical forms come from [`Rewriter::normal_form`]. Up to
/// [`TABLE_RADIUS`] the ball is also materialized and cross-checked against
/// a discrete faithful reference representation; beyond that queries are
/// answered lazily and only the radius cap is enforced.
#[derive(Clone, Debug)]
pub struct CayleyBall {
    pub presentation: Presentation,
    pub radius: usize,
    pub rewriter: Rewriter,
    pub table: Option<BallTable>,
}

pub fn build_ball(p: &Presentation, radius: usize) -> Result<CayleyBall> {
    if radius > settings::BALL_RADIUS {
        return Err(Error::RadiusCapExceeded { requested: radius, cap: settings::BALL_RADIUS });
    }
    let mut ball = CayleyBall::lazy(p, radius)?;
    if radius <= TABLE_RADIUS {
        let reference = crate::charlab::reference_generators(p);
        ball.materialize(reference.as_deref())?;
    }
    Ok(ball)
}

impl CayleyBall {
    /// A ball without an explicit table.
    pub fn lazy(p: &Presentation, radius: usize) -> Result<Self> {
        if radius > settings::BALL_RADIUS {
            return Err(Error::RadiusCapExceeded { requested: radius, cap: settings::BALL_RADIUS });
        }
        Ok(Self { presentation: p.clone(), radius, rewriter: Rewriter::new(p), table: None })
    }

    /// Breadth-first enumeration of canonical forms, layer by layer,
    /// optionally verified with reference generator matrices.
    pub fn materialize(&mut self, reference: Option<&[crate::hyp::Isometry]>) -> Result<()> {
        use crate::hyp::{apply, h3_distance, H3Point, Isometry};
        let n_letters = 2 * self.presentation.rank();
        let letters: Vec<Letter> = (0..n_letters).map(|i| Letter(i as u8)).collect();
        let mats: Option<Vec<Isometry>> = reference.map(|gens| {
            letters.iter().map(|l| if l.is_inverse() { gens[l.gen()].inverse() } else { gens[l.gen()] }).collect()
        });
        let base = H3Point::origin();
        let product = |m: &[Isometry], w: &Word| -> Isometry {
            w.letters().iter().fold(Isometry::identity(), |acc, l| acc * m[l.0 as usize])
        };

        let mut elements = vec![Word::identity()];
        let mut index: HashMap<Word, u32> = HashMap::from([(Word::identity(), 0)]);
        let mut moves: Vec<Vec<Option<u32>>> = Vec::new();
        let mut sphere_sizes = vec![1usize];
        let mut matrices: Vec<Isometry> = vec![Isometry::identity()];
        let mut points: Vec<H3Point> = vec![base];
        let mut max_residual = 0.0f64;
        let mut inconsistencies = 0usize;
        let mut start = 0;
        for r in 0..=self.radius {
            let end = elements.len();
            for gi in start..end {
                let mut row = vec![None; n_letters];
                for (li, &l) in letters.iter().enumerate() {
                    let mut v = elements[gi].0.clone();
                    v.push(l);
                    let nf = self.rewriter.normal_form(&Word(v))?;
                    // Geodesic lengths of neighbours differ by at most one.
                    if nf.len() > r + 1 || nf.len() + 1 < r {
                        inconsistencies += 1;
                    }
                    if nf.len() > self.radius {
                        continue;
                    }
                    let idx = match index.get(&nf) {
                        Some(&i) => i,
                        None => {
                            let i = elements.len() as u32;
                            index.insert(nf.clone(), i);
                            if let Some(m) = &mats {
                                let mat = product(m, &nf);
                                matrices.push(mat);
                                points.push(apply(&mat, &base));
                            }
                            elements.push(nf);
                            i
                        }
                    };
                    row[li] = Some(idx);
                    if let Some(m) = &mats {
                        let expected = apply(&(matrices[gi] * m[li]), &base);
                        max_residual = max_residual.max(h3_distance(&expected, &points[idx as usize]));
                    }
                }
                moves.push(row);
            }
            if r == self.radius {
                break;
            }
            sphere_sizes.push(elements.len() - end);
            start = end;
        }
        let check = if mats.is_some() {
            let min_separation = min_separation(&points, 0.1);
            if !(min_separation > 1e3 * max_residual) {
                inconsistencies += 1;
            }
            Some(BallCheck { max_residual, min_separation, inconsistencies })
        } else {
            None
        };
        if inconsistencies > 0 {
            return Err(Error::BallInconsistent(format!(
                "{inconsistencies} disagreements between rewriting and the reference oracle"
            )));
        }
        self.table = Some(BallTable { elements, index, moves, sphere_sizes, check });
        Ok(())
    }

    pub fn canonical(&self, w: &Word) -> Result<Word> {
        let nf = self.rewriter.normal_form(w)?;
        if nf.len() > self.radius {
            return Err(Error::OutsideBall { length: nf.len(), radius: self.radius });
        }
        Ok(nf)
    }

    pub fn equal(&self, u: &Word, v: &Word) -> Result<bool> {
        Ok(self.canonical(&u.inverse().mul(v))?.is_empty())
    }

    /// Number of elements, when materialized.
    pub fn size(&self) -> Option<usize> {
        self.table.as_ref().map(|t| t.elements.len())
    }

    /// Canonical class representative under conjugation (and optionally inversion).
    pub fn cyclic_canonical(&self, w: &Word, with_inverse: bool) -> Result<Word> {
        let c = self.rewriter.cyclic_canonical(w, with_inverse)?;
        if c.len() > self.radius {
            return Err(Error::OutsideBall { length: c.len(), radius: self.radius });
        }
        Ok(c)
    }
}

/// Smallest hyperbolic distance between distinct points, searched with a
/// spatial hash; returns `cutoff` when no pair is closer.
fn min_separation(points: &[crate::hyp::H3Point], cutoff: f64) -> f64 {
    use crate::hyp::h3_distance;
    const H: f64 = 0.5;
    let key = |p: &crate::hyp::H3Point, k: i64| -> (i64, i64, i64) {
        let w = H * (k as f64 * H).exp();
        (k, (p.z.re / w).floor() as i64, (p.z.im / w).floor() as i64)
    };
    let level = |p: &crate::hyp::H3Point| (p.t.ln() / H).floor() as i64;
    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        grid.entry(key(p, level(p))).or_default().push(i);
    }
    let mut best = cutoff;
    for (i, p) in points.iter().enumerate() {
        let k0 = level(p);
        for k in k0 - 1..=k0 + 1 {
            let (_, x, y) = key(p, k);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(v) = grid.get(&(k, x.wrapping_add(dx), y.wrapping_add(dy))) {
                        for &j in v {
                            if j > i {
                                best = best.min(h3_distance(p, &points[j]));
                            }
                        }
                    }
                }
            }
        }
    }
    best
}

pub fn geodesic_length(ball: &CayleyBall, w: &Word) -> Result<usize> {
    Ok(ball.canonical(w)?.len())
}

/// Minimum geodesic length over cyclic rotations of the cyclic core, iterated
/// to a fixed point (exact for free groups).
pub fn cayley_translation_length(ball: &CayleyBall, w: &Word) -> Result<usize> {
    Ok(ball.cyclic_canonical(w, false)?.len())
}

/// A periodic bi-infinite edge path through the identity, stored as one period.
///
/// Vertex n is the product of the first n letters of `period^∞` (negative n
/// walk backwards through inverses). It represents the axis of the class of
/// `period` up to translation by a conjugator.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicPath {
    pub period: Word,
    pub windows: usize,
}

impl GeodesicPath {
    pub fn period_len(&self) -> usize {
        self.period.len()
    }

    /// Letter traversed from vertex n to vertex n + 1.
    pub fn step(&self, n: i64) -> Letter {
        let l = self.period.len() as i64;
        self.period.letters()[n.rem_euclid(l) as usize]
    }

    pub fn first_index(&self) -> i64 {
        -((self.windows * self.period.len()) as i64)
    }

    pub fn last_index(&self) -> i64 {
        (self.windows * self.period.len()) as i64
    }

    pub fn vertex(&self, n: i64) -> Word {
        let l = self.period.len() as i64;
        let q = n.div_euclid(l);
        let r = n.rem_euclid(l) as usize;
        self.period.pow(q).mul(&self.period.prefix(r))
    }

    pub fn vertices(&self) -> Vec<Word> {
        (self.first_index()..=self.last_index()).map(|n| self.vertex(n)).collect()
    }
}

pub fn quasi_axis(ball: &CayleyBall, w: &Word, windows: usize) -> Result<GeodesicPath> {
    let period = ball.cyclic_canonical(w, false)?;
    if period.is_empty() {
        return Err(Error::IdentityHasNoAxis);
    }
    Ok(GeodesicPath { period, windows })
}

/// An automorphism given by generator images, shipped with its inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct Automorphism {
    pub name: String,
    pub images: Vec<Word>,
    pub inverse_images: Vec<Word>,
}

fn substitute(images: &[Word], w: &Word) -> Word {
    let mut v = Vec::new();
    for l in w.letters() {
        let img = &images[l.gen()];
        if l.is_inverse() {
            v.extend(img.inverse().0);
        } else {
            v.extend_from_slice(&img.0);
        }
    }
    free_reduce_letters(&v)
}

impl Automorphism {
    pub fn identity(rank: usize) -> Self {
        let g: Vec<Word> = (0..rank).map(Word::generator).collect();
        Self { name: "id".into(), images: g.clone(), inverse_images: g }
    }

    /// x ↦ u·x·u⁻¹.
    pub fn inner(rank: usize, u: &Word) -> Self {
        let conj = |u: &Word, x: Word| u.mul(&x).mul(&u.inverse());
        Self {
            name: "inner".into(),
            images: (0..rank).map(|i| conj(u, Word::generator(i))).collect(),
            inverse_images: (0..rank).map(|i| conj(&u.inverse(), Word::generator(i))).collect(),
        }
    }

    pub fn apply(&self, w: &Word) -> Word {
        substitute(&self.images, w)
    }

    pub fn apply_inverse(&self, w: &Word) -> Word {
        substitute(&self.inverse_images, w)
    }

    pub fn inverse(&self) -> Self {
        Self { name: format!("{}^-1", self.name), images: self.inverse_images.clone(), inverse_images: self.images.clone() }
    }

    /// `self ∘ g`.
    pub fn compose(&self, g: &Automorphism) -> Self {
        Self {
            name: format!("{}*{}", self.name, g.name),
            images: g.images.iter().map(|w| self.apply(w)).collect(),
            inverse_images: self.inverse_images.iter().map(|w| g.apply_inverse(w)).collect(),
        }
    }

    pub fn pow(&self, n: i64) -> Self {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut acc = Self::identity(self.images.len());
        for _ in 0..n.unsigned_abs() {
            acc = acc.compose(&base);
        }
        acc.name = format!("{}^{}", self.name, n);
        acc
    }

    /// Checks f∘f⁻¹ = f⁻¹∘f = id on generators and f(relator) = 1, in the group.
    pub fn validate(&self, ball: &CayleyBall) -> Result<()> {
        let p = &ball.presentation;
        if self.images.len() != p.rank() || self.inverse_images.len() != p.rank() {
            return Err(Error::Invalid(format!("automorphism {} has wrong arity", self.name)));
        }
        for g in p.generators() {
            for w in [self.apply(&self.apply_inverse(&g)), self.apply_inverse(&self.apply(&g))] {
                if !ball.equal(&w, &g)? {
                    return Err(Error::Invalid(format!("declared inverse of {} is wrong", self.name)));
                }
            }
        }
        for r in &p.relators {
            for w in [self.apply(r), self.apply_inverse(r)] {
                if !ball.canonical(&w)?.is_empty() {
                    return Err(Error::Invalid(format!("{} does not preserve the relator", self.name)));
                }
            }
        }
        Ok(())
    }
}

pub fn apply_automorphism(f: &Automorphism, w: &Word) -> Word {
    f.apply(w)
}

/// Mapping classes shipped for the built-in presentations.
///
/// Free(2): the Nielsen twists a ↦ ab and b ↦ ba. Nonorientable genus 3:
/// Dehn twists along the two-sided curves ab, bc and ca; the twist along
/// γ = ab sends a ↦ aγ, b ↦ γ⁻¹b and fixes c (and γ).
pub fn shipped_automorphisms(p: &Presentation) -> Vec<Automorphism> {
    let w = |s: &str| p.parse_word(s).expect("built-in word");
    let auto = |name: &str, imgs: &[&str], inv: &[&str]| Automorphism {
        name: name.into(),
        images: imgs.iter().map(|s| w(s)).collect(),
        inverse_images: inv.iter().map(|s| w(s)).collect(),
    };
    match p.kind {
        PresentationKind::Free(2) => vec![
            auto("nielsen_ab", &["ab", "b"], &["aB", "b"]),
            auto("nielsen_ba", &["a", "ba"], &["a", "bA"]),
        ],
        PresentationKind::NonorientableSurface(3) => vec![
            auto("twist_ab", &["aab", "BAb", "c"], &["aBA", "abb", "c"]),
            auto("twist_bc", &["a", "bbc", "CBc"], &["a", "bCB", "bcc"]),
            auto("twist_ca", &["ACa", "b", "cca"], &["caa", "b", "cAC"]),
        ],
        _ => Vec::new(),
    }
}
