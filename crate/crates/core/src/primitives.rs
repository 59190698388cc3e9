//! Primitive elements: Christoffel words for rank-2 free groups and an
//! axis-linking simplicity test for surface groups.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::charlab::Representation;
use crate::error::{Error, Result};
use crate::hyp::{axis, BoundaryPoint, Isometry};
use crate::settings::{self, NumericSettings};
use crate::words::{
    cyclic_reduce, orientation_class, CayleyBall, Letter, Presentation, PresentationKind, Rewriter, Word,
};

/// A conjugacy-and-inversion class of simple closed curves.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PrimitiveClass {
    /// Shortlex-least word among shortest cyclic representatives of the class and its inverse.
    pub word: Word,
    pub orientation: i8,
    pub length: usize,
    /// Conjugator depth of the simplicity test; `None` for exact (free-group) verdicts.
    pub verified_depth: Option<usize>,
}

impl PrimitiveClass {
    fn new(p: &Presentation, word: Word, verified_depth: Option<usize>) -> Self {
        Self { orientation: orientation_class(p, &word), length: word.len(), word, verified_depth }
    }
}

impl Ord for PrimitiveClass {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.word.cmp(&other.word)
    }
}

impl PartialOrd for PrimitiveClass {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Discrete faithful representation used as geometric oracle, plus the
/// conjugator depth of the simplicity test.
#[derive(Clone, Debug)]
pub struct ReferenceStructure {
    pub rep: Representation,
    pub depth: usize,
    pub settings: NumericSettings,
    /// ρ(h) for every freely reduced h with |h| ≤ depth.
    conjugators: Vec<Isometry>,
}

impl ReferenceStructure {
    pub fn new(rep: Representation, depth: usize) -> Self {
        let n = rep.presentation.rank();
        let mut layer = vec![(Vec::<Letter>::new(), Isometry::identity())];
        let mut conjugators = vec![Isometry::identity()];
        for _ in 0..depth {
            let mut next = Vec::new();
            for (w, m) in &layer {
                for i in 0..2 * n {
                    let l = Letter::new(i / 2, i % 2 == 1);
                    if w.last() == Some(&l.inv()) {
                        continue;
                    }
                    let mut v = w.clone();
                    v.push(l);
                    let mm = *m * rep.letter(l);
                    conjugators.push(mm);
                    next.push((v, mm));
                }
            }
            layer = next;
        }
        Self { rep, depth, settings: NumericSettings::default(), conjugators }
    }

    /// The built-in reference for a presentation, if any.
    pub fn for_presentation(p: &Presentation, depth: usize) -> Result<Self> {
        let gens = crate::charlab::reference_generators(p)
            .ok_or_else(|| Error::Unsupported(format!("no reference structure for {}", p.name())))?;
        Ok(Self::new(Representation::new(p, gens, "reference")?, depth))
    }
}

pub fn is_proper_power(w: &Word) -> bool {
    let n = w.len();
    (1..n).any(|d| n % d == 0 && w.rotate(d) == *w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxisRelation {
    Crossing,
    Disjoint,
    SameAxis,
}

/// Position of a real boundary point on the circle ℝ ∪ {∞}: 2·atan(x), ∞ ↦ π.
fn circle_angle(p: BoundaryPoint) -> Result<f64> {
    match p {
        BoundaryPoint::Infinity => Ok(std::f64::consts::PI),
        BoundaryPoint::Finite(z) => {
            if z.im.abs() > 1e-7 * (1.0 + z.norm()) {
                return Err(Error::OracleUnusable("axis endpoint off the real circle".into()));
            }
            Ok(2.0 * z.re.atan())
        }
    }
}

fn endpoints(m: &Isometry, s: &NumericSettings) -> Result<(BoundaryPoint, BoundaryPoint)> {
    let ax = axis(m, s.class_tol).map_err(|_| Error::OracleUnusable("element has no axis under the reference".into()))?;
    Ok((ax.repelling, ax.attracting))
}

pub fn axes_cross(g: &Word, h: &Word, reference: &ReferenceStructure) -> Result<AxisRelation> {
    let s = &reference.settings;
    let (g0, g1) = endpoints(&reference.rep.image(g), s)?;
    let (h0, h1) = endpoints(&reference.rep.image(h), s)?;
    let close = |p: &BoundaryPoint, q: &BoundaryPoint| p.chordal_distance(q) < s.same_axis_tol;
    if (close(&g0, &h0) && close(&g1, &h1)) || (close(&g0, &h1) && close(&g1, &h0)) {
        return Ok(AxisRelation::SameAxis);
    }
    Ok(if chords_linked(
        (circle_angle(g0)?, circle_angle(g1)?),
        (circle_angle(h0)?, circle_angle(h1)?),
    ) {
        AxisRelation::Crossing
    } else {
        AxisRelation::Disjoint
    })
}

/// Whether exactly one endpoint of `h` lies strictly inside the arc spanned by `g`.
fn chords_linked(g: (f64, f64), h: (f64, f64)) -> bool {
    let (lo, hi) = if g.0 < g.1 { g } else { (g.1, g.0) };
    let inside = |x: f64| x > lo && x < hi;
    inside(h.0) != inside(h.1)
}

/// Simple-closed-curve test.
///
/// Free groups of rank 2 use the exact Christoffel membership test. Surface
/// groups use the reference structure: the lifts `u·Ax(w)` with
/// `u = h·p⁻¹`, `h` ranging over words of length ≤ `depth` and `p` over
/// prefixes of `w`, must be pairwise non-crossing.
pub fn is_simple(p: &Presentation, w: &Word, reference: Option<&ReferenceStructure>) -> Result<bool> {
    let mut core = cyclic_reduce(w).0;
    if !p.relators.is_empty() {
        // Shortest cyclic representative, so powers hidden by the relator show.
        core = Rewriter::new(p).cyclic_canonical(&core, false)?;
    }
    if core.is_empty() {
        return Err(Error::IdentityHasNoAxis);
    }
    if is_proper_power(&core) {
        return Ok(false);
    }
    match p.kind {
        PresentationKind::Free(2) => Ok(is_primitive_f2(&core)),
        PresentationKind::Free(1) => Ok(core.len() == 1),
        PresentationKind::Free(_) => Err(Error::Unsupported("primitivity is implemented for rank 2 only".into())),
        _ => {
            let r = reference.ok_or_else(|| Error::OracleUnusable("surface test needs a reference structure".into()))?;
            lifts_embedded(&core, r)
        }
    }
}

fn lifts_embedded(w: &Word, r: &ReferenceStructure) -> Result<bool> {
    lifts_embedded_with(w, r, &r.conjugators)
}

fn lifts_embedded_with(w: &Word, r: &ReferenceStructure, conjugators: &[Isometry]) -> Result<bool> {
    let m = r.rep.image(w);
    let (e0, e1) = endpoints(&m, &r.settings)?;
    let mut chords: Vec<(f64, f64)> = Vec::with_capacity(w.len() * conjugators.len());
    let mut prefix_inv = Isometry::identity();
    for i in 0..w.len() {
        if i > 0 {
            prefix_inv = r.rep.letter(w.letters()[i - 1]).inverse() * prefix_inv;
        }
        for h in conjugators {
            let u = *h * prefix_inv;
            let a = circle_angle(u.apply_boundary(e0))?;
            let b = circle_angle(u.apply_boundary(e1))?;
            chords.push(if a < b { (a, b) } else { (b, a) });
        }
    }
    Ok(chords_pairwise_unlinked(chords, r.settings.same_axis_tol))
}

/// Non-crossing test for chords of the circle in O(n log n): after dropping
/// duplicates, a sweep that opens and closes chords must close them in
/// stack order.
fn chords_pairwise_unlinked(mut chords: Vec<(f64, f64)>, tol: f64) -> bool {
    use std::f64::consts::{PI, TAU};
    // Cut the circle in the middle of the widest gap between endpoints, so no
    // endpoint sits near the seam.
    let mut all: Vec<f64> = chords.iter().flat_map(|c| [c.0, c.1]).collect();
    all.sort_by(f64::total_cmp);
    let mut cut = PI;
    let mut widest = -1.0;
    for k in 0..all.len() {
        let next = if k + 1 < all.len() { all[k + 1] } else { all[0] + TAU };
        if next - all[k] > widest {
            widest = next - all[k];
            cut = all[k] + widest / 2.0;
        }
    }
    for c in chords.iter_mut() {
        let a = (c.0 - cut).rem_euclid(TAU);
        let b = (c.1 - cut).rem_euclid(TAU);
        *c = if a < b { (a, b) } else { (b, a) };
    }
    chords.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    chords.dedup_by(|x, y| (x.0 - y.0).abs() < tol && (x.1 - y.1).abs() < tol);
    let mut events: Vec<(f64, usize)> = Vec::with_capacity(2 * chords.len());
    for (k, c) in chords.iter().enumerate() {
        events.push((c.0, k));
        events.push((c.1, k));
    }
    events.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut open = vec![false; chords.len()];
    let mut stack: Vec<usize> = Vec::new();
    for (_, k) in events {
        if open[k] {
            if stack.pop() != Some(k) {
                return false;
            }
        } else {
            open[k] = true;
            stack.push(k);
        }
    }
    true
}

/// Lower Christoffel word of slope p/q on (x, y): q letters x, p letters y;
/// letter i (1-based, n = p + q) is y iff ⌊ip/n⌋ > ⌊(i−1)p/n⌋.
pub fn christoffel_word(p: usize, q: usize, x: Letter, y: Letter) -> Word {
    let n = p + q;
    let letters: Vec<Letter> = (1..=n).map(|i| if (i * p) / n > ((i - 1) * p) / n { y } else { x }).collect();
    Word::new(&letters)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Class representative in a free group: least rotation of w or w⁻¹.
fn free_canonical(w: &Word) -> Word {
    let core = cyclic_reduce(w).0;
    core.min_rotation().min(core.inverse().min_rotation())
}

/// Christoffel classes with `b`-count p and `a`-count q (both sign variants).
fn christoffel_classes(p: usize, q: usize) -> Vec<Word> {
    let (a, b, bi) = (Letter::new(0, false), Letter::new(1, false), Letter::new(1, true));
    vec![free_canonical(&christoffel_word(p, q, a, b)), free_canonical(&christoffel_word(p, q, a, bi))]
}

pub fn is_primitive_f2(w: &Word) -> bool {
    let core = cyclic_reduce(w).0;
    let q = core.letters().iter().filter(|l| l.gen() == 0).count();
    let p = core.len() - q;
    if p == 0 || q == 0 {
        return core.len() == 1;
    }
    if gcd(p, q) != 1 {
        return false;
    }
    christoffel_classes(p, q).contains(&free_canonical(&core))
}

/// All primitive classes of ⟨a, b⟩ of length ≤ max_len.
pub fn f2_primitives(max_len: usize) -> Vec<PrimitiveClass> {
    let pres = Presentation::free(2);
    let mut set: BTreeSet<Word> = BTreeSet::new();
    if max_len >= 1 {
        set.insert(Word::generator(0));
        set.insert(Word::generator(1));
    }
    for n in 2..=max_len {
        for p in 1..n {
            if gcd(p, n - p) == 1 {
                set.extend(christoffel_classes(p, n - p));
            }
        }
    }
    set.into_iter().map(|w| PrimitiveClass::new(&pres, w, None)).collect()
}

/// Cyclic words of length ≤ max_len that are least among their rotations and
/// those of their inverse, contain no subword longer than half a relator
/// (cyclically), are not proper powers, and whose rotations' axes do not
/// cross (a cheap necessary condition for simplicity).
fn simple_candidates(p: &Presentation, rw: &Rewriter, r: &ReferenceStructure, max_len: usize) -> Result<Vec<Word>> {
    let n = 2 * p.rank();
    let letters: Vec<Letter> = (0..n).map(|i| Letter::new(i / 2, i % 2 == 1)).collect();
    let longest_piece = p.relators.iter().map(|w| w.len()).max().unwrap_or(0);
    let identity = [Isometry::identity()];
    let mut out = Vec::new();
    let mut stack: Vec<Vec<Letter>> = letters.iter().rev().map(|&l| vec![l]).collect();
    while let Some(v) = stack.pop() {
        let w = Word::new(&v);
        if w.is_cyclically_reduced()
            && w == w.min_rotation()
            && w <= w.inverse().min_rotation()
            && !is_proper_power(&w)
            && !has_long_relator_piece(rw, &w)
            && lifts_embedded_with(&w, r, &identity)?
        {
            out.push(w);
            if out.len() > settings::CANDIDATE_BUDGET {
                return Err(Error::BudgetExceeded(format!("more than {} candidates", settings::CANDIDATE_BUDGET)));
            }
        }
        if v.len() == max_len {
            continue;
        }
        for &l in letters.iter().rev() {
            if v.last() == Some(&l.inv()) || l < v[0] {
                continue;
            }
            let mut nv = v.clone();
            nv.push(l);
            // Earlier windows were already checked; only pieces ending at the new letter matter.
            let tail = &nv[nv.len().saturating_sub(longest_piece)..];
            if rw.dehn_step(tail).is_none() {
                stack.push(nv);
            }
        }
    }
    Ok(out)
}

fn has_long_relator_piece(rw: &Rewriter, w: &Word) -> bool {
    // Two copies cover every cyclic subword of length ≤ |w|.
    let mut v = w.letters().to_vec();
    v.extend_from_slice(w.letters());
    (0..w.len()).any(|k| rw.dehn_step(&v[k..k + w.len()]).is_some())
}

/// All primitive classes of length ≤ max_len, in canonical order.
pub fn enumerate_primitives(
    ball: &CayleyBall,
    reference: Option<&ReferenceStructure>,
    max_len: usize,
) -> Result<Vec<PrimitiveClass>> {
    let p = &ball.presentation;
    match p.kind {
        PresentationKind::Free(2) => return Ok(f2_primitives(max_len)),
        PresentationKind::Free(_) => {
            return Err(Error::Unsupported("primitivity is implemented for rank 2 only".into()))
        }
        _ => {}
    }
    let r = reference.ok_or_else(|| Error::OracleUnusable("surface enumeration needs a reference structure".into()))?;
    if max_len + 2 * r.depth > ball.radius {
        return Err(Error::RadiusCapExceeded { requested: max_len + 2 * r.depth, cap: ball.radius });
    }
    let candidates = simple_candidates(p, &ball.rewriter, r, max_len)?;
    let results: Vec<Result<Option<PrimitiveClass>>> = candidates
        .par_iter()
        .map(|w| {
            if !lifts_embedded(w, r)? || ball.rewriter.cyclic_canonical(w, true)? != *w {
                return Ok(None);
            }
            Ok(Some(PrimitiveClass::new(p, w.clone(), Some(r.depth))))
        })
        .collect();
    let mut out = Vec::new();
    for res in results {
        if let Some(c) = res? {
            out.push(c);
        }
    }
    out.sort();
    Ok(out)
}

/// Canonical class of an arbitrary word (conjugation and inversion).
pub fn canonical_class(ball: &CayleyBall, w: &Word) -> Result<Word> {
    if ball.presentation.relators.is_empty() {
        return Ok(free_canonical(w));
    }
    ball.cyclic_canonical(w, true)
}
