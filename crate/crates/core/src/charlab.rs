//! Representations, families over character-variety slices and the
//! Out-action on characters.

use std::collections::HashSet;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hyp::{classify, Isometry, IsometryClass};
use crate::settings::{self, NumericSettings};
use crate::words::{Automorphism, Letter, Presentation, PresentationKind, Word};

/// Glide length ln(2 + √3) of the anchor, the regular {6,6} hexagon group.
pub fn anchor_glide_length() -> f64 {
    (2.0 + 3f64.sqrt()).ln()
}

/// Axis position of the second glide at the anchor.
pub const ANCHOR_KAPPA: f64 = 1.0 / 3.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Representation {
    pub presentation: Presentation,
    pub gens: Vec<Isometry>,
    /// Max over relators of the distance of ρ(relator) from ±I (entrywise max norm).
    pub residual: f64,
    pub note: String,
}

impl Representation {
    pub fn new(presentation: &Presentation, gens: Vec<Isometry>, note: impl Into<String>) -> Result<Self> {
        if gens.len() != presentation.rank() {
            return Err(Error::Invalid(format!(
                "expected {} generator matrices, got {}",
                presentation.rank(),
                gens.len()
            )));
        }
        let mut rep = Self { presentation: presentation.clone(), gens, residual: 0.0, note: note.into() };
        rep.residual = rep.relator_residual();
        Ok(rep)
    }

    pub fn letter(&self, l: Letter) -> Isometry {
        let g = self.gens[l.gen()];
        if l.is_inverse() {
            g.inverse()
        } else {
            g
        }
    }

    pub fn image(&self, w: &Word) -> Isometry {
        w.letters().iter().fold(Isometry::identity(), |acc, &l| acc * self.letter(l))
    }

    pub fn relator_residual(&self) -> f64 {
        self.presentation
            .relators
            .iter()
            .map(|r| self.image(r).psl_distance(&Isometry::identity()))
            .fold(0.0, f64::max)
    }

    /// g·ρ·g⁻¹.
    pub fn conjugated(&self, g: &Isometry) -> Self {
        let gens = self.gens.iter().map(|m| m.conjugate_by(g)).collect();
        Self { gens, ..self.clone() }
    }
}

/// One-complex-parameter slices through the character variety.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RepFamily {
    /// Nonorientable genus-3 groups ⟨a,b,c | a²b²c²⟩ from two glides: `a`
    /// along (0, ∞) with length `t1`, `b` along (1, κ) with length `t2`;
    /// the parameter is κ, and c closes the relator.
    NecGenus3 { t1: f64, t2: f64 },
    /// Free group ⟨a, b⟩ with fixed tr a, tr b; the parameter is tr ab.
    TraceTripleF2 { tr_a: C64, tr_b: C64 },
}

impl RepFamily {
    pub fn nec_anchor() -> Self {
        let t = anchor_glide_length();
        RepFamily::NecGenus3 { t1: t, t2: t }
    }

    pub fn f2_anchor() -> Self {
        RepFamily::TraceTripleF2 { tr_a: C64::new(3.0, 0.0), tr_b: C64::new(3.0, 0.0) }
    }

    /// Parameter of the discrete faithful anchor point.
    pub fn anchor_parameter(&self) -> C64 {
        match self {
            RepFamily::NecGenus3 { .. } => C64::new(ANCHOR_KAPPA, 0.0),
            RepFamily::TraceTripleF2 { .. } => C64::new(3.0, 0.0),
        }
    }

    pub fn presentation(&self) -> Presentation {
        match self {
            RepFamily::NecGenus3 { .. } => Presentation::nonorientable(3),
            RepFamily::TraceTripleF2 { .. } => Presentation::free(2),
        }
    }

    /// Half-width of the real root-finding path through a seed parameter.
    pub fn path_half_width(&self) -> f64 {
        2.0
    }
}

/// Glide of length t along (0, ∞), attracting ∞: the det −1 matrix
/// diag(e^{t/2}, −e^{−t/2}) divided by i, so tr² = −4·sinh²(t/2).
pub fn glide(t: f64) -> Isometry {
    let i = C64::new(0.0, 1.0);
    Isometry::from_sl2(
        C64::new((t / 2.0).exp(), 0.0) / i,
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(-(-t / 2.0).exp(), 0.0) / i,
    )
}

/// Möbius map sending 0 ↦ `repelling`, ∞ ↦ `attracting`.
fn frame(repelling: C64, attracting: C64) -> Result<Isometry> {
    Isometry::new(attracting, repelling, C64::new(1.0, 0.0), C64::new(1.0, 0.0))
}

pub fn build_representation(fam: &RepFamily, p: C64) -> Result<Representation> {
    match *fam {
        RepFamily::NecGenus3 { t1, t2 } => {
            if !(t1 > 0.0 && t2 > 0.0) {
                return Err(Error::Invalid("glide lengths must be positive".into()));
            }
            let a = glide(t1);
            let phi = frame(C64::new(1.0, 0.0), p)?;
            let b = glide(t2).conjugate_by(&phi);
            let mut h = (a * a * b * b).inverse();
            match classify(&h, settings::CLASS_TOL) {
                IsometryClass::Hyperbolic { .. } | IsometryClass::Loxodromic { .. } => {}
                _ => return Err(Error::HNotLoxodromic),
            }
            // PSL sign of h fixed by Re tr h ≥ 0 (h = (a²b²)⁻¹ has tr h > 2 at the
            // anchor); then c = (I − h)/√(2 − tr h) is the glide-type root,
            // c² = −h, and tr² c = 2 − tr h.
            if h.trace().re < 0.0 {
                h = Isometry::from_sl2(-h.a, -h.b, -h.c, -h.d);
            }
            let s = C64::new(2.0, 0.0) - h.trace();
            if s.norm() < settings::DEGENERATE_TOL {
                return Err(Error::SquareRootUndefined);
            }
            let r = s.sqrt();
            let one = C64::new(1.0, 0.0);
            let c = Isometry::from_sl2((one - h.a) / r, -h.b / r, -h.c / r, (one - h.d) / r);
            let pres = Presentation::nonorientable(3);
            Representation::new(&pres, vec![a, b, c], format!("nec3 t1={t1:.16e} t2={t2:.16e} kappa={p}"))
        }
        RepFamily::TraceTripleF2 { tr_a, tr_b } => {
            // A = [[x, 1], [−1, 0]], B = [[0, ζ], [−1/ζ, y]] with ζ² + zζ + 1 = 0
            // gives tr A = x, tr B = y, tr AB = −ζ − 1/ζ = z.
            let z = p;
            let disc = (z * z - 4.0).sqrt();
            let zeta1 = (-z + disc) / 2.0;
            let zeta2 = (-z - disc) / 2.0;
            let zeta = if zeta1.norm() >= zeta2.norm() { zeta1 } else { zeta2 };
            if zeta.norm() < 1e-300 {
                return Err(Error::Degenerate("trace triple gives zero entry".into()));
            }
            let zero = C64::new(0.0, 0.0);
            let a = Isometry::from_sl2(tr_a, C64::new(1.0, 0.0), C64::new(-1.0, 0.0), zero);
            let b = Isometry::from_sl2(zero, zeta, -1.0 / zeta, tr_b);
            Representation::new(&Presentation::free(2), vec![a, b], format!("f2 tra={tr_a} trb={tr_b} trab={z}"))
        }
    }
}

/// Discrete faithful anchor representation of a family.
pub fn anchor(fam: &RepFamily) -> Representation {
    build_representation(fam, fam.anchor_parameter()).expect("anchor parameters are valid")
}

/// Generators of a discrete faithful representation used as an equality and
/// geometry oracle, when one is available for the presentation.
pub fn reference_generators(p: &Presentation) -> Option<Vec<Isometry>> {
    match p.kind {
        PresentationKind::NonorientableSurface(3) => Some(anchor(&RepFamily::nec_anchor()).gens),
        PresentationKind::Free(2) => Some(anchor(&RepFamily::f2_anchor()).gens),
        PresentationKind::Free(n) => Some(free_reference(n)),
        _ => None,
    }
}

/// Discrete faithful generators for a free group of rank n, taken from the
/// rank-2 anchor: the kernel of ⟨a, b⟩ → ℤ/(n−1), a ↦ 1, b ↦ 0, is free on
/// a^{n−1} and a^j·b·a^{−j} for j < n−1.
pub fn free_reference(n: usize) -> Vec<Isometry> {
    let f2 = anchor(&RepFamily::f2_anchor()).gens;
    let (a, b) = (f2[0], f2[1]);
    match n {
        0 => vec![],
        1 => vec![a],
        _ => {
            let k = n as i64 - 1;
            let mut out = vec![a.pow(k)];
            out.extend((0..k).map(|j| a.pow(j) * b * a.pow(-j)));
            out
        }
    }
}

pub fn trace_squared(rho: &Representation, w: &Word) -> C64 {
    rho.image(w).trace_sq()
}

/// [ρ∘f⁻¹]: generator g ↦ ρ(f⁻¹(g)).
pub fn act(f: &Automorphism, rho: &Representation) -> Representation {
    let gens = f.inverse_images.iter().map(|w| rho.image(w)).collect();
    let mut out = Representation {
        presentation: rho.presentation.clone(),
        gens,
        residual: 0.0,
        note: format!("{} . {}", f.name, rho.note),
    };
    out.residual = out.relator_residual();
    out
}

/// Fixed word list for trace fingerprints: generators, products x_i·x_j
/// (i < j), then the first 20 remaining freely reduced words in shortlex order
/// whose cyclic class has not appeared yet.
pub fn fingerprint_words(p: &Presentation) -> Vec<Word> {
    let n = p.rank();
    let mut words: Vec<Word> = p.generators();
    for i in 0..n {
        for j in i + 1..n {
            words.push(Word::generator(i).mul(&Word::generator(j)));
        }
    }
    let class = |w: &Word| {
        let core = crate::words::cyclic_reduce(w).0;
        let inv = core.inverse();
        core.min_rotation().min(inv.min_rotation())
    };
    let mut seen: HashSet<Word> = words.iter().map(class).collect();
    let letters: Vec<Letter> = (0..2 * n).map(|i| Letter::new(i / 2, i % 2 == 1)).collect();
    let mut layer = vec![Word::identity()];
    let mut probes = Vec::new();
    'grow: for _len in 1..=6 {
        let mut next = Vec::new();
        for w in &layer {
            for &l in &letters {
                if w.letters().last() == Some(&l.inv()) {
                    continue;
                }
                let mut v = w.letters().to_vec();
                v.push(l);
                next.push(Word::new(&v));
            }
        }
        next.sort();
        for w in &next {
            let k = class(w);
            if !k.is_empty() && seen.insert(k) {
                probes.push(w.clone());
                if probes.len() == 20 {
                    break 'grow;
                }
            }
        }
        layer = next;
    }
    words.extend(probes);
    words
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceFingerprint(pub Vec<C64>);

impl TraceFingerprint {
    pub fn of(rho: &Representation) -> Self {
        Self::with_words(rho, &fingerprint_words(&rho.presentation))
    }

    pub fn with_words(rho: &Representation, words: &[Word]) -> Self {
        TraceFingerprint(words.iter().map(|w| trace_squared(rho, w)).collect())
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &TraceFingerprint) -> f64 {
        self.0.iter().zip(&other.0).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }
}

pub fn conjugacy_distance(r1: &Representation, r2: &Representation) -> f64 {
    TraceFingerprint::of(r1).distance(&TraceFingerprint::of(r2))
}

/// Whether the generators share a fixed point on ∂H³ (a reducible character).
pub fn is_reducible(rho: &Representation, tol: f64) -> bool {
    let fixed: Vec<Vec<crate::hyp::BoundaryPoint>> = rho.gens.iter().map(fixed_points).collect();
    let Some(first) = fixed.first() else { return true };
    first.iter().any(|p| fixed[1..].iter().all(|f| f.iter().any(|q| p.chordal_distance(q) < tol)))
}

fn fixed_points(m: &Isometry) -> Vec<crate::hyp::BoundaryPoint> {
    use crate::hyp::BoundaryPoint::*;
    let zero = C64::new(0.0, 0.0);
    if m.c == zero {
        let mut v = vec![Infinity];
        if m.d != m.a {
            v.push(Finite(m.b / (m.d - m.a)));
        }
        return v;
    }
    let disc = ((m.a - m.d) * (m.a - m.d) + 4.0 * m.b * m.c).sqrt();
    vec![Finite((m.a - m.d + disc) / (2.0 * m.c)), Finite((m.a - m.d - disc) / (2.0 * m.c))]
}

/// Root of `tr²(ρ_p(γ)) − target` along the real line through `seed`.
///
/// The path is sampled on a uniform grid; the sign change nearest the seed is
/// bisected and then polished with secant steps.
pub fn tune_trace(fam: &RepFamily, gamma: &Word, target: f64, seed: C64) -> Result<C64> {
    let f = |s: f64| -> Option<f64> {
        let rho = build_representation(fam, seed + s).ok()?;
        let t = trace_squared(&rho, gamma);
        t.is_finite().then_some(t.re - target)
    };
    let w = fam.path_half_width();
    let n = 800;
    let samples: Vec<(f64, Option<f64>)> =
        (0..=n).map(|k| -w + 2.0 * w * k as f64 / n as f64).map(|s| (s, f(s))).collect();
    let mut brackets: Vec<(f64, f64, f64, f64)> = Vec::new();
    for pair in samples.windows(2) {
        if let ((s0, Some(f0)), (s1, Some(f1))) = (pair[0], pair[1]) {
            if f0 == 0.0 {
                brackets.push((s0, s0, f0, f0));
            } else if f0 * f1 < 0.0 {
                brackets.push((s0, s1, f0, f1));
            }
        }
    }
    brackets.sort_by(|x, y| (x.0 + x.1).abs().total_cmp(&(y.0 + y.1).abs()));
    for (mut lo, mut hi, mut flo, _fhi) in brackets {
        for _ in 0..200 {
            if hi - lo <= 1e-15 * (1.0 + lo.abs()) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let Some(fm) = f(mid) else { break };
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if (fm < 0.0) == (flo < 0.0) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        let mut s = 0.5 * (lo + hi);
        // Secant polish from the bisection bracket.
        let (mut s0, mut s1) = (lo, hi);
        if let (Some(mut f0), Some(mut f1)) = (f(s0), f(s1)) {
            for _ in 0..8 {
                if f1 == f0 {
                    break;
                }
                let s2 = s1 - f1 * (s1 - s0) / (f1 - f0);
                let Some(f2) = f(s2) else { break };
                (s0, f0, s1, f1) = (s1, f1, s2, f2);
                if f1.abs() < f(s).map_or(f64::INFINITY, f64::abs) {
                    s = s1;
                }
                if f1 == 0.0 {
                    break;
                }
            }
        }
        let p = seed + s;
        if let Ok(rho) = build_representation(fam, p) {
            let t = trace_squared(&rho, gamma);
            if (t - target).norm() < 1e-10 {
                return Ok(p);
            }
        }
    }
    Err(Error::NoBracket)
}

/// Parameter where ρ(γ) is elliptic of order n: tr² = 4·cos²(kπ/n).
pub fn find_elliptic_approx(fam: &RepFamily, gamma: &Word, n: u32, k: u32, seed: C64) -> Result<C64> {
    if n == 0 || gcd(n, k) != 1 {
        return Err(Error::Invalid(format!("need gcd(k, n) = 1, got k = {k}, n = {n}")));
    }
    let target = 4.0 * (k as f64 * std::f64::consts::PI / n as f64).cos().powi(2);
    tune_trace(fam, gamma, target, seed)
}

/// Parameter where ρ(γ) is parabolic: tr² = 4.
pub fn find_parabolic(fam: &RepFamily, gamma: &Word, seed: C64) -> Result<C64> {
    tune_trace(fam, gamma, 4.0, seed)
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn stabilizer_check(rho: &Representation, f: &Automorphism, tol: f64) -> bool {
    conjugacy_distance(rho, &act(f, rho)) < tol
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitReport {
    pub depth: usize,
    /// Distinct characters reached with automorphism words of length ≤ d, for d = 0..=depth.
    pub distinct_by_depth: Vec<usize>,
    /// Of those, the ones with ‖fingerprint‖∞ ≤ `window_bound`.
    pub in_window_by_depth: Vec<usize>,
    pub window_bound: f64,
}

impl OrbitReport {
    pub fn distinct(&self) -> usize {
        *self.distinct_by_depth.last().unwrap_or(&0)
    }

    pub fn in_window(&self) -> usize {
        *self.in_window_by_depth.last().unwrap_or(&0)
    }
}

/// Dedup key: each fingerprint entry rounded at relative precision `tol`.
fn fingerprint_key(fp: &TraceFingerprint, tol: f64) -> Vec<(i64, i64)> {
    fp.0.iter()
        .map(|z| {
            let scale = tol * z.norm().max(1.0).log2().ceil().exp2();
            ((z.re / scale).round() as i64, (z.im / scale).round() as i64)
        })
        .collect()
}

/// Breadth-first orbit of a character under the given automorphisms and
/// their inverses, deduplicated by trace fingerprint.
pub fn orbit_sample(
    rho: &Representation,
    gens: &[Automorphism],
    depth: usize,
    window_bound: f64,
    settings: &NumericSettings,
) -> Result<OrbitReport> {
    if depth > 8 {
        return Err(Error::BudgetExceeded(format!("orbit depth {depth} > 8")));
    }
    let words = fingerprint_words(&rho.presentation);
    let moves: Vec<Automorphism> = gens.iter().flat_map(|f| [f.clone(), f.inverse()]).collect();
    let fp0 = TraceFingerprint::with_words(rho, &words);
    let mut seen: HashSet<Vec<(i64, i64)>> = HashSet::from([fingerprint_key(&fp0, settings.fingerprint_tol)]);
    let mut in_window = usize::from(fp0.sup_norm() <= window_bound);
    let mut distinct_by_depth = vec![1];
    let mut in_window_by_depth = vec![in_window];
    let mut frontier = vec![rho.clone()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for r in &frontier {
            for f in &moves {
                let image = act(f, r);
                let fp = TraceFingerprint::with_words(&image, &words);
                if !fp.0.iter().all(|z| z.is_finite()) {
                    continue;
                }
                if seen.insert(fingerprint_key(&fp, settings.fingerprint_tol)) {
                    if seen.len() > settings::CANDIDATE_BUDGET {
                        return Err(Error::BudgetExceeded("orbit sample too large".into()));
                    }
                    if fp.sup_norm() <= window_bound {
                        in_window += 1;
                    }
                    next.push(image);
                }
            }
        }
        frontier = next;
        distinct_by_depth.push(seen.len());
        in_window_by_depth.push(in_window);
    }
    Ok(OrbitReport { depth, distinct_by_depth, in_window_by_depth, window_bound })
}

/// A rectangular window of the complex family parameter, sampled at cell centers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanGrid {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl ScanGrid {
    /// Parameter at the center of cell (i, j); i indexes Re, j indexes Im.
    pub fn center(&self, i: usize, j: usize) -> C64 {
        C64::new(
            self.re_min + (i as f64 + 0.5) * (self.re_max - self.re_min) / self.nx as f64,
            self.im_min + (j as f64 + 0.5) * (self.im_max - self.im_min) / self.ny as f64,
        )
    }
}

/// Outcome class of a scan cell, including construction failures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellStatus {
    Certified,
    Inconclusive,
    Failed,
    BuildError,
}

impl CellStatus {
    pub fn label(&self) -> &'static str {
        match self {
            CellStatus::Certified => "certified",
            CellStatus::Inconclusive => "inconclusive",
            CellStatus::Failed => "failed",
            CellStatus::BuildError => "build_error",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        [CellStatus::Certified, CellStatus::Inconclusive, CellStatus::Failed, CellStatus::BuildError]
            .into_iter()
            .find(|c| c.label() == s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub cell_i: usize,
    pub cell_j: usize,
    pub p: C64,
    pub residual: Option<f64>,
    pub status: CellStatus,
    pub min_gap: Option<f64>,
    pub stride: Option<usize>,
    /// Witness word on failure, or the error message for build errors.
    pub witness: String,
    pub n_parabolic: usize,
    pub r_emp: Option<f64>,
    pub r_max: Option<f64>,
}

fn scan_cell(
    fam: &RepFamily,
    p: C64,
    prims: &[crate::primitives::PrimitiveClass],
    params: &crate::pscert::PlaneCriterionParams,
    settings: &NumericSettings,
) -> std::result::Result<(f64, crate::pscert::CertResult), (Option<f64>, String)> {
    use crate::pscert::{certify, OrbitMap};
    let rho = build_representation(fam, p).map_err(|e| (None, e.to_string()))?;
    let residual = rho.residual;
    let om = OrbitMap::with_bound(rho, crate::hyp::H3Point::origin(), settings.residual_bound)
        .map_err(|e| (Some(residual), e.to_string()))?;
    Ok((residual, certify(&om, prims, params, true, settings)))
}

/// Certifies every cell of the grid. Rows are ordered with j (Im) outer and
/// i (Re) inner regardless of thread count; per-cell errors become rows.
pub fn scan(
    fam: &RepFamily,
    grid: &ScanGrid,
    prims: &[crate::primitives::PrimitiveClass],
    params: &crate::pscert::PlaneCriterionParams,
    settings: &NumericSettings,
) -> Result<Vec<ScanRow>> {
    use rayon::prelude::*;
    if grid.nx == 0 || grid.ny == 0 || grid.nx * grid.ny > 1_000_000 {
        return Err(Error::Invalid(format!("grid {}x{} must have between 1 and 10^6 cells", grid.nx, grid.ny)));
    }
    let pres = fam.presentation();
    let cells: Vec<(usize, usize)> = (0..grid.ny).flat_map(|j| (0..grid.nx).map(move |i| (i, j))).collect();
    Ok(cells
        .par_iter()
        .map(|&(i, j)| {
            let p = grid.center(i, j);
            match scan_cell(fam, p, prims, params, settings) {
                Ok((residual, cert)) => {
                    let status = match cert.verdict {
                        crate::pscert::Verdict::Certified => CellStatus::Certified,
                        crate::pscert::Verdict::Inconclusive => CellStatus::Inconclusive,
                        crate::pscert::Verdict::Failed => CellStatus::Failed,
                    };
                    let finite = |x: f64| x.is_finite().then_some(x);
                    ScanRow {
                        cell_i: i,
                        cell_j: j,
                        p,
                        residual: Some(residual),
                        status,
                        min_gap: cert.min_gap.and_then(finite),
                        stride: Some(cert.stride),
                        witness: cert.witness.as_ref().map(|w| pres.format_word(&w.word)).unwrap_or_default(),
                        n_parabolic: cert.parabolic.len(),
                        r_emp: finite(cert.ratios.r_emp),
                        r_max: finite(cert.ratios.r_max),
                    }
                }
                Err((residual, msg)) => ScanRow {
                    cell_i: i,
                    cell_j: j,
                    p,
                    residual,
                    status: CellStatus::BuildError,
                    min_gap: None,
                    stride: None,
                    witness: msg,
                    n_parabolic: 0,
                    r_emp: None,
                    r_max: None,
                },
            }
        })
        .collect())
}
